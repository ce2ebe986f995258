//! Fisher-ratio subspace centers versus LDA on flattened bases when every
//! sample basis carries random column signs.

use corrgeo::ml::{make_cv_plan, run_subspace_pipeline, GrassmannConfig, Strata};
use corrgeo::synth::{inject_subspace_effect, Jitter};

fn main() -> corrgeo::Result<()> {
    let cohort = inject_subspace_effect(60, 4, 30, 0.5, 0.03, 11)?;
    let flipped = cohort.jittered(Jitter::SignFlips, 11);
    let (points, labels) = cohort.points_and_labels();
    let (flipped_points, _) = flipped.points_and_labels();
    let plan = make_cv_plan(Strata::Labels(&labels), 5, 2, true, 11)?;
    let config = GrassmannConfig::default();

    for (name, pts) in [("aligned", &points), ("sign-flipped", &flipped_points)] {
        let r = run_subspace_pipeline(pts, &labels, &plan, &config)?;
        println!(
            "{name:>13}: grassmann accuracy {:.3}  lda accuracy {:.3}",
            r.grassmann.mean("accuracy"),
            r.lda.mean("accuracy")
        );
    }
    Ok(())
}
