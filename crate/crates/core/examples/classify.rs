//! Nested-CV group classification (ANOVA selection + linear SVM).

use corrgeo::ml::{make_cv_plan, run_classification, ClassificationConfig, Strata};
use corrgeo::synth::{inject_group_effect, SynthSpec};
use corrgeo::Metric;

fn main() -> corrgeo::Result<()> {
    let cohort = inject_group_effect(&SynthSpec::new(20, 40, 2.0, 10, 0.3, 3))?;
    let labels = cohort.labels()?;
    let plan = make_cv_plan(Strata::Labels(&labels), 5, 5, true, 3)?;
    for metric in Metric::ALL {
        let r = run_classification(&cohort, metric, &plan, &ClassificationConfig::default())?;
        println!(
            "{:>10}: accuracy {:.3}  AUC {:.3}",
            metric.name(),
            r.mean("accuracy"),
            r.mean("auc")
        );
    }
    Ok(())
}
