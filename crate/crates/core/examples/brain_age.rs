//! Nested-CV age regression (PCA + Elastic Net) under two representations.

use corrgeo::ml::{make_cv_plan, run_brainage, BrainAgeConfig, Strata};
use corrgeo::synth::{inject_age_trend, AgeTrend, SynthSpec};
use corrgeo::Metric;

fn main() -> corrgeo::Result<()> {
    let spec = SynthSpec::new(20, 50, 2.0, 20, 0.2, 5);
    let cohort = inject_age_trend(&spec, AgeTrend { slope: 8.0, age_noise: 2.0 })?;
    let ages = cohort.ages()?;
    let plan = make_cv_plan(Strata::Ages(&ages), 5, 5, true, 5)?;
    for metric in [Metric::OffLog, Metric::Euclidean] {
        let r = run_brainage(&cohort, metric, &plan, &BrainAgeConfig::default())?;
        let (mae, r2) = (&r.aggregate["mae"], &r.aggregate["r2"]);
        println!("{:>10}: MAE {:.2} ± {:.2}  R² {:.3} ± {:.3}", metric.name(), mae.mean, mae.sd, r2.mean, r2.sd);
    }
    Ok(())
}
