//! Writing a synthetic cohort to disk, reading it back through the
//! manifest, and emitting a JSON report.

use corrgeo::io::{read_manifest, to_json, write_cohort};
use corrgeo::stats::{cohort_distances, permutation_test};
use corrgeo::synth::{inject_group_effect, SynthSpec};
use corrgeo::Metric;

fn main() -> corrgeo::Result<()> {
    let dir = std::env::temp_dir().join("corrgeo-cohort-example");
    let cohort = inject_group_effect(&SynthSpec::new(10, 6, 1.0, 5, 0.3, 9))?;
    let manifest = write_cohort(&dir, &cohort)?;
    println!("wrote {}", manifest.display());

    let mut warnings = Vec::new();
    let loaded = read_manifest(&manifest, false, &mut warnings)?;
    println!("read {} subjects of dimension {}, {} warning(s)", loaded.len(), loaded.dim(), warnings.len());

    let d = cohort_distances(&loaded, Metric::OffLog)?;
    let mut r = permutation_test(&d, &loaded.labels()?, 99, 1)?;
    r.null_samples.truncate(3);
    print!("{}", to_json(&r)?);
    Ok(())
}
