//! Power of the two-group permutation test under Off–log and raw Frobenius
//! distances, over a grid of planted effect sizes.
//!
//! ```text
//! cargo run --release --example power_pilot -- [cohorts] [permutations] [effect...]
//! ```

use corrgeo::stats::{cohort_distances, permutation_test};
use corrgeo::synth::{inject_group_effect, SynthSpec};
use corrgeo::Metric;

const N: usize = 20;
const M_PER_GROUP: usize = 15;
const SUPPORT: usize = 10;
const NOISE: f64 = 0.3;
const ALPHA: f64 = 0.05;

fn main() -> corrgeo::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cohorts = args.first().and_then(|a| a.parse().ok()).unwrap_or(100);
    let n_perm = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(500);
    let mut effects: Vec<f64> = args.iter().skip(2).filter_map(|a| a.parse().ok()).collect();
    if effects.is_empty() {
        effects = vec![0.0, 0.4, 0.6, 0.8, 1.0, 1.2];
    }

    println!("effect  power(offlog)  power(euclidean)  offlog-only  euclidean-only");
    for effect in effects {
        let mut hits = [0usize; 2];
        let mut only = [0usize; 2];
        for c in 0..cohorts {
            let seed = 10_000 + c as u64;
            let cohort = inject_group_effect(&SynthSpec::new(N, M_PER_GROUP, effect, SUPPORT, NOISE, seed))?;
            let labels = cohort.labels()?;
            let mut reject = [false; 2];
            for (slot, metric) in [Metric::OffLog, Metric::Euclidean].into_iter().enumerate() {
                let d = cohort_distances(&cohort, metric)?;
                reject[slot] = permutation_test(&d, &labels, n_perm, seed)?.p_value < ALPHA;
                hits[slot] += usize::from(reject[slot]);
            }
            only[0] += usize::from(reject[0] && !reject[1]);
            only[1] += usize::from(reject[1] && !reject[0]);
        }
        let f = |h: usize| h as f64 / cohorts as f64;
        println!(
            "{effect:>6.2}  {:>13.3}  {:>16.3}  {:>11}  {:>14}",
            f(hits[0]),
            f(hits[1]),
            only[0],
            only[1]
        );
    }
    Ok(())
}
