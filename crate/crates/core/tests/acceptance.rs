//! Acceptance criteria 1–11. Each test prints one `PASS`/`FAIL` line to the
//! real stdout (bypassing capture) and then asserts.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use corrgeo::corr::{dist, embed, exp_off, frechet_mean, log_off, star_inverse, star_product, unembed, validate_or_shrink};
use corrgeo::graph::{adjacency_from_correlation, default_j_max, gap_spectrum_select_k, laplacian_spectrum, WeightedGraph};
use corrgeo::grassmann::{grassmann_dist, grassmann_exp, grassmann_log, karcher_mean, KARCHER_MAX_ITER, KARCHER_TOL};
use corrgeo::ml::{
    auc, elastic_net_fit, make_cv_plan, run_brainage, run_classification, run_subspace_pipeline, BrainAgeConfig,
    ClassificationConfig, ElasticNetOptions, GrassmannConfig, Strata,
};
use corrgeo::stats::{cohort_distances, permutation_test};
use corrgeo::synth::{
    community_cohort, inject_age_trend, inject_group_effect, inject_subspace_effect, random_correlation, AgeTrend,
    CommunitySpec, Jitter, SynthSpec,
};
use corrgeo::{CorrelationMatrix, GrassmannPoint, HollowSymmetricMatrix, Label, Metric};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: u32, pass: bool, detail: &str) {
    let line = format!(
        "criterion {criterion:>2}: {} {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_hollow(n: usize, half_width: f64, rng: &mut impl Rng) -> HollowSymmetricMatrix {
    let v = (0..n * (n - 1) / 2).map(|_| rng.random_range(-half_width..half_width)).collect();
    HollowSymmetricMatrix::from_upper(n, v).unwrap()
}

fn random_basis(n: usize, k: usize, rng: &mut impl Rng) -> GrassmannPoint {
    GrassmannPoint::from_span(&DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0))).unwrap()
}

fn random_orthogonal(k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
    g.qr().q()
}

// ---------------------------------------------------------------- 1

#[derive(Default)]
struct RoundTrip {
    cases: usize,
    within: usize,
    rejected: usize,
    max_err: f64,
    max_diag: f64,
}

#[test]
fn criterion_01_offlog_round_trip() {
    let start = Instant::now();
    let mut by_n: BTreeMap<usize, RoundTrip> = BTreeMap::new();
    for i in 0..500u64 {
        let n = [5, 20, 50][(i % 3) as usize];
        let s = uniform_hollow(n, 2.0, &mut rng(i));
        let e = by_n.entry(n).or_default();
        e.cases += 1;
        let Ok(c) = exp_off(&s) else {
            e.rejected += 1;
            continue;
        };
        e.max_diag = e.max_diag.max((0..n).map(|j| (c.get(j, j) - 1.0).abs()).fold(0.0, f64::max));
        // log_off refuses matrices whose condition number exceeds 1e12.
        match log_off(&c) {
            Ok(back) => {
                let err = back.sub(&s).unwrap().upper().iter().map(|v| v.abs()).fold(0.0, f64::max);
                e.max_err = e.max_err.max(err);
                e.within += usize::from(err <= 1e-8);
            }
            Err(_) => e.rejected += 1,
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = by_n.values().all(|e| e.within == e.cases && e.max_diag <= 1e-10) && secs <= 30.0;
    let detail: Vec<String> = by_n
        .iter()
        .map(|(n, e)| {
            format!(
                "n={n}: {}/{} within 1e-8, {} rejected as numerically singular, max|ΔS| {:.1e}, max|diag−1| {:.1e}",
                e.within, e.cases, e.rejected, e.max_err, e.max_diag
            )
        })
        .collect();
    report(1, pass, &format!("Off–log round trip ({}; {secs:.1} s)", detail.join("; ")));
    assert!(pass);
}

// ---------------------------------------------------------------- 2

#[test]
fn criterion_02_two_by_two_closed_form() {
    let grid: Vec<f64> = (0..50).map(|i| -0.95 + 1.9 * (i as f64 + 0.5) / 50.0).collect();
    let mut worst = 0.0f64;
    for &r1 in &grid {
        for &r2 in &grid {
            let d = dist(&CorrelationMatrix::pair(r1).unwrap(), &CorrelationMatrix::pair(r2).unwrap(), Metric::OffLog).unwrap();
            let exact = std::f64::consts::SQRT_2 * (r1.atanh() - r2.atanh()).abs();
            worst = worst.max((d - exact).abs());
        }
    }
    let pass = worst <= 1e-10;
    report(2, pass, &format!("2×2 closed form over 50×50 grid (max error {worst:.1e})"));
    assert!(pass);
}

// ---------------------------------------------------------------- 3

/// Stored case where relabelling nodes changes the ECM distance.
fn ecm_counterexample() -> (CorrelationMatrix, CorrelationMatrix, Vec<usize>) {
    let c1 = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.3, 0.5, 1.0, 0.2, 0.3, 0.2, 1.0]);
    let c2 = DMatrix::from_row_slice(3, 3, &[1.0, -0.4, 0.1, -0.4, 1.0, 0.6, 0.1, 0.6, 1.0]);
    (
        validate_or_shrink(&c1, false).unwrap().matrix,
        validate_or_shrink(&c2, false).unwrap().matrix,
        vec![2, 1, 0],
    )
}

#[test]
fn criterion_03_permutation_invariance() {
    let mut worst = 0.0f64;
    for t in 0..200u64 {
        let c1 = random_correlation(20, 0.4, 2 * t).unwrap();
        let c2 = random_correlation(20, 0.4, 2 * t + 1).unwrap();
        let mut perm: Vec<usize> = (0..20).collect();
        perm.shuffle(&mut rng(t));
        let d = dist(&c1, &c2, Metric::OffLog).unwrap();
        let dp = dist(&c1.permuted(&perm), &c2.permuted(&perm), Metric::OffLog).unwrap();
        worst = worst.max((d - dp).abs());
    }
    let (a, b, perm) = ecm_counterexample();
    let ecm_drift = (dist(&a, &b, Metric::Ecm).unwrap() - dist(&a.permuted(&perm), &b.permuted(&perm), Metric::Ecm).unwrap()).abs();
    let pass = worst <= 1e-10 && ecm_drift > 1e-3;
    report(
        3,
        pass,
        &format!("permutation invariance (Off–log drift {worst:.1e} over 200 triples; ECM counterexample drift {ecm_drift:.3})"),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_04_lie_group() {
    let d = |x: &CorrelationMatrix, y: &CorrelationMatrix| dist(x, y, Metric::OffLog).unwrap();
    let star = |x: &CorrelationMatrix, y: &CorrelationMatrix| star_product(x, y).unwrap();
    let mut worst = [0.0f64; 5];
    for t in 0..100u64 {
        let n = 4 + (t % 9) as usize;
        let [a, b, c, g] = [0, 1, 2, 3].map(|j| random_correlation(n, 0.5, 4 * t + j).unwrap());
        let id = CorrelationMatrix::identity(n);
        let checks = [
            d(&star(&a, &id), &a).max(d(&star(&id, &a), &a)),
            d(&star(&a, &star_inverse(&a).unwrap()), &id),
            d(&star(&a, &b), &star(&b, &a)),
            d(&star(&star(&a, &b), &c), &star(&a, &star(&b, &c))),
            (d(&star(&g, &a), &star(&g, &b)) - d(&a, &b)).abs(),
        ];
        for (w, v) in worst.iter_mut().zip(checks) {
            *w = w.max(v);
        }
    }
    let pass = worst.iter().all(|&w| w <= 1e-8);
    report(
        4,
        pass,
        &format!(
            "Lie group (identity {:.1e}, inverse {:.1e}, commutativity {:.1e}, associativity {:.1e}, translation {:.1e})",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_05_frechet_optimality() {
    let mut worst = f64::NEG_INFINITY;
    for metric in [Metric::OffLog, Metric::Ecm, Metric::Lec] {
        for inst in 0..20u64 {
            let cs: Vec<CorrelationMatrix> = (0..10).map(|j| random_correlation(15, 0.3, 1000 * inst + j).unwrap()).collect();
            let mean = frechet_mean(&cs, metric).unwrap();
            let cost = |m: &CorrelationMatrix| cs.iter().map(|c| dist(m, c, metric).unwrap().powi(2)).sum::<f64>();
            let best = cost(&mean);
            let base = embed(&mean, metric).unwrap();
            let mut r = rng(inst + 7);
            for _ in 0..100 {
                let scale = 10f64.powf(r.random_range(-4.0..-1.0));
                let mut x = base.clone();
                for v in &mut x.values {
                    *v += scale * r.random_range(-1.0..1.0);
                }
                let improvement = best - cost(&unembed(&x).unwrap());
                worst = worst.max(improvement);
            }
        }
    }
    let pass = worst <= 1e-9;
    report(
        5,
        pass,
        &format!("Fréchet optimality (largest improvement by a perturbation {worst:.1e}, 3 metrics × 20 × 100)"),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_06_grassmann() {
    let mut invariance = 0.0f64;
    let mut round_trip = 0.0f64;
    let mut equidistance = 0.0f64;
    let mut line_pair = 0.0f64;
    for t in 0..100u64 {
        let mut r = rng(t);
        let (n, k) = (6 + (t % 7) as usize, 1 + (t % 4) as usize);
        let u = random_basis(n, k, &mut r);
        let v = random_basis(n, k, &mut r);
        let d = grassmann_dist(&u, &v).unwrap();
        let q = random_orthogonal(k, &mut r);
        let flips: Vec<bool> = (0..k).map(|_| r.random_bool(0.5)).collect();
        invariance = invariance
            .max((grassmann_dist(&u.rotated(&q).unwrap(), &v).unwrap() - d).abs())
            .max((grassmann_dist(&u.sign_flipped(&flips), &v).unwrap() - d).abs())
            .max((grassmann_dist(&u, &v.sign_flipped(&flips)).unwrap() - d).abs());

        // Horizontal tangent with largest principal angle below 1.2.
        let x = u.basis();
        let g = DMatrix::from_fn(n, k, |_, _| r.random_range(-1.0..1.0));
        let h = &g - x * (x.transpose() * &g);
        let h = &h * (r.random_range(0.05..1.2) / h.clone().svd(false, false).singular_values.max());
        let y = grassmann_exp(&u, &h).unwrap();
        let back = grassmann_log(&u, &y).unwrap();
        round_trip = round_trip.max((back - &h).abs().max());

        let mid = karcher_mean(&[u.clone(), y.clone()], KARCHER_TOL, KARCHER_MAX_ITER).unwrap();
        equidistance = equidistance.max((grassmann_dist(&mid, &u).unwrap() - grassmann_dist(&mid, &y).unwrap()).abs());

        let theta: f64 = r.random_range(0.01..1.55);
        let plane = random_basis(n, 2, &mut r);
        let p = plane.basis();
        let a = GrassmannPoint::from_span(&p.columns(0, 1).into_owned()).unwrap();
        let b = GrassmannPoint::from_span(&DMatrix::from_column_slice(n, 1, (p.column(0) * theta.cos() + p.column(1) * theta.sin()).as_slice())).unwrap();
        line_pair = line_pair.max((grassmann_dist(&a, &b).unwrap() - theta).abs());
    }
    let pass = invariance <= 1e-10 && round_trip <= 1e-8 && equidistance <= 1e-6 && line_pair <= 1e-10;
    report(
        6,
        pass,
        &format!(
            "Grassmann (basis invariance {invariance:.1e}, exp/log {round_trip:.1e}, Karcher equidistance {equidistance:.1e}, line pairs {line_pair:.1e})"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 7

fn components(w: &DMatrix<f64>) -> usize {
    let n = w.nrows();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if w[(i, j)] > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    count
}

#[test]
fn criterion_07_laplacian() {
    let mut in_range = true;
    let mut multiplicity_ok = 0;
    for t in 0..50u64 {
        let mut r = rng(t);
        let blocks = r.random_range(1..6usize);
        let sizes: Vec<usize> = (0..blocks).map(|_| r.random_range(2..7usize)).collect();
        let n: usize = sizes.iter().sum();
        let mut block_of = Vec::new();
        for (b, &s) in sizes.iter().enumerate() {
            block_of.extend(std::iter::repeat_n(b, s));
        }
        // Dense random weights inside blocks, a random spanning path so each
        // block is connected, nothing across blocks.
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                if block_of[i] == block_of[j] && (j == i + 1 || r.random_bool(0.4)) {
                    let x = r.random_range(0.1..1.0);
                    w[(i, j)] = x;
                    w[(j, i)] = x;
                }
            }
        }
        let g = WeightedGraph::new(w.clone()).unwrap();
        let spec = laplacian_spectrum(&g).unwrap();
        in_range &= spec.eigenvalues.iter().all(|&l| (0.0..=2.0).contains(&l));
        let zeros = spec.eigenvalues.iter().filter(|&&l| l < 1e-10).count();
        multiplicity_ok += usize::from(zeros == components(&w));
    }

    let mut recovered = 0;
    for t in 0..100u64 {
        let c = 2 + (t % 3) as usize;
        let spec = CommunitySpec {
            n: 24,
            communities: c,
            m_per_group: 1,
            within: 0.4,
            noise: 0.1,
            moved: 0,
            seed: t,
        };
        let cohort = community_cohort(&spec).unwrap();
        let m = &cohort.subjects()[0].matrix;
        let size = 24 / c;
        let within_fraction = (c * size * (size - 1) / 2) as f64 / (24.0 * 23.0 / 2.0);
        let g = adjacency_from_correlation(m, within_fraction + 0.02).unwrap();
        let s = laplacian_spectrum(&g).unwrap();
        in_range &= s.eigenvalues.iter().all(|&l| (0.0..=2.0).contains(&l));
        recovered += usize::from(gap_spectrum_select_k(&s, default_j_max(24)).unwrap() == c);
    }
    let pass = in_range && multiplicity_ok == 50 && recovered >= 95;
    report(
        7,
        pass,
        &format!(
            "Laplacian (spectra in [0,2]: {in_range}; zero multiplicity = components {multiplicity_ok}/50; gap k recovered {recovered}/100)"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 8

/// Effect size frozen from the `power_pilot` example (power ≈ 0.8 under Off–log).
const PILOT_EFFECT: f64 = 1.15;

/// `P(X ≥ k)` for `X ~ Binomial(n, 1/2)`.
fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    let mut total = 0.0;
    for i in k..=n {
        let log_choose: f64 = (1..=i).map(|j| ((n - i + j) as f64 / j as f64).ln()).sum();
        total += (log_choose - n as f64 * std::f64::consts::LN_2).exp();
    }
    total
}

#[test]
fn criterion_08_bg_test() {
    let cohorts = 200;
    let reject = |effect: f64, seed: u64, metric: Metric| -> bool {
        let cohort = inject_group_effect(&SynthSpec::new(20, 15, effect, 10, 0.3, seed)).unwrap();
        let d = cohort_distances(&cohort, metric).unwrap();
        permutation_test(&d, &cohort.labels().unwrap(), 1000, seed).unwrap().p_value < 0.05
    };
    let null_rate = (0..cohorts).filter(|&c| reject(0.0, 10_000 + c as u64, Metric::OffLog)).count() as f64 / cohorts as f64;

    let (mut off, mut raw, mut off_only, mut raw_only) = (0, 0, 0, 0);
    for c in 0..cohorts {
        let seed = 10_000 + c as u64;
        let (a, b) = (reject(PILOT_EFFECT, seed, Metric::OffLog), reject(PILOT_EFFECT, seed, Metric::Euclidean));
        off += usize::from(a);
        raw += usize::from(b);
        off_only += usize::from(a && !b);
        raw_only += usize::from(b && !a);
    }
    let sign_p = binomial_upper_tail(off_only + raw_only, off_only);
    let pass = (0.02..=0.09).contains(&null_rate) && off > raw && sign_p < 0.05;
    report(
        8,
        pass,
        &format!(
            "BG test (null rejection {null_rate:.3}; power Off–log {:.3} vs raw {:.3}; discordant {off_only}:{raw_only}, sign test p {sign_p:.1e})",
            off as f64 / cohorts as f64,
            raw as f64 / cohorts as f64
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 9

fn shuffled<T: Clone>(v: &[T], seed: u64) -> Vec<T> {
    let mut out = v.to_vec();
    out.shuffle(&mut rng(seed));
    out
}

#[test]
fn criterion_09_supervised_oracles() {
    let trend = AgeTrend { slope: 8.0, age_noise: 0.0 };
    let config = BrainAgeConfig::default();
    let mut r2_planted = f64::INFINITY;
    for seed in 0..5u64 {
        let cohort = inject_age_trend(&SynthSpec::new(20, 50, 2.0, 20, 0.2, seed), trend).unwrap();
        let ages = cohort.ages().unwrap();
        let plan = make_cv_plan(Strata::Ages(&ages), 5, 5, true, seed).unwrap();
        r2_planted = r2_planted.min(run_brainage(&cohort, Metric::OffLog, &plan, &config).unwrap().mean("r2"));
    }
    let mut r2_null = 0.0;
    for seed in 0..20u64 {
        let cohort = inject_age_trend(&SynthSpec::new(20, 50, 2.0, 20, 0.2, seed), trend).unwrap();
        let ages = shuffled(&cohort.ages().unwrap(), 99 + seed);
        let cohort = cohort.with_ages(&ages).unwrap();
        let plan = make_cv_plan(Strata::Ages(&ages), 5, 5, true, seed).unwrap();
        r2_null += run_brainage(&cohort, Metric::OffLog, &plan, &config).unwrap().mean("r2") / 20.0;
    }

    let cls = ClassificationConfig::default();
    let mut auc_planted = f64::INFINITY;
    for seed in 0..5u64 {
        let cohort = inject_group_effect(&SynthSpec::new(20, 40, 2.0, 10, 0.3, seed)).unwrap();
        let labels = cohort.labels().unwrap();
        let plan = make_cv_plan(Strata::Labels(&labels), 5, 5, true, seed).unwrap();
        auc_planted = auc_planted.min(run_classification(&cohort, Metric::OffLog, &plan, &cls).unwrap().mean("auc"));
    }
    let mut auc_null = 0.0;
    for seed in 0..20u64 {
        let cohort = inject_group_effect(&SynthSpec::new(20, 40, 2.0, 10, 0.3, seed)).unwrap();
        let labels = shuffled(&cohort.labels().unwrap(), 199 + seed);
        let cohort = cohort.with_labels(&labels).unwrap();
        let plan = make_cv_plan(Strata::Labels(&labels), 5, 5, true, seed).unwrap();
        auc_null += run_classification(&cohort, Metric::OffLog, &plan, &cls).unwrap().mean("auc") / 20.0;
    }

    // 1-D ridge: β = Sxy / (Sxx + mλ) on centered data, intercept free.
    let mut ridge_err = 0.0f64;
    for t in 0..20u64 {
        let mut r = rng(t);
        let m = 10 + (t as usize % 30);
        let x: Vec<f64> = (0..m).map(|_| r.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = x.iter().map(|&v| 1.5 * v + 2.0 + r.random_range(-1.0..1.0)).collect();
        let lambda = 10f64.powf(r.random_range(-3.0..1.0));
        let (mx, my) = (x.iter().sum::<f64>() / m as f64, y.iter().sum::<f64>() / m as f64);
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        let beta = sxy / (sxx + m as f64 * lambda);
        let mut opts = ElasticNetOptions::new(lambda, 0.0);
        opts.tol = 1e-12;
        let model = elastic_net_fit(&DMatrix::from_column_slice(m, 1, &x), &DVector::from_vec(y), &opts).unwrap();
        ridge_err = ridge_err.max((model.coefficients[0] - beta).abs()).max((model.intercept - (my - beta * mx)).abs());
    }

    let mut auc_exact = true;
    for t in 0..50u64 {
        let mut r = rng(t + 500);
        let m = 2 + (t as usize * 4) % 199;
        let mut labels: Vec<Label> = (0..m).map(|i| if i % 2 == 0 { Label::A } else { Label::B }).collect();
        labels.shuffle(&mut r);
        // Coarse scores force ties.
        let scores: Vec<f64> = (0..m).map(|_| (r.random_range(0.0..1.0f64) * 8.0).floor() / 8.0).collect();
        let (mut wins, mut pos, mut neg) = (0.0, 0.0, 0.0);
        for i in 0..m {
            if labels[i] == Label::B {
                pos += 1.0;
            } else {
                neg += 1.0;
            }
            for j in 0..m {
                if labels[i] == Label::B && labels[j] == Label::A {
                    wins += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
                }
            }
        }
        auc_exact &= auc(&scores, &labels).unwrap() == wins / (pos * neg);
    }

    let pass = r2_planted >= 0.9
        && r2_null <= 0.05
        && auc_planted >= 0.9
        && (0.35..=0.65).contains(&auc_null)
        && ridge_err <= 1e-6
        && auc_exact;
    report(
        9,
        pass,
        &format!(
            "supervised oracles (planted R² min {r2_planted:.3}; shuffled R² mean {r2_null:.3}; planted AUC min {auc_planted:.3}; shuffled AUC mean {auc_null:.3}; ridge error {ridge_err:.1e}; AUC = pair count: {auc_exact})"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10_sign_robust_discriminant() {
    let (mut grassmann_acc, mut lda_acc, mut identical) = (0.0, 0.0, 0);
    let config = GrassmannConfig::default();
    for seed in 0..20u64 {
        let cohort = inject_subspace_effect(60, 4, 30, 0.5, 0.03, seed).unwrap();
        let flipped = cohort.jittered(Jitter::SignFlips, seed);
        let (points, labels) = cohort.points_and_labels();
        let (flipped_points, _) = flipped.points_and_labels();
        let plan = make_cv_plan(Strata::Labels(&labels), 5, 2, true, seed).unwrap();
        let plain = run_subspace_pipeline(&points, &labels, &plan, &config).unwrap();
        let noisy = run_subspace_pipeline(&flipped_points, &labels, &plan, &config).unwrap();
        identical += usize::from(plain.predicted_labels == noisy.predicted_labels);
        grassmann_acc += noisy.grassmann.mean("accuracy") / 20.0;
        lda_acc += noisy.lda.mean("accuracy") / 20.0;
    }
    let pass = identical == 20 && grassmann_acc >= 0.9 && lda_acc <= 0.65;
    report(
        10,
        pass,
        &format!(
            "sign-robust discriminant (identical predictions {identical}/20; Grassmann accuracy {grassmann_acc:.3}; flattened LDA accuracy {lda_acc:.3})"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 11

/// Command line rebuilt from a report's echoed configuration.
fn argv_from_echo(config: &serde_json::Value, threads: usize) -> Vec<String> {
    const POSITIONAL: [&str; 4] = ["a", "b", "manifest", "matrix"];
    let mut argv = vec![format!("--seed={}", config["seed"]), format!("--metric={}", config["metric"].as_str().unwrap())];
    if config["shrink"].as_bool().unwrap() {
        argv.push("--shrink".into());
    }
    argv.push(format!("--threads={threads}"));
    let (name, fields) = config["command"].as_object().unwrap().iter().next().unwrap();
    argv.push(name.clone());
    fn flags(fields: &serde_json::Map<String, serde_json::Value>, argv: &mut Vec<String>) {
        for (key, value) in fields {
            match value {
                serde_json::Value::Object(inner) => flags(inner, argv),
                serde_json::Value::Null => {}
                serde_json::Value::Bool(true) => argv.push(format!("--{}", key.replace('_', "-"))),
                serde_json::Value::String(s) if POSITIONAL.contains(&key.as_str()) => argv.push(s.clone()),
                serde_json::Value::String(s) => argv.push(format!("--{}={s}", key.replace('_', "-"))),
                v => argv.push(format!("--{}={v}", key.replace('_', "-"))),
            }
        }
    }
    flags(fields.as_object().unwrap(), &mut argv);
    argv
}

fn corrgeo(dir: &Path, args: &[String]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_corrgeo"))
        .current_dir(dir)
        .env_remove("CORRGEO_THREADS")
        .args(args)
        .output()
        .unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

/// Bytes of stdout plus every file the command wrote.
fn run_capture(dir: &Path, args: &[String], outputs: &[&str]) -> Vec<u8> {
    let mut bytes = corrgeo(dir, args);
    for o in outputs {
        let p = dir.join(o);
        if p.is_dir() {
            let mut files: Vec<PathBuf> = walk(&p);
            files.sort();
            for f in files {
                bytes.extend(std::fs::read(f).unwrap());
            }
        } else {
            bytes.extend(std::fs::read(p).unwrap());
        }
    }
    bytes
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn criterion_11_cli_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    corrgeo(dir, &s(&["synth", "--preset", "group-effect", "--n", "12", "--m-per-group", "10", "-o", "ge"]));
    corrgeo(dir, &s(&["synth", "--preset", "age-trend", "--n", "12", "--m-per-group", "25", "-o", "at"]));
    corrgeo(dir, &s(&["synth", "--preset", "subspace", "--m-per-group", "10", "-o", "sp"]));

    // (arguments, files written besides stdout)
    let commands: Vec<(Vec<String>, Vec<&str>)> = vec![
        (s(&["dist", "ge/matrices/sub-0000.csv", "ge/matrices/sub-0011.csv"]), vec![]),
        (s(&["mean", "ge/manifest.csv", "-o", "mean.csv"]), vec!["mean.csv"]),
        (s(&["tangent", "--metric", "lec", "ge/manifest.csv", "-o", "coords.csv"]), vec!["coords.csv"]),
        (s(&["bgtest", "ge/manifest.csv", "--n-perm", "300"]), vec![]),
        (s(&["brainage", "at/manifest.csv"]), vec![]),
        (s(&["classify", "--metric", "euclidean", "ge/manifest.csv"]), vec![]),
        (s(&["grassmann", "sp/manifest.csv"]), vec![]),
        (s(&["synth", "--preset", "group-effect", "--n", "6", "--m-per-group", "3", "--seed", "5", "-o", "syn"]), vec!["syn"]),
        (s(&["laplacian", "sp/matrices/sub-0000.csv"]), vec![]),
    ];
    let mut mismatches = Vec::new();
    let mut echo_mismatches = Vec::new();
    for (args, outputs) in &commands {
        let reference = run_capture(dir, &[vec!["--threads=1".to_string()], args.clone()].concat(), outputs);
        for t in 2..=8 {
            let again = run_capture(dir, &[vec![format!("--threads={t}")], args.clone()].concat(), outputs);
            if again != reference {
                mismatches.push(format!("{} at {t} threads", args[0]));
            }
        }
        // Reports carry their configuration; replaying it must reproduce them.
        let stdout = corrgeo(dir, &[vec!["--threads=1".to_string()], args.clone()].concat());
        if let Ok(report @ serde_json::Value::Object(_)) = serde_json::from_slice::<serde_json::Value>(&stdout) {
            for t in [1, 3, 8] {
                let replay = run_capture(dir, &argv_from_echo(&report["config"], t), outputs);
                if replay != reference {
                    echo_mismatches.push(format!("{} replay at {t} threads", args[0]));
                }
            }
        }
    }
    let pass = mismatches.is_empty() && echo_mismatches.is_empty();
    report(
        11,
        pass,
        &format!(
            "CLI determinism ({} commands × threads 1..8, replayed from echoed config; mismatches {:?} {:?})",
            commands.len(),
            mismatches,
            echo_mismatches
        ),
    );
    assert!(pass);
}
