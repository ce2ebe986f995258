//! Command-line front end. `main.rs` only forwards `argv` to [`run`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cohort::CohortDataset;
use crate::corr::{dist, euclidean_mean, frechet_mean, tangent_at_identity, CorrelationMatrix, Metric};
use crate::error::{Error, Result};
use crate::graph::{
    adjacency_from_correlation, default_j_max, gap_spectrum, gap_spectrum_select_k, laplacian_spectrum, DEFAULT_DENSITY,
};
use crate::io::{read_manifest, read_matrix, write_cohort, write_matrix, Report};
use crate::linalg::{strict_lower_index, strict_upper_index, triangular_len};
use crate::ml::{
    make_cv_plan, run_brainage, run_classification, run_grassmann_pipeline, BrainAgeConfig, ClassificationConfig,
    GrassmannConfig, Strata, DEFAULT_FOLDS, DEFAULT_VARIANCE_TARGET,
};
use crate::stats::{cohort_distances, permutation_test, DEFAULT_PERMUTATIONS};
use crate::synth::{community_cohort, inject_age_trend, inject_group_effect, AgeTrend, CommunitySpec, SynthSpec};

#[derive(Debug, Parser, Serialize)]
#[command(name = "corrgeo", version, about = "Geometry and statistics for correlation-matrix cohorts")]
pub struct Cli {
    /// Seed for every random choice (permutations, folds, solvers, synthesis).
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Representation of correlation matrices.
    #[arg(long, global = true, default_value = "offlog", value_parser = parse_metric)]
    pub metric: Metric,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "CORRGEO_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Shrink rank-deficient input matrices towards the identity instead of failing.
    #[arg(long, global = true)]
    pub shrink: bool,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Distance between two matrices.
    Dist { a: PathBuf, b: PathBuf },
    /// Fréchet mean of a cohort (elementwise mean for `euclidean`).
    Mean {
        manifest: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Chart coordinates of every subject, one row each.
    Tangent {
        manifest: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Two-group permutation test on interpoint distances.
    Bgtest {
        manifest: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
        n_perm: usize,
        #[command(flatten)]
        out: ReportOut,
    },
    /// Nested-CV age regression.
    Brainage {
        manifest: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VARIANCE_TARGET)]
        variance_target: f64,
        #[command(flatten)]
        folds: FoldArgs,
        #[command(flatten)]
        out: ReportOut,
    },
    /// Nested-CV group classification.
    Classify {
        manifest: PathBuf,
        #[command(flatten)]
        folds: FoldArgs,
        #[command(flatten)]
        out: ReportOut,
    },
    /// Subspace discriminant on graph Laplacian harmonics.
    Grassmann {
        manifest: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DENSITY)]
        density: f64,
        /// Defaults to min(30, n − 1).
        #[arg(long)]
        j_max: Option<usize>,
        /// Fix the subspace dimension instead of choosing it from spectral gaps.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[command(flatten)]
        out: ReportOut,
    },
    /// Write a synthetic cohort (manifest plus matrices) into a directory.
    Synth {
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        params: SynthArgs,
    },
    /// Normalized Laplacian spectrum of one thresholded matrix.
    Laplacian {
        matrix: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DENSITY)]
        density: f64,
        #[arg(long)]
        j_max: Option<usize>,
        #[command(flatten)]
        out: ReportOut,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct ReportOut {
    /// Write the JSON report here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FoldArgs {
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    pub folds: usize,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    pub inner_folds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    GroupEffect,
    AgeTrend,
    Subspace,
}

/// Overrides for preset parameters; unset values take the preset default.
#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m_per_group: Option<usize>,
    #[arg(long)]
    pub effect_size: Option<f64>,
    #[arg(long)]
    pub support: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub slope: Option<f64>,
    #[arg(long)]
    pub age_noise: Option<f64>,
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 1 for usage and validation errors, 2 for numerical failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Command::Synth { preset, params, .. } = &mut cli.command {
        params.fill_defaults(*preset);
    }
    let pool = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return 1;
        }
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            if e.is_numerical() { 2 } else { 1 }
        }
    }
}

fn load_cohort(cli: &Cli, manifest: &Path, warnings: &mut Vec<String>) -> Result<CohortDataset> {
    read_manifest(manifest, cli.shrink, warnings)
}

pub fn execute(cli: &Cli) -> Result<()> {
    let mut warnings = Vec::new();
    let name = command_name(&cli.command);
    match &cli.command {
        Command::Dist { a, b } => {
            let ca = read_matrix(a, cli.shrink, &mut warnings)?;
            let cb = read_matrix(b, cli.shrink, &mut warnings)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            println!("{:?}", dist(&ca, &cb, cli.metric)?);
        }
        Command::Mean { manifest, output } => {
            let cohort = load_cohort(cli, manifest, &mut warnings)?;
            let cs: Vec<CorrelationMatrix> = cohort.subjects().iter().map(|s| s.matrix.clone()).collect();
            let mean = match cli.metric {
                Metric::Euclidean => euclidean_mean(&cs)?,
                m => frechet_mean(&cs, m)?.into_inner(),
            };
            write_matrix(output, &mean)?;
            Report::new(name, cli, BTreeMap::from([("subjects", cohort.len())]), warnings).emit(None)?;
        }
        Command::Tangent { manifest, output } => {
            let cohort = load_cohort(cli, manifest, &mut warnings)?;
            write_coordinates(output, &cohort, cli.metric)?;
            Report::new(name, cli, BTreeMap::from([("subjects", cohort.len())]), warnings).emit(None)?;
        }
        Command::Bgtest { manifest, n_perm, out } => {
            let cohort = load_cohort(cli, manifest, &mut warnings)?;
            let labels = cohort.labels()?;
            let d = cohort_distances(&cohort, cli.metric)?;
            let result = permutation_test(&d, &labels, *n_perm, cli.seed)?;
            Report::new(name, cli, result, warnings).emit(out.output.as_deref())?;
        }
        Command::Brainage {
            manifest,
            variance_target,
            folds,
            out,
        } => {
            let cohort = load_cohort(cli, manifest, &mut warnings)?;
            let ages = cohort.ages()?;
            let plan = make_cv_plan(Strata::Ages(&ages), folds.folds, folds.inner_folds, true, cli.seed)?;
            let config = BrainAgeConfig {
                variance_target: *variance_target,
                ..BrainAgeConfig::default()
            };
            let report = run_brainage(&cohort, cli.metric, &plan, &config)?;
            warnings.extend(report.folds.iter().flat_map(|f| f.warnings.iter().cloned()));
            Report::new(name, cli, report, warnings).emit(out.output.as_deref())?;
        }
        Command::Classify { manifest, folds, out } => {
            let cohort = load_cohort(cli, manifest, &mut warnings)?;
            let labels = cohort.labels()?;
            let plan = make_cv_plan(Strata::Labels(&labels), folds.folds, folds.inner_folds, true, cli.seed)?;
            let report = run_classification(&cohort, cli.metric, &plan, &ClassificationConfig::default())?;
            warnings.extend(report.folds.iter().flat_map(|f| f.warnings.iter().cloned()));
            Report::new(name, cli, report, warnings).emit(out.output.as_deref())?;
        }
        Command::Grassmann {
            manifest,
            density,
            j_max,
            k,
            folds,
            out,
        } => {
            let cohort = load_cohort(cli, manifest, &mut warnings)?;
            let labels = cohort.labels()?;
            // Inner folds are unused here; two is the cheapest valid plan.
            let plan = make_cv_plan(Strata::Labels(&labels), *folds, 2, true, cli.seed)?;
            let config = GrassmannConfig {
                density: *density,
                j_max: *j_max,
                k: *k,
                ..GrassmannConfig::default()
            };
            let report = run_grassmann_pipeline(&cohort, &plan, &config)?;
            warnings.extend(report.warnings.iter().cloned());
            let regions = region_table(&report.models, &report.region_frequency);
            let result = GrassmannOutput {
                report: &report,
                regions,
            };
            Report::new(name, cli, result, warnings).emit(out.output.as_deref())?;
        }
        Command::Synth { preset, output, params } => {
            let cohort = synthesize(*preset, params, cli.seed)?;
            let manifest = write_cohort(output, &cohort)?;
            let result = BTreeMap::from([
                ("manifest", manifest.display().to_string()),
                ("subjects", cohort.len().to_string()),
                ("n", cohort.dim().to_string()),
            ]);
            Report::new(name, cli, result, warnings).emit(None)?;
        }
        Command::Laplacian {
            matrix,
            density,
            j_max,
            out,
        } => {
            let c = read_matrix(matrix, cli.shrink, &mut warnings)?;
            let g = adjacency_from_correlation(&c, *density)?;
            let spectrum = laplacian_spectrum(&g)?;
            let j = j_max.unwrap_or_else(|| default_j_max(c.dim()));
            let isolated = g.isolated_nodes();
            if !isolated.is_empty() {
                warnings.push(format!("{} isolated node(s): {isolated:?}", isolated.len()));
            }
            let result = LaplacianOutput {
                k: gap_spectrum_select_k(&spectrum, j)?,
                j_max: j,
                gaps: gap_spectrum(&spectrum),
                eigenvalues: spectrum.eigenvalues,
                edges: g.edge_count(),
                isolated_nodes: isolated,
            };
            Report::new(name, cli, result, warnings).emit(out.output.as_deref())?;
        }
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Dist { .. } => "dist",
        Command::Mean { .. } => "mean",
        Command::Tangent { .. } => "tangent",
        Command::Bgtest { .. } => "bgtest",
        Command::Brainage { .. } => "brainage",
        Command::Classify { .. } => "classify",
        Command::Grassmann { .. } => "grassmann",
        Command::Synth { .. } => "synth",
        Command::Laplacian { .. } => "laplacian",
    }
}

/// CSV with a `subject_id` column and one column per chart coordinate,
/// named `c<i>_<j>` after the matrix entry it comes from.
fn write_coordinates(path: &Path, cohort: &CohortDataset, metric: Metric) -> Result<()> {
    let n = cohort.dim();
    let mut names = vec![String::new(); triangular_len(n)];
    for i in 0..n {
        for j in 0..n {
            match metric {
                Metric::OffLog | Metric::Euclidean if i < j => names[strict_upper_index(n, i, j)] = format!("c{i}_{j}"),
                Metric::Ecm | Metric::Lec if i > j => names[strict_lower_index(i, j)] = format!("c{i}_{j}"),
                _ => {}
            }
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut header = vec!["subject_id".to_string()];
    header.extend(names);
    w.write_record(&header).map_err(|e| Error::InvalidInput(e.to_string()))?;
    for s in cohort.subjects() {
        let coords = tangent_at_identity(&s.matrix, metric).map_err(|e| Error::for_subject(&s.id, e))?;
        let mut row = vec![s.id.clone()];
        row.extend(coords.values.iter().map(|v| format!("{v:.16e}")));
        w.write_record(&row).map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct LaplacianOutput {
    eigenvalues: Vec<f64>,
    gaps: Vec<f64>,
    j_max: usize,
    k: usize,
    edges: usize,
    isolated_nodes: Vec<usize>,
}

#[derive(Serialize)]
struct RegionRow {
    node: usize,
    /// Mean region score over folds.
    score: f64,
    /// Fraction of folds with the node in the top tenth.
    frequency: f64,
}

#[derive(Serialize)]
struct GrassmannOutput<'a> {
    #[serde(flatten)]
    report: &'a crate::ml::GrassmannReport,
    regions: Vec<RegionRow>,
}

/// Nodes ordered by selection frequency, then mean score.
fn region_table(models: &[crate::ml::ModelSummary], frequency: &[f64]) -> Vec<RegionRow> {
    let n = frequency.len();
    let mut rows: Vec<RegionRow> = (0..n)
        .map(|node| RegionRow {
            node,
            score: models.iter().map(|m| m.region_scores[node]).sum::<f64>() / models.len().max(1) as f64,
            frequency: frequency[node],
        })
        .collect();
    rows.sort_by(|a, b| {
        b.frequency
            .total_cmp(&a.frequency)
            .then(b.score.total_cmp(&a.score))
            .then(a.node.cmp(&b.node))
    });
    rows
}

impl SynthArgs {
    /// Replaces unset values with the preset's defaults so reports echo
    /// the effective parameters.
    pub fn fill_defaults(&mut self, preset: Preset) {
        let (n, m, effect, support, noise) = match preset {
            Preset::GroupEffect => (20, 15, 1.0, 10, 0.3),
            Preset::AgeTrend => (20, 50, 2.0, 20, 0.2),
            Preset::Subspace => {
                let d = CommunitySpec::default();
                (d.n, d.m_per_group, d.within, d.moved, d.noise)
            }
        };
        self.n.get_or_insert(n);
        self.m_per_group.get_or_insert(m);
        self.effect_size.get_or_insert(effect);
        self.support.get_or_insert(support);
        self.noise.get_or_insert(noise);
        if preset == Preset::AgeTrend {
            self.slope.get_or_insert(8.0);
            self.age_noise.get_or_insert(0.0);
        }
    }
}

fn synthesize(preset: Preset, p: &SynthArgs, seed: u64) -> Result<CohortDataset> {
    let mut p = *p;
    p.fill_defaults(preset);
    let (n, m, effect, support, noise) = (
        p.n.unwrap_or_default(),
        p.m_per_group.unwrap_or_default(),
        p.effect_size.unwrap_or_default(),
        p.support.unwrap_or_default(),
        p.noise.unwrap_or_default(),
    );
    match preset {
        Preset::GroupEffect => inject_group_effect(&SynthSpec::new(n, m, effect, support, noise, seed)),
        Preset::AgeTrend => {
            let trend = AgeTrend {
                slope: p.slope.unwrap_or_default(),
                age_noise: p.age_noise.unwrap_or_default(),
            };
            inject_age_trend(&SynthSpec::new(n, m, effect, support, noise, seed), trend)
        }
        Preset::Subspace => community_cohort(&CommunitySpec {
            n,
            m_per_group: m,
            within: effect,
            noise,
            moved: support,
            seed,
            ..CommunitySpec::default()
        }),
    }
}
