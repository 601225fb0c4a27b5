//! Seeded Monte-Carlo sweeps over the random linear graph model.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph_model::{sample_graph, scramble, ModelParams};
use crate::metrics::{d_k_r, MetricReport};
use crate::model_spectrum::eigvec2_a_unit;
use crate::permutation::Permutation;
use crate::seriation::{align_up_to_reversal, degree_baseline_order, recover_order, SeriationConfig, TiePolicy};
use crate::solver::SolverConfig;

pub const CSV_HEADER: &str =
    "n,p,trial,seed,lambda2_hat,eigvec_dist,kendall_D,footrule_F,tau_paper,tau_standard,baseline_D,runtime_ms";

/// `(alpha, beta)` exponent pairs giving `r = max(1, round(n^alpha))` and
/// `k = round(n^beta)`. `0.95` stands in for "just below one".
pub const DEFAULT_DKR_GRID: [(f64, f64); 16] = [
    (0.0, 0.5),
    (0.0, 0.75),
    (0.0, 0.8),
    (0.0, 0.95),
    (0.25, 0.5),
    (0.25, 0.75),
    (0.25, 0.8),
    (0.25, 0.95),
    (0.5, 0.5),
    (0.5, 0.75),
    (0.5, 0.8),
    (0.5, 0.95),
    (0.75, 0.5),
    (0.75, 0.75),
    (0.75, 0.8),
    (0.75, 0.95),
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n_list: Vec<usize>,
    pub p: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub dkr_grid: Vec<(f64, f64)>,
    pub tie_policy: TiePolicy,
    /// Directory receiving `trials.csv` and `eigvec_profile.tsv`.
    pub output: PathBuf,
    /// When false the runtime column is written as 0 so that repeated runs
    /// produce identical files.
    pub record_runtime: bool,
    pub solver_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_list: vec![256, 512, 1024],
            p: 0.5,
            trials: 20,
            master_seed: 1,
            dkr_grid: DEFAULT_DKR_GRID.to_vec(),
            tie_policy: TiePolicy::default(),
            output: PathBuf::from("out"),
            record_runtime: true,
            solver_tol: 1e-8,
        }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str, line: usize) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::parse(line, format!("bad list entry {s:?}"))))
        .collect()
}

fn parse_value<T: std::str::FromStr>(value: &str, line: usize, key: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parse(line, format!("bad value {value:?} for {key}")))
}

impl ExperimentConfig {
    /// Reads `key = value` lines; `#` starts a comment. Unset keys keep
    /// their defaults.
    ///
    /// Keys: `n_list` (comma separated), `p`, `trials`, `master_seed`,
    /// `dkr_grid` (comma separated `alpha:beta`), `tie_policy`, `output`,
    /// `record_runtime`, `solver_tol`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::parse(line, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n_list" => cfg.n_list = parse_list(value, line)?,
                "p" => cfg.p = parse_value(value, line, key)?,
                "trials" => cfg.trials = parse_value(value, line, key)?,
                "master_seed" => cfg.master_seed = parse_value(value, line, key)?,
                "dkr_grid" => {
                    cfg.dkr_grid = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|pair| {
                            let (a, b) = pair
                                .split_once(':')
                                .ok_or_else(|| Error::parse(line, format!("expected alpha:beta, got {pair:?}")))?;
                            Ok((parse_value(a.trim(), line, key)?, parse_value(b.trim(), line, key)?))
                        })
                        .collect::<Result<_>>()?
                }
                "tie_policy" => cfg.tie_policy = value.parse().map_err(|_| Error::parse(line, format!("unknown tie policy {value:?}")))?,
                "output" => cfg.output = PathBuf::from(value),
                "record_runtime" => cfg.record_runtime = parse_value(value, line, key)?,
                "solver_tol" => cfg.solver_tol = parse_value(value, line, key)?,
                other => return Err(Error::parse(line, format!("unknown key {other:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.n_list.is_empty() {
            return bad("n_list is empty".into());
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < 8 || n % 2 != 0) {
            return bad(format!("every n must be even and at least 8, got {n}"));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad(format!("p = {} must lie in (0, 1]", self.p));
        }
        if let Some(&(a, b)) = self
            .dkr_grid
            .iter()
            .find(|&&(a, b)| !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b))
        {
            return bad(format!("grid exponents must lie in [0, 1], got {a}:{b}"));
        }
        if !(self.solver_tol > 0.0) {
            return bad(format!("solver_tol = {} must be positive", self.solver_tol));
        }
        Ok(())
    }

    /// Column names for the refined counts, one per grid point.
    pub fn dkr_columns(&self) -> Vec<String> {
        self.dkr_grid.iter().map(|(a, b)| format!("dkr_a{a}_b{b}")).collect()
    }
}

/// `(k, r)` for exponents `(alpha, beta)` at size `n`.
pub fn dkr_indices(n: usize, alpha: f64, beta: f64) -> (usize, usize) {
    let nf = n as f64;
    let k = (nf.powf(beta).round() as usize).max(1);
    let r = (nf.powf(alpha).round() as usize).max(1);
    (k, r)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one trial; independent of execution order.
pub fn trial_seed(master_seed: u64, n: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ n as u64) ^ trial as u64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialMetrics {
    pub lambda2_hat: f64,
    /// `‖x - x̂‖` after sign alignment, both unit vectors.
    pub eigvec_distance: f64,
    pub report: MetricReport,
    /// One count per grid point, from the aligned eigenvector.
    pub dkr: Vec<u64>,
    pub baseline_d: u64,
    pub baseline_f: u64,
    /// Model eigenvector by true position.
    pub model_vector: Vec<f64>,
    /// Sign-aligned recovered eigenvector by true position.
    pub random_vector: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub p: f64,
    pub trial: usize,
    pub seed: u64,
    pub runtime_ms: f64,
    /// Failure message for trials whose solver did not succeed.
    pub outcome: std::result::Result<TrialMetrics, String>,
}

impl TrialRecord {
    pub fn metrics(&self) -> Option<&TrialMetrics> {
        self.outcome.as_ref().ok()
    }
}

fn run_trial(cfg: &ExperimentConfig, n: usize, trial: usize) -> TrialRecord {
    let seed = trial_seed(cfg.master_seed, n, trial);
    let start = Instant::now();
    let outcome = trial_metrics(cfg, n, seed).map_err(|e| e.to_string());
    let runtime_ms = if cfg.record_runtime {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    TrialRecord {
        n,
        p: cfg.p,
        trial,
        seed,
        runtime_ms,
        outcome,
    }
}

fn trial_metrics(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<TrialMetrics> {
    let params = ModelParams::new(n, cfg.p)?;
    let graph = sample_graph(params, seed);
    let mut perm_rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    let relabel = Permutation::random(n, &mut perm_rng);
    let graph = scramble(&graph, &relabel)?;
    let truth = graph.truth_ordering();

    let seriation = SeriationConfig {
        solver: SolverConfig {
            tol: cfg.solver_tol,
            seed,
            ..SeriationConfig::default().solver
        },
        tie_policy: cfg.tie_policy,
    };
    let result = recover_order(&graph, &seriation)?;
    let (aligned, _) = align_up_to_reversal(&result.order, &truth)?;

    let model_vector = eigvec2_a_unit(n)?;
    let mut random_vector: Vec<f64> = truth.as_slice().iter().map(|&v| result.eigen.vector[v]).collect();
    let dot: f64 = model_vector.iter().zip(&random_vector).map(|(a, b)| a * b).sum();
    if dot < 0.0 {
        random_vector.iter_mut().for_each(|v| *v = -*v);
    }
    let eigvec_distance = model_vector
        .iter()
        .zip(&random_vector)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();

    let report = MetricReport::compute(&aligned, &truth, &[])?;
    let dkr = cfg
        .dkr_grid
        .iter()
        .map(|&(a, b)| {
            let (k, r) = dkr_indices(n, a, b);
            d_k_r(&random_vector, k, r)
        })
        .collect::<Result<_>>()?;

    let (baseline, _) = align_up_to_reversal(&degree_baseline_order(&graph), &truth)?;
    let baseline_report = MetricReport::compute(&baseline, &truth, &[])?;

    Ok(TrialMetrics {
        lambda2_hat: result.eigen.value,
        eigvec_distance,
        report,
        dkr,
        baseline_d: baseline_report.kendall_d,
        baseline_f: baseline_report.footrule_f,
        model_vector,
        random_vector,
    })
}

/// Runs every `(n, trial)` pair in parallel. Records come back ordered by
/// the position of `n` in `n_list`, then by trial index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    Ok(jobs.into_par_iter().map(|(n, t)| run_trial(cfg, n, t)).collect())
}

/// Median of the statistic over successful trials, per `n`, in
/// `n_list` order. Sizes with no successful trial are skipped.
pub fn median_by_n(records: &[TrialRecord], stat: impl Fn(&TrialRecord, &TrialMetrics) -> f64) -> Vec<(usize, f64)> {
    let mut sizes: Vec<usize> = Vec::new();
    for r in records {
        if !sizes.contains(&r.n) {
            sizes.push(r.n);
        }
    }
    sizes
        .into_iter()
        .filter_map(|n| {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.n == n)
                .filter_map(|r| r.metrics().map(|m| stat(r, m)))
                .collect();
            median(values).map(|m| (n, m))
        })
        .collect()
}

pub fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

/// Least squares line through `(log n, log statistic)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    /// Fitted statistic at `n`.
    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept + self.slope * n.ln()).exp()
    }
}

pub fn estimate_scaling_exponent(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InvalidParams(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(n, v)) = points.iter().find(|&&(n, v)| !(n > 0.0) || !(v > 0.0)) {
        return Err(Error::InvalidParams(format!("non-positive point ({n}, {v})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, v)| (n.ln(), v.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParams("all sizes are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        points: logs,
    })
}

fn push_count(row: &mut String, value: Option<u64>) {
    match value {
        Some(v) => write!(row, ",{v}").unwrap(),
        None => row.push_str(",NaN"),
    }
}

fn push_real(row: &mut String, value: Option<f64>) {
    write!(row, ",{}", value.unwrap_or(f64::NAN)).unwrap();
}

/// CSV text: the fixed header plus one `dkr_a<alpha>_b<beta>` column per
/// grid point, then one row per record. Failed trials carry `NaN`.
pub fn csv_string(records: &[TrialRecord], dkr_columns: &[String]) -> String {
    let mut out = String::from(CSV_HEADER);
    for c in dkr_columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for r in records {
        let m = r.metrics();
        let mut row = format!("{},{},{},{}", r.n, r.p, r.trial, r.seed);
        push_real(&mut row, m.map(|m| m.lambda2_hat));
        push_real(&mut row, m.map(|m| m.eigvec_distance));
        push_count(&mut row, m.map(|m| m.report.kendall_d));
        push_count(&mut row, m.map(|m| m.report.footrule_f));
        push_real(&mut row, m.map(|m| m.report.tau_paper));
        push_real(&mut row, m.map(|m| m.report.tau_standard));
        push_count(&mut row, m.map(|m| m.baseline_d));
        write!(row, ",{:.3}", r.runtime_ms).unwrap();
        for i in 0..dkr_columns.len() {
            push_count(&mut row, m.and_then(|m| m.dkr.get(i).copied()));
        }
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn emit_csv(records: &[TrialRecord], dkr_columns: &[String], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Experiment("no records to write".into()));
    }
    write_file(path, &csv_string(records, dkr_columns))
}

/// Tab separated `index, model, random` for the first successful record
/// of size `n` (or of any size when `n` is `None`). Index is the 1-based
/// true position.
pub fn emit_plot_data(records: &[TrialRecord], n: Option<usize>, path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Experiment("no records to plot".into()));
    }
    let m = records
        .iter()
        .filter(|r| n.is_none_or(|n| r.n == n))
        .find_map(TrialRecord::metrics)
        .ok_or_else(|| Error::Experiment("no successful trial to plot".into()))?;
    let mut out = String::from("index\tmodel\trandom\n");
    for (i, (x, y)) in m.model_vector.iter().zip(&m.random_vector).enumerate() {
        writeln!(out, "{}\t{x}\t{y}", i + 1).unwrap();
    }
    write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_exact_power_law() {
        let fit = estimate_scaling_exponent(&[(10.0, 100.0), (100.0, 1e4), (1000.0, 1e6)]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.predict(50.0) - 2500.0).abs() < 1e-6);
    }

    #[test]
    fn fit_constant() {
        let fit = estimate_scaling_exponent(&[(10.0, 3.0), (20.0, 3.0), (40.0, 3.0)]).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        assert!(estimate_scaling_exponent(&[(10.0, 1.0), (20.0, 2.0)]).is_err());
        assert!(estimate_scaling_exponent(&[(10.0, 1.0), (20.0, 0.0), (30.0, 1.0)]).is_err());
    }

    #[test]
    fn seeds_depend_on_every_input() {
        let s = trial_seed(1, 256, 0);
        assert_ne!(s, trial_seed(2, 256, 0));
        assert_ne!(s, trial_seed(1, 512, 0));
        assert_ne!(s, trial_seed(1, 256, 1));
        assert_eq!(s, trial_seed(1, 256, 0));
    }

    #[test]
    fn dkr_index_rounding() {
        assert_eq!(dkr_indices(256, 0.0, 0.5), (16, 1));
        assert_eq!(dkr_indices(256, 0.5, 0.75), (64, 16));
        assert_eq!(dkr_indices(1024, 0.25, 0.8), (256, 6));
    }

    #[test]
    fn config_parse() {
        let cfg = ExperimentConfig::parse(
            "# sweep\nn_list = 8, 16\np=1\ntrials=2\nmaster_seed=9\ndkr_grid=0:0.5, 0.25:0.75\n\
             tie_policy=descending_index\noutput=/tmp/x\nrecord_runtime=false\n",
        )
        .unwrap();
        assert_eq!(cfg.n_list, vec![8, 16]);
        assert_eq!(cfg.dkr_grid, vec![(0.0, 0.5), (0.25, 0.75)]);
        assert_eq!(cfg.tie_policy, TiePolicy::DescendingIndex);
        assert!(!cfg.record_runtime);
        assert_eq!(cfg.dkr_columns(), vec!["dkr_a0_b0.5", "dkr_a0.25_b0.75"]);
    }

    #[test]
    fn config_rejects_bad_values() {
        for text in ["n_list=7", "n_list=6", "p=0", "p=1.5", "trials=0", "dkr_grid=0:2", "bogus=1", "p", "n_list="] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
        assert!(matches!(ExperimentConfig::parse("\n\np=x"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(vec![]), None);
    }

    #[test]
    fn full_graph_trials_are_exact() {
        let cfg = ExperimentConfig {
            n_list: vec![8, 32],
            p: 1.0,
            trials: 1,
            record_runtime: false,
            ..ExperimentConfig::default()
        };
        let records = run_experiment(&cfg).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            let m = r.metrics().unwrap();
            assert_eq!(m.report.kendall_d, 0);
            assert!(m.eigvec_distance <= 1e-6);
            assert!(m.dkr.iter().all(|&c| c == 0));
        }
        let csv = csv_string(&records, &cfg.dkr_columns());
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with(CSV_HEADER));
    }

    #[test]
    fn failed_trial_row_is_nan() {
        let r = TrialRecord {
            n: 8,
            p: 0.5,
            trial: 0,
            seed: 1,
            runtime_ms: 0.0,
            outcome: Err("no convergence".into()),
        };
        let csv = csv_string(&[r], &["dkr_a0_b0.5".into()]);
        assert_eq!(csv.lines().nth(1).unwrap(), "8,0.5,0,1,NaN,NaN,NaN,NaN,NaN,NaN,NaN,0.000,NaN");
    }

    #[test]
    fn empty_records_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_csv(&[], &[], &dir.path().join("a.csv")).is_err());
        assert!(emit_plot_data(&[], None, &dir.path().join("a.tsv")).is_err());
    }
}
