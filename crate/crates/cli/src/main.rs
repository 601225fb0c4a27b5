use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seriation_core::experiment::{emit_csv, emit_plot_data, median_by_n, run_experiment, ExperimentConfig};
use seriation_core::formats::{load_edge_list, load_ordering, save_edge_list, save_ordering};
use seriation_core::graph_model::{sample_graph, scramble, ModelParams};
use seriation_core::metrics::MetricReport;
use seriation_core::model_spectrum::{gap_bounds_m, lambda1_a, lambda2_abs_a, lambda3_a_bound, theta_roots_d};
use seriation_core::permutation::Permutation;
use seriation_core::seriation::{align_up_to_reversal, degree_baseline_order, recover_order, SeriationConfig, TiePolicy};

#[derive(Parser)]
#[command(name = "linseriate", version, about = "Recover the hidden order of random linear graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Spectral,
    Degree,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ties {
    AscendingIndex,
    DescendingIndex,
}

impl From<Ties> for TiePolicy {
    fn from(t: Ties) -> Self {
        match t {
            Ties::AscendingIndex => TiePolicy::AscendingIndex,
            Ties::DescendingIndex => TiePolicy::DescendingIndex,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random linear graph and write it as an edge list.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        /// Defaults to n/2 - 1.
        #[arg(long)]
        band: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relabel vertices with a random permutation drawn from this seed.
        #[arg(long)]
        scramble: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the true ordering (position to vertex).
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Recover a vertex ordering from an edge list.
    Order {
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "spectral")]
        baseline: Method,
        #[arg(long, value_enum, default_value = "ascending-index")]
        tie_policy: Ties,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score an ordering against the true one; prints one CSV row.
    Eval {
        ordering: PathBuf,
        truth: PathBuf,
        /// Refined counts to report, as `k:r` pairs.
        #[arg(long, value_delimiter = ',')]
        dkr: Vec<String>,
        /// Score the better of the ordering and its reversal.
        #[arg(long)]
        align: bool,
    },
    /// Closed-form spectral quantities of the model with n vertices.
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Print the characteristic roots as CSV.
        #[arg(long)]
        roots: bool,
    },
    /// Run a seeded Monte-Carlo sweep.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the `output` key of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_dkr(entries: &[String]) -> Result<Vec<(usize, usize)>> {
    entries
        .iter()
        .map(|e| {
            let (k, r) = e.split_once(':').with_context(|| format!("expected k:r, got {e:?}"))?;
            Ok((k.trim().parse()?, r.trim().parse()?))
        })
        .collect()
}

fn generate(
    n: usize,
    p: f64,
    band: Option<usize>,
    seed: u64,
    scramble_seed: Option<u64>,
    out: PathBuf,
    truth: Option<PathBuf>,
) -> Result<()> {
    let params = match band {
        Some(b) => ModelParams::with_band(n, p, b)?,
        None => ModelParams::new(n, p)?,
    };
    let mut graph = sample_graph(params, seed);
    if let Some(s) = scramble_seed {
        let perm = Permutation::random(n, &mut ChaCha8Rng::seed_from_u64(s));
        graph = scramble(&graph, &perm)?;
    }
    save_edge_list(&graph, &out)?;
    if let Some(path) = truth {
        save_ordering(&graph.truth_ordering(), &path)?;
    }
    println!("wrote {} edges on {n} vertices to {}", graph.edge_count(), out.display());
    Ok(())
}

fn order(graph: PathBuf, out: PathBuf, method: Method, ties: Ties, tol: f64, seed: u64) -> Result<()> {
    let graph = load_edge_list(&graph)?;
    let ordering = match method {
        Method::Degree => degree_baseline_order(&graph),
        Method::Spectral => {
            let mut cfg = SeriationConfig {
                tie_policy: ties.into(),
                ..SeriationConfig::default()
            };
            cfg.solver.tol = tol;
            cfg.solver.seed = seed;
            let res = recover_order(&graph, &cfg)?;
            println!(
                "lambda2={} residual={:.3e} matvecs={} ties={}",
                res.eigen.value, res.eigen.residual, res.eigen.iterations, res.tie_count
            );
            res.order
        }
    };
    save_ordering(&ordering, &out)?;
    Ok(())
}

fn eval(ordering: PathBuf, truth: PathBuf, dkr: &[String], align: bool) -> Result<()> {
    let mut ordering = load_ordering(&ordering)?;
    let truth = load_ordering(&truth)?;
    if align {
        ordering = align_up_to_reversal(&ordering, &truth)?.0;
    }
    let report = MetricReport::compute(&ordering, &truth, &parse_dkr(dkr)?)?;
    println!("{}", report.csv_header());
    println!("{}", report.csv_row());
    Ok(())
}

fn spectrum(n: usize, p: f64, roots: bool) -> Result<()> {
    let params = ModelParams::new(n, p)?;
    let s = params.half_order();
    println!("n={n} s={s} p={p}");
    println!("lambda2_abs_A={}", lambda2_abs_a(s));
    println!("lambda3_abs_A_upper={}", lambda3_a_bound(s));
    if s < 6 || s % 2 != 0 {
        println!("root table and gap bounds need n/2 even and at least 6");
        return Ok(());
    }
    println!("lambda1_A={}", lambda1_a(s)?);
    let gaps = gap_bounds_m(&params)?;
    println!("gap12_lower={}", gaps.gap12_lower);
    println!("gap23_lower={}", gaps.gap23_lower);
    println!("omega_sq={}", gaps.omega_sq);
    if roots {
        let table = theta_roots_d(s)?;
        println!("k,theta,lambda,bracket_lo,bracket_hi");
        for (k, r) in table.trigonometric.iter().enumerate() {
            println!("{},{},{},{},{}", k + 1, r.theta, r.eigenvalue(), r.bracket.0, r.bracket.1);
        }
        let h = table.hyperbolic;
        // the hyperbolic root sits at theta = pi + i t
        println!("{},pi+{}i,{},{},{}", s, h.t, h.eigenvalue(), h.bracket.0, h.bracket.1);
    }
    Ok(())
}

fn experiment(config: PathBuf, out: Option<PathBuf>) -> Result<ExitCode> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(dir) = out {
        cfg.output = dir;
    }
    std::fs::create_dir_all(&cfg.output).with_context(|| format!("creating {}", cfg.output.display()))?;
    let records = run_experiment(&cfg)?;
    emit_csv(&records, &cfg.dkr_columns(), &cfg.output.join("trials.csv"))?;
    if let Err(e) = emit_plot_data(&records, None, &cfg.output.join("eigvec_profile.tsv")) {
        eprintln!("no plot data: {e}");
    }
    for (n, d) in median_by_n(&records, |_, m| m.eigvec_distance) {
        println!("n={n} median eigvec_dist={d:.5}");
    }
    let failed: Vec<_> = records.iter().filter(|r| r.metrics().is_none()).collect();
    for r in &failed {
        if let Err(msg) = &r.outcome {
            eprintln!("trial n={} index={} failed: {msg}", r.n, r.trial);
        }
    }
    println!("{} trials, {} failed, output in {}", records.len(), failed.len(), cfg.output.display());
    Ok(if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            n,
            p,
            band,
            seed,
            scramble,
            out,
            truth,
        } => generate(n, p, band, seed, scramble, out, truth)?,
        Command::Order {
            graph,
            out,
            baseline,
            tie_policy,
            tol,
            seed,
        } => order(graph, out, baseline, tie_policy, tol, seed)?,
        Command::Eval {
            ordering,
            truth,
            dkr,
            align,
        } => eval(ordering, truth, &dkr, align)?,
        Command::Spectrum { n, p, roots } => spectrum(n, p, roots)?,
        Command::Experiment { config, out } => return experiment(config, out),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
