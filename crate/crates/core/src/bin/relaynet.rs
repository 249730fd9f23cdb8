//! Batch front end: evaluations, optimizations, curve sweeps, the
//! discrete oracle and the verification suite.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use relaynet::config::TopologyConfig;
use relaynet::discrete::{self, BoundId, JointPmf};
use relaynet::gaussian;
use relaynet::optimize::{self, Budget, SweepRow};
use relaynet::protocol::PresetName;
use relaynet::verify::{self, Perturbation};
use relaynet::{Channel, Error, Ordering, PowerAllocation};

/// Sets the number of worker threads.
const WORKERS_ENV: &str = "RELAYNET_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Eval,
    Optimize,
    Sweep,
    Discrete,
    Verify,
}

#[derive(Debug, Parser)]
#[command(name = "relaynet", version, about = "Achievable rates of mixed relaying strategies in Gaussian relay networks")]
struct Cli {
    #[arg(long, value_enum)]
    command: Command,
    /// Topology file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated presets: one_hop, df, cf, pdf, mixed_cf_df, full_mixed.
    #[arg(long, value_delimiter = ',')]
    preset: Option<Vec<String>>,
    #[arg(long, conflicts_with = "noncoherent")]
    coherent: bool,
    #[arg(long)]
    noncoherent: bool,
    /// Relay offsets for sweeps as `start:end:count`.
    #[arg(long, default_value = "-0.49:0.49:10", allow_hyphen_values = true)]
    r_grid: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restarts per ordering (optimize, sweep) or random instances (verify).
    #[arg(long)]
    budget: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for gnuplot two-column files, one per sweep curve.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// Joint pmf in text form for the discrete command.
    #[arg(long)]
    pmf: Option<PathBuf>,
    /// Crossover of the built-in binary symmetric channel pmf.
    #[arg(long, default_value_t = 0.11)]
    crossover: f64,
    /// Scales covariances in the verification suite; it must then fail.
    #[arg(long)]
    inject_perturbation: Option<f64>,
}

enum Failure {
    Config(String),
    Module(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Config(m),
            other => Failure::Module(other),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        match v.parse::<usize>() {
            Ok(w) if w > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
            }
            _ => {
                eprintln!("config error: {WORKERS_ENV} must be a positive integer, got `{v}`");
                return ExitCode::from(1);
            }
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Module(e)) => {
            eprintln!("error {}: {e}", e.code());
            ExitCode::from(1)
        }
        Err(Failure::Verification) => ExitCode::from(2),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = cli.config.as_deref().map(TopologyConfig::load).transpose()?;
    let presets = presets(cli)?;
    let coherent = if cli.coherent {
        true
    } else if cli.noncoherent {
        false
    } else {
        config.as_ref().map(|c| c.coherent).unwrap_or(true)
    };
    let budget = match cli.budget {
        Some(b) if cli.command != Command::Verify => Budget::with_restarts(b)?,
        Some(0) => return Err(Failure::Config("budget must be positive".into())),
        _ => Budget::default(),
    };
    let text = match cli.command {
        Command::Eval => eval(require(&config)?, coherent)?,
        Command::Optimize => optimize_cmd(require(&config)?, coherent, &presets, budget, cli.seed)?,
        Command::Sweep => {
            let grid = parse_grid(&cli.r_grid)?;
            let (snr, theta) = config.as_ref().map(|c| (c.snr(), c.theta)).unwrap_or((10.0, 4.0));
            let rows = optimize::sweep(&grid, &presets, coherent, snr, theta, budget, cli.seed);
            if let Some(dir) = &cli.plot_dir {
                write_plots(dir, &rows, &presets, coherent)?;
            }
            sweep_csv(&rows)
        }
        Command::Discrete => discrete_cmd(cli)?,
        Command::Verify => {
            let instances = cli.budget.unwrap_or(100);
            let checks = verify::run_all(instances, cli.seed, cli.inject_perturbation.map(Perturbation))?;
            let mut s = String::new();
            for c in &checks {
                let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            emit(cli.out.as_deref(), &s)?;
            return if checks.iter().all(|c| c.passed) { Ok(()) } else { Err(Failure::Verification) };
        }
    };
    emit(cli.out.as_deref(), &text)
}

fn require(config: &Option<TopologyConfig>) -> Result<&TopologyConfig, Failure> {
    config.as_ref().ok_or_else(|| Failure::Config("--config is required for this command".into()))
}

fn presets(cli: &Cli) -> Result<Vec<PresetName>, Failure> {
    match &cli.preset {
        None if cli.command == Command::Sweep => Ok(vec![
            PresetName::OneHop,
            PresetName::Df,
            PresetName::Cf,
            PresetName::Pdf,
            PresetName::FullMixed,
        ]),
        None => Ok(vec![PresetName::FullMixed]),
        Some(list) => list
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e: Error| Failure::Config(e.to_string())))
            .collect(),
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Config(format!("--r-grid expects start:end:count, got `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let grid = optimize::linspace(a, b, n);
    if grid.iter().any(|r| !(-0.49 - 1e-12..=0.49 + 1e-12).contains(r)) {
        return Err(Failure::Config("relay offsets must lie in [-0.49, 0.49]".into()));
    }
    Ok(grid)
}

/// Six significant digits.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (5 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn allocation_lines(s: &mut String, a: &PowerAllocation) {
    for p in PowerAllocation::params(a.n()) {
        let v = a.get(p).expect("listed parameter");
        if v != 0.0 {
            let _ = writeln!(s, "{p}={}", sig6(v));
        }
    }
    for l in 1..=a.n() {
        for i in 1..=a.refinements(l) {
            let q = a.quant_noise(l, i);
            if q.is_finite() {
                let _ = writeln!(s, "quant_noise_{l}^{i}={}", sig6(q));
            }
        }
    }
}

fn eval(config: &TopologyConfig, coherent: bool) -> Result<String, Failure> {
    let topo = config.topology()?.with_coherent(coherent);
    let (ordering, a) = config.allocation()?;
    if ordering.n() != topo.n_relays() {
        return Err(Failure::Config("allocation ordering does not match n_relays".into()));
    }
    let ch = Channel::new(&topo, &ordering)?;
    let a = gaussian::with_minimal_quantization(&ch, &a)?;
    let report = gaussian::evaluate(&ch, &a)?;
    let mut s = String::new();
    let _ = writeln!(s, "command=eval");
    let _ = writeln!(s, "n_relays={}", topo.n_relays());
    let _ = writeln!(s, "coherent={coherent}");
    let _ = writeln!(s, "ordering={ordering}");
    let _ = writeln!(s, "feasible={}", report.feasible);
    for (k, r) in report.source_rates.iter().enumerate() {
        let _ = writeln!(s, "source_rate_{}={} limiting_level={}", k + 1, sig6(*r), report.limiting_levels[k]);
    }
    for (l, row) in report.broadcast_rates.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            let _ = writeln!(s, "broadcast_rate_{}^{}={}", l + 1, j + 1, sig6(*r));
        }
    }
    for q in &report.quantization {
        let _ = writeln!(s, "quantization_{}^{}_slack={} feasible={}", q.l, q.m, sig6(q.slack), q.feasible);
    }
    allocation_lines(&mut s, &a);
    let _ = writeln!(s, "total={}", sig6(report.total));
    Ok(s)
}

fn optimize_cmd(
    config: &TopologyConfig,
    coherent: bool,
    presets: &[PresetName],
    budget: Budget,
    seed: u64,
) -> Result<String, Failure> {
    let topo = config.topology()?.with_coherent(coherent);
    let mut s = String::new();
    for &p in presets {
        let r = optimize::optimize_preset(&topo, p, budget, seed)?;
        let _ = writeln!(s, "preset={p}");
        let _ = writeln!(s, "coherent={coherent}");
        let _ = writeln!(s, "rate={}", sig6(r.rate));
        let _ = writeln!(s, "ordering={}", r.ordering);
        let _ = writeln!(s, "restarts={}", r.restarts);
        let _ = writeln!(s, "evaluations={}", r.evaluations);
        let _ = writeln!(s, "converged={}", r.converged);
        let _ = writeln!(s, "fallback={}", r.fallback);
        for w in &r.warnings {
            let _ = writeln!(s, "warning={w}");
        }
        allocation_lines(&mut s, &r.allocation);
        s.push('\n');
    }
    Ok(s)
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("r,protocol,coherent,rate_bits,feasible,seed,status\n");
    for row in rows {
        let (rate, feasible, status) = match &row.outcome {
            Ok(o) => (sig6(o.rate), !o.fallback, if o.fallback { "fallback".to_string() } else { "ok".to_string() }),
            Err(e) => (String::new(), false, format!("error {}: {}", e.code(), e).replace([',', '\n'], ";")),
        };
        let _ = writeln!(s, "{},{},{},{rate},{feasible},{},{status}", sig6(row.r), row.preset, row.coherent, row.seed);
    }
    s
}

fn write_plots(dir: &Path, rows: &[SweepRow], presets: &[PresetName], coherent: bool) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
    let mode = if coherent { "coherent" } else { "noncoherent" };
    for &p in presets {
        let mut s = format!("# r rate_bits ({p}, {mode})\n");
        for row in rows.iter().filter(|r| r.preset == p) {
            if let Some(rate) = row.rate() {
                let _ = writeln!(s, "{} {}", sig6(row.r), sig6(rate));
            }
        }
        let path = dir.join(format!("{p}_{mode}.dat"));
        std::fs::write(&path, s).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn discrete_cmd(cli: &Cli) -> Result<String, Failure> {
    let pmf = match &cli.pmf {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?;
            JointPmf::from_text(&text).map_err(|e| Failure::Config(e.to_string()))?
        }
        None => discrete::bsc_pmf(cli.crossover).map_err(|e| Failure::Config(e.to_string()))?,
    };
    // the destination output carries the largest index
    let n = pmf
        .names()
        .iter()
        .filter_map(|s| s.strip_prefix('Y').and_then(|t| t.parse::<usize>().ok()))
        .max()
        .ok_or_else(|| Failure::Config("pmf has no channel output Y<l>".into()))?
        - 1;
    let ordering = Ordering::destination_first((1..=n + 1).collect()).map_err(Failure::from)?;
    let report = discrete::rate_bounds(&pmf, n, &ordering)?;
    let mut s = String::new();
    let _ = writeln!(s, "command=discrete");
    let _ = writeln!(s, "n_relays={n}");
    let _ = writeln!(s, "ordering={ordering}");
    for b in &report.bounds {
        let line = match b.id {
            BoundId::Source { k } => format!("source_bound_{k}={} limiting_level={}", sig6(b.value), b.index),
            BoundId::Broadcast { l, j } => {
                format!("broadcast_bound_{l}^{j}={} limiting_receiver={}", sig6(b.value), b.index)
            }
            BoundId::Quantization { l, m } => {
                format!("quantization_requirement_{l}^{m}={} limiting_receiver={}", sig6(b.value), b.index)
            }
        };
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(s, "source_total={}", sig6(report.source_total()));
    Ok(s)
}
