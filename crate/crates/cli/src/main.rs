use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use seqzap_core::sweep::emit_records_csv;
use seqzap_core::{
    aggregate, batch_solve, emit_csv, emit_svg, generate_problem, msd, run_online, run_sweep,
    Algorithm, DVector, GramInverse, ProblemSpec, SparseProblem, StopMode, SweepConfig, ZapConfig,
};

#[derive(Parser)]
#[command(
    name = "seqzap",
    version,
    about = "Online ZAP for sequential compressive sensing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the number of measurements and write summary CSV / SVG.
    Bench(BenchArgs),
    /// Recover the signal of one problem fixture.
    Solve(SolveArgs),
    /// Write a seeded problem fixture.
    Gen(GenArgs),
}

#[derive(Args, Clone)]
struct ZapArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.02)]
    kappa0: f64,
    #[arg(long, default_value_t = 0.99)]
    eta1: f64,
    #[arg(long, default_value_t = 0.8)]
    eta2: f64,
    #[arg(long, default_value_t = 50)]
    t_max: usize,
    #[arg(long, default_value_t = 2000.0)]
    q_divisor: f64,
    /// Outer stopping threshold (normalized MSD for `oracle`, relative change for `proxy`).
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = StopKind::Oracle)]
    stop: StopKind,
}

impl ZapArgs {
    fn config(&self) -> ZapConfig {
        ZapConfig {
            alpha: self.alpha,
            kappa0: self.kappa0,
            eta1: self.eta1,
            eta2: self.eta2,
            t_max: self.t_max,
            q_divisor: self.q_divisor,
            epsilon: self.epsilon,
        }
    }

    fn stop_mode(&self) -> StopMode {
        match self.stop {
            StopKind::Oracle => StopMode::OracleMsd {
                threshold: self.epsilon,
            },
            StopKind::Proxy => StopMode::ProxyChange {
                threshold: self.epsilon,
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StopKind {
    Oracle,
    Proxy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Online,
    Batch,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Online => Algorithm::OnlineZap,
            AlgorithmArg::Batch => Algorithm::BatchZapColdStart,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 120)]
    m_max: usize,
    /// Spacing of the measurement grid `m_step, 2*m_step, ..`, plus `m_max`.
    #[arg(long, default_value_t = 1)]
    m_step: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[command(flatten)]
    zap: ZapArgs,
    /// Normalized MSD below which a trial counts as recovered.
    #[arg(long, default_value_t = 1e-4)]
    tau: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "online,batch"
    )]
    algorithms: Vec<AlgorithmArg>,
    #[arg(long)]
    unit_norm_rows: bool,
    #[arg(long)]
    out_csv: PathBuf,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    /// Per-trial records, including unnormalized MSD and iteration counts.
    #[arg(long)]
    out_records: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    fixture: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Online)]
    algorithm: AlgorithmArg,
    /// Measurement budget; defaults to the signal length.
    #[arg(long)]
    m: Option<usize>,
    #[command(flatten)]
    zap: ZapArgs,
    /// Write the final estimate, one value per line.
    #[arg(long)]
    out_estimate: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    unit_norm_rows: bool,
    #[arg(long)]
    out: PathBuf,
}

fn m_grid(m_max: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 {
        bail!("--m-step must be at least 1");
    }
    let mut grid: Vec<usize> = (1..=m_max / step).map(|i| i * step).collect();
    if grid.last() != Some(&m_max) && m_max > 0 {
        grid.push(m_max);
    }
    Ok(grid)
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let cfg = SweepConfig {
        spec: ProblemSpec {
            n: args.n,
            k: args.k,
            seed: args.seed,
            unit_norm_rows: args.unit_norm_rows,
        },
        m_values: m_grid(args.m_max, args.m_step)?,
        trials: args.trials,
        zap: args.zap.config(),
        stop: args.zap.stop_mode(),
        algorithms: args.algorithms.iter().map(|&a| a.into()).collect(),
    };
    let records = run_sweep(&cfg)?;
    let summaries = aggregate(&records, args.tau)?;
    emit_csv(&summaries, &args.out_csv)?;
    if let Some(path) = &args.out_svg {
        emit_svg(&summaries, path)?;
    }
    if let Some(path) = &args.out_records {
        emit_records_csv(&records, path)?;
    }

    for alg in &cfg.algorithms {
        let first = summaries
            .iter()
            .find(|s| s.algorithm == *alg && s.success_rate >= 0.8);
        match first {
            Some(s) => println!("{}: 80% recovery first reached at m = {}", alg.label(), s.m),
            None => println!("{}: 80% recovery not reached", alg.label()),
        }
    }
    let failures: Vec<_> = records.iter().filter(|r| r.error.is_some()).collect();
    if !failures.is_empty() {
        for r in &failures {
            eprintln!(
                "{} trial {} m {}: {}",
                r.algorithm.label(),
                r.trial,
                r.m,
                r.error.as_deref().unwrap_or_default()
            );
        }
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.fixture)
        .with_context(|| format!("reading {}", args.fixture.display()))?;
    let problem = SparseProblem::from_fixture(&text)?;
    let n = problem.spec().n;
    let truth = problem.x_true().clone();
    let budget = args.m.unwrap_or(n);
    let cfg = args.zap.config();

    let (estimate, m, iterations, converged) = match args.algorithm {
        AlgorithmArg::Online => {
            let state = run_online(problem, &cfg, args.zap.stop_mode(), budget, Some(&truth), n)?;
            let iters = state.total_inner_iterations();
            (
                state.estimate().clone(),
                state.m(),
                iters,
                state.converged(),
            )
        }
        AlgorithmArg::Batch => {
            if budget == 0 || budget > n {
                bail!("--m must lie in [1, {n}]");
            }
            let mut gram = GramInverse::new(n)?;
            let mut ys = Vec::with_capacity(budget);
            for (a, y) in problem {
                if gram.m() == budget {
                    break;
                }
                if gram.append_row(&a).is_ok() {
                    ys.push(y);
                }
            }
            let y = DVector::from_vec(ys);
            let r = batch_solve(&gram, &y, &cfg)?;
            let error = msd(&r.x, &truth);
            let converged = matches!(args.zap.stop_mode(), StopMode::OracleMsd { threshold } if error < threshold);
            (r.x, gram.m(), r.iterations, converged)
        }
    };
    let error = msd(&estimate, &truth);
    println!("m {m}");
    println!("msd_normalized {error:e}");
    println!("msd_raw {:e}", error * n as f64);
    println!("total_inner_iterations {iterations}");
    println!("converged {converged}");
    if let Some(path) = &args.out_estimate {
        let body: String = estimate.iter().map(|v| format!("{v:e}\n")).collect();
        fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn gen(args: GenArgs) -> Result<ExitCode> {
    let problem = generate_problem(ProblemSpec {
        n: args.n,
        k: args.k,
        seed: args.seed,
        unit_norm_rows: args.unit_norm_rows,
    })?;
    fs::write(&args.out, problem.to_fixture())
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bench(a) => bench(a),
        Command::Solve(a) => solve(a),
        Command::Gen(a) => gen(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
