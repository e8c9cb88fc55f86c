use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use sinegate_core::bench::{grid_oracle, run_builtin_suite};
use sinegate_core::dsl::{load_problem, ProblemSpec};
use sinegate_core::trace::write_csv;
use sinegate_core::{
    constraint_penalty, global_minimize, level_solve, GateMode, GlobalMinimizeOptions,
    LevelSolveOptions, Point, SolveReport, TraceRecord,
};

const EXIT_REACHED: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_NOT_REACHED: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "sinegate",
    version,
    about = "Global optimization over boxes by sinusoidal reparametrization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find a point whose objective lies strictly below a level
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long = "K", allow_hyphen_values = true)]
        big_k: Option<f64>,
        #[arg(long = "M")]
        big_m: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long = "r-init")]
        r_init: Option<f64>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write per-iteration trace as CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Lower the level repeatedly to approach the global minimum
    Global {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long = "k-init", allow_hyphen_values = true)]
        k_init: f64,
        #[arg(long)]
        shrink: Option<f64>,
        #[arg(long = "abs-step")]
        abs_step: Option<f64>,
        #[arg(long = "max-levels")]
        max_levels: Option<usize>,
        #[arg(long = "give-up")]
        give_up: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Brute-force grid scan of the objective
    Oracle {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        step: f64,
        #[arg(long, allow_hyphen_values = true)]
        level: Option<f64>,
    },
    /// Run the built-in benchmark suite
    Bench {
        /// Comma-separated problem names
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the machine report (JSON)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate objective and constraints at a point
    Eval {
        #[arg(long)]
        problem: PathBuf,
        /// Comma-separated coordinates
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_REACHED
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn read_problem(path: &Path) -> anyhow::Result<ProblemSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_problem(&text).with_context(|| format!("loading {}", path.display()))
}

fn mode_for(spec: &ProblemSpec) -> GateMode {
    if spec.is_constrained() {
        GateMode::DeformedObjective
    } else {
        GateMode::RawObjective
    }
}

fn write_trace(path: &Path, records: &[TraceRecord], spec: &ProblemSpec) -> anyhow::Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(file, records, (spec.dimension, 1))?;
    Ok(())
}

fn print_report(report: &SolveReport) {
    let scale = match report.mode {
        GateMode::RawObjective => "objective",
        GateMode::DeformedObjective => "deformed objective",
    };
    println!("status:      {:?}", report.status);
    println!("level k:     {} ({scale} scale)", report.level);
    if let (Some(w), Some(v)) = (&report.witness, report.witness_value) {
        println!("witness x':  {w}");
        println!("value:       {v}");
        if report.mode == GateMode::DeformedObjective {
            println!(
                "f(x'):       {}",
                report.objective_value.unwrap_or(f64::NAN)
            );
            println!("penalty:     {}", report.penalty.unwrap_or(f64::NAN));
        }
    }
    println!(
        "minimizer:   x = {}, r = {:?}",
        report.raw_minimizer.x,
        report.raw_minimizer.r.free_components()
    );
    println!("u = {}, w = {}", report.gate_value, report.augmented_value);
    println!("attempts:    {}", report.attempts);
    if let Some(path) = &report.trace_path {
        println!("trace:       {path}");
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Solve {
            problem,
            k,
            t,
            big_k,
            big_m,
            rho,
            r_init,
            restarts,
            seed,
            trace,
        } => {
            let spec = read_problem(&problem)?;
            let mut params = spec.deformation_params();
            params.t = t.unwrap_or(params.t);
            params.big_k = big_k.unwrap_or(params.big_k);
            params.big_m = big_m.unwrap_or(params.big_m);
            params.anchor = rho.unwrap_or(params.anchor);
            params.level = match k.or(spec.params.k) {
                Some(k) => k,
                None => bail!("no level given: pass --k or set params.k in the problem file"),
            };
            let mut opts = LevelSolveOptions {
                mode: mode_for(&spec),
                restarts,
                ..Default::default()
            }
            .with_seed(seed);
            if let Some(r) = r_init.or(spec.params.r_init) {
                opts.r_init = r;
            }
            opts.solver.record_trace = trace.is_some();

            let mut report = level_solve(&spec.to_problem(), &params, &opts)?;
            if let Some(path) = &trace {
                write_trace(path, &report.trace, &spec)?;
                report.trace_path = Some(path.display().to_string());
            }
            print_report(&report);
            Ok(if report.is_success() {
                EXIT_REACHED
            } else {
                EXIT_NOT_REACHED
            })
        }
        Command::Global {
            problem,
            k_init,
            shrink,
            abs_step,
            max_levels,
            give_up,
            seed,
            trace,
        } => {
            let spec = read_problem(&problem)?;
            let defaults = GlobalMinimizeOptions::default();
            let gopts = GlobalMinimizeOptions {
                k_init,
                shrink: shrink.unwrap_or(defaults.shrink),
                absolute_step: abs_step.unwrap_or(defaults.absolute_step),
                max_levels: max_levels.unwrap_or(defaults.max_levels),
                give_up_after: give_up.unwrap_or(defaults.give_up_after),
            };
            let mut opts = LevelSolveOptions {
                mode: mode_for(&spec),
                ..Default::default()
            }
            .with_seed(seed);
            if let Some(r) = spec.params.r_init {
                opts.r_init = r;
            }
            opts.solver.record_trace = trace.is_some();

            let result = global_minimize(
                &spec.to_problem(),
                &spec.deformation_params(),
                &gopts,
                &opts,
            )?;
            println!(
                "{:>4} {:>16} {:<16} {:>16} {:>8}",
                "#", "k", "status", "value", "attempts"
            );
            for (i, level) in result.levels.iter().enumerate() {
                let value = level
                    .report
                    .witness_value
                    .map_or("-".to_string(), |v| format!("{v:.9e}"));
                println!(
                    "{:>4} {:>16.9e} {:<16} {:>16} {:>8}",
                    i,
                    level.k,
                    format!("{:?}", level.report.status),
                    value,
                    level.report.attempts
                );
            }
            if let Some(path) = &trace {
                write_trace(path, &result.trace(), &spec)?;
                println!("trace: {}", path.display());
            }
            match (&result.best_point, result.best_value) {
                (Some(p), Some(v)) => {
                    println!("best point: {p}");
                    println!("best value: {v}");
                    Ok(EXIT_REACHED)
                }
                _ => {
                    println!("no level was reached");
                    Ok(EXIT_NOT_REACHED)
                }
            }
        }
        Command::Oracle {
            problem,
            step,
            level,
        } => {
            let spec = read_problem(&problem)?;
            let result = grid_oracle(&spec.to_problem(), step, level)?;
            println!("grid step:       {}", result.grid_step);
            println!(
                "points:          {} ({} feasible)",
                result.points, result.feasible_points
            );
            match (&result.best_point, result.best_value) {
                (Some(p), Some(v)) => {
                    println!("best point:      {p}");
                    println!("best value:      {v}");
                }
                _ => println!("best point:      none (no feasible grid point)"),
            }
            match level {
                Some(k) => {
                    if let Some(w) = &result.sublevel_witness {
                        println!("sublevel f < {k}: nonempty, e.g. {w}");
                        Ok(EXIT_REACHED)
                    } else {
                        println!("sublevel f < {k}: empty on this grid");
                        Ok(EXIT_NOT_REACHED)
                    }
                }
                None => Ok(EXIT_REACHED),
            }
        }
        Command::Bench { only, seed, out } => {
            let report = run_builtin_suite(only.as_deref(), seed)?;
            print!("{}", report.render_table());
            if let Some(path) = out {
                fs::write(&path, report.to_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(EXIT_REACHED)
        }
        Command::Eval { problem, at } => {
            let spec = read_problem(&problem)?;
            let coords = at
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .with_context(|| format!("bad coordinate {s:?}"))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            if coords.len() != spec.dimension {
                bail!(
                    "--at has {} coordinates, problem dimension is {}",
                    coords.len(),
                    spec.dimension
                );
            }
            let x = Point::new(coords);
            let problem = spec.to_problem();
            println!("f = {}", problem.objective(&x)?);
            for (i, g) in problem.equality_values(&x)?.iter().enumerate() {
                println!("g{} = {g}", i + 1);
            }
            for (i, h) in problem.inequality_values(&x)?.iter().enumerate() {
                println!("h{} = {h}", i + 1);
            }
            if !problem.is_unconstrained() {
                println!("penalty = {}", constraint_penalty(&problem, &x)?);
            }
            println!("in box: {}", problem.domain().contains(&x)?);
            Ok(EXIT_REACHED)
        }
    }
}
