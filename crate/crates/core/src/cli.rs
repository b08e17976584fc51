//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 when the instance has no feasible tour, 1 for
//! usage, file and format errors. Results go to stdout as `key value` lines.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use crate::contacts::ContactTables;
use crate::exact::{self, Solution, SolveError};
use crate::generator::{self, GenConfig, GenMode, Generated};
use crate::instance::{parse_instance, Instance, InstanceError};
use crate::local_search::{self, Pivot, SearchConfig, Start};
use crate::mip::{self, LpOptions};
use crate::structure::MatchingStructure;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tspvr", version, about = "2-TSP with vertex requisitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve to optimality (Gray-code enumeration by default).
    Solve {
        instance: PathBuf,
        /// Re-evaluate every tour from scratch.
        #[arg(long, conflicts_with = "oracle")]
        naive: bool,
        /// Brute-force backtracking (n <= 14).
        #[arg(long)]
        oracle: bool,
        /// Print the cost only.
        #[arg(long)]
        quiet: bool,
        /// Append wall-clock time.
        #[arg(long)]
        timing: bool,
    },
    /// Exchange-neighborhood local search.
    Ls {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = PivotArg::Best)]
        pivot: PivotArg,
        #[arg(long, value_enum, default_value_t = StartArg::Zero)]
        start: StartArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_iter: Option<u64>,
        /// Write the trajectory (iteration, flipped cycle, cost) to stderr.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        quiet: bool,
        #[arg(long)]
        timing: bool,
    },
    /// Write the integer program in LP format.
    ExportLp {
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Leave the objective constant out (recorded in a comment).
        #[arg(long)]
        no_const: bool,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        wmax: u64,
        /// Build exactly this many 4-cycles, singletons elsewhere.
        #[arg(long)]
        forced_q: Option<usize>,
        #[arg(long, value_enum, default_value_t = ModelArg::Uniform, conflicts_with = "forced_q")]
        model: ModelArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cycle-count statistics over random instances.
    Stats {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModelArg::Planted)]
        model: ModelArg,
    },
    /// Print the matching structure and/or contact tables.
    Dump {
        instance: PathBuf,
        #[arg(long)]
        dump_structure: bool,
        #[arg(long)]
        dump_tables: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PivotArg {
    Best,
    First,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StartArg {
    Zero,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Uniform,
    Planted,
}

impl From<ModelArg> for GenMode {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Uniform => GenMode::UniformPairs,
            ModelArg::Planted => GenMode::Planted,
        }
    }
}

/// Failure that maps to the infeasible exit code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct InfeasibleExit(String);

fn infeasible(msg: impl ToString) -> anyhow::Error {
    InfeasibleExit(msg.to_string()).into()
}

fn load(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).map_err(|e: InstanceError| match e {
        InstanceError::MissingArc { position, from, .. } if e.proves_infeasible() => infeasible(format!(
            "infeasible: vertex x{from} is the only candidate at position {position} and at the position after it"
        )),
        e => anyhow::Error::new(e).context(format!("parsing {}", path.display())),
    })
}

fn solve_error(e: SolveError) -> anyhow::Error {
    if e.is_infeasible() {
        infeasible(e)
    } else {
        e.into()
    }
}

fn join(tour: &[usize]) -> String {
    tour.iter()
        .map(|v| (v + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn print_solution(out: &mut dyn Write, sol: &Solution) -> Result<()> {
    writeln!(out, "method {}", sol.method)?;
    writeln!(out, "cost {}", sol.cost)?;
    writeln!(out, "tour {}", join(&sol.tour))?;
    writeln!(out, "q {}", sol.q)?;
    writeln!(out, "specials {}", sol.specials)?;
    if let Some(d) = &sol.delta {
        writeln!(out, "delta {d}")?;
    }
    writeln!(out, "evaluations {}", sol.counters.evaluations)?;
    writeln!(out, "delta_work {}", sol.counters.delta_work)?;
    Ok(())
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.downcast_ref::<InfeasibleExit>().is_some() {
                EXIT_INFEASIBLE
            } else {
                EXIT_ERROR
            }
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Solve {
            instance,
            naive,
            oracle,
            quiet,
            timing,
        } => {
            let inst = load(&instance)?;
            let started = Instant::now();
            let mut sol = if naive {
                exact::solve_naive(&inst)
            } else if oracle {
                exact::brute_force_oracle(&inst)
            } else {
                exact::solve_exact(&inst)
            }
            .map_err(solve_error)?;
            let elapsed = started.elapsed();
            if oracle {
                let s = MatchingStructure::build(&inst).map_err(|e| solve_error(e.into()))?;
                sol.q = s.q();
                sol.specials = s.specials().len();
            }
            if quiet {
                writeln!(out, "{}", sol.cost)?;
            } else {
                print_solution(out, &sol)?;
            }
            if timing {
                writeln!(out, "elapsed_ms {:.3}", elapsed.as_secs_f64() * 1e3)?;
            }
        }
        Command::Ls {
            instance,
            pivot,
            start,
            seed,
            max_iter,
            trace,
            quiet,
            timing,
        } => {
            let inst = load(&instance)?;
            let cfg = SearchConfig {
                pivot: match pivot {
                    PivotArg::Best => Pivot::Best,
                    PivotArg::First => Pivot::First,
                },
                start: match start {
                    StartArg::Zero => Start::Zero,
                    StartArg::Random => Start::Random(seed),
                },
                max_iterations: max_iter.map(|m| m as usize),
            };
            let started = Instant::now();
            let (sol, outcome) = local_search::solve_local(&inst, &cfg).map_err(solve_error)?;
            let elapsed = started.elapsed();
            if trace {
                for step in &outcome.trajectory {
                    writeln!(err, "step {} flip {} cost {}", step.iteration, step.flipped + 1, step.cost)?;
                }
            }
            if quiet {
                writeln!(out, "{}", sol.cost)?;
            } else {
                print_solution(out, &sol)?;
                writeln!(out, "start_cost {}", outcome.start_cost)?;
                writeln!(out, "iterations {}", outcome.trajectory.len())?;
            }
            if timing {
                writeln!(out, "elapsed_ms {:.3}", elapsed.as_secs_f64() * 1e3)?;
            }
        }
        Command::ExportLp {
            instance,
            output,
            no_const,
        } => {
            let inst = load(&instance)?;
            let s = MatchingStructure::build(&inst).map_err(|e| solve_error(e.into()))?;
            let tables = ContactTables::build(&inst, &s)?;
            let model = mip::build_mip(&tables);
            let text = mip::lp_string(
                &model,
                LpOptions {
                    include_constant: !no_const,
                },
            );
            match output {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Gen {
            n,
            seed,
            wmax,
            forced_q,
            model,
            output,
        } => {
            let cfg = GenConfig {
                n,
                seed,
                weight_max: wmax,
                mode: forced_q.map_or_else(|| model.into(), GenMode::ForcedQ),
            };
            let inst = match generator::generate(&cfg)? {
                Generated::Feasible(inst) => inst,
                Generated::Rejected { reason, .. } => {
                    return Err(infeasible(format!("draw rejected, {reason}")))
                }
            };
            match output {
                Some(path) => fs::write(&path, inst.to_text())
                    .with_context(|| format!("writing {}", path.display()))?,
                None => out.write_all(inst.to_text().as_bytes())?,
            }
        }
        Command::Stats {
            n,
            trials,
            seed,
            model,
        } => {
            let stats = generator::good_graph_stats(n, trials as usize, seed, model.into())?;
            write!(out, "{stats}")?;
        }
        Command::Dump {
            instance,
            dump_structure,
            dump_tables,
        } => {
            let inst = load(&instance)?;
            let s = MatchingStructure::build(&inst).map_err(|e| solve_error(e.into()))?;
            let both = !dump_structure && !dump_tables;
            if dump_structure || both {
                out.write_all(s.dump().as_bytes())?;
            }
            if dump_tables || both {
                let tables = ContactTables::build(&inst, &s)?;
                out.write_all(tables.dump().as_bytes())?;
            }
        }
    }
    Ok(())
}
