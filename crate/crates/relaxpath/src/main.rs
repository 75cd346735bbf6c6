//! Command-line front end: path computation and export, point solves,
//! model-selection tables, cascaded chains, and the seeded Zipf
//! path-complexity sweep.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use relaxpath::{
    cascade_eval, cascade_step, select_models, sq_primal_from, track_global, track_local,
    track_sparse, track_uniform, CascadeStage, Error, InstanceFile, PathFile,
    PrimalDualPoint, ProblemInstance, RelaxationPath, SweepRow, ValidationCounts,
    GENERATOR_ID,
};

#[derive(Parser)]
#[command(name = "relaxpath", about = "Exact relaxation paths for box-constrained maximum entropy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrackerArg {
    Local,
    Sparse,
    Uniform,
    Global,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Entropy,
    Squared,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the full relaxation path and write it as JSON.
    Path {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TrackerArg::Auto)]
        tracker: TrackerArg,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Entropy)]
        objective: ObjectiveArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve at a single relaxation value and print the solution record.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        nu: f64,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Entropy)]
        objective: ObjectiveArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the culled admissible-model table from validation counts.
    Select {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        lambda_min: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded Zipf path-complexity sweep and print a CSV report.
    Sweep {
        #[arg(long)]
        n: usize,
        /// Comma-separated sample sizes; defaults to n/4,n/2,n,2n.
        #[arg(long, value_delimiter = ',')]
        samples: Option<Vec<usize>>,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a chain of solves where each solution becomes the next prior.
    Cascade {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Input document for the cascade subcommand.
#[derive(Deserialize)]
struct ChainFile {
    u: Vec<f64>,
    #[serde(default)]
    m: Option<Vec<f64>>,
    stages: Vec<ChainStageSpec>,
}

#[derive(Deserialize)]
struct ChainStageSpec {
    q: Vec<f64>,
    nu: f64,
}

#[derive(Serialize)]
struct ChainReport {
    p: Vec<f64>,
    reconstructed: Vec<f64>,
    stages: Vec<CascadeStage>,
}

#[derive(Serialize)]
struct SolveReport {
    nu: f64,
    mu: f64,
    p: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<f64>,
    partition: Vec<i8>,
}

#[derive(Serialize)]
struct SelectionRow {
    support: usize,
    nu_star: f64,
    loss_star: f64,
    open_infimum: bool,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NonUniformPrior { .. } | Error::TrackerIncompatible(_) => 3,
        Error::ZeroPrimal { .. } => 4,
        Error::ZeroProbability { .. } => 5,
        _ => 2,
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|_| Error::InvalidPath("cannot write output file")),
        None => {
            println!("{}", text);
            Ok(())
        }
    }
}

fn read_instance(input: &PathBuf) -> Result<(InstanceFile, ProblemInstance), Error> {
    let text = std::fs::read_to_string(input)
        .map_err(|_| Error::InvalidPath("cannot read input file"))?;
    let file = InstanceFile::parse(&text)?;
    let inst = file.to_instance()?;
    Ok((file, inst))
}

fn pick_tracker(inst: &ProblemInstance, tracker: TrackerArg) -> TrackerArg {
    match tracker {
        TrackerArg::Auto => {
            if inst.has_uniform_prior() {
                TrackerArg::Uniform
            } else if 8 * inst.observed_support() <= inst.n() {
                TrackerArg::Sparse
            } else {
                TrackerArg::Local
            }
        }
        other => other,
    }
}

fn track(
    inst: &ProblemInstance,
    tracker: TrackerArg,
    objective: ObjectiveArg,
) -> Result<RelaxationPath, Error> {
    match objective {
        ObjectiveArg::Squared => match tracker {
            TrackerArg::Local | TrackerArg::Auto => relaxpath::sq_track_local(inst),
            _ => Err(Error::TrackerIncompatible(
                "the squared objective is tracked by the local kernel only",
            )),
        },
        ObjectiveArg::Entropy => match pick_tracker(inst, tracker) {
            TrackerArg::Local => track_local(inst),
            TrackerArg::Sparse => track_sparse(inst),
            TrackerArg::Uniform => track_uniform(inst),
            TrackerArg::Global => track_global(inst),
            TrackerArg::Auto => unreachable!("auto resolved by pick_tracker"),
        },
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Path { input, tracker, objective, out } => {
            let (_, inst) = read_instance(&input)?;
            let path = track(&inst, tracker, objective)?;
            emit(&out, &PathFile::from_path(&path).to_json())
        }
        Command::Solve { input, nu, objective, out } => {
            let (_, inst) = read_instance(&input)?;
            let report = match objective {
                ObjectiveArg::Entropy => {
                    let point = PrimalDualPoint::solve(&inst, nu, 1e-12)?;
                    let partition = relaxpath::SignVector::classify(
                        &inst,
                        nu,
                        point.mu,
                        1e-9 * nu.abs().max(1.0),
                    )
                    .0;
                    SolveReport {
                        nu,
                        mu: point.mu,
                        p: point.p,
                        alpha: Some(point.alpha),
                        z: Some(point.z),
                        partition,
                    }
                }
                ObjectiveArg::Squared => {
                    let path = relaxpath::sq_track_local(&inst)?;
                    let (mu, signs, _) = path.eval(nu);
                    if !(nu > 0.0) || !nu.is_finite() {
                        return Err(Error::InvalidNu(nu));
                    }
                    let p = sq_primal_from(&inst, nu, mu)?;
                    SolveReport { nu, mu, p, alpha: None, z: None, partition: signs.0 }
                }
            };
            emit(&out, &relaxpath::to_json_17(&report))
        }
        Command::Select { input, lambda_min, out } => {
            let (file, inst) = read_instance(&input)?;
            let r = ValidationCounts::new(
                file.r.ok_or(Error::InvalidPath("instance file lacks validation counts"))?,
            )?;
            let path = track_local(&inst)?;
            let rows: Vec<SelectionRow> = select_models(&inst, &path, &r, lambda_min)?
                .into_iter()
                .map(|row| SelectionRow {
                    support: row.support,
                    nu_star: row.nu_star,
                    loss_star: row.loss_star,
                    open_infimum: row.open_infimum,
                })
                .collect();
            emit(&out, &relaxpath::to_json_17(&rows))
        }
        Command::Sweep { n, samples, repeats, seed, out } => {
            let sizes = samples.unwrap_or_else(|| vec![n / 4, n / 2, n, 2 * n]);
            let rows: Vec<SweepRow> = relaxpath::zipf_sweep(n, &sizes, repeats, seed)?;
            let mut csv = format!(
                "# generator={} seed={} n={} repeats={}\nsample_size,mean_kappa,kappa_over_n\n",
                GENERATOR_ID, seed, n, repeats
            );
            for row in rows {
                csv.push_str(&format!(
                    "{},{:.16e},{:.16e}\n",
                    row.sample_size, row.mean_kappa, row.kappa_over_n
                ));
            }
            emit(&out, csv.trim_end())
        }
        Command::Cascade { input, out } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|_| Error::InvalidPath("cannot read input file"))?;
            let chain: ChainFile = serde_json::from_str(&text)
                .map_err(|_| Error::InvalidPath("malformed chain file"))?;
            let m = chain.m.unwrap_or_else(|| vec![1.0; chain.u.len()]);
            let mut prior = chain.u.clone();
            let mut stages = Vec::with_capacity(chain.stages.len());
            for spec in &chain.stages {
                let (p, stage) = cascade_step(&prior, &spec.q, &m, spec.nu)?;
                prior = p;
                stages.push(stage);
            }
            let reconstructed = cascade_eval(&chain.u, &m, &stages)?;
            let report = ChainReport { p: prior, reconstructed, stages };
            emit(&out, &relaxpath::to_json_17(&report))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err);
            ExitCode::from(exit_code_for(&err))
        }
    }
}
