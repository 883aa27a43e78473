//! `permwit`: build witnesses and states, run separability criteria and
//! sweep the `ρ_x` family.
//!
//! Exit codes: 0 when a command ran and detected nothing, 1 when `detect`
//! found entanglement, 2 on usage, I/O or validation errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use permwit_core::criteria::{full_report_with_tol, DEFAULT_TOL};
use permwit_core::io;
use permwit_core::perm::parse_permutation;
use permwit_core::states::{canonical_weights, rho_x, theorem21_state};
use permwit_core::sweep::{sweep, to_csv};
use permwit_core::witness::{
    block_positivity_sample, choi_matrix, choi_of_map, decompose_involutive,
    local_search_product_minimum, Verdict,
};
use permwit_core::{Complex64, Permutation};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "permwit",
    version,
    about = "Permutation-induced entanglement witnesses"
)]
struct Cli {
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Detection and PSD tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: f64,
    /// One-based images, e.g. "2,3,1,4".
    #[arg(long, allow_hyphen_values = true)]
    perm: String,
}

impl MapArgs {
    fn permutation(&self) -> Result<Permutation> {
        Ok(parse_permutation(&self.perm)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Choi matrix of the witness with its metadata.
    Witness(MapArgs),
    /// Build a state of one of the bound entangled families.
    #[command(subcommand)]
    State(StateCommand),
    /// Evaluate every criterion on a state; exits 1 if any fires.
    Detect {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Check the explicit decomposition for an involution.
    Decompose(MapArgs),
    /// CSV of criterion scores across the ρ_x family.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        x_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Sample product vectors against the Choi matrix of Φ for any 0 ≤ t ≤ n.
    CheckPositivity {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Local-search restarts seeded from the longest cycle; 0 disables.
        #[arg(long, default_value_t = 0)]
        restarts: usize,
    },
}

#[derive(Subcommand)]
enum StateCommand {
    /// Mixture of ω, cycle states and the cross-block state.
    Theorem21 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        perm: String,
        #[arg(
            long,
            conflicts_with = "canonical",
            required_unless_present = "canonical"
        )]
        weights: Option<PathBuf>,
        #[arg(long)]
        canonical: bool,
    },
    /// The one-parameter family ρ_x on 4⊗4.
    Rhox {
        #[arg(long)]
        x: f64,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Witness(args) => {
            let p = args.permutation()?;
            let w = choi_matrix(args.n, args.t, &p)?;
            let check = match w.verdict() {
                Verdict::Decomposable => Some(
                    decompose_involutive(args.n, args.t, &p)?.verify_with_tol(w.choi(), cli.tol)?,
                ),
                _ => None,
            };
            emit(out, &io::witness_to_json(&w, check.as_ref())?)?;
        }
        Command::State(StateCommand::Theorem21 {
            n,
            perm,
            weights,
            canonical,
        }) => {
            let p = parse_permutation(&perm)?;
            let w = match weights {
                Some(path) if !canonical => io::parse_weights(&read(&path)?, &p)?,
                _ => canonical_weights(n, &p)?,
            };
            emit(out, &io::density_to_json(&theorem21_state(n, &p, &w)?)?)?;
        }
        Command::State(StateCommand::Rhox { x }) => {
            emit(out, &io::density_to_json(&rho_x(x)?)?)?;
        }
        Command::Detect { state, witness } => {
            let rho = io::parse_density(&read(&state)?)?;
            let w = witness
                .map(|path| -> Result<_> { Ok(io::parse_witness(&read(&path)?)?) })
                .transpose()?;
            let report = full_report_with_tol(&rho, w.as_ref(), cli.tol)?;
            emit(out, &io::to_json(&report)?)?;
            if report.verdicts.any_entangled() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Decompose(args) => {
            let p = args.permutation()?;
            let w = choi_matrix(args.n, args.t, &p)?;
            let check =
                decompose_involutive(args.n, args.t, &p)?.verify_with_tol(w.choi(), cli.tol)?;
            emit(out, &io::to_json(&check)?)?;
        }
        Command::Sweep {
            x_min,
            x_max,
            steps,
            t,
        } => {
            emit(out, &to_csv(&sweep(x_min, x_max, steps, t)?))?;
        }
        Command::CheckPositivity {
            map,
            samples,
            seed,
            restarts,
        } => {
            let p = map.permutation()?;
            let n = map.n;
            if !(0.0..=n as f64).contains(&map.t) {
                anyhow::bail!("t must satisfy 0 ≤ t ≤ {n}, got t={}", map.t);
            }
            let choi = choi_of_map(n, map.t, &p)?;
            let sampled = block_positivity_sample(&choi, samples, seed)?;
            let searched = if restarts > 0 {
                let start = permwit_core::witness::uniform_on_longest_cycle(&p);
                Some(local_search_product_minimum(&choi, &start, restarts, seed)?.value)
            } else {
                None
            };
            let min = searched.map_or(sampled.value, |v| v.min(sampled.value));
            let pairs = |v: &[Complex64]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
            let report = json!({
                "n": n,
                "t": map.t,
                "perm": p.images(),
                "samples": samples,
                "seed": seed,
                "sample_min": sampled.value,
                "sample_argmin": {"a": pairs(&sampled.a), "b": pairs(&sampled.b)},
                "local_search_min": searched,
                "min_value": min,
                "block_positive": min >= -cli.tol,
            });
            emit(out, &io::to_json(&report)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
