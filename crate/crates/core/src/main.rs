use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rta_core::adversary::{self, build_sequence, default_alpha, default_epsilon, run_adversary};
use rta_core::engine::AlgorithmKind;
use rta_core::error::Error;
use rta_core::instance::Instance;
use rta_core::math::verify::{verify_boundary_conditions, DEFAULT_GRID_STEP};
use rta_core::math::{ratio, CONSTANTS};
use rta_core::opt::{check_certificate, exact_opt, DEFAULT_NODE_BUDGET};
use rta_core::report::{
    self, csv_row, run_instance, transcript_from_jsonl, transcript_to_jsonl, CSV_HEADER,
    DEFAULT_SLACK,
};

#[derive(Parser)]
#[command(name = "rta", version, about = "Online proportional multiple knapsack toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an algorithm over an instance file.
    Run {
        #[arg(long, default_value = "rta")]
        alg: AlgorithmKind,
        #[arg(long)]
        instance: PathBuf,
        /// Write the decision transcript (JSON lines) here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Slack constant C for the end-of-run checks (bound minus C/n).
        #[arg(long, default_value_t = DEFAULT_SLACK)]
        slack: f64,
    },
    /// Re-run a stored transcript and rebuild its report.
    Replay {
        #[arg(long, default_value = "rta")]
        alg: AlgorithmKind,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SLACK)]
        slack: f64,
    },
    /// Play the phase adversary against an algorithm.
    Duel {
        #[arg(long, default_value = "rta")]
        alg: AlgorithmKind,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        seq: SeqArgs,
        /// Run this many independent copies and confirm they agree.
        #[arg(long, default_value_t = 1)]
        repeat: usize,
    },
    /// Write a generated instance.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Exact offline optimum of an instance.
    Opt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Grid-check the closed-form identities and inequalities.
    VerifyMath {
        #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
        grid_step: f64,
        /// Print the reports as a JSON array.
        #[arg(long)]
        json: bool,
    },
    /// Duel ratios over several bin counts, as CSV.
    Sweep {
        #[arg(long, default_value = "rta")]
        alg: AlgorithmKind,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        n_list: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct SeqArgs {
    /// Phase offset: a number, `paper` for 1/(8n), or `zero`.
    #[arg(long, default_value = "paper")]
    alpha: String,
    /// Perturbation; defaults to 1/(64 n^2).
    #[arg(long)]
    epsilon: Option<f64>,
}

impl SeqArgs {
    fn resolve(&self, n: usize) -> Result<(f64, f64), Error> {
        let alpha = match self.alpha.as_str() {
            "paper" => default_alpha(n),
            "zero" => 0.0,
            other => other
                .parse()
                .map_err(|_| Error::Usage(format!("--alpha: cannot parse `{other}`")))?,
        };
        Ok((alpha, self.epsilon.unwrap_or_else(|| default_epsilon(n))))
    }
}

#[derive(Subcommand)]
enum GenKind {
    /// The adaptive phase adversary's stream against a given algorithm.
    Adversary {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "rta")]
        against: AlgorithmKind,
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// n items of size 1/2 + epsilon, then n items of size 1.
    GreedyTrap {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.001)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random stream.
    Fuzz {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        length: usize,
        /// Weights of the small, medium and large bands.
        #[arg(long, value_delimiter = ',', default_value = "1,1,1")]
        mix: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Outcome of a subcommand that ran to completion.
enum Status {
    Ok,
    CheckFailed,
}

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn duel_once(alg: AlgorithmKind, n: usize, seq: &adversary::AdversarySequence)
    -> Result<(adversary::AdversaryTranscript, rta_core::Snapshot), Error> {
    let mut a = alg.build(n)?;
    let t = run_adversary(seq, a.as_mut())?;
    Ok((t, a.snapshot()))
}

fn execute(cmd: Cmd) -> Result<Status, Error> {
    match cmd {
        Cmd::Run {
            alg,
            instance,
            transcript,
            report,
            slack,
        } => {
            let inst = Instance::load(&instance)?;
            let (outcome, rep) = run_instance(alg, &inst, slack)?;
            if let Some(t) = transcript {
                write_or_print(Some(&t), &transcript_to_jsonl(&outcome.records))?;
            }
            write_or_print(report.as_ref(), &pretty(&rep))?;
            Ok(if rep.ok() { Status::Ok } else { Status::CheckFailed })
        }
        Cmd::Replay {
            alg,
            instance,
            transcript,
            report,
            slack,
        } => {
            let inst = Instance::load(&instance)?;
            let stored = transcript_from_jsonl(&read(&transcript)?)?;
            match report::replay(alg, &inst, &stored, slack) {
                Ok(rep) => {
                    write_or_print(report.as_ref(), &pretty(&rep))?;
                    Ok(if rep.ok() { Status::Ok } else { Status::CheckFailed })
                }
                Err(e @ Error::Transcript { .. }) => {
                    eprintln!("{e}");
                    Ok(Status::CheckFailed)
                }
                Err(e) => Err(e),
            }
        }
        Cmd::Duel { alg, n, seq, repeat } => {
            if repeat == 0 {
                return Err(Error::Usage("--repeat must be at least 1".into()));
            }
            let (alpha, epsilon) = seq.resolve(n)?;
            let sequence = build_sequence(n, alpha, epsilon)?;
            let runs: Vec<_> = std::thread::scope(|s| {
                let handles: Vec<_> = (0..repeat)
                    .map(|_| s.spawn(|| duel_once(alg, n, &sequence)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("duel thread")).collect()
            });
            let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
            let (t, _) = &runs[0];
            let identical = runs.iter().all(|(other, _)| other == t);
            let (u, u_j) = sequence.theoretical_u();
            let within = t.ratio <= u + 1e-12;
            println!(
                "{}",
                pretty(&json!({
                    "alg": alg.id(),
                    "n": n,
                    "alpha": alpha,
                    "epsilon": epsilon,
                    "accepting_phases": t.j,
                    "det_gain": t.det_gain,
                    "opt_value": t.opt_value,
                    "ratio": t.ratio,
                    "theoretical_u": u,
                    "theoretical_u_argmax": u_j,
                    "ratio_bound": ratio() - 1.0 / (52.0 * n as f64),
                    "repeats": repeat,
                    "identical": identical,
                }))
                .trim_end()
            );
            Ok(if within && identical { Status::Ok } else { Status::CheckFailed })
        }
        Cmd::Gen { kind } => {
            let (inst, out) = match kind {
                GenKind::Adversary { n, against, seq, out } => {
                    let (alpha, epsilon) = seq.resolve(n)?;
                    let sequence = build_sequence(n, alpha, epsilon)?;
                    let (t, _) = duel_once(against, n, &sequence)?;
                    (t.to_instance(against.id()), out)
                }
                GenKind::GreedyTrap { n, epsilon, out } => (adversary::greedy_trap(n, epsilon)?, out),
                GenKind::Fuzz {
                    n,
                    length,
                    mix,
                    seed,
                    out,
                } => {
                    let mix: [f64; 3] = mix
                        .try_into()
                        .map_err(|_| Error::Usage("--mix takes three weights".into()))?;
                    (adversary::fuzz_instance(n, length, mix, seed)?, out)
                }
            };
            write_or_print(out.as_ref(), &(inst.to_json() + "\n"))?;
            Ok(Status::Ok)
        }
        Cmd::Opt { instance, budget } => {
            let inst = Instance::load(&instance)?;
            let r = exact_opt(&inst.items, inst.n, Some(budget))?;
            let certificate_ok = match inst.opt_certificate {
                Some(c) => Some(check_certificate(&inst.items, inst.n, c, None)?),
                None => None,
            };
            println!(
                "{}",
                pretty(&json!({
                    "value": r.value,
                    "assignment": r.assignment,
                    "exact": r.exact,
                    "certificate_ok": certificate_ok,
                }))
                .trim_end()
            );
            Ok(if certificate_ok == Some(false) { Status::CheckFailed } else { Status::Ok })
        }
        Cmd::VerifyMath { grid_step, json } => {
            let reports = verify_boundary_conditions(grid_step)?;
            if json {
                print!("{}", pretty(&json!({ "constants": *CONSTANTS, "reports": reports })));
            } else {
                let c = *CONSTANTS;
                println!("R = {:.10}  xi_c = {:.10}  phi = {:.10}", c.ratio, c.xi_c, c.phi);
                for r in &reports {
                    println!(
                        "{} {:<48} margin {:>+.3e}{}",
                        if r.pass { "PASS" } else { "FAIL" },
                        r.property_id,
                        r.min_margin,
                        r.min_value.map(|v| format!("  value {v:.6}")).unwrap_or_default()
                    );
                }
            }
            Ok(if reports.iter().all(|r| r.pass) { Status::Ok } else { Status::CheckFailed })
        }
        Cmd::Sweep { alg, n_list, out } => {
            let mut rows = std::thread::scope(|s| {
                let handles: Vec<_> = n_list
                    .iter()
                    .map(|&n| {
                        s.spawn(move || -> Result<(usize, String), Error> {
                            let sequence = build_sequence(n, default_alpha(n), default_epsilon(n))?;
                            let (t, snap) = duel_once(alg, n, &sequence)?;
                            Ok((n, csv_row(alg.id(), &snap, t.opt_value)))
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("sweep thread"))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            rows.sort_by_key(|(n, _)| *n);
            let mut text = String::from(CSV_HEADER) + "\n";
            for (_, row) in rows {
                text += &row;
                text += "\n";
            }
            write_or_print(out.as_ref(), &text)?;
            Ok(Status::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.cmd) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
