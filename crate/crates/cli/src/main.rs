use std::ffi::OsString;
use std::fmt::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trigme::campaign::{run_campaign, CampaignConfig};
use trigme::document::{read_document, sha256_hex, StateDocument};
use trigme::error::GmeError;
use trigme::mixed::{convex_roof_upper_bound, pure_projection, witness, ConvexRoofConfig, WitnessOptions};
use trigme::report::{
    analyze, canonical_json, convex_roof_summary, emit_report, polygamy_campaign, random_state, witness_summary,
};
use trigme::state::{AnyState, DensityMatrix, PureState};
use trigme::structure::finest_factorization;
use trigme::triangle::{EdgeConvention, GmeOptions};

#[derive(Parser)]
#[command(name = "trigme", version, about = "Genuine multipartite entanglement from concurrence triangles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StateArgs {
    /// State document (JSON).
    file: PathBuf,
    /// Validation and zero-detection tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct SeedArg {
    /// Master seed; defaults to $GME_SEED, then 0.
    #[arg(long, env = "GME_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Full pure-state analysis: cut table, triangle levels, F_N, factorization.
    Analyze {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = EdgeConvention::Concurrence)]
        convention: EdgeConvention,
        #[arg(long)]
        json: bool,
    },
    /// Purification witness for a mixed state.
    Witness {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = EdgeConvention::Concurrence)]
        convention: EdgeConvention,
        #[arg(long)]
        json: bool,
    },
    /// Upper bound on the convex-roof measure by decomposition search.
    ConvexRoof {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = EdgeConvention::Concurrence)]
        convention: EdgeConvention,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        max_iterations: usize,
        /// Search only this ensemble size instead of r, r+1, r+2.
        #[arg(long)]
        ensemble_size: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        json: bool,
    },
    /// Finest factorization visible from vanishing cut concurrences.
    Classify {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        json: bool,
    },
    /// Write a Haar-random pure state document.
    Random {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Polygamy inequality slacks over Haar samples.
    CheckInequalities {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        json: bool,
    },
    /// Run the property campaign; exit 0 iff every check passes.
    Selftest {
        /// Smaller sample counts.
        #[arg(long)]
        quick: bool,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        json: bool,
    },
}

/// Failure modes mapped to exit codes.
enum Failure {
    Input(String),
    Internal(String),
}

impl From<GmeError> for Failure {
    fn from(e: GmeError) -> Self {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<std::fmt::Error> for Failure {
    fn from(e: std::fmt::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn load(args: &StateArgs) -> Result<(AnyState, String), Failure> {
    let (doc, text) = read_document(&args.file)?;
    Ok((doc.to_state(args.tol)?, sha256_hex(text.as_bytes())))
}

fn as_pure(state: AnyState, tol: f64, notices: &mut Vec<String>) -> Result<PureState, Failure> {
    match state {
        AnyState::Pure(p) => Ok(p),
        AnyState::Mixed(rho) => {
            let psi = pure_projection(&rho, tol)?;
            notices.push("rank-1 mixed input projected to its dominant eigenvector".into());
            Ok(psi)
        }
    }
}

fn as_density(state: AnyState) -> DensityMatrix {
    match state {
        AnyState::Pure(p) => p.to_density(),
        AnyState::Mixed(rho) => rho,
    }
}

fn run(cli: Cli, out: &mut String) -> Outcome {
    match cli.command {
        Command::Analyze { state, convention, json } => {
            let (s, digest) = load(&state)?;
            let mut notices = Vec::new();
            let psi = as_pure(s, state.tol, &mut notices)?;
            let report = analyze(&psi, convention, state.tol, digest, None, notices)?;
            write!(out, "{}", emit_report(&report, json))?;
        }
        Command::Witness { state, convention, json } => {
            let (s, digest) = load(&state)?;
            let rho = as_density(s);
            let reports = EdgeConvention::ALL
                .iter()
                .map(|&c| witness(&rho, &WitnessOptions { gme: GmeOptions::with_convention(c), rank_tol: state.tol }))
                .collect::<Result<Vec<_>, _>>()?;
            let summary = witness_summary(digest, rho.dims(), &reports, convention);
            if json {
                write!(out, "{}", canonical_json(&summary))?;
            } else {
                writeln!(out, "witness ({}) = {:.6}", summary.convention, summary.value)?;
                for (name, v) in &summary.value_by_convention {
                    writeln!(out, "  {name:<12} {v:.6}")?;
                }
                writeln!(out, "purification rank {}", summary.rank)?;
                if summary.pure_bypass {
                    writeln!(out, "notice: pure-state bypass (rank-1 input evaluated directly)")?;
                }
                writeln!(out, "{}", summary.verdict)?;
            }
        }
        Command::ConvexRoof { state, convention, restarts, max_iterations, ensemble_size, seed, json } => {
            let (s, digest) = load(&state)?;
            let rho = as_density(s);
            let cfg = ConvexRoofConfig {
                gme: GmeOptions::with_convention(convention),
                ensemble_sizes: ensemble_size.map(|m| vec![m]),
                restarts,
                max_iterations,
                seed: seed.seed,
                rank_tol: state.tol,
            };
            let res = convex_roof_upper_bound(&rho, &cfg)?;
            let summary = convex_roof_summary(digest, rho.dims(), &cfg, &res)?;
            if json {
                write!(out, "{}", canonical_json(&summary))?;
            } else {
                writeln!(out, "convex-roof upper bound ({}) = {:.6}", summary.convention, summary.upper_bound)?;
                writeln!(out, "spectral decomposition value {:.6}", summary.spectral_value)?;
                writeln!(out, "rank {}  ensemble size {}  restarts {}  seed {}", summary.rank, summary.ensemble_size, summary.restarts, summary.seed)?;
                for (k, m) in summary.members.iter().enumerate() {
                    writeln!(out, "  member {k}: weight {:.6}  F {:.6}", m.weight, m.f_total)?;
                }
            }
        }
        Command::Classify { state, json } => {
            let (s, _) = load(&state)?;
            let mut notices = Vec::new();
            let psi = as_pure(s, state.tol, &mut notices)?;
            let f = finest_factorization(&psi, state.tol)?;
            if json {
                write!(out, "{}", canonical_json(&f))?;
            } else {
                for n in &notices {
                    writeln!(out, "notice: {n}")?;
                }
                let blocks: Vec<String> = f.factors.iter().map(|b| b.to_string()).collect();
                writeln!(out, "factors: {}", blocks.join(" "))?;
                writeln!(out, "GME: {}", if f.is_gme { "yes" } else { "no" })?;
                for c in &f.product_cuts {
                    writeln!(out, "product cut {c}")?;
                }
                for m in &f.marginal_cuts {
                    writeln!(out, "warning: cut {} is marginal (C = {:.3e})", m.cut, m.concurrence)?;
                }
                writeln!(out, "reconstruction deviation {:.3e}", f.reconstruction_deviation)?;
            }
        }
        Command::Random { dims, seed, out: target } => {
            let psi = random_state(&dims, seed.seed)?;
            let desc = format!("Haar random pure state, dims {dims:?}, seed {}", seed.seed);
            let text = StateDocument::from_pure(&psi, Some(desc)).to_json();
            match target {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
                None => write!(out, "{text}")?,
            }
        }
        Command::CheckInequalities { dims, trials, seed, json } => {
            let s = polygamy_campaign(&dims, trials, seed.seed)?;
            if json {
                write!(out, "{}", canonical_json(&s))?;
            } else {
                writeln!(out, "dims {:?}  trials {}  seed {}", s.dims, s.trials, s.seed)?;
                writeln!(out, "  squared sums     min slack {:.3e}", s.min_squared)?;
                writeln!(out, "  linear sums      min slack {:.3e}", s.min_linear)?;
                writeln!(out, "  pair bounds      min slack {:.3e}", s.min_pair)?;
                writeln!(out, "  entropy bounds   min slack {:.3e}", s.min_entropy)?;
                writeln!(out, "violations {}", s.violations)?;
            }
            if !s.all_hold {
                return Err(Failure::Internal(format!("{} polygamy violations", s.violations)));
            }
        }
        Command::Selftest { quick, seed, json } => {
            let cfg = if quick { CampaignConfig::quick(seed.seed) } else { CampaignConfig::full(seed.seed) };
            let results = run_campaign(&cfg);
            if json {
                write!(out, "{}", canonical_json(&results))?;
            } else {
                for r in &results {
                    writeln!(out, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
                }
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(Failure::Internal(format!("{failed} of {} checks failed", results.len())));
            }
        }
    }
    Ok(())
}

/// Captured result of one invocation.
struct Execution {
    code: u8,
    stdout: String,
    stderr: String,
}

fn execute<I, T>(argv: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Execution { code: 1, stdout: String::new(), stderr: text }
            } else {
                Execution { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let mut stdout = String::new();
    let (code, stderr) = match run(cli, &mut stdout) {
        Ok(()) => (0, String::new()),
        Err(Failure::Input(msg)) => (1, format!("error: {msg}\n")),
        Err(Failure::Internal(msg)) => (2, format!("internal invariant breach: {msg}\n")),
    };
    Execution { code, stdout, stderr }
}

fn main() -> ExitCode {
    let run = execute(std::env::args_os());
    print!("{}", run.stdout);
    eprint!("{}", run.stderr);
    ExitCode::from(run.code)
}

#[cfg(test)]
mod tests {
    use super::execute;

    fn fixture(name: &str) -> String {
        format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
    }

    fn json(text: &str) -> serde_json::Value {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn ghz_report_has_unit_total() {
        let run = execute(["trigme", "analyze", &fixture("ghz4.json"), "--json"]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        assert!(run.stdout.contains("\"f_total\": 1.0"), "{}", run.stdout);
        let v = json(&run.stdout);
        assert_eq!(v["gme"], true);
        assert_eq!(v["dims"], serde_json::json!([2, 2, 2, 2]));
        assert_eq!(v["cut_concurrences"].as_array().unwrap().len(), 7);
    }

    #[test]
    fn json_report_is_stable_across_runs() {
        let args = ["trigme", "analyze", &fixture("w4.json"), "--json", "--convention", "squared"];
        let a = execute(args);
        let b = execute(args);
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(json(&a.stdout)["convention"], "squared");
    }

    #[test]
    fn product_fixture_factorizes() {
        let run = execute(["trigme", "classify", &fixture("appendix_c.json"), "--tol", "1e-3", "--json"]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        let v = json(&run.stdout);
        assert_eq!(v["is_gme"], false);
        assert_eq!(v["factors"], serde_json::json!([[1], [2], [3, 4]]));

        let run = execute(["trigme", "analyze", &fixture("appendix_c.json"), "--tol", "1e-3", "--json"]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        assert_eq!(json(&run.stdout)["f_total"], 0.0);
    }

    #[test]
    fn higher_rank_input_is_rejected_by_analyze() {
        let run = execute(["trigme", "analyze", &fixture("appendix_e.json")]);
        assert_eq!(run.code, 1);
        assert!(run.stderr.contains("rank"), "{}", run.stderr);
    }

    #[test]
    fn witness_reports_both_conventions() {
        let run = execute(["trigme", "witness", &fixture("appendix_e.json"), "--json"]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        let v = json(&run.stdout);
        assert_eq!(v["rank"], 2);
        assert_eq!(v["value_by_convention"].as_object().unwrap().len(), 2);
    }

    #[test]
    fn usage_and_help_exit_codes() {
        assert_eq!(execute(["trigme", "analyze", "x.json", "--bogus"]).code, 1);
        assert_eq!(execute(["trigme"]).code, 1);
        let help = execute(["trigme", "--help"]);
        assert_eq!(help.code, 0);
        assert!(help.stdout.contains("analyze"));
    }

    #[test]
    fn missing_and_malformed_files_are_input_errors() {
        let run = execute(["trigme", "analyze", "/nonexistent/state.json"]);
        assert_eq!(run.code, 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"dims\": [2, 2], \"data\": [[1, 0]]}").unwrap();
        let run = execute(["trigme".as_ref(), "analyze".as_ref(), path.as_os_str()]);
        assert_eq!(run.code, 1);
        assert!(run.stderr.starts_with("error:"), "{}", run.stderr);
    }

    #[test]
    fn random_is_reproducible_and_round_trips() {
        let a = execute(["trigme", "random", "--dims", "2,3,2", "--seed", "17"]);
        let b = execute(["trigme", "random", "--dims", "2,3,2", "--seed", "17"]);
        let c = execute(["trigme", "random", "--dims", "2,3,2", "--seed", "18"]);
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout, b.stdout);
        assert_ne!(a.stdout, c.stdout);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let w = execute(["trigme", "random", "--dims", "2,3,2", "--seed", "17", "--out", path.to_str().unwrap()]);
        assert_eq!(w.code, 0);
        assert!(w.stdout.is_empty());
        assert_eq!(std::fs::read_to_string(&path).unwrap(), a.stdout);
        assert_eq!(execute(["trigme", "analyze", path.to_str().unwrap()]).code, 0);
    }

    #[test]
    fn seed_falls_back_to_environment() {
        std::env::set_var("GME_SEED", "17");
        let from_env = execute(["trigme", "random", "--dims", "2,2,2,2"]);
        std::env::remove_var("GME_SEED");
        let explicit = execute(["trigme", "random", "--dims", "2,2,2,2", "--seed", "17"]);
        assert_eq!(from_env.stdout, explicit.stdout);
    }

    #[test]
    fn inequality_campaign_holds() {
        let run = execute(["trigme", "check-inequalities", "--dims", "2,2,3", "--trials", "20", "--seed", "3", "--json"]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        assert_eq!(json(&run.stdout)["violations"], 0);
    }

    #[test]
    fn convex_roof_of_pure_input_is_its_measure() {
        let run = execute([
            "trigme", "convex-roof", &fixture("ghz4.json"), "--restarts", "2", "--max-iterations", "50", "--seed", "1", "--json",
        ]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        let v = json(&run.stdout);
        assert!((v["upper_bound"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
}
