mod config;
mod lang;

use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kh_riesz::aumann::comparison_simple;
use kh_riesz::kh::{counterexample_unboundedness, kh_integrate, CertifyOptions, ModulusGauge};
use kh_riesz::setvalued::{phi_interval_oracle, PhiEvaluator, PhiOptions};
use kh_riesz::suites::run_suite;
use kh_riesz::Error;
use serde::Serialize;
use serde_json::{json, Value};

use config::{Overrides, RunConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_NOT_INTEGRABLE: u8 = 2;
const EXIT_UNBOUNDED: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "khr",
    version,
    about = "Gauge integrals in Riesz spaces, with set-valued and Aumann integrals"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Comma-separated index maps, e.g. `const:1..8,id,affine:2:0,exp`
    #[arg(long, global = true, value_name = "LIST")]
    probes: Option<String>,
    /// Write the JSON report here
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print the JSON report on stdout instead of a summary
    #[arg(long, global = true)]
    json: bool,
    /// Randomized partitions per check
    #[arg(long, global = true, value_name = "N")]
    samples: Option<usize>,
    /// Run on one thread
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify the integral of a single-valued function
    Integrate {
        #[arg(long = "f", value_name = "INTEGRAND")]
        f: String,
        #[arg(long, default_value = "[0,1]", value_name = "SET")]
        on: String,
    },
    /// Oracle interval of the (*)-integral, with optional membership test
    Phi {
        #[arg(long = "F", value_name = "MULTIFUNCTION")]
        multifunction: String,
        #[arg(long, default_value = "[0,1]", value_name = "SET")]
        on: String,
        #[arg(long, value_name = "VALUE")]
        member: Option<String>,
    },
    /// Sum formula, Aumann hull and (*)-integral of a simple multifunction
    Compare {
        #[arg(long = "F", value_name = "MULTIFUNCTION")]
        multifunction: String,
        #[arg(long, default_value = "[0,1]", value_name = "SET")]
        on: String,
    },
    /// Run a property suite
    Suite {
        /// lattice, measure, integral, setvalued, aumann, counterexample or all
        name: String,
    },
    /// Riemann sums of the c00 spike function over forced partitions
    Counterexample {
        #[arg(long, default_value_t = 20, value_name = "N")]
        n_max: usize,
    },
}

/// What a command produced: a report and the exit status it implies.
struct Outcome {
    report: Value,
    summary: Vec<(bool, String)>,
    code: u8,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn usage<T>(r: Result<T, String>) -> Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let over = Overrides {
        seed: cli.common.seed,
        probes: cli.common.probes.clone(),
        samples: cli.common.samples,
        sequential: cli.common.sequential,
    };
    let cfg = usage(RunConfig::load(cli.common.config.as_deref(), &over))?;
    let certify = CertifyOptions {
        samples: cfg.samples,
        seed: cfg.seed,
        max_depth: cfg.max_depth,
        exec: cfg.exec,
    };
    let phi_opts = PhiOptions {
        samples: cfg.samples,
        seed: cfg.seed,
        max_level: cfg.max_level,
        max_depth: cfg.max_depth,
        exec: cfg.exec,
    };
    match &cli.command {
        Command::Integrate { f, on } => {
            let integrand =
                usage(lang::parse_integrand(f, &cfg.space).map_err(|e| format!("--f: {e}")))?;
            let set = usage(lang::parse_set(on).map_err(|e| format!("--on: {e}")))?;
            let cert = kh_integrate(
                &integrand,
                &set,
                &cfg.spec,
                &cfg.regulator,
                &cfg.probes,
                &ModulusGauge::default(),
                &certify,
            )?;
            let summary = vec![
                (true, format!("certified: ∫ {f} over {on} = {}", cert.value)),
                (
                    true,
                    format!(
                        "probes: {}, all deviations within their envelopes",
                        cert.probes.len()
                    ),
                ),
            ];
            Ok(Outcome {
                report: json!({
                    "command": "integrate",
                    "seed": cfg.seed,
                    "integrand": f,
                    "set": to_json(&set),
                    "certificate": to_json(&cert),
                }),
                summary,
                code: 0,
            })
        }
        Command::Phi {
            multifunction,
            on,
            member,
        } => {
            let f = usage(
                lang::parse_multifunction(multifunction, &cfg.space)
                    .map_err(|e| format!("--F: {e}")),
            )?;
            let set = usage(lang::parse_set(on).map_err(|e| format!("--on: {e}")))?;
            let point = match member {
                Some(z) => Some(usage(
                    lang::parse_value(z, &cfg.space).map_err(|e| format!("--member: {e}")),
                )?),
                None => None,
            };
            let eval = PhiEvaluator::new(&f, &set, &cfg.spec, &phi_opts)?;
            let oracle = phi_interval_oracle(&f, &set, &cfg.spec, &cfg.regulator, &cfg.probes)?;
            let mut summary = vec![(true, format!("oracle: {oracle}"))];
            let mut report = json!({
                "command": "phi",
                "seed": cfg.seed,
                "multifunction": multifunction,
                "set": to_json(&set),
                "oracle": to_json(&oracle),
            });
            if let Some(z) = point {
                let inside = eval.contains(&z, &cfg.regulator, &cfg.probes)?;
                let verdict = if inside { "member" } else { "non-member" };
                summary.push((true, format!("{z}: {verdict}")));
                report["membership"] = json!({ "point": to_json(&z), "verdict": verdict });
            }
            Ok(Outcome {
                report,
                summary,
                code: 0,
            })
        }
        Command::Compare { multifunction, on } => {
            let f = usage(
                lang::parse_multifunction(multifunction, &cfg.space)
                    .map_err(|e| format!("--F: {e}")),
            )?;
            let set = usage(lang::parse_set(on).map_err(|e| format!("--on: {e}")))?;
            let rep =
                comparison_simple(&f, &set, &cfg.spec, &cfg.regulator, &cfg.probes, &phi_opts)?;
            let ok = rep.passed() && rep.max_discrepancy <= cfg.agreement;
            let members = rep.membership_checks.iter().filter(|c| c.member).count();
            let summary = vec![
                (true, format!("sum formula:  {}", rep.sum_formula)),
                (true, format!("aumann hull:  {}", rep.aumann_hull)),
                (true, format!("phi oracle:   {}", rep.phi_oracle)),
                (
                    rep.max_discrepancy <= cfg.agreement,
                    format!(
                        "max discrepancy {:e} (allowed {:e})",
                        rep.max_discrepancy, cfg.agreement
                    ),
                ),
                (
                    members == rep.membership_checks.len(),
                    format!(
                        "{members}/{} aumann points accepted",
                        rep.membership_checks.len()
                    ),
                ),
            ];
            Ok(Outcome {
                report: json!({
                    "command": "compare",
                    "seed": cfg.seed,
                    "multifunction": multifunction,
                    "set": to_json(&set),
                    "passed": ok,
                    "report": to_json(&rep),
                }),
                summary,
                code: if ok { 0 } else { EXIT_CHECK_FAILED },
            })
        }
        Command::Suite { name } => {
            let rep = match run_suite(name, &cfg.suite()) {
                Err(Error::UnknownSuite(n)) => {
                    return Err(Failure::Usage(format!("suite: no suite named {n:?}")))
                }
                r => r?,
            };
            let summary = rep
                .properties
                .iter()
                .map(|p| {
                    let tag = if p.asserted { "" } else { " (observed)" };
                    (
                        p.passed || !p.asserted,
                        format!(
                            "{}/{}{tag}: {} trials, worst slack {:e}{}",
                            p.suite,
                            p.property,
                            p.trials,
                            p.worst_slack,
                            p.error
                                .as_deref()
                                .map(|e| format!(", error: {e}"))
                                .unwrap_or_default()
                        ),
                    )
                })
                .collect();
            Ok(Outcome {
                report: json!({ "command": "suite", "seed": cfg.seed, "report": to_json(&rep) }),
                summary,
                code: if rep.passed { 0 } else { EXIT_CHECK_FAILED },
            })
        }
        Command::Counterexample { n_max } => {
            if *n_max < 2 {
                return Err(Failure::Usage("--n-max: must be at least 2".into()));
            }
            let rep = counterexample_unboundedness(*n_max)?;
            let mut summary: Vec<(bool, String)> = rep
                .rows
                .iter()
                .map(|r| {
                    (
                        r.lower_bound_holds,
                        format!(
                            "n = {:>3}: λ = {:.3e}, largest support index {}",
                            r.n, r.lambda, r.max_support_index
                        ),
                    )
                })
                .collect();
            summary.push((rep.unbounded, format!("verdict: {}", rep.verdict)));
            Ok(Outcome {
                report: json!({ "command": "counterexample", "report": to_json(&rep) }),
                summary,
                code: if rep.unbounded { 0 } else { EXIT_CHECK_FAILED },
            })
        }
    }
}

fn color_enabled() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stdout().is_terminal()
}

fn print_summary(lines: &[(bool, String)]) {
    let color = color_enabled();
    let mut out = std::io::stdout().lock();
    for (ok, line) in lines {
        let mark = match (color, ok) {
            (true, true) => "\x1b[32m✓\x1b[0m",
            (true, false) => "\x1b[31m✗\x1b[0m",
            (false, true) => "ok  ",
            (false, false) => "FAIL",
        };
        let _ = writeln!(out, "{mark} {line}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.report).expect("json") + "\n";
            if let Some(path) = &cli.common.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: --out: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_USAGE);
                }
            }
            if cli.common.json {
                print!("{text}");
            } else {
                print_summary(&outcome.summary);
            }
            ExitCode::from(outcome.code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::NotCertifiable(_) => EXIT_NOT_INTEGRABLE,
                Error::UnboundedMultifunction => EXIT_UNBOUNDED,
                _ => EXIT_USAGE,
            })
        }
    }
}
