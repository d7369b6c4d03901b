//! File formats and the `locsep` command driver.
//!
//! Exit codes: 0 success (reachable, accepted, no violations), 1 I/O or
//! parse error, 2 usage error, 3 unreachable, 4 certify on a reachable
//! pair, 5 certificate rejected, 6 fuzz violations.

pub mod certfile;
pub mod error;
pub mod netfile;
pub mod polyfile;
pub mod witness;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use locsep::harness::{crosscheck, NetGenSpec};
use locsep::set2set::compile_query;
use locsep::{check_certificate, construct_biseparator, reachable, specialize, CertifyError, Direction, Marking, ReachVerdict, Verdict};

use crate::certfile::CertificateFile;
use crate::netfile::{net_hash, parse_net, serialize_net, NetFile};
use crate::polyfile::parse_polytope;
use crate::witness::witness_json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNREACHABLE: i32 = 3;
pub const EXIT_REACHABLE_INPUT: i32 = 4;
pub const EXIT_REJECT: i32 = 5;
pub const EXIT_VIOLATIONS: i32 = 6;

#[derive(Parser, Debug)]
#[command(name = "locsep", version, about = "Reachability and unreachability certificates for continuous Petri nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Dir {
    Fwd,
    Bwd,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether marking TGT is reachable from SRC.
    Decide {
        net: PathBuf,
        src: String,
        tgt: String,
        /// Write the reachability witness here.
        #[arg(short = 'w', long)]
        witness: Option<PathBuf>,
    },
    /// Write an unreachability certificate.
    Certify {
        net: PathBuf,
        src: String,
        tgt: String,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Check a certificate against a net.
    Check {
        net: PathBuf,
        cert: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the one-sided separator of a certificate.
    Separate {
        cert: PathBuf,
        #[arg(long, value_enum)]
        direction: Dir,
    },
    /// Compile a polytope-to-polytope query into a marking query.
    #[command(name = "compile-set2set")]
    CompileSet2Set {
        net: PathBuf,
        a: PathBuf,
        b: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Cross-check random instances.
    Fuzz {
        /// Bounds `PLACES,TRANSITIONS,WEIGHT,DENOMINATOR`.
        #[arg(long, value_parser = parse_spec)]
        spec: [u64; 4],
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        json: bool,
    },
}

fn parse_spec(s: &str) -> Result<[u64; 4], String> {
    let parts: Vec<u64> = s
        .split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let parts: [u64; 4] = parts.try_into().map_err(|_| "expected four comma-separated bounds".to_string())?;
    if parts.contains(&0) {
        return Err("bounds must be at least 1".into());
    }
    Ok(parts)
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| fail(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn load_net(path: &Path) -> Result<NetFile, Failure> {
    parse_net(&read(path)?).map_err(|e| fail(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn marking<'a>(file: &'a NetFile, name: &str) -> Result<&'a Marking, Failure> {
    file.marking(name)
        .ok_or_else(|| fail(EXIT_ERROR, format!("no marking named `{name}`")))
}

fn load_cert(path: &Path) -> Result<CertificateFile, Failure> {
    CertificateFile::parse(&read(path)?).map_err(|e| fail(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| fail(EXIT_ERROR, e.to_string());
    match command {
        Command::Decide { net, src, tgt, witness } => {
            let file = load_net(&net)?;
            match reachable(&file.net, marking(&file, &src)?, marking(&file, &tgt)?) {
                ReachVerdict::Reachable(w) => {
                    writeln!(out, "reachable").map_err(io)?;
                    if let Some(path) = witness {
                        write(&path, &witness_json(&file.net, &w))?;
                    }
                    Ok(EXIT_OK)
                }
                ReachVerdict::Unreachable { .. } => {
                    writeln!(out, "unreachable").map_err(io)?;
                    Ok(EXIT_UNREACHABLE)
                }
            }
        }
        Command::Certify { net, src, tgt, output } => {
            let file = load_net(&net)?;
            let all = file.net.all_transitions();
            match construct_biseparator(&file.net, &all, marking(&file, &src)?, marking(&file, &tgt)?) {
                Ok(cert) => {
                    write(&output, &CertificateFile::from_certificate(&file.net, &cert).to_json())?;
                    writeln!(err, "wrote {} clauses to {}", cert.formula.clauses().len(), output.display()).map_err(io)?;
                    Ok(EXIT_OK)
                }
                Err(CertifyError::ReachableInput) => {
                    writeln!(out, "reachable").map_err(io)?;
                    Ok(EXIT_REACHABLE_INPUT)
                }
                Err(e) => Err(fail(EXIT_ERROR, e.to_string())),
            }
        }
        Command::Check { net, cert, jobs } => {
            let file = load_net(&net)?;
            let stored = load_cert(&cert)?;
            if stored.net_sha256 != net_hash(&file.net) {
                writeln!(out, "reject: certificate is for a different net").map_err(io)?;
                return Ok(EXIT_REJECT);
            }
            let resolved = match stored.resolve(&file.net) {
                Ok(c) => c,
                Err(e) => {
                    writeln!(out, "reject: {e}").map_err(io)?;
                    return Ok(EXIT_REJECT);
                }
            };
            let report = check_certificate(&file.net, &resolved, jobs.max(1));
            for w in &report.warnings {
                writeln!(err, "warning: {w}").map_err(io)?;
            }
            match report.verdict {
                Verdict::Accept => {
                    writeln!(out, "accept").map_err(io)?;
                    Ok(EXIT_OK)
                }
                Verdict::Reject(reason) => {
                    writeln!(out, "reject: {}", reason.describe(&file.net)).map_err(io)?;
                    Ok(EXIT_REJECT)
                }
            }
        }
        Command::Separate { cert, direction } => {
            let stored = load_cert(&cert)?;
            let (endpoint, dir) = match direction {
                Dir::Fwd => (&stored.source, Direction::Fwd),
                Dir::Bwd => (&stored.target, Direction::Bwd),
            };
            let f = specialize(&stored.formula, endpoint, dir).simplify();
            writeln!(out, "{}", f.display(&stored.places)).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::CompileSet2Set { net, a, b, output } => {
            let file = load_net(&net)?;
            let places = file.net.places();
            let poly = |path: &Path| {
                parse_polytope(&read(path)?, places).map_err(|e| fail(EXIT_ERROR, format!("{}: {e}", path.display())))
            };
            let query = compile_query(&file.net, &poly(&a)?, &poly(&b)?).map_err(|e| fail(EXIT_ERROR, e.to_string()))?;
            let markings = [("source".to_string(), query.source), ("target".to_string(), query.target)];
            write(&output, &serialize_net(&query.net, &markings))?;
            Ok(EXIT_OK)
        }
        Command::Fuzz {
            spec,
            count,
            seed,
            jobs,
            json,
        } => {
            let [p, t, w, d] = spec;
            let gen = NetGenSpec::new(p as usize, t as usize, w, d as i64, seed);
            let run = || crosscheck(&gen, count);
            let report = match jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| fail(EXIT_ERROR, e.to_string()))?
                    .install(run),
                None => run(),
            };
            let text = if json { report.to_json() } else { report.to_text() };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(if report.is_clean() { EXIT_OK } else { EXIT_VIOLATIONS })
        }
    }
}

/// Runs `locsep` with `argv` (program name first), writing to the given
/// streams, and returns the exit code.
pub fn run_command_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_command_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
