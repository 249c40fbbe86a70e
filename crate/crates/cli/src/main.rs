use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use ellbloch::bloch::{bloch_relation_value, delta_beta, edilog, edilog_sum};
use ellbloch::dilog::bloch_wigner;
use ellbloch::efield::FunctionJson;
use ellbloch::reduction::certificate::CertificateJson;
use ellbloch::reduction::decompose::DecompositionJson;
use ellbloch::reduction::{decompose_certificate, reduce_with_stats, verify_certificate, Budget, ReductionCertificate};
use ellbloch::{EllipticFunction, Error, Lattice, ProjValue};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "ellbloch", version, about = "Elliptic dilogarithm, Bloch relations and degree reduction")]
struct Cli {
    /// Point-equality tolerance on the torus.
    #[arg(long, global = true, default_value_t = 1e-8)]
    eps: f64,
    /// Bound for analytic (dilogarithm-valued) checks.
    #[arg(long = "tol-analytic", global = true, default_value_t = 1e-6)]
    tol_analytic: f64,
    /// Seed for random functions and for the constants of the reduction.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bloch-Wigner dilogarithm D(z).
    Dilog {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex64,
    },
    /// Elliptic dilogarithm D_tau(xi).
    Edilog {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        xi: Complex64,
    },
    /// Elliptic functions in divisor form.
    #[command(subcommand)]
    Fn(FnCommand),
    /// Elliptic Bloch relations.
    #[command(subcommand)]
    Bloch(BlochCommand),
    /// Reduce [f] to generators of degree at most 3 and write a certificate.
    Reduce {
        #[command(flatten)]
        io: InOut,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Reduction certificates.
    #[command(subcommand)]
    Cert(CertCommand),
}

#[derive(Subcommand)]
enum FnCommand {
    /// A random function of the given degree.
    Random {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        #[arg(long)]
        degree: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate at a point; prints [re, im] or "inf".
    Eval {
        #[arg(short = 'f', long = "function")]
        function: PathBuf,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex64,
    },
    /// The function 1 - f.
    OneMinus {
        #[command(flatten)]
        io: InOut,
    },
}

#[derive(Subcommand)]
enum BlochCommand {
    /// Check the elliptic Bloch relation of f.
    Verify {
        #[arg(short = 'f', long = "function")]
        function: PathBuf,
        /// Write the residual report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Rewrite the Bloch relation of f through degree-3 relations.
    Decompose {
        #[command(flatten)]
        io: InOut,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Subcommand)]
enum CertCommand {
    /// Check a certificate from its own data.
    Verify {
        #[arg(short = 'c', long = "certificate")]
        certificate: PathBuf,
    },
}

#[derive(Args)]
struct InOut {
    #[arg(short = 'f', long = "function")]
    function: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 12)]
    max_depth: usize,
    #[arg(long, default_value_t = 8)]
    max_retries: usize,
    #[arg(long, default_value_t = 8)]
    max_degree: usize,
}

/// Failure classes, one per exit code.
enum Failure {
    Input(String),
    Numerical(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Format(_) => Failure::Input(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got {s:?}"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("{re:?}: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("{im:?}: {e}"))?;
    Ok(Complex64::new(re, im))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Numerical(e.to_string()))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn lattice(tau: Complex64, eps: f64) -> Result<Arc<Lattice>, Failure> {
    Ok(Arc::new(Lattice::with_eps(tau, eps)?))
}

fn load_function(path: &Path, eps: f64) -> Result<EllipticFunction, Failure> {
    let doc: FunctionJson = read_json(path)?;
    let l = lattice(Complex64::new(doc.tau[0], doc.tau[1]), eps)?;
    Ok(EllipticFunction::from_json(&doc, l)?)
}

impl BudgetArgs {
    fn budget(&self, seed: u64) -> Budget {
        Budget { max_depth: self.max_depth, max_retries: self.max_retries, max_degree: self.max_degree, seed }
    }
}

#[derive(Serialize)]
struct BlochReport {
    degree: usize,
    /// Sum over zeros, fiber over 1 and poles.
    value: f64,
    /// The same relation through the collected element of Z[E]^-.
    zeminus_value: f64,
    zeminus_terms: usize,
    formal_zero: bool,
    residual: f64,
    passed: bool,
}

fn run(cli: Cli) -> Outcome {
    let eps = cli.eps;
    match cli.command {
        Command::Dilog { z } => println!("{:?}", bloch_wigner(z)?),
        Command::Edilog { tau, xi } => {
            let l = lattice(tau, eps)?;
            println!("{:?}", edilog(&l, &l.point(xi)));
        }
        Command::Fn(FnCommand::Random { tau, degree, output }) => {
            let f = EllipticFunction::random(lattice(tau, eps)?, degree, cli.seed)?;
            write_json(output.as_deref(), &f.to_json())?;
        }
        Command::Fn(FnCommand::Eval { function, z }) => {
            let f = load_function(&function, eps)?;
            match f.evaluate(z) {
                ProjValue::Finite(v) => println!("[{:?}, {:?}]", v.re, v.im),
                ProjValue::Infinity => println!("\"inf\""),
            }
        }
        Command::Fn(FnCommand::OneMinus { io }) => {
            let f = load_function(&io.function, eps)?;
            write_json(io.output.as_deref(), &f.one_minus()?.to_json())?;
        }
        Command::Bloch(BlochCommand::Verify { function, report }) => {
            let f = load_function(&function, eps)?;
            let value = bloch_relation_value(&f)?;
            let s = delta_beta(&f)?;
            let zeminus_value = edilog_sum(&s);
            let residual = value.abs().max(zeminus_value.abs());
            let r = BlochReport {
                degree: f.degree(),
                value,
                zeminus_value,
                zeminus_terms: s.len(),
                formal_zero: s.is_zero(),
                residual,
                passed: residual < cli.tol_analytic,
            };
            println!("residual {residual:e}{}", if r.formal_zero { " (formal zero)" } else { "" });
            if report.is_some() {
                write_json(report.as_deref(), &r)?;
            }
            if !r.passed {
                return Err(Failure::Verification(format!("residual {residual:e} above {:e}", cli.tol_analytic)));
            }
        }
        Command::Bloch(BlochCommand::Decompose { io, budget }) => {
            let f = load_function(&io.function, eps)?;
            let (cert, _) = reduce_with_stats(&f, budget.budget(cli.seed))?;
            let (instances, report) = decompose_certificate(&cert, cli.tol_analytic)?;
            let tau = f.lattice().tau();
            let doc = DecompositionJson {
                tau: [tau.re, tau.im],
                instances: instances.iter().map(|i| i.to_json()).collect(),
                report: report.clone(),
            };
            write_json(io.output.as_deref(), &doc)?;
            eprintln!("{} degree-3 relations, analytic difference {:e}", instances.len(), report.analytic_residual);
            if !report.passed() {
                return Err(Failure::Verification(format!("decomposition checks failed: {report:?}")));
            }
        }
        Command::Reduce { io, budget } => {
            let f = load_function(&io.function, eps)?;
            let (cert, stats) = reduce_with_stats(&f, budget.budget(cli.seed))?;
            write_json(io.output.as_deref(), &cert.to_json())?;
            eprintln!(
                "{} steps ({} generic, {} special, {} constant detours), {} terminals",
                cert.steps.len(),
                stats.generic_steps,
                stats.special_steps,
                stats.detours - stats.failed_detours,
                cert.terminals.terms().len()
            );
        }
        Command::Cert(CertCommand::Verify { certificate }) => {
            let doc: CertificateJson = read_json(&certificate)?;
            let cert = ReductionCertificate::from_json(&doc, eps)?;
            let report = verify_certificate(&cert, cli.tol_analytic);
            write_json(None, &report)?;
            if !report.passed() {
                return Err(Failure::Verification("certificate does not verify".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(4)
        }
    }
}
