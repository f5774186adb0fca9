mod artifact;

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use greenwalks::analysis::{asymptotic_fit, polya_estimate};
use greenwalks::guess::{certify_candidate, guess_rec, guess_theta_ode, GuessConfig, GuessReport, Objective};
use greenwalks::lattice::{mc_return_probability, LatticeSpec};
use greenwalks::pfinite::{
    rec_to_theta_ode, rec_to_theta_ode_exact, rec_verify_padded, theta_d_convert, theta_ode_to_rec,
    ConvertDirection, Operator, OperatorJson,
};
use greenwalks::pipeline::{manifest_row, polya_terms, reproduce_row, table1_manifest, RowOutcome};
use greenwalks::termgen::{generate, Method, TermCache};
use greenwalks::terms::{Normalization, TermTable};
use serde_json::{json, Value};

use artifact::{emit, input_hash, meta_path, sha256_hex, write_atomic};

#[derive(Parser)]
#[command(name = "greenwalks", version, about = "Return walks on multi-headed lattices")]
struct Cli {
    /// Term-table cache root.
    #[arg(long, global = true, env = "GREENWALKS_CACHE")]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct LatticeArgs {
    /// Coordinates changed per step.
    #[arg(long = "M")]
    m: usize,
    /// Dimension.
    #[arg(long = "N")]
    n: usize,
}

impl LatticeArgs {
    fn spec(&self) -> Result<LatticeSpec, Failure> {
        LatticeSpec::new(self.m, self.n).map_err(|e| Failure::new("lattice", e))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate return-walk counts.
    Terms {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Even-index terms r(2n).
        #[arg(long)]
        tilde: bool,
        /// Last index, at the chosen normalization.
        #[arg(long)]
        nmax: usize,
        /// walk-dp, heracles, factor-dp or closed-form; picked per lattice by default.
        #[arg(long)]
        method: Option<Method>,
        /// Reduce modulo this prime.
        #[arg(long)]
        modulus: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Guess a recurrence or θ-ODE from a term file.
    Guess {
        kind: GuessKind,
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        cfg: GuessArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert an operator between recurrence, θ and D forms.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        to: Target,
        /// Literal inverse of the θ-ODE to recurrence map instead of the padded one.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pólya number from a term file or from the lattice's reference budget.
    Polya {
        #[arg(long = "in", conflicts_with_all = ["m", "n"])]
        input: Option<PathBuf>,
        #[arg(long = "M", requires = "n")]
        m: Option<usize>,
        #[arg(long = "N", requires = "m")]
        n: Option<usize>,
        #[arg(long, default_value_t = 5e-4)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit r(n) ~ C·ρ^n·n^α.
    Asympt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo return probability within a horizon.
    Mc {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        horizon: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a stored operator against a stored term file.
    Verify {
        /// Operator JSON or a guess artifact.
        #[arg(long)]
        op: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Held-out primes for re-solving the recurrence shape.
        #[arg(long, default_value_t = 2)]
        extra_primes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a reference table.
    Reproduce {
        which: Reproducible,
        /// Restrict to lattices given as M-N.
        #[arg(long)]
        only: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GuessKind {
    Rec,
    Ode,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Rec,
    Theta,
    D,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reproducible {
    Table1,
}

#[derive(Args)]
struct GuessArgs {
    #[arg(long, default_value_t = 12)]
    max_order: usize,
    #[arg(long, default_value_t = 40)]
    max_degree: usize,
    /// order-first or degree-first.
    #[arg(long, default_value = "order-first")]
    objective: Objective,
    #[arg(long, default_value_t = 25)]
    oversample: usize,
    /// Primes that must agree before a candidate is lifted.
    #[arg(long, default_value_t = 2)]
    primes: usize,
}

impl GuessArgs {
    fn config(&self) -> GuessConfig {
        GuessConfig {
            max_order: self.max_order,
            max_degree: self.max_degree,
            objective: self.objective,
            oversample: self.oversample,
            prime_count: self.primes,
        }
    }
}

#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(kind: &'static str, e: impl ToString) -> Self {
        Failure { kind, message: e.to_string() }
    }

    fn record(&self) -> Value {
        json!({ "error": { "kind": self.kind, "message": self.message } })
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::new("io", e)
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
}

fn read_terms(bytes: &[u8]) -> Result<TermTable, Failure> {
    TermTable::read_from(BufReader::new(bytes)).map_err(|e| Failure::new("terms", e))
}

/// Accepts a bare operator or an artifact with a `found` or `operator` field.
fn read_operator(bytes: &[u8]) -> Result<Operator, Failure> {
    let v: Value = serde_json::from_slice(bytes).map_err(|e| Failure::new("json", e))?;
    let inner = v.get("found").or_else(|| v.get("operator")).cloned().unwrap_or(v);
    if inner.is_null() {
        return Err(Failure::new("json", "artifact holds no operator"));
    }
    let j: OperatorJson = serde_json::from_value(inner).map_err(|e| Failure::new("json", e))?;
    Operator::from_json(&j).map_err(|e| Failure::new("operator", e))
}

/// Adds the input hash to a JSON result and writes it.
fn finish(out: Option<&Path>, command: &str, options: Value, files: &[&[u8]], mut body: Value) -> Result<(), Failure> {
    body["input_sha256"] = Value::String(input_hash(command, &options, files));
    let mut text = serde_json::to_string_pretty(&body).expect("json serializes");
    text.push('\n');
    emit(out, text.as_bytes()).map_err(io)
}

fn cmd_terms(
    cache: Option<&TermCache>,
    lattice: LatticeArgs,
    tilde: bool,
    nmax: usize,
    method: Option<Method>,
    modulus: Option<u64>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let spec = lattice.spec()?;
    let norm = if tilde { Normalization::Tilde } else { Normalization::Raw };
    if tilde && !spec.odd_terms_vanish() {
        return Err(Failure::new("usage", format!("odd terms of ({}, {}) do not vanish; drop --tilde", spec.m(), spec.n())));
    }
    if let Some(p) = modulus {
        if !greenwalks::arith::is_prime(p) {
            return Err(Failure::new("usage", format!("modulus {p} is not prime")));
        }
    }
    let method = method.unwrap_or_else(|| Method::preferred(&spec));
    let count = nmax + 1;
    let table = match cache {
        Some(c) => c.get_or_generate(&spec, norm, count, method, modulus),
        None => generate(&spec, norm, count, method, modulus),
    }
    .map_err(|e| Failure::new("termgen", e))?;
    let mut bytes = Vec::new();
    table.write_to(&mut bytes).map_err(|e| Failure::new("terms", e))?;
    emit(out, &bytes).map_err(io)?;
    if let Some(path) = out {
        let options = json!({
            "M": spec.m(), "N": spec.n(), "norm": norm, "nmax": nmax, "method": method.tag(), "modulus": modulus,
        });
        let meta = json!({
            "command": "terms",
            "options": options,
            "input_sha256": input_hash("terms", &options, &[]),
            "output_sha256": sha256_hex(&bytes),
        });
        let text = serde_json::to_string_pretty(&meta).expect("json serializes") + "\n";
        write_atomic(&meta_path(path), text.as_bytes()).map_err(io)?;
    }
    Ok(())
}

fn guess_body(report: &GuessReport) -> Value {
    let mut v = report.to_json();
    v["operator"] = report.found.as_ref().map(|f| serde_json::to_value(f.operator().to_json()).unwrap()).into();
    v
}

fn cmd_guess(kind: GuessKind, input: &Path, args: &GuessArgs, out: Option<&Path>) -> Result<(), Failure> {
    let cfg = args.config();
    cfg.validate().map_err(|e| Failure::new("usage", e))?;
    let bytes = read(input)?;
    let table = read_terms(&bytes)?;
    let report = match kind {
        GuessKind::Rec => guess_rec(&table, &cfg),
        GuessKind::Ode => guess_theta_ode(&table, &cfg),
    }
    .map_err(|e| Failure::new("guess", e))?;
    let command = match kind {
        GuessKind::Rec => "guess-rec",
        GuessKind::Ode => "guess-ode",
    };
    let options = serde_json::to_value(cfg).expect("config serializes");
    finish(out, command, options, &[&bytes], guess_body(&report))
}

fn cmd_convert(input: &Path, to: Target, exact: bool, out: Option<&Path>) -> Result<(), Failure> {
    let bytes = read(input)?;
    let op = read_operator(&bytes)?;
    let theta = |op: &Operator| -> Result<greenwalks::pfinite::ThetaOde, Failure> {
        match op {
            Operator::Theta(t) => Ok(t.clone()),
            Operator::Rec(r) if exact => Ok(rec_to_theta_ode_exact(r)),
            Operator::Rec(r) => Ok(rec_to_theta_ode(r)),
            Operator::D(_) => match theta_d_convert(op, ConvertDirection::DToTheta) {
                Ok(Operator::Theta(t)) => Ok(t),
                Ok(_) => unreachable!("D converts to θ"),
                Err(e) => Err(Failure::new("operator", e)),
            },
        }
    };
    let result = match to {
        Target::Theta => Operator::Theta(theta(&op)?),
        Target::Rec => match &op {
            Operator::Rec(r) => Operator::Rec(r.canonical()),
            _ => Operator::Rec(theta_ode_to_rec(&theta(&op)?)),
        },
        Target::D => theta_d_convert(&Operator::Theta(theta(&op)?), ConvertDirection::ThetaToD)
            .map_err(|e| Failure::new("operator", e))?,
    };
    let options = json!({ "to": result.kind(), "exact": exact });
    let body = json!({ "operator": result.to_json() });
    finish(out, "convert", options, &[&bytes], body)
}

fn cmd_polya(
    cache: Option<&TermCache>,
    input: Option<&Path>,
    lattice: Option<(usize, usize)>,
    tol: f64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Failure::new("usage", "tolerance must be positive"));
    }
    let (table, bytes) = match (input, lattice) {
        (Some(p), _) => {
            let bytes = read(p)?;
            (read_terms(&bytes)?, bytes)
        }
        (None, Some((m, n))) => {
            LatticeSpec::new(m, n).map_err(|e| Failure::new("lattice", e))?;
            let row = manifest_row(m, n)
                .ok_or_else(|| Failure::new("usage", format!("no reference budget for ({m}, {n}); pass --in")))?;
            (polya_terms(&row, cache).map_err(|e| Failure::new("pipeline", e))?, Vec::new())
        }
        (None, None) => return Err(Failure::new("usage", "pass --in or both --M and --N")),
    };
    let est = polya_estimate(&table, tol).map_err(|e| Failure::new("analysis", e))?;
    let options = json!({ "M": table.spec.m(), "N": table.spec.n(), "tol": tol, "terms": table.len() });
    let body = json!({ "M": table.spec.m(), "N": table.spec.n(), "polya": est });
    finish(out, "polya", options, &[&bytes], body)
}

fn cmd_asympt(input: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let bytes = read(input)?;
    let table = read_terms(&bytes)?;
    let fit = asymptotic_fit(&table).map_err(|e| Failure::new("analysis", e))?;
    let body = json!({ "M": table.spec.m(), "N": table.spec.n(), "norm": table.norm, "fit": fit });
    finish(out, "asympt", json!({}), &[&bytes], body)
}

fn cmd_mc(lattice: LatticeArgs, horizon: u64, trials: u64, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let spec = lattice.spec()?;
    let est = mc_return_probability(&spec, horizon, trials, seed).map_err(|e| Failure::new("lattice", e))?;
    let options = json!({ "M": spec.m(), "N": spec.n(), "horizon": horizon, "trials": trials, "seed": seed });
    let body = json!({ "M": spec.m(), "N": spec.n(), "horizon": horizon, "seed": seed, "mc": est });
    finish(out, "mc", options, &[], body)
}

/// Returns whether the operator passed.
fn cmd_verify(op: &Path, input: &Path, extra_primes: usize, out: Option<&Path>) -> Result<bool, Failure> {
    let op_bytes = read(op)?;
    let term_bytes = read(input)?;
    let operator = read_operator(&op_bytes)?;
    let table = read_terms(&term_bytes)?;
    let (passed, body) = match &operator {
        Operator::Rec(r) => {
            let cert = certify_candidate(r, &table, extra_primes);
            (cert.passed, json!({ "kind": "rec", "certificate": cert }))
        }
        Operator::Theta(t) => {
            let outcome = rec_verify_padded(&theta_ode_to_rec(t), &table);
            let first = match outcome {
                greenwalks::pfinite::VerifyOutcome::Pass => None,
                greenwalks::pfinite::VerifyOutcome::FailAt(n) => Some(n),
            };
            (first.is_none(), json!({ "kind": "theta-ode", "passed": first.is_none(), "first_failure": first, "verified_terms": table.len() }))
        }
        Operator::D(_) => return Err(Failure::new("usage", "convert D-operators to θ form before verifying")),
    };
    let options = json!({ "extra_primes": extra_primes });
    finish(out, "verify", options, &[&op_bytes, &term_bytes], body)?;
    Ok(passed)
}

/// Returns whether every selected row passed.
fn cmd_reproduce(cache: Option<&TermCache>, only: &[String], out: Option<&Path>) -> Result<bool, Failure> {
    let mut wanted = Vec::new();
    for s in only {
        let parsed = s
            .split_once('-')
            .and_then(|(m, n)| Some((m.parse::<usize>().ok()?, n.parse::<usize>().ok()?)))
            .ok_or_else(|| Failure::new("usage", format!("expected M-N, got {s:?}")))?;
        wanted.push(parsed);
    }
    let rows: Vec<_> =
        table1_manifest().into_iter().filter(|r| wanted.is_empty() || wanted.contains(&(r.m, r.n))).collect();
    if rows.is_empty() {
        return Err(Failure::new("usage", "no manifest rows selected"));
    }
    let mut outcomes: Vec<RowOutcome> = Vec::new();
    for r in &rows {
        let o = reproduce_row(r, cache).map_err(|e| Failure::new("pipeline", e))?;
        eprintln!(
            "{} ({},{}) odes {:?} (want {:?}) polya {} (want {}){}",
            if o.ok() { "ok  " } else { "FAIL" },
            o.m,
            o.n,
            o.got,
            o.expected,
            o.polya.as_ref().map_or("-".into(), |e| format!("{:.5}", e.value)),
            o.polya_expected.map_or("recurrent".into(), |v| v.to_string()),
            o.note.as_deref().map_or(String::new(), |n| format!(" [{n}]")),
        );
        outcomes.push(o);
    }
    let passed = outcomes.iter().all(RowOutcome::ok);
    let options = json!({ "rows": rows });
    finish(out, "reproduce-table1", options, &[], json!({ "passed": passed, "rows": outcomes }))?;
    Ok(passed)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let cache = cli.cache.map(TermCache::new);
    let cache = cache.as_ref();
    match cli.command {
        Command::Terms { lattice, tilde, nmax, method, modulus, out } => {
            cmd_terms(cache, lattice, tilde, nmax, method, modulus, out.as_deref()).map(|_| true)
        }
        Command::Guess { kind, input, cfg, out } => cmd_guess(kind, &input, &cfg, out.as_deref()).map(|_| true),
        Command::Convert { input, to, exact, out } => cmd_convert(&input, to, exact, out.as_deref()).map(|_| true),
        Command::Polya { input, m, n, tol, out } => {
            cmd_polya(cache, input.as_deref(), m.zip(n), tol, out.as_deref()).map(|_| true)
        }
        Command::Asympt { input, out } => cmd_asympt(&input, out.as_deref()).map(|_| true),
        Command::Mc { lattice, horizon, trials, seed, out } => {
            cmd_mc(lattice, horizon, trials, seed, out.as_deref()).map(|_| true)
        }
        Command::Verify { op, input, extra_primes, out } => cmd_verify(&op, &input, extra_primes, out.as_deref()),
        Command::Reproduce { which: Reproducible::Table1, only, out } => cmd_reproduce(cache, &only, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let f = Failure::new("usage", e.to_string().trim_end());
            eprintln!("{}", f.record());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(2)
        }
    }
}
