//! Command-line front end. Exit codes: 0 success, 2 input error,
//! 3 verification failure.

use crate::blockzxz::{n_qubits_of, n_u, synth_unitary_exact};
use crate::circuit::{emit_json, emit_qasm, Circuit};
use crate::error::SynthError;
use crate::io::{parse_matrix, parse_state};
use crate::numerics::{spectral_norm, ComplexMatrix};
use crate::random::{gaussian_matrix, haar_unitary, random_rank_matrix, random_state, rng};
use crate::siable::{
    block_encode, block_encoding_lower_bound, block_error, full_rank_count, low_rank_count, unitary_lower_bound,
    EncodingPath, RankMode,
};
use crate::spdmm::{fidelity, nstate_count, prepare_state, state_prep_lower_bound};
use crate::tables;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

const MAX_RANDOM_STATE: usize = 20;
const MAX_RANDOM_MATRIX: usize = 10;

#[derive(Parser, Debug)]
#[command(name = "qsynth", version, about = "C-NOT-efficient state preparation, unitary synthesis and block encoding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Prepare a state from a state file or a random instance.
    State(RunConfig),
    /// Synthesize a unitary exactly.
    Unitary(RunConfig),
    /// Block-encode a matrix with one ancilla (wire 0).
    Encode {
        #[command(flatten)]
        config: RunConfig,
        /// auto, full, or a rank K.
        #[arg(long, default_value = "auto", value_parser = parse_rank)]
        rank: RankMode,
    },
    /// Regenerate the count tables and diff them against pinned values.
    Tables {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print lower bounds next to achieved counts.
    Bounds {
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..=30))]
        max_n: u64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Qasm,
    Json,
    Counts,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Emit::Qasm)]
    pub emit: Emit,
    #[arg(long)]
    pub verify: bool,
    /// Verification tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use a random instance on this many qubits instead of --input.
    #[arg(long, value_name = "N")]
    pub random: Option<usize>,
}

fn parse_rank(s: &str) -> Result<RankMode, String> {
    match s {
        "auto" => Ok(RankMode::Auto),
        "full" => Ok(RankMode::Full),
        _ => match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(RankMode::Rank(k)),
            _ => Err(format!("expected auto, full or a positive rank, got `{s}`")),
        },
    }
}

struct Failure {
    code: u8,
    msg: String,
}

type CmdResult = std::result::Result<Outcome, Failure>;

struct Outcome {
    artefact: String,
    summary: String,
    verified: bool,
}

fn input_err(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, msg: msg.into() }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        let code = match e {
            SynthError::NumericalFailure { .. } => EXIT_VERIFY,
            _ => EXIT_INPUT,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn read_input(cfg: &RunConfig) -> std::result::Result<String, Failure> {
    let path = cfg.input.as_ref().ok_or_else(|| input_err("either --input or --random is required"))?;
    std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn check_source(cfg: &RunConfig, cap: usize) -> std::result::Result<(), Failure> {
    if let Some(tol) = cfg.tol {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(input_err(format!("--tol must be positive, got {tol}")));
        }
    }
    match (cfg.input.is_some(), cfg.random) {
        (true, Some(_)) => Err(input_err("--input and --random are mutually exclusive")),
        (_, Some(n)) if n == 0 || n > cap => Err(input_err(format!("--random must be in 1..={cap}"))),
        _ => Ok(()),
    }
}

fn render(c: &Circuit, emit: Emit, counts: &str) -> String {
    match emit {
        Emit::Qasm => emit_qasm(c),
        Emit::Json => emit_json(c),
        Emit::Counts => counts.to_string(),
    }
}

fn cmd_state(cfg: &RunConfig) -> CmdResult {
    check_source(cfg, MAX_RANDOM_STATE)?;
    let psi: Vec<Complex64> = match cfg.random {
        Some(n) => random_state(&mut rng(cfg.seed), n),
        None => parse_state(&read_input(cfg)?)?,
    };
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= 1e-6) {
        return Err(SynthError::NotNormalized { norm }.into());
    }
    let psi: Vec<Complex64> = psi.into_iter().map(|z| z / norm).collect();
    let n = psi.len().trailing_zeros() as usize;
    let c = prepare_state(&psi)?;
    let expected = nstate_count(n)?;
    let cnots = c.cnot_count() as u64;
    let mut summary = format!("qubits={n} cnots={cnots} expected={expected}");
    let mut verified = true;
    if cfg.verify {
        let tol = cfg.tol.unwrap_or(1e-9);
        let mut zero = vec![Complex64::new(0.0, 0.0); psi.len()];
        zero[0] = Complex64::new(1.0, 0.0);
        let fid = fidelity(&psi, &c.apply(&zero)?);
        let ok = 1.0 - fid <= tol && cnots == expected;
        let _ = write!(summary, " fidelity={fid:.15} tol={tol:e} {}", if ok { "ok" } else { "FAILED" });
        verified = ok;
    }
    let counts = format!("cnots={cnots}\nexpected={expected}\n");
    Ok(Outcome { artefact: render(&c, cfg.emit, &counts), summary, verified })
}

fn load_matrix(cfg: &RunConfig, random: impl FnOnce(usize) -> ComplexMatrix) -> std::result::Result<ComplexMatrix, Failure> {
    check_source(cfg, MAX_RANDOM_MATRIX)?;
    match cfg.random {
        Some(n) => Ok(random(n)),
        None => Ok(parse_matrix(&read_input(cfg)?)?),
    }
}

fn cmd_unitary(cfg: &RunConfig) -> CmdResult {
    let seed = cfg.seed;
    let u = load_matrix(cfg, |n| haar_unitary(&mut rng(seed), 1 << n))?;
    if u.nrows() != u.ncols() {
        return Err(input_err(format!("matrix is {}x{}, expected square", u.nrows(), u.ncols())));
    }
    let n = n_qubits_of(u.nrows())?;
    let c = synth_unitary_exact(&u)?;
    let expected = n_u(n);
    let cnots = c.cnot_count() as u64;
    let mut summary = format!("qubits={n} cnots={cnots} expected={expected}");
    let mut verified = true;
    if cfg.verify {
        let tol = cfg.tol.unwrap_or(1e-8);
        let err = (c.to_unitary()? - &u).norm();
        let ok = err <= tol && cnots == expected;
        let _ = write!(summary, " residual={err:e} tol={tol:e} {}", if ok { "ok" } else { "FAILED" });
        verified = ok;
    }
    let counts = format!("cnots={cnots}\nexpected={expected}\n");
    Ok(Outcome { artefact: render(&c, cfg.emit, &counts), summary, verified })
}

fn cmd_encode(cfg: &RunConfig, mode: RankMode) -> CmdResult {
    if cfg.random == Some(1) {
        return Err(input_err("--random for encode counts the ancilla and must be at least 2"));
    }
    let seed = cfg.seed;
    let a = load_matrix(cfg, |n| {
        let dim = 1usize << (n - 1);
        let g = &mut rng(seed);
        match mode {
            RankMode::Rank(k) if k < dim => random_rank_matrix(g, dim, k),
            _ => gaussian_matrix(g, dim, dim),
        }
    })?;
    let r = block_encode(&a, mode)?;
    let n = r.circuit.n_qubits;
    let expected = match r.path {
        EncodingPath::Full => full_rank_count(n),
        EncodingPath::LowRank => low_rank_count(n, r.declared_rank),
    };
    let cnots = r.circuit.cnot_count() as u64;
    let mut summary = format!(
        "qubits={n} alpha={:.15e} path={} rank={} cnots={cnots} expected={expected}",
        r.alpha,
        r.path.name(),
        r.declared_rank
    );
    let mut verified = true;
    if cfg.verify {
        let tol = cfg.tol.unwrap_or(1e-8);
        let err = block_error(&r.circuit, &a.map(|z| z / r.alpha))?;
        let alpha_err = (r.alpha - spectral_norm(&a)).abs() / r.alpha;
        let ok = err <= tol && cnots == expected && alpha_err <= 1e-10;
        let _ = write!(summary, " block_error={err:e} tol={tol:e} {}", if ok { "ok" } else { "FAILED" });
        verified = ok;
    }
    let counts = format!(
        "cnots={cnots}\nexpected={expected}\nalpha={:.17e}\npath={}\nrank={}\n",
        r.alpha,
        r.path.name(),
        r.declared_rank
    );
    Ok(Outcome { artefact: render(&r.circuit, cfg.emit, &counts), summary, verified })
}

fn bounds_report(max_n: usize) -> std::result::Result<String, Failure> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>3} {:>10} {:>10} {:>20} {:>20} {:>20} {:>20}",
        "n", "state lb", "state", "unitary lb", "unitary", "encoding lb", "encoding"
    );
    for n in 2..=max_n {
        let _ = writeln!(
            s,
            "{n:>3} {:>10} {:>10} {:>20} {:>20} {:>20} {:>20}",
            state_prep_lower_bound(n),
            nstate_count(n)?,
            unitary_lower_bound(n),
            n_u(n),
            block_encoding_lower_bound(n),
            full_rank_count(n)
        );
    }
    Ok(s)
}

fn write_artefact(path: Option<&PathBuf>, text: &str, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| input_err(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| input_err(e.to_string())),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<u8, Failure> {
    let (cfg, outcome) = match cli.command {
        Command::State(cfg) => {
            let o = cmd_state(&cfg)?;
            (cfg, o)
        }
        Command::Unitary(cfg) => {
            let o = cmd_unitary(&cfg)?;
            (cfg, o)
        }
        Command::Encode { config, rank } => {
            let o = cmd_encode(&config, rank)?;
            (config, o)
        }
        Command::Tables { seed, output } => {
            let report = tables::generate(seed)?;
            write_artefact(output.as_ref(), &report.text, out)?;
            let fails = report.failures();
            for f in &fails {
                let _ = writeln!(err, "mismatch: {} got {} expected {}", f.label, f.got, f.want);
            }
            return Ok(if fails.is_empty() { EXIT_OK } else { EXIT_VERIFY });
        }
        Command::Bounds { max_n } => {
            write_artefact(None, &bounds_report(max_n as usize)?, out)?;
            return Ok(EXIT_OK);
        }
    };
    write_artefact(cfg.output.as_ref(), &outcome.artefact, out)?;
    let _ = writeln!(err, "{}", outcome.summary);
    Ok(if outcome.verified { EXIT_OK } else { EXIT_VERIFY })
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.msg);
            f.code
        }
    }
}
