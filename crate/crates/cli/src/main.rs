use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mchi_cli::battery::run_checks;
use mchi_cli::corpus::{halasz_corpus, max_ratios, unimodular, CorpusSpec};
use mchi_cli::export::{self, Header};
use mchi_cli::{run_sweep, CliError, ExperimentConfig, Format, SweepRecord, BATTERIES};
use mchi_core::euler::{mertens_ap, mertens_constants, EulerPrimes};
use mchi_core::extremal::search_prescribed;
use mchi_core::halasz::halasz_bound_check;
use mchi_core::pretentious::{distance_sq, min_twisted_distance};
use mchi_core::{build_group, enumerate_characters, CMFunction, CharacterFilter, Complex64, DirichletCharacter, PrescribedTargets};
use serde_json::json;

#[derive(Parser)]
#[command(name = "mchi", version, about = "Character sum and pretentious-distance experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// TOML config to start from; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    q_min: Option<u64>,
    #[arg(long)]
    q_max: Option<u64>,
    #[arg(long)]
    order: Option<u64>,
    #[arg(long)]
    y: Option<f64>,
    #[arg(long = "T")]
    t_range: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Twist-grid resolution in units of 1/log y.
    #[arg(long)]
    grid: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Record per-character timings (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field.clone() { c.$field = v; })* };
        }
        set!(q_min, q_max, y, t_range, alpha, grid, seed, threads, format);
        if self.order.is_some() {
            c.order = self.order;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.baseline.is_some() {
            c.baseline = self.baseline.clone();
        }
        c.timing |= self.timing;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// M(chi) and envelope ratios for every primitive character in a conductor range.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Also write the resolved config as TOML.
        #[arg(long)]
        save_config: Option<PathBuf>,
    },
    /// Run a named bound-check battery; exits 1 if any check fails.
    Battery {
        name: String,
        /// Restrict to these checks.
        #[arg(long = "check")]
        checks: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// D(chi, psi; y)^2 and the twisted minimum M(chi conj(psi); y, T).
    Distance {
        /// Character as `q:index`.
        #[arg(long)]
        chi: String,
        /// Second character as `q:index`; defaults to the constant 1.
        #[arg(long)]
        psi: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Primitive characters of order `--order` taking prescribed values at small primes.
    SearchPrescribed {
        /// `p:j` for chi(p) = e(j/g), or `p:zero` for chi(p) = 0.
        #[arg(long = "target", required = true)]
        targets: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Mertens constants C_m(a) with Euler products truncated at `--cutoff`.
    Mertens {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        a: Option<i64>,
        #[arg(long, default_value_t = 1e6)]
        cutoff: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Friable logarithmic mean against (log y) exp(-M) + 1/T.
    HalaszCheck {
        /// Which f: `one`, `liouville` or `random` (member `--member` of the seeded corpus).
        #[arg(long, default_value = "random")]
        f: String,
        #[arg(long, default_value_t = 0)]
        member: u64,
        /// Run this many seeded corpus members at T in {0.01, 0.1, 1} and report the maxima.
        #[arg(long)]
        corpus: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-encode an exported sweep in another format.
    Export {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_pair(s: &str, what: &str) -> Result<(u64, String), CliError> {
    let (a, b) = s.split_once(':').ok_or_else(|| CliError::Config(format!("{what}: expected `a:b`, got `{s}`")))?;
    let a = a.parse().map_err(|_| CliError::Config(format!("{what}: `{a}` is not an integer")))?;
    Ok((a, b.to_string()))
}

fn character(spec: &str) -> Result<DirichletCharacter, CliError> {
    let (q, idx) = parse_pair(spec, "chi")?;
    let idx: u64 = idx.parse().map_err(|_| CliError::Config(format!("chi: `{idx}` is not an index")))?;
    enumerate_characters(&build_group(q)?, &CharacterFilter::default())
        .into_iter()
        .find(|c| c.index() == idx)
        .ok_or_else(|| CliError::Config(format!("chi: no character with index {idx} modulo {q}")))
}

fn emit_json_lines(config: &ExperimentConfig, rows: &[serde_json::Value]) -> Result<(), CliError> {
    let header = Header::for_config(config);
    let mut body = Vec::new();
    export::write_json_lines(&mut body, &header, rows).map_err(|e| CliError::Io(e.to_string()))?;
    write_out(config, &body)
}

fn write_out(config: &ExperimentConfig, bytes: &[u8]) -> Result<(), CliError> {
    match &config.out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn write_rows<T: serde::Serialize + export::Tabular>(config: &ExperimentConfig, rows: &[T]) -> Result<(), CliError> {
    let mut body = Vec::new();
    export::write(&mut body, config.format, &Header::for_config(config), rows).map_err(|e| CliError::Io(e.to_string()))?;
    write_out(config, &body)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Sweep { common, save_config } => {
            let config = common.resolve()?;
            if let Some(p) = save_config {
                std::fs::write(&p, config.to_toml()).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            }
            write_rows(&config, &run_sweep(&config)?)?;
            Ok(true)
        }
        Command::Battery { name, checks, common } => {
            let config = common.resolve()?;
            if !BATTERIES.contains(&name.as_str()) {
                return Err(CliError::Config(format!("battery: unknown name `{name}` (expected one of {})", BATTERIES.join(", "))));
            }
            let only: Vec<&str> = checks.iter().map(String::as_str).collect();
            let outcome = run_checks(&name, &config, &only)?;
            for c in &outcome.checks {
                eprintln!(
                    "{} {}/{}: value {:.6e} vs {:.6e} over {} cases ({:.2}s) - {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.battery,
                    c.check,
                    c.value,
                    c.threshold,
                    c.cases,
                    c.elapsed,
                    c.detail
                );
            }
            if config.out.is_some() {
                write_rows(&config, &outcome.checks)?;
            }
            Ok(outcome.passed())
        }
        Command::Distance { chi, psi, common } => {
            let config = common.resolve()?;
            let bound = config.y.floor() as u64;
            let f = CMFunction::from_character(&character(&chi)?, bound);
            let g = match &psi {
                Some(s) => CMFunction::from_character(&character(s)?, bound),
                None => CMFunction::one(bound),
            };
            let d = distance_sq(&f, &g, config.y)?;
            let m = min_twisted_distance(&f.mul_conj(&g), config.y, config.t_range, config.grid)?;
            emit_json_lines(
                &config,
                &[json!({
                    "chi": chi, "psi": psi, "y": config.y, "T": config.t_range,
                    "distance_sq": d.value, "twisted_min": m.value, "argmin_t": m.argmin_t, "grid_error": m.grid_error,
                })],
            )?;
            Ok(true)
        }
        Command::SearchPrescribed { targets, common } => {
            let config = common.resolve()?;
            let g = config.order.ok_or_else(|| CliError::Config("order: required for search-prescribed".into()))?;
            let mut map = BTreeMap::new();
            for t in &targets {
                let (p, z) = parse_pair(t, "target")?;
                let z = match z.as_str() {
                    "zero" => None,
                    s => Some(s.parse().map_err(|_| CliError::Config(format!("target: `{s}` is not an exponent")))?),
                };
                map.insert(p, z);
            }
            let spec = PrescribedTargets::new(g, config.y, map)?;
            let rows: Vec<_> = search_prescribed(&spec, config.q_max)?
                .iter()
                .map(|c| json!({"q": c.modulus(), "char_index": c.index(), "order": c.order(), "parity": c.parity()}))
                .collect();
            emit_json_lines(&config, &rows)?;
            Ok(true)
        }
        Command::Mertens { m, a, cutoff, common } => {
            let config = common.resolve()?;
            let primes = EulerPrimes::new(cutoff);
            let rows: Vec<_> = mertens_constants(m, &primes)?
                .into_iter()
                .filter(|(b, _)| a.is_none_or(|a| a.rem_euclid(m as i64) == *b))
                .map(|(b, c)| {
                    let ap = mertens_ap(config.y, m, b)?;
                    Ok(json!({"m": m, "a": b, "cutoff": cutoff, "constant": c, "x": config.y, "prime_sum": ap.value, "estimate": -ap.constant_estimate}))
                })
                .collect::<Result<_, CliError>>()?;
            emit_json_lines(&config, &rows)?;
            Ok(true)
        }
        Command::HalaszCheck { f, member, corpus, common } => {
            let config = common.resolve()?;
            if let Some(size) = corpus {
                let spec = CorpusSpec { seed: config.seed, size, x: config.y, y: config.y, grid: config.grid };
                let ts = [0.01, 0.1, 1.0];
                let maxima = max_ratios(&halasz_corpus(&spec, &ts)?);
                let rows: Vec<_> = ts.iter().zip(maxima).map(|(t, r)| json!({"T": t, "max_ratio": r, "corpus_size": size, "y": config.y})).collect();
                emit_json_lines(&config, &rows)?;
                return Ok(true);
            }
            let bound = config.y.floor() as u64;
            let func = match f.as_str() {
                "one" => CMFunction::one(bound),
                "liouville" => CMFunction::constant(bound, Complex64::new(-1.0, 0.0))?,
                "random" => unimodular(config.seed, member, bound),
                other => return Err(CliError::Config(format!("f: unknown function `{other}`"))),
            };
            let rep = halasz_bound_check(&func, config.y, config.y, config.t_range, config.grid)?;
            emit_json_lines(&config, &[serde_json::to_value(rep).expect("report serializes")])?;
            Ok(true)
        }
        Command::Export { input, common } => {
            let config = common.resolve()?;
            let (header, rows): (Header, Vec<SweepRecord>) = export::read(&input)?;
            let mut body = Vec::new();
            export::write(&mut body, config.format, &header, &rows).map_err(|e| CliError::Io(e.to_string()))?;
            write_out(&config, &body)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("mchi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
