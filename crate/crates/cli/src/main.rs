//! `blends`: seeded verification suites with JSON-lines reports.
//!
//! Exit status is 0 when every check passes, 1 when some check fails and 2 on
//! configuration errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use blends_core::jones::{default_product_grid, grid_square, product_grid, uniform_grid, FiniteCommutingSquare, SquareData};
use blends_core::nonstrict::{decay_csv, preset_sequence, Preset};
use blends_core::report::Ledger;
use blends_core::suites::{
    closed_forms, commuting_square, counterexample, crossed_canon, polar_suite, roundtrip, verify_identities, SuiteConfig,
};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

const IDENTITY_TOL: f64 = 1e-9;
const ROUNDTRIP_TOL: f64 = 1e-8;
const EXACT_TOL: f64 = 1e-10;
const CANON_TOL: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(name = "blends", version, about = "Verification suites for blends and alloys of finite-dimensional C*-algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Seed of the instance generator.
    #[arg(long)]
    seed: Option<u64>,
    /// Residual threshold for pass/fail.
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    /// JSON file with any of the configuration keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON-lines report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct Instances {
    /// Dimensions of A, cycled over instances (comma separated or repeated).
    #[arg(long = "dim", value_delimiter = ',')]
    dims: Vec<usize>,
    /// Number of random instances.
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
struct SquareArgs {
    /// Grid shape `RxC`.
    #[arg(long)]
    grid: Option<String>,
    /// `uniform`, `product:u1,u2,..;v1,v2,..` or a JSON list of weights in row-major order.
    #[arg(long)]
    weights: Option<String>,
    /// A square given as JSON (inline or a file path) with keys omega, weights, partition_b, partition_c.
    #[arg(long)]
    square: Option<String>,
    /// Number of random samples for the sampled inequalities.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Intrinsic and h-parametrized identities on random alloys.
    VerifyIdentities {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inst: Instances,
    },
    /// Alloy from random (pi, h), extraction and reconstruction of the crossed product.
    Roundtrip {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inst: Instances,
    },
    /// Non-strict blend: witness norms and K_N as CSV on standard output.
    Counterexample {
        #[command(flatten)]
        common: Common,
        /// harmonic, geometric or constant.
        #[arg(long)]
        preset: Option<String>,
        /// Length of the sequence r_m.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Jones projections, quasi-basis and compact blends on finite commuting squares.
    CommutingSquare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        square: SquareArgs,
    },
    /// Every suite on generated instances.
    RandomSuite {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inst: Instances,
        /// Number of random samples for the sampled inequalities.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    tol: Option<f64>,
    dims: Option<Vec<usize>>,
    count: Option<usize>,
    samples: Option<usize>,
    preset: Option<String>,
    n: Option<usize>,
    grid: Option<String>,
    weights: Option<String>,
    square: Option<SquareData>,
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct ConfigError(String);

impl<E: std::fmt::Display> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

fn load_file(common: &Common) -> Result<FileConfig, ConfigError> {
    match &common.config {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
        }
    }
}

fn suite_config(common: &Common, inst: &Instances, file: &FileConfig, tol: f64) -> Result<SuiteConfig, ConfigError> {
    let d = SuiteConfig::default();
    let cfg = SuiteConfig {
        seed: common.seed.or(file.seed).unwrap_or(d.seed),
        tol: common.tol.or(file.tol).unwrap_or(tol),
        dims: if inst.dims.is_empty() { file.dims.clone().unwrap_or(d.dims) } else { inst.dims.clone() },
        count: inst.count.or(file.count).unwrap_or(d.count),
        samples: file.samples.unwrap_or(d.samples),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn threshold(common: &Common, file: &FileConfig, default: f64) -> Result<f64, ConfigError> {
    let t = common.tol.or(file.tol).unwrap_or(default);
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(ConfigError(format!("tol must be positive, got {t}")))
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), ConfigError> {
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(|| ConfigError(format!("grid must look like 2x3, got {s:?}")))?;
    let (r, c): (usize, usize) = (r.trim().parse()?, c.trim().parse()?);
    if r == 0 || c == 0 {
        return Err(ConfigError("grid sides must be positive".into()));
    }
    Ok((r, c))
}

fn parse_list(s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(ConfigError::from)).collect()
}

fn read_square(s: &str) -> Result<SquareData, ConfigError> {
    let text = if s.trim_start().starts_with('{') { s.to_string() } else { fs::read_to_string(s).map_err(|e| ConfigError(format!("{s}: {e}")))? };
    Ok(serde_json::from_str(&text)?)
}

/// Squares selected by the flags; with none given the uniform 2x2 and the 2x3 product square.
fn squares(args: &SquareArgs, file: &FileConfig) -> Result<Vec<(String, FiniteCommutingSquare)>, ConfigError> {
    let given = match &args.square {
        Some(s) => Some(read_square(s)?),
        None => file.square.clone(),
    };
    if let Some(given) = given {
        return Ok(vec![("custom".into(), given.build()?)]);
    }
    let grid = args.grid.clone().or_else(|| file.grid.clone()).map(|g| parse_grid(&g)).transpose()?;
    let weights = args.weights.clone().or_else(|| file.weights.clone());
    let sq = match (weights.as_deref(), grid) {
        (None, None) => {
            return Ok(vec![("uniform_2x2".into(), uniform_grid(2, 2)?), ("product_2x3".into(), default_product_grid()?)]);
        }
        (None | Some("uniform"), g) => {
            let (r, c) = g.unwrap_or((2, 2));
            (format!("uniform_{r}x{c}"), uniform_grid(r, c)?)
        }
        (Some(w), g) if w.starts_with("product:") => {
            let (u, v) = w["product:".len()..].split_once(';').ok_or_else(|| ConfigError("product weights must look like product:u1,u2;v1,v2,v3".into()))?;
            let (u, v) = (parse_list(u)?, parse_list(v)?);
            if let Some((r, c)) = g {
                if (r, c) != (u.len(), v.len()) {
                    return Err(ConfigError(format!("grid {r}x{c} does not match product weights of shape {}x{}", u.len(), v.len())));
                }
            }
            (format!("product_{}x{}", u.len(), v.len()), product_grid(&u, &v)?)
        }
        (Some(w), g) if w.trim_start().starts_with('[') => {
            let (r, c) = g.ok_or_else(|| ConfigError("a weight list needs --grid".into()))?;
            let list: Vec<f64> = serde_json::from_str(w)?;
            (format!("weighted_{r}x{c}"), grid_square(r, c, list)?)
        }
        (Some(w), _) => return Err(ConfigError(format!("unknown weights {w:?}"))),
    };
    Ok(vec![sq])
}

struct Run {
    ledger: Ledger,
    out: Option<PathBuf>,
    csv: Option<String>,
}

fn timed(name: &str, f: impl FnOnce() -> Ledger) -> Ledger {
    let start = Instant::now();
    let ledger = f();
    let failed = ledger.failures().count();
    eprintln!("{name}: {} checks, {failed} failed, {:.3}s", ledger.len(), start.elapsed().as_secs_f64());
    ledger
}

fn execute(command: Command) -> Result<Run, ConfigError> {
    match command {
        Command::VerifyIdentities { common, inst } => {
            let file = load_file(&common)?;
            let cfg = suite_config(&common, &inst, &file, IDENTITY_TOL)?;
            let ledger = timed("verify-identities", || verify_identities(&cfg));
            Ok(Run { ledger, out: common.out.or(file.out), csv: None })
        }
        Command::Roundtrip { common, inst } => {
            let file = load_file(&common)?;
            let cfg = suite_config(&common, &inst, &file, ROUNDTRIP_TOL)?;
            let ledger = timed("roundtrip", || roundtrip(&cfg, cfg.tol));
            Ok(Run { ledger, out: common.out.or(file.out), csv: None })
        }
        Command::Counterexample { common, preset, n } => {
            let file = load_file(&common)?;
            let limit = threshold(&common, &file, EXACT_TOL)?;
            let preset: Preset = preset.or(file.preset.clone()).unwrap_or_else(|| "harmonic".into()).parse()?;
            let n = n.or(file.n).unwrap_or(100);
            if n == 0 {
                return Err(ConfigError("n must be at least 1".into()));
            }
            let start = Instant::now();
            let (ledger, rows) = counterexample(&preset_sequence(preset, n), limit)?;
            eprintln!("counterexample: {} checks, {} failed, {:.3}s", ledger.len(), ledger.failures().count(), start.elapsed().as_secs_f64());
            Ok(Run { ledger, out: common.out.or(file.out), csv: Some(decay_csv(&rows)) })
        }
        Command::CommutingSquare { common, square } => {
            let file = load_file(&common)?;
            let limit = threshold(&common, &file, EXACT_TOL)?;
            let seed = common.seed.or(file.seed).unwrap_or(0);
            let samples = square.samples.or(file.samples).unwrap_or(1000);
            let mut ledger = Ledger::new();
            for (name, sq) in squares(&square, &file)? {
                ledger.extend(timed(&format!("commuting-square {name}"), || commuting_square(&name, &sq, samples, seed, limit)));
            }
            Ok(Run { ledger, out: common.out.or(file.out), csv: None })
        }
        Command::RandomSuite { common, inst, samples } => {
            let file = load_file(&common)?;
            let mut cfg = suite_config(&common, &inst, &file, IDENTITY_TOL)?;
            cfg.samples = samples.or(file.samples).unwrap_or(cfg.samples);
            let over = common.tol.or(file.tol);
            let lim = |d: f64| over.unwrap_or(d);
            let mut ledger = Ledger::new();
            ledger.extend(timed("verify-identities", || verify_identities(&cfg)));
            ledger.extend(timed("roundtrip", || roundtrip(&cfg, lim(ROUNDTRIP_TOL))));
            ledger.extend(timed("polar", || polar_suite(&cfg, lim(ROUNDTRIP_TOL))));
            ledger.extend(timed("crossed-canon", || crossed_canon(lim(CANON_TOL))));
            ledger.extend(timed("closed-forms", || closed_forms(cfg.seed, 100, lim(EXACT_TOL))));
            let (decay, _) = counterexample(&preset_sequence(Preset::Harmonic, 100), lim(EXACT_TOL))?;
            ledger.extend(decay);
            for (name, sq) in [("uniform_2x2", uniform_grid(2, 2)?), ("product_2x3", default_product_grid()?)] {
                ledger.extend(timed(&format!("commuting-square {name}"), || commuting_square(name, &sq, cfg.samples, cfg.seed, lim(EXACT_TOL))));
            }
            Ok(Run { ledger, out: common.out.or(file.out), csv: None })
        }
    }
}

fn emit(run: &Run) -> std::io::Result<()> {
    let report = run.ledger.to_json_lines();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match (&run.out, &run.csv) {
        (Some(path), csv) => {
            fs::write(path, report)?;
            if let Some(csv) = csv {
                lock.write_all(csv.as_bytes())?;
            }
        }
        (None, Some(csv)) => lock.write_all(csv.as_bytes())?,
        (None, None) => lock.write_all(report.as_bytes())?,
    }
    lock.flush()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let run = match execute(cli.command) {
        Ok(run) => run,
        Err(ConfigError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&run) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    for r in run.ledger.failures().take(10) {
        eprintln!("FAIL {} {} residual {:.3e}", r.suite, r.check, r.residual);
    }
    if run.ledger.all_pass() && !run.ledger.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
