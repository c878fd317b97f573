//! The `dpcache` command line: `params`, `simulate`, `verify`, `tradeoff`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::json;

use crate::demand::{aux_demand, build_v, digits_label};
use crate::error::{Error, Result};
use crate::library::FileLibrary;
use crate::params::SchemeParams;
use crate::scheme::{decode, deliver, place, stream, stream_rng, SessionRandomness};
use crate::tradeoff::{
    achievable_curve, fmt_rational, parse_rational, tightness_report, to_f64, Rational,
    TightnessRow,
};
use crate::verification::{
    oracle_base_class_delivery, oracle_demand_identity, oracle_segment_recovery,
    oracle_y_reconstruction, verify_correctness_exhaustive, verify_distribution_lemma,
    verify_privacy, PrivacyMode, VerificationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "dpcache",
    version,
    about = "Demand-private coded caching simulator and verifier"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the derived sizes and the exact (M, R) of one configuration.
    Params(ParamsArgs),
    /// Run placement, one delivery and decoding for every user.
    Simulate(SimulateArgs),
    /// Run exhaustive verification suites.
    Verify(VerifyArgs),
    /// Emit achievable and converse rates on a memory grid (two files).
    Tradeoff(TradeoffArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    /// Number of files N.
    #[arg(long = "n", default_value_t = 2)]
    pub n: usize,
    /// Number of users K.
    #[arg(long = "k", default_value_t = 3)]
    pub k: usize,
    /// Scheme parameter r in [0, NK-K+1].
    #[arg(long = "r", default_value_t = 2)]
    pub r: usize,
    /// File length in bits; must be a multiple of C(NK-K+1, r). Defaults to 8 bits per subfile.
    #[arg(long = "f")]
    pub f: Option<usize>,
}

impl SchemeArgs {
    fn params(&self) -> Result<SchemeParams> {
        match self.f {
            Some(f) => SchemeParams::new(self.n, self.k, self.r, f),
            None => SchemeParams::with_subfile_bits(self.n, self.k, self.r, 8),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated file indices, one per user; sampled from the seed when absent.
    #[arg(long)]
    pub demands: Option<String>,
    /// Raw library file with a `<path>.json` sidecar holding {"N", "F"}.
    #[arg(long)]
    pub library: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Correctness,
    Privacy,
    Lemma1,
    Identities,
    Reconstruction,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Conditional,
    FullMarginal,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite to run.
    #[arg(value_enum)]
    pub suite_pos: Option<Suite>,
    #[arg(long, value_enum, conflicts_with = "suite_pos")]
    pub suite: Option<Suite>,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Privacy mode; full-marginal enumerates every library with one-bit subfiles.
    #[arg(long, value_enum, default_value_t = Mode::Conditional)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TradeoffArgs {
    /// Number of files; only N = 2 is supported.
    #[arg(long = "n", default_value_t = 2)]
    pub n: usize,
    #[arg(long = "k", default_value_t = 3)]
    pub k: usize,
    /// Memory grid step as p/q.
    #[arg(long, default_value = "1/100")]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of a command: text to emit and whether it succeeded.
struct Output {
    body: String,
    ok: bool,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let (result, target) = match &cli.command {
        Command::Params(a) => (cmd_params(a), a.out.clone()),
        Command::Simulate(a) => (cmd_simulate(a), a.out.clone()),
        Command::Verify(a) => (cmd_verify(a), a.out.clone()),
        Command::Tradeoff(a) => (cmd_tradeoff(a), a.out.clone()),
    };
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match target {
        Some(path) => std::fs::write(&path, &output.body),
        None => out.write_all(output.body.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    if output.ok {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn cmd_params(a: &ParamsArgs) -> Result<Output> {
    let p = a.scheme.params()?;
    let mr = p.memory_rate();
    let body = match a.format {
        Format::Json => {
            let v = json!({
                "N": p.n_files(),
                "K": p.n_users(),
                "r": p.r(),
                "F": p.file_len(),
                "universe": p.universe(),
                "subfiles": p.subfile_count(),
                "subfile_bits": p.subfile_len(),
                "cache_signals": p.cache_signal_count(),
                "segments": p.segment_count(),
                "M": fmt_rational(&mr.m),
                "M_float": to_f64(&mr.m),
                "R": fmt_rational(&mr.r),
                "R_float": to_f64(&mr.r),
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Csv => format!(
            "N,K,r,F,universe,subfiles,subfile_bits,cache_signals,segments,M,R\n{},{},{},{},{},{},{},{},{},{},{}\n",
            p.n_files(),
            p.n_users(),
            p.r(),
            p.file_len(),
            p.universe(),
            p.subfile_count(),
            p.subfile_len(),
            p.cache_signal_count(),
            p.segment_count(),
            fmt_rational(&mr.m),
            fmt_rational(&mr.r)
        ),
        Format::Text => format!(
            "N={} K={} r={} F={}\nK'={}\nsubfiles={} subfile_bits={}\ncache_signals={}\nsegments={}\nM={}\nR={}\n",
            p.n_files(),
            p.n_users(),
            p.r(),
            p.file_len(),
            p.universe(),
            p.subfile_count(),
            p.subfile_len(),
            p.cache_signal_count(),
            p.segment_count(),
            mr.m,
            mr.r
        ),
    };
    Ok(Output { body, ok: true })
}

fn parse_demands(s: &str, p: &SchemeParams) -> Result<Vec<usize>> {
    let demands = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("bad demand {x:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if demands.len() != p.n_users() {
        return Err(usage(format!(
            "expected {} demands, got {}",
            p.n_users(),
            demands.len()
        )));
    }
    if let Some(bad) = demands.iter().find(|&&d| d >= p.n_files()) {
        return Err(usage(format!(
            "demand {bad} out of range for N={}",
            p.n_files()
        )));
    }
    Ok(demands)
}

fn load_library(p: SchemeParams, path: &Option<PathBuf>, seed: u64) -> Result<FileLibrary> {
    match path {
        Some(path) => FileLibrary::load(p, path),
        None => Ok(FileLibrary::random(
            p,
            &mut stream_rng(seed, stream::LIBRARY),
        )),
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Output> {
    let p = a.scheme.params()?;
    let files = load_library(p, &a.library, a.seed)?;
    let demands = match &a.demands {
        Some(s) => parse_demands(s, &p)?,
        None => {
            let mut rng = stream_rng(a.seed, stream::DEMANDS);
            (0..p.n_users())
                .map(|_| rng.random_range(0..p.n_files()))
                .collect()
        }
    };
    let mut rand = SessionRandomness::from_seed(&p, a.seed);
    let caches = place(&files, &rand)?;
    let x = deliver(&files, &demands, &mut rand)?;
    let d = aux_demand(&demands, rand.keys(), p.n_files())?;
    let v = build_v(&d);
    let mr = p.memory_rate();
    let f = Rational::from_integer(p.file_len().into());

    let mut users = Vec::new();
    let mut decoded = 0;
    for (k, cache) in caches.iter().enumerate() {
        let ok =
            matches!(decode(cache, &x, k, demands[k]), Ok(ref w) if w == files.file(demands[k]));
        decoded += ok as usize;
        users.push((k, cache, ok));
    }
    let ok = decoded == p.n_users();

    let body = match a.format {
        Format::Json => {
            let v = json!({
                "N": p.n_files(), "K": p.n_users(), "r": p.r(), "F": p.file_len(),
                "seed": a.seed,
                "M": fmt_rational(&mr.m), "R": fmt_rational(&mr.r),
                "keys": rand.keys(),
                "demands": demands,
                "aux_demand": d.digits(),
                "class": format!("{:?}", d.class()),
                "v_set": v.set_form(),
                "t_d": x.t_d(),
                "delivery": {
                    "segments": x.segments().len(),
                    "payload_bits": x.payload_bits().len(),
                    "rate_bits": fmt_rational(&(&mr.r * &f)),
                    "bytes": x.to_bytes().len(),
                },
                "users": users.iter().map(|(k, c, ok)| json!({
                    "user": k,
                    "key": c.key(),
                    "demand": demands[*k],
                    "cache_signals": c.signals().len(),
                    "cache_payload_bits": c.payload_bits().len(),
                    "cache_bytes": c.to_bytes().len(),
                    "decoded": ok,
                })).collect::<Vec<_>>(),
                "decoded": decoded,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Text | Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "params N={} K={} r={} F={} K'={} subfile_bits={}",
                p.n_files(),
                p.n_users(),
                p.r(),
                p.file_len(),
                p.universe(),
                p.subfile_len()
            );
            let _ = writeln!(s, "rate M={} R={}", mr.m, mr.r);
            let _ = writeln!(s, "seed {}", a.seed);
            let _ = writeln!(s, "keys {}", digits_label(rand.keys()));
            let _ = writeln!(s, "demands {}", digits_label(&demands));
            let _ = writeln!(
                s,
                "aux_demand {} class {:?} V={:?} t_d={}",
                d,
                d.class(),
                v.set_form(),
                x.t_d()
            );
            for (k, c, _) in &users {
                let _ = writeln!(
                    s,
                    "cache user {k}: key={} signals={} payload_bits={} (M*F={}) bytes={}",
                    c.key(),
                    c.signals().len(),
                    c.payload_bits().len(),
                    &mr.m * &f,
                    c.to_bytes().len()
                );
            }
            let _ = writeln!(
                s,
                "delivery: segments={} payload_bits={} (R*F={}) bytes={}",
                x.segments().len(),
                x.payload_bits().len(),
                &mr.r * &f,
                x.to_bytes().len()
            );
            for (k, _, ok) in &users {
                let _ = writeln!(
                    s,
                    "user {k}: demand {} {}",
                    demands[*k],
                    if *ok { "decoded" } else { "MISMATCH" }
                );
            }
            let _ = writeln!(s, "decoded {decoded}/{} users", p.n_users());
            s
        }
    };
    Ok(Output { body, ok })
}

fn run_suite(suite: Suite, a: &VerifyArgs) -> Result<Vec<VerificationReport>> {
    let p = a.scheme.params()?;
    let files = || load_library(p, &a.library, a.seed);
    Ok(match suite {
        Suite::Correctness => vec![verify_correctness_exhaustive(&p, &files()?)?],
        Suite::Privacy => match a.mode {
            Mode::Conditional => vec![verify_privacy(
                &p,
                PrivacyMode::ConditionalOnFiles,
                Some(&files()?),
            )?],
            Mode::FullMarginal => {
                let minimal = SchemeParams::minimal(p.n_files(), p.n_users(), p.r())?;
                vec![verify_privacy(&minimal, PrivacyMode::FullMarginal, None)?]
            }
        },
        Suite::Lemma1 => vec![verify_distribution_lemma(&p, &files()?)?],
        Suite::Identities => {
            let lib = files()?;
            vec![
                oracle_demand_identity(&p, &lib)?,
                oracle_segment_recovery(&p, &lib)?,
                oracle_base_class_delivery(&p, &lib)?,
            ]
        }
        Suite::Reconstruction => vec![oracle_y_reconstruction(&p, &files()?)?],
        Suite::All => {
            let mut all = Vec::new();
            for s in [
                Suite::Correctness,
                Suite::Privacy,
                Suite::Lemma1,
                Suite::Identities,
                Suite::Reconstruction,
            ] {
                all.extend(run_suite(s, a)?);
            }
            all
        }
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Output> {
    let suite = a.suite_pos.or(a.suite).ok_or_else(|| {
        usage(
            "a suite is required: correctness, privacy, lemma1, identities, reconstruction or all",
        )
    })?;
    let reports = run_suite(suite, a)?;
    let ok = reports.iter().all(|r| r.passed());
    let body = match a.format {
        Format::Json => {
            let v: Vec<_> = reports.iter().map(|r| r.to_json()).collect();
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Csv => {
            let mut s = String::from("scope,passed,cases,failures\n");
            for r in &reports {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    r.scope,
                    r.passed(),
                    r.cases_run,
                    r.failures.len()
                );
            }
            s
        }
        Format::Text => {
            let mut s: String = reports.iter().map(|r| r.render_text(20)).collect();
            let _ = writeln!(s, "{}", if ok { "all suites passed" } else { "FAILED" });
            s
        }
    };
    Ok(Output { body, ok })
}

fn row_json(row: &TightnessRow) -> serde_json::Value {
    json!({
        "M": fmt_rational(&row.m),
        "M_float": to_f64(&row.m),
        "R_ach": fmt_rational(&row.r_ach),
        "R_ach_float": to_f64(&row.r_ach),
        "R_conv": fmt_rational(&row.r_conv),
        "R_conv_float": to_f64(&row.r_conv),
        "tight": row.tight,
    })
}

fn cmd_tradeoff(a: &TradeoffArgs) -> Result<Output> {
    if a.n != 2 {
        return Err(usage("the tradeoff region is only available for N = 2"));
    }
    if a.k < 2 {
        return Err(usage("the tradeoff region needs K >= 2"));
    }
    let step = parse_rational(&a.grid)?;
    let rows = tightness_report(a.k, &step)?;
    let body = match a.format {
        Format::Csv => {
            let mut s = String::from("M,R_ach,R_conv,tight\n");
            for row in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    fmt_rational(&row.m),
                    fmt_rational(&row.r_ach),
                    fmt_rational(&row.r_conv),
                    row.tight
                );
            }
            s
        }
        Format::Json => {
            let v: Vec<_> = rows.iter().map(row_json).collect();
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Text => {
            let curve = achievable_curve(2, a.k)?;
            let mut s = format!("N=2 K={} grid={}\ncorners:", a.k, step);
            for c in curve.corners() {
                let _ = write!(s, " {c}");
            }
            s.push('\n');
            let _ = writeln!(s, "{:>10} {:>10} {:>10} tight", "M", "R_ach", "R_conv");
            for row in &rows {
                let _ = writeln!(
                    s,
                    "{:>10} {:>10} {:>10} {}",
                    row.m, row.r_ach, row.r_conv, row.tight
                );
            }
            let loose = rows.iter().filter(|r| !r.tight).count();
            let _ = writeln!(
                s,
                "{} of {} grid points tight",
                rows.len() - loose,
                rows.len()
            );
            s
        }
    };
    Ok(Output { body, ok: true })
}
