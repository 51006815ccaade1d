mod config;
mod output;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heatcontent::asymptotics::{
    verify_expansion, verify_logplane, verify_recursion, DEFAULT_LOG_REL_TOL, DEFAULT_SLOPE_TOL, VERIFY_TOL,
};
use heatcontent::boundary::{heat_content_bc, verify_theorem51, BCSpec};
use heatcontent::coefficients::{c_boundary, c_n, ParamPair, RegionKind};
use heatcontent::ladder::{default_ladder, sigma_table};
use heatcontent::quadrature::{heat_content_interval, CutoffSpec, DataFunction, DEFAULT_TOL};
use heatcontent::spectral::{circle_line_log_excess, fourier_coefficients, heat_content_circle, DEFAULT_N_MAX};
use heatcontent::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use config::{Exponent, FileConfig, GridSpec};
use output::{num, Format, Record};

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config values or parameters outside a routine's domain (exit 2).
    Config(String),
    /// A computation that could not finish (exit 1).
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::LogPlane { .. } | Error::Region { .. } | Error::Truncation { .. } => {
                Failure::Config(e.to_string())
            }
            Error::Pole { .. } | Error::MaxRefinement { .. } | Error::DivisionNotExact { .. } => {
                Failure::Compute(e.to_string())
            }
        }
    }
}

#[derive(Parser)]
#[command(name = "heatcontent", version, about = "Heat content of power-type data on [0, 1]")]
struct Cli {
    /// key=value file using the long flag names; flags on the command line win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// worker threads (falls back to HEATCONTENT_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Pair {
    #[arg(short = 'a', allow_hyphen_values = true)]
    a: Option<Exponent>,
    #[arg(short = 'b', allow_hyphen_values = true)]
    b: Option<Exponent>,
}

#[derive(Args, Default)]
struct Grid {
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// c(a,b) and c_0..c_N with the region tag
    Coeff {
        #[command(flatten)]
        pair: Pair,
        #[arg(short = 'N', long = "terms")]
        terms: Option<usize>,
    },
    /// h_{a,b}(t) by quadrature
    Heat {
        #[command(flatten)]
        pair: Pair,
        #[arg(short = 't')]
        t: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// none, default, or "plateau,support"
        #[arg(long)]
        cutoff: Option<String>,
    },
    /// quadrature against the N-term series on a t grid
    Verify {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        grid: Grid,
        #[arg(short = 'N', long = "terms")]
        terms: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        slope_tol: Option<f64>,
        /// check this many pseudo-random pairs instead of (a, b)
        #[arg(long)]
        sweep: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// log-plane check at a + b = 1 − 2k
    Logverify {
        #[arg(short = 'a', allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(short = 'k')]
        k: Option<u32>,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        rel_tol: Option<f64>,
    },
    /// the three-term recursion in a
    Recursion {
        #[command(flatten)]
        pair: Pair,
        #[arg(short = 't')]
        t: Option<f64>,
        #[arg(short = 'N', long = "terms")]
        terms: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// certify the division ladder and report σ_{k,ℓ}
    Ladder {
        #[arg(short = 'k', value_parser = clap::value_parser!(u32).range(0..=3))]
        k: Option<u32>,
        /// write σ as JSON to this path (stdout when no path is given)
        #[arg(long, num_args = 0..=1)]
        dump: Option<Option<PathBuf>>,
    },
    /// circle heat content of x^{−a} and x^{−b} data from Fourier coefficients
    Spectral {
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<f64>,
        #[arg(short = 't')]
        t: Option<f64>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        cutoff: Option<String>,
        /// also report ln(β_circle − β_line)
        #[arg(long)]
        excess: bool,
    },
    /// Dirichlet/Neumann heat content, at one t or verified on a grid
    Bc {
        #[command(flatten)]
        pair: Pair,
        /// DD, NN, DN or ND
        #[arg(long)]
        bc: Option<String>,
        #[arg(short = 't')]
        t: Option<f64>,
        #[command(flatten)]
        grid: Grid,
        #[arg(short = 'N', long = "terms")]
        terms: Option<usize>,
        #[arg(long)]
        slope_tol: Option<f64>,
    },
}

/// Rendered report plus whether every check in it passed.
struct Outcome {
    text: String,
    pass: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, pass: true }
    }
}

fn pair(cfg: &FileConfig, p: Pair, default: Option<(f64, f64)>) -> Result<ParamPair, Failure> {
    let (a, b) = match default {
        Some((da, db)) => (
            cfg.or(p.a, "a", Exponent(da.into()))?,
            cfg.or(p.b, "b", Exponent(db.into()))?,
        ),
        None => (cfg.require(p.a, "a")?, cfg.require(p.b, "b")?),
    };
    Ok(ParamPair::new(a.0, b.0)?)
}

fn grid(cfg: &FileConfig, g: Grid, default: (f64, f64, usize)) -> Result<Vec<f64>, Failure> {
    GridSpec {
        t_min: cfg.or(g.t_min, "t-min", default.0)?,
        t_max: cfg.or(g.t_max, "t-max", default.1)?,
        points: cfg.or(g.points, "points", default.2)?,
    }
    .build()
}

fn cutoff(spec: &str) -> Result<CutoffSpec, Failure> {
    match spec.trim() {
        "none" => Ok(CutoffSpec::None),
        "default" => Ok(CutoffSpec::default()),
        s => {
            let parts: Vec<f64> = s
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::Config(format!("cutoff must be none, default or plateau,support; got {s:?}")))?;
            match parts[..] {
                [p, q] => Ok(CutoffSpec::smooth_step(p, q)?),
                _ => Err(Failure::Config(format!("cutoff needs two values, got {s:?}"))),
            }
        }
    }
}

fn complex_pair(z: heatcontent::Complex) -> serde_json::Value {
    json!([z.re, z.im])
}

fn region_name(p: &ParamPair) -> String {
    match p.classify().kind {
        RegionKind::InO => "O".into(),
        RegionKind::LogPlane(k) => format!("log plane k={k}"),
        RegionKind::Invalid => "invalid".into(),
    }
}

fn cmd_coeff(cfg: &FileConfig, p: Pair, terms: Option<usize>, format: Format) -> Result<Outcome, Failure> {
    let p = pair(cfg, p, None)?;
    let n = cfg.or(terms, "terms", 2)?;
    p.require_off_log_plane()?;
    let mut rows = vec![((1.0 - p.s()) / 2.0, c_boundary(&p)?)];
    for k in 0..=n {
        rows.push(((k as f64 / 2.0).into(), c_n(k, &p)?));
    }
    let strips: Vec<i32> = p.classify().sub_regions;
    let text = match format {
        Format::Csv => {
            let mut out = String::from("power_re,power_im,coeff_re,coeff_im\n");
            for (pw, c) in &rows {
                out += &format!("{},{},{},{}\n", num(pw.re), num(pw.im), num(c.re), num(c.im));
            }
            let strips: Vec<String> = strips.iter().map(|k| k.to_string()).collect();
            out += &format!("region,{}\nstrips,{}\n", region_name(&p), strips.join(";"));
            out
        }
        Format::Json => output::json_line(&json!({
            "a": complex_pair(p.a),
            "b": complex_pair(p.b),
            "terms": rows.iter().map(|(pw, c)| json!({"power": complex_pair(*pw), "coeff": complex_pair(*c)})).collect::<Vec<_>>(),
            "region": region_name(&p),
            "strips": strips,
        })),
    };
    Ok(Outcome::ok(text))
}

fn cmd_heat(
    cfg: &FileConfig,
    p: Pair,
    t: Option<f64>,
    tol: Option<f64>,
    cut: Option<String>,
    format: Format,
) -> Result<Outcome, Failure> {
    let p = pair(cfg, p, None)?;
    let t = cfg.require(t, "t")?;
    let tol = cfg.or(tol, "tol", DEFAULT_TOL)?;
    let cut = match cfg.pick(cut, "cutoff")? {
        None => None,
        Some(s) => match cutoff(&s)? {
            CutoffSpec::None => None,
            c => Some((c, c)),
        },
    };
    let r = heat_content_interval(&p, t, cut, tol)?;
    let rec = Record::new()
        .real("t", t)
        .real("value", r.value)
        .real("error_estimate", r.error_estimate)
        .int("nodes_used", r.nodes_used);
    Ok(Outcome::ok(rec.render(format)))
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    cfg: &FileConfig,
    p: Pair,
    g: Grid,
    terms: Option<usize>,
    tol: Option<f64>,
    slope_tol: Option<f64>,
    sweep: Option<usize>,
    seed: Option<u64>,
    format: Format,
) -> Result<Outcome, Failure> {
    let grid = grid(cfg, g, (1e-5, 1e-2, 6))?;
    let n = cfg.or(terms, "terms", 3)?;
    let tol = cfg.or(tol, "tol", VERIFY_TOL)?;
    let slope_tol = cfg.or(slope_tol, "slope-tol", DEFAULT_SLOPE_TOL)?;
    if let Some(count) = cfg.pick(sweep, "sweep")? {
        let seed = cfg.or(seed, "seed", 0)?;
        return sweep_pairs(&grid, n, tol, slope_tol, count, seed, format);
    }
    let p = pair(cfg, p, Some((0.3, 0.4)))?;
    let r = verify_expansion(&p, &grid, n, tol, slope_tol)?;
    Ok(Outcome {
        text: output::verification(&r, format),
        pass: r.pass,
    })
}

/// Pairs drawn uniformly from [−1.5, 0.9)², keeping a + b at least 0.1 from
/// every log plane.
fn sweep_pairs(
    grid: &[f64],
    n: usize,
    tol: f64,
    slope_tol: f64,
    count: usize,
    seed: u64,
    format: Format,
) -> Result<Outcome, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let (a, b): (f64, f64) = (rng.gen_range(-1.5..0.9), rng.gen_range(-1.5..0.9));
        let k = ((1.0 - a - b) / 2.0).round();
        if k >= 0.0 && (a + b - (1.0 - 2.0 * k)).abs() < 0.1 {
            continue;
        }
        pairs.push((a, b));
    }
    let mut reports = Vec::with_capacity(count);
    for &(a, b) in &pairs {
        reports.push(verify_expansion(&ParamPair::real(a, b)?, grid, n, tol, slope_tol)?);
    }
    let pass = reports.iter().all(|r| r.pass);
    let text = match format {
        Format::Csv => {
            let mut out = String::from("a,b,fitted_exponent,predicted_exponent,pass\n");
            for ((a, b), r) in pairs.iter().zip(&reports) {
                out += &format!(
                    "{},{},{},{},{}\n",
                    num(*a),
                    num(*b),
                    num(r.fitted_exponent),
                    num(r.predicted_exponent),
                    r.pass
                );
            }
            out += &format!("pass,{pass}\n");
            out
        }
        Format::Json => output::json_line(&json!({
            "seed": seed,
            "a": pairs.iter().map(|p| p.0).collect::<Vec<_>>(),
            "b": pairs.iter().map(|p| p.1).collect::<Vec<_>>(),
            "fitted_exponent": reports.iter().map(|r| r.fitted_exponent).collect::<Vec<_>>(),
            "predicted_exponent": reports.iter().map(|r| r.predicted_exponent).collect::<Vec<_>>(),
            "pass_each": reports.iter().map(|r| r.pass).collect::<Vec<_>>(),
            "pass": pass,
        })),
    };
    Ok(Outcome { text, pass })
}

fn cmd_logverify(
    cfg: &FileConfig,
    a: Option<f64>,
    k: Option<u32>,
    g: Grid,
    rel_tol: Option<f64>,
    format: Format,
) -> Result<Outcome, Failure> {
    let a = cfg.require(a, "a")?;
    let k = cfg.or(k, "k", 0)?;
    let grid = grid(cfg, g, (1e-5, 1e-2, if k == 0 { 8 } else { 12 }))?;
    let rel_tol = cfg.or(rel_tol, "rel-tol", DEFAULT_LOG_REL_TOL)?;
    let r = verify_logplane(a, k, &grid, rel_tol)?;
    Ok(Outcome {
        text: output::verification(&r, format),
        pass: r.pass,
    })
}

fn cmd_recursion(
    cfg: &FileConfig,
    p: Pair,
    t: Option<f64>,
    terms: Option<usize>,
    tol: Option<f64>,
    format: Format,
) -> Result<Outcome, Failure> {
    let p = pair(cfg, p, None)?;
    let t = cfg.require(t, "t")?;
    let n = cfg.or(terms, "terms", 8)?;
    let tol = cfg.or(tol, "tol", 1e-8)?;
    let r = verify_recursion(&p, t, n)?;
    let pass = r.residual <= tol.max(10.0 * r.floor);
    let rec = Record::new()
        .real("t", t)
        .real("residual", r.residual)
        .real("floor", r.floor)
        .flag("pass", pass);
    Ok(Outcome {
        text: rec.render(format),
        pass,
    })
}

fn cmd_ladder(
    cfg: &FileConfig,
    k: Option<u32>,
    dump: Option<Option<PathBuf>>,
    format: Format,
) -> Result<Outcome, Failure> {
    let k = cfg.require(k, "k")?;
    if k > 3 {
        return Err(Failure::Config(format!("k must lie in 0..=3, got {k}")));
    }
    let ladder = default_ladder()?;
    if let Some(bad) = ladder.certificates.iter().find(|c| !c.passed()) {
        return Err(Failure::Compute(format!("division not exact at step {}", bad.step)));
    }
    let table = sigma_table(k as usize)?;
    let pass = table.chain_agrees && table.poles_excluded();
    let sigma = table.to_json();
    let text = match dump {
        Some(None) => output::json_line(&sigma),
        Some(Some(path)) => {
            std::fs::write(&path, output::json_line(&sigma))
                .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
            summary(ladder.certificates.len(), table, pass).render(format)
        }
        None => summary(ladder.certificates.len(), table, pass).render(format),
    };
    Ok(Outcome { text, pass })
}

fn summary(certified: usize, table: &heatcontent::ladder::SigmaTable, pass: bool) -> Record {
    let factors: Vec<String> = table
        .denominator_factors
        .iter()
        .map(|(j, m)| format!("(a+b+{j})^{m}"))
        .collect();
    Record::new()
        .int("k", table.k)
        .int("certified_divisions", certified)
        .int("sigma_entries", table.entries.len())
        .flag("chain_agrees", table.chain_agrees)
        .value("denominator_factors", json!(factors), factors.join(" "))
        .flag("pass", pass)
}

#[allow(clippy::too_many_arguments)]
fn cmd_spectral(
    cfg: &FileConfig,
    phi: Option<f64>,
    rho: Option<f64>,
    t: Option<f64>,
    n_max: Option<usize>,
    cut: Option<String>,
    excess: bool,
    format: Format,
) -> Result<Outcome, Failure> {
    let (pa, ra) = (cfg.or(phi, "phi", 0.0)?, cfg.or(rho, "rho", 0.0)?);
    let t = cfg.require(t, "t")?;
    let n_max = cfg.or(n_max, "n-max", DEFAULT_N_MAX)?;
    let cut = cutoff(&cfg.or(cut, "cutoff", "none".to_string())?)?;
    let (phi, rho) = (DataFunction::power(pa, cut), DataFunction::power(ra, cut));
    let value = heat_content_circle(
        &fourier_coefficients(&phi, n_max)?,
        &fourier_coefficients(&rho, n_max)?,
        t,
    )?;
    let mut rec = Record::new()
        .real("t", t)
        .real("circle_value", value)
        .int("n_max", n_max);
    if excess || cfg.or(None, "excess", false)? {
        rec = rec.real("log_excess", circle_line_log_excess(&phi, &rho, t)?);
    }
    Ok(Outcome::ok(rec.render(format)))
}

#[allow(clippy::too_many_arguments)]
fn cmd_bc(
    cfg: &FileConfig,
    p: Pair,
    bc: Option<String>,
    t: Option<f64>,
    g: Grid,
    terms: Option<usize>,
    slope_tol: Option<f64>,
    format: Format,
) -> Result<Outcome, Failure> {
    let p = pair(cfg, p, Some((0.3, 0.4)))?;
    let bc_text = cfg.or(bc, "bc", "DD".to_string())?;
    let bc = BCSpec::parse(&bc_text)
        .ok_or_else(|| Failure::Config(format!("bc must be one of DD, NN, DN, ND; got {bc_text:?}")))?;
    if let Some(t) = cfg.pick(t, "t")? {
        let r = heat_content_bc(&p, t, bc)?;
        let rec = Record::new()
            .real("t", t)
            .real("value", r.value)
            .real("error_estimate", r.error_estimate)
            .int("nodes_used", r.nodes_used);
        return Ok(Outcome::ok(rec.render(format)));
    }
    let grid = grid(cfg, g, (1e-5, 1e-2, 6))?;
    let n = cfg.or(terms, "terms", 3)?;
    let slope_tol = cfg.or(slope_tol, "slope-tol", DEFAULT_SLOPE_TOL)?;
    let r = verify_theorem51(&p, &grid, bc, n, slope_tol)?;
    Ok(Outcome {
        text: output::verification(&r, format),
        pass: r.pass,
    })
}

fn run(cli: Cli) -> Result<(Outcome, Option<PathBuf>), Failure> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    let threads = match cfg.pick(cli.threads, "threads")? {
        Some(n) => Some(n),
        None => match std::env::var("HEATCONTENT_THREADS") {
            Ok(v) => Some(
                v.parse()
                    .map_err(|_| Failure::Config(format!("HEATCONTENT_THREADS must be a count, got {v:?}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Config("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let format = cfg.or(cli.format, "format", Format::Csv)?;
    let out = cfg.pick(cli.out, "out")?;
    let outcome = match cli.command {
        Command::Coeff { pair, terms } => cmd_coeff(&cfg, pair, terms, format),
        Command::Heat { pair, t, tol, cutoff } => cmd_heat(&cfg, pair, t, tol, cutoff, format),
        Command::Verify {
            pair,
            grid,
            terms,
            tol,
            slope_tol,
            sweep,
            seed,
        } => cmd_verify(&cfg, pair, grid, terms, tol, slope_tol, sweep, seed, format),
        Command::Logverify { a, k, grid, rel_tol } => cmd_logverify(&cfg, a, k, grid, rel_tol, format),
        Command::Recursion { pair, t, terms, tol } => cmd_recursion(&cfg, pair, t, terms, tol, format),
        Command::Ladder { k, dump } => cmd_ladder(&cfg, k, dump, format),
        Command::Spectral {
            phi,
            rho,
            t,
            n_max,
            cutoff,
            excess,
        } => cmd_spectral(&cfg, phi, rho, t, n_max, cutoff, excess, format),
        Command::Bc {
            pair,
            bc,
            t,
            grid,
            terms,
            slope_tol,
        } => cmd_bc(&cfg, pair, bc, t, grid, terms, slope_tol, format),
    }?;
    Ok((outcome, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, out) = match run(cli) {
        Ok(v) => v,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let written = match &out {
        Some(path) => std::fs::write(path, &outcome.text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(outcome.text.as_bytes())
            .map_err(|e| format!("cannot write to stdout: {e}")),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
