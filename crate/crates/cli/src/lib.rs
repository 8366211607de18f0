//! The `bilab` command line: apply operators to sampled signals, run the identity
//! suite, and produce the Gaussian scans and norm searches as CSV and JSON files.
//!
//! Exit codes: 0 on success, 1 when input is rejected (bad flags, unreadable or
//! malformed files, grids that fail the aliasing guard), 2 when a numerical check
//! runs but misses its tolerance.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use bilinear_core::engine::{apply_bilinear, apply_bilinear_direct, apply_delta_symbol};
use bilinear_core::normlab::{
    clip_lambdas, estimate_norm, exponent_window_report, gaussian_scan, log_grid, SearchConfig,
};
use bilinear_core::signal::{
    ensure_band_limited, make_gaussian, random_band_limited, wave_packet, ExponentTriple, GridSpec, SampledSignal,
};
use bilinear_core::symbol::{read_symbol_csv, AnySymbol, Symbol1D, SymbolSpec};
use bilinear_core::symmetry::{run_suite, IdentityId, ResidualRecord, EXACT_TOL};
use bilinear_core::Error;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Relative out-of-band energy tolerated in signals read from files.
const FILE_BAND_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "bilab", version, about = "Bilinear Fourier multiplier laboratory")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Number of grid points, a power of two.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Window length L; samples sit at x_j = (j - n/2) L/n.
    #[arg(long, global = true)]
    length: Option<f64>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance override for the command's pass/fail check.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate B(f,g) on the grid.
    ///
    /// CSV columns: x, re, im.
    Apply(ApplyArgs),
    /// Run the identity suite and write residual records.
    Verify(VerifyArgs),
    /// Search for a lower bound on the operator norm.
    ///
    /// CSV columns: evaluation, ratio, best.
    NormScan(NormScanArgs),
    /// Compare B_M(G_λ,G_λ) with its closed form across λ.
    ///
    /// CSV columns: lambda, integral_re, integral_im, deviation, fitted_deviation.
    GaussianLemma(LemmaArgs),
    /// Track Gaussian witness ratios across λ for several exponent triples.
    ///
    /// CSV columns: p1, p2, p3, lambda, ratio.
    WindowReport(WindowArgs),
    /// Time the literal double sum against the regrouped evaluation on random
    /// half-band inputs.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct ApplyArgs {
    /// hilbert | sign | one | const:RE[,IM] | frac:ALPHA | gauss:WIDTH | measure:FILE.json | json:FILE | csv:FILE
    #[arg(long)]
    symbol: String,
    /// gauss:LAMBDA | packet:CENTER,WIDTH,FREQ | csv:FILE | json:FILE
    #[arg(long)]
    f: String,
    /// Second input, same forms as --f.
    #[arg(long)]
    g: String,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the result as a JSON signal.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// all, or a comma-separated list of identity ids.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Random cases per identity.
    #[arg(long, default_value_t = 50)]
    cases: usize,
    /// JSON report file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Exponents {
    /// Exponent of the first input.
    #[arg(long, default_value = "2")]
    p1: String,
    /// Exponent of the second input.
    #[arg(long, default_value = "2")]
    p2: String,
    /// Exponent of the output.
    #[arg(long, default_value = "1")]
    p3: String,
}

#[derive(Debug, Args)]
struct NormScanArgs {
    /// Symbol, same forms as in apply.
    #[arg(long)]
    symbol: String,
    #[command(flatten)]
    exponents: Exponents,
    /// Number of ratio evaluations.
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    /// CSV output file, one row per evaluation.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LambdaGrid {
    /// Number of log-spaced λ values.
    #[arg(long, default_value_t = 17)]
    lambdas: usize,
    /// Smallest λ.
    #[arg(long, default_value_t = 0.125)]
    lambda_min: f64,
    /// Largest λ.
    #[arg(long, default_value_t = 8.0)]
    lambda_max: f64,
}

#[derive(Debug, Args)]
struct LemmaArgs {
    /// Symbol, same forms as in apply.
    #[arg(long)]
    symbol: String,
    #[command(flatten)]
    exponents: Exponents,
    #[command(flatten)]
    grid: LambdaGrid,
    /// Compare with the fitted constant instead of √π/2.
    #[arg(long)]
    fit: bool,
    /// CSV output file, one row per λ.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WindowArgs {
    /// Symbol, same forms as in apply.
    #[arg(long)]
    symbol: String,
    /// Semicolon-separated triples, e.g. "2,2,1;4,4,1".
    #[arg(long)]
    triples: String,
    #[command(flatten)]
    grid: LambdaGrid,
    /// CSV output file, one row per triple and λ.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Symbol, same forms as in apply.
    #[arg(long, default_value = "hilbert")]
    symbol: String,
    /// Samples evaluated by the literal double sum.
    #[arg(long, default_value_t = 8)]
    points: usize,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Invalid(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the command line and returns the exit code, printing to stdout and stderr.
pub fn run<I: IntoIterator<Item = String>>(argv: I) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I: IntoIterator<Item = String>>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Apply(a) => apply(&cli.global, a, out),
        Command::Verify(a) => verify(&cli.global, a, out),
        Command::NormScan(a) => norm_scan(&cli.global, a, out),
        Command::GaussianLemma(a) => gaussian_lemma(&cli.global, a, out),
        Command::WindowReport(a) => window_report(&cli.global, a, out),
        Command::Bench(a) => bench(&cli.global, a, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Invalid(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Check(m)) => {
            let _ = writeln!(err, "check failed: {m}");
            2
        }
    }
}

fn grid_of(global: &Global, n: usize, length: f64) -> Result<GridSpec, Failure> {
    Ok(GridSpec::new(global.n.unwrap_or(n), global.length.unwrap_or(length))?)
}

fn read(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{path}: {e}")))
}

fn number(s: &str, what: &str) -> Result<f64, Failure> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Failure::Invalid(format!("{what}: {s:?} is not a number")))
}

fn numbers(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(',').map(|x| number(x, what)).collect()
}

/// Parses the symbol mini-language.
fn parse_symbol(spec: &str, grid: GridSpec) -> Result<AnySymbol, Failure> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let one = |s: SymbolSpec| -> Result<AnySymbol, Failure> { Ok(s.build(grid)?) };
    match name {
        "hilbert" | "sign" => one(SymbolSpec::Hilbert),
        "one" => one(SymbolSpec::Constant { re: 1.0, im: 0.0 }),
        "const" => {
            let v = numbers(arg, "const")?;
            match v.as_slice() {
                [re] => one(SymbolSpec::Constant { re: *re, im: 0.0 }),
                [re, im] => one(SymbolSpec::Constant { re: *re, im: *im }),
                _ => Err(Failure::Invalid("const takes RE or RE,IM".into())),
            }
        }
        "frac" => one(SymbolSpec::Fractional {
            alpha: number(arg, "frac")?,
        }),
        "gauss" => one(SymbolSpec::Gaussian {
            width: number(arg, "gauss")?,
        }),
        "measure" | "json" => {
            let s = SymbolSpec::from_json(&read(arg)?)?;
            if name == "measure" && !matches!(s, SymbolSpec::Measure { .. }) {
                return Err(Failure::Invalid(format!("{arg} does not describe a measure symbol")));
            }
            one(s)
        }
        "csv" => Ok(read_symbol_csv(File::open(arg).map_err(|e| Failure::Invalid(format!("{arg}: {e}")))?, grid)?),
        _ => Err(Failure::Invalid(format!("unknown symbol {spec:?}"))),
    }
}

fn parse_symbol_1d(spec: &str, grid: GridSpec) -> Result<Symbol1D, Failure> {
    match parse_symbol(spec, grid)? {
        AnySymbol::One(m) => Ok(m),
        AnySymbol::Two(_) => Err(Failure::Invalid(format!("{spec} is not a one-variable symbol"))),
    }
}

/// Parses a signal description; file signals must sit on `grid` and be band-limited.
fn parse_signal(spec: &str, grid: GridSpec) -> Result<SampledSignal, Failure> {
    let (name, arg) = spec
        .split_once(':')
        .ok_or_else(|| Failure::Invalid(format!("signal {spec:?} needs the form kind:argument")))?;
    let from_file = |f: SampledSignal| -> Result<SampledSignal, Failure> {
        if f.grid != grid {
            return Err(Failure::Invalid(format!(
                "{arg} has n = {}, L = {} but the run uses n = {}, L = {}",
                f.grid.n(),
                f.grid.length(),
                grid.n(),
                grid.length()
            )));
        }
        ensure_band_limited(&f, FILE_BAND_TOL)?;
        Ok(f)
    };
    match name {
        "gauss" => Ok(make_gaussian(number(arg, "gauss")?, grid)?),
        "packet" => match numbers(arg, "packet")?.as_slice() {
            [c, w, nu] if *w > 0.0 => {
                let f = wave_packet(grid, *c, *w, *nu);
                ensure_band_limited(&f, FILE_BAND_TOL)?;
                Ok(f)
            }
            _ => Err(Failure::Invalid("packet takes CENTER,WIDTH,FREQ with WIDTH > 0".into())),
        },
        "csv" => from_file(SampledSignal::read_csv(
            File::open(arg).map_err(|e| Failure::Invalid(format!("{arg}: {e}")))?,
        )?),
        "json" => from_file(SampledSignal::from_json(&read(arg)?)?),
        _ => Err(Failure::Invalid(format!("unknown signal kind {name:?}"))),
    }
}

fn parse_exponent(s: &str, name: &str) -> Result<f64, Failure> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => number(t, name),
    }
}

fn exponents(e: &Exponents) -> Result<ExponentTriple, Failure> {
    Ok(ExponentTriple::new(
        parse_exponent(&e.p1, "p1")?,
        parse_exponent(&e.p2, "p2")?,
        parse_exponent(&e.p3, "p3")?,
    )?)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?,
    ))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}

fn apply(global: &Global, a: &ApplyArgs, out: &mut dyn Write) -> Outcome {
    let grid = grid_of(global, 512, 64.0)?;
    let f = parse_signal(&a.f, grid)?;
    let g = parse_signal(&a.g, grid)?;
    let b = match parse_symbol(&a.symbol, grid)? {
        AnySymbol::One(m) => apply_delta_symbol(&m, &f, &g)?,
        AnySymbol::Two(m) => apply_bilinear(&m, &f, &g)?,
    };
    match &a.out {
        Some(p) => {
            let mut w = create(p)?;
            b.write_csv(&mut w)?;
            w.flush()?;
        }
        None => b.write_csv(&mut *out)?,
    }
    if let Some(p) = &a.json {
        write_text(p, &b.to_json()?)?;
    }
    Ok(())
}

fn parse_suite(s: &str) -> Result<Vec<IdentityId>, Failure> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(IdentityId::ALL.to_vec());
    }
    s.split(',')
        .map(|t| IdentityId::parse(t.trim()).map_err(Failure::from))
        .collect()
}

fn with_tolerance(r: &mut ResidualRecord, tol: f64) {
    if r.tolerance == EXACT_TOL {
        r.tolerance = tol;
        r.pass = r.residual < tol;
    }
}

fn verify(global: &Global, a: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    if global.n.is_some() || global.length.is_some() {
        return Err(Failure::Invalid("verify uses the grid of each identity; drop --n and --length".into()));
    }
    if a.cases == 0 {
        return Err(Failure::Invalid("--cases must be positive".into()));
    }
    let ids = parse_suite(&a.suite)?;
    let mut report = run_suite(&ids, a.cases, global.seed)?;
    if let Some(tol) = global.tol {
        if !(tol > 0.0) {
            return Err(Failure::Invalid(format!("--tol must be positive, got {tol}")));
        }
        report.records.iter_mut().for_each(|r| with_tolerance(r, tol));
        report.swap_controls.iter_mut().for_each(|r| with_tolerance(r, tol));
    }
    for id in &ids {
        let rs: Vec<&ResidualRecord> = report.records.iter().filter(|r| r.id == *id).collect();
        let worst = rs.iter().map(|r| r.residual).fold(0.0, f64::max);
        let fails = rs.iter().filter(|r| !r.pass).count();
        writeln!(
            out,
            "{:<10} cases {:>3}  worst {:e}  tol {:e}  {}",
            id.name(),
            rs.len(),
            worst,
            rs.first().map(|r| r.tolerance).unwrap_or(0.0),
            if fails == 0 { "PASS".to_string() } else { format!("FAIL ({fails})") }
        )?;
    }
    for r in &report.swap_controls {
        writeln!(
            out,
            "{:<10} exponent swap  residual {:e}  {}",
            r.id.name(),
            r.residual,
            if r.pass { "NOT DETECTED" } else { "detected" }
        )?;
    }
    if let Some(p) = &a.json {
        write_text(p, &report.to_json()?)?;
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Check("identity residuals over tolerance".into()))
    }
}

fn norm_scan(global: &Global, a: &NormScanArgs, out: &mut dyn Write) -> Outcome {
    let grid = grid_of(global, 128, 16.0)?;
    let e = exponents(&a.exponents)?;
    let m = parse_symbol(&a.symbol, grid)?.to_2d();
    let est = estimate_norm(
        &m,
        &e,
        &SearchConfig {
            budget: a.budget,
            seed: global.seed,
        },
    )?;
    if let Some(p) = &a.out {
        let mut w = create(p)?;
        writeln!(w, "evaluation,ratio,best")?;
        for (i, (r, b)) in est.trace.iter().zip(est.best_so_far()).enumerate() {
            writeln!(w, "{i},{r},{b}")?;
        }
        w.flush()?;
    }
    let summary = json!({ "schema": 1, "estimate": est.summary() });
    writeln!(out, "norm lower bound {} after {} evaluations", est.value, est.trace.len())?;
    if let Some(p) = &a.json {
        write_text(p, &pretty(&summary))?;
    }
    Ok(())
}

fn lambdas(g: &LambdaGrid, grid: GridSpec, out: &mut dyn Write) -> Result<Vec<f64>, Failure> {
    let all = log_grid(g.lambda_min, g.lambda_max, g.lambdas)?;
    let (kept, dropped) = clip_lambdas(&all, grid);
    if !dropped.is_empty() {
        let list: Vec<String> = dropped.iter().map(|l| l.to_string()).collect();
        writeln!(out, "guard drops lambda = {}", list.join(", "))?;
    }
    if kept.is_empty() {
        return Err(Failure::Invalid(format!(
            "no lambda in [{}, {}] is resolved by n = {}, L = {}",
            g.lambda_min,
            g.lambda_max,
            grid.n(),
            grid.length()
        )));
    }
    Ok(kept)
}

fn gaussian_lemma(global: &Global, a: &LemmaArgs, out: &mut dyn Write) -> Outcome {
    let grid = grid_of(global, 4096, 64.0)?;
    let e = exponents(&a.exponents)?;
    let m = parse_symbol_1d(&a.symbol, grid)?;
    let ls = lambdas(&a.grid, grid, out)?;
    let r = gaussian_scan(&m, &e, &ls)?;
    if let Some(p) = &a.out {
        let mut w = create(p)?;
        writeln!(w, "lambda,integral_re,integral_im,deviation,fitted_deviation")?;
        for pt in &r.points {
            writeln!(
                w,
                "{},{},{},{},{}",
                pt.lambda, pt.integral_re, pt.integral_im, pt.deviation, pt.fitted_deviation
            )?;
        }
        w.flush()?;
    }
    let tol = global.tol.unwrap_or(1e-6);
    let dev = if a.fit { r.max_fitted_deviation } else { r.max_deviation };
    match r.slope {
        Some(s) => writeln!(
            out,
            "slope {s} (predicted {}, rms {})",
            r.predicted_slope,
            r.slope_residual.unwrap_or(0.0)
        )?,
        None => writeln!(out, "slope undefined: the Gaussian integral of M vanishes")?,
    }
    writeln!(
        out,
        "max deviation {dev:e} (fitted constant {}, tolerance {tol:e})",
        r.fitted_constant
    )?;
    if let Some(p) = &a.json {
        let v = json!({
            "schema": 1,
            "report": r,
            "tolerance": tol,
            "deviation_pass": dev < tol,
            "slope_pass": r.slope_ok(0.05),
        });
        write_text(p, &pretty(&v))?;
    }
    if dev < tol {
        Ok(())
    } else {
        Err(Failure::Check(format!("closed-form deviation {dev:e} exceeds {tol:e}")))
    }
}

fn parse_triples(s: &str) -> Result<Vec<ExponentTriple>, Failure> {
    s.split(';')
        .map(|t| {
            let ps: Vec<&str> = t.split(',').collect();
            match ps.as_slice() {
                [a, b, c] => Ok(ExponentTriple::new(
                    parse_exponent(a, "p1")?,
                    parse_exponent(b, "p2")?,
                    parse_exponent(c, "p3")?,
                )?),
                _ => Err(Failure::Invalid(format!("triple {t:?} needs three exponents"))),
            }
        })
        .collect()
}

fn window_report(global: &Global, a: &WindowArgs, out: &mut dyn Write) -> Outcome {
    let grid = grid_of(global, 4096, 64.0)?;
    let m = parse_symbol_1d(&a.symbol, grid)?;
    let triples = parse_triples(&a.triples)?;
    let ls = lambdas(&a.grid, grid, out)?;
    let rows = exponent_window_report(&m, &triples, &ls)?;
    for r in &rows {
        writeln!(
            out,
            "({}) window {}  variation {:.4}  {}",
            r.exponents.join(", "),
            if r.in_window { "inside " } else { "outside" },
            r.variation,
            if r.flagged { "FLAGGED: ratio runs away under dilation" } else { "bounded" }
        )?;
    }
    if let Some(p) = &a.out {
        let mut w = create(p)?;
        writeln!(w, "p1,p2,p3,lambda,ratio")?;
        for r in &rows {
            for (l, x) in r.lambdas.iter().zip(&r.ratios) {
                writeln!(w, "{},{},{},{l},{x}", r.exponents[0], r.exponents[1], r.exponents[2])?;
            }
        }
        w.flush()?;
    }
    if let Some(p) = &a.json {
        write_text(p, &pretty(&json!({ "schema": 1, "rows": rows })))?;
    }
    Ok(())
}

fn bench(global: &Global, a: &BenchArgs, out: &mut dyn Write) -> Outcome {
    let grid = grid_of(global, 128, 16.0)?;
    if a.points == 0 || a.points > grid.n() {
        return Err(Failure::Invalid(format!("--points must lie in 1..={}", grid.n())));
    }
    let m = parse_symbol(&a.symbol, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(global.seed);
    let f = random_band_limited(grid, grid.n() / 4, &mut rng);
    let g = random_band_limited(grid, grid.n() / 4, &mut rng);
    let t0 = Instant::now();
    let fast = match &m {
        AnySymbol::One(s) => apply_delta_symbol(s, &f, &g)?,
        AnySymbol::Two(s) => apply_bilinear(s, &f, &g)?,
    };
    let t_fast = t0.elapsed().as_secs_f64();
    let step = grid.n() / a.points;
    let at: Vec<usize> = (0..a.points).map(|i| i * step).collect();
    let m2 = m.to_2d();
    let t1 = Instant::now();
    let direct = apply_bilinear_direct(&m2, &f, &g, &at)?;
    let t_direct = t1.elapsed().as_secs_f64();
    let scale = fast.max_abs().max(f64::MIN_POSITIVE);
    let diff = at
        .iter()
        .zip(&direct)
        .map(|(j, d)| (fast.samples[*j] - d).norm())
        .fold(0.0, f64::max)
        / scale;
    let per_direct = t_direct / a.points as f64;
    let per_fast = t_fast / grid.n() as f64;
    writeln!(out, "n = {}, L = {}", grid.n(), grid.length())?;
    writeln!(out, "regrouped: {t_fast:.6} s for all {} samples", grid.n())?;
    writeln!(out, "direct:    {t_direct:.6} s for {} samples", a.points)?;
    writeln!(out, "per-sample speedup {:.1}", per_direct / per_fast.max(1e-12))?;
    writeln!(out, "max relative difference {diff:e}")?;
    let tol = global.tol.unwrap_or(1e-10);
    if diff < tol {
        Ok(())
    } else {
        Err(Failure::Check(format!("paths differ by {diff:e}")))
    }
}
