//! Group actions on signals and a residual checker for the commutation laws of
//! bilinear multipliers.
//!
//! Every identity is checked by computing both sides through separate code paths
//! and comparing the resulting samples. Inputs are band-limited random fields
//! drawn from a seeded ChaCha stream, so a `(id, seed)` pair names a case exactly.
//!
//! Dilations come in two flavors. [`dilate`] follows `D_t^p f(x) = t^{-1/p} f(x/t)`
//! for a signal localized in the window, as a function on the line; it is an
//! isometry and is guarded against wrap-around and aliasing. [`dilate_periodic`]
//! is the dyadic map of the torus onto itself: compression by `2^k` repeats the
//! signal `2^k` times, and stretching is its exact inverse on signals whose
//! spectrum lives on the `2^k` lattice. The identity suite uses the second one,
//! where every law holds to rounding.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{apply_bilinear, apply_bilinear_direct, apply_delta_symbol, apply_kernel};
use crate::error::{Error, Result};
use crate::signal::{
    dft, dtft, idft, lp_norm, random_band_limited, recip, wave_packet, ExponentTriple, GridSpec, SampledSignal,
    Spectrum,
};
use crate::symbol::{lift, mix, symbol_from_measure, Atom, AtomicMeasure, Symbol1D, Symbol2D};

/// Tolerance for identities that hold exactly on the grid.
pub const EXACT_TOL: f64 = 1e-9;
/// Tolerance for identities that rest on a quadrature or interpolation step.
pub const INTERP_TOL: f64 = 1e-6;
/// Tolerance for comparisons against a truncated principal value.
pub const PV_TOL: f64 = 1e-2;
/// Relative energy allowed to leak past a dilation guard.
const DILATION_GUARD: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `τ_y f(x) = f(x - y)`; `y` must be a whole number of samples.
pub fn translate(f: &SampledSignal, y: f64) -> Result<SampledSignal> {
    let shift = steps(y, f.grid.dx(), "translation")?;
    Ok(translate_steps(f, shift))
}

/// Translation by `shift·dx`, a cyclic rotation of the samples.
pub fn translate_steps(f: &SampledSignal, shift: i64) -> SampledSignal {
    let n = f.grid.n() as i64;
    let samples = (0..n)
        .map(|j| f.samples[(j - shift).rem_euclid(n) as usize])
        .collect();
    SampledSignal {
        grid: f.grid,
        samples,
    }
}

/// `M_y f(x) = e^{2πi y x} f(x)`.
pub fn modulate(f: &SampledSignal, y: f64) -> SampledSignal {
    let g = f.grid;
    let samples = f
        .samples
        .iter()
        .enumerate()
        .map(|(j, z)| z * Complex64::from_polar(1.0, 2.0 * PI * y * g.x(j)))
        .collect();
    SampledSignal { grid: g, samples }
}

fn steps(y: f64, unit: f64, what: &str) -> Result<i64> {
    let r = y / unit;
    let k = r.round();
    if !r.is_finite() || (r - k).abs() > 1e-9 * r.abs().max(1.0) {
        return Err(Error::NotGridAligned(format!("{what} {y} is not a multiple of {unit}")));
    }
    Ok(k as i64)
}

/// `Some(k)` when `t = 2^k` exactly.
pub fn dyadic_exponent(t: f64) -> Option<i32> {
    if !(t.is_finite() && t > 0.0) {
        return None;
    }
    let k = t.log2().round();
    (k.abs() < 60.0 && 2f64.powi(k as i32) == t).then_some(k as i32)
}

fn check_dilation(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("dilation t must be positive, got {t}")));
    }
    Ok(())
}

/// Relative energy of `f` outside `|x| < radius`.
fn spatial_leak(f: &SampledSignal, radius: f64) -> f64 {
    let g = f.grid;
    let (mut inside, mut outside) = (0.0, 0.0);
    for (j, z) in f.samples.iter().enumerate() {
        if g.x(j).abs() < radius {
            inside += z.norm_sqr();
        } else {
            outside += z.norm_sqr();
        }
    }
    let total = inside + outside;
    if total == 0.0 {
        0.0
    } else {
        (outside / total).sqrt()
    }
}

/// Relative energy of `f̂` outside `|ξ| < cutoff`.
fn spectral_leak(f: &SampledSignal, cutoff: f64) -> f64 {
    let spec = dft(f);
    let g = f.grid;
    let (mut inside, mut outside) = (0.0, 0.0);
    for (p, c) in spec.coeffs.iter().enumerate() {
        if g.xi(p).abs() < cutoff {
            inside += c.norm_sqr();
        } else {
            outside += c.norm_sqr();
        }
    }
    let total = inside + outside;
    if total == 0.0 {
        0.0
    } else {
        (outside / total).sqrt()
    }
}

/// `D_t^p f(x) = t^{-1/p} f(x/t)` for a signal localized in the window.
///
/// Stretching (`t > 1`) requires `f` to live in `|x| < L/(2t)` so that the result
/// still fits; compressing requires `f̂` to live in `|ξ| < t·n/(2L)` so that the
/// result is still resolved. Dyadic compression picks samples directly, every
/// other `t` goes through the transform: `(D_t^p f)^(ξ) = t^{1-1/p} f̂(tξ)`.
pub fn dilate(f: &SampledSignal, t: f64, p: f64) -> Result<SampledSignal> {
    check_dilation(t)?;
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidExponent(format!("p must be positive, got {p}")));
    }
    if t == 1.0 {
        return Ok(f.clone());
    }
    let g = f.grid;
    let guard = |leak: f64, what: &str| -> Result<()> {
        if leak > DILATION_GUARD {
            Err(Error::AliasingGuard {
                lambda: t,
                reason: format!("{what} leaks {leak:e} of the energy"),
            })
        } else {
            Ok(())
        }
    };
    if t > 1.0 {
        guard(spatial_leak(f, 0.5 * g.length() / t), "stretched signal")?;
    } else {
        guard(spectral_leak(f, 0.5 * t * g.n() as f64 / g.length()), "compressed spectrum")?;
    }
    let scale = t.powf(-recip(p));
    match dyadic_exponent(t) {
        Some(k) if k < 0 => {
            let s = 1i64 << (-k);
            let n = g.n() as i64;
            let h = n / 2;
            let samples = (0..n)
                .map(|j| {
                    let i = s * (j - h) + h;
                    if (0..n).contains(&i) {
                        f.samples[i as usize] * scale
                    } else {
                        ZERO
                    }
                })
                .collect();
            Ok(SampledSignal { grid: g, samples })
        }
        Some(k) => {
            let spec = dft(f);
            let s = 1i64 << k;
            let c = t * scale;
            let coeffs = (0..g.n()).map(|p| spec.at(s * g.k(p)) * c).collect();
            Ok(idft(&Spectrum { grid: g, coeffs }))
        }
        None => {
            let c = t * scale;
            let coeffs: Vec<Complex64> = (0..g.n())
                .into_par_iter()
                .map(|p| dtft(f, t * g.xi(p)) * c)
                .collect();
            Ok(idft(&Spectrum { grid: g, coeffs }))
        }
    }
}

/// Dyadic dilation of the torus onto itself.
///
/// For `t = 2^{-k}` the result is `t^{-1/p} f(x/t)` with `f` read periodically,
/// which repeats the signal `2^k` times. For `t = 2^k` the spectrum of `f` must sit
/// on multiples of `2^k` (up to `1e-12` of its energy) and the result is
/// `t^{-1/p}` times one period stretched to fill the window. This inverts the
/// compression exactly on signals band-limited to `|k| < n/2^{k+1}`.
pub fn dilate_periodic(f: &SampledSignal, t: f64, p: f64) -> Result<SampledSignal> {
    check_dilation(t)?;
    let k = dyadic_exponent(t)
        .ok_or_else(|| Error::NotGridAligned(format!("periodic dilation needs t = 2^k, got {t}")))?;
    let g = f.grid;
    let n = g.n() as i64;
    let s = 1i64 << k.unsigned_abs();
    if s > n {
        return Err(Error::InvalidParameter(format!("dilation {t} exceeds the grid")));
    }
    let scale = t.powf(-recip(p));
    if k <= 0 {
        let h = n / 2;
        let samples = (0..n)
            .map(|j| f.samples[(s * (j - h) + h).rem_euclid(n) as usize] * scale)
            .collect();
        return Ok(SampledSignal { grid: g, samples });
    }
    let spec = dft(f);
    let (mut on, mut off) = (0.0, 0.0);
    for (p, c) in spec.coeffs.iter().enumerate() {
        if g.k(p).rem_euclid(s) == 0 {
            on += c.norm_sqr();
        } else {
            off += c.norm_sqr();
        }
    }
    if off > 1e-24 * (on + off) {
        return Err(Error::NotGridAligned(format!(
            "spectrum is not supported on multiples of {s}"
        )));
    }
    let coeffs = (0..g.n()).map(|p| spec.at(s * g.k(p)) * scale).collect();
    Ok(idft(&Spectrum { grid: g, coeffs }))
}

/// Identities covered by the checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IdentityId {
    #[serde(rename = "TRAS_2D")]
    Tras2d,
    #[serde(rename = "MOD_2D")]
    Mod2d,
    #[serde(rename = "DIL_2D")]
    Dil2d,
    #[serde(rename = "HOM")]
    Hom,
    #[serde(rename = "TRAS_M")]
    TrasM,
    #[serde(rename = "MOD_M")]
    ModM,
    #[serde(rename = "DIL_M")]
    DilM,
    #[serde(rename = "TRAS1")]
    Tras1,
    #[serde(rename = "MOD1")]
    Mod1,
    #[serde(rename = "DIL2")]
    Dil2,
    #[serde(rename = "SANDWICH")]
    Sandwich,
    #[serde(rename = "MIX")]
    Mix,
    #[serde(rename = "EXP1")]
    Exp1,
    #[serde(rename = "F1")]
    F1,
    #[serde(rename = "F2")]
    F2,
    #[serde(rename = "KERNEL_EQ")]
    KernelEq,
    #[serde(rename = "MEASURE_EQ")]
    MeasureEq,
}

impl IdentityId {
    pub const ALL: [IdentityId; 17] = [
        IdentityId::Tras2d,
        IdentityId::Mod2d,
        IdentityId::Dil2d,
        IdentityId::Hom,
        IdentityId::TrasM,
        IdentityId::ModM,
        IdentityId::DilM,
        IdentityId::Tras1,
        IdentityId::Mod1,
        IdentityId::Dil2,
        IdentityId::Sandwich,
        IdentityId::Mix,
        IdentityId::Exp1,
        IdentityId::F1,
        IdentityId::F2,
        IdentityId::KernelEq,
        IdentityId::MeasureEq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::Tras2d => "TRAS_2D",
            IdentityId::Mod2d => "MOD_2D",
            IdentityId::Dil2d => "DIL_2D",
            IdentityId::Hom => "HOM",
            IdentityId::TrasM => "TRAS_M",
            IdentityId::ModM => "MOD_M",
            IdentityId::DilM => "DIL_M",
            IdentityId::Tras1 => "TRAS1",
            IdentityId::Mod1 => "MOD1",
            IdentityId::Dil2 => "DIL2",
            IdentityId::Sandwich => "SANDWICH",
            IdentityId::Mix => "MIX",
            IdentityId::Exp1 => "EXP1",
            IdentityId::F1 => "F1",
            IdentityId::F2 => "F2",
            IdentityId::KernelEq => "KERNEL_EQ",
            IdentityId::MeasureEq => "MEASURE_EQ",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown identity {s}")))
    }

    /// HOM and F2 compare quadratures; the rest hold exactly on the grid.
    pub fn tolerance(self) -> f64 {
        match self {
            IdentityId::Hom | IdentityId::F2 => INTERP_TOL,
            _ => EXACT_TOL,
        }
    }

    fn index(self) -> u64 {
        Self::ALL.iter().position(|i| *i == self).unwrap_or(0) as u64
    }

    /// Grid used by the random case generator.
    pub fn default_grid(self) -> GridSpec {
        let (n, l) = match self {
            IdentityId::Hom | IdentityId::F2 => (512, 32.0),
            _ => (128, 16.0),
        };
        GridSpec::new(n, l).expect("static grid")
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of a case, as reported. Shifts are in samples (`dx`) for spatial
/// actions and in bins (`dξ`) for frequency actions; `*_value` fields give the
/// physical amount.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseParams {
    pub seed: u64,
    pub n: usize,
    pub length: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shift: Option<[i64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shift_value: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dilation: Option<f64>,
    /// Exponents as text so that `inf` survives JSON.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exponents: Option<[String; 3]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub measure_coeffs: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub atoms: Option<usize>,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub swapped_exponent: bool,
}

/// Symbols and signals a case runs on. Which fields are present depends on the id.
#[derive(Debug, Clone)]
pub struct CaseInputs {
    pub f: SampledSignal,
    pub g: SampledSignal,
    pub m2: Option<Symbol2D>,
    pub m1: Option<Symbol1D>,
    pub side: Option<(Symbol1D, Symbol1D)>,
    pub phi: Option<SampledSignal>,
    pub measure: Option<AtomicMeasure>,
    pub exponents: Option<ExponentTriple>,
}

/// One instance of an identity: the law, its parameters, and the inputs.
#[derive(Debug, Clone)]
pub struct IdentityCase {
    pub id: IdentityId,
    pub params: CaseParams,
    pub inputs: CaseInputs,
}

/// Outcome of a check.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub id: IdentityId,
    pub params: CaseParams,
    pub lhs: Vec<Complex64>,
    pub rhs: Vec<Complex64>,
    pub residual: f64,
    pub tolerance: f64,
}

impl ResidualReport {
    pub fn pass(&self) -> bool {
        self.residual < self.tolerance
    }

    pub fn record(&self) -> ResidualRecord {
        ResidualRecord {
            id: self.id,
            params: self.params.clone(),
            residual: self.residual,
            tolerance: self.tolerance,
            pass: self.pass(),
        }
    }
}

/// The JSON form of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub id: IdentityId,
    pub params: CaseParams,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `max|a - b| / max(max|a|, max|b|)`, zero when both sides vanish.
pub fn relative_residual(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let scale = a.iter().chain(b).map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Table of iid complex normals, no closed form.
pub fn random_symbol1(grid: GridSpec, rng: &mut ChaCha8Rng) -> Symbol1D {
    let values = (0..2 * grid.n()).map(|_| normal(rng)).collect();
    Symbol1D::new(grid, values).expect("finite table")
}

pub fn random_symbol2(grid: GridSpec, rng: &mut ChaCha8Rng) -> Symbol2D {
    let values = (0..grid.n() * grid.n()).map(|_| normal(rng)).collect();
    Symbol2D::new(grid, values).expect("finite table")
}

/// Smooth symbol: a sum of three complex-weighted Gaussian bumps.
fn smooth_symbol1(grid: GridSpec, rng: &mut ChaCha8Rng) -> Symbol1D {
    let bumps: Vec<(Complex64, f64, f64)> = (0..3)
        .map(|_| (normal(rng), rng.random_range(-1.0..1.0), rng.random_range(0.5..1.0)))
        .collect();
    Symbol1D::from_fn(grid, move |v| {
        bumps
            .iter()
            .map(|(c, a, w)| c * (-((v - a) / w).powi(2)).exp())
            .sum()
    })
}

const P_IN: [f64; 6] = [1.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY];
const P_OUT: [f64; 5] = [0.5, 0.75, 1.0, 2.0, f64::INFINITY];

fn pick(rng: &mut ChaCha8Rng, xs: &[f64]) -> f64 {
    xs[rng.random_range(0..xs.len())]
}

/// Band-limited input compressed by two, so its spectrum sits on even bins.
fn even_lattice_input(grid: GridSpec, p: f64, rng: &mut ChaCha8Rng) -> SampledSignal {
    let phi = random_band_limited(grid, grid.n() / 8, rng);
    dilate_periodic(&phi, 0.5, p).expect("dyadic compression")
}

impl IdentityCase {
    /// The case named by `(id, seed)` on the id's default grid.
    pub fn random(id: IdentityId, seed: u64) -> Result<Self> {
        Self::random_on(id, seed, id.default_grid())
    }

    pub fn random_on(id: IdentityId, seed: u64, grid: GridSpec) -> Result<Self> {
        let n = grid.n();
        if n < 16 {
            return Err(Error::InvalidGrid(format!("identity cases need n >= 16, got {n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = CaseParams {
            seed,
            n,
            length: grid.length(),
            ..CaseParams::default()
        };
        let band = n / 4;
        let ni = n as i64;
        let (dx, dxi) = (grid.dx(), grid.dxi());
        let mut inputs = CaseInputs {
            f: SampledSignal::zeros(grid),
            g: SampledSignal::zeros(grid),
            m2: None,
            m1: None,
            side: None,
            phi: None,
            measure: None,
            exponents: None,
        };
        let fields = |rng: &mut ChaCha8Rng, inputs: &mut CaseInputs| {
            inputs.f = random_band_limited(grid, band, rng);
            inputs.g = random_band_limited(grid, band, rng);
        };
        match id {
            IdentityId::Tras2d | IdentityId::Mod2d => {
                fields(&mut rng, &mut inputs);
                inputs.m2 = Some(random_symbol2(grid, &mut rng));
                let a = rng.random_range(-ni / 8..=ni / 8);
                let b = rng.random_range(-ni / 8..=ni / 8);
                let unit = if id == IdentityId::Tras2d { dxi } else { dx };
                params.shift = Some([a, b]);
                params.shift_value = Some([a as f64 * unit, b as f64 * unit]);
            }
            IdentityId::Dil2d | IdentityId::Dil2 => {
                let e = ExponentTriple::new(pick(&mut rng, &P_IN), pick(&mut rng, &P_IN), pick(&mut rng, &P_OUT))?;
                inputs.f = even_lattice_input(grid, e.p1, &mut rng);
                inputs.g = even_lattice_input(grid, e.p2, &mut rng);
                if id == IdentityId::Dil2d {
                    inputs.m2 = Some(random_symbol2(grid, &mut rng));
                } else {
                    inputs.m1 = Some(random_symbol1(grid, &mut rng));
                }
                params.dilation = Some(2.0);
                params.exponents = Some(e.labels());
                inputs.exponents = Some(e);
            }
            IdentityId::DilM => {
                inputs.f = even_lattice_input(grid, 1.0, &mut rng);
                inputs.g = even_lattice_input(grid, 1.0, &mut rng);
                inputs.m1 = Some(random_symbol1(grid, &mut rng));
                params.dilation = Some(2.0);
            }
            IdentityId::Hom => {
                let choices = [1.5, 2.0, 3.0, 4.0, 6.0];
                let e = ExponentTriple::holder(pick(&mut rng, &choices), pick(&mut rng, &choices))?;
                let t = if rng.random_bool(0.5) { 2.0 } else { 4.0 };
                let packet = |rng: &mut ChaCha8Rng, p: f64| -> Result<SampledSignal> {
                    let f0 = wave_packet(
                        grid,
                        rng.random_range(-2.0..2.0),
                        rng.random_range(2.0..3.0),
                        rng.random_range(-0.25..0.25),
                    );
                    dilate_periodic(&f0, 1.0 / t, p)
                };
                inputs.f = packet(&mut rng, e.p1)?;
                inputs.g = packet(&mut rng, e.p2)?;
                inputs.m1 = Some(Symbol1D::hilbert(grid));
                params.dilation = Some(t);
                params.exponents = Some(e.labels());
                inputs.exponents = Some(e);
            }
            IdentityId::TrasM | IdentityId::Tras1 => {
                fields(&mut rng, &mut inputs);
                inputs.m1 = Some(random_symbol1(grid, &mut rng));
                let a = rng.random_range(-ni / 4..=ni / 4);
                params.shift = Some([a, 0]);
                params.shift_value = Some([a as f64 * dx, 0.0]);
            }
            IdentityId::ModM | IdentityId::Mod1 => {
                fields(&mut rng, &mut inputs);
                inputs.m1 = Some(random_symbol1(grid, &mut rng));
                let a = rng.random_range(-ni / 8..=ni / 8);
                params.shift = Some([a, 0]);
                params.shift_value = Some([a as f64 * dxi, 0.0]);
            }
            IdentityId::Sandwich => {
                fields(&mut rng, &mut inputs);
                inputs.m2 = Some(random_symbol2(grid, &mut rng));
                inputs.side = Some((random_symbol1(grid, &mut rng), random_symbol1(grid, &mut rng)));
            }
            IdentityId::Mix => {
                fields(&mut rng, &mut inputs);
                inputs.m1 = Some(random_symbol1(grid, &mut rng));
                inputs.phi = Some(random_band_limited(grid, n / 2, &mut rng));
            }
            IdentityId::Exp1 | IdentityId::F1 => {
                fields(&mut rng, &mut inputs);
                inputs.m1 = Some(random_symbol1(grid, &mut rng));
            }
            IdentityId::F2 => {
                let packet = |rng: &mut ChaCha8Rng| {
                    wave_packet(
                        grid,
                        rng.random_range(-1.0..1.0),
                        rng.random_range(0.8..1.2),
                        rng.random_range(-0.5..0.5),
                    )
                    .scale(normal(rng))
                };
                inputs.f = packet(&mut rng);
                inputs.g = packet(&mut rng);
                inputs.m1 = Some(smooth_symbol1(grid, &mut rng));
            }
            IdentityId::KernelEq => {
                fields(&mut rng, &mut inputs);
                let h = grid.half();
                let values = (-ni..ni)
                    .map(|d| if d.abs() < h { normal(&mut rng) } else { ZERO })
                    .collect();
                inputs.m1 = Some(Symbol1D::new(grid, values)?);
            }
            IdentityId::MeasureEq => {
                fields(&mut rng, &mut inputs);
                let pairs = [(1.0, -1.0), (1.0, 1.0), (2.0, -1.0), (0.0, 1.0), (-1.0, 2.0)];
                let (alpha, beta) = pairs[rng.random_range(0..pairs.len())];
                let count = rng.random_range(1..=5);
                let atoms = (0..count)
                    .map(|_| Atom {
                        t: rng.random_range(-ni / 8..=ni / 8) as f64 * dx,
                        w: normal(&mut rng),
                    })
                    .collect();
                inputs.measure = Some(AtomicMeasure::new(atoms)?);
                params.measure_coeffs = Some([alpha, beta]);
                params.atoms = Some(count);
            }
        }
        Ok(IdentityCase { id, params, inputs })
    }

    /// A dilation case wired with the other identity's `q`: DIL_2D with `q1d`,
    /// DIL2 with `q2d`. Uses `(2, 2, 2)`, where the two differ. Must fail.
    pub fn exponent_swap(id: IdentityId, seed: u64) -> Result<Self> {
        if !matches!(id, IdentityId::Dil2d | IdentityId::Dil2) {
            return Err(Error::InvalidParameter(format!("{id} has no exponent to swap")));
        }
        let mut case = Self::random(id, seed)?;
        let e = ExponentTriple::new(2.0, 2.0, 2.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let grid = case.inputs.f.grid;
        case.inputs.f = even_lattice_input(grid, e.p1, &mut rng);
        case.inputs.g = even_lattice_input(grid, e.p2, &mut rng);
        case.inputs.exponents = Some(e);
        case.params.exponents = Some(e.labels());
        case.params.swapped_exponent = true;
        Ok(case)
    }
}

fn need<'a, T>(x: &'a Option<T>, what: &str, id: IdentityId) -> Result<&'a T> {
    x.as_ref()
        .ok_or_else(|| Error::InvalidParameter(format!("{id} needs {what}")))
}

fn shift_of(params: &CaseParams, id: IdentityId) -> Result<[i64; 2]> {
    params
        .shift
        .ok_or_else(|| Error::InvalidParameter(format!("{id} needs a shift")))
}

/// Circular convolution `dx Σ_i φ(x_i) b(x_j - x_i)`, computed directly.
pub fn periodic_convolve(phi: &SampledSignal, b: &SampledSignal) -> Result<SampledSignal> {
    phi.grid.ensure_same(&b.grid)?;
    let g = phi.grid;
    let n = g.n();
    let h = n / 2;
    let dx = g.dx();
    let samples = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = ZERO;
            for (i, p) in phi.samples.iter().enumerate() {
                acc += p * b.samples[(j + n + h - i) % n];
            }
            acc * dx
        })
        .collect();
    Ok(SampledSignal { grid: g, samples })
}

/// `dξ Σ_k (τ_x g)^ ∗ M (ξ_k) · (τ_x f)^(ξ_k)` at `x = x_j`, with the inner
/// convolution `dξ Σ_l (τ_x g)^(η_l) M(ξ_k - η_l)`. Equals `B_M(f,g)(-x_j)`.
pub fn translated_convolution_form(m: &Symbol1D, f: &SampledSignal, g: &SampledSignal) -> Result<SampledSignal> {
    f.grid.ensure_same(&g.grid)?;
    f.grid.ensure_same(&m.grid)?;
    let grid = f.grid;
    let n = grid.n();
    let (fh, gh) = (dft(f), dft(g));
    let dxi = grid.dxi();
    let samples = (0..n)
        .into_par_iter()
        .map(|j| {
            let x = grid.x(j);
            let phase = |p: usize| Complex64::from_polar(1.0, -2.0 * PI * grid.xi(p) * x);
            let tg: Vec<Complex64> = (0..n).map(|q| gh.coeffs[q] * phase(q)).collect();
            let mut acc = ZERO;
            for p in 0..n {
                let k = grid.k(p);
                let mut conv = ZERO;
                for (q, c) in tg.iter().enumerate() {
                    conv += c * m.at(k - grid.k(q));
                }
                acc += conv * dxi * fh.coeffs[p] * phase(p);
            }
            acc * dxi
        })
        .collect();
    Ok(SampledSignal { grid, samples })
}

/// `f̂(j·dξ/2)` for `j ∈ [-n, n)`, from the zero-padded transform on a window of
/// length `2L`. Index `j + n`.
fn half_step_spectrum(f: &SampledSignal) -> Result<Vec<Complex64>> {
    let g = f.grid;
    let n = g.n();
    let wide = GridSpec::new(2 * n, 2.0 * g.length())?;
    let mut samples = vec![ZERO; 2 * n];
    samples[n / 2..n / 2 + n].copy_from_slice(&f.samples);
    Ok(dft(&SampledSignal { grid: wide, samples }).coeffs)
}

/// `½ dξ Σ_y F(s - y) G(s + y) M(-y)` for every output bin `s`, where
/// `F(k) = f̂(k·dξ/2)`. This is the transform of `B_M(f,g)` written through the
/// half-scale dilates; the sum runs over every integer `y`, so it is a genuine
/// quadrature rather than a regrouping of the engine's sum.
pub fn half_scale_form(m: &Symbol1D, f: &SampledSignal, g: &SampledSignal) -> Result<Spectrum> {
    f.grid.ensure_same(&g.grid)?;
    f.grid.ensure_same(&m.grid)?;
    let grid = f.grid;
    let ni = grid.n() as i64;
    let (ff, gg) = (half_step_spectrum(f)?, half_step_spectrum(g)?);
    let at = |v: &Vec<Complex64>, k: i64| if (-ni..ni).contains(&k) { v[(k + ni) as usize] } else { ZERO };
    let coeffs = (0..grid.n())
        .into_par_iter()
        .map(|p| {
            let s = grid.k(p);
            let mut acc = ZERO;
            for y in -2 * ni..=2 * ni {
                let a = at(&ff, s - y);
                if a == ZERO {
                    continue;
                }
                acc += a * at(&gg, s + y) * m.eval(-(y as f64) * grid.dxi());
            }
            acc * 0.5 * grid.dxi()
        })
        .collect();
    Ok(Spectrum { grid, coeffs })
}

fn hom_ratio(m: &Symbol1D, f: &SampledSignal, g: &SampledSignal, e: &ExponentTriple) -> Result<f64> {
    let b = apply_delta_symbol(m, f, g)?;
    Ok(lp_norm(&b, e.p3)? / (lp_norm(f, e.p1)? * lp_norm(g, e.p2)?))
}

/// Evaluates both sides of the case's identity.
pub fn check_identity(case: &IdentityCase) -> Result<ResidualReport> {
    let id = case.id;
    let inp = &case.inputs;
    let (f, g) = (&inp.f, &inp.g);
    f.grid.ensure_same(&g.grid)?;
    let grid = f.grid;
    let (lhs, rhs): (SampledSignal, SampledSignal) = match id {
        IdentityId::Tras2d => {
            let m = need(&inp.m2, "a two-variable symbol", id)?;
            let [a, b] = shift_of(&case.params, id)?;
            let dxi = grid.dxi();
            let lhs = apply_bilinear(&m.translate(a, b), f, g)?;
            let inner = apply_bilinear(m, &modulate(f, -(a as f64) * dxi), &modulate(g, -(b as f64) * dxi))?;
            (lhs, modulate(&inner, (a + b) as f64 * dxi))
        }
        IdentityId::Mod2d => {
            let m = need(&inp.m2, "a two-variable symbol", id)?;
            let [a, b] = shift_of(&case.params, id)?;
            let dx = grid.dx();
            let lhs = apply_bilinear(&m.modulate(a as f64 * dx, b as f64 * dx), f, g)?;
            let rhs = apply_bilinear(m, &translate_steps(f, -a), &translate_steps(g, -b))?;
            (lhs, rhs)
        }
        IdentityId::Dil2d => {
            let m = need(&inp.m2, "a two-variable symbol", id)?;
            let e = need(&inp.exponents, "exponents", id)?;
            let t = case.params.dilation.unwrap_or(2.0);
            let q = if case.params.swapped_exponent { e.q1d() } else { e.q2d() };
            let lhs = apply_bilinear(m, &dilate_periodic(f, t, e.p1)?, &dilate_periodic(g, t, e.p2)?)?;
            let inner = apply_bilinear(&m.dilate(t, q)?, f, g)?;
            (lhs, dilate_periodic(&inner, t, e.p3)?)
        }
        IdentityId::Dil2 => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            let e = need(&inp.exponents, "exponents", id)?;
            let t = case.params.dilation.unwrap_or(2.0);
            let q = if case.params.swapped_exponent { e.q2d() } else { e.q1d() };
            let lhs = apply_delta_symbol(m, &dilate_periodic(f, t, e.p1)?, &dilate_periodic(g, t, e.p2)?)?;
            let inner = apply_delta_symbol(&m.dilate(t, q)?, f, g)?;
            (lhs, dilate_periodic(&inner, t, e.p3)?)
        }
        IdentityId::DilM => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            let t = case.params.dilation.unwrap_or(2.0);
            let lhs = dilate_periodic(&apply_delta_symbol(m, f, g)?, t, 1.0)?;
            let rhs = apply_delta_symbol(
                &m.dilate(1.0 / t, 1.0)?,
                &dilate_periodic(f, t, 1.0)?,
                &dilate_periodic(g, t, 1.0)?,
            )?;
            (lhs, rhs)
        }
        IdentityId::Hom => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            let e = need(&inp.exponents, "exponents", id)?;
            let t = case.params.dilation.unwrap_or(2.0);
            let before = hom_ratio(m, f, g, e)?;
            let after = hom_ratio(m, &dilate_periodic(f, t, e.p1)?, &dilate_periodic(g, t, e.p2)?, e)?;
            let one = |v: f64| SampledSignal {
                grid,
                samples: vec![Complex64::new(v, 0.0)],
            };
            (one(before), one(after))
        }
        IdentityId::TrasM => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            let [a, _] = shift_of(&case.params, id)?;
            let lhs = translate_steps(&apply_delta_symbol(m, f, g)?, a);
            let rhs = apply_delta_symbol(m, &translate_steps(f, a), &translate_steps(g, a))?;
            (lhs, rhs)
        }
        IdentityId::ModM => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            let [a, _] = shift_of(&case.params, id)?;
            let y = a as f64 * grid.dxi();
            let lhs = modulate(&apply_delta_symbol(m, f, g)?, 2.0 * y);
            let rhs = apply_delta_symbol(m, &modulate(f, y), &modulate(g, y))?;
            (lhs, rhs)
        }
        IdentityId::Tras1 => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            let [a, _] = shift_of(&case.params, id)?;
            let lhs = apply_delta_symbol(m, &translate_steps(f, -a), &translate_steps(g, a))?;
            let rhs = apply_delta_symbol(&m.modulate(a as f64 * grid.dx()), f, g)?;
            (lhs, rhs)
        }
        IdentityId::Mod1 => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            let [a, _] = shift_of(&case.params, id)?;
            let y = a as f64 * grid.dxi();
            let lhs = apply_delta_symbol(m, &modulate(f, y), &modulate(g, -y))?;
            let rhs = apply_delta_symbol(&m.translate(-2 * a), f, g)?;
            (lhs, rhs)
        }
        IdentityId::Sandwich => {
            let m = need(&inp.m2, "a two-variable symbol", id)?;
            let (m1, m2) = need(&inp.side, "side multipliers", id)?;
            let lhs = apply_bilinear(&m.sandwich(m1, m2)?, f, g)?;
            let rhs = apply_bilinear(m, &m1.apply_linear(f)?, &m2.apply_linear(g)?)?;
            (lhs, rhs)
        }
        IdentityId::Mix => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            let phi = need(&inp.phi, "a mixing signal", id)?;
            let lhs = apply_bilinear(&mix(m, phi)?, f, g)?;
            let rhs = periodic_convolve(phi, &apply_delta_symbol(m, f, g)?)?;
            (lhs, rhs)
        }
        IdentityId::Exp1 => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            let all: Vec<usize> = (0..grid.n()).collect();
            let rhs = apply_bilinear_direct(&lift(m), f, g, &all)?;
            (apply_delta_symbol(m, f, g)?, SampledSignal::new(grid, rhs)?)
        }
        IdentityId::F1 => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            let lhs = apply_delta_symbol(m, f, g)?.reflect();
            (lhs, translated_convolution_form(m, f, g)?)
        }
        IdentityId::F2 => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            let lhs = dft(&apply_delta_symbol(m, f, g)?);
            let rhs = half_scale_form(m, f, g)?;
            let wrap = |s: Spectrum| SampledSignal {
                grid,
                samples: s.coeffs,
            };
            (wrap(lhs), wrap(rhs))
        }
        IdentityId::KernelEq => {
            let m = need(&inp.m1, "a one-variable symbol", id)?;
            (apply_delta_symbol(m, f, g)?, apply_kernel(&m.to_kernel(), f, g)?)
        }
        IdentityId::MeasureEq => {
            let mu = need(&inp.measure, "a measure", id)?;
            let [alpha, beta] = case
                .params
                .measure_coeffs
                .ok_or_else(|| Error::InvalidParameter(format!("{id} needs measure coefficients")))?;
            let lhs = apply_bilinear(&symbol_from_measure(mu, alpha, beta, grid), f, g)?;
            let mut rhs = SampledSignal::zeros(grid);
            for atom in &mu.atoms {
                let fa = translate(f, alpha * atom.t)?;
                let gb = translate(g, beta * atom.t)?;
                rhs = rhs.add(&fa.mul(&gb)?.scale(atom.w))?;
            }
            (lhs, rhs)
        }
    };
    let residual = relative_residual(&lhs.samples, &rhs.samples);
    Ok(ResidualReport {
        id,
        params: case.params.clone(),
        lhs: lhs.samples,
        rhs: rhs.samples,
        residual,
        tolerance: id.tolerance(),
    })
}

/// Seed of the `i`-th case of `id` in a suite seeded with `base`.
pub fn case_seed(base: u64, id: IdentityId, i: usize) -> u64 {
    base.wrapping_mul(1_000_003)
        .wrapping_add(id.index() * 100_000)
        .wrapping_add(i as u64)
}

/// Records of a suite run, in `(id, seed index)` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub seed: u64,
    pub cases_per_id: usize,
    pub records: Vec<ResidualRecord>,
    /// Exponent-swap controls; these are expected to fail.
    pub swap_controls: Vec<ResidualRecord>,
}

impl SuiteReport {
    /// Every record passes and every swap control fails.
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass) && self.swap_controls.iter().all(|r| !r.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs `cases_per_id` random cases of every id, in parallel, plus one exponent
/// swap control for each dilation law.
pub fn run_suite(ids: &[IdentityId], cases_per_id: usize, seed: u64) -> Result<SuiteReport> {
    let jobs: Vec<(IdentityId, usize)> = ids
        .iter()
        .flat_map(|id| (0..cases_per_id).map(move |i| (*id, i)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|(id, i)| {
            let case = IdentityCase::random(*id, case_seed(seed, *id, *i))?;
            Ok(check_identity(&case)?.record())
        })
        .collect::<Result<Vec<_>>>()?;
    let swap_controls = ids
        .iter()
        .filter(|id| matches!(id, IdentityId::Dil2d | IdentityId::Dil2))
        .map(|id| {
            let case = IdentityCase::exponent_swap(*id, case_seed(seed, *id, usize::MAX >> 32))?;
            Ok(check_identity(&case)?.record())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        schema: 1,
        seed,
        cases_per_id,
        records,
        swap_controls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::make_gaussian;

    fn grid() -> GridSpec {
        GridSpec::new(64, 8.0).unwrap()
    }

    #[test]
    fn translation_by_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_band_limited(grid(), 16, &mut rng);
        assert_eq!(translate(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn translation_rejects_off_grid_shift() {
        let f = SampledSignal::zeros(grid());
        assert!(matches!(translate(&f, 0.3 * grid().dx()), Err(Error::NotGridAligned(_))));
    }

    #[test]
    fn translation_moves_samples() {
        let f = SampledSignal::delta(grid());
        let t = translate(&f, 3.0 * grid().dx()).unwrap();
        let j = grid().sample_index(3.0 * grid().dx()).unwrap();
        assert!(t.samples[j].norm() > 0.0);
        assert_eq!(t.samples[j], f.samples[grid().sample_index(0.0).unwrap()]);
    }

    #[test]
    fn transform_of_translate_is_modulated_transform() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_band_limited(g, 20, &mut rng);
        let y = 5.0 * g.dx();
        let lhs = dft(&translate(&f, y).unwrap());
        let fh = dft(&f);
        let rhs: Vec<Complex64> = (0..g.n())
            .map(|p| fh.coeffs[p] * Complex64::from_polar(1.0, -2.0 * PI * y * g.xi(p)))
            .collect();
        assert!(relative_residual(&lhs.coeffs, &rhs) < 1e-10);
    }

    #[test]
    fn dilation_is_an_isometry() {
        let g = GridSpec::new(512, 32.0).unwrap();
        let f = wave_packet(g, 0.5, 1.0, 0.3);
        for t in [0.5, 2.0, 0.8, 1.5, 4.0] {
            for p in [1.0, 2.0, 3.0, f64::INFINITY] {
                let d = dilate(&f, t, p).unwrap();
                let (a, b) = (lp_norm(&d, p).unwrap(), lp_norm(&f, p).unwrap());
                let tol = if p.is_infinite() { 1e-2 } else { 1e-10 };
                assert!((a - b).abs() < tol * b, "t={t} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn dilation_matches_closed_form() {
        // D_t^p G_λ samples against t^{-1/p} G_λ(x/t).
        let g = GridSpec::new(512, 32.0).unwrap();
        let f = make_gaussian(2.0, g).unwrap();
        for t in [2.0, 0.5, 1.3] {
            let d = dilate(&f, t, 2.0).unwrap();
            let expect: Vec<Complex64> = (0..g.n())
                .map(|j| Complex64::new(t.powf(-0.5) * crate::signal::gaussian_value(2.0, g.x(j) / t), 0.0))
                .collect();
            assert!(relative_residual(&d.samples, &expect) < 1e-10, "t={t}");
        }
    }

    #[test]
    fn dilation_guards() {
        let g = GridSpec::new(128, 8.0).unwrap();
        let wide = wave_packet(g, 0.0, 3.0, 0.0);
        assert!(matches!(dilate(&wide, 2.0, 2.0), Err(Error::AliasingGuard { .. })));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let busy = random_band_limited(g, 60, &mut rng);
        assert!(matches!(dilate(&busy, 0.5, 2.0), Err(Error::AliasingGuard { .. })));
        assert!(dilate(&wide, -1.0, 2.0).is_err());
    }

    #[test]
    fn periodic_dilation_round_trip() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_band_limited(g, 8, &mut rng);
        for s in [2.0, 4.0] {
            let c = dilate_periodic(&f, 1.0 / s, 3.0).unwrap();
            let back = dilate_periodic(&c, s, 3.0).unwrap();
            assert!(relative_residual(&back.samples, &f.samples) < 1e-12);
        }
        let busy = crate::signal::random_samples(g, &mut rng);
        assert!(matches!(dilate_periodic(&busy, 2.0, 1.0), Err(Error::NotGridAligned(_))));
        assert!(matches!(dilate_periodic(&f, 3.0, 1.0), Err(Error::NotGridAligned(_))));
    }

    #[test]
    fn dyadic_detection() {
        assert_eq!(dyadic_exponent(4.0), Some(2));
        assert_eq!(dyadic_exponent(0.125), Some(-3));
        assert_eq!(dyadic_exponent(3.0), None);
        assert_eq!(dyadic_exponent(-2.0), None);
    }

    #[test]
    fn ids_round_trip_through_names() {
        for id in IdentityId::ALL {
            assert_eq!(IdentityId::parse(id.name()).unwrap(), id);
            let j = serde_json::to_string(&id).unwrap();
            assert_eq!(j, format!("\"{}\"", id.name()));
        }
        assert!(IdentityId::parse("nope").is_err());
    }

    #[test]
    fn every_identity_holds_on_a_few_seeds() {
        for id in IdentityId::ALL {
            for seed in 0..3 {
                let case = IdentityCase::random(id, seed).unwrap();
                let r = check_identity(&case).unwrap();
                assert!(r.pass(), "{id} seed {seed}: residual {:e}", r.residual);
                assert!(r.lhs.iter().any(|z| z.norm() > 0.0), "{id} is trivial");
            }
        }
    }

    #[test]
    fn tras_m_with_gaussian_symbol() {
        let g = IdentityId::TrasM.default_grid();
        let mut case = IdentityCase::random(IdentityId::TrasM, 11).unwrap();
        case.inputs.m1 = Some(Symbol1D::gaussian(g, 1.0).unwrap());
        case.params.shift = Some([4, 0]);
        assert!(check_identity(&case).unwrap().residual < 1e-10);
    }

    #[test]
    fn measure_dirac_gives_shifted_product() {
        // μ = δ_a, α = 1, β = -1: B_m(f,g)(x) = f(x-a) g(x+a), checked by index.
        let g = IdentityId::MeasureEq.default_grid();
        let mut case = IdentityCase::random(IdentityId::MeasureEq, 5).unwrap();
        let a = 6.0 * g.dx();
        case.inputs.measure = Some(AtomicMeasure::dirac(a));
        case.params.measure_coeffs = Some([1.0, -1.0]);
        let r = check_identity(&case).unwrap();
        assert!(r.residual < 1e-10);
        let n = g.n();
        let (f, gg) = (&case.inputs.f, &case.inputs.g);
        let expect: Vec<Complex64> = (0..n)
            .map(|j| f.samples[(j + n - 6) % n] * gg.samples[(j + 6) % n])
            .collect();
        assert!(relative_residual(&r.lhs, &expect) < 1e-10);
    }

    #[test]
    fn printed_modulation_sign_fails() {
        // The law B_M(M_y f, M_{-y} g) = B_{τ_{2y} M}(f,g) with the other sign on
        // the translation does not hold; only τ_{-2y} does.
        let case = IdentityCase::random(IdentityId::Mod1, 9).unwrap();
        let m = case.inputs.m1.clone().unwrap();
        let a = case.params.shift.unwrap()[0];
        assert_ne!(a, 0);
        let y = a as f64 * case.inputs.f.grid.dxi();
        let (f, g) = (&case.inputs.f, &case.inputs.g);
        let lhs = apply_delta_symbol(&m, &modulate(f, y), &modulate(g, -y)).unwrap();
        let wrong = apply_delta_symbol(&m.translate(2 * a), f, g).unwrap();
        assert!(relative_residual(&lhs.samples, &wrong.samples) > 0.1);
        assert!(check_identity(&case).unwrap().pass());
    }

    #[test]
    fn unreflected_half_scale_form_fails() {
        let case = IdentityCase::random(IdentityId::F2, 3).unwrap();
        let m = case.inputs.m1.clone().unwrap();
        let grid = m.grid;
        let reflected = Symbol1D::from_fn(grid, {
            let m = m.clone();
            move |v| m.eval(-v)
        });
        let (f, g) = (&case.inputs.f, &case.inputs.g);
        let lhs = dft(&apply_delta_symbol(&m, f, g).unwrap());
        let wrong = half_scale_form(&reflected, f, g).unwrap();
        assert!(relative_residual(&lhs.coeffs, &wrong.coeffs) > 1e-2);
    }

    #[test]
    fn exponent_swap_is_detected() {
        for id in [IdentityId::Dil2d, IdentityId::Dil2] {
            let r = check_identity(&IdentityCase::exponent_swap(id, 1).unwrap()).unwrap();
            assert!(r.residual > 1e-3, "{id}: {:e}", r.residual);
            assert!(!r.pass());
        }
        assert!(IdentityCase::exponent_swap(IdentityId::Mix, 1).is_err());
    }

    #[test]
    fn convolution_matches_spectral_product() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = crate::signal::random_samples(g, &mut rng);
        let b = crate::signal::random_samples(g, &mut rng);
        let c = dft(&periodic_convolve(&a, &b).unwrap());
        let (ah, bh) = (dft(&a), dft(&b));
        let prod: Vec<Complex64> = ah.coeffs.iter().zip(&bh.coeffs).map(|(x, y)| x * y).collect();
        assert!(relative_residual(&c.coeffs, &prod) < 1e-12);
    }

    #[test]
    fn suite_is_deterministic_and_ordered() {
        let ids = [IdentityId::TrasM, IdentityId::Dil2];
        let a = run_suite(&ids, 3, 7).unwrap();
        let b = run_suite(&ids, 3, 7).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.records.len(), 6);
        assert_eq!(a.records[0].id, IdentityId::TrasM);
        assert_eq!(a.records[5].id, IdentityId::Dil2);
        assert_eq!(a.swap_controls.len(), 1);
        assert!(a.all_pass());
    }

    #[test]
    fn record_json_has_expected_fields() {
        let r = check_identity(&IdentityCase::random(IdentityId::Hom, 2).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::to_value(r.record()).unwrap();
        for key in ["id", "params", "residual", "tolerance", "pass"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["id"], "HOM");
        assert!(v["params"]["exponents"].is_array());
    }
}
