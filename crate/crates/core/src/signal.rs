//! Sampled functions on the periodic grid [-L/2, L/2) and the integral-normalized
//! discrete Fourier transform that stands in for the continuous one.
//!
//! Samples sit at `x_j = (j - n/2) dx`, coefficients at `xi_k = k / L` with
//! `k = p - n/2` for storage position `p`. With this layout every grid identity
//! involving sums and differences of frequencies stays on a grid of spacing `dxi`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold used by the Gaussian aliasing guard.
pub const GUARD_TOL: f64 = 1e-13;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward FFT, in place.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// Unnormalized inverse FFT, in place.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    fft.process(buf);
}

#[inline]
pub(crate) fn parity_sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Uniform periodic grid with `n` samples over a period of length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    length: f64,
}

impl GridSpec {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        Ok(GridSpec { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        1.0 / self.length
    }

    pub fn half(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Position of sample `j`.
    pub fn x(&self, j: usize) -> f64 {
        (j as i64 - self.half()) as f64 * self.dx()
    }

    /// Signed frequency index stored at position `p`.
    pub fn k(&self, p: usize) -> i64 {
        p as i64 - self.half()
    }

    /// Frequency stored at position `p`.
    pub fn xi(&self, p: usize) -> f64 {
        self.k(p) as f64 * self.dxi()
    }

    /// Storage position of signed frequency index `k`, if on the grid.
    pub fn pos(&self, k: i64) -> Option<usize> {
        let p = k + self.half();
        (0..self.n as i64).contains(&p).then_some(p as usize)
    }

    /// Sample index of `x`, wrapped periodically, when `x` is a grid point.
    pub fn sample_index(&self, x: f64) -> Option<usize> {
        let s = x / self.dx();
        let r = s.round();
        if (s - r).abs() > 1e-9 * s.abs().max(1.0) {
            return None;
        }
        Some(((r as i64 + self.half()).rem_euclid(self.n as i64)) as usize)
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self.n != other.n || (self.length - other.length).abs() > 1e-12 * self.length {
            return Err(Error::GridMismatch(format!(
                "(n={}, L={}) vs (n={}, L={})",
                self.n, self.length, other.n, other.length
            )));
        }
        Ok(())
    }
}

/// Complex samples of a function on a `GridSpec`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub grid: GridSpec,
    pub samples: Vec<Complex64>,
}

impl SampledSignal {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} samples for n = {}",
                samples.len(),
                grid.n()
            )));
        }
        if let Some(j) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(format!("sample {j}")));
        }
        Ok(SampledSignal { grid, samples })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        SampledSignal {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    /// Samples `f(x_j)`.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = (0..grid.n()).map(|j| f(grid.x(j))).collect();
        SampledSignal { grid, samples }
    }

    /// Point mass at the origin: value `1/dx` at `x = 0`.
    pub fn delta(grid: GridSpec) -> Self {
        let mut s = Self::zeros(grid);
        s.samples[grid.n() / 2] = Complex64::new(1.0 / grid.dx(), 0.0);
        s
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn scale(&self, a: Complex64) -> Self {
        SampledSignal {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * a).collect(),
        }
    }

    pub fn add(&self, other: &SampledSignal) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(SampledSignal {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn mul(&self, other: &SampledSignal) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(SampledSignal {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn conj(&self) -> Self {
        SampledSignal {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z.conj()).collect(),
        }
    }

    /// `f(-x)`, using the periodic wrap for the sample at `-L/2`.
    pub fn reflect(&self) -> Self {
        let n = self.grid.n();
        let samples = (0..n).map(|j| self.samples[(n - j) % n]).collect();
        SampledSignal {
            grid: self.grid,
            samples,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Integral-normalized Fourier coefficients on the dual grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for n = {}",
                coeffs.len(),
                grid.n()
            )));
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Self {
        let coeffs = (0..grid.n()).map(|p| f(grid.xi(p))).collect();
        Spectrum { grid, coeffs }
    }

    /// Coefficient at signed index `k`; zero off the grid.
    pub fn at(&self, k: i64) -> Complex64 {
        self.grid
            .pos(k)
            .map_or(Complex64::new(0.0, 0.0), |p| self.coeffs[p])
    }

    /// Coefficient at any integer `k`, extended periodically with period `n`.
    ///
    /// This is the transform of the grid samples evaluated off the centered band;
    /// it is what sum frequencies on the doubled range actually see.
    pub fn periodic(&self, k: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let p = (k + self.grid.half()).rem_euclid(n);
        self.coeffs[p as usize]
    }
}

/// `coeffs[k] = dx * sum_j f(x_j) exp(-2 pi i x_j xi_k)`.
pub fn dft(f: &SampledSignal) -> Spectrum {
    let grid = f.grid;
    let n = grid.n();
    let mut buf = f.samples.clone();
    fft_forward(&mut buf);
    let dx = grid.dx();
    let coeffs = (0..n)
        .map(|p| {
            let k = grid.k(p);
            buf[k.rem_euclid(n as i64) as usize] * (dx * parity_sign(k))
        })
        .collect();
    Spectrum { grid, coeffs }
}

/// `samples[j] = dxi * sum_k F_k exp(2 pi i x_j xi_k)`, the exact inverse of `dft`.
pub fn idft(spec: &Spectrum) -> SampledSignal {
    let grid = spec.grid;
    let n = grid.n();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for p in 0..n {
        let k = grid.k(p);
        buf[k.rem_euclid(n as i64) as usize] = spec.coeffs[p] * parity_sign(k);
    }
    fft_inverse(&mut buf);
    let dxi = grid.dxi();
    for z in buf.iter_mut() {
        *z *= dxi;
    }
    SampledSignal { grid, samples: buf }
}

/// Transform of the grid samples at an arbitrary frequency.
pub fn dtft(f: &SampledSignal, xi: f64) -> Complex64 {
    let grid = f.grid;
    let dx = grid.dx();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, z) in f.samples.iter().enumerate() {
        acc += z * Complex64::from_polar(1.0, -2.0 * PI * grid.x(j) * xi);
    }
    acc * dx
}

/// Reciprocal of an exponent, with `1/inf = 0`.
pub fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Conjugate exponent `p'` with `1/p + 1/p' = 1`.
pub fn conjugate(p: f64) -> f64 {
    let r = 1.0 - recip(p);
    if r == 0.0 {
        f64::INFINITY
    } else {
        1.0 / r
    }
}

/// `(dx sum |f|^p)^(1/p)` for finite p, the max modulus for `p = inf`.
pub fn lp_norm(f: &SampledSignal, p: f64) -> Result<f64> {
    lp_norm_slice(&f.samples, f.grid.dx(), p)
}

pub(crate) fn lp_norm_slice(values: &[Complex64], weight: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidExponent(format!("p must be positive, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let s: f64 = if p == 2.0 {
        values.iter().map(|z| z.norm_sqr()).sum()
    } else if p == 1.0 {
        values.iter().map(|z| z.norm()).sum()
    } else {
        values.iter().map(|z| z.norm().powf(p)).sum()
    };
    Ok((weight * s).powf(1.0 / p))
}

/// Exponents `(p1, p2, p3)` with the derived scaling exponents.
///
/// Derived quantities are always computed from the stored exponents. The
/// `q` exponents can be negative or infinite, so they are exposed through their
/// reciprocals as well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl ExponentTriple {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Result<Self> {
        for (name, p, lo) in [("p1", p1, 1.0), ("p2", p2, 1.0)] {
            if p.is_nan() || p < lo {
                return Err(Error::InvalidExponent(format!("{name} must lie in [1, inf], got {p}")));
            }
        }
        if p3.is_nan() || p3 <= 0.0 {
            return Err(Error::InvalidExponent(format!("p3 must lie in (0, inf], got {p3}")));
        }
        Ok(ExponentTriple { p1, p2, p3 })
    }

    /// Hoelder triple with `1/p3 = 1/p1 + 1/p2`.
    pub fn holder(p1: f64, p2: f64) -> Result<Self> {
        let s = recip(p1) + recip(p2);
        let p3 = if s == 0.0 { f64::INFINITY } else { 1.0 / s };
        Self::new(p1, p2, p3)
    }

    pub fn conjugates(&self) -> (f64, f64, f64) {
        (conjugate(self.p1), conjugate(self.p2), conjugate(self.p3))
    }

    /// `1/p1 + 1/p2 - 1/p3`.
    pub fn scaling_gap(&self) -> f64 {
        recip(self.p1) + recip(self.p2) - recip(self.p3)
    }

    /// `1/q` for the one-variable law.
    pub fn inv_q1d(&self) -> f64 {
        self.scaling_gap()
    }

    /// `1/q` for the two-variable law, where `2/q` equals the gap.
    pub fn inv_q2d(&self) -> f64 {
        0.5 * self.scaling_gap()
    }

    pub fn q1d(&self) -> f64 {
        inverse_or_inf(self.inv_q1d())
    }

    pub fn q2d(&self) -> f64 {
        inverse_or_inf(self.inv_q2d())
    }

    pub fn is_holder(&self) -> bool {
        self.scaling_gap().abs() < 1e-12
    }

    /// The exponents as text, with `inf` spelled out (JSON has no infinity).
    pub fn labels(&self) -> [String; 3] {
        [self.p1, self.p2, self.p3].map(exponent_label)
    }

    /// `1/p3 <= 1/p1 + 1/p2 <= 1/p3 + 1`.
    pub fn in_window(&self) -> bool {
        let g = self.scaling_gap();
        (-1e-12..=1.0 + 1e-12).contains(&g)
    }
}

pub fn exponent_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        p.to_string()
    }
}

fn inverse_or_inf(r: f64) -> f64 {
    if r == 0.0 {
        f64::INFINITY
    } else {
        1.0 / r
    }
}

/// Closed-form transform of the Gaussian family, `exp(-2 lambda^2 xi^2)`.
pub fn gaussian_hat(lambda: f64, xi: f64) -> f64 {
    (-2.0 * lambda * lambda * xi * xi).exp()
}

/// Closed-form Gaussian in space, the inverse transform of `gaussian_hat`.
pub fn gaussian_value(lambda: f64, x: f64) -> f64 {
    (PI / 2.0).sqrt() / lambda * (-PI * PI * x * x / (2.0 * lambda * lambda)).exp()
}

/// Rejects `lambda` when the spectral tail at the band edge or the spatial tail
/// at `+-L/2` exceeds `GUARD_TOL`.
pub fn gaussian_guard(lambda: f64, grid: GridSpec) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let edge = grid.n() as f64 / (2.0 * grid.length());
    let spectral = gaussian_hat(lambda, edge);
    if spectral >= GUARD_TOL {
        return Err(Error::AliasingGuard {
            lambda,
            reason: format!("spectral tail {spectral:e} at |xi| = {edge}"),
        });
    }
    let spatial = gaussian_value(lambda, grid.length() / 2.0);
    if spatial >= GUARD_TOL {
        return Err(Error::AliasingGuard {
            lambda,
            reason: format!("spatial tail {spatial:e} at |x| = L/2"),
        });
    }
    Ok(())
}

/// The Gaussian `G_lambda`, defined through its sampled transform.
pub fn make_gaussian(lambda: f64, grid: GridSpec) -> Result<SampledSignal> {
    gaussian_guard(lambda, grid)?;
    Ok(gaussian_unguarded(lambda, grid))
}

/// Same as `make_gaussian` without the guard. Used by studies that probe the
/// guard itself.
pub fn gaussian_unguarded(lambda: f64, grid: GridSpec) -> SampledSignal {
    let spec = Spectrum::from_fn(grid, |xi| Complex64::new(gaussian_hat(lambda, xi), 0.0));
    idft(&spec)
}

/// Spectrum with iid complex normal coefficients for `|k| < band`, zero elsewhere.
pub fn random_spectrum<R: Rng + ?Sized>(grid: GridSpec, band: usize, rng: &mut R) -> Spectrum {
    let band = band as i64;
    let coeffs = (0..grid.n())
        .map(|p| {
            if grid.k(p).abs() < band {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Spectrum { grid, coeffs }
}

/// Random signal occupying `|k| < band`.
pub fn random_band_limited<R: Rng + ?Sized>(grid: GridSpec, band: usize, rng: &mut R) -> SampledSignal {
    idft(&random_spectrum(grid, band, rng))
}

/// Signal with iid complex normal samples; not band-limited.
pub fn random_samples<R: Rng + ?Sized>(grid: GridSpec, rng: &mut R) -> SampledSignal {
    let samples = (0..grid.n())
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    SampledSignal { grid, samples }
}

/// `exp(-pi ((x - center)/width)^2) exp(2 pi i freq x)` sampled on the grid,
/// with the distance to `center` measured periodically.
pub fn wave_packet(grid: GridSpec, center: f64, width: f64, freq: f64) -> SampledSignal {
    let l = grid.length();
    SampledSignal::from_fn(grid, |x| {
        let d = (x - center + l / 2.0).rem_euclid(l) - l / 2.0;
        let a = (-PI * (d / width).powi(2)).exp();
        Complex64::from_polar(a, 2.0 * PI * freq * x)
    })
}

/// Energy fraction outside `|k| < band`.
pub fn out_of_band_fraction(f: &SampledSignal, band: usize) -> f64 {
    let spec = dft(f);
    let band = band as i64;
    let mut inside = 0.0;
    let mut outside = 0.0;
    for (p, c) in spec.coeffs.iter().enumerate() {
        if f.grid.k(p).abs() < band {
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

/// Rejects signals whose spectrum leaves the inner half band by more than `rel_tol`.
pub fn ensure_band_limited(f: &SampledSignal, rel_tol: f64) -> Result<()> {
    let frac = out_of_band_fraction(f, f.grid.n() / 4);
    if frac > rel_tol {
        return Err(Error::NotBandLimited(format!(
            "relative energy {frac:e} outside the inner half band exceeds {rel_tol:e}"
        )));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct SignalEnvelope {
    schema: u32,
    grid: GridSpec,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SampledSignal {
    /// CSV with header `x,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "re", "im"])?;
        for (j, z) in self.samples.iter().enumerate() {
            wr.write_record([
                self.grid.x(j).to_string(),
                z.re.to_string(),
                z.im.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads `x,re,im` rows. The grid is inferred from the row count and spacing.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut xs = Vec::new();
        let mut samples = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::Parse(format!("expected 3 columns, got {}", rec.len())));
            }
            let parse = |i: usize| -> Result<f64> {
                rec[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{:?}: {e}", &rec[i])))
            };
            xs.push(parse(0)?);
            samples.push(Complex64::new(parse(1)?, parse(2)?));
        }
        if xs.is_empty() {
            return Err(Error::Parse("signal CSV has no rows".into()));
        }
        // x_0 = -L/2 exactly, since n is a power of two
        let grid = GridSpec::new(xs.len(), -2.0 * xs[0])?;
        for (j, x) in xs.iter().enumerate() {
            if (x - grid.x(j)).abs() > 1e-9 * grid.length() {
                return Err(Error::Parse(format!("row {j}: x = {x} is off the grid")));
            }
        }
        SampledSignal::new(grid, samples)
    }

    pub fn to_json(&self) -> Result<String> {
        let env = SignalEnvelope {
            schema: 1,
            grid: self.grid,
            re: self.samples.iter().map(|z| z.re).collect(),
            im: self.samples.iter().map(|z| z.im).collect(),
        };
        Ok(serde_json::to_string(&env)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let env: SignalEnvelope = serde_json::from_str(s)?;
        if env.schema != 1 {
            return Err(Error::Parse(format!("unsupported schema {}", env.schema)));
        }
        let grid = GridSpec::new(env.grid.n, env.grid.length)?;
        if env.re.len() != env.im.len() {
            return Err(Error::Parse("re and im lengths differ".into()));
        }
        let samples = env
            .re
            .iter()
            .zip(&env.im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        SampledSignal::new(grid, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
        let d = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let s = a.iter().chain(b).map(|z| z.norm()).fold(0.0, f64::max);
        d / s.max(1e-300)
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(GridSpec::new(4, 1.0).is_err());
        assert!(GridSpec::new(24, 1.0).is_err());
        assert!(GridSpec::new(16, 0.0).is_err());
        let g = GridSpec::new(16, 4.0).unwrap();
        assert!((g.dx() * g.dxi() * g.n() as f64 - 1.0).abs() < 1e-15);
        assert_eq!(g.x(8), 0.0);
        assert_eq!(g.k(0), -8);
    }

    #[test]
    fn dft_matches_naive_sum() {
        let g = GridSpec::new(16, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_samples(g, &mut rng);
        let fast = dft(&f);
        for p in 0..16 {
            let naive = dtft(&f, g.xi(p));
            assert!((naive - fast.coeffs[p]).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_and_constant() {
        let g = GridSpec::new(32, 5.0).unwrap();
        let d = dft(&SampledSignal::delta(g));
        assert!(d.coeffs.iter().all(|c| (c - 1.0).norm() < 1e-13));
        let one = SampledSignal::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let c = dft(&one);
        for p in 0..32 {
            let want = if g.k(p) == 0 { 5.0 } else { 0.0 };
            assert!((c.coeffs[p] - want).norm() < 1e-13);
        }
        let back = idft(&Spectrum::from_fn(g, |_| Complex64::new(1.0, 0.0)));
        assert!(rel(&back.samples, &SampledSignal::delta(g).samples) < 1e-13);
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = GridSpec::new(256, 32.0).unwrap();
        let sampled = SampledSignal::from_fn(g, |x| Complex64::new(gaussian_value(1.0, x), 0.0));
        let spec = dft(&sampled);
        let err = (0..256)
            .map(|p| (spec.coeffs[p] - gaussian_hat(1.0, g.xi(p))).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        let back = idft(&Spectrum::from_fn(g, |xi| Complex64::new(gaussian_hat(1.0, xi), 0.0)));
        let err = (0..256)
            .map(|j| (back.samples[j] - gaussian_value(1.0, g.x(j))).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn make_gaussian_properties() {
        let g = GridSpec::new(256, 32.0).unwrap();
        let f = make_gaussian(1.0, g).unwrap();
        let spec = dft(&f);
        for p in 0..256 {
            assert!((spec.coeffs[p] - gaussian_hat(1.0, g.xi(p))).norm() < 1e-10);
        }
        let integral: Complex64 = f.samples.iter().sum::<Complex64>() * g.dx();
        assert!((integral - 1.0).norm() < 1e-10);
        for j in 1..256 {
            let z = f.samples[j];
            // far tails sit at round-off level
            assert!(z.im.abs() < 1e-12 && z.re > -1e-15);
            assert!((z - f.samples[256 - j]).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_guard_rejects_small_grids() {
        let g = GridSpec::new(64, 32.0).unwrap();
        assert!(matches!(make_gaussian(0.5, g), Err(Error::AliasingGuard { .. })));
        let g = GridSpec::new(512, 8.0).unwrap();
        assert!(matches!(make_gaussian(4.0, g), Err(Error::AliasingGuard { .. })));
        assert!(make_gaussian(1.0, GridSpec::new(512, 64.0).unwrap()).is_ok());
    }

    #[test]
    fn norms() {
        let g = GridSpec::new(16, 4.0).unwrap();
        let one = SampledSignal::from_fn(g, |_| Complex64::new(1.0, 0.0));
        assert!((lp_norm(&one, 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(lp_norm(&one, 0.0).is_err());
        assert_eq!(lp_norm(&one, f64::INFINITY).unwrap(), 1.0);
        // scaled comb: every other sample equal to 3
        let comb = SampledSignal::from_fn(g, |x| {
            let j = (x / g.dx()).round() as i64;
            Complex64::new(if j % 2 == 0 { 3.0 } else { 0.0 }, 0.0)
        });
        let p = 1.5;
        let direct = (8.0 * 3f64.powf(p) * g.dx()).powf(1.0 / p);
        assert!((lp_norm(&comb, p).unwrap() - direct).abs() < 1e-13);
    }

    #[test]
    fn gaussian_norm_slopes() {
        let g = GridSpec::new(4096, 64.0).unwrap();
        let lams: Vec<f64> = (0..9).map(|i| 0.25 * 2f64.powf(i as f64 / 4.0)).collect();
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let pts: Vec<(f64, f64)> = lams
                .iter()
                .map(|&l| {
                    let f = make_gaussian(l, g).unwrap();
                    (l.ln(), lp_norm(&f, p).unwrap().ln())
                })
                .collect();
            let slope = (pts[8].1 - pts[0].1) / (pts[8].0 - pts[0].0);
            assert!((slope - (recip(p) - 1.0)).abs() < 0.02, "p={p} slope={slope}");
        }
    }

    #[test]
    fn exponents() {
        let e = ExponentTriple::new(2.0, 2.0, 1.0).unwrap();
        assert!(e.is_holder());
        assert!(e.q1d().is_infinite());
        let e = ExponentTriple::new(2.0, 2.0, 2.0).unwrap();
        assert!((e.inv_q1d() - 0.5).abs() < 1e-15);
        assert!((e.inv_q2d() - 0.25).abs() < 1e-15);
        assert!((e.q2d() - 4.0).abs() < 1e-12);
        let e = ExponentTriple::new(f64::INFINITY, 2.0, 2.0).unwrap();
        assert_eq!(e.conjugates().0, 1.0);
        assert!(ExponentTriple::new(0.5, 2.0, 1.0).is_err());
        assert!(ExponentTriple::new(2.0, 2.0, 0.0).is_err());
        assert!(ExponentTriple::new(4.0, 4.0, 1.0).unwrap().inv_q1d() < 0.0);
    }

    #[test]
    fn band_limit_detection() {
        let g = GridSpec::new(64, 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_band_limited(g, 16, &mut rng);
        assert!(ensure_band_limited(&f, 1e-12).is_ok());
        let h = random_samples(g, &mut rng);
        assert!(ensure_band_limited(&h, 1e-3).is_err());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let g = GridSpec::new(16, 2.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_samples(g, &mut rng);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = SampledSignal::read_csv(&buf[..]).unwrap();
        assert_eq!(back, f);
        let back = SampledSignal::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
        assert!(SampledSignal::read_csv(&b"x,re,im\n"[..]).is_err());
        assert!(SampledSignal::read_csv(&b"x,re,im\n-1,0,0\n0,zero,0\n"[..]).is_err());
    }
}
