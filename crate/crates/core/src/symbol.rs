//! Multiplier symbols: `m(ξ,η)` tabulated on the frequency square and `M(v)` on
//! the difference line, together with the constructions that build new symbols
//! from old ones.
//!
//! A [`Symbol1D`] stores `2n` values at `v_d = d·dξ`, `d ∈ [-n, n)`, so every
//! difference `ξ_k - η_l` of grid frequencies is an exact table entry. Symbols
//! built from closed forms keep the closure next to the table; dilation and
//! averaging evaluate it directly instead of interpolating.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{dft, fft_forward, fft_inverse, idft, recip, GridSpec, SampledSignal, Spectrum};

pub type Exact1 = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
pub type Exact2 = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `sign(v)` with `sign(0) = 0`.
fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    match values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        Some(i) => Err(Error::NonFinite(format!("symbol entry {i}"))),
        None => Ok(()),
    }
}

/// One-variable symbol on the difference grid.
#[derive(Clone)]
pub struct Symbol1D {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    exact: Option<Exact1>,
}

impl fmt::Debug for Symbol1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol1D")
            .field("grid", &self.grid)
            .field("len", &self.values.len())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl Symbol1D {
    /// Table with index `r = d + n` for `v = d·dξ`.
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != 2 * grid.n() {
            return Err(Error::GridMismatch(format!(
                "one-variable symbol needs {} entries, got {}",
                2 * grid.n(),
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(Symbol1D {
            grid,
            values,
            exact: None,
        })
    }

    /// Tabulates a closed form and keeps it as the exact evaluator.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        let n = grid.n() as i64;
        let dxi = grid.dxi();
        let values = (-n..n).map(|d| f(d as f64 * dxi)).collect();
        Symbol1D {
            grid,
            values,
            exact: Some(Arc::new(f)),
        }
    }

    pub fn constant(grid: GridSpec, c: Complex64) -> Self {
        Self::from_fn(grid, move |_| c)
    }

    /// `-i sign(v)`, the bilinear Hilbert transform.
    pub fn hilbert(grid: GridSpec) -> Self {
        Self::from_fn(grid, |v| Complex64::new(0.0, -sign0(v)))
    }

    /// `|v|^(α-1)`, set to zero at `v = 0`.
    pub fn fractional(grid: GridSpec, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
        }
        Ok(Self::from_fn(grid, move |v| {
            if v == 0.0 {
                ZERO
            } else {
                Complex64::new(v.abs().powf(alpha - 1.0), 0.0)
            }
        }))
    }

    /// `exp(-(v/width)^2)`.
    pub fn gaussian(grid: GridSpec, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter(format!("width must be positive, got {width}")));
        }
        Ok(Self::from_fn(grid, move |v| Complex64::new((-(v / width).powi(2)).exp(), 0.0)))
    }

    /// The transform `M = K̂` of a kernel, so that `C_K = B_M` on the grid.
    ///
    /// `M(v_d) = dx Σ_m K(t_m) e^{-2πi v_d t_m}`, which is `n`-periodic in `d`.
    pub fn from_kernel(kernel: &SampledSignal) -> Self {
        let grid = kernel.grid;
        let n = grid.n() as i64;
        let spec = dft(kernel);
        let values = (-n..n).map(|d| spec.periodic(d)).collect();
        Symbol1D {
            grid,
            values,
            exact: None,
        }
    }

    /// The kernel `K = M̂(-·)` on the sample grid.
    ///
    /// Entries `d` and `d ± n` land in the same bin. When `M` vanishes outside
    /// `|d| < n/2`, `from_kernel(to_kernel(M))` reproduces `M` on `|d| < n/2`, which
    /// covers every difference of two inner-half-band frequencies.
    pub fn to_kernel(&self) -> SampledSignal {
        let grid = self.grid;
        let n = grid.n() as i64;
        let mut coeffs = vec![ZERO; grid.n()];
        for d in -n..n {
            let k = (d + n / 2).rem_euclid(n) - n / 2;
            coeffs[grid.pos(k).expect("folded index on grid")] += self.at(d);
        }
        idft(&Spectrum { grid, coeffs })
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Table entry at `v = d·dξ`, constant extrapolation outside `[-n, n)`.
    pub fn at(&self, d: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let r = (d + n).clamp(0, 2 * n - 1);
        self.values[r as usize]
    }

    /// Value at an arbitrary `v`: the exact form when present, else linear
    /// interpolation in the table with constant extrapolation.
    pub fn eval(&self, v: f64) -> Complex64 {
        if let Some(f) = &self.exact {
            return f(v);
        }
        self.interpolate(v)
    }

    pub fn interpolate(&self, v: f64) -> Complex64 {
        let n = self.grid.n() as f64;
        let u = (v / self.grid.dxi() + n).clamp(0.0, 2.0 * n - 1.0);
        let i0 = u.floor() as usize;
        let i1 = (i0 + 1).min(self.values.len() - 1);
        let w = u - i0 as f64;
        self.values[i0] * (1.0 - w) + self.values[i1] * w
    }

    /// Applies `M` as a linear multiplier: `idft(M(ξ_k) f̂_k)`.
    pub fn apply_linear(&self, f: &SampledSignal) -> Result<SampledSignal> {
        self.grid.ensure_same(&f.grid)?;
        let mut spec = dft(f);
        for (p, c) in spec.coeffs.iter_mut().enumerate() {
            *c *= self.at(self.grid.k(p));
        }
        Ok(idft(&spec))
    }

    /// `τ_s M(v) = M(v - s)` with `s = shift·dξ`; the table rotates cyclically.
    pub fn translate(&self, shift: i64) -> Symbol1D {
        let len = self.values.len() as i64;
        let values = (0..len)
            .map(|r| self.values[(r - shift).rem_euclid(len) as usize])
            .collect();
        let exact = self.exact.clone().map(|f| {
            let s = shift as f64 * self.grid.dxi();
            Arc::new(move |v: f64| f(v - s)) as Exact1
        });
        Symbol1D {
            grid: self.grid,
            values,
            exact,
        }
    }

    /// `M_y M(v) = e^{2πi y v} M(v)` for any real `y`.
    pub fn modulate(&self, y: f64) -> Symbol1D {
        let n = self.grid.n() as i64;
        let dxi = self.grid.dxi();
        let values = (-n..n)
            .zip(&self.values)
            .map(|(d, z)| z * Complex64::from_polar(1.0, 2.0 * PI * y * d as f64 * dxi))
            .collect();
        let exact = self.exact.clone().map(|f| {
            Arc::new(move |v: f64| f(v) * Complex64::from_polar(1.0, 2.0 * PI * y * v)) as Exact1
        });
        Symbol1D {
            grid: self.grid,
            values,
            exact,
        }
    }

    /// `D_t^q M(v) = t^{-1/q} M(v/t)`.
    pub fn dilate(&self, t: f64, q: f64) -> Result<Symbol1D> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidParameter(format!("dilation t must be positive, got {t}")));
        }
        let scale = t.powf(-recip(q));
        let n = self.grid.n() as i64;
        let dxi = self.grid.dxi();
        let values = (-n..n).map(|d| self.eval(d as f64 * dxi / t) * scale).collect();
        let exact = self
            .exact
            .clone()
            .map(|f| Arc::new(move |v: f64| f(v / t) * scale) as Exact1);
        Ok(Symbol1D {
            grid: self.grid,
            values,
            exact,
        })
    }

    /// Pointwise product with another symbol on the same grid.
    pub fn mul(&self, other: &Symbol1D) -> Result<Symbol1D> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.clone(), b.clone());
                Some(Arc::new(move |v: f64| a(v) * b(v)) as Exact1)
            }
            _ => None,
        };
        Ok(Symbol1D {
            grid: self.grid,
            values,
            exact,
        })
    }

    /// Rows `v,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["v", "re", "im"])?;
        let n = self.grid.n() as i64;
        for (d, z) in (-n..n).zip(&self.values) {
            wr.write_record([
                (d as f64 * self.grid.dxi()).to_string(),
                z.re.to_string(),
                z.im.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Two-variable symbol, `values[p·n + q] = m(ξ_p, η_q)`.
#[derive(Clone)]
pub struct Symbol2D {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    exact: Option<Exact2>,
}

impl fmt::Debug for Symbol2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol2D")
            .field("grid", &self.grid)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl Symbol2D {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        let n = grid.n();
        if values.len() != n * n {
            return Err(Error::GridMismatch(format!(
                "two-variable symbol needs {} entries, got {}",
                n * n,
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(Symbol2D {
            grid,
            values,
            exact: None,
        })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        let n = grid.n();
        let values = (0..n * n)
            .map(|i| f(grid.xi(i / n), grid.xi(i % n)))
            .collect();
        Symbol2D {
            grid,
            values,
            exact: Some(Arc::new(f)),
        }
    }

    pub fn constant(grid: GridSpec, c: Complex64) -> Self {
        Self::from_fn(grid, move |_, _| c)
    }

    /// `m(ξ,η) = a(ξ) b(η)` for linear multipliers `a`, `b`.
    pub fn separable(a: &Symbol1D, b: &Symbol1D) -> Result<Self> {
        Self::constant(a.grid, Complex64::new(1.0, 0.0)).sandwich(a, b)
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Entry at storage positions `(p, q)`.
    pub fn at(&self, p: usize, q: usize) -> Complex64 {
        self.values[p * self.grid.n() + q]
    }

    /// Entry at signed indices `(k, l)`, constant extrapolation off the grid.
    pub fn at_k(&self, k: i64, l: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let h = self.grid.half();
        let p = (k + h).clamp(0, n - 1) as usize;
        let q = (l + h).clamp(0, n - 1) as usize;
        self.at(p, q)
    }

    pub fn eval(&self, xi: f64, eta: f64) -> Complex64 {
        if let Some(f) = &self.exact {
            return f(xi, eta);
        }
        self.interpolate(xi, eta)
    }

    /// Bilinear interpolation with constant extrapolation.
    pub fn interpolate(&self, xi: f64, eta: f64) -> Complex64 {
        let n = self.grid.n();
        let top = (n - 1) as f64;
        let h = self.grid.half() as f64;
        let u = (xi / self.grid.dxi() + h).clamp(0.0, top);
        let w = (eta / self.grid.dxi() + h).clamp(0.0, top);
        let (p0, q0) = (u.floor() as usize, w.floor() as usize);
        let (p1, q1) = ((p0 + 1).min(n - 1), (q0 + 1).min(n - 1));
        let (a, b) = (u - p0 as f64, w - q0 as f64);
        self.at(p0, q0) * ((1.0 - a) * (1.0 - b))
            + self.at(p1, q0) * (a * (1.0 - b))
            + self.at(p0, q1) * ((1.0 - a) * b)
            + self.at(p1, q1) * (a * b)
    }

    fn map_exact(&self, f: impl Fn(&Exact2) -> Exact2) -> Option<Exact2> {
        self.exact.as_ref().map(f)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `m·χ_Q` for the closed rectangle `Q = [a,b]×[c,d]`.
    pub fn restrict(&self, q: Rect) -> Symbol2D {
        let n = self.grid.n();
        let g = self.grid;
        let values = (0..n * n)
            .map(|i| {
                if q.contains(g.xi(i / n), g.xi(i % n)) {
                    self.values[i]
                } else {
                    ZERO
                }
            })
            .collect();
        let exact = self.map_exact(|f| {
            let f = f.clone();
            Arc::new(move |x, y| if q.contains(x, y) { f(x, y) } else { ZERO })
        });
        Symbol2D {
            grid: g,
            values,
            exact,
        }
    }

    /// Periodic convolution `dξ² Σ_P m(K - P) Φ(P)` with a density `Φ`.
    pub fn smooth(&self, phi: &Symbol2D) -> Result<Symbol2D> {
        self.grid.ensure_same(&phi.grid)?;
        let n = self.grid.n();
        let mut a = self.values.clone();
        let mut b = phi.values.clone();
        fft2(&mut a, n, false);
        fft2(&mut b, n, false);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
        fft2(&mut a, n, true);
        let w = self.grid.dxi().powi(2) / (n * n) as f64;
        let h = n / 2;
        let values = (0..n * n)
            .map(|i| {
                let (p, q) = (i / n, i % n);
                a[((p + h) % n) * n + (q + h) % n] * w
            })
            .collect();
        Ok(Symbol2D {
            grid: self.grid,
            values,
            exact: None,
        })
    }

    /// Entrywise product `Φ̂·m`.
    pub fn taper(&self, phi_hat: &Symbol2D) -> Result<Symbol2D> {
        self.grid.ensure_same(&phi_hat.grid)?;
        let values = self
            .values
            .iter()
            .zip(&phi_hat.values)
            .map(|(a, b)| a * b)
            .collect();
        let exact = match (&self.exact, &phi_hat.exact) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.clone(), b.clone());
                Some(Arc::new(move |x: f64, y: f64| a(x, y) * b(x, y)) as Exact2)
            }
            _ => None,
        };
        Ok(Symbol2D {
            grid: self.grid,
            values,
            exact,
        })
    }

    /// `Σ_i w_i m(t_i ξ, t_i η)`, a quadrature of `∫ m(tξ,tη) ψ(t) dt`.
    pub fn dilation_average(&self, weights: &DilationWeights) -> Result<Symbol2D> {
        weights.validate()?;
        let n = self.grid.n();
        let g = self.grid;
        let values = (0..n * n)
            .into_par_iter()
            .map(|i| {
                let (x, y) = (g.xi(i / n), g.xi(i % n));
                weights
                    .nodes
                    .iter()
                    .zip(&weights.weights)
                    .map(|(&t, &w)| self.eval(t * x, t * y) * w)
                    .sum()
            })
            .collect();
        let exact = self.map_exact(|f| {
            let f = f.clone();
            let w = weights.clone();
            Arc::new(move |x, y| {
                w.nodes
                    .iter()
                    .zip(&w.weights)
                    .map(|(&t, &c)| f(t * x, t * y) * c)
                    .sum()
            })
        });
        Ok(Symbol2D {
            grid: g,
            values,
            exact,
        })
    }

    /// `m1(ξ) m(ξ,η) m2(η)` with `m1`, `m2` read as linear multipliers.
    pub fn sandwich(&self, m1: &Symbol1D, m2: &Symbol1D) -> Result<Symbol2D> {
        self.grid.ensure_same(&m1.grid)?;
        self.grid.ensure_same(&m2.grid)?;
        let n = self.grid.n();
        let g = self.grid;
        let values = (0..n * n)
            .map(|i| {
                let (p, q) = (i / n, i % n);
                m1.at(g.k(p)) * self.values[i] * m2.at(g.k(q))
            })
            .collect();
        let exact = match (&self.exact, &m1.exact, &m2.exact) {
            (Some(f), Some(a), Some(b)) => {
                let (f, a, b) = (f.clone(), a.clone(), b.clone());
                Some(Arc::new(move |x: f64, y: f64| a(x) * f(x, y) * b(y)) as Exact2)
            }
            _ => None,
        };
        Ok(Symbol2D {
            grid: g,
            values,
            exact,
        })
    }

    /// `τ_{(ξ0,η0)} m(ξ,η) = m(ξ-ξ0, η-η0)` with `ξ0 = a·dξ`, `η0 = b·dξ`; cyclic rotation.
    pub fn translate(&self, a: i64, b: i64) -> Symbol2D {
        let n = self.grid.n() as i64;
        let values = (0..n * n)
            .map(|i| {
                let (p, q) = (i / n, i % n);
                let sp = (p - a).rem_euclid(n);
                let sq = (q - b).rem_euclid(n);
                self.values[(sp * n + sq) as usize]
            })
            .collect();
        let (x0, y0) = (a as f64 * self.grid.dxi(), b as f64 * self.grid.dxi());
        let exact = self.map_exact(|f| {
            let f = f.clone();
            Arc::new(move |x, y| f(x - x0, y - y0))
        });
        Symbol2D {
            grid: self.grid,
            values,
            exact,
        }
    }

    /// Translation by real offsets, rejected unless they are whole frequency bins.
    pub fn translate_by(&self, xi0: f64, eta0: f64) -> Result<Symbol2D> {
        let a = bins(xi0, self.grid.dxi())?;
        let b = bins(eta0, self.grid.dxi())?;
        Ok(self.translate(a, b))
    }

    /// `M_{(ξ0,η0)} m = e^{2πi(ξ0 ξ + η0 η)} m`.
    pub fn modulate(&self, xi0: f64, eta0: f64) -> Symbol2D {
        let n = self.grid.n();
        let g = self.grid;
        let values = (0..n * n)
            .map(|i| {
                let ph = 2.0 * PI * (xi0 * g.xi(i / n) + eta0 * g.xi(i % n));
                self.values[i] * Complex64::from_polar(1.0, ph)
            })
            .collect();
        let exact = self.map_exact(|f| {
            let f = f.clone();
            Arc::new(move |x, y| f(x, y) * Complex64::from_polar(1.0, 2.0 * PI * (xi0 * x + eta0 * y)))
        });
        Symbol2D {
            grid: g,
            values,
            exact,
        }
    }

    /// `D_t^q m(ξ,η) = t^{-2/q} m(ξ/t, η/t)`.
    pub fn dilate(&self, t: f64, q: f64) -> Result<Symbol2D> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidParameter(format!("dilation t must be positive, got {t}")));
        }
        let scale = t.powf(-2.0 * recip(q));
        let n = self.grid.n();
        let g = self.grid;
        let values = (0..n * n)
            .map(|i| self.eval(g.xi(i / n) / t, g.xi(i % n) / t) * scale)
            .collect();
        let exact = self.map_exact(|f| {
            let f = f.clone();
            Arc::new(move |x, y| f(x / t, y / t) * scale)
        });
        Ok(Symbol2D {
            grid: g,
            values,
            exact,
        })
    }

    /// `(dξ² Σ |m|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        crate::signal::lp_norm_slice(&self.values, self.grid.dxi().powi(2), p)
    }

    /// Rows `xi,eta,re,im`, `ξ` varying slowest.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["xi", "eta", "re", "im"])?;
        let n = self.grid.n();
        for (i, z) in self.values.iter().enumerate() {
            wr.write_record([
                self.grid.xi(i / n).to_string(),
                self.grid.xi(i % n).to_string(),
                z.re.to_string(),
                z.im.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn bins(shift: f64, dxi: f64) -> Result<i64> {
    let s = shift / dxi;
    let r = s.round();
    if (s - r).abs() > 1e-9 * s.abs().max(1.0) {
        return Err(Error::NotGridAligned(format!(
            "shift {shift} is not a multiple of the frequency spacing {dxi}"
        )));
    }
    Ok(r as i64)
}

/// In-place 2-D FFT of a row-major `n×n` array.
fn fft2(a: &mut [Complex64], n: usize, inverse: bool) {
    let run = |buf: &mut [Complex64]| {
        if inverse {
            fft_inverse(buf)
        } else {
            fft_forward(buf)
        }
    };
    a.par_chunks_mut(n).for_each(run);
    let mut col = vec![ZERO; n];
    for c in 0..n {
        for r in 0..n {
            col[r] = a[r * n + c];
        }
        run(&mut col);
        for r in 0..n {
            a[r * n + c] = col[r];
        }
    }
}

/// Closed rectangle in the frequency plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub xi_min: f64,
    pub xi_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
}

impl Rect {
    pub fn contains(&self, xi: f64, eta: f64) -> bool {
        (self.xi_min..=self.xi_max).contains(&xi) && (self.eta_min..=self.eta_max).contains(&eta)
    }
}

/// Quadrature nodes and weights on `(0, ∞)` for a dilation average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationWeights {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DilationWeights {
    pub fn point_mass(t: f64) -> Self {
        DilationWeights {
            nodes: vec![t],
            weights: vec![1.0],
        }
    }

    /// Trapezoid rule in `log t` for `∫_{t_min}^{t_max} ψ(t) dt` on `count` nodes.
    pub fn log_trapezoid(psi: impl Fn(f64) -> f64, t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) || count < 2 {
            return Err(Error::InvalidParameter(format!(
                "need 0 < t_min < t_max and at least two nodes, got [{t_min}, {t_max}] with {count}"
            )));
        }
        let h = (t_max / t_min).ln() / (count - 1) as f64;
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for i in 0..count {
            let t = t_min * (h * i as f64).exp();
            let end = if i == 0 || i == count - 1 { 0.5 } else { 1.0 };
            nodes.push(t);
            weights.push(end * h * t * psi(t));
        }
        Ok(DilationWeights { nodes, weights })
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.weights.len() || self.nodes.is_empty() {
            return Err(Error::InvalidParameter("nodes and weights must be nonempty and of equal length".into()));
        }
        if let Some(t) = self.nodes.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidParameter(format!("dilation node {t} is not positive")));
        }
        Ok(())
    }
}

/// One atom `w·δ_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub t: f64,
    pub w: Complex64,
}

/// Finite combination of point masses.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if !(a.t.is_finite() && a.w.re.is_finite() && a.w.im.is_finite()) {
                return Err(Error::NonFinite(format!("atom at {}", a.t)));
            }
        }
        Ok(AtomicMeasure { atoms })
    }

    pub fn dirac(t: f64) -> Self {
        AtomicMeasure {
            atoms: vec![Atom {
                t,
                w: Complex64::new(1.0, 0.0),
            }],
        }
    }

    /// `‖μ‖₁ = Σ|w|`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.w.norm()).sum()
    }

    /// `μ̂(s) = Σ w e^{-2πi s t}`.
    pub fn fourier(&self, s: f64) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| a.w * Complex64::from_polar(1.0, -2.0 * PI * s * a.t))
            .sum()
    }
}

/// `m(ξ,η) = M(ξ - η)`.
pub fn lift(m: &Symbol1D) -> Symbol2D {
    let n = m.grid.n();
    let g = m.grid;
    let values = (0..n * n)
        .map(|i| m.at(g.k(i / n) - g.k(i % n)))
        .collect();
    let exact = m.exact.clone().map(|f| Arc::new(move |x: f64, y: f64| f(x - y)) as Exact2);
    Symbol2D {
        grid: g,
        values,
        exact,
    }
}

/// `m(ξ,η) = M(ξ - η) φ̂(ξ + η)`, with `φ̂` read periodically on the doubled range.
///
/// For this symbol `B_m(f,g) = φ ∗ B_M(f,g)`.
pub fn mix(m: &Symbol1D, phi: &SampledSignal) -> Result<Symbol2D> {
    m.grid.ensure_same(&phi.grid)?;
    let g = m.grid;
    let n = g.n();
    let ph = dft(phi);
    let values = (0..n * n)
        .map(|i| {
            let (k, l) = (g.k(i / n), g.k(i % n));
            m.at(k - l) * ph.periodic(k + l)
        })
        .collect();
    Ok(Symbol2D {
        grid: g,
        values,
        exact: None,
    })
}

/// `m(ξ,η) = μ̂(αξ + βη)`.
pub fn symbol_from_measure(mu: &AtomicMeasure, alpha: f64, beta: f64, grid: GridSpec) -> Symbol2D {
    let mu = mu.clone();
    Symbol2D::from_fn(grid, move |x, y| mu.fourier(alpha * x + beta * y))
}

/// Symbols described by name and parameters, the form used in JSON files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolSpec {
    Constant { re: f64, im: f64 },
    Hilbert,
    Fractional { alpha: f64 },
    Gaussian { width: f64 },
    Measure { measure: AtomicMeasure, alpha: f64, beta: f64 },
}

/// A built symbol of either kind.
#[derive(Debug, Clone)]
pub enum AnySymbol {
    One(Symbol1D),
    Two(Symbol2D),
}

impl AnySymbol {
    pub fn to_2d(&self) -> Symbol2D {
        match self {
            AnySymbol::One(m) => lift(m),
            AnySymbol::Two(m) => m.clone(),
        }
    }

    pub fn grid(&self) -> GridSpec {
        match self {
            AnySymbol::One(m) => m.grid,
            AnySymbol::Two(m) => m.grid,
        }
    }
}

impl SymbolSpec {
    pub fn build(&self, grid: GridSpec) -> Result<AnySymbol> {
        Ok(match self {
            SymbolSpec::Constant { re, im } => AnySymbol::One(Symbol1D::constant(grid, Complex64::new(*re, *im))),
            SymbolSpec::Hilbert => AnySymbol::One(Symbol1D::hilbert(grid)),
            SymbolSpec::Fractional { alpha } => AnySymbol::One(Symbol1D::fractional(grid, *alpha)?),
            SymbolSpec::Gaussian { width } => AnySymbol::One(Symbol1D::gaussian(grid, *width)?),
            SymbolSpec::Measure { measure, alpha, beta } => {
                AnySymbol::Two(symbol_from_measure(measure, *alpha, *beta, grid))
            }
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        v["schema"] = serde_json::json!(1);
        Ok(serde_json::to_string(&v)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut v: serde_json::Value = serde_json::from_str(s)?;
        if let Some(obj) = v.as_object_mut() {
            if let Some(schema) = obj.remove("schema") {
                if schema != serde_json::json!(1) {
                    return Err(Error::Parse(format!("unsupported schema {schema}")));
                }
            }
        }
        Ok(serde_json::from_value(v)?)
    }
}

/// Reads a raw symbol grid: three columns `v,re,im` give a one-variable symbol,
/// four columns `xi,eta,re,im` a two-variable one. The grid must match `grid`.
pub fn read_symbol_csv<R: Read>(r: R, grid: GridSpec) -> Result<AnySymbol> {
    let mut rd = csv::Reader::from_reader(r);
    let width = rd.headers()?.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != width {
            return Err(Error::Parse(format!("ragged row of width {}", rec.len())));
        }
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let tol = 1e-9 * grid.dxi();
    match width {
        3 => {
            let n = grid.n() as i64;
            if rows.len() != 2 * grid.n() {
                return Err(Error::GridMismatch(format!("expected {} rows, got {}", 2 * n, rows.len())));
            }
            for (d, row) in (-n..n).zip(&rows) {
                if (row[0] - d as f64 * grid.dxi()).abs() > tol {
                    return Err(Error::Parse(format!("v = {} is off the difference grid", row[0])));
                }
            }
            let values = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
            Ok(AnySymbol::One(Symbol1D::new(grid, values)?))
        }
        4 => {
            let n = grid.n();
            if rows.len() != n * n {
                return Err(Error::GridMismatch(format!("expected {} rows, got {}", n * n, rows.len())));
            }
            for (i, row) in rows.iter().enumerate() {
                if (row[0] - grid.xi(i / n)).abs() > tol || (row[1] - grid.xi(i % n)).abs() > tol {
                    return Err(Error::Parse(format!("row {i} is off the frequency grid")));
                }
            }
            let values = rows.iter().map(|r| Complex64::new(r[2], r[3])).collect();
            Ok(AnySymbol::Two(Symbol2D::new(grid, values)?))
        }
        w => Err(Error::Parse(format!("symbol CSV needs 3 or 4 columns, got {w}"))),
    }
}
