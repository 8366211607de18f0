//! The bilinear Hilbert transform and the bilinear fractional integral, each with
//! a time-domain quadrature and (for the Hilbert transform) a symbol path.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::engine::apply_delta_symbol;
use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::symbol::Symbol1D;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn pv_cutoff(f: &SampledSignal, g: &SampledSignal, eps: f64) -> Result<usize> {
    f.grid.ensure_same(&g.grid)?;
    let dx = f.grid.dx();
    let m = (eps / dx).round();
    if !(eps.is_finite() && m >= 1.0 && (eps / dx - m).abs() < 1e-9 * m) {
        return Err(Error::InvalidParameter(format!(
            "truncation eps = {eps} must be a positive multiple of dx = {dx}"
        )));
    }
    if m as usize >= f.grid.n() / 2 {
        return Err(Error::InvalidParameter(format!("truncation eps = {eps} exceeds L/2")));
    }
    Ok(m as usize)
}

/// `φ(t_m) = (F(t_m) - F(-t_m)) / t_m` with `F(t) = f(x_j - t) g(x_j + t)`, periodic wrap.
#[inline]
fn odd_part(f: &[Complex64], g: &[Complex64], j: usize, m: usize, dx: f64) -> Complex64 {
    let n = f.len();
    let plus = f[(j + n - m) % n] * g[(j + m) % n];
    let minus = f[(j + m) % n] * g[(j + n - m) % n];
    (plus - minus) / (m as f64 * dx)
}

/// Plain truncated sum `(1/π) dx Σ_{|t_m| > ε} f(x-t_m) g(x+t_m) / t_m`, with `±t` paired.
///
/// First order in `ε`; kept for the refinement study.
pub fn bilinear_hilbert_truncated(f: &SampledSignal, g: &SampledSignal, eps: f64) -> Result<SampledSignal> {
    let cut = pv_cutoff(f, g, eps)?;
    let grid = f.grid;
    let n = grid.n();
    let dx = grid.dx();
    let samples = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = ZERO;
            for m in cut + 1..=n / 2 {
                acc += odd_part(&f.samples, &g.samples, j, m, dx);
            }
            acc * (dx / PI)
        })
        .collect();
    Ok(SampledSignal { grid, samples })
}

/// `(πt/L) cot(πt/L)`: the periodized kernel `Σ_k 1/(π(t + kL))` over `1/(πt)`.
fn periodization(t: f64, length: f64) -> f64 {
    let a = PI * t / length;
    if a == 0.0 {
        1.0
    } else {
        a / a.tan()
    }
}

/// Principal value `(1/π) p.v.∫ f(x-t) g(x+t) / t dt` on the grid.
///
/// Pairing `±t` turns the integrand into the even, smooth `φ(t) = (F(t) - F(-t))/t`.
/// The kernel is the periodization `(1/L) cot(πt/L)` of `1/(πt)`, the form the
/// principal value takes for wrapped inputs: cutting `1/(πt)` at `|t| = L/2`
/// instead leaves a jump there, and the jump paints a ghost of relative size
/// about `1/L` near `x = ±L/2`. The tail `t ≥ ε` is integrated by the trapezoid
/// rule and the excised core `[0, ε]` by an even quadratic through the weighted
/// `φ` at `ε` and `ε + dx`, so the result converges at second order instead of
/// dropping an `O(ε)` slab.
pub fn bilinear_hilbert_pv(f: &SampledSignal, g: &SampledSignal, eps: f64) -> Result<SampledSignal> {
    let cut = pv_cutoff(f, g, eps)?;
    let grid = f.grid;
    let n = grid.n();
    let dx = grid.dx();
    let length = grid.length();
    let weights: Vec<f64> = (0..=n / 2).map(|m| periodization(m as f64 * dx, length)).collect();
    let t1 = cut as f64 * dx;
    let t2 = t1 + dx;
    let samples = (0..n)
        .into_par_iter()
        .map(|j| {
            let phi1 = odd_part(&f.samples, &g.samples, j, cut, dx) * weights[cut];
            let phi2 = odd_part(&f.samples, &g.samples, j, cut + 1, dx) * weights[cut + 1];
            let c = (phi2 - phi1) / (t2 * t2 - t1 * t1);
            let phi0 = phi1 - c * (t1 * t1);
            let core = phi0 * t1 + c * (t1 * t1 * t1 / 3.0);
            let mut tail = phi1 * 0.5;
            for m in cut + 1..=n / 2 {
                tail += odd_part(&f.samples, &g.samples, j, m, dx) * weights[m];
            }
            (core + tail * dx) / PI
        })
        .collect();
    Ok(SampledSignal { grid, samples })
}

/// The symbol path: `B_M` with `M(v) = -i sign(v)`.
pub fn bilinear_hilbert_symbol(f: &SampledSignal, g: &SampledSignal) -> Result<SampledSignal> {
    apply_delta_symbol(&Symbol1D::hilbert(f.grid), f, g)
}

/// Treatment of the singular cell in the fractional integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OriginCell {
    /// Weight zero at `t = 0`; error `O(dx^α)`.
    Dropped,
    /// Weight `-2ζ(1-α) dx^α` at `t = 0`, the leading generalized Euler–Maclaurin
    /// correction for `|t|^{α-1}`; error `O(dx^{α+2})` on smooth inputs.
    Corrected,
}

/// `I_α(f,g)(x) = ∫ f(x-t) g(x+t) |t|^{α-1} dt` with the corrected origin cell.
pub fn bilinear_fractional(f: &SampledSignal, g: &SampledSignal, alpha: f64) -> Result<SampledSignal> {
    bilinear_fractional_with(f, g, alpha, OriginCell::Corrected)
}

pub fn bilinear_fractional_with(
    f: &SampledSignal,
    g: &SampledSignal,
    alpha: f64,
    origin: OriginCell,
) -> Result<SampledSignal> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
    }
    f.grid.ensure_same(&g.grid)?;
    let grid = f.grid;
    let n = grid.n();
    let dx = grid.dx();
    let weights: Vec<f64> = (0..=n / 2).map(|m| (m as f64 * dx).powf(alpha - 1.0)).collect();
    let w0 = match origin {
        OriginCell::Dropped => 0.0,
        OriginCell::Corrected => -2.0 * zeta(1.0 - alpha) * dx.powf(alpha),
    };
    let (fs, gs) = (&f.samples, &g.samples);
    let samples = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = ZERO;
            for m in 1..n / 2 {
                let plus = fs[(j + n - m) % n] * gs[(j + m) % n];
                let minus = fs[(j + m) % n] * gs[(j + n - m) % n];
                acc += (plus + minus) * weights[m];
            }
            // t = ±L/2 is a single grid point
            let h = n / 2;
            acc += fs[(j + h) % n] * gs[(j + h) % n] * weights[h];
            acc * dx + fs[j] * gs[j] * w0
        })
        .collect();
    Ok(SampledSignal { grid, samples })
}

/// Riemann zeta for real `s ∈ (0, 1)`, via Borwein's accelerated alternating series.
pub fn zeta(s: f64) -> f64 {
    const N: usize = 48;
    let n = N as f64;
    // d_k = n Σ_{i≤k} (n+i-1)! 4^i / ((n-i)! (2i)!)
    let mut d = Vec::with_capacity(N + 1);
    let mut term = 1.0 / n;
    let mut sum = term;
    d.push(n * sum);
    for i in 0..N {
        let fi = i as f64;
        term *= 4.0 * (n + fi) * (n - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
        sum += term;
        d.push(n * sum);
    }
    let dn = d[N];
    let mut eta = 0.0;
    for (k, dk) in d.iter().take(N).enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        eta += sign * (dk - dn) / ((k + 1) as f64).powf(s);
    }
    eta = -eta / dn;
    eta / (1.0 - 2f64.powf(1.0 - s))
}
