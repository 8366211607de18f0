//! Evaluation of `B_m`, `B_M`, `C_K` and the trilinear pairing.
//!
//! The sum frequency `ξ+η` of two grid frequencies ranges over `[-n, n)·dξ`, twice
//! the band of the inputs. The fast paths compute the output spectrum on that
//! doubled range exactly and synthesize it at the grid points, where frequencies
//! `s` and `s ± n` coincide. The result is therefore the literal double sum of the
//! definition evaluated at every `x_j`, with no truncation.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signal::{dft, fft_inverse, parity_sign, GridSpec, SampledSignal, Spectrum};
use crate::symbol::{Symbol1D, Symbol2D};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Output spectrum on the doubled frequency range, index `s + n` for `u = s·dξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledSpectrum {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
}

impl DoubledSpectrum {
    /// Coefficient at `u = s·dξ`, zero outside `[-n, n)`.
    pub fn at(&self, s: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        if (-n..n).contains(&s) {
            self.coeffs[(s + n) as usize]
        } else {
            ZERO
        }
    }

    /// `dξ Σ_s h_s e^{2πi u_s x_j}` at every grid point.
    pub fn synthesize(&self) -> SampledSignal {
        let grid = self.grid;
        let n = grid.n();
        let ni = n as i64;
        let mut buf = vec![ZERO; n];
        for (i, c) in self.coeffs.iter().enumerate() {
            let s = i as i64 - ni;
            buf[s.rem_euclid(ni) as usize] += c * parity_sign(s);
        }
        fft_inverse(&mut buf);
        let dxi = grid.dxi();
        for z in buf.iter_mut() {
            *z *= dxi;
        }
        SampledSignal { grid, samples: buf }
    }

    /// The part of the spectrum inside the centered band.
    pub fn restrict(&self) -> Spectrum {
        let grid = self.grid;
        let coeffs = (0..grid.n()).map(|p| self.at(grid.k(p))).collect();
        Spectrum { grid, coeffs }
    }

    /// Largest coefficient outside the centered band.
    pub fn outer_max(&self) -> f64 {
        let h = self.grid.half();
        let n = self.grid.n() as i64;
        (-n..n)
            .filter(|s| *s < -h || *s >= h)
            .map(|s| self.at(s).norm())
            .fold(0.0, f64::max)
    }
}

fn same_grid(a: &SampledSignal, b: &SampledSignal) -> Result<GridSpec> {
    a.grid.ensure_same(&b.grid)?;
    Ok(a.grid)
}

/// `h_s = dξ Σ_{k+l=s} f̂_k ĝ_l m(ξ_k, η_l)` for every `s ∈ [-n, n)`.
pub fn bilinear_spectrum(m: &Symbol2D, f: &SampledSignal, g: &SampledSignal) -> Result<DoubledSpectrum> {
    let grid = same_grid(f, g)?;
    grid.ensure_same(&m.grid)?;
    let (fh, gh) = (dft(f), dft(g));
    let n = grid.n() as i64;
    let h = grid.half();
    let dxi = grid.dxi();
    let coeffs = (-n..n)
        .into_par_iter()
        .map(|s| {
            // k and l = s - k must both lie in [-h, h)
            let lo = (-h).max(s - h + 1);
            let hi = (h - 1).min(s + h);
            let mut acc = ZERO;
            for k in lo..=hi {
                let p = (k + h) as usize;
                let q = (s - k + h) as usize;
                acc += fh.coeffs[p] * gh.coeffs[q] * m.at(p, q);
            }
            acc * dxi
        })
        .collect();
    Ok(DoubledSpectrum { grid, coeffs })
}

/// `B_m(f,g)` at every grid point.
pub fn apply_bilinear(m: &Symbol2D, f: &SampledSignal, g: &SampledSignal) -> Result<SampledSignal> {
    Ok(bilinear_spectrum(m, f, g)?.synthesize())
}

/// Literal double sum `dξ² Σ_k Σ_l f̂_k ĝ_l m_kl e^{2πi(ξ_k+η_l)x_j}` at the requested samples.
pub fn apply_bilinear_direct(
    m: &Symbol2D,
    f: &SampledSignal,
    g: &SampledSignal,
    at: &[usize],
) -> Result<Vec<Complex64>> {
    let grid = same_grid(f, g)?;
    grid.ensure_same(&m.grid)?;
    let n = grid.n();
    if let Some(j) = at.iter().find(|j| **j >= n) {
        return Err(Error::InvalidParameter(format!("sample index {j} out of range")));
    }
    let (fh, gh) = (dft(f), dft(g));
    let dxi = grid.dxi();
    Ok(at
        .par_iter()
        .map(|&j| {
            let x = grid.x(j);
            let mut acc = ZERO;
            for p in 0..n {
                for q in 0..n {
                    let phase = 2.0 * std::f64::consts::PI * (grid.xi(p) + grid.xi(q)) * x;
                    acc += fh.coeffs[p] * gh.coeffs[q] * m.at(p, q) * Complex64::from_polar(1.0, phase);
                }
            }
            acc * dxi * dxi
        })
        .collect())
}

/// Output spectrum of `B_M` in the sum/difference variables: for each `u`,
/// `½ Σ_v f̂((u+v)/2) ĝ((u-v)/2) M(v)` over same-parity `v`, with cell `2dξ`.
pub fn delta_symbol_spectrum(m: &Symbol1D, f: &SampledSignal, g: &SampledSignal) -> Result<DoubledSpectrum> {
    let grid = same_grid(f, g)?;
    grid.ensure_same(&m.grid)?;
    let (fh, gh) = (dft(f), dft(g));
    let n = grid.n() as i64;
    let h = grid.half();
    let weight = 0.5 * 2.0 * grid.dxi();
    let coeffs = (-n..n)
        .into_par_iter()
        .map(|u| {
            let mut acc = ZERO;
            let start = if u.rem_euclid(2) == 0 { -n } else { -n + 1 };
            let mut v = start;
            while v < n {
                let k = (u + v) / 2;
                let l = (u - v) / 2;
                if (-h..h).contains(&k) && (-h..h).contains(&l) {
                    acc += fh.coeffs[(k + h) as usize] * gh.coeffs[(l + h) as usize] * m.at(v);
                }
                v += 2;
            }
            acc * weight
        })
        .collect();
    Ok(DoubledSpectrum { grid, coeffs })
}

/// `B_M(f,g)` at every grid point.
pub fn apply_delta_symbol(m: &Symbol1D, f: &SampledSignal, g: &SampledSignal) -> Result<SampledSignal> {
    Ok(delta_symbol_spectrum(m, f, g)?.synthesize())
}

/// `C_K(f,g)(x_j) = dx Σ_m f(x_j - t_m) g(x_j + t_m) K(t_m)` with periodic wrap.
pub fn apply_kernel(k: &SampledSignal, f: &SampledSignal, g: &SampledSignal) -> Result<SampledSignal> {
    let grid = same_grid(f, g)?;
    grid.ensure_same(&k.grid)?;
    let n = grid.n();
    let h = n / 2;
    let dx = grid.dx();
    let samples = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = ZERO;
            for (m, kv) in k.samples.iter().enumerate() {
                let a = (j + n + h - m) % n;
                let b = (j + m + n - h) % n;
                acc += f.samples[a] * g.samples[b] * kv;
            }
            acc * dx
        })
        .collect();
    Ok(SampledSignal { grid, samples })
}

/// `dξ² Σ_k Σ_l f̂_k ĝ_l ĥ(ξ_k+η_l) m_kl`, with `ĥ` read periodically on the doubled range.
///
/// Equals `dx Σ_j B_m(f,g)(x_j) h(-x_j)`.
pub fn trilinear_pairing(
    m: &Symbol2D,
    f: &SampledSignal,
    g: &SampledSignal,
    h: &SampledSignal,
) -> Result<Complex64> {
    let grid = same_grid(f, g)?;
    grid.ensure_same(&h.grid)?;
    grid.ensure_same(&m.grid)?;
    let (fh, gh, hh) = (dft(f), dft(g), dft(h));
    let n = grid.n();
    let dxi = grid.dxi();
    let total: Complex64 = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut acc = ZERO;
            for q in 0..n {
                acc += fh.coeffs[p] * gh.coeffs[q] * hh.periodic(grid.k(p) + grid.k(q)) * m.at(p, q);
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total * dxi * dxi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{random_band_limited, random_samples, SampledSignal};
    use crate::symbol::lift;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
        let d = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let s = a.iter().chain(b).map(|z| z.norm()).fold(0.0, f64::max);
        d / s.max(1e-300)
    }

    fn random_2d(g: GridSpec, rng: &mut ChaCha8Rng) -> Symbol2D {
        let n = g.n();
        let v = (0..n * n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        Symbol2D::new(g, v).unwrap()
    }

    fn random_1d(g: GridSpec, rng: &mut ChaCha8Rng) -> Symbol1D {
        let v = (0..2 * g.n())
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        Symbol1D::new(g, v).unwrap()
    }

    #[test]
    fn constant_symbol_gives_product() {
        let grid = GridSpec::new(32, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_samples(grid, &mut rng);
        let g = random_samples(grid, &mut rng);
        let prod = f.mul(&g).unwrap();
        let one = Symbol2D::constant(grid, Complex64::new(1.0, 0.0));
        assert!(rel(&apply_bilinear(&one, &f, &g).unwrap().samples, &prod.samples) < 1e-12);
        let one1 = Symbol1D::constant(grid, Complex64::new(1.0, 0.0));
        assert!(rel(&apply_bilinear(&lift(&one1), &f, &g).unwrap().samples, &prod.samples) < 1e-12);
        assert!(rel(&apply_delta_symbol(&one1, &f, &g).unwrap().samples, &prod.samples) < 1e-12);
        let direct = apply_bilinear_direct(&one, &f, &g, &[16]).unwrap();
        assert!((direct[0] - f.samples[16] * g.samples[16]).norm() < 1e-12 * prod.max_abs());
    }

    #[test]
    fn fast_matches_direct() {
        for (n, seed) in [(8, 1), (16, 2), (32, 3)] {
            let grid = GridSpec::new(n, 3.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_2d(grid, &mut rng);
            let f = random_samples(grid, &mut rng);
            let g = random_samples(grid, &mut rng);
            let fast = apply_bilinear(&m, &f, &g).unwrap();
            let all: Vec<usize> = (0..n).collect();
            let slow = apply_bilinear_direct(&m, &f, &g, &all).unwrap();
            assert!(rel(&fast.samples, &slow) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn delta_symbol_matches_lift() {
        let grid = GridSpec::new(64, 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_1d(grid, &mut rng);
        let f = random_samples(grid, &mut rng);
        let g = random_samples(grid, &mut rng);
        let a = apply_delta_symbol(&m, &f, &g).unwrap();
        let b = apply_bilinear(&lift(&m), &f, &g).unwrap();
        assert!(rel(&a.samples, &b.samples) < 1e-12);
    }

    #[test]
    fn kernel_form_matches_transform() {
        let grid = GridSpec::new(64, 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_samples(grid, &mut rng);
        let g = random_samples(grid, &mut rng);
        // any kernel: C_K equals B_M for M the periodic transform of K
        let k = random_samples(grid, &mut rng);
        let a = apply_kernel(&k, &f, &g).unwrap();
        let b = apply_delta_symbol(&Symbol1D::from_kernel(&k), &f, &g).unwrap();
        assert!(rel(&a.samples, &b.samples) < 1e-12);
        let d = SampledSignal::delta(grid);
        let c = apply_kernel(&d, &f, &g).unwrap();
        assert!(rel(&c.samples, &f.mul(&g).unwrap().samples) < 1e-13);
    }

    #[test]
    fn pairing_matches_inner_product() {
        let grid = GridSpec::new(32, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = random_2d(grid, &mut rng);
        let f = random_samples(grid, &mut rng);
        let g = random_samples(grid, &mut rng);
        let h = random_samples(grid, &mut rng);
        let b = apply_bilinear(&m, &f, &g).unwrap();
        let hr = h.reflect();
        let inner: Complex64 = b.samples.iter().zip(&hr.samples).map(|(x, y)| x * y).sum::<Complex64>() * grid.dx();
        let pair = trilinear_pairing(&m, &f, &g, &h).unwrap();
        assert!((pair - inner).norm() < 1e-11 * inner.norm().max(1.0));
        let one = Symbol2D::constant(grid, Complex64::new(1.0, 0.0));
        let fgh: Complex64 = (0..32)
            .map(|j| f.samples[j] * g.samples[j] * hr.samples[j])
            .sum::<Complex64>()
            * grid.dx();
        let p1 = trilinear_pairing(&one, &f, &g, &h).unwrap();
        assert!((p1 - fgh).norm() < 1e-11 * fgh.norm().max(1.0));
    }

    #[test]
    fn band_limited_output_stays_in_band() {
        let grid = GridSpec::new(64, 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_band_limited(grid, 16, &mut rng);
        let g = random_band_limited(grid, 16, &mut rng);
        let m = random_1d(grid, &mut rng);
        let spec = delta_symbol_spectrum(&m, &f, &g).unwrap();
        assert!(spec.outer_max() < 1e-12 * spec.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max));
        let out = spec.synthesize();
        let back = dft(&out);
        assert!(rel(&back.coeffs, &spec.restrict().coeffs) < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = GridSpec::new(16, 2.0).unwrap();
        let b = GridSpec::new(16, 3.0).unwrap();
        let f = SampledSignal::zeros(a);
        let g = SampledSignal::zeros(b);
        let m = Symbol2D::constant(a, Complex64::new(1.0, 0.0));
        assert!(apply_bilinear(&m, &f, &g).is_err());
        assert!(apply_kernel(&f, &f, &g).is_err());
    }
}
