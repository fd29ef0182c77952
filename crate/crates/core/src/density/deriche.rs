//! Fourth-order Deriche recursive approximation of Gaussian convolution.
//!
//! The kernel is modelled as a sum of four complex exponentials
//! `h(n) = Σ αₖ exp(-λₖ|n|/σ) / (σ√2π)` split into a causal pass (n ≥ 0) and an
//! anticausal pass (n < 0). Both passes share the same denominator.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

const ALPHA: [Complex64; 2] = [Complex64::new(0.84, 1.8675), Complex64::new(-0.34015, -0.1299)];
const LAMBDA: [Complex64; 2] = [Complex64::new(1.783, 0.6318), Complex64::new(1.723, 1.997)];

/// Reflect padding in units of σ. The slowest pole decays as exp(-1.723·n/σ),
/// so the truncated tail is below 1e-5 of the response.
const PAD_SIGMAS: f64 = 8.0;

/// Recursion coefficients for one σ.
#[derive(Debug, Clone, PartialEq)]
pub struct DericheCoefficients {
    pub sigma: f64,
    /// Denominator `1 + a₁z⁻¹ + … + a₄z⁻⁴`; `a[0] == 1`.
    pub a: [f64; 5],
    /// Causal numerator `b₀ + b₁z⁻¹ + b₂z⁻² + b₃z⁻³`.
    pub b_causal: [f64; 4],
    /// Anticausal numerator, indices 1..=4 (index 0 is always zero).
    pub b_anticausal: [f64; 5],
}

fn poly_mul(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, x) in p.iter().enumerate() {
        for (j, y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl DericheCoefficients {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Param(format!("bandwidth must be positive and finite, got {sigma}")));
        }
        let one = Complex64::new(1.0, 0.0);
        let alphas = [ALPHA[0], ALPHA[0].conj(), ALPHA[1], ALPHA[1].conj()];
        let poles = [LAMBDA[0], LAMBDA[0].conj(), LAMBDA[1], LAMBDA[1].conj()].map(|l| (-l / sigma).exp());

        let mut denom = vec![one];
        for p in &poles {
            denom = poly_mul(&denom, &[one, -p]);
        }
        let mut numer = vec![Complex64::new(0.0, 0.0); 4];
        for (k, alpha) in alphas.iter().enumerate() {
            let mut term = vec![*alpha];
            for (j, p) in poles.iter().enumerate() {
                if j != k {
                    term = poly_mul(&term, &[one, -p]);
                }
            }
            for (n, t) in numer.iter_mut().zip(term) {
                *n += t;
            }
        }

        let scale = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let mut a = [0.0; 5];
        for (dst, src) in a.iter_mut().zip(&denom) {
            *dst = src.re;
        }
        let mut b = [0.0; 4];
        for (dst, src) in b.iter_mut().zip(&numer) {
            *dst = src.re * scale;
        }
        let mut ba = [0.0; 5];
        for i in 1..4 {
            ba[i] = b[i] - a[i] * b[0];
        }
        ba[4] = -a[4] * b[0];

        // unit DC gain so flat fields stay flat and mass is conserved
        let sum_a: f64 = a.iter().sum();
        let gain = (b.iter().sum::<f64>() + ba.iter().sum::<f64>()) / sum_a;
        b.iter_mut().for_each(|v| *v /= gain);
        ba.iter_mut().for_each(|v| *v /= gain);
        Ok(DericheCoefficients {
            sigma,
            a,
            b_causal: b,
            b_anticausal: ba,
        })
    }

    pub fn padding(&self) -> usize {
        (PAD_SIGMAS * self.sigma).ceil() as usize
    }

    fn causal_dc(&self) -> f64 {
        self.b_causal.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    fn anticausal_dc(&self) -> f64 {
        self.b_anticausal.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }
}

/// Half-sample symmetric reflection of an arbitrary index into `0..n`.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    let m = i.rem_euclid(2 * n as isize) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Reusable buffers for filtering one line.
#[derive(Default)]
pub struct LineScratch {
    padded: Vec<f64>,
    causal: Vec<f64>,
}

/// Filters `line` in place.
pub fn filter_line(c: &DericheCoefficients, line: &mut [f64], scratch: &mut LineScratch) {
    let n = line.len();
    if n == 0 {
        return;
    }
    let pad = c.padding();
    let len = n + 2 * pad;
    let LineScratch { padded, causal } = scratch;
    padded.clear();
    padded.extend((0..len).map(|i| line[reflect_index(i as isize - pad as isize, n)]));
    causal.clear();
    causal.resize(len, 0.0);

    let (a, b, ba) = (&c.a, &c.b_causal, &c.b_anticausal);

    // steady state for a constant extension beyond the padded ends
    let x0 = padded[0];
    let y0 = x0 * c.causal_dc();
    let mut xs = [x0; 4];
    let mut ys = [y0; 4];
    for i in 0..len {
        let x = padded[i];
        xs = [x, xs[0], xs[1], xs[2]];
        let y = b[0] * xs[0] + b[1] * xs[1] + b[2] * xs[2] + b[3] * xs[3]
            - a[1] * ys[0]
            - a[2] * ys[1]
            - a[3] * ys[2]
            - a[4] * ys[3];
        ys = [y, ys[0], ys[1], ys[2]];
        causal[i] = y;
    }

    let xe = padded[len - 1];
    let ye = xe * c.anticausal_dc();
    let mut xs = [xe; 4];
    let mut ys = [ye; 4];
    for i in (0..len).rev() {
        let y = ba[1] * xs[0] + ba[2] * xs[1] + ba[3] * xs[2] + ba[4] * xs[3]
            - a[1] * ys[0]
            - a[2] * ys[1]
            - a[3] * ys[2]
            - a[4] * ys[3];
        xs = [padded[i], xs[0], xs[1], xs[2]];
        ys = [y, ys[0], ys[1], ys[2]];
        if i >= pad && i < pad + n {
            line[i - pad] = causal[i] + y;
        }
    }
}

/// Separable 2D blur of a row-major `nx × ny` grid: rows first, then columns.
/// Lines are filtered in parallel but each line is computed sequentially, so
/// the output does not depend on the thread count.
pub fn blur_2d(values: &mut [f64], nx: usize, ny: usize, sigma: f64) -> Result<()> {
    let c = DericheCoefficients::new(sigma)?;
    assert_eq!(values.len(), nx * ny, "grid size mismatch");
    if values.is_empty() {
        return Ok(());
    }
    values
        .par_chunks_mut(nx)
        .for_each_init(LineScratch::default, |s, row| filter_line(&c, row, s));

    let mut columns = vec![0.0; nx * ny];
    for (j, row) in values.chunks(nx).enumerate() {
        for (i, v) in row.iter().enumerate() {
            columns[i * ny + j] = *v;
        }
    }
    columns
        .par_chunks_mut(ny)
        .for_each_init(LineScratch::default, |s, col| filter_line(&c, col, s));
    for (i, col) in columns.chunks(ny).enumerate() {
        for (j, v) in col.iter().enumerate() {
            values[j * nx + i] = *v;
        }
    }
    Ok(())
}
