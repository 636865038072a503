//! Banded symmetric storage, direct Cholesky factorization and the power
//! iterations for the observability constant and condition estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Seed for the deterministic power-iteration start vectors.
pub const POWER_SEED: u64 = 0x5EED;

/// Symmetric banded matrix stored by its lower band: entry (i, j) with
/// i - bw <= j <= i lives at `data[i * (bw + 1) + (j + bw - i)]`, so each
/// row is contiguous and the diagonal sits at local offset `bw`.
#[derive(Debug, Clone)]
pub struct BandedSpdMatrix {
    pub n: usize,
    pub bw: usize,
    data: Vec<f64>,
}

impl BandedSpdMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandedSpdMatrix {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline(always)]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Entry (i, j) for any i, j within the band; zero outside.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > self.bw {
            0.0
        } else {
            self.data[self.idx(hi, lo)]
        }
    }

    /// Accumulate into the lower-band entry (i >= j expected).
    #[inline(always)]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let id = self.idx(i, j);
        self.data[id] += v;
    }

    /// y = M x using symmetry of the band.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        let w = self.bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = &self.data[i * w + (lo + self.bw - i)..i * w + w];
            let mut diag_and_left = 0.0;
            for (off, &a) in row.iter().enumerate() {
                let j = lo + off;
                diag_and_left += a * x[j];
                if j < i {
                    y[j] += a * x[i];
                }
            }
            y[i] += diag_and_left;
        }
    }

    /// Largest absolute entry (used for symmetry/scale diagnostics).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// Dump the lower band as (row, col, value) triplets, 1-based indices.
    pub fn write_triplets<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "row col value")?;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let v = self.data[self.idx(i, j)];
                if v != 0.0 {
                    writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
                }
            }
        }
        Ok(())
    }
}

/// Lower-triangular banded Cholesky factor (same storage layout).
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    pub n: usize,
    pub bw: usize,
    data: Vec<f64>,
}

/// In-band Cholesky factorization M = L L^T. Fails with the offending index
/// on a non-positive pivot.
pub fn factorize(m: &BandedSpdMatrix) -> Result<CholeskyFactor> {
    let n = m.n;
    let bw = m.bw;
    let w = bw + 1;
    let mut l = m.data.clone();
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        for j in lo..=i {
            // dot of row i and row j over columns [kstart, j)
            let kstart = lo.max(j.saturating_sub(bw));
            let mut s = l[i * w + (j + bw - i)];
            if kstart < j {
                let ri = &l[i * w + (kstart + bw - i)..i * w + (j + bw - i)];
                let rj = &l[j * w + (kstart + bw - j)..j * w + bw];
                for (a, b) in ri.iter().zip(rj.iter()) {
                    s -= a * b;
                }
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::NotSpd { index: i, pivot: s });
                }
                l[i * w + bw] = s.sqrt();
            } else {
                l[i * w + (j + bw - i)] = s / l[j * w + bw];
            }
        }
    }
    Ok(CholeskyFactor { n, bw, data: l })
}

impl CholeskyFactor {
    #[cfg(test)]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.bw + 1) + (j + self.bw - i)]
    }

    /// Solve M x = b by forward and back substitution.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        let mut x = b.to_vec();
        // L y = b
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * w + (lo + bw - i)..i * w + bw];
            let mut s = x[i];
            for (off, &a) in row.iter().enumerate() {
                s -= a * x[lo + off];
            }
            x[i] = s / self.data[i * w + bw];
        }
        // L^T x = y, column-oriented so row i of L is walked contiguously
        for i in (0..n).rev() {
            let xi = x[i] / self.data[i * w + bw];
            x[i] = xi;
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * w + (lo + bw - i)..i * w + bw];
            for (off, &a) in row.iter().enumerate() {
                x[lo + off] -= a * xi;
            }
        }
        Ok(x)
    }

    /// Solve with one step of iterative refinement against the original
    /// matrix; keeps the residual near machine level even for the badly
    /// conditioned fine-mesh systems.
    pub fn solve_refined(&self, m: &BandedSpdMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.solve(b)?;
        let mut r = vec![0.0; self.n];
        m.matvec(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b.iter()) {
            *ri = bi - *ri;
        }
        let dx = self.solve(&r)?;
        for (xi, di) in x.iter_mut().zip(dx.iter()) {
            *xi += di;
        }
        Ok(x)
    }
}

/// Result of the generalized power iteration.
#[derive(Debug, Clone, Copy)]
pub struct EigenEstimate {
    pub value: f64,
    pub iterations: usize,
}

fn seeded_start(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Largest generalized eigenvalue of A p = lambda M p by power iteration on
/// M^{-1} A: y = A v, v <- M^{-1} y, with the Rayleigh quotient
/// (v^T A v)/(v^T M v) as the estimate. Converges when successive estimates
/// agree to `tol` relative.
pub fn generalized_max_eig(
    a: &BandedSpdMatrix,
    m: &BandedSpdMatrix,
    factor: &CholeskyFactor,
    tol: f64,
    max_iter: usize,
) -> Result<EigenEstimate> {
    let n = m.n;
    let mut v = seeded_start(n);
    let mut y = vec![0.0; n];
    let mut mv = vec![0.0; n];
    let mut last = 0.0;
    for it in 0..max_iter {
        a.matvec(&v, &mut y);
        m.matvec(&v, &mut mv);
        let num = dot(&v, &y);
        let den = dot(&v, &mv);
        let lambda = num / den;
        let z = factor.solve(&y)?;
        let nz = dot(&z, &z).sqrt();
        if nz == 0.0 {
            // A v landed in the kernel; restart deterministically shifted
            v = seeded_start(n).iter().map(|x| x + 1.0).collect();
            continue;
        }
        for (vi, zi) in v.iter_mut().zip(z.iter()) {
            *vi = zi / nz;
        }
        if it > 2 && (lambda - last).abs() <= tol * lambda.abs() {
            return Ok(EigenEstimate {
                value: lambda,
                iterations: it + 1,
            });
        }
        last = lambda;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last,
    })
}

/// Discrete observability constant: the largest eigenvalue of the pencil
/// (A, M), via [`generalized_max_eig`] at tolerance 1e-8.
pub fn observability_constant(
    a: &BandedSpdMatrix,
    m: &BandedSpdMatrix,
    factor: &CholeskyFactor,
) -> Result<EigenEstimate> {
    generalized_max_eig(a, m, factor, 1e-8, 10_000)
}

/// Largest eigenvalue of M by plain power iteration.
fn max_eig(m: &BandedSpdMatrix, tol: f64, max_iter: usize) -> Result<EigenEstimate> {
    let n = m.n;
    let mut v = seeded_start(n);
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut y = vec![0.0; n];
    let mut last = 0.0;
    for it in 0..max_iter {
        m.matvec(&v, &mut y);
        let lambda = dot(&v, &y);
        let ny = dot(&y, &y).sqrt();
        for (vi, yi) in v.iter_mut().zip(y.iter()) {
            *vi = yi / ny;
        }
        if it > 2 && (lambda - last).abs() <= tol * lambda.abs() {
            return Ok(EigenEstimate {
                value: lambda,
                iterations: it + 1,
            });
        }
        last = lambda;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last,
    })
}

/// Largest eigenvalue of M^{-1} (inverse power iteration via the factor).
fn max_eig_inverse(
    m: &BandedSpdMatrix,
    factor: &CholeskyFactor,
    tol: f64,
    max_iter: usize,
) -> Result<EigenEstimate> {
    let n = m.n;
    let mut v = seeded_start(n);
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut last = 0.0;
    let mut mv = vec![0.0; n];
    for it in 0..max_iter {
        let y = factor.solve(&v)?;
        m.matvec(&v, &mut mv);
        // Rayleigh quotient of M^{-1}: v^T M^{-1} v = v^T y
        let lambda = dot(&v, &y);
        let ny = dot(&y, &y).sqrt();
        for (vi, yi) in v.iter_mut().zip(y.iter()) {
            *vi = yi / ny;
        }
        if it > 2 && (lambda - last).abs() <= tol * lambda.abs() {
            return Ok(EigenEstimate {
                value: lambda,
                iterations: it + 1,
            });
        }
        last = lambda;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last,
    })
}

/// Spectral condition estimate kappa ~ lambda_max(M) lambda_max(M^{-1}),
/// both by power iteration at 1e-6 relative tolerance.
pub fn condition_estimate(m: &BandedSpdMatrix, factor: &CholeskyFactor) -> Result<f64> {
    let hi = max_eig(m, 1e-6, 10_000)?;
    let inv = max_eig_inverse(m, factor, 1e-6, 10_000)?;
    Ok(hi.value * inv.value)
}
