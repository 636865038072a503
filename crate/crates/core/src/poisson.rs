//! Closed-form inverse of the 1D Dirichlet Laplacian on piecewise
//! polynomials: solves -w'' = f, w(0) = w(1) = 0 exactly per interval.
//!
//! Used for the H^{-1} duality pairing in the load and for H^{-1} norms of
//! final velocities.

use crate::quad::{GAUSS5_NODES, GAUSS5_WEIGHTS};

pub const MAX_DEG: usize = 5;

/// Piecewise polynomial on a partition of [0, 1]; coefficients are in the
/// local variable (x - breaks[k]).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    pub breaks: Vec<f64>,
    /// coeffs[k][d] multiplies (x - breaks[k])^d on interval k.
    pub coeffs: Vec<[f64; MAX_DEG + 1]>,
}

impl PiecewisePoly {
    /// Piecewise-linear interpolant through uniformly spaced nodal values.
    pub fn linear_from_nodes(values: &[f64]) -> Self {
        let n = values.len() - 1;
        let dx = 1.0 / n as f64;
        let breaks = (0..=n).map(|k| k as f64 * dx).collect();
        let coeffs = (0..n)
            .map(|k| {
                let mut c = [0.0; MAX_DEG + 1];
                c[0] = values[k];
                c[1] = (values[k + 1] - values[k]) / dx;
                c
            })
            .collect();
        PiecewisePoly { breaks, coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.locate(x);
        let u = x - self.breaks[k];
        let mut acc = 0.0;
        for d in (0..=MAX_DEG).rev() {
            acc = acc * u + self.coeffs[k][d];
        }
        acc
    }

    fn locate(&self, x: f64) -> usize {
        let n = self.coeffs.len();
        match self
            .breaks
            .binary_search_by(|p| p.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    /// Antiderivative with F(breaks[0]) = 0, continuous across breakpoints.
    /// Panics if the degree would exceed the storage cap.
    fn antiderivative(&self) -> PiecewisePoly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        let mut accum = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            assert!(
                c[MAX_DEG] == 0.0,
                "antiderivative would exceed degree {MAX_DEG}"
            );
            let mut out = [0.0; MAX_DEG + 1];
            out[0] = accum;
            for d in 0..MAX_DEG {
                out[d + 1] = c[d] / (d + 1) as f64;
            }
            let h = self.breaks[k + 1] - self.breaks[k];
            let mut end = 0.0;
            for d in (0..=MAX_DEG).rev() {
                end = end * h + out[d];
            }
            accum = end;
            coeffs.push(out);
        }
        PiecewisePoly {
            breaks: self.breaks.clone(),
            coeffs,
        }
    }

    /// L2 norm over [0, 1] by per-interval Gauss quadrature (exact while the
    /// squared degree stays <= 9, i.e. degree <= 4 pieces).
    pub fn l2_norm(&self) -> f64 {
        let mut total = 0.0;
        for k in 0..self.coeffs.len() {
            let h = self.breaks[k + 1] - self.breaks[k];
            for q in 0..5 {
                let x = self.breaks[k] + GAUSS5_NODES[q] * h;
                let v = self.eval(x);
                total += GAUSS5_WEIGHTS[q] * h * v * v;
            }
        }
        total.sqrt()
    }
}

/// Solution of -w'' = f with homogeneous Dirichlet conditions: returns
/// (w, w'). `f` must be piecewise of degree <= 3 so that w fits degree 5.
pub fn neg_laplacian_inverse_1d(f: &PiecewisePoly) -> (PiecewisePoly, PiecewisePoly) {
    let big_f = f.antiderivative(); // F' = f,   F(0) = 0
    let big_g = big_f.antiderivative(); // G' = F, G(0) = 0
    let c1 = big_g.eval(1.0); // w = -G + C1 x, w(1) = 0
    // w'(x) = -F(x) + C1
    let mut wp = big_f.clone();
    for (k, c) in wp.coeffs.iter_mut().enumerate() {
        for d in c.iter_mut() {
            *d = -*d;
        }
        let _ = k;
    }
    for c in wp.coeffs.iter_mut() {
        c[0] += c1;
    }
    // w(x) = -G(x) + C1 x; express C1 x in local coordinates per interval
    let mut w = big_g.clone();
    for (k, c) in w.coeffs.iter_mut().enumerate() {
        for d in c.iter_mut() {
            *d = -*d;
        }
        c[0] += c1 * w.breaks[k];
        c[1] += c1;
    }
    (w, wp)
}

/// H^{-1}(0,1) norm of `f`: the L2 norm of w' where -w'' = f, w(0)=w(1)=0.
pub fn h_minus1_norm(f: &PiecewisePoly) -> f64 {
    let (_, wp) = neg_laplacian_inverse_1d(f);
    wp.l2_norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_load_gives_parabola() {
        let f = PiecewisePoly::linear_from_nodes(&vec![1.0; 9]);
        let (w, wp) = neg_laplacian_inverse_1d(&f);
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert!((w.eval(x) - x * (1.0 - x) / 2.0).abs() < 1e-14, "w({x})");
            assert!((wp.eval(x) - (1.0 - 2.0 * x) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_load() {
        // f = x -> w = (x - x^3)/6
        let nodes: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let f = PiecewisePoly::linear_from_nodes(&nodes);
        let (w, _) = neg_laplacian_inverse_1d(&f);
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert!((w.eval(x) - (x - x * x * x) / 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_is_linear_in_the_load() {
        let f: Vec<f64> = (0..=8).map(|k| (k as f64).sin()).collect();
        let g: Vec<f64> = (0..=8).map(|k| (k as f64 * 0.7).cos()).collect();
        let (alpha, beta) = (1.3, -0.4);
        let combo: Vec<f64> = f
            .iter()
            .zip(&g)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        let (wf, _) = neg_laplacian_inverse_1d(&PiecewisePoly::linear_from_nodes(&f));
        let (wg, _) = neg_laplacian_inverse_1d(&PiecewisePoly::linear_from_nodes(&g));
        let (wc, _) = neg_laplacian_inverse_1d(&PiecewisePoly::linear_from_nodes(&combo));
        for i in 0..=30 {
            let x = i as f64 / 30.0;
            let lin = alpha * wf.eval(x) + beta * wg.eval(x);
            assert!((wc.eval(x) - lin).abs() < 1e-13);
        }
    }

    #[test]
    fn h_minus1_of_unit_velocity() {
        let f = PiecewisePoly::linear_from_nodes(&vec![1.0; 11]);
        let want = 1.0 / (2.0 * 3.0_f64.sqrt());
        assert!((h_minus1_norm(&f) - want).abs() < 1e-13);
    }

    #[test]
    fn h_minus1_of_sine_velocity() {
        // exact: 1/(pi sqrt 2); the piecewise-linear sampling is O(dx^2) off
        let n = 200;
        let nodes: Vec<f64> = (0..=n)
            .map(|k| (std::f64::consts::PI * k as f64 / n as f64).sin())
            .collect();
        let f = PiecewisePoly::linear_from_nodes(&nodes);
        let want = 1.0 / (std::f64::consts::PI * 2.0_f64.sqrt());
        assert!((h_minus1_norm(&f) - want).abs() < 1e-5);
    }
}
