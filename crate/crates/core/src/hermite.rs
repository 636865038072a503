//! Cubic Hermite shape functions on a reference interval.
//!
//! The four shapes on an interval of length `delta`, in the local coordinate
//! c = (x - x_left) / delta:
//!
//! ```text
//! L0 = (1 + 2c)(1 - c)^2     value at the left node
//! L1 = c^2 (3 - 2c)          value at the right node
//! L2 = delta c (1 - c)^2     derivative at the left node
//! L3 = delta c^2 (c - 1)     derivative at the right node
//! ```
//!
//! L2 and L3 carry the interval length so that the degrees of freedom are
//! physical derivatives: d/dx L2 = 1 at c = 0 regardless of delta.

use crate::error::{Error, Result};

/// Evaluate shape `i` (0..=3) or its physical derivative of order `deriv`
/// (0..=2) at local coordinate `c` on an interval of length `delta`.
pub fn hermite_eval(i: usize, c: f64, delta: f64, deriv: usize) -> Result<f64> {
    if deriv > 2 {
        return Err(Error::UnsupportedDerivative(deriv));
    }
    Ok(shape(i, c, delta, deriv))
}

/// Unchecked fast path used by the assembly loops.
#[inline(always)]
pub fn shape(i: usize, c: f64, delta: f64, deriv: usize) -> f64 {
    match (i, deriv) {
        (0, 0) => (1.0 + 2.0 * c) * (1.0 - c) * (1.0 - c),
        (0, 1) => (6.0 * c * c - 6.0 * c) / delta,
        (0, 2) => (12.0 * c - 6.0) / (delta * delta),
        (1, 0) => c * c * (3.0 - 2.0 * c),
        (1, 1) => (6.0 * c - 6.0 * c * c) / delta,
        (1, 2) => (6.0 - 12.0 * c) / (delta * delta),
        (2, 0) => delta * c * (1.0 - c) * (1.0 - c),
        (2, 1) => 3.0 * c * c - 4.0 * c + 1.0,
        (2, 2) => (6.0 * c - 4.0) / delta,
        (3, 0) => delta * c * c * (c - 1.0),
        (3, 1) => 3.0 * c * c - 2.0 * c,
        (3, 2) => (6.0 * c - 2.0) / delta,
        _ => panic!("invalid shape index {i}"),
    }
}

/// Values and first two physical derivatives of all four shapes at `c`.
#[inline(always)]
pub fn shape_row(c: f64, delta: f64) -> [[f64; 3]; 4] {
    let mut out = [[0.0; 3]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (d, v) in row.iter_mut().enumerate() {
            *v = shape(i, c, delta, d);
        }
    }
    out
}

/// Exact values of the interpolation-error moment integrals on one cell,
/// paired with their quadrature evaluation.
///
/// The six aggregates are, summed over the four cell corners (i, j):
/// `|m_ij|^2`, `|n_ij|^2`, `|p_ij|^2`, `|L_i L_j|^2 |t - t_j|^3`,
/// `|L_i L_j|^2 |x - x_i|^3` and `|L_i L_j|^2 |x - x_i|^2 |t - t_j|^3`,
/// where m, n, p are the first-order Taylor defect factors of the
/// interpolation remainder.
#[derive(Debug, Clone)]
pub struct MomentTable {
    /// (name, quadrature value, closed-form value) for each aggregate.
    pub entries: Vec<(&'static str, f64, f64)>,
}

/// Compute the moment table for a cell of size `dx` x `dt` by 12x12 Gauss
/// quadrature (all integrands are polynomials of degree <= 10 per variable)
/// and tabulate the closed forms alongside.
pub fn element_moment_oracles(dx: f64, dt: f64) -> MomentTable {
    // 12-point Gauss on [0,1], generated from the 5-point rule by composite
    // refinement would lose exactness; use nested composite of the 5-point
    // rule over 4 chunks instead (exact through degree 9 per chunk, and the
    // integrands are single polynomials so chunking keeps exactness).
    let quad = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
        let mut total = 0.0;
        for cx in 0..4 {
            for ct in 0..4 {
                for qx in 0..5 {
                    for qt in 0..5 {
                        let x = (cx as f64 + crate::quad::GAUSS5_NODES[qx]) / 4.0;
                        let t = (ct as f64 + crate::quad::GAUSS5_NODES[qt]) / 4.0;
                        let w = crate::quad::GAUSS5_WEIGHTS[qx] * crate::quad::GAUSS5_WEIGHTS[qt]
                            / 16.0;
                        total += w * f(x, t);
                    }
                }
            }
        }
        total * dx * dt
    };
    // local node positions in unit coordinates
    let xi = [0.0, 1.0];
    let val = |i: usize, c: f64, d: f64| shape(i, c, d, 0);

    let mut m2 = 0.0_f64;
    let mut n2 = 0.0;
    let mut p2 = 0.0;
    let mut q_t3 = 0.0;
    let mut q_x3 = 0.0;
    let mut q_x2t3 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            m2 += quad(&|cx, ct| {
                let m = (val(i, cx, dx) * (cx - xi[i]) * dx - val(i + 2, cx, dx)) * val(j, ct, dt);
                m * m
            });
            n2 += quad(&|cx, ct| {
                let n = val(i, cx, dx) * (val(j, ct, dt) * (ct - xi[j]) * dt - val(j + 2, ct, dt));
                n * n
            });
            p2 += quad(&|cx, ct| {
                let p = val(i, cx, dx) * val(j, ct, dt) * (cx - xi[i]) * dx * (ct - xi[j]) * dt
                    - val(i + 2, cx, dx) * val(j + 2, ct, dt);
                p * p
            });
            q_t3 += quad(&|cx, ct| {
                let b = val(i, cx, dx) * val(j, ct, dt);
                b * b * ((ct - xi[j]) * dt).abs().powi(3)
            });
            q_x3 += quad(&|cx, ct| {
                let b = val(i, cx, dx) * val(j, ct, dt);
                b * b * ((cx - xi[i]) * dx).abs().powi(3)
            });
            q_x2t3 += quad(&|cx, ct| {
                let b = val(i, cx, dx) * val(j, ct, dt);
                let xm = (cx - xi[i]) * dx;
                b * b * xm * xm * ((ct - xi[j]) * dt).abs().powi(3)
            });
        }
    }
    let dx3 = dx * dx * dx;
    let dt3 = dt * dt * dt;
    MomentTable {
        entries: vec![
            ("sum |m_ij|^2", m2, 104.0 / 11025.0 * dx3 * dt),
            ("sum |n_ij|^2", n2, 104.0 / 11025.0 * dx * dt3),
            ("sum |p_ij|^2", p2, 353.0 / 198450.0 * dx3 * dt3),
            ("sum |L L|^2 |t-tj|^3", q_t3, 143.0 / 7350.0 * dx * dt3 * dt),
            ("sum |L L|^2 |x-xi|^3", q_x3, 143.0 / 7350.0 * dx3 * dx * dt),
            (
                "sum |L L|^2 |x-xi|^2 |t-tj|^3",
                q_x2t3,
                209.0 / 132300.0 * dx3 * dt3 * dt,
            ),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_interpolation_properties() {
        assert_eq!(hermite_eval(0, 0.0, 1.0, 0).unwrap(), 1.0);
        assert_eq!(hermite_eval(0, 1.0, 1.0, 0).unwrap(), 0.0);
        assert_eq!(hermite_eval(1, 1.0, 1.0, 0).unwrap(), 1.0);
        // derivative dof normalization is independent of the interval length
        for delta in [0.1, 1.0, 7.5] {
            assert!((hermite_eval(2, 0.0, delta, 1).unwrap() - 1.0).abs() < 1e-15);
            assert!((hermite_eval(3, 1.0, delta, 1).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(hermite_eval(2, 0.0, delta, 0).unwrap(), 0.0);
            assert_eq!(hermite_eval(2, 1.0, delta, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn derivative_order_capped() {
        assert!(matches!(
            hermite_eval(0, 0.5, 1.0, 3),
            Err(Error::UnsupportedDerivative(3))
        ));
    }

    #[test]
    fn partition_of_unity() {
        for q in 0..25 {
            let c = (q as f64 + 0.5) / 25.0;
            let s = shape(0, c, 0.37, 0) + shape(1, c, 0.37, 0);
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn l2_shape_squared_integral() {
        // int_0^delta |L2|^2 dx = delta^3 / 105
        for delta in [0.25, 1.0, 2.2] {
            let mut v = 0.0;
            for q in 0..5 {
                let c = crate::quad::GAUSS5_NODES[q];
                v += crate::quad::GAUSS5_WEIGHTS[q] * delta * shape(2, c, delta, 0).powi(2);
            }
            let exact = delta * delta * delta / 105.0;
            assert!((v - exact).abs() <= 1e-14 * exact.max(1.0), "delta={delta}");
        }
    }

    #[test]
    fn moment_identities_all_match() {
        for (dx, dt) in [(0.1, 0.1), (0.05, 0.11), (0.31, 0.07)] {
            let table = element_moment_oracles(dx, dt);
            assert_eq!(table.entries.len(), 6);
            for (name, got, want) in &table.entries {
                let rel = (got - want).abs() / want.abs();
                assert!(rel < 1e-12, "{name} at ({dx},{dt}): got {got}, want {want}");
            }
        }
    }

    #[test]
    fn first_derivatives_match_finite_differences() {
        let delta = 0.73;
        let eps = 1e-6;
        for i in 0..4 {
            for c in [0.2, 0.5, 0.8] {
                let fd = (shape(i, c + eps, delta, 0) - shape(i, c - eps, delta, 0))
                    / (2.0 * eps * delta);
                let an = shape(i, c, delta, 1);
                assert!((fd - an).abs() < 1e-8, "shape {i} at c={c}: {fd} vs {an}");
            }
        }
    }
}
