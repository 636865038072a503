//! Gauss-Legendre quadrature rules on the unit interval.

/// 5-point Gauss-Legendre nodes on [0, 1]. Exact for polynomials of degree <= 9.
pub const GAUSS5_NODES: [f64; 5] = [
    0.046910077030668004,
    0.230765344947158454,
    0.5,
    0.769234655052841546,
    0.953089922969331996,
];

/// Weights matching [`GAUSS5_NODES`]; they sum to 1.
pub const GAUSS5_WEIGHTS: [f64; 5] = [
    0.118463442528094544,
    0.239314335249683234,
    0.284444444444444444,
    0.239314335249683234,
    0.118463442528094544,
];

/// 2-point Gauss-Legendre nodes on [0, 1]. Exact for cubics.
pub const GAUSS2_NODES: [f64; 2] = [0.211324865405187118, 0.788675134594812882];
pub const GAUSS2_WEIGHTS: [f64; 2] = [0.5, 0.5];

/// Integrate `f` over [a, b] with an n-chunk composite 5-point rule
/// (5n evaluations). Used where the integrand is not piecewise smooth
/// on the given interval.
pub fn composite_gauss5<F: FnMut(f64) -> f64>(a: f64, b: f64, chunks: usize, mut f: F) -> f64 {
    let h = (b - a) / chunks as f64;
    let mut total = 0.0;
    for c in 0..chunks {
        let left = a + c as f64 * h;
        for q in 0..5 {
            total += GAUSS5_WEIGHTS[q] * h * f(left + GAUSS5_NODES[q] * h);
        }
    }
    total
}
