//! Assembly of the discrete variational problem: the weighted bilinear form
//!
//! ```text
//! m(p, q) = int_QT w(x,t) Lp Lq dx dt + int_0^T a(1)^2 w0(t) p_x(1,t) q_x(1,t) dt
//! ```
//!
//! with w = rho^{-2} and w0 = theta^2 rho(1,.)^{-2} evaluated either at the
//! quadrature points (exact mode) or through their nodal interpolants
//! (interpolated mode, the production problem), the load built from the
//! interpolated initial data, and the t = 0 observability form.
//!
//! Quadrature is a 5x5 tensor Gauss rule per cell: in interpolated mode the
//! integrand is a polynomial of degree <= 7 per variable, so integration is
//! exact.

use std::sync::Arc;

use crate::error::Result;
use crate::field::FieldPh;
use crate::hermite::shape;
use crate::mesh::DofMap;
use crate::poisson::{neg_laplacian_inverse_1d, PiecewisePoly};
use crate::problem::{CoefficientField, InitialData, PotentialField, ProblemConfig};
use crate::quad::{GAUSS5_NODES, GAUSS5_WEIGHTS};
use crate::linalg::BandedSpdMatrix;

/// Whether weights enter the form exactly or through nodal interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// rho^{-2} and w0 evaluated at quadrature points.
    Exact,
    /// Bilinear interpolant of rho^{-2} on each cell and linear-in-time
    /// interpolant of w0 on each boundary interval.
    Interpolated,
}

/// Second derivatives of a trial function at a point, as needed by L.
#[derive(Debug, Clone, Copy)]
pub struct ShapeDerivs {
    pub value: f64,
    pub dx: f64,
    pub dxx: f64,
    pub dtt: f64,
}

/// L q = q_tt - a_x q_x - a q_xx + b q at a point.
#[inline(always)]
pub fn apply_l_to_shape(
    sd: &ShapeDerivs,
    a: &CoefficientField,
    b: &PotentialField,
    x: f64,
    t: f64,
) -> f64 {
    sd.dtt - a.eval_dx(x) * sd.dx - a.eval(x) * sd.dxx + b.eval(x, t) * sd.value
}

/// Assembled system with its provenance.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: BandedSpdMatrix,
    pub rhs: Vec<f64>,
    pub dofs: Arc<DofMap>,
    pub mode: WeightMode,
}

/// Local dof order inside one cell: corner-major (j, i), kinds contiguous.
/// Index = 4 (2 j + i) + d.
#[inline(always)]
fn local_globals(dofs: &DofMap, k: usize, l: usize) -> [Option<usize>; 16] {
    let mut g = [None; 16];
    for j in 0..2 {
        for i in 0..2 {
            for d in 0..4 {
                g[4 * (2 * j + i) + d] = dofs.free(k + i, l + j, d);
            }
        }
    }
    g
}

/// Shape tables at the 5 Gauss nodes: table[q][shape][deriv].
fn shape_table(delta: f64) -> [[[f64; 3]; 4]; 5] {
    let mut t = [[[0.0; 3]; 4]; 5];
    for (q, tq) in t.iter_mut().enumerate() {
        for (i, ti) in tq.iter_mut().enumerate() {
            for (d, td) in ti.iter_mut().enumerate() {
                *td = shape(i, GAUSS5_NODES[q], delta, d);
            }
        }
    }
    t
}

/// Assemble the weighted space-time matrix.
pub fn assemble_m(
    dofs: &Arc<DofMap>,
    config: &ProblemConfig,
    mode: WeightMode,
) -> Result<BandedSpdMatrix> {
    let mesh = &dofs.mesh;
    let w = &config.weights;
    let a = &config.coefficient;
    let b = &config.potential;
    let dx = mesh.dx;
    let dt = mesh.dt;
    let mut m = BandedSpdMatrix::zeros(dofs.n_free, dofs.half_bandwidth());

    // nodal rho^{-2} grid for the interpolated mode
    let mut wnode = vec![0.0; (mesh.nx + 1) * (mesh.nt + 1)];
    if mode == WeightMode::Interpolated {
        for l in 0..=mesh.nt {
            for k in 0..=mesh.nx {
                wnode[l * (mesh.nx + 1) + k] = w.rho_inv2(mesh.node_x(k), mesh.node_t(l))?;
            }
        }
    }

    let xs = shape_table(dx);
    let ts = shape_table(dt);
    let area = dx * dt;

    let mut lphi = [[0.0f64; 16]; 25];
    for l in 0..mesh.nt {
        let tl = mesh.node_t(l);
        for k in 0..mesh.nx {
            let xk = mesh.node_x(k);
            // Lphi for the 16 local shapes at the 25 quadrature points
            for qx in 0..5 {
                let x = xk + GAUSS5_NODES[qx] * dx;
                let av = a.eval(x);
                let axv = a.eval_dx(x);
                for qt in 0..5 {
                    let t = tl + GAUSS5_NODES[qt] * dt;
                    let bv = b.eval(x, t);
                    let row = &mut lphi[5 * qx + qt];
                    for j in 0..2 {
                        for i in 0..2 {
                            for d in 0..4 {
                                let xi = i + 2 * ((d == 1 || d == 3) as usize);
                                let tj = j + 2 * ((d == 2 || d == 3) as usize);
                                let x0 = xs[qx][xi][0];
                                let x1 = xs[qx][xi][1];
                                let x2 = xs[qx][xi][2];
                                let t0 = ts[qt][tj][0];
                                let t2 = ts[qt][tj][2];
                                row[4 * (2 * j + i) + d] =
                                    x0 * t2 - axv * x1 * t0 - av * x2 * t0 + bv * x0 * t0;
                            }
                        }
                    }
                }
            }
            // weight at each quadrature point
            let corners = if mode == WeightMode::Interpolated {
                let base = l * (mesh.nx + 1) + k;
                [
                    wnode[base],
                    wnode[base + mesh.nx + 1],
                    wnode[base + 1],
                    wnode[base + mesh.nx + 2],
                ]
            } else {
                [0.0; 4]
            };
            let mut ke = [[0.0f64; 16]; 16];
            for qx in 0..5 {
                let cx = GAUSS5_NODES[qx];
                for qt in 0..5 {
                    let ct = GAUSS5_NODES[qt];
                    let weight = match mode {
                        WeightMode::Interpolated => {
                            corners[0] * (1.0 - cx) * (1.0 - ct)
                                + corners[1] * (1.0 - cx) * ct
                                + corners[2] * cx * (1.0 - ct)
                                + corners[3] * cx * ct
                        }
                        WeightMode::Exact => {
                            w.rho_inv2(xk + cx * dx, tl + ct * dt)?
                        }
                    };
                    let scale = weight * GAUSS5_WEIGHTS[qx] * GAUSS5_WEIGHTS[qt] * area;
                    let row = &lphi[5 * qx + qt];
                    for a_ in 0..16 {
                        let va = row[a_] * scale;
                        for b_ in 0..=a_ {
                            ke[a_][b_] += va * row[b_];
                        }
                    }
                }
            }
            let globals = local_globals(dofs, k, l);
            scatter_symmetric(&mut m, &globals, &ke);
        }
    }

    // boundary trace term over the x = 1 node line
    let a1 = a.eval(1.0);
    let a1sq = a1 * a1;
    for l in 0..mesh.nt {
        let tl = mesh.node_t(l);
        let w0_left = w.control_weight(tl)?;
        let w0_right = w.control_weight(tl + dt)?;
        // local order: (ux, uxt) at level l then level l+1
        let globals = [
            dofs.free(mesh.nx, l, 1),
            dofs.free(mesh.nx, l, 3),
            dofs.free(mesh.nx, l + 1, 1),
            dofs.free(mesh.nx, l + 1, 3),
        ];
        let mut ke = [[0.0f64; 4]; 4];
        for qt in 0..5 {
            let ct = GAUSS5_NODES[qt];
            let w0 = match mode {
                WeightMode::Interpolated => w0_left * (1.0 - ct) + w0_right * ct,
                WeightMode::Exact => w.control_weight(tl + ct * dt)?,
            };
            let sh = [ts[qt][0][0], ts[qt][2][0], ts[qt][1][0], ts[qt][3][0]];
            let scale = a1sq * w0 * GAUSS5_WEIGHTS[qt] * dt;
            for a_ in 0..4 {
                let va = sh[a_] * scale;
                for b_ in 0..=a_ {
                    ke[a_][b_] += va * sh[b_];
                }
            }
        }
        let mut g16 = [None; 16];
        let mut k16 = [[0.0; 16]; 16];
        for (i, gi) in globals.iter().enumerate() {
            g16[i] = *gi;
            for j in 0..=i {
                k16[i][j] = ke[i][j];
            }
        }
        scatter_symmetric(&mut m, &g16, &k16);
    }
    Ok(m)
}

fn scatter_symmetric(
    m: &mut BandedSpdMatrix,
    globals: &[Option<usize>; 16],
    ke: &[[f64; 16]; 16],
) {
    for (a_, ga) in globals.iter().enumerate() {
        let Some(ga) = *ga else { continue };
        for (b_, gb) in globals.iter().enumerate() {
            let Some(gb) = *gb else { continue };
            if gb > ga {
                continue;
            }
            // ke holds the lower local triangle
            let v = if b_ <= a_ { ke[a_][b_] } else { ke[b_][a_] };
            if v != 0.0 {
                m.add(ga, gb, v);
            }
        }
    }
}

/// Load vector: only dofs on the t = 0 line receive contributions,
///
/// ```text
/// l_j = int pi(y0) (phi_j)_t(x, 0) dx - int w'(x) (phi_j)_x(x, 0) dx
/// ```
///
/// where -w'' = pi(y1), w(0) = w(1) = 0 in closed form.
pub fn assemble_rhs(dofs: &Arc<DofMap>, data: &InitialData) -> Vec<f64> {
    let mesh = &dofs.mesh;
    let dx = mesh.dx;
    let mut rhs = vec![0.0; dofs.n_free];

    let y0n: Vec<f64> = (0..=mesh.nx)
        .map(|k| data.y0.sample_node(mesh.node_x(k)))
        .collect();
    let y1n: Vec<f64> = (0..=mesh.nx)
        .map(|k| data.y1.sample_node(mesh.node_x(k)))
        .collect();
    let (_, wprime) = neg_laplacian_inverse_1d(&PiecewisePoly::linear_from_nodes(&y1n));

    let xs = shape_table(dx);
    for k in 0..mesh.nx {
        let xk = mesh.node_x(k);
        for q in 0..5 {
            let c = GAUSS5_NODES[q];
            let x = xk + c * dx;
            let wq = GAUSS5_WEIGHTS[q] * dx;
            let y0v = y0n[k] * (1.0 - c) + y0n[k + 1] * c;
            let wp = wprime.eval(x);
            for i in 0..2 {
                // q_t(x, 0) pairs with the u_t / u_xt dofs at level 0
                if let Some(g) = dofs.free(k + i, 0, 2) {
                    rhs[g] += y0v * xs[q][i][0] * wq;
                }
                if let Some(g) = dofs.free(k + i, 0, 3) {
                    rhs[g] += y0v * xs[q][i + 2][0] * wq;
                }
                // q_x(x, 0) pairs with the u / u_x dofs at level 0
                if let Some(g) = dofs.free(k + i, 0, 0) {
                    rhs[g] -= wp * xs[q][i][1] * wq;
                }
                if let Some(g) = dofs.free(k + i, 0, 1) {
                    rhs[g] -= wp * xs[q][i + 2][1] * wq;
                }
            }
        }
    }
    rhs
}

/// Observability form on the t = 0 line:
/// (A p, q) = int p_x(x,0) q_x(x,0) + p_t(x,0) q_t(x,0) dx.
/// Positive semidefinite, nonzero only for level-0 dofs.
pub fn assemble_a_obs(dofs: &Arc<DofMap>) -> BandedSpdMatrix {
    let mesh = &dofs.mesh;
    let dx = mesh.dx;
    // only level-0 dofs couple, and only across one spatial cell; the band
    // is far narrower than the full form's
    let mut bw = 0usize;
    for k in 0..mesh.nx {
        let mut lo = usize::MAX;
        let mut hi = 0usize;
        for i in 0..2 {
            for d in 0..4 {
                if let Some(g) = dofs.free(k + i, 0, d) {
                    lo = lo.min(g);
                    hi = hi.max(g);
                }
            }
        }
        bw = bw.max(hi - lo);
    }
    let mut a = BandedSpdMatrix::zeros(dofs.n_free, bw);
    let xs = shape_table(dx);
    // 1D Hermite stiffness and mass on one interval, local order
    // (left value, left deriv, right value, right deriv)
    let mut ks = [[0.0f64; 4]; 4];
    let mut km = [[0.0f64; 4]; 4];
    for q in 0..5 {
        let wq = GAUSS5_WEIGHTS[q] * dx;
        let shv = [xs[q][0][0], xs[q][2][0], xs[q][1][0], xs[q][3][0]];
        let shd = [xs[q][0][1], xs[q][2][1], xs[q][1][1], xs[q][3][1]];
        for i in 0..4 {
            for j in 0..4 {
                ks[i][j] += shd[i] * shd[j] * wq;
                km[i][j] += shv[i] * shv[j] * wq;
            }
        }
    }
    for k in 0..mesh.nx {
        // p(., 0) lives on (u, ux), p_t(., 0) on (ut, uxt)
        let trace_dofs = [
            [(k, 0usize), (k, 1), (k + 1, 0), (k + 1, 1)],
            [(k, 2), (k, 3), (k + 1, 2), (k + 1, 3)],
        ];
        for (block, ke) in trace_dofs.iter().zip([&ks, &km]) {
            for (i, &(ni, di)) in block.iter().enumerate() {
                let Some(gi) = dofs.free(ni, 0, di) else { continue };
                for (j, &(nj, dj)) in block.iter().enumerate() {
                    let Some(gj) = dofs.free(nj, 0, dj) else { continue };
                    if gj <= gi {
                        a.add(gi, gj, ke[i][j]);
                    }
                }
            }
        }
    }
    a
}

/// Assemble matrix and load together.
pub fn assemble_system(
    dofs: &Arc<DofMap>,
    config: &ProblemConfig,
    mode: WeightMode,
) -> Result<AssembledSystem> {
    Ok(AssembledSystem {
        matrix: assemble_m(dofs, config, mode)?,
        rhs: assemble_rhs(dofs, &config.data),
        dofs: dofs.clone(),
        mode,
    })
}

/// max_j |(M x - rhs)_j| / max_j |rhs_j|
pub fn galerkin_residual(m: &BandedSpdMatrix, rhs: &[f64], x: &[f64]) -> f64 {
    let mut mx = vec![0.0; m.n];
    m.matvec(x, &mut mx);
    let num = mx
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let den = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    num / den
}

/// Energy norm sqrt(x^T M x).
pub fn energy_norm(m: &BandedSpdMatrix, x: &[f64]) -> f64 {
    let mut mx = vec![0.0; m.n];
    m.matvec(x, &mut mx);
    x.iter().zip(&mx).map(|(a, b)| a * b).sum::<f64>().sqrt()
}

/// Quadrature re-evaluation of the bilinear form m(p, q) between two fields
/// on the same mesh with exact weights: an assembly-independent route used
/// by the cross-checks and error norms.
pub fn bilinear_exact(config: &ProblemConfig, p: &FieldPh, q: &FieldPh) -> Result<f64> {
    let dofs = &p.dofs;
    let mesh = &dofs.mesh;
    let w = &config.weights;
    let mut total = 0.0;
    for l in 0..mesh.nt {
        let tl = mesh.node_t(l);
        for k in 0..mesh.nx {
            let xk = mesh.node_x(k);
            for qx in 0..5 {
                let x = xk + GAUSS5_NODES[qx] * mesh.dx;
                for qt in 0..5 {
                    let t = tl + GAUSS5_NODES[qt] * mesh.dt;
                    let lp = field_l(p, config, k, l, GAUSS5_NODES[qx], GAUSS5_NODES[qt], x, t);
                    let lq = field_l(q, config, k, l, GAUSS5_NODES[qx], GAUSS5_NODES[qt], x, t);
                    total += w.rho_inv2(x, t)?
                        * lp
                        * lq
                        * GAUSS5_WEIGHTS[qx]
                        * GAUSS5_WEIGHTS[qt]
                        * mesh.dx
                        * mesh.dt;
                }
            }
        }
    }
    let a1sq = config.coefficient.eval(1.0).powi(2);
    let tp = p.boundary_trace_x();
    let tq = q.boundary_trace_x();
    for l in 0..mesh.nt {
        let tl = mesh.node_t(l);
        for qt in 0..5 {
            let ct = GAUSS5_NODES[qt];
            let t = tl + ct * mesh.dt;
            let hp = hermite_in_time(&tp.px, &tp.pxt, l, ct, mesh.dt);
            let hq = hermite_in_time(&tq.px, &tq.pxt, l, ct, mesh.dt);
            total += a1sq * w.control_weight(t)? * hp * hq * GAUSS5_WEIGHTS[qt] * mesh.dt;
        }
    }
    Ok(total)
}

/// L applied to a field at a known cell location.
#[inline(always)]
pub fn field_l(
    f: &FieldPh,
    config: &ProblemConfig,
    k: usize,
    l: usize,
    cx: f64,
    ct: f64,
    x: f64,
    t: f64,
) -> f64 {
    let ptt = f.eval_in_cell(k, l, cx, ct, 0, 2);
    let px = f.eval_in_cell(k, l, cx, ct, 1, 0);
    let pxx = f.eval_in_cell(k, l, cx, ct, 2, 0);
    let pv = f.eval_in_cell(k, l, cx, ct, 0, 0);
    ptt - config.coefficient.eval_dx(x) * px - config.coefficient.eval(x) * pxx
        + config.potential.eval(x, t) * pv
}

/// Cubic Hermite evaluation in time from nodal (value, derivative) arrays.
#[inline(always)]
pub fn hermite_in_time(values: &[f64], derivs: &[f64], l: usize, c: f64, dt: f64) -> f64 {
    values[l] * shape(0, c, dt, 0)
        + derivs[l] * shape(2, c, dt, 0)
        + values[l + 1] * shape(1, c, dt, 0)
        + derivs[l + 1] * shape(3, c, dt, 0)
}
