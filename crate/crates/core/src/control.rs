//! Control and state extraction from the solved field, plus the norms and
//! residual checks built on them.
//!
//! The solved field p determines the optimal pair through
//!
//! ```text
//! v(t) = -a(1) theta^2(t) rho(1,t)^{-2} p_x(1, t)
//! y(x,t) = -pi_h(rho^{-2})(x,t) (L p)(x,t)
//! ```

use crate::assembly::{bilinear_exact, field_l, hermite_in_time};
use crate::error::{Error, Result};
use crate::field::FieldPh;
use crate::hermite::shape;
use crate::problem::ProblemConfig;
use crate::quad::{GAUSS5_NODES, GAUSS5_WEIGHTS};

/// Boundary control in cubic Hermite-in-time representation: nodal values
/// and nodal time derivatives on the coarse time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub dt: f64,
}

impl ControlTrace {
    pub fn zero(times: Vec<f64>, dt: f64) -> Self {
        let n = times.len();
        ControlTrace {
            times,
            values: vec![0.0; n],
            derivs: vec![0.0; n],
            dt,
        }
    }

    /// L2(0, T) norm of the Hermite interpolant.
    pub fn l2_norm(&self) -> f64 {
        let mut total = 0.0;
        for l in 0..self.values.len() - 1 {
            for q in 0..5 {
                let v = hermite_in_time(&self.values, &self.derivs, l, GAUSS5_NODES[q], self.dt);
                total += v * v * GAUSS5_WEIGHTS[q] * self.dt;
            }
        }
        total.sqrt()
    }

    /// L2 norm of the difference with a trace on a finer (nested) grid,
    /// integrated on the finer grid.
    pub fn l2_distance(&self, finer: &ControlTrace) -> f64 {
        let mut total = 0.0;
        for l in 0..finer.values.len() - 1 {
            for q in 0..5 {
                let t = finer.times[l] + GAUSS5_NODES[q] * finer.dt;
                let vf = hermite_in_time(&finer.values, &finer.derivs, l, GAUSS5_NODES[q], finer.dt);
                let (j, c) = locate(&self.times, self.dt, t);
                let vc = hermite_in_time(&self.values, &self.derivs, j, c, self.dt);
                total += (vf - vc) * (vf - vc) * GAUSS5_WEIGHTS[q] * finer.dt;
            }
        }
        total.sqrt()
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,v,v_t")?;
        for l in 0..self.values.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e}",
                self.times[l], self.values[l], self.derivs[l]
            )?;
        }
        Ok(())
    }
}

fn locate(times: &[f64], dt: f64, t: f64) -> (usize, f64) {
    let j = ((t / dt) as usize).min(times.len() - 2);
    (j, (t - times[j]) / dt)
}

/// Cubic Hermite sample of the trace on interval `j` at local coordinate
/// `theta` in [0, 1].
pub fn sample_control(trace: &ControlTrace, j: usize, theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    if j + 1 >= trace.values.len() {
        return Err(Error::InvalidParameter(format!(
            "interval index {j} out of range"
        )));
    }
    Ok(hermite_in_time(&trace.values, &trace.derivs, j, theta, trace.dt))
}

/// Extract the boundary control from the solved field:
/// v(t_l) = -a(1) w0(t_l) p_x(1, t_l), with the time derivative by the
/// product rule using the p_xt dofs and the analytic derivative of w0.
pub fn extract_control(p: &FieldPh, config: &ProblemConfig) -> Result<ControlTrace> {
    let mesh = &p.dofs.mesh;
    let w = &config.weights;
    let a1 = config.coefficient.eval(1.0);
    let raw = p.boundary_trace_x();
    let mut values = Vec::with_capacity(raw.times.len());
    let mut derivs = Vec::with_capacity(raw.times.len());
    for (l, &t) in raw.times.iter().enumerate() {
        let w0 = w.control_weight(t)?;
        let dw0 = w.control_weight_deriv(t)?;
        values.push(-a1 * w0 * raw.px[l]);
        derivs.push(-a1 * (dw0 * raw.px[l] + w0 * raw.pxt[l]));
    }
    Ok(ControlTrace {
        times: raw.times,
        values,
        derivs,
        dt: mesh.dt,
    })
}

/// Pointwise controlled state y(x, t) = -pi_h(rho^{-2}) L p, with the weight
/// interpolated bilinearly from its nodal values (the production mode).
pub struct ExtractedState<'a> {
    p: &'a FieldPh,
    config: &'a ProblemConfig,
    wnode: Vec<f64>,
}

pub fn extract_state<'a>(p: &'a FieldPh, config: &'a ProblemConfig) -> Result<ExtractedState<'a>> {
    let mesh = &p.dofs.mesh;
    let mut wnode = vec![0.0; (mesh.nx + 1) * (mesh.nt + 1)];
    for l in 0..=mesh.nt {
        for k in 0..=mesh.nx {
            wnode[l * (mesh.nx + 1) + k] = config
                .weights
                .rho_inv2(mesh.node_x(k), mesh.node_t(l))?;
        }
    }
    Ok(ExtractedState { p, config, wnode })
}

impl ExtractedState<'_> {
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let mesh = &self.p.dofs.mesh;
        if !mesh.contains(x, t) {
            return Err(Error::OutOfDomain { x, t });
        }
        let (k, cx) = mesh.locate_x(x);
        let (l, ct) = mesh.locate_t(t);
        Ok(self.eval_in_cell(k, l, cx, ct))
    }

    pub fn eval_in_cell(&self, k: usize, l: usize, cx: f64, ct: f64) -> f64 {
        let mesh = &self.p.dofs.mesh;
        let base = l * (mesh.nx + 1) + k;
        let w = self.wnode[base] * (1.0 - cx) * (1.0 - ct)
            + self.wnode[base + mesh.nx + 1] * (1.0 - cx) * ct
            + self.wnode[base + 1] * cx * (1.0 - ct)
            + self.wnode[base + mesh.nx + 2] * cx * ct;
        let x = mesh.node_x(k) + cx * mesh.dx;
        let t = mesh.node_t(l) + ct * mesh.dt;
        -w * field_l(self.p, self.config, k, l, cx, ct, x, t)
    }
}

/// Transposition residual of the extracted pair: reassembles
/// int y L phi_j + int a(1) v phi_j,x(1,.) + l_j by quadrature from the
/// pointwise definitions y = -pi_h(rho^{-2}) Lp and
/// v = -a(1) pi_t(w0) p_x(1,.), and returns max_j |.| / max_j |l_j|. For the
/// solved system this restates the Galerkin equations, so it must vanish to
/// solver precision.
pub fn weak_residual(p: &FieldPh, config: &ProblemConfig, rhs: &[f64]) -> Result<f64> {
    let dofs = &p.dofs;
    let mesh = &dofs.mesh;
    let state = extract_state(p, config)?;
    let mut g = rhs.to_vec();
    let xs_table: Vec<[[f64; 3]; 4]> = (0..5)
        .map(|q| {
            let mut t = [[0.0; 3]; 4];
            for i in 0..4 {
                for d in 0..3 {
                    t[i][d] = shape(i, GAUSS5_NODES[q], mesh.dx, d);
                }
            }
            t
        })
        .collect();
    let ts_table: Vec<[[f64; 3]; 4]> = (0..5)
        .map(|q| {
            let mut t = [[0.0; 3]; 4];
            for i in 0..4 {
                for d in 0..3 {
                    t[i][d] = shape(i, GAUSS5_NODES[q], mesh.dt, d);
                }
            }
            t
        })
        .collect();
    for l in 0..mesh.nt {
        let tl = mesh.node_t(l);
        for k in 0..mesh.nx {
            let xk = mesh.node_x(k);
            for qx in 0..5 {
                let x = xk + GAUSS5_NODES[qx] * mesh.dx;
                let av = config.coefficient.eval(x);
                let axv = config.coefficient.eval_dx(x);
                for qt in 0..5 {
                    let t = tl + GAUSS5_NODES[qt] * mesh.dt;
                    let y = state.eval_in_cell(k, l, GAUSS5_NODES[qx], GAUSS5_NODES[qt]);
                    let scale = y * GAUSS5_WEIGHTS[qx] * GAUSS5_WEIGHTS[qt] * mesh.dx * mesh.dt;
                    let bv = config.potential.eval(x, t);
                    for j in 0..2 {
                        for i in 0..2 {
                            for d in 0..4 {
                                let Some(gidx) = dofs.free(k + i, l + j, d) else {
                                    continue;
                                };
                                let xi = i + 2 * ((d == 1 || d == 3) as usize);
                                let tj = j + 2 * ((d == 2 || d == 3) as usize);
                                let lphi = xs_table[qx][xi][0] * ts_table[qt][tj][2]
                                    - axv * xs_table[qx][xi][1] * ts_table[qt][tj][0]
                                    - av * xs_table[qx][xi][2] * ts_table[qt][tj][0]
                                    + bv * xs_table[qx][xi][0] * ts_table[qt][tj][0];
                                g[gidx] += scale * lphi;
                            }
                        }
                    }
                }
            }
        }
    }
    let a1 = config.coefficient.eval(1.0);
    let raw = p.boundary_trace_x();
    for l in 0..mesh.nt {
        let w0_left = config.weights.control_weight(mesh.node_t(l))?;
        let w0_right = config.weights.control_weight(mesh.node_t(l + 1))?;
        for qt in 0..5 {
            let ct = GAUSS5_NODES[qt];
            // the interpolated-mode control: -(a pi_t(w0) p_x)(1, t)
            let w0 = w0_left * (1.0 - ct) + w0_right * ct;
            let px = hermite_in_time(&raw.px, &raw.pxt, l, ct, mesh.dt);
            let v = -a1 * w0 * px;
            let scale = a1 * v * GAUSS5_WEIGHTS[qt] * mesh.dt;
            for (off, d) in [(0usize, 1usize), (0, 3), (1, 1), (1, 3)] {
                let Some(gidx) = dofs.free(mesh.nx, l + off, d) else {
                    continue;
                };
                let tshape = match (off, d) {
                    (0, 1) => ts_table[qt][0][0],
                    (0, 3) => ts_table[qt][2][0],
                    (1, 1) => ts_table[qt][1][0],
                    _ => ts_table[qt][3][0],
                };
                g[gidx] += scale * tshape;
            }
        }
    }
    let num = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let den = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(num / den)
}

/// P-norm distance between a coarse solution and a reference on a nested
/// finer mesh, integrated with exact weights on the fine cells:
///
/// ```text
/// |e|_P^2 = int rho^{-2} |L e|^2 + int a(1)^2 w0 |e_x(1,.)|^2
/// ```
pub fn pnorm_distance(
    coarse: &FieldPh,
    fine: &FieldPh,
    config: &ProblemConfig,
) -> Result<f64> {
    let fmesh = &fine.dofs.mesh;
    let cmesh = &coarse.dofs.mesh;
    let w = &config.weights;
    let mut total = 0.0;
    for l in 0..fmesh.nt {
        let tl = fmesh.node_t(l);
        for k in 0..fmesh.nx {
            let xk = fmesh.node_x(k);
            for qx in 0..5 {
                let x = xk + GAUSS5_NODES[qx] * fmesh.dx;
                for qt in 0..5 {
                    let t = tl + GAUSS5_NODES[qt] * fmesh.dt;
                    let lf = field_l(fine, config, k, l, GAUSS5_NODES[qx], GAUSS5_NODES[qt], x, t);
                    let (kc, cxc) = cmesh.locate_x(x);
                    let (lc, ctc) = cmesh.locate_t(t);
                    let lc_val = field_l(coarse, config, kc, lc, cxc, ctc, x, t);
                    let d = lc_val - lf;
                    total += w.rho_inv2(x, t)?
                        * d
                        * d
                        * GAUSS5_WEIGHTS[qx]
                        * GAUSS5_WEIGHTS[qt]
                        * fmesh.dx
                        * fmesh.dt;
                }
            }
        }
    }
    let a1sq = config.coefficient.eval(1.0).powi(2);
    let tc = coarse.boundary_trace_x();
    let tf = fine.boundary_trace_x();
    for l in 0..fmesh.nt {
        let tl = fmesh.node_t(l);
        for qt in 0..5 {
            let t = tl + GAUSS5_NODES[qt] * fmesh.dt;
            let hf = hermite_in_time(&tf.px, &tf.pxt, l, GAUSS5_NODES[qt], fmesh.dt);
            let (lc, ctc) = cmesh.locate_t(t);
            let hc = hermite_in_time(&tc.px, &tc.pxt, lc, ctc, cmesh.dt);
            let d = hc - hf;
            total += a1sq * w.control_weight(t)? * d * d * GAUSS5_WEIGHTS[qt] * fmesh.dt;
        }
    }
    Ok(total.sqrt())
}

/// P-norm of a single field through the exact-weight quadrature route.
pub fn pnorm(field: &FieldPh, config: &ProblemConfig) -> Result<f64> {
    Ok(bilinear_exact(config, field, field)?.sqrt())
}
