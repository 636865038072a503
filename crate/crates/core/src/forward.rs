//! Forward verification solve: the controlled wave equation marched with a
//! C1 cubic Hermite space Z_h in x and the centered second-order scheme in
//! time, with the computed boundary control injected at x = 1.
//!
//! The first step is the Taylor start
//!
//! ```text
//! (y^1, phi) = (y^0 + dt y_1, phi) - dt^2/2 [a y^0_x phi_x + b y^0 phi]
//! ```
//!
//! and subsequent steps are the standard leapfrog tested against Z_h0. The
//! value dofs at both ends are prescribed (0 on the left, the control on the
//! right); the end derivative dofs remain unknowns.

use crate::control::{sample_control, ControlTrace};
use crate::error::{Error, Result};
use crate::hermite::shape;
use crate::linalg::{factorize, BandedSpdMatrix, CholeskyFactor};
use crate::poisson::{h_minus1_norm, PiecewisePoly, MAX_DEG};
use crate::problem::{ProblemConfig, Profile};
use crate::quad::{GAUSS5_NODES, GAUSS5_WEIGHTS};

/// Cubic Hermite function on the spatial grid: 2 dofs (value, derivative)
/// per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFieldZh {
    pub nx: usize,
    pub dx: f64,
    /// Interleaved (value, derivative) pairs, length 2 (nx + 1).
    pub coeffs: Vec<f64>,
}

impl SpatialFieldZh {
    pub fn zero(nx: usize) -> Self {
        SpatialFieldZh {
            nx,
            dx: 1.0 / nx as f64,
            coeffs: vec![0.0; 2 * (nx + 1)],
        }
    }

    pub fn eval(&self, x: f64, deriv: usize) -> f64 {
        let k = ((x / self.dx) as usize).min(self.nx - 1);
        let c = (x - k as f64 * self.dx) / self.dx;
        shape(0, c, self.dx, deriv) * self.coeffs[2 * k]
            + shape(2, c, self.dx, deriv) * self.coeffs[2 * k + 1]
            + shape(1, c, self.dx, deriv) * self.coeffs[2 * k + 2]
            + shape(3, c, self.dx, deriv) * self.coeffs[2 * k + 3]
    }

    /// L2(0,1) norm (exact for the piecewise cubic).
    pub fn l2_norm(&self) -> f64 {
        let mut total = 0.0;
        for k in 0..self.nx {
            for q in 0..5 {
                let x = (k as f64 + GAUSS5_NODES[q]) * self.dx;
                let v = self.eval(x, 0);
                total += v * v * GAUSS5_WEIGHTS[q] * self.dx;
            }
        }
        total.sqrt()
    }

    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for k in 0..self.nx {
            for q in 0..5 {
                let x = (k as f64 + GAUSS5_NODES[q]) * self.dx;
                total += self.eval(x, 0) * GAUSS5_WEIGHTS[q] * self.dx;
            }
        }
        total
    }

    /// Exact piecewise-cubic representation (local coefficients per cell).
    pub fn to_piecewise_poly(&self) -> PiecewisePoly {
        let n = self.nx;
        let dx = self.dx;
        let breaks = (0..=n).map(|k| k as f64 * dx).collect();
        let coeffs = (0..n)
            .map(|k| {
                let v0 = self.coeffs[2 * k];
                let d0 = self.coeffs[2 * k + 1];
                let v1 = self.coeffs[2 * k + 2];
                let d1 = self.coeffs[2 * k + 3];
                // cubic through (0, v0, d0) and (dx, v1, d1) in u = x - x_k
                let mut c = [0.0; MAX_DEG + 1];
                c[0] = v0;
                c[1] = d0;
                c[2] = (3.0 * (v1 - v0) / dx - 2.0 * d0 - d1) / dx;
                c[3] = (2.0 * (v0 - v1) / dx + d0 + d1) / (dx * dx);
                c
            })
            .collect();
        PiecewisePoly { breaks, coeffs }
    }
}

/// The Z_h mass and stiffness operators for one spatial grid.
pub struct ZhSpace {
    pub nx: usize,
    pub dx: f64,
    /// Consistent mass, full (no boundary conditions).
    pub mass: BandedSpdMatrix,
    /// int a phi' psi' + b(., t) phi psi with the potential frozen in time
    /// (constant potentials only reach this solver).
    pub stiffness: BandedSpdMatrix,
    /// int a phi' psi' alone, for energy diagnostics.
    pub stiffness_wave: BandedSpdMatrix,
    mass_free: CholeskyFactor,
    mass_full: CholeskyFactor,
    /// Couplings of the two prescribed value dofs to every row.
    bc_columns: [Vec<(usize, f64)>; 2],
}

const BW: usize = 3;

fn to_free(raw: usize, nx: usize) -> Option<usize> {
    let right = 2 * nx;
    if raw == 0 || raw == right {
        None
    } else if raw < right {
        Some(raw - 1)
    } else {
        Some(raw - 2)
    }
}

impl ZhSpace {
    pub fn new(config: &ProblemConfig, with_potential: bool) -> Result<Self> {
        let nx = config.nx;
        let dx = 1.0 / nx as f64;
        let n = 2 * (nx + 1);
        let mut mass = BandedSpdMatrix::zeros(n, BW);
        let mut stiffness = BandedSpdMatrix::zeros(n, BW);
        let mut stiffness_wave = BandedSpdMatrix::zeros(n, BW);
        let b0 = if with_potential {
            config.potential.eval(0.0, 0.0)
        } else {
            0.0
        };
        for k in 0..nx {
            let globals = [2 * k, 2 * k + 1, 2 * k + 2, 2 * k + 3];
            for q in 0..5 {
                let c = GAUSS5_NODES[q];
                let x = (k as f64 + c) * dx;
                let wq = GAUSS5_WEIGHTS[q] * dx;
                let a = config.coefficient.eval(x);
                let shv = [
                    shape(0, c, dx, 0),
                    shape(2, c, dx, 0),
                    shape(1, c, dx, 0),
                    shape(3, c, dx, 0),
                ];
                let shd = [
                    shape(0, c, dx, 1),
                    shape(2, c, dx, 1),
                    shape(1, c, dx, 1),
                    shape(3, c, dx, 1),
                ];
                for i in 0..4 {
                    for j in 0..=i {
                        let (gi, gj) = (globals[i].max(globals[j]), globals[i].min(globals[j]));
                        mass.add(gi, gj, shv[i] * shv[j] * wq);
                        stiffness.add(gi, gj, (a * shd[i] * shd[j] + b0 * shv[i] * shv[j]) * wq);
                        stiffness_wave.add(gi, gj, a * shd[i] * shd[j] * wq);
                    }
                }
            }
        }
        // reduced mass over the free dofs (both end values removed)
        let nf = n - 2;
        let mut mass_red = BandedSpdMatrix::zeros(nf, BW);
        for i in 0..n {
            let Some(fi) = to_free(i, nx) else { continue };
            for j in i.saturating_sub(BW)..=i {
                let Some(fj) = to_free(j, nx) else { continue };
                let v = mass.get(i, j);
                if v != 0.0 && fj <= fi {
                    mass_red.add(fi, fj, v);
                }
            }
        }
        let mut bc_columns = [Vec::new(), Vec::new()];
        for (slot, &c) in [0usize, 2 * nx].iter().enumerate() {
            for r in c.saturating_sub(BW)..=(c + BW).min(n - 1) {
                if let Some(fr) = to_free(r, nx) {
                    let v = mass.get(r, c);
                    if v != 0.0 {
                        bc_columns[slot].push((fr, v));
                    }
                }
            }
        }
        let mass_free = factorize(&mass_red)?;
        let mass_full = factorize(&mass)?;
        Ok(ZhSpace {
            nx,
            dx,
            mass,
            stiffness,
            stiffness_wave,
            mass_free,
            mass_full,
            bc_columns,
        })
    }

    /// Load vector int f phi_j dx by 40-chunk composite Gauss per interval
    /// (robust for jumpy f).
    pub fn load(&self, f: &Profile) -> Vec<f64> {
        let n = 2 * (self.nx + 1);
        let mut load = vec![0.0; n];
        for k in 0..self.nx {
            let globals = [2 * k, 2 * k + 1, 2 * k + 2, 2 * k + 3];
            for chunk in 0..40 {
                for q in 0..5 {
                    let c = (chunk as f64 + GAUSS5_NODES[q]) / 40.0;
                    let x = (k as f64 + c) * self.dx;
                    let wq = GAUSS5_WEIGHTS[q] * self.dx / 40.0;
                    let fv = f.eval(x);
                    if fv == 0.0 {
                        continue;
                    }
                    let shv = [
                        shape(0, c, self.dx, 0),
                        shape(2, c, self.dx, 0),
                        shape(1, c, self.dx, 0),
                        shape(3, c, self.dx, 0),
                    ];
                    for i in 0..4 {
                        load[globals[i]] += fv * shv[i] * wq;
                    }
                }
            }
        }
        load
    }

    /// Solve the constrained mass system: find y with the two end values
    /// prescribed such that (y, phi) = rhs(phi) for all phi in Z_h0.
    fn constrained_mass_solve(
        &self,
        rhs_full: &[f64],
        left: f64,
        right: f64,
    ) -> Result<Vec<f64>> {
        let n = 2 * (self.nx + 1);
        let nf = n - 2;
        let mut r = vec![0.0; nf];
        for i in 0..n {
            if let Some(fi) = to_free(i, self.nx) {
                r[fi] = rhs_full[i];
            }
        }
        for (fr, v) in &self.bc_columns[0] {
            r[*fr] -= v * left;
        }
        for (fr, v) in &self.bc_columns[1] {
            r[*fr] -= v * right;
        }
        let xf = self.mass_free.solve(&r)?;
        let mut y = vec![0.0; n];
        y[0] = left;
        y[2 * self.nx] = right;
        for i in 0..n {
            if let Some(fi) = to_free(i, self.nx) {
                y[i] = xf[fi];
            }
        }
        Ok(y)
    }
}

/// Unconstrained L2 projection of a profile onto Z_h.
pub fn l2_project_y0(y0: &Profile, config: &ProblemConfig) -> Result<SpatialFieldZh> {
    let space = ZhSpace::new(config, false)?;
    let load = space.load(y0);
    let coeffs = space.mass_full.solve(&load)?;
    Ok(SpatialFieldZh {
        nx: space.nx,
        dx: space.dx,
        coeffs,
    })
}

/// L2 projection of an arbitrary evaluator onto Z_h (composite Gauss load).
pub fn l2_project_fn<F: Fn(f64) -> f64>(f: F, config: &ProblemConfig) -> Result<SpatialFieldZh> {
    let space = ZhSpace::new(config, false)?;
    let n = 2 * (space.nx + 1);
    let mut load = vec![0.0; n];
    for k in 0..space.nx {
        let globals = [2 * k, 2 * k + 1, 2 * k + 2, 2 * k + 3];
        for chunk in 0..40 {
            for q in 0..5 {
                let c = (chunk as f64 + GAUSS5_NODES[q]) / 40.0;
                let x = (k as f64 + c) * space.dx;
                let wq = GAUSS5_WEIGHTS[q] * space.dx / 40.0;
                let fv = f(x);
                for (i, &g) in globals.iter().enumerate() {
                    let ish = [0, 2, 1, 3][i];
                    load[g] += fv * shape(ish, c, space.dx, 0) * wq;
                }
            }
        }
    }
    let coeffs = space.mass_full.solve(&load)?;
    Ok(SpatialFieldZh {
        nx: space.nx,
        dx: space.dx,
        coeffs,
    })
}

/// The forward-solved trajectory on the fine time grid.
#[derive(Debug, Clone)]
pub struct WaveTrajectory {
    pub nx: usize,
    pub dx: f64,
    pub dt_f: f64,
    /// States at t_n = n dt_f, n = 0..=n_steps, as raw Z_h coefficients.
    pub states: Vec<Vec<f64>>,
}

impl WaveTrajectory {
    pub fn state(&self, n: usize) -> SpatialFieldZh {
        SpatialFieldZh {
            nx: self.nx,
            dx: self.dx,
            coeffs: self.states[n].clone(),
        }
    }

    pub fn final_state(&self) -> SpatialFieldZh {
        self.state(self.states.len() - 1)
    }

    /// Backward-difference velocity at the final time.
    pub fn final_velocity(&self) -> SpatialFieldZh {
        let n = self.states.len();
        let coeffs = self.states[n - 1]
            .iter()
            .zip(&self.states[n - 2])
            .map(|(a, b)| (a - b) / self.dt_f)
            .collect();
        SpatialFieldZh {
            nx: self.nx,
            dx: self.dx,
            coeffs,
        }
    }

    /// Export (t, x, y) rows on the node grid at every coarse multiple
    /// `stride` of the fine step.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, stride: usize) -> Result<()> {
        writeln!(w, "t,x,y")?;
        for (n, state) in self.states.iter().enumerate().step_by(stride.max(1)) {
            let t = n as f64 * self.dt_f;
            for k in 0..=self.nx {
                writeln!(
                    w,
                    "{:.12e},{:.12e},{:.17e}",
                    t,
                    k as f64 * self.dx,
                    state[2 * k]
                )?;
            }
        }
        Ok(())
    }
}

/// Default fine substepping: dt_f = dx/4 when dt = dx, and never coarser.
pub fn default_substeps(config: &ProblemConfig) -> usize {
    let dx = 1.0 / config.nx as f64;
    let dt = config.weights.t_final / config.nt as f64;
    (4.0 * dt / dx).round().max(1.0) as usize
}

/// March the controlled wave forward with `substeps` fine steps per coarse
/// time interval. The trajectory starts from the L2 projection of the
/// forward initial data; for jumpy profiles the data seen by the discrete
/// problem (the nodal interpolant) is used.
pub fn forward_solve(
    config: &ProblemConfig,
    trace: &ControlTrace,
    substeps: usize,
) -> Result<WaveTrajectory> {
    let space = ZhSpace::new(config, true)?;
    let nx = config.nx;
    let n = 2 * (nx + 1);
    let nt = config.nt;
    let dt_f = (config.weights.t_final / nt as f64) / substeps as f64;

    let y0_eff = if config.data.y0.is_smooth() {
        config.data.y0.clone()
    } else {
        config.data.y0.nodal_interpolant(nx)
    };
    let y1_eff = if config.data.y1.is_smooth() {
        config.data.y1.clone()
    } else {
        config.data.y1.nodal_interpolant(nx)
    };

    let boundary = |step: usize| -> Result<f64> {
        let j = (step / substeps).min(nt - 1);
        let theta = (step - j * substeps) as f64 / substeps as f64;
        sample_control(trace, j, theta)
    };

    // y^0: projection with the prescribed end values stamped on
    let mut y_prev = {
        let load = space.load(&y0_eff);
        let mut y = space.mass_full.solve(&load)?;
        y[0] = 0.0;
        y[2 * nx] = boundary(0)?;
        y
    };

    let y1_load = space.load(&y1_eff);
    let n_steps = nt * substeps;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(y_prev.clone());

    let mut ky = vec![0.0; n];
    let mut my = vec![0.0; n];

    // Taylor start
    space.stiffness.matvec(&y_prev, &mut ky);
    space.mass.matvec(&y_prev, &mut my);
    let rhs: Vec<f64> = (0..n)
        .map(|i| my[i] + dt_f * y1_load[i] - 0.5 * dt_f * dt_f * ky[i])
        .collect();
    let mut y_cur = space.constrained_mass_solve(&rhs, 0.0, boundary(1)?)?;
    states.push(y_cur.clone());

    // energy baseline for the instability detector
    let energy = |y: &[f64], yp: &[f64], buf: &mut Vec<f64>| -> f64 {
        let vel: Vec<f64> = y
            .iter()
            .zip(yp)
            .map(|(a, b)| (a - b) / dt_f)
            .collect();
        space.mass.matvec(&vel, buf);
        let kin: f64 = 0.5 * vel.iter().zip(buf.iter()).map(|(a, b)| a * b).sum::<f64>();
        space.stiffness_wave.matvec(y, buf);
        let pot: f64 = 0.5 * y.iter().zip(buf.iter()).map(|(a, b)| a * b).sum::<f64>();
        kin + pot
    };
    let mut buf = vec![0.0; n];
    let v_norm = trace.l2_norm();
    let baseline = energy(&y_cur, &y_prev, &mut buf) + v_norm * v_norm + 1e-12;

    for step in 2..=n_steps {
        space.stiffness.matvec(&y_cur, &mut ky);
        let two_minus: Vec<f64> = y_cur
            .iter()
            .zip(&y_prev)
            .map(|(c, p)| 2.0 * c - p)
            .collect();
        space.mass.matvec(&two_minus, &mut my);
        let rhs: Vec<f64> = (0..n).map(|i| my[i] - dt_f * dt_f * ky[i]).collect();
        let y_new = space.constrained_mass_solve(&rhs, 0.0, boundary(step)?)?;
        y_prev = y_cur;
        y_cur = y_new;
        states.push(y_cur.clone());
        if step % substeps == 0 {
            let e = energy(&y_cur, &y_prev, &mut buf);
            if e > 10.0 * baseline {
                return Err(Error::CflInstability {
                    step,
                    suggested: dt_f / 2.0,
                });
            }
        }
    }
    Ok(WaveTrajectory {
        nx,
        dx: space.dx,
        dt_f,
        states,
    })
}

/// L2(0,1) norm of the final state.
pub fn norm_l2_final(traj: &WaveTrajectory) -> f64 {
    traj.final_state().l2_norm()
}

/// H^{-1}(0,1) norm of the backward-difference final velocity, through the
/// closed-form Poisson inverse of its piecewise-cubic representation.
pub fn norm_hminus1_final_velocity(traj: &WaveTrajectory) -> f64 {
    h_minus1_norm(&traj.final_velocity().to_piecewise_poly())
}

/// Physical energies 1/2 int (|y_t|^2 + a |y_x|^2) along the trajectory,
/// with the centered-difference velocity (second-order in dt_f). Available
/// at the interior snapshots 1..n-1.
pub fn energy_series(traj: &WaveTrajectory, config: &ProblemConfig) -> Result<Vec<f64>> {
    let space = ZhSpace::new(config, false)?;
    let n = 2 * (traj.nx + 1);
    let mut buf = vec![0.0; n];
    let mut out = Vec::new();
    for i in 1..traj.states.len() - 1 {
        let vel: Vec<f64> = traj.states[i + 1]
            .iter()
            .zip(&traj.states[i - 1])
            .map(|(a, b)| (a - b) / (2.0 * traj.dt_f))
            .collect();
        space.mass.matvec(&vel, &mut buf);
        let kin: f64 = 0.5 * vel.iter().zip(buf.iter()).map(|(a, b)| a * b).sum::<f64>();
        space.stiffness_wave.matvec(&traj.states[i], &mut buf);
        let pot: f64 = 0.5
            * traj.states[i]
                .iter()
                .zip(buf.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>();
        out.push(kin + pot);
    }
    Ok(out)
}

/// Cost J(y, v) = 1/2 int rho^2 |y|^2 + 1/2 int rho0^2 |v|^2, evaluated on
/// the forward trajectory and the extracted control. The control term uses
/// rho0^2 = theta^{-2} rho(1,.)^2, integrable against v^2 since v carries
/// the theta^2 ramp.
pub fn eval_cost_j(
    traj: &WaveTrajectory,
    trace: &ControlTrace,
    config: &ProblemConfig,
) -> Result<f64> {
    let w = &config.weights;
    // state term: 2-pt Gauss in t per fine interval, linear in the snapshots
    let mut state_term = 0.0;
    for nstep in 0..traj.states.len() - 1 {
        let t0 = nstep as f64 * traj.dt_f;
        let f0 = traj.state(nstep);
        let f1 = traj.state(nstep + 1);
        for (tq, tw) in crate::quad::GAUSS2_NODES
            .iter()
            .zip(crate::quad::GAUSS2_WEIGHTS.iter())
        {
            let t = t0 + tq * traj.dt_f;
            for k in 0..traj.nx {
                for q in 0..5 {
                    let x = (k as f64 + GAUSS5_NODES[q]) * traj.dx;
                    let y = f0.eval(x, 0) * (1.0 - tq) + f1.eval(x, 0) * tq;
                    let rho = w.rho(x, t)?;
                    state_term += rho * rho * y * y * GAUSS5_WEIGHTS[q] * traj.dx * tw * traj.dt_f;
                }
            }
        }
    }
    // control term: int v^2 / w0 dt, with vanishing contribution where the
    // ramp has already killed the control
    let mut control_term = 0.0;
    let dt = trace.dt;
    for l in 0..trace.values.len() - 1 {
        for q in 0..5 {
            let t = trace.times[l] + GAUSS5_NODES[q] * dt;
            let w0 = w.control_weight(t)?;
            if w0 < 1e-300 {
                continue;
            }
            let v = sample_control(trace, l, GAUSS5_NODES[q])?;
            control_term += v * v / w0 * GAUSS5_WEIGHTS[q] * dt;
        }
    }
    Ok(0.5 * state_term + 0.5 * control_term)
}
