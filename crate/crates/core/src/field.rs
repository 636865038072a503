//! C1 bicubic fields on the space-time mesh: interpolation, evaluation and
//! boundary traces.

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hermite::shape;
use crate::mesh::DofMap;

/// Coefficient vector of a C1 piecewise-bicubic field over the free dofs.
#[derive(Debug, Clone)]
pub struct FieldPh {
    pub dofs: Arc<DofMap>,
    pub coeffs: Vec<f64>,
}

/// Raw boundary trace at x = 1: per time node, the values of p_x and p_xt.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTraceRaw {
    pub times: Vec<f64>,
    pub px: Vec<f64>,
    pub pxt: Vec<f64>,
}

impl FieldPh {
    pub fn zero(dofs: Arc<DofMap>) -> Self {
        let n = dofs.n_free;
        FieldPh {
            dofs,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(dofs: Arc<DofMap>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dofs.n_free {
            return Err(Error::DimensionMismatch {
                expected: dofs.n_free,
                got: coeffs.len(),
            });
        }
        Ok(FieldPh { dofs, coeffs })
    }

    /// Nodal dof value, zero for constrained dofs.
    #[inline(always)]
    pub fn dof(&self, k: usize, l: usize, d: usize) -> f64 {
        match self.dofs.free(k, l, d) {
            Some(g) => self.coeffs[g],
            None => 0.0,
        }
    }

    /// Evaluate the field or a mixed derivative (x-order, t-order each <= 2).
    pub fn eval(&self, x: f64, t: f64, dx_order: usize, dt_order: usize) -> Result<f64> {
        let mesh = &self.dofs.mesh;
        if dx_order > 2 || dt_order > 2 {
            return Err(Error::UnsupportedDerivative(dx_order.max(dt_order)));
        }
        if !mesh.contains(x, t) {
            return Err(Error::OutOfDomain { x, t });
        }
        let (k, cx) = mesh.locate_x(x);
        let (l, ct) = mesh.locate_t(t);
        Ok(self.eval_in_cell(k, l, cx, ct, dx_order, dt_order))
    }

    /// Evaluation with a known cell and local coordinates; the assembly and
    /// norm loops use this to skip the point location.
    #[inline(always)]
    pub fn eval_in_cell(
        &self,
        k: usize,
        l: usize,
        cx: f64,
        ct: f64,
        dx_order: usize,
        dt_order: usize,
    ) -> f64 {
        let mesh = &self.dofs.mesh;
        let mut out = 0.0;
        for j in 0..2 {
            for i in 0..2 {
                // (value, x-derivative) shape pair in each variable
                let xv = shape(i, cx, mesh.dx, dx_order);
                let xd = shape(i + 2, cx, mesh.dx, dx_order);
                let tv = shape(j, ct, mesh.dt, dt_order);
                let td = shape(j + 2, ct, mesh.dt, dt_order);
                out += self.dof(k + i, l + j, 0) * xv * tv
                    + self.dof(k + i, l + j, 1) * xd * tv
                    + self.dof(k + i, l + j, 2) * xv * td
                    + self.dof(k + i, l + j, 3) * xd * td;
            }
        }
        out
    }

    /// Hermite-in-time representation of p_x(1, .): nodal values are the u_x
    /// dofs on the x = 1 node line, nodal derivatives the u_xt dofs.
    pub fn boundary_trace_x(&self) -> ControlTraceRaw {
        let mesh = &self.dofs.mesh;
        let k = mesh.nx;
        let mut times = Vec::with_capacity(mesh.nt + 1);
        let mut px = Vec::with_capacity(mesh.nt + 1);
        let mut pxt = Vec::with_capacity(mesh.nt + 1);
        for l in 0..=mesh.nt {
            times.push(mesh.node_t(l));
            px.push(self.dof(k, l, 1));
            pxt.push(self.dof(k, l, 3));
        }
        ControlTraceRaw { times, px, pxt }
    }

    /// Serialize as CSV with header (k, l, u, ux, ut, uxt); constrained dofs
    /// are written as exact 0. Node indices are 1-based.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mesh = &self.dofs.mesh;
        writeln!(w, "k,l,u,ux,ut,uxt")?;
        for l in 0..=mesh.nt {
            for k in 0..=mesh.nx {
                writeln!(
                    w,
                    "{},{},{:.17e},{:.17e},{:.17e},{:.17e}",
                    k + 1,
                    l + 1,
                    self.dof(k, l, 0),
                    self.dof(k, l, 1),
                    self.dof(k, l, 2),
                    self.dof(k, l, 3),
                )?;
            }
        }
        Ok(())
    }

    /// Read a field written by [`write_csv`] back onto the given dof map.
    pub fn read_csv<R: BufRead>(dofs: Arc<DofMap>, r: R) -> Result<Self> {
        let mut field = FieldPh::zero(dofs);
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if lineno == 0 {
                continue; // header
            }
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 6 {
                return Err(Error::ConfigParse {
                    line: lineno + 1,
                    message: format!("expected 6 fields, got {}", parts.len()),
                });
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse().map_err(|_| Error::ConfigParse {
                    line: lineno + 1,
                    message: format!("bad number '{s}'"),
                })
            };
            let k: usize = parts[0].trim().parse().map_err(|_| Error::ConfigParse {
                line: lineno + 1,
                message: "bad node index".into(),
            })?;
            let l: usize = parts[1].trim().parse().map_err(|_| Error::ConfigParse {
                line: lineno + 1,
                message: "bad level index".into(),
            })?;
            for (d, raw) in parts[2..].iter().enumerate() {
                let v = parse(raw)?;
                if let Some(g) = field.dofs.free(k - 1, l - 1, d) {
                    field.coeffs[g] = v;
                }
            }
        }
        Ok(field)
    }
}

/// A smooth function with the partial derivatives needed for interpolation.
pub trait Interpolant {
    fn value(&self, x: f64, t: f64) -> f64;
    fn dx(&self, x: f64, t: f64) -> f64;
    fn dt(&self, x: f64, t: f64) -> f64;
    fn dxt(&self, x: f64, t: f64) -> f64;
}

/// Closure bundle implementing [`Interpolant`].
pub struct FnInterpolant<F0, F1, F2, F3> {
    pub value: F0,
    pub dx: F1,
    pub dt: F2,
    pub dxt: F3,
}

impl<F0, F1, F2, F3> Interpolant for FnInterpolant<F0, F1, F2, F3>
where
    F0: Fn(f64, f64) -> f64,
    F1: Fn(f64, f64) -> f64,
    F2: Fn(f64, f64) -> f64,
    F3: Fn(f64, f64) -> f64,
{
    fn value(&self, x: f64, t: f64) -> f64 {
        (self.value)(x, t)
    }
    fn dx(&self, x: f64, t: f64) -> f64 {
        (self.dx)(x, t)
    }
    fn dt(&self, x: f64, t: f64) -> f64 {
        (self.dt)(x, t)
    }
    fn dxt(&self, x: f64, t: f64) -> f64 {
        (self.dxt)(x, t)
    }
}

/// Nodal Hermite interpolation of a function vanishing on the lateral
/// boundary. Errors if any boundary value or tangential derivative exceeds
/// 1e-12 there.
pub fn interpolate(u: &dyn Interpolant, dofs: Arc<DofMap>) -> Result<FieldPh> {
    let mesh = dofs.mesh.clone();
    let mut field = FieldPh::zero(dofs.clone());
    for l in 0..=mesh.nt {
        let t = mesh.node_t(l);
        for k in 0..=mesh.nx {
            let x = mesh.node_x(k);
            let vals = [u.value(x, t), u.dx(x, t), u.dt(x, t), u.dxt(x, t)];
            for (d, v) in vals.into_iter().enumerate() {
                match dofs.free(k, l, d) {
                    Some(g) => field.coeffs[g] = v,
                    None => {
                        if v.abs() > 1e-12 {
                            return Err(Error::ConstraintViolation { x, t, value: v.abs() });
                        }
                    }
                }
            }
        }
    }
    Ok(field)
}
