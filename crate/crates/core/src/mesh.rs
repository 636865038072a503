//! Uniform space-time quadrangulation of (0,1) x (0,T) and the Hermite
//! degree-of-freedom numbering.
//!
//! Each node carries four degrees of freedom in the fixed order
//! (u, u_x, u_t, u_xt). Numbering is time-level-major with nodes in x-order
//! and the four dofs contiguous, which keeps the assembled matrix banded
//! with half-bandwidth 4 (Nx + 2) + 3. The lateral boundary condition
//! p = 0 on x in {0, 1} eliminates u and u_t at every boundary node.

use crate::error::{Error, Result};

/// Degree-of-freedom kind at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Value = 0,
    Dx = 1,
    Dt = 2,
    Dxt = 3,
}

pub const DOF_KINDS: [DofKind; 4] = [DofKind::Value, DofKind::Dx, DofKind::Dt, DofKind::Dxt];

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeMesh {
    pub nx: usize,
    pub nt: usize,
    pub t_final: f64,
    pub dx: f64,
    pub dt: f64,
}

impl SpaceTimeMesh {
    pub fn new(nx: usize, nt: usize, t_final: f64) -> Result<Self> {
        if nx < 2 || nt < 2 {
            return Err(Error::InvalidParameter(format!(
                "mesh must have nx, nt >= 2 (got {nx}, {nt})"
            )));
        }
        if t_final <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "t_final = {t_final} must be positive"
            )));
        }
        Ok(SpaceTimeMesh {
            nx,
            nt,
            t_final,
            dx: 1.0 / nx as f64,
            dt: t_final / nt as f64,
        })
    }

    pub fn node_x(&self, k: usize) -> f64 {
        k as f64 * self.dx
    }

    pub fn node_t(&self, l: usize) -> f64 {
        l as f64 * self.dt
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.nt + 1)
    }

    /// Cell index and local coordinate for a point, clamped to the closure.
    pub fn locate_x(&self, x: f64) -> (usize, f64) {
        let k = ((x / self.dx) as usize).min(self.nx - 1);
        (k, (x - self.node_x(k)) / self.dx)
    }

    pub fn locate_t(&self, t: f64) -> (usize, f64) {
        let l = ((t / self.dt) as usize).min(self.nt - 1);
        (l, (t - self.node_t(l)) / self.dt)
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        let eps_x = 1e-12;
        let eps_t = 1e-12 * self.t_final.max(1.0);
        (-eps_x..=1.0 + eps_x).contains(&x) && (-eps_t..=self.t_final + eps_t).contains(&t)
    }
}

/// Map from (node, dof-kind) to indices in the free coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub mesh: SpaceTimeMesh,
    /// For every raw dof id, the free index or NONE if constrained.
    free_index: Vec<i64>,
    pub n_free: usize,
}

const NONE: i64 = -1;

impl DofMap {
    pub fn new(mesh: SpaceTimeMesh) -> Self {
        let n_raw = 4 * mesh.n_nodes();
        let mut free_index = vec![NONE; n_raw];
        let mut next = 0i64;
        for l in 0..=mesh.nt {
            for k in 0..=mesh.nx {
                for d in 0..4usize {
                    // u and u_t vanish along the lateral boundary
                    if (k == 0 || k == mesh.nx) && (d == 0 || d == 2) {
                        continue;
                    }
                    free_index[Self::raw(&mesh, k, l, d)] = next;
                    next += 1;
                }
            }
        }
        DofMap {
            mesh,
            free_index,
            n_free: next as usize,
        }
    }

    #[inline(always)]
    fn raw(mesh: &SpaceTimeMesh, k: usize, l: usize, d: usize) -> usize {
        4 * (l * (mesh.nx + 1) + k) + d
    }

    /// Free index of the dof at node (k, l), or None if constrained.
    #[inline(always)]
    pub fn free(&self, k: usize, l: usize, d: usize) -> Option<usize> {
        let v = self.free_index[Self::raw(&self.mesh, k, l, d)];
        if v == NONE {
            None
        } else {
            Some(v as usize)
        }
    }

    pub fn is_constrained(&self, k: usize, l: usize, d: usize) -> bool {
        self.free(k, l, d).is_none()
    }

    /// Half-bandwidth of the assembled forms under this numbering: the
    /// largest free-index distance between dofs sharing a cell.
    pub fn half_bandwidth(&self) -> usize {
        let mesh = &self.mesh;
        let mut bw = 0usize;
        for l in 0..mesh.nt.min(2) {
            for k in 0..mesh.nx {
                let mut lo = usize::MAX;
                let mut hi = 0usize;
                for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    for d in 0..4 {
                        if let Some(g) = self.free(k + i, l + j, d) {
                            lo = lo.min(g);
                            hi = hi.max(g);
                        }
                    }
                }
                bw = bw.max(hi - lo);
            }
        }
        bw
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_dof_count_matches_formula() {
        for (nx, nt) in [(2, 2), (10, 22), (7, 13)] {
            let dofs = DofMap::new(SpaceTimeMesh::new(nx, nt, 2.2).unwrap());
            assert_eq!(dofs.n_free, 4 * nx * (nt + 1), "nx={nx} nt={nt}");
        }
    }

    #[test]
    fn lateral_constraints_only() {
        let dofs = DofMap::new(SpaceTimeMesh::new(4, 5, 1.0).unwrap());
        for l in 0..=5 {
            assert!(dofs.is_constrained(0, l, 0));
            assert!(dofs.is_constrained(0, l, 2));
            assert!(dofs.is_constrained(4, l, 0));
            assert!(dofs.is_constrained(4, l, 2));
            // derivative dofs stay free at the boundary
            assert!(dofs.free(0, l, 1).is_some());
            assert!(dofs.free(4, l, 3).is_some());
        }
        for l in 0..=5 {
            for k in 1..4 {
                for d in 0..4 {
                    assert!(dofs.free(k, l, d).is_some());
                }
            }
        }
    }

    #[test]
    fn bandwidth_matches_ordering() {
        for nx in [4usize, 10, 16] {
            let dofs = DofMap::new(SpaceTimeMesh::new(nx, 8, 1.0).unwrap());
            // raw ordering distance is 4(nx+2)+3; eliminating 4 dofs per
            // level tightens it slightly
            assert!(dofs.half_bandwidth() <= 4 * (nx + 2) + 3);
            assert!(dofs.half_bandwidth() >= 4 * nx);
        }
    }

    #[test]
    fn locate_clamps_to_closure() {
        let mesh = SpaceTimeMesh::new(10, 22, 2.2).unwrap();
        assert_eq!(mesh.locate_x(0.999999).0, 9);
        assert_eq!(mesh.locate_x(1.0).0, 9);
        let (l, c) = mesh.locate_t(2.2);
        assert_eq!(l, 21);
        assert!((c - 1.0).abs() < 1e-9);
    }
}
