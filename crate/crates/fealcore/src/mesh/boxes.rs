//! Structured box meshing.

use crate::backend::Backend;
use crate::error::{FealError, Result};
use crate::mesh::{CellKind, Mesh};
use crate::tensor::Tensor;

impl Mesh {
    /// Mesh an axis-aligned box `[x0,x1] x [y0,y1] x [z0,z1]` (as many axis
    /// pairs as the kind needs) with `divisions` segments per axis.
    ///
    /// Nodes are numbered axis-nested with the last axis fastest. Each grid
    /// square becomes two triangles (or one quadrangle); each grid cube
    /// becomes six tetrahedra sharing the main diagonal.
    pub fn from_box(
        kind: CellKind,
        bounds: &[f64],
        divisions: &[usize],
        backend: Backend,
    ) -> Result<Mesh> {
        let dim = kind.top_dim();
        if bounds.len() != 2 * dim {
            return Err(FealError::InvalidArgument(format!(
                "from_box: {} needs {} bounds, got {}",
                kind.name(),
                2 * dim,
                bounds.len()
            )));
        }
        if divisions.len() != dim {
            return Err(FealError::InvalidArgument(format!(
                "from_box: {} needs {} divisions, got {}",
                kind.name(),
                dim,
                divisions.len()
            )));
        }
        for (axis, &n) in divisions.iter().enumerate() {
            if n == 0 {
                return Err(FealError::InvalidArgument(format!(
                    "from_box: axis {axis} has zero divisions"
                )));
            }
            if !(bounds[2 * axis + 1] - bounds[2 * axis] > 0.0) {
                return Err(FealError::InvalidArgument(format!(
                    "from_box: axis {axis} extent is not positive"
                )));
            }
        }

        let coord = |axis: usize, i: usize| {
            let (a, b) = (bounds[2 * axis], bounds[2 * axis + 1]);
            a + (b - a) * i as f64 / divisions[axis] as f64
        };

        let (node, cell) = match kind {
            CellKind::Interval => {
                let n = divisions[0];
                let node: Vec<f64> = (0..=n).map(|i| coord(0, i)).collect();
                let mut cell = Vec::with_capacity(2 * n);
                for i in 0..n {
                    cell.extend_from_slice(&[i, i + 1]);
                }
                (
                    Tensor::from_vec(node, &[n + 1, 1]),
                    Tensor::from_vec(cell, &[n, 2]),
                )
            }
            CellKind::Triangle | CellKind::Quadrangle => {
                let (nx, ny) = (divisions[0], divisions[1]);
                let mut node = Vec::with_capacity((nx + 1) * (ny + 1) * 2);
                for ix in 0..=nx {
                    for iy in 0..=ny {
                        node.extend_from_slice(&[coord(0, ix), coord(1, iy)]);
                    }
                }
                let idx = |ix: usize, iy: usize| ix * (ny + 1) + iy;
                let mut cell = Vec::new();
                for ix in 0..nx {
                    for iy in 0..ny {
                        let a = idx(ix, iy);
                        let b = idx(ix, iy + 1);
                        let c = idx(ix + 1, iy);
                        let d = idx(ix + 1, iy + 1);
                        if kind == CellKind::Triangle {
                            cell.extend_from_slice(&[c, d, a, b, a, d]);
                        } else {
                            cell.extend_from_slice(&[a, c, d, b]);
                        }
                    }
                }
                let nvc = kind.num_vertices();
                let nc = cell.len() / nvc;
                (
                    Tensor::from_vec(node, &[(nx + 1) * (ny + 1), 2]),
                    Tensor::from_vec(cell, &[nc, nvc]),
                )
            }
            CellKind::Tetrahedron => {
                let (nx, ny, nz) = (divisions[0], divisions[1], divisions[2]);
                let mut node = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1) * 3);
                for ix in 0..=nx {
                    for iy in 0..=ny {
                        for iz in 0..=nz {
                            node.extend_from_slice(&[coord(0, ix), coord(1, iy), coord(2, iz)]);
                        }
                    }
                }
                let idx = |ix: usize, iy: usize, iz: usize| (ix * (ny + 1) + iy) * (nz + 1) + iz;
                // six tets per cube: one per ordering of the three axis steps
                // along the path corner -> opposite corner; odd orderings are
                // mirror images and get their middle vertices swapped
                const PERMS: [([usize; 3], bool); 6] = [
                    ([0, 1, 2], false),
                    ([0, 2, 1], true),
                    ([1, 0, 2], true),
                    ([1, 2, 0], false),
                    ([2, 0, 1], false),
                    ([2, 1, 0], true),
                ];
                let mut cell = Vec::with_capacity(nx * ny * nz * 24);
                for ix in 0..nx {
                    for iy in 0..ny {
                        for iz in 0..nz {
                            for (perm, odd) in PERMS {
                                let mut at = [ix, iy, iz];
                                let p0 = idx(at[0], at[1], at[2]);
                                at[perm[0]] += 1;
                                let p1 = idx(at[0], at[1], at[2]);
                                at[perm[1]] += 1;
                                let p2 = idx(at[0], at[1], at[2]);
                                at[perm[2]] += 1;
                                let p3 = idx(at[0], at[1], at[2]);
                                if odd {
                                    cell.extend_from_slice(&[p0, p2, p1, p3]);
                                } else {
                                    cell.extend_from_slice(&[p0, p1, p2, p3]);
                                }
                            }
                        }
                    }
                }
                (
                    Tensor::from_vec(node, &[(nx + 1) * (ny + 1) * (nz + 1), 3]),
                    Tensor::from_vec(cell, &[nx * ny * nz * 6, 4]),
                )
            }
        };
        Mesh::new(kind, node, cell, backend)
    }
}
