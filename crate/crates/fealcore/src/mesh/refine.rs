//! Uniform red refinement of simplex meshes.

use crate::error::{FealError, Result};
use crate::mesh::{CellKind, Mesh};
use crate::tensor::Tensor;

impl Mesh {
    /// Refine `n` times. Every edge gains a midpoint (appended after the old
    /// nodes in edge-index order); intervals split in 2, triangles in 4,
    /// tetrahedra in 8.
    pub fn uniform_refine(&self, n: usize) -> Result<Mesh> {
        if !self.kind.is_simplex() {
            return Err(FealError::UnsupportedCellKind {
                op: "uniform_refine",
                kind: self.kind.name(),
            });
        }
        let mut mesh = self.clone();
        for _ in 0..n {
            mesh = mesh.refine_once()?;
        }
        Ok(mesh)
    }

    fn refine_once(&self) -> Result<Mesh> {
        let nn = self.num_nodes();
        let gd = self.geo_dim();
        let ne = self.num_edges();

        let mut node = Vec::with_capacity((nn + ne) * gd);
        node.extend_from_slice(self.node.data());
        for e in 0..ne {
            let r = self.edge.row(e);
            for j in 0..gd {
                node.push(0.5 * (self.node.at2(r[0], j) + self.node.at2(r[1], j)));
            }
        }
        let node = Tensor::from_vec(node, &[nn + ne, gd]);

        let nc = self.num_cells();
        let mut cell = Vec::new();
        match self.kind {
            CellKind::Interval => {
                for c in 0..nc {
                    let v = self.cell.row(c);
                    let m = nn + self.cell_to_edge.at2(c, 0);
                    cell.extend_from_slice(&[v[0], m, m, v[1]]);
                }
            }
            CellKind::Triangle => {
                for c in 0..nc {
                    let v = self.cell.row(c);
                    // m[i] is the midpoint of the edge opposite vertex i
                    let m: Vec<usize> = (0..3).map(|i| nn + self.cell_to_edge.at2(c, i)).collect();
                    cell.extend_from_slice(&[
                        v[0], m[2], m[1], //
                        v[1], m[0], m[2], //
                        v[2], m[1], m[0], //
                        m[0], m[1], m[2],
                    ]);
                }
            }
            CellKind::Tetrahedron => {
                let dist2 = |a: usize, b: usize| -> f64 {
                    (0..gd)
                        .map(|j| (node.at2(a, j) - node.at2(b, j)).powi(2))
                        .sum()
                };
                for c in 0..nc {
                    let v = self.cell.row(c);
                    // midpoints in local-edge order (01,02,03,12,13,23)
                    let m: Vec<usize> = (0..6).map(|i| nn + self.cell_to_edge.at2(c, i)).collect();
                    let (m01, m02, m03, m12, m13, m23) = (m[0], m[1], m[2], m[3], m[4], m[5]);
                    // The interior octahedron is cut along its shortest
                    // diagonal, which keeps shape quality bounded under
                    // repeated refinement (and reproduces the structured box
                    // triangulation exactly on box meshes).
                    let lengths = [dist2(m01, m23), dist2(m02, m13), dist2(m03, m12)];
                    let d = (0..3)
                        .min_by(|&a, &b| lengths[a].total_cmp(&lengths[b]))
                        .unwrap();
                    let octa: [[usize; 4]; 4] = match d {
                        0 => [
                            [m01, m23, m02, m03],
                            [m01, m23, m03, m13],
                            [m01, m23, m13, m12],
                            [m01, m23, m12, m02],
                        ],
                        1 => [
                            [m02, m13, m01, m03],
                            [m02, m13, m03, m23],
                            [m02, m13, m23, m12],
                            [m02, m13, m12, m01],
                        ],
                        _ => [
                            [m03, m12, m01, m02],
                            [m03, m12, m02, m23],
                            [m03, m12, m23, m13],
                            [m03, m12, m13, m01],
                        ],
                    };
                    let corners = [
                        [v[0], m01, m02, m03],
                        [m01, v[1], m12, m13],
                        [m02, m12, v[2], m23],
                        [m03, m13, m23, v[3]],
                    ];
                    for child in corners.iter().chain(octa.iter()) {
                        let mut ch = *child;
                        if signed_volume(&ch, &node) < 0.0 {
                            ch.swap(2, 3);
                        }
                        cell.extend_from_slice(&ch);
                    }
                }
            }
            CellKind::Quadrangle => unreachable!(),
        }
        let nvc = self.kind.num_vertices();
        let nc_new = cell.len() / nvc;
        Mesh::new(
            self.kind,
            node,
            Tensor::from_vec(cell, &[nc_new, nvc]),
            self.backend,
        )
    }
}

fn signed_volume(v: &[usize; 4], node: &Tensor<f64>) -> f64 {
    let p = |i: usize| [node.at2(v[i], 0), node.at2(v[i], 1), node.at2(v[i], 2)];
    let p0 = p(0);
    let mut e = [[0.0; 3]; 3];
    for i in 0..3 {
        let pi = p(i + 1);
        for j in 0..3 {
            e[i][j] = pi[j] - p0[j];
        }
    }
    e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
        - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
        + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Backend;

    #[test]
    fn interval_refine() {
        let m = Mesh::from_box(CellKind::Interval, &[0.0, 1.0], &[2], Backend::Serial).unwrap();
        let r = m.uniform_refine(1).unwrap();
        assert_eq!(r.num_nodes(), 5);
        assert_eq!(r.num_cells(), 4);
        for l in r.cell_measure().unwrap() {
            assert!((l - 0.25).abs() < 1e-15);
        }
        // old nodes keep their indices
        assert_eq!(&r.node().data()[..3], &m.node().data()[..3]);
    }

    #[test]
    fn triangle_refine_counts_and_area() {
        let m = Mesh::from_box(
            CellKind::Triangle,
            &[0.0, 1.0, 0.0, 1.0],
            &[1, 1],
            Backend::Serial,
        )
        .unwrap();
        let r = m.uniform_refine(1).unwrap();
        assert_eq!(r.num_nodes(), 4 + 5);
        assert_eq!(r.num_cells(), 8);
        let total: f64 = r.cell_measure().unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);

        let r2 = m.uniform_refine(3).unwrap();
        assert_eq!(r2.num_cells(), 2 * 64);
        let total: f64 = r2.cell_measure().unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tet_refine_matches_double_resolution_box() {
        let m = Mesh::from_box(
            CellKind::Tetrahedron,
            &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
            &[4, 4, 4],
            Backend::Serial,
        )
        .unwrap();
        let r = m.uniform_refine(1).unwrap();
        assert_eq!(r.num_nodes(), 729); // (8+1)^3
        assert_eq!(r.num_cells(), 384 * 8);
        assert_eq!(r.num_edges(), 3 * 8 * 81 + 3 * 64 * 9 + 512);
        let total: f64 = r.cell_measure().unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tet_refine_is_self_similar_on_box_meshes() {
        let unit = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let coarse =
            Mesh::from_box(CellKind::Tetrahedron, &unit, &[2, 2, 2], Backend::Serial).unwrap();
        let refined = coarse.uniform_refine(1).unwrap();
        let direct =
            Mesh::from_box(CellKind::Tetrahedron, &unit, &[4, 4, 4], Backend::Serial).unwrap();
        assert_eq!(refined.num_cells(), direct.num_cells());
        // Per-cell shape signature: sorted squared edge lengths. The multiset
        // over all cells must match the directly built fine mesh.
        let signatures = |mesh: &Mesh| -> Vec<[f64; 6]> {
            let node = mesh.node();
            let mut sigs: Vec<[f64; 6]> = (0..mesh.num_cells())
                .map(|c| {
                    let v = mesh.cell().row(c);
                    let mut l = [0.0; 6];
                    let mut k = 0;
                    for i in 0..4 {
                        for j in (i + 1)..4 {
                            l[k] = (0..3)
                                .map(|a| (node.at2(v[i], a) - node.at2(v[j], a)).powi(2))
                                .sum();
                            k += 1;
                        }
                    }
                    l.sort_by(f64::total_cmp);
                    l
                })
                .collect();
            sigs.sort_by(|a, b| {
                a.iter()
                    .zip(b.iter())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            sigs
        };
        for (a, b) in signatures(&refined).iter().zip(signatures(&direct).iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn refine_preserves_boundary_area() {
        let m = Mesh::from_box(
            CellKind::Tetrahedron,
            &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
            &[2, 2, 2],
            Backend::Serial,
        )
        .unwrap();
        let r = m.uniform_refine(1).unwrap();
        let area = |mesh: &Mesh| -> f64 {
            let measures = mesh.entity_measure(2).unwrap();
            mesh.boundary_face_flag()
                .iter()
                .zip(&measures)
                .filter(|(&b, _)| b)
                .map(|(_, &a)| a)
                .sum()
        };
        assert!((area(&m) - 6.0).abs() < 1e-12);
        assert!((area(&r) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn refine_zero_is_identity() {
        let m = Mesh::from_box(
            CellKind::Triangle,
            &[0.0, 1.0, 0.0, 1.0],
            &[2, 2],
            Backend::Serial,
        )
        .unwrap();
        let r = m.uniform_refine(0).unwrap();
        assert_eq!(r.num_nodes(), m.num_nodes());
        assert_eq!(r.cell().data(), m.cell().data());
    }

    #[test]
    fn quadrangle_refine_unsupported() {
        let m = Mesh::from_box(
            CellKind::Quadrangle,
            &[0.0, 1.0, 0.0, 1.0],
            &[1, 1],
            Backend::Serial,
        )
        .unwrap();
        match m.uniform_refine(1).unwrap_err() {
            FealError::UnsupportedCellKind { op, kind } => {
                assert_eq!(op, "uniform_refine");
                assert_eq!(kind, "quadrangle");
            }
            other => panic!("unexpected error {other}"),
        }
    }
}
