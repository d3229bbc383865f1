//! Unstructured mesh storage and topology derivation.
//!
//! A mesh is a pair of tensors (`node [NN,GD]`, `cell [NC,NVC]`) plus derived
//! entity tensors. Lower-dimensional entities are found by flattening every
//! cell's local faces/edges, sorting the vertex tuples lexicographically and
//! deduplicating; for each unique face the first and last flat occurrence
//! encode the two incident cells and their local face indices (boundary faces
//! repeat the single incident cell). A face's stored vertex order comes from
//! its first occurrence, so boundary faces inherit the outward orientation of
//! the cell that owns them.

mod boxes;
mod polygon;
mod refine;

pub use polygon::{polygon_cells, PolygonCellArray};

use crate::backend::Backend;
use crate::error::{FealError, Result};
use crate::tensor::Tensor;

/// Supported cell kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    Interval,
    Triangle,
    Quadrangle,
    Tetrahedron,
}

impl CellKind {
    pub fn name(self) -> &'static str {
        match self {
            CellKind::Interval => "interval",
            CellKind::Triangle => "triangle",
            CellKind::Quadrangle => "quadrangle",
            CellKind::Tetrahedron => "tetrahedron",
        }
    }

    /// Topological dimension.
    pub fn top_dim(self) -> usize {
        match self {
            CellKind::Interval => 1,
            CellKind::Triangle | CellKind::Quadrangle => 2,
            CellKind::Tetrahedron => 3,
        }
    }

    /// Vertices per cell.
    pub fn num_vertices(self) -> usize {
        match self {
            CellKind::Interval => 2,
            CellKind::Triangle => 3,
            CellKind::Quadrangle | CellKind::Tetrahedron => 4,
        }
    }

    pub fn is_simplex(self) -> bool {
        !matches!(self, CellKind::Quadrangle)
    }

    /// Legacy-VTK cell type code.
    pub fn vtk_code(self) -> u8 {
        match self {
            CellKind::Interval => 3,
            CellKind::Triangle => 5,
            CellKind::Quadrangle => 9,
            CellKind::Tetrahedron => 10,
        }
    }

    /// Local faces (codimension-1 entities), as indices into the cell's
    /// vertex list. For simplexes, face i sits opposite vertex i and is
    /// ordered so that the first-occurrence cell sees it positively oriented.
    pub fn local_faces(self) -> &'static [&'static [usize]] {
        match self {
            CellKind::Interval => &[&[1], &[0]],
            CellKind::Triangle => &[&[1, 2], &[2, 0], &[0, 1]],
            CellKind::Quadrangle => &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]],
            CellKind::Tetrahedron => &[&[1, 2, 3], &[0, 3, 2], &[0, 1, 3], &[0, 2, 1]],
        }
    }

    /// Local edges of a tetrahedron (other kinds use faces as edges).
    pub fn local_edges(self) -> &'static [[usize; 2]] {
        match self {
            CellKind::Tetrahedron => &[[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]],
            _ => &[],
        }
    }
}

/// Unstructured mesh with derived topology.
#[derive(Clone, Debug)]
pub struct Mesh {
    kind: CellKind,
    backend: Backend,
    node: Tensor<f64>,
    cell: Tensor<usize>,
    edge: Tensor<usize>,
    face: Tensor<usize>,
    face_to_cell: Tensor<usize>,
    cell_to_face: Tensor<usize>,
    cell_to_edge: Tensor<usize>,
}

impl Mesh {
    /// Build a mesh from node coordinates and cell connectivity; derives the
    /// entity tensors and validates orientation.
    pub fn new(
        kind: CellKind,
        node: Tensor<f64>,
        cell: Tensor<usize>,
        backend: Backend,
    ) -> Result<Mesh> {
        assert_eq!(node.ndim(), 2, "node tensor must be [NN, GD]");
        assert_eq!(cell.ndim(), 2, "cell tensor must be [NC, NVC]");
        assert_eq!(cell.shape()[1], kind.num_vertices(), "cell width mismatch");
        let nn = node.shape()[0];
        for (i, &v) in cell.data().iter().enumerate() {
            if v >= nn {
                return Err(FealError::IndexOutOfRange {
                    position: i,
                    index: v,
                    len: nn,
                });
            }
        }

        let (face, face_to_cell, cell_to_face) =
            derive_entities(&cell, kind.local_faces(), backend, true)?;
        let (edge, cell_to_edge) = match kind {
            CellKind::Tetrahedron => {
                let locals: Vec<&[usize]> = kind.local_edges().iter().map(|e| &e[..]).collect();
                let (edge, _e2c, cell_to_edge) = derive_entities(&cell, &locals, backend, false)?;
                (edge, cell_to_edge)
            }
            CellKind::Interval => {
                let nc = cell.shape()[0];
                (cell.clone(), Tensor::from_vec((0..nc).collect(), &[nc, 1]))
            }
            _ => (face.clone(), cell_to_face.clone()),
        };

        let mesh = Mesh {
            kind,
            backend,
            node,
            cell,
            edge,
            face,
            face_to_cell,
            cell_to_face,
            cell_to_edge,
        };
        mesh.validate_orientation()?;
        Ok(mesh)
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn node(&self) -> &Tensor<f64> {
        &self.node
    }

    pub fn cell(&self) -> &Tensor<usize> {
        &self.cell
    }

    pub fn edge(&self) -> &Tensor<usize> {
        &self.edge
    }

    pub fn face(&self) -> &Tensor<usize> {
        &self.face
    }

    /// Per-face 4-tuple: [left cell, right cell, left local index, right
    /// local index]; boundary faces repeat the single incident cell.
    pub fn face_to_cell(&self) -> &Tensor<usize> {
        &self.face_to_cell
    }

    pub fn cell_to_face(&self) -> &Tensor<usize> {
        &self.cell_to_face
    }

    pub fn cell_to_edge(&self) -> &Tensor<usize> {
        &self.cell_to_edge
    }

    pub fn num_nodes(&self) -> usize {
        self.node.shape()[0]
    }

    pub fn num_cells(&self) -> usize {
        self.cell.shape()[0]
    }

    pub fn num_edges(&self) -> usize {
        self.edge.shape()[0]
    }

    pub fn num_faces(&self) -> usize {
        self.face.shape()[0]
    }

    /// Geometric dimension (coordinate components).
    pub fn geo_dim(&self) -> usize {
        self.node.shape()[1]
    }

    /// Topological dimension.
    pub fn top_dim(&self) -> usize {
        self.kind.top_dim()
    }

    /// Measures of all entities of the given dimension (1=edges, TD-1=faces,
    /// TD=cells). Fails on degenerate entities.
    pub fn entity_measure(&self, dim: usize) -> Result<Vec<f64>> {
        let td = self.top_dim();
        if dim == 0 {
            return Err(FealError::InvalidArgument(
                "entity_measure: vertices carry no measure".into(),
            ));
        }
        let (conn, simplex): (&Tensor<usize>, bool) = if dim == td {
            (&self.cell, self.kind.is_simplex())
        } else if dim + 1 == td || (dim == 1 && td == 3) {
            if dim + 1 == td {
                (&self.face, true)
            } else {
                (&self.edge, true)
            }
        } else {
            return Err(FealError::InvalidArgument(format!(
                "entity_measure: no dimension-{dim} entities on a {} mesh",
                self.kind.name()
            )));
        };
        let n = conn.shape()[0];
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let m = if simplex {
                simplex_measure(conn.row(i), &self.node)
            } else {
                shoelace(conn.row(i), &self.node).abs()
            };
            if !(m > 0.0) {
                return Err(FealError::DegenerateEntity { dim, index: i });
            }
            out.push(m);
        }
        Ok(out)
    }

    /// Cell measures (lengths/areas/volumes).
    pub fn cell_measure(&self) -> Result<Vec<f64>> {
        self.entity_measure(self.top_dim())
    }

    /// Constant gradients of the barycentric coordinates, `[NC, TD+1, GD]`.
    pub fn grad_lambda(&self) -> Result<Tensor<f64>> {
        if !self.kind.is_simplex() {
            return Err(FealError::UnsupportedCellKind {
                op: "grad_lambda",
                kind: self.kind.name(),
            });
        }
        let (td, gd) = (self.top_dim(), self.geo_dim());
        if td != gd {
            return Err(FealError::InvalidArgument(
                "grad_lambda requires matching topological and geometric dimension".into(),
            ));
        }
        let nc = self.num_cells();
        let mut out = Tensor::zeros(&[nc, td + 1, gd]);
        let data = out.data_mut();
        for c in 0..nc {
            let vs = self.cell.row(c);
            let block = &mut data[c * (td + 1) * gd..(c + 1) * (td + 1) * gd];
            match self.kind {
                CellKind::Interval => {
                    let l = self.node.at2(vs[1], 0) - self.node.at2(vs[0], 0);
                    if l == 0.0 {
                        return Err(FealError::DegenerateEntity { dim: 1, index: c });
                    }
                    block[0] = -1.0 / l;
                    block[1] = 1.0 / l;
                }
                CellKind::Triangle => {
                    let p = |i: usize| [self.node.at2(vs[i], 0), self.node.at2(vs[i], 1)];
                    let a2 = {
                        let (p0, p1, p2) = (p(0), p(1), p(2));
                        (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])
                    };
                    if a2 == 0.0 {
                        return Err(FealError::DegenerateEntity { dim: 2, index: c });
                    }
                    for i in 0..3 {
                        let a = p((i + 1) % 3);
                        let b = p((i + 2) % 3);
                        // rotate the opposite edge by 90 degrees counter-clockwise
                        block[i * 2] = -(b[1] - a[1]) / a2;
                        block[i * 2 + 1] = (b[0] - a[0]) / a2;
                    }
                }
                CellKind::Tetrahedron => {
                    let p = |i: usize| {
                        [
                            self.node.at2(vs[i], 0),
                            self.node.at2(vs[i], 1),
                            self.node.at2(vs[i], 2),
                        ]
                    };
                    let p0 = p(0);
                    let mut e = [[0.0; 3]; 3];
                    for i in 0..3 {
                        let pi = p(i + 1);
                        for j in 0..3 {
                            e[i][j] = pi[j] - p0[j];
                        }
                    }
                    let det = det3(&e);
                    if det == 0.0 {
                        return Err(FealError::DegenerateEntity { dim: 3, index: c });
                    }
                    let inv = inv3(&e, det);
                    // grad lambda_{i+1} is column i of the inverse edge matrix
                    for i in 0..3 {
                        for j in 0..3 {
                            block[(i + 1) * 3 + j] = inv[j][i];
                        }
                    }
                    for j in 0..3 {
                        block[j] = -(block[3 + j] + block[6 + j] + block[9 + j]);
                    }
                }
                CellKind::Quadrangle => unreachable!(),
            }
        }
        Ok(out)
    }

    /// Map barycentric points `[NQ, TD+1]` into every cell: `[NC, NQ, GD]`.
    pub fn bc_to_point(&self, bc: &Tensor<f64>) -> Result<Tensor<f64>> {
        if !self.kind.is_simplex() {
            return Err(FealError::UnsupportedCellKind {
                op: "bc_to_point",
                kind: self.kind.name(),
            });
        }
        assert_eq!(bc.ndim(), 2);
        let nvc = self.top_dim() + 1;
        if bc.shape()[1] != nvc {
            return Err(FealError::ShapeMismatch {
                expected: format!("[NQ, {nvc}]"),
                got: format!("{:?}", bc.shape()),
            });
        }
        let nq = bc.shape()[0];
        for q in 0..nq {
            let s: f64 = bc.row(q).iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(FealError::BarycentricRowSum { row: q, sum: s });
            }
        }
        let (nc, gd) = (self.num_cells(), self.geo_dim());
        let mut out = Tensor::zeros(&[nc, nq, gd]);
        let data = out.data_mut();
        for c in 0..nc {
            let vs = self.cell.row(c);
            for q in 0..nq {
                let l = bc.row(q);
                let dst = &mut data[(c * nq + q) * gd..(c * nq + q + 1) * gd];
                for (i, &v) in vs.iter().enumerate() {
                    for (j, d) in dst.iter_mut().enumerate() {
                        *d += l[i] * self.node.at2(v, j);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Cell barycenters, `[NC, GD]`.
    pub fn cell_barycenter(&self) -> Tensor<f64> {
        let (nc, gd) = (self.num_cells(), self.geo_dim());
        let nvc = self.kind.num_vertices();
        let mut out = Tensor::zeros(&[nc, gd]);
        for c in 0..nc {
            for &v in self.cell.row(c) {
                for j in 0..gd {
                    out.data_mut()[c * gd + j] += self.node.at2(v, j) / nvc as f64;
                }
            }
        }
        out
    }

    /// True for faces incident to exactly one cell.
    pub fn boundary_face_flag(&self) -> Vec<bool> {
        (0..self.num_faces())
            .map(|f| self.face_to_cell.at2(f, 0) == self.face_to_cell.at2(f, 1))
            .collect()
    }

    /// True for nodes lying on a boundary face.
    pub fn boundary_node_flag(&self) -> Vec<bool> {
        let mut flag = vec![false; self.num_nodes()];
        for (f, on) in self.boundary_face_flag().into_iter().enumerate() {
            if on {
                for &v in self.face.row(f) {
                    flag[v] = true;
                }
            }
        }
        flag
    }

    fn validate_orientation(&self) -> Result<()> {
        let (td, gd) = (self.top_dim(), self.geo_dim());
        let nc = self.num_cells();
        for c in 0..nc {
            let vs = self.cell.row(c);
            let signed = if td == gd {
                match self.kind {
                    CellKind::Interval => self.node.at2(vs[1], 0) - self.node.at2(vs[0], 0),
                    CellKind::Triangle => {
                        let p = |i: usize| [self.node.at2(vs[i], 0), self.node.at2(vs[i], 1)];
                        let (p0, p1, p2) = (p(0), p(1), p(2));
                        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1])
                            - (p1[1] - p0[1]) * (p2[0] - p0[0]))
                    }
                    CellKind::Quadrangle => shoelace(vs, &self.node),
                    CellKind::Tetrahedron => {
                        let p = |i: usize| {
                            [
                                self.node.at2(vs[i], 0),
                                self.node.at2(vs[i], 1),
                                self.node.at2(vs[i], 2),
                            ]
                        };
                        let p0 = p(0);
                        let mut e = [[0.0; 3]; 3];
                        for i in 0..3 {
                            let pi = p(i + 1);
                            for j in 0..3 {
                                e[i][j] = pi[j] - p0[j];
                            }
                        }
                        det3(&e) / 6.0
                    }
                }
            } else {
                simplex_measure(vs, &self.node)
            };
            if !(signed > 0.0) {
                return Err(FealError::NegativeCell { cell: c });
            }
        }
        Ok(())
    }
}

/// Deduplicate the flat list of local sub-entities of all cells.
///
/// Returns the entity tensor (first-occurrence vertex order), the
/// entity-to-cell incidence `[NE', 4]`, and the cell-to-entity map.
fn derive_entities(
    cell: &Tensor<usize>,
    locals: &[&[usize]],
    backend: Backend,
    check_manifold: bool,
) -> Result<(Tensor<usize>, Tensor<usize>, Tensor<usize>)> {
    let nc = cell.shape()[0];
    let npc = locals.len();
    let nve = locals[0].len();

    let mut raw = Vec::with_capacity(nc * npc * nve);
    let mut sorted = Vec::with_capacity(nc * npc * nve);
    for c in 0..nc {
        let vs = cell.row(c);
        for lf in locals {
            let start = raw.len();
            for &l in *lf {
                raw.push(vs[l]);
            }
            let mut key: Vec<usize> = raw[start..].to_vec();
            key.sort_unstable();
            sorted.extend_from_slice(&key);
        }
    }
    let sorted = Tensor::from_vec(sorted, &[nc * npc, nve]);
    let uniq = backend.unique_rows(&sorted);
    let ne = uniq.first_index.len();

    if check_manifold {
        let mut counts = vec![0usize; ne];
        for &u in &uniq.inverse {
            counts[u] += 1;
        }
        if let Some(bad) = counts.iter().position(|&c| c > 2) {
            return Err(FealError::NonManifoldFace {
                vertices: uniq.rows.row(bad).to_vec(),
                count: counts[bad],
            });
        }
    }

    let mut entity = Vec::with_capacity(ne * nve);
    let mut e2c = Vec::with_capacity(ne * 4);
    for u in 0..ne {
        let i0 = uniq.first_index[u];
        let i1 = uniq.last_index[u];
        entity.extend_from_slice(&raw[i0 * nve..(i0 + 1) * nve]);
        e2c.extend_from_slice(&[i0 / npc, i1 / npc, i0 % npc, i1 % npc]);
    }
    let cell_to_entity = Tensor::from_vec(uniq.inverse, &[nc, npc]);
    Ok((
        Tensor::from_vec(entity, &[ne, nve]),
        Tensor::from_vec(e2c, &[ne, 4]),
        cell_to_entity,
    ))
}

/// Unsigned measure of a simplex spanned by `vs` via the Gram determinant.
fn simplex_measure(vs: &[usize], node: &Tensor<f64>) -> f64 {
    let gd = node.shape()[1];
    let d = vs.len() - 1;
    if d == 0 {
        return 0.0;
    }
    let mut e = vec![0.0; d * gd];
    for i in 0..d {
        for j in 0..gd {
            e[i * gd + j] = node.at2(vs[i + 1], j) - node.at2(vs[0], j);
        }
    }
    let mut g = [[0.0; 3]; 3];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..gd {
                s += e[i * gd + k] * e[j * gd + k];
            }
            g[i][j] = s;
        }
    }
    let det = match d {
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        3 => det3(&g),
        _ => unreachable!(),
    };
    let fact = [1.0, 1.0, 2.0, 6.0][d];
    det.max(0.0).sqrt() / fact
}

/// Signed area of a planar polygon (counter-clockwise positive).
pub(crate) fn shoelace(vs: &[usize], node: &Tensor<f64>) -> f64 {
    let n = vs.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        s += node.at2(a, 0) * node.at2(b, 1) - node.at2(b, 0) * node.at2(a, 1);
    }
    0.5 * s
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inv3(m: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let mut inv = [[0.0; 3]; 3];
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    inv
}
