//! Lagrange finite-element spaces on simplex meshes and their DoF management.
//!
//! Scalar spaces of arbitrary degree p store one barycentric multi-index per
//! local shape function. Global numbering for the continuous variant walks
//! entities in node-edge-face-cell order: vertices keep their node indices,
//! every edge then owns p-1 consecutive DoFs, every triangular face
//! (p-1)(p-2)/2, and each cell the remaining interior ones. DoFs interior to
//! a shared entity are ordered along the entity's stored vertex order, which
//! both incident cells can reconstruct independently.

use std::collections::HashMap;

use crate::error::{FealError, Result};
use crate::mesh::{CellKind, Mesh};
use crate::tensor::Tensor;

/// Binomial coefficient, small arguments only.
pub(crate) fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k.min(n));
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// All barycentric multi-indices with TD+1 components summing to p, in
/// descending lexicographic order. Shape `[binomial(p+TD,TD), TD+1]`.
pub fn multi_index_matrix(p: usize, td: usize) -> Tensor<usize> {
    let ncomp = td + 1;
    let mut rows: Vec<usize> = Vec::new();
    let mut row = vec![0usize; ncomp];
    fn rec(rest: usize, pos: usize, row: &mut [usize], rows: &mut Vec<usize>) {
        if pos + 1 == row.len() {
            row[pos] = rest;
            rows.extend_from_slice(row);
            return;
        }
        for a in (0..=rest).rev() {
            row[pos] = a;
            rec(rest - a, pos + 1, row, rows);
        }
    }
    rec(p, 0, &mut row, &mut rows);
    Tensor::from_vec(rows, &[binomial(p + td, td), ncomp])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Continuity {
    Continuous,
    Discontinuous,
}

/// Scalar Lagrange space. On quadrangle meshes only the continuous bilinear
/// (p=1) variant is available and gradient evaluation is unsupported.
pub struct LagrangeSpace<'m> {
    mesh: &'m Mesh,
    p: usize,
    continuity: Continuity,
    mi: Tensor<usize>,
    cell2dof: Tensor<usize>,
    gdof: usize,
}

impl<'m> LagrangeSpace<'m> {
    pub fn new(mesh: &'m Mesh, p: usize, continuity: Continuity) -> Result<LagrangeSpace<'m>> {
        if p < 1 {
            return Err(FealError::InvalidArgument(
                "polynomial degree must be at least 1".into(),
            ));
        }
        if mesh.kind() == CellKind::Quadrangle {
            if p != 1 || continuity != Continuity::Continuous {
                return Err(FealError::UnsupportedCellKind {
                    op: "LagrangeSpace beyond continuous p=1",
                    kind: mesh.kind().name(),
                });
            }
            return Ok(LagrangeSpace {
                mesh,
                p,
                continuity,
                mi: Tensor::from_vec(Vec::new(), &[0, 0]),
                cell2dof: mesh.cell().clone(),
                gdof: mesh.num_nodes(),
            });
        }
        let td = mesh.top_dim();
        let mi = multi_index_matrix(p, td);
        let (cell2dof, gdof) = match continuity {
            Continuity::Continuous => continuous_numbering(mesh, p, &mi)?,
            Continuity::Discontinuous => {
                let (nc, ldof) = (mesh.num_cells(), mi.shape()[0]);
                let data = (0..nc * ldof).collect();
                (Tensor::from_vec(data, &[nc, ldof]), nc * ldof)
            }
        };
        Ok(LagrangeSpace {
            mesh,
            p,
            continuity,
            mi,
            cell2dof,
            gdof,
        })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    /// Local DoF count per cell.
    pub fn ldof(&self) -> usize {
        self.cell2dof.shape()[1]
    }

    /// Global DoF count.
    pub fn gdof(&self) -> usize {
        self.gdof
    }

    pub fn multi_index(&self) -> &Tensor<usize> {
        &self.mi
    }

    /// Global DoF indices per cell, `[NC, ldof]`.
    pub fn cell_to_dof(&self) -> &Tensor<usize> {
        &self.cell2dof
    }

    /// Shape-function values `[NQ, ldof]`. For simplex kinds `bc` holds
    /// barycentric rows `[NQ, TD+1]`; for the bilinear quadrangle space it
    /// holds reference-square coordinates `[NQ, 2]`.
    pub fn basis(&self, bc: &Tensor<f64>) -> Result<Tensor<f64>> {
        assert_eq!(bc.ndim(), 2);
        let nq = bc.shape()[0];
        if self.mesh.kind() == CellKind::Quadrangle {
            if bc.shape()[1] != 2 {
                return Err(FealError::ShapeMismatch {
                    expected: "[NQ, 2]".into(),
                    got: format!("{:?}", bc.shape()),
                });
            }
            let mut out = Tensor::zeros(&[nq, 4]);
            for q in 0..nq {
                let (u, v) = (bc.at2(q, 0), bc.at2(q, 1));
                let row = &mut out.data_mut()[q * 4..(q + 1) * 4];
                row[0] = (1.0 - u) * (1.0 - v);
                row[1] = u * (1.0 - v);
                row[2] = u * v;
                row[3] = (1.0 - u) * v;
            }
            return Ok(out);
        }
        let td = self.mesh.top_dim();
        self.check_bc(bc, td)?;
        let ldof = self.ldof();
        let mut out = Tensor::zeros(&[nq, ldof]);
        let mut table = ShapeTable::new(self.p, td);
        for q in 0..nq {
            table.fill(bc.row(q));
            let row = &mut out.data_mut()[q * ldof..(q + 1) * ldof];
            for (l, slot) in row.iter_mut().enumerate() {
                let alpha = self.mi.row(l);
                let mut v = 1.0;
                for (i, &a) in alpha.iter().enumerate() {
                    v *= table.value(i, a);
                }
                *slot = v;
            }
        }
        Ok(out)
    }

    /// Shape-function gradients with respect to the barycentric coordinates,
    /// `[NQ, ldof, TD+1]`. Reference-space quantity shared by all cells.
    pub fn basis_lambda_gradients(&self, bc: &Tensor<f64>) -> Result<Tensor<f64>> {
        if !self.mesh.kind().is_simplex() {
            return Err(FealError::UnsupportedCellKind {
                op: "basis_lambda_gradients",
                kind: self.mesh.kind().name(),
            });
        }
        let td = self.mesh.top_dim();
        self.check_bc(bc, td)?;
        let (nq, ldof, ncomp) = (bc.shape()[0], self.ldof(), td + 1);
        let mut out = Tensor::zeros(&[nq, ldof, ncomp]);
        let mut table = ShapeTable::new(self.p, td);
        for q in 0..nq {
            table.fill(bc.row(q));
            for l in 0..ldof {
                let alpha = self.mi.row(l);
                let dst = &mut out.data_mut()[(q * ldof + l) * ncomp..(q * ldof + l + 1) * ncomp];
                for i in 0..ncomp {
                    let mut v = table.derivative(i, alpha[i]);
                    for (m, &a) in alpha.iter().enumerate() {
                        if m != i {
                            v *= table.value(m, a);
                        }
                    }
                    dst[i] = v;
                }
            }
        }
        Ok(out)
    }

    /// Physical gradients `[NC, NQ, ldof, GD]` on the whole mesh.
    pub fn grad_basis(&self, bc: &Tensor<f64>) -> Result<Tensor<f64>> {
        let dlam = self.basis_lambda_gradients(bc)?;
        let glam = self.mesh.grad_lambda()?;
        Ok(push_forward_gradients(
            &dlam,
            &glam,
            0,
            self.mesh.num_cells(),
        ))
    }

    /// Interpolation points `[gdof, GD]`; point k is where the k-th nodal
    /// functional evaluates.
    pub fn interpolation_points(&self) -> Result<Tensor<f64>> {
        let mesh = self.mesh;
        let gd = mesh.geo_dim();
        if mesh.kind() == CellKind::Quadrangle {
            return Ok(mesh.node().clone());
        }
        let p = self.p as f64;
        if self.continuity == Continuity::Discontinuous {
            // cell-major: the lattice points of every cell in slot order
            let (nc, ldof) = (mesh.num_cells(), self.ldof());
            let mut out = Tensor::zeros(&[nc * ldof, gd]);
            for c in 0..nc {
                let vs = mesh.cell().row(c);
                for l in 0..ldof {
                    let alpha = self.mi.row(l);
                    let dst = &mut out.data_mut()[(c * ldof + l) * gd..(c * ldof + l + 1) * gd];
                    for (i, &v) in vs.iter().enumerate() {
                        for (j, d) in dst.iter_mut().enumerate() {
                            *d += alpha[i] as f64 / p * mesh.node().at2(v, j);
                        }
                    }
                }
            }
            return Ok(out);
        }

        let mut out = Tensor::zeros(&[self.gdof, gd]);
        out.data_mut()[..mesh.num_nodes() * gd].copy_from_slice(mesh.node().data());
        let mut next = mesh.num_nodes();
        if self.p >= 2 {
            for e in 0..mesh.num_edges() {
                let r = mesh.edge().row(e);
                for t in 1..self.p {
                    let dst = &mut out.data_mut()[next * gd..(next + 1) * gd];
                    for j in 0..gd {
                        dst[j] = ((self.p - t) as f64 * mesh.node().at2(r[0], j)
                            + t as f64 * mesh.node().at2(r[1], j))
                            / p;
                    }
                    next += 1;
                }
            }
        }
        if mesh.top_dim() == 3 && self.p >= 3 {
            let interior = multi_index_matrix(self.p - 3, 2);
            for f in 0..mesh.num_faces() {
                let r = mesh.face().row(f);
                for k in 0..interior.shape()[0] {
                    let beta = interior.row(k);
                    let dst = &mut out.data_mut()[next * gd..(next + 1) * gd];
                    for (i, &v) in r.iter().enumerate() {
                        for (j, d) in dst.iter_mut().enumerate() {
                            *d += (beta[i] + 1) as f64 / p * mesh.node().at2(v, j);
                        }
                    }
                    next += 1;
                }
            }
        }
        let td = mesh.top_dim();
        // interval interiors were already covered by the edge block (edge = cell)
        if td >= 2 && self.p > td {
            let interior = multi_index_matrix(self.p - td - 1, td);
            for c in 0..mesh.num_cells() {
                let vs = mesh.cell().row(c);
                for k in 0..interior.shape()[0] {
                    let alpha = interior.row(k);
                    let dst = &mut out.data_mut()[next * gd..(next + 1) * gd];
                    for (i, &v) in vs.iter().enumerate() {
                        for (j, d) in dst.iter_mut().enumerate() {
                            *d += (alpha[i] + 1) as f64 / p * mesh.node().at2(v, j);
                        }
                    }
                    next += 1;
                }
            }
        }
        debug_assert_eq!(next, self.gdof);
        Ok(out)
    }

    /// True for DoFs whose owning entity lies on a boundary face.
    pub fn boundary_dof_flag(&self) -> Vec<bool> {
        let mesh = self.mesh;
        if mesh.kind() == CellKind::Quadrangle {
            return mesh.boundary_node_flag();
        }
        if self.continuity == Continuity::Discontinuous {
            // local DoF l sits on local face lf iff its multi-index vanishes
            // at component lf (the opposite vertex)
            let mut flag = vec![false; self.gdof];
            let boundary = mesh.boundary_face_flag();
            let ldof = self.ldof();
            for c in 0..mesh.num_cells() {
                for (lf, &f) in mesh.cell_to_face().row(c).iter().enumerate() {
                    if !boundary[f] {
                        continue;
                    }
                    for l in 0..ldof {
                        if self.mi.at2(l, lf) == 0 {
                            flag[c * ldof + l] = true;
                        }
                    }
                }
            }
            return flag;
        }

        let mut flag = vec![false; self.gdof];
        for (v, b) in mesh.boundary_node_flag().into_iter().enumerate() {
            flag[v] = b;
        }
        let nn = mesh.num_nodes();
        let edof = self.p - 1;
        if edof > 0 {
            let boundary = mesh.boundary_face_flag();
            match mesh.top_dim() {
                1 => {}
                2 => {
                    for (e, &b) in boundary.iter().enumerate() {
                        if b {
                            for t in 0..edof {
                                flag[nn + e * edof + t] = true;
                            }
                        }
                    }
                }
                _ => {
                    let mut edge_of: HashMap<[usize; 2], usize> = HashMap::new();
                    for e in 0..mesh.num_edges() {
                        let r = mesh.edge().row(e);
                        let key = [r[0].min(r[1]), r[0].max(r[1])];
                        edge_of.insert(key, e);
                    }
                    let fdof = (self.p - 1) * (self.p.saturating_sub(2)) / 2;
                    for (f, &b) in boundary.iter().enumerate() {
                        if !b {
                            continue;
                        }
                        let r = mesh.face().row(f);
                        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                            let key = [r[i].min(r[j]), r[i].max(r[j])];
                            let e = edge_of[&key];
                            for t in 0..edof {
                                flag[nn + e * edof + t] = true;
                            }
                        }
                        for t in 0..fdof {
                            flag[nn + mesh.num_edges() * edof + f * fdof + t] = true;
                        }
                    }
                }
            }
        }
        flag
    }

    /// Nodal interpolation of a pointwise function.
    pub fn interpolate<F: Fn(&[f64]) -> f64>(&self, f: F) -> Result<FEFunction<'_, 'm>> {
        let ip = self.interpolation_points()?;
        let mut coeffs = Vec::with_capacity(self.gdof);
        for k in 0..self.gdof {
            let v = f(ip.row(k));
            if !v.is_finite() {
                return Err(FealError::NonFinite {
                    what: format!("interpolated value at dof {k}"),
                });
            }
            coeffs.push(v);
        }
        Ok(FEFunction {
            space: self,
            coefficients: coeffs,
        })
    }

    pub fn function(&self, coefficients: Vec<f64>) -> FEFunction<'_, 'm> {
        assert_eq!(coefficients.len(), self.gdof);
        FEFunction {
            space: self,
            coefficients,
        }
    }

    fn check_bc(&self, bc: &Tensor<f64>, td: usize) -> Result<()> {
        if bc.shape()[1] != td + 1 {
            return Err(FealError::ShapeMismatch {
                expected: format!("[NQ, {}]", td + 1),
                got: format!("{:?}", bc.shape()),
            });
        }
        for q in 0..bc.shape()[0] {
            let s: f64 = bc.row(q).iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(FealError::BarycentricRowSum { row: q, sum: s });
            }
        }
        Ok(())
    }
}

/// Chain-rule map from barycentric gradients `[NQ, ldof, TD+1]` and cell
/// grad-lambda `[NC, TD+1, GD]` to physical gradients for cells `c0..c1`:
/// `[c1-c0, NQ, ldof, GD]`.
pub fn push_forward_gradients(
    dlam: &Tensor<f64>,
    glam: &Tensor<f64>,
    c0: usize,
    c1: usize,
) -> Tensor<f64> {
    let (nq, ldof, ncomp) = (dlam.shape()[0], dlam.shape()[1], dlam.shape()[2]);
    let gd = glam.shape()[2];
    let mut out = Tensor::zeros(&[c1 - c0, nq, ldof, gd]);
    let data = out.data_mut();
    for c in c0..c1 {
        let g = &glam.data()[c * ncomp * gd..(c + 1) * ncomp * gd];
        let base = (c - c0) * nq * ldof * gd;
        for q in 0..nq {
            for l in 0..ldof {
                let d = &dlam.data()[(q * ldof + l) * ncomp..(q * ldof + l + 1) * ncomp];
                let dst = &mut data[base + (q * ldof + l) * gd..base + (q * ldof + l + 1) * gd];
                for i in 0..ncomp {
                    let di = d[i];
                    for j in 0..gd {
                        dst[j] += di * g[i * gd + j];
                    }
                }
            }
        }
    }
    out
}

/// Running product tables for the closed-form Lagrange basis at one point:
/// value(i,k) = prod_{j<k} (p*lambda_i - j)/(j+1) and its lambda_i-derivative.
struct ShapeTable {
    p: usize,
    ncomp: usize,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl ShapeTable {
    fn new(p: usize, td: usize) -> ShapeTable {
        let ncomp = td + 1;
        ShapeTable {
            p,
            ncomp,
            values: vec![0.0; ncomp * (p + 1)],
            derivs: vec![0.0; ncomp * (p + 1)],
        }
    }

    fn fill(&mut self, lambda: &[f64]) {
        let p = self.p;
        for (i, &lam) in lambda.iter().enumerate().take(self.ncomp) {
            let v = &mut self.values[i * (p + 1)..(i + 1) * (p + 1)];
            let d = &mut self.derivs[i * (p + 1)..(i + 1) * (p + 1)];
            v[0] = 1.0;
            d[0] = 0.0;
            for k in 0..p {
                let factor = (p as f64 * lam - k as f64) / (k + 1) as f64;
                v[k + 1] = v[k] * factor;
                d[k + 1] = d[k] * factor + v[k] * p as f64 / (k + 1) as f64;
            }
        }
    }

    fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * (self.p + 1) + k]
    }

    fn derivative(&self, i: usize, k: usize) -> f64 {
        self.derivs[i * (self.p + 1) + k]
    }
}

/// Continuous node-edge-face-cell numbering.
fn continuous_numbering(
    mesh: &Mesh,
    p: usize,
    mi: &Tensor<usize>,
) -> Result<(Tensor<usize>, usize)> {
    let td = mesh.top_dim();
    let (nn, ne, nf, nc) = (
        mesh.num_nodes(),
        mesh.num_edges(),
        mesh.num_faces(),
        mesh.num_cells(),
    );
    let edof = p - 1;
    let fdof = if p >= 3 { (p - 1) * (p - 2) / 2 } else { 0 };
    let cdof_tri = fdof;
    let cdof_tet = if p >= 4 {
        (p - 1) * (p - 2) * (p - 3) / 6
    } else {
        0
    };
    let (gdof, face_base, cell_base) = match td {
        1 => (nn + nc * edof, 0, nn),
        2 => (nn + ne * edof + nc * cdof_tri, 0, nn + ne * edof),
        _ => (
            nn + ne * edof + nf * fdof + nc * cdof_tet,
            nn + ne * edof,
            nn + ne * edof + nf * fdof,
        ),
    };

    // rank of an all-positive multi-index inside its interior enumeration
    let rank_of = |sub_p: usize, sub_td: usize| -> HashMap<Vec<usize>, usize> {
        let m = multi_index_matrix(sub_p, sub_td);
        (0..m.shape()[0]).map(|k| (m.row(k).to_vec(), k)).collect()
    };
    let face_rank = if td == 3 && p >= 3 {
        rank_of(p - 3, 2)
    } else {
        HashMap::new()
    };
    let cell_rank = if p > td {
        rank_of(p - td - 1, td)
    } else {
        HashMap::new()
    };

    let ldof = mi.shape()[0];
    let mut c2d = vec![0usize; nc * ldof];
    for c in 0..nc {
        let vs = mesh.cell().row(c);
        for l in 0..ldof {
            let alpha = mi.row(l);
            let support: Vec<usize> = (0..=td).filter(|&i| alpha[i] > 0).collect();
            let dof = match support.len() {
                1 => vs[support[0]],
                2 if td >= 1 => {
                    let (i, j) = (support[0], support[1]);
                    let (le, stored) = match td {
                        1 => (0, mesh.cell().row(c)),
                        2 => {
                            let le = 3 - i - j;
                            (le, mesh.face().row(mesh.cell_to_face().at2(c, le)))
                        }
                        _ => {
                            let le = CellKind::Tetrahedron
                                .local_edges()
                                .iter()
                                .position(|&[a, b]| (a, b) == (i, j))
                                .unwrap();
                            (le, mesh.edge().row(mesh.cell_to_edge().at2(c, le)))
                        }
                    };
                    let e = match td {
                        1 => c,
                        2 => mesh.cell_to_face().at2(c, le),
                        _ => mesh.cell_to_edge().at2(c, le),
                    };
                    // weight at the stored edge's second vertex fixes the slot
                    let alpha_b = if vs[j] == stored[1] {
                        alpha[j]
                    } else {
                        alpha[i]
                    };
                    let base = if td == 1 { cell_base } else { nn };
                    base + e * edof + alpha_b - 1
                }
                3 if td == 3 => {
                    let lf = 6 - support.iter().sum::<usize>();
                    let f = mesh.cell_to_face().at2(c, lf);
                    let stored = mesh.face().row(f);
                    let mut beta = Vec::with_capacity(3);
                    for &g in stored {
                        let loc = (0..4).find(|&i| vs[i] == g).unwrap();
                        beta.push(alpha[loc] - 1);
                    }
                    face_base + f * fdof + face_rank[&beta]
                }
                _ => {
                    // interior of the cell
                    let key: Vec<usize> = alpha.iter().map(|&a| a - 1).collect();
                    let width = match td {
                        1 => edof,
                        2 => cdof_tri,
                        _ => cdof_tet,
                    };
                    if td == 1 {
                        // handled by the support-2 arm; unreachable here
                        unreachable!()
                    } else {
                        cell_base + c * width + cell_rank[&key]
                    }
                }
            };
            c2d[c * ldof + l] = dof;
        }
    }
    Ok((Tensor::from_vec(c2d, &[nc, ldof]), gdof))
}

/// Scalar finite-element function: coefficients over a space's global DoFs.
pub struct FEFunction<'a, 'm> {
    space: &'a LagrangeSpace<'m>,
    coefficients: Vec<f64>,
}

impl<'a, 'm> FEFunction<'a, 'm> {
    pub fn space(&self) -> &'a LagrangeSpace<'m> {
        self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Values at the given reference points in every cell, `[NC, NQ]`.
    pub fn cell_values(&self, bc: &Tensor<f64>) -> Result<Tensor<f64>> {
        self.cell_values_range(bc, 0, self.space.mesh().num_cells())
    }

    /// Values for cells `c0..c1`, `[c1-c0, NQ]`.
    pub fn cell_values_range(&self, bc: &Tensor<f64>, c0: usize, c1: usize) -> Result<Tensor<f64>> {
        let phi = self.space.basis(bc)?;
        let (nq, ldof) = (phi.shape()[0], phi.shape()[1]);
        let c2d = self.space.cell_to_dof();
        let mut out = Tensor::zeros(&[c1 - c0, nq]);
        for c in c0..c1 {
            let dofs = c2d.row(c);
            for q in 0..nq {
                let mut v = 0.0;
                for l in 0..ldof {
                    v += phi.at2(q, l) * self.coefficients[dofs[l]];
                }
                out.data_mut()[(c - c0) * nq + q] = v;
            }
        }
        Ok(out)
    }
}

/// Vector-valued space: `components` copies of a scalar space with
/// component-interleaved DoFs (global = scalar_dof * components + component).
pub struct TensorSpace<'a, 'm> {
    scalar: &'a LagrangeSpace<'m>,
    components: usize,
}

impl<'a, 'm> TensorSpace<'a, 'm> {
    pub fn new(scalar: &'a LagrangeSpace<'m>, components: usize) -> Result<TensorSpace<'a, 'm>> {
        if components < 1 {
            return Err(FealError::InvalidArgument(
                "tensor space needs at least one component".into(),
            ));
        }
        Ok(TensorSpace { scalar, components })
    }

    pub fn scalar(&self) -> &'a LagrangeSpace<'m> {
        self.scalar
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn gdof(&self) -> usize {
        self.scalar.gdof() * self.components
    }

    pub fn ldof(&self) -> usize {
        self.scalar.ldof() * self.components
    }

    /// Global index of (scalar DoF k, component a).
    pub fn global_index(&self, k: usize, a: usize) -> usize {
        k * self.components + a
    }

    /// Vector DoF indices per cell, `[NC, ldof*components]`, slot-major in
    /// the scalar DoF (slot l covers components l*GD..(l+1)*GD).
    pub fn cell_to_dof(&self) -> Tensor<usize> {
        let s = self.scalar.cell_to_dof();
        let (nc, ldof) = (s.shape()[0], s.shape()[1]);
        let m = self.components;
        let mut data = Vec::with_capacity(nc * ldof * m);
        for c in 0..nc {
            for &k in s.row(c) {
                for a in 0..m {
                    data.push(k * m + a);
                }
            }
        }
        Tensor::from_vec(data, &[nc, ldof * m])
    }

    /// Boundary flag expanded over components.
    pub fn boundary_dof_flag(&self) -> Vec<bool> {
        let s = self.scalar.boundary_dof_flag();
        let mut out = Vec::with_capacity(s.len() * self.components);
        for b in s {
            for _ in 0..self.components {
                out.push(b);
            }
        }
        out
    }

    /// Componentwise nodal interpolation; `f` fills one value per component.
    pub fn interpolate<F: Fn(&[f64]) -> Vec<f64>>(
        &self,
        f: F,
    ) -> Result<VectorFEFunction<'_, 'a, 'm>> {
        let ip = self.scalar.interpolation_points()?;
        let m = self.components;
        let mut coeffs = vec![0.0; self.gdof()];
        for k in 0..self.scalar.gdof() {
            let v = f(ip.row(k));
            assert_eq!(v.len(), m, "component count mismatch");
            for (a, &va) in v.iter().enumerate() {
                if !va.is_finite() {
                    return Err(FealError::NonFinite {
                        what: format!("interpolated component {a} at dof {k}"),
                    });
                }
                coeffs[k * m + a] = va;
            }
        }
        Ok(VectorFEFunction {
            space: self,
            coefficients: coeffs,
        })
    }

    pub fn function(&self, coefficients: Vec<f64>) -> VectorFEFunction<'_, 'a, 'm> {
        assert_eq!(coefficients.len(), self.gdof());
        VectorFEFunction {
            space: self,
            coefficients,
        }
    }
}

/// Vector finite-element function over a tensor space.
pub struct VectorFEFunction<'t, 'a, 'm> {
    space: &'t TensorSpace<'a, 'm>,
    coefficients: Vec<f64>,
}

impl<'t, 'a, 'm> VectorFEFunction<'t, 'a, 'm> {
    pub fn space(&self) -> &'t TensorSpace<'a, 'm> {
        self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    /// Values for cells `c0..c1` at the given points, `[c1-c0, NQ, GD]`.
    pub fn cell_values_range(&self, bc: &Tensor<f64>, c0: usize, c1: usize) -> Result<Tensor<f64>> {
        let phi = self.space.scalar.basis(bc)?;
        let (nq, ldof) = (phi.shape()[0], phi.shape()[1]);
        let m = self.space.components;
        let c2d = self.space.scalar.cell_to_dof();
        let mut out = Tensor::zeros(&[c1 - c0, nq, m]);
        let data = out.data_mut();
        for c in c0..c1 {
            let dofs = c2d.row(c);
            for q in 0..nq {
                let dst = &mut data[((c - c0) * nq + q) * m..((c - c0) * nq + q + 1) * m];
                for l in 0..ldof {
                    let w = phi.at2(q, l);
                    let base = dofs[l] * m;
                    for a in 0..m {
                        dst[a] += w * self.coefficients[base + a];
                    }
                }
            }
        }
        Ok(out)
    }
}
