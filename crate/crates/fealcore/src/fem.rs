//! Element integrators, global assembly, Dirichlet treatment, and error
//! norms for Lagrange spaces on simplex meshes.
//!
//! Integrators produce per-cell blocks; `assemble_bilinear` broadcasts each
//! block's DoF maps into global (row, col) index lists, stacks everything
//! into one coordinate matrix, and coalesces. Cells are processed in chunks
//! so peak memory stays proportional to the output, not to `NC × NQ × ldof`.

use crate::backend::{Backend, Contraction};
use crate::error::{FealError, Result};
use crate::mesh::Mesh;
use crate::quadrature::{simplex_rule, QuadratureRule};
use crate::solver::dense_lu;
use crate::space::{
    push_forward_gradients, FEFunction, LagrangeSpace, TensorSpace, VectorFEFunction,
};
use crate::sparse::CooMatrix;
use crate::tensor::Tensor;

/// Cells processed per integrator pass.
const CELL_CHUNK: usize = 1024;

/// Material hypothesis selecting the stress-strain matrix layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    ThreeDimensional,
    PlaneStrain,
    PlaneStress,
}

impl Hypothesis {
    pub fn geo_dim(self) -> usize {
        match self {
            Hypothesis::ThreeDimensional => 3,
            _ => 2,
        }
    }

    /// Length of the symmetric-strain vector.
    pub fn voigt_len(self) -> usize {
        match self {
            Hypothesis::ThreeDimensional => 6,
            _ => 3,
        }
    }
}

/// Homogeneous isotropic linear-elastic material.
#[derive(Clone, Copy, Debug)]
pub struct IsotropicMaterial {
    lame_lambda: f64,
    shear_modulus: f64,
    hypothesis: Hypothesis,
}

impl IsotropicMaterial {
    pub fn new(lame_lambda: f64, shear_modulus: f64, hypothesis: Hypothesis) -> Result<Self> {
        if !(shear_modulus > 0.0) {
            return Err(FealError::InvalidArgument(format!(
                "shear modulus must be positive, got {shear_modulus}"
            )));
        }
        let gd = hypothesis.geo_dim() as f64;
        if !(lame_lambda + 2.0 * shear_modulus / gd > 0.0) {
            return Err(FealError::InvalidArgument(format!(
                "elasticity tensor not positive definite: lambda + 2 mu / {gd} = {}",
                lame_lambda + 2.0 * shear_modulus / gd
            )));
        }
        Ok(IsotropicMaterial {
            lame_lambda,
            shear_modulus,
            hypothesis,
        })
    }

    pub fn lame_lambda(&self) -> f64 {
        self.lame_lambda
    }

    pub fn shear_modulus(&self) -> f64 {
        self.shear_modulus
    }

    pub fn hypothesis(&self) -> Hypothesis {
        self.hypothesis
    }

    /// Stress-strain matrix in symmetric-strain form with engineering shear
    /// (3D rows: xx, yy, zz, xy, yz, zx; planar rows: xx, yy, xy).
    pub fn stiffness(&self) -> Tensor<f64> {
        let mu = self.shear_modulus;
        match self.hypothesis {
            Hypothesis::ThreeDimensional => {
                let la = self.lame_lambda;
                let mut d = vec![0.0; 36];
                for i in 0..3 {
                    for j in 0..3 {
                        d[i * 6 + j] = if i == j { la + 2.0 * mu } else { la };
                    }
                    d[(i + 3) * 6 + (i + 3)] = mu;
                }
                Tensor::from_vec(d, &[6, 6])
            }
            Hypothesis::PlaneStrain | Hypothesis::PlaneStress => {
                let la = match self.hypothesis {
                    Hypothesis::PlaneStrain => self.lame_lambda,
                    _ => 2.0 * self.lame_lambda * mu / (self.lame_lambda + 2.0 * mu),
                };
                let mut d = vec![0.0; 9];
                for i in 0..2 {
                    for j in 0..2 {
                        d[i * 3 + j] = if i == j { la + 2.0 * mu } else { la };
                    }
                }
                d[8] = mu;
                Tensor::from_vec(d, &[3, 3])
            }
        }
    }
}

/// Per-cell matrix blocks plus the DoF maps that place them globally.
#[derive(Clone, Debug)]
pub struct ElementMatrixBlock {
    /// `[NC, ldof_rows, ldof_cols]`, or `[B, NC, ldof_rows, ldof_cols]`.
    pub values: Tensor<f64>,
    pub row_dofs: Tensor<usize>,
    pub col_dofs: Tensor<usize>,
}

/// Per-cell vectors plus the DoF map.
#[derive(Clone, Debug)]
pub struct ElementVectorBlock {
    /// `[NC, ldof]`.
    pub values: Tensor<f64>,
    pub dofs: Tensor<usize>,
}

/// Scalar coefficient for diffusion/mass forms. The batched variant carries
/// one constant per batch slice and yields batched element blocks.
pub enum Coefficient<'a> {
    Constant(f64),
    Function(&'a (dyn Fn(&[f64]) -> f64 + Sync)),
    BatchedConstant(Vec<f64>),
}

/// Default quadrature for a degree-`p` space: exact for every in-scope form
/// on affine cells.
pub fn default_quadrature(top_dim: usize, p: usize) -> Result<QuadratureRule> {
    simplex_rule(top_dim, p + 3)
}

/// Physical coordinates of barycentric points for cells `c0..c1`:
/// `[c1-c0, NQ, GD]`.
fn chunk_points(mesh: &Mesh, bc: &Tensor<f64>, c0: usize, c1: usize) -> Tensor<f64> {
    let nq = bc.shape()[0];
    let nv = bc.shape()[1];
    let gd = mesh.geo_dim();
    let node = mesh.node();
    let cell = mesh.cell();
    let mut out = Tensor::zeros(&[c1 - c0, nq, gd]);
    let data = out.data_mut();
    for c in c0..c1 {
        let verts = cell.row(c);
        for q in 0..nq {
            let dst = &mut data[((c - c0) * nq + q) * gd..((c - c0) * nq + q + 1) * gd];
            for v in 0..nv {
                let w = bc.at2(q, v);
                let x = node.row(verts[v]);
                for j in 0..gd {
                    dst[j] += w * x[j];
                }
            }
        }
    }
    out
}

enum CoefEval<'a> {
    Const(f64),
    Fun(&'a (dyn Fn(&[f64]) -> f64 + Sync)),
}

/// Quadrature weight table `[c1-c0, NQ]`: `meas_c * w_q * coef(x_q)`.
fn weight_table(
    mesh: &Mesh,
    rule: &QuadratureRule,
    meas: &[f64],
    coef: &CoefEval<'_>,
    c0: usize,
    c1: usize,
) -> Tensor<f64> {
    let nq = rule.len();
    let mut w = Tensor::zeros(&[c1 - c0, nq]);
    match coef {
        CoefEval::Const(k) => {
            let data = w.data_mut();
            for c in c0..c1 {
                for q in 0..nq {
                    data[(c - c0) * nq + q] = meas[c] * rule.weights[q] * k;
                }
            }
        }
        CoefEval::Fun(f) => {
            let pts = chunk_points(mesh, &rule.points, c0, c1);
            for c in 0..c1 - c0 {
                for q in 0..nq {
                    let x = &pts.data()
                        [(c * nq + q) * mesh.geo_dim()..(c * nq + q + 1) * mesh.geo_dim()];
                    w.data_mut()[c * nq + q] = meas[c + c0] * rule.weights[q] * f(x);
                }
            }
        }
    }
    w
}

fn require_simplex(mesh: &Mesh, op: &'static str) -> Result<()> {
    if !mesh.kind().is_simplex() {
        return Err(FealError::UnsupportedCellKind {
            op,
            kind: mesh.kind().name(),
        });
    }
    Ok(())
}

fn scalar_kernel_matrix(
    space: &LagrangeSpace<'_>,
    rule: &QuadratureRule,
    coef: &CoefEval<'_>,
    gradient_form: bool,
) -> Result<Tensor<f64>> {
    let mesh = space.mesh();
    let backend = mesh.backend();
    let nc = mesh.num_cells();
    let ldof = space.ldof();
    let meas = mesh.cell_measure()?;
    let mut values = Tensor::zeros(&[nc, ldof, ldof]);
    if gradient_form {
        let dlam = space.basis_lambda_gradients(&rule.points)?;
        let glam = mesh.grad_lambda()?;
        let mut c0 = 0;
        while c0 < nc {
            let c1 = (c0 + CELL_CHUNK).min(nc);
            let gphi = push_forward_gradients(&dlam, &glam, c0, c1);
            let w = weight_table(mesh, rule, &meas, coef, c0, c1);
            let block = backend.contract(Contraction::Gramian {
                w: &w,
                a: &gphi,
                b: &gphi,
            })?;
            values.data_mut()[c0 * ldof * ldof..c1 * ldof * ldof].copy_from_slice(block.data());
            c0 = c1;
        }
    } else {
        let phi = space.basis(&rule.points)?;
        let mut c0 = 0;
        while c0 < nc {
            let c1 = (c0 + CELL_CHUNK).min(nc);
            let w = weight_table(mesh, rule, &meas, coef, c0, c1);
            let block = backend.contract(Contraction::GramianShared {
                w: &w,
                a: &phi,
                b: &phi,
            })?;
            values.data_mut()[c0 * ldof * ldof..c1 * ldof * ldof].copy_from_slice(block.data());
            c0 = c1;
        }
    }
    Ok(values)
}

fn scalar_form_block(
    space: &LagrangeSpace<'_>,
    rule: &QuadratureRule,
    coef: Option<&Coefficient<'_>>,
    gradient_form: bool,
) -> Result<ElementMatrixBlock> {
    let nc = space.mesh().num_cells();
    let ldof = space.ldof();
    let values = match coef {
        None => scalar_kernel_matrix(space, rule, &CoefEval::Const(1.0), gradient_form)?,
        Some(Coefficient::Constant(k)) => {
            scalar_kernel_matrix(space, rule, &CoefEval::Const(*k), gradient_form)?
        }
        Some(Coefficient::Function(f)) => {
            scalar_kernel_matrix(space, rule, &CoefEval::Fun(*f), gradient_form)?
        }
        Some(Coefficient::BatchedConstant(ks)) => {
            // one unbatched pass per slice, so every slice is bitwise equal
            // to the corresponding unbatched run
            let b = ks.len();
            let mut stacked = Tensor::zeros(&[b, nc, ldof, ldof]);
            for (s, &k) in ks.iter().enumerate() {
                let one = scalar_kernel_matrix(space, rule, &CoefEval::Const(k), gradient_form)?;
                stacked.data_mut()[s * nc * ldof * ldof..(s + 1) * nc * ldof * ldof]
                    .copy_from_slice(one.data());
            }
            stacked
        }
    };
    Ok(ElementMatrixBlock {
        values,
        row_dofs: space.cell_to_dof().clone(),
        col_dofs: space.cell_to_dof().clone(),
    })
}

/// Stiffness blocks `K_c[i,j] = meas_c Σ_q w_q coef(x_q) ∇φ_i·∇φ_j`.
pub fn diffusion_integrator(
    space: &LagrangeSpace<'_>,
    rule: &QuadratureRule,
    coef: Option<&Coefficient<'_>>,
) -> Result<ElementMatrixBlock> {
    require_simplex(space.mesh(), "diffusion_integrator")?;
    let p = space.degree();
    if rule.degree + 2 < 2 * p {
        eprintln!(
            "diffusion integrator: quadrature exact to degree {} under-integrates the degree-{} gradient product (needs {})",
            rule.degree,
            p,
            2 * (p - 1)
        );
    }
    scalar_form_block(space, rule, coef, true)
}

/// Mass blocks `M_c[i,j] = meas_c Σ_q w_q coef(x_q) φ_i φ_j`.
pub fn mass_integrator(
    space: &LagrangeSpace<'_>,
    rule: &QuadratureRule,
    coef: Option<&Coefficient<'_>>,
) -> Result<ElementMatrixBlock> {
    require_simplex(space.mesh(), "mass_integrator")?;
    let p = space.degree();
    if rule.degree < 2 * p {
        eprintln!(
            "mass integrator: quadrature exact to degree {} under-integrates the degree-{} basis product (needs {})",
            rule.degree,
            p,
            2 * p
        );
    }
    scalar_form_block(space, rule, coef, false)
}

/// Elastic stiffness blocks `K_c = meas_c Σ_q w_q Bᵀ D B` over interleaved
/// vector DoFs.
pub fn linear_elastic_integrator(
    tspace: &TensorSpace<'_, '_>,
    material: &IsotropicMaterial,
    rule: &QuadratureRule,
) -> Result<ElementMatrixBlock> {
    let space = tspace.scalar();
    let mesh = space.mesh();
    require_simplex(mesh, "linear_elastic_integrator")?;
    let gd = mesh.geo_dim();
    if material.hypothesis().geo_dim() != gd || tspace.components() != gd {
        return Err(FealError::InvalidArgument(format!(
            "material hypothesis expects {} space dimensions, mesh/space have {}/{}",
            material.hypothesis().geo_dim(),
            gd,
            tspace.components()
        )));
    }
    let p = space.degree();
    if rule.degree + 2 < 2 * p {
        eprintln!(
            "elastic integrator: quadrature exact to degree {} under-integrates the degree-{} strain product (needs {})",
            rule.degree,
            p,
            2 * (p - 1)
        );
    }

    let backend = mesh.backend();
    let nc = mesh.num_cells();
    let ldof_s = space.ldof();
    let ldof_v = ldof_s * gd;
    let nv = material.hypothesis().voigt_len();
    let nq = rule.len();
    let d = material.stiffness();
    let meas = mesh.cell_measure()?;
    let dlam = space.basis_lambda_gradients(&rule.points)?;
    let glam = mesh.grad_lambda()?;

    let mut values = Tensor::zeros(&[nc, ldof_v, ldof_v]);
    let mut c0 = 0;
    while c0 < nc {
        let c1 = (c0 + CELL_CHUNK).min(nc);
        let gphi = push_forward_gradients(&dlam, &glam, c0, c1);
        let gdata = gphi.data();
        let out = &mut values.data_mut()[c0 * ldof_v * ldof_v..c1 * ldof_v * ldof_v];
        backend.for_each_cell(out, ldof_v * ldof_v, |c, cell_out| {
            let mut b = vec![0.0; nv * ldof_v];
            let mut db = vec![0.0; nv * ldof_v];
            for q in 0..nq {
                let wq = meas[c0 + c] * rule.weights[q];
                let g = &gdata[(c * nq + q) * ldof_s * gd..(c * nq + q + 1) * ldof_s * gd];
                b.iter_mut().for_each(|x| *x = 0.0);
                for i in 0..ldof_s {
                    let gi = &g[i * gd..(i + 1) * gd];
                    match gd {
                        3 => {
                            b[i * 3] = gi[0];
                            b[ldof_v + i * 3 + 1] = gi[1];
                            b[2 * ldof_v + i * 3 + 2] = gi[2];
                            b[3 * ldof_v + i * 3] = gi[1];
                            b[3 * ldof_v + i * 3 + 1] = gi[0];
                            b[4 * ldof_v + i * 3 + 1] = gi[2];
                            b[4 * ldof_v + i * 3 + 2] = gi[1];
                            b[5 * ldof_v + i * 3] = gi[2];
                            b[5 * ldof_v + i * 3 + 2] = gi[0];
                        }
                        _ => {
                            b[i * 2] = gi[0];
                            b[ldof_v + i * 2 + 1] = gi[1];
                            b[2 * ldof_v + i * 2] = gi[1];
                            b[2 * ldof_v + i * 2 + 1] = gi[0];
                        }
                    }
                }
                for r in 0..nv {
                    for j in 0..ldof_v {
                        let mut s = 0.0;
                        for k in 0..nv {
                            s += d.at2(r, k) * b[k * ldof_v + j];
                        }
                        db[r * ldof_v + j] = s;
                    }
                }
                for i in 0..ldof_v {
                    for j in 0..ldof_v {
                        let mut s = 0.0;
                        for r in 0..nv {
                            s += b[r * ldof_v + i] * db[r * ldof_v + j];
                        }
                        cell_out[i * ldof_v + j] += wq * s;
                    }
                }
            }
        });
        c0 = c1;
    }
    let dofs = tspace.cell_to_dof();
    Ok(ElementMatrixBlock {
        values,
        row_dofs: dofs.clone(),
        col_dofs: dofs,
    })
}

/// Load vectors `b_c[i] = meas_c Σ_q w_q f(x_q) φ_i(x_q)` for a scalar
/// right-hand side.
pub fn source_integrator<F>(
    space: &LagrangeSpace<'_>,
    rule: &QuadratureRule,
    f: F,
) -> Result<ElementVectorBlock>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    require_simplex(space.mesh(), "source_integrator")?;
    let mesh = space.mesh();
    let backend = mesh.backend();
    let nc = mesh.num_cells();
    let nq = rule.len();
    let ldof = space.ldof();
    let meas = mesh.cell_measure()?;
    let phi = space.basis(&rule.points)?;
    let mut values = Tensor::zeros(&[nc, ldof]);
    let mut c0 = 0;
    while c0 < nc {
        let c1 = (c0 + CELL_CHUNK).min(nc);
        let pts = chunk_points(mesh, &rule.points, c0, c1);
        let gd = mesh.geo_dim();
        let mut w = Tensor::zeros(&[c1 - c0, nq]);
        for c in 0..c1 - c0 {
            for q in 0..nq {
                let x = &pts.data()[(c * nq + q) * gd..(c * nq + q + 1) * gd];
                let v = f(x);
                if !v.is_finite() {
                    return Err(FealError::NonFinite {
                        what: format!("source value at cell {}, point {q}", c0 + c),
                    });
                }
                w.data_mut()[c * nq + q] = meas[c0 + c] * rule.weights[q] * v;
            }
        }
        let block = backend.contract(Contraction::VectorShared { w: &w, a: &phi })?;
        values.data_mut()[c0 * ldof..c1 * ldof].copy_from_slice(block.data());
        c0 = c1;
    }
    Ok(ElementVectorBlock {
        values,
        dofs: space.cell_to_dof().clone(),
    })
}

/// Load vectors for a vector-valued right-hand side over interleaved DoFs:
/// `b_c[i·GD+a] = meas_c Σ_q w_q f_a(x_q) φ_i(x_q)`.
pub fn source_integrator_vector<F>(
    tspace: &TensorSpace<'_, '_>,
    rule: &QuadratureRule,
    f: F,
) -> Result<ElementVectorBlock>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let space = tspace.scalar();
    let mesh = space.mesh();
    require_simplex(mesh, "source_integrator_vector")?;
    let backend = mesh.backend();
    let nc = mesh.num_cells();
    let nq = rule.len();
    let gd = mesh.geo_dim();
    let ncomp = tspace.components();
    let ldof_s = space.ldof();
    let ldof_v = ldof_s * ncomp;
    let meas = mesh.cell_measure()?;
    let phi = space.basis(&rule.points)?;
    let mut values = Tensor::zeros(&[nc, ldof_v]);
    let mut c0 = 0;
    while c0 < nc {
        let c1 = (c0 + CELL_CHUNK).min(nc);
        let pts = chunk_points(mesh, &rule.points, c0, c1);
        let mut w = Tensor::zeros(&[ncomp, (c1 - c0) * nq]);
        for c in 0..c1 - c0 {
            for q in 0..nq {
                let x = &pts.data()[(c * nq + q) * gd..(c * nq + q + 1) * gd];
                let v = f(x);
                if v.len() != ncomp {
                    return Err(FealError::ShapeMismatch {
                        expected: format!("{ncomp} source components"),
                        got: format!("{}", v.len()),
                    });
                }
                for (a, &va) in v.iter().enumerate() {
                    if !va.is_finite() {
                        return Err(FealError::NonFinite {
                            what: format!("source component {a} at cell {}, point {q}", c0 + c),
                        });
                    }
                    w.data_mut()[a * (c1 - c0) * nq + c * nq + q] =
                        meas[c0 + c] * rule.weights[q] * va;
                }
            }
        }
        for a in 0..ncomp {
            let wa = Tensor::from_vec(
                w.data()[a * (c1 - c0) * nq..(a + 1) * (c1 - c0) * nq].to_vec(),
                &[c1 - c0, nq],
            );
            let block = backend.contract(Contraction::VectorShared { w: &wa, a: &phi })?;
            for c in 0..c1 - c0 {
                for i in 0..ldof_s {
                    values.data_mut()[(c0 + c) * ldof_v + i * ncomp + a] = block.at2(c, i);
                }
            }
        }
        c0 = c1;
    }
    Ok(ElementVectorBlock {
        values,
        dofs: tspace.cell_to_dof(),
    })
}

fn check_dof_map(dofs: &Tensor<usize>, gdof: usize) -> Result<()> {
    let ldof = dofs.shape()[1];
    for (k, &d) in dofs.data().iter().enumerate() {
        if d >= gdof {
            return Err(FealError::DofOutOfRange {
                cell: k / ldof,
                slot: k % ldof,
                dof: d,
                gdof,
            });
        }
    }
    Ok(())
}

/// Stack element blocks into one global coordinate matrix: row maps
/// broadcast over columns, column maps over rows, entries concatenated
/// across blocks and coalesced.
pub fn assemble_bilinear(
    blocks: &[ElementMatrixBlock],
    gdof: usize,
    backend: Backend,
) -> Result<CooMatrix> {
    let mut acc: Option<CooMatrix> = None;
    for block in blocks {
        check_dof_map(&block.row_dofs, gdof)?;
        check_dof_map(&block.col_dofs, gdof)?;
        let nc = block.row_dofs.shape()[0];
        let lr = block.row_dofs.shape()[1];
        let lc = block.col_dofs.shape()[1];
        let mut rows = Vec::with_capacity(nc * lr * lc);
        let mut cols = Vec::with_capacity(nc * lr * lc);
        for c in 0..nc {
            let rmap = block.row_dofs.row(c);
            let cmap = block.col_dofs.row(c);
            for &r in rmap {
                for &cd in cmap {
                    rows.push(r);
                    cols.push(cd);
                }
            }
        }
        let values = match block.values.ndim() {
            3 => Tensor::from_vec(block.values.data().to_vec(), &[nc * lr * lc]),
            4 => {
                let b = block.values.shape()[0];
                Tensor::from_vec(block.values.data().to_vec(), &[b, nc * lr * lc])
            }
            _ => {
                return Err(FealError::ShapeMismatch {
                    expected: "[NC, lr, lc] or [B, NC, lr, lc]".into(),
                    got: format!("{:?}", block.values.shape()),
                })
            }
        };
        let coo = CooMatrix::new(rows, cols, values, (gdof, gdof))?;
        acc = Some(match acc {
            None => coo,
            Some(prev) => prev.coo_add(&coo)?,
        });
    }
    let acc = match acc {
        Some(a) => a,
        None => CooMatrix::new(vec![], vec![], Tensor::zeros(&[0]), (gdof, gdof))?,
    };
    Ok(acc.coalesce(backend))
}

/// Scatter-add element vectors into a global vector.
pub fn assemble_linear(
    blocks: &[ElementVectorBlock],
    gdof: usize,
    backend: Backend,
) -> Result<Tensor<f64>> {
    let mut out = Tensor::zeros(&[gdof]);
    for block in blocks {
        check_dof_map(&block.dofs, gdof)?;
        if block.values.ndim() != 2 {
            return Err(FealError::ShapeMismatch {
                expected: "[NC, ldof]".into(),
                got: format!("{:?}", block.values.shape()),
            });
        }
        backend.scatter_add(out.data_mut(), block.dofs.data(), block.values.data())?;
    }
    Ok(out)
}

/// Dirichlet constraint: interpolated boundary values and the DoF mask they
/// apply to.
#[derive(Clone, Debug)]
pub struct DirichletData {
    values: Tensor<f64>,
    flag: Vec<bool>,
}

impl DirichletData {
    pub fn new(values: Tensor<f64>, flag: Vec<bool>) -> Result<DirichletData> {
        if values.shape() != [flag.len()] {
            return Err(FealError::ShapeMismatch {
                expected: format!("[{}]", flag.len()),
                got: format!("{:?}", values.shape()),
            });
        }
        Ok(DirichletData { values, flag })
    }

    /// Interpolate a scalar boundary function over the whole space and mark
    /// the boundary DoFs.
    pub fn from_scalar<F>(space: &LagrangeSpace<'_>, g: F) -> Result<DirichletData>
    where
        F: Fn(&[f64]) -> f64,
    {
        let u = space.interpolate(g)?;
        DirichletData::new(
            Tensor::from_vec(u.coefficients().to_vec(), &[space.gdof()]),
            space.boundary_dof_flag(),
        )
    }

    /// Vector analog of [`DirichletData::from_scalar`].
    pub fn from_vector<F>(tspace: &TensorSpace<'_, '_>, g: F) -> Result<DirichletData>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let u = tspace.interpolate(g)?;
        DirichletData::new(
            Tensor::from_vec(u.coefficients().to_vec(), &[tspace.gdof()]),
            tspace.boundary_dof_flag(),
        )
    }

    pub fn flag(&self) -> &[bool] {
        &self.flag
    }

    pub fn values(&self) -> &Tensor<f64> {
        &self.values
    }
}

/// Eliminate Dirichlet DoFs symmetrically: returns the reduced matrix with
/// identity rows/columns at flagged DoFs, the lifted right-hand side, and
/// the boundary lift `u0`.
pub fn apply_dirichlet(
    a: &CooMatrix,
    b: &Tensor<f64>,
    data: &DirichletData,
    backend: Backend,
) -> Result<(CooMatrix, Tensor<f64>, Tensor<f64>)> {
    let (nrows, ncols) = a.sparse_shape();
    if nrows != ncols {
        return Err(FealError::NotSquare { nrows, ncols });
    }
    if data.flag.len() != nrows || b.shape() != [nrows] {
        return Err(FealError::ShapeMismatch {
            expected: format!("flag/rhs of length {nrows}"),
            got: format!("{} / {:?}", data.flag.len(), b.shape()),
        });
    }
    let mut u0 = vec![0.0; nrows];
    for i in 0..nrows {
        if data.flag[i] {
            u0[i] = data.values.data()[i];
        }
    }
    let u0 = Tensor::from_vec(u0, &[nrows]);
    let au0 = a.spmv(&u0)?;
    let mut bp = Vec::with_capacity(nrows);
    for i in 0..nrows {
        if data.flag[i] {
            bp.push(u0.data()[i]);
        } else {
            bp.push(b.data()[i] - au0.data()[i]);
        }
    }
    let ap = a.set_rows_cols_identity(&data.flag, backend)?;
    Ok((ap, Tensor::from_vec(bp, &[nrows]), u0))
}

/// `sqrt(Σ_c meas_c Σ_q w_q |u_exact(x_q) − u_h(x_q)|²)` for a scalar field.
pub fn l2_error<F>(u_h: &FEFunction<'_, '_>, u_exact: F, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let space = u_h.space();
    let mesh = space.mesh();
    let meas = mesh.cell_measure()?;
    let nc = mesh.num_cells();
    let nq = rule.len();
    let gd = mesh.geo_dim();
    let mut acc = 0.0;
    let mut c0 = 0;
    while c0 < nc {
        let c1 = (c0 + CELL_CHUNK).min(nc);
        let vals = u_h.cell_values_range(&rule.points, c0, c1)?;
        let pts = chunk_points(mesh, &rule.points, c0, c1);
        for c in 0..c1 - c0 {
            let mut cell_acc = 0.0;
            for q in 0..nq {
                let x = &pts.data()[(c * nq + q) * gd..(c * nq + q + 1) * gd];
                let d = u_exact(x) - vals.at2(c, q);
                cell_acc += rule.weights[q] * d * d;
            }
            acc += meas[c0 + c] * cell_acc;
        }
        c0 = c1;
    }
    Ok(acc.sqrt())
}

/// Componentwise-summed L2 error for a vector field.
pub fn l2_error_vector<F>(
    u_h: &VectorFEFunction<'_, '_, '_>,
    u_exact: F,
    rule: &QuadratureRule,
) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let tspace = u_h.space();
    let mesh = tspace.scalar().mesh();
    let meas = mesh.cell_measure()?;
    let nc = mesh.num_cells();
    let nq = rule.len();
    let gd = mesh.geo_dim();
    let ncomp = tspace.components();
    let mut acc = 0.0;
    let mut c0 = 0;
    while c0 < nc {
        let c1 = (c0 + CELL_CHUNK).min(nc);
        let vals = u_h.cell_values_range(&rule.points, c0, c1)?;
        let pts = chunk_points(mesh, &rule.points, c0, c1);
        for c in 0..c1 - c0 {
            let mut cell_acc = 0.0;
            for q in 0..nq {
                let x = &pts.data()[(c * nq + q) * gd..(c * nq + q + 1) * gd];
                let exact = u_exact(x);
                if exact.len() != ncomp {
                    return Err(FealError::ShapeMismatch {
                        expected: format!("{ncomp} components"),
                        got: format!("{}", exact.len()),
                    });
                }
                let mut d2 = 0.0;
                for (a, &ea) in exact.iter().enumerate() {
                    let d = ea - vals.at3(c, q, a);
                    d2 += d * d;
                }
                cell_acc += rule.weights[q] * d2;
            }
            acc += meas[c0 + c] * cell_acc;
        }
        c0 = c1;
    }
    Ok(acc.sqrt())
}

/// Solve a small assembled system directly through the dense fallback;
/// intended for tests and patch-style verification.
pub fn solve_dense(a: &CooMatrix, b: &Tensor<f64>) -> Result<Tensor<f64>> {
    let dense = a.to_dense()?;
    dense_lu(&dense, b)
}
