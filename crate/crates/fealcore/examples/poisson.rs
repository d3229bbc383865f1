//! Minimal end-to-end Poisson solve: -laplace(u) = f on the unit square
//! with a manufactured sine solution, quadratic elements, and CG.

use std::f64::consts::PI;

use fealcore::backend::Backend;
use fealcore::fem::{
    apply_dirichlet, assemble_bilinear, assemble_linear, default_quadrature, diffusion_integrator,
    l2_error, source_integrator, DirichletData,
};
use fealcore::mesh::{CellKind, Mesh};
use fealcore::solver::{cg, Preconditioner};
use fealcore::space::{Continuity, LagrangeSpace};

fn main() -> fealcore::Result<()> {
    let backend = Backend::parallel();
    let mesh = Mesh::from_box(
        CellKind::Triangle,
        &[0.0, 1.0, 0.0, 1.0],
        &[32, 32],
        backend,
    )?;
    let space = LagrangeSpace::new(&mesh, 2, Continuity::Continuous)?;
    let rule = default_quadrature(2, 2)?;

    let u = |x: &[f64]| (PI * x[0]).sin() * (PI * x[1]).sin();
    let f = |x: &[f64]| 2.0 * PI * PI * u(x);

    let stiffness = diffusion_integrator(&space, &rule, None)?;
    let a = assemble_bilinear(std::slice::from_ref(&stiffness), space.gdof(), backend)?;
    let load = source_integrator(&space, &rule, f)?;
    let b = assemble_linear(std::slice::from_ref(&load), space.gdof(), backend)?;
    let boundary = DirichletData::from_scalar(&space, u)?;
    let (a, b, _) = apply_dirichlet(&a, &b, &boundary, backend)?;

    let (x, report) = cg(
        &a.to_csr(backend),
        &b,
        1e-10,
        10 * space.gdof(),
        Preconditioner::Jacobi,
        backend,
    )?;
    let err = l2_error(&space.function(x.into_vec()), u, &rule)?;
    println!(
        "{} unknowns, {} CG iterations, L2 error {err:.3e}",
        space.gdof(),
        report.iterations
    );
    Ok(())
}
