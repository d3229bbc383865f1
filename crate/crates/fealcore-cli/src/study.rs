//! Convergence-study harness: build a box mesh per refinement level,
//! assemble, solve, measure the L2 error, and report a CSV table.

use fealcore::backend::Backend;
use fealcore::error::{FealError, Result};
use fealcore::fem::{
    apply_dirichlet, assemble_bilinear, assemble_linear, default_quadrature, diffusion_integrator,
    linear_elastic_integrator, solve_dense, source_integrator, source_integrator_vector,
    DirichletData, Hypothesis, IsotropicMaterial,
};
use fealcore::mesh::{CellKind, Mesh};
use fealcore::solver::{cg, Preconditioner};
use fealcore::space::{Continuity, LagrangeSpace, TensorSpace};
use fealcore::sparse::CooMatrix;
use fealcore::tensor::Tensor;

use crate::problems;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Elasticity3d,
    Poisson2d,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Elasticity3d => "elasticity3d",
            Problem::Poisson2d => "poisson2d",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    Cg,
    Lu,
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub problem: Problem,
    pub degree: usize,
    pub levels: usize,
    pub backend: Backend,
    pub rtol: f64,
    /// CG iteration cap; `None` means 10·gdof.
    pub max_iter: Option<usize>,
    pub solver: SolverChoice,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 1 {
            return Err(FealError::InvalidArgument(
                "study needs at least one level".into(),
            ));
        }
        if !(1..=3).contains(&self.degree) {
            return Err(FealError::InvalidArgument(format!(
                "degree must be 1, 2, or 3, got {}",
                self.degree
            )));
        }
        Ok(())
    }
}

/// Default level count: to h=1/32 for p=1, 1/16 for p=2, 1/8 for p=3;
/// `deep` adds one more halving.
pub fn default_levels(degree: usize, deep: bool) -> usize {
    let base = match degree {
        1 => 4,
        2 => 3,
        _ => 2,
    };
    base + usize::from(deep)
}

/// One row of the convergence table.
#[derive(Clone, Debug)]
pub struct ConvergenceRecord {
    pub h: f64,
    pub dof: usize,
    /// `None` marks a level whose solve did not converge.
    pub l2_error: Option<f64>,
}

/// Successive convergence orders `log(e_{k−1}/e_k) / log(h_{k−1}/h_k)`;
/// absent for the first row and wherever an error is missing or zero.
pub fn report_orders(records: &[ConvergenceRecord]) -> Vec<Option<f64>> {
    let mut orders = vec![None; records.len()];
    for k in 1..records.len() {
        if let (Some(e0), Some(e1)) = (records[k - 1].l2_error, records[k].l2_error) {
            if e0 > 0.0 && e1 > 0.0 {
                orders[k] = Some((e0 / e1).ln() / (records[k - 1].h / records[k].h).ln());
            }
        }
    }
    orders
}

fn solve_system(
    a: &CooMatrix,
    b: &Tensor<f64>,
    config: &StudyConfig,
    gdof: usize,
) -> Result<(Tensor<f64>, bool)> {
    match config.solver {
        SolverChoice::Lu => Ok((solve_dense(a, b)?, true)),
        SolverChoice::Cg => {
            let csr = a.to_csr(config.backend);
            let max_iter = config.max_iter.unwrap_or(10 * gdof);
            let (x, report) = cg(
                &csr,
                b,
                config.rtol,
                max_iter,
                Preconditioner::Jacobi,
                config.backend,
            )?;
            Ok((x, report.converged))
        }
    }
}

/// How much of a level's pipeline to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelMode {
    /// Assemble, apply boundary conditions, solve, and measure the error.
    Solve,
    /// Stop after the Dirichlet treatment; no solve.
    SystemOnly,
}

/// Everything a level produces that outlives its mesh-borrowing spaces.
pub struct LevelOutput {
    pub mesh: Mesh,
    pub dof: usize,
    /// Field components per node (1 for scalar problems).
    pub components: usize,
    /// Full solution coefficients, present when the solve converged.
    pub coefficients: Option<Vec<f64>>,
    pub l2_error: Option<f64>,
    /// Constrained system, kept in `SystemOnly` mode.
    pub system: Option<(CooMatrix, Tensor<f64>)>,
}

fn elasticity_level(
    divisions: usize,
    config: &StudyConfig,
    mode: LevelMode,
) -> Result<LevelOutput> {
    let mesh = Mesh::from_box(
        CellKind::Tetrahedron,
        &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
        &[divisions, divisions, divisions],
        config.backend,
    )?;
    let mut coefficients = None;
    let mut l2_error = None;
    let mut system = None;
    let gdof;
    {
        let space = LagrangeSpace::new(&mesh, config.degree, Continuity::Continuous)?;
        let tspace = TensorSpace::new(&space, 3)?;
        gdof = tspace.gdof();
        let material = IsotropicMaterial::new(1.0, 1.0, Hypothesis::ThreeDimensional)?;
        let rule = default_quadrature(3, config.degree)?;
        let stiffness = linear_elastic_integrator(&tspace, &material, &rule)?;
        let a = assemble_bilinear(std::slice::from_ref(&stiffness), gdof, config.backend)?;
        drop(stiffness);
        let load = source_integrator_vector(&tspace, &rule, problems::elasticity_b)?;
        let b = assemble_linear(std::slice::from_ref(&load), gdof, config.backend)?;
        drop(load);
        let data = DirichletData::from_vector(&tspace, problems::elasticity_u)?;
        let (ap, bp, _) = apply_dirichlet(&a, &b, &data, config.backend)?;
        drop(a);
        match mode {
            LevelMode::SystemOnly => system = Some((ap, bp)),
            LevelMode::Solve => {
                let (x, converged) = solve_system(&ap, &bp, config, gdof)?;
                if converged {
                    let u_h = tspace.function(x.data().to_vec());
                    l2_error = Some(fealcore::fem::l2_error_vector(
                        &u_h,
                        problems::elasticity_u,
                        &rule,
                    )?);
                    coefficients = Some(x.into_vec());
                }
            }
        }
    }
    Ok(LevelOutput {
        mesh,
        dof: gdof,
        components: 3,
        coefficients,
        l2_error,
        system,
    })
}

fn poisson_level(divisions: usize, config: &StudyConfig, mode: LevelMode) -> Result<LevelOutput> {
    let p = config.degree;
    let mesh = Mesh::from_box(
        CellKind::Triangle,
        &[0.0, 1.0, 0.0, 1.0],
        &[divisions, divisions],
        config.backend,
    )?;
    let mut coefficients = None;
    let mut l2_error = None;
    let mut system = None;
    let gdof;
    {
        let space = LagrangeSpace::new(&mesh, p, Continuity::Continuous)?;
        gdof = space.gdof();
        let rule = default_quadrature(2, p)?;
        let stiffness = diffusion_integrator(&space, &rule, None)?;
        let a = assemble_bilinear(std::slice::from_ref(&stiffness), gdof, config.backend)?;
        let load = source_integrator(&space, &rule, |x: &[f64]| problems::poisson_f(p, x))?;
        let b = assemble_linear(std::slice::from_ref(&load), gdof, config.backend)?;
        let data = DirichletData::from_scalar(&space, |x: &[f64]| problems::poisson_u(p, x))?;
        let (ap, bp, _) = apply_dirichlet(&a, &b, &data, config.backend)?;
        drop(a);
        match mode {
            LevelMode::SystemOnly => system = Some((ap, bp)),
            LevelMode::Solve => {
                let (x, converged) = solve_system(&ap, &bp, config, gdof)?;
                if converged {
                    let u_h = space.function(x.data().to_vec());
                    l2_error = Some(fealcore::fem::l2_error(
                        &u_h,
                        |x: &[f64]| problems::poisson_u(p, x),
                        &rule,
                    )?);
                    coefficients = Some(x.into_vec());
                }
            }
        }
    }
    Ok(LevelOutput {
        mesh,
        dof: gdof,
        components: 1,
        coefficients,
        l2_error,
        system,
    })
}

/// Run one refinement level at the given box division count.
pub fn run_level(divisions: usize, config: &StudyConfig, mode: LevelMode) -> Result<LevelOutput> {
    config.validate()?;
    match config.problem {
        Problem::Elasticity3d => elasticity_level(divisions, config, mode),
        Problem::Poisson2d => poisson_level(divisions, config, mode),
    }
}

/// Run every level of the configured study. Levels whose solver fails to
/// converge are marked (error absent) and the study continues.
pub fn run_study(config: &StudyConfig) -> Result<Vec<ConvergenceRecord>> {
    config.validate()?;
    let mut records = Vec::with_capacity(config.levels);
    for k in 0..config.levels {
        let divisions = 4 << k;
        let out = run_level(divisions, config, LevelMode::Solve)?;
        records.push(ConvergenceRecord {
            h: 1.0 / divisions as f64,
            dof: out.dof,
            l2_error: out.l2_error,
        });
    }
    Ok(records)
}

/// Lower-case scientific notation with 6 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{:.5e}", v)
}

/// Render the convergence table; floating columns use 6 significant digits,
/// a non-converged level shows `nan` and no order.
pub fn render_csv(records: &[ConvergenceRecord]) -> String {
    let orders = report_orders(records);
    let mut out = String::from("h,dof,l2_error,order\n");
    for (rec, order) in records.iter().zip(orders) {
        let err = match rec.l2_error {
            Some(e) => format_float(e),
            None => "nan".into(),
        };
        let ord = match order {
            Some(o) => format_float(o),
            None => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_float(rec.h),
            rec.dof,
            err,
            ord
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_formula_examples() {
        let records = vec![
            ConvergenceRecord {
                h: 0.25,
                dof: 10,
                l2_error: Some(4e-2),
            },
            ConvergenceRecord {
                h: 0.125,
                dof: 20,
                l2_error: Some(1e-2),
            },
        ];
        let orders = report_orders(&records);
        assert!(orders[0].is_none());
        assert!((orders[1].unwrap() - 2.0).abs() < 1e-12);

        // published convergence-table order entries recomputed from the
        // published errors
        let p1 = vec![
            ConvergenceRecord {
                h: 1.0 / 8.0,
                dof: 0,
                l2_error: Some(1.1616e-2),
            },
            ConvergenceRecord {
                h: 1.0 / 16.0,
                dof: 0,
                l2_error: Some(3.5874e-3),
            },
        ];
        let got = report_orders(&p1)[1].unwrap();
        assert!((got - 1.6951).abs() < 5e-4, "got {got}");

        let p2 = vec![
            ConvergenceRecord {
                h: 1.0 / 4.0,
                dof: 0,
                l2_error: Some(5.0775e-3),
            },
            ConvergenceRecord {
                h: 1.0 / 8.0,
                dof: 0,
                l2_error: Some(6.0218e-4),
            },
        ];
        let got = report_orders(&p2)[1].unwrap();
        assert!((got - 3.0759).abs() < 5e-4, "got {got}");
    }

    #[test]
    fn orders_skip_missing_and_zero_rows() {
        let records = vec![
            ConvergenceRecord {
                h: 0.25,
                dof: 1,
                l2_error: Some(1e-2),
            },
            ConvergenceRecord {
                h: 0.125,
                dof: 2,
                l2_error: None,
            },
            ConvergenceRecord {
                h: 0.0625,
                dof: 3,
                l2_error: Some(1e-3),
            },
        ];
        let orders = report_orders(&records);
        assert!(orders.iter().all(|o| o.is_none()));
    }

    #[test]
    fn csv_rendering_and_formatting() {
        assert_eq!(format_float(3.0271e-2), "3.02710e-2");
        assert_eq!(format_float(0.25), "2.50000e-1");
        let records = vec![
            ConvergenceRecord {
                h: 0.25,
                dof: 375,
                l2_error: Some(3.0271e-2),
            },
            ConvergenceRecord {
                h: 0.125,
                dof: 2187,
                l2_error: None,
            },
        ];
        let csv = render_csv(&records);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "h,dof,l2_error,order");
        assert_eq!(lines[1], "2.50000e-1,375,3.02710e-2,");
        assert_eq!(lines[2], "1.25000e-1,2187,nan,");
    }

    #[test]
    fn poisson_study_reproduces_polynomials_exactly() {
        for degree in 1..=2 {
            let config = StudyConfig {
                problem: Problem::Poisson2d,
                degree,
                levels: 2,
                backend: Backend::Serial,
                rtol: 1e-12,
                max_iter: None,
                solver: SolverChoice::Cg,
            };
            let records = run_study(&config).unwrap();
            for rec in &records {
                let err = rec.l2_error.unwrap();
                assert!(err <= 1e-10, "degree {degree}, h {}: {err}", rec.h);
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut config = StudyConfig {
            problem: Problem::Poisson2d,
            degree: 4,
            levels: 1,
            backend: Backend::Serial,
            rtol: 1e-10,
            max_iter: None,
            solver: SolverChoice::Cg,
        };
        assert!(config.validate().is_err());
        config.degree = 2;
        config.levels = 0;
        assert!(config.validate().is_err());
        config.levels = 1;
        assert!(config.validate().is_ok());
    }
}
