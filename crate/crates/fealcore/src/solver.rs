//! Linear solvers: preconditioned conjugate gradient and a dense LU fallback.
//!
//! CG accepts an optional Jacobi preconditioner and reports the iteration
//! count, the final true relative residual, and the recorded history of
//! preconditioned residual norms. Dot products run serially regardless of
//! backend so results are reproducible; the matrix-vector products use the
//! backend's row-parallel kernel, which is bitwise equal to the serial one.

use crate::backend::Backend;
use crate::error::{FealError, Result};
use crate::sparse::CsrMatrix;
use crate::tensor::Tensor;

/// Largest system the dense fallback accepts.
pub const DENSE_CAP: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Cg,
    CgJacobi,
    DenseLu,
}

impl SolveMethod {
    pub fn name(self) -> &'static str {
        match self {
            SolveMethod::Cg => "cg",
            SolveMethod::CgJacobi => "cg_jacobi",
            SolveMethod::DenseLu => "dense_lu",
        }
    }
}

/// Outcome of a linear solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub converged: bool,
    pub method: SolveMethod,
    /// Preconditioned residual norms, one entry per evaluated iterate
    /// starting with the initial guess.
    pub residual_history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradient for symmetric positive definite systems.
///
/// The caller guarantees symmetry; convergence means the explicitly
/// recomputed residual satisfies `‖b − Ax‖ ≤ rtol·‖b‖`. Exceeding
/// `max_iter` is reported through `converged = false`, not as an error.
pub fn cg(
    a: &CsrMatrix,
    b: &Tensor<f64>,
    rtol: f64,
    max_iter: usize,
    precond: Preconditioner,
    backend: Backend,
) -> Result<(Tensor<f64>, SolveReport)> {
    let (nrows, ncols) = a.sparse_shape();
    if nrows != ncols {
        return Err(FealError::NotSquare { nrows, ncols });
    }
    let n = nrows;
    if b.shape() != [n] {
        return Err(FealError::ShapeMismatch {
            expected: format!("[{n}]"),
            got: format!("{:?}", b.shape()),
        });
    }
    for (k, v) in b.data().iter().enumerate() {
        if !v.is_finite() {
            return Err(FealError::NonFinite {
                what: format!("right-hand side entry {k}"),
            });
        }
    }
    if !(rtol > 0.0) {
        return Err(FealError::InvalidArgument(format!(
            "cg: rtol must be positive, got {rtol}"
        )));
    }

    let method = match precond {
        Preconditioner::None => SolveMethod::Cg,
        Preconditioner::Jacobi => SolveMethod::CgJacobi,
    };
    let inv_diag = match precond {
        Preconditioner::None => None,
        Preconditioner::Jacobi => {
            let diag = a.extract_diagonal()?;
            let mut inv = Vec::with_capacity(n);
            for (i, &d) in diag.data().iter().enumerate() {
                if d <= 0.0 || !d.is_finite() {
                    return Err(FealError::BadDiagonal { index: i, value: d });
                }
                inv.push(1.0 / d);
            }
            Some(inv)
        }
    };
    let apply_precond = |r: &[f64]| -> Vec<f64> {
        match &inv_diag {
            None => r.to_vec(),
            Some(inv) => r.iter().zip(inv).map(|(x, m)| x * m).collect(),
        }
    };

    let b_norm = norm(b.data());
    if b_norm == 0.0 {
        return Ok((
            Tensor::zeros(&[n]),
            SolveReport {
                iterations: 0,
                final_relative_residual: 0.0,
                converged: true,
                method,
                residual_history: vec![0.0],
            },
        ));
    }

    let mut x = vec![0.0; n];
    let mut r = b.data().to_vec();
    let mut z = apply_precond(&r);
    let mut rz = dot(&r, &z);
    let mut p = z.clone();
    let mut history = vec![rz.max(0.0).sqrt()];
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=max_iter {
        let pt = Tensor::from_vec(p.clone(), &[n]);
        let ap = a.spmv(&pt, backend)?;
        let pap = dot(&p, ap.data());
        if pap <= 0.0 {
            // lost positive definiteness numerically; stop with the best iterate
            iterations = it - 1;
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap.data()[i];
        }
        iterations = it;
        if norm(&r) <= rtol * b_norm {
            // confirm with the explicit residual before declaring victory
            let xt = Tensor::from_vec(x.clone(), &[n]);
            let ax = a.spmv(&xt, backend)?;
            let mut true_r = b.data().to_vec();
            for i in 0..n {
                true_r[i] -= ax.data()[i];
            }
            if norm(&true_r) <= rtol * b_norm {
                r = true_r;
                z = apply_precond(&r);
                rz = dot(&r, &z);
                history.push(rz.max(0.0).sqrt());
                converged = true;
                break;
            }
            r = true_r;
        }
        z = apply_precond(&r);
        let rz_new = dot(&r, &z);
        history.push(rz_new.max(0.0).sqrt());
        let beta = rz_new / rz;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rz = rz_new;
    }

    let xt = Tensor::from_vec(x, &[n]);
    let ax = a.spmv(&xt, backend)?;
    let mut final_r = 0.0;
    for i in 0..n {
        let d = b.data()[i] - ax.data()[i];
        final_r += d * d;
    }
    let final_relative_residual = final_r.sqrt() / b_norm;
    Ok((
        xt,
        SolveReport {
            iterations,
            final_relative_residual,
            converged,
            method,
            residual_history: history,
        },
    ))
}

/// Dense LU with partial pivoting for systems up to [`DENSE_CAP`] unknowns.
pub fn dense_lu(a: &Tensor<f64>, b: &Tensor<f64>) -> Result<Tensor<f64>> {
    if a.ndim() != 2 || a.shape()[0] != a.shape()[1] {
        return Err(FealError::NotSquare {
            nrows: a.shape()[0],
            ncols: *a.shape().last().unwrap_or(&0),
        });
    }
    let n = a.shape()[0];
    if n > DENSE_CAP {
        return Err(FealError::SizeCap { n, cap: DENSE_CAP });
    }
    if b.shape() != [n] {
        return Err(FealError::ShapeMismatch {
            expected: format!("[{n}]"),
            got: format!("{:?}", b.shape()),
        });
    }
    let mut lu = a.data().to_vec();
    let mut x = b.data().to_vec();
    let scale = lu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = f64::EPSILON * (n.max(1) as f64) * scale.max(1.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[k * n + k].abs();
        for i in k + 1..n {
            let cand = lu[i * n + k].abs();
            if cand > best {
                best = cand;
                piv = i;
            }
        }
        if best < tiny {
            return Err(FealError::Singular { pivot: k });
        }
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        let d = lu[k * n + k];
        for i in k + 1..n {
            let f = lu[i * n + k] / d;
            lu[i * n + k] = f;
            for j in k + 1..n {
                lu[i * n + j] -= f * lu[k * n + j];
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= lu[i * n + j] * x[j];
        }
        x[i] = s / lu[i * n + i];
    }
    Ok(Tensor::from_vec(x, &[n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CooMatrix;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn csr_from_dense(d: &Tensor<f64>) -> CsrMatrix {
        let n = d.shape()[0];
        let m = d.shape()[1];
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            for j in 0..m {
                let v = d.at2(i, j);
                if v != 0.0 {
                    rows.push(i);
                    cols.push(j);
                    vals.push(v);
                }
            }
        }
        let nnz = vals.len();
        CooMatrix::new(rows, cols, Tensor::from_vec(vals, &[nnz]), (n, m))
            .unwrap()
            .to_csr(Backend::Serial)
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Tensor<f64> {
        let r: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += r[k * n + i] * r[k * n + j];
                }
                a[i * n + j] = s + if i == j { n as f64 } else { 0.0 };
            }
        }
        Tensor::from_vec(a, &[n, n])
    }

    #[test]
    fn cg_diagonal_two_eigenvalues() {
        let a = csr_from_dense(&Tensor::from_vec(vec![2.0, 0.0, 0.0, 3.0], &[2, 2]));
        let b = Tensor::from_vec(vec![2.0, 3.0], &[2]);
        let (x, report) = cg(&a, &b, 1e-12, 50, Preconditioner::Jacobi, Backend::Serial).unwrap();
        assert!(report.converged);
        assert!(report.iterations <= 2, "took {}", report.iterations);
        assert!((x.data()[0] - 1.0).abs() < 1e-10);
        assert!((x.data()[1] - 1.0).abs() < 1e-10);
        assert_eq!(report.method, SolveMethod::CgJacobi);
    }

    #[test]
    fn cg_zero_rhs() {
        let a = csr_from_dense(&Tensor::from_vec(vec![2.0, 0.0, 0.0, 3.0], &[2, 2]));
        let b = Tensor::zeros(&[2]);
        let (x, report) = cg(&a, &b, 1e-10, 50, Preconditioner::None, Backend::Serial).unwrap();
        assert_eq!(x.data(), &[0.0, 0.0]);
        assert_eq!(report.iterations, 0);
        assert!(report.converged);
        assert_eq!(report.method, SolveMethod::Cg);
    }

    #[test]
    fn cg_matches_lu_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let dense = random_spd(&mut rng, 50);
        let b = Tensor::from_vec((0..50).map(|_| rng.gen_range(-1.0..1.0)).collect(), &[50]);
        let x_lu = dense_lu(&dense, &b).unwrap();
        let a = csr_from_dense(&dense);
        for precond in [Preconditioner::None, Preconditioner::Jacobi] {
            let (x, report) = cg(&a, &b, 1e-12, 500, precond, Backend::Serial).unwrap();
            assert!(report.converged);
            assert!(report.final_relative_residual <= 1e-12);
            for (p, q) in x.data().iter().zip(x_lu.data()) {
                assert!((p - q).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn cg_history_is_monotone_for_jacobi_on_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for trial in 0..5 {
            let n = 20 + 10 * trial;
            let dense = random_spd(&mut rng, n);
            let a = csr_from_dense(&dense);
            let b = Tensor::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), &[n]);
            let (_, report) = cg(
                &a,
                &b,
                1e-11,
                10 * n,
                Preconditioner::Jacobi,
                Backend::Serial,
            )
            .unwrap();
            assert!(report.converged);
            for w in report.residual_history.windows(2) {
                assert!(
                    w[1] <= w[0] * (1.0 + 1e-12),
                    "history not non-increasing: {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn cg_reports_nonconvergence_without_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let dense = random_spd(&mut rng, 40);
        let a = csr_from_dense(&dense);
        let b = Tensor::from_vec((0..40).map(|_| rng.gen_range(-1.0..1.0)).collect(), &[40]);
        let (_, report) = cg(&a, &b, 1e-14, 2, Preconditioner::None, Backend::Serial).unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 2);
    }

    #[test]
    fn cg_rejects_bad_jacobi_diagonal() {
        let a = csr_from_dense(&Tensor::from_vec(vec![0.0, 1.0, 1.0, 0.0], &[2, 2]));
        let b = Tensor::from_vec(vec![1.0, 1.0], &[2]);
        let err = cg(&a, &b, 1e-10, 10, Preconditioner::Jacobi, Backend::Serial).unwrap_err();
        assert!(matches!(err, FealError::BadDiagonal { index: 0, value } if value == 0.0));
    }

    #[test]
    fn cg_backend_equivalence_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let dense = random_spd(&mut rng, 30);
        let a = csr_from_dense(&dense);
        let b = Tensor::from_vec((0..30).map(|_| rng.gen_range(-1.0..1.0)).collect(), &[30]);
        let (x1, r1) = cg(&a, &b, 1e-11, 300, Preconditioner::Jacobi, Backend::Serial).unwrap();
        let (x2, r2) = cg(
            &a,
            &b,
            1e-11,
            300,
            Preconditioner::Jacobi,
            Backend::parallel(),
        )
        .unwrap();
        assert_eq!(r1.iterations, r2.iterations);
        for (p, q) in x1.data().iter().zip(x2.data()) {
            assert_eq!(p.to_bits(), q.to_bits());
        }
    }

    #[test]
    fn lu_examples() {
        let eye = Tensor::from_vec(vec![1.0, 0.0, 0.0, 1.0], &[2, 2]);
        let b = Tensor::from_vec(vec![4.0, 7.0], &[2]);
        assert_eq!(dense_lu(&eye, &b).unwrap().data(), &[4.0, 7.0]);

        let d = Tensor::from_vec(vec![2.0, 0.0, 0.0, 4.0], &[2, 2]);
        let b = Tensor::from_vec(vec![2.0, 4.0], &[2]);
        assert_eq!(dense_lu(&d, &b).unwrap().data(), &[1.0, 1.0]);
    }

    #[test]
    fn lu_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let n = 30;
        let a = Tensor::from_vec(
            (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            &[n, n],
        );
        let b = Tensor::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), &[n]);
        let x = dense_lu(&a, &b).unwrap();
        let mut res = 0.0f64;
        let mut bn = 0.0f64;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += a.at2(i, j) * x.data()[j];
            }
            res += (b.data()[i] - s).powi(2);
            bn += b.data()[i].powi(2);
        }
        assert!(res.sqrt() <= 1e-10 * bn.sqrt());
    }

    #[test]
    fn lu_rejects_singular_and_oversized() {
        let sing = Tensor::from_vec(vec![1.0, 1.0, 1.0, 1.0], &[2, 2]);
        let b = Tensor::from_vec(vec![1.0, 2.0], &[2]);
        assert!(matches!(
            dense_lu(&sing, &b).unwrap_err(),
            FealError::Singular { pivot: 1 }
        ));
        let n = DENSE_CAP + 1;
        let big = Tensor::zeros(&[n, n]);
        let rhs = Tensor::zeros(&[n]);
        assert!(matches!(
            dense_lu(&big, &rhs).unwrap_err(),
            FealError::SizeCap { n: m, cap: DENSE_CAP } if m == n
        ));
    }
}
