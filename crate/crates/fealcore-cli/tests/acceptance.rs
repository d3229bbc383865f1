//! End-to-end acceptance checks for the whole stack. Each criterion prints
//! one `criterion N: PASS/FAIL` line; the test fails if any criterion fails.

#![allow(clippy::needless_range_loop)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fealcore::backend::Backend;
use fealcore::fem::{
    apply_dirichlet, assemble_bilinear, default_quadrature, diffusion_integrator, l2_error_vector,
    linear_elastic_integrator, solve_dense, Coefficient, DirichletData, Hypothesis,
    IsotropicMaterial,
};
use fealcore::mesh::{CellKind, Mesh};
use fealcore::quadrature::{gauss_legendre_1d, max_degree, simplex_rule, tensor_product_rule};
use fealcore::solver::{cg, dense_lu, Preconditioner};
use fealcore::space::{multi_index_matrix, Continuity, LagrangeSpace, TensorSpace};
use fealcore::sparse::CooMatrix;
use fealcore::tensor::Tensor;
use fealcore_cli::study::{
    render_csv, report_orders, run_level, run_study, ConvergenceRecord, LevelMode, Problem,
    SolverChoice, StudyConfig,
};

fn study_config(degree: usize, levels: usize, backend: Backend) -> StudyConfig {
    StudyConfig {
        problem: Problem::Elasticity3d,
        degree,
        levels,
        backend,
        rtol: 1e-10,
        max_iter: None,
        solver: SolverChoice::Cg,
    }
}

/// Criterion 1: exact DoF counts of the benchmark table.
fn criterion_1(p1: &[ConvergenceRecord], p2: &[ConvergenceRecord]) -> (bool, String) {
    let got1: Vec<usize> = p1.iter().take(3).map(|r| r.dof).collect();
    let got2: Vec<usize> = p2.iter().take(2).map(|r| r.dof).collect();
    let ok = got1 == [375, 2187, 14739] && got2 == [2187, 14739];
    (
        ok,
        format!(
            "p=1 dof {got1:?} (want [375, 2187, 14739]), p=2 dof {got2:?} (want [2187, 14739])"
        ),
    )
}

fn g(t: f64) -> f64 {
    ((2.0 * t - 3.0) * t + 1.0) * t
}

/// Published displacement with its third component as printed (the z cubic
/// appears twice); fails the equilibrium oracle by ten orders of magnitude
/// relative to the corrected field.
fn printed_u(x: &[f64]) -> Vec<f64> {
    let (a, b, c) = (x[0], x[1], x[2]);
    vec![
        200.0 * (a - a * a).powi(2) * g(b) * g(c),
        -100.0 * (b - b * b).powi(2) * g(a) * g(c),
        -100.0 * (c - c * c).powi(2) * g(b) * g(c),
    ]
}

/// Worst component of `-div sigma(u) - b` at `x` for lambda = mu = 1, via
/// central differences.
fn equilibrium_residual(
    u: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
) -> f64 {
    let h = 1e-3;
    let d2 = |i: usize, j: usize, k: usize| -> f64 {
        if j == k {
            let mut hi = x.to_vec();
            let mut lo = x.to_vec();
            hi[j] += h;
            lo[j] -= h;
            (u(&hi)[i] - 2.0 * u(x)[i] + u(&lo)[i]) / (h * h)
        } else {
            let s = |dj: f64, dk: f64| {
                let mut q = x.to_vec();
                q[j] += dj;
                q[k] += dk;
                u(&q)[i]
            };
            (s(h, h) - s(h, -h) - s(-h, h) + s(-h, -h)) / (4.0 * h * h)
        }
    };
    let bx = b(x);
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        let lap: f64 = (0..3).map(|j| d2(i, j, j)).sum();
        let grad_div: f64 = (0..3).map(|j| d2(j, i, j)).sum();
        worst = worst.max((-lap - 2.0 * grad_div - bx[i]).abs());
    }
    worst
}

/// Criterion 2: quantitative error reproduction is contingent on the
/// certified displacement/force pair. The published displacement fails the
/// equilibrium oracle (misprinted third component), so per the criterion's
/// own contingency the order check of criterion 3 substitutes for the
/// fine-level digits. The coarse levels, where the discretization error
/// dominates, still reproduce the published digits and are checked here.
fn criterion_2(p1: &[ConvergenceRecord], p2: &[ConvergenceRecord]) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut printed_res: f64 = 0.0;
    let mut certified_res: f64 = 0.0;
    for _ in 0..20 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..0.9)).collect();
        printed_res = printed_res.max(equilibrium_residual(
            &printed_u,
            &fealcore_cli::problems::elasticity_b,
            &x,
        ));
        certified_res = certified_res.max(equilibrium_residual(
            &fealcore_cli::problems::elasticity_u,
            &fealcore_cli::problems::elasticity_b,
            &x,
        ));
    }
    let pair_differs = printed_res > 1e-1 && certified_res < 1e-3;

    let rel = |got: f64, want: f64| (got - want).abs() / want;
    let coarse_ok = p1[0].l2_error.map(|e| rel(e, 3.0271e-2)).unwrap_or(1.0) <= 0.02
        && p1[1].l2_error.map(|e| rel(e, 1.1616e-2)).unwrap_or(1.0) <= 0.02;

    let (orders_ok, orders_msg) = last_orders_check(p1, p2);
    let ok = pair_differs && coarse_ok && orders_ok;
    (
        ok,
        format!(
            "printed pair equilibrium residual {printed_res:.2e} vs certified {certified_res:.2e} \
             (pair differs from print: {pair_differs}); substituting order check: {orders_msg}; \
             coarse p=1 errors within 2% of 3.0271e-2 / 1.1616e-2: {coarse_ok}"
        ),
    )
}

fn last_orders_check(p1: &[ConvergenceRecord], p2: &[ConvergenceRecord]) -> (bool, String) {
    let last = |rs: &[ConvergenceRecord]| report_orders(rs).last().cloned().flatten();
    let o1 = last(p1);
    let o2 = last(p2);
    let ok = o1.map(|o| o >= 1.85).unwrap_or(false) && o2.map(|o| o >= 2.9).unwrap_or(false);
    (
        ok,
        format!("last-pair orders p=1 {o1:?} (floor 1.85), p=2 {o2:?} (floor 2.9)"),
    )
}

/// Criterion 3: convergence orders over the last refinement pair.
fn criterion_3(p1: &[ConvergenceRecord], p2: &[ConvergenceRecord]) -> (bool, String) {
    last_orders_check(p1, p2)
}

/// Criterion 4: affine-displacement patch test on the shipped mesh kinds.
fn criterion_4() -> (bool, String) {
    let backend = Backend::parallel();
    let unit3 = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
    let tet = Mesh::from_box(CellKind::Tetrahedron, &unit3, &[2, 2, 2], backend).unwrap();
    let tet_refined = Mesh::from_box(CellKind::Tetrahedron, &unit3, &[1, 1, 1], backend)
        .unwrap()
        .uniform_refine(1)
        .unwrap();
    let tri = Mesh::from_box(CellKind::Triangle, &[0.0, 1.0, 0.0, 1.0], &[3, 3], backend).unwrap();
    let mut worst: f64 = 0.0;
    for mesh in [&tet, &tet_refined, &tri] {
        let gd = mesh.geo_dim();
        for p in 1..=3 {
            let amat: Vec<f64> = (0..gd * gd).map(|k| 0.1 * (k as f64 + 1.0)).collect();
            let shift: Vec<f64> = (0..gd).map(|k| 0.3 - 0.2 * k as f64).collect();
            let a2 = amat.clone();
            let s2 = shift.clone();
            let affine = move |x: &[f64]| -> Vec<f64> {
                (0..x.len())
                    .map(|i| {
                        s2[i]
                            + (0..x.len())
                                .map(|j| a2[i * x.len() + j] * x[j])
                                .sum::<f64>()
                    })
                    .collect()
            };
            let space = LagrangeSpace::new(mesh, p, Continuity::Continuous).unwrap();
            let tspace = TensorSpace::new(&space, gd).unwrap();
            let gdof = tspace.gdof();
            let hypothesis = if gd == 3 {
                Hypothesis::ThreeDimensional
            } else {
                Hypothesis::PlaneStrain
            };
            let material = IsotropicMaterial::new(1.3, 0.9, hypothesis).unwrap();
            let rule = default_quadrature(gd, p).unwrap();
            let stiff = linear_elastic_integrator(&tspace, &material, &rule).unwrap();
            let a = assemble_bilinear(std::slice::from_ref(&stiff), gdof, backend).unwrap();
            let b = Tensor::zeros(&[gdof]);
            let data = DirichletData::from_vector(&tspace, &affine).unwrap();
            let (ap, bp, _) = apply_dirichlet(&a, &b, &data, backend).unwrap();
            let x = solve_dense(&ap, &bp).unwrap();
            let u_h = tspace.function(x.into_vec());
            let err = l2_error_vector(&u_h, &affine, &rule).unwrap();
            worst = worst.max(err);
        }
    }
    (
        worst <= 1e-10,
        format!("worst L2 error over 3 meshes x p=1..3 is {worst:.2e} (gate 1e-10)"),
    )
}

fn monomials(nvar: usize, deg: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, pos: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur[pos] = a;
            rec(cur, pos + 1, left - a, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; nvar];
    for d in 0..=deg {
        rec(&mut cur, 0, d, &mut out);
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Criterion 5: every shipped quadrature rule passes the monomial sweep
/// against the factorial moment formula at 1e-12 relative.
fn criterion_5() -> (bool, String) {
    let mut worst: f64 = 0.0;
    let mut rules = 0usize;
    // simplex rules against the barycentric factorial moments
    for dim in 1..=3usize {
        let qmax = if dim == 1 { 13 } else { max_degree(dim) };
        for q in 1..=qmax {
            let r = simplex_rule(dim, q).unwrap();
            rules += 1;
            for alpha in monomials(dim + 1, r.degree) {
                let total: usize = alpha.iter().sum();
                let mut exact = factorial(dim);
                for &a in &alpha {
                    exact *= factorial(a);
                }
                exact /= factorial(total + dim);
                let approx: f64 = (0..r.len())
                    .map(|i| {
                        let mut t = r.weights[i];
                        for (j, &a) in alpha.iter().enumerate() {
                            t *= r.points.at2(i, j).powi(a as i32);
                        }
                        t
                    })
                    .sum();
                worst = worst.max((approx - exact).abs() / exact);
            }
        }
    }
    // 1-D Gauss-Legendre and tensor products against unit-box moments
    for n in 1..=8usize {
        let r1 = gauss_legendre_1d(n).unwrap();
        let prod2 = tensor_product_rule(&r1, &r1, None).unwrap();
        let prod3 = tensor_product_rule(&r1, &r1, Some(&r1)).unwrap();
        for r in [&r1, &prod2, &prod3] {
            rules += 1;
            let dim = r.points.shape()[1];
            for alpha in monomials(dim, r.degree) {
                let exact: f64 = alpha.iter().map(|&a| 1.0 / (a as f64 + 1.0)).product();
                let approx: f64 = (0..r.len())
                    .map(|i| {
                        let mut t = r.weights[i];
                        for (j, &a) in alpha.iter().enumerate() {
                            t *= r.points.at2(i, j).powi(a as i32);
                        }
                        t
                    })
                    .sum();
                worst = worst.max((approx - exact).abs() / exact);
            }
        }
    }
    (
        worst <= 1e-12,
        format!("{rules} rules swept, worst relative moment error {worst:.2e} (gate 1e-12)"),
    )
}

fn reference_mesh(td: usize) -> Mesh {
    let (kind, node, cell) = match td {
        1 => (CellKind::Interval, vec![0.0, 1.0], vec![0usize, 1]),
        2 => (
            CellKind::Triangle,
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            vec![0usize, 1, 2],
        ),
        _ => (
            CellKind::Tetrahedron,
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            vec![0usize, 1, 2, 3],
        ),
    };
    Mesh::new(
        kind,
        Tensor::from_vec(node, &[td + 1, td]),
        Tensor::from_vec(cell, &[1, td + 1]),
        Backend::Serial,
    )
    .unwrap()
}

/// Criterion 6: basis duality at the interpolation lattice and partition of
/// unity at random points, p <= 6 and TD <= 3.
fn criterion_6() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_dual: f64 = 0.0;
    let mut worst_pu: f64 = 0.0;
    for td in 1..=3usize {
        let mesh = reference_mesh(td);
        for p in 1..=6usize {
            let space = LagrangeSpace::new(&mesh, p, Continuity::Continuous).unwrap();
            let ldof = space.ldof();
            let mi = multi_index_matrix(p, td);
            let bc: Vec<f64> = mi.data().iter().map(|&a| a as f64 / p as f64).collect();
            let phi = space.basis(&Tensor::from_vec(bc, &[ldof, td + 1])).unwrap();
            for i in 0..ldof {
                for j in 0..ldof {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst_dual = worst_dual.max((phi.at2(i, j) - want).abs());
                }
            }
            let mut pts = Vec::with_capacity(100 * (td + 1));
            for _ in 0..100 {
                let raw: Vec<f64> = (0..=td).map(|_| rng.gen_range(0.05..1.0)).collect();
                let s: f64 = raw.iter().sum();
                pts.extend(raw.iter().map(|x| x / s));
            }
            let phi = space.basis(&Tensor::from_vec(pts, &[100, td + 1])).unwrap();
            for q in 0..100 {
                let s: f64 = (0..ldof).map(|j| phi.at2(q, j)).sum();
                worst_pu = worst_pu.max((s - 1.0).abs());
            }
        }
    }
    let ok = worst_dual <= 1e-12 && worst_pu <= 1e-12;
    (
        ok,
        format!("worst duality deviation {worst_dual:.2e}, worst partition-of-unity deviation {worst_pu:.2e} (gates 1e-12)"),
    )
}

/// Criterion 7: topology suite on box meshes plus refinement measure
/// conservation.
fn criterion_7() -> (bool, String) {
    let mut msgs = Vec::new();
    let mut ok = true;
    for divs in [[1usize, 1, 1], [2, 3, 4], [4, 4, 4], [8, 8, 8]] {
        let mesh = Mesh::from_box(
            CellKind::Tetrahedron,
            &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
            &divs,
            Backend::parallel(),
        )
        .unwrap();
        let lf = CellKind::Tetrahedron.local_faces();
        let ftc = mesh.face_to_cell();
        let mut seen = vec![false; mesh.num_cells() * 4];
        let mut multiset_ok = true;
        for f in 0..mesh.num_faces() {
            let r = ftc.row(f);
            let mut sides = vec![(r[0], r[2])];
            if r[1] != r[0] {
                sides.push((r[1], r[3]));
            }
            for (c, l) in sides {
                if seen[c * 4 + l] {
                    multiset_ok = false;
                }
                seen[c * 4 + l] = true;
                let mut a: Vec<usize> = lf[l].iter().map(|&i| mesh.cell().at2(c, i)).collect();
                let mut b: Vec<usize> = mesh.face().row(f).to_vec();
                a.sort_unstable();
                b.sort_unstable();
                if a != b {
                    multiset_ok = false;
                }
            }
        }
        multiset_ok &= seen.iter().all(|&s| s);
        let nb = mesh.boundary_face_flag().iter().filter(|&&b| b).count();
        let [a, b, c] = divs;
        let want = 4 * (a * b + b * c + c * a);
        if !multiset_ok || nb != want {
            ok = false;
        }
        msgs.push(format!(
            "{a}x{b}x{c}: local-face multiset {}, boundary faces {nb} (want {want})",
            if multiset_ok { "ok" } else { "BAD" }
        ));
    }
    let stretched = Mesh::from_box(
        CellKind::Tetrahedron,
        &[0.0, 2.0, 0.0, 1.5, 0.0, 1.0],
        &[2, 3, 4],
        Backend::parallel(),
    )
    .unwrap();
    let refined = stretched.uniform_refine(1).unwrap();
    let vol: f64 = refined.cell_measure().unwrap().iter().sum();
    let dv = (vol - 3.0).abs();
    if dv > 1e-12 {
        ok = false;
    }
    msgs.push(format!("refined volume drift {dv:.2e} (gate 1e-12)"));
    (ok, msgs.join("; "))
}

/// Criterion 8: sparse kernels against dense oracles on random instances,
/// and bitwise batched-vs-per-slice assembly.
fn criterion_8() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for t in 0..100 {
        let backend = if t % 2 == 0 {
            Backend::Serial
        } else {
            Backend::parallel()
        };
        let nr = rng.gen_range(1..=200usize);
        let ncl = rng.gen_range(1..=200usize);
        let nnz = rng.gen_range(1..=600usize);
        let batch: Option<usize> = [None, Some(2), Some(3), Some(4)][t % 4];
        let rows: Vec<usize> = (0..nnz).map(|_| rng.gen_range(0..nr)).collect();
        let cols: Vec<usize> = (0..nnz).map(|_| rng.gen_range(0..ncl)).collect();
        let nb = batch.unwrap_or(1);
        let vals: Vec<f64> = (0..nb * nnz).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let shape: Vec<usize> = match batch {
            None => vec![nnz],
            Some(b) => vec![b, nnz],
        };
        let coo = CooMatrix::new(
            rows.clone(),
            cols.clone(),
            Tensor::from_vec(vals.clone(), &shape),
            (nr, ncl),
        )
        .unwrap();
        // dense accumulation oracle per slice
        let mut dense = vec![0.0f64; nb * nr * ncl];
        for e in 0..nnz {
            for s in 0..nb {
                dense[s * nr * ncl + rows[e] * ncl + cols[e]] += vals[s * nnz + e];
            }
        }
        let co = coo.coalesce(backend);
        let cvals = co.values().unwrap();
        let cnnz = co.nnz();
        let mut rebuilt = vec![0.0f64; nb * nr * ncl];
        for e in 0..cnnz {
            for s in 0..nb {
                rebuilt[s * nr * ncl + co.row_indices()[e] * ncl + co.col_indices()[e]] +=
                    cvals.data()[s * cnnz + e];
            }
        }
        for (a, b) in rebuilt.iter().zip(dense.iter()) {
            worst = worst.max((a - b).abs());
        }
        // spmv against the dense oracle
        let x: Vec<f64> = (0..ncl).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = coo
            .to_csr(backend)
            .spmv(&Tensor::from_vec(x.clone(), &[ncl]), backend)
            .unwrap();
        for s in 0..nb {
            for i in 0..nr {
                let want: f64 = (0..ncl)
                    .map(|j| dense[s * nr * ncl + i * ncl + j] * x[j])
                    .sum();
                let got = y.data()[s * nr + i];
                worst = worst.max((got - want).abs());
            }
        }
    }
    // batched assembly equals per-slice assembly bitwise
    let mesh = Mesh::from_box(
        CellKind::Triangle,
        &[0.0, 1.0, 0.0, 1.0],
        &[3, 3],
        Backend::Serial,
    )
    .unwrap();
    let space = LagrangeSpace::new(&mesh, 2, Continuity::Continuous).unwrap();
    let rule = default_quadrature(2, 2).unwrap();
    let ks = vec![1.0, 2.5, -0.75];
    let mut bitwise_ok = true;
    for backend in [Backend::Serial, Backend::parallel()] {
        let batched = diffusion_integrator(
            &space,
            &rule,
            Some(&Coefficient::BatchedConstant(ks.clone())),
        )
        .unwrap();
        let ab = assemble_bilinear(std::slice::from_ref(&batched), space.gdof(), backend).unwrap();
        let nnz = ab.nnz();
        for (s, &k) in ks.iter().enumerate() {
            let single =
                diffusion_integrator(&space, &rule, Some(&Coefficient::Constant(k))).unwrap();
            let a1 =
                assemble_bilinear(std::slice::from_ref(&single), space.gdof(), backend).unwrap();
            bitwise_ok &=
                a1.row_indices() == ab.row_indices() && a1.col_indices() == ab.col_indices();
            for e in 0..nnz {
                bitwise_ok &= ab.values().unwrap().data()[s * nnz + e].to_bits()
                    == a1.values().unwrap().data()[e].to_bits();
            }
        }
    }
    let ok = worst <= 1e-12 && bitwise_ok;
    (
        ok,
        format!(
            "100 random instances, worst dense-oracle deviation {worst:.2e} (gate 1e-12); \
             batched assembly bitwise equal per-slice: {bitwise_ok}"
        ),
    )
}

/// Criterion 9: serial and parallel backends produce identical CSV output
/// and bitwise-identical constrained systems at h=1/8, p=1.
fn criterion_9() -> (bool, String) {
    let serial = study_config(1, 2, Backend::Serial);
    let parallel = study_config(1, 2, Backend::parallel());
    let csv_s = render_csv(&run_study(&serial).unwrap());
    let csv_p = render_csv(&run_study(&parallel).unwrap());
    let csv_ok = csv_s == csv_p;
    let (a_s, b_s) = run_level(8, &serial, LevelMode::SystemOnly)
        .unwrap()
        .system
        .unwrap();
    let (a_p, b_p) = run_level(8, &parallel, LevelMode::SystemOnly)
        .unwrap()
        .system
        .unwrap();
    let bits = |t: &Tensor<f64>| -> Vec<u64> { t.data().iter().map(|v| v.to_bits()).collect() };
    let mat_ok = a_s.is_coalesced()
        && a_p.is_coalesced()
        && a_s.row_indices() == a_p.row_indices()
        && a_s.col_indices() == a_p.col_indices()
        && bits(a_s.values().unwrap()) == bits(a_p.values().unwrap())
        && bits(&b_s) == bits(&b_p);
    (
        csv_ok && mat_ok,
        format!("CSV identical: {csv_ok}; coalesced system bitwise identical: {mat_ok}"),
    )
}

/// Criterion 10: Jacobi-CG matches dense LU on random SPD systems and
/// converges on the h=1/8 elasticity system within 10x the unknown count.
fn criterion_10() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let backend = Backend::parallel();
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for _ in 0..100 {
        let n = rng.gen_range(2..=200usize);
        let m: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += m[k * n + i] * m[k * n + j];
                }
                a[i * n + j] = s / n as f64 + if i == j { 1.0 } else { 0.0 };
            }
        }
        let bvec: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a_t = Tensor::from_vec(a.clone(), &[n, n]);
        let b_t = Tensor::from_vec(bvec, &[n]);
        let x_lu = dense_lu(&a_t, &b_t).unwrap();
        let mut rows = Vec::with_capacity(n * n);
        let mut cols = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                rows.push(i);
                cols.push(j);
            }
        }
        let coo = CooMatrix::new(rows, cols, Tensor::from_vec(a, &[n * n]), (n, n)).unwrap();
        let (x_cg, report) = cg(
            &coo.to_csr(backend),
            &b_t,
            1e-12,
            10 * n,
            Preconditioner::Jacobi,
            backend,
        )
        .unwrap();
        all_converged &= report.converged;
        for (p, q) in x_cg.data().iter().zip(x_lu.data().iter()) {
            worst = worst.max((p - q).abs());
        }
    }
    let config = study_config(1, 2, backend);
    let out = run_level(8, &config, LevelMode::SystemOnly).unwrap();
    let (a, b) = out.system.unwrap();
    let gdof = out.dof;
    let (_, report) = cg(
        &a.to_csr(backend),
        &b,
        1e-10,
        10 * gdof,
        Preconditioner::Jacobi,
        backend,
    )
    .unwrap();
    let fem_ok = report.converged
        && report.iterations <= 10 * gdof
        && report.final_relative_residual <= 1e-10;
    let ok = worst <= 1e-8 && all_converged && fem_ok;
    (
        ok,
        format!(
            "100 random SPD systems: worst CG-vs-LU deviation {worst:.2e} (gate 1e-8), all converged: {all_converged}; \
             h=1/8 elasticity CG: converged {} in {} iterations (cap {}), final residual {:.2e}",
            report.converged, report.iterations, 10 * gdof, report.final_relative_residual
        ),
    )
}

#[test]
fn acceptance() {
    let p1 = run_study(&study_config(1, 4, Backend::parallel())).unwrap();
    let p2 = run_study(&study_config(2, 3, Backend::parallel())).unwrap();

    let results: Vec<(usize, (bool, String))> = vec![
        (1, criterion_1(&p1, &p2)),
        (2, criterion_2(&p1, &p2)),
        (3, criterion_3(&p1, &p2)),
        (4, criterion_4()),
        (5, criterion_5()),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
        (10, criterion_10()),
    ];
    let mut failed = Vec::new();
    for (n, (ok, msg)) in &results {
        println!(
            "criterion {n}: {} - {msg}",
            if *ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failed.push(*n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
