//! Generic two-qubit density-matrix routines.
//!
//! These work on any 4×4 state and know nothing about the end-pair
//! structure, so they serve as the independent route for the closed forms
//! in [`crate::measures`]. Qubit order: index `2a + b`, `a` the first spin.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

pub type Matrix2c = Matrix2<Complex64>;
pub type Matrix4c = Matrix4<Complex64>;

/// Eigenvalues below this are treated as exact zeros.
const ZERO_EIGENVALUE: f64 = 1e-13;

/// Tolerance for clipping eigenvalues into `[0, 1]` before taking logs.
pub const CLIP_TOL: f64 = 1e-12;

/// `−x log₂ x` with `0 log 0 = 0`.
pub fn eta(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

fn clip_probability(x: f64) -> f64 {
    debug_assert!(x > -CLIP_TOL && x < 1.0 + CLIP_TOL, "eigenvalue {x} outside [0, 1]");
    x.clamp(0.0, 1.0)
}

/// Von Neumann entropy (base 2) of a 2×2 density matrix.
pub fn entropy2(rho: &Matrix2c) -> f64 {
    SymmetricEigen::new(*rho)
        .eigenvalues
        .iter()
        .map(|&x| eta(clip_probability(x)))
        .sum()
}

/// Von Neumann entropy (base 2) of a 4×4 density matrix.
pub fn entropy4(rho: &Matrix4c) -> f64 {
    SymmetricEigen::new(*rho)
        .eigenvalues
        .iter()
        .map(|&x| eta(clip_probability(x)))
        .sum()
}

/// Reduced state of the first qubit.
pub fn reduce_to_first(rho: &Matrix4c) -> Matrix2c {
    Matrix2c::from_fn(|a, a2| rho[(2 * a, 2 * a2)] + rho[(2 * a + 1, 2 * a2 + 1)])
}

/// Reduced state of the second qubit.
pub fn reduce_to_second(rho: &Matrix4c) -> Matrix2c {
    Matrix2c::from_fn(|b, b2| rho[(b, b2)] + rho[(2 + b, 2 + b2)])
}

pub fn mutual_information(rho: &Matrix4c) -> f64 {
    entropy2(&reduce_to_first(rho)) + entropy2(&reduce_to_second(rho)) - entropy4(rho)
}

/// Holevo quantity of a projective measurement on the second qubit along
/// the Bloch direction `(θ, φ)`.
pub fn holevo_chi(rho: &Matrix4c, theta: f64, phi: f64) -> f64 {
    let (half_s, half_c) = (theta / 2.0).sin_cos();
    let up = [Complex64::new(half_c, 0.0), Complex64::from_polar(half_s, phi)];
    let down = [-up[1].conj(), up[0].conj()];

    let mut chi = entropy2(&reduce_to_first(rho));
    for v in [up, down] {
        // ⟨v|_B ρ |v⟩_B as an operator on the first qubit.
        let cond = Matrix2c::from_fn(|a, a2| {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..2 {
                for b2 in 0..2 {
                    acc += v[b].conj() * rho[(2 * a + b, 2 * a2 + b2)] * v[b2];
                }
            }
            acc
        });
        let p = cond.trace().re;
        if p > 0.0 {
            chi -= p * entropy2(&(cond / Complex64::new(p, 0.0)));
        }
    }
    chi
}

/// `(σ^y ⊗ σ^y) ρ* (σ^y ⊗ σ^y)`.
pub fn spin_flip(rho: &Matrix4c) -> Matrix4c {
    let yy = yy();
    yy * rho.conjugate() * yy
}

fn yy() -> Matrix4c {
    let mut m = Matrix4c::zeros();
    m[(0, 3)] = Complex64::new(-1.0, 0.0);
    m[(1, 2)] = Complex64::new(1.0, 0.0);
    m[(2, 1)] = Complex64::new(1.0, 0.0);
    m[(3, 0)] = Complex64::new(-1.0, 0.0);
    m
}

fn hermitian_sqrt(rho: &Matrix4c) -> Matrix4c {
    let eig = SymmetricEigen::new(*rho);
    let roots = eig.eigenvalues.map(|x| {
        if x < ZERO_EIGENVALUE {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(x.sqrt(), 0.0)
        }
    });
    let v = &eig.eigenvectors;
    v * Matrix4c::from_diagonal(&roots) * v.adjoint()
}

/// Two-qubit concurrence from the spin-flip construction.
///
/// The `λ_i` (square roots of the eigenvalues of `ρρ̃`) are taken as the
/// singular values of `√ρ √ρ̃`, which avoids square roots of tiny, noisy
/// eigenvalues of the product.
pub fn concurrence(rho: &Matrix4c) -> f64 {
    let root = hermitian_sqrt(rho);
    let yy = yy();
    let flipped_root = yy * root.conjugate() * yy;
    let mut lambdas: Vec<f64> = (root * flipped_root).singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}
