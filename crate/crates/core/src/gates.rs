//! Fixed-size 2×2 gate algebra. Rotations follow R_a(φ) = exp(i·a·σ·φ/2).

use crate::numerics::{c64, cis, ComplexMatrix, ONE, ZERO};
use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];

pub const ID2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];
pub const X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
pub const Z: Mat2 = [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]];

pub fn h() -> Mat2 {
    let s = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[s, s], [s, -s]]
}

pub fn rz(phi: f64) -> Mat2 {
    [[cis(phi / 2.0), ZERO], [ZERO, cis(-phi / 2.0)]]
}

pub fn ry(phi: f64) -> Mat2 {
    let (s, c) = (phi / 2.0).sin_cos();
    [[c64(c, 0.0), c64(s, 0.0)], [c64(-s, 0.0), c64(c, 0.0)]]
}

pub fn rx(phi: f64) -> Mat2 {
    let (s, c) = (phi / 2.0).sin_cos();
    [[c64(c, 0.0), c64(0.0, s)], [c64(0.0, s), c64(c, 0.0)]]
}

pub fn phase_diag(a: Complex64, b: Complex64) -> Mat2 {
    [[a, ZERO], [ZERO, b]]
}

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn scale(a: &Mat2, s: Complex64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn det(a: &Mat2) -> Complex64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn to_matrix(a: &Mat2) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
}

pub fn from_matrix(m: &ComplexMatrix) -> Mat2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

pub fn dist(a: &Mat2, b: &Mat2) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += (a[i][j] - b[i][j]).norm_sqr();
        }
    }
    s.sqrt()
}

pub fn unitarity_residual(a: &Mat2) -> f64 {
    dist(&mul(&adjoint(a), a), &ID2)
}

/// u3(θ, φ, λ) in the OpenQASM convention.
pub fn u3(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [c64(c, 0.0), -cis(lambda) * s],
        [cis(phi) * s, cis(phi + lambda) * c],
    ]
}

/// ZYZ Euler angles: returns (α, θ, φ, λ) with U = e^{iα}·u3(θ, φ, λ).
pub fn zyz(u: &Mat2) -> (f64, f64, f64, f64) {
    let (a, b) = (u[0][0].norm(), u[1][0].norm());
    let theta = 2.0 * b.atan2(a);
    let eps = 1e-12;
    if b < eps {
        let alpha = u[0][0].arg();
        (alpha, theta, 0.0, u[1][1].arg() - alpha)
    } else if a < eps {
        let alpha = (-u[0][1]).arg();
        (alpha, theta, u[1][0].arg() - alpha, 0.0)
    } else {
        let alpha = u[0][0].arg();
        (alpha, theta, u[1][0].arg() - alpha, (-u[0][1]).arg() - alpha)
    }
}
