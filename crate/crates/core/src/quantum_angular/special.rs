//! Spherical harmonics, Legendre polynomials and Gauss–Legendre quadrature.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Normalized associated Legendre functions `N_j^m P_j^m(cos theta)` with
/// the Condon–Shortley phase, for fixed `m >= 0` and `j = m..=j_max`.
fn normalized_assoc_legendre(m: usize, j_max: usize, x: f64) -> Vec<f64> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        pmm *= -s * ((2 * k + 1) as f64 / (2 * k) as f64).sqrt();
    }
    let mut out = vec![0.0; j_max + 1];
    if m > j_max {
        return out;
    }
    out[m] = pmm;
    if m + 1 <= j_max {
        out[m + 1] = x * ((2 * m + 3) as f64).sqrt() * pmm;
    }
    let mf = m as f64;
    for l in m + 2..=j_max {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        out[l] = a * (x * out[l - 1] - b * out[l - 2]);
    }
    out
}

/// Orthonormal `Y^{j,m}(theta, phi)` with the Condon–Shortley phase.
pub fn spherical_harmonic(j: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() as usize > j {
        return Err(Error::InvalidInput(format!("|m| = {} exceeds j = {j}", m.abs())));
    }
    let am = m.unsigned_abs() as usize;
    let p = normalized_assoc_legendre(am, j, theta.cos())[j];
    let y = Complex64::from_polar(p, am as f64 * phi);
    Ok(if m < 0 {
        let sign = if am % 2 == 0 { 1.0 } else { -1.0 };
        y.conj() * sign
    } else {
        y
    })
}

/// `P_0(x), ..., P_n(x)`.
pub fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for j in 2..=n {
        let jf = j as f64;
        p[j] = ((2.0 * jf - 1.0) * x * p[j - 1] - (jf - 1.0) * p[j - 2]) / jf;
    }
    p
}

pub fn legendre(n: usize, x: f64) -> f64 {
    legendre_all(n, x)[n]
}

/// `sqrt((2j+1)/2) P_j(x)`, orthonormal on `[-1, 1]`.
pub fn legendre_orthonormal_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = legendre_all(n, x);
    for (j, v) in p.iter_mut().enumerate() {
        *v *= ((2 * j + 1) as f64 / 2.0).sqrt();
    }
    p
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes in descending
/// order (ascending polar angle).
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one node".into()));
    }
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n {
        let mut z = (PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let p = legendre_all(n, z);
            let dp = nf * (z * p[n] - p[n - 1]) / (z * z - 1.0);
            let dz = p[n] / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let p = legendre_all(n, z);
        let dp = nf * (z * p[n] - p[n - 1]) / (z * z - 1.0);
        x[k] = z;
        w[k] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    Ok((x, w))
}

/// Collocation differentiation matrix on the Gauss–Legendre nodes `x`
/// (weights `w`): exact for polynomials of degree below `x.len()`.
pub fn differentiation_matrix(x: &[f64], w: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let lam: Vec<f64> = (0..n)
        .map(|k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            s * ((1.0 - x[k] * x[k]) * w[k]).sqrt()
        })
        .collect();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = lam[j] / lam[i] / (x[i] - x[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// `cos gamma` between directions `(theta_b, phi_b)` and `(theta_c, phi_c)`.
pub fn cos_relative_angle(theta_b: f64, phi_b: f64, theta_c: f64, phi_c: f64) -> f64 {
    theta_b.cos() * theta_c.cos() + theta_b.sin() * theta_c.sin() * (phi_b - phi_c).cos()
}

/// Both sides of the addition theorem
/// `sum_m (-1)^m / sqrt(2j+1) Y^{j,-m}(B) Y^{j,m}(C) = sqrt(2j+1)/(4 pi) P_j(cos gamma)`
/// and their distance.
pub fn legendre_addition_check(
    j: usize,
    theta_b: f64,
    phi_b: f64,
    theta_c: f64,
    phi_c: f64,
) -> Result<(Complex64, f64, f64)> {
    let jj = j as i64;
    let norm = ((2 * j + 1) as f64).sqrt();
    let mut lhs = Complex64::new(0.0, 0.0);
    for m in -jj..=jj {
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        lhs += spherical_harmonic(j, -m, theta_b, phi_b)? * spherical_harmonic(j, m, theta_c, phi_c)? * (sign / norm);
    }
    let rhs = norm / (4.0 * PI) * legendre(j, cos_relative_angle(theta_b, phi_b, theta_c, phi_c));
    Ok((lhs, rhs, (lhs - rhs).norm()))
}
