//! Matrix exponential via scaling-and-squaring with Padé(13) approximation
//! (Higham 2005, SIAM J. Matrix Anal. Appl. 26(4), 1179).
//!
//! This is the propagator route that never looks at the spectrum, which makes
//! it the natural cross-check for the spectral/Jordan kernels near eigenvalue
//! coalescence.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::lu::Lu;
use crate::Result;

/// Padé(13,13) coefficients, Higham (2005) eq. (10.33), kept as the exact
/// integer values (the (V−U)⁻¹(V+U) ratio is invariant under the common b₀
/// normalization, and rounded decimal forms cost ~1e−12 of forward accuracy
/// near the scaling threshold).
const PADE_COEFFS: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// exp(A) for a square complex matrix.
pub fn matrix_exp(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix_exp requires a square matrix");
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    if n == 1 {
        let mut result = Array2::zeros((1, 1));
        result[[0, 0]] = a[[0, 0]].exp();
        return Ok(result);
    }

    // Scale so that ||A/2^s||_1 < theta_13 = 5.37 (Higham Table 10.2).
    let norm = matrix_1_norm(a);
    let theta_13: f64 = 5.37;
    let s = if norm > theta_13 { (norm / theta_13).log2().ceil() as u32 } else { 0 };
    let a_scaled = a * C64::new(1.0 / (1u64 << s) as f64, 0.0);

    let mut result = pade13(&a_scaled)?;
    for _ in 0..s {
        result = result.dot(&result);
    }
    Ok(result)
}

fn pade13(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    let eye = Array2::from_diag_elem(n, C64::new(1.0, 0.0));
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let w1 = &a6 * c(PADE_COEFFS[13]) + &a4 * c(PADE_COEFFS[11]) + &a2 * c(PADE_COEFFS[9]);
    let w2 = w1.dot(&a6)
        + &a6 * c(PADE_COEFFS[7])
        + &a4 * c(PADE_COEFFS[5])
        + &a2 * c(PADE_COEFFS[3])
        + &eye * c(PADE_COEFFS[1]);
    let u = a.dot(&w2);

    let v1 = &a6 * c(PADE_COEFFS[12]) + &a4 * c(PADE_COEFFS[10]) + &a2 * c(PADE_COEFFS[8]);
    let v = v1.dot(&a6)
        + &a6 * c(PADE_COEFFS[6])
        + &a4 * c(PADE_COEFFS[4])
        + &a2 * c(PADE_COEFFS[2])
        + &eye * c(PADE_COEFFS[0]);

    // exp(A) ≈ (V − U)⁻¹ (V + U).
    let numerator = &v + &u;
    let denominator = &v - &u;
    Ok(Lu::factor(&denominator)?.solve_mat(&numerator))
}

#[inline]
fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Max column sum of absolute values.
fn matrix_1_norm(a: &Array2<C64>) -> f64 {
    let mut max_sum = 0.0f64;
    for j in 0..a.ncols() {
        let mut col_sum = 0.0;
        for i in 0..a.nrows() {
            col_sum += a[[i, j]].norm();
        }
        max_sum = max_sum.max(col_sum);
    }
    max_sum
}
