//! Closed-form spectra of the two parity blocks at N = 2.
//!
//! At zero bias each 3×3 block reduces, in units of the strain E, to the
//! depressed cubic
//!
//! ```text
//! y³ − 12·C·y + 16·A = 0,      y = (6/E)(λ − D/2) − d,
//! A = −27γ²(1+α²) + d³ − 9(1 − 2γ²α)·d,
//! C = 3(1 + 4γ²α) + d²,
//! ```
//!
//! with d = d₋ for the even block and d = d₊ for the odd one, γ = g/E. The
//! combination B = A² − C³ is real and changes sign exactly where a
//! complex-conjugate eigenvalue pair opens: B < 0 gives three real roots,
//! B > 0 one real root plus a conjugate pair, and B = 0 (with C ≠ 0) is the
//! two-fold coalescence — the exceptional point. This makes B the natural
//! bisection target for EP location, independent of any eigensolver.

use num_complex::Complex64 as C64;

use crate::basis::Parity;
use crate::params::ModelParams;
use crate::{Error, Result};

/// Reduced-cubic data for one parity block.
#[derive(Debug, Clone, Copy)]
pub struct CubicCoeffs {
    /// Block offset d₋ (even) or d₊ (odd).
    pub d: f64,
    pub a: f64,
    pub c: f64,
    /// Discriminant combination B = A² − C³.
    pub b: f64,
}

fn require_n2_zero_bias(params: &ModelParams) -> Result<()> {
    if params.ensemble_size_n != 2 {
        return Err(Error::Invalid(format!(
            "closed-form block spectra exist for N = 2 only, got N = {}",
            params.ensemble_size_n
        )));
    }
    if params.epsilon != 0.0 {
        return Err(Error::Invalid(
            "closed-form block spectra require zero bias (parity blocks)".into(),
        ));
    }
    Ok(())
}

/// Cubic coefficients of one parity block.
pub fn cubic_coeffs(params: &ModelParams, parity: Parity) -> Result<CubicCoeffs> {
    require_n2_zero_bias(params)?;
    let der = params.derived()?;
    let d = match parity {
        Parity::Even => der.d_minus,
        Parity::Odd => der.d_plus,
    };
    let (gamma, alpha) = (der.gamma, params.asymmetry_alpha);
    let g2 = gamma * gamma;
    let a = -27.0 * g2 * (1.0 + alpha * alpha) + d.powi(3) - 9.0 * (1.0 - 2.0 * g2 * alpha) * d;
    let c = 3.0 * (1.0 + 4.0 * g2 * alpha) + d * d;
    Ok(CubicCoeffs { d, a, c, b: a * a - c.powi(3) })
}

/// The discriminant combination B = A² − C³ for one block; its sign change
/// along an α sweep brackets an exceptional point.
pub fn discriminant(params: &ModelParams, parity: Parity) -> Result<f64> {
    Ok(cubic_coeffs(params, parity)?.b)
}

/// Roots of y³ − 12Cy + 16A = 0, deterministic order (sorted by (re, im)).
fn cubic_roots(co: &CubicCoeffs) -> [C64; 3] {
    let (a, c, b) = (co.a, co.c, co.b);
    let mut roots = if b < 0.0 {
        // Three real roots; B < 0 forces C > 0. Trigonometric form keeps them
        // exactly real (no complex-arithmetic residue).
        let sqrt_c = c.sqrt();
        let arg = (-a / (c * sqrt_c)).clamp(-1.0, 1.0);
        let phi = arg.acos();
        core::array::from_fn(|k| {
            let y = 4.0 * sqrt_c * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
            C64::new(y, 0.0)
        })
    } else {
        // One real root plus a conjugate pair (degenerate at B = 0).
        let r3 = a + b.sqrt();
        let r = r3.cbrt();
        if r == 0.0 {
            // A + √B = 0 forces C = 0: the cubic is y³ = −16A.
            let y = (-16.0 * a).cbrt();
            let om = C64::new(-0.5, 0.75f64.sqrt());
            [C64::new(y, 0.0), om * y, om.conj() * y]
        } else {
            let sum = c / r + r;
            let dif = 3f64.sqrt() * (c / r - r);
            [
                C64::new(-2.0 * sum, 0.0),
                C64::new(sum, -dif),
                C64::new(sum, dif),
            ]
        }
    };
    roots.sort_by(|x, y| (x.re, x.im).partial_cmp(&(y.re, y.im)).unwrap());
    roots
}

/// Closed-form eigenvalues of one parity block [GHz], sorted by (re, im).
pub fn analytic_block_spectrum(params: &ModelParams, parity: Parity) -> Result<[C64; 3]> {
    let co = cubic_coeffs(params, parity)?;
    let (d_zfs, e) = (params.zero_field_d, params.strain_e);
    let mut out = cubic_roots(&co)
        .map(|y| C64::new(d_zfs / 2.0, 0.0) + (y + co.d) * (e / 6.0));
    out.sort_by(|x, y| (x.re, x.im).partial_cmp(&(y.re, y.im)).unwrap());
    out
        .iter()
        .all(|v| v.re.is_finite() && v.im.is_finite())
        .then_some(out)
        .ok_or_else(|| Error::Numerical("non-finite cubic root".into()))
}
