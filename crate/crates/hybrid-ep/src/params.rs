//! Model parameters and the derived adimensional quantities used throughout.
//!
//! All energies are in GHz, times in ns, with ħ = 1 and no factors of 2π
//! (a splitting of 2.88 GHz means e^{-i 2.88 t} phase evolution at t in ns).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Physical parameters of the hybrid qubit + NV-ensemble model.
///
/// The ensemble of `ensemble_size_N` spins-1/2 is treated collectively as a
/// single spin S = N/2. `asymmetry_alpha` scales the lowering half of the
/// qubit–ensemble ladder coupling: α = 1 is the Hermitian point, α ≠ 1 makes
/// the Hamiltonian real-asymmetric (quasi-Hermitian).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Qubit energy bias ε [GHz].
    pub epsilon: f64,
    /// Qubit tunnel splitting Δ [GHz].
    pub delta: f64,
    /// NV zero-field splitting D [GHz].
    pub zero_field_d: f64,
    /// NV strain splitting E [GHz].
    pub strain_e: f64,
    /// Qubit–ensemble coupling g [GHz].
    pub coupling_g: f64,
    /// Ladder asymmetry α (dimensionless).
    pub asymmetry_alpha: f64,
    /// Number of NV spins N (≥ 1).
    pub ensemble_size_n: usize,
}

impl Default for ModelParams {
    /// The working point used through most of the analysis:
    /// D = 2.88, E = 0.026, g = 0.02, Δ = 2D, ε = 0, N = 2, α = 1.
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            delta: 2.0 * 2.88,
            zero_field_d: 2.88,
            strain_e: 0.026,
            coupling_g: 0.02,
            asymmetry_alpha: 1.0,
            ensemble_size_n: 2,
        }
    }
}

impl ModelParams {
    /// Same parameter set with a different asymmetry α (the main sweep knob).
    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { asymmetry_alpha: alpha, ..*self }
    }

    /// Same parameter set with a different ensemble size.
    pub fn with_n(&self, n: usize) -> Self {
        Self { ensemble_size_n: n, ..*self }
    }

    /// Collective spin quantum number S = N/2.
    pub fn spin_s(&self) -> f64 {
        self.ensemble_size_n as f64 / 2.0
    }

    /// Full product-space dimension 2(N+1).
    pub fn dim(&self) -> usize {
        2 * (self.ensemble_size_n + 1)
    }

    /// Qubit gap E_qb = √(ε² + Δ²).
    pub fn e_qb(&self) -> f64 {
        self.epsilon.hypot(self.delta)
    }

    /// Basic sanity of the raw fields (finiteness, N ≥ 1).
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("zero_field_d", self.zero_field_d),
            ("strain_e", self.strain_e),
            ("coupling_g", self.coupling_g),
            ("asymmetry_alpha", self.asymmetry_alpha),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if self.ensemble_size_n < 1 {
            return Err(Error::Invalid("ensemble_size_n must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Derived adimensional parameters; errors when a requested ratio is
    /// undefined (D ≤ 0 or E = 0) or the qubit is degenerate (ε = Δ = 0).
    pub fn derived(&self) -> Result<DerivedParams> {
        self.validate()?;
        if self.zero_field_d <= 0.0 {
            return Err(Error::Invalid(format!(
                "zero_field_d must be > 0 for derived ratios, got {}",
                self.zero_field_d
            )));
        }
        if self.strain_e == 0.0 {
            return Err(Error::Invalid("strain_e must be nonzero for derived ratios".into()));
        }
        let e_qb = self.e_qb();
        if e_qb == 0.0 {
            return Err(Error::Invalid("degenerate qubit: ε = Δ = 0".into()));
        }
        // cos β = ε/E_qb, sin β = −Δ/E_qb.
        let beta = (-self.delta).atan2(self.epsilon);
        let delta_ratio = self.delta / (2.0 * self.zero_field_d);
        let gamma = self.coupling_g / self.strain_e;
        let d_over_e = self.zero_field_d / self.strain_e;
        let sqrt_n = (self.ensemble_size_n as f64).sqrt();
        Ok(DerivedParams {
            e_qb,
            beta,
            delta_ratio,
            gamma,
            d_plus: (1.0 + delta_ratio) * d_over_e,
            d_minus: (1.0 - delta_ratio) * d_over_e,
            gamma_n: gamma / sqrt_n,
            alpha_n: self.asymmetry_alpha / sqrt_n,
        })
    }
}

/// Adimensional combinations entering the closed-form spectra and the
/// Holstein–Primakoff rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Qubit gap E_qb = √(ε² + Δ²) [GHz].
    pub e_qb: f64,
    /// Qubit rotation angle β [rad]; cos β = ε/E_qb, sin β = −Δ/E_qb.
    pub beta: f64,
    /// δ = Δ/(2D).
    pub delta_ratio: f64,
    /// γ = g/E.
    pub gamma: f64,
    /// d₊ = (1+δ)·D/E (odd-parity block offset).
    pub d_plus: f64,
    /// d₋ = (1−δ)·D/E (even-parity block offset).
    pub d_minus: f64,
    /// γ_N = γ/√N, the coupling scale kept fixed when comparing ensemble sizes.
    pub gamma_n: f64,
    /// α_N = α/√N.
    pub alpha_n: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn default_working_point_ratios() {
        let p = ModelParams::default();
        let d = p.derived().unwrap();
        assert_abs_diff_eq!(d.delta_ratio, 1.0, epsilon = 1e-15);
        // Δ = 2D makes the even-parity offset vanish identically.
        assert_abs_diff_eq!(d.d_minus, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.d_plus, 2.0 * 2.88 / 0.026, epsilon = 1e-9);
        assert_abs_diff_eq!(d.gamma, 10.0 / 13.0, epsilon = 1e-15);
    }

    #[test]
    fn beta_sign_convention() {
        // cos(β)·E_qb = ε and sin(β)·E_qb = −Δ must hold as written.
        for (eps, delta) in [(0.0, 5.76), (1.0, 1.0), (2.0, 0.5), (-1.0, 3.0)] {
            let p = ModelParams { epsilon: eps, delta, ..ModelParams::default() };
            let d = p.derived().unwrap();
            assert_abs_diff_eq!(d.beta.cos() * d.e_qb, eps, epsilon = 1e-12);
            assert_abs_diff_eq!(d.beta.sin() * d.e_qb, -delta, epsilon = 1e-12);
        }
        // ε = Δ picks β = −π/4 in this branch convention.
        let p = ModelParams { epsilon: 1.3, delta: 1.3, ..ModelParams::default() };
        assert_abs_diff_eq!(p.derived().unwrap().beta, -std::f64::consts::FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn d_plus_minus_gap() {
        let p = ModelParams { delta: 1.9, ..ModelParams::default() };
        let d = p.derived().unwrap();
        let expect = 2.0 * d.delta_ratio * p.zero_field_d / p.strain_e;
        assert_abs_diff_eq!(d.d_plus - d.d_minus, expect, epsilon = 1e-9);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams { ensemble_size_n: 0, ..ModelParams::default() }.validate().is_err());
        assert!(ModelParams { strain_e: 0.0, ..ModelParams::default() }.derived().is_err());
        assert!(ModelParams { zero_field_d: -1.0, ..ModelParams::default() }.derived().is_err());
        assert!(ModelParams { epsilon: 0.0, delta: 0.0, ..ModelParams::default() }
            .derived()
            .is_err());
        assert!(ModelParams { coupling_g: f64::NAN, ..ModelParams::default() }.validate().is_err());
    }

    #[test]
    fn n_scaling() {
        let p = ModelParams { ensemble_size_n: 8, asymmetry_alpha: 0.9, ..ModelParams::default() };
        let d = p.derived().unwrap();
        assert_abs_diff_eq!(d.gamma_n, d.gamma / 8f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.alpha_n, 0.9 / 8f64.sqrt(), epsilon = 1e-15);
    }
}
