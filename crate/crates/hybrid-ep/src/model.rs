//! Operator algebra and Hamiltonian assembly.
//!
//! The model is H = H₁ + H₂ + H_S in the rotated qubit frame:
//!
//! ```text
//! H₁  = (E_qb/2)·s_z                         E_qb = √(ε² + Δ²), s = σ/2
//! H_S = D·S_z² + E·(S_x² − S_y²)
//! H₂  = g·(cos β σ_z + sin β σ_x)(S₊ + α S₋)   cos β = ε/E_qb, sin β = −Δ/E_qb
//! ```
//!
//! with σ the Pauli matrices and S the collective spin N/2 of the ensemble.
//! For α ≠ 1 the S₊/S₋ weights differ and H is real but asymmetric. At zero
//! bias (ε = 0) only σ_x appears in H₂ and H conserves the excitation parity
//! (−1)^(k_qb + k_S); all matrices here are assembled directly in the
//! parity-sorted basis of [`crate::basis`].

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::basis::{BasisLayout, Parity};
use crate::linalg::matrix_exp;
use crate::params::ModelParams;
use crate::{Error, Result};

/// Collective spin-S=N/2 matrices (dimension N+1, lowest weight first) plus
/// the qubit spin-1/2 set s = σ/2.
#[derive(Debug, Clone)]
pub struct SpinOperatorSet {
    pub sx: Array2<C64>,
    pub sy: Array2<C64>,
    pub sz: Array2<C64>,
    pub sp: Array2<C64>,
    pub sm: Array2<C64>,
    pub qx: Array2<C64>,
    pub qy: Array2<C64>,
    pub qz: Array2<C64>,
}

/// Ladder coefficient ⟨m+1|S₊|m⟩ = √(S(S+1) − m(m+1)) with m = −S + k.
fn ladder_coeff(n: usize, k: usize) -> f64 {
    let s = n as f64 / 2.0;
    let m = -s + k as f64;
    (s * (s + 1.0) - m * (m + 1.0)).sqrt()
}

/// Standard SU(2) representation matrices for N spins treated collectively.
pub fn build_spin_operators(n: usize) -> Result<SpinOperatorSet> {
    if n < 1 {
        return Err(Error::Invalid("ensemble size must be ≥ 1".into()));
    }
    let dim = n + 1;
    let s = n as f64 / 2.0;
    let mut sp = Array2::<C64>::zeros((dim, dim));
    for k in 0..n {
        sp[[k + 1, k]] = C64::new(ladder_coeff(n, k), 0.0);
    }
    let sm = sp.t().mapv(|v| v.conj());
    let sx = (&sp + &sm).mapv(|v| v * 0.5);
    let sy = (&sp - &sm).mapv(|v| v * C64::new(0.0, -0.5));
    let mut sz = Array2::<C64>::zeros((dim, dim));
    for k in 0..dim {
        sz[[k, k]] = C64::new(-s + k as f64, 0.0);
    }

    let half = C64::new(0.5, 0.0);
    let qx = ndarray::array![[C64::new(0.0, 0.0), half], [half, C64::new(0.0, 0.0)]];
    let qy = ndarray::array![
        [C64::new(0.0, 0.0), C64::new(0.0, -0.5)],
        [C64::new(0.0, 0.5), C64::new(0.0, 0.0)]
    ];
    // k_qb = 0 is the lower qubit level: s_z = diag(−1/2, +1/2).
    let qz = ndarray::array![
        [C64::new(-0.5, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), half]
    ];
    Ok(SpinOperatorSet { sx, sy, sz, sp, sm, qx, qy, qz })
}

/// The assembled Hamiltonian in the canonical parity-sorted basis.
///
/// All entries are real (H† = Hᵀ), the quasi-Hermiticity precondition. At
/// ε = 0 the two parity blocks decouple with structural (exact) zeros across;
/// a nonzero bias writes genuine cross-parity entries.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub matrix: Array2<f64>,
    pub layout: BasisLayout,
    pub params: ModelParams,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Copy of one parity block (meaningful when [`Self::is_parity_blocked`]).
    pub fn block(&self, parity: Parity) -> Array2<f64> {
        let r = self.layout.block(parity);
        self.matrix.slice(ndarray::s![r.clone(), r]).to_owned()
    }

    /// True when every cross-parity entry is exactly zero.
    pub fn is_parity_blocked(&self) -> bool {
        let ev = self.layout.block(Parity::Even);
        let od = self.layout.block(Parity::Odd);
        for i in ev.clone() {
            for j in od.clone() {
                if self.matrix[[i, j]] != 0.0 || self.matrix[[j, i]] != 0.0 {
                    return false;
                }
            }
        }
        true
    }

    /// The matrix lifted to complex entries (propagator input).
    pub fn complex(&self) -> Array2<C64> {
        self.matrix.mapv(|v| C64::new(v, 0.0))
    }
}

/// Assemble the full hybrid Hamiltonian for the given parameters.
pub fn build_hamiltonian(params: &ModelParams) -> Result<Hamiltonian> {
    params.validate()?;
    let e_qb = params.e_qb();
    if e_qb == 0.0 {
        return Err(Error::Invalid("degenerate qubit: ε = Δ = 0".into()));
    }
    let cos_b = params.epsilon / e_qb;
    let sin_b = -params.delta / e_qb;
    let n = params.ensemble_size_n;
    let layout = BasisLayout::new(n);
    let dim = layout.dim();
    let s = params.spin_s();
    let (d, e, g, alpha) =
        (params.zero_field_d, params.strain_e, params.coupling_g, params.asymmetry_alpha);

    let mut h = Array2::<f64>::zeros((dim, dim));
    // σ_z eigenvalue by qubit level.
    let qsign = |k_qb: usize| if k_qb == 0 { -1.0 } else { 1.0 };

    for (row, st) in layout.states().iter().enumerate() {
        let m = -s + st.k_s as f64;
        // Diagonal: qubit gap + zero-field term.
        h[[row, row]] += e_qb / 4.0 * qsign(st.k_qb) + d * m * m;

        // Strain (E/2)(S₊² + S₋²): k_S → k_S + 2 and the symmetric partner.
        if st.k_s + 2 <= n {
            let v = e / 2.0 * ladder_coeff(n, st.k_s) * ladder_coeff(n, st.k_s + 1);
            let to = layout.ordinal(st.k_qb, st.k_s + 2);
            h[[to, row]] += v;
            h[[row, to]] += v;
        }

        // Coupling g(cos β σ_z + sin β σ_x)(S₊ + αS₋): the S₊ leg raises k_S
        // with weight 1, the S₋ leg lowers it with weight α.
        if st.k_s + 1 <= n {
            let c = ladder_coeff(n, st.k_s);
            // σ_z: same qubit level, signed.
            let to_z = layout.ordinal(st.k_qb, st.k_s + 1);
            h[[to_z, row]] += g * cos_b * qsign(st.k_qb) * c;
            h[[row, to_z]] += g * cos_b * qsign(st.k_qb) * alpha * c;
            // σ_x: flipped qubit level.
            let to_x = layout.ordinal(1 - st.k_qb, st.k_s + 1);
            h[[to_x, row]] += g * sin_b * c;
            let from_x = layout.ordinal(1 - st.k_qb, st.k_s);
            h[[from_x, layout.ordinal(st.k_qb, st.k_s + 1)]] += g * sin_b * alpha * c;
        }
    }

    Ok(Hamiltonian { matrix: h, layout, params: *params })
}

/// Holstein–Primakoff (leading-order) bosonized Hamiltonian, truncated at
/// `n_max` excitations:
///
/// ```text
/// H_B = (E_qb/2)s_z + D(n̂ − N/2)² + (N·E/2)(b†² + b²)
///       + g√N (cos β σ_z + sin β σ_x)(b† + α b)
/// ```
///
/// The layout reuses the parity bookkeeping with the k_S slot holding the
/// boson occupancy n; the (−1)^(k_qb+n) blocks decouple exactly like in the
/// spin model. Dimension is 2(n_max+1).
pub fn hp_hamiltonian(params: &ModelParams, n_max: usize) -> Result<Hamiltonian> {
    params.validate()?;
    if n_max < 2 {
        return Err(Error::Invalid(format!("boson truncation n_max must be ≥ 2, got {n_max}")));
    }
    let e_qb = params.e_qb();
    if e_qb == 0.0 {
        return Err(Error::Invalid("degenerate qubit: ε = Δ = 0".into()));
    }
    let cos_b = params.epsilon / e_qb;
    let sin_b = -params.delta / e_qb;
    let nf = params.ensemble_size_n as f64;
    let sqrt_n = nf.sqrt();
    let layout = BasisLayout::new(n_max);
    let dim = layout.dim();
    let (d, e, g, alpha) =
        (params.zero_field_d, params.strain_e, params.coupling_g, params.asymmetry_alpha);

    let mut h = Array2::<f64>::zeros((dim, dim));
    let qsign = |k_qb: usize| if k_qb == 0 { -1.0 } else { 1.0 };
    let bup = |nn: usize| ((nn + 1) as f64).sqrt();

    for (row, st) in layout.states().iter().enumerate() {
        let nn = st.k_s;
        let off = nn as f64 - nf / 2.0;
        h[[row, row]] += e_qb / 4.0 * qsign(st.k_qb) + d * off * off;

        if nn + 2 <= n_max {
            let v = nf * e / 2.0 * bup(nn) * bup(nn + 1);
            let to = layout.ordinal(st.k_qb, nn + 2);
            h[[to, row]] += v;
            h[[row, to]] += v;
        }

        if nn + 1 <= n_max {
            let c = sqrt_n * bup(nn);
            let to_z = layout.ordinal(st.k_qb, nn + 1);
            h[[to_z, row]] += g * cos_b * qsign(st.k_qb) * c;
            h[[row, to_z]] += g * cos_b * qsign(st.k_qb) * alpha * c;
            let to_x = layout.ordinal(1 - st.k_qb, nn + 1);
            h[[to_x, row]] += g * sin_b * c;
            let from_x = layout.ordinal(1 - st.k_qb, nn);
            h[[from_x, layout.ordinal(st.k_qb, nn + 1)]] += g * sin_b * alpha * c;
        }
    }

    Ok(Hamiltonian { matrix: h, layout, params: *params })
}

/// Coherent spin state |θ,φ⟩ = exp(−iθ(S_y cos φ − S_x sin φ))|m=−S⟩ as an
/// (N+1)-component vector over k_S.
///
/// The rotation construction keeps θ = π regular. The mean spin points along
/// −n̂(θ,φ) with n̂ = (sin θ cos φ, sin θ sin φ, cos θ).
pub fn coherent_state(theta: f64, phi: f64, n: usize) -> Result<Array1<C64>> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Invalid(format!("theta must lie in [0, π], got {theta}")));
    }
    let ops = build_spin_operators(n)?;
    let gen = (&ops.sy * C64::new(phi.cos(), 0.0) - &ops.sx * C64::new(phi.sin(), 0.0))
        .mapv(|v| v * C64::new(0.0, -theta));
    let rot = matrix_exp(&gen)?;
    Ok(rot.column(0).to_owned())
}

/// Product state |k_qb⟩ ⊗ |θ,φ⟩ in the canonical parity-sorted basis.
pub fn initial_product_state(
    k_qb: usize,
    theta: f64,
    phi: f64,
    params: &ModelParams,
) -> Result<Array1<C64>> {
    if k_qb > 1 {
        return Err(Error::Invalid(format!("qubit level must be 0 or 1, got {k_qb}")));
    }
    let n = params.ensemble_size_n;
    let coh = coherent_state(theta, phi, n)?;
    let layout = BasisLayout::new(n);
    let mut v = Array1::<C64>::zeros(layout.dim());
    for (k_s, amp) in coh.iter().enumerate() {
        v[layout.ordinal(k_qb, k_s)] = *amp;
    }
    Ok(v)
}

/// Unit vector on the product basis state |k_qb, k_S⟩.
pub fn basis_state(layout: &BasisLayout, k_qb: usize, k_s: usize) -> Array1<C64> {
    let mut v = Array1::<C64>::zeros(layout.dim());
    v[layout.ordinal(k_qb, k_s)] = C64::new(1.0, 0.0);
    v
}
