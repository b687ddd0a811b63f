//! Discrete SU(2) Wigner function of the NV reduced state and the cat-state
//! decomposition built on it.
//!
//! The kernel is the multipole (irreducible tensor operator) expansion:
//! ρ_kq = Tr(ρ T†_kq) with orthonormal T_kq from Clebsch–Gordan coefficients,
//! W(θ,φ) = Σ_kq ρ_kq Y_kq(θ,φ) with unit-normalized spherical harmonics
//! (∫|Y|² dΩ = 1). Hermiticity of ρ forces ρ_{k,−q} = (−1)^q ρ*_{kq}, which
//! makes W real — the implementation checks that rather than assuming it,
//! since it is exactly the identity a phase-convention bug would break.
//!
//! With this normalization ∫W dΩ = √(4π/(2S+1))·Tr ρ, since only the k = 0
//! multipole survives the angular integral.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::model::coherent_state;
use crate::{Error, Result};

const LN_FACT_LEN: usize = 201;

/// ln(n!) table, enough for 2S + k ≤ ~100.
fn ln_factorials() -> [f64; LN_FACT_LEN] {
    let mut t = [0.0f64; LN_FACT_LEN];
    for n in 1..LN_FACT_LEN {
        t[n] = t[n - 1] + (n as f64).ln();
    }
    t
}

/// Clebsch–Gordan coefficient ⟨j1 m1; j2 m2 | J M⟩ in doubled-integer
/// notation (every argument is 2× the physical value), Racah's closed form.
fn clebsch_gordan(
    lf: &[f64; LN_FACT_LEN],
    j1x2: i64,
    m1x2: i64,
    j2x2: i64,
    m2x2: i64,
    jx2: i64,
    mx2: i64,
) -> f64 {
    if m1x2 + m2x2 != mx2 {
        return 0.0;
    }
    if m1x2.abs() > j1x2 || m2x2.abs() > j2x2 || mx2.abs() > jx2 {
        return 0.0;
    }
    // Triangle condition with matching parity.
    if jx2 > j1x2 + j2x2 || jx2 < (j1x2 - j2x2).abs() || (j1x2 + j2x2 + jx2) % 2 != 0 {
        return 0.0;
    }
    // All factorial arguments below are true integers (halves cancel).
    let f = |x2: i64| -> f64 {
        debug_assert!(x2 >= 0 && x2 % 2 == 0);
        lf[(x2 / 2) as usize]
    };
    let ln_prefactor = 0.5
        * (((jx2 + 1) as f64).ln() + f(j1x2 + j2x2 - jx2) + f(j1x2 - j2x2 + jx2)
            + f(-j1x2 + j2x2 + jx2)
            - f(j1x2 + j2x2 + jx2 + 2)
            + f(jx2 + mx2)
            + f(jx2 - mx2)
            + f(j1x2 - m1x2)
            + f(j1x2 + m1x2)
            + f(j2x2 - m2x2)
            + f(j2x2 + m2x2));
    // Summation index t (integer): all six factorial arguments ≥ 0.
    let t_min = 0i64
        .max((j2x2 - jx2 - m1x2) / 2)
        .max((j1x2 + m2x2 - jx2) / 2);
    let t_max = ((j1x2 + j2x2 - jx2) / 2)
        .min((j1x2 - m1x2) / 2)
        .min((j2x2 + m2x2) / 2);
    let mut sum = 0.0f64;
    for t in t_min..=t_max {
        let tx2 = 2 * t;
        let ln_den = f(tx2) + f(j1x2 + j2x2 - jx2 - tx2) + f(j1x2 - m1x2 - tx2)
            + f(j2x2 + m2x2 - tx2)
            + f(jx2 - j2x2 + m1x2 + tx2)
            + f(jx2 - j1x2 - m2x2 + tx2);
        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (ln_prefactor - ln_den).exp();
    }
    sum
}

/// Orthonormal irreducible tensor operator T_kq on the spin-S space
/// (dimension 2S+1): (T_kq)_{m'm} = √((2k+1)/(2S+1))·⟨S m; k q | S m'⟩,
/// with m = −S + column index.
pub fn tensor_operator(s2: usize, k: usize, q: i64) -> Result<Array2<C64>> {
    if k > s2 || q.unsigned_abs() as usize > k {
        return Err(Error::Invalid(format!("tensor operator (k={k}, q={q}) out of range for 2S={s2}")));
    }
    let lf = ln_factorials();
    let dim = s2 + 1;
    let jx2 = s2 as i64;
    let kx2 = 2 * k as i64;
    let qx2 = 2 * q;
    let norm = ((2 * k + 1) as f64 / dim as f64).sqrt();
    let mut t = Array2::<C64>::zeros((dim, dim));
    for col in 0..dim {
        let mx2 = 2 * col as i64 - jx2;
        let mpx2 = mx2 + qx2;
        let row = (mpx2 + jx2) / 2;
        if !(0..dim as i64).contains(&row) {
            continue;
        }
        let cg = clebsch_gordan(&lf, jx2, mx2, kx2, qx2, jx2, mpx2);
        t[[row as usize, col]] = C64::new(norm * cg, 0.0);
    }
    Ok(t)
}

/// Multipole decomposition ρ_kq = Tr(ρ T†_kq), k = 0..2S, q = −k..k.
#[derive(Debug, Clone)]
pub struct Multipoles {
    /// 2S of the underlying spin space.
    pub s2: usize,
    /// coeffs[k][(q + k) as usize] = ρ_kq.
    pub coeffs: Vec<Vec<C64>>,
}

impl Multipoles {
    pub fn get(&self, k: usize, q: i64) -> C64 {
        self.coeffs[k][(q + k as i64) as usize]
    }
}

/// Decompose a (2S+1)-dimensional density matrix into multipoles.
pub fn multipoles(rho: &Array2<C64>) -> Result<Multipoles> {
    let dim = rho.nrows();
    if dim < 2 || rho.ncols() != dim {
        return Err(Error::Invalid("multipoles need a square density ≥ 2".into()));
    }
    let s2 = dim - 1;
    let mut coeffs = Vec::with_capacity(s2 + 1);
    for k in 0..=s2 {
        let mut row = Vec::with_capacity(2 * k + 1);
        for q in -(k as i64)..=(k as i64) {
            let t = tensor_operator(s2, k, q)?;
            // Tr(ρ T†) = Σ_{ij} ρ_ij conj(T_ij) for real T entries = Σ ρ_ij T_ij.
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..dim {
                for j in 0..dim {
                    acc += rho[[i, j]] * t[[i, j]].conj();
                }
            }
            row.push(acc);
        }
        coeffs.push(row);
    }
    Ok(Multipoles { s2, coeffs })
}

/// Rebuild ρ = Σ_kq ρ_kq T_kq from its multipoles.
pub fn reconstruct(m: &Multipoles) -> Result<Array2<C64>> {
    let dim = m.s2 + 1;
    let mut rho = Array2::<C64>::zeros((dim, dim));
    for k in 0..=m.s2 {
        for q in -(k as i64)..=(k as i64) {
            let t = tensor_operator(m.s2, k, q)?;
            let c = m.get(k, q);
            for i in 0..dim {
                for j in 0..dim {
                    rho[[i, j]] += c * t[[i, j]];
                }
            }
        }
    }
    Ok(rho)
}

/// Associated Legendre values P_k^q(x) for q ≥ 0, k = q..=k_max, with the
/// Condon–Shortley phase. Returns values indexed by k − q.
fn assoc_legendre_upward(k_max: usize, q: usize, x: f64) -> Vec<f64> {
    let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    // P_q^q = (−1)^q (2q−1)!! (1−x²)^{q/2}
    let mut pqq = 1.0f64;
    for i in 0..q {
        pqq *= -((2 * i + 1) as f64) * somx2;
    }
    let mut out = Vec::with_capacity(k_max - q + 1);
    out.push(pqq);
    if k_max == q {
        return out;
    }
    let mut pk_minus = pqq;
    let mut pk = x * (2 * q + 1) as f64 * pqq;
    out.push(pk);
    for k in q + 2..=k_max {
        let next = (x * ((2 * k - 1) as f64) * pk - ((k + q - 1) as f64) * pk_minus)
            / ((k - q) as f64);
        out.push(next);
        pk_minus = pk;
        pk = next;
    }
    out
}

/// θ-part of the orthonormal spherical harmonic: Y_kq(θ,φ) = y_kq(θ)·e^{iqφ}
/// for q ≥ 0; Y_{k,−q} = (−1)^q Y*_{kq}.
fn y_theta(k_max: usize, q: usize, theta: f64, lf: &[f64; LN_FACT_LEN]) -> Vec<f64> {
    let p = assoc_legendre_upward(k_max, q, theta.cos());
    p.iter()
        .enumerate()
        .map(|(i, &pkq)| {
            let k = q + i;
            let ln_norm = 0.5
                * (((2 * k + 1) as f64 / (4.0 * std::f64::consts::PI)).ln() + lf[k - q]
                    - lf[k + q]);
            ln_norm.exp() * pkq
        })
        .collect()
}

/// Wigner function sampled on a θ×φ grid.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// values[[i, j]] = W(thetas[i], phis[j]).
    pub values: Array2<f64>,
    pub multipoles: Multipoles,
}

/// Evaluate W on an `n_theta × n_phi` grid (θ uniform in [0, π], φ uniform in
/// [0, 2π)). Grid must be at least 32×64. Errors if the analytically real sum
/// retains imaginary residue above 1e−10 (a phase-convention violation).
pub fn wigner(rho: &Array2<C64>, n_theta: usize, n_phi: usize) -> Result<WignerGrid> {
    if n_theta < 32 || n_phi < 64 {
        return Err(Error::Invalid(format!(
            "wigner grid {n_theta}×{n_phi} too coarse; need ≥ 32×64"
        )));
    }
    let m = multipoles(rho)?;
    let lf = ln_factorials();
    let thetas: Vec<f64> =
        (0..n_theta).map(|i| std::f64::consts::PI * i as f64 / (n_theta - 1) as f64).collect();
    let phis: Vec<f64> =
        (0..n_phi).map(|j| 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64).collect();
    let mut values = Array2::<f64>::zeros((n_theta, n_phi));
    let mut max_im = 0.0f64;
    for (i, &theta) in thetas.iter().enumerate() {
        // c_q(θ) = Σ_k ρ_kq y_kq(θ) for q ≥ 0; negative q follows from the
        // Hermiticity identity — but sum the full range deliberately.
        for (j, &phi) in phis.iter().enumerate() {
            let mut w = C64::new(0.0, 0.0);
            for q in 0..=m.s2 {
                let ys = y_theta(m.s2, q, theta, &lf);
                for (idx, &y) in ys.iter().enumerate() {
                    let k = q + idx;
                    if q == 0 {
                        w += m.get(k, 0) * y;
                    } else {
                        let e = C64::from_polar(1.0, q as f64 * phi);
                        w += m.get(k, q as i64) * y * e;
                        // Y_{k,−q} = (−1)^q Y*_{kq}
                        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                        w += m.get(k, -(q as i64)) * sign * y * e.conj();
                    }
                }
            }
            max_im = max_im.max(w.im.abs());
            values[[i, j]] = w.re;
        }
    }
    if max_im > 1e-10 {
        return Err(Error::Numerical(format!(
            "Wigner function retains imaginary residue {max_im:.2e}; \
             multipole phase conventions violated"
        )));
    }
    Ok(WignerGrid { thetas, phis, values, multipoles: m })
}

/// Gauss–Legendre nodes/weights on [−1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    for i in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = (((2 * k - 1) as f64) * x * p1 - ((k - 1) as f64) * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let p2 = (((2 * k - 1) as f64) * x * p1 - ((k - 1) as f64) * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Quadrature of ∫ W dΩ: Gauss–Legendre in cos θ (exact for the band-limited
/// polar dependence), uniform trapezoid in φ (exact for the Fourier content).
/// Equals √(4π/(2S+1))·Tr ρ by the multipole normalization.
pub fn integrate_sphere(m: &Multipoles) -> f64 {
    let lf = ln_factorials();
    let n_gl = m.s2 + 2;
    let (nodes, wts) = gauss_legendre(n_gl);
    let n_phi = 2 * m.s2 + 3;
    let mut total = 0.0;
    for (&x, &w) in nodes.iter().zip(&wts) {
        let theta = x.acos();
        for jphi in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * jphi as f64 / n_phi as f64;
            let mut val = C64::new(0.0, 0.0);
            for q in 0..=m.s2 {
                let ys = y_theta(m.s2, q, theta, &lf);
                for (idx, &y) in ys.iter().enumerate() {
                    let k = q + idx;
                    if q == 0 {
                        val += m.get(k, 0) * y;
                    } else {
                        let e = C64::from_polar(1.0, q as f64 * phi);
                        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                        val += m.get(k, q as i64) * y * e;
                        val += m.get(k, -(q as i64)) * sign * y * e.conj();
                    }
                }
            }
            total += w * val.re * 2.0 * std::f64::consts::PI / n_phi as f64;
        }
    }
    total
}

/// φ-Fourier moduli of W on the equator: |c_q| for q = 0..2S, where
/// W(π/2, φ) = c_0 + Σ_{q>0} 2·Re(c_q e^{iqφ}).
#[derive(Debug, Clone)]
pub struct FringeReport {
    pub moduli: Vec<f64>,
    /// True when |c_{2S}| strictly exceeds every 1 ≤ q < 2S modulus — the
    /// interference fringes of an equatorial cat.
    pub dominant_top: bool,
}

pub fn equatorial_fringes(m: &Multipoles) -> FringeReport {
    let lf = ln_factorials();
    let mut moduli = Vec::with_capacity(m.s2 + 1);
    for q in 0..=m.s2 {
        let ys = y_theta(m.s2, q, std::f64::consts::FRAC_PI_2, &lf);
        let mut c = C64::new(0.0, 0.0);
        for (idx, &y) in ys.iter().enumerate() {
            let k = q + idx;
            c += m.get(k, q as i64) * y;
        }
        moduli.push(c.norm());
    }
    let top = moduli[m.s2];
    let dominant_top = (1..m.s2).all(|q| top > moduli[q]);
    FringeReport { moduli, dominant_top }
}

/// Decomposition of ρ against the equatorial cat pair and the single-flip
/// state S₊|lowest⟩.
#[derive(Debug, Clone)]
pub struct CatReport {
    /// Detected cat azimuth φ₀ (lobes at (π/2, φ₀) and (π/2, φ₀+π)).
    pub azimuth: f64,
    pub weight_cat_even: f64,
    pub weight_cat_odd: f64,
    /// Weight on S₊|lowest⟩ after orthogonalizing it against the cat plane.
    pub weight_plus_state: f64,
    /// Sum of the three weights; ≤ 1 by orthonormality of the projectors.
    pub combined: f64,
}

/// Detect the cat azimuth from the top multipole phase and report overlaps.
///
/// ρ_{2S,2S} of an equatorial cat goes like e^{−i2Sφ₀} times a real number of
/// either sign, so φ₀ is fixed only up to π/(2S); both candidates are
/// evaluated and the better one reported.
pub fn cat_overlap(rho: &Array2<C64>) -> Result<CatReport> {
    let dim = rho.nrows();
    if dim < 2 || rho.ncols() != dim {
        return Err(Error::Invalid("cat overlap needs a square density ≥ 2".into()));
    }
    let s2 = dim - 1;
    let m = multipoles(rho)?;
    let top = m.get(s2, s2 as i64);
    let phi_base = if top.norm() > 1e-14 { -top.arg() / s2 as f64 } else { 0.0 };

    let report_at = |phi0: f64| -> Result<CatReport> {
        let a = coherent_state(std::f64::consts::FRAC_PI_2, phi0, s2)?;
        let b = coherent_state(std::f64::consts::FRAC_PI_2, phi0 + std::f64::consts::PI, s2)?;
        // Antipodal coherent states are exactly orthogonal, so the ± cats are
        // an orthonormal pair.
        let inv = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
        let cat_e: Array1<C64> = (0..dim).map(|i| (a[i] + b[i]) * inv).collect();
        let cat_o: Array1<C64> = (0..dim).map(|i| (a[i] - b[i]) * inv).collect();
        // S₊|lowest⟩ ∝ |m = −S + 1⟩: basis vector index 1. Orthogonalize
        // against the cat plane so the three weights never double-count.
        let mut plus = Array1::<C64>::zeros(dim);
        plus[1] = C64::new(1.0, 0.0);
        for cat in [&cat_e, &cat_o] {
            let ov: C64 = cat.iter().zip(plus.iter()).map(|(c, p)| c.conj() * p).sum();
            for i in 0..dim {
                let c = cat[i];
                plus[i] -= ov * c;
            }
        }
        let pn = plus.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let quad = |v: &Array1<C64>| -> f64 {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..dim {
                for j in 0..dim {
                    acc += v[i].conj() * rho[[i, j]] * v[j];
                }
            }
            acc.re
        };
        let we = quad(&cat_e);
        let wo = quad(&cat_o);
        let wp = if pn > 1e-8 {
            let pn_c = C64::new(pn, 0.0);
            let plus_n: Array1<C64> = plus.iter().map(|c| c / pn_c).collect();
            quad(&plus_n)
        } else {
            0.0
        };
        Ok(CatReport {
            azimuth: phi0,
            weight_cat_even: we,
            weight_cat_odd: wo,
            weight_plus_state: wp,
            combined: we + wo + wp,
        })
    };

    let r1 = report_at(phi_base)?;
    let r2 = report_at(phi_base + std::f64::consts::PI / s2 as f64)?;
    Ok(if r1.weight_cat_even + r1.weight_cat_odd >= r2.weight_cat_even + r2.weight_cat_odd {
        r1
    } else {
        r2
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, initial_product_state};
    use crate::observables::{reduce_density, Subsystem};
    use crate::params::ModelParams;

    fn pure_density(v: &Array1<C64>) -> Array2<C64> {
        let d = v.len();
        let mut rho = Array2::<C64>::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                rho[[i, j]] = v[i] * v[j].conj();
            }
        }
        rho
    }

    fn steady_rho_nv(alpha: f64) -> Array2<C64> {
        let params = ModelParams { asymmetry_alpha: alpha, ..ModelParams::default() };
        let h = build_hamiltonian(&params).unwrap();
        let psi0 = initial_product_state(0, 0.0, 0.0, &params).unwrap();
        let ev = crate::dynamics::evolve_state(&h, &psi0, 6000.0).unwrap();
        reduce_density(&ev.unit_norm, &h.layout, Subsystem::Nv).unwrap().rho
    }

    const CAT_ALPHA: f64 = 0.8244288641;

    #[test]
    fn tensor_operators_are_orthonormal() {
        for s2 in [2usize, 4, 7] {
            let mut ops = Vec::new();
            for k in 0..=s2 {
                for q in -(k as i64)..=(k as i64) {
                    ops.push(((k, q), tensor_operator(s2, k, q).unwrap()));
                }
            }
            for (la, ta) in &ops {
                for (lb, tb) in &ops {
                    let mut tr = C64::new(0.0, 0.0);
                    for i in 0..=s2 {
                        for j in 0..=s2 {
                            tr += ta[[i, j]].conj() * tb[[i, j]];
                        }
                    }
                    let expect = if la == lb { 1.0 } else { 0.0 };
                    assert!(
                        (tr - C64::new(expect, 0.0)).norm() < 1e-12,
                        "2S={s2}: ⟨T{la:?}, T{lb:?}⟩ = {tr}"
                    );
                }
            }
        }
    }

    #[test]
    fn multipole_round_trip() {
        // Deterministic pseudo-random Hermitian ρ.
        let dim = 5;
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut rand = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut rho = Array2::<C64>::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                rho[[i, j]] = C64::new(rand(), rand());
            }
        }
        let rho = {
            let herm = &rho + &rho.t().mapv(|v| v.conj());
            let tr: C64 = (0..dim).map(|i| herm[[i, i]]).sum();
            herm.mapv(|v| v / tr)
        };
        let m = multipoles(&rho).unwrap();
        let back = reconstruct(&m).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                assert!((back[[i, j]] - rho[[i, j]]).norm() < 1e-10);
            }
        }
        // Hermiticity identity on the coefficients.
        for k in 0..=m.s2 {
            for q in 0..=(k as i64) {
                let lhs = m.get(k, -q);
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                let rhs = m.get(k, q).conj() * sign;
                assert!((lhs - rhs).norm() < 1e-12, "k={k} q={q}");
            }
        }
    }

    #[test]
    fn maximally_mixed_is_constant_on_sphere() {
        let dim = 3;
        let mut rho = Array2::<C64>::zeros((dim, dim));
        for i in 0..dim {
            rho[[i, i]] = C64::new(1.0 / 3.0, 0.0);
        }
        let g = wigner(&rho, 32, 64).unwrap();
        let expect = 1.0 / (3.0f64.sqrt() * (4.0 * std::f64::consts::PI).sqrt());
        for v in g.values.iter() {
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn lowest_weight_state_sits_at_minus_z() {
        let dim = 3;
        let mut v = Array1::<C64>::zeros(dim);
        v[0] = C64::new(1.0, 0.0); // m = −S
        let rho = pure_density(&v);
        let g = wigner(&rho, 33, 64).unwrap();
        // θ = π row is the −z pole (⟨S⟩ = (0,0,−S) for this state).
        let pole_row = g.thetas.len() - 1;
        let at_pole = g.values[[pole_row, 0]];
        let at_opposite = g.values[[0, 0]];
        assert!(at_pole > at_opposite, "{at_pole} vs {at_opposite}");
        assert!(at_pole > 0.0);
        // Axial symmetry: every φ at fixed θ identical.
        for i in 0..g.thetas.len() {
            for j in 1..g.phis.len() {
                assert!((g.values[[i, j]] - g.values[[i, 0]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coherent_lobe_points_along_mean_spin() {
        let (theta, phi) = (0.9, 2.3);
        let css = crate::model::coherent_state(theta, phi, 4).unwrap();
        let rho = pure_density(&css);
        let g = wigner(&rho, 61, 120).unwrap();
        let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
        for i in 0..g.thetas.len() {
            for j in 0..g.phis.len() {
                if g.values[[i, j]] > best.0 {
                    best = (g.values[[i, j]], i, j);
                }
            }
        }
        // ⟨S⟩ = −S n̂(θ,φ): the lobe sits at the antipode (π−θ, φ+π).
        let want_theta = std::f64::consts::PI - theta;
        let want_phi = (phi + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI);
        let d_theta = (g.thetas[best.1] - want_theta).abs();
        let d_phi = {
            let raw = (g.phis[best.2] - want_phi).abs();
            raw.min(2.0 * std::f64::consts::PI - raw)
        };
        assert!(d_theta < 0.06, "θ lobe at {} want {}", g.thetas[best.1], want_theta);
        assert!(d_phi < 0.06, "φ lobe at {} want {}", g.phis[best.2], want_phi);
    }

    #[test]
    fn quadrature_matches_multipole_normalization() {
        for dim in [3usize, 6] {
            let mut rho = Array2::<C64>::zeros((dim, dim));
            // Non-trivial unit-trace test density: mix of basis projectors
            // plus coherences.
            for i in 0..dim {
                rho[[i, i]] = C64::new((i + 1) as f64, 0.0);
            }
            rho[[0, dim - 1]] = C64::new(0.3, 0.2);
            rho[[dim - 1, 0]] = C64::new(0.3, -0.2);
            let tr: C64 = (0..dim).map(|i| rho[[i, i]]).sum();
            let rho = rho.mapv(|v| v / tr);
            let m = multipoles(&rho).unwrap();
            let integral = integrate_sphere(&m);
            let expect = (4.0 * std::f64::consts::PI / dim as f64).sqrt();
            assert!(
                (integral - expect).abs() < 1e-8,
                "dim={dim}: ∫W = {integral}, expect {expect}"
            );
        }
    }

    #[test]
    fn wigner_is_linear() {
        let a = crate::model::coherent_state(0.4, 0.0, 2).unwrap();
        let b = crate::model::coherent_state(2.0, 1.0, 2).unwrap();
        let (ra, rb) = (pure_density(&a), pure_density(&b));
        let lam = 0.3;
        let mix = ra.mapv(|v| v * lam) + rb.mapv(|v| v * (1.0 - lam));
        let (ga, gb, gm) =
            (wigner(&ra, 32, 64).unwrap(), wigner(&rb, 32, 64).unwrap(), wigner(&mix, 32, 64).unwrap());
        for i in 0..32 {
            for j in 0..64 {
                let expect = lam * ga.values[[i, j]] + (1.0 - lam) * gb.values[[i, j]];
                assert!((gm.values[[i, j]] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_too_coarse_is_rejected() {
        let mut rho = Array2::<C64>::zeros((3, 3));
        rho[[0, 0]] = C64::new(1.0, 0.0);
        assert!(wigner(&rho, 16, 64).is_err());
        assert!(wigner(&rho, 32, 32).is_err());
    }

    #[test]
    fn steady_state_fringes_at_cat_locus() {
        let rho = steady_rho_nv(CAT_ALPHA);
        let m = multipoles(&rho).unwrap();
        let fr = equatorial_fringes(&m);
        assert!(fr.dominant_top, "moduli: {:?}", fr.moduli);
        // Frozen equatorial Fourier moduli of the working-point steady state.
        assert!((fr.moduli[0] - 0.1634).abs() < 1e-3, "|c0| = {}", fr.moduli[0]);
        assert!((fr.moduli[2] - 0.1284).abs() < 1e-3, "|c2| = {}", fr.moduli[2]);
        assert!(fr.moduli[1] < 1e-6, "|c1| = {}", fr.moduli[1]);
    }

    #[test]
    fn pure_cat_decomposes_cleanly() {
        let s2 = 4;
        let a = crate::model::coherent_state(std::f64::consts::FRAC_PI_2, 0.7, s2).unwrap();
        let b = crate::model::coherent_state(
            std::f64::consts::FRAC_PI_2,
            0.7 + std::f64::consts::PI,
            s2,
        )
        .unwrap();
        let dim = s2 + 1;
        let inv = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
        let cat: Array1<C64> = (0..dim).map(|i| (a[i] + b[i]) * inv).collect();
        let rho = pure_density(&cat);
        let rep = cat_overlap(&rho).unwrap();
        assert!(
            (rep.weight_cat_even + rep.weight_cat_odd - 1.0).abs() < 1e-10,
            "{rep:?}"
        );
        assert!(rep.weight_plus_state < 1e-10);
        assert!(rep.combined <= 1.0 + 1e-10);
        // Azimuth recovered modulo π (the cat has no preferred lobe order).
        let got = rep.azimuth.rem_euclid(std::f64::consts::PI);
        let want = 0.7f64.rem_euclid(std::f64::consts::PI);
        let d = (got - want).abs().min(std::f64::consts::PI - (got - want).abs());
        assert!(d < 1e-8, "azimuth {got} vs {want}");
    }

    #[test]
    fn lowest_weight_cat_weight_is_the_direct_overlap() {
        let s2 = 2;
        let dim = s2 + 1;
        let mut v = Array1::<C64>::zeros(dim);
        v[0] = C64::new(1.0, 0.0);
        let rho = pure_density(&v);
        let rep = cat_overlap(&rho).unwrap();
        // No assertion on the value beyond consistency: weights in range and
        // bounded by 1 in total.
        assert!(rep.weight_cat_even >= -1e-12 && rep.weight_cat_odd >= -1e-12);
        assert!(rep.combined <= 1.0 + 1e-10);
    }

    #[test]
    fn steady_state_is_mostly_cat_plus_flip() {
        let rho = steady_rho_nv(CAT_ALPHA);
        let rep = cat_overlap(&rho).unwrap();
        assert!(rep.combined > 0.9, "combined weight {}", rep.combined);
        assert!(rep.combined <= 1.0 + 1e-10);
    }
}
