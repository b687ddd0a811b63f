//! Numerical spectra per parity block, multiset comparison of eigenvalue
//! sets, and the coalescence diagnostics used to certify exceptional points
//! independently of the closed-form discriminant.

use num_complex::Complex64 as C64;

use crate::basis::Parity;
use crate::linalg::{eig, Eig};
use crate::model::Hamiltonian;
use crate::{Error, Result};

/// Eigendecomposition of the full Hamiltonian (works with or without parity
/// structure).
pub fn full_spectrum(h: &Hamiltonian) -> Result<Eig> {
    eig(&h.matrix)
}

/// Eigendecomposition of one parity block; requires exact block structure.
pub fn block_eig(h: &Hamiltonian, parity: Parity) -> Result<Eig> {
    if !h.is_parity_blocked() {
        return Err(Error::Invalid(
            "Hamiltonian has cross-parity entries (nonzero bias); no block spectrum".into(),
        ));
    }
    eig(&h.block(parity))
}

/// Number of complex-conjugate pairs (eigenvalues with |Im| > tol, halved).
pub fn count_complex_pairs(values: &[C64], tol: f64) -> usize {
    values.iter().filter(|v| v.im.abs() > tol).count() / 2
}

/// Exact minimal worst-case matching distance between two eigenvalue
/// multisets: min over pairings of max_k |a_k − b_σ(k)|.
///
/// Exhaustive with pruning — fine for the block dimensions used here (≤ ~10).
/// Falls back to (re, im)-sorted pairing for larger sets.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multiset distance needs equal-size sets");
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    if n > 10 {
        let key = |v: &C64| (v.re, v.im);
        let mut sa = a.to_vec();
        let mut sb = b.to_vec();
        sa.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        sb.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        return sa.iter().zip(&sb).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    }
    fn assign(a: &[C64], b: &[C64], used: &mut [bool], k: usize, cur: f64, best: &mut f64) {
        if cur >= *best {
            return; // cannot improve the worst pair already committed
        }
        if k == a.len() {
            *best = cur;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                let d = (a[k] - b[j]).norm();
                assign(a, b, used, k + 1, cur.max(d), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut used = vec![false; n];
    assign(a, b, &mut used, 0, 0.0, &mut best);
    best
}

/// Pairwise-closeness diagnostics of an eigendecomposition.
#[derive(Debug, Clone, Copy)]
pub struct Coalescence {
    /// Smallest pairwise eigenvalue distance.
    pub min_gap: f64,
    /// |⟨r̂_i|r̂_j⟩| of that closest pair (→ 1 when the eigenvectors collapse).
    pub pair_overlap: f64,
    /// min_k |⟨l_k|r_k⟩| (→ 0 at an exceptional point).
    pub biorth_min: f64,
}

/// Measure how close `e` is to an eigenvalue + eigenvector coalescence.
pub fn coalescence(e: &Eig) -> Coalescence {
    let n = e.values.len();
    let mut min_gap = f64::INFINITY;
    let mut pair = (0, 0);
    for i in 0..n {
        for j in i + 1..n {
            let gap = (e.values[i] - e.values[j]).norm();
            if gap < min_gap {
                min_gap = gap;
                pair = (i, j);
            }
        }
    }
    let overlap = if n < 2 {
        0.0
    } else {
        let u = e.right.column(pair.0);
        let v = e.right.column(pair.1);
        u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().norm()
    };
    Coalescence { min_gap, pair_overlap: overlap, biorth_min: e.biorth_min() }
}

/// Reorder `next` in place so that entry k continues the branch of `prev[k]`
/// (greedy nearest-unused matching; adequate for sweep plotting).
pub fn order_for_continuity(prev: &[C64], next: &mut [C64]) {
    let n = prev.len();
    assert_eq!(n, next.len());
    let mut taken = vec![false; n];
    let mut out = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, cand) in next.iter().enumerate() {
            if !taken[j] {
                let d = (prev[k] - cand).norm();
                if d < best.0 {
                    best = (d, j);
                }
            }
        }
        taken[best.1] = true;
        out[k] = next[best.1];
    }
    next.copy_from_slice(&out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::analytic_block_spectrum;
    use crate::model::build_hamiltonian;
    use crate::params::ModelParams;

    fn working_point(alpha: f64) -> ModelParams {
        ModelParams { asymmetry_alpha: alpha, ..ModelParams::default() }
    }

    #[test]
    fn block_spectra_match_closed_form() {
        for alpha in [0.4, 0.95, 1.3] {
            let params = working_point(alpha);
            let h = build_hamiltonian(&params).unwrap();
            for parity in [Parity::Even, Parity::Odd] {
                let num = block_eig(&h, parity).unwrap();
                let ana = analytic_block_spectrum(&params, parity).unwrap();
                assert!(multiset_distance(&num.values, &ana) < 1e-10);
            }
        }
    }

    #[test]
    fn block_eig_refuses_biased_hamiltonian() {
        let h = build_hamiltonian(&ModelParams { epsilon: 0.2, ..ModelParams::default() })
            .unwrap();
        assert!(block_eig(&h, Parity::Even).is_err());
        assert!(full_spectrum(&h).is_ok());
    }

    #[test]
    fn complex_pair_counting() {
        let evens_complex =
            analytic_block_spectrum(&working_point(0.6), Parity::Even).unwrap();
        assert_eq!(count_complex_pairs(&evens_complex, 1e-10), 1);
        let evens_real = analytic_block_spectrum(&working_point(1.0), Parity::Even).unwrap();
        assert_eq!(count_complex_pairs(&evens_real, 1e-10), 0);
    }

    #[test]
    fn multiset_distance_exact_cases() {
        let a = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-2.0, 0.5)];
        let mut b = a;
        b.rotate_left(1);
        assert!(multiset_distance(&a, &b) < 1e-15);
        // Perturb one element by a known amount.
        let mut c = b;
        c[2] += C64::new(3e-7, 0.0);
        let d = multiset_distance(&a, &c);
        assert!((d - 3e-7).abs() < 1e-15);
        // The sorted heuristic would mispair these; the exact matcher must not.
        let p = [C64::new(0.0, 1.0), C64::new(0.0, -1.0)];
        let q = [C64::new(1e-3, -1.0), C64::new(-1e-3, 1.0)];
        assert!(multiset_distance(&p, &q) < 2e-3);
    }

    #[test]
    fn coalescence_sharpens_near_ep() {
        let far = block_eig(&build_hamiltonian(&working_point(0.5)).unwrap(), Parity::Even)
            .unwrap();
        let near =
            block_eig(&build_hamiltonian(&working_point(0.94043)).unwrap(), Parity::Even)
                .unwrap();
        let cf = coalescence(&far);
        let cn = coalescence(&near);
        assert!(cn.min_gap < 1e-3 * cf.min_gap);
        assert!(cn.pair_overlap > 0.999);
        assert!(cn.biorth_min < 1e-2);
        assert!(cf.pair_overlap < 0.9);
    }

    #[test]
    fn continuity_ordering_follows_branches() {
        let mut prev = analytic_block_spectrum(&working_point(0.60), Parity::Even)
            .unwrap()
            .to_vec();
        for k in 1..=20 {
            let alpha = 0.60 + 0.005 * k as f64;
            let mut next =
                analytic_block_spectrum(&working_point(alpha), Parity::Even).unwrap().to_vec();
            order_for_continuity(&prev, &mut next);
            for (p, n) in prev.iter().zip(&next) {
                assert!((p - n).norm() < 5e-3, "branch jump at α={alpha}");
            }
            prev = next;
        }
    }
}
