//! Parity-ordered product basis |k_qb⟩ ⊗ |k_S⟩.
//!
//! k_qb ∈ {0,1} labels the qubit levels and k_S ∈ 0..=N counts collective
//! spin excitations above the lowest-weight state m = −S. The Hamiltonian at
//! zero bias conserves the parity (−1)^(k_qb + k_S), so the canonical basis
//! ordering used everywhere in this crate is: all even-parity states first,
//! then all odd ones, each group sorted by (k_qb, k_S). Both blocks have
//! dimension N+1.

use std::ops::Range;

/// One product-basis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BasisIndex {
    pub k_qb: usize,
    pub k_s: usize,
}

impl BasisIndex {
    /// Parity (−1)^(k_qb + k_S) as ±1.
    pub fn parity(&self) -> i8 {
        if (self.k_qb + self.k_s) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Parity label of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(&self) -> i8 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

/// The canonical parity-sorted basis for ensemble size N, with both the
/// forward map (ordinal → labels) and the inverse (labels → ordinal).
#[derive(Debug, Clone)]
pub struct BasisLayout {
    n: usize,
    states: Vec<BasisIndex>,
    ordinals: Vec<usize>,
    even_dim: usize,
}

impl BasisLayout {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "ensemble size must be ≥ 1");
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for k_qb in 0..2 {
            for k_s in 0..=n {
                let st = BasisIndex { k_qb, k_s };
                if st.parity() == 1 {
                    even.push(st);
                } else {
                    odd.push(st);
                }
            }
        }
        // The double loop already visits states in (k_qb, k_S) order, so the
        // two groups come out sorted.
        let even_dim = even.len();
        let mut states = even;
        states.extend(odd);
        let mut ordinals = vec![0; states.len()];
        for (ord, st) in states.iter().enumerate() {
            ordinals[st.k_qb * (n + 1) + st.k_s] = ord;
        }
        Self { n, states, ordinals, even_dim }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Full dimension 2(N+1).
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// States in canonical order.
    pub fn states(&self) -> &[BasisIndex] {
        &self.states
    }

    /// Position of |k_qb, k_S⟩ in the canonical ordering.
    pub fn ordinal(&self, k_qb: usize, k_s: usize) -> usize {
        assert!(k_qb < 2 && k_s <= self.n, "basis label out of range");
        self.ordinals[k_qb * (self.n + 1) + k_s]
    }

    /// Index range of a parity block (even occupies the leading positions).
    pub fn block(&self, parity: Parity) -> Range<usize> {
        match parity {
            Parity::Even => 0..self.even_dim,
            Parity::Odd => self.even_dim..self.dim(),
        }
    }

    /// Parity of an ordinal position.
    pub fn parity_at(&self, ordinal: usize) -> Parity {
        if ordinal < self.even_dim {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}
