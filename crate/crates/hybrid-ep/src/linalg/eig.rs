//! Real nonsymmetric eigendecomposition through LAPACK dgeev.
//!
//! The model Hamiltonian is always real in the parity basis, so the real
//! driver covers every use in this crate. dgeev also hands back the left
//! eigenvectors, which the spectral evolution kernel needs and which make the
//! near-defectiveness diagnostic (min |⟨L|R⟩|) free.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::{Error, Result};

// LAPACK Fortran symbol; column-major buffers, workspace-query protocol.
extern "C" {
    fn dgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        wr: *mut f64,
        wi: *mut f64,
        vl: *mut f64,
        ldvl: *const i32,
        vr: *mut f64,
        ldvr: *const i32,
        work: *mut f64,
        lwork: *const i32,
        info: *mut i32,
    );
}

/// Eigendecomposition of a real square matrix A.
///
/// Column k of `right` satisfies A·r = λ_k·r; column k of `left` satisfies
/// l† A = λ_k l†. Both are unit 2-norm (LAPACK convention). Complex
/// eigenvalues come in conjugate pairs with conjugate eigenvectors.
#[derive(Debug, Clone)]
pub struct Eig {
    pub values: Vec<C64>,
    pub right: Array2<C64>,
    pub left: Array2<C64>,
}

impl Eig {
    /// min_k |⟨l_k|r_k⟩| over unit-norm pairs: 1 for a normal matrix, → 0
    /// approaching an exceptional point. Used to refuse ill-conditioned
    /// spectral-kernel requests.
    pub fn biorth_min(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|k| {
                let l = self.left.column(k);
                let r = self.right.column(k);
                l.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest imaginary part among the eigenvalues (growth rate of the
    /// dominant mode under e^{−iHt}).
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Full eigendecomposition with left and right eigenvectors.
pub fn eig(a: &Array2<f64>) -> Result<Eig> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eig requires a square matrix");
    if n == 0 {
        return Err(Error::Invalid("eig of empty matrix".into()));
    }
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical("non-finite entries passed to eig".into()));
    }

    // Column-major copy for Fortran.
    let mut a_cm = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            a_cm.push(a[[i, j]]);
        }
    }

    let n_i = n as i32;
    let mut wr = vec![0.0f64; n];
    let mut wi = vec![0.0f64; n];
    let mut vl = vec![0.0f64; n * n];
    let mut vr = vec![0.0f64; n * n];
    let mut info: i32 = 0;

    // Workspace query, then the real call.
    let mut work_query = [0.0f64];
    let minus_one: i32 = -1;
    unsafe {
        dgeev_(
            b"V".as_ptr(),
            b"V".as_ptr(),
            &n_i,
            a_cm.as_mut_ptr(),
            &n_i,
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            vl.as_mut_ptr(),
            &n_i,
            vr.as_mut_ptr(),
            &n_i,
            work_query.as_mut_ptr(),
            &minus_one,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("dgeev workspace query failed: info={info}")));
    }
    let lwork = work_query[0] as i32;
    let mut work = vec![0.0f64; lwork as usize];
    unsafe {
        dgeev_(
            b"V".as_ptr(),
            b"V".as_ptr(),
            &n_i,
            a_cm.as_mut_ptr(),
            &n_i,
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            vl.as_mut_ptr(),
            &n_i,
            vr.as_mut_ptr(),
            &n_i,
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("dgeev failed to converge: info={info}")));
    }

    // Unpack LAPACK's real-pair encoding: a conjugate pair (λ, λ̄) at columns
    // (j, j+1) is stored as (Re v, Im v).
    let values: Vec<C64> = wr.iter().zip(&wi).map(|(&re, &im)| C64::new(re, im)).collect();
    let col = |buf: &[f64], j: usize, i: usize| buf[j * n + i];
    let mut right = Array2::<C64>::zeros((n, n));
    let mut left = Array2::<C64>::zeros((n, n));
    let mut j = 0;
    while j < n {
        if wi[j] == 0.0 {
            for i in 0..n {
                right[[i, j]] = C64::new(col(&vr, j, i), 0.0);
                left[[i, j]] = C64::new(col(&vl, j, i), 0.0);
            }
            j += 1;
        } else {
            for i in 0..n {
                let r = C64::new(col(&vr, j, i), col(&vr, j + 1, i));
                let l = C64::new(col(&vl, j, i), col(&vl, j + 1, i));
                right[[i, j]] = r;
                right[[i, j + 1]] = r.conj();
                left[[i, j]] = l;
                left[[i, j + 1]] = l.conj();
            }
            j += 2;
        }
    }

    Ok(Eig { values, right, left })
}

/// Eigenvalues of a complex Hermitian matrix, ascending.
///
/// Uses the real-symmetric embedding [[A, −B], [B, A]] of M = A + iB, whose
/// spectrum is that of M with every eigenvalue doubled; dgeev on the embedding
/// avoids dragging in a second LAPACK driver for the few small Hermitian
/// matrices (reduced densities, transition matrices) that need this.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Invalid("hermitian_eigenvalues needs a square matrix".into()));
    }
    let herm_defect = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (m[[i, j]] - m[[j, i]].conj()).norm())
        .fold(0.0f64, f64::max);
    let scale = m.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if herm_defect > 1e-10 * scale.max(1.0) {
        return Err(Error::Invalid(format!(
            "matrix is not Hermitian (defect {herm_defect:.2e})"
        )));
    }
    let mut emb = Array2::<f64>::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            emb[[i, j]] = m[[i, j]].re;
            emb[[i + n, j + n]] = m[[i, j]].re;
            emb[[i, j + n]] = -m[[i, j]].im;
            emb[[i + n, j]] = m[[i, j]].im;
        }
    }
    let e = eig(&emb)?;
    let mut vals: Vec<f64> = e.values.iter().map(|v| v.re).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Each eigenvalue of M appears twice in the embedding; keep every other.
    Ok(vals.into_iter().step_by(2).collect())
}
