//! Python bindings for the hybrid-ep simulator.
//!
//! One class, `Model`, wraps a parameter set and exposes the main operations:
//! numerical and closed-form spectra, exceptional-point scans, the cat locus,
//! time evolution with observables, transition matrices, and SU(2) Wigner
//! grids. Complex numbers cross the boundary as Python `complex`; matrices as
//! row-major nested lists.
//!
//! Build with `cargo build -p hybrid-ep-py --release`, then import the
//! produced `libhybrid_ep_py.so` renamed to `hybrid_ep_py.so` from anywhere
//! on `sys.path` (`python/smoke_test.py` automates both steps).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hybrid_ep::basis::Parity;
use hybrid_ep::dynamics::{evolve_state, transition_matrix};
use hybrid_ep::model::{build_hamiltonian, initial_product_state};
use hybrid_ep::observables::{reduce_density, squeezing, survival_probability, Subsystem};
use hybrid_ep::spectral::{block_eig, full_spectrum};
use hybrid_ep::wigner::{cat_overlap, equatorial_fringes, multipoles, wigner};
use hybrid_ep::ModelParams;
use ndarray::Array2;
use num_complex::Complex64 as C64;

fn lib_err(e: hybrid_ep::Error) -> PyErr {
    match e {
        hybrid_ep::Error::Invalid(m) => PyValueError::new_err(m),
        hybrid_ep::Error::Numerical(m) => PyRuntimeError::new_err(m),
    }
}

fn parse_parity(name: &str) -> PyResult<Parity> {
    match name {
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        _ => Err(PyValueError::new_err(format!(
            "unknown parity block {name:?}; expected \"even\" or \"odd\""
        ))),
    }
}

fn complex_rows(m: &Array2<C64>) -> Vec<Vec<C64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// The hybrid flux-qubit ⊗ NV-ensemble model at one parameter point.
///
/// Defaults reproduce the working point D = 2.88, E = 0.026, g = 0.02 GHz,
/// Δ = 2D, ε = 0, N = 2, α = 1. Energies are in GHz, times in ns, ħ = 1
/// with no 2π factors.
///
/// Usage from Python:
///
///     import hybrid_ep_py as hep
///     m = hep.Model(asymmetry_alpha=0.824)
///     print(m.spectrum())
///     alpha, spin_norm, im_max = hep.Model().cat_locus()
#[pyclass]
struct Model {
    params: ModelParams,
}

impl Model {
    fn hamiltonian_checked(&self) -> PyResult<hybrid_ep::model::Hamiltonian> {
        build_hamiltonian(&self.params).map_err(lib_err)
    }

    fn state_at(
        &self,
        t: f64,
        k_qb: usize,
        theta: f64,
        phi: f64,
    ) -> PyResult<(hybrid_ep::model::Hamiltonian, ndarray::Array1<C64>, f64, f64)> {
        let h = self.hamiltonian_checked()?;
        let psi0 = initial_product_state(k_qb, theta, phi, &self.params).map_err(lib_err)?;
        let ev = evolve_state(&h, &psi0, t).map_err(lib_err)?;
        let p = survival_probability(&psi0, &ev.unit_norm);
        Ok((h, ev.unit_norm, ev.log_growth, p))
    }
}

#[pymethods]
impl Model {
    /// Create a model; omitted arguments keep their working-point defaults,
    /// `delta` defaults to 2·zero_field_d.
    #[new]
    #[pyo3(signature = (epsilon=0.0, delta=None, zero_field_d=2.88, strain_e=0.026,
                        coupling_g=0.02, asymmetry_alpha=1.0, ensemble_size_n=2))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        epsilon: f64,
        delta: Option<f64>,
        zero_field_d: f64,
        strain_e: f64,
        coupling_g: f64,
        asymmetry_alpha: f64,
        ensemble_size_n: usize,
    ) -> PyResult<Self> {
        let params = ModelParams {
            epsilon,
            delta: delta.unwrap_or(2.0 * zero_field_d),
            zero_field_d,
            strain_e,
            coupling_g,
            asymmetry_alpha,
            ensemble_size_n,
        };
        params.validate().map_err(lib_err)?;
        Ok(Self { params })
    }

    fn __repr__(&self) -> String {
        let p = &self.params;
        format!(
            "Model(epsilon={}, delta={}, zero_field_d={}, strain_e={}, coupling_g={}, \
             asymmetry_alpha={}, ensemble_size_n={})",
            p.epsilon,
            p.delta,
            p.zero_field_d,
            p.strain_e,
            p.coupling_g,
            p.asymmetry_alpha,
            p.ensemble_size_n
        )
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.params.delta
    }

    #[getter]
    fn zero_field_d(&self) -> f64 {
        self.params.zero_field_d
    }

    #[getter]
    fn strain_e(&self) -> f64 {
        self.params.strain_e
    }

    #[getter]
    fn coupling_g(&self) -> f64 {
        self.params.coupling_g
    }

    #[getter]
    fn asymmetry_alpha(&self) -> f64 {
        self.params.asymmetry_alpha
    }

    #[getter]
    fn ensemble_size_n(&self) -> usize {
        self.params.ensemble_size_n
    }

    /// γ = g/E, the coupling-to-strain ratio steering the EP structure.
    #[getter]
    fn gamma(&self) -> PyResult<f64> {
        Ok(self.params.derived().map_err(lib_err)?.gamma)
    }

    /// Full product-space dimension 2(N+1).
    fn dim(&self) -> usize {
        self.params.dim()
    }

    /// Same model with a different asymmetry α.
    fn with_alpha(&self, alpha: f64) -> Self {
        Self { params: self.params.with_alpha(alpha) }
    }

    /// The real Hamiltonian matrix in the parity-sorted product basis.
    fn hamiltonian(&self) -> PyResult<Vec<Vec<f64>>> {
        let h = self.hamiltonian_checked()?;
        Ok(h.matrix.rows().into_iter().map(|r| r.to_vec()).collect())
    }

    /// Basis labels (k_qb, k_S, parity) in matrix order: even block first.
    fn basis(&self) -> PyResult<Vec<(usize, usize, &'static str)>> {
        let h = self.hamiltonian_checked()?;
        Ok(h.layout
            .states()
            .iter()
            .map(|s| (s.k_qb, s.k_s, if s.parity() == 1 { "even" } else { "odd" }))
            .collect())
    }

    /// All 2(N+1) eigenvalues (complex-conjugate pairs appear past the EPs).
    fn spectrum(&self) -> PyResult<Vec<C64>> {
        let h = self.hamiltonian_checked()?;
        Ok(full_spectrum(&h).map_err(lib_err)?.values)
    }

    /// Eigenvalues of one parity block ("even" or "odd").
    fn block_spectrum(&self, parity: &str) -> PyResult<Vec<C64>> {
        let h = self.hamiltonian_checked()?;
        Ok(block_eig(&h, parse_parity(parity)?).map_err(lib_err)?.values)
    }

    /// Closed-form block eigenvalues from the depressed cubic (N = 2, ε = 0).
    fn analytic_block_spectrum(&self, parity: &str) -> PyResult<Vec<C64>> {
        let vals =
            hybrid_ep::analytic::analytic_block_spectrum(&self.params, parse_parity(parity)?)
                .map_err(lib_err)?;
        Ok(vals.to_vec())
    }

    /// Exceptional points of one block over α ∈ [lo, hi] via discriminant
    /// bisection (N = 2 route). Returns (alpha, eigenvalue, residual) tuples.
    #[pyo3(signature = (lo=0.0, hi=2.0, steps=400, parity="even"))]
    fn ep_roots(
        &self,
        lo: f64,
        hi: f64,
        steps: usize,
        parity: &str,
    ) -> PyResult<Vec<(f64, C64, f64)>> {
        let roots =
            hybrid_ep::epscan::discriminant_roots(&self.params, parse_parity(parity)?, lo, hi, steps)
                .map_err(lib_err)?;
        Ok(roots.into_iter().map(|r| (r.alpha, r.eigenvalue, r.discriminant_residual)).collect())
    }

    /// The α where the steady ⟨S_z⟩ changes sign (Schrödinger-cat locus).
    /// Returns (alpha, steady |⟨S⟩|, max Im E).
    #[pyo3(signature = (lo=0.70, hi=0.90, t_probe=6000.0))]
    fn cat_locus(&self, lo: f64, hi: f64, t_probe: f64) -> PyResult<(f64, f64, f64)> {
        let locus = hybrid_ep::epscan::cat_locus(&self.params, lo, hi, t_probe).map_err(lib_err)?;
        Ok((locus.alpha, locus.steady_spin_norm, locus.im_max))
    }

    /// Evolve |k_qb⟩ ⊗ |θ, φ⟩ to time t. Returns the unit-norm state, the
    /// logged norm growth ln‖F ψ₀‖, and the survival probability |⟨ψ₀|ψ̂(t)⟩|².
    #[pyo3(signature = (t, k_qb=0, theta=std::f64::consts::FRAC_PI_2, phi=0.0))]
    fn evolve(&self, t: f64, k_qb: usize, theta: f64, phi: f64) -> PyResult<(Vec<C64>, f64, f64)> {
        let (_, state, log_growth, p) = self.state_at(t, k_qb, theta, phi)?;
        Ok((state.to_vec(), log_growth, p))
    }

    /// Spin observables of the NV reduction at time t: mean spin, squeezing
    /// parameters, subsystem purities, survival, norm growth.
    #[pyo3(signature = (t, k_qb=0, theta=std::f64::consts::FRAC_PI_2, phi=0.0))]
    fn observables<'py>(
        &self,
        py: Python<'py>,
        t: f64,
        k_qb: usize,
        theta: f64,
        phi: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let (h, state, log_growth, p) = self.state_at(t, k_qb, theta, phi)?;
        let nv = reduce_density(&state, &h.layout, Subsystem::Nv).map_err(lib_err)?;
        let qb = reduce_density(&state, &h.layout, Subsystem::Qubit).map_err(lib_err)?;
        let sq = squeezing(&nv.rho).map_err(lib_err)?;
        let d = PyDict::new(py);
        d.set_item("t", t)?;
        d.set_item("survival", p)?;
        d.set_item("log_growth", log_growth)?;
        d.set_item("mean_spin", (sq.mean_spin[0], sq.mean_spin[1], sq.mean_spin[2]))?;
        d.set_item("zeta2_min", sq.zeta2_min)?;
        d.set_item("zeta2_max", sq.zeta2_max)?;
        d.set_item("degenerate", sq.degenerate)?;
        d.set_item("purity_nv", nv.purity)?;
        d.set_item("purity_qubit", qb.purity)?;
        Ok(d)
    }

    /// NV reduction ρ_NV(t) as an (N+1)×(N+1) nested list.
    #[pyo3(signature = (t, k_qb=0, theta=std::f64::consts::FRAC_PI_2, phi=0.0))]
    fn reduced_nv(&self, t: f64, k_qb: usize, theta: f64, phi: f64) -> PyResult<Vec<Vec<C64>>> {
        let (h, state, _, _) = self.state_at(t, k_qb, theta, phi)?;
        let nv = reduce_density(&state, &h.layout, Subsystem::Nv).map_err(lib_err)?;
        Ok(complex_rows(&nv.rho))
    }

    /// Trace-normalized transition matrix P(t) = F†F/tr F†F.
    fn transition_matrix(&self, t: f64) -> PyResult<Vec<Vec<C64>>> {
        let h = self.hamiltonian_checked()?;
        Ok(complex_rows(&transition_matrix(&h, t).map_err(lib_err)?.p))
    }

    /// SU(2) Wigner function of ρ_NV(t): (thetas, phis, values[i][j]).
    #[pyo3(signature = (t, k_qb=0, theta=std::f64::consts::FRAC_PI_2, phi=0.0,
                        n_theta=64, n_phi=128))]
    #[allow(clippy::type_complexity)]
    fn wigner(
        &self,
        t: f64,
        k_qb: usize,
        theta: f64,
        phi: f64,
        n_theta: usize,
        n_phi: usize,
    ) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
        let (h, state, _, _) = self.state_at(t, k_qb, theta, phi)?;
        let nv = reduce_density(&state, &h.layout, Subsystem::Nv).map_err(lib_err)?;
        let grid = wigner(&nv.rho, n_theta, n_phi).map_err(lib_err)?;
        let values = grid.values.rows().into_iter().map(|r| r.to_vec()).collect();
        Ok((grid.thetas, grid.phis, values))
    }

    /// Cat diagnostics of ρ_NV(t): antipodal-pair decomposition weights,
    /// detected azimuth, and the equatorial Wigner fringe moduli.
    #[pyo3(signature = (t, k_qb=0, theta=std::f64::consts::FRAC_PI_2, phi=0.0))]
    fn cat_report<'py>(
        &self,
        py: Python<'py>,
        t: f64,
        k_qb: usize,
        theta: f64,
        phi: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let (h, state, _, _) = self.state_at(t, k_qb, theta, phi)?;
        let nv = reduce_density(&state, &h.layout, Subsystem::Nv).map_err(lib_err)?;
        let rep = cat_overlap(&nv.rho).map_err(lib_err)?;
        let fr = equatorial_fringes(&multipoles(&nv.rho).map_err(lib_err)?);
        let d = PyDict::new(py);
        d.set_item("azimuth", rep.azimuth)?;
        d.set_item("weight_cat_even", rep.weight_cat_even)?;
        d.set_item("weight_cat_odd", rep.weight_cat_odd)?;
        d.set_item("weight_plus_state", rep.weight_plus_state)?;
        d.set_item("combined", rep.combined)?;
        d.set_item("fringe_moduli", fr.moduli)?;
        d.set_item("fringes_dominant", fr.dominant_top)?;
        Ok(d)
    }
}

/// Spin coherent state |θ, φ⟩ for ensemble size n, as N+1 amplitudes.
#[pyfunction]
fn coherent_state(theta: f64, phi: f64, n: usize) -> PyResult<Vec<C64>> {
    Ok(hybrid_ep::model::coherent_state(theta, phi, n).map_err(lib_err)?.to_vec())
}

/// Kitagawa–Ueda squeezing parameters (ζ²_min, ζ²_max, degenerate) of a
/// collective-spin density matrix given as a square nested list.
#[pyfunction]
fn squeezing_of(rho: Vec<Vec<C64>>) -> PyResult<(f64, f64, bool)> {
    let dim = rho.len();
    if dim == 0 || rho.iter().any(|r| r.len() != dim) {
        return Err(PyValueError::new_err("rho must be a square nested list"));
    }
    let mut m = Array2::<C64>::zeros((dim, dim));
    for (i, row) in rho.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[[i, j]] = v;
        }
    }
    let sq = squeezing(&m).map_err(lib_err)?;
    Ok((sq.zeta2_min, sq.zeta2_max, sq.degenerate))
}

#[pymodule]
fn hybrid_ep_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(coherent_state, m)?)?;
    m.add_function(wrap_pyfunction!(squeezing_of, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
