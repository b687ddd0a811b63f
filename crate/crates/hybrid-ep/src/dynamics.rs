//! Time evolution under the non-Hermitian Hamiltonian.
//!
//! Three independent propagator routes are kept deliberately separate so they
//! can cross-check each other:
//!
//! - **spectral**: F(t) = Σ_k |R_k⟩⟨L_k| e^{−iE_k t} from the eigendecomposition;
//!   fast and reusable over t, but refuses to run near an exceptional point
//!   (the eigenvector matrix becomes numerically singular);
//! - **jordan**: spectral projectors from resolvent contour integrals per
//!   eigenvalue cluster, with the in-cluster exponential summed as a series in
//!   the (near-)nilpotent part — exact through EPs, reproducing the t·e^{−iEt}
//!   secular terms;
//! - **exponential**: Padé scaling-and-squaring of exp(−iHt), which never
//!   looks at the spectrum at all.
//!
//! Growing modes (Im E > 0) are handled in a rescaled frame: every propagator
//! carries `scaled` = F(t)·e^{−log_scale} with log_scale = t·max Im E, so the
//! stored matrix stays O(1) while F itself may overflow doubles near
//! t ≈ 700/Im E_max. Normalized quantities (transition matrix, evolved unit
//! states) never need the raw F.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::linalg::{eig, lu::Lu, matrix_exp};
use crate::model::Hamiltonian;
use crate::{Error, Result};

/// Below this min_k |⟨L_k|R_k⟩| the spectral route refuses to invert the
/// eigenvector matrix.
pub const BIORTH_SAFE: f64 = 1e-6;
/// |log_scale| beyond which a dense F(t) would leave the double range
/// (ln 1e300 ≈ 690).
pub const LOG_SCALE_FLAG: f64 = 690.0;

/// Which construction produced a propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    Spectral,
    Jordan,
    Exponential,
}

/// The evolution kernel F(t) in the rescaled frame.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub t: f64,
    /// F(t) · e^{−log_scale}.
    pub scaled: Array2<C64>,
    /// ln of the positive factor taken out of F.
    pub log_scale: f64,
    pub path: Path,
}

impl Propagator {
    /// The raw F(t); errors when the undone rescaling would overflow.
    pub fn dense(&self) -> Result<Array2<C64>> {
        if self.log_scale.abs() > LOG_SCALE_FLAG {
            return Err(Error::Numerical(format!(
                "propagator rescaling e^{:.1} exceeds the double range; \
                 use normalized quantities instead",
                self.log_scale
            )));
        }
        let f = self.log_scale.exp();
        Ok(self.scaled.mapv(|v| v * f))
    }

    /// F(t)·v in the rescaled frame (true result is e^{log_scale} × this).
    pub fn apply_scaled(&self, v: &Array1<C64>) -> Array1<C64> {
        self.scaled.dot(v)
    }
}

/// Relative Frobenius difference of two propagators at the same t, with the
/// scale frames reconciled.
pub fn relative_difference(a: &Propagator, b: &Propagator) -> f64 {
    let shift = (b.log_scale - a.log_scale).exp();
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (x, y) in a.scaled.iter().zip(b.scaled.iter()) {
        num += (x - y * shift).norm_sqr();
        den += x.norm_sqr();
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

// ---------------------------------------------------------------------------
// Spectral route
// ---------------------------------------------------------------------------

/// Reusable eigendecomposition kernel: propagators at any t are one
/// matrix-sandwich away.
#[derive(Debug, Clone)]
pub struct SpectralKernel {
    pub values: Vec<C64>,
    right: Array2<C64>,
    right_inv: Array2<C64>,
    pub im_max: f64,
    pub biorth_min: f64,
}

impl SpectralKernel {
    pub fn new(m: &Array2<f64>) -> Result<Self> {
        let e = eig(m)?;
        let biorth_min = e.biorth_min();
        if biorth_min < BIORTH_SAFE {
            return Err(Error::Numerical(format!(
                "biorthogonality residual {biorth_min:.2e} below {BIORTH_SAFE:.0e}: \
                 eigenvectors near coalescence; use the jordan or exponential path"
            )));
        }
        let right_inv = Lu::factor(&e.right)?.inverse();
        let im_max = e.max_imag();
        Ok(Self { values: e.values, right: e.right, right_inv, im_max, biorth_min })
    }

    /// F(t) in the rescaled frame, log_scale = t·max Im E.
    pub fn propagator(&self, t: f64) -> Propagator {
        let log_scale = self.im_max * t;
        let n = self.values.len();
        let mut cols = self.right.clone();
        for (k, lam) in self.values.iter().enumerate() {
            // e^{−iλt−log_scale}: magnitude e^{(Im λ)t − log_scale} ≤ 1.
            let factor = C64::from_polar((lam.im * t - log_scale).exp(), -lam.re * t);
            for i in 0..n {
                cols[[i, k]] *= factor;
            }
        }
        Propagator { t, scaled: cols.dot(&self.right_inv), log_scale, path: Path::Spectral }
    }
}

// ---------------------------------------------------------------------------
// Jordan-safe route (resolvent contour projectors)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Cluster {
    center: C64,
    /// Spectral projector P_C from the contour integral.
    proj: Array2<C64>,
    /// (H − center)·P_C: strictly nilpotent at an EP, tiny otherwise.
    nil: Array2<C64>,
}

/// Propagator kernel built from resolvent-contour spectral projectors.
///
/// Eigenvalues within `cluster_tol` of each other (transitively) share one
/// projector; the in-cluster factor e^{−i(H−Ē)t} is summed as a power series
/// that terminates on the nilpotent part. Robust at and near EPs.
#[derive(Debug, Clone)]
pub struct JordanKernel {
    clusters: Vec<Cluster>,
    pub im_max: f64,
    dim: usize,
}

/// Cluster tolerance heuristic: wide enough to absorb the √ε eigenvalue
/// splitting that dgeev reports at a numerically exact EP, narrow enough that
/// the in-cluster series stays short for the requested horizon.
pub fn jordan_cluster_tol(scale: f64, t: f64) -> f64 {
    (2.0 / t.max(1.0)).clamp(1e-9, 1e-4 * scale.max(1.0))
}

fn connected_clusters(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut comp: Vec<usize> = (0..n).collect();
    // Tiny n: repeated merging is fine.
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in i + 1..n {
                if (values[i] - values[j]).norm() <= tol && comp[i] != comp[j] {
                    let (a, b) = (comp[i].min(comp[j]), comp[i].max(comp[j]));
                    for c in comp.iter_mut() {
                        if *c == b {
                            *c = a;
                        }
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for i in 0..n {
        match seen.iter().position(|&s| s == comp[i]) {
            Some(g) => groups[g].push(i),
            None => {
                seen.push(comp[i]);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

impl JordanKernel {
    pub fn new(m: &Array2<f64>, cluster_tol: f64) -> Result<Self> {
        let n = m.nrows();
        let e = eig(m)?;
        let scale = e.values.iter().map(|v| v.norm()).fold(1.0f64, f64::max);
        let groups = connected_clusters(&e.values, cluster_tol);
        let mc = m.mapv(|v| C64::new(v, 0.0));

        let mut clusters = Vec::with_capacity(groups.len());
        for group in &groups {
            let center =
                group.iter().map(|&k| e.values[k]).sum::<C64>() / group.len() as f64;
            let r_own = group
                .iter()
                .map(|&k| (e.values[k] - center).norm())
                .fold(0.0f64, f64::max);
            let d_other = e
                .values
                .iter()
                .enumerate()
                .filter(|(k, _)| !group.contains(k))
                .map(|(_, v)| (v - center).norm())
                .fold(f64::INFINITY, f64::min);
            let radius = if d_other.is_finite() {
                (r_own + d_other) / 2.0
            } else {
                r_own * 2.0 + scale.max(1.0)
            };
            if radius <= r_own * 1.05 {
                return Err(Error::Numerical(
                    "eigenvalue clusters too tangled for contour separation".into(),
                ));
            }

            // Trapezoid contour: P = (r/M) Σ_j e^{iθ_j} (z_j − H)⁻¹,
            // exponentially convergent in M for this circle geometry.
            const M: usize = 64;
            let mut proj = Array2::<C64>::zeros((n, n));
            for j in 0..M {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / M as f64;
                let w = C64::from_polar(radius, theta);
                let z = center + w;
                let mut zm = mc.mapv(|v| -v);
                for i in 0..n {
                    zm[[i, i]] += z;
                }
                let inv = Lu::factor(&zm)?.inverse();
                proj = proj + inv.mapv(|v| v * w / M as f64);
            }
            let shifted = {
                let mut s = mc.clone();
                for i in 0..n {
                    s[[i, i]] -= center;
                }
                s
            };
            let nil = shifted.dot(&proj);
            clusters.push(Cluster { center, proj, nil });
        }

        // The projectors must resolve the identity.
        let mut resid = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let sum: C64 = clusters.iter().map(|c| c.proj[[i, j]]).sum();
                let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                resid = resid.max((sum - expect).norm());
            }
        }
        if resid > 1e-8 {
            return Err(Error::Numerical(format!(
                "contour projectors fail to resolve identity (residual {resid:.2e})"
            )));
        }

        Ok(Self { clusters, im_max: e.max_imag(), dim: n })
    }

    /// F(t) = Σ_C e^{−iĒ_C t} Σ_m (−it)^m/m! · N_C^m P_C in the rescaled frame.
    pub fn propagator(&self, t: f64) -> Result<Propagator> {
        let log_scale = self.im_max * t;
        let mut f = Array2::<C64>::zeros((self.dim, self.dim));
        for cl in &self.clusters {
            let factor = C64::from_polar((cl.center.im * t - log_scale).exp(), -cl.center.re * t);
            let mut series = cl.proj.clone();
            let mut term = cl.proj.clone();
            let mut converged = false;
            for m in 1..=120usize {
                term = cl.nil.dot(&term).mapv(|v| v * C64::new(0.0, -t / m as f64));
                let tn = term.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
                series = series + &term;
                let sn = series.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
                if tn <= 1e-16 * (1.0 + sn) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical(
                    "in-cluster exponential series failed to converge; \
                     cluster spread × t too large"
                        .into(),
                ));
            }
            f = f + series.mapv(|v| v * factor);
        }
        Ok(Propagator { t, scaled: f, log_scale, path: Path::Jordan })
    }
}

// ---------------------------------------------------------------------------
// Route selection
// ---------------------------------------------------------------------------

/// One propagator at time t on a bare matrix.
pub fn propagate_matrix(m: &Array2<f64>, t: f64, path: Path) -> Result<Propagator> {
    if t < 0.0 {
        return Err(Error::Invalid(format!("propagation time must be ≥ 0, got {t}")));
    }
    match path {
        Path::Spectral => Ok(SpectralKernel::new(m)?.propagator(t)),
        Path::Jordan => {
            let e = eig(m)?;
            let scale = e.values.iter().map(|v| v.norm()).fold(1.0f64, f64::max);
            JordanKernel::new(m, jordan_cluster_tol(scale, t))?.propagator(t)
        }
        Path::Exponential => {
            let a = m.mapv(|v| C64::new(0.0, -v * t));
            let f = matrix_exp(&a)?;
            if !f.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Numerical(
                    "exponential propagator overflowed; use the spectral or jordan path".into(),
                ));
            }
            Ok(Propagator { t, scaled: f, log_scale: 0.0, path: Path::Exponential })
        }
    }
}

/// Propagator for a model Hamiltonian.
pub fn propagate(h: &Hamiltonian, t: f64, path: Path) -> Result<Propagator> {
    propagate_matrix(&h.matrix, t, path)
}

/// Reusable kernel choosing spectral when safe, jordan otherwise.
#[derive(Debug, Clone)]
pub enum AutoKernel {
    Spectral(SpectralKernel),
    Jordan(JordanKernel),
}

impl AutoKernel {
    /// `t_horizon` is the largest time the kernel will be asked for (sets the
    /// jordan clustering tolerance).
    pub fn new(m: &Array2<f64>, t_horizon: f64) -> Result<Self> {
        match SpectralKernel::new(m) {
            Ok(k) => Ok(AutoKernel::Spectral(k)),
            Err(_) => {
                let e = eig(m)?;
                let scale = e.values.iter().map(|v| v.norm()).fold(1.0f64, f64::max);
                Ok(AutoKernel::Jordan(JordanKernel::new(
                    m,
                    jordan_cluster_tol(scale, t_horizon),
                )?))
            }
        }
    }

    pub fn propagator(&self, t: f64) -> Result<Propagator> {
        match self {
            AutoKernel::Spectral(k) => Ok(k.propagator(t)),
            AutoKernel::Jordan(k) => k.propagator(t),
        }
    }
}

// ---------------------------------------------------------------------------
// Transition matrix and state evolution
// ---------------------------------------------------------------------------

/// P(t) = N²(t) F†F with N(t) = (Tr F†F)^{−1/2}: Hermitian, positive
/// semidefinite, unit trace. Complex in general for α ≠ 1 (the diagonal is
/// always real and holds the basis-state transition probabilities).
#[derive(Debug, Clone)]
pub struct TransitionRecord {
    pub t: f64,
    pub p: Array2<C64>,
    /// N(t); underflows to 0 for strongly growing modes — see `log_norm_factor`.
    pub norm_factor: f64,
    pub log_norm_factor: f64,
}

/// Build the transition record from any propagator (scale frame cancels).
pub fn transition_from_propagator(f: &Propagator) -> TransitionRecord {
    let fs = &f.scaled;
    let n = fs.nrows();
    let mut g = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += fs[[k, i]].conj() * fs[[k, j]];
            }
            g[[i, j]] = acc;
        }
    }
    let tr: f64 = (0..n).map(|i| g[[i, i]].re).sum();
    let p = g.mapv(|v| v / tr);
    let log_norm_factor = -f.log_scale - 0.5 * tr.ln();
    TransitionRecord { t: f.t, p, norm_factor: log_norm_factor.exp(), log_norm_factor }
}

/// P(t) for a model Hamiltonian (spectral route, jordan fallback near EPs).
pub fn transition_matrix(h: &Hamiltonian, t: f64) -> Result<TransitionRecord> {
    if t < 0.0 {
        return Err(Error::Invalid(format!("time must be ≥ 0, got {t}")));
    }
    let f = AutoKernel::new(&h.matrix, t)?.propagator(t)?;
    Ok(transition_from_propagator(&f))
}

/// Evolved state in both normalization conventions.
#[derive(Debug, Clone)]
pub struct EvolvedState {
    pub t: f64,
    /// N(t)·F|ψ₀⟩, the trace-normalized variant (not unit norm in general).
    pub trace_normalized: Array1<C64>,
    /// F|ψ₀⟩/‖F|ψ₀⟩‖; the default for expectation values.
    pub unit_norm: Array1<C64>,
    /// ln ‖F|ψ₀⟩‖, the raw growth/decay factor.
    pub log_growth: f64,
}

/// Evolve from a propagator (any route).
pub fn evolve_from_propagator(f: &Propagator, psi0: &Array1<C64>) -> Result<EvolvedState> {
    let v = f.apply_scaled(psi0);
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Numerical("evolved state collapsed or overflowed".into()));
    }
    let rec = transition_from_propagator(f);
    // N(t)·F·ψ = (e^{log_scale}·F_scaled·ψ)·e^{log_norm_factor}; the scale
    // frame cancels against the definition of N(t).
    let tn_factor = (rec.log_norm_factor + f.log_scale).exp();
    Ok(EvolvedState {
        t: f.t,
        trace_normalized: v.mapv(|c| c * tn_factor),
        unit_norm: v.mapv(|c| c / norm),
        log_growth: norm.ln() + f.log_scale,
    })
}

/// Evolve a unit-norm initial state to time t.
pub fn evolve_state(h: &Hamiltonian, psi0: &Array1<C64>, t: f64) -> Result<EvolvedState> {
    let f = AutoKernel::new(&h.matrix, t)?.propagator(t)?;
    evolve_from_propagator(&f, psi0)
}

// ---------------------------------------------------------------------------
// Independent ODE oracle (Dormand–Prince 5(4))
// ---------------------------------------------------------------------------

/// Trajectory from direct integration of d|ψ⟩/dt = −iH|ψ⟩.
#[derive(Debug, Clone)]
pub struct OdeTrajectory {
    pub t_grid: Vec<f64>,
    /// Unit-normalized states at each grid time.
    pub states: Vec<Array1<C64>>,
    /// Accumulated ln of the factored-out norm growth at each grid time.
    pub log_growth: Vec<f64>,
}

struct Dp5 {
    h_mat: Array2<f64>,
}

impl Dp5 {
    fn deriv(&self, y: &Array1<C64>) -> Array1<C64> {
        let n = y.len();
        let mut out = Array1::<C64>::zeros(n);
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += y[j] * self.h_mat[[i, j]];
            }
            out[i] = C64::new(acc.im, -acc.re); // −i·(H y)
        }
        out
    }
}

/// Integrate on `t_grid` (ascending, t_grid[0] ≥ 0 is the start point where
/// ψ = ψ₀). Stored states are renormalized; growth is logged separately.
pub fn ode_oracle_matrix(
    m: &Array2<f64>,
    psi0: &Array1<C64>,
    t_grid: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<OdeTrajectory> {
    if t_grid.is_empty() {
        return Err(Error::Invalid("empty time grid".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("time grid must be strictly ascending".into()));
    }
    let sys = Dp5 { h_mat: m.clone() };
    let mut y = psi0.clone();
    let mut log_growth = 0.0f64;
    let mut t = t_grid[0];
    let mut states = Vec::with_capacity(t_grid.len());
    let mut growths = Vec::with_capacity(t_grid.len());

    let push = |states: &mut Vec<Array1<C64>>, growths: &mut Vec<f64>, y: &Array1<C64>, lg: f64| {
        let norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        states.push(y.mapv(|c| c / norm));
        growths.push(lg + norm.ln());
    };
    push(&mut states, &mut growths, &y, log_growth);

    // Dormand–Prince 5(4) tableau.
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    // 5th-order weights equal the last A row (FSAL); embedded 4th-order:
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    const B5: [f64; 7] =
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];

    let scale_freq = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-12);
    let mut h = (0.1 / scale_freq).min(if t_grid.len() > 1 { t_grid[1] - t_grid[0] } else { 1.0 });
    let mut steps: u64 = 0;
    const MAX_STEPS: u64 = 50_000_000;

    for (gi, &t_target) in t_grid.iter().enumerate().skip(1) {
        while t < t_target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Numerical(format!(
                    "ODE oracle exceeded {MAX_STEPS} steps at t = {t}"
                )));
            }
            let h_step = h.min(t_target - t);
            let k1 = sys.deriv(&y);
            let mut ks: Vec<Array1<C64>> = vec![k1];
            for stage in 0..6 {
                let mut arg = y.clone();
                for (j, kj) in ks.iter().enumerate() {
                    let a = A[stage][j];
                    if a != 0.0 {
                        arg = arg + kj.mapv(|c| c * (a * h_step));
                    }
                }
                ks.push(sys.deriv(&arg));
            }
            let mut y5 = y.clone();
            let mut err = Array1::<C64>::zeros(y.len());
            for (j, kj) in ks.iter().enumerate() {
                if B5[j] != 0.0 {
                    y5 = y5 + kj.mapv(|c| c * (B5[j] * h_step));
                }
                let db = B5[j] - B4[j];
                if db != 0.0 {
                    err = err + kj.mapv(|c| c * (db * h_step));
                }
            }
            // Error measured against the state scale.
            let mut err_ratio = 0.0f64;
            for i in 0..y.len() {
                let sc = atol + rtol * y[i].norm().max(y5[i].norm());
                err_ratio = err_ratio.max(err[i].norm() / sc);
            }
            if err_ratio <= 1.0 {
                t += h_step;
                y = y5;
                // Keep the carried amplitude O(1); log the growth.
                let norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if !(1e-5..=1e5).contains(&norm) {
                    if norm == 0.0 || !norm.is_finite() {
                        return Err(Error::Numerical(format!(
                            "ODE oracle state degenerated at t = {t}"
                        )));
                    }
                    y = y.mapv(|c| c / norm);
                    log_growth += norm.ln();
                }
            }
            let factor = if err_ratio > 0.0 {
                (0.9 * err_ratio.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h = (h_step * factor).max(1e-13 * (t_target - t_grid[0]).max(1.0));
            if h < 1e-12 * (t_target - t_grid[0]).max(1.0) && err_ratio > 1.0 {
                return Err(Error::Numerical(format!(
                    "ODE oracle step size collapsed at t = {t}"
                )));
            }
        }
        let _ = gi;
        push(&mut states, &mut growths, &y, log_growth);
    }

    Ok(OdeTrajectory { t_grid: t_grid.to_vec(), states, log_growth: growths })
}

/// ODE oracle with default tolerances tuned for 1e−7-level agreement with the
/// propagator routes.
pub fn ode_oracle(h: &Hamiltonian, psi0: &Array1<C64>, t_grid: &[f64]) -> Result<OdeTrajectory> {
    ode_oracle_matrix(&h.matrix, psi0, t_grid, 1e-10, 1e-12)
}

// ---------------------------------------------------------------------------
// Non-exponential decay witness
// ---------------------------------------------------------------------------

/// Result of the decay-law comparison on the slowest-decaying P(t) diagonal.
#[derive(Debug, Clone)]
pub enum Witness {
    /// Nothing decays (real spectrum): the comparison is meaningless.
    NotApplicable { reason: String },
    Fit(WitnessFit),
}

#[derive(Debug, Clone)]
pub struct WitnessFit {
    /// Which diagonal entry was fitted.
    pub diagonal: usize,
    /// Sum of squared residuals, plain exponential model ln p = a + b·t.
    pub exp_ssr: f64,
    /// Best SSR of the polynomial-prefactor model
    /// ln p = a + b·t + c·ln(1 + (t/t₀)²) over the t₀ scan.
    pub poly_ssr: f64,
    /// exp_ssr / poly_ssr: ≥ 10 flags clearly non-exponential decay.
    pub ratio: f64,
    pub t0: f64,
    pub poly_coeff: f64,
}

/// Least squares for y ≈ Σ_k c_k·basis_k(t) with tiny k (normal equations).
fn lsq_fit(ts: &[f64], ys: &[f64], basis: &[&dyn Fn(f64) -> f64]) -> (Vec<f64>, f64) {
    let k = basis.len();
    let mut ata = vec![vec![0.0f64; k]; k];
    let mut atb = vec![0.0f64; k];
    for (&t, &y) in ts.iter().zip(ys) {
        let row: Vec<f64> = basis.iter().map(|f| f(t)).collect();
        for i in 0..k {
            for j in 0..k {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    // Gaussian elimination with partial pivoting on the k×k system.
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&a, &b| ata[a][col].abs().partial_cmp(&ata[b][col].abs()).unwrap())
            .unwrap();
        ata.swap(col, piv);
        atb.swap(col, piv);
        let d = ata[col][col];
        for r in col + 1..k {
            let f = ata[r][col] / d;
            for c in col..k {
                ata[r][c] -= f * ata[col][c];
            }
            atb[r] -= f * atb[col];
        }
    }
    let mut coef = vec![0.0f64; k];
    for r in (0..k).rev() {
        let mut acc = atb[r];
        for c in r + 1..k {
            acc -= ata[r][c] * coef[c];
        }
        coef[r] = acc / ata[r][r];
    }
    let ssr = ts
        .iter()
        .zip(ys)
        .map(|(&t, &y)| {
            let fit: f64 = basis.iter().zip(&coef).map(|(f, c)| c * f(t)).sum();
            (y - fit).powi(2)
        })
        .sum();
    (coef, ssr)
}

/// Fit the decay law of P(t)'s slowest-decaying diagonal entry.
///
/// Exponential decay means ln p linear in t; at an exceptional point the
/// secular t-terms of the propagator put a polynomial prefactor on the decay,
/// captured by the extra ln(1+(t/t₀)²) basis function. Entries that grow
/// toward a steady value (EP pumping) are excluded from the candidate set.
pub fn witness_on_matrix(m: &Array2<f64>, t_grid: &[f64]) -> Result<Witness> {
    if t_grid.len() < 16 {
        return Err(Error::Invalid("witness needs ≥ 16 grid points".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("time grid must be strictly ascending".into()));
    }
    let t_max = *t_grid.last().unwrap();
    let kernel = AutoKernel::new(m, t_max)?;
    let n = m.nrows();
    let mut diags: Vec<Vec<f64>> = vec![Vec::with_capacity(t_grid.len()); n];
    for &t in t_grid {
        let rec = transition_from_propagator(&kernel.propagator(t)?);
        for j in 0..n {
            diags[j].push(rec.p[[j, j]].re);
        }
    }

    // Decay detection: windowed max over the last fifth at most half the
    // windowed max over the first fifth.
    let w = (t_grid.len() / 5).max(1);
    let win_max = |s: &[f64]| s.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut slowest: Option<(usize, f64)> = None;
    for (j, series) in diags.iter().enumerate() {
        let first = win_max(&series[..w]);
        let last = win_max(&series[series.len() - w..]);
        if first > 0.0 && last < 0.5 * first {
            let ratio = last / first;
            if slowest.map(|(_, r)| ratio > r).unwrap_or(true) {
                slowest = Some((j, ratio));
            }
        }
    }
    let Some((j, _)) = slowest else {
        return Ok(Witness::NotApplicable {
            reason: "no decaying transition-matrix diagonal (real spectrum)".into(),
        });
    };

    let ys: Vec<f64> = diags[j].iter().map(|&p| p.max(1e-280).ln()).collect();
    let one = |_t: f64| 1.0;
    let lin = |t: f64| t;
    let (_, exp_ssr) = lsq_fit(t_grid, &ys, &[&one, &lin]);

    let fit_at = |t0: f64| -> (f64, f64) {
        let log_term = move |t: f64| (t / t0).powi(2).ln_1p();
        let (coef, ssr) = lsq_fit(t_grid, &ys, &[&one, &lin, &log_term]);
        (ssr, coef[2])
    };
    let mut best: Option<(f64, f64, f64)> = None; // (ssr, t0, c)
    let lo = (t_max * 1e-3).max(1e-6);
    let hi = t_max * 10.0;
    let n_scan = 72;
    for i in 0..n_scan {
        let t0 = lo * (hi / lo).powf(i as f64 / (n_scan - 1) as f64);
        let (ssr, c) = fit_at(t0);
        if best.map(|(s, _, _)| ssr < s).unwrap_or(true) {
            best = Some((ssr, t0, c));
        }
    }
    let (_, t0_grid, _) = best.unwrap();
    // Golden-section refinement of t₀ around the best scan point: the scan
    // spacing alone would cap the achievable SSR ratio.
    let step = (hi / lo).powf(1.0 / (n_scan - 1) as f64);
    let (mut a, mut b) = ((t0_grid / step).ln(), (t0_grid * step).ln());
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let (x1, x2) = (b - gr * (b - a), a + gr * (b - a));
        if fit_at(x1.exp()).0 < fit_at(x2.exp()).0 {
            b = x2;
        } else {
            a = x1;
        }
    }
    let t0 = ((a + b) / 2.0).exp();
    let (poly_ssr, poly_coeff) = fit_at(t0);
    let (poly_ssr, t0, poly_coeff) = if poly_ssr <= best.unwrap().0 {
        (poly_ssr, t0, poly_coeff)
    } else {
        best.unwrap()
    };
    Ok(Witness::Fit(WitnessFit {
        diagonal: j,
        exp_ssr,
        poly_ssr,
        ratio: exp_ssr / poly_ssr.max(f64::MIN_POSITIVE),
        t0,
        poly_coeff,
    }))
}

/// Decay-law witness for a model Hamiltonian.
pub fn nonexponential_witness(h: &Hamiltonian, t_grid: &[f64]) -> Result<Witness> {
    witness_on_matrix(&h.matrix, t_grid)
}

// ---------------------------------------------------------------------------
// Recurrence analysis (periodic and almost-periodic signals)
// ---------------------------------------------------------------------------

/// Pairwise |λ_i − λ_j| above `tol`, ascending.
pub fn spectral_gaps(values: &[C64], tol: f64) -> Vec<f64> {
    let mut gaps = Vec::new();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let g = (values[i] - values[j]).norm();
            if g > tol {
                gaps.push(g);
            }
        }
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    gaps
}

/// Worst phase misalignment max_i |g_i·T mod 2π| (wrapped to (−π, π]).
pub fn phase_residual(gaps: &[f64], t: f64) -> f64 {
    gaps.iter()
        .map(|g| {
            let ph = (g * t).rem_euclid(2.0 * std::f64::consts::PI);
            ph.min(2.0 * std::f64::consts::PI - ph)
        })
        .fold(0.0, f64::max)
}

/// Common near-period of a set of incommensurate-looking gaps: walks the
/// continued-fraction convergents of the gap ratios against the smallest gap
/// and returns the first T where every gap phase-aligns within `phase_tol`.
pub fn commensurate_period(gaps: &[f64], phase_tol: f64, max_q: u64) -> Option<f64> {
    if gaps.is_empty() {
        return None;
    }
    let base = gaps[0];
    let two_pi = 2.0 * std::f64::consts::PI;
    // Candidate multipliers: convergent denominators of each gap/base ratio.
    let mut candidates: Vec<u64> = vec![1];
    for &g in &gaps[1..] {
        let mut x = g / base;
        let (mut h0, mut h1, mut k0, mut k1): (u64, u64, u64, u64) = (1, x.floor() as u64, 0, 1);
        x -= x.floor();
        for _ in 0..40 {
            if x < 1e-15 || k1 > max_q {
                break;
            }
            x = 1.0 / x;
            let a = x.floor() as u64;
            let (h2, k2) = (a.checked_mul(h1)?.checked_add(h0)?, a.checked_mul(k1)?.checked_add(k0)?);
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            candidates.push(k1);
            x -= x.floor();
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    for q in candidates {
        if q > max_q {
            break;
        }
        let t = two_pi * q as f64 / base;
        if phase_residual(gaps, t) < phase_tol {
            return Some(t);
        }
    }
    None
}

/// Best near-recurrence lag of the almost-periodic signal with mode
/// frequencies `omegas` and nonnegative weights: minimizes
/// R(τ) = Σ w_i (1 − cos ω_i τ) over a fine τ scan in (0, lag_max].
pub fn best_recurrence_lag(omegas: &[f64], weights: &[f64], lag_max: f64, steps: usize) -> f64 {
    assert_eq!(omegas.len(), weights.len());
    let om_max = omegas.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-12);
    // Resolve the fastest phase well; skip the trivial τ → 0 minimum.
    let dt = (0.1 / om_max).min(lag_max / steps.max(2) as f64);
    let skip = (2.0 * std::f64::consts::PI / om_max / dt) as usize;
    let r = |tau: f64| -> f64 {
        omegas.iter().zip(weights).map(|(&o, &w)| w * (1.0 - (o * tau).cos())).sum()
    };
    let mut best = (f64::INFINITY, lag_max);
    let total = (lag_max / dt) as usize;
    for k in skip.max(1)..total {
        let tau = k as f64 * dt;
        let v = r(tau);
        if v < best.0 {
            best = (v, tau);
        }
    }
    // Parabolic refinement around the best grid point.
    let (tau, d) = (best.1, dt);
    let (ym, y0, yp) = (r(tau - d), r(tau), r(tau + d));
    let denom = ym - 2.0 * y0 + yp;
    if denom.abs() > 1e-300 {
        tau + 0.5 * d * (ym - yp) / denom
    } else {
        tau
    }
}

/// Pearson autocorrelation of `series` at integer `lag` over the overlapping
/// window.
pub fn autocorrelation_at_lag(series: &[f64], lag: usize) -> f64 {
    assert!(lag < series.len(), "lag beyond series length");
    let n = series.len() - lag;
    let a = &series[..n];
    let b = &series[lag..];
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let mut num = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..n {
        let (x, y) = (a[i] - ma, b[i] - mb);
        num += x * y;
        va += x * x;
        vb += y * y;
    }
    num / (va.sqrt() * vb.sqrt()).max(f64::MIN_POSITIVE)
}
