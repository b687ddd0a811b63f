//! End-to-end tests of the `hybrid-ep` binary: artifact schemas, exit codes,
//! determinism, and the physics markers visible through the CSV layer.

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hybrid-ep");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "expected success for {args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Parsed CSV: header → column index, rows as f64 where possible.
struct Csv {
    cols: HashMap<String, usize>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: &Path) -> Self {
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        let cols = lines
            .next()
            .unwrap()
            .split(',')
            .enumerate()
            .map(|(i, name)| (name.to_string(), i))
            .collect();
        let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        Self { cols, rows }
    }

    fn f(&self, row: usize, col: &str) -> f64 {
        self.rows[row][self.cols[col]].parse().unwrap()
    }

    fn s(&self, row: usize, col: &str) -> &str {
        &self.rows[row][self.cols[col]]
    }

    fn column(&self, col: &str) -> Vec<f64> {
        (0..self.rows.len()).map(|r| self.f(r, col)).collect()
    }
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn ep_scan_defaults_finds_both_even_block_roots() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["ep-scan", "--out", dir.path().to_str().unwrap()]);
    let csv = Csv::read(&dir.path().join("ep_loci.csv"));

    assert_eq!(csv.rows.len(), 2, "exactly two EPs in α ∈ [0,2]");
    for r in 0..2 {
        assert_eq!(csv.s(r, "block"), "even");
        assert!(csv.f(r, "metric") < 1e-12, "cubic residual at the root");
        assert!((csv.f(r, "gamma") - 10.0 / 13.0).abs() < 1e-12);
        assert!(csv.f(r, "d_minus").abs() < 1e-9);
        assert!(csv.f(r, "im_E").abs() < 1e-9, "coalescing eigenvalue is real");
    }
    let a1 = csv.f(0, "alpha");
    let a2 = csv.f(1, "alpha");
    assert!((a1 - 0.9404298853).abs() < 1e-6, "first root, got {a1}");
    assert!((a2 - 1.2455703904).abs() < 1e-6, "second root, got {a2}");
}

#[test]
fn spectrum_alpha_one_point_is_real_and_analytic_matches() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["spectrum", "--out", dir.path().to_str().unwrap()]);
    let csv = Csv::read(&dir.path().join("spectrum.csv"));

    // Default grid 0..2 with 201 points hits α = 1 exactly; the Hermitian
    // point must print a zero imaginary column.
    let at_one: Vec<usize> =
        (0..csv.rows.len()).filter(|&r| csv.f(r, "param") == 1.0).collect();
    assert_eq!(at_one.len(), 12, "6 numerical + 6 analytic rows at α = 1");
    for &r in &at_one {
        assert!(csv.f(r, "im_E").abs() < 1e-10, "row {r} imaginary part");
    }

    // Analytic and numerical rows agree as multisets at every 20th grid point,
    // sampling the param values actually present in the file.
    let mut params: Vec<f64> = csv.column("param");
    params.dedup();
    assert_eq!(params.len(), 201);
    for param in params.into_iter().step_by(20) {
        for block in ["even", "odd"] {
            let mut num: Vec<(f64, f64)> = Vec::new();
            let mut ana: Vec<(f64, f64)> = Vec::new();
            for r in 0..csv.rows.len() {
                if csv.f(r, "param") == param && csv.s(r, "block") == block {
                    let v = (csv.f(r, "re_E"), csv.f(r, "im_E"));
                    match csv.s(r, "method") {
                        "numerical" => num.push(v),
                        "analytic" => ana.push(v),
                        other => panic!("unexpected method {other}"),
                    }
                }
            }
            assert_eq!(num.len(), 3);
            assert_eq!(ana.len(), 3);
            let key = |a: &(f64, f64)| (a.0, a.1);
            num.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
            ana.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
            for (n, a) in num.iter().zip(&ana) {
                let d = ((n.0 - a.0).powi(2) + (n.1 - a.1).powi(2)).sqrt();
                assert!(d < 1e-9, "α = {param}, {block}: |num − ana| = {d:e}");
            }
        }
    }
}

#[test]
fn spectrum_decoupled_sweep_is_alpha_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\ncoupling_g = 0.0\n\n[spectrum]\nparameter = \"alpha\"\nstart = 0.0\nstop = 2.0\nsteps = 5\n",
    );
    run_ok(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let csv = Csv::read(&dir.path().join("spectrum.csv"));

    // g = 0 decouples qubit and ensemble: even block {D/2 − E, D/2, D/2 + E},
    // odd block {−D/2, 3D/2 − E, 3D/2 + E}, independent of α.
    let (d, e) = (2.88, 0.026);
    let expect_even = [d / 2.0 - e, d / 2.0, d / 2.0 + e];
    let expect_odd = [-d / 2.0, 1.5 * d - e, 1.5 * d + e];
    for r in 0..csv.rows.len() {
        assert!(csv.f(r, "im_E").abs() < 1e-12);
        let re = csv.f(r, "re_E");
        let expect: &[f64] = match csv.s(r, "block") {
            "even" => &expect_even,
            "odd" => &expect_odd,
            other => panic!("unexpected block {other}"),
        };
        let best = expect.iter().map(|x| (x - re).abs()).fold(f64::INFINITY, f64::min);
        assert!(best < 1e-10, "row {r}: {re} not a decoupled level");
    }
}

#[test]
fn evolve_hermitian_point_markers() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["evolve", "--out", dir.path().to_str().unwrap()]);
    let ts = Csv::read(&dir.path().join("evolve_timeseries.csv"));

    // Unitary evolution: the trace-normalization factor N(t) = (Tr F†F)^{−1/2}
    // is constant, and survival stays a probability with p(0) = 1.
    let nf = ts.column("norm_factor");
    let spread = nf.iter().cloned().fold(f64::MIN, f64::max)
        - nf.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-10, "norm factor spread {spread:e}");

    let p = ts.column("p_survival");
    assert!((p[0] - 1.0).abs() < 1e-12);
    assert!(p.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));

    // P(0) = I/6 in the CSV's modulus encoding.
    for i in 0..6 {
        for j in 0..6 {
            let v = ts.f(0, &format!("P_{i}_{j}"));
            let expect = if i == j { 1.0 / 6.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-12);
        }
    }

    let obs = Csv::read(&dir.path().join("evolve_observables.csv"));
    assert_eq!(obs.rows.len(), ts.rows.len());
    // The (π/2, 0) start is a coherent state: ζ² = 1 at t = 0, and purities 1.
    assert!((obs.f(0, "zeta2_min") - 1.0).abs() < 1e-9);
    assert!((obs.f(0, "purity_NV") - 1.0).abs() < 1e-12);
    assert!((obs.f(0, "purity_qb") - 1.0).abs() < 1e-12);
    // Early-time squeezing on the default window.
    let zmin = obs.column("zeta2_min");
    assert!(zmin.iter().any(|&z| z < 1.0), "no squeezing seen");
}

#[test]
fn trace_normalization_rescales_survival() {
    let dir_u = tempfile::tempdir().unwrap();
    let dir_t = tempfile::tempdir().unwrap();
    run_ok(&["evolve", "--out", dir_u.path().to_str().unwrap()]);
    run_ok(&[
        "evolve",
        "--normalization",
        "trace",
        "--out",
        dir_t.path().to_str().unwrap(),
    ]);
    let pu = Csv::read(&dir_u.path().join("evolve_timeseries.csv")).column("p_survival");
    let pt = Csv::read(&dir_t.path().join("evolve_timeseries.csv")).column("p_survival");

    // At α = 1 the propagator is unitary, so the trace convention rescales
    // the unit-norm survival by exactly 1/dim.
    for (u, t) in pu.iter().zip(&pt) {
        assert!((t - u / 6.0).abs() < 1e-12, "unit {u} vs trace {t}");
    }

    // The convention is part of the echoed config, so the hashes differ.
    let mu: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir_u.path().join("evolve_timeseries.manifest.json")).unwrap(),
    )
    .unwrap();
    let mt: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir_t.path().join("evolve_timeseries.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_ne!(mu["config_sha256"], mt["config_sha256"]);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        run_ok(&["evolve", "--out", dir.path().to_str().unwrap()]);
    }
    for name in ["evolve_timeseries.csv", "evolve_observables.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
    // Manifests agree on everything except the wall clock.
    for name in ["evolve_timeseries.manifest.json", "evolve_observables.manifest.json"] {
        let mut x: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(a.path().join(name)).unwrap()).unwrap();
        let mut y: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(b.path().join(name)).unwrap()).unwrap();
        x["wall_time_s"] = 0.0.into();
        y["wall_time_s"] = 0.0.into();
        assert_eq!(x, y, "{name} differs beyond wall time");
    }
}

#[test]
fn manifest_carries_hash_version_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["ep-scan", "--out", dir.path().to_str().unwrap()]);
    let m: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("ep_loci.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(m["command"], "ep-scan");
    assert_eq!(m["output"], "ep_loci.csv");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    let hash = m["config_sha256"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(m["config"]["model"]["zero_field_d"], 2.88);
    assert_eq!(m["config"]["model"]["ensemble_size_n"], 2);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn cat_locus_hits_the_anchor() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["cat-locus", "--out", dir.path().to_str().unwrap()]);
    let csv = Csv::read(&dir.path().join("cat_loci.csv"));
    assert_eq!(csv.rows.len(), 1);
    let alpha = csv.f(0, "alpha");
    assert!((alpha - 0.82402).abs() < 1e-3, "locus α = {alpha}");
    assert!(csv.f(0, "steady_spin_norm") < 1e-3, "steady |⟨S⟩| at the locus");
}

#[test]
fn wigner_grid_covers_the_sphere() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["wigner", "--out", dir.path().to_str().unwrap()]);
    let csv = Csv::read(&dir.path().join("wigner.csv"));
    assert_eq!(csv.rows.len(), 64 * 128);
    let thetas = csv.column("theta");
    let phis = csv.column("phi");
    let w = csv.column("W");
    assert!(thetas.iter().all(|&t| (0.0..=std::f64::consts::PI + 1e-12).contains(&t)));
    assert!(phis.iter().all(|&p| (0.0..2.0 * std::f64::consts::PI).contains(&p)));
    assert!(w.iter().all(|&x| x.is_finite()));
    assert!((thetas[0], phis[0]) == (0.0, 0.0), "row-major θ-outer ordering");
}

#[test]
fn hp_compare_stays_within_two_percent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[model]\nensemble_size_n = 20\n\n[hp-compare]\n");
    run_ok(&[
        "hp-compare",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let csv = Csv::read(&dir.path().join("hp_compare.csv"));
    assert_eq!(csv.rows.len(), 6, "3 excitations × 2 qubit branches");
    for r in 0..csv.rows.len() {
        let dev = csv.f(r, "rel_dev");
        assert!(dev < 2e-2, "row {r}: deviation {dev}");
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap().to_string();

    // 0: clean run.
    assert_eq!(exit_code(&run(&["ep-scan", "--out", &out_dir])), 0);

    // 2: unknown config key, named in the message.
    let cfg = write_config(dir.path(), "[model]\nstraim_e = 0.1\n");
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", &out_dir]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("straim_e"));

    // 2: missing required field, naming field and section.
    let cfg = write_config(dir.path(), "[evolve]\nt_start = 0.0\nsteps = 4\n");
    let out = run(&["evolve", "--config", cfg.to_str().unwrap(), "--out", &out_dir]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("t_end") && err.contains("[evolve]"), "{err}");

    // 2: section does not match the invoked subcommand.
    let cfg = write_config(dir.path(), "[wigner]\nt = 100.0\n");
    let out = run(&["evolve", "--config", cfg.to_str().unwrap(), "--out", &out_dir]);
    assert_eq!(exit_code(&out), 2);

    // 2: negative ensemble size.
    let cfg = write_config(dir.path(), "[model]\nensemble_size_n = -4\n");
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", &out_dir]);
    assert_eq!(exit_code(&out), 2);

    // 3: numerical failure — cat-locus bracket reaching into the real-spectrum
    // window where no steady state exists.
    let cfg = write_config(
        dir.path(),
        "[cat-locus]\nalpha_min = 0.60\nalpha_max = 0.95\n",
    );
    let out = run(&["cat-locus", "--config", cfg.to_str().unwrap(), "--out", &out_dir]);
    assert_eq!(exit_code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn workers_flag_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["ep-scan", "--workers", "2", "--out", dir.path().to_str().unwrap()]);
    let m: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("ep_loci.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(m["workers"], 2);

    let out = run(&["ep-scan", "--workers", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn gamma_grid_sweeps_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[ep-scan]\nalpha_min = 0.0\nalpha_max = 2.0\nalpha_steps = 300\n\
         gamma_min = 0.55\ngamma_max = 0.85\ngamma_steps = 4\nblock = \"even\"\n",
    );
    run_ok(&[
        "ep-scan",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let csv = Csv::read(&dir.path().join("ep_loci.csv"));
    let gamma = csv.column("gamma");
    assert!(gamma.windows(2).all(|w| w[1] >= w[0]), "γ column non-decreasing");
    // Every γ contributes roots, ascending in α within its group. (The first
    // root is *not* monotone in γ — the B > 0 boundary bends back above
    // γ ≈ 0.75 — so only the ordering contract is asserted here.)
    let mut seen = std::collections::BTreeMap::<u64, Vec<f64>>::new();
    for r in 0..csv.rows.len() {
        seen.entry(csv.f(r, "gamma").to_bits()).or_default().push(csv.f(r, "alpha"));
    }
    assert_eq!(seen.len(), 4, "a root group for every γ");
    for alphas in seen.values() {
        assert!(alphas.windows(2).all(|w| w[1] > w[0]), "α ascending per γ");
    }

    // The CSV is the library's answer verbatim.
    let template = hybrid_ep::params::ModelParams {
        coupling_g: 0.65 * 0.026,
        ..hybrid_ep::params::ModelParams::default()
    };
    let roots = hybrid_ep::epscan::discriminant_roots(
        &template,
        hybrid_ep::basis::Parity::Even,
        0.0,
        2.0,
        300,
    )
    .unwrap();
    let from_csv: Vec<f64> = (0..csv.rows.len())
        .filter(|&r| (csv.f(r, "gamma") - 0.65).abs() < 1e-12)
        .map(|r| csv.f(r, "alpha"))
        .collect();
    assert_eq!(roots.len(), from_csv.len());
    for (root, csv_alpha) in roots.iter().zip(&from_csv) {
        assert!((root.alpha - csv_alpha).abs() < 1e-9);
    }
}
