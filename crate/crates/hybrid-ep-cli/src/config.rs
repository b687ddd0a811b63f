//! Run configuration: a TOML file with a `[model]` section plus exactly one
//! subcommand section. Absent sections fall back to working-point defaults;
//! a section that *is* written must carry its required fields.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use hybrid_ep::params::ModelParams;
use serde::{Deserialize, Serialize};

/// Config-level failure; always maps to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn cfg_err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// State-normalization convention for evolve outputs: `unit` rescales the
/// evolved state to unit norm; `trace` uses the transition-matrix factor
/// N(t) = (Tr F†F)^{−1/2}, making the survival column consistent with P(t).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Unit,
    Trace,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Unit => "unit",
            Normalization::Trace => "trace",
        }
    }
}

/// `[model]` section; every field optional, defaulting to the working point.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub epsilon: f64,
    /// Δ directly [GHz]; exclusive with `delta_ratio`.
    pub delta: Option<f64>,
    /// δ = Δ/(2D); Δ = 2D·δ when `delta` itself is omitted.
    pub delta_ratio: Option<f64>,
    pub zero_field_d: f64,
    pub strain_e: f64,
    pub coupling_g: f64,
    pub asymmetry_alpha: f64,
    /// Signed so that a negative count is caught with a readable message.
    pub ensemble_size_n: i64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            epsilon: p.epsilon,
            delta: None,
            delta_ratio: None,
            zero_field_d: p.zero_field_d,
            strain_e: p.strain_e,
            coupling_g: p.coupling_g,
            asymmetry_alpha: p.asymmetry_alpha,
            ensemble_size_n: p.ensemble_size_n as i64,
        }
    }
}

impl ModelSection {
    pub fn resolve(&self) -> Result<ModelParams, ConfigError> {
        if self.ensemble_size_n <= 0 {
            return cfg_err(format!(
                "section [model]: ensemble_size_n must be a positive integer, got {}",
                self.ensemble_size_n
            ));
        }
        let delta = match (self.delta, self.delta_ratio) {
            (Some(_), Some(_)) => {
                return cfg_err("section [model]: give either delta or delta_ratio, not both")
            }
            (Some(d), None) => d,
            (None, Some(r)) => 2.0 * self.zero_field_d * r,
            (None, None) => 2.0 * self.zero_field_d,
        };
        let params = ModelParams {
            epsilon: self.epsilon,
            delta,
            zero_field_d: self.zero_field_d,
            strain_e: self.strain_e,
            coupling_g: self.coupling_g,
            asymmetry_alpha: self.asymmetry_alpha,
            ensemble_size_n: self.ensemble_size_n as usize,
        };
        params.validate().map_err(|e| ConfigError(format!("section [model]: {e}")))?;
        Ok(params)
    }
}

/// Which physical knob a `spectrum` sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Alpha,
    /// γ = g/E; the sweep sets g = γ·E at fixed strain.
    Gamma,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { parameter: SweepParameter::Alpha, start: 0.0, stop: 2.0, steps: 201 }
    }
}

/// Which parity blocks an `ep-scan` covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BlockChoice {
    Even,
    Odd,
    #[default]
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpScanSection {
    pub alpha_min: f64,
    pub alpha_max: f64,
    #[serde(default = "default_alpha_steps")]
    pub alpha_steps: usize,
    /// Optional γ grid (all three or none); absent → single γ from [model].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_steps: Option<usize>,
    #[serde(default)]
    pub block: BlockChoice,
}

fn default_alpha_steps() -> usize {
    400
}

impl Default for EpScanSection {
    fn default() -> Self {
        Self {
            alpha_min: 0.0,
            alpha_max: 2.0,
            alpha_steps: default_alpha_steps(),
            gamma_min: None,
            gamma_max: None,
            gamma_steps: None,
            block: BlockChoice::Both,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatLocusSection {
    pub alpha_min: f64,
    pub alpha_max: f64,
    #[serde(default = "default_t_probe")]
    pub t_probe: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_steps: Option<usize>,
}

fn default_t_probe() -> f64 {
    6.0e3
}

impl Default for CatLocusSection {
    /// Bracket kept below the first exceptional point: past it the spectrum
    /// turns real and no steady state exists to probe.
    fn default() -> Self {
        Self {
            alpha_min: 0.70,
            alpha_max: 0.90,
            t_probe: default_t_probe(),
            gamma_min: None,
            gamma_max: None,
            gamma_steps: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    #[serde(default)]
    pub k_qb: usize,
    #[serde(default = "default_theta0")]
    pub theta0: f64,
    #[serde(default)]
    pub phi0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
}

fn default_theta0() -> f64 {
    std::f64::consts::FRAC_PI_2
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: 6.0e3,
            steps: 601,
            k_qb: 0,
            theta0: default_theta0(),
            phi0: 0.0,
            normalization: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSection {
    pub t: f64,
    #[serde(default)]
    pub k_qb: usize,
    #[serde(default = "default_theta0")]
    pub theta0: f64,
    #[serde(default)]
    pub phi0: f64,
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    #[serde(default = "default_n_phi")]
    pub n_phi: usize,
}

fn default_n_theta() -> usize {
    64
}

fn default_n_phi() -> usize {
    128
}

impl Default for WignerSection {
    fn default() -> Self {
        Self {
            t: 6.0e3,
            k_qb: 0,
            theta0: default_theta0(),
            phi0: 0.0,
            n_theta: default_n_theta(),
            n_phi: default_n_phi(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct HpCompareSection {
    /// Boson truncation n_max; absent → min(N, 10).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// How many excitation levels per qubit branch; absent → min(3, n_max, N).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
}

/// The resolved subcommand block.
#[derive(Debug, Clone)]
pub enum SectionConfig {
    Spectrum(SpectrumSection),
    EpScan(EpScanSection),
    CatLocus(CatLocusSection),
    Evolve(EvolveSection),
    Wigner(WignerSection),
    HpCompare(HpCompareSection),
}

/// Fully-resolved run input: model parameters plus the active section.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub model: ModelParams,
    pub section: SectionConfig,
}

const SUBCOMMAND_SECTIONS: [&str; 6] =
    ["spectrum", "ep-scan", "cat-locus", "evolve", "wigner", "hp-compare"];

fn section_from_table<T: for<'de> Deserialize<'de>>(
    table: &toml::Table,
    name: &str,
) -> Result<Option<T>, ConfigError> {
    match table.get(name) {
        None => Ok(None),
        Some(v) => v
            .clone()
            .try_into::<T>()
            .map(Some)
            .map_err(|e| ConfigError(format!("section [{name}]: {}", e.message()))),
    }
}

fn gamma_grid_ok(
    name: &str,
    min: Option<f64>,
    max: Option<f64>,
    steps: Option<usize>,
) -> Result<(), ConfigError> {
    match (min, max, steps) {
        (None, None, None) => Ok(()),
        (Some(lo), Some(hi), Some(n)) => {
            if !(hi > lo) || n < 2 {
                cfg_err(format!(
                    "section [{name}]: gamma grid needs gamma_max > gamma_min and gamma_steps ≥ 2"
                ))
            } else {
                Ok(())
            }
        }
        _ => cfg_err(format!(
            "section [{name}]: give all of gamma_min, gamma_max, gamma_steps or none"
        )),
    }
}

/// Load and validate a run configuration for the invoked subcommand.
/// `path = None` means all defaults. The file may contain at most one
/// subcommand section and it must match `section_name`.
pub fn load(path: Option<&Path>, section_name: &str) -> Result<LoadedConfig, ConfigError> {
    let table: toml::Table = match path {
        None => toml::Table::new(),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| ConfigError(format!("cannot read config {}: {e}", p.display())))?;
            toml::from_str(&text)
                .map_err(|e| ConfigError(format!("config {}: {}", p.display(), e.message())))?
        }
    };

    for key in table.keys() {
        if key != "model" && !SUBCOMMAND_SECTIONS.contains(&key.as_str()) {
            return cfg_err(format!(
                "unknown config section [{key}] (expected [model] or one of {})",
                SUBCOMMAND_SECTIONS.map(|s| format!("[{s}]")).join(", ")
            ));
        }
    }

    let present: Vec<&str> = SUBCOMMAND_SECTIONS
        .iter()
        .copied()
        .filter(|s| table.contains_key(*s))
        .collect();
    if present.len() > 1 {
        return cfg_err(format!(
            "exactly one subcommand section allowed, found [{}]",
            present.join("], [")
        ));
    }
    if let Some(&found) = present.first() {
        if found != section_name {
            return cfg_err(format!(
                "config carries section [{found}] but the `{section_name}` subcommand was invoked"
            ));
        }
    }

    let model = section_from_table::<ModelSection>(&table, "model")?
        .unwrap_or_default()
        .resolve()?;

    let section = match section_name {
        "spectrum" => {
            let s: SpectrumSection =
                section_from_table(&table, "spectrum")?.unwrap_or_default();
            if s.steps < 2 || !(s.stop > s.start) {
                return cfg_err("section [spectrum]: need stop > start and steps ≥ 2");
            }
            SectionConfig::Spectrum(s)
        }
        "ep-scan" => {
            let s: EpScanSection = section_from_table(&table, "ep-scan")?.unwrap_or_default();
            if s.alpha_steps < 2 || !(s.alpha_max > s.alpha_min) {
                return cfg_err(
                    "section [ep-scan]: need alpha_max > alpha_min and alpha_steps ≥ 2",
                );
            }
            gamma_grid_ok("ep-scan", s.gamma_min, s.gamma_max, s.gamma_steps)?;
            SectionConfig::EpScan(s)
        }
        "cat-locus" => {
            let s: CatLocusSection =
                section_from_table(&table, "cat-locus")?.unwrap_or_default();
            if !(s.alpha_max > s.alpha_min) {
                return cfg_err("section [cat-locus]: need alpha_max > alpha_min");
            }
            if !(s.t_probe > 0.0) {
                return cfg_err("section [cat-locus]: t_probe must be > 0");
            }
            gamma_grid_ok("cat-locus", s.gamma_min, s.gamma_max, s.gamma_steps)?;
            SectionConfig::CatLocus(s)
        }
        "evolve" => {
            let s: EvolveSection = section_from_table(&table, "evolve")?.unwrap_or_default();
            if s.steps < 2 || !(s.t_end > s.t_start) || s.t_start < 0.0 {
                return cfg_err(
                    "section [evolve]: need 0 ≤ t_start < t_end and steps ≥ 2",
                );
            }
            if s.k_qb > 1 {
                return cfg_err("section [evolve]: k_qb must be 0 or 1");
            }
            SectionConfig::Evolve(s)
        }
        "wigner" => {
            let s: WignerSection = section_from_table(&table, "wigner")?.unwrap_or_default();
            if s.t < 0.0 {
                return cfg_err("section [wigner]: t must be ≥ 0");
            }
            if s.k_qb > 1 {
                return cfg_err("section [wigner]: k_qb must be 0 or 1");
            }
            SectionConfig::Wigner(s)
        }
        "hp-compare" => {
            let s: HpCompareSection =
                section_from_table(&table, "hp-compare")?.unwrap_or_default();
            SectionConfig::HpCompare(s)
        }
        other => return cfg_err(format!("unknown subcommand section `{other}`")),
    };

    Ok(LoadedConfig { model, section })
}

/// The manifest's config echo: resolved model parameters plus the active
/// section. Hashing this (rather than the raw file) keys the manifest to what
/// the run actually used, defaults included.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveConfig<'a> {
    pub command: &'a str,
    pub model: &'a ModelParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<&'a SpectrumSection>,
    #[serde(rename = "ep-scan", skip_serializing_if = "Option::is_none")]
    pub ep_scan: Option<&'a EpScanSection>,
    #[serde(rename = "cat-locus", skip_serializing_if = "Option::is_none")]
    pub cat_locus: Option<&'a CatLocusSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evolve: Option<&'a EvolveSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wigner: Option<&'a WignerSection>,
    #[serde(rename = "hp-compare", skip_serializing_if = "Option::is_none")]
    pub hp_compare: Option<&'a HpCompareSection>,
    pub normalization: &'a str,
}

impl<'a> EffectiveConfig<'a> {
    pub fn new(
        command: &'a str,
        model: &'a ModelParams,
        section: &'a SectionConfig,
        normalization: &'a str,
    ) -> Self {
        let mut cfg = Self {
            command,
            model,
            spectrum: None,
            ep_scan: None,
            cat_locus: None,
            evolve: None,
            wigner: None,
            hp_compare: None,
            normalization,
        };
        match section {
            SectionConfig::Spectrum(s) => cfg.spectrum = Some(s),
            SectionConfig::EpScan(s) => cfg.ep_scan = Some(s),
            SectionConfig::CatLocus(s) => cfg.cat_locus = Some(s),
            SectionConfig::Evolve(s) => cfg.evolve = Some(s),
            SectionConfig::Wigner(s) => cfg.wigner = Some(s),
            SectionConfig::HpCompare(s) => cfg.hp_compare = Some(s),
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn empty_config_gives_working_point() {
        let cfg = load(None, "spectrum").unwrap();
        assert_eq!(cfg.model, ModelParams::default());
        assert!(matches!(cfg.section, SectionConfig::Spectrum(_)));
    }

    #[test]
    fn empty_model_section_gives_working_point() {
        let f = write_tmp("[model]\n");
        let cfg = load(Some(f.path()), "evolve").unwrap();
        assert_eq!(cfg.model.zero_field_d, 2.88);
        assert_eq!(cfg.model.strain_e, 0.026);
        assert_eq!(cfg.model.coupling_g, 0.02);
        assert_eq!(cfg.model.delta, 2.0 * 2.88);
        assert_eq!(cfg.model.epsilon, 0.0);
        assert_eq!(cfg.model.ensemble_size_n, 2);
    }

    #[test]
    fn delta_ratio_resolves_against_d() {
        let f = write_tmp("[model]\ndelta_ratio = 1.0\n");
        let cfg = load(Some(f.path()), "spectrum").unwrap();
        assert_eq!(cfg.model.delta, 2.0 * 2.88);

        let f = write_tmp("[model]\nzero_field_d = 3.0\ndelta_ratio = 0.5\n");
        let cfg = load(Some(f.path()), "spectrum").unwrap();
        assert_eq!(cfg.model.delta, 3.0);

        let f = write_tmp("[model]\ndelta = 1.0\ndelta_ratio = 0.5\n");
        let err = load(Some(f.path()), "spectrum").unwrap_err();
        assert!(err.0.contains("delta_ratio"), "{}", err.0);
    }

    #[test]
    fn negative_ensemble_size_names_the_field() {
        let f = write_tmp("[model]\nensemble_size_n = -2\n");
        let err = load(Some(f.path()), "spectrum").unwrap_err();
        assert!(err.0.contains("ensemble_size_n"), "{}", err.0);
        assert!(err.0.contains("positive"), "{}", err.0);
    }

    #[test]
    fn unknown_key_is_named() {
        let f = write_tmp("[model]\nzero_feld_d = 2.88\n");
        let err = load(Some(f.path()), "spectrum").unwrap_err();
        assert!(err.0.contains("zero_feld_d"), "{}", err.0);

        let f = write_tmp("[evolve]\nt_start = 0.0\nt_end = 10.0\nsteps = 5\nstepz = 3\n");
        let err = load(Some(f.path()), "evolve").unwrap_err();
        assert!(err.0.contains("stepz"), "{}", err.0);
        assert!(err.0.contains("[evolve]"), "{}", err.0);
    }

    #[test]
    fn missing_field_names_field_and_section() {
        let f = write_tmp("[evolve]\nt_start = 0.0\nsteps = 5\n");
        let err = load(Some(f.path()), "evolve").unwrap_err();
        assert!(err.0.contains("t_end"), "{}", err.0);
        assert!(err.0.contains("[evolve]"), "{}", err.0);
    }

    #[test]
    fn unknown_section_is_named() {
        let f = write_tmp("[evolv]\nt_start = 0.0\n");
        let err = load(Some(f.path()), "evolve").unwrap_err();
        assert!(err.0.contains("evolv"), "{}", err.0);
    }

    #[test]
    fn two_subcommand_sections_rejected() {
        let f = write_tmp(
            "[evolve]\nt_start = 0.0\nt_end = 1.0\nsteps = 2\n\n[wigner]\nt = 1.0\n",
        );
        let err = load(Some(f.path()), "evolve").unwrap_err();
        assert!(err.0.contains("exactly one"), "{}", err.0);
    }

    #[test]
    fn section_must_match_subcommand() {
        let f = write_tmp("[wigner]\nt = 1.0\n");
        let err = load(Some(f.path()), "evolve").unwrap_err();
        assert!(err.0.contains("[wigner]"), "{}", err.0);
        assert!(err.0.contains("evolve"), "{}", err.0);
    }

    #[test]
    fn grid_validation() {
        let f = write_tmp("[evolve]\nt_start = 5.0\nt_end = 1.0\nsteps = 10\n");
        assert!(load(Some(f.path()), "evolve").is_err());

        let f = write_tmp("[spectrum]\nparameter = \"alpha\"\nstart = 0.0\nstop = 2.0\nsteps = 1\n");
        assert!(load(Some(f.path()), "spectrum").is_err());

        let f = write_tmp("[ep-scan]\nalpha_min = 0.0\nalpha_max = 2.0\ngamma_min = 0.1\n");
        let err = load(Some(f.path()), "ep-scan").unwrap_err();
        assert!(err.0.contains("gamma"), "{}", err.0);
    }

    #[test]
    fn effective_config_serialization_is_stable() {
        let cfg = load(None, "cat-locus").unwrap();
        let eff = EffectiveConfig::new("cat-locus", &cfg.model, &cfg.section, "unit");
        let a = serde_json::to_string(&eff).unwrap();
        let b = serde_json::to_string(&eff).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"cat-locus\""));
        assert!(!a.contains("spectrum"));
    }
}
