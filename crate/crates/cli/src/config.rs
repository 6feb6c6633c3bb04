//! Run configuration: a TOML file with a fixed key set (unknown keys are
//! rejected with their location) and semantic validation of every grid.
//!
//! ```toml
//! seed = 42                      # mandatory: all sampling is reproducible
//! refinement_levels = 3          # meshes: triangulate(h0) + red refinements
//! eigen_count = 10               # Robin eigenpairs per (domain, level, b)
//! b_values = [0.1, 1.0, 10.0]    # Robin parameters, all > 0
//! small_b = 0.001                # probe for the b -> 0 spectral limits
//! p_values = [1.5, 2.0, 3.0]     # p-Laplacian exponents, all > 1
//! levelset_b_values = [0.5, 1.0, 2.0]
//! margin_samples = 1000          # random fields per sampled inequality
//! cutoff_samples = 100           # random cutoffs per Caccioppoli check
//! levelset_points = 128          # t-grid size of the level-set bound
//! levelset_all_levels = false    # run the level-set bound on every level
//! h_fraction = 0.125             # h0 = h_fraction * domain diameter
//! out_dir = "out"
//! formats = ["json", "csv", "svg"]
//! workers = 0                    # 0 = one rayon worker per core
//!
//! [[domains]]
//! kind = "disk_polygon"          # unit_square | rectangle | disk_polygon |
//! params = [1.0, 256]            #   annulus_polygon | l_shape
//!
//! [wos]
//! n_walks = 100000
//! eps_shell_fraction = 1e-4      # shell = fraction * domain diameter
//! probe_count = 5
//!
//! [tolerances]                   # verdict tolerances, each in (0, 0.1]
//! default = 0.02
//!
//! [solver]
//! cg_tol = 1e-10
//! eigen_tol = 1e-8
//! picard_tol = 1e-8
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use torsionlab::geometry::{make_canonical_domain, CanonicalKind, PolygonalDomain};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl DomainSpec {
    pub fn build(&self) -> anyhow::Result<PolygonalDomain> {
        let kind = CanonicalKind::parse(&self.kind)?;
        // `disk` / `annulus` shorthands get the canonical corpus parameters.
        let params: Vec<f64> = if self.params.is_empty() {
            match (kind, self.kind.as_str()) {
                (CanonicalKind::DiskPolygon, _) => vec![1.0, 256.0],
                (CanonicalKind::AnnulusPolygon, _) => vec![0.5, 1.0, 256.0],
                (CanonicalKind::Rectangle, _) => vec![2.0, 1.0],
                _ => vec![],
            }
        } else {
            self.params.clone()
        };
        Ok(make_canonical_domain(kind, &params)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WosConfig {
    pub n_walks: usize,
    pub eps_shell_fraction: f64,
    pub probe_count: usize,
}

impl Default for WosConfig {
    fn default() -> Self {
        WosConfig {
            n_walks: 100_000,
            eps_shell_fraction: 1e-4,
            probe_count: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub default: f64,
    /// Per-check overrides by verdict name.
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            default: 0.02,
            overrides: BTreeMap::new(),
        }
    }
}

impl Tolerances {
    pub fn for_check(&self, name: &str) -> f64 {
        self.overrides.get(name).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub cg_tol: f64,
    pub eigen_tol: f64,
    pub picard_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cg_tol: 1e-10,
            eigen_tol: 1e-8,
            picard_tol: 1e-8,
        }
    }
}

fn default_levelset_b() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_margin_samples() -> usize {
    1000
}
fn default_cutoff_samples() -> usize {
    100
}
fn default_levelset_points() -> usize {
    128
}
fn default_h_fraction() -> f64 {
    0.125
}
fn default_small_b() -> f64 {
    1e-3
}
fn default_out_dir() -> String {
    "out".into()
}
fn default_formats() -> Vec<String> {
    vec!["json".into(), "csv".into(), "svg".into()]
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub refinement_levels: usize,
    pub eigen_count: usize,
    pub b_values: Vec<f64>,
    #[serde(default = "default_small_b")]
    pub small_b: f64,
    pub p_values: Vec<f64>,
    #[serde(default = "default_levelset_b")]
    pub levelset_b_values: Vec<f64>,
    #[serde(default = "default_margin_samples")]
    pub margin_samples: usize,
    #[serde(default = "default_cutoff_samples")]
    pub cutoff_samples: usize,
    #[serde(default = "default_levelset_points")]
    pub levelset_points: usize,
    #[serde(default)]
    pub levelset_all_levels: bool,
    #[serde(default = "default_h_fraction")]
    pub h_fraction: f64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
    #[serde(default)]
    pub workers: usize,
    pub domains: Vec<DomainSpec>,
    #[serde(default)]
    pub wos: WosConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl RunConfig {
    /// A minimal single-case configuration (the `verify` subcommand).
    pub fn single_case(kind: &str, b: f64, p: f64, levels: usize) -> Self {
        RunConfig {
            seed: 42,
            refinement_levels: levels,
            eigen_count: 6,
            b_values: vec![b],
            small_b: default_small_b(),
            p_values: vec![p],
            levelset_b_values: vec![b],
            margin_samples: 200,
            cutoff_samples: 25,
            levelset_points: default_levelset_points(),
            levelset_all_levels: false,
            h_fraction: default_h_fraction(),
            out_dir: default_out_dir(),
            formats: vec![],
            workers: 0,
            domains: vec![DomainSpec {
                kind: kind.into(),
                params: vec![],
            }],
            wos: WosConfig {
                n_walks: 20_000,
                ..WosConfig::default()
            },
            tolerances: Tolerances::default(),
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let fail = |field: &str, reason: String| -> anyhow::Result<()> {
            anyhow::bail!("config validation failed: {field}: {reason}")
        };
        if self.domains.is_empty() {
            return fail("domains", "at least one domain is required".into());
        }
        for d in &self.domains {
            d.build()
                .map_err(|e| anyhow::anyhow!("config validation failed: domains: {e}"))?;
        }
        if self.b_values.is_empty() {
            return fail("b_values", "must be non-empty".into());
        }
        if let Some(b) = self.b_values.iter().find(|&&b| b <= 0.0) {
            return fail("b_values", format!("Robin parameter must be > 0, got {b}"));
        }
        if self.small_b <= 0.0 {
            return fail("small_b", "must be > 0".into());
        }
        if self.p_values.is_empty() {
            return fail("p_values", "must be non-empty".into());
        }
        if let Some(p) = self.p_values.iter().find(|&&p| p <= 1.0) {
            return fail("p_values", format!("exponent must be > 1, got {p}"));
        }
        if self.levelset_b_values.iter().any(|&b| b <= 0.0) {
            return fail("levelset_b_values", "Robin parameters must be > 0".into());
        }
        if self.refinement_levels == 0 {
            return fail("refinement_levels", "must be ≥ 1".into());
        }
        if self.eigen_count == 0 {
            return fail("eigen_count", "must be ≥ 1".into());
        }
        if self.margin_samples == 0 {
            return fail("margin_samples", "must be ≥ 1".into());
        }
        if self.levelset_points < 16 {
            return fail("levelset_points", "must be ≥ 16".into());
        }
        if !(0.0..=0.5).contains(&self.h_fraction) || self.h_fraction == 0.0 {
            return fail("h_fraction", "must be in (0, 0.5]".into());
        }
        let tol_ok = |t: f64| t > 0.0 && t <= 0.1;
        if !tol_ok(self.tolerances.default) {
            return fail("tolerances.default", "must lie in (0, 0.1]".into());
        }
        for (name, &t) in &self.tolerances.overrides {
            if !tol_ok(t) {
                return fail(
                    "tolerances.overrides",
                    format!("tolerance '{name}' must lie in (0, 0.1], got {t}"),
                );
            }
        }
        if self.wos.n_walks == 0 {
            return fail("wos.n_walks", "must be ≥ 1".into());
        }
        if self.wos.eps_shell_fraction <= 0.0 {
            return fail("wos.eps_shell_fraction", "must be > 0".into());
        }
        for (name, v) in [
            ("solver.cg_tol", self.solver.cg_tol),
            ("solver.eigen_tol", self.solver.eigen_tol),
            ("solver.picard_tol", self.solver.picard_tol),
        ] {
            if v <= 0.0 || v > 1e-3 {
                return fail(name, "must lie in (0, 1e-3]".into());
            }
        }
        for f in &self.formats {
            if !["json", "csv", "svg"].contains(&f.as_str()) {
                return fail("formats", format!("unknown format '{f}'"));
            }
        }
        Ok(())
    }
}

/// Parse and validate a configuration file. Unknown keys and type errors are
/// reported with their location in the file.
pub fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    let config: RunConfig = toml::from_str(&text)
        .map_err(|e| anyhow::anyhow!("config parse error in {}: {e}", path.display()))?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
refinement_levels = 2
eigen_count = 4
b_values = [1.0]
p_values = [2.0]

[[domains]]
kind = "unit_square"
"#;

    #[test]
    fn minimal_config_parses() {
        let c: RunConfig = toml::from_str(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.margin_samples, 1000);
        assert_eq!(c.tolerances.default, 0.02);
    }

    #[test]
    fn zero_b_rejected() {
        let text = MINIMAL.replace("b_values = [1.0]", "b_values = [0.0]");
        let c: RunConfig = toml::from_str(&text).unwrap();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("b_values"), "{err}");
    }

    #[test]
    fn missing_seed_rejected() {
        let text = MINIMAL.replace("seed = 7\n", "");
        let err = toml::from_str::<RunConfig>(&text).unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let text = format!("{MINIMAL}\nmystery_knob = 3\n");
        let err = toml::from_str::<RunConfig>(&text).unwrap_err().to_string();
        assert!(err.contains("mystery_knob"), "{err}");
    }

    #[test]
    fn out_of_range_tolerance_rejected() {
        let text = format!("{MINIMAL}\n[tolerances]\ndefault = 0.5\n");
        let c: RunConfig = toml::from_str(&text).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn domain_aliases_build() {
        for kind in ["disk", "square", "annulus", "l_shape", "rectangle"] {
            DomainSpec {
                kind: kind.into(),
                params: vec![],
            }
            .build()
            .unwrap();
        }
    }
}
