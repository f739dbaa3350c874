//! Scenario configuration: a JSON file, command-line flags, or both (flags win).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dpa_core::fock::FockCutoff;
use dpa_core::quadrature::QuadratureConfig;
use dpa_core::states::{budget_to_spec, DpaParams, EnergyBudget, Family, Stage, StateSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Quantity {
    NptClosed,
    NptNumeric,
    Jpnd,
    Wln,
    WignerSection,
    Normalization,
}

impl Quantity {
    pub fn tag(&self) -> &'static str {
        match self {
            Quantity::NptClosed => "npt_closed",
            Quantity::NptNumeric => "npt_numeric",
            Quantity::Jpnd => "jpnd",
            Quantity::Wln => "wln",
            Quantity::WignerSection => "wigner_section",
            Quantity::Normalization => "normalization",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Cc,
    Tt,
    Ss,
    Tmsv,
    Vac,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Cc => Family::Cc,
            FamilyArg::Tt => Family::Tt,
            FamilyArg::Ss => Family::Ss,
            FamilyArg::Tmsv => Family::Tmsv,
            FamilyArg::Vac => Family::Vac,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StageArg {
    Before,
    After,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Before => Stage::Before,
            StageArg::After => Stage::After,
        }
    }
}

/// A single phase or a list of phases, in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiSetting {
    Scalar(f64),
    Grid(Vec<f64>),
}

impl PhiSetting {
    pub fn values(&self) -> Vec<f64> {
        match self {
            PhiSetting::Scalar(v) => vec![*v],
            PhiSetting::Grid(v) => v.clone(),
        }
    }
}

/// Every field is optional; unset fields fall back to command or figure defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar_total: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSetting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<StageArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantity: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_trunc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_diagonal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_marginal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_nodes: Option<usize>,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    pub box_halfwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_wln: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub section_extent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub section_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// Parse an angle: a plain number, or a multiple of `pi` such as `pi`, `pi/2`, `3pi/4`, `-pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(['*', ' '], "");
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| format!("bad angle '{s}'"))?),
        None => (t.as_str(), 1.0),
    };
    let coeff = match num.strip_suffix("pi") {
        Some("") | Some("+") => 1.0,
        Some("-") => -1.0,
        Some(c) => c.parse::<f64>().map_err(|_| format!("bad angle '{s}'"))?,
        None => return Err(format!("bad angle '{s}'")),
    };
    Ok(coeff * PI / den)
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// JSON scenario file; flags given on the command line override its entries.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Coherent amplitude of mode 1 (real).
    #[arg(long, allow_hyphen_values = true)]
    pub z1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z2: Option<f64>,
    /// Thermal mean photon number of mode 1.
    #[arg(long)]
    pub nbar1: Option<f64>,
    #[arg(long)]
    pub nbar2: Option<f64>,
    /// Squeezing parameter of mode 1.
    #[arg(long, allow_hyphen_values = true)]
    pub r1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub r2: Option<f64>,
    /// Two-mode squeezing parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    /// Phase (radians, or forms like pi/2); comma-separated for a grid.
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi: Option<Vec<f64>>,
    /// Total input mean photon number; replaces the per-mode parameters.
    #[arg(long)]
    pub nbar_total: Option<f64>,
    /// Mode-1 share of the total (0.5 is symmetric).
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long, value_enum)]
    pub stage: Option<StageArg>,
    #[arg(long, value_enum)]
    pub quantity: Option<Quantity>,
    /// Fock cutoff per mode (default: chosen from the state).
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub eps_trunc: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub quad_nodes: Option<usize>,
    /// Quadrature box half-width.
    #[arg(long = "box")]
    pub box_halfwidth: Option<f64>,
    #[arg(long)]
    pub tol_wln: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($cfg:ident, $args:ident, $($field:ident),*) => {
        $( if $args.$field.is_some() { $cfg.$field = $args.$field.clone(); } )*
    };
}

impl ScenarioArgs {
    pub fn resolve(&self) -> Result<ScenarioConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_file(path)?,
            None => ScenarioConfig::default(),
        };
        overlay!(
            cfg, self, family, z1, z2, nbar1, nbar2, r1, r2, r, nbar_total, split, stage,
            quantity, cutoff, eps_trunc, n_max, quad_nodes, box_halfwidth, tol_wln, out, format
        );
        if let Some(phi) = &self.phi {
            cfg.phi = Some(match phi.as_slice() {
                [one] => PhiSetting::Scalar(*one),
                many => PhiSetting::Grid(many.to_vec()),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let finite = [
            ("z1", self.z1),
            ("z2", self.z2),
            ("nbar1", self.nbar1),
            ("nbar2", self.nbar2),
            ("r1", self.r1),
            ("r2", self.r2),
            ("r", self.r),
            ("nbar_total", self.nbar_total),
            ("split", self.split),
            ("eps_trunc", self.eps_trunc),
            ("box", self.box_halfwidth),
            ("tol_wln", self.tol_wln),
            ("grid_max", self.grid_max),
            ("grid_step", self.grid_step),
            ("section_extent", self.section_extent),
        ];
        for (name, v) in finite {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(CliError::Config(format!("{name} must be finite")));
                }
            }
        }
        for (name, v) in [("nbar1", self.nbar1), ("nbar2", self.nbar2), ("nbar_total", self.nbar_total)] {
            if v.is_some_and(|v| v < 0.0) {
                return Err(CliError::Config(format!("{name} must be non-negative")));
            }
        }
        if self.split.is_some_and(|s| !(0.0..=1.0).contains(&s)) {
            return Err(CliError::Config("split must lie in [0, 1]".into()));
        }
        if let Some(phi) = &self.phi {
            let v = phi.values();
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Config("phi must be finite and non-empty".into()));
            }
        }
        if self.eps_trunc.is_some_and(|e| e <= 0.0) {
            return Err(CliError::Config("eps_trunc must be positive".into()));
        }
        if self.grid_step.is_some_and(|s| s <= 0.0) {
            return Err(CliError::Config("grid_step must be positive".into()));
        }
        if self.cutoff.is_some_and(|d| d < 3) {
            return Err(CliError::Config("cutoff must be at least 3".into()));
        }
        Ok(())
    }

    pub fn family(&self) -> Result<Family, CliError> {
        self.family
            .map(Family::from)
            .ok_or_else(|| CliError::Config("--family is required".into()))
    }

    /// The state described by the per-mode parameters, or by `nbar_total` and `split` when a
    /// total is given. Unset per-mode parameters are zero.
    pub fn state_spec(&self) -> Result<StateSpec, CliError> {
        let family = self.family()?;
        if let Some(total) = self.nbar_total {
            let split = self.split.unwrap_or(0.5);
            return Ok(budget_to_spec(family, EnergyBudget::new(total, false), split)?);
        }
        let g = |v: Option<f64>| v.unwrap_or(0.0);
        let spec = match family {
            Family::Cc => StateSpec::coherent(g(self.z1), g(self.z2)),
            Family::Tt => StateSpec::thermal(g(self.nbar1), g(self.nbar2)),
            Family::Ss => StateSpec::squeezed(g(self.r1), g(self.r2)),
            Family::Tmsv => StateSpec::tmsv(g(self.r)),
            Family::Vac => StateSpec::VacuumPair,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn phis(&self, default: &[f64]) -> Vec<f64> {
        self.phi.as_ref().map_or_else(|| default.to_vec(), PhiSetting::values)
    }

    pub fn params(&self) -> Vec<DpaParams> {
        self.phis(&[0.0]).into_iter().map(DpaParams::new).collect()
    }

    pub fn stage(&self) -> Stage {
        self.stage.map_or(Stage::After, Stage::from)
    }

    pub fn cutoff(&self) -> Result<Option<FockCutoff>, CliError> {
        self.cutoff
            .map(|d| FockCutoff::symmetric(d).map_err(CliError::from))
            .transpose()
    }

    pub fn eps_trunc(&self) -> f64 {
        self.eps_trunc.unwrap_or(dpa_core::states::DEFAULT_EPS_TRUNC)
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        let d = QuadratureConfig::default();
        QuadratureConfig {
            box_halfwidth: self.box_halfwidth,
            nodes_per_axis: self.quad_nodes.unwrap_or(d.nodes_per_axis),
            max_doublings: d.max_doublings,
            tol_wln: self.tol_wln.unwrap_or(d.tol_wln),
        }
    }

    /// The config with output-location fields removed; this is what gets hashed and echoed,
    /// so the same scenario written to two directories yields identical files.
    pub fn canonical(&self) -> ScenarioConfig {
        ScenarioConfig {
            out: None,
            format: None,
            ..self.clone()
        }
    }

    /// Hex SHA-256 of the canonical JSON.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.canonical()).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
