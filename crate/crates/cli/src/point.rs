//! Single-scenario queries.

use std::time::{SystemTime, UNIX_EPOCH};

use dpa_core::entanglement::{npt_closed, subspace_witness, NEGATIVE_EIGEN_THRESHOLD};
use dpa_core::states::{apply_dpa, build_input, default_cutoff, normalization_closed};
use dpa_core::statistics::{
    discorrelation_verdict, jpnd, DEFAULT_EPS_DIAGONAL, DEFAULT_EPS_MARGINAL, DEFAULT_N_MAX,
};
use dpa_core::wigner::{section_grid, wln, SectionPlane, WignerEvaluator};
use dpa_core::{DpaParams, Stage, StateSpec, TwoModeDensity};
use serde_json::{json, Value};

use crate::config::{Format, Quantity, ScenarioConfig};
use crate::error::CliError;
use crate::output::{Cell, Dataset, TOOL_VERSION};

pub const AXIS_NAMES: [&str; 4] = ["q1", "p1", "q2", "p2"];

/// A truncated state together with how it was truncated.
pub struct BuiltState {
    pub rho: TwoModeDensity,
    pub convergence: Value,
}

/// Build the input or photon-added state honouring the cutoff and truncation overrides.
pub fn build(
    cfg: &ScenarioConfig,
    spec: &StateSpec,
    params: DpaParams,
    stage: Stage,
) -> Result<BuiltState, CliError> {
    let cutoff = cfg.cutoff()?.unwrap_or_else(|| default_cutoff(spec));
    let input = build_input(spec, cutoff, cfg.eps_trunc())?;
    let input_tail = input.tail_mass();
    let (rho, dropped) = match stage {
        Stage::Before => (input, 0.0),
        Stage::After => {
            let added = apply_dpa(&input, params)?;
            (added.rho, added.dropped_mass)
        }
    };
    Ok(BuiltState {
        rho,
        convergence: json!({
            "cutoff": [cutoff.d1, cutoff.d2],
            "eps_trunc": cfg.eps_trunc(),
            "input_tail_mass": input_tail,
            "dropped_mass": dropped,
        }),
    })
}

pub fn stage_tag(stage: Stage) -> &'static str {
    match stage {
        Stage::Before => "before",
        Stage::After => "after",
    }
}

/// Output of [`run_point`].
#[derive(Debug, Clone)]
pub struct ResultRecord {
    pub scenario: ScenarioConfig,
    pub quantity: Quantity,
    pub data: Dataset,
    pub convergence: Vec<Value>,
    pub timestamp_unix: u64,
}

impl ResultRecord {
    pub fn to_json(&self) -> Result<String, CliError> {
        let table: Value = serde_json::from_str(&self.data.to_json(&self.scenario.hash())?)
            .expect("dataset json parses");
        let doc = json!({
            "scenario": self.scenario.canonical(),
            "config_sha256": self.scenario.hash(),
            "quantity": self.quantity.tag(),
            "columns": table["columns"],
            "values": table["rows"],
            "convergence": self.convergence,
            "tool_version": TOOL_VERSION,
            "timestamp_unix": self.timestamp_unix,
        });
        Ok(serde_json::to_string_pretty(&doc).expect("json serializes") + "\n")
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let conv = serde_json::to_string(&self.convergence).expect("json serializes");
        self.data
            .clone()
            .with_meta("quantity", self.quantity.tag())
            .with_meta("convergence", conv)
            .with_meta("timestamp_unix", self.timestamp_unix.to_string())
            .to_csv(&self.scenario.hash())
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// First value of the main column, convenient for scalar queries.
    pub fn scalar(&self) -> Option<f64> {
        self.data.numbers(self.quantity.tag()).first().copied()
    }
}

pub fn run_point(cfg: &ScenarioConfig, quantity: Quantity) -> Result<ResultRecord, CliError> {
    let spec = cfg.state_spec()?;
    let stage = cfg.stage();
    let params = cfg.params();
    let mut convergence = Vec::new();
    let data = match quantity {
        Quantity::NptClosed => {
            let mut d = Dataset::new("point", &["phi", "stage", "npt_closed"]);
            for p in &params {
                d.push(vec![p.phi().into(), stage_tag(stage).into(), npt_closed(&spec, *p, stage).into()]);
            }
            convergence.push(json!({"method": "closed_form"}));
            d
        }
        Quantity::NptNumeric => {
            let mut d = Dataset::new(
                "point",
                &["phi", "stage", "npt_numeric", "npt_closed", "abs_diff"],
            );
            for p in &params {
                let built = build(cfg, &spec, *p, stage)?;
                let numeric = subspace_witness(&built.rho)?.npt;
                let closed = npt_closed(&spec, *p, stage);
                d.push(vec![
                    p.phi().into(),
                    stage_tag(stage).into(),
                    numeric.into(),
                    closed.into(),
                    (numeric - closed).abs().into(),
                ]);
                let mut c = built.convergence;
                c["negative_eigen_threshold"] = json!(NEGATIVE_EIGEN_THRESHOLD);
                convergence.push(c);
            }
            d
        }
        Quantity::Normalization => {
            let mut d = Dataset::new(
                "point",
                &["phi", "normalization", "normalization_numeric", "abs_diff"],
            );
            for p in &params {
                let built = build(cfg, &spec, *p, Stage::Before)?;
                let added = apply_dpa(&built.rho, *p)?;
                let closed = normalization_closed(&spec, *p);
                d.push(vec![
                    p.phi().into(),
                    closed.into(),
                    added.numerator_trace.into(),
                    (closed - added.numerator_trace).abs().into(),
                ]);
                let mut c = built.convergence;
                c["dropped_mass"] = json!(added.dropped_mass);
                convergence.push(c);
            }
            d
        }
        Quantity::Jpnd => {
            let n_max = cfg.n_max.unwrap_or(DEFAULT_N_MAX);
            let eps = cfg.eps_diagonal.unwrap_or(DEFAULT_EPS_DIAGONAL);
            let eps_m = cfg.eps_marginal.unwrap_or(DEFAULT_EPS_MARGINAL);
            let mut d = Dataset::new("point", &["phi", "n1", "n2", "jpnd"]);
            for p in &params {
                let built = build(cfg, &spec, *p, stage)?;
                let table = jpnd(&built.rho, n_max)?;
                for n1 in 0..=n_max {
                    for n2 in 0..=n_max {
                        d.push(vec![p.phi().into(), n1.into(), n2.into(), table.get(n1, n2).into()]);
                    }
                }
                let verdict = discorrelation_verdict(&table, eps, eps_m);
                let mut c = built.convergence;
                c["captured_mass"] = json!(table.captured_mass);
                c["verdict"] = serde_json::to_value(verdict).expect("json");
                convergence.push(c);
            }
            d
        }
        Quantity::Wln => {
            let quad = cfg.quadrature();
            let mut d = Dataset::new(
                "point",
                &["phi", "wln", "integral", "nodes_per_axis", "box_halfwidth", "last_delta"],
            );
            for p in &params {
                let eval = WignerEvaluator::analytic(spec, *p, stage);
                let rep = wln(&eval, &quad)?;
                d.push(vec![
                    p.phi().into(),
                    rep.wln.into(),
                    rep.integral.into(),
                    rep.nodes_per_axis.into(),
                    rep.box_halfwidth.into(),
                    rep.last_delta.into(),
                ]);
                convergence.push(json!({
                    "method": "gauss_legendre_whitened",
                    "tol_wln": quad.tol_wln,
                    "levels": rep.levels,
                }));
            }
            d
        }
        Quantity::WignerSection => {
            let plane = section_plane(cfg);
            let (a, b) = plane.axes;
            let mut d = Dataset::new("point", &["phi", AXIS_NAMES[a], AXIS_NAMES[b], "w"]);
            for p in &params {
                let eval = WignerEvaluator::analytic(spec, *p, stage);
                let grid = section_grid(&eval, plane)?;
                push_grid(&mut d, Some(p.phi()), &grid.coords, &grid.values);
                convergence.push(json!({"method": "closed_form", "plane": plane}));
            }
            d
        }
    };
    Ok(ResultRecord {
        scenario: cfg.canonical(),
        quantity,
        data,
        convergence,
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    })
}

pub fn section_plane(cfg: &ScenarioConfig) -> SectionPlane {
    let d = SectionPlane::default();
    SectionPlane {
        extent: cfg.section_extent.unwrap_or(d.extent),
        resolution: cfg.section_points.unwrap_or(d.resolution),
        ..d
    }
}

/// Long-format rows `(u, v, w)` of a section grid, optionally prefixed by the phase.
pub fn push_grid(d: &mut Dataset, phi: Option<f64>, coords: &[f64], values: &[Vec<f64>]) {
    for (i, &u) in coords.iter().enumerate() {
        for (j, &v) in coords.iter().enumerate() {
            let mut row: Vec<Cell> = Vec::with_capacity(4);
            if let Some(phi) = phi {
                row.push(phi.into());
            }
            row.extend([Cell::Num(u), Cell::Num(v), Cell::Num(values[i][j])]);
            d.push(row);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FamilyArg;
    use approx::assert_abs_diff_eq;

    fn cfg(family: FamilyArg) -> ScenarioConfig {
        ScenarioConfig {
            family: Some(family),
            ..Default::default()
        }
    }

    #[test]
    fn coherent_pair_at_pi_is_maximal() {
        let z = 1.5f64.sqrt();
        let c = ScenarioConfig {
            z1: Some(z),
            z2: Some(z),
            phi: Some(crate::config::PhiSetting::Scalar(std::f64::consts::PI)),
            ..cfg(FamilyArg::Cc)
        };
        let rec = run_point(&c, Quantity::NptClosed).unwrap();
        assert_abs_diff_eq!(rec.scalar().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn thermal_vacuum_numeric_npt() {
        let rec = run_point(&cfg(FamilyArg::Tt), Quantity::NptNumeric).unwrap();
        assert_abs_diff_eq!(rec.scalar().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn small_cutoff_is_a_truncation_error() {
        let c = ScenarioConfig {
            nbar1: Some(3.0),
            nbar2: Some(3.0),
            cutoff: Some(4),
            ..cfg(FamilyArg::Tt)
        };
        let err = run_point(&c, Quantity::NptNumeric).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn normalization_matches() {
        let c = ScenarioConfig {
            r1: Some(0.4),
            r2: Some(0.9),
            ..cfg(FamilyArg::Ss)
        };
        let rec = run_point(&c, Quantity::Normalization).unwrap();
        let diff = rec.data.numbers("abs_diff")[0];
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn records_render() {
        let rec = run_point(&cfg(FamilyArg::Vac), Quantity::Jpnd).unwrap();
        let json: Value = serde_json::from_str(&rec.to_json().unwrap()).unwrap();
        assert_eq!(json["quantity"], "jpnd");
        assert_eq!(json["convergence"][0]["verdict"]["discorrelated"], true);
        let csv = rec.to_csv().unwrap();
        assert!(csv.lines().any(|l| l == "phi,n1,n2,jpnd"));
    }
}
