//! Figure datasets.

use std::f64::consts::PI;

use dpa_core::entanglement::npt_closed;
use dpa_core::states::budget_to_spec;
use dpa_core::statistics::{
    discorrelation_verdict, jpnd, DEFAULT_EPS_DIAGONAL, DEFAULT_EPS_MARGINAL, DEFAULT_N_MAX,
};
use dpa_core::wigner::{section_grid, wln, WignerEvaluator, WlnReport};
use dpa_core::{DpaParams, EnergyBudget, Family, Stage, StateSpec};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::output::{format_number, Artifact, Cell, Dataset};
use crate::point::{build, push_grid, section_plane, stage_tag, AXIS_NAMES};

pub const FIGURE_IDS: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

/// WLN curve values to be matched against the computed coherent-pair curves.
pub const REFERENCE_WLN_CC: [f64; 4] = [0.35, 0.328, 0.244, 0.233];
/// Same for the thermal-pair curves, top to bottom.
pub const REFERENCE_WLN_TT: [f64; 6] = [0.144, 0.139, 0.084, 0.074, 0.051, 0.046];

pub fn run_figure(id: &str, cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    match id {
        "fig2" => fig2(cfg),
        "fig3" => fig3(cfg),
        "fig4" => fig4(cfg),
        "fig5" => fig5(cfg),
        "fig6" => fig6(cfg),
        "fig7" => fig7(cfg),
        other => Err(CliError::Config(format!(
            "unknown figure '{other}', expected one of {}",
            FIGURE_IDS.join(", ")
        ))),
    }
}

/// `0, step, 2 step, ...` up to `max` inclusive.
pub fn axis(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

/// `n` evenly spaced phases on `[0, pi]`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect(),
    }
}

/// File-name fragment for a phase.
pub fn phi_tag(phi: f64) -> String {
    let named = [(0.0, "phi0"), (PI / 2.0, "phi_pi2"), (PI, "phi_pi")];
    for (v, tag) in named {
        if (phi - v).abs() < 1e-12 {
            return tag.to_string();
        }
    }
    format!("phi{}", format_number(phi).unwrap_or_default().replace('.', "p").replace('-', "m"))
}

fn split_tag(split: f64) -> String {
    if split == 0.5 {
        "sym".into()
    } else if split == 1.0 {
        "asym".into()
    } else {
        format!("split{}", format_number(split).unwrap_or_default().replace('.', "p"))
    }
}

fn budget_spec(family: Family, nbar_total: f64, split: f64) -> Result<StateSpec, CliError> {
    Ok(budget_to_spec(family, EnergyBudget::new(nbar_total, false), split)?)
}

/// Human-readable parameter string, e.g. `z1=1.2;z2=1.2`.
pub fn describe(spec: &StateSpec) -> String {
    let f = |v: f64| format_number(v).unwrap_or_default();
    match *spec {
        StateSpec::CoherentPair { z1, z2 } => {
            let c = |z: dpa_core::C64| {
                if z.im == 0.0 {
                    f(z.re)
                } else {
                    format!("{}{:+}i", f(z.re), f(z.im))
                }
            };
            format!("z1={};z2={}", c(z1), c(z2))
        }
        StateSpec::ThermalPair { nbar1, nbar2 } => format!("nbar1={};nbar2={}", f(nbar1), f(nbar2)),
        StateSpec::SqueezedPair { r1, r2 } => format!("r1={};r2={}", f(r1), f(r2)),
        StateSpec::Tmsv { r } => format!("r={}", f(r)),
        StateSpec::VacuumPair => String::new(),
    }
}

fn fig2(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let max = cfg.grid_max.unwrap_or(3.0);
    let step = cfg.grid_step.unwrap_or(0.05);
    let xs = axis(max, step);
    let mut datasets = Vec::new();
    for phi in cfg.phis(&[0.0, PI / 2.0, PI]) {
        let params = DpaParams::new(phi);
        let mut d = Dataset::new(format!("fig2_cc_{}", phi_tag(phi)), &["z1", "z2", "npt"])
            .with_meta("phi", format_number(phi)?);
        for &z1 in &xs {
            for &z2 in &xs {
                let spec = StateSpec::coherent(z1, z2);
                d.push(vec![z1.into(), z2.into(), npt_closed(&spec, params, Stage::After).into()]);
            }
        }
        datasets.push(d);
    }
    let mut d = Dataset::new("fig2_tt", &["nbar1", "nbar2", "npt"]);
    for &n1 in &xs {
        for &n2 in &xs {
            let spec = StateSpec::thermal(n1, n2);
            d.push(vec![
                n1.into(),
                n2.into(),
                npt_closed(&spec, DpaParams::new(0.0), Stage::After).into(),
            ]);
        }
    }
    datasets.push(d);
    Ok(Artifact {
        id: "fig2".into(),
        datasets,
        convergence: vec![json!({"method": "closed_form"})],
        extras: Vec::new(),
        parameters: json!({"grid_max": max, "grid_step": step, "phi": cfg.phis(&[0.0, PI / 2.0, PI])}),
    })
}

fn fig3(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let max = cfg.grid_max.unwrap_or(4.0);
    let step = cfg.grid_step.unwrap_or(0.05);
    let split = cfg.split.unwrap_or(0.5);
    let mut d = Dataset::new(
        "fig3",
        &["nbar_total", "npt_cc_phi0", "npt_cc_phi_pi2", "npt_cc_phi_pi", "npt_tt", "npt_ss", "npt_tms"],
    )
    .with_meta("split", format_number(split)?);
    let p0 = DpaParams::new(0.0);
    for n in axis(max, step) {
        let cc = budget_spec(Family::Cc, n, split)?;
        let mut row: Vec<Cell> = vec![n.into()];
        for phi in [0.0, PI / 2.0, PI] {
            row.push(npt_closed(&cc, DpaParams::new(phi), Stage::After).into());
        }
        for family in [Family::Tt, Family::Ss, Family::Tmsv] {
            row.push(npt_closed(&budget_spec(family, n, split)?, p0, Stage::After).into());
        }
        d.push(row);
    }
    Ok(Artifact {
        id: "fig3".into(),
        datasets: vec![d],
        convergence: vec![json!({"method": "closed_form"})],
        extras: Vec::new(),
        parameters: json!({"grid_max": max, "grid_step": step, "split": split}),
    })
}

fn fig4(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let total = cfg.nbar_total.unwrap_or(3.0);
    let split = cfg.split.unwrap_or(0.5);
    let n_max = cfg.n_max.unwrap_or(DEFAULT_N_MAX);
    let phi = cfg.phis(&[0.0])[0];
    let eps = cfg.eps_diagonal.unwrap_or(DEFAULT_EPS_DIAGONAL);
    let eps_m = cfg.eps_marginal.unwrap_or(DEFAULT_EPS_MARGINAL);
    let mut datasets = Vec::new();
    let mut convergence = Vec::new();
    for family in Family::FOUR {
        // the coherent pair is only discorrelated at phi = pi
        let params = DpaParams::new(if family == Family::Cc { PI } else { phi });
        let spec = budget_spec(family, total, split)?;
        let built = build(cfg, &spec, params, Stage::After)?;
        let table = jpnd(&built.rho, n_max)?;
        let mut d = Dataset::new(format!("fig4_{}", family.tag()), &["n1", "n2", "p"])
            .with_meta("state", describe(&spec))
            .with_meta("phi", format_number(params.phi())?);
        for n1 in 0..=n_max {
            for n2 in 0..=n_max {
                d.push(vec![n1.into(), n2.into(), table.get(n1, n2).into()]);
            }
        }
        datasets.push(d);
        let mut c = built.convergence;
        c["family"] = json!(family.tag());
        c["captured_mass"] = json!(table.captured_mass);
        c["verdict"] = serde_json::to_value(discorrelation_verdict(&table, eps, eps_m)).expect("json");
        convergence.push(c);
    }
    Ok(Artifact {
        id: "fig4".into(),
        datasets,
        convergence,
        extras: Vec::new(),
        parameters: json!({"nbar_total": total, "split": split, "n_max": n_max, "phi": phi, "phi_cc": PI}),
    })
}

fn fig5(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let z1 = cfg.z1.unwrap_or(1.5f64.sqrt());
    let z2 = cfg.z2.unwrap_or(z1);
    let spec = StateSpec::coherent(z1, z2);
    let phis = cfg.phis(&phase_grid(37));
    let rows = phis
        .par_iter()
        .map(|&phi| {
            let built = build(cfg, &spec, DpaParams::new(phi), Stage::After)?;
            let mut row: Vec<Cell> = vec![phi.into()];
            row.extend((0..5).map(|n| Cell::Num(built.rho.element(n, n, n, n).re)));
            Ok((row, built.convergence))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut d = Dataset::new("fig5", &["phi", "p00", "p11", "p22", "p33", "p44"])
        .with_meta("state", describe(&spec));
    let mut convergence = Vec::new();
    for (row, c) in rows {
        d.push(row);
        if convergence.is_empty() {
            convergence.push(c);
        }
    }
    Ok(Artifact {
        id: "fig5".into(),
        datasets: vec![d],
        convergence,
        extras: Vec::new(),
        parameters: json!({"z1": z1, "z2": z2, "phi": phis}),
    })
}

fn fig6(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let total = cfg.nbar_total.unwrap_or(3.0);
    let split = cfg.split.unwrap_or(0.5);
    let plane = section_plane(cfg);
    let (a, b) = plane.axes;
    let phis = cfg.phis(&[0.0, PI / 2.0, PI]);
    let mut datasets = Vec::new();
    let mut convergence = Vec::new();
    for family in Family::FOUR {
        let spec = budget_spec(family, total, split)?;
        let mut panels = vec![(Stage::Before, 0.0)];
        panels.extend(phis.iter().map(|&p| (Stage::After, p)));
        for (stage, phi) in panels {
            let eval = WignerEvaluator::analytic(spec, DpaParams::new(phi), stage);
            let grid = section_grid(&eval, plane)?;
            let name = match stage {
                Stage::Before => format!("fig6_{}_before", family.tag()),
                Stage::After => format!("fig6_{}_after_{}", family.tag(), phi_tag(phi)),
            };
            let mut d = Dataset::new(name.clone(), &[AXIS_NAMES[a], AXIS_NAMES[b], "w"])
                .with_meta("state", describe(&spec))
                .with_meta("stage", stage_tag(stage))
                .with_meta("phi", format_number(phi)?);
            push_grid(&mut d, None, &grid.coords, &grid.values);
            convergence.push(json!({
                "file": name,
                "method": "closed_form",
                "min": grid.min(),
                "max": grid.max(),
            }));
            datasets.push(d);
        }
    }
    Ok(Artifact {
        id: "fig6".into(),
        datasets,
        convergence,
        extras: Vec::new(),
        parameters: json!({"nbar_total": total, "split": split, "plane": plane, "phi": phis}),
    })
}

/// One WLN curve family: a state family at a fixed energy split.
struct Curve {
    family: Family,
    split: f64,
}

fn fig7(cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let totals = cfg.nbar_total.map_or_else(|| vec![1.0, 2.0, 3.0], |n| vec![n]);
    let phis = cfg.phis(&phase_grid(9));
    let splits = cfg.split.map_or_else(|| vec![0.5, 1.0], |s| vec![s]);
    let families: Vec<Family> = match cfg.family {
        Some(f) => vec![f.into()],
        None => Family::FOUR.to_vec(),
    };
    let mut curves = Vec::new();
    for family in families {
        match family {
            Family::Cc | Family::Tt => curves.extend(splits.iter().map(|&split| Curve { family, split })),
            _ => curves.push(Curve { family, split: 0.5 }),
        }
    }
    let quad = cfg.quadrature();
    let stage = cfg.stage();
    let mut datasets = Vec::new();
    let mut convergence = Vec::new();
    // (label, family, wln values over phi) for the scan report
    let mut summaries: Vec<(String, Family, Vec<f64>)> = Vec::new();
    for curve in &curves {
        let name = format!("fig7_{}_{}", curve.family.tag(), split_tag(curve.split));
        let mut d = Dataset::new(
            name.clone(),
            &["nbar_total", "phi", "nbar1", "nbar2", "wln", "integral", "nodes_per_axis", "last_delta"],
        );
        let curve_totals: &[f64] = if curve.family == Family::Vac { &[0.0] } else { &totals };
        for &total in curve_totals {
            let spec = budget_spec(curve.family, total, curve.split)?;
            let (m1, m2) = spec.mode_means();
            let mut values = Vec::with_capacity(phis.len());
            for &phi in &phis {
                let eval = WignerEvaluator::analytic(spec, DpaParams::new(phi), stage);
                let rep: WlnReport = wln(&eval, &quad)?;
                d.push(vec![
                    total.into(),
                    phi.into(),
                    m1.into(),
                    m2.into(),
                    rep.wln.into(),
                    rep.integral.into(),
                    rep.nodes_per_axis.into(),
                    rep.last_delta.into(),
                ]);
                convergence.push(json!({
                    "file": name,
                    "nbar_total": total,
                    "phi": phi,
                    "nodes_per_axis": rep.nodes_per_axis,
                    "box_halfwidth": rep.box_halfwidth,
                    "last_delta": rep.last_delta,
                    "tol_wln": quad.tol_wln,
                }));
                values.push(rep.wln);
            }
            summaries.push((format!("{} nbar_total={}", describe(&spec), format_number(total)?), curve.family, values));
        }
        datasets.push(d);
    }
    let scan = json!({
        "cc": scan_report(&summaries, Family::Cc, &REFERENCE_WLN_CC, Aggregate::Max),
        "tt": scan_report(&summaries, Family::Tt, &REFERENCE_WLN_TT, Aggregate::Mean),
    });
    Ok(Artifact {
        id: "fig7".into(),
        datasets,
        convergence,
        extras: vec![("fig7_scan.json".into(), scan)],
        parameters: json!({
            "nbar_total": totals,
            "phi": phis,
            "splits": splits,
            "stage": stage_tag(stage),
            "quadrature": quad,
        }),
    })
}

#[derive(Clone, Copy)]
enum Aggregate {
    Max,
    Mean,
}

/// For each reference value, the computed curve whose summary value lies closest.
fn scan_report(
    summaries: &[(String, Family, Vec<f64>)],
    family: Family,
    reference: &[f64],
    agg: Aggregate,
) -> Value {
    let curves: Vec<(&str, f64, f64)> = summaries
        .iter()
        .filter(|(_, f, v)| *f == family && !v.is_empty())
        .map(|(label, _, v)| {
            let summary = match agg {
                Aggregate::Max => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                Aggregate::Mean => v.iter().sum::<f64>() / v.len() as f64,
            };
            let spread = v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - v.iter().copied().fold(f64::INFINITY, f64::min);
            (label.as_str(), summary, spread)
        })
        .collect();
    if curves.is_empty() {
        return Value::Null;
    }
    let matches: Vec<Value> = reference
        .iter()
        .map(|&r| {
            let (label, value, _) = curves
                .iter()
                .min_by(|a, b| (a.1 - r).abs().total_cmp(&(b.1 - r).abs()))
                .expect("non-empty");
            json!({"reference": r, "closest_curve": label, "value": value, "abs_diff": (value - r).abs()})
        })
        .collect();
    let computed: Vec<Value> = curves
        .iter()
        .map(|(label, value, spread)| json!({"curve": label, "value": value, "phi_spread": spread}))
        .collect();
    json!({
        "summary": match agg { Aggregate::Max => "max over phi", Aggregate::Mean => "mean over phi" },
        "curves": computed,
        "matches": matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_and_tags() {
        let a = axis(3.0, 0.05);
        assert_eq!(a.len(), 61);
        assert_eq!(*a.last().unwrap(), 60.0 * 0.05);
        let g = phase_grid(37);
        assert_eq!(g.len(), 37);
        assert_eq!(g[36], PI);
        assert_eq!(phi_tag(0.0), "phi0");
        assert_eq!(phi_tag(PI), "phi_pi");
        assert_eq!(phi_tag(0.25), "phi0p25");
        assert_eq!(split_tag(0.25), "split0p25");
    }

    #[test]
    fn unknown_figure() {
        let err = run_figure("fig9", &ScenarioConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn fig3_starts_at_one() {
        let art = run_figure("fig3", &ScenarioConfig::default()).unwrap();
        let d = &art.datasets[0];
        assert_eq!(d.rows.len(), 81);
        for v in &d.rows[0][1..] {
            assert_eq!(*v, Cell::Num(1.0));
        }
    }

    #[test]
    fn fig5_diagonal_vanishes_at_pi() {
        let art = run_figure("fig5", &ScenarioConfig::default()).unwrap();
        let d = &art.datasets[0];
        let last = d.rows.last().unwrap();
        assert_eq!(last[0], Cell::Num(PI));
        for cell in &last[2..] {
            match cell {
                Cell::Num(v) => assert!(v.abs() < 1e-14),
                _ => panic!(),
            }
        }
    }

    #[test]
    fn fig6_has_sixteen_panels() {
        let cfg = ScenarioConfig {
            section_points: Some(11),
            ..Default::default()
        };
        let art = run_figure("fig6", &cfg).unwrap();
        assert_eq!(art.datasets.len(), 16);
        assert!(art.datasets.iter().all(|d| d.rows.len() == 121));
    }
}
