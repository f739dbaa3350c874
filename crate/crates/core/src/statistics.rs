//! Joint photon-number distributions and the discorrelation criterion.

use serde::Serialize;

use crate::error::{DpaError, Result};
use crate::states::{apply_dpa, build_input_default, DpaParams, StateSpec, TwoModeDensity};

pub const DEFAULT_EPS_DIAGONAL: f64 = 1e-10;
pub const DEFAULT_EPS_MARGINAL: f64 = 1e-6;
pub const DEFAULT_N_MAX: usize = 10;

/// `P[n1][n2] = <n1, n2| rho |n1, n2>` for `n1, n2 <= n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JpndTable {
    pub n_max: usize,
    pub p: Vec<Vec<f64>>,
    pub marginal1: Vec<f64>,
    pub marginal2: Vec<f64>,
    pub captured_mass: f64,
}

impl JpndTable {
    pub fn from_table(p: Vec<Vec<f64>>) -> Self {
        let n_max = p.len().saturating_sub(1);
        let marginal1: Vec<f64> = p.iter().map(|row| row.iter().sum()).collect();
        let marginal2: Vec<f64> = (0..p.len())
            .map(|n2| p.iter().map(|row| row[n2]).sum())
            .collect();
        let captured_mass = marginal1.iter().sum();
        Self {
            n_max,
            p,
            marginal1,
            marginal2,
            captured_mass,
        }
    }

    pub fn get(&self, n1: usize, n2: usize) -> f64 {
        self.p[n1][n2]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..=self.n_max).map(|n| self.p[n][n]).collect()
    }
}

/// Largest window allowed for `rho`: the top level of each mode is left out.
pub fn max_window(rho: &TwoModeDensity) -> usize {
    let c = rho.cutoff();
    c.d1.min(c.d2) - 2
}

pub fn jpnd(rho: &TwoModeDensity, n_max: usize) -> Result<JpndTable> {
    let guard = max_window(rho);
    if n_max > guard {
        return Err(DpaError::WindowTooLarge { n_max, guard });
    }
    let cut = rho.cutoff();
    let pop = rho.populations();
    let p = (0..=n_max)
        .map(|n1| (0..=n_max).map(|n2| pop[cut.index(n1, n2)]).collect())
        .collect();
    Ok(JpndTable::from_table(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscorrelationVerdict {
    pub discorrelated: bool,
    pub max_diagonal: f64,
    /// Smaller of the two marginal totals.
    pub min_marginal_mass: f64,
    pub eps: f64,
    pub eps_marginal: f64,
}

/// `P_{n,n} = 0` for every `n` in the window while both marginals carry weight.
pub fn discorrelation_verdict(
    table: &JpndTable,
    eps: f64,
    eps_marginal: f64,
) -> DiscorrelationVerdict {
    let max_diagonal = table.diagonal().into_iter().fold(0.0, f64::max);
    let m1: f64 = table.marginal1.iter().sum();
    let m2: f64 = table.marginal2.iter().sum();
    let min_marginal_mass = m1.min(m2);
    DiscorrelationVerdict {
        discorrelated: max_diagonal < eps && min_marginal_mass > eps_marginal,
        max_diagonal,
        min_marginal_mass,
        eps,
        eps_marginal,
    }
}

/// `P_{n,n}` of the photon-added coherent pair at each phase of `phi_grid`.
pub fn diagonal_vs_phase(spec: &StateSpec, n: usize, phi_grid: &[f64]) -> Result<Vec<f64>> {
    if !matches!(spec, StateSpec::CoherentPair { .. }) {
        return Err(DpaError::InvalidParameter(
            "diagonal_vs_phase takes a coherent pair".into(),
        ));
    }
    let rho = build_input_default(spec)?;
    let guard = max_window(&rho);
    if n > guard {
        return Err(DpaError::WindowTooLarge { n_max: n, guard });
    }
    phi_grid
        .iter()
        .map(|&phi| {
            let out = apply_dpa(&rho, DpaParams::new(phi))?.rho;
            Ok(out.element(n, n, n, n).re)
        })
        .collect()
}
