//! The four two-mode input families, delocalized photon addition, and the closed-form
//! normalization factors.
//!
//! Densities are stored as weighted ensembles of sparse kets,
//! `rho = sum_k w_k |psi_k><psi_k|`. Pure inputs have one dense component; the thermal
//! product is a mixture of Fock products, each of which stays two-sparse after addition.
//! This keeps thermal cutoffs of a few hundred levels affordable; [`TwoModeDensity::to_matrix`]
//! materializes the dense matrix when it is needed.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{DpaError, Result};
use crate::fock::{ComplexMatrix, FockCutoff, C64, ZERO};

/// Default limit on the probability mass left outside the truncated basis.
pub const DEFAULT_EPS_TRUNC: f64 = 1e-10;

/// Mass tail targeted by the automatic cutoff choice.
const AUTO_TAIL_TARGET: f64 = 1e-14;
/// First-moment tail `sum_{n >= d-1} (n+1) P_n` targeted by the automatic cutoff choice; this
/// bounds the amplitude the truncated creation operator drops from the top level.
const AUTO_MOMENT_TARGET: f64 = 1e-12;
const MIN_CUTOFF: usize = 12;
const MAX_SERIES: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Cc,
    Tt,
    Ss,
    Tmsv,
    Vac,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Cc, Family::Tt, Family::Ss, Family::Tmsv, Family::Vac];
    pub const FOUR: [Family; 4] = [Family::Cc, Family::Tt, Family::Ss, Family::Tmsv];

    pub fn tag(&self) -> &'static str {
        match self {
            Family::Cc => "cc",
            Family::Tt => "tt",
            Family::Ss => "ss",
            Family::Tmsv => "tmsv",
            Family::Vac => "vac",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.tag() == tag)
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Whether a quantity refers to the input state or to the state after photon addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Before,
    After,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum StateSpec {
    #[serde(rename = "cc")]
    CoherentPair { z1: C64, z2: C64 },
    #[serde(rename = "tt")]
    ThermalPair { nbar1: f64, nbar2: f64 },
    #[serde(rename = "ss")]
    SqueezedPair { r1: f64, r2: f64 },
    #[serde(rename = "tmsv")]
    Tmsv { r: f64 },
    #[serde(rename = "vac")]
    VacuumPair,
}

impl StateSpec {
    pub fn coherent(z1: f64, z2: f64) -> Self {
        Self::CoherentPair {
            z1: C64::new(z1, 0.0),
            z2: C64::new(z2, 0.0),
        }
    }

    pub fn thermal(nbar1: f64, nbar2: f64) -> Self {
        Self::ThermalPair { nbar1, nbar2 }
    }

    pub fn squeezed(r1: f64, r2: f64) -> Self {
        Self::SqueezedPair { r1, r2 }
    }

    pub fn tmsv(r: f64) -> Self {
        Self::Tmsv { r }
    }

    pub fn family(&self) -> Family {
        match self {
            StateSpec::CoherentPair { .. } => Family::Cc,
            StateSpec::ThermalPair { .. } => Family::Tt,
            StateSpec::SqueezedPair { .. } => Family::Ss,
            StateSpec::Tmsv { .. } => Family::Tmsv,
            StateSpec::VacuumPair => Family::Vac,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(DpaError::InvalidParameter(format!("{name} must be finite")))
            }
        };
        match *self {
            StateSpec::CoherentPair { z1, z2 } => {
                finite(z1.re, "z1")?;
                finite(z1.im, "z1")?;
                finite(z2.re, "z2")?;
                finite(z2.im, "z2")
            }
            StateSpec::ThermalPair { nbar1, nbar2 } => {
                finite(nbar1, "nbar1")?;
                finite(nbar2, "nbar2")?;
                if nbar1 < 0.0 || nbar2 < 0.0 {
                    return Err(DpaError::InvalidParameter(
                        "thermal mean photon numbers must be non-negative".into(),
                    ));
                }
                Ok(())
            }
            StateSpec::SqueezedPair { r1, r2 } => {
                finite(r1, "r1")?;
                finite(r2, "r2")
            }
            StateSpec::Tmsv { r } => finite(r, "r"),
            StateSpec::VacuumPair => Ok(()),
        }
    }

    /// `lambda_j = tanh r_j` for the squeezed pair, `lambda = tanh r` (twice) for the TMSV.
    pub fn lambdas(&self) -> Option<(f64, f64)> {
        match *self {
            StateSpec::SqueezedPair { r1, r2 } => Some((r1.tanh(), r2.tanh())),
            StateSpec::Tmsv { r } => Some((r.tanh(), r.tanh())),
            _ => None,
        }
    }

    /// `kappa_j = (1 - lambda_j^2)^{-1} = cosh^2 r_j`.
    pub fn kappas(&self) -> Option<(f64, f64)> {
        match *self {
            StateSpec::SqueezedPair { r1, r2 } => Some((r1.cosh().powi(2), r2.cosh().powi(2))),
            StateSpec::Tmsv { r } => Some((r.cosh().powi(2), r.cosh().powi(2))),
            _ => None,
        }
    }

    /// Mean photon number of each input mode.
    pub fn mode_means(&self) -> (f64, f64) {
        match *self {
            StateSpec::CoherentPair { z1, z2 } => (z1.norm_sqr(), z2.norm_sqr()),
            StateSpec::ThermalPair { nbar1, nbar2 } => (nbar1, nbar2),
            StateSpec::SqueezedPair { r1, r2 } => (r1.sinh().powi(2), r2.sinh().powi(2)),
            StateSpec::Tmsv { r } => (r.sinh().powi(2), r.sinh().powi(2)),
            StateSpec::VacuumPair => (0.0, 0.0),
        }
    }

    /// Total input mean photon number.
    pub fn total_mean(&self) -> f64 {
        let (a, b) = self.mode_means();
        a + b
    }

    /// The same family with every parameter set to zero.
    pub fn zeroed(&self) -> Self {
        match self {
            StateSpec::CoherentPair { .. } => Self::coherent(0.0, 0.0),
            StateSpec::ThermalPair { .. } => Self::thermal(0.0, 0.0),
            StateSpec::SqueezedPair { .. } => Self::squeezed(0.0, 0.0),
            StateSpec::Tmsv { .. } => Self::tmsv(0.0),
            StateSpec::VacuumPair => StateSpec::VacuumPair,
        }
    }

    /// Exchange the roles of the two modes.
    pub fn swapped(&self) -> Self {
        match *self {
            StateSpec::CoherentPair { z1, z2 } => StateSpec::CoherentPair { z1: z2, z2: z1 },
            StateSpec::ThermalPair { nbar1, nbar2 } => Self::thermal(nbar2, nbar1),
            StateSpec::SqueezedPair { r1, r2 } => Self::squeezed(r2, r1),
            other => other,
        }
    }
}

/// Superposition phase of the addition operator `a1† + e^{i phi} a2†`, reduced to `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpaParams {
    phi: f64,
}

impl DpaParams {
    pub fn new(phi: f64) -> Self {
        let mut p = phi.rem_euclid(TAU);
        if p >= TAU {
            p = 0.0;
        }
        Self { phi: p }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn phase(&self) -> C64 {
        C64::from_polar(1.0, self.phi)
    }

    /// The phase as a point on `[0, pi]` grids: exact `pi` maps to `e^{i pi} = -1`.
    pub fn is_pi(&self) -> bool {
        (self.phi - PI).abs() < 1e-12
    }
}

/// Total input mean photon number shared between the two modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBudget {
    pub nbar_total: f64,
    pub symmetric: bool,
}

impl EnergyBudget {
    pub fn new(nbar_total: f64, symmetric: bool) -> Self {
        Self {
            nbar_total,
            symmetric,
        }
    }
}

/// Spread `budget` over the two modes of `family`; `split` is the mode-1 share
/// (ignored for the TMSV and vacuum, forced to one half when the budget is symmetric).
/// Coherent amplitudes come out real and non-negative.
pub fn budget_to_spec(family: Family, budget: EnergyBudget, split: f64) -> Result<StateSpec> {
    let total = budget.nbar_total;
    if !(total.is_finite() && total >= 0.0) {
        return Err(DpaError::InvalidParameter(format!(
            "total mean photon number must be finite and non-negative, got {total}"
        )));
    }
    let split = if budget.symmetric { 0.5 } else { split };
    if !(0.0..=1.0).contains(&split) {
        return Err(DpaError::InvalidParameter(format!(
            "split must lie in [0, 1], got {split}"
        )));
    }
    let n1 = total * split;
    let n2 = total - n1;
    Ok(match family {
        Family::Cc => StateSpec::coherent(n1.sqrt(), n2.sqrt()),
        Family::Tt => StateSpec::thermal(n1, n2),
        Family::Ss => StateSpec::squeezed(n1.sqrt().asinh(), n2.sqrt().asinh()),
        Family::Tmsv => StateSpec::tmsv((total / 2.0).sqrt().asinh()),
        Family::Vac => StateSpec::VacuumPair,
    })
}

/// Closed-form `N = Tr(A rho_in A†)`.
pub fn normalization_closed(spec: &StateSpec, params: DpaParams) -> f64 {
    match *spec {
        StateSpec::CoherentPair { z1, z2 } => {
            (z1 + params.phase().conj() * z2).norm_sqr() + 2.0
        }
        StateSpec::ThermalPair { nbar1, nbar2 } => nbar1 + nbar2 + 2.0,
        StateSpec::SqueezedPair { .. } | StateSpec::Tmsv { .. } => {
            let (k1, k2) = spec.kappas().expect("squeezed families carry kappa");
            k1 + k2
        }
        StateSpec::VacuumPair => 2.0,
    }
}

/// A two-mode ket with sorted, unique, nonzero entries over the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseKet {
    entries: Vec<(usize, C64)>,
}

impl SparseKet {
    /// Build from arbitrary entries; duplicates are summed and exact zeros dropped.
    pub fn from_entries(mut entries: Vec<(usize, C64)>) -> Self {
        entries.sort_unstable_by_key(|e| e.0);
        let mut out: Vec<(usize, C64)> = Vec::with_capacity(entries.len());
        for (i, a) in entries {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += a,
                _ => out.push((i, a)),
            }
        }
        out.retain(|e| e.1 != ZERO);
        Self { entries: out }
    }

    pub fn entries(&self) -> &[(usize, C64)] {
        &self.entries
    }

    pub fn amplitude(&self, idx: usize) -> C64 {
        self.entries
            .binary_search_by_key(&idx, |e| e.0)
            .map_or(ZERO, |k| self.entries[k].1)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.1.norm_sqr()).sum()
    }

    fn scaled(mut self, s: f64) -> Self {
        for e in &mut self.entries {
            e.1 *= s;
        }
        self
    }
}

/// Truncated two-mode density `sum_k w_k |psi_k><psi_k|` with unit-norm kets.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeDensity {
    cutoff: FockCutoff,
    components: Vec<(f64, SparseKet)>,
    tail_mass: f64,
}

impl TwoModeDensity {
    /// Normalizes `components` to unit trace. `tail_mass` records the probability that was
    /// already missing before this renormalization.
    pub fn from_components(
        cutoff: FockCutoff,
        components: Vec<(f64, SparseKet)>,
        tail_mass: f64,
    ) -> Result<Self> {
        let dim = cutoff.dim();
        let mut total = 0.0;
        let mut kept = Vec::with_capacity(components.len());
        for (w, ket) in components {
            if !(w.is_finite() && w >= 0.0) {
                return Err(DpaError::InvalidParameter(format!(
                    "mixture weight must be finite and non-negative, got {w}"
                )));
            }
            if ket.entries.last().is_some_and(|e| e.0 >= dim) {
                return Err(DpaError::InvalidDimension(format!(
                    "ket index outside the {}x{} basis",
                    cutoff.d1, cutoff.d2
                )));
            }
            let n = ket.norm_sqr();
            if w == 0.0 || n == 0.0 {
                continue;
            }
            total += w * n;
            kept.push((w * n, ket.scaled(1.0 / n.sqrt())));
        }
        if total <= 0.0 {
            return Err(DpaError::ZeroNormalization);
        }
        for c in &mut kept {
            c.0 /= total;
        }
        Ok(Self {
            cutoff,
            components: kept,
            tail_mass: tail_mass.max(0.0),
        })
    }

    pub fn pure(cutoff: FockCutoff, ket: SparseKet, tail_mass: f64) -> Result<Self> {
        Self::from_components(cutoff, vec![(1.0, ket)], tail_mass)
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn components(&self) -> &[(f64, SparseKet)] {
        &self.components
    }

    pub fn is_pure(&self) -> bool {
        self.components.len() == 1
    }

    pub fn trace(&self) -> f64 {
        self.components
            .iter()
            .map(|(w, k)| w * k.norm_sqr())
            .sum()
    }

    /// `<k1, k2| rho |l1, l2>`.
    pub fn element(&self, k1: usize, k2: usize, l1: usize, l2: usize) -> C64 {
        let c = self.cutoff;
        if k1 >= c.d1 || l1 >= c.d1 || k2 >= c.d2 || l2 >= c.d2 {
            return ZERO;
        }
        let (ki, li) = (c.index(k1, k2), c.index(l1, l2));
        self.components
            .iter()
            .map(|(w, ket)| *w * ket.amplitude(ki) * ket.amplitude(li).conj())
            .sum()
    }

    /// Diagonal `<n1, n2| rho |n1, n2>` over the full product basis.
    pub fn populations(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.cutoff.dim()];
        for (w, ket) in &self.components {
            for &(i, a) in &ket.entries {
                p[i] += w * a.norm_sqr();
            }
        }
        p
    }

    /// Dense `(d1 d2) x (d1 d2)` matrix. Memory grows as the fourth power of the cutoff.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let dim = self.cutoff.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (w, ket) in &self.components {
            for &(i, a) in &ket.entries {
                let wa = *w * a;
                for &(j, b) in &ket.entries {
                    m[(i, j)] += wa * b.conj();
                }
            }
        }
        m
    }

    /// Exchange the two modes.
    pub fn swap_modes(&self) -> Self {
        let from = self.cutoff;
        let to = FockCutoff {
            d1: from.d2,
            d2: from.d1,
        };
        let components = self
            .components
            .iter()
            .map(|(w, ket)| {
                let entries = ket
                    .entries
                    .iter()
                    .map(|&(i, a)| {
                        let (n1, n2) = from.split(i);
                        (to.index(n2, n1), a)
                    })
                    .collect();
                (*w, SparseKet::from_entries(entries))
            })
            .collect();
        Self {
            cutoff: to,
            components,
            tail_mass: self.tail_mass,
        }
    }
}

/// Result of [`apply_dpa`].
#[derive(Debug, Clone)]
pub struct AddedState {
    /// `A rho A† / Tr(A rho A†)`.
    pub rho: TwoModeDensity,
    /// `Tr(A rho A†)` in the truncated space, to compare against [`normalization_closed`].
    pub numerator_trace: f64,
    /// Weight pushed past the top Fock level by the truncated creation operators.
    pub dropped_mass: f64,
}

/// Apply `A = a1† (x) I + e^{i phi} I (x) a2†` and renormalize.
pub fn apply_dpa(rho_in: &TwoModeDensity, params: DpaParams) -> Result<AddedState> {
    let cut = rho_in.cutoff;
    let phase = params.phase();
    let mut numerator = 0.0;
    let mut dropped = 0.0;
    let mut out = Vec::with_capacity(rho_in.components.len());
    let sqrt: Vec<f64> = (0..=cut.d1.max(cut.d2)).map(|n| (n as f64).sqrt()).collect();
    let ext_d2 = cut.d2 + 1;

    for (w, ket) in &rho_in.components {
        let mut kept = Vec::with_capacity(2 * ket.entries.len());
        let mut lost = Vec::new();
        for &(i, a) in &ket.entries {
            let (n1, n2) = cut.split(i);
            let up1 = sqrt[n1 + 1] * a;
            if n1 + 1 < cut.d1 {
                kept.push((cut.index(n1 + 1, n2), up1));
            } else {
                lost.push(((n1 + 1) * ext_d2 + n2, up1));
            }
            let up2 = phase * sqrt[n2 + 1] * a;
            if n2 + 1 < cut.d2 {
                kept.push((cut.index(n1, n2 + 1), up2));
            } else {
                lost.push((n1 * ext_d2 + n2 + 1, up2));
            }
        }
        let kept = SparseKet::from_entries(kept);
        let lost = SparseKet::from_entries(lost);
        numerator += w * kept.norm_sqr();
        dropped += w * lost.norm_sqr();
        out.push((*w, kept));
    }
    if numerator <= 0.0 {
        return Err(DpaError::ZeroNormalization);
    }
    let kept_fraction = numerator / (numerator + dropped);
    let tail = 1.0 - (1.0 - rho_in.tail_mass) * kept_fraction;
    let rho = TwoModeDensity::from_components(cut, out, tail)?;
    Ok(AddedState {
        rho,
        numerator_trace: numerator,
        dropped_mass: dropped,
    })
}

/// Single-mode photon-number distribution of the input, long enough to resolve tails
/// far below double-precision resolution. Used for cutoff selection and tail bookkeeping.
fn marginal_distribution(spec: &StateSpec, mode: usize) -> Vec<f64> {
    let (m1, m2) = spec.mode_means();
    let mean = if mode == 0 { m1 } else { m2 };
    let stop = |n: usize, p: &[f64]| {
        n >= MAX_SERIES
            || (n as f64 > 2.0 * mean + 20.0
                && p.len() >= 2
                && p[p.len() - 1] < 1e-40
                && p[p.len() - 2] < 1e-40)
    };
    let mut p = Vec::new();
    match *spec {
        StateSpec::CoherentPair { .. } => {
            // Poisson(mean)
            let mut cur = (-mean).exp();
            let mut n = 0;
            loop {
                p.push(cur);
                n += 1;
                if stop(n, &p) {
                    break;
                }
                cur *= mean / n as f64;
            }
        }
        StateSpec::ThermalPair { .. } | StateSpec::Tmsv { .. } => {
            // geometric; the TMSV marginal is thermal with nbar = sinh^2 r
            let ratio = mean / (mean + 1.0);
            let mut cur = 1.0 / (mean + 1.0);
            let mut n = 0;
            loop {
                p.push(cur);
                n += 1;
                if stop(n, &p) || cur == 0.0 {
                    break;
                }
                cur *= ratio;
            }
        }
        StateSpec::SqueezedPair { r1, r2 } => {
            let r = if mode == 0 { r1 } else { r2 };
            // populations only see lambda^2; a signed lambda would trip the stop test early
            let amps = squeezed_amplitudes(r.tanh().abs(), usize::MAX, |n, a| {
                stop(n, a) || (n > 2 && a[n - 1] == 0.0 && a[n - 2] == 0.0)
            });
            p = amps.iter().map(|a| a * a).collect();
        }
        StateSpec::VacuumPair => p.push(1.0),
    }
    p
}

/// `sum_{n >= d} p_n` and `sum_{n >= d-1} (n+1) p_n` for every `d`.
fn suffix_tails(p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let len = p.len();
    let mut mass = vec![0.0; len + 1];
    let mut moment = vec![0.0; len + 1];
    for n in (0..len).rev() {
        mass[n] = mass[n + 1] + p[n];
        moment[n] = moment[n + 1] + (n as f64 + 1.0) * p[n];
    }
    (mass, moment)
}

fn tail_at(mass: &[f64], d: usize) -> f64 {
    mass.get(d).copied().unwrap_or(0.0)
}

fn formula_cutoff(mean: f64) -> usize {
    let f = 6.0 + 6.0 * mean + 5.0 * (mean + 1.0).sqrt();
    MIN_CUTOFF.max(f.ceil() as usize)
}

fn mode_cutoff(spec: &StateSpec, mode: usize, mass_target: f64, moment_target: f64) -> usize {
    let (m1, m2) = spec.mode_means();
    let mean = if mode == 0 { m1 } else { m2 };
    let p = marginal_distribution(spec, mode);
    let (mass, moment) = suffix_tails(&p);
    let mut d = formula_cutoff(mean);
    while d < p.len() + 1
        && (tail_at(&mass, d) >= mass_target || tail_at(&moment, d - 1) >= moment_target)
    {
        d += 1;
    }
    if matches!(spec, StateSpec::SqueezedPair { .. }) && d % 2 == 1 {
        // keep the top level even-symmetric
        d += 1;
    }
    d
}

/// Per-mode cutoffs: at least `max(12, ceil(6 + 6 nbar + 5 sqrt(nbar + 1)))`, grown until the
/// exact marginal tails are negligible.
pub fn default_cutoff(spec: &StateSpec) -> FockCutoff {
    let mut d1 = mode_cutoff(spec, 0, AUTO_TAIL_TARGET, AUTO_MOMENT_TARGET);
    let mut d2 = mode_cutoff(spec, 1, AUTO_TAIL_TARGET, AUTO_MOMENT_TARGET);
    if matches!(spec, StateSpec::Tmsv { .. }) {
        let d = d1.max(d2);
        d1 = d;
        d2 = d;
    }
    FockCutoff { d1, d2 }
}

/// Exact probability mass of `spec` outside the `cutoff` basis.
pub fn truncation_tail(spec: &StateSpec, cutoff: FockCutoff) -> f64 {
    match spec {
        StateSpec::Tmsv { .. } => {
            let p = marginal_distribution(spec, 0);
            let (mass, _) = suffix_tails(&p);
            tail_at(&mass, cutoff.d1.min(cutoff.d2))
        }
        _ => {
            let (mass1, _) = suffix_tails(&marginal_distribution(spec, 0));
            let (mass2, _) = suffix_tails(&marginal_distribution(spec, 1));
            let t1 = tail_at(&mass1, cutoff.d1);
            let t2 = tail_at(&mass2, cutoff.d2);
            t1 + t2 - t1 * t2
        }
    }
}

/// `(1 - lambda^2)^{1/4} e^{lambda a†^2 / 2}|0>` amplitudes, generated until `stop(len, amps)`.
fn squeezed_amplitudes(
    lambda: f64,
    max_len: usize,
    mut stop: impl FnMut(usize, &[f64]) -> bool,
) -> Vec<f64> {
    let mut a = vec![(1.0 - lambda * lambda).sqrt().sqrt()];
    while a.len() < max_len && !stop(a.len(), &a) {
        let n = a.len();
        if n % 2 == 1 {
            a.push(0.0);
        } else {
            let k = n as f64;
            let prev = a[n - 2];
            a.push(prev * lambda * ((k - 1.0) / k).sqrt());
        }
    }
    a
}

fn coherent_amplitudes(z: C64, len: usize) -> Vec<C64> {
    let mut a = Vec::with_capacity(len);
    let mut cur = C64::new((-z.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..len {
        a.push(cur);
        cur = cur * z / ((n + 1) as f64).sqrt();
    }
    a
}

fn product_ket(cutoff: FockCutoff, a1: &[C64], a2: &[C64]) -> SparseKet {
    let mut entries = Vec::with_capacity(cutoff.dim());
    for (n1, x) in a1.iter().enumerate().take(cutoff.d1) {
        for (n2, y) in a2.iter().enumerate().take(cutoff.d2) {
            entries.push((cutoff.index(n1, n2), x * y));
        }
    }
    SparseKet::from_entries(entries)
}

/// Build the input state in the product Fock basis.
///
/// Fails with [`DpaError::Truncation`] when more than `eps_trunc` of the probability lies
/// outside `cutoff`. The returned density is renormalized to unit trace and keeps the
/// pre-renormalization deficit as its tail mass.
pub fn build_input(spec: &StateSpec, cutoff: FockCutoff, eps_trunc: f64) -> Result<TwoModeDensity> {
    spec.validate()?;
    let tail = truncation_tail(spec, cutoff);
    if tail >= eps_trunc {
        let d1 = mode_cutoff(spec, 0, eps_trunc / 2.0, f64::INFINITY);
        let d2 = mode_cutoff(spec, 1, eps_trunc / 2.0, f64::INFINITY);
        return Err(DpaError::Truncation {
            cutoff: cutoff.d1.min(cutoff.d2),
            tail_mass: tail,
            limit: eps_trunc,
            required_cutoff: d1.max(d2),
        });
    }
    match *spec {
        StateSpec::CoherentPair { z1, z2 } => {
            let a1 = coherent_amplitudes(z1, cutoff.d1);
            let a2 = coherent_amplitudes(z2, cutoff.d2);
            TwoModeDensity::pure(cutoff, product_ket(cutoff, &a1, &a2), tail)
        }
        StateSpec::SqueezedPair { r1, r2 } => {
            let a1: Vec<C64> = squeezed_amplitudes(r1.tanh(), cutoff.d1, |_, _| false)
                .into_iter()
                .map(|x| C64::new(x, 0.0))
                .collect();
            let a2: Vec<C64> = squeezed_amplitudes(r2.tanh(), cutoff.d2, |_, _| false)
                .into_iter()
                .map(|x| C64::new(x, 0.0))
                .collect();
            TwoModeDensity::pure(cutoff, product_ket(cutoff, &a1, &a2), tail)
        }
        StateSpec::Tmsv { r } => {
            let lambda = r.tanh();
            let mut cur = (1.0 - lambda * lambda).sqrt();
            let mut entries = Vec::new();
            for n in 0..cutoff.d1.min(cutoff.d2) {
                entries.push((cutoff.index(n, n), C64::new(cur, 0.0)));
                cur *= lambda;
            }
            TwoModeDensity::pure(cutoff, SparseKet::from_entries(entries), tail)
        }
        StateSpec::ThermalPair { nbar1, nbar2 } => {
            let geometric = |nbar: f64, d: usize| -> Vec<f64> {
                let ratio = nbar / (nbar + 1.0);
                let mut cur = 1.0 / (nbar + 1.0);
                (0..d)
                    .map(|_| {
                        let v = cur;
                        cur *= ratio;
                        v
                    })
                    .collect()
            };
            let p1 = geometric(nbar1, cutoff.d1);
            let p2 = geometric(nbar2, cutoff.d2);
            let mut comps = Vec::new();
            for (n1, &x) in p1.iter().enumerate() {
                for (n2, &y) in p2.iter().enumerate() {
                    let w = x * y;
                    if w > 0.0 {
                        comps.push((
                            w,
                            SparseKet {
                                entries: vec![(cutoff.index(n1, n2), C64::new(1.0, 0.0))],
                            },
                        ));
                    }
                }
            }
            TwoModeDensity::from_components(cutoff, comps, tail)
        }
        StateSpec::VacuumPair => TwoModeDensity::pure(
            cutoff,
            SparseKet {
                entries: vec![(0, C64::new(1.0, 0.0))],
            },
            0.0,
        ),
    }
}

/// [`build_input`] at [`default_cutoff`] and [`DEFAULT_EPS_TRUNC`].
pub fn build_input_default(spec: &StateSpec) -> Result<TwoModeDensity> {
    build_input(spec, default_cutoff(spec), DEFAULT_EPS_TRUNC)
}

/// Input or photon-added density at default settings.
pub fn build_state(spec: &StateSpec, params: DpaParams, stage: Stage) -> Result<TwoModeDensity> {
    let rho = build_input_default(spec)?;
    match stage {
        Stage::Before => Ok(rho),
        Stage::After => Ok(apply_dpa(&rho, params)?.rho),
    }
}
