//! Partial-transpose witness on the `{0,1} (x) {0,1}` photon-number subspace.

use serde::Serialize;

use crate::eigen::hermitian_eigenvalues;
use crate::error::{DpaError, Result};
use crate::fock::{ComplexMatrix, C64};
use crate::states::{normalization_closed, DpaParams, Stage, StateSpec, TwoModeDensity};

/// Eigenvalues above this are treated as non-negative.
pub const NEGATIVE_EIGEN_THRESHOLD: f64 = -1e-11;
const NPT_RANGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceWitness {
    /// Normalized 4x4 block on `|00>, |01>, |10>, |11>`.
    pub x: ComplexMatrix,
    pub x_pt: ComplexMatrix,
    /// Sum of the four subspace populations.
    pub t: f64,
    pub eigenvalues_pt: Vec<f64>,
    pub npt: f64,
}

#[inline]
fn sub(k1: usize, k2: usize) -> usize {
    2 * k1 + k2
}

/// Partial transpose in mode 2: `X^{T2}[(k1 l2), (l1 k2)] = X[(k1 k2), (l1 l2)]`.
pub fn partial_transpose(x: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(4, 4);
    for k1 in 0..2 {
        for k2 in 0..2 {
            for l1 in 0..2 {
                for l2 in 0..2 {
                    out[(sub(k1, l2), sub(l1, k2))] = x[(sub(k1, k2), sub(l1, l2))];
                }
            }
        }
    }
    out
}

/// `-2` times the sum of eigenvalues below [`NEGATIVE_EIGEN_THRESHOLD`], clamped to `[0, 1]`.
pub fn npt_from_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let neg: f64 = eigenvalues
        .iter()
        .filter(|&&w| w < NEGATIVE_EIGEN_THRESHOLD)
        .sum();
    let npt = -2.0 * neg;
    if !(-NPT_RANGE_TOL..=1.0 + NPT_RANGE_TOL).contains(&npt) {
        return Err(DpaError::NptOutOfRange { value: npt });
    }
    Ok(npt.clamp(0.0, 1.0))
}

pub fn witness_from_block(block: &ComplexMatrix) -> Result<SubspaceWitness> {
    if block.rows() != 4 || block.cols() != 4 {
        return Err(DpaError::InvalidDimension(format!(
            "witness block must be 4x4, got {}x{}",
            block.rows(),
            block.cols()
        )));
    }
    let t: f64 = (0..4).map(|i| block[(i, i)].re).sum();
    if t <= 0.0 {
        return Err(DpaError::WitnessUndefined);
    }
    let x = block.scale(C64::new(1.0 / t, 0.0));
    let x_pt = partial_transpose(&x);
    let eigenvalues_pt = hermitian_eigenvalues(&x_pt)?;
    let npt = npt_from_spectrum(&eigenvalues_pt)?;
    Ok(SubspaceWitness {
        x,
        x_pt,
        t,
        eigenvalues_pt,
        npt,
    })
}

/// Project `rho` onto the single-photon subspace and evaluate the NPT witness.
pub fn subspace_witness(rho: &TwoModeDensity) -> Result<SubspaceWitness> {
    let cut = rho.cutoff();
    if cut.d1 < 3 || cut.d2 < 3 {
        return Err(DpaError::InvalidDimension(format!(
            "witness needs at least 3 levels per mode, got {}x{}",
            cut.d1, cut.d2
        )));
    }
    let mut block = ComplexMatrix::zeros(4, 4);
    for k1 in 0..2 {
        for k2 in 0..2 {
            for l1 in 0..2 {
                for l2 in 0..2 {
                    block[(sub(k1, k2), sub(l1, l2))] = rho.element(k1, k2, l1, l2);
                }
            }
        }
    }
    witness_from_block(&block)
}

/// Closed-form NPT of the input (`Before`) or photon-added (`After`) state.
pub fn npt_closed(spec: &StateSpec, params: DpaParams, stage: Stage) -> f64 {
    match (stage, *spec) {
        (Stage::Before, StateSpec::Tmsv { r }) => {
            let l = r.tanh();
            2.0 * l.abs() / (1.0 + l * l)
        }
        (Stage::Before, _) => 0.0,
        (Stage::After, StateSpec::CoherentPair { .. }) => 2.0 / normalization_closed(spec, params),
        (Stage::After, StateSpec::ThermalPair { nbar1, nbar2 }) => {
            let a = (1.0 + nbar1) * (1.0 + nbar2);
            let g = nbar1 + nbar2 + 2.0 * nbar1 * nbar2;
            ((4.0 * a * a + g * g).sqrt() - g) / (2.0 * a + g)
        }
        (Stage::After, _) => 1.0,
    }
}

/// Closed `X^{T2}` matrix and its spectrum, regenerated from the closed-form elements.
#[derive(Debug, Clone)]
pub struct ClosedWitness {
    pub x_pt: ComplexMatrix,
    /// Ascending.
    pub spectrum: Vec<f64>,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Closed `X^{T2}` for each family and stage.
///
/// Phases follow `X^{T2}[00, 11] = <01|rho|10> / T`, i.e. `e^{i phi}` in the corner for the
/// photon-added states. The printed coherent-pair matrix carries the complex conjugate of
/// this (same spectrum); its eigenvalues are `-1/N, 1/N, (1 +- sqrt(1 - 4/N^2))/2`.
pub fn closed_witness(spec: &StateSpec, params: DpaParams, stage: Stage) -> ClosedWitness {
    let e = params.phase();
    let mut m = ComplexMatrix::zeros(4, 4);
    let spectrum = match (stage, *spec) {
        (Stage::Before, StateSpec::CoherentPair { z1, z2 }) => {
            let mm = (1.0 + z1.norm_sqr()) * (1.0 + z2.norm_sqr());
            let rows = [
                [c(1.0), z2, z1.conj(), z2 * z1.conj()],
                [z2.conj(), c(z2.norm_sqr()), z1.conj() * z2.conj(), z2.norm_sqr() * z1.conj()],
                [z1, z1 * z2, c(z1.norm_sqr()), z2 * z1.norm_sqr()],
                [z1 * z2.conj(), z1 * z2.norm_sqr(), z2.conj() * z1.norm_sqr(), c(z1.norm_sqr() * z2.norm_sqr())],
            ];
            for (i, row) in rows.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    m[(i, j)] = v / mm;
                }
            }
            vec![0.0, 0.0, 0.0, 1.0]
        }
        (Stage::After, StateSpec::CoherentPair { z1, z2 }) => {
            let n = normalization_closed(spec, params);
            let w = z1 + e.conj() * z2;
            let v = e.conj() * z1.conj() + z2.conj();
            m[(0, 3)] = e.conj();
            m[(1, 1)] = c(1.0);
            m[(1, 3)] = w;
            m[(2, 2)] = c(1.0);
            m[(2, 3)] = v;
            m[(3, 0)] = e;
            m[(3, 1)] = w.conj();
            m[(3, 2)] = v.conj();
            m[(3, 3)] = c(w.norm_sqr());
            m = m.scale(c(1.0 / n)).conj();
            let root = (1.0 - 4.0 / (n * n)).sqrt();
            sorted(vec![-1.0 / n, 1.0 / n, 0.5 * (1.0 - root), 0.5 * (1.0 + root)])
        }
        (Stage::Before, StateSpec::ThermalPair { nbar1, nbar2 }) => {
            let a = (1.0 + nbar1) * (1.0 + nbar2);
            let b = (1.0 + 2.0 * nbar1) * (1.0 + 2.0 * nbar2);
            let d = [a / b, (1.0 + nbar1) * nbar2 / b, nbar1 * (1.0 + nbar2) / b, nbar1 * nbar2 / b];
            for (i, v) in d.iter().enumerate() {
                m[(i, i)] = c(*v);
            }
            sorted(d.to_vec())
        }
        (Stage::After, StateSpec::ThermalPair { nbar1, nbar2 }) => {
            let a = (1.0 + nbar1) * (1.0 + nbar2);
            let g = nbar1 + nbar2 + 2.0 * nbar1 * nbar2;
            let s = 2.0 * a + g;
            m[(0, 3)] = e * (a / s);
            m[(3, 0)] = e.conj() * (a / s);
            m[(1, 1)] = c(a / s);
            m[(2, 2)] = c(a / s);
            m[(3, 3)] = c(g / s);
            let root = (4.0 * a * a + g * g).sqrt();
            sorted(vec![a / s, a / s, -0.5 * (root - g) / s, 0.5 * (root + g) / s])
        }
        (Stage::Before, StateSpec::SqueezedPair { .. } | StateSpec::VacuumPair) => {
            m[(0, 0)] = c(1.0);
            vec![0.0, 0.0, 0.0, 1.0]
        }
        (Stage::Before, StateSpec::Tmsv { r }) => {
            let l = r.tanh();
            let q = 1.0 + l * l;
            m[(0, 0)] = c(1.0 / q);
            m[(1, 2)] = c(l / q);
            m[(2, 1)] = c(l / q);
            m[(3, 3)] = c(l * l / q);
            sorted(vec![1.0 / q, -l / q, l * l / q, l / q])
        }
        // squeezed pair, TMSV and vacuum after addition all project onto the same state
        (Stage::After, _) => {
            m[(0, 3)] = e * 0.5;
            m[(3, 0)] = e.conj() * 0.5;
            m[(1, 1)] = c(0.5);
            m[(2, 2)] = c(0.5);
            vec![-0.5, 0.5, 0.5, 0.5]
        }
    };
    ClosedWitness {
        x_pt: m,
        spectrum,
    }
}
