//! Wigner functions before and after photon addition.
//!
//! Two evaluators: the closed Gaussian kernels times the non-Gaussian factor, and the
//! displaced-parity expectation `W = <Pi(beta1) Pi(beta2)>` on a truncated density, using
//! `Pi(beta) = (2/pi) D(beta) P D(beta)† = (2/pi) D(2 beta) P`.
//!
//! Phase-space measure: `d^2 beta = d Re(beta) d Im(beta) = dq dp / 2` per mode, so that
//! `W` integrates to one.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DpaError, Result};
use crate::fock::{displacement_matrix, parity_sign, ComplexMatrix, PhasePoint, C64, ZERO};
use crate::quadrature::{pairwise_sum, scaled_rule, QuadratureConfig};
use crate::states::{
    build_state, normalization_closed, DpaParams, Stage, StateSpec, TwoModeDensity,
};

/// `4 / pi^2`, the bound on `|W|` for two modes.
pub const W_BOUND: f64 = 4.0 / (PI * PI);
const IMAG_TOL: f64 = 1e-10;

/// Closed Gaussian Wigner function of the input state.
pub fn input_kernel(spec: &StateSpec, b1: C64, b2: C64) -> f64 {
    match *spec {
        StateSpec::CoherentPair { z1, z2 } => {
            W_BOUND * (-2.0 * (z1 - b1).norm_sqr() - 2.0 * (z2 - b2).norm_sqr()).exp()
        }
        StateSpec::ThermalPair { nbar1, nbar2 } => {
            let (s1, s2) = (2.0 * nbar1 + 1.0, 2.0 * nbar2 + 1.0);
            W_BOUND * (-2.0 * b1.norm_sqr() / s1 - 2.0 * b2.norm_sqr() / s2).exp() / (s1 * s2)
        }
        StateSpec::SqueezedPair { .. } => {
            let (l1, l2) = spec.lambdas().expect("squeezed");
            let (k1, k2) = spec.kappas().expect("squeezed");
            let e = -2.0 * k1 * (l1 * b1 - b1.conj()).norm_sqr()
                - 2.0 * k2 * (l2 * b2 - b2.conj()).norm_sqr();
            W_BOUND * e.exp()
        }
        StateSpec::Tmsv { .. } => {
            let (l, _) = spec.lambdas().expect("tmsv");
            let (k, _) = spec.kappas().expect("tmsv");
            let e = -2.0 * k * ((l * b1 - b2.conj()).norm_sqr() + (l * b2 - b1.conj()).norm_sqr());
            W_BOUND * e.exp()
        }
        StateSpec::VacuumPair => W_BOUND * (-2.0 * (b1.norm_sqr() + b2.norm_sqr())).exp(),
    }
}

/// `T^NG = c |L(beta1, beta2)|^2 - k` with `L` affine in the quadratures.
#[derive(Debug, Clone, Copy)]
struct NgForm {
    c: f64,
    k: f64,
}

fn ng_form(spec: &StateSpec) -> NgForm {
    match *spec {
        StateSpec::CoherentPair { .. } => NgForm { c: 1.0, k: 2.0 },
        StateSpec::ThermalPair { nbar1, nbar2 } => {
            let (e1, e2) = (epsilon(nbar1), epsilon(nbar2));
            NgForm { c: 4.0, k: e1 + e2 }
        }
        StateSpec::SqueezedPair { .. } => {
            let (k1, k2) = spec.kappas().expect("squeezed");
            NgForm { c: 4.0, k: k1 + k2 }
        }
        StateSpec::Tmsv { .. } => {
            let (k, _) = spec.kappas().expect("tmsv");
            NgForm {
                c: 4.0 * k * k,
                k: 2.0 * k,
            }
        }
        StateSpec::VacuumPair => NgForm { c: 4.0, k: 2.0 },
    }
}

fn epsilon(nbar: f64) -> f64 {
    (nbar + 1.0) / (2.0 * nbar + 1.0)
}

/// The affine combination inside `T^NG`.
///
/// For the squeezed pair the relative phase is `e^{+i phi}`: with `L` built from
/// `lambda beta - beta*` (the conjugate of the coherent-pair structure), this is the sign
/// that reproduces the vacuum limit and the displaced-parity evaluation.
fn ng_linear(spec: &StateSpec, params: DpaParams, b1: C64, b2: C64) -> C64 {
    let e = params.phase().conj();
    match *spec {
        StateSpec::CoherentPair { z1, z2 } => (z1 - 2.0 * b1) + e * (z2 - 2.0 * b2),
        StateSpec::ThermalPair { nbar1, nbar2 } => epsilon(nbar1) * b1 + e * epsilon(nbar2) * b2,
        StateSpec::SqueezedPair { .. } => {
            let (l1, l2) = spec.lambdas().expect("squeezed");
            let (k1, k2) = spec.kappas().expect("squeezed");
            k1 * (l1 * b1 - b1.conj()) + e.conj() * k2 * (l2 * b2 - b2.conj())
        }
        StateSpec::Tmsv { .. } => {
            let (l, _) = spec.lambdas().expect("tmsv");
            (l * b1 - b2.conj()) + e * (l * b2 - b1.conj())
        }
        StateSpec::VacuumPair => b1 + e * b2,
    }
}

/// Non-Gaussian factor linking input and output: `W_out = (T^NG / N) W_in`.
pub fn non_gaussian_factor(spec: &StateSpec, params: DpaParams, b1: C64, b2: C64) -> f64 {
    let f = ng_form(spec);
    f.c * ng_linear(spec, params, b1, b2).norm_sqr() - f.k
}

/// Closed-form Wigner function at `point`.
pub fn wigner_analytic(spec: &StateSpec, params: DpaParams, stage: Stage, point: PhasePoint) -> f64 {
    let (b1, b2) = (point.beta1(), point.beta2());
    let w_in = input_kernel(spec, b1, b2);
    match stage {
        Stage::Before => w_in,
        Stage::After => {
            non_gaussian_factor(spec, params, b1, b2) / normalization_closed(spec, params) * w_in
        }
    }
}

/// `D(2 beta) P` on `d` levels.
fn displaced_parity(beta: C64, d: usize) -> Result<ComplexMatrix> {
    let mut m = displacement_matrix(2.0 * beta, d)?;
    for r in 0..d {
        for c in 0..d {
            m[(r, c)] *= parity_sign(c);
        }
    }
    Ok(m)
}

fn check_region(beta: C64, d: usize) -> Result<()> {
    let beta_sq = beta.norm_sqr();
    if beta_sq > d as f64 / 4.0 {
        return Err(DpaError::OutsideRegion {
            beta_sq,
            cutoff: d,
            suggested_cutoff: (4.0 * beta_sq).ceil() as usize,
        });
    }
    Ok(())
}

/// Displaced-parity evaluation `(4/pi^2) Tr[rho (D(2b1)P (x) D(2b2)P)]`.
pub fn wigner_numeric(rho: &TwoModeDensity, point: PhasePoint) -> Result<f64> {
    let cut = rho.cutoff();
    let (b1, b2) = (point.beta1(), point.beta2());
    check_region(b1, cut.d1)?;
    check_region(b2, cut.d2)?;
    let m1 = displaced_parity(b1, cut.d1)?;
    let m2 = displaced_parity(b2, cut.d2)?;

    let mut total = ZERO;
    for (w, ket) in rho.components() {
        let entries = ket.entries();
        let nnz = entries.len();
        let value = if nnz * nnz <= cut.d1 * cut.d2 * cut.d2 {
            let mut acc = ZERO;
            for &(i, a) in entries {
                let (m1i, m2i) = cut.split(i);
                let ac = a.conj();
                for &(j, b) in entries {
                    let (n1, n2) = cut.split(j);
                    acc += ac * b * m1[(m1i, n1)] * m2[(m2i, n2)];
                }
            }
            acc
        } else {
            // psi as a d1 x d2 matrix: <psi| M1 (x) M2 |psi> = sum conj(psi) . (M1 psi M2^T)
            let (d1, d2) = (cut.d1, cut.d2);
            let mut y = vec![ZERO; d1 * d2];
            for &(j, b) in entries {
                let (n1, n2) = cut.split(j);
                for r in 0..d1 {
                    y[r * d2 + n2] += m1[(r, n1)] * b;
                }
            }
            let mut acc = ZERO;
            for &(i, a) in entries {
                let (r, c) = cut.split(i);
                let row = &y[r * d2..(r + 1) * d2];
                let z: C64 = row
                    .iter()
                    .enumerate()
                    .map(|(n2, v)| v * m2[(c, n2)])
                    .sum();
                acc += a.conj() * z;
            }
            acc
        };
        total += *w * value;
    }
    let scale = total.norm().max(1.0);
    if total.im.abs() > IMAG_TOL * scale {
        return Err(DpaError::NotHermitian {
            deviation: total.im.abs(),
        });
    }
    Ok(W_BOUND * total.re)
}

#[derive(Debug, Clone)]
pub enum EvalMode {
    Analytic,
    Numeric(TwoModeDensity),
}

#[derive(Debug, Clone)]
pub struct WignerEvaluator {
    pub spec: StateSpec,
    pub params: DpaParams,
    pub stage: Stage,
    pub mode: EvalMode,
}

impl WignerEvaluator {
    pub fn analytic(spec: StateSpec, params: DpaParams, stage: Stage) -> Self {
        Self {
            spec,
            params,
            stage,
            mode: EvalMode::Analytic,
        }
    }

    /// Numeric evaluator on the state built at default cutoffs.
    pub fn numeric(spec: StateSpec, params: DpaParams, stage: Stage) -> Result<Self> {
        let rho = build_state(&spec, params, stage)?;
        Ok(Self {
            spec,
            params,
            stage,
            mode: EvalMode::Numeric(rho),
        })
    }

    pub fn eval(&self, point: PhasePoint) -> Result<f64> {
        match &self.mode {
            EvalMode::Analytic => Ok(wigner_analytic(&self.spec, self.params, self.stage, point)),
            EvalMode::Numeric(rho) => wigner_numeric(rho, point),
        }
    }
}

/// Affine map `x = mean + C y` that turns the input Wigner function into
/// `W_in(mean) exp(-|y|^2)`, with `C = sqrt(2 V)` for the input covariance `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFrame {
    pub mean: [f64; 4],
    pub c: [[f64; 4]; 4],
}

impl GaussianFrame {
    pub fn of(spec: &StateSpec) -> Self {
        let mut c = [[0.0; 4]; 4];
        let mut mean = [0.0; 4];
        match *spec {
            StateSpec::CoherentPair { z1, z2 } => {
                mean = [SQRT_2 * z1.re, SQRT_2 * z1.im, SQRT_2 * z2.re, SQRT_2 * z2.im];
                for (i, row) in c.iter_mut().enumerate() {
                    row[i] = 1.0;
                }
            }
            StateSpec::ThermalPair { nbar1, nbar2 } => {
                let (s1, s2) = ((2.0 * nbar1 + 1.0).sqrt(), (2.0 * nbar2 + 1.0).sqrt());
                c[0][0] = s1;
                c[1][1] = s1;
                c[2][2] = s2;
                c[3][3] = s2;
            }
            StateSpec::SqueezedPair { r1, r2 } => {
                c[0][0] = r1.exp();
                c[1][1] = (-r1).exp();
                c[2][2] = r2.exp();
                c[3][3] = (-r2).exp();
            }
            StateSpec::Tmsv { r } => {
                let (ch, sh) = (r.cosh(), r.sinh());
                // q quadratures positively correlated, p quadratures anti-correlated
                c[0][0] = ch;
                c[0][2] = sh;
                c[2][0] = sh;
                c[2][2] = ch;
                c[1][1] = ch;
                c[1][3] = -sh;
                c[3][1] = -sh;
                c[3][3] = ch;
            }
            StateSpec::VacuumPair => {
                for (i, row) in c.iter_mut().enumerate() {
                    row[i] = 1.0;
                }
            }
        }
        Self { mean, c }
    }

    pub fn map(&self, y: [f64; 4]) -> [f64; 4] {
        let mut x = self.mean;
        for (i, xi) in x.iter_mut().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                *xi += self.c[i][j] * yj;
            }
        }
        x
    }

    pub fn det(&self) -> f64 {
        det4(&self.c)
    }
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    // Laplace expansion along the first row
    let minor = |skip: usize| -> f64 {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let a = |r: usize, k: usize| m[r][cols[k]];
        a(1, 0) * (a(2, 1) * a(3, 2) - a(2, 2) * a(3, 1))
            - a(1, 1) * (a(2, 0) * a(3, 2) - a(2, 2) * a(3, 0))
            + a(1, 2) * (a(2, 0) * a(3, 1) - a(2, 1) * a(3, 0))
    };
    (0..4)
        .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * m[0][j] * minor(j))
        .sum()
}

/// One quadrature level of the WLN refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WlnLevel {
    pub nodes_per_axis: usize,
    pub abs_integral: f64,
    pub integral: f64,
    pub wln: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WlnReport {
    pub wln: f64,
    /// Integral of `W` itself at the final level.
    pub integral: f64,
    pub nodes_per_axis: usize,
    pub box_halfwidth: f64,
    pub last_delta: f64,
    pub levels: Vec<WlnLevel>,
}

/// `(integral |W|, integral W)` on a tensor rule with `n` nodes per axis over `[-half, half]^4`
/// in whitened coordinates.
fn integrate_level(spec: &StateSpec, params: DpaParams, stage: Stage, n: usize, half: f64) -> (f64, f64) {
    let frame = GaussianFrame::of(spec);
    let (y, w) = scaled_rule(n, half);
    let g: Vec<f64> = y.iter().zip(&w).map(|(y, w)| w * (-y * y).exp()).collect();
    let centre = PhasePoint::from_array(frame.mean);
    let peak = input_kernel(spec, centre.beta1(), centre.beta2());
    let jac = frame.det() / 4.0;

    let (scale, form, l0, dl) = match stage {
        Stage::Before => (peak * jac, None, ZERO, [ZERO; 4]),
        Stage::After => {
            let n_norm = normalization_closed(spec, params);
            let form = ng_form(spec);
            let lin = |x: [f64; 4]| {
                let p = PhasePoint::from_array(x);
                ng_linear(spec, params, p.beta1(), p.beta2())
            };
            let l0 = lin(frame.mean);
            let mut dl = [ZERO; 4];
            for (j, d) in dl.iter_mut().enumerate() {
                let mut e = [0.0; 4];
                e[j] = 1.0;
                *d = lin(frame.map(e)) - l0;
            }
            (peak * jac / n_norm, Some(form), l0, dl)
        }
    };

    let partial: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i0| {
            let mut abs_row = Vec::with_capacity(n);
            let mut sig_row = Vec::with_capacity(n);
            let u0 = l0 + dl[0] * y[i0];
            for i1 in 0..n {
                let u1 = u0 + dl[1] * y[i1];
                let g01 = g[i0] * g[i1];
                let mut abs_acc = 0.0;
                let mut sig_acc = 0.0;
                for i2 in 0..n {
                    let u2 = u1 + dl[2] * y[i2];
                    let g012 = g01 * g[i2];
                    let mut a = 0.0;
                    let mut s = 0.0;
                    match form {
                        None => {
                            for gi in &g {
                                s += gi;
                            }
                            a = s;
                        }
                        Some(f) => {
                            for (i3, gi) in g.iter().enumerate() {
                                let u = u2 + dl[3] * y[i3];
                                let t = f.c * u.norm_sqr() - f.k;
                                a += gi * t.abs();
                                s += gi * t;
                            }
                        }
                    }
                    abs_acc += g012 * a;
                    sig_acc += g012 * s;
                }
                abs_row.push(abs_acc);
                sig_row.push(sig_acc);
            }
            (pairwise_sum(&abs_row), pairwise_sum(&sig_row))
        })
        .collect();
    let abs_parts: Vec<f64> = partial.iter().map(|p| p.0).collect();
    let sig_parts: Vec<f64> = partial.iter().map(|p| p.1).collect();
    (scale * pairwise_sum(&abs_parts), scale * pairwise_sum(&sig_parts))
}

/// Wigner logarithmic negativity `ln integral |W| d^2beta1 d^2beta2`, refined by doubling the
/// node count until successive estimates differ by less than `quad.tol_wln`.
///
/// The box half-width is applied in whitened coordinates, where every input Gaussian is
/// `exp(-|y|^2)`. Only the analytic evaluator is integrated; the displaced-parity path is
/// restricted to its convergence region and serves as a pointwise cross-check.
pub fn wln(eval: &WignerEvaluator, quad: &QuadratureConfig) -> Result<WlnReport> {
    if !matches!(eval.mode, EvalMode::Analytic) {
        return Err(DpaError::InvalidParameter(
            "WLN integrates the analytic evaluator".into(),
        ));
    }
    let nbar = eval.spec.total_mean();
    quad.validate(nbar)?;
    let half = quad.halfwidth(nbar);
    let mut levels: Vec<WlnLevel> = Vec::new();
    let mut n = quad.nodes_per_axis;
    for _ in 0..=quad.max_doublings {
        let (abs_integral, integral) = integrate_level(&eval.spec, eval.params, eval.stage, n, half);
        let level = WlnLevel {
            nodes_per_axis: n,
            abs_integral,
            integral,
            wln: abs_integral.ln(),
        };
        if let Some(prev) = levels.last() {
            let delta = (level.wln - prev.wln).abs();
            if delta < quad.tol_wln {
                levels.push(level);
                return Ok(WlnReport {
                    wln: level.wln,
                    integral: level.integral,
                    nodes_per_axis: n,
                    box_halfwidth: half,
                    last_delta: delta,
                    levels,
                });
            }
        }
        levels.push(level);
        n *= 2;
    }
    let k = levels.len();
    Err(DpaError::NonConvergence {
        nodes: levels[k - 1].nodes_per_axis,
        last: levels[k - 1].wln,
        previous: levels[k.saturating_sub(2)].wln,
    })
}

/// Which two quadratures vary across a section; the other two are pinned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionPlane {
    /// Indices into `(q1, p1, q2, p2)`.
    pub axes: (usize, usize),
    pub fixed: [f64; 4],
    pub extent: f64,
    pub resolution: usize,
}

impl Default for SectionPlane {
    /// `W(q1, 0; q2, 0)` on `[-4, 4]^2` with 161 points per side.
    fn default() -> Self {
        Self {
            axes: (0, 2),
            fixed: [0.0; 4],
            extent: 4.0,
            resolution: 161,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionGrid {
    pub plane: SectionPlane,
    pub coords: Vec<f64>,
    /// `values[i][j]` at `(coords[i], coords[j])` along `(axes.0, axes.1)`.
    pub values: Vec<Vec<f64>>,
}

impl SectionGrid {
    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn section_grid(eval: &WignerEvaluator, plane: SectionPlane) -> Result<SectionGrid> {
    let (a, b) = plane.axes;
    if a > 3 || b > 3 || a == b {
        return Err(DpaError::InvalidParameter(format!(
            "section axes must be two distinct indices in 0..4, got {a}, {b}"
        )));
    }
    if plane.resolution < 2 || !(plane.extent.is_finite() && plane.extent > 0.0) {
        return Err(DpaError::InvalidParameter(
            "section needs at least 2 points and a positive extent".into(),
        ));
    }
    let n = plane.resolution;
    let step = 2.0 * plane.extent / (n - 1) as f64;
    let coords: Vec<f64> = (0..n).map(|i| -plane.extent + step * i as f64).collect();
    let values = coords
        .par_iter()
        .map(|&u| {
            coords
                .iter()
                .map(|&v| {
                    let mut x = plane.fixed;
                    x[a] = u;
                    x[b] = v;
                    eval.eval(PhasePoint::from_array(x))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SectionGrid {
        plane,
        coords,
        values,
    })
}

/// Exact WLN of the single-photon state: `ln(4 e^{-1/2} - 1)`.
pub fn single_photon_wln() -> f64 {
    (4.0 * (-0.5f64).exp() - 1.0).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::build_input_default;
    use approx::assert_abs_diff_eq;

    fn all_specs() -> Vec<StateSpec> {
        vec![
            StateSpec::CoherentPair {
                z1: C64::new(0.6, -0.4),
                z2: C64::new(0.9, 0.3),
            },
            StateSpec::thermal(0.7, 1.3),
            StateSpec::squeezed(0.5, -0.3),
            StateSpec::tmsv(0.6),
            StateSpec::VacuumPair,
        ]
    }

    #[test]
    fn single_photon_state_at_origin() {
        for phi in [0.0, 1.0, PI] {
            let w = wigner_analytic(&StateSpec::VacuumPair, DpaParams::new(phi), Stage::After, PhasePoint::origin());
            assert_abs_diff_eq!(w, -W_BOUND, epsilon = 1e-15);
        }
        let rho = build_input_default(&StateSpec::VacuumPair).unwrap();
        assert_abs_diff_eq!(wigner_numeric(&rho, PhasePoint::origin()).unwrap(), W_BOUND, epsilon = 1e-15);
    }

    #[test]
    fn coherent_peak() {
        let z1 = C64::new(0.4, 0.2);
        let z2 = C64::new(-1.0, 0.5);
        let spec = StateSpec::CoherentPair { z1, z2 };
        let w = wigner_analytic(&spec, DpaParams::new(0.0), Stage::Before, PhasePoint::from_betas(z1, z2));
        assert_abs_diff_eq!(w, W_BOUND, epsilon = 1e-15);
    }

    #[test]
    fn coherent_vacuum_limit_matches_single_photon_form() {
        let spec = StateSpec::coherent(0.0, 0.0);
        for phi in [0.0, 0.7, 2.0] {
            let p = DpaParams::new(phi);
            for x in [[0.3, -0.2, 1.1, 0.4], [-1.0, 0.5, 0.0, -0.7]] {
                let pt = PhasePoint::from_array(x);
                let a = wigner_analytic(&spec, p, Stage::After, pt);
                let b = wigner_analytic(&StateSpec::VacuumPair, p, Stage::After, pt);
                assert_abs_diff_eq!(a, b, epsilon = 1e-15);
                let (b1, b2) = (pt.beta1(), pt.beta2());
                let closed = W_BOUND
                    * (2.0 * (b1 + p.phase().conj() * b2).norm_sqr() - 1.0)
                    * (-2.0 * (b1.norm_sqr() + b2.norm_sqr())).exp();
                assert_abs_diff_eq!(a, closed, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn frames_whiten_input_kernels() {
        let ys = [[0.3, -0.8, 0.1, 1.2], [-1.4, 0.2, 0.9, -0.5]];
        for spec in all_specs() {
            let f = GaussianFrame::of(&spec);
            let m = PhasePoint::from_array(f.mean);
            let peak = input_kernel(&spec, m.beta1(), m.beta2());
            for y in ys {
                let p = PhasePoint::from_array(f.map(y));
                let want = peak * (-y.iter().map(|v| v * v).sum::<f64>()).exp();
                let got = input_kernel(&spec, p.beta1(), p.beta2());
                assert_abs_diff_eq!(got, want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn numeric_agrees_with_analytic() {
        let pts = [
            [0.0, 0.0, 0.0, 0.0],
            [0.5, -0.3, 0.8, 0.2],
            [-1.2, 0.7, 0.1, -0.9],
            [1.5, 1.0, -1.1, 0.4],
        ];
        for spec in all_specs() {
            for phi in [0.0, 1.9] {
                for stage in [Stage::Before, Stage::After] {
                    let p = DpaParams::new(phi);
                    let num = WignerEvaluator::numeric(spec, p, stage).unwrap();
                    for x in pts {
                        let pt = PhasePoint::from_array(x);
                        let a = wigner_analytic(&spec, p, stage, pt);
                        let b = num.eval(pt).unwrap();
                        assert!((a - b).abs() < 1e-9, "{spec:?} {stage:?} {x:?}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn outside_region_is_reported() {
        let rho = build_input_default(&StateSpec::VacuumPair).unwrap();
        let far = PhasePoint::new(4.0, 0.0, 0.0, 0.0);
        match wigner_numeric(&rho, far) {
            Err(DpaError::OutsideRegion { suggested_cutoff, .. }) => assert_eq!(suggested_cutoff, 32),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_photon_wln() {
        let eval = WignerEvaluator::analytic(StateSpec::VacuumPair, DpaParams::new(0.0), Stage::After);
        let rep = wln(&eval, &QuadratureConfig::default()).unwrap();
        assert_abs_diff_eq!(rep.wln, super::single_photon_wln(), epsilon = 5e-3);
        assert_abs_diff_eq!(rep.integral, 1.0, epsilon = 2e-3);
    }

    #[test]
    fn gaussian_input_has_zero_wln() {
        let eval = WignerEvaluator::analytic(StateSpec::tmsv(0.8), DpaParams::new(0.0), Stage::Before);
        let rep = wln(&eval, &QuadratureConfig::default()).unwrap();
        assert_abs_diff_eq!(rep.wln, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn numeric_wln_rejected() {
        let eval = WignerEvaluator::numeric(StateSpec::VacuumPair, DpaParams::new(0.0), Stage::After).unwrap();
        assert!(wln(&eval, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn section_of_single_photon_state() {
        let eval = WignerEvaluator::analytic(StateSpec::VacuumPair, DpaParams::new(0.0), Stage::After);
        let plane = SectionPlane {
            resolution: 41,
            ..SectionPlane::default()
        };
        let g = section_grid(&eval, plane).unwrap();
        assert_abs_diff_eq!(g.values[20][20], -W_BOUND, epsilon = 1e-15);
        assert_abs_diff_eq!(g.min(), -W_BOUND, epsilon = 1e-15);
        assert_eq!(g.coords[0], -4.0);
        assert_eq!(g.coords[40], 4.0);
    }

    #[test]
    fn determinant_of_frames() {
        for spec in all_specs() {
            let d = GaussianFrame::of(&spec).det();
            let want = match spec {
                StateSpec::ThermalPair { nbar1, nbar2 } => (2.0 * nbar1 + 1.0) * (2.0 * nbar2 + 1.0),
                _ => 1.0,
            };
            assert_abs_diff_eq!(d, want, epsilon = 1e-12);
        }
    }
}
