//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Expected values are computed here from independent formulas, never from the library's
//! own closed-form helpers.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use dpa_core::entanglement::{npt_closed, subspace_witness};
use dpa_core::quadrature::QuadratureConfig;
use dpa_core::states::{apply_dpa, build_input_default, build_state};
use dpa_core::statistics::{discorrelation_verdict, jpnd, DEFAULT_EPS_DIAGONAL, DEFAULT_EPS_MARGINAL};
use dpa_core::wigner::{wigner_analytic, wigner_numeric, wln, GaussianFrame, WignerEvaluator};
use dpa_core::{DpaParams, Family, PhasePoint, Stage, StateSpec, C64};
use dpa_lab::{run_table, Cell, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const ONE_MINUTE: Duration = Duration::from_secs(60);
const TEN_MINUTES: Duration = Duration::from_secs(600);
const W00: f64 = 4.0 / (PI * PI);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random state with total mean photon number at most `max_total`. Coherent amplitudes
/// get random phases and squeezing parameters random signs.
fn random_spec(r: &mut ChaCha8Rng, family: Family, max_total: f64) -> StateSpec {
    let total: f64 = r.gen_range(0.0..=max_total);
    let split: f64 = r.gen();
    let (n1, n2) = (total * split, total * (1.0 - split));
    match family {
        Family::Cc => StateSpec::CoherentPair {
            z1: C64::from_polar(n1.sqrt(), r.gen_range(0.0..2.0 * PI)),
            z2: C64::from_polar(n2.sqrt(), r.gen_range(0.0..2.0 * PI)),
        },
        Family::Tt => StateSpec::thermal(n1, n2),
        Family::Ss => {
            let s1 = if r.gen() { 1.0 } else { -1.0 };
            let s2 = if r.gen() { 1.0 } else { -1.0 };
            StateSpec::squeezed(s1 * n1.sqrt().asinh(), s2 * n2.sqrt().asinh())
        }
        Family::Tmsv => StateSpec::tmsv((total / 2.0).sqrt().asinh()),
        Family::Vac => StateSpec::VacuumPair,
    }
}

fn random_stage(r: &mut ChaCha8Rng) -> Stage {
    if r.gen() {
        Stage::After
    } else {
        Stage::Before
    }
}

fn numeric_npt(spec: &StateSpec, phi: f64, stage: Stage) -> f64 {
    let rho = build_state(spec, DpaParams::new(phi), stage).expect("state builds");
    subspace_witness(&rho).expect("witness defined").npt
}

// 1
fn npt_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in 0..240 {
        let family = Family::FOUR[i % 4];
        let spec = random_spec(&mut r, family, 4.0);
        let stage = random_stage(&mut r);
        let phi = r.gen_range(0.0..2.0 * PI);
        let closed = npt_closed(&spec, DpaParams::new(phi), stage);
        let numeric = numeric_npt(&spec, phi, stage);
        worst = worst.max((closed - numeric).abs());
        count += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        count >= 200 && worst < 1e-8 && elapsed < ONE_MINUTE,
        format!("{count} points, max |closed - numeric| = {worst:.2e}, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Eigenvalue lists of the partially transposed single-photon block, written out per case.
fn spectrum_oracle(spec: &StateSpec, phi: f64, stage: Stage) -> Vec<f64> {
    let list = match (stage, *spec) {
        (Stage::Before, StateSpec::CoherentPair { .. })
        | (Stage::Before, StateSpec::SqueezedPair { .. })
        | (Stage::Before, StateSpec::VacuumPair) => vec![1.0, 0.0, 0.0, 0.0],
        (Stage::After, StateSpec::CoherentPair { z1, z2 }) => {
            let n = (z1 + C64::from_polar(1.0, -phi) * z2).norm_sqr() + 2.0;
            let s = (1.0 - 4.0 / (n * n)).sqrt();
            vec![-1.0 / n, 1.0 / n, 0.5 * (1.0 - s), 0.5 * (1.0 + s)]
        }
        (Stage::Before, StateSpec::ThermalPair { nbar1: a, nbar2: b }) => {
            let big_a = (1.0 + a) * (1.0 + b);
            let big_b = (1.0 + 2.0 * a) * (1.0 + 2.0 * b);
            vec![a * b / big_b, big_a / big_b, a * (1.0 + b) / big_b, (1.0 + a) * b / big_b]
        }
        (Stage::After, StateSpec::ThermalPair { nbar1: a, nbar2: b }) => {
            let big_a = (1.0 + a) * (1.0 + b);
            let g = a + b + 2.0 * a * b;
            let den = 2.0 * big_a + g;
            let root = (4.0 * big_a * big_a + g * g).sqrt();
            vec![big_a / den, big_a / den, -0.5 * (root - g) / den, 0.5 * (root + g) / den]
        }
        (Stage::Before, StateSpec::Tmsv { r }) => {
            let l = r.tanh();
            let d = 1.0 + l * l;
            vec![1.0 / d, -l / d, l * l / d, l / d]
        }
        (Stage::After, StateSpec::SqueezedPair { .. })
        | (Stage::After, StateSpec::Tmsv { .. })
        | (Stage::After, StateSpec::VacuumPair) => vec![-0.5, 0.5, 0.5, 0.5],
    };
    sorted(list)
}

// 2
fn spectrum_regression() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut half_spectrum_ok = true;
    for i in 0..96 {
        let family = Family::FOUR[i % 4];
        // keep the witness block populated: tiny energies leave a near-empty subspace
        let spec = random_spec(&mut r, family, 4.0);
        for stage in [Stage::Before, Stage::After] {
            let phi = r.gen_range(0.0..2.0 * PI);
            let rho = build_state(&spec, DpaParams::new(phi), stage).unwrap();
            let got = sorted(subspace_witness(&rho).unwrap().eigenvalues_pt);
            let want = spectrum_oracle(&spec, phi, stage);
            let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
            cases += 1;
            if stage == Stage::After && matches!(family, Family::Ss | Family::Tmsv) {
                let neg = got.iter().filter(|&&x| x < -1e-11).count();
                half_spectrum_ok &= neg == 1 && (got[0] + 0.5).abs() < 1e-10;
            }
        }
    }
    outcome(
        worst < 1e-10 && half_spectrum_ok,
        format!("{cases} spectra, max eigenvalue error {worst:.2e}, ss/tms after = {{-1/2, 1/2, 1/2, 1/2}}: {half_spectrum_ok}"),
    )
}

// 3
fn paper_constants() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut worst_cc: f64 = 0.0;
    for z in [0.5, 1.0, 1.5f64.sqrt(), 2.0] {
        let spec = StateSpec::coherent(z, z);
        let c = npt_closed(&spec, DpaParams::new(PI), Stage::After);
        let n = numeric_npt(&spec, PI, Stage::After);
        worst_cc = worst_cc.max((c - 1.0).abs()).max((n - 1.0).abs());
    }
    pass &= worst_cc < 1e-10;
    notes.push(format!("cc at pi: max |NPT - 1| = {worst_cc:.1e}"));

    let mut r = rng(3);
    let mut worst_sq: f64 = 0.0;
    for i in 0..60 {
        let family = if i % 2 == 0 { Family::Ss } else { Family::Tmsv };
        let spec = random_spec(&mut r, family, 4.0);
        let phi = r.gen_range(0.0..2.0 * PI);
        worst_sq = worst_sq.max((numeric_npt(&spec, phi, Stage::After) - 1.0).abs());
        worst_sq = worst_sq.max((npt_closed(&spec, DpaParams::new(phi), Stage::After) - 1.0).abs());
    }
    pass &= worst_sq < 1e-8;
    notes.push(format!("ss/tms: max |NPT - 1| = {worst_sq:.1e}"));

    let want = (5f64.sqrt() - 1.0) / 3.0;
    let spec = StateSpec::thermal(1.0, 1.0);
    let mut worst_tt: f64 = 0.0;
    for phi in [0.0, 1.0, PI] {
        worst_tt = worst_tt.max((numeric_npt(&spec, phi, Stage::After) - want).abs());
        worst_tt = worst_tt.max((npt_closed(&spec, DpaParams::new(phi), Stage::After) - want).abs());
    }
    pass &= worst_tt < 1e-9;
    notes.push(format!("tt(1,1): max |NPT - (sqrt5-1)/3| = {worst_tt:.1e}"));
    outcome(pass, notes.join("; "))
}

// 4
fn normalization_factors() -> Outcome {
    let mut r = rng(4);
    let mut worst = BTreeMap::new();
    for i in 0..160 {
        let family = Family::FOUR[i % 4];
        let spec = random_spec(&mut r, family, 4.0);
        let phi = r.gen_range(0.0..2.0 * PI);
        let want = match spec {
            StateSpec::CoherentPair { z1, z2 } => (z1 + C64::from_polar(1.0, -phi) * z2).norm_sqr() + 2.0,
            StateSpec::ThermalPair { nbar1, nbar2 } => nbar1 + nbar2 + 2.0,
            StateSpec::SqueezedPair { r1, r2 } => r1.cosh().powi(2) + r2.cosh().powi(2),
            StateSpec::Tmsv { r } => 2.0 * r.cosh().powi(2),
            StateSpec::VacuumPair => 2.0,
        };
        let rho = build_input_default(&spec).unwrap();
        let got = apply_dpa(&rho, DpaParams::new(phi)).unwrap().numerator_trace;
        let e = worst.entry(family.tag()).or_insert(0.0f64);
        *e = e.max((got - want).abs());
    }
    let max = worst.values().copied().fold(0.0, f64::max);
    let per: Vec<String> = worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect();
    outcome(max < 1e-9, format!("160 states, max |Tr - N| per family: {}", per.join(", ")))
}

// 5
fn discorrelation_table() -> Outcome {
    let start = Instant::now();
    let art = run_table("t2", &ScenarioConfig::default()).expect("t2 runs");
    let d = &art.datasets[0];
    let j = d.column("match").unwrap();
    let mismatched = d.rows.iter().filter(|r| r[j] != Cell::Bool(true)).count();
    let rows = d.rows.len();

    // extra random draws against the Yes/No pattern
    let mut r = rng(5);
    let mut wrong = Vec::new();
    let verdict = |spec: &StateSpec, phi: f64, stage: Stage| {
        let rho = build_state(spec, DpaParams::new(phi), stage).unwrap();
        let t = jpnd(&rho, 10).unwrap();
        discorrelation_verdict(&t, DEFAULT_EPS_DIAGONAL, DEFAULT_EPS_MARGINAL).discorrelated
    };
    for _ in 0..12 {
        let phi = r.gen_range(0.0..2.0 * PI);
        let z: f64 = r.gen_range(0.2..1.4);
        let cases = [
            (StateSpec::squeezed(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)), phi, Stage::After, true),
            (StateSpec::tmsv(r.gen_range(0.05..1.0)), phi, Stage::After, true),
            (StateSpec::tmsv(r.gen_range(0.05..1.0)), phi, Stage::Before, false),
            (StateSpec::coherent(z, z), PI, Stage::After, true),
            (StateSpec::coherent(z, z), r.gen_range(0.1..3.0), Stage::After, false),
            (StateSpec::coherent(z, z + 0.3), PI, Stage::After, false),
            (StateSpec::thermal(r.gen_range(0.1..1.5), r.gen_range(0.1..1.5)), phi, Stage::After, false),
        ];
        for (spec, phi, stage, want) in cases {
            if verdict(&spec, phi, stage) != want {
                wrong.push(format!("{spec:?} phi={phi:.3} {stage:?}"));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatched == 0 && wrong.is_empty() && elapsed < ONE_MINUTE,
        format!(
            "table grid {rows} rows, {mismatched} mismatches; 84 random draws, {} mismatches{}; {:.1}s",
            wrong.len(),
            wrong.first().map(|w| format!(" (first: {w})")).unwrap_or_default(),
            elapsed.as_secs_f64()
        ),
    )
}

/// Random point inside the numeric evaluator's region: half from the bulk of the state,
/// half uniform over the disks `|beta_j|^2 <= d_j / 4`.
fn region_point(r: &mut ChaCha8Rng, frame: &GaussianFrame, d: (usize, usize), bulk: bool) -> PhasePoint {
    loop {
        let p = if bulk {
            let y = [0; 4].map(|_| r.gen_range(-1.5..1.5));
            PhasePoint::from_array(frame.map(y))
        } else {
            let disk = |r: &mut ChaCha8Rng, dj: usize| {
                C64::from_polar((dj as f64 / 4.0).sqrt() * r.gen::<f64>().sqrt(), r.gen_range(0.0..2.0 * PI))
            };
            PhasePoint::from_betas(disk(r, d.0), disk(r, d.1))
        };
        if p.beta1().norm_sqr() <= d.0 as f64 / 4.0 && p.beta2().norm_sqr() <= d.1 as f64 / 4.0 {
            return p;
        }
    }
}

// 6
fn wigner_cross_validation() -> Outcome {
    let mut r = rng(6);
    let specs = [
        StateSpec::CoherentPair {
            z1: C64::new(0.8, -0.5),
            z2: C64::new(-0.3, 0.9),
        },
        StateSpec::thermal(0.6, 1.4),
        StateSpec::squeezed(0.7, -0.4),
        StateSpec::tmsv(0.8),
    ];
    let phi = 1.1;
    let mut worst: f64 = 0.0;
    let mut worst_int: f64 = 0.0;
    let mut notes = Vec::new();
    for spec in specs {
        let frame = GaussianFrame::of(&spec);
        for stage in [Stage::Before, Stage::After] {
            let params = DpaParams::new(phi);
            let rho = build_state(&spec, params, stage).unwrap();
            let c = rho.cutoff();
            for k in 0..100 {
                let p = region_point(&mut r, &frame, (c.d1, c.d2), k % 2 == 0);
                let a = wigner_analytic(&spec, params, stage, p);
                let n = wigner_numeric(&rho, p).unwrap();
                worst = worst.max((a - n).abs());
            }
            let eval = WignerEvaluator::analytic(spec, params, stage);
            let rep = wln(&eval, &QuadratureConfig::default()).unwrap();
            worst_int = worst_int.max((rep.integral - 1.0).abs());
        }
        notes.push(spec.family().tag());
    }
    outcome(
        worst < 1e-7 && worst_int < 2e-3,
        format!(
            "{} x 2 stages x 100 points, max |analytic - numeric| = {worst:.2e}; max |integral W - 1| = {worst_int:.2e}",
            notes.join("/")
        ),
    )
}

fn wln_of(spec: StateSpec, phi: f64) -> f64 {
    let eval = WignerEvaluator::analytic(spec, DpaParams::new(phi), Stage::After);
    wln(&eval, &QuadratureConfig::default()).expect("wln converges").wln
}

fn symmetric(family: Family, total: f64) -> StateSpec {
    dpa_core::states::budget_to_spec(family, dpa_core::EnergyBudget::new(total, true), 0.5).unwrap()
}

// 7
fn wln_regression() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();

    let exact = (4.0 * (-0.5f64).exp() - 1.0).ln();
    let w00 = wln_of(StateSpec::VacuumPair, 0.0);
    pass &= (w00 - exact).abs() < 5e-3;
    notes.push(format!("rho00 {w00:.4} vs {exact:.4}"));

    let mut cc = Vec::new();
    for total in [1.0, 2.0, 3.0] {
        cc.push(wln_of(symmetric(Family::Cc, total), PI));
    }
    pass &= cc.iter().all(|w| (w - 0.35).abs() <= 0.01);
    notes.push(format!("cc,pi {:.4?}", cc));

    let mut ss = Vec::new();
    for (total, split) in [(1.0, 0.5), (2.0, 0.5), (3.0, 0.5), (2.0, 0.2)] {
        let spec = dpa_core::states::budget_to_spec(Family::Ss, dpa_core::EnergyBudget::new(total, false), split).unwrap();
        for phi in [0.0, PI / 2.0, PI] {
            ss.push(wln_of(spec, phi));
        }
    }
    let (ss_lo, ss_hi) = ss.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| (lo.min(w), hi.max(w)));
    pass &= ss.iter().all(|w| (w - 0.35).abs() <= 0.01);
    notes.push(format!("ss {} values in [{ss_lo:.4}, {ss_hi:.4}]", ss.len()));

    let mut tt_means = Vec::new();
    let mut tt_spread: f64 = 0.0;
    for total in [1.0, 2.0, 3.0] {
        let spec = symmetric(Family::Tt, total);
        let v: Vec<f64> = [0.0, PI / 2.0, PI].iter().map(|&phi| wln_of(spec, phi)).collect();
        let spread = v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min);
        tt_spread = tt_spread.max(spread);
        tt_means.push(v.iter().sum::<f64>() / 3.0);
    }
    pass &= tt_spread <= 0.005;
    pass &= tt_means.windows(2).all(|w| w[1] < w[0]);
    notes.push(format!("tt means {:.4?}, phi spread {tt_spread:.1e}", tt_means));

    let elapsed = start.elapsed();
    pass &= elapsed < TEN_MINUTES;
    notes.push(format!("{:.1}s", elapsed.as_secs_f64()));
    outcome(pass, notes.join("; "))
}

fn single_photon_matrix(phi: f64, d1: usize, d2: usize) -> Vec<Vec<C64>> {
    let dim = d1 * d2;
    let mut psi = vec![C64::new(0.0, 0.0); dim];
    psi[d2] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[1] = C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phi);
    (0..dim).map(|i| (0..dim).map(|j| psi[i] * psi[j].conj()).collect()).collect()
}

// 8
fn degenerate_chain() -> Outcome {
    let zero = [
        StateSpec::coherent(0.0, 0.0),
        StateSpec::thermal(0.0, 0.0),
        StateSpec::squeezed(0.0, 0.0),
        StateSpec::tmsv(0.0),
        StateSpec::VacuumPair,
    ];
    let mut worst: f64 = 0.0;
    for spec in zero {
        for phi in [0.0, 1.3, PI] {
            let params = DpaParams::new(phi);
            let rho = build_state(&spec, params, Stage::After).unwrap();
            let c = rho.cutoff();
            let m = rho.to_matrix();
            let want = single_photon_matrix(phi, c.d1, c.d2);
            for (i, row) in want.iter().enumerate() {
                for (j, w) in row.iter().enumerate() {
                    worst = worst.max((m[(i, j)] - w).norm());
                }
            }
            worst = worst.max((subspace_witness(&rho).unwrap().npt - 1.0).abs());
            worst = worst.max((npt_closed(&spec, params, Stage::After) - 1.0).abs());
            let t = jpnd(&rho, 4).unwrap();
            worst = worst.max((t.get(1, 0) - 0.5).abs()).max((t.get(0, 1) - 0.5).abs());
            let o = PhasePoint::origin();
            worst = worst.max((wigner_analytic(&spec, params, Stage::After, o) + W00).abs());
            worst = worst.max((wigner_numeric(&rho, o).unwrap() + W00).abs());
        }
    }
    outcome(
        worst < 1e-10,
        format!("5 zero-parameter states x 3 phases: density, NPT, JPND, W(0) max deviation {worst:.1e}"),
    )
}

fn run_cli(args: &[&str], out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_dpa-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)))
    }
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

// 9
fn determinism() -> Outcome {
    let commands: [&[&str]; 8] = [
        &["figure", "fig2"],
        &["figure", "fig3"],
        &["figure", "fig4"],
        &["figure", "fig5"],
        &["figure", "fig6"],
        &["figure", "fig7", "--family", "vac", "--phi", "0,pi"],
        &["table", "t1"],
        &["table", "t2"],
    ];
    let root = tempfile::tempdir().unwrap();
    let mut files = 0;
    let mut differing = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        let a = root.path().join(format!("{i}a"));
        let b = root.path().join(format!("{i}b"));
        if let Err(e) = run_cli(args, &a).and_then(|_| run_cli(args, &b)) {
            return outcome(false, e);
        }
        let (fa, fb) = (read_dir(&a), read_dir(&b));
        if fa.keys().ne(fb.keys()) {
            differing.push(format!("{args:?}: file sets differ"));
        }
        for (name, bytes) in &fa {
            files += 1;
            if fb.get(name) != Some(bytes) {
                differing.push(format!("{args:?}: {name}"));
            }
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} commands, {files} files compared, {} differ{}",
            commands.len(),
            differing.len(),
            differing.first().map(|d| format!(" (first: {d})")).unwrap_or_default()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("closed-form vs oracle NPT", npt_equivalence),
        ("partial-transpose spectra", spectrum_regression),
        ("NPT constants", paper_constants),
        ("normalization factors", normalization_factors),
        ("discorrelation pattern", discorrelation_table),
        ("Wigner cross-validation", wigner_cross_validation),
        ("WLN regression", wln_regression),
        ("degenerate-limit chain", degenerate_chain),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} [{name}] {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} of 9 criteria pass", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
