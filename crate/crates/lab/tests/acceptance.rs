//! Acceptance suite: one pass/fail line per criterion, non-zero exit on any
//! failure. Runs with `cargo test -p paradiff-lab --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use paradiff_core::operator::{para_split, support_inclusions};
use paradiff_core::pointwise::{yamazaki_check, yamazaki_constant};
use paradiff_core::spaces::{
    axis_mode, corona_sum_check, homog_besov_norm, space_norm, CoronaSpec, NormSpec, SampledFunction,
};
use paradiff_core::symbols::{ching_symbol, BumpProfile, ProfileShape};
use paradiff_core::{LPPartition, ModulationFunction, SpectralField, TorusGrid};
use paradiff_lab::corpus::{random_field, stream_rng, Stream};
use paradiff_lab::opnorm::hilbert_operator_norm;
use paradiff_lab::scenarios::inequalities::{
    check_pair, corona_levels, corona_series, corpus_pair, fitting_input, RECONSTRUCTION_TOL,
};
use paradiff_lab::scenarios::{self, modulation, spread, GROWTH_FACTOR, STABLE_SPREAD};
use paradiff_lab::{ExperimentConfig, RunResult, Scenario};
use rand::Rng;
use serde_json::json;

const SEED: u64 = 20240601;

struct Outcome {
    pass: bool,
    summary: String,
    /// Every measured value, formatted exactly; compared across runs.
    payload: String,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>, values: &[f64]) -> Self {
        let payload = values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",");
        Self { pass, summary: summary.into(), payload }
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> RunResult<Outcome>,
}

fn config(value: serde_json::Value) -> ExperimentConfig {
    serde_json::from_value(value).expect("acceptance config parses")
}

fn inequality_config(corpus: usize) -> ExperimentConfig {
    config(json!({
        "grid": {"n": 1, "N": 256},
        "partition": {"r": 1.0, "R": 2.0, "h": 3},
        "symbol": {"family": "random", "order": 0.5, "x_band": 20.0},
        "seed": SEED,
        "corpus_size": corpus
    }))
}

fn psi() -> ModulationFunction {
    ModulationFunction::new(1.0, 2.0).expect("valid psi")
}

fn pair_outcomes(count: usize) -> RunResult<Vec<paradiff_lab::scenarios::inequalities::PairOutcome>> {
    let cfg = inequality_config(count);
    let grid = cfg.base_grid()?;
    let part = cfg.partition(grid)?;
    (0..count)
        .map(|i| {
            let (a, u) = corpus_pair(&cfg, grid, i)?;
            check_pair(&a, &u, &part, cfg.seed, i)
        })
        .collect()
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn support_rule() -> RunResult<Outcome> {
    let cfg = inequality_config(50);
    let grid = cfg.base_grid()?;
    let mut escapes = Vec::new();
    for i in 0..50 {
        let (a, u) = corpus_pair(&cfg, grid, i)?;
        let v = paradiff_core::operator::apply(&a, &u)?;
        let measured = v.support_above(1e-10 * v.max_coeff());
        let bound = paradiff_core::operator::spectral_support_bound(&a, &u)?;
        escapes.push(measured.difference(&bound).len() as f64);
    }
    let total: f64 = escapes.iter().sum();
    Ok(Outcome::new(total == 0.0, format!("{total} escaping frequencies over 50 pairs"), &escapes))
}

fn corona_ball() -> RunResult<Outcome> {
    let cfg = inequality_config(10);
    let grid = cfg.base_grid()?;
    let part = cfg.partition(grid)?;
    let r_h_exact = part.r_h() == 0.25;
    let mut symbols = Vec::new();
    let mut top = 1;
    while ching_symbol(grid, 0.0, BumpProfile::new([1, 0], ProfileShape::Bump { zero_order: 0 }), top + 1).is_ok() {
        top += 1;
    }
    symbols.push(ching_symbol(grid, 0.0, BumpProfile::new([1, 0], ProfileShape::Bump { zero_order: 0 }), top)?);
    for i in 0..10 {
        symbols.push(corpus_pair(&cfg, grid, i)?.0);
    }
    let mut counts = Vec::new();
    for (i, a) in symbols.iter().enumerate() {
        let u = fitting_input(a, SEED, 100 + i)?;
        let split = para_split(a, &u, &part, part.j_max())?;
        let rep = support_inclusions(&split)?;
        counts.push(rep.terms_checked as f64);
        counts.push(rep.violations.len() as f64);
    }
    let violations: f64 = counts.iter().skip(1).step_by(2).sum();
    let terms: f64 = counts.iter().step_by(2).sum();
    Ok(Outcome::new(
        violations == 0.0 && terms > 0.0 && r_h_exact,
        format!("R_h={} violations={violations} over {terms} terms (Ching J={top} + 10 random)", part.r_h()),
        &counts,
    ))
}

fn reconstruction() -> RunResult<Outcome> {
    let errs: Vec<f64> = pair_outcomes(50)?.iter().map(|o| o.reconstruction_error).collect();
    let worst = max_of(errs.iter().copied());
    Ok(Outcome::new(worst <= RECONSTRUCTION_TOL, format!("max error {worst:.3e}"), &errs))
}

fn factorization() -> RunResult<Outcome> {
    let ratios: Vec<f64> = pair_outcomes(50)?.iter().map(|o| o.factorization_ratio).collect();
    let worst = max_of(ratios.iter().copied());
    Ok(Outcome::new(worst <= 1.0 + 1e-6, format!("max ratio {worst:.4}"), &ratios))
}

fn modulation_config() -> ExperimentConfig {
    config(json!({
        "grid": {"n": 1, "N": 256},
        "refinements": [128, 256, 512],
        "partition": {"r": 1.0, "R": 2.0},
        "symbol": {"family": "random", "order": 1.0, "x_band": 6.0},
        "modulation": [{"r": 1.0, "R": 2.0}, {"r": 1.5, "R": 2.5}, {"r": 0.75, "R": 1.75}],
        "seed": 7,
        "corpus_size": 12
    }))
}

fn modulation_independence() -> RunResult<Outcome> {
    let rec = scenarios::run(&modulation_config(), Scenario::Modulation)?;
    let relevant = [modulation::PSI_INDEPENDENCE, modulation::FORCED_LEVEL, modulation::IDENTITY_LEVEL];
    let checks: Vec<_> = rec.metrics().iter().filter(|m| relevant.contains(&m.anchor.as_str()) && m.pass.is_some()).collect();
    let pass = !checks.is_empty() && checks.iter().all(|m| m.pass == Some(true));
    let values: Vec<f64> = checks.iter().map(|m| m.value).collect();
    let discrepancy = max_of(
        checks.iter().filter(|m| m.anchor == modulation::PSI_INDEPENDENCE).map(|m| m.value),
    );
    let mismatches: f64 = checks.iter().filter(|m| m.anchor != modulation::PSI_INDEPENDENCE).map(|m| m.value).sum();
    Ok(Outcome::new(pass, format!("psi discrepancy {discrepancy:.1e}, level mismatches {mismatches}"), &values))
}

fn composition() -> RunResult<Outcome> {
    let errs: Vec<f64> = pair_outcomes(50)?.iter().map(|o| o.composition_error).collect();
    let worst = max_of(errs.iter().copied());
    Ok(Outcome::new(worst <= 1e-10, format!("max relative sup error {worst:.3e}"), &errs))
}

fn ching(grid: TorusGrid, zero_order: u32, levels: u32) -> RunResult<Option<paradiff_core::DiscreteSymbol>> {
    let profile = BumpProfile::new([1, 0], ProfileShape::Bump { zero_order });
    match ching_symbol(grid, 0.0, profile, levels) {
        Ok(a) => Ok(Some(a)),
        Err(paradiff_core::LabError::GridTooCoarse(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn ching_unboundedness() -> RunResult<Outcome> {
    let mut values = Vec::new();
    let mut factors = Vec::new();
    let mut smooth = Vec::new();
    for size in [256, 512, 1024] {
        let grid = TorusGrid::new(1, size)?;
        let part = LPPartition::new(psi(), grid)?;
        let at = |j: u32, s: f64| -> RunResult<f64> {
            Ok(match ching(grid, 0, j)? {
                Some(a) => hilbert_operator_norm(&a, &part, s, s, SEED)?.value,
                None => f64::NAN,
            })
        };
        let factor = at(8, 0.0)? / at(3, 0.0)?;
        factors.push(factor);
        for j in 3..=8 {
            let v = at(j, 1.0)?;
            if v.is_finite() {
                smooth.push(v);
            }
        }
    }
    values.extend(&factors);
    values.extend(&smooth);
    let grows = factors.iter().all(|&f| f >= GROWTH_FACTOR);
    let sp = spread(&smooth);
    let fmt: Vec<String> = factors.iter().map(|f| if f.is_nan() { "J=8 does not fit".into() } else { format!("{f:.3}") }).collect();
    Ok(Outcome::new(
        grows && sp < STABLE_SPREAD,
        format!("s=0 J8/J3 at N=256,512,1024: [{}]; s=1 spread {sp:.3e}", fmt.join(", ")),
        &values,
    ))
}

fn zero_order_sensitivity() -> RunResult<Outcome> {
    let grid = TorusGrid::new(1, 1024)?;
    let part = LPPartition::new(psi(), grid)?;
    let curve = |rho: u32| -> RunResult<Vec<f64>> {
        (5..=8)
            .map(|j| {
                let a = ching(grid, rho, j)?.expect("J ≤ 8 fits N = 1024");
                Ok(hilbert_operator_norm(&a, &part, -0.5, -0.5, SEED)?.value)
            })
            .collect()
    };
    let flat = curve(0)?;
    let vanishing = curve(1)?;
    let growth = flat[flat.len() - 1] / flat[0];
    let sp = spread(&vanishing);
    let mut values = flat.clone();
    values.extend(&vanishing);
    Ok(Outcome::new(
        growth >= GROWTH_FACTOR && sp < STABLE_SPREAD,
        format!("s=-0.5: rho=0 growth {growth:.3}, rho=1 spread {sp:.3}"),
        &values,
    ))
}

fn yamazaki() -> RunResult<Outcome> {
    let mut worst: f64 = 0.0;
    let mut holds = true;
    let mut exact = true;
    let mut values = Vec::new();
    for (si, s) in [-1.0, -0.5].into_iter().enumerate() {
        for (qi, q) in [1.0, 2.0, f64::INFINITY].into_iter().enumerate() {
            for t in 0..1000u64 {
                let mut rng = stream_rng(SEED, Stream::Sequences, (si as u64) << 20 | (qi as u64) << 16 | t);
                let len = rng.gen_range(1..=24);
                let b: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
                let rep = yamazaki_check(&b, s, q)?;
                holds &= rep.holds;
                if rep.rhs > 0.0 {
                    worst = worst.max(rep.lhs / (rep.constant * rep.rhs));
                }
            }
            // b = (1, 0, 0, ...): lhs/rhs is the geometric sum itself
            let unit = yamazaki_check(&[1.0], s, q)?;
            let want = if q.is_infinite() { 1.0 } else { 1.0 / (1.0 - 2f64.powf(s * q)) };
            let floor = 1.0 / (1.0 - 2f64.powf(s));
            let c = yamazaki_constant(s, q)?;
            exact &= (unit.lhs / unit.rhs - want).abs() <= 1e-15 * want && c >= floor;
            values.extend([unit.lhs / unit.rhs, c]);
        }
    }
    values.push(worst);
    Ok(Outcome::new(holds && exact, format!("6000 sequences, max lhs/(c rhs) {worst:.4}, unit case exact: {exact}"), &values))
}

fn corona_with_loss() -> RunResult<Outcome> {
    let mut ratios = Vec::new();
    for size in [256, 512, 1024] {
        let grid = TorusGrid::new(1, size)?;
        let part = LPPartition::new(psi(), grid)?;
        let a = 2.0;
        let spec = CoronaSpec { a, theta: 0.5, levels: corona_levels(grid, a), s: 0.0, p: 2.0, q: 2.0, s_prime: -0.1 };
        // corona_sum_check rejects any term leaving its corona
        let rep = corona_sum_check(&corona_series(grid, &spec, SEED), &spec, &part)?;
        ratios.push(rep.ratio);
    }
    let drift = spread(&ratios);
    Ok(Outcome::new(drift < STABLE_SPREAD, format!("ratios {ratios:.4?}, drift {drift:.3}"), &ratios))
}

fn norm_sanity() -> RunResult<Outcome> {
    let grid = TorusGrid::new(1, 128)?;
    let part = LPPartition::new(psi(), grid)?;
    let specs = [
        NormSpec::besov(1.5, 2.0, 2.0)?,
        NormSpec::besov(-0.5, 1.0, f64::INFINITY)?,
        NormSpec::besov(0.0, 0.5, 0.75)?,
        NormSpec::triebel(0.5, 2.0, 1.0)?,
        NormSpec::triebel(-1.0, 0.75, 2.0)?,
        NormSpec::triebel(2.0, 3.0, f64::INFINITY)?,
    ];
    let mut values = Vec::new();
    // single mode on the plateau of block j0 = 4
    let mode = axis_mode(grid, 16)?;
    let mut mode_err: f64 = 0.0;
    for spec in &specs {
        let want = 2f64.powf(4.0 * spec.s);
        let got = space_norm(&mode, spec, &part)?;
        mode_err = mode_err.max((got - want).abs() / want);
        values.push(got);
    }
    let mut sub_excess: f64 = 0.0;
    let mut homog_err: f64 = 0.0;
    for i in 0..200u64 {
        let mut rng = stream_rng(SEED, Stream::Inputs, 1 << 30 | i);
        let spec = &specs[i as usize % specs.len()];
        let u = random_field(grid, rng.gen_range(1.0..60.0f64).floor(), &mut rng);
        let v = random_field(grid, rng.gen_range(1.0..60.0f64).floor(), &mut rng);
        let c = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let (nu, nv, nuv) = (space_norm(&u, spec, &part)?, space_norm(&v, spec, &part)?, space_norm(&u.add(&v)?, spec, &part)?);
        let lam = spec.lambda();
        sub_excess = sub_excess.max((nuv.powf(lam) - nu.powf(lam) - nv.powf(lam)) / (nu.powf(lam) + nv.powf(lam)));
        let ncu = space_norm(&u.scale(c), spec, &part)?;
        homog_err = homog_err.max((ncu - c.norm() * nu).abs() / (c.norm() * nu));
    }
    values.extend([sub_excess, homog_err]);
    // the same trigonometric polynomial under two partitions at each refinement
    let mut rng = stream_rng(SEED, Stream::Inputs, 1 << 31);
    let modes: Vec<_> = (-20i64..=20)
        .map(|k| ([k, 0], Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    let other = ModulationFunction::new(0.75, 1.75)?;
    let spec = NormSpec::besov(0.5, 2.0, 2.0)?;
    let mut ratios = Vec::new();
    for size in [128, 256, 512] {
        let g = TorusGrid::new(1, size)?;
        let u = SpectralField::from_modes(g, &modes)?;
        ratios.push(space_norm(&u, &spec, &LPPartition::new(psi(), g)?)? / space_norm(&u, &spec, &LPPartition::new(other, g)?)?);
    }
    let drift = spread(&ratios);
    values.extend(&ratios);
    let pass = mode_err <= 1e-12 && sub_excess <= 1e-8 && homog_err <= 1e-8 && drift < 0.1;
    Ok(Outcome::new(
        pass,
        format!("mode err {mode_err:.1e}, subadditivity excess {sub_excess:.1e}, homogeneity err {homog_err:.1e}, partition drift {drift:.1e}"),
        &values,
    ))
}

fn marschall_scaling() -> RunResult<Outcome> {
    let layout = TorusGrid::new(1, 256)?;
    let psi = psi();
    let b = SampledFunction::from_fn(layout, 0.25, |e| {
        let t = e[0].abs();
        Complex64::new(if t > 0.0 { psi.eval(t) - psi.eval(2.0 * t) } else { 0.0 }, 0.0)
    })?;
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for t in [1.0, 0.8, 0.5] {
        let base = homog_besov_norm(&b, t, &psi)?;
        for k in [-1, 1, 2, 3] {
            let ratio = homog_besov_norm(&b.dilate(k), t, &psi)? / base;
            let want = 2f64.powf(k as f64 * (1.0 / t - 1.0));
            worst = worst.max((ratio - want).abs() / want);
            values.push(ratio);
        }
    }
    Ok(Outcome::new(worst <= 1e-8, format!("max relative error {worst:.1e}"), &values))
}

fn criteria() -> Vec<Criterion> {
    let secs = |s| Some(Duration::from_secs(s));
    vec![
        Criterion { id: 1, name: "spectral support rule", budget: secs(30), run: support_rule },
        Criterion { id: 2, name: "corona and ball inclusions", budget: secs(60), run: corona_ball },
        Criterion { id: 3, name: "paradifferential reconstruction", budget: None, run: reconstruction },
        Criterion { id: 4, name: "factorization inequality", budget: None, run: factorization },
        Criterion { id: 5, name: "modulation independence", budget: None, run: modulation_independence },
        Criterion { id: 6, name: "composition with a multiplier", budget: None, run: composition },
        Criterion { id: 7, name: "Ching unboundedness indicator", budget: secs(120), run: ching_unboundedness },
        Criterion { id: 8, name: "zero-order sensitivity", budget: None, run: zero_order_sensitivity },
        Criterion { id: 9, name: "Yamazaki inequality", budget: None, run: yamazaki },
        Criterion { id: 10, name: "corona criterion with loss", budget: secs(120), run: corona_with_loss },
        Criterion { id: 11, name: "norm sanity", budget: None, run: norm_sanity },
        Criterion { id: 12, name: "homogeneous Besov scaling", budget: None, run: marschall_scaling },
    ]
}

fn run_all(report: bool) -> (Vec<bool>, Vec<String>) {
    let mut passes = Vec::new();
    let mut payloads = Vec::new();
    for c in criteria() {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let (pass, summary, payload) = match result {
            Ok(o) => {
                let in_budget = c.budget.is_none_or(|b| elapsed <= b);
                let budget = c.budget.map(|b| format!(" (budget {}s)", b.as_secs())).unwrap_or_default();
                (o.pass && in_budget, format!("{}; {:.2}s{budget}", o.summary, elapsed.as_secs_f64()), o.payload)
            }
            Err(e) => (false, format!("error: {e}"), String::new()),
        };
        if report {
            println!("{}  {:>2}  {:<34} {summary}", if pass { "PASS" } else { "FAIL" }, c.id, c.name);
        }
        passes.push(pass);
        payloads.push(payload);
    }
    (passes, payloads)
}

fn determinism(first: &[String]) -> RunResult<Outcome> {
    let (_, second) = run_all(false);
    let mut same = first == second.as_slice();
    for (scenario, cfg) in [(Scenario::Inequalities, inequality_config(16)), (Scenario::Modulation, modulation_config())] {
        let a = scenarios::run(&cfg, scenario)?.metrics_payload()?;
        let b = scenarios::run(&cfg, scenario)?.metrics_payload()?;
        same &= a == b;
    }
    let differing = first.iter().zip(&second).filter(|(a, b)| a != b).count();
    Ok(Outcome::new(same, format!("{differing} criterion payloads differ on rerun"), &[differing as f64]))
}

fn main() -> ExitCode {
    let (mut passes, payloads) = run_all(true);
    let pass = match determinism(&payloads) {
        Ok(o) => {
            println!("{}  13  {:<34} {}", if o.pass { "PASS" } else { "FAIL" }, "determinism", o.summary);
            o.pass
        }
        Err(e) => {
            println!("FAIL  13  {:<34} error: {e}", "determinism");
            false
        }
    };
    passes.push(pass);
    let failed = passes.iter().filter(|p| !**p).count();
    println!("acceptance: {} of {} criteria pass", passes.len() - failed, passes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
