//! Every pointwise, support and norm inequality checker over the seeded corpus.
//!
//! Checks with an exact statement (set inclusions, reconstruction, the
//! factorization inequality, Yamazaki, embeddings) pass or fail on their
//! own tolerance. Checks that only assert the existence of a constant
//! record the fitted constant and pass when it is finite.

use paradiff_core::operator::{
    apply, compose_multiplier, discrete_adjoint_probe, modulated_apply, para_split, spectral_support_bound, support_inclusions,
    tdc_corona_inclusions,
};
use paradiff_core::pointwise::{
    check_factorization, mihlin_bound, paraterm_pointwise_check, symbol_factor, yamazaki_check, MaxParams,
    RadialCutoff,
};
use paradiff_core::spaces::{
    corona_sum_check, embedding_check, fefferman_stein_check, marschall_check, CoronaSpec, NormSpec,
};
use paradiff_core::symbols::{bessel_potential, ching_symbol, twisted_diagonal_check, BumpProfile, ProfileShape};
use paradiff_core::torus::freq_norm;
use paradiff_core::{DiscreteSymbol, LPPartition, LabError, ModulationFunction, SpectralField, TorusGrid};
use rand::Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::corpus::{random_field, random_shell, stream_rng, Stream};
use crate::error::RunResult;
use crate::record::Recorder;

pub const SUPPORT_RULE: &str = "support/spectral-rule";
pub const CORONA_BALL: &str = "support/corona-ball";
pub const TDC_CORONA: &str = "support/twisted-diagonal-corona";
pub const RECONSTRUCTION: &str = "split/reconstruction";
pub const FACTORIZATION: &str = "pointwise/factorization";
pub const SYMBOL_FACTOR: &str = "pointwise/symbol-factor-bound";
pub const PARATERMS: &str = "pointwise/paraterms";
pub const YAMAZAKI: &str = "sequences/yamazaki";
pub const CORONA_CRITERION: &str = "spaces/corona-criterion";
pub const CORONA_LOSS: &str = "spaces/corona-with-loss";
pub const MAXIMAL_CHAIN: &str = "spaces/maximal-chain";
pub const EMBEDDING: &str = "spaces/embedding";
pub const MARSCHALL: &str = "spaces/marschall";
pub const ADJOINT: &str = "adjoint/probe";
pub const COMPOSITION: &str = "operator/composition";

pub const ANCHORS: [&str; 15] = [
    SUPPORT_RULE,
    CORONA_BALL,
    TDC_CORONA,
    RECONSTRUCTION,
    FACTORIZATION,
    SYMBOL_FACTOR,
    PARATERMS,
    YAMAZAKI,
    CORONA_CRITERION,
    CORONA_LOSS,
    MAXIMAL_CHAIN,
    EMBEDDING,
    MARSCHALL,
    ADJOINT,
    COMPOSITION,
];

/// Relative threshold for the measured support of `a(x,D)u`.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
/// Relative sup-norm tolerance for `c(x,D) = a(x,D) b(D)`.
pub const COMPOSITION_TOL: f64 = 1e-10;
/// Decay `N` of the maximal functions; keeps the Mihlin depth within reach.
pub const DECAY: f64 = 2.0;
/// Inner radius of the ring profile used for the twisted-diagonal corona.
pub const RING_INNER: f64 = 0.2;
/// Smallest grid on which the twisted-diagonal corona has levels to check.
pub const TDC_GRID: usize = 1024;
pub const DEFAULT_MATRIX_CAP: usize = 256;

/// A seeded symbol and an input whose bands fit the lattice together.
pub fn corpus_pair(cfg: &ExperimentConfig, grid: TorusGrid, i: usize) -> RunResult<(DiscreteSymbol, SpectralField)> {
    let a = cfg.symbol.build(grid, &mut stream_rng(cfg.seed, Stream::Symbols, i as u64))?;
    let u = fitting_input(&a, cfg.seed, i)?;
    Ok((a, u))
}

/// Random input with `|η| ≤ min(nyquist/2, nyquist − x_band − 1)`.
pub fn fitting_input(a: &DiscreteSymbol, seed: u64, i: usize) -> RunResult<SpectralField> {
    let grid = a.grid();
    let nyq = grid.nyquist() as f64;
    let room = (nyq - a.x_band() - 1.0).min(nyq / 2.0);
    if room < 1.0 {
        return Err(LabError::AliasingRisk(format!("symbol band {} leaves no room below nyquist {nyq}", a.x_band())).into());
    }
    let mut rng = stream_rng(seed, Stream::Inputs, i as u64);
    let band = rng.gen_range(1.0..=room).floor();
    Ok(random_field(grid, band, &mut rng))
}

/// Largest `2^k` with `2^k R ≤ nyquist`.
fn max_radius(grid: TorusGrid, psi: &ModulationFunction) -> f64 {
    let mut radius = 1.0;
    while 2.0 * radius * psi.big_r() <= grid.nyquist() as f64 {
        radius *= 2.0;
    }
    radius
}

#[derive(Clone, Debug, Default)]
pub struct PairOutcome {
    pub support_escapes: usize,
    pub inclusion_terms: usize,
    pub inclusion_violations: usize,
    pub reconstruction_error: f64,
    pub factorization_ratio: f64,
    pub symbol_factor_ratio: f64,
    /// Sup ratio per series `a1, a2_low, a2_high, a3`.
    pub paraterm_sups: [f64; 4],
    pub embedding_holds: bool,
    /// `‖c(x,D)u − a(x,D)b(D)u‖_∞ / ‖u‖_∞` with `c = a·b` for a Bessel multiplier `b`.
    pub composition_error: f64,
}

/// Support rule, split inclusions, reconstruction, factorization, the
/// symbol-factor bound and the paraterm estimates for one corpus pair.
pub fn check_pair(a: &DiscreteSymbol, u: &SpectralField, part: &LPPartition, seed: u64, i: usize) -> RunResult<PairOutcome> {
    let grid = a.grid();
    let psi = *part.psi();
    let mut out = PairOutcome::default();

    let v = apply(a, u)?;
    let b = bessel_potential(grid, 1.0);
    let c = compose_multiplier(a, &b)?;
    out.composition_error = apply(&c, u)?.max_diff(&apply(a, &apply(&b, u)?)?) / u.max_abs();
    let measured = v.support_above(SUPPORT_THRESHOLD * v.max_coeff());
    out.support_escapes = measured.difference(&spectral_support_bound(a, u)?).len();

    let m = part.j_max();
    let split = para_split(a, u, part, m)?;
    let incl = support_inclusions(&split)?;
    out.inclusion_terms = incl.terms_checked;
    out.inclusion_violations = incl.violations.len();
    out.reconstruction_error = split.reconstruction()?.max_diff(&modulated_apply(a, u, &psi, m)?);

    let radius = max_radius(grid, &psi);
    let params = MaxParams::new(DECAY, radius, 1.0)?;
    let chi = RadialCutoff::Ball(psi);
    let nyq = grid.nyquist() as f64;
    let plateau_band = (radius * psi.r()).min(nyq - a.x_band() - 1.0).floor().max(0.0);
    let mut rng = stream_rng(seed, Stream::Inputs, (1 << 20) + i as u64);
    let uf = random_field(grid, plateau_band, &mut rng);
    out.factorization_ratio = check_factorization(a, &uf, &params, &chi)?.max_ratio;
    let fa = symbol_factor(a, &params, &chi)?;
    let mb = mihlin_bound(a, &params, &chi)?;
    out.symbol_factor_ratio = fa
        .iter()
        .zip(&mb)
        .filter(|(&f, _)| f > 0.0)
        .map(|(f, m)| f / m)
        .fold(0.0, f64::max);

    let pw = paraterm_pointwise_check(&split, a, u, DECAY, 2)?;
    for (slot, s) in out.paraterm_sups.iter_mut().zip(&pw.series) {
        *slot = s.sup();
    }
    out.embedding_holds = embedding_check(u, &NormSpec::triebel(1.0, 2.0, 2.0)?, 0.5, 1.0, part)?.holds;
    Ok(out)
}

/// Terms `u_j` filling the corona `A^{−1}2^{θj} ≤ |ξ| ≤ A2^j` (a ball for
/// `j = 0`) with random coefficients, scaled by `2^{−sj}`.
pub fn corona_series(grid: TorusGrid, spec: &CoronaSpec, seed: u64) -> Vec<SpectralField> {
    (0..=spec.levels)
        .map(|j| {
            let (lo, hi) = spec.region(j);
            let mut rng = stream_rng(seed, Stream::Series, j as u64);
            random_shell(grid, lo, hi, &mut rng).scale(2f64.powf(-spec.s * j as f64).into())
        })
        .collect()
}

/// Largest `J` with `A 2^J ≤ nyquist`.
pub fn corona_levels(grid: TorusGrid, a: f64) -> u32 {
    let mut j = 0;
    while a * 2f64.powi(j as i32 + 1) <= grid.nyquist() as f64 {
        j += 1;
    }
    j
}

fn ring_ching(grid: TorusGrid) -> RunResult<DiscreteSymbol> {
    let profile = BumpProfile::new([1, 0], ProfileShape::Ring { inner: RING_INNER });
    let mut levels = 0;
    while ching_symbol(grid, 0.0, profile.clone(), levels + 1).is_ok() {
        levels += 1;
    }
    Ok(ching_symbol(grid, 0.0, profile, levels)?)
}

fn finite(v: f64) -> bool {
    v.is_finite()
}

pub fn run(cfg: &ExperimentConfig, rec: &mut Recorder) -> RunResult<Vec<String>> {
    let grid = cfg.base_grid()?;
    let part = cfg.partition(grid)?;
    let psi = *part.psi();

    let outcomes = (0..cfg.corpus_size)
        .into_par_iter()
        .map(|i| {
            let (a, u) = corpus_pair(cfg, grid, i)?;
            check_pair(&a, &u, &part, cfg.seed, i)
        })
        .collect::<RunResult<Vec<_>>>()?;
    let sum = |f: fn(&PairOutcome) -> usize| outcomes.iter().map(f).sum::<usize>();
    let max = |f: &dyn Fn(&PairOutcome) -> f64| outcomes.iter().map(f).fold(0.0, f64::max);

    let escapes = sum(|o| o.support_escapes);
    rec.check(SUPPORT_RULE, "frequencies outside the sumset bound", escapes as f64, escapes == 0);
    let violations = sum(|o| o.inclusion_violations);
    rec.check(CORONA_BALL, "corona and ball violations", violations as f64, violations == 0);
    rec.info(CORONA_BALL, "terms checked", sum(|o| o.inclusion_terms) as f64);
    let recon = max(&|o| o.reconstruction_error);
    rec.check(RECONSTRUCTION, "max reconstruction error", recon, recon <= RECONSTRUCTION_TOL);
    let comp = max(&|o| o.composition_error);
    rec.check(COMPOSITION, "max relative sup error", comp, comp <= COMPOSITION_TOL);
    let fact = max(&|o| o.factorization_ratio);
    rec.check(FACTORIZATION, "max ratio", fact, fact <= 1.0 + paradiff_core::pointwise::FACTORIZATION_SLACK);
    let sf = max(&|o| o.symbol_factor_ratio);
    rec.check(SYMBOL_FACTOR, "max F_a over Mihlin sum", sf, finite(sf));
    for (k, name) in ["a1", "a2_low", "a2_high", "a3"].iter().enumerate() {
        let s = max(&|o| o.paraterm_sups[k]);
        rec.check(PARATERMS, format!("{name} sup ratio"), s, finite(s));
    }
    let emb = outcomes.iter().all(|o| o.embedding_holds);
    rec.check(EMBEDDING, "F^1_{2,2} into F^{1/2}_{2,1} holds", if emb { 1.0 } else { 0.0 }, emb);

    // sequences
    let mut yam_ok = true;
    let mut yam_worst: f64 = 0.0;
    for (si, &s) in [-1.0, -0.5].iter().enumerate() {
        for (qi, &q) in [1.0, 2.0, f64::INFINITY].iter().enumerate() {
            for t in 0..100u64 {
                let mut rng = stream_rng(cfg.seed, Stream::Sequences, (si as u64) << 16 | (qi as u64) << 8 | t);
                let len = rng.gen_range(1..=16);
                let b: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
                let rep = yamazaki_check(&b, s, q)?;
                yam_ok &= rep.holds;
                if rep.rhs > 0.0 {
                    yam_worst = yam_worst.max(rep.lhs / (rep.constant * rep.rhs));
                }
            }
        }
    }
    rec.check(YAMAZAKI, "max lhs over c rhs", yam_worst, yam_ok);

    // corona criteria
    let a_const = 2.0;
    let levels = corona_levels(grid, a_const);
    let plain = CoronaSpec { a: a_const, theta: 1.0, levels, s: 0.5, p: 2.0, q: 2.0, s_prime: 0.5 };
    let rep = corona_sum_check(&corona_series(grid, &plain, cfg.seed), &plain, &part)?;
    rec.check(CORONA_CRITERION, "norm of sum over F", rep.ratio, finite(rep.ratio) && rep.ratio > 0.0);
    let lossy = CoronaSpec { theta: 0.5, s: 0.0, s_prime: -0.1, ..plain };
    let rep = corona_sum_check(&corona_series(grid, &lossy, cfg.seed), &lossy, &part)?;
    rec.check(CORONA_LOSS, "norm of sum over F", rep.ratio, finite(rep.ratio) && rep.ratio > 0.0);

    // maximal chain and Marschall on the first pair
    let (a0, u0) = corpus_pair(cfg, grid, 0)?;
    let chain = fefferman_stein_check(&part.blocks(&u0)?, &NormSpec::triebel(0.5, 2.0, 2.0)?, 0.5, 2.5, psi.big_r())?;
    rec.check(MAXIMAL_CHAIN, "Peetre over Hardy-Littlewood", chain.first_ratio(), finite(chain.first_ratio()));
    rec.check(MAXIMAL_CHAIN, "Hardy-Littlewood over blocks", chain.second_ratio(), finite(chain.second_ratio()));

    let nyq = grid.nyquist() as f64;
    let k = (nyq / 4.0).log2().floor() as u32;
    let reach = 2f64.powi(k as i32);
    let cut = ModulationFunction::new(1.0, 2.0)?;
    let b = a0.map_spectrum(a0.x_band(), move |_, eta, c| c * cut.eval(freq_norm(eta) / (reach / 2.0)));
    let band = reach.min(nyq - a0.x_band() - 1.0).floor().max(0.0);
    let ub = random_field(grid, band, &mut stream_rng(cfg.seed, Stream::Inputs, 1 << 21));
    let mr = marschall_check(&b, &ub, k, 1.0, &cut)?;
    rec.check(MARSCHALL, "max ratio", mr.max_ratio, finite(mr.max_ratio));

    // twisted-diagonal corona on a grid fine enough to reach the checked levels
    let fine = TorusGrid::new(1, grid.size().max(TDC_GRID))?;
    let ring = ring_ching(fine)?;
    let b_const = 1.25 / RING_INNER;
    let tdc = twisted_diagonal_check(&ring, b_const, 0.0);
    rec.check(TDC_CORONA, "ring profile satisfies the condition", tdc.worst_violation, tdc.holds);
    let fine_part = cfg.partition(fine)?;
    let uf = fitting_input(&ring, cfg.seed, 1 << 22)?;
    let split = para_split(&ring, &uf, &fine_part, fine_part.j_max())?;
    let (report, first) = tdc_corona_inclusions(&split, b_const)?;
    rec.check(TDC_CORONA, "violations", report.violations.len() as f64, report.holds() && report.terms_checked > 0);
    rec.info(TDC_CORONA, "first checked level", if first == u32::MAX { f64::NAN } else { first as f64 });

    // adjoint probe, capped by the matrix dimension
    let cap = cfg.max_matrix_dim.unwrap_or(DEFAULT_MATRIX_CAP);
    match discrete_adjoint_probe(&a0, cap) {
        Ok(probe) => {
            for sn in probe.seminorms {
                rec.info(ADJOINT, format!("alpha={:?} beta={:?}", sn.alpha, sn.beta), sn.value);
            }
        }
        Err(LabError::TooLarge { dim, cap }) => {
            rec.info(ADJOINT, format!("skipped: dimension {dim} above cap {cap}"), f64::NAN);
        }
        Err(e) => return Err(e.into()),
    }

    Ok(ANCHORS.iter().map(|s| s.to_string()).collect())
}
