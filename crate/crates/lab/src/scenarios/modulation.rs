//! Vanishing frequency modulation: ψ-independence of the limit, the level at
//! which it settles, and the non-decaying Cauchy profile of a Ching symbol
//! fed its resonant frequencies.

use num_complex::Complex64;
use paradiff_core::operator::{active_band, forced_level, modulation_levels, modulation_limit};
use paradiff_core::symbols::{ching_symbol, identity_symbol, BumpProfile, ProfileShape};
use paradiff_core::{DiscreteSymbol, ModulationFunction, SpectralField, TorusGrid};
use rand::Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::corpus::{random_field, stream_rng, Stream};
use crate::error::RunResult;
use crate::record::Recorder;

pub const PSI_INDEPENDENCE: &str = "modulation/psi-independence";
pub const FORCED_LEVEL: &str = "modulation/forced-level";
pub const IDENTITY_LEVEL: &str = "modulation/identity-bandwidth-level";
pub const CHING_PROFILE: &str = "modulation/ching-non-decay";

pub const LIMIT_TOL: f64 = 1e-10;
/// A Cauchy difference counts as active when it exceeds this share of the largest.
pub const ACTIVE_SHARE: f64 = 0.25;
/// Smallest accepted change of the top input frequency at the last step.
pub const VISIBLE_STEP: f64 = 1e-3;

#[derive(Clone, Debug, Default)]
struct GridOutcome {
    discrepancy: f64,
    mismatches: usize,
    identity_mismatches: usize,
    pairs: usize,
}

/// Smallest change `1 − ψ(2^{-m'} b)` of the top active frequency `b` at the
/// last step `m' → m` before the forced level, over all ψ.
fn last_step_change(a: &DiscreteSymbol, u: &SpectralField, psis: &[ModulationFunction]) -> RunResult<f64> {
    let band = active_band(a, u)?;
    let mut smallest: f64 = 1.0;
    for psi in psis {
        let m = forced_level(a, u, psi)?;
        let levels = modulation_levels(psi, &a.grid());
        let pos = levels.iter().position(|&l| l == m).expect("forced level is allowed");
        if pos > 0 {
            smallest = smallest.min(1.0 - psi.eval_dilated(band, levels[pos - 1] as i64));
        }
    }
    Ok(smallest)
}

/// A symbol and an input whose top frequency changes visibly at the last
/// modulation step for every ψ, so that stabilization at tolerance
/// coincides with the forced level.
fn corpus_item(cfg: &ExperimentConfig, grid: TorusGrid, i: usize) -> RunResult<(DiscreteSymbol, SpectralField)> {
    let psis = cfg.modulation_functions()?;
    let mut rng = stream_rng(cfg.seed, Stream::Symbols, i as u64);
    let a = cfg.symbol.build(grid, &mut rng)?;
    let nyq = grid.nyquist() as f64;
    let lo = (a.x_band() + 1.0).min(nyq / 4.0);
    let hi = (nyq - a.x_band() - 1.0).min(nyq / 4.0).max(lo);
    let mut rng = stream_rng(cfg.seed, Stream::Inputs, i as u64);
    let mut u = SpectralField::zeros(grid);
    for _ in 0..64 {
        let band = rng.gen_range(lo..=hi).floor();
        u = random_field(grid, band, &mut rng);
        if last_step_change(&a, &u, &psis)? >= VISIBLE_STEP {
            break;
        }
    }
    Ok((a, u))
}

fn band_limited(cfg: &ExperimentConfig, grid: TorusGrid) -> RunResult<GridOutcome> {
    let psis = cfg.modulation_functions()?;
    let identity = identity_symbol(grid);
    let outcomes = (0..cfg.corpus_size)
        .into_par_iter()
        .map(|i| -> RunResult<GridOutcome> {
            let (a, u) = corpus_item(cfg, grid, i)?;
            let mut out = GridOutcome { pairs: 1, ..Default::default() };
            let rep = modulation_limit(&a, &u, &psis, LIMIT_TOL)?;
            out.discrepancy = rep.psi_discrepancy;
            for p in &rep.profiles {
                if p.stabilization_m != Some(forced_level(&a, &u, &p.psi)?) {
                    out.mismatches += 1;
                }
            }
            let rep = modulation_limit(&identity, &u, &psis, LIMIT_TOL)?;
            out.discrepancy = out.discrepancy.max(rep.psi_discrepancy);
            for p in &rep.profiles {
                if p.stabilization_m != Some(forced_level(&identity, &u, &p.psi)?) {
                    out.identity_mismatches += 1;
                }
            }
            Ok(out)
        })
        .collect::<RunResult<Vec<_>>>()?;
    Ok(outcomes.into_iter().fold(GridOutcome::default(), |acc, o| GridOutcome {
        discrepancy: acc.discrepancy.max(o.discrepancy),
        mismatches: acc.mismatches + o.mismatches,
        identity_mismatches: acc.identity_mismatches + o.identity_mismatches,
        pairs: acc.pairs + o.pairs,
    }))
}

/// Largest Ching truncation the grid resolves.
fn top_level(grid: TorusGrid) -> u32 {
    let mut j = 0;
    while 5.0 * 2f64.powi(j as i32 - 1) < grid.nyquist() as f64 {
        j += 1;
    }
    j
}

/// Cauchy differences of the first modulation function for the Ching symbol
/// with `A(θ) = 1` applied to `Σ_j e^{i 2^j x}`.
pub fn ching_profile(cfg: &ExperimentConfig, grid: TorusGrid) -> RunResult<(u32, Vec<f64>)> {
    let psis = cfg.modulation_functions()?;
    let levels = top_level(grid);
    let a = ching_symbol(grid, 0.0, BumpProfile::new([1, 0], ProfileShape::Bump { zero_order: 0 }), levels)?;
    let modes: Vec<_> = (0..=levels).map(|j| ([1i64 << j, 0], Complex64::new(1.0, 0.0))).collect();
    let u = SpectralField::from_modes(grid, &modes)?;
    let rep = modulation_limit(&a, &u, &psis, LIMIT_TOL)?;
    Ok((levels, rep.cauchy_profile().to_vec()))
}

pub fn active_levels(differences: &[f64]) -> usize {
    let max = differences.iter().cloned().fold(0.0, f64::max);
    differences.iter().filter(|&&d| d >= ACTIVE_SHARE * max && d > 0.0).count()
}

pub fn run(cfg: &ExperimentConfig, rec: &mut Recorder) -> RunResult<Vec<String>> {
    let grids = cfg.grids()?;
    let mut counts = Vec::new();
    for &g in &grids {
        let n = g.size();
        let out = band_limited(cfg, g)?;
        rec.check(PSI_INDEPENDENCE, format!("N={n} max psi discrepancy"), out.discrepancy, out.discrepancy <= LIMIT_TOL);
        rec.check(FORCED_LEVEL, format!("N={n} stabilization mismatches"), out.mismatches as f64, out.mismatches == 0);
        rec.check(
            IDENTITY_LEVEL,
            format!("N={n} identity mismatches"),
            out.identity_mismatches as f64,
            out.identity_mismatches == 0,
        );
        rec.info(PSI_INDEPENDENCE, format!("N={n} pairs"), out.pairs as f64);
        if g.dim() == 1 {
            let (levels, diffs) = ching_profile(cfg, g)?;
            let active = active_levels(&diffs);
            rec.info(CHING_PROFILE, format!("N={n} J={levels} active Cauchy levels"), active as f64);
            rec.info(
                CHING_PROFILE,
                format!("N={n} smallest nonzero difference"),
                diffs.iter().cloned().filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min),
            );
            counts.push(active);
        }
    }
    let mut anchors = vec![PSI_INDEPENDENCE.to_string(), FORCED_LEVEL.into(), IDENTITY_LEVEL.into()];
    if !counts.is_empty() {
        // the number of O(1) differences must keep pace with the refinement
        let growing = counts.windows(2).all(|w| w[1] > w[0]);
        let last = *counts.last().expect("nonempty");
        rec.check(CHING_PROFILE, "active levels grow under refinement", last as f64, growing && last >= 2);
        anchors.push(CHING_PROFILE.into());
    }
    Ok(anchors)
}
