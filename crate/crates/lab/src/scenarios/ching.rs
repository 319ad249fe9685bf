//! H^s ratio curves of Ching symbols whose profile vanishes to order ρ at θ.

use paradiff_core::symbols::{fit_tdc_exponent, LocalizationCutoff, ProfileShape};
use paradiff_core::{LabError, TorusGrid};
use rayon::prelude::*;

use super::{monotone_growth, spread, GROWTH_FACTOR, STABLE_SPREAD};
use crate::config::{ExperimentConfig, SymbolFamily};
use crate::error::{RunError, RunResult};
use crate::opnorm::hilbert_operator_norm;
use crate::record::{Recorder, Table, TableRow};

pub const SWEEP: &str = "ching/sweep";
pub const POSITIVE_SMOOTHNESS: &str = "ching/positive-smoothness";
pub const THRESHOLD: &str = "ching/zero-order-threshold";
pub const TDC_FIT: &str = "ching/twisted-diagonal-fit";

/// Smallest source smoothness counted as inside the positive-smoothness region.
pub const POSITIVE_S: f64 = 1.0;

fn family_with(cfg: &ExperimentConfig, rho: u32) -> RunResult<SymbolFamily> {
    match &cfg.symbol {
        SymbolFamily::Ching { d, theta, levels, .. } => Ok(SymbolFamily::Ching {
            d: *d,
            theta: *theta,
            shape: ProfileShape::Bump { zero_order: rho },
            levels: *levels,
        }),
        _ => Err(RunError::Config("ching study needs a ching symbol family".into())),
    }
}

/// Verdict for one `(ρ, s)` curve across truncations at a fixed grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub rho: u32,
    pub s: f64,
    pub size: usize,
    pub values: Vec<f64>,
}

impl Curve {
    pub fn growth(&self) -> f64 {
        self.values[self.values.len() - 1] / self.values[0]
    }

    pub fn spread(&self) -> f64 {
        spread(&self.values)
    }

    pub fn stable(&self) -> bool {
        self.spread() < STABLE_SPREAD
    }

    pub fn growing(&self) -> bool {
        monotone_growth(&self.values) && self.growth() >= GROWTH_FACTOR
    }
}

pub fn curve_name(rho: u32, s: f64, size: usize) -> String {
    format!("rho={rho} s={s} N={size}")
}

pub fn run(cfg: &ExperimentConfig, rec: &mut Recorder) -> RunResult<Vec<String>> {
    let grids = cfg.grids()?;
    let mut levels = cfg.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let mut rhos = cfg.zero_orders.clone();
    rhos.sort_unstable();
    rhos.dedup();
    let mut smoothness = cfg.smoothness.clone();
    smoothness.sort_by(|a, b| a.partial_cmp(b).expect("finite smoothness"));
    smoothness.dedup();
    let d = cfg.symbol.order();

    let mut jobs: Vec<(u32, TorusGrid, u32)> = Vec::new();
    for &r in &rhos {
        for &g in &grids {
            jobs.extend(levels.iter().map(|&j| (r, g, j)));
        }
    }
    let results = jobs
        .par_iter()
        .map(|&(rho, g, j)| -> RunResult<Option<Vec<f64>>> {
            let a = match family_with(cfg, rho)?.ching_at(g, j) {
                Ok(a) => a,
                Err(RunError::Core(LabError::GridTooCoarse(_))) => return Ok(None),
                Err(e) => return Err(e),
            };
            let part = cfg.partition(g)?;
            smoothness
                .iter()
                .map(|&s| Ok(hilbert_operator_norm(&a, &part, s, s - d, cfg.seed)?.value))
                .collect::<RunResult<Vec<_>>>()
                .map(Some)
        })
        .collect::<RunResult<Vec<_>>>()?;

    for &rho in &rhos {
        for &j in &levels {
            let mut table = Table::new(format!("ching_rho{rho}_J{j}"));
            for ((r, g, jj), res) in jobs.iter().zip(&results) {
                if *r == rho && *jj == j {
                    if let Some(vals) = res {
                        for (&s, &v) in smoothness.iter().zip(vals) {
                            table.rows.push(TableRow { scale: "F".into(), s, p: 2.0, q: 2.0, size: g.size(), value: v });
                        }
                    }
                }
            }
            rec.table(table);
        }
    }

    let mut thresholds = Vec::new();
    for &rho in &rhos {
        // finest grid resolving at least three truncations
        let chosen = grids.iter().rev().find_map(|g| {
            let rows: Vec<&Vec<f64>> = jobs
                .iter()
                .zip(&results)
                .filter(|((r, gg, _), _)| *r == rho && gg.size() == g.size())
                .filter_map(|(_, res)| res.as_ref())
                .collect();
            (rows.len() >= 3).then_some((g.size(), rows))
        });
        let Some((size, rows)) = chosen else {
            rec.info(SWEEP, format!("rho={rho} no grid resolves three truncations"), f64::NAN);
            thresholds.push(f64::INFINITY);
            continue;
        };
        let curves: Vec<Curve> = smoothness
            .iter()
            .enumerate()
            .map(|(i, &s)| Curve { rho, s, size, values: rows.iter().map(|r| r[i]).collect() })
            .collect();
        for c in &curves {
            let name = curve_name(rho, c.s, size);
            rec.info(SWEEP, format!("{name} growth"), c.growth());
            rec.info(SWEEP, format!("{name} spread"), c.spread());
            rec.info(SWEEP, format!("{name} growing"), if c.growing() { 1.0 } else { 0.0 });
            if c.s >= POSITIVE_S {
                rec.check(POSITIVE_SMOOTHNESS, format!("{name} spread"), c.spread(), c.stable());
            }
        }
        let threshold = (0..curves.len())
            .find(|&i| curves[i..].iter().all(Curve::stable))
            .map_or(f64::INFINITY, |i| curves[i].s);
        rec.info(THRESHOLD, format!("rho={rho} stability threshold"), threshold);
        thresholds.push(threshold);
    }
    let monotone = thresholds.windows(2).all(|w| w[1] <= w[0]);
    let first = thresholds.first().copied().unwrap_or(f64::NAN);
    let last = thresholds.last().copied().unwrap_or(f64::NAN);
    rec.check(THRESHOLD, "threshold non-increasing in zero order", first - last, monotone);

    let (coarse, top) = grids
        .iter()
        .find_map(|&g| levels.iter().rev().find(|&&j| cfg.symbol.ching_at(g, j).is_ok()).map(|&j| (g, j)))
        .ok_or_else(|| RunError::Config("no truncation fits any grid".into()))?;
    for &rho in &rhos {
        let a = family_with(cfg, rho)?.ching_at(coarse, top)?;
        let fit = fit_tdc_exponent(&a, LocalizationCutoff, [0, 0])?;
        let name = format!("rho={rho} N={} J={top}", coarse.size());
        rec.info(TDC_FIT, format!("{name} sigma_hat"), fit.sigma_hat);
        rec.info(TDC_FIT, format!("{name} residual"), fit.residual);
    }

    let mut anchors = vec![SWEEP.to_string(), THRESHOLD.into(), TDC_FIT.into()];
    if smoothness.iter().any(|&s| s >= POSITIVE_S) {
        anchors.push(POSITIVE_SMOOTHNESS.into());
    }
    Ok(anchors)
}
