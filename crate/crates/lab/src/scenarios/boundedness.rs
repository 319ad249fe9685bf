//! Operator-norm lower bounds over a grid of `(s, p, q)` and refinements.

use paradiff_core::spaces::NormSpec;
use paradiff_core::symbols::BumpProfile;
use paradiff_core::{LabError, TorusGrid};
use rayon::prelude::*;

use super::{monotone_growth, row, spec_label, spread, STABLE_SPREAD};
use crate::config::{ExperimentConfig, SymbolFamily};
use crate::corpus::{input_corpus, stream_rng, Stream};
use crate::error::RunResult;
use crate::opnorm::operator_ratio;
use crate::record::{Recorder, Table};

pub const SWEEP: &str = "boundedness/sweep";
pub const IDENTITY: &str = "boundedness/identity";
pub const POSITIVE_SMOOTHNESS: &str = "boundedness/positive-smoothness";
pub const SMALL_P: &str = "boundedness/small-p";
pub const TWISTED_DIAGONAL: &str = "boundedness/twisted-diagonal";
pub const UNCOVERED: &str = "boundedness/outside-covered-region";
pub const CHING_GROWTH: &str = "unboundedness/ching";

/// Which boundedness statement covers `spec` for this family, if any.
pub fn region(spec: &NormSpec, dim: usize, family: &SymbolFamily) -> &'static str {
    let n = dim as f64;
    if spec.s > (n / spec.p - n).max(0.0) {
        if spec.p <= 1.0 {
            SMALL_P
        } else {
            POSITIVE_SMOOTHNESS
        }
    } else if family.twisted_diagonal_constant().is_some() {
        TWISTED_DIAGONAL
    } else {
        UNCOVERED
    }
}

fn ching_nonvanishing(family: &SymbolFamily) -> bool {
    match family {
        SymbolFamily::Ching { theta, shape, .. } => BumpProfile::new(*theta, *shape).value_at_theta() > 0.0,
        _ => false,
    }
}

fn sweep_levels(cfg: &ExperimentConfig) -> Vec<Option<u32>> {
    if matches!(cfg.symbol, SymbolFamily::Ching { .. }) && !cfg.levels.is_empty() {
        let mut levels = cfg.levels.clone();
        levels.sort_unstable();
        levels.dedup();
        levels.into_iter().map(Some).collect()
    } else {
        vec![None]
    }
}

fn expects_growth(cfg: &ExperimentConfig, spec: &NormSpec) -> bool {
    ching_nonvanishing(&cfg.symbol) && spec.s <= 0.0 && cfg.levels.len() >= 3
}

pub fn declared_anchors(cfg: &ExperimentConfig) -> Vec<String> {
    let mut a = vec![SWEEP.to_string()];
    for spec in &cfg.norms {
        a.push(region(spec, cfg.grid.n, &cfg.symbol).into());
        if expects_growth(cfg, spec) {
            a.push(CHING_GROWTH.into());
        }
    }
    if cfg.symbol == SymbolFamily::Identity {
        a.push(IDENTITY.into());
    }
    a.sort();
    a.dedup();
    a
}

struct Point {
    size: usize,
    level: Option<u32>,
    /// One ratio per norm spec; `None` when the truncation does not fit.
    ratios: Option<Vec<f64>>,
}

fn evaluate(cfg: &ExperimentConfig, grid: TorusGrid, level: Option<u32>) -> RunResult<Option<Vec<f64>>> {
    let part = cfg.partition(grid)?;
    let a = match level {
        Some(j) => match cfg.symbol.ching_at(grid, j) {
            Ok(a) => a,
            Err(crate::RunError::Core(LabError::GridTooCoarse(_))) => return Ok(None),
            Err(e) => return Err(e),
        },
        None => cfg.symbol.build(grid, &mut stream_rng(cfg.seed, Stream::Symbols, 0))?,
    };
    let nyq = grid.nyquist() as f64;
    let corpus = input_corpus(grid, cfg.seed, cfg.corpus_size, 1.0, nyq / 2.0);
    let ratios = cfg
        .norms
        .iter()
        .map(|spec| operator_ratio(&a, spec, &part, &corpus, cfg.seed))
        .collect::<RunResult<Vec<_>>>()?;
    Ok(Some(ratios))
}

fn point_label(size: usize, level: Option<u32>) -> String {
    match level {
        Some(j) => format!("N={size} J={j}"),
        None => format!("N={size}"),
    }
}

pub fn run(cfg: &ExperimentConfig, rec: &mut Recorder) -> RunResult<Vec<String>> {
    let grids = cfg.grids()?;
    let levels = sweep_levels(cfg);
    let jobs: Vec<(TorusGrid, Option<u32>)> =
        grids.iter().flat_map(|&g| levels.iter().map(move |&l| (g, l))).collect();
    let points = jobs
        .par_iter()
        .map(|&(g, l)| Ok(Point { size: g.size(), level: l, ratios: evaluate(cfg, g, l)? }))
        .collect::<RunResult<Vec<_>>>()?;

    for &level in &levels {
        let name = match level {
            Some(j) => format!("boundedness_J{j}"),
            None => "boundedness".into(),
        };
        let mut table = Table::new(name);
        for p in points.iter().filter(|p| p.level == level) {
            if let Some(r) = &p.ratios {
                for (spec, &v) in cfg.norms.iter().zip(r) {
                    table.rows.push(row(spec, p.size, v));
                }
            }
        }
        rec.table(table);
    }

    for (i, spec) in cfg.norms.iter().enumerate() {
        let label = spec_label(spec);
        let mut values = Vec::new();
        for p in &points {
            match &p.ratios {
                Some(r) => {
                    values.push(r[i]);
                    rec.info(SWEEP, format!("{label} {}", point_label(p.size, p.level)), r[i]);
                }
                None => rec.info(SWEEP, format!("{label} {} does not fit", point_label(p.size, p.level)), f64::NAN),
            }
        }
        if values.is_empty() {
            continue;
        }
        if cfg.symbol == SymbolFamily::Identity {
            let worst = values.iter().cloned().fold(0.0, f64::max);
            rec.check(IDENTITY, format!("{label} max ratio"), worst, worst <= 1.0 + 1e-6);
        }
        let anchor = region(spec, cfg.grid.n, &cfg.symbol);
        let sp = spread(&values);
        if anchor == UNCOVERED {
            rec.info(anchor, format!("{label} spread"), sp);
        } else {
            rec.check(anchor, format!("{label} spread"), sp, sp < STABLE_SPREAD);
        }
        if expects_growth(cfg, spec) {
            // finest grid that resolves at least three truncations
            let best = grids.iter().rev().find_map(|g| {
                let series: Vec<f64> = points
                    .iter()
                    .filter(|p| p.size == g.size())
                    .filter_map(|p| p.ratios.as_ref().map(|r| r[i]))
                    .collect();
                (series.len() >= 3).then_some((g.size(), series))
            });
            if let Some((size, series)) = best {
                let factor = series[series.len() - 1] / series[0];
                rec.info(CHING_GROWTH, format!("{label} N={size} growth factor"), factor);
                rec.check(CHING_GROWTH, format!("{label} N={size} monotone growth"), factor, monotone_growth(&series));
            }
        }
    }
    Ok(declared_anchors(cfg))
}
