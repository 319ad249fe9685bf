//! The four experiment scenarios. Each returns its metrics and tables and
//! declares the anchors it must cover.

use std::time::Instant;

use paradiff_core::spaces::{NormSpec, Scale};

use crate::config::{ExperimentConfig, Scenario};
use crate::error::RunResult;
use crate::record::{Recorder, ResultRecord, TableRow};

pub mod boundedness;
pub mod ching;
pub mod inequalities;
pub mod modulation;

/// Relative spread `max/min − 1` under which a ratio sequence counts as stable.
pub const STABLE_SPREAD: f64 = 0.2;
/// Smallest last/first factor reported as growth.
pub const GROWTH_FACTOR: f64 = 2.0;

pub fn run(cfg: &ExperimentConfig, scenario: Scenario) -> RunResult<ResultRecord> {
    cfg.validate(scenario)?;
    let start = Instant::now();
    let mut rec = Recorder::default();
    let anchors = match scenario {
        Scenario::Boundedness => boundedness::run(cfg, &mut rec)?,
        Scenario::Ching => ching::run(cfg, &mut rec)?,
        Scenario::Modulation => modulation::run(cfg, &mut rec)?,
        Scenario::Inequalities => inequalities::run(cfg, &mut rec)?,
    };
    let payload = rec.finish(&anchors)?;
    Ok(ResultRecord {
        scenario: scenario.name().into(),
        params: ExperimentConfig { scenario: Some(scenario), ..cfg.clone() },
        seed: cfg.seed,
        payload,
        wall_time_s: start.elapsed().as_secs_f64(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
    })
}

pub(crate) fn spec_label(spec: &NormSpec) -> String {
    let scale = match spec.scale {
        Scale::B => "B",
        Scale::F => "F",
    };
    format!("{scale}(s={},p={},q={})", spec.s, spec.p, spec.q)
}

pub(crate) fn row(spec: &NormSpec, size: usize, value: f64) -> TableRow {
    let scale = match spec.scale {
        Scale::B => "B",
        Scale::F => "F",
    };
    TableRow { scale: scale.into(), s: spec.s, p: spec.p, q: spec.q, size, value }
}

/// `max/min − 1` over a nonempty sequence of positive values.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min - 1.0
}

/// Strictly increasing over at least three values.
pub fn monotone_growth(values: &[f64]) -> bool {
    values.len() >= 3 && values.windows(2).all(|w| w[1] > w[0])
}
