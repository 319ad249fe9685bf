use std::path::Path;

use serde::{Deserialize, Serialize};

use paradiff_core::spaces::NormSpec;
use paradiff_core::symbols::{
    bessel_potential, ching_symbol, identity_symbol, multiplier_symbol, random_symbol, BumpProfile,
    ProfileShape, SymbolClass,
};
use paradiff_core::{DiscreteSymbol, Freq, LPPartition, ModulationFunction, TorusGrid};
use rand::Rng;

use crate::error::{RunError, RunResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Boundedness,
    Ching,
    Modulation,
    Inequalities,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Self::Boundedness => "boundedness",
            Self::Ching => "ching",
            Self::Modulation => "modulation",
            Self::Inequalities => "inequalities",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiConfig {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
}

impl PsiConfig {
    pub fn build(&self) -> RunResult<ModulationFunction> {
        Ok(ModulationFunction::new(self.r, self.big_r)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(default)]
    pub h: Option<u32>,
}

fn default_theta() -> Freq {
    [1, 0]
}

fn default_shape() -> ProfileShape {
    ProfileShape::Bump { zero_order: 0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolFamily {
    Zero,
    Identity,
    Bessel {
        d: f64,
    },
    /// `corpus_size` random symbols of the given order and ξ-band.
    Random {
        order: f64,
        x_band: f64,
    },
    /// Ching symbol truncated at `levels` unless a scenario sweeps truncations.
    Ching {
        d: f64,
        #[serde(default = "default_theta")]
        theta: Freq,
        #[serde(default = "default_shape")]
        shape: ProfileShape,
        levels: u32,
    },
}

impl SymbolFamily {
    /// Builds the family on `grid`; random families draw from `rng`.
    pub fn build<R: Rng + ?Sized>(&self, grid: TorusGrid, rng: &mut R) -> RunResult<DiscreteSymbol> {
        Ok(match *self {
            Self::Zero => multiplier_symbol(grid, 0.0, SymbolClass::S10, |_| Default::default()),
            Self::Identity => identity_symbol(grid),
            Self::Bessel { d } => bessel_potential(grid, d),
            Self::Random { order, x_band } => random_symbol(grid, order, x_band, rng)?,
            Self::Ching { d, theta, shape, levels } => {
                ching_symbol(grid, d, BumpProfile::new(theta, shape), levels)?
            }
        })
    }

    /// Ching family truncated at `levels` instead of its own truncation.
    pub fn ching_at(&self, grid: TorusGrid, levels: u32) -> RunResult<DiscreteSymbol> {
        match *self {
            Self::Ching { d, theta, shape, .. } => Ok(ching_symbol(grid, d, BumpProfile::new(theta, shape), levels)?),
            _ => Err(RunError::Config("truncation sweeps need a ching symbol family".into())),
        }
    }

    pub fn order(&self) -> f64 {
        match *self {
            Self::Zero | Self::Identity => 0.0,
            Self::Bessel { d } | Self::Ching { d, .. } => d,
            Self::Random { order, .. } => order,
        }
    }

    /// Whether every member satisfies the twisted diagonal condition, and
    /// with which constant.
    pub fn twisted_diagonal_constant(&self) -> Option<f64> {
        match *self {
            Self::Zero | Self::Identity | Self::Bessel { .. } => Some(1.0),
            Self::Ching { shape: ProfileShape::Ring { inner }, .. } if inner > 0.0 => Some(1.25 / inner),
            _ => None,
        }
    }
}

fn default_corpus() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: Option<Scenario>,
    pub grid: GridConfig,
    /// Points per axis for refinement sweeps; empty means just `grid.N`.
    #[serde(default)]
    pub refinements: Vec<usize>,
    pub partition: PartitionConfig,
    pub symbol: SymbolFamily,
    #[serde(default)]
    pub norms: Vec<NormSpec>,
    #[serde(default)]
    pub modulation: Vec<PsiConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_corpus")]
    pub corpus_size: usize,
    /// Ching truncations `J` for sweeps.
    #[serde(default)]
    pub levels: Vec<u32>,
    /// Orders of vanishing of the Ching profile at θ.
    #[serde(default)]
    pub zero_orders: Vec<u32>,
    /// Source smoothness values for H^s sweeps.
    #[serde(default)]
    pub smoothness: Vec<f64>,
    #[serde(default)]
    pub max_matrix_dim: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> RunResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn grids(&self) -> RunResult<Vec<TorusGrid>> {
        let sizes = if self.refinements.is_empty() { vec![self.grid.size] } else { self.refinements.clone() };
        sizes.into_iter().map(|n| Ok(TorusGrid::new(self.grid.n, n)?)).collect()
    }

    pub fn base_grid(&self) -> RunResult<TorusGrid> {
        Ok(TorusGrid::new(self.grid.n, self.grid.size)?)
    }

    pub fn psi(&self) -> RunResult<ModulationFunction> {
        Ok(ModulationFunction::new(self.partition.r, self.partition.big_r)?)
    }

    pub fn partition(&self, grid: TorusGrid) -> RunResult<LPPartition> {
        let part = LPPartition::new(self.psi()?, grid)?;
        Ok(match self.partition.h {
            Some(h) => part.with_gap(h)?,
            None => part,
        })
    }

    pub fn modulation_functions(&self) -> RunResult<Vec<ModulationFunction>> {
        self.modulation.iter().map(PsiConfig::build).collect()
    }

    /// Checks every module precondition the scenario will rely on.
    pub fn validate(&self, scenario: Scenario) -> RunResult<()> {
        if let Some(own) = self.scenario {
            if own != scenario {
                return Err(RunError::Config(format!(
                    "config is for scenario {}, asked to run {}",
                    own.name(),
                    scenario.name()
                )));
            }
        }
        for grid in self.grids()? {
            self.partition(grid)?;
        }
        self.base_grid()?;
        for spec in &self.norms {
            spec.validate()?;
        }
        if self.corpus_size == 0 {
            return Err(RunError::Config("corpus_size must be positive".into()));
        }
        let bad_smoothness = self.smoothness.iter().any(|s| !s.is_finite());
        if bad_smoothness {
            return Err(RunError::Config("smoothness values must be finite".into()));
        }
        match scenario {
            Scenario::Boundedness => {
                if self.norms.is_empty() {
                    return Err(RunError::Config("boundedness sweep needs at least one norm spec".into()));
                }
            }
            Scenario::Ching => {
                if !matches!(self.symbol, SymbolFamily::Ching { .. }) {
                    return Err(RunError::Config("ching study needs a ching symbol family".into()));
                }
                if self.zero_orders.is_empty() || self.smoothness.is_empty() || self.levels.len() < 3 {
                    return Err(RunError::Config(
                        "ching study needs zero_orders, smoothness and at least three levels".into(),
                    ));
                }
            }
            Scenario::Modulation => {
                let psis = self.modulation_functions()?;
                let mut radii: Vec<(f64, f64)> = psis.iter().map(|p| (p.r(), p.big_r())).collect();
                radii.sort_by(|a, b| a.partial_cmp(b).expect("radii are finite"));
                radii.dedup();
                if radii.len() < 3 {
                    return Err(RunError::Config("modulation study needs three distinct (r, R)".into()));
                }
            }
            Scenario::Inequalities => {
                if self.grid.n != 1 {
                    return Err(RunError::Config("the inequality suite runs on n = 1 grids".into()));
                }
            }
        }
        if matches!(self.symbol, SymbolFamily::Ching { .. }) && !self.levels.is_empty() {
            let feasible = self.grids()?.into_iter().any(|g| {
                self.levels.iter().any(|&j| self.symbol.ching_at(g, j).is_ok())
            });
            if !feasible {
                return Err(RunError::Config("no (N, J) pair of the sweep fits its grid".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "grid": {"n": 1, "N": 128},
            "partition": {"r": 1.0, "R": 2.0},
            "symbol": {"family": "identity"},
            "norms": [{"scale": "F", "s": 0.0, "p": 2.0, "q": 2.0}]
        })
    }

    #[test]
    fn parses_and_validates() {
        let cfg: ExperimentConfig = serde_json::from_value(base()).unwrap();
        assert_eq!(cfg.corpus_size, 16);
        cfg.validate(Scenario::Boundedness).unwrap();
        assert!(cfg.validate(Scenario::Modulation).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut v = base();
        v["grid"]["N"] = 100.into();
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate(Scenario::Boundedness).is_err());
        let mut v = base();
        v["extra"] = 1.into();
        assert!(serde_json::from_value::<ExperimentConfig>(v).is_err());
        let mut v = base();
        v["scenario"] = "ching".into();
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert!(matches!(cfg.validate(Scenario::Boundedness), Err(RunError::Config(_))));
    }

    #[test]
    fn ching_family_round_trip() {
        let fam: SymbolFamily = serde_json::from_value(serde_json::json!({
            "family": "ching", "d": 0.0, "levels": 4, "shape": {"kind": "ring", "inner": 0.2}
        }))
        .unwrap();
        assert_eq!(fam.twisted_diagonal_constant(), Some(6.25));
        let g = TorusGrid::new(1, 64).unwrap();
        assert!(fam.ching_at(g, 4).is_ok());
        assert!(fam.ching_at(g, 5).is_err());
    }
}
