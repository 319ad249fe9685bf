//! Modulation functions and the Littlewood–Paley partitions built from them.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::torus::{SpectralField, TorusGrid};

fn flat(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// C^∞ step built from the `exp(−1/x)` mollifier: 1 for `s ≤ 0`, 0 for `s ≥ 1`,
/// strictly decreasing in between.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let a = flat(1.0 - s);
        a / (a + flat(s))
    }
}

/// Radial cutoff ψ with ψ = 1 on `|η| ≤ r` and ψ = 0 on `|η| ≥ R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationFunction {
    r: f64,
    #[serde(rename = "R")]
    big_r: f64,
}

impl ModulationFunction {
    pub fn new(r: f64, big_r: f64) -> Result<Self> {
        if !(r > 0.0 && big_r > r && big_r.is_finite()) {
            return Err(LabError::BadRadii { r, big_r });
        }
        Ok(Self { r, big_r })
    }

    /// Plateau radius.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Support radius.
    pub fn big_r(&self) -> f64 {
        self.big_r
    }

    /// ψ at a point of length `t`.
    pub fn eval(&self, t: f64) -> f64 {
        smooth_step((t - self.r) / (self.big_r - self.r))
    }

    /// ψ(2^{-k}·) at a point of length `t`; any integer `k`.
    pub fn eval_dilated(&self, t: f64, k: i64) -> f64 {
        self.eval(t * 2f64.powi(-k as i32))
    }

    /// Smallest `h ≥ 2` with `2R < r·2^h`.
    pub fn minimal_gap(&self) -> u32 {
        let mut h = 2;
        while 2.0 * self.big_r >= self.r * 2f64.powi(h) {
            h += 1;
        }
        h as u32
    }
}

/// Partition parameters as they appear in experiment headers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionParams {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub h: u32,
    pub j_max: u32,
}

/// `1 = ψ(η) + Σ_{j≥1} φ(2^{-j}η)` with `φ = ψ − ψ(2·)`, truncated at the finest
/// level the grid resolves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LPPartition {
    psi: ModulationFunction,
    grid: TorusGrid,
    h: u32,
    j_max: u32,
}

impl LPPartition {
    pub fn new(psi: ModulationFunction, grid: TorusGrid) -> Result<Self> {
        let nyquist = grid.nyquist() as f64;
        if psi.big_r() >= nyquist {
            return Err(LabError::GridTooCoarse(format!(
                "support radius {} >= nyquist {nyquist}",
                psi.big_r()
            )));
        }
        let mut j_max = 0;
        while psi.big_r() * 2f64.powi(j_max as i32 + 1) <= nyquist {
            j_max += 1;
        }
        Ok(Self { psi, grid, h: psi.minimal_gap(), j_max })
    }

    /// Raises the gap integer; values below the minimal admissible one are rejected.
    pub fn with_gap(mut self, h: u32) -> Result<Self> {
        if h < self.psi.minimal_gap() {
            return Err(LabError::InvalidInput(format!(
                "gap {h} violates h >= 2 and 2R < r 2^h"
            )));
        }
        self.h = h;
        Ok(self)
    }

    pub fn psi(&self) -> &ModulationFunction {
        &self.psi
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn params(&self) -> PartitionParams {
        PartitionParams { r: self.psi.r(), big_r: self.psi.big_r(), h: self.h, j_max: self.j_max }
    }

    /// `R_h = r/2 − R 2^{-h}`, inner radius factor of the paraproduct coronas.
    pub fn r_h(&self) -> f64 {
        self.psi.r() / 2.0 - self.psi.big_r() * 2f64.powi(-(self.h as i32))
    }

    /// Smallest `m` with `r 2^m` covering the whole lattice, where both
    /// modulation cutoffs are identically one.
    pub fn saturation_level(&self) -> u32 {
        saturation_level(&self.psi, &self.grid)
    }

    /// Multiplier of block `k`: ψ for `k = 0`, φ(2^{-k}·) for `k ≥ 1`, 0 for `k < 0`.
    pub fn block_multiplier(&self, k: i64, t: f64) -> f64 {
        match k {
            k if k < 0 => 0.0,
            0 => self.psi.eval(t),
            k => self.psi.eval_dilated(t, k) - self.psi.eval_dilated(t, k - 1),
        }
    }

    /// Multiplier ψ(2^{-k}·) of the partial sum up to level `k`; 0 for `k < 0`.
    pub fn cumulative_multiplier(&self, k: i64, t: f64) -> f64 {
        if k < 0 {
            0.0
        } else {
            self.psi.eval_dilated(t, k)
        }
    }

    fn check_level(&self, k: i64) -> Result<()> {
        if k > self.j_max as i64 {
            return Err(LabError::LevelOutOfRange {
                level: k,
                range: format!("..={}", self.j_max),
            });
        }
        Ok(())
    }

    /// `u_k = φ(2^{-k}D)u` (ψ(D)u for `k = 0`, zero for `k < 0`).
    pub fn dyadic_block(&self, u: &SpectralField, k: i64) -> Result<SpectralField> {
        self.grid.check_same(&u.grid())?;
        self.check_level(k)?;
        let grid = self.grid;
        Ok(u.map_coeffs(|i, c| c * self.block_multiplier(k, grid.freq_norm_at(i))))
    }

    /// `u^k = ψ(2^{-k}D)u`, zero for `k < 0`.
    pub fn cumulative_block(&self, u: &SpectralField, k: i64) -> Result<SpectralField> {
        self.grid.check_same(&u.grid())?;
        self.check_level(k)?;
        let grid = self.grid;
        Ok(u.map_coeffs(|i, c| c * self.cumulative_multiplier(k, grid.freq_norm_at(i))))
    }

    /// All blocks `u_0, …, u_{J_max}`.
    pub fn blocks(&self, u: &SpectralField) -> Result<Vec<SpectralField>> {
        (0..=self.j_max as i64).map(|k| self.dyadic_block(u, k)).collect()
    }

    /// Corona containing the spectrum of block `k`: `(inner, outer)`.
    pub fn block_corona(&self, k: i64) -> (f64, f64) {
        if k == 0 {
            (0.0, self.psi.big_r())
        } else {
            (self.psi.r() * 2f64.powi(k as i32 - 1), self.psi.big_r() * 2f64.powi(k as i32))
        }
    }
}

pub(crate) fn saturation_level(psi: &ModulationFunction, grid: &TorusGrid) -> u32 {
    let top = grid.max_freq_norm();
    let mut m = 0;
    while psi.r() * 2f64.powi(m as i32) < top {
        m += 1;
    }
    m
}
