//! Discrete symbols `a(x, η)` sampled on grid × lattice.
//!
//! A symbol is stored through its partial Fourier transform in `x`: for every
//! lattice frequency `η` the column `â(·, η)` holds the `ξ`-spectrum of
//! `x ↦ a(x, η)` in the same normalization as [`SpectralField`](crate::torus::SpectralField). Band
//! operations, localizations and operator application are all column-wise
//! products on this representation. One-dimensional symbols are stored
//! densely; two-dimensional symbols evaluate columns lazily.

mod families;
mod twisted;

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lp::LPPartition;
use crate::torus::{freq_norm, Freq, TorusGrid};

pub use families::{
    bessel_potential, ching_symbol, identity_symbol, modulation_symbol, multiplier_symbol,
    random_symbol, BumpProfile, ProfileShape,
};
pub use twisted::{
    fit_tdc_exponent, localize, tdc_seminorm, twisted_diagonal_check, LocalizationCutoff,
    TdcFit, TdcReport, TDC_EPSILONS,
};

/// Deepest derivative (`|α| + |β|`) the seminorm estimators support.
pub const MAX_DERIVATIVE_DEPTH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolClass {
    S11,
    S10,
    SmoothedMultiplier,
    Ching,
    Custom,
}

type ColumnFn = dyn Fn(usize) -> Vec<Complex64> + Send + Sync;

#[derive(Clone)]
enum Storage {
    /// Columns stored back to back: `data[eta * len + xi]`.
    Dense(Arc<Vec<Complex64>>),
    Lazy(Arc<ColumnFn>),
}

#[derive(Clone)]
pub struct DiscreteSymbol {
    grid: TorusGrid,
    order: f64,
    class: SymbolClass,
    x_band: f64,
    storage: Storage,
}

impl fmt::Debug for DiscreteSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteSymbol")
            .field("grid", &self.grid)
            .field("order", &self.order)
            .field("class", &self.class)
            .field("x_band", &self.x_band)
            .field("dense", &matches!(self.storage, Storage::Dense(_)))
            .finish()
    }
}

impl DiscreteSymbol {
    /// Builds a symbol from its `ξ`-spectrum columns. `x_band` is an upper
    /// bound for `|ξ|` over the nonzero entries.
    pub fn from_spectrum_fn(
        grid: TorusGrid,
        order: f64,
        class: SymbolClass,
        x_band: f64,
        column: impl Fn(usize) -> Vec<Complex64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if x_band > grid.max_freq_norm() {
            return Err(LabError::InvalidInput(format!(
                "x-band {x_band} exceeds the lattice"
            )));
        }
        let storage = if grid.dim() == 1 {
            let len = grid.len();
            let mut data = Vec::with_capacity(len * len);
            for eta in 0..len {
                let col = column(eta);
                debug_assert_eq!(col.len(), len);
                data.extend(col);
            }
            Storage::Dense(Arc::new(data))
        } else {
            Storage::Lazy(Arc::new(column))
        };
        Ok(Self { grid, order, class, x_band, storage })
    }

    /// Builds a symbol from pointwise samples `a(x, η)`.
    pub fn from_x_fn(
        grid: TorusGrid,
        order: f64,
        class: SymbolClass,
        a: impl Fn([f64; 2], Freq) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let column = move |eta: usize| {
            let f = grid.freq(eta);
            let xs: Vec<_> = (0..grid.len()).map(|x| a(grid.point(x), f)).collect();
            grid.forward(&xs)
        };
        let mut s = Self::from_spectrum_fn(grid, order, class, grid.max_freq_norm(), column)?;
        if grid.dim() == 1 {
            s.x_band = s.measured_x_band();
        }
        Ok(s)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn class(&self) -> SymbolClass {
        self.class
    }

    /// Recorded bound on the `ξ`-support radius.
    pub fn x_band(&self) -> f64 {
        self.x_band
    }

    /// Replaces the recorded x-band by the measured one.
    pub fn tightened(mut self) -> Self {
        self.x_band = self.measured_x_band();
        self
    }

    pub fn with_order(mut self, order: f64) -> Self {
        self.order = order;
        self
    }

    pub fn with_class(mut self, class: SymbolClass) -> Self {
        self.class = class;
        self
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// `â(·, η)` for the lattice index `eta`.
    pub fn spectrum_column(&self, eta: usize) -> Cow<'_, [Complex64]> {
        match &self.storage {
            Storage::Dense(d) => {
                let len = self.grid.len();
                Cow::Borrowed(&d[eta * len..(eta + 1) * len])
            }
            Storage::Lazy(f) => Cow::Owned(f(eta)),
        }
    }

    /// Samples `x ↦ a(x, η)` for the lattice index `eta`.
    pub fn x_column(&self, eta: usize) -> Vec<Complex64> {
        self.grid.inverse(&self.spectrum_column(eta))
    }

    /// `a(x, η)` at grid point index `x`.
    pub fn value(&self, x: usize, eta: usize) -> Complex64 {
        self.x_column(eta)[x]
    }

    /// New symbol with `â(ξ, η)` replaced by `f(ξ, η, â(ξ, η))`.
    pub fn map_spectrum(
        &self,
        x_band: f64,
        f: impl Fn(Freq, Freq, Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        let grid = self.grid;
        let apply = move |eta: usize, col: &[Complex64]| -> Vec<Complex64> {
            let ef = grid.freq(eta);
            col.iter()
                .enumerate()
                .map(|(xi, &c)| if c == Complex64::default() { c } else { f(grid.freq(xi), ef, c) })
                .collect()
        };
        let storage = match &self.storage {
            Storage::Dense(d) => {
                let len = grid.len();
                let data = (0..len)
                    .flat_map(|eta| apply(eta, &d[eta * len..(eta + 1) * len]))
                    .collect();
                Storage::Dense(Arc::new(data))
            }
            Storage::Lazy(inner) => {
                let inner = inner.clone();
                Storage::Lazy(Arc::new(move |eta| apply(eta, &inner(eta))))
            }
        };
        Self { storage, x_band: x_band.min(self.x_band), ..self.clone() }
    }

    /// Pointwise combination `f(a(x,η), b(x,η))` computed on spectra, valid
    /// for linear `f` such as sums and differences.
    pub fn zip_linear(
        &self,
        other: &DiscreteSymbol,
        f: impl Fn(Complex64, Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let (a, b) = (self.clone(), other.clone());
        let x_band = self.x_band.max(other.x_band);
        let class = if self.class == other.class { self.class } else { SymbolClass::Custom };
        Self::from_spectrum_fn(self.grid, self.order.max(other.order), class, x_band, move |eta| {
            let ca = a.spectrum_column(eta);
            let cb = b.spectrum_column(eta);
            ca.iter().zip(cb.iter()).map(|(&p, &q)| f(p, q)).collect()
        })
    }

    pub fn sub(&self, other: &DiscreteSymbol) -> Result<Self> {
        self.zip_linear(other, |p, q| p - q)
    }

    pub fn add(&self, other: &DiscreteSymbol) -> Result<Self> {
        self.zip_linear(other, |p, q| p + q)
    }

    /// Forces dense storage.
    pub fn materialize(&self) -> Self {
        if self.is_dense() {
            return self.clone();
        }
        let len = self.grid.len();
        let data = (0..len).flat_map(|eta| self.spectrum_column(eta).into_owned()).collect();
        Self { storage: Storage::Dense(Arc::new(data)), ..self.clone() }
    }

    /// Largest `|ξ|` carrying a nonzero spectral entry.
    pub fn measured_x_band(&self) -> f64 {
        let threshold = 1e-13 * self.max_spectrum();
        let mut band: f64 = 0.0;
        for eta in 0..self.grid.len() {
            for (xi, c) in self.spectrum_column(eta).iter().enumerate() {
                if c.norm() > threshold {
                    band = band.max(self.grid.freq_norm_at(xi));
                }
            }
        }
        band
    }

    pub fn max_spectrum(&self) -> f64 {
        (0..self.grid.len())
            .flat_map(|eta| self.spectrum_column(eta).iter().map(|c| c.norm()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    /// True when every column is concentrated at `ξ = 0`.
    pub fn is_multiplier(&self) -> bool {
        let scale = self.max_spectrum();
        (0..self.grid.len()).all(|eta| {
            self.spectrum_column(eta)
                .iter()
                .skip(1)
                .all(|c| c.norm() <= 1e-13 * scale)
        })
    }

    /// `b(η)` for an x-independent symbol.
    pub fn multiplier_value(&self, eta: usize) -> Complex64 {
        self.spectrum_column(eta)[0]
    }

    /// Dense table of `a(x, η)` values, `table[x * len + eta]`.
    pub fn to_table(&self) -> SymbolTable {
        let len = self.grid.len();
        let mut values = vec![0.0; 2 * len * len];
        for eta in 0..len {
            for (x, v) in self.x_column(eta).into_iter().enumerate() {
                values[2 * (x * len + eta)] = v.re;
                values[2 * (x * len + eta) + 1] = v.im;
            }
        }
        SymbolTable { n: self.grid.dim(), size: self.grid.size(), d: self.order, values }
    }

    pub fn from_table(table: &SymbolTable) -> Result<Self> {
        let grid = TorusGrid::new(table.n, table.size)?;
        let len = grid.len();
        if table.values.len() != 2 * len * len {
            return Err(LabError::InvalidInput(format!(
                "symbol table needs {} numbers, got {}",
                2 * len * len,
                table.values.len()
            )));
        }
        let values = Arc::new(table.values.clone());
        let mut s = Self::from_spectrum_fn(
            grid,
            table.d,
            SymbolClass::Custom,
            grid.max_freq_norm(),
            move |eta| {
                let xs: Vec<_> = (0..len)
                    .map(|x| Complex64::new(values[2 * (x * len + eta)], values[2 * (x * len + eta) + 1]))
                    .collect();
                grid.forward(&xs)
            },
        )?;
        s.x_band = s.measured_x_band();
        Ok(s)
    }
}

/// JSON table for custom symbols: `a(x, η)` interleaved re/im at
/// `2·(x·L + η)`, with `L` lattice points and `η` in FFT index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolTable {
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
    pub d: f64,
    pub values: Vec<f64>,
}

/// Partial Fourier transform `â(ξ, η)` on the full lattice pair.
#[derive(Clone, Debug)]
pub struct PartialTransform {
    grid: TorusGrid,
    data: Vec<Complex64>,
}

impl PartialTransform {
    pub fn get(&self, xi: Freq, eta: Freq) -> Complex64 {
        match (self.grid.index_of(xi), self.grid.index_of(eta)) {
            (Some(i), Some(j)) => self.data[j * self.grid.len() + i],
            _ => Complex64::default(),
        }
    }

    /// Iterates `(ξ, η, â)` over all lattice pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Freq, Freq, Complex64)> + '_ {
        let len = self.grid.len();
        self.data
            .iter()
            .enumerate()
            .map(move |(k, &c)| (self.grid.freq(k % len), self.grid.freq(k / len), c))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Column-wise Fourier transform in `x` for every `η`.
pub fn partial_ft(a: &DiscreteSymbol) -> PartialTransform {
    let len = a.grid.len();
    let data = (0..len).flat_map(|eta| a.spectrum_column(eta).into_owned()).collect();
    PartialTransform { grid: a.grid, data }
}

/// `φ(2^{-k}D_x)a` (or `ψ(2^{-k}D_x)a` when `cumulative`).
pub fn symbol_band(
    a: &DiscreteSymbol,
    k: i64,
    part: &LPPartition,
    cumulative: bool,
) -> Result<DiscreteSymbol> {
    a.grid.check_same(&part.grid())?;
    if k > part.j_max() as i64 {
        return Err(LabError::LevelOutOfRange { level: k, range: format!("..={}", part.j_max()) });
    }
    let p = *part;
    let band = if k < 0 { 0.0 } else { part.psi().big_r() * 2f64.powi(k as i32) };
    Ok(a.map_spectrum(band, move |xi, _, c| {
        let t = freq_norm(xi);
        let m = if cumulative { p.cumulative_multiplier(k, t) } else { p.block_multiplier(k, t) };
        c * m
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolSeminorm {
    pub alpha: [u32; 2],
    pub beta: [u32; 2],
    pub value: f64,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Weights of the `α`-fold centered difference `((f(·+1) − f(·−1))/2)^α`
/// along one axis, as `(offset, weight)` pairs.
pub(crate) fn centered_stencil(order: u32) -> Vec<(i64, f64)> {
    let scale = 2f64.powi(-(order as i32));
    (0..=order)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            (order as i64 - 2 * m as i64, sign * binomial(order, m) * scale)
        })
        .collect()
}

/// Tensor stencil for a multi-index `α` on the lattice of `grid`.
pub(crate) fn difference_stencil(grid: &TorusGrid, alpha: [u32; 2]) -> Vec<(Freq, f64)> {
    let s0 = centered_stencil(alpha[0]);
    let s1 = if grid.dim() == 2 { centered_stencil(alpha[1]) } else { vec![(0, 1.0)] };
    s0.iter()
        .flat_map(|&(o0, w0)| s1.iter().map(move |&(o1, w1)| ([o0, o1], w0 * w1)))
        .collect()
}

/// Evaluates `Δ^α_η` of per-column data at lattice index `eta`, or `None` when
/// the stencil leaves the lattice box.
pub(crate) fn apply_stencil(
    grid: &TorusGrid,
    stencil: &[(Freq, f64)],
    eta: usize,
    column: &mut dyn FnMut(usize) -> Vec<Complex64>,
) -> Option<Vec<Complex64>> {
    let f = grid.freq(eta);
    let mut acc = vec![Complex64::default(); grid.len()];
    for &(off, w) in stencil {
        let idx = grid.index_of([f[0] + off[0], f[1] + off[1]])?;
        for (a, v) in acc.iter_mut().zip(column(idx)) {
            *a += v * w;
        }
    }
    Some(acc)
}

pub(crate) fn check_depth(alpha: [u32; 2], beta: [u32; 2]) -> Result<()> {
    let depth = (alpha[0] + alpha[1] + beta[0] + beta[1]) as usize;
    if depth > MAX_DERIVATIVE_DEPTH {
        return Err(LabError::DepthUnsupported { depth });
    }
    Ok(())
}

/// `sup (1+|η|)^{−(d−|α|+|β|)} |D^α_η D^β_x a(x, η)|` over the lattice, with
/// `η`-derivatives by centered differences and `x`-derivatives spectrally.
pub fn estimate_seminorm(
    a: &DiscreteSymbol,
    alpha: [u32; 2],
    beta: [u32; 2],
) -> Result<SymbolSeminorm> {
    check_depth(alpha, beta)?;
    let grid = a.grid;
    let len = grid.len();
    let derived: Vec<Option<Vec<Complex64>>> = vec![None; len];
    let mut cache = derived;
    let mut column = |eta: usize| -> Vec<Complex64> {
        if cache[eta].is_none() {
            let spec = a.spectrum_column(eta);
            let weighted: Vec<_> = spec
                .iter()
                .enumerate()
                .map(|(xi, &c)| {
                    let f = grid.freq(xi);
                    c * (f[0] as f64).powi(beta[0] as i32) * (f[1] as f64).powi(beta[1] as i32)
                })
                .collect();
            cache[eta] = Some(grid.inverse(&weighted));
        }
        cache[eta].clone().expect("filled")
    };
    let stencil = difference_stencil(&grid, alpha);
    let shift = a.order - (alpha[0] + alpha[1]) as f64 + (beta[0] + beta[1]) as f64;
    let mut sup: f64 = 0.0;
    for eta in 0..len {
        if let Some(vals) = apply_stencil(&grid, &stencil, eta, &mut column) {
            let w = (1.0 + grid.freq_norm_at(eta)).powf(-shift);
            sup = sup.max(vals.iter().map(|v| v.norm()).fold(0.0, f64::max) * w);
        }
    }
    Ok(SymbolSeminorm { alpha, beta, value: sup })
}
