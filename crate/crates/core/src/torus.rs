//! Periodic grids on `[0, 2π)ⁿ`, their integer frequency lattices, and
//! fields kept in sync with their discrete Fourier coefficients.
//!
//! Normalization: `coeffs[k] = N⁻ⁿ Σ_x values[x] e^{-ik·x}`, so the zero
//! frequency coefficient is the mean value and `values[x] = Σ_k coeffs[k] e^{ik·x}`.
//! Lattice indices are in FFT order along every axis: index `i` carries the
//! frequency `i` for `i < N/2` and `i − N` otherwise; multi-dimensional
//! indices are row-major.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};

/// A lattice frequency. The second component is zero on one-dimensional grids.
pub type Freq = [i64; 2];

/// Euclidean length of a lattice frequency.
pub fn freq_norm(f: Freq) -> f64 {
    ((f[0] * f[0] + f[1] * f[1]) as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    size: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, size: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(LabError::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if size < 16 || !size.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!(
                "{size} points per axis is not a power of two >= 16"
            )));
        }
        Ok(Self { dim, size })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Total number of grid points (equal to the number of lattice frequencies).
    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nyquist(&self) -> usize {
        self.size / 2
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.size as f64
    }

    /// Largest frequency length on the lattice (the box corner).
    pub fn max_freq_norm(&self) -> f64 {
        self.nyquist() as f64 * (self.dim as f64).sqrt()
    }

    fn axis_freq(&self, i: usize) -> i64 {
        if i < self.size / 2 {
            i as i64
        } else {
            i as i64 - self.size as i64
        }
    }

    fn axis_index(&self, f: i64) -> usize {
        f.rem_euclid(self.size as i64) as usize
    }

    /// Frequency carried by a lattice index.
    pub fn freq(&self, idx: usize) -> Freq {
        match self.dim {
            1 => [self.axis_freq(idx), 0],
            _ => [self.axis_freq(idx / self.size), self.axis_freq(idx % self.size)],
        }
    }

    pub fn freq_norm_at(&self, idx: usize) -> f64 {
        freq_norm(self.freq(idx))
    }

    /// Index of `f` if it lies in the box `[−N/2, N/2)ⁿ`.
    pub fn index_of(&self, f: Freq) -> Option<usize> {
        let half = self.nyquist() as i64;
        let inside = |c: i64| (-half..half).contains(&c);
        match self.dim {
            1 if inside(f[0]) && f[1] == 0 => Some(self.axis_index(f[0])),
            2 if inside(f[0]) && inside(f[1]) => {
                Some(self.axis_index(f[0]) * self.size + self.axis_index(f[1]))
            }
            _ => None,
        }
    }

    /// Index of `f` reduced modulo the lattice period.
    pub fn wrap_index(&self, f: Freq) -> usize {
        match self.dim {
            1 => self.axis_index(f[0]),
            _ => self.axis_index(f[0]) * self.size + self.axis_index(f[1]),
        }
    }

    /// Grid point coordinates for a point index.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.dim {
            1 => [idx as f64 * h, 0.0],
            _ => [(idx / self.size) as f64 * h, (idx % self.size) as f64 * h],
        }
    }

    /// Torus distance from the origin of the grid offset with index `idx`.
    pub fn torus_norm(&self, idx: usize) -> f64 {
        let f = self.freq(idx);
        freq_norm(f) * self.spacing()
    }

    /// Index of the point `x − y` for point indices `x`, `y`.
    pub fn sub_points(&self, x: usize, y: usize) -> usize {
        let n = self.size;
        match self.dim {
            1 => (x + n - y) % n,
            _ => {
                let (x0, x1) = (x / n, x % n);
                let (y0, y1) = (y / n, y % n);
                ((x0 + n - y0) % n) * n + (x1 + n - y1) % n
            }
        }
    }

    pub fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(LabError::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }

    /// Coefficients of `values` (forward, normalized).
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        fft_nd(self, &mut buf, false);
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Values synthesized from `coeffs` (inverse, unnormalized).
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        fft_nd(self, &mut buf, true);
        buf
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

fn fft_nd(grid: &TorusGrid, buf: &mut [Complex64], inverse: bool) {
    let n = grid.size();
    let fft = plan(n, inverse);
    match grid.dim() {
        1 => fft.process(buf),
        _ => {
            // rows, then columns through a scratch line
            fft.process(buf);
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            for col in 0..n {
                for row in 0..n {
                    line[row] = buf[row * n + col];
                }
                fft.process(&mut line);
                for row in 0..n {
                    buf[row * n + col] = line[row];
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Recompute the coefficients from the values.
    Forward,
    /// Recompute the values from the coefficients.
    Inverse,
}

/// Relative support threshold used whenever none is given.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-10;

/// A complex grid function together with its Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    values: Vec<Complex64>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, values: z.clone(), coeffs: z }
    }

    pub fn from_values(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidInput(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        let coeffs = grid.forward(&values);
        Ok(Self { grid, values, coeffs })
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(LabError::InvalidInput(format!(
                "{} coefficients for a lattice of {} frequencies",
                coeffs.len(),
                grid.len()
            )));
        }
        let values = grid.inverse(&coeffs);
        Ok(Self { grid, values, coeffs })
    }

    /// Trigonometric polynomial with the given (frequency, coefficient) pairs.
    pub fn from_modes(grid: TorusGrid, modes: &[(Freq, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        for &(f, c) in modes {
            let idx = grid.index_of(f).ok_or_else(|| {
                LabError::InvalidInput(format!("frequency {f:?} outside the lattice"))
            })?;
            coeffs[idx] += c;
        }
        Self::from_coeffs(grid, coeffs)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, f: Freq) -> Complex64 {
        self.grid
            .index_of(f)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Restores the coefficient/value consistency from one side.
    pub fn transform(self, direction: Direction) -> Self {
        match direction {
            Direction::Forward => {
                let coeffs = self.grid.forward(&self.values);
                Self { coeffs, ..self }
            }
            Direction::Inverse => {
                let values = self.grid.inverse(&self.coeffs);
                Self { values, ..self }
            }
        }
    }

    /// Multiplies every coefficient by `m(index)`.
    pub fn map_coeffs(&self, mut m: impl FnMut(usize, Complex64) -> Complex64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, &c)| m(i, c)).collect();
        Self::from_coeffs(self.grid, coeffs).expect("same lattice")
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Frequency support relative to the largest coefficient modulus.
    pub fn support(&self) -> FreqSet {
        self.support_above(DEFAULT_SUPPORT_THRESHOLD * self.max_coeff())
    }

    /// Frequencies whose coefficient modulus exceeds the absolute `threshold`.
    pub fn support_above(&self, threshold: f64) -> FreqSet {
        let points = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > threshold)
            .map(|(i, _)| self.grid.freq(i))
            .collect();
        FreqSet { dim: self.grid.dim(), points }
    }

    /// Largest frequency length carrying a coefficient above the default threshold.
    pub fn bandwidth(&self) -> f64 {
        self.support().max_norm()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, values, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
            coeffs: self.coeffs.iter().map(|v| v * s).collect(),
        }
    }

    /// `max_x |self(x) − other(x)|`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Circular shift by `shift` grid points: `result(x) = self(x − shift)`.
    pub fn translate(&self, shift: usize) -> Self {
        let values = (0..self.grid.len())
            .map(|x| self.values[self.grid.sub_points(x, shift)])
            .collect();
        Self::from_values(self.grid, values).expect("same grid")
    }

    /// `e^{iθ·x} · self`.
    pub fn modulate(&self, theta: Freq) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let p = self.grid.point(i);
                v * Complex64::from_polar(1.0, theta[0] as f64 * p[0] + theta[1] as f64 * p[1])
            })
            .collect();
        Self::from_values(self.grid, values).expect("same grid")
    }
}

/// Keeps coefficients with `inner ≤ |η| ≤ outer`, zeroes the rest.
pub fn band_project(u: &SpectralField, inner: f64, outer: f64) -> Result<SpectralField> {
    let grid = u.grid();
    let nyquist = grid.nyquist() as f64;
    if inner < 0.0 || inner > outer || outer > nyquist {
        return Err(LabError::AnnulusOutOfRange { inner, outer, nyquist });
    }
    Ok(u.map_coeffs(|i, c| {
        let r = grid.freq_norm_at(i);
        if r >= inner && r <= outer {
            c
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// A finite set of lattice frequencies.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FreqSet {
    dim: usize,
    points: BTreeSet<Freq>,
}

impl FreqSet {
    pub fn new(dim: usize, points: impl IntoIterator<Item = Freq>) -> Self {
        Self { dim, points: points.into_iter().collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, f: &Freq) -> bool {
        self.points.contains(f)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Freq> {
        self.points.iter()
    }

    pub fn is_subset(&self, other: &FreqSet) -> bool {
        self.points.is_subset(&other.points)
    }

    /// Points of `self` not in `other`.
    pub fn difference(&self, other: &FreqSet) -> Vec<Freq> {
        self.points.difference(&other.points).copied().collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|&f| freq_norm(f)).fold(0.0, f64::max)
    }

    pub fn min_norm(&self) -> f64 {
        self.points.iter().map(|&f| freq_norm(f)).fold(f64::INFINITY, f64::min)
    }

    /// Points violating `lo ≤ |f| ≤ hi`.
    pub fn outside_annulus(&self, lo: f64, hi: f64) -> Vec<Freq> {
        self.points
            .iter()
            .filter(|&&f| {
                let r = freq_norm(f);
                r < lo || r > hi
            })
            .copied()
            .collect()
    }
}

/// Exact Minkowski sum of two frequency sets on `grid`.
pub fn sumset(a: &FreqSet, b: &FreqSet, grid: &TorusGrid) -> Result<FreqSet> {
    if a.is_empty() || b.is_empty() {
        return Ok(FreqSet::new(grid.dim(), []));
    }
    let reach = a.max_norm() + b.max_norm();
    if reach >= grid.nyquist() as f64 {
        return Err(LabError::AliasingRisk(format!(
            "max|a| + max|b| = {reach} >= N/2 = {}",
            grid.nyquist()
        )));
    }
    let points = a
        .iter()
        .flat_map(|p| b.iter().map(move |q| [p[0] + q[0], p[1] + q[1]]))
        .collect::<BTreeSet<_>>();
    Ok(FreqSet { dim: grid.dim(), points })
}

impl Serialize for FreqSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tuples: Vec<Vec<i64>> =
            self.points.iter().map(|p| p[..self.dim.max(1)].to_vec()).collect();
        tuples.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FreqSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let tuples = Vec::<Vec<i64>>::deserialize(d)?;
        let dim = tuples.first().map_or(1, Vec::len);
        let mut points = BTreeSet::new();
        for t in tuples {
            match t.as_slice() {
                [a] if dim == 1 => points.insert([*a, 0]),
                [a, b] if dim == 2 => points.insert([*a, *b]),
                _ => return Err(serde::de::Error::custom("mixed or unsupported tuple length")),
            };
        }
        Ok(FreqSet { dim, points })
    }
}

#[derive(Serialize, Deserialize)]
struct FieldDoc {
    n: usize,
    #[serde(rename = "N")]
    size: usize,
    values: Vec<f64>,
}

impl Serialize for SpectralField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let values = self.values.iter().flat_map(|c| [c.re, c.im]).collect();
        FieldDoc { n: self.grid.dim(), size: self.grid.size(), values }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectralField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = FieldDoc::deserialize(d)?;
        let grid = TorusGrid::new(doc.n, doc.size).map_err(serde::de::Error::custom)?;
        if doc.values.len() != 2 * grid.len() {
            return Err(serde::de::Error::custom("values must hold interleaved re/im pairs"));
        }
        let values = doc.values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        SpectralField::from_values(grid, values).map_err(serde::de::Error::custom)
    }
}
