//! Maximal functions, the symbol factor and the pointwise estimates built on
//! them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lp::ModulationFunction;
use crate::operator::{apply, ParaSplit};
use crate::symbols::{apply_stencil, difference_stencil, DiscreteSymbol, MAX_DERIVATIVE_DEPTH};
use crate::torus::{SpectralField, TorusGrid, DEFAULT_SUPPORT_THRESHOLD};

/// Parameters of the Peetre maximal function `u*(N, R; x)`; `t` is the
/// moment exponent of the Hardy–Littlewood variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxParams {
    #[serde(rename = "N")]
    pub decay: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub t: f64,
}

impl MaxParams {
    pub fn new(decay: f64, radius: f64, t: f64) -> Result<Self> {
        if !(decay > 0.0 && decay.is_finite() && radius > 0.0 && radius.is_finite()) {
            return Err(LabError::InvalidInput(format!("maximal parameters N={decay}, R={radius}")));
        }
        if !(t > 0.0 && t <= 1.0) {
            return Err(LabError::BadExponent(format!("moment exponent t={t} not in (0, 1]")));
        }
        Ok(Self { decay, radius, t })
    }

    pub fn with_radius(self, radius: f64) -> Self {
        Self { radius, ..self }
    }
}

/// Grid offsets ordered by torus distance from the origin.
fn offsets_by_distance(grid: &TorusGrid) -> Vec<(usize, f64)> {
    let mut offs: Vec<(usize, f64)> = (0..grid.len()).map(|y| (y, grid.torus_norm(y))).collect();
    offs.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    offs
}

fn peetre_weight(p: &MaxParams, dist: f64) -> f64 {
    (1.0 + p.radius * dist).powf(-p.decay)
}

/// `u*(x) = max_y |u(x − y)| / (1 + R|y|)^N` over one period with the torus
/// metric. Competitors are visited by increasing distance and the scan stops
/// once `max|u|·(1 + R|y|)^{−N}` cannot beat the running maximum, so the
/// result equals the full scan.
pub fn peetre_max(u: &SpectralField, p: &MaxParams) -> Vec<f64> {
    let grid = u.grid();
    let abs: Vec<f64> = u.values().iter().map(|v| v.norm()).collect();
    let top = abs.iter().cloned().fold(0.0, f64::max);
    let offs: Vec<(usize, f64)> = offsets_by_distance(&grid)
        .into_iter()
        .map(|(y, d)| (y, peetre_weight(p, d)))
        .collect();
    (0..grid.len())
        .map(|x| {
            let mut best = abs[x];
            for &(y, w) in &offs {
                if top * w <= best {
                    break;
                }
                best = best.max(abs[grid.sub_points(x, y)] * w);
            }
            best
        })
        .collect()
}

/// Reference implementation of [`peetre_max`] scanning every offset.
pub fn peetre_max_brute(u: &SpectralField, p: &MaxParams) -> Vec<f64> {
    let grid = u.grid();
    let abs: Vec<f64> = u.values().iter().map(|v| v.norm()).collect();
    (0..grid.len())
        .map(|x| {
            (0..grid.len())
                .map(|y| abs[grid.sub_points(x, y)] * peetre_weight(p, grid.torus_norm(y)))
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `M_t u(x) = sup_r (mean_{|y| ≤ r} |u(x − y)|^t)^{1/t}` over the radii
/// `r = j·spacing`, with the mean taken over the grid points of the ball.
pub fn hl_max(u: &SpectralField, t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(LabError::BadExponent(format!("moment exponent t={t} not in (0, 1]")));
    }
    let grid = u.grid();
    let powed: Vec<f64> = u.values().iter().map(|v| v.norm().powf(t)).collect();
    let offs = offsets_by_distance(&grid);
    let h = grid.spacing();
    // ball boundaries: index one past the last offset with |y| ≤ j·h
    let mut ends = Vec::new();
    let mut j = 0.0;
    let mut i = 0;
    while i < offs.len() {
        let r = j * h * (1.0 + 1e-12);
        while i < offs.len() && offs[i].1 <= r {
            i += 1;
        }
        if ends.last() != Some(&i) && i > 0 {
            ends.push(i);
        }
        j += 1.0;
    }
    Ok((0..grid.len())
        .map(|x| {
            let mut acc = 0.0;
            let mut best: f64 = 0.0;
            let mut e = 0;
            for (count, &(y, _)) in offs.iter().enumerate() {
                acc += powed[grid.sub_points(x, y)];
                if count + 1 == ends[e] {
                    best = best.max(acc / (count + 1) as f64);
                    e += 1;
                }
            }
            best.powf(1.0 / t)
        })
        .collect())
}

/// Radial cutoff `χ` applied at scale `R` as `χ(·/R)`: either the modulation
/// function itself or the corona `ψ − ψ(2·)`, which vanishes near the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "psi", rename_all = "snake_case")]
pub enum RadialCutoff {
    Ball(ModulationFunction),
    Corona(ModulationFunction),
}

impl RadialCutoff {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Ball(psi) => psi.eval(t),
            Self::Corona(psi) => psi.eval(t) - psi.eval(2.0 * t),
        }
    }

    /// Outer support radius at scale 1.
    pub fn outer(&self) -> f64 {
        match self {
            Self::Ball(psi) | Self::Corona(psi) => psi.big_r(),
        }
    }

    /// Interval of radii where the cutoff equals one, at scale 1.
    pub fn plateau(&self) -> (f64, f64) {
        match self {
            Self::Ball(psi) => (0.0, psi.r()),
            Self::Corona(psi) => (psi.big_r() / 2.0, psi.r()),
        }
    }
}

impl From<ModulationFunction> for RadialCutoff {
    fn from(psi: ModulationFunction) -> Self {
        Self::Ball(psi)
    }
}

fn check_cutoff(grid: &TorusGrid, p: &MaxParams, chi: &RadialCutoff) -> Result<()> {
    let reach = p.radius * chi.outer();
    if reach > grid.nyquist() as f64 {
        return Err(LabError::LevelOutOfRange {
            level: p.radius.log2().ceil() as i64,
            range: format!("R·{} ≤ {}", chi.outer(), grid.nyquist()),
        });
    }
    Ok(())
}

/// Rows `η ↦ a(x, η) χ(η)` with `χ = ψ(·/R)`, indexed `[x][η]`.
fn cutoff_rows(a: &DiscreteSymbol, chi: &[f64]) -> Vec<Vec<Complex64>> {
    let grid = a.grid();
    let len = grid.len();
    let mut rows = vec![vec![Complex64::default(); len]; len];
    for (eta, &c) in chi.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (x, v) in a.x_column(eta).into_iter().enumerate() {
            rows[x][eta] = v * c;
        }
    }
    rows
}

fn cutoff(grid: &TorusGrid, p: &MaxParams, chi: &RadialCutoff) -> Vec<f64> {
    (0..grid.len()).map(|eta| chi.eval(grid.freq_norm_at(eta) / p.radius)).collect()
}

/// `F_a(x) = mean_y (1 + R|y|)^N |k_x(y)|` with the kernel
/// `k_x(y) = Σ_η a(x,η) χ(η/R) e^{iη·y}`.
pub fn symbol_factor(a: &DiscreteSymbol, p: &MaxParams, chi: &RadialCutoff) -> Result<Vec<f64>> {
    let grid = a.grid();
    check_cutoff(&grid, p, chi)?;
    let chi = cutoff(&grid, p, chi);
    let weights: Vec<f64> = (0..grid.len()).map(|y| (1.0 + p.radius * grid.torus_norm(y)).powf(p.decay)).collect();
    let norm = grid.len() as f64;
    Ok(cutoff_rows(a, &chi)
        .into_iter()
        .map(|row| {
            let kernel = grid.inverse(&row);
            kernel.iter().zip(&weights).map(|(k, w)| k.norm() * w).sum::<f64>() / norm
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub max_ratio: f64,
    pub holds: bool,
}

/// Tolerance on `|a(x,D)u| / (F_a u*)` for the factorization inequality.
pub const FACTORIZATION_SLACK: f64 = 1e-6;

/// `max_x |a(x,D)u(x)| / (F_a(x) u*(x))`; requires `χ(·/R) = 1` on `supp û`.
pub fn check_factorization(
    a: &DiscreteSymbol,
    u: &SpectralField,
    p: &MaxParams,
    chi: &RadialCutoff,
) -> Result<FactorizationReport> {
    let grid = a.grid();
    grid.check_same(&u.grid())?;
    check_cutoff(&grid, p, chi)?;
    let (lo, hi) = chi.plateau();
    let (lo, hi) = (lo * p.radius, hi * p.radius);
    let escaped = u.support().outside_annulus(lo, hi);
    if !escaped.is_empty() {
        return Err(LabError::SupportViolation(format!(
            "{} input frequencies outside the cutoff plateau {lo} ≤ |η| ≤ {hi}, e.g. {:?}",
            escaped.len(),
            escaped[0]
        )));
    }
    let v = apply(a, u)?;
    let fa = symbol_factor(a, p, chi)?;
    let ustar = peetre_max(u, p);
    let floor = 1e-13 * v.max_abs().max(u.max_abs());
    let mut max_ratio: f64 = 0.0;
    for x in 0..grid.len() {
        let lhs = v.values()[x].norm();
        if lhs <= floor {
            continue;
        }
        max_ratio = max_ratio.max(lhs / (fa[x] * ustar[x]));
    }
    Ok(FactorizationReport { max_ratio, holds: max_ratio <= 1.0 + FACTORIZATION_SLACK })
}

/// `Σ_{|α| ≤ [N + n/2] + 1} (Σ_{η ∈ R·supp χ} |R^{|α|} Δ^α_η a(x,η)|² / Rⁿ)^{1/2}`.
pub fn mihlin_bound(a: &DiscreteSymbol, p: &MaxParams, chi: &RadialCutoff) -> Result<Vec<f64>> {
    let grid = a.grid();
    let n = grid.dim();
    let depth = (p.decay + n as f64 / 2.0).floor() as usize + 1;
    if depth > MAX_DERIVATIVE_DEPTH {
        return Err(LabError::DepthUnsupported { depth });
    }
    check_cutoff(&grid, p, chi)?;
    let weights = cutoff(&grid, p, chi);
    let mut alphas = Vec::new();
    for a0 in 0..=depth as u32 {
        for a1 in 0..=if n == 2 { depth as u32 - a0 } else { 0 } {
            alphas.push([a0, a1]);
        }
    }
    let mut cache: Vec<Option<Vec<Complex64>>> = vec![None; grid.len()];
    let mut column = |eta: usize| -> Vec<Complex64> { cache[eta].get_or_insert_with(|| a.x_column(eta)).clone() };
    let mut total = vec![0.0; grid.len()];
    let scale_n = p.radius.powi(n as i32);
    for alpha in alphas {
        let stencil = difference_stencil(&grid, alpha);
        let weight = p.radius.powi((alpha[0] + alpha[1]) as i32);
        let mut acc = vec![0.0; grid.len()];
        for eta in 0..grid.len() {
            if weights[eta] == 0.0 {
                continue;
            }
            if let Some(vals) = apply_stencil(&grid, &stencil, eta, &mut column) {
                for (s, v) in acc.iter_mut().zip(vals) {
                    *s += (weight * v.norm()).powi(2);
                }
            }
        }
        for (t, s) in total.iter_mut().zip(acc) {
            *t += (s / scale_n).sqrt();
        }
    }
    Ok(total)
}

/// Per-level ratios of one pointwise estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRatios {
    pub series: String,
    pub ratios: Vec<(u32, f64)>,
}

impl SeriesRatios {
    pub fn sup(&self) -> f64 {
        self.ratios.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseReport {
    pub decay: f64,
    pub m_exponent: u32,
    pub series: Vec<SeriesRatios>,
}

fn ratio(lhs: &SpectralField, rhs: &[f64]) -> Option<f64> {
    let floor = DEFAULT_SUPPORT_THRESHOLD * lhs.max_abs();
    let mut best: Option<f64> = None;
    for (v, &r) in lhs.values().iter().zip(rhs) {
        let v = v.norm();
        if v > floor && v > 0.0 {
            best = Some(best.unwrap_or(0.0).max(v / r));
        }
    }
    best
}

/// Ratios of the split terms to their maximal-function majorants:
/// `a^{k−h}(x,D)u_k` and `(a^k − a^{k−h})(x,D)u_k` against `(R2^k)^d u_k*`,
/// `a_k(x,D)(u^{k−1} − u^{k−h})` against `(R2^k)^d` times the maximal function
/// of `u^{k−1} − u^{k−h}`, and `a_j(x,D)u^{j−h}` against
/// `2^{−jM} Σ_{k≤j} (R2^k)^{d+M} u_k*`; all maximal functions at `(N, R2^k)`.
pub fn paraterm_pointwise_check(
    split: &ParaSplit,
    a: &DiscreteSymbol,
    u: &SpectralField,
    decay: f64,
    m_exponent: u32,
) -> Result<PointwiseReport> {
    if !(1..=3).contains(&m_exponent) {
        return Err(LabError::BadExponent(format!("M = {m_exponent} not in 1..=3")));
    }
    let part = &split.partition;
    let big_r = part.psi().big_r();
    let d = a.order();
    let h = part.h() as i64;
    let params = |k: i64| MaxParams { decay, radius: big_r * 2f64.powi(k as i32), t: 1.0 };
    let mut stars = Vec::new();
    for k in 0..=split.level as i64 {
        stars.push(peetre_max(&part.dyadic_block(u, k)?, &params(k)));
    }
    let scaled = |k: i64, extra: f64| -> Vec<f64> {
        let s = (big_r * 2f64.powi(k as i32)).powf(d + extra);
        stars[k as usize].iter().map(|v| v * s).collect()
    };
    let mut s1 = SeriesRatios { series: "a1".into(), ratios: Vec::new() };
    for (k, t) in &split.terms1 {
        if let Some(r) = ratio(t, &scaled(*k as i64, 0.0)) {
            s1.ratios.push((*k, r));
        }
    }
    let mut s2lo = SeriesRatios { series: "a2_low".into(), ratios: Vec::new() };
    for (k, t) in &split.terms2_low {
        if let Some(r) = ratio(t, &scaled(*k as i64, 0.0)) {
            s2lo.ratios.push((*k, r));
        }
    }
    let mut s2hi = SeriesRatios { series: "a2_high".into(), ratios: Vec::new() };
    for (k, t) in &split.terms2_high {
        let k = *k as i64;
        let gap = part.cumulative_block(u, k - 1)?.sub(&part.cumulative_block(u, k - h)?)?;
        let s = (big_r * 2f64.powi(k as i32)).powf(d);
        let rhs: Vec<f64> = peetre_max(&gap, &params(k)).iter().map(|v| v * s).collect();
        if let Some(r) = ratio(t, &rhs) {
            s2hi.ratios.push((k as u32, r));
        }
    }
    let mut s3 = SeriesRatios { series: "a3".into(), ratios: Vec::new() };
    let mf = m_exponent as f64;
    for (j, t) in &split.terms3 {
        let j = *j as i64;
        let mut rhs = vec![0.0; u.grid().len()];
        for k in 0..=j {
            for (acc, v) in rhs.iter_mut().zip(scaled(k, mf)) {
                *acc += v;
            }
        }
        let damp = 2f64.powf(-(j as f64) * mf);
        rhs.iter_mut().for_each(|v| *v *= damp);
        if let Some(r) = ratio(t, &rhs) {
            s3.ratios.push((j as u32, r));
        }
    }
    Ok(PointwiseReport { decay, m_exponent, series: vec![s1, s2lo, s2hi, s3] })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YamazakiReport {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub holds: bool,
}

/// `c(s,q) = (Σ_{m≥0} 2^{sm·min(1,q)})^{q/min(1,q)}`; for `q = ∞` the
/// supremum form `1/(1 − 2^s)`.
pub fn yamazaki_constant(s: f64, q: f64) -> Result<f64> {
    if s >= 0.0 {
        return Err(LabError::BadExponent(format!("s = {s} must be negative")));
    }
    if !(q > 0.0) {
        return Err(LabError::BadExponent(format!("q = {q} must be positive")));
    }
    if q.is_infinite() {
        return Ok(1.0 / (1.0 - 2f64.powf(s)));
    }
    let lam = q.min(1.0);
    Ok((1.0 / (1.0 - 2f64.powf(s * lam))).powf(q / lam))
}

/// Both sides of `Σ_j 2^{sjq} (Σ_{k≤j} |b_k|)^q ≤ c Σ_j 2^{sjq} |b_j|^q` with
/// the left sum taken over all `j ≥ 0` (the tail past the sequence is a
/// geometric series); `q = ∞` uses suprema.
pub fn yamazaki_check(b: &[f64], s: f64, q: f64) -> Result<YamazakiReport> {
    let constant = yamazaki_constant(s, q)?;
    let mut partial = 0.0;
    let (mut lhs, mut rhs) = (0.0f64, 0.0f64);
    for (j, v) in b.iter().enumerate() {
        partial += v.abs();
        let w = 2f64.powf(s * j as f64);
        if q.is_infinite() {
            lhs = lhs.max(w * partial);
            rhs = rhs.max(w * v.abs());
        } else {
            lhs += (w * partial).powf(q);
            rhs += (w * v.abs()).powf(q);
        }
    }
    if !q.is_infinite() && !b.is_empty() {
        let start = b.len() as f64;
        lhs += (2f64.powf(s * start) * partial).powf(q) / (1.0 - 2f64.powf(s * q));
    }
    Ok(YamazakiReport { lhs, rhs, constant, holds: lhs <= constant * rhs * (1.0 + 1e-12) })
}
