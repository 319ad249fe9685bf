//! Besov and Triebel–Lizorkin quasi-norms, the homogeneous Besov norm of
//! sampled symbols, and the dyadic ball/corona criteria.
//!
//! `L_p` norms use the normalized measure on the torus (the mean over grid
//! points), so `‖e^{ik·x}‖_p = 1` for every `p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lp::{LPPartition, ModulationFunction};
use crate::operator::apply;
use crate::pointwise::{hl_max, peetre_max, MaxParams};
use crate::symbols::DiscreteSymbol;
use crate::torus::{SpectralField, TorusGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scale {
    B,
    F,
}

/// Serde for integrability exponents: numbers, or `"inf"` for `∞`.
pub mod exponent {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(v),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "∞") => Ok(f64::INFINITY),
            Raw::Text(t) => Err(D::Error::custom(format!("exponent {t:?} is neither a number nor \"inf\""))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub scale: Scale,
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
}

impl NormSpec {
    pub fn new(scale: Scale, s: f64, p: f64, q: f64) -> Result<Self> {
        let spec = Self { scale, s, p, q };
        spec.validate()?;
        Ok(spec)
    }

    pub fn besov(s: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(Scale::B, s, p, q)
    }

    pub fn triebel(s: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(Scale::F, s, p, q)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(LabError::InvalidNormSpec(format!("s = {}", self.s)));
        }
        if !(self.p > 0.0) || !(self.q > 0.0) {
            return Err(LabError::InvalidNormSpec(format!("p = {}, q = {} must be positive", self.p, self.q)));
        }
        if self.scale == Scale::F && self.p.is_infinite() {
            return Err(LabError::InvalidNormSpec("Triebel–Lizorkin norms need p < ∞".into()));
        }
        Ok(())
    }

    /// `λ = min(1, p, q)`.
    pub fn lambda(&self) -> f64 {
        1f64.min(self.p).min(self.q)
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }
}

/// `(mean |f|^p)^{1/p}`, or the maximum for `p = ∞`.
pub fn lp_norm(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().cloned().fold(0.0, f64::max)
    } else {
        (values.iter().map(|v| v.powf(p)).sum::<f64>() / values.len() as f64).powf(1.0 / p)
    }
}

/// `ℓ_q` norm of a finite sequence.
pub fn lq_norm(values: impl IntoIterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.into_iter().fold(0.0, f64::max)
    } else {
        values.into_iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Scale-dependent combination of weighted block moduli `w[j][x]`.
fn combine(weighted: &[Vec<f64>], spec: &NormSpec) -> f64 {
    match spec.scale {
        Scale::B => lq_norm(weighted.iter().map(|b| lp_norm(b, spec.p)), spec.q),
        Scale::F => {
            let len = weighted.first().map_or(0, |b| b.len());
            let pointwise: Vec<f64> =
                (0..len).map(|x| lq_norm(weighted.iter().map(|b| b[x]), spec.q)).collect();
            lp_norm(&pointwise, spec.p)
        }
    }
}

/// `‖{2^{sj} ‖u_j‖_p}‖_{ℓ_q}` (B) or `‖‖{2^{sj} u_j}‖_{ℓ_q}‖_p` (F) with the
/// blocks of `part`, truncated at `J_max`.
pub fn space_norm(u: &SpectralField, spec: &NormSpec, part: &LPPartition) -> Result<f64> {
    spec.validate()?;
    let blocks = part.blocks(u)?;
    Ok(norm_of_blocks(&blocks, spec))
}

/// The same quasi-norm for an explicitly given block sequence `u_0, u_1, …`.
pub fn norm_of_blocks(blocks: &[SpectralField], spec: &NormSpec) -> f64 {
    let weighted: Vec<Vec<f64>> = blocks
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let w = 2f64.powf(spec.s * j as f64);
            b.values().iter().map(|v| w * v.norm()).collect()
        })
        .collect();
    combine(&weighted, spec)
}

/// A function of `η` sampled at `spacing·k` for `k` in the lattice box of
/// `layout`, extended periodically.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub layout: TorusGrid,
    pub spacing: f64,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(layout: TorusGrid, spacing: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != layout.len() || !(spacing > 0.0) {
            return Err(LabError::InvalidInput(format!(
                "{} samples for a box of {} points at spacing {spacing}",
                values.len(),
                layout.len()
            )));
        }
        Ok(Self { layout, spacing, values })
    }

    /// Samples `f` at the lattice points `spacing·k`.
    pub fn from_fn(layout: TorusGrid, spacing: f64, f: impl Fn([f64; 2]) -> Complex64) -> Result<Self> {
        let values = (0..layout.len())
            .map(|i| {
                let k = layout.freq(i);
                f([k[0] as f64 * spacing, k[1] as f64 * spacing])
            })
            .collect();
        Self::new(layout, spacing, values)
    }

    /// `η ↦ b(2^k η)`: the same samples on a lattice `2^k` times finer.
    pub fn dilate(&self, k: i32) -> Self {
        Self { spacing: self.spacing * 2f64.powi(-k), ..self.clone() }
    }
}

/// `(Σ_j (2^{j n/t} ‖Φ(2^{−j}D) b‖_{L_1})^t)^{1/t}` with `Φ = ψ − ψ(2·)`,
/// summed over every `j ∈ ℤ` whose shell meets the dual lattice away from 0.
pub fn homog_besov_norm(b: &SampledFunction, t: f64, psi: &ModulationFunction) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(LabError::BadExponent(format!("t = {t} not in (0, 1]")));
    }
    let layout = b.layout;
    let n = layout.dim() as i32;
    let h = b.spacing;
    let dual_step = std::f64::consts::TAU / (layout.size() as f64 * h);
    let coeffs = layout.forward(&b.values);
    let radii: Vec<f64> = (0..layout.len()).map(|k| layout.freq_norm_at(k) * dual_step).collect();
    let (lo, hi) = radii
        .iter()
        .filter(|&&y| y > 0.0)
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    if !lo.is_finite() {
        return Err(LabError::NotResolvable);
    }
    let phi = |y: f64| psi.eval(y) - psi.eval(2.0 * y);
    // Φ(2^{-j}y) ≠ 0 needs r 2^{j−1} < |y| < R 2^j
    let j_lo = (lo / psi.big_r()).log2().floor() as i32 - 1;
    let j_hi = (hi / psi.r()).log2().ceil() as i32 + 1;
    let cell = h.powi(n);
    let mut total = 0.0;
    let mut resolved = false;
    for j in j_lo..=j_hi {
        let scale = 2f64.powi(-j);
        let filtered: Vec<Complex64> = coeffs
            .iter()
            .zip(&radii)
            .map(|(c, &y)| if y > 0.0 { c * phi(y * scale) } else { Complex64::default() })
            .collect();
        if filtered.iter().all(|c| *c == Complex64::default()) {
            continue;
        }
        resolved = true;
        let l1: f64 = layout.inverse(&filtered).iter().map(|v| v.norm()).sum::<f64>() * cell;
        total += (2f64.powf(j as f64 * n as f64 / t) * l1).powf(t);
    }
    if !resolved {
        return Ok(0.0);
    }
    Ok(total.powf(1.0 / t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarschallReport {
    pub max_ratio: f64,
}

/// `max_x |b(x,D)u(x)| / (‖b(x, 2^k·)‖_{Ḃ^{n/t}_{1,t}} M_t u(x))`.
pub fn marschall_check(
    b: &DiscreteSymbol,
    u: &SpectralField,
    k: u32,
    t: f64,
    psi: &ModulationFunction,
) -> Result<MarschallReport> {
    let grid = b.grid();
    grid.check_same(&u.grid())?;
    let radius = 2f64.powi(k as i32);
    let escaped = u.support().outside_annulus(0.0, radius);
    if !escaped.is_empty() {
        return Err(LabError::SupportViolation(format!("input frequency {:?} outside B(0, 2^{k})", escaped[0])));
    }
    let len = grid.len();
    let mut rows = vec![vec![Complex64::default(); len]; len];
    let scale = (0..len).map(|eta| b.x_column(eta).iter().map(|v| v.norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
    for eta in 0..len {
        let col = b.x_column(eta);
        if grid.freq_norm_at(eta) > radius && col.iter().any(|v| v.norm() > 1e-12 * scale) {
            return Err(LabError::SupportViolation(format!(
                "symbol row support reaches {:?} outside B(0, 2^{k})",
                grid.freq(eta)
            )));
        }
        for (x, v) in col.into_iter().enumerate() {
            rows[x][eta] = v;
        }
    }
    let v = apply(b, u)?;
    let mt = hl_max(u, t)?;
    let floor = 1e-13 * v.max_abs().max(1e-300);
    let mut max_ratio: f64 = 0.0;
    for (x, row) in rows.into_iter().enumerate() {
        let lhs = v.values()[x].norm();
        if lhs <= floor {
            continue;
        }
        let sampled = SampledFunction::new(grid, 1.0, row)?.dilate(-(k as i32));
        let norm = homog_besov_norm(&sampled, t, psi)?;
        max_ratio = max_ratio.max(lhs / (norm * mt[x]));
    }
    Ok(MarschallReport { max_ratio })
}

/// Terms `u_j` with `A^{−1} 2^{θj} ≤ |ξ| ≤ A 2^j` (a ball for `j = 0`) and
/// the target smoothness `s′` for the sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoronaSpec {
    #[serde(rename = "A")]
    pub a: f64,
    pub theta: f64,
    #[serde(rename = "J")]
    pub levels: u32,
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    pub s_prime: f64,
}

impl CoronaSpec {
    /// Checks the parameter ranges and that `s′` is one of the admissible
    /// targets for the given `θ`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.a > 1.0) || !(self.theta > 0.0 && self.theta <= 1.0) || self.levels < 1 {
            return Err(LabError::InvalidCorona(format!(
                "need A > 1, θ ∈ (0,1], J ≥ 1 (got A={}, θ={}, J={})",
                self.a, self.theta, self.levels
            )));
        }
        NormSpec::triebel(self.s, self.p, self.q).map_err(|e| LabError::InvalidCorona(e.to_string()))?;
        let n = dim as f64;
        let sigma_p = (n / self.p - n).max(0.0);
        let admissible = if self.theta == 1.0 {
            self.s_prime <= self.s
        } else {
            (self.s > sigma_p && self.s_prime <= self.s)
                || (self.s <= 0.0 && self.p >= 1.0 && self.q >= 1.0 && self.s_prime < self.s / self.theta)
                || self.s_prime < self.s - (1.0 - self.theta) / self.theta * (sigma_p - self.s).max(0.0)
        };
        if !admissible {
            return Err(LabError::InvalidCorona(format!(
                "s′ = {} is not an admissible target for s = {}, θ = {}, p = {}",
                self.s_prime, self.s, self.theta, self.p
            )));
        }
        Ok(())
    }

    pub fn region(&self, j: u32) -> (f64, f64) {
        let outer = self.a * 2f64.powi(j as i32);
        if j == 0 {
            (0.0, outer)
        } else {
            (2f64.powf(self.theta * j as f64) / self.a, outer)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoronaReport {
    pub norm_of_sum: f64,
    pub f_bound: f64,
    pub ratio: f64,
}

/// Validates the corona supports exactly, then compares
/// `‖Σ u_j‖_{F^{s′}_{p,q}}` with `F = ‖(Σ_j |2^{sj} u_j|^q)^{1/q}‖_p`.
pub fn corona_sum_check(terms: &[SpectralField], spec: &CoronaSpec, part: &LPPartition) -> Result<CoronaReport> {
    let grid = part.grid();
    spec.validate(grid.dim())?;
    let mut offending = Vec::new();
    for (j, t) in terms.iter().enumerate() {
        grid.check_same(&t.grid())?;
        let (lo, hi) = spec.region(j as u32);
        if !t.support().outside_annulus(lo, hi).is_empty() {
            offending.push(j);
        }
    }
    if !offending.is_empty() {
        return Err(LabError::SupportViolation(format!("terms {offending:?} leave their coronas")));
    }
    let f_bound = norm_of_blocks(terms, &NormSpec::triebel(spec.s, spec.p, spec.q)?);
    let sum = terms.iter().try_fold(SpectralField::zeros(grid), |acc, t| acc.add(t))?;
    let norm_of_sum = space_norm(&sum, &NormSpec::triebel(spec.s_prime, spec.p, spec.q)?, part)?;
    Ok(CoronaReport { norm_of_sum, f_bound, ratio: norm_of_sum / f_bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalChain {
    /// `mean ‖{2^{sk} u_k*(N, R2^k; ·)}‖_{ℓ_q}^p`.
    pub peetre: f64,
    /// `mean ‖{2^{sk} M_t u_k}‖_{ℓ_q}^p`.
    pub hardy_littlewood: f64,
    /// `‖{2^{sk} u_k}‖_{L_p(ℓ_q)}^p`.
    pub blocks: f64,
}

impl MaximalChain {
    pub fn first_ratio(&self) -> f64 {
        self.peetre / self.hardy_littlewood
    }

    pub fn second_ratio(&self) -> f64 {
        self.hardy_littlewood / self.blocks
    }
}

/// The three quantities of the Peetre / Hardy–Littlewood / Fefferman–Stein
/// chain for blocks band-limited to `|ξ| ≤ R 2^k`.
pub fn fefferman_stein_check(
    blocks: &[SpectralField],
    spec: &NormSpec,
    t: f64,
    decay: f64,
    radius: f64,
) -> Result<MaximalChain> {
    spec.validate()?;
    if spec.scale != Scale::F {
        return Err(LabError::InvalidNormSpec("maximal chain is stated for the F scale".into()));
    }
    let Some(first) = blocks.first() else {
        return Err(LabError::InvalidInput("no blocks".into()));
    };
    let n = first.grid().dim() as f64;
    if !(t > 0.0 && t < spec.p.min(spec.q)) || t > 1.0 {
        return Err(LabError::BadExponent(format!("t = {t} must lie in (0, min(1, p, q))")));
    }
    if decay < n / t {
        return Err(LabError::BadExponent(format!("N = {decay} below n/t = {}", n / t)));
    }
    for (k, b) in blocks.iter().enumerate() {
        let reach = radius * 2f64.powi(k as i32);
        if !b.support().outside_annulus(0.0, reach).is_empty() {
            return Err(LabError::SupportViolation(format!("block {k} leaves B(0, {reach})")));
        }
    }
    let weight = |k: usize| 2f64.powf(spec.s * k as f64);
    let mut peetre = Vec::new();
    let mut hl = Vec::new();
    let mut plain = Vec::new();
    for (k, b) in blocks.iter().enumerate() {
        let params = MaxParams::new(decay, radius * 2f64.powi(k as i32), t)?;
        peetre.push(peetre_max(b, &params).into_iter().map(|v| v * weight(k)).collect::<Vec<_>>());
        hl.push(hl_max(b, t)?.into_iter().map(|v| v * weight(k)).collect::<Vec<_>>());
        plain.push(b.values().iter().map(|v| v.norm() * weight(k)).collect::<Vec<_>>());
    }
    let pth = |w: &[Vec<f64>]| combine(w, spec).powf(spec.p);
    Ok(MaximalChain { peetre: pth(&peetre), hardy_littlewood: pth(&hl), blocks: pth(&plain) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub holds: bool,
}

/// `c` in `‖u‖_{F^{s′}_{p,r}} ≤ c ‖u‖_{F^s_{p,q}}`:
/// `(1 − 2^{(s′−s)r})^{−1/r}` for `s′ < s`, and 1 for `r = ∞` or `s′ = s, r ≥ q`.
pub fn embedding_constant(s: f64, s_prime: f64, q: f64, r: f64) -> Result<f64> {
    if s_prime > s || (s_prime == s && r < q) {
        return Err(LabError::BadExponent(format!(
            "no embedding from smoothness {s}, q = {q} into {s_prime}, r = {r}"
        )));
    }
    if r.is_infinite() || s_prime == s {
        return Ok(1.0);
    }
    Ok((1.0 - 2f64.powf((s_prime - s) * r)).powf(-1.0 / r))
}

pub fn embedding_check(
    u: &SpectralField,
    source: &NormSpec,
    s_prime: f64,
    r: f64,
    part: &LPPartition,
) -> Result<EmbeddingReport> {
    let target = NormSpec::new(source.scale, s_prime, source.p, r)?;
    let constant = embedding_constant(source.s, s_prime, source.q, r)?;
    let lhs = space_norm(u, &target, part)?;
    let rhs = space_norm(u, source, part)?;
    Ok(EmbeddingReport { lhs, rhs, constant, holds: lhs <= constant * rhs * (1.0 + 1e-12) })
}

/// `Σ_{j=0}^{J} 2^{−jd} e^{i 2^j t}` along the first axis.
pub fn weierstrass_signal(d: f64, levels: u32, grid: TorusGrid) -> Result<SpectralField> {
    if (1u64 << levels) as f64 >= grid.nyquist() as f64 {
        return Err(LabError::GridTooCoarse(format!(
            "frequency 2^{levels} not below nyquist {}",
            grid.nyquist()
        )));
    }
    let modes: Vec<_> = (0..=levels)
        .map(|j| ([1i64 << j, 0], Complex64::new(2f64.powf(-(j as f64) * d), 0.0)))
        .collect();
    SpectralField::from_modes(grid, &modes)
}

/// Index of the block whose multiplier equals one at `|η| = t`, if any.
pub fn plateau_block(part: &LPPartition, t: f64) -> Option<u32> {
    (0..=part.j_max()).find(|&j| part.block_multiplier(j as i64, t) == 1.0)
}

/// The unit mode `e^{ikx₁}`.
pub fn axis_mode(grid: TorusGrid, k: i64) -> Result<SpectralField> {
    SpectralField::from_modes(grid, &[([k, 0], Complex64::new(1.0, 0.0))])
}
