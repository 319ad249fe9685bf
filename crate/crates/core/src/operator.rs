//! Operator application, vanishing frequency modulation, multiplier
//! composition and the paradifferential splitting.
//!
//! `a(x,D)u(x) = Σ_η e^{ix·η} a(x,η) c_η` with `c_η` the Fourier coefficients
//! of `u`; the `(2π)^{−n}` of the continuous quadrature is absorbed by the
//! coefficient normalization. On the grid this is evaluated exactly in the
//! coefficient domain as `v̂_ζ = Σ_η c_η â(ζ − η, η)`, indices modulo the lattice.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lp::{saturation_level, LPPartition, ModulationFunction};
use crate::symbols::{estimate_seminorm, symbol_band, DiscreteSymbol, SymbolClass, SymbolSeminorm};
use crate::torus::{freq_norm, Freq, FreqSet, SpectralField, TorusGrid};

/// Relative level below which symbol and field entries count as roundoff when
/// computing support bounds.
pub const ROUNDOFF_THRESHOLD: f64 = 1e-13;

pub fn apply(a: &DiscreteSymbol, u: &SpectralField) -> Result<SpectralField> {
    let grid = a.grid();
    grid.check_same(&u.grid())?;
    let mut out = vec![Complex64::default(); grid.len()];
    for (eta, &c) in u.coeffs().iter().enumerate() {
        if c == Complex64::default() {
            continue;
        }
        let ef = grid.freq(eta);
        for (xi, &s) in a.spectrum_column(eta).iter().enumerate() {
            if s != Complex64::default() {
                let xf = grid.freq(xi);
                out[grid.wrap_index([xf[0] + ef[0], xf[1] + ef[1]])] += c * s;
            }
        }
    }
    SpectralField::from_coeffs(grid, out)
}

/// Hilbert-space adjoint of `apply(a, ·)` in the coefficient basis.
pub fn apply_adjoint(a: &DiscreteSymbol, w: &SpectralField) -> Result<SpectralField> {
    let grid = a.grid();
    grid.check_same(&w.grid())?;
    let wc = w.coeffs();
    let mut out = vec![Complex64::default(); grid.len()];
    for (eta, slot) in out.iter_mut().enumerate() {
        let ef = grid.freq(eta);
        let mut acc = Complex64::default();
        for (xi, &s) in a.spectrum_column(eta).iter().enumerate() {
            if s != Complex64::default() {
                let xf = grid.freq(xi);
                acc += s.conj() * wc[grid.wrap_index([xf[0] + ef[0], xf[1] + ef[1]])];
            }
        }
        *slot = acc;
    }
    SpectralField::from_coeffs(grid, out)
}

/// Largest `m` with `R 2^m ≤ nyquist`, or `None` when even `m = 0` fails.
fn resolved_top(psi: &ModulationFunction, grid: &TorusGrid) -> Option<u32> {
    let nyq = grid.nyquist() as f64;
    if psi.big_r() > nyq {
        return None;
    }
    let mut m = 0;
    while psi.big_r() * 2f64.powi(m as i32 + 1) <= nyq {
        m += 1;
    }
    Some(m)
}

/// Modulation levels evaluable on the grid: those with `R 2^m ≤ nyquist`,
/// followed by the saturation level where both cutoffs are identically one.
pub fn modulation_levels(psi: &ModulationFunction, grid: &TorusGrid) -> Vec<u32> {
    let sat = saturation_level(psi, grid);
    let mut levels: Vec<u32> = match resolved_top(psi, grid) {
        Some(top) => (0..=top.min(sat)).collect(),
        None => Vec::new(),
    };
    if levels.last() != Some(&sat) {
        levels.push(sat);
    }
    levels
}

/// Validates `m`; levels at or past saturation are clamped to it.
pub fn effective_level(psi: &ModulationFunction, grid: &TorusGrid, m: u32) -> Result<u32> {
    let sat = saturation_level(psi, grid);
    if m >= sat {
        return Ok(sat);
    }
    match resolved_top(psi, grid) {
        Some(top) if m <= top => Ok(m),
        top => Err(LabError::LevelOutOfRange {
            level: m as i64,
            range: match top {
                Some(t) => format!("0..={t} or >= {sat}"),
                None => format!(">= {sat}"),
            },
        }),
    }
}

/// `ψ(2^{−m}D_x) a(x,η) ψ(2^{−m}η)`.
pub fn modulated_symbol(a: &DiscreteSymbol, psi: &ModulationFunction, m: u32) -> Result<DiscreteSymbol> {
    let m = effective_level(psi, &a.grid(), m)?;
    let p = *psi;
    let band = psi.big_r() * 2f64.powi(m as i32);
    Ok(a.map_spectrum(band, move |xi, eta, c| {
        c * p.eval_dilated(freq_norm(xi), m as i64) * p.eval_dilated(freq_norm(eta), m as i64)
    }))
}

pub fn modulated_apply(
    a: &DiscreteSymbol,
    u: &SpectralField,
    psi: &ModulationFunction,
    m: u32,
) -> Result<SpectralField> {
    apply(&modulated_symbol(a, psi, m)?, u)
}

/// Largest `max(|ξ|, |η|)` over pairs with `c_η ≠ 0` and `â(ξ,η) ≠ 0`.
pub fn active_band(a: &DiscreteSymbol, u: &SpectralField) -> Result<f64> {
    let grid = a.grid();
    grid.check_same(&u.grid())?;
    let mut band: f64 = 0.0;
    for (eta, &c) in u.coeffs().iter().enumerate() {
        if c == Complex64::default() {
            continue;
        }
        let en = grid.freq_norm_at(eta);
        for (xi, s) in a.spectrum_column(eta).iter().enumerate() {
            if *s != Complex64::default() {
                band = band.max(en.max(grid.freq_norm_at(xi)));
            }
        }
    }
    Ok(band)
}

/// The level from which on both cutoffs equal one on every active pair:
/// the first evaluable `m` with `r 2^m ≥` [`active_band`].
pub fn forced_level(a: &DiscreteSymbol, u: &SpectralField, psi: &ModulationFunction) -> Result<u32> {
    let band = active_band(a, u)?;
    let levels = modulation_levels(psi, &a.grid());
    Ok(*levels
        .iter()
        .find(|&&m| psi.r() * 2f64.powi(m as i32) >= band)
        .unwrap_or(levels.last().expect("saturation level always present")))
}

/// Successive differences of `v_m` for one modulation function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyProfile {
    pub psi: ModulationFunction,
    pub levels: Vec<u32>,
    /// `‖v_{m_i} − v_{m_{i−1}}‖_∞` for consecutive evaluable levels.
    pub differences: Vec<f64>,
    pub stabilization_m: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct LimitReport {
    pub converged: bool,
    /// Largest stabilization level over the supplied modulation functions.
    pub stabilization_m: Option<u32>,
    pub value: SpectralField,
    pub psi_discrepancy: f64,
    pub profiles: Vec<CauchyProfile>,
}

impl LimitReport {
    /// Profile of the first modulation function.
    pub fn cauchy_profile(&self) -> &[f64] {
        &self.profiles[0].differences
    }
}

pub fn modulation_limit(
    a: &DiscreteSymbol,
    u: &SpectralField,
    psis: &[ModulationFunction],
    tol: f64,
) -> Result<LimitReport> {
    if psis.len() < 2 {
        return Err(LabError::InvalidInput("at least two modulation functions needed".into()));
    }
    let grid = a.grid();
    let mut profiles = Vec::with_capacity(psis.len());
    let mut finals: Vec<SpectralField> = Vec::with_capacity(psis.len());
    for psi in psis {
        let levels = modulation_levels(psi, &grid);
        let mut prev: Option<SpectralField> = None;
        let mut differences = Vec::new();
        for &m in &levels {
            let v = modulated_apply(a, u, psi, m)?;
            if let Some(p) = &prev {
                differences.push(v.max_diff(p));
            }
            prev = Some(v);
        }
        // first level after which every later difference stays below tol
        let tail_start = differences.iter().rposition(|&d| d > tol).map_or(0, |i| i + 1);
        profiles.push(CauchyProfile {
            psi: *psi,
            stabilization_m: Some(levels[tail_start]),
            levels,
            differences,
        });
        finals.push(prev.expect("at least one level"));
    }
    let psi_discrepancy = finals.iter().skip(1).map(|f| f.max_diff(&finals[0])).fold(0.0, f64::max);
    let stabilization_m = profiles.iter().filter_map(|p| p.stabilization_m).max();
    Ok(LimitReport {
        converged: psi_discrepancy <= tol,
        stabilization_m,
        value: finals.swap_remove(0),
        psi_discrepancy,
        profiles,
    })
}

/// `c(x,η) = a(x,η) b(η)` for an x-independent `b`.
pub fn compose_multiplier(a: &DiscreteSymbol, b: &DiscreteSymbol) -> Result<DiscreteSymbol> {
    a.grid().check_same(&b.grid())?;
    if !b.is_multiplier() {
        return Err(LabError::NotAMultiplier);
    }
    let grid = b.grid();
    let values: Vec<Complex64> = (0..grid.len()).map(|eta| b.multiplier_value(eta)).collect();
    let order = a.order() + b.order();
    let class = if a.class() == SymbolClass::Ching { SymbolClass::Ching } else { SymbolClass::Custom };
    Ok(a
        .map_spectrum(a.x_band(), move |_, eta, c| c * values[grid.wrap_index(eta)])
        .with_order(order)
        .with_class(class))
}

/// `a^{(1)}u + a^{(2)}u + a^{(3)}u` truncated at level `m`, with the per-level
/// terms retained.
#[derive(Clone, Debug)]
pub struct ParaSplit {
    pub partition: LPPartition,
    pub level: u32,
    pub a1u: SpectralField,
    pub a2u: SpectralField,
    pub a3u: SpectralField,
    /// `(k, a^{k−h}(x,D)u_k)` for `h ≤ k ≤ m`.
    pub terms1: Vec<(u32, SpectralField)>,
    /// `(k, (a^k − a^{k−h})(x,D)u_k)` for `0 ≤ k ≤ m`.
    pub terms2_low: Vec<(u32, SpectralField)>,
    /// `(k, a_k(x,D)(u^{k−1} − u^{k−h}))` for `0 ≤ k ≤ m`.
    pub terms2_high: Vec<(u32, SpectralField)>,
    /// `(j, a_j(x,D)u^{j−h})` for `h ≤ j ≤ m`.
    pub terms3: Vec<(u32, SpectralField)>,
    /// Measured `ξ`-band of the symbol and bandwidth of the input.
    pub symbol_band: f64,
    pub input_band: f64,
}

impl ParaSplit {
    pub fn reconstruction(&self) -> Result<SpectralField> {
        self.a1u.add(&self.a2u)?.add(&self.a3u)
    }

    /// `k ↦ (a^{(2)} term at level k)`.
    pub fn terms2(&self) -> Result<Vec<(u32, SpectralField)>> {
        self.terms2_low
            .iter()
            .zip(&self.terms2_high)
            .map(|((k, lo), (_, hi))| Ok((*k, lo.add(hi)?)))
            .collect()
    }
}

fn sum_fields(grid: TorusGrid, terms: &[(u32, SpectralField)]) -> Result<SpectralField> {
    terms.iter().try_fold(SpectralField::zeros(grid), |acc, (_, t)| acc.add(t))
}

pub fn para_split(
    a: &DiscreteSymbol,
    u: &SpectralField,
    part: &LPPartition,
    m: u32,
) -> Result<ParaSplit> {
    let grid = a.grid();
    grid.check_same(&u.grid())?;
    grid.check_same(&part.grid())?;
    if m > part.j_max() {
        return Err(LabError::LevelOutOfRange { level: m as i64, range: format!("0..={}", part.j_max()) });
    }
    let h = part.h() as i64;
    let band = |k: i64| symbol_band(a, k, part, false);
    let cum = |k: i64| symbol_band(a, k, part, true);
    let ublock = |k: i64| part.dyadic_block(u, k);
    let ucum = |k: i64| part.cumulative_block(u, k);

    let mut terms1 = Vec::new();
    let mut terms3 = Vec::new();
    let mut terms2_low = Vec::new();
    let mut terms2_high = Vec::new();
    for k in 0..=m as i64 {
        let uk = ublock(k)?;
        let ak = band(k)?;
        if k >= h {
            terms1.push((k as u32, apply(&cum(k - h)?, &uk)?));
            terms3.push((k as u32, apply(&ak, &ucum(k - h)?)?));
        }
        let low = cum(k)?.sub(&cum(k - h)?)?;
        terms2_low.push((k as u32, apply(&low, &uk)?));
        let gap = ucum(k - 1)?.sub(&ucum(k - h)?)?;
        terms2_high.push((k as u32, apply(&ak, &gap)?));
    }
    let a1u = sum_fields(grid, &terms1)?;
    let a3u = sum_fields(grid, &terms3)?;
    let a2u = sum_fields(grid, &terms2_low)?.add(&sum_fields(grid, &terms2_high)?)?;
    Ok(ParaSplit {
        partition: *part,
        level: m,
        a1u,
        a2u,
        a3u,
        terms1,
        terms2_low,
        terms2_high,
        terms3,
        symbol_band: a.measured_x_band(),
        input_band: u.support_above(ROUNDOFF_THRESHOLD * u.max_coeff()).max_norm(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionViolation {
    pub series: String,
    pub level: u32,
    pub frequency: Freq,
    pub modulus: f64,
    pub region: (f64, f64),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub terms_checked: usize,
    pub violations: Vec<InclusionViolation>,
}

impl InclusionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, series: &str, level: u32, field: &SpectralField, threshold: f64, region: (f64, f64)) {
        self.terms_checked += 1;
        let slack = 1e-9;
        for f in field.support_above(threshold).iter() {
            let t = freq_norm(*f);
            if t < region.0 - slack || t > region.1 + slack {
                self.violations.push(InclusionViolation {
                    series: series.to_string(),
                    level,
                    frequency: *f,
                    modulus: field.coeff(*f).norm(),
                    region,
                });
            }
        }
    }
}

fn split_threshold(split: &ParaSplit) -> f64 {
    let all = split
        .terms1
        .iter()
        .chain(&split.terms2_low)
        .chain(&split.terms2_high)
        .chain(&split.terms3);
    let scale = all.map(|(_, t)| t.max_coeff()).fold(0.0, f64::max);
    crate::torus::DEFAULT_SUPPORT_THRESHOLD * scale
}

fn check_alias(split: &ParaSplit) -> Result<()> {
    let nyq = split.partition.grid().nyquist() as f64;
    if split.symbol_band + split.input_band >= nyq {
        return Err(LabError::AliasingRisk(format!(
            "symbol band {} plus input band {} reaches nyquist {nyq}",
            split.symbol_band, split.input_band
        )));
    }
    Ok(())
}

/// Corona and ball inclusions of the split terms: the first and third series
/// in `R_h 2^k ≤ |ξ| ≤ (5R/4) 2^k`, the second in `|ξ| ≤ 2R 2^k`.
pub fn support_inclusions(split: &ParaSplit) -> Result<InclusionReport> {
    check_alias(split)?;
    let part = &split.partition;
    let (rh, big_r) = (part.r_h(), part.psi().big_r());
    let threshold = split_threshold(split);
    let mut report = InclusionReport::default();
    let corona = |k: u32| (rh * 2f64.powi(k as i32), 1.25 * big_r * 2f64.powi(k as i32));
    for (k, t) in &split.terms1 {
        report.check("a1", *k, t, threshold, corona(*k));
    }
    for (j, t) in &split.terms3 {
        report.check("a3", *j, t, threshold, corona(*j));
    }
    for (k, t) in split.terms2()? {
        report.check("a2", k, &t, threshold, (0.0, 2.0 * big_r * 2f64.powi(k as i32)));
    }
    Ok(report)
}

/// For symbols satisfying the twisted diagonal condition with constant `B`:
/// second-series terms lie in `(r / (2^{h+1} B)) 2^k ≤ |ξ| ≤ 2R 2^k` once
/// `r 2^{k−h−1} ≥ B`. Returns the report and the first level checked.
pub fn tdc_corona_inclusions(split: &ParaSplit, b: f64) -> Result<(InclusionReport, u32)> {
    check_alias(split)?;
    let part = &split.partition;
    let (r, big_r, h) = (part.psi().r(), part.psi().big_r(), part.h() as i32);
    let threshold = split_threshold(split);
    let mut report = InclusionReport::default();
    let mut first = u32::MAX;
    for (k, t) in split.terms2()? {
        let scale = 2f64.powi(k as i32);
        if r * 2f64.powi(k as i32 - h - 1) < b {
            continue;
        }
        first = first.min(k);
        let inner = r / (2f64.powi(h + 1) * b) * scale;
        report.check("a2", k, &t, threshold, (inner, 2.0 * big_r * scale));
    }
    Ok((report, first))
}

/// Superset of `supp F(a(x,D)u)`: all `ξ + η` with `η ∈ supp û` and
/// `(ξ, η) ∈ supp â`, entries below roundoff level excluded.
pub fn spectral_support_bound(a: &DiscreteSymbol, u: &SpectralField) -> Result<FreqSet> {
    let grid = a.grid();
    grid.check_same(&u.grid())?;
    let sym_floor = ROUNDOFF_THRESHOLD * a.max_spectrum();
    let input = u.support_above(ROUNDOFF_THRESHOLD * u.max_coeff());
    let mut out = Vec::new();
    for ef in input.iter() {
        let eta = grid.index_of(*ef).expect("support lies on the lattice");
        for (xi, s) in a.spectrum_column(eta).iter().enumerate() {
            if s.norm() > sym_floor {
                let xf = grid.freq(xi);
                let z = [xf[0] + ef[0], xf[1] + ef[1]];
                if grid.index_of(z).is_none() {
                    return Err(LabError::AliasingRisk(format!(
                        "{xf:?} + {ef:?} leaves the lattice"
                    )));
                }
                out.push(z);
            }
        }
    }
    Ok(FreqSet::new(grid.dim(), out))
}

/// Symbol of the matrix adjoint together with its seminorm estimates.
#[derive(Clone, Debug)]
pub struct AdjointProbe {
    pub adjoint: DiscreteSymbol,
    pub seminorms: Vec<SymbolSeminorm>,
}

/// Multi-indices reported by [`discrete_adjoint_probe`].
pub const PROBE_INDICES: [([u32; 2], [u32; 2]); 4] =
    [([0, 0], [0, 0]), ([1, 0], [0, 0]), ([0, 0], [1, 0]), ([2, 0], [0, 0])];

/// Conjugate transpose of the Fourier matrix `M[ζ,η] = â(ζ−η, η)`, read back
/// as a symbol: `b̂(ξ, η) = conj(â(−ξ, ξ+η))`.
pub fn discrete_adjoint_probe(a: &DiscreteSymbol, max_dim: usize) -> Result<AdjointProbe> {
    let grid = a.grid();
    if grid.dim() != 1 {
        return Err(LabError::InvalidInput("adjoint probe requires n = 1".into()));
    }
    if grid.len() > max_dim {
        return Err(LabError::TooLarge { dim: grid.len(), cap: max_dim });
    }
    let source = a.materialize();
    let adjoint = DiscreteSymbol::from_spectrum_fn(
        grid,
        a.order(),
        SymbolClass::Custom,
        grid.max_freq_norm(),
        move |eta| {
            let ef = grid.freq(eta);
            (0..grid.len())
                .map(|xi| {
                    let xf = grid.freq(xi);
                    let col = grid.wrap_index([xf[0] + ef[0], 0]);
                    source.spectrum_column(col)[grid.wrap_index([-xf[0], 0])].conj()
                })
                .collect()
        },
    )?
    .tightened();
    let seminorms = PROBE_INDICES
        .iter()
        .map(|&(al, be)| estimate_seminorm(&adjoint, al, be))
        .collect::<Result<Vec<_>>>()?;
    Ok(AdjointProbe { adjoint, seminorms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{
        bessel_potential, ching_symbol, identity_symbol, modulation_symbol, multiplier_symbol,
        random_symbol, BumpProfile, ProfileShape,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(1, n).unwrap()
    }

    fn random_field(g: TorusGrid, band: i64, rng: &mut ChaCha8Rng) -> SpectralField {
        let modes: Vec<_> = (-band..=band)
            .map(|k| ([k, 0], Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        SpectralField::from_modes(g, &modes).unwrap()
    }

    fn direct_apply(a: &DiscreteSymbol, u: &SpectralField) -> Vec<Complex64> {
        let g = a.grid();
        (0..g.len())
            .map(|x| {
                let p = g.point(x);
                (0..g.len())
                    .map(|eta| {
                        let f = g.freq(eta);
                        Complex64::from_polar(1.0, f[0] as f64 * p[0]) * a.value(x, eta) * u.coeffs()[eta]
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn apply_matches_the_defining_sum() {
        let g = grid(32);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_symbol(g, 1.0, 6.0, &mut rng).unwrap();
        let u = random_field(g, 8, &mut rng);
        let v = apply(&a, &u).unwrap();
        let want = direct_apply(&a, &u);
        for (p, q) in v.values().iter().zip(&want) {
            assert!((p - q).norm() < 1e-11, "{p} {q}");
        }
    }

    #[test]
    fn apply_examples() {
        let g = grid(64);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_field(g, 10, &mut rng);
        assert!(apply(&identity_symbol(g), &u).unwrap().max_diff(&u) < 1e-14);
        let b = bessel_potential(g, 1.0);
        let mode = SpectralField::from_modes(g, &[([7, 0], Complex64::new(1.0, 0.0))]).unwrap();
        let v = apply(&b, &mode).unwrap();
        assert!((v.coeff([7, 0]).re - 50f64.sqrt()).abs() < 1e-12);
        let m = apply(&modulation_symbol(g, [3, 0]), &u).unwrap();
        assert!(m.max_diff(&u.modulate([3, 0])) < 1e-13);
    }

    #[test]
    fn adjoint_is_the_matrix_adjoint() {
        let g = grid(32);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_symbol(g, 0.5, 5.0, &mut rng).unwrap();
        let u = random_field(g, 15, &mut rng);
        let w = random_field(g, 15, &mut rng);
        let lhs: Complex64 = apply(&a, &u).unwrap().coeffs().iter().zip(w.coeffs()).map(|(p, q)| p * q.conj()).sum();
        let rhs: Complex64 =
            u.coeffs().iter().zip(apply_adjoint(&a, &w).unwrap().coeffs()).map(|(p, q)| p * q.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn modulation_levels_and_clamping() {
        let g = grid(64);
        let psi = ModulationFunction::new(1.0, 2.0).unwrap();
        assert_eq!(modulation_levels(&psi, &g), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(effective_level(&psi, &g, 9).unwrap(), 5);
        let wide = ModulationFunction::new(1.0, 3.0).unwrap();
        assert_eq!(modulation_levels(&wide, &g), vec![0, 1, 2, 3, 5]);
        assert!(matches!(effective_level(&wide, &g, 4), Err(LabError::LevelOutOfRange { .. })));
    }

    #[test]
    fn modulated_apply_examples() {
        let g = grid(128);
        let psi = ModulationFunction::new(1.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_symbol(g, 0.0, 4.0, &mut rng).unwrap();
        let u = random_field(g, 8, &mut rng);
        let exact = apply(&a, &u).unwrap();
        assert!(modulated_apply(&a, &u, &psi, 3).unwrap().max_diff(&exact) < 1e-13);
        let high = SpectralField::from_modes(g, &[([5, 0], Complex64::new(1.0, 0.0))]).unwrap();
        assert_eq!(modulated_apply(&a, &high, &psi, 0).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn ching_modulation_adds_terms_one_level_at_a_time() {
        let g = grid(256);
        let psi = ModulationFunction::new(1.0, 2.0).unwrap();
        let profile = BumpProfile::new([1, 0], ProfileShape::Bump { zero_order: 0 });
        let a = ching_symbol(g, 0.0, profile, 5).unwrap();
        // u = Σ_j e^{i 2^j x}: term j sends 2^j to 0 with weight A(θ) = 1
        let modes: Vec<_> = (0..=5).map(|j| ([1i64 << j, 0], Complex64::new(1.0, 0.0))).collect();
        let u = SpectralField::from_modes(g, &modes).unwrap();
        for m in 0..=6u32 {
            let v = modulated_apply(&a, &u, &psi, m).unwrap();
            // oracle: Σ_j ψ(2^{j−m}) ψ(2^{j−m}) over j ≤ 5
            let want: f64 = (0..=5).map(|j| psi.eval_dilated(2f64.powi(j), m as i64).powi(2)).sum();
            assert!((v.coeff([0, 0]).re - want).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn limit_of_band_limited_inputs() {
        let g = grid(256);
        let psis = [
            ModulationFunction::new(1.0, 2.0).unwrap(),
            ModulationFunction::new(1.5, 2.5).unwrap(),
            ModulationFunction::new(0.75, 1.75).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_symbol(g, 1.0, 6.0, &mut rng).unwrap();
        let u = random_field(g, 12, &mut rng);
        let rep = modulation_limit(&a, &u, &psis, 1e-10).unwrap();
        assert!(rep.converged);
        assert!(rep.psi_discrepancy <= 1e-12);
        for p in &rep.profiles {
            assert_eq!(p.stabilization_m, Some(forced_level(&a, &u, &p.psi).unwrap()));
        }
        assert!(rep.value.max_diff(&apply(&a, &u).unwrap()) < 1e-12);
    }

    #[test]
    fn composition_with_a_multiplier() {
        let g = grid(128);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_symbol(g, 1.0, 10.0, &mut rng).unwrap();
        let b = bessel_potential(g, -1.0);
        let c = compose_multiplier(&a, &b).unwrap();
        assert_eq!(c.order(), 0.0);
        let u = random_field(g, 30, &mut rng);
        let lhs = apply(&c, &u).unwrap();
        let rhs = apply(&a, &apply(&b, &u).unwrap()).unwrap();
        assert!(lhs.max_diff(&rhs) <= 1e-10 * u.max_abs());
        assert!(matches!(compose_multiplier(&b, &a), Err(LabError::NotAMultiplier)));
        let one = compose_multiplier(&a, &identity_symbol(g)).unwrap();
        assert!(one.sub(&a).unwrap().max_spectrum() == 0.0);
    }

    #[test]
    fn paraproduct_split_reconstructs() {
        let g = grid(256);
        let psi = ModulationFunction::new(1.0, 2.0).unwrap();
        let part = LPPartition::new(psi, g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_symbol(g, 0.5, 20.0, &mut rng).unwrap();
        let u = random_field(g, 40, &mut rng);
        for m in [0, 3, part.j_max()] {
            let split = para_split(&a, &u, &part, m).unwrap();
            let want = modulated_apply(&a, &u, &psi, m).unwrap();
            assert!(split.reconstruction().unwrap().max_diff(&want) < 1e-10, "m={m}");
        }
        assert!(para_split(&a, &u, &part, 9).is_err());
    }

    #[test]
    fn multiplier_split_has_no_third_series() {
        let g = grid(128);
        let part = LPPartition::new(ModulationFunction::new(1.0, 2.0).unwrap(), g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = bessel_potential(g, 1.0);
        let u = random_field(g, 20, &mut rng);
        let split = para_split(&b, &u, &part, part.j_max()).unwrap();
        assert_eq!(split.a3u.max_abs(), 0.0);
        assert!(split.reconstruction().unwrap().max_diff(&apply(&b, &u).unwrap()) < 1e-10);
    }

    #[test]
    fn split_terms_respect_coronas() {
        let g = grid(256);
        let part = LPPartition::new(ModulationFunction::new(1.0, 2.0).unwrap(), g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_symbol(g, 0.0, 30.0, &mut rng).unwrap();
        let u = random_field(g, 60, &mut rng);
        let split = para_split(&a, &u, &part, part.j_max()).unwrap();
        let rep = support_inclusions(&split).unwrap();
        assert!(rep.holds(), "{:?}", rep.violations);
        let big = random_field(g, 120, &mut rng);
        let split = para_split(&a, &big, &part, part.j_max()).unwrap();
        assert!(matches!(support_inclusions(&split), Err(LabError::AliasingRisk(_))));
    }

    #[test]
    fn support_bound_examples() {
        let g = grid(64);
        let mode = SpectralField::from_modes(g, &[([5, 0], Complex64::new(1.0, 0.0))]).unwrap();
        let bound = spectral_support_bound(&modulation_symbol(g, [3, 0]), &mode).unwrap();
        assert_eq!(bound, FreqSet::new(1, [[8, 0]]));
        let b = multiplier_symbol(g, 0.0, SymbolClass::S10, |f| {
            Complex64::new(if f[0].abs() < 3 { 1.0 } else { 0.0 }, 0.0)
        });
        let u = SpectralField::from_modes(g, &[([1, 0], 1.0.into()), ([4, 0], 1.0.into())]).unwrap();
        assert_eq!(spectral_support_bound(&b, &u).unwrap(), FreqSet::new(1, [[1, 0]]));
    }

    #[test]
    fn adjoint_probe_examples() {
        let g = grid(64);
        let b = bessel_potential(g, 1.0);
        let probe = discrete_adjoint_probe(&b, 256).unwrap();
        assert!(probe.adjoint.sub(&b).unwrap().max_spectrum() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_symbol(g, 0.0, 5.0, &mut rng).unwrap();
        let adj = discrete_adjoint_probe(&a, 256).unwrap().adjoint;
        let w = random_field(g, 20, &mut rng);
        assert!(apply(&adj, &w).unwrap().max_diff(&apply_adjoint(&a, &w).unwrap()) < 1e-12);
        assert!(matches!(discrete_adjoint_probe(&b, 32), Err(LabError::TooLarge { dim: 64, cap: 32 })));
    }
}
