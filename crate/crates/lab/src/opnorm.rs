//! Operator-norm lower bounds `sup ‖a(x,D)u‖_target / ‖u‖_source`.
//!
//! For `p = q = 2` the quasi-norm is the weighted coefficient norm
//! `Σ_ξ w_s(ξ)|û(ξ)|²` with `w_s = Σ_j 2^{2sj} φ_j²`, so the norm is the top
//! singular value of `W_t^{1/2} M W_s^{−1/2}`, found by power iteration with
//! the coefficient-domain adjoint. Other exponents use a corpus supremum.

use num_complex::Complex64;
use paradiff_core::operator::{apply, apply_adjoint};
use paradiff_core::spaces::{space_norm, NormSpec};
use paradiff_core::{DiscreteSymbol, LPPartition, SpectralField};
use rand::Rng;

use crate::corpus::{stream_rng, Stream};
use crate::error::RunResult;

pub const POWER_ITERATIONS: usize = 300;
pub const POWER_TOL: f64 = 1e-10;

/// `w_s(ξ) = Σ_{j ≤ J_max} 2^{2sj} φ_j(|ξ|)²`.
pub fn sobolev_weights(part: &LPPartition, s: f64) -> Vec<f64> {
    let grid = part.grid();
    (0..grid.len())
        .map(|i| {
            let t = grid.freq_norm_at(i);
            (0..=part.j_max() as i64)
                .map(|j| 2f64.powf(2.0 * s * j as f64) * part.block_multiplier(j, t).powi(2))
                .sum()
        })
        .collect()
}

/// Input frequencies where the truncated partition still sums to one and
/// which the operator maps without leaving the lattice box. Past
/// `r 2^{J_max}` the last block fades out and `w_s^{−1}` would blow up.
pub fn admissible_inputs(a: &DiscreteSymbol, part: &LPPartition) -> Vec<bool> {
    let grid = a.grid();
    let top = part.j_max() as i64;
    (0..grid.len())
        .map(|eta| {
            if part.cumulative_multiplier(top, grid.freq_norm_at(eta)) != 1.0 {
                return false;
            }
            let ef = grid.freq(eta);
            a.spectrum_column(eta).iter().enumerate().all(|(xi, c)| {
                let xf = grid.freq(xi);
                c.norm() == 0.0 || grid.index_of([xf[0] + ef[0], xf[1] + ef[1]]).is_some()
            })
        })
        .collect()
}

/// Zeroes the coefficients outside `mask`.
pub fn restrict(u: &SpectralField, mask: &[bool]) -> SpectralField {
    u.map_coeffs(|i, c| if mask[i] { c } else { Complex64::default() })
}

#[derive(Clone, Debug)]
pub struct PowerEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Maximizing input, normalized in the source norm.
    pub input: SpectralField,
}

fn coeff_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Top singular value of `a(x,D): H^{s_source} → H^{s_target}` restricted to
/// admissible inputs.
pub fn hilbert_operator_norm(
    a: &DiscreteSymbol,
    part: &LPPartition,
    s_source: f64,
    s_target: f64,
    seed: u64,
) -> RunResult<PowerEstimate> {
    let grid = a.grid();
    let ws = sobolev_weights(part, s_source);
    let wt = sobolev_weights(part, s_target);
    let mask = admissible_inputs(a, part);
    let mut rng = stream_rng(seed, Stream::Power, 0);
    let mut v: Vec<Complex64> = mask
        .iter()
        .map(|&m| if m { Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) } else { Complex64::default() })
        .collect();
    let to_input = |v: &[Complex64]| -> Vec<Complex64> {
        v.iter().zip(&ws).zip(&mask).map(|((c, w), &m)| if m { c / w.sqrt() } else { Complex64::default() }).collect()
    };
    let mut value = 0.0;
    let mut iterations = 0;
    for it in 1..=POWER_ITERATIONS {
        iterations = it;
        let norm = coeff_norm(&v);
        if norm == 0.0 {
            break;
        }
        v.iter_mut().for_each(|c| *c /= norm);
        let x = SpectralField::from_coeffs(grid, to_input(&v))?;
        let y = apply(a, &x)?;
        let weighted: Vec<Complex64> = y.coeffs().iter().zip(&wt).map(|(c, w)| c * w).collect();
        let next_value = y.coeffs().iter().zip(&wt).map(|(c, w)| c.norm_sqr() * w).sum::<f64>().sqrt();
        let back = apply_adjoint(a, &SpectralField::from_coeffs(grid, weighted)?)?;
        v = to_input(back.coeffs());
        let settled = (next_value - value).abs() <= POWER_TOL * next_value;
        value = next_value;
        if settled {
            break;
        }
    }
    let norm = coeff_norm(&v);
    if norm > 0.0 {
        v.iter_mut().for_each(|c| *c /= norm);
    }
    let input = SpectralField::from_coeffs(grid, to_input(&v))?;
    Ok(PowerEstimate { value, iterations, input })
}

/// `sup ‖a(x,D)u‖_{s − d} / ‖u‖_s` over the power-iteration maximizer and
/// the corpus, all restricted to admissible inputs.
pub fn operator_ratio(
    a: &DiscreteSymbol,
    source: &NormSpec,
    part: &LPPartition,
    corpus: &[SpectralField],
    seed: u64,
) -> RunResult<f64> {
    let target = source.with_s(source.s - a.order());
    let power = hilbert_operator_norm(a, part, source.s, target.s, seed)?;
    let hilbert = source.p == 2.0 && source.q == 2.0;
    let mask = admissible_inputs(a, part);
    let mut best: f64 = if hilbert { power.value } else { 0.0 };
    for u in corpus.iter().chain(std::iter::once(&power.input)) {
        let u = restrict(u, &mask);
        let den = space_norm(&u, source, part)?;
        if den == 0.0 {
            continue;
        }
        let num = space_norm(&apply(a, &u)?, &target, part)?;
        best = best.max(num / den);
    }
    Ok(best)
}
