use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DiscreteSymbol, SymbolClass};
use crate::error::{LabError, Result};
use crate::torus::{freq_norm, Freq, TorusGrid};

/// Radius of the bump around θ in the Ching profile.
pub const PROFILE_RADIUS: f64 = 0.25;

/// `exp(1 − 1/(1 − t²))` on `|t| < 1`, zero elsewhere; equals 1 at `t = 0`.
fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileShape {
    /// Bump centered at θ times `((ω − θ)·θ/|θ| / radius)^zero_order`, so that
    /// the profile vanishes to that order at θ.
    Bump { zero_order: u32 },
    /// Radial ring around θ vanishing on `|ω − θ| ≤ inner`.
    Ring { inner: f64 },
}

/// Profile `A` for Ching symbols, supported in the disc of radius 1/4 around θ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub theta: Freq,
    pub shape: ProfileShape,
}

impl BumpProfile {
    pub fn new(theta: Freq, shape: ProfileShape) -> Self {
        Self { theta, shape }
    }

    pub fn eval(&self, w: [f64; 2]) -> f64 {
        let th = [self.theta[0] as f64, self.theta[1] as f64];
        let z = [(w[0] - th[0]) / PROFILE_RADIUS, (w[1] - th[1]) / PROFILE_RADIUS];
        let dist = z[0].hypot(z[1]);
        match self.shape {
            ProfileShape::Bump { zero_order } => {
                let len = th[0].hypot(th[1]);
                let along = (z[0] * th[0] + z[1] * th[1]) / len;
                bump(dist) * along.powi(zero_order as i32)
            }
            ProfileShape::Ring { inner } => {
                let lo = inner / PROFILE_RADIUS;
                if dist <= lo {
                    0.0
                } else {
                    bump((2.0 * dist - 1.0 - lo) / (1.0 - lo))
                }
            }
        }
    }

    /// `|A(θ)|`.
    pub fn value_at_theta(&self) -> f64 {
        self.eval([self.theta[0] as f64, self.theta[1] as f64]).abs()
    }

    fn validate(&self) -> Result<()> {
        let len = freq_norm(self.theta);
        if len - PROFILE_RADIUS < 0.75 - 1e-12 || len + PROFILE_RADIUS > 1.25 + 1e-12 {
            return Err(LabError::InvalidInput(format!(
                "profile around θ = {:?} leaves the annulus 3/4 ≤ |η| ≤ 5/4",
                self.theta
            )));
        }
        if let ProfileShape::Ring { inner } = self.shape {
            if !(0.0..PROFILE_RADIUS).contains(&inner) {
                return Err(LabError::InvalidInput(format!("ring inner radius {inner}")));
            }
        }
        Ok(())
    }
}

/// x-independent symbol `b(η)`.
pub fn multiplier_symbol(
    grid: TorusGrid,
    order: f64,
    class: SymbolClass,
    b: impl Fn(Freq) -> Complex64 + Send + Sync + 'static,
) -> DiscreteSymbol {
    DiscreteSymbol::from_spectrum_fn(grid, order, class, 0.0, move |eta| {
        let mut col = vec![Complex64::default(); grid.len()];
        col[0] = b(grid.freq(eta));
        col
    })
    .expect("zero x-band always fits")
}

pub fn identity_symbol(grid: TorusGrid) -> DiscreteSymbol {
    multiplier_symbol(grid, 0.0, SymbolClass::S10, |_| Complex64::new(1.0, 0.0))
}

/// `(1 + |η|²)^{d/2}`.
pub fn bessel_potential(grid: TorusGrid, d: f64) -> DiscreteSymbol {
    multiplier_symbol(grid, d, SymbolClass::SmoothedMultiplier, move |f| {
        let t = freq_norm(f);
        Complex64::new((1.0 + t * t).powf(d / 2.0), 0.0)
    })
}

/// `e^{iθ·x}`, independent of `η`.
pub fn modulation_symbol(grid: TorusGrid, theta: Freq) -> DiscreteSymbol {
    let idx = grid.wrap_index(theta);
    DiscreteSymbol::from_spectrum_fn(grid, 0.0, SymbolClass::S10, freq_norm(theta), move |_| {
        let mut col = vec![Complex64::default(); grid.len()];
        col[idx] = Complex64::new(1.0, 0.0);
        col
    })
    .expect("modulation frequency must lie on the lattice")
}

/// `Σ_{j=0}^{J} 2^{jd} e^{−i2^j x·θ} A(2^{−j}η)`.
pub fn ching_symbol(grid: TorusGrid, d: f64, profile: BumpProfile, levels: u32) -> Result<DiscreteSymbol> {
    profile.validate()?;
    let top = 5.0 * 2f64.powi(levels as i32 - 2);
    if top >= grid.nyquist() as f64 {
        return Err(LabError::GridTooCoarse(format!(
            "Ching terms up to level {levels} reach |η| = {top}, nyquist is {}",
            grid.nyquist()
        )));
    }
    let theta = profile.theta;
    let x_band = 2f64.powi(levels as i32) * freq_norm(theta);
    DiscreteSymbol::from_spectrum_fn(grid, d, SymbolClass::Ching, x_band, move |eta| {
        let mut col = vec![Complex64::default(); grid.len()];
        let f = grid.freq(eta);
        for j in 0..=levels {
            let scale = 2f64.powi(-(j as i32));
            let v = profile.eval([f[0] as f64 * scale, f[1] as f64 * scale]);
            if v != 0.0 {
                let xi = [-(theta[0] << j), -(theta[1] << j)];
                col[grid.wrap_index(xi)] += 2f64.powf(j as f64 * d) * v;
            }
        }
        col
    })
}

/// Random symbol `Σ_l c_l e^{iξ_l·x} (1+|η|²)^{d/2} (1 + ½cos(ω_l log(1+|η|²) + φ_l))`
/// with `ξ_0 = 0` and the remaining `|ξ_l| ≤ x_band`.
pub fn random_symbol<R: Rng + ?Sized>(
    grid: TorusGrid,
    order: f64,
    x_band: f64,
    rng: &mut R,
) -> Result<DiscreteSymbol> {
    let half = grid.nyquist() as i64;
    let bound = x_band.min(grid.max_freq_norm());
    let mut modes: Vec<(usize, Complex64, f64, f64)> = Vec::new();
    let mut band: f64 = 0.0;
    for l in 0..5 {
        let xi = if l == 0 {
            [0, 0]
        } else {
            loop {
                let c = bound.floor() as i64;
                let a = rng.gen_range(-c.min(half)..=c.min(half - 1));
                let b = if grid.dim() == 2 { rng.gen_range(-c.min(half)..=c.min(half - 1)) } else { 0 };
                if freq_norm([a, b]) <= bound {
                    break [a, b];
                }
            }
        };
        band = band.max(freq_norm(xi));
        let amp = rng.gen_range(0.2..1.0) / (1 + l) as f64;
        let c = Complex64::from_polar(amp, rng.gen_range(0.0..std::f64::consts::TAU));
        modes.push((grid.wrap_index(xi), c, rng.gen_range(0.1..1.0), rng.gen_range(0.0..std::f64::consts::TAU)));
    }
    DiscreteSymbol::from_spectrum_fn(grid, order, SymbolClass::S10, band, move |eta| {
        let t2 = grid.freq_norm_at(eta).powi(2);
        let base = (1.0 + t2).powf(order / 2.0);
        let mut col = vec![Complex64::default(); grid.len()];
        for &(idx, c, w, ph) in &modes {
            col[idx] += c * base * (1.0 + 0.5 * (w * (1.0 + t2).ln() + ph).cos());
        }
        col
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_shapes() {
        let p = BumpProfile::new([1, 0], ProfileShape::Bump { zero_order: 0 });
        assert_eq!(p.value_at_theta(), 1.0);
        assert_eq!(p.eval([1.25, 0.0]), 0.0);
        let p1 = BumpProfile::new([1, 0], ProfileShape::Bump { zero_order: 1 });
        assert_eq!(p1.value_at_theta(), 0.0);
        assert!(p1.eval([1.1, 0.0]) > 0.0 && p1.eval([0.9, 0.0]) < 0.0);
        let ring = BumpProfile::new([0, 1], ProfileShape::Ring { inner: 0.125 });
        assert_eq!(ring.eval([0.0, 1.1]), 0.0);
        assert!(ring.eval([0.0, 1.2]) > 0.0);
        assert_eq!(ring.eval([0.0, 1.25]), 0.0);
    }

    #[test]
    fn ching_preconditions() {
        let g = TorusGrid::new(1, 64).unwrap();
        let p = BumpProfile::new([1, 0], ProfileShape::Bump { zero_order: 0 });
        assert!(ching_symbol(g, 0.0, p.clone(), 4).is_ok());
        assert!(matches!(ching_symbol(g, 0.0, p, 5), Err(LabError::GridTooCoarse(_))));
        let far = BumpProfile::new([2, 0], ProfileShape::Bump { zero_order: 0 });
        assert!(ching_symbol(g, 0.0, far, 2).is_err());
    }

    #[test]
    fn ching_terms_are_disjoint_in_eta() {
        let g = TorusGrid::new(1, 512).unwrap();
        let p = BumpProfile::new([1, 0], ProfileShape::Bump { zero_order: 0 });
        let a = ching_symbol(g, 0.5, p, 7).unwrap();
        for eta in 0..g.len() {
            let nonzero = a.spectrum_column(eta).iter().filter(|c| c.norm() > 0.0).count();
            assert!(nonzero <= 1);
        }
    }

    #[test]
    fn single_ching_term_values() {
        let g = TorusGrid::new(1, 32).unwrap();
        let p = BumpProfile::new([1, 0], ProfileShape::Bump { zero_order: 0 });
        let a = ching_symbol(g, 0.0, p, 0).unwrap();
        let eta = g.index_of([1, 0]).unwrap();
        for x in 0..g.len() {
            let want = Complex64::from_polar(1.0, -g.point(x)[0]);
            assert!((a.value(x, eta) - want).norm() < 1e-14);
        }
    }
}
