//! Seeded inputs. Every corpus item draws from its own ChaCha stream so
//! items can be generated in any order.

use num_complex::Complex64;
use paradiff_core::{SpectralField, TorusGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Streams are namespaced per use so corpora do not share draws.
#[derive(Clone, Copy, Debug)]
pub enum Stream {
    Inputs = 1,
    Symbols = 2,
    Power = 3,
    Sequences = 4,
    Series = 5,
}

pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 32) | index);
    rng
}

fn complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Uniform random coefficients on `lo ≤ |k| ≤ hi`.
pub fn random_shell<R: Rng + ?Sized>(grid: TorusGrid, lo: f64, hi: f64, rng: &mut R) -> SpectralField {
    let coeffs = (0..grid.len())
        .map(|i| {
            let t = grid.freq_norm_at(i);
            let c = complex(rng);
            if t >= lo && t <= hi {
                c
            } else {
                Complex64::default()
            }
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs).expect("length matches the grid")
}

/// Uniform random coefficients on `|k| ≤ band`.
pub fn random_field<R: Rng + ?Sized>(grid: TorusGrid, band: f64, rng: &mut R) -> SpectralField {
    random_shell(grid, 0.0, band, rng)
}

/// `corpus_size` inputs with bands drawn from `[lo, hi]`.
pub fn input_corpus(grid: TorusGrid, seed: u64, count: usize, lo: f64, hi: f64) -> Vec<SpectralField> {
    (0..count)
        .map(|i| {
            let mut rng = stream_rng(seed, Stream::Inputs, i as u64);
            let band = rng.gen_range(lo..=hi).floor();
            random_field(grid, band, &mut rng)
        })
        .collect()
}
