//! Low-discrepancy points for reproducible coverage of a box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BASES: [u64; 3] = [2, 3, 5];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// Halton sequence in `[0, 1)^3` with a seeded Cranley-Patterson shift.
#[derive(Debug, Clone)]
pub struct Halton3 {
    shift: [f64; 3],
    index: u64,
}

impl Halton3 {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = if seed == 0 {
            [0.0; 3]
        } else {
            [rng.random(), rng.random(), rng.random()]
        };
        Halton3 { shift, index: 1 }
    }
}

impl Iterator for Halton3 {
    type Item = [f64; 3];

    fn next(&mut self) -> Option<[f64; 3]> {
        let mut out = [0.0; 3];
        for d in 0..3 {
            out[d] = (radical_inverse(self.index, BASES[d]) + self.shift[d]).fract();
        }
        self.index += 1;
        Some(out)
    }
}
