//! Seeded random parameter draws over the desk-scale box used by the
//! property checks: `r, k` in `[0.1, 5]`, off-diagonal `m` in `[0, 2]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::ModelParams;
use crate::topology::{apply_topology, TopologyId};

pub const RATE_RANGE: (f64, f64) = (0.1, 5.0);
pub const MIGRATION_RANGE: (f64, f64) = (0.0, 2.0);

#[derive(Debug, Clone)]
pub struct ParamSampler {
    rng: ChaCha8Rng,
}

impl ParamSampler {
    pub fn new(seed: u64) -> Self {
        ParamSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn draw(&mut self) -> ModelParams {
        let (lo, hi) = RATE_RANGE;
        let r = [self.uniform(lo, hi), self.uniform(lo, hi), self.uniform(lo, hi)];
        let k = [self.uniform(lo, hi), self.uniform(lo, hi), self.uniform(lo, hi)];
        let (mlo, mhi) = MIGRATION_RANGE;
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if i != j {
                    *v = self.uniform(mlo, mhi);
                }
            }
        }
        ModelParams::new(r, k, m).expect("sampled parameters are valid")
    }

    /// A draw projected onto `topo`.
    pub fn draw_for(&mut self, topo: TopologyId) -> ModelParams {
        apply_topology(&self.draw(), topo)
    }
}
