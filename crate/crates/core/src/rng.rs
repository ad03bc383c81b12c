/*
Copyright 2026 The proxsplit Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Portable seeded Gaussian noise.
//!
//! Uniforms come from xoshiro256** seeded through SplitMix64 (the reference
//! `seed_from_u64` construction), converted as `(next_u64 >> 11) · 2⁻⁵³`.
//! Normals use the Marsaglia polar method: draw `u` then `v` uniform on
//! `(−1, 1)`, reject unless `0 < s = u² + v² < 1`, and emit `u·f` followed by
//! `v·f` with `f = √(−2 ln s / s)`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        GaussianStream {
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            spare: None,
        }
    }

    /// The `k`-th independent stream derived from `seed`: the base generator
    /// advanced by `k` xoshiro jumps (2¹²⁸ steps each).
    pub fn substream(seed: u64, k: u32) -> Self {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        for _ in 0..k {
            rng.jump();
        }
        GaussianStream { rng, spare: None }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.next_uniform() - 1.0;
            let v = 2.0 * self.next_uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    /// `v + η` with `η` i.i.d. `N(0, variance)`.
    pub fn perturb(&mut self, v: &[f64], variance: f64) -> Vec<f64> {
        if variance == 0.0 {
            return v.to_vec();
        }
        let sd = variance.sqrt();
        v.iter().map(|x| x + sd * self.next_gaussian()).collect()
    }
}
