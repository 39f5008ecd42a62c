//! Seeded pseudo-random test points. ChaCha8 keeps streams identical across platforms.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::PolyCone;
use crate::numerics::Vector;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in `[-radius, radius]^dim`.
pub fn uniform_box(rng: &mut SampleRng, dim: usize, radius: f64) -> Vector {
    Vector::from_vec((0..dim).map(|_| rng.random_range(-radius..radius)).collect())
}

/// Random nonnegative combination of the cone's generators with weights in `[0, 1)`.
pub fn cone_point(rng: &mut SampleRng, cone: &PolyCone) -> Vector {
    let mut x = Vector::zeros(cone.dim());
    for g in cone.generators() {
        let w: f64 = rng.random();
        x = x.axpy(w, g);
    }
    x
}

/// Random point with approximately `zero_fraction` of its entries set to exactly zero.
pub fn sparse_box(rng: &mut SampleRng, dim: usize, radius: f64, zero_fraction: f64) -> Vector {
    Vector::from_vec(
        (0..dim)
            .map(|_| {
                if rng.random::<f64>() < zero_fraction {
                    0.0
                } else {
                    rng.random_range(-radius..radius)
                }
            })
            .collect(),
    )
}
