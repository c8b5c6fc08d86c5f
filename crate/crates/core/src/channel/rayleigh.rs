use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::PerSubcarrier;
use crate::numeric::CMatrix;
use num_complex::Complex64;

/// I.i.d. `CN(0, 1)` concatenated channels for every subcarrier, reproducible from `seed`.
pub fn rayleigh_channel(users: usize, subarrays: usize, half: usize, seed: u64) -> PerSubcarrier<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rayleigh_channel_from(&mut rng, users, subarrays, half)
}

/// As [`rayleigh_channel`], drawing from a caller-owned stream.
pub fn rayleigh_channel_from<R: Rng + ?Sized>(
    rng: &mut R,
    users: usize,
    subarrays: usize,
    half: usize,
) -> PerSubcarrier<CMatrix> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    PerSubcarrier::from_fn(half, |_| {
        CMatrix::from_fn(users, subarrays, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(scale * re, scale * im)
        })
    })
}
