use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beamforming::EffectiveChannels;
use crate::channel::rayleigh_channel_from;
use crate::error::Result;
use crate::impairments::{mismatch_matrices, ChainImbalance, IqiParams};
use crate::metrics::{capacity_nats, low_snr_metrics, natural_step, numeric_slope_oracle};

/// Agreement between the closed-form low-SNR metrics and the numeric derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub instances: usize,
    /// Worst relative disagreement in minimum bit energy (linear) or slope.
    pub max_relative_error: f64,
    /// Instance at which the worst disagreement occurred.
    pub worst_instance: usize,
}

/// Compare closed form and oracle on `instances` random channels, each with
/// and without random per-chain imbalance.
pub fn oracle_check(instances: usize, seed: u64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0_f64, 0_usize);
    for i in 0..instances {
        let half = rng.random_range(1..=4);
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=n);
        let hc = rayleigh_channel_from(&mut rng, m, n, half);
        let chain = |rng: &mut ChaCha8Rng| {
            ChainImbalance::new(
                rng.random_range(0.6..=1.0),
                rng.random_range(-10f64..=10.0).to_radians(),
            )
        };
        let params = IqiParams {
            tx: (0..n).map(|_| chain(&mut rng)).collect(),
            rx: (0..m).map(|_| chain(&mut rng)).collect(),
        };
        let eff = EffectiveChannels::compute(&hc, &mismatch_matrices(&params)?)?;
        for (hd, hi) in [(&hc, None), (&eff.hd, Some(&eff.hi))] {
            let closed = low_snr_metrics(hd, hi, None)?;
            let numeric = numeric_slope_oracle(
                capacity_nats(hd, hi, None),
                n,
                hd.len(),
                natural_step(hd, hi, None),
            )?;
            let err = ((closed.ebn0_min - numeric.ebn0_min) / numeric.ebn0_min)
                .abs()
                .max(((closed.slope - numeric.slope) / numeric.slope).abs());
            if err > worst.0 {
                worst = (err, i);
            }
        }
    }
    Ok(OracleReport {
        instances,
        max_relative_error: worst.0,
        worst_instance: worst.1,
    })
}
