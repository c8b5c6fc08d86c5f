use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::ResultTable;
use super::placement::place_users;
use super::scenario::{Band, NullingPolicy, Scenario};
use crate::beamforming::{
    analog_beamformers, concatenated_channels, without_cross_links, EffectiveChannels, Pairing,
    PowerAllocation,
};
use crate::channel::{element_positions, rayleigh_channel_from, ChannelSet};
use crate::config::PerSubcarrier;
use crate::error::Result;
use crate::impairments::{mismatch_matrices, noise_diagonal, IqiParams};
use crate::metrics::{low_snr_metrics, per_user_rate, se_approx};
use crate::numeric::{db_to_linear, mean_std, CMatrix};
use num_complex::Complex64;

/// The studies a [`Scenario`] can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    SlopeSweep,
    SeCurve,
    RateVsSnr,
    Nulling,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::SlopeSweep => "slope_sweep",
            Study::SeCurve => "se_curve",
            Study::RateVsSnr => "rate_vs_snr",
            Study::Nulling => "nulling",
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Concatenated channel of trial `trial`, before any interference toggle.
///
/// With `normalize_channel` the channel is scaled so the mean of `|h_c,mm|²`
/// over users and subcarriers is one.
pub fn trial_channels(scn: &Scenario, trial: usize) -> Result<PerSubcarrier<CMatrix>> {
    let cfg = &scn.system;
    let mut rng = trial_rng(scn.seed, trial);
    let hc = match scn.band {
        Band::Rayleigh => rayleigh_channel_from(&mut rng, cfg.users, cfg.tx_subarrays, cfg.half_subcarriers),
        Band::Thz => {
            let placement = place_users(cfg, &scn.placement, &mut rng)?;
            let geom = element_positions(cfg.elements_per_side, cfg.element_spacing())?;
            let set = ChannelSet::new(cfg, &placement, &geom)?;
            let beams = analog_beamformers(&placement, &geom, cfg.carrier_hz, &Pairing::identity(cfg.users))?;
            concatenated_channels(&set, &beams, scn.analog)
        }
    };
    if !scn.normalize_channel {
        return Ok(hc);
    }
    let diag: f64 = hc
        .values()
        .iter()
        .flat_map(|h| (0..h.nrows()).map(move |m| h[(m, m)].norm_sqr()))
        .sum();
    let mean = diag / (hc.len() * cfg.users) as f64;
    let scale = Complex64::new(mean.sqrt().recip(), 0.0);
    Ok(hc.map(|_, h| h * scale))
}

/// Run `f` on every trial in parallel; results come back in trial order.
fn per_trial<T: Send>(scn: &Scenario, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..scn.trials).into_par_iter().map(&f).collect()
}

fn apply_iui(scn: &Scenario, hc: PerSubcarrier<CMatrix>) -> PerSubcarrier<CMatrix> {
    if scn.interference.iui {
        hc
    } else {
        hc.map(|_, h| without_cross_links(h))
    }
}

fn iqi_params(scn: &Scenario, gain: f64, phase: f64) -> IqiParams {
    let (n, m) = (scn.system.tx_subarrays, scn.system.users);
    if scn.interference.iqi {
        IqiParams::sided(n, m, gain, phase, scn.iqi.tx_enabled, scn.iqi.rx_enabled)
    } else {
        IqiParams::perfect(n, m)
    }
}

fn sweep_iqi(scn: &Scenario, g: f64) -> IqiParams {
    iqi_params(scn, g, scn.sweeps.g_phase_deg.to_radians())
}

/// Low-SNR metrics of one trial under `params`.
fn trial_low_snr(scn: &Scenario, hc: &PerSubcarrier<CMatrix>, params: &IqiParams) -> Result<(f64, f64)> {
    let eff = EffectiveChannels::compute(hc, &mismatch_matrices(params)?)?;
    let noise = scn
        .slope_uses_iqi_noise
        .then(|| noise_diagonal(1.0, params));
    let lm = low_snr_metrics(&eff.hd, Some(&eff.hi), noise.as_deref())?;
    Ok((lm.ebn0_min_db, lm.slope))
}

/// Wideband slope against the amplitude error `g`: columns `g, slope_mean, slope_std, trials`.
pub fn sweep_slope_vs_g(scn: &Scenario) -> Result<ResultTable> {
    scn.validate()?;
    let gs = scn.sweeps.g.points();
    let slopes = per_trial(scn, |t| {
        let hc = apply_iui(scn, trial_channels(scn, t)?);
        gs.iter()
            .map(|&g| trial_low_snr(scn, &hc, &sweep_iqi(scn, g)).map(|(_, s)| s))
            .collect::<Result<Vec<f64>>>()
    })?;
    let rows = gs
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let column: Vec<f64> = slopes.iter().map(|s| s[i]).collect();
            let (mean, std) = mean_std(&column);
            vec![g, mean, std, scn.trials as f64]
        })
        .collect();
    Ok(ResultTable::new(
        scn,
        "slope_sweep",
        vec!["g".into(), "slope_mean".into(), "slope_std".into(), "trials".into()],
        rows,
    ))
}

/// Trial-averaged low-SNR operating point for one amplitude error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeSummary {
    pub g: f64,
    pub ebn0_min_db: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeCurves {
    pub table: ResultTable,
    pub summaries: Vec<SeSummary>,
}

/// Low-SNR spectral-efficiency lines, one per entry of `sweeps.g_list`:
/// columns `ebn0_db, se_g<g>…`.
pub fn sweep_se_vs_ebn0(scn: &Scenario) -> Result<SeCurves> {
    scn.validate()?;
    let gs = &scn.sweeps.g_list;
    let per = per_trial(scn, |t| {
        let hc = apply_iui(scn, trial_channels(scn, t)?);
        gs.iter()
            .map(|&g| trial_low_snr(scn, &hc, &sweep_iqi(scn, g)))
            .collect::<Result<Vec<(f64, f64)>>>()
    })?;
    let summaries: Vec<SeSummary> = gs
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let mins: Vec<f64> = per.iter().map(|p| p[i].0).collect();
            let slopes: Vec<f64> = per.iter().map(|p| p[i].1).collect();
            SeSummary {
                g,
                ebn0_min_db: mean_std(&mins).0,
                slope: mean_std(&slopes).0,
            }
        })
        .collect();
    let mut columns = vec!["ebn0_db".to_string()];
    columns.extend(gs.iter().map(|g| format!("se_g{g}")));
    let rows = scn
        .sweeps
        .ebn0_db
        .points()
        .into_iter()
        .map(|x| {
            let mut row = vec![x];
            row.extend(summaries.iter().map(|s| se_approx(x, s.ebn0_min_db, s.slope)));
            row
        })
        .collect();
    Ok(SeCurves {
        table: ResultTable::new(scn, "se_curve", columns, rows),
        summaries,
    })
}

/// Sum over active subcarriers and users of `log2(1 + γ)`.
///
/// Subcarrier `k` transmits at `allocation.power(k)`; its image leaks at the
/// power of `−k`. `hi = None` drops image leakage entirely.
pub fn band_rate(
    hd: &PerSubcarrier<CMatrix>,
    hi: Option<&PerSubcarrier<CMatrix>>,
    allocation: &PowerAllocation,
    noise: &[f64],
) -> f64 {
    hd.iter()
        .filter(|(k, _)| allocation.is_active(*k))
        .map(|(k, h)| {
            per_user_rate(
                h,
                hi.map(|hi| hi.get(k)),
                allocation.power(k),
                allocation.power(k.mirror()),
                noise,
            )
        })
        .sum()
}

fn snr_powers(scn: &Scenario) -> Vec<(f64, f64)> {
    scn.sweeps
        .snr_db
        .points()
        .into_iter()
        .map(|db| (db, scn.system.noise_w * db_to_linear(db)))
        .collect()
}

fn mean_columns(per: &[Vec<Vec<f64>>], row: usize, cols: usize) -> Vec<f64> {
    (0..cols)
        .map(|c| per.iter().map(|t| t[row][c]).sum::<f64>() / per.len() as f64)
        .collect()
}

/// Trial-averaged sum rate against SNR `= P/σ²` for four interference settings:
/// columns `snr_db, rate_noint, rate_iui, rate_iqi, rate_iqi_iui`.
///
/// The imbalance is the scenario's resolved `iqi`; the interference toggles
/// are ignored because every combination is reported.
pub fn sweep_rate_vs_snr(scn: &Scenario) -> Result<ResultTable> {
    scn.validate()?;
    let cfg = &scn.system;
    let resolved = scn.iqi.resolve()?;
    let params = IqiParams::sided(
        cfg.tx_subarrays,
        cfg.users,
        resolved.gain,
        resolved.phase,
        scn.iqi.tx_enabled,
        scn.iqi.rx_enabled,
    );
    let mm = mismatch_matrices(&params)?;
    let sigma2 = vec![cfg.noise_w; cfg.users];
    let zbar = noise_diagonal(cfg.noise_w, &params);
    let powers = snr_powers(scn);
    let half = cfg.half_subcarriers;
    let per = per_trial(scn, |t| {
        let full = trial_channels(scn, t)?;
        let diag = full.map(|_, h| without_cross_links(h));
        let eff_full = EffectiveChannels::compute(&full, &mm)?;
        let eff_diag = EffectiveChannels::compute(&diag, &mm)?;
        Ok(powers
            .iter()
            .map(|&(_, p)| {
                let alloc = PowerAllocation::full_band(half, p);
                vec![
                    band_rate(&diag, None, &alloc, &sigma2),
                    band_rate(&full, None, &alloc, &sigma2),
                    band_rate(&eff_diag.hd, Some(&eff_diag.hi), &alloc, &zbar),
                    band_rate(&eff_full.hd, Some(&eff_full.hi), &alloc, &zbar),
                ]
            })
            .collect::<Vec<_>>())
    })?;
    let rows = powers
        .iter()
        .enumerate()
        .map(|(i, &(db, _))| {
            let mut row = vec![db];
            row.extend(mean_columns(&per, i, 4));
            row
        })
        .collect();
    Ok(ResultTable::new(
        scn,
        "rate_vs_snr",
        ["snr_db", "rate_noint", "rate_iui", "rate_iqi", "rate_iqi_iui"]
            .map(String::from)
            .to_vec(),
        rows,
    ))
}

/// Full-band transmission against image-subcarrier nulling:
/// columns `snr_db, rate_full, rate_nulled`.
pub fn sweep_nulling(scn: &Scenario) -> Result<ResultTable> {
    scn.validate()?;
    let cfg = &scn.system;
    let resolved = scn.iqi.resolve()?;
    let params = iqi_params(scn, resolved.gain, resolved.phase);
    let mm = mismatch_matrices(&params)?;
    let zbar = noise_diagonal(cfg.noise_w, &params);
    let powers = snr_powers(scn);
    let half = cfg.half_subcarriers;
    let nulled_scale = match scn.nulling {
        NullingPolicy::Pooled => 2.0,
        NullingPolicy::Fixed => 1.0,
    };
    let per = per_trial(scn, |t| {
        let hc = apply_iui(scn, trial_channels(scn, t)?);
        let eff = EffectiveChannels::compute(&hc, &mm)?;
        Ok(powers
            .iter()
            .map(|&(_, p)| {
                let full = PowerAllocation::full_band(half, p);
                let nulled = PowerAllocation::image_nulled(half, nulled_scale * p);
                vec![
                    band_rate(&eff.hd, Some(&eff.hi), &full, &zbar),
                    band_rate(&eff.hd, Some(&eff.hi), &nulled, &zbar),
                ]
            })
            .collect::<Vec<_>>())
    })?;
    let rows = powers
        .iter()
        .enumerate()
        .map(|(i, &(db, _))| {
            let mut row = vec![db];
            row.extend(mean_columns(&per, i, 2));
            row
        })
        .collect();
    Ok(ResultTable::new(
        scn,
        "nulling",
        ["snr_db", "rate_full", "rate_nulled"].map(String::from).to_vec(),
        rows,
    ))
}
