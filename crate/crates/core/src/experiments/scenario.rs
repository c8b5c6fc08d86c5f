use serde::{Deserialize, Serialize};

use super::placement::PlacementConfig;
use crate::beamforming::AnalogDesign;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::impairments::{amplitude_from_irr, irr_db, phase_from_irr, IqiParams};

/// Which channel model feeds the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// Line-of-sight array-of-subarrays channel with analog beamforming.
    Thz,
    /// I.i.d. Rayleigh concatenated channel (conventional frequencies).
    Rayleigh,
}

impl Band {
    pub fn name(self) -> &'static str {
        match self {
            Band::Thz => "thz",
            Band::Rayleigh => "rayleigh",
        }
    }
}

impl std::str::FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thz" => Ok(Band::Thz),
            "rayleigh" => Ok(Band::Rayleigh),
            other => Err(Error::invalid("band", format!("expected thz or rayleigh, got `{other}`"))),
        }
    }
}

/// What to do when the requested image rejection cannot be reached at the configured phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrrFallback {
    /// Keep the phase error, use the amplitude with the highest reachable IRR (`g = 1`).
    #[default]
    ClosestAmplitude,
    /// Keep the IRR, use `g = 1` and shrink the phase error until it is met.
    ReducePhase,
}

/// Imbalance applied to the enabled converter chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IqiConfig {
    /// Amplitude error `g`.
    pub g: f64,
    pub phase_deg: f64,
    /// When set, `g` is derived from this image rejection ratio and `phase_deg`.
    pub irr_db: Option<f64>,
    pub irr_fallback: IrrFallback,
    pub tx_enabled: bool,
    pub rx_enabled: bool,
}

impl Default for IqiConfig {
    fn default() -> Self {
        Self {
            g: 1.0,
            phase_deg: 5.0,
            irr_db: None,
            irr_fallback: IrrFallback::ClosestAmplitude,
            tx_enabled: true,
            rx_enabled: true,
        }
    }
}

/// Concrete `(g, Φ)` after resolving an IRR request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedIqi {
    pub gain: f64,
    pub phase: f64,
    /// Receive-chain image rejection actually achieved.
    pub irr_db: f64,
    /// True when the requested IRR was infeasible and the fallback applied.
    pub fallback_used: bool,
}

impl IqiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.g.is_finite() && self.g > 0.0 && self.g <= 1.1) {
            return Err(Error::invalid("iqi.g", format!("must lie in (0, 1.1], got {}", self.g)));
        }
        if !(self.phase_deg.is_finite() && self.phase_deg.abs() < 90.0) {
            return Err(Error::invalid("iqi.phase_deg", "must lie in (-90, 90)"));
        }
        if let Some(irr) = self.irr_db {
            if !(irr > 0.0) {
                return Err(Error::invalid("iqi.irr_db", "must be > 0 dB"));
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<ResolvedIqi> {
        self.validate()?;
        let phase = self.phase_deg.to_radians();
        let (gain, phase, fallback_used) = match self.irr_db {
            None => (self.g, phase, false),
            Some(irr) => match amplitude_from_irr(irr, phase) {
                Ok(g) => (g, phase, false),
                Err(Error::InfeasibleIrr { .. }) => match self.irr_fallback {
                    IrrFallback::ClosestAmplitude => (1.0, phase, true),
                    IrrFallback::ReducePhase => (1.0, phase_from_irr(irr)?, true),
                },
                Err(e) => return Err(e),
            },
        };
        Ok(ResolvedIqi {
            gain,
            phase,
            irr_db: irr_db(gain, phase)?,
            fallback_used,
        })
    }

    /// Chain parameters for `tx_chains` transmit and `rx_chains` receive chains.
    pub fn params(&self, tx_chains: usize, rx_chains: usize) -> Result<IqiParams> {
        let r = self.resolve()?;
        Ok(IqiParams::sided(
            tx_chains,
            rx_chains,
            r.gain,
            r.phase,
            self.tx_enabled,
            self.rx_enabled,
        ))
    }
}

/// Interference sources kept in the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Interference {
    /// Image-band leakage from I/Q imbalance.
    pub iqi: bool,
    /// Inter-user interference (off-diagonal concatenated-channel entries).
    pub iui: bool,
}

impl Default for Interference {
    fn default() -> Self {
        Self { iqi: true, iui: true }
    }
}

/// Power bookkeeping for the image-nulled mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullingPolicy {
    /// Power of the silenced images moves to the active subcarriers (`2P` each).
    #[default]
    Pooled,
    /// Every active subcarrier keeps `P`.
    Fixed,
}

/// Inclusive arithmetic sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::invalid(key, "sweep bounds must be finite"));
        }
        if !(self.step > 0.0) {
            return Err(Error::invalid(format!("{key}.step"), "must be > 0"));
        }
        if self.stop < self.start {
            return Err(Error::invalid(key, "sweep is empty (stop < start)"));
        }
        if (self.stop - self.start) / self.step > 1e6 {
            return Err(Error::invalid(format!("{key}.step"), "more than a million sweep points"));
        }
        Ok(())
    }

    /// Sweep points; the last one is `stop` whenever `stop − start` is a
    /// multiple of `step` up to rounding.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweeps {
    pub snr_db: SweepRange,
    /// Amplitude errors for the slope study.
    pub g: SweepRange,
    /// Phase error applied throughout the slope and spectral-efficiency studies.
    pub g_phase_deg: f64,
    pub ebn0_db: SweepRange,
    /// One spectral-efficiency curve per entry.
    pub g_list: Vec<f64>,
}

impl Default for Sweeps {
    fn default() -> Self {
        Self {
            snr_db: SweepRange::new(0.0, 60.0, 5.0),
            g: SweepRange::new(0.7, 1.0, 0.05),
            g_phase_deg: 0.0,
            ebn0_db: SweepRange::new(-2.0, 10.0, 0.5),
            g_list: vec![0.9, 0.8, 0.7],
        }
    }
}

/// Everything needed to reproduce a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub system: SystemConfig,
    pub band: Band,
    pub placement: PlacementConfig,
    pub iqi: IqiConfig,
    pub interference: Interference,
    pub analog: AnalogDesign,
    /// Scale each trial's concatenated channel to unit mean diagonal power,
    /// so the SNR axis is the per-stream receive SNR of a beam-aligned link.
    pub normalize_channel: bool,
    /// Use the imbalance-inflated receive noise in the low-SNR metrics instead of unit noise.
    pub slope_uses_iqi_noise: bool,
    pub nulling: NullingPolicy,
    pub sweeps: Sweeps,
    pub trials: usize,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            band: Band::Thz,
            placement: PlacementConfig::default(),
            iqi: IqiConfig::default(),
            interference: Interference::default(),
            analog: AnalogDesign::FrequencyFlat,
            normalize_channel: true,
            slope_uses_iqi_noise: false,
            nulling: NullingPolicy::Pooled,
            sweeps: Sweeps::default(),
            trials: 100,
            seed: 1,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.placement.validate()?;
        self.iqi.validate()?;
        if self.trials < 1 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        self.sweeps.snr_db.validate("sweeps.snr_db")?;
        self.sweeps.g.validate("sweeps.g")?;
        self.sweeps.ebn0_db.validate("sweeps.ebn0_db")?;
        if !(self.sweeps.g.start > 0.0 && self.sweeps.g.stop <= 1.1) {
            return Err(Error::invalid("sweeps.g", "amplitude errors must lie in (0, 1.1]"));
        }
        if !(self.sweeps.g_phase_deg.is_finite() && self.sweeps.g_phase_deg.abs() < 90.0) {
            return Err(Error::invalid("sweeps.g_phase_deg", "must lie in (-90, 90)"));
        }
        if self.sweeps.g_list.is_empty() {
            return Err(Error::invalid("sweeps.g_list", "must not be empty"));
        }
        if let Some(g) = self.sweeps.g_list.iter().find(|g| !(g.is_finite() && **g > 0.0 && **g <= 1.1)) {
            return Err(Error::invalid("sweeps.g_list", format!("{g} is outside (0, 1.1]")));
        }
        Ok(())
    }

    /// Canonical single-line serialisation echoed into every output file.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("scenario serialises")
    }

    /// The 300 GHz reference setting: 10 GHz bandwidth, three 16×16
    /// subarrays, three users, 5° phase error and a 30 dB image-rejection
    /// target (infeasible at 5°, so the closest reachable amplitude is used).
    pub fn reference() -> Self {
        Self {
            iqi: IqiConfig {
                irr_db: Some(30.0),
                ..IqiConfig::default()
            },
            ..Self::default()
        }
    }
}
