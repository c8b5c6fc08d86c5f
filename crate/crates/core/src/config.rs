//! System dimensions and the OFDM subcarrier grid.
//!
//! Subcarriers are indexed `k ∈ {−K, …, −1, 1, …, K}` symmetrically around the
//! carrier; there is no DC subcarrier. Subcarrier `k` sits at
//! `f_c + k·B/(2K)`, so `±K` land exactly on the band edges and `k`, `−k` are
//! mirror images of each other about `f_c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::SPEED_OF_LIGHT;

/// Link dimensions, power and noise settings.
///
/// Key names carry SI units so configuration files are unambiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    /// `K`: half the number of subcarriers.
    pub half_subcarriers: usize,
    /// `N`: transmit subarrays, one RF chain each.
    pub tx_subarrays: usize,
    /// `M`: single-subarray users.
    pub users: usize,
    /// Elements per side of each square subarray (`Q_tot = side²`).
    pub elements_per_side: usize,
    /// Element spacing; half a wavelength at the carrier when absent.
    pub element_spacing_m: Option<f64>,
    /// Transmit power per active subcarrier per stream.
    pub power_w: f64,
    /// Noise power per subcarrier.
    pub noise_w: f64,
    pub tx_antenna_gain: f64,
    pub rx_antenna_gain: f64,
}

impl Default for SystemConfig {
    /// 300 GHz carrier, 10 GHz band, three subarrays serving three users with
    /// 16×16 elements each; `K = 64`.
    fn default() -> Self {
        Self {
            carrier_hz: 300e9,
            bandwidth_hz: 10e9,
            half_subcarriers: 64,
            tx_subarrays: 3,
            users: 3,
            elements_per_side: 16,
            element_spacing_m: None,
            power_w: 1.0,
            noise_w: 1.0,
            tx_antenna_gain: 1.0,
            rx_antenna_gain: 1.0,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        fn positive_finite(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(key, format!("must be finite and > 0, got {v}")))
            }
        }
        if self.half_subcarriers < 1 {
            return Err(Error::invalid("system.half_subcarriers", "must be >= 1"));
        }
        if self.tx_subarrays < 1 {
            return Err(Error::invalid("system.tx_subarrays", "must be >= 1"));
        }
        if self.users < 1 {
            return Err(Error::invalid("system.users", "must be >= 1"));
        }
        if self.users > self.tx_subarrays {
            return Err(Error::invalid(
                "system.users",
                format!(
                    "each user needs its own transmit subarray ({} users > {} subarrays)",
                    self.users, self.tx_subarrays
                ),
            ));
        }
        if self.elements_per_side < 1 {
            return Err(Error::invalid("system.elements_per_side", "must be >= 1"));
        }
        positive_finite("system.bandwidth_hz", self.bandwidth_hz)?;
        positive_finite("system.carrier_hz", self.carrier_hz)?;
        if self.carrier_hz <= self.bandwidth_hz / 2.0 {
            return Err(Error::invalid(
                "system.carrier_hz",
                "must exceed half the bandwidth",
            ));
        }
        if let Some(d) = self.element_spacing_m {
            positive_finite("system.element_spacing_m", d)?;
        }
        if !(self.power_w.is_finite() && self.power_w >= 0.0) {
            return Err(Error::invalid("system.power_w", "must be finite and >= 0"));
        }
        positive_finite("system.noise_w", self.noise_w)?;
        positive_finite("system.tx_antenna_gain", self.tx_antenna_gain)?;
        positive_finite("system.rx_antenna_gain", self.rx_antenna_gain)?;
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn element_spacing(&self) -> f64 {
        self.element_spacing_m
            .unwrap_or_else(|| self.wavelength_m() / 2.0)
    }

    pub fn elements_per_subarray(&self) -> usize {
        self.elements_per_side * self.elements_per_side
    }

    pub fn subcarrier_count(&self) -> usize {
        2 * self.half_subcarriers
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.bandwidth_hz / self.subcarrier_count() as f64
    }

    pub fn subcarrier(&self, k: i32) -> Result<Subcarrier> {
        Subcarrier::new(k, self.half_subcarriers)
    }

    /// `f_k = f_c + k·B/(2K)`.
    pub fn subcarrier_frequency(&self, k: Subcarrier) -> f64 {
        self.carrier_hz + f64::from(k.index()) * self.subcarrier_spacing_hz()
    }

    /// Every subcarrier in storage order `−K, …, −1, 1, …, K`.
    pub fn subcarriers(&self) -> impl Iterator<Item = Subcarrier> {
        Subcarrier::all(self.half_subcarriers)
    }
}

/// Free-function form of [`SystemConfig::subcarrier_frequency`] with index validation.
pub fn subcarrier_frequency(k: i32, cfg: &SystemConfig) -> Result<f64> {
    Ok(cfg.subcarrier_frequency(cfg.subcarrier(k)?))
}

/// A validated, nonzero subcarrier index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subcarrier(i32);

impl Subcarrier {
    pub fn new(k: i32, half: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k", "the DC subcarrier does not exist"));
        }
        if k.unsigned_abs() as usize > half {
            return Err(Error::invalid(
                "k",
                format!("|k| = {} exceeds K = {half}", k.unsigned_abs()),
            ));
        }
        Ok(Self(k))
    }

    pub fn index(self) -> i32 {
        self.0
    }

    /// The image subcarrier `−k`.
    pub fn mirror(self) -> Self {
        Self(-self.0)
    }

    fn slot(self, half: usize) -> usize {
        let h = half as i32;
        if self.0 < 0 {
            (self.0 + h) as usize
        } else {
            (self.0 + h - 1) as usize
        }
    }

    pub fn all(half: usize) -> impl Iterator<Item = Subcarrier> {
        let h = half as i32;
        (-h..=h).filter(|&k| k != 0).map(Subcarrier)
    }
}

/// One value per subcarrier, stored in `−K … −1, 1 … K` order.
#[derive(Debug, Clone, PartialEq)]
pub struct PerSubcarrier<T> {
    half: usize,
    values: Vec<T>,
}

impl<T> PerSubcarrier<T> {
    pub fn from_fn(half: usize, mut f: impl FnMut(Subcarrier) -> T) -> Self {
        Self {
            half,
            values: Subcarrier::all(half).map(&mut f).collect(),
        }
    }

    pub fn try_from_fn<E>(
        half: usize,
        mut f: impl FnMut(Subcarrier) -> std::result::Result<T, E>,
    ) -> std::result::Result<Self, E> {
        let values = Subcarrier::all(half)
            .map(&mut f)
            .collect::<std::result::Result<Vec<_>, E>>()?;
        Ok(Self { half, values })
    }

    /// Wraps values already in storage order. Fails unless there are exactly `2·half`.
    pub fn from_vec(half: usize, values: Vec<T>) -> Result<Self> {
        if half == 0 || values.len() != 2 * half {
            return Err(Error::Dimension(format!(
                "expected {} subcarrier values, got {}",
                2 * half,
                values.len()
            )));
        }
        Ok(Self { half, values })
    }

    pub fn half(&self) -> usize {
        self.half
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Panics if `k` belongs to a grid with a larger `K`.
    pub fn get(&self, k: Subcarrier) -> &T {
        assert!(
            k.index().unsigned_abs() as usize <= self.half,
            "subcarrier {} outside K = {}",
            k.index(),
            self.half
        );
        &self.values[k.slot(self.half)]
    }

    pub fn get_mut(&mut self, k: Subcarrier) -> &mut T {
        assert!(k.index().unsigned_abs() as usize <= self.half);
        let slot = k.slot(self.half);
        &mut self.values[slot]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Subcarrier, &T)> {
        Subcarrier::all(self.half).zip(self.values.iter())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn map<U>(&self, mut f: impl FnMut(Subcarrier, &T) -> U) -> PerSubcarrier<U> {
        PerSubcarrier {
            half: self.half,
            values: self.iter().map(|(k, v)| f(k, v)).collect(),
        }
    }
}
