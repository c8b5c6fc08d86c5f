use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{Direction, LinkGeometry, UserPlacement};
use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Angular cone and spacing rules for random user placement. Angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlacementConfig {
    pub distance_m: f64,
    pub azimuth_min_deg: f64,
    pub azimuth_max_deg: f64,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    /// Smallest angle between departures from one subarray, and between arrivals at one user.
    pub min_separation_deg: f64,
    /// Rejection-sampling budget per direction.
    pub max_attempts: usize,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            distance_m: 5.0,
            azimuth_min_deg: -60.0,
            azimuth_max_deg: 60.0,
            elevation_min_deg: 80.0,
            elevation_max_deg: 100.0,
            min_separation_deg: 5.0,
            max_attempts: 10_000,
        }
    }
}

impl PlacementConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance_m.is_finite() && self.distance_m > 0.0) {
            return Err(Error::invalid("placement.distance_m", "must be finite and > 0"));
        }
        if !(-180.0 <= self.azimuth_min_deg
            && self.azimuth_min_deg <= self.azimuth_max_deg
            && self.azimuth_max_deg <= 180.0)
        {
            return Err(Error::invalid(
                "placement.azimuth_min_deg",
                "need -180 <= azimuth_min_deg <= azimuth_max_deg <= 180",
            ));
        }
        if !(0.0 <= self.elevation_min_deg
            && self.elevation_min_deg <= self.elevation_max_deg
            && self.elevation_max_deg <= 180.0)
        {
            return Err(Error::invalid(
                "placement.elevation_min_deg",
                "need 0 <= elevation_min_deg <= elevation_max_deg <= 180",
            ));
        }
        if !(self.min_separation_deg.is_finite() && self.min_separation_deg >= 0.0) {
            return Err(Error::invalid("placement.min_separation_deg", "must be >= 0"));
        }
        if self.max_attempts == 0 {
            return Err(Error::invalid("placement.max_attempts", "must be >= 1"));
        }
        Ok(())
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Direction {
        let az = rng.random_range(self.azimuth_min_deg..=self.azimuth_max_deg);
        let el = rng.random_range(self.elevation_min_deg..=self.elevation_max_deg);
        Direction::new(az.to_radians(), el.to_radians())
    }

    fn draw_separated<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        taken: &[Direction],
        what: &str,
    ) -> Result<Direction> {
        let min_sep = self.min_separation_deg.to_radians();
        for _ in 0..self.max_attempts {
            let d = self.draw(rng);
            if taken.iter().all(|t| t.separation(&d) >= min_sep) {
                return Ok(d);
            }
        }
        Err(Error::Placement(format!(
            "no {what} at least {}° from the others after {} attempts; widen the cone or lower the separation",
            self.min_separation_deg, self.max_attempts
        )))
    }
}

/// Random link geometry for every (user, subarray) pair at the configured distance.
///
/// Departures from each subarray toward different users, and arrivals at each
/// user from different subarrays, are at least `min_separation_deg` apart.
pub fn place_users<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    spec: &PlacementConfig,
    rng: &mut R,
) -> Result<UserPlacement> {
    spec.validate()?;
    let (users, subarrays) = (cfg.users, cfg.tx_subarrays);
    let mut links: Vec<LinkGeometry> = Vec::with_capacity(users * subarrays);
    for m in 0..users {
        for n in 0..subarrays {
            let departures: Vec<Direction> = (0..m).map(|u| links[u * subarrays + n].departure).collect();
            let departure = spec.draw_separated(rng, &departures, "departure direction")?;
            let arrivals: Vec<Direction> = links[m * subarrays..].iter().map(|l| l.arrival).collect();
            let arrival = spec.draw_separated(rng, &arrivals, "arrival direction")?;
            links.push(LinkGeometry {
                distance_m: spec.distance_m,
                arrival,
                departure,
            });
        }
    }
    UserPlacement::new(users, subarrays, links, None)
}

/// [`place_users`] from a fresh stream seeded with `seed`; the seed is recorded.
pub fn place_users_seeded(cfg: &SystemConfig, spec: &PlacementConfig, seed: u64) -> Result<UserPlacement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placement = place_users(cfg, spec, &mut rng)?;
    placement.seed = Some(seed);
    Ok(placement)
}
