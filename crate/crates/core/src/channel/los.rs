use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::array::{steering_vector, ArrayGeometry, CVector, Direction};
use crate::config::{Subcarrier, SystemConfig};
use crate::error::{Error, Result};
use crate::numeric::{CMatrix, SPEED_OF_LIGHT};

/// Free-space amplitude gain `G_T·G_R·c/(4π f Δ)`.
pub fn path_loss(f: f64, distance: f64, tx_gain: f64, rx_gain: f64) -> Result<f64> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::invalid("frequency", "must be finite and > 0"));
    }
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::invalid("distance_m", "must be finite and > 0"));
    }
    Ok(tx_gain * rx_gain * SPEED_OF_LIGHT / (4.0 * PI * f * distance))
}

/// Geometry of the link between one transmit subarray and one user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub distance_m: f64,
    /// Angle of arrival at the user's subarray.
    pub arrival: Direction,
    /// Angle of departure from the transmit subarray.
    pub departure: Direction,
}

/// Link geometry for every (user, transmit subarray) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserPlacement {
    users: usize,
    subarrays: usize,
    links: Vec<LinkGeometry>,
    pub seed: Option<u64>,
}

impl UserPlacement {
    /// `links` is row-major over (user, subarray).
    pub fn new(
        users: usize,
        subarrays: usize,
        links: Vec<LinkGeometry>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if links.len() != users * subarrays {
            return Err(Error::Dimension(format!(
                "placement for {users}x{subarrays} links has {} entries",
                links.len()
            )));
        }
        for (i, l) in links.iter().enumerate() {
            if !(l.distance_m.is_finite() && l.distance_m > 0.0) {
                return Err(Error::invalid(
                    format!("placement[{i}].distance_m"),
                    "must be finite and > 0",
                ));
            }
            l.arrival.validate(&format!("placement[{i}].arrival"))?;
            l.departure.validate(&format!("placement[{i}].departure"))?;
        }
        Ok(Self {
            users,
            subarrays,
            links,
            seed,
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn subarrays(&self) -> usize {
        self.subarrays
    }

    pub fn link(&self, user: usize, subarray: usize) -> &LinkGeometry {
        &self.links[user * self.subarrays + subarray]
    }

    pub fn links(&self) -> &[LinkGeometry] {
        &self.links
    }
}

/// Rank-one factors of one LOS channel block `H_mn = α a_r a_tᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LosBlock {
    pub alpha: f64,
    pub a_r: CVector,
    pub a_t: CVector,
}

impl LosBlock {
    pub fn dense(&self) -> CMatrix {
        &self.a_r * self.a_t.adjoint() * num_complex::Complex64::new(self.alpha, 0.0)
    }
}

/// The passband LOS channel of every subcarrier, held by its geometric factors.
///
/// Full `MQ × NQ` matrices are only materialised on request through
/// [`ChannelSet::dense`]; the concatenation in [`crate::beamforming`] works
/// directly on the factors.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    cfg: SystemConfig,
    geom: ArrayGeometry,
    placement: UserPlacement,
}

impl ChannelSet {
    pub fn new(cfg: &SystemConfig, placement: &UserPlacement, geom: &ArrayGeometry) -> Result<Self> {
        cfg.validate()?;
        if placement.users() != cfg.users || placement.subarrays() != cfg.tx_subarrays {
            return Err(Error::Dimension(format!(
                "placement covers {}x{} links, configuration needs {}x{}",
                placement.users(),
                placement.subarrays(),
                cfg.users,
                cfg.tx_subarrays
            )));
        }
        if geom.len() != cfg.elements_per_subarray() {
            return Err(Error::Dimension(format!(
                "array has {} elements, configuration needs {}",
                geom.len(),
                cfg.elements_per_subarray()
            )));
        }
        Ok(Self {
            cfg: cfg.clone(),
            geom: geom.clone(),
            placement: placement.clone(),
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    pub fn placement(&self) -> &UserPlacement {
        &self.placement
    }

    pub fn frequency(&self, k: Subcarrier) -> f64 {
        self.cfg.subcarrier_frequency(k)
    }

    pub fn path_loss(&self, k: Subcarrier, user: usize, subarray: usize) -> f64 {
        let link = self.placement.link(user, subarray);
        self.cfg.tx_antenna_gain * self.cfg.rx_antenna_gain * SPEED_OF_LIGHT
            / (4.0 * PI * self.frequency(k) * link.distance_m)
    }

    pub fn block(&self, k: Subcarrier, user: usize, subarray: usize) -> LosBlock {
        let f = self.frequency(k);
        let link = self.placement.link(user, subarray);
        LosBlock {
            alpha: self.path_loss(k, user, subarray),
            // f > 0 is guaranteed by the validated configuration
            a_r: steering_vector(&self.geom, &link.arrival, f).expect("positive frequency"),
            a_t: steering_vector(&self.geom, &link.departure, f).expect("positive frequency"),
        }
    }

    /// The full `M·Q_tot × N·Q_tot` passband matrix `H[k]`.
    pub fn dense(&self, k: Subcarrier) -> CMatrix {
        let q = self.geom.len();
        let mut h = CMatrix::zeros(self.cfg.users * q, self.cfg.tx_subarrays * q);
        for m in 0..self.cfg.users {
            for n in 0..self.cfg.tx_subarrays {
                h.view_mut((m * q, n * q), (q, q))
                    .copy_from(&self.block(k, m, n).dense());
            }
        }
        h
    }
}

/// All rank-one blocks of `H[k]`, row-major over (user, subarray).
pub fn los_channel(
    cfg: &SystemConfig,
    placement: &UserPlacement,
    geom: &ArrayGeometry,
    k: i32,
) -> Result<Vec<LosBlock>> {
    let set = ChannelSet::new(cfg, placement, geom)?;
    let k = cfg.subcarrier(k)?;
    Ok((0..cfg.users)
        .flat_map(|m| (0..cfg.tx_subarrays).map(move |n| (m, n)))
        .map(|(m, n)| set.block(k, m, n))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::element_positions;

    fn small_setup() -> (SystemConfig, UserPlacement, ArrayGeometry) {
        let cfg = SystemConfig {
            half_subcarriers: 4,
            tx_subarrays: 2,
            users: 2,
            elements_per_side: 3,
            ..SystemConfig::default()
        };
        let links = vec![
            LinkGeometry {
                distance_m: 1.0,
                arrival: Direction::new(0.1, 1.4),
                departure: Direction::new(-0.3, 1.5),
            },
            LinkGeometry {
                distance_m: 1.5,
                arrival: Direction::new(0.5, 1.6),
                departure: Direction::new(0.4, 1.45),
            },
            LinkGeometry {
                distance_m: 2.0,
                arrival: Direction::new(-0.7, 1.7),
                departure: Direction::new(0.9, 1.3),
            },
            LinkGeometry {
                distance_m: 0.8,
                arrival: Direction::new(0.2, 1.5),
                departure: Direction::new(-0.1, 1.55),
            },
        ];
        let placement = UserPlacement::new(2, 2, links, None).unwrap();
        let geom = element_positions(3, cfg.element_spacing()).unwrap();
        (cfg, placement, geom)
    }

    #[test]
    fn path_loss_reference_value() {
        let a = path_loss(300e9, 1.0, 1.0, 1.0).unwrap();
        // c / (4π f) by hand with c = 299 792 458 m/s
        assert!((a - 7.952_242e-5).abs() < 1e-11, "{a}");
        // the rounded c = 3e8 figure is 7.9577e-5, 0.07 % above
        assert!(((a - 7.9577e-5) / 7.9577e-5).abs() < 1e-3);
    }

    #[test]
    fn path_loss_scaling() {
        let a = path_loss(300e9, 1.0, 1.0, 1.0).unwrap();
        assert!((path_loss(300e9, 2.0, 1.0, 1.0).unwrap() - a / 2.0).abs() < 1e-18);
        assert!((path_loss(600e9, 1.0, 1.0, 1.0).unwrap() - a / 2.0).abs() < 1e-18);
        assert!(path_loss(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(path_loss(1e9, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn blocks_are_rank_one_with_alpha_norm() {
        let (cfg, placement, geom) = small_setup();
        let set = ChannelSet::new(&cfg, &placement, &geom).unwrap();
        for k in cfg.subcarriers() {
            for m in 0..2 {
                for n in 0..2 {
                    let blk = set.block(k, m, n);
                    let dense = blk.dense();
                    assert!((dense.norm() - blk.alpha).abs() < 1e-12 * blk.alpha);
                    let sv = dense.singular_values();
                    let mut s: Vec<f64> = sv.iter().copied().collect();
                    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
                    assert!(s[1] < 1e-10 * s[0]);
                }
            }
        }
    }

    #[test]
    fn mirrored_block_differs_only_through_frequency() {
        let (cfg, placement, geom) = small_setup();
        let set = ChannelSet::new(&cfg, &placement, &geom).unwrap();
        let k = cfg.subcarrier(3).unwrap();
        let blk = set.block(k.mirror(), 1, 0);
        let f = cfg.subcarrier_frequency(k.mirror());
        let link = placement.link(1, 0);
        let alpha = path_loss(f, link.distance_m, 1.0, 1.0).unwrap();
        assert!((blk.alpha - alpha).abs() < 1e-18);
        let a_r = steering_vector(&geom, &link.arrival, f).unwrap();
        let a_t = steering_vector(&geom, &link.departure, f).unwrap();
        assert!((&blk.a_r - a_r).norm() < 1e-14);
        assert!((&blk.a_t - a_t).norm() < 1e-14);
        assert!((&blk.a_r - set.block(k, 1, 0).a_r).norm() > 1e-6);
    }

    #[test]
    fn dense_assembles_blocks() {
        let (cfg, placement, geom) = small_setup();
        let k = cfg.subcarrier(-2).unwrap();
        let set = ChannelSet::new(&cfg, &placement, &geom).unwrap();
        let h = set.dense(k);
        assert_eq!(h.shape(), (18, 18));
        let blocks = los_channel(&cfg, &placement, &geom, -2).unwrap();
        let b10 = blocks[2].dense();
        assert!((h.view((9, 0), (9, 9)) - b10).norm() < 1e-18);
    }

    #[test]
    fn placement_validation() {
        let bad = LinkGeometry {
            distance_m: 0.0,
            arrival: Direction::broadside(),
            departure: Direction::broadside(),
        };
        assert!(UserPlacement::new(1, 1, vec![bad], None).is_err());
        let bad_angle = LinkGeometry {
            distance_m: 1.0,
            arrival: Direction::new(4.0, 0.0),
            departure: Direction::broadside(),
        };
        assert!(UserPlacement::new(1, 1, vec![bad_angle], None).is_err());
        assert!(UserPlacement::new(2, 1, vec![], None).is_err());
    }
}
