//! Hybrid beamforming: analog phase-shifter beams per subarray, the
//! concatenated low-dimensional channel, digital precoders and the
//! IQI-mixed desired/image channels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{steering_vector, ArrayGeometry, ChannelSet, Direction, UserPlacement};
use crate::config::{PerSubcarrier, Subcarrier, SystemConfig};
use crate::error::{Error, Result};
use crate::impairments::MismatchMatrices;
use crate::numeric::CMatrix;

/// Which transmit subarray serves each user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing(Vec<usize>);

impl Pairing {
    /// User `m` on subarray `m`.
    pub fn identity(users: usize) -> Self {
        Self((0..users).collect())
    }

    pub fn new(user_to_subarray: Vec<usize>, subarrays: usize) -> Result<Self> {
        let mut seen = vec![false; subarrays];
        for (m, &n) in user_to_subarray.iter().enumerate() {
            if n >= subarrays {
                return Err(Error::invalid(
                    "pairing",
                    format!("user {m} mapped to subarray {n}, only {subarrays} exist"),
                ));
            }
            if std::mem::replace(&mut seen[n], true) {
                return Err(Error::invalid(
                    "pairing",
                    format!("subarray {n} is assigned to more than one user"),
                ));
            }
        }
        Ok(Self(user_to_subarray))
    }

    pub fn subarray_of(&self, user: usize) -> usize {
        self.0[user]
    }

    pub fn users(&self) -> usize {
        self.0.len()
    }
}

/// When the analog phase shifters are designed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalogDesign {
    /// One frequency-flat design at the carrier, applied to every subcarrier.
    #[default]
    FrequencyFlat,
    /// Re-designed at each subcarrier frequency (no beam squint).
    IdealPerSubcarrier,
}

/// One analog transmit beam: the subarray it lives on and where it points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxBeam {
    pub subarray: usize,
    pub direction: Direction,
}

/// Analog parts of the hybrid beamformer.
///
/// Column `j < M` of `F_T` carries user `j`'s stream on its paired subarray;
/// remaining columns belong to unpaired subarrays, which point broadside.
/// Column `m` of `F_R` is user `m`'s combiner.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogBeamformers {
    geom: ArrayGeometry,
    subarrays: usize,
    pub tx: Vec<TxBeam>,
    pub rx: Vec<Direction>,
    pub design_hz: f64,
}

impl AnalogBeamformers {
    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    /// Dense `N·Q_tot × N` transmit beamformer at `f_hz`.
    pub fn transmit_matrix(&self, f_hz: f64) -> Result<CMatrix> {
        let q = self.geom.len();
        let mut f = CMatrix::zeros(self.subarrays * q, self.tx.len());
        for (j, beam) in self.tx.iter().enumerate() {
            let a = steering_vector(&self.geom, &beam.direction, f_hz)?;
            f.view_mut((beam.subarray * q, j), (q, 1)).copy_from(&a);
        }
        Ok(f)
    }

    /// Dense `M·Q_tot × M` receive combiner at `f_hz`.
    pub fn receive_matrix(&self, f_hz: f64) -> Result<CMatrix> {
        let q = self.geom.len();
        let mut f = CMatrix::zeros(self.rx.len() * q, self.rx.len());
        for (m, dir) in self.rx.iter().enumerate() {
            let a = steering_vector(&self.geom, dir, f_hz)?;
            f.view_mut((m * q, m), (q, 1)).copy_from(&a);
        }
        Ok(f)
    }
}

/// Matched analog beams under perfect spatial knowledge.
///
/// Each user's combiner is its arrival steering vector from the paired
/// subarray; each paired subarray's beam is the departure steering vector
/// toward its user. Both use `f_design`.
pub fn analog_beamformers(
    placement: &UserPlacement,
    geom: &ArrayGeometry,
    f_design: f64,
    pairing: &Pairing,
) -> Result<AnalogBeamformers> {
    if pairing.users() != placement.users() {
        return Err(Error::invalid(
            "pairing",
            format!(
                "pairing covers {} users, placement has {}",
                pairing.users(),
                placement.users()
            ),
        ));
    }
    // re-validate against this placement's subarray count
    Pairing::new(pairing.0.clone(), placement.subarrays())?;
    if !(f_design.is_finite() && f_design > 0.0) {
        return Err(Error::invalid("design frequency", "must be finite and > 0"));
    }
    let mut tx: Vec<TxBeam> = (0..placement.users())
        .map(|m| {
            let n = pairing.subarray_of(m);
            TxBeam {
                subarray: n,
                direction: placement.link(m, n).departure,
            }
        })
        .collect();
    tx.extend(
        (0..placement.subarrays())
            .filter(|n| !pairing.0.contains(n))
            .map(|n| TxBeam {
                subarray: n,
                direction: Direction::broadside(),
            }),
    );
    let rx = (0..placement.users())
        .map(|m| placement.link(m, pairing.subarray_of(m)).arrival)
        .collect();
    Ok(AnalogBeamformers {
        geom: geom.clone(),
        subarrays: placement.subarrays(),
        tx,
        rx,
        design_hz: f_design,
    })
}

/// `F_Rᴴ H F_T` for dense operands.
pub fn concatenate(h: &CMatrix, f_r: &CMatrix, f_t: &CMatrix) -> Result<CMatrix> {
    if h.nrows() != f_r.nrows() || h.ncols() != f_t.nrows() {
        return Err(Error::Dimension(format!(
            "H is {}x{}, F_R is {}x{}, F_T is {}x{}",
            h.nrows(),
            h.ncols(),
            f_r.nrows(),
            f_r.ncols(),
            f_t.nrows(),
            f_t.ncols()
        )));
    }
    Ok(f_r.adjoint() * h * f_t)
}

/// Concatenated channel `H_c[k]` computed from the rank-one factors:
/// entry `(m, j)` is `α · (f_rᴴ a_r) · (a_tᴴ f_t)`.
pub fn concatenated_channel(
    set: &ChannelSet,
    beams: &AnalogBeamformers,
    k: Subcarrier,
    design: AnalogDesign,
) -> CMatrix {
    let f_k = set.frequency(k);
    let f_w = match design {
        AnalogDesign::FrequencyFlat => beams.design_hz,
        AnalogDesign::IdealPerSubcarrier => f_k,
    };
    let geom = set.geometry();
    let placement = set.placement();
    CMatrix::from_fn(beams.rx.len(), beams.tx.len(), |m, j| {
        let beam = &beams.tx[j];
        let link = placement.link(m, beam.subarray);
        let rx_gain = geom.array_factor(&beams.rx[m], f_w, &link.arrival, f_k);
        let tx_gain = geom
            .array_factor(&beam.direction, f_w, &link.departure, f_k)
            .conj();
        rx_gain * tx_gain * set.path_loss(k, m, beam.subarray)
    })
}

pub fn concatenated_channels(
    set: &ChannelSet,
    beams: &AnalogBeamformers,
    design: AnalogDesign,
) -> PerSubcarrier<CMatrix> {
    PerSubcarrier::from_fn(set.config().half_subcarriers, |k| {
        concatenated_channel(set, beams, k, design)
    })
}

/// Per-stream transmit power on every subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation(PerSubcarrier<f64>);

impl PowerAllocation {
    /// `p` on every subcarrier.
    pub fn full_band(half: usize, p: f64) -> Self {
        Self(PerSubcarrier::from_fn(half, |_| p))
    }

    /// `p` on `k > 0`, nothing on the images `k < 0`.
    pub fn image_nulled(half: usize, p: f64) -> Self {
        Self(PerSubcarrier::from_fn(half, |k| {
            if k.index() > 0 {
                p
            } else {
                0.0
            }
        }))
    }

    pub fn power(&self, k: Subcarrier) -> f64 {
        *self.0.get(k)
    }

    pub fn is_active(&self, k: Subcarrier) -> bool {
        self.power(k) > 0.0
    }

    pub fn per_subcarrier(&self) -> &PerSubcarrier<f64> {
        &self.0
    }
}

/// Digital precoder and combiner of one subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalBeamformers {
    pub w_t: CMatrix,
    pub w_r: CMatrix,
}

/// `W_T[k] = √P_k · I_N` (equal power per stream) and `W_R[k] = I_M`.
pub fn digital_beamformers(
    cfg: &SystemConfig,
    allocation: &PowerAllocation,
) -> PerSubcarrier<DigitalBeamformers> {
    allocation.per_subcarrier().map(|_, &p| DigitalBeamformers {
        w_t: CMatrix::identity(cfg.tx_subarrays, cfg.tx_subarrays) * Complex64::new(p.sqrt(), 0.0),
        w_r: CMatrix::identity(cfg.users, cfg.users),
    })
}

/// Desired and image-interference channels of one subcarrier:
///
/// ```text
/// H_d[k] = K1 H_c[k] G1       + K2 conj(H_c[−k]) G2
/// H_i[k] = K1 H_c[k] conj(G2) + K2 conj(H_c[−k]) conj(G1)
/// ```
pub fn effective_channels(
    hc: &CMatrix,
    hc_mirror: &CMatrix,
    mm: &MismatchMatrices,
) -> Result<(CMatrix, CMatrix)> {
    let (rows, cols) = hc.shape();
    if hc_mirror.shape() != (rows, cols) || mm.k1.len() != rows || mm.g1.len() != cols {
        return Err(Error::Dimension(format!(
            "H_c is {rows}x{cols}, mirror {}x{}, mismatch {}x{}",
            hc_mirror.nrows(),
            hc_mirror.ncols(),
            mm.k1.len(),
            mm.g1.len()
        )));
    }
    let hd = CMatrix::from_fn(rows, cols, |m, n| {
        mm.k1[m] * hc[(m, n)] * mm.g1[n] + mm.k2[m] * hc_mirror[(m, n)].conj() * mm.g2[n]
    });
    let hi = CMatrix::from_fn(rows, cols, |m, n| {
        mm.k1[m] * hc[(m, n)] * mm.g2[n].conj()
            + mm.k2[m] * hc_mirror[(m, n)].conj() * mm.g1[n].conj()
    });
    Ok((hd, hi))
}

/// Concatenated, desired and image channels over the whole band.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannels {
    pub hc: PerSubcarrier<CMatrix>,
    pub hd: PerSubcarrier<CMatrix>,
    pub hi: PerSubcarrier<CMatrix>,
}

impl EffectiveChannels {
    /// Frequency-independent imbalance on every subcarrier.
    pub fn compute(hc: &PerSubcarrier<CMatrix>, mm: &MismatchMatrices) -> Result<Self> {
        Self::compute_with(hc, |_| mm)
    }

    /// Imbalance supplied per subcarrier.
    pub fn compute_with<'a>(
        hc: &PerSubcarrier<CMatrix>,
        mm: impl Fn(Subcarrier) -> &'a MismatchMatrices,
    ) -> Result<Self> {
        let pairs = PerSubcarrier::try_from_fn(hc.half(), |k| {
            effective_channels(hc.get(k), hc.get(k.mirror()), mm(k))
        })?;
        Ok(Self {
            hc: hc.clone(),
            hd: pairs.map(|_, p| p.0.clone()),
            hi: pairs.map(|_, p| p.1.clone()),
        })
    }
}

/// Zero every off-diagonal entry: removes inter-user interference while
/// keeping each user's own link.
pub fn without_cross_links(h: &CMatrix) -> CMatrix {
    CMatrix::from_fn(h.nrows(), h.ncols(), |m, n| {
        if m == n {
            h[(m, n)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
