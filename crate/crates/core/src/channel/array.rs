use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::SPEED_OF_LIGHT;

pub type CVector = DVector<Complex64>;

/// A propagation direction. Elevation is measured from the array normal
/// (the `z` axis), azimuth in the `x`–`y` plane from the `x` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Direction {
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        Self { azimuth, elevation }
    }

    pub fn broadside() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.elevation.sin_cos();
        let (sp, cp) = self.azimuth.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Great-circle angle to another direction, radians.
    pub fn separation(&self, other: &Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        dot.clamp(-1.0, 1.0).acos()
    }

    pub(crate) fn validate(&self, key: &str) -> Result<()> {
        if !(self.azimuth.is_finite() && (-PI..=PI).contains(&self.azimuth)) {
            return Err(Error::invalid(key, "azimuth must lie in [-pi, pi]"));
        }
        if !(self.elevation.is_finite() && (0.0..=PI).contains(&self.elevation)) {
            return Err(Error::invalid(key, "elevation must lie in [0, pi]"));
        }
        Ok(())
    }
}

/// Element positions of one square uniform planar subarray in the `x`–`y`
/// plane, centred on the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    side: usize,
    spacing: f64,
    positions: Vec<[f64; 3]>,
}

impl ArrayGeometry {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Positions indexed `u * side + v`.
    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    /// Path-length projection `s · d̂` of every element onto `dir`.
    ///
    /// This is the frequency-independent part of the element phase; multiply
    /// by the wavenumber `2πf/c` to get radians.
    pub fn projections(&self, dir: &Direction) -> Vec<f64> {
        let d = dir.unit_vector();
        self.positions
            .iter()
            .map(|s| s[0] * d[0] + s[1] * d[1] + s[2] * d[2])
            .collect()
    }

    /// Array factor `wᴴa` between a phase-shifter weight steered to `weight_dir`
    /// at `weight_hz` and the array response toward `look_dir` at `look_hz`.
    ///
    /// Equivalent to `steering_vector(weight).dotc(steering_vector(look))`
    /// without materialising either vector.
    pub fn array_factor(
        &self,
        weight_dir: &Direction,
        weight_hz: f64,
        look_dir: &Direction,
        look_hz: f64,
    ) -> Complex64 {
        let kw = wavenumber(weight_hz);
        let kl = wavenumber(look_hz);
        let wd = weight_dir.unit_vector();
        let ld = look_dir.unit_vector();
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.positions {
            let pw = s[0] * wd[0] + s[1] * wd[1] + s[2] * wd[2];
            let pl = s[0] * ld[0] + s[1] * ld[1] + s[2] * ld[2];
            acc += Complex64::from_polar(1.0, kl * pl - kw * pw);
        }
        acc / self.len() as f64
    }
}

pub(crate) fn wavenumber(f: f64) -> f64 {
    2.0 * PI * f / SPEED_OF_LIGHT
}

/// Uniform `side × side` grid with the given pitch, centred on the origin, `s_z = 0`.
pub fn element_positions(side: usize, spacing: f64) -> Result<ArrayGeometry> {
    if side == 0 {
        return Err(Error::invalid("elements_per_side", "must be >= 1"));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::invalid("element_spacing_m", "must be finite and > 0"));
    }
    let centre = (side as f64 - 1.0) / 2.0;
    let positions = (0..side)
        .flat_map(|u| {
            (0..side).map(move |v| {
                [
                    (u as f64 - centre) * spacing,
                    (v as f64 - centre) * spacing,
                    0.0,
                ]
            })
        })
        .collect();
    Ok(ArrayGeometry {
        side,
        spacing,
        positions,
    })
}

/// Unit-norm URPA response `e^{jκ s·d̂}/√Q_tot` toward `dir` at frequency `f`.
pub fn steering_vector(geom: &ArrayGeometry, dir: &Direction, f: f64) -> Result<CVector> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::invalid("frequency", "must be finite and > 0"));
    }
    let kappa = wavenumber(f);
    let scale = 1.0 / (geom.len() as f64).sqrt();
    Ok(CVector::from_iterator(
        geom.len(),
        geom.projections(dir)
            .into_iter()
            .map(|p| Complex64::from_polar(scale, kappa * p)),
    ))
}
