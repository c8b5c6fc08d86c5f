//! Link metrics: per-user SINR, subcarrier rates, and the low-SNR
//! (minimum bit energy, wideband slope) characterisation.

mod oracle;
mod wideband;

pub use oracle::{capacity_nats, natural_step, numeric_slope_oracle, OracleEstimate};
pub use wideband::{
    ebn0_min, ebn0_min_iqi, low_snr_metrics, se_approx, wideband_slope, wideband_slope_as_printed,
    wideband_slope_iqi, LowSnrMetrics,
};

use crate::error::{Error, Result};
use crate::numeric::{log_det_hpd, sum_compensated, CMatrix};

/// Interference-as-noise SINR of user `m` on one subcarrier, with separate
/// powers on the subcarrier itself and on its image.
///
/// `γ = |h_d,mm|² P / (P Σ_{n≠m} |h_d,mn|² + P_img Σ_n |h_i,mn|² + noise)`.
/// Pass `hi = None` for a link without image leakage.
pub fn user_sinr(
    hd: &CMatrix,
    hi: Option<&CMatrix>,
    power: f64,
    image_power: f64,
    noise: f64,
    m: usize,
) -> f64 {
    let desired = hd[(m, m)].norm_sqr() * power;
    if desired == 0.0 {
        return 0.0;
    }
    let iui: f64 = (0..hd.ncols())
        .filter(|&n| n != m)
        .map(|n| hd[(m, n)].norm_sqr())
        .sum();
    let ici: f64 = hi.map_or(0.0, |hi| hi.row(m).iter().map(|x| x.norm_sqr()).sum());
    desired / (power * iui + image_power * ici + noise)
}

/// SINR without I/Q imbalance, interference treated as noise.
pub fn sinr_no_iqi(hc: &CMatrix, p: f64, sigma2: f64, m: usize) -> f64 {
    user_sinr(hc, None, p, 0.0, sigma2, m)
}

/// SINR under I/Q imbalance: the image channel leaks with the same power `p`.
pub fn sinr_iqi(hd: &CMatrix, hi: &CMatrix, p: f64, sigma2: f64, m: usize) -> f64 {
    user_sinr(hd, Some(hi), p, p, sigma2, m)
}

/// Sum over users of `log2(1 + γ_m)`: each user decodes its own stream.
pub fn per_user_rate(
    hd: &CMatrix,
    hi: Option<&CMatrix>,
    power: f64,
    image_power: f64,
    noise: &[f64],
) -> f64 {
    sum_compensated(
        (0..hd.nrows())
            .map(|m| (1.0 + user_sinr(hd, hi, power, image_power, noise[m], m)).log2()),
    )
}

/// `log2 det(I + C⁻¹ W_Rᴴ H_d W_T W_Tᴴ H_dᴴ W_R)` with the image-plus-noise
/// covariance `C = W_Rᴴ H_i conj(W_T[−k]) W_T[−k]ᵀ H_iᴴ W_R + Z̄`.
pub fn rate_subcarrier(
    w_r: &CMatrix,
    w_t: &CMatrix,
    w_t_mirror: &CMatrix,
    hd: &CMatrix,
    hi: &CMatrix,
    zbar: &CMatrix,
) -> Result<f64> {
    let m = w_r.ncols();
    if zbar.shape() != (m, m) || hd.nrows() != w_r.nrows() || hd.ncols() != w_t.nrows() {
        return Err(Error::Dimension(format!(
            "W_R {}x{}, H_d {}x{}, W_T {}x{}, Z {}x{}",
            w_r.nrows(),
            w_r.ncols(),
            hd.nrows(),
            hd.ncols(),
            w_t.nrows(),
            w_t.ncols(),
            zbar.nrows(),
            zbar.ncols()
        )));
    }
    let desired = w_r.adjoint() * hd * w_t;
    let s = &desired * desired.adjoint();
    let image = w_r.adjoint() * hi * w_t_mirror.map(|x| x.conj());
    let c = &image * image.adjoint() + zbar;
    let c = hermitian_part(&c);
    let total = hermitian_part(&(&c + s));
    let ld_c = log_det_hpd(&c)
        .map_err(|_| Error::Numerical("interference-plus-noise covariance is not positive definite".into()))?;
    let ld_total = log_det_hpd(&total)?;
    Ok(((ld_total - ld_c) / std::f64::consts::LN_2).max(0.0))
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * num_complex::Complex64::new(0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random(rng: &mut ChaCha8Rng, r: usize, k: usize) -> CMatrix {
        CMatrix::from_fn(r, k, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn scalar_unit_cases() {
        let h = CMatrix::from_element(1, 1, c(1.0));
        assert!((sinr_no_iqi(&h, 2.0, 2.0, 0) - 1.0).abs() < 1e-15);
        assert_eq!(sinr_no_iqi(&h, 0.0, 1.0, 0), 0.0);
    }

    #[test]
    fn elementwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = random(&mut rng, 3, 3);
        let (p, s2) = (1.7, 0.3);
        for m in 0..3 {
            let mut interference = 0.0;
            for n in 0..3 {
                if n != m {
                    interference += h[(m, n)].re.powi(2) + h[(m, n)].im.powi(2);
                }
            }
            let own = h[(m, m)].re.powi(2) + h[(m, m)].im.powi(2);
            let expected = own * p / (p * interference + s2);
            assert!((sinr_no_iqi(&h, p, s2, m) - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn iqi_sinr_reduces_and_saturates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let hd = random(&mut rng, 3, 3);
        let hi = random(&mut rng, 3, 3) * c(0.05);
        for m in 0..3 {
            assert_eq!(sinr_iqi(&hd, &CMatrix::zeros(3, 3), 2.0, 0.5, m), sinr_no_iqi(&hd, 2.0, 0.5, m));
            let own = hd[(m, m)].norm_sqr();
            let iui: f64 = (0..3).filter(|&n| n != m).map(|n| hd[(m, n)].norm_sqr()).sum();
            let ici: f64 = (0..3).map(|n| hi[(m, n)].norm_sqr()).sum();
            let ceiling = own / (iui + ici);
            let at_huge = sinr_iqi(&hd, &hi, 1e12, 1.0, m);
            assert!((at_huge - ceiling).abs() < 1e-3 * ceiling);
            let scaled = sinr_iqi(&(&hd * c(7.0)), &(&hi * c(7.0)), 1e12, 1.0, m);
            assert!((scaled - ceiling).abs() < 1e-3 * ceiling);
        }
    }

    #[test]
    fn shannon_scalar_rate() {
        let h = CMatrix::from_element(1, 1, Complex64::new(0.6, -0.3));
        let p: f64 = 4.0;
        let w = CMatrix::from_element(1, 1, c(p.sqrt()));
        let r = rate_subcarrier(&CMatrix::identity(1, 1), &w, &w, &h, &CMatrix::zeros(1, 1), &CMatrix::from_element(1, 1, c(0.5)))
            .unwrap();
        assert!((r - (1.0 + p * h[(0, 0)].norm_sqr() / 0.5).log2()).abs() < 1e-13);
        let r_noisy = rate_subcarrier(&CMatrix::identity(1, 1), &w, &w, &h, &CMatrix::zeros(1, 1), &CMatrix::from_element(1, 1, c(1e12)))
            .unwrap();
        assert!(r_noisy < 1e-10);
    }

    #[test]
    fn diagonal_case_factorises() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let d = |rng: &mut ChaCha8Rng| {
                CMatrix::from_diagonal(&nalgebra::DVector::from_fn(3, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                }))
            };
            let hd = d(&mut rng);
            let hi = d(&mut rng);
            let noise: Vec<f64> = (0..3).map(|_| rng.random_range(0.2..2.0)).collect();
            let z = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(3, |i, _| c(noise[i])));
            let p: f64 = rng.random_range(0.1..10.0);
            let w = CMatrix::identity(3, 3) * c(p.sqrt());
            let r = rate_subcarrier(&CMatrix::identity(3, 3), &w, &w, &hd, &hi, &z).unwrap();
            let per_user = per_user_rate(&hd, Some(&hi), p, p, &noise);
            assert!((r - per_user).abs() < 1e-10);
        }
    }

    #[test]
    fn log_det_route_matches_direct_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let hd = random(&mut rng, 2, 2);
        let hi = random(&mut rng, 2, 2) * c(0.2);
        let w = CMatrix::identity(2, 2) * c(1.5);
        let wm = CMatrix::identity(2, 2) * c(0.7);
        let z = CMatrix::identity(2, 2) * c(0.4);
        let r = rate_subcarrier(&CMatrix::identity(2, 2), &w, &wm, &hd, &hi, &z).unwrap();
        let s = &hd * &w * w.adjoint() * hd.adjoint();
        let cov = &hi * wm.map(|x| x.conj()) * wm.transpose() * hi.adjoint() + &z;
        let direct = (CMatrix::identity(2, 2) + cov.try_inverse().unwrap() * s).determinant();
        assert!((r - direct.re.log2()).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_definite_noise() {
        let z = CMatrix::from_element(1, 1, c(-1.0));
        let one = CMatrix::identity(1, 1);
        assert!(matches!(
            rate_subcarrier(&one, &one, &one, &one, &CMatrix::zeros(1, 1), &z),
            Err(Error::Numerical(_))
        ));
    }
}
