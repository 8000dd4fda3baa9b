//! Reflecting-coefficient optimization and received-SNR evaluation.
//!
//! Given the AP-side channel `h` and a (reconstructed) terminal-side channel
//! `g`, the power-maximizing unit-modulus coefficients are the per-element
//! phase conjugates `theta_n = conj(g_n h_n) / |g_n h_n|`, worth
//! `(sum_n |g_n h_n|)^2 / sigma^2` of received SNR when `g` is exact. SNR is
//! always evaluated against the true channels; the coefficients may come
//! from estimated ones.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::channel::{irs_ue_channel, RfParams};
use crate::geometry::{IrsLayout, Point3};
use crate::{Error, Result};

/// Per-unit reflecting coefficients, |theta_n| <= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectState {
    pub theta: Vec<Complex64>,
}

impl ReflectState {
    /// Validating constructor: every coefficient magnitude must be <= 1.
    pub fn new(theta: Vec<Complex64>) -> Result<Self> {
        if theta.iter().any(|t| t.norm_sqr() > 1.0 + 1e-9) {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: "coefficient magnitudes must not exceed 1",
            });
        }
        Ok(Self { theta })
    }

    /// The fixed all-ones baseline (no optimization).
    pub fn uniform(len: usize) -> Self {
        Self {
            theta: alloc::vec![Complex64::new(1.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Rebuild the panel-to-terminal channel from an estimated position using
/// the same propagation model as [`irs_ue_channel`]. Accepts any position
/// in the closed half-space x >= 0.
pub fn reconstruct_ue_channel(
    layout: &IrsLayout,
    estimated_position: &Point3,
    rf: &RfParams,
    frequency_hz: f64,
) -> Result<Vec<Complex64>> {
    if !(estimated_position.x >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "estimated_position",
            reason: "x-coordinate must be non-negative",
        });
    }
    if estimated_position.x > 0.0 {
        return irs_ue_channel(layout, estimated_position, rf, frequency_hz);
    }
    // On the panel plane itself: synthesize per unit, rejecting an exact
    // unit coincidence through the distance check.
    let mut coeffs = Vec::with_capacity(layout.num_units());
    for col in 0..layout.n_cols {
        for row in 0..layout.n_rows {
            let d = estimated_position.distance(&layout.position_rc(row, col));
            coeffs.push(crate::channel::los_coefficient(rf, frequency_hz, d)?);
        }
    }
    Ok(coeffs)
}

/// Phase-conjugate coefficients for the channel pair. Zero products are
/// degenerate (any phase is optimal) and map to 1.
pub fn optimal_theta(ue_channel: &[Complex64], ap_channel: &[Complex64]) -> Result<ReflectState> {
    if ue_channel.len() != ap_channel.len() {
        return Err(Error::LengthMismatch {
            context: "ue channel vs ap channel",
            expected: ap_channel.len(),
            actual: ue_channel.len(),
        });
    }
    let theta = ue_channel
        .iter()
        .zip(ap_channel)
        .map(|(g, h)| {
            let prod = g * h;
            let norm = prod.norm();
            if norm == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                prod.conj() / norm
            }
        })
        .collect();
    Ok(ReflectState { theta })
}

/// Received SNR under the given coefficients, linear and in dB:
/// `|sum_n g_n h_n theta_n|^2 / noise_power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr {
    pub linear: f64,
}

impl Snr {
    pub fn db(&self) -> f64 {
        10.0 * libm::log10(self.linear)
    }
}

pub fn received_snr(
    ue_channel: &[Complex64],
    ap_channel: &[Complex64],
    state: &ReflectState,
    noise_power_w: f64,
) -> Result<Snr> {
    if ue_channel.len() != ap_channel.len() || ue_channel.len() != state.len() {
        return Err(Error::LengthMismatch {
            context: "channel vs reflect state",
            expected: ue_channel.len(),
            actual: state.len(),
        });
    }
    if !(noise_power_w > 0.0) {
        return Err(Error::InvalidParameter {
            name: "noise_power_w",
            reason: "must be positive",
        });
    }
    let sum: Complex64 = ue_channel
        .iter()
        .zip(ap_channel)
        .zip(&state.theta)
        .map(|((g, h), t)| g * h * t)
        .sum();
    Ok(Snr {
        linear: sum.norm_sqr() / noise_power_w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ap_irs_channel, SPEED_OF_LIGHT};
    use crate::rng::TrialRng;
    use proptest::prelude::*;

    fn rf() -> RfParams {
        RfParams {
            center_frequency_hz: 28e9,
            subband_count: 128,
            subband_width_hz: 3.6e6,
            pathloss_constant: 2.0,
            pathloss_exponent: 2.0,
            noise_power_w: 1e-3,
        }
    }

    fn small_scene() -> (IrsLayout, Point3, Point3) {
        (
            IrsLayout::new(8, 16, 0.005, 0.005).unwrap(),
            Point3::new(5.0, -5.0, 0.0),
            Point3::new(5.0, 3.0, 0.0),
        )
    }

    #[test]
    fn reconstruction_at_true_position_is_exact() {
        let (layout, _, ue) = small_scene();
        let g = irs_ue_channel(&layout, &ue, &rf(), 28e9).unwrap();
        let g_hat = reconstruct_ue_channel(&layout, &ue, &rf(), 28e9).unwrap();
        assert_eq!(g, g_hat);
    }

    #[test]
    fn reconstruction_is_continuous_in_position() {
        // Sub-wavelength offsets (lambda ~ 1.07 cm at 28 GHz): the
        // reconstruction error must shrink as the offset does.
        let (layout, _, ue) = small_scene();
        let g = irs_ue_channel(&layout, &ue, &rf(), 28e9).unwrap();
        let mut prev_err = f64::INFINITY;
        for delta in [1e-3, 3e-4, 1e-4, 3e-5, 1e-5] {
            let shifted = Point3::new(ue.x + delta, ue.y, ue.z);
            let g_hat = reconstruct_ue_channel(&layout, &shifted, &rf(), 28e9).unwrap();
            let err: f64 = g
                .iter()
                .zip(&g_hat)
                .map(|(a, b)| (a - b).norm())
                .sum::<f64>();
            assert!(err < prev_err, "delta {delta}: err {err} vs prev {prev_err}");
            prev_err = err;
        }
        let per_element = prev_err / g.len() as f64;
        let mean_mag = g.iter().map(|c| c.norm()).sum::<f64>() / g.len() as f64;
        assert!(per_element < 0.01 * mean_mag);
    }

    #[test]
    fn reconstruction_matches_independent_model_evaluation() {
        // Dual-implementation oracle: evaluate magnitude/phase from the
        // model definition without going through the channel module.
        let layout = IrsLayout::new(64, 128, 0.005, 0.005).unwrap();
        let p = Point3::new(5.0, 3.0, 0.0);
        let rf = rf();
        let g_hat = reconstruct_ue_channel(&layout, &p, &rf, 28e9).unwrap();
        for n in [1usize, 2, 65, 511, 8192] {
            let col = (n - 1) / 64;
            let row = (n - 1) % 64;
            let uy = 0.005 * col as f64;
            let uz = 0.005 * row as f64;
            let d = ((p.x) * (p.x) + (p.y - uy) * (p.y - uy) + (p.z - uz) * (p.z - uz)).sqrt();
            let mag = 2.0 / (d * d);
            let phase = -2.0 * core::f64::consts::PI * 28e9 * d / SPEED_OF_LIGHT;
            let expected = Complex64::new(mag * phase.cos(), mag * phase.sin());
            let got = g_hat[n - 1];
            assert!(
                (got - expected).norm() < 1e-9 * mag,
                "unit {n}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn reconstruction_rejects_negative_half_space() {
        let (layout, _, _) = small_scene();
        assert!(reconstruct_ue_channel(&layout, &Point3::new(-0.1, 1.0, 0.0), &rf(), 28e9)
            .is_err());
        // x = 0 off the grid nodes is fine.
        assert!(reconstruct_ue_channel(&layout, &Point3::new(0.0, 0.0012, 0.0), &rf(), 28e9)
            .is_ok());
    }

    #[test]
    fn theta_for_positive_real_product_is_one() {
        let g = [Complex64::new(2.0, 0.0)];
        let h = [Complex64::new(0.5, 0.0)];
        let state = optimal_theta(&g, &h).unwrap();
        assert!((state.theta[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn theta_conjugates_the_product_phase() {
        // g*h = j*r  ->  theta = -j.
        let g = [Complex64::new(0.0, 3.0)];
        let h = [Complex64::new(1.5, 0.0)];
        let state = optimal_theta(&g, &h).unwrap();
        assert!((state.theta[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_product_maps_to_one() {
        let g = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0)];
        let h = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let state = optimal_theta(&g, &h).unwrap();
        assert_eq!(state.theta[0], Complex64::new(1.0, 0.0));
        assert!((state.theta[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matched_theta_achieves_coherent_sum() {
        // Term-by-term oracle for (sum |g_n h_n|)^2 / sigma^2.
        let (layout, ap, ue) = small_scene();
        let rf = rf();
        let g = irs_ue_channel(&layout, &ue, &rf, 28e9).unwrap();
        let h = ap_irs_channel(&layout, &ap, &rf, 28e9).unwrap();
        let state = optimal_theta(&g, &h).unwrap();
        let snr = received_snr(&g, &h, &state, rf.noise_power_w).unwrap();
        let coherent: f64 = g.iter().zip(&h).map(|(a, b)| (a * b).norm()).sum();
        let expected = coherent * coherent / rf.noise_power_w;
        assert!(
            (snr.linear - expected).abs() < 1e-10 * expected,
            "snr {} vs {}",
            snr.linear,
            expected
        );
    }

    #[test]
    fn single_element_snr() {
        let g = [Complex64::new(0.0, 0.7)];
        let h = [Complex64::new(0.3, 0.0)];
        let state = optimal_theta(&g, &h).unwrap();
        let snr = received_snr(&g, &h, &state, 1e-3).unwrap();
        let a = 0.7 * 0.3;
        assert!((snr.linear - a * a / 1e-3).abs() < 1e-12 * snr.linear);
        assert!((snr.db() - 10.0 * (a * a / 1e-3).log10()).abs() < 1e-12);
    }

    #[test]
    fn estimated_theta_never_beats_true_theta() {
        let (layout, ap, ue) = small_scene();
        let rf = rf();
        let g = irs_ue_channel(&layout, &ue, &rf, 28e9).unwrap();
        let h = ap_irs_channel(&layout, &ap, &rf, 28e9).unwrap();
        let upper = received_snr(&g, &h, &optimal_theta(&g, &h).unwrap(), rf.noise_power_w)
            .unwrap()
            .linear;
        // Reconstruct from a slightly wrong position.
        let g_hat =
            reconstruct_ue_channel(&layout, &Point3::new(5.02, 3.01, 0.0), &rf, 28e9).unwrap();
        let proposed = received_snr(
            &g,
            &h,
            &optimal_theta(&g_hat, &h).unwrap(),
            rf.noise_power_w,
        )
        .unwrap()
        .linear;
        assert!(proposed <= upper * (1.0 + 1e-12));
        assert!(proposed > 0.0);
    }

    #[test]
    fn scaling_estimate_leaves_theta_unchanged() {
        // Only phases matter: a positive rescale of the estimated channel
        // produces identical coefficients.
        let (layout, ap, ue) = small_scene();
        let rf = rf();
        let g = irs_ue_channel(&layout, &ue, &rf, 28e9).unwrap();
        let h = ap_irs_channel(&layout, &ap, &rf, 28e9).unwrap();
        let scaled: Vec<Complex64> = g.iter().map(|c| c * 123.456).collect();
        let a = optimal_theta(&g, &h).unwrap();
        let b = optimal_theta(&scaled, &h).unwrap();
        for (x, y) in a.theta.iter().zip(&b.theta) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn snr_rejects_mismatched_lengths() {
        let g = vec![Complex64::new(1.0, 0.0); 4];
        let h = vec![Complex64::new(1.0, 0.0); 3];
        assert!(optimal_theta(&g, &h).is_err());
        let state = ReflectState::uniform(4);
        assert!(received_snr(&g, &g, &state, 0.0).is_err());
        let state3 = ReflectState::uniform(3);
        assert!(received_snr(&g, &g, &state3, 1e-3).is_err());
    }

    #[test]
    fn reflect_state_validates_magnitudes() {
        assert!(ReflectState::new(vec![Complex64::new(0.5, 0.5)]).is_ok());
        assert!(ReflectState::new(vec![Complex64::new(1.2, 0.0)]).is_err());
    }

    proptest! {
        /// No feasible coefficient vector beats the phase conjugate.
        #[test]
        fn dominance_over_random_feasible_theta(seed in 0u64..300) {
            let (layout, ap, ue) = small_scene();
            let rf = rf();
            let g = irs_ue_channel(&layout, &ue, &rf, 28e9).unwrap();
            let h = ap_irs_channel(&layout, &ap, &rf, 28e9).unwrap();
            let best = received_snr(&g, &h, &optimal_theta(&g, &h).unwrap(), rf.noise_power_w)
                .unwrap()
                .linear;
            let mut rng = TrialRng::new(seed);
            let theta: Vec<Complex64> = (0..g.len())
                .map(|_| Complex64::from_polar(rng.uniform(), rng.uniform_in(-3.2, 3.2)))
                .collect();
            let state = ReflectState::new(theta).unwrap();
            let snr = received_snr(&g, &h, &state, rf.noise_power_w).unwrap().linear;
            prop_assert!(snr <= best * (1.0 + 1e-12));
        }

        /// Multiplying every coefficient by one unit scalar leaves the SNR
        /// unchanged.
        #[test]
        fn global_phase_invariance(phase in -3.1..3.1f64) {
            let (layout, ap, ue) = small_scene();
            let rf = rf();
            let g = irs_ue_channel(&layout, &ue, &rf, 28e9).unwrap();
            let h = ap_irs_channel(&layout, &ap, &rf, 28e9).unwrap();
            let state = optimal_theta(&g, &h).unwrap();
            let rot = Complex64::from_polar(1.0, phase);
            let rotated = ReflectState {
                theta: state.theta.iter().map(|t| t * rot).collect(),
            };
            let a = received_snr(&g, &h, &state, rf.noise_power_w).unwrap().linear;
            let b = received_snr(&g, &h, &rotated, rf.noise_power_w).unwrap().linear;
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }
    }
}
