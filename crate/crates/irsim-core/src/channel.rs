//! Near-field line-of-sight channel synthesis.
//!
//! Each reflecting unit sees the access point (and the terminal) at its own
//! exact distance; no far-field plane-wave approximation is made. A single
//! link coefficient is
//!
//! ```text
//! h = (alpha / d^gamma) * exp(-j 2 pi f d / c)
//! ```
//!
//! and the effective wideband channel of an active RUS under a codeword `w`
//! is the per-subband sum of `g_i * h_i * w_i` over its member units.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::geometry::{IrsLayout, Point3, RusSpec};
use crate::rng::TrialRng;
use crate::{Error, Result};

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// RF and propagation parameters of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RfParams {
    /// Center frequency F_c, Hz.
    pub center_frequency_hz: f64,
    /// Number of subbands K the sounding bandwidth is divided into.
    pub subband_count: usize,
    /// Width F_d of one subband, Hz.
    pub subband_width_hz: f64,
    /// Path-loss model constant (alpha).
    pub pathloss_constant: f64,
    /// Path-loss exponent (gamma).
    pub pathloss_exponent: f64,
    /// Thermal noise power at the receiver, Watts.
    pub noise_power_w: f64,
}

impl RfParams {
    pub fn validate(&self) -> Result<()> {
        if self.subband_count == 0 {
            return Err(Error::InvalidParameter {
                name: "subband_count",
                reason: "must be a positive integer",
            });
        }
        if !(self.subband_width_hz > 0.0 && self.subband_width_hz.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "subband_width_hz",
                reason: "must be positive and finite",
            });
        }
        let half_band = self.subband_count as f64 * self.subband_width_hz / 2.0;
        if !(self.center_frequency_hz > half_band) {
            return Err(Error::InvalidParameter {
                name: "center_frequency_hz",
                reason: "must exceed half the sounding bandwidth",
            });
        }
        if !(self.pathloss_constant > 0.0 && self.pathloss_constant.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "pathloss_constant",
                reason: "must be positive and finite",
            });
        }
        if !(self.pathloss_exponent >= 0.0 && self.pathloss_exponent.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "pathloss_exponent",
                reason: "must be non-negative and finite",
            });
        }
        if !(self.noise_power_w > 0.0 && self.noise_power_w.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "noise_power_w",
                reason: "must be positive and finite",
            });
        }
        Ok(())
    }

    /// Total sounding bandwidth K * F_d, Hz.
    pub fn bandwidth_hz(&self) -> f64 {
        self.subband_count as f64 * self.subband_width_hz
    }
}

/// Center frequencies of the K subbands:
/// `f_k = F_c - K*F_d/2 + (k - 1/2)*F_d` for k = 1..=K.
///
/// The grid is strictly increasing, spans (K-1)*F_d, and has mean F_c.
pub fn subband_frequencies(rf: &RfParams) -> Vec<f64> {
    let k = rf.subband_count;
    let fd = rf.subband_width_hz;
    let start = rf.center_frequency_hz - k as f64 * fd / 2.0;
    (0..k).map(|i| start + (i as f64 + 0.5) * fd).collect()
}

/// Distance-power law `alpha / d^gamma`. Strictly decreasing in `d` for
/// gamma > 0; rejects the d <= 0 singularity.
pub fn path_loss(alpha: f64, gamma: f64, distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::NonPositiveDistance { name: "distance_m" });
    }
    Ok(alpha / libm::pow(distance_m, gamma))
}

/// Line-of-sight coefficient at frequency `f` over distance `d`:
/// magnitude `alpha/d^gamma`, phase `-2 pi f d / c`.
pub fn los_coefficient(rf: &RfParams, frequency_hz: f64, distance_m: f64) -> Result<Complex64> {
    let rho = path_loss(rf.pathloss_constant, rf.pathloss_exponent, distance_m)?;
    let phase = -core::f64::consts::TAU * frequency_hz * distance_m / SPEED_OF_LIGHT;
    Ok(Complex64::from_polar(rho, phase))
}

/// Per-unit LOS channel from an arbitrary point to every unit of the panel,
/// using each unit's exact distance.
fn los_channel_from(
    layout: &IrsLayout,
    point: &Point3,
    rf: &RfParams,
    frequency_hz: f64,
) -> Result<Vec<Complex64>> {
    let mut coeffs = Vec::with_capacity(layout.num_units());
    for col in 0..layout.n_cols {
        for row in 0..layout.n_rows {
            let d = point.distance(&layout.position_rc(row, col));
            coeffs.push(los_coefficient(rf, frequency_hz, d)?);
        }
    }
    Ok(coeffs)
}

/// AP-to-panel channel `h` at one frequency, length N, unit-index order.
pub fn ap_irs_channel(
    layout: &IrsLayout,
    ap_position: &Point3,
    rf: &RfParams,
    frequency_hz: f64,
) -> Result<Vec<Complex64>> {
    if !(ap_position.x > 0.0) {
        return Err(Error::InvalidParameter {
            name: "ap_position",
            reason: "x-coordinate must be positive (in front of the panel)",
        });
    }
    los_channel_from(layout, ap_position, rf, frequency_hz)
}

/// Panel-to-terminal channel `g` at one frequency, length N. Same functional
/// form as [`ap_irs_channel`] with the terminal position.
pub fn irs_ue_channel(
    layout: &IrsLayout,
    ue_position: &Point3,
    rf: &RfParams,
    frequency_hz: f64,
) -> Result<Vec<Complex64>> {
    if !(ue_position.x > 0.0) {
        return Err(Error::InvalidParameter {
            name: "ue_position",
            reason: "x-coordinate must be positive (in front of the panel)",
        });
    }
    los_channel_from(layout, ue_position, rf, frequency_hz)
}

/// Effective wideband AP-RUS-UE channel under codeword `w`:
/// for each subband k, `sum_i g_i(f_k) h_i(f_k) w_i` over the RUS members.
/// Only the active RUS contributes; the rest of the panel is dark.
///
/// Returns one coefficient per subband (length K).
pub fn effective_rus_channel(
    layout: &IrsLayout,
    rus: &RusSpec,
    codeword: &[Complex64],
    ap_position: &Point3,
    ue_position: &Point3,
    rf: &RfParams,
) -> Result<Vec<Complex64>> {
    if codeword.len() != rus.num_units() {
        return Err(Error::LengthMismatch {
            context: "codeword vs RUS members",
            expected: rus.num_units(),
            actual: codeword.len(),
        });
    }
    for w in codeword {
        if w.norm_sqr() > 1.0 + 1e-9 {
            return Err(Error::InvalidParameter {
                name: "codeword",
                reason: "entries must have magnitude at most 1",
            });
        }
    }
    // Distances are frequency-independent; compute once.
    let mut legs = Vec::with_capacity(rus.num_units());
    for &n in &rus.member_indices {
        let unit = layout.unit_position(n)?;
        legs.push((ap_position.distance(&unit), ue_position.distance(&unit)));
    }
    let freqs = subband_frequencies(rf);
    let mut out = Vec::with_capacity(freqs.len());
    for &f in &freqs {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &(d_ap, d_ue)) in legs.iter().enumerate() {
            let h = los_coefficient(rf, f, d_ap)?;
            let g = los_coefficient(rf, f, d_ue)?;
            acc += g * h * codeword[i];
        }
        out.push(acc);
    }
    Ok(out)
}

/// Noisy channel-estimate model: the channel is scaled to unit average
/// per-element power, then mixed with i.i.d. unit-variance complex Gaussian
/// noise as `sqrt(1 - sigma_e^2) * h_norm + sigma_e * z`.
///
/// `sigma_e` in [0, 1] is the estimate-quality parameter: 0 returns the
/// normalized channel exactly (no draws are consumed), 1 returns pure noise.
/// Delay estimation is invariant to positive scaling, so the normalization
/// does not bias the downstream estimates.
pub fn corrupt_estimate(
    channel: &[Complex64],
    sigma_e: f64,
    rng: &mut TrialRng,
) -> Result<Vec<Complex64>> {
    if !(0.0..=1.0).contains(&sigma_e) || !sigma_e.is_finite() {
        return Err(Error::InvalidParameter {
            name: "sigma_e",
            reason: "must lie in [0, 1]",
        });
    }
    if channel.is_empty() {
        return Err(Error::EmptyInput("channel"));
    }
    let mean_power: f64 =
        channel.iter().map(|c| c.norm_sqr()).sum::<f64>() / channel.len() as f64;
    // An all-zero channel (e.g. a shut-down RUS) has no scale; leave it at
    // zero so the output is pure noise.
    let scale = if mean_power > 0.0 {
        1.0 / libm::sqrt(mean_power)
    } else {
        0.0
    };
    if sigma_e == 0.0 {
        return Ok(channel.iter().map(|c| c * scale).collect());
    }
    let signal_gain = libm::sqrt(1.0 - sigma_e * sigma_e);
    Ok(channel
        .iter()
        .map(|c| c * scale * signal_gain + rng.complex_gaussian() * sigma_e)
        .collect())
}
