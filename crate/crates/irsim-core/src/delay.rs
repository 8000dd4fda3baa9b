//! Wideband propagation-delay estimation from per-subband channel estimates,
//! using the Bartlett spectral objective
//!
//! ```text
//! P(t) = | sum_k hbar_k * exp(j 2 pi f_k t) |^2
//! ```
//!
//! maximized over a coarse delay grid followed by local parabolic
//! refinement. On a uniform frequency grid with spacing F_d the objective is
//! periodic with period 1/F_d, so the search window must stay inside one
//! period to be unambiguous.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::channel::{RfParams, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// Search window and resolution for the delay estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayGrid {
    pub t_min_s: f64,
    pub t_max_s: f64,
    /// Coarse grid step; must sample the main lobe (width 1/(K F_d)) at
    /// least twice.
    pub coarse_step_s: f64,
    /// Rounds of parabolic refinement around the coarse peak; each round
    /// halves the bracketing step.
    pub refine_iterations: usize,
}

impl DelayGrid {
    /// Default grid for a scenario: window from zero to the scene-diameter
    /// delay (capped at 95% of the unambiguous period), coarse step of a
    /// quarter of the Rayleigh delay resolution, two refinement rounds.
    pub fn for_scene(rf: &RfParams, scene_diameter_m: f64) -> Result<Self> {
        rf.validate()?;
        if !(scene_diameter_m > 0.0 && scene_diameter_m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scene_diameter_m",
                reason: "must be positive and finite",
            });
        }
        let period = 1.0 / rf.subband_width_hz;
        let t_scene = scene_diameter_m / SPEED_OF_LIGHT;
        if t_scene > 0.95 * period {
            return Err(Error::InvalidParameter {
                name: "scene_diameter_m",
                reason: "exceeds the unambiguous delay range of the subband grid",
            });
        }
        let grid = Self {
            t_min_s: 0.0,
            t_max_s: t_scene,
            coarse_step_s: 0.25 / rf.bandwidth_hz(),
            refine_iterations: 2,
        };
        grid.validate(rf)?;
        Ok(grid)
    }

    pub fn validate(&self, rf: &RfParams) -> Result<()> {
        if !(self.t_min_s >= 0.0 && self.t_min_s.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "delay_t_min_s",
                reason: "must be non-negative and finite",
            });
        }
        if !(self.t_max_s > self.t_min_s && self.t_max_s.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "delay_t_max_s",
                reason: "must exceed delay_t_min_s",
            });
        }
        if self.t_max_s > 1.0 / rf.subband_width_hz {
            return Err(Error::InvalidParameter {
                name: "delay_t_max_s",
                reason: "exceeds the unambiguous period 1/F_d",
            });
        }
        if !(self.coarse_step_s > 0.0 && self.coarse_step_s.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "delay_coarse_step_s",
                reason: "must be positive and finite",
            });
        }
        if self.coarse_step_s > 0.5 / rf.bandwidth_hz() {
            return Err(Error::InvalidParameter {
                name: "delay_coarse_step_s",
                reason: "must sample the main lobe at least twice (step <= 1/(2 K F_d))",
            });
        }
        Ok(())
    }
}

/// Delay steering vector `b(t)`: entry k is `exp(j 2 pi f_k t)`.
pub fn steering_vector(frequencies: &[f64], t_s: f64) -> Vec<Complex64> {
    frequencies
        .iter()
        .map(|&f| Complex64::from_polar(1.0, core::f64::consts::TAU * f * t_s))
        .collect()
}

/// Bartlett objective at a single delay hypothesis.
pub fn bartlett_power(estimate: &[Complex64], frequencies: &[f64], t_s: f64) -> Result<f64> {
    if estimate.len() != frequencies.len() {
        return Err(Error::LengthMismatch {
            context: "channel estimate vs frequency grid",
            expected: frequencies.len(),
            actual: estimate.len(),
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (h, &f) in estimate.iter().zip(frequencies) {
        acc += h * Complex64::from_polar(1.0, core::f64::consts::TAU * f * t_s);
    }
    Ok(acc.norm_sqr())
}

/// True when the grid is uniform enough for the incremental scan.
fn uniform_spacing(frequencies: &[f64]) -> Option<f64> {
    if frequencies.len() < 2 {
        return None;
    }
    let step = frequencies[1] - frequencies[0];
    if step <= 0.0 {
        return None;
    }
    for w in frequencies.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-6 * step {
            return None;
        }
    }
    Some(step)
}

/// Coarse scan of the Bartlett objective over the grid. Uses a per-delay
/// phase recurrence on uniform frequency grids (two trig evaluations per
/// delay hypothesis instead of K); falls back to direct evaluation
/// otherwise. Returns (argmax index, delays evaluated).
fn coarse_scan(
    estimate: &[Complex64],
    frequencies: &[f64],
    grid: &DelayGrid,
) -> Result<(usize, Vec<f64>)> {
    let steps = libm::floor((grid.t_max_s - grid.t_min_s) / grid.coarse_step_s) as usize;
    let delays: Vec<f64> = (0..=steps)
        .map(|i| grid.t_min_s + i as f64 * grid.coarse_step_s)
        .collect();

    let spacing = uniform_spacing(frequencies);
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &t) in delays.iter().enumerate() {
        let power = match spacing {
            Some(fd) => {
                // b_k(t) = exp(j 2 pi f_1 t) * ratio^k with
                // ratio = exp(j 2 pi F_d t); rounding drift over K terms is
                // ~K*eps and irrelevant to the argmax.
                let mut phasor =
                    Complex64::from_polar(1.0, core::f64::consts::TAU * frequencies[0] * t);
                let ratio = Complex64::from_polar(1.0, core::f64::consts::TAU * fd * t);
                let mut acc = Complex64::new(0.0, 0.0);
                for h in estimate {
                    acc += h * phasor;
                    phasor *= ratio;
                }
                acc.norm_sqr()
            }
            None => bartlett_power(estimate, frequencies, t)?,
        };
        if power > best.1 {
            best = (i, power);
        }
    }
    Ok((best.0, delays))
}

/// Estimate the delay maximizing the Bartlett objective: coarse grid argmax,
/// then `refine_iterations` rounds of three-point parabolic interpolation
/// with a halving bracket. The result always lies inside the grid window.
pub fn estimate_delay(
    estimate: &[Complex64],
    frequencies: &[f64],
    grid: &DelayGrid,
) -> Result<f64> {
    if estimate.len() != frequencies.len() {
        return Err(Error::LengthMismatch {
            context: "channel estimate vs frequency grid",
            expected: frequencies.len(),
            actual: estimate.len(),
        });
    }
    if frequencies.is_empty() {
        return Err(Error::EmptyInput("frequencies"));
    }
    let (coarse_idx, delays) = coarse_scan(estimate, frequencies, grid)?;
    let mut t = delays[coarse_idx];
    let mut half_step = grid.coarse_step_s;
    for _ in 0..grid.refine_iterations {
        let left = (t - half_step).max(grid.t_min_s);
        let right = (t + half_step).min(grid.t_max_s);
        // Evaluate symmetrically around the current center where possible.
        let p_l = bartlett_power(estimate, frequencies, left)?;
        let p_c = bartlett_power(estimate, frequencies, t)?;
        let p_r = bartlett_power(estimate, frequencies, right)?;
        let denom = p_l - 2.0 * p_c + p_r;
        if denom.abs() > 0.0 && p_c >= p_l && p_c >= p_r {
            let offset = 0.5 * (p_l - p_r) / denom * half_step;
            // Clamp to the bracket; a vertex outside it means the parabola
            // model is invalid there.
            let offset = offset.clamp(-half_step, half_step);
            t = (t + offset).clamp(grid.t_min_s, grid.t_max_s);
        } else if p_l > p_c || p_r > p_c {
            // Peak not bracketed (window edge): move toward the higher side.
            t = if p_l > p_r { left } else { right };
        }
        half_step *= 0.5;
    }
    Ok(t)
}

/// Convert a total AP-RUS-UE path delay into the RUS-to-terminal range by
/// subtracting the known AP-to-RUS leg. A total path not longer than the
/// first leg is physically inconsistent and is reported as an error so the
/// caller can exclude the observation.
pub fn delay_to_rus_ue_distance(delay_s: f64, ap_rus_distance_m: f64) -> Result<f64> {
    let total = SPEED_OF_LIGHT * delay_s;
    if !(total > ap_rus_distance_m) {
        return Err(Error::InconsistentRange {
            total_path_m: total,
            first_leg_m: ap_rus_distance_m,
        });
    }
    Ok(total - ap_rus_distance_m)
}
