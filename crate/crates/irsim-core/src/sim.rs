//! Scenario orchestration: the four-step acquisition pipeline per trial,
//! position sweeps with Monte Carlo repetition, and metric aggregation.
//!
//! One trial runs, in order: per-RUS codeword search and noisy wideband
//! channel estimation, delay estimation and range extraction, trilateration
//! of the terminal, channel reconstruction at the estimated position, and
//! phase-conjugate coefficient computation. The proposed, upper-bound
//! ("true position") and no-optimization SNRs are then evaluated against
//! the true channels.
//!
//! Everything is a pure function of `(config, trial index)`: noise streams
//! are keyed, not shared, so sweeps may run their points in any order or in
//! parallel and still produce bit-identical results.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::beam::{optimal_theta, received_snr, reconstruct_ue_channel, ReflectState};
use crate::channel::{
    ap_irs_channel, corrupt_estimate, effective_rus_channel, irs_ue_channel,
    subband_frequencies, RfParams, SPEED_OF_LIGHT,
};
use crate::codebook::{build_codebook, search_codeword, Codebook};
use crate::delay::{delay_to_rus_ue_distance, estimate_delay, DelayGrid};
use crate::geometry::{place_rus, place_rus_at, IrsLayout, Point3, RusSpec};
use crate::positioner::{trilaterate, RangeObservation, SolverConfig};
use crate::rng::TrialRng;
use crate::{Error, Result};

/// Noise-stream purposes, the last label of every rng key.
const STREAM_SEARCH: u64 = 0;
const STREAM_ESTIMATE: u64 = 1;

/// How the RUS blocks are placed on the panel.
#[derive(Debug, Clone, PartialEq)]
pub struct RusPlacement {
    pub count: usize,
    pub rus_rows: usize,
    pub rus_cols: usize,
    /// Explicit 0-based (row, col) block anchors; None uses the default
    /// placement policy (corners plus center for five blocks).
    pub anchors: Option<Vec<(usize, usize)>>,
}

/// Codebook shape and search strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodebookParams {
    pub oversampling_v: usize,
    pub oversampling_h: usize,
    /// Search once on the first RUS and reuse the winner everywhere.
    pub shared_codeword: bool,
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub layout: IrsLayout,
    pub rus: RusPlacement,
    pub rf: RfParams,
    pub ap_position: Point3,
    pub ue_position: Point3,
    /// Channel-estimate quality in [0, 1]; 0 is a perfect estimate.
    pub sigma_e: f64,
    pub codebook: CodebookParams,
    /// Explicit delay-search grid; None derives one from the RF parameters
    /// and the scene diameter.
    pub delay_grid: Option<DelayGrid>,
    pub solver: SolverConfig,
    /// Upper bound on any AP-RUS-UE path length, metres; bounds the delay
    /// search window.
    pub scene_diameter_m: f64,
    pub seed: u64,
    /// Monte Carlo repetitions per evaluation point.
    pub trials: u32,
}

impl Default for ScenarioConfig {
    /// The reference scenario: a 64 x 128 panel with 5 mm spacing, five
    /// 4 x 4 RUS blocks, 128 subbands of 3.6 MHz around 28 GHz, and the
    /// AP at (5, -5, 0).
    fn default() -> Self {
        Self {
            layout: IrsLayout {
                n_rows: 64,
                n_cols: 128,
                row_spacing_m: 0.005,
                col_spacing_m: 0.005,
            },
            rus: RusPlacement {
                count: 5,
                rus_rows: 4,
                rus_cols: 4,
                anchors: None,
            },
            rf: RfParams {
                center_frequency_hz: 28e9,
                subband_count: 128,
                subband_width_hz: 3.6e6,
                pathloss_constant: 2.0,
                pathloss_exponent: 2.0,
                noise_power_w: 1e-3,
            },
            ap_position: Point3::new(5.0, -5.0, 0.0),
            ue_position: Point3::new(5.0, 3.0, 0.0),
            sigma_e: 0.1,
            codebook: CodebookParams {
                oversampling_v: 1,
                oversampling_h: 1,
                shared_codeword: false,
            },
            delay_grid: None,
            solver: SolverConfig::default(),
            scene_diameter_m: 60.0,
            seed: 42,
            trials: 50,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        self.rf.validate()?;
        if !self.ap_position.is_finite() || !(self.ap_position.x > 0.0) {
            return Err(Error::InvalidParameter {
                name: "ap_position",
                reason: "must be finite with positive x (in front of the panel)",
            });
        }
        if !self.ue_position.is_finite() || !(self.ue_position.x > 0.0) {
            return Err(Error::InvalidParameter {
                name: "ue_position",
                reason: "must be finite with positive x (in front of the panel)",
            });
        }
        if !(0.0..=1.0).contains(&self.sigma_e) || !self.sigma_e.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma_e",
                reason: "must lie in [0, 1]",
            });
        }
        if self.codebook.oversampling_v == 0 || self.codebook.oversampling_h == 0 {
            return Err(Error::InvalidParameter {
                name: "oversampling_v/oversampling_h",
                reason: "must be positive integers",
            });
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                reason: "must be at least 1",
            });
        }
        // Grid construction re-validates the scene diameter against the
        // unambiguous delay range.
        let grid = self.resolve_delay_grid()?;
        grid.validate(&self.rf)?;
        Ok(())
    }

    fn resolve_delay_grid(&self) -> Result<DelayGrid> {
        match self.delay_grid {
            Some(grid) => Ok(grid),
            None => DelayGrid::for_scene(&self.rf, self.scene_diameter_m),
        }
    }

    fn place(&self) -> Result<Vec<RusSpec>> {
        match &self.rus.anchors {
            Some(anchors) => {
                place_rus_at(&self.layout, anchors, self.rus.rus_rows, self.rus.rus_cols)
            }
            None => place_rus(
                &self.layout,
                self.rus.count,
                self.rus.rus_rows,
                self.rus.rus_cols,
            ),
        }
    }
}

/// Pilot/training budget of one acquisition in OFDM symbols: one symbol per
/// codeword trial, plus one activation symbol for each further RUS when the
/// winning codeword is shared.
pub fn acquisition_symbol_count(config: &ScenarioConfig) -> usize {
    let words = (config.codebook.oversampling_v * config.rus.rus_rows)
        * (config.codebook.oversampling_h * config.rus.rus_cols);
    if config.codebook.shared_codeword {
        words + config.rus.count.saturating_sub(1)
    } else {
        words * config.rus.count
    }
}

/// Per-RUS acquisition bookkeeping for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RusTrialRecord {
    pub codeword_index: usize,
    pub delay_s: f64,
    /// Extracted RUS-terminal range; negative or zero values are carried
    /// for diagnosis but flagged invalid.
    pub range_m: f64,
    pub valid: bool,
}

/// Outcome of one acquisition trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub true_position: Point3,
    pub estimated_position: Point3,
    pub position_error_m: f64,
    pub per_rus: Vec<RusTrialRecord>,
    pub snr_proposed_db: f64,
    pub snr_upper_db: f64,
    pub snr_noopt_db: f64,
    pub acquisition_failed: bool,
}

/// Scenario state shared by all trials at one terminal position.
struct Prepared {
    config: ScenarioConfig,
    rus_list: Vec<RusSpec>,
    ap_rus_distances: Vec<f64>,
    codebook: Codebook,
    frequencies: Vec<f64>,
    grid: DelayGrid,
    /// True channels at the pilot frequency and the derived references.
    ue_channel: Vec<Complex64>,
    ap_channel: Vec<Complex64>,
    snr_upper_linear: f64,
    snr_noopt_linear: f64,
    anchor_centroid: Point3,
}

fn prepare(config: &ScenarioConfig) -> Result<Prepared> {
    config.validate()?;
    let rus_list = config.place()?;
    let grid = config.resolve_delay_grid()?;
    let fc = config.rf.center_frequency_hz;

    let mut ap_rus_distances = Vec::with_capacity(rus_list.len());
    let mut centroid = Point3::ORIGIN;
    for rus in &rus_list {
        let d_ap = config.ap_position.distance(&rus.center);
        let d_ue = config.ue_position.distance(&rus.center);
        if (d_ap + d_ue) / SPEED_OF_LIGHT > grid.t_max_s {
            return Err(Error::InvalidParameter {
                name: "scene_diameter_m",
                reason: "an AP-RUS-UE path exceeds the delay search window",
            });
        }
        ap_rus_distances.push(d_ap);
        centroid = centroid + rus.center;
    }
    let anchor_centroid = centroid * (1.0 / rus_list.len() as f64);

    let codebook = build_codebook(
        config.rus.rus_rows,
        config.rus.rus_cols,
        config.codebook.oversampling_v,
        config.codebook.oversampling_h,
    )?;
    let frequencies = subband_frequencies(&config.rf);

    let ue_channel = irs_ue_channel(&config.layout, &config.ue_position, &config.rf, fc)?;
    let ap_channel = ap_irs_channel(&config.layout, &config.ap_position, &config.rf, fc)?;
    let upper_state = optimal_theta(&ue_channel, &ap_channel)?;
    let snr_upper_linear =
        received_snr(&ue_channel, &ap_channel, &upper_state, config.rf.noise_power_w)?.linear;
    let noopt_state = ReflectState::uniform(ue_channel.len());
    let snr_noopt_linear =
        received_snr(&ue_channel, &ap_channel, &noopt_state, config.rf.noise_power_w)?.linear;

    Ok(Prepared {
        config: config.clone(),
        rus_list,
        ap_rus_distances,
        codebook,
        frequencies,
        grid,
        ue_channel,
        ap_channel,
        snr_upper_linear,
        snr_noopt_linear,
        anchor_centroid,
    })
}

fn run_trial(prep: &Prepared, trial: u64) -> Result<TrialResult> {
    let config = &prep.config;
    let mut per_rus = Vec::with_capacity(prep.rus_list.len());
    let mut observations = Vec::with_capacity(prep.rus_list.len());
    let mut shared_index: Option<usize> = None;

    for (m, rus) in prep.rus_list.iter().enumerate() {
        let codeword_index = match shared_index {
            Some(idx) => idx,
            None => {
                // sigma_e = 0 models ideal acquisition: the power feedback
                // is noiseless along with the channel estimates.
                let mut rng =
                    TrialRng::from_labels(config.seed, &[trial, m as u64, STREAM_SEARCH]);
                let feedback_rng = (config.sigma_e > 0.0).then_some(&mut rng);
                let found = search_codeword(
                    &prep.codebook,
                    &config.layout,
                    rus,
                    &config.ap_position,
                    &config.ue_position,
                    &config.rf,
                    feedback_rng,
                )?;
                if config.codebook.shared_codeword {
                    shared_index = Some(found.index);
                }
                found.index
            }
        };
        let codeword = prep.codebook.codeword(codeword_index)?;
        let wideband = effective_rus_channel(
            &config.layout,
            rus,
            codeword,
            &config.ap_position,
            &config.ue_position,
            &config.rf,
        )?;
        let mut rng = TrialRng::from_labels(config.seed, &[trial, m as u64, STREAM_ESTIMATE]);
        let estimate = corrupt_estimate(&wideband, config.sigma_e, &mut rng)?;
        let delay_s = estimate_delay(&estimate, &prep.frequencies, &prep.grid)?;
        let (range_m, valid) = match delay_to_rus_ue_distance(delay_s, prep.ap_rus_distances[m])
        {
            Ok(range) => (range, true),
            Err(_) => (
                SPEED_OF_LIGHT * delay_s - prep.ap_rus_distances[m],
                false,
            ),
        };
        per_rus.push(RusTrialRecord {
            codeword_index,
            delay_s,
            range_m,
            valid,
        });
        observations.push(RangeObservation {
            anchor: rus.center,
            range_m,
            valid,
        });
    }

    let valid_count = observations.iter().filter(|o| o.valid).count();
    let (estimated_position, acquisition_failed) = if valid_count >= 3 {
        match trilaterate(&observations, &config.solver) {
            Ok(estimate) => (estimate.point, false),
            Err(_) => (prep.anchor_centroid, true),
        }
    } else {
        (prep.anchor_centroid, true)
    };

    // Failed acquisitions fall back to the fixed all-ones coefficients.
    let snr_proposed_linear = if acquisition_failed {
        prep.snr_noopt_linear
    } else {
        let reconstructed = reconstruct_ue_channel(
            &config.layout,
            &estimated_position,
            &config.rf,
            config.rf.center_frequency_hz,
        )?;
        let state = optimal_theta(&reconstructed, &prep.ap_channel)?;
        received_snr(
            &prep.ue_channel,
            &prep.ap_channel,
            &state,
            config.rf.noise_power_w,
        )?
        .linear
    };

    let position_error_m = estimated_position.distance(&config.ue_position);
    debug_assert!(snr_proposed_linear <= prep.snr_upper_linear * (1.0 + 1e-9));

    Ok(TrialResult {
        true_position: config.ue_position,
        estimated_position,
        position_error_m,
        per_rus,
        snr_proposed_db: db(snr_proposed_linear),
        snr_upper_db: db(prep.snr_upper_linear),
        snr_noopt_db: db(prep.snr_noopt_linear),
        acquisition_failed,
    })
}

fn db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}

fn from_db(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// Run the full acquisition pipeline for one trial of the scenario.
/// Deterministic in `(config, trial)`.
pub fn run_acquisition(config: &ScenarioConfig, trial: u64) -> Result<TrialResult> {
    let prep = prepare(config)?;
    run_trial(&prep, trial)
}

/// Sweep axis for terminal-position scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    X,
    Y,
}

/// A linear scan of the terminal position with Monte Carlo trials per point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub from_m: f64,
    pub to_m: f64,
    pub step_m: f64,
    pub trials: u32,
}

impl Sweep {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_m > 0.0 && self.step_m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "step_m",
                reason: "must be positive and finite",
            });
        }
        if !(self.from_m < self.to_m) || !self.from_m.is_finite() || !self.to_m.is_finite() {
            return Err(Error::InvalidParameter {
                name: "from_m/to_m",
                reason: "sweep start must be below its end",
            });
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

/// Aggregated metrics for one (position, sigma_e) sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub ue_position: Point3,
    pub sigma_e: f64,
    pub trials: u32,
    pub snr_upper_db: f64,
    pub snr_proposed_db: f64,
    pub snr_noopt_db: f64,
    pub mean_position_error_m: f64,
    pub failure_rate: f64,
}

/// Terminal positions visited by a sweep, in scan order.
pub fn sweep_positions(config: &ScenarioConfig, sweep: &Sweep) -> Result<Vec<Point3>> {
    sweep.validate()?;
    let count = libm::floor((sweep.to_m - sweep.from_m) / sweep.step_m + 1e-9) as usize + 1;
    let base = config.ue_position;
    Ok((0..count)
        .map(|i| {
            let coord = sweep.from_m + i as f64 * sweep.step_m;
            match sweep.axis {
                SweepAxis::X => Point3::new(coord, base.y, base.z),
                SweepAxis::Y => Point3::new(base.x, coord, base.z),
            }
        })
        .collect())
}

/// Run all trials of one sweep point and aggregate. SNRs average in the
/// linear domain and convert to dB afterwards; position errors average
/// arithmetically; failed trials stay in the aggregates (with the all-ones
/// fallback coefficients) and are counted in `failure_rate`.
///
/// `point_index` keys the noise substreams so that any execution order over
/// points reproduces the same numbers.
pub fn run_sweep_point(
    config: &ScenarioConfig,
    position: Point3,
    point_index: u64,
    trials: u32,
) -> Result<SweepRecord> {
    let mut point_config = config.clone();
    point_config.ue_position = position;
    let prep = prepare(&point_config)?;
    let mut upper = 0.0;
    let mut proposed = 0.0;
    let mut noopt = 0.0;
    let mut err = 0.0;
    let mut failures = 0u32;
    for t in 0..trials {
        let trial_id = point_index * trials as u64 + t as u64;
        let result = run_trial(&prep, trial_id)?;
        upper += from_db(result.snr_upper_db);
        proposed += from_db(result.snr_proposed_db);
        noopt += from_db(result.snr_noopt_db);
        err += result.position_error_m;
        failures += result.acquisition_failed as u32;
    }
    let n = trials as f64;
    Ok(SweepRecord {
        ue_position: position,
        sigma_e: point_config.sigma_e,
        trials,
        snr_upper_db: db(upper / n),
        snr_proposed_db: db(proposed / n),
        snr_noopt_db: db(noopt / n),
        mean_position_error_m: err / n,
        failure_rate: failures as f64 / n,
    })
}

/// Serial sweep: every position in order. Output is bit-identical to any
/// parallel execution of [`run_sweep_point`] over the same indices.
pub fn run_sweep(config: &ScenarioConfig, sweep: &Sweep) -> Result<Vec<SweepRecord>> {
    let positions = sweep_positions(config, sweep)?;
    positions
        .into_iter()
        .enumerate()
        .map(|(i, p)| run_sweep_point(config, p, i as u64, sweep.trials))
        .collect()
}

/// Average SNR gain of the proposed coefficients over the all-ones
/// baseline across sweep records, in dB.
///
/// Consistent with the per-point aggregation, the averaging happens in the
/// linear power domain: the gain is the ratio of the position-averaged
/// proposed power to the position-averaged baseline power. The fixed
/// all-ones configuration drops into deterministic deep fades wherever the
/// specular point leaves the panel, so an arithmetic mean of per-position
/// dB differences would be dominated by those fades rather than by the
/// delivered power.
pub fn aggregate_gain(records: &[SweepRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput("records"));
    }
    let proposed: f64 = records.iter().map(|r| from_db(r.snr_proposed_db)).sum();
    let noopt: f64 = records.iter().map(|r| from_db(r.snr_noopt_db)).sum();
    Ok(db(proposed / noopt))
}
