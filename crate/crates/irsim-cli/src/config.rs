//! JSON scenario configuration.
//!
//! Every key is optional and falls back to the reference scenario default;
//! unknown keys are rejected rather than ignored. The optional `sweep`
//! object carries default sweep parameters so a bundled config can
//! reproduce a whole figure with one command; command-line flags override
//! it field by field.

use anyhow::{anyhow, bail, Context, Result};
use irsim_core::delay::DelayGrid;
use irsim_core::geometry::Point3;
use irsim_core::sim::{ScenarioConfig, SweepAxis};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    // Panel layout.
    pub n_rows: Option<usize>,
    pub n_cols: Option<usize>,
    pub row_spacing_m: Option<f64>,
    pub col_spacing_m: Option<f64>,
    // RUS placement.
    pub rus_count: Option<usize>,
    pub rus_rows: Option<usize>,
    pub rus_cols: Option<usize>,
    /// Explicit 0-based [row, col] block anchors, overriding the default
    /// corners-plus-center policy.
    pub rus_anchors: Option<Vec<[usize; 2]>>,
    // RF parameters.
    pub center_frequency_hz: Option<f64>,
    pub subband_count: Option<usize>,
    pub subband_width_hz: Option<f64>,
    pub pathloss_constant: Option<f64>,
    pub pathloss_exponent: Option<f64>,
    pub noise_power_w: Option<f64>,
    // Geometry.
    pub ap_position: Option<[f64; 3]>,
    pub ue_position: Option<[f64; 3]>,
    // Estimate quality.
    pub sigma_e: Option<f64>,
    // Codebook.
    pub oversampling_v: Option<usize>,
    pub oversampling_h: Option<usize>,
    pub shared_codeword: Option<bool>,
    // Delay-search grid overrides.
    pub delay_t_min_s: Option<f64>,
    pub delay_t_max_s: Option<f64>,
    pub delay_coarse_step_s: Option<f64>,
    pub delay_refine_iterations: Option<usize>,
    // Positioning solver.
    pub solver_damping: Option<f64>,
    pub solver_max_iterations: Option<usize>,
    pub solver_step_tolerance_m: Option<f64>,
    pub solver_gradient_tolerance: Option<f64>,
    // Scene and run control.
    pub scene_diameter_m: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<u32>,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Option<String>,
    pub from_m: Option<f64>,
    pub to_m: Option<f64>,
    pub step_m: Option<f64>,
    pub sigma_e_values: Option<Vec<f64>>,
    pub trials: Option<u32>,
}

/// Sweep parameters resolved from config and built-in defaults; flags may
/// still override individual fields.
#[derive(Debug, Clone)]
pub struct SweepDefaults {
    pub axis: SweepAxis,
    pub from_m: f64,
    pub to_m: f64,
    pub step_m: f64,
    pub sigma_e_values: Vec<f64>,
    pub trials: u32,
}

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub scenario: ScenarioConfig,
    pub sweep: SweepDefaults,
}

pub fn parse_axis(s: &str) -> Result<SweepAxis> {
    match s {
        "x" | "X" => Ok(SweepAxis::X),
        "y" | "Y" => Ok(SweepAxis::Y),
        other => bail!("invalid parameter `axis`: expected \"x\" or \"y\", got \"{other}\""),
    }
}

impl ConfigFile {
    pub fn into_loaded(self) -> Result<LoadedConfig> {
        let mut scenario = ScenarioConfig::default();
        if let Some(v) = self.n_rows {
            scenario.layout.n_rows = v;
        }
        if let Some(v) = self.n_cols {
            scenario.layout.n_cols = v;
        }
        if let Some(v) = self.row_spacing_m {
            scenario.layout.row_spacing_m = v;
        }
        if let Some(v) = self.col_spacing_m {
            scenario.layout.col_spacing_m = v;
        }
        if let Some(v) = self.rus_count {
            scenario.rus.count = v;
        }
        if let Some(v) = self.rus_rows {
            scenario.rus.rus_rows = v;
        }
        if let Some(v) = self.rus_cols {
            scenario.rus.rus_cols = v;
        }
        if let Some(v) = self.rus_anchors {
            scenario.rus.anchors = Some(v.iter().map(|a| (a[0], a[1])).collect());
            scenario.rus.count = v.len();
        }
        if let Some(v) = self.center_frequency_hz {
            scenario.rf.center_frequency_hz = v;
        }
        if let Some(v) = self.subband_count {
            scenario.rf.subband_count = v;
        }
        if let Some(v) = self.subband_width_hz {
            scenario.rf.subband_width_hz = v;
        }
        if let Some(v) = self.pathloss_constant {
            scenario.rf.pathloss_constant = v;
        }
        if let Some(v) = self.pathloss_exponent {
            scenario.rf.pathloss_exponent = v;
        }
        if let Some(v) = self.noise_power_w {
            scenario.rf.noise_power_w = v;
        }
        if let Some(v) = self.ap_position {
            scenario.ap_position = Point3::new(v[0], v[1], v[2]);
        }
        if let Some(v) = self.ue_position {
            scenario.ue_position = Point3::new(v[0], v[1], v[2]);
        }
        if let Some(v) = self.sigma_e {
            scenario.sigma_e = v;
        }
        if let Some(v) = self.oversampling_v {
            scenario.codebook.oversampling_v = v;
        }
        if let Some(v) = self.oversampling_h {
            scenario.codebook.oversampling_h = v;
        }
        if let Some(v) = self.shared_codeword {
            scenario.codebook.shared_codeword = v;
        }
        if let Some(v) = self.solver_damping {
            scenario.solver.initial_damping = v;
        }
        if let Some(v) = self.solver_max_iterations {
            scenario.solver.max_iterations = v;
        }
        if let Some(v) = self.solver_step_tolerance_m {
            scenario.solver.step_tolerance_m = v;
        }
        if let Some(v) = self.solver_gradient_tolerance {
            scenario.solver.gradient_tolerance = v;
        }
        if let Some(v) = self.scene_diameter_m {
            scenario.scene_diameter_m = v;
        }
        if let Some(v) = self.seed {
            scenario.seed = v;
        }
        if let Some(v) = self.trials {
            scenario.trials = v;
        }

        // Delay-grid overrides start from the derived default so partial
        // overrides stay consistent.
        if self.delay_t_min_s.is_some()
            || self.delay_t_max_s.is_some()
            || self.delay_coarse_step_s.is_some()
            || self.delay_refine_iterations.is_some()
        {
            let mut grid = DelayGrid::for_scene(&scenario.rf, scenario.scene_diameter_m)
                .map_err(|e| anyhow!("{e}"))?;
            if let Some(v) = self.delay_t_min_s {
                grid.t_min_s = v;
            }
            if let Some(v) = self.delay_t_max_s {
                grid.t_max_s = v;
            }
            if let Some(v) = self.delay_coarse_step_s {
                grid.coarse_step_s = v;
            }
            if let Some(v) = self.delay_refine_iterations {
                grid.refine_iterations = v;
            }
            scenario.delay_grid = Some(grid);
        }

        scenario.validate().map_err(|e| anyhow!("{e}"))?;
        // Surface placement rejections at load rather than at run time.
        match &scenario.rus.anchors {
            Some(anchors) => irsim_core::geometry::place_rus_at(
                &scenario.layout,
                anchors,
                scenario.rus.rus_rows,
                scenario.rus.rus_cols,
            ),
            None => irsim_core::geometry::place_rus(
                &scenario.layout,
                scenario.rus.count,
                scenario.rus.rus_rows,
                scenario.rus.rus_cols,
            ),
        }
        .map_err(|e| anyhow!("{e}"))?;

        let sweep_section = self.sweep.unwrap_or(SweepSection {
            axis: None,
            from_m: None,
            to_m: None,
            step_m: None,
            sigma_e_values: None,
            trials: None,
        });
        let axis = match sweep_section.axis.as_deref() {
            Some(s) => parse_axis(s)?,
            None => SweepAxis::X,
        };
        let sweep = SweepDefaults {
            axis,
            from_m: sweep_section.from_m.unwrap_or(0.5),
            to_m: sweep_section.to_m.unwrap_or(20.0),
            step_m: sweep_section.step_m.unwrap_or(0.5),
            sigma_e_values: sweep_section
                .sigma_e_values
                .unwrap_or_else(|| vec![scenario.sigma_e]),
            trials: sweep_section.trials.unwrap_or(scenario.trials),
        };
        for (i, s) in sweep.sigma_e_values.iter().enumerate() {
            if !(0.0..=1.0).contains(s) || !s.is_finite() {
                bail!("invalid parameter `sweep.sigma_e_values[{i}]`: must lie in [0, 1]");
            }
        }
        if sweep.sigma_e_values.is_empty() {
            bail!("invalid parameter `sweep.sigma_e_values`: must not be empty");
        }

        Ok(LoadedConfig { scenario, sweep })
    }
}

/// Parse a JSON document into a validated configuration. Unknown keys and
/// invariant violations are rejected with the offending key named.
pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let file: ConfigFile = serde_json::from_str(text).context("malformed config")?;
    file.into_loaded()
}

/// Load and validate a configuration file.
pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in config {}", path.display()))
}

/// The all-defaults scenario, used when no config file is given.
pub fn default_config() -> LoadedConfig {
    parse_config("{}").expect("default config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_reference_defaults() {
        let loaded = parse_config("{}").unwrap();
        let s = &loaded.scenario;
        assert_eq!(s.layout.n_rows, 64);
        assert_eq!(s.layout.n_cols, 128);
        assert_eq!(s.layout.row_spacing_m, 0.005);
        assert_eq!(s.rus.count, 5);
        assert_eq!(s.rus.rus_rows, 4);
        assert_eq!(s.rf.subband_count, 128);
        assert_eq!(s.rf.center_frequency_hz, 28e9);
        assert_eq!(s.rf.subband_width_hz, 3.6e6);
        assert_eq!(s.rf.pathloss_constant, 2.0);
        assert_eq!(s.rf.pathloss_exponent, 2.0);
        assert_eq!(s.rf.noise_power_w, 1e-3);
        assert_eq!(s.ap_position, Point3::new(5.0, -5.0, 0.0));
        assert_eq!(s.ue_position, Point3::new(5.0, 3.0, 0.0));
        assert_eq!(s.sigma_e, 0.1);
        assert_eq!(s.seed, 42);
        assert_eq!(s.trials, 50);
        // Built-in sweep defaults reproduce the x-scan.
        assert_eq!(loaded.sweep.axis, SweepAxis::X);
        assert_eq!(loaded.sweep.from_m, 0.5);
        assert_eq!(loaded.sweep.to_m, 20.0);
        assert_eq!(loaded.sweep.step_m, 0.5);
        assert_eq!(loaded.sweep.sigma_e_values, vec![0.1]);
    }

    #[test]
    fn out_of_range_sigma_names_the_key() {
        let err = parse_config(r#"{"sigma_e": 1.5}"#).unwrap_err();
        assert!(format!("{err:#}").contains("sigma_e"), "{err:#}");
    }

    #[test]
    fn half_space_violation_names_the_key() {
        let err = parse_config(r#"{"ue_position": [-1, 3, 0]}"#).unwrap_err();
        assert!(format!("{err:#}").contains("ue_position"), "{err:#}");
        let err = parse_config(r#"{"ap_position": [0, 3, 0]}"#).unwrap_err();
        assert!(format!("{err:#}").contains("ap_position"), "{err:#}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(r#"{"sigma": 0.1}"#).unwrap_err();
        assert!(format!("{err:#}").contains("sigma"), "{err:#}");
        let err = parse_config(r#"{"sweep": {"axes": "x"}}"#).unwrap_err();
        assert!(format!("{err:#}").contains("axes"), "{err:#}");
    }

    #[test]
    fn malformed_json_is_rejected() {
        assert!(parse_config("{").is_err());
        assert!(parse_config("").is_err());
    }

    #[test]
    fn sweep_section_overrides_defaults() {
        let loaded = parse_config(
            r#"{"sweep": {"axis": "y", "from_m": 1.0, "to_m": 4.0, "step_m": 1.0,
                 "sigma_e_values": [0.0, 0.2], "trials": 7}}"#,
        )
        .unwrap();
        assert_eq!(loaded.sweep.axis, SweepAxis::Y);
        assert_eq!(loaded.sweep.from_m, 1.0);
        assert_eq!(loaded.sweep.sigma_e_values, vec![0.0, 0.2]);
        assert_eq!(loaded.sweep.trials, 7);
    }

    #[test]
    fn bad_axis_and_bad_sigma_list_are_rejected() {
        assert!(parse_config(r#"{"sweep": {"axis": "z"}}"#).is_err());
        let err = parse_config(r#"{"sweep": {"sigma_e_values": [0.1, 2.0]}}"#).unwrap_err();
        assert!(format!("{err:#}").contains("sigma_e_values"), "{err:#}");
    }

    #[test]
    fn infeasible_placement_is_rejected_at_load() {
        // Ten 4x4 blocks cannot avoid overlap on an 8x8 panel.
        let err =
            parse_config(r#"{"n_rows": 8, "n_cols": 8, "rus_count": 10}"#).unwrap_err();
        assert!(format!("{err:#}").contains("placement"), "{err:#}");
    }

    #[test]
    fn scene_beyond_unambiguous_range_is_rejected() {
        let err = parse_config(r#"{"scene_diameter_m": 90.0}"#).unwrap_err();
        assert!(format!("{err:#}").contains("scene_diameter_m"), "{err:#}");
    }

    #[test]
    fn delay_grid_partial_override() {
        let loaded =
            parse_config(r#"{"delay_refine_iterations": 4, "delay_coarse_step_s": 4e-10}"#)
                .unwrap();
        let grid = loaded.scenario.delay_grid.unwrap();
        assert_eq!(grid.refine_iterations, 4);
        assert_eq!(grid.coarse_step_s, 4e-10);
        assert_eq!(grid.t_min_s, 0.0);
        // Coarse step above the main-lobe bound is invalid.
        let err = parse_config(r#"{"delay_coarse_step_s": 2e-9}"#).unwrap_err();
        assert!(format!("{err:#}").contains("delay_coarse_step_s"), "{err:#}");
    }

    #[test]
    fn explicit_anchor_override_is_used() {
        let loaded = parse_config(
            r#"{"rus_anchors": [[0, 0], [0, 124], [60, 62], [30, 30]]}"#,
        )
        .unwrap();
        assert_eq!(loaded.scenario.rus.count, 4);
        let err = parse_config(r#"{"rus_anchors": [[0, 0], [1, 1]]}"#).unwrap_err();
        assert!(format!("{err:#}").contains("anchors overlap"), "{err:#}");
    }
}
