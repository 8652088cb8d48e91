#![allow(dead_code)]

use distant_core::scenario::{preset, PathConfig, ResistanceConfig, ScenarioConfig, SinkConfig, SurfaceConfig};

/// Calibrated rover on a short straight route with a quick thermal case.
pub fn short_config(surface: SurfaceConfig, c_rr: f64, length_m: f64) -> ScenarioConfig {
    let mut c = preset("paper_nominal").unwrap();
    c.name = "test".into();
    c.terrain.surface = surface;
    c.terrain.rolling_resistance = ResistanceConfig::Uniform(c_rr);
    c.terrain.margin_m = 3.0;
    c.route.path = PathConfig::Straight {
        length_m,
        heading_rad: 0.0,
    };
    c.integration.step_m = 0.5;
    c.integration.traverse_csv_stride = 1;
    c.thermal.sink = SinkConfig::Constant { temp_k: 93.15 };
    c.thermal.controller.on_below = 288.0;
    c.thermal.controller.off_above = 298.0;
    c.thermal.initial_temp_k = 293.0;
    c.thermal.duration_s = 3600.0;
    c.thermal.dt_s = 10.0;
    c.calibration = None;
    c.validate().unwrap();
    c
}

pub fn flat(c_rr: f64, length_m: f64) -> ScenarioConfig {
    short_config(SurfaceConfig::Flat, c_rr, length_m)
}

pub fn incline(slope_rad: f64, length_m: f64) -> ScenarioConfig {
    short_config(
        SurfaceConfig::Incline {
            slope_rad,
            cross_slope_rad: 0.0,
        },
        0.25,
        length_m,
    )
}
