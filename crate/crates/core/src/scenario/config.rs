use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capstan::{CapstanDrive, SteerLimits};
use crate::error::{Error, Result};
use crate::locomotion::RoverLayout;
use crate::suspension::WishboneGeometry;
use crate::thermal::{EnvironmentProfile, HeaterController, TabulatedSink, ThermalNode};
use crate::transmission::{calibrate_efficiency, DriveChain, GearStage, Stage};
use crate::traverse::terrain::{patchy_resistance, rolling_surface};
use crate::traverse::{
    PaperEnvelopes, RollingResistance, Rover, Route, SuspensionMode, TerrainProfile, TraverseOptions, Verdict, WearModel,
};

pub const SCHEMA_VERSION: u32 = 1;

pub const MAX_WHEEL_RADIUS_M: f64 = 0.35;
pub const SUSPENSION_MIN_RAD: f64 = -5.0 * PI / 180.0;
pub const SUSPENSION_MAX_RAD: f64 = 30.0 * PI / 180.0;

// absorbs decimal round trips of pi/2 and degree conversions in config files
const GATE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub rover: RoverConfig,
    pub terrain: TerrainConfig,
    pub route: RouteConfig,
    pub thermal: ThermalConfig,
    #[serde(default)]
    pub wear: WearConfig,
    #[serde(default)]
    pub envelopes: PaperEnvelopes,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationConfig>,
    #[serde(default)]
    pub integration: IntegrationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoverConfig {
    pub layout: RoverLayout<f64>,
    pub mass_kg: f64,
    pub suspension: SuspensionConfig,
    pub drive: DriveConfig,
    pub steering: SteeringConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuspensionConfig {
    pub geometry: WishboneGeometry<f64>,
    pub mode: SuspensionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub stages: Vec<Stage<f64>>,
    pub efficiency: EfficiencyTargets,
}

/// Chain efficiency straight and with every cardan joint at `worst_bend_rad`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyTargets {
    pub neutral_target: f64,
    pub worst_target: f64,
    pub worst_bend_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteeringConfig {
    pub capstan: CapstanDrive<f64>,
    pub limits: SteerLimits<f64>,
    pub scrub_coeff: f64,
    pub contact_offset_m: f64,
    /// Spur/bevel train the capstan is compared against.
    pub gear_train_alternative: Vec<GearStage<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainConfig {
    pub gravity: f64,
    pub seed: u64,
    pub grid_spacing_m: f64,
    /// Terrain extends this far beyond the route bounds.
    pub margin_m: f64,
    pub surface: SurfaceConfig,
    pub rolling_resistance: ResistanceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceConfig {
    Flat,
    Incline {
        slope_rad: f64,
        #[serde(default)]
        cross_slope_rad: f64,
    },
    Rolling {
        max_slope_rad: f64,
        min_wavelength_m: f64,
        max_wavelength_m: f64,
        components: usize,
    },
    /// Explicit heights, one row per y line, spaced by `grid_spacing_m`.
    Grid { origin: [f64; 2], heights: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ResistanceConfig {
    Uniform(f64),
    Patchy { min: f64, max: f64 },
    /// Same shape as a grid surface.
    Grid(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteConfig {
    pub path: PathConfig,
    pub speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PathConfig {
    Straight {
        length_m: f64,
        #[serde(default)]
        heading_rad: f64,
    },
    Polyline { points: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub node: ThermalNode<f64>,
    pub controller: HeaterController<f64>,
    pub sink: SinkConfig,
    pub duration_s: f64,
    pub dt_s: f64,
    pub initial_temp_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SinkConfig {
    Sinusoidal(EnvironmentProfile<f64>),
    Constant { temp_k: f64 },
    Tabulated(TabulatedSink<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WearConfig {
    pub per_km: f64,
    pub per_steer_cycle: f64,
    pub steer_cycle_threshold_rad: f64,
}

impl Default for WearConfig {
    fn default() -> Self {
        Self {
            per_km: 6e-4,
            per_steer_cycle: 1e-7,
            steer_cycle_threshold_rad: 0.01,
        }
    }
}

/// Brute-force attitude and resistance grid checked against the torque envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    pub slope_range_rad: [f64; 2],
    pub roll_limit_rad: f64,
    pub c_rr_range: [f64; 2],
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationConfig {
    #[serde(default = "default_step")]
    pub step_m: f64,
    #[serde(default = "one")]
    pub traverse_csv_stride: usize,
    #[serde(default = "one")]
    pub thermal_csv_stride: usize,
}

fn default_step() -> f64 {
    0.1
}

fn one() -> usize {
    1
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            step_m: default_step(),
            traverse_csv_stride: 1,
            thermal_csv_stride: 1,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("{v} must be positive and finite")))
    }
}

fn with_field(field: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::config(field, other.to_string()),
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Structural and physical validation, then the requirement gates.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        let failed: Vec<String> = self
            .requirement_gates()
            .into_iter()
            .filter(|g| !g.pass)
            .map(|g| format!("{}: {}", g.name, g.detail))
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::Requirements(failed))
        }
    }

    /// Everything except the requirement gates.
    pub fn validate_structure(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("{} unsupported, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let r = &self.rover;
        r.layout.validate().map_err(with_field("rover.layout"))?;
        positive("rover.mass_kg", r.mass_kg)?;
        r.suspension.geometry.validate().map_err(with_field("rover.suspension.geometry"))?;
        if let SuspensionMode::ActiveLevel { ride_alpha } = r.suspension.mode {
            let range = r.suspension.geometry.angle_range;
            if !(ride_alpha >= range.min && ride_alpha <= range.max) {
                return Err(Error::config("rover.suspension.mode.active_level.ride_alpha", "outside the suspension range"));
            }
        }
        self.drive_chain()?;
        r.steering.capstan.validate().map_err(with_field("rover.steering.capstan"))?;
        if !(r.steering.limits.min_angle < r.steering.limits.max_angle) {
            return Err(Error::config("rover.steering.limits", "min_angle must be below max_angle"));
        }
        if !(r.steering.scrub_coeff >= 0.0) {
            return Err(Error::config("rover.steering.scrub_coeff", "must be >= 0"));
        }
        if !(r.steering.contact_offset_m >= 0.0) {
            return Err(Error::config("rover.steering.contact_offset_m", "must be >= 0"));
        }
        for g in &r.steering.gear_train_alternative {
            g.validate().map_err(with_field("rover.steering.gear_train_alternative"))?;
        }

        let t = &self.terrain;
        positive("terrain.gravity", t.gravity)?;
        positive("terrain.grid_spacing_m", t.grid_spacing_m)?;
        if !(t.margin_m >= 0.0) {
            return Err(Error::config("terrain.margin_m", "must be >= 0"));
        }
        let reach = r.layout.legs.iter().fold(0.0_f64, |m, p| m.max(p[0].hypot(p[1])));
        if matches!(t.surface, SurfaceConfig::Grid { .. }) {
            if !matches!(t.rolling_resistance, ResistanceConfig::Uniform(_) | ResistanceConfig::Grid(_)) {
                return Err(Error::config("terrain.rolling_resistance", "grid surfaces take uniform or grid resistance"));
            }
        } else if t.margin_m < reach + t.grid_spacing_m {
            return Err(Error::config(
                "terrain.margin_m",
                format!("must be at least leg reach plus grid spacing ({:.3} m)", reach + t.grid_spacing_m),
            ));
        }
        match t.surface {
            SurfaceConfig::Incline { slope_rad, cross_slope_rad } => {
                if !(slope_rad.abs() < FRAC_PI_2 && cross_slope_rad.abs() < FRAC_PI_2) {
                    return Err(Error::config("terrain.surface.incline", "slopes must be below pi/2"));
                }
            }
            SurfaceConfig::Rolling {
                max_slope_rad,
                min_wavelength_m,
                max_wavelength_m,
                components,
            } => {
                if !(0.0..FRAC_PI_2).contains(&max_slope_rad) {
                    return Err(Error::config("terrain.surface.rolling.max_slope_rad", "must be in [0, pi/2)"));
                }
                positive("terrain.surface.rolling.min_wavelength_m", min_wavelength_m)?;
                if !(max_wavelength_m >= min_wavelength_m) {
                    return Err(Error::config("terrain.surface.rolling.max_wavelength_m", "must be >= min_wavelength_m"));
                }
                if components == 0 {
                    return Err(Error::config("terrain.surface.rolling.components", "must be >= 1"));
                }
            }
            _ => {}
        }
        match t.rolling_resistance {
            ResistanceConfig::Uniform(c) if !(c >= 0.0) => {
                return Err(Error::config("terrain.rolling_resistance.uniform", "must be >= 0"));
            }
            ResistanceConfig::Patchy { min, max } if !(min >= 0.0 && max >= min) => {
                return Err(Error::config("terrain.rolling_resistance.patchy", "need 0 <= min <= max"));
            }
            ResistanceConfig::Grid(_) if !matches!(t.surface, SurfaceConfig::Grid { .. }) => {
                return Err(Error::config("terrain.rolling_resistance.grid", "needs a grid surface"));
            }
            _ => {}
        }

        positive("route.speed_mps", self.route.speed_mps)?;
        self.route()?;

        let th = &self.thermal;
        th.node.validate().map_err(with_field("thermal.node"))?;
        th.controller.validate().map_err(with_field("thermal.controller"))?;
        match &th.sink {
            SinkConfig::Sinusoidal(p) => p.validate().map_err(with_field("thermal.sink.sinusoidal"))?,
            SinkConfig::Constant { temp_k } => positive("thermal.sink.constant.temp_k", *temp_k)?,
            SinkConfig::Tabulated(tab) => tab.validate()?,
        }
        if !(th.duration_s >= 0.0) {
            return Err(Error::config("thermal.duration_s", "must be >= 0"));
        }
        positive("thermal.dt_s", th.dt_s)?;
        positive("thermal.initial_temp_k", th.initial_temp_k)?;

        let w = &self.wear;
        if !(w.per_km >= 0.0 && w.per_steer_cycle >= 0.0 && w.steer_cycle_threshold_rad >= 0.0) {
            return Err(Error::config("wear", "coefficients and threshold must be >= 0"));
        }
        if self.envelopes != PaperEnvelopes::PUBLISHED {
            return Err(Error::config("envelopes", "envelope constants differ from the published values"));
        }
        if let Some(c) = &self.calibration {
            if !(c.slope_range_rad[0] <= c.slope_range_rad[1] && c.c_rr_range[0] <= c.c_rr_range[1] && c.roll_limit_rad >= 0.0) {
                return Err(Error::config("calibration", "ranges must be ordered"));
            }
            if c.points < 2 {
                return Err(Error::config("calibration.points", "must be >= 2"));
            }
        }
        let i = &self.integration;
        positive("integration.step_m", i.step_m)?;
        if i.traverse_csv_stride == 0 || i.thermal_csv_stride == 0 {
            return Err(Error::config("integration", "CSV strides must be >= 1"));
        }
        Ok(())
    }

    /// Requirement gates; each verdict names the gate it checks.
    pub fn requirement_gates(&self) -> Vec<Verdict> {
        let r = &self.rover;
        let radius = r.layout.wheel_radius;
        let limits = r.steering.limits;
        let range = r.suspension.geometry.angle_range;
        let reach = r.suspension.geometry.max_reach();
        let max_reach = self.envelopes.max_reach_m;
        vec![
            Verdict::new(
                "wheel_radius",
                radius <= MAX_WHEEL_RADIUS_M + GATE_SLACK,
                format!("wheel radius {radius} m vs limit {MAX_WHEEL_RADIUS_M} m"),
            ),
            Verdict::new(
                "steer_limits",
                limits.min_angle <= -FRAC_PI_2 + GATE_SLACK && limits.max_angle >= FRAC_PI_2 - GATE_SLACK,
                format!("steer limits [{}, {}] rad must cover +/-pi/2", limits.min_angle, limits.max_angle),
            ),
            Verdict::new(
                "suspension_range",
                range.min <= SUSPENSION_MIN_RAD + GATE_SLACK && range.max >= SUSPENSION_MAX_RAD - GATE_SLACK,
                format!("suspension range [{:.4}, {:.4}] rad must cover [-5, +30] deg", range.min, range.max),
            ),
            Verdict::new(
                "max_reach",
                reach <= max_reach + GATE_SLACK,
                format!("suspension reach {reach:.4} m vs limit {max_reach} m"),
            ),
        ]
    }

    pub fn drive_chain(&self) -> Result<DriveChain<f64>> {
        let e = self.rover.drive.efficiency;
        let model = calibrate_efficiency(e.neutral_target, e.worst_target, e.worst_bend_rad)
            .map_err(with_field("rover.drive.efficiency"))?;
        DriveChain::new(self.rover.drive.stages.clone(), model).map_err(with_field("rover.drive.stages"))
    }

    pub fn rover(&self) -> Result<Rover> {
        let r = &self.rover;
        Ok(Rover {
            layout: r.layout.clone(),
            mass: r.mass_kg,
            suspension: r.suspension.geometry,
            suspension_mode: r.suspension.mode,
            chain: self.drive_chain()?,
            capstan: r.steering.capstan,
            steer_limits: r.steering.limits,
            scrub_coeff: r.steering.scrub_coeff,
            contact_offset: r.steering.contact_offset_m,
        })
    }

    pub fn route(&self) -> Result<Route> {
        let speed = self.route.speed_mps;
        match &self.route.path {
            PathConfig::Straight { length_m, heading_rad } => Route::straight(*length_m, *heading_rad, speed),
            PathConfig::Polyline { points } => Route::polyline(points.clone(), speed),
        }
        .map_err(with_field("route.path"))
    }

    /// Builds the height field; `seed` overrides the configured seed.
    pub fn terrain(&self, seed: Option<u64>) -> Result<TerrainProfile> {
        let t = &self.terrain;
        let seed = seed.unwrap_or(t.seed);
        let resistance = |n: usize| match t.rolling_resistance {
            ResistanceConfig::Uniform(c) => RollingResistance::Uniform(c),
            ResistanceConfig::Patchy { min, max } => patchy_resistance(seed, min, max, n),
            ResistanceConfig::Grid(_) => unreachable!("grid resistance needs a grid surface"),
        };
        if let SurfaceConfig::Grid { origin, heights } = &t.surface {
            let ny = heights.len();
            let nx = heights.first().map_or(0, Vec::len);
            if heights.iter().any(|row| row.len() != nx) {
                return Err(Error::config("terrain.surface.grid.heights", "rows differ in length"));
            }
            let rr = match &t.rolling_resistance {
                ResistanceConfig::Grid(rows) => {
                    if rows.len() != ny || rows.iter().any(|row| row.len() != nx) {
                        return Err(Error::config("terrain.rolling_resistance.grid", "shape differs from heights"));
                    }
                    RollingResistance::PerCell(rows.concat())
                }
                _ => resistance(nx * ny),
            };
            return TerrainProfile::new(*origin, t.grid_spacing_m, nx, ny, heights.concat(), rr, t.gravity)
                .map_err(with_field("terrain"));
        }
        let b = self.route()?.bounds();
        let m = t.margin_m;
        let bounds = [b[0] - m, b[1] + m, b[2] - m, b[3] + m];
        let profile = match t.surface {
            SurfaceConfig::Flat => TerrainProfile::sample(bounds, t.grid_spacing_m, |_, _| 0.0, resistance, t.gravity),
            SurfaceConfig::Incline { slope_rad, cross_slope_rad } => {
                let (gx, gy) = (slope_rad.tan(), cross_slope_rad.tan());
                TerrainProfile::sample(bounds, t.grid_spacing_m, |x, y| gx * x + gy * y, resistance, t.gravity)
            }
            SurfaceConfig::Rolling {
                max_slope_rad,
                min_wavelength_m,
                max_wavelength_m,
                components,
            } => {
                let surface = rolling_surface(seed, max_slope_rad, [min_wavelength_m, max_wavelength_m], components);
                TerrainProfile::sample(bounds, t.grid_spacing_m, surface, resistance, t.gravity)
            }
            SurfaceConfig::Grid { .. } => unreachable!(),
        };
        profile.map_err(with_field("terrain"))
    }

    pub fn traverse_options(&self) -> TraverseOptions {
        TraverseOptions {
            step_m: self.integration.step_m,
            wear: WearModel {
                per_km: self.wear.per_km,
                per_steer_cycle: self.wear.per_steer_cycle,
            },
            steer_cycle_threshold: self.wear.steer_cycle_threshold_rad,
        }
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    ScenarioConfig::from_json(&text)
}
