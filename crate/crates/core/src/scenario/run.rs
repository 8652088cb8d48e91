use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capstan::{compare_steering, SteeringArchitecture};
use crate::error::{Error, Result};
use crate::thermal::{simulate_thermal, BandExit, ConstantSink, HeaterController, SinkTemperature, ThermalRun};
use crate::traverse::{envelope_sweep, traverse, traverse_verdicts, PaperEnvelopes, StepRecord, SweepExtremes, TraverseReport, Verdict};

use super::config::{ScenarioConfig, SinkConfig, SCHEMA_VERSION};
use super::format::fmt_g9;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

pub const TRAVERSE_CSV: &str = "traverse.csv";
pub const THERMAL_CSV: &str = "thermal.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const ERROR_JSON: &str = "error.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSummary {
    pub controller: HeaterController<f64>,
    pub duty_cycle: f64,
    pub night_duty: Option<f64>,
    pub day_duty: Option<f64>,
    pub min_temp_k: f64,
    pub max_temp_k: f64,
    pub regulated_range_k: Option<(f64, f64)>,
    pub band_exit: Option<BandExit<f64>>,
    pub final_temp_k: f64,
    pub heater_energy_j: f64,
    pub balance_residual_j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringSummary {
    pub capstan_efficiency: f64,
    pub gear_train_efficiency: f64,
    pub preferred: SteeringArchitecture,
}

/// Chain efficiency straight and with every joint at the calibration bend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub neutral_efficiency: f64,
    pub worst_efficiency: f64,
    pub worst_bend_rad: f64,
    pub overall_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub traverse: TraverseReport,
    pub thermal: ThermalSummary,
    pub steering: SteeringSummary,
    pub chain: ChainSummary,
    pub calibration: Option<SweepExtremes>,
    pub envelopes: PaperEnvelopes,
    /// Reported only, never used in the physics.
    pub architecture_mass_kg: f64,
    pub requirement_gates: Vec<Verdict>,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
    pub exit_code: i32,
}

// tolerances of the efficiency endpoint and steering checks
const CHAIN_NEUTRAL_TOL: f64 = 0.005;
const CHAIN_WORST_TOL: f64 = 0.01;
const STEERING_TOL: f64 = 0.005;

impl RunSummary {
    /// Every verdict, derived from the fields of this summary alone.
    pub fn recompute_verdicts(&self) -> Vec<Verdict> {
        let env = &self.envelopes;
        let mut v = self.requirement_gates.clone();
        v.extend(traverse_verdicts(&self.traverse, env));
        let c = &self.chain;
        v.push(Verdict::new(
            "chain_efficiency_endpoints",
            (c.neutral_efficiency - env.chain_efficiency[1]).abs() <= CHAIN_NEUTRAL_TOL
                && (c.worst_efficiency - env.chain_efficiency[0]).abs() <= CHAIN_WORST_TOL,
            format!(
                "straight {:.4}, at {:.4} rad {:.4} vs [{}, {}]",
                c.neutral_efficiency, c.worst_bend_rad, c.worst_efficiency, env.chain_efficiency[0], env.chain_efficiency[1]
            ),
        ));
        let s = &self.steering;
        v.push(Verdict::new(
            "steering_efficiency",
            (s.capstan_efficiency - env.steering_efficiency).abs() <= STEERING_TOL
                && s.gear_train_efficiency < s.capstan_efficiency,
            format!(
                "capstan {:.4} vs {}, gear train {:.4}",
                s.capstan_efficiency, env.steering_efficiency, s.gear_train_efficiency
            ),
        ));
        let t = &self.thermal;
        v.push(Verdict::new(
            "thermal_band",
            t.regulated_range_k.is_some() && t.band_exit.is_none(),
            match (t.regulated_range_k, t.band_exit) {
                (_, Some(e)) => format!("left the band at t = {:.0} s ({:.2} K)", e.time, e.box_temp),
                (Some((lo, hi)), None) => format!(
                    "[{lo:.2}, {hi:.2}] K within [{}, {}] K +/- 5 K",
                    t.controller.on_below, t.controller.off_above
                ),
                (None, None) => "never reached the controller band".into(),
            },
        ));
        if let Some(cal) = &self.calibration {
            v.push(Verdict::new(
                "calibration_wheel_torque",
                cal.drive_torque_nm.within(env.wheel_torque_nm),
                format!(
                    "[{:.4}, {:.4}] N·m vs [{}, {}] over {} points",
                    cal.drive_torque_nm.min, cal.drive_torque_nm.max, env.wheel_torque_nm[0], env.wheel_torque_nm[1], cal.points
                ),
            ));
            v.push(Verdict::new(
                "calibration_steering_torque",
                cal.steering_torque_nm.within(env.steering_torque_nm),
                format!(
                    "[{:.4}, {:.4}] N·m vs [{}, {}]",
                    cal.steering_torque_nm.min, cal.steering_torque_nm.max, env.steering_torque_nm[0], env.steering_torque_nm[1]
                ),
            ));
        }
        v
    }

    pub fn failed(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }
}

fn row(out: &mut impl Write, fields: impl IntoIterator<Item = String>) -> std::io::Result<()> {
    let line: Vec<String> = fields.into_iter().collect();
    out.write_all(line.join(",").as_bytes())?;
    out.write_all(b"\n")
}

fn traverse_header(wheels: usize) -> Vec<String> {
    let mut h = vec!["step_index".to_string(), "s_m".into(), "slope_rad".into()];
    for prefix in ["load_N", "wheel_torque_Nm", "motor_torque_Nm", "steer_angle_rad"] {
        h.extend((0..wheels).map(|i| format!("{prefix}_w{i}")));
    }
    h.extend(["chain_efficiency".into(), "derating".into(), "energy_J_cumulative".into()]);
    h
}

fn traverse_row(r: &StepRecord) -> Vec<String> {
    let mut f = vec![r.step_index.to_string(), fmt_g9(r.s_m), fmt_g9(r.slope)];
    for col in [&r.loads, &r.wheel_torque, &r.motor_torque, &r.steer_angle] {
        f.extend(col.iter().map(|&x| fmt_g9(x)));
    }
    f.extend([fmt_g9(r.mean_chain_efficiency()), fmt_g9(r.derating), fmt_g9(r.energy_j)]);
    f
}

fn write_thermal_csv(path: &Path, run: &ThermalRun<f64>, stride: usize) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    row(&mut out, ["time_s", "box_temp_K", "env_temp_K", "heater_W", "duty_so_far"].map(String::from))?;
    let last = run.trace.len().saturating_sub(1);
    for (i, s) in run.trace.iter().enumerate() {
        if i % stride == 0 || i == last {
            row(&mut out, [s.time, s.box_temp, s.env_temp, s.heater, s.duty_so_far].map(fmt_g9))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Runs the configured thermal case.
pub fn run_thermal(config: &ScenarioConfig) -> Result<ThermalRun<f64>> {
    let th = &config.thermal;
    let sink: Box<dyn SinkTemperature<f64>> = match &th.sink {
        SinkConfig::Sinusoidal(p) => Box::new(*p),
        SinkConfig::Constant { temp_k } => Box::new(ConstantSink(*temp_k)),
        SinkConfig::Tabulated(tab) => Box::new(tab.clone()),
    };
    simulate_thermal(&th.node, Some(&th.controller), sink.as_ref(), th.duration_s, th.dt_s, th.initial_temp_k)
}

/// Runs traverse and thermal cases, writing the step CSV, thermal CSV and `summary.json`
/// into `out_dir`. `seed` overrides the terrain seed.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path, seed: Option<u64>) -> Result<RunSummary> {
    config.validate_structure()?;
    let gates = config.requirement_gates();
    fs::create_dir_all(out_dir)?;
    let seed = seed.unwrap_or(config.terrain.seed);
    let rover = config.rover()?;
    let terrain = config.terrain(Some(seed))?;
    let route = config.route()?;
    let length = route.length();

    let stride = config.integration.traverse_csv_stride;
    let mut csv = BufWriter::new(File::create(out_dir.join(TRAVERSE_CSV))?);
    row(&mut csv, traverse_header(rover.layout.legs.len()))?;
    let report = traverse(&rover, &terrain, &route, &config.traverse_options(), |r| {
        if r.step_index % stride == 0 || r.s_m >= length {
            row(&mut csv, traverse_row(r))?;
        }
        Ok(())
    })?;
    csv.flush()?;

    let thermal = run_thermal(config)?;
    write_thermal_csv(&out_dir.join(THERMAL_CSV), &thermal, config.integration.thermal_csv_stride)?;

    let steer = &config.rover.steering;
    let cmp = compare_steering(&steer.capstan, &steer.gear_train_alternative)?;
    let chain = &rover.chain;
    let worst_bend = config.rover.drive.efficiency.worst_bend_rad;
    let chain_summary = ChainSummary {
        neutral_efficiency: chain.efficiency(&vec![0.0; chain.cardan_count()])?,
        worst_efficiency: chain.efficiency(&vec![worst_bend; chain.cardan_count()])?,
        worst_bend_rad: worst_bend,
        overall_ratio: chain.ratio(),
    };
    let calibration = match &config.calibration {
        Some(c) => Some(envelope_sweep(
            &rover,
            config.terrain.gravity,
            c.slope_range_rad,
            c.roll_limit_rad,
            c.c_rr_range,
            c.points,
        )?),
        None => None,
    };

    let mut summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        scenario: config.name.clone(),
        seed,
        traverse: report,
        thermal: ThermalSummary {
            controller: config.thermal.controller,
            duty_cycle: thermal.duty_cycle,
            night_duty: thermal.night_duty,
            day_duty: thermal.day_duty,
            min_temp_k: thermal.min_temp,
            max_temp_k: thermal.max_temp,
            regulated_range_k: thermal.regulated_range,
            band_exit: thermal.band_exit,
            final_temp_k: thermal.final_temp,
            heater_energy_j: thermal.heater_energy,
            balance_residual_j: thermal.balance_residual(&config.thermal.node),
        },
        steering: SteeringSummary {
            capstan_efficiency: cmp.capstan_efficiency,
            gear_train_efficiency: cmp.gear_train_efficiency,
            preferred: cmp.preferred,
        },
        chain: chain_summary,
        calibration,
        envelopes: config.envelopes,
        architecture_mass_kg: config.envelopes.architecture_mass_kg,
        requirement_gates: gates,
        verdicts: Vec::new(),
        pass: false,
        exit_code: EXIT_ABORT,
    };
    summary.verdicts = summary.recompute_verdicts();
    summary.pass = summary.verdicts.iter().all(|v| v.pass);
    summary.exit_code = if summary.pass { EXIT_PASS } else { EXIT_VERDICT };
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(out_dir.join(SUMMARY_JSON), json + "\n")?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
struct ErrorRecord<'a> {
    kind: &'a str,
    message: String,
    step_index: Option<usize>,
    exit_code: i32,
}

pub fn exit_code_for(error: &Error) -> i32 {
    if error.is_config_error() {
        EXIT_CONFIG
    } else {
        EXIT_ABORT
    }
}

/// Writes a machine-readable error record next to the run outputs.
pub fn write_error_record(out_dir: &Path, error: &Error) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let (kind, step_index) = match error {
        Error::Step { step_index, source } => (source.kind(), Some(*step_index)),
        other => (other.kind(), None),
    };
    let record = ErrorRecord {
        kind,
        message: error.to_string(),
        step_index,
        exit_code: exit_code_for(error),
    };
    fs::write(out_dir.join(ERROR_JSON), serde_json::to_string_pretty(&record)? + "\n")?;
    Ok(())
}

/// Runs a scenario and maps the outcome onto the exit-code contract.
pub fn execute(config: &ScenarioConfig, out_dir: &Path, seed: Option<u64>) -> (i32, Result<RunSummary>) {
    match run_scenario(config, out_dir, seed) {
        Ok(s) => (s.exit_code, Ok(s)),
        Err(e) => {
            let _ = write_error_record(out_dir, &e);
            (exit_code_for(&e), Err(e))
        }
    }
}

#[derive(Debug, Clone)]
pub struct BatchJob {
    pub config: ScenarioConfig,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
}

/// Runs independent jobs concurrently; results keep the job order.
pub fn run_batch(jobs: &[BatchJob]) -> Vec<(i32, Result<RunSummary>)> {
    jobs.par_iter().map(|j| execute(&j.config, &j.out_dir, j.seed)).collect()
}
