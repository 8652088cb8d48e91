use serde::{Deserialize, Serialize};

use super::report::{Extrema, TraverseReport};
use super::terrain::TerrainProfile;
use super::{drive_torques, steering_torques, wear_update, wheel_loads, WearModel, WearState};
use crate::capstan::{slip_margin, CapstanDrive, SteerLimits};
use crate::error::{Error, Result};
use crate::locomotion::{allocate, BodyTwist, RoverLayout};
use crate::suspension::{command_for_alpha, equilibrium_alpha, WishboneGeometry};
use crate::transmission::{DriveChain, Stage};

/// How the suspension angle is set during a traverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuspensionMode {
    /// Arm rests where spring and wheel load balance.
    Passive,
    /// Actuator holds every arm at `ride_alpha`.
    ActiveLevel { ride_alpha: f64 },
}

/// Everything about the vehicle a traverse needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Rover {
    pub layout: RoverLayout<f64>,
    pub mass: f64,
    pub suspension: WishboneGeometry<f64>,
    pub suspension_mode: SuspensionMode,
    pub chain: DriveChain<f64>,
    pub capstan: CapstanDrive<f64>,
    pub steer_limits: SteerLimits<f64>,
    pub scrub_coeff: f64,
    pub contact_offset: f64,
}

impl Rover {
    /// Suspension angle of each wheel under its load.
    pub fn suspension_angles(&self, loads: &[f64]) -> Result<Vec<f64>> {
        loads
            .iter()
            .map(|&n| match self.suspension_mode {
                SuspensionMode::Passive => Ok(equilibrium_alpha(&self.suspension, n, 0.0)?.alpha),
                SuspensionMode::ActiveLevel { ride_alpha } => {
                    command_for_alpha(&self.suspension, n, ride_alpha)?;
                    Ok(ride_alpha)
                }
            })
            .collect()
    }

    /// Cardan bends for one wheel: each dual pair runs along the arm, bent by `alpha` into
    /// the first joint and back out of the second.
    pub fn articulation(&self, alpha: f64) -> Vec<f64> {
        self.chain
            .stages
            .iter()
            .filter(|s| matches!(s, Stage::DualCardan(_)))
            .flat_map(|_| [alpha, -alpha])
            .collect()
    }
}

/// Polyline route driven at constant speed.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    points: Vec<[f64; 2]>,
    cumulative: Vec<f64>,
    pub speed: f64,
}

impl Route {
    pub fn polyline(points: Vec<[f64; 2]>, speed: f64) -> Result<Self> {
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::domain("route speed", speed, "> 0"));
        }
        if points.is_empty() {
            return Err(Error::config("route.path", "polyline needs at least one point"));
        }
        let mut kept: Vec<[f64; 2]> = Vec::with_capacity(points.len());
        for p in points {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(Error::config("route.path", "non-finite point"));
            }
            if kept.last() != Some(&p) {
                kept.push(p);
            }
        }
        let mut cumulative = vec![0.0];
        for w in kept.windows(2) {
            let d = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            cumulative.push(cumulative.last().unwrap() + d);
        }
        Ok(Self {
            points: kept,
            cumulative,
            speed,
        })
    }

    pub fn straight(length: f64, heading: f64, speed: f64) -> Result<Self> {
        if !(length >= 0.0) {
            return Err(Error::domain("route length", length, ">= 0"));
        }
        Self::polyline(vec![[0.0, 0.0], [length * heading.cos(), length * heading.sin()]], speed)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Segment containing arc length `s`, taking the earlier segment at a vertex.
    fn segment(&self, s: f64) -> usize {
        let n = self.points.len() - 1;
        self.cumulative.partition_point(|&c| c < s).saturating_sub(1).min(n.saturating_sub(1))
    }

    pub fn heading(&self, s: f64) -> f64 {
        if self.points.len() < 2 {
            return 0.0;
        }
        let i = self.segment(s);
        let (a, b) = (self.points[i], self.points[i + 1]);
        (b[1] - a[1]).atan2(b[0] - a[0])
    }

    pub fn position(&self, s: f64) -> [f64; 2] {
        if self.points.len() < 2 {
            return self.points[0];
        }
        let i = self.segment(s);
        let (a, b) = (self.points[i], self.points[i + 1]);
        let seg = self.cumulative[i + 1] - self.cumulative[i];
        let f = ((s - self.cumulative[i]) / seg).clamp(0.0, 1.0);
        [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
    }

    /// Axis-aligned bounds of the route.
    pub fn bounds(&self) -> [f64; 4] {
        self.points.iter().fold(
            [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY],
            |b, p| [b[0].min(p[0]), b[1].max(p[0]), b[2].min(p[1]), b[3].max(p[1])],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraverseOptions {
    pub step_m: f64,
    pub wear: WearModel<f64>,
    /// Steering change per step counted as one actuation cycle (rad).
    pub steer_cycle_threshold: f64,
}

/// One quasi-static sample, taken at the end of a step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step_index: usize,
    pub s_m: f64,
    pub ds_m: f64,
    pub dt_s: f64,
    pub position: [f64; 2],
    pub heading: f64,
    pub slope: f64,
    pub roll: f64,
    pub loads: Vec<f64>,
    pub suspension_alpha: Vec<f64>,
    pub wheel_torque: Vec<f64>,
    pub motor_torque: Vec<f64>,
    /// Wheel spin rate magnitude (rad/s).
    pub wheel_speed: Vec<f64>,
    pub steer_angle: Vec<f64>,
    pub steer_torque: Vec<f64>,
    /// Articulation efficiency per wheel, before derating.
    pub chain_efficiency: Vec<f64>,
    /// Derating applied during this step.
    pub derating: f64,
    pub energy_j: f64,
    pub wheel_energy_j: f64,
}

impl StepRecord {
    pub fn mean_chain_efficiency(&self) -> f64 {
        self.chain_efficiency.iter().sum::<f64>() / self.chain_efficiency.len() as f64
    }
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(std::f64::consts::TAU);
    if w > std::f64::consts::PI {
        w - std::f64::consts::TAU
    } else {
        w
    }
}

fn at_step(step_index: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Step {
        step_index,
        source: Box::new(e),
    }
}

/// Drives `route` over `terrain` at fixed arc-length steps, calling `on_step` for every
/// sample in order.
pub fn traverse(
    rover: &Rover,
    terrain: &TerrainProfile,
    route: &Route,
    options: &TraverseOptions,
    mut on_step: impl FnMut(&StepRecord) -> Result<()>,
) -> Result<TraverseReport> {
    if !(options.step_m > 0.0) {
        return Err(Error::domain("integration step", options.step_m, "> 0"));
    }
    rover.layout.validate()?;
    rover.chain.validate()?;
    rover.capstan.validate()?;
    let wheels = rover.layout.legs.len();
    let joints = rover.chain.cardan_count();
    let mut report = TraverseReport::empty(joints, wheels);
    let length = route.length();
    let steps = if length > 0.0 { (length / options.step_m).ceil() as usize } else { 0 };
    if steps == 0 {
        report.notes.push("zero-length route: no samples".into());
        return Ok(report);
    }
    for p in route.points() {
        if !terrain.contains(p[0], p[1]) {
            return Err(Error::OffTerrain { x: p[0], y: p[1] });
        }
    }

    let weight = rover.mass * terrain.gravity;
    let ratio = rover.chain.ratio();
    let mut wear = WearState::fresh(joints);
    let mut prev_steer = vec![0.0; wheels];
    let mut prev_bends: Option<Vec<Vec<f64>>> = None;
    let mut energy = 0.0;
    let mut wheel_energy = 0.0;
    let mut s_start = 0.0;
    let mut final_eta = 0.0;

    for k in 0..steps {
        let err = at_step(k);
        let s_end = if k + 1 == steps { length } else { (k + 1) as f64 * options.step_m };
        let ds = s_end - s_start;
        let dt = ds / route.speed;
        let pos = route.position(s_end);
        let heading = route.heading(s_end);
        let (sin_h, cos_h) = heading.sin_cos();

        let grad = terrain.gradient(pos[0], pos[1]).map_err(&err)?;
        let slope = (grad[0] * cos_h + grad[1] * sin_h).atan();
        let roll = (-grad[0] * sin_h + grad[1] * cos_h).atan();

        let loads = wheel_loads(&rover.layout, rover.mass, terrain.gravity, slope, roll).map_err(&err)?;
        let alpha = rover.suspension_angles(&loads).map_err(&err)?;
        let bends: Vec<Vec<f64>> = alpha.iter().map(|&a| rover.articulation(a)).collect();
        let c_rr = rover
            .layout
            .legs
            .iter()
            .map(|p| {
                let wx = pos[0] + p[0] * cos_h - p[1] * sin_h;
                let wy = pos[1] + p[0] * sin_h + p[1] * cos_h;
                terrain.rolling_resistance_at(wx, wy)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(&err)?;
        let derating = wear.derating;
        if !(derating > 0.0) {
            return Err(err(Error::domain("derating", derating, "worn out before route end")));
        }
        let drive = drive_torques(&loads, weight, slope, &c_rr, &rover.layout, &rover.chain, &bends, derating).map_err(&err)?;
        let eta = bends
            .iter()
            .map(|b| rover.chain.efficiency(b))
            .collect::<Result<Vec<_>>>()
            .map_err(&err)?;

        let curvature = wrap_angle(heading - route.heading(s_start)) / ds;
        let twist = BodyTwist::new(route.speed, 0.0, route.speed * curvature);
        let setpoints = allocate(&rover.layout, &twist);
        let steer: Vec<f64> = setpoints
            .iter()
            .map(|sp| sp.steer_angle.clamp(rover.steer_limits.min_angle, rover.steer_limits.max_angle))
            .collect();
        let wheel_speed: Vec<f64> = setpoints.iter().map(|sp| sp.wheel_speed.abs()).collect();
        let cycles = steer
            .iter()
            .zip(&prev_steer)
            .filter(|(a, b)| (*a - *b).abs() > options.steer_cycle_threshold)
            .count() as u64;

        let steering = steering_torques(&loads, rover.scrub_coeff, rover.contact_offset, &rover.capstan).map_err(&err)?;

        for i in 0..wheels {
            let omega = wheel_speed[i];
            let p_wheel = drive[i].wheel_torque * omega;
            if p_wheel > 0.0 {
                wheel_energy += p_wheel * dt;
                energy += drive[i].motor_torque * omega * ratio * dt;
            }
            report.per_wheel_drive_torque_nm[i] = Extrema::merge(report.per_wheel_drive_torque_nm[i], drive[i].wheel_torque);
            report.drive_torque_nm = Extrema::merge(report.drive_torque_nm, drive[i].wheel_torque);
            report.steering_torque_nm = Extrema::merge(report.steering_torque_nm, steering[i].steer_torque);
            report.chain_efficiency = Extrema::merge(report.chain_efficiency, eta[i]);
            let margin = slip_margin(&rover.capstan, steering[i].steer_torque).map_err(&err)?;
            report.min_slip_margin = Some(report.min_slip_margin.map_or(margin, |m: f64| m.min(margin)));
        }

        let activity: Vec<f64> = (0..joints)
            .map(|j| match &prev_bends {
                Some(prev) => bends.iter().zip(prev).map(|(b, p)| (b[j] - p[j]).abs()).sum(),
                None => 0.0,
            })
            .collect();

        let record = StepRecord {
            step_index: k,
            s_m: s_end,
            ds_m: ds,
            dt_s: dt,
            position: pos,
            heading,
            slope,
            roll,
            loads,
            suspension_alpha: alpha,
            wheel_torque: drive.iter().map(|d| d.wheel_torque).collect(),
            motor_torque: drive.iter().map(|d| d.motor_torque).collect(),
            wheel_speed,
            steer_angle: steer.clone(),
            steer_torque: steering.iter().map(|d| d.steer_torque).collect(),
            chain_efficiency: eta,
            derating,
            energy_j: energy,
            wheel_energy_j: wheel_energy,
        };
        if k == 0 {
            report.initial_chain_efficiency = Some(record.mean_chain_efficiency());
        }
        final_eta = record.mean_chain_efficiency();
        on_step(&record)?;

        wear = wear_update(&wear, &options.wear, ds / 1000.0, cycles, &activity).map_err(&err)?;
        prev_steer = steer;
        prev_bends = Some(bends);
        s_start = s_end;
    }

    report.distance_km = length / 1000.0;
    report.steps = steps;
    report.energy_j = energy;
    report.wheel_energy_j = wheel_energy;
    report.final_chain_efficiency = Some(final_eta);
    let initial = report.initial_chain_efficiency.unwrap_or(final_eta);
    report.efficiency_ratio = wear.derating * final_eta / initial;
    report.wear = wear;
    report.notes.push("efficiency retention is the chain efficiency ratio including wear derating".into());
    Ok(report)
}

/// Torque extremes over a brute-force grid of planar attitudes and resistance coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepExtremes {
    pub drive_torque_nm: Extrema,
    pub steering_torque_nm: Extrema,
    pub points: usize,
}

/// Evaluates every combination of `points` values along slope, roll and rolling resistance.
pub fn envelope_sweep(
    rover: &Rover,
    gravity: f64,
    slope_range: [f64; 2],
    roll_limit: f64,
    c_rr_range: [f64; 2],
    points: usize,
) -> Result<SweepExtremes> {
    if points < 2 {
        return Err(Error::config("calibration.points", "need at least 2 points per axis"));
    }
    let grid = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (points - 1) as f64;
    let wheels = rover.layout.legs.len();
    let weight = rover.mass * gravity;
    let mut drive_ex: Option<Extrema> = None;
    let mut steer_ex: Option<Extrema> = None;
    let mut n = 0;
    for a in 0..points {
        let slope = grid(slope_range[0], slope_range[1], a);
        for b in 0..points {
            let roll = grid(-roll_limit, roll_limit, b);
            let loads = wheel_loads(&rover.layout, rover.mass, gravity, slope, roll)?;
            let bends: Vec<Vec<f64>> = rover.suspension_angles(&loads)?.iter().map(|&a| rover.articulation(a)).collect();
            for s in steering_torques(&loads, rover.scrub_coeff, rover.contact_offset, &rover.capstan)? {
                steer_ex = Extrema::merge(steer_ex, s.steer_torque);
            }
            for c in 0..points {
                let c_rr = vec![grid(c_rr_range[0], c_rr_range[1], c); wheels];
                for d in drive_torques(&loads, weight, slope, &c_rr, &rover.layout, &rover.chain, &bends, 1.0)? {
                    drive_ex = Extrema::merge(drive_ex, d.wheel_torque);
                }
                n += 1;
            }
        }
    }
    Ok(SweepExtremes {
        drive_torque_nm: drive_ex.unwrap(),
        steering_torque_nm: steer_ex.unwrap(),
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traverse::RollingResistance;
    use approx::assert_abs_diff_eq;

    #[test]
    fn route_geometry() {
        let r = Route::polyline(vec![[0.0, 0.0], [3.0, 0.0], [3.0, 0.0], [3.0, 4.0]], 1.0).unwrap();
        assert_eq!(r.points().len(), 3);
        assert_abs_diff_eq!(r.length(), 7.0);
        assert_eq!(r.heading(3.0), 0.0);
        assert_abs_diff_eq!(r.heading(3.5), std::f64::consts::FRAC_PI_2);
        assert_eq!(r.position(5.0), [3.0, 2.0]);
        assert_eq!(Route::straight(0.0, 0.0, 1.0).unwrap().length(), 0.0);
        assert!(Route::straight(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn wrap_is_symmetric() {
        assert_abs_diff_eq!(wrap_angle(3.0 * std::f64::consts::PI / 2.0), -std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-0.1), -0.1, epsilon = 1e-15);
    }

    #[test]
    fn incline_loads_rear_and_counts_no_cycles_on_straight() {
        let terrain = TerrainProfile::sample([-5.0, 30.0, -5.0, 5.0], 1.0, |x, _| 0.05 * x, |_| RollingResistance::Uniform(0.2), 9.81).unwrap();
        let rover = crate::scenario::presets::preset("paper_nominal").unwrap().rover().unwrap();
        let route = Route::straight(20.0, 0.0, 0.1).unwrap();
        let opts = TraverseOptions {
            step_m: 0.5,
            wear: WearModel { per_km: 6e-4, per_steer_cycle: 1e-7 },
            steer_cycle_threshold: 0.01,
        };
        let mut seen = 0;
        let rep = traverse(&rover, &terrain, &route, &opts, |r| {
            assert_abs_diff_eq!(r.slope, 0.05_f64.atan(), epsilon = 1e-12);
            assert!(r.loads[2] > r.loads[0]);
            seen += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, 40);
        assert_eq!(rep.steps, 40);
        assert_eq!(rep.wear.cable_cycles, 0);
    }
}
