//! Quasi-static traverse: wheel loads, drive and steering torque demand, wear derating,
//! and the step integrator that runs a route over a height field.

mod report;
mod sim;
pub(crate) mod terrain;

pub use report::{traverse_verdicts, Extrema, PaperEnvelopes, TraverseReport, Verdict};
pub use sim::{envelope_sweep, traverse, Rover, Route, StepRecord, SuspensionMode, SweepExtremes, TraverseOptions};
pub use terrain::{RollingResistance, TerrainProfile};

use serde::{Deserialize, Serialize};

use crate::capstan::CapstanDrive;
use crate::error::{Error, Result};
use crate::locomotion::RoverLayout;
use crate::numeric::solve3;
use crate::transmission::DriveChain;
use crate::Scalar;

/// Normal force on every leg from the static balance of the body on a tilted plane.
///
/// Pitch is nose-up positive, roll is left-side-up positive. With more than three legs the
/// balance is indeterminate; the minimum-norm distribution (loads linear in leg position) is
/// returned.
pub fn wheel_loads<T: Scalar>(layout: &RoverLayout<T>, total_mass: T, gravity: T, pitch: T, roll: T) -> Result<Vec<T>> {
    if !(total_mass > T::zero()) {
        return Err(Error::domain("total mass", total_mass.as_f64(), "> 0"));
    }
    if !(gravity > T::zero()) {
        return Err(Error::domain("gravity", gravity.as_f64(), "> 0"));
    }
    let limit = T::PI() / T::lit(3.0);
    if !(pitch.abs() < limit) {
        return Err(Error::domain("pitch", pitch.as_f64(), "|pitch| < pi/3"));
    }
    if !(roll.abs() < limit) {
        return Err(Error::domain("roll", roll.as_f64(), "|roll| < pi/3"));
    }
    let mg = total_mass * gravity;
    let normal = mg * pitch.cos() * roll.cos();
    let g_x = -mg * pitch.sin();
    let g_y = -mg * pitch.cos() * roll.sin();
    let [cx, cy, h] = layout.cog;
    // sum N = W ; sum x N = cx W + h g_x ; sum y N = cy W + h g_y
    let b = [normal, cx * normal + h * g_x, cy * normal + h * g_y];
    let mut m = [[T::zero(); 3]; 3];
    for p in &layout.legs {
        let row = [T::one(), p[0], p[1]];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
        }
    }
    let coef = solve3(m, b).ok_or_else(|| Error::Layout("legs are collinear".into()))?;
    let loads: Vec<T> = layout
        .legs
        .iter()
        .map(|p| coef[0] + coef[1] * p[0] + coef[2] * p[1])
        .collect();
    if let Some((wheel, &load)) = loads.iter().enumerate().find(|(_, &n)| n < T::zero()) {
        return Err(Error::TipOver {
            wheel,
            load: load.as_f64(),
        });
    }
    Ok(loads)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveDemand<T> {
    pub wheel_torque: T,
    pub motor_torque: T,
}

/// Wheel and motor torque needed to hold speed against rolling resistance and grade.
///
/// The grade force `weight * sin(slope)` is shared by load fraction. `c_rr` and
/// `articulation` are per wheel; each articulation entry holds one bend per cardan joint.
#[allow(clippy::too_many_arguments)]
pub fn drive_torques<T: Scalar>(
    loads: &[T],
    weight: T,
    slope_along_path: T,
    c_rr: &[T],
    layout: &RoverLayout<T>,
    chain: &DriveChain<T>,
    articulation: &[Vec<T>],
    derating: T,
) -> Result<Vec<DriveDemand<T>>> {
    if loads.len() != c_rr.len() || loads.len() != articulation.len() {
        return Err(Error::Layout(format!(
            "{} loads, {} resistance coefficients, {} articulations",
            loads.len(),
            c_rr.len(),
            articulation.len()
        )));
    }
    if let Some(&n) = loads.iter().find(|&&n| !(n >= T::zero())) {
        return Err(Error::domain("wheel load", n.as_f64(), ">= 0"));
    }
    if !(derating > T::zero() && derating <= T::one()) {
        return Err(Error::domain("derating", derating.as_f64(), "in (0, 1]"));
    }
    let total: T = loads.iter().fold(T::zero(), |a, &n| a + n);
    let grade = weight * slope_along_path.sin();
    let ratio = chain.ratio();
    loads
        .iter()
        .zip(c_rr)
        .zip(articulation)
        .map(|((&n, &c), bends)| {
            let share = if total > T::zero() { n / total } else { T::zero() };
            let force = c * n + grade * share;
            let wheel_torque = force * layout.wheel_radius;
            let eta = chain.efficiency(bends)?;
            Ok(DriveDemand {
                wheel_torque,
                motor_torque: wheel_torque / (ratio * eta * derating),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteerDemand<T> {
    pub steer_torque: T,
    pub motor_torque: T,
}

/// Scrub torque about the steering axis and the capstan motor torque to overcome it.
pub fn steering_torques<T: Scalar>(loads: &[T], scrub_coeff: T, contact_offset: T, drive: &CapstanDrive<T>) -> Result<Vec<SteerDemand<T>>> {
    if !(scrub_coeff >= T::zero()) {
        return Err(Error::domain("scrub coefficient", scrub_coeff.as_f64(), ">= 0"));
    }
    if !(contact_offset >= T::zero()) {
        return Err(Error::domain("contact offset", contact_offset.as_f64(), ">= 0"));
    }
    drive.validate()?;
    let through = drive.drum_ratio() * drive.nominal_efficiency;
    loads
        .iter()
        .map(|&n| {
            if !(n >= T::zero()) {
                return Err(Error::domain("wheel load", n.as_f64(), ">= 0"));
            }
            let steer_torque = scrub_coeff * n * contact_offset;
            Ok(SteerDemand {
                steer_torque,
                motor_torque: steer_torque / through,
            })
        })
        .collect()
}

/// Linear wear coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WearModel<T> {
    /// Efficiency loss per km driven.
    pub per_km: T,
    /// Efficiency loss per steering actuation cycle.
    pub per_steer_cycle: T,
}

impl<T: Scalar> WearModel<T> {
    fn accumulated(&self, odometer: T, cycles: u64) -> T {
        self.per_km * odometer + self.per_steer_cycle * T::lit(cycles as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WearState<T> {
    pub odometer_km: T,
    /// Accumulated absolute bend travel per cardan joint (rad).
    pub cardan_bend_travel: Vec<T>,
    pub cable_cycles: u64,
    pub derating: T,
}

impl<T: Scalar> WearState<T> {
    pub fn fresh(cardan_joints: usize) -> Self {
        Self {
            odometer_km: T::zero(),
            cardan_bend_travel: vec![T::zero(); cardan_joints],
            cable_cycles: 0,
            derating: T::one(),
        }
    }
}

/// Advances the wear state.
///
/// The loss is linear in accumulated distance and cycles, so the result does not depend on
/// how a traverse is split into updates; a state starting below one keeps that factor.
pub fn wear_update<T: Scalar>(state: &WearState<T>, model: &WearModel<T>, distance_km: T, steer_cycles: u64, bend_activity: &[T]) -> Result<WearState<T>> {
    if !(distance_km >= T::zero()) {
        return Err(Error::domain("distance", distance_km.as_f64(), ">= 0"));
    }
    let mut next = state.clone();
    next.odometer_km += distance_km;
    next.cable_cycles += steer_cycles;
    if next.cardan_bend_travel.len() < bend_activity.len() {
        next.cardan_bend_travel.resize(bend_activity.len(), T::zero());
    }
    for (acc, &b) in next.cardan_bend_travel.iter_mut().zip(bend_activity) {
        *acc += b.abs();
    }
    let before = T::one() - model.accumulated(state.odometer_km, state.cable_cycles);
    let after = T::one() - model.accumulated(next.odometer_km, next.cable_cycles);
    let factor = if before > T::zero() {
        (after / before).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    next.derating = state.derating * factor;
    Ok(next)
}
