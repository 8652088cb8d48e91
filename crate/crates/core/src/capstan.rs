//! Capstan-drive steering: steel cable over an input and an output drum.
//!
//! The drum radius ratio sets the mechanical advantage. Holding capacity follows the
//! belt-friction relation with the slack side held at the cable pretension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transmission::GearStage;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapstanDrive<T> {
    pub input_drum_radius: T,
    pub output_drum_radius: T,
    pub wrap_angle: T,
    pub friction_coeff: T,
    /// Slack-side tension held by the tensioner (N).
    pub pretension: T,
    pub nominal_efficiency: T,
}

impl<T: Scalar> CapstanDrive<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("input drum radius", self.input_drum_radius),
            ("output drum radius", self.output_drum_radius),
            ("wrap angle", self.wrap_angle),
            ("friction coefficient", self.friction_coeff),
        ];
        for (what, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::domain(what, v.as_f64(), "> 0"));
            }
        }
        if !(self.pretension >= T::zero()) {
            return Err(Error::domain("pretension", self.pretension.as_f64(), ">= 0"));
        }
        if !(self.nominal_efficiency > T::zero() && self.nominal_efficiency <= T::one()) {
            return Err(Error::domain(
                "capstan efficiency",
                self.nominal_efficiency.as_f64(),
                "in (0, 1]",
            ));
        }
        Ok(())
    }

    /// Torque multiplication (output radius over input radius).
    pub fn drum_ratio(&self) -> T {
        self.output_drum_radius / self.input_drum_radius
    }

    /// Largest output torque the cable holds before slipping (N·m).
    pub fn transmissible_torque(&self) -> T {
        let ratio = (self.friction_coeff * self.wrap_angle).exp();
        self.pretension * self.output_drum_radius * (ratio - T::one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteerLimits<T> {
    pub min_angle: T,
    pub max_angle: T,
}

impl<T: Scalar> SteerLimits<T> {
    pub fn symmetric(limit: T) -> Self {
        Self {
            min_angle: -limit,
            max_angle: limit,
        }
    }

    /// True when the limits include the full quarter turn either way.
    pub fn covers_quarter_turn(&self) -> bool {
        self.min_angle <= -T::FRAC_PI_2() && self.max_angle >= T::FRAC_PI_2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteerOutput<T> {
    pub angle: T,
    pub saturated: bool,
}

/// `T_high / T_low = exp(mu * phi)`.
pub fn capstan_tension_ratio<T: Scalar>(friction_coeff: T, wrap_angle: T) -> Result<T> {
    if !(friction_coeff > T::zero()) {
        return Err(Error::domain("friction coefficient", friction_coeff.as_f64(), "> 0"));
    }
    if !(wrap_angle > T::zero()) {
        return Err(Error::domain("wrap angle", wrap_angle.as_f64(), "> 0"));
    }
    Ok((friction_coeff * wrap_angle).exp())
}

/// Wheel steering angle for a motor angle, clamped to `limits`.
pub fn steer_angle<T: Scalar>(drive: &CapstanDrive<T>, motor_angle: T, limits: &SteerLimits<T>) -> SteerOutput<T> {
    let raw = motor_angle * drive.input_drum_radius / drive.output_drum_radius;
    let angle = raw.max(limits.min_angle).min(limits.max_angle);
    SteerOutput {
        angle,
        saturated: angle != raw,
    }
}

/// Transmissible torque over load torque; above one the cable holds. Zero load returns
/// `+inf`.
pub fn slip_margin<T: Scalar>(drive: &CapstanDrive<T>, load_torque: T) -> Result<T> {
    if !(load_torque >= T::zero()) {
        return Err(Error::domain("load torque", load_torque.as_f64(), ">= 0"));
    }
    if load_torque == T::zero() {
        return Ok(T::infinity());
    }
    Ok(drive.transmissible_torque() / load_torque)
}

/// Output torque of the capstan for a given motor torque.
pub fn steering_torque_chain<T: Scalar>(drive: &CapstanDrive<T>, motor_torque: T) -> Result<T> {
    if !(motor_torque >= T::zero()) {
        return Err(Error::domain("motor torque", motor_torque.as_f64(), ">= 0"));
    }
    Ok(motor_torque * drive.drum_ratio() * drive.nominal_efficiency)
}

/// Composed efficiency of a gear train.
pub fn composed_efficiency<T: Scalar>(stages: &[GearStage<T>]) -> Result<T> {
    stages.iter().try_fold(T::one(), |acc, s| {
        s.validate()?;
        Ok(acc * s.mesh_efficiency)
    })
}

/// Output torque of a gearbox steering alternative.
pub fn gear_steering_torque_chain<T: Scalar>(stages: &[GearStage<T>], motor_torque: T) -> Result<T> {
    if !(motor_torque >= T::zero()) {
        return Err(Error::domain("motor torque", motor_torque.as_f64(), ">= 0"));
    }
    let eta = composed_efficiency(stages)?;
    let ratio = stages.iter().fold(T::one(), |acc, s| acc * s.ratio);
    Ok(motor_torque * ratio * eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringArchitecture {
    Capstan,
    GearTrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringComparison<T> {
    pub capstan_efficiency: T,
    pub gear_train_efficiency: T,
    pub preferred: SteeringArchitecture,
}

/// Ranks the capstan against a gearbox alternative by transmission efficiency.
pub fn compare_steering<T: Scalar>(drive: &CapstanDrive<T>, gear_train: &[GearStage<T>]) -> Result<SteeringComparison<T>> {
    drive.validate()?;
    let gear_train_efficiency = composed_efficiency(gear_train)?;
    let preferred = if drive.nominal_efficiency >= gear_train_efficiency {
        SteeringArchitecture::Capstan
    } else {
        SteeringArchitecture::GearTrain
    };
    Ok(SteeringComparison {
        capstan_efficiency: drive.nominal_efficiency,
        gear_train_efficiency,
        preferred,
    })
}
