//! Quasi-static locomotion simulator for a warm-box lunar rover: cardan drive chains,
//! capstan steering, parallelogram suspension, wheel allocation, traverse wear and a
//! lumped thermal model, driven by JSON scenarios.
//!
//! The physics modules are generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix them to `f64`. The traverse and scenario layers work in `f64`.

// Checks are written as !(x > 0) so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capstan;
pub mod error;
pub mod locomotion;
mod numeric;
pub mod scalar;
pub mod scenario;
pub mod suspension;
pub mod thermal;
pub mod transmission;
pub mod traverse;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type CardanJoint = transmission::CardanJoint<f64>;
pub type DualCardanChain = transmission::DualCardanChain<f64>;
pub type GearStage = transmission::GearStage<f64>;
pub type EfficiencyModel = transmission::EfficiencyModel<f64>;
pub type Stage = transmission::Stage<f64>;
pub type DriveChain = transmission::DriveChain<f64>;
pub type CapstanDrive = capstan::CapstanDrive<f64>;
pub type SteerLimits = capstan::SteerLimits<f64>;
pub type WishboneGeometry = suspension::WishboneGeometry<f64>;
pub type RoverLayout = locomotion::RoverLayout<f64>;
pub type BodyTwist = locomotion::BodyTwist<f64>;
pub type WheelSetpoint = locomotion::WheelSetpoint<f64>;
pub type LocomotionMode = locomotion::LocomotionMode<f64>;
pub type WearState = traverse::WearState<f64>;
pub type WearModel = traverse::WearModel<f64>;
pub type ThermalNode = thermal::ThermalNode<f64>;
pub type EnvironmentProfile = thermal::EnvironmentProfile<f64>;
pub type HeaterController = thermal::HeaterController<f64>;
