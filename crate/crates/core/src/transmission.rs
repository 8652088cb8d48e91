//! Warm-box-to-wheel drive chain.
//!
//! The chain is an ordered list of gear stages and dual cardan pairs. Gear stages divide
//! speed by `ratio` and lose `1 - mesh_efficiency`; a cardan pair transmits speed at a
//! revolution-mean ratio of exactly one and loses efficiency quadratically in its bend
//! angles. The bevel stage losses are lumped into [`EfficiencyModel::bevel_efficiency`].
//!
//! Single-joint kinematics use the classical universal-joint relation
//! `tan(out) = tan(in) * cos(bend)`, measured from the input yoke.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

fn check_bend<T: Scalar>(bend: T) -> Result<()> {
    if !bend.is_finite() || bend.abs() >= T::FRAC_PI_2() {
        return Err(Error::domain("bend angle", bend.as_f64(), "|bend| < pi/2"));
    }
    Ok(())
}

/// Output shaft angle of one cardan joint, continuous in `input_angle`.
///
/// The quadrant comes from `atan2`, and the revolution is chosen nearest to the input
/// (the output never lags or leads the input by a quarter turn or more).
pub fn cardan_output_angle<T: Scalar>(input_angle: T, bend: T) -> Result<T> {
    check_bend(bend)?;
    Ok(output_angle_unchecked(input_angle, bend))
}

fn output_angle_unchecked<T: Scalar>(input_angle: T, bend: T) -> T {
    let base = (input_angle.sin() * bend.cos()).atan2(input_angle.cos());
    let tau = T::TAU();
    let turns = ((input_angle - base) / tau).round();
    base + turns * tau
}

/// Instantaneous speed ratio `w_out / w_in = cos b / (1 - sin^2 b sin^2 in)`.
pub fn cardan_speed_ratio<T: Scalar>(input_angle: T, bend: T) -> Result<T> {
    check_bend(bend)?;
    Ok(speed_ratio_unchecked(input_angle, bend))
}

fn speed_ratio_unchecked<T: Scalar>(input_angle: T, bend: T) -> T {
    let sb = bend.sin();
    let si = input_angle.sin();
    bend.cos() / (T::one() - sb * sb * si * si)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct CardanJoint<T> {
    /// Angle between input and output shaft axes (rad).
    pub bend_angle: T,
    /// Yoke offset relative to the reference revolution angle (rad, in `[0, 2pi)`).
    #[serde(default)]
    pub input_phase: T,
}

impl<T: Scalar> CardanJoint<T> {
    pub fn new(bend_angle: T, input_phase: T) -> Result<Self> {
        check_bend(bend_angle)?;
        if !input_phase.is_finite() {
            return Err(Error::domain("input phase", input_phase.as_f64(), "finite"));
        }
        Ok(Self {
            bend_angle,
            input_phase: normalize_phase(input_phase),
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_bend(self.bend_angle)
    }

    pub fn output_angle(&self, input_angle: T) -> T {
        self.input_phase + output_angle_unchecked(input_angle - self.input_phase, self.bend_angle)
    }

    pub fn speed_ratio(&self, input_angle: T) -> T {
        speed_ratio_unchecked(input_angle - self.input_phase, self.bend_angle)
    }
}

fn normalize_phase<T: Scalar>(phase: T) -> T {
    let tau = T::TAU();
    let p = phase % tau;
    let p = if p < T::zero() { p + tau } else { p };
    if p >= tau {
        T::zero()
    } else {
        p
    }
}

/// Relative yoke phasing of the second joint of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phasing<T> {
    /// Phasing for the parallelogram (Z) arrangement: when the two bends oppose each other
    /// the second yoke sits a quarter turn ahead of the first and the ripple cancels.
    /// Same-sign bends keep the yokes in phase, so their ripple compounds.
    CvAligned,
    /// Explicit yoke offset of joint b relative to joint a (rad).
    Custom(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct DualCardanChain<T> {
    pub joint_a: CardanJoint<T>,
    pub joint_b: CardanJoint<T>,
    pub phasing: Phasing<T>,
}

impl<T: Scalar> DualCardanChain<T> {
    pub fn new(bend_a: T, bend_b: T, phasing: Phasing<T>) -> Result<Self> {
        Ok(Self {
            joint_a: CardanJoint::new(bend_a, T::zero())?,
            joint_b: CardanJoint::new(bend_b, T::zero())?,
            phasing,
        })
    }

    /// A pair with equal and opposite bends, the parallelogram arrangement.
    pub fn opposed(bend: T) -> Result<Self> {
        Self::new(bend, -bend, Phasing::CvAligned)
    }

    pub fn validate(&self) -> Result<()> {
        self.joint_a.validate()?;
        self.joint_b.validate()
    }

    /// Same yoke phasing with new bend angles.
    pub fn with_bends(&self, bend_a: T, bend_b: T) -> Result<Self> {
        check_bend(bend_a)?;
        check_bend(bend_b)?;
        let mut out = *self;
        out.joint_a.bend_angle = bend_a;
        out.joint_b.bend_angle = bend_b;
        Ok(out)
    }

    /// Yoke offset of joint b relative to joint a (rad).
    pub fn relative_phase(&self) -> T {
        match self.phasing {
            Phasing::CvAligned => {
                if self.joint_a.bend_angle * self.joint_b.bend_angle < T::zero() {
                    T::FRAC_PI_2()
                } else {
                    T::zero()
                }
            }
            Phasing::Custom(offset) => offset,
        }
    }

    fn effective_b(&self) -> CardanJoint<T> {
        CardanJoint {
            bend_angle: self.joint_b.bend_angle,
            input_phase: self.joint_a.input_phase + self.relative_phase(),
        }
    }

    pub fn output_angle(&self, input_angle: T) -> T {
        self.effective_b().output_angle(self.joint_a.output_angle(input_angle))
    }

    pub fn speed_ratio(&self, input_angle: T) -> T {
        let mid = self.joint_a.output_angle(input_angle);
        self.joint_a.speed_ratio(input_angle) * self.effective_b().speed_ratio(mid)
    }

    /// Minimum and maximum instantaneous speed ratio over one input revolution.
    pub fn ripple(&self, samples: usize) -> (T, T) {
        let n = samples.max(1);
        let step = T::TAU() / T::lit(n as f64);
        (0..n)
            .map(|i| self.speed_ratio(step * T::lit(i as f64)))
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), r| (lo.min(r), hi.max(r)))
    }
}

/// End-to-end instantaneous speed ratio of a dual cardan pair.
pub fn dual_cardan_ratio<T: Scalar>(chain: &DualCardanChain<T>, input_angle: T) -> Result<T> {
    chain.validate()?;
    Ok(chain.speed_ratio(input_angle))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GearStage<T> {
    /// Output speed = input speed / ratio.
    pub ratio: T,
    pub mesh_efficiency: T,
}

impl<T: Scalar> GearStage<T> {
    pub fn new(ratio: T, mesh_efficiency: T) -> Result<Self> {
        let stage = Self { ratio, mesh_efficiency };
        stage.validate()?;
        Ok(stage)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratio == T::zero() || !self.ratio.is_finite() {
            return Err(Error::domain("gear ratio", self.ratio.as_f64(), "non-zero and finite"));
        }
        if !(self.mesh_efficiency > T::zero() && self.mesh_efficiency <= T::one()) {
            return Err(Error::domain(
                "mesh efficiency",
                self.mesh_efficiency.as_f64(),
                "in (0, 1]",
            ));
        }
        Ok(())
    }
}

/// Per-joint efficiency `1 - a * bend^2`, plus the lumped bevel-stage efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyModel<T> {
    pub quadratic_coeff: T,
    pub bevel_efficiency: T,
}

impl<T: Scalar> EfficiencyModel<T> {
    pub fn lossless() -> Self {
        Self {
            quadratic_coeff: T::zero(),
            bevel_efficiency: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.quadratic_coeff >= T::zero()) || !self.quadratic_coeff.is_finite() {
            return Err(Error::domain(
                "quadratic efficiency coefficient",
                self.quadratic_coeff.as_f64(),
                ">= 0",
            ));
        }
        if !(self.bevel_efficiency > T::zero() && self.bevel_efficiency <= T::one()) {
            return Err(Error::domain(
                "bevel efficiency",
                self.bevel_efficiency.as_f64(),
                "in (0, 1]",
            ));
        }
        Ok(())
    }

    pub fn joint_efficiency(&self, bend: T) -> T {
        T::one() - self.quadratic_coeff * bend * bend
    }

    /// Largest bend for which the joint efficiency stays positive.
    pub fn max_bend(&self) -> T {
        if self.quadratic_coeff == T::zero() {
            T::infinity()
        } else {
            (T::one() / self.quadratic_coeff).sqrt()
        }
    }
}

/// Fits the quadratic joint loss so that a chain with one opposed cardan pair hits
/// `neutral_target` straight and `worst_target` at `worst_bend` on both joints.
pub fn calibrate_efficiency<T: Scalar>(
    neutral_target: T,
    worst_target: T,
    worst_bend: T,
) -> Result<EfficiencyModel<T>> {
    if !(neutral_target > T::zero() && neutral_target <= T::one()) {
        return Err(Error::InfeasibleTarget {
            reason: format!("neutral target {neutral_target} not in (0, 1]"),
        });
    }
    if !(worst_target > T::zero() && worst_target <= neutral_target) {
        return Err(Error::InfeasibleTarget {
            reason: format!("worst target {worst_target} not in (0, {neutral_target}]"),
        });
    }
    if !(worst_bend > T::zero() && worst_bend < T::FRAC_PI_2()) {
        return Err(Error::InfeasibleTarget {
            reason: format!("worst bend {worst_bend} rad not in (0, pi/2)"),
        });
    }
    let per_joint = (worst_target / neutral_target).sqrt();
    let quadratic_coeff = (T::one() - per_joint) / (worst_bend * worst_bend);
    Ok(EfficiencyModel {
        quadratic_coeff,
        bevel_efficiency: neutral_target,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub enum Stage<T> {
    Gear(GearStage<T>),
    DualCardan(DualCardanChain<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct DriveChain<T> {
    pub stages: Vec<Stage<T>>,
    pub efficiency_model: EfficiencyModel<T>,
}

/// Result of pushing speed and torque through a chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer<T> {
    pub output_speed: T,
    pub output_torque: T,
    pub efficiency: T,
}

impl<T: Scalar> DriveChain<T> {
    pub fn new(stages: Vec<Stage<T>>, efficiency_model: EfficiencyModel<T>) -> Result<Self> {
        let chain = Self {
            stages,
            efficiency_model,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::domain("drive chain stages", 0.0, "at least one stage"));
        }
        for stage in &self.stages {
            match stage {
                Stage::Gear(g) => g.validate()?,
                Stage::DualCardan(d) => d.validate()?,
            }
        }
        self.efficiency_model.validate()
    }

    /// Number of individual cardan joints (two per dual pair).
    pub fn cardan_count(&self) -> usize {
        2 * self.dual_count()
    }

    pub fn dual_count(&self) -> usize {
        self.stages
            .iter()
            .filter(|s| matches!(s, Stage::DualCardan(_)))
            .count()
    }

    /// Product of gear ratios; cardan pairs contribute their revolution-mean ratio of one.
    pub fn ratio(&self) -> T {
        self.stages.iter().fold(T::one(), |acc, s| match s {
            Stage::Gear(g) => acc * g.ratio,
            Stage::DualCardan(_) => acc,
        })
    }

    /// Bends stored in the chain's cardan joints, in stage order.
    pub fn nominal_articulation(&self) -> Vec<T> {
        self.stages
            .iter()
            .filter_map(|s| match s {
                Stage::DualCardan(d) => Some([d.joint_a.bend_angle, d.joint_b.bend_angle]),
                Stage::Gear(_) => None,
            })
            .flatten()
            .collect()
    }

    /// Composed efficiency with the given per-joint bends (one per cardan joint).
    pub fn efficiency(&self, articulation: &[T]) -> Result<T> {
        if articulation.len() != self.cardan_count() {
            return Err(Error::ArticulationLength {
                expected: self.cardan_count(),
                got: articulation.len(),
            });
        }
        let model = &self.efficiency_model;
        let mut eta = model.bevel_efficiency;
        let mut bends = articulation.iter();
        for stage in &self.stages {
            match stage {
                Stage::Gear(g) => {
                    if !(g.mesh_efficiency > T::zero()) {
                        return Err(Error::StageEfficiency {
                            value: g.mesh_efficiency.as_f64(),
                        });
                    }
                    eta *= g.mesh_efficiency;
                }
                Stage::DualCardan(_) => {
                    for &bend in bends.by_ref().take(2) {
                        check_bend(bend)?;
                        let joint = model.joint_efficiency(bend);
                        if !(joint > T::zero()) {
                            return Err(Error::StageEfficiency { value: joint.as_f64() });
                        }
                        eta *= joint;
                    }
                }
            }
        }
        Ok(eta)
    }

    /// Quasi-static transfer: mean speed ratio, torque multiplied by ratio and efficiency.
    pub fn transfer(&self, input_speed: T, input_torque: T, articulation: &[T]) -> Result<Transfer<T>> {
        let efficiency = self.efficiency(articulation)?;
        let ratio = self.ratio();
        let output_speed = input_speed / ratio;
        let output_torque = input_torque * ratio * efficiency;
        debug_assert!({
            let p_in = input_speed * input_torque;
            let p_out = output_speed * output_torque;
            (p_out - p_in * efficiency).abs() <= T::lit(1e-9) * p_in.abs().max(T::min_positive_value())
                || p_in == T::zero()
        });
        Ok(Transfer {
            output_speed,
            output_torque,
            efficiency,
        })
    }
}

pub fn chain_transfer<T: Scalar>(
    chain: &DriveChain<T>,
    input_speed: T,
    input_torque: T,
    articulation: &[T],
) -> Result<Transfer<T>> {
    chain.transfer(input_speed, input_torque, articulation)
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // worked examples use rounded 30 and 45 deg
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    /// Output angle from the two-yoke vector construction: the cross pin on the output
    /// side must be perpendicular to both the input pin and the bent output axis.
    fn yoke_oracle(theta: f64, bend: f64) -> f64 {
        let a = [0.0, theta.cos(), theta.sin()];
        let d = [bend.cos(), 0.0, bend.sin()];
        let b = [
            d[1] * a[2] - d[2] * a[1],
            d[2] * a[0] - d[0] * a[2],
            d[0] * a[1] - d[1] * a[0],
        ];
        let e1 = [0.0, 1.0, 0.0];
        let e2 = [-bend.sin(), 0.0, bend.cos()];
        let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        let raw = (-dot(b, e1)).atan2(dot(b, e2));
        raw + TAU * ((theta - raw) / TAU).round()
    }

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn output_angle_examples() {
        assert_abs_diff_eq!(cardan_output_angle(0.7854, 0.0).unwrap(), 0.7854, epsilon = 1e-15);
        let out = cardan_output_angle(0.7854_f64, 0.5236).unwrap();
        assert_abs_diff_eq!(out, 0.713_726, epsilon = 5e-5);
        assert_abs_diff_eq!(out, yoke_oracle(0.7854, 0.5236), epsilon = 1e-12);
        assert_abs_diff_eq!(cardan_output_angle(FRAC_PI_2, 0.5236).unwrap(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn output_angle_matches_yoke_construction_over_two_turns() {
        for deg in -360..=360 {
            let theta = (deg as f64).to_radians();
            for bend in [0.1, 0.5236, 1.0, -0.7] {
                let got = cardan_output_angle(theta, bend).unwrap();
                assert_abs_diff_eq!(got, yoke_oracle(theta, bend), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn bend_at_quarter_turn_rejected() {
        assert!(matches!(cardan_output_angle(0.3, FRAC_PI_2), Err(Error::Domain { .. })));
        assert!(matches!(cardan_speed_ratio(0.3, -2.0), Err(Error::Domain { .. })));
        assert!(CardanJoint::new(1.6, 0.0).is_err());
    }

    #[test]
    fn speed_ratio_examples_against_finite_differences() {
        assert_eq!(cardan_speed_ratio(1.234, 0.0).unwrap(), 1.0);
        let at0 = cardan_speed_ratio(0.0, 0.5236).unwrap();
        let fd0 = fd(|x| cardan_output_angle(x, 0.5236).unwrap(), 0.0);
        assert_abs_diff_eq!(at0, 0.866_03, epsilon = 1e-5);
        assert_abs_diff_eq!(at0, fd0, epsilon = 1e-8);
        let at90 = cardan_speed_ratio(FRAC_PI_2, 0.5236).unwrap();
        let fd90 = fd(|x| cardan_output_angle(x, 0.5236).unwrap(), FRAC_PI_2);
        assert_abs_diff_eq!(at90, 1.154_70, epsilon = 1e-5);
        assert_abs_diff_eq!(at90, fd90, epsilon = 1e-8);
    }

    #[test]
    fn dual_examples() {
        let cv = DualCardanChain::new(0.4, -0.4, Phasing::CvAligned).unwrap();
        assert_abs_diff_eq!(dual_cardan_ratio(&cv, 1.234).unwrap(), 1.0, epsilon = 1e-9);

        let same = DualCardanChain::new(0.4, 0.4, Phasing::CvAligned).unwrap();
        let r = dual_cardan_ratio(&same, 0.0).unwrap();
        let oracle = fd(|x| same.output_angle(x), 0.0);
        assert_abs_diff_eq!(r, 0.848_35, epsilon = 1e-5);
        assert_abs_diff_eq!(r, oracle, epsilon = 1e-8);

        let straight = DualCardanChain::new(0.0, 0.0, Phasing::Custom(0.7)).unwrap();
        assert_eq!(dual_cardan_ratio(&straight, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn cv_pair_has_no_ripple_and_same_sign_pair_does() {
        let (lo, hi) = DualCardanChain::opposed(0.6).unwrap().ripple(720);
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
        let (lo, hi) = DualCardanChain::new(0.6, 0.6, Phasing::CvAligned).unwrap().ripple(720);
        assert!(lo < 0.7 && hi > 1.4);
    }

    #[test]
    fn calibration_examples() {
        let m = calibrate_efficiency(0.99, 0.43, 1.13446).unwrap();
        assert_abs_diff_eq!(m.quadratic_coeff, 0.264_92, epsilon = 5e-6);
        assert_eq!(m.bevel_efficiency, 0.99);
        let chain = DriveChain::new(vec![Stage::DualCardan(DualCardanChain::opposed(0.0).unwrap())], m).unwrap();
        assert_abs_diff_eq!(chain.efficiency(&[0.0, 0.0]).unwrap(), 0.99, epsilon = 1e-12);
        assert_abs_diff_eq!(chain.efficiency(&[1.13446, -1.13446]).unwrap(), 0.43, epsilon = 1e-6);

        let lossless = calibrate_efficiency(1.0, 1.0, 0.3).unwrap();
        assert_eq!(lossless.quadratic_coeff, 0.0);

        let steep = calibrate_efficiency(0.99, 0.43, 0.5236).unwrap();
        assert_abs_diff_eq!(steep.quadratic_coeff, 1.243_63, epsilon = 5e-5);
        let chain = DriveChain::new(vec![Stage::DualCardan(DualCardanChain::opposed(0.0).unwrap())], steep).unwrap();
        assert_abs_diff_eq!(chain.efficiency(&[0.5236, -0.5236]).unwrap(), 0.43, epsilon = 1e-6);
    }

    #[test]
    fn calibration_rejects_infeasible_targets() {
        assert!(matches!(calibrate_efficiency(0.9, 0.95, 0.5), Err(Error::InfeasibleTarget { .. })));
        assert!(matches!(calibrate_efficiency(1.2, 0.5, 0.5), Err(Error::InfeasibleTarget { .. })));
        assert!(matches!(calibrate_efficiency(0.9, 0.5, 1.6), Err(Error::InfeasibleTarget { .. })));
        assert!(matches!(calibrate_efficiency(0.9, 0.0, 0.5), Err(Error::InfeasibleTarget { .. })));
    }

    #[test]
    fn transfer_examples() {
        let chain = DriveChain::new(
            vec![
                Stage::Gear(GearStage::new(2.0, 0.99).unwrap()),
                Stage::DualCardan(DualCardanChain::opposed(0.0).unwrap()),
            ],
            EfficiencyModel::lossless(),
        )
        .unwrap();
        let t = chain_transfer(&chain, 10.0, 10.0, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(t.output_speed, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.output_torque, 19.8, epsilon = 1e-12);
        assert_abs_diff_eq!(t.efficiency, 0.99, epsilon = 1e-12);

        let model = EfficiencyModel {
            quadratic_coeff: 0.26492,
            bevel_efficiency: 0.99,
        };
        let pair = DriveChain::new(vec![Stage::DualCardan(DualCardanChain::opposed(0.0).unwrap())], model).unwrap();
        let eta = pair.transfer(1.0, 1.0, &[0.5236, -0.5236]).unwrap().efficiency;
        assert_abs_diff_eq!(eta, 0.99 * (1.0 - 0.26492 * 0.5236 * 0.5236_f64).powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(eta, 0.851_41, epsilon = 1e-5);

        let eta = pair.transfer(1.0, 1.0, &[1.13446, -1.13446]).unwrap().efficiency;
        assert!((eta - 0.43).abs() <= 0.01);
    }

    #[test]
    fn transfer_errors() {
        let pair = DriveChain::new(
            vec![Stage::DualCardan(DualCardanChain::opposed(0.0).unwrap())],
            EfficiencyModel::lossless(),
        )
        .unwrap();
        assert!(matches!(pair.transfer(1.0, 1.0, &[0.1]), Err(Error::ArticulationLength { .. })));
        assert!(matches!(pair.transfer(1.0, 1.0, &[0.1, 1.6]), Err(Error::Domain { .. })));
        let lossy = DriveChain {
            efficiency_model: EfficiencyModel {
                quadratic_coeff: 2.0,
                bevel_efficiency: 1.0,
            },
            ..pair
        };
        assert!(matches!(lossy.transfer(1.0, 1.0, &[0.8, -0.8]), Err(Error::StageEfficiency { .. })));
        assert!(DriveChain::<f64>::new(vec![], EfficiencyModel::lossless()).is_err());
        assert!(GearStage::new(0.0, 0.9).is_err());
        assert!(GearStage::new(2.0, 0.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let r = cardan_speed_ratio(0.0_f32, 0.5236).unwrap();
        assert!((r - 0.866_03).abs() < 1e-5);
        let cv = DualCardanChain::<f32>::opposed(0.4).unwrap();
        assert!((cv.speed_ratio(1.234) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn phase_normalized() {
        let j = CardanJoint::new(0.2, -PI / 2.0).unwrap();
        assert_abs_diff_eq!(j.input_phase, 1.5 * PI, epsilon = 1e-12);
        let j = CardanJoint::new(0.2, 5.0 * PI).unwrap();
        assert_abs_diff_eq!(j.input_phase, PI, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn cv_cancellation(bend in -1.3_f64..1.3, deg in 0u32..360) {
            let chain = DualCardanChain::opposed(bend).unwrap();
            let r = dual_cardan_ratio(&chain, (deg as f64).to_radians()).unwrap();
            prop_assert!((r - 1.0).abs() < 1e-9);
        }

        #[test]
        fn ratio_bounds_and_angle_conservation(bend in -1.5_f64..1.5, theta in -10.0_f64..10.0) {
            let r = cardan_speed_ratio(theta, bend).unwrap();
            let c = bend.cos();
            prop_assert!(r >= c * (1.0 - 1e-12) && r <= (1.0 / c) * (1.0 + 1e-12));
            let advance = cardan_output_angle(theta + TAU, bend).unwrap() - cardan_output_angle(theta, bend).unwrap();
            prop_assert!((advance - TAU).abs() < 1e-9);
        }

        #[test]
        fn efficiency_non_increasing_in_bend(b1 in 0.0_f64..1.13446, b2 in 0.0_f64..1.13446) {
            let m = calibrate_efficiency(0.99, 0.43, 1.13446).unwrap();
            let chain = DriveChain::new(vec![Stage::DualCardan(DualCardanChain::opposed(0.0).unwrap())], m).unwrap();
            let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
            let e_lo = chain.efficiency(&[lo, -lo]).unwrap();
            let e_hi = chain.efficiency(&[hi, -hi]).unwrap();
            prop_assert!(e_hi <= e_lo);
            prop_assert!(e_hi > 0.0 && e_lo <= 1.0);
        }

        #[test]
        fn power_bookkeeping(speed in 0.01_f64..100.0, torque in -50.0_f64..50.0, bend in -1.0_f64..1.0, ratio in 0.5_f64..80.0) {
            let chain = DriveChain::new(
                vec![
                    Stage::Gear(GearStage::new(ratio, 0.97).unwrap()),
                    Stage::DualCardan(DualCardanChain::opposed(0.0).unwrap()),
                ],
                calibrate_efficiency(0.99, 0.43, 1.13446).unwrap(),
            ).unwrap();
            let t = chain.transfer(speed, torque, &[bend, -bend]).unwrap();
            let p_in = speed * torque;
            let p_out = t.output_speed * t.output_torque;
            prop_assert!((p_out - p_in * t.efficiency).abs() <= 1e-9 * p_in.abs().max(1e-300));
        }
    }
}
