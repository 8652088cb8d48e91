//! Wheel steering and speed allocation from a body twist.
//!
//! Every locomotion mode reduces to a planar twist `(v_x, v_y, omega_z)` in the body frame
//! (x forward, y left). Each wheel is steered along its ground velocity, so all wheel axles
//! meet at the instantaneous centre of rotation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::solve3;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct RoverLayout<T> {
    /// Leg (steering axis) positions in the body plane, x forward, y left (m).
    pub legs: Vec<[T; 2]>,
    pub wheel_radius: T,
    #[serde(default = "default_wheel_width")]
    pub wheel_width: T,
    /// Centre of gravity: planar position and height above the contact plane (m).
    pub cog: [T; 3],
}

fn default_wheel_width<T: Scalar>() -> T {
    T::lit(0.11)
}

impl<T: Scalar> RoverLayout<T> {
    /// Rectangular four-leg layout centred on the body origin.
    pub fn four_wheel(half_wheelbase: T, half_track: T, wheel_radius: T, cog_height: T) -> Self {
        let (a, b) = (half_wheelbase, half_track);
        Self {
            legs: vec![[a, b], [a, -b], [-a, b], [-a, -b]],
            wheel_radius,
            wheel_width: default_wheel_width(),
            cog: [T::zero(), T::zero(), cog_height],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.legs.len() < 3 {
            return Err(Error::Layout(format!("{} legs, need at least 3", self.legs.len())));
        }
        for (i, p) in self.legs.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(Error::Layout(format!("leg {i} position not finite")));
            }
            for (j, q) in self.legs.iter().enumerate().skip(i + 1) {
                if p == q {
                    return Err(Error::Layout(format!("legs {i} and {j} coincide")));
                }
            }
        }
        if !(self.wheel_radius > T::zero()) || !(self.wheel_width > T::zero()) {
            return Err(Error::Layout("wheel radius and width must be positive".into()));
        }
        // legs must span the plane for the load balance to be solvable
        let p0 = self.legs[0];
        let spans = self.legs.iter().any(|p| {
            self.legs.iter().any(|q| {
                let cross = (p[0] - p0[0]) * (q[1] - p0[1]) - (p[1] - p0[1]) * (q[0] - p0[0]);
                cross.abs() > T::epsilon()
            })
        });
        if !spans {
            return Err(Error::Layout("legs are collinear".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyTwist<T> {
    pub v_x: T,
    pub v_y: T,
    pub omega_z: T,
}

impl<T: Scalar> BodyTwist<T> {
    pub fn new(v_x: T, v_y: T, omega_z: T) -> Self {
        Self { v_x, v_y, omega_z }
    }

    pub fn is_zero(&self) -> bool {
        self.v_x == T::zero() && self.v_y == T::zero() && self.omega_z == T::zero()
    }

    /// Instantaneous centre of rotation in the body frame; `None` for pure translation.
    pub fn icr(&self) -> Option<[T; 2]> {
        if self.omega_z == T::zero() {
            None
        } else {
            Some([-self.v_y / self.omega_z, self.v_x / self.omega_z])
        }
    }

    /// Ground velocity of a body point.
    pub fn point_velocity(&self, p: [T; 2]) -> [T; 2] {
        [self.v_x - self.omega_z * p[1], self.v_y + self.omega_z * p[0]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelSetpoint<T> {
    pub steer_angle: T,
    pub wheel_speed: T,
    /// Set for wheels sitting on the rotation centre, commanded to zero.
    pub saturated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocomotionMode<T> {
    Ackermann { speed: T, curvature: T },
    Crab { heading: T, speed: T },
    PointTurn { omega: T },
}

pub fn mode_command<T: Scalar>(mode: LocomotionMode<T>) -> BodyTwist<T> {
    match mode {
        LocomotionMode::Ackermann { speed, curvature } => BodyTwist::new(speed, T::zero(), speed * curvature),
        LocomotionMode::Crab { heading, speed } => BodyTwist::new(speed * heading.cos(), speed * heading.sin(), T::zero()),
        LocomotionMode::PointTurn { omega } => BodyTwist::new(T::zero(), T::zero(), omega),
    }
}

/// Folds a heading into `[-pi/2, pi/2]`, reversing the wheel speed when a half turn is
/// removed so the ground velocity is unchanged.
pub fn normalize_steer<T: Scalar>(raw_angle: T, raw_speed: T) -> (T, T) {
    let pi = T::PI();
    let half = T::FRAC_PI_2();
    let mut angle = raw_angle % T::TAU();
    if angle > pi {
        angle -= T::TAU();
    } else if angle < -pi {
        angle += T::TAU();
    }
    // whole turns removed so far leave the velocity unchanged
    let mut speed = raw_speed;
    if angle > half {
        angle -= pi;
        speed = -speed;
    } else if angle < -half {
        angle += pi;
        speed = -speed;
    }
    (angle, speed)
}

/// Per-wheel steering angle and wheel spin rate for a body twist.
pub fn allocate<T: Scalar>(layout: &RoverLayout<T>, twist: &BodyTwist<T>) -> Vec<WheelSetpoint<T>> {
    if twist.is_zero() {
        return vec![WheelSetpoint::default(); layout.legs.len()];
    }
    let scale = twist.v_x.abs().max(twist.v_y.abs());
    let span = layout
        .legs
        .iter()
        .fold(T::zero(), |m, p| m.max(p[0].abs()).max(p[1].abs()));
    let degenerate = T::lit(1e-12) * (scale + twist.omega_z.abs() * span);
    layout
        .legs
        .iter()
        .map(|&p| {
            let u = twist.point_velocity(p);
            let speed = u[0].hypot(u[1]);
            if speed <= degenerate {
                return WheelSetpoint {
                    steer_angle: T::zero(),
                    wheel_speed: T::zero(),
                    saturated: true,
                };
            }
            let (steer_angle, ground) = normalize_steer(u[1].atan2(u[0]), speed);
            WheelSetpoint {
                steer_angle,
                wheel_speed: ground / layout.wheel_radius,
                saturated: false,
            }
        })
        .collect()
}

/// Least-squares body twist implied by unsaturated setpoints, with the RMS velocity residual.
pub fn reconstruct_twist<T: Scalar>(layout: &RoverLayout<T>, setpoints: &[WheelSetpoint<T>]) -> Result<(BodyTwist<T>, T)> {
    if setpoints.len() != layout.legs.len() {
        return Err(Error::Layout(format!(
            "{} setpoints for {} legs",
            setpoints.len(),
            layout.legs.len()
        )));
    }
    // rows per wheel: u_x = v_x - w p_y ; u_y = v_y + w p_x
    let mut normal = [[T::zero(); 3]; 3];
    let mut rhs = [T::zero(); 3];
    let mut rows = Vec::new();
    for (p, s) in layout.legs.iter().zip(setpoints).filter(|(_, s)| !s.saturated) {
        let g = s.wheel_speed * layout.wheel_radius;
        let u = [g * s.steer_angle.cos(), g * s.steer_angle.sin()];
        rows.push(([T::one(), T::zero(), -p[1]], u[0]));
        rows.push(([T::zero(), T::one(), p[0]], u[1]));
    }
    for (a, b) in &rows {
        for i in 0..3 {
            for j in 0..3 {
                normal[i][j] += a[i] * a[j];
            }
            rhs[i] += a[i] * *b;
        }
    }
    let x = solve3(normal, rhs).ok_or_else(|| Error::Layout("setpoints do not determine a twist".into()))?;
    let sq = rows.iter().fold(T::zero(), |acc, (a, b)| {
        let r = a[0] * x[0] + a[1] * x[1] + a[2] * x[2] - *b;
        acc + r * r
    });
    let rms = (sq / T::lit(rows.len().max(1) as f64)).sqrt();
    Ok((BodyTwist::new(x[0], x[1], x[2]), rms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn layout() -> RoverLayout<f64> {
        RoverLayout::four_wheel(0.6, 0.5, 0.25, 0.25)
    }

    #[test]
    fn ackermann_example_front_left() {
        let l = layout();
        let twist = BodyTwist::new(0.1, 0.0, 0.1);
        let sp = allocate(&l, &twist);
        assert_abs_diff_eq!(sp[0].steer_angle, 0.876_06, epsilon = 1e-5);
        assert_abs_diff_eq!(sp[0].wheel_speed, 0.312_41, epsilon = 1e-5);
        let icr = twist.icr().unwrap();
        assert_abs_diff_eq!(icr[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(icr[1], 1.0, epsilon = 1e-12);
        // heading perpendicular to the leg->ICR radius, ground speed = omega * radius
        for (p, s) in l.legs.iter().zip(&sp) {
            let r = [icr[0] - p[0], icr[1] - p[1]];
            let h = [s.steer_angle.cos(), s.steer_angle.sin()];
            assert!((h[0] * r[0] + h[1] * r[1]).abs() < 1e-9);
            assert_abs_diff_eq!(s.wheel_speed.abs() * 0.25, 0.1 * r[0].hypot(r[1]), epsilon = 1e-9);
        }
    }

    #[test]
    fn crab_gives_identical_setpoints() {
        let sp = allocate(&layout(), &BodyTwist::new(0.05, 0.05, 0.0));
        for s in sp {
            assert_abs_diff_eq!(s.steer_angle, FRAC_PI_4, epsilon = 1e-12);
            assert_abs_diff_eq!(s.wheel_speed, 0.282_84, epsilon = 1e-5);
        }
    }

    #[test]
    fn point_turn_folds_heading() {
        let sp = allocate(&layout(), &BodyTwist::new(0.0, 0.0, 0.2));
        assert_abs_diff_eq!(sp[0].steer_angle, -0.876_06, epsilon = 1e-5);
        assert_abs_diff_eq!(sp[0].wheel_speed, -0.624_82, epsilon = 1e-5);
        // mirror legs receive equal steer magnitudes
        for s in &sp {
            assert_abs_diff_eq!(s.steer_angle.abs(), sp[0].steer_angle.abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn wheel_on_icr_is_flagged() {
        let l = layout();
        // rotate about the front-left leg
        let twist = BodyTwist::new(0.5 * 0.2, -0.6 * 0.2, 0.2);
        let sp = allocate(&l, &twist);
        assert!(sp[0].saturated);
        assert_eq!(sp[0].wheel_speed, 0.0);
        assert!(sp[1..].iter().all(|s| !s.saturated));
        assert!(allocate(&l, &BodyTwist::default()).iter().all(|s| s.wheel_speed == 0.0));
    }

    #[test]
    fn mode_commands() {
        assert_eq!(
            mode_command(LocomotionMode::Ackermann { speed: 0.1, curvature: 1.0 }),
            BodyTwist::new(0.1, 0.0, 0.1)
        );
        let crab = mode_command(LocomotionMode::Crab { heading: FRAC_PI_2, speed: 0.2 });
        assert_abs_diff_eq!(crab.v_x, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(crab.v_y, 0.2, epsilon = 1e-16);
        assert_eq!(mode_command(LocomotionMode::PointTurn { omega: 0.2 }), BodyTwist::new(0.0, 0.0, 0.2));
    }

    #[test]
    fn normalize_examples() {
        let (a, s) = normalize_steer(2.265_53, 0.6248);
        assert_abs_diff_eq!(a, 2.265_53 - PI, epsilon = 1e-12);
        assert_abs_diff_eq!(a, -0.876_06, epsilon = 1e-5);
        assert_eq!(s, -0.6248);
        // velocity vector preserved
        assert_abs_diff_eq!(s * a.cos(), 0.6248 * 2.265_53_f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(s * a.sin(), 0.6248 * 2.265_53_f64.sin(), epsilon = 1e-12);
        assert_eq!(normalize_steer(0.3, 1.0), (0.3, 1.0));
        assert_eq!(normalize_steer(-FRAC_PI_2, 1.0), (-FRAC_PI_2, 1.0));
        assert_eq!(normalize_steer(FRAC_PI_2, 1.0), (FRAC_PI_2, 1.0));
    }

    #[test]
    fn layout_validation() {
        let mut l = layout();
        assert!(l.validate().is_ok());
        l.legs.truncate(2);
        assert!(l.validate().is_err());
        let mut l = layout();
        l.legs[1] = l.legs[0];
        assert!(l.validate().is_err());
        let line = RoverLayout {
            legs: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            ..layout()
        };
        assert!(line.validate().is_err());
    }

    proptest! {
        #[test]
        fn normalize_preserves_velocity_and_is_idempotent(raw in -20.0_f64..20.0, speed in -3.0_f64..3.0) {
            let (a, s) = normalize_steer(raw, speed);
            prop_assert!(a.abs() <= FRAC_PI_2);
            prop_assert!((s * a.cos() - speed * raw.cos()).abs() < 1e-9);
            prop_assert!((s * a.sin() - speed * raw.sin()).abs() < 1e-9);
            prop_assert_eq!(normalize_steer(a, s), (a, s));
        }

        #[test]
        fn crab_invariance(vx in -1.0_f64..1.0, vy in -1.0_f64..1.0) {
            prop_assume!(vx.abs() + vy.abs() > 1e-3);
            let sp = allocate(&layout(), &BodyTwist::new(vx, vy, 0.0));
            for s in &sp {
                prop_assert!((s.steer_angle - sp[0].steer_angle).abs() < 1e-12);
                prop_assert!((s.wheel_speed.abs() - sp[0].wheel_speed.abs()).abs() < 1e-12);
            }
        }

        #[test]
        fn twist_reconstruction(vx in -1.0_f64..1.0, vy in -1.0_f64..1.0, w in -1.0_f64..1.0) {
            let l = layout();
            let twist = BodyTwist::new(vx, vy, w);
            prop_assume!(!twist.is_zero());
            let sp = allocate(&l, &twist);
            prop_assume!(sp.iter().filter(|s| !s.saturated).count() >= 3);
            let (back, residual) = reconstruct_twist(&l, &sp).unwrap();
            prop_assert!(residual < 1e-9);
            prop_assert!((back.v_x - vx).abs() < 1e-9 && (back.v_y - vy).abs() < 1e-9 && (back.omega_z - w).abs() < 1e-9);
        }
    }
}
