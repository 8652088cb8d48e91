//! Parallelogram double-wishbone suspension.
//!
//! Both arms have the same length and their inboard pivots are stacked vertically at the
//! chassis anchor, so the upright translates without rotating. The suspension angle
//! `alpha` is the arm elevation above horizontal. A torsional-equivalent spring acts about
//! the lower pivot; the linear actuator shifts the spring's free angle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::bracketed_root;
use crate::Scalar;

pub type Vec3<T> = [T; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleRange<T> {
    pub min: T,
    pub max: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WishboneGeometry<T> {
    pub arm_length: T,
    pub pivot_vertical_separation: T,
    /// Lower inboard pivot in the chassis frame (m).
    pub chassis_anchor: Vec3<T>,
    pub neutral_angle: T,
    pub angle_range: AngleRange<T>,
    /// Torsional-equivalent spring rate about the lower pivot (N·m/rad).
    pub spring_rate: T,
    pub spring_free_angle: T,
    /// Free-angle shift per actuator command unit (rad).
    pub actuator_gain: T,
    /// Wheel connection point relative to the lower outboard pivot, chassis-parallel (m).
    pub upright_offset: Vec3<T>,
}

/// The four pivot points of the linkage at one suspension angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linkage<T> {
    pub lower_inboard: Vec3<T>,
    pub upper_inboard: Vec3<T>,
    pub lower_outboard: Vec3<T>,
    pub upper_outboard: Vec3<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HubState<T> {
    pub position: Vec3<T>,
    /// Tilt of the upright away from the chassis vertical (rad).
    pub orientation_error: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium<T> {
    pub alpha: T,
    /// Set when the balance lies beyond a range stop and the arm rests on it.
    pub clamped: bool,
}

fn add<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm<T: Scalar>(a: Vec3<T>) -> T {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

impl<T: Scalar> WishboneGeometry<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.arm_length > T::zero()) {
            return Err(Error::domain("arm length", self.arm_length.as_f64(), "> 0"));
        }
        if !(self.pivot_vertical_separation > T::zero()) {
            return Err(Error::domain(
                "pivot vertical separation",
                self.pivot_vertical_separation.as_f64(),
                "> 0",
            ));
        }
        let r = self.angle_range;
        if !(r.min < r.max) || r.min <= -T::FRAC_PI_2() || r.max >= T::FRAC_PI_2() {
            return Err(Error::domain(
                "suspension angle range",
                r.min.as_f64(),
                "min < max inside (-pi/2, pi/2)",
            ));
        }
        if !(self.spring_rate >= T::zero()) {
            return Err(Error::domain("spring rate", self.spring_rate.as_f64(), ">= 0"));
        }
        Ok(())
    }

    fn check_alpha(&self, alpha: T) -> Result<()> {
        let r = self.angle_range;
        if alpha < r.min || alpha > r.max || !alpha.is_finite() {
            return Err(Error::OutOfRange {
                what: "suspension angle",
                value: alpha.as_f64(),
                min: r.min.as_f64(),
                max: r.max.as_f64(),
                bound: if alpha > r.max { "upper" } else { "lower" },
            });
        }
        Ok(())
    }

    pub fn linkage(&self, alpha: T) -> Result<Linkage<T>> {
        self.check_alpha(alpha)?;
        let arm = [self.arm_length * alpha.cos(), T::zero(), self.arm_length * alpha.sin()];
        let lower_inboard = self.chassis_anchor;
        let upper_inboard = add(lower_inboard, [T::zero(), T::zero(), self.pivot_vertical_separation]);
        Ok(Linkage {
            lower_inboard,
            upper_inboard,
            lower_outboard: add(lower_inboard, arm),
            upper_outboard: add(upper_inboard, arm),
        })
    }

    fn hub_z(&self, alpha: T) -> T {
        self.arm_length * alpha.sin()
    }

    /// Achievable vertical travel relative to the neutral pose (m).
    pub fn height_interval(&self) -> (T, T) {
        let z0 = self.hub_z(self.neutral_angle);
        (
            self.hub_z(self.angle_range.min) - z0,
            self.hub_z(self.angle_range.max) - z0,
        )
    }

    /// Largest anchor-to-wheel-connection distance over the angle range.
    pub fn max_reach(&self) -> T {
        // reach^2 = L^2 + |o|^2 + 2L(o_x cos a + o_z sin a), maximal at a = atan2(o_z, o_x)
        let o = self.upright_offset;
        let peak = o[2].atan2(o[0]);
        let r = self.angle_range;
        let at = |a: T| {
            let arm = [self.arm_length * a.cos(), T::zero(), self.arm_length * a.sin()];
            norm(add(arm, o))
        };
        let mut best = at(r.min).max(at(r.max));
        if peak > r.min && peak < r.max {
            best = best.max(at(peak));
        }
        best
    }
}

pub fn hub_pose<T: Scalar>(geom: &WishboneGeometry<T>, alpha: T) -> Result<HubState<T>> {
    let link = geom.linkage(alpha)?;
    let upright = sub(link.upper_outboard, link.lower_outboard);
    // angle between the upright and the chassis z axis
    let horizontal = (upright[0] * upright[0] + upright[1] * upright[1]).sqrt();
    let orientation_error = horizontal.atan2(upright[2]);
    Ok(HubState {
        position: add(link.lower_outboard, geom.upright_offset),
        orientation_error,
    })
}

/// Suspension angle that moves the hub `delta_z` above its neutral height.
pub fn alpha_for_height<T: Scalar>(geom: &WishboneGeometry<T>, delta_z: T) -> Result<T> {
    let (lo, hi) = geom.height_interval();
    // rounding slack so heights computed from the range ends stay reachable
    let slack = T::epsilon() * T::lit(16.0) * geom.arm_length;
    if !(delta_z >= lo - slack && delta_z <= hi + slack) {
        return Err(Error::UnreachableHeight {
            target: delta_z.as_f64(),
            min: lo.as_f64(),
            max: hi.as_f64(),
        });
    }
    let target = geom.hub_z(geom.neutral_angle) + delta_z.max(lo).min(hi);
    let l = geom.arm_length;
    let r = geom.angle_range;
    Ok(bracketed_root(r.min, r.max, T::lit(1e-15), |a| {
        (l * a.sin() - target, l * a.cos())
    }))
}

/// Moment balance about the lower pivot:
/// `k (alpha - free - gain * command) = load * L * cos(alpha)`.
pub fn equilibrium_alpha<T: Scalar>(geom: &WishboneGeometry<T>, wheel_load: T, actuator_command: T) -> Result<Equilibrium<T>> {
    if !(wheel_load >= T::zero()) {
        return Err(Error::domain("wheel load", wheel_load.as_f64(), ">= 0"));
    }
    let k = geom.spring_rate;
    let rest = geom.spring_free_angle + geom.actuator_gain * actuator_command;
    let moment = wheel_load * geom.arm_length;
    let residual = |a: T| (k * (a - rest) - moment * a.cos(), k + moment * a.sin());
    let r = geom.angle_range;
    let (f_lo, _) = residual(r.min);
    let (f_hi, _) = residual(r.max);
    if !(f_lo.is_finite() && f_hi.is_finite()) {
        return Err(Error::NoEquilibrium {
            min: r.min.as_f64(),
            max: r.max.as_f64(),
        });
    }
    if f_lo <= T::zero() && f_hi >= T::zero() {
        let alpha = bracketed_root(r.min, r.max, T::lit(1e-15), residual);
        return Ok(Equilibrium { alpha, clamped: false });
    }
    if f_lo > T::zero() && f_hi > T::zero() {
        return Ok(Equilibrium {
            alpha: r.min,
            clamped: true,
        });
    }
    if f_lo < T::zero() && f_hi < T::zero() {
        return Ok(Equilibrium {
            alpha: r.max,
            clamped: true,
        });
    }
    Err(Error::NoEquilibrium {
        min: r.min.as_f64(),
        max: r.max.as_f64(),
    })
}

/// Actuator command that places the static equilibrium exactly at `alpha`.
pub fn command_for_alpha<T: Scalar>(geom: &WishboneGeometry<T>, wheel_load: T, alpha: T) -> Result<T> {
    geom.check_alpha(alpha)?;
    if geom.actuator_gain == T::zero() || geom.spring_rate == T::zero() {
        return Err(Error::domain(
            "actuator gain x spring rate",
            (geom.actuator_gain * geom.spring_rate).as_f64(),
            "non-zero for active levelling",
        ));
    }
    let free = alpha - wheel_load * geom.arm_length * alpha.cos() / geom.spring_rate;
    Ok((free - geom.spring_free_angle) / geom.actuator_gain)
}

/// Distance from the chassis anchor to the wheel connection point.
pub fn reach<T: Scalar>(geom: &WishboneGeometry<T>, alpha: T) -> Result<T> {
    let hub = hub_pose(geom, alpha)?;
    Ok(norm(sub(hub.position, geom.chassis_anchor)))
}
