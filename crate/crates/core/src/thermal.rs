//! Single-node warm-box thermal model with MLI radiative exchange and a bang-bang heater.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

pub const STEFAN_BOLTZMANN: f64 = 5.670374419e-8;

/// Widening of the controller band before an excursion is flagged (K).
pub const BAND_MARGIN_K: f64 = 5.0;

/// Lunar synodic period (s).
pub const LUNATION_S: f64 = 2_551_443.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalNode<T> {
    /// J/K
    pub heat_capacity: T,
    /// Effective emissivity of the MLI blanket; conduction leaks can be folded in here.
    pub mli_effective_emissivity: T,
    /// m²
    pub radiating_area: T,
    /// W
    pub heater_max_power: T,
    /// W
    pub internal_dissipation: T,
}

impl<T: Scalar> ThermalNode<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("heat capacity", self.heat_capacity),
            ("radiating area", self.radiating_area),
            ("heater power", self.heater_max_power),
        ];
        for (what, v) in positive {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::domain(what, v.as_f64(), "> 0"));
            }
        }
        let e = self.mli_effective_emissivity;
        if !(e > T::zero() && e <= T::one()) {
            return Err(Error::domain("MLI effective emissivity", e.as_f64(), "in (0, 1]"));
        }
        if !(self.internal_dissipation >= T::zero()) {
            return Err(Error::domain("internal dissipation", self.internal_dissipation.as_f64(), ">= 0"));
        }
        Ok(())
    }
}

/// Sink temperature seen by the box over time.
pub trait SinkTemperature<T> {
    fn temperature(&self, time: T) -> T;
    /// Sink temperatures below this count as night for duty statistics.
    fn night_below(&self) -> T;
}

/// Sinusoidal lunar day/night sink, coldest at `time = 0` when `phase = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct EnvironmentProfile<T> {
    pub sink_min: T,
    pub sink_max: T,
    pub period: T,
    #[serde(default)]
    pub phase: T,
}

impl<T: Scalar> EnvironmentProfile<T> {
    pub fn lunar() -> Self {
        Self {
            sink_min: T::lit(93.15),
            sink_max: T::lit(393.15),
            period: T::lit(LUNATION_S),
            phase: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sink_min > T::zero() && self.sink_min < self.sink_max) {
            return Err(Error::domain("sink range", self.sink_min.as_f64(), "0 < sink_min < sink_max"));
        }
        if !(self.period > T::zero()) {
            return Err(Error::domain("sink period", self.period.as_f64(), "> 0"));
        }
        Ok(())
    }
}

impl<T: Scalar> SinkTemperature<T> for EnvironmentProfile<T> {
    fn temperature(&self, time: T) -> T {
        let mid = (self.sink_min + self.sink_max) / T::lit(2.0);
        let amp = (self.sink_max - self.sink_min) / T::lit(2.0);
        mid - amp * (T::TAU() * time / self.period + self.phase).cos()
    }

    fn night_below(&self) -> T {
        (self.sink_min + self.sink_max) / T::lit(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSink<T>(pub T);

impl<T: Scalar> SinkTemperature<T> for ConstantSink<T> {
    fn temperature(&self, _time: T) -> T {
        self.0
    }

    fn night_below(&self) -> T {
        self.0
    }
}

/// Piecewise-linear sink, repeated with the span of the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedSink<T> {
    pub times: Vec<T>,
    pub temperatures: Vec<T>,
}

impl<T: Scalar> TabulatedSink<T> {
    pub fn validate(&self) -> Result<()> {
        if self.times.len() < 2 || self.times.len() != self.temperatures.len() {
            return Err(Error::config("thermal.sink.tabulated", "need matching times and temperatures, at least 2"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("thermal.sink.tabulated.times", "must be strictly increasing"));
        }
        if let Some(t) = self.temperatures.iter().find(|t| !(**t > T::zero())) {
            return Err(Error::domain("tabulated sink temperature", t.as_f64(), "> 0 K"));
        }
        Ok(())
    }
}

impl<T: Scalar> SinkTemperature<T> for TabulatedSink<T> {
    fn temperature(&self, time: T) -> T {
        let t0 = self.times[0];
        let span = *self.times.last().unwrap() - t0;
        let mut t = (time - t0) % span;
        if t < T::zero() {
            t += span;
        }
        let t = t + t0;
        let i = self.times.partition_point(|&x| x <= t).clamp(1, self.times.len() - 1);
        let (a, b) = (self.times[i - 1], self.times[i]);
        let f = (t - a) / (b - a);
        self.temperatures[i - 1] + f * (self.temperatures[i] - self.temperatures[i - 1])
    }

    fn night_below(&self) -> T {
        let lo = self.temperatures.iter().copied().fold(T::infinity(), T::min);
        let hi = self.temperatures.iter().copied().fold(T::neg_infinity(), T::max);
        (lo + hi) / T::lit(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeaterController<T> {
    pub on_below: T,
    pub off_above: T,
}

impl<T: Scalar> HeaterController<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.on_below > T::zero() && self.on_below < self.off_above) {
            return Err(Error::domain("controller thresholds", self.on_below.as_f64(), "0 < on_below < off_above"));
        }
        Ok(())
    }
}

/// Net power radiated away by the box; negative when the sink is warmer.
pub fn radiative_power<T: Scalar>(node: &ThermalNode<T>, box_temp: T, env_temp: T) -> Result<T> {
    if !(box_temp > T::zero()) {
        return Err(Error::domain("box temperature", box_temp.as_f64(), "> 0 K"));
    }
    if !(env_temp > T::zero()) {
        return Err(Error::domain("sink temperature", env_temp.as_f64(), "> 0 K"));
    }
    let sigma = T::lit(STEFAN_BOLTZMANN);
    Ok(node.mli_effective_emissivity * sigma * node.radiating_area * (box_temp.powi(4) - env_temp.powi(4)))
}

/// Heater power needed to hold `hold_temp` against the sink.
pub fn steady_heater_power<T: Scalar>(node: &ThermalNode<T>, hold_temp: T, env_temp: T) -> Result<T> {
    let need = (radiative_power(node, hold_temp, env_temp)? - node.internal_dissipation).max(T::zero());
    if need > node.heater_max_power {
        return Err(Error::UndersizedHeater {
            required_w: need.as_f64(),
            available_w: node.heater_max_power.as_f64(),
        });
    }
    Ok(need)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalSample<T> {
    pub time: T,
    pub box_temp: T,
    pub env_temp: T,
    pub heater: T,
    pub duty_so_far: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandExit<T> {
    pub time: T,
    pub box_temp: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalRun<T> {
    pub trace: Vec<ThermalSample<T>>,
    pub duty_cycle: T,
    pub night_duty: Option<T>,
    pub day_duty: Option<T>,
    pub min_temp: T,
    pub max_temp: T,
    /// Extremes after the box first entered the controller band.
    pub regulated_range: Option<(T, T)>,
    /// First excursion outside the band widened by [`BAND_MARGIN_K`], once regulated.
    pub band_exit: Option<BandExit<T>>,
    pub heater_energy: T,
    pub dissipated_energy: T,
    pub radiated_energy: T,
    pub initial_temp: T,
    pub final_temp: T,
}

impl<T: Scalar> ThermalRun<T> {
    /// Heat stored minus net input; zero up to rounding for explicit Euler.
    pub fn balance_residual(&self, node: &ThermalNode<T>) -> T {
        node.heat_capacity * (self.final_temp - self.initial_temp)
            - (self.heater_energy + self.dissipated_energy - self.radiated_energy)
    }
}

/// Explicit Euler integration of `C dT/dt = heater + dissipation - radiated`.
///
/// The trace starts at `initial_temp` and has one sample per step end. A missing controller
/// keeps the heater off.
pub fn simulate_thermal<T: Scalar, S: SinkTemperature<T> + ?Sized>(
    node: &ThermalNode<T>,
    controller: Option<&HeaterController<T>>,
    sink: &S,
    duration: T,
    dt: T,
    initial_temp: T,
) -> Result<ThermalRun<T>> {
    node.validate()?;
    if let Some(c) = controller {
        c.validate()?;
    }
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(Error::domain("time step", dt.as_f64(), "> 0"));
    }
    if !(duration >= T::zero() && duration.is_finite()) {
        return Err(Error::domain("duration", duration.as_f64(), ">= 0"));
    }
    if !(initial_temp > T::zero()) {
        return Err(Error::domain("initial temperature", initial_temp.as_f64(), "> 0 K"));
    }
    let steps = (duration / dt).ceil().to_usize().unwrap_or(0);
    let margin = T::lit(BAND_MARGIN_K);
    let night_below = sink.night_below();

    let mut temp = initial_temp;
    let mut heater_on = controller.is_some_and(|c| temp < c.on_below);
    let mut regulated = controller.is_some_and(|c| temp >= c.on_below && temp <= c.off_above);
    let mut regulated_range = regulated.then_some((temp, temp));
    let mut band_exit = None;
    let (mut on_time, mut night_on, mut night_time, mut day_on, mut day_time) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    let (mut e_heat, mut e_diss, mut e_rad) = (T::zero(), T::zero(), T::zero());
    let (mut min_temp, mut max_temp) = (temp, temp);
    let mut trace = Vec::with_capacity(steps + 1);
    trace.push(ThermalSample {
        time: T::zero(),
        box_temp: temp,
        env_temp: sink.temperature(T::zero()),
        heater: if heater_on { node.heater_max_power } else { T::zero() },
        duty_so_far: T::zero(),
    });

    let mut time = T::zero();
    for k in 0..steps {
        let h = (duration - time).min(dt);
        let env = sink.temperature(time);
        if let Some(c) = controller {
            if temp < c.on_below {
                heater_on = true;
            } else if temp > c.off_above {
                heater_on = false;
            }
        }
        let heater = if heater_on { node.heater_max_power } else { T::zero() };
        let rad = radiative_power(node, temp, env).map_err(|e| Error::Step {
            step_index: k,
            source: Box::new(e),
        })?;
        let delta = h * (heater + node.internal_dissipation - rad) / node.heat_capacity;
        if !(delta.abs() < T::one()) {
            return Err(Error::StepTooLarge {
                dt: dt.as_f64(),
                delta: delta.as_f64(),
            });
        }
        e_heat += heater * h;
        e_diss += node.internal_dissipation * h;
        e_rad += rad * h;
        if heater_on {
            on_time += h;
        }
        if env < night_below {
            night_time += h;
            if heater_on {
                night_on += h;
            }
        } else {
            day_time += h;
            if heater_on {
                day_on += h;
            }
        }
        temp += delta;
        time += h;
        min_temp = min_temp.min(temp);
        max_temp = max_temp.max(temp);
        if let Some(c) = controller {
            if !regulated && temp >= c.on_below && temp <= c.off_above {
                regulated = true;
            }
            if regulated {
                let r = regulated_range.get_or_insert((temp, temp));
                r.0 = r.0.min(temp);
                r.1 = r.1.max(temp);
                if band_exit.is_none() && (temp < c.on_below - margin || temp > c.off_above + margin) {
                    band_exit = Some(BandExit { time, box_temp: temp });
                }
            }
        }
        trace.push(ThermalSample {
            time,
            box_temp: temp,
            env_temp: sink.temperature(time),
            heater,
            duty_so_far: on_time / time,
        });
    }

    let ratio = |on: T, total: T| (total > T::zero()).then(|| on / total);
    Ok(ThermalRun {
        trace,
        duty_cycle: ratio(on_time, time).unwrap_or(T::zero()),
        night_duty: ratio(night_on, night_time),
        day_duty: ratio(day_on, day_time),
        min_temp,
        max_temp,
        regulated_range,
        band_exit,
        heater_energy: e_heat,
        dissipated_energy: e_diss,
        radiated_energy: e_rad,
        initial_temp,
        final_temp: temp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn node() -> ThermalNode<f64> {
        ThermalNode {
            heat_capacity: 5000.0,
            mli_effective_emissivity: 0.03,
            radiating_area: 0.5,
            heater_max_power: 20.0,
            internal_dissipation: 0.0,
        }
    }

    /// Stefan-Boltzmann evaluated term by term in extended steps.
    fn oracle(eps: f64, area: f64, tb: f64, te: f64) -> f64 {
        let sigma = 5.670374419e-8;
        let q = |t: f64| sigma * t * t * t * t;
        eps * area * (q(tb) - q(te))
    }

    #[test]
    fn radiative_examples() {
        let n = node();
        assert_eq!(radiative_power(&n, 250.0, 250.0).unwrap(), 0.0);
        let p = radiative_power(&n, 293.0, 93.0).unwrap();
        assert_abs_diff_eq!(p, oracle(0.03, 0.5, 293.0, 93.0), epsilon = 1e-12);
        assert_abs_diff_eq!(p, 6.205, epsilon = 1e-3);
        let hot = radiative_power(&n, 293.0, 393.0).unwrap();
        assert_abs_diff_eq!(hot, oracle(0.03, 0.5, 293.0, 393.0), epsilon = 1e-12);
        assert_abs_diff_eq!(hot, -14.021, epsilon = 1e-3);
        assert!(radiative_power(&n, 0.0, 93.0).is_err());
        assert!(radiative_power(&n, 293.0, -1.0).is_err());
    }

    #[test]
    fn steady_power_examples() {
        let n = node();
        assert_abs_diff_eq!(steady_heater_power(&n, 293.0, 93.0).unwrap(), 6.205, epsilon = 1e-3);
        let warm = ThermalNode { internal_dissipation: 10.0, ..n };
        assert_eq!(steady_heater_power(&warm, 293.0, 93.0).unwrap(), 0.0);
        let small = ThermalNode { heater_max_power: 5.0, ..n };
        match steady_heater_power(&small, 293.0, 93.0) {
            Err(Error::UndersizedHeater { required_w, available_w }) => {
                assert_abs_diff_eq!(required_w, 6.205, epsilon = 1e-3);
                assert_eq!(available_w, 5.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equilibrium_is_flat() {
        let run = simulate_thermal(&node(), None, &ConstantSink(250.0), 3600.0, 10.0, 250.0).unwrap();
        assert!(run.trace.iter().all(|s| s.box_temp == 250.0 && s.heater == 0.0));
        assert_eq!(run.duty_cycle, 0.0);
    }

    #[test]
    fn duty_matches_steady_power_ratio() {
        let c = HeaterController { on_below: 288.0, off_above: 298.0 };
        let run = simulate_thermal(&node(), Some(&c), &ConstantSink(93.0), 200_000.0, 1.0, 293.0).unwrap();
        let (lo, hi) = run.regulated_range.unwrap();
        assert!(lo >= 287.0 && hi <= 299.0, "{lo} {hi}");
        assert!(run.band_exit.is_none());
        let expected = steady_heater_power(&node(), 293.0, 93.0).unwrap() / 20.0;
        assert_abs_diff_eq!(run.duty_cycle, expected, epsilon = 0.05);
        assert!(run.trace.iter().all(|s| s.heater == 0.0 || s.heater == 20.0));
    }

    #[test]
    fn energy_balance_closes() {
        let c = HeaterController { on_below: 288.0, off_above: 298.0 };
        let run = simulate_thermal(&node(), Some(&c), &EnvironmentProfile::lunar(), 100_000.0, 5.0, 270.0).unwrap();
        let stored = 5000.0 * (run.final_temp - run.initial_temp);
        // independent left-rectangle sum over the emitted trace
        let mut net = 0.0;
        for w in run.trace.windows(2) {
            let h = w[1].time - w[0].time;
            net += h * (w[1].heater - oracle(0.03, 0.5, w[0].box_temp, w[0].env_temp));
        }
        assert!((stored - net).abs() <= 0.01 * stored.abs().max(net.abs()));
        assert!(run.balance_residual(&node()).abs() < 1e-6 * run.heater_energy.max(1.0));
    }

    #[test]
    fn step_size_convergence() {
        let a = simulate_thermal(&node(), None, &ConstantSink(93.0), 50_000.0, 60.0, 293.0).unwrap();
        let b = simulate_thermal(&node(), None, &ConstantSink(93.0), 50_000.0, 30.0, 293.0).unwrap();
        assert!((a.final_temp - b.final_temp).abs() < 0.1);
    }

    #[test]
    fn oversized_step_rejected() {
        let small_c = ThermalNode { heat_capacity: 10.0, ..node() };
        assert!(matches!(
            simulate_thermal(&small_c, None, &ConstantSink(93.0), 100.0, 10.0, 293.0),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(simulate_thermal(&node(), None, &ConstantSink(93.0), 100.0, 0.0, 293.0).is_err());
    }

    #[test]
    fn lunar_profile_endpoints() {
        let env = EnvironmentProfile::<f64>::lunar();
        assert_abs_diff_eq!(env.temperature(0.0), 93.15, epsilon = 1e-9);
        assert_abs_diff_eq!(env.temperature(LUNATION_S / 2.0), 393.15, epsilon = 1e-9);
        assert_abs_diff_eq!(env.temperature(LUNATION_S), 93.15, epsilon = 1e-9);
    }

    #[test]
    fn tabulated_interpolates_and_repeats() {
        let tab = TabulatedSink {
            times: vec![0.0, 10.0, 20.0],
            temperatures: vec![100.0, 300.0, 100.0],
        };
        tab.validate().unwrap();
        assert_abs_diff_eq!(tab.temperature(5.0), 200.0);
        assert_abs_diff_eq!(tab.temperature(25.0), 200.0);
        assert_abs_diff_eq!(tab.temperature(-5.0), 200.0);
        assert_eq!(tab.night_below(), 200.0);
    }

    #[test]
    fn f32_node() {
        let n = ThermalNode::<f32> {
            heat_capacity: 5000.0,
            mli_effective_emissivity: 0.03,
            radiating_area: 0.5,
            heater_max_power: 20.0,
            internal_dissipation: 0.0,
        };
        assert!((radiative_power(&n, 293.0, 93.0).unwrap() - 6.205).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn radiative_monotone(tb in 50.0_f64..500.0, te in 50.0_f64..500.0, d in 0.01_f64..10.0) {
            let n = node();
            let p = radiative_power(&n, tb, te).unwrap();
            prop_assert!(radiative_power(&n, tb + d, te).unwrap() > p);
            prop_assert!(radiative_power(&n, tb, te + d).unwrap() < p);
        }

        #[test]
        fn heater_is_bang_bang(on in 250.0_f64..300.0, width in 1.0_f64..20.0, t0 in 200.0_f64..350.0) {
            let c = HeaterController { on_below: on, off_above: on + width };
            let run = simulate_thermal(&node(), Some(&c), &ConstantSink(93.0), 20_000.0, 20.0, t0).unwrap();
            prop_assert!(run.trace.iter().all(|s| s.heater == 0.0 || s.heater == 20.0));
            prop_assert!(run.balance_residual(&node()).abs() < 1e-6 * (run.heater_energy + run.radiated_energy.abs()).max(1.0));
        }
    }
}
