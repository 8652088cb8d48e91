use crate::error::{Error, Result};

use super::config::{PathConfig, ScenarioConfig, SurfaceConfig};

fn scale2(v: [f64; 2], f: f64) -> [f64; 2] {
    [v[0] * f, v[1] * f]
}

fn scale3(v: [f64; 3], f: f64) -> [f64; 3] {
    [v[0] * f, v[1] * f, v[2] * f]
}

/// Geometric similitude transform.
///
/// Lengths scale by `factor`, areas and heat flows by `factor^2`, masses, heat capacity and
/// forces by `factor^3`, torsional spring rate by `factor^4`. Angles, efficiencies,
/// friction and wear coefficients, temperatures, times and the envelopes are unchanged.
/// Route speed scales with length so the traverse takes the same time.
pub fn scale_config(config: &ScenarioConfig, factor: f64) -> Result<ScenarioConfig> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::domain("scale factor", factor, "> 0"));
    }
    let f = factor;
    let (f2, f3, f4) = (f * f, f * f * f, f * f * f * f);
    let mut c = config.clone();

    let r = &mut c.rover;
    r.layout.legs.iter_mut().for_each(|p| *p = scale2(*p, f));
    r.layout.wheel_radius *= f;
    r.layout.wheel_width *= f;
    r.layout.cog = scale3(r.layout.cog, f);
    r.mass_kg *= f3;

    let g = &mut r.suspension.geometry;
    g.arm_length *= f;
    g.pivot_vertical_separation *= f;
    g.chassis_anchor = scale3(g.chassis_anchor, f);
    g.upright_offset = scale3(g.upright_offset, f);
    g.spring_rate *= f4;

    let s = &mut r.steering;
    s.capstan.input_drum_radius *= f;
    s.capstan.output_drum_radius *= f;
    s.capstan.pretension *= f3;
    s.contact_offset_m *= f;

    let t = &mut c.terrain;
    t.grid_spacing_m *= f;
    t.margin_m *= f;
    match &mut t.surface {
        SurfaceConfig::Rolling {
            min_wavelength_m,
            max_wavelength_m,
            ..
        } => {
            *min_wavelength_m *= f;
            *max_wavelength_m *= f;
        }
        SurfaceConfig::Grid { origin, heights } => {
            *origin = scale2(*origin, f);
            heights.iter_mut().flatten().for_each(|h| *h *= f);
        }
        SurfaceConfig::Flat | SurfaceConfig::Incline { .. } => {}
    }

    match &mut c.route.path {
        PathConfig::Straight { length_m, .. } => *length_m *= f,
        PathConfig::Polyline { points } => points.iter_mut().for_each(|p| *p = scale2(*p, f)),
    }
    c.route.speed_mps *= f;

    let n = &mut c.thermal.node;
    n.heat_capacity *= f3;
    n.radiating_area *= f2;
    n.heater_max_power *= f2;
    n.internal_dissipation *= f2;

    c.integration.step_m *= f;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets::preset;
    use approx::assert_relative_eq;

    #[test]
    fn identity_and_examples() {
        let flight = preset("flight").unwrap();
        assert_eq!(scale_config(&flight, 1.0).unwrap(), flight);
        let bb = scale_config(&flight, 1.0 / 3.0).unwrap();
        assert_relative_eq!(bb.rover.layout.wheel_radius, 0.35 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(bb.thermal.node.radiating_area, 0.5 / 9.0, max_relative = 1e-12);
        assert_relative_eq!(bb.rover.mass_kg, flight.rover.mass_kg / 27.0, max_relative = 1e-12);
        assert_relative_eq!(
            bb.rover.suspension.geometry.spring_rate,
            flight.rover.suspension.geometry.spring_rate / 81.0,
            max_relative = 1e-12
        );
        assert_eq!(bb.envelopes, flight.envelopes);
        assert!(scale_config(&flight, 0.0).is_err());
    }

    #[test]
    fn round_trip_factor() {
        let flight = preset("flight").unwrap();
        let back = scale_config(&scale_config(&flight, 0.25).unwrap(), 4.0).unwrap();
        assert_relative_eq!(back.rover.mass_kg, flight.rover.mass_kg, max_relative = 1e-12);
        assert_relative_eq!(back.rover.layout.wheel_radius, flight.rover.layout.wheel_radius, max_relative = 1e-12);
    }
}
