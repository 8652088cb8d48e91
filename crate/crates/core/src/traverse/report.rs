use serde::{Deserialize, Serialize};

use super::WearState;

/// Published design envelopes the simulator is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaperEnvelopes {
    pub wheel_torque_nm: [f64; 2],
    pub steering_torque_nm: [f64; 2],
    pub chain_efficiency: [f64; 2],
    pub steering_efficiency: f64,
    /// Reported only; never enters the physics.
    pub architecture_mass_kg: f64,
    pub max_reach_m: f64,
    pub traverse_requirement_km: f64,
    pub efficiency_retention: f64,
}

impl PaperEnvelopes {
    pub const PUBLISHED: PaperEnvelopes = PaperEnvelopes {
        wheel_torque_nm: [30.01, 86.11],
        steering_torque_nm: [26.01, 32.09],
        chain_efficiency: [0.43, 0.99],
        steering_efficiency: 0.91,
        architecture_mass_kg: 10.25,
        max_reach_m: 0.738,
        traverse_requirement_km: 50.0,
        efficiency_retention: 0.95,
    };
}

impl Default for PaperEnvelopes {
    fn default() -> Self {
        Self::PUBLISHED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub min: f64,
    pub max: f64,
}

impl Extrema {
    pub fn of(v: f64) -> Self {
        Self { min: v, max: v }
    }

    pub fn include(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    pub fn merge(a: Option<Extrema>, v: f64) -> Option<Extrema> {
        let mut e = a.unwrap_or(Extrema::of(v));
        e.include(v);
        Some(e)
    }

    pub fn within(&self, range: [f64; 2]) -> bool {
        self.min >= range[0] && self.max <= range[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraverseReport {
    pub distance_km: f64,
    pub steps: usize,
    pub drive_torque_nm: Option<Extrema>,
    pub per_wheel_drive_torque_nm: Vec<Option<Extrema>>,
    pub steering_torque_nm: Option<Extrema>,
    pub chain_efficiency: Option<Extrema>,
    pub initial_chain_efficiency: Option<f64>,
    pub final_chain_efficiency: Option<f64>,
    /// Motor-side energy drawn over the run (J).
    pub energy_j: f64,
    /// Mechanical energy delivered at the wheels (J).
    pub wheel_energy_j: f64,
    /// Final over initial chain efficiency including wear derating.
    pub efficiency_ratio: f64,
    pub min_slip_margin: Option<f64>,
    pub wear: WearState<f64>,
    pub notes: Vec<String>,
}

impl TraverseReport {
    pub fn empty(cardan_joints: usize, wheels: usize) -> Self {
        Self {
            distance_km: 0.0,
            steps: 0,
            drive_torque_nm: None,
            per_wheel_drive_torque_nm: vec![None; wheels],
            steering_torque_nm: None,
            chain_efficiency: None,
            initial_chain_efficiency: None,
            final_chain_efficiency: None,
            energy_j: 0.0,
            wheel_energy_j: 0.0,
            efficiency_ratio: 1.0,
            min_slip_margin: None,
            wear: WearState::fresh(cardan_joints),
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

// slack for values that sit exactly on an envelope edge after rounding
const EDGE: f64 = 1e-9;

fn range_verdict(name: &str, e: Option<Extrema>, range: [f64; 2], unit: &str) -> Verdict {
    match e {
        None => Verdict::new(name, true, "no samples (vacuous)".into()),
        Some(e) => Verdict::new(
            name,
            e.min >= range[0] - EDGE && e.max <= range[1] + EDGE,
            format!("[{:.4}, {:.4}]{unit} vs [{}, {}]", e.min, e.max, range[0], range[1]),
        ),
    }
}

/// Envelope verdicts computed from report extrema alone.
pub fn traverse_verdicts(report: &TraverseReport, envelopes: &PaperEnvelopes) -> Vec<Verdict> {
    vec![
        range_verdict("wheel_torque", report.drive_torque_nm, envelopes.wheel_torque_nm, " N·m"),
        range_verdict("steering_torque", report.steering_torque_nm, envelopes.steering_torque_nm, " N·m"),
        range_verdict("chain_efficiency", report.chain_efficiency, envelopes.chain_efficiency, ""),
        Verdict::new(
            "efficiency_retention",
            report.efficiency_ratio >= envelopes.efficiency_retention,
            format!(
                "final/initial chain efficiency {:.6} vs >= {} over {:.3} km",
                report.efficiency_ratio, envelopes.efficiency_retention, report.distance_km
            ),
        ),
    ]
}
