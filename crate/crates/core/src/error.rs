use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {what} = {value} ({constraint})")]
    Domain {
        what: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("{what} = {value} outside [{min}, {max}] (violates {bound} bound)")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
        bound: &'static str,
    },

    #[error("height change {target} m unreachable; achievable interval is [{min}, {max}] m")]
    UnreachableHeight { target: f64, min: f64, max: f64 },

    #[error("no suspension equilibrium in [{min}, {max}] rad")]
    NoEquilibrium { min: f64, max: f64 },

    #[error("efficiency targets infeasible: {reason}")]
    InfeasibleTarget { reason: String },

    #[error("articulation supplies {got} bend angles, chain has {expected} cardan joints")]
    ArticulationLength { expected: usize, got: usize },

    #[error("stage efficiency {value} is not positive")]
    StageEfficiency { value: f64 },

    #[error("tip-over: wheel {wheel} normal load {load} N is negative")]
    TipOver { wheel: usize, load: f64 },

    #[error("rover layout invalid: {0}")]
    Layout(String),

    #[error("heater undersized: {required_w} W required, {available_w} W available")]
    UndersizedHeater { required_w: f64, available_w: f64 },

    #[error("time step {dt} s too large: temperature changed {delta} K in one step (limit 1 K)")]
    StepTooLarge { dt: f64, delta: f64 },

    #[error("simulation aborted at step {step_index}: {source}")]
    Step {
        step_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("route point ({x}, {y}) lies outside the terrain")]
    OffTerrain { x: f64, y: f64 },

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("requirement gate(s) failed: {}", .0.join("; "))]
    Requirements(Vec<String>),

    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("unknown parameter path `{path}`: no field `{segment}`; valid here: {}", .valid.join(", "))]
    BadPath {
        path: String,
        segment: String,
        valid: Vec<String>,
    },

    #[error("unknown preset `{0}` (expected flight, breadboard_1_3 or paper_nominal)")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: impl Into<f64>, constraint: &'static str) -> Self {
        Error::Domain {
            what,
            value: value.into(),
            constraint,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::OutOfRange { .. } => "out_of_range",
            Error::UnreachableHeight { .. } => "unreachable_height",
            Error::NoEquilibrium { .. } => "no_equilibrium",
            Error::InfeasibleTarget { .. } => "infeasible_target",
            Error::ArticulationLength { .. } => "articulation_length",
            Error::StageEfficiency { .. } => "stage_efficiency",
            Error::TipOver { .. } => "tip_over",
            Error::Layout(_) => "layout",
            Error::UndersizedHeater { .. } => "undersized_heater",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::Step { .. } => "step_abort",
            Error::OffTerrain { .. } => "off_terrain",
            Error::Config { .. } => "config",
            Error::Requirements(_) => "requirement",
            Error::Parse(_) => "parse",
            Error::BadPath { .. } => "bad_path",
            Error::UnknownPreset(_) => "unknown_preset",
            Error::Io(_) => "io",
        }
    }

    /// True for errors caused by the input configuration rather than by a simulation run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::Requirements(_)
                | Error::Parse(_)
                | Error::BadPath { .. }
                | Error::UnknownPreset(_)
                | Error::Layout(_)
                | Error::InfeasibleTarget { .. }
        )
    }
}
