//! Discrete-event core: event queue, bus, trace, metrics and the simulator loop.

pub mod bus;
pub mod engine;
pub mod invariants;
pub mod message;
pub mod metrics;
pub mod queue;
pub mod trace;

use thiserror::Error;

pub use engine::{SelectionPolicyKind, SimConfig, SimError, Simulator};
pub use message::{MessageName, Payload, SignalingMessage};
pub use metrics::{MetricsReport, MetricsRow};
pub use queue::{EventPayload, EventQueue, SchedulingError, SimEvent};
pub use trace::{EventKind, TraceRecord};

use crate::scenario::{Scenario, ScenarioError};
use crate::switching::SwitchOutcome;

/// Everything one scenario run produces.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub trace: Vec<TraceRecord>,
    pub report: MetricsReport,
    pub outcomes: Vec<SwitchOutcome>,
    pub events: u64,
}

impl RunArtifacts {
    pub fn trace_text(&self) -> String {
        trace::render(&self.trace)
    }

    pub fn metrics_csv(&self) -> String {
        self.report.to_csv()
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Loads, runs to completion and reports. `force_checks` turns invariant
/// checking on regardless of the scenario's own option.
pub fn run_scenario(scenario: &Scenario, seed: u64, force_checks: bool) -> Result<RunArtifacts, RunError> {
    let mut sim = scenario.build(seed)?;
    if force_checks {
        sim.enable_invariant_checks();
    }
    sim.run_until_idle()?;
    let name = scenario.display_name();
    Ok(RunArtifacts {
        trace: sim.trace().to_vec(),
        report: sim.report(&name, seed),
        outcomes: sim.outcomes().cloned().collect(),
        events: sim.events_processed(),
    })
}
