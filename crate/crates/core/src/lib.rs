//! Deterministic discrete-event simulator of inter-slice switching in a 5G
//! service-based core.
//!
//! The crate is organised bottom-up:
//!
//! * [`slice`]: S-NSSAI, NSSAI sets and PDU sessions,
//! * [`nf`]: network functions and the message dispatch,
//! * [`procedures`]: UE Configuration Update, Registration, PDU Session
//!   Release and Establishment as message choreographies,
//! * [`switching`]: the eleven switching cases,
//! * [`trigger`]: handover causes and their initiation points,
//! * [`sim`]: event queue, trace, metrics and the simulator,
//! * [`scenario`] and [`golden`]: file formats.

pub mod golden;
pub mod ids;
pub mod nf;
pub mod procedures;
pub mod scenario;
pub mod sim;
pub mod slice;
pub mod switching;
pub mod trigger;

pub use scenario::{Scenario, ScenarioError, Violation};
pub use sim::{run_scenario, RunArtifacts, RunError, SimConfig, SimError, Simulator};
