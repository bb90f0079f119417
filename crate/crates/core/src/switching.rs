//! The eleven inter-slice switching cases: classification and the per-case
//! sequencing of procedures.
//!
//! [`CaseExecution`] is a small state machine. The simulator feeds it events
//! (old session released, run finished, timer fired) and carries out the
//! [`Action`]s it returns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use crate::ids::{SessionId, SwitchId, Tick, UeId};
use crate::procedures::{FailureReason, Initiator, Procedure, ProcedureRun, RunOutcome};
use crate::sim::message::MessageName;
use crate::slice::{SNssai, SessionState, SessionType};
use crate::trigger::Mechanism;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseId {
    C1a,
    C1b,
    C1c,
    C1d,
    C1e,
    C1f,
    C2a,
    C2b,
    C2c,
    C2bT,
    C2cT,
}

impl CaseId {
    pub const ALL: [CaseId; 11] = [
        Self::C1a,
        Self::C1b,
        Self::C1c,
        Self::C1d,
        Self::C1e,
        Self::C1f,
        Self::C2a,
        Self::C2b,
        Self::C2c,
        Self::C2bT,
        Self::C2cT,
    ];

    /// Short form used in traces, metrics and fixture file names.
    pub fn as_str(self) -> &'static str {
        match self {
            Self::C1a => "1a",
            Self::C1b => "1b",
            Self::C1c => "1c",
            Self::C1d => "1d",
            Self::C1e => "1e",
            Self::C1f => "1f",
            Self::C2a => "2a",
            Self::C2b => "2b",
            Self::C2c => "2c",
            Self::C2bT => "2bT",
            Self::C2cT => "2cT",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.strip_prefix('C').unwrap_or(s);
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown case {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseInitiator {
    Network,
    Ue,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Deserialize)]
pub enum ReleaseTiming {
    /// The UE releases the old session before anything else.
    #[default]
    Immediate,
    /// The network releases it from inside Registration or Establishment.
    Deferred,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SwitchingCase {
    pub id: CaseId,
    pub initiator: CaseInitiator,
    pub trigger_mech: Mechanism,
    pub target_in_allowed: bool,
    pub needs_registration: bool,
    pub needs_relocation: bool,
    pub tentative: bool,
    pub release_timing: ReleaseTiming,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SwitchingError {
    #[error("invalid case combination: {0}")]
    InvalidCombination(&'static str),
    #[error("interruption is only defined for switched outcomes")]
    MetricUndefined,
}

/// Maps a switching situation onto its case.
pub fn classify_case(
    initiator: CaseInitiator,
    trigger_mech: Mechanism,
    target_in_allowed: bool,
    relocation_needed: bool,
    tentative: bool,
) -> Result<SwitchingCase, SwitchingError> {
    use CaseId::*;
    if tentative && initiator != CaseInitiator::Ue {
        return Err(SwitchingError::InvalidCombination("tentative switching is UE-initiated"));
    }
    if tentative && target_in_allowed {
        return Err(SwitchingError::InvalidCombination(
            "tentative switching needs a target outside the Allowed NSSAI",
        ));
    }
    let id = match (initiator, trigger_mech) {
        (CaseInitiator::Network, Mechanism::UcuCommand) => pick(target_in_allowed, relocation_needed, [C1a, C1b, C1c]),
        (CaseInitiator::Network, Mechanism::NetworkRelease) => {
            pick(target_in_allowed, relocation_needed, [C1d, C1e, C1f])
        }
        (CaseInitiator::Ue, Mechanism::UeDecision) if tentative => {
            if relocation_needed {
                C2cT
            } else {
                C2bT
            }
        }
        (CaseInitiator::Ue, Mechanism::UeDecision) => pick(target_in_allowed, relocation_needed, [C2a, C2b, C2c]),
        (CaseInitiator::Network, Mechanism::UeDecision) => {
            return Err(SwitchingError::InvalidCombination("network initiator with a UE decision"))
        }
        (CaseInitiator::Ue, _) => return Err(SwitchingError::InvalidCombination("UE initiator with a network mechanism")),
    };
    let needs_registration = !target_in_allowed;
    Ok(SwitchingCase {
        id,
        initiator,
        trigger_mech,
        target_in_allowed,
        needs_registration,
        needs_relocation: needs_registration && relocation_needed,
        tentative,
        release_timing: match (initiator, tentative) {
            (CaseInitiator::Ue, false) => ReleaseTiming::Immediate,
            _ => ReleaseTiming::NotApplicable,
        },
    })
}

fn pick(in_allowed: bool, relocation: bool, ids: [CaseId; 3]) -> CaseId {
    match (in_allowed, relocation) {
        (true, _) => ids[0],
        (false, false) => ids[1],
        (false, true) => ids[2],
    }
}

impl SwitchingCase {
    /// Sets the release timing of a definitive UE-initiated case. Other cases
    /// keep `NotApplicable`.
    pub fn with_release_timing(mut self, timing: ReleaseTiming) -> Self {
        if self.initiator == CaseInitiator::Ue && !self.tentative && timing != ReleaseTiming::NotApplicable {
            self.release_timing = timing;
        }
        self
    }

    /// Procedures of a successful switch, in the order their runs start.
    pub fn expected_procedures(&self) -> Vec<Procedure> {
        use Procedure::*;
        let mut seq = Vec::new();
        match (self.initiator, self.tentative, self.release_timing) {
            (CaseInitiator::Network, _, _) => {
                if self.trigger_mech == Mechanism::UcuCommand {
                    seq.push(UeConfigurationUpdate);
                }
                seq.push(PduSessionRelease);
                if self.needs_registration {
                    seq.push(Registration);
                }
            }
            (CaseInitiator::Ue, true, _) => seq.extend([Registration, PduSessionRelease]),
            (CaseInitiator::Ue, false, ReleaseTiming::Deferred) => {
                if self.needs_registration {
                    seq.extend([Registration, PduSessionRelease]);
                } else {
                    // the release starts from inside the establishment
                    seq.extend([PduSessionEstablishment, PduSessionRelease]);
                    return seq;
                }
            }
            (CaseInitiator::Ue, false, _) => {
                seq.push(PduSessionRelease);
                if self.needs_registration {
                    seq.push(Registration);
                }
            }
        }
        seq.push(PduSessionEstablishment);
        seq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseResult {
    Switched,
    Aborted(FailureReason),
    StayedOnCurrent,
}

impl fmt::Display for CaseResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Switched => f.write_str("Switched"),
            Self::Aborted(r) => write!(f, "Aborted({r})"),
            Self::StayedOnCurrent => f.write_str("StayedOnCurrent"),
        }
    }
}

impl FromStr for CaseResult {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Switched" => Ok(Self::Switched),
            "StayedOnCurrent" => Ok(Self::StayedOnCurrent),
            _ => s
                .strip_prefix("Aborted(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| format!("unknown case result {s:?}"))?
                .parse()
                .map(Self::Aborted),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchOutcome {
    pub switch: SwitchId,
    pub case_id: CaseId,
    pub ue: UeId,
    pub procedure_runs: Vec<ProcedureRun>,
    pub old_snssai: SNssai,
    pub new_snssai: Option<SNssai>,
    /// Release completion of the old session, if it was released.
    pub released_at: Option<Tick>,
    /// Tick the new session became Active.
    pub established_at: Option<Tick>,
    /// The tentative final-decision event, if one happened.
    pub decided_at: Option<Tick>,
    pub finished_at: Tick,
    pub interruption: Option<Tick>,
    pub signaling_count: BTreeMap<MessageName, usize>,
    pub result: CaseResult,
}

impl SwitchOutcome {
    pub fn total_messages(&self) -> usize {
        self.signaling_count.values().sum()
    }
}

/// Service interruption of a switched outcome.
pub fn measure_interruption(outcome: &SwitchOutcome) -> Result<Tick, SwitchingError> {
    match (outcome.result, outcome.released_at, outcome.established_at) {
        (CaseResult::Switched, Some(r), Some(e)) => Ok(e.saturating_sub(r)),
        _ => Err(SwitchingError::MetricUndefined),
    }
}

/// How a tentative case settles once Registration has succeeded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TentativeDecision {
    #[default]
    AlwaysSwitch,
    NeverSwitch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimerKind {
    AlternateSelection,
    FinalDecision,
}

impl TimerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::AlternateSelection => "AlternateSelection",
            Self::FinalDecision => "FinalDecision",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CaseEvent {
    OldReleased { at: Tick },
    RunFinished { procedure: Procedure, outcome: RunOutcome },
    Timer(TimerKind),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Action {
    /// AMF pushes `allowed \ {old}`.
    StartUcu,
    StartNetworkRelease(Initiator),
    StartUeRelease,
    StartRegistration {
        requested: BTreeSet<SNssai>,
        remove_current: bool,
        current_active: Option<SNssai>,
    },
    StartEstablishment {
        target: SNssai,
        release_old: bool,
    },
    Schedule(TimerKind, Tick),
    Notice(&'static str),
    Finish(CaseResult),
}

/// What the state machine may look at besides its own fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct CaseView {
    pub old_state: SessionState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Idle,
    AwaitOldRelease,
    Selecting,
    Registering,
    Deciding,
    Establishing,
    /// New session is up; waiting for the old one to finish releasing.
    Winding,
    /// Failed; tidying up the old session.
    Aborting,
    Done,
}

#[derive(Debug, Clone)]
pub struct CaseExecution {
    pub switch: SwitchId,
    pub case: SwitchingCase,
    pub ue: UeId,
    pub old_session: SessionId,
    pub old_snssai: SNssai,
    pub dn: String,
    pub session_type: SessionType,
    pub target: Option<SNssai>,
    /// Requested NSSAI for the case's Registration.
    pub requested: BTreeSet<SNssai>,
    pub release_initiator: Initiator,
    pub decision: TentativeDecision,
    pub selection_ticks: Tick,
    pub decision_ticks: Tick,
    pub stage: Stage,
    pub released_at: Option<Tick>,
    pub decided_at: Option<Tick>,
    pending: Option<CaseResult>,
}

impl CaseExecution {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        switch: SwitchId,
        case: SwitchingCase,
        ue: UeId,
        old_session: SessionId,
        old_snssai: SNssai,
        dn: String,
        session_type: SessionType,
        target: Option<SNssai>,
        requested: BTreeSet<SNssai>,
    ) -> Self {
        Self {
            switch,
            case,
            ue,
            old_session,
            old_snssai,
            dn,
            session_type,
            target,
            requested,
            release_initiator: Initiator::Smf,
            decision: TentativeDecision::default(),
            selection_ticks: 1,
            decision_ticks: 0,
            stage: Stage::Idle,
            released_at: None,
            decided_at: None,
            pending: None,
        }
    }

    pub fn is_done(&self) -> bool {
        self.stage == Stage::Done
    }

    pub(crate) fn start(&mut self, view: CaseView) -> Vec<Action> {
        match self.case.trigger_mech {
            Mechanism::UcuCommand => {
                self.stage = Stage::AwaitOldRelease;
                vec![Action::StartUcu]
            }
            Mechanism::NetworkRelease => {
                self.stage = Stage::AwaitOldRelease;
                vec![Action::StartNetworkRelease(self.release_initiator)]
            }
            Mechanism::UeDecision if self.case.tentative => {
                if self.target.is_none() {
                    return vec![
                        Action::Notice("NoCandidateSlice"),
                        self.finish(CaseResult::StayedOnCurrent),
                    ];
                }
                self.stage = Stage::Registering;
                vec![self.registration(false, Some(self.old_snssai.clone()))]
            }
            Mechanism::UeDecision => {
                if self.target.is_none() {
                    return self.abort(FailureReason::NoCandidateSlice, view);
                }
                match self.case.release_timing {
                    ReleaseTiming::Deferred if self.case.needs_registration => {
                        self.stage = Stage::Registering;
                        vec![self.registration(true, Some(self.old_snssai.clone()))]
                    }
                    ReleaseTiming::Deferred => {
                        self.stage = Stage::Establishing;
                        vec![self.establishment(true)]
                    }
                    _ => {
                        self.stage = Stage::AwaitOldRelease;
                        vec![Action::StartUeRelease]
                    }
                }
            }
        }
    }

    pub(crate) fn step(&mut self, event: CaseEvent, view: CaseView, now: Tick) -> Vec<Action> {
        if self.stage == Stage::Done {
            return Vec::new();
        }
        match event {
            CaseEvent::OldReleased { at } => {
                self.released_at = Some(at);
                match self.stage {
                    Stage::AwaitOldRelease if self.case.initiator == CaseInitiator::Network => {
                        self.stage = Stage::Selecting;
                        vec![Action::Schedule(TimerKind::AlternateSelection, self.selection_ticks)]
                    }
                    Stage::AwaitOldRelease if self.case.tentative => {
                        self.stage = Stage::Establishing;
                        vec![self.establishment(false)]
                    }
                    Stage::AwaitOldRelease => self.begin_new(view),
                    Stage::Winding | Stage::Aborting => {
                        let result = self.pending.take().unwrap_or(CaseResult::Switched);
                        vec![self.finish(result)]
                    }
                    _ => Vec::new(),
                }
            }
            CaseEvent::Timer(TimerKind::AlternateSelection) if self.stage == Stage::Selecting => self.begin_new(view),
            CaseEvent::Timer(TimerKind::FinalDecision) if self.stage == Stage::Deciding => {
                self.decided_at = Some(now);
                match self.decision {
                    TentativeDecision::NeverSwitch => vec![self.finish(CaseResult::StayedOnCurrent)],
                    TentativeDecision::AlwaysSwitch => {
                        self.stage = Stage::AwaitOldRelease;
                        vec![Action::StartUeRelease]
                    }
                }
            }
            CaseEvent::Timer(_) => Vec::new(),
            CaseEvent::RunFinished { procedure, outcome } => match (self.stage, procedure, outcome) {
                (Stage::Registering, Procedure::Registration, RunOutcome::Success) => {
                    if self.case.tentative {
                        self.stage = Stage::Deciding;
                        vec![Action::Schedule(TimerKind::FinalDecision, self.decision_ticks)]
                    } else {
                        self.stage = Stage::Establishing;
                        vec![self.establishment(false)]
                    }
                }
                (Stage::Registering, Procedure::Registration, RunOutcome::Failure(r)) => {
                    if self.case.tentative {
                        vec![self.finish(CaseResult::StayedOnCurrent)]
                    } else {
                        self.abort(r, view)
                    }
                }
                (Stage::Establishing, Procedure::PduSessionEstablishment, RunOutcome::Success) => {
                    if self.released_at.is_some() {
                        vec![self.finish(CaseResult::Switched)]
                    } else {
                        self.stage = Stage::Winding;
                        self.pending = Some(CaseResult::Switched);
                        Vec::new()
                    }
                }
                (Stage::Establishing, Procedure::PduSessionEstablishment, RunOutcome::Failure(r)) => {
                    self.abort(r, view)
                }
                _ => Vec::new(),
            },
        }
    }

    /// After the old session is gone: register if needed, then establish.
    fn begin_new(&mut self, view: CaseView) -> Vec<Action> {
        if self.target.is_none() {
            return self.abort(FailureReason::NoCandidateSlice, view);
        }
        if self.case.needs_registration {
            self.stage = Stage::Registering;
            vec![self.registration(true, None)]
        } else {
            self.stage = Stage::Establishing;
            vec![self.establishment(false)]
        }
    }

    fn registration(&self, remove_current: bool, current_active: Option<SNssai>) -> Action {
        Action::StartRegistration {
            requested: self.requested.clone(),
            remove_current,
            current_active,
        }
    }

    fn establishment(&self, release_old: bool) -> Action {
        Action::StartEstablishment {
            target: self.target.clone().expect("target checked before establishment"),
            release_old,
        }
    }

    fn abort(&mut self, reason: FailureReason, view: CaseView) -> Vec<Action> {
        let result = CaseResult::Aborted(reason);
        let mut out = vec![Action::Notice("NoCandidateSlice")];
        match view.old_state {
            SessionState::Active => {
                self.stage = Stage::Aborting;
                self.pending = Some(result);
                out.push(Action::StartUeRelease);
            }
            SessionState::Releasing if self.released_at.is_none() => {
                self.stage = Stage::Aborting;
                self.pending = Some(result);
            }
            _ => out.push(self.finish(result)),
        }
        out
    }

    fn finish(&mut self, result: CaseResult) -> Action {
        self.stage = Stage::Done;
        Action::Finish(result)
    }
}
