//! The four standard procedures as message choreographies.
//!
//! Each submodule holds the steps of one procedure for every network function
//! that takes part in it. [`crate::nf::Network::nf_handle`] dispatches inbound
//! messages to those steps. A step reads and updates the run it belongs to
//! through the [`RunLog`].

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{NfId, RunId, SessionId, SwitchId, Tick, UeId};
use crate::slice::{IllegalTransition, SNssai, SessionState};

pub(crate) mod establishment;
pub(crate) mod registration;
pub(crate) mod release;
pub(crate) mod ucu;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Procedure {
    UeConfigurationUpdate,
    Registration,
    PduSessionRelease,
    PduSessionEstablishment,
}

impl Procedure {
    pub const ALL: [Procedure; 4] = [
        Self::UeConfigurationUpdate,
        Self::Registration,
        Self::PduSessionRelease,
        Self::PduSessionEstablishment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::UeConfigurationUpdate => "UeConfigurationUpdate",
            Self::Registration => "Registration",
            Self::PduSessionRelease => "PduSessionRelease",
            Self::PduSessionEstablishment => "PduSessionEstablishment",
        }
    }

    /// Most messages one run of this procedure can put on the bus, given the
    /// number of UPFs serving the session's slice. Releases started from inside
    /// another run count against their own bound.
    pub fn message_bound(self, upfs: usize) -> usize {
        match self {
            Self::UeConfigurationUpdate => 2,
            // request, UDM pair, NSSF pair, context transfer, accept/reject
            Self::Registration => 7,
            // two initiation hops, N4 pair per UPF, N1N2, N2 release, command, complete
            Self::PduSessionRelease => 6 + 2 * upfs,
            // see establishment.rs for the step list
            Self::PduSessionEstablishment => 17 + 2 * upfs,
        }
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Procedure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown procedure {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Initiator {
    #[serde(rename = "UE")]
    Ue,
    #[serde(rename = "AMF")]
    Amf,
    #[serde(rename = "SMF")]
    Smf,
    #[serde(rename = "PCF")]
    Pcf,
}

macro_rules! failure_reasons {
    ($($name:ident),+ $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum FailureReason {
            $($name),+
        }

        impl FailureReason {
            pub const ALL: &'static [FailureReason] = &[$(FailureReason::$name),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(FailureReason::$name => stringify!($name)),+
                }
            }
        }
    };
}

failure_reasons!(
    NoAcceptableSnssai,
    AllowedNssaiOverflow,
    NoServingAmf,
    DnAuthRejected,
    NoPolicy,
    SliceNotAllowed,
    InvalidSessionState,
    UnknownUe,
    UnknownMessage,
    NoSmSubscription,
    NoSmf,
    NoUpf,
    ServiceTypeMismatch,
    NoCandidateSlice,
);

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FailureReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown failure reason {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Success,
    Failure(FailureReason),
}

/// Observable step inside a run, recorded in the order it happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Milestone {
    NssaiVerified,
    AmfRelocated,
    SmfSelected,
    SmSubscriptionVerified,
    DnAuthorized,
    PolicyRetrieved,
    UpfSelected,
    N4Established,
    IpAllocated,
    SmParametersConfigured,
    SessionActive,
    SessionReleased,
}

/// Per-procedure working state.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum RunDetail {
    Ucu {
        new_allowed: BTreeSet<SNssai>,
    },
    Registration {
        requested: BTreeSet<SNssai>,
        remove_current: bool,
        current_active: Option<SNssai>,
        new_allowed: Option<BTreeSet<SNssai>>,
        target_amf: Option<NfId>,
        pending_releases: usize,
    },
    Release {
        upfs_remaining: VecDeque<NfId>,
    },
    Establishment {
        release_old: Option<SessionId>,
        upfs_remaining: VecDeque<NfId>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureRun {
    pub id: RunId,
    pub procedure: Procedure,
    pub initiator: Initiator,
    pub ue_id: UeId,
    pub target_snssai: Option<SNssai>,
    pub session: Option<SessionId>,
    /// Only meaningful for registrations.
    pub with_amf_relocation: bool,
    pub started_at: Tick,
    pub finished_at: Option<Tick>,
    pub outcome: Option<RunOutcome>,
    /// Run that started this one (a release fired from a registration, say).
    pub parent: Option<RunId>,
    pub switch: Option<SwitchId>,
    pub milestones: Vec<(Milestone, Tick)>,
    pub(crate) detail: RunDetail,
}

impl ProcedureRun {
    pub fn is_finished(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn milestone_at(&self, m: Milestone) -> Option<Tick> {
        self.milestones.iter().find(|(x, _)| *x == m).map(|(_, t)| *t)
    }

    /// Position of `m` in the milestone sequence.
    pub fn milestone_index(&self, m: Milestone) -> Option<usize> {
        self.milestones.iter().position(|(x, _)| *x == m)
    }
}

/// Errors raised while starting or advancing a procedure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProcedureError {
    #[error("session {session} is {state:?}; the procedure cannot run on it")]
    InvalidSessionState { session: SessionId, state: SessionState },
    #[error("UE {0} already has a {1} procedure in flight")]
    InFlight(UeId, Procedure),
    #[error("UE {0} is not registered")]
    NotRegistered(UeId),
    #[error("unknown UE {0}")]
    UnknownUe(UeId),
    #[error("unknown session {0}")]
    UnknownSession(SessionId),
    #[error("unknown network function {0}")]
    UnknownNf(NfId),
    #[error("unknown procedure run {0}")]
    UnknownRun(RunId),
    #[error("{0} cannot initiate this procedure")]
    WrongInitiator(NfId),
    #[error("invalid allowed NSSAI: {0}")]
    InvalidAllowed(String),
    #[error(transparent)]
    Transition(#[from] IllegalTransition),
}

impl ProcedureError {
    /// Name of the invariant this error breaks when raised inside a running choreography.
    pub fn invariant(&self) -> &'static str {
        match self {
            Self::Transition(_) => "session-transition",
            Self::InvalidSessionState { .. } | Self::InFlight(..) => "procedure-concurrency",
            _ => "referential-integrity",
        }
    }
}

/// Append-only registry of procedure runs.
#[derive(Debug, Clone, Default)]
pub struct RunLog {
    runs: Vec<ProcedureRun>,
}

pub(crate) struct NewRun {
    pub procedure: Procedure,
    pub initiator: Initiator,
    pub ue_id: UeId,
    pub target_snssai: Option<SNssai>,
    pub session: Option<SessionId>,
    pub parent: Option<RunId>,
    pub switch: Option<SwitchId>,
    pub detail: RunDetail,
}

impl RunLog {
    pub(crate) fn create(&mut self, new: NewRun, now: Tick) -> RunId {
        let id = RunId(self.runs.len() as u32 + 1);
        self.runs.push(ProcedureRun {
            id,
            procedure: new.procedure,
            initiator: new.initiator,
            ue_id: new.ue_id,
            target_snssai: new.target_snssai,
            session: new.session,
            with_amf_relocation: false,
            started_at: now,
            finished_at: None,
            outcome: None,
            parent: new.parent,
            switch: new.switch,
            milestones: Vec::new(),
            detail: new.detail,
        });
        id
    }

    pub fn get(&self, id: RunId) -> Option<&ProcedureRun> {
        (id.0 as usize).checked_sub(1).and_then(|i| self.runs.get(i))
    }

    pub(crate) fn get_mut(&mut self, id: RunId) -> Result<&mut ProcedureRun, ProcedureError> {
        (id.0 as usize)
            .checked_sub(1)
            .and_then(|i| self.runs.get_mut(i))
            .ok_or(ProcedureError::UnknownRun(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = &ProcedureRun> {
        self.runs.iter()
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub(crate) fn in_flight(&self, ue: &UeId, procedure: Procedure) -> bool {
        self.runs
            .iter()
            .any(|r| &r.ue_id == ue && r.procedure == procedure && !r.is_finished())
    }

    pub(crate) fn milestone(&mut self, id: RunId, m: Milestone, now: Tick) -> Result<(), ProcedureError> {
        self.get_mut(id)?.milestones.push((m, now));
        Ok(())
    }

    /// Marks a run finished. Returns false when it already was.
    pub(crate) fn finish(&mut self, id: RunId, outcome: RunOutcome, now: Tick) -> Result<bool, ProcedureError> {
        let run = self.get_mut(id)?;
        if run.is_finished() {
            return Ok(false);
        }
        run.outcome = Some(outcome);
        run.finished_at = Some(now);
        Ok(true)
    }
}
