//! UE Configuration Update: the AMF pushes a new Allowed NSSAI.
//!
//! AMF -> UE  UeConfigurationUpdateCommand
//! UE -> AMF  UeConfigurationUpdateComplete

use std::collections::BTreeSet;

use super::{release, Initiator, NewRun, Procedure, ProcedureError, RunDetail, RunOutcome};
use crate::ids::{NfId, RunId, SwitchId, UeId};
use crate::nf::Step;
use crate::sim::message::{MessageName, Payload, SignalingMessage};
use crate::slice::{SNssai, SessionState, MAX_ALLOWED_SLICES};

/// Starts the update at the serving AMF (`step.me`). The allowed set changes
/// when the Command is sent, and AMF-initiated releases follow at once for
/// Active sessions whose slice is no longer allowed.
pub(crate) fn start(
    step: &mut Step<'_>,
    ue_id: &UeId,
    new_allowed: BTreeSet<SNssai>,
    switch: Option<SwitchId>,
) -> Result<RunId, ProcedureError> {
    let ue = step.ue(ue_id)?;
    if ue.serving_amf != step.me.nf_id {
        return Err(ProcedureError::WrongInitiator(step.me.nf_id.clone()));
    }
    if step.runs.in_flight(ue_id, Procedure::UeConfigurationUpdate) {
        return Err(ProcedureError::InFlight(ue_id.clone(), Procedure::UeConfigurationUpdate));
    }
    if new_allowed.len() > MAX_ALLOWED_SLICES {
        return Err(ProcedureError::InvalidAllowed(format!("{} slices", new_allowed.len())));
    }
    if let Some(bad) = new_allowed
        .iter()
        .find(|s| !ue.nssai.configured.contains(*s) || !ue.nssai.is_subscribed(s))
    {
        return Err(ProcedureError::InvalidAllowed(format!("{bad} is not configured and subscribed")));
    }
    let to_release: Vec<_> = ue
        .sessions
        .values()
        .filter(|s| s.state == SessionState::Active && !new_allowed.contains(&s.snssai))
        .map(|s| s.session_id.clone())
        .collect();

    let run = step.runs.create(
        NewRun {
            procedure: Procedure::UeConfigurationUpdate,
            initiator: Initiator::Amf,
            ue_id: ue_id.clone(),
            target_snssai: None,
            session: None,
            parent: None,
            switch,
            detail: RunDetail::Ucu {
                new_allowed: new_allowed.clone(),
            },
        },
        step.now,
    );
    step.ue_mut(ue_id)?.nssai.allowed = new_allowed;
    step.send(
        MessageName::UeConfigurationUpdateCommand,
        NfId::from(ue_id),
        ue_id,
        Some(run),
        Payload::None,
    );
    for sid in to_release {
        release::start(step, ue_id, &sid, Initiator::Amf, Some(run), switch)?;
    }
    Ok(run)
}

pub(crate) fn ue_on_command(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    step.send(
        MessageName::UeConfigurationUpdateComplete,
        msg.src.clone(),
        &msg.ue,
        msg.correlates,
        Payload::None,
    );
    Ok(())
}

pub(crate) fn amf_on_complete(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    if let Some(run) = msg.correlates {
        step.finish(run, RunOutcome::Success)?;
    }
    Ok(())
}
