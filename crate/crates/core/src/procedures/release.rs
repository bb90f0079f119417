//! PDU Session Release, initiated by the UE, AMF, SMF or PCF.
//!
//! UE  -> AMF  PduSessionReleaseRequest            (UE-initiated only)
//! AMF -> SMF  SmContextReleaseRequest             (UE- and AMF-initiated)
//! PCF -> SMF  PolicyTerminationNotify             (PCF-initiated only)
//! SMF -> UPF  N4SessionReleaseRequest             } once per UPF
//! UPF -> SMF  N4SessionReleaseResponse            }
//! SMF -> AMF  N1N2MessageTransfer
//! AMF -> RAN  N2PduSessionResourceReleaseCommand  (RAN token freed)
//! RAN -> UE   PduSessionReleaseCommand            (session Released)
//! UE  -> AMF  PduSessionReleaseComplete

use std::collections::VecDeque;

use super::{registration, Initiator, Milestone, NewRun, Procedure, ProcedureError, RunDetail, RunOutcome};
use crate::ids::{NfId, RunId, SessionId, SwitchId, UeId};
use crate::nf::{NfKind, NfStore, Note, Step};
use crate::sim::message::{MessageName, Payload, SignalingMessage};
use crate::slice::SessionState;

fn msg_run(msg: &SignalingMessage) -> Result<RunId, ProcedureError> {
    msg.correlates.ok_or(ProcedureError::UnknownRun(RunId(0)))
}

/// Starts releasing `session` from `step.me`, whose kind must match `initiator`.
pub(crate) fn start(
    step: &mut Step<'_>,
    ue_id: &UeId,
    session: &SessionId,
    initiator: Initiator,
    parent: Option<RunId>,
    switch: Option<SwitchId>,
) -> Result<RunId, ProcedureError> {
    let expected = match initiator {
        Initiator::Ue => NfKind::Ue,
        Initiator::Amf => NfKind::Amf,
        Initiator::Smf => NfKind::Smf,
        Initiator::Pcf => NfKind::Pcf,
    };
    if step.me.kind != expected {
        return Err(ProcedureError::WrongInitiator(step.me.nf_id.clone()));
    }
    let s = step.session(ue_id, session)?;
    if s.state != SessionState::Active {
        return Err(ProcedureError::InvalidSessionState {
            session: session.clone(),
            state: s.state,
        });
    }
    let snssai = s.snssai.clone();
    let smf = s.smf.clone().ok_or_else(|| ProcedureError::UnknownNf(NfId::new("smf")))?;
    if initiator == Initiator::Smf && smf != step.me.nf_id {
        return Err(ProcedureError::WrongInitiator(step.me.nf_id.clone()));
    }
    let upfs: VecDeque<NfId> = s.upfs.iter().cloned().collect();
    step.session_mut(ue_id, session)?.transition(SessionState::Releasing)?;
    let run = step.runs.create(
        NewRun {
            procedure: Procedure::PduSessionRelease,
            initiator,
            ue_id: ue_id.clone(),
            target_snssai: Some(snssai),
            session: Some(session.clone()),
            parent,
            switch,
            detail: RunDetail::Release { upfs_remaining: upfs },
        },
        step.now,
    );
    match initiator {
        Initiator::Ue => {
            let amf = step.serving_amf(ue_id)?;
            step.send(MessageName::PduSessionReleaseRequest, amf, ue_id, Some(run), Payload::None);
        }
        Initiator::Amf => {
            step.send(MessageName::SmContextReleaseRequest, smf, ue_id, Some(run), Payload::None);
        }
        Initiator::Pcf => {
            step.send(MessageName::PolicyTerminationNotify, smf, ue_id, Some(run), Payload::None);
        }
        Initiator::Smf => smf_next(step, ue_id, run)?,
    }
    Ok(run)
}

/// SMF: release the next N4 session, or hand over to the AMF once all are gone.
fn smf_next(step: &mut Step<'_>, ue_id: &UeId, run: RunId) -> Result<(), ProcedureError> {
    let next = match &mut step.run_mut(run)?.detail {
        RunDetail::Release { upfs_remaining } => upfs_remaining.pop_front(),
        _ => None,
    };
    match next {
        Some(upf) => step.send(MessageName::N4SessionReleaseRequest, upf, ue_id, Some(run), Payload::None),
        None => {
            let sid = step.run_session(run)?;
            step.smf().prefixes.remove(&sid);
            let amf = step.serving_amf(ue_id)?;
            step.send(MessageName::N1N2MessageTransfer, amf, ue_id, Some(run), Payload::None);
        }
    }
    Ok(())
}

pub(crate) fn amf_on_request(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let sid = step.run_session(run)?;
    let smf = step
        .session(&msg.ue, &sid)?
        .smf
        .clone()
        .ok_or_else(|| ProcedureError::UnknownNf(NfId::new("smf")))?;
    step.send(MessageName::SmContextReleaseRequest, smf, &msg.ue, Some(run), Payload::None);
    Ok(())
}

pub(crate) fn smf_on_request(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    smf_next(step, &msg.ue, msg_run(msg)?)
}

pub(crate) fn upf_on_n4_release(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let sid = step.run_session(run)?;
    if let NfStore::Upf(s) = step.store {
        s.n4.remove(&sid);
    }
    step.send(MessageName::N4SessionReleaseResponse, msg.src.clone(), &msg.ue, Some(run), Payload::None);
    Ok(())
}

pub(crate) fn smf_on_n4_released(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let sid = step.run_session(run)?;
    let store = step.smf();
    if let Some(list) = store.n4.get_mut(&sid) {
        list.retain(|n| n.upf != msg.src);
        if list.is_empty() {
            store.n4.remove(&sid);
        }
    }
    smf_next(step, &msg.ue, run)
}

pub(crate) fn amf_on_n1n2(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let ran = step
        .dir
        .first(NfKind::Ran)
        .cloned()
        .ok_or_else(|| ProcedureError::UnknownNf(NfId::new("ran")))?;
    step.send(
        MessageName::N2PduSessionResourceReleaseCommand,
        ran,
        &msg.ue,
        msg.correlates,
        Payload::None,
    );
    Ok(())
}

pub(crate) fn ran_on_release(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let sid = step.run_session(run)?;
    if let NfStore::Ran(s) = step.store {
        s.tokens.remove(&sid);
    }
    step.send(
        MessageName::PduSessionReleaseCommand,
        NfId::from(&msg.ue),
        &msg.ue,
        Some(run),
        Payload::None,
    );
    Ok(())
}

pub(crate) fn ue_on_command(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let sid = step.run_session(run)?;
    step.session_mut(&msg.ue, &sid)?.transition(SessionState::Released)?;
    step.milestone(run, Milestone::SessionReleased)?;
    step.notes.push(Note::SessionReleased {
        ue: msg.ue.clone(),
        session: sid,
        at: step.now,
    });
    let amf = step.serving_amf(&msg.ue)?;
    step.send(MessageName::PduSessionReleaseComplete, amf, &msg.ue, Some(run), Payload::None);
    Ok(())
}

pub(crate) fn amf_on_complete(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    step.finish(run, RunOutcome::Success)?;
    if let Some(parent) = step.run(run)?.parent {
        if step.run(parent)?.procedure == Procedure::Registration {
            registration::on_release_done(step, parent)?;
        }
    }
    Ok(())
}
