//! Registration of an already registered UE with a new Requested NSSAI.
//!
//! UE  -> AMF      RegistrationRequest
//! AMF -> UDM      SubscriptionDataRequest
//! UDM -> AMF      SubscriptionDataResponse
//! AMF -> NSSF     NssaiSelectionRequest      } only with NSSF assistance
//! NSSF -> AMF     NssaiSelectionResponse     }
//! AMF -> AMF'     AmfContextTransfer         (relocation only)
//! AMF(') -> UE    RegistrationAccept | RegistrationReject

use std::collections::BTreeSet;

use super::{release, FailureReason, Initiator, Milestone, NewRun, Procedure, ProcedureError, RunDetail, RunOutcome};
use crate::ids::{NfId, RunId, SwitchId, UeId};
use crate::nf::{amf_can_serve, select_amf, NfKind, ReleaseOrder, Step};
use crate::sim::message::{MessageName, Payload, SignalingMessage};
use crate::slice::{compute_allowed_nssai, verify_requested_nssai, RegistrationState, SNssai, SessionState};

fn msg_run(msg: &SignalingMessage) -> Result<RunId, ProcedureError> {
    msg.correlates.ok_or(ProcedureError::UnknownRun(RunId(0)))
}

/// Sends the request from the UE node `step.me`.
pub(crate) fn start(
    step: &mut Step<'_>,
    ue_id: &UeId,
    requested: BTreeSet<SNssai>,
    remove_current: bool,
    current_active: Option<SNssai>,
    switch: Option<SwitchId>,
) -> Result<RunId, ProcedureError> {
    if step.me.kind != NfKind::Ue || step.me.nf_id != NfId::from(ue_id) {
        return Err(ProcedureError::WrongInitiator(step.me.nf_id.clone()));
    }
    let ue = step.ue(ue_id)?;
    if ue.registration_state != RegistrationState::Registered {
        return Err(ProcedureError::NotRegistered(ue_id.clone()));
    }
    if step.runs.in_flight(ue_id, Procedure::Registration) {
        return Err(ProcedureError::InFlight(ue_id.clone(), Procedure::Registration));
    }
    if requested.is_empty() {
        return Err(ProcedureError::InvalidAllowed("empty Requested NSSAI".into()));
    }
    let amf = ue.serving_amf.clone();
    let run = step.runs.create(
        NewRun {
            procedure: Procedure::Registration,
            initiator: Initiator::Ue,
            ue_id: ue_id.clone(),
            target_snssai: None,
            session: None,
            parent: None,
            switch,
            detail: RunDetail::Registration {
                requested: requested.clone(),
                remove_current,
                current_active,
                new_allowed: None,
                target_amf: None,
                pending_releases: 0,
            },
        },
        step.now,
    );
    step.ue_mut(ue_id)?.nssai.requested = Some(requested);
    step.send(MessageName::RegistrationRequest, amf, ue_id, Some(run), Payload::None);
    Ok(run)
}

pub(crate) fn amf_on_request(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let udm = step
        .dir
        .first(NfKind::Udm)
        .cloned()
        .ok_or_else(|| ProcedureError::UnknownNf(NfId::new("udm")))?;
    step.send(MessageName::SubscriptionDataRequest, udm, &msg.ue, msg.correlates, Payload::None);
    Ok(())
}

pub(crate) fn amf_on_subscription(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    if step.opts.nssf_assist {
        let nssf = step
            .dir
            .first(NfKind::Nssf)
            .cloned()
            .ok_or_else(|| ProcedureError::UnknownNf(NfId::new("nssf")))?;
        step.send(MessageName::NssaiSelectionRequest, nssf, &msg.ue, Some(run), Payload::None);
        return Ok(());
    }
    decide(step, run)
}

pub(crate) fn amf_on_nssf(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    decide(step, msg_run(msg)?)
}

/// Verification, allowed-set computation, AMF check and release-during-registration.
fn decide(step: &mut Step<'_>, run: RunId) -> Result<(), ProcedureError> {
    let r = step.run(run)?;
    let ue_id = r.ue_id.clone();
    let RunDetail::Registration {
        requested,
        remove_current,
        current_active,
        ..
    } = &r.detail
    else {
        return Err(ProcedureError::UnknownRun(run));
    };
    let (requested, remove_current, current_active) = (requested.clone(), *remove_current, current_active.clone());
    let Some(record) = step.dir.repository.subscriptions.get(&ue_id) else {
        return reject(step, run, FailureReason::UnknownUe);
    };
    let accepted = match verify_requested_nssai(&requested, &record.subscribed, &step.dir.configured) {
        Ok(v) if !v.accepted.is_empty() => v.accepted,
        _ => return reject(step, run, FailureReason::NoAcceptableSnssai),
    };
    let ue = step.ue(&ue_id)?;
    let new_allowed =
        match compute_allowed_nssai(&ue.nssai.allowed, &accepted, remove_current, current_active.as_ref()) {
            Ok(a) => a,
            Err(_) => return reject(step, run, FailureReason::AllowedNssaiOverflow),
        };
    step.milestone(run, Milestone::NssaiVerified)?;

    let target = if amf_can_serve(step.me, &new_allowed) {
        step.me.nf_id.clone()
    } else {
        let nssf = step
            .dir
            .first(NfKind::Nssf)
            .and_then(|id| step.dir.profile(id))
            .ok_or_else(|| ProcedureError::UnknownNf(NfId::new("nssf")))?;
        match select_amf(nssf, &new_allowed, step.dir.of_kind(NfKind::Amf)) {
            Ok(amf) => amf,
            Err(_) => return reject(step, run, FailureReason::NoServingAmf),
        }
    };

    let to_release: Vec<_> = if remove_current {
        step.ue(&ue_id)?
            .sessions
            .values()
            .filter(|s| s.state == SessionState::Active && !new_allowed.contains(&s.snssai))
            .map(|s| s.session_id.clone())
            .collect()
    } else {
        Vec::new()
    };
    let switch = step.run(run)?.switch;
    if let RunDetail::Registration {
        new_allowed: na,
        target_amf,
        ..
    } = &mut step.run_mut(run)?.detail
    {
        *na = Some(new_allowed);
        *target_amf = Some(target);
    }
    for sid in &to_release {
        release::start(step, &ue_id, sid, Initiator::Amf, Some(run), switch)?;
    }
    if !to_release.is_empty() && step.opts.registration_release_order == ReleaseOrder::BeforeAccept {
        if let RunDetail::Registration { pending_releases, .. } = &mut step.run_mut(run)?.detail {
            *pending_releases = to_release.len();
        }
        return Ok(());
    }
    proceed(step, run)
}

/// Called by the AMF when a release started by this registration completes.
pub(crate) fn on_release_done(step: &mut Step<'_>, run: RunId) -> Result<(), ProcedureError> {
    let resume = match &mut step.run_mut(run)?.detail {
        RunDetail::Registration { pending_releases, .. } if *pending_releases > 0 => {
            *pending_releases -= 1;
            *pending_releases == 0
        }
        _ => false,
    };
    if resume {
        proceed(step, run)?;
    }
    Ok(())
}

fn proceed(step: &mut Step<'_>, run: RunId) -> Result<(), ProcedureError> {
    let r = step.run(run)?;
    let ue_id = r.ue_id.clone();
    let target = match &r.detail {
        RunDetail::Registration { target_amf: Some(t), .. } => t.clone(),
        _ => return Err(ProcedureError::UnknownRun(run)),
    };
    if target == step.me.nf_id {
        return accept(step, run);
    }
    step.run_mut(run)?.with_amf_relocation = true;
    step.amf().registered.remove(&ue_id);
    step.send(MessageName::AmfContextTransfer, target, &ue_id, Some(run), Payload::None);
    Ok(())
}

pub(crate) fn amf_on_context_transfer(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    step.amf().registered.insert(msg.ue.clone());
    step.ue_mut(&msg.ue)?.serving_amf = step.me.nf_id.clone();
    step.milestone(run, Milestone::AmfRelocated)?;
    accept(step, run)
}

fn accept(step: &mut Step<'_>, run: RunId) -> Result<(), ProcedureError> {
    let r = step.run(run)?;
    let ue_id = r.ue_id.clone();
    let new_allowed = match &r.detail {
        RunDetail::Registration {
            new_allowed: Some(a), ..
        } => a.clone(),
        _ => return Err(ProcedureError::UnknownRun(run)),
    };
    let ue = step.ue_mut(&ue_id)?;
    ue.nssai.allowed = new_allowed;
    ue.nssai.requested = None;
    step.send(MessageName::RegistrationAccept, NfId::from(&ue_id), &ue_id, Some(run), Payload::None);
    Ok(())
}

pub(crate) fn reject(step: &mut Step<'_>, run: RunId, reason: FailureReason) -> Result<(), ProcedureError> {
    let ue_id = step.run(run)?.ue_id.clone();
    step.ue_mut(&ue_id)?.nssai.requested = None;
    step.send(
        MessageName::RegistrationReject,
        NfId::from(&ue_id),
        &ue_id,
        Some(run),
        Payload::Failure(reason),
    );
    Ok(())
}

pub(crate) fn ue_on_result(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let outcome = match (msg.name, &msg.payload) {
        (MessageName::RegistrationAccept, _) => RunOutcome::Success,
        (_, Payload::Failure(r)) => RunOutcome::Failure(*r),
        _ => RunOutcome::Failure(FailureReason::UnknownMessage),
    };
    step.finish(run, outcome)
}
