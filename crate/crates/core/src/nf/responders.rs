//! Request/response functions that take part in several procedures but hold
//! no per-run state: UDM, NSSF, DN, PCF and the NWDAF stub.

use super::{NfStore, Step};
use crate::procedures::{FailureReason, ProcedureError};
use crate::sim::message::{MessageName, Payload, SignalingMessage};

fn reply(step: &mut Step<'_>, msg: &SignalingMessage, name: MessageName, payload: Payload) {
    step.send(name, msg.src.clone(), &msg.ue, msg.correlates, payload);
}

fn unknown_ue(step: &mut Step<'_>, msg: &SignalingMessage) {
    reply(step, msg, MessageName::ProcedureFailure, Payload::Failure(FailureReason::UnknownUe));
}

pub(crate) fn udm_subscription(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    if step.dir.repository.subscriptions.contains_key(&msg.ue) {
        reply(step, msg, MessageName::SubscriptionDataResponse, Payload::None);
    } else {
        unknown_ue(step, msg);
    }
    Ok(())
}

pub(crate) fn udm_sm_subscription(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let Some(record) = step.dir.repository.subscriptions.get(&msg.ue) else {
        unknown_ue(step, msg);
        return Ok(());
    };
    let run = msg.correlates.ok_or(ProcedureError::UnknownRun(crate::ids::RunId(0)))?;
    let sid = step.run_session(run)?;
    let session = step.session(&msg.ue, &sid)?;
    let found = record.sm_lookup(&session.snssai, &session.dn_name, session.session_type);
    let payload = Payload::SmSubscription {
        found: found.is_some(),
        dn_authorization: found.is_some_and(|d| d.dn_authorization),
    };
    reply(step, msg, MessageName::SmSubscriptionDataResponse, payload);
    Ok(())
}

pub(crate) fn nssf_selection(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    reply(step, msg, MessageName::NssaiSelectionResponse, Payload::None);
    Ok(())
}

pub(crate) fn dn_auth(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg.correlates.ok_or(ProcedureError::UnknownRun(crate::ids::RunId(0)))?;
    let sid = step.run_session(run)?;
    let dn = step.session(&msg.ue, &sid)?.dn_name.clone();
    let ok = match &*step.store {
        NfStore::Dn(s) => s.authorizes(&msg.ue, &dn),
        _ => true,
    };
    reply(step, msg, MessageName::DnAuthResponse, Payload::Verdict(ok));
    Ok(())
}

pub(crate) fn pcf_policy(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg.correlates.ok_or(ProcedureError::UnknownRun(crate::ids::RunId(0)))?;
    let sid = step.run_session(run)?;
    let session = step.session(&msg.ue, &sid)?;
    let key = (session.snssai.clone(), session.dn_name.clone());
    let ok = match &*step.store {
        NfStore::Pcf(s) => s.records.contains_key(&key),
        _ => false,
    };
    reply(step, msg, MessageName::PolicyRetrievalResponse, Payload::Verdict(ok));
    Ok(())
}

pub(crate) fn nwdaf_query(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let answer = match (&msg.payload, &*step.store) {
        (Payload::Query(snssai), NfStore::Nwdaf(s)) => s.slices.get(snssai).copied(),
        _ => None,
    };
    reply(step, msg, MessageName::AnalyticsResponse, Payload::Analytics(answer));
    Ok(())
}
