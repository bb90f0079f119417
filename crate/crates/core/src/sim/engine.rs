use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

use crate::ids::{NfId, RunId, SessionId, SwitchId, Tick, UeId};
use crate::nf::{amf_can_serve, Network, NfKind, Note};
use crate::procedures::establishment::SessionRequest;
use crate::procedures::{
    establishment, registration, release, ucu, Initiator, Milestone, Procedure, ProcedureError, ProcedureRun,
};
use crate::sim::invariants::check_network;
use crate::sim::message::{MessageName, SignalingMessage};
use crate::sim::metrics::{MetricsReport, MetricsRow};
use crate::sim::queue::{EventPayload, EventQueue, SchedulingError, SimEvent};
use crate::sim::trace::{EventKind, TraceRecord};
use crate::slice::{
    compute_allowed_nssai, select_alternate_snssai, verify_requested_nssai, LowestPriorityIndex, PreferAllowed,
    SNssai, SelectionPolicy, SessionState, SessionType,
};
use crate::switching::{
    classify_case, measure_interruption, Action, CaseEvent, CaseExecution, CaseId, CaseInitiator, CaseResult,
    CaseView, ReleaseTiming, Stage, SwitchOutcome, SwitchingCase, SwitchingError, TentativeDecision, TimerKind,
};
use crate::trigger::{Mechanism, TriggerSpec};

/// Upper bound on processed events, as a guard against runaway scenarios.
pub const MAX_EVENTS: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicyKind {
    #[default]
    LowestPriority,
    PreferAllowed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    /// Default release timing of definitive UE-initiated cases.
    pub release_timing: ReleaseTiming,
    pub tentative_decision: TentativeDecision,
    pub invariant_checks: bool,
    /// Delay between the old release completing and the UE acting on a
    /// network-triggered switch. At least 1.
    pub selection_ticks: Tick,
    /// Delay between a tentative Registration succeeding and the final decision.
    pub decision_ticks: Tick,
    pub selection_policy: SelectionPolicyKind,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            release_timing: ReleaseTiming::Immediate,
            tentative_decision: TentativeDecision::AlwaysSwitch,
            invariant_checks: false,
            selection_ticks: 1,
            decision_ticks: 0,
            selection_policy: SelectionPolicyKind::LowestPriority,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Scheduling(#[from] SchedulingError),
    #[error("invariant {invariant} violated at event seq {seq}: {detail}")]
    InvariantViolation {
        invariant: &'static str,
        seq: u64,
        detail: String,
    },
    #[error(transparent)]
    Procedure(#[from] ProcedureError),
    #[error(transparent)]
    Switching(#[from] SwitchingError),
    #[error("event limit of {0} reached")]
    EventLimit(u64),
}

/// Discrete-event driver around a [`Network`].
pub struct Simulator {
    net: Network,
    queue: EventQueue,
    triggers: Vec<TriggerSpec>,
    cfg: SimConfig,
    cases: BTreeMap<SwitchId, CaseExecution>,
    in_flight: BTreeMap<UeId, SwitchId>,
    outcomes: BTreeMap<SwitchId, SwitchOutcome>,
    switch_counts: BTreeMap<SwitchId, BTreeMap<MessageName, usize>>,
    totals: BTreeMap<MessageName, usize>,
    trace: Vec<TraceRecord>,
    processed: u64,
    /// Seq of the event being processed; used in diagnostics.
    current_seq: u64,
}

impl Simulator {
    /// The trigger script is sorted by `fire_at` (stably) and queued.
    pub fn new(net: Network, mut triggers: Vec<TriggerSpec>, cfg: SimConfig) -> Self {
        triggers.sort_by_key(|t| t.fire_at);
        let mut queue = EventQueue::new();
        for (i, t) in triggers.iter().enumerate() {
            queue
                .schedule(t.fire_at, EventPayload::Trigger(i))
                .expect("queue starts at t=0");
        }
        Self {
            net,
            queue,
            triggers,
            cfg,
            cases: BTreeMap::new(),
            in_flight: BTreeMap::new(),
            outcomes: BTreeMap::new(),
            switch_counts: BTreeMap::new(),
            totals: BTreeMap::new(),
            trace: Vec::new(),
            processed: 0,
            current_seq: 0,
        }
    }

    pub fn enable_invariant_checks(&mut self) {
        self.cfg.invariant_checks = true;
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn now(&self) -> Tick {
        self.queue.now()
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn events_processed(&self) -> u64 {
        self.processed
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &SwitchOutcome> {
        self.outcomes.values()
    }

    pub fn outcome(&self, switch: SwitchId) -> Option<&SwitchOutcome> {
        self.outcomes.get(&switch)
    }

    pub fn case(&self, switch: SwitchId) -> Option<&CaseExecution> {
        self.cases.get(&switch)
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn schedule(&mut self, at: Tick, payload: EventPayload) -> Result<u64, SchedulingError> {
        self.queue.schedule(at, payload)
    }

    /// Processes exactly one event. Returns `None` when the queue is empty.
    pub fn advance(&mut self) -> Result<Option<SimEvent>, SimError> {
        let Some(ev) = self.queue.pop() else {
            return Ok(None);
        };
        self.processed += 1;
        if self.processed > MAX_EVENTS {
            return Err(SimError::EventLimit(MAX_EVENTS));
        }
        self.current_seq = ev.seq;
        match &ev.payload {
            EventPayload::Deliver(msg) => self.deliver(ev.seq, msg)?,
            EventPayload::Trigger(i) => self.fire_trigger(ev.seq, *i)?,
            EventPayload::Timer { switch, kind } => self.timer(ev.seq, *switch, *kind)?,
        }
        self.drain_notes()?;
        if self.cfg.invariant_checks {
            self.check(ev.seq)?;
        }
        Ok(Some(ev))
    }

    pub fn run_until_idle(&mut self) -> Result<(), SimError> {
        while self.advance()?.is_some() {}
        self.refresh_outcomes();
        Ok(())
    }

    pub fn check(&self, seq: u64) -> Result<(), SimError> {
        check_network(&self.net).map_err(|b| SimError::InvariantViolation {
            invariant: b.invariant,
            seq,
            detail: b.detail,
        })?;
        for exec in self.cases.values().filter(|e| !e.is_done()) {
            if exec.case.tentative && exec.decided_at.is_none() {
                let state = self.old_state(exec);
                if state != SessionState::Active {
                    return Err(SimError::InvariantViolation {
                        invariant: "tentative-safety",
                        seq,
                        detail: format!(
                            "switch {}: old session {} is {state:?} before the final decision",
                            exec.switch, exec.old_session
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Builds the report from the simulator's own bookkeeping.
    pub fn report(&self, scenario: &str, seed: u64) -> MetricsReport {
        let rows = self
            .cases
            .values()
            .map(|exec| {
                let out = self.outcomes.get(&exec.switch);
                MetricsRow {
                    switch: exec.switch,
                    ue: exec.ue.to_string(),
                    case: exec.case.id,
                    result: out.map(|o| o.result),
                    interruption: out.and_then(|o| o.interruption),
                    counts: self.switch_counts.get(&exec.switch).cloned().unwrap_or_default(),
                }
            })
            .collect();
        MetricsReport {
            scenario: scenario.to_owned(),
            seed,
            rows,
            totals: self.totals.clone(),
        }
    }

    fn push_msgs(&mut self, msgs: Vec<SignalingMessage>) -> Result<(), SimError> {
        for m in msgs {
            self.queue.schedule(m.delivered_at, EventPayload::Deliver(m))?;
        }
        Ok(())
    }

    fn case_tag(&self, switch: Option<SwitchId>) -> Option<(SwitchId, CaseId)> {
        switch.and_then(|s| self.cases.get(&s).map(|e| (s, e.case.id)))
    }

    fn record(&mut self, rec: TraceRecord) {
        self.trace.push(rec);
    }

    fn notice(&mut self, name: String, ue: &UeId, switch: Option<SwitchId>) {
        let seq = self.queue.next_seq();
        let rec = TraceRecord {
            seq,
            at: self.queue.now(),
            kind: EventKind::Notice,
            name,
            src: None,
            dst: None,
            ue: Some(ue.to_string()),
            case: self.case_tag(switch),
            proc: None,
        };
        self.record(rec);
    }

    fn deliver(&mut self, seq: u64, msg: &SignalingMessage) -> Result<(), SimError> {
        let run = msg.correlates.and_then(|r| self.net.runs().get(r));
        let switch = run.and_then(|r| r.switch);
        let proc = run.map(|r| (r.id, r.procedure));
        let rec = TraceRecord {
            seq,
            at: msg.delivered_at,
            kind: EventKind::MessageDelivery,
            name: msg.name.to_string(),
            src: Some(msg.src.to_string()),
            dst: Some(msg.dst.to_string()),
            ue: Some(msg.ue.to_string()),
            case: self.case_tag(switch),
            proc,
        };
        self.record(rec);
        *self.totals.entry(msg.name).or_insert(0) += 1;
        if let Some(sw) = switch {
            *self.switch_counts.entry(sw).or_default().entry(msg.name).or_insert(0) += 1;
        }
        let now = self.queue.now();
        let out = self.net.nf_handle(msg, now).map_err(|e| SimError::InvariantViolation {
            invariant: e.invariant(),
            seq,
            detail: e.to_string(),
        })?;
        self.push_msgs(out)
    }

    fn timer(&mut self, seq: u64, switch: SwitchId, kind: TimerKind) -> Result<(), SimError> {
        let ue = self.cases.get(&switch).map(|e| e.ue.to_string());
        let rec = TraceRecord {
            seq,
            at: self.queue.now(),
            kind: EventKind::TimerExpiry,
            name: kind.as_str().to_owned(),
            src: None,
            dst: None,
            ue,
            case: self.case_tag(Some(switch)),
            proc: None,
        };
        self.record(rec);
        self.case_event(switch, CaseEvent::Timer(kind))
    }

    fn fire_trigger(&mut self, seq: u64, index: usize) -> Result<(), SimError> {
        let spec = self.triggers[index].clone();
        let ue_id = spec.ue_id.clone();
        let mut rec = TraceRecord {
            seq,
            at: self.queue.now(),
            kind: EventKind::TriggerFire,
            name: spec.trigger_name.to_string(),
            src: None,
            dst: None,
            ue: Some(ue_id.to_string()),
            case: None,
            proc: None,
        };
        if self.in_flight.contains_key(&ue_id) {
            self.record(rec);
            self.notice("TriggerIgnored(CaseInFlight)".into(), &ue_id, None);
            return Ok(());
        }
        let old = self
            .net
            .ue(&ue_id)
            .and_then(|u| u.active_session_on(&spec.snssai))
            .map(|s| s.session_id.clone());
        let Some(old) = old else {
            self.record(rec);
            self.notice("TriggerIgnored(NoActiveSession)".into(), &ue_id, None);
            return Ok(());
        };
        let mechanism = match spec.mechanism() {
            Ok(m) => m,
            Err(_) => {
                self.record(rec);
                self.notice("TriggerIgnored(AmbiguousInitiation)".into(), &ue_id, None);
                return Ok(());
            }
        };
        let exec = self.prepare_case(
            &ue_id,
            &old,
            mechanism,
            spec.tentative,
            spec.target.clone(),
            spec.release_timing,
            spec.release_initiator,
        )?;
        rec.case = Some((exec.switch, exec.case.id));
        self.record(rec);
        self.launch(exec)
    }

    /// Classifies the situation and builds the case state machine.
    #[allow(clippy::too_many_arguments)]
    fn prepare_case(
        &mut self,
        ue_id: &UeId,
        old: &SessionId,
        mechanism: Mechanism,
        tentative: bool,
        forced_target: Option<SNssai>,
        release_timing: Option<ReleaseTiming>,
        release_initiator: Initiator,
    ) -> Result<CaseExecution, SimError> {
        let ue = self.net.ue(ue_id).ok_or_else(|| ProcedureError::UnknownUe(ue_id.clone()))?;
        let session = ue.session(old).ok_or_else(|| ProcedureError::UnknownSession(old.clone()))?;
        let old_snssai = session.snssai.clone();
        // slices already carrying a session to the same DN are not candidates
        let occupied: BTreeSet<SNssai> = ue
            .sessions
            .values()
            .filter(|s| s.dn_name == session.dn_name && matches!(s.state, SessionState::Active | SessionState::Establishing))
            .map(|s| s.snssai.clone())
            .collect();
        let mut candidates = ue.nssai.clone();
        candidates.subscribed.retain(|s, _| *s == old_snssai || !occupied.contains(s));
        let target = forced_target.filter(|t| !occupied.contains(t)).or_else(|| {
            let lowest = LowestPriorityIndex {
                priorities: &ue.priorities,
            };
            let preferred = PreferAllowed(lowest);
            let policy: &dyn SelectionPolicy = match self.cfg.selection_policy {
                SelectionPolicyKind::LowestPriority => &lowest,
                SelectionPolicyKind::PreferAllowed => &preferred,
            };
            select_alternate_snssai(&candidates, ue.service_type, &old_snssai, policy)
        });
        let mut remaining = ue.nssai.allowed.clone();
        remaining.remove(&old_snssai);
        let in_allowed = target.as_ref().is_some_and(|t| remaining.contains(t));
        // a target already allowed needs no registration, so nothing is tentative
        let tentative = tentative && !in_allowed;
        let mut requested: BTreeSet<SNssai> = remaining.clone();
        requested.extend(target.clone());
        let relocation = !in_allowed && target.is_some() && {
            let dir = self.net.directory();
            let subscribed = dir
                .repository
                .subscriptions
                .get(ue_id)
                .map(|r| r.subscribed.clone())
                .unwrap_or_default();
            verify_requested_nssai(&requested, &subscribed, &dir.configured)
                .ok()
                .and_then(|v| {
                    compute_allowed_nssai(&ue.nssai.allowed, &v.accepted, !tentative, Some(&old_snssai)).ok()
                })
                .and_then(|allowed| dir.profile(&ue.serving_amf).map(|amf| !amf_can_serve(amf, &allowed)))
                .unwrap_or(false)
        };
        let initiator = match mechanism {
            Mechanism::UeDecision => CaseInitiator::Ue,
            _ => CaseInitiator::Network,
        };
        let case: SwitchingCase = classify_case(initiator, mechanism, in_allowed, relocation, tentative)?
            .with_release_timing(release_timing.unwrap_or(self.cfg.release_timing));
        let switch = SwitchId(self.cases.len() as u32 + 1);
        let mut exec = CaseExecution::new(
            switch,
            case,
            ue_id.clone(),
            old.clone(),
            old_snssai,
            session.dn_name.clone(),
            session.session_type,
            target,
            requested,
        );
        exec.release_initiator = release_initiator;
        exec.decision = self.cfg.tentative_decision;
        exec.selection_ticks = self.cfg.selection_ticks.max(1);
        exec.decision_ticks = self.cfg.decision_ticks;
        Ok(exec)
    }

    fn launch(&mut self, mut exec: CaseExecution) -> Result<(), SimError> {
        let switch = exec.switch;
        let view = CaseView {
            old_state: self.old_state(&exec),
        };
        let actions = exec.start(view);
        self.in_flight.insert(exec.ue.clone(), switch);
        self.cases.insert(switch, exec);
        self.apply(switch, actions)
    }

    fn old_state(&self, exec: &CaseExecution) -> SessionState {
        self.net
            .ue(&exec.ue)
            .and_then(|u| u.session(&exec.old_session))
            .map_or(SessionState::Released, |s| s.state)
    }

    fn case_event(&mut self, switch: SwitchId, event: CaseEvent) -> Result<(), SimError> {
        let now = self.queue.now();
        let Some(exec) = self.cases.get(&switch) else {
            return Ok(());
        };
        let view = CaseView {
            old_state: self.old_state(exec),
        };
        let exec = self.cases.get_mut(&switch).expect("checked above");
        let actions = exec.step(event, view, now);
        self.apply(switch, actions)
    }

    fn apply(&mut self, switch: SwitchId, actions: Vec<Action>) -> Result<(), SimError> {
        let now = self.queue.now();
        for action in actions {
            let exec = self.cases.get(&switch).expect("case exists");
            let ue = exec.ue.clone();
            let ue_node = NfId::from(&ue);
            let old = exec.old_session.clone();
            let sw = Some(switch);
            let msgs = match action {
                Action::StartUcu => {
                    let ctx = self.net.ue(&ue).ok_or_else(|| ProcedureError::UnknownUe(ue.clone()))?;
                    let amf = ctx.serving_amf.clone();
                    let mut new_allowed = ctx.nssai.allowed.clone();
                    new_allowed.remove(&exec.old_snssai);
                    self.net
                        .with_step(&amf, now, |s| ucu::start(s, &ue, new_allowed, sw))?
                        .1
                }
                Action::StartNetworkRelease(initiator) => {
                    let node = self.release_node(&ue, &old, initiator)?;
                    self.net
                        .with_step(&node, now, |s| release::start(s, &ue, &old, initiator, None, sw))?
                        .1
                }
                Action::StartUeRelease => {
                    self.net
                        .with_step(&ue_node, now, |s| release::start(s, &ue, &old, Initiator::Ue, None, sw))?
                        .1
                }
                Action::StartRegistration {
                    requested,
                    remove_current,
                    current_active,
                } => {
                    self.net
                        .with_step(&ue_node, now, |s| {
                            registration::start(s, &ue, requested, remove_current, current_active, sw)
                        })?
                        .1
                }
                Action::StartEstablishment { target, release_old } => {
                    if self.cfg.invariant_checks
                        && exec.case.initiator == CaseInitiator::Network
                        && exec.released_at.is_none_or(|r| r >= now)
                    {
                        return Err(SimError::InvariantViolation {
                            invariant: "release-before-establish",
                            seq: self.current_seq,
                            detail: format!("switch {switch} establishes before the old release completed"),
                        });
                    }
                    let req = SessionRequest {
                        snssai: target,
                        dn: exec.dn.clone(),
                        session_type: exec.session_type,
                        release_old: release_old.then_some(old),
                    };
                    self.net
                        .with_step(&ue_node, now, |s| establishment::start(s, &ue, req, sw))?
                        .1
                }
                Action::Schedule(kind, delay) => {
                    self.queue.schedule(now + delay, EventPayload::Timer { switch, kind })?;
                    Vec::new()
                }
                Action::Notice(name) => {
                    self.notice(name.to_owned(), &ue, sw);
                    Vec::new()
                }
                Action::Finish(result) => {
                    self.notice(result.to_string(), &ue, sw);
                    self.in_flight.remove(&ue);
                    self.finalize(switch, result)?;
                    Vec::new()
                }
            };
            self.push_msgs(msgs)?;
        }
        Ok(())
    }

    fn release_node(&self, ue: &UeId, session: &SessionId, initiator: Initiator) -> Result<NfId, SimError> {
        let ctx = self.net.ue(ue).ok_or_else(|| ProcedureError::UnknownUe(ue.clone()))?;
        let node = match initiator {
            Initiator::Ue => Some(NfId::from(ue)),
            Initiator::Amf => Some(ctx.serving_amf.clone()),
            Initiator::Smf => ctx.session(session).and_then(|s| s.smf.clone()),
            Initiator::Pcf => self.net.directory().first(NfKind::Pcf).cloned(),
        };
        node.ok_or_else(|| ProcedureError::WrongInitiator(NfId::new(format!("{initiator:?}"))).into())
    }

    fn finalize(&mut self, switch: SwitchId, result: CaseResult) -> Result<(), SimError> {
        let exec = self.cases.get(&switch).expect("case exists");
        let runs: Vec<ProcedureRun> = self
            .net
            .runs()
            .iter()
            .filter(|r| r.switch == Some(switch))
            .cloned()
            .collect();
        let established_at = runs
            .iter()
            .filter(|r| r.procedure == Procedure::PduSessionEstablishment)
            .find_map(|r| r.milestone_at(Milestone::SessionActive));
        if self.cfg.invariant_checks && result == CaseResult::Switched {
            for r in runs.iter().filter(|r| r.procedure == Procedure::PduSessionEstablishment) {
                check_establishment_order(r, self.current_seq)?;
            }
        }
        let mut outcome = SwitchOutcome {
            switch,
            case_id: exec.case.id,
            ue: exec.ue.clone(),
            procedure_runs: runs,
            old_snssai: exec.old_snssai.clone(),
            new_snssai: match result {
                CaseResult::Switched => exec.target.clone(),
                _ => None,
            },
            released_at: exec.released_at,
            established_at,
            decided_at: exec.decided_at,
            finished_at: self.queue.now(),
            interruption: None,
            signaling_count: BTreeMap::new(),
            result,
        };
        outcome.interruption = match result {
            CaseResult::Switched => Some(measure_interruption(&outcome)?),
            CaseResult::StayedOnCurrent => Some(0),
            CaseResult::Aborted(_) => None,
        };
        self.outcomes.insert(switch, outcome);
        self.refresh_outcomes();
        Ok(())
    }

    /// Messages of a switch can keep arriving after it finished (the last
    /// release acknowledgement, say); counts and run snapshots are brought up to date.
    fn refresh_outcomes(&mut self) {
        for (sw, out) in self.outcomes.iter_mut() {
            out.signaling_count = self.switch_counts.get(sw).cloned().unwrap_or_default();
            out.procedure_runs = self
                .net
                .runs()
                .iter()
                .filter(|r| r.switch == Some(*sw))
                .cloned()
                .collect();
        }
    }

    fn drain_notes(&mut self) -> Result<(), SimError> {
        loop {
            let notes = self.net.take_notes();
            if notes.is_empty() {
                return Ok(());
            }
            for note in notes {
                match note {
                    Note::RunFinished(id) => self.on_run_finished(id)?,
                    Note::SessionReleased { ue, session, at } => {
                        let Some(&sw) = self.in_flight.get(&ue) else { continue };
                        if self.cases.get(&sw).is_some_and(|e| e.old_session == session) {
                            self.case_event(sw, CaseEvent::OldReleased { at })?;
                        }
                    }
                    Note::SessionActive { .. } => {}
                }
            }
        }
    }

    fn on_run_finished(&mut self, id: RunId) -> Result<(), SimError> {
        let Some(run) = self.net.runs().get(id) else {
            return Ok(());
        };
        let (Some(sw), Some(outcome)) = (run.switch, run.outcome) else {
            return Ok(());
        };
        let procedure = run.procedure;
        if matches!(procedure, Procedure::Registration | Procedure::PduSessionEstablishment) {
            self.case_event(sw, CaseEvent::RunFinished { procedure, outcome })?;
        }
        Ok(())
    }

    fn wait_for(&mut self, run: RunId) -> Result<ProcedureRun, SimError> {
        self.drain_notes()?;
        while self.net.runs().get(run).is_some_and(|r| !r.is_finished()) {
            if self.advance()?.is_none() {
                break;
            }
        }
        self.run_until_idle()?;
        self.net
            .runs()
            .get(run)
            .cloned()
            .ok_or_else(|| ProcedureError::UnknownRun(run).into())
    }

    /// Runs a UE Configuration Update to completion, outside any switching case.
    pub fn run_ue_configuration_update(
        &mut self,
        amf: &NfId,
        ue: &UeId,
        new_allowed: BTreeSet<SNssai>,
    ) -> Result<ProcedureRun, SimError> {
        let now = self.now();
        let (run, msgs) = self.net.with_step(amf, now, |s| ucu::start(s, ue, new_allowed, None))?;
        self.push_msgs(msgs)?;
        self.wait_for(run)
    }

    pub fn run_registration(
        &mut self,
        ue: &UeId,
        requested: BTreeSet<SNssai>,
        remove_current: bool,
    ) -> Result<ProcedureRun, SimError> {
        let now = self.now();
        let current_active = self.net.ue(ue).and_then(|u| {
            u.sessions
                .values()
                .find(|s| s.state == SessionState::Active)
                .map(|s| s.snssai.clone())
        });
        let (run, msgs) = self.net.with_step(&NfId::from(ue), now, |s| {
            registration::start(s, ue, requested, remove_current, current_active, None)
        })?;
        self.push_msgs(msgs)?;
        self.wait_for(run)
    }

    pub fn run_pdu_session_release(
        &mut self,
        ue: &UeId,
        session: &SessionId,
        initiator: Initiator,
    ) -> Result<ProcedureRun, SimError> {
        let now = self.now();
        let node = self.release_node(ue, session, initiator)?;
        let (run, msgs) = self
            .net
            .with_step(&node, now, |s| release::start(s, ue, session, initiator, None, None))?;
        self.push_msgs(msgs)?;
        self.wait_for(run)
    }

    pub fn run_pdu_session_establishment(
        &mut self,
        ue: &UeId,
        snssai: SNssai,
        dn: &str,
    ) -> Result<ProcedureRun, SimError> {
        let now = self.now();
        let req = SessionRequest {
            snssai,
            dn: dn.to_owned(),
            session_type: SessionType::Ip,
            release_old: None,
        };
        let (run, msgs) = self
            .net
            .with_step(&NfId::from(ue), now, |s| establishment::start(s, ue, req, None))?;
        self.push_msgs(msgs)?;
        self.wait_for(run)
    }

    /// Runs one switching case for `ue` away from its Active session on
    /// `old_snssai`, outside the trigger script.
    pub fn execute_case(
        &mut self,
        case: SwitchingCase,
        ue: &UeId,
        old_snssai: &SNssai,
        target: Option<SNssai>,
    ) -> Result<SwitchOutcome, SimError> {
        let ctx = self.net.ue(ue).ok_or_else(|| ProcedureError::UnknownUe(ue.clone()))?;
        let session = ctx
            .active_session_on(old_snssai)
            .ok_or_else(|| ProcedureError::UnknownSession(SessionId::new(format!("active on {old_snssai}"))))?;
        let old = session.session_id.clone();
        let (dn, session_type) = (session.dn_name.clone(), session.session_type);
        let mut remaining = ctx.nssai.allowed.clone();
        remaining.remove(old_snssai);
        let mut requested = remaining;
        requested.extend(target.clone());
        let switch = SwitchId(self.cases.len() as u32 + 1);
        let mut exec = CaseExecution::new(
            switch,
            case,
            ue.clone(),
            old,
            old_snssai.clone(),
            dn,
            session_type,
            target,
            requested,
        );
        exec.decision = self.cfg.tentative_decision;
        exec.selection_ticks = self.cfg.selection_ticks.max(1);
        exec.decision_ticks = self.cfg.decision_ticks;
        if self.in_flight.contains_key(ue) {
            return Err(ProcedureError::InFlight(ue.clone(), Procedure::Registration).into());
        }
        self.launch(exec)?;
        self.drain_notes()?;
        self.run_until_idle()?;
        self.outcomes
            .get(&switch)
            .cloned()
            .ok_or_else(|| SimError::InvariantViolation {
                invariant: "case-termination",
                seq: self.current_seq,
                detail: format!("switch {switch} did not finish"),
            })
    }

    /// Stage of every case that has not finished, for diagnostics.
    pub fn unfinished(&self) -> Vec<(SwitchId, Stage)> {
        self.cases
            .values()
            .filter(|e| !e.is_done())
            .map(|e| (e.switch, e.stage))
            .collect()
    }
}

const SUB_STEPS: [Milestone; 5] = [
    Milestone::DnAuthorized,
    Milestone::PolicyRetrieved,
    Milestone::N4Established,
    Milestone::IpAllocated,
    Milestone::SmParametersConfigured,
];

fn check_establishment_order(run: &ProcedureRun, seq: u64) -> Result<(), SimError> {
    let idx: Vec<Option<usize>> = SUB_STEPS.iter().map(|m| run.milestone_index(*m)).collect();
    let ordered = idx.iter().all(Option::is_some) && idx.windows(2).all(|w| w[0] < w[1]);
    if ordered {
        Ok(())
    } else {
        Err(SimError::InvariantViolation {
            invariant: "establishment-order",
            seq,
            detail: format!("run {} milestones {:?}", run.id, run.milestones),
        })
    }
}
