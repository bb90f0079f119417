mod common;

use common::{case_scenario, golden_text, run, CASES};
use slicesim_core::golden;
use slicesim_core::procedures::Procedure;
use slicesim_core::sim::{EventKind, MetricsReport};
use slicesim_core::switching::{CaseId, CaseResult, TentativeDecision};

use Procedure::{PduSessionEstablishment as Est, PduSessionRelease as Rel, Registration as Reg, UeConfigurationUpdate as Ucu};

/// Procedure order per case, written out by hand from the case table.
fn expected_sequence(case: CaseId) -> Vec<Procedure> {
    match case {
        CaseId::C1a => vec![Ucu, Rel, Est],
        CaseId::C1b | CaseId::C1c => vec![Ucu, Rel, Reg, Est],
        CaseId::C1d | CaseId::C2a => vec![Rel, Est],
        CaseId::C1e | CaseId::C1f | CaseId::C2b | CaseId::C2c => vec![Rel, Reg, Est],
        CaseId::C2bT | CaseId::C2cT => vec![Reg, Rel, Est],
    }
}

fn relocates(case: CaseId) -> bool {
    matches!(case, CaseId::C1c | CaseId::C1f | CaseId::C2c | CaseId::C2cT)
}

/// Message count from per-procedure message budgets with one UPF per slice.
/// Release: N4 pair, N1N2, N2 command, NAS command and complete, plus the
/// initiator's own request(s). Registration: request, UDM pair, accept,
/// plus one context transfer on relocation. Establishment: 17 + one N4 pair.
fn oracle_messages(case: CaseId) -> usize {
    let upfs = 1;
    let release_base = 4 + 2 * upfs;
    let release = match case {
        CaseId::C1a | CaseId::C1b | CaseId::C1c => release_base + 1,
        CaseId::C1d | CaseId::C1e | CaseId::C1f => release_base,
        _ => release_base + 2,
    };
    let ucu = if matches!(case, CaseId::C1a | CaseId::C1b | CaseId::C1c) { 2 } else { 0 };
    let registration = match case {
        CaseId::C1a | CaseId::C1d | CaseId::C2a => 0,
        c => 4 + usize::from(relocates(c)),
    };
    ucu + release + registration + 17 + 2 * upfs
}

/// Interruption with link latency `l`: serialized hops between the release
/// command reaching the UE and the SM context update reaching the SMF.
/// Network cases spend one tick of alternate-slice selection overlapped with
/// the release-complete hop.
fn oracle_interruption(case: CaseId, l: u64) -> u64 {
    let establishment_hops = 16;
    let registration_hops = match case {
        CaseId::C1a | CaseId::C1d | CaseId::C2a | CaseId::C2bT | CaseId::C2cT => 0,
        c => 4 + u64::from(relocates(c)),
    };
    let selection = match case {
        CaseId::C1a | CaseId::C1b | CaseId::C1c | CaseId::C1d | CaseId::C1e | CaseId::C1f => 1,
        _ => 0,
    };
    selection + (registration_hops + establishment_hops) * l
}

#[test]
fn every_case_matches_its_golden_trace() {
    for case in CASES {
        let art = run(&case_scenario(case));
        let d = golden::diff(&art.trace_text(), &golden_text(case)).unwrap();
        assert!(d.is_equal(), "{case}: {d:?}");
    }
}

#[test]
fn procedure_sequences() {
    for case in CASES {
        let art = run(&case_scenario(case));
        assert_eq!(golden::procedure_sequence(&art.trace), expected_sequence(case), "{case}");
        assert_eq!(art.outcomes.len(), 1);
        assert_eq!(art.outcomes[0].case_id, case);
        assert_eq!(art.outcomes[0].result, CaseResult::Switched);
    }
}

#[test]
fn message_counts_match_budget() {
    for case in CASES {
        let art = run(&case_scenario(case));
        let delivered = art.trace.iter().filter(|r| r.kind == EventKind::MessageDelivery).count();
        assert_eq!(delivered, oracle_messages(case), "{case}");
    }
}

#[test]
fn interruption_scales_with_latency() {
    for l in 1..=3 {
        for case in CASES {
            let mut sc = case_scenario(case);
            sc.options.default_latency = l;
            let art = run(&sc);
            assert_eq!(art.outcomes[0].interruption, Some(oracle_interruption(case, l)), "{case} L={l}");
        }
    }
}

#[test]
fn relocation_goes_through_second_amf() {
    for case in CASES {
        let art = run(&case_scenario(case));
        let moved = art.trace.iter().any(|r| r.name == "AmfContextTransfer");
        assert_eq!(moved, relocates(case), "{case}");
        let amf = &art_serving_amf(case);
        assert_eq!(amf, if relocates(case) { "amf2" } else { "amf1" }, "{case}");
    }
}

fn art_serving_amf(case: CaseId) -> String {
    let mut sim = case_scenario(case).build(0).unwrap();
    sim.run_until_idle().unwrap();
    sim.network().ue(&"u1".into()).unwrap().serving_amf.to_string()
}

#[test]
fn case_1b_exact_order() {
    let art = run(&case_scenario(CaseId::C1b));
    let got: Vec<(u64, &str)> = art
        .trace
        .iter()
        .filter(|r| r.kind == EventKind::MessageDelivery)
        .map(|r| (r.at, r.name.as_str()))
        .collect();
    let want = [
        (11, "UeConfigurationUpdateCommand"),
        (11, "SmContextReleaseRequest"),
        (12, "UeConfigurationUpdateComplete"),
        (12, "N4SessionReleaseRequest"),
        (13, "N4SessionReleaseResponse"),
        (14, "N1N2MessageTransfer"),
        (15, "N2PduSessionResourceReleaseCommand"),
        (16, "PduSessionReleaseCommand"),
        (17, "PduSessionReleaseComplete"),
        (18, "RegistrationRequest"),
        (19, "SubscriptionDataRequest"),
        (20, "SubscriptionDataResponse"),
        (21, "RegistrationAccept"),
        (22, "PduSessionEstablishmentRequest"),
        (23, "SmContextCreateRequest"),
        (24, "SmSubscriptionDataRequest"),
        (25, "SmSubscriptionDataResponse"),
        (26, "SmContextCreateResponse"),
        (26, "DnAuthRequest"),
        (27, "DnAuthResponse"),
        (28, "PolicyRetrievalRequest"),
        (29, "PolicyRetrievalResponse"),
        (30, "N4SessionEstablishmentRequest"),
        (31, "N4SessionEstablishmentResponse"),
        (32, "N1N2MessageTransfer"),
        (33, "N2PduSessionResourceSetupRequest"),
        (34, "PduSessionEstablishmentAccept"),
        (35, "RrcReconfigurationComplete"),
        (36, "N2PduSessionResourceSetupResponse"),
        (37, "SmContextUpdateRequest"),
        (38, "RouterAdvertisement"),
        (39, "RouterAdvertisement"),
    ];
    assert_eq!(got, want);
}

#[test]
fn tentative_never_switch_stays() {
    for case in [CaseId::C2bT, CaseId::C2cT] {
        let mut sc = case_scenario(case);
        sc.options.tentative_decision = TentativeDecision::NeverSwitch;
        let mut sim = sc.build(0).unwrap();
        sim.enable_invariant_checks();
        sim.run_until_idle().unwrap();
        let o = sim.outcomes().next().unwrap();
        assert_eq!(o.result, CaseResult::StayedOnCurrent);
        assert_eq!(o.interruption, Some(0));
        assert_eq!(golden::procedure_sequence(sim.trace()), vec![Reg]);
        let ue = sim.network().ue(&"u1".into()).unwrap();
        assert!(ue.active_session_on(&o.old_snssai).is_some());
    }
}

#[test]
fn tentative_registration_failure_keeps_old_session() {
    let mut sc = case_scenario(CaseId::C2cT);
    sc.ues[0].subscriptions.retain(|s| s.slice != "C");
    sc.triggers[0].target = Some("C".into());
    let mut sim = sc.build(0).unwrap();
    sim.enable_invariant_checks();
    sim.run_until_idle().unwrap();
    let o = sim.outcomes().next().unwrap();
    assert_eq!(o.result, CaseResult::StayedOnCurrent);
    assert_eq!(o.interruption, Some(0));
    assert!(sim.trace().iter().any(|r| r.name == "RegistrationReject"));
    assert!(!sim.trace().iter().any(|r| r.name == "PduSessionReleaseCommand"));
}

#[test]
fn no_candidate_aborts_and_releases() {
    let mut sc = case_scenario(CaseId::C2b);
    sc.ues[0].subscriptions.retain(|s| s.slice == "A");
    let art = run(&sc);
    assert!(art.trace.iter().any(|r| r.name == "NoCandidateSlice"));
    assert!(matches!(art.outcomes[0].result, CaseResult::Aborted(_)));
    assert_eq!(art.outcomes[0].interruption, None);
}

#[test]
fn deferred_release_in_2a_establishes_first() {
    let mut sc = case_scenario(CaseId::C2a);
    sc.options.release_timing = slicesim_core::switching::ReleaseTiming::Deferred;
    let art = run(&sc);
    assert_eq!(golden::procedure_sequence(&art.trace), vec![Est, Rel]);
    // release starts when the AMF sees SmContextCreateResponse: six hops to the
    // NAS release command against eleven to SmContextUpdateRequest
    assert_eq!(art.outcomes[0].interruption, Some(11 - 6));
}

#[test]
fn nssf_assist_changes_the_golden() {
    let mut sc = case_scenario(CaseId::C1b);
    sc.options.nssf_assist = true;
    let art = run(&sc);
    assert!(!golden::diff(&art.trace_text(), &golden_text(CaseId::C1b)).unwrap().is_equal());
    let base = run(&case_scenario(CaseId::C1b));
    let count = |a: &slicesim_core::RunArtifacts| a.trace.iter().filter(|r| r.kind == EventKind::MessageDelivery).count();
    assert_eq!(count(&art), count(&base) + 2);
}

#[test]
fn report_rebuilds_from_trace() {
    let sc = slicesim_core::Scenario::load(&common::root().join("scenarios/all_cases.toml")).unwrap();
    let art = run(&sc);
    let rebuilt = MetricsReport::from_trace(&art.trace, "all_cases", 0);
    assert_eq!(rebuilt.to_csv(), art.metrics_csv());
    let cases: Vec<CaseId> = art.report.rows.iter().map(|r| r.case).collect();
    assert_eq!(cases, CASES.to_vec());
}

#[test]
fn seed_is_inert_without_jitter() {
    let sc = case_scenario(CaseId::C1c);
    let a = slicesim_core::run_scenario(&sc, 1, false).unwrap();
    let b = slicesim_core::run_scenario(&sc, 99, false).unwrap();
    assert_eq!(a.trace_text(), b.trace_text());
}

#[test]
fn nine_allowed_slices_rejected() {
    let mut sc = case_scenario(CaseId::C1a);
    for i in 0..9 {
        let name = format!("X{i}");
        sc.plmn.slices.push(slicesim_core::scenario::SliceDecl {
            name: name.clone(),
            sst: slicesim_core::slice::ServiceType::Embb,
            sd: format!("1000{i:02}"),
        });
        sc.plmn.configured.push(name.clone());
        sc.nfs[0].serving.push(name.clone());
        sc.ues[0].subscriptions.push(slicesim_core::scenario::SubscriptionDecl {
            slice: name.clone(),
            default: false,
        });
        sc.ues[0].allowed.push(name);
    }
    assert!(sc.validate().iter().any(|v| v.code == "allowed-max-8"));
}

#[test]
fn deferred_2b_releases_inside_registration() {
    for case in [CaseId::C2b, CaseId::C2c] {
        let mut sc = case_scenario(case);
        sc.options.release_timing = slicesim_core::switching::ReleaseTiming::Deferred;
        let art = run(&sc);
        assert_eq!(golden::procedure_sequence(&art.trace), vec![Reg, Rel, Est], "{case}");
        let pos = |name: &str| art.trace.iter().position(|r| r.name == name).unwrap();
        assert!(pos("PduSessionReleaseComplete") < pos("RegistrationAccept"));
        // AMF-initiated release inside registration: no UE release request
        assert!(!art.trace.iter().any(|r| r.name == "PduSessionReleaseRequest"));
    }
}
