#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;

use slicesim_core::nf::NfKind;
use slicesim_core::procedures::Initiator;
use slicesim_core::scenario::{DenyDecl, SessionDecl, SubscriptionDecl, TriggerDecl, UeDecl};
use slicesim_core::slice::ServiceType;
use slicesim_core::switching::{CaseId, TentativeDecision};
use slicesim_core::trigger::{Initiation, NetworkVia, TriggerName};
use slicesim_core::{run_scenario, RunArtifacts, Scenario};

pub const CASES: [CaseId; 11] = [
    CaseId::C1a,
    CaseId::C1b,
    CaseId::C1c,
    CaseId::C1d,
    CaseId::C1e,
    CaseId::C1f,
    CaseId::C2a,
    CaseId::C2b,
    CaseId::C2c,
    CaseId::C2bT,
    CaseId::C2cT,
];

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn case_scenario(case: CaseId) -> Scenario {
    Scenario::load(&root().join(format!("scenarios/case_{case}.toml"))).unwrap()
}

pub fn golden_text(case: CaseId) -> String {
    std::fs::read_to_string(root().join("golden").join(format!("case_{case}.trace"))).unwrap()
}

pub fn run(sc: &Scenario) -> RunArtifacts {
    run_scenario(sc, 0, true).unwrap()
}

/// Random multi-UE scenario on the three-slice template. Every trigger kind,
/// initiation side, release initiator, latency and option is drawn from `rng`.
pub fn random_scenario<R: Rng>(rng: &mut R) -> Scenario {
    let mut sc = case_scenario(CaseId::C1b);
    sc.name = Some("fuzz".into());
    sc.ues.clear();
    sc.triggers.clear();
    sc.links.clear();

    let o = &mut sc.options;
    o.invariant_checks = true;
    o.nssf_assist = rng.gen_bool(0.5);
    o.default_latency = rng.gen_range(1..=3);
    o.latency_jitter = rng.gen_range(0..=2);
    o.selection_ticks = rng.gen_range(1..=3);
    o.decision_ticks = rng.gen_range(0..=3);
    o.tentative_decision = if rng.gen_bool(0.7) {
        TentativeDecision::AlwaysSwitch
    } else {
        TentativeDecision::NeverSwitch
    };

    let ids: Vec<String> = sc.nfs.iter().map(|n| n.id.clone()).collect();
    for _ in 0..rng.gen_range(0..4) {
        let a = ids.choose(rng).unwrap().clone();
        let b = ids.choose(rng).unwrap().clone();
        sc.links.push(slicesim_core::scenario::LinkDecl {
            a,
            b,
            latency: rng.gen_range(1..=4),
        });
    }

    let slices = ["A", "B", "C"];
    let n_ues = rng.gen_range(1..=6);
    let mut deny = Vec::new();
    for i in 0..n_ues {
        let ue_id = format!("u{i}");
        let subscribed: Vec<&str> = slices.iter().copied().filter(|s| *s == "A" || rng.gen_bool(0.7)).collect();
        let on_amf2 = rng.gen_bool(0.3);
        let mut allowed = vec!["A".to_string()];
        for s in &subscribed[1..] {
            if (on_amf2 || *s != "C") && rng.gen_bool(0.4) {
                allowed.push(s.to_string());
            }
        }
        let mut sessions = vec![SessionDecl {
            slice: "A".into(),
            dn: "internet".into(),
            session_type: Default::default(),
        }];
        if allowed.len() > 1 && rng.gen_bool(0.3) {
            sessions.push(SessionDecl {
                slice: allowed[1].clone(),
                dn: "internet".into(),
                session_type: Default::default(),
            });
        }
        let mut prio: Vec<u32> = (1..=3).collect();
        prio.shuffle(rng);
        let priorities: BTreeMap<String, u32> = slices.iter().map(|s| s.to_string()).zip(prio).collect();
        if rng.gen_bool(0.1) {
            deny.push(DenyDecl {
                ue: Some(ue_id.clone()),
                dn: "internet".into(),
            });
        }
        sc.ues.push(UeDecl {
            ue_id: ue_id.clone(),
            service_type: ServiceType::Embb,
            serving_amf: if on_amf2 { "amf2" } else { "amf1" }.into(),
            subscriptions: subscribed
                .iter()
                .map(|s| SubscriptionDecl {
                    slice: s.to_string(),
                    default: *s == "A",
                })
                .collect(),
            sm_data: None,
            allowed,
            sessions: sessions.clone(),
            priorities,
        });

        for _ in 0..rng.gen_range(0..=3) {
            let name = *TriggerName::ALL.choose(rng).unwrap();
            let init = match name.typical_initiation() {
                Initiation::Either => {
                    if rng.gen_bool(0.5) {
                        Initiation::UeInitiated
                    } else {
                        Initiation::NetworkTriggered
                    }
                }
                fixed => fixed,
            };
            let tentative = init == Initiation::UeInitiated && rng.gen_bool(0.4);
            let via = if rng.gen_bool(0.5) { NetworkVia::Ucu } else { NetworkVia::Release };
            let release_initiator = *[Initiator::Smf, Initiator::Amf, Initiator::Pcf].choose(rng).unwrap();
            let snssai = sessions.choose(rng).unwrap().slice.clone();
            let target = if rng.gen_bool(0.2) {
                Some(slices.choose(rng).unwrap().to_string())
            } else {
                None
            };
            sc.triggers.push(TriggerDecl {
                trigger_name: name,
                cause_group: None,
                initiation: None,
                initiation_override: Some(init),
                fire_at: rng.gen_range(1..80),
                ue_id: ue_id.clone(),
                snssai,
                via,
                release_initiator,
                tentative,
                release_timing: None,
                target,
            });
        }
    }
    if let Some(dn) = sc.nfs.iter_mut().find(|n| n.kind == NfKind::Dn) {
        dn.deny = deny;
    }
    sc
}
