//! Per-switch signaling and interruption metrics, written as CSV.

use std::collections::BTreeMap;

use crate::ids::{SwitchId, Tick};
use crate::sim::message::MessageName;
use crate::sim::trace::{EventKind, TraceRecord};
use crate::switching::{CaseId, CaseResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsRow {
    pub switch: SwitchId,
    pub ue: String,
    pub case: CaseId,
    /// `None` while the switch has not finished.
    pub result: Option<CaseResult>,
    pub interruption: Option<Tick>,
    pub counts: BTreeMap<MessageName, usize>,
}

impl MetricsRow {
    pub fn messages(&self) -> usize {
        self.counts.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsReport {
    pub scenario: String,
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    /// Every delivered message, inside a switch or not.
    pub totals: BTreeMap<MessageName, usize>,
}

impl MetricsReport {
    pub fn total_messages(&self) -> usize {
        self.totals.values().sum()
    }

    pub fn row(&self, switch: SwitchId) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.switch == switch)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = vec![
            "scenario",
            "seed",
            "switch",
            "ue",
            "case",
            "result",
            "interruption",
            "messages",
        ];
        header.extend(MessageName::ALL.iter().map(|n| n.as_str()));
        w.write_record(&header).expect("in-memory write");
        let seed = self.seed.to_string();
        for r in &self.rows {
            let mut rec = vec![
                self.scenario.clone(),
                seed.clone(),
                r.switch.to_string(),
                r.ue.clone(),
                r.case.to_string(),
                r.result.map(|x| x.to_string()).unwrap_or_else(|| "-".into()),
                r.interruption.map(|x| x.to_string()).unwrap_or_default(),
                r.messages().to_string(),
            ];
            rec.extend(counts_fields(&r.counts));
            w.write_record(&rec).expect("in-memory write");
        }
        let mut rec = vec![
            self.scenario.clone(),
            seed,
            "total".into(),
            "-".into(),
            "-".into(),
            "-".into(),
            String::new(),
            self.total_messages().to_string(),
        ];
        rec.extend(counts_fields(&self.totals));
        w.write_record(&rec).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    /// Rebuilds the report from a trace alone.
    pub fn from_trace(records: &[TraceRecord], scenario: &str, seed: u64) -> Self {
        #[derive(Default)]
        struct Acc {
            ue: String,
            result: Option<CaseResult>,
            release_cmd: Option<Tick>,
            sm_update: Option<Tick>,
            counts: BTreeMap<MessageName, usize>,
        }
        let mut per: BTreeMap<SwitchId, (CaseId, Acc)> = BTreeMap::new();
        let mut totals = BTreeMap::new();
        for r in records {
            let Some((sw, case)) = r.case else {
                if r.kind == EventKind::MessageDelivery {
                    if let Ok(n) = r.name.parse::<MessageName>() {
                        *totals.entry(n).or_insert(0) += 1;
                    }
                }
                continue;
            };
            let (_, acc) = per.entry(sw).or_insert_with(|| (case, Acc::default()));
            if acc.ue.is_empty() {
                acc.ue = r.ue.clone().unwrap_or_else(|| "-".into());
            }
            match r.kind {
                EventKind::MessageDelivery => {
                    if let Ok(n) = r.name.parse::<MessageName>() {
                        *acc.counts.entry(n).or_insert(0) += 1;
                        *totals.entry(n).or_insert(0) += 1;
                        match n {
                            MessageName::PduSessionReleaseCommand => acc.release_cmd = Some(r.at),
                            MessageName::SmContextUpdateRequest => acc.sm_update = Some(r.at),
                            _ => {}
                        }
                    }
                }
                EventKind::Notice => {
                    if let Ok(res) = r.name.parse::<CaseResult>() {
                        acc.result = Some(res);
                    }
                }
                _ => {}
            }
        }
        let rows = per
            .into_iter()
            .map(|(switch, (case, acc))| {
                let interruption = match acc.result {
                    Some(CaseResult::Switched) => match (acc.release_cmd, acc.sm_update) {
                        (Some(r), Some(e)) => Some(e.saturating_sub(r)),
                        _ => None,
                    },
                    Some(CaseResult::StayedOnCurrent) => Some(0),
                    _ => None,
                };
                MetricsRow {
                    switch,
                    ue: acc.ue,
                    case,
                    result: acc.result,
                    interruption,
                    counts: acc.counts,
                }
            })
            .collect();
        Self {
            scenario: scenario.to_owned(),
            seed,
            rows,
            totals,
        }
    }
}

fn counts_fields(counts: &BTreeMap<MessageName, usize>) -> impl Iterator<Item = String> + '_ {
    MessageName::ALL
        .iter()
        .map(|n| counts.get(n).copied().unwrap_or(0).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::RunId;
    use crate::procedures::Procedure;

    fn rec(seq: u64, at: Tick, kind: EventKind, name: &str, case: Option<(u32, CaseId)>) -> TraceRecord {
        TraceRecord {
            seq,
            at,
            kind,
            name: name.into(),
            src: None,
            dst: None,
            ue: Some("u1".into()),
            case: case.map(|(s, c)| (SwitchId(s), c)),
            proc: Some((RunId(1), Procedure::PduSessionRelease)),
        }
    }

    #[test]
    fn recompute_from_trace() {
        let c = Some((1, CaseId::C2a));
        let trace = vec![
            rec(1, 10, EventKind::TriggerFire, "SliceDelay", c),
            rec(2, 16, EventKind::MessageDelivery, "PduSessionReleaseCommand", c),
            rec(3, 30, EventKind::MessageDelivery, "SmContextUpdateRequest", c),
            rec(4, 32, EventKind::Notice, "Switched", c),
            rec(5, 33, EventKind::MessageDelivery, "AnalyticsRequest", None),
        ];
        let m = MetricsReport::from_trace(&trace, "s", 0);
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.rows[0].interruption, Some(14));
        assert_eq!(m.rows[0].messages(), 2);
        assert_eq!(m.total_messages(), 3);
        let csv = m.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("scenario,seed,switch,ue,case,result,interruption,messages,UeConfigurationUpdateCommand"));
        assert!(lines[1].starts_with("s,0,1,u1,2a,Switched,14,2,"));
        assert!(lines[2].starts_with("s,0,total,-,-,-,,3,"));
    }

    #[test]
    fn aborted_has_empty_interruption() {
        let c = Some((1, CaseId::C2b));
        let trace = vec![
            rec(1, 16, EventKind::MessageDelivery, "PduSessionReleaseCommand", c),
            rec(2, 17, EventKind::Notice, "Aborted(NoServingAmf)", c),
        ];
        let m = MetricsReport::from_trace(&trace, "s", 0);
        assert_eq!(m.rows[0].interruption, None);
        assert!(m.to_csv().lines().nth(1).unwrap().contains(",Aborted(NoServingAmf),,1,"));
    }
}
