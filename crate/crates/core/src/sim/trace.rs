//! Line-oriented trace: `seq|at|kind|name|src|dst|ue|case|proc`.
//!
//! `case` is `<switch>:<case id>` and `proc` is `<run>:<procedure>`; absent
//! fields are written as `-`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ids::{RunId, SwitchId, Tick};
use crate::procedures::Procedure;
use crate::switching::CaseId;

pub const FIELDS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    MessageDelivery,
    TriggerFire,
    TimerExpiry,
    /// Case-level observation (result, ignored trigger, no candidate).
    Notice,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MessageDelivery => "MessageDelivery",
            Self::TriggerFire => "TriggerFire",
            Self::TimerExpiry => "TimerExpiry",
            Self::Notice => "Notice",
        }
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Self::MessageDelivery, Self::TriggerFire, Self::TimerExpiry, Self::Notice]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown event kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraceRecord {
    pub seq: u64,
    pub at: Tick,
    pub kind: EventKind,
    pub name: String,
    pub src: Option<String>,
    pub dst: Option<String>,
    pub ue: Option<String>,
    pub case: Option<(SwitchId, CaseId)>,
    pub proc: Option<(RunId, Procedure)>,
}

fn opt(s: &Option<String>) -> &str {
    s.as_deref().unwrap_or("-")
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}|{}|{}|{}|{}|{}|",
            self.seq,
            self.at,
            self.kind.as_str(),
            self.name,
            opt(&self.src),
            opt(&self.dst),
            opt(&self.ue)
        )?;
        match self.case {
            Some((sw, c)) => write!(f, "{sw}:{c}|")?,
            None => f.write_str("-|")?,
        }
        match self.proc {
            Some((run, p)) => write!(f, "{run}:{p}"),
            None => f.write_str("-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: expected {FIELDS} fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: {message}")]
    Field { line: usize, message: String },
}

fn field_opt(s: &str) -> Option<String> {
    (s != "-").then(|| s.to_owned())
}

fn tagged<A: FromStr, B: FromStr>(s: &str) -> Result<Option<(A, B)>, String> {
    if s == "-" {
        return Ok(None);
    }
    let (a, b) = s.split_once(':').ok_or_else(|| format!("malformed tag {s:?}"))?;
    let a = a.parse().map_err(|_| format!("malformed tag {s:?}"))?;
    let b = b.parse().map_err(|_| format!("malformed tag {s:?}"))?;
    Ok(Some((a, b)))
}

impl FromStr for SwitchId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(SwitchId)
    }
}

impl FromStr for RunId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(RunId)
    }
}

impl TraceRecord {
    /// Parses one line; `line` is the 1-based line number for diagnostics.
    pub fn parse_line(text: &str, line: usize) -> Result<Self, TraceError> {
        let f: Vec<&str> = text.split('|').collect();
        if f.len() != FIELDS {
            return Err(TraceError::FieldCount { line, found: f.len() });
        }
        let err = |message: String| TraceError::Field { line, message };
        Ok(Self {
            seq: f[0].parse().map_err(|_| err(format!("bad seq {:?}", f[0])))?,
            at: f[1].parse().map_err(|_| err(format!("bad time {:?}", f[1])))?,
            kind: f[2].parse().map_err(err)?,
            name: f[3].to_owned(),
            src: field_opt(f[4]),
            dst: field_opt(f[5]),
            ue: field_opt(f[6]),
            case: tagged(f[7]).map_err(err)?,
            proc: tagged(f[8]).map_err(err)?,
        })
    }
}

/// Renders records one per line, each terminated by a newline.
pub fn render(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

/// Parses a whole trace file. Blank lines are skipped.
pub fn parse(text: &str) -> Result<Vec<TraceRecord>, TraceError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| TraceRecord::parse_line(l, i + 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn line_format() {
        let r = TraceRecord {
            seq: 12,
            at: 18,
            kind: EventKind::MessageDelivery,
            name: "RegistrationRequest".into(),
            src: Some("u1".into()),
            dst: Some("amf1".into()),
            ue: Some("u1".into()),
            case: Some((SwitchId(1), CaseId::C1b)),
            proc: Some((RunId(3), Procedure::Registration)),
        };
        let s = r.to_string();
        assert_eq!(s, "12|18|MessageDelivery|RegistrationRequest|u1|amf1|u1|1:1b|3:Registration");
        assert_eq!(TraceRecord::parse_line(&s, 1).unwrap(), r);
    }

    #[test]
    fn field_count_diagnostic() {
        assert_eq!(
            TraceRecord::parse_line("1|2|Notice|x", 7),
            Err(TraceError::FieldCount { line: 7, found: 4 })
        );
    }

    fn arb_name() -> impl Strategy<Value = String> {
        "[A-Za-z()]{1,12}"
    }

    fn arb_opt() -> impl Strategy<Value = Option<String>> {
        proptest::option::of("[a-z0-9-]{1,6}".prop_filter("not the absent marker", |s| s != "-"))
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(
            seq in 0u64..1000, at in 0u64..1000, kind in 0usize..4, name in arb_name(),
            src in arb_opt(), dst in arb_opt(), ue in arb_opt(),
            case in proptest::option::of((1u32..50, 0usize..11)),
            proc in proptest::option::of((1u32..50, 0usize..4)),
        ) {
            let kinds = [EventKind::MessageDelivery, EventKind::TriggerFire, EventKind::TimerExpiry, EventKind::Notice];
            let rec = TraceRecord {
                seq, at, kind: kinds[kind], name, src, dst, ue,
                case: case.map(|(s, c)| (SwitchId(s), CaseId::ALL[c])),
                proc: proc.map(|(r, p)| (RunId(r), Procedure::ALL[p])),
            };
            let text = render(std::slice::from_ref(&rec));
            prop_assert_eq!(parse(&text).unwrap(), vec![rec]);
        }
    }
}
