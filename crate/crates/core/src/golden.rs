//! Golden-trace comparison on the name-and-order projection of a trace.
//!
//! The projection drops `seq` and `at`, so latency changes do not break
//! sequence fixtures.

use std::path::{Path, PathBuf};

use crate::ids::RunId;
use crate::procedures::Procedure;
use crate::sim::trace::{self, TraceError, TraceRecord, FIELDS};
use crate::switching::CaseId;

pub const GOLDEN_DIR_ENV: &str = "SLICESIM_GOLDEN_DIR";

/// Golden directory: `$SLICESIM_GOLDEN_DIR` if set, else `default`.
pub fn golden_dir(default: &Path) -> PathBuf {
    std::env::var_os(GOLDEN_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| default.to_path_buf())
}

pub fn case_file_name(case: CaseId) -> String {
    format!("case_{case}.trace")
}

/// `kind|name|src|dst|ue|case|proc` of one trace line.
pub fn project_line(line: &str, number: usize) -> Result<String, TraceError> {
    let fields: Vec<&str> = line.split('|').collect();
    if fields.len() != FIELDS {
        return Err(TraceError::FieldCount {
            line: number,
            found: fields.len(),
        });
    }
    Ok(fields[2..].join("|"))
}

pub fn project(text: &str) -> Result<Vec<String>, TraceError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| project_line(l, i + 1))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoldenDiff {
    Equal,
    /// First differing projected line (1-based). `None` means that side ended.
    Diverged {
        line: usize,
        expected: Option<String>,
        actual: Option<String>,
    },
}

impl GoldenDiff {
    pub fn is_equal(&self) -> bool {
        *self == GoldenDiff::Equal
    }
}

pub fn diff(actual: &str, golden: &str) -> Result<GoldenDiff, TraceError> {
    let a = project(actual)?;
    let g = project(golden)?;
    for i in 0..a.len().max(g.len()) {
        if a.get(i) != g.get(i) {
            return Ok(GoldenDiff::Diverged {
                line: i + 1,
                expected: g.get(i).cloned(),
                actual: a.get(i).cloned(),
            });
        }
    }
    Ok(GoldenDiff::Equal)
}

/// Procedures in the order their runs first appear in the trace.
pub fn procedure_sequence(records: &[TraceRecord]) -> Vec<Procedure> {
    let mut seen: Vec<RunId> = Vec::new();
    let mut out = Vec::new();
    for r in records {
        if let Some((run, p)) = r.proc {
            if !seen.contains(&run) {
                seen.push(run);
                out.push(p);
            }
        }
    }
    out
}

pub fn procedure_sequence_of(text: &str) -> Result<Vec<Procedure>, TraceError> {
    Ok(procedure_sequence(&trace::parse(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const T: &str = "\
1|10|TriggerFire|SliceStressLoad|-|-|u1|1:1b|-
2|11|MessageDelivery|UeConfigurationUpdateCommand|amf1|u1|u1|1:1b|1:UeConfigurationUpdate
3|11|MessageDelivery|SmContextReleaseRequest|amf1|smf-a|u1|1:1b|2:PduSessionRelease
";

    #[test]
    fn identical_is_equal() {
        assert!(diff(T, T).unwrap().is_equal());
    }

    #[test]
    fn timestamps_are_ignored() {
        let shifted = T.replace("|11|", "|40|");
        assert!(diff(&shifted, T).unwrap().is_equal());
    }

    #[test]
    fn swapped_lines_report_first_divergence() {
        let lines: Vec<&str> = T.lines().collect();
        let swapped = format!("{}\n{}\n{}\n", lines[0], lines[2], lines[1]);
        match diff(&swapped, T).unwrap() {
            GoldenDiff::Diverged { line, .. } => assert_eq!(line, 2),
            GoldenDiff::Equal => panic!("expected divergence"),
        }
    }

    #[test]
    fn extra_line_diverges_at_end() {
        let longer = format!("{T}4|12|Notice|Switched|-|-|u1|1:1b|-\n");
        assert_eq!(
            diff(&longer, T).unwrap(),
            GoldenDiff::Diverged {
                line: 4,
                expected: None,
                actual: Some("Notice|Switched|-|-|u1|1:1b|-".into())
            }
        );
    }

    #[test]
    fn field_count_error() {
        assert!(matches!(diff("1|2|3\n", T), Err(TraceError::FieldCount { line: 1, found: 3 })));
    }

    #[test]
    fn sequence_from_first_appearance() {
        assert_eq!(
            procedure_sequence_of(T).unwrap(),
            vec![Procedure::UeConfigurationUpdate, Procedure::PduSessionRelease]
        );
    }
}
