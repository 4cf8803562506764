//! Byte-deterministic CSV and JSON reports.
//!
//! Values are rounded to two decimals here and nowhere else. In CSV the rate
//! columns carry a `%` suffix; JSON keeps plain numbers.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::metrics::{SessionMetrics, Stat, SummaryRow, SummaryTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv|json)")),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

pub const SUMMARY_HEADER: [&str; 7] = [
    "technique",
    "wpm_bn",
    "kspc_bn",
    "er_bn",
    "msder_bn",
    "total_error_rate",
    "n_sessions",
];

const SESSION_HEADER: [&str; 18] = [
    "session_id",
    "technique",
    "participant",
    "wpm_bn",
    "kspc_bn",
    "er_bn",
    "msder_bn",
    "total_error_rate",
    "is_len",
    "os_t_len",
    "os_p_len",
    "inf",
    "msd",
    "duration_s",
    "correct",
    "incorrect_fixed",
    "fixes",
    "replayed",
];

fn round2(x: f64) -> f64 {
    let r = (x * 100.0).round() / 100.0;
    // keep "-0" out of the output
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn num(x: f64) -> String {
    format!("{:.2}", round2(x))
}

fn pct(x: f64) -> String {
    format!("{:.2}%", round2(x))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn summary_csv_row(r: &SummaryRow) -> Vec<String> {
    vec![
        r.technique_id.clone(),
        num(r.wpm_bn.mean),
        num(r.kspc_bn.mean),
        pct(r.er_bn.mean),
        pct(r.msder_bn.mean),
        pct(r.total_error_rate.mean),
        r.n_sessions.to_string(),
    ]
}

#[derive(Serialize)]
struct JsonStat {
    mean: f64,
    sd: f64,
}

impl From<Stat> for JsonStat {
    fn from(s: Stat) -> Self {
        JsonStat {
            mean: round2(s.mean),
            sd: round2(s.sd),
        }
    }
}

#[derive(Serialize)]
struct JsonSummaryRow {
    technique: String,
    wpm_bn: JsonStat,
    kspc_bn: JsonStat,
    er_bn: JsonStat,
    msder_bn: JsonStat,
    total_error_rate: JsonStat,
    n_sessions: usize,
}

impl From<&SummaryRow> for JsonSummaryRow {
    fn from(r: &SummaryRow) -> Self {
        JsonSummaryRow {
            technique: r.technique_id.clone(),
            wpm_bn: r.wpm_bn.into(),
            kspc_bn: r.kspc_bn.into(),
            er_bn: r.er_bn.into(),
            msder_bn: r.msder_bn.into(),
            total_error_rate: r.total_error_rate.into(),
            n_sessions: r.n_sessions,
        }
    }
}

#[derive(Serialize)]
struct JsonSession {
    session_id: String,
    technique: String,
    participant: String,
    wpm_bn: f64,
    kspc_bn: f64,
    er_bn: f64,
    msder_bn: f64,
    total_error_rate: f64,
    is_len: usize,
    os_t_len: usize,
    os_p_len: usize,
    inf: usize,
    msd: f64,
    duration_s: f64,
    correct: usize,
    incorrect_fixed: usize,
    fixes: usize,
    replayed: bool,
}

impl From<&SessionMetrics> for JsonSession {
    fn from(m: &SessionMetrics) -> Self {
        let q = &m.intermediates;
        JsonSession {
            session_id: m.session_id.clone(),
            technique: m.technique_id.clone(),
            participant: m.participant_id.clone(),
            wpm_bn: round2(m.wpm_bn),
            kspc_bn: round2(m.kspc_bn),
            er_bn: round2(m.er_bn),
            msder_bn: round2(m.msder_bn),
            total_error_rate: round2(m.total_error_rate),
            is_len: q.is_len,
            os_t_len: q.os_t_len,
            os_p_len: q.os_p_len,
            inf: q.inf,
            msd: q.msd,
            duration_s: q.duration_s,
            correct: q.correct,
            incorrect_fixed: q.incorrect_fixed,
            fixes: q.fixes,
            replayed: q.replayed,
        }
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory json");
    out.push(b'\n');
    out
}

/// The per-technique summary table.
///
/// ```
/// use abugida::{write_report, ReportFormat, SummaryTable};
///
/// let csv = write_report(&SummaryTable::default(), ReportFormat::Csv);
/// assert_eq!(
///     String::from_utf8(csv).unwrap(),
///     "technique,wpm_bn,kspc_bn,er_bn,msder_bn,total_error_rate,n_sessions\n"
/// );
/// ```
pub fn write_report(table: &SummaryTable, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => csv_bytes(&SUMMARY_HEADER, table.rows.iter().map(summary_csv_row)),
        ReportFormat::Json => {
            let rows: Vec<JsonSummaryRow> = table.rows.iter().map(Into::into).collect();
            json_bytes(&rows)
        }
    }
}

fn session_csv_row(m: &SessionMetrics) -> Vec<String> {
    let q = &m.intermediates;
    vec![
        m.session_id.clone(),
        m.technique_id.clone(),
        m.participant_id.clone(),
        num(m.wpm_bn),
        num(m.kspc_bn),
        pct(m.er_bn),
        pct(m.msder_bn),
        pct(m.total_error_rate),
        q.is_len.to_string(),
        q.os_t_len.to_string(),
        q.os_p_len.to_string(),
        q.inf.to_string(),
        format!("{}", q.msd),
        format!("{}", q.duration_s),
        q.correct.to_string(),
        q.incorrect_fixed.to_string(),
        q.fixes.to_string(),
        q.replayed.to_string(),
    ]
}

/// Per-session rows followed by the summary.
///
/// CSV puts the two tables one after the other, separated by a blank line;
/// JSON nests them under `sessions` and `summary`.
pub fn write_analysis(
    sessions: &[SessionMetrics],
    table: &SummaryTable,
    format: ReportFormat,
) -> Vec<u8> {
    match format {
        ReportFormat::Csv => {
            let mut out = csv_bytes(&SESSION_HEADER, sessions.iter().map(session_csv_row));
            out.push(b'\n');
            out.extend(write_report(table, ReportFormat::Csv));
            out
        }
        ReportFormat::Json => {
            #[derive(Serialize)]
            struct Analysis {
                sessions: Vec<JsonSession>,
                summary: Vec<JsonSummaryRow>,
            }
            json_bytes(&Analysis {
                sessions: sessions.iter().map(Into::into).collect(),
                summary: table.rows.iter().map(Into::into).collect(),
            })
        }
    }
}

/// Proposed and naive summaries for one technique.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub technique_id: String,
    pub proposed: SummaryRow,
    pub naive: SummaryRow,
}

/// Joins two summaries over the same sessions by technique.
pub fn compare_summaries(proposed: &SummaryTable, naive: &SummaryTable) -> Vec<ComparisonRow> {
    proposed
        .rows
        .iter()
        .filter_map(|p| {
            naive
                .rows
                .iter()
                .find(|n| n.technique_id == p.technique_id)
                .map(|n| ComparisonRow {
                    technique_id: p.technique_id.clone(),
                    proposed: p.clone(),
                    naive: n.clone(),
                })
        })
        .collect()
}

type Getter = fn(&SummaryRow) -> f64;

const COMPARED: [(&str, bool, Getter); 5] = [
    ("wpm_bn", false, |r| r.wpm_bn.mean),
    ("kspc_bn", false, |r| r.kspc_bn.mean),
    ("er_bn", true, |r| r.er_bn.mean),
    ("msder_bn", true, |r| r.msder_bn.mean),
    ("total_error_rate", true, |r| r.total_error_rate.mean),
];

/// Long-format differential report: one line per technique and metric, with
/// `delta = proposed - naive`.
pub fn write_comparison(rows: &[ComparisonRow], format: ReportFormat) -> Vec<u8> {
    #[derive(Serialize)]
    struct JsonComparison<'a> {
        technique: &'a str,
        metric: &'a str,
        proposed: f64,
        naive: f64,
        delta: f64,
    }

    let entries = rows.iter().flat_map(|row| {
        COMPARED.iter().map(move |&(metric, is_rate, get)| {
            let proposed = get(&row.proposed);
            let naive = get(&row.naive);
            (row.technique_id.as_str(), metric, is_rate, proposed, naive)
        })
    });

    match format {
        ReportFormat::Csv => csv_bytes(
            &["technique", "metric", "proposed", "naive", "delta"],
            entries.map(|(technique, metric, is_rate, proposed, naive)| {
                let show = if is_rate { pct } else { num };
                vec![
                    technique.to_owned(),
                    metric.to_owned(),
                    show(proposed),
                    show(naive),
                    show(round2(proposed) - round2(naive)),
                ]
            }),
        ),
        ReportFormat::Json => {
            let rows: Vec<JsonComparison> = entries
                .map(|(technique, metric, _, proposed, naive)| JsonComparison {
                    technique,
                    metric,
                    proposed: round2(proposed),
                    naive: round2(naive),
                    delta: round2(round2(proposed) - round2(naive)),
                })
                .collect();
            json_bytes(&rows)
        }
    }
}
