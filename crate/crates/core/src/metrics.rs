//! Speed, efficiency and error metrics over output streams.
//!
//! With `|IS|` keystrokes, a transcription of `|OS_T|` basic characters
//! against a presented phrase of `|OS_P|`, `S` seconds from first to last
//! keystroke and `w` characters per word:
//!
//! ```text
//! WPM   = (|OS_T| - 1) / S * 60 / w
//! KSPC  = |IS| / |OS_T|
//! ER    = INF / |OS_T| * 100
//! MSDER = MSD / max(|OS_P|, |OS_T|) * 100
//! TER   = (INF + IF) / (C + INF + IF) * 100
//! ```
//!
//! All values are kept at full precision; rounding happens in the reports.

use std::collections::BTreeMap;

use crate::msd::{cluster_alignment, msd, CostModel, TechniqueProfile};
use crate::script::{segment_graphemes, to_output_stream};
use crate::sessionio::SessionRecord;
use crate::streams::{
    build_input_stream, classify_keystrokes, estimate_keystrokes, KeyKind, StreamError,
};

/// Average Bengali word length in characters, spaces included.
pub const DEFAULT_WORD_LENGTH: f64 = 5.11;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("session duration is zero but more than one character was entered")]
    ZeroDuration,
    #[error("transcribed text is empty")]
    EmptyTranscription,
    #[error("presented and transcribed text are both empty")]
    EmptyStreams,
    #[error("no sessions to aggregate")]
    EmptyGroup,
    #[error("word length must be positive, got {0}")]
    InvalidWordLength(f64),
}

/// Words per minute over the transcribed output stream.
///
/// The first character is never timed, hence `|OS_T| - 1`.
///
/// ```
/// let wpm = abugida::wpm_bn(13, 20.0, abugida::DEFAULT_WORD_LENGTH).unwrap();
/// assert!((wpm - 7.05).abs() < 0.005);
/// ```
pub fn wpm_bn(os_t_len: usize, s: f64, word_len: f64) -> Result<f64, MetricsError> {
    if word_len.is_nan() || word_len <= 0.0 {
        return Err(MetricsError::InvalidWordLength(word_len));
    }
    match os_t_len {
        0 => Err(MetricsError::EmptyTranscription),
        1 => Ok(0.0),
        _ if s.is_nan() || s <= 0.0 => Err(MetricsError::ZeroDuration),
        n => Ok((n - 1) as f64 / s * 60.0 * (1.0 / word_len)),
    }
}

pub fn kspc_bn(is_len: usize, os_t_len: usize) -> Result<f64, MetricsError> {
    if os_t_len == 0 {
        return Err(MetricsError::EmptyTranscription);
    }
    Ok(is_len as f64 / os_t_len as f64)
}

pub fn er_bn(inf: usize, os_t_len: usize) -> Result<f64, MetricsError> {
    if os_t_len == 0 {
        return Err(MetricsError::EmptyTranscription);
    }
    Ok(inf as f64 / os_t_len as f64 * 100.0)
}

pub fn msder_bn(msd: f64, os_p_len: usize, os_t_len: usize) -> Result<f64, MetricsError> {
    let longer = os_p_len.max(os_t_len);
    if longer == 0 {
        return Err(MetricsError::EmptyStreams);
    }
    Ok(msd / longer as f64 * 100.0)
}

/// Unified total error rate, all counts in output-stream characters.
pub fn total_error_rate(c: usize, inf: usize, if_: usize) -> Result<f64, MetricsError> {
    let total = c + inf + if_;
    if total == 0 {
        return Err(MetricsError::EmptyTranscription);
    }
    Ok((inf + if_) as f64 / total as f64 * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub word_length_chars: f64,
    pub msd_cost_mode: CostModel,
    /// Count grapheme clusters instead of basic characters.
    pub naive_mode: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            word_length_chars: DEFAULT_WORD_LENGTH,
            msd_cost_mode: CostModel::PaperLiteral,
            naive_mode: false,
        }
    }
}

/// The raw quantities behind one session's metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Intermediates {
    pub is_len: usize,
    pub os_t_len: usize,
    pub os_p_len: usize,
    pub inf: usize,
    pub msd: f64,
    pub duration_s: f64,
    pub correct: usize,
    pub incorrect_fixed: usize,
    pub fixes: usize,
    /// False when the log could not be replayed and IF was estimated.
    pub replayed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionMetrics {
    pub session_id: String,
    pub technique_id: String,
    pub participant_id: String,
    pub wpm_bn: f64,
    pub kspc_bn: f64,
    pub er_bn: f64,
    pub msder_bn: f64,
    pub total_error_rate: f64,
    pub intermediates: Intermediates,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("session `{session_id}`: {kind}")]
pub struct AnalysisError {
    pub session_id: String,
    pub kind: AnalysisErrorKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisErrorKind {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl SessionMetrics {
    fn evaluate(
        session: &SessionRecord,
        q: Intermediates,
        word_length: f64,
    ) -> Result<Self, MetricsError> {
        Ok(SessionMetrics {
            session_id: session.session_id.clone(),
            technique_id: session.technique_id.clone(),
            participant_id: session.participant_id.clone(),
            wpm_bn: wpm_bn(q.os_t_len, q.duration_s, word_length)?,
            kspc_bn: kspc_bn(q.is_len, q.os_t_len)?,
            er_bn: er_bn(q.inf, q.os_t_len)?,
            msder_bn: msder_bn(q.msd, q.os_p_len, q.os_t_len)?,
            total_error_rate: total_error_rate(q.correct, q.inf, q.incorrect_fixed)?,
            intermediates: q,
        })
    }
}

/// Runs the full pipeline for one session: output streams, input stream,
/// alignment, keystroke taxonomy and the five metrics.
pub fn analyze_session(
    session: &SessionRecord,
    profile: &TechniqueProfile,
    cfg: &MetricConfig,
) -> Result<SessionMetrics, AnalysisError> {
    if cfg.naive_mode {
        return naive_metrics(session, cfg);
    }
    let wrap = |kind: AnalysisErrorKind| AnalysisError {
        session_id: session.session_id.clone(),
        kind,
    };

    let os_p = to_output_stream(&session.presented);
    let os_t = to_output_stream(&session.transcribed);
    let is = build_input_stream(session.events.clone()).map_err(|e| wrap(e.into()))?;
    let alignment = msd(&os_t, &os_p, profile, cfg.msd_cost_mode);
    let inf = session.inf_override.unwrap_or(alignment.inf);

    let (taxonomy, replayed) = match classify_keystrokes(is.events(), profile, &os_t, inf) {
        Ok(t) => (t, true),
        Err(err) => {
            log::debug!("session `{}`: {err}; estimating IF", session.session_id);
            (estimate_keystrokes(is.events(), &os_t, inf), false)
        }
    };

    let q = Intermediates {
        is_len: is.len(),
        os_t_len: os_t.len(),
        os_p_len: os_p.len(),
        inf,
        msd: alignment.distance,
        duration_s: is.duration_s(),
        correct: taxonomy.correct,
        incorrect_fixed: taxonomy.incorrect_fixed,
        fixes: taxonomy.fixes,
        replayed,
    };
    SessionMetrics::evaluate(session, q, cfg.word_length_chars).map_err(|e| wrap(e.into()))
}

/// The same pipeline with grapheme clusters counted as characters.
///
/// Each backspace is taken to erase one cluster, and INF comes from a plain
/// cluster-level alignment; the log's INF override is ignored since it is
/// expressed in basic characters.
pub fn naive_metrics(
    session: &SessionRecord,
    cfg: &MetricConfig,
) -> Result<SessionMetrics, AnalysisError> {
    let wrap = |kind: AnalysisErrorKind| AnalysisError {
        session_id: session.session_id.clone(),
        kind,
    };

    let p = segment_graphemes(&session.presented);
    let t = segment_graphemes(&session.transcribed);
    let is = build_input_stream(session.events.clone()).map_err(|e| wrap(e.into()))?;
    let alignment = cluster_alignment(&t, &p);
    let inf = alignment.inf;
    let backspaces = is
        .events()
        .iter()
        .filter(|e| e.kind == KeyKind::Backspace)
        .count();
    let fixes = is
        .events()
        .iter()
        .filter(|e| matches!(e.kind, KeyKind::Backspace | KeyKind::Edit))
        .count();

    let q = Intermediates {
        is_len: is.len(),
        os_t_len: t.len(),
        os_p_len: p.len(),
        inf,
        msd: alignment.distance,
        duration_s: is.duration_s(),
        correct: t.len().saturating_sub(inf),
        incorrect_fixed: backspaces,
        fixes,
        replayed: false,
    };
    SessionMetrics::evaluate(session, q, cfg.word_length_chars).map_err(|e| wrap(e.into()))
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    /// Values are sorted first so the result does not depend on input order.
    fn of(values: &mut [f64]) -> Stat {
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            let mut sq: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
            sq.sort_by(f64::total_cmp);
            (sq.iter().sum::<f64>() / (n - 1.0)).sqrt()
        };
        Stat { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub technique_id: String,
    pub n_sessions: usize,
    pub wpm_bn: Stat,
    pub kspc_bn: Stat,
    pub er_bn: Stat,
    pub msder_bn: Stat,
    pub total_error_rate: Stat,
}

/// Per-technique summary, rows ordered by technique id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

/// Groups sessions by technique and summarizes each metric.
pub fn aggregate(results: &[SessionMetrics]) -> Result<SummaryTable, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    let mut groups: BTreeMap<&str, Vec<&SessionMetrics>> = BTreeMap::new();
    for r in results {
        groups.entry(r.technique_id.as_str()).or_default().push(r);
    }
    let rows = groups
        .into_iter()
        .map(|(technique, members)| {
            let stat = |f: fn(&SessionMetrics) -> f64| {
                let mut values: Vec<f64> = members.iter().map(|m| f(m)).collect();
                Stat::of(&mut values)
            };
            SummaryRow {
                technique_id: technique.to_owned(),
                n_sessions: members.len(),
                wpm_bn: stat(|m| m.wpm_bn),
                kspc_bn: stat(|m| m.kspc_bn),
                er_bn: stat(|m| m.er_bn),
                msder_bn: stat(|m| m.msder_bn),
                total_error_rate: stat(|m| m.total_error_rate),
            }
        })
        .collect();
    Ok(SummaryTable { rows })
}
