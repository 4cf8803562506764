//! On-disk formats: JSON Lines session logs, JSON technique profiles and
//! plain-text phrase sets.
//!
//! Every text field is normalized on the way in. Parsers are strict: a
//! malformed line fails the whole input with the line number and the JSON
//! path of the offending field.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::msd::{BackspaceGranularity, ProfileError, TechniqueProfile};
use crate::script::{decode_utf8, normalize, to_output_stream, EncodingError};
use crate::streams::{is_time_ordered, KeyEvent, KeyKind};

/// One transcription trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionRecord {
    pub session_id: String,
    pub technique_id: String,
    pub participant_id: String,
    /// The phrase shown to the participant.
    pub presented: String,
    /// The participant's final text.
    pub transcribed: String,
    pub events: Vec<KeyEvent>,
    /// Replaces the alignment-derived INF when present.
    pub inf_override: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {path}: {message}")]
    Field {
        line: usize,
        path: String,
        message: String,
    },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

impl ParseError {
    fn field(line: usize, path: impl Into<String>, message: impl ToString) -> Self {
        ParseError::Field {
            line,
            path: path.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum RawKind {
    #[serde(rename = "char")]
    Char,
    #[serde(rename = "unit")]
    Unit,
    #[serde(rename = "bksp")]
    Backspace,
    #[serde(rename = "edit")]
    Edit,
    #[serde(rename = "mod")]
    Modifier,
}

impl From<RawKind> for KeyKind {
    fn from(raw: RawKind) -> Self {
        match raw {
            RawKind::Char => KeyKind::Char,
            RawKind::Unit => KeyKind::Unit,
            RawKind::Backspace => KeyKind::Backspace,
            RawKind::Edit => KeyKind::Edit,
            RawKind::Modifier => KeyKind::Modifier,
        }
    }
}

impl From<KeyKind> for RawKind {
    fn from(kind: KeyKind) -> Self {
        match kind {
            KeyKind::Char => RawKind::Char,
            KeyKind::Unit => RawKind::Unit,
            KeyKind::Backspace => RawKind::Backspace,
            KeyKind::Edit => RawKind::Edit,
            KeyKind::Modifier => RawKind::Modifier,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    t: u64,
    k: RawKind,
    #[serde(default)]
    p: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSession {
    session_id: String,
    technique_id: String,
    participant_id: String,
    presented: String,
    transcribed: String,
    #[serde(default)]
    inf_override: Option<usize>,
    events: Vec<RawEvent>,
}

/// Parses a JSON Lines session log, one session per non-blank line.
///
/// Events whose timestamps go backwards are stable-sorted, with a warning.
pub fn parse_session_log(bytes: &[u8]) -> Result<Vec<SessionRecord>, ParseError> {
    let text = decode_utf8(bytes)?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_session_line(line, idx + 1)?);
    }
    Ok(records)
}

fn parse_session_line(line: &str, number: usize) -> Result<SessionRecord, ParseError> {
    let de = &mut serde_json::Deserializer::from_str(line);
    let raw: RawSession = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ParseError::field(number, path, e.into_inner())
    })?;

    if raw.events.is_empty() {
        return Err(ParseError::field(
            number,
            "events",
            "session has no keystroke events",
        ));
    }
    let mut events = Vec::with_capacity(raw.events.len());
    for (i, ev) in raw.events.into_iter().enumerate() {
        let event = KeyEvent::new(ev.t, ev.k.into(), normalize(&ev.p));
        event
            .validate()
            .map_err(|e| ParseError::field(number, format!("events[{i}].p"), e))?;
        events.push(event);
    }
    if !is_time_ordered(&events) {
        log::warn!(
            "line {number}: session `{}` has out-of-order timestamps; sorting",
            raw.session_id
        );
        events.sort_by_key(|e| e.t_ms);
    }

    Ok(SessionRecord {
        session_id: raw.session_id,
        technique_id: raw.technique_id,
        participant_id: raw.participant_id,
        presented: normalize(&raw.presented),
        transcribed: normalize(&raw.transcribed),
        events,
        inf_override: raw.inf_override,
    })
}

/// Serializes sessions as JSON Lines, one compact object per line.
pub fn write_session_log(records: &[SessionRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        let raw = RawSession {
            session_id: r.session_id.clone(),
            technique_id: r.technique_id.clone(),
            participant_id: r.participant_id.clone(),
            presented: r.presented.clone(),
            transcribed: r.transcribed.clone(),
            inf_override: r.inf_override,
            events: r
                .events
                .iter()
                .map(|e| RawEvent {
                    t: e.t_ms,
                    k: e.kind.into(),
                    p: e.payload.clone(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut out, &raw).expect("in-memory serialization");
        out.push(b'\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawGranularity {
    Basic,
    Unit,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    technique_id: String,
    atomic_units: Vec<String>,
    unit_keys: BTreeMap<String, String>,
    backspace_granularity: RawGranularity,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileParseError {
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error(transparent)]
    Invalid(#[from] ProfileError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

pub fn parse_technique_profile(bytes: &[u8]) -> Result<TechniqueProfile, ProfileParseError> {
    let text = decode_utf8(bytes)?;
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawProfile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ProfileParseError::Field {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    let granularity = match raw.backspace_granularity {
        RawGranularity::Basic => BackspaceGranularity::Basic,
        RawGranularity::Unit => BackspaceGranularity::Unit,
    };
    Ok(TechniqueProfile::new(
        raw.technique_id,
        raw.atomic_units,
        raw.unit_keys,
        granularity,
    )?)
}

pub fn write_technique_profile(profile: &TechniqueProfile) -> Vec<u8> {
    let raw = RawProfile {
        technique_id: profile.technique_id.clone(),
        atomic_units: profile.atomic_units().iter().cloned().collect(),
        unit_keys: profile.unit_keys.clone(),
        backspace_granularity: match profile.backspace_granularity {
            BackspaceGranularity::Basic => RawGranularity::Basic,
            BackspaceGranularity::Unit => RawGranularity::Unit,
        },
    };
    let mut out = serde_json::to_vec_pretty(&raw).expect("in-memory serialization");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhraseSet {
    pub phrases: Vec<String>,
    pub source: String,
}

/// Reads one phrase per line, skipping blank lines and `#` comments.
pub fn load_phrase_set(bytes: &[u8], source: &str) -> Result<PhraseSet, EncodingError> {
    let text = decode_utf8(bytes)?;
    let phrases: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize)
        .collect();
    if phrases.is_empty() {
        log::warn!("phrase set `{source}` is empty");
    }
    Ok(PhraseSet {
        phrases,
        source: source.to_owned(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("corpus contains no words")]
pub struct EmptyCorpus;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub phrases: usize,
    pub words: usize,
    /// Output-stream characters, spaces included.
    pub chars: usize,
    pub avg_word_length: f64,
}

pub fn corpus_stats(ps: &PhraseSet) -> Result<CorpusStats, EmptyCorpus> {
    let words: usize = ps
        .phrases
        .iter()
        .map(|p| p.split_whitespace().count())
        .sum();
    if words == 0 {
        return Err(EmptyCorpus);
    }
    let chars: usize = ps.phrases.iter().map(|p| to_output_stream(p).len()).sum();
    Ok(CorpusStats {
        phrases: ps.phrases.len(),
        words,
        chars,
        avg_word_length: chars as f64 / words as f64,
    })
}

/// Characters per word across a phrase set, a corpus-specific replacement
/// for [`DEFAULT_WORD_LENGTH`](crate::DEFAULT_WORD_LENGTH).
pub fn corpus_word_length(ps: &PhraseSet) -> Result<f64, EmptyCorpus> {
    corpus_stats(ps).map(|s| s.avg_word_length)
}
