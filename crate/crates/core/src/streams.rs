//! Keystroke logs: input streams, session timing and a linear editor replay.

use std::fmt;
use std::str::FromStr;

use crate::msd::{BackspaceGranularity, TechniqueProfile};
use crate::script::{OutputStream, ScriptTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyKind {
    /// Produces ordinary text.
    Char,
    /// A dedicated key producing a multi-character conjunct or glyph.
    Unit,
    Backspace,
    /// Any other editing key (cursor movement, delete-forward, ...).
    Edit,
    /// Shift, Ctrl and friends.
    Modifier,
}

impl KeyKind {
    /// The short code used in session logs.
    pub fn code(self) -> &'static str {
        match self {
            KeyKind::Char => "char",
            KeyKind::Unit => "unit",
            KeyKind::Backspace => "bksp",
            KeyKind::Edit => "edit",
            KeyKind::Modifier => "mod",
        }
    }

    pub fn produces_text(self) -> bool {
        matches!(self, KeyKind::Char | KeyKind::Unit)
    }
}

impl fmt::Display for KeyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for KeyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "char" => KeyKind::Char,
            "unit" => KeyKind::Unit,
            "bksp" => KeyKind::Backspace,
            "edit" => KeyKind::Edit,
            "mod" => KeyKind::Modifier,
            other => {
                return Err(format!(
                    "unknown event kind `{other}` (expected char|unit|bksp|edit|mod)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KeyEvent {
    /// Milliseconds since session start.
    pub t_ms: u64,
    pub kind: KeyKind,
    /// Text produced by the key; empty for non-text keys.
    pub payload: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EventError {
    #[error("{kind} events must have an empty payload")]
    UnexpectedPayload { kind: KeyKind },
    #[error("{kind} payload `{payload}` has {constituents} basic character(s); at least {required} required")]
    ShortPayload {
        kind: KeyKind,
        payload: String,
        constituents: usize,
        required: usize,
    },
}

impl KeyEvent {
    pub fn new(t_ms: u64, kind: KeyKind, payload: impl Into<String>) -> Self {
        KeyEvent {
            t_ms,
            kind,
            payload: payload.into(),
        }
    }

    pub fn char(t_ms: u64, text: impl Into<String>) -> Self {
        Self::new(t_ms, KeyKind::Char, text)
    }

    pub fn unit(t_ms: u64, text: impl Into<String>) -> Self {
        Self::new(t_ms, KeyKind::Unit, text)
    }

    pub fn backspace(t_ms: u64) -> Self {
        Self::new(t_ms, KeyKind::Backspace, "")
    }

    pub fn edit(t_ms: u64) -> Self {
        Self::new(t_ms, KeyKind::Edit, "")
    }

    pub fn modifier(t_ms: u64) -> Self {
        Self::new(t_ms, KeyKind::Modifier, "")
    }

    /// Checks the payload against the event kind.
    pub fn validate(&self) -> Result<(), EventError> {
        let required = match self.kind {
            KeyKind::Char => 1,
            KeyKind::Unit => 2,
            kind => {
                return if self.payload.is_empty() {
                    Ok(())
                } else {
                    Err(EventError::UnexpectedPayload { kind })
                };
            }
        };
        let constituents = ScriptTable::current().to_output_stream(&self.payload).len();
        if constituents < required {
            return Err(EventError::ShortPayload {
                kind: self.kind,
                payload: self.payload.clone(),
                constituents,
                required,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StreamError {
    #[error("session has no keystroke events")]
    EmptySession,
}

/// Every keystroke of a trial, time ordered. Its length is `|IS|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputStream {
    events: Vec<KeyEvent>,
}

impl InputStream {
    pub fn events(&self) -> &[KeyEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// Always false; construction rejects empty sessions.
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Seconds from the first keystroke to the last.
    pub fn duration_s(&self) -> f64 {
        let first = self.events.first().map_or(0, |e| e.t_ms);
        let last = self.events.last().map_or(0, |e| e.t_ms);
        (last - first) as f64 / 1000.0
    }
}

/// Wraps the events as an input stream, stable-sorting by timestamp.
pub fn build_input_stream(events: Vec<KeyEvent>) -> Result<InputStream, StreamError> {
    if events.is_empty() {
        return Err(StreamError::EmptySession);
    }
    let mut events = events;
    events.sort_by_key(|e| e.t_ms);
    Ok(InputStream { events })
}

pub fn session_duration_s(is: &InputStream) -> f64 {
    is.duration_s()
}

/// Whether timestamps never decrease.
pub fn is_time_ordered(events: &[KeyEvent]) -> bool {
    events.windows(2).all(|w| w[0].t_ms <= w[1].t_ms)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("event {index}: backspace on empty text")]
    Underflow { index: usize },
    #[error("event {index}: unit key payload `{payload}` is not an atomic unit of the technique")]
    UnknownUnit { index: usize, payload: String },
    #[error("event {index}: edit keys move the cursor and cannot be replayed linearly")]
    CursorEdit { index: usize },
}

/// Outcome of a linear replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub text: String,
    /// Basic characters appended over the whole session.
    pub produced: usize,
    /// Basic characters appended and later erased.
    pub erased: usize,
}

/// Runs the events through an append-only editor with backspace.
pub fn replay(events: &[KeyEvent], profile: &TechniqueProfile) -> Result<Replay, ReplayError> {
    let table = ScriptTable::current();
    let mut buffer: Vec<char> = Vec::new();
    let mut produced = 0;
    let mut erased = 0;

    for (index, event) in events.iter().enumerate() {
        match event.kind {
            KeyKind::Char | KeyKind::Unit => {
                let normalized = table.normalize(&event.payload);
                if event.kind == KeyKind::Unit && !profile.has_unit(&normalized) {
                    return Err(ReplayError::UnknownUnit {
                        index,
                        payload: event.payload.clone(),
                    });
                }
                let chars = table.to_output_stream(&normalized).codepoints();
                produced += chars.len();
                buffer.extend(chars);
            }
            KeyKind::Backspace => {
                if buffer.is_empty() {
                    return Err(ReplayError::Underflow { index });
                }
                let n = match profile.backspace_granularity {
                    BackspaceGranularity::Basic => 1,
                    BackspaceGranularity::Unit => profile.trailing_unit_len(&buffer).unwrap_or(1),
                };
                buffer.truncate(buffer.len() - n);
                erased += n;
            }
            KeyKind::Edit => return Err(ReplayError::CursorEdit { index }),
            KeyKind::Modifier => {}
        }
    }

    let text: String = buffer.into_iter().collect();
    Ok(Replay {
        text: table.normalize(&text),
        produced,
        erased,
    })
}

/// The transcription the events produce under the technique's editor rules.
///
/// ```
/// use abugida::{replay_transcription, KeyEvent, TechniqueProfile};
///
/// let events = [KeyEvent::char(0, "ক"), KeyEvent::char(150, "া"), KeyEvent::backspace(300)];
/// let profile = TechniqueProfile::character_only("plain");
/// assert_eq!(replay_transcription(&events, &profile).unwrap(), "ক");
/// ```
pub fn replay_transcription(
    events: &[KeyEvent],
    profile: &TechniqueProfile,
) -> Result<String, ReplayError> {
    replay(events, profile).map(|r| r.text)
}

/// Character-level breakdown of a trial.
///
/// `correct` is `|OS_T| - INF`, saturating at zero when the transcription
/// misses more characters than it contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KeystrokeTaxonomy {
    pub correct: usize,
    pub incorrect_fixed: usize,
    pub fixes: usize,
    pub incorrect_not_fixed: usize,
}

fn fix_count(events: &[KeyEvent]) -> usize {
    events
        .iter()
        .filter(|e| matches!(e.kind, KeyKind::Backspace | KeyKind::Edit))
        .count()
}

pub fn classify_keystrokes(
    events: &[KeyEvent],
    profile: &TechniqueProfile,
    os_t: &OutputStream,
    inf: usize,
) -> Result<KeystrokeTaxonomy, ReplayError> {
    let replay = replay(events, profile)?;
    Ok(KeystrokeTaxonomy {
        correct: os_t.len().saturating_sub(inf),
        incorrect_fixed: replay.erased,
        fixes: fix_count(events),
        incorrect_not_fixed: inf,
    })
}

/// Taxonomy for logs the linear editor cannot replay.
///
/// Erased characters are estimated as everything produced that did not
/// survive into the transcription, which is exact whenever a linear replay
/// would have reproduced it.
pub fn estimate_keystrokes(
    events: &[KeyEvent],
    os_t: &OutputStream,
    inf: usize,
) -> KeystrokeTaxonomy {
    let table = ScriptTable::current();
    let produced: usize = events
        .iter()
        .filter(|e| e.kind.produces_text())
        .map(|e| table.to_output_stream(&e.payload).len())
        .sum();
    KeystrokeTaxonomy {
        correct: os_t.len().saturating_sub(inf),
        incorrect_fixed: produced.saturating_sub(os_t.len()),
        fixes: fix_count(events),
        incorrect_not_fixed: inf,
    }
}
