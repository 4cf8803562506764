//! Codepoint classification and the output-stream representation of text.
//!
//! An output stream lists the constituent characters of a phrase: every
//! conjunct (`ন্ড` = `ন` + `্` + `ড`) and every consonant-with-vowel-sign
//! glyph (`কা` = `ক` + `া`) is flattened into its basic characters. The
//! grapheme segmentation in this module is the opposite view, grouping those
//! characters back into the visual units a reader perceives.
//!
//! Classification and composition data live in a [`ScriptTable`]. The
//! built-in table covers the Bengali block; a replacement can be parsed from
//! the plain-text table format and installed process-wide with
//! [`ScriptTable::install`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use unicode_normalization::UnicodeNormalization;

const BENGALI_TABLE: &str = include_str!("../data/bengali.table");

const ZERO_WIDTH_JOINER: char = '\u{200D}';

/// Character class of a single Unicode scalar value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CodepointClass {
    IndependentVowel,
    Consonant,
    DependentVowelSign,
    Virama,
    ModifierSign,
    Digit,
    Whitespace,
    ZeroWidthControl,
    Other,
}

impl CodepointClass {
    pub const ALL: [CodepointClass; 9] = [
        CodepointClass::IndependentVowel,
        CodepointClass::Consonant,
        CodepointClass::DependentVowelSign,
        CodepointClass::Virama,
        CodepointClass::ModifierSign,
        CodepointClass::Digit,
        CodepointClass::Whitespace,
        CodepointClass::ZeroWidthControl,
        CodepointClass::Other,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            CodepointClass::IndependentVowel => "IndependentVowel",
            CodepointClass::Consonant => "Consonant",
            CodepointClass::DependentVowelSign => "DependentVowelSign",
            CodepointClass::Virama => "Virama",
            CodepointClass::ModifierSign => "ModifierSign",
            CodepointClass::Digit => "Digit",
            CodepointClass::Whitespace => "Whitespace",
            CodepointClass::ZeroWidthControl => "ZeroWidthControl",
            CodepointClass::Other => "Other",
        }
    }

    /// Signs that attach to the preceding visual unit.
    fn is_attaching_mark(self) -> bool {
        matches!(
            self,
            CodepointClass::DependentVowelSign
                | CodepointClass::ModifierSign
                | CodepointClass::Virama
        )
    }
}

impl fmt::Display for CodepointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CodepointClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CodepointClass::ALL
            .into_iter()
            .find(|class| class.tag() == s)
            .ok_or_else(|| format!("unknown class tag `{s}`"))
    }
}

/// Input bytes were not valid UTF-8.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid UTF-8 at byte offset {valid_up_to}")]
pub struct EncodingError {
    pub valid_up_to: usize,
}

/// Decodes UTF-8 text, reporting the first invalid offset.
pub fn decode_utf8(bytes: &[u8]) -> Result<&str, EncodingError> {
    std::str::from_utf8(bytes).map_err(|e| EncodingError {
        valid_up_to: e.valid_up_to(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("line {line}: expected `<codepoint> <class> [<first> <second>]`")]
    Malformed { line: usize },
    #[error("line {line}: invalid codepoint `{text}`")]
    BadCodepoint { line: usize, text: String },
    #[error("line {line}: {message}")]
    BadClass { line: usize, message: String },
    #[error("line {line}: range {lo:04X}..{hi:04X} overlaps an earlier record")]
    Overlap { line: usize, lo: u32, hi: u32 },
    #[error("line {line}: a composition pair needs a single codepoint, not a range")]
    CompositionOnRange { line: usize },
    #[error("line {line}: the pair {first:04X} {second:04X} is already declared")]
    DuplicatePair {
        line: usize,
        first: u32,
        second: u32,
    },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ClassRange {
    lo: u32,
    hi: u32,
    class: CodepointClass,
}

/// Classification ranges plus pairwise compositions for one script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptTable {
    ranges: Vec<ClassRange>,
    compositions: HashMap<(char, char), char>,
}

static INSTALLED: OnceLock<ScriptTable> = OnceLock::new();
static BENGALI: OnceLock<ScriptTable> = OnceLock::new();

impl ScriptTable {
    /// The built-in Bengali table.
    pub fn bengali() -> &'static ScriptTable {
        BENGALI.get_or_init(|| {
            ScriptTable::parse(BENGALI_TABLE).expect("built-in Bengali table is well formed")
        })
    }

    /// Makes `table` the process-wide table returned by [`ScriptTable::current`].
    ///
    /// Only the first installation takes effect; a later call hands the
    /// rejected table back.
    pub fn install(table: ScriptTable) -> Result<(), ScriptTable> {
        INSTALLED.set(table)
    }

    /// The installed table, or the Bengali one when none was installed.
    pub fn current() -> &'static ScriptTable {
        INSTALLED.get().unwrap_or_else(ScriptTable::bengali)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TableError> {
        Self::parse(decode_utf8(bytes)?)
    }

    /// Parses the line-oriented table format. Blank lines and `#` comments
    /// are ignored.
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut ranges: Vec<ClassRange> = Vec::new();
        let mut compositions = HashMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 2 && fields.len() != 4 {
                return Err(TableError::Malformed { line });
            }
            let (lo, hi) = match fields[0].split_once("..") {
                Some((lo, hi)) => (parse_scalar(lo, line)?, parse_scalar(hi, line)?),
                None => {
                    let cp = parse_scalar(fields[0], line)?;
                    (cp, cp)
                }
            };
            if lo > hi {
                return Err(TableError::BadCodepoint {
                    line,
                    text: fields[0].to_owned(),
                });
            }
            let class = fields[1]
                .parse::<CodepointClass>()
                .map_err(|message| TableError::BadClass { line, message })?;
            let (lo_code, hi_code) = (lo as u32, hi as u32);
            if ranges.iter().any(|r| r.lo <= hi_code && lo_code <= r.hi) {
                return Err(TableError::Overlap {
                    line,
                    lo: lo_code,
                    hi: hi_code,
                });
            }
            if fields.len() == 4 {
                if lo != hi {
                    return Err(TableError::CompositionOnRange { line });
                }
                let first = parse_scalar(fields[2], line)?;
                let second = parse_scalar(fields[3], line)?;
                if compositions.insert((first, second), lo).is_some() {
                    return Err(TableError::DuplicatePair {
                        line,
                        first: first as u32,
                        second: second as u32,
                    });
                }
            }
            ranges.push(ClassRange {
                lo: lo_code,
                hi: hi_code,
                class,
            });
        }

        ranges.sort_by_key(|r| r.lo);
        Ok(ScriptTable {
            ranges,
            compositions,
        })
    }

    pub fn classify(&self, cp: char) -> CodepointClass {
        let code = cp as u32;
        let idx = self.ranges.partition_point(|r| r.hi < code);
        match self.ranges.get(idx) {
            Some(r) if r.lo <= code => r.class,
            _ if cp.is_whitespace() => CodepointClass::Whitespace,
            _ => CodepointClass::Other,
        }
    }

    /// Canonical composition followed by the table's pairwise compositions.
    ///
    /// The table pairs are applied after NFC because some of them (the
    /// consonant + nukta letters) are composition exclusions in Unicode.
    pub fn normalize(&self, text: &str) -> String {
        let mut out: Vec<char> = Vec::with_capacity(text.len());
        for c in text.nfc() {
            match out
                .last()
                .and_then(|&prev| self.compositions.get(&(prev, c)))
            {
                Some(&composed) => *out.last_mut().expect("non-empty") = composed,
                None => out.push(c),
            }
        }
        out.into_iter().collect()
    }

    pub fn to_output_stream(&self, text: &str) -> OutputStream {
        let chars = self
            .normalize(text)
            .chars()
            .filter_map(|c| self.basic_char(c))
            .collect();
        OutputStream { chars }
    }

    /// Wraps `cp` as a [`BasicChar`], or `None` for zero-width controls.
    pub fn basic_char(&self, cp: char) -> Option<BasicChar> {
        match self.classify(cp) {
            CodepointClass::ZeroWidthControl => None,
            class => Some(BasicChar {
                codepoint: cp,
                class,
            }),
        }
    }

    /// Splits text into the visual units a reader would count as characters.
    ///
    /// A cluster continues through a consonant + virama + consonant sequence
    /// and absorbs following vowel signs, modifier signs and viramas.
    /// Whitespace and digits always stand alone. Zero-width controls ride
    /// along with the neighbouring cluster; a ZWJ after a virama keeps the
    /// conjunct open, any other control breaks it.
    pub fn segment_graphemes(&self, text: &str) -> Vec<GraphemeCluster> {
        let normalized = self.normalize(text);
        let mut clusters: Vec<GraphemeCluster> = Vec::new();
        // Controls seen before any cluster could take them.
        let mut pending = String::new();
        let mut open = false;
        let mut join_consonant = false;
        let mut last_class: Option<CodepointClass> = None;

        for c in normalized.chars() {
            let class = self.classify(c);
            if class == CodepointClass::ZeroWidthControl {
                if open {
                    clusters.last_mut().expect("open cluster").text.push(c);
                    join_consonant &= c == ZERO_WIDTH_JOINER;
                } else {
                    pending.push(c);
                }
                continue;
            }

            let attach = open
                && (class.is_attaching_mark()
                    || (class == CodepointClass::Consonant && join_consonant));
            if attach {
                let cluster = clusters.last_mut().expect("open cluster");
                cluster.text.push(c);
                cluster.constituent_count += 1;
                join_consonant = class == CodepointClass::Virama
                    && last_class == Some(CodepointClass::Consonant);
            } else {
                let mut text = std::mem::take(&mut pending);
                text.push(c);
                clusters.push(GraphemeCluster {
                    text,
                    constituent_count: 1,
                });
                open = !matches!(class, CodepointClass::Whitespace | CodepointClass::Digit);
                join_consonant = false;
            }
            last_class = Some(class);
        }

        if !pending.is_empty() {
            if let Some(last) = clusters.last_mut() {
                last.text.push_str(&pending);
            }
        }
        clusters
    }
}

fn parse_scalar(text: &str, line: usize) -> Result<char, TableError> {
    let bad = || TableError::BadCodepoint {
        line,
        text: text.to_owned(),
    };
    let hex = text
        .strip_prefix("U+")
        .or_else(|| text.strip_prefix("0x"))
        .unwrap_or(text);
    u32::from_str_radix(hex, 16)
        .ok()
        .and_then(char::from_u32)
        .ok_or_else(bad)
}

/// One constituent character of an output stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasicChar {
    pub codepoint: char,
    pub class: CodepointClass,
}

impl fmt::Display for BasicChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.codepoint)
    }
}

/// A phrase flattened into its constituent characters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct OutputStream {
    chars: Vec<BasicChar>,
}

impl OutputStream {
    pub fn from_chars(chars: Vec<BasicChar>) -> Self {
        debug_assert!(chars
            .iter()
            .all(|c| c.class != CodepointClass::ZeroWidthControl));
        OutputStream { chars }
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn chars(&self) -> &[BasicChar] {
        &self.chars
    }

    pub fn codepoints(&self) -> Vec<char> {
        self.chars.iter().map(|c| c.codepoint).collect()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BasicChar> {
        self.chars.iter()
    }
}

impl<'a> IntoIterator for &'a OutputStream {
    type Item = &'a BasicChar;
    type IntoIter = std::slice::Iter<'a, BasicChar>;

    fn into_iter(self) -> Self::IntoIter {
        self.chars.iter()
    }
}

impl fmt::Display for OutputStream {
    /// Renders as `ক+া+ন+্+ড`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.chars.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A run of text that renders as one visual unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphemeCluster {
    pub text: String,
    pub constituent_count: usize,
}

/// Classifies `cp` with the current table.
pub fn classify_codepoint(cp: char) -> CodepointClass {
    ScriptTable::current().classify(cp)
}

pub fn normalize(text: &str) -> String {
    ScriptTable::current().normalize(text)
}

/// Normalizes raw bytes, rejecting invalid UTF-8.
pub fn normalize_bytes(bytes: &[u8]) -> Result<String, EncodingError> {
    Ok(normalize(decode_utf8(bytes)?))
}

/// Flattens `text` into basic characters with the current table.
///
/// ```
/// let os = abugida::to_output_stream("কান্ড");
/// assert_eq!(os.len(), 5);
/// assert_eq!(os.to_string(), "ক+া+ন+্+ড");
/// ```
pub fn to_output_stream(text: &str) -> OutputStream {
    ScriptTable::current().to_output_stream(text)
}

pub fn segment_graphemes(text: &str) -> Vec<GraphemeCluster> {
    ScriptTable::current().segment_graphemes(text)
}

/// Concatenates the codepoints of a stream back into text.
pub fn recompose(os: &OutputStream) -> String {
    os.iter().map(|c| c.codepoint).collect()
}
