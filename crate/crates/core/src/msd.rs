//! Minimum string distance between output streams.
//!
//! The distance is the classic insert/delete/substitute edit distance over
//! basic characters, extended with whole-unit transitions for the multi-char
//! units a technique can enter or erase in one action. Unit costs depend on
//! the [`CostModel`]:
//!
//! | operation on an `n`-char unit | `PaperLiteral` | `NormalizedUnit` |
//! |-------------------------------|----------------|------------------|
//! | insert / delete               | `1/n`          | `1`              |
//! | substitute by an `m`-char unit| `1/max(n, m)`  | `1`              |
//!
//! Costs are accumulated as integer ticks of `1/L`, `L` being the least common
//! multiple of the unit lengths, so ties and zero checks are exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::script::{GraphemeCluster, OutputStream, ScriptTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BackspaceGranularity {
    /// One backspace erases one basic character.
    #[default]
    Basic,
    /// One backspace erases a trailing atomic unit whole.
    Unit,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileError {
    #[error(
        "atomic unit `{unit}` has {constituents} constituent character(s); at least 2 are required"
    )]
    InvalidUnit { unit: String, constituents: usize },
    #[error("unit key `{key}` produces `{payload}`, which is not a declared atomic unit")]
    UnknownUnitKey { key: String, payload: String },
}

/// What a text-entry technique can enter or edit as a single action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TechniqueProfile {
    pub technique_id: String,
    atomic_units: BTreeSet<String>,
    pub unit_keys: BTreeMap<String, String>,
    pub backspace_granularity: BackspaceGranularity,
    // Decomposed units, longest first.
    unit_chars: Vec<Vec<char>>,
}

impl TechniqueProfile {
    pub fn new<I, S>(
        technique_id: impl Into<String>,
        atomic_units: I,
        unit_keys: BTreeMap<String, String>,
        backspace_granularity: BackspaceGranularity,
    ) -> Result<Self, ProfileError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let table = ScriptTable::current();
        let mut units = BTreeSet::new();
        for unit in atomic_units {
            let normalized = table.normalize(unit.as_ref());
            let constituents = table.to_output_stream(&normalized).len();
            if constituents < 2 {
                return Err(ProfileError::InvalidUnit {
                    unit: unit.as_ref().to_owned(),
                    constituents,
                });
            }
            units.insert(normalized);
        }
        let unit_keys: BTreeMap<String, String> = unit_keys
            .into_iter()
            .map(|(key, payload)| (key, table.normalize(&payload)))
            .collect();
        if let Some((key, payload)) = unit_keys.iter().find(|(_, p)| !units.contains(*p)) {
            return Err(ProfileError::UnknownUnitKey {
                key: key.clone(),
                payload: payload.clone(),
            });
        }

        let mut unit_chars: Vec<Vec<char>> = units
            .iter()
            .map(|u| table.to_output_stream(u).codepoints())
            .collect();
        unit_chars.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

        Ok(TechniqueProfile {
            technique_id: technique_id.into(),
            atomic_units: units,
            unit_keys,
            backspace_granularity,
            unit_chars,
        })
    }

    /// A profile with no atomic units: every edit is per basic character.
    pub fn character_only(technique_id: impl Into<String>) -> Self {
        TechniqueProfile {
            technique_id: technique_id.into(),
            atomic_units: BTreeSet::new(),
            unit_keys: BTreeMap::new(),
            backspace_granularity: BackspaceGranularity::Basic,
            unit_chars: Vec::new(),
        }
    }

    pub fn atomic_units(&self) -> &BTreeSet<String> {
        &self.atomic_units
    }

    pub fn has_unit(&self, text: &str) -> bool {
        self.atomic_units.contains(text)
    }

    /// Length of the longest unit that `chars` ends with, if any.
    pub(crate) fn trailing_unit_len(&self, chars: &[char]) -> Option<usize> {
        self.unit_chars
            .iter()
            .find(|u| chars.ends_with(u))
            .map(Vec::len)
    }

    fn longest_unit_at(&self, chars: &[char]) -> Option<usize> {
        self.unit_chars.iter().position(|u| chars.starts_with(u))
    }
}

/// How whole-unit edits are priced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CostModel {
    /// A whole `n`-char unit edit costs `1/n` in total.
    #[default]
    PaperLiteral,
    /// A whole unit edit costs 1, i.e. `1/n` per constituent character.
    NormalizedUnit,
}

impl FromStr for CostModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(CostModel::PaperLiteral),
            "normalized" => Ok(CostModel::NormalizedUnit),
            other => Err(format!(
                "unknown cost mode `{other}` (expected paper|normalized)"
            )),
        }
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostModel::PaperLiteral => "paper",
            CostModel::NormalizedUnit => "normalized",
        })
    }
}

/// A piece of a stream after the greedy atomic-unit pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Unit { start: usize, len: usize },
    Char { pos: usize },
}

// a segment always covers at least one character
#[allow(clippy::len_without_is_empty)]
impl Segment {
    pub fn start(&self) -> usize {
        match *self {
            Segment::Unit { start, .. } => start,
            Segment::Char { pos } => pos,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Segment::Unit { len, .. } => len,
            Segment::Char { .. } => 1,
        }
    }
}

/// Partitions a stream into leftmost-longest unit occurrences and single
/// characters.
pub fn atomic_unit_segment(os: &OutputStream, profile: &TechniqueProfile) -> Vec<Segment> {
    segment_chars(&os.codepoints(), profile)
}

fn segment_chars(chars: &[char], profile: &TechniqueProfile) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        match profile.longest_unit_at(&chars[pos..]) {
            Some(idx) => {
                let len = profile.unit_chars[idx].len();
                out.push(Segment::Unit { start: pos, len });
                pos += len;
            }
            None => {
                out.push(Segment::Char { pos });
                pos += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditKind {
    Match,
    Substitute,
    Delete,
    Insert,
    UnitSubstitute,
    UnitDelete,
    UnitInsert,
}

impl EditKind {
    pub fn name(self) -> &'static str {
        match self {
            EditKind::Match => "match",
            EditKind::Substitute => "substitute",
            EditKind::Delete => "delete",
            EditKind::Insert => "insert",
            EditKind::UnitSubstitute => "unit-substitute",
            EditKind::UnitDelete => "unit-delete",
            EditKind::UnitInsert => "unit-insert",
        }
    }
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One step of an edit script transforming stream `a` into stream `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct EditOp {
    pub kind: EditKind,
    /// Offset in `a` where the consumed symbols start.
    pub a_pos: usize,
    /// Offset in `b` where the produced symbols start.
    pub b_pos: usize,
    /// Symbols consumed from `a`.
    pub source: String,
    /// Symbols produced for `b`.
    pub target: String,
    pub a_len: usize,
    pub b_len: usize,
    pub cost: f64,
}

/// Result of [`msd`]: the distance, one canonical optimal script, and the
/// number of uncorrected-error characters that script implies.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub distance: f64,
    pub script: Vec<EditOp>,
    pub inf: usize,
}

impl AlignmentResult {
    /// Replays the script over `a`. Returns `None` if the script does not
    /// consume `a` exactly as recorded.
    pub fn apply(&self, a: &[char]) -> Option<Vec<char>> {
        let mut out = Vec::new();
        let mut pos = 0;
        for op in &self.script {
            if op.a_pos != pos {
                return None;
            }
            let consumed: String = a.get(pos..pos + op.a_len)?.iter().collect();
            if consumed != op.source {
                return None;
            }
            out.extend(op.target.chars());
            pos += op.a_len;
        }
        (pos == a.len()).then_some(out)
    }
}

/// Non-match characters in an alignment, counting whole-unit operations by
/// their constituent characters.
pub fn inf_from_alignment(r: &AlignmentResult) -> usize {
    r.script
        .iter()
        .map(|op| match op.kind {
            EditKind::Match => 0,
            EditKind::Substitute | EditKind::Delete | EditKind::Insert => 1,
            EditKind::UnitDelete => op.a_len,
            EditKind::UnitInsert => op.b_len,
            EditKind::UnitSubstitute => op.a_len.max(op.b_len),
        })
        .sum()
}

/// Minimum string distance from `a` (transcribed) to `b` (presented).
///
/// Ties between equally cheap scripts resolve towards match, then
/// substitute, unit-substitute, delete, unit-delete, insert, unit-insert,
/// walking back from the end of both streams.
///
/// ```
/// use abugida::{msd, to_output_stream, CostModel, TechniqueProfile};
///
/// let profile = TechniqueProfile::character_only("plain");
/// let r = msd(
///     &to_output_stream("অতথি"),
///     &to_output_stream("অতিথি"),
///     &profile,
///     CostModel::PaperLiteral,
/// );
/// assert_eq!(r.distance, 1.0);
/// assert_eq!(r.inf, 1);
/// ```
pub fn msd(
    a: &OutputStream,
    b: &OutputStream,
    profile: &TechniqueProfile,
    cost: CostModel,
) -> AlignmentResult {
    let a = a.codepoints();
    let b = b.codepoints();
    let a_units = unit_ends(&a, profile);
    let b_units = unit_ends(&b, profile);
    align(&a, &b, &a_units, &b_units, profile, cost)
}

/// Plain Levenshtein alignment over grapheme clusters, each cluster one
/// symbol.
pub fn cluster_alignment(a: &[GraphemeCluster], b: &[GraphemeCluster]) -> AlignmentResult {
    let a: Vec<&str> = a.iter().map(|c| c.text.as_str()).collect();
    let b: Vec<&str> = b.iter().map(|c| c.text.as_str()).collect();
    let no_units_a = vec![None; a.len() + 1];
    let no_units_b = vec![None; b.len() + 1];
    let profile = TechniqueProfile::character_only("");
    align(
        &a,
        &b,
        &no_units_a,
        &no_units_b,
        &profile,
        CostModel::PaperLiteral,
    )
}

trait Symbol: PartialEq {
    fn push_to(&self, out: &mut String);
}

impl Symbol for char {
    fn push_to(&self, out: &mut String) {
        out.push(*self);
    }
}

impl Symbol for &str {
    fn push_to(&self, out: &mut String) {
        out.push_str(self);
    }
}

/// `ends[i]` holds the length of the unit occurrence ending at offset `i`.
fn unit_ends(chars: &[char], profile: &TechniqueProfile) -> Vec<Option<usize>> {
    let mut ends = vec![None; chars.len() + 1];
    for seg in segment_chars(chars, profile) {
        if let Segment::Unit { start, len } = seg {
            ends[start + len] = Some(len);
        }
    }
    ends
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

struct Pricing {
    scale: u64,
    mode: CostModel,
}

impl Pricing {
    fn new(profile: &TechniqueProfile, mode: CostModel) -> Self {
        let scale = profile
            .unit_chars
            .iter()
            .map(|u| u.len() as u64)
            .fold(1, |acc, n| acc / gcd(acc, n) * n);
        Pricing { scale, mode }
    }

    fn basic(&self) -> u64 {
        self.scale
    }

    /// Whole-unit edit where the larger side has `n` characters.
    fn unit(&self, n: usize) -> u64 {
        match self.mode {
            CostModel::PaperLiteral => self.scale / n as u64,
            CostModel::NormalizedUnit => self.scale,
        }
    }

    fn to_f64(&self, ticks: u64) -> f64 {
        ticks as f64 / self.scale as f64
    }
}

fn align<T: Symbol>(
    a: &[T],
    b: &[T],
    a_units: &[Option<usize>],
    b_units: &[Option<usize>],
    profile: &TechniqueProfile,
    mode: CostModel,
) -> AlignmentResult {
    let pricing = Pricing::new(profile, mode);
    let (n, m) = (a.len(), b.len());
    let width = m + 1;
    let mut dp = vec![0u64; (n + 1) * width];
    let at = |i: usize, j: usize| i * width + j;

    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = u64::MAX;
            if i > 0 && j > 0 {
                let sub = if a[i - 1] == b[j - 1] {
                    0
                } else {
                    pricing.basic()
                };
                best = best.min(dp[at(i - 1, j - 1)] + sub);
            }
            if i > 0 {
                best = best.min(dp[at(i - 1, j)] + pricing.basic());
                if let Some(len) = a_units[i] {
                    best = best.min(dp[at(i - len, j)] + pricing.unit(len));
                }
            }
            if j > 0 {
                best = best.min(dp[at(i, j - 1)] + pricing.basic());
                if let Some(len) = b_units[j] {
                    best = best.min(dp[at(i, j - len)] + pricing.unit(len));
                }
            }
            if let (Some(la), Some(lb)) = (a_units[i], b_units[j]) {
                if a[i - la..i] != b[j - lb..j] {
                    best = best.min(dp[at(i - la, j - lb)] + pricing.unit(la.max(lb)));
                }
            }
            dp[at(i, j)] = best;
        }
    }

    let total = dp[at(n, m)];
    let mut script = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[at(i, j)];
        let mut candidates: Vec<(EditKind, usize, usize, u64)> = Vec::with_capacity(7);
        if i > 0 && j > 0 {
            if a[i - 1] == b[j - 1] {
                candidates.push((EditKind::Match, 1, 1, 0));
            } else {
                candidates.push((EditKind::Substitute, 1, 1, pricing.basic()));
            }
        }
        if let (Some(la), Some(lb)) = (a_units[i], b_units[j]) {
            if a[i - la..i] != b[j - lb..j] {
                candidates.push((EditKind::UnitSubstitute, la, lb, pricing.unit(la.max(lb))));
            }
        }
        if i > 0 {
            candidates.push((EditKind::Delete, 1, 0, pricing.basic()));
        }
        if let Some(la) = a_units[i] {
            candidates.push((EditKind::UnitDelete, la, 0, pricing.unit(la)));
        }
        if j > 0 {
            candidates.push((EditKind::Insert, 0, 1, pricing.basic()));
        }
        if let Some(lb) = b_units[j] {
            candidates.push((EditKind::UnitInsert, 0, lb, pricing.unit(lb)));
        }
        let (kind, da, db, ticks) = candidates
            .into_iter()
            .find(|&(_, da, db, ticks)| dp[at(i - da, j - db)] + ticks == here)
            .expect("every DP cell has an optimal predecessor");

        let mut source = String::new();
        a[i - da..i].iter().for_each(|s| s.push_to(&mut source));
        let mut target = String::new();
        b[j - db..j].iter().for_each(|s| s.push_to(&mut target));
        script.push(EditOp {
            kind,
            a_pos: i - da,
            b_pos: j - db,
            source,
            target,
            a_len: da,
            b_len: db,
            cost: pricing.to_f64(ticks),
        });
        i -= da;
        j -= db;
    }
    script.reverse();

    let mut result = AlignmentResult {
        distance: pricing.to_f64(total),
        script,
        inf: 0,
    };
    result.inf = inf_from_alignment(&result);
    result
}
