//! Text-entry performance metrics for Bengali.
//!
//! Bengali conjuncts and vowel-sign glyphs render as one visual unit but are
//! typed, and often erased, one constituent character at a time. This crate
//! measures speed and accuracy over *output streams*, the flattened
//! constituent characters of a phrase, so that techniques with different
//! key assignments and editing behaviour can be compared on one scale.
//!
//! ```
//! use abugida::{msd, to_output_stream, er_bn, msder_bn, CostModel, TechniqueProfile};
//!
//! let presented = to_output_stream("ক্ষণিকের অতিথি");
//! let transcribed = to_output_stream("ক্ষণিকের অতথি");
//! assert_eq!((presented.len(), transcribed.len()), (14, 13));
//!
//! let profile = TechniqueProfile::character_only("demo");
//! let aligned = msd(&transcribed, &presented, &profile, CostModel::PaperLiteral);
//! assert_eq!(aligned.distance, 1.0);
//!
//! let er = er_bn(aligned.inf, transcribed.len()).unwrap();
//! let msder = msder_bn(aligned.distance, presented.len(), transcribed.len()).unwrap();
//! assert_eq!(format!("{er:.2}% {msder:.2}%"), "7.69% 7.14%");
//! ```
//!
//! The guide under `book/` walks through each concept; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod metrics;
pub mod msd;
pub mod report;
pub mod script;
pub mod sessionio;
pub mod streams;

pub use metrics::{
    aggregate, analyze_session, er_bn, kspc_bn, msder_bn, naive_metrics, total_error_rate, wpm_bn,
    AnalysisError, AnalysisErrorKind, Intermediates, MetricConfig, MetricsError, SessionMetrics,
    Stat, SummaryRow, SummaryTable, DEFAULT_WORD_LENGTH,
};
pub use msd::{
    atomic_unit_segment, cluster_alignment, inf_from_alignment, msd, AlignmentResult,
    BackspaceGranularity, CostModel, EditKind, EditOp, ProfileError, Segment, TechniqueProfile,
};
pub use report::{
    compare_summaries, write_analysis, write_comparison, write_report, ComparisonRow, ReportFormat,
};
pub use script::{
    classify_codepoint, decode_utf8, normalize, normalize_bytes, recompose, segment_graphemes,
    to_output_stream, BasicChar, CodepointClass, EncodingError, GraphemeCluster, OutputStream,
    ScriptTable, TableError,
};
pub use sessionio::{
    corpus_stats, corpus_word_length, load_phrase_set, parse_session_log, parse_technique_profile,
    write_session_log, write_technique_profile, CorpusStats, EmptyCorpus, ParseError, PhraseSet,
    ProfileParseError, SessionRecord,
};
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/output-streams.md")]
    mod output_streams {}
    #[doc = include_str!("../../../book/src/input-streams.md")]
    mod input_streams {}
    #[doc = include_str!("../../../book/src/distance.md")]
    mod distance {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

pub use streams::{
    build_input_stream, classify_keystrokes, estimate_keystrokes, replay, replay_transcription,
    session_duration_s, EventError, InputStream, KeyEvent, KeyKind, KeystrokeTaxonomy, Replay,
    ReplayError, StreamError,
};
