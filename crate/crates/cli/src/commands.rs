use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use abugida::{
    aggregate, analyze_session, compare_summaries, load_phrase_set, normalize, parse_session_log,
    parse_technique_profile, replay_transcription, segment_graphemes, to_output_stream,
    write_analysis, write_comparison, write_report, CostModel, MetricConfig, SessionMetrics,
    SessionRecord, TechniqueProfile, DEFAULT_WORD_LENGTH,
};
use rayon::prelude::*;

use crate::{Failure, LogInput, MetricFlags, OutputFlags};

type Profiles = BTreeMap<String, TechniqueProfile>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_log(path: &Path) -> Result<Vec<SessionRecord>, Failure> {
    let bytes = read(path)?;
    let sessions = parse_session_log(&bytes)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    if sessions.is_empty() {
        return Err(Failure::input(format!(
            "{}: log contains no sessions",
            path.display()
        )));
    }
    Ok(sessions)
}

/// Every `*.json` file in `dir`, keyed by technique id.
fn load_profiles(dir: &Path) -> Result<Profiles, Failure> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| Failure::profile(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();

    let mut profiles = Profiles::new();
    for path in paths {
        let bytes = std::fs::read(&path)
            .map_err(|e| Failure::profile(format!("{}: {e}", path.display())))?;
        let profile = parse_technique_profile(&bytes)
            .map_err(|e| Failure::profile(format!("{}: {e}", path.display())))?;
        if profiles.contains_key(&profile.technique_id) {
            return Err(Failure::profile(format!(
                "{}: technique `{}` is declared twice",
                path.display(),
                profile.technique_id
            )));
        }
        profiles.insert(profile.technique_id.clone(), profile);
    }
    Ok(profiles)
}

fn resolve<'a>(
    sessions: &'a [SessionRecord],
    profiles: &'a Profiles,
) -> Result<Vec<(&'a SessionRecord, &'a TechniqueProfile)>, Failure> {
    let mut missing = Vec::new();
    let mut resolved = Vec::with_capacity(sessions.len());
    for s in sessions {
        match profiles.get(&s.technique_id) {
            Some(p) => resolved.push((s, p)),
            None => missing.push(format!("`{}` (session `{}`)", s.technique_id, s.session_id)),
        }
    }
    if missing.is_empty() {
        Ok(resolved)
    } else {
        Err(Failure::profile(format!(
            "no profile for {}",
            missing.join(", ")
        )))
    }
}

fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), Failure> {
    let result = match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| e.to_string())
        }
    };
    result.map_err(Failure::input)
}

/// Analyzes sessions on a pool of `jobs` threads. Results keep log order, and
/// the first failing session in that order is the one reported.
fn analyze_all(
    pairs: &[(&SessionRecord, &TechniqueProfile)],
    cfg: &MetricConfig,
    jobs: u16,
) -> Result<Vec<SessionMetrics>, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs as usize)
        .build()
        .map_err(|e| Failure::input(format!("cannot start worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(s, p)| analyze_session(s, p, cfg))
            .collect()
    });
    results
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::input(e.to_string()))
}

fn config(metrics: &MetricFlags, naive_mode: bool) -> MetricConfig {
    MetricConfig {
        word_length_chars: metrics.word_length,
        msd_cost_mode: metrics.msd_cost_mode,
        naive_mode,
    }
}

pub fn analyze(
    input: &LogInput,
    metrics: &MetricFlags,
    output: &OutputFlags,
    per_session: bool,
) -> Result<(), Failure> {
    let sessions = load_log(&input.log)?;
    let profiles = load_profiles(&input.profiles)?;
    let pairs = resolve(&sessions, &profiles)?;
    let results = analyze_all(&pairs, &config(metrics, false), metrics.jobs)?;
    let unreplayed = results.iter().filter(|m| !m.intermediates.replayed).count();
    if unreplayed > 0 {
        log::warn!("{unreplayed} session(s) could not be replayed; their IF is estimated");
    }
    let table = aggregate(&results).map_err(|e| Failure::input(e.to_string()))?;
    let bytes = if per_session {
        write_analysis(&results, &table, output.format)
    } else {
        write_report(&table, output.format)
    };
    emit(&bytes, output.output.as_deref())
}

pub fn compare_naive(
    input: &LogInput,
    metrics: &MetricFlags,
    output: &OutputFlags,
) -> Result<(), Failure> {
    let sessions = load_log(&input.log)?;
    let profiles = load_profiles(&input.profiles)?;
    let pairs = resolve(&sessions, &profiles)?;
    let proposed = analyze_all(&pairs, &config(metrics, false), metrics.jobs)?;
    let naive = analyze_all(&pairs, &config(metrics, true), metrics.jobs)?;
    let summarize = |r: &[SessionMetrics]| aggregate(r).map_err(|e| Failure::input(e.to_string()));
    let rows = compare_summaries(&summarize(&proposed)?, &summarize(&naive)?);
    emit(
        &write_comparison(&rows, output.format),
        output.output.as_deref(),
    )
}

pub fn decompose(phrase: &str, graphemes: bool) -> Result<(), Failure> {
    let mut out = String::new();
    if graphemes {
        let clusters = segment_graphemes(phrase);
        for c in &clusters {
            let codepoints: Vec<String> = c
                .text
                .chars()
                .map(|cp| format!("U+{:04X}", cp as u32))
                .collect();
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                c.text,
                c.constituent_count,
                codepoints.join(" ")
            ));
        }
        out.push_str(&format!("clusters\t{}\n", clusters.len()));
    } else {
        let os = to_output_stream(phrase);
        for bc in os.iter() {
            out.push_str(&format!(
                "U+{:04X}\t{}\t{}\n",
                bc.codepoint as u32, bc.codepoint, bc.class
            ));
        }
        out.push_str(&format!("length\t{}\n", os.len()));
    }
    emit(out.as_bytes(), None)
}

pub fn msd(a: &str, b: &str, profile: Option<&Path>, mode: CostModel) -> Result<(), Failure> {
    let profile = match profile {
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| Failure::profile(format!("{}: {e}", path.display())))?;
            parse_technique_profile(&bytes)
                .map_err(|e| Failure::profile(format!("{}: {e}", path.display())))?
        }
        None => TechniqueProfile::character_only("cli"),
    };
    let r = abugida::msd(&to_output_stream(a), &to_output_stream(b), &profile, mode);
    let mut out = format!("distance\t{}\ninf\t{}\n", r.distance, r.inf);
    for op in &r.script {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            op.kind, op.a_pos, op.b_pos, op.source, op.target, op.cost
        ));
    }
    emit(out.as_bytes(), None)
}

pub fn corpus_stats(path: &Path) -> Result<(), Failure> {
    let bytes = read(path)?;
    let set = load_phrase_set(&bytes, &path.display().to_string())
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let stats = abugida::corpus_stats(&set)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let out = format!(
        "phrases\t{}\nwords\t{}\nchars\t{}\navg_word_length\t{:.4}\ndelta_vs_default\t{:+.4}\n",
        stats.phrases,
        stats.words,
        stats.chars,
        stats.avg_word_length,
        stats.avg_word_length - DEFAULT_WORD_LENGTH
    );
    emit(out.as_bytes(), None)
}

pub fn validate_log(input: &LogInput) -> Result<(), Failure> {
    let sessions = load_log(&input.log)?;
    let profiles = load_profiles(&input.profiles)?;
    let pairs = resolve(&sessions, &profiles)?;

    let mut out = String::new();
    let mut bad = 0;
    for (s, profile) in pairs {
        match replay_transcription(&s.events, profile) {
            Ok(text) if normalize(&text) == s.transcribed => {
                out.push_str(&format!("MATCH\t{}\n", s.session_id));
            }
            Ok(text) => {
                bad += 1;
                out.push_str(&format!(
                    "MISMATCH\t{}\treplayed {:?}\trecorded {:?}\n",
                    s.session_id,
                    normalize(&text),
                    s.transcribed
                ));
            }
            Err(e) => {
                bad += 1;
                out.push_str(&format!("ERROR\t{}\t{e}\n", s.session_id));
            }
        }
    }
    emit(out.as_bytes(), None)?;
    if bad > 0 {
        return Err(Failure::mismatch(format!(
            "{bad} of {} session(s) did not replay to their transcription",
            sessions.len()
        )));
    }
    Ok(())
}
