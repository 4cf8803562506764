//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are pinned below.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use abugida::{
    analyze_session, er_bn, msd, msder_bn, normalize, parse_session_log, parse_technique_profile,
    recompose, segment_graphemes, to_output_stream, wpm_bn, write_session_log,
    BackspaceGranularity, BasicChar, CodepointClass, CostModel, KeyEvent, MetricConfig,
    OutputStream, SessionRecord, TechniqueProfile,
};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

const WPM_TOL: f64 = 0.005;
const KSPC_TOL: f64 = 0.001;
const RATE_TOL: f64 = 0.01;
const EXAMPLE_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const FLOAT_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_abugida"))
        .args(args)
        .env_remove("ABUGIDA_TABLE")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "abugida {args:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn worked_example() -> Outcome {
    let log = fixture("worked_example.jsonl");
    let profiles = fixture("profiles");
    let session = parse_session_log(&std::fs::read(&log).unwrap())
        .map_err(|e| e.to_string())?
        .remove(0);
    let profile =
        parse_technique_profile(&std::fs::read(profiles.join("dedicated-ksa.json")).unwrap())
            .map_err(|e| e.to_string())?;

    let start = Instant::now();
    let m =
        analyze_session(&session, &profile, &MetricConfig::default()).map_err(|e| e.to_string())?;
    let csv = run_cli(&[
        "analyze",
        log.to_str().unwrap(),
        "--profiles",
        profiles.to_str().unwrap(),
    ])?;
    let elapsed = start.elapsed();

    let q = &m.intermediates;
    let units = session
        .events
        .iter()
        .filter(|e| e.kind == abugida::KeyKind::Unit)
        .count();
    let modifiers = session
        .events
        .iter()
        .filter(|e| e.kind == abugida::KeyKind::Modifier)
        .count();
    check(
        (
            q.os_p_len,
            q.os_t_len,
            q.is_len,
            q.duration_s,
            units,
            modifiers,
        ) == (14, 13, 12, 20.0, 1, 1),
        || {
            format!(
                "encoding: |OS_P|={} |OS_T|={} |IS|={} S={}",
                q.os_p_len, q.os_t_len, q.is_len, q.duration_s
            )
        },
    )?;
    check((m.wpm_bn - 7.05).abs() <= WPM_TOL, || {
        format!("WPM_bn {}", m.wpm_bn)
    })?;
    check((m.kspc_bn - 0.923).abs() <= KSPC_TOL, || {
        format!("KSPC_bn {}", m.kspc_bn)
    })?;
    check((m.er_bn - 7.69).abs() <= RATE_TOL, || {
        format!("ER_bn {}", m.er_bn)
    })?;
    check((m.msder_bn - 7.14).abs() <= RATE_TOL, || {
        format!("MSDER_bn {}", m.msder_bn)
    })?;
    let csv = String::from_utf8(csv).unwrap();
    check(
        csv.lines().nth(1) == Some("dedicated-ksa,7.05,0.92,7.69%,7.14%,7.69%,1"),
        || format!("CLI row {:?}", csv.lines().nth(1)),
    )?;
    check(elapsed < EXAMPLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "WPM {:.5} KSPC {:.5} ER {:.4}% MSDER {:.4}% in {elapsed:.0?}",
        m.wpm_bn, m.kspc_bn, m.er_bn, m.msder_bn
    ))
}

fn decomposition() -> Outcome {
    let os: Vec<char> = to_output_stream("কান্ড").codepoints();
    check(os == ['ক', 'া', 'ন', '্', 'ড'], || {
        format!("কান্ড -> {os:?}")
    })?;
    let clusters = segment_graphemes("কান্ড").len();
    check(clusters == 2, || format!("কান্ড clusters {clusters}"))?;
    let ksa = (to_output_stream("ক্ষ").len(), segment_graphemes("ক্ষ").len());
    check(ksa == (3, 1), || format!("ক্ষ -> {ksa:?}"))?;
    Ok("কান্ড 5 chars / 2 clusters, ক্ষ 3 chars / 1 cluster".into())
}

fn fractional_msd() -> Outcome {
    let unit = "স্তু";
    let n = to_output_stream(unit).len();
    check(n == 4, || format!("{unit} has {n} constituents"))?;
    let profile = TechniqueProfile::new("t", [unit], BTreeMap::new(), BackspaceGranularity::Unit)
        .map_err(|e| e.to_string())?;
    let (a, b) = (to_output_stream("বস্তু"), to_output_stream("ব"));
    let paper = msd(&a, &b, &profile, CostModel::PaperLiteral).distance;
    let normalized = msd(&a, &b, &profile, CostModel::NormalizedUnit).distance;
    check(paper == 0.25, || format!("paper mode {paper}"))?;
    check(normalized == 1.0, || {
        format!("normalized mode {normalized}")
    })?;
    Ok(format!("paper {paper}, normalized {normalized}"))
}

fn symbol_stream(symbols: &[u8]) -> OutputStream {
    OutputStream::from_chars(
        symbols
            .iter()
            .map(|&s| BasicChar {
                codepoint: char::from(b'a' + s),
                class: CodepointClass::Other,
            })
            .collect(),
    )
}

/// Plain recursion over the last symbol of each side, memoized on prefix
/// lengths. Shares nothing with the library's tabulation.
fn oracle(a: &[u8], b: &[u8]) -> f64 {
    fn go(a: &[u8], b: &[u8], memo: &mut [[Option<f64>; 7]; 7]) -> f64 {
        if a.is_empty() {
            return b.len() as f64;
        }
        if b.is_empty() {
            return a.len() as f64;
        }
        if let Some(v) = memo[a.len()][b.len()] {
            return v;
        }
        let (ra, rb) = (&a[..a.len() - 1], &b[..b.len() - 1]);
        let sub = if a[a.len() - 1] == b[b.len() - 1] {
            0.0
        } else {
            1.0
        };
        let v = (go(ra, rb, memo) + sub)
            .min(go(ra, b, memo) + 1.0)
            .min(go(a, rb, memo) + 1.0);
        memo[a.len()][b.len()] = Some(v);
        v
    }
    go(a, b, &mut [[None; 7]; 7])
}

/// Calls `f` on every restricted-growth string of length `n` over at most
/// `k` symbols: each symbol is at most one more than the largest before it.
fn restricted_growth(n: usize, k: u8, f: &mut impl FnMut(&[u8])) {
    fn rec(buf: &mut Vec<u8>, n: usize, k: u8, top: u8, f: &mut impl FnMut(&[u8])) {
        if buf.len() == n {
            f(buf);
            return;
        }
        let limit = if buf.is_empty() {
            0
        } else {
            (top + 1).min(k - 1)
        };
        for s in 0..=limit {
            buf.push(s);
            rec(buf, n, k, top.max(s), f);
            buf.pop();
        }
    }
    rec(&mut Vec::with_capacity(n), n, k, 0, f);
}

fn oracle_equivalence() -> Outcome {
    const MAX_LEN: usize = 6;
    const SYMBOLS: u8 = 5;
    let plain = TechniqueProfile::character_only("t");
    let start = Instant::now();
    let mut first_bad: Option<String> = None;
    let mut compare = |a: &[u8], b: &[u8]| {
        let dp = msd(
            &symbol_stream(a),
            &symbol_stream(b),
            &plain,
            CostModel::PaperLiteral,
        )
        .distance;
        let expected = oracle(a, b);
        if dp != expected && first_bad.is_none() {
            first_bad = Some(format!("{a:?} {b:?}: dp {dp} oracle {expected}"));
        }
    };

    // With units disabled the distance only sees whether two symbols are
    // equal, so it is unchanged by renaming symbols. Every pair is a renaming
    // of exactly one pair whose concatenation is a restricted-growth string.
    let mut classes = 0u64;
    for n in 0..=2 * MAX_LEN {
        restricted_growth(n, SYMBOLS, &mut |s| {
            for split in n.saturating_sub(MAX_LEN)..=n.min(MAX_LEN) {
                compare(&s[..split], &s[split..]);
                classes += 1;
            }
        });
    }

    // Literal enumeration of the short pairs, and random renamings of long
    // ones, back the renaming argument up empirically.
    let mut short: Vec<Vec<u8>> = vec![vec![]];
    for len in 1..=4 {
        let prev: Vec<Vec<u8>> = short
            .iter()
            .filter(|s| s.len() == len - 1)
            .cloned()
            .collect();
        for s in prev {
            for c in 0..SYMBOLS {
                let mut t = s.clone();
                t.push(c);
                short.push(t);
            }
        }
    }
    for a in &short {
        for b in &short {
            compare(a, b);
        }
    }
    let mut rng = StdRng::seed_from_u64(4);
    for _ in 0..20_000 {
        let mut draw = || -> Vec<u8> {
            let len = rng.random_range(0..=MAX_LEN);
            (0..len).map(|_| rng.random_range(0..SYMBOLS)).collect()
        };
        let (a, b) = (draw(), draw());
        compare(&a, &b);
    }
    if let Some(bad) = first_bad {
        return Err(bad);
    }

    let unit_profile =
        TechniqueProfile::new("u", ["ab"], BTreeMap::new(), BackspaceGranularity::Basic)
            .map_err(|e| e.to_string())?;
    for _ in 0..10_000 {
        let mut draw = || -> Vec<u8> {
            let len = rng.random_range(0..=MAX_LEN);
            (0..len).map(|_| rng.random_range(0..SYMBOLS)).collect()
        };
        let (a, b) = (symbol_stream(&draw()), symbol_stream(&draw()));
        let with_unit = msd(&a, &b, &unit_profile, CostModel::PaperLiteral).distance;
        let chars_only = msd(&a, &b, &plain, CostModel::PaperLiteral).distance;
        check(with_unit <= chars_only, || {
            format!("{a} {b}: unit {with_unit} > character-only {chars_only}")
        })?;
    }

    let elapsed = start.elapsed();
    check(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{classes} canonical pairs, {} literal short pairs, 20000 random, 10000 unit pairs in {elapsed:.1?}",
        short.len() * short.len()
    ))
}

fn random_bengali(rng: &mut StdRng, max_len: usize) -> String {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| char::from_u32(rng.random_range(0x0980u32..=0x09FF)).unwrap())
        .collect()
}

fn round_trips() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1000);
    for _ in 0..1_000 {
        let text = random_bengali(&mut rng, 20);
        let once = normalize(&text);
        check(normalize(&once) == once, || {
            format!("normalize not idempotent on {text:?}")
        })?;
        let os = to_output_stream(&text);
        check(normalize(&recompose(&os)) == once, || {
            format!("recompose differs on {text:?}")
        })?;
        let total: usize = segment_graphemes(&text)
            .iter()
            .map(|c| c.constituent_count)
            .sum();
        check(total == os.len(), || {
            format!("{text:?}: clusters hold {total}, stream has {}", os.len())
        })?;
    }
    Ok("1000 strings".into())
}

fn typed(presented: &str, transcribed: &str, step_ms: u64) -> SessionRecord {
    SessionRecord {
        session_id: "s".into(),
        technique_id: "t".into(),
        participant_id: "p".into(),
        presented: presented.into(),
        transcribed: transcribed.into(),
        events: to_output_stream(transcribed)
            .iter()
            .enumerate()
            .map(|(i, c)| KeyEvent::char(step_ms * i as u64, c.codepoint.to_string()))
            .collect(),
        inf_override: None,
    }
}

fn formulas() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    for _ in 0..10_000 {
        let len = rng.random_range(2..500);
        let s = rng.random_range(0.1..3600.0);
        let w = rng.random_range(1.0..15.0);
        let base = wpm_bn(len, s, w).map_err(|e| e.to_string())?;
        let slow = wpm_bn(len, 2.0 * s, w).map_err(|e| e.to_string())?;
        let long = wpm_bn(len, s, 2.0 * w).map_err(|e| e.to_string())?;
        check((slow - base / 2.0).abs() <= FLOAT_TOL * base, || {
            format!("S doubling: {base} {slow}")
        })?;
        check((long - base / 2.0).abs() <= FLOAT_TOL * base, || {
            format!("w doubling: {base} {long}")
        })?;
        check(
            (long * 2.0 * w - base * w).abs() <= FLOAT_TOL * base * w,
            || "wpm * w not constant".into(),
        )?;
    }

    let profile = TechniqueProfile::character_only("t");
    let (mut conserved, mut saturated, mut dominance) = (0, 0, 0);
    for _ in 0..3_000 {
        let presented = random_bengali(&mut rng, 12);
        let mut t: Vec<char> = presented.chars().collect();
        for _ in 0..rng.random_range(0..4) {
            if t.is_empty() {
                break;
            }
            let at = rng.random_range(0..t.len());
            match rng.random_range(0..3) {
                0 => {
                    t.remove(at);
                }
                1 => t[at] = char::from_u32(rng.random_range(0x0995u32..=0x09A8)).unwrap(),
                _ => t.insert(
                    at,
                    char::from_u32(rng.random_range(0x0995u32..=0x09A8)).unwrap(),
                ),
            }
        }
        let transcribed: String = t.into_iter().collect();
        if to_output_stream(&transcribed).is_empty() || to_output_stream(&presented).len() < 2 {
            continue;
        }
        let m = analyze_session(
            &typed(&presented, &transcribed, 200),
            &profile,
            &Default::default(),
        )
        .map_err(|e| e.to_string())?;
        let q = m.intermediates;
        if q.inf <= q.os_t_len {
            conserved += 1;
            check(q.correct + q.inf == q.os_t_len, || {
                format!("C + INF != |OS_T| for {presented:?} / {transcribed:?}")
            })?;
        } else {
            saturated += 1;
            check(q.correct == 0, || "C did not saturate".into())?;
        }
        if q.inf as f64 == q.msd && q.os_t_len <= q.os_p_len {
            dominance += 1;
            check(m.er_bn >= m.msder_bn, || {
                format!("ER < MSDER for {presented:?} / {transcribed:?}")
            })?;
        }
    }
    check(conserved > 1000 && dominance > 1000, || {
        format!("too few cases: {conserved} conservation, {dominance} dominance")
    })?;
    let er = er_bn(1, 13).map_err(|e| e.to_string())?;
    let msder = msder_bn(1.0, 14, 13).map_err(|e| e.to_string())?;
    check(er >= msder, || "worked example ER < MSDER".into())?;
    Ok(format!(
        "10000 WPM scalings; C + INF = |OS_T| on {conserved} sessions ({saturated} with INF > |OS_T| saturate C at 0); ER >= MSDER on {dominance}"
    ))
}

/// A larger log than the fixture, so the pool actually splits work.
fn synthetic_log(dir: &Path) -> PathBuf {
    let phrases = [
        "আমার সোনার বাংলা",
        "ক্ষণিকের অতিথি",
        "কান্ড কারখানা",
        "শান্ত নদী",
        "বই পড়ি",
    ];
    let techniques = ["phonetic", "fixed-layout", "multitap", "conjunct-keys"];
    let mut rng = StdRng::seed_from_u64(7);
    let mut records = Vec::new();
    for i in 0..240 {
        let presented = phrases[i % phrases.len()];
        let mut t: Vec<char> = presented.chars().collect();
        if rng.random_bool(0.4) {
            let at = rng.random_range(0..t.len());
            t.remove(at);
        }
        let transcribed: String = t.into_iter().collect();
        let mut s = typed(presented, &transcribed, rng.random_range(150..900));
        s.session_id = format!("s{i:03}");
        s.technique_id = techniques[i % techniques.len()].into();
        s.participant_id = format!("p{}", i % 15);
        records.push(s);
    }
    let path = dir.join("synthetic.jsonl");
    std::fs::write(&path, write_session_log(&records)).unwrap();
    path
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let profiles = fixture("profiles");
    let profiles = profiles.to_str().unwrap();
    let mut compared = 0;
    for log in [fixture("four_techniques.jsonl"), synthetic_log(dir.path())] {
        let log = log.to_str().unwrap();
        for extra in [&[][..], &["--per-session"][..]] {
            let args = |jobs: &'static str| {
                let mut a = vec!["analyze", log, "--profiles", profiles, "--jobs", jobs];
                a.extend_from_slice(extra);
                a
            };
            let serial = run_cli(&args("1"))?;
            for _ in 0..2 {
                check(run_cli(&args("1"))? == serial, || {
                    format!("serial rerun differs on {log}")
                })?;
                check(run_cli(&args("8"))? == serial, || {
                    format!("--jobs 8 differs on {log}")
                })?;
                compared += 2;
            }
        }
    }
    Ok(format!("{compared} reruns byte-identical"))
}

fn table_shape() -> Outcome {
    let profiles = fixture("profiles");
    let csv = run_cli(&[
        "analyze",
        fixture("four_techniques.jsonl").to_str().unwrap(),
        "--profiles",
        profiles.to_str().unwrap(),
    ])?;
    let csv = String::from_utf8(csv).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    check(
        header[..5] == ["technique", "wpm_bn", "kspc_bn", "er_bn", "msder_bn"],
        || format!("header {header:?}"),
    )?;
    let rows: Vec<&str> = lines.collect();
    check(rows.len() == 4, || format!("{} rows", rows.len()))?;
    check(
        rows.iter().all(|r| r.split(',').count() == header.len()),
        || "ragged rows".into(),
    )?;
    Ok(format!("4 rows x {} columns", header.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 worked example golden values", worked_example),
        ("2 decomposition", decomposition),
        ("3 fractional MSD", fractional_msd),
        ("4 MSD oracle equivalence", oracle_equivalence),
        ("5 round-trip properties", round_trips),
        ("6 formula properties", formulas),
        ("7 determinism", determinism),
        ("8 per-technique table shape", table_shape),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        match criterion() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
