#![allow(dead_code)]

use std::collections::BTreeMap;

use abugida::{BackspaceGranularity, KeyEvent, SessionRecord, TechniqueProfile};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

pub const EXAMPLE_PRESENTED: &str = "ক্ষণিকের অতিথি";
pub const EXAMPLE_TRANSCRIBED: &str = "ক্ষণিকের অতথি";

/// A dedicated ক্ষ key, Shift, then ten ordinary keys over 20 seconds.
pub fn worked_example_events() -> Vec<KeyEvent> {
    let mut events = vec![KeyEvent::unit(0, "ক্ষ"), KeyEvent::modifier(900)];
    let rest = ["ণ", "ি", "ক", "ে", "র", " ", "অ", "ত", "থ", "ি"];
    events.extend(
        rest.iter()
            .enumerate()
            .map(|(i, c)| KeyEvent::char(2_000 * (i as u64 + 1), *c)),
    );
    events
}

pub fn worked_example_session() -> SessionRecord {
    SessionRecord {
        session_id: "worked-example".into(),
        technique_id: "dedicated-ksa".into(),
        participant_id: "p0".into(),
        presented: EXAMPLE_PRESENTED.into(),
        transcribed: EXAMPLE_TRANSCRIBED.into(),
        events: worked_example_events(),
        inf_override: None,
    }
}

pub fn worked_example_profile() -> TechniqueProfile {
    TechniqueProfile::new(
        "dedicated-ksa",
        ["ক্ষ"],
        BTreeMap::from([("KSA".to_string(), "ক্ষ".to_string())]),
        BackspaceGranularity::Unit,
    )
    .unwrap()
}

/// One keystroke per character, 300 ms apart.
pub fn typed_session(
    id: &str,
    technique: &str,
    presented: &str,
    transcribed: &str,
) -> SessionRecord {
    let events = abugida::to_output_stream(transcribed)
        .iter()
        .enumerate()
        .map(|(i, c)| KeyEvent::char(300 * i as u64, c.codepoint.to_string()))
        .collect();
    SessionRecord {
        session_id: id.into(),
        technique_id: technique.into(),
        participant_id: "p".into(),
        presented: presented.into(),
        transcribed: transcribed.into(),
        events,
        inf_override: None,
    }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random text drawn mostly from the Bengali block, with some spaces and
/// Latin letters, never containing zero-width controls.
pub fn random_bengali(rng: &mut StdRng, max_len: usize) -> String {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| match rng.random_range(0..20) {
            0 => ' ',
            1 => rng.random_range('a'..='z'),
            _ => char::from_u32(rng.random_range(0x0980u32..=0x09FF)).unwrap(),
        })
        .collect()
}
