use std::collections::BTreeSet;
use std::io::Cursor;

use proptest::prelude::*;
use socialtie::ingest::{parse_coauthorship, parse_qa, CalendarMode, IngestOptions};
use socialtie::tokenize::{Tokenizer, TokenizerConfig};

fn tokenizer() -> Tokenizer {
    Tokenizer::new(TokenizerConfig::default()).unwrap()
}

/// (year, author indices, title words)
type Record = (i64, Vec<u8>, Vec<u8>);

const WORDS: [&str; 8] = [
    "graph",
    "mining",
    "query",
    "networks",
    "learning",
    "compilers",
    "the",
    "of",
];

fn records() -> impl Strategy<Value = Vec<Record>> {
    prop::collection::vec(
        (
            1990i64..2010,
            prop::collection::vec(0u8..15, 1..6),
            prop::collection::vec(0u8..8, 0..5),
        ),
        1..40,
    )
}

fn render(recs: &[Record]) -> String {
    recs.iter()
        .map(|(y, authors, words)| {
            let a: Vec<String> = authors.iter().map(|i| format!("author{i}")).collect();
            let w: Vec<&str> = words.iter().map(|&i| WORDS[i as usize]).collect();
            format!("{y}\t{}\t{}\n", a.join("|"), w.join(" "))
        })
        .collect()
}

proptest! {
    #[test]
    fn clique_expansion_count(recs in records()) {
        let expected: usize = recs
            .iter()
            .map(|(_, a, _)| {
                let m = a.iter().collect::<BTreeSet<_>>().len();
                m * (m.saturating_sub(1)) / 2
            })
            .sum();
        match parse_coauthorship(Cursor::new(render(&recs)), &tokenizer(), &IngestOptions::default()) {
            Ok(out) => {
                prop_assert_eq!(out.network.instances().len(), expected);
                prop_assert_eq!(out.stats.expected_instances, expected);
                prop_assert_eq!(out.stats.instances, expected);
            }
            Err(_) => prop_assert_eq!(expected, 0),
        }
    }

    /// Compact calendars are strictly increasing, every index is used, and
    /// each instance maps back to its own year.
    #[test]
    fn calendar_is_monotone_and_dense(recs in records()) {
        let Ok(out) = parse_coauthorship(Cursor::new(render(&recs)), &tokenizer(), &IngestOptions::default()) else {
            return Ok(());
        };
        let cal = &out.calendar;
        prop_assert!(cal.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(cal.len(), out.network.t());
        let used: BTreeSet<u32> = out.network.instances().iter().map(|i| i.snapshot).collect();
        prop_assert_eq!(used.len(), cal.len());
        let years: BTreeSet<i64> = recs.iter().filter(|r| r.1.iter().collect::<BTreeSet<_>>().len() > 1).map(|r| r.0).collect();
        prop_assert_eq!(cal.iter().copied().collect::<BTreeSet<_>>(), years);

        let raw = IngestOptions { calendar: CalendarMode::Raw, ..Default::default() };
        let out_raw = parse_coauthorship(Cursor::new(render(&recs)), &tokenizer(), &raw).unwrap();
        let span = cal.last().unwrap() - cal.first().unwrap() + 1;
        prop_assert_eq!(out_raw.network.t() as i64, span);
    }

    #[test]
    fn tokenizer_is_idempotent(words in prop::collection::vec("[A-Za-z]{1,12}", 0..10)) {
        let t = tokenizer();
        let once = t.tokenize(&words.join(" "));
        let twice = t.tokenize(&once.join(" "));
        prop_assert_eq!(once, twice);
    }
}

#[test]
fn qa_minutes_and_self_events() {
    let text = "60\ta\tb\tanswer\tgraph query\n\
                119\tb\tc\tcomment\tgraph\n\
                180\tc\tc\tanswer\tself\n\
                240\tc\ta\tanswer\tquery\n";
    let out = parse_qa(Cursor::new(text), &tokenizer(), &IngestOptions::default()).unwrap();
    assert_eq!(out.calendar, vec![1, 4]);
    assert_eq!(out.stats.self_events, 1);
    let snaps: Vec<u32> = out.network.instances().iter().map(|i| i.snapshot).collect();
    assert_eq!(snaps, vec![0, 0, 1]);
}

#[test]
fn strict_mode_rejects_bad_lines() {
    let text = "2000\ta|b\tx\nnot-a-year\ta|b\ty\n";
    let lenient = parse_coauthorship(Cursor::new(text), &tokenizer(), &IngestOptions::default()).unwrap();
    assert_eq!(lenient.stats.malformed, 1);
    let strict = IngestOptions {
        strict: true,
        ..Default::default()
    };
    let err = parse_coauthorship(Cursor::new(text), &tokenizer(), &strict).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
}
