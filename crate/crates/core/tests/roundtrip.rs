mod common;

use conslaw::session::pretty;
use conslaw::session::{load_session, parse_session};

fn assert_roundtrip(src: &str) {
    let first = parse_session(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    let text = pretty::session(&first);
    let second = parse_session(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    assert_eq!(first, second, "\n{src}\n---\n{text}");
    assert_eq!(pretty::session(&second), text);
    match (load_session(src), load_session(&text)) {
        (Ok(a), Ok(b)) => {
            let (sa, sb) = (a.system.unwrap(), b.system.unwrap());
            for (ea, eb) in sa.equations().iter().zip(sb.equations()) {
                assert_eq!(ea.expr, eb.expr);
            }
            assert_eq!(
                a.objects.keys().collect::<Vec<_>>(),
                b.objects.keys().collect::<Vec<_>>()
            );
        }
        (Err(a), Err(b)) => assert_eq!(a.message, b.message),
        (a, b) => panic!("semantic check differs: {:?} vs {:?}", a.err(), b.err()),
    }
}

#[test]
fn corpus_files_round_trip() {
    for f in ["wave.cl", "thomas.cl", "klein-gordon.cl"] {
        assert_roundtrip(&common::corpus(f));
    }
}

#[test]
fn random_sessions_round_trip() {
    let mut r = common::rng();
    let mut loaded = 0;
    for _ in 0..200 {
        let src = common::random_session(&mut r);
        assert_roundtrip(&src);
        loaded += load_session(&src).is_ok() as usize;
    }
    assert!(
        loaded > 20,
        "only {loaded} random sessions passed semantic checks"
    );
}
