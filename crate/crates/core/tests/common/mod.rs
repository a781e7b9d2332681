#![allow(dead_code)]

pub mod props;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conslaw::session::{load_session, Session};

pub const DEFAULT_SEED: u64 = 0x5eed_c0de;

/// Seed for randomized suites, from `CONSLAW_SEED` or a fixed default.
pub fn seed() -> u64 {
    std::env::var("CONSLAW_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed()),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed())
}

pub fn corpus(name: &str) -> String {
    std::fs::read_to_string(format!(
        "{}/../../corpus/{}",
        env!("CARGO_MANIFEST_DIR"),
        name
    ))
    .unwrap()
}

pub fn corpus_session(name: &str) -> Session {
    load_session(&corpus(name)).unwrap()
}

/// Polynomial text over the given atoms with small integer coefficients.
pub fn poly_text(
    atoms: Vec<&'static str>,
    terms: usize,
    degree: usize,
) -> impl Strategy<Value = String> {
    let atom = proptest::sample::select(atoms);
    let mono = (-3i32..=3, proptest::collection::vec(atom, 0..=degree)).prop_map(|(c, fs)| {
        let mut parts = vec![format!("({})", c)];
        parts.extend(fs.into_iter().map(String::from));
        parts.join("*")
    });
    proptest::collection::vec(mono, 1..=terms).prop_map(|ms| ms.join(" + "))
}

pub const WAVE_ATOMS: &[&str] = &["t", "x", "u", "D[u,t]", "D[u,x]", "D[u,t,x]", "D[u,x,x]"];
pub const WAVE_ORDER1: &[&str] = &["t", "x", "u", "D[u,t]", "D[u,x]"];
pub const THOMAS_ATOMS: &[&str] = &[
    "t",
    "x",
    "u",
    "D[u,x]",
    "D[u,t]",
    "D[u,x,x]",
    "D[u,t,t]",
    "alpha",
    "gamma",
    "f",
    "D[f,x]",
    "exp(gamma*u)",
];
pub const THOMAS_ORDER1: &[&str] = &[
    "t",
    "x",
    "u",
    "D[u,x]",
    "D[u,t]",
    "alpha",
    "gamma",
    "B",
    "exp(gamma*u)",
];

fn pick<'a>(r: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(r).unwrap()
}

fn random_expr(r: &mut ChaCha8Rng, atoms: &[&str], depth: u32) -> String {
    if depth == 0 || r.random_bool(0.3) {
        return if r.random_bool(0.25) {
            r.random_range(0..20).to_string()
        } else {
            pick(r, atoms).to_string()
        };
    }
    let a = random_expr(r, atoms, depth - 1);
    let b = random_expr(r, atoms, depth - 1);
    match r.random_range(0..7) {
        0 => format!("{} + {}", a, b),
        1 => format!("({}) - ({})", a, b),
        2 => format!("({})*({})", a, b),
        3 => format!("-({})", a),
        4 => format!("({})^{}", a, r.random_range(0..4)),
        5 => format!("D[{}, x]", a),
        _ => format!("Total[{}, t]", a),
    }
}

/// A well-formed session over one dependent variable.
pub fn random_session(r: &mut ChaCha8Rng) -> String {
    let mut out = String::from("indep t, x;\ndep u;\n");
    let mut atoms = vec!["t", "x", "u", "D[u,x]", "D[u,t]", "D[u,x,x]"];
    if r.random_bool(0.5) {
        out.push_str("param a;\nparam k != 0;\n");
        atoms.extend(["a", "k"]);
    }
    if r.random_bool(0.5) {
        out.push_str("function g(x, t);\n");
        atoms.extend(["g", "D[g,x]"]);
    }
    let rhs = random_expr(r, &atoms, 3);
    let lead = if r.random_bool(0.5) {
        "D[u,t,t]"
    } else {
        "D[u,t]"
    };
    let annotate = if r.random_bool(0.5) {
        format!(" leading {}", lead)
    } else {
        String::new()
    };
    out.push_str(&format!("eq e1: {} = {}{};\n", lead, rhs, annotate));
    if out.contains("function g") && r.random_bool(0.5) {
        out.push_str("rule gr: D[g,x,t] -> D[g,x];\n");
    }
    for k in 0..r.random_range(0..4) {
        let e = random_expr(r, &atoms, 2);
        match r.random_range(0..5) {
            0 => out.push_str(&format!("char c{} = {};\n", k, e)),
            1 => out.push_str(&format!("char c{} = [{}];\n", k, e)),
            2 => out.push_str(&format!("let l{} = {};\n", k, e)),
            3 => out.push_str(&format!(
                "vector w{} = [{}, {}];\n",
                k,
                e,
                random_expr(r, &atoms, 1)
            )),
            _ => out.push_str(&format!("gen g{}: xi = [1, 0], eta = [{}];\n", k, e)),
        }
    }
    if r.random_bool(0.5) {
        out.push_str(&format!(
            "basis b = [{}, {}];\n",
            random_expr(r, &atoms, 1),
            random_expr(r, &atoms, 1)
        ));
    }
    out.push_str("run variational-check;\n");
    out
}
