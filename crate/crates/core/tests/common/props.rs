use proptest::prelude::*;
use proptest::test_runner::{TestCaseError, TestRunner};

use super::{corpus_session, poly_text, THOMAS_ATOMS, THOMAS_ORDER1, WAVE_ATOMS, WAVE_ORDER1};
use conslaw::determining::{
    adjoint_symmetry_residual, differential_substitution_residual, e_decompose,
};
use conslaw::expr::{Expr, MultiIndex};
use conslaw::jet::total_derivative;
use conslaw::session::Session;
use conslaw::variational::{adjoint_linearize, euler, linearize, DiffOperator};

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    TestRunner::new(super::config(cases))
        .run(&strategy, test)
        .map_err(|e| format!("{e} (CONSLAW_SEED={})", super::seed()))
}

fn parse(s: &Session, text: &str) -> Expr {
    s.expr(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn sessions() -> [(Session, &'static [&'static str]); 2] {
    [
        (corpus_session("wave.cl"), WAVE_ATOMS),
        (corpus_session("thomas.cl"), THOMAS_ATOMS),
    ]
}

pub fn euler_annihilates_total_divergences(cases: u32) -> Result<(), String> {
    for (s, atoms) in sessions() {
        let sys = s.system.as_ref().unwrap();
        let (t, x) = (&sys.indep()[0], &sys.indep()[1]);
        let u = &sys.dep()[0];
        let strat = (
            poly_text(atoms.to_vec(), 4, 3),
            poly_text(atoms.to_vec(), 4, 3),
        );
        run(cases, strat, |(a, b)| {
            let div = total_derivative(&parse(&s, &a), t) + total_derivative(&parse(&s, &b), x);
            prop_assert!(euler(&div, u).is_zero(), "{a} | {b}");
            Ok(())
        })?;
    }
    Ok(())
}

pub fn linearization_pairs_with_its_adjoint_up_to_a_divergence(cases: u32) -> Result<(), String> {
    for (s, atoms) in sessions() {
        let sys = s.system.as_ref().unwrap();
        let u = &sys.dep()[0];
        let strat = (
            poly_text(atoms.to_vec(), 3, 2),
            poly_text(atoms.to_vec(), 3, 2),
        );
        run(cases, strat, |(w, e)| {
            let (w, e) = (parse(&s, &w), parse(&s, &e));
            let lin = linearize(sys, std::slice::from_ref(&e)).0;
            let adj = adjoint_linearize(sys, std::slice::from_ref(&w)).0;
            let pairing = &w * &lin[0] - &e * &adj[0];
            prop_assert!(euler(&pairing, u).is_zero());
            Ok(())
        })?;
    }
    Ok(())
}

pub fn ring_laws_and_canonical_form(cases: u32) -> Result<(), String> {
    let s = corpus_session("thomas.cl");
    let p = || poly_text(THOMAS_ATOMS.to_vec(), 3, 2);
    run(cases, (p(), p(), p()), |(a, b, c)| {
        let (a, b, c) = (parse(&s, &a), parse(&s, &b), parse(&s, &c));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        let twin = parse(&s, &s.show(&a));
        prop_assert!((&a - &twin).is_zero());
        prop_assert_eq!(&a * &Expr::one(), a.clone());
        prop_assert_eq!(parse(&s, &s.show(&a)), a.clone());
        let ab = &a * &b;
        prop_assert_eq!(parse(&s, &s.show(&ab)), ab);
        Ok(())
    })
}

pub fn reduction_is_idempotent_and_a_homomorphism(cases: u32) -> Result<(), String> {
    for (s, atoms) in sessions() {
        let sys = s.system.as_ref().unwrap();
        let strat = (
            poly_text(atoms.to_vec(), 3, 2),
            poly_text(atoms.to_vec(), 3, 2),
        );
        run(cases, strat, |(a, b)| {
            let (a, b) = (parse(&s, &a), parse(&s, &b));
            let (ra, rb) = (sys.reduce(&a), sys.reduce(&b));
            prop_assert_eq!(sys.reduce(&ra), ra.clone());
            prop_assert_eq!(sys.reduce(&(&a + &b)), &ra + &rb);
            prop_assert_eq!(sys.reduce(&(&a * &b)), sys.reduce(&(&ra * &rb)));
            let t = &sys.indep()[0];
            prop_assert_eq!(
                sys.reduce(&total_derivative(&a, t)),
                sys.reduce(&total_derivative(&ra, t))
            );
            Ok(())
        })?;
    }
    Ok(())
}

pub fn e_decompose_reassembles_exactly(cases: u32) -> Result<(), String> {
    for (s, atoms) in sessions() {
        let sys = s.system.as_ref().unwrap();
        let strat = (
            poly_text(atoms.to_vec(), 3, 2),
            poly_text(atoms.to_vec(), 2, 1),
        );
        run(cases, strat, |(a, m)| {
            let e = &parse(&s, &a)
                + &(&parse(&s, &m) * &total_derivative(&sys.equations()[0].expr, &sys.indep()[1]));
            let d = e_decompose(&e, sys);
            let back = d.reassemble(sys);
            prop_assert!(
                sys.rules().is_zero(&(&back - &e)),
                "{}",
                s.show(&(&back - &e))
            );
            prop_assert_eq!(sys.reduce(&e), d.remainder);
            Ok(())
        })?;
    }
    Ok(())
}

pub fn operator_adjoint_is_an_involution(cases: u32) -> Result<(), String> {
    let s = corpus_session("wave.cl");
    let sys = s.system.as_ref().unwrap();
    let (t, x) = (&sys.indep()[0], &sys.indep()[1]);
    let indices = [
        MultiIndex::empty(),
        MultiIndex::from_vars([t]),
        MultiIndex::from_vars([x]),
        MultiIndex::from_vars([t, x]),
        MultiIndex::from_vars([x, x]),
    ];
    let strat = proptest::collection::vec(poly_text(WAVE_ATOMS.to_vec(), 2, 2), indices.len());
    run(cases, strat, |coeffs| {
        let mut op = DiffOperator::new(1, 1);
        for (j, c) in indices.iter().zip(&coeffs) {
            op.add_coefficient(0, 0, j.clone(), parse(&s, c));
        }
        prop_assert_eq!(op.adjoint().adjoint(), op.clone());
        let w = parse(&s, "u*D[u,x] + t");
        let e = parse(&s, "x*D[u,t]");
        let pairing = &w * &op.apply(std::slice::from_ref(&e))[0]
            - &e * &op.adjoint().apply(std::slice::from_ref(&w))[0];
        prop_assert!(euler(&pairing, &sys.dep()[0]).is_zero());
        Ok(())
    })
}

pub fn substitution_residual_equals_adjoint_residual(cases: u32) -> Result<(), String> {
    for (name, atoms) in [("wave.cl", WAVE_ORDER1), ("thomas.cl", THOMAS_ORDER1)] {
        let s = corpus_session(name);
        let sys = s.system.as_ref().unwrap();
        run(cases, poly_text(atoms.to_vec(), 3, 3), |phi| {
            let phi = vec![parse(&s, &phi)];
            prop_assume!(!sys.reduce(&phi[0]).is_zero());
            let d = differential_substitution_residual(sys, &phi).unwrap();
            let a = adjoint_symmetry_residual(sys, &phi).unwrap();
            prop_assert_eq!(d, a);
            Ok(())
        })?;
    }
    Ok(())
}
