use conslaw::conslaw::{
    equivalent_vectors, ibragimov_vector, verify_divergence, Agreement, CancelToken,
};
use conslaw::determining::{
    adjoint_symmetry_residual, differential_substitution_residual, selfadjoint_lambda,
    symmetry_residual,
};
use conslaw::expr::{Expr, RuleSet};
use conslaw::session::{load_session, Object, Session};
use conslaw::variational::{adjoint_system, is_variational, linearize};

fn session() -> Session {
    let src = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../corpus/thomas.cl"
    ))
    .unwrap();
    load_session(&src).unwrap()
}

fn char_of(s: &Session, name: &str) -> Vec<Expr> {
    match s.get(name) {
        Some(Object::Char(c)) => c.clone(),
        other => panic!("{name}: {other:?}"),
    }
}

fn vector_of(s: &Session, name: &str) -> Vec<Expr> {
    match s.get(name) {
        Some(Object::Vector(c)) => c.clone(),
        other => panic!("{name}: {other:?}"),
    }
}

fn gen_of(s: &Session, name: &str) -> conslaw::conslaw::Generator {
    match s.get(name) {
        Some(Object::Gen(g)) => g.clone(),
        other => panic!("{name}: {other:?}"),
    }
}

#[test]
fn reduction_of_mixed_derivative() {
    let s = session();
    let sys = s.system.as_ref().unwrap();
    let got = sys.reduce(&s.expr("D[u,x,t]").unwrap());
    assert_eq!(
        got,
        s.expr("-(alpha*D[u,x] + beta*D[u,t] + gamma*D[u,x]*D[u,t])")
            .unwrap()
    );
}

#[test]
fn exponent_latex() {
    let s = session();
    let w = s.expr("w").unwrap();
    assert_eq!(s.latex(&w), "e^{2(\\gamma u+\\alpha t+\\beta x)}");
}

#[test]
fn adjoint_equation_structure() {
    let s = session();
    let sys = s.system.as_ref().unwrap();
    let adj = sys.reduce(&adjoint_system(sys)[0]);
    let expected = s
        .expr(
            "D[v,x,t] - alpha*D[v,x] - beta*D[v,t] - gamma*D[u,t]*D[v,x] - gamma*D[u,x]*D[v,t] \
             + 2*gamma*(alpha*D[u,x] + beta*D[u,t] + gamma*D[u,x]*D[u,t])*v",
        )
        .unwrap();
    assert_eq!(adj, expected);
}

#[test]
fn not_variational_with_witness() {
    let s = session();
    let sys = s.system.as_ref().unwrap();
    let c = is_variational(sys);
    assert!(!c.variational);
    let w = c.witness.unwrap();
    assert!(w.index.is_empty());
    assert_eq!(
        w.difference,
        s.expr("2*gamma*(alpha*D[u,x] + beta*D[u,t] + gamma*D[u,x]*D[u,t])")
            .unwrap()
    );
}

#[test]
fn linearization_matches_symmetry_operator() {
    let s = session();
    let sys = s.system.as_ref().unwrap();
    let eta = s.expr("eta").unwrap();
    let lin = sys.reduce(&linearize(sys, std::slice::from_ref(&eta)).0[0]);
    let expected = sys.reduce(
        &s.expr(
            "Total[eta,x,t] + alpha*Total[eta,x] + beta*Total[eta,t] \
             + gamma*D[u,x]*Total[eta,t] + gamma*D[u,t]*Total[eta,x]",
        )
        .unwrap(),
    );
    assert_eq!(lin, expected);
}

#[test]
fn symmetries_and_adjoint_symmetries() {
    let s = session();
    let sys = s.system.as_ref().unwrap();
    assert!(symmetry_residual(sys, &char_of(&s, "exsym")).unwrap()[0].is_zero());
    for name in ["sub1", "sub2", "sub3", "point"] {
        let c = char_of(&s, name);
        assert!(
            adjoint_symmetry_residual(sys, &c).unwrap()[0].is_zero(),
            "{name}"
        );
        let d = differential_substitution_residual(sys, &c).unwrap();
        assert!(d[0].is_zero(), "{name}");
    }
    let lam = selfadjoint_lambda(sys, &char_of(&s, "point")).unwrap();
    assert_eq!(lam[0][0], s.expr("-gamma*B*exp(gamma*u)").unwrap());
    assert!(selfadjoint_lambda(sys, &char_of(&s, "sub1")).is_err());
}

#[test]
fn general_conservation_law() {
    let s = session();
    let sys = s.system.as_ref().unwrap();
    let c = conslaw::conslaw::ibragimov_symbolic(sys, &gen_of(&s, "generic"));
    assert_eq!(c, vector_of(&s, "general"));
}

fn scale(s: &Session, e: &str) -> conslaw::expr::Coeff {
    s.expr(e).unwrap().as_coeff().unwrap()
}

#[test]
fn examples() {
    let s = session();
    let sys = s.system.as_ref().unwrap();
    for (g, phi, printed, k) in [
        ("xshift", "sub1", "example1", "1/(2*gamma)"),
        ("fsym", "sub2", "example2", "1/(2*gamma)"),
        ("tshift", "sub3", "example3fixed", "-1/(2*gamma)"),
    ] {
        let c = ibragimov_vector(sys, &gen_of(&s, g), &char_of(&s, phi));
        let r = verify_divergence(sys, &c.components, &CancelToken::new()).unwrap();
        assert!(r.success(), "{g}: {}", s.show(&r.reduced_divergence));
        let printed_vec = vector_of(&s, printed);
        let p = verify_divergence(sys, &printed_vec, &CancelToken::new()).unwrap();
        assert!(p.success(), "{printed}: {}", s.show(&p.reduced_divergence));
        let eq = equivalent_vectors(sys, &c.components, &printed_vec).expect(printed);
        assert_eq!(eq.agreement, Agreement::OnSolutions, "{printed}");
        assert_eq!(eq.scale, scale(&s, k), "{printed}");
    }
}

#[test]
fn printed_example3_is_not_conserved() {
    let s = session();
    let sys = s.system.as_ref().unwrap();
    let r = verify_divergence(sys, &vector_of(&s, "example3"), &CancelToken::new()).unwrap();
    assert!(!r.success());
    let c = ibragimov_vector(sys, &gen_of(&s, "tshift"), &char_of(&s, "sub3"));
    assert!(equivalent_vectors(sys, &c.components, &vector_of(&s, "example3")).is_none());
}

#[test]
fn example2_residual_without_rule() {
    let s = session();
    let sys = s.system.as_ref().unwrap().with_rules(RuleSet::empty());
    let printed_vec = vector_of(&s, "example2");
    let r = verify_divergence(&sys, &printed_vec, &CancelToken::new()).unwrap();
    let factor = s
        .expr("(D[f,x,t] + alpha*D[f,x] + beta*D[f,t])*(gamma*D[u,x] + beta)*w2")
        .unwrap();
    assert_eq!(r.reduced_divergence, Expr::from_int(2) * factor);
}
