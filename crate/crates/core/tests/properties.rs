mod common;

use common::props;

const CASES: u32 = 128;

fn check(r: Result<(), String>) {
    if let Err(e) = r {
        panic!("{e}");
    }
}

#[test]
fn euler_annihilates_total_divergences() {
    check(props::euler_annihilates_total_divergences(CASES));
}

#[test]
fn linearization_pairs_with_its_adjoint_up_to_a_divergence() {
    check(props::linearization_pairs_with_its_adjoint_up_to_a_divergence(CASES));
}

#[test]
fn ring_laws_and_canonical_form() {
    check(props::ring_laws_and_canonical_form(CASES));
}

#[test]
fn reduction_is_idempotent_and_a_homomorphism() {
    check(props::reduction_is_idempotent_and_a_homomorphism(CASES));
}

#[test]
fn e_decompose_reassembles_exactly() {
    check(props::e_decompose_reassembles_exactly(CASES));
}

#[test]
fn operator_adjoint_is_an_involution() {
    check(props::operator_adjoint_is_an_involution(CASES));
}

#[test]
fn substitution_residual_equals_adjoint_residual() {
    check(props::substitution_residual_equals_adjoint_residual(CASES));
}
