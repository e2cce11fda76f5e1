//! End-to-end checks through the public API.

use gwlocal_core::coeffring::{q, qi};
use gwlocal_core::genfun::{f_dg, f_dg_closed, f_dg_general, f_kd3_relation_check, ql_zero_slice, CellStatus, Route};
use gwlocal_core::hypertail::{hypertail, HypertailCaps, Locus};
use gwlocal_core::loc0::{
    descendant_invariant_pn, enumerate_fixed_graphs, pipeline_p2_example, quintic_instanton_numbers, small_j_coefficient,
    TorusWeights, TwistSpec,
};
use gwlocal_core::Error;

#[test]
fn all_three_routes_agree() {
    for (d, g) in [(0, 0), (1, 1), (2, 2), (1, 3)] {
        let r = f_dg(d, g, 6, &[Route::R1, Route::R2, Route::R3], None).unwrap();
        assert!(r.agree(), "d={d} g={g}");
        assert_eq!(r.to_json()["agree"], true);
    }
}

#[test]
fn documented_fdg_json() {
    let r = f_dg(1, 0, 3, &[Route::R3], None).unwrap();
    assert_eq!(r.routes[0].1.to_json().to_string(), r#"{"1":"1","z":"7","z^2":"28","z^3":"84"}"#);
}

#[test]
fn general_form_reduces_to_one_variable_chain() {
    let gf = f_dg_general(1, 2, 1, 5).unwrap();
    assert_eq!(ql_zero_slice(&gf.corrected, 5).unwrap(), f_dg_closed(1, 2, 5).unwrap());
}

#[test]
fn relation_cells_without_independent_route_are_unverified() {
    let cells = f_kd3_relation_check(2, 1, 1, 1).unwrap();
    assert!(cells.iter().all(|c| c.status != CellStatus::Fail));
    assert!(cells.iter().any(|c| c.status == CellStatus::Unverified));
}

#[test]
fn hypertail_rejects_positive_ql_on_x0() {
    assert!(matches!(hypertail(Locus::X0, HypertailCaps::new(1, 2, 3)), Err(Error::Precondition(_))));
    assert!(hypertail(Locus::X0, HypertailCaps::new(0, 2, 3)).is_ok());
}

#[test]
fn p2_example_matches_the_line() {
    let r = pipeline_p2_example(&TorusWeights::standard(2)).unwrap();
    assert_eq!(r.value, qi(1));
    assert_eq!(r.to_json()["value"], "1");
    assert!(pipeline_p2_example(&TorusWeights::standard(3)).is_err());
}

#[test]
fn localization_agrees_with_small_j_function() {
    let w = TorusWeights::standard(3);
    for d in 1..=2u32 {
        for b in 0..=3u32 {
            let k = 4 * d + (3 - b) - 2;
            let got = descendant_invariant_pn(3, d, &[(k, b)], None, &w).unwrap();
            assert_eq!(got.as_monomial().map(|m| m.0).unwrap_or_default(), small_j_coefficient(3, d, k, b), "d={d} b={b}");
        }
    }
}

#[test]
fn o_minus_one_twist_is_trivial_in_degree_one() {
    // the index bundle of O(-1) has rank 0 over lines
    let w = TorusWeights::standard(2);
    let plain = descendant_invariant_pn(2, 1, &[(0, 2), (0, 2)], None, &w).unwrap();
    assert_eq!(plain, gwlocal_core::LambdaRational::constant(qi(1)));
    let tw = TwistSpec::parse("O(-1)-").unwrap();
    let twisted = descendant_invariant_pn(2, 1, &[(0, 2), (0, 2)], Some(&tw), &w).unwrap();
    assert_eq!(twisted.as_monomial().unwrap().0, qi(1));
}

#[test]
fn graph_enumeration_is_guarded() {
    assert_eq!(enumerate_fixed_graphs(4, 1, 0).unwrap().len(), 10);
    assert!(enumerate_fixed_graphs(4, 9, 0).is_err());
}

#[test]
fn period_oracle_instanton_numbers() {
    assert_eq!(quintic_instanton_numbers(2).unwrap(), vec![qi(2875), qi(609250)]);
    assert_ne!(q(4876875, 8), qi(609250));
}
