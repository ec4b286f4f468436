//! Geometric layer driven end to end: evaluation against the vertex map,
//! sewing against contraction, and recovery of the distinguished vectors.

use osva_core::geom::{
    check_sewing_axiom, extract_conformal, extract_vacuum, phi_eval, sew_affine,
    standard_element, GeomError, StandardElement,
};
use osva_core::modes::{
    make_assoc_algebra_instance, make_heisenberg_instance, make_tensor_instance,
    matrix_units_table, matrix_element_product, qv_basis, qv_to_rv, rv_pair, vertex_eval,
    OsvaInstance,
};

fn heis(cutoff: usize) -> OsvaInstance {
    make_heisenberg_instance(cutoff).unwrap()
}

fn label_index(inst: &OsvaInstance, label: &str) -> usize {
    inst.space()
        .indices()
        .find(|&i| inst.space().label(i) == label)
        .unwrap()
}

#[test]
fn two_point_evaluation_equals_vertex_map() {
    let inst = heis(6);
    let u = qv_basis(label_index(&inst, "[2]"));
    let v = qv_basis(label_index(&inst, "[1,1]"));
    let vprime = qv_basis(label_index(&inst, "[1]"));
    let p = standard_element(StandardElement::TwoPoint(0.8)).unwrap();
    let through_phi = phi_eval(&inst, &p, &[u.clone(), v.clone()], &vprime).unwrap();
    let through_vertex = rv_pair(&vprime, &vertex_eval(&inst, &u, 0.8, &v).unwrap());
    assert_eq!(through_phi, through_vertex);
}

#[test]
fn sewn_two_point_elements_evaluate_like_ordered_products() {
    let inst = heis(8);
    let p1 = standard_element(StandardElement::TwoPoint(1.0)).unwrap();
    let p2 = standard_element(StandardElement::TwoPoint(0.5)).unwrap();
    let sewn = sew_affine(&p1, 2, &p2).unwrap();
    let u = qv_basis(label_index(&inst, "[1]"));
    let w = qv_basis(label_index(&inst, "[2,1]"));
    let vprime = qv_basis(label_index(&inst, "[2]"));
    let through_phi =
        phi_eval(&inst, &sewn, &[u.clone(), u.clone(), w.clone()], &vprime).unwrap();
    let (through_product, _) = matrix_element_product(
        &inst,
        &vprime,
        &[(u.clone(), 1.0), (u.clone(), 0.5)],
        &w,
    )
    .unwrap();
    assert_eq!(through_phi, through_product);
}

#[test]
fn contraction_identity_holds_after_origin_sewing() {
    for inst in [
        heis(6),
        make_tensor_instance(
            &make_assoc_algebra_instance(&matrix_units_table(2), 4).unwrap(),
            heis(4),
        )
        .unwrap(),
    ] {
        let p1 = standard_element(StandardElement::TwoPoint(1.0)).unwrap();
        let p2 = standard_element(StandardElement::TwoPoint(0.6)).unwrap();
        let u = inst.vacuum().clone();
        let report = check_sewing_axiom(
            &inst,
            &p1,
            2,
            &p2,
            &[u.clone(), u.clone(), u.clone()],
            inst.vacuum(),
            1e-12,
        )
        .unwrap();
        assert!(report.passed, "{}: {:?}", inst.name, report.witnesses);
    }
}

#[test]
fn distinguished_vectors_are_recovered() {
    let inst = heis(6);
    assert_eq!(extract_vacuum(&inst).unwrap(), qv_to_rv(inst.vacuum()));
    let omega = qv_to_rv(&inst.conformal().unwrap().omega);
    let got = extract_conformal(&inst, 1e-4).unwrap();
    for (i, c) in &omega {
        let d = (got.get(i).copied().unwrap_or(0.0) - c).abs();
        assert!(d <= 1e-6 * c.abs(), "component {i} off by {d}");
    }
}

#[test]
fn sewing_errors_surface_through_the_public_api() {
    let p = standard_element(StandardElement::TwoPoint(0.5)).unwrap();
    let id = standard_element(StandardElement::Identity).unwrap();
    assert!(matches!(
        sew_affine(&p, 4, &id),
        Err(GeomError::BadPuncture { index: 4, arity: 2 })
    ));
}
