//! Runs every axiom checker across the bundled instances through the public
//! API, the way the command-line driver does.

use osva_core::modes::{
    c0_membership, check_associativity, check_creation, check_d_conjugation,
    check_d_derivative, check_identity, check_virasoro, check_weight_property,
    make_assoc_algebra_instance, make_heisenberg_instance, make_tensor_instance,
    matrix_units_table, qv_basis, AssocSample, OsvaInstance,
};
use osva_core::scalars::{rat, rint};

fn instances() -> Vec<OsvaInstance> {
    let m2 = make_assoc_algebra_instance(&matrix_units_table(2), 4).unwrap();
    let heis = make_heisenberg_instance(6).unwrap();
    let tensor = make_tensor_instance(&m2, make_heisenberg_instance(4).unwrap()).unwrap();
    vec![heis, m2, tensor]
}

#[test]
fn exact_axioms_hold_on_every_instance() {
    for inst in instances() {
        let name = inst.name.clone();
        let id = check_identity(&inst);
        assert!(id.passed, "{name}: {:?}", id.witnesses);
        let creation = check_creation(&inst);
        assert!(creation.passed, "{name}: {:?}", creation.witnesses);
        let derivative = check_d_derivative(&inst, &[]);
        assert!(derivative.passed, "{name}: {:?}", derivative.witnesses);
        for a in [rint(2), rat(3, 5)] {
            let conj = check_d_conjugation(&inst, &a, &[]).unwrap();
            assert!(conj.passed, "{name}: {:?}", conj.witnesses);
        }
        let weights = check_weight_property(&inst, &rint(0), &rint(0));
        assert!(weights.passed, "{name}: {:?}", weights.witnesses);
    }
}

#[test]
fn virasoro_bracket_holds_on_every_instance() {
    for inst in instances() {
        let report = check_virasoro(&inst, (-2, 2), 1e-12).unwrap();
        assert!(report.passed, "{}: {:?}", inst.name, report.witnesses);
        assert_eq!(report.residual, 0.0, "{}", inst.name);
    }
}

#[test]
fn associativity_is_exact_on_weight_zero_instances() {
    let m2 = make_assoc_algebra_instance(&matrix_units_table(2), 4).unwrap();
    let mut samples = Vec::new();
    for u in 0..4 {
        for v in 0..4 {
            samples.push(AssocSample {
                u: qv_basis(u),
                v: qv_basis(v),
                w: qv_basis(1),
                vprime: qv_basis(u),
                r1: 1.0,
                r2: 0.6,
            });
        }
    }
    let report = check_associativity(&m2, &samples, 1e-12).unwrap();
    assert!(report.passed, "{:?}", report.witnesses);
    assert_eq!(report.residual, 0.0);
}

#[test]
fn vacuum_lies_in_the_invariant_subspace_everywhere() {
    for inst in instances() {
        let report = c0_membership(&inst, inst.vacuum(), 1e-9);
        assert!(report.passed, "{}: {:?}", inst.name, report.witnesses);
    }
}
