//! Full pipeline over the bundled fusion data: validation, file round trips,
//! solving, certification, and gauge motion.

use osva_core::fusion::{
    diagonal_double_check, ising_builtin, load_fusion_data, save_fusion_data,
    validate_fusing, validate_ring,
};
use osva_core::scalars::QSqrt2;
use osva_core::solver::{
    solutions_from_json, solutions_to_json, solve_small, unit_uniqueness_check,
    verify_algebra, rescale_solution, SolveOptions, SolverError,
};

#[test]
fn bundled_data_validates_and_round_trips() {
    let data = ising_builtin();
    assert!(validate_ring(data.ring()).passed);
    assert!(validate_fusing(&data).passed);
    assert!(diagonal_double_check(&data).unwrap().passed);

    let text = save_fusion_data(&data);
    let reloaded = load_fusion_data(&text).unwrap();
    assert_eq!(save_fusion_data(&reloaded), text);
}

#[test]
fn unit_only_dims_have_a_unique_certified_solution() {
    let data = ising_builtin();
    let outcome = solve_small(&data, &[1, 0, 0], &SolveOptions::default()).unwrap();
    assert_eq!(outcome.solutions.len(), 1);
    assert!(!outcome.partial);
    for alg in &outcome.solutions {
        assert!(verify_algebra(&data, alg).unwrap().passed);
        assert!(unit_uniqueness_check(&data, alg).passed);
    }
}

#[test]
fn two_sector_dims_branch_and_stay_certified_under_rescaling() {
    let data = ising_builtin();
    let outcome = solve_small(&data, &[1, 1, 0], &SolveOptions::default()).unwrap();
    assert_eq!(outcome.solutions.len(), 2);
    for alg in &outcome.solutions {
        assert!(verify_algebra(&data, alg).unwrap().passed);
        let lambda = vec![QSqrt2::one(), QSqrt2::from_int(3), QSqrt2::one()];
        let moved = rescale_solution(&data, alg, &lambda);
        assert!(verify_algebra(&data, &moved).unwrap().passed);
    }
}

#[test]
fn solutions_survive_serialization() {
    let data = ising_builtin();
    let outcome = solve_small(&data, &[1, 1, 0], &SolveOptions::default()).unwrap();
    let text = solutions_to_json(&outcome.solutions);
    let reloaded = solutions_from_json(&text).unwrap();
    assert_eq!(reloaded.len(), outcome.solutions.len());
    for alg in &reloaded {
        assert!(verify_algebra(&data, alg).unwrap().passed);
    }
    assert_eq!(solutions_to_json(&reloaded), text);
}

#[test]
fn oversized_dims_are_refused() {
    let data = ising_builtin();
    let err = solve_small(&data, &[2, 2, 0], &SolveOptions::default()).unwrap_err();
    assert!(matches!(err, SolverError::TooManyVariables { .. }));
}
