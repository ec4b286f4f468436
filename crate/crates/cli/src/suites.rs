//! Check suites behind each subcommand, with per-check wall times.

use std::time::{Duration, Instant};

use osva_core::fusion::{
    diagonal_double_check, validate_fusing, validate_ring, FusionData,
};
use osva_core::geom::{
    check_sewing_axiom, extract_conformal, extract_vacuum, phi_eval, standard_element,
    StandardElement,
};
use osva_core::modes::{
    c0_membership, check_associativity, check_creation, check_d_conjugation,
    check_d_derivative, check_identity, check_virasoro, check_weight_property, qv_to_rv,
    rv_pair, vertex_eval, OsvaInstance, RVec,
};
use osva_core::report::{CheckReport, Witness};
use osva_core::scalars::rint;
use osva_core::solver::{
    solutions_to_json, solve_small, unit_uniqueness_check, verify_algebra, AlgebraObject,
    SolveOptions,
};

use crate::sample::{assoc_samples, rng_for, sample_qvec};
use crate::{CliError, GeomCheckKind};

pub type Timed = Vec<(CheckReport, Duration)>;

fn timed(f: impl FnOnce() -> CheckReport) -> (CheckReport, Duration) {
    let start = Instant::now();
    let report = f();
    (report, start.elapsed())
}

fn timed_err(
    f: impl FnOnce() -> Result<CheckReport, CliError>,
) -> Result<(CheckReport, Duration), CliError> {
    let start = Instant::now();
    let report = f()?;
    Ok((report, start.elapsed()))
}

/// Ring axioms, fusing-block shapes, and diagonal-double orthogonality.
pub fn validate_suite(data: &FusionData) -> Timed {
    let mut checks = vec![
        timed(|| validate_ring(data.ring())),
        timed(|| validate_fusing(data)),
    ];
    checks.push(timed(|| match diagonal_double_check(data) {
        Ok(report) => report,
        Err(err) => CheckReport::exact(
            "diagonal-double",
            vec![Witness {
                input: "diagonal-double criterion".into(),
                expected: "well-shaped blocks".into(),
                got: err.to_string(),
            }],
        ),
    }));
    checks
}

/// Solve at the given dimensions; every emitted solution is re-certified by
/// the exact verifier before it is reported.
pub fn solve_suite(data: &FusionData, dims: &[usize]) -> Result<(Timed, String), CliError> {
    let start = Instant::now();
    let outcome = solve_small(data, dims, &SolveOptions::default())?;
    let mut witnesses = Vec::new();
    if outcome.partial {
        witnesses.push(Witness {
            input: "search".into(),
            expected: "complete enumeration".into(),
            got: "search bound exhausted; solution list may be incomplete".into(),
        });
    }
    for root in &outcome.uncertified_roots {
        witnesses.push(Witness {
            input: format!("variable {}", root.variable),
            expected: "exact certification".into(),
            got: format!("uncertified numeric root near {}", root.value),
        });
    }
    let mut checks: Timed = vec![(
        CheckReport::exact("solve-search", witnesses),
        start.elapsed(),
    )];
    checks.extend(certification_reports(data, &outcome.solutions)?);
    let text = solutions_to_json(&outcome.solutions);
    Ok((checks, text))
}

/// Certify a list of algebra objects against the fusion data.
pub fn verify_suite(
    data: &FusionData,
    algebras: &[AlgebraObject],
) -> Result<Timed, CliError> {
    certification_reports(data, algebras)
}

fn certification_reports(
    data: &FusionData,
    algebras: &[AlgebraObject],
) -> Result<Timed, CliError> {
    let mut checks = Timed::new();
    for (k, alg) in algebras.iter().enumerate() {
        checks.push(timed_err(|| {
            let mut report = verify_algebra(data, alg)?;
            report.name = format!("certify[{k}]");
            Ok(report)
        })?);
        checks.push(timed(|| {
            let mut report = unit_uniqueness_check(data, alg);
            report.name = format!("unit-dim[{k}]");
            report
        }));
    }
    Ok(checks)
}

/// The full axiom battery: exact identities first, then the truncated
/// associativity check on seeded samples.
pub fn axioms_suite(
    inst: &OsvaInstance,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<Timed, CliError> {
    let mut rng = rng_for(seed);
    let mut checks = Timed::new();
    checks.push(timed(|| check_identity(inst)));
    checks.push(timed(|| check_creation(inst)));
    checks.push(timed(|| check_d_derivative(inst, &[])));
    checks.push(timed_err(|| {
        Ok(check_d_conjugation(inst, &rint(2), &[])?)
    })?);
    checks.push(timed(|| check_weight_property(inst, &rint(0), &rint(0))));
    if inst.conformal().is_some() {
        checks.push(timed_err(|| Ok(check_virasoro(inst, (-3, 3), tol)?))?);
    }
    let tuples = assoc_samples(&mut rng, inst, samples.max(1));
    checks.push(timed_err(|| {
        Ok(check_associativity(inst, &tuples, tol)?)
    })?);
    checks.push(timed(|| c0_membership(inst, inst.vacuum(), tol)));
    Ok(checks)
}

fn rvec_deviation(got: &RVec, want: &RVec) -> f64 {
    let mut worst = 0.0f64;
    for key in got.keys().chain(want.keys()) {
        let g = got.get(key).copied().unwrap_or(0.0);
        let w = want.get(key).copied().unwrap_or(0.0);
        let d = (g - w).abs();
        let scaled = if w != 0.0 { d / w.abs() } else { d };
        worst = worst.max(scaled);
    }
    worst
}

/// One geometric-layer check.
pub fn geometry_suite(
    inst: &OsvaInstance,
    check: GeomCheckKind,
    eps: f64,
    tol: f64,
    seed: u64,
) -> Result<Timed, CliError> {
    let mut rng = rng_for(seed);
    let dim = inst.space().dim();
    match check {
        GeomCheckKind::Vacuum => {
            let start = Instant::now();
            let got = extract_vacuum(inst)?;
            let want = qv_to_rv(inst.vacuum());
            let witnesses = if got == want {
                Vec::new()
            } else {
                vec![Witness {
                    input: "arity-0 evaluation with trivial jet".into(),
                    expected: format!("{want:?}"),
                    got: format!("{got:?}"),
                }]
            };
            Ok(vec![(
                CheckReport::exact("geometric-vacuum", witnesses),
                start.elapsed(),
            )])
        }
        GeomCheckKind::Conformal => {
            let omega = inst
                .conformal()
                .ok_or_else(|| {
                    CliError::Config("instance has no conformal vector".into())
                })?
                .omega
                .clone();
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(CliError::Config(format!("step {eps} must be positive")));
            }
            let want = qv_to_rv(&omega);
            let start = Instant::now();
            let fine = extract_conformal(inst, eps)?;
            let fine_dev = rvec_deviation(&fine, &want);
            let elapsed = start.elapsed();
            let mut checks = Timed::new();
            let witnesses = if fine_dev.is_finite() && fine_dev <= tol {
                Vec::new()
            } else {
                vec![Witness {
                    input: format!("central difference at eps = {eps}"),
                    expected: "conformal vector within tolerance".into(),
                    got: format!("worst per-coefficient deviation {fine_dev}"),
                }]
            };
            let passed = witnesses.is_empty();
            checks.push((
                CheckReport {
                    name: "geometric-conformal".into(),
                    passed,
                    residual: fine_dev,
                    tolerance: tol,
                    witnesses,
                },
                elapsed,
            ));
            // halving the step must cut the quadratic error, unless both
            // deviations already sit at the float noise floor
            let start = Instant::now();
            let coarse = extract_conformal(inst, 2.0 * eps)?;
            let coarse_dev = rvec_deviation(&coarse, &want);
            let converged = coarse_dev <= 1e-10 || coarse_dev / fine_dev.max(1e-300) >= 3.0;
            let witnesses = if converged {
                Vec::new()
            } else {
                vec![Witness {
                    input: format!("deviations at steps {} and {eps}", 2.0 * eps),
                    expected: "ratio at least 3 (quadratic convergence)".into(),
                    got: format!("{coarse_dev} / {fine_dev}"),
                }]
            };
            checks.push((
                CheckReport::exact("conformal-step-halving", witnesses),
                start.elapsed(),
            ));
            Ok(checks)
        }
        GeomCheckKind::Sewing => {
            let identity = standard_element(StandardElement::Identity)
                .expect("standard element");
            let scaling = standard_element(StandardElement::Scaling(2.0))
                .expect("standard element");
            let p_outer = standard_element(StandardElement::TwoPoint(1.0))
                .expect("standard element");
            let p_inner = standard_element(StandardElement::TwoPoint(0.6))
                .expect("standard element");
            let p_site = standard_element(StandardElement::TwoPoint(0.8))
                .expect("standard element");
            let mut checks = Timed::new();
            let u = sample_qvec(&mut rng, dim);
            let v = sample_qvec(&mut rng, dim);
            let w = sample_qvec(&mut rng, dim);
            let vprime = sample_qvec(&mut rng, dim);
            checks.push(timed_err(|| {
                let mut report =
                    check_sewing_axiom(inst, &p_site, 1, &identity, &[u.clone(), w.clone()], &vprime, tol)?;
                report.name = "sewing-identity".into();
                Ok(report)
            })?);
            checks.push(timed_err(|| {
                let mut report = check_sewing_axiom(
                    inst,
                    &p_outer,
                    2,
                    &p_inner,
                    &[u.clone(), v.clone(), w.clone()],
                    &vprime,
                    tol,
                )?;
                report.name = "sewing-product".into();
                Ok(report)
            })?);
            checks.push(timed_err(|| {
                let mut report = check_sewing_axiom(
                    inst,
                    &p_site,
                    2,
                    &scaling,
                    &[u.clone(), v.clone()],
                    &vprime,
                    tol,
                )?;
                report.name = "sewing-scale".into();
                Ok(report)
            })?);
            Ok(checks)
        }
        GeomCheckKind::PrConsistency => {
            let start = Instant::now();
            let mut witnesses = Vec::new();
            for _ in 0..4 {
                let u = sample_qvec(&mut rng, dim);
                let v = sample_qvec(&mut rng, dim);
                let vprime = sample_qvec(&mut rng, dim);
                let r = 0.5 + rng_range(&mut rng);
                let p = standard_element(StandardElement::TwoPoint(r))
                    .expect("standard element");
                let through_phi = phi_eval(inst, &p, &[u.clone(), v.clone()], &vprime)?;
                let through_vertex = rv_pair(&vprime, &vertex_eval(inst, &u, r, &v)?);
                if through_phi.to_bits() != through_vertex.to_bits() {
                    witnesses.push(Witness {
                        input: format!("r = {r}"),
                        expected: format!("{through_vertex}"),
                        got: format!("{through_phi}"),
                    });
                }
            }
            Ok(vec![(
                CheckReport::exact("two-point-consistency", witnesses),
                start.elapsed(),
            )])
        }
    }
}

fn rng_range(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    use rand::Rng;
    rng.gen::<f64>()
}
