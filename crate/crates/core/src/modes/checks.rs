//! Axiom checks over instances: identity, creation, rescaling conjugation,
//! derivative compatibility, weight finiteness, associativity, the Virasoro
//! relations, and meromorphic-center membership.
//!
//! Checks marked exact compare rationals and report witness mismatches; the
//! associativity check is the one genuinely numerical comparison, since the
//! two sides converge from different truncated series.

use std::collections::BTreeSet;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::report::{CheckReport, Witness};
use crate::scalars::{rational_string, rational_to_f64, rint, Rational};

use super::{
    matrix_element_product, qv_add_scaled, qv_basis, qv_scale, qv_sub, vertex_eval, ModesError,
    OsvaInstance, QVec,
};

fn witness(inst: &OsvaInstance, input: String, expected: &QVec, got: &QVec) -> Witness {
    Witness {
        input,
        expected: inst.space().render(expected),
        got: inst.space().render(got),
    }
}

/// Exact rational power for integer exponents.
fn rational_pow(base: &Rational, exp: &Rational) -> Option<Rational> {
    if !exp.is_integer() {
        return None;
    }
    let e = exp.to_integer().to_i32()?;
    if base.is_zero() && e < 0 {
        return None;
    }
    Some(num_traits::Pow::pow(base.clone(), e))
}

/// Identity property: every vacuum mode acts as `delta_{n,-1} id`.
pub fn check_identity(inst: &OsvaInstance) -> CheckReport {
    let mut witnesses = Vec::new();
    let wt_vac = inst
        .space()
        .homogeneous_weight(inst.vacuum())
        .unwrap_or_else(|| rint(0));
    for v in inst.space().indices() {
        let wt_v = inst.space().weight(v).clone();
        for n in inst.mode_range(&wt_vac, &wt_v) {
            let got = inst.apply_mode(inst.vacuum(), n, &qv_basis(v));
            let expected = if n == -1 { qv_basis(v) } else { QVec::new() };
            if got != expected {
                witnesses.push(witness(
                    inst,
                    format!("vacuum mode {n} on {}", inst.space().label(v)),
                    &expected,
                    &got,
                ));
            }
        }
    }
    CheckReport::exact("identity", witnesses)
}

/// Creation property: modes on the vacuum vanish for `n >= 0`, give back the
/// vector at `n = -1`, and produce `D^k u / k!` at `n = -k-1`.
pub fn check_creation(inst: &OsvaInstance) -> CheckReport {
    let mut witnesses = Vec::new();
    let wt_vac = inst
        .space()
        .homogeneous_weight(inst.vacuum())
        .unwrap_or_else(|| rint(0));
    for u in inst.space().indices() {
        let wt_u = inst.space().weight(u).clone();
        // Expected vectors D^k u / k! for every k the mode range can reach.
        let mut dpow = qv_basis(u);
        let mut expected_by_k = vec![dpow.clone()];
        for k in 1..=(inst.space().cutoff() as i64 + 1) {
            dpow = inst.d_apply(&dpow);
            expected_by_k.push(qv_scale(&dpow, &factorial(k).recip()));
        }
        for n in inst.mode_range(&wt_u, &wt_vac) {
            let got = inst.apply_mode(&qv_basis(u), n, inst.vacuum());
            let expected = if n >= 0 {
                QVec::new()
            } else {
                let k = (-n - 1) as usize;
                expected_by_k.get(k).cloned().unwrap_or_default()
            };
            if got != expected {
                witnesses.push(witness(
                    inst,
                    format!("creation mode {n} of {}", inst.space().label(u)),
                    &expected,
                    &got,
                ));
            }
        }
    }
    CheckReport::exact("creation", witnesses)
}

fn factorial(k: i64) -> Rational {
    (1..=k).fold(rint(1), |acc, i| acc * rint(i))
}

/// Rescaling conjugation: mode coefficients transform by
/// `a^{wt u - n - 1}`; equivalently every stored mode output is homogeneous
/// of the book-kept weight.  Exact for rational `a` and integral exponents;
/// fractional exponents fall back to floats at 1e-12.
pub fn check_d_conjugation(
    inst: &OsvaInstance,
    a: &Rational,
    samples: &[(usize, usize)],
) -> Result<CheckReport, ModesError> {
    if !a.is_positive() {
        return Err(ModesError::NonPositiveRescale(rational_string(a)));
    }
    let all: Vec<(usize, usize)>;
    let pairs: &[(usize, usize)] = if samples.is_empty() {
        all = inst
            .space()
            .indices()
            .flat_map(|u| inst.space().indices().map(move |v| (u, v)))
            .collect();
        &all
    } else {
        samples
    };
    let mut witnesses = Vec::new();
    let mut max_float_residual = 0.0f64;
    let mut float_path = false;
    for &(u, v) in pairs {
        let wt_u = inst.space().weight(u).clone();
        let wt_v = inst.space().weight(v).clone();
        for n in inst.mode_range_basis(u, v) {
            let out = inst.modes_basis(u, n, v);
            if out.is_empty() {
                continue;
            }
            let rhs_exp = &wt_u - rint(n + 1);
            for (&label, coeff) in &out {
                let lhs_exp = inst.space().weight(label) - &wt_v;
                match (rational_pow(a, &lhs_exp), rational_pow(a, &rhs_exp)) {
                    (Some(lp), Some(rp)) => {
                        if &lp * coeff != &rp * coeff {
                            witnesses.push(Witness {
                                input: format!(
                                    "conjugation of mode {n}: {} , {} at output {}",
                                    inst.space().label(u),
                                    inst.space().label(v),
                                    inst.space().label(label)
                                ),
                                expected: rational_string(&(&rp * coeff)),
                                got: rational_string(&(&lp * coeff)),
                            });
                        }
                    }
                    _ => {
                        float_path = true;
                        let af = rational_to_f64(a);
                        let lp = af.powf(rational_to_f64(&lhs_exp));
                        let rp = af.powf(rational_to_f64(&rhs_exp));
                        let diff =
                            ((lp - rp) * rational_to_f64(coeff)).abs();
                        max_float_residual = max_float_residual.max(diff);
                    }
                }
            }
        }
    }
    let report = if float_path {
        let mut r = CheckReport::with_residual(
            "rescaling-conjugation",
            max_float_residual,
            1e-12,
            witnesses,
        );
        r.passed = r.passed && r.witnesses.is_empty();
        r
    } else {
        CheckReport::exact("rescaling-conjugation", witnesses)
    };
    Ok(report)
}

/// Derivative compatibility: the coefficient identity
/// `(Du)^+_m = -m u^+_{m-1}` and the bracket `[D, u^+_m] = (Du)^+_m`,
/// checked exactly on retained weights.
pub fn check_d_derivative(inst: &OsvaInstance, samples: &[usize]) -> CheckReport {
    let mut witnesses = Vec::new();
    let all: Vec<usize>;
    let us: &[usize] = if samples.is_empty() {
        all = inst.space().indices().collect();
        &all
    } else {
        samples
    };
    let cutoff = rint(inst.space().cutoff() as i64);
    for &u in us {
        let wt_u = inst.space().weight(u).clone();
        if &wt_u + rint(1) > cutoff {
            continue; // Du leaves the retained range
        }
        let du = inst.d_apply(&qv_basis(u));
        for v in inst.space().indices() {
            let wt_v = inst.space().weight(v).clone();
            for m in inst.mode_range(&(&wt_u + rint(1)), &wt_v) {
                let lhs = inst.apply_mode(&du, m, &qv_basis(v));
                let rhs = qv_scale(
                    &inst.modes_basis(u, m - 1, v),
                    &rint(-m),
                );
                if lhs != rhs {
                    witnesses.push(witness(
                        inst,
                        format!(
                            "coefficient identity at mode {m}: D{} on {}",
                            inst.space().label(u),
                            inst.space().label(v)
                        ),
                        &rhs,
                        &lhs,
                    ));
                }
                if &wt_v + rint(1) <= cutoff {
                    let bracket = qv_sub(
                        &inst.d_apply(&inst.modes_basis(u, m, v)),
                        &inst.apply_mode(&qv_basis(u), m, &inst.d_apply(&qv_basis(v))),
                    );
                    if bracket != lhs {
                        witnesses.push(witness(
                            inst,
                            format!(
                                "bracket identity at mode {m}: {} on {}",
                                inst.space().label(u),
                                inst.space().label(v)
                            ),
                            &lhs,
                            &bracket,
                        ));
                    }
                }
            }
        }
    }
    CheckReport::exact("derivative-compatibility", witnesses)
}

/// Weight finiteness: collects the congruence classes mod 1 of output weights
/// for inputs from the classes `n1 + Z`, `n2 + Z`.  The truncated scan always
/// yields a finite set; the report lists it.
pub fn check_weight_property(
    inst: &OsvaInstance,
    n1: &Rational,
    n2: &Rational,
) -> CheckReport {
    let frac = |w: &Rational| -> Rational { w - w.floor() };
    let mut offsets: BTreeSet<Rational> = BTreeSet::new();
    for u in inst.space().indices() {
        if frac(&(inst.space().weight(u) - n1)) != rint(0) {
            continue;
        }
        for v in inst.space().indices() {
            if frac(&(inst.space().weight(v) - n2)) != rint(0) {
                continue;
            }
            for n in inst.mode_range_basis(u, v) {
                for label in inst.modes_basis(u, n, v).keys() {
                    offsets.insert(frac(inst.space().weight(*label)));
                }
            }
        }
    }
    let rendered = offsets
        .iter()
        .map(rational_string)
        .collect::<Vec<_>>()
        .join(", ");
    let mut report = CheckReport::exact("weight-finiteness", Vec::new());
    report.witnesses.push(Witness {
        input: format!(
            "weight classes {} + Z and {} + Z",
            rational_string(n1),
            rational_string(n2)
        ),
        expected: "finite offset set".to_string(),
        got: format!("{{{rendered}}}"),
    });
    report
}

/// Associativity sample: compare
/// `<v', Y(u, r1) Y(v, r2) w>` with `<v', Y(Y(u, r1-r2) v, r2) w>`.
#[derive(Debug, Clone)]
pub struct AssocSample {
    pub u: QVec,
    pub v: QVec,
    pub w: QVec,
    pub vprime: QVec,
    pub r1: f64,
    pub r2: f64,
}

/// Associativity of products and iterates at admissible radii
/// `r1 > r2 > r1 - r2 > 0`; residual is the worst absolute difference.
pub fn check_associativity(
    inst: &OsvaInstance,
    samples: &[AssocSample],
    tol: f64,
) -> Result<CheckReport, ModesError> {
    let mut witnesses = Vec::new();
    let mut residual = 0.0f64;
    for sample in samples {
        let (r1, r2) = (sample.r1, sample.r2);
        if !(r1 > r2 && r2 > r1 - r2 && r1 - r2 > 0.0) {
            return Err(ModesError::InadmissibleRadii(r1, r2));
        }
        let (product, product_tail) = matrix_element_product(
            inst,
            &sample.vprime,
            &[(sample.u.clone(), r1), (sample.v.clone(), r2)],
            &sample.w,
        )?;
        let inner = vertex_eval(inst, &sample.u, r1 - r2, &sample.v)?;
        let mut iterate = 0.0f64;
        let mut iterate_tail = false;
        for (&label, coeff) in &inner {
            let (value, tail) = matrix_element_product(
                inst,
                &sample.vprime,
                &[(qv_basis(label), r2)],
                &sample.w,
            )?;
            iterate += coeff * value;
            iterate_tail = iterate_tail || tail;
        }
        let diff = (product - iterate).abs();
        residual = residual.max(diff);
        if diff > tol || !diff.is_finite() {
            let mut note = format!(
                "radii ({r1}, {r2}): product {product}, iterate {iterate}"
            );
            if product_tail || iterate_tail {
                note.push_str(" [tail-heavy truncation]");
            }
            witnesses.push(Witness {
                input: note,
                expected: format!("difference within {tol}"),
                got: format!("{diff}"),
            });
        }
    }
    Ok(CheckReport::with_residual(
        "associativity",
        residual,
        tol,
        witnesses,
    ))
}

/// Virasoro relations from the conformal element: brackets
/// `[L(m), L(n)] = (m-n) L(m+n) + c/12 (m^3-m) delta_{m+n,0}` on retained
/// vectors, plus `L(0) = d` (grading) and `L(-1) = D` (translation).
/// Exact on rational instances; `tol` is reserved for float-backed mode data.
pub fn check_virasoro(
    inst: &OsvaInstance,
    mode_range: (i64, i64),
    _tol: f64,
) -> Result<CheckReport, ModesError> {
    let conformal = inst.conformal().ok_or(ModesError::MissingConformal)?;
    let omega = &conformal.omega;
    let c = &conformal.central_charge;
    let cutoff = rint(inst.space().cutoff() as i64);
    let ell = |m: i64, v: &QVec| inst.apply_mode(omega, m + 1, v);
    let mut witnesses = Vec::new();

    for w in inst.space().indices() {
        let wt_w = inst.space().weight(w).clone();
        // L(0) = weight grading.
        let got = ell(0, &qv_basis(w));
        let expected = qv_scale(&qv_basis(w), &wt_w);
        if got != expected {
            witnesses.push(witness(
                inst,
                format!("L(0) on {}", inst.space().label(w)),
                &expected,
                &got,
            ));
        }
        // L(-1) = D, where the image stays retained.
        if &wt_w + rint(1) <= cutoff {
            let got = ell(-1, &qv_basis(w));
            let expected = inst.d_apply(&qv_basis(w));
            if got != expected {
                witnesses.push(witness(
                    inst,
                    format!("L(-1) on {}", inst.space().label(w)),
                    &expected,
                    &got,
                ));
            }
        }
    }

    let (lo, hi) = mode_range;
    for m in lo..=hi {
        for n in lo..=hi {
            for w in inst.space().indices() {
                let wt_w = inst.space().weight(w).clone();
                // Intermediate and final weights must stay at or below the
                // cutoff for the truncated bracket to be exact; negative
                // weights are genuinely zero, so they never spoil it.
                let fits = |shift: i64| &wt_w - rint(shift) <= cutoff;
                if !(fits(n) && fits(m) && fits(m + n)) {
                    continue;
                }
                let base = qv_basis(w);
                let bracket = qv_sub(&ell(m, &ell(n, &base)), &ell(n, &ell(m, &base)));
                let mut expected = qv_scale(&ell(m + n, &base), &rint(m - n));
                if m + n == 0 {
                    let central = c * rint(m * m * m - m) / rint(12);
                    qv_add_scaled(&mut expected, &base, &central);
                }
                if bracket != expected {
                    witnesses.push(witness(
                        inst,
                        format!("[L({m}), L({n})] on {}", inst.space().label(w)),
                        &expected,
                        &bracket,
                    ));
                }
            }
        }
    }
    Ok(CheckReport::exact("virasoro", witnesses))
}

/// Meromorphic-center membership: integral weight support, integral mode
/// support, and skew-symmetry `v^+_n u = sum_k (-1)^{n+k+1} D^k(u^+_{n+k} v) / k!`
/// against every retained basis vector.  The `tol` parameter is reserved for
/// float-backed instances; rational instances compare exactly.
pub fn c0_membership(inst: &OsvaInstance, u: &QVec, _tol: f64) -> CheckReport {
    let mut witnesses = Vec::new();

    // (a) integral weight support.
    for label in u.keys() {
        let w = inst.space().weight(*label);
        if !w.is_integer() {
            witnesses.push(Witness {
                input: format!("weight of component {}", inst.space().label(*label)),
                expected: "integer".to_string(),
                got: rational_string(w),
            });
        }
    }

    // (b) integral mode support holds structurally: the mode family is
    // indexed by integers, so the vertex series has only integer powers.
    // (c) skew-symmetry against every basis vector.
    if witnesses.is_empty() {
        let (min_u, max_u) = match (
            u.keys().map(|l| inst.space().weight(*l)).min(),
            u.keys().map(|l| inst.space().weight(*l)).max(),
        ) {
            (Some(a), Some(b)) => (a.clone(), b.clone()),
            _ => (rint(0), rint(0)),
        };
        for v in inst.space().indices() {
            let wt_v = inst.space().weight(v).clone();
            let lo_range = inst.mode_range(&wt_v, &min_u);
            let hi_range = inst.mode_range(&wt_v, &max_u);
            let lo = *lo_range.iter().chain(hi_range.iter()).min().expect("nonempty");
            let hi = *lo_range.iter().chain(hi_range.iter()).max().expect("nonempty");
            for n in lo..=hi {
                let lhs = inst.apply_mode(&qv_basis(v), n, u);
                let mut rhs = QVec::new();
                let mut k = 0i64;
                loop {
                    let term = inst.apply_mode(u, n + k, &qv_basis(v));
                    // Beyond this point every mode output weight is negative.
                    let exhausted = &max_u + &wt_v - rint(n + k + 1) < rint(0);
                    if term.is_empty() && exhausted {
                        break;
                    }
                    let mut lifted = term;
                    for _ in 0..k {
                        lifted = inst.d_apply(&lifted);
                    }
                    let sign = if (n + k + 1).rem_euclid(2) == 0 { 1 } else { -1 };
                    let scale = rint(sign) * factorial(k).recip();
                    qv_add_scaled(&mut rhs, &lifted, &scale);
                    k += 1;
                }
                if lhs != rhs {
                    witnesses.push(Witness {
                        input: format!(
                            "skew-symmetry at mode {n} against {}",
                            inst.space().label(v)
                        ),
                        expected: inst.space().render(&rhs),
                        got: inst.space().render(&lhs),
                    });
                }
            }
        }
    }
    CheckReport::exact("center-membership", witnesses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{
        make_assoc_algebra_instance, make_heisenberg_instance, make_tensor_instance,
        matrix_units_table, qv_add_scaled, GradedSpace, ModeBackend, ModeTable,
    };
    use crate::scalars::rat;

    fn heisenberg(cutoff: usize) -> OsvaInstance {
        make_heisenberg_instance(cutoff).unwrap()
    }

    fn m2() -> OsvaInstance {
        make_assoc_algebra_instance(&matrix_units_table(2), 4).unwrap()
    }

    fn m2_heis(cutoff: usize) -> OsvaInstance {
        make_tensor_instance(&m2(), heisenberg(cutoff)).unwrap()
    }

    #[test]
    fn identity_and_creation_exact_on_all_instances() {
        for inst in [heisenberg(6), m2(), m2_heis(4)] {
            let id = check_identity(&inst);
            assert!(id.passed, "{}: {:?}", inst.name, id.witnesses);
            let cr = check_creation(&inst);
            assert!(cr.passed, "{}: {:?}", inst.name, cr.witnesses);
        }
    }

    #[test]
    fn conjugation_exact_for_rational_rescale() {
        for inst in [heisenberg(5), m2(), m2_heis(3)] {
            for a in [rint(1), rint(2), rat(3, 5)] {
                let report = check_d_conjugation(&inst, &a, &[]).unwrap();
                assert!(report.passed, "{}: {:?}", inst.name, report.witnesses);
                assert_eq!(report.residual, 0.0);
            }
        }
        let inst = heisenberg(3);
        assert!(matches!(
            check_d_conjugation(&inst, &rint(-2), &[]),
            Err(ModesError::NonPositiveRescale(_))
        ));
    }

    #[test]
    fn derivative_compatibility_exact() {
        for inst in [heisenberg(6), m2(), m2_heis(4)] {
            let report = check_d_derivative(&inst, &[]);
            assert!(report.passed, "{}: {:?}", inst.name, report.witnesses);
        }
    }

    #[test]
    fn weight_offsets_integer_instances() {
        let inst = heisenberg(5);
        let report = check_weight_property(&inst, &rint(0), &rint(0));
        assert!(report.passed);
        assert_eq!(report.witnesses[0].got, "{0}");
    }

    #[test]
    fn weight_offsets_fractional_table() {
        // Toy two-dimensional instance with a weight-1/2 vector: the only
        // products land back in the two basis lines, so offsets are {0, 1/2}.
        let space = GradedSpace::new(
            vec!["1".into(), "s".into()],
            vec![rint(0), rat(1, 2)],
            3,
        );
        let mut table = ModeTable::default();
        table.entries.insert((0, -1, 0), qv_basis(0));
        table.entries.insert((0, -1, 1), qv_basis(1));
        table.entries.insert((1, -1, 0), qv_basis(1));
        let inst = OsvaInstance::new(
            "toy".into(),
            space,
            qv_basis(0),
            vec![QVec::new(), QVec::new()],
            None,
            ModeBackend::Table(table),
        );
        // Products of the class-0 line with the class-1/2 line stay in the
        // 1/2 class; the integer classes among themselves stay at 0.
        let report = check_weight_property(&inst, &rint(0), &rat(1, 2));
        assert!(report.passed);
        assert_eq!(report.witnesses[0].got, "{1/2}");
        let report = check_weight_property(&inst, &rint(0), &rint(0));
        assert_eq!(report.witnesses[0].got, "{0}");
    }

    #[test]
    fn virasoro_relations_heisenberg() {
        let inst = heisenberg(6);
        let report = check_virasoro(&inst, (-3, 3), 0.0).unwrap();
        assert!(report.passed, "{:?}", report.witnesses);
    }

    #[test]
    fn virasoro_relations_tensor_and_assoc() {
        let report = check_virasoro(&m2(), (-2, 2), 0.0).unwrap();
        assert!(report.passed, "{:?}", report.witnesses);
        let report = check_virasoro(&m2_heis(4), (-2, 2), 0.0).unwrap();
        assert!(report.passed, "{:?}", report.witnesses);
    }

    #[test]
    fn central_term_on_vacuum() {
        // [L(2), L(-2)] 1 = (4 L(0) + c/2) 1 = c/2 1 with c = 1.
        let inst = heisenberg(6);
        let omega = &inst.conformal().unwrap().omega;
        let l = |m: i64, v: &QVec| inst.apply_mode(omega, m + 1, v);
        let vac = inst.vacuum().clone();
        let bracket = qv_sub(&l(2, &l(-2, &vac)), &l(-2, &l(2, &vac)));
        assert_eq!(bracket, qv_scale(&vac, &rat(1, 2)));
    }

    #[test]
    fn associativity_exact_for_associative_algebra() {
        let inst = m2();
        let mut samples = Vec::new();
        for (u, v) in [(1usize, 2usize), (0, 1), (2, 3)] {
            samples.push(AssocSample {
                u: qv_basis(u),
                v: qv_basis(v),
                w: inst.vacuum().clone(),
                vprime: qv_basis(0),
                r1: 1.0,
                r2: 0.6,
            });
        }
        let report = check_associativity(&inst, &samples, 1e-12).unwrap();
        assert!(report.passed, "{:?}", report.witnesses);
        assert_eq!(report.residual, 0.0);
    }

    #[test]
    fn associativity_rejects_bad_radii() {
        let inst = m2();
        let sample = AssocSample {
            u: qv_basis(0),
            v: qv_basis(0),
            w: inst.vacuum().clone(),
            vprime: qv_basis(0),
            r1: 1.0,
            r2: 0.4, // r1 - r2 = 0.6 > r2
        };
        assert!(matches!(
            check_associativity(&inst, &[sample], 1.0),
            Err(ModesError::InadmissibleRadii(_, _))
        ));
    }

    #[test]
    fn associativity_residual_shrinks_with_cutoff() {
        // The truncated series at ratio 0.6 converge slowly; the residual
        // must still drop substantially as the cutoff grows.
        let sample = |inst: &OsvaInstance| AssocSample {
            u: qv_basis(1),
            v: qv_basis(1),
            w: inst.vacuum().clone(),
            vprime: inst.vacuum().clone(),
            r1: 1.0,
            r2: 0.6,
        };
        let coarse = heisenberg(6);
        let fine = heisenberg(10);
        let r_coarse = check_associativity(&coarse, &[sample(&coarse)], 1e9)
            .unwrap()
            .residual;
        let r_fine = check_associativity(&fine, &[sample(&fine)], 1e9)
            .unwrap()
            .residual;
        assert!(r_fine < 0.5 * r_coarse, "coarse {r_coarse} fine {r_fine}");
    }

    #[test]
    fn center_membership_vacuum_everywhere() {
        for inst in [heisenberg(5), m2(), m2_heis(3)] {
            let report = c0_membership(&inst, &inst.vacuum().clone(), 0.0);
            assert!(report.passed, "{}: {:?}", inst.name, report.witnesses);
        }
    }

    #[test]
    fn center_membership_detects_off_diagonal_matrix() {
        let inst = m2_heis(3);
        let dv = match &inst.backend {
            ModeBackend::Tensor(t) => t.right.space().dim(),
            _ => unreachable!(),
        };
        // E_12 (x) 1 fails skew-symmetry against E_21 (x) 1.
        let report = c0_membership(&inst, &qv_basis(dv), 0.0);
        assert!(!report.passed);
        assert!(report
            .witnesses
            .iter()
            .any(|w| w.input.contains("skew-symmetry")));
        // I (x) a(-1)1 is central.
        let mut central = qv_basis(1);
        qv_add_scaled(&mut central, &qv_basis(3 * dv + 1), &rint(1));
        let report = c0_membership(&inst, &central, 0.0);
        assert!(report.passed, "{:?}", report.witnesses);
    }

    #[test]
    fn fractional_weight_excluded_from_center() {
        let space = GradedSpace::new(
            vec!["1".into(), "s".into()],
            vec![rint(0), rat(1, 2)],
            3,
        );
        let mut table = ModeTable::default();
        table.entries.insert((0, -1, 0), qv_basis(0));
        table.entries.insert((0, -1, 1), qv_basis(1));
        table.entries.insert((1, -1, 0), qv_basis(1));
        let inst = OsvaInstance::new(
            "toy".into(),
            space,
            qv_basis(0),
            vec![QVec::new(), QVec::new()],
            None,
            ModeBackend::Table(table),
        );
        let report = c0_membership(&inst, &qv_basis(1), 0.0);
        assert!(!report.passed);
        assert!(report.witnesses[0].expected.contains("integer"));
    }
}
