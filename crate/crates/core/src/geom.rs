//! Disks with strip-like punctures: moduli elements, local coordinate jets,
//! and the evaluation map that turns them into multilinear maps on a graded
//! instance.
//!
//! An element of arity `n` is a disk with `n` ordered boundary punctures and
//! one outgoing boundary puncture at infinity.  Punctures `1..n-1` sit at the
//! recorded positions, puncture `n` sits at the origin, and every puncture
//! carries a formal local coordinate `exp(sum_j A_j x^{j+1} d/dx)(a0 x)`
//! recorded as a [`CoordinateJet`].  The outgoing puncture carries a jet with
//! no scale factor; for arity `0` its first coefficient must vanish.
//!
//! Evaluation dresses each argument with its jet through Virasoro modes,
//! multiplies vertex operators at the puncture positions in decreasing order,
//! and applies the outgoing jet to the result.  Affine sewing composes two
//! elements whose local coordinates at the sewing site have no higher jet
//! coefficients; [`check_sewing_axiom`] compares the sewn evaluation against
//! the contraction of the two factor evaluations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modes::{
    apply_vertex_factor, qv_to_rv, rv_add_scaled, rv_pair, OsvaInstance, QVec, RVec,
};
use crate::report::{CheckReport, Witness};
use crate::scalars::rational_to_f64;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("invalid moduli element: {0}")]
    Invalid(String),
    #[error("element is not admissible for evaluation: {0}")]
    NotAdmissible(String),
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("puncture index {index} out of range 1..={arity}")]
    BadPuncture { index: usize, arity: usize },
    #[error("local coordinates at the sewing site must be affine")]
    NonAffine,
    #[error("sewing is not defined here: {0}")]
    NotSewable(String),
    #[error("the first outgoing jet coefficient must vanish on arity-0 elements")]
    FirstJetCoefficient,
    #[error("nontrivial jet coefficients require a conformal vector")]
    MissingConformal,
    #[error("finite-difference step must be nonzero and finite")]
    ZeroStep,
}

/// Formal local coordinate `exp(sum_j coeffs[j-1] x^{j+1} d/dx)(a0 x)`.
///
/// `a0` is the linear scale; it is absent on outgoing jets.  The jet is
/// affine when every higher coefficient vanishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateJet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(rename = "A", default)]
    pub coeffs: Vec<f64>,
}

impl CoordinateJet {
    pub fn trivial() -> Self {
        CoordinateJet { a0: None, coeffs: Vec::new() }
    }

    pub fn with_scale(a0: f64) -> Self {
        CoordinateJet { a0: Some(a0), coeffs: Vec::new() }
    }

    pub fn scale(&self) -> f64 {
        self.a0.unwrap_or(1.0)
    }

    pub fn is_affine(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    fn check_finite(&self) -> Result<(), GeomError> {
        if self.a0.is_some_and(|a| !a.is_finite()) {
            return Err(GeomError::Invalid("jet scale is not finite".into()));
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::Invalid("jet coefficient is not finite".into()));
        }
        Ok(())
    }
}

/// A disk with `jets.len()` ordered punctures plus the outgoing puncture.
///
/// `positions` lists the positions of punctures `1..n-1`; puncture `n` is at
/// the origin.  `jets[k]` is the local coordinate at puncture `k+1` and must
/// carry a positive scale; `jet0` is the outgoing coordinate and carries
/// none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuliElement {
    pub positions: Vec<f64>,
    pub jet0: CoordinateJet,
    pub jets: Vec<CoordinateJet>,
}

impl ModuliElement {
    pub fn arity(&self) -> usize {
        self.jets.len()
    }

    /// Position of puncture `k+1` (0-based `k`); the last puncture is at the
    /// origin.
    pub fn position_of(&self, k: usize) -> f64 {
        if k + 1 == self.jets.len() {
            0.0
        } else {
            self.positions[k]
        }
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        let n = self.jets.len();
        if n == 0 {
            if !self.positions.is_empty() {
                return Err(GeomError::Invalid(
                    "arity-0 element with puncture positions".into(),
                ));
            }
            if self.jet0.coeffs.first().is_some_and(|c| *c != 0.0) {
                return Err(GeomError::FirstJetCoefficient);
            }
        } else if self.positions.len() + 1 != n {
            return Err(GeomError::Invalid(format!(
                "{} positions for {} punctures; the last puncture is implicit at the origin",
                self.positions.len(),
                n
            )));
        }
        if self.jet0.a0.is_some() {
            return Err(GeomError::Invalid(
                "the outgoing jet carries no scale factor".into(),
            ));
        }
        self.jet0.check_finite()?;
        for jet in &self.jets {
            jet.check_finite()?;
            match jet.a0 {
                Some(a) if a > 0.0 => {}
                _ => {
                    return Err(GeomError::Invalid(
                        "puncture jets need a positive scale".into(),
                    ))
                }
            }
        }
        for (k, p) in self.positions.iter().enumerate() {
            if !p.is_finite() || *p == 0.0 {
                return Err(GeomError::Invalid(format!(
                    "puncture position {p} is not a finite nonzero real"
                )));
            }
            for q in &self.positions[k + 1..] {
                if p == q {
                    return Err(GeomError::Invalid(format!(
                        "coincident puncture positions at {p}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The standard generators: the one-puncture identity, the two-puncture
/// element at radius `r`, the arity-0 element with a single outgoing jet
/// coefficient, and the scaled one-puncture element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StandardElement {
    Identity,
    TwoPoint(f64),
    Cap { index: usize, coeff: f64 },
    Scaling(f64),
}

pub fn standard_element(kind: StandardElement) -> Result<ModuliElement, GeomError> {
    let element = match kind {
        StandardElement::Identity => ModuliElement {
            positions: Vec::new(),
            jet0: CoordinateJet::trivial(),
            jets: vec![CoordinateJet::with_scale(1.0)],
        },
        StandardElement::TwoPoint(r) => {
            if !(r > 0.0 && r.is_finite()) {
                return Err(GeomError::Invalid(format!(
                    "two-point radius {r} must be positive"
                )));
            }
            ModuliElement {
                positions: vec![r],
                jet0: CoordinateJet::trivial(),
                jets: vec![CoordinateJet::with_scale(1.0), CoordinateJet::with_scale(1.0)],
            }
        }
        StandardElement::Cap { index, coeff } => {
            if index < 2 {
                return Err(GeomError::FirstJetCoefficient);
            }
            if !coeff.is_finite() {
                return Err(GeomError::Invalid("cap coefficient is not finite".into()));
            }
            let mut coeffs = vec![0.0; index];
            coeffs[index - 1] = coeff;
            ModuliElement {
                positions: Vec::new(),
                jet0: CoordinateJet { a0: None, coeffs },
                jets: Vec::new(),
            }
        }
        StandardElement::Scaling(a) => {
            if !(a > 0.0 && a.is_finite()) {
                return Err(GeomError::Invalid(format!(
                    "scale factor {a} must be positive"
                )));
            }
            ModuliElement {
                positions: Vec::new(),
                jet0: CoordinateJet::trivial(),
                jets: vec![CoordinateJet::with_scale(a)],
            }
        }
    };
    Ok(element)
}

/// Taylor coefficients of the coordinate series `exp(sum_j A_j x^{j+1}
/// d/dx)(a0 x)` up to `x^order`; entry `k` is the coefficient of `x^{k+1}`.
///
/// Each application of the derivation raises the lowest degree, so the
/// exponential terminates on its own within `order` rounds.
pub fn coord_series(jet: &CoordinateJet, order: usize) -> Vec<f64> {
    let mut acc = vec![0.0; order];
    if order == 0 {
        return acc;
    }
    acc[0] = jet.scale();
    let mut term = acc.clone();
    for k in 1..=order {
        let next = jet_derivation(jet, &term, order, 1.0 / k as f64);
        if next.iter().all(|c| *c == 0.0) {
            break;
        }
        for (a, b) in acc.iter_mut().zip(&next) {
            *a += b;
        }
        term = next;
    }
    acc
}

/// `(scale / 1) * (sum_j A_j x^{j+1} d/dx)` applied to a polynomial indexed
/// by power minus one, truncated above `x^order`.
fn jet_derivation(jet: &CoordinateJet, poly: &[f64], order: usize, scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; order];
    for (jm1, aj) in jet.coeffs.iter().enumerate() {
        if *aj == 0.0 {
            continue;
        }
        let j = jm1 + 1;
        for (mm1, c) in poly.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let m = mm1 + 1;
            if m + j <= order {
                out[m + j - 1] += aj * m as f64 * c * scale;
            }
        }
    }
    out
}

/// Which side of the evaluation a jet acts on.
///
/// `Argument` is the dressing `exp(-sum_j A_j L(j)) a0^{-L(0)}` applied to an
/// inserted vector; the weight-lowering exponential terminates exactly.
/// `Outgoing` is `exp(-sum_j A_j L(-j))` applied to the assembled result; the
/// weight-raising exponential is truncated at the instance cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetDirection {
    Argument,
    Outgoing,
}

/// Apply a mode of an exact vector to a float state.
fn apply_mode_f(inst: &OsvaInstance, u: &QVec, n: i64, v: &RVec) -> RVec {
    let mut out = RVec::new();
    for (&vi, cv) in v {
        if *cv == 0.0 {
            continue;
        }
        for (&ui, cu) in u {
            let w = inst.modes_basis(ui, n, vi);
            if w.is_empty() {
                continue;
            }
            rv_add_scaled(&mut out, &qv_to_rv(&w), rational_to_f64(cu) * cv);
        }
    }
    out.retain(|_, c| *c != 0.0);
    out
}

/// The action of a coordinate jet on a state vector through Virasoro modes
/// `L(m) = omega^+_{m+1}`.  Trivial jets act as the identity bit for bit.
pub fn virasoro_jet_action(
    inst: &OsvaInstance,
    jet: &CoordinateJet,
    direction: JetDirection,
    v: &RVec,
) -> Result<RVec, GeomError> {
    jet.check_finite()?;
    let mut state = v.clone();
    if direction == JetDirection::Argument {
        let a0 = jet.scale();
        if a0 <= 0.0 {
            return Err(GeomError::Invalid(format!(
                "jet scale {a0} must be positive"
            )));
        }
        if a0 != 1.0 {
            state = state
                .iter()
                .map(|(&i, c)| {
                    (i, c * a0.powf(-rational_to_f64(inst.space().weight(i))))
                })
                .collect();
        }
    }
    if jet.is_affine() {
        return Ok(state);
    }
    let omega = inst
        .conformal()
        .ok_or(GeomError::MissingConformal)?
        .omega
        .clone();
    let sign: i64 = match direction {
        JetDirection::Argument => 1,
        JetDirection::Outgoing => -1,
    };
    // exp(-sum_j A_j L(sign * j)); each round shifts weights by at least one,
    // so the series empties within the retained range
    let mut acc = state.clone();
    let mut term = state;
    let max_rounds = 2 * (inst.space().cutoff() + jet.coeffs.len() + 2);
    for k in 1..=max_rounds {
        let mut next = RVec::new();
        for (jm1, aj) in jet.coeffs.iter().enumerate() {
            if *aj == 0.0 {
                continue;
            }
            let j = (jm1 + 1) as i64;
            let moved = apply_mode_f(inst, &omega, sign * j + 1, &term);
            rv_add_scaled(&mut next, &moved, -aj / k as f64);
        }
        next.retain(|_, c| *c != 0.0);
        if next.is_empty() {
            break;
        }
        rv_add_scaled(&mut acc, &next, 1.0);
        term = next;
    }
    Ok(acc)
}

/// Core evaluation on float arguments: dress each argument with its jet,
/// multiply vertex factors at the puncture positions in decreasing order
/// (the origin puncture innermost), then apply the outgoing jet.
fn phi_state(
    inst: &OsvaInstance,
    q: &ModuliElement,
    args: &[RVec],
) -> Result<RVec, GeomError> {
    q.validate()?;
    let n = q.jets.len();
    if args.len() != n {
        return Err(GeomError::ArityMismatch { expected: n, got: args.len() });
    }
    if n == 0 {
        let state = qv_to_rv(inst.vacuum());
        return virasoro_jet_action(inst, &q.jet0, JetDirection::Outgoing, &state);
    }
    for p in &q.positions {
        if *p <= 0.0 {
            return Err(GeomError::NotAdmissible(format!(
                "puncture position {p} is not positive"
            )));
        }
    }
    let mut order: Vec<usize> = (0..n - 1).collect();
    order.sort_by(|&a, &b| q.positions[b].partial_cmp(&q.positions[a]).unwrap());
    let mut dressed = Vec::with_capacity(n);
    for (jet, arg) in q.jets.iter().zip(args) {
        dressed.push(virasoro_jet_action(inst, jet, JetDirection::Argument, arg)?);
    }
    let mut state = dressed[n - 1].clone();
    for &k in order.iter().rev() {
        state = apply_vertex_factor(inst, &dressed[k], q.positions[k], &state);
    }
    virasoro_jet_action(inst, &q.jet0, JetDirection::Outgoing, &state)
}

/// Evaluate the element on exact arguments, returning the state vector
/// before pairing.  Arity 0 is allowed and needs no arguments.
pub fn phi_apply(
    inst: &OsvaInstance,
    q: &ModuliElement,
    args: &[QVec],
) -> Result<RVec, GeomError> {
    let rargs: Vec<RVec> = args.iter().map(qv_to_rv).collect();
    phi_state(inst, q, &rargs)
}

/// Evaluate the element and pair the result against `vprime`.
///
/// For the two-point element this agrees with the vertex map bit for bit:
/// both go through the same factor application.
pub fn phi_eval(
    inst: &OsvaInstance,
    q: &ModuliElement,
    args: &[QVec],
    vprime: &QVec,
) -> Result<f64, GeomError> {
    Ok(rv_pair(vprime, &phi_apply(inst, q, args)?))
}

/// The arity-0 evaluation with the trivial outgoing jet; equals the vacuum
/// exactly.
pub fn extract_vacuum(inst: &OsvaInstance) -> Result<RVec, GeomError> {
    let cap = ModuliElement {
        positions: Vec::new(),
        jet0: CoordinateJet::trivial(),
        jets: Vec::new(),
    };
    phi_state(inst, &cap, &[])
}

/// Recover the conformal vector as the central difference
/// `(Phi0(A(-eps;2)) - Phi0(A(eps;2))) / (2 eps)`, accurate to `O(eps^2)`.
pub fn extract_conformal(inst: &OsvaInstance, eps: f64) -> Result<RVec, GeomError> {
    if eps == 0.0 || !eps.is_finite() {
        return Err(GeomError::ZeroStep);
    }
    let cap = |coeff: f64| standard_element(StandardElement::Cap { index: 2, coeff });
    let plus = phi_state(inst, &cap(eps)?, &[])?;
    let minus = phi_state(inst, &cap(-eps)?, &[])?;
    let mut out = RVec::new();
    rv_add_scaled(&mut out, &minus, 1.0 / (2.0 * eps));
    rv_add_scaled(&mut out, &plus, -1.0 / (2.0 * eps));
    out.retain(|_, c| *c != 0.0);
    Ok(out)
}

/// Sew the outgoing puncture of `q2` into puncture `index` of `q1`.
///
/// Both local coordinates at the sewing site must be affine.  With position
/// `p` and scale `a` at the site, the interior of `q2` maps in by
/// `w -> p + w / a`: punctures land at `p + y / a` and a jet `(b0, B_j)`
/// becomes `(a b0, B_j a^j)`.  The image must stay strictly closer to `p`
/// than every other puncture of `q1`; capping the origin puncture is
/// rejected because renormalizing the lost origin would need a translation
/// outside the affine class.
pub fn sew_affine(
    q1: &ModuliElement,
    index: usize,
    q2: &ModuliElement,
) -> Result<ModuliElement, GeomError> {
    q1.validate()?;
    q2.validate()?;
    let n1 = q1.jets.len();
    let n2 = q2.jets.len();
    if index == 0 || index > n1 {
        return Err(GeomError::BadPuncture { index, arity: n1 });
    }
    let i = index - 1;
    if !q1.jets[i].is_affine() || !q2.jet0.is_affine() {
        return Err(GeomError::NonAffine);
    }
    if n2 == 0 && i + 1 == n1 {
        return Err(GeomError::NotSewable(
            "capping the origin puncture leaves no puncture at the origin".into(),
        ));
    }
    let a = q1.jets[i].scale();
    let p = q1.position_of(i);
    if n2 > 0 {
        let reach = (0..n2)
            .map(|j| q2.position_of(j).abs() / a)
            .fold(0.0, f64::max);
        let clearance = (0..n1)
            .filter(|k| *k != i)
            .map(|k| (p - q1.position_of(k)).abs())
            .fold(f64::INFINITY, f64::min);
        if reach >= clearance {
            return Err(GeomError::NotSewable(format!(
                "sewn image of radius {reach} reaches another puncture at distance {clearance}"
            )));
        }
    }
    let mapped_jets: Vec<CoordinateJet> = q2
        .jets
        .iter()
        .map(|b| CoordinateJet {
            a0: Some(a * b.scale()),
            coeffs: b
                .coeffs
                .iter()
                .enumerate()
                .map(|(jm1, c)| c * a.powi(jm1 as i32 + 1))
                .collect(),
        })
        .collect();
    let mut positions = Vec::new();
    let mut jets = Vec::new();
    if i + 1 == n1 {
        // the origin puncture of q2 becomes the new origin puncture
        positions.extend_from_slice(&q1.positions);
        positions.extend(q2.positions.iter().map(|y| p + y / a));
        jets.extend_from_slice(&q1.jets[..i]);
        jets.extend(mapped_jets);
    } else {
        positions.extend_from_slice(&q1.positions[..i]);
        positions.extend((0..n2).map(|j| p + q2.position_of(j) / a));
        positions.extend_from_slice(&q1.positions[i + 1..]);
        jets.extend_from_slice(&q1.jets[..i]);
        jets.extend(mapped_jets);
        jets.extend_from_slice(&q1.jets[i + 1..]);
    }
    let out = ModuliElement { positions, jet0: q1.jet0.clone(), jets };
    out.validate()
        .map_err(|e| GeomError::NotSewable(e.to_string()))?;
    Ok(out)
}

/// Compare the evaluation of the sewn element against the contraction of the
/// two factors: `q2` evaluated on its argument block, the truncated result
/// inserted into slot `index` of `q1`.
pub fn check_sewing_axiom(
    inst: &OsvaInstance,
    q1: &ModuliElement,
    index: usize,
    q2: &ModuliElement,
    args: &[QVec],
    vprime: &QVec,
    tol: f64,
) -> Result<CheckReport, GeomError> {
    let sewn = sew_affine(q1, index, q2)?;
    let n1 = q1.jets.len();
    let n2 = q2.jets.len();
    let total = n1 + n2 - 1;
    if args.len() != total {
        return Err(GeomError::ArityMismatch { expected: total, got: args.len() });
    }
    let rargs: Vec<RVec> = args.iter().map(qv_to_rv).collect();
    let direct = rv_pair(vprime, &phi_state(inst, &sewn, &rargs)?);
    let i = index - 1;
    let inner = phi_state(inst, q2, &rargs[i..i + n2])?;
    let mut outer_args: Vec<RVec> = Vec::with_capacity(n1);
    outer_args.extend_from_slice(&rargs[..i]);
    outer_args.push(inner);
    outer_args.extend_from_slice(&rargs[i + n2..]);
    let contracted = rv_pair(vprime, &phi_state(inst, q1, &outer_args)?);
    let residual = (direct - contracted).abs();
    let witnesses = if residual.is_finite() && residual <= tol {
        Vec::new()
    } else {
        vec![Witness {
            input: format!("sewing at puncture {index}"),
            expected: format!("{contracted}"),
            got: format!("{direct}"),
        }]
    };
    Ok(CheckReport::with_residual(
        "sewing-contraction",
        residual,
        tol,
        witnesses,
    ))
}
