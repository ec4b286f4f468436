//! Structure-constant equations for algebra objects over fusion data, and a
//! small exact solver.
//!
//! An algebra object assigns a multiplicity space `E^a` of dimension
//! `dims[a]` to each sector and a component map
//! `C_{a1 a2}^{a3; i} : E^{a1} (x) E^{a2} -> E^{a3}` to each fusion channel.
//! The constraints are:
//!
//! * compatibility of products with iterates: for every sector quadruple
//!   `(a1, a2, a3; a4)`, iterate intermediate `a5`, and channel indices
//!   `(k, l)`,
//!
//!   ```text
//!   sum_{a; i, j} F_{a; a5}^{i j; k l}(a1, a2, a3; a4)
//!       C_{a1 a}^{a4; i} o (id (x) C_{a2 a3}^{a; j})
//!     = C_{a5 a3}^{a4; l} o (C_{a1 a2}^{a5; k} (x) id)
//!   ```
//!
//! * the unit laws `C_{e a}^{a; 1}(1 (x) v) = v` and
//!   `C_{a e}^{a; 1}(v (x) 1) = v` for the unit vector `1` in `E^e`.
//!
//! Scalarizing over bases gives quadratic equations in the matrix entries and
//! unit coordinates.  `solve_small` explores them with exact propagation plus
//! numeric root finding whose candidates are lifted back into Q(sqrt 2) and
//! certified by exact re-verification; only certified solutions are returned.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fusion::{FusionData, SectorId};
use crate::report::{CheckReport, Witness};
use crate::scalars::QSqrt2;

const MAX_DIM: usize = 2;
const MAX_VARS: usize = 24;
const LIFT_GAP: f64 = 1e-7;
const LIFT_HEIGHT: i64 = 64;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dims vector has length {got}, ring has {want} sectors")]
    DimsLength { got: usize, want: usize },
    #[error("sector {sector} has dimension {dim}, solver supports at most {MAX_DIM}")]
    DimTooLarge { sector: SectorId, dim: usize },
    #[error("{got} variables exceed the solver bound of {MAX_VARS}")]
    TooManyVariables { got: usize },
    #[error("algebra object is missing coupling {0}")]
    MissingCoupling(String),
    #[error("algebra object has coupling {0} outside the fusion support")]
    UnexpectedCoupling(String),
    #[error("coupling {key} has shape {got:?}, expected {expected:?}")]
    BadCouplingShape {
        key: String,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("unit vector has length {got}, expected {want}")]
    BadUnitLength { got: usize, want: usize },
    #[error("solution document parse error: {0}")]
    Parse(String),
}

/// Key of one component map: sectors `(a1, a2, a3)` and channel index `i`
/// (1-based, bounded by `N_{a1 a2}^{a3}`).
pub type CouplingKey = (SectorId, SectorId, SectorId, u32);

pub fn coupling_key_name(key: &CouplingKey) -> String {
    format!("C[{},{}->{};{}]", key.0, key.1, key.2, key.3)
}

/// Dense matrix of a component map: `rows = dim E^{a3}`, columns indexed by
/// `(p, q)` flattened as `p * dim E^{a2} + q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<QSqrt2>,
}

impl CouplingMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        CouplingMatrix {
            rows,
            cols,
            data: vec![QSqrt2::zero(); rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> &QSqrt2 {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: QSqrt2) {
        self.data[r * self.cols + c] = v;
    }
}

/// A candidate or certified algebra object over fixed fusion data.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraObject {
    /// Multiplicity-space dimension per sector.
    pub dims: Vec<usize>,
    /// Unit vector coordinates in `E^e`.
    pub unit_vector: Vec<QSqrt2>,
    pub couplings: BTreeMap<CouplingKey, CouplingMatrix>,
}

/// What each scalar variable refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarKey {
    /// Entry `[t; p, q]` of the coupling matrix for `key`.
    Coupling {
        key: CouplingKey,
        t: usize,
        p: usize,
        q: usize,
    },
    /// Coordinate `p` of the unit vector.
    Unit { p: usize },
}

/// Polynomial over Q(sqrt 2) in the system variables.  Monomials are sorted
/// variable-id multisets; the equations of interest have degree at most two.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    pub terms: BTreeMap<Vec<u32>, QSqrt2>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: QSqrt2) -> Self {
        let mut p = Poly::zero();
        p.add_term(vec![], c);
        p
    }

    pub fn add_term(&mut self, mut mono: Vec<u32>, coeff: QSqrt2) {
        if coeff.is_zero() {
            return;
        }
        mono.sort_unstable();
        let entry = self.terms.entry(mono).or_insert_with(QSqrt2::zero);
        *entry = entry.clone() + coeff;
        if entry.is_zero() {
            let key: Vec<u32> = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone())
                .expect("just inserted");
            self.terms.remove(&key);
        }
    }

    pub fn add_poly(&mut self, other: &Poly) {
        for (mono, coeff) in &other.terms {
            self.add_term(mono.clone(), coeff.clone());
        }
    }

    pub fn sub_poly(&mut self, other: &Poly) {
        for (mono, coeff) in &other.terms {
            self.add_term(mono.clone(), -coeff.clone());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Folds assigned variables into coefficients.
    pub fn substitute(&self, assignment: &[Option<QSqrt2>]) -> Poly {
        let mut out = Poly::zero();
        for (mono, coeff) in &self.terms {
            let mut c = coeff.clone();
            let mut rest = Vec::new();
            for &v in mono {
                match &assignment[v as usize] {
                    Some(value) => c = c * value,
                    None => rest.push(v),
                }
            }
            out.add_term(rest, c);
        }
        out
    }

    pub fn unknowns(&self) -> BTreeSet<u32> {
        self.terms.keys().flatten().copied().collect()
    }

    /// For a polynomial in the single variable `x`, the coefficients
    /// `(a, b, c)` of `a x^2 + b x + c`.
    pub fn as_univariate(&self, x: u32) -> Option<(QSqrt2, QSqrt2, QSqrt2)> {
        let mut a = QSqrt2::zero();
        let mut b = QSqrt2::zero();
        let mut c = QSqrt2::zero();
        for (mono, coeff) in &self.terms {
            match mono.as_slice() {
                [] => c = c + coeff.clone(),
                [v] if *v == x => b = b + coeff.clone(),
                [v, w] if *v == x && *w == x => a = a + coeff.clone(),
                _ => return None,
            }
        }
        Some((a, b, c))
    }

    pub fn eval(&self, assignment: &[Option<QSqrt2>]) -> Option<QSqrt2> {
        let s = self.substitute(assignment);
        if s.unknowns().is_empty() {
            Some(
                s.terms
                    .get(&vec![])
                    .cloned()
                    .unwrap_or_else(QSqrt2::zero),
            )
        } else {
            None
        }
    }
}

/// One structure-constant equation with both sides kept for reporting.
#[derive(Debug, Clone)]
pub struct Equation {
    pub label: String,
    pub lhs: Poly,
    pub rhs: Poly,
}

impl Equation {
    pub fn residual(&self) -> Poly {
        let mut p = self.lhs.clone();
        p.sub_poly(&self.rhs);
        p
    }
}

/// The scalarized constraint system for given fusion data and dimensions.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub var_names: Vec<String>,
    pub var_keys: Vec<VarKey>,
    /// Product-iterate compatibility equations, quadratic in the couplings.
    pub equations: Vec<Equation>,
    /// Unit-law equations, bilinear in unit coordinates and couplings.
    pub unit_equations: Vec<Equation>,
}

impl ConstraintSystem {
    pub fn all_equations(&self) -> impl Iterator<Item = &Equation> {
        self.unit_equations.iter().chain(self.equations.iter())
    }
}

fn coupling_keys(data: &FusionData, dims: &[usize]) -> Vec<(CouplingKey, usize, usize, usize)> {
    let ring = data.ring();
    let s = ring.num_sectors();
    let mut out = Vec::new();
    for a1 in 0..s {
        for a2 in 0..s {
            for a3 in 0..s {
                let n = ring.n(a1, a2, a3);
                if n == 0 || dims[a1] == 0 || dims[a2] == 0 || dims[a3] == 0 {
                    continue;
                }
                for i in 1..=n {
                    out.push(((a1, a2, a3, i), dims[a1], dims[a2], dims[a3]));
                }
            }
        }
    }
    out
}

fn check_dims(data: &FusionData, dims: &[usize]) -> Result<(), SolverError> {
    let want = data.ring().num_sectors();
    if dims.len() != want {
        return Err(SolverError::DimsLength {
            got: dims.len(),
            want,
        });
    }
    for (sector, &dim) in dims.iter().enumerate() {
        if dim > MAX_DIM {
            return Err(SolverError::DimTooLarge { sector, dim });
        }
    }
    Ok(())
}

/// Builds the full scalar constraint system.  Variable order and equation
/// order are lexicographic in all indices, so repeated builds are identical.
pub fn build_constraints(data: &FusionData, dims: &[usize]) -> Result<ConstraintSystem, SolverError> {
    check_dims(data, dims)?;
    let ring = data.ring();
    let s = ring.num_sectors();
    let e = ring.unit();
    let de = dims[e];

    let mut var_names = Vec::new();
    let mut var_keys = Vec::new();
    let mut var_index: BTreeMap<(CouplingKey, usize, usize, usize), u32> = BTreeMap::new();
    for (key, d1, d2, d3) in coupling_keys(data, dims) {
        for t in 0..d3 {
            for p in 0..d1 {
                for q in 0..d2 {
                    let id = var_names.len() as u32;
                    var_names.push(format!("{}[{};{},{}]", coupling_key_name(&key), t, p, q));
                    var_keys.push(VarKey::Coupling { key, t, p, q });
                    var_index.insert((key, t, p, q), id);
                }
            }
        }
    }
    let mut unit_vars = Vec::new();
    for p in 0..de {
        let id = var_names.len() as u32;
        var_names.push(format!("unit[{p}]"));
        var_keys.push(VarKey::Unit { p });
        unit_vars.push(id);
    }
    if var_names.len() > MAX_VARS {
        return Err(SolverError::TooManyVariables {
            got: var_names.len(),
        });
    }

    let cvar = |key: CouplingKey, t: usize, p: usize, q: usize| -> Option<u32> {
        var_index.get(&(key, t, p, q)).copied()
    };

    // Unit laws.  Both reduce to Kronecker deltas once scalarized.
    let mut unit_equations = Vec::new();
    if de > 0 {
        for (a, &da) in dims.iter().enumerate() {
            if da == 0 {
                continue;
            }
            let key_left = (e, a, a, 1u32);
            let key_right = (a, e, a, 1u32);
            for t in 0..da {
                for q in 0..da {
                    let mut lhs = Poly::zero();
                    for (p, &uvar) in unit_vars.iter().enumerate() {
                        if let Some(v) = cvar(key_left, t, p, q) {
                            lhs.add_term(vec![v, uvar], QSqrt2::one());
                        }
                    }
                    let delta = if t == q { QSqrt2::one() } else { QSqrt2::zero() };
                    unit_equations.push(Equation {
                        label: format!("unit-left a={a} [{t};{q}]"),
                        lhs,
                        rhs: Poly::constant(delta.clone()),
                    });
                    let mut lhs = Poly::zero();
                    for (p, &uvar) in unit_vars.iter().enumerate() {
                        if let Some(v) = cvar(key_right, t, q, p) {
                            lhs.add_term(vec![v, uvar], QSqrt2::one());
                        }
                    }
                    unit_equations.push(Equation {
                        label: format!("unit-right a={a} [{t};{q}]"),
                        lhs,
                        rhs: Poly::constant(delta),
                    });
                }
            }
        }
    }

    // Product-iterate compatibility, scalarized over all coordinates.
    let mut equations = Vec::new();
    for a1 in 0..s {
        for a2 in 0..s {
            for a3 in 0..s {
                for a4 in 0..s {
                    if dims[a1] == 0 || dims[a2] == 0 || dims[a3] == 0 || dims[a4] == 0 {
                        continue;
                    }
                    let quad = (a1, a2, a3, a4);
                    for a5 in 0..s {
                        let nk = ring.n(a1, a2, a5);
                        let nl = ring.n(a5, a3, a4);
                        if nk == 0 || nl == 0 {
                            continue;
                        }
                        for k in 1..=nk {
                            for l in 1..=nl {
                                for t in 0..dims[a4] {
                                    for p in 0..dims[a1] {
                                        for q in 0..dims[a2] {
                                            for r in 0..dims[a3] {
                                                let mut lhs = Poly::zero();
                                                for (a, &da) in dims.iter().enumerate() {
                                                    let ni = ring.n(a1, a, a4);
                                                    let nj = ring.n(a2, a3, a);
                                                    if ni == 0 || nj == 0 {
                                                        continue;
                                                    }
                                                    let block = match data.entry(quad, a, a5) {
                                                        Some(b) => b,
                                                        None => continue,
                                                    };
                                                    for i in 1..=ni {
                                                        for j in 1..=nj {
                                                            let row = ((i - 1) * nj + (j - 1))
                                                                as usize;
                                                            let col = ((k - 1) * nl + (l - 1))
                                                                as usize;
                                                            let f = block.get(row, col).clone();
                                                            if f.is_zero() {
                                                                continue;
                                                            }
                                                            for m in 0..da {
                                                                let v1 = cvar(
                                                                    (a1, a, a4, i),
                                                                    t,
                                                                    p,
                                                                    m,
                                                                );
                                                                let v2 = cvar(
                                                                    (a2, a3, a, j),
                                                                    m,
                                                                    q,
                                                                    r,
                                                                );
                                                                if let (Some(v1), Some(v2)) =
                                                                    (v1, v2)
                                                                {
                                                                    lhs.add_term(
                                                                        vec![v1, v2],
                                                                        f.clone(),
                                                                    );
                                                                }
                                                            }
                                                        }
                                                    }
                                                }
                                                let mut rhs = Poly::zero();
                                                for m in 0..dims[a5] {
                                                    let v1 = cvar((a5, a3, a4, l), t, m, r);
                                                    let v2 = cvar((a1, a2, a5, k), m, p, q);
                                                    if let (Some(v1), Some(v2)) = (v1, v2) {
                                                        rhs.add_term(
                                                            vec![v1, v2],
                                                            QSqrt2::one(),
                                                        );
                                                    }
                                                }
                                                equations.push(Equation {
                                                    label: format!(
                                                        "fusing({a1},{a2},{a3};{a4}) a5={a5} k={k} l={l} [{t};{p},{q},{r}]"
                                                    ),
                                                    lhs,
                                                    rhs,
                                                });
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(ConstraintSystem {
        var_names,
        var_keys,
        equations,
        unit_equations,
    })
}

fn assignment_of_algebra(
    system: &ConstraintSystem,
    data: &FusionData,
    dims: &[usize],
    alg: &AlgebraObject,
) -> Result<Vec<Option<QSqrt2>>, SolverError> {
    let ring = data.ring();
    let e = ring.unit();
    if alg.unit_vector.len() != dims[e] {
        return Err(SolverError::BadUnitLength {
            got: alg.unit_vector.len(),
            want: dims[e],
        });
    }
    let expected: BTreeSet<CouplingKey> = coupling_keys(data, dims)
        .into_iter()
        .map(|(key, _, _, _)| key)
        .collect();
    for key in alg.couplings.keys() {
        if !expected.contains(key) {
            return Err(SolverError::UnexpectedCoupling(coupling_key_name(key)));
        }
    }
    for key in &expected {
        let matrix = alg
            .couplings
            .get(key)
            .ok_or_else(|| SolverError::MissingCoupling(coupling_key_name(key)))?;
        let want = (dims[key.2], dims[key.0] * dims[key.1]);
        if (matrix.rows, matrix.cols) != want {
            return Err(SolverError::BadCouplingShape {
                key: coupling_key_name(key),
                expected: want,
                got: (matrix.rows, matrix.cols),
            });
        }
    }
    let mut assignment = vec![None; system.var_names.len()];
    for (id, key) in system.var_keys.iter().enumerate() {
        let value = match key {
            VarKey::Coupling { key, t, p, q } => {
                let matrix = &alg.couplings[key];
                matrix.get(*t, p * dims[key.1] + q).clone()
            }
            VarKey::Unit { p } => alg.unit_vector[*p].clone(),
        };
        assignment[id] = Some(value);
    }
    Ok(assignment)
}

/// Exact verification of an algebra object: every constraint equation is
/// evaluated directly over the fusion data at the object's values.
pub fn verify_algebra(
    data: &FusionData,
    alg: &AlgebraObject,
) -> Result<CheckReport, SolverError> {
    check_dims(data, &alg.dims)?;
    let system = build_constraints(data, &alg.dims)?;
    let assignment = assignment_of_algebra(&system, data, &alg.dims, alg)?;
    let mut witnesses = Vec::new();
    for eq in system.all_equations() {
        let lhs = eq.lhs.eval(&assignment).expect("full assignment");
        let rhs = eq.rhs.eval(&assignment).expect("full assignment");
        if lhs != rhs {
            witnesses.push(Witness {
                input: eq.label.clone(),
                expected: rhs.to_string(),
                got: lhs.to_string(),
            });
        }
    }
    Ok(CheckReport::exact("algebra-verification", witnesses))
}

/// Positive-weight unit criterion: with every non-unit sector of positive
/// weight, an algebra object has a one-dimensional unit sector exactly when
/// its unit is unique.  The check reports `dim E^e = 1`.
pub fn unit_uniqueness_check(data: &FusionData, alg: &AlgebraObject) -> CheckReport {
    let e = data.ring().unit();
    let de = alg.dims.get(e).copied().unwrap_or(0);
    let mut witnesses = Vec::new();
    if de != 1 {
        witnesses.push(Witness {
            input: format!("dim E^{e}"),
            expected: "1".into(),
            got: de.to_string(),
        });
    }
    CheckReport::exact("unit-uniqueness", witnesses)
}

/// Options for [`solve_small`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Pin the unit to the first basis vector and the unit-law coupling
    /// slices to identity matrices before searching.
    pub gauge_fixing: bool,
    /// Maximum number of search nodes before giving up with a partial result.
    pub search_bound: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gauge_fixing: true,
            search_bound: 10_000,
        }
    }
}

/// A numeric root that failed the exact lift, reported for transparency.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UncertifiedRoot {
    pub variable: String,
    pub value: f64,
}

/// Result of a solve: certified solutions, plus flags describing the parts of
/// the search that could not be completed.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solutions: Vec<AlgebraObject>,
    /// Set when the search bound was exhausted or a subsystem resisted the
    /// univariate strategy; the solution list may then be incomplete.
    pub partial: bool,
    pub uncertified_roots: Vec<UncertifiedRoot>,
    /// Variables never constrained by any equation; solutions set them to 0.
    pub free_variables: BTreeSet<String>,
}

struct SearchState<'a> {
    system: &'a ConstraintSystem,
    data: &'a FusionData,
    dims: &'a [usize],
    budget: usize,
    partial: bool,
    uncertified: Vec<UncertifiedRoot>,
    free_vars: BTreeSet<String>,
    seen: BTreeSet<Vec<String>>,
    solutions: Vec<AlgebraObject>,
}

/// Searches for all algebra objects with the given multiplicity-space
/// dimensions, up to the fixed gauge.
///
/// Strategy: pin the unit gauge, branch one nonzero coupling per sector
/// rescaling orbit to 1 (or all couplings in the orbit to 0), propagate
/// univariate equations exactly, resolve remaining univariate quadratics by
/// floating-point roots lifted to Q(sqrt 2) of bounded height, and certify
/// every full assignment with [`verify_algebra`].
pub fn solve_small(
    data: &FusionData,
    dims: &[usize],
    options: &SolveOptions,
) -> Result<SolveOutcome, SolverError> {
    check_dims(data, dims)?;
    let ring = data.ring();
    let e = ring.unit();
    if dims[e] == 0 {
        // No unit vector can exist in a zero space.
        return Ok(SolveOutcome {
            solutions: Vec::new(),
            partial: false,
            uncertified_roots: Vec::new(),
            free_variables: BTreeSet::new(),
        });
    }
    let system = build_constraints(data, dims)?;
    let mut assignment: Vec<Option<QSqrt2>> = vec![None; system.var_names.len()];

    if options.gauge_fixing {
        for (id, key) in system.var_keys.iter().enumerate() {
            match key {
                VarKey::Unit { p } => {
                    assignment[id] = Some(if *p == 0 {
                        QSqrt2::one()
                    } else {
                        QSqrt2::zero()
                    });
                }
                VarKey::Coupling {
                    key: (a1, a2, _, i),
                    t,
                    p,
                    q,
                } => {
                    if *i == 1 && *a1 == e && *p == 0 {
                        // Slice of the left unit law at the gauge unit.
                        assignment[id] = Some(if t == q {
                            QSqrt2::one()
                        } else {
                            QSqrt2::zero()
                        });
                    } else if *i == 1 && *a2 == e && *q == 0 && *a1 != e {
                        assignment[id] = Some(if t == p {
                            QSqrt2::one()
                        } else {
                            QSqrt2::zero()
                        });
                    }
                }
            }
        }
    }

    // Rescaling-orbit branch plan: per non-unit sector, the candidate
    // variables that scale under that sector alone (relative to sectors not
    // yet processed).
    let s = ring.num_sectors();
    let sector_order: Vec<SectorId> = (0..s).filter(|&a| a != e && dims[a] > 0).collect();
    let mut orbit_plan: Vec<Vec<u32>> = Vec::new();
    for (pos, &a) in sector_order.iter().enumerate() {
        let later = &sector_order[pos + 1..];
        let mut candidates = Vec::new();
        for (id, key) in system.var_keys.iter().enumerate() {
            if assignment[id].is_some() {
                continue;
            }
            if let VarKey::Coupling {
                key: (a1, a2, a3, _),
                ..
            } = key
            {
                let weight = |x: SectorId| -> i32 {
                    i32::from(*a1 == x) + i32::from(*a2 == x) - i32::from(*a3 == x)
                };
                if weight(a) != 0 && later.iter().all(|&b| weight(b) == 0) {
                    candidates.push(id as u32);
                }
            }
        }
        orbit_plan.push(candidates);
    }

    let mut state = SearchState {
        system: &system,
        data,
        dims,
        budget: options.search_bound,
        partial: false,
        uncertified: Vec::new(),
        free_vars: BTreeSet::new(),
        seen: BTreeSet::new(),
        solutions: Vec::new(),
    };
    branch_orbits(&mut state, assignment, &orbit_plan, 0);

    state
        .solutions
        .sort_by_key(|alg| format!("{alg:?}"));
    Ok(SolveOutcome {
        solutions: state.solutions,
        partial: state.partial,
        uncertified_roots: state.uncertified,
        free_variables: state.free_vars,
    })
}

fn branch_orbits(
    state: &mut SearchState,
    assignment: Vec<Option<QSqrt2>>,
    plan: &[Vec<u32>],
    level: usize,
) {
    if level == plan.len() {
        solve_system(state, assignment);
        return;
    }
    let candidates: Vec<u32> = plan[level]
        .iter()
        .copied()
        .filter(|&v| assignment[v as usize].is_none())
        .collect();
    // Branch k: candidates[..k] are 0 and candidates[k] is gauged to 1;
    // final branch: the whole orbit vanishes.
    for k in 0..=candidates.len() {
        let mut next = assignment.clone();
        for (pos, &v) in candidates.iter().enumerate() {
            if pos < k {
                next[v as usize] = Some(QSqrt2::zero());
            } else if pos == k {
                next[v as usize] = Some(QSqrt2::one());
            }
        }
        branch_orbits(state, next, plan, level + 1);
    }
}

enum Propagation {
    Dead,
    Fixpoint,
}

fn propagate(state: &mut SearchState, assignment: &mut [Option<QSqrt2>]) -> Propagation {
    loop {
        let mut progressed = false;
        for eq in state.system.all_equations() {
            let residual = eq.residual().substitute(assignment);
            let unknowns = residual.unknowns();
            match unknowns.len() {
                0 => {
                    if !residual.is_zero() {
                        return Propagation::Dead;
                    }
                }
                1 => {
                    let x = *unknowns.iter().next().expect("one unknown");
                    let (a, b, c) = residual.as_univariate(x).expect("single variable");
                    if a.is_zero() {
                        // b x + c = 0 with b != 0 (else no unknowns).
                        let value = -c / b;
                        assignment[x as usize] = Some(value);
                        progressed = true;
                    }
                }
                _ => {}
            }
        }
        if !progressed {
            return Propagation::Fixpoint;
        }
    }
}

fn solve_system(state: &mut SearchState, mut assignment: Vec<Option<QSqrt2>>) {
    if state.budget == 0 {
        state.partial = true;
        return;
    }
    state.budget -= 1;

    match propagate(state, &mut assignment) {
        Propagation::Dead => return,
        Propagation::Fixpoint => {}
    }

    // Find a univariate quadratic to branch on.
    for eq in state.system.all_equations() {
        let residual = eq.residual().substitute(&assignment);
        let unknowns = residual.unknowns();
        if unknowns.len() != 1 {
            continue;
        }
        let x = *unknowns.iter().next().expect("one unknown");
        let (a, b, c) = residual.as_univariate(x).expect("single variable");
        if a.is_zero() {
            continue; // linear; propagate handles it
        }
        let disc = b.clone() * b.clone()
            - QSqrt2::from_int(4) * a.clone() * c.clone();
        match disc.signum() {
            -1 => return, // no real root on this branch
            0 => {
                let root = -b / (QSqrt2::from_int(2) * a);
                let mut next = assignment;
                next[x as usize] = Some(root);
                solve_system(state, next);
                return;
            }
            _ => {
                let sq = disc.to_f64().sqrt();
                let af = a.to_f64();
                let bf = b.to_f64();
                let mut exact_roots: BTreeSet<QSqrt2> = BTreeSet::new();
                let mut lifted_any = [false, false];
                for (which, root) in [(-1.0f64, 0), (1.0f64, 1)]
                    .map(|(sgn, idx)| ((-bf + sgn * sq) / (2.0 * af), idx))
                {
                    let (value, idx) = (which, root);
                    for cand in lift_to_qsqrt2(value) {
                        // Certify that the lift really solves the equation.
                        let lhs = a.clone() * cand.clone() * cand.clone()
                            + b.clone() * cand.clone()
                            + c.clone();
                        if lhs.is_zero() {
                            lifted_any[idx] = true;
                            exact_roots.insert(cand);
                        }
                    }
                    if !lifted_any[idx] {
                        state.uncertified.push(UncertifiedRoot {
                            variable: state.system.var_names[x as usize].clone(),
                            value,
                        });
                    }
                }
                for root in exact_roots {
                    let mut next = assignment.clone();
                    next[x as usize] = Some(root);
                    solve_system(state, next);
                }
                return;
            }
        }
    }

    // No univariate equation left.  Any remaining non-constant residual is a
    // genuinely multivariate subsystem this solver does not split further.
    for eq in state.system.all_equations() {
        let residual = eq.residual().substitute(&assignment);
        if !residual.unknowns().is_empty() {
            state.partial = true;
            return;
        }
        if !residual.is_zero() {
            return; // inconsistent
        }
    }

    // Unconstrained variables are free parameters; take the zero
    // representative and record them.
    for (id, slot) in assignment.iter_mut().enumerate() {
        if slot.is_none() {
            *slot = Some(QSqrt2::zero());
            state
                .free_vars
                .insert(state.system.var_names[id].clone());
        }
    }

    let alg = algebra_of_assignment(state.system, state.dims, state.data, &assignment);
    let fingerprint: Vec<String> = assignment
        .iter()
        .map(|v| v.as_ref().expect("full").to_string())
        .collect();
    if !state.seen.insert(fingerprint) {
        return;
    }
    match verify_algebra(state.data, &alg) {
        Ok(report) if report.passed => state.solutions.push(alg),
        _ => {}
    }
}

fn algebra_of_assignment(
    system: &ConstraintSystem,
    dims: &[usize],
    data: &FusionData,
    assignment: &[Option<QSqrt2>],
) -> AlgebraObject {
    let e = data.ring().unit();
    let mut unit_vector = vec![QSqrt2::zero(); dims[e]];
    let mut couplings: BTreeMap<CouplingKey, CouplingMatrix> = BTreeMap::new();
    for (key, d1, d2, d3) in coupling_keys(data, dims) {
        couplings.insert(key, CouplingMatrix::zero(d3, d1 * d2));
    }
    for (id, key) in system.var_keys.iter().enumerate() {
        let value = assignment[id].clone().expect("full assignment");
        match key {
            VarKey::Unit { p } => unit_vector[*p] = value,
            VarKey::Coupling { key, t, p, q } => {
                let d2 = dims[key.1];
                couplings
                    .get_mut(key)
                    .expect("key enumerated")
                    .set(*t, p * d2 + q, value);
            }
        }
    }
    AlgebraObject {
        dims: dims.to_vec(),
        unit_vector,
        couplings,
    }
}

/// Candidates `a + b sqrt2` with numerators and denominators bounded by 64
/// within `1e-7` of `x`.
fn lift_to_qsqrt2(x: f64) -> Vec<QSqrt2> {
    use crate::scalars::rat;
    if !x.is_finite() {
        return Vec::new();
    }
    let mut out = BTreeSet::new();
    for qb in 1..=LIFT_HEIGHT {
        for pb in -LIFT_HEIGHT..=LIFT_HEIGHT {
            if num_integer::gcd(pb.abs(), qb) != 1 {
                continue;
            }
            let b = pb as f64 / qb as f64;
            let rem = x - b * std::f64::consts::SQRT_2;
            if rem.abs() > LIFT_HEIGHT as f64 + 1.0 {
                continue;
            }
            for qa in 1..=LIFT_HEIGHT {
                let pa = (rem * qa as f64).round();
                if pa.abs() > LIFT_HEIGHT as f64 {
                    continue;
                }
                let cand = QSqrt2::new(rat(pa as i64, qa), rat(pb, qb));
                if (cand.to_f64() - x).abs() <= LIFT_GAP {
                    out.insert(cand);
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Rescales the multiplicity-space bases of a solution: `lambda[a]` scales the
/// basis of `E^a`.  Coupling matrices pick up
/// `lambda[a1] lambda[a2] / lambda[a3]` and unit coordinates divide by
/// `lambda[e]`.  Verification is invariant under any nonzero rescaling.
pub fn rescale_solution(
    data: &FusionData,
    alg: &AlgebraObject,
    lambda: &[QSqrt2],
) -> AlgebraObject {
    let e = data.ring().unit();
    let mut out = alg.clone();
    for coord in &mut out.unit_vector {
        *coord = coord.clone() * lambda[e].inverse().expect("nonzero gauge");
    }
    for (key, matrix) in &mut out.couplings {
        let factor = lambda[key.0].clone() * lambda[key.1].clone()
            * lambda[key.2].inverse().expect("nonzero gauge");
        for entry in &mut matrix.data {
            *entry = entry.clone() * factor.clone();
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct CouplingFile {
    sectors: (usize, usize, usize),
    i: u32,
    matrix: Vec<Vec<QSqrt2>>,
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    dims: Vec<usize>,
    unit: Vec<QSqrt2>,
    couplings: Vec<CouplingFile>,
}

#[derive(Serialize, Deserialize)]
struct SolutionsDoc {
    solutions: Vec<SolutionFile>,
}

/// Serializes solutions under a top-level `solutions` array, couplings as
/// dense row-major matrices in the scalar encoding of the fusion documents.
pub fn solutions_to_json(solutions: &[AlgebraObject]) -> String {
    let doc = SolutionsDoc {
        solutions: solutions
            .iter()
            .map(|alg| SolutionFile {
                dims: alg.dims.clone(),
                unit: alg.unit_vector.clone(),
                couplings: alg
                    .couplings
                    .iter()
                    .map(|(key, matrix)| CouplingFile {
                        sectors: (key.0, key.1, key.2),
                        i: key.3,
                        matrix: (0..matrix.rows)
                            .map(|r| {
                                (0..matrix.cols).map(|c| matrix.get(r, c).clone()).collect()
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

/// Parses a solutions document produced by [`solutions_to_json`].
pub fn solutions_from_json(text: &str) -> Result<Vec<AlgebraObject>, SolverError> {
    let doc: SolutionsDoc =
        serde_json::from_str(text).map_err(|e| SolverError::Parse(e.to_string()))?;
    let mut out = Vec::new();
    for sol in doc.solutions {
        let mut couplings = BTreeMap::new();
        for c in sol.couplings {
            let rows = c.matrix.len();
            let cols = c.matrix.first().map(|r| r.len()).unwrap_or(0);
            if c.matrix.iter().any(|r| r.len() != cols) {
                return Err(SolverError::Parse(format!(
                    "ragged coupling matrix for sectors {:?}",
                    c.sectors
                )));
            }
            couplings.insert(
                (c.sectors.0, c.sectors.1, c.sectors.2, c.i),
                CouplingMatrix {
                    rows,
                    cols,
                    data: c.matrix.into_iter().flatten().collect(),
                },
            );
        }
        out.push(AlgebraObject {
            dims: sol.dims,
            unit_vector: sol.unit,
            couplings,
        });
    }
    Ok(out)
}
