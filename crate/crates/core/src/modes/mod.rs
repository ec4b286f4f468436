//! Truncated mode calculus: graded spaces, vertex-operator mode families,
//! concrete instances, and checks for the defining axioms.
//!
//! A vertex map on a graded space decomposes into modes,
//! `Y(u, r) = sum_n u^+_n r^{-n-1}`, with the weight rule
//! `wt(u^+_n v) = wt u - n - 1 + wt v`.  Everything here is truncated at a
//! single weight cutoff: the basis keeps labels of weight at most the cutoff,
//! intermediate sums project to those weights, and exponential series stop
//! when they leave the retained range.  Mode coefficients are exact rationals;
//! the only floating-point step is evaluating radius powers `r^{-n-1}`.

mod checks;
mod heisenberg;
mod instances;

pub use checks::{
    c0_membership, check_associativity, check_creation, check_d_conjugation,
    check_d_derivative, check_identity, check_virasoro, check_weight_property, AssocSample,
};
pub use heisenberg::make_heisenberg_instance;
pub use instances::{
    make_assoc_algebra_instance, make_tensor_instance, matrix_units_table,
    mult_table_from_json, mult_table_to_json, MultTable,
};

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::scalars::{rational_to_f64, Rational};

#[derive(Debug, Error)]
pub enum ModesError {
    #[error("radius {0} is not positive; negative radii go through the opposite vertex map")]
    NonPositiveRadius(f64),
    #[error("radius {0} is not negative; positive radii go through the vertex map")]
    NonNegativeRadius(f64),
    #[error("radii must be strictly decreasing and positive, got {0:?}")]
    RadiusOrder(Vec<f64>),
    #[error("radii (r1, r2) = ({0}, {1}) violate r1 > r2 > r1 - r2 > 0")]
    InadmissibleRadii(f64, f64),
    #[error("instance has no conformal data")]
    MissingConformal,
    #[error("rescaling factor must be positive, got {0}")]
    NonPositiveRescale(String),
    #[error("multiplication table is not associative at basis triple ({0}, {1}, {2})")]
    NonAssociative(usize, usize, usize),
    #[error("multiplication table has no two-sided unit")]
    NoUnit,
    #[error("table has {got} rows, expected {want}")]
    BadTableShape { got: usize, want: usize },
    #[error("basis index {0} out of range")]
    BadIndex(usize),
    #[error("tensor factor must have all weights zero")]
    NonZeroWeights,
    #[error("cutoff {0} is below the minimum of 2")]
    CutoffTooSmall(usize),
    #[error("table parse error: {0}")]
    Parse(String),
}

/// Exact vector: basis index to rational coefficient, zero entries pruned.
pub type QVec = BTreeMap<usize, Rational>;
/// Float vector for radius-evaluated results.
pub type RVec = BTreeMap<usize, f64>;

pub fn qv_basis(i: usize) -> QVec {
    BTreeMap::from([(i, Rational::from_integer(1.into()))])
}

/// `target += scale * source`, pruning cancellations.
pub fn qv_add_scaled(target: &mut QVec, source: &QVec, scale: &Rational) {
    if scale.is_zero() {
        return;
    }
    for (&i, c) in source {
        let entry = target.entry(i).or_insert_with(Rational::zero);
        *entry += c * scale;
        if entry.is_zero() {
            target.remove(&i);
        }
    }
}

pub fn qv_scale(v: &QVec, scale: &Rational) -> QVec {
    if scale.is_zero() {
        return QVec::new();
    }
    v.iter().map(|(&i, c)| (i, c * scale)).collect()
}

pub fn qv_sub(a: &QVec, b: &QVec) -> QVec {
    let mut out = a.clone();
    qv_add_scaled(&mut out, b, &-Rational::from_integer(1.into()));
    out
}

pub fn qv_to_rv(v: &QVec) -> RVec {
    v.iter().map(|(&i, c)| (i, rational_to_f64(c))).collect()
}

pub fn rv_add_scaled(target: &mut RVec, source: &RVec, scale: f64) {
    for (&i, c) in source {
        *target.entry(i).or_insert(0.0) += c * scale;
    }
}

/// Pairing of a coefficient functional with a float vector.
pub fn rv_pair(dual: &QVec, v: &RVec) -> f64 {
    dual.iter()
        .map(|(i, c)| rational_to_f64(c) * v.get(i).copied().unwrap_or(0.0))
        .sum()
}

/// Weight-graded basis with a retention cutoff.
#[derive(Debug, Clone)]
pub struct GradedSpace {
    labels: Vec<String>,
    weights: Vec<Rational>,
    cutoff: usize,
}

impl GradedSpace {
    pub fn new(labels: Vec<String>, weights: Vec<Rational>, cutoff: usize) -> Self {
        assert_eq!(labels.len(), weights.len());
        debug_assert!(weights
            .iter()
            .all(|w| !w.is_negative() && *w <= Rational::from_integer(cutoff.into())));
        GradedSpace {
            labels,
            weights,
            cutoff,
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> {
        0..self.labels.len()
    }

    /// The common weight of a homogeneous vector, if it is homogeneous.
    pub fn homogeneous_weight(&self, v: &QVec) -> Option<Rational> {
        let mut it = v.keys();
        let first = self.weights[*it.next()?].clone();
        for i in it {
            if self.weights[*i] != first {
                return None;
            }
        }
        Some(first)
    }

    /// Projection onto the weight-`w` component.
    pub fn project_weight(&self, v: &QVec, w: &Rational) -> QVec {
        v.iter()
            .filter(|(i, _)| &self.weights[**i] == w)
            .map(|(&i, c)| (i, c.clone()))
            .collect()
    }

    /// Renders a vector as a readable linear combination.
    pub fn render(&self, v: &QVec) -> String {
        if v.is_empty() {
            return "0".to_string();
        }
        v.iter()
            .map(|(&i, c)| format!("{c} {}", self.labels[i]))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Conformal element and central charge; Virasoro modes act through the
/// element's vertex modes, `L(m) = omega^+_{m+1}`.
#[derive(Debug, Clone)]
pub struct ConformalData {
    pub omega: QVec,
    pub central_charge: Rational,
}

/// Dense mode table keyed by `(u basis index, mode, v basis index)`.
#[derive(Debug, Clone, Default)]
pub struct ModeTable {
    pub entries: BTreeMap<(usize, i64, usize), QVec>,
}

#[derive(Debug)]
pub(crate) struct TensorData {
    /// Products of the weight-zero factor: `left_table[a][b] = e_a e_b`.
    pub left_table: Vec<Vec<QVec>>,
    pub right: Box<OsvaInstance>,
}

#[derive(Debug)]
pub(crate) enum ModeBackend {
    Table(ModeTable),
    Heisenberg(heisenberg::HeisenbergEngine),
    Tensor(TensorData),
}

/// One algebra instance: graded space, vacuum, translation operator `D`,
/// optional conformal data, and the mode family.
#[derive(Debug)]
pub struct OsvaInstance {
    pub name: String,
    space: GradedSpace,
    vacuum: QVec,
    /// `D` applied to each basis vector, truncated at the cutoff.
    d_table: Vec<QVec>,
    conformal: Option<ConformalData>,
    backend: ModeBackend,
}

impl OsvaInstance {
    pub(crate) fn new(
        name: String,
        space: GradedSpace,
        vacuum: QVec,
        d_table: Vec<QVec>,
        conformal: Option<ConformalData>,
        backend: ModeBackend,
    ) -> Self {
        assert_eq!(d_table.len(), space.dim());
        OsvaInstance {
            name,
            space,
            vacuum,
            d_table,
            conformal,
            backend,
        }
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn vacuum(&self) -> &QVec {
        &self.vacuum
    }

    pub fn conformal(&self) -> Option<&ConformalData> {
        self.conformal.as_ref()
    }

    pub fn d_basis(&self, i: usize) -> &QVec {
        &self.d_table[i]
    }

    pub fn d_apply(&self, v: &QVec) -> QVec {
        let mut out = QVec::new();
        for (&i, c) in v {
            qv_add_scaled(&mut out, &self.d_table[i], c);
        }
        out
    }

    /// `u^+_n v` for basis vectors, exact, truncated to retained weights.
    pub fn modes_basis(&self, u: usize, n: i64, v: usize) -> QVec {
        match &self.backend {
            ModeBackend::Table(table) => {
                table.entries.get(&(u, n, v)).cloned().unwrap_or_default()
            }
            ModeBackend::Heisenberg(engine) => engine.modes(u, n, v),
            ModeBackend::Tensor(data) => {
                let dv = data.right.space.dim();
                let (a, ui) = (u / dv, u % dv);
                let (b, vi) = (v / dv, v % dv);
                let product = &data.left_table[a][b];
                let inner = data.right.modes_basis(ui, n, vi);
                let mut out = QVec::new();
                for (&ka, ca) in product {
                    for (&kv, cv) in &inner {
                        let entry = out.entry(ka * dv + kv).or_insert_with(Rational::zero);
                        *entry += ca * cv;
                        if entry.is_zero() {
                            out.remove(&(ka * dv + kv));
                        }
                    }
                }
                out
            }
        }
    }

    /// Bilinear extension of `modes_basis` to arbitrary vectors.
    pub fn apply_mode(&self, u: &QVec, n: i64, v: &QVec) -> QVec {
        let mut out = QVec::new();
        for (&ui, cu) in u {
            for (&vi, cv) in v {
                let w = self.modes_basis(ui, n, vi);
                qv_add_scaled(&mut out, &w, &(cu * cv));
            }
        }
        out
    }

    /// Integer modes `n` whose output weight `wt u - n - 1 + wt v` lies in
    /// `[0, cutoff]`, derived from the weight rule.
    pub fn mode_range(&self, wt_u: &Rational, wt_v: &Rational) -> Vec<i64> {
        let top = wt_u + wt_v - Rational::from_integer(1.into());
        let lo = (&top - Rational::from_integer(self.space.cutoff.into()))
            .ceil()
            .to_integer()
            .to_i64()
            .expect("small weights");
        let hi = top.floor().to_integer().to_i64().expect("small weights");
        (lo..=hi).collect()
    }

    /// All retained modes between two basis vectors.
    pub fn mode_range_basis(&self, u: usize, v: usize) -> Vec<i64> {
        self.mode_range(
            &self.space.weights[u].clone(),
            &self.space.weights[v].clone(),
        )
    }
}

/// One vertex-operator application on a float state vector:
/// `sum_n u^+_n (state) r^{-n-1}` over retained modes.  Both the vertex map
/// and the geometric evaluation go through this single code path, so their
/// results agree bit for bit.
pub(crate) fn apply_vertex_factor(
    inst: &OsvaInstance,
    u: &RVec,
    r: f64,
    state: &RVec,
) -> RVec {
    let mut next = RVec::new();
    for (&ui, cu) in u {
        for (&vi, cs) in state {
            let coeff = cu * cs;
            if coeff == 0.0 {
                continue;
            }
            for n in inst.mode_range_basis(ui, vi) {
                let w = inst.modes_basis(ui, n, vi);
                if w.is_empty() {
                    continue;
                }
                let power = r.powi(-(n as i32) - 1);
                rv_add_scaled(&mut next, &qv_to_rv(&w), coeff * power);
            }
        }
    }
    next.retain(|_, c| *c != 0.0);
    next
}

/// Whether the top retained weight shell carries more than 10% of the
/// vector's mass: the tail-estimate heuristic for truncated sums.
pub(crate) fn top_shell_heavy(inst: &OsvaInstance, state: &RVec) -> bool {
    let cutoff = Rational::from_integer(inst.space().cutoff().into());
    let total: f64 = state.values().map(|c| c.abs()).sum();
    let top: f64 = state
        .iter()
        .filter(|(i, _)| inst.space().weight(**i) == &cutoff)
        .map(|(_, c)| c.abs())
        .sum();
    total > 0.0 && top > 0.1 * total
}

/// `Y(u, r) v` for `r > 0`: sums `u^+_n v r^{-n-1}` over retained modes.
/// Radius powers are the positive real branch; coefficients are converted to
/// floats once at entry.
pub fn vertex_eval(
    inst: &OsvaInstance,
    u: &QVec,
    r: f64,
    v: &QVec,
) -> Result<RVec, ModesError> {
    if r <= 0.0 || !r.is_finite() {
        return Err(ModesError::NonPositiveRadius(r));
    }
    Ok(apply_vertex_factor(inst, &qv_to_rv(u), r, &qv_to_rv(v)))
}

/// `Y(u, r) v` for `r < 0` through the permutation identity
/// `Y(u, r) v = e^{rD} Y(v, -r) u`, with the exponential truncated at the
/// cutoff weight.
pub fn opposite_vertex(
    inst: &OsvaInstance,
    u: &QVec,
    r: f64,
    v: &QVec,
) -> Result<RVec, ModesError> {
    if r >= 0.0 || !r.is_finite() {
        return Err(ModesError::NonNegativeRadius(r));
    }
    let inner = vertex_eval(inst, v, -r, u)?;
    Ok(exp_d_apply(inst, r, &inner))
}

/// `e^{t D}` on a float vector, truncated at the cutoff: the series stops
/// once `D^k` pushes every component above the retained weights.
pub fn exp_d_apply(inst: &OsvaInstance, t: f64, v: &RVec) -> RVec {
    let mut out = v.clone();
    let mut power = v.clone();
    let mut factor = 1.0;
    for k in 1..=(inst.space().cutoff() + 1) {
        let mut next = RVec::new();
        for (&i, c) in &power {
            rv_add_scaled(&mut next, &qv_to_rv(&inst.d_table[i]), *c);
        }
        if next.is_empty() {
            break;
        }
        factor *= t / k as f64;
        rv_add_scaled(&mut out, &next, factor);
        power = next;
    }
    out.retain(|_, c| *c != 0.0);
    out
}

/// Truncated matrix element
/// `<v', Y(u_1, r_1) ... Y(u_k, r_k) w>` with intermediate sums projected to
/// retained weights.  The flag reports whether, at any stage, the top
/// retained weight shell carried more than 10% of the stage's mass: a
/// heuristic sign that the truncated sum has not converged.
pub fn matrix_element_product(
    inst: &OsvaInstance,
    vprime: &QVec,
    factors: &[(QVec, f64)],
    w: &QVec,
) -> Result<(f64, bool), ModesError> {
    let radii: Vec<f64> = factors.iter().map(|(_, r)| *r).collect();
    if radii.iter().any(|r| *r <= 0.0 || !r.is_finite())
        || radii.windows(2).any(|p| p[0] <= p[1])
    {
        return Err(ModesError::RadiusOrder(radii));
    }
    let mut state = qv_to_rv(w);
    let mut tail_flag = false;
    for (u, r) in factors.iter().rev() {
        state = apply_vertex_factor(inst, &qv_to_rv(u), *r, &state);
        if top_shell_heavy(inst, &state) {
            tail_flag = true;
        }
    }
    Ok((rv_pair(vprime, &state), tail_flag))
}
