//! Free-boson instance: the rank-one Heisenberg vacuum module.
//!
//! Basis vectors are partitions `[n1 >= n2 >= ... >= nk]` standing for
//! `a(-n1) ... a(-nk) 1`, with weight `n1 + ... + nk`.  Modes come from the
//! oscillator relations `[a(m), a(n)] = m delta_{m+n,0}`, `a(0) = 0`, through
//! the normal-ordered recursion
//!
//! ```text
//! Y(a(-n) u, x) = A_-(x) Y(u, x) + Y(u, x) A_+(x),
//! A(x) = sum_j binom(-j-1, n-1) a(j) x^{-j-n},
//! ```
//!
//! where `A_-` keeps the creation operators `a(j), j < 0` and `A_+` the
//! annihilation operators `j >= 0`.  Every coefficient is an exact rational;
//! results whose weight stays at or below the cutoff are exact, so the cutoff
//! truncates the basis without perturbing retained entries.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::scalars::{rint, Rational};

use super::{
    qv_add_scaled, qv_basis, qv_scale, ConformalData, GradedSpace, ModeBackend, ModesError,
    OsvaInstance, QVec,
};

/// All partitions with sum at most `max`, ordered by (sum, parts), each
/// partition a descending list.
fn partitions_up_to(max: usize) -> Vec<Vec<u32>> {
    fn extend(sum: usize, max_part: usize, cap: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(prefix.clone());
        for part in (1..=max_part.min(cap - sum)).rev() {
            prefix.push(part as u32);
            extend(sum + part, part, cap, prefix, out);
            prefix.pop();
        }
    }
    let mut all = Vec::new();
    let mut prefix = Vec::new();
    extend(0, max, max, &mut prefix, &mut all);
    all.sort_by_key(|p| (p.iter().sum::<u32>(), p.clone()));
    all
}

fn weight(p: &[u32]) -> usize {
    p.iter().map(|&x| x as usize).sum()
}

/// `binom(-j-1, n-1)`, the mode coefficient of `a(j)` in the `(n-1)`-th
/// derivative field; for `j >= 0` this is `(-1)^{n-1} binom(j+n-1, n-1)`.
fn mode_coeff(n: u32, j: i64) -> BigInt {
    let k = (n - 1) as i64;
    let (top, negate) = if j >= 0 {
        (j + k, k % 2 == 1)
    } else {
        (-j - 1, false)
    };
    if top < k {
        return BigInt::zero();
    }
    let mut b = BigInt::one();
    for step in 0..k {
        b = b * BigInt::from(top - step) / BigInt::from(step + 1);
    }
    if negate {
        -b
    } else {
        b
    }
}

#[derive(Debug)]
pub(crate) struct HeisenbergEngine {
    parts: Vec<Vec<u32>>,
    index: BTreeMap<Vec<u32>, usize>,
    cutoff: usize,
    memo: Mutex<BTreeMap<(usize, i64, usize), QVec>>,
}

impl HeisenbergEngine {
    fn new(cutoff: usize) -> Self {
        let parts = partitions_up_to(cutoff);
        let index = parts
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        HeisenbergEngine {
            parts,
            index,
            cutoff,
            memo: Mutex::new(BTreeMap::new()),
        }
    }

    fn idx(&self, p: &[u32]) -> usize {
        self.index[p]
    }

    /// Creation operator `a(-m)`: prepends a part, staying sorted.
    fn create(&self, m: u32, v: &QVec) -> QVec {
        let mut out = QVec::new();
        for (&i, c) in v {
            let mut p = self.parts[i].clone();
            p.push(m);
            p.sort_unstable_by(|a, b| b.cmp(a));
            out.insert(self.idx(&p), c.clone());
        }
        out
    }

    /// Annihilation operator `a(m)`, `m >= 1`, on a basis partition:
    /// `(count of parts m) * m` times the partition with one `m` removed.
    fn annihilate(&self, m: u32, v: usize) -> Option<(Rational, usize)> {
        let p = &self.parts[v];
        let count = p.iter().filter(|&&x| x == m).count();
        if count == 0 {
            return None;
        }
        let mut q = p.clone();
        let pos = q.iter().position(|&x| x == m).expect("part present");
        q.remove(pos);
        Some((rint(count as i64 * m as i64), self.idx(&q)))
    }

    /// `u^+_n v` for basis partitions, exact whenever the output weight is
    /// retained; outputs outside `[0, cutoff]` are zero or truncated away.
    pub(crate) fn modes(&self, u: usize, n: i64, v: usize) -> QVec {
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&(u, n, v)) {
            return hit.clone();
        }
        let result = self.compute(u, n, v);
        self.memo
            .lock()
            .expect("memo lock")
            .insert((u, n, v), result.clone());
        result
    }

    fn compute(&self, u: usize, n: i64, v: usize) -> QVec {
        let up = &self.parts[u];
        if up.is_empty() {
            // Vacuum modes: the identity field.
            return if n == -1 { qv_basis(v) } else { QVec::new() };
        }
        let out_wt = weight(up) as i64 - n - 1 + weight(&self.parts[v]) as i64;
        if out_wt < 0 || out_wt > self.cutoff as i64 {
            return QVec::new();
        }
        let n1 = up[0];
        let rest = self.idx(&up[1..]);
        let mut acc = QVec::new();
        // Creation side: a(j) with j <= -n1 lands the output at weight
        // out_wt, the inner mode result at out_wt + j >= 0.
        for j in -out_wt..=-(n1 as i64) {
            let c = mode_coeff(n1, j);
            if c.is_zero() {
                continue;
            }
            let inner = self.modes(rest, n - j - n1 as i64, v);
            if inner.is_empty() {
                continue;
            }
            let created = self.create((-j) as u32, &inner);
            qv_add_scaled(&mut acc, &created, &Rational::from_integer(c));
        }
        // Annihilation side: a(j) hits v first, so j runs over the parts
        // of v (a(0) vanishes on the vacuum module).
        let mut parts_seen = Vec::new();
        for &part in &self.parts[v] {
            if parts_seen.contains(&part) {
                continue;
            }
            parts_seen.push(part);
            let j = part as i64;
            let c = mode_coeff(n1, j);
            if c.is_zero() {
                continue;
            }
            let (scalar, v2) = self.annihilate(part, v).expect("part present");
            let inner = self.modes(rest, n - j - n1 as i64, v2);
            qv_add_scaled(
                &mut acc,
                &inner,
                &(Rational::from_integer(c) * scalar),
            );
        }
        acc
    }
}

/// Builds the free-boson instance at the given weight cutoff: partition
/// basis, oscillator modes, translation operator, and conformal element
/// `1/2 a(-1)^2 1` with central charge 1.
pub fn make_heisenberg_instance(cutoff: usize) -> Result<OsvaInstance, ModesError> {
    if cutoff < 2 {
        return Err(ModesError::CutoffTooSmall(cutoff));
    }
    let engine = HeisenbergEngine::new(cutoff);
    let labels: Vec<String> = engine
        .parts
        .iter()
        .map(|p| {
            if p.is_empty() {
                "[]".to_string()
            } else {
                format!(
                    "[{}]",
                    p.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            }
        })
        .collect();
    let weights: Vec<Rational> = engine
        .parts
        .iter()
        .map(|p| rint(weight(p) as i64))
        .collect();

    // D a(-m) w = m a(-m-1) w + a(-m) D w; terms above the cutoff drop.
    let mut d_table = Vec::with_capacity(engine.parts.len());
    for p in &engine.parts {
        let mut out = QVec::new();
        for (pos, &part) in p.iter().enumerate() {
            let mut q = p.to_vec();
            q[pos] = part + 1;
            if weight(&q) > cutoff {
                continue;
            }
            q.sort_unstable_by(|a, b| b.cmp(a));
            let target = engine.idx(&q);
            qv_add_scaled(&mut out, &qv_basis(target), &rint(part as i64));
        }
        d_table.push(out);
    }

    let omega = qv_scale(&qv_basis(engine.idx(&[1, 1])), &crate::scalars::rat(1, 2));
    let space = GradedSpace::new(labels, weights, cutoff);
    Ok(OsvaInstance::new(
        "heisenberg".to_string(),
        space,
        qv_basis(0),
        d_table,
        Some(ConformalData {
            omega,
            central_charge: rint(1),
        }),
        ModeBackend::Heisenberg(engine),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{matrix_element_product, qv_to_rv, rv_pair, vertex_eval};
    use crate::scalars::rat;

    #[test]
    fn partition_counts_match_partition_function() {
        let inst = make_heisenberg_instance(4).unwrap();
        let mut by_weight = vec![0usize; 5];
        for i in inst.space().indices() {
            let w = inst.space().weight(i).to_integer();
            by_weight[usize::try_from(w).unwrap()] += 1;
        }
        assert_eq!(by_weight, vec![1, 1, 2, 3, 5]);
    }

    #[test]
    fn binomial_mode_coefficients() {
        // n = 1: every coefficient is 1.
        for j in [-3, -1, 0, 2] {
            assert_eq!(mode_coeff(1, j), BigInt::from(1));
        }
        // n = 2: binom(-j-1, 1) = -j - 1.
        assert_eq!(mode_coeff(2, -3), BigInt::from(2));
        assert_eq!(mode_coeff(2, -2), BigInt::from(1));
        assert_eq!(mode_coeff(2, -1), BigInt::from(0));
        assert_eq!(mode_coeff(2, 0), BigInt::from(-1));
        assert_eq!(mode_coeff(2, 3), BigInt::from(-4));
    }

    #[test]
    fn single_oscillator_modes_are_oscillators() {
        // u = a(-1)1: u^+_n acts as a(n).
        let inst = make_heisenberg_instance(4).unwrap();
        let idx = |p: &[u32]| {
            inst.space()
                .indices()
                .find(|&i| {
                    inst.space().label(i)
                        == if p.is_empty() {
                            "[]".to_string()
                        } else {
                            format!(
                                "[{}]",
                                p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
                            )
                        }
                })
                .unwrap()
        };
        let a1 = idx(&[1]);
        let vac = idx(&[]);
        // a(1) a(-1) 1 = [a(1), a(-1)] 1 = 1.
        assert_eq!(inst.modes_basis(a1, 1, a1), qv_basis(vac));
        // a(-1) a(-1) 1 = a(-1)^2 1.
        assert_eq!(inst.modes_basis(a1, -1, a1), qv_basis(idx(&[1, 1])));
        // a(0) 1 = 0 and a(2) a(-1)1 = 0.
        assert!(inst.modes_basis(a1, 0, vac).is_empty());
        assert!(inst.modes_basis(a1, 2, a1).is_empty());
    }

    #[test]
    fn two_point_function_matches_closed_form() {
        // <1', Y(a(-1)1, r1) Y(a(-1)1, r2) 1> = sum_{m>=1} m r2^{m-1} r1^{-m-1},
        // the truncated expansion of (r1 - r2)^{-2}.
        let cutoff = 8;
        let inst = make_heisenberg_instance(cutoff).unwrap();
        let a1 = qv_basis(1);
        let (r1, r2) = (1.0, 0.2);
        let (value, _) = matrix_element_product(
            &inst,
            inst.vacuum(),
            &[(a1.clone(), r1), (a1.clone(), r2)],
            inst.vacuum(),
        )
        .unwrap();
        let partial: f64 = (1..=cutoff as i32)
            .map(|m| m as f64 * r2.powi(m - 1) * r1.powi(-m - 1))
            .sum();
        assert!((value - partial).abs() < 1e-12, "value {value} partial {partial}");
        let closed = (r1 - r2).powi(-2);
        assert!((value - closed).abs() < 1e-4, "value {value} closed {closed}");
        // A single factor at a small radius keeps the top shell light.
        let (_, tail) = matrix_element_product(
            &inst,
            inst.vacuum(),
            &[(a1.clone(), 0.5)],
            &qv_basis(1),
        )
        .unwrap();
        assert!(!tail, "single contraction leaves no heavy tail");
    }

    #[test]
    fn vertex_eval_vacuum_component() {
        // Component of Y(a(-1)1, 2)(a(-1)1) along the vacuum is 2^{-2} = 1/4.
        let inst = make_heisenberg_instance(4).unwrap();
        let a1 = qv_basis(1);
        let out = vertex_eval(&inst, &a1, 2.0, &a1).unwrap();
        let along_vacuum = rv_pair(inst.vacuum(), &out);
        assert_eq!(along_vacuum, 0.25);
    }

    #[test]
    fn sugawara_oracle_matches_conformal_modes() {
        // Independent construction of L(m) by normal-ordered sums
        // 1/2 sum_k :a(-k) a(m+k): compared against the engine's modes of
        // omega = 1/2 a(-1)^2 1 via L(m) = omega^+_{m+1}.
        let cutoff = 6;
        let inst = make_heisenberg_instance(cutoff).unwrap();
        let engine = match &inst.backend {
            ModeBackend::Heisenberg(e) => e,
            _ => unreachable!(),
        };
        let alpha = |m: i64, v: &QVec| -> QVec {
            let mut out = QVec::new();
            if m == 0 {
                return out;
            }
            if m < 0 {
                return engine.create((-m) as u32, v);
            }
            for (&i, c) in v {
                if let Some((scalar, j)) = engine.annihilate(m as u32, i) {
                    qv_add_scaled(&mut out, &qv_basis(j), &(c * scalar));
                }
            }
            out
        };
        let sugawara = |m: i64, v: &QVec| -> QVec {
            let mut out = QVec::new();
            let bound = cutoff as i64 + m.abs() + 2;
            for k in -bound..=bound {
                let (a, b) = (-k, m + k);
                // Normal order: creation (negative index) to the left.
                let (first, second) = if a <= b { (a, b) } else { (b, a) };
                let term = alpha(first, &alpha(second, v));
                qv_add_scaled(&mut out, &term, &rat(1, 2));
            }
            out
        };
        let omega = &inst.conformal().unwrap().omega;
        for m in -2..=2i64 {
            for v in inst.space().indices() {
                let wt = inst.space().weight(v).to_integer();
                let out_w = i64::try_from(wt.clone()).unwrap() - m;
                if out_w < 0 || out_w > cutoff as i64 {
                    continue;
                }
                let via_modes = inst.apply_mode(omega, m + 1, &qv_basis(v));
                let via_sugawara = sugawara(m, &qv_basis(v));
                assert_eq!(
                    via_modes,
                    via_sugawara,
                    "L({m}) mismatch on basis {}",
                    inst.space().label(v)
                );
            }
        }
    }

    #[test]
    fn translation_operator_action() {
        let inst = make_heisenberg_instance(4).unwrap();
        let idx = |s: &str| inst.space().indices().find(|&i| inst.space().label(i) == s).unwrap();
        // D a(-1)1 = a(-2)1.
        assert_eq!(inst.d_apply(&qv_basis(idx("[1]"))), qv_basis(idx("[2]")));
        // D a(-1)^2 1 = 2 a(-2)a(-1) 1.
        assert_eq!(
            inst.d_apply(&qv_basis(idx("[1,1]"))),
            qv_scale(&qv_basis(idx("[2,1]")), &rint(2))
        );
        // D 1 = 0.
        assert!(inst.d_apply(inst.vacuum()).is_empty());
    }

    #[test]
    fn creation_from_vacuum_reproduces_translation() {
        // u^+_{-2} 1 = D u for u = a(-1)1.
        let inst = make_heisenberg_instance(4).unwrap();
        let u = 1usize;
        let got = inst.modes_basis(u, -2, 0);
        assert_eq!(got, inst.d_apply(&qv_basis(u)));
    }

    #[test]
    fn rejects_tiny_cutoff() {
        assert!(matches!(
            make_heisenberg_instance(1),
            Err(ModesError::CutoffTooSmall(1))
        ));
    }

    #[test]
    fn mode_weight_bookkeeping_holds_across_table() {
        let inst = make_heisenberg_instance(5).unwrap();
        for u in inst.space().indices() {
            for v in inst.space().indices() {
                for n in inst.mode_range_basis(u, v) {
                    let out = inst.modes_basis(u, n, v);
                    let expected = inst.space().weight(u) + inst.space().weight(v)
                        - rint(n + 1);
                    for label in out.keys() {
                        assert_eq!(inst.space().weight(*label), &expected);
                    }
                }
            }
        }
    }

    #[test]
    fn two_point_tail_flag_raised_for_slow_ratio() {
        // r2/r1 = 0.95 keeps the top shell heavy; the heuristic should fire.
        let inst = make_heisenberg_instance(6).unwrap();
        let a1 = qv_basis(1);
        let (_, tail) = matrix_element_product(
            &inst,
            inst.vacuum(),
            &[(a1.clone(), 1.0), (a1, 0.95)],
            inst.vacuum(),
        )
        .unwrap();
        assert!(tail);
    }

    #[test]
    fn radius_order_enforced() {
        let inst = make_heisenberg_instance(4).unwrap();
        let a1 = qv_basis(1);
        assert!(matches!(
            matrix_element_product(
                &inst,
                inst.vacuum(),
                &[(a1.clone(), 0.5), (a1.clone(), 0.7)],
                inst.vacuum()
            ),
            Err(ModesError::RadiusOrder(_))
        ));
        assert!(matches!(
            vertex_eval(&inst, &a1, -1.0, &a1),
            Err(ModesError::NonPositiveRadius(_))
        ));
    }

    #[test]
    fn opposite_vertex_on_vacuum_recovers_argument() {
        // Y(1, r)v with r < 0 through the permutation identity:
        // e^{rD} Y(v, -r) 1 = e^{rD} e^{-rD} v = v, exactly at every
        // truncation level because the series cancel shell by shell.
        use crate::modes::opposite_vertex;
        let inst = make_heisenberg_instance(6).unwrap();
        for v in [1usize, 2, 4] {
            let out = opposite_vertex(&inst, inst.vacuum(), -0.8, &qv_basis(v)).unwrap();
            let expected = qv_to_rv(&qv_basis(v));
            let keys: Vec<_> = out.keys().chain(expected.keys()).collect();
            for k in keys {
                let got = out.get(k).copied().unwrap_or(0.0);
                let want = expected.get(k).copied().unwrap_or(0.0);
                assert!((got - want).abs() < 1e-12, "component {k}: {got} vs {want}");
            }
        }
    }
}
