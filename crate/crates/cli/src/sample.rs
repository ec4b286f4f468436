//! Seeded sample generation for the truncated checks.
//!
//! All randomness flows through one counter-based generator seeded from the
//! command line, so a fixed seed reproduces the exact argument tuples and
//! radii on every run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use osva_core::modes::{AssocSample, OsvaInstance, QVec};
use osva_core::scalars::rint;

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sparse exact vector: up to three distinct basis indices with nonzero
/// integer coefficients drawn from {-2, -1, 1, 2}.
pub fn sample_qvec(rng: &mut ChaCha8Rng, dim: usize) -> QVec {
    let pool: Vec<usize> = (0..dim).collect();
    sample_qvec_from(rng, &pool)
}

/// Sparse exact vector supported on the given basis-index pool.
pub fn sample_qvec_from(rng: &mut ChaCha8Rng, pool: &[usize]) -> QVec {
    let entries = 3.min(pool.len());
    let mut v = QVec::new();
    while v.len() < entries {
        let index = pool[rng.gen_range(0..pool.len())];
        if v.contains_key(&index) {
            continue;
        }
        let coeff = [-2i64, -1, 1, 2][rng.gen_range(0..4)];
        v.insert(index, rint(coeff));
    }
    v
}

/// Basis indices whose weight is at most `max_weight`.
pub fn shell_indices(inst: &OsvaInstance, max_weight: i64) -> Vec<usize> {
    let space = inst.space();
    (0..space.dim())
        .filter(|&i| *space.weight(i) <= rint(max_weight))
        .collect()
}

/// Radii with `r1 > r2 > r1 - r2 > 0` and a comfortable margin on each
/// inequality.  Both expansion ratios `r2 / r1` and `(r1 - r2) / r2` stay
/// below 0.75, so the truncated sums on either side of the associativity
/// identity converge at a usable rate.  Letting `r1 - r2` drift towards zero
/// would be admissible on paper but inflates the intermediate matrix elements
/// by `(r1 - r2)^{-n-1}`, which swamps any fixed tolerance with float noise.
pub fn sample_radii(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let r2 = 0.55 + 0.15 * rng.gen::<f64>();
    let r1 = r2 * (1.45 + 0.3 * rng.gen::<f64>());
    (r1, r2)
}

/// Argument tuples for the truncated associativity check.  The first tuple
/// always uses the reference radii (1.0, 0.6); later tuples draw admissible
/// radii from the generator.
///
/// Arguments are drawn from the weight <= 2 shell.  The shell is fixed, so
/// raising the cutoff refines the truncated sums and shrinks the recorded
/// residual; sampling from the whole truncated space would instead pull in
/// ever-heavier states whose matrix elements grow with the cutoff.
pub fn assoc_samples(
    rng: &mut ChaCha8Rng,
    inst: &OsvaInstance,
    count: usize,
) -> Vec<AssocSample> {
    let pool = shell_indices(inst, 2);
    (0..count)
        .map(|i| {
            let (r1, r2) = if i == 0 { (1.0, 0.6) } else { sample_radii(rng) };
            AssocSample {
                u: sample_qvec_from(rng, &pool),
                v: sample_qvec_from(rng, &pool),
                w: sample_qvec_from(rng, &pool),
                vprime: sample_qvec_from(rng, &pool),
                r1,
                r2,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_reproduces_samples() {
        let mut a = rng_for(7);
        let mut b = rng_for(7);
        for _ in 0..10 {
            assert_eq!(sample_qvec(&mut a, 20), sample_qvec(&mut b, 20));
            assert_eq!(sample_radii(&mut a), sample_radii(&mut b));
        }
        let mut c = rng_for(8);
        let differs = (0..10).any(|_| sample_qvec(&mut a, 20) != sample_qvec(&mut c, 20));
        assert!(differs);
    }

    #[test]
    fn coefficients_stay_in_range() {
        let mut rng = rng_for(0);
        for _ in 0..50 {
            let v = sample_qvec(&mut rng, 12);
            assert_eq!(v.len(), 3);
            for (index, coeff) in &v {
                assert!(*index < 12);
                assert!(*coeff != rint(0));
                assert!(*coeff >= rint(-2) && *coeff <= rint(2));
                assert!(coeff.is_integer());
            }
        }
    }

    #[test]
    fn radii_are_admissible() {
        let mut rng = rng_for(1);
        for _ in 0..100 {
            let (r1, r2) = sample_radii(&mut rng);
            assert!(r1 > r2);
            assert!(r2 > r1 - r2);
            assert!(r1 - r2 > 0.0);
        }
    }
}
