//! The kappa parameter: witness evaluation, the exact pair-sum maximization,
//! a brute-force sweep over all moduli, and periodic M-sets built from a
//! witness pair.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{abs_residue_product, gcd, DifferenceSet, Rational};
use crate::density::{validate_periodic_mset, PeriodicSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KappaError {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),
    #[error("multiplier must be positive")]
    InvalidMultiplier,
    #[error("witness pair ({c}, {m}) is not coprime")]
    NotCoprime { c: u64, m: u64 },
    #[error("({c}, {m}) is not a witness: some element is divisible by the modulus")]
    NoWitness { c: u64, m: u64 },
    #[error("constructed periodic set failed validation")]
    InvalidConstruction,
}

/// κ together with a coprime witness pair `(c, m)` attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaResult {
    pub value: Rational,
    pub witness_m: u64,
    pub witness_c: u64,
    /// `min_i |c * m_i|_m` at the witness pair.
    pub achieved_d: u64,
}

/// `min_i |c * m_i|_m` with an early exit once the running minimum drops to
/// `floor` or below.
#[inline]
fn min_residue(elements: &[u64], c: u64, m: u64, floor: u64) -> u64 {
    let mut d = u64::MAX;
    for &e in elements {
        let r = abs_residue_product(c, e, m);
        if r < d {
            d = r;
            if d <= floor {
                break;
            }
        }
    }
    d
}

/// `(1/m) * min_i |c * m_i|_m`. The pair need not be coprime: a common factor
/// cancels and the value equals that of the reduced pair.
pub fn witness_value(set: &DifferenceSet, c: u64, m: u64) -> Result<Rational, KappaError> {
    if m < 2 {
        return Err(KappaError::InvalidModulus(m));
    }
    if c == 0 {
        return Err(KappaError::InvalidMultiplier);
    }
    let d = min_residue(set.elements(), c, m, 0);
    Ok(Rational::from_parts(d, m))
}

/// Running maximum over `(c, m)` candidates.
///
/// Candidates are compared by value; among equal values the reduced pair with
/// the smaller modulus wins, then the smaller multiplier.
struct Best {
    d: u64,
    m: u64,
    c: u64,
}

impl Best {
    fn new() -> Self {
        Best { d: 0, m: 1, c: 0 }
    }

    /// Largest `d` that cannot strictly beat the current best at modulus `m`,
    /// minus one so that ties are still evaluated.
    fn tie_floor(&self, m: u64) -> u64 {
        // d/m < best  <=>  d * best.m < best.d * m
        let need = self.d as u128 * m as u128;
        // smallest d with d * best.m >= need is ceil(need / best.m)
        let tie = need.div_ceil(self.m as u128) as u64;
        tie.saturating_sub(1)
    }

    fn offer(&mut self, k: u64, m: u64, d: u64) {
        let lhs = d as u128 * self.m as u128;
        let rhs = self.d as u128 * m as u128;
        let g = gcd(k, m);
        let (c, mr) = (k / g, m / g);
        if lhs > rhs || (lhs == rhs && (mr, c) < (self.m, self.c)) {
            // store reduced so later tie comparisons use the reduced pair
            *self = Best { d: d / g, m: mr, c };
        }
    }

    fn finish(self) -> KappaResult {
        KappaResult {
            value: Rational::from_parts(self.d, self.m),
            witness_m: self.m,
            witness_c: self.c,
            achieved_d: self.d,
        }
    }
}

fn scan_moduli(set: &DifferenceSet, moduli: impl Iterator<Item = u64>) -> KappaResult {
    let elements = set.elements();
    let mut best = Best::new();
    for m in moduli {
        if m < 2 {
            continue;
        }
        // no k can reach the current best if even m/2 falls short
        if ((m / 2) as u128) * (best.m as u128) < (best.d as u128) * (m as u128) {
            continue;
        }
        for k in 1..=m / 2 {
            let floor = best.tie_floor(m);
            let d = min_residue(elements, k, m, floor);
            if d > floor {
                best.offer(k, m, d);
            }
        }
    }
    best.finish()
}

fn singleton_result() -> KappaResult {
    KappaResult {
        value: Rational::from_parts(1, 2),
        witness_m: 2,
        witness_c: 1,
        achieved_d: 1,
    }
}

/// Exact κ(M): the maximum of [`witness_value`] over moduli that are sums of
/// two distinct elements and all `1 <= k <= m/2`.
///
/// The singleton `{1}` (the only normalized singleton) has κ = 1/2 with
/// witness `(1, 2)`.
pub fn kappa_exact(set: &DifferenceSet) -> KappaResult {
    if set.is_singleton() {
        return singleton_result();
    }
    scan_moduli(set, set.pair_sums().into_iter())
}

/// Brute-force maximum over every modulus `2 <= m <= m_max`. Independent of
/// the pair-sum restriction; used to cross-check [`kappa_exact`].
pub fn kappa_sweep_oracle(set: &DifferenceSet, m_max: u64) -> Result<KappaResult, KappaError> {
    if m_max < 2 {
        return Err(KappaError::InvalidModulus(m_max));
    }
    Ok(scan_moduli(set, 2..=m_max))
}

/// The period-`m` set `{ s : (c*s mod m) < d }`, where `d` is the witness
/// residue. Its density is exactly `d/m`.
pub fn witness_mset(set: &DifferenceSet, c: u64, m: u64) -> Result<PeriodicSet, KappaError> {
    if m < 2 {
        return Err(KappaError::InvalidModulus(m));
    }
    if c == 0 {
        return Err(KappaError::InvalidMultiplier);
    }
    if gcd(c, m) != 1 {
        return Err(KappaError::NotCoprime { c, m });
    }
    let d = min_residue(set.elements(), c, m, 0);
    if d == 0 {
        return Err(KappaError::NoWitness { c, m });
    }
    let pattern: Vec<bool> = (0..m)
        .map(|s| ((c as u128 * s as u128) % m as u128) < d as u128)
        .collect();
    let p = PeriodicSet::new(pattern);
    if !validate_periodic_mset(&p, set) || p.density() != Rational::from_parts(d, m) {
        return Err(KappaError::InvalidConstruction);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::normalize;
    use proptest::prelude::*;

    fn set(xs: &[u64]) -> DifferenceSet {
        normalize(xs).unwrap()
    }

    fn r(n: u64, d: u64) -> Rational {
        Rational::from_parts(n, d)
    }

    /// Straight transcription of the pair-sum formula with no pruning.
    fn naive_kappa(s: &DifferenceSet, moduli: &[u64]) -> Rational {
        let mut best = Rational::ZERO;
        for &m in moduli {
            for c in 1..=m / 2 {
                let d = s
                    .elements()
                    .iter()
                    .map(|&e| crate::arith::abs_residue((c * e) as i128, m))
                    .min()
                    .unwrap();
                best = best.max(r(d, m));
            }
        }
        best
    }

    #[test]
    fn witness_value_examples() {
        assert_eq!(witness_value(&set(&[2, 3, 5, 16]), 1, 7).unwrap(), r(2, 7));
        assert_eq!(witness_value(&set(&[2, 3, 5, 19]), 3, 21).unwrap(), r(2, 7));
        assert_eq!(witness_value(&set(&[2, 3, 5, 22]), 4, 27).unwrap(), r(7, 27));
        assert_eq!(
            witness_value(&set(&[2, 3]), 1, 1),
            Err(KappaError::InvalidModulus(1))
        );
        assert_eq!(
            witness_value(&set(&[2, 3]), 0, 5),
            Err(KappaError::InvalidMultiplier)
        );
    }

    #[test]
    fn kappa_exact_examples() {
        let k = kappa_exact(&set(&[2, 3, 4, 5]));
        assert_eq!(k.value, r(2, 7));
        assert_eq!((k.witness_c, k.witness_m, k.achieved_d), (1, 7, 2));

        assert_eq!(kappa_exact(&set(&[2, 3, 5, 16])).value, r(2, 7));

        let s = set(&[4, 5, 9, 13, 140]);
        let k = kappa_exact(&s);
        assert_eq!(k.value, r(4, 17));
        let pair_sums = s.pair_sums();
        assert_eq!(naive_kappa(&s, &pair_sums), r(4, 17));
    }

    #[test]
    fn non_coprime_multipliers_count() {
        // only pair sum is 6; k = 3 gives 3/6, which is the coprime pair (1, 2)
        let k = kappa_exact(&set(&[1, 5]));
        assert_eq!(k.value, r(1, 2));
        assert_eq!((k.witness_c, k.witness_m, k.achieved_d), (1, 2, 1));
    }

    #[test]
    fn singleton_is_one_half() {
        let k = kappa_exact(&set(&[1]));
        assert_eq!(k, singleton_result());
        let k = kappa_exact(&set(&[7]));
        assert_eq!(k.value, r(1, 2));
    }

    #[test]
    fn sweep_oracle_examples() {
        let s = set(&[2, 3, 5, 16]);
        assert_eq!(kappa_sweep_oracle(&s, 36).unwrap().value, r(2, 7));

        let k = kappa_sweep_oracle(&set(&[1, 2]), 6).unwrap();
        assert_eq!((k.value, k.witness_c, k.witness_m), (r(1, 3), 1, 3));

        let k = kappa_sweep_oracle(&set(&[1]), 4).unwrap();
        assert_eq!((k.value, k.witness_c, k.witness_m), (r(1, 2), 1, 2));

        assert!(kappa_sweep_oracle(&s, 1).is_err());
    }

    #[test]
    fn witness_mset_examples() {
        let p = witness_mset(&set(&[2, 3, 5, 16]), 1, 7).unwrap();
        assert_eq!(p.period(), 7);
        assert_eq!(p.positions(), vec![0, 1]);
        assert_eq!(p.density(), r(2, 7));

        let p = witness_mset(&set(&[1, 2]), 1, 3).unwrap();
        assert_eq!(p.positions(), vec![0]);
        assert_eq!(p.density(), r(1, 3));

        let s = set(&[2, 3, 5, 7, 16]);
        let p = witness_mset(&s, 5, 21).unwrap();
        assert_eq!(p.period(), 21);
        assert_eq!(p.density(), r(4, 21));
        let mut residues: Vec<u64> = p.positions().iter().map(|&x| 5 * x % 21).collect();
        residues.sort_unstable();
        assert_eq!(residues, vec![0, 1, 2, 3]);
    }

    #[test]
    fn witness_mset_errors() {
        assert_eq!(
            witness_mset(&set(&[2, 3]), 2, 4),
            Err(KappaError::NotCoprime { c: 2, m: 4 })
        );
        assert_eq!(
            witness_mset(&set(&[2, 3]), 1, 3),
            Err(KappaError::NoWitness { c: 1, m: 3 })
        );
    }

    #[test]
    fn reported_witness_is_reduced_and_replays() {
        for xs in [&[1u64, 2][..], &[2, 3, 5, 16], &[3, 5, 8], &[1, 4, 6, 9]] {
            let s = set(xs);
            let k = kappa_exact(&s);
            assert_eq!(gcd(k.witness_c, k.witness_m), 1);
            assert!(k.witness_c >= 1 && 2 * k.witness_c <= k.witness_m);
            assert_eq!(witness_value(&s, k.witness_c, k.witness_m).unwrap(), k.value);
            assert_eq!(r(k.achieved_d, k.witness_m), k.value);
        }
    }

    fn small_set() -> impl Strategy<Value = DifferenceSet> {
        proptest::collection::btree_set(1u64..=30, 2..=5)
            .prop_map(|s| normalize(&s.into_iter().collect::<Vec<_>>()).unwrap())
            .prop_filter("need two elements", |s| s.len() >= 2)
    }

    proptest! {
        #[test]
        fn exact_matches_naive_definition(s in small_set()) {
            let k = kappa_exact(&s);
            prop_assert_eq!(k.value, naive_kappa(&s, &s.pair_sums()));
            prop_assert!(k.value.is_positive());
            prop_assert!(k.value <= r(1, 2));
        }

        #[test]
        fn exact_matches_sweep(s in small_set()) {
            let k = kappa_exact(&s);
            let o = kappa_sweep_oracle(&s, 2 * s.max()).unwrap();
            prop_assert_eq!(k.value, o.value);
        }

        #[test]
        fn scaling_invariance(xs in proptest::collection::vec(1u64..=40, 1..5), t in 1u64..50) {
            let scaled: Vec<u64> = xs.iter().map(|&x| x * t).collect();
            prop_assert_eq!(kappa_exact(&normalize(&xs).unwrap()), kappa_exact(&normalize(&scaled).unwrap()));
        }

        #[test]
        fn witnesses_are_lower_bounds_with_valid_msets(s in small_set(), c in 1u64..40, m in 2u64..60) {
            let v = witness_value(&s, c, m).unwrap();
            if s.pair_sums().contains(&m) {
                prop_assert!(v <= kappa_exact(&s).value);
            }
            if gcd(c, m) == 1 && v.is_positive() {
                let p = witness_mset(&s, c, m).unwrap();
                prop_assert_eq!(p.density(), v);
                prop_assert!(validate_periodic_mset(&p, &s));
            }
        }
    }
}
