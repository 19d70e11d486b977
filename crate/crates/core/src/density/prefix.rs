//! Largest M-sets inside `[0, k]` that contain the origin, and the upper
//! bound on the density derived from them.
//!
//! The search runs left to right over positions, keeping for each state the
//! membership of the last `w` positions, where `w` is the largest element of
//! M that fits inside the horizon. Elements beyond the horizon never
//! constrain anything inside it.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{DensityError, MAX_WINDOW};
use crate::arith::{DifferenceSet, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixMax {
    /// `max |S ∩ [0, k]|` over M-sets `S` containing 0.
    pub count: u64,
    /// A maximizing subset of `[0, k]`.
    pub witness: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaralambisBound {
    pub alpha: Rational,
    pub best_k: u64,
}

struct Node {
    window: u128,
    count: u64,
    parent: u32,
}

struct Layers {
    layers: Vec<Vec<Node>>,
}

/// Runs the search through position `k`, retaining every layer for witness
/// reconstruction.
fn run(set: &DifferenceSet, k: u64, state_cap: usize) -> Result<Layers, DensityError> {
    let relevant: Vec<u64> = set.elements().iter().copied().filter(|&d| d <= k).collect();
    let width = relevant.last().copied().unwrap_or(1);
    if width > MAX_WINDOW {
        return Err(DensityError::WindowTooWide(width));
    }
    let mask: u128 = if width == 128 { u128::MAX } else { (1u128 << width) - 1 };
    // bit j of a window is position p - j; a new position conflicts with
    // bit d - 1 for each d in M
    let conflict: u128 = relevant.iter().fold(0, |acc, &d| acc | (1u128 << (d - 1)));

    let mut layers = Vec::with_capacity(k as usize + 1);
    let mut current = vec![Node {
        window: 1,
        count: 1,
        parent: 0,
    }];
    for _ in 0..k {
        let mut index: HashMap<u128, u32> = HashMap::with_capacity(current.len() * 2);
        let mut next: Vec<Node> = Vec::with_capacity(current.len() * 2);
        for (pi, node) in current.iter().enumerate() {
            for bit in [0u128, 1] {
                if bit == 1 && node.window & conflict != 0 {
                    continue;
                }
                let window = ((node.window << 1) | bit) & mask;
                let count = node.count + bit as u64;
                match index.get(&window) {
                    Some(&j) => {
                        let slot = &mut next[j as usize];
                        if count > slot.count {
                            slot.count = count;
                            slot.parent = pi as u32;
                        }
                    }
                    None => {
                        if next.len() >= state_cap {
                            return Err(DensityError::StateCapExceeded { cap: state_cap });
                        }
                        index.insert(window, next.len() as u32);
                        next.push(Node {
                            window,
                            count,
                            parent: pi as u32,
                        });
                    }
                }
            }
        }
        layers.push(current);
        current = next;
    }
    layers.push(current);
    Ok(Layers { layers })
}

/// `f(k) = max |S ∩ [0, k]|` over M-sets containing 0, with one maximizing
/// subset.
pub fn max_mset_prefix(set: &DifferenceSet, k: u64, state_cap: usize) -> Result<PrefixMax, DensityError> {
    let Layers { layers } = run(set, k, state_cap)?;
    let last = layers.last().expect("at least one layer");
    // first maximal state keeps the witness deterministic
    let (mut idx, best) = last
        .iter()
        .enumerate()
        .fold((0usize, 0u64), |(bi, bc), (i, n)| if n.count > bc { (i, n.count) } else { (bi, bc) });
    let mut witness = Vec::with_capacity(best as usize);
    for pos in (0..=k).rev() {
        let node = &layers[pos as usize][idx];
        if node.window & 1 == 1 {
            witness.push(pos);
        }
        idx = node.parent as usize;
    }
    witness.reverse();
    Ok(PrefixMax { count: best, witness })
}

/// `[f(0), f(1), …, f(k_max)]`.
pub fn prefix_counts(set: &DifferenceSet, k_max: u64, state_cap: usize) -> Result<Vec<u64>, DensityError> {
    // one pass; each layer's maximum is recorded before it is dropped
    let relevant: Vec<u64> = set.elements().iter().copied().filter(|&d| d <= k_max).collect();
    let width = relevant.last().copied().unwrap_or(1);
    if width > MAX_WINDOW {
        return Err(DensityError::WindowTooWide(width));
    }
    let mask: u128 = if width == 128 { u128::MAX } else { (1u128 << width) - 1 };
    let conflict: u128 = relevant.iter().fold(0, |acc, &d| acc | (1u128 << (d - 1)));

    let mut best: HashMap<u128, u64> = HashMap::from([(1u128, 1u64)]);
    let mut counts = vec![1u64];
    for _ in 0..k_max {
        let mut next: HashMap<u128, u64> = HashMap::with_capacity(best.len() * 2);
        for (&window, &count) in &best {
            for bit in [0u128, 1] {
                if bit == 1 && window & conflict != 0 {
                    continue;
                }
                let w = ((window << 1) | bit) & mask;
                let c = count + bit as u64;
                let slot = next.entry(w).or_insert(0);
                *slot = (*slot).max(c);
            }
            if next.len() > state_cap {
                return Err(DensityError::StateCapExceeded { cap: state_cap });
            }
        }
        counts.push(next.values().copied().max().unwrap_or(0));
        best = next;
    }
    Ok(counts)
}

/// `α = min_{1 <= k <= k_max} f(k)/(k+1)` and the smallest minimizing `k`.
/// Every M-set containing 0 has at most `(k+1)α` members in `[0, k]` for
/// that `k`, so `α` bounds the maximal density from above.
pub fn haralambis_upper(set: &DifferenceSet, k_max: u64, state_cap: usize) -> Result<HaralambisBound, DensityError> {
    if k_max < 1 {
        return Err(DensityError::InvalidHorizon);
    }
    let counts = prefix_counts(set, k_max, state_cap)?;
    let mut best = HaralambisBound {
        alpha: Rational::from_parts(counts[1], 2),
        best_k: 1,
    };
    for (k, &f) in counts.iter().enumerate().skip(2) {
        let ratio = Rational::from_parts(f, k as u64 + 1);
        if ratio < best.alpha {
            best = HaralambisBound {
                alpha: ratio,
                best_k: k as u64,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::normalize;
    use crate::density::DEFAULT_STATE_CAP;
    use proptest::prelude::*;

    fn set(xs: &[u64]) -> DifferenceSet {
        normalize(xs).unwrap()
    }

    /// Exhaustive subsets of `[1, k]` joined with `{0}`.
    fn brute_prefix(s: &DifferenceSet, k: u64) -> u64 {
        let mut best = 0;
        for mask in 0u32..(1 << k) {
            let mut members = vec![0u64];
            members.extend((1..=k).filter(|&p| mask >> (p - 1) & 1 == 1));
            let ok = members
                .iter()
                .all(|&x| members.iter().all(|&y| x <= y || !s.contains(x - y)));
            if ok {
                best = best.max(members.len() as u64);
            }
        }
        best
    }

    #[test]
    fn prefix_examples() {
        let s = set(&[2, 3, 5, 16]);
        let p = max_mset_prefix(&s, 6, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(p.count, 2);
        assert_eq!(p.witness.len(), 2);
        assert_eq!(p.witness[0], 0);

        let p = max_mset_prefix(&set(&[1]), 4, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(p.count, 3);
        assert_eq!(p.witness, vec![0, 2, 4]);

        let p = max_mset_prefix(&s, 0, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(p, PrefixMax { count: 1, witness: vec![0] });
    }

    #[test]
    fn haralambis_examples() {
        let r = |n, d| Rational::from_parts(n, d);
        let h = haralambis_upper(&set(&[2, 3, 5, 16]), 6, DEFAULT_STATE_CAP).unwrap();
        assert_eq!((h.alpha, h.best_k), (r(2, 7), 6));
        let h = haralambis_upper(&set(&[1, 2, 3, 5]), 3, DEFAULT_STATE_CAP).unwrap();
        assert_eq!((h.alpha, h.best_k), (r(1, 4), 3));
        let h = haralambis_upper(&set(&[1]), 1, DEFAULT_STATE_CAP).unwrap();
        assert_eq!((h.alpha, h.best_k), (r(1, 2), 1));
        assert_eq!(
            haralambis_upper(&set(&[1]), 0, DEFAULT_STATE_CAP),
            Err(DensityError::InvalidHorizon)
        );
    }

    #[test]
    fn state_cap_is_enforced() {
        let s = set(&[9, 10]);
        assert_eq!(
            prefix_counts(&s, 30, 4),
            Err(DensityError::StateCapExceeded { cap: 4 })
        );
    }

    #[test]
    fn elements_beyond_horizon_are_ignored() {
        // {2, 3, 500} over [0, 10] behaves like {2, 3}
        let a = prefix_counts(&set(&[2, 3, 500]), 10, DEFAULT_STATE_CAP).unwrap();
        let b = prefix_counts(&set(&[2, 3]), 10, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn matches_exhaustive_search(xs in proptest::collection::btree_set(1u64..=8, 1..4), k in 0u64..=12) {
            let s = set(&xs.into_iter().collect::<Vec<_>>());
            let p = max_mset_prefix(&s, k, DEFAULT_STATE_CAP).unwrap();
            prop_assert_eq!(p.count, brute_prefix(&s, k));
            prop_assert_eq!(p.witness.len() as u64, p.count);
            prop_assert_eq!(p.witness[0], 0);
            for &x in &p.witness {
                prop_assert!(x <= k);
                for &y in &p.witness {
                    prop_assert!(x <= y || !s.contains(x - y));
                }
            }
            prop_assert_eq!(prefix_counts(&s, k, DEFAULT_STATE_CAP).unwrap()[k as usize], p.count);
        }

        #[test]
        fn prefix_counts_grow_by_at_most_one(xs in proptest::collection::btree_set(1u64..=10, 1..4)) {
            let s = set(&xs.into_iter().collect::<Vec<_>>());
            let f = prefix_counts(&s, 40, DEFAULT_STATE_CAP).unwrap();
            for w in f.windows(2) {
                prop_assert!(w[0] <= w[1] && w[1] <= w[0] + 1);
            }
        }
    }
}
