//! Exact maximal density as the maximum cycle mean of the window graph.
//!
//! A node is a window: the membership bits of the last `max(M)` positions,
//! restricted to windows that are themselves M-consistent. An edge appends
//! one position (weight 1 if selected, 0 otherwise). Every closed walk spells
//! out a periodic M-set whose density is the walk's mean weight, and the
//! all-zero window reaches and is reached by every node, so the graph is
//! strongly connected and Karp's walk-length recurrence from the zero window
//! gives the maximum mean.

use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{validate_periodic_mset, DensityError, PeriodicSet, DEFAULT_STATE_CAP, MAX_WINDOW};
use crate::arith::{DifferenceSet, Rational};

const NONE: u32 = u32::MAX;
const UNREACHED: i64 = i64::MIN / 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuExact {
    pub mu: Rational,
    pub witness: PeriodicSet,
}

#[derive(Debug, Clone)]
pub struct MuOptions {
    pub state_cap: usize,
    pub time_budget: Option<Duration>,
}

impl Default for MuOptions {
    fn default() -> Self {
        MuOptions {
            state_cap: DEFAULT_STATE_CAP,
            time_budget: None,
        }
    }
}

struct WindowGraph {
    /// `succ[v][b]` is the window after appending bit `b`, or `NONE`.
    succ: Vec<[u32; 2]>,
}

impl WindowGraph {
    fn build(set: &DifferenceSet, state_cap: usize) -> Result<Self, DensityError> {
        let width = set.max();
        if width > MAX_WINDOW {
            return Err(DensityError::WindowTooWide(width));
        }
        let mask: u128 = if width == 128 { u128::MAX } else { (1u128 << width) - 1 };
        let conflict: u128 = set.elements().iter().fold(0, |acc, &d| acc | (1u128 << (d - 1)));

        let mut index: HashMap<u128, u32> = HashMap::from([(0u128, 0u32)]);
        let mut windows = vec![0u128];
        let mut succ: Vec<[u32; 2]> = vec![[NONE; 2]];
        let mut queue = VecDeque::from([0u32]);
        while let Some(v) = queue.pop_front() {
            let w = windows[v as usize];
            for bit in [0u128, 1] {
                if bit == 1 && w & conflict != 0 {
                    continue;
                }
                let next = ((w << 1) | bit) & mask;
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if windows.len() >= state_cap {
                            return Err(DensityError::StateCapExceeded { cap: state_cap });
                        }
                        let id = windows.len() as u32;
                        index.insert(next, id);
                        windows.push(next);
                        succ.push([NONE; 2]);
                        queue.push_back(id);
                        id
                    }
                };
                succ[v as usize][bit as usize] = id;
            }
        }
        Ok(WindowGraph { succ })
    }

    fn len(&self) -> usize {
        self.succ.len()
    }

    /// One step of the walk recurrence: maximum weight of walks one edge
    /// longer.
    fn step(&self, prev: &[i64], cur: &mut [i64]) {
        cur.fill(UNREACHED);
        for (u, &du) in prev.iter().enumerate() {
            if du == UNREACHED {
                continue;
            }
            for (bit, &v) in self.succ[u].iter().enumerate() {
                if v != NONE {
                    let cand = du + bit as i64;
                    let slot = &mut cur[v as usize];
                    if cand > *slot {
                        *slot = cand;
                    }
                }
            }
        }
    }
}

struct Deadline(Option<Instant>);

impl Deadline {
    fn check(&self) -> Result<(), DensityError> {
        match self.0 {
            Some(t) if Instant::now() >= t => Err(DensityError::TimeBudgetExceeded),
            _ => Ok(()),
        }
    }
}

/// Karp's maximum cycle mean, `max_v min_k (D_n(v) - D_k(v)) / (n - k)`,
/// with `D_k(v)` the heaviest walk of exactly `k` edges from the zero window.
/// Two passes keep memory linear: the first finds `D_n`, the second replays
/// the rows to take the minima.
fn karp_max_mean(g: &WindowGraph, deadline: &Deadline) -> Result<(i64, i64), DensityError> {
    let n = g.len();
    let mut prev = vec![UNREACHED; n];
    let mut cur = vec![UNREACHED; n];
    prev[0] = 0;
    for _ in 0..n {
        deadline.check()?;
        g.step(&prev, &mut cur);
        std::mem::swap(&mut prev, &mut cur);
    }
    let dn = prev.clone();

    // per node: smallest (dn - dk)/(n - k) as (num, den)
    let mut minima: Vec<Option<(i64, i64)>> = vec![None; n];
    prev.fill(UNREACHED);
    prev[0] = 0;
    for k in 0..n {
        deadline.check()?;
        for v in 0..n {
            if dn[v] == UNREACHED || prev[v] == UNREACHED {
                continue;
            }
            let cand = (dn[v] - prev[v], (n - k) as i64);
            let better = match minima[v] {
                None => true,
                Some((a, b)) => cand.0 * b < a * cand.1,
            };
            if better {
                minima[v] = Some(cand);
            }
        }
        g.step(&prev, &mut cur);
        std::mem::swap(&mut prev, &mut cur);
    }
    minima
        .into_iter()
        .flatten()
        .reduce(|best, c| if c.0 * best.1 > best.0 * c.1 { c } else { best })
        .ok_or_else(|| DensityError::Internal("window graph has no cycle".into()))
}

/// Edges `u -> v` that are tight for potentials solving the longest-path
/// problem under weights `q*bit - p`. Those weights admit no positive cycle,
/// and a cycle has zero weight (mean exactly `p/q`) iff all its edges are
/// tight.
fn tight_edges(g: &WindowGraph, p: i64, q: i64, deadline: &Deadline) -> Result<Vec<[bool; 2]>, DensityError> {
    let n = g.len();
    let mut pot = vec![0i64; n];
    let mut rounds = 0usize;
    loop {
        deadline.check()?;
        let mut changed = false;
        for u in 0..n {
            for (bit, &v) in g.succ[u].iter().enumerate() {
                if v == NONE {
                    continue;
                }
                let cand = pot[u] + q * bit as i64 - p;
                if cand > pot[v as usize] {
                    pot[v as usize] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        rounds += 1;
        if rounds > n + 1 {
            return Err(DensityError::Internal(
                "cycle heavier than the computed maximum mean".into(),
            ));
        }
    }
    Ok((0..n)
        .map(|u| {
            let mut t = [false; 2];
            for (bit, &v) in g.succ[u].iter().enumerate() {
                t[bit] = v != NONE && pot[u] + q * bit as i64 - p == pot[v as usize];
            }
            t
        })
        .collect())
}

/// Smallest period among optimal cycles, then the lexicographically largest
/// bit string (so the pattern starts with a selected position and lists the
/// earliest positions it can).
fn extract_witness(g: &WindowGraph, tight: &[[bool; 2]], deadline: &Deadline) -> Result<Vec<bool>, DensityError> {
    let n = g.len();
    let edge = |u: usize, bit: usize| -> Option<usize> {
        (tight[u][bit]).then(|| g.succ[u][bit] as usize)
    };

    // shortest tight cycle through each node, by BFS with a depth cutoff
    let mut cycle_len = vec![usize::MAX; n];
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n];
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if s % 256 == 0 {
            deadline.check()?;
        }
        if !tight[s][0] && !tight[s][1] {
            continue;
        }
        for &t in &touched {
            dist[t] = usize::MAX;
        }
        touched.clear();
        queue.clear();
        dist[s] = 0;
        touched.push(s);
        queue.push_back(s);
        'bfs: while let Some(u) = queue.pop_front() {
            if dist[u] + 1 > best {
                break;
            }
            for bit in 0..2 {
                if let Some(v) = edge(u, bit) {
                    if v == s {
                        cycle_len[s] = dist[u] + 1;
                        best = best.min(dist[u] + 1);
                        break 'bfs;
                    }
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        touched.push(v);
                        queue.push_back(v);
                    }
                }
            }
        }
    }
    if best == usize::MAX {
        return Err(DensityError::Internal("no tight cycle".into()));
    }

    // among starts on a shortest cycle, greedily take 1 before 0 while a
    // closed walk of the remaining length stays possible
    let len = best;
    let mut winner: Option<Vec<bool>> = None;
    let mut reach = vec![vec![false; n]; len + 1];
    for s in (0..n).filter(|&s| cycle_len[s] == len) {
        deadline.check()?;
        for row in reach.iter_mut() {
            row.fill(false);
        }
        reach[0][s] = true;
        for t in 1..=len {
            let (done, rest) = reach.split_at_mut(t);
            let prev = &done[t - 1];
            for (u, slot) in rest[0].iter_mut().enumerate() {
                *slot = (0..2).any(|bit| edge(u, bit).is_some_and(|v| prev[v]));
            }
        }
        let mut pattern = Vec::with_capacity(len);
        let mut u = s;
        for step in 0..len {
            let remaining = len - step - 1;
            let (bit, v) = [1usize, 0]
                .into_iter()
                .find_map(|bit| edge(u, bit).filter(|&v| reach[remaining][v]).map(|v| (bit, v)))
                .ok_or_else(|| DensityError::Internal("lost closed walk".into()))?;
            pattern.push(bit == 1);
            u = v;
        }
        if winner.as_ref().is_none_or(|w| pattern > *w) {
            winner = Some(pattern);
        }
    }
    winner.ok_or_else(|| DensityError::Internal("no witness cycle".into()))
}

/// Number of M-consistent windows of width `max(M)`, or an error once it
/// passes `state_cap`.
pub fn count_valid_windows(set: &DifferenceSet, state_cap: usize) -> Result<usize, DensityError> {
    WindowGraph::build(set, state_cap).map(|g| g.len())
}

/// Exact maximal density with a periodic witness attaining it.
pub fn mu_exact_small(set: &DifferenceSet, state_cap: usize) -> Result<MuExact, DensityError> {
    mu_exact_with(
        set,
        &MuOptions {
            state_cap,
            time_budget: None,
        },
    )
}

pub fn mu_exact_with(set: &DifferenceSet, options: &MuOptions) -> Result<MuExact, DensityError> {
    let deadline = Deadline(options.time_budget.map(|d| Instant::now() + d));
    let g = WindowGraph::build(set, options.state_cap)?;
    let (num, den) = karp_max_mean(&g, &deadline)?;
    let mu = Rational::new(num as i128, den as i128)
        .map_err(|e| DensityError::Internal(e.to_string()))?;
    let (p, q) = (mu.numer() as i64, mu.denom() as i64);
    let tight = tight_edges(&g, p, q, &deadline)?;
    let pattern = extract_witness(&g, &tight, &deadline)?;
    let witness = PeriodicSet::new(pattern);
    if witness.density() != mu || !validate_periodic_mset(&witness, set) {
        return Err(DensityError::Internal(format!(
            "witness {witness:?} does not certify density {mu}"
        )));
    }
    Ok(MuExact { mu, witness })
}
