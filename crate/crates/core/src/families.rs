//! The two parametric families `F1 = {a, a+1, 2a+1, n}` and
//! `F2 = {a, a+1, 2a+1, 3a+1, n}`: the arithmetic blocks that partition the
//! admissible `n`, classification of `(a, n)` into a block, the closed-form
//! lower bound on κ attached to each block, and the explicit `(x, m)` pair
//! that certifies it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{normalize, DifferenceSet, Rational};
use crate::kappa::witness_value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("n = {n} coincides with an existing element of the family at a = {a}")]
    Degenerate { a: u64, n: u64 },
    #[error("no bound applies to this case")]
    NoWitness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `{a, a+1, 2a+1, n}`
    F1,
    /// `{a, a+1, 2a+1, 3a+1, n}`
    F2,
}

impl Family {
    /// The fixed elements besides `n`.
    pub fn base_elements(self, a: u64) -> Vec<u64> {
        match self {
            Family::F1 => vec![a, a + 1, 2 * a + 1],
            Family::F2 => vec![a, a + 1, 2 * a + 1, 3 * a + 1],
        }
    }

    pub fn collides(self, a: u64, n: u64) -> bool {
        self.base_elements(a).contains(&n)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::F1 => "f1",
            Family::F2 => "f2",
        })
    }
}

impl FromStr for Family {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(Family::F1),
            "f2" => Ok(Family::F2),
            other => Err(FamilyError::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    #[serde(rename = "F1-CaseI-J")]
    F1CaseIJ,
    #[serde(rename = "F1-N1")]
    F1N1,
    #[serde(rename = "F1-N2")]
    F1N2,
    #[serde(rename = "F1-N3")]
    F1N3,
    #[serde(rename = "F2-O1")]
    F2O1,
    #[serde(rename = "F2-O2")]
    F2O2,
    #[serde(rename = "F2-O3")]
    F2O3,
    #[serde(rename = "F2-P1")]
    F2P1,
    #[serde(rename = "F2-P2")]
    F2P2,
    #[serde(rename = "F2-P3")]
    F2P3,
    #[serde(rename = "F2-MOD4")]
    F2Mod4,
    #[serde(rename = "F2-S")]
    F2S,
    #[serde(rename = "F2-REMARK-X")]
    F2RemarkX,
    #[serde(rename = "UNCOVERED")]
    Uncovered,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::F1CaseIJ => "F1-CaseI-J",
            CaseLabel::F1N1 => "F1-N1",
            CaseLabel::F1N2 => "F1-N2",
            CaseLabel::F1N3 => "F1-N3",
            CaseLabel::F2O1 => "F2-O1",
            CaseLabel::F2O2 => "F2-O2",
            CaseLabel::F2O3 => "F2-O3",
            CaseLabel::F2P1 => "F2-P1",
            CaseLabel::F2P2 => "F2-P2",
            CaseLabel::F2P3 => "F2-P3",
            CaseLabel::F2Mod4 => "F2-MOD4",
            CaseLabel::F2S => "F2-S",
            CaseLabel::F2RemarkX => "F2-REMARK-X",
            CaseLabel::Uncovered => "UNCOVERED",
        }
    }
}

/// Block indices; which ones are set depends on the label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CaseIndices {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub i: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub j: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<u64>,
    /// Modulus used by the residue-class cases (`F2-MOD4`, `F2-S`).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyCase {
    pub family: Family,
    pub a: u64,
    pub n: u64,
    pub label: CaseLabel,
    pub indices: CaseIndices,
    /// Lower bound on κ; absent for `UNCOVERED`.
    pub bound: Option<Rational>,
    /// Whether κ = μ = bound is asserted (not just κ >= bound).
    pub exact: bool,
}

impl FamilyCase {
    pub fn is_covered(&self) -> bool {
        self.label != CaseLabel::Uncovered
    }

    /// `F1-N2(i=0,l=1)` style rendering.
    pub fn display_label(&self) -> String {
        let ix = &self.indices;
        let parts: Vec<String> = [("i", ix.i), ("j", ix.j), ("l", ix.l), ("q", ix.q), ("r", ix.r)]
            .into_iter()
            .filter_map(|(name, v)| v.map(|v| format!("{name}={v}")))
            .collect();
        let body = match self.label {
            CaseLabel::F2Mod4 => format!("n mod 4 = {}", self.n % 4),
            _ => parts.join(","),
        };
        if body.is_empty() {
            self.label.as_str().to_string()
        } else {
            format!("{}({body})", self.label.as_str())
        }
    }

    /// The bound written in the form it takes in the residue-class case for
    /// `a ≡ 2 (mod 4)`, `n ≡ 0 (mod 4)`: `(m - (2a+1)) / (4m)`.
    pub fn alternate_bound_form(&self) -> Option<String> {
        match (self.label, self.indices.m) {
            (CaseLabel::F2Mod4, Some(m)) if self.n.is_multiple_of(4) => Some(format!(
                "(m-(2a+1))/(4m) with m = 2a+n+1 = {m}: ({}-{})/{}",
                m,
                2 * self.a + 1,
                4 * m
            )),
            _ => None,
        }
    }
}

/// The three families of arithmetic blocks indexed by `i >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockFamily {
    /// `N_1, N_2, N_3` for F1, any `a >= 1`.
    #[serde(rename = "N")]
    N,
    /// `O_1, O_2, O_3` for F2, `a ≡ 0 (mod 4)`.
    #[serde(rename = "O")]
    O,
    /// `P_1, P_2, P_3` for F2, `a ≡ 1 (mod 4)`.
    #[serde(rename = "P")]
    P,
}

impl FromStr for BlockFamily {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "2.1" | "N" | "n" => Ok(BlockFamily::N),
            "3.1" | "O" | "o" => Ok(BlockFamily::O),
            "3.3" | "P" | "p" => Ok(BlockFamily::P),
            other => Err(FamilyError::InvalidParameter(format!("unknown block family `{other}`"))),
        }
    }
}

/// One block `{ base_i + offset + l : 0 <= l <= l_max }`; empty when
/// `l_max < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct BlockShape {
    offset: u64,
    l_max: i64,
}

impl BlockFamily {
    fn check(self, a: u64) -> Result<(), FamilyError> {
        let ok = match self {
            BlockFamily::N => a >= 1,
            BlockFamily::O => a >= 4 && a.is_multiple_of(4),
            BlockFamily::P => a % 4 == 1,
        };
        if ok {
            Ok(())
        } else {
            let need = match self {
                BlockFamily::N => "a >= 1",
                BlockFamily::O => "a ≡ 0 (mod 4), a >= 4",
                BlockFamily::P => "a ≡ 1 (mod 4)",
            };
            Err(FamilyError::InvalidParameter(format!("a = {a} violates {need}")))
        }
    }

    /// First element of the `i = 0` blocks.
    pub fn start(self, a: u64) -> u64 {
        match self {
            BlockFamily::N => (3 * a + 2) * a,
            BlockFamily::O => (8 * a + 3) * a,
            BlockFamily::P => (16 * a + 17) * a + 3,
        }
    }

    /// Shift between consecutive `i`.
    pub fn period(self, a: u64) -> u64 {
        match self {
            BlockFamily::N => 3 * a + 1,
            BlockFamily::O | BlockFamily::P => 4 * a + 1,
        }
    }

    /// The element the block union is claimed to omit.
    pub fn claimed_excluded(self, a: u64) -> u64 {
        match self {
            BlockFamily::N => (3 * a + 2) * a - 1,
            BlockFamily::O => a * (8 * a + 3) - 1,
            BlockFamily::P => a * (16 * a + 17) + 2,
        }
    }

    fn shapes(self, a: u64) -> [BlockShape; 3] {
        let ai = a as i64;
        match self {
            BlockFamily::N => {
                let third = a / 3;
                [
                    BlockShape { offset: 0, l_max: ai },
                    BlockShape {
                        offset: a + 1,
                        l_max: ai + third as i64,
                    },
                    BlockShape {
                        offset: 2 * (a + 1) + third,
                        l_max: ai - 2 - third as i64,
                    },
                ]
            }
            BlockFamily::O => [
                BlockShape { offset: 0, l_max: 2 * ai },
                BlockShape {
                    offset: 2 * a + 1,
                    l_max: 2 * ai - ai / 2,
                },
                BlockShape {
                    offset: 2 * (2 * a + 1) - a / 2,
                    l_max: ai / 2 - 2,
                },
            ],
            BlockFamily::P => [
                BlockShape { offset: 0, l_max: 2 * ai },
                BlockShape {
                    offset: 2 * a + 1,
                    l_max: (3 * ai - 1) / 2,
                },
                BlockShape {
                    offset: (7 * a + 3) / 2,
                    // (a-3)/2 is -1 at a = 1: the block is empty
                    l_max: if a >= 3 { (ai - 3) / 2 } else { -1 },
                },
            ],
        }
    }

    /// The three blocks for index `i`, as explicit lists.
    pub fn blocks(self, a: u64, i: u64) -> Result<[Vec<u64>; 3], FamilyError> {
        self.check(a)?;
        let base = self.start(a) + self.period(a) * i;
        Ok(self.shapes(a).map(|s| {
            if s.l_max < 0 {
                Vec::new()
            } else {
                (0..=s.l_max as u64).map(|l| base + s.offset + l).collect()
            }
        }))
    }

    /// `(block 0..3, i, l)` for `n >= start`.
    fn locate(self, a: u64, n: u64) -> Option<(usize, u64, u64)> {
        let start = self.start(a);
        if n < start {
            return None;
        }
        let off = n - start;
        let (i, r) = (off / self.period(a), off % self.period(a));
        self.shapes(a).iter().enumerate().find_map(|(k, s)| {
            (s.l_max >= 0 && r >= s.offset && r - s.offset <= s.l_max as u64)
                .then_some((k, i, r - s.offset))
        })
    }
}

/// `N_1^{(i)}, N_2^{(i)}, N_3^{(i)}`.
pub fn f1_blocks(a: u64, i: u64) -> Result<[Vec<u64>; 3], FamilyError> {
    BlockFamily::N.blocks(a, i)
}

/// `O_1^{(i)}, O_2^{(i)}, O_3^{(i)}` for `a ≡ 0 (mod 4)`.
pub fn f2_blocks_mod0(a: u64, i: u64) -> Result<[Vec<u64>; 3], FamilyError> {
    BlockFamily::O.blocks(a, i)
}

/// `P_1^{(i)}, P_2^{(i)}, P_3^{(i)}` for `a ≡ 1 (mod 4)`.
pub fn f2_blocks_mod1(a: u64, i: u64) -> Result<[Vec<u64>; 3], FamilyError> {
    BlockFamily::P.blocks(a, i)
}

fn check_inputs(family: Family, a: u64, n: u64) -> Result<(), FamilyError> {
    if a < 1 {
        return Err(FamilyError::InvalidParameter("a must be at least 1".into()));
    }
    if n < 1 {
        return Err(FamilyError::InvalidParameter("n must be at least 1".into()));
    }
    if family.collides(a, n) {
        return Err(FamilyError::Degenerate { a, n });
    }
    Ok(())
}

fn frac(num: u64, den: u64) -> Option<Rational> {
    Some(Rational::from_parts(num, den))
}

fn uncovered(family: Family, a: u64, n: u64) -> FamilyCase {
    FamilyCase {
        family,
        a,
        n,
        label: CaseLabel::Uncovered,
        indices: CaseIndices::default(),
        bound: None,
        exact: false,
    }
}

/// `n ∈ { a + step*j + l : 0 <= j <= j_max, 0 <= l <= l_max }`, returning
/// `(j, l)`.
fn in_progression_union(a: u64, n: u64, step: u64, j_max: u64, l_max: u64) -> Option<(u64, u64)> {
    if n < a {
        return None;
    }
    let (j, l) = ((n - a) / step, (n - a) % step);
    (j <= j_max && l <= l_max).then_some((j, l))
}

/// Classifies `(a, n)` for `{a, a+1, 2a+1, n}`.
pub fn classify_f1(a: u64, n: u64) -> Result<FamilyCase, FamilyError> {
    check_inputs(Family::F1, a, n)?;
    let case = |label, indices, bound, exact| FamilyCase {
        family: Family::F1,
        a,
        n,
        label,
        indices,
        bound,
        exact,
    };
    let tight = frac(a, 3 * a + 1);
    if a >= 1 {
        if let Some((j, l)) = in_progression_union(a, n, 3 * a + 1, a - 1, a) {
            let ix = CaseIndices {
                j: Some(j),
                l: Some(l),
                ..Default::default()
            };
            return Ok(case(CaseLabel::F1CaseIJ, ix, tight, true));
        }
    }
    let Some((block, i, l)) = BlockFamily::N.locate(a, n) else {
        return Ok(uncovered(Family::F1, a, n));
    };
    let ix = CaseIndices {
        i: Some(i),
        l: Some(l),
        ..Default::default()
    };
    Ok(match block {
        0 => case(CaseLabel::F1N1, ix, tight, true),
        1 => case(CaseLabel::F1N2, ix, frac(a * (a + 1 + i), a + n), false),
        _ => case(
            CaseLabel::F1N3,
            ix,
            frac(a * (a + 1 + i) + a / 3 + 1 + l, 2 * a + n + 1),
            false,
        ),
    })
}

/// `(lo, hi)` of the `t`-th interval of `L_i`, scaled by 20.
fn s_interval_scaled(a: u64, i: u64, t: u64) -> (i64, i64) {
    let m = (5 * a + 2) as i64;
    let (i, t) = (i as i64, t as i64);
    ((4 * t + i + 1) * m - (5 * i + 1), (4 * t + 3 + i) * m + 1 - 5 * i)
}

/// Classifies `(a, n)` for `{a, a+1, 2a+1, 3a+1, n}`, dispatching on
/// `a mod 4`.
pub fn classify_f2(a: u64, n: u64) -> Result<FamilyCase, FamilyError> {
    check_inputs(Family::F2, a, n)?;
    let case = |label, indices, bound| FamilyCase {
        family: Family::F2,
        a,
        n,
        label,
        indices,
        bound,
        exact: false,
    };
    let quarter_ish = frac(a, 4 * a + 1);
    match a % 4 {
        0 | 1 => {
            let (blocks, labels, x_max) = if a.is_multiple_of(4) {
                (BlockFamily::O, [CaseLabel::F2O1, CaseLabel::F2O2, CaseLabel::F2O3], 2 * a)
            } else {
                (BlockFamily::P, [CaseLabel::F2P1, CaseLabel::F2P2, CaseLabel::F2P3], 4 * a + 3)
            };
            if let Some((block, i, l)) = blocks.locate(a, n) {
                let ix = CaseIndices {
                    i: Some(i),
                    l: Some(l),
                    ..Default::default()
                };
                let bound = match (blocks, block) {
                    (_, 0) => quarter_ish,
                    (BlockFamily::O, 1) => frac(a * (2 * a + 1 + i), a + n),
                    (BlockFamily::O, _) => frac(a * (2 * a + 1 + i) + a / 2 + 1 + l, 3 * a + 1 + n),
                    (_, 1) => frac(4 * a * (a + 1) + a * i, a + n),
                    _ => frac(4 * a * (a + 1) + a.div_ceil(2) + a * i + l, 3 * a + n + 1),
                };
                return Ok(case(labels[block], ix, bound));
            }
            if let Some((j, l)) = in_progression_union(a, n, 4 * a + 1, x_max, 2 * a) {
                let ix = CaseIndices {
                    j: Some(j),
                    l: Some(l),
                    ..Default::default()
                };
                return Ok(case(CaseLabel::F2RemarkX, ix, quarter_ish));
            }
            Ok(uncovered(Family::F2, a, n))
        }
        2 => {
            let r = n % 4;
            let (m, bound) = if r != 0 {
                (5 * a + 2, frac(1, 4))
            } else {
                let m = 2 * a + n + 1;
                (m, frac(n, 4 * m))
            };
            let ix = CaseIndices {
                r: Some(r),
                m: Some(m),
                ..Default::default()
            };
            Ok(case(CaseLabel::F2Mod4, ix, bound))
        }
        _ => {
            let m = 5 * a + 2;
            let i = n % 4;
            let quot = n / 4;
            let (q, r) = (quot / m, quot % m);
            let hit = (0..=4u64).find(|&t| {
                let (lo, hi) = s_interval_scaled(a, i, t);
                let scaled = 20 * r as i64;
                lo <= scaled && scaled <= hi
            });
            match hit {
                Some(t) => {
                    let ix = CaseIndices {
                        i: Some(i),
                        q: Some(q),
                        r: Some(r),
                        t: Some(t),
                        m: Some(m),
                        ..Default::default()
                    };
                    Ok(case(CaseLabel::F2S, ix, frac(5 * a + 1, 4 * m)))
                }
                None => Ok(uncovered(Family::F2, a, n)),
            }
        }
    }
}

pub fn classify(family: Family, a: u64, n: u64) -> Result<FamilyCase, FamilyError> {
    match family {
        Family::F1 => classify_f1(a, n),
        Family::F2 => classify_f2(a, n),
    }
}

/// The concrete difference set for `(family, a, n)`.
pub fn family_set(family: Family, a: u64, n: u64) -> Result<DifferenceSet, FamilyError> {
    check_inputs(family, a, n)?;
    let mut raw = family.base_elements(a);
    raw.push(n);
    normalize(&raw).map_err(|e| FamilyError::InvalidParameter(e.to_string()))
}

pub fn build_set(fc: &FamilyCase) -> Result<DifferenceSet, FamilyError> {
    family_set(fc.family, fc.a, fc.n)
}

/// The multiplier and modulus used to certify a case's bound, with the
/// value they produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofReplay {
    pub c: u64,
    pub m: u64,
    pub value: Rational,
    /// `value == bound`, compared exactly.
    pub matches: bool,
}

/// The `(x, m)` pair certifying `fc`'s bound.
pub fn proof_witness(fc: &FamilyCase) -> Result<(u64, u64), FamilyError> {
    let (a, n) = (fc.a, fc.n);
    let i = fc.indices.i.unwrap_or(0);
    let pair = match fc.label {
        CaseLabel::F1CaseIJ | CaseLabel::F1N1 => (1, 3 * a + 1),
        CaseLabel::F1N2 => (a + 1 + i, a + n),
        CaseLabel::F1N3 => (a + 2 + i, 2 * a + 1 + n),
        CaseLabel::F2O1 | CaseLabel::F2P1 | CaseLabel::F2RemarkX => (1, 4 * a + 1),
        CaseLabel::F2O2 => (2 * a + 1 + i, a + n),
        CaseLabel::F2O3 => (2 * a + 2 + i, 3 * a + 1 + n),
        CaseLabel::F2P2 => (4 * (a + 1) + i, a + n),
        CaseLabel::F2P3 => (4 * a + 5 + i, 3 * a + 1 + n),
        CaseLabel::F2Mod4 => {
            if n % 4 != 0 {
                let m = 5 * a + 2;
                (m / 4, m)
            } else {
                let m = 2 * a + n + 1;
                ((m - 1) / 4, m)
            }
        }
        CaseLabel::F2S => {
            let m = 5 * a + 2;
            ((m - 5) / 4, m)
        }
        CaseLabel::Uncovered => return Err(FamilyError::NoWitness),
    };
    Ok(pair)
}

/// Evaluates the certifying pair on the actual set and compares with the
/// case's bound.
pub fn replay_proof_witness(fc: &FamilyCase) -> Result<ProofReplay, FamilyError> {
    let (c, m) = proof_witness(fc)?;
    let bound = fc.bound.ok_or(FamilyError::NoWitness)?;
    let set = build_set(fc)?;
    let value = witness_value(&set, c, m).map_err(|e| FamilyError::InvalidParameter(e.to_string()))?;
    Ok(ProofReplay {
        c,
        m,
        value,
        matches: value == bound,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub blocks: BlockFamily,
    pub a: u64,
    pub start: u64,
    pub period: u64,
    pub horizon: u64,
    /// No two blocks with the same `i` share an element.
    pub disjoint_within: bool,
    /// No blocks with different `i` share an element.
    pub disjoint_across: bool,
    pub first_overlap: Option<u64>,
    pub first_gap: Option<u64>,
    /// `[start, covered_to]` is the longest covered prefix of the range.
    pub covered_to: Option<u64>,
    pub tiles: bool,
    /// The single element the union is claimed to miss.
    pub claimed_excluded: u64,
    pub claimed_excluded_below_start: bool,
    /// Positive integers below `start` that no block reaches.
    pub uncovered_below_start: u64,
}

/// Checks that the blocks tile `[start, horizon]` with no overlap or gap.
pub fn partition_check(blocks: BlockFamily, a: u64, horizon: u64) -> Result<PartitionReport, FamilyError> {
    blocks.check(a)?;
    let start = blocks.start(a);
    if horizon < start {
        return Err(FamilyError::InvalidParameter(format!(
            "horizon {horizon} is below the block start {start}"
        )));
    }
    let len = (horizon - start + 1) as usize;
    let mut owner: Vec<Option<u64>> = vec![None; len];
    let (mut within, mut across) = (true, true);
    let mut first_overlap: Option<u64> = None;
    let mut i = 0u64;
    while start + blocks.period(a) * i <= horizon {
        for block in blocks.blocks(a, i)? {
            for x in block.into_iter().take_while(|&x| x <= horizon) {
                let slot = &mut owner[(x - start) as usize];
                if let Some(prev) = *slot {
                    if prev == i {
                        within = false;
                    } else {
                        across = false;
                    }
                    first_overlap = Some(first_overlap.map_or(x, |f| f.min(x)));
                }
                *slot = Some(i);
            }
        }
        i += 1;
    }
    let first_gap = owner.iter().position(Option::is_none).map(|p| start + p as u64);
    let covered_to = match first_gap {
        Some(g) if g == start => None,
        Some(g) => Some(g - 1),
        None => Some(horizon),
    };
    let claimed = blocks.claimed_excluded(a);
    Ok(PartitionReport {
        blocks,
        a,
        start,
        period: blocks.period(a),
        horizon,
        disjoint_within: within,
        disjoint_across: across,
        first_overlap,
        first_gap,
        covered_to,
        tiles: within && across && first_gap.is_none(),
        claimed_excluded: claimed,
        claimed_excluded_below_start: claimed < start,
        uncovered_below_start: start - 1,
    })
}
