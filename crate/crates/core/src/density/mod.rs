//! Maximal density of M-sets: periodic witnesses, prefix-search upper bounds,
//! the exact value from the window graph, and the combined bounds.

mod cycle;
mod prefix;

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{DifferenceSet, Rational};
use crate::kappa::kappa_exact;

pub use cycle::{count_valid_windows, mu_exact_small, mu_exact_with, MuExact, MuOptions};
pub use prefix::{haralambis_upper, max_mset_prefix, prefix_counts, HaralambisBound, PrefixMax};

/// Default bound on the number of window-graph states.
pub const DEFAULT_STATE_CAP: usize = 1 << 14;

/// Widest window representable by the search state.
pub const MAX_WINDOW: u64 = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DensityError {
    #[error("window-graph state count exceeds the cap of {cap}")]
    StateCapExceeded { cap: usize },
    #[error("window of {0} positions exceeds the supported width of {MAX_WINDOW}")]
    WindowTooWide(u64),
    #[error("time budget exhausted")]
    TimeBudgetExceeded,
    #[error("k_max must be at least 1")]
    InvalidHorizon,
    #[error("lower bound is zero, reciprocal undefined")]
    ZeroLowerBound,
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// One period of a periodic set of nonnegative integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PeriodicSet {
    pattern: Vec<bool>,
    density: Rational,
}

impl PeriodicSet {
    /// Panics on an empty pattern.
    pub fn new(pattern: Vec<bool>) -> Self {
        assert!(!pattern.is_empty(), "period must be positive");
        let ones = pattern.iter().filter(|&&b| b).count() as u64;
        let density = Rational::from_parts(ones, pattern.len() as u64);
        PeriodicSet { pattern, density }
    }

    pub fn from_bits(bits: &str) -> Option<Self> {
        let pattern: Option<Vec<bool>> = bits
            .chars()
            .map(|ch| match ch {
                '1' => Some(true),
                '0' => Some(false),
                _ => None,
            })
            .collect();
        pattern.filter(|p| !p.is_empty()).map(PeriodicSet::new)
    }

    pub fn period(&self) -> u64 {
        self.pattern.len() as u64
    }

    pub fn pattern(&self) -> &[bool] {
        &self.pattern
    }

    pub fn density(&self) -> Rational {
        self.density
    }

    /// Selected residues in `[0, period)`.
    pub fn positions(&self) -> Vec<u64> {
        self.pattern
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i as u64))
            .collect()
    }

    pub fn bits(&self) -> String {
        self.pattern.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for PeriodicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PeriodicSet({}, density {})", self.bits(), self.density)
    }
}

#[derive(Serialize, Deserialize)]
struct PeriodicSetRepr {
    period: u64,
    pattern: String,
    density: Rational,
}

impl Serialize for PeriodicSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PeriodicSetRepr {
            period: self.period(),
            pattern: self.bits(),
            density: self.density,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PeriodicSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = PeriodicSetRepr::deserialize(deserializer)?;
        let p = PeriodicSet::from_bits(&repr.pattern)
            .ok_or_else(|| D::Error::custom("pattern must be a nonempty 0/1 string"))?;
        if p.period() != repr.period || p.density != repr.density {
            return Err(D::Error::custom("period or density does not match pattern"));
        }
        Ok(p)
    }
}

/// True iff the periodic extension of `p` has no two members differing by an
/// element of `set`.
pub fn validate_periodic_mset(p: &PeriodicSet, set: &DifferenceSet) -> bool {
    let q = p.pattern.len();
    set.elements().iter().all(|&d| {
        let shift = (d % q as u64) as usize;
        (0..q).all(|i| !(p.pattern[i] && p.pattern[(i + shift) % q]))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum BoundMethod {
    /// κ from the pair-sum maximization.
    PairSumKappa,
    /// Prefix-search bound minimized over `1..=k_max`, attained at `k`.
    PrefixSearch { k_max: u64, k: u64 },
    /// Maximum cycle mean of the window graph.
    WindowCycle,
    /// `μ <= 1/2` for every nonempty difference set.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityBounds {
    pub lower: Rational,
    pub lower_method: BoundMethod,
    pub upper: Rational,
    pub upper_method: BoundMethod,
    pub exact: Option<Rational>,
    pub witness: Option<PeriodicSet>,
    /// Why the exact value is missing, when it is.
    pub exact_skipped: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BoundsOptions {
    /// Horizon of the prefix search; `None` uses [`default_k_max`].
    pub k_max: Option<u64>,
    pub state_cap: usize,
    pub time_budget: Option<Duration>,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        BoundsOptions {
            k_max: None,
            state_cap: DEFAULT_STATE_CAP,
            time_budget: None,
        }
    }
}

/// `max(3 * m_2, 40)` where `m_2` is the second smallest element.
pub fn default_k_max(set: &DifferenceSet) -> u64 {
    let e = set.elements();
    let m2 = if e.len() >= 2 { e[1] } else { e[0] };
    (3 * m2).max(40)
}

/// κ below, the prefix-search bound above, and the exact density between
/// them whenever the window graph fits under the state cap.
pub fn density_bounds(set: &DifferenceSet, options: &BoundsOptions) -> Result<DensityBounds, DensityError> {
    let lower = kappa_exact(set).value;
    let k_max = options.k_max.unwrap_or_else(|| default_k_max(set));
    let (mut upper, mut upper_method) = match haralambis_upper(set, k_max, options.state_cap) {
        Ok(h) => (h.alpha, BoundMethod::PrefixSearch { k_max, k: h.best_k }),
        Err(DensityError::InvalidHorizon) => return Err(DensityError::InvalidHorizon),
        Err(_) => (Rational::from_parts(1, 2), BoundMethod::Trivial),
    };
    let mu_options = MuOptions {
        state_cap: options.state_cap,
        time_budget: options.time_budget,
    };
    let (exact, witness, exact_skipped) = match mu_exact_with(set, &mu_options) {
        Ok(m) => (Some(m.mu), Some(m.witness), None),
        Err(e @ DensityError::Internal(_)) => return Err(e),
        Err(e) => (None, None, Some(e.to_string())),
    };
    if lower > upper {
        return Err(DensityError::Internal(format!(
            "lower bound {lower} exceeds upper bound {upper}"
        )));
    }
    if let Some(mu) = exact {
        if mu < lower || mu > upper {
            return Err(DensityError::Internal(format!(
                "exact density {mu} outside [{lower}, {upper}]"
            )));
        }
        upper = mu;
        upper_method = BoundMethod::WindowCycle;
    }
    Ok(DensityBounds {
        lower,
        lower_method: BoundMethod::PairSumKappa,
        upper,
        upper_method,
        exact,
        witness,
        exact_skipped,
    })
}

/// Fractional chromatic number and circular chromatic upper bound of the
/// distance graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringNumbers {
    /// `1/μ`, present only when the density is known exactly.
    pub chi_f: Option<Rational>,
    /// `1/κ`.
    pub chi_c_upper: Rational,
}

pub fn coloring_numbers(b: &DensityBounds) -> Result<ColoringNumbers, DensityError> {
    if !b.lower.is_positive() {
        return Err(DensityError::ZeroLowerBound);
    }
    let chi_c_upper = b.lower.recip().map_err(|_| DensityError::ZeroLowerBound)?;
    let chi_f = match b.exact {
        Some(mu) => Some(mu.recip().map_err(|_| DensityError::ZeroLowerBound)?),
        None => None,
    };
    Ok(ColoringNumbers { chi_f, chi_c_upper })
}
