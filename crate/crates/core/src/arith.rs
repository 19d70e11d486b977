//! Exact rationals, difference sets and absolute residues.
//!
//! Everything downstream compares densities for exact equality, so no value
//! in this crate ever passes through floating point. Element values are
//! bounded by [`MAX_ELEMENT`]; products of two in-range quantities are formed
//! in 128-bit integers and cannot wrap.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest accepted element of a difference set.
pub const MAX_ELEMENT: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("difference set must contain at least one element")]
    EmptySet,
    #[error("difference set elements must be positive, got {0}")]
    NonPositive(i128),
    #[error("element {0} exceeds the supported bound {MAX_ELEMENT}")]
    OutOfRange(u64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("malformed rational `{0}`")]
    Parse(String),
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Distance from `x` to the nearest multiple of `m`, i.e. `|x|_m`.
///
/// Panics if `m == 0`.
pub fn abs_residue(x: i128, m: u64) -> u64 {
    assert!(m >= 1, "modulus must be positive");
    let r = x.rem_euclid(m as i128) as u64;
    r.min(m - r)
}

/// `|c * e|_m` for nonnegative operands, formed without overflow.
#[inline]
pub(crate) fn abs_residue_product(c: u64, e: u64, m: u64) -> u64 {
    let r = ((c as u128 * e as u128) % m as u128) as u64;
    r.min(m - r)
}

/// An exact fraction, always stored in lowest terms with a positive
/// denominator.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i128,
    den: u128,
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };

    pub fn new(num: i128, den: i128) -> Result<Self, ArithError> {
        if den == 0 {
            return Err(ArithError::ZeroDenominator);
        }
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        Ok(Self::reduced(num, den as u128))
    }

    /// Nonnegative fraction `num / den`. Panics on a zero denominator.
    pub fn from_parts(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::reduced(num as i128, den as u128)
    }

    pub fn from_integer(v: i64) -> Self {
        Rational { num: v as i128, den: 1 }
    }

    fn reduced(num: i128, den: u128) -> Self {
        let g = gcd_u128(num.unsigned_abs(), den);
        if g <= 1 {
            return Rational { num, den };
        }
        Rational { num: num / g as i128, den: den / g }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> u128 {
        self.den
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    pub fn recip(&self) -> Result<Self, ArithError> {
        Rational::new(self.den as i128, self.num)
    }

    /// Decimal rendering rounded half-up to `places` digits, computed by long
    /// division. Display only; never compare these strings.
    pub fn to_decimal(&self, places: usize) -> String {
        let neg = self.num < 0;
        let num = self.num.unsigned_abs();
        let den = self.den;
        let mut int_part = num / den;
        let mut rem = num % den;
        let mut digits = Vec::with_capacity(places);
        for _ in 0..places {
            rem *= 10;
            digits.push((rem / den) as u8);
            rem %= den;
        }
        // round half up on the next digit
        if rem * 10 / den >= 5 {
            let mut carry = true;
            for d in digits.iter_mut().rev() {
                if !carry {
                    break;
                }
                if *d == 9 {
                    *d = 0;
                } else {
                    *d += 1;
                    carry = false;
                }
            }
            if carry {
                int_part += 1;
            }
        }
        let mut s = String::new();
        if neg && (int_part != 0 || digits.iter().any(|&d| d != 0)) {
            s.push('-');
        }
        s.push_str(&int_part.to_string());
        if places > 0 {
            s.push('.');
            s.extend(digits.iter().map(|d| char::from(b'0' + d)));
        }
        s
    }
}

/// Exact comparison by cross-multiplication. Every rational built by this
/// crate has numerator and denominator below 2^64, so the products fit in
/// 128 bits; the fallback handles anything larger without wrapping.
pub fn rational_cmp(p: &Rational, q: &Rational) -> Ordering {
    match (p.num.checked_mul(q.den as i128), q.num.checked_mul(p.den as i128)) {
        (Some(l), Some(r)) if p.den <= i128::MAX as u128 && q.den <= i128::MAX as u128 => {
            l.cmp(&r)
        }
        _ => cmp_continued(p.num, p.den, q.num, q.den),
    }
}

// Comparison by simultaneous Euclidean expansion; used only when the
// cross products would not fit in 128 bits.
fn cmp_continued(an: i128, ad: u128, bn: i128, bd: u128) -> Ordering {
    let a_floor = an.div_euclid(ad as i128);
    let b_floor = bn.div_euclid(bd as i128);
    if a_floor != b_floor {
        return a_floor.cmp(&b_floor);
    }
    let ar = an.rem_euclid(ad as i128) as u128;
    let br = bn.rem_euclid(bd as i128) as u128;
    match (ar == 0, br == 0) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        // compare ar/ad with br/bd  <=>  compare bd/br with ad/ar (reversed)
        (false, false) => cmp_continued(bd as i128, br, ad as i128, ar),
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        rational_cmp(self, other)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rational {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::Parse(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i128 = n.trim().parse().map_err(|_| bad())?;
                let d: i128 = d.trim().parse().map_err(|_| bad())?;
                Rational::new(n, d)
            }
            None => Ok(Rational::reduced(s.trim().parse().map_err(|_| bad())?, 1)),
        }
    }
}

/// Number of decimal places in serialized renderings.
pub const DECIMAL_PLACES: usize = 12;

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: i128,
    den: u128,
    decimal: String,
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RationalRepr {
            num: self.num,
            den: self.den,
            decimal: self.to_decimal(DECIMAL_PLACES),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        // the {num, den} pair is authoritative; the decimal is ignored
        let repr = RationalRepr::deserialize(deserializer)?;
        if repr.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        let r = Rational::reduced(repr.num, repr.den);
        if r.num != repr.num || r.den != repr.den {
            return Err(serde::de::Error::custom("rational not in lowest terms"));
        }
        Ok(r)
    }
}

/// A finite set of forbidden differences, sorted, deduplicated and divided
/// through by its gcd.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DifferenceSet {
    elements: Vec<u64>,
    normalization_factor: u64,
}

impl DifferenceSet {
    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    /// The gcd the raw input was divided by.
    pub fn normalization_factor(&self) -> u64 {
        self.normalization_factor
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max(&self) -> u64 {
        *self.elements.last().expect("difference sets are nonempty")
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn is_singleton(&self) -> bool {
        self.elements.len() == 1
    }

    /// Sums `m_i + m_j` over distinct elements, ascending and deduplicated.
    pub fn pair_sums(&self) -> Vec<u64> {
        let mut sums: Vec<u64> = self
            .elements
            .iter()
            .enumerate()
            .flat_map(|(i, &x)| self.elements[i + 1..].iter().map(move |&y| x + y))
            .collect();
        sums.sort_unstable();
        sums.dedup();
        sums
    }

    /// The set with `x` added (renormalized).
    pub fn with_element(&self, x: u64) -> Result<DifferenceSet, ArithError> {
        let mut raw = self.elements.clone();
        raw.push(x);
        normalize(&raw)
    }
}

impl fmt::Display for DifferenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, e) in self.elements.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

/// Sort, deduplicate and divide by the gcd.
pub fn normalize(raw: &[u64]) -> Result<DifferenceSet, ArithError> {
    if raw.is_empty() {
        return Err(ArithError::EmptySet);
    }
    if let Some(&bad) = raw.iter().find(|&&x| x == 0) {
        return Err(ArithError::NonPositive(bad as i128));
    }
    if let Some(&big) = raw.iter().find(|&&x| x > MAX_ELEMENT) {
        return Err(ArithError::OutOfRange(big));
    }
    let mut elements = raw.to_vec();
    elements.sort_unstable();
    elements.dedup();
    let t = elements.iter().fold(0, |g, &x| gcd(g, x));
    for e in &mut elements {
        *e /= t;
    }
    Ok(DifferenceSet {
        elements,
        normalization_factor: t,
    })
}

/// [`normalize`] for signed input, rejecting nonpositive entries.
pub fn normalize_signed(raw: &[i64]) -> Result<DifferenceSet, ArithError> {
    let mut out = Vec::with_capacity(raw.len());
    for &x in raw {
        if x < 1 {
            return Err(ArithError::NonPositive(x as i128));
        }
        out.push(x as u64);
    }
    normalize(&out)
}
