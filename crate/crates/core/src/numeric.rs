//! Exact rationals, upper reals and two-sided real approximants.
//!
//! Upper reals are given intensionally by a bound query `n -> q_n` whose
//! running minimum is the represented value. `∞` is an explicit sentinel.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::verdict::Verdict;

/// Arbitrary-precision fraction in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

/// `n / d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^-k`.
pub fn dyadic(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rational from {0:?}")]
pub struct ParseRationalError(pub String);

/// Accepts `p`, `p/q` and finite decimals such as `-1.25`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let t = s.trim();
    let err = || ParseRationalError(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = whole.starts_with('-');
        let w = if whole.is_empty() || whole == "-" || whole == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|_| err())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let f = BigInt::from_str(frac).map_err(|_| err())?;
        let mag = w.abs() * &scale + f;
        let n = if neg { -mag } else { mag };
        return Ok(Rational::new(n, scale));
    }
    BigInt::from_str(t)
        .map(Rational::from_integer)
        .map_err(|_| err())
}

/// Canonical `p/q` text (integers print without a denominator).
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// A rational usable as a topology element; serialized as a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Q(#[serde(with = "serde_rational")] pub Rational);

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.0))
    }
}

/// Lossy decimal rendering for human-readable output.
pub fn to_f64(q: &Rational) -> f64 {
    let n: f64 = q.numer().to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = q.denom().to_string().parse().unwrap_or(f64::NAN);
    n / d
}

/// Exact square root when `s` is the square of a rational.
pub fn sqrt_exact(s: &Rational) -> Option<Rational> {
    if s.is_negative() {
        return None;
    }
    let n = s.numer().sqrt();
    let d = s.denom().sqrt();
    if &(&n * &n) == s.numer() && &(&d * &d) == s.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Dyadic enclosure `lo ≤ √s ≤ hi` with `hi - lo ≤ 2^-n`.
pub fn sqrt_bounds(s: &Rational, n: u32) -> (Rational, Rational) {
    assert!(!s.is_negative(), "square root of a negative rational");
    if let Some(r) = sqrt_exact(s) {
        return (r.clone(), r);
    }
    // floor(sqrt(s * 4^n)) / 2^n
    let scale = BigInt::one() << (2 * n as usize);
    let scaled = (s.numer() * &scale) / s.denom();
    let root = scaled.sqrt();
    let den = BigInt::one() << n as usize;
    let lo = Rational::new(root.clone(), den.clone());
    let hi = Rational::new(root + 1, den);
    (lo, hi)
}

/// Element of `ℚ ∪ {∞}`; the ordering puts `Infinite` last.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Finite(Rational),
    Infinite,
}

impl Bound {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Bound::Finite(q) => Some(q),
            Bound::Infinite => None,
        }
    }

    pub fn add(&self, o: &Bound) -> Bound {
        match (self, o) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a + b),
            _ => Bound::Infinite,
        }
    }

    pub fn lt_rat(&self, q: &Rational) -> bool {
        matches!(self, Bound::Finite(a) if a < q)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(q) => write!(f, "{q}"),
            Bound::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

type BoundFn = Arc<dyn Fn(u32) -> Bound + Send + Sync>;
type LowerFn = Arc<dyn Fn(u32) -> Option<Rational> + Send + Sync>;

/// Approximant of an upper real: a nonincreasing sequence of bounds.
#[derive(Clone)]
pub struct UpperReal {
    raw: BoundFn,
    exact: Option<Bound>,
}

impl fmt::Debug for UpperReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UpperReal")
            .field("exact", &self.exact)
            .field("q0", &self.query(0))
            .finish()
    }
}

impl UpperReal {
    pub fn constant(q: Rational) -> Self {
        assert!(!q.is_negative(), "upper reals are nonnegative");
        let b = Bound::Finite(q);
        let c = b.clone();
        UpperReal {
            raw: Arc::new(move |_| c.clone()),
            exact: Some(b),
        }
    }

    /// The empty upper cut.
    pub fn infinite() -> Self {
        UpperReal {
            raw: Arc::new(|_| Bound::Infinite),
            exact: Some(Bound::Infinite),
        }
    }

    /// Wraps an arbitrary bound sequence; monotonicity is enforced by running minimum.
    pub fn from_fn(f: impl Fn(u32) -> Bound + Send + Sync + 'static) -> Self {
        UpperReal {
            raw: Arc::new(f),
            exact: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact_value(&self) -> Option<&Bound> {
        self.exact.as_ref()
    }

    pub fn query(&self, n: u32) -> Bound {
        if let Some(e) = &self.exact {
            return e.clone();
        }
        (0..=n).map(|k| (self.raw)(k)).min().expect("nonempty range")
    }

    pub fn add(&self, o: &UpperReal) -> UpperReal {
        let exact = match (&self.exact, &o.exact) {
            (Some(a), Some(b)) => Some(a.add(b)),
            _ => None,
        };
        let (u, v) = (self.clone(), o.clone());
        UpperReal {
            raw: Arc::new(move |n| u.query(n).add(&v.query(n))),
            exact,
        }
    }

    pub fn sup(&self, o: &UpperReal) -> UpperReal {
        let exact = match (&self.exact, &o.exact) {
            (Some(a), Some(b)) => Some(a.clone().max(b.clone())),
            _ => None,
        };
        let (u, v) = (self.clone(), o.clone());
        UpperReal {
            raw: Arc::new(move |n| u.query(n).max(v.query(n))),
            exact,
        }
    }

    /// `U < q`. Proved carries the precision index at which a bound fell below `q`.
    pub fn lt(&self, q: &Rational, budget: u32) -> Verdict<u32, ()> {
        if let Some(e) = &self.exact {
            return if e.lt_rat(q) {
                Verdict::Proved(0)
            } else {
                Verdict::Refuted(())
            };
        }
        let mut best = Bound::Infinite;
        for n in 0..=budget {
            best = best.min((self.raw)(n));
            if best.lt_rat(q) {
                return Verdict::Proved(n);
            }
        }
        Verdict::Unknown { budget }
    }
}

pub fn ur_add(u: &UpperReal, v: &UpperReal) -> UpperReal {
    u.add(v)
}

pub fn ur_sup(u: &UpperReal, v: &UpperReal) -> UpperReal {
    u.sup(v)
}

pub fn ur_lt(u: &UpperReal, q: &Rational, budget: u32) -> Verdict<u32, ()> {
    u.lt(q, budget)
}

/// Two-sided approximant; `lower = None` stands for `-∞`.
#[derive(Clone)]
pub struct DedekindReal {
    lower: LowerFn,
    upper: BoundFn,
}

impl fmt::Debug for DedekindReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DedekindReal")
            .field("lower0", &self.lower(0))
            .field("upper0", &self.upper(0))
            .finish()
    }
}

impl DedekindReal {
    pub fn from_rational(q: Rational) -> Self {
        let (a, b) = (q.clone(), q);
        DedekindReal {
            lower: Arc::new(move |_| Some(a.clone())),
            upper: Arc::new(move |_| Bound::Finite(b.clone())),
        }
    }

    pub fn from_fns(
        lower: impl Fn(u32) -> Option<Rational> + Send + Sync + 'static,
        upper: impl Fn(u32) -> Bound + Send + Sync + 'static,
    ) -> Self {
        DedekindReal {
            lower: Arc::new(lower),
            upper: Arc::new(upper),
        }
    }

    /// `√s` by dyadic bisection.
    pub fn sqrt(s: Rational) -> Self {
        let t = s.clone();
        DedekindReal::from_fns(
            move |n| Some(sqrt_bounds(&s, n).0),
            move |n| Bound::Finite(sqrt_bounds(&t, n).1),
        )
    }

    pub fn lower(&self, n: u32) -> Option<Rational> {
        (0..=n).filter_map(|k| (self.lower)(k)).max()
    }

    pub fn upper(&self, n: u32) -> Bound {
        (0..=n).map(|k| (self.upper)(k)).min().expect("nonempty range")
    }

    /// Drops the lower cut.
    pub fn upper_part(&self) -> UpperReal {
        let u = self.upper.clone();
        UpperReal::from_fn(move |n| u(n))
    }

    pub fn lt(&self, q: &Rational, budget: u32) -> Verdict<u32, ()> {
        for n in 0..=budget {
            if self.upper(n).lt_rat(q) {
                return Verdict::Proved(n);
            }
            if matches!(self.lower(n), Some(l) if &l >= q) {
                return Verdict::Refuted(());
            }
        }
        Verdict::Unknown { budget }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Less,
    Greater,
    Within,
    Unknown,
}

/// Compares two approximants, stopping at the first precision that separates
/// them or pins `|x - y| ≤ tol`.
pub fn dr_compare(x: &DedekindReal, y: &DedekindReal, tol: &Rational, budget: u32) -> Comparison {
    assert!(tol.is_positive(), "tolerance must be positive");
    for n in 0..=budget {
        let (xl, xu, yl, yu) = (x.lower(n), x.upper(n), y.lower(n), y.upper(n));
        if let (Bound::Finite(xu), Some(yl)) = (&xu, &yl) {
            if xu < yl {
                return Comparison::Less;
            }
        }
        if let (Some(xl), Bound::Finite(yu)) = (&xl, &yu) {
            if xl > yu {
                return Comparison::Greater;
            }
        }
        if let (Some(xl), Bound::Finite(xu), Some(yl), Bound::Finite(yu)) = (xl, xu, yl, yu) {
            let hi = if xu > yu { xu } else { yu };
            let lo = if xl < yl { xl } else { yl };
            if hi - lo <= *tol {
                return Comparison::Within;
            }
        }
    }
    Comparison::Unknown
}

/// `Ordering` of two rationals lifted to `Bound`.
pub fn cmp_bound(a: &Bound, b: &Rational) -> Ordering {
    match a {
        Bound::Finite(q) => q.cmp(b),
        Bound::Infinite => Ordering::Greater,
    }
}

pub fn min_rat(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max_rat(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Largest `2^-k` strictly below `x` (`x > 0`).
pub fn dyadic_below(x: &Rational) -> Rational {
    assert!(x.is_positive());
    let mut k = 0u32;
    let mut d = Rational::one();
    // grow upwards first for large x
    while &(&d * int(2)) < x {
        d *= int(2);
    }
    while &d >= x {
        k += 1;
        d = dyadic(k);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-7").unwrap(), int(-7));
        assert_eq!(parse_rational("1.25").unwrap(), rat(5, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(-2, 4)), "-1/2");
    }

    #[test]
    fn add_and_sup_of_constants() {
        let s = ur_add(&UpperReal::constant(rat(1, 2)), &UpperReal::constant(rat(1, 3)));
        assert_eq!(s.query(5), Bound::Finite(rat(5, 6)));
        let inf = ur_add(&UpperReal::infinite(), &UpperReal::constant(int(1)));
        assert_eq!(inf.query(3), Bound::Infinite);
        let m = ur_sup(&UpperReal::constant(rat(1, 2)), &UpperReal::constant(rat(1, 3)));
        assert_eq!(m.query(0), Bound::Finite(rat(1, 2)));
        assert_eq!(
            ur_sup(&UpperReal::constant(int(0)), &UpperReal::infinite()).query(0),
            Bound::Infinite
        );
    }

    #[test]
    fn zero_is_additive_identity() {
        let u = DedekindReal::sqrt(int(2)).upper_part();
        let z = ur_add(&UpperReal::constant(int(0)), &u);
        for n in 0..12 {
            assert_eq!(z.query(n), u.query(n));
        }
    }

    #[test]
    fn lt_judgments() {
        assert!(ur_lt(&UpperReal::constant(rat(1, 2)), &int(1), 0).is_proved());
        assert!(ur_lt(&UpperReal::constant(int(1)), &int(1), 8).is_refuted());
        // d((0,0),(1,1)) = √2 against 1415/1000
        let d = DedekindReal::sqrt(int(2)).upper_part();
        assert!(matches!(d.lt(&rat(1415, 1000), 2), Verdict::Unknown { .. }));
        assert!(d.lt(&rat(1415, 1000), 20).is_proved());
        // plain upper reals never refute
        assert!(!d.lt(&rat(14, 10), 30).is_refuted());
    }

    #[test]
    fn compare_cases() {
        let a = DedekindReal::from_rational(rat(1, 2));
        let b = DedekindReal::from_rational(rat(3, 4));
        assert_eq!(dr_compare(&a, &b, &rat(1, 100), 4), Comparison::Less);
        assert_eq!(dr_compare(&b, &a, &rat(1, 100), 4), Comparison::Greater);
        assert_eq!(dr_compare(&a, &a, &rat(1, 100), 0), Comparison::Within);
        let r2 = DedekindReal::sqrt(int(2));
        let c = DedekindReal::from_rational(rat(141, 100));
        assert_eq!(dr_compare(&r2, &c, &rat(1, 1000), 30), Comparison::Greater);
    }

    #[test]
    fn sqrt_bounds_tight() {
        for s in [int(2), rat(1, 3), int(10), rat(9, 4)] {
            for n in [0u32, 5, 17, 30] {
                let (lo, hi) = sqrt_bounds(&s, n);
                assert!(&lo * &lo <= s && s <= &hi * &hi);
                assert!(&hi - &lo <= dyadic(n));
            }
        }
        assert_eq!(sqrt_exact(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(sqrt_exact(&int(2)), None);
    }

    #[test]
    fn dyadic_below_is_strict() {
        assert_eq!(dyadic_below(&rat(1, 2)), rat(1, 4));
        assert_eq!(dyadic_below(&rat(3, 4)), rat(1, 2));
        assert_eq!(dyadic_below(&int(5)), int(4));
    }

    fn arb_rat() -> impl Strategy<Value = Rational> {
        (0i64..200, 1i64..50).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn queries_nonincreasing(seed in proptest::collection::vec(arb_rat(), 1..8)) {
            let s = seed.clone();
            let u = UpperReal::from_fn(move |n| Bound::Finite(s[n as usize % s.len()].clone()));
            for n in 0..20 {
                prop_assert!(u.query(n + 1) <= u.query(n));
            }
        }

        #[test]
        fn exact_add_sup_match_arithmetic(a in arb_rat(), b in arb_rat()) {
            let (u, v) = (UpperReal::constant(a.clone()), UpperReal::constant(b.clone()));
            prop_assert_eq!(ur_add(&u, &v).query(3), Bound::Finite(&a + &b));
            prop_assert_eq!(ur_sup(&u, &v).query(3), Bound::Finite(max_rat(&a, &b)));
        }

        #[test]
        fn lt_never_both(a in arb_rat(), q in arb_rat(), b1 in 0u32..10, b2 in 0u32..10) {
            prop_assume!(q > Rational::zero());
            let u = UpperReal::constant(a);
            prop_assert!(!(u.lt(&q, b1).is_proved() && u.lt(&q, b2).is_refuted()));
        }

        #[test]
        fn forgetting_lower_keeps_upper(s in arb_rat()) {
            let d = DedekindReal::sqrt(s);
            let u = d.upper_part();
            for n in 0..16 {
                prop_assert_eq!(u.query(n), d.upper(n));
            }
        }
    }
}
