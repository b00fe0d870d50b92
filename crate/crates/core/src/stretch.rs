//! Exact rational stretch parameter.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest numerator or denominator accepted for ε.
pub const MAX_EPS_PART: u32 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EpsilonError {
    #[error("expected 'P/Q', got '{0}'")]
    Syntax(String),
    #[error("epsilon {0}/{1} out of range (need 0 < P, 0 < Q, both <= 2^20)")]
    Range(u32, u32),
}

/// ε as a reduced fraction `num / den`. Every comparison involving ε is
/// done on cross-multiplied 128-bit integers.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Epsilon {
    num: u32,
    den: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Epsilon {
    /// ε = 2, under which every vertex keeps a single portal per path.
    pub const TWO: Epsilon = Epsilon { num: 2, den: 1 };

    pub fn new(num: u32, den: u32) -> Result<Self, EpsilonError> {
        if num == 0 || den == 0 || num > MAX_EPS_PART || den > MAX_EPS_PART {
            return Err(EpsilonError::Range(num, den));
        }
        let g = gcd(num, den);
        Ok(Epsilon { num: num / g, den: den / g })
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn is_below_one(self) -> bool {
        self.num < self.den
    }

    /// `(1 + ε) * a < b`
    #[inline]
    pub fn scaled_lt(self, a: u64, b: u64) -> bool {
        u128::from(self.den + self.num) * u128::from(a) < u128::from(self.den) * u128::from(b)
    }

    /// `b <= (1 + ε) * a`
    #[inline]
    pub fn within(self, a: u64, b: u64) -> bool {
        u128::from(self.den) * u128::from(b) <= u128::from(self.den + self.num) * u128::from(a)
    }

    /// Largest portal count per path allowed by the `4 / (ε - ε²)` bound
    /// (z₀ included): `⌈4 / (ε - ε²)⌉` for ε < 1, and 1 for ε ≥ 1.
    pub fn max_portals_per_path(self) -> u64 {
        if !self.is_below_one() {
            return 1;
        }
        let (p, q) = (u64::from(self.num), u64::from(self.den));
        (4 * q * q).div_ceil(p * (q - p))
    }

    /// `count < 4 / (ε - ε²) + 1`, exactly.
    pub fn within_portal_bound(self, count: usize) -> bool {
        if !self.is_below_one() {
            return count <= 1;
        }
        let (p, q) = (u128::from(self.num), u128::from(self.den));
        let c = count as u128;
        c == 0 || (c - 1) * p * (q - p) < 4 * q * q
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Epsilon {
    type Err = EpsilonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || EpsilonError::Syntax(s.to_string());
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        let p: u32 = p.parse().map_err(|_| syntax())?;
        let q: u32 = q.parse().map_err(|_| syntax())?;
        Epsilon::new(p, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_reduce() {
        let e: Epsilon = "2/4".parse().unwrap();
        assert_eq!((e.num(), e.den()), (1, 2));
        assert_eq!(e.to_string(), "1/2");
        assert_eq!("2".parse::<Epsilon>(), Ok(Epsilon::TWO));
        assert!(matches!("0/3".parse::<Epsilon>(), Err(EpsilonError::Range(0, 3))));
        assert!(matches!("a/b".parse::<Epsilon>(), Err(EpsilonError::Syntax(_))));
        assert!("1/2000000".parse::<Epsilon>().is_err());
    }

    #[test]
    fn exact_comparisons() {
        let e = Epsilon::new(1, 2).unwrap();
        assert!(e.scaled_lt(2, 4)); // 3 < 4
        assert!(!e.scaled_lt(2, 3)); // 3 < 3 fails
        assert!(e.within(2, 3));
        assert!(!e.within(2, 4));
    }

    #[test]
    fn portal_bounds() {
        let half = Epsilon::new(1, 2).unwrap();
        // 4 / (1/2 - 1/4) = 16, so at most 16 portals
        assert_eq!(half.max_portals_per_path(), 16);
        assert!(half.within_portal_bound(16));
        assert!(!half.within_portal_bound(17));
        let tenth = Epsilon::new(1, 10).unwrap();
        // 4 / 0.09 = 44.4..
        assert_eq!(tenth.max_portals_per_path(), 45);
        assert!(tenth.within_portal_bound(45));
        assert!(!tenth.within_portal_bound(46));
        assert_eq!(Epsilon::TWO.max_portals_per_path(), 1);
    }
}
