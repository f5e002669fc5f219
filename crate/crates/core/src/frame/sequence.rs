//! Integer translation sequences `λ_1, λ_2, …`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TranslationSequence {
    /// `λ_n = n`.
    Integers,
    /// `λ_n = 3^n` (available up to `n = 39`).
    PowersOfThree,
    /// `λ_n = scale·(2P(n-1) + ((n-1)^2 mod P))` for prime `P`, `n ≤ P`.
    /// All pairwise differences are distinct, so translates never collide.
    Sidon { prime: u64, scale: u64 },
    /// A user-supplied list; `unbounded` states whether it stands for an
    /// unbounded sequence that merely has been truncated.
    Explicit { values: Vec<i64>, unbounded: bool },
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl TranslationSequence {
    pub fn sidon(prime: u64, scale: u64) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::InvalidArgument(format!("{prime} is not prime")));
        }
        if scale == 0 {
            return Err(Error::InvalidArgument("Sidon scale must be positive".into()));
        }
        let top = (2 * prime as u128 * prime as u128) * scale as u128;
        if top > i64::MAX as u128 / 4 {
            return Err(Error::Overflow(format!("Sidon sequence with P={prime}, W={scale} exceeds 64 bits")));
        }
        Ok(TranslationSequence::Sidon { prime, scale })
    }

    /// Smallest prime `P ≥ count`, so that a Sidon sequence has `count` terms.
    pub fn sidon_for(count: usize, scale: u64) -> Result<Self> {
        let mut p = (count as u64).max(2);
        while !is_prime(p) {
            p += 1;
        }
        TranslationSequence::sidon(p, scale)
    }

    pub fn is_unbounded(&self) -> bool {
        match self {
            TranslationSequence::Explicit { unbounded, .. } => *unbounded,
            _ => true,
        }
    }

    /// Number of available terms, `None` when effectively unlimited.
    pub fn len(&self) -> Option<u64> {
        match self {
            TranslationSequence::Integers => None,
            TranslationSequence::PowersOfThree => Some(39),
            TranslationSequence::Sidon { prime, .. } => Some(*prime),
            TranslationSequence::Explicit { values, .. } => Some(values.len() as u64),
        }
    }

    /// `λ_n` for 1-based `n`; `None` past the end.
    pub fn value(&self, n: u64) -> Option<i64> {
        if n == 0 {
            return None;
        }
        match self {
            TranslationSequence::Integers => i64::try_from(n).ok(),
            TranslationSequence::PowersOfThree => (n <= 39).then(|| 3i64.pow(n as u32)),
            TranslationSequence::Sidon { prime, scale } => {
                if n > *prime {
                    return None;
                }
                let m = n - 1;
                let base = 2 * prime * m + (m * m) % prime;
                Some((base * scale) as i64)
            }
            TranslationSequence::Explicit { values, .. } => values.get(n as usize - 1).copied(),
        }
    }

    /// Smallest gap `|λ_a − λ_b|` among the first `count` terms.
    pub fn separation(&self, count: u64) -> Option<i64> {
        let mut vals: Vec<i64> = (1..=count).map_while(|n| self.value(n)).collect();
        vals.sort_unstable();
        vals.windows(2).map(|w| w[1] - w[0]).min()
    }

    pub(crate) fn check_usable(&self) -> Result<()> {
        if self.is_unbounded() {
            Ok(())
        } else {
            Err(Error::BoundedSequence(format!(
                "the explicit list {self} is marked bounded; index selection needs arbitrarily large translations"
            )))
        }
    }
}

impl fmt::Display for TranslationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslationSequence::Integers => write!(f, "integers"),
            TranslationSequence::PowersOfThree => write!(f, "powers3"),
            TranslationSequence::Sidon { prime, scale } => write!(f, "sidon:{prime}:{scale}"),
            TranslationSequence::Explicit { values, unbounded } => {
                let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                let tag = if *unbounded { "list+" } else { "list" };
                write!(f, "{tag}:{}", list.join(","))
            }
        }
    }
}

/// `integers`, `powers3`, `sidon:P:W`, `list:1,5,9` (bounded) or `list+:1,5,9`
/// (prefix of an unbounded sequence).
impl FromStr for TranslationSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |m: &str| Error::InvalidArgument(format!("translation sequence {s:?}: {m}"));
        match s {
            "integers" => return Ok(TranslationSequence::Integers),
            "powers3" => return Ok(TranslationSequence::PowersOfThree),
            _ => {}
        }
        let (head, rest) = s.split_once(':').ok_or_else(|| bad("unknown descriptor"))?;
        match head {
            "sidon" => {
                let (p, w) = rest.split_once(':').ok_or_else(|| bad("expected sidon:P:W"))?;
                let p = p.parse().map_err(|_| bad("bad prime"))?;
                let w = w.parse().map_err(|_| bad("bad scale"))?;
                TranslationSequence::sidon(p, w)
            }
            "list" | "list+" => {
                let values = rest
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| t.trim().parse::<i64>().map_err(|_| bad("bad list entry")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TranslationSequence::Explicit {
                    values,
                    unbounded: head == "list+",
                })
            }
            _ => Err(bad("unknown descriptor")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn values() {
        assert_eq!(TranslationSequence::Integers.value(7), Some(7));
        assert_eq!(TranslationSequence::PowersOfThree.value(2), Some(9));
        assert_eq!(TranslationSequence::PowersOfThree.value(40), None);
    }

    #[test]
    fn sidon_differences_distinct() {
        let s = TranslationSequence::sidon(31, 3).unwrap();
        let vals: Vec<i64> = (1..=31).map(|n| s.value(n).unwrap()).collect();
        let mut seen = HashSet::new();
        for (a, x) in vals.iter().enumerate() {
            for (b, y) in vals.iter().enumerate() {
                if a != b {
                    assert!(seen.insert(x - y), "repeated difference {}", x - y);
                }
            }
        }
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
        assert!(TranslationSequence::sidon(32, 1).is_err());
    }

    #[test]
    fn parse_round_trip() {
        for s in ["integers", "powers3", "sidon:31:3", "list:1,4,9", "list+:2,5"] {
            let t: TranslationSequence = s.parse().unwrap();
            assert_eq!(t.to_string(), s);
        }
        let bounded: TranslationSequence = "list:1,2".parse().unwrap();
        assert!(matches!(bounded.check_usable(), Err(Error::BoundedSequence(_))));
    }

    #[test]
    fn separation_of_integers() {
        assert_eq!(TranslationSequence::Integers.separation(10), Some(1));
    }
}
