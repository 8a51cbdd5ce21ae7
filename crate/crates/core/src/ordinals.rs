//! Ordinals below `ω^ω` in Cantor normal form.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ω^e1·c1 + ω^e2·c2 + …` with `e1 > e2 > …` and every `ci ≥ 1`.
/// The empty term list is `0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CnfOrdinal {
    terms: Vec<(u32, u64)>,
}

impl CnfOrdinal {
    pub fn zero() -> Self {
        CnfOrdinal { terms: Vec::new() }
    }

    pub fn finite(c: u64) -> Self {
        CnfOrdinal::omega_pow(0, c)
    }

    /// `ω^exp · coeff`.
    pub fn omega_pow(exp: u32, coeff: u64) -> Self {
        if coeff == 0 {
            return CnfOrdinal::zero();
        }
        CnfOrdinal {
            terms: vec![(exp, coeff)],
        }
    }

    /// Builds an ordinal from terms, rejecting non-canonical input.
    pub fn from_terms(terms: Vec<(u32, u64)>) -> Result<Self> {
        if terms.iter().any(|&(_, c)| c == 0) {
            return Err(Error::Parse {
                what: "ordinal",
                msg: "zero coefficient".into(),
            });
        }
        if terms.windows(2).any(|w| w[0].0 <= w[1].0) {
            return Err(Error::Parse {
                what: "ordinal",
                msg: "exponents must be strictly decreasing".into(),
            });
        }
        Ok(CnfOrdinal { terms })
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_exponent(&self) -> Option<u32> {
        self.terms.first().map(|t| t.0)
    }

    /// Ordinal sum `self + other`. Terms of `self` below the leading exponent
    /// of `other` are absorbed.
    pub fn add(&self, other: &CnfOrdinal) -> CnfOrdinal {
        let Some(lead) = other.leading_exponent() else {
            return self.clone();
        };
        let mut terms: Vec<(u32, u64)> =
            self.terms.iter().copied().filter(|t| t.0 >= lead).collect();
        let mut rest = other.terms.iter().copied();
        if let Some(last) = terms.last_mut() {
            if last.0 == lead {
                last.1 += other.terms[0].1;
                rest.next();
            }
        }
        terms.extend(rest);
        CnfOrdinal { terms }
    }
}

impl Ord for CnfOrdinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let o = a.0.cmp(&b.0).then(a.1.cmp(&b.1));
            if o != Ordering::Equal {
                return o;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for CnfOrdinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn cnf_cmp(a: &CnfOrdinal, b: &CnfOrdinal) -> Ordering {
    a.cmp(b)
}

pub fn cnf_add(a: &CnfOrdinal, b: &CnfOrdinal) -> CnfOrdinal {
    a.add(b)
}

impl std::iter::Sum for CnfOrdinal {
    fn sum<I: Iterator<Item = CnfOrdinal>>(iter: I) -> Self {
        iter.fold(CnfOrdinal::zero(), |acc, x| acc.add(&x))
    }
}

impl fmt::Display for CnfOrdinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, &(e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, "+")?;
            }
            match (e, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "w")?,
                (1, c) => write!(f, "w*{c}")?,
                (e, 1) => write!(f, "w^{e}")?,
                (e, c) => write!(f, "w^{e}*{c}")?,
            }
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse {
            what: "ordinal",
            msg: format!("{s:?} is not a natural number"),
        });
    }
    s.parse().map_err(|_| Error::Parse {
        what: "ordinal",
        msg: format!("{s:?} is out of range"),
    })
}

fn parse_term(s: &str) -> Result<CnfOrdinal> {
    let (base, coeff) = match s.split_once('*') {
        Some((b, c)) => (b, parse_num::<u64>(c)?),
        None => (s, 1),
    };
    let exp = if let Some(rest) = base.strip_prefix('w') {
        if rest.is_empty() {
            1
        } else if let Some(e) = rest.strip_prefix('^') {
            parse_num::<u32>(e)?
        } else {
            return Err(Error::Parse {
                what: "ordinal",
                msg: format!("bad term {s:?}"),
            });
        }
    } else {
        if s.contains('*') {
            return Err(Error::Parse {
                what: "ordinal",
                msg: format!("bad term {s:?}"),
            });
        }
        return Ok(CnfOrdinal::finite(parse_num(s)?));
    };
    if coeff == 0 {
        return Err(Error::Parse {
            what: "ordinal",
            msg: format!("zero coefficient in {s:?}"),
        });
    }
    Ok(CnfOrdinal::omega_pow(exp, coeff))
}

impl FromStr for CnfOrdinal {
    type Err = Error;

    /// Accepts `w^k*c`, `w^k`, `w*c`, `w` and naturals joined by `+`, read
    /// as an ordinal sum, so non-canonical input is normalised.
    fn from_str(s: &str) -> Result<Self> {
        s.split('+').map(parse_term).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn o(s: &str) -> CnfOrdinal {
        s.parse().unwrap()
    }

    #[test]
    fn comparison_examples() {
        assert_eq!(cnf_cmp(&o("w^2"), &o("w^2+w")), Ordering::Less);
        assert_eq!(cnf_cmp(&o("w*3"), &o("w*3")), Ordering::Equal);
        assert_eq!(cnf_cmp(&o("w^2"), &o("w*100")), Ordering::Greater);
    }

    #[test]
    fn addition_examples() {
        assert_eq!(cnf_add(&o("w+1"), &o("w^2")), o("w^2"));
        assert_eq!(cnf_add(&o("w^2"), &o("w")), o("w^2+w"));
        assert_eq!(cnf_add(&o("0"), &o("w+5")), o("w+5"));
        assert_eq!(cnf_add(&o("w*2+3"), &o("w+1")), o("w*3+1"));
    }

    #[test]
    fn printing() {
        assert_eq!(o("w^2+w^1*1+w^0*3").to_string(), "w^2+w+3");
        assert_eq!(CnfOrdinal::zero().to_string(), "0");
        assert_eq!(CnfOrdinal::omega_pow(3, 4).to_string(), "w^3*4");
        assert_eq!(CnfOrdinal::omega_pow(1, 4).to_string(), "w*4");
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "w^", "x", "w*0", "1+", "w^-1", "3*w", "w^2*"] {
            assert!(bad.parse::<CnfOrdinal>().is_err(), "{bad}");
        }
        assert!(CnfOrdinal::from_terms(vec![(1, 1), (1, 2)]).is_err());
        assert!(CnfOrdinal::from_terms(vec![(1, 0)]).is_err());
    }

    fn ordinal() -> impl Strategy<Value = CnfOrdinal> {
        proptest::collection::btree_map(0u32..5, 1u64..5, 0..4)
            .prop_map(|m| CnfOrdinal::from_terms(m.into_iter().rev().collect()).unwrap())
    }

    proptest! {
        #[test]
        fn addition_is_associative(a in ordinal(), b in ordinal(), c in ordinal()) {
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        }

        #[test]
        fn addition_is_monotone(a in ordinal(), b in ordinal()) {
            let s = a.add(&b);
            prop_assert!(s >= b);
            prop_assert!(s >= a);
            prop_assert_eq!(CnfOrdinal::zero().add(&a), a.clone());
            prop_assert_eq!(a.add(&CnfOrdinal::zero()), a);
        }

        #[test]
        fn display_round_trips(a in ordinal()) {
            prop_assert_eq!(a.to_string().parse::<CnfOrdinal>().unwrap(), a);
        }

        #[test]
        fn order_is_total_and_antisymmetric(a in ordinal(), b in ordinal()) {
            prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
            prop_assert_eq!(a.cmp(&b) == Ordering::Equal, a == b);
        }
    }
}
