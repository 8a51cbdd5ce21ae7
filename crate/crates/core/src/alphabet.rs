//! Letters: nonempty intervals of levels in `[0, N]`.
//!
//! A letter is stored as the closed set of levels it occupies, `[lo, hi]`.
//! In the open-interval notation `(l, r)` used for the operations on spaces,
//! the same letter has `l = lo - 1` and `r = hi + 1`, so the imaginary levels
//! `-1` and `N + 1` never appear at the monoid layer.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported ambient dimension. Index sets are 64-bit masks.
pub const MAX_DIM: usize = 62;

pub fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::DimensionOutOfRange(n))
    }
}

/// A nonempty interval `[lo, hi]` of levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    lo: u8,
    hi: u8,
}

impl Letter {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi || hi > MAX_DIM {
            return Err(Error::LetterOutOfRange { lo, hi, n: MAX_DIM });
        }
        Ok(Letter {
            lo: lo as u8,
            hi: hi as u8,
        })
    }

    /// Like [`Letter::new`], additionally requiring `hi <= n`.
    pub fn in_dim(lo: usize, hi: usize, n: usize) -> Result<Self> {
        if lo > hi || hi > n {
            return Err(Error::LetterOutOfRange { lo, hi, n });
        }
        Letter::new(lo, hi)
    }

    pub fn single(level: usize) -> Result<Self> {
        Letter::new(level, level)
    }

    pub fn lo(self) -> usize {
        self.lo as usize
    }

    pub fn hi(self) -> usize {
        self.hi as usize
    }

    /// Number of levels in the letter.
    pub fn size(self) -> usize {
        (self.hi - self.lo) as usize + 1
    }

    pub fn levels(self) -> std::ops::RangeInclusive<usize> {
        self.lo()..=self.hi()
    }

    pub fn as_set(self) -> IndexSet {
        IndexSet::interval(self.lo(), self.hi())
    }

    pub fn fits(self, n: usize) -> bool {
        self.hi() <= n
    }

    /// Two letters commute when their distance is at least two.
    pub fn commutes(self, other: Letter) -> bool {
        other.lo as usize >= self.hi as usize + 2 || self.lo as usize >= other.hi as usize + 2
    }

    /// `other ⊆ self`, or `other ⊊ self` when `proper` is set.
    pub fn contains(self, other: Letter, proper: bool) -> bool {
        self.lo <= other.lo && other.hi <= self.hi && !(proper && self == other)
    }

    /// The strict partial order on letters: `self` commutes with `other` and
    /// lies entirely below it.
    pub fn lt(self, other: Letter) -> bool {
        other.lo as usize >= self.hi as usize + 2
    }

    pub fn is_level_in(self, level: usize) -> bool {
        self.lo() <= level && level <= self.hi()
    }

    /// All letters properly contained in `self`, ordered by `(lo, hi)`.
    pub fn proper_subletters(self) -> Vec<Letter> {
        let mut out = Vec::new();
        for lo in self.lo..=self.hi {
            for hi in lo..=self.hi {
                let t = Letter { lo, hi };
                if t != self {
                    out.push(t);
                }
            }
        }
        out
    }

    /// Parses `"[a]"` or `"[a,b]"` and checks the letter against dimension `n`.
    pub fn parse_in(s: &str, n: usize) -> Result<Self> {
        let l: Letter = s.parse()?;
        if !l.fits(n) {
            return Err(Error::LetterOutOfRange {
                lo: l.lo(),
                hi: l.hi(),
                n,
            });
        }
        Ok(l)
    }
}

/// All letters of `[0, n]`, ordered by `(lo, hi)`.
pub fn all_letters(n: usize) -> Vec<Letter> {
    let mut out = Vec::new();
    for lo in 0..=n {
        for hi in lo..=n {
            out.push(Letter {
                lo: lo as u8,
                hi: hi as u8,
            });
        }
    }
    out
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "[{}]", self.lo)
        } else {
            write!(f, "[{},{}]", self.lo, self.hi)
        }
    }
}

fn parse_level(s: &str) -> Result<usize> {
    let bad = || Error::Parse {
        what: "letter",
        msg: format!("{s:?} is not a decimal level"),
    };
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0'))
    {
        return Err(bad());
    }
    s.parse().map_err(|_| bad())
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse {
                what: "letter",
                msg: format!("{s:?} must be of the form [a] or [a,b]"),
            })?;
        let (lo, hi) = match inner.split_once(',') {
            Some((a, b)) => (parse_level(a)?, parse_level(b)?),
            None => {
                let a = parse_level(inner)?;
                (a, a)
            }
        };
        if lo > hi {
            return Err(Error::Parse {
                what: "letter",
                msg: format!("{s:?} has lo > hi"),
            });
        }
        Letter::new(lo, hi)
    }
}

/// A subset of `[0, N]`, stored as a bit mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(u64);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn full(n: usize) -> Self {
        IndexSet::interval(0, n)
    }

    pub fn interval(lo: usize, hi: usize) -> Self {
        if lo > hi {
            return IndexSet::EMPTY;
        }
        let width = hi - lo + 1;
        let mask = if width >= 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        };
        IndexSet(mask << lo)
    }

    pub fn from_bits(bits: u64) -> Self {
        IndexSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & other.0)
    }

    pub fn difference(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn contains_letter(self, s: Letter) -> bool {
        s.as_set().is_subset(self)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }

    /// The maximal intervals of the set, in increasing order. They pairwise
    /// commute, so they form a commuting word.
    pub fn intervals(self) -> Vec<Letter> {
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        for i in 0..=64 {
            match (start, i < 64 && self.contains(i)) {
                (None, true) => start = Some(i),
                (Some(lo), false) => {
                    out.push(Letter {
                        lo: lo as u8,
                        hi: (i - 1) as u8,
                    });
                    start = None;
                }
                _ => {}
            }
        }
        out
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = IndexSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Indices of `[0, n]` commuting with every letter of `letters`.
pub fn centralizer(letters: &[Letter], n: usize) -> IndexSet {
    let mut out = IndexSet::full(n);
    for s in letters {
        out = out.intersection(letter_centralizer(*s, n));
    }
    out
}

fn letter_centralizer(s: Letter, n: usize) -> IndexSet {
    let below = if s.lo() >= 2 {
        IndexSet::interval(0, s.lo() - 2)
    } else {
        IndexSet::EMPTY
    };
    let above = if s.hi() + 2 <= n {
        IndexSet::interval(s.hi() + 2, n)
    } else {
        IndexSet::EMPTY
    };
    below.union(above)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l(s: &str) -> Letter {
        s.parse().unwrap()
    }

    #[test]
    fn commutation_examples() {
        assert!(l("[0]").commutes(l("[2,3]")));
        assert!(!l("[0,1]").commutes(l("[1,3]")));
        assert!(!l("[0,1]").commutes(l("[0,1]")));
    }

    #[test]
    fn containment_examples() {
        assert!(l("[0,1]").contains(l("[0]"), true));
        assert!(!l("[0,1]").contains(l("[0,1]"), true));
        assert!(l("[0,1]").contains(l("[0,1]"), false));
        assert!(!l("[1,3]").contains(l("[0,1]"), false));
    }

    #[test]
    fn order_examples() {
        assert!(l("[0]").lt(l("[2,3]")));
        assert!(!l("[2,3]").lt(l("[0]")));
        assert!(!l("[0,1]").lt(l("[1,3]")));
    }

    #[test]
    fn centralizer_examples() {
        assert_eq!(centralizer(&[l("[1,2]")], 3), IndexSet::EMPTY);
        assert_eq!(centralizer(&[l("[0]")], 3), [2, 3].into_iter().collect());
        assert_eq!(centralizer(&[], 3), IndexSet::full(3));
    }

    #[test]
    fn strict_parsing() {
        assert_eq!(l("[3]"), Letter::new(3, 3).unwrap());
        assert_eq!(l("[1,3]").to_string(), "[1,3]");
        for bad in [
            "[1, 3]", "[ 1]", "1", "[1,]", "[3,1]", "[01]", "[-1]", "[1,2,3]", "[a]",
        ] {
            assert!(bad.parse::<Letter>().is_err(), "{bad}");
        }
        assert!(Letter::parse_in("[2,4]", 3).is_err());
        assert!(Letter::parse_in("[2,3]", 3).is_ok());
    }

    #[test]
    fn intervals_of_sets() {
        let s: IndexSet = [0, 2, 3].into_iter().collect();
        assert_eq!(s.intervals(), vec![l("[0]"), l("[2,3]")]);
        assert_eq!(s.to_string(), "{0,2,3}");
        assert!(IndexSet::EMPTY.intervals().is_empty());
    }

    fn letter_strategy(n: usize) -> impl Strategy<Value = Letter> {
        (0..=n)
            .prop_flat_map(move |lo| (Just(lo), lo..=n))
            .prop_map(|(lo, hi)| Letter::new(lo, hi).unwrap())
    }

    proptest! {
        #[test]
        fn commutation_is_symmetric_irreflexive(s in letter_strategy(5), t in letter_strategy(5)) {
            prop_assert_eq!(s.commutes(t), t.commutes(s));
            prop_assert!(!s.commutes(s));
            if s.lt(t) {
                prop_assert!(s.commutes(t));
            }
            prop_assert!(!(s.lt(t) && t.lt(s)));
            prop_assert_eq!(s.commutes(t), s.lt(t) || t.lt(s));
            if s.contains(t, false) && t.contains(s, false) {
                prop_assert_eq!(s, t);
            }
            if s.contains(t, false) {
                prop_assert!(!s.commutes(t));
            }
        }

        #[test]
        fn centralizer_of_concatenation(
            u in proptest::collection::vec(letter_strategy(4), 0..4),
            v in proptest::collection::vec(letter_strategy(4), 0..4),
        ) {
            let mut uv = u.clone();
            uv.extend(&v);
            prop_assert_eq!(centralizer(&uv, 4), centralizer(&u, 4).intersection(centralizer(&v, 4)));
            // a letter commutes with u iff it sits inside the centralizer
            for s in all_letters(4) {
                let all = u.iter().all(|t| t.commutes(s));
                prop_assert_eq!(all, centralizer(&u, 4).contains_letter(s));
            }
        }
    }
}
