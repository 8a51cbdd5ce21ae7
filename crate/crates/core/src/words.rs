//! Words over the interval alphabet and the monoid they generate.
//!
//! Two letters commute when they are at distance at least two, and a letter
//! absorbs every subletter that commutes its way next to it. Cancellation is
//! non-strict: `s·s = s`, so a letter also absorbs an equal letter.
//!
//! Operations that produce a monoid element return it in normal form, so two
//! elements are equal exactly when their printed forms are equal.
//!
//! `prec` is the one-step replacement relation, not its transitive closure.
//! The relation is already transitive and well-founded, so no closure is
//! computed.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::alphabet::{centralizer, check_dim, IndexSet, Letter};
use crate::error::{Error, Result};
use crate::ordinals::CnfOrdinal;

/// Default cap on `len(u) + len(v)` for [`Word::prec`].
pub const DEFAULT_PREC_CAP: usize = 12;
/// Default bound on the length of splitting products.
pub const DEFAULT_SPLIT_LEN: usize = 3;
/// Default budget of rewrite applications for strong-reduct exploration.
pub const DEFAULT_MAX_STEPS: usize = 50_000;

/// A finite sequence of letters of `[0, N]`. The empty word prints as `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    n: usize,
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>, n: usize) -> Result<Self> {
        check_dim(n)?;
        if let Some(s) = letters.iter().find(|s| !s.fits(n)) {
            return Err(Error::LetterOutOfRange {
                lo: s.lo(),
                hi: s.hi(),
                n,
            });
        }
        Ok(Word { n, letters })
    }

    pub fn empty(n: usize) -> Self {
        Word {
            n,
            letters: Vec::new(),
        }
    }

    pub fn letter(s: Letter, n: usize) -> Result<Self> {
        Word::new(vec![s], n)
    }

    /// Parses `"1"` or letters joined by `"."`, e.g. `"[0,1].[1,3]"`.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        check_dim(n)?;
        if s == "1" {
            return Ok(Word::empty(n));
        }
        let letters = s
            .split('.')
            .map(|part| Letter::parse_in(part, n))
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters, n)
    }

    /// Builds a word from letters already known to fit.
    pub(crate) fn raw(letters: Vec<Letter>, n: usize) -> Self {
        Word { n, letters }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn same_dim(&self, other: &Word) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Plain concatenation, no reduction.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        self.same_dim(other)?;
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Word::raw(letters, self.n))
    }

    /// Letter sequence reversed.
    pub fn inverse(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word::raw(letters, self.n)
    }

    pub fn support(&self) -> IndexSet {
        self.letters
            .iter()
            .fold(IndexSet::EMPTY, |acc, s| acc.union(s.as_set()))
    }

    /// All letters pairwise commute.
    pub fn is_commuting(&self) -> bool {
        let l = &self.letters;
        (0..l.len()).all(|i| (i + 1..l.len()).all(|j| l[i].commutes(l[j])))
    }

    /// Every pair `(i, j)`, `i != j`, where letter `i` is contained in letter
    /// `j` and commutes with everything strictly between them. Deleting
    /// position `i` is a generalised cancellation.
    pub fn cancellations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            out.extend(self.absorbers_of_position(i).map(|j| (i, j)));
        }
        out
    }

    fn absorbers_of_position(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let s = self.letters[i];
        let right = self.letters[i + 1..]
            .iter()
            .enumerate()
            .scan(true, move |open, (k, t)| {
                if !*open {
                    return None;
                }
                let hit = t.contains(s, false);
                *open = s.commutes(*t);
                Some((i + 1 + k, hit))
            });
        let left = self.letters[..i]
            .iter()
            .enumerate()
            .rev()
            .scan(true, move |open, (k, t)| {
                if !*open {
                    return None;
                }
                let hit = t.contains(s, false);
                *open = s.commutes(*t);
                Some((k, hit))
            });
        right.chain(left).filter(|p| p.1).map(|p| p.0)
    }

    /// The first cancellation in deterministic order: leftmost deletable
    /// position, paired with its nearest absorbing position.
    fn first_cancellation(&self) -> Option<(usize, usize)> {
        (0..self.len()).find_map(|i| {
            self.absorbers_of_position(i)
                .min_by_key(|&j| j.abs_diff(i))
                .map(|j| (i, j))
        })
    }

    pub fn is_reduced(&self) -> bool {
        self.first_cancellation().is_none()
    }

    fn without(&self, i: usize) -> Word {
        let mut letters = self.letters.clone();
        letters.remove(i);
        Word::raw(letters, self.n)
    }

    /// Applies generalised cancellations until none is left, then returns
    /// the normal form.
    pub fn reduce(&self) -> Word {
        let mut w = self.clone();
        while let Some((i, _)) = w.first_cancellation() {
            w = w.without(i);
        }
        w.normal_form()
    }

    /// Reduction driven by a caller-chosen strategy: `pick` receives the
    /// available cancellations and returns the index of the one to apply.
    pub fn reduce_with<F>(&self, mut pick: F) -> Word
    where
        F: FnMut(&[(usize, usize)]) -> usize,
    {
        let mut w = self.clone();
        loop {
            let c = w.cancellations();
            if c.is_empty() {
                return w.normal_form();
            }
            let (i, _) = c[pick(&c)];
            w = w.without(i);
        }
    }

    /// The commutation representative in which every adjacent commuting pair
    /// is increasing. Reduction is not applied.
    pub fn normal_form(&self) -> Word {
        let mut l = self.letters.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for k in 0..l.len().saturating_sub(1) {
                if l[k + 1].lt(l[k]) {
                    l.swap(k, k + 1);
                    changed = true;
                }
            }
        }
        Word::raw(l, self.n)
    }

    pub fn is_normal(&self) -> bool {
        self.letters.windows(2).all(|w| !w[1].lt(w[0]))
    }

    pub fn equivalent(&self, other: &Word) -> bool {
        self.n == other.n && self.normal_form().letters == other.normal_form().letters
    }

    /// Splits off the letters commuting with everything after them. Returns
    /// `(remainder, segment)`, both in original order.
    pub fn final_segment(&self) -> (Word, Word) {
        let l = &self.letters;
        let (seg, rest): (Vec<usize>, Vec<usize>) =
            (0..l.len()).partition(|&i| l[i + 1..].iter().all(|t| l[i].commutes(*t)));
        (
            Word::raw(rest.iter().map(|&i| l[i]).collect(), self.n),
            Word::raw(seg.iter().map(|&i| l[i]).collect(), self.n),
        )
    }

    /// Levels absorbed from the left: the union over `j` of
    /// `t_j ∩ Cent(t_1 … t_{j-1})`.
    pub fn left_stabilizer(&self) -> IndexSet {
        let mut out = IndexSet::EMPTY;
        for (j, t) in self.letters.iter().enumerate() {
            let cent = centralizer(&self.letters[..j], self.n);
            out = out.union(t.as_set().intersection(cent));
        }
        out
    }

    pub fn right_stabilizer(&self) -> IndexSet {
        self.inverse().left_stabilizer()
    }

    /// `self` left-absorbs `u`.
    pub fn absorbs_left(&self, u: &Word) -> bool {
        u.support().is_subset(self.left_stabilizer())
    }

    /// `self` right-absorbs `u`.
    pub fn absorbs_right(&self, u: &Word) -> bool {
        u.support().is_subset(self.right_stabilizer())
    }

    /// Position of the unique letter of `self` absorbing `s` from the left.
    pub fn left_absorber(&self, s: Letter) -> Option<usize> {
        for (j, t) in self.letters.iter().enumerate() {
            if t.contains(s, false) {
                return Some(j);
            }
            if !s.commutes(*t) {
                return None;
            }
        }
        None
    }

    pub fn right_absorber(&self, s: Letter) -> Option<usize> {
        for (j, t) in self.letters.iter().enumerate().rev() {
            if t.contains(s, false) {
                return Some(j);
            }
            if !s.commutes(*t) {
                return None;
            }
        }
        None
    }

    /// Every letter of `u` is left-absorbed by a letter of `self` different
    /// from it.
    pub fn properly_absorbs_left(&self, u: &Word) -> bool {
        u.letters
            .iter()
            .all(|s| matches!(self.left_absorber(*s), Some(j) if self.letters[j] != *s))
    }

    pub fn properly_absorbs_right(&self, u: &Word) -> bool {
        u.letters
            .iter()
            .all(|s| matches!(self.right_absorber(*s), Some(j) if self.letters[j] != *s))
    }

    /// `u ≈ u1·u2` where `u2` lies inside `set` and `u1` has no final-segment
    /// letter inside `set`. With `set = sL(v)` this is the part of `u`
    /// absorbed by `v`.
    pub fn split_absorbed(&self, set: IndexSet) -> (Word, Word) {
        let mut rest = self.letters.clone();
        let mut tail = VecDeque::new();
        loop {
            let pick = (0..rest.len()).rev().find(|&i| {
                set.contains_letter(rest[i]) && rest[i + 1..].iter().all(|t| rest[i].commutes(*t))
            });
            match pick {
                Some(i) => tail.push_front(rest.remove(i)),
                None => break,
            }
        }
        (
            Word::raw(rest, self.n).normal_form(),
            Word::raw(tail.into(), self.n).normal_form(),
        )
    }

    /// `reduce(self ++ other)`.
    pub fn concat_reduce(&self, other: &Word) -> Result<Word> {
        Ok(self.concat(other)?.reduce())
    }

    /// `sr(self) ∩ sL(other)`.
    pub fn wobbling(&self, other: &Word) -> IndexSet {
        self.right_stabilizer()
            .intersection(other.left_stabilizer())
    }

    /// `ord = Σ ω^(|s|-1)` over the letters, largest sizes first.
    pub fn ord_rank(&self) -> CnfOrdinal {
        let counts = size_counts(&self.letters);
        let terms = counts
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k as u32, c))
            .collect();
        CnfOrdinal::from_terms(terms).expect("counts are canonical")
    }

    /// The rank `ω^(|s_1|-1) + … + ω^(|s_n|-1)` of a reduced word admitting a
    /// representative with non-increasing letter sizes.
    pub fn rd_closed_form(&self) -> Result<CnfOrdinal> {
        if !self.is_reduced() {
            return Err(Error::NotReduced(self.to_string()));
        }
        if self.monotone_representative().is_none() {
            return Err(Error::NotMonotone(self.to_string()));
        }
        Ok(self.ord_rank())
    }

    /// An equivalent word whose letter sizes never increase, if one exists.
    pub fn monotone_representative(&self) -> Option<Word> {
        let mut rest = self.letters.clone();
        let mut out = Vec::with_capacity(rest.len());
        while !rest.is_empty() {
            let free = (0..rest.len()).filter(|&p| rest[..p].iter().all(|q| q.commutes(rest[p])));
            let p = free.max_by_key(|&p| (rest[p].size(), std::cmp::Reverse(p)))?;
            if out
                .last()
                .is_some_and(|l: &Letter| l.size() < rest[p].size())
            {
                return None;
            }
            out.push(rest.remove(p));
        }
        Some(Word::raw(out, self.n))
    }

    /// `self ≺ v` with the default search cap.
    pub fn prec(&self, v: &Word) -> Result<bool> {
        self.prec_with_cap(v, DEFAULT_PREC_CAP)
    }

    /// `self ≺ v`: some permutation of `self` arises from `v` by replacing at
    /// least one letter by a (possibly empty) product of proper subletters.
    /// Decided by exhaustive backtracking; instances with
    /// `len(self) + len(v) > cap` are refused.
    pub fn prec_with_cap(&self, v: &Word, cap: usize) -> Result<bool> {
        self.same_dim(v)?;
        let size = self.len() + v.len();
        if size > cap || self.len() > 64 {
            return Err(Error::SearchBoundExceeded { size, cap });
        }
        if self.ord_rank() >= v.ord_rank() {
            return Ok(false);
        }
        let mut search = PrecSearch {
            u: &self.letters,
            v: &v.letters,
            memo: HashMap::new(),
        };
        let full = if self.is_empty() {
            0
        } else {
            u64::MAX >> (64 - self.len())
        };
        Ok(search.run(0, full, false))
    }

    /// `self ≺ v` or `self ≈ v`.
    pub fn preceq_with_cap(&self, v: &Word, cap: usize) -> Result<bool> {
        if self.equivalent(v) {
            return Ok(true);
        }
        self.prec_with_cap(v, cap)
    }

    /// Reduced words reachable by cancellation, commutation and bounded
    /// splitting. Fails if the step budget runs out before the search space
    /// is exhausted.
    pub fn strong_reducts_bounded(
        &self,
        max_split_len: usize,
        max_steps: usize,
    ) -> Result<Vec<Word>> {
        let ex = self.explore_strong_reducts(max_split_len, max_steps);
        if ex.exhausted {
            return Err(Error::StepBudgetExhausted { budget: max_steps });
        }
        Ok(ex.reducts)
    }

    /// Like [`Word::strong_reducts_bounded`] but returns what was found even
    /// when the budget ran out. Every returned word is a strong reduct.
    pub fn explore_strong_reducts(
        &self,
        max_split_len: usize,
        max_steps: usize,
    ) -> StrongExploration {
        let mut products: HashMap<Letter, Vec<Vec<Letter>>> = HashMap::new();
        let start = self.normal_form();
        let mut seen: HashSet<Vec<Letter>> = HashSet::from([start.letters.clone()]);
        let mut queue = VecDeque::from([start]);
        let mut reducts = BTreeSet::new();
        let mut steps = 0usize;
        let mut exhausted = false;

        'bfs: while let Some(w) = queue.pop_front() {
            let cancels = w.cancellations();
            if cancels.is_empty() {
                reducts.insert(w);
                continue;
            }
            let mut next: Vec<Vec<Letter>> = Vec::new();
            for &(i, j) in &cancels {
                let mut l = w.letters.clone();
                l.remove(i);
                next.push(l);
                if w.letters[i] == w.letters[j] {
                    let s = w.letters[i];
                    let reps = products
                        .entry(s)
                        .or_insert_with(|| splitting_products(s, max_split_len, w.n));
                    // delete position i, put the product where j was
                    for rep in reps.iter() {
                        let mut l = Vec::with_capacity(w.len() + rep.len());
                        for (k, &t) in w.letters.iter().enumerate() {
                            if k == j {
                                l.extend_from_slice(rep);
                            } else if k != i {
                                l.push(t);
                            }
                        }
                        next.push(l);
                    }
                }
            }
            for l in next {
                steps += 1;
                if steps > max_steps {
                    exhausted = true;
                    break 'bfs;
                }
                let nf = Word::raw(l, w.n).normal_form();
                if seen.insert(nf.letters.clone()) {
                    queue.push_back(nf);
                }
            }
        }
        StrongExploration {
            reducts: reducts.into_iter().collect(),
            exhausted,
            steps: steps.min(max_steps),
        }
    }

    /// A reduced `w` of length at most `max_len` with `self·w ≈ v` in the
    /// monoid. `Ok(None)` means no such `w` exists at any length: every
    /// branch was pruned. `BoundExhausted` means the bound was reached
    /// before the search closed.
    pub fn divides_left_bounded(&self, v: &Word, max_len: usize) -> Result<Option<Word>> {
        self.same_dim(v)?;
        for w in [self, v] {
            if !w.is_reduced() {
                return Err(Error::NotReduced(w.to_string()));
            }
        }
        let target = v.normal_form();
        let alphabet: Vec<Letter> = crate::alphabet::all_letters(self.n)
            .into_iter()
            .filter(|s| v.support().contains_letter(*s))
            .collect();
        let prec_cap = DIVIDES_PREC_CAP.max(target.len() * 2 + 2);
        let viable = |p: &Word| -> bool {
            p.equivalent(&target) || matches!(p.prec_with_cap(&target, prec_cap), Ok(true))
        };

        let start = self.normal_form();
        if start.letters == target.letters {
            return Ok(Some(Word::empty(self.n)));
        }
        if !viable(&start) {
            return Ok(None);
        }
        let mut seen: HashSet<Vec<Letter>> = HashSet::from([start.letters.clone()]);
        let mut frontier = vec![Word::empty(self.n)];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for &s in &alphabet {
                    let mut l = w.letters.clone();
                    l.push(s);
                    let w2 = Word::raw(l, self.n).reduce();
                    let product = self.concat(&w2)?.reduce();
                    if product.letters == target.letters {
                        return Ok(Some(w2));
                    }
                    if seen.contains(&product.letters) || !viable(&product) {
                        continue;
                    }
                    seen.insert(product.letters);
                    next.push(w2);
                }
            }
            if next.is_empty() {
                return Ok(None);
            }
            frontier = next;
        }
        Err(Error::BoundExhausted { bound: max_len })
    }

    /// Default bound `len(v) + 4`.
    pub fn divides_left(&self, v: &Word) -> Result<Option<Word>> {
        self.divides_left_bounded(v, v.len() + 4)
    }

    pub fn decompose_fine(&self, v: &Word) -> Result<FineDecomposition> {
        let u = self;
        u.same_dim(v)?;
        for w in [u, v] {
            if !w.is_reduced() {
                return Err(Error::NotReduced(w.to_string()));
            }
        }
        let (u1, u_prime) = u.split_absorbed(v.left_stabilizer());
        let (a, b) = v.inverse().split_absorbed(u1.right_stabilizer());
        let v_prime = b.inverse().normal_form();
        let v1 = a.inverse().normal_form();
        let reduct = u1.concat(&v1)?.normal_form();
        Ok(FineDecomposition {
            u1,
            u_prime,
            w: Word::empty(u.n),
            v_prime,
            v1,
            reduct,
        })
    }

    pub fn decompose_symmetric(&self, v: &Word) -> Result<FineDecomposition> {
        let fine = self.decompose_fine(v)?;
        let bar_v1 = &fine.v1;
        let mut w = Vec::new();
        let mut u_prime = Vec::new();
        let mut dropped = Vec::new();
        for &s in fine.u_prime.letters() {
            match bar_v1.left_absorber(s) {
                Some(j) if bar_v1.letters[j] == s => {
                    w.push(s);
                    dropped.push(j);
                }
                _ => u_prime.push(s),
            }
        }
        let v1: Vec<Letter> = bar_v1
            .letters
            .iter()
            .enumerate()
            .filter(|(j, _)| !dropped.contains(j))
            .map(|(_, s)| *s)
            .collect();
        let n = self.n;
        let w = Word::raw(w, n).normal_form();
        let v1 = Word::raw(v1, n).normal_form();
        let reduct = fine.u1.concat(&w)?.concat(&v1)?.normal_form();
        Ok(FineDecomposition {
            u1: fine.u1,
            u_prime: Word::raw(u_prime, n).normal_form(),
            w,
            v_prime: fine.v_prime,
            v1,
            reduct,
        })
    }
}

/// Combined-length cap used for the pruning test inside divisor search.
const DIVIDES_PREC_CAP: usize = 20;

fn size_counts(letters: &[Letter]) -> Vec<u64> {
    let mut counts = vec![0u64; crate::alphabet::MAX_DIM + 1];
    for s in letters {
        counts[s.size() - 1] += 1;
    }
    counts
}

/// Reduced normal-form products of at most `max_len` proper subletters of
/// `s`, the empty product included.
fn splitting_products(s: Letter, max_len: usize, n: usize) -> Vec<Vec<Letter>> {
    let subs = s.proper_subletters();
    let mut out: BTreeSet<Vec<Letter>> = BTreeSet::from([Vec::new()]);
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for p in &layer {
            for &t in &subs {
                let mut q = p.clone();
                q.push(t);
                let w = Word::raw(q.clone(), n);
                if w.is_reduced() && out.insert(w.normal_form().letters) {
                    next.push(q);
                }
            }
        }
        layer = next;
    }
    out.into_iter().collect()
}

struct PrecSearch<'a> {
    u: &'a [Letter],
    v: &'a [Letter],
    memo: HashMap<(usize, u64, bool), bool>,
}

impl PrecSearch<'_> {
    fn run(&mut self, i: usize, rem: u64, replaced: bool) -> bool {
        if i == self.v.len() {
            return rem == 0 && replaced;
        }
        if let Some(&r) = self.memo.get(&(i, rem, replaced)) {
            return r;
        }
        let r = self.step(i, rem, replaced);
        self.memo.insert((i, rem, replaced), r);
        r
    }

    fn positions(&self, rem: u64) -> Vec<usize> {
        (0..self.u.len()).filter(|p| rem >> p & 1 == 1).collect()
    }

    fn step(&mut self, i: usize, rem: u64, replaced: bool) -> bool {
        let t = self.v[i];
        let pos = self.positions(rem);
        let rem_letters: Vec<Letter> = pos.iter().map(|&p| self.u[p]).collect();
        if rank_counts_gt(&rem_letters, &self.v[i..]) {
            return false;
        }
        // keep t: its first occurrence must be a minimal element
        if let Some(k) = pos.iter().position(|&p| self.u[p] == t) {
            let p = pos[k];
            if pos[..k].iter().all(|&q| self.u[q].commutes(t))
                && self.run(i + 1, rem & !(1 << p), replaced)
            {
                return true;
            }
        }
        // replace t by a downset of the remaining trace made of proper subletters
        let mut blocks = Vec::new();
        self.downsets(&pos, 0, 0, t, &mut blocks);
        blocks.into_iter().any(|d| self.run(i + 1, rem & !d, true))
    }

    fn downsets(&self, pos: &[usize], k: usize, chosen: u64, t: Letter, out: &mut Vec<u64>) {
        if k == pos.len() {
            out.push(chosen);
            return;
        }
        let p = pos[k];
        let s = self.u[p];
        self.downsets(pos, k + 1, chosen, t, out);
        let deps_in = pos[..k]
            .iter()
            .all(|&q| s.commutes(self.u[q]) || chosen >> q & 1 == 1);
        if t.contains(s, true) && deps_in {
            self.downsets(pos, k + 1, chosen | 1 << p, t, out);
        }
    }
}

/// `ord(a) > ord(b)` on letter multisets.
fn rank_counts_gt(a: &[Letter], b: &[Letter]) -> bool {
    let (ca, cb) = (size_counts(a), size_counts(b));
    for k in (0..ca.len()).rev() {
        if ca[k] != cb[k] {
            return ca[k] > cb[k];
        }
    }
    false
}

/// Output of [`Word::explore_strong_reducts`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongExploration {
    /// Strong reducts found, in normal form, sorted.
    pub reducts: Vec<Word>,
    /// The budget ran out before every reachable state was expanded.
    pub exhausted: bool,
    pub steps: usize,
}

/// Parts of a product `u·v` of reduced words. In the fine form `u ≈ u1·u'`,
/// `v ≈ v'·v1` and `w` is empty; in the symmetric form `u ≈ u1·u'·w` and
/// `v ≈ w·v'·v1`. `reduct` is the reduct of `u·v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FineDecomposition {
    pub u1: Word,
    pub u_prime: Word,
    pub w: Word,
    pub v_prime: Word,
    pub v1: Word,
    pub reduct: Word,
}

fn commute_words(a: &Word, b: &Word) -> bool {
    a.letters
        .iter()
        .all(|s| b.letters.iter().all(|t| s.commutes(*t)))
}

fn cat(parts: &[&Word]) -> Word {
    let mut l = Vec::new();
    for p in parts {
        l.extend_from_slice(&p.letters);
    }
    Word::raw(l, parts[0].n)
}

impl FineDecomposition {
    /// Names of the defining conditions of a fine decomposition of `u·v`
    /// that fail.
    pub fn fine_violations(&self, u: &Word, v: &Word) -> Vec<&'static str> {
        let mut bad = Vec::new();
        if !cat(&[&self.u1, &self.u_prime]).equivalent(u) {
            bad.push("u = u1.u'");
        }
        if !cat(&[&self.v_prime, &self.v1]).equivalent(v) {
            bad.push("v = v'.v1");
        }
        if !self.v1.absorbs_left(&self.u_prime) {
            bad.push("u' left-absorbed by v1");
        }
        if !self.u1.properly_absorbs_right(&self.v_prime) {
            bad.push("v' properly right-absorbed by u1");
        }
        if !commute_words(&self.u_prime, &self.v_prime) {
            bad.push("u' and v' commute");
        }
        if !cat(&[&self.u1, &self.v1]).is_reduced() {
            bad.push("u1.v1 reduced");
        }
        if !cat(&[u, v]).reduce().equivalent(&self.reduct) {
            bad.push("reduct of u.v");
        }
        bad
    }

    /// Names of the defining conditions of a symmetric decomposition that
    /// fail.
    pub fn symmetric_violations(&self, u: &Word, v: &Word) -> Vec<&'static str> {
        let mut bad = Vec::new();
        if !cat(&[&self.u1, &self.u_prime, &self.w]).equivalent(u) {
            bad.push("u = u1.u'.w");
        }
        if !cat(&[&self.w, &self.v_prime, &self.v1]).equivalent(v) {
            bad.push("v = w.v'.v1");
        }
        if !self.v1.properly_absorbs_left(&self.u_prime) {
            bad.push("u' properly left-absorbed by v1");
        }
        if !self.u1.properly_absorbs_right(&self.v_prime) {
            bad.push("v' properly right-absorbed by u1");
        }
        if !(commute_words(&self.u_prime, &self.w)
            && commute_words(&self.w, &self.v_prime)
            && commute_words(&self.u_prime, &self.v_prime))
        {
            bad.push("u', w, v' pairwise commute");
        }
        if !self.w.is_commuting() {
            bad.push("w commuting");
        }
        if !cat(&[&self.u1, &self.w, &self.v1]).is_reduced() {
            bad.push("u1.w.v1 reduced");
        }
        if !cat(&[u, v]).reduce().equivalent(&self.reduct) {
            bad.push("reduct of u.v");
        }
        bad
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (k, s) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, ".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str, n: usize) -> Word {
        Word::parse(s, n).unwrap()
    }

    fn set(items: &[usize]) -> IndexSet {
        items.iter().copied().collect()
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(w("[0,1].[1,3]", 3).to_string(), "[0,1].[1,3]");
        assert_eq!(w("1", 2).to_string(), "1");
        assert!(Word::parse("", 2).is_err());
        assert!(Word::parse("[0].", 2).is_err());
        assert!(Word::parse("[0,3]", 2).is_err());
        assert!(Word::parse("[0]", 0).is_err());
    }

    #[test]
    fn reduction_examples() {
        assert!(w("[0,1].[1,3]", 3).is_reduced());
        assert!(!w("[0].[2,3].[0,1]", 3).is_reduced());
        assert!(w("1", 3).is_reduced());
        assert_eq!(w("[0].[2,3].[0,1]", 3).reduce().to_string(), "[2,3].[0,1]");
        assert_eq!(w("[0,1].[0,1]", 2).reduce().to_string(), "[0,1]");
        assert_eq!(w("[0,2]", 2).reduce().to_string(), "[0,2]");
    }

    #[test]
    fn normal_form_examples() {
        assert_eq!(w("[2,3].[0]", 3).normal_form().to_string(), "[0].[2,3]");
        assert_eq!(w("[0,1].[1,3]", 3).normal_form().to_string(), "[0,1].[1,3]");
        assert_eq!(w("1", 3).normal_form().to_string(), "1");
        assert!(w("[0].[2,3]", 3).equivalent(&w("[2,3].[0]", 3)));
        assert!(!w("[0].[1]", 3).equivalent(&w("[1].[0]", 3)));
    }

    #[test]
    fn inverse_and_support() {
        assert_eq!(w("[0].[1,2]", 2).inverse().to_string(), "[1,2].[0]");
        assert_eq!(w("1", 2).inverse().to_string(), "1");
        let u = w("[0,1].[1,3]", 3);
        assert_eq!(u.inverse().inverse(), u);
        assert_eq!(w("[0].[2,3]", 3).support(), set(&[0, 2, 3]));
        assert_eq!(w("1", 3).support(), IndexSet::EMPTY);
        assert_eq!(u.support(), set(&[0, 1, 2, 3]));
    }

    #[test]
    fn final_segment_examples() {
        let (r, s) = w("[0].[2,3]", 3).final_segment();
        assert_eq!(
            (r.to_string(), s.to_string()),
            ("1".into(), "[0].[2,3]".into())
        );
        let (r, s) = w("[0,1].[1,3]", 3).final_segment();
        assert_eq!(
            (r.to_string(), s.to_string()),
            ("[0,1]".into(), "[1,3]".into())
        );
    }

    #[test]
    fn stabilizer_examples() {
        assert_eq!(w("[1,2].[0,3]", 3).left_stabilizer(), set(&[1, 2]));
        assert_eq!(w("[0,1].[1,2]", 2).right_stabilizer(), set(&[1, 2]));
        assert_eq!(w("[0,1].[2,3]", 3).right_stabilizer(), set(&[0, 2, 3]));
        assert!(w("[0,1]", 3).absorbs_left(&w("[0]", 3)));
        assert!(!w("[1,2].[0,3]", 3).absorbs_left(&w("[0]", 3)));
        assert!(w("[1,2].[0,3]", 3).absorbs_left(&w("1", 3)));
    }

    #[test]
    fn split_examples() {
        let (a, b) = w("[2].[0,1]", 3).split_absorbed(set(&[0, 1]));
        assert_eq!(
            (a.to_string(), b.to_string()),
            ("[2]".into(), "[0,1]".into())
        );
        let (a, b) = w("[0,1].[1,3]", 3).split_absorbed(set(&[1, 2, 3]));
        assert_eq!(
            (a.to_string(), b.to_string()),
            ("[0,1]".into(), "[1,3]".into())
        );
        let (a, b) = w("[0,1].[1,3]", 3).split_absorbed(IndexSet::EMPTY);
        assert_eq!(
            (a.to_string(), b.to_string()),
            ("[0,1].[1,3]".into(), "1".into())
        );
    }

    #[test]
    fn fine_decomposition_examples() {
        let (u, v) = (w("[2].[0,1]", 3), w("[0].[3]", 3));
        let d = u.decompose_fine(&v).unwrap();
        assert_eq!(d.u1.to_string(), "[2].[0,1]");
        assert_eq!(d.u_prime.to_string(), "1");
        assert_eq!(d.v_prime.to_string(), "[0]");
        assert_eq!(d.v1.to_string(), "[3]");
        assert_eq!(d.reduct.to_string(), "[2].[0,1].[3]");
        assert!(d.fine_violations(&u, &v).is_empty());

        let s = w("[0,1]", 3);
        let d = s.decompose_fine(&s).unwrap();
        assert_eq!(
            [&d.u1, &d.u_prime, &d.v_prime, &d.v1].map(|x| x.to_string()),
            ["1", "[0,1]", "1", "[0,1]"]
        );

        let d = w("1", 3).decompose_fine(&u).unwrap();
        assert_eq!(d.v1, u.normal_form());
        assert!(d.u1.is_empty() && d.u_prime.is_empty() && d.v_prime.is_empty());

        assert!(matches!(
            w("[0].[0,1]", 3).decompose_fine(&s),
            Err(Error::NotReduced(_))
        ));
    }

    #[test]
    fn symmetric_decomposition_examples() {
        let s = w("[0,1]", 2);
        let d = s.decompose_symmetric(&s).unwrap();
        assert_eq!(d.w.to_string(), "[0,1]");
        assert!(d.u1.is_empty() && d.u_prime.is_empty() && d.v_prime.is_empty() && d.v1.is_empty());
        assert!(d.symmetric_violations(&s, &s).is_empty());

        let (u, v) = (w("[2].[0,1]", 3), w("[0].[3]", 3));
        let d = u.decompose_symmetric(&v).unwrap();
        assert_eq!(
            [&d.u1, &d.u_prime, &d.w, &d.v_prime, &d.v1].map(|x| x.to_string()),
            ["[2].[0,1]", "1", "1", "[0]", "[3]"]
        );

        let e = w("1", 3);
        let d = e.decompose_symmetric(&e).unwrap();
        assert!(d.reduct.is_empty());
    }

    #[test]
    fn product_and_wobbling_examples() {
        let cr = |a: &str, b: &str| w(a, 3).concat_reduce(&w(b, 3)).unwrap().to_string();
        assert_eq!(cr("[0,1]", "[0]"), "[0,1]");
        assert_eq!(cr("[0]", "[2]"), "[0].[2]");
        assert_eq!(cr("[2].[0,1]", "[0].[3]"), "[2].[0,1].[3]");
        assert_eq!(w("[0,1]", 2).wobbling(&w("[1,2]", 2)), set(&[1]));
        assert_eq!(w("1", 2).wobbling(&w("[1,2]", 2)), IndexSet::EMPTY);
        assert_eq!(w("[0]", 2).wobbling(&w("[2]", 2)), IndexSet::EMPTY);
    }

    #[test]
    fn prec_examples() {
        assert!(w("[0].[3]", 3).prec(&w("[0,1].[1,3]", 3)).unwrap());
        assert!(!w("[0,1]", 3).prec(&w("[0,1]", 3)).unwrap());
        assert!(w("1", 3).prec(&w("[0]", 3)).unwrap());
        // a block may itself need commuting into place
        assert!(w("[2].[0]", 2).prec(&w("[0,2]", 2)).unwrap());
        assert!(!w("[0]", 2).prec(&w("[1,2]", 2)).unwrap());
        let long = w("[0].[1].[0].[1].[0].[1].[0]", 3);
        assert!(matches!(
            long.prec(&long),
            Err(Error::SearchBoundExceeded { size: 14, cap: 12 })
        ));
    }

    #[test]
    fn rank_examples() {
        let o = |s: &str| s.parse::<CnfOrdinal>().unwrap();
        assert_eq!(w("[0,1].[1,3]", 3).ord_rank(), o("w^2+w"));
        assert_eq!(w("1", 3).ord_rank(), o("0"));
        assert_eq!(w("[0,2].[1,2].[3]", 3).ord_rank(), o("w^2+w+1"));
        assert_eq!(
            w("[0,2].[2,3].[1]", 3).rd_closed_form().unwrap(),
            o("w^2+w+1")
        );
        // [1,2] sits inside its neighbour [0,2], so this one is not reduced
        assert!(matches!(
            w("[0,2].[1,2].[3]", 3).rd_closed_form(),
            Err(Error::NotReduced(_))
        ));
        assert_eq!(w("[0,2]", 2).rd_closed_form().unwrap(), o("w^2"));
        assert!(matches!(
            w("[0,1].[1,3]", 3).rd_closed_form(),
            Err(Error::NotMonotone(_))
        ));
        assert!(matches!(
            w("[0].[0,1]", 3).rd_closed_form(),
            Err(Error::NotReduced(_))
        ));
        // monotone after commuting
        assert!(w("[0].[2,3]", 3).rd_closed_form().is_ok());
    }

    #[test]
    fn strong_reduction_examples() {
        let u = w("[0,1].[1,2].[1,2].[0,1].[1,2]", 2);
        let r = u.strong_reducts_bounded(2, 10_000).unwrap();
        assert!(r.contains(&w("[0,1].[1,2]", 2)));

        let r = w("[0,1].[0,1]", 2).strong_reducts_bounded(2, 1000).unwrap();
        for x in ["[0,1]", "1", "[0]", "[1]", "[0].[1]", "[1].[0]"] {
            assert!(r.contains(&w(x, 2)), "{x}");
        }

        let u = w("[0].[2,3].[0,1]", 3);
        assert_eq!(u.strong_reducts_bounded(3, 1000).unwrap(), vec![u.reduce()]);

        let r = w("[0,3].[0,3]", 3).strong_reducts_bounded(3, 5);
        assert!(matches!(r, Err(Error::StepBudgetExhausted { budget: 5 })));
    }

    #[test]
    fn divisor_examples() {
        assert_eq!(
            w("[0,1]", 3)
                .divides_left_bounded(&w("[0,1].[1,3]", 3), 2)
                .unwrap()
                .unwrap()
                .to_string(),
            "[1,3]"
        );
        assert_eq!(
            w("[0]", 3)
                .divides_left_bounded(&w("[0]", 3), 2)
                .unwrap()
                .unwrap()
                .to_string(),
            "1"
        );
        assert_eq!(
            w("[1,3]", 3).divides_left_bounded(&w("[0]", 3), 3).unwrap(),
            None
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            w("[0]", 2).concat(&w("[0]", 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    /// Every word reachable by adjacent swaps of commuting letters.
    fn swap_closure(u: &Word) -> HashSet<Vec<Letter>> {
        let mut seen = HashSet::from([u.letters.clone()]);
        let mut stack = vec![u.letters.clone()];
        while let Some(l) = stack.pop() {
            for k in 0..l.len().saturating_sub(1) {
                if l[k].commutes(l[k + 1]) {
                    let mut m = l.clone();
                    m.swap(k, k + 1);
                    if seen.insert(m.clone()) {
                        stack.push(m);
                    }
                }
            }
        }
        seen
    }

    fn word(n: usize, max_len: usize) -> impl Strategy<Value = Word> {
        let letter = (0..=n)
            .prop_flat_map(move |lo| (Just(lo), lo..=n))
            .prop_map(|(lo, hi)| Letter::new(lo, hi).unwrap());
        proptest::collection::vec(letter, 0..=max_len).prop_map(move |l| Word::raw(l, n))
    }

    proptest! {
        #[test]
        fn normal_form_is_the_unique_sorted_member(u in word(4, 6)) {
            let class = swap_closure(&u);
            let sorted: Vec<_> = class.iter().filter(|l| Word::raw((*l).clone(), 4).is_normal()).collect();
            prop_assert_eq!(sorted.len(), 1);
            prop_assert_eq!(sorted[0], &u.normal_form().letters);
            prop_assert_eq!(u.normal_form().normal_form(), u.normal_form());
        }

        #[test]
        fn stabilizers_are_class_invariants(u in word(4, 6)) {
            let nf = u.normal_form();
            prop_assert_eq!(u.left_stabilizer(), nf.left_stabilizer());
            prop_assert_eq!(u.right_stabilizer(), nf.right_stabilizer());
        }

        #[test]
        fn absorption_matches_stabilizer(v in word(3, 5)) {
            let sl = v.left_stabilizer();
            for s in crate::alphabet::all_letters(3) {
                prop_assert_eq!(v.left_absorber(s).is_some(), sl.contains_letter(s));
            }
        }

        #[test]
        fn reduct_is_reduced_and_equivalent_under_strategies(u in word(3, 8), seed in 0u64..1000) {
            let r = u.reduce();
            prop_assert!(r.is_reduced());
            let mut x = seed;
            let r2 = u.reduce_with(|c| { x = x.wrapping_mul(6364136223846793005).wrapping_add(1); (x >> 33) as usize % c.len() });
            prop_assert_eq!(r, r2);
        }

        #[test]
        fn final_segment_recombines(u in word(4, 6)) {
            let (rest, seg) = u.final_segment();
            prop_assert!(seg.is_commuting());
            prop_assert!(rest.concat(&seg).unwrap().equivalent(&u));
        }

        #[test]
        fn split_absorbed_laws(u in word(3, 6), v in word(3, 4)) {
            let set = v.left_stabilizer();
            let (u1, u2) = u.split_absorbed(set);
            prop_assert!(u1.concat(&u2).unwrap().equivalent(&u));
            prop_assert!(u2.support().is_subset(set));
            let (_, seg) = u1.final_segment();
            prop_assert!(seg.letters().iter().all(|s| !set.contains_letter(*s)));
        }

        #[test]
        fn prec_implies_smaller_ord(u in word(3, 4), v in word(3, 4)) {
            if u.prec(&v).unwrap() {
                prop_assert!(u.ord_rank() < v.ord_rank());
                prop_assert!(!v.prec(&u).unwrap());
            }
        }
    }
}
