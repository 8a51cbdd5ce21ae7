//! Flags, weak and global flag operations, reduced flag paths, basepoints,
//! forking between flags and canonical bases.
//!
//! All queries borrow a finished space immutably. Only [`realize_type`]
//! extends the space.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::alphabet::{IndexSet, Letter};
use crate::error::{Error, Result};
use crate::ordinals::CnfOrdinal;
use crate::space::{Anchor, ColoredSpace, VertexId, VertexSet};
use crate::words::Word;

/// Refinement rounds before `flag_path` gives up and reports the path as
/// not strongly reducible. Every round lowers the ordinal height of the
/// word, so this is only reached on pathological inputs.
const REFINE_ROUNDS: usize = 100_000;

/// Cap on the number of permutations listed by [`path_permutations`].
const MAX_PERMUTATIONS: usize = 5040;

/// A path `a_0 − … − a_N`, entry `i` at level `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Flag(Vec<VertexId>);

impl Flag {
    /// Checks levels and adjacency against `space`.
    pub fn new(space: &ColoredSpace, ids: Vec<VertexId>) -> Result<Flag> {
        if ids.len() != space.dim() + 1 {
            return Err(Error::NotAFlag(format!(
                "{ids:?} has {} entries, expected {}",
                ids.len(),
                space.dim() + 1
            )));
        }
        for (i, &v) in ids.iter().enumerate() {
            space.check_vertex(v)?;
            if space.level(v) != i {
                return Err(Error::NotAFlag(format!(
                    "v{v} sits at level {}, not {i}",
                    space.level(v)
                )));
            }
        }
        if let Some(w) = ids.windows(2).find(|w| !space.has_edge(w[0], w[1])) {
            return Err(Error::NotAFlag(format!(
                "v{} and v{} are not adjacent",
                w[0], w[1]
            )));
        }
        Ok(Flag(ids))
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn at(&self, level: usize) -> VertexId {
        self.0[level]
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.0.iter().copied().collect()
    }

    /// `self` with its `s`-part taken from `other`.
    fn with_part(&self, other: &Flag, s: Letter) -> Flag {
        let mut v = self.0.clone();
        for l in s.levels() {
            v[l] = other.0[l];
        }
        Flag(v)
    }

    /// The vertices bounding `s` from below and above.
    pub fn anchors(&self, s: Letter) -> (Anchor, Anchor) {
        let lo = if s.lo() == 0 {
            Anchor::Bottom
        } else {
            Anchor::Real(self.0[s.lo() - 1])
        };
        let hi = if s.hi() == self.dim() {
            Anchor::Top
        } else {
            Anchor::Real(self.0[s.hi() + 1])
        };
        (lo, hi)
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Levels at which two flags differ.
pub fn difference(f: &Flag, g: &Flag) -> IndexSet {
    f.0.iter()
        .zip(&g.0)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| i)
        .collect()
}

/// The commuting word made of the maximal intervals where `f` and `g`
/// differ.
pub fn weak_word(f: &Flag, g: &Flag) -> Word {
    Word::raw(difference(f, g).intervals(), f.dim())
}

/// The weak path realising [`weak_word`], one interval at a time.
pub fn weak_path(f: &Flag, g: &Flag) -> Vec<Flag> {
    let mut out = vec![f.clone()];
    for s in difference(f, g).intervals() {
        let next = out.last().unwrap().with_part(g, s);
        out.push(next);
    }
    out
}

/// `to` arises from `base` (which contains `from`) by a global application
/// of `α_s`: the `s`-part of `to` cannot be reached from `base` between the
/// anchors of `from`.
pub fn global_over(
    space: &ColoredSpace,
    base: &VertexSet,
    from: &Flag,
    to: &Flag,
    s: Letter,
) -> Result<bool> {
    let diff = difference(from, to);
    if diff != s.as_set() {
        return Err(Error::DifferenceMismatch(s.to_string()));
    }
    let (lo, hi) = from.anchors(s);
    let mask = space.between_mask(lo, hi);
    let sources: Vec<VertexId> = base.iter().copied().filter(|&v| mask[v]).collect();
    let dist = space.bfs(&sources, |w| mask[w]);
    Ok(dist[to.at(s.lo())].is_none())
}

pub fn is_global_step(space: &ColoredSpace, f: &Flag, g: &Flag, s: Letter) -> Result<bool> {
    global_over(space, &f.vertex_set(), f, g, s)
}

/// A weak flag path with its word; `word[i]` relates `flags[i]` and
/// `flags[i + 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlagPath {
    pub flags: Vec<Flag>,
    #[serde(serialize_with = "word_str")]
    pub word: Word,
    /// Every step is global and the word is reduced.
    pub reduced: bool,
    /// False when refinement stopped before every step became global and
    /// the word reduced.
    pub strongly_reduced: bool,
}

fn word_str<S: Serializer>(w: &Word, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(w)
}

impl FlagPath {
    /// Reads the letters off consecutive flags, which must differ in exactly
    /// one interval.
    pub fn from_flags(space: &ColoredSpace, flags: Vec<Flag>) -> Result<FlagPath> {
        let mut letters = Vec::new();
        let mut global = true;
        for w in flags.windows(2) {
            let ints = difference(&w[0], &w[1]).intervals();
            if ints.len() != 1 {
                return Err(Error::DifferenceMismatch(format!("{} -> {}", w[0], w[1])));
            }
            global &= is_global_step(space, &w[0], &w[1], ints[0])?;
            letters.push(ints[0]);
        }
        let word = Word::raw(letters, space.dim());
        let reduced = global && word.is_reduced();
        Ok(FlagPath {
            flags,
            word,
            reduced,
            strongly_reduced: reduced,
        })
    }

    pub fn start(&self) -> &Flag {
        &self.flags[0]
    }

    pub fn end(&self) -> &Flag {
        self.flags.last().unwrap()
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.flags
            .iter()
            .flat_map(|f| f.0.iter().copied())
            .collect()
    }
}

/// Order in which `flag_path` picks among available refinements. The
/// resulting word class does not depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathStrategy {
    First,
    Last,
    Random(u64),
}

fn step_letters(flags: &[Flag]) -> Vec<Letter> {
    flags
        .windows(2)
        .map(|w| difference(&w[0], &w[1]).intervals()[0])
        .collect()
}

/// Swaps steps `p` and `p + 1`, whose letters commute.
fn swap_steps(flags: &mut [Flag], p: usize) {
    let t = difference(&flags[p + 1], &flags[p + 2]).intervals()[0];
    flags[p + 1] = flags[p].with_part(&flags[p + 2], t);
}

/// Replaces `flags[x + 1]` by the weak path from `flags[x]` to `flags[x + 2]`.
fn merge_at(flags: &mut Vec<Flag>, x: usize) {
    let bridge = weak_path(&flags[x], &flags[x + 2]);
    flags.splice(x + 1..x + 3, bridge.into_iter().skip(1));
}

fn push_dedup(out: &mut Vec<Flag>, f: Flag) {
    if out.last() != Some(&f) {
        out.push(f);
    }
}

struct Refiner<'a> {
    space: &'a ColoredSpace,
    strategy: PathStrategy,
    rng: ChaCha8Rng,
}

impl Refiner<'_> {
    fn pick(&mut self, len: usize) -> usize {
        match self.strategy {
            PathStrategy::First => 0,
            PathStrategy::Last => len - 1,
            PathStrategy::Random(_) => self.rng.gen_range(0..len),
        }
    }

    /// Replaces a non-global step by a weak path through proper subletters,
    /// lifted from a shortest vertex path between the two `s`-parts.
    fn split_step(&self, flags: &mut Vec<Flag>, k: usize, s: Letter) {
        let (a, b) = (&flags[k], &flags[k + 1]);
        let (lo, hi) = a.anchors(s);
        let above = self.space.above(lo);
        let below = self.space.below(hi);
        let mask: Vec<bool> = above.iter().zip(&below).map(|(x, y)| *x && *y).collect();
        let sources: Vec<VertexId> = s.levels().map(|l| a.at(l)).collect();
        let targets: BTreeSet<VertexId> = s.levels().map(|l| b.at(l)).collect();
        let route = shortest_route(self.space, &sources, &targets, &mask);
        let mut out = vec![a.clone()];
        for e in route.windows(2) {
            let through = self.flag_through(a, s, e[0], e[1], &above, &below);
            let last = out.last().unwrap().clone();
            for f in weak_path(&last, &through).into_iter().skip(1) {
                push_dedup(&mut out, f);
            }
        }
        let last = out.last().unwrap().clone();
        for f in weak_path(&last, b).into_iter().skip(1) {
            push_dedup(&mut out, f);
        }
        flags.splice(k..k + 2, out);
    }

    /// A flag agreeing with `base` outside `s` and containing the edge
    /// `x − y`, whose vertices lie between the anchors.
    fn flag_through(
        &self,
        base: &Flag,
        s: Letter,
        x: VertexId,
        y: VertexId,
        above: &[bool],
        below: &[bool],
    ) -> Flag {
        let sp = self.space;
        let (p, q) = if sp.level(x) < sp.level(y) {
            (x, y)
        } else {
            (y, x)
        };
        let mut v = base.0.clone();
        v[sp.level(p)] = p;
        v[sp.level(q)] = q;
        let mut cur = p;
        for lev in (s.lo()..sp.level(p)).rev() {
            cur = *sp
                .neighbors(cur)
                .iter()
                .find(|&&w| sp.level(w) == lev && above[w])
                .expect("a vertex over the lower anchor descends to it");
            v[lev] = cur;
        }
        cur = q;
        #[allow(clippy::needless_range_loop)]
        for lev in sp.level(q) + 1..=s.hi() {
            cur = *sp
                .neighbors(cur)
                .iter()
                .find(|&&w| sp.level(w) == lev && below[w])
                .expect("a vertex beneath the upper anchor ascends to it");
            v[lev] = cur;
        }
        Flag(v)
    }

    fn run(&mut self, f: &Flag, g: &Flag) -> Result<FlagPath> {
        let n = f.dim();
        let mut flags = weak_path(f, g);
        let mut settled = false;
        for _ in 0..REFINE_ROUNDS {
            let letters = step_letters(&flags);
            let word = Word::raw(letters.clone(), n);
            let cancels = word.cancellations();
            if !cancels.is_empty() {
                let (i, j) = cancels[self.pick(cancels.len())];
                if i < j {
                    for p in i..j - 1 {
                        swap_steps(&mut flags, p);
                    }
                    merge_at(&mut flags, j - 1);
                } else {
                    for p in (j + 1..i).rev() {
                        swap_steps(&mut flags, p);
                    }
                    merge_at(&mut flags, j);
                }
                continue;
            }
            let mut local = Vec::new();
            for (k, &s) in letters.iter().enumerate() {
                if !is_global_step(self.space, &flags[k], &flags[k + 1], s)? {
                    local.push(k);
                }
            }
            if local.is_empty() {
                settled = true;
                break;
            }
            let k = local[self.pick(local.len())];
            self.split_step(&mut flags, k, letters[k]);
        }
        let word = Word::raw(step_letters(&flags), n);
        let mut path = FlagPath {
            flags,
            word,
            reduced: settled,
            strongly_reduced: settled,
        };
        if settled {
            let target = path.word.normal_form();
            path = permute_path(&path, &target)?;
        }
        Ok(path)
    }
}

fn shortest_route(
    space: &ColoredSpace,
    sources: &[VertexId],
    targets: &BTreeSet<VertexId>,
    mask: &[bool],
) -> Vec<VertexId> {
    let mut parent = vec![usize::MAX; space.vertex_count()];
    let mut queue = std::collections::VecDeque::new();
    for &s in sources {
        parent[s] = s;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        if targets.contains(&v) {
            let mut route = vec![v];
            let mut cur = v;
            while parent[cur] != cur {
                cur = parent[cur];
                route.push(cur);
            }
            route.reverse();
            return route;
        }
        for &w in space.neighbors(v) {
            if mask[w] && parent[w] == usize::MAX {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    Vec::new()
}

fn check_same_space(space: &ColoredSpace, flags: &[&Flag]) -> Result<()> {
    for f in flags {
        Flag::new(space, f.0.clone())?;
    }
    Ok(())
}

/// A reduced flag path from `f` to `g`, word in normal form.
pub fn flag_path(space: &ColoredSpace, f: &Flag, g: &Flag) -> Result<FlagPath> {
    flag_path_with(space, f, g, PathStrategy::First)
}

pub fn flag_path_with(
    space: &ColoredSpace,
    f: &Flag,
    g: &Flag,
    strategy: PathStrategy,
) -> Result<FlagPath> {
    check_same_space(space, &[f, g])?;
    let seed = match strategy {
        PathStrategy::Random(seed) => seed,
        _ => 0,
    };
    Refiner {
        space,
        strategy,
        rng: ChaCha8Rng::seed_from_u64(seed),
    }
    .run(f, g)
}

/// The reduced word connecting two flags.
pub fn path_word(space: &ColoredSpace, f: &Flag, g: &Flag) -> Result<Word> {
    Ok(flag_path(space, f, g)?.word)
}

/// Reorders a path to `target`, a commutation permutation of its word, by
/// swapping adjacent commuting steps.
pub fn permute_path(p: &FlagPath, target: &Word) -> Result<FlagPath> {
    let bad = || Error::NotAPermutation {
        word: p.word.to_string(),
        target: target.to_string(),
    };
    if target.len() != p.word.len() || !target.equivalent(&p.word) {
        return Err(bad());
    }
    let mut flags = p.flags.clone();
    let mut letters = p.word.letters().to_vec();
    for pos in 0..letters.len() {
        let want = target.letters()[pos];
        let q = (pos..letters.len())
            .find(|&q| letters[q] == want)
            .ok_or_else(bad)?;
        if !letters[pos..q].iter().all(|t| t.commutes(want)) {
            return Err(bad());
        }
        for r in (pos..q).rev() {
            swap_steps(&mut flags, r);
            letters.swap(r, r + 1);
        }
    }
    Ok(FlagPath {
        flags,
        word: target.clone(),
        reduced: p.reduced,
        strongly_reduced: p.strongly_reduced,
    })
}

/// Every commutation permutation of `p`, starting with `p` itself.
pub fn path_permutations(p: &FlagPath) -> Result<Vec<FlagPath>> {
    fn walk(rest: &mut Vec<Letter>, acc: &mut Vec<Letter>, out: &mut Vec<Vec<Letter>>) {
        if out.len() >= MAX_PERMUTATIONS {
            return;
        }
        if rest.is_empty() {
            out.push(acc.clone());
            return;
        }
        let mut tried = Vec::new();
        for k in 0..rest.len() {
            let s = rest[k];
            if tried.contains(&s) || !rest[..k].iter().all(|t| t.commutes(s)) {
                continue;
            }
            tried.push(s);
            rest.remove(k);
            acc.push(s);
            walk(rest, acc, out);
            acc.pop();
            rest.insert(k, s);
        }
    }
    let mut orders = Vec::new();
    walk(&mut p.word.letters().to_vec(), &mut Vec::new(), &mut orders);
    let n = p.word.dim();
    orders
        .into_iter()
        .map(|o| permute_path(p, &Word::raw(o, n)))
        .collect()
}

/// All flags of `space`, or of the subspace on `within`, in lexicographic
/// order of their id tuples.
pub fn enumerate_flags(space: &ColoredSpace, within: Option<&VertexSet>) -> Vec<Flag> {
    let ok = |v: VertexId| within.is_none_or(|d| d.contains(&v));
    let mut out = Vec::new();
    let mut stack: Vec<VertexId> = Vec::new();
    fn extend(
        space: &ColoredSpace,
        ok: &dyn Fn(VertexId) -> bool,
        stack: &mut Vec<VertexId>,
        out: &mut Vec<Flag>,
    ) {
        if stack.len() == space.dim() + 1 {
            out.push(Flag(stack.clone()));
            return;
        }
        let level = stack.len();
        let next: Vec<VertexId> = match stack.last() {
            None => space
                .vertices()
                .filter(|&v| space.level(v) == 0 && ok(v))
                .collect(),
            Some(&v) => space
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| space.level(w) == level && ok(w))
                .collect(),
        };
        for w in next {
            stack.push(w);
            extend(space, ok, stack, out);
            stack.pop();
        }
    }
    extend(space, &ok, &mut stack, &mut out);
    out
}

/// A flag of the nice set `x` reached from `f` by a ⪯-least word, with
/// that word. Minimality is decided by ordinal height, which `≺` strictly
/// lowers; ties go to the smallest id tuple.
pub fn basepoint(space: &ColoredSpace, f: &Flag, x: &VertexSet) -> Result<(Flag, Word)> {
    check_same_space(space, &[f])?;
    if let Some(v) = space.nice_violation(x)? {
        return Err(Error::PreconditionViolated(format!(
            "the set is not nice: {}",
            serde_json::to_string(&v)?
        )));
    }
    let mut best: Option<(CnfOrdinal, Flag, Word)> = None;
    for g in enumerate_flags(space, Some(x)) {
        let w = path_word(space, f, &g)?;
        let h = w.ord_rank();
        if best.as_ref().is_none_or(|b| h < b.0) {
            best = Some((h, g, w));
        }
    }
    best.map(|(_, g, w)| (g, w)).ok_or(Error::NoFlagInX)
}

/// `f` is independent from `h` over `g`: the words compose without
/// splitting.
pub fn indep(space: &ColoredSpace, f: &Flag, g: &Flag, h: &Flag) -> Result<bool> {
    let u = path_word(space, f, g)?;
    let v = path_word(space, g, h)?;
    let w = path_word(space, f, h)?;
    Ok(u.concat_reduce(&v)?.equivalent(&w))
}

/// `f` is independent from the nice set `x` over its flag `g`.
pub fn indep_over_set(space: &ColoredSpace, f: &Flag, g: &Flag, x: &VertexSet) -> Result<bool> {
    check_same_space(space, &[g])?;
    if !g.0.iter().all(|v| x.contains(v)) {
        return Err(Error::GNotInX(g.to_string()));
    }
    let (_, base) = basepoint(space, f, x)?;
    Ok(path_word(space, f, g)?.equivalent(&base))
}

/// A flag up to the levels in `modulus`.
#[derive(Clone, Debug)]
pub struct FlagClass {
    pub flag: Flag,
    pub modulus: IndexSet,
}

impl FlagClass {
    /// `(level, vertex)` for every level outside the modulus.
    pub fn determining_vertices(&self) -> Vec<(usize, VertexId)> {
        (0..=self.flag.dim())
            .filter(|&l| !self.modulus.contains(l))
            .map(|l| (l, self.flag.at(l)))
            .collect()
    }

    /// Every flag of `self` lies in `other`.
    pub fn refines(&self, other: &FlagClass) -> bool {
        self.modulus.is_subset(other.modulus)
            && other
                .determining_vertices()
                .iter()
                .all(|&(l, v)| self.flag.at(l) == v)
    }

    pub fn contains(&self, f: &Flag) -> bool {
        self.determining_vertices()
            .iter()
            .all(|&(l, v)| f.at(l) == v)
    }
}

impl PartialEq for FlagClass {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.determining_vertices() == other.determining_vertices()
    }
}

impl Eq for FlagClass {}

impl Serialize for FlagClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            flag: &'a Flag,
            modulus: Vec<usize>,
            vertices: Vec<(usize, VertexId)>,
        }
        Repr {
            flag: &self.flag,
            modulus: self.modulus.iter().collect(),
            vertices: self.determining_vertices(),
        }
        .serialize(s)
    }
}

/// The basepoint class `G / sr(u)`.
pub fn canonical_base(space: &ColoredSpace, f: &Flag, x: &VertexSet) -> Result<FlagClass> {
    let (g, u) = basepoint(space, f, x)?;
    Ok(FlagClass {
        flag: g,
        modulus: u.right_stabilizer(),
    })
}

/// Grows the space by fresh α steps along `u⁻¹` from `g` and returns the far
/// flag `f`, connected to `g` by `u`.
pub fn realize_type(space: &mut ColoredSpace, g: &Flag, u: &Word) -> Result<Flag> {
    check_same_space(space, &[g])?;
    if u.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: u.dim(),
        });
    }
    if !u.is_reduced() {
        return Err(Error::NotReduced(u.to_string()));
    }
    let mut cur = g.clone();
    for &s in u.letters().iter().rev() {
        let (lo, hi) = cur.anchors(s);
        let created = space.apply_alpha(s, lo, hi)?;
        for (l, v) in s.levels().zip(created) {
            cur.0[l] = v;
        }
    }
    Ok(cur)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypeRank {
    #[serde(serialize_with = "opt_ordinal_str")]
    pub u_rank: Option<CnfOrdinal>,
    #[serde(serialize_with = "ordinal_str")]
    pub ord_bound: CnfOrdinal,
}

fn ordinal_str<S: Serializer>(o: &CnfOrdinal, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(o)
}

fn opt_ordinal_str<S: Serializer>(
    o: &Option<CnfOrdinal>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match o {
        Some(o) => s.collect_str(o),
        None => s.serialize_none(),
    }
}

/// Exact rank where the closed form applies, plus the ordinal height as an
/// upper bound.
pub fn type_rank(u: &Word) -> Result<TypeRank> {
    if !u.is_reduced() {
        return Err(Error::NotReduced(u.to_string()));
    }
    let u_rank = match u.rd_closed_form() {
        Ok(r) => Some(r),
        Err(Error::NotMonotone(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(TypeRank {
        u_rank,
        ord_bound: u.ord_rank(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub pass: bool,
    pub witness: serde_json::Value,
}

/// The stabilizer identities behind the canonical bases `a_i` and `a_0`.
pub fn ample_report(n: usize) -> Result<Vec<CheckReport>> {
    crate::alphabet::check_dim(n)?;
    let mut out = Vec::new();
    let mut check = |word: Word, expected: IndexSet| {
        let got = word.right_stabilizer();
        out.push(CheckReport {
            check: format!("sr({word}) = {expected}"),
            pass: got == expected,
            witness: serde_json::json!({ "word": word.to_string(), "stabilizer": got.to_string() }),
        });
    };
    let letter = |lo: usize, hi: usize| Letter::new(lo, hi).expect("interval");
    for i in 1..n {
        let w = Word::raw(vec![letter(0, i), letter(i + 1, n)], n);
        let expected = IndexSet::interval(0, i - 1).union(IndexSet::interval(i + 1, n));
        check(w, expected);
    }
    let w = Word::raw(vec![letter(0, n - 1), letter(1, n)], n);
    check(w, IndexSet::interval(1, n));
    Ok(out)
}
