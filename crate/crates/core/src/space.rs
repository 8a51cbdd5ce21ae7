//! Finite colored N-spaces built from the empty space by α operations.
//!
//! Vertices carry a level in `[0, N]` and edges only join adjacent levels.
//! Two imaginary anchors complete the picture: `Bottom` at level `-1`, joined
//! to all of level 0, and `Top` at level `N + 1`, joined to all of level `N`.
//!
//! A space is append-only. Vertex ids are dense and assigned in creation
//! order, so replaying a build script always yields the same ids. "Infinite
//! distance" is plain unreachability in the finite graph.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::alphabet::{check_dim, Letter};
use crate::error::{Error, Result};

pub type VertexId = usize;
pub type VertexSet = BTreeSet<VertexId>;

/// An endpoint for an α operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anchor {
    Bottom,
    Real(VertexId),
    Top,
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anchor::Bottom => write!(f, "bottom"),
            Anchor::Top => write!(f, "top"),
            Anchor::Real(v) => write!(f, "v{v}"),
        }
    }
}

impl Serialize for Anchor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Anchor::Bottom => s.serialize_str("bottom"),
            Anchor::Top => s.serialize_str("top"),
            Anchor::Real(v) => s.serialize_u64(*v as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Anchor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Id(usize),
            Name(String),
        }
        match Repr::deserialize(d)? {
            Repr::Id(v) => Ok(Anchor::Real(v)),
            Repr::Name(s) if s == "bottom" => Ok(Anchor::Bottom),
            Repr::Name(s) if s == "top" => Ok(Anchor::Top),
            Repr::Name(s) => Err(serde::de::Error::custom(format!(
                "anchor must be \"bottom\", \"top\" or a vertex id, got {s:?}"
            ))),
        }
    }
}

/// One α operation of a build script.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptOp {
    pub letter: String,
    pub lo: Anchor,
    pub hi: Anchor,
}

/// `{ "n": N, "ops": [ { "letter": "[1]", "lo": "bottom" | id, "hi": "top" | id } ] }`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildScript {
    pub n: usize,
    pub ops: Vec<ScriptOp>,
}

/// A replayed α operation together with the vertices it created.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildStep {
    pub letter: Letter,
    pub lo: Anchor,
    pub hi: Anchor,
    pub created: Vec<VertexId>,
}

#[derive(Serialize, Deserialize)]
struct StepJson {
    letter: String,
    lo: Anchor,
    hi: Anchor,
    created: Vec<VertexId>,
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: VertexId,
    level: usize,
}

#[derive(Serialize, Deserialize)]
struct SpaceJson {
    n: usize,
    vertices: Vec<VertexJson>,
    edges: Vec<[VertexId; 2]>,
    build_log: Vec<StepJson>,
    log_complete: bool,
}

/// A finite colored N-space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredSpace {
    n: usize,
    levels: Vec<usize>,
    adj: Vec<Vec<VertexId>>,
    log: Vec<BuildStep>,
    log_complete: bool,
}

/// A tuple witnessing that a space is not simply connected: `x` and `y` are
/// joined by a `t`-path of length `outside` avoiding the anchors, but the
/// shortest `t`-path between the anchors is longer (`inside`, `None` when
/// there is none).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplyConnectedViolation {
    pub lo: Anchor,
    pub hi: Anchor,
    pub t: String,
    pub x: VertexId,
    pub y: VertexId,
    pub outside: usize,
    pub inside: Option<usize>,
}

/// Why a vertex set fails to be nice or wunderbar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NiceViolation {
    /// The set's own between-set differs from its trace on the space's.
    Between {
        lo: Anchor,
        hi: Anchor,
        in_set: Vec<VertexId>,
        in_space: Vec<VertexId>,
    },
    /// Distances inside the set do not reflect those in the space.
    Distance {
        t: String,
        x: VertexId,
        y: VertexId,
        in_space: Option<usize>,
        in_set: Option<usize>,
    },
}

/// A view of the vertices strictly between two anchors, with levels shifted
/// so the lowest possible level is 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BetweenView {
    pub lo: Anchor,
    pub hi: Anchor,
    /// `(id, local level)`
    pub vertices: Vec<(VertexId, usize)>,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl ColoredSpace {
    pub fn new(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(ColoredSpace {
            n,
            levels: Vec::new(),
            adj: Vec::new(),
            log: Vec::new(),
            log_complete: true,
        })
    }

    pub fn from_script(script: &BuildScript) -> Result<Self> {
        let mut m = ColoredSpace::new(script.n)?;
        for op in &script.ops {
            let s = Letter::parse_in(&op.letter, script.n)?;
            m.apply_alpha(s, op.lo, op.hi)?;
        }
        Ok(m)
    }

    pub fn from_script_json(text: &str) -> Result<Self> {
        ColoredSpace::from_script(&serde_json::from_str(text)?)
    }

    /// The script replaying this space's build log.
    pub fn script(&self) -> BuildScript {
        BuildScript {
            n: self.n,
            ops: self
                .log
                .iter()
                .map(|s| ScriptOp {
                    letter: s.letter.to_string(),
                    lo: s.lo,
                    hi: s.hi,
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.levels.len()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.levels.len()
    }

    pub fn all_vertices(&self) -> VertexSet {
        self.vertices().collect()
    }

    pub fn level(&self, v: VertexId) -> usize {
        self.levels[v]
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for v in self.vertices() {
            for &w in &self.adj[v] {
                if v < w {
                    out.push((v, w));
                }
            }
        }
        out
    }

    pub fn has_edge(&self, x: VertexId, y: VertexId) -> bool {
        x < self.adj.len() && self.adj[x].binary_search(&y).is_ok()
    }

    pub fn build_log(&self) -> &[BuildStep] {
        &self.log
    }

    /// False once raw vertices or edges were added outside an α operation.
    pub fn log_complete(&self) -> bool {
        self.log_complete
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.levels.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    fn check_anchor(&self, a: Anchor) -> Result<()> {
        match a {
            Anchor::Real(v) => self.check_vertex(v),
            _ => Ok(()),
        }
    }

    /// Level of an anchor, `-1` for `Bottom` and `N + 1` for `Top`.
    pub fn anchor_level(&self, a: Anchor) -> isize {
        match a {
            Anchor::Bottom => -1,
            Anchor::Top => self.n as isize + 1,
            Anchor::Real(v) => self.levels[v] as isize,
        }
    }

    /// Adds a vertex outside any α operation.
    pub fn add_vertex(&mut self, level: usize) -> Result<VertexId> {
        if level > self.n {
            return Err(Error::PreconditionViolated(format!(
                "level {level} outside [0,{}]",
                self.n
            )));
        }
        self.log_complete = false;
        Ok(self.push_vertex(level))
    }

    /// Adds an edge outside any α operation.
    pub fn add_edge(&mut self, x: VertexId, y: VertexId) -> Result<()> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        if self.levels[x].abs_diff(self.levels[y]) != 1 {
            return Err(Error::PreconditionViolated(format!(
                "v{x} and v{y} are not on adjacent levels"
            )));
        }
        self.log_complete = false;
        self.link(x, y);
        Ok(())
    }

    fn push_vertex(&mut self, level: usize) -> VertexId {
        self.levels.push(level);
        self.adj.push(Vec::new());
        self.levels.len() - 1
    }

    fn link(&mut self, x: VertexId, y: VertexId) {
        for (a, b) in [(x, y), (y, x)] {
            if let Err(p) = self.adj[a].binary_search(&b) {
                self.adj[a].insert(p, b);
            }
        }
    }

    /// Adjoins a fresh path at the levels of `s`, hanging from `lo` (at level
    /// `s.lo - 1`) up to `hi` (at level `s.hi + 1`). Returns the new ids in
    /// level order.
    pub fn apply_alpha(&mut self, s: Letter, lo: Anchor, hi: Anchor) -> Result<Vec<VertexId>> {
        if !s.fits(self.n) {
            return Err(Error::LetterOutOfRange {
                lo: s.lo(),
                hi: s.hi(),
                n: self.n,
            });
        }
        self.check_anchor(lo)?;
        self.check_anchor(hi)?;
        let want_lo = s.lo() as isize - 1;
        let want_hi = s.hi() as isize + 1;
        let lo_ok = match lo {
            Anchor::Bottom => want_lo == -1,
            Anchor::Top => false,
            Anchor::Real(_) => self.anchor_level(lo) == want_lo,
        };
        let hi_ok = match hi {
            Anchor::Top => want_hi == self.n as isize + 1,
            Anchor::Bottom => false,
            Anchor::Real(_) => self.anchor_level(hi) == want_hi,
        };
        if !lo_ok || !hi_ok {
            return Err(Error::AnchorLevelMismatch(format!(
                "{s} needs anchors at levels {want_lo} and {want_hi}, got {lo} at {} and {hi} at {}",
                self.anchor_level(lo),
                self.anchor_level(hi)
            )));
        }
        if !self.lies_over(lo, hi) {
            return Err(Error::AnchorsNotOver {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        let created: Vec<VertexId> = s.levels().map(|l| self.push_vertex(l)).collect();
        for w in created.windows(2) {
            self.link(w[0], w[1]);
        }
        if let Anchor::Real(a) = lo {
            self.link(a, created[0]);
        }
        if let Anchor::Real(b) = hi {
            self.link(b, *created.last().unwrap());
        }
        self.log.push(BuildStep {
            letter: s,
            lo,
            hi,
            created: created.clone(),
        });
        Ok(created)
    }

    /// Vertices reachable from `start` by strictly monotone paths, going up
    /// when `up` is set.
    fn monotone_reach(&self, start: VertexId, up: bool) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                let next = if up {
                    self.levels[w] == self.levels[v] + 1
                } else {
                    self.levels[w] + 1 == self.levels[v]
                };
                if next && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Vertices lying over `a`.
    pub fn above(&self, a: Anchor) -> Vec<bool> {
        match a {
            Anchor::Bottom => vec![true; self.vertex_count()],
            Anchor::Top => vec![false; self.vertex_count()],
            Anchor::Real(v) => self.monotone_reach(v, true),
        }
    }

    /// Vertices lying beneath `b`.
    pub fn below(&self, b: Anchor) -> Vec<bool> {
        match b {
            Anchor::Top => vec![true; self.vertex_count()],
            Anchor::Bottom => vec![false; self.vertex_count()],
            Anchor::Real(v) => self.monotone_reach(v, false),
        }
    }

    /// `a` lies beneath `b`.
    pub fn lies_over(&self, a: Anchor, b: Anchor) -> bool {
        match (a, b) {
            (Anchor::Bottom, Anchor::Bottom) | (Anchor::Top, Anchor::Top) => false,
            (Anchor::Bottom, _) | (_, Anchor::Top) => true,
            (Anchor::Top, _) | (_, Anchor::Bottom) => false,
            (Anchor::Real(x), Anchor::Real(y)) => self.monotone_reach(x, true)[y],
        }
    }

    /// Mask of the vertices strictly between `a` and `b`.
    pub fn between_mask(&self, a: Anchor, b: Anchor) -> Vec<bool> {
        let up = self.above(a);
        let down = self.below(b);
        up.iter().zip(&down).map(|(x, y)| *x && *y).collect()
    }

    pub fn between(&self, a: Anchor, b: Anchor) -> Result<VertexSet> {
        self.check_anchor(a)?;
        self.check_anchor(b)?;
        if !self.lies_over(a, b) {
            return Err(Error::AnchorsNotOver {
                lo: a.to_string(),
                hi: b.to_string(),
            });
        }
        Ok(mask_to_set(&self.between_mask(a, b)))
    }

    pub fn between_subgraph(&self, a: Anchor, b: Anchor) -> Result<BetweenView> {
        let set = self.between(a, b)?;
        let shift = (self.anchor_level(a) + 1) as usize;
        let edges = self
            .edges()
            .into_iter()
            .filter(|(x, y)| set.contains(x) && set.contains(y))
            .collect();
        Ok(BetweenView {
            lo: a,
            hi: b,
            vertices: set.iter().map(|&v| (v, self.levels[v] - shift)).collect(),
            edges,
        })
    }

    /// Breadth-first distances from `sources` through vertices accepted by
    /// `allowed`. The sources themselves are always entered.
    pub fn bfs<F: Fn(VertexId) -> bool>(
        &self,
        sources: &[VertexId],
        allowed: F,
    ) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &self.adj[v] {
                if dist[w].is_none() && allowed(w) {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest path length from `x` to `y` through levels of `t`; `None`
    /// when they are not connected there.
    pub fn distance(&self, x: VertexId, y: VertexId, t: Letter) -> Result<Option<usize>> {
        for v in [x, y] {
            self.check_vertex(v)?;
            if !t.is_level_in(self.levels[v]) {
                return Err(Error::LevelNotInT {
                    vertex: v,
                    level: self.levels[v],
                    interval: t.to_string(),
                });
            }
        }
        Ok(self.bfs(&[x], |w| t.is_level_in(self.levels[w]))[y])
    }

    /// Every anchor pair `(a, b)` with `a` beneath `b`, the imaginary ones
    /// included.
    pub fn anchor_pairs(&self) -> Vec<(Anchor, Anchor)> {
        let mut anchors = vec![Anchor::Bottom];
        anchors.extend(self.vertices().map(Anchor::Real));
        anchors.push(Anchor::Top);
        self.anchor_pairs_among(&anchors)
    }

    fn anchor_pairs_among(&self, anchors: &[Anchor]) -> Vec<(Anchor, Anchor)> {
        let mut out = Vec::new();
        for &a in anchors {
            let up = match a {
                Anchor::Real(v) => Some(self.monotone_reach(v, true)),
                _ => None,
            };
            for &b in anchors {
                let over = match (a, b, &up) {
                    (Anchor::Real(_), Anchor::Real(y), Some(up)) => up[y],
                    _ => self.lies_over(a, b),
                };
                if over {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Exhaustive simple-connectedness check; returns the first violating
    /// tuple.
    pub fn simply_connected_violation(&self) -> Option<SimplyConnectedViolation> {
        for (a, b) in self.anchor_pairs() {
            if a == Anchor::Bottom && b == Anchor::Top {
                continue;
            }
            let between = self.between_mask(a, b);
            if !between.contains(&true) {
                continue;
            }
            let l = self.anchor_level(a).max(0) as usize;
            let r = self.anchor_level(b).min(self.n as isize) as usize;
            for t_lo in l..=r {
                for t_hi in t_lo..=r {
                    let t = Letter::new(t_lo, t_hi).expect("interval");
                    let in_t = |v: VertexId| t.is_level_in(self.levels[v]);
                    let pts: Vec<VertexId> =
                        self.vertices().filter(|&v| between[v] && in_t(v)).collect();
                    for (k, &x) in pts.iter().enumerate() {
                        let outside = self.bfs(&[x], |w| {
                            in_t(w) && Anchor::Real(w) != a && Anchor::Real(w) != b
                        });
                        let inside = self.bfs(&[x], |w| in_t(w) && between[w]);
                        for &y in &pts[k + 1..] {
                            if let Some(d) = outside[y] {
                                if inside[y] != Some(d) {
                                    return Some(SimplyConnectedViolation {
                                        lo: a,
                                        hi: b,
                                        t: t.to_string(),
                                        x,
                                        y,
                                        outside: d,
                                        inside: inside[y],
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_simply_connected(&self) -> bool {
        self.simply_connected_violation().is_none()
    }

    /// Every vertex of `d` lies on a flag inside `d`.
    pub fn is_complete(&self, d: &VertexSet) -> bool {
        d.iter().all(|&v| {
            v < self.vertex_count()
                && self.chain_in(v, d, false).is_some()
                && self.chain_in(v, d, true).is_some()
        })
    }

    /// A monotone chain inside `d` from `v` to level `N` (up) or level 0
    /// (down), starting at `v`.
    pub fn chain_in(&self, v: VertexId, d: &VertexSet, up: bool) -> Option<Vec<VertexId>> {
        let target = if up { self.n } else { 0 };
        let mut parent = vec![usize::MAX; self.vertex_count()];
        let mut stack = vec![v];
        parent[v] = v;
        while let Some(x) = stack.pop() {
            if self.levels[x] == target {
                let mut path = vec![x];
                let mut cur = x;
                while cur != v {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &w in &self.adj[x] {
                let step = if up {
                    self.levels[w] == self.levels[x] + 1
                } else {
                    self.levels[w] + 1 == self.levels[x]
                };
                if step && d.contains(&w) && parent[w] == usize::MAX {
                    parent[w] = x;
                    stack.push(w);
                }
            }
        }
        None
    }

    /// Adjacent-level subgraphs are forests.
    pub fn adjacent_levels_acyclic(&self) -> bool {
        (0..self.n).all(|l| {
            let verts: Vec<VertexId> = self
                .vertices()
                .filter(|&v| self.levels[v] == l || self.levels[v] == l + 1)
                .collect();
            let edges = self
                .edges()
                .into_iter()
                .filter(|&(x, y)| self.levels[x].min(self.levels[y]) == l)
                .count();
            let mut seen = vec![false; self.vertex_count()];
            let mut comps = 0;
            for &v in &verts {
                if !seen[v] {
                    comps += 1;
                    let d = self.bfs(&[v], |w| self.levels[w] == l || self.levels[w] == l + 1);
                    for w in self.vertices() {
                        if d[w].is_some() {
                            seen[w] = true;
                        }
                    }
                }
            }
            edges + comps == verts.len()
        })
    }

    fn between_in(&self, d: &VertexSet, a: Anchor, b: Anchor) -> Vec<VertexId> {
        let reach = |start: Anchor, up: bool| -> Vec<bool> {
            match (start, up) {
                (Anchor::Bottom, true) | (Anchor::Top, false) => {
                    self.vertices().map(|v| d.contains(&v)).collect()
                }
                (Anchor::Bottom, false) | (Anchor::Top, true) => vec![false; self.vertex_count()],
                (Anchor::Real(v), _) => {
                    let mut seen = vec![false; self.vertex_count()];
                    let mut stack = vec![v];
                    while let Some(x) = stack.pop() {
                        for &w in &self.adj[x] {
                            let step = if up {
                                self.levels[w] == self.levels[x] + 1
                            } else {
                                self.levels[w] + 1 == self.levels[x]
                            };
                            if step && d.contains(&w) && !seen[w] {
                                seen[w] = true;
                                stack.push(w);
                            }
                        }
                    }
                    seen
                }
            }
        };
        let up = reach(a, true);
        let down = reach(b, false);
        self.vertices().filter(|&v| up[v] && down[v]).collect()
    }

    fn nice_check(&self, d: &VertexSet, exact: bool) -> Result<Option<NiceViolation>> {
        for &v in d {
            self.check_vertex(v)?;
        }
        let mut anchors = vec![Anchor::Bottom];
        anchors.extend(d.iter().map(|&v| Anchor::Real(v)));
        anchors.push(Anchor::Top);
        for (a, b) in self.anchor_pairs_among(&anchors) {
            let in_set = self.between_in(d, a, b);
            let mask = self.between_mask(a, b);
            let in_space: Vec<VertexId> = d.iter().copied().filter(|&v| mask[v]).collect();
            if in_set != in_space {
                return Ok(Some(NiceViolation::Between {
                    lo: a,
                    hi: b,
                    in_set,
                    in_space,
                }));
            }
        }
        for t_lo in 0..=self.n {
            for t_hi in t_lo..=self.n {
                let t = Letter::new(t_lo, t_hi).expect("interval");
                let in_t = |v: VertexId| t.is_level_in(self.levels[v]);
                let pts: Vec<VertexId> = d.iter().copied().filter(|&v| in_t(v)).collect();
                for (k, &x) in pts.iter().enumerate() {
                    let dm = self.bfs(&[x], in_t);
                    let dd = self.bfs(&[x], |w| in_t(w) && d.contains(&w));
                    for &y in &pts[k + 1..] {
                        let bad = if exact {
                            dm[y] != dd[y]
                        } else {
                            dm[y].is_some() && dd[y].is_none()
                        };
                        if bad {
                            return Ok(Some(NiceViolation::Distance {
                                t: t.to_string(),
                                x,
                                y,
                                in_space: dm[y],
                                in_set: dd[y],
                            }));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    pub fn nice_violation(&self, d: &VertexSet) -> Result<Option<NiceViolation>> {
        self.nice_check(d, false)
    }

    pub fn wunderbar_violation(&self, d: &VertexSet) -> Result<Option<NiceViolation>> {
        self.nice_check(d, true)
    }

    pub fn is_nice(&self, d: &VertexSet) -> Result<bool> {
        Ok(self.nice_violation(d)?.is_none())
    }

    pub fn is_wunderbar(&self, d: &VertexSet) -> Result<bool> {
        Ok(self.wunderbar_violation(d)?.is_none())
    }

    /// A nice superset of `a ∪ {b}` reached from `a` by adjoining α-shaped
    /// blocks, following the induction on width and distance.
    pub fn nice_hull(&self, a: &VertexSet, b: VertexId) -> Result<VertexSet> {
        self.check_vertex(b)?;
        if let Some(v) = self.nice_violation(a)? {
            return Err(Error::PreconditionViolated(format!(
                "the starting set is not nice: {}",
                serde_json::to_string(&v)?
            )));
        }
        let mut out = a.clone();
        self.hull_step(&mut out, b, 0)?;
        Ok(out)
    }

    fn hull_step(&self, set: &mut VertexSet, b: VertexId, depth: usize) -> Result<()> {
        if set.contains(&b) {
            return Ok(());
        }
        if depth > 4 * self.vertex_count() + 8 {
            return Err(Error::PreconditionViolated(
                "hull recursion did not terminate; the space is not complete and simply connected"
                    .into(),
            ));
        }
        let (lo, hi) = self.width(set, b);
        let between = self.between_mask(lo, hi);
        let sources: Vec<VertexId> = set.iter().copied().filter(|&v| between[v]).collect();
        let dist = self.bfs(&sources, |w| between[w]);
        match dist[b] {
            None => {
                let down = self.monotone_path(lo, Anchor::Real(b))?;
                let up = self.monotone_path(Anchor::Real(b), hi)?;
                set.extend(down);
                set.extend(up);
                set.insert(b);
                let real = |x: Anchor| matches!(x, Anchor::Real(v) if !set.contains(&v));
                if real(lo) || real(hi) {
                    return Err(Error::PreconditionViolated("anchor escaped the set".into()));
                }
                Ok(())
            }
            Some(_) => {
                // step back along a shortest path towards the set
                let prev = self.adj[b]
                    .iter()
                    .copied()
                    .filter(|&w| between[w])
                    .filter_map(|w| dist[w].map(|d| (d, w)))
                    .min()
                    .map(|(_, w)| w)
                    .expect("finite distance has a predecessor");
                self.hull_step(set, prev, depth + 1)?;
                self.hull_step(set, b, depth + 1)
            }
        }
    }

    /// The tightest anchors of `set` around `b`: the lowest-level vertex of
    /// `set` over `b` and the highest-level one beneath it, imaginary when
    /// there is none. Ties go to the smallest id.
    fn width(&self, set: &VertexSet, b: VertexId) -> (Anchor, Anchor) {
        let up = self.monotone_reach(b, true);
        let down = self.monotone_reach(b, false);
        let hi = set
            .iter()
            .copied()
            .filter(|&v| up[v])
            .min_by_key(|&v| (self.levels[v], v))
            .map_or(Anchor::Top, Anchor::Real);
        let lo = set
            .iter()
            .copied()
            .filter(|&v| down[v])
            .min_by_key(|&v| (std::cmp::Reverse(self.levels[v]), v))
            .map_or(Anchor::Bottom, Anchor::Real);
        (lo, hi)
    }

    /// Interior vertices of an ascending path from `a` to `b`, endpoints
    /// excluded unless real and equal to the start. For an imaginary end the
    /// path runs to level 0 or level `N`.
    fn monotone_path(&self, a: Anchor, b: Anchor) -> Result<Vec<VertexId>> {
        let all = self.all_vertices();
        match (a, b) {
            (Anchor::Bottom, Anchor::Real(v)) => {
                let mut c = self.chain_in(v, &all, false).ok_or_else(|| {
                    Error::PreconditionViolated(format!("v{v} has no chain to level 0"))
                })?;
                c.remove(0);
                Ok(c)
            }
            (Anchor::Real(v), Anchor::Top) => {
                let mut c = self.chain_in(v, &all, true).ok_or_else(|| {
                    Error::PreconditionViolated(format!("v{v} has no chain to level N"))
                })?;
                c.remove(0);
                Ok(c)
            }
            (Anchor::Real(x), Anchor::Real(y)) => {
                if x == y {
                    return Ok(Vec::new());
                }
                let down = self.monotone_reach(y, false);
                let mut path = Vec::new();
                let mut cur = x;
                while cur != y {
                    let next = self.adj[cur]
                        .iter()
                        .copied()
                        .find(|&w| self.levels[w] == self.levels[cur] + 1 && (w == y || down[w]))
                        .ok_or_else(|| Error::AnchorsNotOver {
                            lo: a.to_string(),
                            hi: b.to_string(),
                        })?;
                    if next != y {
                        path.push(next);
                    }
                    cur = next;
                }
                Ok(path)
            }
            _ => Ok(Vec::new()),
        }
    }

    /// The subspace induced on `d`, with ids renumbered densely in increasing
    /// order. The second component maps new ids back to old ones.
    pub fn induced(&self, d: &VertexSet) -> Result<(ColoredSpace, Vec<VertexId>)> {
        let back: Vec<VertexId> = d.iter().copied().collect();
        let mut fwd = vec![usize::MAX; self.vertex_count()];
        let mut sub = ColoredSpace::new(self.n)?;
        for (k, &v) in back.iter().enumerate() {
            self.check_vertex(v)?;
            fwd[v] = k;
            sub.push_vertex(self.levels[v]);
        }
        for (x, y) in self.edges() {
            if fwd[x] != usize::MAX && fwd[y] != usize::MAX {
                sub.link(fwd[x], fwd[y]);
            }
        }
        sub.log_complete = false;
        Ok((sub, back))
    }

    /// Anchor pairs of `d` whose `d`-vertices in between fall into more than
    /// one component of the space between them.
    pub fn open_pairs(&self, d: &VertexSet) -> Result<Vec<(Anchor, Anchor)>> {
        for &v in d {
            self.check_vertex(v)?;
        }
        let mut anchors = vec![Anchor::Bottom];
        anchors.extend(d.iter().map(|&v| Anchor::Real(v)));
        anchors.push(Anchor::Top);
        let mut out = Vec::new();
        for (a, b) in self.anchor_pairs_among(&anchors) {
            let mask = self.between_mask(a, b);
            let pts: Vec<VertexId> = d.iter().copied().filter(|&v| mask[v]).collect();
            if let Some(&first) = pts.first() {
                let reach = self.bfs(&[first], |w| mask[w]);
                if pts.iter().any(|&p| reach[p].is_none()) {
                    out.push((a, b));
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let js = SpaceJson {
            n: self.n,
            vertices: self
                .vertices()
                .map(|v| VertexJson {
                    id: v,
                    level: self.levels[v],
                })
                .collect(),
            edges: self.edges().into_iter().map(|(x, y)| [x, y]).collect(),
            build_log: self
                .log
                .iter()
                .map(|s| StepJson {
                    letter: s.letter.to_string(),
                    lo: s.lo,
                    hi: s.hi,
                    created: s.created.clone(),
                })
                .collect(),
            log_complete: self.log_complete,
        };
        serde_json::to_value(js).expect("space serialises")
    }

    /// Reads a space export. A complete build log is replayed and must
    /// reproduce the listed vertices and edges.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let js: SpaceJson = serde_json::from_value(value.clone())?;
        let bad = |msg: String| Error::Parse { what: "space", msg };
        if js.log_complete {
            let mut m = ColoredSpace::new(js.n)?;
            for step in &js.build_log {
                let s = Letter::parse_in(&step.letter, js.n)?;
                let created = m.apply_alpha(s, step.lo, step.hi)?;
                if created != step.created {
                    return Err(bad(format!(
                        "build log step {} created {:?}",
                        step.letter, created
                    )));
                }
            }
            let replayed = m.to_json();
            if replayed["vertices"] != value["vertices"] || replayed["edges"] != value["edges"] {
                return Err(bad("vertices or edges disagree with the build log".into()));
            }
            return Ok(m);
        }
        let mut m = ColoredSpace::new(js.n)?;
        for (k, v) in js.vertices.iter().enumerate() {
            if v.id != k || v.level > js.n {
                return Err(bad(format!(
                    "vertex entry {k} is not dense or out of range"
                )));
            }
            m.push_vertex(v.level);
        }
        for [x, y] in js.edges {
            m.add_edge(x, y)?;
        }
        for step in js.build_log {
            m.log.push(BuildStep {
                letter: Letter::parse_in(&step.letter, js.n)?,
                lo: step.lo,
                hi: step.hi,
                created: step.created,
            });
        }
        m.log_complete = false;
        Ok(m)
    }

    /// Accepts either a build script or a space export.
    pub fn load_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("ops").is_some() {
            ColoredSpace::from_script(&serde_json::from_value(value)?)
        } else {
            ColoredSpace::from_json(&value)
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph space {\n  rankdir=BT;\n");
        for l in 0..=self.n {
            let ids: Vec<String> = self
                .vertices()
                .filter(|&v| self.levels[v] == l)
                .map(|v| format!("v{v}"))
                .collect();
            if !ids.is_empty() {
                let _ = writeln!(out, "  {{ rank=same; {}; }}", ids.join("; "));
            }
        }
        for v in self.vertices() {
            let _ = writeln!(out, "  v{v} [label=\"v{v}@{}\"];", self.levels[v]);
        }
        for (x, y) in self.edges() {
            let _ = writeln!(out, "  v{x} -- v{y};");
        }
        out.push_str("}\n");
        out
    }
}

pub fn mask_to_set(mask: &[bool]) -> VertexSet {
    mask.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(v, _)| v)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(s: &str) -> Letter {
        s.parse().unwrap()
    }

    /// A flag a0-a1-a2 plus b1 hung between a0 and a2.
    fn flag_with_b1() -> (ColoredSpace, [VertexId; 4]) {
        let mut m = ColoredSpace::new(2).unwrap();
        let f = m
            .apply_alpha(l("[0,2]"), Anchor::Bottom, Anchor::Top)
            .unwrap();
        let b = m
            .apply_alpha(l("[1]"), Anchor::Real(f[0]), Anchor::Real(f[2]))
            .unwrap();
        (m, [f[0], f[1], f[2], b[0]])
    }

    fn set(items: &[VertexId]) -> VertexSet {
        items.iter().copied().collect()
    }

    #[test]
    fn alpha_examples() {
        let mut m = ColoredSpace::new(2).unwrap();
        let f = m
            .apply_alpha(l("[0,2]"), Anchor::Bottom, Anchor::Top)
            .unwrap();
        assert_eq!(f, vec![0, 1, 2]);
        assert!(m.has_edge(0, 1) && m.has_edge(1, 2));
        let b = m
            .apply_alpha(l("[1]"), Anchor::Real(0), Anchor::Real(2))
            .unwrap();
        assert_eq!(b, vec![3]);
        assert_eq!(m.neighbors(3), &[0, 2]);

        let g = m
            .apply_alpha(l("[0,2]"), Anchor::Bottom, Anchor::Top)
            .unwrap();
        let e = m.apply_alpha(l("[1]"), Anchor::Real(0), Anchor::Real(g[2]));
        assert!(matches!(e, Err(Error::AnchorsNotOver { .. })));
        let e = m.apply_alpha(l("[1]"), Anchor::Real(1), Anchor::Real(2));
        assert!(matches!(e, Err(Error::AnchorLevelMismatch(_))));
        let e = m.apply_alpha(l("[0]"), Anchor::Top, Anchor::Real(1));
        assert!(matches!(e, Err(Error::AnchorLevelMismatch(_))));
        let e = m.apply_alpha(l("[1]"), Anchor::Real(99), Anchor::Real(2));
        assert!(matches!(e, Err(Error::UnknownVertex(99))));
    }

    #[test]
    fn lies_over_examples() {
        let mut m = ColoredSpace::new(2).unwrap();
        let f = m
            .apply_alpha(l("[0,2]"), Anchor::Bottom, Anchor::Top)
            .unwrap();
        let g = m
            .apply_alpha(l("[0,2]"), Anchor::Bottom, Anchor::Top)
            .unwrap();
        assert!(m.lies_over(Anchor::Real(f[0]), Anchor::Real(f[2])));
        assert!(m.lies_over(Anchor::Bottom, Anchor::Real(g[1])));
        assert!(m.lies_over(Anchor::Bottom, Anchor::Top));
        assert!(!m.lies_over(Anchor::Real(f[0]), Anchor::Real(g[2])));
        assert!(!m.lies_over(Anchor::Real(f[2]), Anchor::Real(f[0])));
    }

    #[test]
    fn distance_examples() {
        let (m, [a0, a1, _, b1]) = flag_with_b1();
        assert_eq!(m.distance(a0, a1, l("[0,1]")).unwrap(), Some(1));
        assert_eq!(m.distance(a1, b1, l("[1]")).unwrap(), None);
        assert_eq!(m.distance(a1, b1, l("[0,1]")).unwrap(), Some(2));
        assert!(matches!(
            m.distance(a0, a1, l("[1]")),
            Err(Error::LevelNotInT { vertex: 0, .. })
        ));
    }

    #[test]
    fn between_examples() {
        let mut m = ColoredSpace::new(2).unwrap();
        let f = m
            .apply_alpha(l("[0,2]"), Anchor::Bottom, Anchor::Top)
            .unwrap();
        let v = m
            .between_subgraph(Anchor::Real(f[0]), Anchor::Real(f[2]))
            .unwrap();
        assert_eq!(v.vertices, vec![(f[1], 0)]);
        assert!(v.edges.is_empty());
        m.apply_alpha(l("[1]"), Anchor::Real(f[0]), Anchor::Real(f[2]))
            .unwrap();
        assert_eq!(
            m.between(Anchor::Real(0), Anchor::Real(2)).unwrap(),
            set(&[1, 3])
        );
        assert_eq!(
            m.between(Anchor::Bottom, Anchor::Top).unwrap(),
            m.all_vertices()
        );
        assert!(m.between(Anchor::Real(2), Anchor::Real(0)).is_err());
    }

    #[test]
    fn simply_connected_examples() {
        let (m, _) = flag_with_b1();
        assert!(m.is_simply_connected());
        assert!(ColoredSpace::new(3).unwrap().is_simply_connected());

        let mut c = ColoredSpace::new(1).unwrap();
        let x0 = c.add_vertex(0).unwrap();
        let x1 = c.add_vertex(0).unwrap();
        let y0 = c.add_vertex(1).unwrap();
        let y1 = c.add_vertex(1).unwrap();
        for (p, q) in [(x0, y0), (y0, x1), (x1, y1), (y1, x0)] {
            c.add_edge(p, q).unwrap();
        }
        let v = c.simply_connected_violation().expect("4-cycle violates");
        assert_eq!(v.outside, 2);
        assert_eq!(v.inside, None);
        assert!(!c.adjacent_levels_acyclic());
        assert!(m.adjacent_levels_acyclic());
    }

    #[test]
    fn completeness_examples() {
        let (m, [a0, a1, a2, _]) = flag_with_b1();
        assert!(m.is_complete(&set(&[a0, a1, a2])));
        assert!(!m.is_complete(&set(&[a1, a2])));
        assert!(m.is_complete(&m.all_vertices()));
    }

    #[test]
    fn nice_examples() {
        let (m, [a0, a1, a2, b1]) = flag_with_b1();
        assert!(m.is_nice(&set(&[a0, a1, a2])).unwrap());
        assert!(m.is_nice(&m.all_vertices()).unwrap());
        assert!(m.is_wunderbar(&m.all_vertices()).unwrap());
        let v = m.nice_violation(&set(&[a1, b1])).unwrap();
        assert!(matches!(v, Some(NiceViolation::Distance { .. })));
        assert!(m.is_nice(&set(&[a0, a1, a2, b1])).unwrap());
    }

    #[test]
    fn hull_examples() {
        let (m, [a0, a1, a2, b1]) = flag_with_b1();
        let flag = set(&[a0, a1, a2]);
        assert_eq!(m.nice_hull(&flag, b1).unwrap(), set(&[a0, a1, a2, b1]));
        assert_eq!(m.nice_hull(&flag, a1).unwrap(), flag);
        let h = m.nice_hull(&VertexSet::new(), b1).unwrap();
        assert!(h.contains(&b1));
        assert_eq!(h.len(), 3);
        assert!(m.is_nice(&h).unwrap());
        assert!(matches!(
            m.nice_hull(&set(&[a1, b1]), a0),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn open_pair_examples() {
        let (m, [a0, a1, a2, b1]) = flag_with_b1();
        assert!(m.open_pairs(&set(&[a0, a1, a2])).unwrap().is_empty());
        assert_eq!(
            m.open_pairs(&set(&[a0, a1, a2, b1])).unwrap(),
            vec![(Anchor::Real(a0), Anchor::Real(a2))]
        );
        assert!(m.open_pairs(&VertexSet::new()).unwrap().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let (m, _) = flag_with_b1();
        let back = ColoredSpace::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let script = serde_json::to_string(&m.script()).unwrap();
        assert_eq!(ColoredSpace::load_json(&script).unwrap(), m);
        assert!(script.contains("\"bottom\""));

        let mut tampered = m.to_json();
        tampered["edges"] = serde_json::json!([[0, 1]]);
        assert!(ColoredSpace::from_json(&tampered).is_err());
    }

    #[test]
    fn dot_labels() {
        let (m, _) = flag_with_b1();
        let dot = m.to_dot();
        assert!(dot.contains("v3 [label=\"v3@1\"]"));
        assert!(dot.contains("{ rank=same; v1; v3; }"));
        assert!(dot.contains("v0 -- v3;"));
    }
}
