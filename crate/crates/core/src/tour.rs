//! Pseudo-Hamilton circuits over a host, admissible moves, rotations and abbreviations.
//!
//! The current order is kept as a list of runs over a base order (the abbreviation).
//! Every `cadence` mutations the runs are flattened into a new base.

use std::fmt;

use indexmap::IndexSet;
use rand::Rng;
use thiserror::Error;

use crate::graphgen::{Digraph, Graph};

/// One attachment point: a vertex and, for 2-vertices, which end (0 = first, 1 = last).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Port {
    pub vertex: u32,
    pub side: u8,
}

/// Anything a tour can be measured against.
///
/// A vertex with sides is entered on side 0 and left on side 1 while unflipped.
pub trait Host {
    fn order(&self) -> usize;
    fn is_directed(&self) -> bool;
    fn has_sides(&self, _v: usize) -> bool {
        false
    }
    /// Ports adjacent to `side` of `v` (out-arcs for directed hosts).
    fn ports(&self, v: usize, side: u8, buf: &mut Vec<Port>);
    /// In-arcs for directed hosts; the same as `ports` otherwise.
    fn in_ports(&self, v: usize, side: u8, buf: &mut Vec<Port>) {
        self.ports(v, side, buf)
    }
    fn joins(&self, u: usize, su: u8, v: usize, sv: u8) -> bool;

    fn exit_side(&self, v: usize, flipped: bool) -> u8 {
        if self.has_sides(v) && !flipped {
            1
        } else {
            0
        }
    }
    fn entry_side(&self, v: usize, flipped: bool) -> u8 {
        if self.has_sides(v) && flipped {
            1
        } else {
            0
        }
    }
    fn arc(&self, u: usize, fu: bool, v: usize, fv: bool) -> bool {
        self.joins(u, self.exit_side(u, fu), v, self.entry_side(v, fv))
    }
}

impl Host for Graph {
    fn order(&self) -> usize {
        Graph::order(self)
    }
    fn is_directed(&self) -> bool {
        false
    }
    fn ports(&self, v: usize, _side: u8, buf: &mut Vec<Port>) {
        buf.clear();
        buf.extend(self.neighbors(v).iter().map(|&w| Port { vertex: w, side: 0 }));
    }
    fn joins(&self, u: usize, _su: u8, v: usize, _sv: u8) -> bool {
        self.has_edge(u, v)
    }
}

impl Host for Digraph {
    fn order(&self) -> usize {
        Digraph::order(self)
    }
    fn is_directed(&self) -> bool {
        true
    }
    fn ports(&self, v: usize, _side: u8, buf: &mut Vec<Port>) {
        buf.clear();
        buf.extend(self.out_neighbors(v).iter().map(|&w| Port { vertex: w, side: 0 }));
    }
    fn in_ports(&self, v: usize, _side: u8, buf: &mut Vec<Port>) {
        buf.clear();
        buf.extend(self.in_neighbors(v).iter().map(|&w| Port { vertex: w, side: 0 }));
    }
    fn joins(&self, u: usize, _su: u8, v: usize, _sv: u8) -> bool {
        self.has_arc(u, v)
    }
}

/// K_n without materializing it.
#[derive(Clone, Copy, Debug)]
pub struct Complete(pub usize);

impl Host for Complete {
    fn order(&self) -> usize {
        self.0
    }
    fn is_directed(&self) -> bool {
        false
    }
    fn ports(&self, v: usize, _side: u8, buf: &mut Vec<Port>) {
        buf.clear();
        buf.extend((0..self.0 as u32).filter(|&w| w as usize != v).map(|w| Port { vertex: w, side: 0 }));
    }
    fn joins(&self, u: usize, _su: u8, v: usize, _sv: u8) -> bool {
        u != v
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TourError {
    #[error("not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("move vertices are not distinct")]
    NotDistinct,
    #[error("move {0} is not admissible")]
    NotAdmissible(String),
    #[error("{0} {1} is not a host edge off the tour")]
    NotHostEdge(usize, usize),
    #[error("rotations are undefined on digraphs")]
    Directed,
    #[error("vertex {0} has no sides")]
    NoSides(usize),
    #[error("abbreviation integrity: {0}")]
    Integrity(String),
}

/// An admissible-permutation candidate. `Potdt([a, c, b, d])` is (a c)(b d).
#[derive(Clone, Copy, Debug)]
pub enum Move {
    Three([u32; 3]),
    Potdt([u32; 4]),
}

impl Move {
    pub fn three(a: usize, b: usize, c: usize) -> Move {
        Move::Three([a as u32, b as u32, c as u32])
    }

    pub fn potdt(a: usize, c: usize, b: usize, d: usize) -> Move {
        Move::Potdt([a as u32, c as u32, b as u32, d as u32])
    }

    pub fn inverse(&self) -> Move {
        match *self {
            Move::Three([a, b, c]) => Move::Three([a, c, b]),
            p @ Move::Potdt(_) => p,
        }
    }

    pub fn vertices(&self) -> &[u32] {
        match self {
            Move::Three(v) => v,
            Move::Potdt(v) => v,
        }
    }

    fn distinct(&self) -> bool {
        let v = self.vertices();
        (0..v.len()).all(|i| (i + 1..v.len()).all(|j| v[i] != v[j]))
    }

    /// Rotation-normal 3-cycle, sorted transpositions.
    pub fn canonical(&self) -> Move {
        match *self {
            Move::Three(v) => {
                let i = (0..3).min_by_key(|&i| v[i]).unwrap();
                Move::Three([v[i], v[(i + 1) % 3], v[(i + 2) % 3]])
            }
            Move::Potdt([a, c, b, d]) => {
                let p = (a.min(c), a.max(c));
                let q = (b.min(d), b.max(d));
                let (p, q) = if p <= q { (p, q) } else { (q, p) };
                Move::Potdt([p.0, p.1, q.0, q.1])
            }
        }
    }

    /// The permutation s as a point map.
    pub fn image(&self, x: usize) -> usize {
        let x32 = x as u32;
        match *self {
            Move::Three([a, b, c]) => {
                if x32 == a {
                    b as usize
                } else if x32 == b {
                    c as usize
                } else if x32 == c {
                    a as usize
                } else {
                    x
                }
            }
            Move::Potdt([a, c, b, d]) => {
                let m = [(a, c), (c, a), (b, d), (d, b)];
                m.iter().find(|p| p.0 == x32).map_or(x, |p| p.1 as usize)
            }
        }
    }
}

impl PartialEq for Move {
    fn eq(&self, other: &Move) -> bool {
        match (self.canonical(), other.canonical()) {
            (Move::Three(a), Move::Three(b)) => a == b,
            (Move::Potdt(a), Move::Potdt(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Move {}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Move::Three([a, b, c]) => write!(f, "({} {} {})", a + 1, b + 1, c + 1),
            Move::Potdt([a, c, b, d]) => write!(f, "({} {})({} {})", a + 1, c + 1, b + 1, d + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Seg {
    lo: u32,
    hi: u32,
    rev: bool,
}

impl Seg {
    fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }
    fn at(&self, off: usize) -> u32 {
        if self.rev {
            self.hi - off as u32
        } else {
            self.lo + off as u32
        }
    }
}

/// A run of base ordinals, 1-based. `first > last` means the run descends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Run {
    pub first: u32,
    pub last: u32,
}

impl Run {
    fn ordinals(&self) -> Box<dyn Iterator<Item = u32>> {
        if self.first <= self.last {
            Box::new(self.first..=self.last)
        } else {
            Box::new((self.last..=self.first).rev())
        }
    }
}

/// The current order written as runs over the base order's ordinals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abbreviation {
    pub n: usize,
    pub runs: Vec<Run>,
    pub moves: usize,
}

impl Abbreviation {
    pub fn identity(n: usize) -> Self {
        Abbreviation { n, runs: vec![Run { first: 1, last: n as u32 }], moves: 0 }
    }

    /// Parses the compact notation: "…" (or "...") joins a run in either direction,
    /// "---" joins a descending run, a trailing "…" runs up to n.
    pub fn parse(text: &str, n: usize) -> Result<Self, TourError> {
        let bad = |m: String| TourError::Integrity(m);
        let mut runs: Vec<Run> = Vec::new();
        let mut pending: Option<&str> = None;
        for tok in text.split_whitespace() {
            match tok {
                "…" | "..." | "---" => {
                    if runs.is_empty() || pending.is_some() {
                        return Err(bad(format!("misplaced run marker {tok}")));
                    }
                    pending = Some(tok);
                }
                _ => {
                    let v: u32 = tok.trim_start_matches('-').parse().map_err(|_| bad(format!("bad token {tok}")))?;
                    if v == 0 || v as usize > n {
                        return Err(bad(format!("ordinal {v} outside 1..={n}")));
                    }
                    match pending.take() {
                        Some(mark) => {
                            let last = runs.last_mut().unwrap();
                            if last.first != last.last {
                                return Err(bad(format!("run marker after a run ending at {}", last.last)));
                            }
                            if mark == "---" && v >= last.first {
                                return Err(bad(format!("--- needs a descent, got {} to {v}", last.first)));
                            }
                            last.last = v;
                        }
                        None => runs.push(Run { first: v, last: v }),
                    }
                }
            }
        }
        if let Some(mark) = pending {
            let last = runs.last_mut().unwrap();
            if mark == "---" {
                return Err(bad("trailing ---".into()));
            }
            last.last = n as u32;
        }
        let a = Abbreviation { n, runs: merge_runs(runs), moves: 0 };
        a.check()?;
        Ok(a)
    }

    fn check(&self) -> Result<(), TourError> {
        let mut seen = vec![false; self.n + 1];
        for r in &self.runs {
            for o in r.ordinals() {
                if seen[o as usize] {
                    return Err(TourError::Integrity(format!("ordinal {o} repeated")));
                }
                seen[o as usize] = true;
            }
        }
        if let Some(o) = (1..=self.n).find(|&o| !seen[o]) {
            return Err(TourError::Integrity(format!("ordinal {o} missing")));
        }
        Ok(())
    }

    /// Vertex sequence over `base` (0-based vertices, base[i] has ordinal i + 1).
    pub fn materialize(&self, base: &[usize]) -> Result<Vec<usize>, TourError> {
        if base.len() != self.n {
            return Err(TourError::Integrity(format!("base has {} vertices, expected {}", base.len(), self.n)));
        }
        self.check()?;
        Ok(self.runs.iter().flat_map(|r| r.ordinals()).map(|o| base[o as usize - 1]).collect())
    }

    fn render_with(&self, signed: bool) -> String {
        let mut parts: Vec<String> = Vec::new();
        let k = self.runs.len();
        for (i, r) in self.runs.iter().enumerate() {
            let desc = r.first > r.last;
            let sign = if signed && desc { "-" } else { "" };
            let len = r.first.abs_diff(r.last) + 1;
            let trailing = i + 1 == k && !desc && r.last as usize == self.n && len >= 3;
            if len == 1 {
                parts.push(format!("{sign}{}", r.first));
            } else if trailing {
                parts.push(format!("{} …", r.first));
            } else if len == 2 {
                parts.push(format!("{sign}{} {sign}{}", r.first, r.last));
            } else {
                let mark = if desc { "---" } else { "…" };
                parts.push(format!("{sign}{} {mark} {sign}{}", r.first, r.last));
            }
        }
        parts.join(" ")
    }

    pub fn render_signed(&self) -> String {
        self.render_with(true)
    }
}

impl fmt::Display for Abbreviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(false))
    }
}

/// Joins neighbouring runs that continue one another, e.g. "9 8" into one descent.
fn merge_runs(runs: Vec<Run>) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::with_capacity(runs.len());
    for r in runs {
        if let Some(last) = out.last_mut() {
            let up = |x: &Run| x.first <= x.last;
            let down = |x: &Run| x.first >= x.last;
            if up(last) && up(&r) && last.last + 1 == r.first {
                last.last = r.last;
                continue;
            }
            if down(last) && down(&r) && r.first + 1 == last.last {
                last.last = r.last;
                continue;
            }
        }
        out.push(r);
    }
    out
}

pub fn is_cyclic_order(pa: usize, pb: usize, pc: usize, n: usize) -> bool {
    let rb = (pb + n - pa) % n;
    let rc = (pc + n - pa) % n;
    rb < rc
}

/// Chords [a, c] and [b, d] cross, given positions of four distinct points.
pub fn chords_interlace(pa: usize, pc: usize, pb: usize, pd: usize, n: usize) -> bool {
    let rc = (pc + n - pa) % n;
    let rb = (pb + n - pa) % n;
    let rd = (pd + n - pa) % n;
    (rb < rc) != (rd < rc)
}

#[derive(Clone)]
pub struct Tour<'h> {
    host: &'h dyn Host,
    n: usize,
    start: u32,
    base: Vec<u32>,
    base_ord: Vec<u32>,
    flip_base: Vec<bool>,
    segs: Vec<Seg>,
    starts: Vec<u32>,
    by_lo: Vec<u32>,
    pairs: IndexSet<(u32, u32)>,
    verts: IndexSet<u32>,
    since_rebase: usize,
    cadence: usize,
    moves: usize,
}

impl<'h> Tour<'h> {
    pub fn new(host: &'h dyn Host, order: &[usize]) -> Result<Self, TourError> {
        Self::with_flips(host, order, &vec![false; order.len()])
    }

    /// `flips[v]` orients 2-vertex `v` against its stored direction.
    pub fn with_flips(host: &'h dyn Host, order: &[usize], flips: &[bool]) -> Result<Self, TourError> {
        let n = host.order();
        if order.len() != n || flips.len() != n {
            return Err(TourError::NotPermutation(n));
        }
        let mut base_ord = vec![u32::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if v >= n || base_ord[v] != u32::MAX {
                return Err(TourError::NotPermutation(n));
            }
            base_ord[v] = i as u32;
        }
        let directed = host.is_directed();
        let mut t = Tour {
            host,
            n,
            start: order.first().map_or(0, |&v| v as u32),
            base: order.iter().map(|&v| v as u32).collect(),
            base_ord,
            flip_base: flips.iter().enumerate().map(|(v, &f)| f && !directed && host.has_sides(v)).collect(),
            segs: if n == 0 { vec![] } else { vec![Seg { lo: 0, hi: n as u32 - 1, rev: false }] },
            starts: vec![],
            by_lo: vec![],
            pairs: IndexSet::new(),
            verts: IndexSet::new(),
            since_rebase: 0,
            cadence: ((n as f64).sqrt() as usize).max(1),
            moves: 0,
        };
        t.reindex();
        for v in 0..n {
            if t.arc_is_pseudo(v) {
                t.mark(v);
            }
        }
        Ok(t)
    }

    pub fn host(&self) -> &'h dyn Host {
        self.host
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_directed(&self) -> bool {
        self.host.is_directed()
    }

    pub fn start(&self) -> usize {
        self.start as usize
    }

    /// Rebase every `cadence` mutations; `usize::MAX` never rebases.
    pub fn set_cadence(&mut self, cadence: usize) {
        self.cadence = cadence.max(1);
    }

    pub fn moves_applied(&self) -> usize {
        self.moves
    }

    fn reindex(&mut self) {
        // merge neighbouring runs that continue each other; flags must agree since they carry orientation
        let mut merged: Vec<Seg> = Vec::with_capacity(self.segs.len());
        for &s in &self.segs {
            if let Some(last) = merged.last_mut() {
                if last.rev == s.rev && !s.rev && last.hi + 1 == s.lo {
                    last.hi = s.hi;
                    continue;
                }
                if last.rev == s.rev && s.rev && s.hi + 1 == last.lo {
                    last.lo = s.lo;
                    continue;
                }
            }
            merged.push(s);
        }
        self.segs = merged;
        self.starts.clear();
        let mut acc = 0u32;
        for s in &self.segs {
            self.starts.push(acc);
            acc += s.len() as u32;
        }
        self.by_lo = (0..self.segs.len() as u32).collect();
        let segs = &self.segs;
        self.by_lo.sort_unstable_by_key(|&i| segs[i as usize].lo);
    }

    fn seg_of(&self, v: usize) -> (usize, usize) {
        let bo = self.base_ord[v];
        let k = self.by_lo.partition_point(|&i| self.segs[i as usize].lo <= bo) - 1;
        let s = self.by_lo[k] as usize;
        let sg = self.segs[s];
        let off = if sg.rev { sg.hi - bo } else { bo - sg.lo };
        (s, off as usize)
    }

    /// 0-based position; the start vertex sits at 0.
    pub fn pos(&self, v: usize) -> usize {
        let (s, off) = self.seg_of(v);
        self.starts[s] as usize + off
    }

    /// ORD(v), 1-based.
    pub fn ord(&self, v: usize) -> usize {
        self.pos(v) + 1
    }

    pub fn at(&self, pos: usize) -> usize {
        let s = self.starts.partition_point(|&x| x as usize <= pos) - 1;
        let off = pos - self.starts[s] as usize;
        self.base[self.segs[s].at(off) as usize] as usize
    }

    pub fn succ(&self, v: usize) -> usize {
        let (s, off) = self.seg_of(v);
        let sg = self.segs[s];
        if off + 1 < sg.len() {
            self.base[sg.at(off + 1) as usize] as usize
        } else {
            let next = self.segs[(s + 1) % self.segs.len()];
            self.base[next.at(0) as usize] as usize
        }
    }

    pub fn pred(&self, v: usize) -> usize {
        let (s, off) = self.seg_of(v);
        let sg = self.segs[s];
        if off > 0 {
            self.base[sg.at(off - 1) as usize] as usize
        } else {
            let prev = self.segs[(s + self.segs.len() - 1) % self.segs.len()];
            self.base[prev.at(prev.len() - 1) as usize] as usize
        }
    }

    pub fn flipped(&self, v: usize) -> bool {
        if !self.host.has_sides(v) || self.is_directed() {
            return false;
        }
        let (s, _) = self.seg_of(v);
        self.flip_base[v] ^ self.segs[s].rev
    }

    pub fn order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        for s in &self.segs {
            for off in 0..s.len() {
                out.push(self.base[s.at(off) as usize] as usize);
            }
        }
        out
    }

    pub fn flips(&self) -> Vec<bool> {
        (0..self.n).map(|v| self.flipped(v)).collect()
    }

    /// Successor array of the current cycle.
    pub fn successors(&self) -> Vec<usize> {
        let ord = self.order();
        let mut s = vec![0; self.n];
        for i in 0..self.n {
            s[ord[i]] = ord[(i + 1) % self.n];
        }
        s
    }

    pub fn is_host_arc(&self, u: usize, v: usize) -> bool {
        self.host.arc(u, self.flipped(u), v, self.flipped(v))
    }

    fn arc_is_pseudo(&self, u: usize) -> bool {
        !self.is_host_arc(u, self.succ(u))
    }

    fn key(u: usize, v: usize) -> (u32, u32) {
        (u.min(v) as u32, u.max(v) as u32)
    }

    fn mark(&mut self, u: usize) {
        if self.is_directed() {
            self.verts.insert(u as u32);
        } else {
            self.pairs.insert(Self::key(u, self.succ(u)));
        }
    }

    fn unmark(&mut self, u: usize) {
        if self.is_directed() {
            self.verts.swap_remove(&(u as u32));
        } else {
            self.pairs.swap_remove(&Self::key(u, self.succ(u)));
        }
    }

    fn refresh(&mut self, u: usize) {
        if self.arc_is_pseudo(u) {
            self.mark(u);
        }
    }

    pub fn pseudo_count(&self) -> usize {
        if self.is_directed() {
            self.verts.len()
        } else {
            self.pairs.len()
        }
    }

    pub fn is_hamiltonian(&self) -> bool {
        self.pseudo_count() == 0
    }

    pub fn is_pseudo_vertex(&self, v: usize) -> bool {
        if self.is_directed() {
            self.verts.contains(&(v as u32))
        } else {
            self.pairs.contains(&Self::key(v, self.succ(v)))
        }
    }

    /// Tails of pseudo-arcs, sorted.
    pub fn pseudo_vertices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = if self.is_directed() {
            self.verts.iter().map(|&v| v as usize).collect()
        } else {
            self.pairs.iter().map(|&(a, b)| self.tail_of(a as usize, b as usize)).collect()
        };
        out.sort_unstable();
        out
    }

    fn tail_of(&self, a: usize, b: usize) -> usize {
        if self.succ(a) == b {
            a
        } else {
            b
        }
    }

    /// Uniformly random pseudo-arc tail.
    pub fn random_pseudo(&self, rng: &mut impl Rng) -> Option<usize> {
        let k = self.pseudo_count();
        if k == 0 {
            return None;
        }
        let i = rng.gen_range(0..k);
        Some(if self.is_directed() {
            self.verts[i] as usize
        } else {
            let (a, b) = self.pairs[i];
            self.tail_of(a as usize, b as usize)
        })
    }

    /// Full membership recount, independent of the registry.
    pub fn pseudo_recount(&self) -> Vec<usize> {
        let s = self.successors();
        let mut out: Vec<usize> = (0..self.n).filter(|&v| !self.is_host_arc(v, s[v])).collect();
        out.sort_unstable();
        out
    }

    pub fn is_admissible(&self, m: &Move) -> bool {
        if !m.distinct() || m.vertices().iter().any(|&v| v as usize >= self.n) {
            return false;
        }
        match *m {
            Move::Three([a, b, c]) => {
                is_cyclic_order(self.pos(a as usize), self.pos(b as usize), self.pos(c as usize), self.n)
            }
            Move::Potdt([a, c, b, d]) => chords_interlace(
                self.pos(a as usize),
                self.pos(c as usize),
                self.pos(b as usize),
                self.pos(d as usize),
                self.n,
            ),
        }
    }

    pub fn admissible_3cycle(&self, a: usize, b: usize, c: usize) -> Result<bool, TourError> {
        let m = Move::three(a, b, c);
        if !m.distinct() {
            return Err(TourError::NotDistinct);
        }
        Ok(self.is_admissible(&m))
    }

    pub fn admissible_potdt(&self, a: usize, c: usize, b: usize, d: usize) -> Result<bool, TourError> {
        let m = Move::potdt(a, c, b, d);
        if !m.distinct() {
            return Err(TourError::NotDistinct);
        }
        Ok(self.is_admissible(&m))
    }

    /// Arcs x -> h(s(x)) the move would create, one per moved point.
    pub fn new_arcs(&self, m: &Move) -> ([(usize, usize); 4], usize) {
        let mut out = [(0, 0); 4];
        let vs = m.vertices();
        for (i, &x) in vs.iter().enumerate() {
            out[i] = (x as usize, self.succ(m.image(x as usize)));
        }
        (out, vs.len())
    }

    /// Host arcs created minus arc vertices consumed.
    pub fn diff_score(&self, m: &Move) -> i32 {
        let (arcs, k) = self.new_arcs(m);
        let e = arcs[..k].iter().filter(|&&(u, v)| self.is_host_arc(u, v)).count() as i32;
        let a = m.vertices().iter().filter(|&&x| !self.is_pseudo_vertex(x as usize)).count() as i32;
        e - a
    }

    /// Pseudo-arcs among the arcs `m` would create.
    pub fn new_pseudo_arcs(&self, m: &Move) -> usize {
        let (arcs, k) = self.new_arcs(m);
        arcs[..k].iter().filter(|&&(u, v)| !self.is_host_arc(u, v)).count()
    }

    fn split(&mut self, pos: usize) -> usize {
        if pos >= self.n {
            return self.segs.len();
        }
        let s = self.starts.partition_point(|&x| x as usize <= pos) - 1;
        let off = pos - self.starts[s] as usize;
        if off == 0 {
            return s;
        }
        let sg = self.segs[s];
        let o = off as u32;
        let (a, b) = if sg.rev {
            (Seg { lo: sg.hi - o + 1, hi: sg.hi, rev: true }, Seg { lo: sg.lo, hi: sg.hi - o, rev: true })
        } else {
            (Seg { lo: sg.lo, hi: sg.lo + o - 1, rev: false }, Seg { lo: sg.lo + o, hi: sg.hi, rev: false })
        };
        self.segs[s] = a;
        self.segs.insert(s + 1, b);
        self.starts.insert(s + 1, pos as u32);
        s + 1
    }

    /// Cuts after each position in `cuts` (ascending) and reorders the pieces.
    fn permute_blocks(&mut self, cuts: &[usize], order: &[usize]) {
        for &c in cuts {
            self.split(c + 1);
        }
        let mut bounds = vec![0];
        for &c in cuts {
            bounds.push(if c + 1 >= self.n { self.segs.len() } else { self.starts.binary_search(&(c as u32 + 1)).unwrap() });
        }
        bounds.push(self.segs.len());
        let mut out = Vec::with_capacity(self.segs.len());
        for &b in order {
            out.extend_from_slice(&self.segs[bounds[b]..bounds[b + 1]]);
        }
        self.segs = out;
        self.reindex();
    }

    fn bump(&mut self) {
        self.moves += 1;
        self.since_rebase += 1;
        if self.since_rebase >= self.cadence {
            self.rebase();
        }
    }

    /// Applies h -> h∘s.
    pub fn apply(&mut self, m: &Move) -> Result<(), TourError> {
        if !m.distinct() {
            return Err(TourError::NotDistinct);
        }
        if !self.is_admissible(m) {
            return Err(TourError::NotAdmissible(m.to_string()));
        }
        let tails: Vec<usize> = m.vertices().iter().map(|&v| v as usize).collect();
        for &t in &tails {
            self.unmark(t);
        }
        match *m {
            Move::Three([a, b, c]) => {
                let mut p = [self.pos(a as usize), self.pos(b as usize), self.pos(c as usize)];
                // rotate so positions ascend; admissibility makes that possible
                while !(p[0] < p[1] && p[1] < p[2]) {
                    p.rotate_left(1);
                }
                self.permute_blocks(&p, &[0, 2, 1, 3]);
            }
            Move::Potdt([a, c, b, d]) => {
                let mut p = [
                    self.pos(a as usize),
                    self.pos(c as usize),
                    self.pos(b as usize),
                    self.pos(d as usize),
                ];
                p.sort_unstable();
                self.permute_blocks(&p, &[0, 3, 2, 1, 4]);
            }
        }
        for &t in &tails {
            self.refresh(t);
        }
        self.bump();
        Ok(())
    }

    fn reverse_positions(&mut self, i: usize, j: usize) {
        let si = self.split(i);
        let sj = self.split(j + 1);
        self.segs[si..sj].reverse();
        for s in &mut self.segs[si..sj] {
            s.rev = !s.rev;
        }
        self.reindex();
    }

    fn rotate_to(&mut self, pos: usize) {
        let s = self.split(pos);
        self.segs.rotate_left(s);
        self.reindex();
    }

    /// Reverses the path running forward from `v` to `w`, keeping the start vertex first.
    pub fn reverse_path(&mut self, v: usize, w: usize) {
        if v == w {
            return;
        }
        let p = self.pred(v);
        let s = self.succ(w);
        // a whole-cycle reversal keeps every arc's status
        let whole = s == v;
        if !whole {
            self.unmark(p);
            self.unmark(w);
        }
        let pv = self.pos(v);
        let pw = self.pos(w);
        if pv <= pw {
            self.reverse_positions(pv, pw);
        } else {
            let len = pw + self.n - pv + 1;
            self.rotate_to(pv);
            self.reverse_positions(0, len - 1);
            let ps = self.pos(self.start as usize);
            self.rotate_to(ps);
        }
        if !whole {
            self.refresh(p);
            self.refresh(v);
        }
        self.bump();
    }

    /// Rotation at v toward w: the path v, x1, …, w becomes v, w, …, x1.
    pub fn rotate(&mut self, v: usize, w: usize) -> Result<(), TourError> {
        if self.is_directed() {
            return Err(TourError::Directed);
        }
        if v == w || w == self.succ(v) || w == self.pred(v) {
            return Err(TourError::NotHostEdge(v + 1, w + 1));
        }
        // after reversal w is entered from v through its current exit side
        let fw = !self.flipped(w);
        if !self.host.arc(v, self.flipped(v), w, fw) {
            return Err(TourError::NotHostEdge(v + 1, w + 1));
        }
        let x1 = self.succ(v);
        self.reverse_path(x1, w);
        Ok(())
    }

    /// Whether `rotate(v, w)` would be accepted.
    pub fn can_rotate(&self, v: usize, w: usize) -> bool {
        !self.is_directed()
            && v != w
            && w != self.succ(v)
            && w != self.pred(v)
            && self.host.arc(v, self.flipped(v), w, !self.flipped(w))
    }

    /// Turns a 2-vertex around in place.
    pub fn flip(&mut self, v: usize) -> Result<(), TourError> {
        if self.is_directed() {
            return Err(TourError::Directed);
        }
        if !self.host.has_sides(v) {
            return Err(TourError::NoSides(v + 1));
        }
        let p = self.pred(v);
        self.unmark(p);
        self.unmark(v);
        self.flip_base[v] = !self.flip_base[v];
        self.refresh(p);
        self.refresh(v);
        self.bump();
        Ok(())
    }

    pub fn abbreviation(&self) -> Abbreviation {
        Abbreviation {
            n: self.n,
            runs: self
                .segs
                .iter()
                .map(|s| {
                    if s.rev {
                        Run { first: s.hi + 1, last: s.lo + 1 }
                    } else {
                        Run { first: s.lo + 1, last: s.hi + 1 }
                    }
                })
                .collect(),
            moves: self.since_rebase,
        }
    }

    pub fn base_order(&self) -> Vec<usize> {
        self.base.iter().map(|&v| v as usize).collect()
    }

    /// Flattens the runs into a fresh base order.
    pub fn rebase(&mut self) {
        let flips = self.flips();
        let order = self.order();
        for (i, &v) in order.iter().enumerate() {
            self.base[i] = v as u32;
            self.base_ord[v] = i as u32;
        }
        if !self.is_directed() {
            self.flip_base = flips;
        }
        self.segs = vec![Seg { lo: 0, hi: self.n as u32 - 1, rev: false }];
        self.since_rebase = 0;
        self.reindex();
    }

    /// Number of cycles of the successor map after composing with `s`.
    pub fn cycle_count_after(&self, s: &dyn Fn(usize) -> usize) -> usize {
        let succ = self.successors();
        let mut seen = vec![false; self.n];
        let mut cycles = 0;
        for v in 0..self.n {
            if !seen[v] {
                cycles += 1;
                let mut x = v;
                while !seen[x] {
                    seen[x] = true;
                    x = succ[s(x)];
                }
            }
        }
        cycles
    }

    /// Debug dump: the order, then pseudo-arcs as u~v.
    pub fn dump(&self) -> String {
        let pseudo: Vec<String> =
            self.pseudo_vertices().iter().map(|&u| format!("{}~{}", u + 1, self.succ(u) + 1)).collect();
        format!("{self}\n{}", pseudo.join(" "))
    }
}

impl fmt::Display for Tour<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .order()
            .into_iter()
            .map(|v| if self.flipped(v) { format!("-{}", v + 1) } else { format!("{}", v + 1) })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

impl fmt::Debug for Tour<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tour({self})")
    }
}

impl PartialEq for Tour<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.order() == other.order() && self.flips() == other.flips()
    }
}
