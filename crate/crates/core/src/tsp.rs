//! Symmetric TSP heuristic: good rotations (2-opt) and good admissible permutations,
//! optionally chained with follow-up rotations.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::Serialize;
use thiserror::Error;

use crate::graphgen::rng;
use crate::tour::{Complete, Move, Tour, TourError};

#[derive(Debug, Error)]
pub enum TspError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("weight matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("nonzero diagonal at {0}")]
    Diagonal(usize),
    #[error("need at least 4 cities, got {0}")]
    TooSmall(usize),
    #[error("{0} and {1} are adjacent on the tour")]
    Adjacent(usize, usize),
    #[error("move is not admissible")]
    NotAdmissible,
    #[error(transparent)]
    Tour(#[from] TourError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightMatrix {
    n: usize,
    w: Vec<u64>,
}

impl WeightMatrix {
    pub fn new(n: usize, rows: Vec<Vec<u64>>) -> Result<Self, TspError> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(TspError::Parse { line: 0, msg: format!("expected {n} rows of {n} weights") });
        }
        for i in 0..n {
            if rows[i][i] != 0 {
                return Err(TspError::Diagonal(i + 1));
            }
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(TspError::Asymmetric(j + 1, i + 1));
                }
            }
        }
        Ok(WeightMatrix { n, w: rows.into_iter().flatten().collect() })
    }

    /// Builds from a function on unordered pairs i < j.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> u64) -> Self {
        let mut w = vec![0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let x = f(i, j);
                w[i * n + j] = x;
                w[j * n + i] = x;
            }
        }
        WeightMatrix { n, w }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self, i: usize, j: usize) -> u64 {
        self.w[i * self.n + j]
    }

    pub fn parse(text: &str) -> Result<Self, TspError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, head) = lines.next().ok_or(TspError::Parse { line: 1, msg: "empty input".into() })?;
        let mut it = head.split_whitespace();
        if it.next() != Some("w") {
            return Err(TspError::Parse { line: ln, msg: "header must be \"w n\"".into() });
        }
        let n: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or(TspError::Parse { line: ln, msg: "bad city count".into() })?;
        let mut rows = Vec::with_capacity(n);
        for (ln, l) in lines {
            let row: Result<Vec<u64>, _> = l.split_whitespace().map(str::parse).collect();
            let row = row.map_err(|e| TspError::Parse { line: ln, msg: e.to_string() })?;
            if row.len() != n {
                return Err(TspError::Parse { line: ln, msg: format!("expected {n} weights, got {}", row.len()) });
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(TspError::Parse { line: 0, msg: format!("expected {n} rows, got {}", rows.len()) });
        }
        Self::new(n, rows)
    }

    pub fn format(&self) -> String {
        let mut s = format!("w {}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.w(i, j).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, TspError> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

pub fn tour_weight(wm: &WeightMatrix, t: &Tour) -> u64 {
    (0..t.len()).map(|v| wm.w(v, t.succ(v))).sum()
}

/// Weight of a cyclic order given as a vertex list.
pub fn order_weight(wm: &WeightMatrix, order: &[usize]) -> u64 {
    let n = order.len();
    (0..n).map(|i| wm.w(order[i], order[(i + 1) % n])).sum()
}

fn rotation_delta(wm: &WeightMatrix, t: &Tour, x: usize, y: usize) -> i64 {
    let (hx, hy) = (t.succ(x), t.succ(y));
    (wm.w(x, y) + wm.w(hx, hy)) as i64 - (wm.w(x, hx) + wm.w(y, hy)) as i64
}

pub fn is_good_rotation(wm: &WeightMatrix, t: &Tour, x: usize, y: usize) -> Result<bool, TspError> {
    if x == y || t.succ(x) == y || t.pred(x) == y {
        return Err(TspError::Adjacent(x + 1, y + 1));
    }
    Ok(rotation_delta(wm, t, x, y) < 0)
}

fn move_delta(wm: &WeightMatrix, t: &Tour, m: &Move) -> i64 {
    let (arcs, k) = t.new_arcs(m);
    let made: u64 = arcs[..k].iter().map(|&(u, v)| wm.w(u, v)).sum();
    let gone: u64 = m.vertices().iter().map(|&v| wm.w(v as usize, t.succ(v as usize))).sum();
    made as i64 - gone as i64
}

pub fn is_good_set(wm: &WeightMatrix, t: &Tour, m: &Move) -> Result<bool, TspError> {
    if !t.is_admissible(m) {
        return Err(TspError::NotAdmissible);
    }
    Ok(move_delta(wm, t, m) < 0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BestQueue {
    pub tour: Vec<usize>,
    pub weight: u64,
    pub updates: usize,
}

impl BestQueue {
    pub fn new(tour: Vec<usize>, weight: u64) -> Self {
        BestQueue { tour, weight, updates: 0 }
    }

    /// Keeps the lighter of the two; returns whether it replaced the current best.
    pub fn offer(&mut self, tour: &[usize], weight: u64) -> bool {
        if weight < self.weight {
            self.tour = tour.to_vec();
            self.weight = weight;
            self.updates += 1;
            true
        } else {
            false
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Step {
    Rotation { x: usize, y: usize, before: u64, after: u64 },
    Composite { permutation: String, rotations: Vec<(usize, usize)>, before: u64, after: u64 },
}

impl Step {
    pub fn weights(&self) -> (u64, u64) {
        match self {
            Step::Rotation { before, after, .. } | Step::Composite { before, after, .. } => (*before, *after),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TspResult {
    pub tour: Vec<usize>,
    pub weight: u64,
    pub initial_weight: u64,
    pub best: BestQueue,
    pub trace: Vec<Step>,
    /// stopped by the evaluation budget rather than by a local optimum
    pub exhausted: bool,
}

struct Run<'a, 'h> {
    wm: &'a WeightMatrix,
    t: Tour<'h>,
    weight: u64,
    trace: Vec<Step>,
    best: BestQueue,
    budget: u64,
}

impl Run<'_, '_> {
    fn spend(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        true
    }

    fn record(&mut self, step: Step) {
        self.weight = step.weights().1;
        debug_assert_eq!(self.weight, tour_weight(self.wm, &self.t));
        self.trace.push(step);
        let order = self.t.order();
        self.best.offer(&order, self.weight);
    }

    /// Good rotations until none is left.
    fn sweep(&mut self) -> bool {
        let n = self.t.len();
        loop {
            let mut moved = false;
            for x in 0..n {
                for y in 0..n {
                    if y == x || y == self.t.succ(x) || y == self.t.pred(x) {
                        continue;
                    }
                    if !self.spend() {
                        return false;
                    }
                    let d = rotation_delta(self.wm, &self.t, x, y);
                    if d < 0 {
                        let before = self.weight;
                        self.t.rotate(x, y).expect("complete host");
                        self.record(Step::Rotation { x: x + 1, y: y + 1, before, after: (before as i64 + d) as u64 });
                        moved = true;
                    }
                }
            }
            if !moved {
                return true;
            }
        }
    }

    /// Best rotation with an endpoint in `at`, on a scratch tour.
    fn best_rotation(&self, t: &Tour, at: &[usize]) -> Option<(usize, usize, i64)> {
        let n = t.len();
        let mut best: Option<(usize, usize, i64)> = None;
        for &x in at {
            for y in 0..n {
                if y == x || y == t.succ(x) || y == t.pred(x) {
                    continue;
                }
                let d = rotation_delta(self.wm, t, x, y);
                if best.is_none_or(|b| d < b.2) {
                    best = Some((x, y, d));
                }
            }
        }
        best
    }

    /// A good composite through `a`: the permutation alone, or followed by up to
    /// `max_rot` rotations at its vertices, with net weight decrease.
    fn composite_at(&mut self, a: usize) -> Option<bool> {
        let n = self.t.len();
        let mut cands = Vec::new();
        for b in 0..n {
            for c in 0..n {
                if b != a && c != a && b != c {
                    cands.push((Move::three(a, b, c), 1));
                }
            }
        }
        for c in 0..n {
            for b in 0..n {
                for d in b + 1..n {
                    if c != a && ![a, c].contains(&b) && ![a, c].contains(&d) {
                        cands.push((Move::potdt(a, c, b, d), 2));
                    }
                }
            }
        }
        for (m, max_rot) in cands {
            if !self.spend() {
                return None;
            }
            if !self.t.is_admissible(&m) {
                continue;
            }
            let d0 = move_delta(self.wm, &self.t, &m);
            let mut scratch = self.t.clone();
            scratch.apply(&m).expect("admissible");
            let mut total = d0;
            let mut rots = Vec::new();
            let verts: Vec<usize> = m.vertices().iter().map(|&v| v as usize).collect();
            while rots.len() < max_rot {
                match self.best_rotation(&scratch, &verts) {
                    Some((x, y, d)) if d < 0 => {
                        scratch.rotate(x, y).expect("complete host");
                        total += d;
                        rots.push((x, y));
                    }
                    _ => break,
                }
            }
            if total < 0 {
                let before = self.weight;
                self.t = scratch;
                let permutation = m.to_string();
                let rotations = rots.iter().map(|&(x, y)| (x + 1, y + 1)).collect();
                self.record(Step::Composite { permutation, rotations, before, after: (before as i64 + total) as u64 });
                return Some(true);
            }
        }
        Some(false)
    }
}

/// Seeded random start, rotation sweep, then good composites until none exists at any
/// vertex or `budget` evaluations are spent.
pub fn tsp_solve(wm: &WeightMatrix, seed: u64, budget: u64) -> Result<TspResult, TspError> {
    let n = wm.n();
    if n < 4 {
        return Err(TspError::TooSmall(n));
    }
    let host = Complete(n);
    let mut r = rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order[1..].shuffle(&mut r);
    let t = Tour::new(&host, &order)?;
    let initial = tour_weight(wm, &t);
    let mut run = Run { wm, t, weight: initial, trace: Vec::new(), best: BestQueue::new(order, initial), budget };
    let mut exhausted = !run.sweep();
    while !exhausted {
        let mut improved = false;
        for a in 0..n {
            match run.composite_at(a) {
                None => {
                    exhausted = true;
                    break;
                }
                Some(true) => {
                    improved = true;
                    if !run.sweep() {
                        exhausted = true;
                    }
                    break;
                }
                Some(false) => {}
            }
        }
        if !improved {
            break;
        }
    }
    let tour = run.t.order();
    Ok(TspResult { weight: run.weight, tour, initial_weight: initial, best: run.best, trace: run.trace, exhausted })
}

/// Exhaustive optimum for small instances; vertex 0 fixed, one direction per cycle.
pub fn brute_force_optimum(wm: &WeightMatrix) -> (Vec<usize>, u64) {
    let n = wm.n();
    let mut best = (vec![], u64::MAX);
    let mut rest: Vec<usize> = (1..n).collect();
    fn go(wm: &WeightMatrix, k: usize, rest: &mut Vec<usize>, best: &mut (Vec<usize>, u64)) {
        if k == rest.len() {
            if rest.first() < rest.last() || rest.len() < 2 {
                let mut o = vec![0];
                o.extend_from_slice(rest);
                let w = order_weight(wm, &o);
                if w < best.1 {
                    *best = (o, w);
                }
            }
            return;
        }
        for i in k..rest.len() {
            rest.swap(k, i);
            go(wm, k + 1, rest, best);
            rest.swap(k, i);
        }
    }
    go(wm, 0, &mut rest, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn four_city() -> WeightMatrix {
        WeightMatrix::parse("w 4\n0 1 2 5\n1 0 5 2\n2 5 0 1\n5 2 1 0\n").unwrap()
    }

    #[test]
    fn weights() {
        let wm = four_city();
        let h = Complete(4);
        assert_eq!(tour_weight(&wm, &Tour::new(&h, &[0, 1, 2, 3]).unwrap()), 12);
        assert_eq!(tour_weight(&wm, &Tour::new(&h, &[0, 1, 3, 2]).unwrap()), 6);
        assert_eq!(brute_force_optimum(&wm).1, 6);
    }

    #[test]
    fn good_rotation() {
        let wm = four_city();
        let h = Complete(4);
        let t = Tour::new(&h, &[0, 1, 2, 3]).unwrap();
        assert!(is_good_rotation(&wm, &t, 1, 3).unwrap());
        assert!(!is_good_rotation(&wm, &t, 0, 2).unwrap());
        assert!(is_good_rotation(&wm, &t, 0, 1).is_err());
    }

    #[test]
    fn parse_rejects() {
        assert!(matches!(WeightMatrix::parse("w 2\n0 1\n2 0\n"), Err(TspError::Asymmetric(1, 2))));
        assert!(matches!(WeightMatrix::parse("w 2\n1 1\n1 0\n"), Err(TspError::Diagonal(1))));
        assert!(matches!(WeightMatrix::parse("w 2\n0 1\n"), Err(TspError::Parse { .. })));
        let wm = four_city();
        assert_eq!(WeightMatrix::parse(&wm.format()).unwrap(), wm);
    }

    #[test]
    fn solves_four_city() {
        for seed in 0..10 {
            let r = tsp_solve(&four_city(), seed, 100_000).unwrap();
            assert_eq!(r.weight, 6);
        }
    }

    #[test]
    fn zero_matrix() {
        let wm = WeightMatrix::from_fn(6, |_, _| 0);
        let r = tsp_solve(&wm, 1, 100_000).unwrap();
        assert_eq!(r.weight, 0);
        assert!(r.trace.is_empty());
    }
}
