//! The iteration loops for graphs (moves plus rotations) and digraphs (moves plus backtracking).

use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::contract::{contract_digraph, contract_graph, ContractedGraph, Reduction};
use crate::graphgen::{rng, AnyGraph, Digraph, DetRng, Graph};
use crate::tour::{Host, Move, Port, Tour};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Default,
    Thorough,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StartMode {
    Any,
    Complement,
}

/// Unset fields are derived from the contracted order n.
#[derive(Clone, Debug)]
pub struct SolveParams {
    pub seed: u64,
    pub preset: Preset,
    pub start: StartMode,
    pub edge_cap: Option<usize>,
    pub test_cap: Option<usize>,
    /// Iterations per phase.
    pub phase_budget: Option<usize>,
    pub cadence: Option<usize>,
    pub backtrack_cap: Option<usize>,
    pub wall_limit: Option<Duration>,
}

impl SolveParams {
    pub fn new(seed: u64) -> Self {
        SolveParams {
            seed,
            preset: Preset::Default,
            start: StartMode::Any,
            edge_cap: None,
            test_cap: None,
            phase_budget: None,
            cadence: None,
            backtrack_cap: None,
            wall_limit: None,
        }
    }

    pub fn thorough(seed: u64, wall_limit: Duration) -> Self {
        SolveParams { preset: Preset::Thorough, wall_limit: Some(wall_limit), ..SolveParams::new(seed) }
    }

    pub fn resolve(&self, n: usize) -> Limits {
        let l = ceil_ln(n);
        let phase = match self.preset {
            Preset::Default => 2 * n * l,
            Preset::Thorough => 12usize.saturating_mul(n.pow(3)).saturating_mul(l),
        };
        Limits {
            edge_cap: self.edge_cap.unwrap_or(l).max(1),
            test_cap: self.test_cap.unwrap_or(2 * l * l).max(1),
            phase1: self.phase_budget.unwrap_or(phase).max(1),
            phase2: self.phase_budget.unwrap_or(phase).max(1),
            cadence: self.cadence.unwrap_or(((n as f64).sqrt() as usize).max(1)),
        }
    }
}

/// ⌈ln n⌉, at least 1.
pub fn ceil_ln(n: usize) -> usize {
    ((n.max(2) as f64).ln().ceil() as usize).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Limits {
    pub edge_cap: usize,
    pub test_cap: usize,
    pub phase1: usize,
    pub phase2: usize,
    pub cadence: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Circuit,
    Timeout,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveReport {
    pub outcome: Outcome,
    /// 0-based host vertices.
    pub circuit: Option<Vec<usize>>,
    pub reason: Option<String>,
    pub contracted_order: usize,
    pub iterations: usize,
    pub successes: usize,
    pub failures: usize,
    pub backtracks: usize,
    pub rotations: usize,
    pub flips: usize,
    pub final_pseudo: usize,
    /// |PSEUDO| before the first iteration and after each one.
    pub trajectory: Vec<u32>,
}

impl SolveReport {
    fn infeasible(reason: impl Into<String>) -> Self {
        SolveReport {
            outcome: Outcome::Infeasible,
            circuit: None,
            reason: Some(reason.into()),
            contracted_order: 0,
            iterations: 0,
            successes: 0,
            failures: 0,
            backtracks: 0,
            rotations: 0,
            flips: 0,
            final_pseudo: 0,
            trajectory: vec![],
        }
    }

    fn forced(circuit: Vec<usize>) -> Self {
        SolveReport {
            outcome: Outcome::Circuit,
            circuit: Some(circuit),
            reason: Some("forced edges close a Hamilton circuit".into()),
            ..SolveReport::infeasible("")
        }
    }
}

/// True iff `circuit` is a permutation of the host's vertices joined cyclically by host edges/arcs.
pub fn verify_circuit(host: &dyn Host, circuit: &[usize]) -> bool {
    verify_oriented(host, circuit, &vec![false; host.order()])
}

pub fn verify_oriented(host: &dyn Host, circuit: &[usize], flips: &[bool]) -> bool {
    let n = host.order();
    if circuit.len() != n || n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in circuit {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    (0..n).all(|i| {
        let (u, v) = (circuit[i], circuit[(i + 1) % n]);
        u != v && host.arc(u, flips[u], v, flips[v])
    })
}

pub fn verify(g: &AnyGraph, circuit: &[usize]) -> bool {
    match g {
        AnyGraph::Graph(g) => g.order() >= 3 && verify_circuit(g, circuit),
        AnyGraph::Digraph(d) => d.order() >= 2 && verify_circuit(d, circuit),
    }
}

/// Random closed walk over all vertices none of whose arcs is a host arc.
pub fn complement_cycle(host: &dyn Host, r: &mut DetRng, step_budget: usize) -> Option<(Vec<usize>, Vec<bool>)> {
    let n = host.order();
    if n < 3 {
        return None;
    }
    let sided = |v: usize| !host.is_directed() && host.has_sides(v);
    let start = r.gen_range(0..n);
    let fs = sided(start) && r.gen_bool(0.5);
    let mut used = vec![false; n];
    used[start] = true;
    let mut path = vec![(start, fs)];
    let mut options: Vec<Vec<(usize, bool)>> = Vec::new();
    let mut steps = 0usize;
    let fresh = |last: (usize, bool), used: &Vec<bool>, r: &mut DetRng| {
        let mut c: Vec<(usize, bool)> = Vec::new();
        for w in 0..n {
            if used[w] {
                continue;
            }
            let fl: &[bool] = if sided(w) { &[false, true] } else { &[false] };
            for &fw in fl {
                if !host.arc(last.0, last.1, w, fw) {
                    c.push((w, fw));
                }
            }
        }
        c.shuffle(r);
        c
    };
    options.push(fresh(path[0], &used, r));
    while let Some(top) = options.last_mut() {
        steps += 1;
        if steps > step_budget {
            return None;
        }
        if path.len() == n {
            let last = *path.last().unwrap();
            if !host.arc(last.0, last.1, start, fs) {
                let order = path.iter().map(|p| p.0).collect();
                let mut flips = vec![false; n];
                for &(v, f) in &path {
                    flips[v] = f;
                }
                return Some((order, flips));
            }
            options.pop();
            let (v, _) = path.pop().unwrap();
            used[v] = false;
            continue;
        }
        match top.pop() {
            Some(next) => {
                used[next.0] = true;
                path.push(next);
                let o = fresh(next, &used, r);
                options.push(o);
            }
            None => {
                options.pop();
                if path.len() == 1 {
                    return None;
                }
                let (v, _) = path.pop().unwrap();
                used[v] = false;
            }
        }
    }
    None
}

pub fn initial_tour<'h>(host: &'h dyn Host, mode: StartMode, r: &mut DetRng) -> Result<Tour<'h>, String> {
    let n = host.order();
    match mode {
        StartMode::Any => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(r);
            let flips: Vec<bool> =
                (0..n).map(|v| !host.is_directed() && host.has_sides(v) && r.gen_bool(0.5)).collect();
            Tour::with_flips(host, &order, &flips).map_err(|e| e.to_string())
        }
        StartMode::Complement => {
            for _ in 0..8 {
                if let Some((order, flips)) = complement_cycle(host, r, 50 * n * n + 1000) {
                    return Tour::with_flips(host, &order, &flips).map_err(|e| e.to_string());
                }
            }
            Err("no tour avoiding every host edge was found (host too dense)".into())
        }
    }
}

struct Counters {
    iterations: usize,
    successes: usize,
    failures: usize,
    backtracks: usize,
    rotations: usize,
    flips: usize,
    trajectory: Vec<u32>,
}

struct Search<'h, 'r> {
    t: Tour<'h>,
    lim: Limits,
    r: &'r mut DetRng,
    back: VecDeque<Move>,
    back_cap: Option<usize>,
    buf: Vec<Port>,
    buf2: Vec<Port>,
}

struct Cand {
    m: Move,
    diff: i32,
    key: u32,
}

impl<'h, 'r> Search<'h, 'r> {
    fn directed(&self) -> bool {
        self.t.is_directed()
    }

    /// Up to `cap` heads x with v -> x a host arc off the tour.
    fn out_sample(&mut self, v: usize) -> Vec<usize> {
        let host = self.t.host();
        let fv = self.t.flipped(v);
        host.ports(v, host.exit_side(v, fv), &mut self.buf);
        self.buf.shuffle(self.r);
        let (sv, pv) = (self.t.succ(v), self.t.pred(v));
        let mut out = Vec::with_capacity(self.lim.edge_cap);
        for p in &self.buf {
            let x = p.vertex as usize;
            if x == sv || x == pv || x == v {
                continue;
            }
            if host.has_sides(x) && !self.directed() && p.side != host.entry_side(x, self.t.flipped(x)) {
                continue;
            }
            out.push(x);
            if out.len() == self.lim.edge_cap {
                break;
            }
        }
        out
    }

    /// Up to `cap` tails c with c -> v a host arc off the tour.
    fn in_sample(&mut self, v: usize) -> Vec<usize> {
        let host = self.t.host();
        let fv = self.t.flipped(v);
        host.in_ports(v, host.entry_side(v, fv), &mut self.buf2);
        self.buf2.shuffle(self.r);
        let (sv, pv) = (self.t.succ(v), self.t.pred(v));
        let mut out = Vec::with_capacity(self.lim.edge_cap);
        for p in &self.buf2 {
            let c = p.vertex as usize;
            if c == sv || c == pv || c == v {
                continue;
            }
            if host.has_sides(c) && !self.directed() && p.side != host.exit_side(c, self.t.flipped(c)) {
                continue;
            }
            out.push(c);
            if out.len() == self.lim.edge_cap {
                break;
            }
        }
        out
    }

    fn consider(&self, m: Move, key: u32, out: &mut Vec<Cand>, tests: &mut usize) {
        let vs = m.vertices();
        if (0..vs.len()).any(|i| (i + 1..vs.len()).any(|j| vs[i] == vs[j])) {
            return;
        }
        *tests += 1;
        if !self.t.is_admissible(&m) {
            return;
        }
        // at most one of the created arcs may be a pseudo-arc
        if self.t.new_pseudo_arcs(&m) > 1 {
            return;
        }
        out.push(Cand { m, diff: self.t.diff_score(&m), key });
    }

    fn candidates(&mut self, a: usize) -> Vec<Cand> {
        let ha = self.t.succ(a);
        let cap = self.lim.test_cap;
        let mut out = Vec::new();
        let mut tests = 0;
        let xs = self.out_sample(a);
        let ys = self.in_sample(ha);
        'outer: for &x in &xs {
            let b = self.t.pred(x);
            for &c in &ys {
                self.consider(Move::three(a, b, c), x as u32, &mut out, &mut tests);
                if tests >= cap {
                    break 'outer;
                }
            }
            for y in self.out_sample(b) {
                let c = self.t.pred(y);
                self.consider(Move::three(a, b, c), x as u32, &mut out, &mut tests);
                if tests >= cap {
                    break 'outer;
                }
            }
        }
        if out.is_empty() && self.t.pseudo_count() >= 2 {
            let mut v = a;
            for _ in 0..8 {
                v = self.t.random_pseudo(self.r).unwrap();
                if v != a {
                    break;
                }
            }
            if v != a {
                let zs = self.out_sample(v);
                let mut tests = 0;
                'pot: for &x in &xs {
                    let c = self.t.pred(x);
                    for &z in &zs {
                        let d = self.t.pred(z);
                        self.consider(Move::potdt(a, c, v, d), x as u32, &mut out, &mut tests);
                        if tests >= cap {
                            break 'pot;
                        }
                    }
                }
            }
        }
        out
    }

    /// Highest DIFF, then most shared first edge, then random; skips the latest BACKTRACK entry.
    fn pick(&mut self, cands: &[Cand]) -> Option<Move> {
        let latest = self.back.front().copied();
        let mut share: HashMap<u32, usize> = HashMap::new();
        for c in cands {
            *share.entry(c.key).or_default() += 1;
        }
        let pool: Vec<&Cand> = cands.iter().filter(|c| Some(c.m) != latest).collect();
        let best = pool.iter().map(|c| (c.diff, share[&c.key])).max()?;
        let top: Vec<&&Cand> = pool.iter().filter(|c| (c.diff, share[&c.key]) == best).collect();
        Some(top[self.r.gen_range(0..top.len())].m)
    }

    fn push_back(&mut self, m: &Move) {
        self.back.push_front(m.inverse());
        if let Some(cap) = self.back_cap {
            while self.back.len() > cap {
                self.back.pop_back();
            }
        }
    }

    /// Turns 2-vertex v around if that removes pseudo-arcs.
    fn try_flip(&mut self, v: usize) -> bool {
        if self.directed() || !self.t.host().has_sides(v) {
            return false;
        }
        let p = self.t.pred(v);
        let s = self.t.succ(v);
        let host = self.t.host();
        let f = self.t.flipped(v);
        let now = !self.t.is_host_arc(p, v) as i32 + !self.t.is_host_arc(v, s) as i32;
        let fp = self.t.flipped(p);
        let fs = self.t.flipped(s);
        let after = !host.arc(p, fp, v, !f) as i32 + !host.arc(v, !f, s, fs) as i32;
        if after < now {
            self.t.flip(v).unwrap();
            true
        } else {
            false
        }
    }

    fn rotate_somewhere(&mut self) -> bool {
        let Some(v) = self.t.random_pseudo(self.r) else { return false };
        let host = self.t.host();
        host.ports(v, host.exit_side(v, self.t.flipped(v)), &mut self.buf);
        self.buf.shuffle(self.r);
        let ws: Vec<usize> = self.buf.iter().map(|p| p.vertex as usize).collect();
        for w in ws {
            if self.t.can_rotate(v, w) {
                self.t.rotate(v, w).unwrap();
                return true;
            }
        }
        false
    }

    fn any_off_tour_edge(&mut self) -> bool {
        for v in self.t.pseudo_vertices() {
            let host = self.t.host();
            host.ports(v, host.exit_side(v, self.t.flipped(v)), &mut self.buf);
            let (s, p) = (self.t.succ(v), self.t.pred(v));
            if self.buf.iter().any(|q| q.vertex as usize != s && q.vertex as usize != p) {
                return true;
            }
        }
        false
    }

    fn run(&mut self, c: &mut Counters, deadline: Option<Instant>) -> bool {
        let budget = self.lim.phase1.saturating_add(self.lim.phase2);
        c.trajectory.push(self.t.pseudo_count() as u32);
        while !self.t.is_hamiltonian() {
            if c.iterations >= budget || deadline.is_some_and(|d| Instant::now() >= d) {
                return false;
            }
            c.iterations += 1;
            let a = self.t.random_pseudo(self.r).unwrap();
            let ha = self.t.succ(a);
            if self.try_flip(a) || self.try_flip(ha) {
                c.flips += 1;
                c.successes += 1;
            } else {
                let cands = self.candidates(a);
                match self.pick(&cands) {
                    Some(m) => {
                        self.t.apply(&m).unwrap();
                        self.push_back(&m);
                        c.successes += 1;
                    }
                    None => {
                        c.failures += 1;
                        if self.directed() {
                            if let Some(undo) = self.back.pop_front() {
                                self.t.apply(&undo).expect("undo of the latest move is admissible");
                                c.backtracks += 1;
                            }
                        }
                    }
                }
            }
            if !self.directed() && !self.t.is_hamiltonian() {
                if self.rotate_somewhere() {
                    c.rotations += 1;
                } else if !self.any_off_tour_edge() {
                    c.trajectory.push(self.t.pseudo_count() as u32);
                    return false;
                }
            }
            c.trajectory.push(self.t.pseudo_count() as u32);
        }
        true
    }
}

/// Exhaustive search over orders and orientations; only for tiny contracted graphs.
fn tiny(host: &dyn Host) -> Option<(Vec<usize>, Vec<bool>)> {
    let n = host.order();
    let sided: Vec<usize> = (0..n).filter(|&v| !host.is_directed() && host.has_sides(v)).collect();
    let mut rest: Vec<usize> = (1..n).collect();
    let mut perms = Vec::new();
    permute(&mut rest, 0, &mut perms);
    for p in perms {
        let order: Vec<usize> = std::iter::once(0).chain(p).collect();
        for mask in 0..(1u32 << sided.len()) {
            let mut flips = vec![false; n];
            for (i, &v) in sided.iter().enumerate() {
                flips[v] = mask >> i & 1 == 1;
            }
            if verify_oriented(host, &order, &flips) {
                return Some((order, flips));
            }
        }
    }
    None
}

fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, out);
        v.swap(k, i);
    }
}

fn solve_contracted(cg: &ContractedGraph, p: &SolveParams) -> SolveReport {
    let n = cg.order();
    let mut base = SolveReport::infeasible("");
    base.contracted_order = n;
    base.reason = None;
    if n <= 4 {
        return match tiny(cg) {
            Some((order, flips)) => SolveReport {
                outcome: Outcome::Circuit,
                circuit: Some(cg.expand_oriented(&order, &flips)),
                ..base
            },
            None => SolveReport {
                outcome: Outcome::Infeasible,
                reason: Some("exhaustive search of the contracted graph finds no circuit".into()),
                ..base
            },
        };
    }
    let lim = p.resolve(n);
    let mut r = rng(p.seed);
    let t = match initial_tour(cg, p.start, &mut r) {
        Ok(t) => t,
        Err(e) => return SolveReport { outcome: Outcome::Infeasible, reason: Some(e), ..base },
    };
    let mut t = t;
    t.set_cadence(lim.cadence);
    let mut s = Search { t, lim, r: &mut r, back: VecDeque::new(), back_cap: p.backtrack_cap, buf: vec![], buf2: vec![] };
    let mut c = Counters {
        iterations: 0,
        successes: 0,
        failures: 0,
        backtracks: 0,
        rotations: 0,
        flips: 0,
        trajectory: Vec::new(),
    };
    let deadline = p.wall_limit.map(|w| Instant::now() + w);
    let found = s.run(&mut c, deadline);
    let circuit = found.then(|| cg.expand_oriented(&s.t.order(), &s.t.flips()));
    SolveReport {
        outcome: if found { Outcome::Circuit } else { Outcome::Timeout },
        circuit,
        reason: None,
        contracted_order: n,
        iterations: c.iterations,
        successes: c.successes,
        failures: c.failures,
        backtracks: c.backtracks,
        rotations: c.rotations,
        flips: c.flips,
        final_pseudo: s.t.pseudo_count(),
        trajectory: c.trajectory,
    }
}

pub fn solve_graph(g: &Graph, p: &SolveParams) -> SolveReport {
    if g.order() < 3 {
        return SolveReport::infeasible("fewer than 3 vertices");
    }
    if !g.is_connected() {
        return SolveReport::infeasible("graph is not connected");
    }
    if let Some(v) = (0..g.order()).find(|&v| g.degree(v) < 2) {
        return SolveReport::infeasible(format!("vertex {} has degree {}", v + 1, g.degree(v)));
    }
    let rep = match contract_graph(g) {
        Err(e) => SolveReport::infeasible(e.to_string()),
        Ok(Reduction::Circuit(c)) => SolveReport::forced(c),
        Ok(Reduction::Reduced(cg)) => solve_contracted(&cg, p),
    };
    if let Some(c) = &rep.circuit {
        assert!(verify_circuit(g, c), "expanded circuit fails on the host");
    }
    rep
}

pub fn solve_digraph(d: &Digraph, p: &SolveParams) -> SolveReport {
    if d.order() < 2 {
        return SolveReport::infeasible("fewer than 2 vertices");
    }
    if !d.is_strongly_connected() {
        return SolveReport::infeasible("digraph is not strongly connected");
    }
    let rep = match contract_digraph(d) {
        Err(e) => SolveReport::infeasible(e.to_string()),
        Ok(Reduction::Circuit(c)) => SolveReport::forced(c),
        Ok(Reduction::Reduced(cg)) => solve_contracted(&cg, p),
    };
    if let Some(c) = &rep.circuit {
        assert!(verify_circuit(d, c), "expanded circuit fails on the host");
    }
    rep
}

pub fn solve(g: &AnyGraph, p: &SolveParams) -> SolveReport {
    match g {
        AnyGraph::Graph(g) => solve_graph(g, p),
        AnyGraph::Digraph(d) => solve_digraph(d, p),
    }
}
