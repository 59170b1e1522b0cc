//! Ground truth for small hosts: exhaustive circuits, σ = h⁻¹∘target, and constructive descent.

use std::collections::{BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::graphgen::rng;
use crate::solver::{complement_cycle, verify_circuit};
use crate::tour::{chords_interlace, is_cyclic_order, Host, Move, Tour};

pub const BRUTE_FORCE_MAX: usize = 12;
pub const ENUMERATE_MAX: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("n = {n} exceeds the limit {max}; use the solver instead")]
    TooLarge { n: usize, max: usize },
    #[error("target is not a Hamilton circuit of the host")]
    BadTarget,
    #[error("start tour shares an edge with the host")]
    StartTouchesHost,
    #[error("no tour avoiding the host could be built")]
    NoComplementStart,
    #[error("no admissible move built from sigma (internal inconsistency)")]
    NoMove,
    #[error("hosts with 2-vertices are not supported here")]
    Sided,
}

/// Rotation to start at vertex 0; for undirected hosts also the lesser of the two directions.
pub fn canonical(circuit: &[usize], directed: bool) -> Vec<usize> {
    let n = circuit.len();
    if n == 0 {
        return vec![];
    }
    let i = circuit.iter().position(|&v| v == 0).unwrap_or(0);
    let fwd: Vec<usize> = (0..n).map(|k| circuit[(i + k) % n]).collect();
    if directed || n < 3 {
        return fwd;
    }
    let bwd: Vec<usize> = (0..n).map(|k| circuit[(i + n - k) % n]).collect();
    fwd.min(bwd)
}

fn plain(host: &dyn Host) -> Result<(), OracleError> {
    if (0..host.order()).any(|v| host.has_sides(v)) {
        Err(OracleError::Sided)
    } else {
        Ok(())
    }
}

/// Every Hamilton circuit, canonical and sorted.
pub fn brute_force_circuits(host: &dyn Host) -> Result<Vec<Vec<usize>>, OracleError> {
    let n = host.order();
    if n > BRUTE_FORCE_MAX {
        return Err(OracleError::TooLarge { n, max: BRUTE_FORCE_MAX });
    }
    plain(host)?;
    let directed = host.is_directed();
    let mut out = Vec::new();
    if n < 3 && !directed || n < 2 {
        return Ok(out);
    }
    let mut path = vec![0usize];
    let mut used = vec![false; n];
    used[0] = true;
    fn dfs(host: &dyn Host, path: &mut Vec<usize>, used: &mut [bool], directed: bool, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        let last = *path.last().unwrap();
        if path.len() == n {
            if host.arc(last, false, 0, false) && (directed || path[1] < path[n - 1]) {
                out.push(path.clone());
            }
            return;
        }
        for v in 1..n {
            if !used[v] && host.arc(last, false, v, false) {
                used[v] = true;
                path.push(v);
                dfs(host, path, used, directed, out);
                path.pop();
                used[v] = false;
            }
        }
    }
    dfs(host, &mut path, &mut used, directed, &mut out);
    out.sort();
    Ok(out)
}

/// σ = h⁻¹∘target as a point map, with its disjoint cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaDecomposition {
    pub target: Vec<usize>,
    pub sigma: Vec<usize>,
    pub cycles: Vec<Vec<usize>>,
}

impl SigmaDecomposition {
    pub fn moved(&self) -> Vec<usize> {
        (0..self.sigma.len()).filter(|&x| self.sigma[x] != x).collect()
    }

    pub fn size(&self) -> usize {
        self.sigma.iter().enumerate().filter(|&(x, &s)| s != x).count()
    }
}

fn succ_map(circuit: &[usize]) -> Vec<usize> {
    let n = circuit.len();
    let mut s = vec![0; n];
    for i in 0..n {
        s[circuit[i]] = circuit[(i + 1) % n];
    }
    s
}

pub fn sigma_of(t: &Tour, target: &[usize]) -> SigmaDecomposition {
    let ts = succ_map(target);
    let n = t.len();
    let sigma: Vec<usize> = (0..n).map(|x| t.pred(ts[x])).collect();
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for v in 0..n {
        if seen[v] || sigma[v] == v {
            continue;
        }
        let mut c = vec![];
        let mut x = v;
        while !seen[x] {
            seen[x] = true;
            c.push(x);
            x = sigma[x];
        }
        cycles.push(c);
    }
    SigmaDecomposition { target: target.to_vec(), sigma, cycles }
}

/// Checks the target against the host first.
pub fn sigma(t: &Tour, target: &[usize]) -> Result<SigmaDecomposition, OracleError> {
    if !verify_circuit(t.host(), target) {
        return Err(OracleError::BadTarget);
    }
    Ok(sigma_of(t, target))
}

/// Every created arc is either off the host or an arc of the target.
fn keeps_regime(t: &Tour, m: &Move, target_succ: &[usize]) -> bool {
    let (arcs, k) = t.new_arcs(m);
    arcs[..k].iter().all(|&(u, v)| !t.is_host_arc(u, v) || target_succ[u] == v)
}

fn sigma_after(m: &Move, sd: &SigmaDecomposition) -> usize {
    // σ' = s⁻¹∘σ
    let inv = m.inverse();
    (0..sd.sigma.len()).filter(|&x| inv.image(sd.sigma[x]) != x).count()
}

/// Moves read off σ: consecutive cycle triples in tour order, then interlacing pairs of σ-arcs.
pub fn sigma_moves(t: &Tour, sd: &SigmaDecomposition) -> Vec<Move> {
    let mut out = Vec::new();
    for c in &sd.cycles {
        if c.len() < 3 {
            continue;
        }
        for i in 0..c.len() {
            let m = Move::three(c[i], c[(i + 1) % c.len()], c[(i + 2) % c.len()]);
            if t.is_admissible(&m) {
                out.push(m);
            }
        }
    }
    let moved = sd.moved();
    for (i, &a) in moved.iter().enumerate() {
        for &b in &moved[i + 1..] {
            let (c, d) = (sd.sigma[a], sd.sigma[b]);
            if c == b || d == a || c == d {
                continue;
            }
            let m = Move::potdt(a, c, b, d);
            if t.is_admissible(&m) {
                out.push(m);
            }
        }
    }
    out
}

/// Admissible moves on the moved points of σ that shrink σ by at least two and create
/// no host arc outside the target.
pub fn regime_moves(t: &Tour, sd: &SigmaDecomposition) -> Vec<Move> {
    let ts = succ_map(&sd.target);
    let before = sd.size();
    let moved = sd.moved();
    let keep = |m: &Move| t.is_admissible(m) && sigma_after(m, sd) + 2 <= before && keeps_regime(t, m, &ts);
    let mut out: Vec<Move> = sigma_moves(t, sd).into_iter().filter(|m| keep(m)).collect();
    for (i, &a) in moved.iter().enumerate() {
        for &b in &moved[i + 1..] {
            for &c in &moved[i + 1..] {
                let m = Move::three(a, b, c);
                if b != c && !out.contains(&m) && keep(&m) {
                    out.push(m);
                }
            }
        }
    }
    for (i, &a) in moved.iter().enumerate() {
        for &c in &moved[i + 1..] {
            for &b in &moved[i + 1..] {
                for &d in moved.iter().filter(|&&d| d > b) {
                    let m = Move::potdt(a, c, b, d);
                    if b != c && d != c && !out.contains(&m) && keep(&m) {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

/// One admissible move that shrinks σ by at least two, preferring moves that keep
/// every created host arc on the target.
pub fn constructive_step(t: &Tour, sd: &SigmaDecomposition) -> Result<Move, OracleError> {
    let ts = succ_map(&sd.target);
    let cands = sigma_moves(t, sd);
    if let Some(m) = cands.iter().find(|m| keeps_regime(t, m, &ts)) {
        return Ok(*m);
    }
    if sd.size() <= 12 {
        if let Some(m) = regime_moves(t, sd).first() {
            return Ok(*m);
        }
    }
    cands.first().copied().ok_or(OracleError::NoMove)
}

/// Looks ahead on scratch tours for a move sequence that keeps the regime to the end.
pub fn regime_plan(t: &Tour, target: &[usize]) -> Option<Vec<Move>> {
    fn go(t: &Tour, target: &[usize], seen: &mut HashSet<Vec<usize>>) -> Option<Vec<Move>> {
        let sd = sigma_of(t, target);
        if sd.size() == 0 {
            return Some(vec![]);
        }
        if !seen.insert(t.order()) {
            return None;
        }
        for m in regime_moves(t, &sd) {
            let mut next = t.clone();
            next.apply(&m).ok()?;
            if let Some(mut rest) = go(&next, target, seen) {
                rest.insert(0, m);
                return Some(rest);
            }
        }
        None
    }
    if sigma_of(t, target).moved() != t.pseudo_vertices() {
        return None;
    }
    go(t, target, &mut HashSet::new())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergence {
    pub start: Vec<usize>,
    /// The target in the orientation σ was taken against.
    pub target: Vec<usize>,
    pub moves: Vec<Move>,
    /// |σ| before each move and at the end.
    pub sigma_sizes: Vec<usize>,
    /// Moved points of σ equalled the pseudo-arc vertices at every step.
    pub regime_held: bool,
}

/// Drives `t` to `target` with σ-built moves. The move sequence is chosen by lookahead
/// on scratch copies (either orientation of an undirected target); the tour itself is
/// never rolled back. Falls back to greedy steps when no plan keeps the regime.
pub fn converge_from(t: &mut Tour, target: &[usize]) -> Result<Convergence, OracleError> {
    let start = t.order();
    sigma(t, target)?;
    let mut oriented = target.to_vec();
    let mut plan = regime_plan(t, &oriented);
    if plan.is_none() && !t.is_directed() {
        let mut rev = target.to_vec();
        rev[1..].reverse();
        if let Some(p) = regime_plan(t, &rev) {
            oriented = rev;
            plan = Some(p);
        }
    }
    let mut sd = sigma_of(t, &oriented);
    let mut moves = Vec::new();
    let mut sizes = vec![sd.size()];
    let mut regime = sd.moved() == t.pseudo_vertices();
    let mut planned = plan.unwrap_or_default().into_iter();
    while sd.size() > 0 {
        let m = match planned.next() {
            Some(m) => m,
            None => constructive_step(t, &sd)?,
        };
        t.apply(&m).expect("constructive moves are admissible");
        moves.push(m);
        sd = sigma_of(t, &oriented);
        sizes.push(sd.size());
        regime &= sd.moved() == t.pseudo_vertices();
        if moves.len() > t.len() {
            return Err(OracleError::NoMove);
        }
    }
    Ok(Convergence { start, target: oriented, moves, sigma_sizes: sizes, regime_held: regime })
}

/// Seeded start tour that uses no host edge, then [`converge_from`].
pub fn converge(host: &dyn Host, target: &[usize], seed: u64) -> Result<Convergence, OracleError> {
    plain(host)?;
    if !verify_circuit(host, target) {
        return Err(OracleError::BadTarget);
    }
    let mut r = rng(seed);
    let n = host.order();
    let (order, _) = complement_cycle(host, &mut r, 200 * n * n + 1000).ok_or(OracleError::NoComplementStart)?;
    let mut t = Tour::new(host, &order).unwrap();
    if t.pseudo_count() != n {
        return Err(OracleError::StartTouchesHost);
    }
    converge_from(&mut t, target)
}

/// Breadth-wise enumeration from a start tour: branch on every admissible 3-cycle or
/// pair of transpositions creating at least two host arcs, up to `depth_cap` levels.
pub fn enumerate_all(host: &dyn Host, depth_cap: Option<usize>, seed: u64) -> Result<Vec<Vec<usize>>, OracleError> {
    let n = host.order();
    if n > ENUMERATE_MAX {
        return Err(OracleError::TooLarge { n, max: ENUMERATE_MAX });
    }
    plain(host)?;
    let directed = host.is_directed();
    if n < 3 {
        return brute_force_circuits(host);
    }
    let depth_cap = depth_cap.unwrap_or(n.div_ceil(2));
    let mut r = rng(seed);
    let order = match complement_cycle(host, &mut r, 200 * n * n + 1000) {
        Some((o, _)) => o,
        None => (0..n).collect(),
    };
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut queue: VecDeque<(Vec<usize>, usize)> = VecDeque::new();
    seen.insert(order.clone());
    queue.push_back((order, 0));
    let mut moves: Vec<Move> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a < b && a < c && b != c {
                    moves.push(Move::three(a, b, c));
                }
            }
        }
    }
    for a in 0..n {
        for c in a + 1..n {
            for b in a + 1..n {
                for d in b + 1..n {
                    if b != c && d != c {
                        moves.push(Move::potdt(a, c, b, d));
                    }
                }
            }
        }
    }
    let adj: Vec<bool> = (0..n * n).map(|i| i / n != i % n && host.arc(i / n, false, i % n, false)).collect();
    let mut pos = vec![0; n];
    let mut succ = vec![0; n];
    while let Some((order, depth)) = queue.pop_front() {
        for i in 0..n {
            pos[order[i]] = i;
            succ[order[i]] = order[(i + 1) % n];
        }
        if (0..n).all(|v| adj[v * n + succ[v]]) {
            found.insert(canonical(&order, directed));
        }
        if depth == depth_cap {
            continue;
        }
        for m in &moves {
            let ok = match *m {
                Move::Three([a, b, c]) => is_cyclic_order(pos[a as usize], pos[b as usize], pos[c as usize], n),
                Move::Potdt([a, c, b, d]) => {
                    chords_interlace(pos[a as usize], pos[c as usize], pos[b as usize], pos[d as usize], n)
                }
            };
            if !ok {
                continue;
            }
            let vs = m.vertices();
            let made = vs.iter().filter(|&&x| adj[x as usize * n + succ[m.image(x as usize)]]).count();
            if made < 2 {
                continue;
            }
            let mut next = Vec::with_capacity(n);
            let mut x = order[0];
            for _ in 0..n {
                next.push(x);
                x = succ[m.image(x)];
            }
            if seen.insert(next.clone()) {
                queue.push_back((next, depth + 1));
            }
        }
    }
    Ok(found.into_iter().collect())
}
