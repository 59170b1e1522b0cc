//! Forced subpaths (degree-2 chains, unique arcs) and the contracted host built from them.

use thiserror::Error;

use crate::graphgen::{AnyGraph, Digraph, Graph};
use crate::tour::{Host, Port};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContractError {
    #[error("vertex {0} cannot have two circuit edges")]
    LowDegree(usize),
    #[error("vertex {0} is forced onto three circuit edges")]
    Overforced(usize),
    #[error("isolated cycle of {len} vertices in a graph on {n}")]
    IsolatedCycle { len: usize, n: usize },
    #[error("forced path covers every vertex but does not close")]
    OpenPath,
    #[error("circuit is not a Hamilton circuit of the contracted graph")]
    InvalidCircuit,
}

/// A maximal forced subpath, listed from its first to its last vertex (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoPath {
    pub vertices: Vec<usize>,
    pub directed: bool,
    /// The path closes into a Hamilton circuit of the whole host.
    pub closed: bool,
}

#[derive(Clone, Debug)]
pub enum Reduction {
    Reduced(ContractedGraph),
    /// The forced structure alone is a Hamilton circuit.
    Circuit(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct ContractedGraph {
    directed: bool,
    host_n: usize,
    members: Vec<Vec<u32>>,
    /// undirected: ports per side; directed: [out, in]
    ports: Vec<[Vec<Port>; 2]>,
    deleted: Vec<(usize, usize)>,
}

impl ContractedGraph {
    pub fn host_order(&self) -> usize {
        self.host_n
    }

    /// Host vertices represented by contracted vertex `c`, first side first.
    pub fn members(&self, c: usize) -> Vec<usize> {
        self.members[c].iter().map(|&v| v as usize).collect()
    }

    pub fn is_two_vertex(&self, c: usize) -> bool {
        self.members[c].len() >= 2
    }

    pub fn two_paths(&self) -> Vec<TwoPath> {
        (0..self.members.len())
            .filter(|&c| self.is_two_vertex(c))
            .map(|c| TwoPath { vertices: self.members(c), directed: self.directed, closed: false })
            .collect()
    }

    /// Host edges or arcs removed because no Hamilton circuit can use them.
    pub fn deleted(&self) -> &[(usize, usize)] {
        &self.deleted
    }

    /// Contracted edges as ((c, side), (c', side')) with the smaller port first; arcs for digraphs.
    pub fn edges(&self) -> Vec<((usize, u8), (usize, u8))> {
        let mut out = Vec::new();
        for c in 0..self.members.len() {
            if self.directed {
                for p in &self.ports[c][0] {
                    out.push(((c, 1), (p.vertex as usize, 0)));
                }
            } else {
                for s in 0..2u8 {
                    for p in &self.ports[c][s as usize] {
                        let a = (c, s);
                        let b = (p.vertex as usize, p.side);
                        if a < b {
                            out.push((a, b));
                        }
                    }
                }
            }
        }
        out
    }

    /// Smallest port degree (undirected) or smallest of in/out degree (directed).
    pub fn min_degree(&self) -> usize {
        (0..self.members.len())
            .map(|c| {
                if self.directed || !self.is_two_vertex(c) {
                    if self.directed {
                        self.ports[c][0].len().min(self.ports[c][1].len())
                    } else {
                        self.ports[c][0].len()
                    }
                } else {
                    self.ports[c][0].len().min(self.ports[c][1].len())
                }
            })
            .min()
            .unwrap_or(0)
    }

    /// Expands a contracted circuit whose 2-vertex orientations are known.
    pub fn expand_oriented(&self, order: &[usize], flips: &[bool]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.host_n);
        for &c in order {
            let m = &self.members[c];
            if flips[c] {
                out.extend(m.iter().rev().map(|&v| v as usize));
            } else {
                out.extend(m.iter().map(|&v| v as usize));
            }
        }
        out
    }

    /// Expands a contracted circuit, reading each 2-vertex's orientation off the edges that enter it.
    pub fn expand(&self, circuit: &[usize]) -> Result<Vec<usize>, ContractError> {
        let k = self.members.len();
        if circuit.len() != k {
            return Err(ContractError::InvalidCircuit);
        }
        let mut seen = vec![false; k];
        for &c in circuit {
            if c >= k || seen[c] {
                return Err(ContractError::InvalidCircuit);
            }
            seen[c] = true;
        }
        let options = |c: usize| -> Vec<bool> {
            if self.directed || !self.is_two_vertex(c) {
                vec![false]
            } else {
                vec![false, true]
            }
        };
        // walk the cycle carrying, for each orientation of the current vertex, one consistent back-pointer
        for f0 in options(circuit[0]) {
            let mut back: Vec<[Option<bool>; 2]> = vec![[None, None]; k];
            let mut reach = [false; 2];
            reach[f0 as usize] = true;
            for i in 1..k {
                let (u, v) = (circuit[i - 1], circuit[i]);
                let mut next = [false; 2];
                for fv in options(v) {
                    for fu in [false, true] {
                        if reach[fu as usize] && self.arc(u, fu, v, fv) {
                            next[fv as usize] = true;
                            back[i][fv as usize] = Some(fu);
                            break;
                        }
                    }
                }
                reach = next;
            }
            let last = circuit[k - 1];
            for fl in [false, true] {
                if reach[fl as usize] && self.arc(last, fl, circuit[0], f0) {
                    let mut flips = vec![false; k];
                    let mut f = fl;
                    for i in (1..k).rev() {
                        flips[circuit[i]] = f;
                        f = back[i][f as usize].unwrap();
                    }
                    flips[circuit[0]] = f0;
                    return Ok(self.expand_oriented(circuit, &flips));
                }
            }
        }
        Err(ContractError::InvalidCircuit)
    }
}

impl Host for ContractedGraph {
    fn order(&self) -> usize {
        self.members.len()
    }
    fn is_directed(&self) -> bool {
        self.directed
    }
    fn has_sides(&self, v: usize) -> bool {
        self.members[v].len() >= 2
    }
    fn ports(&self, v: usize, side: u8, buf: &mut Vec<Port>) {
        buf.clear();
        let s = if self.directed { 0 } else { side as usize };
        buf.extend_from_slice(&self.ports[v][s]);
    }
    fn in_ports(&self, v: usize, side: u8, buf: &mut Vec<Port>) {
        buf.clear();
        let s = if self.directed { 1 } else { side as usize };
        buf.extend_from_slice(&self.ports[v][s]);
    }
    fn joins(&self, u: usize, su: u8, v: usize, sv: u8) -> bool {
        if self.directed {
            self.ports[u][0].binary_search(&Port { vertex: v as u32, side: 0 }).is_ok()
        } else {
            self.ports[u][su as usize].binary_search(&Port { vertex: v as u32, side: sv }).is_ok()
        }
    }
}

fn walk_components(n: usize, next: impl Fn(usize, usize) -> Option<usize>, ends: &[usize]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    // paths from each listed end; what is left over and forced lies on cycles
    let mut seen = vec![false; n];
    let mut paths = Vec::new();
    for &e in ends {
        if seen[e] {
            continue;
        }
        let mut path = vec![e];
        seen[e] = true;
        let mut prev = usize::MAX;
        let mut cur = e;
        while let Some(x) = next(cur, prev) {
            if seen[x] {
                break;
            }
            seen[x] = true;
            path.push(x);
            prev = cur;
            cur = x;
        }
        paths.push(path);
    }
    let mut cycles = Vec::new();
    for v in 0..n {
        if seen[v] || next(v, usize::MAX).is_none() {
            continue;
        }
        let mut cyc = vec![v];
        seen[v] = true;
        let mut prev = usize::MAX;
        let mut cur = v;
        while let Some(x) = next(cur, prev) {
            if seen[x] {
                break;
            }
            seen[x] = true;
            cyc.push(x);
            prev = cur;
            cur = x;
        }
        cycles.push(cyc);
    }
    (paths, cycles)
}

enum Forced {
    Done(Vec<usize>),
    Paths { work: AnyGraph, paths: Vec<Vec<usize>>, deleted: Vec<(usize, usize)> },
}

fn force_graph(g: &Graph) -> Result<Forced, ContractError> {
    let n = g.order();
    let mut w = g.clone();
    let mut forced: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut deleted = Vec::new();
    loop {
        let mut changed = false;
        for v in 0..n {
            if w.degree(v) < 2 {
                return Err(ContractError::LowDegree(v + 1));
            }
            if w.degree(v) == 2 {
                for &u in w.neighbors(v).to_vec().iter() {
                    if !forced[v].contains(&u) {
                        forced[v].push(u);
                        forced[u as usize].push(v as u32);
                    }
                }
            }
        }
        for v in 0..n {
            if forced[v].len() > 2 {
                return Err(ContractError::Overforced(v + 1));
            }
            if forced[v].len() == 2 && w.degree(v) > 2 {
                for u in w.neighbors(v).to_vec() {
                    if !forced[v].contains(&u) {
                        w.remove_edge(v, u as usize);
                        deleted.push((v.min(u as usize), v.max(u as usize)));
                    }
                }
                changed = true;
            }
        }
        let ends: Vec<usize> = (0..n).filter(|&v| forced[v].len() == 1).collect();
        let next = |cur: usize, prev: usize| forced[cur].iter().map(|&x| x as usize).find(|&x| x != prev);
        let (paths, cycles) = walk_components(n, next, &ends);
        if let Some(c) = cycles.first() {
            if c.len() == n {
                return Ok(Forced::Done(c.clone()));
            }
            return Err(ContractError::IsolatedCycle { len: c.len(), n });
        }
        for p in &paths {
            let (a, b) = (p[0], *p.last().unwrap());
            if p.len() == n {
                return if w.has_edge(a, b) { Ok(Forced::Done(p.clone())) } else { Err(ContractError::OpenPath) };
            }
            if p.len() >= 3 && w.remove_edge(a, b) {
                deleted.push((a.min(b), a.max(b)));
                changed = true;
            }
        }
        if !changed {
            return Ok(Forced::Paths { work: AnyGraph::Graph(w), paths, deleted });
        }
    }
}

fn force_digraph(d: &Digraph) -> Result<Forced, ContractError> {
    let n = d.order();
    let mut w = d.clone();
    let mut fout: Vec<Option<u32>> = vec![None; n];
    let mut fin: Vec<Option<u32>> = vec![None; n];
    let mut deleted = Vec::new();
    loop {
        let mut changed = false;
        let force = |u: usize, v: usize, fout: &mut Vec<Option<u32>>, fin: &mut Vec<Option<u32>>| {
            match (fout[u], fin[v]) {
                (Some(x), _) if x as usize != v => Err(ContractError::Overforced(u + 1)),
                (_, Some(y)) if y as usize != u => Err(ContractError::Overforced(v + 1)),
                _ => {
                    fout[u] = Some(v as u32);
                    fin[v] = Some(u as u32);
                    Ok(())
                }
            }
        };
        for v in 0..n {
            if w.outdeg(v) == 0 || w.indeg(v) == 0 {
                return Err(ContractError::LowDegree(v + 1));
            }
        }
        for v in 0..n {
            if w.indeg(v) == 1 {
                force(w.in_neighbors(v)[0] as usize, v, &mut fout, &mut fin)?;
            }
            if w.outdeg(v) == 1 {
                force(v, w.out_neighbors(v)[0] as usize, &mut fout, &mut fin)?;
            }
        }
        for u in 0..n {
            if let Some(v) = fout[u] {
                let v = v as usize;
                for x in w.out_neighbors(u).to_vec() {
                    if x as usize != v {
                        w.remove_arc(u, x as usize);
                        deleted.push((u, x as usize));
                        changed = true;
                    }
                }
                for y in w.in_neighbors(v).to_vec() {
                    if y as usize != u {
                        w.remove_arc(y as usize, v);
                        deleted.push((y as usize, v));
                        changed = true;
                    }
                }
            }
        }
        let ends: Vec<usize> = (0..n).filter(|&v| fin[v].is_none() && fout[v].is_some()).collect();
        let next = |cur: usize, _prev: usize| fout[cur].map(|x| x as usize);
        let (paths, cycles) = walk_components(n, next, &ends);
        if let Some(c) = cycles.first() {
            if c.len() == n {
                return Ok(Forced::Done(c.clone()));
            }
            return Err(ContractError::IsolatedCycle { len: c.len(), n });
        }
        for p in &paths {
            let (a, b) = (p[0], *p.last().unwrap());
            if p.len() == n {
                return if w.has_arc(b, a) { Ok(Forced::Done(p.clone())) } else { Err(ContractError::OpenPath) };
            }
            if w.remove_arc(b, a) {
                deleted.push((b, a));
                changed = true;
            }
        }
        if !changed {
            return Ok(Forced::Paths { work: AnyGraph::Digraph(w), paths, deleted });
        }
    }
}

fn build(work: AnyGraph, paths: Vec<Vec<usize>>, deleted: Vec<(usize, usize)>) -> ContractedGraph {
    let n = work.order();
    // host vertex -> (contracted id, side), side 2 for interior
    let mut place = vec![(u32::MAX, 0u8); n];
    let mut members: Vec<Vec<u32>> = Vec::new();
    let mut in_path = vec![false; n];
    for p in &paths {
        for &v in p {
            in_path[v] = true;
        }
    }
    // contracted ids follow the smallest host vertex of each member
    let mut groups: Vec<Vec<u32>> = paths.iter().map(|p| p.iter().map(|&v| v as u32).collect()).collect();
    groups.extend((0..n).filter(|&v| !in_path[v]).map(|v| vec![v as u32]));
    groups.sort_by_key(|m| *m.iter().min().unwrap());
    for m in groups {
        let c = members.len() as u32;
        let last = m.len() - 1;
        for (i, &v) in m.iter().enumerate() {
            let side = if i == 0 { 0 } else if i == last { 1 } else { 2 };
            place[v as usize] = (c, side);
        }
        members.push(m);
    }
    let k = members.len();
    let mut ports: Vec<[Vec<Port>; 2]> = vec![[Vec::new(), Vec::new()]; k];
    let directed;
    match &work {
        AnyGraph::Graph(w) => {
            directed = false;
            for (u, v) in w.edges() {
                let (cu, su) = place[u];
                let (cv, sv) = place[v];
                if cu == cv {
                    continue; // a forced edge inside a 2-vertex
                }
                ports[cu as usize][su as usize].push(Port { vertex: cv, side: sv });
                ports[cv as usize][sv as usize].push(Port { vertex: cu, side: su });
            }
        }
        AnyGraph::Digraph(w) => {
            directed = true;
            for (u, v) in w.arcs() {
                let (cu, _) = place[u];
                let (cv, _) = place[v];
                if cu == cv {
                    continue;
                }
                ports[cu as usize][0].push(Port { vertex: cv, side: 0 });
                ports[cv as usize][1].push(Port { vertex: cu, side: 0 });
            }
        }
    }
    for p in &mut ports {
        p[0].sort_unstable();
        p[1].sort_unstable();
    }
    ContractedGraph { directed, host_n: n, members, ports, deleted }
}

fn finish(f: Forced) -> Reduction {
    match f {
        Forced::Done(c) => Reduction::Circuit(c),
        Forced::Paths { work, paths, deleted } => Reduction::Reduced(build(work, paths, deleted)),
    }
}

pub fn contract_graph(g: &Graph) -> Result<Reduction, ContractError> {
    force_graph(g).map(finish)
}

pub fn contract_digraph(d: &Digraph) -> Result<Reduction, ContractError> {
    force_digraph(d).map(finish)
}

pub fn contract(g: &AnyGraph) -> Result<Reduction, ContractError> {
    match g {
        AnyGraph::Graph(g) => contract_graph(g),
        AnyGraph::Digraph(d) => contract_digraph(d),
    }
}

/// Maximal forced subpaths. A forced structure that already closes into a
/// Hamilton circuit comes back as one closed path.
pub fn find_two_paths(g: &AnyGraph) -> Result<Vec<TwoPath>, ContractError> {
    let directed = matches!(g, AnyGraph::Digraph(_));
    let f = match g {
        AnyGraph::Graph(g) => force_graph(g)?,
        AnyGraph::Digraph(d) => force_digraph(d)?,
    };
    Ok(match f {
        Forced::Done(c) => vec![TwoPath { vertices: c, directed, closed: true }],
        Forced::Paths { paths, .. } => {
            let mut out: Vec<TwoPath> = paths
                .into_iter()
                .filter(|p| p.len() >= 2)
                .map(|vertices| TwoPath { vertices, directed, closed: false })
                .collect();
            out.sort_by_key(|p| p.vertices[0]);
            out
        }
    })
}
