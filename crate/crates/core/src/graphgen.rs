//! Graph and digraph types, the random models, and the edge-list file format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Every random choice in the crate goes through this generator.
pub type DetRng = ChaCha8Rng;

pub fn rng(seed: u64) -> DetRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("n = {n} is too small (need at least {min})")]
    TooSmall { n: usize, min: usize },
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("duplicate edge {0} {1}")]
    Duplicate(usize, usize),
    #[error("vertex {v} out of range 1..={n}")]
    OutOfRange { v: usize, n: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<u32>>,
    m: usize,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { n, adj: vec![Vec::new(); n], m: 0 }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            g.adj[u] = (0..n as u32).filter(|&v| v as usize != u).collect();
        }
        g.m = n * n.saturating_sub(1) / 2;
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::new(n);
        for v in 0..n {
            let _ = g.add_edge(v, (v + 1) % n);
        }
        g
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::Loop(u + 1));
        }
        let pos = match self.adj[u].binary_search(&(v as u32)) {
            Ok(_) => return Err(GraphError::Duplicate(u.min(v) + 1, u.max(v) + 1)),
            Err(p) => p,
        };
        self.adj[u].insert(pos, v as u32);
        let pos = self.adj[v].binary_search(&(u as u32)).unwrap_err();
        self.adj[v].insert(pos, u as u32);
        self.m += 1;
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if let Ok(p) = self.adj[u].binary_search(&(v as u32)) {
            self.adj[u].remove(p);
            let q = self.adj[v].binary_search(&(u as u32)).unwrap();
            self.adj[v].remove(q);
            self.m -= 1;
            true
        } else {
            false
        }
    }

    fn check(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.n {
            Err(GraphError::OutOfRange { v: v + 1, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&(v as u32)).is_ok()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Edges as (u, v) with u < v, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if (v as usize) > u {
                    out.push((u, v as usize));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v as usize);
                }
            }
        }
        count == self.n
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    out: Vec<Vec<u32>>,
    inn: Vec<Vec<u32>>,
    m: usize,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph { n, out: vec![Vec::new(); n], inn: vec![Vec::new(); n], m: 0 }
    }

    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut d = Digraph::new(n);
        for &(u, v) in arcs {
            d.add_arc(u, v)?;
        }
        Ok(d)
    }

    pub fn complete(n: usize) -> Self {
        let mut d = Digraph::new(n);
        for u in 0..n {
            d.out[u] = (0..n as u32).filter(|&v| v as usize != u).collect();
            d.inn[u] = d.out[u].clone();
        }
        d.m = n * n.saturating_sub(1);
        d
    }

    pub fn cycle(n: usize) -> Self {
        let mut d = Digraph::new(n);
        for v in 0..n {
            let _ = d.add_arc(v, (v + 1) % n);
        }
        d
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.m
    }

    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        for x in [u, v] {
            if x >= self.n {
                return Err(GraphError::OutOfRange { v: x + 1, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::Loop(u + 1));
        }
        let pos = match self.out[u].binary_search(&(v as u32)) {
            Ok(_) => return Err(GraphError::Duplicate(u + 1, v + 1)),
            Err(p) => p,
        };
        self.out[u].insert(pos, v as u32);
        let pos = self.inn[v].binary_search(&(u as u32)).unwrap_err();
        self.inn[v].insert(pos, u as u32);
        self.m += 1;
        Ok(())
    }

    pub fn remove_arc(&mut self, u: usize, v: usize) -> bool {
        if let Ok(p) = self.out[u].binary_search(&(v as u32)) {
            self.out[u].remove(p);
            let q = self.inn[v].binary_search(&(u as u32)).unwrap();
            self.inn[v].remove(q);
            self.m -= 1;
            true
        } else {
            false
        }
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&(v as u32)).is_ok()
    }

    pub fn out_neighbors(&self, v: usize) -> &[u32] {
        &self.out[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        &self.inn[v]
    }

    pub fn outdeg(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn indeg(&self, v: usize) -> usize {
        self.inn[v].len()
    }

    pub fn min_outdeg(&self) -> usize {
        self.out.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn min_indeg(&self) -> usize {
        self.inn.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &v in &self.out[u] {
                out.push((u, v as usize));
            }
        }
        out
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let reach = |adj: &Vec<Vec<u32>>| {
            let mut seen = vec![false; self.n];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut count = 1;
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        count += 1;
                        stack.push(v as usize);
                    }
                }
            }
            count
        };
        reach(&self.out) == self.n && reach(&self.inn) == self.n
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyGraph {
    Graph(Graph),
    Digraph(Digraph),
}

impl AnyGraph {
    pub fn order(&self) -> usize {
        match self {
            AnyGraph::Graph(g) => g.order(),
            AnyGraph::Digraph(d) => d.order(),
        }
    }
}

/// Adds uniformly shuffled edges of K_n until every vertex has degree >= 2.
/// Returns the graph and the stopping index.
pub fn gen_boll_graph(n: usize, seed: u64) -> Result<(Graph, usize), GraphError> {
    if n < 3 {
        return Err(GraphError::TooSmall { n, min: 3 });
    }
    let mut universe = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            universe.push((u, v));
        }
    }
    let mut r = rng(seed);
    let mut g = Graph::new(n);
    let mut low = n;
    let total = universe.len();
    for i in 0..total {
        // lazy Fisher-Yates: only the consumed prefix is ever shuffled
        let j = r.gen_range(i..total);
        universe.swap(i, j);
        let (u, v) = universe[i];
        g.add_edge(u as usize, v as usize).expect("universe has no repeats");
        for x in [u as usize, v as usize] {
            if g.degree(x) == 2 {
                low -= 1;
            }
        }
        if low == 0 {
            return Ok((g, i + 1));
        }
    }
    unreachable!("K_n has minimum degree n-1 >= 2")
}

/// Directed analogue of [`gen_boll_graph`]: stops when every in- and out-degree reaches `threshold`.
pub fn gen_boll_digraph(n: usize, threshold: usize, seed: u64) -> Result<(Digraph, usize), GraphError> {
    if n < 2 {
        return Err(GraphError::TooSmall { n, min: 2 });
    }
    if threshold == 0 || threshold > n - 1 {
        return Err(GraphError::BadParam(format!("threshold {threshold} outside 1..={}", n - 1)));
    }
    let mut universe = Vec::with_capacity(n * (n - 1));
    for u in 0..n as u32 {
        for v in 0..n as u32 {
            if u != v {
                universe.push((u, v));
            }
        }
    }
    let mut r = rng(seed);
    let mut d = Digraph::new(n);
    let mut low = 2 * n;
    let total = universe.len();
    for i in 0..total {
        let j = r.gen_range(i..total);
        universe.swap(i, j);
        let (u, v) = universe[i];
        d.add_arc(u as usize, v as usize).expect("universe has no repeats");
        if d.outdeg(u as usize) == threshold {
            low -= 1;
        }
        if d.indeg(v as usize) == threshold {
            low -= 1;
        }
        if low == 0 {
            return Ok((d, i + 1));
        }
    }
    unreachable!("KD_n meets any threshold <= n-1")
}

fn sample_others(r: &mut DetRng, n: usize, v: usize, k: usize) -> Vec<usize> {
    index::sample(r, n - 1, k)
        .into_iter()
        .map(|x| if x >= v { x + 1 } else { x })
        .collect()
}

/// Each vertex gets exactly `m` distinct random out-arcs.
pub fn gen_m_out(n: usize, m: usize, seed: u64) -> Result<Digraph, GraphError> {
    if n < 2 || m == 0 || m > n - 1 {
        return Err(GraphError::BadParam(format!("need 1 <= m <= n-1, got n={n} m={m}")));
    }
    let mut r = rng(seed);
    let mut d = Digraph::new(n);
    for v in 0..n {
        for w in sample_others(&mut r, n, v, m) {
            d.add_arc(v, w).expect("distinct targets");
        }
    }
    Ok(d)
}

/// Each vertex picks `i` random out-arcs and `o` random in-arcs; duplicates merge.
pub fn gen_in_out(n: usize, i: usize, o: usize, seed: u64) -> Result<Digraph, GraphError> {
    if n < 2 || i > n - 1 || o > n - 1 {
        return Err(GraphError::BadParam(format!("need i, o <= n-1, got n={n} i={i} o={o}")));
    }
    let mut r = rng(seed);
    let mut d = Digraph::new(n);
    for v in 0..n {
        for w in sample_others(&mut r, n, v, i) {
            if !d.has_arc(v, w) {
                d.add_arc(v, w).unwrap();
            }
        }
        for u in sample_others(&mut r, n, v, o) {
            if !d.has_arc(u, v) {
                d.add_arc(u, v).unwrap();
            }
        }
    }
    Ok(d)
}

pub fn to_undirected(d: &Digraph) -> Graph {
    let mut g = Graph::new(d.order());
    for (u, v) in d.arcs() {
        if !g.has_edge(u, v) {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

pub fn parse_graph(text: &str) -> Result<AnyGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "empty file".into() })?;
    let bad = |line: usize, msg: &str| GraphError::Parse { line, msg: msg.to_string() };
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || (parts[0] != "g" && parts[0] != "d") {
        return Err(bad(hline, "header must be \"g n m\" or \"d n m\""));
    }
    let n: usize = parts[1].parse().map_err(|_| bad(hline, "bad vertex count"))?;
    let m: usize = parts[2].parse().map_err(|_| bad(hline, "bad edge count"))?;
    let directed = parts[0] == "d";
    let mut g = Graph::new(n);
    let mut d = Digraph::new(n);
    let mut seen = 0;
    for (ln, l) in lines {
        let p: Vec<&str> = l.split_whitespace().collect();
        if p.len() != 2 {
            return Err(bad(ln, "expected \"u v\""));
        }
        let u: usize = p[0].parse().map_err(|_| bad(ln, "bad vertex"))?;
        let v: usize = p[1].parse().map_err(|_| bad(ln, "bad vertex"))?;
        if u == 0 || v == 0 || u > n || v > n {
            return Err(bad(ln, &format!("vertex out of range 1..={n}")));
        }
        let res = if directed { d.add_arc(u - 1, v - 1) } else { g.add_edge(u - 1, v - 1) };
        res.map_err(|e| bad(ln, &e.to_string()))?;
        seen += 1;
    }
    if seen != m {
        return Err(bad(hline, &format!("header says {m} edges, found {seen}")));
    }
    Ok(if directed { AnyGraph::Digraph(d) } else { AnyGraph::Graph(g) })
}

pub fn format_graph(g: &AnyGraph) -> String {
    let mut s = String::new();
    match g {
        AnyGraph::Graph(g) => {
            let _ = writeln!(s, "g {} {}", g.order(), g.edge_count());
            for (u, v) in g.edges() {
                let _ = writeln!(s, "{} {}", u + 1, v + 1);
            }
        }
        AnyGraph::Digraph(d) => {
            let _ = writeln!(s, "d {} {}", d.order(), d.arc_count());
            for (u, v) in d.arcs() {
                let _ = writeln!(s, "{} {}", u + 1, v + 1);
            }
        }
    }
    s
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<AnyGraph, GraphError> {
    let text = fs::read_to_string(path).map_err(|e| GraphError::Io(e.to_string()))?;
    parse_graph(&text)
}

pub fn write_graph(g: &AnyGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    fs::write(path, format_graph(g)).map_err(|e| GraphError::Io(e.to_string()))
}
