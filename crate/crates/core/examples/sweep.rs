use std::time::Instant;

use hamperm::graphgen::{gen_boll_digraph, gen_boll_graph, gen_in_out, gen_m_out, to_undirected, AnyGraph};
use hamperm::solver::{solve, Outcome, SolveParams};
use hamperm::oracle::brute_force_circuits;
use rayon::prelude::*;
use rand::Rng;

// small random hosts: solver verdicts against exhaustive search
fn check(count: u64) {
    let bad: Vec<String> = (0..count)
        .into_par_iter()
        .filter_map(|seed| {
            let mut r = hamperm::graphgen::rng(seed);
            let n = r.gen_range(4..=9);
            let directed = seed % 2 == 0;
            let p: f64 = r.gen_range(0.25..0.6);
            let g = if directed {
                let mut d = hamperm::graphgen::Digraph::new(n);
                for u in 0..n { for v in 0..n { if u != v && r.gen_bool(p) { d.add_arc(u, v).unwrap(); } } }
                AnyGraph::Digraph(d)
            } else {
                let mut g = hamperm::graphgen::Graph::new(n);
                for u in 0..n { for v in u + 1..n { if r.gen_bool(p) { g.add_edge(u, v).unwrap(); } } }
                AnyGraph::Graph(g)
            };
            let truth = match &g { AnyGraph::Graph(g) => brute_force_circuits(g), AnyGraph::Digraph(d) => brute_force_circuits(d) }.unwrap();
            let rep = solve(&g, &SolveParams::new(seed));
            let ok = match rep.outcome {
                Outcome::Circuit => !truth.is_empty(),
                Outcome::Infeasible => truth.is_empty(),
                Outcome::Timeout => true,
            };
            (!ok || (rep.outcome == Outcome::Timeout && !truth.is_empty())).then(|| format!("seed {seed} n={n} dir={directed} {:?} truth={} {:?}", rep.outcome, truth.len(), rep.reason))
        })
        .collect();
    for b in &bad { println!("{b}"); }
    println!("{} mismatches of {count}", bad.len());
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let model = args.get(1).map(String::as_str).unwrap_or("boll");
    if model == "check" {
        return check(args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1000));
    }
    let n: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let count: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(100);
    let t0 = Instant::now();
    let res: Vec<(Outcome, usize, usize)> = (0..count)
        .into_par_iter()
        .map(|seed| {
            let g = match model {
                "boll" => AnyGraph::Graph(gen_boll_graph(n, seed).unwrap().0),
                "dboll" => AnyGraph::Digraph(gen_boll_digraph(n, 1, seed).unwrap().0),
                "dboll2" => AnyGraph::Digraph(gen_boll_digraph(n, 2, seed).unwrap().0),
                "r3" => AnyGraph::Graph(to_undirected(&gen_m_out(n, 3, seed).unwrap())),
                "d22" => AnyGraph::Digraph(gen_in_out(n, 2, 2, seed).unwrap()),
                _ => panic!("model"),
            };
            let r = solve(&g, &SolveParams::new(seed));
            (r.outcome, r.iterations, r.final_pseudo)
        })
        .collect();
    let ok = res.iter().filter(|r| r.0 == Outcome::Circuit).count();
    let inf = res.iter().filter(|r| r.0 == Outcome::Infeasible).count();
    let mean_it: f64 = res.iter().map(|r| r.1 as f64).sum::<f64>() / res.len() as f64;
    let fails: Vec<usize> = res.iter().filter(|r| r.0 == Outcome::Timeout).map(|r| r.2).collect();
    println!("{model} n={n}: {ok}/{count} circuits, {inf} infeasible, mean iters {mean_it:.0}, timeout final pseudo {fails:?}, {:.1}s", t0.elapsed().as_secs_f64());
}
