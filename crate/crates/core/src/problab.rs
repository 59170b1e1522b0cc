//! Closed forms, exhaustive model counts and Monte Carlo estimators for the admissibility
//! probabilities, plus degree censuses on Boll graphs.

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graphgen::{gen_boll_digraph, gen_boll_graph, rng};

pub type Q = Ratio<i128>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProbError {
    #[error("n = {0} is below 4; the formula is degenerate")]
    TooSmall(usize),
    #[error("trials must be at least 1")]
    NoTrials,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub target: f64,
    /// exact target as "num/den"
    pub target_exact: String,
    pub abs_error: f64,
}

impl TrialStats {
    fn new(trials: u64, successes: u64, target: Q) -> Self {
        let estimate = successes as f64 / trials as f64;
        let t = to_f64(target);
        TrialStats { trials, successes, estimate, target: t, target_exact: target.to_string(), abs_error: (estimate - t).abs() }
    }
}

pub fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn check(n: usize) -> Result<i128, ProbError> {
    if n < 4 {
        Err(ProbError::TooSmall(n))
    } else {
        Ok(n as i128)
    }
}

fn q(a: i128, b: i128) -> Q {
    Ratio::new(a, b)
}

/// (n−3)/(2(n−2))
pub fn p_admissible_3cycle(n: usize) -> Result<Q, ProbError> {
    let n = check(n)?;
    Ok(q(n - 3, 2 * (n - 2)))
}

/// (n−3)/(3(n−2))
pub fn p_chords_intersect(n: usize) -> Result<Q, ProbError> {
    let n = check(n)?;
    Ok(q(n - 3, 3 * (n - 2)))
}

/// (both, first only, second only, neither), m = n−2.
pub fn lemma1_probs(n: usize) -> Result<[Q; 4], ProbError> {
    let m = check(n)? - 2;
    let d = 6 * m * m;
    Ok([q(2 * m * m - 3 * m + 1, d), q(m * m - 1, d), q(m * m - 1, d), q(2 * m * m + 3 * m + 1, d)])
}

/// (P3, P2, P1, P0), m = n−2.
pub fn lemma2_probs(n: usize) -> Result<[Q; 4], ProbError> {
    let m = check(n)? - 2;
    let d = 4 * m * m;
    Ok([q(m * m - 2 * m + 1, d), q(m * m - 1, d), q(m * m - 1, d), q(m * m + 2 * m + 1, d)])
}

/// Lower bound p on two admissible permutations through a vertex, and its complement p'.
pub fn p_two_admissible(n: usize) -> Result<(Q, Q), ProbError> {
    let m = check(n)? - 2;
    let m2 = m * m;
    let d = 16 * m2 * m2;
    Ok((q(13 * m2 * m2 - 8 * m2 * m - 6 * m2 + 1, d), q(3 * m2 * m2 + 8 * m2 * m + 6 * m2 - 1, d)))
}

/// p' recomputed as p₀q₀ + p₀q₁ + p₁q₀ from the two-pair case probabilities.
pub fn p_two_admissible_complement_from_cases(n: usize) -> Result<Q, ProbError> {
    let [_, p1, _, p0] = lemma2_probs(n)?;
    Ok(p0 * p0 + p0 * p1 + p1 * p0)
}

/// Exact count over the anchored model: first chord (1, j) with 3 ≤ j ≤ n, then k ∉ {1, j};
/// (1 j k) is admissible on (1 2 … n) iff k lies after j.
pub fn exhaustive_admissible_3cycle(n: usize) -> Result<Q, ProbError> {
    let n = check(n)? as usize;
    let (mut hit, mut all) = (0i128, 0i128);
    for j in 3..=n {
        for k in (2..=n).filter(|&k| k != j) {
            all += 1;
            hit += (k > j) as i128;
        }
    }
    Ok(q(hit, all))
}

/// Exact count over e₁ = (1, j), second chord (r, s) with 2 ≤ r < j and s ∈ {2..n} \ {j}.
pub fn exhaustive_chords_intersect(n: usize) -> Result<Q, ProbError> {
    let n = check(n)? as usize;
    let (mut hit, mut all) = (0i128, 0i128);
    for j in 3..=n {
        for _r in 2..j {
            for s in (2..=n).filter(|&s| s != j) {
                all += 1;
                hit += (s > j) as i128;
            }
        }
    }
    Ok(q(hit, all))
}

/// Exact four-tuple of the shared-anchor model: j, H(c), d uniform on 1..=m.
pub fn exhaustive_lemma1(n: usize) -> Result<[Q; 4], ProbError> {
    let m = check(n)? - 2;
    let mut c = [0i128; 4];
    for j in 1..=m {
        for x in 1..=m {
            for y in 1..=m {
                c[case(x > j, y > j)] += 1;
            }
        }
    }
    Ok(c.map(|k| q(k, m * m * m)))
}

/// Exact four-tuple of the independent-pair model: two independent chord pairs.
pub fn exhaustive_lemma2(n: usize) -> Result<[Q; 4], ProbError> {
    let m = check(n)? - 2;
    let mut c = [0i128; 4];
    for j1 in 1..=m {
        for x in 1..=m {
            for j2 in 1..=m {
                for y in 1..=m {
                    c[case(x > j1, y > j2)] += 1;
                }
            }
        }
    }
    Ok(c.map(|k| q(k, m.pow(4))))
}

fn case(a: bool, b: bool) -> usize {
    match (a, b) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

fn trials_ok(trials: u64) -> Result<(), ProbError> {
    if trials == 0 {
        Err(ProbError::NoTrials)
    } else {
        Ok(())
    }
}

pub fn estimate_admissible_3cycle(n: usize, trials: u64, seed: u64) -> Result<TrialStats, ProbError> {
    let target = p_admissible_3cycle(n)?;
    trials_ok(trials)?;
    let mut r = rng(seed);
    let mut hit = 0;
    for _ in 0..trials {
        let j = r.gen_range(3..=n);
        // k uniform on {2..n} \ {j}
        let mut k = r.gen_range(2..n);
        if k >= j {
            k += 1;
        }
        hit += (k > j) as u64;
    }
    Ok(TrialStats::new(trials, hit, target))
}

pub fn estimate_chords_intersect(n: usize, trials: u64, seed: u64) -> Result<TrialStats, ProbError> {
    let target = p_chords_intersect(n)?;
    trials_ok(trials)?;
    let mut r = rng(seed);
    let mut hit = 0;
    for _ in 0..trials {
        // (r, j) uniform over 2 ≤ r < j ≤ n; only j decides the outcome
        let j = loop {
            let a = r.gen_range(2..=n);
            let b = r.gen_range(2..=n);
            if a != b {
                break a.max(b);
            }
        };
        let mut s = r.gen_range(2..n);
        if s >= j {
            s += 1;
        }
        hit += (s > j) as u64;
    }
    Ok(TrialStats::new(trials, hit, target))
}

/// Monte Carlo of the shared-anchor model; returns stats for the "both" case.
pub fn estimate_lemma1_both(n: usize, trials: u64, seed: u64) -> Result<TrialStats, ProbError> {
    let target = lemma1_probs(n)?[0];
    trials_ok(trials)?;
    let m = n - 2;
    let mut r = rng(seed);
    let mut hit = 0;
    for _ in 0..trials {
        let j = r.gen_range(1..=m);
        let x = r.gen_range(1..=m);
        let y = r.gen_range(1..=m);
        hit += (x > j && y > j) as u64;
    }
    Ok(TrialStats::new(trials, hit, target))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusRow {
    pub n: usize,
    pub seeds: u64,
    pub vertices: u64,
    pub hits: u64,
    pub fraction: f64,
    pub bound: f64,
    pub pass: bool,
}

/// log(c·n·(log n)²)/(2n)
pub fn degree2_bound(n: usize, c: f64) -> f64 {
    let n = n as f64;
    (c * n * n.ln().powi(2)).ln() / (2.0 * n)
}

/// (log n)/n
pub fn unique_arc_bound(n: usize) -> f64 {
    (n as f64).ln() / n as f64
}

/// Fraction of degree-2 vertices over Boll graphs, against the bound with constant `c`.
pub fn degree2_census(n_values: &[usize], seeds: u64, c: f64) -> Vec<CensusRow> {
    n_values
        .iter()
        .map(|&n| {
            let mut hits = 0u64;
            for seed in 0..seeds {
                let (g, _) = gen_boll_graph(n, seed).expect("n ≥ 3");
                hits += (0..n).filter(|&v| g.degree(v) == 2).count() as u64;
            }
            row(n, seeds, hits, degree2_bound(n, c))
        })
        .collect()
}

/// Fraction of vertices with a single out-arc over Boll digraphs, against slack·(log n)/n.
pub fn unique_arc_census(n_values: &[usize], seeds: u64, slack: f64) -> Vec<CensusRow> {
    n_values
        .iter()
        .map(|&n| {
            let mut hits = 0u64;
            for seed in 0..seeds {
                let (d, _) = gen_boll_digraph(n, 1, seed).expect("n ≥ 2");
                hits += (0..n).filter(|&v| d.outdeg(v) == 1).count() as u64;
            }
            row(n, seeds, hits, slack * unique_arc_bound(n))
        })
        .collect()
}

fn row(n: usize, seeds: u64, hits: u64, bound: f64) -> CensusRow {
    let vertices = n as u64 * seeds;
    let fraction = hits as f64 / vertices as f64;
    CensusRow { n, seeds, vertices, hits, fraction, bound, pass: fraction <= bound }
}
