//! Homophilous follow graph construction.
//!
//! Each agent follows a fixed number of others, drawn without
//! replacement with weights from the partisanship distance between the
//! pair. The weight formula is pinned:
//!
//! ```text
//! d = |P_i - P_j| / 2          (normalized distance in [0, 1])
//! w = 1 - d^H                  (H >= 0)
//! ```
//!
//! Note the direction this gives H: raising H pushes d^H toward 0 for
//! d < 1, so weights flatten toward 1 and the graph gets *more*
//! cross-partisan, not less. H = 0 makes every distinct-P weight zero,
//! which triggers the uniform fallback below, so H = 0 reproduces a
//! uniform random graph.
//!
//! Zero-weight candidates are never drawn while any positive-weight
//! candidate remains; once positive weights are exhausted the remaining
//! slots fill uniformly at random.

use crate::persona::Party;
use crate::seed::rng_for;
use crate::AgentId;
use rand::Rng;
use std::io::{self, BufRead, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct FollowGraph {
    pub n: usize,
    pub out_degree: usize,
    pub homophily: f64,
    pub seed: u64,
    /// Followees per follower, in draw order.
    edges: Vec<Vec<AgentId>>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("graph needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("out_degree {out_degree} must be in 1..={max} for {n} agents")]
    BadOutDegree { out_degree: usize, max: usize, n: usize },
    #[error("homophily exponent must be finite and >= 0, got {0}")]
    BadHomophily(f64),
    #[error("graph file line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Follow propensity between two partisanship scores.
pub fn connection_weight(p_i: f64, p_j: f64, homophily: f64) -> f64 {
    let d = (p_i - p_j).abs() / 2.0;
    1.0 - d.powf(homophily)
}

impl FollowGraph {
    pub fn followees(&self, agent: AgentId) -> &[AgentId] {
        &self.edges[agent]
    }

    pub fn follows(&self, follower: AgentId, followee: AgentId) -> bool {
        self.edges[follower].contains(&followee)
    }

    /// All (follower, followee) pairs in file order.
    pub fn iter_edges(&self) -> impl Iterator<Item = (AgentId, AgentId)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(i, out)| out.iter().map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.out_degree
    }
}

/// Build the follow graph for the given partisanship scores.
///
/// Deterministic in (`partisanship`, `out_degree`, `homophily`, `seed`);
/// each follower gets its own labeled RNG stream so a single row can be
/// reproduced in isolation.
pub fn generate_follow_graph(
    partisanship: &[f64],
    out_degree: usize,
    homophily: f64,
    seed: u64,
) -> Result<FollowGraph, GraphError> {
    let n = partisanship.len();
    if n < 2 {
        return Err(GraphError::TooFewAgents(n));
    }
    if out_degree == 0 || out_degree > n - 1 {
        return Err(GraphError::BadOutDegree { out_degree, max: n - 1, n });
    }
    if !homophily.is_finite() || homophily < 0.0 {
        return Err(GraphError::BadHomophily(homophily));
    }

    let mut edges = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = rng_for(seed, &format!("graph-follower-{i}"));
        let mut candidates: Vec<AgentId> = (0..n).filter(|&j| j != i).collect();
        let mut weights: Vec<f64> = candidates
            .iter()
            .map(|&j| connection_weight(partisanship[i], partisanship[j], homophily))
            .collect();
        let mut positive = weights.iter().filter(|&&w| w > 0.0).count();

        let mut out = Vec::with_capacity(out_degree);
        for _ in 0..out_degree {
            let pick = if positive > 0 {
                // Weighted draw by cumulative walk.
                let total: f64 = weights.iter().sum();
                let x = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut chosen = candidates.len() - 1;
                for (idx, &w) in weights.iter().enumerate() {
                    acc += w;
                    if w > 0.0 && x < acc {
                        chosen = idx;
                        break;
                    }
                }
                // Floating point slop can push x past the final cumulative
                // sum; fall back to the last positive-weight candidate.
                while weights[chosen] <= 0.0 {
                    chosen -= 1;
                }
                chosen
            } else {
                // All remaining weights are zero: uniform fallback.
                rng.random_range(0..candidates.len())
            };
            if weights[pick] > 0.0 {
                positive -= 1;
            }
            out.push(candidates.swap_remove(pick));
            weights.swap_remove(pick);
        }
        edges.push(out);
    }

    Ok(FollowGraph { n, out_degree, homophily, seed, edges })
}

/// Fraction of follower->followee edges that cross major-party lines,
/// over edges where both endpoints carry a major-party label.
pub fn cross_party_fraction(graph: &FollowGraph, party_of: &[Party]) -> Option<f64> {
    let mut major = 0usize;
    let mut cross = 0usize;
    for (i, j) in graph.iter_edges() {
        if party_of[i].is_major() && party_of[j].is_major() {
            major += 1;
            if party_of[i] != party_of[j] {
                cross += 1;
            }
        }
    }
    if major == 0 {
        None
    } else {
        Some(cross as f64 / major as f64)
    }
}

/// Write the edge list: a comment header carrying the generation
/// parameters, then one `follower followee` pair per line in draw order.
pub fn write_edges<W: Write>(mut w: W, graph: &FollowGraph) -> io::Result<()> {
    writeln!(
        w,
        "# follow-graph n={} out_degree={} homophily={} seed={}",
        graph.n, graph.out_degree, graph.homophily, graph.seed
    )?;
    for (i, j) in graph.iter_edges() {
        writeln!(w, "{i} {j}")?;
    }
    Ok(())
}

pub fn write_edges_file(path: &Path, graph: &FollowGraph) -> io::Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(f);
    write_edges(&mut w, graph)?;
    w.flush()
}

/// Read an edge list written by [`write_edges`].
pub fn read_edges<R: BufRead>(r: R) -> Result<FollowGraph, GraphError> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| GraphError::Parse { line: 1, reason: "empty file".into() })
        .and_then(|(i, l)| l.map(|l| (i, l)).map_err(GraphError::Io))?;

    let mut n = None;
    let mut out_degree = None;
    let mut homophily = None;
    let mut seed = None;
    let body = header
        .strip_prefix("# follow-graph")
        .ok_or_else(|| GraphError::Parse { line: 1, reason: "missing follow-graph header".into() })?;
    for token in body.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| GraphError::Parse { line: 1, reason: format!("bad token {token:?}") })?;
        let bad = || GraphError::Parse { line: 1, reason: format!("bad value for {key}") };
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
            "out_degree" => out_degree = Some(value.parse::<usize>().map_err(|_| bad())?),
            "homophily" => homophily = Some(value.parse::<f64>().map_err(|_| bad())?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad())?),
            _ => {
                return Err(GraphError::Parse { line: 1, reason: format!("unknown key {key:?}") })
            }
        }
    }
    let (n, out_degree, homophily, seed) = match (n, out_degree, homophily, seed) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => {
            return Err(GraphError::Parse { line: 1, reason: "incomplete header".into() });
        }
    };

    let mut edges: Vec<Vec<AgentId>> = vec![Vec::with_capacity(out_degree); n];
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse_id = |s: Option<&str>| -> Result<usize, GraphError> {
            s.and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| GraphError::Parse { line: line_no, reason: "expected two ids".into() })
        };
        let i = parse_id(parts.next())?;
        let j = parse_id(parts.next())?;
        if parts.next().is_some() {
            return Err(GraphError::Parse { line: line_no, reason: "trailing tokens".into() });
        }
        if i >= n || j >= n {
            return Err(GraphError::Parse { line: line_no, reason: format!("id out of range: {i} {j}") });
        }
        if i == j {
            return Err(GraphError::Parse { line: line_no, reason: "self-follow".into() });
        }
        if edges[i].contains(&j) {
            return Err(GraphError::Parse { line: line_no, reason: format!("duplicate edge {i} {j}") });
        }
        edges[i].push(j);
    }
    for (i, out) in edges.iter().enumerate() {
        if out.len() != out_degree {
            return Err(GraphError::Parse {
                line: 1,
                reason: format!("agent {i} has {} followees, expected {out_degree}", out.len()),
            });
        }
    }
    Ok(FollowGraph { n, out_degree, homophily, seed, edges })
}

pub fn read_edges_file(path: &Path) -> Result<FollowGraph, GraphError> {
    let f = std::fs::File::open(path)?;
    read_edges(io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persona::party_label;

    fn bimodal(n: usize) -> Vec<f64> {
        (0..n).map(|i| if i % 2 == 0 { 0.8 } else { -0.8 }).collect()
    }

    #[test]
    fn weight_formula_examples() {
        // d = |0.9 - (-0.1)| / 2 = 0.5; H = 2 -> 1 - 0.25 = 0.75
        assert!((connection_weight(0.9, -0.1, 2.0) - 0.75).abs() < 1e-12);
        // Identical scores attract maximally for any positive H.
        assert_eq!(connection_weight(0.3, 0.3, 1.0), 1.0);
        assert_eq!(connection_weight(0.3, 0.3, 7.5), 1.0);
        // Maximal distance gives zero weight regardless of H.
        assert_eq!(connection_weight(1.0, -1.0, 0.5), 0.0);
        assert_eq!(connection_weight(1.0, -1.0, 3.0), 0.0);
        // H = 0 collapses every distinct pair to zero weight.
        assert_eq!(connection_weight(0.2, 0.1, 0.0), 0.0);
    }

    #[test]
    fn weight_increases_with_homophily_exponent() {
        // For 0 < d < 1, d^H falls as H rises, so the weight rises:
        // larger H means a flatter, more cross-party graph.
        let w1 = connection_weight(0.8, -0.8, 1.0);
        let w2 = connection_weight(0.8, -0.8, 2.0);
        let w4 = connection_weight(0.8, -0.8, 4.0);
        assert!(w1 < w2 && w2 < w4, "{w1} {w2} {w4}");
    }

    #[test]
    fn graph_shape_invariants() {
        let p = bimodal(40);
        let g = generate_follow_graph(&p, 7, 1.0, 11).unwrap();
        assert_eq!(g.n, 40);
        for i in 0..g.n {
            let out = g.followees(i);
            assert_eq!(out.len(), 7);
            assert!(!out.contains(&i), "self-follow at {i}");
            let mut dedup = out.to_vec();
            dedup.sort_unstable();
            dedup.dedup();
            assert_eq!(dedup.len(), 7, "duplicate followee at {i}");
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let p = bimodal(30);
        let a = generate_follow_graph(&p, 5, 2.0, 99).unwrap();
        let b = generate_follow_graph(&p, 5, 2.0, 99).unwrap();
        let c = generate_follow_graph(&p, 5, 2.0, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_weight_candidates_wait_for_positive_ones() {
        // Follower 0 at P=1.0; one candidate at the same pole (w=1),
        // the other at the opposite pole (w=0). With out_degree 1 the
        // same-pole candidate must win every seed.
        let p = [1.0, 1.0, -1.0];
        for seed in 0..20 {
            let g = generate_follow_graph(&p, 1, 2.0, seed).unwrap();
            assert_eq!(g.followees(0), &[1], "seed {seed}");
        }
        // With out_degree 2 the zero-weight candidate fills the last slot.
        let g = generate_follow_graph(&p, 2, 2.0, 3).unwrap();
        assert_eq!(g.followees(0), &[1, 2]);
    }

    #[test]
    fn higher_exponent_gives_more_cross_party_edges() {
        let p = bimodal(60);
        let party: Vec<Party> = p.iter().map(|&v| party_label(v, 0.1)).collect();
        let mut lo_sum = 0.0;
        let mut hi_sum = 0.0;
        for seed in 0..5 {
            let lo = generate_follow_graph(&p, 10, 0.25, seed).unwrap();
            let hi = generate_follow_graph(&p, 10, 4.0, seed).unwrap();
            lo_sum += cross_party_fraction(&lo, &party).unwrap();
            hi_sum += cross_party_fraction(&hi, &party).unwrap();
        }
        assert!(
            lo_sum < hi_sum,
            "expected more cross edges at higher H: {lo_sum} vs {hi_sum}"
        );
    }

    #[test]
    fn bad_parameters_rejected() {
        let p = bimodal(10);
        assert!(matches!(
            generate_follow_graph(&p, 0, 1.0, 1),
            Err(GraphError::BadOutDegree { .. })
        ));
        assert!(matches!(
            generate_follow_graph(&p, 10, 1.0, 1),
            Err(GraphError::BadOutDegree { .. })
        ));
        assert!(matches!(
            generate_follow_graph(&p, 3, -1.0, 1),
            Err(GraphError::BadHomophily(_))
        ));
        assert!(matches!(
            generate_follow_graph(&p, 3, f64::NAN, 1),
            Err(GraphError::BadHomophily(_))
        ));
        assert!(matches!(generate_follow_graph(&[0.5], 1, 1.0, 1), Err(GraphError::TooFewAgents(1))));
    }

    #[test]
    fn edge_list_roundtrip() {
        let p = bimodal(20);
        let g = generate_follow_graph(&p, 4, 1.5, 7).unwrap();
        let mut buf = Vec::new();
        write_edges(&mut buf, &g).unwrap();
        let back = read_edges(&buf[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn malformed_edge_lists_rejected() {
        let cases: [&str; 5] = [
            "0 1\n",
            "# follow-graph n=2 out_degree=1 homophily=1 seed=0\n0 0\n1 0\n",
            "# follow-graph n=2 out_degree=1 homophily=1 seed=0\n0 5\n1 0\n",
            "# follow-graph n=2 out_degree=1 homophily=1 seed=0\n0 1\n",
            "# follow-graph n=2 out_degree=1 homophily=1 seed=0\n0 1\n0 1\n1 0\n",
        ];
        for case in cases {
            assert!(read_edges(case.as_bytes()).is_err(), "accepted: {case:?}");
        }
    }
}
