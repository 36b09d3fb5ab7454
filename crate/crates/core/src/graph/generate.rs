use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::WeightedGraph;
use crate::error::{ensure_param, Error, Result};

/// Deterministic and random graph families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Complete,
    Star,
    Chain,
    RingLattice,
    BarabasiAlbert,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(Family::Complete),
            "star" => Ok(Family::Star),
            "chain" | "path" => Ok(Family::Chain),
            "ring_lattice" | "ring-lattice" | "ring" => Ok(Family::RingLattice),
            "barabasi_albert" | "barabasi-albert" | "ba" => Ok(Family::BarabasiAlbert),
            other => Err(Error::Parameter(format!("unknown graph family `{other}`"))),
        }
    }
}

/// Generates a member of `family` on `n` vertices.
///
/// `d` is the half-degree of a ring lattice; `m` and `seed` configure the
/// Barabási–Albert growth process. Unused options are ignored.
pub fn generate_graph(
    family: Family,
    n: usize,
    d: Option<usize>,
    m: Option<usize>,
    seed: Option<u64>,
) -> Result<WeightedGraph> {
    match family {
        Family::Complete => complete(n),
        Family::Star => star(n),
        Family::Chain => chain(n),
        Family::RingLattice => {
            let d = d.ok_or_else(|| Error::Parameter("ring lattice requires d".into()))?;
            ring_lattice(n, d)
        }
        Family::BarabasiAlbert => {
            let m = m.ok_or_else(|| Error::Parameter("barabasi_albert requires m".into()))?;
            let seed =
                seed.ok_or_else(|| Error::Parameter("barabasi_albert requires a seed".into()))?;
            barabasi_albert(n, m, seed)
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    ensure_param!(n >= 3, "graph families need n >= 3, got {n}");
    Ok(())
}

pub fn complete(n: usize) -> Result<WeightedGraph> {
    check_n(n)?;
    let mut g = WeightedGraph::empty(n)?;
    for i in 0..n {
        for j in (i + 1)..n {
            g.set_edge(i, j, 1.0)?;
        }
    }
    Ok(g)
}

/// Star with vertex 0 as the hub.
pub fn star(n: usize) -> Result<WeightedGraph> {
    check_n(n)?;
    let mut g = WeightedGraph::empty(n)?;
    for j in 1..n {
        g.set_edge(0, j, 1.0)?;
    }
    Ok(g)
}

pub fn chain(n: usize) -> Result<WeightedGraph> {
    check_n(n)?;
    let mut g = WeightedGraph::empty(n)?;
    for i in 0..n - 1 {
        g.set_edge(i, i + 1, 1.0)?;
    }
    Ok(g)
}

/// `2d`-regular ring lattice: every vertex is joined to its `d` nearest
/// neighbours on each side.
pub fn ring_lattice(n: usize, d: usize) -> Result<WeightedGraph> {
    check_n(n)?;
    ensure_param!(d >= 1, "ring lattice needs d >= 1");
    ensure_param!(
        n > 2 * d,
        "ring lattice needs n >= 2d + 1 (n = {n}, d = {d})"
    );
    let mut g = WeightedGraph::empty(n)?;
    for i in 0..n {
        for k in 1..=d {
            g.set_edge(i, (i + k) % n, 1.0)?;
        }
    }
    Ok(g)
}

/// Preferential-attachment growth from an `m`-vertex clique; each arriving
/// vertex adds `m` unit edges to distinct existing vertices chosen with
/// probability proportional to degree. Duplicate targets are resampled.
pub fn barabasi_albert(n: usize, m: usize, seed: u64) -> Result<WeightedGraph> {
    check_n(n)?;
    ensure_param!(
        m >= 1 && m < n,
        "barabasi_albert needs 1 <= m < n (m = {m}, n = {n})"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = WeightedGraph::empty(n)?;
    // Every edge contributes both endpoints, so uniform draws from this list
    // are degree-proportional.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * m * n);
    for i in 0..m {
        for j in (i + 1)..m {
            g.set_edge(i, j, 1.0)?;
            endpoints.extend([i, j]);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for v in m..n {
        targets.clear();
        while targets.len() < m {
            let t = if endpoints.is_empty() {
                rng.random_range(0..v)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            g.set_edge(v, t, 1.0)?;
            endpoints.extend([v, t]);
        }
    }
    Ok(g)
}
