//! Plain-text edge lists: a header line `n m`, then `m` lines `i j w` with
//! 1-based vertex indices and positive weights. Lines starting with `#` and
//! blank lines are skipped. Each undirected edge is listed once.

use std::fmt::Write as _;
use std::path::Path;

use super::WeightedGraph;
use crate::error::{Error, Result};

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

pub fn parse_edge_list(text: &str) -> Result<WeightedGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Format {
        line: 0,
        msg: "missing `n m` header".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::Format {
            line: hline,
            msg: "header must be `n m`".into(),
        });
    }
    let n: usize = parse_field(fields[0], hline, "n")?;
    let m: usize = parse_field(fields[1], hline, "m")?;
    if n < 2 {
        return Err(Error::Format {
            line: hline,
            msg: format!("n must be >= 2, got {n}"),
        });
    }

    let mut g = WeightedGraph::empty(n)?;
    let mut count = 0;
    for (line, content) in lines {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Format {
                line,
                msg: "expected `i j w`".into(),
            });
        }
        let i: usize = parse_field(fields[0], line, "i")?;
        let j: usize = parse_field(fields[1], line, "j")?;
        let w: f64 = parse_field(fields[2], line, "w")?;
        let bad = |msg: String| Error::Format { line, msg };
        if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
            return Err(bad(format!("vertex index out of range 1..={n}")));
        }
        if i == j {
            return Err(bad("self loops are not allowed".into()));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(bad(format!("weight must be positive, got {w}")));
        }
        if g.weight(i - 1, j - 1) != 0.0 {
            return Err(bad(format!("duplicate edge {i} {j}")));
        }
        g.set_edge(i - 1, j - 1, w)?;
        count += 1;
    }
    if count != m {
        return Err(Error::Format {
            line: hline,
            msg: format!("header declares {m} edges, found {count}"),
        });
    }
    Ok(g)
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, name: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Format {
        line,
        msg: format!("cannot parse {name} from `{s}`"),
    })
}

pub fn write_edge_list(g: &WeightedGraph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edge_count());
    for (i, j, w) in g.edges() {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, w);
    }
    out
}
