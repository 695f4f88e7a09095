//! Plain-text graph and degree-sequence formats.
//!
//! Graphs: a header `n=<int>`, then one `u v mult` line per vertex pair and one
//! `loop u count` line per looped vertex. Blank lines and `#` comments are ignored.
//! Degree sequences: one integer per line.

use std::fmt::Write as _;

use super::{MultiGraph, MultiGraphBuilder};
use crate::error::{Error, Result};

pub fn write_graph(g: &MultiGraph) -> String {
    let mut out = format!("n={}\n", g.n());
    for (u, v, m) in g.edges() {
        if u == v {
            writeln!(out, "loop {u} {m}").unwrap();
        } else {
            writeln!(out, "{u} {v} {m}").unwrap();
        }
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_graph(text: &str) -> Result<MultiGraph> {
    let mut builder: Option<MultiGraphBuilder> = None;
    let mut n = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let lno = i + 1;
        if let Some(rest) = line.strip_prefix("n=") {
            n = rest.trim().parse().map_err(|_| perr(lno, "bad vertex count"))?;
            builder = Some(MultiGraphBuilder::new(n));
            continue;
        }
        let b = builder.as_mut().ok_or_else(|| perr(lno, "missing n=<int> header"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| perr(lno, format!("not an integer: {s}")));
        let (u, v, m) = match toks.as_slice() {
            ["loop", u, c] => {
                let u = num(u)?;
                (u, u, num(c)?)
            }
            [u, v, m] => (num(u)?, num(v)?, num(m)?),
            _ => return Err(perr(lno, "expected `u v mult` or `loop u count`")),
        };
        if u >= n || v >= n {
            return Err(perr(lno, "vertex out of range"));
        }
        b.add_edges(u, v, m as u32);
    }
    builder.map(|b| b.build()).ok_or_else(|| perr(0, "empty input"))
}

pub fn write_degrees(d: &[usize]) -> String {
    d.iter().map(|x| format!("{x}\n")).collect()
}

pub fn parse_degrees(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| l.trim().parse().map_err(|_| perr(i + 1, "not a non-negative integer")))
        .collect()
}
