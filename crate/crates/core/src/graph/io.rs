//! Text formats.
//!
//! Graph files are line oriented: a header `graph <n>` followed by
//! `edge <i> <j>` lines and optional `label <i> <text>` lines. Blank lines
//! and anything after `#` are ignored. Potential files hold
//! whitespace-separated reals, with the same comment rule.

use crate::error::{Error, Result};

use super::Graph;

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut labels: Vec<Option<String>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let line_no = lineno + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let mut parts = line.split_whitespace();
        let keyword = parts.next().unwrap_or("");
        let mut int = |what: &str| -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| err(format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|e| err(format!("bad {what}: {e}")))
        };
        match keyword {
            "graph" => {
                if n.is_some() {
                    return Err(err("repeated header".into()));
                }
                let count = int("vertex count")?;
                n = Some(count);
                labels = vec![None; count];
            }
            "edge" => {
                if n.is_none() {
                    return Err(err("edge before header".into()));
                }
                let i = int("endpoint")?;
                let j = int("endpoint")?;
                edges.push((i, j));
            }
            "label" => {
                let i = int("vertex")?;
                let rest: Vec<&str> = parts.collect();
                if i >= labels.len() {
                    return Err(err(format!("label for unknown vertex {i}")));
                }
                labels[i] = Some(rest.join(" "));
            }
            other => return Err(err(format!("unknown keyword `{other}`"))),
        }
        if keyword != "label" {
            if let Some(extra) = line.split_whitespace().nth(if keyword == "graph" { 2 } else { 3 }) {
                return Err(err(format!("trailing token `{extra}`")));
            }
        }
    }
    let n = n.ok_or(Error::Parse {
        line: 0,
        msg: "missing `graph <n>` header".into(),
    })?;
    let g = Graph::new(n, edges)?;
    if labels.iter().any(Option::is_some) {
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| l.unwrap_or_else(|| i.to_string()))
            .collect();
        return g.with_labels(labels);
    }
    Ok(g)
}

impl Graph {
    pub fn to_text(&self) -> String {
        let mut s = format!("graph {}\n", self.vertex_count());
        for (i, j) in self.edges() {
            s.push_str(&format!("edge {i} {j}\n"));
        }
        if let Some(labels) = self.labels() {
            for (i, l) in labels.iter().enumerate() {
                s.push_str(&format!("label {i} {l}\n"));
            }
        }
        s
    }
}

pub fn parse_potential(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let x: f64 = tok.parse().map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: format!("bad number `{tok}`: {e}"),
            })?;
            if !x.is_finite() {
                return Err(Error::NonFinitePotential(out.len()));
            }
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = Graph::cycle(5);
        let back = parse_graph(&g.to_text()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn comments_and_labels() {
        let g = parse_graph("# a triangle\ngraph 3\nedge 0 1\nedge 1 2 # last\nedge 2 0\nlabel 1 middle one\n")
            .unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.labels().unwrap()[1], "middle one");
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_graph("graph 2\nedge 0 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_graph("edge 0 1\n").is_err());
        assert!(parse_graph("graph 2\nedge 0 0\n").is_err());
    }

    #[test]
    fn potentials() {
        assert_eq!(parse_potential("1 2.5 # c\n-3\n").unwrap(), vec![1.0, 2.5, -3.0]);
        assert!(parse_potential("1 nan").is_err());
    }
}
