//! Plain-text edge lists: a header line `n m`, then `m` lines `u v` with
//! 0-based endpoints and `u < v`. Blank lines and `#` comments are ignored.

use std::io::{BufRead, Write};

use super::{Graph, GraphError};

pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> Result<(), GraphError> {
    let io = |e: std::io::Error| GraphError::Io(e.to_string());
    writeln!(w, "{} {}", g.n(), g.m()).map_err(io)?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: &str| GraphError::Parse { line: i + 1, msg: msg.to_string() };
        let mut fields = line.split_whitespace().map(str::parse::<usize>);
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) => (a, b),
            _ => return Err(parse_err("expected two non-negative integers")),
        };
        if header.is_none() {
            header = Some((a, b));
            continue;
        }
        if a >= b {
            return Err(if a == b {
                GraphError::SelfLoop(a)
            } else {
                parse_err("edge endpoints must satisfy u < v")
            });
        }
        edges.push((a, b));
    }
    let (n, m) = header.ok_or(GraphError::Parse { line: 0, msg: "missing header".into() })?;
    if edges.len() != m {
        return Err(GraphError::EdgeCount { declared: m, found: edges.len() });
    }
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::petersen;

    #[test]
    fn round_trip() {
        let g = petersen();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("10 15\n0 1\n"));
        assert_eq!(read_edge_list(&buf[..]).unwrap(), g);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(read_edge_list("3 1\n1 1\n".as_bytes()), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            read_edge_list("3 2\n0 1\n0 1\n".as_bytes()),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(read_edge_list("3 1\n2 1\n".as_bytes()), Err(GraphError::Parse { .. })));
        assert!(matches!(
            read_edge_list("3 2\n0 1\n".as_bytes()),
            Err(GraphError::EdgeCount { declared: 2, found: 1 })
        ));
        assert!(read_edge_list("# only a comment\n3 0\n".as_bytes()).is_ok());
    }
}
