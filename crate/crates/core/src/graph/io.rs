//! Line-oriented graph database format:
//!
//! ```text
//! t # 0
//! v 0 C
//! v 1 O
//! e 0 1 2
//! ```
//!
//! `t # <id>` opens a graph (the id is informational; graphs are numbered by
//! position), `v <vid> <label>` declares vertices densely and in order, and
//! `e <u> <v> <label>` declares an undirected edge. A trailing `t # -1`
//! terminator, common in benchmark dumps, ends the input.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{Graph, GraphDatabase, GraphError, Label, LabelTables};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn malformed(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Malformed {
        line,
        msg: msg.into(),
    }
}

struct Pending {
    labels: Vec<Label>,
    edges: Vec<(usize, usize, Label)>,
    edge_lines: Vec<usize>,
}

impl Pending {
    fn finish(self, id: usize) -> Result<Graph, ParseError> {
        let Pending {
            labels,
            edges,
            edge_lines,
        } = self;
        // Re-insert one edge at a time so a failure names its own line.
        Graph::from_parts(id, labels.clone(), &edges).map_err(|source| {
            let mut g = Graph::from_parts(id, labels, &[]).expect("no edges");
            let mut line = 0;
            for (k, &(u, v, l)) in edges.iter().enumerate() {
                if g.insert_edge(u, v, l).is_err() {
                    line = edge_lines[k];
                    break;
                }
            }
            ParseError::Graph { line, source }
        })
    }
}

/// Parses a whole database, interning labels into fresh tables.
pub fn parse_db(reader: impl BufRead) -> Result<GraphDatabase, ParseError> {
    let mut labels = LabelTables::default();
    let graphs = parse_graphs(reader, &mut labels)?;
    Ok(GraphDatabase { graphs, labels })
}

/// Parses graphs against existing label tables; unseen tokens get fresh ids.
pub fn parse_graphs(
    reader: impl BufRead,
    tables: &mut LabelTables,
) -> Result<Vec<Graph>, ParseError> {
    let mut graphs = Vec::new();
    let mut current: Option<Pending> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let mut tok = line.split_whitespace();
        let Some(kind) = tok.next() else { continue };
        let rest: Vec<&str> = tok.collect();
        match kind {
            "t" => {
                if rest.len() != 2 || rest[0] != "#" {
                    return Err(malformed(lineno, "expected `t # <id>`"));
                }
                let gid: i64 = rest[1]
                    .parse()
                    .map_err(|_| malformed(lineno, format!("bad graph id `{}`", rest[1])))?;
                if let Some(p) = current.take() {
                    graphs.push(p.finish(graphs.len())?);
                }
                if gid < 0 {
                    return Ok(graphs);
                }
                current = Some(Pending {
                    labels: Vec::new(),
                    edges: Vec::new(),
                    edge_lines: Vec::new(),
                });
            }
            "v" => {
                let p = current
                    .as_mut()
                    .ok_or_else(|| malformed(lineno, "vertex before any `t` line"))?;
                if rest.len() != 2 {
                    return Err(malformed(lineno, "expected `v <vid> <label>`"));
                }
                let vid: usize = rest[0]
                    .parse()
                    .map_err(|_| malformed(lineno, format!("bad vertex id `{}`", rest[0])))?;
                if vid != p.labels.len() {
                    return Err(malformed(
                        lineno,
                        format!("vertex id {vid} out of order, expected {}", p.labels.len()),
                    ));
                }
                p.labels.push(tables.vertex.intern(rest[1]));
            }
            "e" => {
                let p = current
                    .as_mut()
                    .ok_or_else(|| malformed(lineno, "edge before any `t` line"))?;
                if rest.len() != 3 {
                    return Err(malformed(lineno, "expected `e <u> <v> <label>`"));
                }
                let parse_vid = |s: &str| -> Result<usize, ParseError> {
                    let v: usize = s
                        .parse()
                        .map_err(|_| malformed(lineno, format!("bad vertex id `{s}`")))?;
                    if v >= p.labels.len() {
                        return Err(malformed(lineno, format!("dangling vertex reference {v}")));
                    }
                    Ok(v)
                };
                let u = parse_vid(rest[0])?;
                let v = parse_vid(rest[1])?;
                if u == v {
                    return Err(ParseError::Graph {
                        line: lineno,
                        source: GraphError::SelfLoop(u),
                    });
                }
                if p.edges
                    .iter()
                    .any(|&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u))
                {
                    return Err(ParseError::Graph {
                        line: lineno,
                        source: GraphError::DuplicateEdge(u, v),
                    });
                }
                let l = tables.edge.intern(rest[2]);
                p.edges.push((u, v, l));
                p.edge_lines.push(lineno);
            }
            other => return Err(malformed(lineno, format!("unknown record `{other}`"))),
        }
    }
    if let Some(p) = current.take() {
        graphs.push(p.finish(graphs.len())?);
    }
    Ok(graphs)
}

/// Writes graphs in the text format using `tables` to recover tokens.
pub fn write_graphs<'a>(
    mut w: impl Write,
    graphs: impl IntoIterator<Item = &'a Graph>,
    tables: &LabelTables,
) -> io::Result<()> {
    for (pos, g) in graphs.into_iter().enumerate() {
        writeln!(w, "t # {pos}")?;
        for (v, &l) in g.vertex_labels().iter().enumerate() {
            let tok = tables.vertex.token(l).ok_or_else(|| missing_token(l))?;
            writeln!(w, "v {v} {tok}")?;
        }
        for (u, v, l) in g.edges() {
            let tok = tables.edge.token(l).ok_or_else(|| missing_token(l))?;
            writeln!(w, "e {u} {v} {tok}")?;
        }
    }
    Ok(())
}

fn missing_token(l: Label) -> io::Error {
    io::Error::new(
        io::ErrorKind::InvalidData,
        format!("label {l:?} has no token"),
    )
}

pub fn write_db(w: impl Write, db: &GraphDatabase) -> io::Result<()> {
    write_graphs(w, &db.graphs, &db.labels)
}
