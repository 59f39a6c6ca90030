//! Text format for curve diagrams.
//!
//! ```text
//! # comment
//! VERTICES 62
//! HALFEDGES
//! <id> <origin> <twin> <next>
//! EDGES
//! <half-edge> <none|c1|c2> <along half-edge|->
//! KIND c1 <point|loop> [face]
//! KIND c2 <point|loop> [face]
//! CHI -2
//! ```
//!
//! Edges without a record are unlabelled.

use super::{Curve, CurveDiagram, CurveKind, EdgeRecord, HalfEdge, LinkError};

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    HalfEdges,
    Edges,
}

fn err(line: usize, msg: impl Into<String>) -> LinkError {
    LinkError::Parse { line, msg: msg.into() }
}

fn num(tok: &str, line: usize) -> Result<usize, LinkError> {
    tok.parse().map_err(|_| err(line, format!("expected a nonnegative integer, found '{tok}'")))
}

fn curve_name(tok: &str, line: usize) -> Result<Curve, LinkError> {
    match tok {
        "c1" => Ok(Curve::C1),
        "c2" => Ok(Curve::C2),
        _ => Err(err(line, format!("unknown curve '{tok}'"))),
    }
}

pub fn parse_cdg(text: &str) -> Result<CurveDiagram, LinkError> {
    let mut section = Section::Header;
    let mut n_vertices = None;
    let mut half_edges: Vec<(usize, HalfEdge, usize)> = Vec::new();
    let mut edges = Vec::new();
    let mut kinds: [Option<CurveKind>; 2] = [None, None];
    let mut chi = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "VERTICES" => {
                let [_, n] = toks[..] else { return Err(err(line, "VERTICES takes one count")) };
                n_vertices = Some(num(n, line)?);
                section = Section::Header;
            }
            "HALFEDGES" => section = Section::HalfEdges,
            "EDGES" => section = Section::Edges,
            "KIND" => {
                let c = curve_name(toks.get(1).copied().unwrap_or(""), line)?;
                let kind = match &toks[2..] {
                    ["point"] => CurveKind::Point { face: None },
                    ["point", f] => CurveKind::Point { face: Some(num(f, line)?) },
                    ["loop"] => CurveKind::Loop,
                    _ => return Err(err(line, "KIND expects 'point [face]' or 'loop'")),
                };
                if kinds[c.index()].replace(kind).is_some() {
                    return Err(err(line, format!("KIND {c} given twice")));
                }
                section = Section::Header;
            }
            "CHI" => {
                let [_, v] = toks[..] else { return Err(err(line, "CHI takes one integer")) };
                chi = Some(v.parse::<i64>().map_err(|_| err(line, format!("bad integer '{v}'")))?);
                section = Section::Header;
            }
            _ => match section {
                Section::HalfEdges => {
                    let [id, o, t, n] = toks[..] else {
                        return Err(err(line, "half-edge lines are '<id> <origin> <twin> <next>'"));
                    };
                    let he = HalfEdge { origin: num(o, line)?, twin: num(t, line)?, next: num(n, line)? };
                    half_edges.push((num(id, line)?, he, line));
                }
                Section::Edges => {
                    let [h, label, along] = toks[..] else {
                        return Err(err(line, "edge lines are '<half-edge> <label> <along>'"));
                    };
                    let label = match label {
                        "none" => None,
                        other => Some(curve_name(other, line)?),
                    };
                    let along = match along {
                        "-" => None,
                        a => Some(num(a, line)?),
                    };
                    edges.push(EdgeRecord { half_edge: num(h, line)?, label, along });
                }
                Section::Header => return Err(err(line, format!("unexpected '{}'", toks[0]))),
            },
        }
    }

    let last = text.lines().count();
    let n_vertices = n_vertices.ok_or_else(|| err(last, "missing VERTICES"))?;
    let chi = chi.ok_or_else(|| err(last, "missing CHI"))?;
    let kinds = [
        kinds[0].ok_or_else(|| err(last, "missing KIND c1"))?,
        kinds[1].ok_or_else(|| err(last, "missing KIND c2"))?,
    ];
    let mut slots: Vec<Option<HalfEdge>> = vec![None; half_edges.len()];
    for (id, he, line) in half_edges {
        match slots.get_mut(id) {
            Some(slot @ None) => *slot = Some(he),
            Some(Some(_)) => return Err(err(line, format!("half-edge {id} defined twice"))),
            None => return Err(err(line, format!("half-edge ids must be 0..{}", slots.len()))),
        }
    }
    let half_edges = slots.into_iter().map(|s| s.expect("ids fill the range")).collect();
    Ok(CurveDiagram { n_vertices, half_edges, edges, kinds, chi })
}

pub fn write_cdg(d: &CurveDiagram) -> String {
    let mut out = format!("VERTICES {}\nHALFEDGES\n", d.n_vertices);
    for (i, h) in d.half_edges.iter().enumerate() {
        out.push_str(&format!("{i} {} {} {}\n", h.origin, h.twin, h.next));
    }
    out.push_str("EDGES\n");
    for e in &d.edges {
        let label = e.label.map_or("none", Curve::name);
        let along = e.along.map_or("-".to_string(), |a| a.to_string());
        out.push_str(&format!("{} {label} {along}\n", e.half_edge));
    }
    for c in Curve::BOTH {
        let kind = match d.kinds[c.index()] {
            CurveKind::Loop => "loop".to_string(),
            CurveKind::Point { face: None } => "point".to_string(),
            CurveKind::Point { face: Some(f) } => format!("point {f}"),
        };
        out.push_str(&format!("KIND {c} {kind}\n"));
    }
    out.push_str(&format!("CHI {}\n", d.chi));
    out
}
