//! Line-oriented instance format.
//!
//! ```text
//! # theta graph with a swap
//! [graph]
//! basepoint = *
//! vertex v
//! edge e1 : * -> v
//! edge e2 : * -> v
//! edge e3 : * -> v
//! [group]
//! order = 2
//! gen t : e2->e3, e3->e2
//! [marking]
//! x1 = e1 ~e2
//! x2 = e1 ~e3
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ggraph::{Dart, GGraph};
use crate::marking::{EdgePath, MarkedGGraph};

/// A parsed file before marking validation.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: GGraph,
    pub basis: Vec<EdgePath>,
    pub warnings: Vec<String>,
}

impl Instance {
    pub fn into_marked(self) -> Result<MarkedGGraph> {
        MarkedGGraph::new(self.graph, self.basis)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    Graph,
    Group,
    Marking,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with('~')
        && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '*' | '\'' | '.'))
}

/// Column (1-based) of `needle` inside `line`, falling back to 1.
fn col(line: &str, needle: &str) -> usize {
    line.find(needle).map_or(1, |i| i + 1)
}

pub fn parse(text: &str) -> Result<Instance> {
    let mut section = Section::None;
    let mut basepoint: Option<(String, usize)> = None;
    let mut vertices: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String, String, usize)> = Vec::new();
    let mut order: Option<(usize, usize)> = None;
    let mut gens: Vec<(String, Vec<(String, String, usize, usize)>, usize)> = Vec::new();
    let mut marking: Vec<(usize, Vec<(String, usize)>, usize)> = Vec::new();
    let mut seen_sections: Vec<Section> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('[') {
            section = match trimmed {
                "[graph]" => Section::Graph,
                "[group]" => Section::Group,
                "[marking]" => Section::Marking,
                _ => return Err(perr(ln, col(line, "["), format!("unknown section `{trimmed}`"))),
            };
            if seen_sections.contains(&section) {
                return Err(perr(ln, col(line, "["), format!("duplicate section `{trimmed}`")));
            }
            seen_sections.push(section);
            continue;
        }
        match section {
            Section::None => {
                return Err(perr(ln, col(line, trimmed), "content before the first section"));
            }
            Section::Graph => {
                if let Some(rest) = trimmed.strip_prefix("basepoint") {
                    let v = rest
                        .trim()
                        .strip_prefix('=')
                        .map(str::trim)
                        .ok_or_else(|| perr(ln, col(line, "basepoint") + 9, "expected `=`"))?;
                    if !is_ident(v) {
                        return Err(perr(ln, col(line, v), format!("invalid vertex name `{v}`")));
                    }
                    basepoint = Some((v.to_string(), ln));
                } else if let Some(rest) = trimmed.strip_prefix("vertex ") {
                    let v = rest.trim();
                    if !is_ident(v) {
                        return Err(perr(ln, col(line, v), format!("invalid vertex name `{v}`")));
                    }
                    if vertices.iter().any(|x| x == v) {
                        return Err(perr(ln, col(line, v), format!("duplicate vertex `{v}`")));
                    }
                    vertices.push(v.to_string());
                } else if let Some(rest) = trimmed.strip_prefix("edge ") {
                    let (name, ends) = rest
                        .split_once(':')
                        .ok_or_else(|| perr(ln, col(line, rest), "expected `edge <id> : <from> -> <to>`"))?;
                    let name = name.trim();
                    let (from, to) = ends
                        .split_once("->")
                        .ok_or_else(|| perr(ln, col(line, ends), "expected `<from> -> <to>`"))?;
                    let (from, to) = (from.trim(), to.trim());
                    for t in [name, from, to] {
                        if !is_ident(t) {
                            return Err(perr(ln, col(line, t), format!("invalid identifier `{t}`")));
                        }
                    }
                    if edges.iter().any(|e| e.0 == name) {
                        return Err(perr(ln, col(line, name), format!("duplicate edge `{name}`")));
                    }
                    edges.push((name.into(), from.into(), to.into(), ln));
                } else {
                    return Err(perr(ln, col(line, trimmed), format!("unexpected `{trimmed}` in [graph]")));
                }
            }
            Section::Group => {
                if let Some(rest) = trimmed.strip_prefix("order") {
                    let v = rest
                        .trim()
                        .strip_prefix('=')
                        .map(str::trim)
                        .ok_or_else(|| perr(ln, col(line, "order") + 5, "expected `=`"))?;
                    let k: usize = v
                        .parse()
                        .map_err(|_| perr(ln, col(line, v), format!("invalid order `{v}`")))?;
                    order = Some((k, ln));
                } else if let Some(rest) = trimmed.strip_prefix("gen ") {
                    let (name, body) = rest
                        .split_once(':')
                        .ok_or_else(|| perr(ln, col(line, rest), "expected `gen <id> : <map>`"))?;
                    let name = name.trim();
                    if !is_ident(name) {
                        return Err(perr(ln, col(line, name), format!("invalid generator name `{name}`")));
                    }
                    let mut pairs = Vec::new();
                    for item in body.split(',') {
                        let item = item.trim();
                        if item.is_empty() {
                            continue;
                        }
                        let (a, b) = item
                            .split_once("->")
                            .ok_or_else(|| perr(ln, col(line, item), format!("expected `e->f`, got `{item}`")))?;
                        pairs.push((a.trim().to_string(), b.trim().to_string(), ln, col(line, item)));
                    }
                    gens.push((name.to_string(), pairs, ln));
                } else {
                    return Err(perr(ln, col(line, trimmed), format!("unexpected `{trimmed}` in [group]")));
                }
            }
            Section::Marking => {
                let (lhs, _) = trimmed
                    .split_once('=')
                    .ok_or_else(|| perr(ln, col(line, trimmed), "expected `x<i> = <path>`"))?;
                let lhs = lhs.trim();
                let idx: usize = lhs
                    .strip_prefix('x')
                    .and_then(|s| s.parse().ok())
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| perr(ln, col(line, lhs), format!("invalid generator `{lhs}`")))?;
                if marking.iter().any(|m| m.0 == idx) {
                    return Err(perr(ln, col(line, lhs), format!("duplicate marking for `{lhs}`")));
                }
                let rhs_col = line.find('=').map_or(1, |p| p + 2);
                let mut toks = Vec::new();
                let mut offset = 0;
                let rhs_str = &line[rhs_col - 1..];
                for tok in rhs_str.split_whitespace() {
                    let at = rhs_str[offset..].find(tok).map_or(0, |p| p + offset);
                    offset = at + tok.len();
                    toks.push((tok.to_string(), rhs_col + at));
                }
                marking.push((idx, toks, ln));
            }
        }
    }

    let (base, base_line) = basepoint.ok_or_else(|| perr(1, 1, "[graph] section: missing `basepoint = <id>` line"))?;
    if !vertices.contains(&base) {
        vertices.insert(0, base.clone());
    }
    let vindex: HashMap<&str, usize> = vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let base_idx = vindex[base.as_str()];
    let _ = base_line;
    let mut edge_list = Vec::new();
    for (name, from, to, ln) in &edges {
        let f = *vindex
            .get(from.as_str())
            .ok_or_else(|| perr(*ln, 1, format!("edge `{name}`: unknown vertex `{from}`")))?;
        let t = *vindex
            .get(to.as_str())
            .ok_or_else(|| perr(*ln, 1, format!("edge `{name}`: unknown vertex `{to}`")))?;
        edge_list.push((name.clone(), f, t));
    }
    let skeleton = GGraph::build(vertices.clone(), base_idx, edge_list.clone(), vec![])?;
    let dart = |tok: &str, ln: usize, c: usize| -> Result<Dart> {
        skeleton
            .dart_by_name(tok)
            .map_err(|_| perr(ln, c, format!("unknown edge `{tok}`")))
    };
    let nd = skeleton.dart_count();
    let mut generators = Vec::new();
    for (name, pairs, ln) in &gens {
        let mut perm: Vec<Option<Dart>> = vec![None; nd];
        for (a, b, pl, pc) in pairs {
            let (da, db) = (dart(a, *pl, *pc)?, dart(b, *pl, *pc)?);
            for (x, y) in [(da, db), (da.rev(), db.rev())] {
                if let Some(prev) = perm[x.index()] {
                    if prev != y {
                        return Err(perr(*pl, *pc, format!("generator `{name}` maps `{a}` twice")));
                    }
                }
                perm[x.index()] = Some(y);
            }
        }
        let perm: Vec<Dart> = perm
            .iter()
            .enumerate()
            .map(|(d, img)| img.unwrap_or(Dart(d as u32)))
            .collect();
        let mut hit = vec![false; nd];
        for d in &perm {
            if std::mem::replace(&mut hit[d.index()], true) {
                return Err(perr(*ln, 1, format!("generator `{name}` is not a permutation")));
            }
        }
        generators.push((name.clone(), perm));
    }
    let graph = GGraph::build(vertices, base_idx, edge_list, generators)?;
    if let Some((k, ln)) = order {
        if k != graph.group().order() {
            return Err(perr(
                ln,
                1,
                format!("declared order {k} but the generators produce a group of order {}", graph.group().order()),
            ));
        }
    }
    marking.sort_by_key(|m| m.0);
    let mut basis = Vec::new();
    let mut warnings = Vec::new();
    for (pos, (idx, toks, ln)) in marking.iter().enumerate() {
        if *idx != pos + 1 {
            return Err(perr(*ln, 1, format!("[marking] section: missing x{}", pos + 1)));
        }
        let steps = toks
            .iter()
            .map(|(t, c)| dart(t, *ln, *c))
            .collect::<Result<Vec<_>>>()?;
        let p = EdgePath::new(base_idx, steps);
        if !p.is_consecutive(&graph) || p.end(&graph) != base_idx {
            return Err(perr(*ln, 1, format!("x{idx}: path is not a loop at the basepoint")));
        }
        if !p.is_reduced() {
            warnings.push(format!("line {ln}: marking of x{idx} is not reduced; reducing"));
        }
        basis.push(p.reduce());
    }
    Ok(Instance { graph, basis, warnings })
}

pub fn parse_marked(text: &str) -> Result<MarkedGGraph> {
    parse(text)?.into_marked()
}

pub fn serialize(m: &MarkedGGraph) -> String {
    let g = m.graph();
    let mut s = String::new();
    s.push_str("[graph]\n");
    let _ = writeln!(s, "basepoint = {}", g.vertex_name(g.basepoint()));
    for v in g.vertex_names() {
        let _ = writeln!(s, "vertex {v}");
    }
    for k in 0..g.edge_count() {
        let d = Dart::new(k, false);
        let _ = writeln!(
            s,
            "edge {} : {} -> {}",
            g.edge_name(k),
            g.vertex_name(g.init(d)),
            g.vertex_name(g.term(d))
        );
    }
    s.push_str("[group]\n");
    let _ = writeln!(s, "order = {}", g.group().order());
    for (name, x) in g.generators() {
        let moved: Vec<String> = (0..g.edge_count())
            .map(|k| Dart::new(k, false))
            .filter(|&d| g.act(*x, d) != d)
            .map(|d| format!("{}->{}", g.dart_name(d), g.dart_name(g.act(*x, d))))
            .collect();
        let _ = writeln!(s, "gen {name} : {}", moved.join(", "));
    }
    s.push_str("[marking]\n");
    for (i, p) in m.basis().iter().enumerate() {
        let toks: Vec<String> = p.steps.iter().map(|&d| g.dart_name(d)).collect();
        let _ = writeln!(s, "x{} = {}", i + 1, toks.join(" "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn round_trip_fixtures() {
        for (name, m) in fixtures::all() {
            let text = serialize(&m);
            let back = parse_marked(&text).unwrap();
            assert_eq!(back, m, "{name}");
            assert_eq!(serialize(&back), text);
        }
    }

    #[test]
    fn missing_basepoint_is_positioned() {
        let err = parse("[graph]\nvertex v\nedge a : v -> v\n").unwrap_err();
        match err {
            Error::Parse { message, .. } => assert!(message.contains("[graph]")),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unknown_edge_in_marking_has_column() {
        let text = "[graph]\nbasepoint = *\nedge a : * -> *\n[marking]\nx1 = a zz\n";
        match parse(text).unwrap_err() {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 5);
                assert_eq!(column, 8);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unreduced_marking_warns_and_reduces() {
        let text = "[graph]\nbasepoint = *\nedge a : * -> *\nedge b : * -> *\n[marking]\nx1 = a b ~b\nx2 = b\n";
        let inst = parse(text).unwrap();
        assert_eq!(inst.warnings.len(), 1);
        assert_eq!(inst.basis[0].len(), 1);
        assert!(inst.into_marked().is_ok());
    }

    #[test]
    fn wrong_order_rejected() {
        let text = "[graph]\nbasepoint = *\nedge a : * -> *\nedge b : * -> *\n[group]\norder = 3\ngen t : a->b, b->a\n";
        assert!(matches!(parse(text), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# rose\n\n[graph]  # section\nbasepoint = *\nedge a : * -> *  # petal\n[marking]\nx1 = a\n";
        let m = parse_marked(text).unwrap();
        assert_eq!(m.rank(), 1);
    }
}
