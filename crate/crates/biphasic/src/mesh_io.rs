//! Plain-text mesh format.
//!
//! ```text
//! biphasic-mesh v1
//! vertices N
//! id x y z
//! tet10 M
//! id n0 n1 ... n9 region
//! facet_set <name> K
//! n0 n1 n2 n3 n4 n5
//! node_set <name> K
//! id id ...
//! ```
//!
//! Tokens are whitespace separated and `#` starts a comment. Coordinates are
//! written in shortest round-trip form, so reading a written mesh restores
//! it bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use biphasic_core::mesh::{Facet, Mesh, Tet10, Vertex};

use crate::error::{AppError, Result};

pub const HEADER: &str = "biphasic-mesh v1";

pub fn format_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "vertices {}", mesh.vertices.len());
    for v in &mesh.vertices {
        let [x, y, z] = v.coords;
        let _ = writeln!(s, "{} {x:?} {y:?} {z:?}", v.id);
    }
    let _ = writeln!(s, "tet10 {}", mesh.elements.len());
    for (i, e) in mesh.elements.iter().enumerate() {
        let _ = write!(s, "{i}");
        for n in e.nodes {
            let _ = write!(s, " {n}");
        }
        let _ = writeln!(s, " {}", e.region);
    }
    for (name, facets) in &mesh.facet_sets {
        let _ = writeln!(s, "facet_set {name} {}", facets.len());
        for f in facets {
            let _ = writeln!(s, "{} {} {} {} {} {}", f[0], f[1], f[2], f[3], f[4], f[5]);
        }
    }
    for (name, nodes) in &mesh.node_sets {
        let _ = writeln!(s, "node_set {name} {}", nodes.len());
        for chunk in nodes.chunks(16) {
            let line: Vec<String> = chunk.iter().map(usize::to_string).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    fs::write(path, format_mesh(mesh)).map_err(|e| AppError::io(path, e))
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_mesh(&text, path)
}

/// Parses and validates a mesh; `origin` only labels error messages.
pub fn parse_mesh(text: &str, origin: &Path) -> Result<Mesh> {
    let mesh = Parser::new(text, origin).mesh()?;
    mesh.validate()?;
    Ok(mesh)
}

struct Parser<'t> {
    lines: Vec<(usize, Vec<&'t str>)>,
    pos: usize,
    origin: PathBuf,
}

impl<'t> Parser<'t> {
    fn new(text: &'t str, origin: &Path) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let content = l.split('#').next().unwrap_or("");
                let tokens: Vec<&str> = content.split_whitespace().collect();
                (!tokens.is_empty()).then_some((i + 1, tokens))
            })
            .collect();
        Self {
            lines,
            pos: 0,
            origin: origin.to_path_buf(),
        }
    }

    fn error(&self, line: usize, message: impl Into<String>) -> AppError {
        AppError::Parse {
            path: self.origin.clone(),
            line,
            message: message.into(),
        }
    }

    fn last_line(&self) -> usize {
        self.lines.last().map_or(1, |l| l.0)
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'t str>)> {
        let line = self.lines.get(self.pos).cloned().ok_or_else(|| {
            self.error(
                self.last_line(),
                format!("unexpected end of file, expected {what}"),
            )
        })?;
        self.pos += 1;
        Ok(line)
    }

    fn number<T: std::str::FromStr>(&self, line: usize, token: &str, what: &str) -> Result<T> {
        token
            .parse()
            .map_err(|_| self.error(line, format!("invalid {what} `{token}`")))
    }

    fn section(&mut self, keyword: &str, named: bool) -> Result<(usize, Option<String>, usize)> {
        let (line, tokens) = self.next(keyword)?;
        let expected = if named { 3 } else { 2 };
        if tokens[0] != keyword || tokens.len() != expected {
            let form = if named {
                format!("`{keyword} <name> <count>`")
            } else {
                format!("`{keyword} <count>`")
            };
            return Err(self.error(line, format!("expected {form}")));
        }
        let name = named.then(|| tokens[1].to_string());
        let count = self.number(line, tokens[expected - 1], "count")?;
        Ok((line, name, count))
    }

    fn mesh(mut self) -> Result<Mesh> {
        let (line, tokens) = self.next("header")?;
        if tokens.join(" ") != HEADER {
            return Err(self.error(line, format!("expected header `{HEADER}`")));
        }

        let (_, _, nv) = self.section("vertices", false)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, t) = self.next("vertex")?;
            if t.len() != 4 {
                return Err(self.error(
                    line,
                    format!("vertex needs `id x y z`, found {} fields", t.len()),
                ));
            }
            let id = self.number(line, t[0], "vertex id")?;
            let mut coords = [0.0; 3];
            for (c, tok) in coords.iter_mut().zip(&t[1..]) {
                *c = self.number(line, tok, "coordinate")?;
            }
            vertices.push(Vertex { id, coords });
        }

        let (_, _, ne) = self.section("tet10", false)?;
        let mut elements = Vec::with_capacity(ne);
        for i in 0..ne {
            let (line, t) = self.next("element")?;
            if t.len() != 12 {
                return Err(self.error(
                    line,
                    format!("element needs `id n0..n9 region`, found {} fields", t.len()),
                ));
            }
            let id: usize = self.number(line, t[0], "element id")?;
            if id != i {
                return Err(self.error(
                    line,
                    format!("element ids must be dense, expected {i}, found {id}"),
                ));
            }
            let mut nodes = [0usize; 10];
            for (n, tok) in nodes.iter_mut().zip(&t[1..11]) {
                *n = self.number(line, tok, "node id")?;
            }
            let region = self.number(line, t[11], "region tag")?;
            elements.push(Tet10 { nodes, region });
        }

        let mut mesh = Mesh {
            vertices,
            elements,
            ..Mesh::default()
        };
        while let Some((line, tokens)) = self.lines.get(self.pos).cloned() {
            match tokens[0] {
                "facet_set" => {
                    let (line, name, k) = self.section("facet_set", true)?;
                    let name = name.expect("named section");
                    let mut facets: Vec<Facet> = Vec::with_capacity(k);
                    for _ in 0..k {
                        let (fl, t) = self.next("facet")?;
                        if t.len() != 6 {
                            return Err(self
                                .error(fl, format!("facet needs 6 node ids, found {}", t.len())));
                        }
                        let mut f = [0usize; 6];
                        for (n, tok) in f.iter_mut().zip(&t) {
                            *n = self.number(fl, tok, "node id")?;
                        }
                        facets.push(f);
                    }
                    if mesh.facet_sets.insert(name.clone(), facets).is_some() {
                        return Err(self.error(line, format!("facet set `{name}` defined twice")));
                    }
                }
                "node_set" => {
                    let (line, name, k) = self.section("node_set", true)?;
                    let name = name.expect("named section");
                    let mut nodes = Vec::with_capacity(k);
                    while nodes.len() < k {
                        let (nl, t) = self.next("node ids")?;
                        if nodes.len() + t.len() > k {
                            return Err(
                                self.error(nl, format!("node set `{name}` has more than {k} ids"))
                            );
                        }
                        for tok in t {
                            nodes.push(self.number(nl, tok, "node id")?);
                        }
                    }
                    if mesh.node_sets.insert(name.clone(), nodes).is_some() {
                        return Err(self.error(line, format!("node set `{name}` defined twice")));
                    }
                }
                other => return Err(self.error(line, format!("unknown section `{other}`"))),
            }
        }
        Ok(mesh)
    }
}
