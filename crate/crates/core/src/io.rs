//! Reading and writing polytopes (OFF and JSON) and report envelopes.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{ConvexPolytope, Halfspace};

/// Version tag carried by every JSON report.
pub const SCHEMA: &str = "octa-inscribe/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct HalfspaceRecord {
    normal: [f64; 3],
    offset: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct PolytopeRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    halfspaces: Option<Vec<HalfspaceRecord>>,
}

/// Which description `polytope_to_json` writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolytopeForm {
    Vertices,
    Halfspaces,
}

/// Parses `{"vertices": [...]}` or `{"halfspaces": [...]}`. If both are
/// present the vertices win.
pub fn polytope_from_json(text: &str) -> Result<ConvexPolytope> {
    let rec: PolytopeRecord = serde_json::from_str(text)?;
    match (rec.vertices, rec.halfspaces) {
        (Some(v), _) => ConvexPolytope::from_vertices(v.into_iter().map(Point3::from).collect()),
        (None, Some(h)) => ConvexPolytope::from_halfspaces(
            h.into_iter()
                .map(|h| Halfspace::new(Vector3::from(h.normal), h.offset))
                .collect::<Result<_>>()?,
        ),
        (None, None) => Err(Error::Parse("expected \"vertices\" or \"halfspaces\"".into())),
    }
}

pub fn polytope_to_json(p: &ConvexPolytope, form: PolytopeForm) -> String {
    let rec = match form {
        PolytopeForm::Vertices => PolytopeRecord {
            vertices: Some(p.vertices().iter().map(|v| [v.x, v.y, v.z]).collect()),
            halfspaces: None,
        },
        PolytopeForm::Halfspaces => PolytopeRecord {
            vertices: None,
            halfspaces: Some(
                p.halfspaces()
                    .iter()
                    .map(|h| HalfspaceRecord {
                        normal: h.normal.into(),
                        offset: h.offset,
                    })
                    .collect(),
            ),
        },
    };
    serde_json::to_string_pretty(&rec).expect("plain data serializes")
}

/// Parses ASCII OFF. The polytope is the convex hull of the listed
/// vertices; the face section is read for well-formedness only.
pub fn polytope_from_off(text: &str) -> Result<ConvexPolytope> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let bad = |what: &str| Error::Parse(format!("OFF: {what}"));
    match tokens.next() {
        Some("OFF") => {}
        _ => return Err(bad("missing OFF header")),
    }
    let mut count = |what: &str| -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(what))
    };
    let nv = count("vertex count")?;
    let nf = count("face count")?;
    let _ne = count("edge count")?;
    let mut num = |what: &str| -> Result<f64> {
        tokens
            .next()
            .and_then(|t| t.parse::<f64>().ok())
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(what))
    };
    let mut points = Vec::with_capacity(nv);
    for _ in 0..nv {
        points.push(Point3::new(
            num("coordinate")?,
            num("coordinate")?,
            num("coordinate")?,
        ));
    }
    for _ in 0..nf {
        let k = num("face size")? as usize;
        for _ in 0..k {
            let i = num("face index")?;
            if i < 0.0 || i as usize >= nv {
                return Err(bad("face index out of range"));
            }
        }
    }
    ConvexPolytope::from_vertices(points)
}

pub fn polytope_to_off(p: &ConvexPolytope) -> String {
    let mut out = String::from("OFF\n");
    let _ = writeln!(
        out,
        "{} {} {}",
        p.vertices().len(),
        p.facets().len(),
        p.edges().len()
    );
    for v in p.vertices() {
        let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", v.x, v.y, v.z);
    }
    for f in p.facets() {
        let _ = write!(out, "{}", f.len());
        for i in f {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

/// Reads a polytope, choosing JSON when the text starts with `{` and OFF
/// otherwise.
pub fn parse_polytope(text: &str) -> Result<ConvexPolytope> {
    if text.trim_start().starts_with('{') {
        polytope_from_json(text)
    } else {
        polytope_from_off(text)
    }
}

pub fn read_polytope(path: impl AsRef<Path>) -> Result<ConvexPolytope> {
    parse_polytope(&std::fs::read_to_string(path)?)
}

/// Wraps a JSON object with the schema tag.
pub fn with_schema(mut value: serde_json::Value) -> serde_json::Value {
    if let serde_json::Value::Object(map) = &mut value {
        map.insert("schema".into(), SCHEMA.into());
    }
    value
}
