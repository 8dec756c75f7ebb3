//! OFF and OBJ readers (vertices and faces only).

use std::path::Path;

use super::{Point, PoleSelector, SurfaceMesh};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoadedMesh {
    pub mesh: SurfaceMesh,
    pub warnings: Vec<String>,
}

/// Read and validate a mesh file. Polygons are split into triangle fans.
pub fn load_mesh(path: &Path, format: Option<MeshFormat>, pole: PoleSelector) -> Result<LoadedMesh> {
    let format = format
        .or_else(|| MeshFormat::from_path(path))
        .ok_or_else(|| Error::Usage(format!("cannot tell the format of {}", path.display())))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_mesh(&text, format, pole)
}

pub fn parse_mesh(text: &str, format: MeshFormat, pole: PoleSelector) -> Result<LoadedMesh> {
    let (vertices, polygons, warnings) = match format {
        MeshFormat::Off => parse_off(text)?,
        MeshFormat::Obj => parse_obj(text)?,
    };
    let mut faces = Vec::new();
    for poly in polygons {
        for i in 1..poly.len() - 1 {
            faces.push([poly[0], poly[i], poly[i + 1]]);
        }
    }
    let mesh = SurfaceMesh::new(vertices, faces, pole)?;
    Ok(LoadedMesh { mesh, warnings })
}

type Parsed = (Vec<Point>, Vec<Vec<usize>>, Vec<String>);

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position: line,
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| perr(line, format!("cannot read {what} from '{tok}'")))
}

fn parse_off(text: &str) -> Result<Parsed> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (first_no, first) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let counts_line = if first == "OFF" {
        lines.next().ok_or_else(|| perr(first_no, "missing counts line"))?
    } else if let Some(rest) = first.strip_prefix("OFF") {
        (first_no, rest.trim())
    } else {
        return Err(perr(first_no, "expected OFF header"));
    };
    let mut toks = counts_line.1.split_whitespace();
    let nv: usize = number(toks.next(), counts_line.0, "vertex count")?;
    let nf: usize = number(toks.next(), counts_line.0, "face count")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, l) = lines
            .next()
            .ok_or_else(|| perr(counts_line.0, "file ends before all vertices"))?;
        let mut t = l.split_whitespace();
        let mut p = [0.0; 3];
        for (c, name) in p.iter_mut().zip(["x", "y", "z"]) {
            *c = number(t.next(), no, name)?;
        }
        vertices.push(p);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (no, l) = lines
            .next()
            .ok_or_else(|| perr(counts_line.0, "file ends before all faces"))?;
        let mut t = l.split_whitespace();
        let k: usize = number(t.next(), no, "polygon size")?;
        if k < 3 {
            return Err(perr(no, format!("polygon with {k} vertices")));
        }
        let mut poly = Vec::with_capacity(k);
        for _ in 0..k {
            let v: usize = number(t.next(), no, "vertex index")?;
            if v >= nv {
                return Err(perr(no, format!("vertex index {v} out of range")));
            }
            poly.push(v);
        }
        faces.push(poly);
    }
    Ok((vertices, faces, Vec::new()))
}

fn parse_obj(text: &str) -> Result<Parsed> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut ignored: Vec<(String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        let mut t = l.split_whitespace();
        match t.next() {
            None => {}
            Some("v") => {
                let mut p = [0.0; 3];
                for (c, name) in p.iter_mut().zip(["x", "y", "z"]) {
                    *c = number(t.next(), no, name)?;
                }
                vertices.push(p);
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in t {
                    let head = tok.split('/').next().unwrap_or("");
                    let idx: i64 = number(Some(head), no, "vertex index")?;
                    let n = vertices.len() as i64;
                    let v = if idx < 0 { n + idx } else { idx - 1 };
                    if v < 0 || v >= n {
                        return Err(perr(no, format!("vertex index {idx} out of range")));
                    }
                    poly.push(v as usize);
                }
                if poly.len() < 3 {
                    return Err(perr(no, format!("face with {} vertices", poly.len())));
                }
                faces.push(poly);
            }
            Some(other) => match ignored.iter_mut().find(|(k, _)| k == other) {
                Some((_, c)) => *c += 1,
                None => ignored.push((other.to_string(), 1)),
            },
        }
    }
    let warnings = ignored
        .into_iter()
        .map(|(k, c)| format!("ignored {c} '{k}' record(s)"))
        .collect();
    Ok((vertices, faces, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    const OFF: &str = "OFF\n# square\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n";

    #[test]
    fn reads_off() {
        let m = parse_mesh(OFF, MeshFormat::Off, PoleSelector::Index(0)).unwrap();
        assert_eq!(m.mesh.vertices().len(), 4);
        assert_eq!(m.mesh.faces(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn reads_obj_with_quads_and_extras() {
        let text = "o sq\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n";
        let m = parse_mesh(text, MeshFormat::Obj, PoleSelector::Index(0)).unwrap();
        assert_eq!(m.mesh.faces().len(), 2);
        assert_eq!(m.warnings.len(), 2);
        let neg = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n";
        assert_eq!(
            parse_mesh(neg, MeshFormat::Obj, PoleSelector::Index(0))
                .unwrap()
                .mesh
                .faces(),
            &[[0, 1, 2]]
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = OFF.replace("1 1 0", "1 x 0");
        match parse_mesh(&bad, MeshFormat::Off, PoleSelector::Index(0)) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 6),
            other => panic!("{other:?}"),
        }
        match parse_mesh("v 0 0 0\nf 1 2 3\n", MeshFormat::Obj, PoleSelector::Index(0)) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn repeated_face_is_rejected() {
        let text = format!("{}3 2 0 1\n", OFF.replace("4 2 0", "4 3 0"));
        assert!(matches!(
            parse_mesh(&text, MeshFormat::Off, PoleSelector::Index(0)),
            Err(Error::Validation(_))
        ));
    }
}
