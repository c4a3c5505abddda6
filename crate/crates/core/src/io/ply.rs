//! PLY scene files: a `vertex` element with `x y z` (float32), optional
//! `red green blue` (uint8), optional `nx ny nz` (float32) and `label`
//! (int32), stored as ASCII or binary little-endian.
//!
//! The vertex element must be the first element; any elements after it
//! (faces, etc.) are not read.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{LabelField, PointCloud, DEFAULT_IGNORE_LABEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    U8,
    I32,
    F32,
    Other(usize),
}

impl ScalarType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "uchar" | "uint8" => Self::U8,
            "int" | "int32" => Self::I32,
            "float" | "float32" => Self::F32,
            "char" | "int8" => Self::Other(1),
            "short" | "int16" | "ushort" | "uint16" => Self::Other(2),
            "uint" | "uint32" => Self::Other(4),
            "double" | "float64" => Self::Other(8),
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::U8 => 1,
            Self::I32 | Self::F32 => 4,
            Self::Other(n) => n,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::U8 => "uchar",
            Self::I32 => "int",
            Self::F32 => "float",
            Self::Other(_) => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Pos(usize),
    Color(usize),
    Normal(usize),
    Label,
}

impl Field {
    fn parse(name: &str) -> Option<(Self, ScalarType)> {
        Some(match name {
            "x" => (Self::Pos(0), ScalarType::F32),
            "y" => (Self::Pos(1), ScalarType::F32),
            "z" => (Self::Pos(2), ScalarType::F32),
            "red" => (Self::Color(0), ScalarType::U8),
            "green" => (Self::Color(1), ScalarType::U8),
            "blue" => (Self::Color(2), ScalarType::U8),
            "nx" => (Self::Normal(0), ScalarType::F32),
            "ny" => (Self::Normal(1), ScalarType::F32),
            "nz" => (Self::Normal(2), ScalarType::F32),
            "label" => (Self::Label, ScalarType::I32),
            _ => return None,
        })
    }
}

struct Header {
    format: PlyFormat,
    count: usize,
    fields: Vec<(Field, ScalarType)>,
    has_colors: bool,
    has_normals: bool,
    body_offset: usize,
}

fn ply_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Ply {
        offset: offset as u64,
        message: message.into(),
    }
}

/// Splits off one header line starting at `pos`; returns (line, next position).
fn next_line(bytes: &[u8], pos: usize) -> Result<(&str, usize)> {
    let rest = &bytes[pos..];
    let end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| ply_err(pos, "header ends without end_header"))?;
    let line = std::str::from_utf8(&rest[..end])
        .map_err(|_| ply_err(pos, "header line is not valid UTF-8"))?;
    Ok((line.trim_end_matches('\r'), pos + end + 1))
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let (magic, mut pos) = next_line(bytes, 0)?;
    if magic != "ply" {
        return Err(ply_err(0, "missing 'ply' magic line"));
    }
    let mut format = None;
    let mut count = None;
    let mut fields: Vec<(Field, ScalarType)> = Vec::new();
    let mut in_vertex = false;
    let mut seen_element = false;

    loop {
        let line_start = pos;
        let (line, next) = next_line(bytes, pos)?;
        pos = next;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("end_header") => break,
            Some("comment") | Some("obj_info") | None => {}
            Some("format") => {
                format = Some(match (tok.next(), tok.next()) {
                    (Some("ascii"), Some("1.0")) => PlyFormat::Ascii,
                    (Some("binary_little_endian"), Some("1.0")) => PlyFormat::BinaryLittleEndian,
                    (Some("binary_big_endian"), _) => {
                        return Err(ply_err(line_start, "binary_big_endian is not supported"))
                    }
                    _ => return Err(ply_err(line_start, format!("bad format line {line:?}"))),
                });
            }
            Some("element") => {
                let name = tok.next();
                let n = tok.next().and_then(|s| s.parse::<usize>().ok());
                match (name, n) {
                    (Some("vertex"), Some(n)) if !seen_element => {
                        count = Some(n);
                        in_vertex = true;
                    }
                    (Some("vertex"), Some(_)) => {
                        return Err(ply_err(line_start, "vertex must be the first element"))
                    }
                    (Some(_), Some(_)) => in_vertex = false,
                    _ => return Err(ply_err(line_start, format!("bad element line {line:?}"))),
                }
                seen_element = true;
            }
            Some("property") => {
                if !seen_element {
                    return Err(ply_err(line_start, "property before any element"));
                }
                if !in_vertex {
                    continue;
                }
                let ty = tok.next();
                if ty == Some("list") {
                    return Err(ply_err(line_start, "list properties are not allowed on vertices"));
                }
                let ty = ty
                    .and_then(ScalarType::parse)
                    .ok_or_else(|| ply_err(line_start, format!("bad property line {line:?}")))?;
                let name = tok
                    .next()
                    .ok_or_else(|| ply_err(line_start, "property without a name"))?;
                let (field, expected) = Field::parse(name)
                    .ok_or_else(|| ply_err(line_start, format!("unexpected vertex property {name:?}")))?;
                if ty != expected {
                    return Err(ply_err(
                        line_start,
                        format!("property {name:?} must be {}, found {}", expected.name(), ty.name()),
                    ));
                }
                if fields.iter().any(|(f, _)| *f == field) {
                    return Err(ply_err(line_start, format!("duplicate property {name:?}")));
                }
                fields.push((field, ty));
            }
            Some(other) => {
                return Err(ply_err(line_start, format!("unknown header keyword {other:?}")))
            }
        }
    }

    let format = format.ok_or_else(|| ply_err(pos, "header has no format line"))?;
    let count = count.ok_or_else(|| ply_err(pos, "header has no vertex element"))?;
    let has = |f: Field| fields.iter().any(|(g, _)| *g == f);
    for (f, name) in [
        (Field::Pos(0), "x"),
        (Field::Pos(1), "y"),
        (Field::Pos(2), "z"),
        (Field::Label, "label"),
    ] {
        if !has(f) {
            return Err(ply_err(pos, format!("missing required vertex property {name:?}")));
        }
    }
    let colors = (0..3).filter(|&a| has(Field::Color(a))).count();
    let normals = (0..3).filter(|&a| has(Field::Normal(a))).count();
    if colors % 3 != 0 {
        return Err(ply_err(pos, "red, green and blue must appear together"));
    }
    if normals % 3 != 0 {
        return Err(ply_err(pos, "nx, ny and nz must appear together"));
    }
    Ok(Header {
        format,
        count,
        fields,
        has_colors: colors == 3,
        has_normals: normals == 3,
        body_offset: pos,
    })
}

struct Columns {
    positions: Vec<[f32; 3]>,
    colors: Vec<[u8; 3]>,
    normals: Vec<[f32; 3]>,
    labels: Vec<i32>,
    has_colors: bool,
    has_normals: bool,
}

enum Value {
    U8(u8),
    I32(i32),
    F32(f32),
}

impl Columns {
    fn with_capacity(h: &Header) -> Self {
        let n = h.count.min(1 << 24);
        Self {
            positions: Vec::with_capacity(n),
            colors: Vec::with_capacity(if h.has_colors { n } else { 0 }),
            normals: Vec::with_capacity(if h.has_normals { n } else { 0 }),
            labels: Vec::with_capacity(n),
            has_colors: h.has_colors,
            has_normals: h.has_normals,
        }
    }

    fn push(&mut self, values: &[(Field, Value)]) {
        let mut pos = [0f32; 3];
        let mut col = [0u8; 3];
        let mut nrm = [0f32; 3];
        let mut label = 0;
        for (f, v) in values {
            match (f, v) {
                (Field::Pos(a), Value::F32(x)) => pos[*a] = *x,
                (Field::Normal(a), Value::F32(x)) => nrm[*a] = *x,
                (Field::Color(a), Value::U8(x)) => col[*a] = *x,
                (Field::Label, Value::I32(x)) => label = *x,
                _ => unreachable!("types checked in header"),
            }
        }
        self.positions.push(pos);
        self.labels.push(label);
        if self.has_colors {
            self.colors.push(col);
        }
        if self.has_normals {
            self.normals.push(nrm);
        }
    }
}

fn read_ascii_body(bytes: &[u8], h: &Header) -> Result<Columns> {
    let mut cols = Columns::with_capacity(h);
    let mut pos = h.body_offset;
    let mut values = Vec::with_capacity(h.fields.len());
    for v in 0..h.count {
        let line_start = pos;
        if pos >= bytes.len() {
            return Err(ply_err(pos, format!("truncated: expected {} vertices, found {v}", h.count)));
        }
        let rest = &bytes[pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        pos += (end + 1).min(rest.len());
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| ply_err(line_start, "vertex line is not valid UTF-8"))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != h.fields.len() {
            return Err(ply_err(
                line_start,
                format!(
                    "vertex {v} has {} values, expected {}",
                    tokens.len(),
                    h.fields.len()
                ),
            ));
        }
        values.clear();
        for (&(field, ty), tok) in h.fields.iter().zip(&tokens) {
            let bad = || ply_err(line_start, format!("vertex {v}: cannot parse {tok:?} as {}", ty.name()));
            let value = match ty {
                ScalarType::F32 => Value::F32(tok.parse().map_err(|_| bad())?),
                ScalarType::U8 => Value::U8(tok.parse().map_err(|_| bad())?),
                ScalarType::I32 => Value::I32(tok.parse().map_err(|_| bad())?),
                ScalarType::Other(_) => unreachable!(),
            };
            values.push((field, value));
        }
        cols.push(&values);
    }
    Ok(cols)
}

fn read_binary_body(bytes: &[u8], h: &Header) -> Result<Columns> {
    let stride: usize = h.fields.iter().map(|(_, t)| t.size()).sum();
    let body = &bytes[h.body_offset..];
    let complete = body.len() / stride;
    if complete < h.count {
        return Err(ply_err(
            h.body_offset + complete * stride,
            format!(
                "truncated: expected {} vertices of {stride} bytes, only {complete} present",
                h.count
            ),
        ));
    }
    let mut cols = Columns::with_capacity(h);
    let mut values = Vec::with_capacity(h.fields.len());
    for record in body.chunks_exact(stride).take(h.count) {
        values.clear();
        let mut o = 0;
        for &(field, ty) in &h.fields {
            let b = &record[o..o + ty.size()];
            let value = match ty {
                ScalarType::F32 => Value::F32(f32::from_le_bytes(b.try_into().unwrap())),
                ScalarType::I32 => Value::I32(i32::from_le_bytes(b.try_into().unwrap())),
                ScalarType::U8 => Value::U8(b[0]),
                ScalarType::Other(_) => unreachable!(),
            };
            values.push((field, value));
            o += ty.size();
        }
        cols.push(&values);
    }
    Ok(cols)
}

/// Parses a scene from PLY bytes; labels use the default ignore sentinel.
pub fn parse_scene(bytes: &[u8]) -> Result<(PointCloud, LabelField)> {
    let h = parse_header(bytes)?;
    let cols = match h.format {
        PlyFormat::Ascii => read_ascii_body(bytes, &h)?,
        PlyFormat::BinaryLittleEndian => read_binary_body(bytes, &h)?,
    };
    let cloud = PointCloud::with_attributes(
        cols.positions,
        h.has_colors.then_some(cols.colors),
        h.has_normals.then_some(cols.normals),
    )?;
    let labels = LabelField::new(cols.labels, DEFAULT_IGNORE_LABEL)?;
    Ok((cloud, labels))
}

pub fn read_scene(path: impl AsRef<Path>) -> Result<(PointCloud, LabelField)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_scene(&bytes)
}

pub fn encode_scene(cloud: &PointCloud, labels: &LabelField, format: PlyFormat) -> Result<Vec<u8>> {
    crate::types::check_len("labels", cloud.len(), labels.len())?;
    let mut out = String::new();
    out.push_str("ply\n");
    out.push_str(match format {
        PlyFormat::Ascii => "format ascii 1.0\n",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    out.push_str(&format!("element vertex {}\n", cloud.len()));
    out.push_str("property float x\nproperty float y\nproperty float z\n");
    if cloud.colors().is_some() {
        out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    if cloud.normals().is_some() {
        out.push_str("property float nx\nproperty float ny\nproperty float nz\n");
    }
    out.push_str("property int label\nend_header\n");
    let mut bytes = out.into_bytes();

    for i in 0..cloud.len() {
        let p = cloud.position(i);
        let c = cloud.colors().map(|c| c[i]);
        let n = cloud.normals().map(|n| n[i]);
        let l = labels.get(i);
        match format {
            PlyFormat::Ascii => {
                // `{}` on f32 prints the shortest string that parses back to
                // the same value.
                let mut line = format!("{} {} {}", p[0], p[1], p[2]);
                if let Some(c) = c {
                    line.push_str(&format!(" {} {} {}", c[0], c[1], c[2]));
                }
                if let Some(n) = n {
                    line.push_str(&format!(" {} {} {}", n[0], n[1], n[2]));
                }
                line.push_str(&format!(" {l}\n"));
                bytes.extend_from_slice(line.as_bytes());
            }
            PlyFormat::BinaryLittleEndian => {
                for v in p {
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
                if let Some(c) = c {
                    bytes.extend_from_slice(&c);
                }
                if let Some(n) = n {
                    for v in n {
                        bytes.extend_from_slice(&v.to_le_bytes());
                    }
                }
                bytes.extend_from_slice(&l.to_le_bytes());
            }
        }
    }
    Ok(bytes)
}

pub fn write_scene(
    path: impl AsRef<Path>,
    cloud: &PointCloud,
    labels: &LabelField,
    format: PlyFormat,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_scene(cloud, labels, format)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = "ply\nformat ascii 1.0\ncomment hand written\nelement vertex 3\n\
property float x\nproperty float y\nproperty float z\nproperty int label\nend_header\n\
0 0 0 0\n1.5 -2 0.25 1\n0.125 0.5 3 -1\n";

    #[test]
    fn hand_written_ascii() {
        let (cloud, labels) = parse_scene(THREE.as_bytes()).unwrap();
        assert_eq!(
            cloud.positions(),
            &[[0.0, 0.0, 0.0], [1.5, -2.0, 0.25], [0.125, 0.5, 3.0]]
        );
        assert_eq!(labels.labels(), &[0, 1, -1]);
        assert!(cloud.colors().is_none());
    }

    #[test]
    fn crlf_and_trailing_elements() {
        let text = THREE.replace("end_header", "element face 0\nproperty list uchar int vertex_indices\nend_header");
        let text = text.replace('\n', "\r\n");
        let (cloud, _) = parse_scene(text.as_bytes()).unwrap();
        assert_eq!(cloud.len(), 3);
    }

    #[test]
    fn missing_label_is_named() {
        let text = THREE.replace("property int label\n", "").replace(" 0\n", "\n");
        let err = parse_scene(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("\"label\""), "{err}");
    }

    #[test]
    fn wrong_type_rejected() {
        let text = THREE.replace("property int label", "property float label");
        assert!(matches!(parse_scene(text.as_bytes()), Err(Error::Ply { .. })));
    }

    #[test]
    fn truncated_ascii_reports_offset() {
        let text = THREE.replace("0.125 0.5 3 -1\n", "");
        match parse_scene(text.as_bytes()).unwrap_err() {
            Error::Ply { offset, message } => {
                assert_eq!(offset as usize, text.len());
                assert!(message.contains("truncated"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn truncated_binary_reports_offset() {
        let cloud = PointCloud::new(vec![[1.0, 2.0, 3.0]; 4]).unwrap();
        let labels = LabelField::from_labels(vec![1; 4]).unwrap();
        let mut bytes = encode_scene(&cloud, &labels, PlyFormat::BinaryLittleEndian).unwrap();
        let header_len = bytes.len() - 4 * 16;
        bytes.truncate(bytes.len() - 5);
        match parse_scene(&bytes).unwrap_err() {
            Error::Ply { offset, .. } => assert_eq!(offset as usize, header_len + 3 * 16),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_value_reports_line_offset() {
        let text = THREE.replace("1.5 -2 0.25 1", "1.5 -2 abc 1");
        let line_start = text.find("1.5 -2 abc").unwrap();
        match parse_scene(text.as_bytes()).unwrap_err() {
            Error::Ply { offset, .. } => assert_eq!(offset as usize, line_start),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn malformed_header() {
        assert!(parse_scene(b"plx\n").is_err());
        assert!(parse_scene(b"ply\nformat ascii 1.0\nelement vertex 1\n").is_err());
        let text = THREE.replace("format ascii 1.0", "format binary_big_endian 1.0");
        assert!(parse_scene(text.as_bytes()).is_err());
        let text = THREE.replace("property int label", "property int label\nproperty float alpha");
        assert!(parse_scene(text.as_bytes()).unwrap_err().to_string().contains("alpha"));
    }

    #[test]
    fn attributes_round_trip() {
        let cloud = PointCloud::with_attributes(
            vec![[0.1, 0.2, 0.3], [-4.0, 5.5, 1e-3]],
            Some(vec![[255, 0, 7], [1, 2, 3]]),
            Some(vec![[0.0, 0.0, 1.0], [0.6, 0.8, 0.0]]),
        )
        .unwrap();
        let labels = LabelField::from_labels(vec![3, -1]).unwrap();
        for format in [PlyFormat::Ascii, PlyFormat::BinaryLittleEndian] {
            let bytes = encode_scene(&cloud, &labels, format).unwrap();
            let (c2, l2) = parse_scene(&bytes).unwrap();
            assert_eq!(c2, cloud);
            assert_eq!(l2, labels);
        }
    }
}
