//! PLY reading (ASCII and binary little-endian) and writing.
//!
//! Only the `vertex` element is kept. `x`, `y` and optionally `z` become
//! coordinates; `semantic`/`semantic_label`/`label`/`class` and
//! `instance`/`instance_label`/`instance_id` become labels. Other properties
//! and elements are read past and dropped.

use std::fmt::Write as _;

use crate::error::{CidError, Result};
use crate::geometry::PointCloud;

const SEMANTIC_NAMES: [&str; 4] = ["semantic", "semantic_label", "label", "class"];
const INSTANCE_NAMES: [&str; 3] = ["instance", "instance_label", "instance_id"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
    /// Byte offset where the body starts.
    body: usize,
    /// Line number (1-based) of the first body line.
    body_line: usize,
}

fn parse_header(data: &[u8]) -> Result<Header> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut next_line = |pos: &mut usize| -> Option<(usize, String)> {
        if *pos >= data.len() {
            return None;
        }
        let end = data[*pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map_or(data.len(), |e| *pos + e);
        let line = String::from_utf8_lossy(&data[*pos..end])
            .trim_end_matches('\r')
            .to_string();
        *pos = (end + 1).min(data.len() + 1);
        line_no += 1;
        Some((line_no, line))
    };
    let loc = |n: usize| format!("header line {n}");

    match next_line(&mut pos) {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(CidError::parse(loc(1), "missing 'ply' magic")),
    }
    loop {
        let Some((n, line)) = next_line(&mut pos) else {
            return Err(CidError::parse("header", "missing end_header"));
        };
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            [] => continue,
            ["end_header"] => break,
            ["comment", ..] | ["obj_info", ..] => continue,
            ["format", "ascii", _] => encoding = Some(PlyEncoding::Ascii),
            ["format", "binary_little_endian", _] => encoding = Some(PlyEncoding::BinaryLittleEndian),
            ["format", other, ..] => {
                return Err(CidError::parse(loc(n), format!("unsupported format '{other}'")));
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| CidError::parse(loc(n), format!("bad element count '{count}'")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            ["property", "list", count, item, _name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| CidError::parse(loc(n), "property before any element"))?;
                let (Some(count), Some(item)) = (Scalar::parse(count), Scalar::parse(item)) else {
                    return Err(CidError::parse(loc(n), "unknown list property type"));
                };
                el.props.push(Property::List { count, item });
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| CidError::parse(loc(n), "property before any element"))?;
                let ty = Scalar::parse(ty)
                    .ok_or_else(|| CidError::parse(loc(n), format!("unknown property type '{ty}'")))?;
                el.props.push(Property::Scalar {
                    name: name.to_string(),
                    ty,
                });
            }
            _ => return Err(CidError::parse(loc(n), format!("unrecognised header line '{line}'"))),
        }
    }
    let encoding = encoding.ok_or_else(|| CidError::parse("header", "missing format line"))?;
    Ok(Header {
        encoding,
        elements,
        body: pos.min(data.len()),
        body_line: line_no + 1,
    })
}

/// Which vertex properties feed which output channel.
struct VertexLayout {
    coord: [Option<usize>; 3],
    semantic: Option<usize>,
    instance: Option<usize>,
}

impl VertexLayout {
    fn new(el: &Element) -> Result<Self> {
        let find = |names: &[&str]| {
            el.props.iter().position(|p| match p {
                Property::Scalar { name, .. } => names.contains(&name.as_str()),
                Property::List { .. } => false,
            })
        };
        let layout = VertexLayout {
            coord: [find(&["x"]), find(&["y"]), find(&["z"])],
            semantic: find(&SEMANTIC_NAMES),
            instance: find(&INSTANCE_NAMES),
        };
        if layout.coord[0].is_none() || layout.coord[1].is_none() {
            return Err(CidError::parse("header", "vertex element lacks x/y properties"));
        }
        Ok(layout)
    }

    fn dim(&self) -> usize {
        if self.coord[2].is_some() {
            3
        } else {
            2
        }
    }
}

#[derive(Default)]
struct Collected {
    points: Vec<[f64; 3]>,
    semantic: Vec<i32>,
    instance: Vec<i32>,
}

impl Collected {
    fn push(&mut self, layout: &VertexLayout, values: &[f64], location: impl Fn() -> String) -> Result<()> {
        let mut p = [0.0; 3];
        for (k, slot) in layout.coord.iter().enumerate() {
            if let Some(i) = slot {
                p[k] = values[*i];
            }
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(CidError::parse(location(), "non-finite coordinate"));
        }
        self.points.push(p);
        if let Some(i) = layout.semantic {
            self.semantic.push(to_label(values[i], &location)?);
        }
        if let Some(i) = layout.instance {
            self.instance.push(to_label(values[i], &location)?);
        }
        Ok(())
    }
}

fn to_label(v: f64, location: &impl Fn() -> String) -> Result<i32> {
    if v.fract() != 0.0 || v < i32::MIN as f64 || v > i32::MAX as f64 {
        return Err(CidError::parse(
            location(),
            format!("label {v} is not a 32-bit integer"),
        ));
    }
    Ok(v as i32)
}

pub fn parse_ply(data: &[u8]) -> Result<PointCloud> {
    let header = parse_header(data)?;
    let vertex_pos = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| CidError::parse("header", "no vertex element"))?;
    let layout = VertexLayout::new(&header.elements[vertex_pos])?;
    let body = &data[header.body..];
    let collected = match header.encoding {
        PlyEncoding::Ascii => read_ascii(body, header.body_line, &header.elements, vertex_pos, &layout)?,
        PlyEncoding::BinaryLittleEndian => read_binary(body, header.body, &header.elements, vertex_pos, &layout)?,
    };
    let dim = layout.dim();
    let n = collected.points.len();
    if n == 0 {
        return Err(CidError::parse("body", "vertex element is empty"));
    }
    PointCloud::new(collected.points, dim)?.with_labels(
        layout.semantic.map(|_| collected.semantic),
        layout.instance.map(|_| collected.instance),
    )
}

fn read_ascii(
    body: &[u8],
    first_line: usize,
    elements: &[Element],
    vertex_pos: usize,
    layout: &VertexLayout,
) -> Result<Collected> {
    let text = std::str::from_utf8(body).map_err(|e| CidError::parse("body", format!("invalid UTF-8: {e}")))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (first_line + i, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let mut out = Collected::default();
    for (e, el) in elements.iter().enumerate() {
        for item in 0..el.count {
            let Some((line_no, line)) = lines.next() else {
                return Err(CidError::parse(
                    "end of file",
                    format!(
                        "element '{}' declares {} items but only {item} are present",
                        el.name, el.count
                    ),
                ));
            };
            let loc = || format!("line {line_no}");
            let mut tokens = line.split_whitespace();
            let mut next = || -> Result<f64> {
                let t = tokens.next().ok_or_else(|| CidError::parse(loc(), "too few values"))?;
                t.parse::<f64>()
                    .map_err(|_| CidError::parse(loc(), format!("non-numeric field '{t}'")))
            };
            let mut values = Vec::with_capacity(el.props.len());
            for prop in &el.props {
                match prop {
                    Property::Scalar { .. } => values.push(next()?),
                    Property::List { .. } => {
                        let count = next()?;
                        if count < 0.0 || count.fract() != 0.0 {
                            return Err(CidError::parse(loc(), format!("bad list length {count}")));
                        }
                        for _ in 0..count as usize {
                            next()?;
                        }
                        values.push(f64::NAN);
                    }
                }
            }
            if tokens.next().is_some() {
                return Err(CidError::parse(loc(), "too many values"));
            }
            if e == vertex_pos {
                out.push(layout, &values, loc)?;
            }
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(CidError::parse(
            format!("line {line_no}"),
            "data beyond declared element counts",
        ));
    }
    Ok(out)
}

fn read_binary(
    body: &[u8],
    base: usize,
    elements: &[Element],
    vertex_pos: usize,
    layout: &VertexLayout,
) -> Result<Collected> {
    let mut pos = 0usize;
    let take = |ty: Scalar, pos: &mut usize| -> Result<f64> {
        let end = *pos + ty.size();
        if end > body.len() {
            return Err(CidError::parse(
                format!("byte {}", base + *pos),
                "unexpected end of binary data (count mismatch or truncation)",
            ));
        }
        let v = ty.read_le(&body[*pos..end]);
        *pos = end;
        Ok(v)
    };
    let mut out = Collected::default();
    for (e, el) in elements.iter().enumerate() {
        for _ in 0..el.count {
            let start = pos;
            let mut values = Vec::with_capacity(el.props.len());
            for prop in &el.props {
                match *prop {
                    Property::Scalar { ty, .. } => values.push(take(ty, &mut pos)?),
                    Property::List { count, item } => {
                        let n = take(count, &mut pos)?;
                        if n < 0.0 {
                            return Err(CidError::parse(format!("byte {}", base + pos), "negative list length"));
                        }
                        for _ in 0..n as usize {
                            take(item, &mut pos)?;
                        }
                        values.push(f64::NAN);
                    }
                }
            }
            if e == vertex_pos {
                out.push(layout, &values, || format!("byte {}", base + start))?;
            }
        }
    }
    if pos != body.len() {
        return Err(CidError::parse(
            format!("byte {}", base + pos),
            format!("{} bytes beyond declared element counts", body.len() - pos),
        ));
    }
    Ok(out)
}

/// Serialises a cloud as PLY. 2D clouds omit `z`; absent labels omit their property.
pub fn write_ply(cloud: &PointCloud, encoding: PlyEncoding) -> Vec<u8> {
    let sem = cloud.semantic_labels();
    let inst = cloud.instance_labels();
    let dim = cloud.dim();
    let mut header = String::from("ply\n");
    header.push_str(match encoding {
        PlyEncoding::Ascii => "format ascii 1.0\n",
        PlyEncoding::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    let _ = writeln!(header, "element vertex {}", cloud.len());
    for axis in ["x", "y", "z"].iter().take(dim) {
        let _ = writeln!(header, "property double {axis}");
    }
    if sem.is_some() {
        header.push_str("property int semantic\n");
    }
    if inst.is_some() {
        header.push_str("property int instance\n");
    }
    header.push_str("end_header\n");

    let mut out = header.into_bytes();
    for (i, p) in cloud.points().iter().enumerate() {
        match encoding {
            PlyEncoding::Ascii => {
                let mut line = p[..dim].iter().map(f64::to_string).collect::<Vec<_>>();
                line.extend(sem.map(|l| l[i].to_string()));
                line.extend(inst.map(|l| l[i].to_string()));
                out.extend(line.join(" ").as_bytes());
                out.push(b'\n');
            }
            PlyEncoding::BinaryLittleEndian => {
                for c in &p[..dim] {
                    out.extend(c.to_le_bytes());
                }
                if let Some(l) = sem {
                    out.extend(l[i].to_le_bytes());
                }
                if let Some(l) = inst {
                    out.extend(l[i].to_le_bytes());
                }
            }
        }
    }
    out
}
