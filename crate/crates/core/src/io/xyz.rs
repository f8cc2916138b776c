//! Whitespace-separated text clouds: `x y z` per line, or `x y z semantic instance`.
//! Blank lines and lines starting with `#` are skipped.

use crate::error::{CidError, Result};
use crate::geometry::PointCloud;

pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    let mut semantic = Vec::new();
    let mut instance = Vec::new();
    let mut labelled: Option<bool> = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let loc = || format!("line {}", i + 1);
        let fields: Vec<f64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| CidError::parse(loc(), format!("non-numeric field '{t}'")))
            })
            .collect::<Result<_>>()?;
        if fields.len() < 3 {
            return Err(CidError::parse(
                loc(),
                format!("expected at least 3 fields, got {}", fields.len()),
            ));
        }
        if fields[..3].iter().any(|c| !c.is_finite()) {
            return Err(CidError::parse(loc(), "non-finite coordinate"));
        }
        let has_labels = fields.len() == 5;
        match labelled {
            None => labelled = Some(has_labels),
            Some(l) if l != has_labels => {
                return Err(CidError::parse(loc(), "inconsistent label columns"));
            }
            _ => {}
        }
        points.push([fields[0], fields[1], fields[2]]);
        if has_labels {
            for (v, out) in [(fields[3], &mut semantic), (fields[4], &mut instance)] {
                if v.fract() != 0.0 || v.abs() > i32::MAX as f64 {
                    return Err(CidError::parse(loc(), format!("label {v} is not an integer")));
                }
                out.push(v as i32);
            }
        }
    }
    if points.is_empty() {
        return Err(CidError::parse("end of file", "no points"));
    }
    let labels = labelled == Some(true);
    PointCloud::new(points, 3)?.with_labels(labels.then_some(semantic), labels.then_some(instance))
}

pub fn write_xyz(cloud: &PointCloud) -> String {
    let sem = cloud.semantic_labels();
    let inst = cloud.instance_labels();
    let mut out = String::new();
    for (i, p) in cloud.points().iter().enumerate() {
        out.push_str(&format!("{} {} {}", p[0], p[1], p[2]));
        if let (Some(s), Some(n)) = (sem, inst) {
            out.push_str(&format!(" {} {}", s[i], n[i]));
        }
        out.push('\n');
    }
    out
}

/// Sidecar label file: one `semantic instance` pair per line, in point order.
pub fn parse_label_sidecar(text: &str) -> Result<(Vec<i32>, Vec<i32>)> {
    let mut sem = Vec::new();
    let mut inst = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let loc = || format!("line {}", i + 1);
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [s, n] = fields.as_slice() else {
            return Err(CidError::parse(loc(), "expected 'semantic instance'"));
        };
        let parse = |t: &str| {
            t.parse::<i32>()
                .map_err(|_| CidError::parse(loc(), format!("bad label '{t}'")))
        };
        sem.push(parse(s)?);
        inst.push(parse(n)?);
    }
    Ok((sem, inst))
}
