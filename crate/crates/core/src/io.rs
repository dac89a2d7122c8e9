//! File formats: measures (JSON or CSV), sampled maps, heavy sets, potentials
//! and plans.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, Dimension, SampledMap, Site};
use crate::rearrangement::HeavySet;
use crate::transport::Triplet;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn parse_json(path: &Path) -> Result<Value> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn decode<T: serde::de::DeserializeOwned>(path: &Path, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a measure from JSON, or from CSV with header
/// `label,coord_1,...,coord_n,weight` (no coord columns: abstract space).
pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    if is_csv(path) {
        parse_measure_csv(&read_text(path)?).map_err(|e| match e {
            Error::InvalidInput(msg) => Error::InvalidInput(format!("{}: {msg}", path.display())),
            other => other,
        })
    } else {
        decode(path, parse_json(path)?)
    }
}

pub fn parse_measure_csv(text: &str) -> Result<DiscreteMeasure> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidInput(e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(label_col), Some(weight_col)) = (col("label"), col("weight")) else {
        return Err(Error::InvalidInput("CSV header needs `label` and `weight` columns".into()));
    };
    let mut coord_cols = Vec::new();
    while let Some(c) = col(&format!("coord_{}", coord_cols.len() + 1)) {
        coord_cols.push(c);
    }
    let number = |s: &str, line: u64| {
        s.parse::<f64>()
            .map_err(|_| Error::InvalidInput(format!("line {line}: `{s}` is not a number")))
    };
    let mut sites = Vec::new();
    let mut weights = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::InvalidInput(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let coords = if coord_cols.is_empty() {
            None
        } else {
            Some(
                coord_cols
                    .iter()
                    .map(|&c| number(&record[c], line))
                    .collect::<Result<Vec<f64>>>()?,
            )
        };
        sites.push(Site::new(&record[label_col], coords));
        weights.push(number(&record[weight_col], line)?);
    }
    let dimension = if coord_cols.is_empty() {
        Dimension::Abstract
    } else {
        Dimension::Euclidean(coord_cols.len())
    };
    DiscreteMeasure::new(dimension, sites, weights)
}

/// Reads a sampled map `{"measure": ..., "values": [...]}`. The measure may be
/// inline or a path relative to the map file; a `{"map": ...}` wrapper as
/// written by the rearrange command is accepted too.
pub fn read_map(path: &Path) -> Result<SampledMap> {
    let mut v = parse_json(path)?;
    if let Some(inner) = v.get_mut("map") {
        v = inner.take();
    }
    if let Some(Value::String(rel)) = v.get("measure") {
        let base = path.parent().unwrap_or(Path::new("."));
        let measure = read_measure(&base.join(rel))?;
        v["measure"] = serde_json::to_value(measure).map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    decode(path, v)
}

/// Heavy values as a bare list of vectors or `{"values": ..., "tol": ...}`.
pub fn read_heavy(path: &Path) -> Result<HeavySet> {
    let v = parse_json(path)?;
    if v.is_array() {
        Ok(HeavySet::new(decode(path, v)?, 0.0))
    } else {
        decode(path, v)
    }
}

/// ψ values as a bare array, or the `psi` field of a report.
pub fn read_psi(path: &Path) -> Result<Vec<f64>> {
    let mut v = parse_json(path)?;
    if let Some(inner) = v.get_mut("psi") {
        v = inner.take();
    }
    decode(path, v)
}

/// Contents of a plan file: the support triplets and, when present, the
/// potentials stored next to them.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanFile {
    pub triplets: Vec<Triplet>,
    pub psi: Option<Vec<f64>>,
    pub phi: Option<Vec<f64>>,
}

pub fn read_plan(path: &Path) -> Result<PlanFile> {
    let mut v = parse_json(path)?;
    let triplets = match v.get_mut("triplets") {
        Some(t) => t.take(),
        None => match v.pointer_mut("/plan/triplets") {
            Some(t) => t.take(),
            None => return Err(Error::InvalidInput(format!("{}: no `triplets` field", path.display()))),
        },
    };
    let field = |v: &mut Value, key: &str| -> Result<Option<Vec<f64>>> {
        match v.get_mut(key) {
            Some(x) if !x.is_null() => Ok(Some(decode(path, x.take())?)),
            _ => Ok(None),
        }
    };
    Ok(PlanFile {
        triplets: decode(path, triplets)?,
        psi: field(&mut v, "psi")?,
        phi: field(&mut v, "phi")?,
    })
}

/// Pretty JSON with a trailing newline. Floats use the shortest
/// representation that round-trips exactly.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable value");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}
