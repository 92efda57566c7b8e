//! CSV and JSON encodings of [`WitnessGrid`]. Both reproduce every value
//! bit for bit when read back.

use serde_json::{json, Value};

use super::{AxisName, AxisValues, CellFlag, ScanSpec, WitnessGrid};
use crate::error::{Error, Result};

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid number '{s}'")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub(super) fn grid_to_csv(grid: &WitnessGrid) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([grid.axes[0].name.as_str(), grid.axes[1].name.as_str(), "value", "flag"])
        .map_err(csv_err)?;
    for (k, (&v, flag)) in grid.values.iter().zip(&grid.flags).enumerate() {
        let (x, y) = grid.coords(k);
        w.write_record([fmt_f64(x), fmt_f64(y), fmt_f64(v), flag.to_string()])
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvCell {
    pub axis1: f64,
    pub axis2: f64,
    pub value: f64,
    pub flag: CellFlag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub axis_names: [AxisName; 2],
    pub cells: Vec<CsvCell>,
}

pub fn read_csv(text: &str) -> Result<CsvTable> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    if header.len() != 4 || &header[2] != "value" || &header[3] != "flag" {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    let axis_names = [header[0].parse()?, header[1].parse()?];
    let cells = r
        .records()
        .map(|row| {
            let row = row.map_err(csv_err)?;
            if row.len() != 4 {
                return Err(Error::Parse(format!("bad CSV row {row:?}")));
            }
            Ok(CsvCell {
                axis1: parse_f64(&row[0])?,
                axis2: parse_f64(&row[1])?,
                value: parse_f64(&row[2])?,
                flag: row[3].trim().parse()?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CsvTable { axis_names, cells })
}

fn value_to_json(x: f64) -> Value {
    if x.is_nan() {
        Value::Null
    } else if x.is_infinite() {
        Value::String(if x > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        json!(x)
    }
}

fn value_from_json(v: &Value) -> Result<f64> {
    match v {
        Value::Null => Ok(f64::NAN),
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        Value::String(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}"))),
        other => Err(Error::Parse(format!("unexpected value {other}"))),
    }
}

pub(super) fn grid_to_json(grid: &WitnessGrid) -> Result<String> {
    let doc = json!({
        "spec": grid.spec,
        "axes": grid.axes,
        "values": grid.values.iter().map(|&v| value_to_json(v)).collect::<Vec<_>>(),
        "flags": grid.flags,
    });
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))
}

pub(super) fn grid_from_json(s: &str) -> Result<WitnessGrid> {
    let doc: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    let field = |name: &str| {
        doc.get(name)
            .ok_or_else(|| Error::Parse(format!("missing field '{name}'")))
    };
    let parse = |e: serde_json::Error| Error::Parse(e.to_string());
    let spec: ScanSpec = serde_json::from_value(field("spec")?.clone()).map_err(parse)?;
    let axes: [AxisValues; 2] = serde_json::from_value(field("axes")?.clone()).map_err(parse)?;
    let values = field("values")?
        .as_array()
        .ok_or_else(|| Error::Parse("'values' must be an array".into()))?
        .iter()
        .map(value_from_json)
        .collect::<Result<Vec<_>>>()?;
    let flags: Vec<CellFlag> = serde_json::from_value(field("flags")?.clone()).map_err(parse)?;
    let cells = axes[0].values.len() * axes[1].values.len();
    if values.len() != cells || flags.len() != cells {
        return Err(Error::Parse(format!(
            "expected {cells} cells, found {} values and {} flags",
            values.len(),
            flags.len()
        )));
    }
    Ok(WitnessGrid {
        spec,
        axes,
        values,
        flags,
    })
}
