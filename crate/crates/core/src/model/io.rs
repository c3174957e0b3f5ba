//! CSV and JSON encodings for configurations and point fields.
//!
//! CSV: one `position` per row, or one `x,t` pair per row for point fields;
//! stacks of lines use `line,position` with 1-based line indices. JSON:
//! `{"geometry": "cycle"|"interval", "length": N, "positions": [...]}` or
//! `"points": [{"x":..,"t":..}]`, with an optional `"start"` for offset
//! intervals. Floats are written in shortest round-trip form, so decoding
//! returns bit-identical positions.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Configuration, Geometry, GeometryKind, Point, PointField};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct ConfigDoc {
    geometry: GeometryKind,
    length: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    start: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Point>>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

fn doc_geometry(doc: &ConfigDoc) -> Result<Geometry> {
    match doc.geometry {
        GeometryKind::Cycle => Geometry::cycle(doc.length),
        GeometryKind::Interval => Geometry::window(doc.start, doc.start + doc.length),
    }
}

fn header(g: &Geometry) -> ConfigDoc {
    ConfigDoc { geometry: g.kind(), length: g.length(), start: g.start(), positions: None, points: None }
}

pub fn config_to_json(config: &Configuration) -> Result<String> {
    let mut doc = header(config.geometry());
    doc.positions = Some(config.positions().to_vec());
    Ok(serde_json::to_string(&doc)?)
}

pub fn config_from_json(text: &str) -> Result<Configuration> {
    let doc: ConfigDoc = serde_json::from_str(text)?;
    let positions = doc.positions.clone().ok_or_else(|| Error::Parse("missing `positions`".into()))?;
    Configuration::new(doc_geometry(&doc)?, positions)
}

pub fn field_to_json(field: &PointField) -> Result<String> {
    let mut doc = header(field.geometry());
    doc.points = Some(field.points().to_vec());
    Ok(serde_json::to_string(&doc)?)
}

pub fn field_from_json(text: &str) -> Result<PointField> {
    let doc: ConfigDoc = serde_json::from_str(text)?;
    let points = doc.points.clone().ok_or_else(|| Error::Parse("missing `points`".into()))?;
    PointField::new(doc_geometry(&doc)?, points)
}

pub fn write_config_csv<W: Write>(config: &Configuration, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["position"])?;
    for p in config.positions() {
        w.write_record([p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_config_csv<R: Read>(geometry: Geometry, input: R) -> Result<Configuration> {
    let mut r = csv::Reader::from_reader(input);
    let mut positions = Vec::new();
    for rec in r.records() {
        positions.push(parse_f64(rec?.get(0))?);
    }
    Configuration::new(geometry, positions)
}

pub fn write_field_csv<W: Write>(field: &PointField, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "t"])?;
    for p in field.points() {
        w.write_record([p.x.to_string(), p.t.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_csv<R: Read>(geometry: Geometry, input: R) -> Result<PointField> {
    let mut r = csv::Reader::from_reader(input);
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        points.push(Point { x: parse_f64(rec.get(0))?, t: parse_f64(rec.get(1))? });
    }
    PointField::new(geometry, points)
}

/// Writes a stack of configurations as `line,position` rows.
pub fn write_lines_csv<W: Write>(lines: &[Configuration], label: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([label, "position"])?;
    for (k, line) in lines.iter().enumerate() {
        for p in line.positions() {
            w.write_record([(k + 1).to_string(), p.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `line,position` rows (any header names) into `lines` stacks; line
/// indices are 1-based and positions within a line may come in any order.
pub fn read_lines_csv<R: Read>(geometry: Geometry, input: R, lines: Option<usize>) -> Result<Vec<Configuration>> {
    let mut r = csv::Reader::from_reader(input);
    let mut raw: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let k: usize = rec
            .get(0)
            .ok_or_else(|| Error::Parse("missing line column".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad line index: {e}")))?;
        if k == 0 {
            return Err(Error::Parse("line indices start at 1".into()));
        }
        if raw.len() < k {
            raw.resize(k, Vec::new());
        }
        raw[k - 1].push(parse_f64(rec.get(1))?);
    }
    if let Some(n) = lines {
        if raw.len() > n {
            return Err(Error::Parse(format!("expected at most {n} lines, found {}", raw.len())));
        }
        raw.resize(n, Vec::new());
    }
    raw.into_iter().map(|ps| Configuration::from_unsorted(geometry, ps)).collect()
}

fn parse_f64(field: Option<&str>) -> Result<f64> {
    let s = field.ok_or_else(|| Error::Parse("missing column".into()))?;
    s.trim().parse().map_err(|e| Error::Parse(format!("bad number `{s}`: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RngStream;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_and_json_round_trip_bit_exact(seed in any::<u64>(), count in 0usize..40) {
            let g = Geometry::cycle(37.5).unwrap();
            let mut rng = RngStream::new(seed, 0).rng();
            let c = Configuration::sample_count(g, count, &mut rng);
            let mut buf = Vec::new();
            write_config_csv(&c, &mut buf).unwrap();
            prop_assert_eq!(&read_config_csv(g, buf.as_slice()).unwrap(), &c);
            prop_assert_eq!(&config_from_json(&config_to_json(&c).unwrap()).unwrap(), &c);

            let f = PointField::sample(g, 0.5, &mut rng).unwrap();
            let mut buf = Vec::new();
            write_field_csv(&f, &mut buf).unwrap();
            prop_assert_eq!(&read_field_csv(g, buf.as_slice()).unwrap(), &f);
            prop_assert_eq!(&field_from_json(&field_to_json(&f).unwrap()).unwrap(), &f);
        }
    }

    #[test]
    fn json_shape() {
        let c = Configuration::new(Geometry::cycle(10.0).unwrap(), vec![1.0, 2.5]).unwrap();
        assert_eq!(config_to_json(&c).unwrap(), r#"{"geometry":"cycle","length":10.0,"positions":[1.0,2.5]}"#);
        let w = Configuration::new(Geometry::window(-2.0, 2.0).unwrap(), vec![-1.0]).unwrap();
        assert_eq!(config_from_json(&config_to_json(&w).unwrap()).unwrap(), w);
    }

    #[test]
    fn lines_csv() {
        let g = Geometry::cycle(4.0).unwrap();
        let input = "line,position\n2,2\n1,1\n2,0.5\n";
        let lines = read_lines_csv(g, input.as_bytes(), Some(3)).unwrap();
        assert_eq!(lines[0].positions(), &[1.0]);
        assert_eq!(lines[1].positions(), &[0.5, 2.0]);
        assert!(lines[2].is_empty());
        assert!(read_lines_csv(g, input.as_bytes(), Some(1)).is_err());
    }
}
