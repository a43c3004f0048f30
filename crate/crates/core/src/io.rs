//! On-disk formats: measures as JSON or CSV, planes as JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AffinePlane;
use crate::measure::DiscreteMeasure;

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    ambient_dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PlaneJson {
    base_point: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

pub fn measure_to_json_string(mu: &DiscreteMeasure) -> Result<String> {
    let doc = MeasureJson {
        ambient_dim: mu.ambient_dim(),
        points: mu.points_vec(),
        weights: mu.weights().to_vec(),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn measure_from_json_str(s: &str) -> Result<DiscreteMeasure> {
    let doc: MeasureJson = serde_json::from_str(s)?;
    DiscreteMeasure::new(doc.points, doc.weights, doc.ambient_dim)
}

pub fn write_measure_json(path: &Path, mu: &DiscreteMeasure) -> Result<()> {
    std::fs::write(path, measure_to_json_string(mu)?)?;
    Ok(())
}

pub fn read_measure_json(path: &Path) -> Result<DiscreteMeasure> {
    measure_from_json_str(&std::fs::read_to_string(path)?)
}

/// CSV layout: one row per atom, `n` coordinate columns then the weight, no
/// header. The ambient dimension is the column count minus one.
pub fn write_measure_csv(path: &Path, mu: &DiscreteMeasure) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for (p, weight) in mu.iter() {
        let mut row: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        row.push(weight.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_measure_csv(path: &Path) -> Result<DiscreteMeasure> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut dim = None;
    for rec in r.records() {
        let rec = rec?;
        let vals: std::result::Result<Vec<f64>, _> =
            rec.iter().map(|f| f.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|e| Error::InvalidParameter(format!("bad CSV number: {e}")))?;
        if vals.len() < 2 {
            return Err(Error::InvalidParameter(
                "measure CSV rows need at least one coordinate and a weight".into(),
            ));
        }
        let d = vals.len() - 1;
        match dim {
            None => dim = Some(d),
            Some(existing) if existing != d => {
                return Err(Error::DimensionMismatch { expected: existing, got: d })
            }
            _ => {}
        }
        weights.push(vals[d]);
        points.push(vals[..d].to_vec());
    }
    let dim = dim.ok_or_else(|| Error::InvalidParameter("empty measure CSV".into()))?;
    DiscreteMeasure::new(points, weights, dim)
}

pub fn plane_to_json_string(plane: &AffinePlane) -> Result<String> {
    let doc = PlaneJson {
        base_point: plane.base_point(),
        basis: plane.basis_vectors(),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn plane_from_json_str(s: &str) -> Result<AffinePlane> {
    let doc: PlaneJson = serde_json::from_str(s)?;
    AffinePlane::new(doc.base_point, doc.basis)
}

pub fn write_plane_json(path: &Path, plane: &AffinePlane) -> Result<()> {
    std::fs::write(path, plane_to_json_string(plane)?)?;
    Ok(())
}

pub fn read_plane_json(path: &Path) -> Result<AffinePlane> {
    plane_from_json_str(&std::fs::read_to_string(path)?)
}
