//! Dataset ingestion and the preprocessing steps the harness applies
//! before clustering: min-max scaling and uniform subsampling.

use std::path::Path;

use rand::Rng;

use crate::dataset::{Dataset, FeatureRange};
use crate::error::{Error, Result};

/// Reads a numeric CSV into a dataset, row order preserved. Errors name the
/// 1-based file line and column of the offending cell.
pub fn load_csv(path: &Path, delimiter: u8, has_header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(has_header)
        .flexible(true) // arity checked by hand for location info
        .trim(csv::Trim::All)
        .from_path(path)?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut expected: Option<usize> = None;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue; // blank trailing line
        }
        if let Some(width) = expected {
            if record.len() != width {
                return Err(Error::RaggedRow {
                    row: line as usize,
                    expected: width,
                    got: record.len(),
                });
            }
        } else {
            expected = Some(record.len());
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::BadField {
                row: line as usize,
                col: col + 1,
                value: cell.to_string(),
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::from_rows(rows)
}

/// Maps each feature to [0, 1] by (x − min)/(max − min); constant features
/// go to 0. The applied ranges are recorded on the returned dataset.
pub fn minmax_scale(data: &Dataset) -> Dataset {
    assert!(!data.is_empty(), "cannot scale an empty dataset");
    let dim = data.dim();
    let mut ranges = vec![
        FeatureRange { min: f64::INFINITY, max: f64::NEG_INFINITY };
        dim
    ];
    for row in data.iter() {
        for (r, &v) in ranges.iter_mut().zip(row) {
            r.min = r.min.min(v);
            r.max = r.max.max(v);
        }
    }
    let mut flat = Vec::with_capacity(data.len() * dim);
    for row in data.iter() {
        for (r, &v) in ranges.iter().zip(row) {
            let span = r.max - r.min;
            flat.push(if span > 0.0 { (v - r.min) / span } else { 0.0 });
        }
    }
    let mut scaled = Dataset::from_flat(flat, dim).expect("nonempty by pre");
    scaled.scaling = Some(ranges);
    scaled
}

/// Uniform without-replacement sample of ⌈fraction·n⌉ rows. Row order of the
/// original dataset is preserved.
pub fn subsample<R: Rng + ?Sized>(data: &Dataset, fraction: f64, rng: &mut R) -> Dataset {
    assert!(
        fraction > 0.0 && fraction <= 1.0,
        "subsample fraction must be in (0, 1], got {fraction}"
    );
    let n = data.len();
    let m = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut indices = rand::seq::index::sample(rng, n, m).into_vec();
    indices.sort_unstable();
    data.select(&indices)
}
