//! CSV files of SPD matrices, one matrix per row, either as upper-triangle
//! columns `m1_1, m1_2, …, mD_D` or as the row-major flattening `e0, e1, …`
//! of the long simulation format.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use geocond::sym::{dim_from_vech_len, sym_from_vech, SpdMatrix, SymMatrix, VechVector};
use nalgebra::DMatrix;

pub fn vech_headers(d: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 1..=d {
        for j in i..=d {
            out.push(format!("m{i}_{j}"));
        }
    }
    out
}

/// Matrices and optional weights; every other column is ignored.
pub fn read_matrices(path: &Path) -> Result<(Vec<SpdMatrix>, Option<Vec<f64>>)> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = r.headers()?.clone();
    let full = headers.iter().any(|h| h == "e0");
    let cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| {
            if full {
                h.starts_with('e') && h[1..].parse::<usize>().is_ok()
            } else {
                h.starts_with('m') && h[1..].contains('_')
            }
        })
        .map(|(i, _)| i)
        .collect();
    let d = if full {
        let d = (cols.len() as f64).sqrt().round() as usize;
        if d * d != cols.len()
            || cols
                .iter()
                .enumerate()
                .any(|(j, &i)| headers[i] != format!("e{j}"))
        {
            bail!(
                "{}: flattened columns must be e0..e{{D*D-1}}",
                path.display()
            );
        }
        d
    } else {
        let d = dim_from_vech_len(cols.len())
            .filter(|&d| d > 0)
            .ok_or_else(|| {
                anyhow!(
                    "{}: {} matrix columns is not a triangle",
                    path.display(),
                    cols.len()
                )
            })?;
        if cols.iter().map(|&i| &headers[i]).ne(vech_headers(d).iter()) {
            bail!(
                "{}: matrix columns must be {:?}",
                path.display(),
                vech_headers(d)
            );
        }
        d
    };
    let wcol = headers.iter().position(|h| h == "weight");
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().with_context(|| {
                format!(
                    "{} row {}: bad number `{}`",
                    path.display(),
                    line + 1,
                    &rec[i]
                )
            })
        };
        let v: Vec<f64> = cols.iter().map(|&i| parse(i)).collect::<Result<_>>()?;
        let s = if full {
            SymMatrix::new(DMatrix::from_row_slice(d, d, &v))
                .with_context(|| format!("{} row {}", path.display(), line + 1))?
        } else {
            sym_from_vech(&VechVector::new(d, v)?)
        };
        points.push(
            SpdMatrix::try_from_sym(s)
                .with_context(|| format!("{} row {}", path.display(), line + 1))?,
        );
        if let Some(i) = wcol {
            weights.push(parse(i)?);
        }
    }
    if points.is_empty() {
        bail!("{}: no matrices", path.display());
    }
    Ok((points, wcol.map(|_| weights)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let a = SpdMatrix::from_row_slice(2, &[2.0, 0.3, 0.3, 1.0]).unwrap();
        let b = SpdMatrix::from_row_slice(2, &[1.5, -0.1, -0.1, 0.7]).unwrap();
        let m = geocond::SpdManifold::new(2);
        let pts = [a.clone(), b.clone()];
        geocond::filter::write_long_csv(
            std::fs::File::create(&p).unwrap(),
            &m,
            &[("observed", &[0.5, 1.0], &pts)],
        )
        .unwrap();
        let (pts, w) = read_matrices(&p).unwrap();
        assert!(w.is_none());
        assert_eq!(pts, vec![a, b]);
    }

    #[test]
    fn triangle_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, "m1_1,m1_2,m2_2\n2,0.5,1\n").unwrap();
        let (pts, _) = read_matrices(&p).unwrap();
        assert_eq!(pts[0].to_row_vec(), vec![2.0, 0.5, 0.5, 1.0]);
    }

    #[test]
    fn weights_and_bad_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.csv");
        std::fs::write(&p, "weight,m1_1\n0.25,2\n0.75,3\n").unwrap();
        let (pts, w) = read_matrices(&p).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(w.unwrap(), vec![0.25, 0.75]);
        std::fs::write(&p, "m1_1,m1_2\n1,0\n").unwrap();
        assert!(read_matrices(&p).is_err());
        std::fs::write(&p, "m1_1,m1_2,m2_2\n1,2,1\n").unwrap();
        assert!(read_matrices(&p).is_err());
    }
}
