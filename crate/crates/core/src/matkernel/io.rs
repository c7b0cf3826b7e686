//! Matrix files: `{"dim": n, "entries": [[[re, im], ...], ...]}`, row-major.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

use super::dense::CMat;
use super::unitary::UnitaryMatrix;

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

pub fn matrix_to_json<T: Real>(m: &CMat<T>) -> serde_json::Value {
    let file = MatrixFile {
        dim: m.rows(),
        entries: (0..m.rows())
            .map(|i| {
                m.row(i)
                    .iter()
                    .map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()])
                    .collect()
            })
            .collect(),
    };
    serde_json::to_value(file).expect("matrix serializes")
}

pub fn matrix_to_string<T: Real>(m: &CMat<T>) -> String {
    serde_json::to_string(&matrix_to_json(m)).expect("matrix serializes")
}

pub fn matrix_from_str<T: Real>(text: &str, context: &str) -> Result<CMat<T>> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|source| Error::Json {
        context: context.to_string(),
        source,
    })?;
    let n = file.dim;
    if file.entries.len() != n || file.entries.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(format!("{context}: entries do not form a {n}×{n} array")));
    }
    let data = file
        .entries
        .into_iter()
        .flatten()
        .map(|[re, im]| C::new(T::lit(re), T::lit(im)))
        .collect();
    CMat::from_vec(n, n, data)
}

pub fn write_matrix<T: Real>(path: &Path, m: &CMat<T>) -> Result<()> {
    fs::write(path, matrix_to_string(m)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read a matrix file and check unitarity.
pub fn read_unitary<T: Real>(path: &Path) -> Result<UnitaryMatrix<T>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    UnitaryMatrix::new(matrix_from_str(&text, &path.display().to_string())?)
}
