//! JSON matrix files: `{"dim": d, "re": [[...]], "im": [[...]]}`, row-major.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::state::{DensityMatrix, Observable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        for (name, part) in [("re", &self.re), ("im", &self.im)] {
            if part.len() != self.dim {
                return Err(Error::InvalidInput(format!(
                    "field \"{name}\" has {} rows, dim is {}",
                    part.len(),
                    self.dim
                )));
            }
            if let Some((i, row)) = part.iter().enumerate().find(|(_, r)| r.len() != self.dim) {
                return Err(Error::InvalidInput(format!(
                    "field \"{name}\" row {i} has {} entries, dim is {}",
                    row.len(),
                    self.dim
                )));
            }
        }
        ComplexMatrix::from_parts(&self.re, &self.im)
    }
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixFile {
            dim: m.dim(),
            re: m.rows().map(|r| r.iter().map(|z| z.re).collect()).collect(),
            im: m.rows().map(|r| r.iter().map(|z| z.im).collect()).collect(),
        }
    }
}

pub fn parse_matrix(text: &str, origin: &str) -> Result<ComplexMatrix> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|source| Error::Parse {
        path: origin.to_string(),
        source,
    })?;
    file.to_matrix()
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix(&text, &path.display().to_string())
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    DensityMatrix::new(read_matrix(path)?)
}

pub fn read_observable(path: &Path) -> Result<Observable> {
    Observable::new(read_matrix(path)?)
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    let text = serde_json::to_string_pretty(&MatrixFile::from(m)).expect("matrix serializes");
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
