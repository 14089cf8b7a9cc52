//! Problem files: JSON, optionally gzip-compressed.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use rtdec_core::problem::ProblemError;
use rtdec_core::DecodingProblem;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: header says N = {declared} but H has {found} columns")]
    ColumnCount { path: PathBuf, declared: usize, found: usize },
    #[error("{path}: {source}")]
    Problem { path: PathBuf, source: ProblemError },
}

/// On-disk layout. `H` and `A` list the row indices of each column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub name: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "H")]
    pub h: Vec<Vec<usize>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<usize>>,
    pub p: Vec<f64>,
}

impl From<&DecodingProblem> for ProblemFile {
    fn from(p: &DecodingProblem) -> Self {
        Self {
            name: p.name().to_owned(),
            m: p.m(),
            n: p.n(),
            k: p.k(),
            h: p.h_columns().to_vec(),
            a: p.a_columns().to_vec(),
            p: p.priors().to_vec(),
        }
    }
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

pub fn load_problem(path: &Path) -> Result<DecodingProblem, IoError> {
    let io = |source| IoError::Io { path: path.to_owned(), source };
    let file = File::open(path).map_err(io)?;
    let reader: Box<dyn Read> =
        if is_gz(path) { Box::new(GzDecoder::new(BufReader::new(file))) } else { Box::new(BufReader::new(file)) };
    let pf: ProblemFile =
        serde_json::from_reader(reader).map_err(|source| IoError::Json { path: path.to_owned(), source })?;
    if pf.h.len() != pf.n {
        return Err(IoError::ColumnCount { path: path.to_owned(), declared: pf.n, found: pf.h.len() });
    }
    DecodingProblem::new(pf.name, pf.m, pf.k, pf.h, pf.a, pf.p)
        .map_err(|source| IoError::Problem { path: path.to_owned(), source })
}

pub fn save_problem(problem: &DecodingProblem, path: &Path) -> Result<(), IoError> {
    let io = |source| IoError::Io { path: path.to_owned(), source };
    let json = |source| IoError::Json { path: path.to_owned(), source };
    let file = BufWriter::new(File::create(path).map_err(io)?);
    let pf = ProblemFile::from(problem);
    if is_gz(path) {
        let mut gz = GzEncoder::new(file, Compression::default());
        serde_json::to_writer(&mut gz, &pf).map_err(json)?;
        gz.finish().map_err(io)?.flush().map_err(io)
    } else {
        let mut w = file;
        serde_json::to_writer(&mut w, &pf).map_err(json)?;
        w.flush().map_err(io)
    }
}
