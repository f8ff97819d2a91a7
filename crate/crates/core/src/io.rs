//! JSON file formats for matrices and map families.
//!
//! Matrix: `{"dim": n, "re": [[...]], "im": [[...]]}`, row-major, `im` optional.
//! Map: `{"variant": "conjugation", "V_re": [[...]], "V_im": [[...]]}`,
//! `{"variant": "pinch", "dim": n, "blocks": [[0, 1], [2]]}` or `{"variant": "diag", "dim": n}`.
//! A family is an array of maps; a single map object is accepted as a family of one.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::maps::{MapFamily, PositiveLinearMap};
use crate::matrix::CMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapFile {
    Conjugation {
        #[serde(rename = "V_re")]
        v_re: Vec<Vec<f64>>,
        #[serde(rename = "V_im", default, skip_serializing_if = "Option::is_none")]
        v_im: Option<Vec<Vec<f64>>>,
    },
    Pinch {
        dim: usize,
        blocks: Vec<Vec<usize>>,
    },
    Diag {
        dim: usize,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<MapFile>),
    One(MapFile),
}

fn parse_err(what: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| parse_err(&format!("cannot read {}", path.display()), e))
}

impl MatrixFile {
    pub fn into_hermitian(self) -> Result<HermitianMatrix> {
        if self.re.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.re.len() });
        }
        if let Some(im) = &self.im {
            if im.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: im.len() });
            }
        }
        HermitianMatrix::new(CMatrix::from_parts(&self.re, self.im.as_deref())?)
    }

    pub fn from_hermitian(a: &HermitianMatrix) -> Self {
        let m = a.as_matrix();
        let im = m.im_rows();
        let real = im.iter().flatten().all(|&v| v == 0.0);
        Self { dim: a.dim(), re: m.re_rows(), im: (!real).then_some(im) }
    }
}

impl MapFile {
    pub fn into_map(self) -> Result<PositiveLinearMap> {
        match self {
            MapFile::Conjugation { v_re, v_im } => {
                Ok(PositiveLinearMap::conjugation(CMatrix::from_parts(&v_re, v_im.as_deref())?))
            }
            MapFile::Pinch { dim, blocks } => PositiveLinearMap::pinch(dim, blocks),
            MapFile::Diag { dim } => Ok(PositiveLinearMap::diag(dim)),
        }
    }

    pub fn from_map(map: &PositiveLinearMap) -> Self {
        match map {
            PositiveLinearMap::Conjugation { v } => {
                let im = v.im_rows();
                let real = im.iter().flatten().all(|&x| x == 0.0);
                MapFile::Conjugation { v_re: v.re_rows(), v_im: (!real).then_some(im) }
            }
            PositiveLinearMap::Pinch { dim, blocks } => MapFile::Pinch { dim: *dim, blocks: blocks.clone() },
            PositiveLinearMap::Diag { dim } => MapFile::Diag { dim: *dim },
        }
    }
}

pub fn matrix_from_json(s: &str) -> Result<HermitianMatrix> {
    serde_json::from_str::<MatrixFile>(s).map_err(|e| parse_err("matrix JSON", e))?.into_hermitian()
}

pub fn matrix_to_json(a: &HermitianMatrix) -> String {
    crate::json::to_string(&MatrixFile::from_hermitian(a))
}

pub fn family_from_json(s: &str) -> Result<MapFamily> {
    let files = match serde_json::from_str::<OneOrMany>(s).map_err(|e| parse_err("map family JSON", e))? {
        OneOrMany::Many(v) => v,
        OneOrMany::One(m) => vec![m],
    };
    MapFamily::new(files.into_iter().map(MapFile::into_map).collect::<Result<_>>()?)
}

pub fn family_to_json(family: &MapFamily) -> String {
    crate::json::to_string(&family.maps().iter().map(MapFile::from_map).collect::<Vec<_>>())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<HermitianMatrix> {
    let path = path.as_ref();
    matrix_from_json(&read(path)?).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn read_family(path: impl AsRef<Path>) -> Result<MapFamily> {
    let path = path.as_ref();
    family_from_json(&read(path)?).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}
