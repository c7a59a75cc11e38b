//! Wire format for complex matrices: an array of rows, each entry a
//! `[re, im]` pair.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_rows(m: &ComplexMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &MatrixRows) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::InvalidChannel("matrix has no rows".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err(Error::InvalidChannel("matrix has no columns".into()));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::InvalidChannel(format!(
            "ragged matrix: row {bad} has {} entries, expected {ncols}",
            rows[bad].len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |i, j| {
        c64(rows[i][j][0], rows[i][j][1])
    }))
}

/// `#[serde(with = "crate::json::matrix")]`
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ComplexMatrix, D::Error> {
        let rows = MatrixRows::deserialize(d)?;
        matrix_from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "crate::json::option_matrix")]`
pub mod option_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<ComplexMatrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(matrix_to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<ComplexMatrix>, D::Error> {
        Option::<MatrixRows>::deserialize(d)?
            .map(|rows| matrix_from_rows(&rows).map_err(serde::de::Error::custom))
            .transpose()
    }
}
