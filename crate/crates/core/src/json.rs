//! Wire helpers: complex numbers always travel as two-element `[re, im]` arrays.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::CMat;

pub type Pair = [f64; 2];

pub fn to_pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

pub fn from_pair(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn matrix_to_wire(m: &CMat) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| to_pair(m[(i, j)])).collect())
        .collect()
}

/// Rebuilds a matrix from nested rows; `None` when rows are ragged.
pub fn matrix_from_wire(rows: &[Vec<Pair>], ncols_if_empty: usize) -> Option<CMat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(ncols_if_empty, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(CMat::from_fn(nrows, ncols, |i, j| from_pair(rows[i][j])))
}

/// `#[serde(with = "complex")]` for a single complex scalar.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        to_pair(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Pair::deserialize(d).map(from_pair)
    }
}

/// `#[serde(with = "complex_matrix")]` for a dense complex matrix.
pub mod complex_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_wire(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = Vec::<Vec<Pair>>::deserialize(d)?;
        matrix_from_wire(&rows, 0).ok_or_else(|| serde::de::Error::custom("ragged matrix rows"))
    }
}
