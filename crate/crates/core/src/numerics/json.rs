use serde::{Deserialize, Serialize};

use super::{c, CMatrix};
use crate::error::{Error, Result};

/// Wire form of a matrix: `{"rows":n,"cols":m,"data":[[re,im],...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.rows * self.cols != self.data.len() {
            return Err(Error::InvalidInput(format!(
                "matrix declares {}x{} but carries {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if let Some(pos) = self
            .data
            .iter()
            .position(|[re, im]| !re.is_finite() || !im.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "matrix entry {pos} is not finite"
            )));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            c(re, im)
        }))
    }
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = m[(i, j)];
                data.push([clean(z.re), clean(z.im)]);
            }
        }
        MatrixJson { rows, cols, data }
    }
}

/// `serialize_with` adapter writing a matrix in wire form.
pub fn serialize_matrix<S: serde::Serializer>(
    m: &CMatrix,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from(m).serialize(s)
}

impl TryFrom<&MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(value: &MatrixJson) -> Result<Self> {
        value.to_matrix()
    }
}

// Normalizes negative zero so reports are byte-stable.
fn clean(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}
