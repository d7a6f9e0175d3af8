use serde::{Deserialize, Serialize};

use super::{named, Channel};
use crate::error::{Error, Result};
use crate::numerics::MatrixJson;
use crate::numerics::Tolerance;

/// Wire form of a channel, tagged by `kind`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelJson {
    Kraus {
        ops: Vec<MatrixJson>,
    },
    /// Choi matrix on `out ⊗ in`; dimensions default to square.
    Choi {
        matrix: MatrixJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim_in: Option<usize>,
    },
    Unitary {
        matrix: MatrixJson,
    },
    Stochastic {
        matrix: MatrixJson,
    },
}

impl ChannelJson {
    pub fn to_channel(&self, tol: &Tolerance) -> Result<Channel> {
        match self {
            ChannelJson::Kraus { ops } => {
                let ops = ops
                    .iter()
                    .map(MatrixJson::to_matrix)
                    .collect::<Result<Vec<_>>>()?;
                Channel::from_kraus(ops, tol)
            }
            ChannelJson::Choi { matrix, dim_in } => {
                let m = matrix.to_matrix()?;
                let n = m.nrows();
                let din = match dim_in {
                    Some(d) => *d,
                    None => square_root(n).ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "Choi matrix of size {n} is not square-dimensional; give dim_in"
                        ))
                    })?,
                };
                if din == 0 || n % din != 0 {
                    return Err(Error::InvalidInput(format!(
                        "dim_in {din} does not divide Choi size {n}"
                    )));
                }
                Channel::from_choi(m, din, n / din, tol)
            }
            ChannelJson::Unitary { matrix } => named::unitary(&matrix.to_matrix()?, tol),
            ChannelJson::Stochastic { matrix } => {
                named::classical_from_stochastic(&matrix.to_matrix()?, tol)
            }
        }
    }

    /// Kraus encoding of an existing channel.
    pub fn from_channel(ch: &Channel) -> Self {
        ChannelJson::Kraus {
            ops: ch.kraus().iter().map(MatrixJson::from).collect(),
        }
    }
}

fn square_root(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}
