//! The shared JSON schema for weight sequences:
//!
//! ```json
//! {
//!   "dim": 2,
//!   "weights": [ [ [[re, im], [re, im]], [[re, im], [re, im]] ], ... ],
//!   "tail": "none"
//! }
//! ```
//!
//! `weights` is a list of d×d matrices, each matrix a list of rows, each
//! entry an `[re, im]` pair. Floats round-trip exactly (shortest-precise
//! encoding), so witnesses replayed from serialized inputs reproduce their
//! eigenvalues bit-for-bit.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::HermitianMatrix;
use crate::shift::{TailPolicy, WeightSequence};
use crate::tol::Tolerances;
use crate::{C64, CMatrix};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftJson {
    pub dim: usize,
    pub weights: Vec<Vec<Vec<[f64; 2]>>>,
    pub tail: TailPolicy,
}

impl ShiftJson {
    pub fn from_sequence(w: &WeightSequence) -> Self {
        let d = w.dim();
        let weights = (0..w.len())
            .map(|n| {
                let a = w.weight(n).matrix();
                (0..d)
                    .map(|i| (0..d).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
                    .collect()
            })
            .collect();
        Self {
            dim: d,
            weights,
            tail: w.tail(),
        }
    }

    pub fn to_sequence(&self, tol: &Tolerances) -> Result<WeightSequence, Error> {
        if self.dim == 0 {
            return Err(Error::InvalidInput("dim must be >= 1".into()));
        }
        let mut weights = Vec::with_capacity(self.weights.len());
        for (n, mat) in self.weights.iter().enumerate() {
            if mat.len() != self.dim || mat.iter().any(|row| row.len() != self.dim) {
                return Err(Error::InvalidInput(format!(
                    "weights[{n}] is not a {0}x{0} matrix",
                    self.dim
                )));
            }
            let m = CMatrix::from_fn(self.dim, self.dim, |i, j| {
                C64::new(mat[i][j][0], mat[i][j][1])
            });
            let h = HermitianMatrix::new(m, tol.herm_tol).map_err(|e| {
                Error::InvalidInput(format!("weights[{n}]: {e}"))
            })?;
            weights.push(h);
        }
        WeightSequence::new(weights, self.tail, tol)
    }
}
