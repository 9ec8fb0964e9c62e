//! Truncated weight sequences, operator moments and window products.
//!
//! A truncation holds `A_0..A_{N-1}`. Negative indices are the zero matrix
//! (the standing convention `A_{-2} = A_{-1} = 0`); indices at or beyond `N`
//! are governed by the tail policy: `none` restricts every criterion to the
//! windows it can verify, `constant_last` extends `A_n = A_{N-1}` so that
//! eventually-flat examples are exactly representable.
//!
//! Boundedness of the infinite weight sequence (`sup ‖A_n‖ < ∞`), which the
//! infinite-shift theory needs for `W` to be a bounded operator, is moot
//! under truncation: a finite list is always bounded.

use crate::error::Error;
use crate::linalg::{psd_check, HermitianMatrix};
use crate::tol::Tolerances;
use crate::{C64, CMatrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailPolicy {
    None,
    ConstantLast,
}

/// A weight with an extended (signed) index.
pub enum ExtWeight<'a> {
    /// Negative index: the zero matrix by convention.
    Zero,
    Weight(&'a HermitianMatrix),
}

/// Finite sequence `A_0..A_{N-1}` of positive-definite Hermitian weights.
#[derive(Debug, Clone)]
pub struct WeightSequence {
    dim: usize,
    weights: Vec<HermitianMatrix>,
    tail: TailPolicy,
    pd_tol: f64,
}

impl WeightSequence {
    pub fn new(weights: Vec<HermitianMatrix>, tail: TailPolicy, tol: &Tolerances) -> Result<Self, Error> {
        if weights.len() < 2 {
            return Err(Error::TooShort {
                got: weights.len(),
                need: 2,
            });
        }
        let dim = weights[0].dim();
        for (n, a) in weights.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.dim(),
                    context: format!("weight A_{n}"),
                });
            }
            let min = a.min_eigenvalue();
            if min < tol.pd_tol {
                return Err(Error::NotPositiveDefinite {
                    index: n,
                    min_eigenvalue: min,
                    pd_tol: tol.pd_tol,
                });
            }
        }
        Ok(Self {
            dim,
            weights,
            tail,
            pd_tol: tol.pd_tol,
        })
    }

    /// Scalar (d = 1) sequence from positive reals.
    pub fn from_scalars(alphas: &[f64], tail: TailPolicy, tol: &Tolerances) -> Result<Self, Error> {
        Self::new(
            alphas.iter().map(|&a| HermitianMatrix::scalar(a)).collect(),
            tail,
            tol,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored weights N.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tail(&self) -> TailPolicy {
        self.tail
    }

    pub fn pd_tol(&self) -> f64 {
        self.pd_tol
    }

    pub fn weights(&self) -> &[HermitianMatrix] {
        &self.weights
    }

    /// In-range weight.
    pub fn weight(&self, n: usize) -> &HermitianMatrix {
        &self.weights[n]
    }

    /// Weight at a signed extended index: zero below 0, tail policy above
    /// `N-1`. An index beyond the truncation with tail policy `none` is an
    /// out-of-window error, which is distinct from the negative-index zero
    /// convention.
    pub fn extended_weight(&self, n: i64) -> Result<ExtWeight<'_>, Error> {
        if n < 0 {
            return Ok(ExtWeight::Zero);
        }
        let n = n as usize;
        if n < self.weights.len() {
            Ok(ExtWeight::Weight(&self.weights[n]))
        } else {
            match self.tail {
                TailPolicy::ConstantLast => Ok(ExtWeight::Weight(self.weights.last().unwrap())),
                TailPolicy::None => Err(Error::OutOfWindow {
                    index: n as i64,
                    len: self.weights.len(),
                }),
            }
        }
    }

    /// Extended weight as a concrete matrix (zero matrix for negative index).
    pub fn weight_matrix(&self, n: i64) -> Result<CMatrix, Error> {
        Ok(match self.extended_weight(n)? {
            ExtWeight::Zero => CMatrix::zeros(self.dim, self.dim),
            ExtWeight::Weight(a) => a.matrix().clone(),
        })
    }

    /// Largest index usable by a criterion, taking the tail policy into
    /// account: with a constant tail every index is available but windows
    /// beyond `N-1` only repeat the tail, so `N-1` is the cap either way.
    fn last_usable_index(&self) -> usize {
        self.weights.len() - 1
    }

    /// Max spectral norm over the stored weights.
    pub fn max_weight_norm(&self) -> f64 {
        self.weights
            .iter()
            .map(|a| a.norm_spectral())
            .fold(0.0, f64::max)
    }

    /// Weight equality within `eq_tol·(1 + max‖A‖₂)`, the convention every
    /// propagation statement relies on.
    pub fn weights_equal(&self, m: usize, n: usize, eq_tol: f64) -> bool {
        let scale = 1.0 + self.max_weight_norm();
        let diff = HermitianMatrix::symmetrize(self.weights[m].matrix() - self.weights[n].matrix());
        diff.norm_spectral() <= eq_tol * scale
    }

    /// Map every weight through `f` (used by conjugation / scaling).
    pub fn map_weights(
        &self,
        f: impl Fn(&HermitianMatrix) -> HermitianMatrix,
    ) -> Result<Self, Error> {
        Self::new(
            self.weights.iter().map(f).collect(),
            self.tail,
            &Tolerances {
                pd_tol: self.pd_tol,
                ..Tolerances::default()
            },
        )
    }
}

/// Moment data: `B_0 = I`, `B_{n+1} = A_n B_n`, and the Hermitian moments
/// `M_n = B_n* B_n` (PSD by construction).
#[derive(Debug, Clone)]
pub struct MomentSequence {
    b: Vec<CMatrix>,
    m: Vec<HermitianMatrix>,
}

impl MomentSequence {
    /// Moments `B_0..B_N` of the stored truncation.
    pub fn build(w: &WeightSequence) -> Self {
        Self::build_extended(w, w.len()).expect("indices within truncation")
    }

    /// Moments `B_0..B_len`; indices beyond the truncation follow the tail
    /// policy (error when the tail is `none`).
    pub fn build_extended(w: &WeightSequence, len: usize) -> Result<Self, Error> {
        let d = w.dim();
        let mut b = Vec::with_capacity(len + 1);
        b.push(CMatrix::identity(d, d));
        for n in 0..len {
            let a = w.weight_matrix(n as i64)?;
            let next = &a * b.last().unwrap();
            b.push(next);
        }
        let m = b
            .iter()
            .map(|bn| HermitianMatrix::symmetrize(bn.adjoint() * bn))
            .collect();
        Ok(Self { b, m })
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn b(&self, n: usize) -> &CMatrix {
        &self.b[n]
    }

    /// `M_n = B_n* B_n`.
    pub fn moment(&self, n: usize) -> &HermitianMatrix {
        &self.m[n]
    }

    /// Every `M_n` passes the PSD check (it is a Gram matrix); exposed so the
    /// construction invariant can be asserted cheaply.
    pub fn moments_are_psd(&self, psd_tol: f64) -> bool {
        self.m.iter().all(|mn| psd_check(mn, psd_tol).is_psd)
    }
}

/// The conjugated-square window product
/// `A(n, k) = A_n ⋯ A_{n+k-1} A_{n+k}² A_{n+k-1} ⋯ A_n` (k ≥ 0, with
/// `A(n, 0) = A_n²`) and the extended notation
/// `A(n, -k) = A_n ⋯ A_{n-(k-1)} A_{n-k}² A_{n-(k-1)} ⋯ A_n`.
/// Hermitian PSD by construction (`C* A² C` shape); zero whenever any touched
/// index is negative.
#[derive(Debug, Clone)]
pub struct WindowProduct {
    pub n: i64,
    pub k: i64,
    pub value: HermitianMatrix,
}

pub fn window_product(w: &WeightSequence, n: i64, k: i64) -> Result<WindowProduct, Error> {
    let d = w.dim();
    let indices: Vec<i64> = if k >= 0 {
        (n..=n + k).collect()
    } else {
        (n + k..=n).rev().collect()
    };
    // Outer factors run from A_n inward to the squared A_{n±k}.
    let mut outer = CMatrix::identity(d, d);
    let mut zero = false;
    for &idx in &indices[..indices.len() - 1] {
        match w.extended_weight(idx)? {
            ExtWeight::Zero => zero = true,
            ExtWeight::Weight(a) => outer *= a.matrix(),
        }
    }
    let inner_idx = *indices.last().unwrap();
    let inner = match w.extended_weight(inner_idx)? {
        ExtWeight::Zero => {
            zero = true;
            CMatrix::zeros(d, d)
        }
        ExtWeight::Weight(a) => a.matrix().clone(),
    };
    let value = if zero {
        HermitianMatrix::zeros(d)
    } else {
        HermitianMatrix::symmetrize(&outer * &inner * &inner * outer.adjoint())
    };
    Ok(WindowProduct { n, k, value })
}

/// Which block criterion a window list is requested for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionKind {
    Hyponormal,
    /// Bram–Halmos window compression at order k (weights through `A_{m+2k-1}`).
    KHyponormalBramHalmos(usize),
    /// Embry / Hankel-of-moments at order k (moments through `B_{m+2k}`).
    KHyponormalEmbry(usize),
    /// Commutator compression at order k (weights through `A_{n+2k-2}`).
    KHyponormalCommutator(usize),
    /// The 2×2 block criterion (weights through `A_{n+2}`).
    TwoHyponormalBlocks,
    /// Tridiagonal quadratic family truncated at `n_max` (needs `A_{n_max+1}`).
    Quadratic,
    /// Pentadiagonal cubic family truncated at `n_max` (needs `A_{n_max+2}`).
    Cubic,
}

impl CriterionKind {
    pub fn name(&self) -> String {
        match self {
            CriterionKind::Hyponormal => "hyponormal".into(),
            CriterionKind::KHyponormalBramHalmos(k) => format!("{k}-hyponormal (bram-halmos)"),
            CriterionKind::KHyponormalEmbry(k) => format!("{k}-hyponormal (embry)"),
            CriterionKind::KHyponormalCommutator(k) => format!("{k}-hyponormal (commutator)"),
            CriterionKind::TwoHyponormalBlocks => "2-hyponormal blocks".into(),
            CriterionKind::Quadratic => "quadratic".into(),
            CriterionKind::Cubic => "cubic".into(),
        }
    }

    /// Highest weight index the window at `m` touches.
    fn top_index(&self, m: usize) -> usize {
        match self {
            CriterionKind::Hyponormal => m + 1,
            CriterionKind::KHyponormalBramHalmos(k) | CriterionKind::KHyponormalEmbry(k) => {
                m + 2 * k - 1
            }
            CriterionKind::KHyponormalCommutator(k) => m + 2 * k - 2,
            CriterionKind::TwoHyponormalBlocks => m + 2,
            CriterionKind::Quadratic => m + 1,
            CriterionKind::Cubic => m + 2,
        }
    }
}

/// Exactly the window indices for which every weight the criterion touches
/// exists under the tail policy.
pub fn verifiable_windows(w: &WeightSequence, kind: CriterionKind) -> Vec<usize> {
    match w.tail() {
        TailPolicy::None => {
            let last = w.last_usable_index();
            (0..w.len())
                .take_while(|&m| kind.top_index(m) <= last)
                .collect()
        }
        // With a constant tail every window is computable; beyond N-1 the
        // window content only repeats the tail, so cap there.
        TailPolicy::ConstantLast => (0..=w.last_usable_index()).collect(),
    }
}

/// The window list, or an "insufficient truncation" error naming the number
/// of weights needed to verify at least one window.
pub fn require_windows(w: &WeightSequence, kind: CriterionKind) -> Result<Vec<usize>, Error> {
    let windows = verifiable_windows(w, kind);
    if windows.is_empty() {
        Err(Error::InsufficientTruncation {
            criterion: kind.name(),
            have: w.len(),
            need: kind.top_index(0) + 1,
        })
    } else {
        Ok(windows)
    }
}

/// Scale every weight by `c > 0` (class verdicts are invariant under this,
/// with grid bounds rescaled accordingly).
pub fn scale_weights(w: &WeightSequence, c: f64) -> Result<WeightSequence, Error> {
    assert!(c > 0.0, "scaling factor must be positive");
    w.map_weights(|a| HermitianMatrix::symmetrize(a.matrix() * C64::new(c, 0.0)))
}
