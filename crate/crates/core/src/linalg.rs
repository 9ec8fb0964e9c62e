//! Dense complex Hermitian linear algebra at small dimension.
//!
//! Everything here is spectral: PSD verdicts, kernels and pseudoinverses all
//! come from one Hermitian eigendecomposition, so their tolerance conventions
//! agree by construction. Matrices are dense and small (d ≤ 16 weights,
//! assembled block criteria up to ~100 total dimension).

use crate::error::Error;
use crate::{C64, CMatrix, CVector};
use serde::{Deserialize, Serialize};

/// A validated d×d complex Hermitian matrix.
///
/// Construction checks `‖M − M*‖_max ≤ herm_tol·(1 + ‖M‖_max)` and stores the
/// symmetrization `(M + M*)/2`; downstream products like `A_n A_{n+1}² A_n`
/// accumulate roundoff in the anti-Hermitian part, and symmetrizing at the
/// boundary keeps every later spectral computation exact-Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix, herm_tol: f64) -> Result<Self, Error> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: m.nrows().max(1),
                got: m.ncols(),
                context: "Hermitian matrix must be square with dim >= 1".into(),
            });
        }
        let max_abs = m.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let bound = herm_tol * (1.0 + max_abs);
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let diff = (m[(i, j)] - m[(j, i)].conj()).norm();
                if diff > bound {
                    return Err(Error::NotHermitian {
                        i,
                        j,
                        a: format!("{}", m[(i, j)]),
                        b: format!("{}", m[(j, i)].conj()),
                        diff,
                        tol: bound,
                    });
                }
            }
        }
        let sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { entries: sym })
    }

    /// Wrap a matrix that is Hermitian by construction (products of the form
    /// `X* X`, real diagonals, sums of Hermitian terms). Symmetrizes without
    /// tolerance-checking.
    pub fn symmetrize(m: CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "symmetrize needs a square matrix");
        let sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Self { entries: sym }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros(dim, dim),
        }
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Self { entries: m }
    }

    /// 1×1 matrix holding a real scalar (scalar shifts are d = 1).
    pub fn scalar(v: f64) -> Self {
        Self::from_diagonal(&[v])
    }

    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Self {
        let m = CMatrix::from_fn(dim, dim, |i, j| C64::new(rows[i * dim + j], 0.0));
        Self::symmetrize(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    /// Spectral norm = max |eigenvalue|.
    pub fn norm_spectral(&self) -> f64 {
        self.entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        self.entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// `‖A − B‖₂ ≤ tol·(1 + max(‖A‖₂, ‖B‖₂))`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale = 1.0 + self.norm_spectral().max(other.norm_spectral());
        let diff = Self::symmetrize(self.matrix() - other.matrix());
        diff.norm_spectral() <= tol * scale
    }

    /// Exact inverse via the spectral decomposition. Intended for weights,
    /// which are positive definite by standing assumption; panics on a
    /// numerically singular input to keep misuse loud.
    pub fn inverse(&self) -> CMatrix {
        let eig = self.entries.clone().symmetric_eigen();
        let scale = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        assert!(
            eig.eigenvalues.iter().all(|l| l.abs() > 1e-14 * (1.0 + scale)),
            "inverse of a numerically singular Hermitian matrix"
        );
        spectral_apply(&eig.eigenvectors, &eig.eigenvalues, |l| 1.0 / l)
    }

    /// Principal PSD square root; eigenvalues are clamped at zero first so
    /// boundary-PSD inputs do not produce NaN.
    pub fn sqrt_psd(&self) -> Self {
        let eig = self.entries.clone().symmetric_eigen();
        Self::symmetrize(spectral_apply(&eig.eigenvectors, &eig.eigenvalues, |l| {
            l.max(0.0).sqrt()
        }))
    }
}

fn spectral_apply(
    vectors: &CMatrix,
    values: &nalgebra::DVector<f64>,
    f: impl Fn(f64) -> f64,
) -> CMatrix {
    let d = vectors.nrows();
    let mut diag = CMatrix::zeros(d, d);
    for i in 0..d {
        diag[(i, i)] = C64::new(f(values[i]), 0.0);
    }
    vectors * diag * vectors.adjoint()
}

/// Grid of equally sized square blocks, with an optional Hermitian flag for
/// the assembled total matrix. The class testers assemble their criteria
/// here before running the spectral PSD check.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    block_rows: usize,
    block_cols: usize,
    block_dim: usize,
    blocks: Vec<CMatrix>,
    hermitian: bool,
}

impl BlockMatrix {
    pub fn zeros(block_rows: usize, block_cols: usize, block_dim: usize, hermitian: bool) -> Self {
        Self {
            block_rows,
            block_cols,
            block_dim,
            blocks: vec![CMatrix::zeros(block_dim, block_dim); block_rows * block_cols],
            hermitian,
        }
    }

    pub fn set_block(&mut self, i: usize, j: usize, block: CMatrix) {
        assert!(i < self.block_rows && j < self.block_cols, "block index out of range");
        assert_eq!(block.nrows(), self.block_dim);
        assert_eq!(block.ncols(), self.block_dim);
        self.blocks[i * self.block_cols + j] = block;
    }

    pub fn block(&self, i: usize, j: usize) -> &CMatrix {
        &self.blocks[i * self.block_cols + j]
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn total_dim(&self) -> usize {
        self.block_rows * self.block_dim
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    /// Assemble the total matrix.
    pub fn assemble(&self) -> CMatrix {
        let d = self.block_dim;
        let mut m = CMatrix::zeros(self.block_rows * d, self.block_cols * d);
        for bi in 0..self.block_rows {
            for bj in 0..self.block_cols {
                let blk = self.block(bi, bj);
                for i in 0..d {
                    for j in 0..d {
                        m[(bi * d + i, bj * d + j)] = blk[(i, j)];
                    }
                }
            }
        }
        m
    }

    /// Validate the Hermitian flag blockwise and produce the symmetrized
    /// total matrix. Errors name the offending global entry pair.
    pub fn to_hermitian(&self, herm_tol: f64) -> Result<HermitianMatrix, Error> {
        if !self.hermitian || self.block_rows != self.block_cols {
            return Err(Error::InvalidInput(
                "block matrix is not flagged Hermitian".into(),
            ));
        }
        HermitianMatrix::new(self.assemble(), herm_tol)
    }
}

/// Outcome of a PSD check.
///
/// `scale` is the `1 + ‖M‖₂` factor the threshold was multiplied by, so the
/// decision `min_eigenvalue ≥ −psd_tol·scale` can be replayed from the report
/// alone. `witness_vector` is a unit eigenvector of the smallest eigenvalue;
/// on failure it certifies `⟨M w, w⟩ = min_eigenvalue < 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub witness_vector: Vec<(f64, f64)>,
    pub scale: f64,
}

impl PsdReport {
    pub fn witness(&self) -> CVector {
        CVector::from_iterator(
            self.witness_vector.len(),
            self.witness_vector.iter().map(|&(re, im)| C64::new(re, im)),
        )
    }
}

/// Spectral PSD test: `is_psd ⟺ λ_min(M) ≥ −psd_tol·(1 + ‖M‖₂)`.
pub fn psd_check(m: &HermitianMatrix, psd_tol: f64) -> PsdReport {
    let eig = m.matrix().clone().symmetric_eigen();
    let mut min_idx = 0;
    let mut min_val = f64::INFINITY;
    let mut max_abs = 0.0f64;
    for (i, l) in eig.eigenvalues.iter().enumerate() {
        if *l < min_val {
            min_val = *l;
            min_idx = i;
        }
        max_abs = max_abs.max(l.abs());
    }
    let scale = 1.0 + max_abs;
    let witness = eig.eigenvectors.column(min_idx);
    PsdReport {
        is_psd: min_val >= -psd_tol * scale,
        min_eigenvalue: min_val,
        witness_vector: witness.iter().map(|c| (c.re, c.im)).collect(),
        scale,
    }
}

/// PSD test on a Hermitian-flagged block matrix; validation failures name
/// the offending entries.
pub fn psd_check_block(m: &BlockMatrix, psd_tol: f64, herm_tol: f64) -> Result<PsdReport, Error> {
    Ok(psd_check(&m.to_hermitian(herm_tol)?, psd_tol))
}

/// Orthonormal eigenvectors whose eigenvalues satisfy
/// `|λ| ≤ rank_tol·(1 + ‖M‖₂)`; their span is the numerical kernel.
pub fn kernel_basis(m: &HermitianMatrix, rank_tol: f64) -> Vec<CVector> {
    let eig = m.matrix().clone().symmetric_eigen();
    let scale = 1.0 + eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let mut basis = Vec::new();
    for (i, l) in eig.eigenvalues.iter().enumerate() {
        if l.abs() <= rank_tol * scale {
            basis.push(eig.eigenvectors.column(i).into_owned());
        }
    }
    basis
}

/// Spectral (Moore–Penrose) pseudoinverse with the same relative rank cutoff
/// as `kernel_basis`.
pub fn pseudoinverse(m: &HermitianMatrix, rank_tol: f64) -> CMatrix {
    let eig = m.matrix().clone().symmetric_eigen();
    let scale = 1.0 + eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let cutoff = rank_tol * scale;
    spectral_apply(&eig.eigenvectors, &eig.eigenvalues, |l| {
        if l.abs() <= cutoff { 0.0 } else { 1.0 / l }
    })
}

/// Smulian test for the 2×2 block matrix `[[X, Y], [Y*, Z]]`.
///
/// Positive iff `X ⪰ 0`, `Z ⪰ 0`, `Y*` lies in the range of `Z`
/// (`‖Z Z⁺ Y* − Y*‖ ≤ psd_tol·(1 + ‖Y‖)`), and the Schur-type complement
/// `X − U* Z U ⪰ 0` with `U = Z⁺ Y*`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmuljanReport {
    pub positive: bool,
    pub x_psd: PsdReport,
    pub z_psd: PsdReport,
    pub range_residual: f64,
    pub range_ok: bool,
    pub complement_psd: PsdReport,
}

pub fn smuljan_check(
    x: &HermitianMatrix,
    y: &CMatrix,
    z: &HermitianMatrix,
    psd_tol: f64,
    rank_tol: f64,
) -> Result<SmuljanReport, Error> {
    let d = x.dim();
    if z.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: z.dim(),
            context: "Smulian blocks X and Z".into(),
        });
    }
    if y.nrows() != d || y.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: y.nrows().max(y.ncols()),
            context: "Smulian block Y".into(),
        });
    }

    let x_psd = psd_check(x, psd_tol);
    let z_psd = psd_check(z, psd_tol);

    let z_pinv = pseudoinverse(z, rank_tol);
    let y_adj = y.adjoint();
    let u = &z_pinv * &y_adj;

    // Range condition: Z Z⁺ Y* must reproduce Y*.
    let residual_mat = z.matrix() * &z_pinv * &y_adj - &y_adj;
    let range_residual = operator_norm(&residual_mat);
    let y_norm = operator_norm(y);
    let range_ok = range_residual <= psd_tol * (1.0 + y_norm);

    let complement = HermitianMatrix::symmetrize(x.matrix() - u.adjoint() * z.matrix() * &u);
    let complement_psd = psd_check(&complement, psd_tol);

    Ok(SmuljanReport {
        positive: x_psd.is_psd && z_psd.is_psd && range_ok && complement_psd.is_psd,
        x_psd,
        z_psd,
        range_residual,
        range_ok,
        complement_psd,
    })
}

/// Relative PSD margin `λ_min / (1 + max|λ|)`: positive when comfortably
/// PSD, negative when not; the search harnesses maximize this.
pub fn relative_margin(m: &HermitianMatrix) -> f64 {
    let eig = m.matrix().clone().symmetric_eigenvalues();
    let mut min_val = f64::INFINITY;
    let mut max_abs = 0.0f64;
    for l in eig.iter() {
        min_val = min_val.min(*l);
        max_abs = max_abs.max(l.abs());
    }
    min_val / (1.0 + max_abs)
}

/// Spectral norm of a general complex matrix, via `λ_max(M* M)`.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let top = gram
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    top.max(0.0).sqrt()
}

/// Orthonormalize the given vectors (modified Gram–Schmidt), dropping
/// numerically dependent ones.
pub fn orthonormalize(vectors: &[CVector], drop_tol: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let coeff = b.dotc(&w);
            w -= b * coeff;
        }
        let n = w.norm();
        if n > drop_tol {
            basis.push(w / C64::new(n, 0.0));
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in `ℂ^d`.
pub fn orthogonal_complement(basis: &[CVector], dim: usize) -> Vec<CVector> {
    let mut all = basis.to_vec();
    let mut complement = Vec::new();
    for i in 0..dim {
        let mut e = CVector::zeros(dim);
        e[i] = C64::new(1.0, 0.0);
        let before = all.len();
        all = {
            let mut candidates = all.clone();
            candidates.push(e);
            orthonormalize(&candidates, 1e-10)
        };
        if all.len() > before {
            complement.push(all.last().unwrap().clone());
        }
    }
    complement
}

/// Pack orthonormal columns into a d×r matrix.
pub fn basis_matrix(basis: &[CVector], dim: usize) -> CMatrix {
    let mut q = CMatrix::zeros(dim, basis.len());
    for (j, v) in basis.iter().enumerate() {
        q.set_column(j, v);
    }
    q
}
