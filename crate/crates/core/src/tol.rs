use serde::{Deserialize, Serialize};

/// Numerical tolerances, all relative to the scale of the matrix at hand
/// unless noted otherwise.
///
/// PSD decisions use `λ_min ≥ −psd_tol·(1 + ‖M‖₂)`; weight products grow
/// multiplicatively with the window, so absolute thresholds misclassify at
/// large indices. The pseudoinverse/kernel cutoff follows the same relative
/// convention so that kernel, pseudoinverse and PSD decisions stay
/// consistent with one another.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// PSD threshold, relative: `λ_min ≥ −psd_tol·(1 + ‖M‖₂)`.
    pub psd_tol: f64,
    /// Rank cutoff for kernels and spectral pseudoinverses, same convention.
    pub rank_tol: f64,
    /// Hermitian-validation threshold at construction, relative to `‖M‖_max`.
    pub herm_tol: f64,
    /// Weight equality: `A_m = A_n` means `‖A_m − A_n‖₂ ≤ eq_tol·(1 + max‖A‖₂)`.
    pub eq_tol: f64,
    /// Positive-definiteness floor for weights (absolute).
    pub pd_tol: f64,
    /// Invariance residual allowed in decompositions, relative to `max‖A_n‖₂`.
    pub dec_tol: f64,
    /// Commutator norm allowed for "commuting weights", same convention.
    pub comm_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd_tol: 1e-9,
            rank_tol: 1e-9,
            herm_tol: 1e-9,
            eq_tol: 1e-8,
            pd_tol: 1e-9,
            dec_tol: 1e-7,
            comm_tol: 1e-9,
        }
    }
}

impl Tolerances {
    /// Override just the PSD threshold (the CLI's `--tol`).
    pub fn with_psd_tol(psd_tol: f64) -> Self {
        Self {
            psd_tol,
            ..Self::default()
        }
    }
}
