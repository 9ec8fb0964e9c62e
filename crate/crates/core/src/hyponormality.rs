//! Class testers: hyponormal, k-hyponormal (three block forms), the 2×2
//! block criterion for 2-hyponormality, and the weak quadratic/cubic classes
//! via parametric certification.
//!
//! The k-hyponormality window matrices are slot compressions of the operator
//! criteria. Writing `C_{n,p} = A_{n+p-1} ⋯ A_n` (the forward product of `p`
//! weights starting at `n`, `C_{n,0} = I`, zero whenever a negative index is
//! touched):
//!
//! * Bram–Halmos at window `m`: `G(m)_{ij} = C*_{m+i,j} C_{m+j,i}`,
//!   `i,j = 0..k`. Congruent to the Embry matrix by `diag(B_{m+i})`, which is
//!   exactly the equivalence of the two formulations for shifts.
//! * Embry at window `m`: `H(m)_{ij} = B*_{m+i+j} B_{m+i+j}`, the Hankel
//!   matrix of moments.
//! * Commutator at window `n`: `K(n)_{ij} = C*_{n+i-1,j} C_{n+j-1,i} −
//!   C_{n-1,i} C*_{n-1,j}`, `i,j = 1..k` — the compression of
//!   `([T*^j, T^i])_{1≤i,j≤k}`. At `k = 2` this is verbatim the 2×2 block
//!   criterion with entries `A_n²−A_{n-1}²`, `A_nA_{n+1}²−A_{n-1}²A_n`,
//!   `A_{n+1}A_{n+2}²A_{n+1}−A_nA_{n-1}²A_n` and the `A_{-1}=A_{-2}=0`
//!   convention.
//!
//! A "pass" is always qualified by `windows_checked`; no verdict is claimed
//! for the untruncated shift.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{psd_check, HermitianMatrix, PsdReport};
use crate::positivity::{
    assemble_cubic_family, assemble_quadratic_family, certify_family, CertificationResult,
    GridSpec,
};
use crate::shift::{require_windows, verifiable_windows, CriterionKind, WeightSequence};
use crate::tol::Tolerances;
use crate::CMatrix;

/// The three equivalent k-hyponormality block formulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KHypForm {
    BramHalmos,
    Embry,
    Commutator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ClassName {
    Hyponormal,
    KHyponormal { k: usize },
    KEHyponormal { k: usize },
    TwoHyponormalBlocks,
    Quadratic,
    Cubic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictReport {
    Psd(PsdReport),
    Certification(CertificationResult),
}

/// Verdict of one class tester on one truncation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub class_name: ClassName,
    pub form: Option<KHypForm>,
    pub passed: bool,
    /// Lowest failing window (for certifications: the family truncation).
    pub failing_window: Option<usize>,
    pub report: Option<VerdictReport>,
    pub windows_checked: Vec<usize>,
    pub notes: Vec<String>,
}

impl ClassVerdict {
    fn pass(class_name: ClassName, form: Option<KHypForm>, windows: Vec<usize>) -> Self {
        Self {
            class_name,
            form,
            passed: true,
            failing_window: None,
            report: None,
            windows_checked: windows,
            notes: Vec::new(),
        }
    }
}

/// Forward product `C_{n,p} = A_{n+p-1} ⋯ A_n`; zero matrix once a negative
/// index is touched.
fn c_product(w: &WeightSequence, n: i64, p: usize) -> Result<CMatrix, Error> {
    let d = w.dim();
    let mut c = CMatrix::identity(d, d);
    for idx in (n..n + p as i64).rev() {
        c *= w.weight_matrix(idx)?;
    }
    Ok(c)
}

/// Bram–Halmos or Embry window matrix at base `m` (size `(k+1)d`), or the
/// commutator window matrix (size `kd`).
pub fn assemble_k_hyp_window(
    w: &WeightSequence,
    k: usize,
    form: KHypForm,
    m: usize,
) -> Result<HermitianMatrix, Error> {
    assert!(k >= 1, "k must be >= 1");
    let d = w.dim();
    let mi = m as i64;
    match form {
        KHypForm::BramHalmos => {
            let mut g = CMatrix::zeros((k + 1) * d, (k + 1) * d);
            for i in 0..=k {
                for j in 0..=k {
                    let left = c_product(w, mi + i as i64, j)?;
                    let right = c_product(w, mi + j as i64, i)?;
                    set_block(&mut g, d, i, j, left.adjoint() * right);
                }
            }
            Ok(HermitianMatrix::symmetrize(g))
        }
        KHypForm::Embry => {
            // Hankel of moments M_{m+i+j}; build B products once.
            let need = m + 2 * k;
            let moments = crate::shift::MomentSequence::build_extended(w, need)?;
            let mut h = CMatrix::zeros((k + 1) * d, (k + 1) * d);
            for i in 0..=k {
                for j in 0..=k {
                    set_block(&mut h, d, i, j, moments.moment(m + i + j).matrix().clone());
                }
            }
            Ok(HermitianMatrix::symmetrize(h))
        }
        KHypForm::Commutator => {
            let mut km = CMatrix::zeros(k * d, k * d);
            for i in 1..=k {
                for j in 1..=k {
                    let pos_left = c_product(w, mi + i as i64 - 1, j)?;
                    let pos_right = c_product(w, mi + j as i64 - 1, i)?;
                    let neg_left = c_product(w, mi - 1, i)?;
                    let neg_right = c_product(w, mi - 1, j)?;
                    let block = pos_left.adjoint() * pos_right - neg_left * neg_right.adjoint();
                    set_block(&mut km, d, i - 1, j - 1, block);
                }
            }
            Ok(HermitianMatrix::symmetrize(km))
        }
    }
}

fn set_block(m: &mut CMatrix, d: usize, bi: usize, bj: usize, block: CMatrix) {
    for i in 0..d {
        for j in 0..d {
            m[(bi * d + i, bj * d + j)] = block[(i, j)];
        }
    }
}

fn window_kind(k: usize, form: KHypForm) -> CriterionKind {
    match form {
        KHypForm::BramHalmos => CriterionKind::KHyponormalBramHalmos(k),
        KHypForm::Embry => CriterionKind::KHyponormalEmbry(k),
        KHypForm::Commutator => CriterionKind::KHyponormalCommutator(k),
    }
}

/// Hyponormality: `A_{n+1}² − A_n² ⪰ 0` for every window `n`; the `A_0²`
/// block is PSD by construction and recorded in the notes.
pub fn check_hyponormal(w: &WeightSequence, tol: &Tolerances) -> ClassVerdict {
    let windows = verifiable_windows(w, CriterionKind::Hyponormal);
    let mut verdict = ClassVerdict::pass(ClassName::Hyponormal, None, windows.clone());
    verdict
        .notes
        .push("A_0^2 block is PSD by construction (checked)".into());

    let zero_block = psd_check(w.weight(0), tol.psd_tol);
    debug_assert!(zero_block.is_psd);

    for &n in &windows {
        let a_n = w.weight_matrix(n as i64).expect("in-window");
        let a_next = w.weight_matrix(n as i64 + 1).expect("in-window");
        let diff = HermitianMatrix::symmetrize(&a_next * &a_next - &a_n * &a_n);
        let report = psd_check(&diff, tol.psd_tol);
        if !report.is_psd && verdict.passed {
            verdict.passed = false;
            verdict.failing_window = Some(n);
            verdict.report = Some(VerdictReport::Psd(report));
        }
    }
    verdict
}

/// k-hyponormality via the chosen block form, PSD-checked on every
/// verifiable window. The commutator form is cross-validated against
/// Bram–Halmos on shared windows and any verdict disagreement is flagged in
/// the notes rather than resolved silently.
pub fn check_k_hyponormal(
    w: &WeightSequence,
    k: usize,
    form: KHypForm,
    tol: &Tolerances,
) -> Result<ClassVerdict, Error> {
    let windows = require_windows(w, window_kind(k, form))?;
    let class_name = match form {
        KHypForm::Embry => ClassName::KEHyponormal { k },
        _ => ClassName::KHyponormal { k },
    };
    let mut verdict = ClassVerdict::pass(class_name, Some(form), windows.clone());

    for &m in &windows {
        let matrix = assemble_k_hyp_window(w, k, form, m)?;
        let report = psd_check(&matrix, tol.psd_tol);
        if !report.is_psd && verdict.passed {
            verdict.passed = false;
            verdict.failing_window = Some(m);
            verdict.report = Some(VerdictReport::Psd(report));
        }
    }

    if form == KHypForm::Commutator {
        // Data alignment: the commutator window at m+1 and the Bram–Halmos
        // window at m both see weights A_m..A_{m+2k-1}.
        if let Ok(bh_windows) = require_windows(w, window_kind(k, KHypForm::BramHalmos)) {
            let shared: Vec<usize> = bh_windows
                .iter()
                .copied()
                .filter(|m| windows.contains(&(m + 1)))
                .collect();
            let comm_pass_shared = shared.iter().all(|&m| {
                let mat = assemble_k_hyp_window(w, k, KHypForm::Commutator, m + 1).unwrap();
                psd_check(&mat, tol.psd_tol).is_psd
            });
            let bh_pass_shared = shared.iter().all(|&m| {
                let mat = assemble_k_hyp_window(w, k, KHypForm::BramHalmos, m).unwrap();
                psd_check(&mat, tol.psd_tol).is_psd
            });
            if comm_pass_shared != bh_pass_shared {
                verdict.notes.push(format!(
                    "commutator form disagrees with bram-halmos on data-aligned windows {shared:?} \
                     (commutator pass = {comm_pass_shared}, bram-halmos pass = {bh_pass_shared})"
                ));
            }
        }
    }

    Ok(verdict)
}

/// 2×2 block window matrix for 2-hyponormality at base `n` (the commutator
/// compression at k = 2).
pub fn assemble_two_hyp_block(w: &WeightSequence, n: usize) -> Result<HermitianMatrix, Error> {
    assemble_k_hyp_window(w, 2, KHypForm::Commutator, n)
}

/// The specialized 2-hyponormal window criterion: the 2d×2d block matrix at
/// every verifiable `n`, negative-index convention applied.
pub fn check_2_hyponormal_blocks(
    w: &WeightSequence,
    tol: &Tolerances,
) -> Result<ClassVerdict, Error> {
    if w.len() < 3 {
        return Err(Error::TooShort {
            got: w.len(),
            need: 3,
        });
    }
    let windows = require_windows(w, CriterionKind::TwoHyponormalBlocks)?;
    let mut verdict = ClassVerdict::pass(ClassName::TwoHyponormalBlocks, None, windows.clone());
    for &n in &windows {
        let block = assemble_two_hyp_block(w, n)?;
        let report = psd_check(&block, tol.psd_tol);
        if !report.is_psd && verdict.passed {
            verdict.passed = false;
            verdict.failing_window = Some(n);
            verdict.report = Some(VerdictReport::Psd(report));
        }
    }
    Ok(verdict)
}

/// Quadratic hyponormality: certify the tridiagonal family at the largest
/// verifiable truncation (smaller truncations are principal submatrices).
pub fn check_quadratic(
    w: &WeightSequence,
    grid: Option<GridSpec>,
    tol: &Tolerances,
) -> Result<ClassVerdict, Error> {
    let windows = require_windows(w, CriterionKind::Quadratic)?;
    let n_max = *windows.last().unwrap();
    let family = assemble_quadratic_family(w, n_max, tol.herm_tol)?;
    let grid = grid.unwrap_or_else(|| GridSpec::for_weights(w, 64));
    let cert = certify_family(&family, &grid, tol.psd_tol)?;
    Ok(certification_verdict(
        ClassName::Quadratic,
        n_max,
        windows,
        cert,
    ))
}

/// Cubic hyponormality: certify the pentadiagonal family over the real
/// (s, t) grid at the largest verifiable truncation.
pub fn check_cubic(
    w: &WeightSequence,
    grid: Option<GridSpec>,
    tol: &Tolerances,
) -> Result<ClassVerdict, Error> {
    let windows = require_windows(w, CriterionKind::Cubic)?;
    let n_max = *windows.last().unwrap();
    let family = assemble_cubic_family(w, n_max, tol.herm_tol)?;
    let grid = grid.unwrap_or_else(|| GridSpec::for_weights(w, 64));
    let cert = certify_family(&family, &grid, tol.psd_tol)?;
    Ok(certification_verdict(ClassName::Cubic, n_max, windows, cert))
}

fn certification_verdict(
    class_name: ClassName,
    n_max: usize,
    windows: Vec<usize>,
    cert: CertificationResult,
) -> ClassVerdict {
    let passed = cert.certified_nonnegative;
    ClassVerdict {
        class_name,
        form: None,
        passed,
        failing_window: if passed { None } else { Some(n_max) },
        notes: vec![cert.grid_spec.clone()],
        report: Some(VerdictReport::Certification(cert)),
        windows_checked: windows,
    }
}
