//! The structured run report and witness replay.
//!
//! Every failing verdict carries enough data to be re-checked later: the
//! window index (or parameter point) plus the recorded minimum eigenvalue.
//! `replay_witnesses` re-assembles exactly the named matrix from the input
//! file and demands the eigenvalue reproduce within 1e-10.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use shiftlab_core::hyponormality::{
    assemble_k_hyp_window, assemble_two_hyp_block, ClassName, ClassVerdict, KHypForm,
    VerdictReport,
};
use shiftlab_core::json::ShiftJson;
use shiftlab_core::linalg::psd_check;
use shiftlab_core::positivity::{assemble_cubic_family, assemble_quadratic_family};
use shiftlab_core::propagation::{DecompositionResult, FlatnessReport, SubspaceLabel};
use shiftlab_core::shift::WeightSequence;
use shiftlab_core::Tolerances;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    /// sha256 of the raw input file bytes.
    pub input_digest: String,
    /// Seed recorded for provenance (classify itself is deterministic).
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub verdicts: Vec<ClassVerdict>,
    pub flatness: Option<FlatnessReport>,
    pub decomposition: Option<DecompositionJson>,
    pub search: Option<SearchSummary>,
    pub wall_time_ms: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(input_digest: String, tolerances: Tolerances) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest,
            seed: None,
            tolerances,
            verdicts: Vec::new(),
            flatness: None,
            decomposition: None,
            search: None,
            wall_time_ms: BTreeMap::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentJson {
    pub label: SubspaceLabel,
    /// Orthonormal basis vectors, entries as [re, im].
    pub basis: Vec<Vec<[f64; 2]>>,
    pub weights: ShiftJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub residual: f64,
    pub notes: Vec<String>,
    pub components: Vec<ComponentJson>,
}

impl DecompositionJson {
    pub fn from_result(dec: &DecompositionResult) -> Self {
        Self {
            residual: dec.residual,
            notes: dec.notes.clone(),
            components: dec
                .components
                .iter()
                .map(|c| ComponentJson {
                    label: c.label,
                    basis: c
                        .basis
                        .iter()
                        .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                        .collect(),
                    weights: ShiftJson::from_sequence(&c.restricted),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchSummary {
    pub target: String,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub best_margin: f64,
    pub constraint_residual: f64,
    pub violation: f64,
    pub quadratic_margin: f64,
    pub cubic_margin: f64,
    pub counterexample_found: bool,
    pub best_candidate: ShiftJson,
}

/// Outcome of replaying one failing witness.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReplay {
    pub class: String,
    pub window: Option<usize>,
    pub point: Option<(f64, f64)>,
    pub recorded_min_eigenvalue: f64,
    pub recomputed_min_eigenvalue: f64,
    pub reproduced: bool,
}

fn class_label(v: &ClassVerdict) -> String {
    match (&v.class_name, v.form) {
        (ClassName::Hyponormal, _) => "hyponormal".into(),
        (ClassName::KHyponormal { k }, Some(KHypForm::Commutator)) => {
            format!("{k}-hyponormal (commutator)")
        }
        (ClassName::KHyponormal { k }, _) => format!("{k}-hyponormal (bram-halmos)"),
        (ClassName::KEHyponormal { k }, _) => format!("{k}-hyponormal (embry)"),
        (ClassName::TwoHyponormalBlocks, _) => "2-hyponormal blocks".into(),
        (ClassName::Quadratic, _) => "quadratically hyponormal".into(),
        (ClassName::Cubic, _) => "cubically hyponormal".into(),
    }
}

pub fn verdict_line(v: &ClassVerdict) -> String {
    let label = class_label(v);
    if v.passed {
        format!(
            "{label}: PASS (windows checked: {:?})",
            compress_windows(&v.windows_checked)
        )
    } else {
        let extra = match &v.report {
            Some(VerdictReport::Psd(r)) => format!("min eigenvalue {:.6e}", r.min_eigenvalue),
            Some(VerdictReport::Certification(c)) => match (&c.failure_point, &c.report) {
                (Some((s, t)), Some(r)) => format!(
                    "failure at (s, t) = ({s:.6}, {t:.6}), min eigenvalue {:.6e}",
                    r.min_eigenvalue
                ),
                _ => format!("asymptotic check failed; min margin {:.6e}", c.min_margin),
            },
            None => String::new(),
        };
        format!(
            "{label}: FAIL at window {:?} ({extra})",
            v.failing_window
        )
    }
}

fn compress_windows(w: &[usize]) -> String {
    if w.is_empty() {
        return "none".into();
    }
    if w.len() == (w[w.len() - 1] - w[0] + 1) {
        format!("{}..={}", w[0], w[w.len() - 1])
    } else {
        format!("{w:?}")
    }
}

/// Recompute the minimum eigenvalue behind every failing verdict of a
/// report, against the same input, and compare within `1e-10`.
pub fn replay_witnesses(
    report: &RunReport,
    w: &WeightSequence,
    tol: &Tolerances,
) -> Vec<WitnessReplay> {
    let mut out = Vec::new();
    for v in &report.verdicts {
        if v.passed {
            continue;
        }
        let recomputed = match (&v.class_name, &v.report) {
            (ClassName::Hyponormal, Some(VerdictReport::Psd(_))) => {
                v.failing_window.map(|n| {
                    let a_n = w.weight_matrix(n as i64).unwrap();
                    let a_next = w.weight_matrix(n as i64 + 1).unwrap();
                    let diff = shiftlab_core::linalg::HermitianMatrix::symmetrize(
                        &a_next * &a_next - &a_n * &a_n,
                    );
                    psd_check(&diff, tol.psd_tol).min_eigenvalue
                })
            }
            (ClassName::KHyponormal { k } | ClassName::KEHyponormal { k }, Some(VerdictReport::Psd(_))) => {
                let form = v.form.unwrap_or(KHypForm::BramHalmos);
                v.failing_window.and_then(|m| {
                    assemble_k_hyp_window(w, *k, form, m)
                        .ok()
                        .map(|mat| psd_check(&mat, tol.psd_tol).min_eigenvalue)
                })
            }
            (ClassName::TwoHyponormalBlocks, Some(VerdictReport::Psd(_))) => {
                v.failing_window.and_then(|n| {
                    assemble_two_hyp_block(w, n)
                        .ok()
                        .map(|mat| psd_check(&mat, tol.psd_tol).min_eigenvalue)
                })
            }
            (ClassName::Quadratic, Some(VerdictReport::Certification(c))) => {
                match (v.failing_window, c.failure_point) {
                    (Some(n_max), Some((s, t))) => assemble_quadratic_family(w, n_max, tol.herm_tol)
                        .ok()
                        .and_then(|f| f.eval_hermitian(s, t, tol.herm_tol).ok())
                        .map(|m| psd_check(&m, tol.psd_tol).min_eigenvalue),
                    _ => None,
                }
            }
            (ClassName::Cubic, Some(VerdictReport::Certification(c))) => {
                match (v.failing_window, c.failure_point) {
                    (Some(n_max), Some((s, t))) => assemble_cubic_family(w, n_max, tol.herm_tol)
                        .ok()
                        .and_then(|f| f.eval_hermitian(s, t, tol.herm_tol).ok())
                        .map(|m| psd_check(&m, tol.psd_tol).min_eigenvalue),
                    _ => None,
                }
            }
            _ => None,
        };

        let recorded = match &v.report {
            Some(VerdictReport::Psd(r)) => r.min_eigenvalue,
            Some(VerdictReport::Certification(c)) => {
                c.report.as_ref().map(|r| r.min_eigenvalue).unwrap_or(f64::NAN)
            }
            None => f64::NAN,
        };
        let point = match &v.report {
            Some(VerdictReport::Certification(c)) => c.failure_point,
            _ => None,
        };
        let recomputed = recomputed.unwrap_or(f64::NAN);
        out.push(WitnessReplay {
            class: class_label(v),
            window: v.failing_window,
            point,
            recorded_min_eigenvalue: recorded,
            recomputed_min_eigenvalue: recomputed,
            reproduced: (recorded - recomputed).abs() <= 1e-10,
        });
    }
    out
}
