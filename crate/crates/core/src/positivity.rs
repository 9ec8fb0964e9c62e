//! Parametric positive-semidefiniteness certification.
//!
//! The quadratic criterion asks whether the tridiagonal family `M_n(λ)` is
//! PSD for every complex λ; conjugating by the diagonal block unitary
//! `diag(I, e^{iθ}I, e^{2iθ}I, …)` multiplies the off-diagonal band by a
//! unimodular phase while the diagonal depends only on `|λ|²`, so it
//! suffices to certify real `s = |λ| ≥ 0`. The cubic (pentadiagonal) family
//! is certified over real `(s, t) ∈ [0, s_max] × [−t_max, t_max]`; negative
//! t is included because the `st` monomial breaks the sign symmetry.
//! Whether complex parameters beyond this real reduction can matter for the
//! cubic case is unresolved; the verdict string says "grid+asymptotic" and
//! is numerical evidence, not proof.
//!
//! The sweep is a uniform grid per axis augmented with a geometric ladder
//! near zero (violation pockets for near-flat shifts sit at small
//! parameters, far below the uniform spacing), followed by an iterative
//! local zoom around the minimizing cell.
//!
//! For scalar (d = 1) shifts the classical alternative is the symbolic
//! determinant recursion for the tridiagonal family; it is deliberately out
//! of scope here — the grid certification treats d = 1 and d > 1 uniformly.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{psd_check, BlockMatrix, HermitianMatrix, PsdReport};
use crate::shift::{verifiable_windows, window_product, CriterionKind, WeightSequence};
use crate::{C64, CMatrix};

/// Monomial `s^p t^q`, keyed by the exponent pair.
pub type Monomial = (u32, u32);

/// Grid specification for a certification sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_axis: usize,
    pub s_max: f64,
    pub t_max: f64,
    /// Rounds of local zoom refinement around the minimizing cell.
    #[serde(default = "default_zoom")]
    pub zoom_rounds: usize,
}

fn default_zoom() -> usize {
    12
}

impl GridSpec {
    /// Default bounds for a weight sequence: `s_max = t_max =
    /// 4·(1 + max‖A_n‖₂)²`; beyond that scale the leading blocks dominate
    /// and the asymptotic check covers the tail.
    pub fn for_weights(w: &WeightSequence, points_per_axis: usize) -> Self {
        let bound = 4.0 * (1.0 + w.max_weight_norm()).powi(2);
        Self {
            points_per_axis,
            s_max: bound,
            t_max: bound,
            zoom_rounds: default_zoom(),
        }
    }

    pub fn with_bounds(points_per_axis: usize, s_max: f64, t_max: f64) -> Self {
        Self {
            points_per_axis,
            s_max,
            t_max,
            zoom_rounds: default_zoom(),
        }
    }

    pub fn with_zoom(mut self, zoom_rounds: usize) -> Self {
        self.zoom_rounds = zoom_rounds;
        self
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points_per_axis: 64,
            s_max: 4.0,
            t_max: 4.0,
            zoom_rounds: default_zoom(),
        }
    }
}

/// A matrix family polynomial in one real parameter `s` (arity 1) or two
/// real parameters `(s, t)` (arity 2): `F(s,t) = Σ C_{p,q} s^p t^q`.
/// Every coefficient matrix is Hermitian, so evaluations at real parameters
/// are Hermitian; this is validated at three sample points at construction.
#[derive(Debug, Clone)]
pub struct ParametricFamily {
    arity: u8,
    total_dim: usize,
    coeffs: BTreeMap<Monomial, CMatrix>,
}

impl ParametricFamily {
    pub fn new(
        arity: u8,
        coefficient_blocks: BTreeMap<Monomial, BlockMatrix>,
        herm_tol: f64,
    ) -> Result<Self, Error> {
        assert!(arity == 1 || arity == 2, "arity must be 1 or 2");
        if coefficient_blocks.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let total_dim = coefficient_blocks.values().next().unwrap().total_dim();
        let coeffs: BTreeMap<Monomial, CMatrix> = coefficient_blocks
            .into_iter()
            .map(|(m, b)| (m, b.assemble()))
            .collect();
        let fam = Self {
            arity,
            total_dim,
            coeffs,
        };
        // Construction invariant: Hermitian at three sample points.
        for &(s, t) in &[(0.37, -0.61), (1.13, 0.29), (2.71, 1.41)] {
            let t = if arity == 1 { 0.0 } else { t };
            fam.eval_hermitian(s, t, herm_tol)?;
        }
        Ok(fam)
    }

    pub fn arity(&self) -> u8 {
        self.arity
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn coefficient(&self, m: Monomial) -> Option<&CMatrix> {
        self.coeffs.get(&m)
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn eval(&self, s: f64, t: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.total_dim, self.total_dim);
        for (&(p, q), c) in &self.coeffs {
            let w = s.powi(p as i32) * t.powi(q as i32);
            if w != 0.0 {
                out += c * C64::new(w, 0.0);
            }
        }
        out
    }

    pub fn eval_hermitian(&self, s: f64, t: f64, herm_tol: f64) -> Result<HermitianMatrix, Error> {
        HermitianMatrix::new(self.eval(s, t), herm_tol).map_err(|e| Error::NonHermitianEvaluation {
            s,
            t,
            detail: e.to_string(),
        })
    }

    /// Top-total-degree form along the direction `(cos θ, sin θ)`; this is
    /// what dominates as the parameters go to infinity along that ray.
    fn leading_form(&self, theta: f64) -> CMatrix {
        let deg = self.coeffs.keys().map(|&(p, q)| p + q).max().unwrap_or(0);
        let (c, s) = (theta.cos(), theta.sin());
        let mut out = CMatrix::zeros(self.total_dim, self.total_dim);
        for (&(p, q), m) in &self.coeffs {
            if p + q == deg {
                let w = c.powi(p as i32) * s.powi(q as i32);
                if w != 0.0 {
                    out += m * C64::new(w, 0.0);
                }
            }
        }
        out
    }
}

/// Outcome of a certification sweep.
///
/// `certified_nonnegative` is grid evidence, not proof; the `grid_spec`
/// string records exactly what was examined. On failure, re-evaluating the
/// family at `failure_point` reproduces `report.min_eigenvalue`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationResult {
    pub certified_nonnegative: bool,
    pub failure_point: Option<(f64, f64)>,
    pub report: Option<PsdReport>,
    pub grid_spec: String,
    pub asymptotic_ok: bool,
    /// Smallest relative margin `λ_min/(1 + ‖M‖₂)` seen over the sweep, with
    /// the point attaining it (equals `failure_point` when negative enough).
    pub min_margin: f64,
    pub min_point: (f64, f64),
    pub points_evaluated: usize,
}

fn axis_points(max: f64, n: usize, symmetric: bool) -> Vec<f64> {
    let mut pts = Vec::new();
    let lo = if symmetric { -max } else { 0.0 };
    let h = (max - lo) / (n - 1) as f64;
    for i in 0..n {
        pts.push(lo + h * i as f64);
    }
    // Geometric ladder near zero: near-flat violation pockets live at small
    // parameters, far inside the first uniform cell.
    for j in 1..=8 {
        let v = h / f64::powi(2.0, j);
        pts.push(v);
        if symmetric {
            pts.push(-v);
        }
    }
    if symmetric {
        pts.push(0.0);
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

/// Certify `F(s, t) ⪰ 0` over the grid (and asymptotically along rays).
///
/// The verdict is false as soon as any examined point has
/// `λ_min < −psd_tol·(1 + ‖F(point)‖₂)` or the leading form fails PSD.
pub fn certify_family(
    family: &ParametricFamily,
    grid: &GridSpec,
    psd_tol: f64,
) -> Result<CertificationResult, Error> {
    assert!(grid.points_per_axis >= 8, "grid counts must be >= 8");
    assert!(grid.s_max > 0.0 && grid.t_max > 0.0, "grid bounds must be positive");
    let herm_tol = 1e-9;

    // Asymptotic check on the top-degree form.
    let rays: Vec<f64> = if family.arity() == 1 {
        vec![0.0]
    } else {
        (0..17)
            .map(|i| -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / 16.0)
            .collect()
    };
    let asymptotic_ok = rays.iter().all(|&theta| {
        let form = HermitianMatrix::symmetrize(family.leading_form(theta));
        psd_check(&form, psd_tol).is_psd
    });

    let s_points = axis_points(grid.s_max, grid.points_per_axis, false);
    let t_points = if family.arity() == 1 {
        vec![0.0]
    } else {
        axis_points(grid.t_max, grid.points_per_axis, true)
    };

    let points: Vec<(f64, f64)> = s_points
        .iter()
        .flat_map(|&s| t_points.iter().map(move |&t| (s, t)))
        .collect();

    // λ_min alone is enough during the sweep; the full witness report is
    // produced once at the worst point. Deterministic merge: relative margin
    // first, then the point's index.
    let evaluated: Result<Vec<(f64, f64)>, Error> = points
        .par_iter()
        .map(|&(s, t)| {
            let m = family.eval_hermitian(s, t, herm_tol)?;
            Ok(min_eig_and_scale(&m))
        })
        .collect();
    let evaluated = evaluated?;
    let mut points_evaluated = points.len();

    let mut best_idx = 0;
    let mut best_margin = f64::INFINITY;
    for (i, &(lmin, scale)) in evaluated.iter().enumerate() {
        let margin = lmin / scale;
        if margin < best_margin {
            best_margin = margin;
            best_idx = i;
        }
    }

    // Local refinement: iterative zoom around the minimizing cell. Skipped
    // when the sweep is already decisively negative (the verdict is settled
    // and the sweep argmin is a solid witness); run whenever the margin is
    // anywhere near the boundary, where sub-grid pockets hide.
    let zoom_rounds = if best_margin < -1e-3 { 0 } else { grid.zoom_rounds };
    let h_s = grid.s_max / (grid.points_per_axis - 1) as f64;
    let h_t = 2.0 * grid.t_max / (grid.points_per_axis - 1) as f64;
    let (mut rs, mut rt) = (h_s, h_t);
    let mut center = points[best_idx];
    for _round in 0..zoom_rounds {
        let steps = 5;
        let mut local: Vec<(f64, f64)> = Vec::new();
        for i in 0..steps {
            let s = (center.0 - rs + 2.0 * rs * i as f64 / (steps - 1) as f64)
                .clamp(0.0, grid.s_max);
            if family.arity() == 1 {
                local.push((s, 0.0));
            } else {
                for j in 0..steps {
                    let t = (center.1 - rt + 2.0 * rt * j as f64 / (steps - 1) as f64)
                        .clamp(-grid.t_max, grid.t_max);
                    local.push((s, t));
                }
            }
        }
        points_evaluated += local.len();
        for (s, t) in local {
            let m = family.eval_hermitian(s, t, herm_tol)?;
            let (lmin, scale) = min_eig_and_scale(&m);
            let margin = lmin / scale;
            if margin < best_margin {
                best_margin = margin;
                center = (s, t);
            }
        }
        rs /= 2.0;
        rt /= 2.0;
    }
    let min_point = center;

    let worst = family.eval_hermitian(min_point.0, min_point.1, herm_tol)?;
    let worst_report = psd_check(&worst, psd_tol);
    let grid_failed = !worst_report.is_psd;

    let certified = asymptotic_ok && !grid_failed;
    let grid_spec = format!(
        "uniform {npts} pts/axis on s∈[0,{smax:.6e}]{taxis} + per-axis geometric ladder (spacing·2^-1..2^-8) + 12-round local zoom; asymptotic top-degree form on {nrays} ray(s); verdict {label}",
        npts = grid.points_per_axis,
        smax = grid.s_max,
        taxis = if family.arity() == 2 {
            format!(", t∈[-{0:.6e},{0:.6e}]", grid.t_max)
        } else {
            String::new()
        },
        nrays = rays.len(),
        label = if certified { "certified (grid+asymptotic)" } else { "not certified" },
    );

    Ok(CertificationResult {
        certified_nonnegative: certified,
        failure_point: if grid_failed { Some(min_point) } else { None },
        report: Some(worst_report),
        grid_spec,
        asymptotic_ok,
        min_margin: best_margin,
        min_point,
        points_evaluated,
    })
}

fn min_eig_and_scale(m: &HermitianMatrix) -> (f64, f64) {
    let eig = m.matrix().clone().symmetric_eigenvalues();
    let mut min_val = f64::INFINITY;
    let mut max_abs = 0.0f64;
    for l in eig.iter() {
        min_val = min_val.min(*l);
        max_abs = max_abs.max(l.abs());
    }
    (min_val, 1.0 + max_abs)
}

/// Coefficients of `f(x) = a0 x³ + a1 x² + a2 x + a3`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl CubicCoeffs {
    pub fn new(a0: f64, a1: f64, a2: f64, a3: f64) -> Self {
        Self { a0, a1, a2, a3 }
    }

    /// `δ₂ = 4a0a2³ + 4a1³a3 + 27a0²a3² − a1²a2² − 18a0a1a2a3`
    /// (the negated discriminant; ≥ 0 means at most one real root).
    pub fn delta2(&self) -> f64 {
        let Self { a0, a1, a2, a3 } = *self;
        4.0 * a0 * a2.powi(3) + 4.0 * a1.powi(3) * a3 + 27.0 * a0 * a0 * a3 * a3
            - a1 * a1 * a2 * a2
            - 18.0 * a0 * a1 * a2 * a3
    }

    fn scale(&self) -> f64 {
        let m = self
            .a0
            .abs()
            .max(self.a1.abs())
            .max(self.a2.abs())
            .max(self.a3.abs());
        (1.0 + m).powi(4)
    }
}

/// Which clause decided the half-line verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubicCase {
    /// `a0 > 0` with `a1, a2, a3 ≥ 0`.
    AllCoefficientsNonnegative,
    /// `a0 > 0`, `a3 ≥ 0`, `δ₂ ≥ 0`.
    DiscriminantNonnegative,
    /// `a0 ≈ 0`: verdict from the quadratic/linear/constant fallback.
    Degenerate,
    /// No clause applies.
    NotNonnegative,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CubicVerdict {
    pub nonneg: bool,
    pub case: CubicCase,
    pub delta2: f64,
}

/// Closed-form test for `f ≥ 0` on `[0, ∞)`.
///
/// For `a0 > 0` this is the two-clause criterion: either all lower
/// coefficients are nonnegative, or `f(0) = a3 ≥ 0` and `δ₂ ≥ 0` (at most
/// one real root, which then sits left of zero). Degenerate leading
/// coefficients fall back to the quadratic analogue.
pub fn cubic_nonneg_on_halfline(c: &CubicCoeffs, tol: f64) -> CubicVerdict {
    let delta2 = c.delta2();
    if c.a0.abs() <= tol {
        let nonneg = quadratic_nonneg_on_halfline(c.a1, c.a2, c.a3, tol);
        return CubicVerdict {
            nonneg,
            case: if nonneg {
                CubicCase::Degenerate
            } else {
                CubicCase::NotNonnegative
            },
            delta2,
        };
    }
    if c.a0 < 0.0 {
        // f → −∞ as x → ∞.
        return CubicVerdict {
            nonneg: false,
            case: CubicCase::NotNonnegative,
            delta2,
        };
    }
    if c.a1 >= -tol && c.a2 >= -tol && c.a3 >= -tol {
        return CubicVerdict {
            nonneg: true,
            case: CubicCase::AllCoefficientsNonnegative,
            delta2,
        };
    }
    if c.a3 >= -tol && delta2 >= -tol * c.scale() {
        return CubicVerdict {
            nonneg: true,
            case: CubicCase::DiscriminantNonnegative,
            delta2,
        };
    }
    CubicVerdict {
        nonneg: false,
        case: CubicCase::NotNonnegative,
        delta2,
    }
}

fn quadratic_nonneg_on_halfline(a: f64, b: f64, c: f64, tol: f64) -> bool {
    if a.abs() <= tol {
        if b.abs() <= tol {
            return c >= -tol;
        }
        return b > 0.0 && c >= -tol;
    }
    if a < 0.0 {
        return false;
    }
    if c < -tol {
        return false;
    }
    // Vertex at x* = −b/(2a); only binding when it lands inside the half-line.
    if b >= -tol {
        return true;
    }
    let scale = (1.0 + a.abs().max(b.abs()).max(c.abs())).powi(2);
    4.0 * a * c - b * b >= -tol * scale
}

/// Tridiagonal quadratic family for the truncation `n = 0..n_max`:
/// diagonal `D_n = A_n² − A_{n−1}² + s²(A_n A_{n+1}² A_n − A_{n−1} A_{n−2}² A_{n−1})`,
/// sub-diagonal `R_n = s(A_{n+1}² A_n − A_n A_{n−1}²)`, negative indices zero.
pub fn assemble_quadratic_family(
    w: &WeightSequence,
    n_max: usize,
    herm_tol: f64,
) -> Result<ParametricFamily, Error> {
    check_window(w, n_max, CriterionKind::Quadratic)?;
    let d = w.dim();
    let rows = n_max + 1;

    let mut c00 = BlockMatrix::zeros(rows, rows, d, true);
    let mut c10 = BlockMatrix::zeros(rows, rows, d, true);
    let mut c20 = BlockMatrix::zeros(rows, rows, d, true);

    for n in 0..=n_max {
        let ni = n as i64;
        let a_n = w.weight_matrix(ni)?;
        let a_prev = w.weight_matrix(ni - 1)?;
        c00.set_block(n, n, &a_n * &a_n - &a_prev * &a_prev);
        let fwd = window_product(w, ni, 1)?.value.into_matrix();
        let bwd = window_product(w, ni - 1, -1)?.value.into_matrix();
        c20.set_block(n, n, fwd - bwd);
        if n < n_max {
            let a_next = w.weight_matrix(ni + 1)?;
            let r = &a_next * &a_next * &a_n - &a_n * &a_prev * &a_prev;
            c10.set_block(n + 1, n, r.clone());
            c10.set_block(n, n + 1, r.adjoint());
        }
    }

    let mut coeffs = BTreeMap::new();
    coeffs.insert((0, 0), c00);
    coeffs.insert((1, 0), c10);
    coeffs.insert((2, 0), c20);
    ParametricFamily::new(1, coeffs, herm_tol)
}

/// Pentadiagonal cubic family for the truncation `n = 0..n_max`:
///
/// * `D_n = A_n² − A_{n−1}² + s²(A(n,1) − A(n−1,−1)) + t²(A(n,2) − A(n−1,−2))`
/// * `R_n = s(A_{n+1}² A_n − A_n A_{n−1}²) + st(A(n+1,1) A_n − A_n A(n−1,−1))`
/// * `S_n = t(A_{n+2}² A_{n+1} A_n − A_{n+1} A_n A_{n−1}²)`
///
/// with `R_n` on the first sub-diagonal, `S_n` on the second, adjoints above.
pub fn assemble_cubic_family(
    w: &WeightSequence,
    n_max: usize,
    herm_tol: f64,
) -> Result<ParametricFamily, Error> {
    check_window(w, n_max, CriterionKind::Cubic)?;
    let d = w.dim();
    let rows = n_max + 1;

    let mut c00 = BlockMatrix::zeros(rows, rows, d, true);
    let mut c10 = BlockMatrix::zeros(rows, rows, d, true);
    let mut c20 = BlockMatrix::zeros(rows, rows, d, true);
    let mut c01 = BlockMatrix::zeros(rows, rows, d, true);
    let mut c11 = BlockMatrix::zeros(rows, rows, d, true);
    let mut c02 = BlockMatrix::zeros(rows, rows, d, true);

    for n in 0..=n_max {
        let ni = n as i64;
        let a_n = w.weight_matrix(ni)?;
        let a_prev = w.weight_matrix(ni - 1)?;
        c00.set_block(n, n, &a_n * &a_n - &a_prev * &a_prev);
        let fwd1 = window_product(w, ni, 1)?.value.into_matrix();
        let bwd1 = window_product(w, ni - 1, -1)?.value.into_matrix();
        c20.set_block(n, n, &fwd1 - &bwd1);
        let fwd2 = window_product(w, ni, 2)?.value.into_matrix();
        let bwd2 = window_product(w, ni - 1, -2)?.value.into_matrix();
        c02.set_block(n, n, fwd2 - bwd2);

        if n < n_max {
            let a_next = w.weight_matrix(ni + 1)?;
            let r_s = &a_next * &a_next * &a_n - &a_n * &a_prev * &a_prev;
            c10.set_block(n + 1, n, r_s.clone());
            c10.set_block(n, n + 1, r_s.adjoint());

            let next_fwd = window_product(w, ni + 1, 1)?.value.into_matrix();
            let r_st = &next_fwd * &a_n - &a_n * &bwd1;
            c11.set_block(n + 1, n, r_st.clone());
            c11.set_block(n, n + 1, r_st.adjoint());
        }
        if n + 1 < n_max {
            let a_next = w.weight_matrix(ni + 1)?;
            let a_next2 = w.weight_matrix(ni + 2)?;
            let s_t = &a_next2 * &a_next2 * &a_next * &a_n - &a_next * &a_n * &a_prev * &a_prev;
            c01.set_block(n + 2, n, s_t.clone());
            c01.set_block(n, n + 2, s_t.adjoint());
        }
    }

    let mut coeffs = BTreeMap::new();
    coeffs.insert((0, 0), c00);
    coeffs.insert((1, 0), c10);
    coeffs.insert((2, 0), c20);
    coeffs.insert((0, 1), c01);
    coeffs.insert((1, 1), c11);
    coeffs.insert((0, 2), c02);
    ParametricFamily::new(2, coeffs, herm_tol)
}

fn check_window(w: &WeightSequence, n_max: usize, kind: CriterionKind) -> Result<(), Error> {
    let windows = verifiable_windows(w, kind);
    if !windows.contains(&n_max) {
        return Err(Error::InsufficientTruncation {
            criterion: format!("{} at n_max = {n_max}", kind.name()),
            have: w.len(),
            need: match kind {
                CriterionKind::Quadratic => n_max + 2,
                _ => n_max + 3,
            },
        });
    }
    Ok(())
}
