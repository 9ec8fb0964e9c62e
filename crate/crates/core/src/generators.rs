//! Example and counterexample factories, plus the randomized search
//! harnesses for the open propagation questions.
//!
//! Ground-truth subnormal instances are built exclusively as unitary
//! conjugates of direct sums of scalar shifts with finitely atomic
//! representing measures (`γ_k = Σ w_i t_i^k`); no operator-valued moment
//! completion is attempted. That guarantees the labels the test suites rely
//! on. The searches are plain randomized coordinate perturbation with
//! geometric step decay, reproducible from the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hyponormality::assemble_two_hyp_block;
use crate::linalg::{operator_norm, relative_margin, HermitianMatrix};
use crate::positivity::{assemble_cubic_family, assemble_quadratic_family, certify_family, GridSpec};
use crate::shift::{TailPolicy, WeightSequence};
use crate::tol::Tolerances;
use crate::{C64, CMatrix, CVector};

/// Finitely atomic positive measure on `[0, ∞)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomicMeasure {
    /// (location t_i ≥ 0, mass w_i > 0), locations distinct.
    pub atoms: Vec<(f64, f64)>,
    pub normalized: bool,
}

impl AtomicMeasure {
    pub fn new(mut atoms: Vec<(f64, f64)>, normalize: bool) -> Result<Self, Error> {
        if atoms.is_empty() {
            return Err(Error::DegenerateMeasure("no atoms".into()));
        }
        for &(t, w) in &atoms {
            if t < 0.0 || w <= 0.0 || !t.is_finite() || !w.is_finite() {
                return Err(Error::DegenerateMeasure(format!(
                    "atom ({t}, {w}) must have t >= 0 and mass > 0"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if atoms.windows(2).any(|p| (p[0].0 - p[1].0).abs() < 1e-12) {
            return Err(Error::DegenerateMeasure("atoms must be distinct".into()));
        }
        if normalize {
            let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
            for a in &mut atoms {
                a.1 /= total;
            }
        }
        Ok(Self {
            atoms,
            normalized: normalize,
        })
    }

    /// Power moment `γ_k = Σ w_i t_i^k`.
    pub fn moment(&self, k: usize) -> f64 {
        self.atoms.iter().map(|&(t, w)| w * t.powi(k as i32)).sum()
    }
}

/// Scalar shift with `α_n = √(γ_{n+1}/γ_n)`; subnormal by construction
/// (the measure represents its moments).
pub fn berger_weights(mu: &AtomicMeasure, n: usize) -> Result<WeightSequence, Error> {
    if !mu.atoms.iter().any(|&(t, _)| t > 0.0) {
        return Err(Error::DegenerateMeasure(
            "needs at least one atom with t > 0 (otherwise γ_1 = 0)".into(),
        ));
    }
    let alphas: Vec<f64> = (0..n)
        .map(|k| (mu.moment(k + 1) / mu.moment(k)).sqrt())
        .collect();
    WeightSequence::from_scalars(&alphas, TailPolicy::None, &Tolerances::default())
}

/// Block-diagonal direct sum of equally long weight sequences.
pub fn direct_sum(shifts: &[WeightSequence]) -> Result<WeightSequence, Error> {
    if shifts.is_empty() {
        return Err(Error::InvalidInput("direct sum of zero shifts".into()));
    }
    let n = shifts[0].len();
    for s in shifts {
        if s.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.len(),
                context: "direct summands must have equal length".into(),
            });
        }
    }
    let total: usize = shifts.iter().map(|s| s.dim()).sum();
    let mut weights = Vec::with_capacity(n);
    for idx in 0..n {
        let mut block = CMatrix::zeros(total, total);
        let mut offset = 0;
        for s in shifts {
            let a = s.weight(idx).matrix();
            for i in 0..s.dim() {
                for j in 0..s.dim() {
                    block[(offset + i, offset + j)] = a[(i, j)];
                }
            }
            offset += s.dim();
        }
        weights.push(HermitianMatrix::symmetrize(block));
    }
    WeightSequence::new(weights, shifts[0].tail(), &Tolerances::default())
}

/// Conjugate every weight by a fixed unitary: `A_n ↦ U A_n U*`. All class
/// verdicts are invariant under this.
pub fn conjugate(w: &WeightSequence, u: &CMatrix) -> Result<WeightSequence, Error> {
    let d = w.dim();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: u.nrows(),
            context: "conjugating unitary".into(),
        });
    }
    let deviation = operator_norm(&(u.adjoint() * u - CMatrix::identity(d, d)));
    if deviation > 1e-10 {
        return Err(Error::NotUnitary { deviation });
    }
    w.map_weights(|a| HermitianMatrix::symmetrize(u * a.matrix() * u.adjoint()))
}

/// Haar-ish random unitary via QR of a complex Gaussian-like matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    g.qr().q()
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    (&g + g.adjoint()) * C64::new(0.5 * scale, 0.0)
}

/// Random PSD bump with `λ_min ≥ floor`.
fn random_psd_bump(rng: &mut ChaCha8Rng, d: usize, floor: f64, spread: f64) -> CMatrix {
    let h = random_hermitian(rng, d, spread);
    let min = HermitianMatrix::symmetrize(h.clone()).min_eigenvalue();
    h + CMatrix::identity(d, d) * C64::new(floor + min.abs(), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomProfile {
    /// Strictly increasing: `λ_min(A_{n+1}² − A_n²) > 0.01`.
    Increasing,
    /// Increasing with `A_{k+1} = A_k` forced exactly, neighbors bumped
    /// decisively away from the pair.
    EqualPair(usize),
    /// `A_1 = A_0` forced exactly, strictly increasing afterwards.
    EqualFromStart,
}

/// Reproducible random shift. The same seed yields the same sequence.
pub fn random_shift(seed: u64, dim: usize, n: usize, profile: RandomProfile) -> WeightSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair = match profile {
        RandomProfile::EqualPair(k) => {
            assert!(k + 1 < n, "equal pair ({k},{}) must fit inside n={n}", k + 1);
            Some(k)
        }
        RandomProfile::EqualFromStart => Some(0),
        RandomProfile::Increasing => None,
    };

    // A_0: random PD with spectrum around 1.
    let base = random_hermitian(&mut rng, dim, 0.2);
    let min = HermitianMatrix::symmetrize(base.clone()).min_eigenvalue();
    let a0 = base + CMatrix::identity(dim, dim) * C64::new(0.8 + min.abs(), 0.0);
    let mut squares: Vec<CMatrix> = vec![&a0 * &a0];

    for idx in 1..n {
        let prev = squares.last().unwrap().clone();
        if pair == Some(idx - 1) {
            squares.push(prev);
            continue;
        }
        // Neighbors of an engineered pair get a decisive gap so that the
        // non-flatness is far outside every tolerance band.
        let decisive = pair.is_some_and(|k| idx == k || idx == k + 2);
        let floor = if decisive { 0.3 } else { 0.05 };
        let spread = if decisive { 0.3 } else { 0.15 };
        let bump = random_psd_bump(&mut rng, dim, floor, spread);
        squares.push(prev + bump);
    }

    let weights: Vec<HermitianMatrix> = squares
        .into_iter()
        .map(|sq| HermitianMatrix::symmetrize(sq).sqrt_psd())
        .collect();
    WeightSequence::new(weights, TailPolicy::None, &Tolerances::default())
        .expect("construction keeps weights positive definite")
}

/// What the randomized search is hunting for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchTarget {
    /// A cubically hyponormal shift with a locally flat vector at a pair
    /// (k, k+1), k ≥ 2, whose backward propagation to A_1 fails.
    ConjectureBackwardCubic,
    /// A 2-hyponormal shift with A_0 = A_1 that is not flat.
    TwoHypA0EqA1Nonflat,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub target: SearchTarget,
    pub dim: usize,
    pub n: usize,
    pub iterations: usize,
    /// Initial perturbation scale; decays geometrically.
    pub step_scale: f64,
    pub seed: u64,
    /// Restarts with independent RNG streams (seed + restart index).
    pub restarts: usize,
    /// Grid resolution for the margin evaluation.
    pub grid_points: usize,
}

impl SearchConfig {
    pub fn new(target: SearchTarget, dim: usize, n: usize, iterations: usize, seed: u64) -> Self {
        Self {
            target,
            dim,
            n,
            iterations,
            step_scale: 0.2,
            seed,
            restarts: 1,
            grid_points: 12,
        }
    }
}

/// One candidate evaluation, as written to the JSON-lines trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub iteration: usize,
    pub margin: f64,
    pub constraint_residual: f64,
    pub violation: f64,
    pub accepted: bool,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: WeightSequence,
    pub best_margin: f64,
    pub constraint_residual: f64,
    pub violation: f64,
    /// Margin of the best candidate under the quadratic tester (reported for
    /// cross-scoring; the 2-hyponormal target expects these to go positive
    /// while the cubic tester stays negative).
    pub quadratic_margin: f64,
    pub cubic_margin: f64,
    /// margin > 10·psd_tol with the constraints honored: a numerical
    /// counterexample candidate, to be flagged loudly, never accepted
    /// silently.
    pub counterexample_found: bool,
    pub trace: Vec<TraceEntry>,
}

struct Candidate {
    weights: Vec<HermitianMatrix>,
}

impl Candidate {
    fn to_sequence(&self) -> Option<WeightSequence> {
        WeightSequence::new(self.weights.clone(), TailPolicy::None, &Tolerances::default()).ok()
    }
}

/// Force `A_{k+1} x = A_k x` for `x = e_0` by overwriting the first row and
/// column of `A_{k+1}`; returns None when the result is no longer positive
/// definite.
fn enforce_pair_on_axis(weights: &mut [HermitianMatrix], k: usize) -> Option<()> {
    let d = weights[0].dim();
    let y = weights[k].matrix().column(0).into_owned();
    let mut m = weights[k + 1].matrix().clone();
    for i in 0..d {
        m[(i, 0)] = y[i];
        m[(0, i)] = y[i].conj();
    }
    m[(0, 0)] = C64::new(y[0].re, 0.0);
    let h = HermitianMatrix::symmetrize(m);
    if h.min_eigenvalue() < 1e-6 {
        return None;
    }
    weights[k + 1] = h;
    Some(())
}

fn margin_for_target(
    target: SearchTarget,
    w: &WeightSequence,
    grid_points: usize,
    tol: &Tolerances,
) -> Option<f64> {
    match target {
        SearchTarget::TwoHypA0EqA1Nonflat => {
            let windows = crate::shift::verifiable_windows(w, crate::shift::CriterionKind::TwoHyponormalBlocks);
            let mut worst = f64::INFINITY;
            for n in windows {
                let block = assemble_two_hyp_block(w, n).ok()?;
                worst = worst.min(relative_margin(&block));
            }
            Some(worst)
        }
        SearchTarget::ConjectureBackwardCubic => {
            // "Cubically hyponormal as far as verifiable" means both the
            // pentadiagonal family at its largest truncation and the
            // (implied) quadratic family, which reaches one index further.
            // Without the quadratic component, shallow truncations admit
            // fake positive margins that already fail the quadratic test.
            let n_max = w.len().checked_sub(3)?;
            let family = assemble_cubic_family(w, n_max, tol.herm_tol).ok()?;
            let grid = GridSpec::for_weights(w, grid_points).with_zoom(4);
            let cubic = certify_family(&family, &grid, tol.psd_tol).ok()?.min_margin;
            let quad = quadratic_margin(w, grid_points, tol);
            Some(cubic.min(quad))
        }
    }
}

fn quadratic_margin(w: &WeightSequence, grid_points: usize, tol: &Tolerances) -> f64 {
    let n_max = w.len() - 2;
    match assemble_quadratic_family(w, n_max, tol.herm_tol).and_then(|f| {
        certify_family(&f, &GridSpec::for_weights(w, grid_points).with_zoom(4), tol.psd_tol)
    }) {
        Ok(cert) => cert.min_margin,
        Err(_) => f64::NEG_INFINITY,
    }
}

fn cubic_margin(w: &WeightSequence, grid_points: usize, tol: &Tolerances) -> f64 {
    let n_max = w.len() - 3;
    match assemble_cubic_family(w, n_max, tol.herm_tol).and_then(|f| {
        certify_family(&f, &GridSpec::for_weights(w, grid_points).with_zoom(4), tol.psd_tol)
    }) {
        Ok(cert) => cert.min_margin,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Constraint data for a candidate: (residual of the forced equality,
/// violation measure that makes a positive margin interesting).
fn constraint_and_violation(target: SearchTarget, w: &WeightSequence) -> (f64, f64) {
    match target {
        SearchTarget::TwoHypA0EqA1Nonflat => {
            let residual = operator_norm(&(w.weight(0).matrix() - w.weight(1).matrix()));
            // Non-flatness: some later weight far from A_1.
            let violation = (2..w.len())
                .map(|n| operator_norm(&(w.weight(n).matrix() - w.weight(1).matrix())))
                .fold(0.0, f64::max);
            (residual, violation)
        }
        SearchTarget::ConjectureBackwardCubic => {
            let k = 2;
            let x = CVector::from_fn(w.dim(), |i, _| {
                if i == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
            });
            let residual = (w.weight(k).matrix() * &x - w.weight(k + 1).matrix() * &x).norm();
            // Backward violation: A_1 x differs from A_2 x.
            let violation = (w.weight(1).matrix() * &x - w.weight(k).matrix() * &x).norm();
            (residual, violation)
        }
    }
}

fn initial_candidate(rng: &mut ChaCha8Rng, config: &SearchConfig) -> Candidate {
    let seed_shift = random_shift(rng.gen(), config.dim, config.n, RandomProfile::Increasing);
    let mut weights = seed_shift.weights().to_vec();
    match config.target {
        SearchTarget::TwoHypA0EqA1Nonflat => {
            weights[1] = weights[0].clone();
        }
        SearchTarget::ConjectureBackwardCubic => {
            let _ = enforce_pair_on_axis(&mut weights, 2);
        }
    }
    Candidate { weights }
}

fn perturb(rng: &mut ChaCha8Rng, cand: &Candidate, step: f64, target: SearchTarget) -> Candidate {
    let d = cand.weights[0].dim();
    let mut weights = cand.weights.clone();
    let idx = rng.gen_range(0..weights.len());
    let h = random_hermitian(rng, d, step);
    let perturbed = HermitianMatrix::symmetrize(weights[idx].matrix() + h);
    // Keep weights safely positive definite.
    if perturbed.min_eigenvalue() > 1e-3 {
        weights[idx] = perturbed;
    }
    match target {
        SearchTarget::TwoHypA0EqA1Nonflat => {
            // Tie the pair back together no matter which side moved.
            if idx <= 1 {
                let a = weights[0].clone();
                weights[1] = a;
            }
        }
        SearchTarget::ConjectureBackwardCubic => {
            let _ = enforce_pair_on_axis(&mut weights, 2);
        }
    }
    Candidate { weights }
}

/// Randomized hill-climb maximizing the target's certification margin
/// subject to its equality constraints. Inconclusive searches return
/// `best_margin ≤ 0` with the full trace; a positive find is flagged.
pub fn search(config: &SearchConfig, tol: &Tolerances) -> SearchOutcome {
    const VIOLATION_FLOOR: f64 = 0.1;

    let restarts: Vec<(usize, SearchOutcome)> = (0..config.restarts.max(1))
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(restart as u64));
            let mut trace = Vec::new();

            let mut current = initial_candidate(&mut rng, config);
            let mut current_margin = f64::NEG_INFINITY;
            if let Some(w) = current.to_sequence() {
                let (res, viol) = constraint_and_violation(config.target, &w);
                let margin = margin_for_target(config.target, &w, config.grid_points, tol)
                    .unwrap_or(f64::NEG_INFINITY);
                current_margin = if viol >= VIOLATION_FLOOR && res <= tol.eq_tol {
                    margin
                } else {
                    f64::NEG_INFINITY
                };
                trace.push(TraceEntry {
                    restart,
                    iteration: 0,
                    margin,
                    constraint_residual: res,
                    violation: viol,
                    accepted: true,
                    seed: config.seed,
                });
            }

            let mut step = config.step_scale;
            for iteration in 1..config.iterations {
                let cand = perturb(&mut rng, &current, step, config.target);
                let (margin, res, viol, accepted) = match cand.to_sequence() {
                    Some(w) => {
                        let (res, viol) = constraint_and_violation(config.target, &w);
                        let margin = margin_for_target(config.target, &w, config.grid_points, tol)
                            .unwrap_or(f64::NEG_INFINITY);
                        // Candidates are only comparable when the equality
                        // constraint is honored and the violation is real.
                        let effective = if viol >= VIOLATION_FLOOR && res <= tol.eq_tol {
                            margin
                        } else {
                            f64::NEG_INFINITY
                        };
                        let accept = effective > current_margin;
                        if accept {
                            current = cand;
                            current_margin = effective;
                        }
                        (margin, res, viol, accept)
                    }
                    None => (f64::NEG_INFINITY, f64::INFINITY, 0.0, false),
                };
                trace.push(TraceEntry {
                    restart,
                    iteration,
                    margin,
                    constraint_residual: res,
                    violation: viol,
                    accepted,
                    seed: config.seed,
                });
                step *= 0.995;
            }

            let best = current
                .to_sequence()
                .expect("accepted candidates are valid sequences");
            let (res, viol) = constraint_and_violation(config.target, &best);
            let margin = margin_for_target(config.target, &best, config.grid_points, tol)
                .unwrap_or(f64::NEG_INFINITY);
            let quad = quadratic_margin(&best, config.grid_points, tol);
            let cubic = cubic_margin(&best, config.grid_points, tol);
            let counterexample =
                margin > 10.0 * tol.psd_tol && res <= tol.eq_tol && viol >= VIOLATION_FLOOR;
            (
                restart,
                SearchOutcome {
                    best,
                    best_margin: margin,
                    constraint_residual: res,
                    violation: viol,
                    quadratic_margin: quad,
                    cubic_margin: cubic,
                    counterexample_found: counterexample,
                    trace,
                },
            )
        })
        .collect();

    // Deterministic merge: best margin, ties broken by restart index.
    let mut merged_trace = Vec::new();
    let mut best: Option<(usize, SearchOutcome)> = None;
    for (restart, outcome) in restarts {
        let better = match &best {
            None => true,
            Some((bi, bo)) => {
                outcome.best_margin > bo.best_margin
                    || (outcome.best_margin == bo.best_margin && restart < *bi)
            }
        };
        merged_trace.push((restart, outcome.trace.clone()));
        if better {
            best = Some((restart, outcome));
        }
    }
    let (_, mut outcome) = best.expect("at least one restart");
    merged_trace.sort_by_key(|(r, _)| *r);
    outcome.trace = merged_trace.into_iter().flat_map(|(_, t)| t).collect();
    outcome
}
