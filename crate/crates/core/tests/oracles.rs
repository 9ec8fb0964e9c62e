//! Cross-oracle checks: every decision path in the library is held against
//! an independently coded route (Jacobi rotations, Schur complements, dense
//! sampling).

mod common;

use common::{complex_to_real_embedding, jacobi_min_eigenvalue, scalar_hankel_k_hyponormal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shiftlab_core::generators::{random_shift, RandomProfile};
use shiftlab_core::hyponormality::{check_k_hyponormal, KHypForm};
use shiftlab_core::linalg::{psd_check, smuljan_check, BlockMatrix, HermitianMatrix};
use shiftlab_core::positivity::{cubic_nonneg_on_halfline, CubicCoeffs};
use shiftlab_core::shift::{TailPolicy, WeightSequence};
use shiftlab_core::{C64, CMatrix, Tolerances};

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
    });
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

#[test]
fn psd_check_matches_jacobi_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..300 {
        let d = rng.gen_range(1..=5);
        let m = HermitianMatrix::symmetrize(random_hermitian(&mut rng, d, 2.0));
        let report = psd_check(&m, 1e-9);
        let oracle_min = jacobi_min_eigenvalue(&complex_to_real_embedding(m.matrix()));
        assert!(
            (report.min_eigenvalue - oracle_min).abs() <= 1e-10 * report.scale,
            "λ_min {} vs jacobi {}",
            report.min_eigenvalue,
            oracle_min
        );
    }
}

#[test]
fn psd_witness_certifies_every_failure() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut failures = 0;
    for _ in 0..400 {
        let d = rng.gen_range(2..=5);
        let m = HermitianMatrix::symmetrize(random_hermitian(&mut rng, d, 2.0));
        let r = psd_check(&m, 1e-9);
        if !r.is_psd {
            failures += 1;
            let w = r.witness();
            let quad = (m.matrix() * &w).dotc(&w).re;
            assert!(
                (quad - r.min_eigenvalue * w.norm_squared()).abs() <= 10.0 * 1e-9 * r.scale,
                "witness quadratic form {} vs λ_min {}",
                quad,
                r.min_eigenvalue
            );
        }
    }
    assert!(failures > 100, "suite should exercise plenty of failures");
}

#[test]
fn psd_check_invariant_under_unitary_congruence() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..100 {
        let d = rng.gen_range(2..=4);
        let m = HermitianMatrix::symmetrize(random_hermitian(&mut rng, d, 1.5));
        let u = shiftlab_core::generators::random_unitary(&mut rng, d);
        let conj = HermitianMatrix::symmetrize(&u * m.matrix() * u.adjoint());
        let a = psd_check(&m, 1e-9);
        let b = psd_check(&conj, 1e-9);
        // Borderline flips are possible only inside the tolerance band.
        if a.is_psd != b.is_psd {
            assert!(a.min_eigenvalue.abs() <= 10.0 * 1e-9 * a.scale);
        }
        assert!((a.min_eigenvalue - b.min_eigenvalue).abs() <= 1e-9 * a.scale);
    }
}

#[test]
fn smuljan_agrees_with_assembled_block_psd() {
    // The 2×2 Schur characterization is the independent route; the assembled
    // block matrix goes through the plain spectral check.
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut disagreements = 0;
    for trial in 0..2000 {
        let d = rng.gen_range(1..=4);
        // Mix PSD-by-construction and indefinite inputs.
        let x = if trial % 3 == 0 {
            let g = random_hermitian(&mut rng, d, 1.0);
            HermitianMatrix::symmetrize(&g * &g)
        } else {
            HermitianMatrix::symmetrize(random_hermitian(&mut rng, d, 1.0))
        };
        let z = if trial % 2 == 0 {
            let g = random_hermitian(&mut rng, d, 1.0);
            HermitianMatrix::symmetrize(&g * &g)
        } else {
            HermitianMatrix::symmetrize(random_hermitian(&mut rng, d, 1.0))
        };
        let y = if trial % 5 == 0 {
            // Force the range condition to hold: Y* = Z U.
            let u = random_hermitian(&mut rng, d, 0.7);
            (z.matrix() * u).adjoint()
        } else {
            CMatrix::from_fn(d, d, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
        };

        let s = smuljan_check(&x, &y, &z, 1e-9, 1e-9).unwrap();

        let mut blocks = BlockMatrix::zeros(2, 2, d, true);
        blocks.set_block(0, 0, x.matrix().clone());
        blocks.set_block(0, 1, y.clone());
        blocks.set_block(1, 0, y.adjoint());
        blocks.set_block(1, 1, z.matrix().clone());
        let assembled = psd_check(&blocks.to_hermitian(1e-9).unwrap(), 1e-9);

        if s.positive != assembled.is_psd {
            disagreements += 1;
            assert!(
                assembled.min_eigenvalue.abs() <= 10.0 * 1e-9 * assembled.scale,
                "disagreement outside the tolerance band: smuljan {} vs block λ_min {:.3e} (scale {:.3e})",
                s.positive,
                assembled.min_eigenvalue,
                assembled.scale
            );
        }
    }
    assert!(
        disagreements <= 5,
        "too many borderline disagreements: {disagreements}"
    );
}

#[test]
fn schur_complement_two_by_two_cross_check() {
    // For [[A, B], [B*, C]] with A positive definite: positive iff C ⪰ B* A⁻¹ B.
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..500 {
        let d = rng.gen_range(1..=3);
        let g = random_hermitian(&mut rng, d, 1.0);
        let a = HermitianMatrix::symmetrize(&g * &g + CMatrix::identity(d, d) * C64::new(0.3, 0.0));
        let c = HermitianMatrix::symmetrize(random_hermitian(&mut rng, d, 1.0));
        let b = CMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });

        let mut blocks = BlockMatrix::zeros(2, 2, d, true);
        blocks.set_block(0, 0, a.matrix().clone());
        blocks.set_block(0, 1, b.clone());
        blocks.set_block(1, 0, b.adjoint());
        blocks.set_block(1, 1, c.matrix().clone());
        let spectral = psd_check(&blocks.to_hermitian(1e-9).unwrap(), 1e-9);

        let a_inv = a.inverse();
        let schur = HermitianMatrix::symmetrize(c.matrix() - b.adjoint() * a_inv * &b);
        let schur_psd = psd_check(&schur, 1e-9);

        if spectral.is_psd != schur_psd.is_psd {
            assert!(spectral.min_eigenvalue.abs() <= 10.0 * 1e-9 * spectral.scale);
        }
    }
}

#[test]
fn cubic_halfline_vs_dense_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut boundary = 0;
    for _ in 0..20_000 {
        let c = CubicCoeffs::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        );
        let closed = cubic_nonneg_on_halfline(&c, 1e-12);

        let mut min_val = f64::INFINITY;
        for i in 0..=2000 {
            let x = 100.0 * (i as f64 / 2000.0).powi(2);
            let f = ((c.a0 * x + c.a1) * x + c.a2) * x + c.a3;
            min_val = min_val.min(f);
        }
        // Tail: degree dominates beyond the sampled range.
        let tail_ok = c.a0 > 0.0 || (c.a0.abs() < 1e-12 && c.a1 > 0.0) || min_val < 0.0;
        let sampled = min_val >= -1e-9 && tail_ok;

        if closed.nonneg != sampled {
            boundary += 1;
            assert!(
                min_val.abs() <= 1e-6,
                "disagreement away from the boundary band: {c:?} closed={} sampled={} min={min_val:.3e}",
                closed.nonneg,
                sampled
            );
        }
    }
    assert!(boundary < 200, "boundary cases should be rare: {boundary}");
}

#[test]
fn scalar_k_hyponormality_matches_hankel_jacobi() {
    // d = 1 reduction: the tester verdicts coincide with the classical
    // scalar Hankel test computed by a fully independent route.
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for trial in 0..60 {
        let n = rng.gen_range(6..=10);
        let alphas: Vec<f64> = match trial % 3 {
            0 => {
                // Subnormal-like: increasing.
                let mut v = vec![rng.gen_range(0.4..0.8)];
                for _ in 1..n {
                    let last = *v.last().unwrap();
                    v.push(last + rng.gen_range(0.01..0.2));
                }
                v
            }
            1 => (0..n).map(|_| rng.gen_range(0.3..2.0)).collect(),
            _ => {
                let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
                let k = rng.gen_range(0..n - 1);
                v[k + 1] = v[k];
                v
            }
        };
        let w = WeightSequence::from_scalars(&alphas, TailPolicy::None, &tol).unwrap();
        for k in 1..=3 {
            if alphas.len() < 2 * k {
                continue;
            }
            for form in [KHypForm::BramHalmos, KHypForm::Embry] {
                let verdict = check_k_hyponormal(&w, k, form, &tol).unwrap();
                let oracle = scalar_hankel_k_hyponormal(&alphas, k, tol.psd_tol);
                if verdict.passed != oracle {
                    // Only borderline windows may flip.
                    let report = match verdict.report {
                        Some(shiftlab_core::hyponormality::VerdictReport::Psd(ref r)) => r,
                        _ => panic!("missing report"),
                    };
                    assert!(
                        report.min_eigenvalue.abs() <= 10.0 * tol.psd_tol * report.scale,
                        "non-borderline disagreement at k={k}, form={form:?}, alphas={alphas:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn bram_halmos_window_congruent_to_embry_hankel() {
    // G(m) = diag(B_{m+i})^{-*} H(m) diag(B_{m+i})^{-1}: verify the congruence
    // numerically on a random matrix-valued shift.
    let w = random_shift(107, 2, 7, RandomProfile::Increasing);
    let moments = shiftlab_core::shift::MomentSequence::build(&w);
    for m in 0..=1usize {
        let k = 2;
        let g = shiftlab_core::hyponormality::assemble_k_hyp_window(&w, k, KHypForm::BramHalmos, m)
            .unwrap();
        let h = shiftlab_core::hyponormality::assemble_k_hyp_window(&w, k, KHypForm::Embry, m)
            .unwrap();
        // Build diag(B_{m+i}) and conjugate.
        let d = w.dim();
        let mut diag = CMatrix::zeros((k + 1) * d, (k + 1) * d);
        for i in 0..=k {
            let b = moments.b(m + i);
            for r in 0..d {
                for c in 0..d {
                    diag[(i * d + r, i * d + c)] = b[(r, c)];
                }
            }
        }
        let reconstructed = diag.adjoint() * g.matrix() * &diag;
        let diff = (&reconstructed - h.matrix()).norm() / (1.0 + h.matrix().norm());
        assert!(diff < 1e-10, "congruence residual {diff} at window {m}");
    }
}
