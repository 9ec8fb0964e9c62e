//! Shared test oracles, deliberately independent of the library's own
//! linear-algebra path.

/// Eigenvalues of a real symmetric matrix by the cyclic Jacobi rotation
/// method. Self-contained: no external linear algebra, so it can serve as an
/// independent oracle for the spectral code under test.
pub fn jacobi_eigenvalues(mat: &[Vec<f64>]) -> Vec<f64> {
    let n = mat.len();
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    for sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-30 {
            break;
        }
        assert!(sweep < 99, "jacobi did not converge");
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

pub fn jacobi_min_eigenvalue(mat: &[Vec<f64>]) -> f64 {
    jacobi_eigenvalues(mat)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Embed a complex Hermitian matrix as the real symmetric
/// `[[Re, -Im], [Im, Re]]`; its spectrum is the complex one doubled.
pub fn complex_to_real_embedding(m: &shiftlab_core::CMatrix) -> Vec<Vec<f64>> {
    let n = m.nrows();
    let mut out = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            out[i][j] = z.re;
            out[i][j + n] = -z.im;
            out[i + n][j] = z.im;
            out[i + n][j + n] = z.re;
        }
    }
    out
}

/// Scalar moments γ_0..γ_len of a d=1 weight sequence.
pub fn scalar_moments(alphas: &[f64], len: usize) -> Vec<f64> {
    let mut g = vec![1.0];
    for k in 0..len {
        let a = alphas[k];
        g.push(g[k] * a * a);
    }
    g
}

/// Classical scalar k-hyponormality test: the Hankel matrices
/// `(γ_{m+i+j})_{i,j=0..k}` are PSD for every verifiable window, decided by
/// the Jacobi oracle with the same relative tolerance convention.
pub fn scalar_hankel_k_hyponormal(alphas: &[f64], k: usize, psd_tol: f64) -> bool {
    let n = alphas.len();
    if n < 2 * k {
        return true;
    }
    let g = scalar_moments(alphas, n);
    for m in 0..=(n - 2 * k) {
        let h: Vec<Vec<f64>> = (0..=k)
            .map(|i| (0..=k).map(|j| g[m + i + j]).collect())
            .collect();
        let eigs = jacobi_eigenvalues(&h);
        let scale = 1.0 + eigs.iter().map(|l| l.abs()).fold(0.0, f64::max);
        let min = eigs.into_iter().fold(f64::INFINITY, f64::min);
        if min < -psd_tol * scale {
            return false;
        }
    }
    true
}
