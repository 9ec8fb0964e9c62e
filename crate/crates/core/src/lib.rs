//! Numerical classification of truncated matrix-valued weighted shifts.
//!
//! A weighted shift `W` maps `(x_0, x_1, ...) ↦ (0, A_0 x_0, A_1 x_1, ...)`
//! where the weights `A_n` are positive-definite Hermitian `d×d` matrices.
//! Given a finite truncation `A_0..A_{N-1}`, this crate decides — with
//! explicit tolerances and reproducible witnesses — which hyponormality
//! classes the shift can be verified to belong to on the available windows:
//!
//! * hyponormal (`A_n² ≼ A_{n+1}²`),
//! * k-hyponormal in three equivalent block formulations
//!   (Bram–Halmos, Embry/Hankel, commutator),
//! * the specialized 2-hyponormal 2×2 block criterion,
//! * quadratically hyponormal (tridiagonal family `M_n(s)` PSD for all `s ≥ 0`),
//! * cubically hyponormal (pentadiagonal family `M(s, t)` PSD on a real grid).
//!
//! On top of the testers sit the structural tools: flatness detection,
//! vector-level propagation checks, the flat ⊕ strictly-increasing
//! decomposition of 2-hyponormal shifts, the three-way decomposition of
//! cubically hyponormal shifts with commuting weights, generators for
//! ground-truth subnormal examples (atomic Berger measures, direct sums,
//! unitary conjugates), and randomized search harnesses for the open
//! propagation questions.
//!
//! Every "pass" is qualified by the windows actually checked; nothing is
//! claimed about the infinite shift beyond the truncation. Grid-based
//! certifications are labeled as evidence ("certified (grid+asymptotic)"),
//! not proof.

pub mod error;
pub mod generators;
pub mod hyponormality;
pub mod json;
pub mod linalg;
pub mod positivity;
pub mod propagation;
pub mod shift;
pub mod tol;

pub use error::Error;
pub use tol::Tolerances;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;
