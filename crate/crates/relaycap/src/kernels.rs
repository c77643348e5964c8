//! Numerically stable complex-matrix primitives shared by the bound evaluators
//! and the optimizer.
//!
//! Everything here works in bits (base-2 logarithms). Log-determinants are
//! never computed through a raw determinant: `log2|I + G K G^H|` goes through
//! a Hermitian-PSD factorization of `I + K^{1/2} G^H G K^{1/2}`, whose
//! eigenvalues are all ≥ 1, so the result stays finite and nonnegative for
//! power levels far beyond the sweeps used here.
//!
//! # Example
//! ```
//! use relaycap::kernels::{cmat, logdet_id_plus, PsdMatrix};
//!
//! let g = cmat(1, 1, &[(2.0, 0.0)]);
//! let k = PsdMatrix::from_real_diag(&[1.0]);
//! let bits = logdet_id_plus(&g, &k).unwrap();
//! assert!((bits - 5.0f64.log2()).abs() < 1e-12);
//! ```

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix type used throughout the crate.
pub type CMat = DMatrix<Complex64>;

/// Relative eigenvalue threshold of the pseudo-inverse (see `schur_conditional`).
pub const PINV_REL_THRESHOLD: f64 = 1e-10;

/// PSD tolerance: eigenvalues may undershoot zero by this times the spectral scale.
pub const PSD_TOL: f64 = 1e-9;

/// Per-entry absolute tolerance for Hermitian symmetry checks.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },
    #[error("matrix is not Hermitian: max |H - H^H| entry deviation {max_dev:.3e} exceeds {HERMITIAN_TOL:.0e}")]
    NotHermitian { max_dev: f64 },
    #[error("matrix is not PSD: min eigenvalue {min_eig:.3e} below tolerance {tol:.3e}")]
    NotPsd { min_eig: f64, tol: f64 },
}

/// Builds a complex matrix from row-major `(re, im)` pairs. Test/doc helper.
pub fn cmat(rows: usize, cols: usize, entries: &[(f64, f64)]) -> CMat {
    assert_eq!(entries.len(), rows * cols, "entry count must match dimensions");
    CMat::from_fn(rows, cols, |i, j| {
        let (re, im) = entries[i * cols + j];
        Complex64::new(re, im)
    })
}

/// Builds a real diagonal complex matrix. Test/doc helper.
pub fn cdiag(diag: &[f64]) -> CMat {
    CMat::from_fn(diag.len(), diag.len(), |i, j| {
        if i == j {
            Complex64::new(diag[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `(H + H^H)/2`; applied before every eigendecomposition to stop drift from
/// accumulating into the strictly-Hermitian code paths.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

fn max_hermitian_deviation(m: &CMat) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix; symmetrizes first, returns
/// ascending real eigenvalues and the matching unitary eigenvector columns.
pub(crate) fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let sym = hermitize(m);
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// PSD square root `V diag(sqrt(max(λ,0))) V^H`.
pub(crate) fn psd_sqrt(m: &CMat) -> CMat {
    let (vals, vecs) = eigh(m);
    let scaled = CMat::from_fn(m.nrows(), m.ncols(), |i, j| {
        vecs[(i, j)] * Complex64::from(vals[j].max(0.0).sqrt())
    });
    &scaled * vecs.adjoint()
}

/// Eigenvalue-thresholded pseudo-inverse of a Hermitian PSD matrix; eigenvalues
/// below `rel_cut` times the largest one are treated as exact zeros.
pub(crate) fn pinv_psd_cut(m: &CMat, rel_cut: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let max = vals.iter().cloned().fold(0.0, f64::max);
    let cut = rel_cut * max.max(0.0);
    let scaled = CMat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let inv = if vals[j] > cut && vals[j] > 0.0 {
            1.0 / vals[j]
        } else {
            0.0
        };
        vecs[(i, j)] * Complex64::from(inv)
    });
    &scaled * vecs.adjoint()
}

/// [`pinv_psd_cut`] at the module-wide default threshold.
pub(crate) fn pinv_psd(m: &CMat) -> CMat {
    pinv_psd_cut(m, PINV_REL_THRESHOLD)
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// A square complex matrix that equals its own conjugate transpose
/// (per entry, within `HERMITIAN_TOL`).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: CMat,
}

impl HermitianMatrix {
    /// Validates Hermitian symmetry entrywise.
    pub fn new(entries: CMat) -> Result<Self, KernelError> {
        if entries.nrows() != entries.ncols() {
            return Err(KernelError::DimensionMismatch {
                context: "HermitianMatrix::new",
                expected: "square matrix".into(),
                got: format!("{}x{}", entries.nrows(), entries.ncols()),
            });
        }
        let dev = max_hermitian_deviation(&entries);
        if dev > HERMITIAN_TOL {
            return Err(KernelError::NotHermitian { max_dev: dev });
        }
        Ok(Self {
            entries: hermitize(&entries),
        })
    }

    /// Forces symmetry via `(H + H^H)/2`; never fails on square input.
    pub fn symmetrized(m: &CMat) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "symmetrized input must be square");
        Self {
            entries: hermitize(m),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    pub fn into_matrix(self) -> CMat {
        self.entries
    }
}

/// A Hermitian matrix whose eigenvalues are all ≥ `−PSD_TOL · max(|λ|_max, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMatrix {
    base: HermitianMatrix,
}

impl PsdMatrix {
    pub fn new(base: HermitianMatrix) -> Result<Self, KernelError> {
        let (vals, _) = eigh(base.matrix());
        let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let min_eig = vals.first().copied().unwrap_or(0.0);
        let tol = PSD_TOL * scale;
        if min_eig < -tol {
            return Err(KernelError::NotPsd { min_eig, tol });
        }
        Ok(Self { base })
    }

    /// Validates Hermitian symmetry and positive semidefiniteness of a raw matrix.
    pub fn from_matrix(m: CMat) -> Result<Self, KernelError> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// For matrices PSD by construction (projections, congruences); skips the
    /// eigenvalue check but still symmetrizes.
    pub(crate) fn new_unchecked(m: CMat) -> Self {
        Self {
            base: HermitianMatrix::symmetrized(&m),
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        assert!(diag.iter().all(|&d| d >= 0.0), "diagonal must be nonnegative");
        Self::new_unchecked(cdiag(diag))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new_unchecked(CMat::zeros(dim, dim))
    }

    /// `scale · I`.
    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        assert!(scale >= 0.0);
        Self::new_unchecked(CMat::identity(dim, dim).scale(scale))
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.base.matrix()
    }

    pub fn trace(&self) -> f64 {
        self.matrix().trace().re
    }

    /// PSD square root.
    pub fn sqrt(&self) -> CMat {
        psd_sqrt(self.matrix())
    }
}

/// Joint input covariance `K = [K1, K12; K12^H, K2]` of the sender (block 1)
/// and relay (block 2) inputs.
#[derive(Debug, Clone)]
pub struct JointCovariance {
    k1: PsdMatrix,
    k12: CMat,
    k2: PsdMatrix,
}

impl JointCovariance {
    /// Validates block shapes and joint positive semidefiniteness of the
    /// assembled matrix.
    pub fn new(k1: PsdMatrix, k12: CMat, k2: PsdMatrix) -> Result<Self, KernelError> {
        if k12.nrows() != k1.dim() || k12.ncols() != k2.dim() {
            return Err(KernelError::DimensionMismatch {
                context: "JointCovariance::new",
                expected: format!("K12 of {}x{}", k1.dim(), k2.dim()),
                got: format!("{}x{}", k12.nrows(), k12.ncols()),
            });
        }
        let joint = Self { k1, k12, k2 };
        let (vals, _) = eigh(&joint.assemble());
        let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let min_eig = vals.first().copied().unwrap_or(0.0);
        if min_eig < -PSD_TOL * scale {
            return Err(KernelError::NotPsd {
                min_eig,
                tol: PSD_TOL * scale,
            });
        }
        Ok(joint)
    }

    /// Independent-inputs covariance (`K12 = 0`); jointly PSD by construction.
    pub fn independent(k1: PsdMatrix, k2: PsdMatrix) -> Self {
        let k12 = CMat::zeros(k1.dim(), k2.dim());
        Self { k1, k12, k2 }
    }

    /// Splits an assembled `(t1+t2)`-square PSD matrix back into blocks.
    pub fn from_assembled(m: &CMat, t1: usize) -> Result<Self, KernelError> {
        if m.nrows() != m.ncols() || m.nrows() < t1 {
            return Err(KernelError::DimensionMismatch {
                context: "JointCovariance::from_assembled",
                expected: format!("square matrix with at least {t1} rows"),
                got: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        let t2 = m.nrows() - t1;
        let k1 = hermitize(&m.view((0, 0), (t1, t1)).into_owned());
        let k2 = hermitize(&m.view((t1, t1), (t2, t2)).into_owned());
        let k12 = m.view((0, t1), (t1, t2)).into_owned();
        Self::new(
            PsdMatrix::from_matrix(k1)?,
            k12,
            PsdMatrix::from_matrix(k2)?,
        )
    }

    pub fn zero(t1: usize, t2: usize) -> Self {
        Self::independent(PsdMatrix::zeros(t1), PsdMatrix::zeros(t2))
    }

    pub fn k1(&self) -> &PsdMatrix {
        &self.k1
    }

    pub fn k12(&self) -> &CMat {
        &self.k12
    }

    pub fn k2(&self) -> &PsdMatrix {
        &self.k2
    }

    pub fn t1(&self) -> usize {
        self.k1.dim()
    }

    pub fn t2(&self) -> usize {
        self.k2.dim()
    }

    /// Assembles the full `(t1+t2)`-square block matrix.
    pub fn assemble(&self) -> CMat {
        let (t1, t2) = (self.t1(), self.t2());
        let n = t1 + t2;
        let mut m = CMat::zeros(n, n);
        m.view_mut((0, 0), (t1, t1)).copy_from(self.k1.matrix());
        m.view_mut((0, t1), (t1, t2)).copy_from(&self.k12);
        m.view_mut((t1, 0), (t2, t1)).copy_from(&self.k12.adjoint());
        m.view_mut((t1, t1), (t2, t2)).copy_from(self.k2.matrix());
        m
    }

    /// The assembled matrix wrapped as [`PsdMatrix`] (valid by the
    /// constructor invariant — every `JointCovariance` is jointly PSD).
    pub fn assemble_psd(&self) -> PsdMatrix {
        PsdMatrix::new_unchecked(self.assemble())
    }

    /// True when both block traces fit the per-node budget (with PSD slack).
    pub fn feasible_for(&self, p: f64) -> bool {
        self.k1.trace() <= p + PSD_TOL && self.k2.trace() <= p + PSD_TOL
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// `log2 det(I_r + G K G^H)` in bits, for `G` of shape r×t and PSD `K` of
/// shape t×t.
///
/// Computed through the t-side Hermitian form `I_t + K^{1/2} G^H G K^{1/2}`
/// (equal by `|I_r + GKG^H| = |I_t + G^H G K|`), whose Cholesky factor exists
/// unconditionally because the matrix dominates the identity. The log runs
/// over the factor's diagonal, so nothing overflows even at large power.
pub fn logdet_id_plus(g: &CMat, k: &PsdMatrix) -> Result<f64, KernelError> {
    if g.ncols() != k.dim() {
        return Err(KernelError::DimensionMismatch {
            context: "logdet_id_plus",
            expected: format!("G with {} columns", k.dim()),
            got: format!("{} columns", g.ncols()),
        });
    }
    let c = g * k.sqrt();
    Ok(logdet_id_plus_gram_factor(&c))
}

/// `log2 det(I + C^H C)` via Cholesky; the Gram form keeps the matrix ≥ I.
pub(crate) fn logdet_id_plus_gram_factor(c: &CMat) -> f64 {
    let t = c.ncols();
    let m = hermitize(&(CMat::identity(t, t) + c.adjoint() * c));
    let bits = match Cholesky::new(m) {
        Some(chol) => {
            let l = chol.l();
            2.0 * (0..t).map(|i| l[(i, i)].re.log2()).sum::<f64>()
        }
        // M ⪰ I makes failure a pure-rounding event; fall back to eigenvalues.
        None => {
            let m2 = hermitize(&(CMat::identity(t, t) + c.adjoint() * c));
            let (vals, _) = eigh(&m2);
            vals.iter().map(|v| v.max(1.0).log2()).sum()
        }
    };
    bits.max(0.0)
}

/// Conditional covariance `K_{1|2} = K1 − K12 · pinv(K2) · K12^H` of the sender
/// input given the relay input.
///
/// `pinv` is the eigenvalue-thresholded pseudo-inverse (relative threshold
/// `PINV_REL_THRESHOLD`); joint positive semidefiniteness forces the range
/// condition, so the result is PSD.
pub fn schur_conditional(k: &JointCovariance) -> PsdMatrix {
    if k.t2() == 0 {
        return k.k1().clone();
    }
    let k2_pinv = pinv_psd(k.k2().matrix());
    let s = k.k1().matrix() - k.k12() * k2_pinv * k.k12().adjoint();
    // Clip the tiny negative eigenvalues that rounding (or a thresholded
    // pseudo-inverse at a near-singular K2) can introduce.
    psd_clip(&s)
}

/// Frobenius-nearest PSD matrix: eigendecompose, clip negative eigenvalues to
/// zero, reassemble.
pub fn psd_project(h: &HermitianMatrix) -> PsdMatrix {
    psd_clip(h.matrix())
}

pub(crate) fn psd_clip(m: &CMat) -> PsdMatrix {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let scaled = CMat::from_fn(n, n, |i, j| vecs[(i, j)] * Complex64::from(vals[j].max(0.0)));
    PsdMatrix::new_unchecked(&scaled * vecs.adjoint())
}

/// Rescales a joint covariance onto the two block-trace budgets by the
/// congruence `D K D`, `D = diag(√α·I_{t1}, √β·I_{t2})` with
/// `α = min(1, P/tr K1)`, `β = min(1, P/tr K2)` (zero-trace blocks keep
/// factor 1). Congruence preserves PSD exactly, and both traces land at or
/// below `P`.
pub fn block_trace_retract(k: &JointCovariance, p: f64) -> JointCovariance {
    let tr1 = k.k1().trace();
    let tr2 = k.k2().trace();
    let alpha = if tr1 > 0.0 { (p / tr1).min(1.0) } else { 1.0 };
    let beta = if tr2 > 0.0 { (p / tr2).min(1.0) } else { 1.0 };
    let k1 = PsdMatrix::new_unchecked(k.k1().matrix().scale(alpha));
    let k2 = PsdMatrix::new_unchecked(k.k2().matrix().scale(beta));
    let k12 = k.k12().scale((alpha * beta).sqrt());
    JointCovariance { k1, k12, k2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::GaussianStream;
    use approx::assert_relative_eq;

    fn random_cmat(rows: usize, cols: usize, stream: &mut GaussianStream) -> CMat {
        CMat::from_fn(rows, cols, |_, _| stream.next_cn01())
    }

    /// Random PSD matrix `B B^H` with trace normalized into `[0, max_trace]`.
    fn random_psd(dim: usize, max_trace: f64, stream: &mut GaussianStream) -> CMat {
        let b = random_cmat(dim, dim, stream);
        let m = &b * b.adjoint();
        let tr = m.trace().re;
        if tr > max_trace {
            m.scale(max_trace / tr)
        } else {
            m
        }
    }

    fn random_joint(t1: usize, t2: usize, stream: &mut GaussianStream) -> JointCovariance {
        let b = random_cmat(t1 + t2, t1 + t2, stream);
        let m = &b * b.adjoint();
        JointCovariance::from_assembled(&m, t1).expect("B B^H is jointly PSD")
    }

    #[test]
    fn logdet_zero_gain_is_zero() {
        let g = cmat(1, 1, &[(0.0, 0.0)]);
        let k = PsdMatrix::from_real_diag(&[5.0]);
        assert_eq!(logdet_id_plus(&g, &k).unwrap(), 0.0);
    }

    #[test]
    fn logdet_unit_scalar_is_one_bit() {
        let g = cmat(1, 1, &[(1.0, 0.0)]);
        let k = PsdMatrix::from_real_diag(&[1.0]);
        assert_relative_eq!(logdet_id_plus(&g, &k).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn logdet_gain_two_matches_scalar_determinant() {
        // Oracle: scalar determinant 1 + |g|^2 k = 5 computed by hand.
        let g = cmat(1, 1, &[(2.0, 0.0)]);
        let k = PsdMatrix::from_real_diag(&[1.0]);
        assert_relative_eq!(
            logdet_id_plus(&g, &k).unwrap(),
            5.0f64.log2(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn logdet_rejects_dimension_mismatch() {
        let g = cmat(1, 2, &[(1.0, 0.0), (1.0, 0.0)]);
        let k = PsdMatrix::from_real_diag(&[1.0]);
        assert!(matches!(
            logdet_id_plus(&g, &k),
            Err(KernelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn logdet_survives_high_power() {
        // P = 1e4 on a 4-antenna block: a raw determinant would be fine here,
        // but the point is the factorized path stays exact and nonnegative.
        let mut stream = GaussianStream::new(11, 0);
        let g = random_cmat(4, 4, &mut stream);
        let k = PsdMatrix::scaled_identity(4, 2500.0);
        let bits = logdet_id_plus(&g, &k).unwrap();
        assert!(bits.is_finite() && bits > 0.0);
    }

    #[test]
    fn lemma1_duality_of_forms() {
        // |I_r + G K G^H| = |I_t + G^H G K|: compare the t-side kernel route
        // against an r-side eigenvalue evaluation.
        let mut stream = GaussianStream::new(7, 0);
        for _ in 0..200 {
            let r = 1 + (stream.next_u64() % 4) as usize;
            let t = 1 + (stream.next_u64() % 4) as usize;
            let g = random_cmat(r, t, &mut stream);
            let k = random_psd(t, 3.0, &mut stream);
            let kp = PsdMatrix::from_matrix(k.clone()).unwrap();
            let t_side = logdet_id_plus(&g, &kp).unwrap();
            let sigma = hermitize(&(CMat::identity(r, r) + &g * &k * g.adjoint()));
            let (vals, _) = eigh(&sigma);
            let r_side: f64 = vals.iter().map(|v| v.max(1e-300).log2()).sum();
            assert!(
                (t_side - r_side).abs() <= 1e-9,
                "duality violated: {t_side} vs {r_side}"
            );
        }
    }

    #[test]
    fn lemma1_scaling_inequality() {
        // log2|I + γ G K G^H| ≥ min(t,r)·log2 γ + log2|I + G K G^H|, γ ∈ (0,1].
        let mut stream = GaussianStream::new(8, 0);
        for i in 0..200 {
            let r = 1 + (stream.next_u64() % 4) as usize;
            let t = 1 + (stream.next_u64() % 4) as usize;
            let g = random_cmat(r, t, &mut stream);
            let k = PsdMatrix::from_matrix(random_psd(t, 4.0, &mut stream)).unwrap();
            let gamma = if i % 10 == 0 {
                1.0
            } else {
                stream.next_uniform().max(1e-6)
            };
            let lhs = logdet_id_plus(&g.scale(gamma.sqrt()), &k).unwrap();
            let rhs =
                logdet_id_plus(&g, &k).unwrap() + (t.min(r) as f64) * gamma.log2();
            assert!(lhs >= rhs - 1e-9, "lemma 1 violated: {lhs} < {rhs}");
            if gamma == 1.0 {
                assert!((lhs - rhs).abs() <= 1e-9, "equality at γ=1 violated");
            }
        }
    }

    #[test]
    fn lemma2_cross_covariance_psd() {
        // G31 K1 G31^H + G32 K2 G32^H − G32 K12^H G31^H − G31 K12 G32^H ⪰ 0
        // for jointly PSD K.
        let mut stream = GaussianStream::new(9, 0);
        for _ in 0..200 {
            let t1 = 1 + (stream.next_u64() % 3) as usize;
            let t2 = 1 + (stream.next_u64() % 3) as usize;
            let r3 = 1 + (stream.next_u64() % 3) as usize;
            let k = random_joint(t1, t2, &mut stream);
            let g31 = random_cmat(r3, t1, &mut stream);
            let g32 = random_cmat(r3, t2, &mut stream);
            let m = &g31 * k.k1().matrix() * g31.adjoint()
                + &g32 * k.k2().matrix() * g32.adjoint()
                - &g32 * k.k12().adjoint() * g31.adjoint()
                - &g31 * k.k12() * g32.adjoint();
            let (vals, _) = eigh(&m);
            assert!(
                vals[0] >= -1e-9,
                "lemma 2 violated: min eigenvalue {}",
                vals[0]
            );
        }
    }

    #[test]
    fn schur_identity_when_uncorrelated() {
        let k1 = PsdMatrix::from_real_diag(&[2.0, 3.0]);
        let k2 = PsdMatrix::from_real_diag(&[1.0]);
        let k = JointCovariance::independent(k1.clone(), k2);
        let s = schur_conditional(&k);
        assert_relative_eq!(
            (s.matrix() - k1.matrix()).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn schur_scalar_correlation() {
        let rho = Complex64::new(0.3, 0.4);
        let k = JointCovariance::new(
            PsdMatrix::from_real_diag(&[1.0]),
            CMat::from_element(1, 1, rho),
            PsdMatrix::from_real_diag(&[1.0]),
        )
        .unwrap();
        let s = schur_conditional(&k);
        assert_relative_eq!(s.matrix()[(0, 0)].re, 1.0 - rho.norm_sqr(), epsilon = 1e-12);
    }

    #[test]
    fn schur_degenerate_k2_uses_pseudo_inverse() {
        // K2 = 0 forces K12 = 0 by joint PSD; the pinv convention must then
        // return K1 itself, matching the K2 = ε → 0 limit.
        let k = JointCovariance::new(
            PsdMatrix::from_real_diag(&[1.0]),
            CMat::zeros(1, 1),
            PsdMatrix::from_real_diag(&[0.0]),
        )
        .unwrap();
        let s = schur_conditional(&k);
        assert_relative_eq!(s.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        for eps in [1e-6, 1e-9, 1e-12] {
            let k_eps = JointCovariance::new(
                PsdMatrix::from_real_diag(&[1.0]),
                CMat::zeros(1, 1),
                PsdMatrix::from_real_diag(&[eps]),
            )
            .unwrap();
            assert_relative_eq!(
                schur_conditional(&k_eps).matrix()[(0, 0)].re,
                1.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn schur_output_dominated_by_k1() {
        let mut stream = GaussianStream::new(10, 0);
        for _ in 0..100 {
            let k = random_joint(2, 2, &mut stream);
            let s = schur_conditional(&k);
            let diff = k.k1().matrix() - s.matrix();
            let (vals, _) = eigh(&diff);
            assert!(vals[0] >= -1e-9, "K1 ⪰ K_{{1|2}} violated: {}", vals[0]);
            let (svals, _) = eigh(s.matrix());
            assert!(svals[0] >= -1e-9, "Schur output not PSD: {}", svals[0]);
        }
    }

    #[test]
    fn project_keeps_psd_input() {
        let mut stream = GaussianStream::new(12, 0);
        let m = random_psd(3, 3.0, &mut stream);
        let h = HermitianMatrix::symmetrized(&m);
        let p = psd_project(&h);
        let max_dev = (p.matrix() - &m)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(max_dev <= 1e-10, "PSD input changed by {max_dev}");
    }

    #[test]
    fn project_clips_negative_diagonal() {
        let h = HermitianMatrix::new(cdiag(&[1.0, -1.0])).unwrap();
        let p = psd_project(&h);
        assert_relative_eq!(p.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.matrix()[(1, 1)].re, 0.0, epsilon = 1e-12);
    }

    /// Independent oracle for `psd_project`: a hand-written cyclic Jacobi
    /// eigensolver for complex Hermitian matrices (unitary 2×2 rotations that
    /// zero one off-diagonal entry at a time), kept free of the nalgebra
    /// backend the library itself uses.
    fn jacobi_eigh(m: &CMat) -> (Vec<f64>, CMat) {
        let n = m.nrows();
        let mut a = hermitize(m);
        let mut v = CMat::identity(n, n);
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[(p, q)].norm());
                }
            }
            if off < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.norm() < 1e-300 {
                        continue;
                    }
                    // Unitary rotation diagonalizing the (p,q) 2×2 block:
                    // with a_pq = |a_pq| e^{iφ}, the real symmetric reduction
                    // uses θ from tan(2θ) = 2|a_pq| / (a_pp − a_qq).
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let abs = apq.norm();
                    let phase = apq / Complex64::from(abs);
                    let theta = 0.5 * (2.0 * abs).atan2(app - aqq);
                    let (s, c) = theta.sin_cos();
                    let cp = Complex64::from(c);
                    let sp = phase * Complex64::from(s);
                    // Columns p,q of A and V are mixed by the rotation R with
                    // R[p,p]=c, R[q,p]=-conj(phase)·s, R[p,q]=phase·s, R[q,q]=c.
                    for i in 0..n {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = aip * cp + aiq * sp.conj();
                        a[(i, q)] = -aip * sp + aiq * cp;
                    }
                    for j in 0..n {
                        let apj = a[(p, j)];
                        let aqj = a[(q, j)];
                        a[(p, j)] = cp * apj + sp * aqj;
                        a[(q, j)] = -sp.conj() * apj + cp * aqj;
                    }
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = vip * cp + viq * sp.conj();
                        v[(i, q)] = -vip * sp + viq * cp;
                    }
                }
            }
        }
        let vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        (vals, v)
    }

    #[test]
    fn project_matches_independent_jacobi_oracle() {
        let mut stream = GaussianStream::new(13, 0);
        for _ in 0..20 {
            let raw = random_cmat(3, 3, &mut stream);
            let h = HermitianMatrix::symmetrized(&raw);
            let projected = psd_project(&h);

            let (vals, vecs) = jacobi_eigh(h.matrix());
            let n = 3;
            let clipped = CMat::from_fn(n, n, |i, j| {
                vecs[(i, j)] * Complex64::from(vals[j].max(0.0))
            }) * vecs.adjoint();
            let dist = (projected.matrix() - &clipped).norm();
            assert!(dist <= 1e-9, "projection differs from oracle by {dist}");
        }
    }

    #[test]
    fn retract_keeps_feasible_input() {
        let k = JointCovariance::new(
            PsdMatrix::from_real_diag(&[0.5, 0.25]),
            CMat::zeros(2, 1),
            PsdMatrix::from_real_diag(&[1.0]),
        )
        .unwrap();
        let out = block_trace_retract(&k, 1.0);
        assert_relative_eq!(
            (out.assemble() - k.assemble()).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn retract_halves_oversized_block() {
        let p = 2.0;
        let k = JointCovariance::new(
            PsdMatrix::from_real_diag(&[2.0 * p]),
            CMat::zeros(1, 1),
            PsdMatrix::from_real_diag(&[p]),
        )
        .unwrap();
        let out = block_trace_retract(&k, p);
        assert_relative_eq!(out.k1().trace(), p, epsilon = 1e-12);
        assert_relative_eq!(out.k2().trace(), p, epsilon = 1e-12);
    }

    #[test]
    fn retract_scales_cross_block_by_geometric_mean() {
        // Oracle: D K D by hand with α = 1/2, β = 1 gives K12 → K12/√2.
        let p = 1.0;
        let c = Complex64::new(0.6, 0.2);
        let k = JointCovariance::new(
            PsdMatrix::from_real_diag(&[2.0 * p]),
            CMat::from_element(1, 1, c),
            PsdMatrix::from_real_diag(&[p]),
        )
        .unwrap();
        let out = block_trace_retract(&k, p);
        assert_relative_eq!(
            (out.k12()[(0, 0)] - c / Complex64::from(2.0f64.sqrt())).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn retract_random_always_feasible() {
        let mut stream = GaussianStream::new(14, 0);
        for _ in 0..100 {
            let k = random_joint(2, 2, &mut stream);
            let p = 0.5 * stream.next_uniform() + 0.05;
            let out = block_trace_retract(&k, p);
            assert!(out.k1().trace() <= p + 1e-9);
            assert!(out.k2().trace() <= p + 1e-9);
            let (vals, _) = eigh(&out.assemble());
            assert!(vals[0] >= -1e-9, "retraction broke PSD: {}", vals[0]);
        }
    }

    #[test]
    fn hermitian_constructor_rejects_asymmetry() {
        let m = cmat(2, 2, &[(1.0, 0.0), (1.0, 0.5), (1.0, 0.5), (2.0, 0.0)]);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(KernelError::NotHermitian { .. })
        ));
    }

    #[test]
    fn psd_constructor_rejects_indefinite() {
        assert!(matches!(
            PsdMatrix::from_matrix(cdiag(&[1.0, -0.5])),
            Err(KernelError::NotPsd { .. })
        ));
    }
}
