//! Dense complex-matrix utilities: PSD square roots, SVD-based rank and
//! range, orthonormal subspace bases and their calculus, least-squares
//! solves, and orthogonal-Procrustes unitary alignment.
//!
//! Rank decisions are relative (`sigma >= rank_tol * sigma_max`) because the
//! exact closures of the underlying theory are not available numerically.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector.
pub type CVector = DVector<Complex64>;

/// Tolerance policy: a relative singular-value threshold for rank decisions
/// and an absolute residual threshold for equality assertions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rank_tol: f64,
    pub eq_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_tol: 1e-9,
            eq_tol: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_tol: f64, eq_tol: f64) -> Result<Self> {
        if !(0.0 < rank_tol && rank_tol < 1.0 && 0.0 < eq_tol && eq_tol < 1.0) {
            return Err(Error::InvalidInput(format!(
                "tolerances must lie in (0,1): rank_tol={rank_tol}, eq_tol={eq_tol}"
            )));
        }
        Ok(Tolerance { rank_tol, eq_tol })
    }

    /// Same rank threshold with a different equality threshold.
    pub fn with_eq_tol(self, eq_tol: f64) -> Self {
        Tolerance { eq_tol, ..self }
    }
}

pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Validates that all entries are finite.
pub fn check_finite(a: &CMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteEntry)
    }
}

/// Largest absolute entry.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Operator (spectral) norm; 0 for empty matrices.
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone().singular_values().max()
}

/// Smallest singular value; 0 for empty matrices.
pub fn sigma_min(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let sv = a.clone().singular_values();
    if a.nrows() < a.ncols() {
        // Fewer rows than columns: the map cannot be injective.
        return 0.0;
    }
    sv.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Residual of the hermitian-symmetry check, `max |a - a^H|`.
pub fn hermitian_residual(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// `||a*b - I||` in operator norm, for unitarity checks.
pub fn unitary_residual(a: &CMatrix) -> f64 {
    let g = a.adjoint() * a;
    let eye = CMatrix::identity(g.nrows(), g.ncols());
    let left = op_norm(&(&g - &eye));
    let g2 = a * a.adjoint();
    let eye2 = CMatrix::identity(g2.nrows(), g2.ncols());
    left.max(op_norm(&(&g2 - &eye2)))
}

/// Hermitian eigendecomposition of the symmetrized input, with Jacobi
/// refinement sweeps on top of the QR-based solver (whose raw accuracy is
/// not enough for the defect identities downstream).
/// Eigenvalue order is not guaranteed.
pub fn herm_eigen(a: &CMatrix) -> (DVector<f64>, CMatrix) {
    let sym = (a + a.adjoint()).scale(0.5);
    let n = sym.nrows();
    if n == 0 {
        return (DVector::zeros(0), CMatrix::zeros(0, 0));
    }
    let scale = max_abs(&sym).max(1e-300);
    let eig = nalgebra::SymmetricEigen::new(sym.clone());
    let mut v = eig.eigenvectors;
    let mut d = v.adjoint() * &sym * &v;
    d = (&d + d.adjoint()).scale(0.5);
    for _ in 0..4 {
        let off = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| d[(p, q)].norm())
            .fold(0.0, f64::max);
        if off <= 1e-15 * scale {
            break;
        }
        jacobi_sweep(&mut d, &mut v);
    }
    let vals = DVector::from_iterator(n, (0..n).map(|i| d[(i, i)].re));
    (vals, v)
}

/// One cyclic Jacobi sweep annihilating off-diagonal entries of the
/// hermitian matrix `d`, accumulating rotations into the columns of `v`.
fn jacobi_sweep(d: &mut CMatrix, v: &mut CMatrix) {
    let n = d.nrows();
    let scale = max_abs(d).max(1e-300);
    for p in 0..n {
        for q in (p + 1)..n {
            let beta = d[(p, q)];
            if beta.norm() <= 1e-18 * scale {
                continue;
            }
            let alpha = d[(p, p)].re;
            let gamma = d[(q, q)].re;
            let phase = beta / cplx(beta.norm(), 0.0);
            // Diagonalize [[alpha, |beta|], [|beta|, gamma]].
            let tau = (gamma - alpha) / (2.0 * beta.norm());
            let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            // Column rotation: (col_p, col_q) <- (c*col_p - s*conj(phase)*col_q,
            //                                     s*phase*col_p + c*col_q).
            let u_pp = cplx(c, 0.0);
            let u_pq = phase.scale(s);
            let u_qp = -phase.conj().scale(s);
            let u_qq = cplx(c, 0.0);
            for r in 0..n {
                let dp = d[(r, p)];
                let dq = d[(r, q)];
                d[(r, p)] = dp * u_pp + dq * u_qp;
                d[(r, q)] = dp * u_pq + dq * u_qq;
            }
            for col in 0..n {
                let dp = d[(p, col)];
                let dq = d[(q, col)];
                d[(p, col)] = u_pp.conj() * dp + u_qp.conj() * dq;
                d[(q, col)] = u_pq.conj() * dp + u_qq.conj() * dq;
            }
            d[(p, q)] = cplx(0.0, 0.0);
            d[(q, p)] = cplx(0.0, 0.0);
            for r in 0..v.nrows() {
                let vp = v[(r, p)];
                let vq = v[(r, q)];
                v[(r, p)] = vp * u_pp + vq * u_qp;
                v[(r, q)] = vp * u_pq + vq * u_qq;
            }
        }
    }
}

fn herm_eig(a: &CMatrix) -> (DVector<f64>, CMatrix) {
    herm_eigen(a)
}

/// Smallest eigenvalue of the hermitian part of `a`.
pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let (vals, _) = herm_eig(a);
    vals.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of the hermitian part of `a`.
pub fn max_eigenvalue(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let (vals, _) = herm_eig(a);
    vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Hermitian PSD square root.
///
/// Eigenvalues within `eq_tol` of zero are clamped to 0 (roundoff from
/// exactly-PSD operators must not produce spurious sqrt(eps)-sized defect
/// directions); anything below `-eq_tol` is a genuine violation and is
/// reported as `NotPsd`.
pub fn psd_sqrt(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::ShapeMismatch(a.nrows(), a.ncols(), a.ncols(), a.ncols()));
    }
    if a.nrows() == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let res = hermitian_residual(a);
    if res > tol.eq_tol {
        return Err(Error::NotHermitian {
            residual: res,
            tol: tol.eq_tol,
        });
    }
    let (vals, vecs) = herm_eig(a);
    let mut roots = DVector::<f64>::zeros(vals.len());
    for (i, &v) in vals.iter().enumerate() {
        if v < -tol.eq_tol {
            return Err(Error::NotPsd { eigenvalue: v });
        }
        roots[i] = if v <= tol.eq_tol { 0.0 } else { v.sqrt() };
    }
    let scaled = {
        let mut m = vecs.clone();
        for (j, mut col) in m.column_iter_mut().enumerate() {
            col *= cplx(roots[j], 0.0);
        }
        m
    };
    let b = &scaled * vecs.adjoint();
    Ok((&b + b.adjoint()).scale(0.5))
}

/// A subspace of a finite-dimensional complex space, represented by a matrix
/// with orthonormal columns (zero columns encode the zero subspace).
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    basis: CMatrix,
}

impl SubspaceBasis {
    /// Wraps a matrix whose columns are already orthonormal within `eq_tol`.
    pub fn from_orthonormal(basis: CMatrix, tol: &Tolerance) -> Result<Self> {
        check_finite(&basis)?;
        let gram = basis.adjoint() * &basis;
        let eye = CMatrix::identity(gram.nrows(), gram.ncols());
        let res = max_abs(&(&gram - &eye));
        if basis.ncols() > 0 && res > tol.eq_tol {
            return Err(Error::InvalidInput(format!(
                "columns are not orthonormal (residual {res:.3e})"
            )));
        }
        Ok(SubspaceBasis {
            ambient_dim: basis.nrows(),
            basis,
        })
    }

    pub fn zero(ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            basis: CMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            basis: CMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.ncols() == 0
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> CMatrix {
        if self.dim() == 0 {
            return CMatrix::zeros(self.ambient_dim, self.ambient_dim);
        }
        &self.basis * self.basis.adjoint()
    }

    /// Coordinates of ambient vectors in this basis (adjoint application).
    pub fn coords(&self, v: &CMatrix) -> CMatrix {
        self.basis.adjoint() * v
    }

    /// Orthogonal complement within the ambient space.
    pub fn complement(&self, tol: &Tolerance) -> SubspaceBasis {
        if self.dim() == 0 {
            return SubspaceBasis::full(self.ambient_dim);
        }
        kernel_basis(&self.basis.adjoint().into_owned(), tol)
    }

    /// Intersection, computed from the null space of `[A | -B]`.
    pub fn intersect(&self, other: &SubspaceBasis, tol: &Tolerance) -> Result<SubspaceBasis> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::AmbientMismatch(self.ambient_dim, other.ambient_dim));
        }
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(SubspaceBasis::zero(self.ambient_dim));
        }
        let p = self.dim();
        let q = other.dim();
        let mut stacked = CMatrix::zeros(self.ambient_dim, p + q);
        stacked.view_mut((0, 0), (self.ambient_dim, p)).copy_from(&self.basis);
        stacked
            .view_mut((0, p), (self.ambient_dim, q))
            .copy_from(&(-&other.basis));
        let null = kernel_basis(&stacked, tol);
        if null.dim() == 0 {
            return Ok(SubspaceBasis::zero(self.ambient_dim));
        }
        // Each null vector (u; v) satisfies A u = B v; collect the common points.
        let u_part = null.basis().rows(0, p).into_owned();
        let points = &self.basis * u_part;
        Ok(range_basis(&points, tol))
    }

    /// Closed span of the union.
    pub fn sum(&self, other: &SubspaceBasis, tol: &Tolerance) -> Result<SubspaceBasis> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::AmbientMismatch(self.ambient_dim, other.ambient_dim));
        }
        let mut stacked = CMatrix::zeros(self.ambient_dim, self.dim() + other.dim());
        stacked
            .view_mut((0, 0), (self.ambient_dim, self.dim()))
            .copy_from(&self.basis);
        stacked
            .view_mut((0, self.dim()), (self.ambient_dim, other.dim()))
            .copy_from(&other.basis);
        Ok(range_basis(&stacked, tol))
    }

    /// Image of the subspace under a matrix (range of `m * basis`).
    pub fn image(&self, m: &CMatrix, tol: &Tolerance) -> Result<SubspaceBasis> {
        if m.ncols() != self.ambient_dim {
            return Err(Error::ShapeMismatch(m.nrows(), m.ncols(), self.ambient_dim, self.dim()));
        }
        Ok(range_basis(&(m * &self.basis), tol))
    }

    /// Residual of the containment test `other ⊆ self`.
    pub fn containment_residual(&self, other: &SubspaceBasis) -> Result<f64> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::AmbientMismatch(self.ambient_dim, other.ambient_dim));
        }
        if other.dim() == 0 {
            return Ok(0.0);
        }
        let proj = self.projector();
        let leak = &other.basis - proj * &other.basis;
        Ok(op_norm(&leak))
    }

    /// Containment test with residual threshold `eq_tol`.
    pub fn contains(&self, other: &SubspaceBasis, tol: &Tolerance) -> Result<bool> {
        Ok(self.containment_residual(other)? <= tol.eq_tol)
    }

    /// Gap between subspaces, `||P_self - P_other||`.
    pub fn distance(&self, other: &SubspaceBasis) -> Result<f64> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::AmbientMismatch(self.ambient_dim, other.ambient_dim));
        }
        Ok(op_norm(&(self.projector() - other.projector())))
    }
}

/// Multiplies each column by a unit phase making its largest-modulus entry
/// real positive; basis phases are free, and fixing them keeps defect
/// coordinates and reports reproducible.
fn normalize_column_phases(m: &mut CMatrix) {
    for mut col in m.column_iter_mut() {
        let mut best = 0usize;
        let mut best_norm = 0.0;
        for (i, z) in col.iter().enumerate() {
            if z.norm() > best_norm {
                best_norm = z.norm();
                best = i;
            }
        }
        if best_norm > 0.0 {
            let phase = col[best] / cplx(best_norm, 0.0);
            col *= phase.conj();
        }
    }
}

/// Orthonormal basis of the column space, with rank decided by
/// `sigma >= rank_tol * sigma_max`.
pub fn range_basis(a: &CMatrix, tol: &Tolerance) -> SubspaceBasis {
    let ambient = a.nrows();
    if ambient == 0 || a.ncols() == 0 {
        return SubspaceBasis::zero(ambient);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("svd with u requested");
    let sv = svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    // A matrix whose largest singular value is below the equality threshold
    // is numerically zero, whatever the relative rank cut says.
    if smax <= tol.eq_tol {
        return SubspaceBasis::zero(ambient);
    }
    let rank = sv.iter().filter(|&&s| s >= tol.rank_tol * smax).count();
    let mut basis = u.columns(0, rank).into_owned();
    normalize_column_phases(&mut basis);
    SubspaceBasis {
        ambient_dim: ambient,
        basis,
    }
}

/// Orthonormal basis of the null space via an SVD threshold.
pub fn kernel_basis(a: &CMatrix, tol: &Tolerance) -> SubspaceBasis {
    let ambient = a.ncols();
    if ambient == 0 {
        return SubspaceBasis::zero(0);
    }
    if a.nrows() == 0 {
        return SubspaceBasis::full(ambient);
    }
    // Pad with zero rows so the thin SVD carries a full set of right
    // singular vectors (A^H A is unchanged by the padding).
    let work = if a.nrows() < a.ncols() {
        let mut padded = CMatrix::zeros(a.ncols(), a.ncols());
        padded.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
        padded
    } else {
        a.clone()
    };
    if max_abs(&work) <= tol.eq_tol / (ambient as f64) {
        return SubspaceBasis::full(ambient);
    }
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("svd with v_t requested");
    let sv = svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax <= tol.eq_tol {
        return SubspaceBasis::full(ambient);
    }
    let rank = sv.iter().filter(|&&s| s >= tol.rank_tol * smax).count();
    let v = v_t.adjoint();
    let mut basis = v.columns(rank, ambient - rank).into_owned();
    normalize_column_phases(&mut basis);
    SubspaceBasis {
        ambient_dim: ambient,
        basis,
    }
}

/// Outcome of the orthogonal-Procrustes alignment.
#[derive(Debug, Clone)]
pub enum Alignment {
    /// Unique unitary minimizer of `||U a - b||` in Frobenius norm.
    Unitary(CMatrix),
    /// The Procrustes problem is rank-degenerate; no unique minimizer.
    Undetermined,
}

/// Solves `min ||U a - b||_F` over unitary `U` via the SVD of `b a^H`.
pub fn align_unitary(a: &CMatrix, b: &CMatrix, tol: &Tolerance) -> Result<Alignment> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch(a.nrows(), a.ncols(), b.nrows(), b.ncols()));
    }
    let k = a.nrows();
    if k == 0 {
        return Ok(Alignment::Unitary(CMatrix::zeros(0, 0)));
    }
    let c = b * a.adjoint();
    let svd = c.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin < tol.rank_tol * smax {
        return Ok(Alignment::Undetermined);
    }
    let u = svd.u.expect("svd with u requested");
    let v_t = svd.v_t.expect("svd with v_t requested");
    Ok(Alignment::Unitary(u * v_t))
}

/// Least-squares solve of `X * A = B` for `X`, assuming `A` has full row
/// rank; returns the solution together with a condition estimate of `A A^H`.
pub fn solve_on_range(a: &CMatrix, b: &CMatrix) -> Result<(CMatrix, f64)> {
    if a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch(a.nrows(), a.ncols(), b.nrows(), b.ncols()));
    }
    let r = a.nrows();
    if r == 0 {
        return Ok((CMatrix::zeros(b.nrows(), 0), 1.0));
    }
    let gram = a * a.adjoint();
    let (vals, vecs) = herm_eig(&gram);
    let vmax = vals.iter().copied().fold(0.0, f64::max);
    let vmin = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if vmax <= 0.0 || vmin <= 0.0 {
        return Err(Error::IllConditioned { cond: f64::INFINITY });
    }
    let cond = vmax / vmin;
    // Pseudo-inverse through the eigenbasis of the Gram matrix.
    let mut inv_scaled = vecs.clone();
    for (j, mut col) in inv_scaled.column_iter_mut().enumerate() {
        col *= cplx(1.0 / vals[j], 0.0);
    }
    let gram_inv = &inv_scaled * vecs.adjoint();
    Ok((b * a.adjoint() * gram_inv, cond))
}

/// Horizontal concatenation.
pub fn hcat(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.first().map_or(0, |m| m.nrows());
    let cols: usize = blocks.iter().map(|m| m.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for m in blocks {
        assert_eq!(m.nrows(), rows, "hcat: row mismatch");
        out.view_mut((0, at), (rows, m.ncols())).copy_from(*m);
        at += m.ncols();
    }
    out
}

/// Vertical concatenation.
pub fn vcat(blocks: &[&CMatrix]) -> CMatrix {
    let cols = blocks.first().map_or(0, |m| m.ncols());
    let rows: usize = blocks.iter().map(|m| m.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for m in blocks {
        assert_eq!(m.ncols(), cols, "vcat: column mismatch");
        out.view_mut((at, 0), (m.nrows(), cols)).copy_from(*m);
        at += m.nrows();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    pub(crate) fn random_cmatrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn random_unitary(rng: &mut impl Rng, k: usize) -> CMatrix {
        let a = random_cmatrix(rng, k, k);
        let qr = a.qr();
        qr.q()
    }

    #[test]
    fn psd_sqrt_identity_and_diag() {
        let eye = CMatrix::identity(2, 2);
        let root = psd_sqrt(&eye, &tol()).unwrap();
        assert!(max_abs(&(&root - &eye)) < 1e-14);

        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![cplx(4.0, 0.0), cplx(0.0, 0.0)]));
        let root = psd_sqrt(&d, &tol()).unwrap();
        let expected =
            CMatrix::from_diagonal(&CVector::from_vec(vec![cplx(2.0, 0.0), cplx(0.0, 0.0)]));
        assert!(max_abs(&(&root - &expected)) < 1e-14);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[cplx(1.0, 0.0), cplx(0.25, 0.0), cplx(0.25, 0.0), cplx(1.0, 0.0)],
        );
        let b = psd_sqrt(&a, &tol()).unwrap();
        assert!(max_abs(&(&b * &b - &a)) < 1e-12);
    }

    #[test]
    fn psd_sqrt_random_psd_up_to_20() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &k in &[1usize, 3, 8, 20] {
            let g = random_cmatrix(&mut rng, k, k);
            let a = &g * g.adjoint();
            let b = psd_sqrt(&a, &tol()).unwrap();
            assert!(max_abs(&(&b * &b - &a)) < 1e-8 * (1.0 + max_abs(&a)));
        }
    }

    #[test]
    fn psd_sqrt_rejects_non_hermitian_and_indefinite() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[cplx(1.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0)],
        );
        assert!(matches!(
            psd_sqrt(&a, &tol()),
            Err(Error::NotHermitian { .. })
        ));
        let b = CMatrix::from_diagonal(&CVector::from_vec(vec![cplx(1.0, 0.0), cplx(-0.5, 0.0)]));
        assert!(matches!(psd_sqrt(&b, &tol()), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn range_basis_examples() {
        let zero = CMatrix::zeros(3, 2);
        assert_eq!(range_basis(&zero, &tol()).dim(), 0);

        let col = CMatrix::from_row_slice(2, 1, &[cplx(1.0, 0.0), cplx(1.0, 0.0)]) / cplx(2f64.sqrt(), 0.0);
        let basis = range_basis(&col, &tol());
        assert_eq!(basis.dim(), 1);

        // Defect of T = [1/2, 1/2]: I - T^H T has eigenvalues 1/2 and 1,
        // so its PSD square root has full range.
        let t = CMatrix::from_row_slice(1, 2, &[cplx(0.5, 0.0), cplx(0.5, 0.0)]);
        let defect = CMatrix::identity(2, 2) - t.adjoint() * &t;
        let delta = psd_sqrt(&defect, &tol()).unwrap();
        let (mut eigs, _) = super::herm_eig(&delta);
        let mut v: Vec<f64> = eigs.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        assert!((v[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((v[1] - 1.0).abs() < 1e-12);
        eigs.apply(|_| ());
        assert_eq!(range_basis(&delta, &tol()).dim(), 2);
    }

    #[test]
    fn kernel_basis_examples() {
        assert_eq!(kernel_basis(&CMatrix::identity(3, 3), &tol()).dim(), 0);

        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![cplx(0.0, 0.0), cplx(1.0, 0.0)]));
        let ker = kernel_basis(&d, &tol());
        assert_eq!(ker.dim(), 1);
        assert!((ker.basis()[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(ker.basis()[(1, 0)].norm() < 1e-12);

        let ones = CMatrix::from_element(2, 2, cplx(1.0, 0.0));
        let ker = kernel_basis(&ones, &tol());
        assert_eq!(ker.dim(), 1);
        let v = ker.basis().column(0);
        assert!((v[0] + v[1]).norm() < 1e-12);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        // More columns than rows: padding path.
        let a = CMatrix::from_row_slice(1, 3, &[cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)]);
        let ker = kernel_basis(&a, &tol());
        assert_eq!(ker.dim(), 2);
        for j in 0..2 {
            assert!(ker.basis()[(0, j)].norm() < 1e-12);
        }
    }

    #[test]
    fn rank_nullity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let rows = rng.gen_range(1..=6);
            let cols = rng.gen_range(1..=6);
            let a = random_cmatrix(&mut rng, rows, cols);
            let r = range_basis(&a, &tol()).dim();
            let k = kernel_basis(&a, &tol()).dim();
            assert_eq!(r + k, cols);
        }
    }

    #[test]
    fn subspace_ops_examples() {
        let e1 = SubspaceBasis::from_orthonormal(
            CMatrix::from_row_slice(2, 1, &[cplx(1.0, 0.0), cplx(0.0, 0.0)]),
            &tol(),
        )
        .unwrap();
        let comp = e1.complement(&tol());
        assert_eq!(comp.dim(), 1);
        assert!(comp.basis()[(0, 0)].norm() < 1e-12);

        let e12 = SubspaceBasis::from_orthonormal(
            CMatrix::from_row_slice(
                3,
                2,
                &[
                    cplx(1.0, 0.0),
                    cplx(0.0, 0.0),
                    cplx(0.0, 0.0),
                    cplx(1.0, 0.0),
                    cplx(0.0, 0.0),
                    cplx(0.0, 0.0),
                ],
            ),
            &tol(),
        )
        .unwrap();
        let e23 = SubspaceBasis::from_orthonormal(
            CMatrix::from_row_slice(
                3,
                2,
                &[
                    cplx(0.0, 0.0),
                    cplx(0.0, 0.0),
                    cplx(1.0, 0.0),
                    cplx(0.0, 0.0),
                    cplx(0.0, 0.0),
                    cplx(1.0, 0.0),
                ],
            ),
            &tol(),
        )
        .unwrap();
        let meet = e12.intersect(&e23, &tol()).unwrap();
        assert_eq!(meet.dim(), 1);
        assert!(meet.basis()[(0, 0)].norm() < 1e-10);
        assert!(meet.basis()[(2, 0)].norm() < 1e-10);
        assert!((meet.basis()[(1, 0)].norm() - 1.0).abs() < 1e-10);

        let diag = SubspaceBasis::from_orthonormal(
            CMatrix::from_row_slice(2, 1, &[cplx(1.0, 0.0), cplx(1.0, 0.0)]) / cplx(2f64.sqrt(), 0.0),
            &tol(),
        )
        .unwrap();
        let e1_only = SubspaceBasis::from_orthonormal(
            CMatrix::from_row_slice(2, 1, &[cplx(1.0, 0.0), cplx(0.0, 0.0)]),
            &tol(),
        )
        .unwrap();
        assert!(!diag.contains(&e1_only, &tol()).unwrap());
    }

    #[test]
    fn subspace_results_stay_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = tol();
        for _ in 0..10 {
            let a = range_basis(&random_cmatrix(&mut rng, 5, 2), &t);
            let b = range_basis(&random_cmatrix(&mut rng, 5, 3), &t);
            for s in [
                a.complement(&t),
                a.intersect(&b, &t).unwrap(),
                a.sum(&b, &t).unwrap(),
            ] {
                SubspaceBasis::from_orthonormal(s.basis().clone(), &t).unwrap();
            }
        }
    }

    #[test]
    fn align_unitary_identity() {
        let eye = CMatrix::identity(3, 3);
        match align_unitary(&eye, &eye, &tol()).unwrap() {
            Alignment::Unitary(u) => assert!(max_abs(&(&u - &eye)) < 1e-12),
            Alignment::Undetermined => panic!("expected a unitary"),
        }
    }

    #[test]
    fn align_unitary_recovers_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let a = random_cmatrix(&mut rng, 4, 6);
            let q = random_unitary(&mut rng, 4);
            let b = &q * &a;
            match align_unitary(&a, &b, &tol()).unwrap() {
                Alignment::Unitary(u) => {
                    assert!(op_norm(&(&u * &a - &b)) < 1e-10);
                    assert!(unitary_residual(&u) < 1e-10);
                }
                Alignment::Undetermined => panic!("full-rank alignment must resolve"),
            }
        }
    }

    #[test]
    fn align_unitary_degenerate() {
        let z = CMatrix::zeros(2, 2);
        assert!(matches!(
            align_unitary(&z, &z, &tol()).unwrap(),
            Alignment::Undetermined
        ));
    }

    #[test]
    fn solve_on_range_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_cmatrix(&mut rng, 3, 7);
        let x = random_cmatrix(&mut rng, 4, 3);
        let b = &x * &a;
        let (got, cond) = solve_on_range(&a, &b).unwrap();
        assert!(max_abs(&(&got - &x)) < 1e-9);
        assert!(cond.is_finite());
    }
}
