//! Row contractions `[T_1, ..., T_n]` on a finite-dimensional space, the
//! completely positive map `Phi(X) = sum T_i X T_i^*`, class membership
//! (pure, C.1, coisometric, c.n.c., power bounded), and the two canonical
//! triangulations.

use crate::error::{Error, Result};
use crate::numerics::{
    hcat, kernel_basis, max_abs, max_eigenvalue, min_eigenvalue, op_norm, CMatrix, SubspaceBasis,
    Tolerance,
};

/// Divergence guard for power-bound probing.
const POWER_BOUND_LIMIT: f64 = 1e8;

/// An `n`-tuple of `d x d` matrices with `I - sum T_i T_i^* >= -eq_tol`.
#[derive(Debug, Clone)]
pub struct RowContraction {
    t: Vec<CMatrix>,
    d: usize,
    tol: Tolerance,
}

impl RowContraction {
    pub fn new(t: Vec<CMatrix>, tol: Tolerance) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::InvalidInput("tuple must have n >= 1 entries".into()));
        }
        let d = t[0].nrows();
        for m in &t {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::ShapeMismatch(m.nrows(), m.ncols(), d, d));
            }
            crate::numerics::check_finite(m)?;
        }
        let defect = CMatrix::identity(d, d) - phi_map(&t, &CMatrix::identity(d, d));
        let lambda = min_eigenvalue(&defect);
        if lambda < -tol.eq_tol {
            return Err(Error::NotRowContraction { eigenvalue: lambda });
        }
        Ok(RowContraction { t, d, tol })
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.t
    }

    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }

    /// The row operator `[T_1 ... T_n] : C^{nd} -> C^d`.
    pub fn row_matrix(&self) -> CMatrix {
        let refs: Vec<&CMatrix> = self.t.iter().collect();
        hcat(&refs)
    }

    /// One application of `Phi`.
    pub fn phi(&self, x: &CMatrix) -> CMatrix {
        phi_map(&self.t, x)
    }

    /// `Phi^k(I)`, computed by `k`-fold application (never by word sums).
    pub fn phi_iterate(&self, k: usize) -> CMatrix {
        let mut x = CMatrix::identity(self.d, self.d);
        for _ in 0..k {
            x = self.phi(&x);
        }
        x
    }

    /// Iterates `Phi^k(I)` to its (monotone) limit.
    pub fn asymptotic_limit(&self, horizon: usize, conv_tol: f64) -> AsymptoticLimit {
        let mut x = CMatrix::identity(self.d, self.d);
        let mut residual = f64::INFINITY;
        for k in 0..horizon {
            let next = self.phi(&x);
            residual = max_abs(&(&next - &x));
            x = next;
            if residual <= conv_tol {
                return AsymptoticLimit {
                    limit: x,
                    converged: true,
                    iterations: k + 1,
                    residual,
                };
            }
        }
        AsymptoticLimit {
            limit: x,
            converged: false,
            iterations: horizon,
            residual,
        }
    }

    /// Class flags; convergence failures yield `None`, never a wrong bool.
    pub fn classify(&self, horizon: usize, conv_tol: f64) -> TupleClassification {
        let a = self.asymptotic_limit(horizon, conv_tol);
        let (pure_c0, c1) = if a.converged {
            let zero = op_norm(&a.limit) <= self.tol.eq_tol.max(10.0 * conv_tol);
            let kernel_trivial = min_eigenvalue(&a.limit) > self.tol.eq_tol.max(10.0 * conv_tol);
            (Some(zero), Some(kernel_trivial))
        } else {
            (None, None)
        };
        let coisometric = {
            let defect = CMatrix::identity(self.d, self.d) - self.phi_iterate(1);
            op_norm(&defect) <= self.tol.eq_tol
        };
        let hc = self.compute_hc();
        let cnc = hc.dim() == 0;
        // A row contraction is always power bounded with M <= 1.
        let bound = (0..=horizon.min(16))
            .map(|k| op_norm(&self.phi_iterate(k)).sqrt())
            .fold(0.0, f64::max);
        TupleClassification {
            pure_c0,
            c1,
            coisometric,
            cnc,
            dim_hc: hc.dim(),
            power_bounded: true,
            power_bound: bound,
            limit: a,
        }
    }

    /// The largest `T_i^*`-invariant subspace of `ker(I - Phi(I))`; the
    /// tuple acts coisometrically exactly there.
    pub fn compute_hc(&self) -> SubspaceBasis {
        let kernel_tol = Tolerance {
            rank_tol: self.tol.rank_tol.max(self.tol.eq_tol),
            eq_tol: self.tol.eq_tol,
        };
        let defect = CMatrix::identity(self.d, self.d) - self.phi_iterate(1);
        let mut m = kernel_basis(&defect, &kernel_tol);
        for _ in 0..=self.d {
            if m.dim() == 0 {
                break;
            }
            let mut next = m.clone();
            let complement_proj =
                CMatrix::identity(self.d, self.d) - m.projector();
            for ti in &self.t {
                // preimage of M under T_i^*: kernel of (I - P_M) T_i^*
                let pre = kernel_basis(&(&complement_proj * ti.adjoint()), &kernel_tol);
                next = next.intersect(&pre, &self.tol).expect("same ambient");
            }
            if next.dim() == m.dim() {
                break;
            }
            m = next;
        }
        m
    }

    /// Triangulation `H = H_c (+) H_cnc` with a coisometric upper block and
    /// a c.n.c. lower block; block structure is a theorem, so violations
    /// signal a numerical problem rather than bad input.
    pub fn triangulate_c_cnc(&self) -> Result<CCncTriangulation> {
        let hc = self.compute_hc();
        let hcnc = hc.complement(&self.tol);
        let a: Vec<CMatrix> = self
            .t
            .iter()
            .map(|ti| hc.basis().adjoint() * ti * hc.basis())
            .collect();
        let b: Vec<CMatrix> = self
            .t
            .iter()
            .map(|ti| hcnc.basis().adjoint() * ti * hcnc.basis())
            .collect();
        let mut structure_residual: f64 = 0.0;
        for ti in &self.t {
            let upper_right = hc.basis().adjoint() * ti * hcnc.basis();
            structure_residual = structure_residual.max(max_abs(&upper_right));
        }
        if structure_residual > self.tol.eq_tol {
            return Err(Error::StructureViolation(format!(
                "c/cnc triangulation upper-right block {structure_residual:.3e}"
            )));
        }
        if hc.dim() > 0 {
            let defect = CMatrix::identity(hc.dim(), hc.dim()) - phi_map(&a, &CMatrix::identity(hc.dim(), hc.dim()));
            if op_norm(&defect) > 10.0 * self.tol.eq_tol {
                return Err(Error::StructureViolation(format!(
                    "coisometric block defect {:.3e}",
                    op_norm(&defect)
                )));
            }
        }
        if hcnc.dim() > 0 {
            let sub = RowContraction::new(b.clone(), self.tol)?;
            let sub_hc = sub.compute_hc();
            if sub_hc.dim() != 0 {
                return Err(Error::StructureViolation(format!(
                    "cnc block has residual H_c of dim {}",
                    sub_hc.dim()
                )));
            }
        }
        Ok(CCncTriangulation {
            h_c: hc,
            h_cnc: hcnc,
            coisometric_block: a,
            cnc_block: b,
        })
    }

    /// Triangulation of type (C.0, 0; *, C.1) from the kernel of the
    /// asymptotic limit.
    pub fn triangulate_c0_c1(&self, horizon: usize, conv_tol: f64) -> Result<C0C1Triangulation> {
        let a = self.asymptotic_limit(horizon, conv_tol);
        if !a.converged {
            return Err(Error::NotConverged {
                horizon,
                residual: a.residual,
            });
        }
        let kernel_tol = Tolerance {
            rank_tol: self.tol.rank_tol.max(self.tol.eq_tol.max(10.0 * conv_tol)),
            eq_tol: self.tol.eq_tol,
        };
        let h0 = kernel_basis(&a.limit, &kernel_tol);
        let h1 = h0.complement(&self.tol);
        // H_0 is invariant under each adjoint.
        let mut inv_residual: f64 = 0.0;
        if h0.dim() > 0 {
            let p_perp = CMatrix::identity(self.d, self.d) - h0.projector();
            for ti in &self.t {
                inv_residual = inv_residual.max(op_norm(&(&p_perp * ti.adjoint() * h0.basis())));
            }
        }
        if inv_residual > self.tol.eq_tol.max(100.0 * conv_tol) {
            return Err(Error::StructureViolation(format!(
                "H_0 not adjoint-invariant (residual {inv_residual:.3e})"
            )));
        }
        let a_block: Vec<CMatrix> = self
            .t
            .iter()
            .map(|ti| h0.basis().adjoint() * ti * h0.basis())
            .collect();
        let b_block: Vec<CMatrix> = self
            .t
            .iter()
            .map(|ti| h1.basis().adjoint() * ti * h1.basis())
            .collect();
        // Verify the classes of the diagonal blocks.
        if h0.dim() > 0 {
            let sub = RowContraction::new(a_block.clone(), self.tol)?;
            let la = sub.asymptotic_limit(horizon, conv_tol);
            if la.converged && op_norm(&la.limit) > self.tol.eq_tol.max(100.0 * conv_tol) {
                return Err(Error::StructureViolation(format!(
                    "C.0 block limit has norm {:.3e}",
                    op_norm(&la.limit)
                )));
            }
        }
        if h1.dim() > 0 {
            let sub = RowContraction::new(b_block.clone(), self.tol)?;
            let lb = sub.asymptotic_limit(horizon, conv_tol);
            if lb.converged && min_eigenvalue(&lb.limit) <= self.tol.eq_tol {
                return Err(Error::StructureViolation(format!(
                    "C.1 block limit has kernel (min eig {:.3e})",
                    min_eigenvalue(&lb.limit)
                )));
            }
        }
        Ok(C0C1Triangulation {
            h_0: h0,
            h_1: h1,
            c0_block: a_block,
            c1_block: b_block,
        })
    }

    /// Max over `i` of `||(I - P_M) T_i P_M||`: zero iff `M` is jointly
    /// invariant under the tuple.
    pub fn joint_invariance_residual(&self, m: &SubspaceBasis) -> Result<f64> {
        if m.ambient_dim() != self.d {
            return Err(Error::AmbientMismatch(m.ambient_dim(), self.d));
        }
        if m.dim() == 0 {
            return Ok(0.0);
        }
        let p_perp = CMatrix::identity(self.d, self.d) - m.projector();
        Ok(self
            .t
            .iter()
            .map(|ti| op_norm(&(&p_perp * ti * m.basis())))
            .fold(0.0, f64::max))
    }

    /// For coisometric tuples, `M` is invariant iff
    /// `sum T_i P_M T_i^* <= P_M`; returns the violation `lambda_max`.
    pub fn coisometric_invariance_excess(&self, m: &SubspaceBasis) -> Result<f64> {
        if m.ambient_dim() != self.d {
            return Err(Error::AmbientMismatch(m.ambient_dim(), self.d));
        }
        let diff = self.phi(&m.projector()) - m.projector();
        Ok(max_eigenvalue(&diff))
    }
}

/// `Phi(X) = sum T_i X T_i^*` for a raw tuple.
pub fn phi_map(t: &[CMatrix], x: &CMatrix) -> CMatrix {
    let d = t[0].nrows();
    let mut acc = CMatrix::zeros(d, d);
    for ti in t {
        acc += ti * x * ti.adjoint();
    }
    acc
}

/// A tuple verified power bounded over a probe horizon (no contraction
/// requirement).
#[derive(Debug, Clone)]
pub struct PowerBoundedTuple {
    t: Vec<CMatrix>,
    bound: f64,
}

impl PowerBoundedTuple {
    /// Probes `||Phi^k(I)||` for `k <= horizon`; rejects divergence.
    pub fn probe(t: Vec<CMatrix>, horizon: usize) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::InvalidInput("tuple must have n >= 1 entries".into()));
        }
        let d = t[0].nrows();
        for m in &t {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::ShapeMismatch(m.nrows(), m.ncols(), d, d));
            }
        }
        let mut x = CMatrix::identity(d, d);
        let mut worst: f64 = 1.0;
        for k in 1..=horizon {
            x = phi_map(&t, &x);
            let norm = op_norm(&x);
            worst = worst.max(norm);
            if norm > POWER_BOUND_LIMIT {
                return Err(Error::NotPowerBounded { norm, step: k });
            }
        }
        Ok(PowerBoundedTuple {
            t,
            bound: worst.sqrt(),
        })
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.t
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn d(&self) -> usize {
        self.t[0].nrows()
    }

    /// The probed constant `M` with `sup_k ||Phi^k(I)|| <= M^2`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn phi(&self, x: &CMatrix) -> CMatrix {
        phi_map(&self.t, x)
    }
}

/// Result of the monotone `Phi^k(I)` iteration.
#[derive(Debug, Clone)]
pub struct AsymptoticLimit {
    pub limit: CMatrix,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl AsymptoticLimit {
    pub fn require_converged(self, horizon: usize) -> Result<CMatrix> {
        if self.converged {
            Ok(self.limit)
        } else {
            Err(Error::NotConverged {
                horizon,
                residual: self.residual,
            })
        }
    }
}

/// Class flags for a row contraction; `None` means the probe did not
/// converge.
#[derive(Debug, Clone)]
pub struct TupleClassification {
    pub pure_c0: Option<bool>,
    pub c1: Option<bool>,
    pub coisometric: bool,
    pub cnc: bool,
    pub dim_hc: usize,
    pub power_bounded: bool,
    pub power_bound: f64,
    pub limit: AsymptoticLimit,
}

/// Triangulation with respect to `H = H_c (+) H_cnc`.
#[derive(Debug, Clone)]
pub struct CCncTriangulation {
    pub h_c: SubspaceBasis,
    pub h_cnc: SubspaceBasis,
    pub coisometric_block: Vec<CMatrix>,
    pub cnc_block: Vec<CMatrix>,
}

/// Triangulation with respect to `H = H_0 (+) H_1`.
#[derive(Debug, Clone)]
pub struct C0C1Triangulation {
    pub h_0: SubspaceBasis,
    pub h_1: SubspaceBasis,
    pub c0_block: Vec<CMatrix>,
    pub c1_block: Vec<CMatrix>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cplx;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn scalar_tuple(vals: &[f64]) -> RowContraction {
        let t = vals
            .iter()
            .map(|&v| CMatrix::from_element(1, 1, cplx(v, 0.0)))
            .collect();
        RowContraction::new(t, tol()).unwrap()
    }

    /// n=2, d=2, T_1 = T_2 = [[0,0],[0,1/sqrt(2)]]: the limit is diag(0,1).
    fn diag_fixture() -> RowContraction {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                cplx(0.0, 0.0),
                cplx(0.0, 0.0),
                cplx(0.0, 0.0),
                cplx(1.0 / 2f64.sqrt(), 0.0),
            ],
        );
        RowContraction::new(vec![m.clone(), m], tol()).unwrap()
    }

    /// A C.1 (non-coisometric) fixture: upper-triangular conjugate of a
    /// reducible coisometry; its asymptotic limit is diag(1/2, 1).
    pub(crate) fn c1_fixture() -> RowContraction {
        let r = 1.0 / 2f64.sqrt();
        let t1 = CMatrix::from_row_slice(
            2,
            2,
            &[cplx(0.6, 0.0), cplx(0.4, 0.0), cplx(0.0, 0.0), cplx(r, 0.0)],
        );
        let t2 = CMatrix::from_row_slice(
            2,
            2,
            &[cplx(0.0, 0.0), cplx(-0.4, 0.0), cplx(0.0, 0.0), cplx(r, 0.0)],
        );
        RowContraction::new(vec![t1, t2], tol()).unwrap()
    }

    #[test]
    fn rejects_non_contraction() {
        let t = vec![CMatrix::from_element(1, 1, cplx(0.9, 0.0)); 2];
        assert!(matches!(
            RowContraction::new(t, tol()),
            Err(Error::NotRowContraction { .. })
        ));
    }

    #[test]
    fn phi_iterate_examples() {
        let t = scalar_tuple(&[0.5, 0.5]);
        for k in 0..6 {
            let val = t.phi_iterate(k)[(0, 0)].re;
            assert!((val - 0.5f64.powi(k as i32)).abs() < 1e-14);
        }
        let co = scalar_tuple(&[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]);
        for k in 0..6 {
            assert!((co.phi_iterate(k)[(0, 0)].re - 1.0).abs() < 1e-14);
        }
        assert_eq!(t.phi_iterate(0), CMatrix::identity(1, 1));
    }

    #[test]
    fn phi_is_monotone_nonincreasing() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let d = rng.gen_range(1..=4);
            let raw: Vec<CMatrix> = (0..2)
                .map(|_| {
                    CMatrix::from_fn(d, d, |_, _| {
                        cplx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    })
                })
                .collect();
            let s = op_norm(&phi_map(&raw, &CMatrix::identity(d, d))).sqrt();
            let scale = s * rng.gen_range(1.0..1.5);
            let t: Vec<CMatrix> = raw.iter().map(|m| m.scale(1.0 / scale)).collect();
            let rc = RowContraction::new(t, tol()).unwrap();
            for k in 0..5 {
                let diff = rc.phi_iterate(k) - rc.phi_iterate(k + 1);
                assert!(min_eigenvalue(&diff) >= -1e-10);
            }
        }
    }

    #[test]
    fn asymptotic_limit_examples() {
        let pure = scalar_tuple(&[0.5, 0.5]);
        let a = pure.asymptotic_limit(200, 1e-12);
        assert!(a.converged);
        assert!(op_norm(&a.limit) < 1e-10);

        let fixture = diag_fixture();
        let a = fixture.asymptotic_limit(200, 1e-12);
        assert!(a.converged);
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cplx(0.0, 0.0),
            cplx(1.0, 0.0),
        ]));
        assert!(max_abs(&(&a.limit - &expected)) < 1e-10);

        let unitary = scalar_tuple(&[1.0]);
        let a = unitary.asymptotic_limit(10, 1e-12);
        assert!(a.converged);
        assert!(max_abs(&(&a.limit - CMatrix::identity(1, 1))) < 1e-14);
    }

    #[test]
    fn classify_examples() {
        let pure = scalar_tuple(&[0.5, 0.5]);
        let c = pure.classify(200, 1e-12);
        assert_eq!(c.pure_c0, Some(true));
        assert!(c.cnc);
        assert!(!c.coisometric);

        let co = scalar_tuple(&[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]);
        let c = co.classify(200, 1e-12);
        assert!(c.coisometric);
        assert!(!c.cnc);
        assert_eq!(c.c1, Some(true));

        let mixed = diag_fixture();
        let c = mixed.classify(200, 1e-12);
        assert_eq!(c.pure_c0, Some(false));
        assert_eq!(c.c1, Some(false));
    }

    #[test]
    fn c1_fixture_is_c1_not_coisometric() {
        let rc = c1_fixture();
        let c = rc.classify(500, 1e-13);
        assert_eq!(c.pure_c0, Some(false));
        assert_eq!(c.c1, Some(true));
        assert!(!c.coisometric);
        // Finite dimension: a nonzero asymptotic limit forces H_c != 0.
        assert!(!c.cnc);
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cplx(0.5, 0.0),
            cplx(1.0, 0.0),
        ]));
        assert!(max_abs(&(&c.limit.limit - &expected)) < 1e-9);
    }

    #[test]
    fn compute_hc_examples() {
        assert_eq!(scalar_tuple(&[0.5, 0.5]).compute_hc().dim(), 0);
        assert_eq!(
            scalar_tuple(&[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()])
                .compute_hc()
                .dim(),
            1
        );
        let fixture = diag_fixture();
        let hc = fixture.compute_hc();
        assert_eq!(hc.dim(), 1);
        assert!(hc.basis()[(0, 0)].norm() < 1e-10);
        assert!((hc.basis()[(1, 0)].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hc_invariance_properties() {
        let fixture = diag_fixture();
        let hc = fixture.compute_hc();
        // (I - Phi(I)) vanishes on H_c
        let defect = CMatrix::identity(2, 2) - fixture.phi_iterate(1);
        assert!(op_norm(&(&defect * hc.basis())) < 1e-10);
        // T_i^* H_c inside H_c
        let p_perp = CMatrix::identity(2, 2) - hc.projector();
        for ti in fixture.matrices() {
            assert!(op_norm(&(&p_perp * ti.adjoint() * hc.basis())) < 1e-10);
        }
    }

    #[test]
    fn triangulate_c_cnc_examples() {
        let pure = scalar_tuple(&[0.5, 0.5]);
        let tri = pure.triangulate_c_cnc().unwrap();
        assert_eq!(tri.h_c.dim(), 0);
        assert_eq!(tri.h_cnc.dim(), 1);

        let co = scalar_tuple(&[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]);
        let tri = co.triangulate_c_cnc().unwrap();
        assert_eq!(tri.h_cnc.dim(), 0);

        let fixture = diag_fixture();
        let tri = fixture.triangulate_c_cnc().unwrap();
        assert_eq!(tri.h_c.dim(), 1);
        assert_eq!(tri.h_cnc.dim(), 1);
        // A-block is the scalar coisometry [1/sqrt2, 1/sqrt2] on span{e_2}.
        for a in &tri.coisometric_block {
            assert!((a[(0, 0)].norm() - 1.0 / 2f64.sqrt()).abs() < 1e-10);
        }
        for b in &tri.cnc_block {
            assert!(max_abs(b) < 1e-12);
        }
    }

    #[test]
    fn triangulate_c0_c1_examples() {
        let fixture = diag_fixture();
        let tri = fixture.triangulate_c0_c1(200, 1e-12).unwrap();
        assert_eq!(tri.h_0.dim(), 1);
        assert!((tri.h_0.basis()[(0, 0)].norm() - 1.0).abs() < 1e-10);
        assert_eq!(tri.h_1.dim(), 1);

        let pure = scalar_tuple(&[0.5, 0.5]);
        let tri = pure.triangulate_c0_c1(200, 1e-12).unwrap();
        assert_eq!(tri.h_0.dim(), 1);
        assert_eq!(tri.h_1.dim(), 0);

        let unitary = scalar_tuple(&[1.0]);
        let tri = unitary.triangulate_c0_c1(50, 1e-12).unwrap();
        assert_eq!(tri.h_0.dim(), 0);
    }

    #[test]
    fn mixed_tuple_h1_is_jointly_invariant() {
        // Neither C.0 nor C.1: H_1 is a nonzero proper joint invariant
        // subspace for the tuple itself.
        let fixture = diag_fixture();
        let tri = fixture.triangulate_c0_c1(200, 1e-12).unwrap();
        assert!(tri.h_1.dim() > 0 && tri.h_1.dim() < 2);
        assert!(fixture.joint_invariance_residual(&tri.h_1).unwrap() < 1e-10);
    }

    #[test]
    fn power_bounded_probe() {
        let x = CMatrix::from_row_slice(
            2,
            2,
            &[cplx(1.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0)],
        );
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            cplx(0.0, 1.0),
            cplx(0.0, -1.0),
        ]));
        let xinv = CMatrix::from_row_slice(
            2,
            2,
            &[cplx(1.0, 0.0), cplx(-1.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0)],
        );
        let t = &x * &d * &xinv;
        let pb = PowerBoundedTuple::probe(vec![t], 100).unwrap();
        assert!(pb.bound() < 4.0);

        let big = CMatrix::from_element(1, 1, cplx(2.0, 0.0));
        assert!(matches!(
            PowerBoundedTuple::probe(vec![big], 100),
            Err(Error::NotPowerBounded { .. })
        ));
    }
}
