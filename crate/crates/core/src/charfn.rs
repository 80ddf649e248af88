//! The characteristic function of a row contraction: defect operators and
//! spaces, symbol evaluation by the explicit formula, Fourier coefficient
//! extraction, and the dilation-geometric construction it must coincide
//! with.
//!
//! Coefficients are extracted from symbol evaluation by basis pairing, never
//! assembled from a hand-derived index formula; the reversal convention is
//! enforced by construction and double-checked against `to_matrix` on the
//! constants.

use crate::dilation::{fourier_representation, DilationSystem};
use crate::error::{Error, Result};
use crate::fockspace::TruncatedFock;
use crate::multianalytic::MultiAnalyticOp;
use crate::numerics::{
    op_norm, psd_sqrt, range_basis, CMatrix, CVector, SubspaceBasis, Tolerance,
};
use crate::rowcontraction::RowContraction;

/// Defect operators and spaces of a row contraction.
#[derive(Debug, Clone)]
pub struct DefectData {
    /// `(I - sum T_i T_i^*)^{1/2}` on `C^d`.
    pub delta_t_star: CMatrix,
    /// `(I - T^* T)^{1/2}` on `C^{nd}`.
    pub delta_t: CMatrix,
    /// Range of `delta_t_star`.
    pub d_star: SubspaceBasis,
    /// Range of `delta_t`.
    pub d: SubspaceBasis,
}

impl DefectData {
    /// Slot injection `iota_i : C^d -> C^{nd}` (zero-based slot index).
    pub fn slot_injection(&self, i: usize, d: usize) -> CMatrix {
        let n = self.delta_t.nrows() / d;
        debug_assert!(i < n);
        let mut m = CMatrix::zeros(n * d, d);
        for j in 0..d {
            m[(i * d + j, j)] = crate::numerics::cplx(1.0, 0.0);
        }
        m
    }
}

/// Computes the defect operators and their range bases.
pub fn defects(t: &RowContraction) -> Result<DefectData> {
    let tol = t.tol();
    let d = t.d();
    let nd = t.n() * d;
    let eye_h = CMatrix::identity(d, d);
    let delta_star_sq = &eye_h - t.phi(&eye_h);
    let delta_t_star = psd_sqrt(&delta_star_sq, tol)?;
    let row = t.row_matrix();
    let delta_sq = CMatrix::identity(nd, nd) - row.adjoint() * &row;
    let delta_t = psd_sqrt(&delta_sq, tol)?;
    let d_star = range_basis(&delta_t_star, tol);
    let d_range = range_basis(&delta_t, tol);
    Ok(DefectData {
        delta_t_star,
        delta_t,
        d_star,
        d: d_range,
    })
}

/// Evaluates the characteristic symbol on a defect vector given in
/// `D`-coordinates, producing the coordinates of a vector of
/// `F^2_{<=N_w} (x) D_*` (in `D_*`-coordinates).
///
/// Degree 0 carries `-T h`; the word `beta = g_i alpha` carries
/// `Delta_{T^*} T_{alpha}^* P_i Delta_T h`.
pub fn char_symbol(
    t: &RowContraction,
    defect: &DefectData,
    h_coords: &CVector,
    n_w: usize,
) -> Result<CVector> {
    let tol = t.tol();
    let d = t.d();
    let dim_d = defect.d.dim();
    let dim_d_star = defect.d_star.dim();
    if h_coords.len() != dim_d {
        return Err(Error::ShapeMismatch(h_coords.len(), 1, dim_d, 1));
    }
    let out_space = TruncatedFock::new(t.n() as u32, n_w, dim_d_star)?;
    let mut out = CVector::zeros(out_space.dim());
    if dim_d_star == 0 {
        return Ok(out);
    }

    let h_ambient = defect.d.basis() * h_coords;
    let delta_h = &defect.delta_t * &h_ambient;
    // Slot components of Delta_T h.
    let slots: Vec<CVector> = (0..t.n())
        .map(|i| CVector::from_fn(d, |j, _| delta_h[i * d + j]))
        .collect();

    // Degree 0: -(T h), compressed to D_*-coordinates.
    let minus_th = -(t.row_matrix() * &h_ambient);
    let residual0 = &minus_th - defect.d_star.projector() * &minus_th;
    if residual0.norm() > tol.eq_tol {
        return Err(Error::StructureViolation(format!(
            "degree-0 symbol component leaves D_* (residual {:.3e})",
            residual0.norm()
        )));
    }
    let deg0 = defect.d_star.basis().adjoint() * &minus_th;
    for k in 0..dim_d_star {
        out[k] = deg0[k];
    }

    // Degree >= 1: walk tails in graded order, accumulating the adjoint
    // products T_alpha^* = T_{i_k}^* ... T_{i_1}^*. The innermost factor
    // belongs to the first letter, so each word extends its
    // longest-proper-prefix parent by the adjoint of its LAST letter;
    // graded-lex enumeration is prefix-closed, so the parent is available.
    let tail_space = TruncatedFock::new(t.n() as u32, n_w.saturating_sub(1), 1)?;
    let mut tails: Vec<Vec<CVector>> = Vec::with_capacity(tail_space.word_count());
    for word in tail_space.words() {
        let entry: Vec<CVector> = if word.is_identity() {
            slots.clone()
        } else {
            let letters = word.letters();
            let last = letters[letters.len() - 1] as usize;
            let prefix = crate::words::Word::from_letters(t.n() as u32, &letters[..letters.len() - 1])?;
            let parent = tail_space.word_index(&prefix).expect("prefix-closed");
            let ti_adj = t.matrices()[last - 1].adjoint();
            tails[parent].iter().map(|v| &ti_adj * v).collect()
        };
        tails.push(entry);
    }
    for (wi, beta) in out_space.words().iter().enumerate() {
        if beta.is_identity() {
            continue;
        }
        let i = beta.first().expect("nonempty") as usize;
        let alpha = beta.tail().expect("nonempty");
        let ai = tail_space.word_index(&alpha).expect("within truncation");
        let val = &defect.delta_t_star * &tails[ai][i - 1];
        let leak = &val - defect.d_star.projector() * &val;
        if leak.norm() > tol.eq_tol {
            return Err(Error::StructureViolation(format!(
                "symbol component at degree {} leaves D_* (residual {:.3e})",
                beta.len(),
                leak.norm()
            )));
        }
        let coords = defect.d_star.basis().adjoint() * val;
        for k in 0..dim_d_star {
            out[wi * dim_d_star + k] = coords[k];
        }
    }
    Ok(out)
}

/// The characteristic function as a coefficient family of degree `<= deg`,
/// extracted from symbol evaluation and cross-checked against the matrix
/// realization on the constants.
pub fn char_fn(t: &RowContraction, deg: usize) -> Result<MultiAnalyticOp> {
    let defect = defects(t)?;
    let dim_d = defect.d.dim();
    let dim_d_star = defect.d_star.dim();
    let out_space = TruncatedFock::new(t.n() as u32, deg, dim_d_star)?;
    let mut sym = CMatrix::zeros(out_space.dim(), dim_d);
    for j in 0..dim_d {
        let mut e = CVector::zeros(dim_d);
        e[j] = crate::numerics::cplx(1.0, 0.0);
        let col = char_symbol(t, &defect, &e, deg)?;
        sym.column_mut(j).copy_from(&col);
    }
    let op = MultiAnalyticOp::from_symbol_columns(
        t.n() as u32,
        dim_d,
        dim_d_star,
        deg,
        &sym,
        &out_space,
    )?;
    // Convention cross-check: the realized matrix reproduces the symbol.
    if dim_d > 0 && dim_d_star > 0 {
        let m = op.to_matrix(deg)?;
        let diff = m.columns(0, dim_d).into_owned() - &sym;
        if op_norm(&diff) > t.tol().eq_tol {
            return Err(Error::StructureViolation(format!(
                "symbol/coefficient convention mismatch (residual {:.3e})",
                op_norm(&diff)
            )));
        }
    }
    Ok(op)
}

/// The multi-analytic operator `Phi^{L_*} P_{M_V(L_*)} (Phi^L)^*` computed
/// from the dilation, in the canonical defect coordinates of `L` and `L_*`;
/// it must coincide with (and in these coordinates equal) `char_fn` up to
/// the truncation tail.
pub fn char_fn_geometric(ds: &DilationSystem, tol: &Tolerance) -> Result<MultiAnalyticOp> {
    let margin = ds.trunc().saturating_sub(1);
    let l_cols = ds.canonical_l_columns();
    let l_star_cols = ds.canonical_l_star_columns(tol)?;
    let l = SubspaceBasis::from_orthonormal(l_cols, tol)?;
    let l_star = SubspaceBasis::from_orthonormal(l_star_cols, tol)?;
    let dim_l = l.dim();
    let dim_l_star = l_star.dim();
    if dim_l == 0 || dim_l_star == 0 {
        return Ok(MultiAnalyticOp::zero(
            ds.contraction().n() as u32,
            dim_l,
            dim_l_star,
        ));
    }
    let rep_l = fourier_representation(ds.isometries(), &l, margin, tol)?;
    let rep_l_star = fourier_representation(ds.isometries(), &l_star, margin, tol)?;
    // Theta_L = Phi^{L_*} P_{M(L_*)} (Phi^L)^* = G_{L*}^H G_L.
    let theta_mat = rep_l_star.lattice.adjoint() * &rep_l.lattice;
    MultiAnalyticOp::from_matrix_symbol(
        ds.contraction().n() as u32,
        dim_l,
        dim_l_star,
        margin,
        &theta_mat,
        margin,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::build_dilation;
    use crate::numerics::{cplx, max_abs};
    use crate::words::Word;

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

    #[test]
    fn defects_examples() {
        let co = scalar_tuple(&[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]);
        let def = defects(&co).unwrap();
        assert!(max_abs(&def.delta_t_star) < 1e-10);
        assert_eq!(def.d_star.dim(), 0);

        let zero = scalar_tuple(&[0.0, 0.0]);
        let def = defects(&zero).unwrap();
        assert!(max_abs(&(&def.delta_t_star - CMatrix::identity(1, 1))) < 1e-12);
        assert!(max_abs(&(&def.delta_t - CMatrix::identity(2, 2))) < 1e-12);

        let half = scalar_tuple(&[0.5, 0.5]);
        let def = defects(&half).unwrap();
        assert!((def.delta_t_star[(0, 0)].re - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        // Delta_T is the explicit 2x2 matrix with eigenvalues sqrt(1/2), 1.
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                cplx(0.8535533905932737, 0.0),
                cplx(-0.14644660940672622, 0.0),
                cplx(-0.14644660940672622, 0.0),
                cplx(0.8535533905932737, 0.0),
            ],
        );
        assert!(max_abs(&(&def.delta_t - &expected)) < 1e-12);
        assert_eq!(def.d.dim(), 2);
    }

    #[test]
    fn scalar_symbol_closed_form() {
        // T = [1/2]: components (-1/2, 3/4, 3/8, 3/16, ...)
        let t = scalar_tuple(&[0.5]);
        let defect = defects(&t).unwrap();
        let h = CVector::from_element(1, cplx(1.0, 0.0));
        let n_w = 8;
        let sym = char_symbol(&t, &defect, &h, n_w).unwrap();
        // The 1-dim defect bases may flip signs; normalize by the degree-0
        // entry's direction.
        let sign = if sym[0].re > 0.0 { -1.0 } else { 1.0 };
        assert!((sign * sym[0].re - (-0.5)).abs() < 1e-12);
        for k in 1..=n_w {
            let expected = 0.75 * 0.5f64.powi(k as i32 - 1);
            assert!((sign * sym[k].re - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn coisometric_symbol_is_zero_dimensional() {
        let t = scalar_tuple(&[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]);
        let op = char_fn(&t, 4).unwrap();
        assert_eq!(op.dim_out(), 0);
    }

    #[test]
    fn n2_symbol_values() {
        let t = scalar_tuple(&[0.5, 0.5]);
        let defect = defects(&t).unwrap();
        // D = C^2 here; express the first standard slot vector in
        // D-coordinates before evaluating.
        let e1 = CVector::from_vec(vec![cplx(1.0, 0.0), cplx(0.0, 0.0)]);
        let coords = defect.d.basis().adjoint() * &e1;
        let sym = char_symbol(&t, &defect, &coords, 3).unwrap();
        let s_star = if defect.d_star.basis()[(0, 0)].re > 0.0 {
            1.0
        } else {
            -1.0
        };
        assert!((s_star * sym[0].re - (-0.5)).abs() < 1e-10);
        // Degree-1 coefficients against words (g1, g2).
        assert!((s_star * sym[1].re - 0.6035533905932737).abs() < 1e-10);
        assert!((s_star * sym[2].re - (-0.10355339059327373)).abs() < 1e-10);
    }

    #[test]
    fn char_fn_scalar_matches_family() {
        let t = scalar_tuple(&[0.5]);
        let op = char_fn(&t, 6).unwrap();
        // Up to the sign of the 1-dim defect bases, the coefficients are the
        // classical scalar family.
        let c0 = op.constant_coeff()[(0, 0)].re;
        let sgn = if c0 < 0.0 { 1.0 } else { -1.0 };
        assert!((sgn * c0 + 0.5).abs() < 1e-12);
        for k in 1..=6usize {
            let w = Word::from_letters(1, &vec![1; k]).unwrap();
            let v = op.coeff_or_zero(&w)[(0, 0)].re;
            assert!((sgn * v - 0.75 * 0.5f64.powi(k as i32 - 1)).abs() < 1e-12);
        }
        assert!(op.intertwining_defect(8).unwrap() < 1e-12);
    }

    #[test]
    fn char_fn_of_zero_is_the_shift() {
        let t = scalar_tuple(&[0.0]);
        let op = char_fn(&t, 4).unwrap();
        assert_eq!(op.coeffs().len(), 1);
        let g1 = Word::from_letters(1, &[1]).unwrap();
        assert!((op.coeff_or_zero(&g1)[(0, 0)].norm() - 1.0).abs() < 1e-12);
        let c = op.classify(6, &tol()).unwrap();
        assert!(c.inner);
    }

    #[test]
    fn char_fn_of_unitary_is_zero_dimensional() {
        let t = scalar_tuple(&[1.0]);
        let op = char_fn(&t, 4).unwrap();
        assert_eq!(op.dim_in(), 0);
        assert_eq!(op.dim_out(), 0);
    }

    #[test]
    fn char_fn_is_contractive() {
        let t = scalar_tuple(&[0.5, 0.5]);
        let op = char_fn(&t, 6).unwrap();
        assert!(op.truncated_norm(6).unwrap() <= 1.0 + 1e-10);
    }

    #[test]
    fn geometric_equals_formula_for_zero_tuple() {
        let t = scalar_tuple(&[0.0]);
        let ds = build_dilation(&t, 6).unwrap();
        let geo = char_fn_geometric(&ds, &tol()).unwrap();
        let alg = char_fn(&t, 4).unwrap();
        assert!(geo.coincides(&alg, &tol()).unwrap().holds());
    }

    #[test]
    fn geometric_matches_formula_nilpotent() {
        let t1 = CMatrix::from_row_slice(
            2,
            2,
            &[cplx(0.0, 0.0), cplx(0.6, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)],
        );
        let t2 = CMatrix::from_row_slice(
            2,
            2,
            &[cplx(0.0, 0.0), cplx(0.5, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)],
        );
        let t = RowContraction::new(vec![t1, t2], tol()).unwrap();
        let ds = build_dilation(&t, 4).unwrap();
        assert!(ds.exact());
        let geo = char_fn_geometric(&ds, &tol()).unwrap();
        let alg = char_fn(&t, 3).unwrap();
        // In canonical defect coordinates the two constructions agree on the
        // nose, not just up to coincidence.
        for (w, m) in alg.coeffs() {
            assert!(max_abs(&(geo.coeff_or_zero(w) - m)) < 1e-8, "word {w}");
        }
        assert!(geo.coincides(&alg, &tol()).unwrap().holds());
    }

    #[test]
    fn geometric_matches_formula_order3_nilpotent() {
        // Order-3 nilpotent with nonzero length-2 products: the adjoint
        // products T_alpha^* are genuinely order-sensitive here, so this
        // fixture pins the reversal convention against the geometric oracle.
        let mk = |a: f64, b: f64, c: f64| {
            CMatrix::from_row_slice(
                3,
                3,
                &[
                    cplx(0.0, 0.0),
                    cplx(a, 0.0),
                    cplx(b, 0.1),
                    cplx(0.0, 0.0),
                    cplx(0.0, 0.0),
                    cplx(c, -0.2),
                    cplx(0.0, 0.0),
                    cplx(0.0, 0.0),
                    cplx(0.0, 0.0),
                ],
            )
        };
        let raw = vec![mk(0.9, 0.3, 0.7), mk(-0.2, 0.5, 0.4)];
        let scale = crate::numerics::op_norm(&crate::rowcontraction::phi_map(
            &raw,
            &CMatrix::identity(3, 3),
        ))
        .sqrt()
            * 1.05;
        let t = RowContraction::new(raw.iter().map(|m| m.scale(1.0 / scale)).collect(), tol())
            .unwrap();
        assert!(crate::numerics::op_norm(&t.phi_iterate(3)) < 1e-14);
        let alg = char_fn(&t, 4).unwrap();
        assert!(alg.truncated_norm(4).unwrap() <= 1.0 + 1e-10);
        let ds = build_dilation(&t, 5).unwrap();
        assert!(ds.exact());
        let geo = char_fn_geometric(&ds, &tol()).unwrap();
        for (w, m) in alg.coeffs() {
            assert!(max_abs(&(geo.coeff_or_zero(w) - m)) < 1e-8, "word {w}");
        }
    }

    #[test]
    fn geometric_matches_formula_scalar_tail() {
        // T = [1/2] at N = 10: truncation tail below 2^{-8}.
        let t = scalar_tuple(&[0.5]);
        let ds = build_dilation(&t, 10).unwrap();
        let geo = char_fn_geometric(&ds, &tol().with_eq_tol(2f64.powi(-8))).unwrap();
        let alg = char_fn(&t, 9).unwrap();
        let mut worst: f64 = 0.0;
        for (w, m) in alg.coeffs() {
            worst = worst.max(max_abs(&(geo.coeff_or_zero(w) - m)));
        }
        assert!(worst <= 2f64.powi(-8), "coefficient residual {worst}");
    }

    #[test]
    fn inner_iff_pure_on_examples() {
        let pure = scalar_tuple(&[0.5, 0.5]);
        let op = char_fn(&pure, 8).unwrap();
        // Column-norm tails decay like 2^{-N}; loosen the equality threshold
        // accordingly at this margin.
        let c = op.classify(8, &tol().with_eq_tol(1e-2)).unwrap();
        assert!(c.inner);

        let mixed = RowContraction::new(
            vec![
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        cplx(0.6, 0.0),
                        cplx(0.4, 0.0),
                        cplx(0.0, 0.0),
                        cplx(1.0 / 2f64.sqrt(), 0.0),
                    ],
                ),
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        cplx(0.0, 0.0),
                        cplx(-0.4, 0.0),
                        cplx(0.0, 0.0),
                        cplx(1.0 / 2f64.sqrt(), 0.0),
                    ],
                ),
            ],
            tol(),
        )
        .unwrap();
        let c = mixed.classify(400, 1e-12);
        assert_eq!(c.pure_c0, Some(false));
        let op = char_fn(&mixed, 8).unwrap();
        let cls = op.classify(8, &tol().with_eq_tol(1e-2)).unwrap();
        assert!(!cls.inner);
    }
}
