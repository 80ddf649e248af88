//! Truncated full Fock space `F^2_{<=N}(H_n) (x) C^m`: basis indexing and
//! matrix representations of the left/right creation operators.
//!
//! Truncation convention: creation operators annihilate top-degree basis
//! vectors instead of erroring, so every downstream identity is asserted
//! only on a degree margin stated per check.

use crate::error::{Error, Result};
use crate::numerics::{cplx, CMatrix, CVector};
use crate::words::{enumerate_words, words_up_to, Word};
use std::collections::HashMap;

/// Hard cap on the total dimension of a truncated space.
pub const MAX_TOTAL_DIM: usize = 200_000;

/// Which side the creation operator tensors on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// The truncated Fock space with an `m`-dimensional coefficient factor.
///
/// Basis order is word-major: all coefficient slots of a word are contiguous
/// and words follow the canonical graded-lex enumeration.
#[derive(Debug, Clone)]
pub struct TruncatedFock {
    n: u32,
    max_deg: usize,
    coeff_dim: usize,
    words: Vec<Word>,
    index: HashMap<Word, usize>,
}

impl TruncatedFock {
    pub fn new(n: u32, max_deg: usize, coeff_dim: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("alphabet size must be >= 1".into()));
        }
        let word_count = words_up_to(n, max_deg);
        let dim = word_count.checked_mul(coeff_dim).ok_or(Error::DimensionGuard {
            dim: usize::MAX,
            max: MAX_TOTAL_DIM,
        })?;
        if dim > MAX_TOTAL_DIM {
            return Err(Error::DimensionGuard {
                dim,
                max: MAX_TOTAL_DIM,
            });
        }
        let words = enumerate_words(n, max_deg);
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(TruncatedFock {
            n,
            max_deg,
            coeff_dim,
            words,
            index,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn max_deg(&self) -> usize {
        self.max_deg
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    /// Total dimension `#words * coeff_dim`.
    pub fn dim(&self) -> usize {
        self.words.len() * self.coeff_dim
    }

    /// Position of a word in the canonical enumeration.
    pub fn word_index(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Flat index of basis vector `e_word (x) e_k`.
    pub fn basis_index(&self, word_idx: usize, k: usize) -> usize {
        debug_assert!(k < self.coeff_dim);
        word_idx * self.coeff_dim + k
    }

    /// Matrix of `S_i (x) I` (left) or `R_i (x) I` (right); basis vectors of
    /// top degree map to 0.
    pub fn creation_matrix(&self, i: u32, side: Side) -> Result<CMatrix> {
        if i < 1 || i > self.n {
            return Err(Error::GeneratorOutOfRange { index: i, n: self.n });
        }
        let g = Word::generator(self.n, i)?;
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (wi, w) in self.words.iter().enumerate() {
            if w.len() >= self.max_deg {
                continue;
            }
            let target = match side {
                Side::Left => g.concat(w)?,
                Side::Right => w.concat(&g)?,
            };
            let ti = self.index[&target];
            for k in 0..self.coeff_dim {
                m[(self.basis_index(ti, k), self.basis_index(wi, k))] = cplx(1.0, 0.0);
            }
        }
        Ok(m)
    }

    /// Orthogonal projector onto the span of basis vectors whose word length
    /// satisfies the predicate.
    pub fn degree_projector_where(&self, keep: impl Fn(usize) -> bool) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (wi, w) in self.words.iter().enumerate() {
            if keep(w.len()) {
                for k in 0..self.coeff_dim {
                    let idx = self.basis_index(wi, k);
                    m[(idx, idx)] = cplx(1.0, 0.0);
                }
            }
        }
        m
    }

    /// Projector onto the basis vectors with word length in `deg_set`.
    pub fn degree_projector(&self, deg_set: &[usize]) -> CMatrix {
        self.degree_projector_where(|d| deg_set.contains(&d))
    }

    /// The word-reversal unitary `e_alpha (x) k -> e_{alpha~} (x) k`; it
    /// conjugates left creation into right creation exactly on the
    /// truncation.
    pub fn flip_unitary(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (wi, w) in self.words.iter().enumerate() {
            let ti = self.index[&w.reverse()];
            for k in 0..self.coeff_dim {
                m[(self.basis_index(ti, k), self.basis_index(wi, k))] = cplx(1.0, 0.0);
            }
        }
        m
    }

    /// Coefficient-space component of a vector at the given word.
    pub fn component(&self, coords: &CVector, word_idx: usize) -> CVector {
        CVector::from_fn(self.coeff_dim, |k, _| {
            coords[self.basis_index(word_idx, k)]
        })
    }
}

/// A vector of the truncated space, stored in basis order.
#[derive(Debug, Clone)]
pub struct FockVector {
    pub space: TruncatedFock,
    pub coords: CVector,
}

impl FockVector {
    pub fn new(space: TruncatedFock, coords: CVector) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::ShapeMismatch(coords.len(), 1, space.dim(), 1));
        }
        Ok(FockVector { space, coords })
    }

    pub fn zero(space: TruncatedFock) -> Self {
        let dim = space.dim();
        FockVector {
            space,
            coords: CVector::zeros(dim),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{max_abs, op_norm};

    #[test]
    fn shift_n1_is_nilpotent_subdiagonal() {
        let space = TruncatedFock::new(1, 2, 1).unwrap();
        let s = space.creation_matrix(1, Side::Left).unwrap();
        let mut expected = CMatrix::zeros(3, 3);
        expected[(1, 0)] = cplx(1.0, 0.0);
        expected[(2, 1)] = cplx(1.0, 0.0);
        assert_eq!(s, expected);
        assert!(max_abs(&(&s * &s * &s)) < 1e-15);
    }

    #[test]
    fn truncation_kills_top_degree() {
        let space = TruncatedFock::new(2, 1, 1).unwrap();
        let s1 = space.creation_matrix(1, Side::Left).unwrap();
        // e_{g0} -> e_{g1}
        assert_eq!(s1[(1, 0)], cplx(1.0, 0.0));
        // degree-1 columns are zero
        assert!(max_abs(&s1.columns(1, 2).into_owned()) < 1e-15);
    }

    #[test]
    fn creation_isometry_on_margin() {
        let space = TruncatedFock::new(2, 2, 1).unwrap();
        let low = space.degree_projector(&[0, 1]);
        for i in 1..=2 {
            for j in 1..=2 {
                let si = space.creation_matrix(i, Side::Left).unwrap();
                let sj = space.creation_matrix(j, Side::Left).unwrap();
                let gram = si.adjoint() * &sj;
                let expected = if i == j { low.clone() } else { CMatrix::zeros(7, 7) };
                assert!(max_abs(&(&gram * &low - expected)) < 1e-14);
            }
        }
    }

    #[test]
    fn degree_projector_examples() {
        let space = TruncatedFock::new(2, 1, 1).unwrap();
        let p0 = space.degree_projector(&[0]);
        let mut expected = CMatrix::zeros(3, 3);
        expected[(0, 0)] = cplx(1.0, 0.0);
        assert_eq!(p0, expected);

        let all = space.degree_projector(&[0, 1]);
        assert_eq!(all, CMatrix::identity(3, 3));

        let p1 = space.degree_projector(&[1]);
        assert!(max_abs(&(&p0 + &p1 - CMatrix::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn flip_unitary_examples() {
        let space1 = TruncatedFock::new(1, 3, 1).unwrap();
        assert_eq!(space1.flip_unitary(), CMatrix::identity(4, 4));

        let space = TruncatedFock::new(2, 2, 1).unwrap();
        let u = space.flip_unitary();
        let g1g2 = space
            .word_index(&Word::from_letters(2, &[1, 2]).unwrap())
            .unwrap();
        let g2g1 = space
            .word_index(&Word::from_letters(2, &[2, 1]).unwrap())
            .unwrap();
        assert_eq!(u[(g2g1, g1g2)], cplx(1.0, 0.0));
        assert_eq!(u[(g1g2, g2g1)], cplx(1.0, 0.0));
        // involution and permutation
        assert!(max_abs(&(&u * &u - CMatrix::identity(7, 7))) < 1e-15);
    }

    #[test]
    fn right_creation_is_conjugated_left() {
        let space = TruncatedFock::new(2, 3, 1).unwrap();
        let u = space.flip_unitary();
        let s1 = space.creation_matrix(1, Side::Left).unwrap();
        let r1 = space.creation_matrix(1, Side::Right).unwrap();
        assert!(max_abs(&(&r1 - u.adjoint() * &s1 * &u)) < 1e-15);
    }

    #[test]
    fn left_right_commute_on_margin() {
        let space = TruncatedFock::new(2, 3, 2).unwrap();
        let margin = space.degree_projector(&[0, 1]);
        for i in 1..=2 {
            for j in 1..=2 {
                let s = space.creation_matrix(i, Side::Left).unwrap();
                let r = space.creation_matrix(j, Side::Right).unwrap();
                let comm = (&s * &r - &r * &s) * &margin;
                assert!(op_norm(&comm) < 1e-14);
            }
        }
    }

    #[test]
    fn shifted_ranges_fill_positive_degrees() {
        let space = TruncatedFock::new(2, 2, 1).unwrap();
        let mut sum = CMatrix::zeros(space.dim(), space.dim());
        for i in 1..=2 {
            let s = space.creation_matrix(i, Side::Left).unwrap();
            sum += &s * s.adjoint();
        }
        let expected = space.degree_projector(&[1, 2]);
        assert!(max_abs(&(&sum - &expected)) < 1e-14);
    }

    #[test]
    fn dimension_guard() {
        assert!(matches!(
            TruncatedFock::new(2, 17, 2),
            Err(Error::DimensionGuard { .. })
        ));
    }
}
