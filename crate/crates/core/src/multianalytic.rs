//! Multi-analytic operators as degree-truncated Fourier-coefficient
//! families, with matrix realization, products, classification,
//! pure/unitary decomposition, coincidence testing, and inner-outer
//! factorization.
//!
//! Coefficient convention: `coeffs[alpha]` is the matrix `theta_(alpha)` of
//! the formal expansion `sum_alpha R_alpha (x) theta_(alpha)`, so the block
//! of the realized matrix at (output word `gamma.alpha~`, input word
//! `gamma`) is `theta_(alpha)`. Symbol pairing therefore reads coefficients
//! at reversed words; the two conventions are cross-checked by an invariant
//! instead of trusted.

use crate::error::{Error, Result};
use crate::fockspace::{Side, TruncatedFock};
use crate::numerics::{
    align_unitary, hcat, kernel_basis, max_abs, op_norm, range_basis, unitary_residual, vcat,
    Alignment, CMatrix, SubspaceBasis, Tolerance,
};
use crate::words::Word;
use std::collections::BTreeMap;

/// Coefficients with max-norm at or below this are dropped as zero.
const COEFF_DROP_TOL: f64 = 1e-12;

/// A multi-analytic operator `F^2 (x) E -> F^2 (x) E_*` stored as the family
/// of its Fourier coefficients up to a degree cutoff; absent words are zero.
#[derive(Debug, Clone)]
pub struct MultiAnalyticOp {
    n: u32,
    dim_in: usize,
    dim_out: usize,
    deg: usize,
    coeffs: BTreeMap<Word, CMatrix>,
}

impl MultiAnalyticOp {
    pub fn zero(n: u32, dim_in: usize, dim_out: usize) -> Self {
        MultiAnalyticOp {
            n,
            dim_in,
            dim_out,
            deg: 0,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant operator `I (x) m`.
    pub fn constant(n: u32, m: CMatrix) -> Self {
        let mut op = MultiAnalyticOp::zero(n, m.ncols(), m.nrows());
        if max_abs(&m) > COEFF_DROP_TOL {
            op.coeffs.insert(Word::identity(n), m);
        }
        op
    }

    pub fn from_coeffs(
        n: u32,
        dim_in: usize,
        dim_out: usize,
        coeffs: impl IntoIterator<Item = (Word, CMatrix)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut deg = 0;
        for (w, m) in coeffs {
            if w.n() != n {
                return Err(Error::AlphabetMismatch(w.n(), n));
            }
            if m.nrows() != dim_out || m.ncols() != dim_in {
                return Err(Error::ShapeMismatch(m.nrows(), m.ncols(), dim_out, dim_in));
            }
            crate::numerics::check_finite(&m)?;
            if max_abs(&m) <= COEFF_DROP_TOL {
                continue;
            }
            deg = deg.max(w.len());
            map.insert(w, m);
        }
        Ok(MultiAnalyticOp {
            n,
            dim_in,
            dim_out,
            deg,
            coeffs: map,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Degree cutoff (largest stored word length).
    pub fn deg(&self) -> usize {
        self.deg
    }

    pub fn coeff(&self, w: &Word) -> Option<&CMatrix> {
        self.coeffs.get(w)
    }

    /// The coefficient at `w`, materialized as zero when absent.
    pub fn coeff_or_zero(&self, w: &Word) -> CMatrix {
        self.coeffs
            .get(w)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.dim_out, self.dim_in))
    }

    pub fn coeffs(&self) -> &BTreeMap<Word, CMatrix> {
        &self.coeffs
    }

    /// Degree-0 coefficient `theta_(g_0)`.
    pub fn constant_coeff(&self) -> CMatrix {
        self.coeff_or_zero(&Word::identity(self.n))
    }

    /// Largest coefficient max-norm; 0 for the zero operator.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs.values().map(max_abs).fold(0.0, f64::max)
    }

    pub fn input_space(&self, n_w: usize) -> Result<TruncatedFock> {
        TruncatedFock::new(self.n, n_w, self.dim_in)
    }

    pub fn output_space(&self, n_w: usize) -> Result<TruncatedFock> {
        TruncatedFock::new(self.n, n_w, self.dim_out)
    }

    /// Matrix of the operator on the working truncation `F^2_{<=N_w}`.
    pub fn to_matrix(&self, n_w: usize) -> Result<CMatrix> {
        let sin = self.input_space(n_w)?;
        let sout = self.output_space(n_w)?;
        let mut m = CMatrix::zeros(sout.dim(), sin.dim());
        for (alpha, block) in &self.coeffs {
            if alpha.len() > n_w {
                continue;
            }
            let alpha_rev = alpha.reverse();
            for (gi, gamma) in sin.words().iter().enumerate() {
                if gamma.len() + alpha.len() > n_w {
                    continue;
                }
                let beta = gamma.concat(&alpha_rev)?;
                let bi = sout.word_index(&beta).expect("word within truncation");
                for r in 0..self.dim_out {
                    for c in 0..self.dim_in {
                        m[(bi * self.dim_out + r, gi * self.dim_in + c)] += block[(r, c)];
                    }
                }
            }
        }
        Ok(m)
    }

    /// The symbol columns `theta k = A(1 (x) k)`, one per coefficient-space
    /// basis vector, as a `(fock_out x dim_in)` matrix.
    pub fn symbol_matrix(&self, n_w: usize) -> Result<CMatrix> {
        let sout = self.output_space(n_w)?;
        let mut m = CMatrix::zeros(sout.dim(), self.dim_in);
        for (alpha, block) in &self.coeffs {
            if alpha.len() > n_w {
                continue;
            }
            let bi = sout
                .word_index(&alpha.reverse())
                .expect("word within truncation");
            for r in 0..self.dim_out {
                for c in 0..self.dim_in {
                    m[(bi * self.dim_out + r, c)] += block[(r, c)];
                }
            }
        }
        Ok(m)
    }

    /// Reads a coefficient family off symbol columns: `sym` maps the
    /// coefficient space into `F^2_{<=N} (x) E_*`, and the coefficient at
    /// `beta` is the block of `sym` at the reversed word.
    pub fn from_symbol_columns(
        n: u32,
        dim_in: usize,
        dim_out: usize,
        deg: usize,
        sym: &CMatrix,
        out_space: &TruncatedFock,
    ) -> Result<Self> {
        if sym.nrows() != out_space.dim() || sym.ncols() != dim_in {
            return Err(Error::ShapeMismatch(
                sym.nrows(),
                sym.ncols(),
                out_space.dim(),
                dim_in,
            ));
        }
        let mut coeffs = Vec::new();
        for (wi, w) in out_space.words().iter().enumerate() {
            if w.len() > deg {
                continue;
            }
            let mut block = CMatrix::zeros(dim_out, dim_in);
            for r in 0..dim_out {
                for c in 0..dim_in {
                    block[(r, c)] = sym[(wi * dim_out + r, c)];
                }
            }
            coeffs.push((w.reverse(), block));
        }
        MultiAnalyticOp::from_coeffs(n, dim_in, dim_out, coeffs)
    }

    /// Extracts the coefficient family of a matrix acting between truncated
    /// Fock spaces, using its action on the constants `1 (x) E`.
    pub fn from_matrix_symbol(
        n: u32,
        dim_in: usize,
        dim_out: usize,
        deg: usize,
        matrix: &CMatrix,
        n_w: usize,
    ) -> Result<Self> {
        let out_space = TruncatedFock::new(n, n_w, dim_out)?;
        let in_words = crate::words::words_up_to(n, n_w);
        if matrix.nrows() != out_space.dim() || matrix.ncols() != in_words * dim_in {
            return Err(Error::ShapeMismatch(
                matrix.nrows(),
                matrix.ncols(),
                out_space.dim(),
                in_words * dim_in,
            ));
        }
        let sym = matrix.columns(0, dim_in).into_owned();
        Self::from_symbol_columns(n, dim_in, dim_out, deg, &sym, &out_space)
    }

    /// Max over `i` of the intertwining residual with left creation,
    /// restricted to inputs of degree `<= N_w - 1 - deg`. Families stored by
    /// this module realize it at roundoff level.
    pub fn intertwining_defect(&self, n_w: usize) -> Result<f64> {
        let m = self.to_matrix(n_w)?;
        intertwining_defect_matrix(self.n, self.dim_in, self.dim_out, self.deg, &m, n_w)
    }

    /// Composition `self . rhs` (rhs applied first); coefficient convolution
    /// over word splittings.
    pub fn multiply(&self, rhs: &MultiAnalyticOp) -> Result<MultiAnalyticOp> {
        if self.n != rhs.n {
            return Err(Error::AlphabetMismatch(self.n, rhs.n));
        }
        if self.dim_in != rhs.dim_out {
            return Err(Error::ShapeMismatch(
                self.dim_out,
                self.dim_in,
                rhs.dim_out,
                rhs.dim_in,
            ));
        }
        let mut acc: BTreeMap<Word, CMatrix> = BTreeMap::new();
        for (a, ma) in &self.coeffs {
            for (b, mb) in &rhs.coeffs {
                let gamma = a.concat(b)?;
                let prod = ma * mb;
                acc.entry(gamma)
                    .and_modify(|m| *m += &prod)
                    .or_insert(prod);
            }
        }
        MultiAnalyticOp::from_coeffs(self.n, rhs.dim_in, self.dim_out, acc)
    }

    /// Operator norm of the truncated matrix (contractivity check).
    pub fn truncated_norm(&self, n_w: usize) -> Result<f64> {
        Ok(op_norm(&self.to_matrix(n_w)?))
    }

    /// Isometry test alone: Gram deviation of the columns over inputs of
    /// degree `<= margin` from the identity. Cheaper than a full `classify`
    /// when only inner-ness is needed.
    pub fn inner_gram_deviation(&self, n_w: usize, margin: usize) -> Result<f64> {
        if self.dim_in == 0 {
            return Ok(0.0);
        }
        let m = self.to_matrix(n_w)?;
        let sin = self.input_space(n_w)?;
        let keep: Vec<usize> = sin
            .words()
            .iter()
            .enumerate()
            .filter(|(_, w)| w.len() <= margin)
            .flat_map(|(wi, _)| (0..self.dim_in).map(move |k| wi * self.dim_in + k))
            .collect();
        let sub = m.select_columns(&keep);
        let gram = sub.adjoint() * &sub;
        let eye = CMatrix::identity(gram.nrows(), gram.ncols());
        Ok(op_norm(&(&gram - &eye)))
    }

    /// Classifies the operator at the working degree; outer-ness is only
    /// decidable up to truncation, so the margins used are reported.
    pub fn classify(&self, n_w: usize, tol: &Tolerance) -> Result<Classification> {
        if n_w < self.deg {
            return Err(Error::InvalidInput(format!(
                "working degree {n_w} below coefficient cutoff {}",
                self.deg
            )));
        }
        let m = self.to_matrix(n_w)?;

        // Inner: columns over inputs of degree <= N_w - deg are orthonormal.
        let inner_margin = n_w - self.deg;
        let inner = self.inner_gram_deviation(n_w, inner_margin)? <= tol.eq_tol;

        // Outer: the range covers every output of degree <= outer margin.
        let outer_margin = (n_w - self.deg).saturating_sub(1);
        let outer = {
            let sout = self.output_space(n_w)?;
            let range = range_basis(&m, tol);
            let low_idx: Vec<usize> = sout
                .words()
                .iter()
                .enumerate()
                .filter(|(_, w)| w.len() <= outer_margin)
                .flat_map(|(wi, _)| (0..self.dim_out).map(move |k| wi * self.dim_out + k))
                .collect();
            let mut low = CMatrix::zeros(sout.dim(), low_idx.len());
            for (j, &i) in low_idx.iter().enumerate() {
                low[(i, j)] = crate::numerics::cplx(1.0, 0.0);
            }
            let low = SubspaceBasis::from_orthonormal(low, tol)?;
            range.contains(&low, tol)?
        };

        // Purely contractive: the degree-0 block is a strict contraction.
        let theta0 = self.constant_coeff();
        let purely_contractive = self.dim_in == 0 || op_norm(&theta0) < 1.0 - tol.eq_tol;

        // Unitary constant: only the degree-0 coefficient, and it is unitary.
        let higher_mass = self
            .coeffs
            .iter()
            .filter(|(w, _)| !w.is_identity())
            .map(|(_, m)| max_abs(m))
            .fold(0.0, f64::max);
        let unitary_constant = self.dim_in == self.dim_out
            && higher_mass <= tol.eq_tol
            && (self.dim_in == 0 || unitary_residual(&theta0) <= tol.eq_tol);

        Ok(Classification {
            inner,
            outer,
            purely_contractive,
            unitary_constant,
            inner_margin,
            outer_margin,
        })
    }

    /// Decomposition into a purely contractive part and a unitary-constant
    /// part `I (x) W`, by shrinking the candidate unitary subspace until the
    /// adjoint conditions stabilize (at most `dim E` rounds).
    pub fn pure_unitary_decomposition(&self, tol: &Tolerance) -> Result<PureUnitaryDecomposition> {
        let theta0 = self.constant_coeff();
        let kernel_tol = Tolerance {
            rank_tol: tol.rank_tol.max(tol.eq_tol),
            eq_tol: tol.eq_tol,
        };
        let higher: Vec<&CMatrix> = self
            .coeffs
            .iter()
            .filter(|(w, _)| !w.is_identity())
            .map(|(_, m)| m)
            .collect();

        // Candidate: theta_(g_0) isometric and all higher coefficients vanish.
        let isom = CMatrix::identity(self.dim_in, self.dim_in) - theta0.adjoint() * &theta0;
        let mut e_u = kernel_basis(&isom, &kernel_tol);
        if !higher.is_empty() && e_u.dim() > 0 {
            let stacked = vcat(&higher);
            e_u = e_u.intersect(&kernel_basis(&stacked, &kernel_tol), tol)?;
        }
        // Shrink until theta_(g_0) E_u also satisfies the co-conditions.
        for _ in 0..=self.dim_in {
            if e_u.dim() == 0 || higher.is_empty() {
                break;
            }
            let co: Vec<CMatrix> = higher.iter().map(|m| m.adjoint() * &theta0).collect();
            let co_refs: Vec<&CMatrix> = co.iter().collect();
            let shrunk = e_u.intersect(&kernel_basis(&vcat(&co_refs), &kernel_tol), tol)?;
            if shrunk.dim() == e_u.dim() {
                break;
            }
            e_u = shrunk;
        }

        let e_star_u = range_basis(&(&theta0 * e_u.basis()), tol);
        let w = e_star_u.basis().adjoint() * &theta0 * e_u.basis();
        let e0 = e_u.complement(tol);
        let e_star0 = e_star_u.complement(tol);
        let restricted = MultiAnalyticOp::from_coeffs(
            self.n,
            e0.dim(),
            e_star0.dim(),
            self.coeffs.iter().map(|(word, m)| {
                (word.clone(), e_star0.basis().adjoint() * m * e0.basis())
            }),
        )?;
        Ok(PureUnitaryDecomposition {
            e_u,
            e_star_u,
            unitary_part: w,
            pure_part: restricted,
        })
    }

    /// Coincidence test: searches for constant unitaries `W, W_*` with
    /// `W_* theta_(alpha) = theta'_(alpha) W` by alternating Procrustes
    /// alignment on stacked coefficient matrices.
    pub fn coincides(&self, other: &MultiAnalyticOp, tol: &Tolerance) -> Result<Coincidence> {
        if self.n != other.n {
            return Err(Error::AlphabetMismatch(self.n, other.n));
        }
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return Ok(Coincidence::Distinct {
                residual: f64::INFINITY,
            });
        }
        let mut words: Vec<Word> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .cloned()
            .collect();
        words.sort();
        words.dedup();
        if words.is_empty() {
            words.push(Word::identity(self.n));
        }
        let a_mats: Vec<CMatrix> = words.iter().map(|w| self.coeff_or_zero(w)).collect();
        let b_mats: Vec<CMatrix> = words.iter().map(|w| other.coeff_or_zero(w)).collect();

        let residual_of = |w: &CMatrix, w_star: &CMatrix| -> f64 {
            a_mats
                .iter()
                .zip(&b_mats)
                .map(|(a, b)| op_norm(&(w_star * a - b * w)))
                .fold(0.0, f64::max)
        };

        let eye_in = CMatrix::identity(self.dim_in, self.dim_in);
        let eye_out = CMatrix::identity(self.dim_out, self.dim_out);
        // Identity shortcut covers self-coincidence and the zero operator.
        let id_res = residual_of(&eye_in, &eye_out);
        if id_res <= tol.eq_tol {
            return Ok(Coincidence::Coincide {
                w: eye_in,
                w_star: eye_out,
                residual: id_res,
            });
        }

        let mut best: Option<(CMatrix, CMatrix, f64, bool)> = None;
        for seed in 0..3u64 {
            let mut w = deterministic_unitary(self.dim_in, seed);
            let mut w_star = eye_out.clone();
            let mut degenerate = false;
            let mut last = f64::INFINITY;
            for _ in 0..80 {
                // Optimal W_* for fixed W.
                let x_blocks: Vec<CMatrix> = a_mats.iter().map(|a| a * w.adjoint()).collect();
                let x_refs: Vec<&CMatrix> = x_blocks.iter().collect();
                let y_refs: Vec<&CMatrix> = b_mats.iter().collect();
                degenerate = false;
                match align_unitary(&hcat(&x_refs), &hcat(&y_refs), tol)? {
                    Alignment::Unitary(u) => w_star = u,
                    Alignment::Undetermined => degenerate = true,
                }
                // Optimal W for fixed W_*.
                let y2: Vec<CMatrix> = a_mats.iter().map(|a| &w_star * a).collect();
                let x2_refs: Vec<&CMatrix> = b_mats.iter().collect();
                let y2_refs: Vec<&CMatrix> = y2.iter().collect();
                let x2h = vcat(&x2_refs).adjoint().into_owned();
                let y2h = vcat(&y2_refs).adjoint().into_owned();
                match align_unitary(&x2h, &y2h, tol)? {
                    Alignment::Unitary(u) => w = u.adjoint().into_owned(),
                    Alignment::Undetermined => degenerate = true,
                }
                let r = residual_of(&w, &w_star);
                let stalled = (last - r).abs() < 1e-15;
                last = r;
                if stalled {
                    break;
                }
            }
            let r = residual_of(&w, &w_star);
            if best.as_ref().map_or(true, |(_, _, br, _)| r < *br) {
                best = Some((w, w_star, r, degenerate));
            }
            if let Some((_, _, br, false)) = &best {
                if *br <= tol.eq_tol {
                    break;
                }
            }
        }
        let (w, w_star, residual, degenerate) = best.expect("at least one restart");
        if residual <= tol.eq_tol {
            if degenerate {
                Ok(Coincidence::Undetermined)
            } else {
                Ok(Coincidence::Coincide { w, w_star, residual })
            }
        } else {
            Ok(Coincidence::Distinct { residual })
        }
    }

    /// Inner-outer factorization at the working degree.
    ///
    /// The wandering subspace of the range closure is computed by subspace
    /// calculus; its orthonormal vectors become the symbol columns of the
    /// inner factor, and the outer factor is the coefficient family of
    /// `inner^H . self`. The rank tolerance governs which truncation-decayed
    /// range directions count, so callers pick it per regime; instability of
    /// the wandering dimension between `N_w - 1` and `N_w` is an error.
    pub fn inner_outer_factorize(&self, n_w: usize, tol: &Tolerance) -> Result<InnerOuter> {
        let wander_prev = self.wandering_of_range(n_w - 1, tol)?;
        let (range, wander) = {
            let w = self.wandering_of_range(n_w, tol)?;
            (w.0, w.1)
        };
        if wander.dim() != wander_prev.1.dim() {
            return Err(Error::RankUnstable {
                low: n_w - 1,
                at_low: wander_prev.1.dim(),
                high: n_w,
                at_high: wander.dim(),
            });
        }
        let sout = self.output_space(n_w)?;
        let dim_f = wander.dim();
        let inner = MultiAnalyticOp::from_symbol_columns(
            self.n,
            dim_f,
            self.dim_out,
            n_w,
            wander.basis(),
            &sout,
        )?;
        let inner_mat = inner.to_matrix(n_w)?;
        let outer_sym = inner_mat.adjoint() * self.to_matrix(n_w)?;
        let outer = MultiAnalyticOp::from_matrix_symbol(
            self.n,
            self.dim_in,
            dim_f,
            n_w,
            &outer_sym,
            n_w,
        )?;

        // Product residual on the margin unaffected by truncation.
        let margin = n_w.saturating_sub(inner.deg() + outer.deg());
        let sin = self.input_space(n_w)?;
        let keep = sin.degree_projector_where(|d| d <= margin);
        let product = &inner_mat * outer.to_matrix(n_w)?;
        let residual = op_norm(&((&product - self.to_matrix(n_w)?) * keep));

        // Outer factor must have dense range at its margin.
        let outer_range = range_basis(&outer.to_matrix(n_w)?, tol);
        let fout = outer.output_space(n_w)?;
        let out_margin = margin.saturating_sub(1);
        let mut low_cols = Vec::new();
        for (wi, w) in fout.words().iter().enumerate() {
            if w.len() <= out_margin {
                for k in 0..dim_f {
                    low_cols.push(wi * dim_f + k);
                }
            }
        }
        let mut low = CMatrix::zeros(fout.dim(), low_cols.len());
        for (j, &i) in low_cols.iter().enumerate() {
            low[(i, j)] = crate::numerics::cplx(1.0, 0.0);
        }
        let low = SubspaceBasis::from_orthonormal(low, tol)?;
        let outer_dense = outer_range.contains(&low, tol)?;

        Ok(InnerOuter {
            inner,
            outer,
            range_dim: range.dim(),
            wandering_dim: dim_f,
            product_residual: residual,
            product_margin: margin,
            outer_dense,
        })
    }

    fn wandering_of_range(
        &self,
        n_w: usize,
        tol: &Tolerance,
    ) -> Result<(SubspaceBasis, SubspaceBasis)> {
        let m = self.to_matrix(n_w)?;
        let range = range_basis(&m, tol);
        if range.dim() == 0 {
            return Ok((range.clone(), range));
        }
        let sout = self.output_space(n_w)?;
        let mut shifted_blocks = Vec::new();
        for i in 1..=self.n {
            let s = sout.creation_matrix(i, Side::Left)?;
            shifted_blocks.push(&s * range.basis());
        }
        let refs: Vec<&CMatrix> = shifted_blocks.iter().collect();
        let shifted = range_basis(&hcat(&refs), tol);
        let wander = range.intersect(&shifted.complement(tol), tol)?;
        Ok((range, wander))
    }
}

/// Intertwining residual of a raw matrix between truncated Fock spaces.
pub fn intertwining_defect_matrix(
    n: u32,
    dim_in: usize,
    dim_out: usize,
    deg: usize,
    matrix: &CMatrix,
    n_w: usize,
) -> Result<f64> {
    if n_w < 1 {
        return Err(Error::InvalidInput("working degree must be >= 1".into()));
    }
    let sin = TruncatedFock::new(n, n_w, dim_in)?;
    let sout = TruncatedFock::new(n, n_w, dim_out)?;
    if matrix.nrows() != sout.dim() || matrix.ncols() != sin.dim() {
        return Err(Error::ShapeMismatch(
            matrix.nrows(),
            matrix.ncols(),
            sout.dim(),
            sin.dim(),
        ));
    }
    let margin = n_w as isize - 1 - deg as isize;
    let keep = sin.degree_projector_where(|d| (d as isize) <= margin);
    let mut worst: f64 = 0.0;
    for i in 1..=n {
        let si_in = sin.creation_matrix(i, Side::Left)?;
        let si_out = sout.creation_matrix(i, Side::Left)?;
        let defect = (matrix * &si_in - &si_out * matrix) * &keep;
        worst = worst.max(op_norm(&defect));
    }
    Ok(worst)
}

fn deterministic_unitary(dim: usize, seed: u64) -> CMatrix {
    if dim == 0 {
        return CMatrix::zeros(0, 0);
    }
    if seed == 0 {
        return CMatrix::identity(dim, dim);
    }
    // Cheap splitmix-style generator; only used to diversify restarts.
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next = || {
        state ^= state >> 30;
        state = state.wrapping_mul(0xbf58476d1ce4e5b9);
        state ^= state >> 27;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let g = CMatrix::from_fn(dim, dim, |_, _| crate::numerics::cplx(next(), next()));
    g.qr().q()
}

/// Flags reported by `classify`, with the truncation margins used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub inner: bool,
    pub outer: bool,
    pub purely_contractive: bool,
    pub unitary_constant: bool,
    /// Input degrees over which the isometry test ran.
    pub inner_margin: usize,
    /// Output degrees over which range density was tested.
    pub outer_margin: usize,
}

/// Result of the unique pure/unitary splitting.
#[derive(Debug, Clone)]
pub struct PureUnitaryDecomposition {
    pub e_u: SubspaceBasis,
    pub e_star_u: SubspaceBasis,
    /// The unitary `W = theta_(g_0)|_{E_u}` in the chosen bases.
    pub unitary_part: CMatrix,
    /// Compression of the family to `E_0 -> E_{*0}`.
    pub pure_part: MultiAnalyticOp,
}

/// Result of a coincidence test.
#[derive(Debug, Clone)]
pub enum Coincidence {
    Coincide {
        w: CMatrix,
        w_star: CMatrix,
        residual: f64,
    },
    Distinct {
        residual: f64,
    },
    Undetermined,
}

impl Coincidence {
    pub fn holds(&self) -> bool {
        matches!(self, Coincidence::Coincide { .. })
    }
}

/// Inner-outer factorization output with its verification report.
#[derive(Debug, Clone)]
pub struct InnerOuter {
    pub inner: MultiAnalyticOp,
    pub outer: MultiAnalyticOp,
    pub range_dim: usize,
    pub wandering_dim: usize,
    pub product_residual: f64,
    pub product_margin: usize,
    pub outer_dense: bool,
}
