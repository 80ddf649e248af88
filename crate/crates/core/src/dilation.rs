//! Truncated minimal isometric dilation of a row contraction, the Wold
//! decomposition of row isometries, the wandering subspaces `L`, `L_*`, and
//! Fourier representations of wandering lattices.
//!
//! The dilation space is `K = H (+) (F^2_{<=N-1} (x) D)` with `D` the range
//! of the defect `Delta_T`, and `V_i(h (+) xi) = T_i h (+) (1 (x) D_i h +
//! e_i (x) xi)`. The construction is verified against the dilation
//! properties rather than trusted: isometry on the truncation margin, the
//! adjoint compression property, and minimality of the span of `V_alpha H`.

use crate::error::{Error, Result};
use crate::fockspace::{Side, TruncatedFock};
use crate::numerics::{
    hcat, max_abs, op_norm, psd_sqrt, range_basis, CMatrix, SubspaceBasis, Tolerance,
};
use crate::rowcontraction::RowContraction;

use num_complex::Complex64;

/// Truncated minimal isometric dilation of a row contraction.
#[derive(Debug, Clone)]
pub struct DilationSystem {
    t: RowContraction,
    trunc: usize,
    fock: TruncatedFock,
    defect_range: SubspaceBasis,
    v: Vec<CMatrix>,
    l: SubspaceBasis,
    l_star: SubspaceBasis,
    exact: bool,
    isometry_residual: f64,
}

impl DilationSystem {
    pub fn contraction(&self) -> &RowContraction {
        &self.t
    }

    /// Truncation degree `N` (the Fock part carries degrees `< N`).
    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn isometries(&self) -> &[CMatrix] {
        &self.v
    }

    /// Dimension of the dilation space `K`.
    pub fn dim_k(&self) -> usize {
        self.t.d() + self.fock.dim()
    }

    pub fn dim_h(&self) -> usize {
        self.t.d()
    }

    /// Fock factor of `K` (degrees up to `N-1`, coefficient space `D`).
    pub fn fock(&self) -> &TruncatedFock {
        &self.fock
    }

    /// Orthonormal basis of `D = range(Delta_T)` inside `C^{nd}`.
    pub fn defect_range(&self) -> &SubspaceBasis {
        &self.defect_range
    }

    /// `L = span (V_i - T_i) H`.
    pub fn l(&self) -> &SubspaceBasis {
        &self.l
    }

    /// `L_* = closure (I - sum V_i T_i^*) H`.
    pub fn l_star(&self) -> &SubspaceBasis {
        &self.l_star
    }

    /// True when the tuple is nilpotent within the truncation, making the
    /// subspace computations exact rather than leakage-bounded.
    pub fn exact(&self) -> bool {
        self.exact
    }

    pub fn isometry_residual(&self) -> f64 {
        self.isometry_residual
    }

    /// Injection of `H` into `K` (first `d` coordinates).
    pub fn embed_h(&self) -> CMatrix {
        let d = self.t.d();
        let mut m = CMatrix::zeros(self.dim_k(), d);
        for j in 0..d {
            m[(j, j)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Projector of `K` onto vectors whose Fock component has degree in the
    /// kept set; the `H` summand is always kept.
    pub fn degree_restriction(&self, keep: impl Fn(usize) -> bool) -> CMatrix {
        let d = self.t.d();
        let k = self.dim_k();
        let mut m = CMatrix::zeros(k, k);
        for j in 0..d {
            m[(j, j)] = Complex64::new(1.0, 0.0);
        }
        let fock_proj = self.fock.degree_projector_where(keep);
        m.view_mut((d, d), (self.fock.dim(), self.fock.dim()))
            .copy_from(&fock_proj);
        m
    }

    /// Canonical orthonormal basis of `L` indexed by `D`-coordinates, the
    /// image of the defect identification `Delta_T h -> sum (V_i - T_i) h_i`.
    /// In this construction that is exactly the degree-0 Fock slot.
    pub fn canonical_l_columns(&self) -> CMatrix {
        let d = self.t.d();
        let dim_d = self.defect_range.dim();
        let mut m = CMatrix::zeros(self.dim_k(), dim_d);
        for j in 0..dim_d {
            m[(d + j, j)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Canonical orthonormal basis of `L_*` indexed by `D_*`-coordinates:
    /// `Delta_{T^*} h -> (I - sum V_i T_i^*) h`.
    pub fn canonical_l_star_columns(&self, tol: &Tolerance) -> Result<CMatrix> {
        let d = self.t.d();
        let eye = CMatrix::identity(d, d);
        let delta_star_sq = &eye - self.t.phi(&eye);
        let delta_star = psd_sqrt(&delta_star_sq, tol)?;
        let d_star = range_basis(&delta_star, tol);
        if d_star.dim() == 0 {
            return Ok(CMatrix::zeros(self.dim_k(), 0));
        }
        // h_j = pinv(Delta_{T*}) b_j, then map through (I - sum V_i T_i^*).
        let (pinv_rows, _) = crate::numerics::solve_on_range(&delta_star, &eye)?;
        let h = pinv_rows.adjoint() * d_star.basis();
        let embed = self.embed_h();
        let mut gen = &embed * &h;
        for (i, vi) in self.v.iter().enumerate() {
            let ti = &self.t.matrices()[i];
            gen -= vi * &embed * ti.adjoint() * &h;
        }
        Ok(gen)
    }
}

/// Builds the truncated minimal isometric dilation at degree `N >= 1`.
pub fn build_dilation(t: &RowContraction, n_trunc: usize) -> Result<DilationSystem> {
    if n_trunc < 1 {
        return Err(Error::InvalidInput("dilation degree must be >= 1".into()));
    }
    let tol = *t.tol();
    let n = t.n();
    let d = t.d();
    let nd = n * d;

    // Defect of the column operator: Delta_T = (I - T^* T)^{1/2} on C^{nd}.
    let row = t.row_matrix();
    let delta_sq = CMatrix::identity(nd, nd) - row.adjoint() * &row;
    let delta = psd_sqrt(&delta_sq, &tol)?;
    let defect_range = range_basis(&delta, &tol);
    let dim_d = defect_range.dim();

    let fock = TruncatedFock::new(n as u32, n_trunc - 1, dim_d)?;
    let dim_k = d + fock.dim();

    // D_i = P_D Delta_T iota_i : H -> D-coordinates.
    let d_blocks: Vec<CMatrix> = (0..n)
        .map(|i| {
            let slot = delta.columns(i * d, d).into_owned();
            defect_range.basis().adjoint() * slot
        })
        .collect();

    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let mut vi = CMatrix::zeros(dim_k, dim_k);
        vi.view_mut((0, 0), (d, d)).copy_from(&t.matrices()[i]);
        if dim_d > 0 {
            // 1 (x) D_i h lands in the degree-0 slot of the Fock part.
            vi.view_mut((d, 0), (dim_d, d)).copy_from(&d_blocks[i]);
            let s = fock.creation_matrix((i + 1) as u32, Side::Left)?;
            vi.view_mut((d, d), (fock.dim(), fock.dim())).copy_from(&s);
        }
        v.push(vi);
    }

    // Dilation property (exact): V_i^* restricted to H equals T_i^*.
    let embed = {
        let mut m = CMatrix::zeros(dim_k, d);
        for j in 0..d {
            m[(j, j)] = Complex64::new(1.0, 0.0);
        }
        m
    };
    for (i, vi) in v.iter().enumerate() {
        let diff = vi.adjoint() * &embed - &embed * t.matrices()[i].adjoint();
        if max_abs(&diff) > tol.eq_tol {
            return Err(Error::StructureViolation(format!(
                "dilation adjoint property failed with residual {:.3e}",
                max_abs(&diff)
            )));
        }
    }

    // Isometries with orthogonal ranges, on the margin below top degree.
    let margin = {
        let mut m = CMatrix::zeros(dim_k, dim_k);
        for j in 0..d {
            m[(j, j)] = Complex64::new(1.0, 0.0);
        }
        if dim_d > 0 && n_trunc >= 2 {
            let keep = fock.degree_projector_where(|deg| deg + 2 <= n_trunc);
            m.view_mut((d, d), (fock.dim(), fock.dim())).copy_from(&keep);
        }
        m
    };
    let mut isometry_residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let gram = v[i].adjoint() * &v[j];
            let expected = if i == j {
                CMatrix::identity(dim_k, dim_k)
            } else {
                CMatrix::zeros(dim_k, dim_k)
            };
            isometry_residual = isometry_residual.max(op_norm(&((gram - expected) * &margin)));
        }
    }
    if isometry_residual > tol.eq_tol {
        return Err(Error::StructureViolation(format!(
            "dilation isometry defect {isometry_residual:.3e} on margin"
        )));
    }

    // Minimality at truncation: span{V_alpha H : |alpha| <= N} = K (a word
    // of length k reaches Fock degree k-1, so the top degree needs length N).
    let mut layers: Vec<CMatrix> = vec![embed.clone()];
    let mut all = vec![embed.clone()];
    for _ in 1..=n_trunc {
        let mut next = Vec::new();
        for b in &layers {
            for vi in &v {
                next.push(vi * b);
            }
        }
        all.extend(next.iter().cloned());
        layers = next;
    }
    let refs: Vec<&CMatrix> = all.iter().collect();
    let span = range_basis(&hcat(&refs), &tol);
    if span.dim() != dim_k {
        return Err(Error::StructureViolation(format!(
            "dilation span has dimension {} < {}",
            span.dim(),
            dim_k
        )));
    }

    // Wandering generators.
    let mut l_gens = Vec::new();
    for (i, vi) in v.iter().enumerate() {
        l_gens.push(vi * &embed - &embed * &t.matrices()[i]);
    }
    let l_refs: Vec<&CMatrix> = l_gens.iter().collect();
    let l = range_basis(&hcat(&l_refs), &tol);
    let mut lstar_gen = embed.clone();
    for (i, vi) in v.iter().enumerate() {
        lstar_gen -= vi * &embed * t.matrices()[i].adjoint();
    }
    let l_star = range_basis(&lstar_gen, &tol);

    if l.dim() != dim_d {
        return Err(Error::StructureViolation(format!(
            "dim L = {} but dim D = {}",
            l.dim(),
            dim_d
        )));
    }
    let exact = op_norm(&t.phi_iterate(n_trunc)) <= tol.eq_tol;

    Ok(DilationSystem {
        t: t.clone(),
        trunc: n_trunc,
        fock,
        defect_range,
        v,
        l,
        l_star,
        exact,
        isometry_residual,
    })
}

/// Wold decomposition data for a row isometry on a finite space.
#[derive(Debug, Clone)]
pub struct Wold {
    /// Range of the SOT-limit of `sum V_alpha V_alpha^*`: the Cuntz part.
    pub residual: SubspaceBasis,
    /// `space - sum V_i(space)`: the wandering subspace of the shift part.
    pub wandering: SubspaceBasis,
    /// The limit `Q` of the iteration (approximately a projection).
    pub limit: CMatrix,
    pub iterations: usize,
    /// Residual of the Wold identity `space = residual (+) M_V(wandering)`.
    pub identity_residual: f64,
}

/// Wold decomposition of a row isometry `V` acting on a finite space, by
/// iterating `Q -> sum V_i Q V_i^*` from `Q = I` until stability.
pub fn wold(v: &[CMatrix], tol: &Tolerance, horizon: usize) -> Result<Wold> {
    if v.is_empty() {
        return Err(Error::InvalidInput("need at least one isometry".into()));
    }
    let dim = v[0].nrows();
    if dim == 0 {
        return Ok(Wold {
            residual: SubspaceBasis::zero(0),
            wandering: SubspaceBasis::zero(0),
            limit: CMatrix::zeros(0, 0),
            iterations: 0,
            identity_residual: 0.0,
        });
    }
    let mut q = CMatrix::identity(dim, dim);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    for k in 0..horizon {
        let next = crate::rowcontraction::phi_map(v, &q);
        residual = max_abs(&(&next - &q));
        q = next;
        iterations = k + 1;
        if residual <= tol.eq_tol * 1e-2 {
            break;
        }
    }
    if residual > tol.eq_tol {
        return Err(Error::NotConverged { horizon, residual });
    }

    // The limit is (approximately) the projection onto the residual space:
    // split its spectrum at 1/2.
    let (vals, vecs) = crate::numerics::herm_eigen(&q);
    let keep: Vec<usize> = (0..dim).filter(|&i| vals[i] >= 0.5).collect();
    let mut basis = CMatrix::zeros(dim, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        basis.column_mut(j).copy_from(&vecs.column(i));
    }
    let residual_space = SubspaceBasis::from_orthonormal(basis, tol)?;

    let shifted_refs: Vec<&CMatrix> = v.iter().collect();
    let shifted = range_basis(&hcat(&shifted_refs), tol);
    let wandering = shifted.complement(tol);

    // Wold identity: residual (+) span{V_alpha wandering} fills the space.
    let mut span_blocks: Vec<CMatrix> = vec![residual_space.basis().clone()];
    let mut layer = wandering.basis().clone();
    for _ in 0..dim {
        if layer.ncols() == 0 {
            break;
        }
        span_blocks.push(layer.clone());
        let parts: Vec<CMatrix> = v.iter().map(|vi| vi * &layer).collect();
        let refs: Vec<&CMatrix> = parts.iter().collect();
        layer = hcat(&refs);
        let total: usize = span_blocks.iter().map(|b| b.ncols()).sum();
        if total > 4 * dim {
            break;
        }
    }
    let refs: Vec<&CMatrix> = span_blocks.iter().collect();
    let span = range_basis(&hcat(&refs), tol);
    let identity_residual = SubspaceBasis::full(dim).distance(&span)?;

    Ok(Wold {
        residual: residual_space,
        wandering,
        limit: q,
        iterations,
        identity_residual,
    })
}

/// Fourier representation of the wandering lattice `M_V(W)`: the unitary
/// relabeling `V_alpha w_j -> e_alpha (x) f_j` realized as a matrix from the
/// ambient space onto `F^2_{<=margin} (x) C^{dim W}`.
#[derive(Debug, Clone)]
pub struct FourierRep {
    /// Adjoint direction: columns are `V_alpha w_j`, Fock-major order.
    pub lattice: CMatrix,
    /// The representation map from the ambient space to Fock coordinates.
    pub map: CMatrix,
    pub fock: TruncatedFock,
    pub gram_residual: f64,
    pub intertwining_residual: f64,
}

/// Builds the Fourier representation of `span{V_alpha W : |alpha| <= margin}`.
///
/// Fails with `NotWandering` if the translates `V_alpha W` are not mutually
/// orthonormal within tolerance on the requested margin.
pub fn fourier_representation(
    v: &[CMatrix],
    w: &SubspaceBasis,
    margin: usize,
    tol: &Tolerance,
) -> Result<FourierRep> {
    let n = v.len();
    let dim = v[0].nrows();
    if w.ambient_dim() != dim {
        return Err(Error::AmbientMismatch(w.ambient_dim(), dim));
    }
    let dim_w = w.dim();
    let fock = TruncatedFock::new(n as u32, margin, dim_w)?;
    let mut lattice = CMatrix::zeros(dim, fock.dim());
    // Walk words in graded order, reusing the parent column block.
    let mut word_cols: Vec<CMatrix> = Vec::with_capacity(fock.word_count());
    for (wi, word) in fock.words().iter().enumerate() {
        let cols = if word.is_identity() {
            w.basis().clone()
        } else {
            let first = word.first().expect("nonempty") as usize;
            let tail = word.tail().expect("nonempty");
            let parent_idx = fock.word_index(&tail).expect("prefix-closed");
            &v[first - 1] * &word_cols[parent_idx]
        };
        if dim_w > 0 {
            lattice
                .view_mut((0, wi * dim_w), (dim, dim_w))
                .copy_from(&cols);
        }
        word_cols.push(cols);
    }
    let gram = lattice.adjoint() * &lattice;
    let eye = CMatrix::identity(gram.nrows(), gram.ncols());
    let gram_residual = op_norm(&(&gram - &eye));
    if gram_residual > tol.eq_tol {
        return Err(Error::NotWandering {
            residual: gram_residual,
        });
    }
    let map = lattice.adjoint().into_owned();

    // Intertwining with left creation on the sub-margin.
    let keep = fock.degree_projector_where(|deg| deg + 1 <= margin);
    let mut intertwining_residual: f64 = 0.0;
    for (i, vi) in v.iter().enumerate() {
        let s = fock.creation_matrix((i + 1) as u32, Side::Left)?;
        let diff = (&map * vi - &s * &map) * &lattice * &keep;
        intertwining_residual = intertwining_residual.max(op_norm(&diff));
    }

    Ok(FourierRep {
        lattice,
        map,
        fock,
        gram_residual,
        intertwining_residual,
    })
}

/// The decreasing projection residuals `||P_R h - sum_{|a|=k} V_a T_a^* h||`
/// for `h` ranging over `H`, reported per word length `k`.
pub fn residual_projection_curve(ds: &DilationSystem, wold_data: &Wold, k_max: usize) -> Vec<f64> {
    let embed = ds.embed_h();
    let p_r = wold_data.residual.projector();
    let mut curve = Vec::with_capacity(k_max + 1);
    let mut terms: Vec<(Vec<usize>, CMatrix)> = vec![(vec![], embed.clone())];
    for k in 0..=k_max {
        let mut acc = CMatrix::zeros(ds.dim_k(), ds.dim_h());
        for (word, vpart) in &terms {
            let mut tpart = CMatrix::identity(ds.dim_h(), ds.dim_h());
            for &i in word.iter().rev() {
                tpart = ds.contraction().matrices()[i].adjoint() * tpart;
            }
            acc += vpart * tpart;
        }
        curve.push(op_norm(&(&p_r * &embed - acc)));
        if k == k_max {
            break;
        }
        let mut next = Vec::new();
        for (word, vpart) in &terms {
            for (i, vi) in ds.isometries().iter().enumerate() {
                let mut w2 = word.clone();
                w2.push(i);
                next.push((w2, vi * vpart));
            }
        }
        terms = next;
    }
    curve
}

/// Moment check of the dilation property: `V_alpha^*|_H = T_alpha^*` for all
/// words up to the given length; returns the worst residual.
pub fn dilation_moment_residual(ds: &DilationSystem, max_len: usize) -> f64 {
    let embed = ds.embed_h();
    let mut worst: f64 = 0.0;
    for word in crate::words::enumerate_words(ds.contraction().n() as u32, max_len) {
        let mut v_alpha = CMatrix::identity(ds.dim_k(), ds.dim_k());
        let mut t_alpha = CMatrix::identity(ds.dim_h(), ds.dim_h());
        for &letter in word.letters() {
            v_alpha = &v_alpha * &ds.isometries()[(letter - 1) as usize];
            t_alpha = &t_alpha * &ds.contraction().matrices()[(letter - 1) as usize];
        }
        let diff = v_alpha.adjoint() * embed.clone() - embed.clone() * t_alpha.adjoint();
        worst = worst.max(max_abs(&diff));
    }
    worst
}

/// Left creation tuple `S_i (x) I` on a truncated Fock space, the model row
/// isometry.
pub fn creation_tuple(space: &TruncatedFock) -> Result<Vec<CMatrix>> {
    (1..=space.n())
        .map(|i| space.creation_matrix(i, Side::Left))
        .collect()
}
