//! Joint similarity to Cuntz row isometries: the asymptotic operator `P`,
//! the similarity pipeline built from it, and the invertibility detector
//! for characteristic functions.
//!
//! The Banach limit of the underlying proofs is replaced by Cesaro
//! averaging followed by a fixed-point refinement `P <- (P + Phi(P))/2`;
//! this is exact for convergent and for periodic moment sequences, and the
//! only facts used downstream are the fixed-point identity and the
//! two-sided bounds, which the refinement preserves.

use crate::charfn::char_fn;
use crate::error::{Error, Result};
use crate::multianalytic::MultiAnalyticOp;
use crate::numerics::{
    max_abs, min_eigenvalue, op_norm, psd_sqrt, sigma_min, CMatrix, Tolerance,
};
use crate::rowcontraction::{phi_map, PowerBoundedTuple, RowContraction};

/// Why a similarity verdict came out negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityObstruction {
    /// The row operator `[T_1 ... T_n]` is not injective; for `n >= 2` this
    /// is automatic in finite dimensions (rank `nd` cannot fit in `d`).
    Injectivity,
    /// The moment sequence diverges.
    NotPowerBounded,
    /// `inf_k sum_{|a|=k} ||T_a^* h||^2` is not bounded below.
    LowerBound,
}

/// Outcome of the similarity pipeline.
#[derive(Debug, Clone)]
pub struct SimilarityReport {
    pub similar: Option<bool>,
    pub obstruction: Option<SimilarityObstruction>,
    /// The asymptotic operator (fixed point of `Phi`), when computed.
    pub p: Option<CMatrix>,
    /// `X = P^{1/2}`; the similarity is `T_i = X W_i X^{-1}`.
    pub x: Option<CMatrix>,
    /// The similar row isometry candidates `W_i = X^{-1} T_i X`.
    pub w: Vec<CMatrix>,
    pub cond_x: Option<f64>,
    /// `c = min_k lambda_min(Phi^k(I))` over the probe horizon.
    pub lower_bound: f64,
    /// `||sum W_i W_i^* - I||` for the recovered tuple.
    pub cuntz_residual: Option<f64>,
    /// `max_i ||T_i X - X W_i||`.
    pub intertwining_residual: Option<f64>,
    /// `||Phi(P) - P||` of the refined fixed point.
    pub fixed_point_residual: Option<f64>,
}

/// Injectivity of the row operator `[T_1, ..., T_n] : C^{nd} -> C^d`.
pub fn injectivity_check(t: &[CMatrix], tol: &Tolerance) -> bool {
    let n = t.len();
    let d = t[0].nrows();
    if n * d > d {
        return false;
    }
    let refs: Vec<&CMatrix> = t.iter().collect();
    let row = crate::numerics::hcat(&refs);
    crate::numerics::range_basis(&row, tol).dim() == n * d
}

/// `c = min_{1 <= k <= horizon} lambda_min(Phi^k(I))`; for row contractions
/// the minimum is attained in the limit by monotonicity.
pub fn lower_bound_check(t: &[CMatrix], horizon: usize) -> f64 {
    let d = t[0].nrows();
    let mut x = CMatrix::identity(d, d);
    let mut c = f64::INFINITY;
    for _ in 1..=horizon {
        x = phi_map(t, &x);
        c = c.min(min_eigenvalue(&x));
    }
    c.max(0.0)
}

/// The asymptotic operator of a power-bounded tuple: Cesaro average of
/// `Phi^k(I)` projected onto the fixed-point set of `Phi` by repeated
/// averaging with its own image.
pub fn asymptotic_p(pb: &PowerBoundedTuple, horizon: usize, conv_tol: f64) -> Result<CMatrix> {
    let d = pb.d();
    let mut power = CMatrix::identity(d, d);
    let mut sum = CMatrix::zeros(d, d);
    let mut avg = CMatrix::identity(d, d);
    let mut stable = false;
    let mut check_every = 8usize;
    let mut last_avg = avg.clone();
    for k in 1..=horizon {
        power = pb.phi(&power);
        sum += &power;
        if k % check_every == 0 {
            avg = sum.scale(1.0 / k as f64);
            if max_abs(&(&avg - &last_avg)) <= conv_tol.max(1e-3) {
                stable = true;
                break;
            }
            last_avg = avg.clone();
            check_every = (check_every * 2).min(256);
        }
    }
    if !stable {
        avg = sum.scale(1.0 / horizon as f64);
    }
    // Fixed-point refinement: averaging with Phi kills the oscillating and
    // the decaying components alike.
    let mut p = avg;
    let mut residual = f64::INFINITY;
    for _ in 0..horizon.max(64) {
        let image = pb.phi(&p);
        residual = max_abs(&(&image - &p));
        if residual <= conv_tol {
            return Ok((&p + p.adjoint()).scale(0.5));
        }
        p = (&p + &image).scale(0.5);
    }
    Err(Error::NotConverged {
        horizon,
        residual,
    })
}

/// Runs the full similarity pipeline on a raw tuple.
///
/// The intertwining orientation is fixed as `T_i = X W_i X^{-1}` with
/// `X = P^{1/2}`, which makes `sum W_i W_i^* = I` the Cuntz normalization
/// of the recovered tuple.
pub fn similarity_to_cuntz(
    t: &[CMatrix],
    horizon: usize,
    tol: &Tolerance,
) -> Result<SimilarityReport> {
    if t.is_empty() {
        return Err(Error::InvalidInput("tuple must have n >= 1 entries".into()));
    }
    let lower_bound = lower_bound_check(t, horizon.min(64));
    let mut report = SimilarityReport {
        similar: None,
        obstruction: None,
        p: None,
        x: None,
        w: Vec::new(),
        cond_x: None,
        lower_bound,
        cuntz_residual: None,
        intertwining_residual: None,
        fixed_point_residual: None,
    };
    if !injectivity_check(t, tol) {
        report.similar = Some(false);
        report.obstruction = Some(SimilarityObstruction::Injectivity);
        return Ok(report);
    }
    let pb = match PowerBoundedTuple::probe(t.to_vec(), horizon) {
        Ok(pb) => pb,
        Err(Error::NotPowerBounded { .. }) => {
            report.similar = Some(false);
            report.obstruction = Some(SimilarityObstruction::NotPowerBounded);
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    if lower_bound <= 100.0 * tol.eq_tol {
        report.similar = Some(false);
        report.obstruction = Some(SimilarityObstruction::LowerBound);
        return Ok(report);
    }

    let p = asymptotic_p(&pb, horizon.max(512), tol.eq_tol * 1e-2)?;
    report.fixed_point_residual = Some(max_abs(&(pb.phi(&p) - &p)));
    let x = psd_sqrt(&p, tol)?;
    let (vals, vecs) = crate::numerics::herm_eigen(&x);
    let vmin = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = vals.iter().copied().fold(0.0, f64::max);
    if vmin <= tol.eq_tol {
        report.similar = Some(false);
        report.obstruction = Some(SimilarityObstruction::LowerBound);
        return Ok(report);
    }
    let x_inv = {
        let mut scaled = vecs.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= crate::numerics::cplx(1.0 / vals[j], 0.0);
        }
        &scaled * vecs.adjoint()
    };
    let w: Vec<CMatrix> = t.iter().map(|ti| &x_inv * ti * &x).collect();
    let d = t[0].nrows();
    let mut cuntz = CMatrix::zeros(d, d);
    for wi in &w {
        cuntz += wi * wi.adjoint();
    }
    let cuntz_residual = op_norm(&(&cuntz - CMatrix::identity(d, d)));
    let mut isometry_residual: f64 = 0.0;
    for (i, wi) in w.iter().enumerate() {
        for (j, wj) in w.iter().enumerate() {
            let gram = wi.adjoint() * wj;
            let expected = if i == j {
                CMatrix::identity(d, d)
            } else {
                CMatrix::zeros(d, d)
            };
            isometry_residual = isometry_residual.max(op_norm(&(gram - expected)));
        }
    }
    let intertwining_residual = t
        .iter()
        .zip(&w)
        .map(|(ti, wi)| op_norm(&(ti * &x - &x * wi)))
        .fold(0.0, f64::max);

    report.p = Some(p);
    report.x = Some(x);
    report.w = w;
    report.cond_x = Some(vmax / vmin);
    report.cuntz_residual = Some(cuntz_residual);
    report.intertwining_residual = Some(intertwining_residual);
    let ok = cuntz_residual <= 100.0 * tol.eq_tol && isometry_residual <= 100.0 * tol.eq_tol;
    report.similar = Some(ok);
    Ok(report)
}

/// Verdict of the truncated-section invertibility probe.
#[derive(Debug, Clone)]
pub struct InvertibilityVerdict {
    /// `Some(true)`: smallest singular values stabilize above the floor;
    /// `Some(false)`: they decay toward zero; `None`: neither trend is
    /// clear at the probed degrees.
    pub invertible: Option<bool>,
    /// `(degree, sigma_min)` samples, ascending degrees.
    pub sigma_mins: Vec<(usize, f64)>,
    /// `1 / sigma_min(stabilized)` when invertible.
    pub theta_inv_norm: Option<f64>,
}

/// Floor below which a stabilized smallest singular value still counts as
/// zero (the truncation cannot distinguish it from decay).
const INVERTIBILITY_FLOOR: f64 = 1e-6;

/// Probes invertibility of a multi-analytic operator by the smallest
/// singular value of its truncated sections across the given degrees.
pub fn symbol_invertibility(
    op: &MultiAnalyticOp,
    degrees: &[usize],
    _tol: &Tolerance,
) -> Result<InvertibilityVerdict> {
    if degrees.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least two probe degrees".into(),
        ));
    }
    let mut degs = degrees.to_vec();
    degs.sort_unstable();
    let mut samples = Vec::with_capacity(degs.len());
    for &m in &degs {
        let mat = op.to_matrix(m)?;
        if mat.nrows() < mat.ncols() || op.dim_in() == 0 || op.dim_out() == 0 {
            samples.push((m, 0.0));
        } else {
            samples.push((m, sigma_min(&mat)));
        }
    }
    let first = samples.first().expect("nonempty").1;
    let (last_deg, last) = *samples.last().expect("nonempty");
    let prev = samples[samples.len() - 2].1;
    let _ = last_deg;
    let rel_change = (last - prev).abs() / last.max(1e-300);
    let decaying = last <= INVERTIBILITY_FLOOR
        || (samples.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12) && last <= 0.25 * first);
    let stabilized = rel_change <= 0.05 && last > INVERTIBILITY_FLOOR;
    let (invertible, theta_inv_norm) = if stabilized {
        (Some(true), Some(1.0 / last))
    } else if decaying {
        (Some(false), None)
    } else {
        (None, None)
    };
    Ok(InvertibilityVerdict {
        invertible,
        sigma_mins: samples,
        theta_inv_norm,
    })
}

/// The invertible-characteristic-function criterion for a c.n.c. row
/// contraction.
pub fn invertible_charfn_criterion(
    t: &RowContraction,
    degrees: &[usize],
    tol: &Tolerance,
) -> Result<InvertibilityVerdict> {
    let hc = t.compute_hc();
    if hc.dim() != 0 {
        return Err(Error::NotCnc { dim_hc: hc.dim() });
    }
    let max_deg = degrees.iter().copied().max().unwrap_or(2);
    let theta = char_fn(t, max_deg)?;
    symbol_invertibility(&theta, degrees, tol)
}
