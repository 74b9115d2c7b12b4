//! Deformed commutation relations for pairs of normal operators.
//!
//! For strictly positive reals p, q the relations RS = p·SR and RS* = q·S*R
//! have two rigorous finite-dimensional readings, and this module checks
//! both:
//!
//! * **Polar form.** Split R = Phase(R)·|R| and S = Phase(S)·|S|. The pair is
//!   (p,q)-commuting when |R| and |S| strongly commute, the phases commute,
//!   and conjugation by a phase scales the other modulus on the support of
//!   the first operator: Phase(R)|S|Phase(R)* = √(pq)·|S| on (ker R)⊥ and
//!   Phase(S)|R|Phase(S)* = √(q/p)·|R| on (ker S)⊥.
//! * **z-transform form.** With z(T) = T(1+T*T)^{−1/2} (a normality-
//!   preserving contraction), the pair is (p,q)-commuting when
//!   z(R)z(S*) = z(√(pq)·S*)z(√(q/p)·R) and z(√(q/p)·R)z(S) = z(√(pq)·S)z(R).
//!
//! The two readings are equivalent for normal operators, and the test suite
//! exercises that equivalence on randomized families. At p = q = 1 both
//! reduce to strong commutation. For p·q ≠ 1 the scaling relation forces the
//! moduli to vanish on each other's supports — nonzero examples exist exactly
//! when the two operators live on orthogonal subspaces, which is why the
//! kernel restriction in the polar form matters.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{
    ad_mul, cluster_reals, commutator, conjugate, frobenius_norm, hermitian_eigen,
    hermitian_function, identity, mul, C64, CMat,
};

/// Largest tolerated self-commutator norm ‖[T*,T]‖ relative to ‖T‖² for an
/// operator admitted as normal.
pub const NORMALITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum RelationsError {
    #[error("{what} is not square ({rows}×{cols})")]
    NotSquare {
        what: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("operators act on different spaces ({r} vs {s})")]
    DimensionMismatch { r: usize, s: usize },
    #[error("{what} is not normal: ‖[T*,T]‖ = {residual:.3e} exceeds the admission bound")]
    NotNormal { what: &'static str, residual: f64 },
    #[error("scaling parameters must be strictly positive and finite, got p = {p}, q = {q}")]
    NotPositive { p: f64, q: f64 },
}

/// A validated pair of normal operators on a common finite-dimensional space,
/// together with the scaling parameters of the relations RS = p·SR,
/// RS* = q·S*R.
#[derive(Debug, Clone)]
pub struct NormalPair {
    pub r: CMat,
    pub s: CMat,
    pub p: f64,
    pub q: f64,
}

fn ensure_normal(t: &CMat, what: &'static str) -> Result<(), RelationsError> {
    let (rows, cols) = t.shape();
    if rows != cols {
        return Err(RelationsError::NotSquare { what, rows, cols });
    }
    let residual = frobenius_norm(&commutator(&t.adjoint(), t));
    let scale = 1.0 + frobenius_norm(t).powi(2);
    if residual > NORMALITY_TOL * scale {
        return Err(RelationsError::NotNormal { what, residual });
    }
    Ok(())
}

impl NormalPair {
    pub fn new(r: CMat, s: CMat, p: f64, q: f64) -> Result<Self, RelationsError> {
        ensure_normal(&r, "R")?;
        ensure_normal(&s, "S")?;
        if r.nrows() != s.nrows() {
            return Err(RelationsError::DimensionMismatch {
                r: r.nrows(),
                s: s.nrows(),
            });
        }
        if !(p.is_finite() && q.is_finite() && p > 0.0 && q > 0.0) {
            return Err(RelationsError::NotPositive { p, q });
        }
        Ok(NormalPair { r, s, p, q })
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }
}

/// z-transform z(T) = T(1+T*T)^{−1/2}; a contraction with ‖z(T)‖ < 1 that
/// commutes with the functional calculus, so z(T) is normal whenever T is.
pub fn z_transform(t: &CMat) -> CMat {
    let h = identity(t.nrows()) + ad_mul(t, t);
    // Eigenvalues of 1 + T*T are ≥ 1 exactly; the clamp only absorbs rounding.
    mul(t, &hermitian_function(&h, |x| 1.0 / x.max(1.0).sqrt()))
}

/// Inverse of the z-transform on contractions: T = z·(1−z*z)^{−1/2}.
pub fn z_inverse(z: &CMat) -> CMat {
    let h = identity(z.nrows()) - ad_mul(z, z);
    mul(z, &hermitian_function(&h, |x| 1.0 / x.max(f64::MIN_POSITIVE).sqrt()))
}

/// Polar data of one operator: T = phase·modulus with ker(phase) = ker T,
/// plus the orthogonal projection onto (ker T)⊥. Kernel directions are the
/// singular values ≤ tol·max(σ_max, 1).
struct PolarData {
    phase: CMat,
    modulus: CMat,
    support: CMat,
}

fn polar(t: &CMat, tol: f64) -> PolarData {
    let svd = t.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let v = v_t.adjoint();
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cut = tol * smax.max(1.0);
    let n = t.nrows();
    let sigma = CMat::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(svd.singular_values[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let gate = CMat::from_fn(n, n, |i, j| {
        if i == j && svd.singular_values[i] > cut {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    PolarData {
        phase: mul(&mul(&u, &gate), &v_t),
        modulus: mul(&mul(&v, &sigma), &v_t),
        support: mul(&mul(&v, &gate), &v_t),
    }
}

/// Spectral projections of a Hermitian operator, one per eigenvalue cluster.
/// Eigenvalues closer than the gap are merged; the merged projection is the
/// sum of the true ones, so commutation checks against it are conservative.
fn spectral_projections(h: &CMat, gap: f64) -> Vec<CMat> {
    let (vals, vecs) = hermitian_eigen(h);
    cluster_reals(&vals, gap)
        .into_iter()
        .map(|(_, members)| {
            let mut p = CMat::zeros(h.nrows(), h.nrows());
            for idx in members {
                let col = vecs.column(idx);
                p += &col * col.adjoint();
            }
            p
        })
        .collect()
}

/// Residuals of the polar-form relations.
#[derive(Debug, Clone, Serialize)]
pub struct Def1Report {
    /// ‖[|R|, |S|]‖.
    pub modulus_commutator: f64,
    /// max ‖[P, Q]‖ over spectral projections P of |R| and Q of |S|.
    pub projection_commutator: f64,
    /// ‖[Phase R, Phase S]‖.
    pub phase_commutator: f64,
    /// ‖Phase(R)|S|Phase(R)* − √(pq)|S|‖ compressed to (ker R)⊥.
    pub scaling_r: f64,
    /// ‖Phase(S)|R|Phase(S)* − √(q/p)|R|‖ compressed to (ker S)⊥.
    pub scaling_s: f64,
    pub pass: bool,
}

pub fn check_def1(pair: &NormalPair, tol: f64) -> Def1Report {
    let pr = polar(&pair.r, tol);
    let ps = polar(&pair.s, tol);
    let scale = 1.0 + frobenius_norm(&pair.r) + frobenius_norm(&pair.s);

    let modulus_commutator = frobenius_norm(&commutator(&pr.modulus, &ps.modulus));
    // Finite-dimensional strong commutation = commutation of every pair of
    // spectral projections. Clusters are cut at √tol·scale: projections of
    // eigenvalues closer than that are numerically unstable individually,
    // while their merged sum is checked exactly.
    let gap = tol.sqrt() * scale;
    let mut projection_commutator = 0.0f64;
    for p in spectral_projections(&pr.modulus, gap) {
        for q in spectral_projections(&ps.modulus, gap) {
            projection_commutator = projection_commutator.max(frobenius_norm(&commutator(&p, &q)));
        }
    }
    let phase_commutator = frobenius_norm(&commutator(&pr.phase, &ps.phase));

    let root_pq = (pair.p * pair.q).sqrt();
    let root_qp = (pair.q / pair.p).sqrt();
    let diff_r = conjugate(&pr.phase, &ps.modulus) - &ps.modulus * C64::new(root_pq, 0.0);
    let scaling_r = frobenius_norm(&mul(&mul(&pr.support, &diff_r), &pr.support));
    let diff_s = conjugate(&ps.phase, &pr.modulus) - &pr.modulus * C64::new(root_qp, 0.0);
    let scaling_s = frobenius_norm(&mul(&mul(&ps.support, &diff_s), &ps.support));

    let bound = tol * scale;
    let pass = modulus_commutator <= bound
        && projection_commutator <= bound
        && phase_commutator <= bound
        && scaling_r <= bound
        && scaling_s <= bound;
    Def1Report {
        modulus_commutator,
        projection_commutator,
        phase_commutator,
        scaling_r,
        scaling_s,
        pass,
    }
}

/// Residuals of the z-transform relations.
#[derive(Debug, Clone, Serialize)]
pub struct Def2Report {
    /// ‖z(R)z(S*) − z(√(pq)S*)z(√(q/p)R)‖.
    pub first_residual: f64,
    /// ‖z(√(q/p)R)z(S) − z(√(pq)S)z(R)‖.
    pub second_residual: f64,
    pub pass: bool,
}

pub fn check_def2(pair: &NormalPair, tol: f64) -> Def2Report {
    let root_pq = C64::new((pair.p * pair.q).sqrt(), 0.0);
    let root_qp = C64::new((pair.q / pair.p).sqrt(), 0.0);
    let z_r = z_transform(&pair.r);
    let z_s = z_transform(&pair.s);
    let z_s_star = z_transform(&pair.s.adjoint());
    let z_pq_s_star = z_transform(&(pair.s.adjoint() * root_pq));
    let z_qp_r = z_transform(&(&pair.r * root_qp));
    let z_pq_s = z_transform(&(&pair.s * root_pq));

    let first_residual = frobenius_norm(&(mul(&z_r, &z_s_star) - mul(&z_pq_s_star, &z_qp_r)));
    let second_residual = frobenius_norm(&(mul(&z_qp_r, &z_s) - mul(&z_pq_s, &z_r)));
    let bound = tol * (1.0 + pair.dim() as f64);
    Def2Report {
        first_residual,
        second_residual,
        pass: first_residual <= bound && second_residual <= bound,
    }
}
