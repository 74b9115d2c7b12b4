//! Dense complex linear algebra shared by every numerical layer.
//!
//! Matrices are column-major `nalgebra::DMatrix<Complex64>`; products go through
//! `matrixmultiply::zgemm` (SIMD-blocked, ~4-10x faster than the generic path at the
//! sizes used here), factorizations through nalgebra. Spans of operators live in the
//! Hilbert–Schmidt geometry ⟨S,T⟩ = tr(S*T), orthonormalized by modified
//! Gram–Schmidt with re-orthogonalization; subspace equality is decided through
//! principal angles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::RngExt;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ONE: C64 = Complex64::new(1.0, 0.0);
pub const ZERO: C64 = Complex64::new(0.0, 0.0);

/// Deterministic RNG for probe vectors and sampled checks; every entry point that
/// samples takes a seed so reports are reproducible.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// C = A·B via zgemm.
pub fn mul(a: &CMat, b: &CMat) -> CMat {
    let (m, k) = a.shape();
    let (k2, n) = b.shape();
    assert_eq!(k, k2, "matrix product dimension mismatch: {k} vs {k2}");
    let mut c = CMat::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_slice().as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_slice().as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_slice().as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// Aᴴ·B via an elementwise-conjugated copy of A and transposed strides (the
/// copy is linear in the data, negligible next to the product).
pub fn ad_mul(a: &CMat, b: &CMat) -> CMat {
    let (k, m) = a.shape();
    let (k2, n) = b.shape();
    assert_eq!(k, k2, "adjoint product dimension mismatch: {k} vs {k2}");
    let mut c = CMat::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    let a_conj = a.conjugate();
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a_conj.as_slice().as_ptr() as *const [f64; 2],
            k as isize,
            1,
            b.as_slice().as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_slice().as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// Exact factorization U = I_left ⊗ K when it holds entrywise (block pattern
/// with identical diagonal blocks and exactly-zero off-blocks); returns K.
pub fn factor_identity_kron(u: &CMat, left: usize, right: usize) -> Option<CMat> {
    if u.nrows() != left * right || u.ncols() != left * right {
        return None;
    }
    let k = u.view((0, 0), (right, right)).into_owned();
    for i in 0..left {
        for j in 0..left {
            for r in 0..right {
                for c in 0..right {
                    let expected = if i == j { k[(r, c)] } else { ZERO };
                    if u[(i * right + r, j * right + c)] != expected {
                        return None;
                    }
                }
            }
        }
    }
    Some(k)
}

/// Matrices vectorized side by side as the columns of an n²×k matrix.
pub fn stack_columns(mats: &[CMat]) -> CMat {
    if mats.is_empty() {
        return CMat::zeros(0, 0);
    }
    let len = mats[0].nrows() * mats[0].ncols();
    let mut s = CMat::zeros(len, mats.len());
    for (j, m) in mats.iter().enumerate() {
        s.column_mut(j).copy_from_slice(m.as_slice());
    }
    s
}

/// A·B·C, associating to keep intermediates small-ish.
pub fn mul3(a: &CMat, b: &CMat, c: &CMat) -> CMat {
    mul(&mul(a, b), c)
}

/// Conjugation U·X·U*.
pub fn conjugate(u: &CMat, x: &CMat) -> CMat {
    mul(&mul(u, x), &u.adjoint())
}

/// Commutator [A,B] = AB − BA.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    mul(a, b) - mul(b, a)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Hilbert–Schmidt inner product ⟨S,T⟩ = tr(S*T) = Σ conj(S_ij)T_ij.
pub fn hs_inner(s: &CMat, t: &CMat) -> C64 {
    s.iter().zip(t.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius_norm(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator (spectral) norm via power iteration on A*A; deterministic start vector.
/// Converges fast for the well-separated spectra that arise here; used only where an
/// operator norm (not Frobenius) is mathematically required, e.g. norm inequalities.
pub fn operator_norm(a: &CMat) -> f64 {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return 0.0;
    }
    let mut v = CVec::from_fn(n, |i, _| {
        Complex64::new(((i * 37 + 11) % 97) as f64 / 97.0 + 0.1, ((i * 53 + 7) % 89) as f64 / 89.0)
    });
    v /= Complex64::new(v.norm(), 0.0);
    let mut lambda = 0.0f64;
    for _ in 0..200 {
        let w = a.adjoint() * (a * &v);
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = &w / Complex64::new(nw, 0.0);
        let new_lambda = nw;
        let drift = (new_lambda - lambda).abs() / new_lambda.max(1e-300);
        v = next;
        lambda = new_lambda;
        if drift < 1e-14 {
            break;
        }
    }
    lambda.sqrt()
}

/// Max-column-norm relative residual of (A − B) against probe vectors; a cheap
/// lower bound on the operator-norm distance used by matrix-free checks.
pub fn probe_residual<F, G>(dim: usize, apply_a: F, apply_b: G, probes: usize, seed: u64) -> f64
where
    F: Fn(&CVec) -> CVec,
    G: Fn(&CVec) -> CVec,
{
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let v = random_unit_vector(dim, &mut rng);
        let d = apply_a(&v) - apply_b(&v);
        worst = worst.max(d.norm());
    }
    worst
}

pub fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> CVec {
    let mut v = CVec::from_fn(dim, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let n = v.norm();
    if n > 0.0 {
        v /= Complex64::new(n, 0.0);
    }
    v
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

/// Flattens an operator into a Hilbert–Schmidt vector (column-major).
pub fn vectorize(a: &CMat) -> CVec {
    CVec::from_column_slice(a.as_slice())
}

pub fn unvectorize(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

/// An orthonormal family spanning the same space as `vectors`, built by modified
/// Gram–Schmidt with one re-orthogonalization pass. Vectors whose residual after
/// projection is below `tol`·(their norm + 1) are dropped as dependent.
pub fn orthonormalize(vectors: &[CVec], tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w -= b * c;
            }
        }
        if w.norm() > tol * (scale + 1.0) {
            let n = w.norm();
            basis.push(w / Complex64::new(n, 0.0));
        }
    }
    basis
}

/// Rank of the span of `vectors` at relative tolerance `tol`.
pub fn span_rank(vectors: &[CVec], tol: f64) -> usize {
    orthonormalize(vectors, tol).len()
}

/// Residual of `v` against the span of an orthonormal `basis` (norm of the
/// projection defect). Zero iff v lies in the span.
pub fn projection_defect(basis: &[CVec], v: &CVec) -> f64 {
    let mut w = v.clone();
    for b in basis {
        let c = b.dotc(&w);
        w -= b * c;
    }
    w.norm()
}

/// Largest principal angle (radians) between the spans of two orthonormal families
/// of the same ambient dimension. Returns `None` when the dimensions differ (the
/// subspaces cannot be equal). Computed from projection defects in both directions:
/// sin θ_max = max defect, which bounds the angle from above and is exact for the
/// extremal vector.
pub fn max_principal_angle(basis_a: &[CVec], basis_b: &[CVec]) -> Option<f64> {
    if basis_a.len() != basis_b.len() {
        return None;
    }
    let mut worst = 0.0f64;
    for v in basis_b {
        worst = worst.max(projection_defect(basis_a, v));
    }
    for v in basis_a {
        worst = worst.max(projection_defect(basis_b, v));
    }
    Some(worst.min(1.0).asin())
}

/// Hermitian eigendecomposition (ascending eigenvalues) with orthonormal
/// eigenvectors; wraps nalgebra's SymmetricEigen and sorts.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let sym = nalgebra::SymmetricEigen::new(h.clone());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| sym.eigenvalues[i].partial_cmp(&sym.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| sym.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &sym.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Applies a real function to a Hermitian matrix through its eigendecomposition.
pub fn hermitian_function(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(h);
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&x| Complex64::new(f(x), 0.0)),
    ));
    mul3(&vecs, &d, &vecs.adjoint())
}

/// Positive square root of a positive semidefinite Hermitian matrix.
pub fn psd_sqrt(h: &CMat) -> CMat {
    hermitian_function(h, |x| x.max(0.0).sqrt())
}

/// Orthonormal basis of the (near-)nullspace of a Hermitian PSD matrix `g`:
/// eigenvectors with eigenvalue ≤ tol·max(1, λ_max).
pub fn hermitian_nullspace(g: &CMat, tol: f64) -> Vec<CVec> {
    let (vals, vecs) = hermitian_eigen(g);
    let lam_max = vals.last().copied().unwrap_or(0.0).max(1.0);
    let mut out = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        if v <= tol * lam_max {
            out.push(vecs.column(i).into_owned());
        }
    }
    out
}

/// Joint eigendecomposition of a normal matrix T = H₁ + iH₂ via simultaneous
/// diagonalization of the commuting Hermitian parts: eigendecompose H₁, then within
/// each eigenvalue cluster eigendecompose the compression of H₂. Returns complex
/// eigenvalues and a unitary of eigenvectors. `cluster_tol` groups H₁-eigenvalues.
pub fn normal_eigen(t: &CMat, cluster_tol: f64) -> (Vec<C64>, CMat) {
    let n = t.nrows();
    let h1 = (t + t.adjoint()) * Complex64::new(0.5, 0.0);
    let h2 = (t - t.adjoint()) * Complex64::new(0.0, -0.5);
    let (vals1, vecs1) = hermitian_eigen(&h1);
    let mut eigvals = vec![ZERO; n];
    let mut eigvecs = CMat::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (vals1[end] - vals1[end - 1]).abs() <= cluster_tol {
            end += 1;
        }
        let block: Vec<usize> = (start..end).collect();
        let q = CMat::from_fn(n, block.len(), |i, j| vecs1[(i, block[j])]);
        let h2c = mul3(&q.adjoint(), &h2, &q);
        let (vals2, vecs2) = hermitian_eigen(&h2c);
        let refined = mul(&q, &vecs2);
        for (j, &v2) in vals2.iter().enumerate() {
            let col = start + j;
            // Rayleigh quotient on H1 keeps the true (possibly intra-cluster) value.
            let w = refined.column(j).into_owned();
            let v1 = w.dotc(&(&h1 * &w)).re;
            eigvals[col] = Complex64::new(v1, v2);
            eigvecs.set_column(col, &refined.column(j));
        }
        start = end;
    }
    (eigvals, eigvecs)
}

/// Groups sorted real values into clusters with gaps > `gap`; returns (value,
/// member indices) per cluster. Used by spectral block extraction.
pub fn cluster_reals(vals: &[f64], gap: f64) -> Vec<(f64, Vec<usize>)> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for &i in &idx {
        match out.last_mut() {
            Some((v, members)) if (vals[i] - *v).abs() <= gap => {
                members.push(i);
                *v = (*v * (members.len() - 1) as f64 + vals[i]) / members.len() as f64;
            }
            _ => out.push((vals[i], vec![i])),
        }
    }
    out
}

/// Applies `op` (d×d) to the tensor legs `legs` of a vector on a space with factor
/// dimensions `dims` (leg 0 is the slowest-varying index, matching `kron` order).
/// Cost O(len·d) instead of materializing the embedded operator.
pub fn apply_on_legs(op: &CMat, dims: &[usize], legs: &[usize], v: &CVec) -> CVec {
    let total: usize = dims.iter().product();
    assert_eq!(v.len(), total, "vector length does not match tensor dims");
    let leg_dim: usize = legs.iter().map(|&l| dims[l]).product();
    assert_eq!(op.nrows(), leg_dim, "operator does not match selected legs");
    assert_eq!(op.ncols(), leg_dim, "operator must be square on its legs");

    // Strides for each factor (kron order: leg 0 slowest).
    let k = dims.len();
    let mut strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let others: Vec<usize> = (0..k).filter(|i| !legs.contains(i)).collect();
    let other_total: usize = others.iter().map(|&i| dims[i]).product();

    let mut out = CVec::zeros(total);
    let mut in_block = CVec::zeros(leg_dim);
    for block in 0..other_total {
        // Decode the multi-index of the spectator legs and its base offset.
        let mut rem = block;
        let mut base = 0usize;
        for &oi in &others {
            let d = dims[oi];
            let digit = rem % d;
            rem /= d;
            base += digit * strides[oi];
        }
        // Gather the sub-vector over the acted legs (row-major over `legs` order).
        for li in 0..leg_dim {
            let mut lrem = li;
            let mut off = 0usize;
            for &l in legs.iter().rev() {
                let d = dims[l];
                off += (lrem % d) * strides[l];
                lrem /= d;
            }
            in_block[li] = v[base + off];
        }
        let out_block = op * &in_block;
        for li in 0..leg_dim {
            let mut lrem = li;
            let mut off = 0usize;
            for &l in legs.iter().rev() {
                let d = dims[l];
                off += (lrem % d) * strides[l];
                lrem /= d;
            }
            out[base + off] = out_block[li];
        }
    }
    out
}
