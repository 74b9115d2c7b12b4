//! Finite-dimensional operator algebra: spaces, structured operators, *-algebras,
//! fixed points, block structure, slice maps.
//!
//! Operators are either dense matrices or lazy structural nodes (permutation,
//! diagonal, tensor factor, sum, product, scalar multiple, leg embedding) that
//! apply to vectors without materializing; `to_dense` and `apply` agree by
//! construction and are cross-checked in tests. A [`StarAlgebra`] is a span of
//! dense matrices orthonormalized in the Hilbert–Schmidt inner product
//! ⟨S,T⟩ = tr(S*T); algebra generation, fixed-point extraction under a finite
//! unitary action, and Wedderburn block sizes all operate on such spans.

use crate::linalg::{
    self, apply_on_legs, frobenius_norm, hermitian_eigen, hermitian_nullspace, identity, kron, mul,
    orthonormalize, rng_from_seed, CMat, CVec, C64, ONE, ZERO,
};
use num_complex::Complex64;
use rand::RngExt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label count {labels} does not match dimension {dim}")]
    BadLabels { labels: usize, dim: usize },
    #[error("permutation map is not a bijection")]
    NotAPermutation,
    #[error("empty operator family")]
    EmptyFamily,
    #[error("operator is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("action element {index} does not preserve the algebra (residual {residual:.3e})")]
    ActionDoesNotPreserveAlgebra { index: usize, residual: f64 },
    #[error("algebra closure did not stabilize within {0} rounds")]
    ClosureIterationCap(usize),
    #[error("fixed-point subspace from averaging disagrees with the invariant nullspace (angle {0:.3e})")]
    FixedPointMismatch(f64),
    #[error("block decomposition degenerate: {0}")]
    NonSemisimple(String),
    #[error("block dimension {0} is not a perfect square count: got rank {1}")]
    NotASquareBlock(usize, usize),
    #[error("tensor-leg specification does not match the space")]
    LegMismatch,
    #[error("spanning family is not orthogonal at pair ({i}, {j})")]
    NotOrthogonal { i: usize, j: usize },
}

/// A finite-dimensional Hilbert space with an ordered labeled basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    dim: usize,
    labels: Vec<String>,
}

impl HilbertSpace {
    pub fn new(labels: Vec<String>) -> Result<Arc<Self>, OalgError> {
        if labels.is_empty() {
            return Err(OalgError::BadLabels { labels: 0, dim: 0 });
        }
        let dim = labels.len();
        Ok(Arc::new(HilbertSpace { dim, labels }))
    }

    pub fn of_dim(dim: usize) -> Arc<Self> {
        HilbertSpace::new((0..dim).map(|i| format!("e{i}")).collect()).expect("dim > 0")
    }

    pub fn of_group(group: &crate::groups::FiniteGroup) -> Arc<Self> {
        HilbertSpace::new(group.elements().map(|g| group.label(g).to_string()).collect())
            .expect("groups are nonempty")
    }

    /// Tensor product space with labels "a⊗b"; index (i,j) ↦ i·dim(b)+j.
    pub fn tensor(a: &Arc<HilbertSpace>, b: &Arc<HilbertSpace>) -> Arc<HilbertSpace> {
        let mut labels = Vec::with_capacity(a.dim * b.dim);
        for la in &a.labels {
            for lb in &b.labels {
                labels.push(format!("{la}⊗{lb}"));
            }
        }
        HilbertSpace::new(labels).expect("nonempty")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }
}

/// A linear operator: dense, or a lazy structure applied leg-by-leg.
#[derive(Debug, Clone)]
pub enum Operator {
    Dense {
        space: Arc<HilbertSpace>,
        matrix: CMat,
    },
    /// T e_j = phases[j] · e_{map[j]} — covers shifts, regular representations,
    /// monomial unitaries and the tensor flip.
    Permutation {
        space: Arc<HilbertSpace>,
        map: Vec<usize>,
        phases: Vec<C64>,
    },
    Diagonal {
        space: Arc<HilbertSpace>,
        diag: Vec<C64>,
    },
    /// Tensor product of factors, leg i acting on the i-th tensor slot.
    Kron {
        space: Arc<HilbertSpace>,
        factors: Vec<Operator>,
    },
    /// Σ cᵢ Tᵢ.
    Sum {
        space: Arc<HilbertSpace>,
        terms: Vec<(C64, Operator)>,
    },
    /// factors[0] · factors[1] · … (leftmost applied last).
    Product {
        space: Arc<HilbertSpace>,
        factors: Vec<Operator>,
    },
    Scaled {
        factor: C64,
        inner: Box<Operator>,
    },
    Identity {
        space: Arc<HilbertSpace>,
    },
    /// `inner` acting on the listed legs of a tensor space with the given leg
    /// dimensions; identity on the other legs.
    Embedded {
        space: Arc<HilbertSpace>,
        dims: Vec<usize>,
        legs: Vec<usize>,
        inner: Box<Operator>,
    },
}

impl Operator {
    pub fn dense(space: Arc<HilbertSpace>, matrix: CMat) -> Result<Self, OalgError> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(OalgError::DimensionMismatch {
                expected: space.dim(),
                got: matrix.nrows(),
            });
        }
        Ok(Operator::Dense { space, matrix })
    }

    pub fn permutation(
        space: Arc<HilbertSpace>,
        map: Vec<usize>,
        phases: Vec<C64>,
    ) -> Result<Self, OalgError> {
        let n = space.dim();
        if map.len() != n || phases.len() != n {
            return Err(OalgError::DimensionMismatch {
                expected: n,
                got: map.len(),
            });
        }
        let mut seen = vec![false; n];
        for &i in &map {
            if i >= n || seen[i] {
                return Err(OalgError::NotAPermutation);
            }
            seen[i] = true;
        }
        Ok(Operator::Permutation { space, map, phases })
    }

    pub fn diagonal(space: Arc<HilbertSpace>, diag: Vec<C64>) -> Result<Self, OalgError> {
        if diag.len() != space.dim() {
            return Err(OalgError::DimensionMismatch {
                expected: space.dim(),
                got: diag.len(),
            });
        }
        Ok(Operator::Diagonal { space, diag })
    }

    pub fn identity_on(space: Arc<HilbertSpace>) -> Self {
        Operator::Identity { space }
    }

    pub fn kron(factors: Vec<Operator>) -> Result<Self, OalgError> {
        if factors.is_empty() {
            return Err(OalgError::EmptyFamily);
        }
        let space = factors
            .iter()
            .map(Operator::space)
            .skip(1)
            .fold(factors[0].space(), |acc, s| HilbertSpace::tensor(&acc, &s));
        Ok(Operator::Kron { space, factors })
    }

    pub fn sum(terms: Vec<(C64, Operator)>) -> Result<Self, OalgError> {
        let space = terms.first().ok_or(OalgError::EmptyFamily)?.1.space();
        for (_, t) in &terms {
            if t.dim() != space.dim() {
                return Err(OalgError::DimensionMismatch {
                    expected: space.dim(),
                    got: t.dim(),
                });
            }
        }
        Ok(Operator::Sum { space, terms })
    }

    pub fn product(factors: Vec<Operator>) -> Result<Self, OalgError> {
        let space = factors.first().ok_or(OalgError::EmptyFamily)?.space();
        for f in &factors {
            if f.dim() != space.dim() {
                return Err(OalgError::DimensionMismatch {
                    expected: space.dim(),
                    got: f.dim(),
                });
            }
        }
        Ok(Operator::Product { space, factors })
    }

    pub fn scaled(factor: C64, inner: Operator) -> Self {
        Operator::Scaled {
            factor,
            inner: Box::new(inner),
        }
    }

    pub fn embedded(
        space: Arc<HilbertSpace>,
        dims: Vec<usize>,
        legs: Vec<usize>,
        inner: Operator,
    ) -> Result<Self, OalgError> {
        if dims.iter().product::<usize>() != space.dim() {
            return Err(OalgError::LegMismatch);
        }
        let inner_dim: usize = legs.iter().map(|&l| dims[l]).product();
        if legs.iter().any(|&l| l >= dims.len()) || inner.dim() != inner_dim {
            return Err(OalgError::LegMismatch);
        }
        Ok(Operator::Embedded {
            space,
            dims,
            legs,
            inner: Box::new(inner),
        })
    }

    /// The flip Σ: H_a⊗H_b → H_b⊗H_a as a permutation (square spaces only here:
    /// both factors must have equal dimension so domain = codomain).
    pub fn flip(a: &Arc<HilbertSpace>, b: &Arc<HilbertSpace>) -> Self {
        let (na, nb) = (a.dim(), b.dim());
        let space = HilbertSpace::tensor(a, b);
        let map = (0..na * nb)
            .map(|idx| {
                let (i, j) = (idx / nb, idx % nb);
                j * na + i
            })
            .collect();
        Operator::Permutation {
            space,
            map,
            phases: vec![ONE; na * nb],
        }
    }

    pub fn space(&self) -> Arc<HilbertSpace> {
        match self {
            Operator::Dense { space, .. }
            | Operator::Permutation { space, .. }
            | Operator::Diagonal { space, .. }
            | Operator::Kron { space, .. }
            | Operator::Sum { space, .. }
            | Operator::Product { space, .. }
            | Operator::Identity { space }
            | Operator::Embedded { space, .. } => space.clone(),
            Operator::Scaled { inner, .. } => inner.space(),
        }
    }

    pub fn dim(&self) -> usize {
        self.space().dim()
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        match self {
            Operator::Dense { matrix, .. } => matrix * v,
            Operator::Permutation { map, phases, .. } => {
                let mut out = CVec::zeros(v.len());
                for (j, &i) in map.iter().enumerate() {
                    out[i] = phases[j] * v[j];
                }
                out
            }
            Operator::Diagonal { diag, .. } => {
                CVec::from_iterator(v.len(), diag.iter().zip(v.iter()).map(|(d, x)| d * x))
            }
            Operator::Kron { factors, .. } => {
                let dims: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
                let mut out = v.clone();
                for (i, f) in factors.iter().enumerate() {
                    if matches!(f, Operator::Identity { .. }) {
                        continue;
                    }
                    out = apply_on_legs(&f.to_dense(), &dims, &[i], &out);
                }
                out
            }
            Operator::Sum { terms, .. } => {
                let mut out = CVec::zeros(v.len());
                for (c, t) in terms {
                    out += t.apply(v) * *c;
                }
                out
            }
            Operator::Product { factors, .. } => {
                let mut out = v.clone();
                for f in factors.iter().rev() {
                    out = f.apply(&out);
                }
                out
            }
            Operator::Scaled { factor, inner } => inner.apply(v) * *factor,
            Operator::Identity { .. } => v.clone(),
            Operator::Embedded {
                dims, legs, inner, ..
            } => apply_on_legs(&inner.to_dense(), dims, legs, v),
        }
    }

    pub fn to_dense(&self) -> CMat {
        match self {
            Operator::Dense { matrix, .. } => matrix.clone(),
            Operator::Permutation { map, phases, .. } => {
                let n = map.len();
                let mut m = CMat::zeros(n, n);
                for (j, &i) in map.iter().enumerate() {
                    m[(i, j)] = phases[j];
                }
                m
            }
            Operator::Diagonal { diag, .. } => {
                CMat::from_diagonal(&CVec::from_iterator(diag.len(), diag.iter().copied()))
            }
            Operator::Kron { factors, .. } => {
                let mut m = factors[0].to_dense();
                for f in &factors[1..] {
                    m = kron(&m, &f.to_dense());
                }
                m
            }
            Operator::Sum { space, terms } => {
                let n = space.dim();
                let mut m = CMat::zeros(n, n);
                for (c, t) in terms {
                    m += t.to_dense() * *c;
                }
                m
            }
            Operator::Product { space, factors } => {
                let mut m = identity(space.dim());
                for f in factors {
                    m = mul(&m, &f.to_dense());
                }
                m
            }
            Operator::Scaled { factor, inner } => inner.to_dense() * *factor,
            Operator::Identity { space } => identity(space.dim()),
            Operator::Embedded {
                space,
                dims,
                legs,
                inner,
            } => {
                // M[(row multi-index),(col multi-index)] = inner[rI,cI]·δ(spectators).
                let n = space.dim();
                let inner_dense = inner.to_dense();
                let spectators: Vec<usize> =
                    (0..dims.len()).filter(|l| !legs.contains(l)).collect();
                let mut strides = vec![0usize; dims.len()];
                let mut acc = 1usize;
                for l in (0..dims.len()).rev() {
                    strides[l] = acc;
                    acc *= dims[l];
                }
                let inner_dims: Vec<usize> = legs.iter().map(|&l| dims[l]).collect();
                let mut m = CMat::zeros(n, n);
                let inner_n = inner_dense.nrows();
                // Enumerate spectator configurations and inner index pairs.
                let spect_total: usize = spectators.iter().map(|&l| dims[l]).product();
                for s in 0..spect_total.max(1) {
                    let mut base = 0usize;
                    let mut rem = s;
                    for &l in spectators.iter().rev() {
                        base += (rem % dims[l]) * strides[l];
                        rem /= dims[l];
                    }
                    for ri in 0..inner_n {
                        let mut row = base;
                        let mut rrem = ri;
                        for (k, &l) in legs.iter().enumerate().rev() {
                            row += (rrem % inner_dims[k]) * strides[l];
                            rrem /= inner_dims[k];
                        }
                        for ci in 0..inner_n {
                            let val = inner_dense[(ri, ci)];
                            if val == ZERO {
                                continue;
                            }
                            let mut col = base;
                            let mut crem = ci;
                            for (k, &l) in legs.iter().enumerate().rev() {
                                col += (crem % inner_dims[k]) * strides[l];
                                crem /= inner_dims[k];
                            }
                            m[(row, col)] = val;
                        }
                    }
                }
                m
            }
        }
    }

    /// Structural adjoint; `(T*)* = T` up to node reshuffling, verified by value.
    pub fn adjoint(&self) -> Operator {
        match self {
            Operator::Dense { space, matrix } => Operator::Dense {
                space: space.clone(),
                matrix: matrix.adjoint(),
            },
            Operator::Permutation { space, map, phases } => {
                let n = map.len();
                let mut inv = vec![0usize; n];
                let mut ph = vec![ONE; n];
                for (j, &i) in map.iter().enumerate() {
                    inv[i] = j;
                    ph[i] = phases[j].conj();
                }
                Operator::Permutation {
                    space: space.clone(),
                    map: inv,
                    phases: ph,
                }
            }
            Operator::Diagonal { space, diag } => Operator::Diagonal {
                space: space.clone(),
                diag: diag.iter().map(|d| d.conj()).collect(),
            },
            Operator::Kron { space, factors } => Operator::Kron {
                space: space.clone(),
                factors: factors.iter().map(Operator::adjoint).collect(),
            },
            Operator::Sum { space, terms } => Operator::Sum {
                space: space.clone(),
                terms: terms
                    .iter()
                    .map(|(c, t)| (c.conj(), t.adjoint()))
                    .collect(),
            },
            Operator::Product { space, factors } => Operator::Product {
                space: space.clone(),
                factors: factors.iter().rev().map(Operator::adjoint).collect(),
            },
            Operator::Scaled { factor, inner } => Operator::Scaled {
                factor: factor.conj(),
                inner: Box::new(inner.adjoint()),
            },
            Operator::Identity { space } => Operator::Identity {
                space: space.clone(),
            },
            Operator::Embedded {
                space,
                dims,
                legs,
                inner,
            } => Operator::Embedded {
                space: space.clone(),
                dims: dims.clone(),
                legs: legs.clone(),
                inner: Box::new(inner.adjoint()),
            },
        }
    }

    pub fn unitarity_residual(&self) -> f64 {
        let d = self.to_dense();
        let n = d.nrows();
        frobenius_norm(&(mul(&d.adjoint(), &d) - identity(n)))
    }
}

/// ω(T): either a vector pair ω_{x,y}(T) = (x|T|y) = ⟨x, Ty⟩ or a trace pairing
/// T ↦ tr(MT).
#[derive(Debug, Clone)]
pub enum Functional {
    VectorPair { x: CVec, y: CVec },
    TracePairing { m: CMat },
}

impl Functional {
    pub fn vector_pair(x: CVec, y: CVec) -> Self {
        Functional::VectorPair { x, y }
    }

    /// Normalized trace T ↦ tr(T)/n.
    pub fn normalized_trace(n: usize) -> Self {
        Functional::TracePairing {
            m: identity(n) / Complex64::new(n as f64, 0.0),
        }
    }

    pub fn apply(&self, t: &CMat) -> C64 {
        match self {
            Functional::VectorPair { x, y } => x.dotc(&(t * y)),
            Functional::TracePairing { m } => (0..t.nrows())
                .map(|i| (0..t.ncols()).map(|k| m[(i, k)] * t[(k, i)]).sum::<C64>())
                .sum(),
        }
    }

    /// The adjoint functional with ω*(T) := conj(ω(T*)); for vector pairs this
    /// swaps x and y.
    pub fn adjoint(&self) -> Functional {
        match self {
            Functional::VectorPair { x, y } => Functional::VectorPair {
                x: y.clone(),
                y: x.clone(),
            },
            Functional::TracePairing { m } => Functional::TracePairing { m: m.adjoint() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    First,
    Second,
}

/// (ω⊗id)W or (id⊗ω)W for dense W on a two-leg space with dims (n₁,n₂).
pub fn slice(
    w: &CMat,
    dims: (usize, usize),
    omega: &Functional,
    leg: Leg,
) -> Result<CMat, OalgError> {
    let (n1, n2) = dims;
    if w.nrows() != n1 * n2 {
        return Err(OalgError::DimensionMismatch {
            expected: n1 * n2,
            got: w.nrows(),
        });
    }
    let coeff = |i: usize, ip: usize| -> C64 {
        match omega {
            Functional::VectorPair { x, y } => x[i].conj() * y[ip],
            Functional::TracePairing { m } => m[(ip, i)],
        }
    };
    match leg {
        Leg::First => {
            let mut out = CMat::zeros(n2, n2);
            for i in 0..n1 {
                for ip in 0..n1 {
                    let c = coeff(i, ip);
                    if c == ZERO {
                        continue;
                    }
                    for j in 0..n2 {
                        for jp in 0..n2 {
                            out[(j, jp)] += c * w[(i * n2 + j, ip * n2 + jp)];
                        }
                    }
                }
            }
            Ok(out)
        }
        Leg::Second => {
            let mut out = CMat::zeros(n1, n1);
            for j in 0..n2 {
                for jp in 0..n2 {
                    let c = coeff(j, jp);
                    if c == ZERO {
                        continue;
                    }
                    for i in 0..n1 {
                        for ip in 0..n1 {
                            out[(i, ip)] += c * w[(i * n2 + j, ip * n2 + jp)];
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Arithmetic mean of a family; idempotent on invariant operators.
pub fn average(family: &[Operator]) -> Result<Operator, OalgError> {
    if family.is_empty() {
        return Err(OalgError::EmptyFamily);
    }
    let w = Complex64::new(1.0 / family.len() as f64, 0.0);
    Operator::sum(family.iter().map(|t| (w, t.clone())).collect())
}

/// A *-closed, product-closed span of dense matrices with a Hilbert–Schmidt
/// orthonormal basis.
#[derive(Debug, Clone)]
pub struct StarAlgebra {
    space: Arc<HilbertSpace>,
    basis: Vec<CMat>,
    /// Vectorized orthonormal basis as columns (n² × dim), so coordinate
    /// extraction is a single adjoint-matrix-vector product.
    basis_columns: CMat,
    /// Nonzero entries (linear column-major index, value) per basis element,
    /// kept when every element is sparse enough that coordinate extraction by
    /// direct summation beats the dense product.
    sparse_basis: Option<Vec<Vec<(usize, C64)>>>,
}

const CLOSURE_ROUND_CAP: usize = 64;

/// Exact nonzero entries of each basis element (linear column-major indices),
/// kept only when all elements have density ≤ 1/8 so the sparse coordinate
/// path is a clear win over the dense Gram product.
fn sparse_representation(basis: &[CMat]) -> Option<Vec<Vec<(usize, C64)>>> {
    if basis.is_empty() {
        return None;
    }
    let len = basis[0].nrows() * basis[0].ncols();
    if len < 64 {
        return None;
    }
    let cap = len / 8;
    let mut out = Vec::with_capacity(basis.len());
    for b in basis {
        let entries: Vec<(usize, C64)> = b
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != ZERO)
            .map(|(i, v)| (i, *v))
            .collect();
        if entries.len() > cap {
            return None;
        }
        out.push(entries);
    }
    Some(out)
}

impl StarAlgebra {
    /// Orthonormalizes the span; does not check closure properties (callers that
    /// need them use [`StarAlgebra::is_star_closed`] / [`StarAlgebra::is_product_closed`]).
    pub fn from_span(
        space: Arc<HilbertSpace>,
        mats: Vec<CMat>,
        tol: f64,
    ) -> Result<Self, OalgError> {
        for m in &mats {
            if m.nrows() != space.dim() || m.ncols() != space.dim() {
                return Err(OalgError::DimensionMismatch {
                    expected: space.dim(),
                    got: m.nrows(),
                });
            }
        }
        let vecs: Vec<CVec> = mats.iter().map(linalg::vectorize).collect();
        let on = orthonormalize(&vecs, tol);
        let n = space.dim();
        let basis: Vec<CMat> = on.iter().map(|v| linalg::unvectorize(v, n, n)).collect();
        let basis_columns = linalg::stack_columns(&basis);
        let sparse_basis = sparse_representation(&basis);
        Ok(StarAlgebra {
            space,
            basis,
            basis_columns,
            sparse_basis,
        })
    }

    /// Like [`StarAlgebra::from_span`] for spanning sets that are already
    /// pairwise HS-orthogonal (verified via one Gram product, then normalized);
    /// much faster than Gram–Schmidt for large orthogonal families.
    pub fn from_orthogonal_span(
        space: Arc<HilbertSpace>,
        mats: Vec<CMat>,
        tol: f64,
    ) -> Result<Self, OalgError> {
        for m in &mats {
            if m.nrows() != space.dim() || m.ncols() != space.dim() {
                return Err(OalgError::DimensionMismatch {
                    expected: space.dim(),
                    got: m.nrows(),
                });
            }
        }
        let stacked = linalg::stack_columns(&mats);
        let gram = linalg::ad_mul(&stacked, &stacked);
        let k = mats.len();
        let scale = space.dim() as f64;
        for i in 0..k {
            if gram[(i, i)].re < tol * scale {
                return Err(OalgError::NotOrthogonal { i, j: i });
            }
            for j in 0..k {
                if i != j && gram[(i, j)].norm() > tol * scale * 10.0 {
                    return Err(OalgError::NotOrthogonal { i, j });
                }
            }
        }
        let basis: Vec<CMat> = mats
            .iter()
            .enumerate()
            .map(|(i, m)| m / Complex64::new(gram[(i, i)].re.sqrt(), 0.0))
            .collect();
        let basis_columns = linalg::stack_columns(&basis);
        let sparse_basis = sparse_representation(&basis);
        Ok(StarAlgebra {
            space,
            basis,
            basis_columns,
            sparse_basis,
        })
    }

    pub fn space(&self) -> Arc<HilbertSpace> {
        self.space.clone()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    /// Coefficients of T in the orthonormal basis together with the Frobenius
    /// norm of the projection defect (distance from the span).
    pub fn coords_and_defect(&self, t: &CMat) -> (CVec, f64) {
        if let Some(sparse) = &self.sparse_basis {
            let data = t.as_slice();
            let coords = CVec::from_iterator(
                sparse.len(),
                sparse.iter().map(|entries| {
                    entries
                        .iter()
                        .map(|&(idx, v)| v.conj() * data[idx])
                        .sum::<C64>()
                }),
            );
            let mut defect = t.clone();
            {
                let buf = defect.as_mut_slice();
                for (entries, c) in sparse.iter().zip(coords.iter()) {
                    for &(idx, v) in entries {
                        buf[idx] -= v * c;
                    }
                }
            }
            (coords, defect.norm())
        } else {
            let v = linalg::vectorize(t);
            let coords = self.basis_columns.ad_mul(&v);
            let defect = v - &self.basis_columns * &coords;
            (coords, defect.norm())
        }
    }

    /// Distance from T to the span (Frobenius norm of the projection defect).
    pub fn membership_residual(&self, t: &CMat) -> f64 {
        self.coords_and_defect(t).1
    }

    /// Coefficients of T in the orthonormal basis (valid when T is a member).
    pub fn coordinates(&self, t: &CMat) -> CVec {
        if let Some(sparse) = &self.sparse_basis {
            let data = t.as_slice();
            return CVec::from_iterator(
                sparse.len(),
                sparse.iter().map(|entries| {
                    entries
                        .iter()
                        .map(|&(idx, v)| v.conj() * data[idx])
                        .sum::<C64>()
                }),
            );
        }
        self.basis_columns.ad_mul(&linalg::vectorize(t))
    }

    pub fn element_from_coordinates(&self, c: &CVec) -> CMat {
        let n = self.space.dim();
        if let Some(sparse) = &self.sparse_basis {
            let mut out = CMat::zeros(n, n);
            {
                let buf = out.as_mut_slice();
                for (entries, x) in sparse.iter().zip(c.iter()) {
                    for &(idx, v) in entries {
                        buf[idx] += v * x;
                    }
                }
            }
            return out;
        }
        linalg::unvectorize(&(&self.basis_columns * c), n, n)
    }

    pub fn is_star_closed(&self, tol: f64) -> bool {
        self.basis
            .iter()
            .all(|b| self.membership_residual(&b.adjoint()) <= tol * (1.0 + frobenius_norm(b)))
    }

    pub fn is_product_closed(&self, tol: f64) -> bool {
        self.basis.iter().all(|a| {
            self.basis
                .iter()
                .all(|b| self.membership_residual(&mul(a, b)) <= tol * 10.0)
        })
    }

    pub fn contains_identity(&self, tol: f64) -> bool {
        self.membership_residual(&identity(self.space.dim())) <= tol * self.space.dim() as f64
    }
}

/// Smallest *-closed, product-closed span containing the generators (and the
/// identity when `unital`): adjoints first, then iterated pairwise products with
/// span completion until the dimension stabilizes.
pub fn generate_algebra(
    generators: &[Operator],
    unital: bool,
    tol: f64,
) -> Result<StarAlgebra, OalgError> {
    let first = generators.first().ok_or(OalgError::EmptyFamily)?;
    let space = first.space();
    let n = space.dim();
    let mut seed: Vec<CMat> = Vec::new();
    if unital {
        seed.push(identity(n));
    }
    for g in generators {
        if g.dim() != n {
            return Err(OalgError::DimensionMismatch {
                expected: n,
                got: g.dim(),
            });
        }
        let d = g.to_dense();
        seed.push(d.adjoint());
        seed.push(d);
    }
    let mut alg = StarAlgebra::from_span(space.clone(), seed, tol)?;
    for _round in 0..CLOSURE_ROUND_CAP {
        let mut new_items: Vec<CMat> = Vec::new();
        for a in alg.basis() {
            for b in alg.basis() {
                let p = mul(a, b);
                if alg.membership_residual(&p) > tol * 10.0 {
                    new_items.push(p);
                }
            }
        }
        if new_items.is_empty() {
            return Ok(alg);
        }
        let mut all = alg.basis.clone();
        all.extend(new_items);
        let next = StarAlgebra::from_span(space.clone(), all, tol)?;
        if next.dim() == alg.dim() {
            return Ok(next);
        }
        alg = next;
    }
    Err(OalgError::ClosureIterationCap(CLOSURE_ROUND_CAP))
}

/// Fixed-point algebra of a finite unitary action {Ad(u) : u ∈ family} on a
/// *-algebra: the joint kernel of (Ad(u) − id) in B's coordinate space,
/// cross-checked against the image of the averaging map 𝔼(b) = (1/N)Σ u b u*.
pub fn fixed_point_algebra(
    b: &StarAlgebra,
    action: &[Operator],
    tol: f64,
) -> Result<StarAlgebra, OalgError> {
    if action.is_empty() {
        return Err(OalgError::EmptyFamily);
    }
    let n = b.space().dim();
    // Matrices of Ad(u) in B's orthonormal coordinates; also validates that the
    // action is unitary and preserves B. Sparse bases use per-element sparse
    // coordinate extraction; dense bases stack the conjugated elements so the
    // extraction is a single Gram-type product per unitary.
    let mut ad_mats = Vec::with_capacity(action.len());
    for (index, u) in action.iter().enumerate() {
        let ur = u.unitarity_residual();
        if ur > tol * n as f64 {
            return Err(OalgError::NotUnitary(ur));
        }
        let moved: Vec<CMat> = b.basis().iter().map(|bj| conjugate_by(u, bj)).collect();
        let ad = if b.sparse_basis.is_some() {
            let d = b.dim();
            let mut ad = CMat::zeros(d, d);
            for (j, m) in moved.iter().enumerate() {
                let (coords, residual) = b.coords_and_defect(m);
                if residual > tol * (1.0 + frobenius_norm(&b.basis()[j])) * 10.0 {
                    return Err(OalgError::ActionDoesNotPreserveAlgebra { index, residual });
                }
                ad.column_mut(j).copy_from(&coords);
            }
            ad
        } else {
            let stacked = linalg::stack_columns(&moved);
            let ad = linalg::ad_mul(&b.basis_columns, &stacked);
            let recon = mul(&b.basis_columns, &ad);
            let defect = &stacked - recon;
            for j in 0..b.dim() {
                let residual = defect.column(j).norm();
                if residual > tol * (1.0 + frobenius_norm(&b.basis()[j])) * 10.0 {
                    return Err(OalgError::ActionDoesNotPreserveAlgebra { index, residual });
                }
            }
            ad
        };
        ad_mats.push(ad);
    }
    fixed_point_from_ad(b, &ad_mats, tol)
}

/// U·M·U* through the operator's structure: dense operators use blocked matrix
/// products, structured operators are applied column-by-column on M and M*.
pub fn conjugate_by(u: &Operator, m: &CMat) -> CMat {
    if let Operator::Dense { matrix, .. } = u {
        return mul(&mul(matrix, m), &matrix.adjoint());
    }
    let n = m.nrows();
    let mut y = CMat::zeros(n, n);
    for j in 0..n {
        let col = u.apply(&m.column(j).into_owned());
        y.column_mut(j).copy_from(&col);
    }
    // Y·U* = (U·Yᴴ)ᴴ.
    let yh = y.adjoint();
    let mut z = CMat::zeros(n, n);
    for j in 0..n {
        let col = u.apply(&yh.column(j).into_owned());
        z.column_mut(j).copy_from(&col);
    }
    z.adjoint()
}

/// Fixed points given the action already expressed in B's orthonormal
/// coordinates (one d×d matrix per group element, identity included). The
/// invariant subspace is the joint nullspace of the movement defects,
/// cross-checked against the span of the averaged basis images.
pub fn fixed_point_from_ad(
    b: &StarAlgebra,
    ad_mats: &[CMat],
    tol: f64,
) -> Result<StarAlgebra, OalgError> {
    if ad_mats.is_empty() {
        return Err(OalgError::EmptyFamily);
    }
    let d = b.dim();
    let mut defect_sum = CMat::zeros(d, d);
    for ad in ad_mats {
        let diff = ad - identity(d);
        defect_sum += mul(&diff.adjoint(), &diff);
    }
    let kernel = hermitian_nullspace(&defect_sum, tol);
    // Cross-check: span of averaged basis elements equals the kernel.
    let avg_vecs: Vec<CVec> = (0..d)
        .map(|j| {
            let mut acc = CVec::zeros(d);
            for ad in ad_mats {
                acc += ad.column(j);
            }
            acc / Complex64::new(ad_mats.len() as f64, 0.0)
        })
        .collect();
    let avg_basis = orthonormalize(&avg_vecs, tol);
    match linalg::max_principal_angle(&kernel, &avg_basis) {
        Some(angle) if angle <= 1e-6 => {}
        Some(angle) => return Err(OalgError::FixedPointMismatch(angle)),
        None => {
            return Err(OalgError::FixedPointMismatch(f64::INFINITY));
        }
    }
    let mats = kernel
        .iter()
        .map(|coords| b.element_from_coordinates(coords))
        .collect();
    StarAlgebra::from_span(b.space(), mats, tol)
}

/// Wedderburn block sizes [d₁ ≤ … ≤ d_m] with Σ dᵢ² = dim A: center → generic
/// Hermitian central element → eigenprojection clusters → rank of each corner.
///
/// The algebra's unit need not be the ambient identity (an ideal sitting
/// inside a larger algebra, say): in that case the span is first compressed by
/// its unit projection, which is a *-isomorphism onto the compressed copy.
pub fn block_decomposition(a: &StarAlgebra, tol: f64) -> Result<Vec<usize>, OalgError> {
    let d = a.dim();
    if d == 0 {
        return Ok(vec![]);
    }
    let ambient = a.space().dim();
    if a.membership_residual(&identity(ambient)) > tol * 100.0 {
        // Unit projection = projection onto the joint column space (for a
        // *-closed span, u·b = b·u = b holds automatically; u ∈ A is checked).
        let cols: Vec<CVec> = a
            .basis()
            .iter()
            .flat_map(|b| b.column_iter().map(|c| c.into_owned()))
            .collect();
        let on = orthonormalize(&cols, tol);
        let r = on.len();
        let mut v = CMat::zeros(ambient, r);
        for (j, c) in on.iter().enumerate() {
            v.column_mut(j).copy_from(c);
        }
        let u = mul(&v, &v.adjoint());
        if a.membership_residual(&u) > tol * 100.0 {
            return Err(OalgError::NonSemisimple(
                "span has no unit (support projection is outside the span)".into(),
            ));
        }
        let compressed: Vec<CMat> = a
            .basis()
            .iter()
            .map(|b| linalg::ad_mul(&v, &mul(b, &v)))
            .collect();
        let ca = StarAlgebra::from_span(HilbertSpace::of_dim(r), compressed, tol)?;
        return block_decomposition(&ca, tol);
    }
    // Center: coordinates x with Σ_j x_j [b_i, b_j] = 0 for every i, found as
    // the nullspace of the accumulated commutator Gram matrices.
    let mut gram = CMat::zeros(d, d);
    for bi in a.basis() {
        let cols: Vec<CMat> = a
            .basis()
            .iter()
            .map(|bj| linalg::commutator(bi, bj))
            .collect();
        let stacked = linalg::stack_columns(&cols);
        gram += linalg::ad_mul(&stacked, &stacked);
    }
    let center_coords = hermitian_nullspace(&gram, tol);
    if center_coords.is_empty() {
        return Err(OalgError::NonSemisimple(
            "empty center (algebra span may be degenerate)".into(),
        ));
    }
    for attempt in 0..4u64 {
        let mut rng = rng_from_seed(0xb10c + attempt);
        let n = a.space().dim();
        let mut z = CMat::zeros(n, n);
        for c in &center_coords {
            let w = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            z += a.element_from_coordinates(&(c * w));
        }
        let z = (&z + z.adjoint()) * Complex64::new(0.5, 0.0);
        let (vals, vecs) = hermitian_eigen(&z);
        let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let clusters = linalg::cluster_reals(&vals, (tol * 1e3).max(1e-9) * scale);
        let mut sizes = Vec::new();
        let mut ok = true;
        let mut total = 0usize;
        for (_value, members) in &clusters {
            let mut p = CMat::zeros(n, n);
            for &i in members {
                let v = vecs.column(i).into_owned();
                p += &v * v.adjoint();
            }
            if a.membership_residual(&p) > tol * 100.0 {
                ok = false;
                break;
            }
            // Corner rank = d_i².
            let corner: Vec<CVec> = a
                .basis()
                .iter()
                .map(|b| linalg::vectorize(&mul(&mul(&p, b), &p)))
                .collect();
            let rank = linalg::span_rank(&corner, tol);
            let di = (rank as f64).sqrt().round() as usize;
            if di * di != rank {
                return Err(OalgError::NotASquareBlock(di, rank));
            }
            total += rank;
            sizes.push(di);
        }
        if ok && total == d {
            sizes.sort_unstable();
            return Ok(sizes);
        }
    }
    Err(OalgError::NonSemisimple(format!(
        "central projections never landed in the algebra (dim {d}, center dim {})",
        center_coords.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, random_unit_vector};

    fn pauli_x() -> CMat {
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    fn pauli_z() -> CMat {
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    fn nested_test_operator() -> Operator {
        let s2 = HilbertSpace::of_dim(2);
        let s3 = HilbertSpace::of_dim(3);
        let perm = Operator::permutation(
            s3.clone(),
            vec![1, 2, 0],
            vec![ONE, Complex64::new(0.0, 1.0), -ONE],
        )
        .unwrap();
        let diag = Operator::diagonal(s2.clone(), vec![Complex64::new(2.0, 0.5), -ONE]).unwrap();
        let k = Operator::kron(vec![diag.clone(), perm]).unwrap();
        let d = Operator::dense(
            HilbertSpace::of_dim(6),
            CMat::from_fn(6, 6, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, j as f64 * 0.2 - 0.3)),
        )
        .unwrap();
        let s = Operator::sum(vec![(Complex64::new(0.7, -0.2), k.clone()), (ONE, d)]).unwrap();
        let p = Operator::product(vec![s.clone(), k, s]).unwrap();
        Operator::scaled(Complex64::new(0.0, -1.5), p)
    }

    #[test]
    fn apply_agrees_with_materialization_on_random_vectors() {
        let t = nested_test_operator();
        let dense = t.to_dense();
        let mut rng = rng_from_seed(5);
        for _ in 0..8 {
            let v = random_unit_vector(t.dim(), &mut rng);
            let via_apply = t.apply(&v);
            let via_dense = &dense * &v;
            assert!(frobenius_norm(&CMat::from_column_slice(
                t.dim(),
                1,
                (via_apply - via_dense).as_slice()
            )) <= 1e-12 * t.dim() as f64);
        }
    }

    #[test]
    fn adjoint_is_an_involution_and_matches_dense_adjoint() {
        let t = nested_test_operator();
        let twice = t.adjoint().adjoint();
        assert!(frobenius_norm(&(twice.to_dense() - t.to_dense())) < 1e-12);
        assert!(frobenius_norm(&(t.adjoint().to_dense() - t.to_dense().adjoint())) < 1e-12);
    }

    #[test]
    fn embedded_operator_acts_on_selected_legs() {
        let s2 = HilbertSpace::of_dim(2);
        let x = Operator::dense(s2.clone(), pauli_x()).unwrap();
        let z = Operator::dense(s2.clone(), pauli_z()).unwrap();
        let inner = Operator::kron(vec![x.clone(), z.clone()]).unwrap();
        let big = HilbertSpace::of_dim(8);
        let emb = Operator::embedded(big, vec![2, 2, 2], vec![0, 2], inner).unwrap();
        let expect = kron(&kron(&pauli_x(), &identity(2)), &pauli_z());
        assert!(frobenius_norm(&(emb.to_dense() - &expect)) < 1e-13);
        let mut rng = rng_from_seed(9);
        let v = random_unit_vector(8, &mut rng);
        let diff = emb.apply(&v) - &expect * &v;
        assert!(diff.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() < 1e-13);
    }

    #[test]
    fn flip_squares_to_identity_and_swaps_tensors() {
        let s2 = HilbertSpace::of_dim(2);
        let s = Operator::flip(&s2, &s2);
        let sd = s.to_dense();
        assert!(frobenius_norm(&(mul(&sd, &sd) - identity(4))) < 1e-14);
        // Σ(e₀⊗e₁) = e₁⊗e₀: index 1 ↦ index 2.
        assert_eq!(sd[(2, 1)], ONE);
    }

    #[test]
    fn functional_adjoint_symmetry() {
        let mut rng = rng_from_seed(17);
        let t = linalg::random_matrix(3, 3, &mut rng);
        let x = random_unit_vector(3, &mut rng);
        let y = random_unit_vector(3, &mut rng);
        let om = Functional::vector_pair(x, y);
        let lhs = om.apply(&t.adjoint());
        let rhs = om.adjoint().apply(&t).conj();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn generate_algebra_matches_hand_counted_dimensions() {
        let s2 = HilbertSpace::of_dim(2);
        let id_only = generate_algebra(
            &[Operator::identity_on(s2.clone())],
            false,
            1e-9,
        )
        .unwrap();
        assert_eq!(id_only.dim(), 1);

        let x = Operator::dense(s2.clone(), pauli_x()).unwrap();
        let z = Operator::dense(s2.clone(), pauli_z()).unwrap();
        let full = generate_algebra(&[x.clone(), z.clone()], false, 1e-9).unwrap();
        assert_eq!(full.dim(), 4);
        assert!(full.is_star_closed(1e-9));
        assert!(full.is_product_closed(1e-9));

        let diag = Operator::dense(
            s2.clone(),
            CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, Complex64::new(2.0, 0.0)]),
        )
        .unwrap();
        let two = generate_algebra(&[diag], true, 1e-9).unwrap();
        assert_eq!(two.dim(), 2);
        assert!(two.contains_identity(1e-9));

        // Generator order does not change the outcome dimension.
        let reordered = generate_algebra(&[z, x], false, 1e-9).unwrap();
        assert_eq!(reordered.dim(), 4);
    }

    #[test]
    fn fixed_points_of_trivial_action_recover_the_algebra() {
        let s2 = HilbertSpace::of_dim(2);
        let x = Operator::dense(s2.clone(), pauli_x()).unwrap();
        let b = generate_algebra(&[x], true, 1e-9).unwrap();
        let fixed =
            fixed_point_algebra(&b, &[Operator::identity_on(s2)], 1e-9).unwrap();
        assert_eq!(fixed.dim(), b.dim());
    }

    #[test]
    fn fixed_points_of_sign_conjugation_on_full_m2_are_diagonal() {
        let s2 = HilbertSpace::of_dim(2);
        let x = Operator::dense(s2.clone(), pauli_x()).unwrap();
        let z = Operator::dense(s2.clone(), pauli_z()).unwrap();
        let m2 = generate_algebra(&[x, z.clone()], false, 1e-9).unwrap();
        assert_eq!(m2.dim(), 4);
        let action = vec![Operator::identity_on(s2.clone()), z];
        let fixed = fixed_point_algebra(&m2, &action, 1e-9).unwrap();
        assert_eq!(fixed.dim(), 2);
        // Every fixed element is diagonal.
        for b in fixed.basis() {
            assert!(b[(0, 1)].norm() < 1e-9 && b[(1, 0)].norm() < 1e-9);
        }
    }

    #[test]
    fn fixed_points_of_translation_on_functions_are_constants() {
        let s2 = HilbertSpace::of_dim(2);
        let gen = Operator::diagonal(s2.clone(), vec![ONE, -ONE]).unwrap();
        let functions = generate_algebra(&[gen], true, 1e-9).unwrap();
        assert_eq!(functions.dim(), 2);
        let swap =
            Operator::permutation(s2, vec![1, 0], vec![ONE, ONE]).unwrap();
        let action = vec![Operator::identity_on(swap.space()), swap];
        let fixed = fixed_point_algebra(&functions, &action, 1e-9).unwrap();
        assert_eq!(fixed.dim(), 1);
    }

    #[test]
    fn action_that_leaves_the_algebra_is_rejected() {
        let s2 = HilbertSpace::of_dim(2);
        let diag = Operator::diagonal(s2.clone(), vec![ONE, -ONE]).unwrap();
        let functions = generate_algebra(&[diag], true, 1e-9).unwrap();
        // Conjugation by a Hadamard-like unitary moves diagonals off-diagonal.
        let h = Operator::dense(
            s2,
            CMat::from_row_slice(
                2,
                2,
                &[
                    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                    Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
                ],
            ),
        )
        .unwrap();
        assert!(matches!(
            fixed_point_algebra(&functions, &[h], 1e-9),
            Err(OalgError::ActionDoesNotPreserveAlgebra { .. })
        ));
    }

    #[test]
    fn block_decomposition_of_standard_examples() {
        let s2 = HilbertSpace::of_dim(2);
        let x = Operator::dense(s2.clone(), pauli_x()).unwrap();
        let z = Operator::dense(s2.clone(), pauli_z()).unwrap();
        let m2 = generate_algebra(&[x, z], false, 1e-9).unwrap();
        assert_eq!(block_decomposition(&m2, 1e-9).unwrap(), vec![2]);

        let s3 = HilbertSpace::of_dim(3);
        let d3 = Operator::diagonal(
            s3.clone(),
            vec![ONE, Complex64::new(2.0, 0.0), Complex64::new(5.0, 0.0)],
        )
        .unwrap();
        let diag3 = generate_algebra(&[d3], true, 1e-9).unwrap();
        assert_eq!(block_decomposition(&diag3, 1e-9).unwrap(), vec![1, 1, 1]);

        // M₂ ⊕ ℂ inside 3×3 block matrices.
        let mut e01 = CMat::zeros(3, 3);
        e01[(0, 1)] = ONE;
        let mut e22 = CMat::zeros(3, 3);
        e22[(2, 2)] = ONE;
        let g1 = Operator::dense(s3.clone(), e01).unwrap();
        let g2 = Operator::dense(s3, e22).unwrap();
        let alg = generate_algebra(&[g1, g2], false, 1e-9).unwrap();
        assert_eq!(alg.dim(), 5);
        assert_eq!(block_decomposition(&alg, 1e-9).unwrap(), vec![1, 2]);
    }

    #[test]
    fn block_decomposition_sees_multiplicity_free_sizes_under_amplification() {
        // M₂ represented with multiplicity two on ℂ⁴: sizes must still be [2].
        let s4 = HilbertSpace::of_dim(4);
        let amp = |m: &CMat| kron(&identity(2), m);
        let x = Operator::dense(s4.clone(), amp(&pauli_x())).unwrap();
        let z = Operator::dense(s4, amp(&pauli_z())).unwrap();
        let alg = generate_algebra(&[x, z], false, 1e-9).unwrap();
        assert_eq!(alg.dim(), 4);
        assert_eq!(block_decomposition(&alg, 1e-9).unwrap(), vec![2]);
    }

    #[test]
    fn slice_of_a_pure_tensor_factorizes() {
        let mut rng = rng_from_seed(23);
        let s = linalg::random_matrix(2, 2, &mut rng);
        let t = linalg::random_matrix(3, 3, &mut rng);
        let w = kron(&s, &t);
        let x = random_unit_vector(2, &mut rng);
        let y = random_unit_vector(2, &mut rng);
        let om = Functional::vector_pair(x, y);
        let sliced = slice(&w, (2, 3), &om, Leg::First).unwrap();
        let scalar = om.apply(&s);
        assert!(frobenius_norm(&(sliced - &t * scalar)) < 1e-12);
    }

    #[test]
    fn slice_of_flip_gives_matrix_units() {
        let s2 = HilbertSpace::of_dim(2);
        let flip = Operator::flip(&s2, &s2).to_dense();
        for i in 0..2 {
            for j in 0..2 {
                let mut x = CVec::zeros(2);
                x[i] = ONE;
                let mut y = CVec::zeros(2);
                y[j] = ONE;
                let om = Functional::vector_pair(x, y);
                let sliced = slice(&flip, (2, 2), &om, Leg::First).unwrap();
                // (ω_{e_i,e_j}⊗id)Σ = E_{ji}.
                let mut expect = CMat::zeros(2, 2);
                expect[(j, i)] = ONE;
                assert!(frobenius_norm(&(sliced - expect)) < 1e-14);
            }
        }
    }

    #[test]
    fn trace_slice_of_shift_block_sum_averages_the_shifts() {
        // V = Σ_b R_b ⊗ E_bb on ℓ²(Z₂)⊗ℓ²(Z₂); (id⊗tr/2)V = (R₀+R₁)/2.
        let r1 = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let v = kron(&identity(2), &CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]))
            + kron(&r1, &CMat::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]));
        let om = Functional::normalized_trace(2);
        let sliced = slice(&v, (2, 2), &om, Leg::Second).unwrap();
        let expect = (identity(2) + r1) * Complex64::new(0.5, 0.0);
        assert!(frobenius_norm(&(sliced - expect)) < 1e-14);
    }

    #[test]
    fn average_of_families() {
        let s2 = HilbertSpace::of_dim(2);
        let x = Operator::dense(s2.clone(), pauli_x()).unwrap();
        let constant = average(&[x.clone(), x.clone(), x.clone()]).unwrap();
        assert!(frobenius_norm(&(constant.to_dense() - pauli_x())) < 1e-14);

        let id = Operator::identity_on(s2.clone());
        let swap = Operator::permutation(s2, vec![1, 0], vec![ONE, ONE]).unwrap();
        let avg = average(&[id, swap.clone()]).unwrap().to_dense();
        let expect = (identity(2) + swap.to_dense()) * Complex64::new(0.5, 0.0);
        assert!(frobenius_norm(&(avg - expect)) < 1e-14);

        // U unitary with U² = I: average of {U, U*} is U itself.
        let u = Operator::dense(swap.space(), pauli_x()).unwrap();
        let avg2 = average(&[u.clone(), u.adjoint()]).unwrap().to_dense();
        assert!(frobenius_norm(&(avg2 - pauli_x())) < 1e-14);
        assert!(average(&[]).is_err());
    }
}
