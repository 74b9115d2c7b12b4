//! Finite groups, finite abelian groups and their duals.
//!
//! Abelian groups are direct sums ⊕ᵢ Z_{nᵢ} with elements addressed by mixed-radix
//! indices (factor 0 is the most significant digit, matching tensor `kron` order).
//! The dual group has the same factors; the pairing ⟨γ̂,γ⟩ = e^{2πi Σ γ̂ᵢγᵢ/nᵢ} is
//! exact ([`Phase`]). General finite groups are Cayley tables with named
//! constructors (cyclic, dihedral, quaternion, Heisenberg) plus validated
//! user-supplied tables; abelian subgroups embed through generator images.

use crate::phase::Phase;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("abelian group must have at least one factor and all factors ≥ 1")]
    BadFactors,
    #[error("cayley table is not square or has out-of-range entries")]
    MalformedTable,
    #[error("associativity fails at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("no identity element in table")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("generator image {0} has order not dividing factor {1}")]
    GeneratorOrder(usize, u32),
    #[error("generator images do not commute: {0}, {1}")]
    NonCommutingImages(usize, usize),
    #[error("subgroup embedding is not injective")]
    NotInjective,
    #[error("map is not a homomorphism at ({0}, {1})")]
    NotHomomorphism(usize, usize),
    #[error("homomorphism images out of range")]
    BadHomImages,
    #[error("subgroup element list does not match generated image set")]
    SubgroupMismatch,
}

/// ⊕ᵢ Z_{nᵢ}. Elements and dual elements are mixed-radix indices in [0, order).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    factors: Vec<u32>,
}

impl FiniteAbelianGroup {
    pub fn new(factors: Vec<u32>) -> Result<Self, GroupError> {
        if factors.is_empty() || factors.iter().any(|&n| n == 0) {
            return Err(GroupError::BadFactors);
        }
        Ok(FiniteAbelianGroup { factors })
    }

    pub fn cyclic(n: u32) -> Self {
        FiniteAbelianGroup::new(vec![n]).expect("n ≥ 1")
    }

    pub fn product(a: &Self, b: &Self) -> Self {
        let mut factors = a.factors.clone();
        factors.extend_from_slice(&b.factors);
        FiniteAbelianGroup { factors }
    }

    /// Γ × Γ, the acting group of left-right translation systems.
    pub fn square(&self) -> Self {
        FiniteAbelianGroup::product(self, self)
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.factors.iter().map(|&n| n as usize).product()
    }

    pub fn zero(&self) -> usize {
        0
    }

    pub fn digits(&self, idx: usize) -> Vec<u32> {
        let mut rem = idx;
        let mut out = vec![0u32; self.factors.len()];
        for i in (0..self.factors.len()).rev() {
            let n = self.factors[i] as usize;
            out[i] = (rem % n) as u32;
            rem /= n;
        }
        debug_assert_eq!(rem, 0, "element index out of range");
        out
    }

    pub fn index(&self, digits: &[u32]) -> usize {
        assert_eq!(digits.len(), self.factors.len());
        let mut idx = 0usize;
        for (i, &d) in digits.iter().enumerate() {
            let n = self.factors[i] as usize;
            idx = idx * n + (d as usize % n);
        }
        idx
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let da = self.digits(a);
        let db = self.digits(b);
        let sum: Vec<u32> = da
            .iter()
            .zip(db.iter())
            .zip(self.factors.iter())
            .map(|((&x, &y), &n)| (x + y) % n)
            .collect();
        self.index(&sum)
    }

    pub fn neg(&self, a: usize) -> usize {
        let da = self.digits(a);
        let neg: Vec<u32> = da
            .iter()
            .zip(self.factors.iter())
            .map(|(&x, &n)| (n - x) % n)
            .collect();
        self.index(&neg)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.order()
    }

    /// Indices of the standard generators e₁, …, e_k (digit 1 in one factor).
    pub fn generators(&self) -> Vec<usize> {
        (0..self.factors.len())
            .map(|i| {
                let mut d = vec![0u32; self.factors.len()];
                if self.factors[i] > 1 {
                    d[i] = 1;
                }
                self.index(&d)
            })
            .collect()
    }

    /// The dual group Γ̂, canonically ⊕ᵢ Z_{nᵢ} again.
    pub fn dual(&self) -> FiniteAbelianGroup {
        self.clone()
    }

    /// ⟨γ̂,γ⟩ = e^{2πi Σᵢ γ̂ᵢγᵢ/nᵢ}, exact.
    pub fn pairing(&self, dual_elem: usize, elem: usize) -> Phase {
        let dd = self.digits(dual_elem);
        let de = self.digits(elem);
        let mut p = Phase::ONE;
        for ((&a, &b), &n) in dd.iter().zip(de.iter()).zip(self.factors.iter()) {
            p = p * Phase::from_fraction((a as i64) * (b as i64), n as i64);
        }
        p
    }

    /// (𝔉h)(γ̂) = Σ_γ h(γ)⟨γ̂,γ⟩.
    pub fn fourier(&self, h: &[Complex64]) -> Vec<Complex64> {
        let n = self.order();
        assert_eq!(h.len(), n);
        (0..n)
            .map(|ghat| {
                (0..n)
                    .map(|g| h[g] * self.pairing(ghat, g).to_c64())
                    .sum()
            })
            .collect()
    }

    /// (𝔉⁻¹f)(γ) = (1/|Γ|) Σ_γ̂ f(γ̂) conj⟨γ̂,γ⟩.
    pub fn inverse_fourier(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.order();
        assert_eq!(f.len(), n);
        let scale = 1.0 / n as f64;
        (0..n)
            .map(|g| {
                (0..n)
                    .map(|ghat| f[ghat] * self.pairing(ghat, g).to_c64().conj())
                    .sum::<Complex64>()
                    * scale
            })
            .collect()
    }

    pub fn element_name(&self, idx: usize) -> String {
        let d = self.digits(idx);
        let parts: Vec<String> = d.iter().map(|x| x.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// A homomorphism between finite abelian groups as an element-wise index map.
#[derive(Debug, Clone)]
pub struct GroupHom {
    pub dom: FiniteAbelianGroup,
    pub cod: FiniteAbelianGroup,
    pub map: Vec<usize>,
}

impl GroupHom {
    pub fn new(
        dom: FiniteAbelianGroup,
        cod: FiniteAbelianGroup,
        map: Vec<usize>,
    ) -> Result<Self, GroupError> {
        if map.len() != dom.order() || map.iter().any(|&i| i >= cod.order()) {
            return Err(GroupError::BadHomImages);
        }
        for a in dom.elements() {
            for b in dom.elements() {
                if map[dom.add(a, b)] != cod.add(map[a], map[b]) {
                    return Err(GroupError::NotHomomorphism(a, b));
                }
            }
        }
        Ok(GroupHom { dom, cod, map })
    }

    /// Reduction Z_m → Z_n for n | m (x ↦ x mod n), as a validated hom.
    pub fn cyclic_reduction(m: u32, n: u32) -> Result<Self, GroupError> {
        let dom = FiniteAbelianGroup::cyclic(m);
        let cod = FiniteAbelianGroup::cyclic(n);
        let map = (0..m as usize).map(|x| x % n as usize).collect();
        GroupHom::new(dom, cod, map)
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.cod.order()];
        for &y in &self.map {
            hit[y] = true;
        }
        hit.iter().all(|&b| b)
    }

    /// The dual homomorphism φᵀ: Γ̂' → Γ̂ with ⟨φᵀ(γ̂'), γ⟩ = ⟨γ̂', φ(γ)⟩ for all γ,
    /// found by exhaustive search over Γ̂ and verified exactly.
    pub fn dual_hom(&self) -> GroupHom {
        let dual_dom = self.cod.dual();
        let dual_cod = self.dom.dual();
        let mut map = Vec::with_capacity(dual_dom.order());
        for yhat in dual_dom.elements() {
            let target = dual_cod
                .elements()
                .find(|&xhat| {
                    self.dom.elements().all(|x| {
                        dual_cod.pairing(xhat, x) == dual_dom.pairing(yhat, self.apply(x))
                    })
                })
                .expect("dual element exists for every character (finite duality)");
            map.push(target);
        }
        GroupHom::new(dual_dom, dual_cod, map).expect("dual of a hom is a hom")
    }
}

/// A finite group as a validated Cayley table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    inverse: Vec<usize>,
    identity: usize,
    labels: Vec<String>,
}

/// Above this order, associativity is checked on 1000 sampled triples instead of
/// all order³ of them.
const EXHAUSTIVE_AXIOM_LIMIT: usize = 64;

impl FiniteGroup {
    pub fn from_cayley_table(
        table: Vec<Vec<usize>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0
            || table.iter().any(|row| row.len() != n)
            || table.iter().flatten().any(|&x| x >= n)
        {
            return Err(GroupError::MalformedTable);
        }
        let flat: Vec<usize> = table.iter().flatten().copied().collect();
        let mul = |a: usize, b: usize| flat[a * n + b];

        if n <= EXHAUSTIVE_AXIOM_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                            return Err(GroupError::NotAssociative(a, b, c));
                        }
                    }
                }
            }
        } else {
            let mut state = 0x9e3779b97f4a7c15u64;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) as usize
            };
            for _ in 0..1000 {
                let (a, b, c) = (next() % n, next() % n, next() % n);
                if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                    return Err(GroupError::NotAssociative(a, b, c));
                }
            }
        }

        let identity = (0..n)
            .find(|&e| (0..n).all(|a| mul(e, a) == a && mul(a, e) == a))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            inverse[a] = (0..n)
                .find(|&b| mul(a, b) == identity && mul(b, a) == identity)
                .ok_or(GroupError::NoInverse(a))?;
        }
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| format!("g{i}")).collect());
        if labels.len() != n {
            return Err(GroupError::MalformedTable);
        }
        Ok(FiniteGroup {
            order: n,
            table: flat,
            inverse,
            identity,
            labels,
        })
    }

    pub fn cyclic(n: u32) -> Self {
        let n = n as usize;
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        let labels = (0..n).map(|k| format!("g^{k}")).collect();
        FiniteGroup::from_cayley_table(table, Some(labels)).expect("cyclic group is a group")
    }

    pub fn from_abelian(gamma: &FiniteAbelianGroup) -> Self {
        let n = gamma.order();
        let table = (0..n)
            .map(|a| (0..n).map(|b| gamma.add(a, b)).collect())
            .collect();
        let labels = (0..n).map(|i| gamma.element_name(i)).collect();
        FiniteGroup::from_cayley_table(table, Some(labels)).expect("abelian group is a group")
    }

    /// Dihedral group of order 2n: index k + n·ε encodes rᵏsᵉ with srs = r⁻¹.
    pub fn dihedral(n: u32) -> Self {
        let n = n as usize;
        let order = 2 * n;
        let mut table = vec![vec![0usize; order]; order];
        for k1 in 0..n {
            for e1 in 0..2 {
                for k2 in 0..n {
                    for e2 in 0..2 {
                        let k = if e1 == 0 {
                            (k1 + k2) % n
                        } else {
                            (k1 + n - k2 % n) % n
                        };
                        let e = (e1 + e2) % 2;
                        table[k1 + n * e1][k2 + n * e2] = k + n * e;
                    }
                }
            }
        }
        let labels = (0..order)
            .map(|i| {
                let (k, e) = (i % n, i / n);
                match (k, e) {
                    (0, 0) => "e".to_string(),
                    (k, 0) => format!("r{k}"),
                    (0, _) => "s".to_string(),
                    (k, _) => format!("r{k}s"),
                }
            })
            .collect();
        FiniteGroup::from_cayley_table(table, Some(labels)).expect("dihedral group is a group")
    }

    /// Quaternion group Q₈ = {±1, ±i, ±j, ±k}: index a + 4s encodes (−1)ˢ·basis[a]
    /// with basis [1, i, j, k].
    pub fn quaternion() -> Self {
        // basis multiplication: (sign flip, resulting axis)
        let axis_mul = |a: usize, b: usize| -> (usize, usize) {
            match (a, b) {
                (0, x) => (0, x),
                (x, 0) => (0, x),
                (1, 1) | (2, 2) | (3, 3) => (1, 0),
                (1, 2) => (0, 3),
                (2, 1) => (1, 3),
                (2, 3) => (0, 1),
                (3, 2) => (1, 1),
                (3, 1) => (0, 2),
                (1, 3) => (1, 2),
                _ => unreachable!(),
            }
        };
        let mut table = vec![vec![0usize; 8]; 8];
        for a in 0..4 {
            for s1 in 0..2 {
                for b in 0..4 {
                    for s2 in 0..2 {
                        let (flip, axis) = axis_mul(a, b);
                        let s = (s1 + s2 + flip) % 2;
                        table[a + 4 * s1][b + 4 * s2] = axis + 4 * s;
                    }
                }
            }
        }
        let labels = ["1", "i", "j", "k", "-1", "-i", "-j", "-k"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        FiniteGroup::from_cayley_table(table, Some(labels)).expect("Q8 is a group")
    }

    /// Wreath product Γ ≀ Z₂ = (Γ×Γ) ⋊ Z₂ for abelian Γ of order n: the swap
    /// exchanges the two copies. Index (a·n + b) + n²·ε encodes ((a,b), σᵉ).
    pub fn wreath_z2(gamma: &FiniteAbelianGroup) -> Self {
        let n = gamma.order();
        let order = 2 * n * n;
        let mut table = vec![vec![0usize; order]; order];
        for a in 0..n {
            for b in 0..n {
                for e in 0..2 {
                    for c in 0..n {
                        for d in 0..n {
                            for f in 0..2 {
                                let (c2, d2) = if e == 0 { (c, d) } else { (d, c) };
                                table[a * n + b + n * n * e][c * n + d + n * n * f] =
                                    gamma.add(a, c2) * n + gamma.add(b, d2) + n * n * ((e + f) % 2);
                            }
                        }
                    }
                }
            }
        }
        let labels = (0..order)
            .map(|i| {
                let (p, e) = (i % (n * n), i / (n * n));
                let (a, b) = (p / n, p % n);
                if e == 0 {
                    format!("({},{})", gamma.element_name(a), gamma.element_name(b))
                } else {
                    format!("({},{})σ", gamma.element_name(a), gamma.element_name(b))
                }
            })
            .collect();
        FiniteGroup::from_cayley_table(table, Some(labels)).expect("wreath product is a group")
    }

    /// Heisenberg group over Z_p (order p³): upper unitriangular 3×3 matrices,
    /// (a,b,c)·(a',b',c') = (a+a', b+b', c+c'+ab').
    pub fn heisenberg(p: u32) -> Self {
        let p = p as usize;
        let order = p * p * p;
        let idx = |a: usize, b: usize, c: usize| a + p * b + p * p * c;
        let mut table = vec![vec![0usize; order]; order];
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    for a2 in 0..p {
                        for b2 in 0..p {
                            for c2 in 0..p {
                                table[idx(a, b, c)][idx(a2, b2, c2)] =
                                    idx((a + a2) % p, (b + b2) % p, (c + c2 + a * b2) % p);
                            }
                        }
                    }
                }
            }
        }
        let labels = (0..order)
            .map(|i| format!("({},{},{})", i % p, (i / p) % p, i / (p * p)))
            .collect();
        FiniteGroup::from_cayley_table(table, Some(labels)).expect("Heisenberg group is a group")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.order
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Conjugation x ↦ hxh⁻¹.
    pub fn conjugate(&self, h: usize, x: usize) -> usize {
        self.mul(self.mul(h, x), self.inv(h))
    }
}

/// An injective homomorphism ι: Γ → G from a finite abelian group into a finite
/// group, stored as the image index of every Γ-element.
#[derive(Debug, Clone)]
pub struct SubgroupEmbedding {
    pub gamma: FiniteAbelianGroup,
    pub images: Vec<usize>,
}

impl SubgroupEmbedding {
    /// Extends generator images multiplicatively and validates: images commute,
    /// image orders divide the factors, the extension is an injective homomorphism.
    pub fn from_generator_images(
        group: &FiniteGroup,
        gamma: FiniteAbelianGroup,
        generator_images: &[usize],
    ) -> Result<Self, GroupError> {
        let k = gamma.factors().len();
        if generator_images.len() != k || generator_images.iter().any(|&g| g >= group.order()) {
            return Err(GroupError::BadHomImages);
        }
        for (i, &gi) in generator_images.iter().enumerate() {
            for &gj in &generator_images[i + 1..] {
                if group.mul(gi, gj) != group.mul(gj, gi) {
                    return Err(GroupError::NonCommutingImages(gi, gj));
                }
            }
            let n = gamma.factors()[i];
            let mut acc = group.identity();
            for _ in 0..n {
                acc = group.mul(acc, gi);
            }
            if acc != group.identity() {
                return Err(GroupError::GeneratorOrder(gi, n));
            }
        }
        let mut images = Vec::with_capacity(gamma.order());
        for idx in gamma.elements() {
            let digits = gamma.digits(idx);
            let mut acc = group.identity();
            for (i, &d) in digits.iter().enumerate() {
                for _ in 0..d {
                    acc = group.mul(acc, generator_images[i]);
                }
            }
            images.push(acc);
        }
        let emb = SubgroupEmbedding { gamma, images };
        emb.validate(group)?;
        Ok(emb)
    }

    pub fn validate(&self, group: &FiniteGroup) -> Result<(), GroupError> {
        let n = self.gamma.order();
        let mut seen = vec![false; group.order()];
        for &img in &self.images {
            if seen[img] {
                return Err(GroupError::NotInjective);
            }
            seen[img] = true;
        }
        for a in 0..n {
            for b in 0..n {
                if self.images[self.gamma.add(a, b)] != group.mul(self.images[a], self.images[b]) {
                    return Err(GroupError::NotHomomorphism(a, b));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, gamma_elem: usize) -> usize {
        self.images[gamma_elem]
    }

    /// The full abelian group embedded in itself (G = Γ case).
    pub fn identity_embedding(gamma: &FiniteAbelianGroup) -> (FiniteGroup, SubgroupEmbedding) {
        let group = FiniteGroup::from_abelian(gamma);
        let emb = SubgroupEmbedding {
            gamma: gamma.clone(),
            images: gamma.elements().collect(),
        };
        (group, emb)
    }
}

/// Serialized form of a group ("abelian" with factors, or an explicit table).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupSpec {
    Abelian {
        factors: Vec<u32>,
    },
    Table {
        order: usize,
        cayley: Vec<Vec<usize>>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroup, GroupError> {
        match self {
            GroupSpec::Abelian { factors } => {
                let g = FiniteAbelianGroup::new(factors.clone())?;
                Ok(FiniteGroup::from_abelian(&g))
            }
            GroupSpec::Table { order, cayley, labels } => {
                if cayley.len() != *order {
                    return Err(GroupError::MalformedTable);
                }
                FiniteGroup::from_cayley_table(cayley.clone(), labels.clone())
            }
        }
    }

    pub fn build_abelian(&self) -> Result<FiniteAbelianGroup, GroupError> {
        match self {
            GroupSpec::Abelian { factors } => FiniteAbelianGroup::new(factors.clone()),
            GroupSpec::Table { .. } => Err(GroupError::BadFactors),
        }
    }
}

/// Serialized subgroup: the element indices of ι(Γ) plus the generator images that
/// define ι on the standard generators of Γ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgroupSpec {
    pub factors: Vec<u32>,
    pub generator_images: Vec<usize>,
    #[serde(default)]
    pub elements: Option<Vec<usize>>,
}

impl SubgroupSpec {
    pub fn build(&self, group: &FiniteGroup) -> Result<SubgroupEmbedding, GroupError> {
        let gamma = FiniteAbelianGroup::new(self.factors.clone())?;
        let emb = SubgroupEmbedding::from_generator_images(group, gamma, &self.generator_images)?;
        if let Some(elems) = &self.elements {
            let mut expect = elems.clone();
            expect.sort_unstable();
            let mut got = emb.images.clone();
            got.sort_unstable();
            if expect != got {
                return Err(GroupError::SubgroupMismatch);
            }
        }
        Ok(emb)
    }
}
