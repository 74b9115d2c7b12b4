//! Unitary 2-cocycles on finite abelian groups, in exact phase arithmetic.
//!
//! A [`TwoCocycle`] is a table Ψ: Γ̂×Γ̂ → 𝕋 with Ψ(0,·) = Ψ(·,0) = 1 and
//! Ψ(x,y+z)Ψ(y,z) = Ψ(x+y,z)Ψ(x,y). Entries are exact roots of unity, so the
//! identity, derived tables (Ψ̃, Ψ★, Ψ^Σ=flip, u) and cohomology decisions carry
//! zero floating-point error. Two cocycles are cohomologous iff their ratio has
//! trivial antisymmetrization; in that case a coboundary witness f with
//! ratio = ∂f, ∂f(x,y) = f(x+y)/f(x)f(y), is built by peeling cyclic factors.

use crate::groups::FiniteAbelianGroup;
use crate::phase::Phase;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CocycleError {
    #[error("table shape does not match the group order")]
    ShapeMismatch,
    #[error("normalization fails: Ψ(0,{0}) or Ψ({0},0) ≠ 1")]
    NotNormalized(usize),
    #[error("cocycle identity fails at triple ({0}, {1}, {2})")]
    IdentityFails(usize, usize, usize),
    #[error("operands live on different groups")]
    GroupMismatch,
    #[error("operation requires a verified cocycle")]
    Unverified,
    #[error("boundary function must satisfy f(0) = 1")]
    BadBoundaryFunction,
    #[error("exponent matrix must be k×k for k group factors")]
    BadExponentMatrix,
    #[error("coboundary witness construction failed (input not symmetric?)")]
    WitnessConstruction,
    #[error("witness production is limited to groups of order ≤ {0}")]
    WitnessTooLarge(usize),
}

/// Outcome of the exhaustive cocycle check: pass, or the first violation found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CocycleViolation {
    Normalization { element: usize },
    Identity { triple: (usize, usize, usize) },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleReport {
    pub pass: bool,
    pub violation: Option<CocycleViolation>,
}

/// An arbitrary unit-modulus table on Γ̂×Γ̂ (e.g. Ψ★, which is not a cocycle).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseTable2 {
    pub group: FiniteAbelianGroup,
    values: Vec<Phase>,
}

impl PhaseTable2 {
    pub fn from_fn(group: FiniteAbelianGroup, f: impl Fn(usize, usize) -> Phase) -> Self {
        let n = group.order();
        let mut values = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                values.push(f(a, b));
            }
        }
        PhaseTable2 { group, values }
    }

    pub fn value(&self, a: usize, b: usize) -> Phase {
        self.values[a * self.group.order() + b]
    }
}

/// A normalized unitary 2-cocycle on a finite abelian group (the dual group Γ̂ of
/// the acting group; the canonical self-duality identifies the two).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoCocycle {
    dual_group: FiniteAbelianGroup,
    table: Vec<Phase>,
    verified: bool,
}

impl TwoCocycle {
    /// Builds without checking; [`TwoCocycle::verify_cocycle`] reports violations
    /// and [`TwoCocycle::into_verified`] upgrades. Derived-object operations
    /// refuse unverified input.
    pub fn from_raw_table(
        dual_group: FiniteAbelianGroup,
        table: Vec<Phase>,
    ) -> Result<Self, CocycleError> {
        let n = dual_group.order();
        if table.len() != n * n {
            return Err(CocycleError::ShapeMismatch);
        }
        Ok(TwoCocycle {
            dual_group,
            table,
            verified: false,
        })
    }

    pub fn from_fn(
        dual_group: FiniteAbelianGroup,
        f: impl Fn(usize, usize) -> Phase,
    ) -> Result<Self, CocycleError> {
        let n = dual_group.order();
        let mut table = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                table.push(f(a, b));
            }
        }
        TwoCocycle::from_raw_table(dual_group, table)?.into_verified()
    }

    pub fn trivial(dual_group: FiniteAbelianGroup) -> Self {
        let n = dual_group.order();
        TwoCocycle {
            table: vec![Phase::ONE; n * n],
            dual_group,
            verified: true,
        }
    }

    /// Ψ(x,y) = e^{2πi (Σᵢⱼ Eᵢⱼ xᵢ yⱼ)/N} from an integer exponent matrix over the
    /// group's digit coordinates. Bicharacters satisfy the cocycle identity
    /// automatically, but the result is verified anyway (ill-matched moduli break
    /// well-definedness, which surfaces as a violation).
    pub fn bicharacter(
        dual_group: FiniteAbelianGroup,
        exponent_matrix: &[Vec<i64>],
        modulus: i64,
    ) -> Result<Self, CocycleError> {
        let k = dual_group.factors().len();
        if exponent_matrix.len() != k || exponent_matrix.iter().any(|row| row.len() != k) {
            return Err(CocycleError::BadExponentMatrix);
        }
        let group = dual_group.clone();
        TwoCocycle::from_fn(dual_group, |a, b| {
            let da = group.digits(a);
            let db = group.digits(b);
            let mut e = 0i64;
            for i in 0..k {
                for j in 0..k {
                    e += exponent_matrix[i][j] * da[i] as i64 * db[j] as i64;
                }
            }
            Phase::root_of_unity(modulus, e)
        })
    }

    /// ∂f(x,y) = f(x+y)/f(x)f(y) for a unit-modulus f with f(0) = 1; always a
    /// symmetric cocycle.
    pub fn coboundary(
        dual_group: FiniteAbelianGroup,
        f: &[Phase],
    ) -> Result<Self, CocycleError> {
        if f.len() != dual_group.order() {
            return Err(CocycleError::ShapeMismatch);
        }
        if !f[dual_group.zero()].is_one() {
            return Err(CocycleError::BadBoundaryFunction);
        }
        let group = dual_group.clone();
        TwoCocycle::from_fn(dual_group, |a, b| {
            f[group.add(a, b)] * (f[a] * f[b]).conj()
        })
    }

    /// Seeded random coboundary from a function valued in 2|Γ̂|-th roots of unity.
    pub fn random_coboundary(dual_group: FiniteAbelianGroup, seed: u64) -> Self {
        let n = dual_group.order() as i64;
        let mut state = seed ^ 0x853c49e6748fea9b;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as i64).rem_euclid(2 * n)
        };
        let mut f: Vec<Phase> = (0..n).map(|_| Phase::root_of_unity(2 * n, next())).collect();
        f[0] = Phase::ONE;
        TwoCocycle::coboundary(dual_group, &f).expect("coboundaries are cocycles")
    }

    pub fn dual_group(&self) -> &FiniteAbelianGroup {
        &self.dual_group
    }

    pub fn value(&self, a: usize, b: usize) -> Phase {
        self.table[a * self.dual_group.order() + b]
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    /// Exhaustive exact check of normalization and the cocycle identity,
    /// reporting the first violation if any.
    pub fn verify_cocycle(&self) -> CocycleReport {
        let n = self.dual_group.order();
        let zero = self.dual_group.zero();
        for a in 0..n {
            if !self.value(zero, a).is_one() || !self.value(a, zero).is_one() {
                return CocycleReport {
                    pass: false,
                    violation: Some(CocycleViolation::Normalization { element: a }),
                };
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let lhs = self.value(a, self.dual_group.add(b, c)) * self.value(b, c);
                    let rhs = self.value(self.dual_group.add(a, b), c) * self.value(a, b);
                    if lhs != rhs {
                        return CocycleReport {
                            pass: false,
                            violation: Some(CocycleViolation::Identity { triple: (a, b, c) }),
                        };
                    }
                }
            }
        }
        CocycleReport {
            pass: true,
            violation: None,
        }
    }

    pub fn into_verified(mut self) -> Result<Self, CocycleError> {
        let report = self.verify_cocycle();
        match report.violation {
            None => {
                self.verified = true;
                Ok(self)
            }
            Some(CocycleViolation::Normalization { element }) => {
                Err(CocycleError::NotNormalized(element))
            }
            Some(CocycleViolation::Identity { triple: (a, b, c) }) => {
                Err(CocycleError::IdentityFails(a, b, c))
            }
        }
    }

    fn require_verified(&self) -> Result<(), CocycleError> {
        if self.verified {
            Ok(())
        } else {
            Err(CocycleError::Unverified)
        }
    }

    /// Ψ̃(x,y) = Ψ(−x,−y)‾, again a cocycle.
    pub fn tilde(&self) -> Result<TwoCocycle, CocycleError> {
        self.require_verified()?;
        let g = self.dual_group.clone();
        let me = self.clone();
        TwoCocycle::from_fn(g.clone(), |a, b| me.value(g.neg(a), g.neg(b)).conj())
    }

    /// Ψ^Σ(x,y) = Ψ(y,x), again a cocycle (it differs from Ψ by the
    /// antisymmetrization bicharacter).
    pub fn flip(&self) -> Result<TwoCocycle, CocycleError> {
        self.require_verified()?;
        let me = self.clone();
        TwoCocycle::from_fn(self.dual_group.clone(), |a, b| me.value(b, a))
    }

    /// Ψ★(x,y) = Ψ(x,−x−y)‾ — a unit-modulus table, in general not a cocycle.
    pub fn star(&self) -> Result<PhaseTable2, CocycleError> {
        self.require_verified()?;
        let g = self.dual_group.clone();
        let me = self.clone();
        Ok(PhaseTable2::from_fn(g.clone(), |a, b| {
            me.value(a, g.neg(g.add(a, b))).conj()
        }))
    }

    /// u(γ̂) = Ψ(−γ̂,γ̂); u(0) = 1.
    pub fn u_element(&self) -> Result<Vec<Phase>, CocycleError> {
        self.require_verified()?;
        let g = &self.dual_group;
        Ok(g.elements().map(|a| self.value(g.neg(a), a)).collect())
    }

    /// The slice Ψ_γ̂ = Ψ(·,γ̂) whose Fourier transform gives the twisting
    /// unitary U_γ̂ inside the group C*-algebra of Γ.
    pub fn slice(&self, gamma_hat: usize) -> Vec<Phase> {
        self.dual_group
            .elements()
            .map(|a| self.value(a, gamma_hat))
            .collect()
    }

    pub fn pointwise_conj(&self) -> TwoCocycle {
        TwoCocycle {
            dual_group: self.dual_group.clone(),
            table: self.table.iter().map(|p| p.conj()).collect(),
            verified: self.verified,
        }
    }

    /// Pointwise product; a cocycle whenever both factors are.
    pub fn multiply(&self, other: &TwoCocycle) -> Result<TwoCocycle, CocycleError> {
        self.require_verified()?;
        other.require_verified()?;
        if self.dual_group != other.dual_group {
            return Err(CocycleError::GroupMismatch);
        }
        let table = self
            .table
            .iter()
            .zip(other.table.iter())
            .map(|(&p, &q)| p * q)
            .collect();
        TwoCocycle::from_raw_table(self.dual_group.clone(), table)?.into_verified()
    }

    /// (Ψ₁⊗Ψ₂)((a₁,a₂),(b₁,b₂)) = Ψ₁(a₁,b₁)Ψ₂(a₂,b₂) on the product group.
    pub fn tensor(&self, other: &TwoCocycle) -> Result<TwoCocycle, CocycleError> {
        self.require_verified()?;
        other.require_verified()?;
        let g = FiniteAbelianGroup::product(&self.dual_group, &other.dual_group);
        let (n2, me, ot) = (other.dual_group.order(), self.clone(), other.clone());
        TwoCocycle::from_fn(g, |a, b| {
            me.value(a / n2, b / n2) * ot.value(a % n2, b % n2)
        })
    }

    /// β(x,y) = Ψ(x,y)/Ψ(y,x); for a cocycle this is a bicharacter, and it
    /// classifies the cohomology class.
    pub fn antisymmetrization(&self) -> PhaseTable2 {
        let me = self.clone();
        PhaseTable2::from_fn(self.dual_group.clone(), |a, b| {
            me.value(a, b) * me.value(b, a).conj()
        })
    }

    /// Radical of the antisymmetrization: {x : β(x,y)=1 for all y}. Its index is
    /// a perfect square d², and d is the common matrix-block size of the twisted
    /// group algebra.
    pub fn antisymmetrization_radical(&self) -> Vec<usize> {
        let beta = self.antisymmetrization();
        let n = self.dual_group.order();
        (0..n)
            .filter(|&x| (0..n).all(|y| beta.value(x, y).is_one()))
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dual_group.order();
        (0..n).all(|a| (0..n).all(|b| self.value(a, b) == self.value(b, a)))
    }

    /// Decides whether Ψ₂ = Ψ₁·∂f for some f, and produces such a witness f when
    /// the group order is ≤ `WITNESS_ORDER_LIMIT`. The decision is exact: the
    /// ratio is a coboundary iff it is symmetric.
    pub fn cohomologous(&self, other: &TwoCocycle) -> Result<CohomologyComparison, CocycleError> {
        self.require_verified()?;
        other.require_verified()?;
        if self.dual_group != other.dual_group {
            return Err(CocycleError::GroupMismatch);
        }
        let ratio = other.multiply(&self.pointwise_conj())?;
        if !ratio.is_symmetric() {
            return Ok(CohomologyComparison {
                cohomologous: false,
                witness: None,
            });
        }
        let witness = if self.dual_group.order() <= WITNESS_ORDER_LIMIT {
            Some(symmetric_cocycle_witness(&ratio)?)
        } else {
            None
        };
        Ok(CohomologyComparison {
            cohomologous: true,
            witness,
        })
    }
}

/// Largest group order for which a coboundary witness is produced (the decision
/// itself has no limit).
pub const WITNESS_ORDER_LIMIT: usize = 4096;

#[derive(Debug, Clone)]
pub struct CohomologyComparison {
    pub cohomologous: bool,
    /// f with Ψ₂ = Ψ₁·∂f when cohomologous and the group is small enough.
    pub witness: Option<Vec<Phase>>,
}

/// Trivializes a symmetric cocycle: returns f with c = ∂f, working on rational
/// lifts of the phase exponents. Cyclic base case: f(gᵏ) = F(k) − (k/n)F(n) with
/// F(k) = Σ_{j<k} c(gʲ,g). Factor split A'⊕Z_n: f(x',a) = f'(x')·f₀(a)·c((x',0),(0,a))
/// — the cocycle identity makes the cross term exactly the missing coboundary part.
/// The result is verified exhaustively before being returned.
fn symmetric_cocycle_witness(c: &TwoCocycle) -> Result<Vec<Phase>, CocycleError> {
    let f = witness_recursive(c.dual_group(), &|a, b| c.value(a, b));
    let g = c.dual_group();
    for a in g.elements() {
        for b in g.elements() {
            let db = f[g.add(a, b)] * (f[a] * f[b]).conj();
            if db != c.value(a, b) {
                return Err(CocycleError::WitnessConstruction);
            }
        }
    }
    Ok(f)
}

fn witness_recursive(
    group: &FiniteAbelianGroup,
    c: &dyn Fn(usize, usize) -> Phase,
) -> Vec<Phase> {
    let factors = group.factors();
    let k = factors.len();
    let n_last = factors[k - 1] as usize;
    // Elements (0,a) of the last cyclic factor are exactly the indices a < n_last;
    // elements (x',0) of the leading part are the multiples x'·n_last.
    let f0 = cyclic_witness(n_last, &|a, b| c(a, b));
    if k == 1 {
        return f0;
    }
    let lead = FiniteAbelianGroup::new(factors[..k - 1].to_vec()).expect("nonempty prefix");
    let f_lead = witness_recursive(&lead, &|i, j| c(i * n_last, j * n_last));
    let mut f = Vec::with_capacity(group.order());
    for idx in group.elements() {
        let (i, a) = (idx / n_last, idx % n_last);
        f.push(f_lead[i] * f0[a] * c(i * n_last, a));
    }
    f
}

fn cyclic_witness(n: usize, c: &dyn Fn(usize, usize) -> Phase) -> Vec<Phase> {
    // Rational lifts: partial holonomies F(k) = Σ_{j<k} turns(c(j,1)).
    let mut partial = Vec::with_capacity(n + 1);
    let mut acc = Rational64::new(0, 1);
    partial.push(acc);
    for j in 0..n {
        acc += c(j, 1 % n).turns();
        partial.push(acc);
    }
    let h = partial[n];
    (0..n)
        .map(|k| {
            let t = partial[k] - h * Rational64::new(k as i64, n as i64);
            Phase::from_fraction(*t.numer(), *t.denom())
        })
        .collect()
}

/// Serialized cocycle: a bicharacter by exponent matrix, or an explicit table of
/// rational phase exponents (entry (i,j) is e^{2πi·num[i][j]/den}).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CocycleSpec {
    Bicharacter {
        exponent_matrix: Vec<Vec<i64>>,
        modulus: i64,
    },
    Table {
        num: Vec<Vec<i64>>,
        den: i64,
    },
}

impl CocycleSpec {
    pub fn build(&self, dual_group: &FiniteAbelianGroup) -> Result<TwoCocycle, CocycleError> {
        match self {
            CocycleSpec::Bicharacter {
                exponent_matrix,
                modulus,
            } => TwoCocycle::bicharacter(dual_group.clone(), exponent_matrix, *modulus),
            CocycleSpec::Table { num, den } => {
                let n = dual_group.order();
                if num.len() != n || num.iter().any(|row| row.len() != n) {
                    return Err(CocycleError::ShapeMismatch);
                }
                let table = num
                    .iter()
                    .flat_map(|row| row.iter().map(|&e| Phase::root_of_unity(*den, e)))
                    .collect();
                TwoCocycle::from_raw_table(dual_group.clone(), table)?.into_verified()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2sq() -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(vec![2, 2]).unwrap()
    }

    fn z4sq() -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(vec![4, 4]).unwrap()
    }

    /// Ψ((a,b),(c,d)) = (−1)^{bc} on Ẑ₂².
    fn nondeg_z2sq() -> TwoCocycle {
        TwoCocycle::bicharacter(z2sq(), &[vec![0, 0], vec![1, 0]], 2).unwrap()
    }

    /// Ψ((a,b),(c,d)) = i^{bc} on Ẑ₄².
    fn nondeg_z4sq() -> TwoCocycle {
        TwoCocycle::bicharacter(z4sq(), &[vec![0, 0], vec![1, 0]], 4).unwrap()
    }

    #[test]
    fn trivial_and_bicharacters_verify_exactly() {
        assert!(TwoCocycle::trivial(z2sq()).verify_cocycle().pass);
        assert!(nondeg_z2sq().verify_cocycle().pass);
        assert!(nondeg_z4sq().verify_cocycle().pass);
        let g = z2sq();
        let psi = nondeg_z2sq();
        for a in g.elements() {
            for b in g.elements() {
                let (da, db) = (g.digits(a), g.digits(b));
                let expect = if da[1] * db[0] % 2 == 1 {
                    Phase::MINUS_ONE
                } else {
                    Phase::ONE
                };
                assert_eq!(psi.value(a, b), expect);
            }
        }
    }

    #[test]
    fn single_negated_entry_fails_with_witness_triple() {
        let psi = nondeg_z2sq();
        let g = z2sq();
        let n = g.order();
        let mut table: Vec<Phase> = (0..n * n)
            .map(|i| psi.value(i / n, i % n))
            .collect();
        table[1 * n + 2] = table[1 * n + 2] * Phase::MINUS_ONE;
        let broken = TwoCocycle::from_raw_table(g, table).unwrap();
        let report = broken.verify_cocycle();
        assert!(!report.pass);
        assert!(report.violation.is_some());
        assert!(broken.into_verified().is_err());
    }

    #[test]
    fn coboundary_matches_direct_formula_and_is_symmetric() {
        let z2 = FiniteAbelianGroup::cyclic(2);
        let f = vec![Phase::ONE, Phase::i()];
        let df = TwoCocycle::coboundary(z2, &f).unwrap();
        // ∂f(1,1) = f(0)/f(1)² = −1.
        assert_eq!(df.value(1, 1), Phase::MINUS_ONE);
        assert!(df.is_symmetric());

        // Characters have trivial coboundary.
        let z4 = FiniteAbelianGroup::cyclic(4);
        let chi: Vec<Phase> = z4.elements().map(|x| z4.pairing(1, x)).collect();
        let dchi = TwoCocycle::coboundary(z4.clone(), &chi).unwrap();
        assert_eq!(dchi, TwoCocycle::trivial(z4));

        let bad = vec![Phase::i(), Phase::ONE];
        assert!(matches!(
            TwoCocycle::coboundary(FiniteAbelianGroup::cyclic(2), &bad),
            Err(CocycleError::BadBoundaryFunction)
        ));
    }

    #[test]
    fn star_table_and_u_match_hand_computed_signs_on_z2sq() {
        let psi = nondeg_z2sq();
        let g = z2sq();
        let star = psi.star().unwrap();
        for x in g.elements() {
            for y in g.elements() {
                let (dx, dy) = (g.digits(x), g.digits(y));
                // Ψ★((a,b),(c,d)) = (−1)^{b(a+c)}.
                let expect = if dx[1] * (dx[0] + dy[0]) % 2 == 1 {
                    Phase::MINUS_ONE
                } else {
                    Phase::ONE
                };
                assert_eq!(star.value(x, y), expect, "star at {x},{y}");
            }
        }
        let u = psi.u_element().unwrap();
        for x in g.elements() {
            let d = g.digits(x);
            let expect = if d[0] * d[1] % 2 == 1 {
                Phase::MINUS_ONE
            } else {
                Phase::ONE
            };
            assert_eq!(u[x], expect, "u at {x}");
        }
        assert!(u[g.zero()].is_one());
    }

    #[test]
    fn derived_tables_of_the_trivial_cocycle_are_trivial() {
        let one = TwoCocycle::trivial(z4sq());
        assert_eq!(one.tilde().unwrap(), one);
        assert_eq!(one.flip().unwrap(), one);
        assert!(one.u_element().unwrap().iter().all(|p| p.is_one()));
        let star = one.star().unwrap();
        let g = z4sq();
        for a in g.elements() {
            for b in g.elements() {
                assert!(star.value(a, b).is_one());
            }
        }
    }

    #[test]
    fn tilde_and_flip_are_verified_cocycles() {
        for psi in [nondeg_z2sq(), nondeg_z4sq()] {
            assert!(psi.tilde().unwrap().verify_cocycle().pass);
            assert!(psi.flip().unwrap().verify_cocycle().pass);
        }
        let twisted = nondeg_z4sq()
            .multiply(&TwoCocycle::random_coboundary(z4sq(), 7))
            .unwrap();
        assert!(twisted.tilde().unwrap().verify_cocycle().pass);
        assert!(twisted.flip().unwrap().verify_cocycle().pass);
    }

    #[test]
    fn star_identity_holds_exhaustively() {
        // Ψ‾(x,y)Ψ★(x+y,z) = Ψ★(x,z)Ψ★(y,x+z) for all triples.
        let shipped = [
            TwoCocycle::trivial(z2sq()),
            nondeg_z2sq(),
            nondeg_z4sq(),
            nondeg_z4sq()
                .multiply(&TwoCocycle::random_coboundary(z4sq(), 3))
                .unwrap(),
        ];
        for psi in shipped {
            let g = psi.dual_group().clone();
            let star = psi.star().unwrap();
            for x in g.elements() {
                for y in g.elements() {
                    for z in g.elements() {
                        let lhs = psi.value(x, y).conj() * star.value(g.add(x, y), z);
                        let rhs = star.value(x, z) * star.value(y, g.add(x, z));
                        assert_eq!(lhs, rhs, "eqpsitil at ({x},{y},{z})");
                    }
                }
            }
        }
    }

    #[test]
    fn theta_shift_of_the_cocycle_is_u_times_conjugate() {
        // Θ(Ψ)(x,y) = Ψ(−x,x+y) equals u(x)·Ψ(x,y)‾ — forced by the cocycle identity.
        for psi in [nondeg_z2sq(), nondeg_z4sq()] {
            let g = psi.dual_group().clone();
            let u = psi.u_element().unwrap();
            for x in g.elements() {
                for y in g.elements() {
                    let theta = psi.value(g.neg(x), g.add(x, y));
                    assert_eq!(theta, u[x] * psi.value(x, y).conj());
                }
            }
        }
    }

    #[test]
    fn tilde_equals_conjugate_star_times_u_bar_in_first_leg() {
        // Ψ̃(x,y) = Ψ★(x,y)‾ · u(x)‾ — the exact form used by the manageability layer.
        for psi in [
            nondeg_z2sq(),
            nondeg_z4sq(),
            nondeg_z2sq()
                .multiply(&TwoCocycle::random_coboundary(z2sq(), 11))
                .unwrap(),
        ] {
            let g = psi.dual_group().clone();
            let tilde = psi.tilde().unwrap();
            let star = psi.star().unwrap();
            let u = psi.u_element().unwrap();
            for x in g.elements() {
                for y in g.elements() {
                    assert_eq!(tilde.value(x, y), star.value(x, y).conj() * u[x].conj());
                }
            }
        }
    }

    #[test]
    fn multiply_conjugate_cancels_and_exponent_matrices_add() {
        let psi = nondeg_z4sq();
        assert_eq!(
            psi.multiply(&psi.pointwise_conj()).unwrap(),
            TwoCocycle::trivial(z4sq())
        );
        assert_eq!(psi.multiply(&TwoCocycle::trivial(z4sq())).unwrap(), psi);
        let b1 = TwoCocycle::bicharacter(z4sq(), &[vec![1, 0], vec![0, 0]], 4).unwrap();
        let b2 = TwoCocycle::bicharacter(z4sq(), &[vec![0, 0], vec![3, 1]], 4).unwrap();
        let sum = TwoCocycle::bicharacter(z4sq(), &[vec![1, 0], vec![3, 1]], 4).unwrap();
        assert_eq!(b1.multiply(&b2).unwrap(), sum);
    }

    #[test]
    fn bicharacter_slices_are_characters() {
        let psi = nondeg_z4sq();
        let g = psi.dual_group().clone();
        for ghat in g.elements() {
            let s = psi.slice(ghat);
            for a in g.elements() {
                for b in g.elements() {
                    assert_eq!(s[g.add(a, b)], s[a] * s[b]);
                }
            }
        }
    }

    #[test]
    fn u_transforms_under_coboundary_twist_by_f_times_f_neg() {
        // For Ψ' = Ψ·∂f: u'(x) = u(x)·(f(x)f(−x))‾, exactly.
        let g = z2sq();
        let psi = nondeg_z2sq();
        for seed in [1u64, 2, 3] {
            let n = g.order() as i64;
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(99);
                (state >> 33) as i64
            };
            // Arbitrary 8th-root-valued f: the exact law holds.
            let mut f: Vec<Phase> = (0..n)
                .map(|_| Phase::root_of_unity(2 * n, next().rem_euclid(2 * n)))
                .collect();
            f[0] = Phase::ONE;
            let df = TwoCocycle::coboundary(g.clone(), &f).unwrap();
            let twisted = psi.multiply(&df).unwrap();
            let u = psi.u_element().unwrap();
            let u2 = twisted.u_element().unwrap();
            for x in g.elements() {
                let ratio = u2[x] * u[x].conj();
                assert_eq!(ratio, (f[x] * f[g.neg(x)]).conj());
            }
            // 4th-root-valued f: −x = x on Ẑ₂², so the ratio f(x)²‾ is a sign.
            let mut f4: Vec<Phase> = (0..n)
                .map(|_| Phase::root_of_unity(4, next().rem_euclid(4)))
                .collect();
            f4[0] = Phase::ONE;
            let twisted4 = psi
                .multiply(&TwoCocycle::coboundary(g.clone(), &f4).unwrap())
                .unwrap();
            let u4 = twisted4.u_element().unwrap();
            for x in g.elements() {
                let ratio = u4[x] * u[x].conj();
                assert_eq!(ratio, (f4[x] * f4[g.neg(x)]).conj());
                assert!(ratio == Phase::ONE || ratio == Phase::MINUS_ONE);
            }
        }
    }

    #[test]
    fn cohomologous_accepts_coboundary_twists_and_returns_valid_witness() {
        for psi in [nondeg_z2sq(), nondeg_z4sq()] {
            let g = psi.dual_group().clone();
            let df = TwoCocycle::random_coboundary(g.clone(), 42);
            let twisted = psi.multiply(&df).unwrap();
            let cmp = psi.cohomologous(&twisted).unwrap();
            assert!(cmp.cohomologous);
            let f = cmp.witness.expect("small group gives a witness");
            let reconstructed = TwoCocycle::coboundary(g, &f).unwrap();
            assert_eq!(psi.multiply(&reconstructed).unwrap(), twisted);
        }
    }

    #[test]
    fn cohomologous_rejects_the_nondegenerate_bicharacter_against_trivial() {
        let psi = nondeg_z2sq();
        let one = TwoCocycle::trivial(z2sq());
        let cmp = one.cohomologous(&psi).unwrap();
        assert!(!cmp.cohomologous);
        // β((0,1),(1,0)) = Ψ((0,1),(1,0))/Ψ((1,0),(0,1)) = −1.
        let g = z2sq();
        let beta = psi.antisymmetrization();
        assert_eq!(
            beta.value(g.index(&[0, 1]), g.index(&[1, 0])),
            Phase::MINUS_ONE
        );
    }

    #[test]
    fn cohomologous_is_an_equivalence_relation_on_sampled_families() {
        for base in [nondeg_z2sq(), nondeg_z4sq()] {
            let g = base.dual_group().clone();
            let mut family = vec![TwoCocycle::trivial(g.clone()), base.clone()];
            for seed in [5u64, 6] {
                let df = TwoCocycle::random_coboundary(g.clone(), seed);
                family.push(base.multiply(&df).unwrap());
                family.push(df);
            }
            let m = family.len();
            let mut rel = vec![vec![false; m]; m];
            for i in 0..m {
                for j in 0..m {
                    rel[i][j] = family[i].cohomologous(&family[j]).unwrap().cohomologous;
                }
            }
            for i in 0..m {
                assert!(rel[i][i], "reflexive");
                for j in 0..m {
                    assert_eq!(rel[i][j], rel[j][i], "symmetric");
                    for k in 0..m {
                        if rel[i][j] && rel[j][k] {
                            assert!(rel[i][k], "transitive");
                        }
                    }
                }
            }
            // The family genuinely splits into two classes.
            assert!(!rel[0][1]);
            assert!(rel[1][2]);
        }
    }

    #[test]
    fn antisymmetrization_is_a_bicharacter_with_expected_radical() {
        for psi in [nondeg_z2sq(), nondeg_z4sq()] {
            let g = psi.dual_group().clone();
            let beta = psi.antisymmetrization();
            for x in g.elements() {
                for a in g.elements() {
                    for b in g.elements() {
                        assert_eq!(
                            beta.value(x, g.add(a, b)),
                            beta.value(x, a) * beta.value(x, b)
                        );
                        assert_eq!(
                            beta.value(g.add(a, b), x),
                            beta.value(a, x) * beta.value(b, x)
                        );
                    }
                }
            }
            // Both shipped bicharacters are nondegenerate: radical = {0}.
            assert_eq!(psi.antisymmetrization_radical(), vec![g.zero()]);
        }
        let sym = TwoCocycle::random_coboundary(z4sq(), 9);
        assert_eq!(sym.antisymmetrization_radical().len(), z4sq().order());
    }

    #[test]
    fn tensor_of_tilde_with_original_is_a_cocycle_on_the_square() {
        let psi = nondeg_z2sq();
        let big = psi.tilde().unwrap().tensor(&psi).unwrap();
        assert_eq!(big.dual_group().order(), 16);
        assert!(big.verify_cocycle().pass);
        let g = psi.dual_group().clone();
        let gg = big.dual_group().clone();
        let n = g.order();
        for a1 in g.elements() {
            for a2 in g.elements() {
                for b1 in g.elements() {
                    for b2 in g.elements() {
                        assert_eq!(
                            big.value(a1 * n + a2, b1 * n + b2),
                            psi.tilde().unwrap().value(a1, b1) * psi.value(a2, b2)
                        );
                        let _ = gg;
                    }
                }
            }
        }
    }

    #[test]
    fn cocycle_spec_files_build_and_reject_non_cocycles() {
        let spec: CocycleSpec = serde_json::from_str(
            r#"{"kind":"bicharacter","exponent_matrix":[[0,0],[1,0]],"modulus":2}"#,
        )
        .unwrap();
        assert_eq!(spec.build(&z2sq()).unwrap(), nondeg_z2sq());

        let table: CocycleSpec = serde_json::from_str(
            r#"{"kind":"table","num":[[0,0],[0,2]],"den":4}"#,
        )
        .unwrap();
        let z2 = FiniteAbelianGroup::cyclic(2);
        let built = table.build(&z2).unwrap();
        assert_eq!(built.value(1, 1), Phase::MINUS_ONE);

        let broken: CocycleSpec = serde_json::from_str(
            r#"{"kind":"table","num":[[0,1],[0,0]],"den":4}"#,
        )
        .unwrap();
        assert!(broken.build(&z2).is_err());
    }
}
