//! Rieffel deformation of finite-dimensional C*-algebras, computed exactly where
//! possible and numerically elsewhere.
//!
//! The engine follows the crossed-product route: a dynamical system (A, Γ, ρ) with
//! Γ finite abelian is turned into the concrete crossed product B = A⋊_ρΓ on
//! H⊗ℓ²(Γ), the dual Γ̂-action is twisted by a 2-cocycle Ψ on Γ̂, and the deformed
//! algebra A^Ψ is recovered as the Landstad (fixed-point) algebra of the twisted
//! action. On top of that sits the quantum-group layer: for a finite group G with
//! abelian subgroup Γ and a cocycle Ψ on Γ̂, the Kac–Takesaki operator of G is
//! deformed into a manageable multiplicative unitary W whose slice space, together
//! with the comultiplication a ↦ W(a⊗1)W*, a dual, and a Haar state, forms a
//! finite quantum group. The `relations` module provides the (p,q)-commutation
//! checkers used to present deformed generator relations.
//!
//! Phases (values of pairings, cocycles, coboundaries) are exact rationals k/N
//! representing e^{2πik/N}; all identities that live at phase level are checked
//! with zero residual. Operator-level checks are floating point with stated
//! tolerances.

pub mod cocycles;
pub mod deform;
pub mod gammaprod;
pub mod groups;
pub mod linalg;
pub mod oalg;
pub mod phase;
pub mod qgroup;
pub mod relations;

pub use phase::Phase;
