//! Two-box Fourier calculus on finite group models and spin models, with
//! numerical verification of the associated norm inequalities, uncertainty
//! principles and minimizer characterizations.

pub mod algebra;
pub mod extremizers;
pub mod group;
pub mod harness;
pub mod linalg;
pub mod two_box;

pub use algebra::{AlgebraElement, AlgebraError, AlgebraKind, StarAlgebra};
pub use group::{FiniteGroup, GroupError, Subgroup};
pub use two_box::{PermutationAction, Side, TwoBoxError, TwoBoxPair};

pub type C64 = num_complex::Complex64;
