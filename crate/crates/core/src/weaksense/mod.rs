//! Weak senses of `Hess f ≤ A` and `Δf ≤ α`: barrier, viscosity and
//! distributional checkers, the scalar reduction along vector fields, and
//! the fixed implication corpus.

pub mod checkers;
pub mod corpus;
pub mod types;

pub use checkers::{
    check_barrier, check_distributional_1d, check_distributional_cases, check_viscosity,
    DistributionalCase, SearchBudget,
};
pub use corpus::{
    hessian_to_scalar_reduction, implication_suite, CorpusRow, ImplicationTable,
    ReductionReport,
};
pub use types::{BoundData, CheckProblem, QuadraticJet, SampledFunction, SenseVerdict, Verdict};
