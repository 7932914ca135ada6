//! Measure engine: quadrature evaluation of both sides of the
//! distributional Hessian/Laplacian identities, comparison inequalities in
//! distributional form, and the rank-one structure of the singular part.

pub mod comparison;
pub mod fields;
pub mod model_space;
pub mod pairing;
pub mod quad;

pub use comparison::{
    rank_one_reconstruction, verify_comparison_hessian, verify_comparison_laplacian,
    verify_lower_bound_hessian, verify_lower_bound_laplacian, ComparisonReport,
    LowerBoundReport, RankOneReport,
};
pub use fields::{bump, bump_pow, FieldDirection, ScalarJet, TestScalarField, TestVectorField, VectorJet};
pub use model_space::{ct_k, model_hessian, model_laplacian, ModelHessian};
pub use pairing::{
    divdiv_vv, hessian_decomposition_report, laplacian_scalar, pairing_laplacian,
    pairing_lhs_hessian, pairing_lhs_hessian_n, pairing_lhs_laplacian_n,
    pairing_rhs_ac_hessian_n, pairing_rhs_ac_laplacian_n, validate_support,
    verify_hessian_decomposition, ClosedFormData, CutQuadrature, DistanceData, FieldData,
    MinimalBranch, PairingConfig, PairingReport, APEX_EXCLUSION,
};
pub use quad::{grid_quadrature, grid_quadrature_cells, refine_until, Refined};
