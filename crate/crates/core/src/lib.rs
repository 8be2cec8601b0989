//! Exact Floquet analysis of `Z^n`-periodic difference operators on graphs.
//!
//! The crate computes symbols of periodic operators, decides whether
//! `(A - λ)u = ψ` has a compactly supported solution, searches for
//! compactly supported eigenfunctions of locally perturbed operators within
//! an explicit radius, and reduces periodic quantum graphs to the same
//! combinatorial machinery.

pub mod exact_linalg;
pub mod factor;
pub mod fixtures;
pub mod floquet;
pub mod lattice;
pub mod laurent;
pub mod numeric;
pub mod perturbation;
pub mod quantum;
pub mod scalar;
pub mod schema;
pub mod solver;
pub mod spectrum;

pub use factor::{irreducibility_check, FactorBudget, FactorStatus, Factorization, Irreducibility};
pub use floquet::{inverse_transform, symbol, transform, FloquetError, TransformedFunction};
pub use lattice::{
    radius, GraphEdge, LatticeError, LatticeFunction, LocalPerturbation, PeriodicGraph, PeriodicOperator,
    PerturbedOperator, Shift, Term, ValidationReport, VertexSite, Violation,
};
pub use laurent::{AlgebraError, DegreeBox, Division, Exponent, LaurentPoly, PolyMatrix};
pub use scalar::{parse_rational, rationalize, GaussRational, ScalarParseError};
pub use spectrum::{bands, dispersion, fermi_samples, floquet_surface_poly, membership, Band, BandList, DispersionGrid, FermiSampleSet, FloquetSurface, Membership, SpectrumError};
pub use solver::{solve, solve_truncated_oracle, support_bound, DegreeLedger, SolveError, SolveOutcome, SolveReport};
pub use perturbation::{attach_decoration, find_embedded, halfspace_no_compact_support, plant_embedded, verify_bound, BoundCheck, EmbeddedEigenReport, Pendant, PerturbationError};
pub use quantum::{EdgePerturbation, EdgeSolutionCoeffs, MetricEdge, MetricGraph, QuantumError, Reduction, Segment};
