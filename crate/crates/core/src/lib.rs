//! Reduction of `G`-invariant symplectic connections on `T*G ≅ G × 𝔤*` to
//! coadjoint orbits.
//!
//! Everything is generic over [`Scalar`]; the `*64` aliases below fix the
//! scalar to `f64`.

pub mod checks;
pub mod connection;
pub mod curvature;
pub mod error;
pub mod lie;
pub mod linalg;
pub mod orbit;
pub mod phase;
pub mod quadrature;
pub mod reduction;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type LieAlgebra64 = lie::LieAlgebra<f64>;
pub type Covector64 = lie::Covector<f64>;
pub type GroupElement64 = lie::GroupElement<f64>;
pub type PhasePoint64 = phase::PhasePoint<f64>;
pub type TrivTangent64 = phase::TrivTangent<f64>;
pub type Tensor3_64 = linalg::Tensor3<f64>;
pub type FrameConnection64 = connection::FrameConnection<f64>;
pub type QuadratureRule64 = quadrature::QuadratureRule<f64>;
pub type OrbitChart64 = orbit::OrbitChart<f64>;
pub type ReductionContext64 = reduction::ReductionContext<f64>;
pub type ReducedConnection64 = reduction::ReducedConnection<f64>;
pub type SigmaConnection64 = reduction::SigmaConnection<f64>;
pub type CurvatureTensor64 = curvature::CurvatureTensor<f64>;
pub type CurvatureSample64 = curvature::CurvatureSample<f64>;
