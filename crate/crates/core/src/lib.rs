//! Robust minimum reaching-time state-feedback synthesis for variable
//! structure control (`u = K sign(σ)`) and unit vector control
//! (`u = K σ/‖σ‖`) of uncertain integrator plants `σ̇ = B u + f(t)` with
//! `B` in a matrix polytope and `‖f(t)‖ ≤ δ`.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the reference examples and the
//! command-line tool use.

#![forbid(unsafe_code)]

pub mod cases;
pub mod certificate;
pub mod design;
pub mod error;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod sdp;
pub mod search;
pub mod sim;
pub mod uvc;
pub mod vsc;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = linalg::Matrix<f64>;
pub type SymMatrix = linalg::SymMatrix<f64>;
pub type LinearMatrixProgram = sdp::LinearMatrixProgram<f64>;
pub type SdpSolution = sdp::SdpSolution<f64>;
pub type SolverOptions = sdp::SolverOptions<f64>;
pub type PolytopicPlant = model::PolytopicPlant<f64>;
pub type SimplexWeight = model::SimplexWeight<f64>;
pub type Controller = model::Controller<f64>;
pub type DisturbanceSpec = model::DisturbanceSpec<f64>;
pub type PlantSelection = model::PlantSelection<f64>;
pub type DesignOptions = design::DesignOptions<f64>;
pub type VscCertificate = vsc::VscCertificate<f64>;
pub type VscAnalysisResult = vsc::VscAnalysisResult<f64>;
pub type UvcCertificate = uvc::UvcCertificate<f64>;
pub type UvcAnalysisResult = uvc::UvcAnalysisResult<f64>;
pub type RhoSweep = uvc::RhoSweep<f64>;
pub type Certificate = certificate::Certificate<f64>;
pub type SimConfig = sim::SimConfig<f64>;
pub type Trajectory = sim::Trajectory<f64>;
pub type AuditReport = sim::AuditReport<f64>;
