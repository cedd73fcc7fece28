//! Phase-estimation toolkit for a Mach-Zehnder interferometer probed with
//! entangled coherent states (ECS), qubit-which-path (QWP) states, or N00N
//! states.
//!
//! The crate computes quantum and classical Fisher information under photon
//! loss and qubit dephasing, evaluates the Cramer-Rao and shot-noise
//! precision benchmarks, samples homodyne and photon-counting measurement
//! records, runs maximum-likelihood estimation campaigns against those
//! bounds, and renders the reduced Wigner distribution of the interfering
//! output mode.
//!
//! Conventions used throughout:
//!
//! * the estimand is the differential phase `phi = phi1 - phi2`, varied at
//!   fixed average phase `phi_bar = (phi1 + phi2) / 2`;
//! * quadratures are dimensionless with the Gaussian noise profile
//!   `pi^(-1/2) exp(-(x - mu)^2)` (variance 1/2, not the standard normal);
//! * photon loss is a per-photon scattering probability `p in [0, 1]`, and
//!   qubit dephasing enters through the scalars `chi >= 0` and `vartheta`;
//! * every sampler is deterministic in its `u64` seed.

pub mod error;
pub mod fisher_c;
pub mod fisher_q;
pub mod io;
pub mod measure;
pub mod quad;
pub mod specfun;
pub mod states;
pub mod wigner;

pub use error::{Error, Result};
pub use fisher_c::{
    CampaignSpec, CampaignSummary, FisherReport, MeasurementScheme, MleOptions, MleResult,
    Samples, SweepAxis, SweepSpec,
};
pub use measure::{CountSample, HomodyneSample, PhaseInterferenceTerm, QubitOutcome};
pub use states::{DephasingParams, DisplacementPair, InterferometerParams, StateFamily};
pub use wigner::WignerGrid;
