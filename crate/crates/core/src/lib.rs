//! Singular ("peakon") solutions of the geodesic flow on the group of contact
//! diffeomorphisms, realized as weighted embeddings of points or loops into a
//! contact manifold.
//!
//! The crate provides:
//!
//! * [`contact`]: exemplar contact manifolds and pointwise contact geometry,
//! * [`kernels`]: smoothing kernels acting as the inverse inertia operator,
//! * [`config`]: weighted configurations, both moment maps, the Hamiltonian,
//! * [`dynamics`]: the Hamiltonian flow, a brute-force oracle and an RK4 driver,
//! * [`verify`]: numerical checks of the dual-pair identities,
//! * [`epdiff`]: the comparison with planar landmark (EPDiff) dynamics,
//! * [`scenario`] and [`suites`]: JSON scenarios and named verification suites.

pub mod config;
pub mod contact;
pub mod dynamics;
pub mod epdiff;
pub mod error;
pub mod field;
pub mod kernels;
pub mod numeric;
pub mod ode;
pub mod presets;
pub mod scenario;
pub mod suites;
pub mod verify;

pub use config::{ConfigTangent, LoopDerivative, Topology, WeightedConfig};
pub use contact::ContactModel;
pub use dynamics::{Diagnostics, IntegratorSpec, Method, Trajectory};
pub use error::{Error, Result};
pub use field::ScalarField;
pub use kernels::{KernelFamily, KernelSpec};
