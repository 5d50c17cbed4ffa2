//! Exact-arithmetic toolkit for two-unicast butterfly networks.
//!
//! The crate models the four classical butterfly template topologies (split and
//! co-located endpoint variants), computes their achievable and converse rate
//! regions with exact rational arithmetic, builds concrete finite-field
//! transmission plans that meet those regions, and audits the plans for
//! perfect per-edge secrecy by exhaustive enumeration.
//!
//! Modules:
//! - [`netgraph`]: template DAGs, max-flow min-cut, cut-set bounds.
//! - [`regions`]: rate regions as min-of-affine constraint systems, vertex
//!   enumeration, exact equivalence.
//! - [`gfq`]: prime-field symbols and packets.
//! - [`schemes`]: slot-level transmission plans, execution, decoding.
//! - [`secaudit`]: exact secrecy audits and the exhaustive binary encoder
//!   search on the unit butterfly.
//!
//! All capacities and rates are exact rationals; floating point appears only
//! in entropy displays.

pub mod error;
pub mod gfq;
pub mod netgraph;
pub mod rational;
pub mod regions;
pub mod schemes;
pub mod secaudit;

pub use error::Error;
pub use rational::Rational;
