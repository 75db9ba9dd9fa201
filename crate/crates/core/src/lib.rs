//! Quay-crane dual cycling with dockyard rehandle reduction.
//!
//! A ship row is discharged and reloaded by a single quay crane. The order in
//! which ship stacks are worked decides how many crane cycles can carry a
//! container both ways, and the arrangement of outbound containers in the
//! dockyard decides how many blockers have to be relocated before each load.
//! [`ga`] searches both at once; [`sim`] is the shared cost model.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod ga;
pub mod model;
pub mod scenario;
pub mod sim;
pub mod stats;
