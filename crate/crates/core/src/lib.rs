//! Fixed points of nilpotent groups of plane maps that are Lipschitz-close to
//! the identity: bound propagation, orbit and winding machinery, exact group
//! and jet algebra, and polynomial flow examples.

pub mod flows;
pub mod geom;
pub mod groups;
pub mod jets;
pub mod lipcalc;
pub mod orbits;
pub mod poly;
pub mod report;
