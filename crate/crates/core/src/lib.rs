//! Orthogeodesic arcs between pairs of geodesic representatives on closed
//! hyperbolic surfaces: enumeration of length spectra, the associated
//! Poincaré series and its value at zero, and the exact topological value
//! obtained from Euler calculus on curve diagrams.

pub mod fuchsian;
pub mod hyp_plane;
pub mod arc_census;
pub mod euler_link;
pub mod flow_dynamics;
pub mod numfmt;
pub mod poincare_series;
