//! Numerical laboratory for hypersurfaces in Lorentzian manifolds: jets,
//! analytic expressions, metric charts, graph-surface curvature data,
//! geodesics, Fermi coordinates, light-like locus tracing, and power-series
//! surface construction.

pub mod catalog;
pub mod cksolver;
pub mod cli;
pub mod expr;
pub mod fermi;
pub mod geodesics;
pub mod hypersurface;
pub mod jets;
pub mod locus;
pub mod metric;
