//! Symanzik polynomials of graphs and linear configurations, graph hypersurfaces,
//! parametric Feynman amplitudes, string-tension limits of biextension heights and
//! Landau singularities.

pub mod error;
pub mod graph;
pub mod linalg;
pub mod poly;
pub mod rational;
pub mod symanzik;
pub mod hypersurface;
pub mod amplitude;
pub mod degeneration;
pub mod landau;
pub mod corpus;

pub use error::{Error, Result};
pub use graph::{build_graph, Graph, Modification};
pub use poly::MultiPoly;
pub use rational::Rational;
