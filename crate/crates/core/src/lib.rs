pub mod constants;
pub mod grid;
pub mod lab;
pub mod models;
pub mod oracle;
pub mod scalar;
pub mod selftest;

pub use scalar::Real;

/// Double-precision instantiations used by the simulation layer.
pub type Grid = grid::ProductGrid<f64>;
pub type Field = grid::GridField<f64>;
pub type Exponents = grid::ExponentVector<f64>;
pub type Ensemble = grid::FieldEnsemble<f64>;
pub type Operator = grid::OperatorMatrix<f64>;
