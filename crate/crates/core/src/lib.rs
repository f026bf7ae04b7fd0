pub mod dispersive;
pub mod error;
pub mod gauge;
pub mod matter;
pub mod observables;
pub mod operator;
pub mod perturbation;
pub mod sweep;
pub mod two_level;

pub use error::{Error, Result};
pub use gauge::{CavityParams, GaugeContext, SquareConvention};
pub use matter::{CircuitParams, DipoleParams, MatterSpectrum, Potential};
pub use operator::{EigenSystem, HermitianOp, Operator};
pub use sweep::{SweepResult, SweepRow, SweepSpec};
pub use two_level::{ModelTag, TwoLevelModel};
