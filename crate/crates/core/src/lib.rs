pub mod ddcond;
pub mod ddt;
pub mod error;
pub mod jcmodel;
pub mod oracle;
pub mod opalg;
pub mod qfi;

pub use ddcond::{ConditionReport, MixedUnitaryChannel, Verdict};
pub use ddt::PulseSchedule;
pub use error::{Error, Result};
pub use jcmodel::{AmplitudeTrajectory, OmegaDependence, ReservoirParams};
pub use oracle::{DiscreteModeBath, GlobalState};
pub use num_complex::Complex64 as C64;
pub use opalg::{ComplexMatrix, EigenSystem};
pub use qfi::{ParamState, QfiResult};
