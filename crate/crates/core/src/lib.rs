//! Lipschitz-bounded approximation of sparsely sampled functions with
//! bounded deviations: the Lipfit estimator, LB-BD curves, prediction
//! error metrics and their minimisation, and seeded simulation tooling.

pub mod compare;
pub mod curve;
pub mod domain;
pub mod error;
pub mod fit;
pub mod lbbd;
pub mod lp;
pub mod metrics;
pub mod pem;
pub mod simgen;
pub mod workflow;

pub use curve::{FitCurve, MethodId, PiecewiseLinearFn};
pub use domain::{Domain, Interval1D, LbbdPair, LipBound, Point, SampleSet};
pub use error::{Error, Result};
pub use fit::{fit_method, lipfit_fit};
pub use lbbd::{gamma, gamma_inverse, lbbd_curve, Engine, LbbdCurve};
pub use metrics::{error_report, ErrorKind, ErrorReport};
pub use pem::{pem_select, PemResult};
