//! Spatial distance-sampling models: inhomogeneous Poisson point processes
//! observed through a detection function, with likelihoods that
//! marginalize over unknown individual locations and measurement error in
//! recorded distances.

pub mod covariate;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod likelihood;
pub mod model;
pub mod optim;
pub mod par;
pub mod simulation;
pub mod wkt;

pub use covariate::{CovariateField, GridSpec, Interpolation, Raster, SurrogateSpec};
pub use error::{Error, Result};
pub use geometry::{Point, StudyRegion, Transect, TransectKind};
pub use inference::{fit, FitControls, FitResult};
pub use likelihood::{Dataset, DetectionRecord, LogLik, LoglikOptions, LoglikVariant, QuadratureScheme};
pub use model::{DetectionParams, DistanceErrorParams, ErrorFamily, IntensityParams, SpreadScaling};
pub use par::Execution;
