//! Numerical laboratory for the quartic Newton family and the antipodal cubic family:
//! orbit classification, parabolic arcs and Ecalle heights, visibility probes, rendering
//! and an HTTP facade.

pub mod error;
pub mod family;
pub mod jet;
pub mod linalg;
pub mod orbit;
pub mod parabolic;
pub mod basin;
pub mod visibility;
pub mod render;
pub mod records;
pub mod service;

pub use error::{AtlasError, Result};
pub use family::{Family, Parameter, C64};
