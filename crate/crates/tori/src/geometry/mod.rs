//! Frequency-space geometry: the sampled box, resonant strips, inverse
//! frequency maps, convex-hull distances and resonant measure.

mod carve;
mod domain;
mod hull;
mod maps;

pub use carve::{carve, convex_hull_check, measure_compare, strip_test, strip_width, HullCheck, MeasureParams, MeasureReport};
pub use domain::{FrequencyDomain, RemovedStrip};
pub use hull::{hull_distance, HullDistance};
pub use maps::{build_maps, FrequencyMaps, MapEstimates};
