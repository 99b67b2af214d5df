//! Certified map instances and the map transformations (truncation, scaling,
//! padding).

mod generate;
mod instance;
mod map;
pub mod transform;

pub use generate::{generate_instance, MapFamily, MAX_GENERATED_DIM};
pub use instance::InstanceFile;
pub use map::{
    pad_to_even, scale_to_contraction, truncate_map, AffinePiece, Extremum, MapSpec,
    ShapleyCoordinate,
};
