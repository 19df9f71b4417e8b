//! Iterated function systems, prefractal curves and their self-similar
//! measure.

mod curve;
mod environment;
mod ifs;
mod measure;
mod osc;
mod polygon;
mod similitude;

pub use curve::{format_word, parse_word, PrefractalCurve, Segment, DEFAULT_SEGMENT_CAP};
pub use environment::{build_environment, EnvironmentReport, EnvironmentRule, FrequencyViolation};
pub use ifs::{Family, IfsSystem};
pub use measure::{
    cell_measure, contraction_sums, measure_density_ratio, measure_report, mixture_dimension,
    segment_disk_length, sigma, sigma_in_dimension, similarity_dimension, DensitySample,
    MeasureReport,
};
pub use osc::{
    check_open_set_condition, check_open_set_condition_at_level, rhombus_over_base, OscReport,
    OscViolation,
};
pub use polygon::{
    point_segment_distance, segment_intersection, signed_area, ConvexPolygon, SegmentIntersection,
};
pub use similitude::{Affine, Point, Similitude};
