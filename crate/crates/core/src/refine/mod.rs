//! Outlier rejection and Bézier interpolation of merged keypoint streams.

pub mod bezier;
pub mod interpolate;
pub mod outlier;

pub use bezier::{bernstein_matrix, evaluate_bezier, fit_bezier};
pub use interpolate::{interpolate_sequence, BezierConfig, Interpolation, OverlapBlend};
pub use outlier::{detect_outliers, OutlierConfig};
