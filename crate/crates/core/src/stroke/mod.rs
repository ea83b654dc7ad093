//! Thin-stroke analysis: thinning, splitting at intersections, tangent
//! orientation, and magnetization of strokes with perpendicular dipoles.

mod magnet;
mod orientation;
mod substroke;
mod thin;

pub use magnet::{
    magnetize_stroke, resolve_attraction, resolve_repulsion, stroke_field, stroke_signature,
    MagnetizeOptions, EXHAUSTIVE_LIMIT, STROKE_DIMENSION,
};
pub use orientation::{stroke_orientation, OrientationMap, Smoothing};
pub use substroke::{neighbor_counts, split_substrokes, StrokeSet};
pub use thin::{thin, topology};

use crate::error::{invalid_input, Result};
use crate::grid::Mask;

/// Thins a stroke mask, splits it at intersections and orients every
/// substroke.
pub fn prepare_strokes(mask: &Mask, smoothing: Smoothing) -> Result<(StrokeSet, OrientationMap)> {
    let strokes = split_substrokes(&thin(mask)?)?;
    let orient = stroke_orientation(&strokes, smoothing)?;
    Ok((strokes, orient))
}

pub(crate) fn ensure_2d(mask: &Mask, what: &str) -> Result<(usize, usize)> {
    match *mask.shape() {
        [h, w] => Ok((h, w)),
        _ => Err(invalid_input(format!("{what} must be a 2D mask"))),
    }
}

/// 8-neighbour offsets `(dy, dx)`, face neighbours first, each group in
/// row-major order.
pub(crate) const NEIGHBORS: [(isize, isize); 8] = [
    (-1, 0),
    (0, -1),
    (0, 1),
    (1, 0),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];
