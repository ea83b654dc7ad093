//! Comparison helpers for potential maps.

use ndarray::{ArrayD, IxDyn};

use crate::grid::{Mask, RealGrid};

/// Pearson correlation of two grids over the pixels where `mask` is set
/// (all pixels when `None`).
pub fn pearson(a: &RealGrid, b: &RealGrid, mask: Option<&Mask>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "pearson: shape mismatch");
    let all = Mask::from_elem(a.raw_dim(), true);
    let pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(b.iter())
        .zip(mask.unwrap_or(&all).iter())
        .filter(|(_, &m)| m)
        .map(|((&x, &y), _)| (x, y))
        .collect();
    let n = pairs.len() as f64;
    let (mx, my) = pairs
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x / n, sy + y / n));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Averages non-overlapping `factor x factor` blocks of a 2D grid.
pub fn block_average(grid: &RealGrid, factor: usize) -> RealGrid {
    let (h, w) = (grid.shape()[0] / factor, grid.shape()[1] / factor);
    let norm = (factor * factor) as f64;
    ArrayD::from_shape_fn(IxDyn(&[h, w]), |i| {
        let mut sum = 0.0;
        for y in i[0] * factor..(i[0] + 1) * factor {
            for x in i[1] * factor..(i[1] + 1) * factor {
                sum += grid[[y, x]];
            }
        }
        sum / norm
    })
}

/// Marks a block when any pixel inside it is set.
pub fn block_any(mask: &Mask, factor: usize) -> Mask {
    let (h, w) = (mask.shape()[0] / factor, mask.shape()[1] / factor);
    ArrayD::from_shape_fn(IxDyn(&[h, w]), |i| {
        (i[0] * factor..(i[0] + 1) * factor)
            .any(|y| (i[1] * factor..(i[1] + 1) * factor).any(|x| mask[[y, x]]))
    })
}

/// Square (Chebyshev) dilation of a 2D mask.
pub fn dilate(mask: &Mask, radius: usize) -> Mask {
    let (h, w) = (mask.shape()[0], mask.shape()[1]);
    let r = radius as isize;
    let mut out = ArrayD::from_elem(mask.raw_dim(), false);
    for ((y, x), _) in mask
        .indexed_iter()
        .filter(|(_, &b)| b)
        .map(|(i, b)| ((i[0] as isize, i[1] as isize), b))
    {
        for ny in (y - r).max(0)..=(y + r).min(h as isize - 1) {
            for nx in (x - r).max(0)..=(x + r).min(w as isize - 1) {
                out[[ny as usize, nx as usize]] = true;
            }
        }
    }
    out
}

pub fn max_abs(grid: &RealGrid) -> f64 {
    grid.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `max |a - b| / max |b|`.
pub fn relative_max_error(a: &RealGrid, b: &RealGrid) -> f64 {
    let diff = a
        .iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / max_abs(b)
}
