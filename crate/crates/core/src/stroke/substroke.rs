use ndarray::{ArrayD, IxDyn};

use super::{ensure_2d, NEIGHBORS};
use crate::error::Result;
use crate::grid::Mask;

/// Thin strokes with intersections removed, each remaining 8-connected
/// piece labelled as a substroke.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeSet {
    /// Stroke pixels (intersections excluded).
    pub mask: Mask,
    /// `0` off-stroke, `1..=count` for substroke ids in raster order of
    /// their first pixel.
    pub labels: ArrayD<u32>,
    count: usize,
}

impl StrokeSet {
    /// Labels the 8-connected components of an already-split mask.
    pub fn from_mask(mask: Mask) -> Result<Self> {
        let (h, w) = ensure_2d(&mask, "stroke")?;
        let mut labels = ArrayD::<u32>::zeros(IxDyn(&[h, w]));
        let mut count = 0u32;
        for y in 0..h {
            for x in 0..w {
                if !mask[[y, x]] || labels[[y, x]] != 0 {
                    continue;
                }
                count += 1;
                labels[[y, x]] = count;
                let mut stack = vec![(y, x)];
                while let Some((cy, cx)) = stack.pop() {
                    for (dy, dx) in NEIGHBORS {
                        let (ny, nx) = (cy as isize + dy, cx as isize + dx);
                        if ny < 0 || nx < 0 || ny >= h as isize || nx >= w as isize {
                            continue;
                        }
                        let (ny, nx) = (ny as usize, nx as usize);
                        if mask[[ny, nx]] && labels[[ny, nx]] == 0 {
                            labels[[ny, nx]] = count;
                            stack.push((ny, nx));
                        }
                    }
                }
            }
        }
        Ok(Self {
            mask,
            labels,
            count: count as usize,
        })
    }

    /// Number of substrokes.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn shape(&self) -> &[usize] {
        self.mask.shape()
    }

    /// Pixels of substroke `id` (1-based) in raster order.
    pub fn pixels(&self, id: u32) -> Vec<(usize, usize)> {
        self.labels
            .indexed_iter()
            .filter(|(_, &l)| l == id)
            .map(|(i, _)| (i[0], i[1]))
            .collect()
    }

    /// Mask of a single substroke.
    pub fn substroke_mask(&self, id: u32) -> Mask {
        self.labels.mapv(|l| l == id)
    }
}

/// Number of set 8-neighbours of every pixel.
pub fn neighbor_counts(mask: &Mask) -> Result<ArrayD<u8>> {
    let (h, w) = ensure_2d(mask, "stroke")?;
    Ok(ArrayD::from_shape_fn(IxDyn(&[h, w]), |i| {
        let (y, x) = (i[0] as isize, i[1] as isize);
        NEIGHBORS
            .iter()
            .filter(|(dy, dx)| {
                let (ny, nx) = (y + dy, x + dx);
                ny >= 0
                    && nx >= 0
                    && ny < h as isize
                    && nx < w as isize
                    && mask[[ny as usize, nx as usize]]
            })
            .count() as u8
    }))
}

/// Removes every pixel with three or more stroke neighbours and labels the
/// pieces that remain.
pub fn split_substrokes(thin: &Mask) -> Result<StrokeSet> {
    let counts = neighbor_counts(thin)?;
    let mut kept = thin.clone();
    kept.zip_mut_with(&counts, |k, &c| *k &= c < 3);
    StrokeSet::from_mask(kept)
}
