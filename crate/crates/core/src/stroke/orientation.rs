use std::collections::HashMap;

use ndarray::ArrayD;

use super::{StrokeSet, NEIGHBORS};
use crate::error::{invalid_input, Result};
use crate::grid::{ensure_same_shape, Mask, RealGrid};
use crate::par;

/// Tangent direction of every stroke pixel, `atan2(Δy, Δx)` in image
/// coordinates (x = column, y = row).
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationMap {
    pub theta: RealGrid,
    pub valid: Mask,
}

impl OrientationMap {
    pub fn new(theta: RealGrid, valid: Mask) -> Result<Self> {
        ensure_same_shape(theta.shape(), valid.shape(), "orientation map")?;
        if theta
            .iter()
            .zip(valid.iter())
            .any(|(t, &v)| v && !t.is_finite())
        {
            return Err(invalid_input("orientation is not finite on a valid pixel"));
        }
        Ok(Self { theta, valid })
    }

    /// The same angle on every pixel of `mask`.
    pub fn uniform(mask: &Mask, theta: f64) -> Self {
        Self {
            theta: mask.mapv(|b| if b { theta } else { 0.0 }),
            valid: mask.clone(),
        }
    }
}

/// Repeated moving average applied to the step sequences before taking
/// angles. Averaging steps rather than angles avoids wrap-around at ±π.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Smoothing {
    pub radius: usize,
    pub passes: usize,
}

impl Default for Smoothing {
    fn default() -> Self {
        Self {
            radius: 1,
            passes: 3,
        }
    }
}

impl Smoothing {
    pub fn none() -> Self {
        Self {
            radius: 0,
            passes: 0,
        }
    }

    fn apply(&self, seq: &mut [f64], wrap: bool) {
        let m = seq.len();
        if m < 2 || self.radius == 0 {
            return;
        }
        let r = self.radius as isize;
        for _ in 0..self.passes {
            let prev = seq.to_vec();
            for (i, out) in seq.iter_mut().enumerate() {
                let (mut sum, mut k) = (0.0, 0);
                for j in i as isize - r..=i as isize + r {
                    let j = if wrap {
                        j.rem_euclid(m as isize)
                    } else if j < 0 || j >= m as isize {
                        continue;
                    } else {
                        j
                    };
                    sum += prev[j as usize];
                    k += 1;
                }
                *out = sum / k as f64;
            }
        }
    }
}

/// Per-pixel tangent orientation of every substroke.
///
/// Open substrokes are walked from their first endpoint in raster order;
/// closed ones from their first pixel in raster order, leaving through the
/// preferred neighbour. At every step the next pixel is the first unvisited
/// neighbour, face neighbours before diagonal ones, each in raster order.
/// The steps `(Δx, Δy)` between consecutive pixels are smoothed (cyclically
/// for closed substrokes); each pixel's angle is that of the sum of its
/// incoming and outgoing steps, so endpoints use their single step.
pub fn stroke_orientation(strokes: &StrokeSet, smoothing: Smoothing) -> Result<OrientationMap> {
    let per_stroke = par::map_range(strokes.count(), |k| {
        orient_substroke(&strokes.pixels(k as u32 + 1), smoothing)
    });
    let mut theta = ArrayD::zeros(strokes.mask.raw_dim());
    let mut valid = ArrayD::from_elem(strokes.mask.raw_dim(), false);
    for result in per_stroke {
        for ((y, x), t) in result? {
            theta[[y, x]] = t;
            valid[[y, x]] = true;
        }
    }
    Ok(OrientationMap { theta, valid })
}

type Pixel = (usize, usize);

fn orient_substroke(pixels: &[Pixel], smoothing: Smoothing) -> Result<Vec<(Pixel, f64)>> {
    let index: HashMap<Pixel, usize> = pixels.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let index = &index;
    let neighbours = |i: usize| {
        let (y, x) = pixels[i];
        NEIGHBORS.iter().filter_map(move |&(dy, dx)| {
            let ny = y.checked_add_signed(dy)?;
            let nx = x.checked_add_signed(dx)?;
            index.get(&(ny, nx)).copied()
        })
    };
    let degree: Vec<usize> = (0..pixels.len()).map(|i| neighbours(i).count()).collect();
    if let Some(i) = degree.iter().position(|&d| d > 2) {
        return Err(invalid_input(format!(
            "stroke pixel {:?} is a branch point; split substrokes first",
            pixels[i]
        )));
    }
    let cyclic = pixels.len() >= 3 && degree.iter().all(|&d| d == 2);

    let mut visited = vec![false; pixels.len()];
    let mut out = Vec::with_capacity(pixels.len());
    while let Some(start) = (0..pixels.len())
        .find(|&i| !visited[i] && degree[i] <= 1)
        .or_else(|| visited.iter().position(|&v| !v))
    {
        let mut path = vec![start];
        visited[start] = true;
        let mut cur = start;
        while let Some(next) = neighbours(cur).find(|&j| !visited[j]) {
            visited[next] = true;
            path.push(next);
            cur = next;
        }
        let closed = cyclic && path.len() == pixels.len();
        out.extend(path_angles(&path, pixels, closed, smoothing));
    }
    Ok(out)
}

fn path_angles(
    path: &[usize],
    pixels: &[Pixel],
    closed: bool,
    smoothing: Smoothing,
) -> Vec<(Pixel, f64)> {
    let at = |k: usize| pixels[path[k]];
    if path.len() == 1 {
        return vec![(at(0), 0.0)];
    }
    let steps = if closed { path.len() } else { path.len() - 1 };
    let (mut dx, mut dy): (Vec<f64>, Vec<f64>) = (0..steps)
        .map(|k| {
            let (y0, x0) = at(k);
            let (y1, x1) = at((k + 1) % path.len());
            (x1 as f64 - x0 as f64, y1 as f64 - y0 as f64)
        })
        .unzip();
    smoothing.apply(&mut dx, closed);
    smoothing.apply(&mut dy, closed);
    // each pixel takes the sum of its incoming and outgoing steps, so that
    // walking the path backwards only turns every angle by π
    let n = path.len();
    (0..n)
        .map(|k| {
            let incoming = if closed {
                Some((k + n - 1) % n)
            } else {
                k.checked_sub(1)
            };
            let outgoing = (closed || k + 1 < n).then_some(k % steps);
            let (mut sx, mut sy) = (0.0, 0.0);
            for e in [incoming, outgoing].into_iter().flatten() {
                sx += dx[e];
                sy += dy[e];
            }
            (at(k), sy.atan2(sx))
        })
        .collect()
}
