//! Synthetic shapes and strokes: filled polygons and disks, thin rasterized
//! curves, star outlines, a handwritten-style "2", a smooth sinusoidal
//! warp, and a voxel mug with labelled surfaces.
//!
//! Points are `(x, y)` in pixel units with `y` growing down the rows.

use std::f64::consts::{PI, TAU};

use ndarray::{ArrayD, IxDyn};

use crate::grid::{Connectivity, Lattice, Mask};

pub type Point = (f64, f64);

/// Pixels whose centre lies within `radius` of `center`.
pub fn disk(shape: [usize; 2], center: Point, radius: f64) -> Mask {
    ArrayD::from_shape_fn(IxDyn(&shape), |i| {
        let (dx, dy) = (i[1] as f64 - center.0, i[0] as f64 - center.1);
        dx * dx + dy * dy <= radius * radius
    })
}

/// Even-odd fill of a closed polygon, sampled at pixel centres.
pub fn fill_polygon(shape: [usize; 2], vertices: &[Point]) -> Mask {
    let n = vertices.len();
    ArrayD::from_shape_fn(IxDyn(&shape), |i| {
        let (px, py) = (i[1] as f64, i[0] as f64);
        let mut inside = false;
        for k in 0..n {
            let (x0, y0) = vertices[k];
            let (x1, y1) = vertices[(k + 1) % n];
            if (y0 > py) != (y1 > py) {
                let xc = x0 + (py - y0) * (x1 - x0) / (y1 - y0);
                if px < xc {
                    inside = !inside;
                }
            }
        }
        inside
    })
}

/// Alternating tip/notch vertices of a star, first tip pointing up.
pub fn star_vertices(center: Point, outer: f64, inner: f64, points: usize) -> Vec<Point> {
    (0..2 * points)
        .map(|k| {
            let a = -PI / 2.0 + k as f64 * PI / points as f64;
            let r = if k % 2 == 0 { outer } else { inner };
            (center.0 + r * a.cos(), center.1 + r * a.sin())
        })
        .collect()
}

/// Inserts points along every segment so that consecutive points are at
/// most `step` apart.
pub fn densify(vertices: &[Point], closed: bool, step: f64) -> Vec<Point> {
    let segments = if closed {
        vertices.len()
    } else {
        vertices.len().saturating_sub(1)
    };
    let mut out = Vec::new();
    for k in 0..segments {
        let (a, b) = (vertices[k], vertices[(k + 1) % vertices.len()]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let m = (len / step).ceil().max(1.0) as usize;
        out.extend((0..m).map(|j| {
            let t = j as f64 / m as f64;
            (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
        }));
    }
    if !closed {
        if let Some(&last) = vertices.last() {
            out.push(last);
        }
    }
    out
}

/// Smooth displacement `x += A·sin(2πy/L)`, `y += A·sin(2πx/L)`.
pub fn sinusoidal_warp(points: &[Point], amplitude: f64, wavelength: f64) -> Vec<Point> {
    points
        .iter()
        .map(|&(x, y)| {
            (
                x + amplitude * (TAU * y / wavelength).sin(),
                y + amplitude * (TAU * x / wavelength).sin(),
            )
        })
        .collect()
}

/// Filled five-point star with its tip and notch positions.
#[derive(Debug, Clone)]
pub struct StarFixture {
    pub mask: Mask,
    pub tips: Vec<Point>,
    pub notches: Vec<Point>,
}

/// Star centred in a `side x side` image, outer radius `100/256` of the
/// side and inner radius 0.45 of that. A non-zero `warp` displaces the
/// outline with [`sinusoidal_warp`] at amplitude `warp` times the diameter
/// and wavelength twice the diameter.
pub fn star_fixture(side: usize, warp: f64) -> StarFixture {
    let outer = side as f64 * 100.0 / 256.0;
    let c = (side as f64 - 1.0) / 2.0;
    let mut vertices = star_vertices((c, c), outer, 0.45 * outer, 5);
    let mut outline = densify(&vertices, true, 0.5);
    if warp != 0.0 {
        let (amp, len) = (warp * 2.0 * outer, 4.0 * outer);
        outline = sinusoidal_warp(&outline, amp, len);
        vertices = sinusoidal_warp(&vertices, amp, len);
    }
    StarFixture {
        mask: fill_polygon([side, side], &outline),
        tips: vertices.iter().step_by(2).copied().collect(),
        notches: vertices.iter().skip(1).step_by(2).copied().collect(),
    }
}

/// Points along a circular arc starting at angle `start` (radians, image
/// orientation) and sweeping `sweep`.
pub fn arc_points(center: Point, radius: f64, start: f64, sweep: f64) -> Vec<Point> {
    let m = (radius * sweep.abs() * 4.0).ceil().max(2.0) as usize;
    (0..=m)
        .map(|j| {
            let a = start + sweep * j as f64 / m as f64;
            (center.0 + radius * a.cos(), center.1 + radius * a.sin())
        })
        .collect()
}

/// One-pixel-wide 8-connected rasterization of a polyline.
///
/// Samples the path densely, keeps one pixel per visited cell, then drops
/// every pixel whose path neighbours already touch, so interior pixels of
/// the curve end up with exactly two stroke neighbours.
pub fn rasterize_path(shape: [usize; 2], points: &[Point], closed: bool) -> Mask {
    let mut seq: Vec<(i64, i64)> = Vec::new();
    for &(x, y) in &densify(points, closed, 0.2) {
        let p = (y.round() as i64, x.round() as i64);
        if seq.last() != Some(&p) {
            seq.push(p);
        }
    }
    if closed {
        while seq.len() > 1 && seq.first() == seq.last() {
            seq.pop();
        }
    }
    let touching = |a: (i64, i64), b: (i64, i64)| (a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1;
    loop {
        let n = seq.len();
        if n < 4 {
            break;
        }
        let removable = (0..n).find(|&i| {
            if !closed && (i == 0 || i + 1 == n) {
                return false;
            }
            touching(seq[(i + n - 1) % n], seq[(i + 1) % n])
        });
        match removable {
            Some(i) => {
                seq.remove(i);
            }
            None => break,
        }
    }
    let mut mask = ArrayD::from_elem(IxDyn(&shape), false);
    for (y, x) in seq {
        if y >= 0 && x >= 0 && (y as usize) < shape[0] && (x as usize) < shape[1] {
            mask[[y as usize, x as usize]] = true;
        }
    }
    mask
}

/// Polyline of a handwritten "2" inside a `height`-tall box whose top-left
/// corner is `origin`: an upper hook, a diagonal, and a flat base.
pub fn digit_two(origin: Point, height: f64) -> Vec<Point> {
    let s = height / 10.0;
    let hook_center = (origin.0 + 3.2 * s, origin.1 + 2.8 * s);
    let mut pts = arc_points(hook_center, 2.3 * s, -PI * 0.95, PI * 1.2);
    let (ex, ey) = *pts.last().expect("arc");
    pts.push((ex - 0.6 * s, ey + 1.5 * s));
    pts.push((origin.0 + 0.9 * s, origin.1 + 9.2 * s));
    pts.push((origin.0 + 6.2 * s, origin.1 + 9.2 * s));
    pts
}

/// Block-letter mug standing along axis 0 (z grows upward), with the
/// surfaces used to check where on-contour maxima land.
#[derive(Debug, Clone)]
pub struct MugFixture {
    pub voxels: Mask,
    /// Contour voxels facing the cavity (inner wall and cavity floor).
    pub cavity_wall: Mask,
    /// Contour voxels on the top two layers of the wall.
    pub rim: Mask,
}

pub fn mug(side: usize) -> MugFixture {
    let s = side as f64 / 64.0;
    let c = (side as f64 - 1.0) / 2.0;
    let (outer, inner) = (20.0 * s, 15.0 * s);
    let (base, floor, top) = (10.0 * s, 16.0 * s, 54.0 * s);
    let radial = |i: &[usize]| ((i[1] as f64 - c).powi(2) + (i[2] as f64 - c).powi(2)).sqrt();
    let shape = [side, side, side];
    let cavity = ArrayD::from_shape_fn(IxDyn(&shape), |i| {
        let z = i[0] as f64;
        radial(&[i[0], i[1], i[2]]) <= inner && z >= floor && z <= top
    });
    let voxels = ArrayD::from_shape_fn(IxDyn(&shape), |i| {
        let z = i[0] as f64;
        radial(&[i[0], i[1], i[2]]) <= outer && z >= base && z <= top
    }) & &cavity.mapv(|b| !b);

    let lattice = Lattice::new(&shape, Connectivity::Face).expect("3D");
    let vox: Vec<bool> = voxels.iter().copied().collect();
    let cav: Vec<bool> = cavity.iter().copied().collect();
    let mut wall = vec![false; vox.len()];
    let mut contour = vec![false; vox.len()];
    for i in (0..vox.len()).filter(|&i| vox[i]) {
        lattice.for_each_neighbor(i, |j| {
            contour[i] |= !vox[j];
            wall[i] |= cav[j];
        });
    }
    let top_layer = top.floor() as usize;
    let rim: Vec<bool> = (0..vox.len())
        .map(|i| contour[i] && lattice.coords(i)[0] + 1 >= top_layer)
        .collect();
    MugFixture {
        voxels,
        cavity_wall: crate::grid::from_flat(&shape, wall),
        rim: crate::grid::from_flat(&shape, rim),
    }
}
