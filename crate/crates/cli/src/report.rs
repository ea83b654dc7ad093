//! Versioned JSON region report.
//!
//! Coordinates are array indices in the frame of the input image, in grid
//! axis order (`y, x` or `z, y, x`, listed in `axes`). Floats are rounded
//! to 12 significant digits so reports compare byte for byte.

use empf::grid::Mask;
use empf::shape::RegionSet;
use ndarray::Dimension;
use serde::Serialize;

pub const ROI_SCHEMA: &str = "empf.roi";
pub const ROI_VERSION: u32 = 1;

/// Rounds to 12 significant digits.
pub fn sig12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Serialize)]
pub struct RoiReport {
    pub schema: &'static str,
    pub version: u32,
    pub n: f64,
    pub shape: Vec<usize>,
    pub axes: Vec<&'static str>,
    pub growth: f64,
    pub growth_radius: usize,
    pub contour_pixels: usize,
    pub regions: Vec<RegionEntry>,
}

#[derive(Debug, Serialize)]
pub struct RegionEntry {
    pub name: &'static str,
    pub pixel_count: usize,
    pub contour_fraction: f64,
    /// Inclusive index bounds; absent for an empty region.
    pub bounding_box: Option<BoundingBox>,
    pub components: Vec<Component>,
}

#[derive(Debug, Serialize)]
pub struct BoundingBox {
    pub min: Vec<usize>,
    pub max: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct Component {
    pub pixel_count: usize,
    pub centroid: Vec<f64>,
}

pub fn roi_report(
    n: f64,
    growth: f64,
    growth_radius: usize,
    contour: &Mask,
    regions: &RegionSet,
) -> RoiReport {
    let shape = contour.shape().to_vec();
    let axes = if shape.len() == 3 {
        vec!["z", "y", "x"]
    } else {
        vec!["y", "x"]
    };
    let contour_pixels = contour.iter().filter(|&&b| b).count();
    let regions = regions
        .iter()
        .map(|(kind, mask)| {
            let comps = components(mask);
            let pixel_count: usize = comps.iter().map(Vec::len).sum();
            let bounding_box = (pixel_count > 0).then(|| {
                let all = comps.iter().flatten();
                let min = (0..shape.len())
                    .map(|a| all.clone().map(|p| p[a]).min().unwrap())
                    .collect();
                let max = (0..shape.len())
                    .map(|a| all.clone().map(|p| p[a]).max().unwrap())
                    .collect();
                BoundingBox { min, max }
            });
            RegionEntry {
                name: kind.name(),
                pixel_count,
                contour_fraction: sig12(if contour_pixels > 0 {
                    pixel_count as f64 / contour_pixels as f64
                } else {
                    0.0
                }),
                bounding_box,
                components: comps
                    .iter()
                    .map(|c| Component {
                        pixel_count: c.len(),
                        centroid: (0..shape.len())
                            .map(|a| {
                                sig12(c.iter().map(|p| p[a] as f64).sum::<f64>() / c.len() as f64)
                            })
                            .collect(),
                    })
                    .collect(),
            }
        })
        .collect();
    RoiReport {
        schema: ROI_SCHEMA,
        version: ROI_VERSION,
        n,
        shape,
        axes,
        growth,
        growth_radius,
        contour_pixels,
        regions,
    }
}

/// Connected components (8-connected in 2D, 26 in 3D) as lists of
/// coordinates, ordered by their first pixel in raster order.
pub fn components(mask: &Mask) -> Vec<Vec<Vec<usize>>> {
    let shape = mask.shape().to_vec();
    let rank = shape.len();
    let offsets: Vec<Vec<isize>> = (0..3usize.pow(rank as u32))
        .map(|code| {
            (0..rank)
                .map(|a| (code / 3usize.pow(a as u32) % 3) as isize - 1)
                .collect::<Vec<_>>()
        })
        .filter(|o| o.iter().any(|&d| d != 0))
        .collect();
    let mut seen = Mask::from_elem(mask.raw_dim(), false);
    let mut out = Vec::new();
    for (start, &on) in mask.indexed_iter() {
        let start = start.slice().to_vec();
        if !on || seen[start.as_slice()] {
            continue;
        }
        seen[start.as_slice()] = true;
        let mut comp = vec![start.clone()];
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            for off in &offsets {
                let q: Option<Vec<usize>> = p
                    .iter()
                    .zip(off)
                    .zip(&shape)
                    .map(|((&c, &d), &len)| c.checked_add_signed(d).filter(|&v| v < len))
                    .collect();
                if let Some(q) = q {
                    if mask[q.as_slice()] && !seen[q.as_slice()] {
                        seen[q.as_slice()] = true;
                        comp.push(q.clone());
                        stack.push(q);
                    }
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out
}
