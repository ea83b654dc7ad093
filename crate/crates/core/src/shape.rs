//! Contour analysis of charged shapes: boundary extraction, percentile
//! bands of on-contour potential and field, and geodesic region growth.
//!
//! The six regions of interest are each defined by a pair of percentile
//! bands, one over the potential and one over the field magnitude, both
//! taken over contour pixels only:
//!
//! | region  | V band (%) | abs(E) band (%) |
//! |---------|-----------|--------------|
//! | concave | 70–100    | 0–50         |
//! | convex  | 15–40     | 15–40        |
//! | flat    | 40–60     | 80–95        |
//! | near CM | 80–95     | 40–60        |
//! | far CM  | 0–25      | 0–25         |
//! | inside  | 90–100    | 0–10         |

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Result};
use crate::field::{electric_field, ChargeImage, FieldOptions};
use crate::grid::{dims3, ensure_same_shape, Connectivity, Lattice, Mask, RealGrid};

/// Default fraction of the largest image extent by which regions grow.
pub const DEFAULT_GROWTH: f64 = 0.05;

/// Default dimension exponent for 2D shape analysis.
pub const DEFAULT_SHAPE_DIMENSION: f64 = 3.0;

/// Solid shape: at least one set pixel and a clear one-pixel margin.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeMask {
    values: Mask,
}

impl ShapeMask {
    pub fn new(values: Mask) -> Result<Self> {
        let lattice = Lattice::new(values.shape(), Connectivity::Face)?;
        let rank = values.ndim();
        let mut any = false;
        for (i, &b) in values.iter().enumerate() {
            if b {
                any = true;
                if lattice.on_border(i, rank) {
                    return Err(invalid_input(
                        "shape touches the image border; pad it first",
                    ));
                }
            }
        }
        if !any {
            return Err(invalid_input("shape mask is empty"));
        }
        Ok(Self { values })
    }

    /// Adds `pad` false pixels on every side, then validates.
    pub fn padded(values: &Mask, pad: usize) -> Result<Self> {
        Self::new(crate::grid::pad(values, pad, false))
    }

    pub fn values(&self) -> &Mask {
        &self.values
    }

    pub fn shape(&self) -> &[usize] {
        self.values.shape()
    }
}

/// Shape pixels with at least one face neighbour outside the shape:
/// `mask AND NOT erode(mask)` with a face-connected structuring element.
pub fn extract_contour(mask: &ShapeMask) -> Mask {
    let m = mask.values();
    let lattice = Lattice::new(m.shape(), Connectivity::Face).expect("validated rank");
    let flat: Vec<bool> = m.iter().copied().collect();
    let contour = (0..flat.len())
        .map(|i| {
            if !flat[i] {
                return false;
            }
            let mut boundary = false;
            lattice.for_each_neighbor(i, |j| boundary |= !flat[j]);
            boundary
        })
        .collect();
    crate::grid::from_flat(m.shape(), contour)
}

/// Zero everywhere except on the contour, optionally squared.
pub fn on_contour_values(field: &RealGrid, contour: &Mask, square: bool) -> Result<RealGrid> {
    ensure_same_shape(field.shape(), contour.shape(), "on-contour values")?;
    let mut out = field.clone();
    out.zip_mut_with(contour, |v, &on| {
        *v = match (on, square) {
            (false, _) => 0.0,
            (true, true) => *v * *v,
            (true, false) => *v,
        }
    });
    Ok(out)
}

/// Nearest-rank percentile of ascending `sorted`: the smallest value with at
/// least `p` percent of the samples at or below it.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let n = sorted.len();
    let rank = (p / 100.0 * n as f64 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

/// Mask pixels whose value lies in `[P_lo, P_hi]`, percentiles taken over
/// the masked values only. Both bounds are inclusive.
pub fn percentile_band(values: &RealGrid, mask: &Mask, lo: f64, hi: f64) -> Result<Mask> {
    ensure_same_shape(values.shape(), mask.shape(), "percentile band")?;
    if !(0.0..=100.0).contains(&lo) || !(0.0..=100.0).contains(&hi) {
        return Err(invalid_input(format!(
            "percentiles must lie in [0, 100], got {lo}..{hi}"
        )));
    }
    if lo > hi {
        return Err(invalid_input(format!(
            "lower percentile {lo} exceeds upper {hi}"
        )));
    }
    let mut sample: Vec<f64> = values
        .iter()
        .zip(mask.iter())
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v)
        .collect();
    if sample.is_empty() {
        return Err(invalid_input("percentile band over an empty mask"));
    }
    sample.sort_by(f64::total_cmp);
    let (p_lo, p_hi) = (percentile(&sample, lo), percentile(&sample, hi));
    let mut out = mask.clone();
    out.zip_mut_with(values, |m, &v| *m &= v >= p_lo && v <= p_hi);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Concave,
    Convex,
    Flat,
    NearCm,
    FarCm,
    Inside,
}

impl RegionKind {
    pub const ALL: [RegionKind; 6] = [
        RegionKind::Concave,
        RegionKind::Convex,
        RegionKind::Flat,
        RegionKind::NearCm,
        RegionKind::FarCm,
        RegionKind::Inside,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegionKind::Concave => "concave",
            RegionKind::Convex => "convex",
            RegionKind::Flat => "flat",
            RegionKind::NearCm => "near_cm",
            RegionKind::FarCm => "far_cm",
            RegionKind::Inside => "inside",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Percentile bounds for one region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub v_min: f64,
    pub v_max: f64,
    pub e_min: f64,
    pub e_max: f64,
}

impl Band {
    pub const fn new(v_min: f64, v_max: f64, e_min: f64, e_max: f64) -> Self {
        Self {
            v_min,
            v_max,
            e_min,
            e_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub concave: Band,
    pub convex: Band,
    pub flat: Band,
    pub near_cm: Band,
    pub far_cm: Band,
    pub inside: Band,
}

impl Default for ThresholdTable {
    fn default() -> Self {
        Self {
            concave: Band::new(70.0, 100.0, 0.0, 50.0),
            convex: Band::new(15.0, 40.0, 15.0, 40.0),
            flat: Band::new(40.0, 60.0, 80.0, 95.0),
            near_cm: Band::new(80.0, 95.0, 40.0, 60.0),
            far_cm: Band::new(0.0, 25.0, 0.0, 25.0),
            inside: Band::new(90.0, 100.0, 0.0, 10.0),
        }
    }
}

impl ThresholdTable {
    pub fn band(&self, kind: RegionKind) -> Band {
        match kind {
            RegionKind::Concave => self.concave,
            RegionKind::Convex => self.convex,
            RegionKind::Flat => self.flat,
            RegionKind::NearCm => self.near_cm,
            RegionKind::FarCm => self.far_cm,
            RegionKind::Inside => self.inside,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for kind in RegionKind::ALL {
            let b = self.band(kind);
            for (lo, hi) in [(b.v_min, b.v_max), (b.e_min, b.e_max)] {
                if !(0.0 <= lo && lo <= hi && hi <= 100.0) {
                    return Err(invalid_input(format!(
                        "{} band {lo}..{hi} is not within 0 <= min <= max <= 100",
                        kind.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Six contour-subset masks, one per region kind. Regions may overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSet {
    masks: [Mask; 6],
}

impl RegionSet {
    pub fn get(&self, kind: RegionKind) -> &Mask {
        &self.masks[kind.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (RegionKind, &Mask)> {
        RegionKind::ALL.into_iter().map(move |k| (k, self.get(k)))
    }

    /// Applies `f` to every mask, e.g. to rotate a whole set.
    pub fn map(&self, f: impl Fn(&Mask) -> Mask) -> Self {
        Self {
            masks: std::array::from_fn(|i| f(&self.masks[i])),
        }
    }
}

/// Contour of a shape with the potential and field magnitude of its charge.
#[derive(Debug, Clone)]
pub struct ContourAnalysis {
    pub contour: Mask,
    pub potential: RealGrid,
    pub magnitude: RealGrid,
}

/// Charges the shape uniformly and evaluates V and abs(E) everywhere.
pub fn analyze_contour(mask: &ShapeMask, n: f64, opts: &FieldOptions) -> Result<ContourAnalysis> {
    let field = electric_field(&ChargeImage::from_mask(mask.values()), n, opts)?;
    Ok(ContourAnalysis {
        contour: extract_contour(mask),
        potential: field.potential,
        magnitude: field.magnitude,
    })
}

/// Rounds values to a grid of 1e-9 of their largest magnitude on the
/// contour, so that values equal by symmetry stay equal after FFT round-off.
fn snap(values: &RealGrid, contour: &Mask) -> RealGrid {
    let scale = values
        .iter()
        .zip(contour.iter())
        .filter(|(_, &c)| c)
        .fold(0.0f64, |m, (v, _)| m.max(v.abs()));
    if scale == 0.0 {
        return values.clone();
    }
    values.mapv(|v| (v / scale * 1e9).round())
}

/// Band intersection per region, then geodesic growth along the contour.
pub fn classify_regions(
    analysis: &ContourAnalysis,
    table: &ThresholdTable,
    growth_pct: f64,
) -> Result<RegionSet> {
    table.validate()?;
    let contour = &analysis.contour;
    let v = snap(&analysis.potential, contour);
    let e = snap(&analysis.magnitude, contour);
    let mut masks = Vec::with_capacity(6);
    for kind in RegionKind::ALL {
        let b = table.band(kind);
        let mut m = percentile_band(&v, contour, b.v_min, b.v_max)?;
        let me = percentile_band(&e, contour, b.e_min, b.e_max)?;
        m.zip_mut_with(&me, |a, &b| *a &= b);
        masks.push(grow_region(&m, contour, growth_pct)?);
    }
    Ok(RegionSet {
        masks: masks.try_into().expect("six regions"),
    })
}

pub fn detect_regions(
    mask: &ShapeMask,
    n: f64,
    table: &ThresholdTable,
    growth_pct: f64,
    opts: &FieldOptions,
) -> Result<RegionSet> {
    classify_regions(&analyze_contour(mask, n, opts)?, table, growth_pct)
}

/// Growth radius in pixels: `round(pct · largest extent)`.
pub fn growth_radius(shape: &[usize], pct: f64) -> usize {
    (pct * shape.iter().copied().max().unwrap_or(0) as f64).round() as usize
}

/// Contour pixels within geodesic distance `round(pct · largest extent)` of
/// the region, walking only along the contour (full connectivity).
pub fn grow_region(region: &Mask, contour: &Mask, pct: f64) -> Result<Mask> {
    if !(0.0..=1.0).contains(&pct) {
        return Err(invalid_input(format!(
            "growth fraction {pct} outside [0, 1]"
        )));
    }
    grow_region_by(region, contour, growth_radius(contour.shape(), pct))
}

pub fn grow_region_by(region: &Mask, contour: &Mask, radius: usize) -> Result<Mask> {
    ensure_same_shape(region.shape(), contour.shape(), "region growth")?;
    dims3(region.shape())?;
    if region.iter().zip(contour.iter()).any(|(&r, &c)| r && !c) {
        return Err(invalid_input("region is not a subset of the contour"));
    }
    let lattice = Lattice::new(contour.shape(), Connectivity::Full)?;
    let on: Vec<bool> = contour.iter().copied().collect();
    let mut dist = vec![usize::MAX; on.len()];
    let mut queue = VecDeque::new();
    for (i, &r) in region.iter().enumerate() {
        if r {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        if dist[i] >= radius {
            continue;
        }
        let next = dist[i] + 1;
        lattice.for_each_neighbor(i, |j| {
            if on[j] && dist[j] == usize::MAX {
                dist[j] = next;
                queue.push_back(j);
            }
        });
    }
    Ok(crate::grid::from_flat(
        contour.shape(),
        dist.into_iter().map(|d| d != usize::MAX).collect(),
    ))
}
