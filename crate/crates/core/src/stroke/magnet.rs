use super::{OrientationMap, StrokeSet};
use crate::error::{invalid_input, Result};
use crate::field::{magnetic_potential, ChargeImage, FieldMap, FieldOptions, MagneticResult};
use crate::grid::{ensure_same_shape, RealGrid};
use crate::par;

/// Dimension exponent for stroke magnetization. At `n = 2` the potential
/// of a stroke does not depend on its pixel resolution and closed strokes
/// give piecewise-constant potentials.
pub const STROKE_DIMENSION: f64 = 2.0;

/// Up to this many substrokes every flip assignment is evaluated.
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizeOptions {
    pub n: f64,
    pub field: FieldOptions,
}

impl Default for MagnetizeOptions {
    fn default() -> Self {
        Self {
            n: STROKE_DIMENSION,
            field: FieldOptions::default(),
        }
    }
}

/// Magnetizes every stroke pixel with a dipole normal to its tangent.
/// `flips[k]` turns substroke `k + 1` around (equivalent to adding π to its
/// angles).
pub fn magnetize_stroke(
    strokes: &StrokeSet,
    orient: &OrientationMap,
    flips: &[bool],
    opts: &MagnetizeOptions,
) -> Result<MagneticResult> {
    if flips.len() != strokes.count() {
        return Err(invalid_input(format!(
            "{} flips given for {} substrokes",
            flips.len(),
            strokes.count()
        )));
    }
    ensure_same_shape(strokes.shape(), orient.theta.shape(), "orientation map")?;
    // turning a stroke around is the same as reversing its charge, and
    // negating the charge keeps the sign flip exact
    let charges = ndarray::Zip::from(&strokes.labels).map_collect(|&l| match l {
        0 => 0.0,
        l if flips[l as usize - 1] => -1.0,
        _ => 1.0,
    });
    let img = ChargeImage::new(charges)?;
    magnetic_potential(&img, orient, opts.n, &opts.field)
}

/// Flip assignment maximizing `‖V_perp‖₂` over the image, with the first
/// substroke pinned unflipped.
///
/// The potential is linear in the per-substroke signs, so each substroke is
/// magnetized once and assignments are scored through the Gram matrix of
/// the single-substroke potentials. Ties keep the earliest assignment in
/// enumeration order.
pub fn resolve_repulsion(
    strokes: &StrokeSet,
    orient: &OrientationMap,
    opts: &MagnetizeOptions,
) -> Result<Vec<bool>> {
    Ok(best_assignment(&single_stroke_gram(strokes, orient, opts)?))
}

/// The opposite choice: the flip assignment minimizing `‖V_perp‖₂`, so
/// neighbouring strokes attract. First substroke pinned as for repulsion.
pub fn resolve_attraction(
    strokes: &StrokeSet,
    orient: &OrientationMap,
    opts: &MagnetizeOptions,
) -> Result<Vec<bool>> {
    let gram = single_stroke_gram(strokes, orient, opts)?;
    let negated: Vec<Vec<f64>> = gram
        .iter()
        .map(|row| row.iter().map(|g| -g).collect())
        .collect();
    Ok(best_assignment(&negated))
}

fn single_stroke_gram(
    strokes: &StrokeSet,
    orient: &OrientationMap,
    opts: &MagnetizeOptions,
) -> Result<Vec<Vec<f64>>> {
    let k = strokes.count();
    let singles: Vec<RealGrid> = (1..=k as u32)
        .map(|id| {
            let only = StrokeSet::from_mask(strokes.substroke_mask(id))?;
            magnetize_stroke(&only, orient, &vec![false; only.count()], opts)
                .map(|m| m.perpendicular)
        })
        .collect::<Result<_>>()?;
    let gram: Vec<Vec<f64>> = par::map_range(k, |i| {
        (0..k)
            .map(|j| {
                singles[i]
                    .iter()
                    .zip(singles[j].iter())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    });
    Ok(gram)
}

fn score(gram: &[Vec<f64>], signs: &[f64]) -> f64 {
    gram.iter()
        .zip(signs)
        .map(|(row, si)| si * row.iter().zip(signs).map(|(g, sj)| g * sj).sum::<f64>())
        .sum()
}

fn signs_of(bits: u64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|j| {
            if j > 0 && bits >> (j - 1) & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .collect()
}

fn best_assignment(gram: &[Vec<f64>]) -> Vec<bool> {
    let k = gram.len();
    if k <= 1 {
        return vec![false; k];
    }
    let signs = if k <= EXHAUSTIVE_LIMIT {
        let total = 1usize << (k - 1);
        let scores = par::map_range(total, |b| score(gram, &signs_of(b as u64, k)));
        let best = scores
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (b, &s)| if s > acc.1 { (b, s) } else { acc },
            )
            .0;
        signs_of(best as u64, k)
    } else {
        let mut signs = vec![1.0; k];
        let mut current = score(gram, &signs);
        loop {
            let mut improved = false;
            for j in 1..k {
                signs[j] = -signs[j];
                let s = score(gram, &signs);
                // ignore round-off gains from moves that only shift a sign boundary
                if s > current + 1e-12 * current.abs().max(1.0) {
                    current = s;
                    improved = true;
                } else {
                    signs[j] = -signs[j];
                }
            }
            if !improved {
                break;
            }
        }
        signs
    };
    signs.iter().map(|&s| s < 0.0).collect()
}

/// `|V_perp|²` of the strokes magnetized with their repulsion assignment.
pub fn stroke_signature(
    strokes: &StrokeSet,
    orient: &OrientationMap,
    opts: &MagnetizeOptions,
) -> Result<RealGrid> {
    let flips = resolve_repulsion(strokes, orient, opts)?;
    let m = magnetize_stroke(strokes, orient, &flips, opts)?;
    Ok(m.perpendicular.mapv_into(|v| v * v))
}

/// Field of a magnetized stroke, from its perpendicular potential.
pub fn stroke_field(result: &MagneticResult) -> Result<FieldMap> {
    crate::field::field_from_potential(result.perpendicular.clone())
}
