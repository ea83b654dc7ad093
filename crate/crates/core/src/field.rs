//! Electric potentials and fields of charge images, and the magnetic
//! (dipole) potential of oriented strokes.

use ndarray::{ArrayD, Axis, Dimension, Zip};
use num_complex::Complex64;

use crate::convolve::{convolve_same, Engine};
use crate::error::{invalid_input, Result};
use crate::grid::{dims3, ensure_same_shape, ComplexGrid, Connectivity, Lattice, Mask, RealGrid};
use crate::kernel::{
    complex_dipole_kernel, derivative_kernels, dipole_kernels, monopole_kernel, KernelKind,
    KernelSpec,
};
use crate::stroke::OrientationMap;

/// Charge density per pixel (or voxel), each value in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeImage {
    values: RealGrid,
}

impl ChargeImage {
    pub fn new(values: RealGrid) -> Result<Self> {
        dims3(values.shape())?;
        if let Some(v) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(invalid_input(format!("charge density {v} outside [-1, 1]")));
        }
        Ok(Self { values })
    }

    /// Unit positive charge on every set pixel.
    pub fn from_mask(mask: &Mask) -> Self {
        Self {
            values: mask.mapv(|b| if b { 1.0 } else { 0.0 }),
        }
    }

    pub fn values(&self) -> &RealGrid {
        &self.values
    }

    pub fn shape(&self) -> &[usize] {
        self.values.shape()
    }

    pub fn into_values(self) -> RealGrid {
        self.values
    }
}

/// Kernel extent used when applying potentials to an image.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum KernelSize {
    /// `2·extent + 1` per axis: every pixel sees every other pixel.
    #[default]
    Full,
    /// Explicit odd extents. Smaller than full truncates long-range
    /// contributions.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldOptions {
    pub engine: Engine,
    pub kernel_size: KernelSize,
}

impl FieldOptions {
    pub fn with_engine(engine: Engine) -> Self {
        Self {
            engine,
            ..Self::default()
        }
    }

    pub fn kernel_spec(
        &self,
        image_shape: &[usize],
        n: f64,
        kind: KernelKind,
    ) -> Result<KernelSpec> {
        match &self.kernel_size {
            KernelSize::Full => KernelSpec::full_for(image_shape, n, kind),
            KernelSize::Explicit(shape) => {
                if shape.len() != image_shape.len() {
                    return Err(invalid_input(format!(
                        "kernel rank {} does not match image rank {}",
                        shape.len(),
                        image_shape.len()
                    )));
                }
                KernelSpec::new(shape, n, kind)
            }
        }
    }
}

/// `V = I * P_e`, same size as the image.
pub fn electric_potential(img: &ChargeImage, n: f64, opts: &FieldOptions) -> Result<RealGrid> {
    let spec = opts.kernel_spec(img.shape(), n, KernelKind::Monopole)?;
    let kernel = monopole_kernel(&spec)?;
    convolve_same(img.values(), kernel.values(), opts.engine)
}

/// Potential with its field `E = -∇V`.
#[derive(Debug, Clone)]
pub struct FieldMap {
    pub potential: RealGrid,
    /// One grid per axis, ordered x, y(, z).
    pub components: Vec<RealGrid>,
    pub magnitude: RealGrid,
    /// `atan2(Ey, Ex)` in radians; 2D only.
    pub angle: Option<RealGrid>,
}

/// Central-difference gradient, ordered x, y(, z), with zero outside the grid.
pub fn gradient(v: &RealGrid) -> Result<Vec<RealGrid>> {
    derivative_kernels(v.ndim())?
        .into_iter()
        .map(|mut stencil| {
            // correlation == convolution with the mirrored stencil
            for a in 0..stencil.ndim() {
                stencil.invert_axis(Axis(a));
            }
            convolve_same(
                v,
                &stencil.as_standard_layout().into_owned(),
                Engine::Direct,
            )
        })
        .collect()
}

pub fn field_from_potential(potential: RealGrid) -> Result<FieldMap> {
    let components: Vec<RealGrid> = gradient(&potential)?
        .into_iter()
        .map(|g| g.mapv_into(|d| -d))
        .collect();
    let mut magnitude = ArrayD::zeros(potential.raw_dim());
    for c in &components {
        magnitude.zip_mut_with(c, |m, &e| *m += e * e);
    }
    magnitude.mapv_inplace(f64::sqrt);
    let angle = (potential.ndim() == 2).then(|| {
        let mut a = ArrayD::zeros(potential.raw_dim());
        Zip::from(&mut a)
            .and(&components[0])
            .and(&components[1])
            .for_each(|a, &ex, &ey| *a = ey.atan2(ex));
        a
    });
    Ok(FieldMap {
        potential,
        components,
        magnitude,
        angle,
    })
}

pub fn electric_field(img: &ChargeImage, n: f64, opts: &FieldOptions) -> Result<FieldMap> {
    field_from_potential(electric_potential(img, n, opts)?)
}

/// Pixel-density correction for a dipole line running at angle `theta`:
/// `1 / max(|cos θ|, |sin θ|)`, between 1 and √2.
pub fn density_factor(theta: f64) -> f64 {
    1.0 / theta.cos().abs().max(theta.sin().abs())
}

/// Potentials of per-pixel dipoles oriented against a stroke direction θ.
#[derive(Debug, Clone)]
pub struct MagneticResult {
    /// Dipoles normal to θ. The positive pole sits on the `(-sin θ, cos θ)`
    /// side, so a left-to-right horizontal stroke is positive on its +y
    /// (larger row) side.
    pub perpendicular: RealGrid,
    /// Dipoles along θ.
    pub parallel: RealGrid,
}

/// `I · F(θ) · e^{iθ}` on charged pixels, zero elsewhere.
pub fn magnetic_charge_map(img: &ChargeImage, orient: &OrientationMap) -> Result<ComplexGrid> {
    ensure_same_shape(img.shape(), orient.theta.shape(), "orientation map")?;
    if img.values().ndim() != 2 {
        return Err(invalid_input("magnetic potentials are 2D only"));
    }
    let mut out = ArrayD::from_elem(img.values().raw_dim(), Complex64::new(0.0, 0.0));
    let cells = out
        .indexed_iter_mut()
        .zip(img.values().iter())
        .zip(orient.theta.iter().zip(orient.valid.iter()));
    for (((idx, c), &q), (&theta, &valid)) in cells {
        if q == 0.0 {
            continue;
        }
        if !valid || !theta.is_finite() {
            return Err(invalid_input(format!(
                "charged pixel {:?} has no orientation",
                idx.slice()
            )));
        }
        *c = Complex64::from_polar(q * density_factor(theta), theta);
    }
    Ok(out)
}

/// Complex dipole convolution `W = (I·F·e^{iθ}) * (P_dip^x + i·P_dip^y)`.
///
/// With θ the stroke tangent, `Re W` is the potential of dipoles along θ and
/// `Im W` that of dipoles normal to it.
pub fn magnetic_potential(
    img: &ChargeImage,
    orient: &OrientationMap,
    n: f64,
    opts: &FieldOptions,
) -> Result<MagneticResult> {
    let charges = magnetic_charge_map(img, orient)?;
    let spec = opts.kernel_spec(img.shape(), n, KernelKind::Monopole)?;
    let (kx, ky) = dipole_kernels(&monopole_kernel(&spec)?)?;
    let kernel = complex_dipole_kernel(&kx, &ky)?;
    let w = convolve_same(&charges, kernel.values(), opts.engine)?;
    Ok(MagneticResult {
        perpendicular: w.mapv(|c| c.im),
        parallel: w.mapv(|c| c.re),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussReport {
    /// Outward flux of `E = -∇V` through the region's boundary faces.
    pub flux: f64,
    /// Largest `|E|` over pixels whose whole neighbourhood lies in the region.
    pub interior_field_max: f64,
}

/// Discrete Gauss check over a closed region.
///
/// Each boundary face between a region pixel `a` and an outside neighbour
/// `b` contributes `V(a) - V(b)`, so the flux of the region equals the sum
/// of the discrete divergence inside it.
pub fn check_gauss_closure(potential: &RealGrid, region: &Mask) -> Result<GaussReport> {
    ensure_same_shape(potential.shape(), region.shape(), "gauss region")?;
    let rank = potential.ndim();
    let faces = Lattice::new(potential.shape(), Connectivity::Face)?;
    let full = Lattice::new(potential.shape(), Connectivity::Full)?;
    let v: Vec<f64> = potential.iter().copied().collect();
    let r: Vec<bool> = region.iter().copied().collect();
    if !r.iter().any(|&b| b) {
        return Err(invalid_input("gauss region is empty"));
    }
    let magnitude: Vec<f64> = field_from_potential(potential.clone())?
        .magnitude
        .iter()
        .copied()
        .collect();

    let mut flux = 0.0;
    let mut interior_field_max = 0.0f64;
    for (i, _) in r.iter().enumerate().filter(|(_, &b)| b) {
        if faces.on_border(i, rank) {
            return Err(invalid_input("gauss region touches the grid border"));
        }
        faces.for_each_neighbor(i, |j| {
            if !r[j] {
                flux += v[i] - v[j];
            }
        });
        let mut interior = true;
        full.for_each_neighbor(i, |j| interior &= r[j]);
        if interior {
            interior_field_max = interior_field_max.max(magnitude[i]);
        }
    }
    Ok(GaussReport {
        flux,
        interior_field_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::IxDyn;
    use std::f64::consts::PI;

    fn point_image(h: usize, w: usize, y: usize, x: usize) -> ChargeImage {
        let mut v = ArrayD::zeros(IxDyn(&[h, w]));
        v[[y, x]] = 1.0;
        ChargeImage::new(v).unwrap()
    }

    #[test]
    fn charge_range_is_enforced() {
        assert!(ChargeImage::new(ArrayD::from_elem(IxDyn(&[3, 3]), 1.5)).is_err());
        assert!(ChargeImage::new(ArrayD::from_elem(IxDyn(&[3, 3]), f64::NAN)).is_err());
    }

    #[test]
    fn constant_potential_has_no_interior_field() {
        let f = field_from_potential(ArrayD::from_elem(IxDyn(&[6, 7]), 3.0)).unwrap();
        for y in 1..5 {
            for x in 1..6 {
                assert_eq!(f.magnitude[[y, x]], 0.0);
            }
        }
    }

    #[test]
    fn field_points_away_from_a_positive_charge() {
        let f =
            electric_field(&point_image(21, 21, 10, 10), 3.0, &FieldOptions::default()).unwrap();
        let angle = f.angle.unwrap();
        assert_abs_diff_eq!(angle[[10, 15]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(angle[[15, 10]], PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(angle[[10, 5]].abs(), PI, epsilon = 1e-12);
        assert!(f.components[0][[10, 15]] > 0.0);
        assert!(f.magnitude[[10, 12]] > f.magnitude[[10, 16]]);
    }

    #[test]
    fn gradient_of_a_ramp() {
        let v = ArrayD::from_shape_fn(IxDyn(&[5, 6]), |i| 2.0 * i[1] as f64 - 0.5 * i[0] as f64);
        let g = gradient(&v).unwrap();
        assert_abs_diff_eq!(g[0][[2, 3]], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1][[2, 3]], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn density_factor_values() {
        assert_abs_diff_eq!(density_factor(0.0), 1.0);
        assert_abs_diff_eq!(density_factor(PI / 4.0), 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(density_factor(PI / 3.0), 2.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(density_factor(PI / 2.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn turning_the_stroke_around_negates_both_potentials() {
        let mut v = ArrayD::zeros(IxDyn(&[16, 16]));
        for x in 4..12 {
            v[[8, x]] = 1.0;
        }
        let img = ChargeImage::new(v.clone()).unwrap();
        let mask = v.mapv(|q| q != 0.0);
        let fwd = OrientationMap::uniform(&mask, 0.3);
        let back = OrientationMap::uniform(&mask, 0.3 + PI);
        let a = magnetic_potential(&img, &fwd, 2.0, &FieldOptions::default()).unwrap();
        let b = magnetic_potential(&img, &back, 2.0, &FieldOptions::default()).unwrap();
        for (x, y) in a.perpendicular.iter().zip(b.perpendicular.iter()) {
            assert_abs_diff_eq!(*x, -*y, epsilon = 1e-10);
        }
        for (x, y) in a.parallel.iter().zip(b.parallel.iter()) {
            assert_abs_diff_eq!(*x, -*y, epsilon = 1e-10);
        }
    }

    #[test]
    fn missing_orientation_is_an_error() {
        let img = point_image(8, 8, 4, 4);
        let orient = OrientationMap::uniform(&crate::grid::empty_mask(&[8, 8]), 0.0);
        assert!(magnetic_potential(&img, &orient, 2.0, &FieldOptions::default()).is_err());
    }

    #[test]
    fn empty_image_has_zero_potential() {
        let img = ChargeImage::new(ArrayD::zeros(IxDyn(&[9, 9]))).unwrap();
        let v = electric_potential(&img, 3.0, &FieldOptions::default()).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gauss_flux_of_a_single_charge_at_n2() {
        let img = point_image(41, 41, 20, 20);
        let v = electric_potential(&img, 2.0, &FieldOptions::default()).unwrap();
        let region = ArrayD::from_shape_fn(IxDyn(&[41, 41]), |i| {
            (5..36).contains(&i[0]) && (5..36).contains(&i[1])
        });
        let report = check_gauss_closure(&v, &region).unwrap();
        assert!((report.flux - 2.0 * PI).abs() < 0.1, "{}", report.flux);
    }

    #[test]
    fn gauss_region_must_be_closed() {
        let v = ArrayD::zeros(IxDyn(&[6, 6]));
        let touching = ArrayD::from_shape_fn(IxDyn(&[6, 6]), |i| i[0] < 3);
        assert!(check_gauss_closure(&v, &touching).is_err());
        assert!(check_gauss_closure(&v, &crate::grid::empty_mask(&[6, 6])).is_err());
        let inside = ArrayD::from_shape_fn(IxDyn(&[6, 6]), |i| {
            (1..5).contains(&i[0]) && (1..5).contains(&i[1])
        });
        let r = check_gauss_closure(&v, &inside).unwrap();
        assert_eq!(r.flux, 0.0);
    }
}
