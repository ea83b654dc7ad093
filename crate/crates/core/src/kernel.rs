//! Convolution kernels: single-particle potentials, dipole potentials and
//! central-difference stencils.
//!
//! A monopole kernel holds the potential of one unit charge sitting at the
//! centre element. The distance to the centre is clamped to at least one
//! pixel, which pins the centre to the unit-distance value (exactly `1` for
//! `n = 3`).

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{dims3, ComplexGrid, RealGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Monopole,
    DipoleX,
    DipoleY,
    ComplexDipole,
}

/// Shape, dimension exponent and variant of a potential kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    shape: Vec<usize>,
    n: f64,
    kind: KernelKind,
}

impl KernelSpec {
    pub fn new(shape: &[usize], n: f64, kind: KernelKind) -> Result<Self> {
        validate_shape(shape)?;
        if !n.is_finite() || n < 1.0 {
            return Err(Error::InvalidSpec(format!(
                "dimension exponent must be finite and >= 1, got {n}"
            )));
        }
        if kind != KernelKind::Monopole && shape.len() != 2 {
            return Err(Error::InvalidSpec(
                "dipole kernels are only defined in 2D".into(),
            ));
        }
        Ok(Self {
            shape: shape.to_vec(),
            n,
            kind,
        })
    }

    /// The `(2N+1) x (2M+1)` kernel that covers every pixel pair of an
    /// `N x M` image (and likewise per axis in 3D).
    pub fn full_for(image_shape: &[usize], n: f64, kind: KernelKind) -> Result<Self> {
        let shape: Vec<usize> = image_shape.iter().map(|&e| 2 * e + 1).collect();
        Self::new(&shape, n, kind)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    fn with_kind(&self, kind: KernelKind) -> Self {
        Self {
            kind,
            ..self.clone()
        }
    }
}

fn validate_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.len() > 3 {
        return Err(Error::InvalidSpec(format!(
            "kernel rank must be 1..=3, got {}",
            shape.len()
        )));
    }
    if let Some(&e) = shape.iter().find(|&&e| e % 2 == 0) {
        return Err(Error::InvalidSpec(format!(
            "kernel extents must be odd, got {e} in {shape:?}"
        )));
    }
    Ok(())
}

/// A kernel grid together with the spec it was built from.
#[derive(Debug, Clone)]
pub struct PotentialKernel<T = f64> {
    values: ArrayD<T>,
    spec: KernelSpec,
}

impl<T> PotentialKernel<T> {
    pub fn values(&self) -> &ArrayD<T> {
        &self.values
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn into_values(self) -> ArrayD<T> {
        self.values
    }

    /// Index of the centre element.
    pub fn center(&self) -> Vec<usize> {
        self.spec.shape.iter().map(|&e| e / 2).collect()
    }
}

/// Euclidean distance of every element to the centre of an odd-extent grid.
pub fn distance_grid(shape: &[usize]) -> Result<RealGrid> {
    validate_shape(shape)?;
    let centre: Vec<f64> = shape.iter().map(|&e| (e / 2) as f64).collect();
    Ok(ArrayD::from_shape_fn(IxDyn(shape), |idx| {
        (0..shape.len())
            .map(|a| {
                let d = idx[a] as f64 - centre[a];
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }))
}

/// Potential of a unit charge at distance `r` for dimension exponent `n`.
///
/// `r` is clamped to at least one pixel. For `n > 2` the profile is
/// `r^(2-n)`, for `n = 2` it is `-ln r`, and for `1 <= n < 2` it is
/// `-r^(2-n)`, so the potential always decreases away from the charge.
pub fn potential_profile(r: f64, n: f64) -> f64 {
    let r = r.max(1.0);
    if n == 2.0 {
        -r.ln()
    } else if n > 2.0 {
        r.powf(2.0 - n)
    } else {
        -r.powf(2.0 - n)
    }
}

pub fn monopole_kernel(spec: &KernelSpec) -> Result<PotentialKernel> {
    if spec.kind != KernelKind::Monopole {
        return Err(Error::InvalidSpec(format!(
            "expected a monopole spec, got {:?}",
            spec.kind
        )));
    }
    let n = spec.n;
    let values = distance_grid(&spec.shape)?.mapv_into(|r| potential_profile(r, n));
    Ok(PotentialKernel {
        values,
        spec: spec.clone(),
    })
}

/// Dipole kernels derived from a 2D monopole kernel.
///
/// `dipole_x(k) = P(k + x̂) - P(k - x̂)`, i.e. the monopole filtered with the
/// row `[-1, 0, 1]`, and `dipole_y(k) = -(P(k + ŷ) - P(k - ŷ))`. Samples that
/// fall outside the kernel count as zero so both keep the monopole's size.
/// For square kernels `dipole_y` is exactly `-dipole_xᵀ`.
pub fn dipole_kernels(mono: &PotentialKernel) -> Result<(PotentialKernel, PotentialKernel)> {
    if mono.spec.kind != KernelKind::Monopole {
        return Err(Error::InvalidSpec(
            "dipole kernels need a monopole kernel".into(),
        ));
    }
    if mono.values.ndim() != 2 {
        return Err(Error::InvalidSpec(
            "dipole kernels are only defined in 2D".into(),
        ));
    }
    let p = &mono.values;
    let (ny, nx) = (p.shape()[0], p.shape()[1]);
    let at = |y: isize, x: isize| -> f64 {
        if y < 0 || x < 0 || y >= ny as isize || x >= nx as isize {
            0.0
        } else {
            p[[y as usize, x as usize]]
        }
    };
    let dx = ArrayD::from_shape_fn(IxDyn(&[ny, nx]), |i| {
        let (y, x) = (i[0] as isize, i[1] as isize);
        at(y, x + 1) - at(y, x - 1)
    });
    let dy = ArrayD::from_shape_fn(IxDyn(&[ny, nx]), |i| {
        let (y, x) = (i[0] as isize, i[1] as isize);
        at(y - 1, x) - at(y + 1, x)
    });
    Ok((
        PotentialKernel {
            values: dx,
            spec: mono.spec.with_kind(KernelKind::DipoleX),
        },
        PotentialKernel {
            values: dy,
            spec: mono.spec.with_kind(KernelKind::DipoleY),
        },
    ))
}

/// `K = kx + i·ky`.
pub fn complex_dipole_kernel(
    kx: &PotentialKernel,
    ky: &PotentialKernel,
) -> Result<PotentialKernel<Complex64>> {
    if kx.values.shape() != ky.values.shape() {
        return Err(Error::InvalidSpec(format!(
            "dipole kernel shapes differ: {:?} vs {:?}",
            kx.values.shape(),
            ky.values.shape()
        )));
    }
    let mut values: ComplexGrid = ArrayD::zeros(kx.values.raw_dim());
    ndarray::Zip::from(&mut values)
        .and(&kx.values)
        .and(&ky.values)
        .for_each(|v, &re, &im| *v = Complex64::new(re, im));
    Ok(PotentialKernel {
        values,
        spec: kx.spec.with_kind(KernelKind::ComplexDipole),
    })
}

/// Builds the kernel described by `spec`, whatever its kind. Complex kernels
/// are returned as their real and imaginary parts.
pub fn build_kernel(spec: &KernelSpec) -> Result<Vec<PotentialKernel>> {
    let mono = monopole_kernel(&spec.with_kind(KernelKind::Monopole))?;
    Ok(match spec.kind {
        KernelKind::Monopole => vec![mono],
        KernelKind::DipoleX => vec![dipole_kernels(&mono)?.0],
        KernelKind::DipoleY => vec![dipole_kernels(&mono)?.1],
        KernelKind::ComplexDipole => {
            let (kx, ky) = dipole_kernels(&mono)?;
            vec![kx, ky]
        }
    })
}

/// Second-order central difference stencils `½[-1, 0, 1]`, one per axis,
/// ordered x, y, z. Each is shaped to broadcast along its own axis of a grid
/// of rank `rank`. They are applied as correlations, so `Δx` maps the ramp
/// `f(x) = x` to `1`.
pub fn derivative_kernels(rank: usize) -> Result<Vec<RealGrid>> {
    dims3(&vec![1; rank])?;
    Ok((0..rank)
        .map(|k| {
            let axis = rank - 1 - k;
            let mut shape = vec![1; rank];
            shape[axis] = 3;
            ArrayD::from_shape_vec(IxDyn(&shape), vec![-0.5, 0.0, 0.5]).expect("three coefficients")
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, SQRT_2};

    fn mono(shape: &[usize], n: f64) -> PotentialKernel {
        monopole_kernel(&KernelSpec::new(shape, n, KernelKind::Monopole).unwrap()).unwrap()
    }

    #[test]
    fn distance_grid_3x3() {
        let d = distance_grid(&[3, 3]).unwrap();
        let expect = [SQRT_2, 1.0, SQRT_2, 1.0, 0.0, 1.0, SQRT_2, 1.0, SQRT_2];
        for (a, b) in d.iter().zip(expect) {
            assert_eq!(*a, b);
        }
    }

    #[test]
    fn distance_grid_7x7_and_3d_corner() {
        let d = distance_grid(&[7, 7]).unwrap();
        assert_eq!(d[[3, 4]], 1.0);
        assert_eq!(d[[3, 5]], 2.0);
        let d3 = distance_grid(&[3, 3, 3]).unwrap();
        assert_eq!(d3[[0, 0, 0]], 3f64.sqrt());
    }

    #[test]
    fn even_extent_is_rejected() {
        assert!(matches!(distance_grid(&[4, 3]), Err(Error::InvalidSpec(_))));
        assert!(KernelSpec::new(&[3, 6], 3.0, KernelKind::Monopole).is_err());
    }

    #[test]
    fn exponent_below_one_is_rejected() {
        assert!(matches!(
            KernelSpec::new(&[3, 3], 0.5, KernelKind::Monopole),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn monopole_values() {
        let k = mono(&[7, 7], 3.0);
        assert_eq!(k.values()[[3, 3]], 1.0);
        assert_eq!(k.values()[[3, 5]], 0.5);
        let k4 = mono(&[7, 7], 4.0);
        assert_eq!(k4.values()[[1, 3]], 0.25);
        assert_eq!(potential_profile(1.0, 2.0), 0.0);
        assert_abs_diff_eq!(potential_profile(E, 2.0), -1.0, epsilon = 1e-15);
        assert_eq!(mono(&[5, 5], 2.0).values()[[2, 2]], 0.0);
    }

    #[test]
    fn dipole_hand_expanded_value() {
        let (dx, dy) = dipole_kernels(&mono(&[7, 7], 3.0)).unwrap();
        // offset (dx, dy) = (2, 0): mono at 3 minus mono at 1
        assert_abs_diff_eq!(dx.values()[[3, 5]], 1.0 / 3.0 - 1.0, epsilon = 1e-15);
        assert_eq!(dy.values()[[5, 3]], -dx.values()[[3, 5]]);
        for y in 0..7 {
            assert_eq!(dx.values()[[y, 3]], 0.0);
        }
    }

    #[test]
    fn dipole_y_is_negated_transpose() {
        for n in [2.0, 2.3, 3.0, 4.0] {
            let (dx, dy) = dipole_kernels(&mono(&[9, 9], n)).unwrap();
            let t = dx.values().t().mapv(|v| -v);
            assert_eq!(dy.values(), &t);
        }
    }

    #[test]
    fn complex_kernel_parts_and_symmetry() {
        let (kx, ky) = dipole_kernels(&mono(&[7, 7], 3.0)).unwrap();
        let k = complex_dipole_kernel(&kx, &ky).unwrap();
        assert_eq!(k.values()[[3, 3]], Complex64::new(0.0, 0.0));
        for y in 0..7 {
            for x in 0..7 {
                let v = k.values()[[y, x]];
                assert_eq!(v.re, kx.values()[[y, x]]);
                assert_eq!(v.im, ky.values()[[y, x]]);
                // real part odd in x and even in y, imaginary part the reverse
                assert_eq!(k.values()[[6 - y, x]].conj(), v);
                assert_eq!(-k.values()[[y, 6 - x]], v.conj());
            }
        }
        let small = dipole_kernels(&mono(&[5, 5], 3.0)).unwrap().1;
        assert!(complex_dipole_kernel(&kx, &small).is_err());
    }

    #[test]
    fn derivative_stencils() {
        let d = derivative_kernels(2).unwrap();
        assert_eq!(d[0].shape(), &[1, 3]);
        assert_eq!(d[1].shape(), &[3, 1]);
        assert_eq!(
            d[0].iter().copied().collect::<Vec<_>>(),
            vec![-0.5, 0.0, 0.5]
        );
        assert_eq!(
            d[1].iter().copied().collect::<Vec<_>>(),
            vec![-0.5, 0.0, 0.5]
        );
        let d3 = derivative_kernels(3).unwrap();
        assert_eq!(d3[2].shape(), &[3, 1, 1]);
    }

    #[test]
    fn three_d_center_plane_matches_2d() {
        for n in [2.0, 3.0, 4.0] {
            let k3 = mono(&[7, 7, 7], n);
            let k2 = mono(&[7, 7], n);
            let plane = k3.values().index_axis(ndarray::Axis(0), 3);
            assert_eq!(plane, k2.values().view());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn monopole_strictly_decreasing(n in 1.0f64..6.0, r in 1.0f64..500.0, dr in 0.01f64..10.0) {
                prop_assert!(potential_profile(r + dr, n) < potential_profile(r, n));
            }

            #[test]
            fn monopole_symmetric(n in 1.0f64..5.0, h in 1usize..6, w in 1usize..6) {
                let k = mono(&[2 * h + 1, 2 * w + 1], n);
                let v = k.values();
                let mut flipped = v.clone();
                flipped.invert_axis(ndarray::Axis(0));
                prop_assert_eq!(&flipped, v);
                let mut flipped = v.clone();
                flipped.invert_axis(ndarray::Axis(1));
                prop_assert_eq!(&flipped, v);
                if h == w {
                    prop_assert_eq!(&v.t().to_owned(), v);
                }
            }
        }
    }
}
