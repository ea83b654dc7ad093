//! Same-size N-D convolution with an FFT path and a direct path.
//!
//! Both paths compute
//! `out(p) = Σ_q image(q) · kernel(p - q + c)` with `c` the kernel centre and
//! zero charge outside the image, so the output always has the image's shape.

use std::ops::{AddAssign, Mul};
use std::sync::Arc;

use ndarray::{ArrayD, IxDyn, Slice};
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{invalid_input, Result};
use crate::grid::{dims3, flat_values, from_flat};
use crate::par;

/// Kernels at most this large on every axis go through the direct path
/// under [`Engine::Auto`].
pub const DIRECT_MAX_EXTENT: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Direct for small kernels, FFT otherwise.
    #[default]
    Auto,
    Fft,
    Direct,
}

impl Engine {
    fn resolve(self, kernel_shape: &[usize]) -> Engine {
        match self {
            Engine::Auto if kernel_shape.iter().all(|&e| e <= DIRECT_MAX_EXTENT) => Engine::Direct,
            Engine::Auto => Engine::Fft,
            other => other,
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Engine::Auto),
            "fft" => Ok(Engine::Fft),
            "direct" => Ok(Engine::Direct),
            other => Err(format!(
                "unknown engine '{other}' (expected auto, fft or direct)"
            )),
        }
    }
}

/// Element types the convolution accepts.
pub trait ConvScalar: Copy + Send + Sync + AddAssign + Mul<Output = Self> + 'static {
    const ZERO: Self;
    fn to_complex(self) -> Complex64;
    fn from_complex(c: Complex64) -> Self;
    fn is_zero(&self) -> bool;
}

impl ConvScalar for f64 {
    const ZERO: Self = 0.0;

    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn from_complex(c: Complex64) -> Self {
        c.re
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl ConvScalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);

    fn to_complex(self) -> Complex64 {
        self
    }

    fn from_complex(c: Complex64) -> Self {
        c
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

pub fn convolve_same<T: ConvScalar>(
    image: &ArrayD<T>,
    kernel: &ArrayD<T>,
    engine: Engine,
) -> Result<ArrayD<T>> {
    if image.ndim() != kernel.ndim() {
        return Err(invalid_input(format!(
            "image rank {} does not match kernel rank {}",
            image.ndim(),
            kernel.ndim()
        )));
    }
    dims3(image.shape())?;
    if let Some(&e) = kernel.shape().iter().find(|&&e| e % 2 == 0) {
        return Err(invalid_input(format!("kernel extent {e} is not odd")));
    }
    Ok(match engine.resolve(kernel.shape()) {
        Engine::Direct => direct(image, kernel),
        _ => fft(image, kernel),
    })
}

fn direct<T: ConvScalar>(image: &ArrayD<T>, kernel: &ArrayD<T>) -> ArrayD<T> {
    let [iz, iy, ix] = dims3(image.shape()).expect("validated");
    let [kz, ky, kx] = dims3(kernel.shape()).expect("validated");
    let (cz, cy, cx) = ((kz / 2) as isize, (ky / 2) as isize, (kx / 2) as isize);
    let img = flat_values(image);
    let ker = flat_values(kernel);
    let row_has_charge: Vec<bool> = img
        .chunks(ix)
        .map(|r| r.iter().any(|v| !v.is_zero()))
        .collect();

    let mut out = vec![T::ZERO; img.len()];
    par::for_each_chunk(&mut out, ix, |row, out_row| {
        let (z, y) = ((row / iy) as isize, (row % iy) as isize);
        for dz in 0..kz {
            let sz = z + cz - dz as isize;
            if sz < 0 || sz >= iz as isize {
                continue;
            }
            for dy in 0..ky {
                let sy = y + cy - dy as isize;
                if sy < 0 || sy >= iy as isize {
                    continue;
                }
                let src_row = sz as usize * iy + sy as usize;
                if !row_has_charge[src_row] {
                    continue;
                }
                let img_row = &img[src_row * ix..(src_row + 1) * ix];
                let ker_row = &ker[(dz * ky + dy) * kx..(dz * ky + dy + 1) * kx];
                for (dx, &kv) in ker_row.iter().enumerate() {
                    // image column = x + shift
                    let shift = cx - dx as isize;
                    let x0 = (-shift).max(0) as usize;
                    let x1 = (ix as isize - shift).min(ix as isize);
                    if x1 <= x0 as isize {
                        continue;
                    }
                    let x1 = x1 as usize;
                    let src =
                        &img_row[(x0 as isize + shift) as usize..(x1 as isize + shift) as usize];
                    for (o, &s) in out_row[x0..x1].iter_mut().zip(src) {
                        *o += kv * s;
                    }
                }
            }
        }
    });
    from_flat(image.shape(), out)
}

/// Smallest `m >= n` whose only prime factors are 2, 3 and 5.
pub fn next_fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

fn fft<T: ConvScalar>(image: &ArrayD<T>, kernel: &ArrayD<T>) -> ArrayD<T> {
    let padded: Vec<usize> = image
        .shape()
        .iter()
        .zip(kernel.shape())
        .map(|(&i, &k)| next_fast_len(i + k - 1))
        .collect();
    let embed = |src: &ArrayD<T>| {
        let mut buf = ArrayD::from_elem(IxDyn(&padded), Complex64::new(0.0, 0.0));
        buf.slice_each_axis_mut(|ax| Slice::from(0..src.shape()[ax.axis.index()]))
            .zip_mut_with(src, |d, s| *d = s.to_complex());
        buf
    };
    let mut planner = FftPlanner::<f64>::new();
    let forward: Vec<_> = padded
        .iter()
        .map(|&len| planner.plan_fft(len, FftDirection::Forward))
        .collect();
    let inverse: Vec<_> = padded
        .iter()
        .map(|&len| planner.plan_fft(len, FftDirection::Inverse))
        .collect();

    let mut a = embed(image);
    let mut b = embed(kernel);
    fft_nd(&mut a, &forward);
    fft_nd(&mut b, &forward);
    a.zip_mut_with(&b, |x, y| *x *= *y);
    drop(b);
    fft_nd(&mut a, &inverse);

    let scale = 1.0 / padded.iter().product::<usize>() as f64;
    let centre: Vec<usize> = kernel.shape().iter().map(|&k| k / 2).collect();
    a.slice_each_axis(|ax| {
        let i = ax.axis.index();
        Slice::from(centre[i]..centre[i] + image.shape()[i])
    })
    .mapv(|c| T::from_complex(c * scale))
}

fn fft_nd(data: &mut ArrayD<Complex64>, plans: &[Arc<dyn Fft<f64>>]) {
    let rank = data.ndim();
    for (axis, plan) in plans.iter().enumerate() {
        if axis == rank - 1 {
            transform_lines(data.as_slice_mut().expect("standard layout"), plan);
            continue;
        }
        let mut perm: Vec<usize> = (0..rank).filter(|&a| a != axis).collect();
        perm.push(axis);
        let mut moved = data
            .view()
            .permuted_axes(perm.clone())
            .as_standard_layout()
            .into_owned();
        transform_lines(moved.as_slice_mut().expect("standard layout"), plan);
        let mut back = vec![0; rank];
        for (i, &p) in perm.iter().enumerate() {
            back[p] = i;
        }
        *data = moved.permuted_axes(back).as_standard_layout().into_owned();
    }
}

fn transform_lines(buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
    let len = plan.len();
    let lines_per_task = (16_384 / len).max(1);
    par::for_each_chunk(buf, len * lines_per_task, |_, chunk| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(chunk, &mut scratch);
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::ArrayD;
    use ndarray::Dimension;

    fn grid(shape: &[usize], f: impl Fn(&[usize]) -> f64) -> ArrayD<f64> {
        ArrayD::from_shape_fn(IxDyn(shape), |i| f(i.slice()))
    }

    #[test]
    fn fast_lengths() {
        assert_eq!(next_fast_len(768), 768);
        assert_eq!(next_fast_len(7), 8);
        assert_eq!(next_fast_len(31), 32);
        assert_eq!(next_fast_len(97), 100);
    }

    #[test]
    fn delta_returns_kernel_crop() {
        let kernel = grid(&[9, 7], |i| (i[0] * 7 + i[1]) as f64 + 1.0);
        let image = grid(&[4, 3], |i| if i == [2, 1] { 1.0 } else { 0.0 });
        for engine in [Engine::Direct, Engine::Fft] {
            let out = convolve_same(&image, &kernel, engine).unwrap();
            for y in 0..4 {
                for x in 0..3 {
                    // out(p) = kernel(p - q + c)
                    let expect = kernel[[y + 4 - 2, x + 3 - 1]];
                    assert!((out[[y, x]] - expect).abs() < 1e-9 * 64.0, "{engine:?}");
                }
            }
        }
    }

    #[test]
    fn zeros_in_zeros_out() {
        let kernel = grid(&[5, 5], |_| 1.0);
        let image = ArrayD::<f64>::zeros(IxDyn(&[6, 6]));
        for engine in [Engine::Direct, Engine::Fft] {
            let out = convolve_same(&image, &kernel, engine).unwrap();
            assert!(out.iter().all(|&v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn rank_mismatch_and_even_kernel() {
        let image = ArrayD::<f64>::zeros(IxDyn(&[4, 4]));
        assert!(convolve_same(&image, &ArrayD::zeros(IxDyn(&[3])), Engine::Fft).is_err());
        assert!(convolve_same(&image, &ArrayD::zeros(IxDyn(&[3, 4])), Engine::Fft).is_err());
    }

    #[test]
    fn paths_agree_2d_3d_and_complex() {
        let image = grid(&[7, 9], |i| {
            ((i[0] * 31 + i[1] * 17) % 11) as f64 / 5.0 - 1.0
        });
        let kernel = grid(&[5, 11], |i| 1.0 / (1.0 + (i[0] + 2 * i[1]) as f64));
        let a = convolve_same(&image, &kernel, Engine::Direct).unwrap();
        let b = convolve_same(&image, &kernel, Engine::Fft).unwrap();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * scale);
        }

        let image3 = grid(&[4, 5, 6], |i| {
            ((i[0] + 2 * i[1] + 3 * i[2]) % 5) as f64 - 2.0
        });
        let kernel3 = grid(&[3, 5, 3], |i| (i[0] * 15 + i[1] * 3 + i[2]) as f64 * 0.1);
        let a = convolve_same(&image3, &kernel3, Engine::Direct).unwrap();
        let b = convolve_same(&image3, &kernel3, Engine::Fft).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }

        let ci = image.mapv(|v| Complex64::new(v, -0.5 * v));
        let ck = kernel.mapv(|v| Complex64::new(0.3 * v, v));
        let a = convolve_same(&ci, &ck, Engine::Direct).unwrap();
        let b = convolve_same(&ci, &ck, Engine::Fft).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10);
        }
    }
}
