//! Grid aliases and index helpers shared by every module.
//!
//! Grids are row-major `ndarray` arrays. In 2D the axes are `[y, x]` (row,
//! column); in 3D they are `[z, y, x]`. The x axis is always the last one.

use ndarray::{ArrayD, Axis, IxDyn};
use num_complex::Complex64;

use crate::error::{invalid_input, Result};

pub type RealGrid = ArrayD<f64>;
pub type ComplexGrid = ArrayD<Complex64>;
pub type Mask = ArrayD<bool>;

/// Pads a rank 1..=3 shape to three extents by prepending ones.
pub(crate) fn dims3(shape: &[usize]) -> Result<[usize; 3]> {
    match *shape {
        [x] => Ok([1, 1, x]),
        [y, x] => Ok([1, y, x]),
        [z, y, x] => Ok([z, y, x]),
        _ => Err(invalid_input(format!(
            "grids must have rank 1, 2 or 3, got rank {}",
            shape.len()
        ))),
    }
}

/// Neighbourhood connectivity on the pixel/voxel lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    /// Face neighbours only (4 in 2D, 6 in 3D).
    Face,
    /// Face, edge and corner neighbours (8 in 2D, 26 in 3D).
    Full,
}

/// Neighbour offsets as `[dz, dy, dx]` for a grid of the given rank.
pub(crate) fn neighbor_offsets(rank: usize, conn: Connectivity) -> Vec<[isize; 3]> {
    let z_range: &[isize] = if rank == 3 { &[-1, 0, 1] } else { &[0] };
    let y_range: &[isize] = if rank >= 2 { &[-1, 0, 1] } else { &[0] };
    let mut out = Vec::new();
    for &dz in z_range {
        for &dy in y_range {
            for dx in -1isize..=1 {
                let steps = dz.abs() + dy.abs() + dx.abs();
                let keep = match conn {
                    Connectivity::Face => steps == 1,
                    Connectivity::Full => steps > 0,
                };
                if keep {
                    out.push([dz, dy, dx]);
                }
            }
        }
    }
    out
}

/// Row-major lattice walker over a rank 1..=3 grid.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub dims: [usize; 3],
    offsets: Vec<[isize; 3]>,
}

impl Lattice {
    pub fn new(shape: &[usize], conn: Connectivity) -> Result<Self> {
        Ok(Self {
            dims: dims3(shape)?,
            offsets: neighbor_offsets(shape.len(), conn),
        })
    }

    pub fn coords(&self, flat: usize) -> [usize; 3] {
        let [_, ny, nx] = self.dims;
        [flat / (ny * nx), (flat / nx) % ny, flat % nx]
    }

    pub fn flat(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    /// Calls `f` with the flat index of every in-bounds neighbour of `flat`.
    pub fn for_each_neighbor(&self, flat: usize, mut f: impl FnMut(usize)) {
        let c = self.coords(flat);
        for off in &self.offsets {
            let mut n = [0usize; 3];
            let mut inside = true;
            for a in 0..3 {
                let v = c[a] as isize + off[a];
                if v < 0 || v >= self.dims[a] as isize {
                    inside = false;
                    break;
                }
                n[a] = v as usize;
            }
            if inside {
                f(self.flat(n));
            }
        }
    }

    /// True if `flat` sits on the outermost layer of the grid along any used axis.
    pub fn on_border(&self, flat: usize, rank: usize) -> bool {
        let c = self.coords(flat);
        (3 - rank..3).any(|a| c[a] == 0 || c[a] + 1 == self.dims[a])
    }
}

pub(crate) fn ensure_same_shape(a: &[usize], b: &[usize], what: &str) -> Result<()> {
    if a != b {
        return Err(invalid_input(format!(
            "{what}: shape mismatch {a:?} vs {b:?}"
        )));
    }
    Ok(())
}

/// Rotates a 2D grid by 90 degrees counter-clockwise (as displayed, row 0 on top).
pub fn rot90<T: Clone>(grid: &ArrayD<T>) -> ArrayD<T> {
    assert_eq!(grid.ndim(), 2, "rot90 expects a 2D grid");
    let mut view = grid.view();
    view.swap_axes(0, 1);
    view.invert_axis(Axis(0));
    view.to_owned()
}

/// Number of set pixels.
pub fn count(mask: &Mask) -> usize {
    mask.iter().filter(|&&b| b).count()
}

/// An all-false mask of the given shape.
pub fn empty_mask(shape: &[usize]) -> Mask {
    ArrayD::from_elem(IxDyn(shape), false)
}

/// Contiguous row-major copy of the grid's values.
pub(crate) fn flat_values<T: Clone>(grid: &ArrayD<T>) -> Vec<T> {
    grid.iter().cloned().collect()
}

pub(crate) fn from_flat<T>(shape: &[usize], data: Vec<T>) -> ArrayD<T> {
    ArrayD::from_shape_vec(IxDyn(shape), data).expect("flat buffer matches shape")
}

/// Surrounds the grid with `pad` elements of `fill` on every side.
pub fn pad<T: Clone>(grid: &ArrayD<T>, pad: usize, fill: T) -> ArrayD<T> {
    let shape: Vec<usize> = grid.shape().iter().map(|&e| e + 2 * pad).collect();
    let mut out = ArrayD::from_elem(IxDyn(&shape), fill);
    out.slice_each_axis_mut(|ax| {
        let e = grid.shape()[ax.axis.index()];
        ndarray::Slice::from(pad..pad + e)
    })
    .assign(grid);
    out
}
