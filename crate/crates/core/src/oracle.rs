//! Direct-summation reference potentials.
//!
//! Every value is a plain sum over point charges of the clamped
//! single-particle profile. These routines are slow (quadratic in the
//! number of pixels) and are capped at [`ORACLE_BUDGET`] grid points; they
//! exist to check the convolution engines and to pin sign conventions.

use ndarray::{ArrayD, IxDyn};

use crate::error::{Error, Result};
use crate::grid::{dims3, RealGrid};
use crate::kernel::potential_profile;

/// Largest grid (in points) the oracle agrees to evaluate: 64² in 2D, 16³ in 3D.
pub const ORACLE_BUDGET: usize = 64 * 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCharge {
    /// `[z, y, x]`-style coordinates matching the grid's axes.
    pub position: [i64; 3],
    pub charge: f64,
}

impl PointCharge {
    pub fn new_2d(y: i64, x: i64, charge: f64) -> Self {
        Self {
            position: [0, y, x],
            charge,
        }
    }
}

/// Point charges for every nonzero element of a 1..=3-D grid.
pub fn charges_from_grid(grid: &RealGrid) -> Result<Vec<PointCharge>> {
    let [_, ny, nx] = dims3(grid.shape())?;
    Ok(grid
        .iter()
        .enumerate()
        .filter(|(_, &q)| q != 0.0)
        .map(|(i, &q)| PointCharge {
            position: [
                (i / (ny * nx)) as i64,
                ((i / nx) % ny) as i64,
                (i % nx) as i64,
            ],
            charge: q,
        })
        .collect())
}

fn check_budget(shape: &[usize]) -> Result<[usize; 3]> {
    let dims = dims3(shape)?;
    let total: usize = dims.iter().product();
    if total > ORACLE_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "oracle grid {shape:?} has {total} points, budget is {ORACLE_BUDGET}"
        )));
    }
    Ok(dims)
}

/// Sums terms smallest magnitude first, so the result does not depend on
/// the order the charges were given in.
fn sorted_sum(terms: &mut [f64]) -> f64 {
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    terms.iter().sum()
}

fn potential_at(p: [f64; 3], charges: &[([f64; 3], f64)], n: f64, terms: &mut Vec<f64>) -> f64 {
    terms.clear();
    terms.extend(charges.iter().map(|(c, q)| {
        let r = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt();
        q * potential_profile(r, n)
    }));
    sorted_sum(terms)
}

fn evaluate(shape: &[usize], charges: &[([f64; 3], f64)], n: f64) -> Result<RealGrid> {
    let dims = check_budget(shape)?;
    let mut terms = Vec::with_capacity(charges.len());
    let mut values = Vec::with_capacity(dims.iter().product());
    for z in 0..dims[0] {
        for y in 0..dims[1] {
            for x in 0..dims[2] {
                values.push(potential_at(
                    [z as f64, y as f64, x as f64],
                    charges,
                    n,
                    &mut terms,
                ));
            }
        }
    }
    Ok(ArrayD::from_shape_vec(IxDyn(shape), values).expect("shape"))
}

/// `V(p) = Σ q_i · f(max(|p - p_i|, 1))`.
pub fn brute_force_potential(charges: &[PointCharge], shape: &[usize], n: f64) -> Result<RealGrid> {
    let pts: Vec<([f64; 3], f64)> = charges
        .iter()
        .map(|c| (c.position.map(|v| v as f64), c.charge))
        .collect();
    evaluate(shape, &pts, n)
}

/// A 2D dipole at a pixel. `theta` is the direction it runs along; the
/// moment points across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dipole {
    pub y: i64,
    pub x: i64,
    pub theta: f64,
    pub strength: f64,
}

/// Potential of dipoles realised as two opposite monopoles.
///
/// Each dipole puts `+strength` at `p + d` and `-strength` at `p - d`,
/// where `d = round((-sin θ, cos θ))` in `(x, y)` pixel steps. The poles may
/// fall outside the grid.
pub fn brute_force_dipole_potential(
    dipoles: &[Dipole],
    shape: &[usize],
    n: f64,
) -> Result<RealGrid> {
    if shape.len() != 2 {
        return Err(Error::InvalidInput("dipole oracle is 2D only".into()));
    }
    let mut pts = Vec::with_capacity(2 * dipoles.len());
    for d in dipoles {
        let (sx, sy) = ((-d.theta.sin()).round(), d.theta.cos().round());
        let (y, x) = (d.y as f64, d.x as f64);
        pts.push(([0.0, y + sy, x + sx], d.strength));
        pts.push(([0.0, y - sy, x - sx], -d.strength));
    }
    evaluate(shape, &pts, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and_pair() {
        let v = brute_force_potential(&[PointCharge::new_2d(5, 5, 1.0)], &[11, 11], 3.0).unwrap();
        assert_eq!(v[[5, 7]], 0.5);
        assert_eq!(v[[5, 5]], 1.0);
        let pair = [
            PointCharge::new_2d(5, 3, 1.0),
            PointCharge::new_2d(5, 7, 1.0),
        ];
        let v = brute_force_potential(&pair, &[11, 11], 3.0).unwrap();
        assert_eq!(v[[5, 5]], 1.0);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            brute_force_potential(&[], &[65, 64], 3.0),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(brute_force_potential(&[], &[16, 16, 16], 3.0).is_ok());
        assert!(brute_force_potential(&[], &[17, 16, 16], 3.0).is_err());
    }

    #[test]
    fn row_profile_at_n3() {
        let v = brute_force_potential(&[PointCharge::new_2d(0, 10, 0.7)], &[1, 40], 3.0).unwrap();
        for x in 0..40 {
            let r = (x as f64 - 10.0).abs().max(1.0);
            assert!((v[[0, x]] - 0.7 / r).abs() < 1e-15);
        }
    }

    #[test]
    fn horizontal_dipole_is_antisymmetric_about_its_axis() {
        let d = Dipole {
            y: 10,
            x: 10,
            theta: 0.0,
            strength: 1.0,
        };
        let v = brute_force_dipole_potential(&[d], &[21, 21], 2.0).unwrap();
        for k in 1..10 {
            for x in 0..21 {
                assert!((v[[10 + k, x]] + v[[10 - k, x]]).abs() < 1e-12);
            }
        }
        assert!(v[[12, 10]] > 0.0);
        for x in 0..21 {
            assert!(v[[10, x]].abs() < 1e-12);
        }
    }

    #[test]
    fn dipole_chain_cancels_in_the_middle() {
        // dipoles along a vertical column, each moment pointing down the
        // column: interior poles coincide with opposite ones
        let chain: Vec<Dipole> = (0..9)
            .map(|k| Dipole {
                y: 16 + 2 * k,
                x: 32,
                theta: 0.0,
                strength: 1.0,
            })
            .collect();
        let single = brute_force_dipole_potential(&chain[..1], &[64, 64], 3.0).unwrap();
        let stacked = brute_force_dipole_potential(&chain, &[64, 64], 3.0).unwrap();
        let peak = single.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // beside the middle of the chain
        assert!(stacked[[25, 34]].abs() < 0.05 * peak);
        assert!(single[[17, 33]].abs() > 0.5 * peak);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn linear_in_charge(a in -1.0f64..1.0, b in -1.0f64..1.0, y in 0i64..12, x in 0i64..12) {
                let c1 = [PointCharge::new_2d(y, x, 1.0)];
                let c2 = [PointCharge::new_2d(11 - y, x / 2, 1.0)];
                let both = [PointCharge::new_2d(y, x, a), PointCharge::new_2d(11 - y, x / 2, b)];
                let v1 = brute_force_potential(&c1, &[12, 12], 2.5).unwrap();
                let v2 = brute_force_potential(&c2, &[12, 12], 2.5).unwrap();
                let v = brute_force_potential(&both, &[12, 12], 2.5).unwrap();
                for ((p, q), r) in v1.iter().zip(v2.iter()).zip(v.iter()) {
                    prop_assert!((a * p + b * q - r).abs() < 1e-12);
                }
            }
        }
    }
}
