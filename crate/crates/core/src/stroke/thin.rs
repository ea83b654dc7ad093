use ndarray::{ArrayD, IxDyn};

use super::ensure_2d;
use crate::error::{invalid_input, Result};
use crate::grid::Mask;

/// Binary image with a one-pixel false frame so neighbour lookups never
/// leave the buffer.
struct Framed {
    w: usize,
    h: usize,
    px: Vec<bool>,
}

impl Framed {
    fn new(mask: &Mask, h: usize, w: usize) -> Self {
        let mut px = vec![false; (h + 2) * (w + 2)];
        for ((y, x), &v) in (0..h)
            .flat_map(|y| (0..w).map(move |x| (y, x)))
            .zip(mask.iter())
        {
            px[(y + 1) * (w + 2) + x + 1] = v;
        }
        Self { w, h, px }
    }

    fn idx(&self, y: usize, x: usize) -> usize {
        (y + 1) * (self.w + 2) + x + 1
    }

    /// Neighbours in the order E, NE, N, NW, W, SW, S, SE.
    fn ring(&self, i: usize) -> [bool; 8] {
        let s = self.w + 2;
        let p = &self.px;
        [
            p[i + 1],
            p[i - s + 1],
            p[i - s],
            p[i - s - 1],
            p[i - 1],
            p[i + s - 1],
            p[i + s],
            p[i + s + 1],
        ]
    }

    fn into_mask(self) -> Mask {
        let data = (0..self.h)
            .flat_map(|y| (0..self.w).map(move |x| (y, x)))
            .map(|(y, x)| self.px[self.idx(y, x)])
            .collect();
        ArrayD::from_shape_vec(IxDyn(&[self.h, self.w]), data).expect("shape")
    }
}

/// Yokoi 8-connectivity number; a pixel whose number is 1 can be removed
/// without changing the topology.
fn connectivity_number(ring: &[bool; 8]) -> u32 {
    let bg = |k: usize| u32::from(!ring[k % 8]);
    [0, 2, 4, 6]
        .iter()
        .map(|&k| bg(k) - bg(k) * bg(k + 1) * bg(k + 2))
        .sum()
}

/// A pixel at the inside corner of an L: two perpendicular face neighbours
/// and nothing on the opposite side. Removing it leaves a diagonal step.
fn redundant_corner(r: &[bool; 8]) -> bool {
    let [e, ne, n, nw, w, sw, s, se] = *r;
    let _ = (ne, nw, se, sw);
    (n && e && !s && !w && !sw)
        || (e && s && !n && !w && !nw)
        || (s && w && !n && !e && !ne)
        || (w && n && !s && !e && !se)
}

fn removable(img: &Framed, i: usize) -> bool {
    let r = img.ring(i);
    r.iter().filter(|&&v| v).count() >= 2 && connectivity_number(&r) == 1
}

/// Morphological thinning to one-pixel-wide curves.
///
/// Directional border peeling: for north, south, east and west in turn,
/// every simple pixel that has two or more neighbours and an empty
/// neighbour on that side is removed at once. If a parallel step would
/// change the component or hole count, the step is redone one pixel at a
/// time with each removal re-checked. A staircase-corner pass follows, and
/// the whole round repeats until nothing changes. The result is a fixed
/// point, so thinning is idempotent, and topology is preserved.
pub fn thin(mask: &Mask) -> Result<Mask> {
    let (h, w) = ensure_2d(mask, "stroke")?;
    if !mask.iter().any(|&b| b) {
        return Err(invalid_input("cannot thin an empty mask"));
    }
    let mut img = Framed::new(mask, h, w);
    let interior: Vec<usize> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (y, x)))
        .map(|(y, x)| img.idx(y, x))
        .collect();
    loop {
        let mut changed = false;
        // ring slots of N, S, E, W
        for side in [2, 6, 0, 4] {
            let candidates: Vec<usize> = interior
                .iter()
                .copied()
                .filter(|&i| img.px[i] && !img.ring(i)[side] && removable(&img, i))
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let before = img.px.clone();
            for &i in &candidates {
                img.px[i] = false;
            }
            if topology_of(&img) == topology_of_px(&img, &before) {
                changed = true;
            } else {
                img.px = before;
                for i in candidates {
                    if removable(&img, i) {
                        img.px[i] = false;
                        changed = true;
                    }
                }
            }
        }
        for &i in &interior {
            if img.px[i] && redundant_corner(&img.ring(i)) && removable(&img, i) {
                img.px[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(img.into_mask())
}

/// `(components, holes)` of a 2D mask: 8-connected foreground components
/// and 4-connected background components that do not reach the border.
pub fn topology(mask: &Mask) -> Result<(usize, usize)> {
    let (h, w) = ensure_2d(mask, "mask")?;
    Ok(topology_of(&Framed::new(mask, h, w)))
}

fn topology_of(img: &Framed) -> (usize, usize) {
    topology_of_px(img, &img.px)
}

fn topology_of_px(img: &Framed, px: &[bool]) -> (usize, usize) {
    let (fw, fh) = (img.w + 2, img.h + 2);
    let mut seen = vec![false; fw * fh];
    let mut components = 0;
    let mut holes = 0;
    for start in 0..seen.len() {
        if seen[start] {
            continue;
        }
        let fg = px[start];
        let mut stack = vec![start];
        seen[start] = true;
        let mut touches_frame = false;
        while let Some(i) = stack.pop() {
            let (y, x) = (i / fw, i % fw);
            if y == 0 || x == 0 || y + 1 == fh || x + 1 == fw {
                touches_frame = true;
            }
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if (dy, dx) == (0, 0) || (!fg && dy != 0 && dx != 0) {
                        continue;
                    }
                    let (ny, nx) = (y as isize + dy, x as isize + dx);
                    if ny < 0 || nx < 0 || ny >= fh as isize || nx >= fw as isize {
                        continue;
                    }
                    let j = ny as usize * fw + nx as usize;
                    if !seen[j] && px[j] == fg {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        if fg {
            components += 1;
        } else if !touches_frame {
            holes += 1;
        }
    }
    (components, holes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stroke::neighbor_counts;

    fn mask(h: usize, w: usize, f: impl Fn(usize, usize) -> bool) -> Mask {
        ArrayD::from_shape_fn(IxDyn(&[h, w]), |i| f(i[0], i[1]))
    }

    fn set_pixels(m: &Mask) -> Vec<(usize, usize)> {
        m.indexed_iter()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i[0], i[1]))
            .collect()
    }

    #[test]
    fn diagonal_line_is_unchanged() {
        let m = mask(12, 12, |y, x| y == x && (1..11).contains(&y));
        assert_eq!(thin(&m).unwrap(), m);
    }

    #[test]
    fn thick_bar_becomes_centre_line() {
        let m = mask(9, 30, |y, x| (3..6).contains(&y) && (3..27).contains(&x));
        let t = thin(&m).unwrap();
        let px = set_pixels(&t);
        assert!(px.iter().all(|&(y, _)| y == 4), "{px:?}");
        let xs: Vec<usize> = px.iter().map(|p| p.1).collect();
        assert!(xs.iter().min().unwrap().abs_diff(3) <= 1);
        assert!(xs.iter().max().unwrap().abs_diff(26) <= 1);
        assert_eq!(
            xs.len(),
            xs.iter().max().unwrap() - xs.iter().min().unwrap() + 1
        );
    }

    #[test]
    fn square_thins_to_low_degree_set() {
        let m = mask(14, 14, |y, x| (2..12).contains(&y) && (2..12).contains(&x));
        let t = thin(&m).unwrap();
        assert_eq!(topology(&t).unwrap(), (1, 0));
        let counts = neighbor_counts(&t).unwrap();
        assert!(
            t.iter().zip(counts.iter()).all(|(&b, &c)| !b || c <= 2),
            "{:?}",
            set_pixels(&t)
        );
    }

    #[test]
    fn empty_mask_is_an_error() {
        assert!(thin(&mask(4, 4, |_, _| false)).is_err());
    }

    #[test]
    fn ring_keeps_its_hole() {
        let m = mask(30, 30, |y, x| {
            let r = ((y as f64 - 14.5).powi(2) + (x as f64 - 14.5).powi(2)).sqrt();
            (7.0..11.0).contains(&r)
        });
        let t = thin(&m).unwrap();
        assert_eq!(topology(&m).unwrap(), (1, 1));
        assert_eq!(topology(&t).unwrap(), (1, 1));
        let counts = neighbor_counts(&t).unwrap();
        assert!(t.iter().zip(counts.iter()).all(|(&b, &c)| !b || c == 2));
    }

    #[test]
    fn two_by_two_block_survives() {
        let m = mask(6, 6, |y, x| (2..4).contains(&y) && (2..4).contains(&x));
        let t = thin(&m).unwrap();
        assert_eq!(topology(&t).unwrap(), (1, 0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn blob() -> impl Strategy<Value = Mask> {
            proptest::collection::vec(any::<bool>(), 14 * 14).prop_map(|bits| {
                let mut m = mask(16, 16, |_, _| false);
                for (k, b) in bits.into_iter().enumerate() {
                    m[[1 + k / 14, 1 + k % 14]] = b;
                }
                m[[8, 8]] = true;
                m
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn thinning_is_idempotent_and_topology_preserving(m in blob()) {
                let t = thin(&m).unwrap();
                prop_assert_eq!(thin(&t).unwrap(), t.clone());
                prop_assert_eq!(topology(&t).unwrap(), topology(&m).unwrap());
                prop_assert!(t.iter().zip(m.iter()).all(|(&a, &b)| !a || b));
            }
        }
    }
}
