//! Lattice geometry and the two bin partitions of the real line.
//!
//! For a bin width `b > 0` the histogram bins are `I_k = [(k-1)b, kb)` and
//! the polygon pieces are `J_k = [(k-1/2)b, (k+1/2)b)`. Both index maps are
//! evaluated in exact real arithmetic: `bin_index(x) = floor(x/b) + 1` and
//! `polygon_index(x) = floor(x/b + 1/2)` hold for the true quotient, not the
//! rounded one, so interval membership is never off by one at boundaries.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::rng::{index_lanes, CounterRng, Stream};
use crate::{Error, Result};

/// A point of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Site(pub Vec<i64>);

impl Site {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        Self(coords.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl From<&[i64]> for Site {
    fn from(c: &[i64]) -> Self {
        Self(c.to_vec())
    }
}

/// Sup-norm distance `max_k |i_k - j_k|`.
pub fn sup_distance(i: &[i64], j: &[i64]) -> Result<u64> {
    if i.len() != j.len() {
        return Err(Error::DimensionMismatch {
            expected: i.len(),
            found: j.len(),
        });
    }
    Ok(sup_distance_unchecked(i, j))
}

#[inline]
pub(crate) fn sup_distance_unchecked(i: &[i64], j: &[i64]) -> u64 {
    i.iter()
        .zip(j)
        .map(|(a, b)| (i128::from(*a) - i128::from(*b)).unsigned_abs() as u64)
        .max()
        .unwrap_or(0)
}

/// Minimum sup-norm distance between two site sets.
pub fn set_distance(a: &SiteSet, b: &SiteSet) -> Result<u64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut best = u64::MAX;
    for i in a.iter() {
        for j in b.iter() {
            best = best.min(sup_distance_unchecked(i, j));
            if best == 0 {
                return Ok(0);
            }
        }
    }
    Ok(best)
}

/// A finite observation region: distinct sites of a common dimension, in a
/// fixed order (the order defines each site's linear index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteSet {
    dim: usize,
    coords: Vec<i64>,
}

impl SiteSet {
    /// Builds a region from explicit sites, rejecting duplicates, empty input
    /// and mixed dimensions.
    pub fn new(dim: usize, sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut coords = Vec::new();
        for s in sites {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            coords.extend_from_slice(s.coords());
        }
        Self::from_flat(dim, coords)
    }

    /// Builds a region from row-major flattened coordinates.
    pub fn from_flat(dim: usize, coords: Vec<i64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if coords.is_empty() {
            return Err(Error::EmptySiteSet);
        }
        let mut sorted: Vec<&[i64]> = coords.chunks_exact(dim).collect();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSite(w[0].to_vec()));
        }
        Ok(Self { dim, coords })
    }

    /// The box `{0..n_1-1} x ... x {0..n_d-1}` in lexicographic order.
    pub fn rectangle(sides: &[usize]) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let total = sides
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or(Error::Overflow("rectangle size"))?;
        if total == 0 {
            return Err(Error::EmptySiteSet);
        }
        let d = sides.len();
        let mut coords = Vec::with_capacity(total * d);
        let mut idx = alloc::vec![0i64; d];
        for _ in 0..total {
            coords.extend_from_slice(&idx);
            for axis in (0..d).rev() {
                idx[axis] += 1;
                if (idx[axis] as usize) < sides[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        Ok(Self { dim: d, coords })
    }

    /// The sup-norm ball `{i : |i| <= radius}` around the origin.
    pub fn ball(dim: usize, radius: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let side = 2 * radius as usize + 1;
        let sides = alloc::vec![side; dim];
        let mut set = Self::rectangle(&sides)?;
        for c in &mut set.coords {
            *c -= i64::from(radius);
        }
        Ok(set)
    }

    /// A seeded random connected region of `size` sites grown from the origin
    /// by repeatedly adding a uniformly chosen axis neighbour of the current
    /// region.
    pub fn random_connected(dim: usize, size: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if size == 0 {
            return Err(Error::EmptySiteSet);
        }
        let rng = CounterRng::new(seed, Stream::Region);
        let origin = alloc::vec![0i64; dim];
        let mut members: BTreeSet<Vec<i64>> = BTreeSet::new();
        let mut in_frontier: BTreeSet<Vec<i64>> = BTreeSet::new();
        let mut frontier: Vec<Vec<i64>> = Vec::new();
        let mut order: Vec<i64> = Vec::with_capacity(size * dim);

        let mut add = |site: Vec<i64>,
                       members: &mut BTreeSet<Vec<i64>>,
                       frontier: &mut Vec<Vec<i64>>,
                       in_frontier: &mut BTreeSet<Vec<i64>>| {
            order.extend_from_slice(&site);
            for axis in 0..dim {
                for step in [-1i64, 1] {
                    let mut nb = site.clone();
                    nb[axis] += step;
                    if !members.contains(&nb) && in_frontier.insert(nb.clone()) {
                        frontier.push(nb);
                    }
                }
            }
            members.insert(site);
        };

        add(origin, &mut members, &mut frontier, &mut in_frontier);
        let mut draw = 0u64;
        while members.len() < size {
            let u = rng.uniforms(0, index_lanes(draw))[0];
            draw += 1;
            let pick = ((u * frontier.len() as f64) as usize).min(frontier.len() - 1);
            let site = frontier.swap_remove(pick);
            in_frontier.remove(&site);
            add(site, &mut members, &mut frontier, &mut in_frontier);
        }
        Ok(Self {
            dim,
            coords: order,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Coordinates of the site with linear index `n`.
    pub fn get(&self, n: usize) -> Option<&[i64]> {
        self.coords.get(n * self.dim..(n + 1) * self.dim)
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, i64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn sites(&self) -> Vec<Site> {
        self.iter().map(Site::from).collect()
    }

    pub fn flat(&self) -> &[i64] {
        &self.coords
    }

    /// Per-axis `(min, max)` over the region.
    pub fn bounding_box(&self) -> Vec<(i64, i64)> {
        let mut bb: Vec<(i64, i64)> = self.iter().next().unwrap().iter().map(|&c| (c, c)).collect();
        for s in self.iter() {
            for (b, &c) in bb.iter_mut().zip(s) {
                b.0 = b.0.min(c);
                b.1 = b.1.max(c);
            }
        }
        bb
    }
}

/// The common width `b` of both partitions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinGrid {
    bin_width: f64,
}

/// Polygon interpolation weights at a point `x` of `J_k`:
/// `a = 1/2 + k - x/b` on `nu_k` and `a_bar = 1/2 - k + x/b` on `nu_{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolygonWeights {
    pub k: i64,
    pub a: f64,
    pub a_bar: f64,
}

const MAX_EXACT_INDEX: f64 = 9_007_199_254_740_992.0; // 2^53

/// Sign of `x - q*b` in exact arithmetic, for integer-valued `q`.
fn cmp_exact(x: f64, q: f64, b: f64) -> Ordering {
    let p = q * b;
    let e = libm::fma(q, b, -p); // q*b == p + e exactly
    let d = x - p;
    // `d` is exact whenever x and p are within a factor of two; otherwise
    // |d| dwarfs |e| and its sign decides.
    d.partial_cmp(&e).unwrap_or(Ordering::Equal)
}

impl BinGrid {
    pub fn new(bin_width: f64) -> Result<Self> {
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(Error::InvalidBinWidth(bin_width));
        }
        Ok(Self { bin_width })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    /// Exact `floor(x / b)`.
    fn floor_div(&self, x: f64) -> Result<i64> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        let b = self.bin_width;
        let mut q = libm::floor(x / b);
        if !(q.abs() < MAX_EXACT_INDEX) {
            return Err(Error::IndexRange { x, b });
        }
        while cmp_exact(x, q, b) == Ordering::Less {
            q -= 1.0;
        }
        while cmp_exact(x, q + 1.0, b) != Ordering::Less {
            q += 1.0;
        }
        Ok(q as i64)
    }

    /// The `k` with `x` in `I_k = [(k-1)b, kb)`.
    pub fn bin_index(&self, x: f64) -> Result<i64> {
        Ok(self.floor_div(x)? + 1)
    }

    /// The `k` with `x` in `J_k = [(k-1/2)b, (k+1/2)b)`.
    pub fn polygon_index(&self, x: f64) -> Result<i64> {
        let twice = 2.0 * x;
        if !twice.is_finite() {
            return Err(Error::NonFinite(x));
        }
        // 2x in [jb, (j+1)b)  <=>  x in J_k with j in {2k-1, 2k}
        let j = self.floor_div(twice)?;
        Ok((j + 1).div_euclid(2))
    }

    pub fn polygon_weights(&self, x: f64) -> Result<PolygonWeights> {
        let k = self.polygon_index(x)?;
        let offset = (x / self.bin_width - k as f64).clamp(-0.5, 0.5);
        Ok(PolygonWeights {
            k,
            a: 0.5 - offset,
            a_bar: 0.5 + offset,
        })
    }

    /// Left edge `(k-1)b` of `I_k`.
    pub fn bin_left(&self, k: i64) -> f64 {
        (k - 1) as f64 * self.bin_width
    }

    /// Right edge `kb` of `I_k`.
    pub fn bin_right(&self, k: i64) -> f64 {
        k as f64 * self.bin_width
    }

    /// Midpoint `(k-1/2)b` of `I_k`, which is also the left end of `J_k`.
    pub fn bin_mid(&self, k: i64) -> f64 {
        (k as f64 - 0.5) * self.bin_width
    }
}
