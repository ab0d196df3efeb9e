//! Counter-based random numbers.
//!
//! Every random draw is a pure function of `(seed, stream, replicate, lane
//! words)` evaluated through the Philox-4x32-10 bijection, so replicates and
//! sites can be generated in any order, on any number of workers, with
//! bitwise-identical results.

use crate::{Error, Result};

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// Philox-4x32 with 10 rounds.
#[inline]
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Independent purposes that draw from the same master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Per-site uniforms of an i.i.d. field, keyed by site position.
    Iid = 1,
    /// Gaussian innovations of moving-average fields, keyed by absolute coordinates.
    Innovation = 2,
    /// Random region construction.
    Region = 3,
}

/// A keyed Philox generator. Cheap to copy; holds no mutable state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: [u32; 2],
}

impl CounterRng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        let key = seed ^ (stream as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Self {
            key: [key as u32, (key >> 32) as u32],
        }
    }

    /// Raw 128-bit block for `(replicate, lanes)`.
    #[inline]
    pub fn block(&self, replicate: u32, lanes: [u32; 3]) -> [u32; 4] {
        philox4x32_10([lanes[0], lanes[1], lanes[2], replicate], self.key)
    }

    /// Two uniforms on the open interval (0, 1) with 52-bit resolution.
    #[inline]
    pub fn uniforms(&self, replicate: u32, lanes: [u32; 3]) -> [f64; 2] {
        let b = self.block(replicate, lanes);
        let x = u64::from(b[0]) | (u64::from(b[1]) << 32);
        let y = u64::from(b[2]) | (u64::from(b[3]) << 32);
        [open_unit(x), open_unit(y)]
    }

    /// One standard normal variate (Box-Muller on the two uniforms of a block).
    #[inline]
    pub fn normal(&self, replicate: u32, lanes: [u32; 3]) -> f64 {
        let [u, v] = self.uniforms(replicate, lanes);
        libm::sqrt(-2.0 * libm::log(u)) * libm::cos(core::f64::consts::TAU * v)
    }
}

/// Maps 64 random bits to `(0, 1)`, never returning either endpoint.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Lane words for a linear index.
#[inline]
pub fn index_lanes(index: u64) -> [u32; 3] {
    [index as u32, (index >> 32) as u32, 0]
}

/// Packs lattice coordinates injectively into 96 bits.
///
/// Each coordinate gets `min(64, 96 / d)` bits in two's complement, so d <= 3
/// covers the whole `i32` range and d = 4 still allows `|i| < 2^23`.
pub fn site_lanes(coords: &[i64]) -> Result<[u32; 3]> {
    let d = coords.len();
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let bits = (96 / d).min(64) as u32;
    if bits == 0 {
        return Err(Error::CoordinateRange { coord: 0, bits: 0 });
    }
    let mut packed: u128 = 0;
    for (n, &c) in coords.iter().enumerate() {
        if bits < 64 {
            let lim = 1i64 << (bits - 1);
            if c < -lim || c >= lim {
                return Err(Error::CoordinateRange { coord: c, bits });
            }
        }
        let mask: u128 = if bits == 64 { u64::MAX as u128 } else { (1u128 << bits) - 1 };
        packed |= ((c as u64 as u128) & mask) << (n as u32 * bits);
    }
    Ok([packed as u32, (packed >> 32) as u32, (packed >> 64) as u32])
}

#[cfg(test)]
mod tests {
    use super::*;

    // Known-answer vectors published with the Random123 library.
    #[test]
    fn philox_known_answers() {
        assert_eq!(
            philox4x32_10([0, 0, 0, 0], [0, 0]),
            [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]
        );
        assert_eq!(
            philox4x32_10([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]
        );
        assert_eq!(
            philox4x32_10(
                [0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344],
                [0xa4093822, 0x299f31d0]
            ),
            [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]
        );
    }

    #[test]
    fn open_unit_never_hits_endpoints() {
        assert!(open_unit(0) > 0.0);
        assert!(open_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn site_lanes_is_injective_on_small_box() {
        let mut seen = std::collections::BTreeSet::new();
        for a in -5i64..=5 {
            for b in -5i64..=5 {
                assert!(seen.insert(site_lanes(&[a, b]).unwrap()));
            }
        }
        assert!(site_lanes(&[1 << 40, 0, 0, 0]).is_err());
        assert!(site_lanes(&[i64::MIN]).is_ok());
    }

    #[test]
    fn streams_are_distinct() {
        let a = CounterRng::new(7, Stream::Iid).block(0, [0; 3]);
        let b = CounterRng::new(7, Stream::Innovation).block(0, [0; 3]);
        assert_ne!(a, b);
    }
}
