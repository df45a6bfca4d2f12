//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a [`RngStream`]: a ChaCha20
//! keystream whose 256-bit key is the SplitMix64 expansion of a 64-bit
//! master seed and whose 64-bit stream number identifies the consumer (a
//! tree node id, a point index). ChaCha is counter based, so a stream's
//! output depends only on `(master seed, stream id)`, never on which thread
//! asks or in what order.
//!
//! - uniforms: the top 53 bits of a 64-bit word, scaled by 2^-53, in [0, 1);
//! - normals: the Box-Muller transform, both outputs used in order.

use alloc::vec::Vec;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;
const INV_2_POW_53: f64 = 1.0 / (1u64 << 53) as f64;

/// One step of the SplitMix64 generator.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for the `index`-th independent repetition under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut s = index;
    let mixed = splitmix64(&mut s);
    let mut m = master ^ mixed;
    splitmix64(&mut m)
}

pub struct RngStream {
    inner: ChaCha20Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut state = master_seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream_id);
        RngStream { inner, spare_normal: None }
    }

    /// Stream for the tree node `node_id`.
    pub fn for_node(master_seed: u64, node_id: u64) -> Self {
        RngStream::new(master_seed, node_id)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_POW_53
    }

    /// Standard normal via Box-Muller.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 in (0, 1] keeps the log finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let (s, c) = libm::sincos(TWO_PI * u2);
        self.spare_normal = Some(r * s);
        r * c
    }

    /// A direction drawn uniformly from the unit sphere in `dim` dimensions:
    /// i.i.d. standard normal coordinates, renormalized. A zero draw (which
    /// Box-Muller cannot produce in every coordinate at once in practice) is
    /// redrawn.
    pub fn unit_vector(&mut self, dim: usize) -> Vec<f64> {
        assert!(dim >= 1, "dimension must be positive");
        loop {
            let mut v: Vec<f64> = (0..dim).map(|_| self.standard_normal()).collect();
            let norm = crate::linalg::norm(&v);
            if norm > 0.0 && norm.is_finite() {
                for x in &mut v {
                    *x /= norm;
                }
                return v;
            }
        }
    }
}
