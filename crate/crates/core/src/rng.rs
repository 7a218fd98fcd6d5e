//! Seeded, splittable random streams.
//!
//! A stream is identified by a master seed and a path of integers, e.g.
//! `(experiment, run, purpose)`. The generator for a path depends only on
//! that identity, never on how much randomness sibling or parent streams
//! have consumed, so runs can be scheduled in any order and still replay
//! bit for bit. The underlying generator is ChaCha8, whose output is
//! specified independently of platform and word size.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_seed(master_seed: u64, path: &[u64]) -> [u8; 32] {
    let mut state = splitmix64(master_seed);
    for (depth, &step) in path.iter().enumerate() {
        let tagged = step ^ splitmix64((depth as u64 + 1).wrapping_mul(GOLDEN_GAMMA));
        state = splitmix64(state ^ splitmix64(tagged));
    }
    let mut seed = [0u8; 32];
    for (i, chunk) in seed.chunks_exact_mut(8).enumerate() {
        state = splitmix64(state.wrapping_add(i as u64));
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    seed
}

/// Stable 64-bit FNV-1a hash, used to turn labels into stream path elements.
pub fn stable_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A random stream addressed by `(master_seed, path)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    path: Vec<u64>,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        Self::at(master_seed, Vec::new())
    }

    pub fn at(master_seed: u64, path: Vec<u64>) -> Self {
        let rng = ChaCha8Rng::from_seed(derive_seed(master_seed, &path));
        Self {
            master_seed,
            path,
            rng,
        }
    }

    /// Child stream `path ++ [index]`. Independent of this stream's position.
    pub fn derive(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self::at(self.master_seed, path)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
