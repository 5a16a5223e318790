//! Seeded, splittable random streams.
//!
//! Every experiment carries a single 64-bit seed. Independent sub-streams are
//! obtained with [`SplitRng::split`], which selects a distinct ChaCha stream for
//! the same key, so batches can be partitioned without sharing state.

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct SplitRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SplitRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    /// The seed this stream (and all of its splits) derive from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream; `index` distinguishes siblings.
    pub fn split(&self, index: u64) -> SplitRng {
        // splitmix64 finalizer keeps nested splits from colliding with siblings
        let mut z = self
            .stream
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(index.wrapping_add(1));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        SplitRng::with_stream(self.seed, z)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.inner.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| self.normal())
    }

    /// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
    pub fn orthogonal(&mut self, n: usize) -> DMatrix<f64> {
        let g = self.normal_matrix(n, n);
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                let mut col = q.column_mut(j);
                col.neg_mut();
            }
        }
        q
    }
}

impl RngCore for SplitRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
