use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

/// Deterministic pseudo-random stream.
///
/// A stream is identified by a 64-bit seed. Child streams are derived from
/// `(seed, index)` through a SplitMix64 mix, so any cell of an experiment can
/// rebuild its own stream without touching its siblings. A stream is owned by
/// one thread at a time; distinct streams are independent.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream for `index`. Does not advance `self`.
    pub fn child(&self, index: u64) -> Self {
        let derived = splitmix64(splitmix64(self.seed) ^ splitmix64(index ^ 0xD1B5_4A32_D192_ED03));
        Self::new(derived)
    }

    /// Child stream addressed by a path of indices, e.g. `(filter, N, s, r)`.
    pub fn descend(&self, path: &[u64]) -> Self {
        path.iter()
            .fold(self.child(u64::MAX), |acc, &i| acc.child(i))
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    #[inline]
    pub fn exp1(&mut self) -> f64 {
        self.inner.sample(Exp1)
    }

    #[inline]
    pub fn index_below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n as u64) as usize
    }
}

impl RngCore for RngStream {
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
