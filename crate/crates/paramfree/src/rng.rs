//! Counter-based seeded random number generation.
//!
//! Every random quantity in the crate flows through a [`CounterRng`], a
//! SplitMix64-style generator addressed by `(key, counter)`. Streams derived
//! from the same seed with distinct tags are independent for practical
//! purposes and, crucially, reproducible: the i-th draw of a stream does not
//! depend on how many draws other streams have made. This makes sample
//! batches splittable across parallel trials while keeping reports
//! byte-identical between serial and parallel runs.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer. Good avalanche behavior; passes the usual
/// statistical batteries when driven by a counter.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combine a key with a tag into a new stream key.
#[inline]
pub fn mix2(a: u64, b: u64) -> u64 {
    mix(a ^ mix(b))
}

/// FNV-1a over a label, for deriving stream tags from human-readable names.
pub const fn tag(label: &str) -> u64 {
    let bytes = label.as_bytes();
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut i = 0;
    while i < bytes.len() {
        hash ^= bytes[i] as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        i += 1;
    }
    hash
}

/// Deterministic counter-based generator.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    ctr: u64,
    /// Cached second half of a Box-Muller pair.
    spare_normal: Option<f64>,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        CounterRng { key, ctr: 0, spare_normal: None }
    }

    /// Derive an independent stream from `seed` and a list of tags
    /// (experiment tag, trial index, stage tag, ...).
    pub fn from_seed(seed: u64, tags: &[u64]) -> Self {
        let mut key = mix(seed);
        for &t in tags {
            key = mix2(key, t);
        }
        CounterRng::new(key)
    }

    /// Independent child stream; does not disturb this stream's counter.
    pub fn substream(&self, t: u64) -> CounterRng {
        CounterRng::new(mix2(self.key, t.wrapping_add(0x517c_c1b7_2722_0a95)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = mix(self.key.wrapping_add(self.ctr.wrapping_mul(GOLDEN)));
        self.ctr += 1;
        out
    }

    /// Uniform on [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1], for safe use under `ln`.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// ±1 with equal probability.
    #[inline]
    pub fn rademacher(&mut self) -> i8 {
        if self.next_u64() & 1 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn below(&mut self, n: usize) -> usize {
        // Lemire-style rejection is overkill here; modulo bias is negligible
        // for the small ranges used (class labels, grid indices).
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Uniform on the unit sphere in R^d (surface).
    pub fn unit_sphere(&mut self, d: usize, out: &mut Vec<f64>) {
        out.clear();
        loop {
            let mut sq = 0.0;
            out.clear();
            for _ in 0..d {
                let z = self.normal();
                sq += z * z;
                out.push(z);
            }
            if sq > 1e-300 {
                let inv = 1.0 / sq.sqrt();
                for v in out.iter_mut() {
                    *v *= inv;
                }
                return;
            }
        }
    }
}
