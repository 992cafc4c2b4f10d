//! Deterministic random-number machinery.
//!
//! Everything random in this crate flows from a [`StreamKey`]: a 64-bit key
//! derived by hashing (master seed, coordinates, replicate index, purpose
//! tag). A key either spawns a sequential generator ([`Xoshiro256`]) or
//! answers keyed one-shot draws ([`StreamKey::bernoulli`]), which is how
//! per-edge percolation indicators stay a pure function of (seed, edge) and
//! lazy exposure matches eager percolation bit for bit.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: avalanche-mixes one 64-bit word.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_BEB9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 sequential generator (Steele, Lea, Flood). Used for seeding
/// and key derivation only; the workhorse generator is [`Xoshiro256`].
#[derive(Clone, Copy, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }
}

/// xoshiro256++ (Blackman, Vigna), seeded through SplitMix64.
#[derive(Clone, Debug)]
pub struct Xoshiro256 {
    s: [u64; 4],
}

#[inline]
fn rotl(x: u64, k: u32) -> u64 {
    x.rotate_left(k)
}

impl Xoshiro256 {
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        Xoshiro256 {
            s: [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()],
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = rotl(s[0].wrapping_add(s[3]), 23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        result
    }

    /// Uniform f64 in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n). Unbiased via rejection. Panics if n = 0.
    #[inline]
    pub fn range(&mut self, n: u64) -> u64 {
        assert!(n > 0, "range(0) is empty");
        let threshold = n.wrapping_neg() % n;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % n;
            }
        }
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        bernoulli_from_u64(self.next_u64(), p)
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.range(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }

    /// Uniform permutation of {1, ..., d}, one-based values.
    pub fn permutation(&mut self, d: usize) -> Vec<u16> {
        let mut p: Vec<u16> = (1..=d as u16).collect();
        self.shuffle(&mut p);
        p
    }
}

/// Maps a uniform u64 to a Bernoulli(p) outcome via an integer threshold
/// comparison (r < floor(p · 2^64)).
#[inline]
pub fn bernoulli_from_u64(r: u64, p: f64) -> bool {
    if p >= 1.0 {
        return true;
    }
    if p <= 0.0 {
        return false;
    }
    (r as u128) < (p * (1u128 << 64) as f64) as u128
}

/// A 64-bit key identifying one random stream. Derivation is pure hashing,
/// so identical (master seed, path of tags) always names the same stream
/// regardless of scheduling or worker count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(master_seed: u64) -> Self {
        StreamKey(mix64(master_seed.wrapping_add(GOLDEN)))
    }

    /// Derives a sub-stream for a tagged purpose or index.
    #[inline]
    pub fn child(self, tag: u64) -> StreamKey {
        StreamKey(mix64(self.0 ^ mix64(tag.wrapping_add(GOLDEN))))
    }

    /// Sequential generator for this stream.
    pub fn rng(self) -> Xoshiro256 {
        Xoshiro256::from_seed(self.0)
    }

    /// Keyed one-shot Bernoulli draw: a pure function of (stream, key, p).
    #[inline]
    pub fn bernoulli(self, key: u64, p: f64) -> bool {
        bernoulli_from_u64(mix64(self.0 ^ mix64(key.wrapping_add(GOLDEN))), p)
    }

    pub fn as_u64(self) -> u64 {
        self.0
    }
}

/// Canonical 64-bit key for the unordered pair {u, v}.
#[inline]
pub fn edge_key(u: u32, v: u32) -> u64 {
    let (a, b) = if u <= v { (u, v) } else { (v, u) };
    ((a as u64) << 32) | b as u64
}
