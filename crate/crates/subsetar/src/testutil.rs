//! Deterministic random helpers for the test suite, kept independent of the
//! production random path (which uses a counter-based stream cipher).

/// SplitMix64: tiny, well-distributed, and entirely local to the tests.
pub struct SmallRng(u64);

impl SmallRng {
    pub fn seed(seed: u64) -> Self {
        SmallRng(seed.wrapping_add(0x9e3779b97f4a7c15))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
}

/// Uniform variate in [0, 1).
pub fn uniform(rng: &mut SmallRng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal via Box-Muller (distinct from the production polar
/// method, so simulation tests cross-check two transforms).
pub fn standard_normals(rng: &mut SmallRng, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count + 1);
    while out.len() < count {
        let u1 = uniform(rng).max(1e-300);
        let u2 = uniform(rng);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(r * theta.cos());
        out.push(r * theta.sin());
    }
    out.truncate(count);
    out
}
