//! Stable 64-bit content hashing (FNV-1a) for artifact provenance.
//!
//! Stage artifacts (graph, walk corpus, embeddings) carry the fingerprint of
//! the graph they were derived from; consumers refuse mismatched inputs. The
//! hash must therefore be identical across processes and platforms, which
//! rules out std's randomized hashers.

#[derive(Debug, Clone)]
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Fnv1a(0xCBF2_9CE4_8422_2325)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01B3);
        }
    }

    pub fn write_u8(&mut self, v: u8) {
        self.write(&[v]);
    }

    pub fn write_u32(&mut self, v: u32) {
        self.write(&v.to_le_bytes());
    }

    pub fn write_u64(&mut self, v: u64) {
        self.write(&v.to_le_bytes());
    }

    /// Hashes the exact bit pattern; identical arithmetic yields identical
    /// fingerprints, any weight change yields (with overwhelming probability)
    /// a different one.
    pub fn write_f64(&mut self, v: f64) {
        self.write(&v.to_bits().to_le_bytes());
    }

    /// Length-prefixed so "ab","c" and "a","bc" hash differently.
    pub fn write_str(&mut self, s: &str) {
        self.write_u32(s.len() as u32);
        self.write(s.as_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_fnv_reference_vectors() {
        let h = Fnv1a::new();
        assert_eq!(h.finish(), 0xCBF2_9CE4_8422_2325);
        let mut h = Fnv1a::new();
        h.write(b"a");
        assert_eq!(h.finish(), 0xAF63_DC4C_8601_EC8C);
    }

    #[test]
    fn length_prefix_disambiguates() {
        let mut a = Fnv1a::new();
        a.write_str("ab");
        a.write_str("c");
        let mut b = Fnv1a::new();
        b.write_str("a");
        b.write_str("bc");
        assert_ne!(a.finish(), b.finish());
    }

    #[test]
    fn f64_bit_pattern_sensitivity() {
        let mut a = Fnv1a::new();
        a.write_f64(0.75);
        let mut b = Fnv1a::new();
        b.write_f64(0.75 + f64::EPSILON);
        assert_ne!(a.finish(), b.finish());
    }
}
