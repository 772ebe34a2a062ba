//! Counter-based random streams for environment sampling.
//!
//! Every environment is drawn from a ChaCha8 keystream keyed by a 64-bit seed
//! and a 64-bit stream index. Monte Carlo replicate `k` under master seed `s`
//! reads stream `k` of key `s`, so its weights depend only on `(s, k)` and the
//! position of each cell in the fixed draw order, never on thread scheduling.
//!
//! Bernoulli cells are produced 64 at a time by comparing 64 uniform variates
//! against the binary expansion of the success probability, one random word
//! per expansion digit. Geometric cells use inverse-CDF on one 53-bit uniform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct EnvStream {
    rng: ChaCha8Rng,
}

impl EnvStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        EnvStream { rng }
    }

    #[inline]
    pub fn next_word(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `(0, 1]` with 53 bits of resolution.
    #[inline]
    pub fn open_unit(&mut self) -> f64 {
        ((self.next_word() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fills `out` with packed Bernoulli bits for `len` cells; bit `i % 64` of
    /// word `i / 64` is cell `i`. Unused high bits of the last word are zero.
    pub fn fill_bernoulli(&mut self, law: &BernoulliBits, len: usize, out: &mut Vec<u64>) {
        out.clear();
        let words = len.div_ceil(64);
        for w in 0..words {
            let mut bits = law.draw_word(self);
            let rem = len - 64 * w;
            if rem < 64 {
                bits &= (1u64 << rem) - 1;
            }
            out.push(bits);
        }
    }

    pub fn geometric(&mut self, law: &GeometricInverse) -> u32 {
        law.sample(self.open_unit())
    }
}

/// Binary expansion of a Bernoulli success probability for word-parallel
/// sampling.
#[derive(Debug, Clone)]
pub struct BernoulliBits {
    digits: Vec<bool>,
    certain: Option<bool>,
}

impl BernoulliBits {
    /// `q` is truncated to 53 binary digits, which is exact for every `f64`
    /// in `[0, 1]` with exponent above -53.
    pub fn new(q: f64) -> Self {
        assert!((0.0..=1.0).contains(&q), "probability out of range: {q}");
        if q == 0.0 || q == 1.0 {
            return BernoulliBits {
                digits: Vec::new(),
                certain: Some(q == 1.0),
            };
        }
        let mut digits = Vec::with_capacity(64);
        let mut frac = q;
        for _ in 0..64 {
            frac *= 2.0;
            let bit = frac >= 1.0;
            if bit {
                frac -= 1.0;
            }
            digits.push(bit);
            if frac == 0.0 {
                break;
            }
        }
        // trailing zeros never resolve a lane toward success
        while digits.last() == Some(&false) {
            digits.pop();
        }
        BernoulliBits {
            digits,
            certain: None,
        }
    }

    /// 64 independent Bernoulli bits. Lane `b` is one iff the uniform whose
    /// binary digits are bit `b` of successive words is below `q`.
    #[inline]
    pub fn draw_word(&self, src: &mut EnvStream) -> u64 {
        match self.certain {
            Some(true) => return !0,
            Some(false) => return 0,
            None => {}
        }
        let mut ones = 0u64;
        let mut open = !0u64;
        for &digit in &self.digits {
            let r = src.next_word();
            if digit {
                ones |= open & !r;
                open &= r;
            } else {
                open &= !r;
            }
            if open == 0 {
                break;
            }
        }
        ones
    }
}

/// Inverse CDF of the geometric law `P{X = l} = rho (1 - rho)^l` on `{0, 1, ...}`.
#[derive(Debug, Clone, Copy)]
pub struct GeometricInverse {
    log_tail: f64,
}

impl GeometricInverse {
    pub fn new(one_minus_rho: f64) -> Self {
        assert!((0.0..1.0).contains(&one_minus_rho));
        GeometricInverse {
            log_tail: one_minus_rho.ln(),
        }
    }

    /// `floor(log U / log(1 - rho))` for `U` in `(0, 1]`; `P{X >= l} = (1 - rho)^l`.
    #[inline]
    pub fn sample(&self, unit: f64) -> u32 {
        if self.log_tail == f64::NEG_INFINITY {
            return 0;
        }
        let x = (unit.ln() / self.log_tail).floor();
        if x >= u32::MAX as f64 {
            u32::MAX
        } else {
            x as u32
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut s = EnvStream::new(7, 3);
            (0..8).map(|_| s.next_word()).collect()
        };
        let b: Vec<u64> = {
            let mut s = EnvStream::new(7, 3);
            (0..8).map(|_| s.next_word()).collect()
        };
        let c: Vec<u64> = {
            let mut s = EnvStream::new(7, 4);
            (0..8).map(|_| s.next_word()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn dyadic_probabilities_use_few_words() {
        assert_eq!(BernoulliBits::new(0.5).digits, vec![true]);
        assert_eq!(BernoulliBits::new(0.25).digits, vec![false, true]);
        assert_eq!(BernoulliBits::new(0.75).digits, vec![true, true]);
    }

    #[test]
    fn bernoulli_words_have_the_right_density() {
        for &q in &[0.1, 0.25, 0.5, 0.9, 1.0 / 3.0] {
            let law = BernoulliBits::new(q);
            let mut s = EnvStream::new(11, 0);
            let words = 20_000;
            let ones: u64 = (0..words).map(|_| law.draw_word(&mut s).count_ones() as u64).sum();
            let n = (64 * words) as f64;
            let z = (ones as f64 / n - q) / (q * (1.0 - q) / n).sqrt();
            assert!(z.abs() < 4.5, "q={q}: z={z}");
        }
        let mut s = EnvStream::new(1, 0);
        assert_eq!(BernoulliBits::new(1.0).draw_word(&mut s), !0);
        assert_eq!(BernoulliBits::new(0.0).draw_word(&mut s), 0);
    }

    #[test]
    fn fill_masks_the_tail_word() {
        let mut s = EnvStream::new(5, 0);
        let mut out = Vec::new();
        s.fill_bernoulli(&BernoulliBits::new(1.0), 70, &mut out);
        assert_eq!(out, vec![!0, (1 << 6) - 1]);
    }

    #[test]
    fn geometric_inverse_matches_tail_probabilities() {
        let law = GeometricInverse::new(1.0 / 3.0);
        // P{X >= l} = (1/3)^l  <=>  U <= (1/3)^l
        assert_eq!(law.sample(1.0), 0);
        assert_eq!(law.sample(0.34), 0);
        assert_eq!(law.sample(0.33), 1);
        assert_eq!(law.sample(0.1), 2);
        assert_eq!(GeometricInverse::new(0.0).sample(0.01), 0);
        let mut s = EnvStream::new(3, 9);
        let n = 200_000;
        let mean = (0..n).map(|_| s.geometric(&law) as f64).sum::<f64>() / n as f64;
        // mean 1/2, variance (1 - rho)/rho^2 = 3/4
        assert!(((mean - 0.5) / (0.75f64 / n as f64).sqrt()).abs() < 4.5);
    }
}
