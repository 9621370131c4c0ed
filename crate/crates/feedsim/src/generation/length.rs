//! Comment length sampling.
//!
//! Lengths follow a three-parameter log-normal fitted to observed
//! social media messages: `X = loc + scale * exp(shape * Z)` with
//! `Z ~ N(0, 1)`. The median is `loc + scale` (about 10.91 words at the
//! default fit). Sampled lengths are rounded and clamped to a sane word
//! range before use.

use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageLengthSampler {
    /// Log-space standard deviation.
    pub shape: f64,
    /// Lower bound shift, in words.
    pub loc: f64,
    /// Scale, in words; `exp(mean of ln(X - loc)) = scale`.
    pub scale: f64,
    pub min_words: u32,
    pub max_words: u32,
}

impl Default for MessageLengthSampler {
    fn default() -> Self {
        MessageLengthSampler {
            shape: 0.8066,
            loc: 0.2178,
            scale: 10.69,
            min_words: 3,
            max_words: 60,
        }
    }
}

impl MessageLengthSampler {
    /// One raw draw from the fitted distribution, unrounded and
    /// unclamped.
    pub fn sample_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.loc + self.scale * (self.shape * z).exp()
    }

    /// A usable word count: rounded, then clamped to
    /// `min_words..=max_words`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let raw = self.sample_raw(rng).round();
        (raw.max(0.0) as u32).clamp(self.min_words, self.max_words)
    }

    /// The distribution median, `loc + scale`.
    pub fn median(&self) -> f64 {
        self.loc + self.scale
    }
}
