//! Digitisation of the noise record into random bits.
//!
//! - Quantiser: uniform mid-rise over `[-k sigma, +k sigma)` with `2^b`
//!   half-open bins `[lower, upper)`; values outside clamp to the end codes.
//!   Zero falls on a bin edge and maps to code `2^(b-1)`.
//! - Min-entropy: `-log2(max bin probability)` under the Gaussian measure of
//!   the bins, the end bins absorbing the tails.
//! - Extractor: Toeplitz hashing over GF(2). Raw codes are expanded MSB
//!   first and cut into blocks of [`EXTRACTOR_BLOCK_BITS`]; block `i` covering
//!   raw bits `[s, e)` yields `floor(ratio e) - floor(ratio s)` output bits so
//!   the total is `floor(ratio * raw bits)`. All blocks share one Toeplitz
//!   matrix `T[r][c] = d[r - c + B - 1]` whose diagonal bits `d` come from
//!   ChaCha8 seeded with the extractor seed (low bit of each `u64` first).
//! - Output bytes are packed most significant bit first.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::sampler::NoiseTimeSeries;

pub const EXTRACTOR_BLOCK_BITS: usize = 1024;
pub const MIN_CHECK_BITS: usize = 100_000;
/// Two-sided critical value at alpha ~ 1e-3.
pub const CHECK_Z_LIMIT: f64 = 3.29;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcConfig {
    pub bits: u32,
    /// Full scale is `+- full_scale_sigma` standard deviations.
    pub full_scale_sigma: f64,
}

impl Default for AdcConfig {
    fn default() -> Self {
        Self {
            bits: 8,
            full_scale_sigma: 4.0,
        }
    }
}

impl AdcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=24).contains(&self.bits) {
            return Err(Error::InvalidConfig(format!(
                "ADC resolution must be 1..=24 bits, got {}",
                self.bits
            )));
        }
        if !(self.full_scale_sigma > 0.0 && self.full_scale_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "full_scale_sigma must be positive, got {}",
                self.full_scale_sigma
            )));
        }
        Ok(())
    }

    pub fn levels(&self) -> u64 {
        1u64 << self.bits
    }
}

/// Quantise with an explicit scale `sigma` (same units as the values).
pub fn quantize_values(values: &[f64], adc: &AdcConfig, sigma: f64) -> Result<Vec<u32>> {
    adc.validate()?;
    if !(sigma > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let range = adc.full_scale_sigma * sigma;
    let levels = adc.levels();
    let step = 2.0 * range / levels as f64;
    let top = (levels - 1) as f64;
    Ok(values
        .iter()
        .map(|&x| ((x + range) / step).floor().clamp(0.0, top) as u32)
        .collect())
}

/// Quantise a record, scaling the ADC range by the record's own standard
/// deviation.
pub fn quantize(series: &NoiseTimeSeries, adc: &AdcConfig) -> Result<Vec<u32>> {
    if series.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot quantise an empty series".into(),
        ));
    }
    // A constant record can still show a rounding-level variance.
    let first = series.samples[0];
    if series.samples.iter().all(|&v| v == first) {
        return Err(Error::ZeroVariance);
    }
    quantize_values(&series.samples, adc, series.variance().sqrt())
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Min-entropy per sample of a zero-mean Gaussian of standard deviation
/// `sigma` read by an ADC whose range is `+- full_scale_sigma` (in the same
/// units, i.e. `sigma = 1` is the matched case).
pub fn min_entropy(adc: &AdcConfig, sigma: f64) -> Result<f64> {
    adc.validate()?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let levels = adc.levels() as i64;
    let range = adc.full_scale_sigma;
    let step = 2.0 * range / levels as f64;
    let bin_mass = |code: i64| -> f64 {
        let lo = if code == 0 {
            0.0
        } else {
            normal_cdf((-range + code as f64 * step) / sigma)
        };
        let hi = if code == levels - 1 {
            1.0
        } else {
            normal_cdf((-range + (code + 1) as f64 * step) / sigma)
        };
        hi - lo
    };
    // The density is unimodal about zero, so the heaviest bin is one of the
    // bins touching zero or one of the two tail-absorbing end bins.
    let centre = (range / step).floor() as i64;
    let max_p = [0, levels - 1, centre - 1, centre, centre + 1]
        .into_iter()
        .filter(|c| (0..levels).contains(c))
        .map(bin_mass)
        .fold(0.0, f64::max);
    Ok(-max_p.log2())
}

/// Default extraction ratio: 90 % of the entropy bound.
pub fn default_ratio(min_entropy: f64, bits_per_sample: u32) -> f64 {
    0.9 * min_entropy / bits_per_sample as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct BitStream {
    /// Packed, most significant bit first.
    pub bytes: Vec<u8>,
    pub n_bits: usize,
    /// Bits of min-entropy per raw sample.
    pub source_min_entropy: f64,
    pub extraction_ratio: f64,
}

impl BitStream {
    pub fn from_bits(bits: &[bool], source_min_entropy: f64, extraction_ratio: f64) -> Self {
        let mut bytes = vec![0u8; bits.len().div_ceil(8)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 0x80 >> (i % 8);
            }
        }
        Self {
            bytes,
            n_bits: bits.len(),
            source_min_entropy,
            extraction_ratio,
        }
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n_bits).map(move |i| self.bit(i))
    }

    pub fn len(&self) -> usize {
        self.n_bits
    }

    /// Keeps the first `n` bits (no-op when already shorter).
    pub fn truncate(&mut self, n: usize) {
        if n >= self.n_bits {
            return;
        }
        self.n_bits = n;
        self.bytes.truncate(n.div_ceil(8));
        if !n.is_multiple_of(8) {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << (8 - n % 8);
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n_bits == 0
    }
}

/// Expands codes MSB first.
pub fn codes_to_bits(codes: &[u32], bits_per_sample: u32) -> Vec<bool> {
    codes
        .iter()
        .flat_map(|&c| (0..bits_per_sample).rev().map(move |k| (c >> k) & 1 == 1))
        .collect()
}

struct Toeplitz {
    /// Diagonal bits, little-endian within words.
    diag: Vec<u64>,
}

impl Toeplitz {
    fn new(seed: u64, rows: usize) -> Self {
        let n_bits = rows + EXTRACTOR_BLOCK_BITS; // one spare word of slack
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let diag = (0..n_bits.div_ceil(64) + 1)
            .map(|_| rng.next_u64())
            .collect();
        Self { diag }
    }

    /// 64 diagonal bits starting at bit `offset`.
    fn window(&self, offset: usize) -> u64 {
        let q = offset / 64;
        let s = offset % 64;
        if s == 0 {
            self.diag[q]
        } else {
            (self.diag[q] >> s) | (self.diag[q + 1] << (64 - s))
        }
    }

    /// `T x` over GF(2) for one block; `x.len() <= B`.
    fn apply(&self, x: &[bool], rows: usize) -> Vec<bool> {
        const WORDS: usize = EXTRACTOR_BLOCK_BITS / 64;
        // reversed[j] = x[B - 1 - j], zero where c >= x.len().
        let mut reversed = [0u64; WORDS];
        for (c, &b) in x.iter().enumerate() {
            if b {
                let j = EXTRACTOR_BLOCK_BITS - 1 - c;
                reversed[j / 64] |= 1 << (j % 64);
            }
        }
        (0..rows)
            .map(|r| {
                let acc =
                    (0..WORDS).fold(0u64, |acc, w| acc ^ (self.window(r + 64 * w) & reversed[w]));
                acc.count_ones() & 1 == 1
            })
            .collect()
    }
}

/// Seeded Toeplitz extraction of `floor(ratio * raw bits)` output bits.
///
/// `min_entropy` (bits per sample) bounds the ratio:
/// `ratio <= min_entropy / bits_per_sample`.
pub fn extract(
    codes: &[u32],
    bits_per_sample: u32,
    min_entropy: f64,
    ratio: f64,
    extractor_seed: u64,
) -> Result<BitStream> {
    let bound = min_entropy / bits_per_sample as f64;
    if !(ratio >= 0.0) || ratio > bound {
        return Err(Error::RatioAboveBound { ratio, bound });
    }
    let raw = codes_to_bits(codes, bits_per_sample);
    let out_len = |end: usize| (ratio * end as f64).floor() as usize;
    let max_rows = (ratio * EXTRACTOR_BLOCK_BITS as f64).ceil() as usize + 1;
    let toeplitz = Toeplitz::new(extractor_seed, max_rows);

    let blocks: Vec<Vec<bool>> = raw
        .par_chunks(EXTRACTOR_BLOCK_BITS)
        .enumerate()
        .map(|(i, chunk)| {
            let start = i * EXTRACTOR_BLOCK_BITS;
            let rows = out_len(start + chunk.len()) - out_len(start);
            toeplitz.apply(chunk, rows)
        })
        .collect();
    let bits: Vec<bool> = blocks.into_iter().flatten().collect();
    debug_assert_eq!(bits.len(), out_len(raw.len()));
    Ok(BitStream::from_bits(&bits, min_entropy, ratio))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomnessReport {
    pub n_bits: usize,
    pub monobit_z: f64,
    pub runs_z: f64,
    pub autocorrelation_z: f64,
    pub pass: bool,
}

/// Monobit, Wald-Wolfowitz runs and lag-1 autocorrelation z-scores.
/// Undefined statistics (constant input) are reported as NaN and fail.
pub fn randomness_checks(stream: &BitStream) -> Result<RandomnessReport> {
    let n = stream.len();
    if n < MIN_CHECK_BITS {
        return Err(Error::StreamTooShort {
            len: n,
            min: MIN_CHECK_BITS,
        });
    }
    let nf = n as f64;
    let ones = stream.bits().filter(|&b| b).count() as f64;
    let zeros = nf - ones;
    let monobit_z = (ones - 0.5 * nf) / (0.25 * nf).sqrt();

    let mut runs = 1.0;
    let mut prev = stream.bit(0);
    for b in stream.bits().skip(1) {
        if b != prev {
            runs += 1.0;
        }
        prev = b;
    }
    let runs_z = if ones == 0.0 || zeros == 0.0 {
        f64::NAN
    } else {
        let mu = 2.0 * ones * zeros / nf + 1.0;
        let var = 2.0 * ones * zeros * (2.0 * ones * zeros - nf) / (nf * nf * (nf - 1.0));
        (runs - mu) / var.sqrt()
    };

    // Centered lag-1 autocorrelation of the 0/1 sequence.
    let p = ones / nf;
    let denom = nf * p * (1.0 - p);
    let autocorrelation_z = if denom == 0.0 {
        f64::NAN
    } else {
        let mut num = 0.0;
        let mut prev = if stream.bit(0) { 1.0 - p } else { -p };
        for b in stream.bits().skip(1) {
            let cur = if b { 1.0 - p } else { -p };
            num += prev * cur;
            prev = cur;
        }
        num / denom * nf.sqrt()
    };

    let pass = [monobit_z, runs_z, autocorrelation_z]
        .iter()
        .all(|z| z.abs() < CHECK_Z_LIMIT);
    Ok(RandomnessReport {
        n_bits: n,
        monobit_z,
        runs_z,
        autocorrelation_z,
        pass,
    })
}

/// Quantise, account entropy for a matched Gaussian and extract.
/// `ratio = None` uses [`default_ratio`].
pub fn run_pipeline(
    series: &NoiseTimeSeries,
    adc: &AdcConfig,
    extractor_seed: u64,
    ratio: Option<f64>,
) -> Result<BitStream> {
    let codes = quantize(series, adc)?;
    let h_min = min_entropy(adc, 1.0)?;
    let ratio = ratio.unwrap_or_else(|| default_ratio(h_min, adc.bits));
    extract(&codes, adc.bits, h_min, ratio, extractor_seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiser_edges() {
        let adc = AdcConfig::default();
        let codes =
            quantize_values(&[0.0, 4.0, 100.0, -4.0, -100.0, -1e-12, 3.99], &adc, 1.0).unwrap();
        assert_eq!(codes[0], 128);
        assert_eq!(codes[1], 255);
        assert_eq!(codes[2], 255);
        assert_eq!(codes[3], 0);
        assert_eq!(codes[4], 0);
        assert_eq!(codes[5], 127);
        assert_eq!(codes[6], 255);
        assert!(matches!(
            quantize_values(&[1.0], &adc, 0.0),
            Err(Error::ZeroVariance)
        ));
        let flat = NoiseTimeSeries::new(vec![0.1; 10], 1.0, 0, "flat");
        assert!(matches!(quantize(&flat, &adc), Err(Error::ZeroVariance)));
    }

    #[test]
    fn adc_validation() {
        assert!(AdcConfig {
            bits: 0,
            full_scale_sigma: 4.0
        }
        .validate()
        .is_err());
        assert!(AdcConfig {
            bits: 25,
            full_scale_sigma: 4.0
        }
        .validate()
        .is_err());
        assert!(AdcConfig {
            bits: 8,
            full_scale_sigma: 0.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn one_bit_entropy_is_one() {
        let h = min_entropy(
            &AdcConfig {
                bits: 1,
                full_scale_sigma: 4.0,
            },
            1.0,
        )
        .unwrap();
        assert!((h - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_grows_one_bit_per_bit() {
        let mut prev = min_entropy(
            &AdcConfig {
                bits: 8,
                full_scale_sigma: 4.0,
            },
            1.0,
        )
        .unwrap();
        for bits in 9..=16 {
            let h = min_entropy(
                &AdcConfig {
                    bits,
                    full_scale_sigma: 4.0,
                },
                1.0,
            )
            .unwrap();
            // Halving the central bin halves its mass up to O(step^2).
            assert!((h - prev - 1.0).abs() < 1e-3, "{bits}: {h} vs {prev}");
            prev = h;
        }
    }

    #[test]
    fn extraction_length_and_bound() {
        let codes: Vec<u32> = (0..125_000u32)
            .map(|i| i.wrapping_mul(2_654_435_761) >> 24)
            .collect();
        // 10^6 raw bits at ratio 0.75.
        let out = extract(&codes, 8, 6.3, 0.75, 9).unwrap();
        assert_eq!(out.len(), 750_000);
        assert!(matches!(
            extract(&codes, 8, 6.3, 0.8, 9),
            Err(Error::RatioAboveBound { .. })
        ));
    }

    #[test]
    fn checks_reject_degenerate_streams() {
        let zeros = BitStream::from_bits(&vec![false; 200_000], 1.0, 1.0);
        let r = randomness_checks(&zeros).unwrap();
        assert!(!r.pass);
        assert!(r.monobit_z.abs() > 100.0);

        let alt: Vec<bool> = (0..200_000).map(|i| i % 2 == 1).collect();
        let r = randomness_checks(&BitStream::from_bits(&alt, 1.0, 1.0)).unwrap();
        assert!(r.monobit_z.abs() < 1e-9);
        assert!(r.runs_z.abs() > 100.0);
        assert!(!r.pass);

        let short = BitStream::from_bits(&[true; 10], 1.0, 1.0);
        assert!(matches!(
            randomness_checks(&short),
            Err(Error::StreamTooShort { .. })
        ));
    }

    #[test]
    fn packing_is_msb_first() {
        let s = BitStream::from_bits(
            &[true, false, false, false, false, false, false, true, true],
            1.0,
            1.0,
        );
        assert_eq!(s.bytes, vec![0x81, 0x80]);
        assert_eq!(codes_to_bits(&[0b101], 3), vec![true, false, true]);
        let mut t = BitStream::from_bits(&[true; 12], 1.0, 1.0);
        t.truncate(9);
        assert_eq!((t.len(), t.bytes.clone()), (9, vec![0xff, 0x80]));
    }
}
