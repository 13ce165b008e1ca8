use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Normal};

use super::model::KennModel;
use super::schema::FeatureSchema;
use super::CooperationRecord;
use crate::error::{CoosError, Result};

/// Hidden width of generator models.
const GENERATOR_WIDTH: usize = 4;
/// Standard deviation every generator block score is calibrated to.
const BLOCK_SCORE_SD: f64 = 0.6;

/// Draws a random generator model and `n` records from it. Features are
/// standard normal; traits are standard normal except a trait named `gender`,
/// which is 0/1. Each generator block is rescaled so its score has mean 0 and
/// a common spread over the drawn inputs, so that every determinant carries
/// signal. The rate is the generator output plus Gaussian noise, clipped to
/// [0,1].
pub fn generate_synthetic_corpus(
    schema: &FeatureSchema,
    seed: u64,
    n: usize,
    noise_sd: f64,
) -> Result<(Vec<CooperationRecord>, KennModel)> {
    if n == 0 {
        return Err(CoosError::domain("corpus size must be >= 1"));
    }
    if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
        return Err(CoosError::domain("noise sd must be finite and >= 0"));
    }
    let mut generator = KennModel::random(schema.clone(), GENERATOR_WIDTH, seed, 1.0, 0.25)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    // combination weights spread over [0.5, 1.5)
    for g in 0..generator.groups() {
        let target: f64 = 0.5 + rng.gen::<f64>();
        generator.set_combination_raw(g, target.exp_m1().ln());
    }
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let coin = Bernoulli::new(0.5).expect("fair coin");
    let gender = schema.trait_index("gender");
    let mut corpus: Vec<CooperationRecord> = (0..n)
        .map(|_| {
            let features = (0..schema.feature_count()).map(|_| std.sample(&mut rng)).collect();
            let traits = (0..schema.trait_count())
                .map(|i| {
                    if Some(i) == gender {
                        f64::from(u8::from(coin.sample(&mut rng)))
                    } else {
                        std.sample(&mut rng)
                    }
                })
                .collect();
            CooperationRecord {
                features,
                traits,
                rate: 0.0,
            }
        })
        .collect();

    let scores: Vec<Vec<f64>> = corpus.iter().map(|r| generator.trace(r).scores).collect();
    for g in 0..generator.groups() {
        let mean = scores.iter().map(|s| s[g]).sum::<f64>() / n as f64;
        let var = scores.iter().map(|s| (s[g] - mean).powi(2)).sum::<f64>() / n as f64;
        let factor = if var > 0.0 { BLOCK_SCORE_SD / var.sqrt() } else { 1.0 };
        generator.rescale_block(g, factor, -mean * factor);
    }

    for rec in &mut corpus {
        let noise = if noise_sd > 0.0 {
            noise_sd * std.sample(&mut rng)
        } else {
            0.0
        };
        rec.rate = (generator.trace(rec).rate + noise).clamp(0.0, 1.0);
    }
    Ok((corpus, generator))
}
