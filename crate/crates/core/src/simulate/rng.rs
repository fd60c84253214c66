//! Seeded random streams keyed by (master seed, trial index, purpose).
//!
//! Each key is a ChaCha8 key built from the seed and the trial index; the
//! purpose selects the ChaCha stream id. Streams never overlap, so a trial's
//! draws do not depend on which other trials run or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    /// Real samples seen by the classifier.
    RealTrain = 1,
    /// Independent real samples used to fit the generator.
    GeneratorTrain = 2,
    /// Synthetic features, class labels and label flips.
    Synthetic = 3,
    /// Verifier keep decisions.
    Prune = 4,
    /// Fresh evaluation points.
    Test = 5,
    /// Train/test permutation for tabular data.
    Split = 6,
}

pub fn stream(seed: u64, trial: u64, purpose: Purpose) -> SimRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(purpose as u64);
    rng
}
