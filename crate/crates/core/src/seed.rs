//! Seed derivation.
//!
//! Every random draw in an experiment comes from one master seed. A ChaCha8
//! generator is keyed with the master seed and switched to stream
//! `(purpose << 32) | index`, so repetition `r` of the training-set draw uses
//! stream `(Repetition << 32) | r`. Streams never overlap and a repetition's
//! draws do not depend on how many other repetitions ran before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tag occupying the high 32 bits of the stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    TestSplit = 1,
    TrainSplit = 2,
    Repetition = 3,
    Probe = 4,
    Synthetic = 5,
    ClassifierSample = 6,
    Replacement = 7,
}

pub fn rng(master: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((stream as u64) << 32) | (index & 0xffff_ffff));
    rng
}
