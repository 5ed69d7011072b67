//! Reproducible random streams.
//!
//! Every replication draws from its own ChaCha stream, keyed by the run seed
//! and the role the numbers play (field noise, mixture shift, ...), with the
//! replication index selecting the stream within that key. Results therefore
//! depend only on `(seed, rep, role)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. Distinct roles never share numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    Field,
    Shift,
    Fbm,
    FbmSecond,
    Tilt,
    Oracle,
}

impl StreamRole {
    fn tag(self) -> u64 {
        match self {
            StreamRole::Field => 0x6669_656c_6400_0001,
            StreamRole::Shift => 0x7368_6966_7400_0002,
            StreamRole::Fbm => 0x6662_6d00_0000_0003,
            StreamRole::FbmSecond => 0x6662_6d32_0000_0004,
            StreamRole::Tilt => 0x7469_6c74_0000_0005,
            StreamRole::Oracle => 0x6f72_6163_6c65_0006,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for replication `rep` of a run seeded with `seed`.
pub fn stream(seed: u64, rep: u64, role: StreamRole) -> StreamRng {
    let mut state = seed ^ role.tag();
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(rep);
    rng
}
