//! Deterministic per-replica random streams.
//!
//! Replica `i` of an experiment keyed by `master_seed` draws from ChaCha8
//! with key `seed_from_u64(master_seed)` (the PCG32 expansion defined by
//! `rand_core`) and stream id `i`, starting at word position 0. ChaCha is
//! counter based, so the `2^64` stream ids give non-overlapping sequences and
//! the result of a replica does not depend on which thread ran it or when.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ReplicaRng = ChaCha8Rng;

pub fn derive_stream(master_seed: u64, replica_index: u64) -> ReplicaRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica_index);
    rng
}
