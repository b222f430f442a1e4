//! Shared fixtures for the criterion benches.

use jplt::protocol::{DemandSpec, Mode, QueryKey};
use jplt::{Dataset, PrimeField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A random demand, key and dataset for the given shape.
pub fn instance(
    p: u64,
    m: usize,
    k: usize,
    d: usize,
    l: usize,
    mode: Mode,
    seed: u64,
) -> (DemandSpec, QueryKey, Dataset) {
    let field = PrimeField::new(p).expect("prime modulus");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let demand = DemandSpec::random_grs(field, k, d, l, &mut rng).expect("valid shape");
    let key = QueryKey::sample(&demand, mode, &mut rng).expect("field large enough");
    let data = Dataset::random(field, m, k, &mut rng).expect("valid dataset");
    (demand, key, data)
}
