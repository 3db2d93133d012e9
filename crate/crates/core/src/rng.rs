//! The one random generator used everywhere: ChaCha8 from `rand_chacha`,
//! seeded through `SeedableRng::seed_from_u64`. Bounded integers come from
//! `Rng::random_range`, unit floats from `Rng::random::<f64>()`.

use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Durstenfeld's Fisher–Yates: for `i` from `n-1` down to 1 swap `i` with a
/// uniform `j` in `0..=i`.
pub fn fisher_yates<T, R: Rng + ?Sized>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn shuffle_is_a_permutation() {
        let mut v: Vec<u32> = (0..50).collect();
        fisher_yates(&mut v, &mut seeded(9));
        assert_ne!(v, (0..50).collect::<Vec<_>>());
        v.sort_unstable();
        assert_eq!(v, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn same_seed_same_order() {
        let mut a: Vec<u32> = (0..20).collect();
        let mut b = a.clone();
        fisher_yates(&mut a, &mut seeded(1));
        fisher_yates(&mut b, &mut seeded(1));
        assert_eq!(a, b);
    }
}
