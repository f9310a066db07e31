use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Round-half-up for non-negative targets.
pub(crate) fn round_half_up(x: f64) -> usize {
    debug_assert!(x >= 0.0);
    (x + 0.5).floor() as usize
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_halves_up() {
        assert_eq!(round_half_up(0.5), 1);
        assert_eq!(round_half_up(2.5), 3);
        assert_eq!(round_half_up(888.888), 889);
        assert_eq!(round_half_up(0.2 * 990.0), 198);
        assert_eq!(round_half_up(0.0), 0);
    }
}
