//! Embedded reference data: the expected certifying primes and orbit shapes
//! for the 23 hard values in the k <= 10000 search, and the expected prime
//! set Sigma below 2000. Used by the `table1` diff and by the test suite.

/// (k, certifying prime p, tail length, cycle length, exceptional tail
/// levels), sorted by k.
pub const TABLE1: [(u64, u64, usize, usize, &[usize]); 23] = [
    (444, 61, 0, 4, &[]),
    (840, 197, 1, 84, &[]),
    (1620, 37, 0, 36, &[]),
    (1764, 83, 0, 60, &[]),
    (3000, 13, 1, 12, &[]),
    (3336, 37, 2, 6, &[2]),
    (4176, 13, 1, 12, &[]),
    (4224, 19, 0, 6, &[]),
    (4620, 41, 4, 4, &[1, 2]),
    (4704, 43, 2, 6, &[]),
    (5184, 13, 1, 12, &[]),
    (5904, 31, 3, 4, &[1, 2]),
    (6240, 17, 4, 4, &[1]),
    (6384, 37, 4, 2, &[2, 3]),
    (6996, 71, 2, 4, &[1]),
    (7224, 17, 4, 4, &[1]),
    (7620, 31, 2, 4, &[1]),
    (7836, 13, 1, 12, &[]),
    (7956, 83, 1, 60, &[]),
    (8004, 31, 2, 4, &[1]),
    (8316, 19, 0, 6, &[]),
    (9720, 131, 3, 12, &[]),
    (9804, 29, 1, 12, &[]),
];

/// The 55 integers k <= 10000 that the fixed-point rule does not reach.
pub const FIXEDPOINT_SURVIVORS_10000: [u64; 55] = [
    36, 120, 144, 216, 444, 840, 876, 1056, 1224, 1620, 1764, 1884, 2520, 3000, 3024, 3336,
    3480, 3564, 3576, 3840, 4176, 4224, 4344, 4404, 4620, 4704, 4896, 5004, 5184, 5244, 5400,
    5580, 5820, 5904, 6216, 6240, 6384, 6744, 6996, 7176, 7224, 7440, 7620, 7836, 7956, 8004,
    8016, 8100, 8316, 9024, 9456, 9516, 9720, 9780, 9804,
];

/// Expected primes in Sigma below 2000 (primes dividing some a_n for k = 1).
pub const SIGMA_PRIMES_2000: [u64; 16] = [
    2, 5, 29, 41, 89, 101, 109, 269, 421, 509, 521, 709, 929, 941, 1549, 1861,
];

/// Recorded first-hit level for 929 in the reference material. The exact
/// pair recursion mod 929 gives 41 instead; see the test suite.
pub const SIGMA_FIRST_HIT_929_RECORDED: usize = 42;
