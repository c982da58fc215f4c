//! Parking schemes: the placement process of linear probing with wraparound,
//! per-place try counts (profiles), and block decompositions.
//!
//! Places are `1..=m` with place `m + 1` identified with place `1`. Car `i`
//! first tries `tries[i]` and probes forward until it finds an empty place.
//! Internal storage is 0-indexed; every public value is 1-indexed.

use crate::error::{Error, Result};
use crate::rng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// A parking scheme: `m` places, ordered first tries, derived placements.
///
/// Invariants enforced at construction: `n < m`, every try in `1..=m`,
/// placements pairwise distinct and consistent with the probing rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParkingScheme {
    m: usize,
    tries: Vec<usize>,
    placements: Vec<usize>,
    occupied: Vec<bool>,
}

/// Per-place try counts `h[k] =` number of cars that tried place `k + 1`,
/// successfully or not. `h[k] == 0` exactly at empty places.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub h: Vec<usize>,
}

/// A maximal circular run of occupied places.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    /// First place of the run, 1-indexed.
    pub start: usize,
    pub size: usize,
}

/// Blocks of a scheme with the two orderings used throughout: sizes sorted
/// descending (the B-statistics) and sizes by increasing date of birth,
/// the birth of a block being the smallest arrival index among its cars
/// (the R-statistics).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    /// Blocks in circular order, ascending by start place.
    pub blocks: Vec<Block>,
    /// Sizes sorted descending.
    pub sorted_sizes: Vec<usize>,
    /// Sizes ordered by the earliest car-arrival index within each block.
    pub birth_order_sizes: Vec<usize>,
}

/// Union-find over places where `find(p)` is the next free place at or after
/// `p` in circular order. Occupying a place links it to its successor.
struct NextFree {
    parent: Vec<usize>,
}

impl NextFree {
    fn new(m: usize) -> Self {
        NextFree {
            parent: (0..m).collect(),
        }
    }

    fn find(&mut self, mut p: usize) -> usize {
        while self.parent[p] != p {
            self.parent[p] = self.parent[self.parent[p]];
            p = self.parent[p];
        }
        p
    }

    fn occupy(&mut self, p: usize) {
        let m = self.parent.len();
        self.parent[p] = (p + 1) % m;
    }
}

fn check_tries(m: usize, tries: &[usize]) -> Result<()> {
    if tries.len() >= m {
        return Err(Error::TableOverflow {
            m,
            n: tries.len(),
        });
    }
    for (car, &t) in tries.iter().enumerate() {
        if t < 1 || t > m {
            return Err(Error::TryOutOfRange {
                car: car + 1,
                place: t,
                m,
            });
        }
    }
    Ok(())
}

/// Runs the placement process. Deterministic; O(n alpha(m)) via a next-free
/// union-find, so large tables do not pay for long probe sequences.
pub fn park(m: usize, tries: &[usize]) -> Result<ParkingScheme> {
    check_tries(m, tries)?;
    let mut free = NextFree::new(m);
    let mut occupied = vec![false; m];
    let mut placements = Vec::with_capacity(tries.len());
    for &t in tries {
        let p = free.find(t - 1);
        occupied[p] = true;
        free.occupy(p);
        placements.push(p + 1);
    }
    Ok(ParkingScheme {
        m,
        tries: tries.to_vec(),
        placements,
        occupied,
    })
}

/// Reference implementation that probes place by place. Kept as the
/// differential oracle for [`park`].
pub fn park_naive(m: usize, tries: &[usize]) -> Result<ParkingScheme> {
    check_tries(m, tries)?;
    let mut occupied = vec![false; m];
    let mut placements = Vec::with_capacity(tries.len());
    for &t in tries {
        let mut p = t - 1;
        while occupied[p] {
            p = (p + 1) % m;
        }
        occupied[p] = true;
        placements.push(p + 1);
    }
    Ok(ParkingScheme {
        m,
        tries: tries.to_vec(),
        placements,
        occupied,
    })
}

/// Scheme with `n` i.i.d. uniform first tries drawn from stream 0 of the
/// seeded generator. Identical `(m, n, seed)` give identical schemes on
/// every platform.
pub fn simulate_uniform(m: usize, n: usize, seed: u64) -> Result<ParkingScheme> {
    simulate_uniform_rng(m, n, &mut rng::replica_rng(seed, 0))
}

/// Same as [`simulate_uniform`] but drawing from a caller-owned generator,
/// for replica-parallel runs.
pub fn simulate_uniform_rng(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<ParkingScheme> {
    if n >= m {
        return Err(Error::TableOverflow { m, n });
    }
    let tries: Vec<usize> = (0..n).map(|_| rng::uniform_place(rng, m)).collect();
    park(m, &tries)
}

impl ParkingScheme {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.tries.len()
    }

    /// Number of empty places, `l = m - n`.
    pub fn empties(&self) -> usize {
        self.m - self.tries.len()
    }

    pub fn tries(&self) -> &[usize] {
        &self.tries
    }

    pub fn placements(&self) -> &[usize] {
        &self.placements
    }

    /// Occupancy of place `p` (1-indexed).
    pub fn is_occupied(&self, p: usize) -> bool {
        self.occupied[p - 1]
    }

    pub fn occupied_mask(&self) -> &[bool] {
        &self.occupied
    }

    /// Place `m` empty, so no block wraps.
    pub fn is_confined(&self) -> bool {
        !self.occupied[self.m - 1]
    }

    /// Circular probe distance from first try to placement, plus one, summed
    /// over cars: the total probe count.
    pub fn total_probes(&self) -> usize {
        self.tries
            .iter()
            .zip(&self.placements)
            .map(|(&t, &p)| (p + self.m - t) % self.m + 1)
            .sum()
    }

    /// The profile, counted directly from `(try, placement)` pairs: car `i`
    /// visits the circular interval from its try to its placement.
    pub fn profile(&self) -> Profile {
        let m = self.m;
        // Difference array over the circle.
        let mut diff = vec![0i64; m + 1];
        for (&t, &p) in self.tries.iter().zip(&self.placements) {
            let (a, b) = (t - 1, p - 1);
            if a <= b {
                diff[a] += 1;
                diff[b + 1] -= 1;
            } else {
                diff[a] += 1;
                diff[m] -= 1;
                diff[0] += 1;
                diff[b + 1] -= 1;
            }
        }
        let mut h = Vec::with_capacity(m);
        let mut acc = 0i64;
        for d in diff.iter().take(m) {
            acc += d;
            h.push(acc as usize);
        }
        Profile { h }
    }

    /// Block decomposition with B- and R-orderings.
    pub fn blocks(&self) -> BlockDecomposition {
        let m = self.m;
        let mut blocks: Vec<Block> = Vec::new();
        let mut owner = vec![usize::MAX; m];

        // Scan from the first empty place so runs never straddle the seam.
        let first_empty = match self.occupied.iter().position(|&o| !o) {
            Some(e) => e,
            None => unreachable!("n < m guarantees an empty place"),
        };
        let mut run_start = None;
        for step in 1..=m {
            let p = (first_empty + step) % m;
            if self.occupied[p] {
                if run_start.is_none() {
                    run_start = Some(p);
                }
                owner[p] = blocks.len();
            } else if let Some(s) = run_start.take() {
                let size = (p + m - s) % m;
                blocks.push(Block { start: s + 1, size });
            }
        }
        debug_assert!(run_start.is_none());
        blocks.sort_by_key(|b| b.start);
        // owner[] holds pre-sort ids; rebuild it against the sorted order.
        let mut owner_sorted = vec![usize::MAX; m];
        for (id, b) in blocks.iter().enumerate() {
            for k in 0..b.size {
                owner_sorted[(b.start - 1 + k) % m] = id;
            }
        }

        let mut birth = vec![usize::MAX; blocks.len()];
        for (car, &p) in self.placements.iter().enumerate() {
            let id = owner_sorted[p - 1];
            if car < birth[id] {
                birth[id] = car;
            }
        }

        let mut sorted_sizes: Vec<usize> = blocks.iter().map(|b| b.size).collect();
        sorted_sizes.sort_unstable_by(|a, b| b.cmp(a));

        let mut by_birth: Vec<(usize, usize)> = blocks
            .iter()
            .enumerate()
            .map(|(id, b)| (birth[id], b.size))
            .collect();
        by_birth.sort_unstable();
        let birth_order_sizes = by_birth.into_iter().map(|(_, s)| s).collect();

        BlockDecomposition {
            blocks,
            sorted_sizes,
            birth_order_sizes,
        }
    }
}

impl BlockDecomposition {
    /// Size of the block containing place `p` (1-indexed), or 0 if `p` is empty.
    pub fn size_at(&self, p: usize, m: usize) -> usize {
        self.blocks
            .iter()
            .find(|b| (p + m - b.start) % m < b.size)
            .map_or(0, |b| b.size)
    }

    pub fn largest(&self) -> usize {
        self.sorted_sizes.first().copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.sorted_sizes.iter().sum()
    }
}

/// Block decompositions of the schemes built from the first `n(i)` tries, for
/// each checkpoint `n(i)`. Checkpoints must be strictly increasing and < m.
pub fn arrival_trajectory(
    m: usize,
    tries: &[usize],
    checkpoints: &[usize],
) -> Result<Vec<BlockDecomposition>> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints.iter().any(|&c| c >= m) {
        return Err(Error::BadCheckpoints);
    }
    if let Some(&last) = checkpoints.last() {
        if last > tries.len() {
            return Err(Error::BadCheckpoints);
        }
    }
    // Suffix consistency is cheapest to guarantee by just replaying prefixes.
    checkpoints
        .iter()
        .map(|&c| Ok(park(m, &tries[..c])?.blocks()))
        .collect()
}

impl Serialize for ParkingScheme {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let decomp = self.blocks();
        let blocks: Vec<(usize, usize)> =
            decomp.blocks.iter().map(|b| (b.start, b.size)).collect();
        let mut s = serializer.serialize_struct("ParkingScheme", 4)?;
        s.serialize_field("m", &self.m)?;
        s.serialize_field("tries", &self.tries)?;
        s.serialize_field("placements", &self.placements)?;
        s.serialize_field("blocks", &blocks)?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_try_succeeds_on_empty_table() {
        let s = park(2, &[1]).unwrap();
        assert_eq!(s.placements(), &[1]);
    }

    #[test]
    fn probing_walks_past_occupied_places() {
        let s = park(4, &[1, 1, 3]).unwrap();
        assert_eq!(s.placements(), &[1, 2, 3]);
        let s = park(3, &[2, 2]).unwrap();
        assert_eq!(s.placements(), &[2, 3]);
    }

    #[test]
    fn probing_wraps_around() {
        let s = park(4, &[4, 4, 4]).unwrap();
        assert_eq!(s.placements(), &[4, 1, 2]);
    }

    #[test]
    fn overflow_and_range_errors() {
        assert!(matches!(
            park(3, &[1, 2, 3]),
            Err(Error::TableOverflow { m: 3, n: 3 })
        ));
        assert!(matches!(
            park(3, &[1, 4]),
            Err(Error::TryOutOfRange { car: 2, place: 4, m: 3 })
        ));
        assert!(park(3, &[1, 0]).is_err());
        assert!(simulate_uniform(5, 5, 0).is_err());
    }

    #[test]
    fn profile_counts_probes() {
        assert_eq!(park(4, &[1, 1, 3]).unwrap().profile().h, vec![2, 1, 1, 0]);
        assert_eq!(park(3, &[]).unwrap().profile().h, vec![0, 0, 0]);
        assert_eq!(park(3, &[1, 1]).unwrap().profile().h, vec![2, 1, 0]);
    }

    #[test]
    fn profile_mass_is_total_probe_count() {
        let s = park(7, &[2, 2, 2, 6, 7, 1]).unwrap();
        let h_sum: usize = s.profile().h.iter().sum();
        assert_eq!(h_sum, s.total_probes());
    }

    #[test]
    fn profile_zero_iff_empty() {
        let s = park(10, &[1, 1, 1, 5, 9, 9]).unwrap();
        let p = s.profile();
        for k in 1..=10 {
            assert_eq!(p.h[k - 1] == 0, !s.is_occupied(k));
        }
    }

    #[test]
    fn blocks_of_small_schemes() {
        let d = park(4, &[1, 1, 3]).unwrap().blocks();
        assert_eq!(d.blocks, vec![Block { start: 1, size: 3 }]);
        assert_eq!(d.sorted_sizes, vec![3]);

        let d = park(5, &[1, 4]).unwrap().blocks();
        assert_eq!(
            d.blocks,
            vec![Block { start: 1, size: 1 }, Block { start: 4, size: 1 }]
        );

        let d = park(3, &[]).unwrap().blocks();
        assert!(d.blocks.is_empty());
    }

    #[test]
    fn figure_one_orderings() {
        // A (10, 7) scheme with sorted sizes (3, 3, 1) whose blocks were born
        // in the order big, single, big: R = (3, 1, 3).
        let s = park(10, &[1, 1, 1, 5, 7, 7, 7]).unwrap();
        let d = s.blocks();
        assert_eq!(d.sorted_sizes, vec![3, 3, 1]);
        assert_eq!(d.birth_order_sizes, vec![3, 1, 3]);
    }

    #[test]
    fn wrapped_block_is_one_run() {
        // Cars at 9, 10, 1 on m = 10: one block of 3 starting at 9.
        let s = park(10, &[9, 9, 9]).unwrap();
        let d = s.blocks();
        assert_eq!(d.blocks, vec![Block { start: 9, size: 3 }]);
        assert_eq!(s.placements(), &[9, 10, 1]);
    }

    #[test]
    fn trajectory_matches_direct_blocks() {
        let sizes: Vec<Vec<usize>> = arrival_trajectory(4, &[1, 1, 3], &[1, 2, 3])
            .unwrap()
            .iter()
            .map(|d| d.sorted_sizes.clone())
            .collect();
        assert_eq!(sizes, vec![vec![1], vec![2], vec![3]]);

        assert!(arrival_trajectory(4, &[1, 1, 3], &[]).unwrap().is_empty());

        let one = arrival_trajectory(6, &[2, 2, 5], &[3]).unwrap();
        assert_eq!(one[0], park(6, &[2, 2, 5]).unwrap().blocks());

        assert!(arrival_trajectory(4, &[1, 1], &[2, 2]).is_err());
        assert!(arrival_trajectory(4, &[1, 1], &[4]).is_err());
    }

    #[test]
    fn trajectory_growth_is_monotone() {
        // Each arrival adds a singleton, grows a block, or merges two blocks
        // plus the new car.
        let m = 40;
        let mut rng = crate::rng::replica_rng(11, 0);
        let tries: Vec<usize> = (0..m - 1).map(|_| crate::rng::uniform_place(&mut rng, m)).collect();
        let checkpoints: Vec<usize> = (1..m).collect();
        let traj = arrival_trajectory(m, &tries, &checkpoints).unwrap();
        let mut prev: Vec<usize> = vec![];
        for d in &traj {
            let cur = d.sorted_sizes.clone();
            let mut diff = cur.clone();
            for s in &prev {
                if let Some(pos) = diff.iter().position(|x| x == s) {
                    diff.remove(pos);
                }
            }
            let removed = prev.len() + 1 - cur.len();
            match removed {
                0 => assert_eq!(diff, vec![1]),
                1 => {
                    // one block replaced: grew by one
                    assert_eq!(diff.len(), 1);
                }
                2 => {
                    // two blocks merged with the new car
                    assert_eq!(diff.len(), 1);
                }
                _ => panic!("more than two blocks vanished in one arrival"),
            }
            prev = cur;
        }
    }

    #[test]
    fn simulation_is_deterministic_and_conserves_mass() {
        let a = simulate_uniform(100, 80, 42).unwrap();
        let b = simulate_uniform(100, 80, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_uniform(100, 80, 43).unwrap());

        let empty = simulate_uniform(10, 0, 5).unwrap();
        assert_eq!(empty.n(), 0);

        let s = simulate_uniform(10_000, 10_000 - 100, 7).unwrap();
        assert_eq!(s.blocks().total(), s.n());
        assert_eq!(s.occupied_mask().iter().filter(|&&o| !o).count(), 100);
    }

    #[test]
    fn scheme_json_shape() {
        let s = park(4, &[1, 1, 3]).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "m": 4,
                "tries": [1, 1, 3],
                "placements": [1, 2, 3],
                "blocks": [[1, 3]],
            })
        );
    }

    fn rotate_tries(m: usize, tries: &[usize], r: usize) -> Vec<usize> {
        tries.iter().map(|&t| (t - 1 + r) % m + 1).collect()
    }

    proptest! {
        #[test]
        fn union_find_matches_naive(m in 2usize..40, seed in 0u64..500) {
            let mut rng = crate::rng::replica_rng(seed, 0);
            let n = crate::rng::uniform_below(&mut rng, m as u64) as usize;
            let tries: Vec<usize> = (0..n).map(|_| crate::rng::uniform_place(&mut rng, m)).collect();
            let fast = park(m, &tries).unwrap();
            let slow = park_naive(m, &tries).unwrap();
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn empties_and_block_mass(m in 2usize..60, seed in 0u64..500) {
            let mut rng = crate::rng::replica_rng(seed, 1);
            let n = crate::rng::uniform_below(&mut rng, m as u64) as usize;
            let s = simulate_uniform_rng(m, n, &mut rng).unwrap();
            prop_assert_eq!(s.empties(), m - n);
            let d = s.blocks();
            prop_assert_eq!(d.total(), n);
            // every block flanked by empties
            for b in &d.blocks {
                let before = (b.start + m - 2) % m + 1;
                let after = (b.start + b.size - 1) % m + 1;
                prop_assert!(!s.is_occupied(before));
                prop_assert!(!s.is_occupied(after));
            }
        }

        #[test]
        fn rotation_equivariance(m in 2usize..40, r in 0usize..40, seed in 0u64..200) {
            let r = r % m;
            let mut rng = crate::rng::replica_rng(seed, 2);
            let n = crate::rng::uniform_below(&mut rng, m as u64) as usize;
            let tries: Vec<usize> = (0..n).map(|_| crate::rng::uniform_place(&mut rng, m)).collect();
            let base = park(m, &tries).unwrap();
            let rot = park(m, &rotate_tries(m, &tries, r)).unwrap();
            // placements rotate
            let rotated: Vec<usize> =
                base.placements().iter().map(|&p| (p - 1 + r) % m + 1).collect();
            prop_assert_eq!(rot.placements(), &rotated[..]);
            // profile rotates
            let base_h = base.profile().h;
            let rot_h = rot.profile().h;
            for k in 0..m {
                prop_assert_eq!(rot_h[(k + r) % m], base_h[k]);
            }
            // sorted block sizes unchanged, starts rotate
            let db = base.blocks();
            let dr = rot.blocks();
            prop_assert_eq!(&db.sorted_sizes, &dr.sorted_sizes);
            let mut starts: Vec<usize> =
                db.blocks.iter().map(|b| (b.start - 1 + r) % m + 1).collect();
            starts.sort_unstable();
            let rot_starts: Vec<usize> = dr.blocks.iter().map(|b| b.start).collect();
            prop_assert_eq!(starts, rot_starts);
        }
    }
}
