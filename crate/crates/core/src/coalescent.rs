//! The discrete additive coalescent, built three ways and equal path by
//! path, not just in law:
//!
//! * (a) a random rooted tree shape whose edges are deleted one by one in
//!   uniform random order;
//! * (b) a labeled tree fragmented deterministically: cut the father edge of
//!   `v_{m-1}`, then `v_{m-2}`, and so on, each cut vertex becoming a new
//!   root inserted right after the root of the tree it was cut from;
//! * (c) the parking arrival process read through the forest correspondence
//!   and reversed in time.
//!
//! Labeling the shape of (a) by deletion order (the child endpoint of the
//! k-th deleted edge becomes `v_{m-k}`) turns it into (b), and the forest of
//! the scheme built from the first `k` tries of (b)'s image equals the k-th
//! forest of (b). States carry the mass convention `block size + 1` (each
//! fragment owns the empty place at its right), under which the next-arrival
//! merge kernel is the additive one: masses `x`, `y` merge with probability
//! `(x + y) / (m (l - 1))`.

use crate::bijections::LabeledTree;
use crate::coupling::centered_counts;
use crate::error::{Error, Result};
use crate::exact::{merge_probability, ExactProbability};
use crate::parking::park;
use crate::rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Whether chain states are block sizes (summing to the car count) or
/// node-count masses `size + 1` (summing to `m` at every step).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MassConvention {
    Raw,
    PlusOne,
}

/// Fragment masses over parking time `k = 0..m-1`: `states[k]` is the state
/// with `k` cars arrived, equivalently `m - 1 - k` edges cut. Chains from
/// labeled constructions keep root order; shape-based chains are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoalescentChain {
    pub m: usize,
    pub convention: MassConvention,
    pub root_ordered: bool,
    pub states: Vec<Vec<usize>>,
}

impl CoalescentChain {
    /// States as sorted multisets (ascending), the representation shared by
    /// all three constructions.
    pub fn sorted_states(&self) -> Vec<Vec<usize>> {
        let mut out = self.states.clone();
        for s in &mut out {
            s.sort_unstable();
        }
        out
    }

    /// Chain in the raw block-size convention (masses minus one, so state
    /// `k` sums to `k`; zero entries are the bare roots).
    pub fn raw_states(&self) -> Vec<Vec<usize>> {
        match self.convention {
            MassConvention::Raw => self.states.clone(),
            MassConvention::PlusOne => self
                .states
                .iter()
                .map(|s| s.iter().map(|&x| x - 1).collect())
                .collect(),
        }
    }
}

/// Disjoint-set over vertices with component sizes, for the shape chain.
struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Deterministic fragmentation of a labeled tree per the father-edge cut
/// sequence: states are node-count masses in root order, from the intact
/// tree (parking time `m - 1`) down to `m` singletons (time 0).
pub fn fragmentation_chain_deterministic(tree: &LabeledTree) -> CoalescentChain {
    let m = tree.k;
    let mut children = tree.children();
    let mut parent: Vec<usize> = (1..=m).map(|v| tree.parent_of(v).unwrap_or(0)).collect();
    // ordered root list r_1, r_2, ..; starts as just the old root v_m
    let mut roots: Vec<usize> = vec![m];
    let mut sizes: Vec<usize> = vec![m];
    let mut states_rev: Vec<Vec<usize>> = Vec::with_capacity(m);
    states_rev.push(sizes.clone());

    for cut in 1..m {
        let v = m - cut;
        // subtree size of v under the cuts made so far
        let mut sub = 0usize;
        let mut stack = vec![v];
        while let Some(w) = stack.pop() {
            sub += 1;
            stack.extend_from_slice(&children[w]);
        }
        // root of the tree currently containing v
        let mut r = v;
        while parent[r - 1] != 0 {
            r = parent[r - 1];
        }
        let i = roots.iter().position(|&x| x == r).expect("root is tracked");
        // detach v and insert it as the root right after r_i
        let p = parent[v - 1];
        children[p].retain(|&c| c != v);
        parent[v - 1] = 0;
        sizes[i] -= sub;
        roots.insert(i + 1, v);
        sizes.insert(i + 1, sub);
        states_rev.push(sizes.clone());
    }
    states_rev.reverse();
    CoalescentChain {
        m,
        convention: MassConvention::PlusOne,
        root_ordered: true,
        states: states_rev,
    }
}

/// Fragmentation of a tree shape by deleting its edges in the given order
/// (each edge named by its child endpoint). States are sorted masses; the
/// second return is the relabeled tree in which the child of the k-th
/// deleted edge is `v_{m-k}`, whose deterministic chain is the same.
pub fn fragmentation_chain_with_order(
    shape: &LabeledTree,
    deletion_order: &[usize],
) -> Result<(CoalescentChain, LabeledTree)> {
    let m = shape.k;
    if deletion_order.len() + 1 != m {
        return Err(Error::InvalidTree("deletion order must cover all edges".into()));
    }
    let mut seen = vec![false; m + 1];
    for &v in deletion_order {
        if v < 1 || v >= m || seen[v] {
            return Err(Error::InvalidTree("deletion order must list each non-root once".into()));
        }
        seen[v] = true;
    }

    // relabel: child of the d-th deleted edge becomes v_{m-d}; root stays m
    let mut relabel = vec![0usize; m + 1];
    relabel[m] = m;
    for (d, &v) in deletion_order.iter().enumerate() {
        relabel[v] = m - (d + 1);
    }
    let mut new_parent = vec![0usize; m - 1];
    for v in 1..m {
        new_parent[relabel[v] - 1] = relabel[shape.parent_of(v).expect("non-root")];
    }
    let relabeled = LabeledTree::new(m, new_parent)?;

    // masses by adding edges back in reverse deletion order
    let mut dsu = Dsu::new(m + 1);
    let mut states: Vec<Vec<usize>> = Vec::with_capacity(m);
    let singletons: Vec<usize> = vec![1; m];
    states.push(singletons);
    for k in 1..m {
        let child = deletion_order[m - 1 - k];
        dsu.union(child, shape.parent_of(child).expect("non-root"));
        let mut masses: Vec<usize> = Vec::with_capacity(m - k);
        for v in 1..=m {
            if dsu.find(v) == v {
                masses.push(dsu.size[v]);
            }
        }
        masses.sort_unstable();
        states.push(masses);
    }
    Ok((
        CoalescentChain {
            m,
            convention: MassConvention::PlusOne,
            root_ordered: false,
            states,
        },
        relabeled,
    ))
}

/// Shape chain with a uniformly random deletion order.
pub fn fragmentation_chain_random(
    shape: &LabeledTree,
    deletion_order_seed: u64,
) -> Result<(CoalescentChain, LabeledTree)> {
    let mut rng = rng::replica_rng(deletion_order_seed, 0);
    fragmentation_chain_random_rng(shape, &mut rng)
}

pub fn fragmentation_chain_random_rng(
    shape: &LabeledTree,
    rng: &mut ChaCha8Rng,
) -> Result<(CoalescentChain, LabeledTree)> {
    let m = shape.k;
    let order: Vec<usize> = rng::permutation(rng, m - 1).into_iter().map(|i| i + 1).collect();
    fragmentation_chain_with_order(shape, &order)
}

/// Coalescent read off the parking arrival process: `tries` must build a
/// confined scheme of `m - 1` cars. State `k` lists, for each empty place of
/// the scheme after `k` arrivals in place order, one plus the size of the
/// block just before it — the forest masses of the intermediate scheme.
pub fn coalescent_from_parking(m: usize, tries: &[usize]) -> Result<CoalescentChain> {
    if tries.len() + 1 != m {
        return Err(Error::NotConfined(format!(
            "need m - 1 = {} tries, got {}",
            m - 1,
            tries.len()
        )));
    }
    let final_scheme = park(m, tries)?;
    if !final_scheme.is_confined() {
        return Err(Error::NotConfined("place m is occupied at the end".into()));
    }
    let mut occupied = vec![false; m];
    let mut states: Vec<Vec<usize>> = Vec::with_capacity(m);
    states.push(vec![1; m]);
    for k in 1..m {
        // place m stays empty throughout, so blocks never wrap
        occupied[final_scheme.placements()[k - 1] - 1] = true;
        let mut masses = Vec::with_capacity(m - k);
        let mut run = 0usize;
        for &occ in occupied.iter() {
            if occ {
                run += 1;
            } else {
                masses.push(run + 1);
                run = 0;
            }
        }
        debug_assert_eq!(run, 0);
        debug_assert_eq!(masses.iter().sum::<usize>(), m);
        states.push(masses);
    }
    Ok(CoalescentChain {
        m,
        convention: MassConvention::PlusOne,
        root_ordered: true,
        states,
    })
}

/// Conditional Monte Carlo estimate of the merge probability for two marked
/// blocks of sizes `x` and `y`, against the exact target `(x+y+2)/((l-1)m)`.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionCheck {
    pub estimate: f64,
    pub std_error: f64,
    pub target: f64,
    pub target_num: u64,
    pub target_den: u64,
    pub accepted: usize,
    pub attempts: usize,
    pub merges: usize,
}

impl TransitionCheck {
    pub fn within_sigmas(&self, sigmas: f64) -> bool {
        (self.estimate - self.target).abs() <= sigmas * self.std_error
    }
}

/// Draws uniform schemes with `n = m - l` cars until `replicas` of them
/// contain marked blocks of sizes `x` and `y` (chosen uniformly among
/// candidates), then tests whether the next arrival merges exactly the
/// marked pair. Signals when the conditioning acceptance rate drops below
/// 1e-3.
pub fn transition_frequency_check(
    m: usize,
    l: usize,
    x: usize,
    y: usize,
    replicas: usize,
    seed: u64,
) -> Result<TransitionCheck> {
    let target = merge_probability(x, y, l, m)?;
    let n = m - l;
    let mut rng = rng::replica_rng(seed, 0);
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let mut merges = 0usize;
    let mut tries = vec![0usize; n + 1];
    while accepted < replicas {
        attempts += 1;
        if attempts % 4096 == 0 && attempts >= 100_000 {
            let rate = accepted as f64 / attempts as f64;
            if rate < 1e-3 {
                return Err(Error::ConditioningTooRare {
                    rate,
                    accepted,
                    attempts,
                });
            }
        }
        for t in tries.iter_mut().take(n) {
            *t = rng::uniform_place(&mut rng, m);
        }
        let scheme = park(m, &tries[..n])?;
        let decomp = scheme.blocks();
        let xs: Vec<usize> = decomp
            .blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.size == x)
            .map(|(i, _)| i)
            .collect();
        let (bx, by) = if x == y {
            if xs.len() < 2 {
                continue;
            }
            // unordered pair, uniform
            let i = rng::uniform_below(&mut rng, xs.len() as u64) as usize;
            let j = {
                let r = rng::uniform_below(&mut rng, (xs.len() - 1) as u64) as usize;
                if r >= i {
                    r + 1
                } else {
                    r
                }
            };
            (xs[i], xs[j])
        } else {
            let ys: Vec<usize> = decomp
                .blocks
                .iter()
                .enumerate()
                .filter(|(_, b)| b.size == y)
                .map(|(i, _)| i)
                .collect();
            if xs.is_empty() || ys.is_empty() {
                continue;
            }
            (
                xs[rng::uniform_below(&mut rng, xs.len() as u64) as usize],
                ys[rng::uniform_below(&mut rng, ys.len() as u64) as usize],
            )
        };
        accepted += 1;
        tries[n] = rng::uniform_place(&mut rng, m);
        let next = park(m, &tries)?;
        let after = next.blocks();
        let merged = after.size_at(decomp.blocks[bx].start, m) == x + y + 1
            && same_block(&after, decomp.blocks[bx].start, decomp.blocks[by].start, m);
        if merged {
            merges += 1;
        }
    }
    let estimate = merges as f64 / accepted as f64;
    let std_error = (estimate * (1.0 - estimate) / accepted as f64).sqrt();
    let t64 = target.to_f64();
    Ok(TransitionCheck {
        estimate,
        std_error,
        target: t64,
        target_num: exact_to_u64(target.numerator()),
        target_den: exact_to_u64(target.denominator()),
        accepted,
        attempts,
        merges,
    })
}

fn exact_to_u64(x: &num_bigint::BigUint) -> u64 {
    use num_traits::ToPrimitive;
    x.to_u64().unwrap_or(u64::MAX)
}

fn same_block(decomp: &crate::parking::BlockDecomposition, p1: usize, p2: usize, m: usize) -> bool {
    let owner = |p: usize| {
        decomp
            .blocks
            .iter()
            .position(|b| (p + m - b.start) % m < b.size)
    };
    match (owner(p1), owner(p2)) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

/// Point process of block starts and widths, relative to the special empty
/// place `V` of the scheme after `n(lambda) = floor(m - lambda sqrt(m))`
/// arrivals. Every empty place contributes a point: `(offset from V, one
/// plus the following occupied run)`, both in grid cells; widths sum to `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointProcess {
    pub lambda_times_1000: u64,
    pub m: usize,
    pub n_cars: usize,
    pub v: usize,
    /// `(start offset from V mod m, width cells)` in scan order from `V`.
    pub points: Vec<(usize, usize)>,
}

impl PointProcess {
    /// Points as fractions of the circle.
    pub fn normalized(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|&(s, w)| (s as f64 / self.m as f64, w as f64 / self.m as f64))
            .collect()
    }
}

/// Extracts the per-lambda point processes from one arrival stream.
/// `tries` must hold at least `n(lambda)` entries for every grid lambda.
pub fn point_process_extraction(
    m: usize,
    tries: &[usize],
    lambda_grid: &[f64],
) -> Result<Vec<PointProcess>> {
    let mut out = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let drift = lambda * (m as f64).sqrt();
        if !(0.0..=m as f64).contains(&drift) {
            return Err(Error::LambdaTooLarge(drift));
        }
        let n = (m as f64 - drift).floor() as usize;
        if n > tries.len() {
            return Err(Error::BadCheckpoints);
        }
        let scheme = park(m, &tries[..n])?;
        let cc = centered_counts(&scheme);
        let v = cc.v;
        let mut points = Vec::with_capacity(m - n);
        let mut k = 0usize;
        while k < m {
            let place = (v - 1 + k) % m + 1;
            if scheme.is_occupied(place) {
                k += 1;
                continue;
            }
            // width: the empty place plus the occupied run after it
            let mut w = 1usize;
            while w <= m {
                let q = (v - 1 + k + w) % m + 1;
                if scheme.is_occupied(q) {
                    w += 1;
                } else {
                    break;
                }
            }
            points.push((k, w));
            k += w;
        }
        debug_assert_eq!(points.iter().map(|&(_, w)| w).sum::<usize>(), m);
        out.push(PointProcess {
            lambda_times_1000: (lambda * 1000.0).round() as u64,
            m,
            n_cars: n,
            v,
            points,
        });
    }
    Ok(out)
}

/// Exact merge target as a convenience re-export for callers of the check.
pub fn merge_target(x: usize, y: usize, l: usize, m: usize) -> Result<ExactProbability> {
    merge_probability(x, y, l, m)
}
