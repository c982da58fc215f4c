//! One-to-one correspondences between labeled trees, Pavlov forests, and
//! confined parking schemes.
//!
//! The tree <-> scheme map is the breadth-first-search queue rule: vertices
//! wait in a queue kept sorted ascending by label; the head of the queue at
//! step `i` parks at place `i`, and a vertex's first try is the step at which
//! it first enters the queue (the root's sons enter at step 1, the sons of
//! the vertex removed at step `i` enter at step `i + 1`). The queue length at
//! step `i` is exactly the profile value `H_i` of the image scheme.
//!
//! A confined scheme with `l` empty places maps to a forest with `l`
//! separately labeled roots: the cars parked between consecutive empty
//! places form one tree each, converted through the queue rule on the local
//! confined sub-scheme.

use crate::error::{Error, Result};
use crate::parking::{park, ParkingScheme};
use crate::rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// A labeled tree on vertices `v_1..v_k`, rooted at `v_k` by convention.
/// `parent[j]` is the parent label of `v_{j+1}` for `j + 1 < k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledTree {
    pub k: usize,
    pub parent: Vec<usize>,
}

impl LabeledTree {
    pub fn new(k: usize, parent: Vec<usize>) -> Result<Self> {
        if k == 0 || parent.len() + 1 != k {
            return Err(Error::InvalidTree(format!(
                "need {} parent entries for {} vertices",
                k.saturating_sub(1),
                k
            )));
        }
        if parent.iter().any(|&p| p < 1 || p > k) {
            return Err(Error::InvalidTree("parent label out of range".into()));
        }
        let tree = LabeledTree { k, parent };
        for v in 1..k {
            let mut cur = v;
            for _ in 0..k {
                cur = tree.parent_of(cur).expect("non-root has a parent");
                if cur == k {
                    break;
                }
            }
            if cur != k {
                return Err(Error::InvalidTree(format!("vertex v_{v} does not reach the root")));
            }
        }
        Ok(tree)
    }

    /// Parent label of `v_j`, `None` for the root.
    pub fn parent_of(&self, j: usize) -> Option<usize> {
        if j == self.k {
            None
        } else {
            Some(self.parent[j - 1])
        }
    }

    /// Children lists indexed by label (entry 0 unused).
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.k + 1];
        for (j, &p) in self.parent.iter().enumerate() {
            ch[p].push(j + 1);
        }
        ch
    }
}

/// Parent of a non-root vertex in a Pavlov forest: either one of the `l`
/// roots or another non-root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ForestParent {
    Root(usize),
    Vertex(usize),
}

/// A forest with roots `r_1..r_l` and non-roots `v_1..v_n`, labeled
/// separately. `parent[j]` is the parent of `v_{j+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PavlovForest {
    pub l: usize,
    pub n: usize,
    pub parent: Vec<ForestParent>,
}

impl PavlovForest {
    pub fn new(l: usize, n: usize, parent: Vec<ForestParent>) -> Result<Self> {
        if l == 0 || parent.len() != n {
            return Err(Error::InvalidForest("need l >= 1 and one parent per non-root".into()));
        }
        for &p in &parent {
            match p {
                ForestParent::Root(r) if r < 1 || r > l => {
                    return Err(Error::InvalidForest("root label out of range".into()))
                }
                ForestParent::Vertex(v) if v < 1 || v > n => {
                    return Err(Error::InvalidForest("vertex label out of range".into()))
                }
                _ => {}
            }
        }
        let forest = PavlovForest { l, n, parent };
        for v in 1..=n {
            forest.root_of(v)?;
        }
        Ok(forest)
    }

    /// Root ordinal of the tree containing non-root `v`.
    pub fn root_of(&self, mut v: usize) -> Result<usize> {
        for _ in 0..=self.n {
            match self.parent[v - 1] {
                ForestParent::Root(r) => return Ok(r),
                ForestParent::Vertex(w) => v = w,
            }
        }
        Err(Error::InvalidForest("cycle among non-roots".into()))
    }

    /// Non-root count of each tree, in root order.
    pub fn tree_sizes(&self) -> Result<Vec<usize>> {
        let mut sizes = vec![0usize; self.l];
        for v in 1..=self.n {
            sizes[self.root_of(v)? - 1] += 1;
        }
        Ok(sizes)
    }
}

/// Queue replay of a tree: (first tries, placements by place, queue lengths).
fn bfs_replay(tree: &LabeledTree) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let n = tree.k - 1;
    let children = tree.children();
    let mut first_try = vec![0usize; n];
    let mut parked_at = vec![0usize; n]; // place -> car label
    let mut queue_len = vec![0usize; n];
    let mut queue: BTreeSet<usize> = BTreeSet::new();
    for &c in &children[tree.k] {
        first_try[c - 1] = 1;
        queue.insert(c);
    }
    for step in 1..=n {
        queue_len[step - 1] = queue.len();
        let head = queue.pop_first().expect("queue empty before all cars parked");
        parked_at[step - 1] = head;
        for &c in &children[head] {
            first_try[c - 1] = step + 1;
            queue.insert(c);
        }
    }
    (first_try, parked_at, queue_len)
}

/// Confined scheme of `k - 1` cars on `k` places corresponding to a labeled
/// tree under the queue rule.
pub fn tree_to_confined(tree: &LabeledTree) -> ParkingScheme {
    let (first_try, parked_at, _) = bfs_replay(tree);
    let scheme = park(tree.k, &first_try).expect("tries from queue replay are valid");
    debug_assert!(scheme.is_confined());
    // car c_j parks at place i iff v_j heads the queue at step i
    debug_assert!(parked_at
        .iter()
        .enumerate()
        .all(|(place, &car)| scheme.placements()[car - 1] == place + 1));
    scheme
}

/// Inverse of [`tree_to_confined`]: the parent of car `c_j` is the car
/// parked at the place before its first try (or the root for first tries
/// at place 1). Rejects non-confined schemes and schemes with `n < m - 1`.
pub fn confined_to_tree(scheme: &ParkingScheme) -> Result<LabeledTree> {
    let m = scheme.m();
    if scheme.n() + 1 != m {
        return Err(Error::NotConfined(format!(
            "need n = m - 1, got n = {}, m = {}",
            scheme.n(),
            m
        )));
    }
    if !scheme.is_confined() {
        return Err(Error::NotConfined("place m is occupied".into()));
    }
    let mut parked_at = vec![0usize; m]; // place -> car label
    for (car, &p) in scheme.placements().iter().enumerate() {
        parked_at[p - 1] = car + 1;
    }
    let parent = scheme
        .tries()
        .iter()
        .map(|&t| if t == 1 { m } else { parked_at[t - 2] })
        .collect();
    LabeledTree::new(m, parent)
}

/// Pavlov forest of a confined scheme: empty places become roots in
/// left-to-right order, the cars between consecutive empty places become the
/// non-roots of one tree each.
pub fn parking_to_forest(scheme: &ParkingScheme) -> Result<PavlovForest> {
    if !scheme.is_confined() {
        return Err(Error::NotConfined("place m is occupied".into()));
    }
    let m = scheme.m();
    let n = scheme.n();
    let mut parent = vec![ForestParent::Root(0); n];
    let mut parked_at = vec![0usize; m];
    for (car, &p) in scheme.placements().iter().enumerate() {
        parked_at[p - 1] = car + 1;
    }
    let mut root = 0usize;
    let mut block_start = 1usize;
    for place in 1..=m {
        if scheme.is_occupied(place) {
            continue;
        }
        root += 1;
        // cars of the block [block_start, place - 1], keyed by local try
        for p in block_start..place {
            let car = parked_at[p - 1];
            let t = scheme.tries()[car - 1];
            parent[car - 1] = if t == block_start {
                ForestParent::Root(root)
            } else {
                ForestParent::Vertex(parked_at[t - 2])
            };
        }
        block_start = place + 1;
    }
    PavlovForest::new(root, n, parent)
}

/// Inverse of [`parking_to_forest`]: lays the trees down as blocks in root
/// order, each followed by its empty place.
pub fn forest_to_parking(forest: &PavlovForest) -> Result<ParkingScheme> {
    let m = forest.l + forest.n;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); forest.l];
    for v in 1..=forest.n {
        members[forest.root_of(v)? - 1].push(v);
    }
    let mut tries = vec![0usize; forest.n];
    let mut offset = 0usize;
    for tree_members in &members {
        let s = tree_members.len();
        // local labels: members ascending = v'_1..v'_s, root = v'_{s+1}
        let mut local_index = std::collections::HashMap::new();
        for (i, &g) in tree_members.iter().enumerate() {
            local_index.insert(g, i + 1);
        }
        let mut local_parent = vec![0usize; s];
        for (i, &g) in tree_members.iter().enumerate() {
            local_parent[i] = match forest.parent[g - 1] {
                ForestParent::Root(_) => s + 1,
                ForestParent::Vertex(w) => *local_index.get(&w).ok_or_else(|| {
                    Error::InvalidForest("parent lives in a different tree".into())
                })?,
            };
        }
        let local_tree = LabeledTree::new(s + 1, local_parent)?;
        let local = tree_to_confined(&local_tree);
        for (i, &g) in tree_members.iter().enumerate() {
            tries[g - 1] = offset + local.tries()[i];
        }
        offset += s + 1;
    }
    let scheme = park(m, &tries).expect("forest layout yields valid tries");
    debug_assert!(scheme.is_confined());
    Ok(scheme)
}

/// Decodes a Pruefer sequence over labels `1..=k` (length `k - 2`) into a
/// labeled tree rooted at `v_k`. Standard enumeration oracle: the map is a
/// bijection onto the `k^(k-2)` labeled trees.
pub fn prufer_decode(k: usize, seq: &[usize]) -> Result<LabeledTree> {
    if k == 0 {
        return Err(Error::InvalidTree("no vertices".into()));
    }
    if k == 1 {
        return LabeledTree::new(1, vec![]);
    }
    if seq.len() + 2 != k || seq.iter().any(|&a| a < 1 || a > k) {
        return Err(Error::InvalidTree("bad Pruefer sequence".into()));
    }
    let mut degree = vec![1usize; k + 1];
    for &a in seq {
        degree[a] += 1;
    }
    let mut leaves: BTreeSet<usize> = (1..=k).filter(|&v| degree[v] == 1).collect();
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(k - 1);
    for &a in seq {
        let leaf = leaves.pop_first().expect("a leaf always remains");
        edges.push((leaf, a));
        degree[a] -= 1;
        if degree[a] == 1 {
            leaves.insert(a);
        }
    }
    let u = leaves.pop_first().unwrap();
    let v = leaves.pop_first().unwrap();
    edges.push((u, v));

    // orient towards the root v_k
    let mut adj = vec![Vec::new(); k + 1];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut parent = vec![0usize; k - 1];
    let mut stack = vec![k];
    let mut seen = vec![false; k + 1];
    seen[k] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w - 1] = v;
                stack.push(w);
            }
        }
    }
    LabeledTree::new(k, parent)
}

/// Uniform labeled tree on `k` vertices via a uniform Pruefer sequence.
pub fn random_labeled_tree(k: usize, rng: &mut ChaCha8Rng) -> LabeledTree {
    if k <= 2 {
        return prufer_decode(k, &[]).expect("trivial tree");
    }
    let seq: Vec<usize> = (0..k - 2).map(|_| rng::uniform_place(rng, k)).collect();
    prufer_decode(k, &seq).expect("random sequence is valid")
}

/// All `k^(k-2)` labeled trees on `k` vertices, by Pruefer enumeration.
pub fn all_labeled_trees(k: usize) -> Vec<LabeledTree> {
    if k <= 2 {
        return vec![prufer_decode(k, &[]).unwrap()];
    }
    let len = k - 2;
    let mut out = Vec::with_capacity(k.pow(len as u32));
    let mut seq = vec![1usize; len];
    loop {
        out.push(prufer_decode(k, &seq).unwrap());
        let mut i = 0;
        loop {
            if i == len {
                return out;
            }
            seq[i] += 1;
            if seq[i] <= k {
                break;
            }
            seq[i] = 1;
            i += 1;
        }
    }
}
