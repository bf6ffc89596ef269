//! Connectivity, component structure, and isolated-node statistics of a
//! sample, plus an independent quadratic oracle used by the tests.
//!
//! The fast path never intersects rings pairwise. Every edge of the
//! shared-key graph is witnessed by a key both endpoints hold, so walking a
//! key -> holders index and unioning each holder with the first holder of
//! that key produces exactly the components of the graph.

use serde::Serialize;
use std::collections::VecDeque;

use crate::model::GraphSample;
use crate::{Error, Result};

/// Instance-size cap for [`naive_components`]; the oracle is O(n^2) ring
/// intersections.
pub const DEFAULT_NAIVE_CAP: usize = 2000;

/// Component structure and isolated-node counts of one sample.
///
/// Conventions: a single-node graph is connected and its node counts as
/// isolated, so `is_connected` and `isolated > 0` can coexist only at
/// `n = 1`. For `n >= 2`, connectivity forces `isolated == 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentSummary {
    pub num_components: usize,
    /// Ascending; sums to `n`.
    pub component_sizes: Vec<usize>,
    /// `num_components == 1`.
    pub is_connected: bool,
    /// Number of nodes with no neighbor (`J_n`).
    #[serde(rename = "J_n")]
    pub isolated: usize,
    /// Number of group-1 nodes with no neighbor (`I_n`).
    #[serde(rename = "I_n")]
    pub isolated_group1: usize,
}

/// Isolated-node report: counts plus the ids themselves, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsolatedReport {
    /// `J_n`.
    pub total: usize,
    /// `I_n`.
    pub group1: usize,
    pub nodes: Vec<usize>,
}

/// True iff two sorted distinct id lists intersect (linear merge).
pub fn edge_exists(ring_a: &[u64], ring_b: &[u64]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < ring_a.len() && j < ring_b.len() {
        match ring_a[i].cmp(&ring_b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        // path compression
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }
}

/// The inverted key index: `(key, holder)` pairs sorted by key, so each key
/// bucket is one contiguous run.
fn key_index(sample: &GraphSample) -> Vec<(u64, u32)> {
    let total_keys: usize = sample.rings.iter().map(Vec::len).sum();
    let mut pairs: Vec<(u64, u32)> = Vec::with_capacity(total_keys);
    for (x, ring) in sample.rings.iter().enumerate() {
        for &key in ring {
            pairs.push((key, x as u32));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Walks each key bucket of the index: nodes in a shared bucket are unioned
/// with the bucket head and marked as sharing a key.
fn union_buckets(pairs: &[(u64, u32)], uf: &mut DisjointSet, shares_key: &mut [bool]) {
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i + 1;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        if j - i >= 2 {
            let head = pairs[i].1;
            shares_key[head as usize] = true;
            for &(_, x) in &pairs[i + 1..j] {
                uf.union(x, head);
                shares_key[x as usize] = true;
            }
        }
        i = j;
    }
}

/// Components of the shared-key graph via the inverted key index and
/// union-find (path compression + union by size). Every edge is witnessed
/// by a shared key, so unioning within key buckets yields exactly the
/// graph's components; the same pass marks which nodes share a key with
/// someone, which yields the isolated-node counts without a second pass.
pub fn components(sample: &GraphSample) -> ComponentSummary {
    let n = sample.len();
    let mut uf = DisjointSet::new(n);
    let mut shares_key = vec![false; n];
    union_buckets(&key_index(sample), &mut uf, &mut shares_key);

    let mut size_of_root = vec![0usize; n];
    for x in 0..n as u32 {
        size_of_root[uf.find(x) as usize] += 1;
    }
    let mut component_sizes: Vec<usize> =
        size_of_root.into_iter().filter(|&s| s > 0).collect();
    component_sizes.sort_unstable();

    let isolated = shares_key.iter().filter(|&&s| !s).count();
    let isolated_group1 = (0..n).filter(|&x| !shares_key[x] && sample.groups[x] == 0).count();
    summary(component_sizes, isolated, isolated_group1)
}

/// The direct-definition oracle: materializes all O(n^2) pairwise
/// intersection tests, then BFS. Authoritative for tests; refuses instances
/// above [`DEFAULT_NAIVE_CAP`].
pub fn naive_components(sample: &GraphSample) -> Result<ComponentSummary> {
    naive_components_capped(sample, DEFAULT_NAIVE_CAP)
}

/// As [`naive_components`] with an explicit instance-size cap.
pub fn naive_components_capped(sample: &GraphSample, cap: usize) -> Result<ComponentSummary> {
    let n = sample.len();
    if n > cap {
        return Err(Error::NaiveCap { n, cap });
    }
    let mut adj = vec![Vec::new(); n];
    for x in 0..n {
        for y in (x + 1)..n {
            if edge_exists(&sample.rings[x], &sample.rings[y]) {
                adj[x].push(y);
                adj[y].push(x);
            }
        }
    }

    let mut component_sizes = Vec::new();
    let mut visited = vec![false; n];
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut size = 0usize;
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(x) = queue.pop_front() {
            size += 1;
            for &y in &adj[x] {
                if !visited[y] {
                    visited[y] = true;
                    queue.push_back(y);
                }
            }
        }
        component_sizes.push(size);
    }
    component_sizes.sort_unstable();

    let isolated = adj.iter().filter(|nb| nb.is_empty()).count();
    let isolated_group1 =
        (0..n).filter(|&x| adj[x].is_empty() && sample.groups[x] == 0).count();
    Ok(summary(component_sizes, isolated, isolated_group1))
}

fn summary(component_sizes: Vec<usize>, isolated: usize, isolated_group1: usize) -> ComponentSummary {
    let num_components = component_sizes.len();
    ComponentSummary {
        num_components,
        component_sizes,
        is_connected: num_components == 1,
        isolated,
        isolated_group1,
    }
}

/// Isolated nodes of a sample: node `x` is isolated iff no key of `x` is
/// held by any other node. Returns `(J_n, I_n, ids)` as a struct; ids are
/// ascending.
pub fn isolated_nodes(sample: &GraphSample) -> IsolatedReport {
    let n = sample.len();
    let pairs = key_index(sample);
    let mut shares_key = vec![false; n];
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i + 1;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        if j - i >= 2 {
            for &(_, x) in &pairs[i..j] {
                shares_key[x as usize] = true;
            }
        }
        i = j;
    }
    let nodes: Vec<usize> = (0..n).filter(|&x| !shares_key[x]).collect();
    let group1 = nodes.iter().filter(|&&x| sample.groups[x] == 0).count();
    IsolatedReport { total: nodes.len(), group1, nodes }
}
