//! Frequency-annotated compressed radix tree over ASCII keys.
//!
//! Nodes live in an arena. Every node caches the sum of key counts below it,
//! the largest single key count below it, and the number of distinct keys
//! below it; the last two drive ranked enumeration and matrix sizing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Default)]
struct Node {
    label: Vec<u8>,
    children: Vec<u32>,
    count: u64,
    subtree: u64,
    max_count: u64,
    keys: u64,
}

/// Where a prefix ends inside the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Position {
    /// Exactly at a node.
    Node(u32),
    /// Inside the edge leading to `child`, after `consumed` label bytes.
    Edge { child: u32, consumed: usize },
}

impl Position {
    /// The topmost node whose subtree holds every key with the prefix.
    pub(crate) fn subtree_root(self) -> u32 {
        match self {
            Position::Node(n) => n,
            Position::Edge { child, .. } => child,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RadixTree {
    nodes: Vec<Node>,
}

impl Default for RadixTree {
    fn default() -> Self {
        Self {
            nodes: vec![Node::default()],
        }
    }
}

fn common_prefix(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl RadixTree {
    const ROOT: u32 = 0;

    fn node(&self, idx: u32) -> &Node {
        &self.nodes[idx as usize]
    }

    fn child_by_byte(&self, idx: u32, b: u8) -> Option<(usize, u32)> {
        let children = &self.node(idx).children;
        children
            .binary_search_by(|&c| self.node(c).label[0].cmp(&b))
            .ok()
            .map(|slot| (slot, children[slot]))
    }

    fn push_node(&mut self, node: Node) -> u32 {
        self.nodes.push(node);
        (self.nodes.len() - 1) as u32
    }

    /// Adds `amount` occurrences of `key`. Returns the key's new count.
    pub(crate) fn insert(&mut self, key: &[u8], amount: u64) -> u64 {
        if amount == 0 {
            return self.get(key);
        }
        let mut path = vec![Self::ROOT];
        let mut cur = Self::ROOT;
        let mut rest = key;
        loop {
            if rest.is_empty() {
                break;
            }
            match self.child_by_byte(cur, rest[0]) {
                None => {
                    let leaf = self.push_node(Node {
                        label: rest.to_vec(),
                        ..Node::default()
                    });
                    let children = &self.nodes[cur as usize].children;
                    let slot = children
                        .binary_search_by(|&c| self.nodes[c as usize].label[0].cmp(&rest[0]))
                        .unwrap_err();
                    self.nodes[cur as usize].children.insert(slot, leaf);
                    cur = leaf;
                    path.push(leaf);
                    rest = &[];
                }
                Some((slot, child)) => {
                    let label_len = self.node(child).label.len();
                    let common = common_prefix(&self.node(child).label, rest);
                    if common == label_len {
                        cur = child;
                        rest = &rest[common..];
                        path.push(child);
                        continue;
                    }
                    // Split the edge at `common`.
                    let tail = self.nodes[child as usize].label.split_off(common);
                    let head = std::mem::replace(&mut self.nodes[child as usize].label, tail);
                    let c = self.node(child);
                    let mid = Node {
                        label: head,
                        children: vec![child],
                        count: 0,
                        subtree: c.subtree,
                        max_count: c.max_count,
                        keys: c.keys,
                    };
                    let mid = self.push_node(mid);
                    self.nodes[cur as usize].children[slot] = mid;
                    cur = mid;
                    rest = &rest[common..];
                    path.push(mid);
                }
            }
        }
        let node = &mut self.nodes[cur as usize];
        let is_new = node.count == 0;
        node.count += amount;
        let new_count = node.count;
        for idx in path {
            let n = &mut self.nodes[idx as usize];
            n.subtree += amount;
            n.max_count = n.max_count.max(new_count);
            if is_new {
                n.keys += 1;
            }
        }
        new_count
    }

    pub(crate) fn locate(&self, prefix: &[u8]) -> Option<Position> {
        let mut cur = Self::ROOT;
        let mut rest = prefix;
        loop {
            if rest.is_empty() {
                return Some(Position::Node(cur));
            }
            let (_, child) = self.child_by_byte(cur, rest[0])?;
            let label = &self.node(child).label;
            if rest.len() >= label.len() {
                if !rest.starts_with(label) {
                    return None;
                }
                rest = &rest[label.len()..];
                cur = child;
            } else {
                return label.starts_with(rest).then_some(Position::Edge {
                    child,
                    consumed: rest.len(),
                });
            }
        }
    }

    pub(crate) fn get(&self, key: &[u8]) -> u64 {
        match self.locate(key) {
            Some(Position::Node(n)) => self.node(n).count,
            _ => 0,
        }
    }

    /// Sum of counts of keys having `prefix`.
    pub(crate) fn prefix_total(&self, prefix: &[u8]) -> u64 {
        self.locate(prefix)
            .map_or(0, |p| self.node(p.subtree_root()).subtree)
    }

    /// Number of distinct keys having `prefix`.
    pub(crate) fn prefix_keys(&self, prefix: &[u8]) -> u64 {
        self.locate(prefix)
            .map_or(0, |p| self.node(p.subtree_root()).keys)
    }

    pub(crate) fn total(&self) -> u64 {
        self.node(Self::ROOT).subtree
    }

    pub(crate) fn distinct(&self) -> u64 {
        self.node(Self::ROOT).keys
    }

    /// Bytes that can follow `prefix` on the way to some key.
    pub(crate) fn next_bytes(&self, prefix: &[u8]) -> Vec<u8> {
        match self.locate(prefix) {
            None => Vec::new(),
            Some(Position::Edge { child, consumed }) => vec![self.node(child).label[consumed]],
            Some(Position::Node(n)) => self
                .node(n)
                .children
                .iter()
                .map(|&c| self.node(c).label[0])
                .collect(),
        }
    }

    /// The longest string `ext` starting with `b` such that every key with
    /// prefix `prefix + b` also has prefix `prefix + ext`.
    pub(crate) fn forced_extension(&self, prefix: &[u8], b: u8) -> Option<Vec<u8>> {
        let mut probe = prefix.to_vec();
        probe.push(b);
        match self.locate(&probe)? {
            Position::Node(_) => Some(vec![b]),
            Position::Edge { child, consumed } => {
                let mut ext = vec![b];
                ext.extend_from_slice(&self.node(child).label[consumed..]);
                Some(ext)
            }
        }
    }

    /// Every key having `prefix`, in lexicographic order, with its count.
    pub(crate) fn keys_with_prefix(&self, prefix: &[u8]) -> Vec<(Vec<u8>, u64)> {
        let mut out = Vec::new();
        let Some(pos) = self.locate(prefix) else {
            return out;
        };
        let (start, mut path) = self.start_path(prefix, pos);
        self.collect(start, &mut path, &mut out);
        out
    }

    fn start_path(&self, prefix: &[u8], pos: Position) -> (u32, Vec<u8>) {
        match pos {
            Position::Node(n) => (n, prefix.to_vec()),
            Position::Edge { child, consumed } => {
                let mut path = prefix.to_vec();
                path.extend_from_slice(&self.node(child).label[consumed..]);
                (child, path)
            }
        }
    }

    fn collect(&self, idx: u32, path: &mut Vec<u8>, out: &mut Vec<(Vec<u8>, u64)>) {
        let node = self.node(idx);
        if node.count > 0 {
            out.push((path.clone(), node.count));
        }
        for &c in &node.children {
            let label = &self.node(c).label;
            path.extend_from_slice(label);
            self.collect(c, path, out);
            path.truncate(path.len() - label.len());
        }
    }

    /// Keys having `prefix`, lazily, by count descending then key ascending.
    pub(crate) fn ranked(&self, prefix: &[u8]) -> Ranked<'_> {
        let mut heap = BinaryHeap::new();
        if let Some(pos) = self.locate(prefix) {
            let (start, path) = self.start_path(prefix, pos);
            heap.push(HeapItem {
                count: self.node(start).max_count,
                path,
                node: Some(start),
            });
        }
        Ranked { tree: self, heap }
    }

    /// For every key with prefix `prefix`, reads the maximal run of bytes
    /// satisfying `keep` that directly follows the prefix, and sums key
    /// counts per distinct run, in byte order. Runs that reach the end of a
    /// key without hitting a stop byte are reported as well.
    pub(crate) fn run_totals(&self, prefix: &[u8], keep: impl Fn(u8) -> bool) -> Vec<(Vec<u8>, u64)> {
        let mut out = Vec::new();
        let Some(pos) = self.locate(prefix) else {
            return out;
        };
        let mut run = Vec::new();
        match pos {
            Position::Node(n) => self.runs_below(n, &keep, &mut run, &mut out),
            Position::Edge { child, consumed } => {
                self.runs_from(child, consumed, &keep, &mut run, &mut out)
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out.dedup_by(|later, first| {
            let same = later.0 == first.0;
            if same {
                first.1 += later.1;
            }
            same
        });
        out
    }

    fn runs_below(&self, idx: u32, keep: &impl Fn(u8) -> bool, run: &mut Vec<u8>, out: &mut Vec<(Vec<u8>, u64)>) {
        let node = self.node(idx);
        if node.count > 0 {
            out.push((run.clone(), node.count));
        }
        for &c in &node.children {
            self.runs_from(c, 0, keep, run, out);
        }
    }

    fn runs_from(
        &self,
        idx: u32,
        offset: usize,
        keep: &impl Fn(u8) -> bool,
        run: &mut Vec<u8>,
        out: &mut Vec<(Vec<u8>, u64)>,
    ) {
        let node = self.node(idx);
        let before = run.len();
        let mut stopped = false;
        for &b in &node.label[offset..] {
            if keep(b) {
                run.push(b);
            } else {
                stopped = true;
                break;
            }
        }
        if stopped {
            out.push((run.clone(), node.subtree));
        } else {
            self.runs_below(idx, keep, run, out);
        }
        run.truncate(before);
    }

    #[cfg(test)]
    pub(crate) fn check_invariants(&self) {
        for (i, n) in self.nodes.iter().enumerate() {
            if i != 0 {
                assert!(!n.label.is_empty(), "empty edge label");
                assert!(n.count > 0 || n.children.len() >= 2, "uncompressed path at node {i}");
            }
            let child_sum: u64 = n.children.iter().map(|&c| self.node(c).subtree).sum();
            assert_eq!(n.subtree, n.count + child_sum);
            let child_keys: u64 = n.children.iter().map(|&c| self.node(c).keys).sum();
            assert_eq!(n.keys, child_keys + u64::from(n.count > 0));
            let child_max = n.children.iter().map(|&c| self.node(c).max_count).max().unwrap_or(0);
            assert_eq!(n.max_count, child_max.max(n.count));
            let firsts: Vec<u8> = n.children.iter().map(|&c| self.node(c).label[0]).collect();
            assert!(firsts.windows(2).all(|w| w[0] < w[1]), "children not sorted");
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
struct HeapItem {
    count: u64,
    path: Vec<u8>,
    /// `Some` for an unexpanded subtree, `None` for a finished key.
    node: Option<u32>,
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.path.cmp(&self.path))
            .then_with(|| other.node.is_some().cmp(&self.node.is_some()))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Best-first enumeration: a subtree's bound (its largest count, its path)
/// never ranks below any key it contains.
pub(crate) struct Ranked<'a> {
    tree: &'a RadixTree,
    heap: BinaryHeap<HeapItem>,
}

impl Iterator for Ranked<'_> {
    type Item = (Vec<u8>, u64);

    fn next(&mut self) -> Option<Self::Item> {
        while let Some(item) = self.heap.pop() {
            let Some(idx) = item.node else {
                return Some((item.path, item.count));
            };
            let node = self.tree.node(idx);
            if node.count > 0 {
                self.heap.push(HeapItem {
                    count: node.count,
                    path: item.path.clone(),
                    node: None,
                });
            }
            for &c in &node.children {
                let child = self.tree.node(c);
                let mut path = item.path.clone();
                path.extend_from_slice(&child.label);
                self.heap.push(HeapItem {
                    count: child.max_count,
                    path,
                    node: Some(c),
                });
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn build(words: &[(&str, u64)]) -> RadixTree {
        let mut t = RadixTree::default();
        for (w, n) in words {
            t.insert(w.as_bytes(), *n);
        }
        t.check_invariants();
        t
    }

    #[test]
    fn splits_and_counts() {
        let t = build(&[("the", 3), ("that", 2), ("those", 1), ("th", 1)]);
        assert_eq!(t.get(b"the"), 3);
        assert_eq!(t.get(b"t"), 0);
        assert_eq!(t.prefix_total(b"th"), 7);
        assert_eq!(t.prefix_keys(b"th"), 4);
        assert_eq!(t.next_bytes(b"th"), b"aeo".to_vec());
        assert_eq!(t.next_bytes(b"tho"), b"s".to_vec());
        assert_eq!(t.forced_extension(b"th", b'o').unwrap(), b"ose".to_vec());
        assert_eq!(t.forced_extension(b"th", b'e').unwrap(), b"e".to_vec());
        assert_eq!(t.forced_extension(b"th", b'z'), None);
    }

    #[test]
    fn run_totals_stop_at_separators() {
        let t = build(&[("ab_cd.", 2), ("ab_ce.", 1), ("ab.", 4), ("ax_y.", 1)]);
        let mut runs = t.run_totals(b"a", |b| b.is_ascii_lowercase());
        runs.sort();
        assert_eq!(runs, vec![(b"b".to_vec(), 7), (b"x".to_vec(), 1)]);
        let mut runs = t.run_totals(b"ab_c", |b| b.is_ascii_lowercase());
        runs.sort();
        assert_eq!(runs, vec![(b"d".to_vec(), 2), (b"e".to_vec(), 1)]);
    }

    proptest! {
        #[test]
        fn matches_naive_model(entries in proptest::collection::vec(("[abc]{1,5}", 1u64..5), 0..30),
                               prefix in "[abc]{0,3}") {
            let mut t = RadixTree::default();
            let mut naive: BTreeMap<String, u64> = BTreeMap::new();
            for (w, n) in &entries {
                t.insert(w.as_bytes(), *n);
                *naive.entry(w.clone()).or_default() += n;
            }
            t.check_invariants();
            let matching: Vec<(Vec<u8>, u64)> = naive.iter()
                .filter(|(k, _)| k.starts_with(&prefix))
                .map(|(k, v)| (k.as_bytes().to_vec(), *v))
                .collect();
            prop_assert_eq!(t.keys_with_prefix(prefix.as_bytes()), matching.clone());
            prop_assert_eq!(t.prefix_total(prefix.as_bytes()), matching.iter().map(|m| m.1).sum::<u64>());
            let mut expected = matching.clone();
            expected.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            prop_assert_eq!(t.ranked(prefix.as_bytes()).collect::<Vec<_>>(), expected);
            let mut next: Vec<u8> = matching.iter()
                .filter_map(|(k, _)| k.get(prefix.len()).copied())
                .collect();
            next.sort();
            next.dedup();
            prop_assert_eq!(t.next_bytes(prefix.as_bytes()), next);
        }
    }
}
