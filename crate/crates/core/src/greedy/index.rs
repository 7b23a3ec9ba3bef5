use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

use crate::merge::{MergeId, MergeTable, Pair};
use crate::pair_stats::{pair_frequencies_where, PairStat};

const NIL: u32 = u32::MAX;
const DEAD: MergeId = MergeId(u32::MAX);

/// A list node; `token` is `DEAD` once absorbed into its left neighbor.
#[derive(Clone, Copy, Debug)]
struct Node {
    token: MergeId,
    prev: u32,
    next: u32,
    /// Slot of the pair starting here, `NIL` if not indexed.
    slot: u32,
}

/// Left-node handles of one pair, smallest first. Removal is lazy: an entry
/// is live while its node still points at this slot. A pair never returns to
/// a handle it left (the handle's token or right neighbor only ever grows
/// into a fresh merge), so stale entries stay stale.
#[derive(Clone, Debug, Default)]
struct Positions {
    heap: BinaryHeap<Reverse<u32>>,
    live: usize,
}

/// Snapshot of a pair's key. Entries go stale when the pair's positions
/// change; a fresh entry is pushed for every change, so a stale entry is
/// simply dropped when popped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct HeapEntry {
    count: usize,
    first: Reverse<u32>,
    pair: (u32, u32),
}

/// Working state of the fast trainer: the stream as a doubly linked list of
/// nodes (indexed by original position), the left-node positions of every
/// adjacent pair, and a max-heap over pairs.
#[derive(Debug)]
pub struct PairIndex {
    nodes: Vec<Node>,
    slots: FxHashMap<Pair, u32>,
    pairs: Vec<Pair>,
    positions: Vec<Positions>,
    dirty: Vec<u32>,
    is_dirty: Vec<bool>,
    heap: BinaryHeap<HeapEntry>,
    barrier: Option<MergeId>,
    work: usize,
}

impl PairIndex {
    pub fn new(tokens: &[MergeId], barrier: Option<MergeId>) -> Self {
        let n = tokens.len();
        let mut index = PairIndex {
            nodes: (0..n)
                .map(|i| Node {
                    token: tokens[i],
                    prev: if i == 0 { NIL } else { i as u32 - 1 },
                    next: if i + 1 == n { NIL } else { i as u32 + 1 },
                    slot: NIL,
                })
                .collect(),
            slots: FxHashMap::default(),
            pairs: Vec::new(),
            positions: Vec::new(),
            dirty: Vec::new(),
            is_dirty: Vec::new(),
            heap: BinaryHeap::new(),
            barrier,
            work: 0,
        };
        let mut initial: Vec<Vec<Reverse<u32>>> = Vec::new();
        for u in 0..n.saturating_sub(1) {
            let pair = (tokens[u], tokens[u + 1]);
            if !index.mergeable(pair.0) || !index.mergeable(pair.1) {
                continue;
            }
            let slot = index.slot(pair);
            if slot as usize == initial.len() {
                initial.push(Vec::new());
            }
            initial[slot as usize].push(Reverse(u as u32));
            index.nodes[u].slot = slot;
            index.work += 1;
        }
        for (slot, list) in initial.into_iter().enumerate() {
            index.positions[slot] = Positions { live: list.len(), heap: BinaryHeap::from(list) };
            index.push_key(slot as u32);
        }
        index
    }

    /// Total work units spent so far.
    pub fn work(&self) -> usize {
        self.work
    }

    fn mergeable(&self, id: MergeId) -> bool {
        Some(id) != self.barrier
    }

    fn slot(&mut self, pair: Pair) -> u32 {
        if let Some(&slot) = self.slots.get(&pair) {
            return slot;
        }
        let slot = self.pairs.len() as u32;
        self.slots.insert(pair, slot);
        self.pairs.push(pair);
        self.positions.push(Positions::default());
        self.is_dirty.push(false);
        slot
    }

    fn mark_dirty(&mut self, slot: u32) {
        if !self.is_dirty[slot as usize] {
            self.is_dirty[slot as usize] = true;
            self.dirty.push(slot);
        }
    }

    /// Indexes the pair starting at live node `u`, if it has a successor.
    fn add_position(&mut self, u: u32) {
        let v = self.nodes[u as usize].next;
        if v == NIL {
            return;
        }
        let pair = (self.nodes[u as usize].token, self.nodes[v as usize].token);
        if !self.mergeable(pair.0) || !self.mergeable(pair.1) {
            return;
        }
        self.work += 1;
        let slot = self.slot(pair);
        let positions = &mut self.positions[slot as usize];
        positions.heap.push(Reverse(u));
        positions.live += 1;
        self.nodes[u as usize].slot = slot;
        self.mark_dirty(slot);
    }

    fn remove_position(&mut self, u: u32) {
        let slot = std::mem::replace(&mut self.nodes[u as usize].slot, NIL);
        if slot == NIL {
            return;
        }
        self.work += 1;
        self.positions[slot as usize].live -= 1;
        self.mark_dirty(slot);
    }

    /// Live positions of a slot in increasing order.
    fn live_positions(&self, slot: u32) -> Vec<u32> {
        let mut live: Vec<u32> = self.positions[slot as usize]
            .heap
            .iter()
            .map(|r| r.0)
            .filter(|&u| self.nodes[u as usize].slot == slot)
            .collect();
        live.sort_unstable();
        live
    }

    /// Current (non-overlapping count, first position) of a pair.
    fn key(&mut self, slot: u32) -> Option<(usize, u32)> {
        let nodes = &self.nodes;
        let positions = &mut self.positions[slot as usize];
        while let Some(&Reverse(u)) = positions.heap.peek() {
            if nodes[u as usize].slot == slot {
                break;
            }
            positions.heap.pop();
            self.work += 1;
        }
        if positions.heap.len() > 2 * positions.live + 16 {
            self.work += positions.heap.len();
            positions.heap.retain(|r| nodes[r.0 as usize].slot == slot);
        }
        let first = positions.heap.peek()?.0;
        let live_count = positions.live;
        let (left, right) = self.pairs[slot as usize];
        if left != right {
            return Some((live_count, first));
        }
        // Runs of equal tokens: count like the left-to-right scan does.
        let live = self.live_positions(slot);
        self.work += live.len();
        let mut count = 0;
        let mut last_counted = NIL;
        for u in live {
            if last_counted != NIL && self.nodes[last_counted as usize].next == u {
                last_counted = NIL;
            } else {
                count += 1;
                last_counted = u;
            }
        }
        Some((count, first))
    }

    fn push_key(&mut self, slot: u32) {
        if let Some((count, first)) = self.key(slot) {
            self.work += 1;
            let pair = self.pairs[slot as usize];
            self.heap.push(HeapEntry { count, first: Reverse(first), pair: (pair.0 .0, pair.1 .0) });
        }
    }

    /// Pops the best live pair and its count, discarding stale entries.
    pub fn pop_best(&mut self, _table: &MergeTable) -> Option<(Pair, usize)> {
        while let Some(entry) = self.heap.pop() {
            self.work += 1;
            let pair = (MergeId(entry.pair.0), MergeId(entry.pair.1));
            let slot = self.slots[&pair];
            if self.key(slot) == Some((entry.count, entry.first.0)) {
                return Some((pair, entry.count));
            }
        }
        None
    }

    /// Replaces every non-overlapping occurrence of `pair`, left to right, by
    /// `merged` and returns the number of replacements.
    pub fn merge_pair(&mut self, pair: Pair, merged: MergeId) -> usize {
        let Some(&slot) = self.slots.get(&pair) else {
            return 0;
        };
        let list = self.live_positions(slot);
        self.positions[slot as usize].heap = BinaryHeap::new();
        let mut replaced = 0;
        for u in list {
            self.work += 1;
            let node = self.nodes[u as usize];
            if node.slot != slot {
                continue;
            }
            let v = node.next;
            debug_assert!(node.token == pair.0 && self.nodes[v as usize].token == pair.1);
            let (p, w) = (node.prev, self.nodes[v as usize].next);
            self.remove_position(u);
            if p != NIL {
                self.remove_position(p);
            }
            self.remove_position(v);

            self.nodes[u as usize].token = merged;
            self.nodes[u as usize].next = w;
            self.nodes[v as usize].token = DEAD;
            if w != NIL {
                self.nodes[w as usize].prev = u;
            }
            self.work += 1;

            if p != NIL {
                self.add_position(p);
            }
            self.add_position(u);
            replaced += 1;
        }
        debug_assert_eq!(self.positions[slot as usize].live, 0);
        let mut dirty = std::mem::take(&mut self.dirty);
        for &d in &dirty {
            self.is_dirty[d as usize] = false;
            if d != slot {
                self.push_key(d);
            }
        }
        dirty.clear();
        self.dirty = dirty;
        replaced
    }

    /// Live tokens in list order.
    pub fn tokens(&self) -> Vec<MergeId> {
        let mut out = Vec::new();
        let mut u = if self.nodes.is_empty() { NIL } else { 0 };
        while u != NIL {
            out.push(self.nodes[u as usize].token);
            u = self.nodes[u as usize].next;
        }
        out
    }

    /// Recounts the live list from scratch and compares it with the index.
    pub fn is_consistent(&mut self) -> bool {
        let tokens = self.tokens();
        let barrier = self.barrier;
        let fresh = pair_frequencies_where(&tokens, |id| Some(id) != barrier);
        let slots: Vec<u32> = (0..self.pairs.len() as u32).filter(|&s| self.positions[s as usize].live > 0).collect();
        if slots.len() != fresh.len() {
            return false;
        }
        let indexed = self.nodes.iter().filter(|n| n.slot != NIL).count();
        if indexed != slots.iter().map(|&s| self.positions[s as usize].live).sum::<usize>() {
            return false;
        }
        // Map node handles to current stream positions for first_pos.
        let mut rank = vec![usize::MAX; self.nodes.len()];
        let mut u = if self.nodes.is_empty() { NIL } else { 0 };
        let mut i = 0;
        while u != NIL {
            rank[u as usize] = i;
            i += 1;
            u = self.nodes[u as usize].next;
        }
        for slot in slots {
            let pair = self.pairs[slot as usize];
            let live = self.live_positions(slot);
            if live.len() != self.positions[slot as usize].live {
                return false;
            }
            let matches = live.iter().all(|&u| {
                let node = self.nodes[u as usize];
                node.token != DEAD && node.next != NIL && (node.token, self.nodes[node.next as usize].token) == pair
            });
            if !matches {
                return false;
            }
            let Some((count, first)) = self.key(slot) else {
                return false;
            };
            let expected = PairStat { count, first_pos: rank[first as usize] };
            if fresh.get(pair) != Some(expected) {
                return false;
            }
        }
        true
    }
}
