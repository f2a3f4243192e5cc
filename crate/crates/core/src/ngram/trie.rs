//! Reversed-context count trie.
//!
//! The root is the empty context. The child of a node under token `t` is the
//! context extended one token to the *left*, so walking from the root over
//! `h[k-1], h[k-2], ...` visits every suffix of a history `h` in one pass,
//! shortest first. Each node stores counts of the tokens that followed its
//! context, and the Kneser-Ney continuation counts for that context.

use std::collections::BTreeMap;

pub type NodeId = usize;

pub const ROOT: NodeId = 0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Node {
    /// Left-extension token → child context.
    pub children: BTreeMap<u32, NodeId>,
    /// Next token → count of `(context, token)`.
    pub followers: BTreeMap<u32, u64>,
    pub total: u64,
    /// Next token → number of distinct left extensions of `(context, token)`.
    pub cont: BTreeMap<u32, u64>,
    pub cont_total: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountTrie {
    nodes: Vec<Node>,
}

impl Default for CountTrie {
    fn default() -> Self {
        Self {
            nodes: vec![Node::default()],
        }
    }
}

impl CountTrie {
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1 && self.nodes[0].total == 0
    }

    pub fn child(&self, id: NodeId, token: u32) -> Option<NodeId> {
        self.nodes[id].children.get(&token).copied()
    }

    fn child_or_insert(&mut self, id: NodeId, token: u32) -> NodeId {
        if let Some(c) = self.child(id, token) {
            return c;
        }
        let c = self.nodes.len();
        self.nodes.push(Node::default());
        self.nodes[id].children.insert(token, c);
        c
    }

    /// Add `count` occurrences of `word` after each suffix of `reversed_ctx`
    /// up to its full length (`reversed_ctx[0]` is the nearest token).
    pub fn add(&mut self, reversed_ctx: &[u32], word: u32, count: u64) {
        let mut node = ROOT;
        self.bump(node, word, count);
        for &t in reversed_ctx {
            node = self.child_or_insert(node, t);
            self.bump(node, word, count);
        }
    }

    /// Add `count` to exactly one n-gram, creating the context path.
    pub fn add_exact(&mut self, reversed_ctx: &[u32], word: u32, count: u64) {
        let mut node = ROOT;
        for &t in reversed_ctx {
            node = self.child_or_insert(node, t);
        }
        self.bump(node, word, count);
    }

    fn bump(&mut self, node: NodeId, word: u32, count: u64) {
        let n = &mut self.nodes[node];
        *n.followers.entry(word).or_default() += count;
        n.total += count;
    }

    /// Deepest-first chain of nodes matching suffixes of a history given
    /// nearest-token-first, starting with the root, at most `max_depth` deep.
    pub fn chain(&self, reversed_history: &[u32], max_depth: usize) -> Vec<NodeId> {
        let mut out = vec![ROOT];
        let mut node = ROOT;
        for &t in reversed_history.iter().take(max_depth) {
            match self.child(node, t) {
                Some(c) => {
                    node = c;
                    out.push(c);
                }
                None => break,
            }
        }
        out
    }

    /// Count of the n-gram `(context, word)`; `reversed_ctx` nearest first.
    pub fn count(&self, reversed_ctx: &[u32], word: u32) -> u64 {
        let mut node = ROOT;
        for &t in reversed_ctx {
            match self.child(node, t) {
                Some(c) => node = c,
                None => return 0,
            }
        }
        self.nodes[node].followers.get(&word).copied().unwrap_or(0)
    }

    /// Recompute continuation counts from the raw counts.
    ///
    /// Every stored `(v h, w)` contributes one distinct left extension `v`
    /// to `(h, w)`; the parent of the node for `v h` is the node for `h`.
    pub fn rebuild_continuations(&mut self) {
        for n in &mut self.nodes {
            n.cont.clear();
            n.cont_total = 0;
        }
        let mut stack = vec![ROOT];
        let mut updates: Vec<(NodeId, u32)> = Vec::new();
        while let Some(id) = stack.pop() {
            for &child in self.nodes[id].children.values() {
                for &w in self.nodes[child].followers.keys() {
                    updates.push((id, w));
                }
                stack.push(child);
            }
        }
        for (id, w) in updates {
            let n = &mut self.nodes[id];
            *n.cont.entry(w).or_default() += 1;
            n.cont_total += 1;
        }
    }

    /// Every node's follower counts sum to its stored total.
    pub fn totals_consistent(&self) -> bool {
        self.nodes.iter().all(|n| n.followers.values().sum::<u64>() == n.total)
            && self.nodes.iter().all(|n| n.cont.values().sum::<u64>() == n.cont_total)
    }

    /// Visit nodes depth-first with children in token order, passing the
    /// reversed context of each node.
    pub fn visit(&self, mut f: impl FnMut(&[u32], &Node)) {
        fn go(trie: &CountTrie, id: NodeId, path: &mut Vec<u32>, f: &mut dyn FnMut(&[u32], &Node)) {
            let node = &trie.nodes[id];
            f(path, node);
            for (&t, &c) in &node.children {
                path.push(t);
                go(trie, c, path, f);
                path.pop();
            }
        }
        let mut path = Vec::new();
        go(self, ROOT, &mut path, &mut f);
    }

    /// Number of distinct stored n-grams per order (index 0 = unigrams).
    pub fn ngrams_per_order(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.visit(|ctx, node| {
            if out.len() <= ctx.len() {
                out.resize(ctx.len() + 1, 0);
            }
            out[ctx.len()] += node.followers.len() as u64;
        });
        out
    }
}
