//! Rooted binary plane trees: every node has degree one (bud) or three
//! (internal), so the root has one or three children.
//!
//! The counterclockwise tour of the unique face starts at the root edge
//! `(r, c1(r))` and induces the corner sequence used everywhere downstream:
//! corner `j` is the corner swept just before traversing tour dart `j`, so
//! corner 0 is the root corner. Corner labels follow the walk rule (-1 when
//! leaving an internal corner, +3 when leaving a bud corner, an extra -6 at
//! the wrap) and are cross-checked against the direct path-count formula;
//! disagreement is a hard error since the two routes are independent.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::map::{CanonicalCode, RotationMap};

pub type NodeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("node {0} is not a bud")]
    NotABud(NodeId),
    #[error("corner {0} is not a bud corner")]
    NotABudCorner(usize),
    #[error("node {0} is not a cherry (internal with two bud children)")]
    NotACherry(NodeId),
    #[error("exhaustive limit exceeded: n={0} > limit {1}")]
    LimitExceeded(usize, usize),
    #[error("walk labels disagree with the direct formula at corner {corner}: walk={walk} formula={formula}")]
    LabelMismatch { corner: usize, walk: i64, formula: i64 },
    #[error("tree parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Node {
    parent: Option<NodeId>,
    children: Vec<NodeId>,
}

/// A rooted binary plane tree. Node ids are stable across [`PlaneTree::grow`],
/// which returns a fresh value and never relocates existing nodes.
#[derive(Debug, Clone)]
pub struct PlaneTree {
    nodes: Vec<Node>,
    root: NodeId,
    tour: OnceLock<TourData>,
}

impl PartialEq for PlaneTree {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.nodes == other.nodes
    }
}
impl Eq for PlaneTree {}

/// Cached tour of the unique face and the derived corner tables.
#[derive(Debug, Clone)]
pub struct TourData {
    /// Oriented edges `(u, v)` in counterclockwise tour order; length `4n+2`.
    pub tour: Vec<(u32, u32)>,
    /// Origin node of each tour dart = owner of the corner at that position.
    pub corner_node: Vec<u32>,
    /// 1-based index i of each corner among its node's corners (for eps = 2(i-1)).
    pub corner_rank: Vec<u8>,
    /// Whether the corner's node is a bud.
    pub is_bud_corner: Vec<bool>,
    /// Corner positions of each node, in tour order (1 or 3 entries).
    pub corners_of_node: Vec<Vec<u32>>,
    /// Bud corner positions in tour order.
    pub bud_corners: Vec<u32>,
}

/// Corner labels: the walk values, their minimum, and the path-count
/// components `(N1, N2, N3)` retained for cross-checks (eps is `2(rank-1)`).
#[derive(Debug, Clone)]
pub struct CornerLabeling {
    pub labels: Vec<i32>,
    pub s_star: i32,
    pub components: Vec<[i32; 3]>,
}

/// Attachment of one bud corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attachment {
    /// Attaches at an internal corner; `wrapped` records whether the scan
    /// passed the root corner.
    Interior { corner: usize, wrapped: bool },
    /// Hexagon-bound: attaches at hexagon corner `0..=5`.
    Hex(u8),
}

/// One closure event: `buds` (in closing order, innermost first) all attach
/// at internal corner `corner`.
#[derive(Debug, Clone)]
pub struct CloseEvent {
    pub corner: usize,
    pub wrapped: bool,
    pub buds: Vec<usize>,
}

/// The attachment map sigma on bud corners, the hexagon-bound set Delta, and
/// the chronological closure events that realize it.
#[derive(Debug, Clone)]
pub struct AttachmentMap {
    /// Keyed by bud corner tour position.
    sigma: Vec<(usize, Attachment)>,
    /// Bud corner positions with no interior attachment, in tour order.
    pub delta: Vec<usize>,
    /// Closure events in chronological order.
    pub events: Vec<CloseEvent>,
}

impl AttachmentMap {
    pub fn get(&self, bud_corner: usize) -> Option<Attachment> {
        self.sigma
            .binary_search_by_key(&bud_corner, |e| e.0)
            .ok()
            .map(|i| self.sigma[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Attachment)> + '_ {
        self.sigma.iter().copied()
    }
}

impl PlaneTree {
    /// The 4-node tree whose root is internal with three bud children.
    pub fn star() -> Self {
        let mut t = PlaneTree {
            nodes: vec![Node {
                parent: None,
                children: vec![],
            }],
            root: 0,
            tour: OnceLock::new(),
        };
        for _ in 0..3 {
            let id = t.nodes.len();
            t.nodes.push(Node {
                parent: Some(0),
                children: vec![],
            });
            t.nodes[0].children.push(id);
        }
        t
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.nodes[v].parent
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.nodes[v].children
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.nodes[v].children.len() + usize::from(self.nodes[v].parent.is_some())
    }

    pub fn is_bud(&self, v: NodeId) -> bool {
        self.degree(v) == 1
    }

    /// The unique neighbor of a bud.
    pub fn bud_neighbor(&self, v: NodeId) -> NodeId {
        debug_assert!(self.is_bud(v));
        match self.nodes[v].parent {
            Some(p) => p,
            None => self.nodes[v].children[0],
        }
    }

    pub fn internal_count(&self) -> usize {
        (0..self.nodes.len()).filter(|&v| !self.is_bud(v)).count()
    }

    pub fn bud_count(&self) -> usize {
        (0..self.nodes.len()).filter(|&v| self.is_bud(v)).count()
    }

    /// `true` for an internal node whose growth created it last: a non-root
    /// internal node with two bud children, or the root with its second and
    /// third children buds.
    pub fn is_cherry(&self, v: NodeId) -> bool {
        if self.is_bud(v) {
            return false;
        }
        let ch = &self.nodes[v].children;
        if v == self.root {
            ch.len() == 3 && self.is_bud(ch[1]) && self.is_bud(ch[2])
        } else {
            ch.len() == 2 && self.is_bud(ch[0]) && self.is_bud(ch[1])
        }
    }

    /// Checks binary-tree degrees; used by constructors and tests.
    pub fn check_binary(&self) -> bool {
        (0..self.nodes.len()).all(|v| {
            let d = self.degree(v);
            d == 1 || d == 3
        })
    }

    /// Counterclockwise tour and corner tables, computed once per tree.
    pub fn tour(&self) -> &TourData {
        self.tour.get_or_init(|| self.compute_tour())
    }

    fn compute_tour(&self) -> TourData {
        let n_nodes = self.nodes.len();
        let mut tour = Vec::with_capacity(2 * (n_nodes - 1));
        // iterative contour: (node, next child slot)
        let mut stack = vec![(self.root, 0usize)];
        while let Some(&mut (v, ref mut slot)) = stack.last_mut() {
            if *slot < self.nodes[v].children.len() {
                let c = self.nodes[v].children[*slot];
                *slot += 1;
                tour.push((v as u32, c as u32));
                stack.push((c, 0));
            } else {
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    tour.push((v as u32, p as u32));
                }
            }
        }
        let m = tour.len();
        let mut corner_node = Vec::with_capacity(m);
        let mut corner_rank = vec![0u8; m];
        let mut is_bud_corner = Vec::with_capacity(m);
        let mut corners_of_node = vec![Vec::new(); n_nodes];
        for (j, &(u, _)) in tour.iter().enumerate() {
            corner_node.push(u);
            is_bud_corner.push(self.is_bud(u as usize));
            corners_of_node[u as usize].push(j as u32);
            corner_rank[j] = corners_of_node[u as usize].len() as u8;
        }
        let bud_corners = (0..m)
            .filter(|&j| is_bud_corner[j])
            .map(|j| j as u32)
            .collect();
        TourData {
            tour,
            corner_node,
            corner_rank,
            is_bud_corner,
            corners_of_node,
            bud_corners,
        }
    }

    /// Corner labels by the linear walk rule, cross-checked corner-by-corner
    /// against the direct formula `3*N3 + N2 - N1 + eps`.
    pub fn label_corners(&self) -> Result<CornerLabeling, TreeError> {
        let td = self.tour();
        let m = td.tour.len();
        let root_is_bud = self.is_bud(self.root);
        let mut labels = vec![0i32; m];
        labels[0] = if root_is_bud { -4 } else { 0 };
        for j in 0..m - 1 {
            let step = if td.is_bud_corner[j] { 3 } else { -1 };
            labels[j + 1] = labels[j] + step;
        }
        // closing the tour must return to the root label after the extra -6
        let last_step = if td.is_bud_corner[m - 1] { 3 } else { -1 };
        debug_assert_eq!(labels[m - 1] + last_step - 6, labels[0]);

        // independent route: N-counts along root paths, one DFS
        let mut components = vec![[0i32; 3]; m];
        let mut counts = vec![[0i32; 3]; self.nodes.len()];
        let mut stack = vec![self.root];
        let mut visited = vec![false; self.nodes.len()];
        visited[self.root] = true;
        while let Some(v) = stack.pop() {
            for (i, &c) in self.nodes[v].children.iter().enumerate() {
                let mut nc = counts[v];
                nc[i] += 1;
                counts[c] = nc;
                visited[c] = true;
                stack.push(c);
            }
        }
        debug_assert!(visited.iter().all(|&b| b));
        for j in 0..m {
            let v = td.corner_node[j] as usize;
            let [n1, n2, n3] = counts[v];
            components[j] = [n1, n2, n3];
            let formula = if j == 0 {
                if root_is_bud {
                    -4
                } else {
                    0
                }
            } else {
                let eps = 2 * (td.corner_rank[j] as i32 - 1);
                3 * n3 + n2 - n1 + eps
            };
            if formula != labels[j] {
                return Err(TreeError::LabelMismatch {
                    corner: j,
                    walk: labels[j] as i64,
                    formula: formula as i64,
                });
            }
        }
        let s_star = labels.iter().copied().min().unwrap();
        Ok(CornerLabeling {
            labels,
            s_star,
            components,
        })
    }

    /// Attachment corners for every bud corner, by the one-pass stack
    /// matching over two unrolled loops of the corner sequence. O(n).
    pub fn attachments(&self, lab: &CornerLabeling) -> AttachmentMap {
        let td = self.tour();
        let m = td.tour.len();
        let mut pending: Vec<(i64, usize)> = Vec::new(); // (unrolled level, bud corner)
        let mut sigma: Vec<(usize, Attachment)> = Vec::new();
        let mut events = Vec::new();
        for j in 0..2 * m {
            let jj = j % m;
            let level = lab.labels[jj] as i64 + if j >= m { 6 } else { 0 };
            if td.is_bud_corner[jj] {
                if j < m {
                    pending.push((level, jj));
                }
            } else if pending.last().is_some_and(|&(l, _)| l == level) {
                let wrapped = j >= m;
                let mut buds = Vec::new();
                while pending.last().is_some_and(|&(l, _)| l == level) {
                    let (_, bud) = pending.pop().unwrap();
                    buds.push(bud);
                    sigma.push((
                        bud,
                        Attachment::Interior {
                            corner: jj,
                            wrapped,
                        },
                    ));
                }
                events.push(CloseEvent {
                    corner: jj,
                    wrapped,
                    buds,
                });
            }
        }
        let mut delta: Vec<usize> = pending.iter().map(|&(_, b)| b).collect();
        delta.sort_unstable();
        for &b in &delta {
            let d = lab.labels[b] - lab.s_star;
            debug_assert!((0..=6).contains(&d));
            let idx = if d == 6 { 0 } else { d as u8 };
            sigma.push((b, Attachment::Hex(idx)));
        }
        sigma.sort_unstable_by_key(|e| e.0);
        AttachmentMap {
            sigma,
            delta,
            events,
        }
    }

    /// Quadratic reference for [`attachments`](Self::attachments): for each bud
    /// corner, scan the subsequent corners directly. Used by tests.
    pub fn attachments_scan_oracle(&self, lab: &CornerLabeling) -> Vec<(usize, Attachment)> {
        let td = self.tour();
        let m = td.tour.len();
        let mut out = Vec::new();
        for &bud in &td.bud_corners {
            let bud = bud as usize;
            let target = lab.labels[bud] as i64;
            let mut found = None;
            for step in 1..m {
                let j = (bud + step) % m;
                if td.is_bud_corner[j] {
                    continue;
                }
                let wrapped = bud + step >= m;
                let threshold = target - if wrapped { 6 } else { 0 };
                if (lab.labels[j] as i64) <= threshold {
                    found = Some(Attachment::Interior { corner: j, wrapped });
                    break;
                }
            }
            let att = found.unwrap_or_else(|| {
                let d = lab.labels[bud] - lab.s_star;
                Attachment::Hex(if d == 6 { 0 } else { d as u8 })
            });
            out.push((bud, att));
        }
        out
    }

    /// The extension of sigma to internal corners: the next corner of the tour
    /// if it is internal, otherwise the attachment of that bud corner.
    pub fn extended_attachment(
        &self,
        lab: &CornerLabeling,
        att: &AttachmentMap,
        corner: usize,
    ) -> Attachment {
        let td = self.tour();
        let m = td.tour.len();
        debug_assert!(!td.is_bud_corner[corner]);
        let next = (corner + 1) % m;
        let _ = lab;
        if !td.is_bud_corner[next] {
            Attachment::Interior {
                corner: next,
                wrapped: next == 0,
            }
        } else {
            match att.get(next).unwrap() {
                Attachment::Interior {
                    corner: c,
                    wrapped,
                } => Attachment::Interior {
                    corner: c,
                    // wrap seen from the original corner
                    wrapped: wrapped || next == 0,
                },
                hex @ Attachment::Hex(_) => hex,
            }
        }
    }

    /// Grows the tree at a bud corner: the bud becomes internal with two new
    /// bud children. Returns a fresh tree; `self` is unchanged.
    pub fn grow(&self, bud_corner: usize) -> Result<PlaneTree, TreeError> {
        let td = self.tour();
        if bud_corner >= td.tour.len() || !td.is_bud_corner[bud_corner] {
            return Err(TreeError::NotABudCorner(bud_corner));
        }
        let v = td.corner_node[bud_corner] as usize;
        Ok(self.grow_at_node(v)?)
    }

    /// Grows at a bud node directly (the bud has a single corner).
    pub fn grow_at_node(&self, v: NodeId) -> Result<PlaneTree, TreeError> {
        if !self.is_bud(v) {
            return Err(TreeError::NotABud(v));
        }
        let mut nodes = self.nodes.clone();
        for _ in 0..2 {
            let id = nodes.len();
            nodes.push(Node {
                parent: Some(v),
                children: vec![],
            });
            nodes[v].children.push(id);
        }
        Ok(PlaneTree {
            nodes,
            root: self.root,
            tour: OnceLock::new(),
        })
    }

    /// Deletes the two bud children of a cherry, turning it back into a bud.
    /// Exact inverse of [`grow_at_node`](Self::grow_at_node).
    pub fn ungrow(&self, v: NodeId) -> Result<PlaneTree, TreeError> {
        if !self.is_cherry(v) {
            return Err(TreeError::NotACherry(v));
        }
        let mut nodes = self.nodes.clone();
        let removed: Vec<NodeId> = if v == self.root {
            nodes[v].children.drain(1..).collect()
        } else {
            nodes[v].children.drain(..).collect()
        };
        debug_assert_eq!(removed.len(), 2);
        // compact: removed ids are not necessarily the last two, remap
        let mut live: Vec<NodeId> = (0..nodes.len()).filter(|i| !removed.contains(i)).collect();
        live.sort_unstable();
        let mut remap = vec![usize::MAX; nodes.len()];
        for (new, &old) in live.iter().enumerate() {
            remap[old] = new;
        }
        let mut out = Vec::with_capacity(live.len());
        for &old in &live {
            let nd = &nodes[old];
            out.push(Node {
                parent: nd.parent.map(|p| remap[p]),
                children: nd.children.iter().map(|&c| remap[c]).collect(),
            });
        }
        Ok(PlaneTree {
            nodes: out,
            root: remap[self.root],
            tour: OnceLock::new(),
        })
    }

    /// Balanced-parenthesis encoding of the shape (preorder).
    pub fn parens(&self) -> String {
        let mut s = String::with_capacity(2 * self.nodes.len());
        // (node, entering?) explicit stack
        let mut stack = vec![(self.root, false)];
        while let Some((v, done)) = stack.pop() {
            if done {
                s.push(')');
            } else {
                s.push('(');
                stack.push((v, true));
                for &c in self.nodes[v].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        s
    }

    /// Parses a balanced-parenthesis shape string.
    pub fn from_parens(s: &str) -> Result<PlaneTree, TreeError> {
        let mut nodes: Vec<Node> = Vec::new();
        let mut stack: Vec<NodeId> = Vec::new();
        let mut root = None;
        for ch in s.chars() {
            match ch {
                '(' => {
                    let id = nodes.len();
                    nodes.push(Node {
                        parent: stack.last().copied(),
                        children: vec![],
                    });
                    if let Some(&p) = stack.last() {
                        nodes[p].children.push(id);
                    } else if root.is_some() {
                        return Err(TreeError::Parse("multiple roots".into()));
                    } else {
                        root = Some(id);
                    }
                    stack.push(id);
                }
                ')' => {
                    if stack.pop().is_none() {
                        return Err(TreeError::Parse("unbalanced ')'".into()));
                    }
                }
                c if c.is_whitespace() => {}
                c => return Err(TreeError::Parse(format!("unexpected character {c:?}"))),
            }
        }
        if !stack.is_empty() {
            return Err(TreeError::Parse("unbalanced '('".into()));
        }
        let t = PlaneTree {
            nodes,
            root: root.ok_or_else(|| TreeError::Parse("empty tree".into()))?,
            tour: OnceLock::new(),
        };
        if !t.check_binary() {
            return Err(TreeError::Parse("not a binary tree".into()));
        }
        Ok(t)
    }

    /// TREEV1 serialization: a header plus the parenthesis shape.
    pub fn to_text(&self) -> String {
        format!(
            "TREEV1 n={} root_internal={}\n{}\n",
            self.internal_count(),
            u8::from(!self.is_bud(self.root)),
            self.parens()
        )
    }

    pub fn from_text(text: &str) -> Result<PlaneTree, TreeError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| TreeError::Parse("empty".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("TREEV1") {
            return Err(TreeError::Parse("expected TREEV1 header".into()));
        }
        let mut n: Option<usize> = None;
        let mut root_internal: Option<u8> = None;
        for p in parts {
            if let Some(v) = p.strip_prefix("n=") {
                n = Some(v.parse().map_err(|_| TreeError::Parse("bad n".into()))?);
            } else if let Some(v) = p.strip_prefix("root_internal=") {
                root_internal =
                    Some(v.parse().map_err(|_| TreeError::Parse("bad flag".into()))?);
            } else {
                return Err(TreeError::Parse(format!("unknown header field {p}")));
            }
        }
        let shape = lines.next().ok_or_else(|| TreeError::Parse("missing shape".into()))?;
        if lines.next().is_some_and(|l| !l.trim().is_empty()) {
            return Err(TreeError::Parse("trailing content".into()));
        }
        let t = Self::from_parens(shape)?;
        if let Some(n) = n {
            if t.internal_count() != n {
                return Err(TreeError::Parse("header n disagrees with shape".into()));
            }
        }
        if let Some(ri) = root_internal {
            if u8::from(!t.is_bud(t.root)) != ri {
                return Err(TreeError::Parse("header root flag disagrees".into()));
            }
        }
        Ok(t)
    }

    /// The tree viewed as a rooted map (rotation system), rooted at the dart
    /// `(r, c1(r))`. Used for canonical codes.
    pub fn as_map(&self) -> RotationMap {
        let td = self.tour();
        let m = td.tour.len();
        // dart id = tour position of the oriented edge
        let mut opposite = vec![usize::MAX; m];
        {
            // match (u,v) with (v,u): each unordered edge appears twice
            let mut open: std::collections::HashMap<(u32, u32), usize> =
                std::collections::HashMap::new();
            for (j, &(u, v)) in td.tour.iter().enumerate() {
                if let Some(i) = open.remove(&(v, u)) {
                    opposite[i] = j;
                    opposite[j] = i;
                } else {
                    open.insert((u, v), j);
                }
            }
            debug_assert!(open.is_empty());
        }
        // rotation: darts at a node in tour order are already ccw
        let mut darts_at = vec![Vec::new(); self.nodes.len()];
        for (j, &(u, _)) in td.tour.iter().enumerate() {
            darts_at[u as usize].push(j);
        }
        let mut sigma = vec![usize::MAX; m];
        for ds in &darts_at {
            for (i, &d) in ds.iter().enumerate() {
                sigma[d] = ds[(i + 1) % ds.len()];
            }
        }
        let vertex_of = td.tour.iter().map(|&(u, _)| u as usize).collect();
        RotationMap::new(sigma, opposite, vertex_of, Some(0)).unwrap()
    }

    pub fn canonical_code(&self) -> CanonicalCode {
        self.as_map().canonical_code()
    }
}

impl fmt::Display for PlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.parens())
    }
}

// --- enumeration and exact sampling -----------------------------------------
//
// Both go through the standard correspondence with full binary trees: insert a
// node in the middle of the root edge and make the head and tail of the root
// edge its left and right subtrees. A binary tree with n internal nodes maps
// to a full binary tree with n+1 internal nodes, so |T_n| = Catalan(n+1).

/// Full binary shape in preorder: true = internal (two children), false = leaf.
type WShape = Vec<bool>;

fn w_to_tree(w: &WShape) -> PlaneTree {
    // parse preorder into (left, right) ranges; build the plane tree directly
    // pos: cursor into w. Returns node id in `nodes`.
    fn build(w: &WShape, pos: &mut usize, nodes: &mut Vec<Node>, parent: Option<NodeId>) -> NodeId {
        let internal = w[*pos];
        *pos += 1;
        let id = nodes.len();
        nodes.push(Node {
            parent,
            children: vec![],
        });
        if internal {
            let l = build(w, pos, nodes, Some(id));
            nodes[id].children.push(l);
            let r = build(w, pos, nodes, Some(id));
            nodes[id].children.push(r);
        }
        id
    }
    debug_assert!(w[0], "the inserted edge-midpoint is always internal");
    let mut pos = 1usize;
    let mut nodes: Vec<Node> = Vec::new();
    // left subtree of the midpoint = subtree of c1(r); right = root
    let head = build(w, &mut pos, &mut nodes, None);
    let root = build(w, &mut pos, &mut nodes, None);
    // attach head as first child of root
    nodes[root].children.insert(0, head);
    nodes[head].parent = Some(root);
    let t = PlaneTree {
        nodes,
        root,
        tour: OnceLock::new(),
    };
    debug_assert!(t.check_binary());
    t
}

/// All binary trees with `n` internal nodes, each exactly once.
pub fn enumerate_trees(n: usize, limit: usize) -> Result<Vec<PlaneTree>, TreeError> {
    if n > limit {
        return Err(TreeError::LimitExceeded(n, limit));
    }
    // enumerate full binary shapes with n+1 internal nodes
    fn gen(k: usize) -> Vec<WShape> {
        if k == 0 {
            return vec![vec![false]];
        }
        let mut out = Vec::new();
        for a in 0..k {
            for l in gen(a) {
                for r in gen(k - 1 - a) {
                    let mut w = Vec::with_capacity(2 * k + 1);
                    w.push(true);
                    w.extend_from_slice(&l);
                    w.extend_from_slice(&r);
                    out.push(w);
                }
            }
        }
        out
    }
    Ok(gen(n + 1).iter().map(w_to_tree).collect())
}

/// Catalan number C_m as a big integer.
pub fn catalan(m: usize) -> BigUint {
    let mut c = BigUint::one();
    for i in 1..=m as u64 {
        c = c * (2 * (2 * i - 1)) / (i + 1);
    }
    c
}

/// |T_n| = Catalan(n+1).
pub fn tree_count(n: usize) -> BigUint {
    catalan(n + 1)
}

/// Exactly uniform sampler over `T_n` by unranking against ballot counts.
///
/// The preorder of the associated full binary tree is drawn symbol by symbol;
/// with `s` open slots and `i` internal symbols left, the number of valid
/// completions is `C(s,i) = s (2i+s-1)! / (i! (i+s)!)`, updated incrementally
/// so every step costs one small-factor big-integer multiply and divide.
pub struct UniformTreeSampler {
    n: usize,
    total: BigUint,
}

impl UniformTreeSampler {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        UniformTreeSampler {
            n,
            total: tree_count(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PlaneTree {
        let rank = rng.gen_biguint_below(&self.total);
        self.unrank(rank)
    }

    /// Tree at `rank` in the lexicographic (internal-before-leaf) preorder
    /// order of the associated full binary shapes.
    pub fn unrank(&self, mut rank: BigUint) -> PlaneTree {
        let m = self.n + 1;
        let mut w: WShape = Vec::with_capacity(2 * m + 1);
        let mut s: u64 = 1;
        let mut i: u64 = m as u64;
        let mut cur = self.total.clone();
        while s > 0 {
            if i == 0 {
                // leaves forced
                w.push(false);
                s -= 1;
                continue;
            }
            // C(s+1, i-1) = cur * (s+1) * i / (s * (2i+s-1))
            let internal_count = &cur * ((s + 1) * i) / (s * (2 * i + s - 1));
            if rank < internal_count {
                w.push(true);
                cur = internal_count;
                s += 1;
                i -= 1;
            } else {
                rank -= &internal_count;
                cur -= internal_count;
                w.push(false);
                s -= 1;
            }
        }
        debug_assert!(rank.is_zero() || !cur.is_zero());
        w_to_tree(&w)
    }
}

/// Convenience one-shot uniform sample.
pub fn uniform_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PlaneTree {
    UniformTreeSampler::new(n).sample(rng)
}

/// A random tree grown by uniformly random bud choices. Not uniform on `T_n`;
/// cheap, used for large-n structural demos and benchmarks.
pub fn random_grown_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PlaneTree {
    assert!(n >= 1);
    let mut t = if rng.gen_bool(0.5) {
        PlaneTree::star()
    } else {
        PlaneTree::from_parens("((()()))").unwrap()
    };
    // maintain the bud list directly to stay O(1) per step
    let mut buds: Vec<NodeId> = (0..t.node_count()).filter(|&v| t.is_bud(v)).collect();
    for _ in 1..n {
        let bi = rng.gen_range(0..buds.len());
        let v = buds[bi];
        let base = t.node_count();
        t = t.grow_at_node(v).unwrap();
        buds.swap_remove(bi);
        buds.push(base);
        buds.push(base + 1);
    }
    debug_assert_eq!(t.internal_count(), n);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeMap, BTreeSet};

    fn root_bud_tree() -> PlaneTree {
        PlaneTree::from_parens("((()()))").unwrap()
    }

    #[test]
    fn star_counts() {
        let t = PlaneTree::star();
        assert_eq!(t.internal_count(), 1);
        assert_eq!(t.bud_count(), 3);
        assert!(t.check_binary());
        let td = t.tour();
        assert_eq!(td.tour.len(), 6);
    }

    #[test]
    fn count_identity_holds() {
        for n in 1..=5 {
            for t in enumerate_trees(n, 10).unwrap() {
                let td = t.tour();
                let internal_corners = td.is_bud_corner.iter().filter(|&&b| !b).count();
                assert_eq!(internal_corners / 3, t.internal_count());
                assert_eq!(t.internal_count(), t.bud_count() - 2);
                assert_eq!(internal_corners % 3, 0);
            }
        }
    }

    // Hand-derived labels for the two trees of T_1 (walk rule applied on
    // paper): star = [0,-1,2,1,4,3], root-bud tree = [-4,-1,-2,1,0,3].
    #[test]
    fn frozen_labels_star() {
        let t = PlaneTree::star();
        let lab = t.label_corners().unwrap();
        assert_eq!(lab.labels, vec![0, -1, 2, 1, 4, 3]);
        assert_eq!(lab.s_star, -1);
    }

    #[test]
    fn frozen_labels_root_bud() {
        let t = root_bud_tree();
        let lab = t.label_corners().unwrap();
        assert_eq!(lab.labels, vec![-4, -1, -2, 1, 0, 3]);
        assert_eq!(lab.s_star, -4);
    }

    #[test]
    fn root_corner_label_by_root_kind() {
        for n in 1..=4 {
            for t in enumerate_trees(n, 10).unwrap() {
                let lab = t.label_corners().unwrap();
                let expect = if t.is_bud(t.root()) { -4 } else { 0 };
                assert_eq!(lab.labels[0], expect);
            }
        }
    }

    #[test]
    fn walk_equals_formula_exhaustive() {
        for n in 1..=6 {
            for t in enumerate_trees(n, 10).unwrap() {
                t.label_corners().unwrap();
            }
        }
    }

    #[test]
    fn walk_equals_formula_random_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let t = random_grown_tree(200, &mut rng);
            t.label_corners().unwrap();
        }
    }

    #[test]
    fn tour_increments() {
        let t = root_bud_tree();
        let td = t.tour();
        let lab = t.label_corners().unwrap();
        for j in 0..td.tour.len() - 1 {
            let d = lab.labels[j + 1] - lab.labels[j];
            if td.is_bud_corner[j] {
                assert_eq!(d, 3);
            } else {
                assert_eq!(d, -1);
            }
        }
    }

    #[test]
    fn enumeration_counts_are_catalan() {
        use num_traits::ToPrimitive;
        for n in 1..=7 {
            let ts = enumerate_trees(n, 10).unwrap();
            assert_eq!(ts.len(), tree_count(n).to_usize().unwrap());
            // no duplicates, by canonical code of the tree as a rooted map
            let codes: BTreeSet<_> = ts.iter().map(|t| t.canonical_code()).collect();
            assert_eq!(codes.len(), ts.len());
        }
    }

    #[test]
    fn enumeration_limit_enforced() {
        assert!(matches!(
            enumerate_trees(11, 10),
            Err(TreeError::LimitExceeded(11, 10))
        ));
    }

    #[test]
    fn attachments_match_scan_oracle_exhaustive() {
        for n in 1..=6 {
            for t in enumerate_trees(n, 10).unwrap() {
                let lab = t.label_corners().unwrap();
                let fast = t.attachments(&lab);
                let slow = t.attachments_scan_oracle(&lab);
                let fast_pairs: Vec<(usize, Attachment)> = fast.iter().collect();
                assert_eq!(fast_pairs, slow, "tree {t}");
            }
        }
    }

    #[test]
    fn attachment_label_equations() {
        for n in 1..=5 {
            for t in enumerate_trees(n, 10).unwrap() {
                let lab = t.label_corners().unwrap();
                let att = t.attachments(&lab);
                for (bud, a) in att.iter() {
                    match a {
                        Attachment::Interior { corner, wrapped } => {
                            let expect = lab.labels[bud] - if wrapped { 6 } else { 0 };
                            assert_eq!(lab.labels[corner], expect);
                        }
                        Attachment::Hex(_) => {
                            let d = lab.labels[bud] - lab.s_star;
                            assert!((0..=6).contains(&d));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn extended_attachment_equation() {
        // S(sigma(k)) = S(k) - 6*[k < rho < sigma(k)] - 1 over internal corners
        for n in 1..=4 {
            for t in enumerate_trees(n, 10).unwrap() {
                let lab = t.label_corners().unwrap();
                let att = t.attachments(&lab);
                let td = t.tour();
                for j in 0..td.tour.len() {
                    if td.is_bud_corner[j] {
                        continue;
                    }
                    match t.extended_attachment(&lab, &att, j) {
                        Attachment::Interior { corner, wrapped } => {
                            // the -6 applies whenever the walk reaches or
                            // passes the root corner, including landing on it
                            assert_eq!(
                                lab.labels[corner],
                                lab.labels[j] - if wrapped { 6 } else { 0 } - 1,
                                "tree {t} corner {j}"
                            );
                        }
                        Attachment::Hex(_) => {}
                    }
                }
            }
        }
    }

    #[test]
    fn grow_counts_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=5 {
            for t in enumerate_trees(n, 10).unwrap() {
                let td = t.tour().clone();
                for &bud in &td.bud_corners {
                    let grown = t.grow(bud as usize).unwrap();
                    assert_eq!(grown.node_count(), t.node_count() + 2);
                    assert_eq!(grown.bud_count(), t.bud_count() + 1);
                    assert_eq!(grown.internal_count(), n + 1);
                    assert!(grown.check_binary());
                    let v = td.corner_node[bud as usize] as usize;
                    let back = grown.ungrow(v).unwrap();
                    assert_eq!(back.parens(), t.parens());
                }
            }
        }
        let t = random_grown_tree(50, &mut rng);
        assert_eq!(t.internal_count(), 50);
    }

    #[test]
    fn every_tree_has_a_cherry() {
        for n in 2..=6 {
            for t in enumerate_trees(n, 10).unwrap() {
                assert!((0..t.node_count()).any(|v| t.is_cherry(v)), "{t}");
            }
        }
    }

    #[test]
    fn grow_ungrow_relations_agree() {
        // relation built by growing T_3 vs by ungrowing T_4
        let t3 = enumerate_trees(3, 10).unwrap();
        let t4 = enumerate_trees(4, 10).unwrap();
        let key = |t: &PlaneTree| t.parens();
        let mut by_grow: BTreeSet<(String, String)> = BTreeSet::new();
        for t in &t3 {
            let td = t.tour().clone();
            for &bud in &td.bud_corners {
                by_grow.insert((key(t), key(&t.grow(bud as usize).unwrap())));
            }
        }
        let mut by_ungrow: BTreeSet<(String, String)> = BTreeSet::new();
        for t in &t4 {
            for v in 0..t.node_count() {
                if t.is_cherry(v) {
                    by_ungrow.insert((key(&t.ungrow(v).unwrap()), key(t)));
                }
            }
        }
        assert_eq!(by_grow, by_ungrow);
    }

    #[test]
    fn sampler_matches_enumeration_at_small_n() {
        // chi-square against the uniform distribution over T_4
        let n = 4;
        let ts = enumerate_trees(n, 10).unwrap();
        let keys: Vec<String> = ts.iter().map(|t| t.parens()).collect();
        let mut counts: BTreeMap<String, u64> = keys.iter().map(|k| (k.clone(), 0)).collect();
        let sampler = UniformTreeSampler::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 42_000u64;
        for _ in 0..draws {
            let t = sampler.sample(&mut rng);
            *counts.get_mut(&t.parens()).expect("sample outside T_n") += 1;
        }
        let k = keys.len() as f64;
        let expect = draws as f64 / k;
        let chi2: f64 = counts
            .values()
            .map(|&c| {
                let d = c as f64 - expect;
                d * d / expect
            })
            .sum();
        // df = 41; chi2 far beyond 100 would mean a broken sampler
        assert!(chi2 < 100.0, "chi2 = {chi2}");
    }

    #[test]
    fn sampler_always_returns_size_n() {
        let sampler = UniformTreeSampler::new(37);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..32 {
            let t = sampler.sample(&mut rng);
            assert_eq!(t.internal_count(), 37);
            assert!(t.check_binary());
        }
    }

    #[test]
    fn unrank_is_bijective_at_small_n() {
        use num_traits::ToPrimitive;
        let n = 4;
        let sampler = UniformTreeSampler::new(n);
        let total = sampler.total().to_usize().unwrap();
        let mut seen = BTreeSet::new();
        for r in 0..total {
            let t = sampler.unrank(BigUint::from(r));
            assert!(seen.insert(t.parens()));
        }
        assert_eq!(seen.len(), total);
    }

    #[test]
    fn parens_roundtrip() {
        for n in 1..=5 {
            for t in enumerate_trees(n, 10).unwrap() {
                let s = t.to_text();
                let t2 = PlaneTree::from_text(&s).unwrap();
                assert_eq!(t.parens(), t2.parens());
                assert_eq!(t2.to_text(), s);
            }
        }
    }

    #[test]
    fn tree_as_map_validates() {
        for t in enumerate_trees(3, 10).unwrap() {
            let m = t.as_map();
            let rep = m.validate().unwrap();
            assert_eq!(rep.faces, 1);
            assert_eq!(rep.vertices, t.node_count());
        }
    }
}
