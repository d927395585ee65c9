//! The closure bijection between binary trees and irreducible
//! quadrangulations of the hexagon, its inverse, and the local growth
//! rewrite on the map side.
//!
//! Closing builds the map face by face: the tour is laid out as a circular
//! boundary of darts and bud markers, the precomputed closure events are
//! replayed in chronological order (each one pops a bud marker plus the three
//! boundary darts that complete its quadrilateral), and the leftover buds are
//! glued to a fresh hexagon. The rotation system falls out of the face cycles
//! via `sigma = phi ∘ alpha`.
//!
//! Opening recovers the unique preimage tree. Every non-hexagon face of a
//! closure image carries exactly one reversed singly-oriented dart, and the
//! out-degree quotas (three per interior vertex, two per hexagon vertex)
//! pin the rest; the opener solves these constraints by propagation with a
//! little backtracking and gates every candidate through re-closure, so a
//! returned tree is correct by construction.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::map::{Dart, MapError, RotationMap, Vertex};
use crate::tree::{Attachment, AttachmentMap, CornerLabeling, NodeId, PlaneTree, TreeError};

#[derive(Debug, Error)]
pub enum CloseError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("closure internal consistency failure: {0}")]
    Internal(String),
}

#[derive(Debug, Error)]
pub enum OpenError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("input is not a quadrangulation of the hexagon: {0}")]
    NotHexQuadrangulation(String),
    #[error("no counterclockwise-free tri-orientation found; input is not an irreducible quadrangulation of the hexagon")]
    NoOpening,
    #[error("opening search budget exceeded")]
    BudgetExceeded,
}

/// An irreducible quadrangulation of the hexagon, with its canonical hexagon
/// labels and the tri-orientation inherited from the closure.
#[derive(Debug, Clone)]
pub struct HexQuad {
    pub map: RotationMap,
    /// Hexagon vertex ids in label order `0..=5`.
    pub hex_vertices: [Vertex; 6],
    /// Per-dart outgoing flag: both darts of a doubly-oriented edge are
    /// outgoing, only the tail dart of a singly-oriented (closure) edge is.
    pub tri_out: Vec<bool>,
}

/// Where a bud ended up in the map, plus the darts of its closure edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudClosure {
    /// Tail dart of the closure edge, at the bud's neighbor.
    pub tail_dart: Dart,
    /// Head dart, inserted at the attachment vertex.
    pub head_dart: Dart,
    /// Vertex the bud merged into.
    pub target: Vertex,
}

/// Bookkeeping that links a closure image back to its tree: the attachment
/// map, the merge map from tree nodes to map vertices, and the closure edge
/// per bud.
#[derive(Debug, Clone)]
pub struct ClosureRecord {
    pub tree: PlaneTree,
    pub labels: CornerLabeling,
    pub attachments: AttachmentMap,
    /// Tree node -> map vertex (buds map to the vertex they merged into).
    pub node_vertex: Vec<Vertex>,
    /// Per bud node id.
    pub bud_closures: Vec<Option<BudClosure>>,
}

/// What a single incremental growth step did to the map.
#[derive(Debug, Clone)]
pub struct GrowthPatch {
    pub grown_corner: usize,
    /// Bud corners sharing the grown bud's attachment (includes it).
    pub group: Vec<usize>,
    pub new_vertex: Option<Vertex>,
    /// Degree of the face created by deleting the group's closure edges.
    pub intermediate_face_degree: Option<usize>,
    /// Full re-closure was used (hexagon-touching case).
    pub fallback: bool,
}

// --- closing -----------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Item {
    Dart(Dart),
    /// Marker for the bud with this corner position; stands where the bud
    /// edge meets the boundary.
    Marker(usize),
}

/// Circular doubly-linked list over a slab.
struct Ring {
    next: Vec<usize>,
    prev: Vec<usize>,
    items: Vec<Item>,
}

impl Ring {
    fn new(items: Vec<Item>) -> Ring {
        let n = items.len();
        let next = (0..n).map(|i| (i + 1) % n).collect();
        let prev = (0..n).map(|i| (i + n - 1) % n).collect();
        Ring { next, prev, items }
    }

    fn unlink(&mut self, i: usize) {
        let (p, n) = (self.prev[i], self.next[i]);
        self.next[p] = n;
        self.prev[n] = p;
    }

    fn insert_after(&mut self, i: usize, item: Item) -> usize {
        let slot = self.items.len();
        self.items.push(item);
        let n = self.next[i];
        self.next.push(n);
        self.prev.push(i);
        self.next[i] = slot;
        self.prev[n] = slot;
        slot
    }
}

struct DartPlan<'a> {
    tree: &'a PlaneTree,
    edge_of_child: Vec<usize>,
    hex_edge_base: usize,
    internal_vertex: Vec<Vertex>,
    internal_count: usize,
}

impl<'a> DartPlan<'a> {
    fn new(tree: &'a PlaneTree) -> DartPlan<'a> {
        let mut edge_of_child = vec![usize::MAX; tree.node_count()];
        let mut e = 0;
        for v in 0..tree.node_count() {
            if v != tree.root() {
                edge_of_child[v] = e;
                e += 1;
            }
        }
        let mut internal_vertex = vec![usize::MAX; tree.node_count()];
        let mut nv = 0;
        for v in 0..tree.node_count() {
            if !tree.is_bud(v) {
                internal_vertex[v] = nv;
                nv += 1;
            }
        }
        DartPlan {
            tree,
            edge_of_child,
            hex_edge_base: e,
            internal_vertex,
            internal_count: nv,
        }
    }

    /// Dart id of the tour's oriented edge `(u, v)`.
    fn dart_of(&self, u: NodeId, v: NodeId) -> Dart {
        if self.tree.parent(v) == Some(u) {
            2 * self.edge_of_child[v]
        } else {
            debug_assert_eq!(self.tree.parent(u), Some(v));
            2 * self.edge_of_child[u] + 1
        }
    }

    /// Tail and head darts of a bud's edge (tail at the bud's neighbor).
    fn bud_darts(&self, bud: NodeId) -> (Dart, Dart) {
        if bud == self.tree.root() {
            let c1 = self.tree.children(bud)[0];
            (2 * self.edge_of_child[c1] + 1, 2 * self.edge_of_child[c1])
        } else {
            (2 * self.edge_of_child[bud], 2 * self.edge_of_child[bud] + 1)
        }
    }

    fn hex_vertex(&self, j: usize) -> Vertex {
        self.internal_count + j
    }

    /// Hexagon boundary darts for edge `{h_j, h_{j+1}}`.
    fn hex_fwd(&self, j: usize) -> Dart {
        2 * (self.hex_edge_base + j)
    }

    fn hex_bwd(&self, j: usize) -> Dart {
        2 * (self.hex_edge_base + j) + 1
    }
}

fn internal_err<T>(msg: impl Into<String>) -> Result<T, CloseError> {
    Err(CloseError::Internal(msg.into()))
}

/// Closes a binary tree into an irreducible quadrangulation of the hexagon,
/// rooted at the image of the tree's root edge. Runs in linear time.
pub fn close(tree: &PlaneTree) -> Result<(HexQuad, ClosureRecord), CloseError> {
    let labels = tree.label_corners()?;
    let attachments = tree.attachments(&labels);
    close_with(tree, labels, attachments)
}

fn close_with(
    tree: &PlaneTree,
    labels: CornerLabeling,
    attachments: AttachmentMap,
) -> Result<(HexQuad, ClosureRecord), CloseError> {
    let td = tree.tour();
    let m = td.tour.len();
    let n = tree.internal_count();
    let plan = DartPlan::new(tree);
    let edge_count = plan.hex_edge_base + 6;
    let dart_count = 2 * edge_count;

    // boundary ring in tour order: bud edges collapse to markers
    let mut items = Vec::with_capacity(m);
    let mut marker_slot = vec![usize::MAX; m];
    for j in 0..m {
        let (u, v) = td.tour[j];
        let (u, v) = (u as usize, v as usize);
        if tree.is_bud(v) {
            marker_slot[(j + 1) % m] = items.len();
            items.push(Item::Marker((j + 1) % m));
        } else if tree.is_bud(u) {
            // second half of a bud edge, covered by its marker
        } else {
            items.push(Item::Dart(plan.dart_of(u, v)));
        }
    }
    let mut ring = Ring::new(items);

    let mut faces: Vec<Vec<Dart>> = Vec::with_capacity(n + 3);
    let mut bud_closures: Vec<Option<BudClosure>> = vec![None; tree.node_count()];

    // replay interior closure events chronologically
    for ev in &attachments.events {
        let target_node = td.corner_node[ev.corner] as usize;
        let target_vertex = plan.internal_vertex[target_node];
        for &bud_corner in &ev.buds {
            let bud_node = td.corner_node[bud_corner] as usize;
            let (t, h) = plan.bud_darts(bud_node);
            let slot = marker_slot[bud_corner];
            let mut ds = [0 as Dart; 3];
            let mut cur = slot;
            for d in ds.iter_mut() {
                cur = ring.next[cur];
                match ring.items[cur] {
                    Item::Dart(x) => *d = x,
                    Item::Marker(_) => {
                        return internal_err("marker among closure boundary darts")
                    }
                }
            }
            // quad on the left of the head dart and of the popped darts
            faces.push(vec![h, ds[0], ds[1], ds[2]]);
            let anchor = ring.prev[slot];
            ring.unlink(slot);
            let mut cur = ring.next[anchor];
            for _ in 0..3 {
                let nx = ring.next[cur];
                ring.unlink(cur);
                cur = nx;
            }
            ring.insert_after(anchor, Item::Dart(t));
            bud_closures[bud_node] = Some(BudClosure {
                tail_dart: t,
                head_dart: h,
                target: target_vertex,
            });
        }
    }

    // remaining boundary: hexagon-bound buds and the gaps between them
    let delta = &attachments.delta;
    if delta.is_empty() {
        return internal_err("no hexagon-bound buds");
    }
    let start = marker_slot[delta[0]];
    let mut groups: Vec<(usize, Vec<Dart>)> = Vec::new(); // (bud corner, following darts)
    {
        let mut cur = start;
        loop {
            let bud = match ring.items[cur] {
                Item::Marker(b) => b,
                Item::Dart(_) => return internal_err("boundary walk lost alignment"),
            };
            let mut gap = Vec::new();
            let mut nx = ring.next[cur];
            loop {
                match ring.items[nx] {
                    Item::Dart(d) => {
                        gap.push(d);
                        nx = ring.next[nx];
                    }
                    Item::Marker(_) => break,
                }
            }
            groups.push((bud, gap));
            cur = nx;
            if cur == start {
                break;
            }
        }
    }
    if groups.len() != delta.len() {
        return internal_err("hexagon-bound buds disagree with boundary markers");
    }

    // gap arithmetic: consecutive hexagon-bound buds with labels L, L' and k
    // darts between them satisfy L' = L + 2 - k, with one +6 jump at the seam
    let hex_index = |bud: usize| -> Result<u8, CloseError> {
        match attachments.get(bud) {
            Some(Attachment::Hex(j)) => Ok(j),
            _ => internal_err("boundary marker not hexagon-bound"),
        }
    };
    let mut seam_jumps = 0;
    for g in 0..groups.len() {
        let (bud, ref gap) = groups[g];
        let (bud2, _) = groups[(g + 1) % groups.len()];
        let k = gap.len() as i32;
        if k > 2 {
            return internal_err("gap between hexagon attachments exceeds 2");
        }
        let step = labels.labels[bud] + 2 - k;
        if labels.labels[bud2] == step {
            continue;
        }
        if labels.labels[bud2] + 6 == step {
            seam_jumps += 1;
        } else {
            return internal_err("hexagon gap arithmetic broken");
        }
    }
    if seam_jumps != 1 {
        return internal_err("expected exactly one label seam on the boundary");
    }

    // glue: one quadrilateral per consecutive pair of hexagon attachments
    for g in 0..groups.len() {
        let (bud, ref gap) = groups[g];
        let (bud2, _) = groups[(g + 1) % groups.len()];
        let j1 = hex_index(bud)? as usize;
        let j2 = hex_index(bud2)? as usize;
        let arc = (j2 + 6 - j1) % 6;
        if arc + gap.len() != 2 {
            return internal_err("hexagon arc length disagrees with gap");
        }
        let bud_node = td.corner_node[bud] as usize;
        let bud2_node = td.corner_node[bud2] as usize;
        let (t1, h1) = plan.bud_darts(bud_node);
        let (t2, _) = plan.bud_darts(bud2_node);
        bud_closures[bud_node] = Some(BudClosure {
            tail_dart: t1,
            head_dart: h1,
            target: plan.hex_vertex(j1),
        });
        let mut cycle = Vec::with_capacity(4);
        cycle.push(h1);
        cycle.extend_from_slice(gap);
        cycle.push(t2);
        for a in 0..arc {
            // descending arc from h_{j2} down to h_{j1}
            cycle.push(plan.hex_bwd((j2 + 6 - a - 1) % 6));
        }
        if cycle.len() != 4 {
            return internal_err("hexagon-side face is not a quadrilateral");
        }
        faces.push(cycle);
    }
    faces.push((0..6).map(|j| plan.hex_fwd(j)).collect());

    // assemble the rotation system from the face cycles
    let mut next_in_face = vec![usize::MAX; dart_count];
    for f in &faces {
        for i in 0..f.len() {
            if next_in_face[f[i]] != usize::MAX {
                return internal_err("dart appears in two faces");
            }
            next_in_face[f[i]] = f[(i + 1) % f.len()];
        }
    }
    if next_in_face.iter().any(|&x| x == usize::MAX) {
        return internal_err("dart missing from all faces");
    }
    let alpha: Vec<Dart> = (0..dart_count).map(|d| d ^ 1).collect();
    let sigma: Vec<Dart> = (0..dart_count).map(|d| next_in_face[alpha[d]]).collect();

    let mut vertex_of = vec![usize::MAX; dart_count];
    for v in 0..tree.node_count() {
        if v == tree.root() {
            continue;
        }
        let e = plan.edge_of_child[v];
        let p = tree.parent(v).unwrap();
        if !tree.is_bud(p) {
            vertex_of[2 * e] = plan.internal_vertex[p];
        }
        if !tree.is_bud(v) {
            vertex_of[2 * e + 1] = plan.internal_vertex[v];
        }
    }
    for v in 0..tree.node_count() {
        if let Some(bc) = bud_closures[v] {
            vertex_of[bc.head_dart] = bc.target;
        }
    }
    for j in 0..6 {
        vertex_of[plan.hex_fwd(j)] = plan.hex_vertex(j);
        vertex_of[plan.hex_bwd(j)] = plan.hex_vertex((j + 1) % 6);
    }
    if vertex_of.iter().any(|&x| x == usize::MAX) {
        return internal_err("dart with no origin vertex");
    }

    let root_dart = 2 * plan.edge_of_child[tree.children(tree.root())[0]];
    let map = RotationMap::new(sigma, alpha, vertex_of, Some(root_dart))?;

    let mut tri_out = vec![true; dart_count];
    for bc in bud_closures.iter().flatten() {
        tri_out[bc.head_dart] = false;
    }

    let mut node_vertex = vec![usize::MAX; tree.node_count()];
    for v in 0..tree.node_count() {
        node_vertex[v] = if tree.is_bud(v) {
            bud_closures[v]
                .map(|bc| bc.target)
                .ok_or_else(|| CloseError::Internal("bud never closed".into()))?
        } else {
            plan.internal_vertex[v]
        };
    }

    let hex_vertices = [
        plan.hex_vertex(0),
        plan.hex_vertex(1),
        plan.hex_vertex(2),
        plan.hex_vertex(3),
        plan.hex_vertex(4),
        plan.hex_vertex(5),
    ];
    Ok((
        HexQuad {
            map,
            hex_vertices,
            tri_out,
        },
        ClosureRecord {
            tree: tree.clone(),
            labels,
            attachments,
            node_vertex,
            bud_closures,
        },
    ))
}

impl HexQuad {
    /// Tree size of the opening: `|V| - 6`.
    pub fn internal_size(&self) -> usize {
        self.map.vertex_count() - 6
    }

    pub fn is_hex_vertex(&self, v: Vertex) -> bool {
        self.hex_vertices.contains(&v)
    }

    /// Checks the defining invariants: face degrees (one hexagon on the
    /// recorded vertices, all others quadrilaterals), simplicity, and the
    /// tri-orientation out-degrees.
    pub fn validate(&self) -> Result<(), CloseError> {
        self.map.validate()?;
        let faces = self.map.faces();
        let mut hex_faces = 0;
        for f in &faces {
            match f.len() {
                4 => {}
                6 => {
                    hex_faces += 1;
                    let verts: Vec<Vertex> = f.iter().map(|&d| self.map.vertex_of(d)).collect();
                    let ok = (0..6)
                        .any(|r| (0..6).all(|i| verts[(r + i) % 6] == self.hex_vertices[i]));
                    if !ok {
                        return internal_err("hexagonal face is not on the recorded vertices");
                    }
                }
                d => return internal_err(format!("face of degree {d}")),
            }
        }
        if hex_faces != 1 {
            return internal_err(format!("{hex_faces} hexagonal faces"));
        }
        // simplicity
        let adj = self.map.adjacency();
        for (v, ns) in adj.iter().enumerate() {
            let set: BTreeSet<_> = ns.iter().collect();
            if set.len() != ns.len() {
                return internal_err(format!("multi-edge at vertex {v}"));
            }
            if set.contains(&v) {
                return internal_err(format!("loop at vertex {v}"));
            }
        }
        // out-degrees
        let mut out = vec![0usize; self.map.vertex_count()];
        for d in 0..self.map.dart_count() {
            if self.tri_out[d] {
                out[self.map.vertex_of(d)] += 1;
            }
        }
        for (v, &o) in out.iter().enumerate() {
            let want = if self.is_hex_vertex(v) { 2 } else { 3 };
            if o != want {
                return internal_err(format!("vertex {v} has out-degree {o}, wanted {want}"));
            }
        }
        Ok(())
    }

    /// MAPV1 text with the HEX line.
    pub fn to_text(&self) -> String {
        self.map.to_text(Some(&self.hex_vertices), None)
    }
}

// --- opening -----------------------------------------------------------------

const STATE_D: u8 = 1;
/// Singly oriented with the even-side dart as tail (head dart = odd side).
const STATE_SA: u8 = 2;
const STATE_SB: u8 = 4;

struct Opener<'a> {
    map: &'a RotationMap,
    faces: Vec<Vec<Dart>>,
    hex_face: usize,
    edge_of: Vec<usize>,
    edge_darts: Vec<(Dart, Dart)>,
    quota: Vec<usize>,
    budget: usize,
}

impl<'a> Opener<'a> {
    /// The S-state whose head dart is `dart`.
    fn h_state(&self, dart: Dart) -> u8 {
        let (a, _) = self.edge_darts[self.edge_of[dart]];
        if dart == a {
            STATE_SB
        } else {
            STATE_SA
        }
    }

    fn could_be_h(&self, dom: &[u8], dart: Dart) -> bool {
        dom[self.edge_of[dart]] & self.h_state(dart) != 0
    }

    fn must_be_h(&self, dom: &[u8], dart: Dart) -> bool {
        dom[self.edge_of[dart]] == self.h_state(dart)
    }

    /// Constraint propagation to fixpoint. Returns false on contradiction.
    fn propagate(&self, dom: &mut [u8]) -> bool {
        loop {
            let mut changed = false;
            // every non-hexagon face carries exactly one head dart
            for (fi, f) in self.faces.iter().enumerate() {
                if fi == self.hex_face {
                    continue;
                }
                let mut certain = 0;
                let mut possible = 0;
                for &d in f {
                    if self.must_be_h(dom, d) {
                        certain += 1;
                    } else if self.could_be_h(dom, d) {
                        possible += 1;
                    }
                }
                if certain > 1 || certain + possible < 1 {
                    return false;
                }
                if certain == 1 && possible > 0 {
                    for &d in f {
                        if !self.must_be_h(dom, d) && self.could_be_h(dom, d) {
                            dom[self.edge_of[d]] &= !self.h_state(d);
                            if dom[self.edge_of[d]] == 0 {
                                return false;
                            }
                            changed = true;
                        }
                    }
                } else if certain == 0 && possible == 1 {
                    for &d in f {
                        if self.could_be_h(dom, d) {
                            dom[self.edge_of[d]] = self.h_state(d);
                            changed = true;
                        }
                    }
                }
            }
            // vertex quotas: heads at v = degree(v) - out-degree target
            let n = self.map.dart_count();
            let mut certain = vec![0usize; self.quota.len()];
            let mut possible = vec![0usize; self.quota.len()];
            for d in 0..n {
                let v = self.map.vertex_of(d);
                if self.must_be_h(dom, d) {
                    certain[v] += 1;
                } else if self.could_be_h(dom, d) {
                    possible[v] += 1;
                }
            }
            for v in 0..self.quota.len() {
                if certain[v] > self.quota[v] || certain[v] + possible[v] < self.quota[v] {
                    return false;
                }
            }
            for d in 0..n {
                let v = self.map.vertex_of(d);
                if self.must_be_h(dom, d) || !self.could_be_h(dom, d) {
                    continue;
                }
                if certain[v] == self.quota[v] {
                    dom[self.edge_of[d]] &= !self.h_state(d);
                    if dom[self.edge_of[d]] == 0 {
                        return false;
                    }
                    changed = true;
                } else if certain[v] + possible[v] == self.quota[v] {
                    dom[self.edge_of[d]] = self.h_state(d);
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn search(
        &mut self,
        dom: &mut Vec<u8>,
        input_code: &crate::map::CanonicalCode,
    ) -> Result<Option<PlaneTree>, OpenError> {
        if self.budget == 0 {
            return Err(OpenError::BudgetExceeded);
        }
        self.budget -= 1;
        if !self.propagate(dom) {
            return Ok(None);
        }
        match dom.iter().position(|&d| !d.is_power_of_two()) {
            None => {
                let Some(tree) = self.read_tree(dom) else {
                    return Ok(None);
                };
                match close(&tree) {
                    Ok((q, _)) if q.map.canonical_code() == *input_code => Ok(Some(tree)),
                    _ => Ok(None),
                }
            }
            Some(e) => {
                for state in [STATE_D, STATE_SA, STATE_SB] {
                    if dom[e] & state == 0 {
                        continue;
                    }
                    let mut trial = dom.clone();
                    trial[e] = state;
                    if let Some(t) = self.search(&mut trial, input_code)? {
                        return Ok(Some(t));
                    }
                }
                Ok(None)
            }
        }
    }

    /// Reads the tree off a complete assignment: doubly edges are tree edges,
    /// head darts are attachments, tail darts are bud slots.
    fn read_tree(&self, dom: &[u8]) -> Option<PlaneTree> {
        let map = self.map;
        let root = map.root_dart()?;
        let is_h = |d: Dart| dom[self.edge_of[d]] == self.h_state(d);

        #[derive(Clone, Copy)]
        enum Slot {
            Internal(Dart),
            Bud,
        }
        let mut parents: Vec<Option<NodeId>> = Vec::new();
        let mut childrens: Vec<Vec<NodeId>> = Vec::new();
        let mut visited = vec![false; map.vertex_count()];
        fn new_node(
            p: Option<NodeId>,
            parents: &mut Vec<Option<NodeId>>,
            childrens: &mut Vec<Vec<NodeId>>,
        ) -> NodeId {
            parents.push(p);
            childrens.push(Vec::new());
            parents.len() - 1
        }

        // root cases: a doubly dart roots at its origin; a tail dart roots at
        // its origin with a bud first child; a head dart means the tree is
        // rooted at a bud that merged into this vertex
        let root_state = dom[self.edge_of[root]];
        let (tree_root, mut stack): (NodeId, Vec<(Vertex, Dart, NodeId)>) =
            if root_state == self.h_state(root) {
                let a = map.vertex_of(map.alpha(root));
                let bud = new_node(None, &mut parents, &mut childrens);
                let child = new_node(Some(bud), &mut parents, &mut childrens);
                childrens[bud].push(child);
                visited[a] = true;
                (bud, vec![(a, map.alpha(root), child)])
            } else {
                let rv = map.vertex_of(root);
                let node = new_node(None, &mut parents, &mut childrens);
                visited[rv] = true;
                (node, vec![(rv, usize::MAX, node)])
            };

        while let Some((_, entry, node)) = stack.pop() {
            // child slots in rotation order after the entry dart; at the root
            // the scan starts on the root dart itself, which is c1's slot
            let mut slots: Vec<Slot> = Vec::new();
            let at_root = entry == usize::MAX;
            let start = if at_root { root } else { entry };
            let mut d = if at_root { start } else { map.sigma(start) };
            loop {
                if !is_h(d) && (at_root || d != entry) {
                    if dom[self.edge_of[d]] == STATE_D {
                        slots.push(Slot::Internal(d));
                    } else {
                        slots.push(Slot::Bud);
                    }
                }
                d = map.sigma(d);
                if d == start {
                    break;
                }
            }
            if at_root && slots.len() != 3 || !at_root && slots.len() != 2 {
                return None;
            }
            for slot in slots {
                match slot {
                    Slot::Bud => {
                        let b = new_node(Some(node), &mut parents, &mut childrens);
                        childrens[node].push(b);
                    }
                    Slot::Internal(d) => {
                        let w = map.vertex_of(map.alpha(d));
                        if visited[w] {
                            return None;
                        }
                        visited[w] = true;
                        let c = new_node(Some(node), &mut parents, &mut childrens);
                        childrens[node].push(c);
                        stack.push((w, map.alpha(d), c));
                    }
                }
            }
        }
        // every interior vertex must have been reached by the tree walk
        let hex: BTreeSet<Vertex> = self.faces[self.hex_face]
            .iter()
            .map(|&d| map.vertex_of(d))
            .collect();
        for v in 0..map.vertex_count() {
            if !hex.contains(&v) && !visited[v] {
                return None;
            }
        }
        let mut parens = String::new();
        let mut walk = vec![(tree_root, false)];
        while let Some((x, done)) = walk.pop() {
            if done {
                parens.push(')');
            } else {
                parens.push('(');
                walk.push((x, true));
                for &c in childrens[x].iter().rev() {
                    walk.push((c, false));
                }
            }
        }
        PlaneTree::from_parens(&parens).ok()
    }
}

/// Recovers the unique tree whose closure is rooted-isomorphic to `map`.
pub fn open_map(map: &RotationMap) -> Result<PlaneTree, OpenError> {
    map.validate()?;
    if map.root_dart().is_none() {
        return Err(OpenError::Map(MapError::RootMissing));
    }
    let (faces, _) = map.face_of_darts();
    let mut hex_face = None;
    for (i, f) in faces.iter().enumerate() {
        match f.len() {
            4 => {}
            6 => {
                if hex_face.replace(i).is_some() {
                    return Err(OpenError::NotHexQuadrangulation(
                        "two hexagonal faces".into(),
                    ));
                }
            }
            d => {
                return Err(OpenError::NotHexQuadrangulation(format!(
                    "face of degree {d}"
                )))
            }
        }
    }
    let hex_face =
        hex_face.ok_or_else(|| OpenError::NotHexQuadrangulation("no hexagonal face".into()))?;
    let hex_vertices: Vec<Vertex> = faces[hex_face].iter().map(|&d| map.vertex_of(d)).collect();
    if hex_vertices.iter().collect::<BTreeSet<_>>().len() != 6 {
        return Err(OpenError::NotHexQuadrangulation(
            "hexagonal face revisits a vertex".into(),
        ));
    }

    let dart_count = map.dart_count();
    let mut edge_of = vec![usize::MAX; dart_count];
    let mut edge_darts = Vec::new();
    for d in 0..dart_count {
        if edge_of[d] == usize::MAX {
            let a = map.alpha(d);
            edge_of[d] = edge_darts.len();
            edge_of[a] = edge_darts.len();
            edge_darts.push((d.min(a), d.max(a)));
        }
    }

    let hex_set: BTreeSet<Vertex> = hex_vertices.iter().copied().collect();
    let mut degree = vec![0usize; map.vertex_count()];
    for d in 0..dart_count {
        degree[map.vertex_of(d)] += 1;
    }
    let mut quota = vec![0usize; map.vertex_count()];
    for v in 0..map.vertex_count() {
        let target = if hex_set.contains(&v) { 2 } else { 3 };
        if degree[v] < target {
            return Err(OpenError::NotHexQuadrangulation(format!(
                "vertex {v} has degree {}",
                degree[v]
            )));
        }
        quota[v] = degree[v] - target;
    }

    let mut dom = vec![STATE_D | STATE_SA | STATE_SB; edge_darts.len()];
    // hexagon boundary edges are doubly oriented
    for &d in &faces[hex_face] {
        dom[edge_of[d]] = STATE_D;
    }

    let input_code = map.canonical_code();
    let mut opener = Opener {
        map,
        faces,
        hex_face,
        edge_of,
        edge_darts,
        quota,
        budget: 1_000_000,
    };
    match opener.search(&mut dom, &input_code)? {
        Some(t) => Ok(t),
        None => Err(OpenError::NoOpening),
    }
}

/// Opens a [`HexQuad`]; see [`open_map`].
pub fn open(q: &HexQuad) -> Result<PlaneTree, OpenError> {
    open_map(&q.map)
}

// --- incremental growth --------------------------------------------------------

/// Applies the local map rewrite corresponding to growing the underlying tree
/// at `bud_corner`: deletes the closure edges of all buds sharing its
/// attachment, inserts the new vertex, and re-quadrangulates. Falls back to a
/// full re-closure when the rewrite would touch the hexagon; the patch says
/// which path ran.
pub fn incremental_grow(
    q: &HexQuad,
    rec: &ClosureRecord,
    bud_corner: usize,
) -> Result<(HexQuad, ClosureRecord, GrowthPatch), CloseError> {
    let tree = &rec.tree;
    let td = tree.tour();
    let attachment = rec
        .attachments
        .get(bud_corner)
        .ok_or_else(|| CloseError::Internal("not a bud corner of the recorded tree".into()))?;
    let grown_tree = tree.grow(bud_corner)?;

    let fallback =
        |group: Vec<usize>| -> Result<(HexQuad, ClosureRecord, GrowthPatch), CloseError> {
            let (q2, rec2) = close(&grown_tree)?;
            Ok((
                q2,
                rec2,
                GrowthPatch {
                    grown_corner: bud_corner,
                    group,
                    new_vertex: None,
                    intermediate_face_degree: None,
                    fallback: true,
                },
            ))
        };

    let target_corner = match attachment {
        Attachment::Hex(_) => return fallback(vec![bud_corner]),
        Attachment::Interior { corner, .. } => corner,
    };
    let group: Vec<usize> = rec
        .attachments
        .iter()
        .filter(
            |&(_, a)| matches!(a, Attachment::Interior { corner, .. } if corner == target_corner),
        )
        .map(|(b, _)| b)
        .collect();
    let k = group.len();
    let group_nodes: Vec<NodeId> = group.iter().map(|&b| td.corner_node[b] as usize).collect();
    let grown_node = td.corner_node[bud_corner] as usize;

    let map = &q.map;
    let closure_of = |node: NodeId| rec.bud_closures[node].unwrap();

    // recompute the grown tree's attachments up front: the two fresh buds'
    // targets decide whether the rewrite stays away from the hexagon, and
    // later pin their spoke corners on the merged face
    let labels2 = grown_tree.label_corners()?;
    let att2 = grown_tree.attachments(&labels2);
    let td2 = grown_tree.tour();
    let new_buds = [grown_tree.node_count() - 2, grown_tree.node_count() - 1];
    let mut new_bud_vertex = [usize::MAX; 2];
    {
        let mut att_of_node: Vec<Option<Attachment>> = vec![None; grown_tree.node_count()];
        for (c, a) in att2.iter() {
            att_of_node[td2.corner_node[c] as usize] = Some(a);
        }
        for (i, &b) in new_buds.iter().enumerate() {
            match att_of_node[b] {
                Some(Attachment::Interior { corner, .. }) => {
                    let node = td2.corner_node[corner] as usize;
                    if node == grown_node {
                        return internal_err("fresh bud attaching at the grown vertex");
                    }
                    new_bud_vertex[i] = rec.node_vertex[node];
                }
                Some(Attachment::Hex(_)) | None => return fallback(group),
            }
        }
    }

    // walk the face created by deleting the group's closure edges
    let mut removed = vec![false; map.dart_count()];
    for &b in &group_nodes {
        removed[closure_of(b).tail_dart] = true;
        removed[closure_of(b).head_dart] = true;
    }
    let sigma_skip = |mut d: Dart| loop {
        d = map.sigma(d);
        if !removed[d] {
            return d;
        }
    };
    let start = sigma_skip(closure_of(grown_node).tail_dart);
    let mut big_cycle = Vec::new();
    let mut d = start;
    loop {
        big_cycle.push(d);
        d = sigma_skip(map.alpha(d));
        if d == start {
            break;
        }
    }
    if big_cycle.len() != 2 * k + 4 {
        return internal_err(format!(
            "intermediate face degree {} != {}",
            big_cycle.len(),
            2 * k + 4
        ));
    }

    // spoke corners alternate around the merged face; corner p sits between
    // alpha(big_cycle[p-1]) and big_cycle[p]. The re-pointed tails claim k of
    // them, and the two fresh buds take the remaining two slots of the same
    // parity, matched to their recomputed attachment vertices.
    let cycle_pos: std::collections::BTreeMap<Dart, usize> = big_cycle
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i))
        .collect();
    let mut spoke_at = vec![usize::MAX; big_cycle.len()]; // position -> spoke dart
    for &b in &group_nodes {
        let bc = closure_of(b);
        let pos = *cycle_pos
            .get(&sigma_skip(bc.tail_dart))
            .ok_or_else(|| CloseError::Internal("tail slot not on the merged face".into()))?;
        spoke_at[pos] = bc.head_dart;
    }
    let parity = group_nodes
        .first()
        .map(|&b| cycle_pos[&sigma_skip(closure_of(b).tail_dart)] % 2)
        .unwrap();
    let mut free_slots = Vec::new();
    for p in 0..big_cycle.len() {
        if p % 2 == parity && spoke_at[p] == usize::MAX {
            free_slots.push(p);
        } else if p % 2 == parity {
            // occupied, fine
        } else if spoke_at[p] != usize::MAX {
            return internal_err("spoke slots do not alternate");
        }
    }
    if free_slots.len() != 2 {
        return internal_err("expected exactly two fresh spoke slots");
    }
    let slot_vertex = |p: usize| map.vertex_of(big_cycle[p]);
    let (v_l, v_r) = (new_bud_vertex[0], new_bud_vertex[1]);
    if q.is_hex_vertex(v_l) || q.is_hex_vertex(v_r) {
        return fallback(group);
    }
    if v_l == v_r {
        return internal_err("fresh buds attach at one vertex (would double an edge)");
    }
    let (slot_l, slot_r) = if slot_vertex(free_slots[0]) == v_l
        && slot_vertex(free_slots[1]) == v_r
    {
        (free_slots[0], free_slots[1])
    } else if slot_vertex(free_slots[0]) == v_r && slot_vertex(free_slots[1]) == v_l {
        (free_slots[1], free_slots[0])
    } else {
        return internal_err("fresh spoke slots disagree with recomputed attachments");
    };

    let old_darts = map.dart_count();
    let new_vertex = map.vertex_count();
    let mut sigma: Vec<Dart> = (0..old_darts).map(|d| map.sigma(d)).collect();
    let mut vertex_of: Vec<Vertex> = (0..old_darts).map(|d| map.vertex_of(d)).collect();
    // 4 fresh darts: edges {v, v_l} and {v, v_r}
    let t_l = old_darts;
    let h_l = old_darts + 1;
    let t_r = old_darts + 2;
    let h_r = old_darts + 3;
    sigma.extend_from_slice(&[0, 0, 0, 0]);
    vertex_of.extend_from_slice(&[new_vertex, v_l, new_vertex, v_r]);
    let alpha: Vec<Dart> = (0..old_darts + 4).map(|d| d ^ 1).collect();
    spoke_at[slot_l] = h_l;
    spoke_at[slot_r] = h_r;

    // detach the group's head darts from the old attachment vertex
    {
        let heads: BTreeSet<Dart> = group_nodes
            .iter()
            .map(|&b| closure_of(b).head_dart)
            .collect();
        let x = rec.node_vertex[td.corner_node[target_corner] as usize];
        let ring = map.darts_at(x);
        let survivors: Vec<Dart> = ring.iter().copied().filter(|d| !heads.contains(d)).collect();
        if survivors.is_empty() {
            return internal_err("attachment vertex lost all darts");
        }
        for i in 0..survivors.len() {
            sigma[survivors[i]] = survivors[(i + 1) % survivors.len()];
        }
    }

    // insert the fresh head darts into their corners
    for (slot, head) in [(slot_l, h_l), (slot_r, h_r)] {
        let prev = map.alpha(big_cycle[(slot + big_cycle.len() - 1) % big_cycle.len()]);
        if sigma[prev] != big_cycle[slot] {
            return internal_err("fresh spoke corner darts not adjacent");
        }
        sigma[prev] = head;
        sigma[head] = big_cycle[slot];
    }

    // rotation at the new vertex: the spokes in reverse cycle order
    {
        let spokes: Vec<Dart> = (0..big_cycle.len())
            .filter(|&p| p % 2 == parity)
            .map(|p| spoke_at[p])
            .collect();
        debug_assert_eq!(spokes.len(), k + 2);
        for i in 0..spokes.len() {
            let a = spokes[i];
            let b = spokes[(i + spokes.len() - 1) % spokes.len()];
            sigma[a] = b;
            vertex_of[a] = new_vertex;
        }
    }

    let map2 = RotationMap::new(sigma, alpha, vertex_of, map.root_dart())?;

    let mut tri_out = q.tri_out.clone();
    tri_out.extend_from_slice(&[true, false, true, false]);
    // the grown bud's edge becomes a doubly-oriented tree edge
    tri_out[closure_of(grown_node).head_dart] = true;

    let q2 = HexQuad {
        map: map2,
        hex_vertices: q.hex_vertices,
        tri_out,
    };

    // rebuild the record against the grown tree
    let mut internal_vertex = vec![usize::MAX; grown_tree.node_count()];
    for v in 0..tree.node_count() {
        if !tree.is_bud(v) {
            internal_vertex[v] = rec.node_vertex[v];
        }
    }
    internal_vertex[grown_node] = new_vertex;
    let mut node_vertex = vec![usize::MAX; grown_tree.node_count()];
    let mut bud_closures: Vec<Option<BudClosure>> = vec![None; grown_tree.node_count()];
    for v in 0..grown_tree.node_count() {
        if !grown_tree.is_bud(v) {
            node_vertex[v] = internal_vertex[v];
        }
    }
    for (bud_c, a) in att2.iter() {
        let b = td2.corner_node[bud_c] as usize;
        let target = match a {
            Attachment::Interior { corner, .. } => internal_vertex[td2.corner_node[corner] as usize],
            Attachment::Hex(j) => q.hex_vertices[j as usize],
        };
        node_vertex[b] = target;
        let (tail, head) = if b == new_buds[0] {
            (t_l, h_l)
        } else if b == new_buds[1] {
            (t_r, h_r)
        } else {
            let bc = closure_of(b);
            (bc.tail_dart, bc.head_dart)
        };
        bud_closures[b] = Some(BudClosure {
            tail_dart: tail,
            head_dart: head,
            target,
        });
    }
    if node_vertex[new_buds[0]] != v_l || node_vertex[new_buds[1]] != v_r {
        return internal_err("recomputed attachments disagree with the local rewrite");
    }
    let rec2 = ClosureRecord {
        tree: grown_tree,
        labels: labels2,
        attachments: att2,
        node_vertex,
        bud_closures,
    };
    Ok((
        q2,
        rec2,
        GrowthPatch {
            grown_corner: bud_corner,
            group,
            new_vertex: Some(new_vertex),
            intermediate_face_degree: Some(big_cycle.len()),
            fallback: false,
        },
    ))
}

// --- sigma stability ------------------------------------------------------------

/// Stable identity of an attachment across growth: the corner's node and
/// rank, or the hexagon (indices may shift as the minimum label drops).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StableAttachment {
    Corner(NodeId, u8),
    Hex,
}

fn stable_attachment(t: &PlaneTree, a: Attachment) -> StableAttachment {
    match a {
        Attachment::Interior { corner, .. } => {
            let td = t.tour();
            StableAttachment::Corner(td.corner_node[corner] as usize, td.corner_rank[corner])
        }
        Attachment::Hex(_) => StableAttachment::Hex,
    }
}

#[derive(Debug, Clone)]
pub struct StabilityViolation {
    pub step: usize,
    pub bud_node: NodeId,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct StabilityReport {
    pub steps: usize,
    pub changed: usize,
    pub violations: Vec<StabilityViolation>,
}

/// Verifies along a grow-move chain that whenever a surviving bud's
/// attachment changes, the new attachment is the first corner at the newly
/// grown vertex.
pub fn attachment_stability_check(trees: &[PlaneTree]) -> Result<StabilityReport, TreeError> {
    let mut report = StabilityReport::default();
    for w in trees.windows(2) {
        let (t, t2) = (&w[0], &w[1]);
        assert_eq!(
            t2.node_count(),
            t.node_count() + 2,
            "consecutive trees must differ by one grow move"
        );
        let grown = t2
            .parent(t.node_count())
            .expect("new nodes hang off the grown bud");
        let lab1 = t.label_corners()?;
        let a1 = t.attachments(&lab1);
        let lab2 = t2.label_corners()?;
        let a2 = t2.attachments(&lab2);
        let td1 = t.tour();
        let td2 = t2.tour();
        let mut att2_of_node: Vec<Option<Attachment>> = vec![None; t2.node_count()];
        for (c, a) in a2.iter() {
            att2_of_node[td2.corner_node[c] as usize] = Some(a);
        }
        report.steps += 1;
        for (c, a) in a1.iter() {
            let bud = td1.corner_node[c] as usize;
            if bud == grown {
                continue;
            }
            let old = stable_attachment(t, a);
            let new = stable_attachment(t2, att2_of_node[bud].expect("bud survives"));
            if old == new {
                continue;
            }
            report.changed += 1;
            if new != StableAttachment::Corner(grown, 1) {
                report.violations.push(StabilityViolation {
                    step: report.steps - 1,
                    bud_node: bud,
                    detail: format!("{old:?} -> {new:?}, grown node {grown}"),
                });
            }
        }
    }
    Ok(report)
}

/// `V^{<R}`: tree nodes that are vertices of the ball of radius `R` around
/// the root, or buds attaching into it.
pub fn visible_tree_nodes(q: &HexQuad, rec: &ClosureRecord, radius: usize) -> BTreeSet<NodeId> {
    let root = q.map.root_vertex();
    let dist = q.map.bfs_from(root);
    (0..rec.tree.node_count())
        .filter(|&v| dist[rec.node_vertex[v]] < radius)
        .collect()
}

// --- CLOSV1 ----------------------------------------------------------------------

impl ClosureRecord {
    /// CLOSV1: one line per bud corner, mapping it to its attachment corner
    /// or hexagon corner.
    pub fn to_text(&self) -> String {
        let mut s = String::from("CLOSV1\n");
        for (bud, a) in self.attachments.iter() {
            match a {
                Attachment::Interior { corner, .. } => {
                    s.push_str(&format!("{bud} : {corner}\n"));
                }
                Attachment::Hex(j) => s.push_str(&format!("{bud} : HEX{j}\n")),
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::is_irreducible;
    use crate::tree::{enumerate_trees, random_grown_tree};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn star_closure_is_the_hexagon_wheel() {
        let t = PlaneTree::star();
        let (q, rec) = close(&t).unwrap();
        q.validate().unwrap();
        let rep = q.map.validate().unwrap();
        assert_eq!(rep.vertices, 7);
        assert_eq!(rep.edges, 9);
        assert_eq!(rep.face_degrees, vec![4, 4, 4, 6]);
        // the three buds land on alternating hexagon corners 0, 2, 4
        let targets: Vec<Vertex> = (1..4).map(|v| rec.node_vertex[v]).collect();
        assert_eq!(
            targets,
            vec![q.hex_vertices[0], q.hex_vertices[2], q.hex_vertices[4]]
        );
        // root dart leaves the center toward hexagon corner 0
        let r = q.map.root_dart().unwrap();
        assert_eq!(q.map.vertex_of(r), rec.node_vertex[0]);
        assert_eq!(q.map.head_of(r), q.hex_vertices[0]);
    }

    #[test]
    fn both_size_one_trees_close_to_the_same_unrooted_map() {
        let t1 = PlaneTree::star();
        let t2 = PlaneTree::from_parens("((()()))").unwrap();
        let (q1, _) = close(&t1).unwrap();
        let (q2, _) = close(&t2).unwrap();
        assert_eq!(q1.map.face_degrees(), q2.map.face_degrees());
        // distinct as rooted maps
        assert!(!q1.map.rooted_isomorphic(&q2.map));
        // the root-bud tree's root dart starts on the hexagon
        let r = q2.map.root_dart().unwrap();
        assert!(q2.is_hex_vertex(q2.map.vertex_of(r)));
    }

    #[test]
    fn closure_invariants_exhaustive() {
        for n in 1..=5 {
            for t in enumerate_trees(n, 10).unwrap() {
                let (q, _) = close(&t).unwrap();
                q.validate().unwrap();
                assert_eq!(q.map.vertex_count(), n + 6, "tree {t}");
                let mut degs = q.map.face_degrees();
                assert_eq!(degs.pop(), Some(6));
                assert!(degs.iter().all(|&d| d == 4));
                assert!(is_irreducible(&q.map), "tree {t}");
            }
        }
    }

    #[test]
    fn closure_injective_small() {
        for n in 1..=5 {
            let trees = enumerate_trees(n, 10).unwrap();
            let codes: BTreeSet<_> = trees
                .iter()
                .map(|t| close(t).unwrap().0.map.canonical_code())
                .collect();
            assert_eq!(codes.len(), trees.len());
        }
    }

    #[test]
    fn closure_validates_on_random_large_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let t = random_grown_tree(300, &mut rng);
            let (q, _) = close(&t).unwrap();
            q.validate().unwrap();
            assert_eq!(q.map.vertex_count(), 306);
        }
    }

    #[test]
    fn open_inverts_close_exhaustive() {
        for n in 1..=5 {
            for t in enumerate_trees(n, 10).unwrap() {
                let (q, _) = close(&t).unwrap();
                let t2 = open(&q).unwrap();
                assert_eq!(t2.parens(), t.parens(), "n={n}");
            }
        }
    }

    #[test]
    fn open_inverts_close_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for case in 0..20 {
            let t = random_grown_tree(120, &mut rng);
            let (q, _) = close(&t).unwrap();
            let t2 = open(&q).unwrap();
            assert_eq!(t2.parens(), t.parens(), "case {case}");
        }
    }

    #[test]
    fn open_rejects_non_quadrangulations() {
        let m = crate::map::cycle_map(6);
        assert!(matches!(
            open_map(&m),
            Err(OpenError::NotHexQuadrangulation(_))
        ));
    }

    #[test]
    fn incremental_grow_matches_full_reclosure_exhaustive() {
        for n in 1..=4 {
            for t in enumerate_trees(n, 10).unwrap() {
                let (q, rec) = close(&t).unwrap();
                let td = t.tour().clone();
                for &bud in &td.bud_corners {
                    let bud = bud as usize;
                    let (q2, rec2, patch) = incremental_grow(&q, &rec, bud).unwrap();
                    let grown = t.grow(bud).unwrap();
                    let (qf, _) = close(&grown).unwrap();
                    assert!(
                        q2.map.rooted_isomorphic(&qf.map),
                        "tree {t} bud {bud} fallback={}",
                        patch.fallback
                    );
                    q2.validate().unwrap();
                    assert_eq!(q2.map.vertex_count(), q.map.vertex_count() + 1);
                    assert_eq!(rec2.tree.parens(), grown.parens());
                    if !patch.fallback {
                        assert_eq!(
                            patch.intermediate_face_degree,
                            Some(2 * patch.group.len() + 4)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn incremental_grow_random_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t0 = PlaneTree::star();
        let (mut q, mut rec) = close(&t0).unwrap();
        let mut interior_steps = 0;
        for _ in 0..60 {
            let buds: Vec<usize> = rec
                .tree
                .tour()
                .bud_corners
                .iter()
                .map(|&b| b as usize)
                .collect();
            let bud = buds[rng.gen_range(0..buds.len())];
            let grown = rec.tree.grow(bud).unwrap();
            let (qf, _) = close(&grown).unwrap();
            let (q2, rec2, patch) = incremental_grow(&q, &rec, bud).unwrap();
            assert!(q2.map.rooted_isomorphic(&qf.map));
            if !patch.fallback {
                interior_steps += 1;
            }
            q = q2;
            rec = rec2;
        }
        assert!(interior_steps > 0, "no interior rewrites exercised");
    }

    #[test]
    fn stability_zero_violations_on_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut trees = vec![PlaneTree::star()];
        for _ in 0..80 {
            let t = trees.last().unwrap();
            let buds: Vec<usize> = t.tour().bud_corners.iter().map(|&b| b as usize).collect();
            let bud = buds[rng.gen_range(0..buds.len())];
            trees.push(t.grow(bud).unwrap());
        }
        let rep = attachment_stability_check(&trees).unwrap();
        assert_eq!(rep.steps, 80);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    }

    #[test]
    fn stability_exhaustive_single_steps() {
        for t in enumerate_trees(4, 10).unwrap() {
            let td = t.tour().clone();
            for &bud in &td.bud_corners {
                let trees = vec![t.clone(), t.grow(bud as usize).unwrap()];
                let rep = attachment_stability_check(&trees).unwrap();
                assert!(rep.violations.is_empty(), "tree {t} bud {bud}");
            }
        }
    }

    #[test]
    fn visible_nodes_monotone_and_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let t = random_grown_tree(40, &mut rng);
        let (q, rec) = close(&t).unwrap();
        let mut prev = BTreeSet::new();
        for radius in 1..30 {
            let cur = visible_tree_nodes(&q, &rec, radius);
            assert!(prev.is_subset(&cur));
            prev = cur;
        }
        assert_eq!(prev.len(), t.node_count());
    }

    #[test]
    fn closure_record_text() {
        let t = PlaneTree::star();
        let (_, rec) = close(&t).unwrap();
        let s = rec.to_text();
        assert!(s.starts_with("CLOSV1\n"));
        assert_eq!(s.lines().count(), 1 + 3);
        assert!(s.contains("HEX0"));
    }
}
