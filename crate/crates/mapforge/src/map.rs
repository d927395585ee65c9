//! Rooted embedded maps as rotation systems.
//!
//! A map is stored as a pair of permutations on darts (oriented half-edges):
//! `sigma` is the rotation around each dart's origin vertex and `alpha` is
//! the fixed-point-free involution pairing the two darts of an edge. Faces
//! are the orbits of `sigma ∘ alpha`; when `sigma` winds counterclockwise
//! each orbit traverses its face with the face on the right of every dart,
//! and the corner of a dart (the sector it opens at its origin) belongs to
//! the orbit containing that dart. Maps live on the sphere: no face is
//! distinguished as unbounded, and a map and its mirror are distinct values
//! that the rest of the crate never mixes.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

/// Dart identifier, dense in `0..2E`.
pub type Dart = usize;
/// Vertex identifier, dense in `0..V`.
pub type Vertex = usize;

/// Sentinel used in the text format for a missing root dart.
const NO_ROOT: &str = "-1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("sigma not bijective: dart {0} has two preimages")]
    SigmaNotBijective(Dart),
    #[error("sigma image {0} out of range")]
    SigmaOutOfRange(Dart),
    #[error("alpha not an involution at dart {0}")]
    AlphaNotInvolution(Dart),
    #[error("alpha has fixed point at dart {0}")]
    AlphaFixedPoint(Dart),
    #[error("vertex_of not constant on the sigma-orbit of dart {0}")]
    VertexOrbitMismatch(Dart),
    #[error("vertex {0} is split across several sigma-orbits")]
    VertexSplit(Vertex),
    #[error("vertex id {0} out of range")]
    VertexOutOfRange(Vertex),
    #[error("map is not connected: dart {0} unreachable from dart 0")]
    NotConnected(Dart),
    #[error("Euler relation violated: V={v} E={e} F={f}")]
    EulerViolated { v: usize, e: usize, f: usize },
    #[error("root dart {0} out of range")]
    RootOutOfRange(Dart),
    #[error("root dart missing")]
    RootMissing,
    #[error("vertex {0} not in map")]
    VertexNotInMap(Vertex),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A rooted map on the sphere, encoded by its rotation system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationMap {
    sigma: Vec<Dart>,
    alpha: Vec<Dart>,
    vertex_of: Vec<Vertex>,
    vertex_count: usize,
    root_dart: Option<Dart>,
}

/// Outcome of [`RotationMap::validate`]: vertex/edge/face counts and the face
/// degree multiset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub face_degrees: Vec<usize>,
}

/// Canonical code of a rooted map; equal codes iff rooted-isomorphic.
///
/// Built by a breadth-first traversal of darts from the root dart, emitting
/// first-visit vertex numbers, so it is invariant under any renaming of dart
/// and vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(pub Vec<u32>);

impl RotationMap {
    /// Builds a map from raw permutation data. Invariants are checked by
    /// [`validate`](Self::validate); construction itself only checks bounds.
    pub fn new(
        sigma: Vec<Dart>,
        alpha: Vec<Dart>,
        vertex_of: Vec<Vertex>,
        root_dart: Option<Dart>,
    ) -> Result<Self, MapError> {
        let n = sigma.len();
        if alpha.len() != n || vertex_of.len() != n {
            return Err(MapError::Parse {
                line: 0,
                msg: "permutation arrays disagree in length".into(),
            });
        }
        let vertex_count = if n == 0 {
            1
        } else {
            vertex_of.iter().copied().max().unwrap() + 1
        };
        if let Some(r) = root_dart {
            if r >= n {
                return Err(MapError::RootOutOfRange(r));
            }
        }
        Ok(RotationMap {
            sigma,
            alpha,
            vertex_of,
            vertex_count,
            root_dart,
        })
    }

    /// The single-vertex map with no edges (the radius-1 ball of anything).
    pub fn single_vertex() -> Self {
        RotationMap {
            sigma: Vec::new(),
            alpha: Vec::new(),
            vertex_of: Vec::new(),
            vertex_count: 1,
            root_dart: None,
        }
    }

    pub fn dart_count(&self) -> usize {
        self.sigma.len()
    }

    pub fn edge_count(&self) -> usize {
        self.sigma.len() / 2
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn sigma(&self, d: Dart) -> Dart {
        self.sigma[d]
    }

    pub fn alpha(&self, d: Dart) -> Dart {
        self.alpha[d]
    }

    pub fn vertex_of(&self, d: Dart) -> Vertex {
        self.vertex_of[d]
    }

    /// Head vertex of a dart (origin of its opposite).
    pub fn head_of(&self, d: Dart) -> Vertex {
        self.vertex_of[self.alpha[d]]
    }

    pub fn root_dart(&self) -> Option<Dart> {
        self.root_dart
    }

    /// Root node: tail of the root edge.
    pub fn root_vertex(&self) -> Vertex {
        match self.root_dart {
            Some(d) => self.vertex_of[d],
            None => 0,
        }
    }

    pub fn set_root(&mut self, d: Option<Dart>) {
        self.root_dart = d;
    }

    /// Face permutation `phi = sigma ∘ alpha`; orbits are faces.
    pub fn phi(&self, d: Dart) -> Dart {
        self.sigma[self.alpha[d]]
    }

    /// Darts grouped per vertex, each in sigma order.
    pub fn darts_at(&self, v: Vertex) -> Vec<Dart> {
        // Linear scan; fine for the desk-scale callers that need it.
        let mut first = None;
        for d in 0..self.dart_count() {
            if self.vertex_of[d] == v {
                first = Some(d);
                break;
            }
        }
        let mut out = Vec::new();
        if let Some(f) = first {
            let mut d = f;
            loop {
                out.push(d);
                d = self.sigma[d];
                if d == f {
                    break;
                }
            }
        }
        out
    }

    /// Adjacency lists (neighbor vertices, with multiplicity, in sigma order).
    pub fn adjacency(&self) -> Vec<Vec<Vertex>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        let mut seen = vec![false; self.dart_count()];
        for d0 in 0..self.dart_count() {
            if seen[d0] {
                continue;
            }
            let v = self.vertex_of[d0];
            let mut d = d0;
            loop {
                seen[d] = true;
                adj[v].push(self.head_of(d));
                d = self.sigma[d];
                if d == d0 {
                    break;
                }
            }
        }
        adj
    }

    /// Checks every structural invariant and reports counts and face degrees.
    pub fn validate(&self) -> Result<ValidationReport, MapError> {
        let n = self.dart_count();
        if n == 0 {
            return Ok(ValidationReport {
                vertices: 1,
                edges: 0,
                faces: 1,
                face_degrees: vec![],
            });
        }
        // sigma bijective on 0..n
        let mut hit = vec![false; n];
        for d in 0..n {
            let s = self.sigma[d];
            if s >= n {
                return Err(MapError::SigmaOutOfRange(d));
            }
            if hit[s] {
                return Err(MapError::SigmaNotBijective(s));
            }
            hit[s] = true;
        }
        // alpha fixed-point-free involution
        for d in 0..n {
            let a = self.alpha[d];
            if a >= n {
                return Err(MapError::SigmaOutOfRange(d));
            }
            if a == d {
                return Err(MapError::AlphaFixedPoint(d));
            }
            if self.alpha[a] != d {
                return Err(MapError::AlphaNotInvolution(d));
            }
        }
        // vertex_of constant on sigma-orbits, one orbit per vertex
        for d in 0..n {
            let v = self.vertex_of[d];
            if v >= self.vertex_count {
                return Err(MapError::VertexOutOfRange(v));
            }
            if self.vertex_of[self.sigma[d]] != v {
                return Err(MapError::VertexOrbitMismatch(d));
            }
        }
        let mut orbit_of = vec![usize::MAX; n];
        let mut orbit_vertex = Vec::new();
        for d0 in 0..n {
            if orbit_of[d0] != usize::MAX {
                continue;
            }
            let id = orbit_vertex.len();
            orbit_vertex.push(self.vertex_of[d0]);
            let mut d = d0;
            loop {
                orbit_of[d] = id;
                d = self.sigma[d];
                if d == d0 {
                    break;
                }
            }
        }
        {
            let mut seen_vertex = vec![false; self.vertex_count];
            for &v in &orbit_vertex {
                if seen_vertex[v] {
                    return Err(MapError::VertexSplit(v));
                }
                seen_vertex[v] = true;
            }
            if orbit_vertex.len() != self.vertex_count {
                // some vertex id has no darts at all
                let v = seen_vertex.iter().position(|s| !s).unwrap();
                return Err(MapError::VertexSplit(v));
            }
        }
        // connectivity under <sigma, alpha>
        let mut reach = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        reach[0] = true;
        while let Some(d) = queue.pop_front() {
            for nd in [self.sigma[d], self.alpha[d]] {
                if !reach[nd] {
                    reach[nd] = true;
                    queue.push_back(nd);
                }
            }
        }
        if let Some(d) = reach.iter().position(|r| !r) {
            return Err(MapError::NotConnected(d));
        }
        // Euler relation on the sphere
        let face_degrees = self.face_degrees();
        let v = self.vertex_count;
        let e = self.edge_count();
        let f = face_degrees.len();
        if v + f != e + 2 {
            return Err(MapError::EulerViolated { v, e, f });
        }
        Ok(ValidationReport {
            vertices: v,
            edges: e,
            faces: f,
            face_degrees,
        })
    }

    /// Faces as corner cycles: orbits of `phi`, one cycle per face.
    pub fn faces(&self) -> Vec<Vec<Dart>> {
        let n = self.dart_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for d0 in 0..n {
            if seen[d0] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut d = d0;
            loop {
                seen[d] = true;
                cycle.push(d);
                d = self.phi(d);
                if d == d0 {
                    break;
                }
            }
            out.push(cycle);
        }
        out
    }

    pub fn face_degrees(&self) -> Vec<usize> {
        let mut degs: Vec<usize> = self.faces().iter().map(|c| c.len()).collect();
        degs.sort_unstable();
        degs
    }

    /// Index of the face (in `faces()` order) containing each dart.
    pub fn face_of_darts(&self) -> (Vec<Vec<Dart>>, Vec<usize>) {
        let faces = self.faces();
        let mut face_of = vec![usize::MAX; self.dart_count()];
        for (i, f) in faces.iter().enumerate() {
            for &d in f {
                face_of[d] = i;
            }
        }
        (faces, face_of)
    }

    /// BFS distances from `v`; `usize::MAX` marks unreachable (never happens
    /// on validated maps).
    pub fn bfs_from(&self, v: Vertex) -> Vec<usize> {
        let adj = self.adjacency();
        let mut dist = vec![usize::MAX; self.vertex_count];
        let mut queue = VecDeque::from([v]);
        dist[v] = 0;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Graph distance between two vertices.
    pub fn graph_distance(&self, u: Vertex, v: Vertex) -> Result<usize, MapError> {
        if u >= self.vertex_count {
            return Err(MapError::VertexNotInMap(u));
        }
        if v >= self.vertex_count {
            return Err(MapError::VertexNotInMap(v));
        }
        let d = self.bfs_from(u)[v];
        debug_assert_ne!(d, usize::MAX);
        Ok(d)
    }

    /// The ball `M^{<R}`: submap induced by vertices at graph distance `< R`
    /// from the root node, rooted at the same dart when it survives.
    pub fn ball(&self, radius: usize) -> Result<RotationMap, MapError> {
        if self.dart_count() == 0 {
            return Ok(self.clone());
        }
        let root = self.root_dart.ok_or(MapError::RootMissing)?;
        let dist = self.bfs_from(self.vertex_of[root]);
        let keep_vertex: Vec<bool> = dist.iter().map(|&d| d < radius).collect();
        let keep_dart: Vec<bool> = (0..self.dart_count())
            .map(|d| keep_vertex[self.vertex_of[d]] && keep_vertex[self.head_of(d)])
            .collect();
        let mut dart_id = vec![usize::MAX; self.dart_count()];
        let mut kept = 0;
        for d in 0..self.dart_count() {
            if keep_dart[d] {
                dart_id[d] = kept;
                kept += 1;
            }
        }
        let mut vertex_id = vec![usize::MAX; self.vertex_count];
        let mut nv = 0;
        for v in 0..self.vertex_count {
            if keep_vertex[v] {
                vertex_id[v] = nv;
                nv += 1;
            }
        }
        let mut sigma = vec![usize::MAX; kept];
        let mut alpha = vec![usize::MAX; kept];
        let mut vertex_of = vec![usize::MAX; kept];
        for d in 0..self.dart_count() {
            if !keep_dart[d] {
                continue;
            }
            // next kept dart in the rotation at this vertex
            let mut s = self.sigma[d];
            while !keep_dart[s] {
                s = self.sigma[s];
            }
            sigma[dart_id[d]] = dart_id[s];
            alpha[dart_id[d]] = dart_id[self.alpha[d]];
            vertex_of[dart_id[d]] = vertex_id[self.vertex_of[d]];
        }
        let root_dart = keep_dart[root].then(|| dart_id[root]);
        let mut m = RotationMap::new(sigma, alpha, vertex_of, root_dart)?;
        m.vertex_count = nv;
        Ok(m)
    }

    /// Deterministic canonical code; two rooted maps have equal codes iff
    /// they are rooted-isomorphic.
    pub fn canonical_code(&self) -> CanonicalCode {
        let n = self.dart_count();
        if n == 0 {
            return CanonicalCode(vec![0]);
        }
        let root = self
            .root_dart
            .expect("canonical_code requires a root dart");
        // Breadth-first over vertices in first-visit order; at each vertex the
        // rotation is scanned from the entry dart, emitting the first-visit
        // number of each neighbor. The scan start at the root vertex is the
        // root dart itself, which pins the code to the rooting.
        let mut vertex_num = vec![u32::MAX; self.vertex_count];
        let mut entry = vec![usize::MAX; self.vertex_count];
        let rv = self.vertex_of[root];
        vertex_num[rv] = 0;
        entry[rv] = root;
        let mut order = vec![rv];
        let mut next_num = 1u32;
        let mut code = Vec::with_capacity(n + 2);
        let mut qi = 0;
        while qi < order.len() {
            let v = order[qi];
            qi += 1;
            let start = entry[v];
            let mut d = start;
            loop {
                let w = self.head_of(d);
                if vertex_num[w] == u32::MAX {
                    vertex_num[w] = next_num;
                    next_num += 1;
                    entry[w] = self.alpha[d];
                    order.push(w);
                }
                code.push(vertex_num[w]);
                d = self.sigma[d];
                if d == start {
                    break;
                }
            }
            code.push(u32::MAX); // vertex separator
        }
        CanonicalCode(code)
    }

    pub fn rooted_isomorphic(&self, other: &RotationMap) -> bool {
        self.canonical_code() == other.canonical_code()
    }

    /// Serializes in the line-oriented MAPV1 text format.
    pub fn to_text(&self, hex: Option<&[Vertex; 6]>, color: Option<&[u8]>) -> String {
        let mut s = String::new();
        s.push_str("MAPV1\n");
        s.push_str(&format!("DARTS {}\n", self.dart_count()));
        s.push_str(&format!("SIGMA{}\n", join_prefixed(&self.sigma)));
        s.push_str(&format!("ALPHA{}\n", join_prefixed(&self.alpha)));
        s.push_str(&format!("VERTEX{}\n", join_prefixed(&self.vertex_of)));
        match self.root_dart {
            Some(r) => s.push_str(&format!("ROOT {r}\n")),
            None => s.push_str(&format!("ROOT {NO_ROOT}\n")),
        }
        if let Some(h) = hex {
            s.push_str(&format!(
                "HEX {} {} {} {} {} {}\n",
                h[0], h[1], h[2], h[3], h[4], h[5]
            ));
        }
        if let Some(c) = color {
            let cs: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            s.push_str(&format!("COLOR {}\n", cs.join(" ")));
        }
        s
    }

    /// Parses the MAPV1 format; rejects unknown trailing lines.
    pub fn from_text(text: &str) -> Result<(Self, Option<[Vertex; 6]>, Option<Vec<u8>>), MapError> {
        let err = |line: usize, msg: &str| MapError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (ln, first) = lines.next().ok_or_else(|| err(0, "empty input"))?;
        if first.trim_end() != "MAPV1" {
            return Err(err(ln + 1, "expected MAPV1 header"));
        }
        let mut darts: Option<usize> = None;
        let mut sigma = None;
        let mut alpha = None;
        let mut vertex_of = None;
        let mut root: Option<Option<usize>> = None;
        let mut hex: Option<[Vertex; 6]> = None;
        let mut color: Option<Vec<u8>> = None;
        for (ln, raw) in lines {
            let line = raw.trim_end();
            if line.is_empty() {
                return Err(err(ln + 1, "blank line not allowed"));
            }
            let (key, rest) = match line.split_once(' ') {
                Some((k, r)) => (k, r),
                None => (line, ""),
            };
            let nums = |s: &str| -> Result<Vec<usize>, MapError> {
                s.split_whitespace()
                    .map(|t| t.parse::<usize>().map_err(|_| err(ln + 1, "bad integer")))
                    .collect()
            };
            match key {
                "DARTS" => {
                    darts = Some(
                        rest.trim()
                            .parse()
                            .map_err(|_| err(ln + 1, "bad dart count"))?,
                    )
                }
                "SIGMA" => sigma = Some(nums(rest)?),
                "ALPHA" => alpha = Some(nums(rest)?),
                "VERTEX" => vertex_of = Some(nums(rest)?),
                "ROOT" => {
                    let t = rest.trim();
                    root = Some(if t == NO_ROOT {
                        None
                    } else {
                        Some(t.parse().map_err(|_| err(ln + 1, "bad root dart"))?)
                    });
                }
                "HEX" => {
                    let v = nums(rest)?;
                    if v.len() != 6 {
                        return Err(err(ln + 1, "HEX needs 6 vertices"));
                    }
                    hex = Some([v[0], v[1], v[2], v[3], v[4], v[5]]);
                }
                "COLOR" => {
                    let v = nums(rest)?;
                    if v.iter().any(|&x| x > 1) {
                        return Err(err(ln + 1, "COLOR entries must be 0/1"));
                    }
                    color = Some(v.into_iter().map(|x| x as u8).collect());
                }
                _ => return Err(err(ln + 1, "unknown line")),
            }
        }
        let n = darts.ok_or_else(|| err(0, "missing DARTS"))?;
        let sigma = sigma.ok_or_else(|| err(0, "missing SIGMA"))?;
        let alpha = alpha.ok_or_else(|| err(0, "missing ALPHA"))?;
        let vertex_of = vertex_of.ok_or_else(|| err(0, "missing VERTEX"))?;
        let root = root.ok_or_else(|| err(0, "missing ROOT"))?;
        if sigma.len() != n || alpha.len() != n || vertex_of.len() != n {
            return Err(err(0, "array length disagrees with DARTS"));
        }
        let map = RotationMap::new(sigma, alpha, vertex_of, root)?;
        if let Some(c) = &color {
            if c.len() != map.vertex_count() {
                return Err(err(0, "COLOR length disagrees with vertex count"));
            }
        }
        Ok((map, hex, color))
    }

    /// Proper 2-coloring of the vertices, if one exists (class of vertex 0 is 0).
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let adj = self.adjacency();
        let mut color = vec![u8::MAX; self.vertex_count];
        for start in 0..self.vertex_count {
            if color[start] != u8::MAX {
                continue;
            }
            color[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    if color[w] == u8::MAX {
                        color[w] = 1 - color[u];
                        queue.push_back(w);
                    } else if color[w] == color[u] {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            if *x == u32::MAX {
                f.write_str("|")?;
            } else {
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

fn join_prefixed(xs: &[usize]) -> String {
    let mut s = String::new();
    for x in xs {
        s.push(' ');
        s.push_str(&x.to_string());
    }
    s
}

/// Builds the map of a single edge: 2 darts, sigma = identity, alpha swaps.
pub fn single_edge() -> RotationMap {
    RotationMap::new(vec![0, 1], vec![1, 0], vec![0, 1], Some(0)).unwrap()
}

/// Builds a plane cycle on `k` vertices (k >= 3), rooted at (0,1).
pub fn cycle_map(k: usize) -> RotationMap {
    assert!(k >= 3);
    // vertex i carries darts 2i (toward i+1) and 2i+1 (toward i-1)
    let mut sigma = vec![0; 2 * k];
    let mut alpha = vec![0; 2 * k];
    let mut vertex_of = vec![0; 2 * k];
    for i in 0..k {
        sigma[2 * i] = 2 * i + 1;
        sigma[2 * i + 1] = 2 * i;
        alpha[2 * i] = (2 * ((i + 1) % k)) + 1;
        alpha[2 * i + 1] = 2 * ((i + k - 1) % k);
        vertex_of[2 * i] = i;
        vertex_of[2 * i + 1] = i;
    }
    RotationMap::new(sigma, alpha, vertex_of, Some(0)).unwrap()
}
