//! Locally finite posets: the lattice, free-word, abelian-cone, columnar and
//! custom-DAG families, with their cover structure and order queries.

use crate::element::ElementId;
use crate::error::{Error, Result};
use serde_json::json;
use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Mutex;

/// A locally finite poset. Immutable after construction; all queries are
/// pure, so a handle can be shared freely across threads.
#[derive(Debug)]
pub enum Poset {
    /// The lattice of d-vectors of non-negative integers, ordered
    /// coordinatewise. Unique minimal element 0; d upper neighbors each.
    Lattice { dim: usize },
    /// Words over a finite alphabet ordered by prefix. Unique minimal
    /// element is the empty word; |S| upper neighbors each.
    Tree { alphabet: Vec<char> },
    /// The abelian monoid generated by integer vectors, ordered by
    /// x <= y iff y - x lies in the monoid.
    Cone(ConePoset),
    /// N0 x S where (n1, s1) < (n2, s2) iff n1 < n2. Layers fill
    /// sequentially; |S| minimal elements and |S| upper neighbors each.
    Columnar { labels: Vec<String> },
    /// Finite poset given by an explicit cover DAG over labelled nodes.
    Custom(CustomPoset),
}

/// Abelian cone presentation: generators in Z^k with non-negative entries.
///
/// Elements are stored as their ambient vectors, which is already a normal
/// form. Membership of v means v is a non-negative integer combination of
/// the generators; the restriction to non-negative generator entries keeps
/// that test decidable by descent on the coordinate sum.
#[derive(Debug)]
pub struct ConePoset {
    dim: usize,
    generators: Vec<Vec<i64>>,
    /// Minimal non-zero elements of the monoid; covers of x are x + atom.
    atoms: Vec<Vec<i64>>,
    member_memo: Mutex<HashMap<Vec<i64>, bool>>,
}

#[derive(Debug)]
pub struct CustomPoset {
    nodes: Vec<String>,
    index: HashMap<String, u32>,
    covers_up: Vec<Vec<u32>>,
    covers_down: Vec<Vec<u32>>,
    /// reach[i] holds the bitset of j with i <= j.
    reach: Vec<Vec<u64>>,
    levels: Vec<u64>,
}

/// Report from [`Poset::validate_local_finiteness`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct LocalFinitenessReport {
    pub probes: Vec<ProbeReport>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeReport {
    pub element: ElementId,
    pub down_set_size: usize,
    pub upper_neighbor_count: usize,
}

impl Poset {
    pub fn lattice(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidPoset("lattice dimension must be >= 1".into()));
        }
        Ok(Poset::Lattice { dim })
    }

    pub fn tree(alphabet: Vec<char>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::InvalidPoset("tree alphabet must be non-empty".into()));
        }
        let mut sorted = alphabet.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != alphabet.len() {
            return Err(Error::InvalidPoset("tree alphabet has repeated symbols".into()));
        }
        Ok(Poset::Tree { alphabet: sorted })
    }

    pub fn cone(generators: Vec<Vec<i64>>) -> Result<Self> {
        ConePoset::new(generators).map(Poset::Cone)
    }

    pub fn columnar(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidPoset("columnar label set must be non-empty".into()));
        }
        Ok(Poset::Columnar { labels })
    }

    pub fn custom(covers: &[(String, String)]) -> Result<Self> {
        CustomPoset::new(covers).map(Poset::Custom)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Poset::Lattice { .. } => "lattice",
            Poset::Tree { .. } => "tree",
            Poset::Cone(_) => "cone",
            Poset::Columnar { .. } => "columnar",
            Poset::Custom(_) => "custom",
        }
    }

    pub fn validate_element(&self, x: &ElementId) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidElement(msg));
        match (self, x) {
            (Poset::Lattice { dim }, ElementId::Coords(v)) => {
                if v.len() != *dim {
                    return bad(format!("expected {dim} coordinates, got {}", v.len()));
                }
                if v.iter().any(|&c| c < 0) {
                    return bad(format!("negative coordinate in {x}"));
                }
                Ok(())
            }
            (Poset::Tree { alphabet }, ElementId::Word(w)) => {
                for ch in w.chars() {
                    if !alphabet.contains(&ch) {
                        return bad(format!("symbol '{ch}' not in alphabet"));
                    }
                }
                Ok(())
            }
            (Poset::Cone(c), ElementId::Coords(v)) => {
                if v.len() != c.dim {
                    return bad(format!("expected {} coordinates, got {}", c.dim, v.len()));
                }
                if !c.member(v) {
                    return bad(format!("{x} is not generated by the cone generators"));
                }
                Ok(())
            }
            (Poset::Columnar { labels }, ElementId::Coords(v)) => {
                if v.len() != 2 {
                    return bad("columnar elements are [layer, slot] pairs".into());
                }
                if v[0] < 0 || v[1] < 0 || v[1] as usize >= labels.len() {
                    return bad(format!("columnar element {x} out of range"));
                }
                Ok(())
            }
            (Poset::Custom(c), ElementId::Node(n)) => {
                if c.index.contains_key(n) {
                    Ok(())
                } else {
                    bad(format!("unknown node '{n}'"))
                }
            }
            _ => bad(format!("element kind does not match family {}", self.family_name())),
        }
    }

    /// All minimal elements of the poset, in canonical order.
    pub fn minimal_elements(&self) -> Vec<ElementId> {
        match self {
            Poset::Lattice { dim } => vec![ElementId::Coords(vec![0; *dim])],
            Poset::Tree { .. } => vec![ElementId::word("")],
            Poset::Cone(c) => vec![ElementId::Coords(vec![0; c.dim])],
            Poset::Columnar { labels } => (0..labels.len() as i64)
                .map(|s| ElementId::Coords(vec![0, s]))
                .collect(),
            Poset::Custom(c) => {
                let mut out: Vec<ElementId> = (0..c.nodes.len())
                    .filter(|&i| c.covers_down[i].is_empty())
                    .map(|i| ElementId::node(c.nodes[i].clone()))
                    .collect();
                out.sort();
                out
            }
        }
    }

    /// All covers of x, in canonical order.
    pub fn upper_neighbors(&self, x: &ElementId) -> Result<Vec<ElementId>> {
        self.validate_element(x)?;
        let mut out: Vec<ElementId> = match (self, x) {
            (Poset::Lattice { dim }, ElementId::Coords(v)) => (0..*dim)
                .map(|i| {
                    let mut w = v.clone();
                    w[i] += 1;
                    ElementId::Coords(w)
                })
                .collect(),
            (Poset::Tree { alphabet }, ElementId::Word(w)) => alphabet
                .iter()
                .map(|ch| {
                    let mut ext = w.clone();
                    ext.push(*ch);
                    ElementId::Word(ext)
                })
                .collect(),
            (Poset::Cone(c), ElementId::Coords(v)) => c
                .atoms
                .iter()
                .map(|a| ElementId::Coords(add(v, a)))
                .collect(),
            (Poset::Columnar { labels }, ElementId::Coords(v)) => (0..labels.len() as i64)
                .map(|s| ElementId::Coords(vec![v[0] + 1, s]))
                .collect(),
            (Poset::Custom(c), ElementId::Node(n)) => {
                let i = c.index[n] as usize;
                c.covers_up[i]
                    .iter()
                    .map(|&j| ElementId::node(c.nodes[j as usize].clone()))
                    .collect()
            }
            _ => unreachable!("validated above"),
        };
        out.sort();
        Ok(out)
    }

    /// All elements covered by x; empty iff x is minimal.
    pub fn lower_neighbors(&self, x: &ElementId) -> Result<Vec<ElementId>> {
        self.validate_element(x)?;
        let mut out: Vec<ElementId> = match (self, x) {
            (Poset::Lattice { dim }, ElementId::Coords(v)) => (0..*dim)
                .filter(|&i| v[i] > 0)
                .map(|i| {
                    let mut w = v.clone();
                    w[i] -= 1;
                    ElementId::Coords(w)
                })
                .collect(),
            (Poset::Tree { .. }, ElementId::Word(w)) => {
                if w.is_empty() {
                    Vec::new()
                } else {
                    let mut parent = w.clone();
                    parent.pop();
                    vec![ElementId::Word(parent)]
                }
            }
            (Poset::Cone(c), ElementId::Coords(v)) => c
                .atoms
                .iter()
                .filter_map(|a| {
                    let w = sub(v, a)?;
                    if c.member(&w) {
                        Some(ElementId::Coords(w))
                    } else {
                        None
                    }
                })
                .collect(),
            (Poset::Columnar { labels }, ElementId::Coords(v)) => {
                if v[0] == 0 {
                    Vec::new()
                } else {
                    (0..labels.len() as i64)
                        .map(|s| ElementId::Coords(vec![v[0] - 1, s]))
                        .collect()
                }
            }
            (Poset::Custom(c), ElementId::Node(n)) => {
                let i = c.index[n] as usize;
                c.covers_down[i]
                    .iter()
                    .map(|&j| ElementId::node(c.nodes[j as usize].clone()))
                    .collect()
            }
            _ => unreachable!("validated above"),
        };
        out.sort();
        Ok(out)
    }

    /// Order comparison x <= y.
    pub fn leq(&self, x: &ElementId, y: &ElementId) -> Result<bool> {
        self.validate_element(x)?;
        self.validate_element(y)?;
        Ok(match (self, x, y) {
            (Poset::Lattice { .. }, ElementId::Coords(a), ElementId::Coords(b)) => {
                a.iter().zip(b).all(|(p, q)| p <= q)
            }
            (Poset::Tree { .. }, ElementId::Word(a), ElementId::Word(b)) => b.starts_with(a.as_str()),
            (Poset::Cone(c), ElementId::Coords(a), ElementId::Coords(b)) => match sub(b, a) {
                Some(d) => c.member(&d),
                None => false,
            },
            (Poset::Columnar { .. }, ElementId::Coords(a), ElementId::Coords(b)) => {
                a == b || a[0] < b[0]
            }
            (Poset::Custom(c), ElementId::Node(a), ElementId::Node(b)) => {
                let i = c.index[a] as usize;
                let j = c.index[b] as usize;
                c.reach[i][j / 64] & (1u64 << (j % 64)) != 0
            }
            _ => unreachable!("validated above"),
        })
    }

    /// Minimal number of cover steps from a minimal element up to x.
    pub fn level(&self, x: &ElementId) -> Result<u64> {
        self.validate_element(x)?;
        Ok(match (self, x) {
            (Poset::Lattice { .. }, ElementId::Coords(v)) => v.iter().map(|&c| c as u64).sum(),
            (Poset::Tree { .. }, ElementId::Word(w)) => w.chars().count() as u64,
            (Poset::Cone(c), ElementId::Coords(v)) => c.min_steps(v),
            (Poset::Columnar { .. }, ElementId::Coords(v)) => v[0] as u64,
            (Poset::Custom(c), ElementId::Node(n)) => c.levels[c.index[n] as usize],
            _ => unreachable!("validated above"),
        })
    }

    /// Monoid structure, for the families that carry one. The columnar and
    /// custom families are plain posets.
    pub fn monoid_identity(&self) -> Option<ElementId> {
        match self {
            Poset::Lattice { dim } => Some(ElementId::Coords(vec![0; *dim])),
            Poset::Tree { .. } => Some(ElementId::word("")),
            Poset::Cone(c) => Some(ElementId::Coords(vec![0; c.dim])),
            _ => None,
        }
    }

    /// The monoid operation: vector addition for lattice/cone families and
    /// word concatenation for the free-word family.
    pub fn monoid_op(&self, x: &ElementId, y: &ElementId) -> Result<ElementId> {
        self.validate_element(x)?;
        self.validate_element(y)?;
        match (self, x, y) {
            (Poset::Lattice { .. }, ElementId::Coords(a), ElementId::Coords(b))
            | (Poset::Cone(_), ElementId::Coords(a), ElementId::Coords(b)) => {
                Ok(ElementId::Coords(add(a, b)))
            }
            (Poset::Tree { .. }, ElementId::Word(a), ElementId::Word(b)) => {
                Ok(ElementId::Word(format!("{a}{b}")))
            }
            _ => Err(Error::Precondition(format!(
                "family {} has no monoid structure",
                self.family_name()
            ))),
        }
    }

    /// Exhaustive down-closure from each probe, certifying finiteness within
    /// the node budget, plus neighbor counts.
    pub fn validate_local_finiteness(
        &self,
        probes: &[ElementId],
        node_budget: usize,
    ) -> Result<LocalFinitenessReport> {
        let mut out = Vec::with_capacity(probes.len());
        for x in probes {
            let down = self.down_closure(x, node_budget)?;
            out.push(ProbeReport {
                element: x.clone(),
                down_set_size: down.len(),
                upper_neighbor_count: self.upper_neighbors(x)?.len(),
            });
        }
        Ok(LocalFinitenessReport { probes: out })
    }

    /// The set {y : y <= x}, by breadth-first descent over lower neighbors.
    pub fn down_closure(&self, x: &ElementId, node_budget: usize) -> Result<Vec<ElementId>> {
        self.validate_element(x)?;
        let mut seen: HashSet<ElementId> = HashSet::new();
        let mut queue: VecDeque<ElementId> = VecDeque::new();
        seen.insert(x.clone());
        queue.push_back(x.clone());
        while let Some(cur) = queue.pop_front() {
            for low in self.lower_neighbors(&cur)? {
                if seen.insert(low.clone()) {
                    if seen.len() > node_budget {
                        return Err(Error::Budget(format!(
                            "down-closure of {x} exceeded {node_budget} nodes; possibly not locally finite"
                        )));
                    }
                    queue.push_back(low);
                }
            }
        }
        let mut v: Vec<ElementId> = seen.into_iter().collect();
        v.sort();
        Ok(v)
    }

    /// Catalog entry: family name plus its parameter schema.
    pub fn catalog() -> serde_json::Value {
        json!([
            {"family": "lattice", "params": {"d": "dimension, integer >= 1"},
             "elements": "arrays of d non-negative integers"},
            {"family": "tree", "params": {"alphabet": "list of single-character symbols"},
             "elements": "words over the alphabet (the empty word is minimal)"},
            {"family": "cone", "params": {"generators": "list of integer vectors with non-negative entries"},
             "elements": "integer vectors generated by the generators"},
            {"family": "columnar", "params": {"labels": "list of slot labels"},
             "elements": "[layer, slot] integer pairs; layers fill sequentially"},
            {"family": "custom", "params": {"covers": "list of [lower, upper] node-label pairs forming a cover DAG"},
             "elements": "node labels"},
        ])
    }
}

impl ConePoset {
    fn new(generators: Vec<Vec<i64>>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidPoset("cone needs at least one generator".into()));
        }
        let dim = generators[0].len();
        if dim == 0 {
            return Err(Error::InvalidPoset("cone generators must be non-empty vectors".into()));
        }
        let mut gens: Vec<Vec<i64>> = Vec::new();
        for g in &generators {
            if g.len() != dim {
                return Err(Error::InvalidPoset("cone generators have mixed dimensions".into()));
            }
            if g.iter().any(|&c| c < 0) {
                return Err(Error::InvalidPoset(
                    "cone generators must have non-negative entries".into(),
                ));
            }
            if g.iter().all(|&c| c == 0) {
                return Err(Error::InvalidPoset("zero vector cannot be a cone generator".into()));
            }
            if !gens.contains(g) {
                gens.push(g.clone());
            }
        }
        gens.sort();
        let mut cone = ConePoset {
            dim,
            generators: gens,
            atoms: Vec::new(),
            member_memo: Mutex::new(HashMap::new()),
        };
        cone.atoms = cone.compute_atoms();
        Ok(cone)
    }

    /// Membership in the monoid generated by the generators, by descent on
    /// the coordinate sum (each generator has positive sum, so the search
    /// terminates).
    fn member(&self, v: &[i64]) -> bool {
        if v.iter().any(|&c| c < 0) {
            return false;
        }
        if v.iter().all(|&c| c == 0) {
            return true;
        }
        if let Some(&hit) = self.member_memo.lock().unwrap().get(v) {
            return hit;
        }
        let mut result = false;
        for g in &self.generators {
            if let Some(rest) = sub(v, g) {
                if self.member(&rest) {
                    result = true;
                    break;
                }
            }
        }
        self.member_memo.lock().unwrap().insert(v.to_vec(), result);
        result
    }

    /// Minimal non-zero monoid elements. Every atom is a generator; a
    /// generator fails to be an atom when some other non-zero element sits
    /// strictly below it, which a scan of its bounding box detects.
    fn compute_atoms(&self) -> Vec<Vec<i64>> {
        let mut atoms = Vec::new();
        'outer: for g in &self.generators {
            let mut cursor = vec![0i64; self.dim];
            loop {
                if cursor != *g && cursor.iter().any(|&c| c != 0) {
                    let diff = sub(g, &cursor).expect("cursor stays inside the box");
                    if self.member(&cursor) && self.member(&diff) {
                        continue 'outer; // strictly between 0 and g
                    }
                }
                // Advance the box cursor.
                let mut i = 0;
                loop {
                    if i == self.dim {
                        atoms.push(g.clone());
                        continue 'outer;
                    }
                    cursor[i] += 1;
                    if cursor[i] <= g[i] {
                        break;
                    }
                    cursor[i] = 0;
                    i += 1;
                }
            }
        }
        atoms.sort();
        atoms
    }

    /// Minimal number of atoms summing to v.
    fn min_steps(&self, v: &[i64]) -> u64 {
        fn go(cone: &ConePoset, v: &[i64], memo: &mut HashMap<Vec<i64>, u64>) -> u64 {
            if v.iter().all(|&c| c == 0) {
                return 0;
            }
            if let Some(&hit) = memo.get(v) {
                return hit;
            }
            let mut best = u64::MAX;
            for a in &cone.atoms {
                if let Some(rest) = sub(v, a) {
                    if cone.member(&rest) {
                        best = best.min(1 + go(cone, &rest, memo));
                    }
                }
            }
            memo.insert(v.to_vec(), best);
            best
        }
        let mut memo = HashMap::new();
        go(self, v, &mut memo)
    }
}

impl CustomPoset {
    fn new(covers: &[(String, String)]) -> Result<Self> {
        let mut nodes: Vec<String> = covers
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect();
        nodes.sort();
        nodes.dedup();
        if nodes.is_empty() {
            return Err(Error::InvalidPoset("custom poset has no nodes".into()));
        }
        let index: HashMap<String, u32> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        let n = nodes.len();
        let mut covers_up = vec![Vec::new(); n];
        let mut covers_down = vec![Vec::new(); n];
        let mut seen_edges = HashSet::new();
        for (a, b) in covers {
            if a == b {
                return Err(Error::InvalidPoset(format!("self-loop at node '{a}'")));
            }
            let (i, j) = (index[a], index[b]);
            if seen_edges.insert((i, j)) {
                covers_up[i as usize].push(j);
                covers_down[j as usize].push(i);
            }
        }
        for list in covers_up.iter_mut().chain(covers_down.iter_mut()) {
            list.sort_unstable();
        }

        // Kahn's algorithm: topological order certifies acyclicity.
        let mut indeg: Vec<usize> = covers_down.iter().map(|v| v.len()).collect();
        let mut queue: VecDeque<usize> =
            (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(i) = queue.pop_front() {
            topo.push(i);
            for &j in &covers_up[i] {
                indeg[j as usize] -= 1;
                if indeg[j as usize] == 0 {
                    queue.push_back(j as usize);
                }
            }
        }
        if topo.len() != n {
            return Err(Error::InvalidPoset("cover relation contains a cycle".into()));
        }

        // Reachability bitsets in reverse topological order.
        let words = n.div_ceil(64);
        let mut reach = vec![vec![0u64; words]; n];
        for &i in topo.iter().rev() {
            reach[i][i / 64] |= 1u64 << (i % 64);
            for &j in &covers_up[i] {
                let src = reach[j as usize].clone();
                for (w, s) in reach[i].iter_mut().zip(src.iter()) {
                    *w |= s;
                }
            }
        }

        // A declared cover must not be implied transitively: if some other
        // out-neighbor of i reaches j, the edge (i, j) is not a cover.
        for i in 0..n {
            for &j in &covers_up[i] {
                for &k in &covers_up[i] {
                    if k != j && reach[k as usize][j as usize / 64] & (1u64 << (j % 64)) != 0 {
                        return Err(Error::InvalidPoset(format!(
                            "declared cover {} -> {} is transitive (via {})",
                            nodes[i], nodes[j as usize], nodes[k as usize]
                        )));
                    }
                }
            }
        }

        // Minimal path length from below, in topological order.
        let mut levels = vec![0u64; n];
        for &i in &topo {
            if !covers_down[i].is_empty() {
                levels[i] = covers_down[i]
                    .iter()
                    .map(|&j| levels[j as usize] + 1)
                    .min()
                    .unwrap();
            }
        }

        Ok(CustomPoset {
            nodes,
            index,
            covers_up,
            covers_down,
            reach,
            levels,
        })
    }
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[i64], b: &[i64]) -> Option<Vec<i64>> {
    let out: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if out.iter().any(|&c| c < 0) {
        None
    } else {
        Some(out)
    }
}
