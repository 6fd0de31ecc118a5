//! Finite lower sets: down-closures, growth frontiers, mutation, and
//! exhaustive enumeration of sub-lower-sets.

use crate::element::ElementId;
use crate::error::{Error, Result};
use crate::poset::Poset;
use std::collections::{HashMap, HashSet};
use std::sync::Arc;

/// Canonical memo key of a lower set: its sorted maximal antichain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetKey(pub Vec<ElementId>);

impl SetKey {
    pub fn render(&self) -> String {
        if self.0.is_empty() {
            return "{}".to_string();
        }
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        format!("{{{}}}", parts.join(" "))
    }
}

/// A finite lower set A of a poset: for every beta in A, everything below
/// beta is also in A. Keyed by its maximal antichain; immutable.
#[derive(Debug, Clone)]
pub struct LowerSet {
    poset: Arc<Poset>,
    elements: Vec<ElementId>,
    maximal: Vec<ElementId>,
}

impl LowerSet {
    pub fn empty(poset: Arc<Poset>) -> Self {
        LowerSet {
            poset,
            elements: Vec::new(),
            maximal: Vec::new(),
        }
    }

    /// The down-set of a single element.
    pub fn down_set(poset: Arc<Poset>, x: &ElementId, node_budget: usize) -> Result<Self> {
        Self::down_of_many(poset, std::slice::from_ref(x), node_budget)
    }

    /// The union of down-sets of several elements.
    pub fn down_of_many(
        poset: Arc<Poset>,
        xs: &[ElementId],
        node_budget: usize,
    ) -> Result<Self> {
        let mut all: HashSet<ElementId> = HashSet::new();
        for x in xs {
            for y in poset.down_closure(x, node_budget)? {
                all.insert(y);
                if all.len() > node_budget {
                    return Err(Error::Budget(format!(
                        "down-closure union exceeded {node_budget} nodes"
                    )));
                }
            }
        }
        let mut elements: Vec<ElementId> = all.into_iter().collect();
        elements.sort();
        Self::from_sorted_elements(poset, elements)
    }

    /// Builds from an explicit element list, validating lower-closedness.
    pub fn from_elements(poset: Arc<Poset>, mut elements: Vec<ElementId>) -> Result<Self> {
        elements.sort();
        elements.dedup();
        for x in &elements {
            for low in poset.lower_neighbors(x)? {
                if elements.binary_search(&low).is_err() {
                    return Err(Error::Precondition(format!(
                        "not lower-closed: {x} is present but its lower neighbor {low} is not"
                    )));
                }
            }
        }
        Self::from_sorted_elements(poset, elements)
    }

    fn from_sorted_elements(poset: Arc<Poset>, elements: Vec<ElementId>) -> Result<Self> {
        // Maximal elements are exactly those with no cover inside the set.
        let mut maximal = Vec::new();
        for x in &elements {
            let has_cover_inside = poset
                .upper_neighbors(x)?
                .iter()
                .any(|y| elements.binary_search(y).is_ok());
            if !has_cover_inside {
                maximal.push(x.clone());
            }
        }
        Ok(LowerSet {
            poset,
            elements,
            maximal,
        })
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements in canonical order.
    pub fn elements(&self) -> &[ElementId] {
        &self.elements
    }

    /// The maximal antichain max(A), sorted.
    pub fn maximal(&self) -> &[ElementId] {
        &self.maximal
    }

    pub fn key(&self) -> SetKey {
        SetKey(self.maximal.clone())
    }

    pub fn contains(&self, x: &ElementId) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    /// The growth frontier max*(A): minimal elements of the complement,
    /// equivalently every beta not in A all of whose lower neighbors lie in
    /// A. Candidates are the minimal elements of the poset plus the covers
    /// of elements of A; every growth site is of one of these forms.
    pub fn growth_sites(&self) -> Result<Vec<ElementId>> {
        let mut candidates: HashSet<ElementId> = HashSet::new();
        for m in self.poset.minimal_elements() {
            if !self.contains(&m) {
                candidates.insert(m);
            }
        }
        for x in &self.elements {
            for y in self.poset.upper_neighbors(x)? {
                if !self.contains(&y) {
                    candidates.insert(y);
                }
            }
        }
        let mut out = Vec::new();
        for beta in candidates {
            let all_lower_in = self
                .poset
                .lower_neighbors(&beta)?
                .iter()
                .all(|low| self.contains(low));
            if all_lower_in {
                out.push(beta);
            }
        }
        out.sort();
        Ok(out)
    }

    /// A with the maximal element alpha etched away.
    pub fn remove_max(&self, alpha: &ElementId) -> Result<LowerSet> {
        if self.maximal.binary_search(alpha).is_err() {
            return Err(Error::Precondition(format!(
                "{alpha} is not in the maximal antichain {}",
                self.key().render()
            )));
        }
        let elements: Vec<ElementId> = self
            .elements
            .iter()
            .filter(|x| *x != alpha)
            .cloned()
            .collect();
        Self::from_sorted_elements(self.poset.clone(), elements)
    }

    /// A with the growth site beta added.
    pub fn add_site(&self, beta: &ElementId) -> Result<LowerSet> {
        let sites = self.growth_sites()?;
        if sites.binary_search(beta).is_err() {
            return Err(Error::Precondition(format!(
                "{beta} is not a growth site of {}",
                self.key().render()
            )));
        }
        let mut elements = self.elements.clone();
        let pos = elements.binary_search(beta).unwrap_err();
        elements.insert(pos, beta.clone());
        Self::from_sorted_elements(self.poset.clone(), elements)
    }

    /// Every lower set contained in this one, ordered by cardinality with
    /// lexicographic tie-break on the antichain key, so that each set comes
    /// after all of its subsets.
    pub fn enumerate_sublowersets(&self, element_cap: usize) -> Result<Vec<LowerSet>> {
        if self.len() > element_cap {
            return Err(Error::Budget(format!(
                "sub-lower-set enumeration needs |B| <= {element_cap}, got {}",
                self.len()
            )));
        }
        let mut out: Vec<LowerSet> = Vec::new();
        let mut level: Vec<LowerSet> = vec![LowerSet::empty(self.poset.clone())];
        let mut seen: HashSet<SetKey> = HashSet::new();
        seen.insert(SetKey(Vec::new()));
        while !level.is_empty() {
            level.sort_by(|a, b| a.key().cmp(&b.key()));
            let mut next: Vec<LowerSet> = Vec::new();
            for set in &level {
                for beta in set.growth_sites()? {
                    if !self.contains(&beta) {
                        continue;
                    }
                    let bigger = set.add_site(&beta)?;
                    if seen.insert(bigger.key()) {
                        next.push(bigger);
                    }
                }
            }
            out.append(&mut level);
            level = next;
        }
        Ok(out)
    }
}

/// Breadth-first enumeration of all lower sets of the poset with at most
/// `max_size` elements, grouped by size. Used by the generic variance lower
/// bound, whose defining maximum ranges over every lower set of a given size.
pub fn enumerate_lowersets_by_size(
    poset: &Arc<Poset>,
    max_size: usize,
    count_cap: usize,
) -> Result<Vec<Vec<LowerSet>>> {
    let mut levels: Vec<Vec<LowerSet>> = Vec::with_capacity(max_size + 1);
    let mut seen: HashMap<SetKey, ()> = HashMap::new();
    let mut level = vec![LowerSet::empty(poset.clone())];
    seen.insert(SetKey(Vec::new()), ());
    let mut total = 1usize;
    for _size in 0..max_size {
        let mut next: Vec<LowerSet> = Vec::new();
        for set in &level {
            for beta in set.growth_sites()? {
                let bigger = set.add_site(&beta)?;
                if seen.insert(bigger.key(), ()).is_none() {
                    total += 1;
                    if total > count_cap {
                        return Err(Error::Budget(format!(
                            "lower-set enumeration exceeded {count_cap} sets"
                        )));
                    }
                    next.push(bigger);
                }
            }
        }
        next.sort_by(|a, b| a.key().cmp(&b.key()));
        levels.push(std::mem::replace(&mut level, next));
        if levels.last().map(|l| l.is_empty()).unwrap_or(false) {
            break;
        }
    }
    levels.push(level);
    Ok(levels)
}
