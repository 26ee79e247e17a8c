//! Minimum hitting sets over small families of edge sets.
//!
//! Both solvers are generic over the element type; ties are always broken
//! toward the lexicographically smallest sorted element list.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HittingSetError {
    #[error("set {0} has no allowed element")]
    InfeasibleSet(usize),
}

/// Sets re-expressed over dense element indices, forbidden elements dropped.
struct Instance<E> {
    universe: Vec<E>,
    sets: Vec<Vec<usize>>,
    /// For each element, the sets containing it.
    containing: Vec<Vec<usize>>,
}

impl<E: Ord + Clone> Instance<E> {
    fn new(sets: &[BTreeSet<E>], forbidden: &BTreeSet<E>) -> Result<Self, HittingSetError> {
        let universe: Vec<E> = sets
            .iter()
            .flatten()
            .filter(|e| !forbidden.contains(*e))
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut indexed = Vec::with_capacity(sets.len());
        for (i, set) in sets.iter().enumerate() {
            let members: Vec<usize> = set
                .iter()
                .filter(|e| !forbidden.contains(*e))
                .map(|e| universe.binary_search(e).expect("in universe"))
                .collect();
            if members.is_empty() {
                return Err(HittingSetError::InfeasibleSet(i));
            }
            indexed.push(members);
        }
        let mut containing = vec![Vec::new(); universe.len()];
        for (s, members) in indexed.iter().enumerate() {
            for &e in members {
                containing[e].push(s);
            }
        }
        Ok(Instance {
            universe,
            sets: indexed,
            containing,
        })
    }

    fn collect(&self, chosen: impl IntoIterator<Item = usize>) -> BTreeSet<E> {
        chosen.into_iter().map(|e| self.universe[e].clone()).collect()
    }
}

/// Mutable search state shared by the branch-and-bound routines.
struct Search<'a, E> {
    inst: &'a Instance<E>,
    hits: Vec<u32>,
    banned: Vec<bool>,
}

impl<E> Search<'_, E> {
    fn choose(&mut self, e: usize) {
        for &s in &self.inst.containing[e] {
            self.hits[s] += 1;
        }
    }

    fn unchoose(&mut self, e: usize) {
        for &s in &self.inst.containing[e] {
            self.hits[s] -= 1;
        }
    }

    fn allowed<'b>(&'b self, set: usize) -> impl Iterator<Item = usize> + 'b {
        self.inst.sets[set].iter().copied().filter(|&e| !self.banned[e])
    }

    fn uncovered(&self) -> Vec<usize> {
        (0..self.inst.sets.len()).filter(|&s| self.hits[s] == 0).collect()
    }

    /// Number of pairwise disjoint uncovered sets, a lower bound on the
    /// elements still needed.
    fn disjoint_bound(&self, uncovered: &[usize]) -> usize {
        let mut order: Vec<(usize, usize)> = uncovered
            .iter()
            .map(|&s| (self.allowed(s).count(), s))
            .collect();
        order.sort_unstable();
        let mut used = vec![false; self.inst.universe.len()];
        let mut bound = 0;
        for (_, s) in order {
            if self.allowed(s).all(|e| !used[e]) {
                for e in self.allowed(s).collect::<Vec<_>>() {
                    used[e] = true;
                }
                bound += 1;
            }
        }
        bound
    }

    /// Searches for a cover of the uncovered sets using fewer than `*best`
    /// additional elements; on success lowers `*best` to the size found.
    fn branch(&mut self, depth: usize, best: &mut usize) {
        let uncovered = self.uncovered();
        if uncovered.is_empty() {
            *best = (*best).min(depth);
            return;
        }
        if depth + self.disjoint_bound(&uncovered) >= *best {
            return;
        }
        let pivot = uncovered
            .iter()
            .copied()
            .min_by_key(|&s| (self.allowed(s).count(), s))
            .expect("non-empty");
        let options: Vec<usize> = self.allowed(pivot).collect();
        let mut newly_banned = Vec::new();
        for e in options {
            if depth + 1 >= *best {
                break;
            }
            self.choose(e);
            self.branch(depth + 1, best);
            self.unchoose(e);
            // Later siblings exclude e: those covers were explored above.
            self.banned[e] = true;
            newly_banned.push(e);
        }
        for e in newly_banned {
            self.banned[e] = false;
        }
    }

    /// Size of a minimum cover of what is still uncovered, if it is at most
    /// `budget`.
    fn min_cover_within(&mut self, budget: usize) -> Option<usize> {
        let mut best = budget + 1;
        self.branch(0, &mut best);
        (best <= budget).then_some(best)
    }
}

/// Exact minimum-cardinality hitting set, disjoint from `forbidden`, and the
/// lexicographically smallest one among all minima.
///
/// Branch and bound: branch on the uncovered set with the fewest allowed
/// elements, prune with the incumbent and a disjoint-set packing bound.
pub fn min_hitting_set_exact<E: Ord + Clone>(
    sets: &[BTreeSet<E>],
    forbidden: &BTreeSet<E>,
) -> Result<BTreeSet<E>, HittingSetError> {
    let inst = Instance::new(sets, forbidden)?;
    let n = inst.universe.len();
    let mut search = Search {
        inst: &inst,
        hits: vec![0; inst.sets.len()],
        banned: vec![false; n],
    };
    // One element per set always suffices.
    let optimum = search
        .min_cover_within(inst.sets.len())
        .expect("every set has an allowed element");

    // Fix elements smallest-first: take the least element that still admits
    // a completion of the optimal size from strictly larger elements.
    let mut chosen = Vec::with_capacity(optimum);
    let mut floor = 0;
    while !search.uncovered().is_empty() {
        let remaining = optimum - chosen.len();
        let mut picked = None;
        for e in floor..n {
            search.banned[e] = true;
            search.choose(e);
            if search.min_cover_within(remaining - 1).is_some() {
                picked = Some(e);
                break;
            }
            search.unchoose(e);
        }
        let e = picked.expect("an optimal completion exists");
        chosen.push(e);
        floor = e + 1;
    }
    debug_assert_eq!(chosen.len(), optimum);
    Ok(inst.collect(chosen))
}

/// Greedy hitting set: repeatedly take the allowed element covering the most
/// uncovered sets, smallest element on ties. Always feasible, not always
/// minimum.
pub fn min_hitting_set_greedy<E: Ord + Clone>(
    sets: &[BTreeSet<E>],
    forbidden: &BTreeSet<E>,
) -> Result<BTreeSet<E>, HittingSetError> {
    let inst = Instance::new(sets, forbidden)?;
    let mut covered = vec![false; inst.sets.len()];
    let mut chosen = Vec::new();
    while covered.iter().any(|c| !c) {
        let (e, _) = inst
            .containing
            .iter()
            .enumerate()
            .map(|(e, sets)| (e, sets.iter().filter(|&&s| !covered[s]).count()))
            // max_by_key keeps the last maximum; reversing keeps the smallest index.
            .rev()
            .max_by_key(|&(_, gain)| gain)
            .expect("non-empty universe");
        for &s in &inst.containing[e] {
            covered[s] = true;
        }
        chosen.push(e);
    }
    Ok(inst.collect(chosen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn fam(sets: &[&[u8]]) -> Vec<BTreeSet<u8>> {
        sets.iter().map(|s| s.iter().copied().collect()).collect()
    }

    fn hits_all(cover: &BTreeSet<u8>, sets: &[BTreeSet<u8>]) -> bool {
        sets.iter().all(|s| !s.is_disjoint(cover))
    }

    /// Subsets by increasing size, lexicographic within a size: the first
    /// hit is the lexicographically smallest minimum.
    fn brute_force(sets: &[BTreeSet<u8>], forbidden: &BTreeSet<u8>) -> Option<BTreeSet<u8>> {
        let universe: Vec<u8> = sets
            .iter()
            .flatten()
            .filter(|e| !forbidden.contains(*e))
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for k in 0..=universe.len() {
            for combo in universe.iter().copied().combinations(k) {
                let cover: BTreeSet<u8> = combo.into_iter().collect();
                if hits_all(&cover, sets) {
                    return Some(cover);
                }
            }
        }
        None
    }

    #[test]
    fn exact_examples() {
        let none = BTreeSet::new();
        assert_eq!(min_hitting_set_exact(&fam(&[&[1], &[2]]), &none).unwrap(), BTreeSet::from([1, 2]));
        assert_eq!(min_hitting_set_exact(&fam(&[&[1, 2], &[2, 3]]), &none).unwrap(), BTreeSet::from([2]));
        assert_eq!(
            min_hitting_set_exact(&fam(&[&[1, 2], &[2, 3]]), &BTreeSet::from([2])).unwrap(),
            BTreeSet::from([1, 3])
        );
        assert_eq!(
            min_hitting_set_exact(&fam(&[&[1, 2], &[2]]), &BTreeSet::from([2])),
            Err(HittingSetError::InfeasibleSet(1))
        );
        assert!(min_hitting_set_exact::<u8>(&[], &none).unwrap().is_empty());
    }

    #[test]
    fn greedy_examples() {
        let none = BTreeSet::new();
        assert_eq!(min_hitting_set_greedy(&fam(&[&[1], &[2]]), &none).unwrap(), BTreeSet::from([1, 2]));
        assert_eq!(min_hitting_set_greedy(&fam(&[&[1, 2], &[2, 3]]), &none).unwrap(), BTreeSet::from([2]));
        assert_eq!(
            min_hitting_set_greedy(&fam(&[&[1, 2], &[1, 3], &[2, 3]]), &none).unwrap(),
            BTreeSet::from([1, 2])
        );
        assert_eq!(
            min_hitting_set_greedy(&fam(&[&[5]]), &BTreeSet::from([5])),
            Err(HittingSetError::InfeasibleSet(0))
        );
    }

    #[test]
    fn lexicographic_tie_break() {
        // minima: {1,2}, {1,3}, {2,4}, {3,4}
        let sets = fam(&[&[1, 4], &[2, 3]]);
        assert_eq!(min_hitting_set_exact(&sets, &BTreeSet::new()).unwrap(), BTreeSet::from([1, 2]));
    }

    fn arb_family() -> impl Strategy<Value = (Vec<BTreeSet<u8>>, BTreeSet<u8>)> {
        (
            proptest::collection::vec(proptest::collection::btree_set(0u8..12, 1..5), 0..8),
            proptest::collection::btree_set(0u8..12, 0..3),
        )
    }

    proptest! {
        #[test]
        fn exact_matches_brute_force((sets, forbidden) in arb_family()) {
            match (min_hitting_set_exact(&sets, &forbidden), brute_force(&sets, &forbidden)) {
                (Ok(found), Some(expected)) => prop_assert_eq!(found, expected),
                (Err(HittingSetError::InfeasibleSet(i)), None) => {
                    prop_assert!(sets[i].is_subset(&forbidden));
                }
                (found, expected) => prop_assert!(false, "{:?} vs {:?}", found, expected),
            }
        }

        #[test]
        fn greedy_is_feasible_and_no_smaller((sets, forbidden) in arb_family()) {
            if let Ok(greedy) = min_hitting_set_greedy(&sets, &forbidden) {
                let exact = min_hitting_set_exact(&sets, &forbidden).unwrap();
                prop_assert!(hits_all(&greedy, &sets));
                prop_assert!(greedy.is_disjoint(&forbidden));
                prop_assert!(greedy.len() >= exact.len());
            } else {
                prop_assert!(min_hitting_set_exact(&sets, &forbidden).is_err());
            }
        }
    }
}
