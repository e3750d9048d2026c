//! The set system `{A_g : g in G}` of feasible arms per group.

use rand::Rng;

use crate::bitset::{BitSet64, GroupSet};
use crate::error::{Error, Result};

/// Arms fit a [`BitSet64`]; groups fit a [`GroupSet`] (128 bits).
pub const MAX_ARMS: usize = 64;
pub const MAX_GROUPS: usize = 128;

/// Groups and their feasible arm subsets.
///
/// Invariants checked at construction: at least one group, at most 64 arms
/// and 128 groups, every group has at least two arms, and every arm belongs
/// to some group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupStructure {
    num_arms: usize,
    arm_sets: Vec<BitSet64>,
    // groups_of[a] = {g : a in A_g}
    groups_of: Vec<GroupSet>,
}

impl GroupStructure {
    pub fn new(num_arms: usize, arm_sets: Vec<BitSet64>) -> Result<Self> {
        if arm_sets.is_empty() {
            return Err(Error::InvalidStructure("at least one group is required".into()));
        }
        if num_arms == 0 || num_arms > MAX_ARMS {
            return Err(Error::InvalidStructure(format!(
                "number of arms must be in 1..={MAX_ARMS}, got {num_arms}"
            )));
        }
        if arm_sets.len() > MAX_GROUPS {
            return Err(Error::InvalidStructure(format!(
                "number of groups must be at most {MAX_GROUPS}, got {}",
                arm_sets.len()
            )));
        }
        let all = BitSet64::full(num_arms);
        let mut union = BitSet64::EMPTY;
        for (g, set) in arm_sets.iter().enumerate() {
            if !set.is_subset(all) {
                return Err(Error::InvalidStructure(format!(
                    "group {g} references an arm outside 0..{num_arms}"
                )));
            }
            if set.len() < 2 {
                return Err(Error::InvalidStructure(format!(
                    "group {g} has {} feasible arm(s); at least two are required",
                    set.len()
                )));
            }
            union = union.union(*set);
        }
        if union != all {
            let missing = all.difference(union);
            return Err(Error::InvalidStructure(format!(
                "arms {missing} belong to no group"
            )));
        }
        let mut groups_of = vec![GroupSet::EMPTY; num_arms];
        for (g, set) in arm_sets.iter().enumerate() {
            for a in set.iter() {
                groups_of[a].insert(g);
            }
        }
        Ok(GroupStructure {
            num_arms,
            arm_sets,
            groups_of,
        })
    }

    /// Convenience constructor from index lists.
    pub fn from_lists(num_arms: usize, lists: &[Vec<usize>]) -> Result<Self> {
        if num_arms > MAX_ARMS {
            return Err(Error::InvalidStructure(format!(
                "number of arms must be in 1..={MAX_ARMS}, got {num_arms}"
            )));
        }
        let mut sets = Vec::with_capacity(lists.len());
        for (g, list) in lists.iter().enumerate() {
            if let Some(&bad) = list.iter().find(|&&a| a >= num_arms) {
                return Err(Error::InvalidStructure(format!(
                    "group {g} references arm {bad} outside 0..{num_arms}"
                )));
            }
            sets.push(BitSet64::from_indices(list.iter().copied()));
        }
        Self::new(num_arms, sets)
    }

    /// `num_groups` groups all sharing every one of `num_arms` arms.
    pub fn all_shared(num_groups: usize, num_arms: usize) -> Result<Self> {
        Self::new(num_arms, vec![BitSet64::full(num_arms); num_groups])
    }

    /// Pairwise disjoint groups with the given sizes, arms numbered consecutively.
    pub fn disjoint(sizes: &[usize]) -> Result<Self> {
        let mut next = 0;
        let mut sets = Vec::with_capacity(sizes.len());
        for &s in sizes {
            sets.push(BitSet64::from_indices(next..next + s));
            next += s;
        }
        Self::new(next, sets)
    }

    /// Every `k`-subset of `num_arms` arms is a group.
    pub fn k_subsets(num_arms: usize, k: usize) -> Result<Self> {
        if k > num_arms {
            return Err(Error::InvalidStructure(format!("k = {k} exceeds {num_arms} arms")));
        }
        let sets: Vec<BitSet64> = crate::bitset::nonempty_subsets(BitSet64::full(num_arms))
            .filter(|s| s.len() == k)
            .collect();
        Self::new(num_arms, sets)
    }

    #[inline]
    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    #[inline]
    pub fn num_groups(&self) -> usize {
        self.arm_sets.len()
    }

    #[inline]
    pub fn arm_set(&self, g: usize) -> BitSet64 {
        self.arm_sets[g]
    }

    pub fn arm_sets(&self) -> &[BitSet64] {
        &self.arm_sets
    }

    /// Groups whose feasible set contains arm `a`.
    #[inline]
    pub fn groups_of(&self, a: usize) -> GroupSet {
        self.groups_of[a]
    }

    pub fn all_arms(&self) -> BitSet64 {
        BitSet64::full(self.num_arms)
    }

    pub fn all_groups(&self) -> GroupSet {
        GroupSet::full(self.num_groups())
    }

    /// `Cov(G')`: arms feasible for at least one group of `groups`.
    pub fn cover(&self, groups: GroupSet) -> BitSet64 {
        groups
            .iter()
            .fold(BitSet64::EMPTY, |acc, g| acc.union(self.arm_sets[g]))
    }

    /// Groups having at least one arm in `arms`.
    pub fn touching(&self, arms: BitSet64) -> GroupSet {
        arms.iter()
            .fold(GroupSet::EMPTY, |acc, a| acc.union(self.groups_of[a]))
    }

    pub fn max_group_size(&self) -> usize {
        self.arm_sets.iter().map(|s| s.len()).max().unwrap_or(0)
    }
}

/// Draws a random valid structure with `1..=max_groups` groups over
/// `2..=max_arms` arms. Used by the property and oracle suites.
pub fn random_structure<R: Rng + ?Sized>(
    rng: &mut R,
    max_groups: usize,
    max_arms: usize,
) -> GroupStructure {
    assert!(max_groups >= 1 && (2..=MAX_ARMS).contains(&max_arms));
    let num_arms = rng.gen_range(2..=max_arms);
    let num_groups = rng.gen_range(1..=max_groups.min(MAX_GROUPS));
    let density = rng.gen_range(0.15..0.8);
    let mut sets: Vec<BitSet64> = (0..num_groups)
        .map(|_| {
            let mut s = BitSet64::EMPTY;
            for a in 0..num_arms {
                if rng.gen_bool(density) {
                    s.insert(a);
                }
            }
            while s.len() < 2 {
                s.insert(rng.gen_range(0..num_arms));
            }
            s
        })
        .collect();
    // Hand uncovered arms to random groups.
    let union = sets.iter().fold(BitSet64::EMPTY, |acc, s| acc.union(*s));
    for a in BitSet64::full(num_arms).difference(union).iter() {
        let g = rng.gen_range(0..num_groups);
        sets[g].insert(a);
    }
    GroupStructure::new(num_arms, sets).expect("random structure is valid by construction")
}
