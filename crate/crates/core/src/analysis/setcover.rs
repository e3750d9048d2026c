//! `H1`, `H2-` and `H2+` for one arm subset.

use std::collections::{HashMap, HashSet};

use crate::bitset::{ArmSet, GroupSet};
use crate::error::{Error, Result};
use crate::structure::GroupStructure;

fn nonempty(s: ArmSet) -> Result<()> {
    if s.is_empty() {
        Err(Error::InvalidArgument("arm subset must be nonempty".into()))
    } else {
        Ok(())
    }
}

/// `|{g : A_g ∩ S ≠ ∅}| / |S|`.
pub fn h1(structure: &GroupStructure, s: ArmSet) -> Result<f64> {
    nonempty(s)?;
    Ok(structure.touching(s).len() as f64 / s.len() as f64)
}

/// A smallest family of groups covering a subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cover {
    pub size: usize,
    pub groups: GroupSet,
}

/// Exact minimum set cover of `s` by the groups' arm sets.
///
/// Each group is reduced to `A_g ∩ S`; empty and dominated traces are
/// dropped. The search branches on the uncovered arm with the fewest
/// covering traces and memoises on the uncovered set.
pub fn min_cover(structure: &GroupStructure, s: ArmSet) -> Cover {
    let mut traces: Vec<(ArmSet, usize)> = Vec::new();
    for g in 0..structure.num_groups() {
        let t = structure.arm_set(g).intersection(s);
        if !t.is_empty() {
            traces.push((t, g));
        }
    }
    // Drop a trace contained in another (for equal traces keep the lowest group).
    let kept: Vec<(ArmSet, usize)> = traces
        .iter()
        .enumerate()
        .filter(|&(i, &(t, _))| {
            !traces
                .iter()
                .enumerate()
                .any(|(j, &(u, _))| j != i && t.is_subset(u) && (t != u || j < i))
        })
        .map(|(_, &x)| x)
        .collect();
    let mut memo = HashMap::new();
    let size = cover_size(s, &kept, &mut memo);
    // Walk the memo back to a witness.
    let mut groups = GroupSet::EMPTY;
    let mut rest = s;
    while !rest.is_empty() {
        let a = branch_arm(rest, &kept);
        let need = cover_size(rest, &kept, &mut memo);
        let &(t, g) = kept
            .iter()
            .find(|(t, _)| t.contains(a) && 1 + cover_size(rest.difference(*t), &kept, &mut memo) == need)
            .expect("memoised optimum has a witness");
        groups.insert(g);
        rest = rest.difference(t);
    }
    Cover { size, groups }
}

fn branch_arm(rest: ArmSet, traces: &[(ArmSet, usize)]) -> usize {
    rest.iter()
        .min_by_key(|&a| traces.iter().filter(|(t, _)| t.contains(a)).count())
        .expect("nonempty")
}

fn cover_size(rest: ArmSet, traces: &[(ArmSet, usize)], memo: &mut HashMap<ArmSet, usize>) -> usize {
    if rest.is_empty() {
        return 0;
    }
    if let Some(&v) = memo.get(&rest) {
        return v;
    }
    let a = branch_arm(rest, traces);
    let mut best = usize::MAX;
    for &(t, _) in traces.iter().filter(|(t, _)| t.contains(a)) {
        best = best.min(1 + cover_size(rest.difference(t), traces, memo));
    }
    memo.insert(rest, best);
    best
}

/// `(min |G'| with S ⊆ Cov(G')) / |S|`.
pub fn h2_minus(structure: &GroupStructure, s: ArmSet) -> Result<f64> {
    nonempty(s)?;
    Ok(min_cover(structure, s).size as f64 / s.len() as f64)
}

/// A cover minimising the number of `S`-touching groups trapped inside its span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrappingCover {
    /// `|{g : A_g ∩ S ≠ ∅, A_g ⊆ Cov(G')}|`.
    pub trapped: usize,
    pub groups: GroupSet,
    pub span: ArmSet,
}

/// Exact minimiser for `H2+`.
///
/// The objective depends on a cover only through its span, and only grows
/// as the span grows, so a depth-first search that adds one group covering
/// the lowest uncovered arm at a time, skips spans already seen and prunes
/// on the current span's count is exact.
pub fn min_trapping_cover(structure: &GroupStructure, s: ArmSet) -> TrappingCover {
    let touching: Vec<usize> = structure.touching(s).iter().collect();
    let trapped = |span: ArmSet| touching.iter().filter(|&&g| structure.arm_set(g).is_subset(span)).count();
    let mut best = TrappingCover {
        trapped: usize::MAX,
        groups: GroupSet::EMPTY,
        span: ArmSet::EMPTY,
    };
    let mut seen = HashSet::new();
    let mut stack = vec![(ArmSet::EMPTY, GroupSet::EMPTY)];
    while let Some((span, groups)) = stack.pop() {
        if !seen.insert(span) {
            continue;
        }
        let count = trapped(span);
        if count >= best.trapped {
            continue;
        }
        let Some(a) = s.difference(span).first() else {
            best = TrappingCover {
                trapped: count,
                groups,
                span,
            };
            continue;
        };
        // Push in reverse so lower groups are explored first.
        for g in structure.groups_of(a).to_vec().into_iter().rev() {
            let mut next = groups;
            next.insert(g);
            stack.push((span.union(structure.arm_set(g)), next));
        }
    }
    best
}

/// `H2+(S)`.
pub fn h2_plus(structure: &GroupStructure, s: ArmSet) -> Result<f64> {
    nonempty(s)?;
    Ok(min_trapping_cover(structure, s).trapped as f64 / s.len() as f64)
}
