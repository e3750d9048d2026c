//! Quantities defined by a minimum over all arm subsets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::{ArmSet, BitSet64};
use crate::error::{Error, Result};
use crate::structure::GroupStructure;

use super::setcover::{h1, h2_minus, h2_plus, min_trapping_cover};

/// Subset enumeration above this many arms needs an explicit override.
pub const ENUMERATION_CAP: usize = 24;
/// Hard limit even with the override (the cover table has `2^|A|` entries).
pub const ENUMERATION_HARD_CAP: usize = 32;

fn check_cap(structure: &GroupStructure, force: bool) -> Result<()> {
    let n = structure.num_arms();
    if n > ENUMERATION_HARD_CAP || (n > ENUMERATION_CAP && !force) {
        let cap = if force { ENUMERATION_HARD_CAP } else { ENUMERATION_CAP };
        return Err(Error::EnumerationCap { arms: n, cap });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Minus,
    Plus,
}

/// All sharing quantities of one subset at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingProfile {
    pub subset: ArmSet,
    pub horizon: u64,
    pub h1: f64,
    pub h2_minus: f64,
    pub h2_plus: f64,
    pub ht_minus: f64,
    pub ht_plus: f64,
}

fn ht(h1: f64, h2: f64, horizon: u64) -> f64 {
    h1 + h2.powf(1.5) * (horizon as f64).sqrt()
}

pub fn sharing_profile(structure: &GroupStructure, s: ArmSet, horizon: u64) -> Result<SharingProfile> {
    let (a, m, p) = (h1(structure, s)?, h2_minus(structure, s)?, h2_plus(structure, s)?);
    Ok(SharingProfile {
        subset: s,
        horizon,
        h1: a,
        h2_minus: m,
        h2_plus: p,
        ht_minus: ht(a, m, horizon),
        ht_plus: ht(a, p, horizon),
    })
}

/// `(H_T-(S), H_T+(S))`.
pub fn ht_bounds(structure: &GroupStructure, s: ArmSet, horizon: u64) -> Result<(f64, f64)> {
    let p = sharing_profile(structure, s, horizon)?;
    Ok((p.ht_minus, p.ht_plus))
}

/// Per-subset touching counts and minimum cover sizes for every nonempty
/// subset of the arms, indexed by the subset's bit pattern.
pub struct SubsetTable {
    num_arms: usize,
    touching: Vec<u8>,
    cover: Vec<u8>,
}

impl SubsetTable {
    pub fn new(structure: &GroupStructure, force: bool) -> Result<Self> {
        check_cap(structure, force)?;
        let n = structure.num_arms();
        let size = 1usize << n;
        // cover[S] = 1 + min over groups h holding the lowest arm of S of
        // cover[S \ A_h]; S \ A_h < S, so increasing order works.
        let mut cover = vec![0u8; size];
        let mut touching = vec![0u8; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            let mut best = u8::MAX;
            for g in structure.groups_of(low).iter() {
                let rest = mask & !(structure.arm_set(g).bits() as usize);
                best = best.min(1 + cover[rest]);
            }
            cover[mask] = best;
            touching[mask] = structure.touching(BitSet64(mask as u64)).len() as u8;
        }
        Ok(SubsetTable {
            num_arms: n,
            touching,
            cover,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn touching(&self, s: ArmSet) -> usize {
        self.touching[s.bits() as usize] as usize
    }

    pub fn cover_size(&self, s: ArmSet) -> usize {
        self.cover[s.bits() as usize] as usize
    }

    pub fn h1(&self, s: ArmSet) -> f64 {
        self.touching(s) as f64 / s.len() as f64
    }

    pub fn h2_minus(&self, s: ArmSet) -> f64 {
        self.cover_size(s) as f64 / s.len() as f64
    }

    /// Smallest `f(S)` over nonempty subsets, ties to the lowest bit
    /// pattern. `f` returns `None` to skip a subset it can show is not
    /// better than `best`.
    pub fn minimize<F>(&self, f: F) -> (f64, ArmSet)
    where
        F: Fn(ArmSet, f64) -> Option<f64> + Sync,
    {
        let size = 1u64 << self.num_arms;
        let chunk = 1u64 << 12;
        let chunks = size.div_ceil(chunk);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut best = (f64::INFINITY, ArmSet::EMPTY);
                for mask in (c * chunk).max(1)..((c + 1) * chunk).min(size) {
                    let s = BitSet64(mask);
                    if let Some(v) = f(s, best.0) {
                        if v < best.0 {
                            best = (v, s);
                        }
                    }
                }
                best
            })
            .reduce(
                || (f64::INFINITY, ArmSet::EMPTY),
                |x, y| if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1 && !y.1.is_empty()) { y } else { x },
            )
    }
}

/// `min over nonempty S of H_T±(S)`, with a minimising subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarHt {
    pub value: f64,
    pub subset: ArmSet,
}

pub fn bar_ht(structure: &GroupStructure, horizon: u64, sign: Sign, force: bool) -> Result<BarHt> {
    let table = SubsetTable::new(structure, force)?;
    Ok(bar_ht_with(structure, &table, horizon, sign))
}

pub fn bar_ht_with(structure: &GroupStructure, table: &SubsetTable, horizon: u64, sign: Sign) -> BarHt {
    let (value, subset) = table.minimize(|s, best| {
        // H2+ >= H2-, so the minus value bounds the plus value from below.
        let lower = ht(table.h1(s), table.h2_minus(s), horizon);
        match sign {
            Sign::Minus => Some(lower),
            Sign::Plus if lower > best => None,
            Sign::Plus => {
                let trapped = min_trapping_cover(structure, s).trapped;
                Some(ht(table.h1(s), trapped as f64 / s.len() as f64, horizon))
            }
        }
    });
    BarHt { value, subset }
}

/// `phi(eps) = 1/2 min_S { H1(S) + (1/eps - 1) H2-(S) }`.
pub fn phi(structure: &GroupStructure, eps: f64, force: bool) -> Result<f64> {
    let table = SubsetTable::new(structure, force)?;
    phi_with(&table, eps)
}

pub fn phi_with(table: &SubsetTable, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1], got {eps}")));
    }
    let w = 1.0 / eps - 1.0;
    Ok(0.5 * table.minimize(|s, _| Some(table.h1(s) + w * table.h2_minus(s))).0)
}

/// `min over nonempty S of H1(S)`, with a minimiser.
pub fn min_h1(structure: &GroupStructure, force: bool) -> Result<(f64, ArmSet)> {
    let table = SubsetTable::new(structure, force)?;
    Ok(table.minimize(|s, _| Some(table.h1(s))))
}

/// Whether `min_S H1(S) >= alpha sqrt(T) / max_g |A_g|^{3/2}`.
pub fn sufficient_improvement(structure: &GroupStructure, horizon: u64, alpha: f64, force: bool) -> Result<bool> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be at least 1, got {alpha}")));
    }
    let (m, _) = min_h1(structure, force)?;
    let threshold = alpha * (horizon as f64).sqrt() / (structure.max_group_size() as f64).powf(1.5);
    Ok(m >= threshold)
}
