//! Fixed-width bitsets for arm and group subsets.
//!
//! Arm subsets use [`BitSet64`]; group subsets use [`BitSet128`] so that
//! families such as all 4-subsets of 8 arms (70 groups) fit.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! bitset {
    ($name:ident, $iter:ident, $word:ty, $width:expr) => {
        #[doc = concat!("A subset of `{0, .., ", stringify!($width), " - 1}` stored in one `", stringify!($word), "`.")]
        #[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub $word);

        impl $name {
            pub const EMPTY: $name = $name(0);
            pub const WIDTH: usize = $width;

            /// The set `{0, .., n-1}`.
            pub fn full(n: usize) -> Self {
                assert!(n <= $width);
                if n == $width {
                    $name(<$word>::MAX)
                } else {
                    $name(((1 as $word) << n) - 1)
                }
            }

            pub fn singleton(i: usize) -> Self {
                assert!(i < $width, "index {i} out of range for {}", stringify!($name));
                $name((1 as $word) << i)
            }

            pub fn from_indices<I: IntoIterator<Item = usize>>(iter: I) -> Self {
                let mut bits: $word = 0;
                for i in iter {
                    assert!(i < $width, "index {i} out of range for {}", stringify!($name));
                    bits |= (1 as $word) << i;
                }
                $name(bits)
            }

            #[inline]
            pub fn bits(self) -> $word {
                self.0
            }

            #[inline]
            pub fn len(self) -> usize {
                self.0.count_ones() as usize
            }

            #[inline]
            pub fn is_empty(self) -> bool {
                self.0 == 0
            }

            #[inline]
            pub fn contains(self, i: usize) -> bool {
                i < $width && (self.0 >> i) & 1 == 1
            }

            #[inline]
            pub fn insert(&mut self, i: usize) {
                self.0 |= (1 as $word) << i;
            }

            #[inline]
            pub fn remove(&mut self, i: usize) {
                self.0 &= !((1 as $word) << i);
            }

            #[inline]
            pub fn union(self, other: Self) -> Self {
                $name(self.0 | other.0)
            }

            #[inline]
            pub fn intersection(self, other: Self) -> Self {
                $name(self.0 & other.0)
            }

            #[inline]
            pub fn difference(self, other: Self) -> Self {
                $name(self.0 & !other.0)
            }

            #[inline]
            pub fn is_subset(self, other: Self) -> bool {
                self.0 & !other.0 == 0
            }

            #[inline]
            pub fn intersects(self, other: Self) -> bool {
                self.0 & other.0 != 0
            }

            /// Lowest element, if any.
            #[inline]
            pub fn first(self) -> Option<usize> {
                (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
            }

            /// Elements in ascending order.
            pub fn iter(self) -> $iter {
                $iter(self.0)
            }

            pub fn to_vec(self) -> Vec<usize> {
                self.iter().collect()
            }

            /// Every nonempty subset, in increasing order of the bit pattern.
            pub fn nonempty_subsets(self) -> impl Iterator<Item = $name> {
                // Submask walk: s <- (s - u) & u.
                let u = self.0;
                let mut cur: $word = 0;
                let mut done = u == 0;
                std::iter::from_fn(move || {
                    if done {
                        return None;
                    }
                    cur = cur.wrapping_sub(u) & u;
                    if cur == 0 {
                        done = true;
                        return None;
                    }
                    Some($name(cur))
                })
            }
        }

        pub struct $iter($word);

        impl Iterator for $iter {
            type Item = usize;

            #[inline]
            fn next(&mut self) -> Option<usize> {
                if self.0 == 0 {
                    return None;
                }
                let i = self.0.trailing_zeros() as usize;
                self.0 &= self.0 - 1;
                Some(i)
            }

            fn size_hint(&self) -> (usize, Option<usize>) {
                let n = self.0.count_ones() as usize;
                (n, Some(n))
            }
        }

        impl ExactSizeIterator for $iter {}

        impl IntoIterator for $name {
            type Item = usize;
            type IntoIter = $iter;

            fn into_iter(self) -> $iter {
                self.iter()
            }
        }

        impl FromIterator<usize> for $name {
            fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
                $name::from_indices(iter)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_set().entries(self.iter()).finish()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{{")?;
                for (k, i) in self.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{i}")?;
                }
                write!(f, "}}")
            }
        }
    };
}

bitset!(BitSet64, Iter64, u64, 64);
bitset!(BitSet128, Iter128, u128, 128);

/// Arm subsets.
pub type ArmSet = BitSet64;
/// Group subsets.
pub type GroupSet = BitSet128;

/// Iterates every nonempty subset of `universe` (ascending by bit pattern).
pub fn nonempty_subsets(universe: BitSet64) -> impl Iterator<Item = BitSet64> {
    universe.nonempty_subsets()
}
