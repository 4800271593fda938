use std::fmt;

/// Largest product count representable by a [`Bundle`] mask.
pub const MAX_PRODUCTS: usize = 128;

/// A set of products, stored as a bitmask over 0-based product indices.
///
/// The all-zero mask is the empty bundle (no purchase).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bundle(u128);

impl Bundle {
    pub const EMPTY: Bundle = Bundle(0);

    pub fn from_mask(mask: u128) -> Self {
        Bundle(mask)
    }

    pub fn mask(self) -> u128 {
        self.0
    }

    /// Bundle of all `n` products.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_PRODUCTS);
        if n == MAX_PRODUCTS {
            Bundle(u128::MAX)
        } else {
            Bundle((1u128 << n) - 1)
        }
    }

    pub fn singleton(j: usize) -> Self {
        assert!(j < MAX_PRODUCTS);
        Bundle(1u128 << j)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(items: I) -> Self {
        items.into_iter().fold(Bundle::EMPTY, |b, j| b.with(j))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, j: usize) -> bool {
        j < MAX_PRODUCTS && self.0 & (1u128 << j) != 0
    }

    pub fn with(self, j: usize) -> Self {
        assert!(j < MAX_PRODUCTS);
        Bundle(self.0 | (1u128 << j))
    }

    pub fn without(self, j: usize) -> Self {
        assert!(j < MAX_PRODUCTS);
        Bundle(self.0 & !(1u128 << j))
    }

    pub fn union(self, other: Bundle) -> Self {
        Bundle(self.0 | other.0)
    }

    pub fn intersection(self, other: Bundle) -> Self {
        Bundle(self.0 & other.0)
    }

    pub fn difference(self, other: Bundle) -> Self {
        Bundle(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Bundle) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: Bundle) -> bool {
        self.0 & !other.0 == 0
    }

    /// Highest member index plus one; zero for the empty bundle.
    pub fn span(self) -> usize {
        MAX_PRODUCTS - self.0.leading_zeros() as usize
    }

    /// Member indices in ascending order.
    pub fn iter(self) -> Members {
        Members(self.0)
    }

    /// Every bundle over `n` products, ordered by mask value (empty first).
    pub fn all(n: usize) -> impl Iterator<Item = Bundle> {
        assert!(n < 64, "power set enumeration is limited to n < 64");
        (0..(1u64 << n)).map(|m| Bundle(m as u128))
    }
}

pub struct Members(u128);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let j = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(j)
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, j) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{j}")?;
        }
        f.write_str("}")
    }
}
