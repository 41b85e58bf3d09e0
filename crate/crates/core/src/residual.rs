//! Residual reports for identities checked to finite precision.

use alloc::vec::Vec;

use crate::cinf::{Cinf, EXACT};
use crate::tower::Tower;

/// Zero orders (grid units) of the coefficients of an expression that should vanish.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Residuals {
    pub orders: Vec<i64>,
}

impl Residuals {
    pub fn new(orders: Vec<i64>) -> Self {
        Residuals { orders }
    }

    pub fn of<'a>(values: impl IntoIterator<Item = &'a Cinf>) -> Self {
        Residuals {
            orders: values.into_iter().map(|c| c.zero_order()).collect(),
        }
    }

    pub fn single(value: &Cinf) -> Self {
        Residuals {
            orders: alloc::vec![value.zero_order()],
        }
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Smallest zero order; `EXACT` when nothing was checked.
    pub fn min(&self) -> i64 {
        self.orders.iter().copied().min().unwrap_or(EXACT)
    }

    pub fn holds_to(&self, order: i64) -> bool {
        self.min() >= order
    }

    pub fn merge(mut self, other: Residuals) -> Self {
        self.orders.extend(other.orders);
        self
    }
}

/// Zero order an identity must reach to count as verified: `0.8 N`.
pub fn required_order(tower: &Tower) -> i64 {
    tower.n() * 4 / 5
}
