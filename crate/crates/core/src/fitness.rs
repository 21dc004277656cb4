//! The evaluation interface the optimizer sees.
//!
//! The optimizer only ever calls [`Fitness::evaluate`]; it has no access to the true
//! optimum of the landscape behind it.

/// A maximization objective with an evaluation side effect (counting, metering, ...).
pub trait Fitness {
    fn dimensions(&self) -> usize;

    fn evaluate(&mut self, x: &[f64]) -> f64;

    /// True once the environment has changed and the optimizer has not yet been told.
    /// A step stops moving particles when it sees this.
    fn change_pending(&self) -> bool {
        false
    }
}

impl<F: Fitness + ?Sized> Fitness for &mut F {
    fn dimensions(&self) -> usize {
        (**self).dimensions()
    }

    fn evaluate(&mut self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }

    fn change_pending(&self) -> bool {
        (**self).change_pending()
    }
}

/// An evaluation that may be refused once a budget is spent.
pub trait Probe {
    fn probe(&mut self, x: &[f64]) -> Option<f64>;
}

/// Wraps a [`Fitness`] and refuses evaluations beyond a fixed count.
pub struct Budgeted<'a, F: ?Sized> {
    inner: &'a mut F,
    remaining: usize,
    used: usize,
}

impl<'a, F: Fitness + ?Sized> Budgeted<'a, F> {
    pub fn new(inner: &'a mut F, budget: usize) -> Self {
        Budgeted {
            inner,
            remaining: budget,
            used: 0,
        }
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }
}

impl<F: Fitness + ?Sized> Probe for Budgeted<'_, F> {
    fn probe(&mut self, x: &[f64]) -> Option<f64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        self.used += 1;
        Some(self.inner.evaluate(x))
    }
}

/// Unlimited probing.
pub struct Unbounded<'a, F: ?Sized>(pub &'a mut F);

impl<F: Fitness + ?Sized> Probe for Unbounded<'_, F> {
    fn probe(&mut self, x: &[f64]) -> Option<f64> {
        Some(self.0.evaluate(x))
    }
}
