use num_traits::Zero;

use crate::coeff::Backend;
use crate::number::{Bound, Exponent, ExtReal, DEFAULT_ORDER};

/// Evaluation settings shared by one computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Context {
    /// Order bound given to freshly constructed values.
    pub order: Exponent,
    pub backend: Backend,
}

impl Default for Context {
    fn default() -> Self {
        Context { order: Exponent::from_integer(DEFAULT_ORDER), backend: Backend::Exact }
    }
}

impl Context {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn decimal() -> Self {
        Context { backend: Backend::decimal(), ..Self::default() }
    }

    pub fn with_order(mut self, order: Exponent) -> Self {
        assert!(order > Exponent::zero(), "order bound must be positive");
        self.order = order;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn bound(&self) -> Bound {
        Bound::At(self.order)
    }

    /// Whether two standard parts agree: exactly in exact mode, within
    /// `10^-(digits/2)` in decimal mode.
    pub fn agree(&self, a: &ExtReal, b: &ExtReal) -> bool {
        match self.backend {
            Backend::Exact => a.same(b),
            Backend::Decimal { digits } => a.within(b, 10f64.powi(-((digits / 2) as i32))),
        }
    }
}
