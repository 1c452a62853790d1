//! Uniform 1-D grids and their quadrature weights.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    /// Points `a + k h`, `k < N`, with `h = (b - a) / N`; `b` is identified with `a`.
    Periodic,
    /// Points `a + k h`, `k < N`, with `h = (b - a) / (N - 1)`; both ends included.
    Bounded,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid spacing must be positive (a = {a}, b = {b}, N = {n})")]
    NonPositiveSpacing { a: f64, b: f64, n: usize },
    #[error("grid with {n} points is too coarse for a stencil of order {order} (need at least {required})")]
    TooCoarse {
        n: usize,
        order: usize,
        required: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    bc: BoundaryKind,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize, bc: BoundaryKind) -> Result<Self, GridError> {
        let intervals = match bc {
            BoundaryKind::Periodic => n,
            BoundaryKind::Bounded => n.saturating_sub(1),
        };
        if b <= a || intervals == 0 || !a.is_finite() || !b.is_finite() {
            return Err(GridError::NonPositiveSpacing { a, b, n });
        }
        Ok(Grid { a, b, n, bc })
    }

    pub fn bounded(a: f64, b: f64, n: usize) -> Result<Self, GridError> {
        Self::new(a, b, n, BoundaryKind::Bounded)
    }

    pub fn periodic(a: f64, b: f64, n: usize) -> Result<Self, GridError> {
        Self::new(a, b, n, BoundaryKind::Periodic)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.bc
    }

    pub fn h(&self) -> f64 {
        match self.bc {
            BoundaryKind::Periodic => (self.b - self.a) / self.n as f64,
            BoundaryKind::Bounded => (self.b - self.a) / (self.n - 1) as f64,
        }
    }

    pub fn z(&self, k: usize) -> f64 {
        self.a + k as f64 * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.z(k)).collect()
    }

    /// Trapezoidal weights (bounded) or rectangle weights (periodic).
    pub fn weights(&self) -> Vec<f64> {
        let h = self.h();
        let mut w = vec![h; self.n];
        if self.bc == BoundaryKind::Bounded {
            w[0] = 0.5 * h;
            w[self.n - 1] = 0.5 * h;
        }
        w
    }

    pub fn integrate(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.n);
        let h = self.h();
        let inner: f64 = samples.iter().sum();
        match self.bc {
            BoundaryKind::Periodic => h * inner,
            BoundaryKind::Bounded => h * (inner - 0.5 * (samples[0] + samples[self.n - 1])),
        }
    }

    /// Minimum number of points for a derivative stencil of the given order.
    pub fn required_points(order: usize) -> usize {
        4 * order.max(1)
    }

    pub fn check_order(&self, order: usize) -> Result<(), GridError> {
        let required = Self::required_points(order);
        if self.n < required {
            return Err(GridError::TooCoarse {
                n: self.n,
                order,
                required,
            });
        }
        Ok(())
    }
}
