//! First-order forward-mode values in the network's scalar time input.

use std::ops::{Add, Mul, Neg, Sub};

/// Scalar operations shared by `f64` and tape variables, so that the same
/// network code can be evaluated plainly or recorded for reverse mode.
pub trait Real: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    /// A constant living in the same context as `self`.
    fn lift(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn scale(self, k: f64) -> Self;
}

impl Real for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// A value together with its derivative with respect to the scalar network
/// input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeJet<T = f64> {
    pub value: T,
    pub d_dt: T,
}

impl<T: Real> TimeJet<T> {
    pub fn new(value: T, d_dt: T) -> Self {
        Self { value, d_dt }
    }

    pub fn constant(value: T) -> Self {
        Self { value, d_dt: value.lift(0.0) }
    }

    /// The independent variable itself: derivative one.
    pub fn variable(value: T) -> Self {
        Self { value, d_dt: value.lift(1.0) }
    }

    pub fn sin(self) -> Self {
        Self::new(self.value.sin(), self.value.cos() * self.d_dt)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.value.scale(k), self.d_dt.scale(k))
    }
}

impl<T: Real> Add for TimeJet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.value + o.value, self.d_dt + o.d_dt)
    }
}

impl<T: Real> Sub for TimeJet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.value - o.value, self.d_dt - o.d_dt)
    }
}

impl<T: Real> Mul for TimeJet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.value * o.value, self.value * o.d_dt + self.d_dt * o.value)
    }
}

/// Jet times a quantity that does not depend on the input (a weight).
impl<T: Real> Mul<T> for TimeJet<T> {
    type Output = Self;
    fn mul(self, w: T) -> Self {
        Self::new(self.value * w, self.d_dt * w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_chain_rules() {
        let t = TimeJet::variable(0.7);
        let f = t * t; // t²
        assert!((f.value - 0.49).abs() < 1e-14);
        assert!((f.d_dt - 1.4).abs() < 1e-14);

        let g = t.scale(3.0).sin(); // sin(3t)
        assert!((g.value - (2.1f64).sin()).abs() < 1e-14);
        assert!((g.d_dt - 3.0 * (2.1f64).cos()).abs() < 1e-14);

        let c = TimeJet::constant(5.0);
        assert_eq!((c * t).d_dt, 5.0);
        assert_eq!((c - t).d_dt, -1.0);
    }
}
