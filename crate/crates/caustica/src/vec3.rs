//! Minimal 3-vector used for model points, tangent vectors, and the
//! homogeneous/embedded representation of geodesics.
//!
//! Planar models only use the first two components (`z` stays 0 for chart
//! points); the sphere and the Minkowski hyperboloid use all three.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct V3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl V3 {
    pub const ZERO: V3 = V3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        V3 { x, y, z }
    }

    /// Planar point/vector (z = 0).
    pub fn xy(x: f64, y: f64) -> Self {
        V3 { x, y, z: 0.0 }
    }

    pub fn dot(self, o: V3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Minkowski inner product with signature (+, +, -).
    pub fn mdot(self, o: V3) -> f64 {
        self.x * o.x + self.y * o.y - self.z * o.z
    }

    pub fn cross(self, o: V3) -> V3 {
        V3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    /// Euclidean norm of the planar part.
    pub fn norm_xy(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> V3 {
        self / self.norm()
    }

    /// z-component of the planar cross product (orientation test).
    pub fn cross_xy(self, o: V3) -> f64 {
        self.x * o.y - self.y * o.x
    }

    /// Planar rotation by `theta` about the origin (z untouched).
    pub fn rotated_xy(self, theta: f64) -> V3 {
        let (s, c) = theta.sin_cos();
        V3 {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
            z: self.z,
        }
    }
}

impl Add for V3 {
    type Output = V3;
    fn add(self, o: V3) -> V3 {
        V3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for V3 {
    type Output = V3;
    fn sub(self, o: V3) -> V3 {
        V3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for V3 {
    type Output = V3;
    fn neg(self) -> V3 {
        V3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for V3 {
    type Output = V3;
    fn mul(self, k: f64) -> V3 {
        V3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Mul<V3> for f64 {
    type Output = V3;
    fn mul(self, v: V3) -> V3 {
        v * self
    }
}

impl Div<f64> for V3 {
    type Output = V3;
    fn div(self, k: f64) -> V3 {
        V3::new(self.x / k, self.y / k, self.z / k)
    }
}
