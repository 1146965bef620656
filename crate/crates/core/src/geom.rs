use serde::{Deserialize, Serialize};

use crate::Vec3;

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    /// The `[-0.5, 0.5]^3` cube all shapes are normalized into.
    pub fn unit_cube() -> Self {
        Self::new(Vec3::repeat(-0.5), Vec3::repeat(0.5))
    }

    pub fn empty() -> Self {
        Self::new(Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY))
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        points.into_iter().fold(Self::empty(), |b, p| b.grow(p))
    }

    pub fn cube(center: Vec3, half: f64) -> Self {
        Self::new(center - Vec3::repeat(half), center + Vec3::repeat(half))
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|a| self.min[a].is_nan() || self.max[a].is_nan() || self.min[a] > self.max[a])
    }

    pub fn grow(&self, p: &Vec3) -> Self {
        Self::new(self.min.inf(p), self.max.sup(p))
    }

    pub fn union(&self, other: &Aabb) -> Self {
        Self::new(self.min.inf(&other.min), self.max.sup(&other.max))
    }

    pub fn intersection(&self, other: &Aabb) -> Self {
        Self::new(self.min.sup(&other.min), self.max.inf(&other.max))
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            let e = self.extent();
            e.x * e.y * e.z
        }
    }

    /// Squared distance from `p` to the box, zero inside.
    pub fn dist_sq(&self, p: &Vec3) -> f64 {
        let mut d = 0.0;
        for a in 0..3 {
            let v = if p[a] < self.min[a] {
                self.min[a] - p[a]
            } else if p[a] > self.max[a] {
                p[a] - self.max[a]
            } else {
                0.0
            };
            d += v * v;
        }
        d
    }
}
