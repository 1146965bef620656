use crate::geom::Aabb;
use crate::oracle::{Primitive, Sdf};
use crate::Vec3;

/// Boolean combination of primitives by min/max. The result bounds the true
/// distance and is exact away from blend regions.
#[derive(Clone, Debug, PartialEq)]
pub enum CsgNode {
    Leaf(Primitive),
    Union(Box<CsgNode>, Box<CsgNode>),
    Intersection(Box<CsgNode>, Box<CsgNode>),
    Difference(Box<CsgNode>, Box<CsgNode>),
}

impl CsgNode {
    pub fn union(a: impl Into<CsgNode>, b: impl Into<CsgNode>) -> Self {
        CsgNode::Union(Box::new(a.into()), Box::new(b.into()))
    }

    pub fn intersection(a: impl Into<CsgNode>, b: impl Into<CsgNode>) -> Self {
        CsgNode::Intersection(Box::new(a.into()), Box::new(b.into()))
    }

    pub fn difference(a: impl Into<CsgNode>, b: impl Into<CsgNode>) -> Self {
        CsgNode::Difference(Box::new(a.into()), Box::new(b.into()))
    }

    pub fn depth(&self) -> usize {
        match self {
            CsgNode::Leaf(_) => 1,
            CsgNode::Union(a, b) | CsgNode::Intersection(a, b) | CsgNode::Difference(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }
}

impl From<Primitive> for CsgNode {
    fn from(p: Primitive) -> Self {
        CsgNode::Leaf(p)
    }
}

impl Sdf for CsgNode {
    fn distance(&self, p: &Vec3) -> f64 {
        match self {
            CsgNode::Leaf(s) => s.distance(p),
            CsgNode::Union(a, b) => a.distance(p).min(b.distance(p)),
            CsgNode::Intersection(a, b) => a.distance(p).max(b.distance(p)),
            CsgNode::Difference(a, b) => a.distance(p).max(-b.distance(p)),
        }
    }

    fn bounds(&self) -> Aabb {
        match self {
            CsgNode::Leaf(s) => s.bounds(),
            CsgNode::Union(a, b) => a.bounds().union(&b.bounds()),
            CsgNode::Intersection(a, b) => a.bounds().intersection(&b.bounds()),
            CsgNode::Difference(a, _) => a.bounds(),
        }
    }
}
