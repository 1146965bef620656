use crate::basis::{scaled_offset, MonomialBasis};
use crate::error::{Error, Result};
use crate::field::TaylorCoefficients;
use crate::geom::Aabb;
use crate::oracle::Sdf;
use crate::Vec3;

/// Analytic signed distance primitives. Construct through the checked
/// constructors so parameter invariants hold.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    Box {
        center: Vec3,
        half_extents: Vec3,
    },
    /// Ring in the xz-plane around the y axis through `center`.
    Torus {
        center: Vec3,
        major_radius: f64,
        minor_radius: f64,
    },
    Capsule {
        a: Vec3,
        b: Vec3,
        radius: f64,
    },
    /// `normal . x - offset`.
    Plane {
        normal: Vec3,
        offset: f64,
    },
    /// Global polynomial in `(x - center) / scale`, not a true distance.
    /// Used to exercise exact recovery.
    Polynomial {
        center: Vec3,
        scale: f64,
        coefficients: TaylorCoefficients,
        basis: MonomialBasis,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl Primitive {
    pub fn sphere(center: Vec3, radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(Primitive::Sphere { center, radius })
    }

    pub fn cuboid(center: Vec3, half_extents: Vec3) -> Result<Self> {
        for v in half_extents.iter() {
            positive("half extent", *v)?;
        }
        Ok(Primitive::Box { center, half_extents })
    }

    pub fn torus(center: Vec3, major_radius: f64, minor_radius: f64) -> Result<Self> {
        positive("major radius", major_radius)?;
        positive("minor radius", minor_radius)?;
        Ok(Primitive::Torus { center, major_radius, minor_radius })
    }

    pub fn capsule(a: Vec3, b: Vec3, radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(Primitive::Capsule { a, b, radius })
    }

    pub fn plane(normal: Vec3, offset: f64) -> Result<Self> {
        if (normal.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("plane normal must have unit length, got {}", normal.norm())));
        }
        Ok(Primitive::Plane { normal, offset })
    }

    pub fn polynomial(center: Vec3, scale: f64, coefficients: TaylorCoefficients) -> Result<Self> {
        positive("scale", scale)?;
        let basis = MonomialBasis::new(coefficients.order())?;
        Ok(Primitive::Polynomial { center, scale, coefficients, basis })
    }

    /// The constant polynomial `F = value`; a shape with no surface.
    pub fn constant(value: f64) -> Self {
        let coefficients = TaylorCoefficients::new(0, vec![value]).expect("order 0");
        Self::polynomial(Vec3::zeros(), 1.0, coefficients).expect("valid")
    }
}

impl Sdf for Primitive {
    fn distance(&self, p: &Vec3) -> f64 {
        match self {
            Primitive::Sphere { center, radius } => (p - center).norm() - radius,
            Primitive::Box { center, half_extents } => {
                let q = (p - center).abs() - half_extents;
                q.sup(&Vec3::zeros()).norm() + q.max().min(0.0)
            }
            Primitive::Torus { center, major_radius, minor_radius } => {
                let d = p - center;
                let ring = (d.x * d.x + d.z * d.z).sqrt() - major_radius;
                (ring * ring + d.y * d.y).sqrt() - minor_radius
            }
            Primitive::Capsule { a, b, radius } => {
                let ab = b - a;
                let len_sq = ab.norm_squared();
                let t = if len_sq > 0.0 { ((p - a).dot(&ab) / len_sq).clamp(0.0, 1.0) } else { 0.0 };
                (p - (a + ab * t)).norm() - radius
            }
            Primitive::Plane { normal, offset } => normal.dot(p) - offset,
            Primitive::Polynomial { center, scale, coefficients, basis } => {
                basis.dot_scaled(coefficients.values(), scaled_offset(p, center, *scale))
            }
        }
    }

    fn bounds(&self) -> Aabb {
        match self {
            Primitive::Sphere { center, radius } => Aabb::cube(*center, *radius),
            Primitive::Box { center, half_extents } => Aabb::new(center - half_extents, center + half_extents),
            Primitive::Torus { center, major_radius, minor_radius } => {
                let r = major_radius + minor_radius;
                let e = Vec3::new(r, *minor_radius, r);
                Aabb::new(center - e, center + e)
            }
            Primitive::Capsule { a, b, radius } => {
                let r = Vec3::repeat(*radius);
                Aabb::new(a.inf(b) - r, a.sup(b) + r)
            }
            Primitive::Plane { .. } | Primitive::Polynomial { .. } => Aabb::unit_cube(),
        }
    }
}
