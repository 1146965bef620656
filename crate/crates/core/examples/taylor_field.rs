//! A field assembled by hand: local polynomials blended by softmin over the
//! k nearest expansion points.
//!
//! cargo run --example taylor_field

use taylor_implicit::{softmin_weights, ExpansionPoint, FieldParams, TaylorCoefficients, TaylorField, Vec3};

fn main() -> taylor_implicit::Result<()> {
    let h = 0.04;
    // Every point carries the plane z = 0.1 written in its own local frame:
    // value c.z - 0.1 and slope h along the scaled z coordinate.
    let mut points = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            let position = Vec3::new(i as f64 * 0.2 - 0.4, j as f64 * 0.2 - 0.4, 0.1);
            let mut c = TaylorCoefficients::zeros(1)?;
            c.values_mut()[0] = position.z - 0.1;
            c.values_mut()[3] = h;
            points.push(ExpansionPoint { position, coefficients: c });
        }
    }
    let params = FieldParams { order: 1, h, theta: 20.0, k: 4, alpha: 32.0 };
    let field = TaylorField::new(points, params)?;

    for z in [-0.2, 0.0, 0.1, 0.3] {
        let x = Vec3::new(0.05, -0.13, z);
        println!("F(0.05, -0.13, {z:>4}) = {:+.6}", field.eval(&x)?);
    }

    let x = Vec3::new(0.05, -0.13, 0.0);
    let d: Vec<f64> = field.neighbors(&x).iter().map(|n| n.dist_sq.sqrt()).collect();
    println!("neighbor distances {d:.3?}");
    println!("softmin weights    {:.3?}", softmin_weights(&d, field.theta())?);
    Ok(())
}
