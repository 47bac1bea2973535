use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Ball, BranchingLaw};

/// Function of the distance to the root, `v(0), ..., v(R)`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialFunction {
    pub values: Vec<f64>,
    pub lambda: Option<f64>,
}

fn check_negative(lambda: f64) -> Result<()> {
    if !(lambda < 0.0) {
        return Err(Error::Precondition(format!("λ must be negative, got {lambda}")));
    }
    Ok(())
}

/// Radial solution of `Δv = λv` on the model tree of `law`, from `v(0) = v0`:
/// `v(1) = (1 - λ/n(0)) v(0)` and
/// `v(r+1) = ((n(r) + 1 - λ) v(r) - v(r-1)) / n(r)`.
pub fn radial_harmonic(law: &BranchingLaw, lambda: f64, v0: f64, radius: usize) -> Result<RadialFunction> {
    check_negative(lambda)?;
    if !(v0 > 0.0) {
        return Err(Error::Precondition(format!("v(0) must be positive, got {v0}")));
    }
    let mut values = Vec::with_capacity(radius + 1);
    values.push(v0);
    if radius >= 1 {
        values.push((1.0 - lambda / law.n_f64(0)?) * v0);
    }
    for r in 1..radius {
        let n = law.n_f64(r as u64)?;
        values.push(((n + 1.0 - lambda) * values[r] - values[r - 1]) / n);
    }
    Ok(RadialFunction {
        values,
        lambda: Some(lambda),
    })
}

/// `Δv(r)` of a radial function on the model tree: `n(0)(v(0) - v(1))` at the
/// root and `(n(r) + 1) v(r) - n(r) v(r+1) - v(r-1)` elsewhere.
pub fn radial_laplacian(law: &BranchingLaw, v: &[f64], r: usize) -> Result<f64> {
    if r + 1 >= v.len() {
        return Err(Error::IndexOutOfRange(r));
    }
    let n = law.n_f64(r as u64)?;
    Ok(if r == 0 {
        n * (v[0] - v[1])
    } else {
        (n + 1.0) * v[r] - n * v[r + 1] - v[r - 1]
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProductBounds {
    /// `prod_{i<=R} (1 - λ/n(i))`
    pub lower: f64,
    /// `prod_{i<=R} (1 + (1-λ)/n(i))`
    pub upper: f64,
}

/// Partial products bracketing `v(R+1)` for the radial solution with `v(0) = 1`.
pub fn product_bounds(law: &BranchingLaw, lambda: f64, radius: usize) -> Result<ProductBounds> {
    check_negative(lambda)?;
    let mut b = ProductBounds { lower: 1.0, upper: 1.0 };
    for i in 0..=radius {
        let n = law.n_f64(i as u64)?;
        b.lower *= 1.0 - lambda / n;
        b.upper *= 1.0 + (1.0 - lambda) / n;
    }
    Ok(b)
}

/// Average of `u` over each sphere of a root-centered model-tree ball.
pub fn sphere_average(ball: &Ball, u: &[f64]) -> Result<RadialFunction> {
    if ball.model_law().is_none() {
        return Err(Error::NotAModelBall);
    }
    if u.len() != ball.len() {
        return Err(Error::LengthMismatch {
            expected: ball.len(),
            found: u.len(),
        });
    }
    let values = ball
        .spheres()
        .iter()
        .map(|s| s.iter().map(|&i| u[i]).sum::<f64>() / s.len() as f64)
        .collect();
    Ok(RadialFunction { values, lambda: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn first_steps() {
        let law = BranchingLaw::constant(2, 2).unwrap();
        let v = radial_harmonic(&law, -1.0, 1.0, 2).unwrap();
        assert_eq!(v.values, vec![1.0, 1.5, 2.5]);
        assert!(radial_harmonic(&law, 0.0, 1.0, 2).is_err());
        assert!(radial_harmonic(&law, -1.0, 0.0, 2).is_err());
    }

    #[test]
    fn constant_two_lower_product() {
        let law = BranchingLaw::constant(2, 2).unwrap();
        let b = product_bounds(&law, -1.0, 9).unwrap();
        assert_relative_eq!(b.lower, 1.5f64.powi(10), max_relative = 1e-14);
    }

    fn laws() -> Vec<BranchingLaw> {
        vec![
            BranchingLaw::constant(1, 1).unwrap(),
            BranchingLaw::constant(2, 2).unwrap(),
            BranchingLaw::affine(1, 1, 1).unwrap(),
            BranchingLaw::exponential(2, 2, 1).unwrap(),
            BranchingLaw::exponential(2, 2, 2).unwrap(),
            BranchingLaw::polynomial(4, vec![4, 4, 1]).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn increasing_and_sandwiched(which in 0usize..6, lambda in -5.0f64..-0.01, radius in 1usize..30) {
            let law = &laws()[which];
            let v = radial_harmonic(law, lambda, 1.0, radius + 1).unwrap();
            for w in v.values.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            for r in 1..=radius {
                prop_assert!((radial_laplacian(law, &v.values, r).unwrap() - lambda * v.values[r]).abs()
                    <= 1e-9 * v.values[r + 1] * law.n_f64(r as u64).unwrap());
            }
            // Equality holds at R = 0 since v(1) is the first lower factor.
            let b0 = product_bounds(law, lambda, 0).unwrap();
            prop_assert!(b0.lower <= v.values[1] && v.values[1] < b0.upper);
            let b = product_bounds(law, lambda, radius).unwrap();
            prop_assert!(b.lower < v.values[radius + 1]);
            prop_assert!(v.values[radius + 1] < b.upper);
        }
    }
}
