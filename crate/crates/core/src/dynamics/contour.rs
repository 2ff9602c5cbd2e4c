//! Topological displacement as a contour integral in momentum space.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// `ħ∫F × dp` along `p_path` by the trapezoid rule, where `curvature`
/// returns the `F_pp` pseudovector of the band at a momentum.
pub fn displacement_contour<F>(p_path: &[Vector3<f64>], curvature: F, hbar: f64) -> Result<Vector3<f64>>
where
    F: Fn(&Vector3<f64>) -> Result<Vector3<f64>>,
{
    let mut acc = Vector3::zeros();
    let Some(first) = p_path.first() else {
        return Ok(acc);
    };
    let mut f_prev = curvature(first)?;
    for w in p_path.windows(2) {
        let f_next = curvature(&w[1])?;
        if !(f_next.iter().all(|x| x.is_finite())) {
            return Err(Error::Singularity(format!("curvature not finite at p = {:?}", w[1].as_slice())));
        }
        acc += ((f_prev + f_next) * 0.5).cross(&(w[1] - w[0]));
        f_prev = f_next;
    }
    Ok(acc * hbar)
}

/// Monopole `F_pp = −S p/|p|³` for a band whose spin part is `S·p`.
pub fn momentum_monopole(spin: f64) -> impl Fn(&Vector3<f64>) -> Result<Vector3<f64>> {
    move |p: &Vector3<f64>| {
        let n = p.norm();
        if !(n > 0.0) {
            return Err(Error::Singularity("p = 0 on the contour".into()));
        }
        Ok(-p * (spin / n.powi(3)))
    }
}
