//! Central finite-difference stencils.

/// Second-order central difference of a scalar function.
pub fn central<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Fourth-order central difference of a scalar function.
pub fn central4<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Fourth-order stencil weights for offsets `[-2h, -h, h, 2h]`, scaled by `1/h`.
pub const CENTRAL4_OFFSETS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];
pub const CENTRAL4_WEIGHTS: [f64; 4] = [1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0];

/// Fourth-order central Jacobian of `f: R^n -> R^m`; entry `(i, k)` is `∂f_i/∂x_k`.
pub fn jacobian4<F>(mut f: F, x: &[f64], h: f64) -> Vec<Vec<f64>>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut probe = x.to_vec();
    for k in 0..n {
        let mut acc: Option<Vec<f64>> = None;
        for (off, w) in CENTRAL4_OFFSETS.iter().zip(CENTRAL4_WEIGHTS) {
            probe[k] = x[k] + off * h;
            let v = f(&probe);
            match acc.as_mut() {
                None => acc = Some(v.iter().map(|y| w * y).collect()),
                Some(a) => a.iter_mut().zip(&v).for_each(|(a, y)| *a += w * y),
            }
        }
        probe[k] = x[k];
        cols.push(acc.unwrap().into_iter().map(|y| y / h).collect());
    }
    let m = cols.first().map_or(0, Vec::len);
    (0..m)
        .map(|i| (0..n).map(|k| cols[k][i]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_differentiate_polynomials() {
        let f = |x: f64| x.powi(3) - 2.0 * x;
        assert!((central(f, 1.5, 1e-5) - (3.0 * 2.25 - 2.0)).abs() < 1e-8);
        // fourth order is exact for quartics up to rounding
        let g = |x: f64| x.powi(4);
        assert!((central4(g, 0.7, 1e-2) - 4.0 * 0.343).abs() < 1e-11);
    }

    #[test]
    fn jacobian_of_linear_map() {
        let j = jacobian4(|x| vec![2.0 * x[0] + x[1], -x[1]], &[0.3, 0.4], 1e-3);
        let expected = [[2.0, 1.0], [0.0, -1.0]];
        for i in 0..2 {
            for k in 0..2 {
                assert!((j[i][k] - expected[i][k]).abs() < 1e-12);
            }
        }
    }
}
