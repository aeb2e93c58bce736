//! Small dependency-free Nelder-Mead simplex minimizer.
//!
//! Used for the continuous polish steps: witness-direction refinement and
//! the LO-amplitude descent. Plain textbook coefficients (reflection 1,
//! expansion 2, contraction 0.5, shrink 0.5); fully deterministic.

/// Stops when the value spread falls below `ftol` or every coordinate of the
/// simplex has collapsed to within `xtol` of the best vertex (pass 0 to
/// disable either test), or after `max_iter` iterations.
pub(crate) fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    ftol: f64,
    xtol: f64,
) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

    for _ in 0..max_iter {
        // Order best -> worst.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        let (best, second_worst, worst) = (order[0], order[n - 1], order[n]);
        if (fv[worst] - fv[best]).abs() <= ftol {
            break;
        }
        if xtol > 0.0 {
            let spread = simplex
                .iter()
                .flat_map(|x| x.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
                .fold(0.0f64, f64::max);
            if spread <= xtol {
                break;
            }
        }
        // Centroid of all but the worst.
        let mut c = vec![0.0; n];
        for &i in &order[..n] {
            for (ck, xk) in c.iter_mut().zip(&simplex[i]) {
                *ck += xk / n as f64;
            }
        }
        let shifted = |coef: f64| -> Vec<f64> {
            c.iter()
                .zip(&simplex[worst])
                .map(|(ck, wk)| ck + coef * (ck - wk))
                .collect()
        };
        let xr = shifted(1.0);
        let fr = f(&xr);
        if fr < fv[best] {
            let xe = shifted(2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[worst] = xe;
                fv[worst] = fe;
            } else {
                simplex[worst] = xr;
                fv[worst] = fr;
            }
        } else if fr < fv[second_worst] {
            simplex[worst] = xr;
            fv[worst] = fr;
        } else {
            let xc = if fr < fv[worst] { shifted(0.5) } else { shifted(-0.5) };
            let fc = f(&xc);
            if fc < fv[worst].min(fr) {
                simplex[worst] = xc;
                fv[worst] = fc;
            } else {
                // Shrink toward the best point.
                let xb = simplex[best].clone();
                for (i, x) in simplex.iter_mut().enumerate() {
                    if i != best {
                        for (xk, bk) in x.iter_mut().zip(&xb) {
                            *xk = bk + 0.5 * (*xk - bk);
                        }
                        fv[i] = f(x);
                    }
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..=n {
        if fv[i] < fv[best] {
            best = i;
        }
    }
    (simplex[best].clone(), fv[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic_bowl() {
        let (x, v) = nelder_mead(
            |x| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2),
            &[0.0, 0.0],
            0.5,
            500,
            1e-14,
            0.0,
        );
        assert!((x[0] - 1.5).abs() < 1e-6);
        assert!((x[1] + 0.5).abs() < 1e-6);
        assert!(v < 1e-12);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let (x, v) = nelder_mead(rosen, &[-1.2, 1.0], 0.5, 4000, 1e-16, 0.0);
        assert!(v < 1e-8, "f = {v} at {x:?}");
        assert!((x[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| x.iter().map(|v| v.cos() + v * v * 0.1).sum::<f64>();
        let a = nelder_mead(f, &[0.3, -0.2, 0.9], 0.3, 300, 1e-12, 0.0);
        let b = nelder_mead(f, &[0.3, -0.2, 0.9], 0.3, 300, 1e-12, 0.0);
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
}
