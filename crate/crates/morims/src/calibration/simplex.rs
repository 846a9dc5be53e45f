//! Bound-constrained Nelder-Mead simplex minimizer.
//!
//! Operates on unit-cube coordinates; every candidate point is clamped to
//! [0, 1]^n before evaluation, which realizes the box constraints. The
//! caller maps unit coordinates to physical parameters (log-scaled where a
//! bound range spans decades) and supplies the objective.

/// Outcome of a single simplex descent.
pub struct SimplexRun {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink
const FTOL: f64 = 1e-11;
const XTOL: f64 = 1e-10;

fn clamp_unit(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Runs Nelder-Mead from `start` with initial per-coordinate step `step`,
/// spending at most `max_evals` objective evaluations. `eval` is expected to
/// count its own invocations; this function stops issuing evaluations once
/// it has used its local allowance.
pub fn minimize<F>(eval: &mut F, start: &[f64], step: f64, max_evals: usize) -> SimplexRun
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut used = 0;
    let spend = |f: &mut F, x: &[f64], used: &mut usize| -> f64 {
        *used += 1;
        f(x)
    };

    // Initial simplex: start plus a step along each axis, reflected inward
    // when it would leave the cube.
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    clamp_unit(&mut x0);
    values.push(spend(eval, &x0, &mut used));
    points.push(x0.clone());
    for i in 0..n {
        let mut xi = x0.clone();
        xi[i] = if xi[i] + step <= 1.0 {
            xi[i] + step
        } else {
            (xi[i] - step).max(0.0)
        };
        values.push(spend(eval, &xi, &mut used));
        points.push(xi);
    }

    let mut iterations = 0;
    let mut converged = false;

    loop {
        // order ascending by objective
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let f_best = values[best];
        let f_worst = values[worst];
        let spread = f_worst - f_best;
        let diameter = (0..n)
            .map(|j| {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for p in &points {
                    lo = lo.min(p[j]);
                    hi = hi.max(p[j]);
                }
                hi - lo
            })
            .fold(0.0f64, f64::max);
        if spread <= FTOL * (1.0 + f_best.abs()) || diameter <= XTOL {
            converged = true;
            break;
        }
        if used + 2 > max_evals {
            break;
        }
        iterations += 1;

        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for (idx, p) in points.iter().enumerate() {
            if idx != worst {
                for j in 0..n {
                    centroid[j] += p[j] / n as f64;
                }
            }
        }

        let mut reflected = vec![0.0; n];
        for j in 0..n {
            reflected[j] = centroid[j] + ALPHA * (centroid[j] - points[worst][j]);
        }
        clamp_unit(&mut reflected);
        let f_reflected = spend(eval, &reflected, &mut used);

        if f_reflected < values[best] {
            // try expanding further in the same direction
            let mut expanded = vec![0.0; n];
            for j in 0..n {
                expanded[j] = centroid[j] + GAMMA * (reflected[j] - centroid[j]);
            }
            clamp_unit(&mut expanded);
            let f_expanded = spend(eval, &expanded, &mut used);
            if f_expanded < f_reflected {
                points[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                points[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            points[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            // contract toward the better of worst/reflected
            let (toward, f_toward) = if f_reflected < values[worst] {
                (reflected.clone(), f_reflected)
            } else {
                (points[worst].clone(), values[worst])
            };
            let mut contracted = vec![0.0; n];
            for j in 0..n {
                contracted[j] = centroid[j] + RHO * (toward[j] - centroid[j]);
            }
            clamp_unit(&mut contracted);
            let f_contracted = spend(eval, &contracted, &mut used);
            if f_contracted < f_toward {
                points[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // shrink everything toward the best point
                if used + n > max_evals {
                    break;
                }
                let best_point = points[best].clone();
                for idx in 0..=n {
                    if idx == best {
                        continue;
                    }
                    for j in 0..n {
                        points[idx][j] =
                            best_point[j] + SIGMA * (points[idx][j] - best_point[j]);
                    }
                    values[idx] = spend(eval, &points[idx], &mut used);
                }
            }
        }
    }

    let mut best_idx = 0;
    for i in 1..=n {
        if values[i] < values[best_idx] {
            best_idx = i;
        }
    }
    SimplexRun {
        best_x: points[best_idx].clone(),
        best_f: values[best_idx],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_shifted_quadratic_inside_cube() {
        let target = [0.3, 0.7, 0.55];
        let mut f = |x: &[f64]| -> f64 {
            x.iter()
                .zip(target.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        };
        let run = minimize(&mut f, &[0.9, 0.1, 0.2], 0.2, 5000);
        assert!(run.converged);
        for (x, t) in run.best_x.iter().zip(target.iter()) {
            assert!((x - t).abs() < 1e-5, "got {x} want {t}");
        }
    }

    #[test]
    fn respects_bounds_when_minimum_is_outside() {
        // unconstrained minimum at (-1, 2): clamps to (0, 1)
        let mut f = |x: &[f64]| (x[0] + 1.0).powi(2) + (x[1] - 2.0).powi(2);
        let run = minimize(&mut f, &[0.5, 0.5], 0.2, 5000);
        assert!(run.best_x[0] < 1e-6);
        assert!(run.best_x[1] > 1.0 - 1e-6);
    }

    #[test]
    fn budget_is_respected() {
        let mut count = 0usize;
        let mut f = |x: &[f64]| {
            count += 1;
            x.iter().map(|v| v * v).sum()
        };
        let _ = minimize(&mut f, &[0.8; 6], 0.1, 40);
        assert!(count <= 40, "used {count} evaluations");
    }

    #[test]
    fn handles_rosenbrock_valley() {
        // classic banana in unit coordinates, minimum at (1, 1) corner
        let mut f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            100.0 * (b - a * a).powi(2) + (1.0 - a).powi(2)
        };
        let run = minimize(&mut f, &[0.1, 0.1], 0.1, 20000);
        assert!(run.best_f < 1e-8, "best {}", run.best_f);
    }
}
