//! Derivative-free local refinement and deterministic multi-start evaluation.
//!
//! The simplex search is a plain Nelder-Mead descent; multi-start drivers
//! evaluate every start (in parallel with the `parallel` feature) and reduce
//! with index-based tie breaking, so results do not depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Standard Nelder-Mead minimization.
///
/// Runs at most `max_iters` reflection cycles and stops early when the spread
/// between the best and worst simplex values drops below `tol`. Returns the
/// best point and its value.
pub fn minimize<F>(f: F, start: &[f64], step: f64, max_iters: usize, tol: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let dim = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += if p[i].abs() > 1e-8 { step * p[i].abs() } else { step };
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    for _ in 0..max_iters {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];
        if (values[worst] - values[best]).abs() < tol {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for &idx in order.iter().take(dim) {
            for d in 0..dim {
                centroid[d] += simplex[idx][d];
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }

        let lerp = |from: &[f64], toward: &[f64], t: f64| -> Vec<f64> {
            from.iter().zip(toward).map(|(a, b)| a + t * (b - a)).collect()
        };

        let reflected = lerp(&centroid, &simplex[worst], -ALPHA);
        let f_reflected = f(&reflected);

        if f_reflected < values[best] {
            let expanded = lerp(&centroid, &simplex[worst], -GAMMA);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }

        let contracted = lerp(&centroid, &simplex[worst], RHO);
        let f_contracted = f(&contracted);
        if f_contracted < values[worst] {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }

        for &idx in order.iter().skip(1) {
            simplex[idx] = lerp(&simplex[best], &simplex[idx], SIGMA);
            values[idx] = f(&simplex[idx]);
        }
    }

    let mut best = 0;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best].clone(), values[best])
}

/// Maximization wrapper around [`minimize`].
pub fn maximize<F>(f: F, start: &[f64], step: f64, max_iters: usize, tol: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let (point, neg) = minimize(|x| -f(x), start, step, max_iters, tol);
    (point, -neg)
}

/// Evaluates `eval(0..n)` and returns the results in index order.
///
/// With the `parallel` feature the evaluations run on the rayon pool; the
/// output order is index order either way, so downstream reductions are
/// deterministic.
pub fn evaluate_starts<T, F>(n: usize, eval: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(eval).collect()
    }
}

/// Best value over `n` starts (ties broken by the lowest start index).
pub fn best_of_starts<F>(n: usize, eval: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    evaluate_starts(n, eval)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}
