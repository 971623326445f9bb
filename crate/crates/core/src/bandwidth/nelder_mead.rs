//! Nelder–Mead minimization inside a box. Trial points are projected onto
//! the box before evaluation, so every evaluated point is feasible.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop once the largest vertex distance from the best vertex (max norm)
    /// falls below this.
    pub tolerance: f64,
    pub max_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
    /// Best value after each iteration.
    pub history: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, &l), &h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(l, h);
    }
}

/// Minimizes `f` over the box `[lo, hi]` starting from `x0`. `steps` gives
/// the initial simplex edge per coordinate; an edge that would leave the box
/// is flipped to the other side.
pub fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let p = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut start = x0.to_vec();
    project(&mut start, lo, hi);
    let mut simplex: Vec<Vec<f64>> = vec![start.clone()];
    for k in 0..p {
        let mut v = start.clone();
        let step = steps[k];
        v[k] = if v[k] + step <= hi[k] {
            v[k] + step
        } else {
            v[k] - step
        };
        project(&mut v, lo, hi);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();
    let mut history = Vec::new();
    let mut converged = false;

    if p == 0 {
        return NelderMeadResult {
            x: start,
            fx: values[0],
            evals,
            converged: true,
            history,
        };
    }

    loop {
        // stable sort keeps earlier vertices first among ties
        let mut order: Vec<usize> = (0..=p).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        history.push(values[0]);

        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < opts.tolerance {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }

        let mut centroid = vec![0.0; p];
        for v in &simplex[..p] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / p as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&simplex[p])
                .map(|(c, w)| c + t * (c - w))
                .collect();
            project(&mut x, lo, hi);
            x
        };

        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(EXPAND);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[p] = xe;
                values[p] = fe;
            } else {
                simplex[p] = xr;
                values[p] = fr;
            }
            continue;
        }
        if fr < values[p - 1] {
            simplex[p] = xr;
            values[p] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[p] {
            let xc = along(CONTRACT * REFLECT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < values[p].min(fr) {
            simplex[p] = xc;
            values[p] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for k in 1..=p {
            let mut x: Vec<f64> = best
                .iter()
                .zip(&simplex[k])
                .map(|(b, v)| b + SHRINK * (v - b))
                .collect();
            project(&mut x, lo, hi);
            values[k] = eval(&x, &mut evals);
            simplex[k] = x;
        }
    }

    NelderMeadResult {
        x: simplex[0].clone(),
        fx: values[0],
        evals,
        converged,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> NelderMeadOptions {
        NelderMeadOptions {
            tolerance: 1e-9,
            max_evals: 5000,
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(
            f,
            &[-1.2, 1.0],
            &[0.5, 0.5],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            &opts(),
        );
        assert!(r.converged);
        assert!(
            (r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn optimum_on_the_boundary() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 0.2).powi(2);
        let r = minimize(
            f,
            &[0.5, 0.5],
            &[0.1, 0.1],
            &[0.0, 0.0],
            &[1.0, 1.0],
            &opts(),
        );
        assert!(r.converged);
        assert!(
            (r.x[0] - 1.0).abs() < 1e-8 && r.x[1].abs() < 1e-8,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn history_is_nonincreasing() {
        let f = |x: &[f64]| x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>();
        let r = minimize(
            f,
            &[0.9, 0.1, 0.5],
            &[0.1; 3],
            &[0.0; 3],
            &[1.0; 3],
            &opts(),
        );
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn eval_budget_is_respected() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let o = NelderMeadOptions {
            tolerance: 0.0,
            max_evals: 50,
        };
        let r = minimize(f, &[-1.2, 1.0], &[0.5, 0.5], &[-5.0, -5.0], &[5.0, 5.0], &o);
        assert!(!r.converged);
        assert!(r.evals <= 50 + 3);
    }
}
