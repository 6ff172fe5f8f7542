//! Derivative-free simplex minimisation with adaptive coefficients.
//!
//! Coefficients follow the dimension-dependent choice of Gao and Han, which
//! behaves much better than the textbook ones beyond a handful of variables.

#[derive(Clone, Debug)]
pub struct NelderMeadOptions {
    /// Edge length of the initial simplex along each axis.
    pub step: f64,
    pub max_iterations: usize,
    /// Stop once the best value has improved by less than `stall_tolerance`
    /// over this many iterations.
    pub stall_iterations: usize,
    pub stall_tolerance: f64,
    /// Rebuild the simplex around the best point this many times after
    /// convergence; helps on kinks where the simplex collapses early.
    pub restarts: usize,
    /// Optional box; points are clamped into it.
    pub bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            step: 0.5,
            max_iterations: 20_000,
            stall_iterations: 200,
            stall_tolerance: 1e-10,
            restarts: 2,
            bounds: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
    bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn clamp(&self, x: &mut [f64]) {
        if let Some((lo, hi)) = &self.bounds {
            for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
                *v = v.clamp(*l, *h);
            }
        }
    }

    fn eval(&mut self, x: &mut [f64]) -> f64 {
        self.clamp(x);
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Minimises `f` starting from `x0`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult {
    let n = x0.len();
    let mut obj = Counted {
        f,
        evaluations: 0,
        bounds: opts.bounds.clone(),
    };
    let mut best_x = x0.to_vec();
    let mut best = obj.eval(&mut best_x);
    if n == 0 {
        return NelderMeadResult {
            x: best_x,
            value: best,
            iterations: 0,
            evaluations: obj.evaluations,
        };
    }

    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n <= 2 {
        (1.0, 2.0, 0.5, 0.5)
    } else {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    };

    let mut iterations = 0;
    let mut step = opts.step;
    for _round in 0..=opts.restarts {
        let round_start = best;
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        simplex.push(best_x.clone());
        values.push(best);
        for i in 0..n {
            let mut p = best_x.clone();
            p[i] += step;
            // Step inwards instead when the box would flatten the vertex.
            if let Some((_, hi)) = &opts.bounds {
                if p[i] > hi[i] {
                    p[i] = best_x[i] - step;
                }
            }
            let v = obj.eval(&mut p);
            simplex.push(p);
            values.push(v);
        }

        let mut order: Vec<usize> = (0..=n).collect();
        let mut window_best = f64::INFINITY;
        let mut since = 0;
        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];
        while iterations < opts.max_iterations {
            iterations += 1;
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let (lo, hi, second) = (order[0], order[n], order[n - 1]);

            if values[lo] < window_best - opts.stall_tolerance {
                window_best = values[lo];
                since = 0;
            } else {
                since += 1;
                if since >= opts.stall_iterations {
                    break;
                }
            }
            let spread = values[hi] - values[lo];
            let diameter = simplex
                .iter()
                .map(|p| p.iter().zip(&simplex[lo]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if spread <= 1e-15 * values[lo].abs().max(1e-300) && diameter < 1e-12 {
                break;
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for &idx in &order[..n] {
                for (c, v) in centroid.iter_mut().zip(&simplex[idx]) {
                    *c += v;
                }
            }
            centroid.iter_mut().for_each(|c| *c /= nf);

            for j in 0..n {
                trial[j] = centroid[j] + alpha * (centroid[j] - simplex[hi][j]);
            }
            let fr = obj.eval(&mut trial);
            if fr < values[lo] {
                for j in 0..n {
                    trial2[j] = centroid[j] + beta * (trial[j] - centroid[j]);
                }
                let fe = obj.eval(&mut trial2);
                if fe < fr {
                    simplex[hi].copy_from_slice(&trial2);
                    values[hi] = fe;
                } else {
                    simplex[hi].copy_from_slice(&trial);
                    values[hi] = fr;
                }
            } else if fr < values[second] {
                simplex[hi].copy_from_slice(&trial);
                values[hi] = fr;
            } else {
                let outside = fr < values[hi];
                for j in 0..n {
                    trial2[j] = if outside {
                        centroid[j] + gamma * (trial[j] - centroid[j])
                    } else {
                        centroid[j] - gamma * (centroid[j] - simplex[hi][j])
                    };
                }
                let fc = obj.eval(&mut trial2);
                if fc < values[hi].min(fr) {
                    simplex[hi].copy_from_slice(&trial2);
                    values[hi] = fc;
                } else {
                    let anchor = simplex[lo].clone();
                    for &idx in &order[1..] {
                        for j in 0..n {
                            simplex[idx][j] = anchor[j] + delta * (simplex[idx][j] - anchor[j]);
                        }
                        values[idx] = obj.eval(&mut simplex[idx]);
                    }
                }
            }
        }

        for (p, &v) in simplex.iter().zip(&values) {
            if v < best {
                best = v;
                best_x.clone_from(p);
            }
        }
        if round_start - best <= opts.stall_tolerance || iterations >= opts.max_iterations {
            break;
        }
        step *= 0.5;
    }

    NelderMeadResult {
        x: best_x,
        value: best,
        iterations,
        evaluations: obj.evaluations,
    }
}
