use super::NumericsError;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    /// Cap on simplex iterations, summed over restarts.
    pub max_iterations: usize,
    /// Stop when the relative spread of objective values across the simplex
    /// falls below this.
    pub rel_tolerance: f64,
    /// Initial simplex edge along coordinate `j` is `step_fraction * |x0_j|`,
    /// or `zero_step` when `x0_j == 0`.
    pub step_fraction: f64,
    pub zero_step: f64,
    /// Explicit per-coordinate edges; overrides the two fields above.
    pub steps: Option<Vec<f64>>,
    /// Fresh simplices built around the incumbent after convergence. A restart
    /// that does not improve the best value ends the search.
    pub max_restarts: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            rel_tolerance: 1e-10,
            step_fraction: 0.05,
            zero_step: 2.5e-4,
            steps: None,
            max_restarts: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// True when a tolerance was met before the iteration cap.
    pub converged: bool,
    /// Best value seen after each iteration (non-increasing).
    pub trace: Vec<f64>,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64, NumericsError> {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFiniteObjective)
        }
    }
}

/// Derivative-free minimization with the Nelder-Mead simplex method.
///
/// Uses dimension-adaptive coefficients (reflection 1, expansion `1 + 2/k`,
/// contraction `3/4 - 1/(2k)`, shrink `1 - 1/k`), which keep the simplex from
/// degenerating in the 10+ dimensional problems this crate solves.
pub fn minimize<F>(
    objective: F,
    x0: &[f64],
    options: &MinimizeOptions,
) -> Result<Minimum, NumericsError>
where
    F: FnMut(&[f64]) -> f64,
{
    let k = x0.len();
    if k == 0 {
        return Err(NumericsError::Dimension("empty parameter vector".into()));
    }
    if let Some(steps) = &options.steps {
        if steps.len() != k {
            return Err(NumericsError::Dimension(format!(
                "{} simplex steps for {k} parameters",
                steps.len()
            )));
        }
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(NumericsError::NonFinite);
    }

    let mut f = Counted {
        f: objective,
        evaluations: 0,
    };
    let mut best_x = x0.to_vec();
    let mut best_f = f.eval(x0)?;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for restart in 0..=options.max_restarts {
        let before = best_f;
        let run = nelder_mead_run(&mut f, &best_x, best_f, options, &mut iterations, &mut trace)?;
        if run.1 <= best_f {
            best_x = run.0;
            best_f = run.1;
        }
        converged = run.2;
        if !converged {
            break;
        }
        let improvement = before - best_f;
        if restart > 0 && improvement <= options.rel_tolerance * before.abs() {
            break;
        }
        if best_f == 0.0 {
            break;
        }
    }

    Ok(Minimum {
        x: best_x,
        value: best_f,
        iterations,
        evaluations: f.evaluations,
        converged,
        trace,
    })
}

/// One simplex run from `x0`; returns (best x, best f, converged).
fn nelder_mead_run<F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<F>,
    x0: &[f64],
    f0: f64,
    options: &MinimizeOptions,
    iterations: &mut usize,
    trace: &mut Vec<f64>,
) -> Result<(Vec<f64>, f64, bool), NumericsError> {
    let k = x0.len();
    let kf = k as f64;
    let rho = 1.0;
    let chi = 1.0 + 2.0 / kf;
    let psi = 0.75 - 0.5 / kf;
    let sigma = 1.0 - 1.0 / kf;

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let mut values: Vec<f64> = Vec::with_capacity(k + 1);
    simplex.push(x0.to_vec());
    values.push(f0);
    for j in 0..k {
        let mut x = x0.to_vec();
        let step = match &options.steps {
            Some(steps) => steps[j],
            None if x0[j] != 0.0 => options.step_fraction * x0[j],
            None => options.zero_step,
        };
        x[j] += step;
        values.push(f.eval(&x)?);
        simplex.push(x);
    }

    loop {
        // order: best first, worst last
        let mut order: Vec<usize> = (0..=k).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let f_best = values[0];
        let f_worst = values[k];
        let spread_ok =
            2.0 * (f_worst - f_best) <= options.rel_tolerance * (f_best.abs() + f_worst.abs());
        let collapsed = (1..=k).all(|i| {
            simplex[i]
                .iter()
                .zip(&simplex[0])
                .all(|(a, b)| (a - b).abs() <= 4.0 * f64::EPSILON * b.abs())
        });
        if spread_ok || collapsed {
            return Ok((simplex[0].clone(), f_best, true));
        }
        if *iterations >= options.max_iterations {
            return Ok((simplex[0].clone(), f_best, false));
        }
        *iterations += 1;

        let mut centroid = vec![0.0; k];
        for x in &simplex[..k] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / kf;
            }
        }
        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let worst = simplex[k].clone();
        let xr = along(rho, &worst);
        let fr = f.eval(&xr)?;

        let mut shrink = false;
        if fr < values[0] {
            let xe = along(rho * chi, &worst);
            let fe = f.eval(&xe)?;
            if fe < fr {
                simplex[k] = xe;
                values[k] = fe;
            } else {
                simplex[k] = xr;
                values[k] = fr;
            }
        } else if fr < values[k - 1] {
            simplex[k] = xr;
            values[k] = fr;
        } else if fr < values[k] {
            let xc = along(rho * psi, &worst);
            let fc = f.eval(&xc)?;
            if fc <= fr {
                simplex[k] = xc;
                values[k] = fc;
            } else {
                shrink = true;
            }
        } else {
            let xcc = along(-psi, &worst);
            let fcc = f.eval(&xcc)?;
            if fcc < values[k] {
                simplex[k] = xcc;
                values[k] = fcc;
            } else {
                shrink = true;
            }
        }

        if shrink {
            let best = simplex[0].clone();
            for i in 1..=k {
                let x: Vec<f64> = best
                    .iter()
                    .zip(&simplex[i])
                    .map(|(b, xi)| b + sigma * (xi - b))
                    .collect();
                values[i] = f.eval(&x)?;
                simplex[i] = x;
            }
        }

        let best_now = values.iter().cloned().fold(f64::INFINITY, f64::min);
        trace.push(best_now.min(trace.last().copied().unwrap_or(f64::INFINITY)));
    }
}
