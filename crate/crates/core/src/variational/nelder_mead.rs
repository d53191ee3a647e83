use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Spread of simplex values at which the search stops.
    pub ftol: f64,
    /// Largest vertex distance (max norm) from the best vertex at which the
    /// search stops.
    pub xtol: f64,
    /// Initial edge length relative to `max(|x₀ᵢ|, 1)`.
    pub initial_step: f64,
    pub exec: Exec,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_iter: 500, ftol: 1e-10, xtol: 1e-7, initial_step: 0.1, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best value after each iteration.
    pub history: Vec<f64>,
}

/// NaN counts as +∞ so the simplex contracts away from it.
fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Derivative-free minimization. Non-finite values are treated as +∞, so a
/// step into a bad region contracts or shrinks the simplex instead of
/// failing. Vertex evaluations of the initial simplex and of shrink steps go
/// through `opts.exec`; ties are broken by vertex index.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> Result<NelderMeadResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidParameter("nothing to optimize".into()));
    }
    if !(opts.ftol >= 0.0 && opts.xtol >= 0.0 && opts.initial_step > 0.0) {
        return Err(Error::InvalidParameter("bad Nelder-Mead tolerances".into()));
    }
    let eval = |x: &[f64]| sanitize(f(x));
    let f0 = eval(x0);
    if !f0.is_finite() {
        return Err(Error::NonFinite("objective at the initial point".into()));
    }
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step * x0[i].abs().max(1.0);
        simplex.push(v);
    }
    let mut values = vec![f0];
    values.extend(opts.exec.map(&simplex[1..], |v| eval(v)));
    // Step the other way off an infeasible start.
    for i in 1..=n {
        if !values[i].is_finite() {
            simplex[i][i - 1] = x0[i - 1] - opts.initial_step * x0[i - 1].abs().max(1.0);
            values[i] = eval(&simplex[i]);
        }
    }
    let mut evaluations = 2 * n + 1;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        let spread_f = values[n] - values[0];
        let spread_x = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if spread_f <= opts.ftol && spread_x <= opts.xtol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> =
            (0..n).map(|d| simplex[..n].iter().map(|v| v[d]).sum::<f64>() / n as f64).collect();
        let toward = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = toward(1.0);
        let fr = eval(&xr);
        evaluations += 1;
        let mut accepted = None;
        if fr < values[0] {
            let xe = toward(2.0);
            let fe = eval(&xe);
            evaluations += 1;
            accepted = Some(if fe < fr { (xe, fe) } else { (xr, fr) });
        } else if fr < values[n - 1] {
            accepted = Some((xr, fr));
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = toward(0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = toward(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            evaluations += 1;
            if fc < fr.min(values[n]) {
                accepted = Some((xc, fc));
            }
        }
        match accepted {
            Some((x, v)) => {
                simplex[n] = x;
                values[n] = v;
            }
            None => {
                let best = simplex[0].clone();
                for v in simplex.iter_mut().skip(1) {
                    for (a, b) in v.iter_mut().zip(&best) {
                        *a = b + 0.5 * (*a - b);
                    }
                }
                let fresh = opts.exec.map(&simplex[1..], |v| eval(v));
                values[1..].copy_from_slice(&fresh);
                evaluations += n;
            }
        }
        history.push(values.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    Ok(NelderMeadResult {
        x: simplex[0].clone(),
        value: values[0],
        iterations,
        evaluations,
        converged,
        history,
    })
}
