//! Dormand–Prince 5(4) with PI step-size control and dense output.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
// Bounds on h_new / h are [1 / FAC_MIN_INV, 1 / FAC_MAX_INV] = [0.2, 10].
const FAC_MIN_INV: f64 = 5.0;
const FAC_MAX_INV: f64 = 0.1;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Clamp accepted states and samples at zero.
    pub non_negative: bool,
}

/// Integrates `y' = f(t, y)` from `t = 0`, `y = y0` and returns the state at
/// each of `times` (sorted, non-negative). The second value is the number of
/// accepted steps.
pub(crate) fn integrate<F>(mut f: F, y0: &[f64], times: &[f64], tol: &Tolerances) -> Result<(Vec<Vec<f64>>, usize)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    let t_end = times.last().copied().unwrap_or(0.0);
    let mut next = 0;
    while next < times.len() && times[next] <= 0.0 {
        out.push(y0.to_vec());
        next += 1;
    }
    if next == times.len() {
        return Ok((out, 0));
    }

    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut cont = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];

    f(t, &y, &mut k1);
    check_finite(&k1, t, "right-hand side is not finite")?;
    let mut h = initial_step(&mut f, &y, &k1, t_end, tol);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;

    while next < times.len() {
        if steps >= tol.max_steps {
            return Err(Error::IntegrationFailure {
                last_good_time: t,
                reason: format!("step budget of {} exhausted", tol.max_steps),
            });
        }
        if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) || !h.is_finite() {
            return Err(Error::IntegrationFailure {
                last_good_time: t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        let final_step = t + 1.01 * h >= t_end;
        if final_step {
            h = t_end - t;
        }

        for i in 0..n {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &stage, &mut k2);
        for i in 0..n {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &stage, &mut k3);
        for i in 0..n {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &stage, &mut k4);
        for i in 0..n {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &stage, &mut k5);
        for i in 0..n {
            stage[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if final_step { t_end } else { t + h };
        f(t_new, &stage, &mut k6);
        for i in 0..n {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t_new, &y_new, &mut k7);

        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            err += (e / sk) * (e / sk);
        }
        let err = if n == 0 { 0.0 } else { (err / n as f64).sqrt() };
        if !err.is_finite() {
            // Treat a blow-up inside the step as a hard rejection.
            h *= 0.2;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(FAC_MAX_INV, FAC_MIN_INV);
            let mut h_new = h / fac;
            fac_old = err.max(1e-4);
            steps += 1;

            let ydiff: Vec<f64> = (0..n).map(|i| y_new[i] - y[i]).collect();
            for i in 0..n {
                let bspl = h * k1[i] - ydiff[i];
                cont[0][i] = y[i];
                cont[1][i] = ydiff[i];
                cont[2][i] = bspl;
                cont[3][i] = ydiff[i] - h * k7[i] - bspl;
                cont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }

            let last = final_step;
            while next < times.len() && (times[next] <= t_new || last) {
                let ts = times[next];
                let mut v = if ts >= t_new {
                    y_new.clone()
                } else {
                    let s = (ts - t) / h;
                    let s1 = 1.0 - s;
                    (0..n)
                        .map(|i| cont[0][i] + s * (cont[1][i] + s1 * (cont[2][i] + s * (cont[3][i] + s1 * cont[4][i]))))
                        .collect()
                };
                if tol.non_negative {
                    v.iter_mut().for_each(|x| *x = x.max(0.0));
                }
                out.push(v);
                next += 1;
            }

            let mut clamped = false;
            if tol.non_negative {
                for x in y_new.iter_mut() {
                    if *x < 0.0 {
                        *x = 0.0;
                        clamped = true;
                    }
                }
            }
            std::mem::swap(&mut y, &mut y_new);
            t = t_new;
            if clamped {
                f(t, &y, &mut k1);
            } else {
                std::mem::swap(&mut k1, &mut k7);
            }
            check_finite(&y, t, "state is not finite")?;

            h_new = h_new.min(tol.max_step);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(FAC_MIN_INV);
            last_rejected = true;
        }
    }
    Ok((out, steps))
}

fn check_finite(v: &[f64], t: f64, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::IntegrationFailure { last_good_time: t, reason: what.to_string() })
    }
}

/// Starting step size estimate (Hairer, Nørsett & Wanner, II.4).
fn initial_step<F>(f: &mut F, y0: &[f64], f0: &[f64], t_end: f64, tol: &Tolerances) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let h_max = tol.max_step.min(t_end);
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for (y, f) in y0.iter().zip(f0) {
        let sk = tol.abs + tol.rel * y.abs();
        dnf += (f / sk).powi(2);
        dny += (y / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
    h = h.min(h_max);

    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    f(h, &y1, &mut f1);
    let mut der2 = 0.0;
    for i in 0..y0.len() {
        let sk = tol.abs + tol.rel * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(0.2) };
    (100.0 * h).min(h1).min(h_max)
}
