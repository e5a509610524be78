//! The symmetric mean-field model with recovery rate one:
//!
//! ```text
//! s' = -2 a s x
//! q' = (a s - C a q) x
//! x' = (a s + C a q) x - x
//! ```
//!
//! `s` is the fully susceptible fraction, `q` the fraction that has had
//! exactly one of the two diseases, and `x` the fraction actively infected
//! with a given disease. Starting from `s = 1 - eps`, `q = x = eps / 2`, the
//! final size `R = 1 - s(inf)` is computed two ways: by integrating the
//! system, and from the closed form `R = 1 - s0 exp(-2 a T0)`, where `T0` is
//! the first zero of `x` expressed in cumulative infection pressure
//! `tau = int x dt`. Along `tau` the system is linear and
//!
//! ```text
//! s(tau) + q(tau) + x(tau) = 1 - tau
//! q(tau) = q0 e^{-C a tau} + s0 (e^{-2 a tau} - e^{-C a tau}) / (C - 2)
//! ```
//!
//! so `T0` solves `g(T0) = 1` with `g(t) = t + s(t) + q(t)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldState<T> {
    pub s: T,
    pub q: T,
    pub x: T,
}

impl<T: Real> MeanFieldState<T> {
    /// `[A](0) = [B](0) = eps/2`, everything else susceptible.
    pub fn initial(eps: T) -> Self {
        let half = eps / T::lit(2.0);
        MeanFieldState {
            s: T::one() - eps,
            q: half,
            x: half,
        }
    }

    fn to_array(self) -> [T; 3] {
        [self.s, self.q, self.x]
    }

    fn from_array(v: [T; 3]) -> Self {
        MeanFieldState {
            s: v[0],
            q: v[1],
            x: v[2],
        }
    }
}

/// Right-hand side of the reduced system.
pub fn ode_rhs<T: Real>(state: &MeanFieldState<T>, alpha: T, c: T) -> MeanFieldState<T> {
    let MeanFieldState { s, q, x } = *state;
    MeanFieldState {
        s: -T::lit(2.0) * alpha * s * x,
        q: (alpha * s - c * alpha * q) * x,
        x: (alpha * s + c * alpha * q) * x - x,
    }
}

/// Step-size control for the Dormand-Prince 5(4) integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl<T> {
    /// Relative local error tolerance.
    pub tol: T,
    /// Absolute floor of the error scale.
    pub atol: T,
    pub h_init: T,
    pub h_min: T,
    pub max_steps: usize,
}

impl<T: Real> Default for StepControl<T> {
    fn default() -> Self {
        StepControl {
            tol: T::lit(1e-10),
            atol: T::lit(1e-14),
            h_init: T::lit(1e-3),
            h_min: T::lit(1e-14),
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<MeanFieldState<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> MeanFieldState<T> {
        *self.states.last().expect("trajectory holds the initial state")
    }
}

fn check_params<T: Real>(alpha: T, c: T, eps: T) -> Result<()> {
    let ok =
        alpha > T::zero() && alpha.is_finite() && c >= T::one() && c.is_finite() && eps > T::zero() && eps < T::one();
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "mean-field parameters need alpha > 0, finite C >= 1, 0 < eps < 1 (got alpha={alpha}, C={c}, eps={eps})"
        )))
    }
}

// Dormand-Prince 5(4) tableau.
const C_NODES: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One trial step; returns the 5th-order proposal and the scaled error norm.
fn dopri_step<T: Real>(y: [T; 3], h: T, control: &StepControl<T>, f: &impl Fn([T; 3]) -> [T; 3]) -> ([T; 3], T) {
    debug_assert!(C_NODES[6] == 1.0);
    let mut k = [[T::zero(); 3]; 7];
    k[0] = f(y);
    for stage in 1..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = T::lit(A[stage][j]);
            if a != T::zero() {
                for i in 0..3 {
                    ys[i] = ys[i] + h * a * kj[i];
                }
            }
        }
        k[stage] = f(ys);
    }
    let mut next = y;
    let mut err = T::zero();
    for i in 0..3 {
        let mut incr = T::zero();
        let mut e = T::zero();
        for stage in 0..7 {
            incr = incr + T::lit(B5[stage]) * k[stage][i];
            e = e + T::lit(ERR[stage]) * k[stage][i];
        }
        next[i] = y[i] + h * incr;
        let scale = control.atol + control.tol * y[i].abs().max(next[i].abs());
        err = err.max((h * e).abs() / scale);
    }
    (next, err)
}

/// Adaptive integration from `t = 0` that calls `observe(t, state)` after
/// every accepted step and stops when it returns `true` or at `t_end`.
/// Accepted states are projected back onto the invariant set: negative
/// components become zero and `s` never increases.
fn integrate_with<T: Real>(
    alpha: T,
    c: T,
    start: MeanFieldState<T>,
    t_end: T,
    control: &StepControl<T>,
    mut observe: impl FnMut(T, &MeanFieldState<T>) -> bool,
) -> Result<(T, MeanFieldState<T>)> {
    let f = |y: [T; 3]| ode_rhs(&MeanFieldState::from_array(y), alpha, c).to_array();
    let mut t = T::zero();
    let mut y = start.to_array();
    let mut h = control.h_init;
    for _ in 0..control.max_steps {
        if t >= t_end {
            break;
        }
        h = h.min(t_end - t);
        let (mut next, err) = dopri_step(y, h, control, &f);
        if err <= T::one() {
            t = t + h;
            for v in next.iter_mut() {
                if *v < T::zero() {
                    *v = T::zero();
                }
            }
            next[0] = next[0].min(y[0]);
            y = next;
            if observe(t, &MeanFieldState::from_array(y)) {
                return Ok((t, MeanFieldState::from_array(y)));
            }
        }
        let factor = if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
        };
        h = h * factor;
        if h < control.h_min {
            return Err(Error::StepUnderflow {
                t: t.to_f64().unwrap_or(f64::NAN),
                step: h.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    if t < t_end {
        return Err(Error::NonConvergence {
            what: "mean-field integration",
            iterations: control.max_steps,
            residual: (t_end - t).to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((t, MeanFieldState::from_array(y)))
}

/// Trajectory of the system from the standard initial condition up to `t_end`.
pub fn integrate<T: Real>(alpha: T, c: T, eps: T, t_end: T, control: &StepControl<T>) -> Result<Trajectory<T>> {
    check_params(alpha, c, eps)?;
    let start = MeanFieldState::initial(eps);
    let mut traj = Trajectory {
        times: vec![T::zero()],
        states: vec![start],
    };
    integrate_with(alpha, c, start, t_end, control, |t, s| {
        traj.times.push(t);
        traj.states.push(*s);
        false
    })?;
    Ok(traj)
}

/// Stopping rule for [`final_size_ode_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalSizeOptions<T> {
    pub control: StepControl<T>,
    /// Stop once `x` is below this ...
    pub x_stop: T,
    /// ... and `s` moved less than this over the last unit of time.
    pub ds_stop: T,
    pub t_cap: T,
}

impl<T: Real> Default for FinalSizeOptions<T> {
    fn default() -> Self {
        FinalSizeOptions {
            control: StepControl::default(),
            x_stop: T::lit(1e-12),
            ds_stop: T::lit(1e-12),
            t_cap: T::lit(1e6),
        }
    }
}

/// `R = 1 - lim s(t)` by direct integration.
pub fn final_size_ode<T: Real>(alpha: T, c: T, eps: T) -> Result<T> {
    final_size_ode_with(alpha, c, eps, &FinalSizeOptions::default())
}

pub fn final_size_ode_with<T: Real>(alpha: T, c: T, eps: T, options: &FinalSizeOptions<T>) -> Result<T> {
    check_params(alpha, c, eps)?;
    let start = MeanFieldState::initial(eps);
    let (mut mark_t, mut mark_s) = (T::zero(), start.s);
    let mut settled = false;
    let (_, end) = integrate_with(alpha, c, start, options.t_cap, &options.control, |t, st| {
        if t - mark_t >= T::one() {
            if st.x < options.x_stop && (mark_s - st.s).abs() < options.ds_stop {
                settled = true;
                return true;
            }
            mark_t = t;
            mark_s = st.s;
        }
        false
    })?;
    if !settled {
        return Err(Error::NonConvergence {
            what: "mean-field final size",
            iterations: 0,
            residual: end.x.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((T::one() - end.s).max(T::zero()).min(T::one()))
}

/// Which exponent the single-history term of the `T0` equation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExponentVariant {
    /// `q0 exp(-C a t)`; agrees with the integrated system.
    Cooperative,
    /// `q0 exp(-C b t)` with `b = C a`, the other way to read the formula.
    Literal,
}

/// `(exp(-d a t) - 1) / d`, with its `d -> 0` limit.
fn expm1_ratio<T: Real>(d: T, at: T) -> T {
    if d.abs() < T::lit(1e-6) {
        let z = d * at;
        -at * (T::one() - z / T::lit(2.0) + z * z / T::lit(6.0))
    } else {
        (-d * at).exp_m1() / d
    }
}

/// Left side `g(t)` of the `T0` equation and its derivative.
pub fn t0_equation<T: Real>(t: T, alpha: T, c: T, eps: T, variant: ExponentVariant) -> (T, T) {
    let two = T::lit(2.0);
    let s0 = T::one() - eps;
    let q0 = eps / two;
    let k = match variant {
        ExponentVariant::Cooperative => c,
        ExponentVariant::Literal => c * c,
    };
    let e2 = (-two * alpha * t).exp();
    let ek = (-k * alpha * t).exp();
    let d = c - two;
    let ratio = expm1_ratio(d, alpha * t);
    // (e^{-C a t} - e^{-2 a t}) / (C - 2) and its t-derivative
    let cross = e2 * ratio;
    let cross_dt = alpha * e2 * (-two * ratio - (-d * alpha * t).exp());
    let g = t + s0 * e2 + q0 * ek - s0 * cross;
    let dg = T::one() - two * alpha * s0 * e2 - k * alpha * q0 * ek - s0 * cross_dt;
    (g, dg)
}

fn bisect<T: Real>(mut lo: T, mut hi: T, f: impl Fn(T) -> T) -> T {
    // f(lo) < 0 <= f(hi)
    let tol = T::lit(1e-12);
    for _ in 0..400 {
        if hi - lo <= tol.max(T::epsilon() * hi.abs() * T::lit(4.0)) {
            break;
        }
        let mid = (lo + hi) / T::lit(2.0);
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Smallest `t > 0` with `g(t) = 1`.
///
/// Scans forward on a grid fine enough to resolve the `exp(-C a t)` scale
/// while that term matters, then the `exp(-2 a t)` scale.
/// Between grid points where `g - 1` stays negative, a local maximum (found
/// from the sign change of `g'`) that reaches zero is caught as well, so a
/// near-tangent first root is not skipped. The bracket is then bisected.
pub fn t0_root<T: Real>(alpha: T, c: T, eps: T, variant: ExponentVariant) -> Result<T> {
    check_params(alpha, c, eps)?;
    let h = |t: T| t0_equation(t, alpha, c, eps, variant).0 - T::one();
    let dh = |t: T| t0_equation(t, alpha, c, eps, variant).1;
    let fastest = alpha
        * c.max(T::lit(2.0)).max(match variant {
            ExponentVariant::Cooperative => c,
            ExponentVariant::Literal => c * c,
        });
    let fast_step = (T::one() / (T::lit(2000.0) * fastest)).min(T::lit(1e-3));
    // past ~50 fast time constants only the 2a scale is left
    let fast_until = T::lit(50.0) / fastest;
    let slow_step = (T::one() / (T::lit(4000.0) * alpha)).min(T::lit(1e-3)).max(fast_step);
    let t_max = T::lit(1e6);

    let mut lo = T::zero();
    let (mut h_lo, mut dh_lo) = (h(lo), dh(lo));
    let mut step = fast_step;
    while lo < t_max {
        // fine while the fast term lives, uniform up to t = 2, then geometric
        if lo > T::lit(2.0) {
            step = step * T::lit(1.5);
        } else if lo >= fast_until {
            step = slow_step;
        }
        let hi = lo + step;
        let (h_hi, dh_hi) = (h(hi), dh(hi));
        if h_hi >= T::zero() {
            return Ok(bisect(lo, hi, h));
        }
        if dh_lo > T::zero() && dh_hi < T::zero() {
            let peak = bisect(lo, hi, |t| -dh(t));
            if h(peak) >= T::zero() {
                return Ok(bisect(lo, peak, h));
            }
        }
        debug_assert!(h_lo < T::zero());
        lo = hi;
        h_lo = h_hi;
        dh_lo = dh_hi;
    }
    let _ = h_lo;
    Err(Error::NoRoot {
        t_max: t_max.to_f64().unwrap_or(f64::NAN),
    })
}

/// `R = 1 - s0 exp(-2 a T0)`.
pub fn final_size_closed<T: Real>(alpha: T, c: T, eps: T, variant: ExponentVariant) -> Result<T> {
    let t0 = t0_root(alpha, c, eps, variant)?;
    let s0 = T::one() - eps;
    Ok((T::one() - s0 * (-T::lit(2.0) * alpha * t0).exp())
        .max(T::zero())
        .min(T::one()))
}

/// Default `eps` sequence `1e-2, 1e-3, ..., 1e-8`.
pub fn default_eps_sequence<T: Real>() -> Vec<T> {
    (2..=8).map(|k| T::lit(10f64.powi(-k))).collect()
}

/// Final sizes along a vanishing `eps` sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate<T> {
    pub eps: Vec<T>,
    pub values: Vec<T>,
    /// Value at the smallest `eps`.
    pub last: T,
    /// Consecutive differences `values[i+1] - values[i]`.
    pub diffs: Vec<T>,
}

impl<T: Real> LimitEstimate<T> {
    /// Whether the consecutive differences shrink towards the end of the sequence.
    pub fn settling(&self) -> bool {
        match self.diffs.as_slice() {
            [.., a, b] => b.abs() <= a.abs() || b.abs() < T::lit(1e-9),
            _ => true,
        }
    }
}

/// Estimates `lim_{eps -> 0} R(alpha, C, eps)`.
pub fn r_star<T: Real>(alpha: T, c: T, eps_sequence: &[T]) -> Result<LimitEstimate<T>> {
    if eps_sequence.is_empty() || eps_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig(
            "eps sequence must be non-empty and strictly decreasing".into(),
        ));
    }
    let values = eps_sequence
        .iter()
        .map(|&e| final_size_closed(alpha, c, e, ExponentVariant::Cooperative))
        .collect::<Result<Vec<T>>>()?;
    let diffs = values.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(LimitEstimate {
        eps: eps_sequence.to_vec(),
        last: *values.last().expect("non-empty"),
        values,
        diffs,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let n = T::from_usize_lossy(xs.len());
    let lx: Vec<T> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ly.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (x, y) in lx.iter().zip(&ly) {
        sxy = sxy + (*x - mx) * (*y - my);
        sxx = sxx + (*x - mx) * (*x - mx);
    }
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseScanResult<T> {
    pub alpha_grid: Vec<T>,
    pub final_sizes: Vec<T>,
    pub jump_detected: bool,
    /// Grid index at the lower end of the detected jump.
    pub jump_index: Option<usize>,
    pub alpha0_estimate: Option<T>,
    pub jump_size: Option<T>,
}

/// A consecutive rise counts as a jump when it exceeds both this absolute
/// size and `JUMP_TREND_FACTOR` times the median rise around it.
pub const JUMP_MIN_SIZE: f64 = 0.01;
pub const JUMP_TREND_FACTOR: f64 = 10.0;
const JUMP_WINDOW: usize = 3;
const ALPHA0_TOL: f64 = 1e-6;

fn median<T: Real>(mut v: Vec<T>) -> T {
    if v.is_empty() {
        return T::zero();
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

/// Final sizes across an ascending `alpha` grid, with jump detection and
/// bisection refinement of the jump location.
pub fn scan_alpha<T: Real>(c: T, eps: T, alpha_grid: &[T]) -> Result<PhaseScanResult<T>> {
    if alpha_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("alpha grid must be strictly ascending".into()));
    }
    let size = |a: T| final_size_closed(a, c, eps, ExponentVariant::Cooperative);
    let final_sizes = alpha_grid.iter().map(|&a| size(a)).collect::<Result<Vec<T>>>()?;
    let diffs: Vec<T> = final_sizes.windows(2).map(|w| w[1] - w[0]).collect();

    let mut best: Option<usize> = None;
    for (i, &d) in diffs.iter().enumerate() {
        let lo = i.saturating_sub(JUMP_WINDOW);
        let hi = (i + JUMP_WINDOW + 1).min(diffs.len());
        let neighbours: Vec<T> = (lo..hi).filter(|&j| j != i).map(|j| diffs[j].abs()).collect();
        let trend = median(neighbours);
        if d > T::lit(JUMP_MIN_SIZE) && d > T::lit(JUMP_TREND_FACTOR) * trend && best.is_none_or(|b| d > diffs[b]) {
            best = Some(i);
        }
    }

    let (mut alpha0_estimate, mut jump_size) = (None, None);
    if let Some(i) = best {
        let (mut lo, mut hi) = (alpha_grid[i], alpha_grid[i + 1]);
        let (mut r_lo, mut r_hi) = (final_sizes[i], final_sizes[i + 1]);
        let level = (r_lo + r_hi) / T::lit(2.0);
        while hi - lo > T::lit(ALPHA0_TOL) {
            let mid = (lo + hi) / T::lit(2.0);
            let r = size(mid)?;
            if r < level {
                lo = mid;
                r_lo = r;
            } else {
                hi = mid;
                r_hi = r;
            }
        }
        alpha0_estimate = Some((lo + hi) / T::lit(2.0));
        jump_size = Some(r_hi - r_lo);
    }

    Ok(PhaseScanResult {
        alpha_grid: alpha_grid.to_vec(),
        final_sizes,
        jump_detected: best.is_some(),
        jump_index: best,
        alpha0_estimate,
        jump_size,
    })
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(count - 1))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rhs_examples() {
        let d = ode_rhs(
            &MeanFieldState {
                s: 0.99,
                q: 0.005,
                x: 0.005,
            },
            1.0,
            2.0,
        );
        assert_relative_eq!(d.s, -0.0099, epsilon = 1e-15);
        assert_relative_eq!(d.q, 0.0049, epsilon = 1e-15);
        assert_relative_eq!(d.x, 0.0, epsilon = 1e-15);
        let z = ode_rhs(&MeanFieldState { s: 0.4, q: 0.3, x: 0.0 }, 2.0, 3.0);
        assert_eq!((z.s, z.q, z.x), (0.0, 0.0, 0.0));
        let r = ode_rhs(&MeanFieldState { s: 0.0, q: 0.0, x: 0.2 }, 2.0, 3.0);
        assert_relative_eq!(r.x, -0.2);
    }

    #[test]
    fn equation_starts_below_one() {
        for (a, c, e) in [(0.5, 3.0, 0.01), (2.0, 1.0, 1e-4), (1.0, 2.0, 0.3)] {
            let (g, _) = t0_equation(0.0, a, c, e, ExponentVariant::Cooperative);
            assert_relative_eq!(g, 1.0 - e / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for c in [1.0, 2.0, 2.0 + 1e-8, 3.5] {
            for t in [0.01, 0.3, 0.9] {
                let g = |t| t0_equation(t, 1.3, c, 0.01, ExponentVariant::Cooperative).0;
                let fd = (g(t + 1e-6) - g(t - 1e-6)) / 2e-6;
                let (_, dg) = t0_equation(t, 1.3, c, 0.01, ExponentVariant::Cooperative);
                assert_relative_eq!(dg, fd, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn subcritical_x_decreases() {
        let traj = integrate(0.5, 1.0, 0.01, 20.0, &StepControl::default()).unwrap();
        for w in traj.states.windows(2) {
            assert!(w[1].x <= w[0].x);
            assert!(w[1].s <= w[0].s);
        }
    }

    #[test]
    fn single_disease_limit_final_size() {
        // C = 1: each disease is an SIR with rate alpha; with eps -> 0 the
        // susceptible-to-A fraction z solves z = exp(-alpha (1 - z)), and s = z^2.
        let alpha = 2.0_f64;
        let mut z: f64 = 0.5;
        for _ in 0..200 {
            z = (-alpha * (1.0 - z)).exp();
        }
        let r = final_size_ode(alpha, 1.0, 1e-7).unwrap();
        assert_relative_eq!(r, 1.0 - z * z, epsilon = 1e-5);
        assert!(1.0 - r < (1.0 - 0.001) * 0.5);
    }

    #[test]
    fn deep_subcritical_outbreak_is_tiny() {
        assert!(final_size_ode(0.1, 1.0, 1e-6).unwrap() <= 1e-4);
    }

    #[test]
    fn ode_and_closed_form_agree_on_a_few_points() {
        for (a, c, e) in [(0.5f64, 1.0, 1e-2), (1.5, 3.0, 1e-4), (3.0, 5.0, 1e-2)] {
            let ode = final_size_ode(a, c, e).unwrap();
            let closed = final_size_closed(a, c, e, ExponentVariant::Cooperative).unwrap();
            assert!((ode - closed).abs() < 1e-6, "{a} {c} {e}: {ode} vs {closed}");
        }
    }

    #[test]
    fn removable_singularity_at_two() {
        let at = |c: f64| final_size_closed(1.2, c, 1e-3, ExponentVariant::Cooperative).unwrap();
        let (lo, mid, hi) = (at(2.0 - 1e-4), at(2.0), at(2.0 + 1e-4));
        assert!((lo - mid).abs() < 1e-3 && (hi - mid).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(final_size_ode(0.0, 1.0, 0.1).is_err());
        assert!(final_size_ode(1.0, 0.5, 0.1).is_err());
        assert!(t0_root(1.0, 3.0, 1.0, ExponentVariant::Cooperative).is_err());
        assert!(r_star(1.0, 1.5, &[1e-3, 1e-2]).is_err());
        assert!(scan_alpha(1.5, 1e-3, &[1.0, 0.9]).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.9, 1.1, 5);
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 0.9);
        assert_relative_eq!(v[4], 1.1);
    }

    #[test]
    fn f32_closed_form_tracks_f64() {
        let a = final_size_closed(1.5f32, 3.0, 1e-2, ExponentVariant::Cooperative).unwrap() as f64;
        let b = final_size_closed(1.5f64, 3.0, 1e-2, ExponentVariant::Cooperative).unwrap();
        assert!((a - b).abs() < 1e-4);
    }
}
