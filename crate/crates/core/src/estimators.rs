//! Position estimators: AoA and weighted AoA line fits, Gauss-Newton RSS
//! refinement and their hybrid.
//!
//! The AoA family treats the strongest LED of each VAP as a bearing: the
//! receiver should lie on the line through the LED along its normal. Each
//! line contributes `A = I - n n^T` and `b = A r`, and the estimate minimizes
//! `sum ||A theta - b||^2`, optionally weighted by the observed RSS.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::channel::{gain_matrix_at, jacobian_at};
use crate::error::{Error, Result};
use crate::frontend::ObservationVector;
use crate::linalg::pseudo_inverse;
use crate::scene::Scenario;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Aoa,
    Waoa,
    WaoaRss,
    CentroidRss,
    RandomRss,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Aoa,
        Method::Waoa,
        Method::RandomRss,
        Method::CentroidRss,
        Method::WaoaRss,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Aoa => "AoA",
            Method::Waoa => "WAoA",
            Method::WaoaRss => "WAoA+RSS",
            Method::CentroidRss => "C+RSS",
            Method::RandomRss => "RND+RSS",
        }
    }

    pub fn from_label(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.label() == s)
    }

    pub fn is_iterative(self) -> bool {
        matches!(self, Method::WaoaRss | Method::CentroidRss | Method::RandomRss)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub position: Vec3,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    /// Iteration stopped on a rank-deficient Jacobian or a non-finite value.
    pub diverged: bool,
    /// `||s - p(theta_i)||` for every iterate, starting point included.
    pub residuals: Vec<f64>,
    pub op_count: u64,
    pub start: Vec3,
    /// The weighted AoA start was singular and the room centroid was used.
    pub centroid_fallback: bool,
}

/// Index of the strongest LED in each VAP; ties go to the lowest index.
pub fn select_strongest(s: &ObservationVector) -> Vec<usize> {
    (0..s.vaps)
        .map(|k| {
            let mut best = 0;
            for (m, v) in s.vap(k).iter().enumerate() {
                if *v > s.vap(k)[best] {
                    best = m;
                }
            }
            best
        })
        .collect()
}

/// Line-fit system of the selected LEDs.
#[derive(Debug, Clone, PartialEq)]
pub struct AoaSystem {
    pub projectors: Vec<Matrix3<f64>>,
    pub intercepts: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl AoaSystem {
    /// Builds the system for `selection[k]` = LED of VAP `k`; weights default to 1.
    pub fn new(scenario: &Scenario, selection: &[usize]) -> Self {
        let mut projectors = Vec::with_capacity(selection.len());
        let mut intercepts = Vec::with_capacity(selection.len());
        for (k, m) in selection.iter().enumerate() {
            let led = scenario.led(k, *m);
            let a = Matrix3::identity() - led.normal * led.normal.transpose();
            intercepts.push(a * led.position);
            projectors.push(a);
        }
        let weights = vec![1.0; selection.len()];
        Self {
            projectors,
            intercepts,
            weights,
        }
    }

    /// Uses the selected observations as weights; negative readings count as 0.
    pub fn with_observed_weights(mut self, s: &ObservationVector, selection: &[usize]) -> Self {
        self.weights = selection
            .iter()
            .enumerate()
            .map(|(k, m)| s.get(k, *m).max(0.0))
            .collect();
        self
    }

    pub fn stacked(&self) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.projectors.len();
        let mut a = DMatrix::zeros(3 * n, 3);
        let mut b = DVector::zeros(3 * n);
        for (i, (p, r)) in self.projectors.iter().zip(&self.intercepts).enumerate() {
            a.view_mut((3 * i, 0), (3, 3)).copy_from(p);
            b.rows_mut(3 * i, 3).copy_from(r);
        }
        (a, b)
    }

    pub fn weighted(&self) -> (Matrix3<f64>, Vec3) {
        let mut a = Matrix3::zeros();
        let mut b = Vec3::zeros();
        for ((p, r), w) in self.projectors.iter().zip(&self.intercepts).zip(&self.weights) {
            a += p * *w;
            b += r * *w;
        }
        (a, b)
    }
}

fn solve_full_rank(a: &DMatrix<f64>, b: &DVector<f64>, what: &str) -> Result<Vec3> {
    if !a.iter().all(|v| v.is_finite()) || !b.iter().all(|v| v.is_finite()) {
        return Err(Error::Singular(format!("{what} system is not finite")));
    }
    let pinv = pseudo_inverse(a);
    if pinv.rank < 3 {
        return Err(Error::Singular(format!("{what} system has rank {}", pinv.rank)));
    }
    let x = &pinv.matrix * b;
    Ok(Vec3::new(x[0], x[1], x[2]))
}

/// Unweighted least-squares intersection of the selected LED axes.
pub fn aoa_estimate(scenario: &Scenario, selection: &[usize]) -> Result<Vec3> {
    let (a, b) = AoaSystem::new(scenario, selection).stacked();
    solve_full_rank(&a, &b, "AoA")
}

/// RSS-weighted intersection `A_W^+ b_W`.
///
/// Each `A` is a symmetric idempotent projector, so `sum w A^T A = sum w A`
/// and this is the exact minimizer of `sum w ||A theta - b||^2`.
pub fn waoa_estimate(scenario: &Scenario, s: &ObservationVector, selection: &[usize]) -> Result<Vec3> {
    let sys = AoaSystem::new(scenario, selection).with_observed_weights(s, selection);
    waoa_solve(&sys)
}

pub fn waoa_solve(sys: &AoaSystem) -> Result<Vec3> {
    let (a, b) = sys.weighted();
    let a = DMatrix::from_column_slice(3, 3, a.as_slice());
    let b = DVector::from_column_slice(b.as_slice());
    solve_full_rank(&a, &b, "weighted AoA")
}

/// Multiplication/division counter for the reference solvers.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCounter(pub u64);

impl OpCounter {
    fn mul(&mut self, a: f64, b: f64) -> f64 {
        self.0 += 1;
        a * b
    }

    fn div(&mut self, a: f64, b: f64) -> f64 {
        self.0 += 1;
        a / b
    }
}

/// In-place Gauss-Jordan inverse without pivoting (SPD input), `n^3` mul/div.
fn invert3_counted(g: &mut [[f64; 3]; 3], ops: &mut OpCounter) -> Result<()> {
    for k in 0..3 {
        if !(g[k][k].abs() > 0.0) || !g[k][k].is_finite() {
            return Err(Error::Singular("zero pivot in normal equations".into()));
        }
        let p = ops.div(1.0, g[k][k]);
        g[k][k] = p;
        for j in 0..3 {
            if j != k {
                g[k][j] = ops.mul(g[k][j], p);
            }
        }
        for i in 0..3 {
            if i == k {
                continue;
            }
            let f = g[i][k];
            for j in 0..3 {
                if j != k {
                    g[i][j] -= ops.mul(f, g[k][j]);
                }
            }
            g[i][k] = -ops.mul(f, p);
        }
    }
    Ok(())
}

/// `G^-1 A^T (W-stacked c)` with `G = W^T A`, every product counted.
fn normal_equations_counted(
    sys: &AoaSystem,
    weighted: bool,
    ops: &mut OpCounter,
) -> Result<Vec3> {
    let n = sys.projectors.len();
    // W = beta A and c = beta b per line
    let (w, c): (Vec<Matrix3<f64>>, Vec<Vec3>) = if weighted {
        sys.projectors
            .iter()
            .zip(&sys.intercepts)
            .zip(&sys.weights)
            .map(|((a, b), beta)| {
                let mut wa = Matrix3::zeros();
                for i in 0..3 {
                    for j in 0..3 {
                        wa[(i, j)] = ops.mul(*beta, a[(i, j)]);
                    }
                }
                let wb = Vec3::new(ops.mul(*beta, b[0]), ops.mul(*beta, b[1]), ops.mul(*beta, b[2]));
                (wa, wb)
            })
            .unzip()
    } else {
        (sys.projectors.clone(), sys.intercepts.clone())
    };

    // G = W^T A, 27 per line
    let mut g = [[0.0; 3]; 3];
    for l in 0..n {
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for r in 0..3 {
                    acc += ops.mul(w[l][(r, i)], sys.projectors[l][(r, j)]);
                }
                g[i][j] += acc;
            }
        }
    }
    invert3_counted(&mut g, ops)?;

    // P = G^-1 A^T, 27 per line; theta = P c, 9 per line
    let mut theta = Vec3::zeros();
    for l in 0..n {
        let a = &sys.projectors[l];
        let mut p = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for r in 0..3 {
                    acc += ops.mul(g[i][r], a[(j, r)]);
                }
                p[(i, j)] = acc;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                theta[i] += ops.mul(p[(i, j)], c[l][j]);
            }
        }
    }
    Ok(theta)
}

/// AoA through counted normal equations; returns the estimate and its op count.
pub fn aoa_estimate_counted(scenario: &Scenario, selection: &[usize]) -> Result<(Vec3, u64)> {
    let sys = AoaSystem::new(scenario, selection);
    let mut ops = OpCounter::default();
    let theta = normal_equations_counted(&sys, false, &mut ops)?;
    Ok((theta, ops.0))
}

/// Weighted AoA through counted normal equations.
pub fn waoa_estimate_counted(
    scenario: &Scenario,
    s: &ObservationVector,
    selection: &[usize],
) -> Result<(Vec3, u64)> {
    let sys = AoaSystem::new(scenario, selection).with_observed_weights(s, selection);
    let mut ops = OpCounter::default();
    let theta = normal_equations_counted(&sys, true, &mut ops)?;
    Ok((theta, ops.0))
}

/// Closed-form multiplication/division counts.
pub fn op_count(method: Method, vaps: usize, leds_per_vap: usize, n_l: f64, iterations: usize) -> u64 {
    let k = vaps as u64;
    let rss = iterations as u64 * rss_iteration_ops(vaps, leds_per_vap, n_l);
    match method {
        Method::Aoa => 63 * k + 27,
        Method::Waoa => 75 * k + 27,
        Method::WaoaRss => 75 * k + 27 + rss,
        Method::CentroidRss | Method::RandomRss => rss,
    }
}

/// Operations of one Gauss-Newton iteration, `MK(3 n_L + 99)/2 + 27`.
pub fn rss_iteration_ops(vaps: usize, leds_per_vap: usize, n_l: f64) -> u64 {
    let mk = (vaps * leds_per_vap) as f64;
    (mk * (3.0 * n_l + 99.0) / 2.0 + 27.0).round() as u64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RssParams {
    /// Step size eta.
    pub step: f64,
    /// Stop when the update norm falls below this, m.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Run exactly `max_iterations` steps, ignoring the tolerance.
    pub fixed_iterations: bool,
}

impl Default for RssParams {
    fn default() -> Self {
        Self {
            step: 0.3,
            tolerance: 1e-5,
            max_iterations: 200,
            fixed_iterations: false,
        }
    }
}

impl RssParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::Config("step size must lie in (0, 1]".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("at least one iteration is required".into()));
        }
        Ok(())
    }
}

/// Margin around the room inside which a stopped run counts as converged, m.
pub const CONVERGENCE_MARGIN: f64 = 0.5;

fn residual_norm(scenario: &Scenario, s: &ObservationVector, theta: &Vec3) -> Option<(f64, DVector<f64>)> {
    let gm = gain_matrix_at(scenario, theta).ok()?;
    let r = DVector::from_iterator(s.len(), s.values.iter().zip(&gm.values).map(|(a, b)| a - b));
    let n = r.norm();
    n.is_finite().then_some((n, r))
}

/// Damped Gauss-Newton on `||s - p(theta)||` in the normalized gain domain.
pub fn rss_refine(
    scenario: &Scenario,
    s: &ObservationVector,
    start: Vec3,
    params: &RssParams,
    method: Method,
) -> EstimateReport {
    let mut report = EstimateReport {
        position: start,
        method,
        iterations: 0,
        converged: false,
        diverged: false,
        residuals: Vec::new(),
        op_count: 0,
        start,
        centroid_fallback: false,
    };
    if !start.iter().all(|v| v.is_finite()) {
        report.diverged = true;
        return report;
    }
    let Some((r0, mut r)) = residual_norm(scenario, s, &start) else {
        report.diverged = true;
        return report;
    };
    report.residuals.push(r0);

    let mut theta = start;
    let mut stopped = false;
    while report.iterations < params.max_iterations {
        let Ok(rows) = jacobian_at(scenario, &theta, 1.0) else {
            report.diverged = true;
            break;
        };
        if rows.iter().filter(|row| row.iter().any(|v| *v != 0.0)).count() < 3
            || !rows.iter().all(|row| row.iter().all(|v| v.is_finite()))
        {
            report.diverged = true;
            break;
        }
        let j = DMatrix::from_fn(rows.len(), 3, |i, c| rows[i][c]);
        let pinv = pseudo_inverse(&j);
        if pinv.rank < 3 {
            report.diverged = true;
            break;
        }
        let dx = (&pinv.matrix * &r) * params.step;
        let step = Vec3::new(dx[0], dx[1], dx[2]);
        let next = theta + step;
        if !next.iter().all(|v| v.is_finite()) {
            report.diverged = true;
            break;
        }
        theta = next;
        report.iterations += 1;
        match residual_norm(scenario, s, &theta) {
            Some((n, res)) => {
                report.residuals.push(n);
                r = res;
            }
            None => {
                // the iterate is still recorded; the history ends here
                report.residuals.push(f64::NAN);
                report.diverged = true;
                break;
            }
        }
        if !params.fixed_iterations && step.norm() < params.tolerance {
            stopped = true;
            break;
        }
    }
    report.position = theta;
    let inside = scenario.contains(&theta, CONVERGENCE_MARGIN);
    report.converged = !report.diverged && inside && (stopped || params.fixed_iterations);
    report.op_count = report.iterations as u64
        * rss_iteration_ops(scenario.vaps, scenario.leds_per_vap, scenario.lambertian_mode);
    report
}

/// How the Gauss-Newton stage is started.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartPolicy {
    /// Weighted AoA estimate, falling back to the room centroid.
    Waoa,
    Centroid,
    /// A caller-drawn point (uniform in the room for the RND policy).
    Given(Vec3),
}

impl StartPolicy {
    pub fn method(self) -> Method {
        match self {
            StartPolicy::Waoa => Method::WaoaRss,
            StartPolicy::Centroid => Method::CentroidRss,
            StartPolicy::Given(_) => Method::RandomRss,
        }
    }
}

/// Start point followed by RSS refinement.
pub fn hybrid_locate(
    scenario: &Scenario,
    s: &ObservationVector,
    policy: StartPolicy,
    params: &RssParams,
) -> EstimateReport {
    let (start, fallback, pre_ops) = match policy {
        StartPolicy::Waoa => {
            let sel = select_strongest(s);
            match waoa_estimate(scenario, s, &sel) {
                Ok(p) => (p, false, op_count(Method::Waoa, scenario.vaps, scenario.leds_per_vap, 0.0, 0)),
                Err(_) => (scenario.centroid(), true, 0),
            }
        }
        StartPolicy::Centroid => (scenario.centroid(), false, 0),
        StartPolicy::Given(p) => (p, false, 0),
    };
    let mut report = rss_refine(scenario, s, start, params, policy.method());
    report.centroid_fallback = fallback;
    report.op_count += pre_ops;
    report
}

/// Stand-alone AoA or WAoA estimate wrapped in a report.
pub fn direct_estimate(scenario: &Scenario, s: &ObservationVector, method: Method) -> Result<EstimateReport> {
    let sel = select_strongest(s);
    let position = match method {
        Method::Aoa => aoa_estimate(scenario, &sel)?,
        Method::Waoa => waoa_estimate(scenario, s, &sel)?,
        _ => return Err(Error::Config(format!("{} is iterative", method.label()))),
    };
    let residuals = residual_norm(scenario, s, &position)
        .map(|(n, _)| vec![n])
        .unwrap_or_else(|| vec![f64::NAN]);
    Ok(EstimateReport {
        position,
        method,
        iterations: 0,
        converged: scenario.contains(&position, CONVERGENCE_MARGIN),
        diverged: false,
        residuals,
        op_count: op_count(method, scenario.vaps, scenario.leds_per_vap, scenario.lambertian_mode, 0),
        start: position,
        centroid_fallback: false,
    })
}
