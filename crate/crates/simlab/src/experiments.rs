//! Monte Carlo experiments. Each realization draws from its own generator,
//! seeded by `split(base_seed, index)`, and results are gathered in index
//! order so the output does not depend on the worker count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use vlc_core::channel::{electric_gain, GainMatrix};
use vlc_core::estimators::{
    aoa_estimate_counted, direct_estimate, hybrid_locate, op_count, rss_iteration_ops,
    select_strongest, waoa_estimate_counted, EstimateReport, Method, RssParams, StartPolicy,
};
use vlc_core::frontend::ObservationVector;
use vlc_core::ofdm::{
    build_frame, channel_capacity, demodulate_rss, qpsk, remove_cyclic_prefix, superpose, Mode,
};
use vlc_core::scene::{build_scenario, Scenario};
use vlc_core::Vec3;

use crate::error::{SimError, SimResult};
use crate::metrics::{aggregate, mode_label, MetricRow, SummaryRow};
use crate::model::{OperatingPoint, World};
use crate::seed::{par_map, split};

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<MetricRow>,
    pub summary: Vec<SummaryRow>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn find(&self, group: &str, method: &str, mode: &str) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.group == group && s.method == method && s.mode == mode)
    }
}

fn failed_report(scenario: &Scenario, method: Method) -> EstimateReport {
    let c = scenario.centroid();
    EstimateReport {
        position: c,
        method,
        iterations: 0,
        converged: false,
        diverged: true,
        residuals: Vec::new(),
        op_count: 0,
        start: c,
        centroid_fallback: true,
    }
}

/// Runs one estimator on an observation. `random_start` feeds RND+RSS.
pub fn locate(
    scenario: &Scenario,
    s: &ObservationVector,
    method: Method,
    random_start: Vec3,
    params: &RssParams,
) -> EstimateReport {
    match method {
        Method::Aoa | Method::Waoa => {
            direct_estimate(scenario, s, method).unwrap_or_else(|_| failed_report(scenario, method))
        }
        Method::WaoaRss => hybrid_locate(scenario, s, StartPolicy::Waoa, params),
        Method::CentroidRss => hybrid_locate(scenario, s, StartPolicy::Centroid, params),
        Method::RandomRss => hybrid_locate(scenario, s, StartPolicy::Given(random_start), params),
    }
}

/// Receiver-plane grid at cell centres.
pub fn grid(room: &Vec3, pitch: f64, z: f64) -> Vec<Vec3> {
    let nx = (room.x / pitch + 1e-9).floor() as usize;
    let ny = (room.y / pitch + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(Vec3::new(pitch * (i as f64 + 0.5), pitch * (j as f64 + 0.5), z));
        }
    }
    out
}

pub fn plane_label(z: f64) -> String {
    format!("z={z:.2}")
}

fn node_label(p: &Vec3) -> String {
    format!("{}/x={:.3},y={:.3}", plane_label(p.z), p.x, p.y)
}

struct Probe {
    position: Vec3,
    gains: GainMatrix,
    variance: f64,
}

fn probe(world: &World, position: Vec3) -> SimResult<Probe> {
    let gains = world.gains(&position)?;
    let variance = world.noise_variance(&gains);
    Ok(Probe {
        position,
        gains,
        variance,
    })
}

/// Every estimator at the probe positions, in both modes.
pub fn table2(world: &World) -> SimResult<Outcome> {
    let cfg = &world.cfg;
    let e = &cfg.experiment;
    let ops: Vec<(Mode, OperatingPoint)> = cfg
        .modes()
        .into_iter()
        .map(|m| world.operating_point(m).map(|op| (m, op)))
        .collect::<SimResult<_>>()?;
    let probes: Vec<Probe> = e
        .positions
        .iter()
        .map(|p| probe(world, Vec3::new(p[0], p[1], p[2])))
        .collect::<SimResult<_>>()?;
    let params = cfg.rss_params();
    let sc = &world.scenario;

    let per = par_map(e.threads, e.table2_realizations, |r| {
        let seed = split(e.seed, r as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for (pi, pr) in probes.iter().enumerate() {
            let start = world.random_point(&mut rng, sc.room.z);
            // both modes see the same standard-normal draws
            let draws = rng.clone();
            for (mode, op) in &ops {
                let mut local = draws.clone();
                let s = world.observe(&pr.gains, op.omega_sigma(pr.variance), &mut local);
                rng = local;
                for method in Method::ALL {
                    let rep = locate(sc, &s, method, start, &params);
                    out.push(MetricRow::new("table2", format!("r{}", pi + 1), pr.position, *mode, 0.0, &rep, seed));
                }
            }
        }
        out
    })?;
    let mut rows: Vec<MetricRow> = per.into_iter().flatten().collect();
    let summary = aggregate(&mut rows);
    Ok(Outcome {
        rows,
        summary,
        notes: Vec::new(),
    })
}

/// Convergence statistics over uniformly drawn receiver positions.
pub fn converge(world: &World) -> SimResult<Outcome> {
    let cfg = &world.cfg;
    let e = &cfg.experiment;
    let mode = cfg.single_mode();
    let op = world.operating_point(mode)?;
    let params = cfg.rss_params();
    let sc = &world.scenario;
    let per = par_map(e.threads, e.converge_realizations, |r| -> SimResult<Vec<MetricRow>> {
        let seed = split(e.seed, r as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = world.random_point(&mut rng, e.converge_z_max);
        let start = world.random_point(&mut rng, sc.room.z);
        let pr = probe(world, truth)?;
        let s = world.observe(&pr.gains, op.omega_sigma(pr.variance), &mut rng);
        Ok([Method::WaoaRss, Method::CentroidRss, Method::RandomRss]
            .into_iter()
            .map(|m| MetricRow::new("converge", "uniform", truth, mode, 0.0, &locate(sc, &s, m, start, &params), seed))
            .collect())
    })?;
    let mut rows = Vec::new();
    for r in per {
        rows.extend(r?);
    }
    let summary = aggregate(&mut rows);
    Ok(Outcome {
        rows,
        summary,
        notes: Vec::new(),
    })
}

fn near_corner(room: &Vec3, p: &Vec3, radius: f64) -> bool {
    [(0.0, 0.0), (room.x, 0.0), (0.0, room.y), (room.x, room.y)]
        .iter()
        .any(|(cx, cy)| (p.x - cx).hypot(p.y - cy) <= radius)
}

fn near_centre(room: &Vec3, p: &Vec3, radius: f64) -> bool {
    (p.x - room.x / 2.0).hypot(p.y - room.y / 2.0) <= radius
}

/// Hybrid-locator RMSE surfaces on horizontal planes, fixed iteration count.
pub fn surface(world: &World) -> SimResult<Outcome> {
    let cfg = &world.cfg;
    let e = &cfg.experiment;
    let ops: Vec<(Mode, OperatingPoint)> = cfg
        .modes()
        .into_iter()
        .map(|m| world.operating_point(m).map(|op| (m, op)))
        .collect::<SimResult<_>>()?;
    let room = world.scenario.room;
    let nodes: Vec<Probe> = e
        .planes
        .iter()
        .flat_map(|z| grid(&room, e.pitch, *z))
        .map(|p| probe(world, p))
        .collect::<SimResult<_>>()?;
    let params = cfg.surface_params();
    let reps = e.surface_realizations;
    let sc = &world.scenario;

    let per = par_map(e.threads, nodes.len() * reps, |t| {
        let pr = &nodes[t / reps];
        let seed = split(e.seed, t as u64);
        let draws = ChaCha8Rng::seed_from_u64(seed);
        ops.iter()
            .map(|(mode, op)| {
                let s = world.observe(&pr.gains, op.omega_sigma(pr.variance), &mut draws.clone());
                let rep = hybrid_locate(sc, &s, StartPolicy::Waoa, &params);
                MetricRow::new("surface", node_label(&pr.position), pr.position, *mode, 0.0, &rep, seed)
            })
            .collect::<Vec<_>>()
    })?;
    let mut rows: Vec<MetricRow> = per.into_iter().flatten().collect();
    let mut summary = aggregate(&mut rows);

    let method = Method::WaoaRss.label();
    let mut notes = Vec::new();
    for z in &e.planes {
        let plane = plane_label(*z);
        for (mode, _) in &ops {
            let ml = mode_label(*mode);
            let node_rmse: Vec<f64> = summary
                .iter()
                .filter(|s| s.mode == ml && s.group.starts_with(&format!("{plane}/")))
                .map(|s| s.rmse)
                .collect();
            let mean = node_rmse.iter().sum::<f64>() / node_rmse.len() as f64;
            let in_plane = |r: &&MetricRow| r.mode == ml && (r.z - z).abs() < 1e-9;
            let central = SummaryRow::over(
                "surface",
                &format!("{plane}/central"),
                method,
                ml,
                0.0,
                rows.iter()
                    .filter(in_plane)
                    .filter(|r| near_centre(&room, &Vec3::new(r.x, r.y, r.z), e.region_radius)),
            );
            let corner = SummaryRow::over(
                "surface",
                &format!("{plane}/corner"),
                method,
                ml,
                0.0,
                rows.iter()
                    .filter(in_plane)
                    .filter(|r| near_corner(&room, &Vec3::new(r.x, r.y, r.z), e.region_radius)),
            );
            notes.push(format!(
                "{plane} {ml}: plane-mean RMSE {:.4} mm, central {:.4} mm, corner {:.4} mm",
                mean * 1e3,
                central.rmse * 1e3,
                corner.rmse * 1e3
            ));
            summary.push(SummaryRow::value("surface", &format!("{plane}/plane-mean"), method, ml, 0.0, mean));
            summary.push(central);
            summary.push(corner);
        }
    }
    Ok(Outcome { rows, summary, notes })
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let (a, b) = (min.log10(), max.log10());
    (0..points)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
        .collect()
}

/// Plane-mean RMSE against a fixed receiver noise variance.
pub fn noise_sweep(world: &World) -> SimResult<Outcome> {
    let cfg = &world.cfg;
    let e = &cfg.experiment;
    let mode = cfg.single_mode();
    let op = world.operating_point(mode)?;
    let room = world.scenario.room;
    let nodes: Vec<Probe> = e
        .planes
        .iter()
        .flat_map(|z| grid(&room, e.noise_pitch, *z))
        .map(|p| probe(world, p))
        .collect::<SimResult<_>>()?;
    let variances = log_grid(e.noise_min, e.noise_max, e.noise_points);
    let params = cfg.surface_params();
    let reps = e.noise_realizations;
    let per_point = nodes.len() * reps;
    let sc = &world.scenario;

    let rows = par_map(e.threads, variances.len() * per_point, |t| {
        let var = variances[t / per_point];
        let local = t % per_point;
        let pr = &nodes[local / reps];
        // common draws across noise levels
        let seed = split(e.seed, local as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = world.observe(&pr.gains, op.omega_sigma(var), &mut rng);
        let rep = hybrid_locate(sc, &s, StartPolicy::Waoa, &params);
        MetricRow::new("noise-sweep", node_label(&pr.position), pr.position, mode, var, &rep, seed)
    })?;
    let mut rows = rows;
    let mut summary = aggregate(&mut rows);
    let method = Method::WaoaRss.label();
    let ml = mode_label(mode);

    let mut means = Vec::with_capacity(variances.len());
    for i in 0..variances.len() {
        let p = rows[i * per_point].parameter;
        let node_rmse: Vec<f64> = summary
            .iter()
            .filter(|s| s.parameter == p && s.method == method)
            .map(|s| s.rmse)
            .collect();
        let mean = node_rmse.iter().sum::<f64>() / node_rmse.len() as f64;
        means.push(mean);
        summary.push(SummaryRow::value("noise-sweep", "plane-mean", method, ml, p, mean));
        for z in &e.planes {
            let plane = plane_label(*z);
            let vals: Vec<f64> = summary
                .iter()
                .filter(|s| s.parameter == p && s.group.starts_with(&format!("{plane}/")))
                .map(|s| s.rmse)
                .collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            summary.push(SummaryRow::value("noise-sweep", &format!("{plane}/plane-mean"), method, ml, p, m));
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = variances
        .iter()
        .zip(&means)
        .filter(|(v, _)| **v >= e.noise_fit_min * (1.0 - 1e-9) && **v <= e.noise_fit_max * (1.0 + 1e-9))
        .map(|(v, m)| (v.log10(), m.log10()))
        .unzip();
    let mut notes = Vec::new();
    if xs.len() >= 2 {
        let slope = fit_slope(&xs, &ys);
        summary.push(SummaryRow::value("noise-sweep", "slope", method, ml, 0.0, slope));
        notes.push(format!(
            "log-log slope of plane-mean RMSE over [{:e}, {:e}] A^2: {slope:.4}",
            e.noise_fit_min, e.noise_fit_max
        ));
    } else {
        return Err(SimError::Config("noise fit window holds fewer than two sweep points".into()));
    }
    Ok(Outcome { rows, summary, notes })
}

/// VAP with the largest summed gain.
pub fn best_vap(gm: &GainMatrix) -> usize {
    let mut best = 0;
    let mut top = f64::NEG_INFINITY;
    for k in 0..gm.vaps {
        let total: f64 = gm.vap(k).iter().sum();
        if total > top {
            top = total;
            best = k;
        }
    }
    best
}

/// Capacity of each LED of `vap` at clipping factor `gamma`, bit/s.
pub fn led_capacities(world: &World, gm: &GainMatrix, vap: usize, variance: f64, gamma: f64) -> Vec<f64> {
    let ofdm = world.cfg.ofdm(Mode::Lcm);
    gm.vap(vap)
        .iter()
        .map(|omega| {
            let g_e = electric_gain(*omega, world.conversion, world.scenario.receiver.responsivity);
            channel_capacity(&ofdm, g_e, variance, gamma)
        })
        .collect()
}

/// Transmit signals of every VAP; only `data_vap` carries data.
pub struct ChainSetup {
    pub op: OperatingPoint,
    pub data_vap: usize,
    idle: Vec<Vec<Vec<f64>>>,
}

impl ChainSetup {
    pub fn new(world: &World, op: OperatingPoint, data_vap: usize) -> SimResult<Self> {
        let pilots = vec![Complex64::new(1.0, 0.0); op.ofdm.leds_per_vap];
        let idle = (0..op.ofdm.vaps)
            .map(|k| {
                if k == data_vap {
                    return Ok(Vec::new());
                }
                Ok(build_frame(&op.ofdm, k, op.calibration.h, &pilots, &[])?.optical_output(&world.led)?)
            })
            .collect::<SimResult<_>>()?;
        Ok(Self { op, data_vap, idle })
    }

    /// One received symbol through the full transmit/receive chain with
    /// white receiver noise of `variance` per sample.
    pub fn observe<R: Rng + ?Sized>(
        &self,
        world: &World,
        gm: &GainMatrix,
        variance: f64,
        rng: &mut R,
    ) -> SimResult<ObservationVector> {
        let ofdm = &self.op.ofdm;
        let pilots = vec![Complex64::new(1.0, 0.0); ofdm.leds_per_vap];
        let data: Vec<Complex64> = (0..ofdm.data_capacity())
            .map(|_| qpsk(rng.random(), rng.random()))
            .collect();
        let frame = build_frame(ofdm, self.data_vap, self.op.calibration.h, &pilots, &data)?;
        let mut outputs = self.idle.clone();
        outputs[self.data_vap] = frame.optical_output(&world.led)?;
        let mut y = superpose(&outputs, gm, world.scenario.receiver.responsivity)?;
        let sd = variance.sqrt();
        for v in y.iter_mut() {
            let n: f64 = StandardNormal.sample(rng);
            *v += sd * n;
        }
        let y = remove_cyclic_prefix(&y, ofdm.cp_len);
        Ok(demodulate_rss(&y, ofdm, &self.op.calibration)?)
    }
}

pub fn gamma_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    let n = ((max - min) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| min + step * i as f64).collect()
}

fn nearest(values: &[f64], target: f64) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if (v - target).abs() < (values[best] - target).abs() {
            best = i;
        }
    }
    best
}

/// LCM locator RMSE and data capacity against the clipping factor.
///
/// Two observation paths are run on the same draws: `referred`, where the
/// clipping distortion is added to the receiver noise as in the capacity
/// expression, and `chain`, the full OFDM transmit/receive simulation.
pub fn clip_sweep(world: &World) -> SimResult<Outcome> {
    let cfg = &world.cfg;
    let e = &cfg.experiment;
    let pr = probe(world, Vec3::new(e.clip_position[0], e.clip_position[1], e.clip_position[2]))?;
    let data_vap = best_vap(&pr.gains);
    let gammas = gamma_grid(e.gamma_min, e.gamma_max, e.gamma_step);
    let setups: Vec<ChainSetup> = gammas
        .iter()
        .map(|g| {
            let op = world.operating_point_at(Mode::Lcm, Some(*g))?;
            ChainSetup::new(world, op, data_vap)
        })
        .collect::<SimResult<_>>()?;
    let params = cfg.rss_params();
    let reps = e.clip_realizations;
    let sc = &world.scenario;

    let per = par_map(e.threads, gammas.len() * reps, |t| -> SimResult<[MetricRow; 2]> {
        let g = gammas[t / reps];
        let setup = &setups[t / reps];
        let seed = split(e.seed, (t % reps) as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = world.observe(&pr.gains, setup.op.omega_sigma(pr.variance), &mut rng.clone());
        let referred = hybrid_locate(sc, &s, StartPolicy::Waoa, &params);
        let s = setup.observe(world, &pr.gains, pr.variance, &mut rng)?;
        let chain = hybrid_locate(sc, &s, StartPolicy::Waoa, &params);
        Ok([
            MetricRow::new("clip-sweep", "referred", pr.position, Mode::Lcm, g, &referred, seed),
            MetricRow::new("clip-sweep", "chain", pr.position, Mode::Lcm, g, &chain, seed),
        ])
    })?;
    let mut rows = Vec::with_capacity(2 * per.len());
    for r in per {
        rows.extend(r?);
    }
    let mut summary = aggregate(&mut rows);
    let ml = mode_label(Mode::Lcm);
    let mut notes = Vec::new();

    let fine = gamma_grid(e.gamma_min, e.gamma_max, e.capacity_step);
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for g in &fine {
        let caps = led_capacities(world, &pr.gains, data_vap, pr.variance, *g);
        let total: f64 = caps.iter().sum();
        for (m, c) in caps.iter().enumerate() {
            summary.push(SummaryRow::value("clip-sweep", &format!("capacity/led{}", m + 1), "capacity", ml, *g, *c));
        }
        summary.push(SummaryRow::value("clip-sweep", "capacity/vap", "capacity", ml, *g, total));
        if total > best.1 {
            best = (*g, total);
        }
    }
    summary.push(SummaryRow::value("clip-sweep", "capacity/argmax", "capacity", ml, best.0, best.1));
    notes.push(format!(
        "best VAP {}: capacity peaks at gamma = {:.2} with {:.2} Mbit/s",
        data_vap + 1,
        best.0,
        best.1 / 1e6
    ));

    let method = Method::WaoaRss.label();
    let (lo, hi) = (nearest(&gammas, 2.0), nearest(&gammas, 8.0));
    for path in ["referred", "chain"] {
        let rmse = |i: usize| {
            summary
                .iter()
                .find(|s| s.group == path && s.method == method && s.parameter == crate::metrics::quantize(gammas[i]))
                .map(|s| s.rmse)
                .unwrap_or(f64::NAN)
        };
        let ratio = rmse(lo) / rmse(hi);
        notes.push(format!(
            "{path}: RMSE(gamma={}) / RMSE(gamma={}) = {ratio:.3} ({:.3} mm / {:.3} mm)",
            gammas[lo],
            gammas[hi],
            rmse(lo) * 1e3,
            rmse(hi) * 1e3
        ));
        summary.push(SummaryRow::value("clip-sweep", &format!("{path}/ratio"), method, ml, 0.0, ratio));
    }
    Ok(Outcome { rows, summary, notes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub method: &'static str,
    pub vaps: usize,
    pub leds_per_vap: usize,
    pub n_l: f64,
    pub closed_form: u64,
    /// Count from the instrumented solver, where one exists.
    pub instrumented: Option<u64>,
}

pub const COMPLEXITY_HEADER: [&str; 6] = ["method", "vaps", "leds_per_vap", "n_l", "closed_form", "instrumented"];

impl ComplexityRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.method.to_string(),
            self.vaps.to_string(),
            self.leds_per_vap.to_string(),
            crate::metrics::fmt(self.n_l),
            self.closed_form.to_string(),
            self.instrumented.map(|v| v.to_string()).unwrap_or_default(),
        ]
    }
}

/// Instrumented AoA and WAoA counts on a scenario with `vaps` corners.
pub fn instrumented_counts(world: &World, vaps: usize) -> SimResult<(u64, u64)> {
    let mut sc_cfg = world.cfg.scenario_config();
    sc_cfg.vaps = vaps;
    let sc = build_scenario(&sc_cfg)?;
    let truth = sc.centroid() - Vec3::new(0.4, 0.3, 0.6);
    let s = ObservationVector::noise_free(&vlc_core::channel::gain_matrix_at(&sc, &truth)?);
    let sel = select_strongest(&s);
    let (_, aoa) = aoa_estimate_counted(&sc, &sel)?;
    let (_, waoa) = waoa_estimate_counted(&sc, &s, &sel)?;
    Ok((aoa, waoa))
}

/// Closed-form operation counts over the configured ranges, with
/// instrumented counts wherever a scenario can be built.
pub fn complexity(world: &World) -> SimResult<(Vec<ComplexityRow>, Vec<String>)> {
    let e = &world.cfg.experiment;
    let mut rows = Vec::new();
    let mut measured = Vec::new();
    for k in 1..=e.complexity_k_max {
        // a line fit needs two corners; layouts hold at most four
        let m = if (2..=4).contains(&k) {
            Some(instrumented_counts(world, k)?)
        } else {
            None
        };
        measured.push(m);
    }
    for (ki, k) in (1..=e.complexity_k_max).enumerate() {
        for &m in &e.complexity_m {
            for &n_l in &e.complexity_n_l {
                let default_m = m == world.cfg.vap.leds_per_vap;
                rows.push(ComplexityRow {
                    method: "AoA",
                    vaps: k,
                    leds_per_vap: m,
                    n_l,
                    closed_form: op_count(Method::Aoa, k, m, n_l, 0),
                    instrumented: measured[ki].filter(|_| default_m).map(|c| c.0),
                });
                rows.push(ComplexityRow {
                    method: "WAoA",
                    vaps: k,
                    leds_per_vap: m,
                    n_l,
                    closed_form: op_count(Method::Waoa, k, m, n_l, 0),
                    instrumented: measured[ki].filter(|_| default_m).map(|c| c.1),
                });
                rows.push(ComplexityRow {
                    method: "RSS/iteration",
                    vaps: k,
                    leds_per_vap: m,
                    n_l,
                    closed_form: rss_iteration_ops(k, m, n_l),
                    instrumented: None,
                });
            }
        }
    }
    let (k, m, n_l) = (world.cfg.vap.count, world.cfg.vap.leds_per_vap, world.cfg.led.lambertian_mode);
    let aoa = op_count(Method::Aoa, k, m, n_l, 0);
    let waoa = op_count(Method::Waoa, k, m, n_l, 0);
    let rss = rss_iteration_ops(k, m, n_l);
    let notes = vec![format!(
        "K={k}, M={m}, n_L={n_l}: AoA {aoa}, WAoA {waoa}, RSS per iteration {rss}, RSS/WAoA = {:.3}",
        rss as f64 / waoa as f64
    )];
    Ok((rows, notes))
}
