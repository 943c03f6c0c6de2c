//! Lyapunov functionals, generator-drift bounds, supermartingale and
//! exponential-decay statistical tests, exit-probability estimation, and
//! time-averaged moments over ensembles.

use serde::{Deserialize, Serialize};

use crate::dynamics::{EquationParams, NoiseSpec};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::spectral::{SobolevIndex, SpectralField};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;

/// Shape of the Lyapunov profile `l` beyond the bridge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LyapunovVariant {
    /// `l(rho) = log rho` for `rho > 2R` (no-blow-up argument).
    Log,
    /// `l(rho) = rho^p`, `p in (0,1)`, for `rho > 2R` (stationarity and
    /// decay arguments).
    Power,
}

/// Non-decreasing C^2 profile `l`: constant `a_floor` on `[0, R)`, the
/// closed form beyond `2R`, and a quintic Hermite bridge on `[R, 2R]`
/// matching value, slope and curvature at both ends.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyapunovSpec {
    pub variant: LyapunovVariant,
    /// Threshold `R`; the closed-form region starts at `2R`.
    pub radius: f64,
    /// Floor value on `[0, R)`.
    pub a_floor: f64,
    /// Moment power for the power variant.
    pub p: Option<f64>,
}

impl LyapunovSpec {
    /// Log profile; requires `R > 1/2` and `0 < a_floor < log(2R)`.
    pub fn log(radius: f64, a_floor: f64) -> Result<LyapunovSpec> {
        if !(radius > 0.5) {
            return Err(Error::InvalidParameter(format!(
                "log variant requires R > 1/2, got {radius}"
            )));
        }
        let cap = (2.0 * radius).ln();
        if !(a_floor > 0.0 && a_floor < cap) {
            return Err(Error::InvalidParameter(format!(
                "log variant requires 0 < a_floor < log(2R) = {cap}, got {a_floor}"
            )));
        }
        let spec = LyapunovSpec {
            variant: LyapunovVariant::Log,
            radius,
            a_floor,
            p: None,
        };
        spec.assert_monotone()?;
        Ok(spec)
    }

    /// Power profile; requires `p in (0,1)` and `0 < a_floor < (2R)^p`.
    pub fn power(radius: f64, a_floor: f64, p: f64) -> Result<LyapunovSpec> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("R must be positive".into()));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "power variant requires p in (0,1), got {p}"
            )));
        }
        let cap = (2.0 * radius).powf(p);
        if !(a_floor > 0.0 && a_floor < cap) {
            return Err(Error::InvalidParameter(format!(
                "power variant requires 0 < a_floor < (2R)^p = {cap}, got {a_floor}"
            )));
        }
        let spec = LyapunovSpec {
            variant: LyapunovVariant::Power,
            radius,
            a_floor,
            p: Some(p),
        };
        spec.assert_monotone()?;
        Ok(spec)
    }

    /// Default floor: half the admissible cap.
    pub fn default_floor(variant: LyapunovVariant, radius: f64, p: Option<f64>) -> f64 {
        match variant {
            LyapunovVariant::Log => 0.5 * (2.0 * radius).ln(),
            LyapunovVariant::Power => 0.5 * (2.0 * radius).powf(p.unwrap_or(0.5)),
        }
    }

    fn outer_value(&self, rho: f64) -> f64 {
        match self.variant {
            LyapunovVariant::Log => rho.ln(),
            LyapunovVariant::Power => rho.powf(self.p.expect("validated")),
        }
    }

    fn outer_derivatives(&self, rho: f64) -> (f64, f64, f64) {
        match self.variant {
            LyapunovVariant::Log => (rho.ln(), 1.0 / rho, -1.0 / (rho * rho)),
            LyapunovVariant::Power => {
                let p = self.p.expect("validated");
                (
                    rho.powf(p),
                    p * rho.powf(p - 1.0),
                    p * (p - 1.0) * rho.powf(p - 2.0),
                )
            }
        }
    }

    /// `l(rho)`.
    pub fn value(&self, rho: f64) -> f64 {
        let r = self.radius;
        if rho < r {
            self.a_floor
        } else if rho > 2.0 * r {
            self.outer_value(rho)
        } else {
            let (v1, d1, c1) = self.outer_derivatives(2.0 * r);
            quintic_hermite(rho, r, 2.0 * r, (self.a_floor, 0.0, 0.0), (v1, d1, c1))
        }
    }

    /// The profile must be non-decreasing; the specific endpoint data in use
    /// are asserted by a dense scan rather than proved in general.
    fn assert_monotone(&self) -> Result<()> {
        let n = 4000;
        let hi = 3.0 * self.radius;
        let mut last = self.value(0.0);
        for i in 1..=n {
            let rho = hi * i as f64 / n as f64;
            let v = self.value(rho);
            if v < last - 1e-12 * (1.0 + last.abs()) {
                return Err(Error::InvalidParameter(format!(
                    "Lyapunov bridge is not monotone near rho = {rho} (value {v} < {last})"
                )));
            }
            last = v;
        }
        Ok(())
    }
}

/// Quintic Hermite interpolation on `[x0, x1]` with value/slope/curvature
/// data at both ends.
fn quintic_hermite(x: f64, x0: f64, x1: f64, lo: (f64, f64, f64), hi: (f64, f64, f64)) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * t3 - t4 + 0.5 * t5;
    lo.0 * h0
        + lo.1 * h * h1
        + lo.2 * h * h * h2
        + hi.0 * h3
        + hi.1 * h * h4
        + hi.2 * h * h * h5
}

/// `V(u) = l(||u||_s)`.
pub fn lyapunov_value(u: &SpectralField, lspec: &LyapunovSpec, s: SobolevIndex) -> f64 {
    lspec.value(u.sobolev_norm(s))
}

/// Fill the Lyapunov diagnostic series of a trajectory from its recorded
/// `H^s` norms.
pub fn attach_lyapunov(traj: &mut Trajectory, lspec: &LyapunovSpec) {
    traj.lyapunov = Some(traj.hs_norm.iter().map(|&h| lspec.value(h)).collect());
}

/// Upper bound on the generator drift `L V(u)` in the closed-form region
/// `||u||_s > 2R`, for the multiplier noise family `phi(u) = f(u) u`:
///
/// ```text
/// log variant:   |alpha| K m^{2 sigma} + 1/2 |f|^2 - (Re f)^2
/// power variant: p ||u||_s^p ( |alpha| K m^{2 sigma} + 1/2 |f|^2 - (2-p)/2 (Re f)^2 )
/// ```
///
/// with `m = ||u||_inf`. This is the bound in which the uncontrolled
/// imaginary pairing with the nonlinearity has already been absorbed into
/// `K`, not the exact Ito drift; its sign is the operative quantity.
pub fn generator_drift(
    u: &SpectralField,
    lspec: &LyapunovSpec,
    params: &EquationParams,
    spec: &NoiseSpec,
    k: f64,
) -> Result<f64> {
    let norm = u.sobolev_norm(params.s);
    if norm <= 2.0 * lspec.radius {
        return Err(Error::InvalidParameter(format!(
            "generator_drift is defined on the closed-form region ||u||_s > 2R \
             (norm {norm}, 2R = {})",
            2.0 * lspec.radius
        )));
    }
    let m = u.sup_norm();
    let f = spec.h(m);
    let base = params.alpha.norm() * k * m.powf(2.0 * params.sigma as f64);
    Ok(match lspec.variant {
        LyapunovVariant::Log => base + 0.5 * f.norm_sqr() - f.re * f.re,
        LyapunovVariant::Power => {
            let p = lspec.p.expect("validated");
            p * norm.powf(p) * (base + 0.5 * f.norm_sqr() - 0.5 * (2.0 - p) * f.re * f.re)
        }
    })
}

/// Per-time Monte-Carlo statistics over an ensemble of paths: p-moment of
/// the `H^s` norm with a normal-approximation 95% CI, and the cumulative
/// blow-up fraction with a Wilson 95% interval.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleEstimate {
    pub p: f64,
    pub n_paths: usize,
    pub times: Vec<f64>,
    pub mean_p_moment: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub exit_fraction: Vec<f64>,
    pub exit_ci_low: Vec<f64>,
    pub exit_ci_high: Vec<f64>,
}

impl EnsembleEstimate {
    /// Aggregate trajectories sharing a recording schedule. Paths that
    /// stopped early (blow-up) contribute to the exit statistics and to the
    /// moments only while alive.
    pub fn from_trajectories(trajs: &[Trajectory], p: f64) -> Result<EnsembleEstimate> {
        if trajs.is_empty() {
            return Err(Error::InvalidParameter("empty ensemble".into()));
        }
        if !(p > 0.0) {
            return Err(Error::InvalidParameter("moment power p must be > 0".into()));
        }
        let longest = trajs
            .iter()
            .max_by_key(|t| t.len())
            .expect("non-empty ensemble");
        let times = longest.times.clone();
        let n_paths = trajs.len();
        let mut est = EnsembleEstimate {
            p,
            n_paths,
            times: times.clone(),
            mean_p_moment: Vec::new(),
            ci_low: Vec::new(),
            ci_high: Vec::new(),
            exit_fraction: Vec::new(),
            exit_ci_low: Vec::new(),
            exit_ci_high: Vec::new(),
        };
        for (i, &t) in times.iter().enumerate() {
            let mut samples = Vec::with_capacity(n_paths);
            for traj in trajs {
                // A shorter series contributes while its schedule matches;
                // an off-stride crossing row is excluded from the moments.
                if i < traj.len() && (traj.times[i] - t).abs() <= 1e-12 * t.max(1.0) {
                    let h = traj.hs_norm[i];
                    if h.is_finite() {
                        samples.push(h.powf(p));
                    }
                }
            }
            let n = samples.len().max(1) as f64;
            let mean = samples.iter().sum::<f64>() / n;
            let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
                / (n - 1.0).max(1.0);
            let half = Z95 * (var / n).sqrt();
            est.mean_p_moment.push(mean);
            est.ci_low.push(mean - half);
            est.ci_high.push(mean + half);

            let crossed = trajs
                .iter()
                .filter(|tr| tr.blowup_time.map_or(false, |bt| bt <= t))
                .count();
            let (lo, hi) = wilson_interval(crossed, n_paths, Z95);
            est.exit_fraction.push(crossed as f64 / n_paths as f64);
            est.exit_ci_low.push(lo);
            est.exit_ci_high.push(hi);
        }
        Ok(est)
    }

    /// CSV with header
    /// `t,mean_p_moment,ci_low,ci_high,exit_fraction,exit_ci_low,exit_ci_high`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t,mean_p_moment,ci_low,ci_high,exit_fraction,exit_ci_low,exit_ci_high\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.times[i],
                self.mean_p_moment[i],
                self.ci_low[i],
                self.ci_high[i],
                self.exit_fraction[i],
                self.exit_ci_low[i],
                self.exit_ci_high[i],
            ));
        }
        out
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Result of a statistical verification test, serialized as
/// `{test, verdict, lambda, p, first_violation_t, details}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub verdict: String,
    pub lambda: f64,
    pub p: f64,
    pub first_violation_t: Option<f64>,
    pub details: String,
}

impl TestReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

/// Checks that `t -> e^{lambda t} * mean_p_moment(t)` is non-increasing up
/// to CI slack: for each consecutive recorded pair the increase must not
/// exceed the CI width of the tested product at the later time (the
/// moment's CI width carried through the same `e^{lambda t}` factor).
/// Reports the first violation.
pub fn supermartingale_decay_test(
    ens: &EnsembleEstimate,
    lambda: f64,
    p: f64,
) -> Result<TestReport> {
    if ens.times.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let mut first_violation = None;
    for i in 1..ens.times.len() {
        let amp = (lambda * ens.times[i]).exp();
        let prev = (lambda * ens.times[i - 1]).exp() * ens.mean_p_moment[i - 1];
        let cur = amp * ens.mean_p_moment[i];
        let slack = amp * (ens.ci_high[i] - ens.ci_low[i]);
        if cur > prev + slack {
            first_violation = Some(ens.times[i]);
            break;
        }
    }
    let verdict = if first_violation.is_none() {
        "pass"
    } else {
        "fail"
    };
    Ok(TestReport {
        test: "supermartingale-decay".into(),
        verdict: verdict.into(),
        lambda,
        p,
        first_violation_t: first_violation,
        details: format!(
            "e^(lambda t) E||u||_s^p non-increasing up to CI slack over {} recorded times",
            ens.times.len()
        ),
    })
}

/// Least-squares decay rate of `log mean_p_moment` over `window = [t_lo, t_hi]`,
/// sign-flipped, with the regression standard error of the slope.
///
/// Zero or negative moments in the window (ensemble at equilibrium) yield
/// the `+inf` sentinel with zero standard error.
pub fn fit_decay_rate(ens: &EnsembleEstimate, window: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = ens
        .times
        .iter()
        .zip(ens.mean_p_moment.iter())
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, m)| (*t, *m))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "window [{lo}, {hi}] contains {} recorded times; need at least 2",
            pts.len()
        )));
    }
    if pts.iter().any(|(_, m)| *m <= 0.0) {
        return Ok((f64::INFINITY, 0.0));
    }
    let n = pts.len() as f64;
    let xbar = pts.iter().map(|(t, _)| t).sum::<f64>() / n;
    let ybar = pts.iter().map(|(_, m)| m.ln()).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|(t, _)| (t - xbar) * (t - xbar)).sum();
    let sxy: f64 = pts
        .iter()
        .map(|(t, m)| (t - xbar) * (m.ln() - ybar))
        .sum();
    let slope = sxy / sxx;
    let mut ss_res = 0.0;
    for (t, m) in &pts {
        let fitted = ybar + slope * (t - xbar);
        let r = m.ln() - fitted;
        ss_res += r * r;
    }
    let stderr = if pts.len() > 2 {
        (ss_res / ((n - 2.0) * sxx)).sqrt()
    } else {
        0.0
    };
    Ok((-slope, stderr))
}

/// Fraction of paths whose threshold-crossing time is `<= t`, with its 95%
/// Wilson interval.
pub fn exit_probability(ens: &EnsembleEstimate, t: f64) -> Result<(f64, (f64, f64))> {
    if ens.times.is_empty() || t < ens.times[0] || t > *ens.times.last().unwrap() {
        return Err(Error::InvalidParameter(format!(
            "query time {t} outside the recorded horizon"
        )));
    }
    let idx = ens
        .times
        .iter()
        .rposition(|&u| u <= t)
        .expect("checked above");
    Ok((
        ens.exit_fraction[idx],
        (ens.exit_ci_low[idx], ens.exit_ci_high[idx]),
    ))
}

/// Trapezoidal `(1/T) int_0^T ||u(t)||_s^p dt` along one trajectory;
/// blow-up trajectories are rejected.
pub fn time_average_moment(traj: &Trajectory, p: f64) -> Result<f64> {
    if traj.blowup_time.is_some() {
        return Err(Error::InvalidParameter(
            "time averages are not defined on blow-up trajectories".into(),
        ));
    }
    if traj.len() < 2 {
        return Err(Error::InvalidParameter(
            "trajectory too short for a time average".into(),
        ));
    }
    let mut acc = 0.0;
    for i in 1..traj.len() {
        let dt = traj.times[i] - traj.times[i - 1];
        let a = traj.hs_norm[i - 1].powf(p);
        let b = traj.hs_norm[i].powf(p);
        acc += 0.5 * (a + b) * dt;
    }
    let span = traj.times.last().unwrap() - traj.times[0];
    Ok(acc / span)
}

/// Mean and 95% CI half-width of a sample.
pub fn mean_ci(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use num_complex::Complex64;

    fn synthetic_ensemble(times: Vec<f64>, means: Vec<f64>) -> EnsembleEstimate {
        let n = times.len();
        EnsembleEstimate {
            p: 0.5,
            n_paths: 1,
            times,
            ci_low: means.clone(),
            ci_high: means.clone(),
            mean_p_moment: means,
            exit_fraction: vec![0.0; n],
            exit_ci_low: vec![0.0; n],
            exit_ci_high: vec![0.0; n],
        }
    }

    #[test]
    fn lyapunov_profile_matches_closed_forms() {
        let r = 1.0;
        let log = LyapunovSpec::log(r, 0.3).unwrap();
        assert_eq!(log.value(0.5 * r), 0.3);
        assert!((log.value(3.0 * r) - (3.0 * r).ln()).abs() < 1e-15);

        let pow = LyapunovSpec::power(1.0, 0.5, 0.5).unwrap();
        assert!((pow.value(9.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn lyapunov_bridge_is_monotone_and_c2() {
        for spec in [
            LyapunovSpec::log(1.0, 0.3).unwrap(),
            LyapunovSpec::power(1.0, 0.7, 0.5).unwrap(),
            LyapunovSpec::power(2.5, 0.9, 0.25).unwrap(),
        ] {
            let r = spec.radius;
            let mut last = spec.value(0.0);
            for i in 1..=3000 {
                let rho = 3.0 * r * i as f64 / 3000.0;
                let v = spec.value(rho);
                assert!(v >= last - 1e-12, "not monotone at rho = {rho}");
                last = v;
            }
            // One-sided second differences agree at the seams. Each piece is
            // smooth, so Richardson extrapolation of the one-sided second
            // difference converges to the one-sided curvature limit.
            let one_sided_d2 = |x: f64, dir: f64| {
                let d = |h: f64| {
                    (spec.value(x + dir * 2.0 * h) - 2.0 * spec.value(x + dir * h)
                        + spec.value(x))
                        / (h * h)
                };
                let h = 2e-3 * r.max(1.0);
                let r1 = |h: f64| 2.0 * d(h / 2.0) - d(h);
                (4.0 * r1(h / 2.0) - r1(h)) / 3.0
            };
            for x in [r, 2.0 * r] {
                let left = one_sided_d2(x, -1.0);
                let right = one_sided_d2(x, 1.0);
                let scale = left.abs().max(right.abs()).max(1.0);
                assert!(
                    (left - right).abs() <= 1e-6 * scale,
                    "curvature jump at {x}: {left} vs {right}"
                );
            }
        }
    }

    #[test]
    fn generator_drift_sign_cases() {
        let grid = Grid::new(1, 8, 20).unwrap();
        // A field with H^s norm safely above 2R = 2.
        let u = SpectralField::from_modes(
            &grid,
            &[(vec![2], Complex64::new(3.0, 0.0)), (vec![0], Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let lspec = LyapunovSpec::log(1.0, 0.3).unwrap();

        // Real multiplier, no nonlinearity: drift bound is -a^2 (1+m)^{2b} / 2.
        let params = EquationParams::new(1, Complex64::new(0.0, 0.0), 2.0, 1).unwrap();
        let spec = NoiseSpec::new(2.0, 1.5, 0.0, 1.5).unwrap();
        let drift = generator_drift(&u, &lspec, &params, &spec, 1.0).unwrap();
        let m = u.sup_norm();
        let expected = -0.5 * 4.0 * (1.0 + m).powf(3.0);
        assert!((drift - expected).abs() < 1e-12 * expected.abs());

        // Nearly purely imaginary multiplier: bound turns positive.
        let params = EquationParams::new(1, Complex64::new(1.0, 0.0), 2.0, 1).unwrap();
        let spec = NoiseSpec::new(1e-8, 1.0, 1.0, 1.0).unwrap();
        let drift = generator_drift(&u, &lspec, &params, &spec, 1.0).unwrap();
        let approx = 1.0 * m.powi(2) + 0.5 * (1.0 + m).powi(2);
        assert!(drift > 0.0);
        assert!((drift - approx).abs() < 1e-6 * approx);

        // Inside the bridge region the closed form does not apply.
        let small = SpectralField::basis_mode(&grid, &[0]).unwrap();
        assert!(generator_drift(&small, &lspec, &params, &spec, 1.0).is_err());
    }

    #[test]
    fn supermartingale_synthetic_cases() {
        let lambda = 0.8;
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        // m(t) = e^{-2 lambda t}: product e^{-lambda t} decreases.
        let decaying: Vec<f64> = times.iter().map(|t| (-2.0 * lambda * t).exp()).collect();
        let ens = synthetic_ensemble(times.clone(), decaying);
        assert!(supermartingale_decay_test(&ens, lambda, 0.5)
            .unwrap()
            .passed());
        // m(t) = e^{+lambda t / 2}: fails at the first pair.
        let growing: Vec<f64> = times.iter().map(|t| (0.5 * lambda * t).exp()).collect();
        let report = supermartingale_decay_test(
            &synthetic_ensemble(times.clone(), growing),
            lambda,
            0.5,
        )
        .unwrap();
        assert!(!report.passed());
        assert_eq!(report.first_violation_t, Some(times[1]));
        // All-zero ensemble passes trivially.
        let zeros = vec![0.0; times.len()];
        assert!(
            supermartingale_decay_test(&synthetic_ensemble(times, zeros), lambda, 0.5)
                .unwrap()
                .passed()
        );
    }

    #[test]
    fn decay_rate_fit_is_exact_on_noiseless_data() {
        let times: Vec<f64> = (0..100).map(|i| i as f64 * 0.05).collect();
        let means: Vec<f64> = times.iter().map(|t| 5.0 * (-0.7 * t).exp()).collect();
        let ens = synthetic_ensemble(times.clone(), means);
        let (rate, stderr) = fit_decay_rate(&ens, (0.0, 5.0)).unwrap();
        assert!((rate - 0.7).abs() < 1e-12);
        assert!(stderr < 1e-12);

        let flat = vec![2.0; times.len()];
        let (rate, _) = fit_decay_rate(&synthetic_ensemble(times.clone(), flat), (0.0, 5.0))
            .unwrap();
        assert!(rate.abs() < 1e-12);

        let zeros = vec![0.0; times.len()];
        let (rate, stderr) =
            fit_decay_rate(&synthetic_ensemble(times, zeros), (0.0, 5.0)).unwrap();
        assert!(rate.is_infinite());
        assert_eq!(stderr, 0.0);
    }

    #[test]
    fn wilson_interval_closed_form() {
        // 5 of 256: p_hat = 0.01953; compare against the formula evaluated
        // independently.
        let (lo, hi) = wilson_interval(5, 256, Z95);
        let n = 256.0f64;
        let phat = 5.0 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (phat + z2 / (2.0 * n)) / denom;
        let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
        assert!((lo - (center - half)).abs() < 1e-15);
        assert!((hi - (center + half)).abs() < 1e-15);
        assert!((phat - 0.01953).abs() < 1e-4);

        // Zero successes: upper edge behaves like the rule of three.
        let (lo, hi) = wilson_interval(0, 256, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi < 3.0 / 256.0 * 1.3 && hi > 1.0 / 256.0);

        // All successes: the upper edge is 1 (exactly, in the algebra).
        let (_, hi) = wilson_interval(256, 256, Z95);
        assert!((hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn time_average_closed_forms() {
        let grid = Grid::new(1, 2, 6).unwrap();
        let constant = Trajectory {
            path_index: 0,
            times: (0..=10).map(|i| i as f64 * 0.1).collect(),
            hs_norm: vec![2.0; 11],
            sup_norm: vec![0.0; 11],
            mass: vec![0.0; 11],
            energy: None,
            lyapunov: None,
            blowup_time: None,
            hard_overflow: false,
            terminal: SpectralField::zero(&grid),
        };
        assert!((time_average_moment(&constant, 1.0).unwrap() - 2.0).abs() < 1e-14);

        let linear = Trajectory {
            hs_norm: (0..=10).map(|i| i as f64 * 0.1).collect(),
            ..constant.clone()
        };
        assert!((time_average_moment(&linear, 1.0).unwrap() - 0.5).abs() < 1e-12);

        let blown = Trajectory {
            blowup_time: Some(0.5),
            ..constant
        };
        assert!(time_average_moment(&blown, 1.0).is_err());
    }
}
