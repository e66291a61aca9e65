//! Trajectory post-processing: decay verification, blowup detection with
//! blowup-time extrapolation, stationary (ground-state) solving, and ω-limit
//! convergence checks.
//!
//! All routines consume either a recorded trace ([`TraceRecord`]) or sparse
//! field snapshots; none of them advance the dynamics themselves.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::{magnetic_residual, RunStatus, TraceRecord};
use crate::functionals::{PairData, ProblemParams, WellConstants};
use crate::grid::{covariant_quotient, Field, KernelTable};
use crate::nfunc::luxemburg_norm;

/// Outcome of the exponential-decay check on a stable run.
#[derive(Debug, Clone, Copy)]
pub struct DecayVerdict {
    /// The trace qualifies for the check (nonempty, starts inside the well
    /// with nonnegative Nehari functional).
    pub applicable: bool,
    /// Every step of `‖u‖²_{s,2,0}` is nonincreasing.
    pub monotone: bool,
    /// Least-squares slope of `log ‖u‖²_{s,2,0}` over the last half.
    pub fit_rate: f64,
    /// Coefficient of determination of that fit, clamped to `[0, 1]`.
    pub fit_r2: f64,
    /// `max{C*^{p+1}/(q⁻)^{(p+1)/q⁻}, 1} · pairing^{(p+1−q⁺)/q⁺} < 1` held
    /// at every record.
    pub bracket_ok: bool,
    /// The comparability hypothesis held with a finite empirical constant.
    pub comparable_ok: bool,
    /// Empirical comparability constant: max over the trace of
    /// `‖u‖²_{s,2,0} / pairing` (an upper bound for `[u]²_{s,2}/pairing`).
    pub comparable_c: f64,
}

/// Check the decay certificate along a recorded trace.
///
/// `monotone` uses the full trace; the log-linear fit uses the last half so
/// transients do not pollute the asymptotic rate.  A trace whose tail norm is
/// identically zero fits trivially with rate `0` and `R² = 1`.
pub fn verify_decay(records: &[TraceRecord], consts: &WellConstants) -> DecayVerdict {
    let applicable = records
        .first()
        .map_or(false, |r0| r0.j < consts.m_const && r0.i >= 0.0);

    let monotone = records.windows(2).all(|w| w[1].l2h <= w[0].l2h);

    let tail = &records[records.len() / 2..];
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|r| r.l2h > 0.0 && r.l2h.is_finite())
        .map(|r| (r.t, r.l2h.ln()))
        .collect();
    let (fit_rate, fit_r2) = linear_fit(&pts).map_or((0.0, 1.0), |(m, _, r2)| (m, r2));

    let coef = (consts.c_star.powf(consts.p + 1.0)
        / consts.q_minus.powf((consts.p + 1.0) / consts.q_minus))
    .max(1.0);
    let expo = (consts.p + 1.0 - consts.q_plus) / consts.q_plus;
    let bracket_ok = records.iter().all(|r| {
        let pairing = r.i + r.lp1;
        coef * pairing.max(0.0).powf(expo) < 1.0
    });

    let mut comparable_c = 0.0_f64;
    let mut comparable_ok = true;
    for r in records {
        let pairing = r.i + r.lp1;
        if pairing > 0.0 {
            comparable_c = comparable_c.max(r.l2h / pairing);
        } else if r.l2h > 0.0 {
            comparable_ok = false;
        }
    }
    comparable_ok &= comparable_c.is_finite();

    DecayVerdict { applicable, monotone, fit_rate, fit_r2, bracket_ok, comparable_ok, comparable_c }
}

/// Outcome of the finite-time blowup check.
#[derive(Debug, Clone, Copy)]
pub struct BlowupVerdict {
    pub detected: bool,
    /// Extrapolated zero of `F^{−ϑ}` over the last quarter of the trace,
    /// when the extrapolation is decreasing.
    pub t_blow_est: Option<f64>,
    /// Concavity exponent `ϑ = (p − 1)/4`.
    pub theta: f64,
    /// Minimum over the trace of `ξ(t) = −2I − (p+3)·∫‖u_τ‖² dτ`.
    pub xi_min: f64,
    pub i_always_negative: bool,
    /// `false` when the trace is too short (< 10 records) to decide.
    pub conclusive: bool,
}

/// Detect finite-time blowup from a trace and the run status, and extrapolate
/// the blowup time from the concavity functional.
pub fn detect_blowup(
    records: &[TraceRecord],
    status: RunStatus,
    params: &ProblemParams,
) -> BlowupVerdict {
    let p = params.p;
    let theta = (p - 1.0) / 4.0;
    let conclusive = records.len() >= 10;
    let i_always_negative = !records.is_empty() && records.iter().all(|r| r.i < 0.0);
    let xi_min = records
        .iter()
        .map(|r| -2.0 * r.i - (p + 3.0) * r.diss)
        .fold(f64::INFINITY, f64::min);

    let nonfinite = records.iter().any(|r| !r.l2h.is_finite());
    let accelerating = records.len() >= 3 && {
        let n = records.len();
        let (a, b, c) = (records[n - 3].l2h, records[n - 2].l2h, records[n - 1].l2h);
        c - b > b - a && b - a > 0.0
    };
    let huge = records.last().map_or(false, |r| !r.l2h.is_finite() || r.l2h > 1e6);
    let detected = status == RunStatus::BlowupSuspected || nonfinite || (huge && accelerating);

    // Linear extrapolation of F^{−ϑ} to zero over the last quarter.
    let t_blow_est = if detected && conclusive && theta > 0.0 {
        let n = records.len();
        let pts: Vec<(f64, f64)> = records[n - (n / 4).max(3)..]
            .iter()
            .filter(|r| r.f > 0.0 && r.f.is_finite())
            .map(|r| (r.t, r.f.powf(-theta)))
            .collect();
        match linear_fit(&pts) {
            Some((m, c, _)) if m < 0.0 => Some(-c / m),
            _ => None,
        }
    } else {
        None
    };

    BlowupVerdict { detected, t_blow_est, theta, xi_min, i_always_negative, conclusive }
}

/// A numerically converged stationary point of `J` on the Nehari set.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub u_star: Field,
    pub j_star: f64,
    /// `(h Σ |J′(u_star)_j / h|²)^{1/2}`: the discrete dual norm of the
    /// energy gradient.
    pub dual_residual: f64,
    /// `|I(u_star)|`.
    pub nehari_residual: f64,
    /// The line search stalled before the residual tolerance was met.
    pub stagnated: bool,
    /// Descent iterations performed.
    pub iterations: usize,
}

/// Discrete dual norm of the energy gradient at `u`:
/// `‖ B(u)/h − |u|^{p−1}u ‖_{2,h}` with the nodal mass `h`.
pub fn dual_residual(u: &Field, params: &ProblemParams, table: &KernelTable) -> Result<f64> {
    let g = gradient_over_h(u, params, table)?;
    Ok((u.domain.h() * g.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt())
}

/// `J′(u)/h` nodewise: `B(u)/h − |u|^{p−1}u`.
fn gradient_over_h(
    u: &Field,
    params: &ProblemParams,
    table: &KernelTable,
) -> Result<Vec<Complex64>> {
    let r = magnetic_residual(u, params, table)?;
    let pm1 = params.p - 1.0;
    Ok(r.values
        .iter()
        .zip(&u.values)
        .map(|(ri, ui)| ri - ui * ui.norm().powf(pm1))
        .collect())
}

/// Solve the stationary problem by alternating Nehari projection with plain
/// gradient descent on `J` and a backtracking line search.
///
/// Stops when `dual_residual < 1e−6` or `iters` is exhausted;
/// a stalled line search returns the best iterate with `stagnated = true`.
pub fn ground_state_solve(
    params: &ProblemParams,
    table: &KernelTable,
    seed: &Field,
    iters: usize,
) -> Result<GroundState> {
    let nf = &params.nfunc;
    let p = params.p;
    let h = params.domain.h();

    let project = |u: &Field, guess: f64| -> Result<(Field, f64, f64)> {
        let pd = PairData::build(u, params, table)?;
        let lam = pd.lambda_root_fast(nf, p, 1.0, guess)?;
        Ok((u.scaled(lam), pd.j(nf, p, lam), lam))
    };

    let (mut u, mut j, _) = project(seed, 1.0)?;
    let mut alpha = 1.0;
    let mut stagnated = false;
    let mut iterations = 0;
    let mut dual = dual_residual(&u, params, table)?;

    for k in 0..iters {
        if dual < 1e-6 {
            break;
        }
        iterations = k + 1;
        let g = gradient_over_h(&u, params, table)?;

        let mut accepted = false;
        for _ in 0..60 {
            let vals: Vec<Complex64> =
                u.values.iter().zip(&g).map(|(ui, gi)| ui - alpha * gi).collect();
            let trial = Field::from_values(u.domain, vals)?;
            // The projection re-enters the Nehari set after the free step;
            // accept on strict energy decrease of the projected point, or —
            // once energy differences fall below f64 resolution — on a
            // decrease of the dual residual.
            match project(&trial, 1.0) {
                Ok((v, jv, _)) if jv.is_finite() => {
                    let take = jv < j
                        || (jv <= j + 1e-12 * j.abs().max(1.0)
                            && dual_residual(&v, params, table)? < dual);
                    if take {
                        u = v;
                        j = jv;
                        alpha = (alpha * 1.5).min(1e8);
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                }
                _ => alpha *= 0.5,
            }
        }
        if !accepted {
            stagnated = true;
            break;
        }
        dual = dual_residual(&u, params, table)?;
    }

    let pd = PairData::build(&u, params, table)?;
    let i_val = pd.pairing(nf, 1.0) - pair_lp1(&u, p, h);

    Ok(GroundState {
        j_star: j,
        dual_residual: dual_residual(&u, params, table)?,
        nehari_residual: i_val.abs(),
        u_star: u,
        stagnated,
        iterations,
    })
}

/// `‖u‖_{p+1}^{p+1}` by the nodal Riemann sum.
fn pair_lp1(u: &Field, p: f64, h: f64) -> f64 {
    h * u.values.iter().map(|v| v.norm().powf(p + 1.0)).sum::<f64>()
}

/// Luxemburg seminorm `[a − b]^A_{s,G}` of the difference field.
pub fn seminorm_distance(
    a: &Field,
    b: &Field,
    params: &ProblemParams,
    table: &KernelTable,
) -> Result<f64> {
    if a.domain != b.domain {
        return Err(Error::Contract("fields live on different grids".into()));
    }
    let vals: Vec<Complex64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    let diff = Field::from_values(a.domain, vals)?;
    let q = covariant_quotient(&diff, table)?;
    let d: Vec<f64> = q.iter().map(|z| z.norm()).collect();
    let w: Vec<f64> = table.pairs.iter().map(|p| 2.0 * p.weight).collect();
    luxemburg_norm(&d, &w, &params.nfunc)
}

/// Convergence diagnostics along sparse snapshots of a global run.
#[derive(Debug, Clone)]
pub struct OmegaLimitReport {
    pub times: Vec<f64>,
    pub j_values: Vec<f64>,
    pub dual_residuals: Vec<f64>,
    /// Per snapshot: min over `{0, u_star}` of the seminorm distance.
    pub distances: Vec<f64>,
    /// `J(u(t_k))` nonincreasing (up to a relative slack of `1e−9`).
    pub j_monotone: bool,
    /// Last recorded energy (the candidate limit).
    pub j_limit: f64,
    pub dual_trend_down: bool,
    pub distance_trend_down: bool,
}

/// Check ω-limit behaviour: energy monotone with a limit, dual residual
/// trending to zero, and seminorm distance to `{0, u_star}` trending to zero.
pub fn omega_limit_check(
    snapshots: &[(f64, Field)],
    ground: &GroundState,
    params: &ProblemParams,
    table: &KernelTable,
) -> Result<OmegaLimitReport> {
    let mut times = Vec::with_capacity(snapshots.len());
    let mut j_values = Vec::with_capacity(snapshots.len());
    let mut dual_residuals = Vec::with_capacity(snapshots.len());
    let mut distances = Vec::with_capacity(snapshots.len());
    for (t, u) in snapshots {
        let pd = PairData::build(u, params, table)?;
        times.push(*t);
        j_values.push(pd.j(&params.nfunc, params.p, 1.0));
        dual_residuals.push(dual_residual(u, params, table)?);
        let zero = Field::zeros(u.domain);
        let d0 = seminorm_distance(u, &zero, params, table)?;
        let ds = seminorm_distance(u, &ground.u_star, params, table)?;
        distances.push(d0.min(ds));
    }

    let j_monotone = j_values
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
    let j_limit = j_values.last().copied().unwrap_or(f64::NAN);

    Ok(OmegaLimitReport {
        j_monotone,
        j_limit,
        dual_trend_down: trend_down(&dual_residuals),
        distance_trend_down: trend_down(&distances),
        times,
        j_values,
        dual_residuals,
        distances,
    })
}

/// Last value no larger than the first (with a small absolute slack so an
/// already-converged flat sequence passes).
fn trend_down(v: &[f64]) -> bool {
    match (v.first(), v.last()) {
        (Some(a), Some(b)) => *b <= *a + 1e-12,
        _ => true,
    }
}

/// Least-squares line `y = m·x + c` through `pts`; returns `(m, c, r²)` or
/// `None` when fewer than two points are available.
fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let m = sxy / sxx;
    let c = my - m * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - (m * p.0 + c)).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Some((m, c, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::gaussian_bump;
    use crate::grid::{build_kernel, Domain1D, MagneticField};
    use crate::nfunc::NFunction;

    fn record(t: f64, j: f64, i: f64, l2h: f64, lp1: f64, diss: f64, f: f64) -> TraceRecord {
        TraceRecord { t, j, i, l2h, lp1, ut_l2h: 0.0, diss, f, drift: 0.0 }
    }

    fn toy_consts() -> WellConstants {
        WellConstants {
            c_star: 1.0,
            q_minus: 2.0,
            q_plus: 2.0,
            p: 3.0,
            m_const: 0.1,
            d_est: 0.1,
            d_curve: vec![(0.5, 0.05), (1.0, 0.1)],
            d0: 0.0,
            b_root: None,
            samples: vec![(0.1, 1.0)],
        }
    }

    fn toy_params(m: usize) -> (ProblemParams, KernelTable) {
        let domain = Domain1D::new(-1.0, 1.0, m, m).unwrap();
        let params = ProblemParams {
            domain,
            s: 0.4,
            p: 3.0,
            nfunc: NFunction::power(2.0).unwrap(),
            magnetic: MagneticField::Zero,
        };
        let table = build_kernel(domain, params.s, &params.magnetic).unwrap();
        (params, table)
    }

    #[test]
    fn decay_fit_recovers_exponential_rate() {
        let consts = toy_consts();
        let records: Vec<TraceRecord> = (0..100)
            .map(|k| {
                let t = 0.02 * k as f64;
                let n = (-2.0 * t).exp();
                record(t, 0.01 * n, 0.005 * n, n, 0.001 * n, 0.0, 0.0)
            })
            .collect();
        let v = verify_decay(&records, &consts);
        assert!(v.applicable && v.monotone && v.bracket_ok && v.comparable_ok);
        assert!((v.fit_rate + 2.0).abs() < 1e-9, "rate {}", v.fit_rate);
        assert!(v.fit_r2 > 0.999999);
    }

    #[test]
    fn decay_zero_trace_is_trivially_monotone() {
        let consts = toy_consts();
        let records: Vec<TraceRecord> =
            (0..20).map(|k| record(0.1 * k as f64, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)).collect();
        let v = verify_decay(&records, &consts);
        assert!(v.applicable && v.monotone);
        assert_eq!(v.fit_rate, 0.0);
        assert_eq!(v.fit_r2, 1.0);
    }

    #[test]
    fn blowup_extrapolation_hits_synthetic_pole() {
        // F(t) = (1 − t)^{−1/θ} with θ = 1/2 makes F^{−θ} = 1 − t exactly.
        let (params, _) = toy_params(6);
        let records: Vec<TraceRecord> = (0..50)
            .map(|k| {
                let t = 0.018 * k as f64;
                let f = (1.0 - t).powf(-2.0);
                let l2h = 2e6 * (1.0 + t * t) * (1.0 + 50.0 * t * t);
                record(t, -1.0, -1.0, l2h, 1.0, 0.0, f)
            })
            .collect();
        let v = detect_blowup(&records, RunStatus::Completed, &params);
        assert!(v.conclusive && v.detected && v.i_always_negative);
        assert_eq!(v.theta, 0.5);
        let tb = v.t_blow_est.expect("extrapolation");
        assert!((tb - 1.0).abs() < 1e-9, "t_blow {tb}");
    }

    #[test]
    fn blowup_short_trace_is_inconclusive() {
        let (params, _) = toy_params(6);
        let records: Vec<TraceRecord> =
            (0..5).map(|k| record(0.1 * k as f64, -1.0, -1.0, 1e9, 1.0, 0.0, 1.0)).collect();
        let v = detect_blowup(&records, RunStatus::Completed, &params);
        assert!(!v.conclusive);
    }

    #[test]
    fn ground_state_converges_on_small_grid() {
        let (params, table) = toy_params(8);
        let seed = gaussian_bump(params.domain, 0.0, 0.35, 1.0, 0.0);
        let gs = ground_state_solve(&params, &table, &seed, 20_000).unwrap();
        assert!(!gs.stagnated, "stagnated after {} iterations", gs.iterations);
        assert!(
            gs.dual_residual < 1e-6 * gs.j_star.abs().max(1.0),
            "dual residual {}",
            gs.dual_residual
        );
        assert!(gs.nehari_residual < 1e-8 * gs.j_star.abs().max(1.0));
        assert!(gs.j_star > 0.0);
    }

    #[test]
    fn omega_limit_is_flat_at_the_ground_state() {
        let (params, table) = toy_params(8);
        let seed = gaussian_bump(params.domain, 0.0, 0.35, 1.0, 0.0);
        let gs = ground_state_solve(&params, &table, &seed, 20_000).unwrap();
        let snaps: Vec<(f64, Field)> =
            (0..4).map(|k| (k as f64, gs.u_star.clone())).collect();
        let rep = omega_limit_check(&snaps, &gs, &params, &table).unwrap();
        assert!(rep.j_monotone);
        assert!(rep.distances.iter().all(|&d| d < 1e-10));
        assert!((rep.j_limit - gs.j_star).abs() < 1e-12);
    }
}
