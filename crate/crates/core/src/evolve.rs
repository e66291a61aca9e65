//! Time integration of the lumped-mass Galerkin system
//! `(h·I + L) du/dt = −B(u) + h·|u|^{p−1}u`,
//! where `L` is the quadratic fractional stiffness and `B(u)` is the gradient
//! of the nonlocal magnetic modular `ρ(u)`.
//!
//! Along exact trajectories the discrete system inherits the continuum
//! identities `dJ/dt = −‖u_t‖²_{s,2,0}` and `½ d/dt ‖u‖²_{s,2,0} = −I(u)`;
//! the integrator tracks the first as an accumulated relative drift.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::ProblemParams;
use crate::grid::{assemble_fractional_stiffness, Field, KernelTable};

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Forward Euler on the preconditioned right-hand side.
    Explicit,
    /// Frozen-nonlinearity fixed-point iteration per step.
    Picard { max_iters: usize, tol: f64 },
}

/// Integration settings.
#[derive(Debug, Clone, Copy)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Emit a trace record every this many accepted steps.
    pub record_every: usize,
    /// Number of field snapshots kept along the run (ω-limit diagnostics).
    pub snapshots: usize,
}

/// One row of the trajectory trace.
#[derive(Debug, Clone, Copy)]
pub struct TraceRecord {
    pub t: f64,
    pub j: f64,
    pub i: f64,
    /// `‖u‖²_{s,2,0}`.
    pub l2h: f64,
    /// `‖u‖_{p+1}^{p+1}`.
    pub lp1: f64,
    /// `‖u_t‖²_{s,2,0}`.
    pub ut_l2h: f64,
    /// Running `∫₀ᵗ ‖u_τ‖² dτ` (trapezoid).
    pub diss: f64,
    /// Blowup functional `∫₀ᵗ l2h dτ + (T₀−t)·l2h(0)` with T₀ the horizon.
    pub f: f64,
    /// `|diss + J(u(t)) − J(u₀)| / max(|J(u₀)|, 1)`.
    pub drift: f64,
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    /// Non-finite values or repeated rejection with rapidly growing norm.
    BlowupSuspected,
    /// Repeated rejection without norm growth.
    StepFailure,
}

/// Output of a run: records, sparse field snapshots, final field, status.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TraceRecord>,
    pub snapshots: Vec<(f64, Field)>,
    pub final_field: Field,
    pub status: RunStatus,
}

/// Gradient of the modular plus scalar diagnostics, in one pair sweep.
struct Assembled {
    /// `B_j = ∂ρ/∂(Re u_j) + i ∂ρ/∂(Im u_j)` on the interior nodes.
    b: Vec<Complex64>,
    rho: f64,
    pairing: f64,
}

fn assemble(u: &Field, params: &ProblemParams, table: &KernelTable) -> Result<Assembled> {
    if u.domain != table.domain {
        return Err(Error::Contract("field and kernel table live on different grids".into()));
    }
    let nf = &params.nfunc;
    let dom = &u.domain;
    let mut b = vec![Complex64::new(0.0, 0.0); dom.m];
    let mut rho = 0.0;
    let mut pairing = 0.0;
    for p in &table.pairs {
        let phase = Complex64::from_polar(1.0, p.phase);
        let d = (u.value_at(p.i) - phase * u.value_at(p.j)) * p.inv_s;
        let n = d.norm();
        rho += 2.0 * p.weight * nf.big_g(n);
        if n == 0.0 {
            continue;
        }
        let gn = nf.g(n);
        pairing += 2.0 * p.weight * gn * n;
        let contrib = 2.0 * p.weight * p.inv_s * (gn / n);
        if dom.is_interior(p.i) {
            b[p.i - dom.pad] += contrib * d;
        }
        if dom.is_interior(p.j) {
            b[p.j - dom.pad] -= contrib * phase.conj() * d;
        }
    }
    Ok(Assembled { b, rho, pairing })
}

/// Weak-form residual of the nonlocal magnetic operator: the gradient of
/// `ρ(u)` with respect to `(Re u_j, Im u_j)`, divided by the nodal mass `h`.
pub fn magnetic_residual(u: &Field, params: &ProblemParams, table: &KernelTable) -> Result<Field> {
    let asm = assemble(u, params, table)?;
    let h = u.domain.h();
    Field::from_values(u.domain, asm.b.iter().map(|z| z / h).collect())
}

/// Prefactorized left operator `h·I + L` plus step bookkeeping.
pub struct Stepper {
    pub scheme: Scheme,
    pub dt: f64,
    pub t: f64,
    /// Accumulated energy-identity drift (relative).
    pub drift: f64,
    h: f64,
    stiffness: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

/// What a single step produced.
pub struct StepOutcome {
    pub u_next: Field,
    /// Scalar diagnostics of the *current* state, computed en route.
    pub rho: f64,
    pub pairing: f64,
    pub lp1: f64,
    /// `‖u_t‖²_{s,2,0}` of the step derivative.
    pub ut_l2h: f64,
    /// Step failed to produce usable values (caller should halve dt).
    pub rejected: bool,
}

impl Stepper {
    pub fn new(params: &ProblemParams, table: &KernelTable, scheme: Scheme, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let h = params.domain.h();
        let stiffness = assemble_fractional_stiffness(&params.domain, table);
        let mut a = stiffness.clone();
        for k in 0..params.domain.m {
            a[(k, k)] += h;
        }
        let chol = Cholesky::new(a)
            .ok_or_else(|| Error::Config("left operator h·I + L is not positive definite".into()))?;
        Ok(Stepper { scheme, dt, t: 0.0, drift: 0.0, h, stiffness, chol })
    }

    /// Solve `(h·I + L) x = rhs` for a complex right-hand side.
    fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let m = rhs.len();
        let re = DVector::from_iterator(m, rhs.iter().map(|z| z.re));
        let im = DVector::from_iterator(m, rhs.iter().map(|z| z.im));
        let xr = self.chol.solve(&re);
        let xi = self.chol.solve(&im);
        (0..m).map(|k| Complex64::new(xr[k], xi[k])).collect()
    }

    /// `h‖v‖² + vᴴ L v` — the discrete `‖·‖²_{s,2,0}` of a coefficient vector.
    pub fn graph_norm_sq(&self, v: &[Complex64]) -> f64 {
        let m = v.len();
        let re = DVector::from_iterator(m, v.iter().map(|z| z.re));
        let im = DVector::from_iterator(m, v.iter().map(|z| z.im));
        let quad = (re.transpose() * &self.stiffness * &re)[(0, 0)]
            + (im.transpose() * &self.stiffness * &im)[(0, 0)];
        let l2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        self.h * l2 + quad
    }

    /// Right-hand side `−B(u) + h f(u)` and the nonlinear mass `‖u‖^{p+1}_{p+1}`.
    fn rhs_and_lp1(&self, u: &Field, asm: &Assembled, p: f64) -> (Vec<Complex64>, f64) {
        let mut lp1 = 0.0;
        let rhs = u
            .values
            .iter()
            .zip(&asm.b)
            .map(|(&v, &b)| {
                let n = v.norm();
                lp1 += self.h * n.powf(p + 1.0);
                self.h * v * n.powf(p - 1.0) - b
            })
            .collect();
        (rhs, lp1)
    }

    /// Time derivative `du/dt = (h·I+L)⁻¹(−B(u) + h f(u))` at the state `u`,
    /// plus the scalar diagnostics gathered along the way.
    fn derivative(
        &self,
        u: &Field,
        params: &ProblemParams,
        table: &KernelTable,
    ) -> Result<(Vec<Complex64>, f64, f64, f64)> {
        let asm = assemble(u, params, table)?;
        let (rhs, lp1) = self.rhs_and_lp1(u, &asm, params.p);
        Ok((self.solve(&rhs), asm.rho, asm.pairing, lp1))
    }

    fn explicit_next(&self, u: &Field, du: &[Complex64]) -> Field {
        Field {
            domain: u.domain,
            values: u.values.iter().zip(du).map(|(&v, &d)| v + self.dt * d).collect(),
        }
    }

    /// Run the Picard inner iteration starting from the explicit candidate.
    /// Returns the accepted state and whether the iteration converged.
    fn picard_next(
        &self,
        u: &Field,
        du0: &[Complex64],
        params: &ProblemParams,
        table: &KernelTable,
        max_iters: usize,
        tol: f64,
    ) -> Result<(Field, bool)> {
        let mut v = self.explicit_next(u, du0);
        for _ in 0..max_iters {
            if !v.is_finite() {
                return Ok((v, false));
            }
            let (dv, ..) = self.derivative(&v, params, table)?;
            let next = self.explicit_next(u, &dv);
            let delta: f64 =
                next.values.iter().zip(&v.values).map(|(a, b)| (a - b).norm_sqr()).sum();
            let scale: f64 = v.values.iter().map(|z| z.norm_sqr()).sum();
            v = next;
            if delta.sqrt() <= tol * scale.sqrt().max(1e-300) {
                return Ok((v, true));
            }
        }
        Ok((v, false))
    }

    /// Advance one step from `u` (does not mutate `t`; the driver owns time).
    pub fn step(&self, u: &Field, params: &ProblemParams, table: &KernelTable) -> Result<StepOutcome> {
        let (du, rho, pairing, lp1) = self.derivative(u, params, table)?;
        let ut_l2h = self.graph_norm_sq(&du);
        match self.scheme {
            Scheme::Explicit => {
                let u_next = self.explicit_next(u, &du);
                let rejected = !u_next.is_finite();
                Ok(StepOutcome { u_next, rho, pairing, lp1, ut_l2h, rejected })
            }
            Scheme::Picard { max_iters, tol } => {
                let (v, converged) = self.picard_next(u, &du, params, table, max_iters, tol)?;
                let rejected = !converged || !v.is_finite();
                // Report the effective derivative of the accepted update.
                let du_eff: Vec<Complex64> =
                    v.values.iter().zip(&u.values).map(|(a, b)| (a - b) / self.dt).collect();
                let ut_eff = if v.is_finite() { self.graph_norm_sq(&du_eff) } else { f64::INFINITY };
                Ok(StepOutcome { u_next: v, rho, pairing, lp1, ut_l2h: ut_eff, rejected })
            }
        }
    }
}

/// Maximum number of dt halvings before a run is abandoned.
const MAX_HALVINGS: u32 = 10;

/// Integrate from `u0` to `t_end`, recording the trace and a handful of field
/// snapshots.  Non-finite states or energy-drift spikes (per-step identity
/// increment above 10× the running median) halve the step; after
/// [`MAX_HALVINGS`] the run ends as blowup-suspected (norm grew) or
/// step-failure.
pub fn evolve(
    u0: &Field,
    params: &ProblemParams,
    table: &KernelTable,
    cfg: &StepperConfig,
) -> Result<Trajectory> {
    if !(cfg.t_end > 0.0) {
        return Err(Error::Config(format!("horizon must be positive, got {}", cfg.t_end)));
    }
    let mut stepper = Stepper::new(params, table, cfg.scheme, cfg.dt)?;
    let record_every = cfg.record_every.max(1);
    let p = params.p;
    let mut u = u0.clone();
    let mut asm = assemble(&u, params, table)?;
    let mut t = 0.0f64;
    let mut diss = 0.0f64;
    let mut l2h_int = 0.0f64; // running ∫ l2h dτ
    // Trapezoid data of the step that just advanced: (ut, l2h, dt at start).
    let mut interval_start: Option<(f64, f64, f64)> = None;
    let mut j0: Option<f64> = None;
    let l2h0 = stepper.graph_norm_sq(&u.values);
    let mut halvings = 0u32;
    let mut records: Vec<TraceRecord> = Vec::new();
    let mut snapshots: Vec<(f64, Field)> = Vec::new();
    let snap_count = cfg.snapshots.max(2);
    let mut next_snap = 0.0f64;
    // Spike detector: recent per-step energy-identity increments.
    let mut increments: Vec<f64> = Vec::new();
    let mut status = RunStatus::Completed;
    let max_steps = ((cfg.t_end / cfg.dt).ceil() as usize) * 12 + 1000;
    let mut step_idx = 0usize;

    loop {
        // Derivative at the current state (reusing the cached assembly).
        let (rhs, lp1) = stepper.rhs_and_lp1(&u, &asm, p);
        let du = stepper.solve(&rhs);
        let ut_l2h = stepper.graph_norm_sq(&du);
        let l2h = stepper.graph_norm_sq(&u.values);
        let j = asm.rho - lp1 / (p + 1.0);
        let j0v = *j0.get_or_insert(j);
        if let Some((pu, pl, pdt)) = interval_start.take() {
            diss += pdt * 0.5 * (pu + ut_l2h);
            l2h_int += pdt * 0.5 * (pl + l2h);
        }
        if !(j.is_finite() && l2h.is_finite() && ut_l2h.is_finite()) {
            // Diagnostics overflowed: stop without emitting a non-finite row.
            status = RunStatus::BlowupSuspected;
            break;
        }
        let drift = (diss + j - j0v).abs() / j0v.abs().max(1.0);
        stepper.drift = drift;
        let record = TraceRecord {
            t,
            j,
            i: asm.pairing - lp1,
            l2h,
            lp1,
            ut_l2h,
            diss,
            f: l2h_int + (cfg.t_end - t) * l2h0,
            drift,
        };
        if step_idx % record_every == 0 && records.last().map_or(true, |r| r.t < t) {
            records.push(record);
        }
        if snapshots.len() < snap_count && t >= next_snap - 1e-12 {
            snapshots.push((t, u.clone()));
            next_snap += cfg.t_end / (snap_count - 1) as f64;
        }
        let finish = |records: &mut Vec<TraceRecord>| {
            if records.last().map_or(true, |r| r.t < t) {
                records.push(record);
            }
        };
        // Past this growth the trapezoid integrals no longer track the
        // continuous identities; the detector already has what it needs.
        if l2h > 1e6 && l2h > 100.0 * l2h0 {
            status = RunStatus::BlowupSuspected;
            finish(&mut records);
            break;
        }
        if t >= cfg.t_end - 1e-12 * cfg.t_end || step_idx > max_steps {
            if step_idx > max_steps {
                status = end_status(&u, &stepper, l2h0);
            }
            finish(&mut records);
            break;
        }

        // Propose the next state.
        let (u_next, ut_used) = match cfg.scheme {
            Scheme::Explicit => (stepper.explicit_next(&u, &du), ut_l2h),
            Scheme::Picard { max_iters, tol } => {
                let (v, converged) = stepper.picard_next(&u, &du, params, table, max_iters, tol)?;
                if !converged {
                    if halvings >= MAX_HALVINGS {
                        status = end_status(&v, &stepper, l2h0);
                        finish(&mut records);
                        break;
                    }
                    halvings += 1;
                    stepper = Stepper::new(params, table, cfg.scheme, stepper.dt * 0.5)?;
                    increments.clear();
                    continue;
                }
                let du_eff: Vec<Complex64> =
                    v.values.iter().zip(&u.values).map(|(a, b)| (a - b) / stepper.dt).collect();
                let ut = stepper.graph_norm_sq(&du_eff);
                (v, ut)
            }
        };
        // Assemble the proposed state; reject on any non-finite outcome.
        let mut proposal = None;
        if u_next.is_finite() {
            let a = assemble(&u_next, params, table)?;
            let lp1_next: f64 =
                u_next.values.iter().map(|v| stepper.h * v.norm().powf(p + 1.0)).sum();
            let j_next = a.rho - lp1_next / (p + 1.0);
            if j_next.is_finite() {
                proposal = Some((a, j_next));
            }
        }
        let Some((asm_next, j_next)) = proposal else {
            if halvings >= MAX_HALVINGS {
                status = RunStatus::BlowupSuspected;
                finish(&mut records);
                break;
            }
            halvings += 1;
            stepper = Stepper::new(params, table, cfg.scheme, stepper.dt * 0.5)?;
            increments.clear();
            continue;
        };

        // Per-step energy-identity increment; its running median flags spikes.
        let e = (j_next - j + stepper.dt * ut_used).abs();
        let spike = if increments.len() >= 30 {
            let mut sorted = increments.clone();
            sorted.sort_by(f64::total_cmp);
            let med = sorted[sorted.len() / 2];
            e > 10.0 * med && e > 1e-12 * j0v.abs().max(1.0)
        } else {
            false
        };
        if spike {
            if halvings >= MAX_HALVINGS {
                status = end_status(&u_next, &stepper, l2h0);
                finish(&mut records);
                break;
            }
            halvings += 1;
            stepper = Stepper::new(params, table, cfg.scheme, stepper.dt * 0.5)?;
            increments.clear();
            continue; // retry the same step at finer dt
        }
        increments.push(e);
        if increments.len() > 101 {
            increments.remove(0);
        }
        interval_start = Some((ut_used, l2h, stepper.dt));
        u = u_next;
        asm = asm_next;
        t += stepper.dt;
        step_idx += 1;
    }
    Ok(Trajectory { records, snapshots, final_field: u, status })
}

fn end_status(u: &Field, stepper: &Stepper, l2h0: f64) -> RunStatus {
    let grown = !u.is_finite() || stepper.graph_norm_sq(&u.values) > 100.0 * l2h0.max(1e-300);
    if grown {
        RunStatus::BlowupSuspected
    } else {
        RunStatus::StepFailure
    }
}

/// Summary of the energy-identity checks over a trace.
#[derive(Debug, Clone, Copy)]
pub struct MonitorReport {
    /// Final `|diss + J(t) − J(0)| / max(|J(0)|, 1)`.
    pub drift: f64,
    /// Max residual of `dJ/dt ≈ −‖u_t‖²` (central differences, scaled).
    pub max_dj_residual: f64,
    /// Max residual of `½ d/dt l2h ≈ −I` (central differences, scaled).
    pub max_i_residual: f64,
    /// Whether the dissipation integral never decreases.
    pub diss_nondecreasing: bool,
}

/// Evaluate the energy-identity drift and the differential identities by
/// trapezoid differencing over the records.
pub fn energy_monitor(records: &[TraceRecord]) -> Result<MonitorReport> {
    if records.len() < 2 {
        return Err(Error::Contract("energy monitor needs at least 2 records".into()));
    }
    let drift = records.last().unwrap().drift;
    let scale = records[0].j.abs().max(1.0);
    let mut max_dj = 0.0f64;
    let mut max_i = 0.0f64;
    for w in records.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let dt2 = c.t - a.t;
        if dt2 <= 0.0 {
            continue;
        }
        let dj = (c.j - a.j) / dt2;
        max_dj = max_dj.max((dj + b.ut_l2h).abs() / scale.max(b.ut_l2h.abs()));
        let dn = 0.5 * (c.l2h - a.l2h) / dt2;
        max_i = max_i.max((dn + b.i).abs() / scale.max(b.i.abs()));
    }
    let diss_nondecreasing = records.windows(2).all(|w| w[1].diss >= w[0].diss - 1e-300);
    Ok(MonitorReport { drift, max_dj_residual: max_dj, max_i_residual: max_i, diss_nondecreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{energy_report, gaussian_bump};
    use crate::grid::{build_kernel, Domain1D, MagneticField};
    use crate::nfunc::NFunction;
    use nalgebra::SymmetricEigen;

    fn setup(m: usize) -> (ProblemParams, KernelTable) {
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
    fn zero_field_is_equilibrium() {
        let (params, table) = setup(8);
        let stepper = Stepper::new(&params, &table, Scheme::Explicit, 1e-2).unwrap();
        let u = Field::zeros(params.domain);
        let out = stepper.step(&u, &params, &table).unwrap();
        assert!(out.u_next.values.iter().all(|v| v.norm() == 0.0));
        assert_eq!(out.ut_l2h, 0.0);
    }

    #[test]
    fn residual_real_for_real_field_without_magnetic_term() {
        let (params, table) = setup(8);
        let u = gaussian_bump(params.domain, 0.1, 0.3, 1.0, 0.0);
        let r = magnetic_residual(&u, &params, &table).unwrap();
        for v in &r.values {
            assert!(v.im.abs() < 1e-15 * v.re.abs().max(1.0));
        }
    }

    #[test]
    fn residual_is_linear_operator_for_quadratic_g() {
        // G = t², A = 0: the modular gradient is exactly 2·L u.
        let (params, table) = setup(8);
        let u = gaussian_bump(params.domain, -0.2, 0.25, 1.0, 0.4);
        let l = assemble_fractional_stiffness(&params.domain, &table);
        let h = params.domain.h();
        let r = magnetic_residual(&u, &params, &table).unwrap();
        for row in 0..params.domain.m {
            let mut expect = Complex64::new(0.0, 0.0);
            for col in 0..params.domain.m {
                expect += 2.0 * l[(row, col)] * u.values[col];
            }
            expect /= h;
            assert!((r.values[row] - expect).norm() < 1e-12 * expect.norm().max(1e-12));
        }
    }

    #[test]
    fn linear_eigenmode_decay_matches_closed_form() {
        // Quadratic G, tiny amplitude: the dynamics is u̇ ≈ −(hI+L)⁻¹ 2L u.
        // Seed with a generalized eigenvector (2L v = μ (hI+L) v) and compare
        // the decay factor against e^{−μT} to first order in dt.
        let (params, table) = setup(6);
        let m = params.domain.m;
        let h = params.domain.h();
        let l = assemble_fractional_stiffness(&params.domain, &table);
        let mut a = l.clone();
        for k in 0..m {
            a[(k, k)] += h;
        }
        // Generalized problem via the Cholesky congruence A = R^T R:
        // eigen of R^{-T} (2L) R^{-1}.
        let chol = Cholesky::new(a.clone()).unwrap();
        let r_inv = chol.l().transpose().try_inverse().unwrap();
        let sym = r_inv.transpose() * (2.0 * &l) * &r_inv;
        let eig = SymmetricEigen::new(sym);
        let idx = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let mu = eig.eigenvalues[idx];
        let y = eig.eigenvectors.column(idx).into_owned();
        let v = &r_inv * y;
        let amp = 1e-6; // keep the cubic term negligible
        let u0 = Field::from_values(
            params.domain,
            v.iter().map(|&x| Complex64::new(amp * x, 0.0)).collect(),
        )
        .unwrap();
        let dt = 1e-3;
        let t_end = 0.5;
        let cfg = StepperConfig {
            scheme: Scheme::Explicit,
            dt,
            t_end,
            record_every: 50,
            snapshots: 2,
        };
        let traj = evolve(&u0, &params, &table, &cfg).unwrap();
        assert_eq!(traj.status, RunStatus::Completed);
        let ratio = traj.final_field.values[m / 2].re / u0.values[m / 2].re;
        let exact = (-mu * t_end).exp();
        // First-order scheme: error O(dt·μ²·T).
        assert!(
            (ratio - exact).abs() < 5.0 * dt * mu * mu * t_end * exact.max(0.1) + 1e-9,
            "ratio={ratio} exact={exact} mu={mu}"
        );
    }

    #[test]
    fn richardson_dt_refinement_first_order() {
        // One macro-interval integrated at dt and dt/2: the distance to the
        // dt/8 reference must shrink roughly 2× (first-order scheme).
        let (params, table) = setup(8);
        let u0 = gaussian_bump(params.domain, 0.0, 0.3, 0.5, 0.0);
        let run = |dt: f64| -> Field {
            let cfg = StepperConfig {
                scheme: Scheme::Explicit,
                dt,
                t_end: 0.2,
                record_every: 1000,
                snapshots: 2,
            };
            evolve(&u0, &params, &table, &cfg).unwrap().final_field
        };
        let coarse = run(0.02);
        let fine = run(0.01);
        let reference = run(0.0025);
        let dist = |a: &Field, b: &Field| -> f64 {
            a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
        };
        let e1 = dist(&coarse, &reference);
        let e2 = dist(&fine, &reference);
        let factor = e1 / e2;
        assert!(factor > 1.5 && factor < 3.0, "refinement factor {factor}");
    }

    #[test]
    fn picard_agrees_with_explicit_on_smooth_run() {
        let (params, table) = setup(8);
        let u0 = gaussian_bump(params.domain, 0.0, 0.3, 0.4, 0.0);
        let mk = |scheme: Scheme| StepperConfig {
            scheme,
            dt: 1e-3,
            t_end: 0.1,
            record_every: 10,
            snapshots: 2,
        };
        let a = evolve(&u0, &params, &table, &mk(Scheme::Explicit)).unwrap();
        let b = evolve(
            &u0,
            &params,
            &table,
            &mk(Scheme::Picard { max_iters: 50, tol: 1e-12 }),
        )
        .unwrap();
        let diff: f64 = a
            .final_field
            .values
            .iter()
            .zip(&b.final_field.values)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 =
            a.final_field.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // Both schemes are O(dt); they differ at O(dt²) per step ~ O(dt) total.
        assert!(diff < 0.05 * scale, "diff={diff} scale={scale}");
    }

    #[test]
    fn energy_monitor_tracks_dissipation_identity() {
        let (params, table) = setup(16);
        let u0 = gaussian_bump(params.domain, 0.0, 0.3, 0.3, 0.0);
        let cfg = StepperConfig {
            scheme: Scheme::Explicit,
            dt: 1e-3,
            t_end: 1.0,
            record_every: 10,
            snapshots: 4,
        };
        let traj = evolve(&u0, &params, &table, &cfg).unwrap();
        assert_eq!(traj.status, RunStatus::Completed);
        let mon = energy_monitor(&traj.records).unwrap();
        assert!(mon.drift < 1e-2, "drift={}", mon.drift);
        assert!(mon.diss_nondecreasing);
        // J decreases along the flow (up to drift tolerance).
        for w in traj.records.windows(2) {
            assert!(w[1].j <= w[0].j + 1e-8 * w[0].j.abs().max(1.0));
        }
        // Differential identities hold to differencing order.
        assert!(mon.max_dj_residual < 0.05, "dJ residual {}", mon.max_dj_residual);
        assert!(mon.max_i_residual < 0.05, "I residual {}", mon.max_i_residual);
        // Energy report at the end agrees with the trace row.
        let rep = energy_report(&traj.final_field, &params, &table).unwrap();
        let last = traj.records.last().unwrap();
        assert!((rep.j - last.j).abs() < 1e-10 * rep.j.abs().max(1.0));
    }
}
