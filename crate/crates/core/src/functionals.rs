//! Energy functionals and the potential-well landscape.
//!
//! For a field `u` the central quantities are the nonlocal modular
//! `ρ(u) = ∫∫ G(|D u|) dμ`, the energy `J(u) = ρ(u) − ‖u‖_{p+1}^{p+1}/(p+1)`,
//! the Nehari functional `I(u) = ∫∫ g(|D u|)|D u| dμ − ‖u‖_{p+1}^{p+1}`, and
//! the well landscape built from them: the embedding constant `C*`, the depth
//! bound `M`, the depth estimate `d`, the depth curve `d(δ)`, and the norm
//! gate `λ_α`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::evolve::TraceRecord;
use crate::grid::{covariant_quotient, plain_quotient, Domain1D, Field, KernelTable, MagneticField};
use crate::nfunc::{luxemburg_norm, NFunction};

/// One problem instance: grid, fractional order, nonlinearity power,
/// N-function and magnetic potential.
#[derive(Debug, Clone)]
pub struct ProblemParams {
    pub domain: Domain1D,
    pub s: f64,
    pub p: f64,
    pub nfunc: NFunction,
    pub magnetic: MagneticField,
}

/// Scalar diagnostics of a single field.
#[derive(Debug, Clone, Copy)]
pub struct EnergyReport {
    /// Nonlocal magnetic modular `ρ(u)`.
    pub rho_a: f64,
    /// Energy `J(u) = ρ − lp1/(p+1)`.
    pub j: f64,
    /// Nehari functional `I(u) = pairing − lp1`.
    pub i: f64,
    /// `∫∫ g(|D u|)|D u| dμ`.
    pub pairing: f64,
    /// `‖u‖_{p+1}^{p+1}` (nodal Riemann sum).
    pub lp1: f64,
    /// `‖u‖²_{s,2,0} = ‖u‖₂² + [u]²_{s,2}` (plain quotients, no phase).
    pub l2h: f64,
    /// Luxemburg seminorm `[u]` of the magnetic quotients.
    pub seminorm_a: f64,
}

/// Pair magnitudes of the magnetic quotients plus the nonlinear mass;
/// everything scale-dependent reduces to sums over this data.
pub(crate) struct PairData {
    /// `|D u|` per stored pair.
    d: Vec<f64>,
    /// Raw μ-weights per stored pair (factor 2 applied in the sums).
    w: Vec<f64>,
    /// `‖u‖_{p+1}^{p+1}`.
    lp1: f64,
}

impl PairData {
    pub(crate) fn build(u: &Field, params: &ProblemParams, table: &KernelTable) -> Result<PairData> {
        let q = covariant_quotient(u, table)?;
        let d: Vec<f64> = q.iter().map(|z| z.norm()).collect();
        let w: Vec<f64> = table.pairs.iter().map(|p| p.weight).collect();
        let h = params.domain.h();
        let lp1 = h * u.values.iter().map(|v| v.norm().powf(params.p + 1.0)).sum::<f64>();
        Ok(PairData { d, w, lp1 })
    }

    fn rho(&self, nf: &NFunction, lambda: f64) -> f64 {
        2.0 * self
            .d
            .iter()
            .zip(&self.w)
            .map(|(&d, &w)| w * nf.big_g(lambda * d))
            .sum::<f64>()
    }

    pub(crate) fn pairing(&self, nf: &NFunction, lambda: f64) -> f64 {
        2.0 * self
            .d
            .iter()
            .zip(&self.w)
            .map(|(&d, &w)| {
                let t = lambda * d;
                w * nf.g(t) * t
            })
            .sum::<f64>()
    }

    fn lp1(&self, p: f64, lambda: f64) -> f64 {
        lambda.powf(p + 1.0) * self.lp1
    }

    pub(crate) fn j(&self, nf: &NFunction, p: f64, lambda: f64) -> f64 {
        self.rho(nf, lambda) - self.lp1(p, lambda) / (p + 1.0)
    }

    /// `I_δ(λu) = δ·pairing(λu) − ‖λu‖_{p+1}^{p+1}`.
    fn i_delta(&self, nf: &NFunction, p: f64, lambda: f64, delta: f64) -> f64 {
        delta * self.pairing(nf, lambda) - self.lp1(p, lambda)
    }

    /// Root of `I_δ(λu) = 0` with a closed-form shortcut for the homogeneous
    /// power kind (where `δ·λ^q·pairing(u) = λ^{p+1}·lp1` solves exactly).
    pub(crate) fn lambda_root_fast(
        &self,
        nf: &NFunction,
        p: f64,
        delta: f64,
        guess: f64,
    ) -> Result<f64> {
        if let crate::nfunc::NFunctionKind::Power { q } = *nf.kind() {
            if self.lp1 <= 0.0 {
                return Err(Error::ProjectionUndefined("field has zero nonlinear mass".into()));
            }
            return Ok((delta * self.pairing(nf, 1.0) / self.lp1).powf(1.0 / (p + 1.0 - q)));
        }
        self.lambda_root(nf, p, delta, guess)
    }

    /// Root `λ > 0` of `I_δ(λu) = 0` by bracketed bisection, starting from a
    /// warm guess.  Returns an error when the nonlinear mass vanishes.
    pub(crate) fn lambda_root(&self, nf: &NFunction, p: f64, delta: f64, guess: f64) -> Result<f64> {
        if self.lp1 <= 0.0 {
            return Err(Error::ProjectionUndefined("field has zero nonlinear mass".into()));
        }
        let f = |lam: f64| self.i_delta(nf, p, lam, delta);
        let mut lo = guess.max(1e-12);
        let mut hi = lo;
        // I_δ(λu) > 0 for small λ and < 0 for large λ.
        let mut guard = 0;
        while f(lo) <= 0.0 && lo > 1e-150 && guard < 600 {
            lo /= 4.0;
            guard += 1;
        }
        if f(lo) <= 0.0 {
            return Err(Error::ProjectionUndefined("no positive branch of I found".into()));
        }
        hi = hi.max(lo * 4.0);
        while f(hi) >= 0.0 && hi < 1e150 && guard < 1200 {
            hi *= 4.0;
            guard += 1;
        }
        if f(hi) >= 0.0 {
            return Err(Error::ProjectionUndefined("no negative branch of I found".into()));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Compute all scalar diagnostics of `u` through the kernel table.
pub fn energy_report(u: &Field, params: &ProblemParams, table: &KernelTable) -> Result<EnergyReport> {
    let pd = PairData::build(u, params, table)?;
    let nf = &params.nfunc;
    let rho_a = pd.rho(nf, 1.0);
    let pairing = pd.pairing(nf, 1.0);
    let lp1 = pd.lp1;
    // Plain (phase-free) quadratic norm ‖u‖²_{s,2,0}.
    let plain = plain_quotient(u, table)?;
    let sem2: f64 = plain
        .iter()
        .zip(&pd.w)
        .map(|(z, &w)| 2.0 * w * z.norm_sqr())
        .sum();
    let h = params.domain.h();
    let l2: f64 = h * u.values.iter().map(|v| v.norm_sqr()).sum::<f64>();
    // Luxemburg seminorm over the pair measure (weights carry the factor 2).
    let w2: Vec<f64> = pd.w.iter().map(|&w| 2.0 * w).collect();
    let seminorm_a = luxemburg_norm(&pd.d, &w2, nf)?;
    Ok(EnergyReport {
        rho_a,
        j: rho_a - lp1 / (params.p + 1.0),
        i: pairing - lp1,
        pairing,
        lp1,
        l2h: l2 + sem2,
        seminorm_a,
    })
}

/// Project `u` onto the Nehari set: the unique `λ* > 0` with `I(λ*u) = 0`.
/// Returns `(λ*, J(λ*u))`.
pub fn nehari_project(u: &Field, params: &ProblemParams, table: &KernelTable) -> Result<(f64, f64)> {
    let pd = PairData::build(u, params, table)?;
    let lam = pd.lambda_root(&params.nfunc, params.p, 1.0, 1.0)?;
    Ok((lam, pd.j(&params.nfunc, params.p, lam)))
}

/// Gaussian bump `scale · exp(−(x−center)²/(2 width²)) · e^{iφ}` sampled on
/// the interior nodes.
pub fn gaussian_bump(domain: Domain1D, center: f64, width: f64, scale: f64, phase: f64) -> Field {
    let rot = Complex64::from_polar(1.0, phase);
    Field::from_fn(domain, |x| {
        let xi = (x - center) / width;
        rot * scale * (-0.5 * xi * xi).exp()
    })
}

/// Random trial field: Gaussian bump × random low-order polynomial × random
/// (global + linear) complex phase, with log-uniform amplitude.  Spans both
/// the small-amplitude `I > 0` and large-amplitude `I < 0` regimes.
pub fn random_trial(domain: Domain1D, rng: &mut impl Rng) -> Field {
    let span = domain.b - domain.a;
    loop {
        let center = domain.a + span * rng.gen_range(0.15..0.85);
        let width = span * rng.gen_range(0.05..0.25);
        let amp = 10f64.powf(rng.gen_range(-2.0..2.0));
        let c: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let theta0: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let freq: f64 = 4.0 / span * { let z: f64 = StandardNormal.sample(rng); z };
        let u = Field::from_fn(domain, |x| {
            let xi = (x - center) / width;
            let poly = c[0] + c[1] * xi + c[2] * xi * xi + c[3] * xi * xi * xi;
            Complex64::from_polar(1.0, theta0 + freq * x) * amp * poly * (-0.5 * xi * xi).exp()
        });
        if u.values.iter().map(|v| v.norm()).fold(0.0, f64::max) > 1e-8 {
            return u;
        }
    }
}

/// Estimate the best constant of `‖u‖_{p+1} ≤ C* [u]` by randomized search
/// plus hill climbing.  Returns the estimate (a lower bound on the true
/// constant) and the maximizing field.
pub fn estimate_c_star_with_argmax(
    params: &ProblemParams,
    table: &KernelTable,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<(f64, Field)> {
    if trials < 50 {
        return Err(Error::Config(format!("C* estimation needs at least 50 trials, got {trials}")));
    }
    let ratio = |u: &Field| -> Result<f64> {
        let rep = energy_report(u, params, table)?;
        if rep.seminorm_a <= 0.0 {
            return Ok(0.0);
        }
        Ok(rep.lp1.powf(1.0 / (params.p + 1.0)) / rep.seminorm_a)
    };
    let mut best = random_trial(params.domain, rng);
    let mut best_r = ratio(&best)?;
    for _ in 1..trials {
        let u = random_trial(params.domain, rng);
        let r = ratio(&u)?;
        if r > best_r {
            best_r = r;
            best = u;
        }
    }
    // Local hill climbing: nodal Gaussian perturbations with shrinking step,
    // plus amplitude jitter (the ratio is scale-dependent for general G).
    let rms = |u: &Field| -> f64 {
        (u.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / u.values.len() as f64).sqrt()
    };
    for &sigma in &[0.5, 0.2, 0.08, 0.03, 0.01] {
        for _ in 0..30 {
            let step = sigma * rms(&best);
            let mut cand = best.clone();
            for v in cand.values.iter_mut() {
                let dr: f64 = StandardNormal.sample(rng);
                let di: f64 = StandardNormal.sample(rng);
                *v += Complex64::new(step * dr, step * di);
            }
            let jitter = (0.3 * sigma * { let z: f64 = StandardNormal.sample(rng); z }).exp();
            let cand = cand.scaled(jitter);
            let r = ratio(&cand)?;
            if r > best_r {
                best_r = r;
                best = cand;
            }
        }
    }
    Ok((best_r, best))
}

/// Estimate of `C*` only (see [`estimate_c_star_with_argmax`]).
pub fn estimate_c_star(
    params: &ProblemParams,
    table: &KernelTable,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    estimate_c_star_with_argmax(params, table, trials, rng).map(|(c, _)| c)
}

/// Closed form `h(δ)` from an estimated `C*`:
/// `min over q ∈ {q⁻, q⁺} of ((q⁻)^{(p+1)/q⁻} δ / C*^{p+1})^{q/(p+1−q)}`.
pub fn h_of_delta(c_star: f64, q_minus: f64, q_plus: f64, p: f64, delta: f64) -> f64 {
    let base = q_minus.powf((p + 1.0) / q_minus) * delta / c_star.powf(p + 1.0);
    let e1 = base.powf(q_minus / (p + 1.0 - q_minus));
    let e2 = base.powf(q_plus / (p + 1.0 - q_plus));
    e1.min(e2)
}

/// The potential-well landscape computed from randomized Nehari samples.
#[derive(Debug, Clone)]
pub struct WellConstants {
    pub c_star: f64,
    pub q_minus: f64,
    pub q_plus: f64,
    pub p: f64,
    /// Depth lower bound `M = (1/q⁺ − 1/(p+1)) · min{h(1), 1}`.
    pub m_const: f64,
    /// Depth estimate: min of `J(λ*u)` over the Nehari-projected trials
    /// (an upper bound on the true infimum).
    pub d_est: f64,
    /// `d(δ)` sampled on a log grid of δ (always containing δ = 1).
    pub d_curve: Vec<(f64, f64)>,
    /// Extrapolated limit of `d(δ)` as δ → 0⁺ (clamped at 0).
    pub d0: f64,
    /// Root of `d(δ) = 0` in `(1, (p+1)/q⁻]`, when found.
    pub b_root: Option<f64>,
    /// Nehari samples `(J(λ*u), ‖λ*u‖²_{s,2,0})` backing `λ_α`.
    pub samples: Vec<(f64, f64)>,
}

impl WellConstants {
    /// Closed-form `h(δ)` from the stored `C*`.
    pub fn h(&self, delta: f64) -> f64 {
        h_of_delta(self.c_star, self.q_minus, self.q_plus, self.p, delta)
    }

    /// `λ_α`: minimum of `‖·‖²_{s,2,0}` over Nehari samples with `J ≤ α`;
    /// `None` when no sample qualifies.  Non-increasing in α by construction.
    pub fn lambda_alpha(&self, alpha: f64) -> Option<f64> {
        self.samples
            .iter()
            .filter(|(j, _)| *j <= alpha)
            .map(|(_, n)| *n)
            .fold(None, |acc: Option<f64>, n| Some(acc.map_or(n, |a| a.min(n))))
    }

    /// `d(δ)` evaluated from the sampled curve by linear interpolation.
    pub fn d_at(&self, delta: f64) -> f64 {
        let c = &self.d_curve;
        if delta <= c[0].0 {
            return c[0].1;
        }
        for w in c.windows(2) {
            if delta <= w[1].0 {
                let t = (delta - w[0].0) / (w[1].0 - w[0].0);
                return w[0].1 + t * (w[1].1 - w[0].1);
            }
        }
        c[c.len() - 1].1
    }
}

/// Number of δ samples of the depth curve.
const DELTA_GRID: usize = 64;
/// Trials retained (ranked by projected energy) for the δ-curve sweep.
const CURVE_SUBSET: usize = 24;

/// Compute the full well landscape from `trials` random fields.
pub fn well_constants(
    params: &ProblemParams,
    table: &KernelTable,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<WellConstants> {
    let (c_star, best) = estimate_c_star_with_argmax(params, table, trials, rng)?;
    let (q_minus, q_plus) = params.nfunc.exponent_bounds();
    let p = params.p;
    let m_const = (1.0 / q_plus - 1.0 / (p + 1.0)) * h_of_delta(c_star, q_minus, q_plus, p, 1.0).min(1.0);

    // Trial ensemble: fresh random fields plus the C*-maximizer, so that the
    // depth estimate sees the extremal profile that defines C*.
    let mut fields: Vec<Field> = (0..trials).map(|_| random_trial(params.domain, rng)).collect();
    fields.push(best);

    struct Projected {
        pd: PairData,
        lambda1: f64,
        j1: f64,
        l2h_unit: f64,
    }
    let mut proj = Vec::new();
    for u in &fields {
        let pd = PairData::build(u, params, table)?;
        if pd.lp1 <= 0.0 {
            continue;
        }
        let lambda1 = pd.lambda_root_fast(&params.nfunc, p, 1.0, 1.0)?;
        let j1 = pd.j(&params.nfunc, p, lambda1);
        // ‖u‖²_{s,2,0} scales quadratically, so one report suffices.
        let rep = energy_report(u, params, table)?;
        proj.push(Projected { pd, lambda1, j1, l2h_unit: rep.l2h });
    }
    if proj.is_empty() {
        return Err(Error::ProjectionUndefined("no usable trial fields".into()));
    }
    let d_est = proj.iter().map(|s| s.j1).fold(f64::INFINITY, f64::min);
    let samples: Vec<(f64, f64)> =
        proj.iter().map(|s| (s.j1, s.lambda1 * s.lambda1 * s.l2h_unit)).collect();

    // Depth curve over the best few trials (the minimum is attained by the
    // low-energy profiles; the full ensemble only adds cost).
    proj.sort_by(|a, b| a.j1.total_cmp(&b.j1));
    proj.truncate(CURVE_SUBSET.max(1));
    let delta_max = (p + 1.0) / q_minus;
    let mut deltas: Vec<f64> = (0..DELTA_GRID)
        .map(|k| {
            let t = k as f64 / (DELTA_GRID - 1) as f64;
            (0.01f64.ln() + t * (delta_max.ln() - 0.01f64.ln())).exp()
        })
        .collect();
    deltas.push(1.0);
    deltas.sort_by(f64::total_cmp);
    deltas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let d_of = |delta: f64, warm: &mut Vec<f64>| -> Result<f64> {
        let mut dmin = f64::INFINITY;
        for (k, s) in proj.iter().enumerate() {
            let lam = s.pd.lambda_root_fast(&params.nfunc, p, delta, warm[k])?;
            warm[k] = lam;
            dmin = dmin.min(s.pd.j(&params.nfunc, p, lam));
        }
        Ok(dmin)
    };
    let mut warm: Vec<f64> = proj.iter().map(|s| s.lambda1).collect();
    let mut d_curve = Vec::with_capacity(deltas.len());
    for &delta in &deltas {
        d_curve.push((delta, d_of(delta, &mut warm)?));
    }

    // Limit as δ → 0⁺: linear extrapolation from the two smallest samples.
    let d0 = {
        let (x0, y0) = d_curve[0];
        let (x1, y1) = d_curve[1];
        (y0 - (y1 - y0) / (x1 - x0) * x0).max(0.0)
    };

    // Root of d(δ) = 0 beyond δ = 1.
    let scale = d_curve.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let mut b_root = None;
    for w in d_curve.windows(2) {
        let ((da, va), (db, vb)) = (w[0], w[1]);
        if da >= 1.0 && va > 0.0 && vb <= 0.0 {
            // Refine by bisection on the sampled-minimum function.
            let (mut lo, mut hi) = (da, db);
            let mut warm: Vec<f64> = proj.iter().map(|s| s.lambda1).collect();
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if d_of(mid, &mut warm)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            b_root = Some(0.5 * (lo + hi));
            break;
        }
    }
    if b_root.is_none() {
        // d(δ_max) ≤ 0 analytically; accept the endpoint when the sampled
        // value has already collapsed to numerical zero.
        if let Some(&(dl, vl)) = d_curve.last() {
            if vl.abs() <= 1e-9 * scale.max(1e-300) {
                b_root = Some(dl);
            }
        }
    }

    Ok(WellConstants {
        c_star,
        q_minus,
        q_plus,
        p,
        m_const,
        d_est,
        d_curve,
        d0,
        b_root,
        samples,
    })
}

/// Standalone `λ_α` estimate from a fresh trial ensemble.
pub fn estimate_lambda_alpha(
    alpha: f64,
    params: &ProblemParams,
    table: &KernelTable,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<Option<f64>> {
    let mut best: Option<f64> = None;
    for _ in 0..trials {
        let u = random_trial(params.domain, rng);
        let Ok((lam, j)) = nehari_project(&u, params, table) else { continue };
        if j <= alpha {
            let rep = energy_report(&u, params, table)?;
            let norm = lam * lam * rep.l2h;
            best = Some(best.map_or(norm, |b: f64| b.min(norm)));
        }
    }
    Ok(best)
}

/// Relative tolerance declaring `I(u) = 0` (Nehari boundary).
pub const NEHARI_BOUNDARY_TOL: f64 = 1e-8;

/// Stability classes of initial data relative to the potential well.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Inside the well: `J < d`, `I > 0` (or the zero field).
    W,
    /// Outside the well: `J < d`, `I < 0`.
    V,
    /// On the Nehari set within tolerance.
    NehariBoundary,
    /// Above the well depth with `I > 0` and norm below the `λ_α` gate.
    HighEnergyStable,
    /// Above the well depth, no verdict.
    HighEnergyUnknown,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::W => "W",
            Classification::V => "V",
            Classification::NehariBoundary => "Nehari-boundary",
            Classification::HighEnergyStable => "HighEnergy-stable",
            Classification::HighEnergyUnknown => "HighEnergy-unknown",
        }
    }
}

/// Classify initial data from its energy report and the well constants.
pub fn classify(report: &EnergyReport, consts: &WellConstants) -> Classification {
    let scale = report.pairing.max(report.lp1);
    if scale == 0.0 {
        return Classification::W; // the zero field belongs to W by convention
    }
    let boundary = report.i.abs() <= NEHARI_BOUNDARY_TOL * scale;
    if report.j < consts.d_est {
        if boundary {
            Classification::NehariBoundary
        } else if report.i > 0.0 {
            Classification::W
        } else {
            Classification::V
        }
    } else if report.i > 0.0 && !boundary {
        match consts.lambda_alpha(report.j) {
            Some(gate) if report.l2h <= gate => Classification::HighEnergyStable,
            _ => Classification::HighEnergyUnknown,
        }
    } else {
        Classification::HighEnergyUnknown
    }
}

/// Sign history of `I_δ` along a trajectory for one δ.
#[derive(Debug, Clone, Copy)]
pub struct AuditEntry {
    pub delta: f64,
    /// Sign of `I_δ(u(0))`.
    pub initial_sign: i8,
    /// Whether the sign never flipped along the trace.
    pub sign_constant: bool,
}

/// Result of the invariant-set audit.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub applicable: bool,
    pub note: String,
    /// δ interval audited (roots of `d(δ) = J(u₀)` around δ = 1).
    pub delta_lo: f64,
    pub delta_hi: f64,
    pub entries: Vec<AuditEntry>,
}

/// Audit the invariance of the sets `{I_δ > 0}` / `{I_δ < 0}` along a
/// trajectory: for every sampled δ between the two roots of `d(δ) = J(u₀)`,
/// the sign of `I_δ(u(t)) = δ(I + lp1) − lp1` must stay constant.
pub fn invariance_audit(records: &[TraceRecord], consts: &WellConstants) -> AuditReport {
    if records.is_empty() {
        return AuditReport {
            applicable: false,
            note: "empty trace".into(),
            delta_lo: f64::NAN,
            delta_hi: f64::NAN,
            entries: Vec::new(),
        };
    }
    let j0 = records[0].j;
    if j0 >= consts.d_est {
        return AuditReport {
            applicable: false,
            note: format!("J(u0) = {j0} is not below the well depth estimate {}", consts.d_est),
            delta_lo: f64::NAN,
            delta_hi: f64::NAN,
            entries: Vec::new(),
        };
    }
    // Left root on the increasing branch (δ <= 1), right root on the
    // decreasing branch; the branch endpoints act as defaults.
    let curve = &consts.d_curve;
    let one = curve.iter().position(|(d, _)| (*d - 1.0).abs() < 1e-12).unwrap_or(curve.len() / 2);
    let mut delta_lo = curve[0].0;
    for k in (1..=one).rev() {
        if curve[k - 1].1 < j0 && j0 <= curve[k].1 {
            let (x0, y0) = curve[k - 1];
            let (x1, y1) = curve[k];
            delta_lo = x0 + (j0 - y0) / (y1 - y0) * (x1 - x0);
            break;
        }
    }
    let mut delta_hi = curve[curve.len() - 1].0;
    for k in one..curve.len() - 1 {
        if curve[k].1 >= j0 && j0 > curve[k + 1].1 {
            let (x0, y0) = curve[k];
            let (x1, y1) = curve[k + 1];
            delta_hi = x0 + (j0 - y0) / (y1 - y0) * (x1 - x0);
            break;
        }
    }
    let mut entries = Vec::new();
    for &(delta, _) in curve {
        if delta <= delta_lo || delta >= delta_hi {
            continue;
        }
        let sign_of = |r: &TraceRecord| -> i8 {
            let pairing = r.i + r.lp1;
            let v = delta * pairing - r.lp1;
            if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            }
        };
        let s0 = sign_of(&records[0]);
        let sign_constant = records.iter().all(|r| sign_of(r) == s0);
        entries.push(AuditEntry { delta, initial_sign: s0, sign_constant });
    }
    AuditReport { applicable: true, note: String::new(), delta_lo, delta_hi, entries }
}

/// Pointwise Lipschitz-type estimate for the nonlinearity:
/// `| |u₁|^{p−1}u₁ − |u₂|^{p−1}u₂ | ≤ p (|u₁|+|u₂|)^{p−1} |u₁−u₂|`.
pub fn nonlinear_lipschitz_check(u1: Complex64, u2: Complex64, p: f64) -> bool {
    let lhs = (u1 * u1.norm().powf(p - 1.0) - u2 * u2.norm().powf(p - 1.0)).norm();
    let rhs = p * (u1.norm() + u2.norm()).powf(p - 1.0) * (u1 - u2).norm();
    lhs <= rhs * (1.0 + 1e-9) + 1e-300
}

/// Strong-monotonicity data of the vector density `Ψ(z) = g(|z|) z/|z|`:
/// returns `(lhs, G_gap)` with `lhs = Re[(Ψ(a) − Ψ(b)) · conj(a − b)]` and
/// `G_gap = G(|a−b|)`.  `lhs ≥ 0` always; the ratio `lhs/G_gap` has a
/// positive lower bound per N-function family.
pub fn monotone_operator_check(a: Complex64, b: Complex64, nf: &NFunction) -> (f64, f64) {
    let psi = |z: Complex64| -> Complex64 {
        let n = z.norm();
        if n == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            z * (nf.g(n) / n)
        }
    };
    let lhs = ((psi(a) - psi(b)) * (a - b).conj()).re;
    (lhs, nf.big_g((a - b).norm()))
}
