//! N-functions (Young functions) and their calculus.
//!
//! An N-function is a convex function `G(t) = ∫₀ᵗ g(τ) dτ` with `g(0)=0`,
//! `g > 0` on `t > 0`, `g` nondecreasing and unbounded.  The growth of `G` is
//! summarized by the exponent bounds
//!
//! ```text
//! q⁻ = inf_{t>0} t·g(t)/G(t),    q⁺ = sup_{t>0} t·g(t)/G(t),
//! ```
//!
//! which control every inequality used downstream: power comparison,
//! the ζ± norm/modular sandwich, the doubling bound, and the complementary
//! (Young-conjugate) function `G̃`.  This module evaluates those objects
//! numerically and exposes the inequalities as checkable predicates.

use crate::error::{Error, Result};

/// Lower end of the log grid used to estimate exponent bounds.
const SCAN_LO: f64 = 1e-6;
/// Upper end of the log grid used to estimate exponent bounds.
const SCAN_HI: f64 = 1e6;
/// Number of scan points for exponent-bound estimation.
const SCAN_POINTS: usize = 10_000;

/// The parametric family of N-functions supported natively.
#[derive(Debug, Clone, PartialEq)]
pub enum NFunctionKind {
    /// `G(t) = t^q`, the plain power (already normalized: G(1)=1).
    Power { q: f64 },
    /// `G(t) = t^q1 + t^q2` with `1 < q1 <= q2`.
    PowerSum { q1: f64, q2: f64 },
    /// `G(t) = t^q · (1 + ln(1+t))`, a logarithmically perturbed power.
    PowerLog { q: f64 },
    /// Tabulated density `g` on a grid starting at `(0, 0)`; `G` is the
    /// cumulative trapezoid of the table, extended by a power law past the
    /// last sample.
    Custom { ts: Vec<f64>, gs: Vec<f64> },
}

/// An N-function together with its estimated exponent bounds.
///
/// `scale` multiplies both `G` and `g`; it is 1 unless [`NFunction::normalized`]
/// was used to enforce `G(1) = 1`.
#[derive(Debug, Clone)]
pub struct NFunction {
    kind: NFunctionKind,
    scale: f64,
    q_minus: f64,
    q_plus: f64,
    /// Cumulative trapezoid of a Custom table (empty otherwise).
    cum: Vec<f64>,
}

impl NFunction {
    /// Plain power `G(t) = t^q`, `q > 1`.
    pub fn power(q: f64) -> Result<Self> {
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::Config(format!("power exponent must exceed 1, got {q}")));
        }
        Self::finish(NFunctionKind::Power { q }, Vec::new())
    }

    /// Sum of two powers `G(t) = t^q1 + t^q2`, `1 < q1 <= q2`.
    pub fn power_sum(q1: f64, q2: f64) -> Result<Self> {
        if !(q1 > 1.0 && q2 >= q1) || !q1.is_finite() || !q2.is_finite() {
            return Err(Error::Config(format!(
                "power-sum exponents must satisfy 1 < q1 <= q2, got ({q1}, {q2})"
            )));
        }
        Self::finish(NFunctionKind::PowerSum { q1, q2 }, Vec::new())
    }

    /// Log-perturbed power `G(t) = t^q (1 + ln(1+t))`, `q > 1`.
    pub fn power_log(q: f64) -> Result<Self> {
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::Config(format!(
                "power-log exponent must exceed 1, got {q}"
            )));
        }
        Self::finish(NFunctionKind::PowerLog { q }, Vec::new())
    }

    /// Tabulated density.  `ts` must start at 0, be strictly increasing, and
    /// `gs` must start at 0, be nondecreasing and end positive.
    pub fn custom(ts: Vec<f64>, gs: Vec<f64>) -> Result<Self> {
        if ts.len() != gs.len() || ts.len() < 3 {
            return Err(Error::Config("custom table needs >= 3 aligned samples".into()));
        }
        if ts[0] != 0.0 || gs[0] != 0.0 {
            return Err(Error::Config("custom table must start at (0, 0)".into()));
        }
        for k in 1..ts.len() {
            if !(ts[k] > ts[k - 1]) {
                return Err(Error::Config("custom abscissae must strictly increase".into()));
            }
            if gs[k] < gs[k - 1] || !gs[k].is_finite() {
                return Err(Error::Config("custom density must be nondecreasing and finite".into()));
            }
        }
        if *gs.last().unwrap() <= 0.0 {
            return Err(Error::Config("custom density must become positive".into()));
        }
        // Cumulative trapezoid of g gives G at the table nodes.
        let mut cum = vec![0.0; ts.len()];
        for k in 1..ts.len() {
            cum[k] = cum[k - 1] + 0.5 * (gs[k] + gs[k - 1]) * (ts[k] - ts[k - 1]);
        }
        Self::finish(NFunctionKind::Custom { ts, gs }, cum)
    }

    fn finish(kind: NFunctionKind, cum: Vec<f64>) -> Result<Self> {
        let mut spec = NFunction { kind, scale: 1.0, q_minus: 0.0, q_plus: 0.0, cum };
        let (qm, qp) = spec.scan_bounds()?;
        spec.q_minus = qm;
        spec.q_plus = qp;
        Ok(spec)
    }

    /// Rescale so that `G(1) = 1` (exponent bounds are scale-invariant).
    pub fn normalized(mut self) -> Self {
        let g1 = self.big_g(1.0);
        if g1 > 0.0 && g1.is_finite() {
            self.scale /= g1;
        }
        self
    }

    pub fn kind(&self) -> &NFunctionKind {
        &self.kind
    }

    /// Exponent bounds `(q⁻, q⁺)` of `t·g(t)/G(t)`.
    ///
    /// Exact for the plain power; estimated by a log-grid scan otherwise.
    pub fn exponent_bounds(&self) -> (f64, f64) {
        (self.q_minus, self.q_plus)
    }

    /// Density `g(t)` for `t >= 0` (unchecked hot path).
    pub fn g(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        let raw = match &self.kind {
            NFunctionKind::Power { q } => q * t.powf(q - 1.0),
            NFunctionKind::PowerSum { q1, q2 } => q1 * t.powf(q1 - 1.0) + q2 * t.powf(q2 - 1.0),
            NFunctionKind::PowerLog { q } => {
                if t == 0.0 {
                    0.0
                } else {
                    q * t.powf(q - 1.0) * (1.0 + (1.0 + t).ln()) + t.powf(*q) / (1.0 + t)
                }
            }
            NFunctionKind::Custom { ts, gs } => custom_g(ts, gs, t),
        };
        self.scale * raw
    }

    /// `G(t)` for `t >= 0` (unchecked hot path).
    pub fn big_g(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        let raw = match &self.kind {
            NFunctionKind::Power { q } => t.powf(*q),
            NFunctionKind::PowerSum { q1, q2 } => t.powf(*q1) + t.powf(*q2),
            NFunctionKind::PowerLog { q } => {
                if t == 0.0 {
                    0.0
                } else {
                    t.powf(*q) * (1.0 + (1.0 + t).ln())
                }
            }
            NFunctionKind::Custom { ts, gs } => custom_big_g(ts, gs, &self.cum, t),
        };
        self.scale * raw
    }

    /// Checked evaluation of `G(t)`; rejects negative or non-finite input.
    pub fn eval_big_g(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!("G is evaluated on finite t >= 0, got {t}")));
        }
        Ok(self.big_g(t))
    }

    /// Derivative `g'(t)` — analytic for parametric kinds, central finite
    /// difference for Custom tables.
    pub fn g_prime(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0);
        let raw = match &self.kind {
            NFunctionKind::Power { q } => q * (q - 1.0) * t.powf(q - 2.0),
            NFunctionKind::PowerSum { q1, q2 } => {
                q1 * (q1 - 1.0) * t.powf(q1 - 2.0) + q2 * (q2 - 1.0) * t.powf(q2 - 2.0)
            }
            NFunctionKind::PowerLog { q } => {
                let l = 1.0 + (1.0 + t).ln();
                q * (q - 1.0) * t.powf(q - 2.0) * l
                    + q * t.powf(q - 1.0) / (1.0 + t)
                    + t.powf(q - 1.0) * (q + (q - 1.0) * t) / ((1.0 + t) * (1.0 + t))
            }
            NFunctionKind::Custom { .. } => {
                let eps = 1e-6 * t.max(1e-6);
                return (self.g(t + eps) - self.g((t - eps).max(0.0))) / (2.0 * eps);
            }
        };
        self.scale * raw
    }

    /// The conjugate-side calculus (g⁻¹, G̃, Sobolev-conjugate inverse).
    pub fn conjugate(&self) -> ConjugatePair<'_> {
        ConjugatePair { spec: self }
    }

    /// Sampled validation of the defining N-function properties: `g(0)=0`,
    /// `g` nondecreasing and positive, exponent bounds in range, the density
    /// bound `q⁻−1 ≤ t·g'(t)/g(t) ≤ q⁺−1`, the doubling bound
    /// `G(2t) ≤ 2^{q⁺} G(t)`, and convexity of `t ↦ G(√t)`.
    ///
    /// Returns a list of human-readable violations (empty when clean).
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.g(0.0) != 0.0 {
            bad.push("g(0) must be 0".into());
        }
        if !(self.q_minus > 1.0) {
            bad.push(format!("lower exponent bound must exceed 1, got {}", self.q_minus));
        }
        if self.q_plus < self.q_minus {
            bad.push("exponent bounds out of order".into());
        }
        let mut prev = 0.0;
        for &t in &log_grid(SCAN_LO, SCAN_HI, 400) {
            let gt = self.g(t);
            if gt <= 0.0 {
                bad.push(format!("g({t}) must be positive"));
                break;
            }
            if gt < prev * (1.0 - 1e-9) {
                bad.push(format!("g must be nondecreasing, drops near t={t}"));
                break;
            }
            prev = gt;
        }
        // Density exponent bound (finite differences where g' exists).
        for &t in &log_grid(1e-4, 1e4, 200) {
            let r = t * self.g_prime(t) / self.g(t);
            if r < self.q_minus - 1.0 - 1e-4 || r > self.q_plus - 1.0 + 1e-4 {
                bad.push(format!("t·g'/g = {r} escapes [q⁻−1, q⁺−1] near t={t}"));
                break;
            }
        }
        // Doubling bound with the exponent-implied constant.
        let c2 = 2f64.powf(self.q_plus);
        for &t in &log_grid(SCAN_LO, SCAN_HI / 2.0, 200) {
            if self.big_g(2.0 * t) > c2 * self.big_g(t) * (1.0 + 1e-9) {
                bad.push(format!("doubling bound G(2t) <= 2^q⁺ G(t) fails near t={t}"));
                break;
            }
        }
        // Convexity of t ↦ G(√t) by second differences.
        let grid = log_grid(1e-4, 1e4, 200);
        for w in grid.windows(3) {
            let (a, b, c) = (w[0], w[1], w[2]);
            // Non-uniform second difference of f(t) = G(√t).
            let (fa, fb, fc) = (self.big_g(a.sqrt()), self.big_g(b.sqrt()), self.big_g(c.sqrt()));
            let slope_left = (fb - fa) / (b - a);
            let slope_right = (fc - fb) / (c - b);
            if slope_right < slope_left * (1.0 - 1e-7) - 1e-12 {
                bad.push(format!("t -> G(sqrt t) is not convex near t={b}"));
                break;
            }
        }
        bad
    }

    /// Scan the growth ratio `t·g/G` and the density ratio `1 + t·g'/g` on a
    /// log grid and return the joint (min, max) envelope, so the returned
    /// constants satisfy both exponent inequalities simultaneously.
    fn scan_bounds(&self) -> Result<(f64, f64)> {
        match self.kind {
            // Homogeneity forces t·g/G = q exactly.
            NFunctionKind::Power { q } => return Ok((q, q)),
            // Both ratios are convex combinations of q1 and q2 with the
            // extremes attained in the t → 0 / t → ∞ limits, which the finite
            // scan would only approach from inside.
            NFunctionKind::PowerSum { q1, q2 } => return Ok((q1.min(q2), q1.max(q2))),
            _ => {}
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &t in &log_grid(SCAN_LO, SCAN_HI, SCAN_POINTS) {
            let big = self.big_g(t);
            let gt = self.g(t);
            if big <= 0.0 || gt <= 0.0 {
                continue;
            }
            let r = t * gt / big;
            let rd = 1.0 + t * self.g_prime(t) / gt;
            lo = lo.min(r).min(rd);
            hi = hi.max(r).max(rd);
        }
        if !(lo > 1.0) {
            return Err(Error::Config(format!(
                "scanned lower exponent bound {lo} does not exceed 1: not a valid N-function"
            )));
        }
        Ok((lo, hi))
    }
}

/// Linear interpolation of a tabulated density; power-law tail past the table.
fn custom_g(ts: &[f64], gs: &[f64], t: f64) -> f64 {
    let n = ts.len();
    if t <= 0.0 {
        return 0.0;
    }
    if t >= ts[n - 1] {
        let e = tail_exponent(ts, gs);
        return gs[n - 1] * (t / ts[n - 1]).powf(e);
    }
    let k = ts.partition_point(|&x| x <= t).min(n - 1);
    let (t0, t1, g0, g1) = (ts[k - 1], ts[k], gs[k - 1], gs[k]);
    g0 + (g1 - g0) * (t - t0) / (t1 - t0)
}

/// Trapezoid integral of the tabulated density up to `t`.
fn custom_big_g(ts: &[f64], gs: &[f64], cum: &[f64], t: f64) -> f64 {
    let n = ts.len();
    if t <= 0.0 {
        return 0.0;
    }
    if t >= ts[n - 1] {
        // ∫ g_n (τ/t_n)^e dτ from t_n to t.
        let e = tail_exponent(ts, gs);
        let tn = ts[n - 1];
        return cum[n - 1] + gs[n - 1] * tn / (e + 1.0) * ((t / tn).powf(e + 1.0) - 1.0);
    }
    let k = ts.partition_point(|&x| x <= t).min(n - 1);
    let gt = custom_g(ts, gs, t);
    cum[k - 1] + 0.5 * (gs[k - 1] + gt) * (t - ts[k - 1])
}

/// Log-slope of the last table segment, used to extend the density.
fn tail_exponent(ts: &[f64], gs: &[f64]) -> f64 {
    let n = ts.len();
    let (t0, t1, g0, g1) = (ts[n - 2], ts[n - 1], gs[n - 2], gs[n - 1]);
    if g0 > 0.0 && g1 > g0 {
        (g1 / g0).ln() / (t1 / t0).ln()
    } else {
        0.0 // flat tail: extend the density as a constant
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Conjugate-side calculus attached to an [`NFunction`].
pub struct ConjugatePair<'a> {
    spec: &'a NFunction,
}

impl ConjugatePair<'_> {
    /// Right-continuous inverse of the density, `g⁻¹(s) = inf{t : g(t) >= s}`,
    /// by monotone bisection.
    pub fn g_inv(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if let NFunctionKind::Power { q } = self.spec.kind {
            return (s / (self.spec.scale * q)).powf(1.0 / (q - 1.0));
        }
        invert_monotone(|t| self.spec.g(t), s)
    }

    /// Inverse of `G` by monotone bisection (closed form for plain powers).
    pub fn big_g_inv(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if let NFunctionKind::Power { q } = self.spec.kind {
            return (y / self.spec.scale).powf(1.0 / q);
        }
        invert_monotone(|t| self.spec.big_g(t), y)
    }

    /// Complementary N-function `G̃(s) = sup_{t>0} { s·t − G(t) }`.
    ///
    /// The supremum is attained at `t = g⁻¹(s)`, so it is evaluated there.
    pub fn g_tilde(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let t = self.g_inv(s);
        (s * t - self.spec.big_g(t)).max(0.0)
    }

    /// Inverse Sobolev conjugate `(G*)⁻¹(t) = ∫₀ᵗ G⁻¹(w) / w^{(N+s)/N} dw`.
    ///
    /// The integral is computed after the substitution `w = e^x`, which turns
    /// the power singularity at 0 into an exponential tail; composite Simpson
    /// on the `x` axis then converges fast.  Errors out when the integrand
    /// fails to decay at the lower limit (the integrability hypothesis on G).
    pub fn sobolev_conjugate_inv(&self, t: f64, s: f64, n_dim: u32) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!("upper limit must be finite and >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let n = n_dim as f64;
        // Decay rate of the substituted integrand e^{x(1/q₀ − s/N)} as
        // x → −∞, where q₀ is the near-zero growth exponent of G.
        let t_small = 1e-8;
        let q0 = t_small * self.spec.g(t_small) / self.spec.big_g(t_small);
        let rate = 1.0 / q0 - s / n;
        if rate <= 1e-9 {
            return Err(Error::Hypothesis(format!(
                "integrand of the Sobolev conjugate diverges at 0 (near-zero exponent {q0}, s={s}, N={n_dim})"
            )));
        }
        let x_hi = t.ln();
        let x_lo = x_hi - 45.0 / rate; // tail below e^{-45}: negligible
        let panels = 8192usize; // even
        let dx = (x_hi - x_lo) / panels as f64;
        let f = |x: f64| {
            let w = x.exp();
            self.big_g_inv(w) * (-x * s / n).exp()
        };
        let mut acc = f(x_lo) + f(x_hi);
        for k in 1..panels {
            let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += weight * f(x_lo + k as f64 * dx);
        }
        Ok(acc * dx / 3.0)
    }

    /// The Sobolev conjugate itself, obtained by inverting
    /// [`Self::sobolev_conjugate_inv`] with bisection.
    pub fn g_star(&self, y: f64, s: f64, n_dim: u32) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        // Probe once so a hypothesis failure surfaces immediately.
        self.sobolev_conjugate_inv(1.0, s, n_dim)?;
        Ok(invert_monotone(
            |t| self.sobolev_conjugate_inv(t, s, n_dim).unwrap_or(f64::INFINITY),
            y,
        ))
    }
}

/// Solve `f(t) = y` for a continuous nondecreasing `f` with `f(0)=0`,
/// `f(t) → ∞`, by geometric bracketing and bisection.
fn invert_monotone(f: impl Fn(f64) -> f64, y: f64) -> f64 {
    let mut hi = 1.0;
    let mut guard = 0;
    while f(hi) < y && guard < 4200 {
        hi *= 2.0;
        guard += 1;
    }
    let mut lo = hi / 2.0;
    while f(lo) > y && lo > f64::MIN_POSITIVE && guard < 8400 {
        lo /= 2.0;
        guard += 1;
    }
    // Bisect the exponent (geometric mean), so convergence is relative and
    // roots spanning hundreds of orders of magnitude stay accurate.
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `ζ⁻(t) = min{t^{q⁻}, t^{q⁺}}`.
pub fn zeta_minus(t: f64, q_minus: f64, q_plus: f64) -> f64 {
    t.powf(q_minus).min(t.powf(q_plus))
}

/// `ζ⁺(t) = max{t^{q⁻}, t^{q⁺}}`.
pub fn zeta_plus(t: f64, q_minus: f64, q_plus: f64) -> f64 {
    t.powf(q_minus).max(t.powf(q_plus))
}

/// Relative slack used by the inequality predicates to absorb roundoff.
const PREDICATE_SLACK: f64 = 1e-9;

/// Check the power comparison relations
/// `min{a^{q⁻},a^{q⁺}} G(b) ≤ G(ab) ≤ max{a^{q⁻},a^{q⁺}} G(b)`
/// and the density analogue with exponents `q∓ − 1`.
pub fn power_comparison_check(spec: &NFunction, a: f64, b: f64) -> bool {
    if !(a > 0.0 && b > 0.0) {
        return false;
    }
    let (qm, qp) = spec.exponent_bounds();
    let ok = |lo: f64, mid: f64, hi: f64| {
        lo <= mid * (1.0 + PREDICATE_SLACK) + f64::MIN_POSITIVE
            && mid <= hi * (1.0 + PREDICATE_SLACK) + f64::MIN_POSITIVE
    };
    let gb = spec.big_g(b);
    let g_ok = ok(zeta_minus(a, qm, qp) * gb, spec.big_g(a * b), zeta_plus(a, qm, qp) * gb);
    let db = spec.g(b);
    let d_ok = ok(
        zeta_minus(a, qm - 1.0, qp - 1.0) * db,
        spec.g(a * b),
        zeta_plus(a, qm - 1.0, qp - 1.0) * db,
    );
    g_ok && d_ok
}

/// Luxemburg norm of a weighted sample set:
/// `inf{λ > 0 : Σᵢ wᵢ G(|vᵢ|/λ) ≤ 1}` by monotone bisection.
pub fn luxemburg_norm(values: &[f64], weights: &[f64], spec: &NFunction) -> Result<f64> {
    luxemburg_norm_with(|t| spec.big_g(t), values, weights)
}

/// Luxemburg norm under an arbitrary Young function (used for `G̃`-norms).
pub fn luxemburg_norm_with(
    big_g: impl Fn(f64) -> f64,
    values: &[f64],
    weights: &[f64],
) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(Error::Contract("values and weights must be aligned".into()));
    }
    let mut vmax = 0.0f64;
    for (&v, &w) in values.iter().zip(weights) {
        if !v.is_finite() || !w.is_finite() || w < 0.0 {
            return Err(Error::Domain("non-finite sample or negative weight".into()));
        }
        if w > 0.0 {
            vmax = vmax.max(v.abs());
        }
    }
    if vmax == 0.0 {
        return Ok(0.0);
    }
    let modular = |lambda: f64| -> f64 {
        values
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&v, &w)| w * big_g(v.abs() / lambda))
            .sum()
    };
    // Geometric bracketing around the largest sample, then bisection.
    let mut lo = vmax * 1e-3;
    let mut hi = vmax * 1e3;
    let mut guard = 0;
    while modular(lo) < 1.0 && lo > f64::MIN_POSITIVE && guard < 2000 {
        lo /= 8.0;
        guard += 1;
    }
    while modular(hi) > 1.0 && hi < f64::MAX / 8.0 && guard < 4000 {
        hi *= 8.0;
        guard += 1;
    }
    if modular(lo) < 1.0 {
        // Modular stays below 1 even as λ → 0: degenerate sample set.
        return Ok(0.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Check the ζ± sandwich `ζ⁻(norm) ≤ modular ≤ ζ⁺(norm)` relating a modular
/// to its Luxemburg norm.
pub fn zeta_sandwich_check(modular: f64, norm: f64, spec: &NFunction) -> bool {
    let (qm, qp) = spec.exponent_bounds();
    zeta_minus(norm, qm, qp) <= modular * (1.0 + PREDICATE_SLACK) + 1e-300
        && modular <= zeta_plus(norm, qm, qp) * (1.0 + PREDICATE_SLACK) + 1e-300
}

/// Orlicz–Hölder inequality `Σ w·M·F ≤ 2 ‖M‖_G ‖F‖_{G̃}` on a weighted
/// sample set.
pub fn holder_orlicz_check(
    m_samples: &[f64],
    f_samples: &[f64],
    weights: &[f64],
    spec: &NFunction,
) -> Result<bool> {
    if m_samples.len() != f_samples.len() || m_samples.len() != weights.len() {
        return Err(Error::Contract("sample sets must be aligned".into()));
    }
    let lhs: f64 = m_samples
        .iter()
        .zip(f_samples)
        .zip(weights)
        .map(|((&m, &f), &w)| w * m.abs() * f.abs())
        .sum();
    let conj = spec.conjugate();
    let nm = luxemburg_norm(m_samples, weights, spec)?;
    let nf = luxemburg_norm_with(|t| conj.g_tilde(t), f_samples, weights)?;
    Ok(lhs <= 2.0 * nm * nf * (1.0 + 1e-8) + 1e-300)
}

/// Heuristic test of "B essentially stronger than A": samples `A(k·t)/B(t)`
/// on a geometric grid up to 1e8 and reports whether the ratio decreases
/// toward 0.
pub fn ess_stronger_check(
    a_fn: impl Fn(f64) -> f64,
    b_fn: impl Fn(f64) -> f64,
    k: f64,
) -> bool {
    if !(k > 0.0) {
        return false;
    }
    let grid = log_grid(1e2, 1e8, 25);
    let ratios: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let b = b_fn(t);
            if b > 0.0 { a_fn(k * t) / b } else { f64::INFINITY }
        })
        .collect();
    if ratios.iter().any(|r| !r.is_finite()) {
        return false;
    }
    // Decreasing over the tail and collapsed relative to the head.
    let tail_monotone = ratios[ratios.len() / 2..]
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let collapsed = ratios[ratios.len() - 1] < 0.1 * ratios[0];
    tail_monotone && collapsed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_g_power_closed_form() {
        let nf = NFunction::power(2.0).unwrap();
        assert_eq!(nf.eval_big_g(3.0).unwrap(), 9.0);
        assert_eq!(nf.eval_big_g(0.0).unwrap(), 0.0);
        assert_eq!(nf.eval_big_g(1.0).unwrap(), 1.0); // powers are normalized
        assert!(nf.eval_big_g(-1.0).is_err());
    }

    #[test]
    fn exponent_bounds_by_kind() {
        let (qm, qp) = NFunction::power(3.0).unwrap().exponent_bounds();
        assert_eq!((qm, qp), (3.0, 3.0));

        let (qm, qp) = NFunction::power_sum(2.0, 4.0).unwrap().exponent_bounds();
        assert!((qm - 2.0).abs() < 1e-9, "q_minus={qm}");
        assert!((qp - 4.0).abs() < 1e-9, "q_plus={qp}");

        // The log perturbation keeps the bounds inside (q, q+1).
        let (qm, qp) = NFunction::power_log(2.0).unwrap().exponent_bounds();
        assert!(qm > 2.0 - 1e-9 && qp < 3.0, "bounds=({qm},{qp})");
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(NFunction::power(1.0).is_err());
        assert!(NFunction::power_sum(3.0, 2.0).is_err());
        assert!(NFunction::custom(vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
        // Decreasing density violates monotonicity.
        assert!(NFunction::custom(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]).is_err());
        // Density not vanishing at 0.
        assert!(NFunction::custom(vec![0.0, 1.0, 2.0], vec![0.5, 1.0, 2.0]).is_err());
        // Bounded (capped) density: growth degenerates to linear, so the
        // scanned lower exponent bound collapses to 1.
        let ts: Vec<f64> = (0..200).map(|k| k as f64 * 0.05).collect();
        let gs: Vec<f64> = ts.iter().map(|&t| t.min(1.0)).collect();
        assert!(NFunction::custom(ts, gs).is_err());
    }

    #[test]
    fn custom_matches_power_table() {
        // Tabulate g(t) = 2t densely; G must track t² closely.
        let ts: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.005).collect();
        let gs: Vec<f64> = ts.iter().map(|&t| 2.0 * t).collect();
        let nf = NFunction::custom(ts, gs).unwrap();
        for t in [0.3, 1.0, 5.0, 19.0] {
            assert!((nf.big_g(t) - t * t).abs() < 1e-9 * t * t.max(1.0));
        }
        // Power-law tail extension past the table.
        assert!((nf.big_g(40.0) - 1600.0).abs() < 1e-6 * 1600.0);
        let (qm, qp) = nf.exponent_bounds();
        assert!(qm > 1.9 && qp < 2.1, "bounds=({qm},{qp})");
    }

    #[test]
    fn validate_accepts_all_kinds() {
        for nf in [
            NFunction::power(2.0).unwrap(),
            NFunction::power(3.5).unwrap(),
            NFunction::power_sum(2.0, 4.0).unwrap(),
            NFunction::power_log(2.5).unwrap(),
        ] {
            let bad = nf.validate();
            assert!(bad.is_empty(), "{:?}: {:?}", nf.kind(), bad);
        }
    }

    #[test]
    fn normalization_fixes_g_of_one() {
        let nf = NFunction::power_sum(2.0, 4.0).unwrap().normalized();
        assert!((nf.big_g(1.0) - 1.0).abs() < 1e-14);
        let (qm, qp) = nf.exponent_bounds();
        assert!((qm - 2.0).abs() < 1e-9 && (qp - 4.0).abs() < 1e-9);
    }

    #[test]
    fn conjugate_of_square_is_quarter_square() {
        // G(t)=t² has G̃(s)=s²/4; the sup-formula evaluation must match.
        let nf = NFunction::power(2.0).unwrap();
        let conj = nf.conjugate();
        for s in [0.1, 1.0, 3.0, 17.0] {
            assert!(
                (conj.g_tilde(s) - s * s / 4.0).abs() < 1e-8 * (s * s).max(1.0),
                "s={s}"
            );
        }
    }

    #[test]
    fn conjugate_of_power_general_closed_form() {
        // For G=t^q: G̃(s) = s·t* − t*^q with t* = (s/q)^{1/(q-1)}.
        let q = 3.0;
        let nf = NFunction::power(q).unwrap();
        let conj = nf.conjugate();
        for s in [0.2, 1.0, 8.0] {
            let t = (s / q).powf(1.0 / (q - 1.0));
            let exact = s * t - t.powf(q);
            assert!((conj.g_tilde(s) - exact).abs() < 1e-8 * exact.max(1.0), "s={s}");
        }
    }

    #[test]
    fn luxemburg_single_cell() {
        let nf = NFunction::power(2.0).unwrap();
        let lam = luxemburg_norm(&[5.0], &[1.0], &nf).unwrap();
        assert!((lam - 5.0).abs() < 1e-10);
        assert_eq!(luxemburg_norm(&[0.0, 0.0], &[1.0, 2.0], &nf).unwrap(), 0.0);
        assert!(luxemburg_norm(&[f64::NAN], &[1.0], &nf).is_err());
    }

    #[test]
    fn luxemburg_modular_consistency() {
        // Substituting the norm back must give modular 1 ± 1e−10.
        let nf = NFunction::power(3.0).unwrap();
        let values = [0.3, 1.7, 0.02, 4.1, 2.6];
        let weights = [0.5, 0.1, 2.0, 0.25, 0.7];
        let lam = luxemburg_norm(&values, &weights, &nf).unwrap();
        let modular: f64 = values
            .iter()
            .zip(&weights)
            .map(|(&v, &w)| w * nf.big_g(v / lam))
            .sum();
        assert!((modular - 1.0).abs() < 1e-10, "modular={modular}");
    }

    #[test]
    fn sobolev_conjugate_inv_matches_power_integral() {
        // Power(q): (G*)⁻¹(t) = t^{1/q − s} / (1/q − s) for s·q < 1, N=1.
        let (q, s) = (2.0, 0.4);
        let nf = NFunction::power(q).unwrap();
        let conj = nf.conjugate();
        for t in [0.5_f64, 1.0, 2.0] {
            let exact = t.powf(1.0 / q - s) / (1.0 / q - s);
            let got = conj.sobolev_conjugate_inv(t, s, 1).unwrap();
            assert!((got - exact).abs() < 1e-6 * exact, "t={t}: got {got}, exact {exact}");
        }
        assert_eq!(conj.sobolev_conjugate_inv(0.0, s, 1).unwrap(), 0.0);
    }

    #[test]
    fn sobolev_conjugate_inv_rejects_non_integrable() {
        // s·q >= 1 makes the integrand non-integrable at 0.
        let nf = NFunction::power(2.0).unwrap();
        let conj = nf.conjugate();
        assert!(matches!(
            conj.sobolev_conjugate_inv(1.0, 0.6, 1),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn ess_stronger_examples() {
        // t² vs t³: ratio k²/t → 0.
        assert!(ess_stronger_check(|t| t * t, |t| t * t * t, 3.0));
        // A = B: ratio is the constant k², never vanishing.
        assert!(!ess_stronger_check(|t| t * t, |t| t * t, 1.0));
        // Nonlinearity power below the critical Sobolev exponent.
        let (q, s, p) = (2.0, 0.4, 3.0);
        let nf = NFunction::power(q).unwrap();
        let conj = nf.conjugate();
        assert!(ess_stronger_check(
            |t| t.powf(p + 1.0),
            |t| conj.g_star(t, s, 1).unwrap(),
            2.0
        ));
    }

    #[test]
    fn holder_trivial_cases() {
        let nf = NFunction::power(2.0).unwrap();
        assert!(holder_orlicz_check(&[1.0, 2.0], &[0.0, 0.0], &[1.0, 1.0], &nf).unwrap());
        assert!(holder_orlicz_check(&[3.0], &[3.0], &[0.5], &nf).unwrap());
    }

    #[test]
    fn power_comparison_trivial_cases() {
        let nf = NFunction::power(2.0).unwrap();
        assert!(power_comparison_check(&nf, 0.5, 1.0));
        assert!(power_comparison_check(&nf, 1.0, 7.3));
        let ps = NFunction::power_sum(2.0, 4.0).unwrap();
        assert!(power_comparison_check(&ps, 0.01, 12.0));
    }
}
