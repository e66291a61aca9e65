//! Flat key=value configuration: parsing, defaults, and validation gates.
//!
//! The format is one `key = value` pair per line, `#` starts a comment.
//! Parsing is not fail-fast: every violation is collected so a bad file is
//! fixed in one round trip.

use std::collections::BTreeMap;
use std::fmt;

use fracwell_core::evolve::Scheme;
use fracwell_core::functionals::ProblemParams;
use fracwell_core::grid::{Domain1D, MagneticField};
use fracwell_core::nfunc::NFunction;

/// How the initial field is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    GaussianBump { center: f64, width: f64, scale: f64, phase: f64 },
    Hat { scale: f64 },
    RandomSmooth { scale: f64 },
    FromFile { path: String },
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub s: f64,
    pub p: f64,
    pub g_kind: String,
    pub g_q: f64,
    pub g_q1: f64,
    pub g_q2: f64,
    pub domain_a: f64,
    pub domain_b: f64,
    pub m: usize,
    pub pad: usize,
    pub magnetic: MagneticField,
    pub initial: Initial,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub snapshots: usize,
    pub wells_trials: usize,
    pub groundstate_iters: usize,
    pub analyze_trace: Option<String>,
    pub seed: u64,
    /// Non-fatal advisories (e.g. the local-theory exponent range).
    pub warnings: Vec<String>,
}

/// All validation problems found in a config file.
#[derive(Debug)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.0 {
            writeln!(f, "config error: {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const KNOWN_KEYS: &[&str] = &[
    "frac.s",
    "p",
    "g.kind",
    "g.q",
    "g.q1",
    "g.q2",
    "domain",
    "m",
    "pad",
    "magnetic.kind",
    "magnetic.value",
    "initial.kind",
    "initial.center",
    "initial.width",
    "initial.scale",
    "initial.phase",
    "initial.path",
    "evolve.scheme",
    "evolve.dt",
    "evolve.t_end",
    "evolve.record_every",
    "evolve.snapshots",
    "evolve.picard_iters",
    "evolve.picard_tol",
    "wells.trials",
    "groundstate.iters",
    "analyze.trace",
    "seed",
];

/// Parse and validate a config file; returns every violation at once.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut map = BTreeMap::new();
    let mut errs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errs.push(format!("line {}: expected key = value, got `{line}`", lineno + 1));
            continue;
        };
        let key = k.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            errs.push(format!("line {}: unknown key `{key}`", lineno + 1));
            continue;
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            errs.push(format!("line {}: duplicate key `{key}`", lineno + 1));
        }
    }

    let f64_key = |key: &str, default: f64, errs: &mut Vec<String>| -> f64 {
        match map.get(key) {
            None => default,
            Some(v) => v.parse().unwrap_or_else(|_| {
                errs.push(format!("key `{key}`: expected a number, got `{v}`"));
                default
            }),
        }
    };
    let s = f64_key("frac.s", 0.4, &mut errs);
    let p = f64_key("p", 3.0, &mut errs);
    let g_q = f64_key("g.q", 2.0, &mut errs);
    let g_q1 = f64_key("g.q1", 2.0, &mut errs);
    let g_q2 = f64_key("g.q2", 4.0, &mut errs);
    let magnetic_value = f64_key("magnetic.value", 1.0, &mut errs);
    let init_center = f64_key("initial.center", 0.0, &mut errs);
    let init_width = f64_key("initial.width", 0.25, &mut errs);
    let init_scale = f64_key("initial.scale", 1.0, &mut errs);
    let init_phase = f64_key("initial.phase", 0.0, &mut errs);
    let dt = f64_key("evolve.dt", 1e-3, &mut errs);
    let t_end = f64_key("evolve.t_end", 2.0, &mut errs);
    let picard_tol = f64_key("evolve.picard_tol", 1e-10, &mut errs);

    let usize_key = |key: &str, default: usize, errs: &mut Vec<String>| -> usize {
        match map.get(key) {
            None => default,
            Some(v) => v.parse().unwrap_or_else(|_| {
                errs.push(format!("key `{key}`: expected a nonnegative integer, got `{v}`"));
                default
            }),
        }
    };
    let m = usize_key("m", 64, &mut errs);
    let pad = usize_key("pad", m, &mut errs);
    let record_every = usize_key("evolve.record_every", 10, &mut errs);
    let snapshots = usize_key("evolve.snapshots", 9, &mut errs);
    let picard_iters = usize_key("evolve.picard_iters", 50, &mut errs);
    let wells_trials = usize_key("wells.trials", 200, &mut errs);
    let groundstate_iters = usize_key("groundstate.iters", 20_000, &mut errs);
    let seed = match map.get("seed") {
        None => 42u64,
        Some(v) => v.parse().unwrap_or_else(|_| {
            errs.push(format!("key `seed`: expected an unsigned integer, got `{v}`"));
            42
        }),
    };

    let (domain_a, domain_b) = match map.get("domain") {
        None => (-1.0, 1.0),
        Some(v) => {
            let inner = v.trim().trim_start_matches('(').trim_end_matches(')');
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            let parsed = (parts.len() == 2)
                .then(|| Some((parts[0].parse::<f64>().ok()?, parts[1].parse::<f64>().ok()?)))
                .flatten();
            match parsed {
                Some((a, b)) if a < b => (a, b),
                _ => {
                    errs.push(format!("key `domain`: expected `(a, b)` with a < b, got `{v}`"));
                    (-1.0, 1.0)
                }
            }
        }
    };

    let g_kind = map.get("g.kind").cloned().unwrap_or_else(|| "power".into());
    match g_kind.as_str() {
        "power" | "power-sum" | "power-log" => {}
        other => errs.push(format!("key `g.kind`: unknown kind `{other}` (power, power-sum, power-log)")),
    }

    let magnetic = match map.get("magnetic.kind").map(String::as_str).unwrap_or("zero") {
        "zero" => MagneticField::Zero,
        "constant" => MagneticField::Constant(magnetic_value),
        "linear" => MagneticField::Linear(magnetic_value),
        other => {
            errs.push(format!("key `magnetic.kind`: unknown kind `{other}` (zero, constant, linear)"));
            MagneticField::Zero
        }
    };

    let initial = match map.get("initial.kind").map(String::as_str).unwrap_or("bump") {
        "bump" => Initial::GaussianBump {
            center: init_center,
            width: init_width,
            scale: init_scale,
            phase: init_phase,
        },
        "hat" => Initial::Hat { scale: init_scale },
        "random" => Initial::RandomSmooth { scale: init_scale },
        "file" => match map.get("initial.path") {
            Some(p) => Initial::FromFile { path: p.clone() },
            None => {
                errs.push("initial.kind=file requires initial.path".into());
                Initial::Hat { scale: init_scale }
            }
        },
        other => {
            errs.push(format!("key `initial.kind`: unknown kind `{other}` (bump, hat, random, file)"));
            Initial::Hat { scale: init_scale }
        }
    };

    let scheme = match map.get("evolve.scheme").map(String::as_str).unwrap_or("explicit") {
        "explicit" => Scheme::Explicit,
        "picard" => Scheme::Picard { max_iters: picard_iters, tol: picard_tol },
        other => {
            errs.push(format!("key `evolve.scheme`: unknown scheme `{other}` (explicit, picard)"));
            Scheme::Explicit
        }
    };

    // Structural gates.
    if !(s > 0.0 && s < 1.0) {
        errs.push(format!("frac.s must lie in (0, 1), got {s}"));
    }
    if !(p > 1.0) {
        errs.push(format!("p must exceed 1, got {p}"));
    }
    if m < 4 {
        errs.push(format!("m must be at least 4, got {m}"));
    }
    if pad < m {
        errs.push(format!("pad must be at least m, got pad={pad}, m={m}"));
    }
    if !(dt > 0.0) {
        errs.push(format!("evolve.dt must be positive, got {dt}"));
    }
    if !(t_end > 0.0) {
        errs.push(format!("evolve.t_end must be positive, got {t_end}"));
    }

    let mut warnings = Vec::new();
    // Exponent gates: 1 < q⁻ ≤ q⁺ < p+1 < q^{−*} (one spatial dimension).
    if errs.is_empty() {
        match build_nfunction(&g_kind, g_q, g_q1, g_q2) {
            Err(e) => errs.push(e),
            Ok(nf) => {
                let (qm, qp) = nf.exponent_bounds();
                if !(qm > 1.0) {
                    errs.push(format!("lower growth exponent must exceed 1, got {qm}"));
                }
                if !(qp < p + 1.0) {
                    errs.push(format!(
                        "upper growth exponent {qp} must stay below p+1 = {}",
                        p + 1.0
                    ));
                }
                let n_dim = 1.0;
                let q_star = if s * qm < n_dim {
                    n_dim * qm / (n_dim - s * qm)
                } else {
                    f64::INFINITY
                };
                if !(p + 1.0 < q_star) {
                    errs.push(format!(
                        "p+1 = {} must stay below the critical exponent {q_star}",
                        p + 1.0
                    ));
                }
                if n_dim - 2.0 * s > 0.0 && p > (n_dim + 2.0 * s) / (n_dim - 2.0 * s) {
                    warnings.push(format!(
                        "p = {p} exceeds the local-theory range bound {}",
                        (n_dim + 2.0 * s) / (n_dim - 2.0 * s)
                    ));
                }
            }
        }
    }

    if !errs.is_empty() {
        return Err(ConfigErrors(errs));
    }
    Ok(RunConfig {
        s,
        p,
        g_kind,
        g_q,
        g_q1,
        g_q2,
        domain_a,
        domain_b,
        m,
        pad,
        magnetic,
        initial,
        scheme,
        dt,
        t_end,
        record_every,
        snapshots,
        wells_trials,
        groundstate_iters,
        analyze_trace: map.get("analyze.trace").cloned(),
        seed,
        warnings,
    })
}

fn build_nfunction(kind: &str, q: f64, q1: f64, q2: f64) -> Result<NFunction, String> {
    let built = match kind {
        "power" => NFunction::power(q),
        "power-sum" => NFunction::power_sum(q1, q2),
        "power-log" => NFunction::power_log(q),
        other => return Err(format!("unknown g.kind `{other}`")),
    };
    built.map_err(|e| e.to_string())
}

impl RunConfig {
    /// Instantiate the problem (grid + physics) described by the config.
    pub fn problem(&self) -> Result<ProblemParams, String> {
        let domain = Domain1D::new(self.domain_a, self.domain_b, self.m, self.pad)
            .map_err(|e| e.to_string())?;
        let nfunc = build_nfunction(&self.g_kind, self.g_q, self.g_q1, self.g_q2)?;
        Ok(ProblemParams { domain, s: self.s, p: self.p, nfunc, magnetic: self.magnetic })
    }

    /// Echo of the effective configuration, one `key=value` per line.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        push("frac.s", self.s.to_string());
        push("p", self.p.to_string());
        push("g.kind", self.g_kind.clone());
        match self.g_kind.as_str() {
            "power-sum" => {
                push("g.q1", self.g_q1.to_string());
                push("g.q2", self.g_q2.to_string());
            }
            _ => push("g.q", self.g_q.to_string()),
        }
        push("domain", format!("({}, {})", self.domain_a, self.domain_b));
        push("m", self.m.to_string());
        push("pad", self.pad.to_string());
        match self.magnetic {
            MagneticField::Zero => push("magnetic.kind", "zero".into()),
            MagneticField::Constant(v) => {
                push("magnetic.kind", "constant".into());
                push("magnetic.value", v.to_string());
            }
            MagneticField::Linear(v) => {
                push("magnetic.kind", "linear".into());
                push("magnetic.value", v.to_string());
            }
        }
        match &self.initial {
            Initial::GaussianBump { center, width, scale, phase } => {
                push("initial.kind", "bump".into());
                push("initial.center", center.to_string());
                push("initial.width", width.to_string());
                push("initial.scale", scale.to_string());
                push("initial.phase", phase.to_string());
            }
            Initial::Hat { scale } => {
                push("initial.kind", "hat".into());
                push("initial.scale", scale.to_string());
            }
            Initial::RandomSmooth { scale } => {
                push("initial.kind", "random".into());
                push("initial.scale", scale.to_string());
            }
            Initial::FromFile { path } => {
                push("initial.kind", "file".into());
                push("initial.path", path.clone());
            }
        }
        match self.scheme {
            Scheme::Explicit => push("evolve.scheme", "explicit".into()),
            Scheme::Picard { max_iters, tol } => {
                push("evolve.scheme", "picard".into());
                push("evolve.picard_iters", max_iters.to_string());
                push("evolve.picard_tol", tol.to_string());
            }
        }
        push("evolve.dt", self.dt.to_string());
        push("evolve.t_end", self.t_end.to_string());
        push("evolve.record_every", self.record_every.to_string());
        push("evolve.snapshots", self.snapshots.to_string());
        push("wells.trials", self.wells_trials.to_string());
        push("groundstate.iters", self.groundstate_iters.to_string());
        push("seed", self.seed.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.m, 64);
        assert_eq!(cfg.seed, 42);
        assert!(cfg.warnings.is_empty());
        cfg.problem().unwrap();
    }

    #[test]
    fn example_line_from_contract() {
        let text = "frac.s=0.5\np=3\ng.kind=power\ng.q=2\ndomain=(-1,1)\nm=64\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.s, 0.5);
        assert_eq!((cfg.domain_a, cfg.domain_b), (-1.0, 1.0));
    }

    #[test]
    fn violations_are_collected_not_fail_fast() {
        let text = "g.q=1.0\np=0.9\nbogus=1\nm=2\n";
        let errs = parse_config(text).unwrap_err().0;
        assert!(errs.len() >= 3, "{errs:?}");
        assert!(errs.iter().any(|e| e.contains("bogus")));
        assert!(errs.iter().any(|e| e.contains("p must exceed 1")));
    }

    #[test]
    fn exponent_gate_rejects_supercritical_p() {
        // q⁺ = 4 is not below p+1 = 4.
        let text = "g.kind=power-sum\ng.q1=2\ng.q2=4\np=3\n";
        let errs = parse_config(text).unwrap_err().0;
        assert!(errs.iter().any(|e| e.contains("p+1")), "{errs:?}");
    }

    #[test]
    fn comments_and_duplicates() {
        let cfg = parse_config("# comment\nm = 16 # trailing\n").unwrap();
        assert_eq!(cfg.m, 16);
        assert!(parse_config("m=8\nm=8\n").is_err());
    }

    #[test]
    fn config_echo_reparses_to_itself() {
        let cfg = parse_config("m=16\ng.kind=power-log\ng.q=2.5\np=3.2\nmagnetic.kind=linear\n")
            .unwrap();
        let again = parse_config(&cfg.echo()).unwrap();
        assert_eq!(again.m, cfg.m);
        assert_eq!(again.g_kind, cfg.g_kind);
        assert_eq!(again.magnetic, cfg.magnetic);
        assert_eq!(again.echo(), cfg.echo());
    }
}
