//! 1-D grid with zero exterior extension and quadrature for the singular
//! pair measure `dμ = dx dy / |x−y|`.
//!
//! The computational window is the interval `(a, b)` with `M` interior nodes
//! plus `pad` exterior nodes on each side where the field is pinned to zero.
//! Nonlocal quantities integrate over all node pairs except
//! exterior–exterior ones (those carry no information once the field
//! vanishes outside), with each unordered pair stored once and a factor 2
//! applied by the consumers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// The interval `(a, b)` with `M` interior nodes and `pad` zero nodes per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain1D {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub pad: usize,
}

impl Domain1D {
    pub fn new(a: f64, b: f64, m: usize, pad: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Config(format!("domain requires a < b, got ({a}, {b})")));
        }
        if m < 4 {
            return Err(Error::Config(format!("need at least 4 interior nodes, got {m}")));
        }
        if pad < m {
            return Err(Error::Config(format!(
                "exterior padding must cover at least one domain width: pad={pad} < m={m}"
            )));
        }
        Ok(Domain1D { a, b, m, pad })
    }

    /// Node spacing `h = (b − a)/(M + 1)`.
    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.m + 1) as f64
    }

    /// Total node count of the padded grid.
    pub fn total_nodes(&self) -> usize {
        self.m + 2 * self.pad
    }

    /// Coordinate of a padded-grid node (interior nodes occupy
    /// `pad .. pad + m`).
    pub fn coord(&self, global: usize) -> f64 {
        self.a + (global as f64 - self.pad as f64 + 1.0) * self.h()
    }

    /// Whether a padded-grid index is an interior node.
    pub fn is_interior(&self, global: usize) -> bool {
        global >= self.pad && global < self.pad + self.m
    }

    /// Coordinates of the interior nodes.
    pub fn interior_coords(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.coord(self.pad + i)).collect()
    }
}

/// Complex field on the interior nodes, implicitly zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub domain: Domain1D,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(domain: Domain1D) -> Self {
        Field { domain, values: vec![Complex64::new(0.0, 0.0); domain.m] }
    }

    pub fn from_values(domain: Domain1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.m {
            return Err(Error::Contract(format!(
                "field length {} does not match interior node count {}",
                values.len(),
                domain.m
            )));
        }
        Ok(Field { domain, values })
    }

    /// Sample a scalar function of `x` on the interior nodes.
    pub fn from_fn(domain: Domain1D, f: impl Fn(f64) -> Complex64) -> Self {
        let values = domain.interior_coords().iter().map(|&x| f(x)).collect();
        Field { domain, values }
    }

    /// Value at a padded-grid index (zero on exterior nodes).
    pub fn value_at(&self, global: usize) -> Complex64 {
        if self.domain.is_interior(global) {
            self.values[global - self.domain.pad]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field {
            domain: self.domain,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// The magnetic potential `A(x)` (a scalar in one dimension).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MagneticField {
    Zero,
    Constant(f64),
    Linear(f64),
}

impl MagneticField {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            MagneticField::Zero => 0.0,
            MagneticField::Constant(c) => *c,
            MagneticField::Linear(c) => c * x,
        }
    }
}

/// One precomputed unordered node pair `(i < j)` of the quadrature.
#[derive(Debug, Clone, Copy)]
pub struct KernelPair {
    /// Padded-grid indices.
    pub i: usize,
    pub j: usize,
    /// μ-measure cell weight `h² / |x_i − x_j|`.
    pub weight: f64,
    /// `|x_i − x_j|^{−s}` cache.
    pub inv_s: f64,
    /// `|x_i − x_j|^{−2s}` cache.
    pub inv_2s: f64,
    /// Midpoint phase `(x_i − x_j) · A((x_i + x_j)/2)`.
    pub phase: f64,
}

/// Pair list and caches for the nonlocal double integrals.
///
/// Pairs cover every unordered node pair of the padded grid with at least one
/// interior member; the diagonal is excluded.  Consumers apply a factor 2 to
/// convert unordered sums into the symmetric double integral.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub domain: Domain1D,
    pub s: f64,
    pub pairs: Vec<KernelPair>,
}

/// Build the quadrature table for a fractional order `s ∈ (0,1)` and a
/// magnetic potential `a_field`.
pub fn build_kernel(domain: Domain1D, s: f64, a_field: &MagneticField) -> Result<KernelTable> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Config(format!("fractional order must lie in (0,1), got {s}")));
    }
    let n = domain.total_nodes();
    let h = domain.h();
    let w_cell = h * h;
    let mut pairs = Vec::new();
    for i in 0..n {
        let xi = domain.coord(i);
        let i_int = domain.is_interior(i);
        for j in (i + 1)..n {
            if !i_int && !domain.is_interior(j) {
                continue; // exterior–exterior pairs carry no field data
            }
            let xj = domain.coord(j);
            let d = ((j - i) as f64) * h;
            let mid = 0.5 * (xi + xj);
            pairs.push(KernelPair {
                i,
                j,
                weight: w_cell / d,
                inv_s: d.powf(-s),
                inv_2s: d.powf(-2.0 * s),
                phase: (xi - xj) * a_field.eval(mid),
            });
        }
    }
    Ok(KernelTable { domain, s, pairs })
}

fn check_same_grid(u: &Field, table: &KernelTable) -> Result<()> {
    if u.domain != table.domain {
        return Err(Error::Contract("field and kernel table live on different grids".into()));
    }
    Ok(())
}

/// Magnetic difference quotient per pair, in stored `(i, j)` orientation:
/// `D(x_i, x_j) = (u_i − e^{iφ_ij} u_j) / |x_i − x_j|^s`.
pub fn covariant_quotient(u: &Field, table: &KernelTable) -> Result<Vec<Complex64>> {
    check_same_grid(u, table)?;
    Ok(table
        .pairs
        .iter()
        .map(|p| {
            let ui = u.value_at(p.i);
            let uj = u.value_at(p.j);
            (ui - Complex64::from_polar(1.0, p.phase) * uj) * p.inv_s
        })
        .collect())
}

/// Plain difference quotient per pair: `(u_i − u_j) / |x_i − x_j|^s`.
pub fn plain_quotient(u: &Field, table: &KernelTable) -> Result<Vec<Complex64>> {
    check_same_grid(u, table)?;
    Ok(table
        .pairs
        .iter()
        .map(|p| (u.value_at(p.i) - u.value_at(p.j)) * p.inv_s)
        .collect())
}

/// Assemble the `M×M` real stiffness matrix of the quadratic seminorm:
/// `uᴴ L u = 2 Σ_pairs w |u_i − u_j|² / |x_i − x_j|^{2s}` (exterior zero).
///
/// The matrix is symmetric and positive definite on interior fields because
/// interior–exterior couplings contribute pure diagonal mass.
pub fn assemble_fractional_stiffness(domain: &Domain1D, table: &KernelTable) -> DMatrix<f64> {
    let m = domain.m;
    let pad = domain.pad;
    let mut l = DMatrix::<f64>::zeros(m, m);
    for p in &table.pairs {
        let c = 2.0 * p.weight * p.inv_2s;
        let i_int = domain.is_interior(p.i);
        let j_int = domain.is_interior(p.j);
        match (i_int, j_int) {
            (true, true) => {
                let (a, b) = (p.i - pad, p.j - pad);
                l[(a, a)] += c;
                l[(b, b)] += c;
                l[(a, b)] -= c;
                l[(b, a)] -= c;
            }
            (true, false) => l[(p.i - pad, p.i - pad)] += c,
            (false, true) => l[(p.j - pad, p.j - pad)] += c,
            (false, false) => unreachable!("exterior-exterior pairs are never stored"),
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn small_domain() -> Domain1D {
        Domain1D::new(-1.0, 1.0, 4, 4).unwrap()
    }

    #[test]
    fn domain_validation() {
        assert!(Domain1D::new(1.0, -1.0, 8, 8).is_err());
        assert!(Domain1D::new(-1.0, 1.0, 3, 8).is_err());
        assert!(Domain1D::new(-1.0, 1.0, 8, 4).is_err());
        let d = Domain1D::new(-1.0, 1.0, 4, 4).unwrap();
        assert!((d.h() - 0.4).abs() < 1e-15);
        // Interior nodes sit strictly inside (a, b), symmetric around 0.
        let xs = d.interior_coords();
        assert_eq!(xs.len(), 4);
        assert!((xs[0] + 0.6).abs() < 1e-15 && (xs[3] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn kernel_pair_count_and_symmetry() {
        // M=2 is below the Domain1D floor, so count pairs on M=4, pad=4:
        // C(12,2) = 66 total unordered pairs, C(8,2) = 28 exterior-exterior.
        let d = small_domain();
        let t = build_kernel(d, 0.5, &MagneticField::Zero).unwrap();
        assert_eq!(t.pairs.len(), 66 - 28);
        for p in &t.pairs {
            assert!(p.i < p.j);
            assert!(p.weight > 0.0 && p.weight.is_finite());
            // Distance caches agree with the coordinates.
            let dist = (d.coord(p.j) - d.coord(p.i)).abs();
            assert!((p.inv_s - dist.powf(-0.5)).abs() < 1e-14 * p.inv_s);
            assert!((p.inv_2s - dist.powf(-1.0)).abs() < 1e-14 * p.inv_2s);
        }
        assert!(build_kernel(d, 1.0, &MagneticField::Zero).is_err());
        assert!(build_kernel(d, 0.0, &MagneticField::Zero).is_err());
    }

    #[test]
    fn covariant_quotient_hand_computed() {
        // Hat field on M=4: u = (0.5, 1, 1, 0.5), constant potential A = 2.
        // Check a handful of pairs against the definition evaluated by hand.
        let d = small_domain();
        let s = 0.5;
        let a = MagneticField::Constant(2.0);
        let t = build_kernel(d, s, &a).unwrap();
        let u = Field::from_values(
            d,
            vec![
                Complex64::new(0.5, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        )
        .unwrap();
        let q = covariant_quotient(&u, &t).unwrap();
        for (p, &val) in t.pairs.iter().zip(&q) {
            let xi = d.coord(p.i);
            let xj = d.coord(p.j);
            let phi = (xi - xj) * 2.0;
            let expect =
                (u.value_at(p.i) - Complex64::from_polar(1.0, phi) * u.value_at(p.j))
                    / (xj - xi).abs().powf(s);
            assert!((val - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn plain_equals_covariant_without_field() {
        let d = small_domain();
        let t = build_kernel(d, 0.3, &MagneticField::Zero).unwrap();
        let u = Field::from_fn(d, |x| Complex64::new(x.sin(), x.cos()));
        let a = plain_quotient(&u, &t).unwrap();
        let b = covariant_quotient(&u, &t).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_interior_field_quotients() {
        // Constant interior field: interior-interior quotients vanish,
        // interior-exterior ones do not (the zero extension is felt).
        let d = small_domain();
        let t = build_kernel(d, 0.5, &MagneticField::Zero).unwrap();
        let u = Field::from_fn(d, |_| Complex64::new(1.0, 0.0));
        let q = plain_quotient(&u, &t).unwrap();
        for (p, &val) in t.pairs.iter().zip(&q) {
            if d.is_interior(p.i) && d.is_interior(p.j) {
                assert!(val.norm() < 1e-15);
            } else {
                assert!(val.norm() > 0.0);
            }
        }
    }

    #[test]
    fn stiffness_matches_pair_sum() {
        let d = Domain1D::new(-1.0, 1.0, 6, 6).unwrap();
        let t = build_kernel(d, 0.7, &MagneticField::Zero).unwrap();
        let l = assemble_fractional_stiffness(&d, &t);
        let u = Field::from_fn(d, |x| Complex64::new((3.0 * x).sin(), x * x));
        // Quadratic form via the matrix (real and imaginary parts separately).
        let re = DVector::from_iterator(d.m, u.values.iter().map(|v| v.re));
        let im = DVector::from_iterator(d.m, u.values.iter().map(|v| v.im));
        let quad = (re.transpose() * &l * &re)[(0, 0)] + (im.transpose() * &l * &im)[(0, 0)];
        // Direct pair sum.
        let direct: f64 = t
            .pairs
            .iter()
            .map(|p| {
                let diff = u.value_at(p.i) - u.value_at(p.j);
                2.0 * p.weight * p.inv_2s * diff.norm_sqr()
            })
            .sum();
        assert!((quad - direct).abs() < 1e-12 * direct, "quad={quad} direct={direct}");
        // Zero field gives zero energy; constants are NOT in the kernel.
        assert!(l.column_sum().iter().all(|&c| c > 0.0));
    }

    #[test]
    fn phase_invariance_of_quotient_magnitudes() {
        let d = small_domain();
        let t = build_kernel(d, 0.5, &MagneticField::Linear(1.5)).unwrap();
        let u = Field::from_fn(d, |x| Complex64::new(x, -x * x));
        let rot = Field::from_values(
            d,
            u.values.iter().map(|v| v * Complex64::from_polar(1.0, 0.9)).collect(),
        )
        .unwrap();
        let qa = covariant_quotient(&u, &t).unwrap();
        let qb = covariant_quotient(&rot, &t).unwrap();
        for (x, y) in qa.iter().zip(&qb) {
            assert!((x.norm() - y.norm()).abs() < 1e-13);
        }
    }
}
