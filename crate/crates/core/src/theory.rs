//! Closed forms of the limiting law.
//!
//! The full law describes all `n` eigenvalues of `P V Q Vᴴ P` (Bernoulli
//! diagonal projections `P`, `Q` keeping indices with probability `1 - p`
//! and `1 - q`). It has an atom `max(p, q)` at 0, an atom
//! `max(0, 1 - (p + q))` at 1 and the continuous part
//!
//! ```text
//! f(x) = sqrt((1 - r₋/x)(r₊/x - 1)) / (2π(1 - x)),    r₋ < x < r₊,
//! r∓ = (sqrt(p(1-q)) ∓ sqrt(q(1-p)))².
//! ```
//!
//! The theorem law is the law of the `min(|Ω|, |T|)` largest eigenvalues of
//! the restricted matrix: the atom at 0 is dropped and the rest divided by
//! `1 - max(p, q)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use crate::error::{Error, Result};
use crate::mats::C64;
use crate::quadrature::GaussLegendre;

/// Gauss-Legendre nodes per panel for the law's integrals.
pub const DEFAULT_QUADRATURE_NODES: usize = 129;

/// Imaginary offset used when recovering the density from the Stieltjes
/// transform.
pub const DEFAULT_INVERSION_OFFSET: f64 = 1e-6;

/// Erasure probabilities: `p` for columns, `q` for rows.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LawParams {
    p: f64,
    q: f64,
}

impl LawParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", p, "0 < p < 1"));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::param("q", q, "0 < q < 1"));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn max(&self) -> f64 {
        self.p.max(self.q)
    }

    pub fn min(&self) -> f64 {
        self.p.min(self.q)
    }

    pub fn swapped(&self) -> Self {
        Self {
            p: self.q,
            q: self.p,
        }
    }

    pub fn edges(&self) -> LawEdges {
        edges(*self)
    }
}

impl fmt::Display for LawParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, q={})", self.p, self.q)
    }
}

/// Endpoints of the continuous support.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LawEdges {
    pub r_minus: f64,
    pub r_plus: f64,
}

impl LawEdges {
    pub fn width(&self) -> f64 {
        self.r_plus - self.r_minus
    }
}

pub fn edges(params: LawParams) -> LawEdges {
    let a = (params.p * (1.0 - params.q)).sqrt();
    let b = (params.q * (1.0 - params.p)).sqrt();
    LawEdges {
        r_minus: (a - b) * (a - b),
        r_plus: ((a + b) * (a + b)).min(1.0),
    }
}

/// Square root with argument in `[0, π)`: the root with nonnegative
/// imaginary part, and the nonnegative one on the real axis.
pub fn upper_sqrt(w: C64) -> C64 {
    let s = w.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
        -s
    } else {
        s
    }
}

fn check_finite(what: &'static str, z: C64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: if z.re.is_finite() { z.im } else { z.re },
            domain: "finite complex numbers",
        })
    }
}

/// The limiting η-transform
/// `(1 + (p+q)z + sqrt(1 + (2(p+q) - 4pq)z + (p-q)²z²)) / (2(1 + z))`.
///
/// On the closed upper half-plane the root is taken with argument in
/// `[0, π)`; below the real axis the value is the mirror image
/// `conj(η(conj z))`, as for any η-transform of a real measure.
pub fn eta(params: LawParams, z: C64) -> Result<C64> {
    check_finite("z", z)?;
    if z.im < 0.0 {
        return eta(params, z.conj()).map(|v| v.conj());
    }
    let one = C64::new(1.0, 0.0);
    let denom = 2.0 * (one + z);
    if denom.norm() <= f64::EPSILON {
        return Err(Error::Pole {
            what: "z",
            re: z.re,
            im: z.im,
        });
    }
    let (p, q) = (params.p, params.q);
    let linear = 2.0 * (p + q) - 4.0 * p * q;
    let quadratic = (p - q) * (p - q);
    let root = upper_sqrt(one + z * linear + z * z * quadratic);
    Ok((one + z * (p + q) + root) / denom)
}

/// η-transform of a projection with erasure probability `q`:
/// `q + (1 - q)/(1 + w) = (1 + qw) / (1 + w)`.
pub fn eta_projection(q: f64, w: C64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    if (one + w).norm() <= f64::EPSILON {
        return Err(Error::Pole {
            what: "w",
            re: w.re,
            im: w.im,
        });
    }
    Ok((one + w * q) / (one + w))
}

/// `|η(z) - η_Q(z - z p / η(z))|`, zero when the closed form solves the
/// fixed-point equation.
pub fn eta_fixed_point_residual(params: LawParams, z: C64) -> Result<f64> {
    let value = eta(params, z)?;
    if value.norm() == 0.0 {
        return Err(Error::Pole {
            what: "p / eta(z)",
            re: z.re,
            im: z.im,
        });
    }
    let w = z - z * params.p / value;
    let image = eta_projection(params.q, w)?;
    Ok((value - image).norm())
}

/// Stieltjes transform `m(z) = -(1/z) η(-1/z)` for `Im z > 0`.
pub fn stieltjes(params: LawParams, z: C64) -> Result<C64> {
    check_finite("z", z)?;
    if z.im <= 0.0 {
        return Err(Error::Domain {
            what: "Im z",
            value: z.im,
            domain: "Im z > 0",
        });
    }
    let inv = z.inv();
    Ok(-inv * eta(params, -inv)?)
}

/// `(1/π) Im m(x + iω)`, the smoothed density of the full law.
pub fn inverted_density(params: LawParams, x: f64, omega: f64) -> Result<f64> {
    Ok(stieltjes(params, C64::new(x, omega))?.im / PI)
}

/// First moment of the full law, `(1 - p)(1 - q)`.
pub fn mean_eigenvalue_full(params: LawParams) -> f64 {
    (1.0 - params.p) * (1.0 - params.q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// All `n` eigenvalues of `P V Q Vᴴ P`.
    Full,
    /// The `min(|Ω|, |T|)` largest eigenvalues of the restriction.
    #[default]
    Theorem,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Full => "full",
            Normalization::Theorem => "theorem",
        })
    }
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Normalization::Full),
            "theorem" => Ok(Normalization::Theorem),
            other => Err(format!("unknown normalization `{other}` (expected full or theorem)")),
        }
    }
}

/// Continuous density sampled on a grid, plus the atoms.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub atom0: f64,
    pub atom1: f64,
}

/// The limiting law for given `(p, q)` under one normalization.
#[derive(Debug, Clone)]
pub struct SpectralLaw {
    params: LawParams,
    edges: LawEdges,
    normalization: Normalization,
    rule: GaussLegendre,
}

impl SpectralLaw {
    pub fn new(params: LawParams, normalization: Normalization) -> Self {
        Self::with_nodes(params, normalization, DEFAULT_QUADRATURE_NODES)
    }

    pub fn with_nodes(params: LawParams, normalization: Normalization, nodes: usize) -> Self {
        Self {
            params,
            edges: edges(params),
            normalization,
            rule: GaussLegendre::new(nodes.max(1)),
        }
    }

    pub fn params(&self) -> LawParams {
        self.params
    }

    pub fn edges(&self) -> LawEdges {
        self.edges
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Factor applied to the continuous part and the atom at 1.
    pub fn scale(&self) -> f64 {
        match self.normalization {
            Normalization::Full => 1.0,
            Normalization::Theorem => 1.0 / (1.0 - self.params.max()),
        }
    }

    /// `(atom at 0, atom at 1)`.
    pub fn atoms(&self) -> (f64, f64) {
        let one = (1.0 - (self.params.p + self.params.q)).max(0.0);
        match self.normalization {
            Normalization::Full => (self.params.max(), one),
            Normalization::Theorem => (0.0, one / (1.0 - self.params.max())),
        }
    }

    pub fn atom0(&self) -> f64 {
        self.atoms().0
    }

    pub fn atom1(&self) -> f64 {
        self.atoms().1
    }

    /// Continuous density at any real `x`; zero off `(r₋, r₊)`.
    pub fn density_at(&self, x: f64) -> f64 {
        let LawEdges { r_minus, r_plus } = self.edges;
        if !(x > r_minus && x < r_plus && x > 0.0 && x < 1.0) {
            return 0.0;
        }
        let inner = (1.0 - r_minus / x) * (r_plus / x - 1.0);
        self.scale() * inner.max(0.0).sqrt() / (2.0 * PI * (1.0 - x))
    }

    /// Continuous density on `(0, 1)`. The atoms are reported by
    /// [`SpectralLaw::atoms`].
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain {
                what: "x",
                value: x,
                domain: "0 < x < 1",
            });
        }
        Ok(self.density_at(x))
    }

    /// Density of the singular values, `2x f(x²)`, on `(0, 1)`.
    pub fn singular_density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain {
                what: "x",
                value: x,
                domain: "0 < x < 1",
            });
        }
        Ok(2.0 * x * self.density_at(x * x))
    }

    /// Support of the singular-value density, `[sqrt(r₋), sqrt(r₊)]`.
    pub fn singular_edges(&self) -> LawEdges {
        LawEdges {
            r_minus: self.edges.r_minus.sqrt(),
            r_plus: self.edges.r_plus.sqrt(),
        }
    }

    /// Panel breakpoints in θ, where `x = r₋ + (r₊ - r₋) sin²θ`. Extra
    /// breaks are graded geometrically toward an end when `r₋` or `1 - r₊`
    /// is small, where `1/x` or `1/(1 - x)` varies on a short θ scale.
    fn theta_breaks(&self, end: f64) -> Vec<f64> {
        let width = self.edges.width();
        let mut breaks = vec![0.0];
        let mut graded = |scale: f64, mirror: bool| {
            if scale <= 0.0 || scale >= 0.25 {
                return;
            }
            let mut t = scale / 64.0;
            while t < FRAC_PI_4 {
                breaks.push(if mirror { FRAC_PI_2 - t } else { t });
                t *= 4.0;
            }
        };
        graded((self.edges.r_minus / width).sqrt(), false);
        graded(((1.0 - self.edges.r_plus).max(0.0) / width).sqrt(), true);
        breaks.push(FRAC_PI_4);
        breaks.push(FRAC_PI_2);
        breaks.retain(|&t| t < end);
        breaks.push(end);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        breaks
    }

    /// `∫_{r₋}^{min(upto, r₊)} g(x) f_full(x) dx` under the sin² substitution.
    fn continuous_integral<G: Fn(f64) -> f64>(&self, upto: f64, g: G) -> f64 {
        let LawEdges { r_minus, r_plus } = self.edges;
        if upto <= r_minus {
            return 0.0;
        }
        let width = r_plus - r_minus;
        let end = if upto >= r_plus {
            FRAC_PI_2
        } else {
            ((upto - r_minus) / width).sqrt().min(1.0).asin()
        };
        let gap = (1.0 - r_plus).max(0.0);
        let integrand = |theta: f64| {
            let (s, c) = theta.sin_cos();
            let (s2, c2) = (s * s, c * c);
            let x = r_minus + width * s2;
            let one_minus_x = gap + width * c2;
            width * width * s2 * c2 / (PI * x * one_minus_x) * g(x)
        };
        self.rule.integrate_panels(integrand, &self.theta_breaks(end))
    }

    /// Mass of the continuous part, by quadrature.
    pub fn continuous_mass(&self) -> f64 {
        self.scale() * self.continuous_integral(1.0, |_| 1.0)
    }

    /// Right-continuous distribution function on `[0, 1]`; includes the atom
    /// at 0 from `x = 0` and the atom at 1 at `x = 1`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain {
                what: "x",
                value: x,
                domain: "0 <= x <= 1",
            });
        }
        let (atom0, atom1) = self.atoms();
        let continuous = self.scale() * self.continuous_integral(x, |_| 1.0);
        let top = if x >= 1.0 { atom1 } else { 0.0 };
        Ok(atom0 + continuous + top)
    }

    /// Mean by quadrature: `atom1 + ∫ x f(x) dx`.
    pub fn mean(&self) -> f64 {
        self.atom1() + self.scale() * self.continuous_integral(1.0, |x| x)
    }

    /// Density on `grid_size` Chebyshev-spaced points spanning the support.
    pub fn sample_curve(&self, grid_size: usize) -> Result<DensityCurve> {
        if grid_size < 2 {
            return Err(Error::InvalidDimension("grid_size must be >= 2".into()));
        }
        let lo = self.edges.r_minus.max(1e-9);
        let hi = self.edges.r_plus.min(1.0 - 1e-9);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let last = (grid_size - 1) as f64;
        let mut grid: Vec<f64> = (0..grid_size)
            .map(|k| mid - half * (PI * k as f64 / last).cos())
            .collect();
        grid[0] = lo;
        grid[grid_size - 1] = hi;
        let values = grid.iter().map(|&x| self.density_at(x)).collect();
        let (atom0, atom1) = self.atoms();
        Ok(DensityCurve {
            grid,
            values,
            atom0,
            atom1,
        })
    }
}
