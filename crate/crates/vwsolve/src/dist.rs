//! Distributional data and mollification.
//!
//! A [`DistExpr`] is a symbolic distribution on an interval (constants,
//! smooth closures, Dirac deltas, Heaviside steps, finite sums). A
//! [`MollifierNet`] carries the bump kernel, its normalization constant and a
//! descending ladder of regularization widths. [`mollify`] turns the pair
//! into a smooth grid-sampled field for one epsilon.
//!
//! Extension conventions: constants and smooth closures are continued across
//! the domain ends (coefficient floors survive near the boundary), deltas use
//! the sifting identity exactly, Heaviside steps are extended by zero outside
//! the domain.

use crate::grid::trapezoid_sq;
use crate::scalar::Real;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("bump has (numerically) zero mass")]
    ZeroMass,
    #[error("unsupported distribution variant: {0}")]
    UnsupportedVariant(String),
}

/// Shared smooth closure.
pub type SmoothFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Symbolic distribution on an interval.
#[derive(Clone)]
pub enum DistExpr<T: Real> {
    Constant(T),
    Smooth {
        f: SmoothFn<T>,
        support: (T, T),
    },
    Delta {
        location: T,
        weight: T,
    },
    Heaviside {
        location: T,
        low: T,
        high: T,
    },
    Sum(Vec<DistExpr<T>>),
}

impl<T: Real> fmt::Debug for DistExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistExpr::Constant(k) => write!(f, "Constant({k})"),
            DistExpr::Smooth { support, .. } => {
                write!(f, "Smooth(support=[{}, {}])", support.0, support.1)
            }
            DistExpr::Delta { location, weight } => {
                write!(f, "Delta(x0={location}, w={weight})")
            }
            DistExpr::Heaviside {
                location,
                low,
                high,
            } => write!(f, "Heaviside(x0={location}, {low}->{high})"),
            DistExpr::Sum(terms) => f.debug_list().entries(terms.iter()).finish(),
        }
    }
}

impl<T: Real> DistExpr<T> {
    pub fn smooth<F: Fn(T) -> T + Send + Sync + 'static>(f: F, support: (T, T)) -> Self {
        DistExpr::Smooth {
            f: Arc::new(f),
            support,
        }
    }

    pub fn delta(location: T, weight: T) -> Self {
        DistExpr::Delta { location, weight }
    }

    pub fn zero() -> Self {
        DistExpr::Constant(T::zero())
    }

    /// Flattened sum; nested sums are spliced in.
    pub fn sum(terms: Vec<DistExpr<T>>) -> Self {
        let mut flat = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                DistExpr::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            DistExpr::Sum(flat)
        }
    }

    /// True when the expression contains a Delta or Heaviside term.
    pub fn is_singular(&self) -> bool {
        match self {
            DistExpr::Constant(_) | DistExpr::Smooth { .. } => false,
            DistExpr::Delta { .. } | DistExpr::Heaviside { .. } => true,
            DistExpr::Sum(terms) => terms.iter().any(|t| t.is_singular()),
        }
    }

    /// Pointwise evaluation of the regular (non-delta) part. Delta terms
    /// contribute nothing; Heaviside evaluates as its pointwise values.
    pub fn eval_regular(&self, x: T) -> T {
        match self {
            DistExpr::Constant(k) => *k,
            DistExpr::Smooth { f, support } => f(clamp(x, *support)),
            DistExpr::Delta { .. } => T::zero(),
            DistExpr::Heaviside {
                location,
                low,
                high,
            } => {
                if x < *location {
                    *low
                } else {
                    *high
                }
            }
            DistExpr::Sum(terms) => terms.iter().map(|t| t.eval_regular(x)).sum(),
        }
    }
}

fn clamp<T: Real>(x: T, (lo, hi): (T, T)) -> T {
    x.max(lo).min(hi)
}

/// Mollifier family: kernel, normalization, epsilon ladder.
#[derive(Clone)]
pub struct MollifierNet<T: Real> {
    pub bump: SmoothFn<T>,
    pub c: T,
    pub epsilons: Vec<T>,
}

impl<T: Real> fmt::Debug for MollifierNet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MollifierNet(c={}, epsilons={:?})", self.c, self.epsilons)
    }
}

/// The epsilon ladder used by the built-in experiments.
pub const DEFAULT_EPSILONS: [f64; 5] = [0.3, 0.1, 0.05, 0.031, 0.003];

/// The classical bump exp(1/(x^2-1)) on |x|<1, zero elsewhere.
pub fn default_bump<T: Real>() -> SmoothFn<T> {
    Arc::new(|s: T| {
        let one = T::one();
        if s.abs() < one {
            (one / (s * s - one)).exp()
        } else {
            T::zero()
        }
    })
}

/// Raised-cosine bump (1 + cos(pi s))/2 on |s|<1; unit mass already.
pub fn cosine_bump<T: Real>() -> SmoothFn<T> {
    Arc::new(|s: T| {
        let one = T::one();
        if s.abs() < one {
            let pi = T::from_f64_c(std::f64::consts::PI);
            T::from_f64_c(0.5) * (one + (pi * s).cos())
        } else {
            T::zero()
        }
    })
}

impl<T: Real> MollifierNet<T> {
    /// Build a net from a bump, computing the normalization by quadrature.
    pub fn new(bump: SmoothFn<T>, epsilons: Vec<T>) -> Result<Self, DistError> {
        assert!(
            epsilons.windows(2).all(|w| w[0] > w[1]),
            "epsilons must be strictly decreasing"
        );
        assert!(
            epsilons.iter().all(|&e| e > T::zero() && e <= T::one()),
            "epsilons must lie in (0,1]"
        );
        let c = normalize_bump(&*bump)?;
        Ok(MollifierNet { bump, c, epsilons })
    }

    /// The exponential bump with the built-in ladder.
    pub fn standard() -> Self {
        Self::with_epsilons(DEFAULT_EPSILONS.iter().map(|&e| T::from_f64_c(e)).collect())
    }

    pub fn with_epsilons(epsilons: Vec<T>) -> Self {
        Self::new(default_bump(), epsilons).expect("default bump has positive mass")
    }

    /// Cosine-kernel alternative over the same ladder.
    pub fn cosine(epsilons: Vec<T>) -> Self {
        Self::new(cosine_bump(), epsilons).expect("cosine bump has positive mass")
    }

    /// phi_eps(x) = c/eps * bump(x/eps).
    pub fn phi_eps(&self, x: T, eps: T) -> T {
        self.c / eps * (self.bump)(x / eps)
    }

    /// Smallest epsilon on the ladder.
    pub fn eps_min(&self) -> T {
        *self.epsilons.last().expect("empty epsilon ladder")
    }

    pub fn eps_max(&self) -> T {
        self.epsilons[0]
    }
}

/// Composite Simpson with `n` subintervals (n forced even).
pub fn simpson<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, mut n: usize) -> T {
    if n % 2 == 1 {
        n += 1;
    }
    let h = (b - a) / T::from_usize_c(n);
    let mut s = f(a) + f(b);
    let four = T::from_f64_c(4.0);
    let two = T::from_f64_c(2.0);
    for i in 1..n {
        let w = if i % 2 == 1 { four } else { two };
        s += w * f(a + h * T::from_usize_c(i));
    }
    s * h / T::from_f64_c(3.0)
}

/// Normalization constant c with integral of c*bump equal to 1.
/// Simpson with interval doubling until the estimate settles below 1e-12.
pub fn normalize_bump<T: Real>(bump: &(dyn Fn(T) -> T + Send + Sync)) -> Result<T, DistError> {
    let one = T::one();
    let mut n = 64usize;
    let mut prev = simpson(|s| bump(s), -one, one, n);
    loop {
        n *= 2;
        let cur = simpson(|s| bump(s), -one, one, n);
        if (cur - prev).abs() <= T::from_f64_c(1e-13) || n >= 1 << 22 {
            if cur.abs() <= T::from_f64_c(1e-300) {
                return Err(DistError::ZeroMass);
            }
            return Ok(one / cur);
        }
        prev = cur;
    }
}

/// Grid samples of a mollified (or directly sampled) field.
#[derive(Clone, Debug)]
pub struct SampledField1D<T: Real> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    pub epsilon: T,
    pub source_expr: Option<DistExpr<T>>,
}

impl<T: Real> SampledField1D<T> {
    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Subintervals for the Simpson convolution rule in the scaled variable.
const CONV_PANELS: usize = 128;

/// Convolve `expr` with the epsilon-scaled kernel of `net`, sampled on
/// `grid`. `domain` is the interval the expression lives on; it controls the
/// extension convention for Heaviside data.
pub fn mollify<T: Real>(
    expr: &DistExpr<T>,
    net: &MollifierNet<T>,
    epsilon: T,
    grid: &[T],
    domain: (T, T),
) -> SampledField1D<T> {
    let values = mollify_values(expr, net, epsilon, grid, domain);
    SampledField1D {
        grid: grid.to_vec(),
        values,
        epsilon,
        source_expr: Some(expr.clone()),
    }
}

fn mollify_values<T: Real>(
    expr: &DistExpr<T>,
    net: &MollifierNet<T>,
    eps: T,
    grid: &[T],
    domain: (T, T),
) -> Vec<T> {
    match expr {
        // whole-line continuation: convolution of a constant is the constant
        DistExpr::Constant(k) => vec![*k; grid.len()],
        DistExpr::Smooth { f, support } => {
            convolve(grid, net, eps, |y| f(clamp(y, *support)))
        }
        DistExpr::Delta { location, weight } => grid
            .iter()
            .map(|&x| *weight * net.phi_eps(x - *location, eps))
            .collect(),
        DistExpr::Heaviside {
            location,
            low,
            high,
        } => convolve(grid, net, eps, |y| {
            if y < domain.0 || y > domain.1 {
                T::zero()
            } else if y < *location {
                *low
            } else {
                *high
            }
        }),
        DistExpr::Sum(terms) => {
            let mut acc = vec![T::zero(); grid.len()];
            for t in terms {
                let part = mollify_values(t, net, eps, grid, domain);
                for (a, p) in acc.iter_mut().zip(part) {
                    *a += p;
                }
            }
            acc
        }
    }
}

/// (g * phi_eps)(x) = int_{-1}^{1} g(x - eps s) c bump(s) ds by Simpson.
fn convolve<T: Real, F: Fn(T) -> T>(grid: &[T], net: &MollifierNet<T>, eps: T, g: F) -> Vec<T> {
    let n = CONV_PANELS;
    let h = T::from_f64_c(2.0 / n as f64);
    let one = T::one();
    let four = T::from_f64_c(4.0);
    let two = T::from_f64_c(2.0);
    let scale = h / T::from_f64_c(3.0);
    // kernel weights at the Simpson nodes
    let mut kw = Vec::with_capacity(n + 1);
    let mut nodes = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let s = -one + h * T::from_usize_c(j);
        let w = if j == 0 || j == n {
            one
        } else if j % 2 == 1 {
            four
        } else {
            two
        };
        nodes.push(s);
        kw.push(scale * w * net.c * (net.bump)(s));
    }
    grid.iter()
        .map(|&x| {
            let mut acc = T::zero();
            for (s, w) in nodes.iter().zip(&kw) {
                if *w != T::zero() {
                    acc += *w * g(x - eps * *s);
                }
            }
            acc
        })
        .collect()
}

/// Max of |values|.
pub fn linf_norm<T: Real>(field: &SampledField1D<T>) -> T {
    field
        .values
        .iter()
        .fold(T::zero(), |m, &v| m.max(v.abs()))
}

/// Composite trapezoid L2 norm with explicit node weights.
pub fn l2_norm<T: Real>(field: &SampledField1D<T>, weights: &[T]) -> T {
    assert_eq!(field.values.len(), weights.len());
    field
        .values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| w * v * v)
        .sum::<T>()
        .sqrt()
}

/// Trapezoid L2 norm on the field's own uniform grid.
pub fn l2_norm_uniform<T: Real>(field: &SampledField1D<T>) -> T {
    let h = field.grid[1] - field.grid[0];
    trapezoid_sq(&field.values, h).sqrt()
}
