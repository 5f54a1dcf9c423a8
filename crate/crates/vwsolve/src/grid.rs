//! Dense space–time storage and trapezoid quadrature helpers.

use crate::scalar::Real;

/// Row-major (nt+1) x (nx+1) array of samples; row `n` is the spatial
/// profile at time node `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2<T> {
    pub nt: usize,
    pub nx: usize,
    data: Vec<T>,
}

impl<T: Real> Grid2<T> {
    pub fn zeros(nt: usize, nx: usize) -> Self {
        Grid2 {
            nt,
            nx,
            data: vec![T::zero(); (nt + 1) * (nx + 1)],
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let nt = rows.len() - 1;
        let nx = rows[0].len() - 1;
        let mut data = Vec::with_capacity((nt + 1) * (nx + 1));
        for r in &rows {
            assert_eq!(r.len(), nx + 1, "ragged rows");
            data.extend_from_slice(r);
        }
        Grid2 { nt, nx, data }
    }

    /// Broadcast a spatial profile to every time node.
    pub fn from_profile(nt: usize, profile: &[T]) -> Self {
        let nx = profile.len() - 1;
        let mut data = Vec::with_capacity((nt + 1) * (nx + 1));
        for _ in 0..=nt {
            data.extend_from_slice(profile);
        }
        Grid2 { nt, nx, data }
    }

    #[inline]
    pub fn row(&self, n: usize) -> &[T] {
        let w = self.nx + 1;
        &self.data[n * w..(n + 1) * w]
    }

    #[inline]
    pub fn row_mut(&mut self, n: usize) -> &mut [T] {
        let w = self.nx + 1;
        &mut self.data[n * w..(n + 1) * w]
    }

    #[inline]
    pub fn at(&self, n: usize, i: usize) -> T {
        self.data[n * (self.nx + 1) + i]
    }

    #[inline]
    pub fn set(&mut self, n: usize, i: usize, v: T) {
        self.data[n * (self.nx + 1) + i] = v;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.nx + 1)
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.data
            .iter()
            .fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// True when every row equals row 0, i.e. the field is time-independent.
    pub fn is_time_constant(&self) -> bool {
        let first = self.row(0);
        (1..=self.nt).all(|n| self.row(n) == first)
    }
}

/// Uniform nodes `start + i*step`, inclusive of both ends.
pub fn linspace<T: Real>(start: T, end: T, n_intervals: usize) -> Vec<T> {
    let step = (end - start) / T::from_usize_c(n_intervals);
    (0..=n_intervals)
        .map(|i| start + step * T::from_usize_c(i))
        .collect()
}

/// Composite trapezoid L2 norm of nodal values with spacing `h`.
pub fn l2<T: Real>(v: &[T], h: T) -> T {
    trapezoid_sq(v, h).sqrt()
}

/// Trapezoid integral of v^2.
pub fn trapezoid_sq<T: Real>(v: &[T], h: T) -> T {
    let n = v.len();
    if n < 2 {
        return T::zero();
    }
    let half = T::from_f64_c(0.5);
    let mut s = half * (v[0] * v[0] + v[n - 1] * v[n - 1]);
    for &x in &v[1..n - 1] {
        s += x * x;
    }
    s * h
}

/// Trapezoid integral of v.
pub fn trapezoid<T: Real>(v: &[T], h: T) -> T {
    let n = v.len();
    if n < 2 {
        return T::zero();
    }
    let half = T::from_f64_c(0.5);
    let mut s = half * (v[0] + v[n - 1]);
    for &x in &v[1..n - 1] {
        s += x;
    }
    s * h
}

/// Trapezoid quadrature weights for `n+1` nodes with spacing `h`.
pub fn trapezoid_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let half = T::from_f64_c(0.5);
    let mut w = vec![h; n + 1];
    w[0] = h * half;
    w[n] = h * half;
    w
}
