//! Epsilon-net experiments: moderateness fitting, kernel comparison
//! (negligibility), and consistency against un-regularized references.
//!
//! All epsilons of a sweep share one grid fine enough for the smallest
//! epsilon, so the norm tables are comparable across the ladder. Per-epsilon
//! solves run on a worker pool capped by the VW_THREADS variable.

use crate::dist::{linf_norm, mollify, DistExpr, MollifierNet};
use crate::fdsolver::{solve, SchemeConfig, SolutionTrajectory};
use crate::grid::{l2, linspace, Grid2};
use crate::norms::{centered_dx, energy_norms, second_dx, sq_sum, EnergyReport};
use crate::problem::{
    build_instance_with, MollifyPolicy, ProblemError, ProblemSpec,
};
use crate::scalar::Real;
use crate::svg;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] crate::fdsolver::SolverError),
    #[error("empty epsilon ladder")]
    EmptyLadder,
}

/// Grid selection for a sweep.
#[derive(Clone, Copy, Debug)]
pub enum GridPolicy {
    /// One grid resolving the smallest epsilon on the ladder.
    CommonAuto { nx_min: usize },
    /// Explicit shared grid.
    Fixed { nx: usize, nt: usize },
}

impl GridPolicy {
    pub fn resolve<T: Real>(&self, eps_min: T, t_horizon: T) -> (usize, usize) {
        match *self {
            GridPolicy::Fixed { nx, nt } => (nx, nt),
            GridPolicy::CommonAuto { nx_min } => {
                let nx = nx_min.max((4.0 / eps_min.to_f64_c()).ceil() as usize);
                let nt = nx_min
                    .max((4.0 * t_horizon.to_f64_c() / eps_min.to_f64_c()).ceil() as usize);
                (nx, nt)
            }
        }
    }
}

/// Least-squares power-law fit on (log eps, log value).
#[derive(Clone, Copy, Debug)]
pub struct FitResult<T> {
    /// slope of log value against log eps
    pub slope: T,
    pub amplitude: T,
    pub r2: T,
    /// true when the values were constant within 2% and the fit degenerates
    pub constant: bool,
}

impl<T: Real> FitResult<T> {
    /// Moderateness exponent: value ~ C eps^{-N}.
    pub fn n_hat(&self) -> T {
        -self.slope
    }

    /// Decay order for vanishing quantities: value ~ C eps^{K}.
    pub fn k_hat(&self) -> T {
        self.slope
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Classification<T> {
    Moderate { n_hat: T },
    Negligible { k_hat: T },
    Converging { rate: T },
    /// R^2 below 0.98: raw table stands, no classification asserted.
    Unreliable,
}

const FIT_FLOOR: f64 = 1e-12;
const CONSTANT_SPREAD: f64 = 0.02;
pub const R2_THRESHOLD: f64 = 0.98;

/// OLS on logs, excluding values below 1e-12. Constant tables (relative
/// spread under 2%) short-circuit to a zero exponent with R^2 = 1.
pub fn fit_loglog<T: Real>(eps: &[T], vals: &[T]) -> Option<FitResult<T>> {
    let floor = T::from_f64_c(FIT_FLOOR);
    let pts: Vec<(T, T)> = eps
        .iter()
        .zip(vals)
        .filter(|(_, &v)| v >= floor)
        .map(|(&e, &v)| (e.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let vmax = vals.iter().fold(T::zero(), |m, &v| m.max(v));
    let vmin = vals
        .iter()
        .filter(|&&v| v >= floor)
        .fold(T::infinity(), |m, &v| m.min(v));
    if vmax > T::zero() && (vmax - vmin) / vmax < T::from_f64_c(CONSTANT_SPREAD) {
        let n = T::from_usize_c(vals.len());
        let mean = vals.iter().copied().sum::<T>() / n;
        return Some(FitResult {
            slope: T::zero(),
            amplitude: mean,
            r2: T::one(),
            constant: true,
        });
    }
    let n = T::from_usize_c(pts.len());
    let sx: T = pts.iter().map(|p| p.0).sum();
    let sy: T = pts.iter().map(|p| p.1).sum();
    let mx = sx / n;
    let my = sy / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for &(x, y) in &pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = T::zero();
    let mut ss_tot = T::zero();
    for &(x, y) in &pts {
        let pred = slope * x + intercept;
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - my) * (y - my);
    }
    let r2 = if ss_tot > T::zero() {
        T::one() - ss_res / ss_tot
    } else {
        T::one()
    };
    Some(FitResult {
        slope,
        amplitude: intercept.exp(),
        r2,
        constant: false,
    })
}

/// Classify a moderateness fit: only asserted when R^2 clears 0.98.
pub fn classify_moderate<T: Real>(fit: &FitResult<T>) -> Classification<T> {
    if fit.r2 < T::from_f64_c(R2_THRESHOLD) {
        return Classification::Unreliable;
    }
    if fit.constant {
        return Classification::Negligible { k_hat: T::zero() };
    }
    let half = T::from_f64_c(0.5);
    if fit.slope > half {
        Classification::Converging { rate: fit.k_hat() }
    } else if fit.n_hat() > half {
        Classification::Moderate { n_hat: fit.n_hat() }
    } else {
        Classification::Negligible { k_hat: fit.k_hat() }
    }
}

#[derive(Clone, Debug)]
pub struct NormTrack<T> {
    pub name: &'static str,
    pub values: Vec<T>,
    pub fit: Option<FitResult<T>>,
    pub classification: Classification<T>,
}

#[derive(Clone, Debug)]
pub struct SweepReport<T: Real> {
    pub epsilons: Vec<T>,
    pub nx: usize,
    pub nt: usize,
    pub reports: Vec<EnergyReport<T>>,
    pub tracks: Vec<NormTrack<T>>,
}

impl<T: Real> SweepReport<T> {
    pub fn track(&self, name: &str) -> Option<&NormTrack<T>> {
        self.tracks.iter().find(|t| t.name == name)
    }

    /// CSV rows `epsilon,norm_name,value` followed by a fit summary block.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "epsilon,norm_name,value")?;
        for track in &self.tracks {
            for (&e, &v) in self.epsilons.iter().zip(&track.values) {
                writeln!(out, "{},{},{}", e.to_f64_c(), track.name, v.to_f64_c())?;
            }
        }
        writeln!(out, "# fits")?;
        for track in &self.tracks {
            match &track.fit {
                Some(f) => writeln!(
                    out,
                    "# {}: N_hat={} C_hat={} r2={}{}",
                    track.name,
                    f.n_hat().to_f64_c(),
                    f.amplitude.to_f64_c(),
                    f.r2.to_f64_c(),
                    if f.constant { " (constant)" } else { "" },
                )?,
                None => writeln!(out, "# {}: no fit", track.name)?,
            }
        }
        Ok(())
    }

    /// Log-log SVG chart of every tracked norm against epsilon.
    pub fn render_svg(&self) -> String {
        let series: Vec<svg::Series> = self
            .tracks
            .iter()
            .map(|t| svg::Series {
                label: t.name.to_string(),
                xs: self.epsilons.iter().map(|e| e.to_f64_c()).collect(),
                ys: t.values.iter().map(|v| v.to_f64_c()).collect(),
            })
            .collect();
        svg::render_chart(&series, "norms vs epsilon", "epsilon", "norm", true)
    }
}

/// Worker pool sized by VW_THREADS (or available parallelism).
pub fn worker_count(jobs: usize) -> usize {
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = std::env::var("VW_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(hw);
    cap.min(jobs).max(1)
}

/// Run `job` for every index 0..n on the pool, preserving order.
pub fn run_parallel<R, F>(n: usize, job: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let workers = worker_count(n);
    if workers <= 1 {
        return (0..n).map(job).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let (tx, rx) = std::sync::mpsc::channel::<(usize, R)>();
    let next_ref = &next;
    let job_ref = &job;
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            scope.spawn(move || loop {
                let i = next_ref.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let r = job_ref(i);
                if tx.send((i, r)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
    });
    let mut slots: Vec<Option<R>> = (0..n).map(|_| None).collect();
    for (i, r) in rx {
        slots[i] = Some(r);
    }
    slots.into_iter().map(|s| s.unwrap()).collect()
}

fn solve_at_eps<T: Real>(
    spec: &ProblemSpec<T>,
    net: &MollifierNet<T>,
    eps: T,
    nx: usize,
    nt: usize,
    policy: MollifyPolicy,
) -> Result<(SolutionTrajectory<T>, EnergyReport<T>), SweepError> {
    let inst = build_instance_with(spec, net, eps, nx, nt, policy)?;
    let traj = solve(&inst, &SchemeConfig::implicit_euler())?;
    let report = energy_norms(&traj, &inst);
    Ok((traj, report))
}

/// Solve the regularized problem at every epsilon and fit the tracked norms.
pub fn run_sweep<T: Real>(
    spec: &ProblemSpec<T>,
    net: &MollifierNet<T>,
    grid: GridPolicy,
) -> Result<SweepReport<T>, SweepError> {
    if net.epsilons.is_empty() {
        return Err(SweepError::EmptyLadder);
    }
    let (nx, nt) = grid.resolve(net.eps_min(), spec.t_horizon);
    let results = run_parallel(net.epsilons.len(), |i| {
        solve_at_eps(spec, net, net.epsilons[i], nx, nt, MollifyPolicy::SingularOnly)
    });
    let mut reports = Vec::with_capacity(results.len());
    for r in results {
        reports.push(r?.1);
    }
    let tracks = build_tracks(&net.epsilons, &reports);
    Ok(SweepReport {
        epsilons: net.epsilons.clone(),
        nx,
        nt,
        reports,
        tracks,
    })
}

fn build_tracks<T: Real>(eps: &[T], reports: &[EnergyReport<T>]) -> Vec<NormTrack<T>> {
    let pick: [(&'static str, fn(&EnergyReport<T>) -> T); 5] = [
        ("very_weak", |r| r.very_weak_quantity()),
        ("linf_l2", |r| r.linf_l2),
        ("l2_h1", |r| r.l2_h1),
        ("dtu_l2", |r| r.dtu_l2),
        ("dxx_l2", |r| r.dxx),
    ];
    pick.iter()
        .map(|(name, get)| {
            let values: Vec<T> = reports.iter().map(get).collect();
            let fit = fit_loglog(eps, &values);
            let classification = match &fit {
                Some(f) => classify_moderate(f),
                None => Classification::Unreliable,
            };
            NormTrack {
                name,
                values,
                fit,
                classification,
            }
        })
        .collect()
}

/// L-infinity moderateness of a mollified expression across the ladder.
/// Returns the per-epsilon sup norms and the power-law fit.
pub fn expr_linf_sweep<T: Real>(
    expr: &DistExpr<T>,
    net: &MollifierNet<T>,
) -> (Vec<T>, Option<FitResult<T>>) {
    let vals: Vec<T> = net
        .epsilons
        .iter()
        .map(|&eps| {
            let nx = 256usize.max((8.0 / eps.to_f64_c()).ceil() as usize);
            let xs = linspace(T::zero(), T::one(), nx);
            let field = mollify(expr, net, eps, &xs, (T::zero(), T::one()));
            linf_norm(&field)
        })
        .collect();
    let fit = fit_loglog(&net.epsilons, &vals);
    (vals, fit)
}

/// Difference norms between two trajectories on the same grid.
#[derive(Clone, Copy, Debug)]
pub struct DiffNorms<T> {
    pub linf_l2: T,
    pub l2_l2: T,
    pub dtu_l2: T,
    pub l2_h1: T,
    pub dxx_l2: T,
}

impl<T: Real> DiffNorms<T> {
    /// H1(L2) + L2(H2) style composite.
    pub fn composite(&self) -> T {
        self.l2_l2 + self.dtu_l2 + self.l2_h1 + self.dxx_l2
    }
}

pub fn diff_norms<T: Real>(a: &Grid2<T>, b: &Grid2<T>, h: T, tau: T) -> DiffNorms<T> {
    assert_eq!(a.nt, b.nt);
    assert_eq!(a.nx, b.nx);
    let nt = a.nt;
    let mut linf_l2 = T::zero();
    let mut l2_l2_sq = T::zero();
    let mut l2_h1_sq = T::zero();
    let mut dxx_sq = T::zero();
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(nt + 1);
    for n in 0..=nt {
        let d: Vec<T> = a
            .row(n)
            .iter()
            .zip(b.row(n))
            .map(|(&x, &y)| x - y)
            .collect();
        let r = l2(&d, h);
        linf_l2 = linf_l2.max(r);
        l2_l2_sq += r * r;
        l2_h1_sq += sq_sum(&centered_dx(&d, h)) * h;
        dxx_sq += sq_sum(&second_dx(&d, h)) * h;
        rows.push(d);
    }
    let mut dtu_sq = T::zero();
    for n in 0..nt {
        let dt: Vec<T> = rows[n]
            .iter()
            .zip(&rows[n + 1])
            .map(|(&x, &y)| (y - x) / tau)
            .collect();
        let r = l2(&dt, h);
        dtu_sq += r * r;
    }
    DiffNorms {
        linf_l2,
        l2_l2: (l2_l2_sq * tau).sqrt(),
        dtu_l2: (dtu_sq * tau).sqrt(),
        l2_h1: (l2_h1_sq * tau).sqrt(),
        dxx_l2: (dxx_sq * tau).sqrt(),
    }
}

#[derive(Clone, Debug)]
pub struct NetComparison<T: Real> {
    pub epsilons: Vec<T>,
    pub linf_l2: Vec<T>,
    pub composite: Vec<T>,
    pub linf_fit: Option<FitResult<T>>,
    pub composite_fit: Option<FitResult<T>>,
    pub strictly_decreasing: bool,
}

/// Solve the same spec under two mollifier families and compare. A spec
/// with singular data keeps smooth terms sampled directly so the kernels
/// differ exactly where mollification is required; an all-smooth spec is
/// convolved wholesale, since direct sampling would make both runs
/// identical.
pub fn compare_nets<T: Real>(
    spec: &ProblemSpec<T>,
    net_a: &MollifierNet<T>,
    net_b: &MollifierNet<T>,
    grid: GridPolicy,
) -> Result<NetComparison<T>, SweepError> {
    assert_eq!(
        net_a.epsilons.len(),
        net_b.epsilons.len(),
        "nets must share the epsilon ladder"
    );
    if net_a.epsilons.is_empty() {
        return Err(SweepError::EmptyLadder);
    }
    let singular = spec.a.is_singular()
        || spec.b.is_singular()
        || spec.q.is_singular()
        || spec.f.is_singular()
        || spec.u0.is_singular()
        || spec.g0.is_singular()
        || spec.g1.is_singular();
    let policy = if singular {
        MollifyPolicy::SingularOnly
    } else {
        MollifyPolicy::All
    };
    let (nx, nt) = grid.resolve(net_a.eps_min(), spec.t_horizon);
    let results = run_parallel(net_a.epsilons.len(), |i| -> Result<DiffNorms<T>, SweepError> {
        let eps = net_a.epsilons[i];
        let (ta, _) = solve_at_eps(spec, net_a, eps, nx, nt, policy)?;
        let (tb, _) = solve_at_eps(spec, net_b, eps, nx, nt, policy)?;
        Ok(diff_norms(&ta.values, &tb.values, ta.h, ta.tau))
    });
    let mut linf = Vec::new();
    let mut comp = Vec::new();
    for r in results {
        let d = r?;
        linf.push(d.linf_l2);
        comp.push(d.dtu_l2 + d.l2_l2 + d.dxx_l2);
    }
    let strictly_decreasing = linf.windows(2).all(|w| w[1] < w[0]);
    Ok(NetComparison {
        epsilons: net_a.epsilons.clone(),
        linf_fit: fit_loglog(&net_a.epsilons, &linf),
        composite_fit: fit_loglog(&net_a.epsilons, &comp),
        linf_l2: linf,
        composite: comp,
        strictly_decreasing,
    })
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport<T: Real> {
    pub epsilons: Vec<T>,
    /// H1(L2)+L2(H2) style error against the un-mollified reference
    pub errors: Vec<T>,
    /// discretization floor from grid halving of the reference
    pub floor: T,
    pub monotone: bool,
    pub reached_floor: bool,
}

/// Consistency for all-smooth data: the mollified solutions must converge
/// to the solution with un-regularized coefficients as epsilon shrinks.
pub fn consistency_test<T: Real>(
    spec: &ProblemSpec<T>,
    net: &MollifierNet<T>,
    grid: GridPolicy,
) -> Result<ConsistencyReport<T>, SweepError> {
    if net.epsilons.is_empty() {
        return Err(SweepError::EmptyLadder);
    }
    let (nx, nt) = grid.resolve(net.eps_min(), spec.t_horizon);
    // un-mollified reference: direct sampling of the smooth data
    let ref_inst = build_instance_with(
        spec,
        net,
        net.eps_max(),
        nx,
        nt,
        MollifyPolicy::SingularOnly,
    )?;
    let cfg = SchemeConfig::implicit_euler();
    let ref_traj = solve(&ref_inst, &cfg)?;
    let results = run_parallel(net.epsilons.len(), |i| -> Result<T, SweepError> {
        let eps = net.epsilons[i];
        let (t_eps, _) = solve_at_eps(spec, net, eps, nx, nt, MollifyPolicy::All)?;
        let d = diff_norms(&ref_traj.values, &t_eps.values, t_eps.h, t_eps.tau);
        Ok(d.dtu_l2 + d.l2_l2 + d.dxx_l2)
    });
    let mut errors = Vec::new();
    for r in results {
        errors.push(r?);
    }
    // floor: compare the reference against itself on a twice-coarser grid
    let coarse_inst = build_instance_with(
        spec,
        net,
        net.eps_max(),
        nx / 2,
        nt / 2,
        MollifyPolicy::SingularOnly,
    )?;
    let coarse = solve(&coarse_inst, &cfg)?;
    let restricted = restrict(&ref_traj.values, 2);
    let fd = diff_norms(&restricted, &coarse.values, coarse.h, coarse.tau);
    let floor = fd.dtu_l2 + fd.l2_l2 + fd.dxx_l2;
    let monotone = errors.windows(2).all(|w| w[1] <= w[0]);
    let reached_floor = *errors.last().unwrap() <= T::from_f64_c(10.0) * floor;
    Ok(ConsistencyReport {
        epsilons: net.epsilons.clone(),
        errors,
        floor,
        monotone,
        reached_floor,
    })
}

/// Keep every `stride`-th node in both directions.
fn restrict<T: Real>(u: &Grid2<T>, stride: usize) -> Grid2<T> {
    let nt = u.nt / stride;
    let nx = u.nx / stride;
    let mut out = Grid2::zeros(nt, nx);
    for n in 0..=nt {
        let src = u.row(n * stride);
        let dst = out.row_mut(n);
        for i in 0..=nx {
            dst[i] = src[i * stride];
        }
    }
    out
}
