use std::f64::consts::PI;
use vwsolve::dist::{linf_norm, mollify, DistExpr, MollifierNet};
use vwsolve::grid::linspace;
use vwsolve::problem::{ProblemSpec, SpaceTimeExpr};
use vwsolve::sweep::{
    classify_moderate, compare_nets, expr_linf_sweep, fit_loglog, run_parallel, run_sweep,
    Classification, GridPolicy, SweepError,
};

type Expr = DistExpr<f64>;
type St = SpaceTimeExpr<f64>;

#[test]
fn fit_recovers_exact_power_law() {
    let eps = [0.3, 0.1, 0.05, 0.01];
    let vals: Vec<f64> = eps.iter().map(|&e: &f64| 2.0 * e.powf(-1.5)).collect();
    let fit = fit_loglog(&eps, &vals).unwrap();
    assert!((fit.slope + 1.5).abs() < 1e-12);
    assert!((fit.n_hat() - 1.5).abs() < 1e-12);
    assert!((fit.amplitude - 2.0).abs() < 1e-10);
    assert!((fit.r2 - 1.0).abs() < 1e-12);
    assert!(!fit.constant);
}

#[test]
fn fit_flags_constants() {
    let eps = [0.3, 0.1, 0.05];
    let vals = [4.0, 4.0 + 1e-9, 4.0 - 1e-9];
    let fit = fit_loglog(&eps, &vals).unwrap();
    assert!(fit.constant);
    assert_eq!(fit.slope, 0.0);
    assert_eq!(fit.r2, 1.0);
    assert!(matches!(
        classify_moderate(&fit),
        Classification::Negligible { .. }
    ));
}

#[test]
fn fit_skips_tiny_values() {
    let eps = [0.3, 0.1, 0.05];
    let vals = [1e-15, 1e-16, 1e-17];
    assert!(fit_loglog(&eps, &vals).is_none());
}

#[test]
fn single_point_has_no_fit() {
    assert!(fit_loglog(&[0.1], &[3.0]).is_none());
}

#[test]
fn classification_thresholds() {
    let moderate = fit_loglog(
        &[0.3, 0.1, 0.05],
        &[0.3f64.powf(-1.0), 0.1f64.powf(-1.0), 0.05f64.powf(-1.0)],
    )
    .unwrap();
    assert!(matches!(
        classify_moderate(&moderate),
        Classification::Moderate { .. }
    ));
    let converging = fit_loglog(&[0.3, 0.1, 0.05], &[0.3, 0.1, 0.05]).unwrap();
    assert!(matches!(
        classify_moderate(&converging),
        Classification::Converging { .. }
    ));
    // noisy data: r2 below the gate
    let noisy = fit_loglog(&[0.3, 0.1, 0.05, 0.01], &[1.0, 5.0, 0.7, 4.0]).unwrap();
    assert!(noisy.r2 < 0.98);
    assert!(matches!(
        classify_moderate(&noisy),
        Classification::Unreliable
    ));
}

#[test]
fn delta_sup_norm_exponent_is_one() {
    // ||delta_eps||_inf = c e^{-1} / eps exactly, so the fit slope is -1
    let net = MollifierNet::standard();
    let (_, fit) = expr_linf_sweep(&Expr::delta(0.5, 1.0), &net);
    let fit = fit.unwrap();
    assert!((fit.n_hat() - 1.0).abs() < 2e-2, "n_hat = {}", fit.n_hat());
    assert!(fit.r2 > 0.999);
}

#[test]
fn smooth_data_sweeps_flat() {
    // mollifying an entire smooth function changes nothing measurable
    let net = MollifierNet::with_epsilons(vec![0.3, 0.1, 0.05]);
    let (_, fit) = expr_linf_sweep(&Expr::smooth(|x: f64| 1.0 + (PI * x).sin(), (-2.0, 3.0)), &net);
    match &fit {
        Some(fit) => assert!(fit.constant || fit.n_hat().abs() < 0.05),
        None => panic!("expected a fit"),
    }
}

#[test]
fn run_parallel_preserves_order() {
    let out = run_parallel(17, |i| i * i);
    assert_eq!(out, (0..17).map(|i| i * i).collect::<Vec<_>>());
}

#[test]
fn empty_ladder_is_an_error() {
    let spec = ProblemSpec::unit(Expr::Constant(1.0));
    let net = MollifierNet {
        bump: vwsolve::dist::default_bump(),
        c: 1.0,
        epsilons: vec![],
    };
    assert!(matches!(
        run_sweep(&spec, &net, GridPolicy::Fixed { nx: 64, nt: 64 }),
        Err(SweepError::EmptyLadder)
    ));
}

#[test]
fn sweep_on_smooth_problem_is_epsilon_independent() {
    let mut spec = ProblemSpec::unit(Expr::smooth(|x: f64| (PI * x).sin(), (-1.0, 2.0)));
    spec.b = St::zero();
    let net = MollifierNet::with_epsilons(vec![0.3, 0.1, 0.05]);
    let report = run_sweep(&spec, &net, GridPolicy::Fixed { nx: 128, nt: 128 }).unwrap();
    assert_eq!(report.epsilons, vec![0.3, 0.1, 0.05]);
    let track = report.track("very_weak").unwrap();
    // smooth data is sampled directly, so every epsilon gives the same run
    let fit = track.fit.as_ref().unwrap();
    assert!(fit.constant, "values = {:?}", track.values);
    assert!(matches!(
        track.classification,
        Classification::Negligible { .. }
    ));
}

#[test]
fn grid_policy_resolution() {
    let (nx, nt) = GridPolicy::CommonAuto { nx_min: 64 }.resolve(0.1, 1.0);
    assert_eq!(nx, 64);
    assert_eq!(nt, 64);
    let (nx, nt) = GridPolicy::CommonAuto { nx_min: 64 }.resolve(0.003, 1.0);
    assert_eq!(nx, 1334);
    assert_eq!(nt, 1334);
    let (nx, nt) = GridPolicy::Fixed { nx: 10, nt: 20 }.resolve(0.003, 1.0);
    assert_eq!((nx, nt), (10, 20));
}

#[test]
fn identical_nets_compare_to_zero() {
    let mut spec = ProblemSpec::unit(initial_peak());
    spec.b = St::zero();
    let net = MollifierNet::with_epsilons(vec![0.3, 0.1]);
    let cmp = compare_nets(&spec, &net, &net, GridPolicy::Fixed { nx: 128, nt: 128 }).unwrap();
    for &v in cmp.linf_l2.iter().chain(&cmp.composite) {
        assert_eq!(v, 0.0);
    }
}

fn initial_peak() -> Expr {
    Expr::smooth(|x: f64| (1.0 / ((x - 0.5).powi(2) + 0.025)).exp(), (-1.0, 2.0))
}

#[test]
fn different_kernels_converge_together() {
    // the weak-norm gap between the two regularizations shrinks with eps,
    // even though the second-derivative gap sharpens like 1/eps
    let mut spec = ProblemSpec::unit(Expr::smooth(|x: f64| (PI * x).sin(), (-1.0, 2.0)));
    spec.q = Expr::sum(vec![Expr::Constant(1.0), Expr::delta(0.45, 1.0)]);
    let exp_net = MollifierNet::with_epsilons(vec![0.3, 0.1, 0.05]);
    let cos_net = MollifierNet::cosine(vec![0.3, 0.1, 0.05]);
    let cmp = compare_nets(
        &spec,
        &exp_net,
        &cos_net,
        GridPolicy::Fixed { nx: 256, nt: 256 },
    )
    .unwrap();
    assert!(cmp.strictly_decreasing, "diffs = {:?}", cmp.linf_l2);
    assert!(cmp.linf_l2[2] < 0.2 * cmp.linf_l2[0]);
}

#[test]
fn kernel_peak_heights_differ_but_scale_identically() {
    let exp_net = MollifierNet::<f64>::standard();
    let cos_net = MollifierNet::<f64>::cosine(vec![0.3, 0.1, 0.05]);
    let grid = linspace(0.0, 1.0, 8192);
    let d = Expr::delta(0.5, 1.0);
    let pe = linf_norm(&mollify(&d, &exp_net, 0.1, &grid, (0.0, 1.0)));
    let pc = linf_norm(&mollify(&d, &cos_net, 0.1, &grid, (0.0, 1.0)));
    assert!((pe - 8.28568839869105).abs() < 1e-6);
    assert!((pc - 10.0).abs() < 1e-6); // (1 + cos 0)/2 / eps
    let (_, fit) = expr_linf_sweep(&d, &cos_net);
    let fit = fit.unwrap();
    assert!((fit.n_hat() - 1.0).abs() < 2e-2);
}
