//! Command-line driver: solve single regularized problems, reproduce the
//! built-in cases, and run epsilon-sweep experiments.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;
use vwsolve::config::{parse_config, RunConfig};
use vwsolve::dist::MollifierNet;
use vwsolve::fdsolver::{solve, SchemeConfig};
use vwsolve::norms::energy_norms;
use vwsolve::problem::{build_instance, validate};
use vwsolve::sweep::{compare_nets, consistency_test, run_sweep, GridPolicy};
use vwsolve::{svg, Net, Report, Trajectory};

#[derive(Parser)]
#[command(name = "vwsolve", about = "1D parabolic solver for distributional data")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// single regularization width (defaults to the ladder's first entry)
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    /// time scheme parameter in [0.5, 1]
    #[arg(long)]
    theta: Option<f64>,
    /// time horizon
    #[arg(long = "T")]
    t_horizon: Option<f64>,
    /// output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// snapshot times, comma separated
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one problem at one epsilon and export the trajectory
    Solve(Common),
    /// Reproduce a built-in case over the epsilon ladder
    Case {
        id: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Epsilon sweep: solve at every epsilon and fit norm exponents
    Sweep(Common),
    /// Compare two mollifier kernels on the same problem
    CompareNets(Common),
    /// Convergence to the un-regularized solution for smooth data
    Consistency(Common),
    /// Validate ellipticity and grid resolution without solving
    Validate(Common),
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            parse_config(&text).map_err(|e| anyhow::anyhow!("{e}"))?
        }
        None => RunConfig::default(),
    };
    if let Some(t) = common.theta {
        cfg.theta = t;
    }
    if let Some(t) = common.t_horizon {
        cfg.t_horizon = t;
    }
    if let Some(nx) = common.nx {
        cfg.nx = Some(nx);
    }
    if let Some(nt) = common.nt {
        cfg.nt = Some(nt);
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(s) = &common.snapshots {
        cfg.snapshots = s.clone();
    }
    if let Some(e) = common.eps {
        cfg.epsilons = vec![e];
    }
    Ok(cfg)
}

fn net_for(cfg: &RunConfig) -> Net {
    MollifierNet::with_epsilons(cfg.epsilons.clone())
}

fn grid_for(cfg: &RunConfig) -> GridPolicy {
    match (cfg.nx, cfg.nt) {
        (Some(nx), Some(nt)) => GridPolicy::Fixed { nx, nt },
        _ => GridPolicy::CommonAuto { nx_min: 64 },
    }
}

fn auto_grid(eps: f64, t_horizon: f64, cfg: &RunConfig) -> (usize, usize) {
    let nx = cfg.nx.unwrap_or_else(|| 64usize.max((4.0 / eps).ceil() as usize));
    let nt = cfg
        .nt
        .unwrap_or_else(|| 64usize.max((4.0 * t_horizon / eps).ceil() as usize));
    (nx, nt)
}

struct RunLog {
    lines: Vec<String>,
    start: Instant,
}

impl RunLog {
    fn new(cfg: &RunConfig, verb: &str) -> Self {
        let mut lines = vec![format!("verb = {verb}"), String::from("-- config --")];
        lines.extend(cfg.echo().lines().map(String::from));
        lines.push(String::from("-- run --"));
        RunLog {
            lines,
            start: Instant::now(),
        }
    }

    fn note(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        println!("{msg}");
        self.lines.push(msg);
    }

    fn finish(mut self, out_dir: &Path) -> Result<()> {
        self.lines
            .push(format!("elapsed_seconds = {:.3}", self.start.elapsed().as_secs_f64()));
        fs::write(out_dir.join("run.log"), self.lines.join("\n") + "\n")?;
        Ok(())
    }
}

fn write_energy_csv(path: &Path, rows: &[(f64, Report)]) -> Result<()> {
    let mut out = fs::File::create(path)?;
    writeln!(out, "epsilon,{}", Report::csv_header())?;
    for (eps, rep) in rows {
        write!(out, "{eps},")?;
        rep.write_csv_row(&mut out)?;
    }
    Ok(())
}

fn profile_series(trajs: &[(f64, Trajectory)], t: f64) -> Vec<svg::Series> {
    trajs
        .iter()
        .map(|(eps, traj)| {
            let prof = traj.profile_at(t);
            let xs: Vec<f64> = (0..prof.len()).map(|i| i as f64 * traj.h).collect();
            svg::Series {
                label: format!("eps = {eps}"),
                xs,
                ys: prof.to_vec(),
            }
        })
        .collect()
}

fn cmd_solve(common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    let mut log = RunLog::new(&cfg, "solve");
    let spec = cfg.spec();
    let eps = cfg.epsilons[0];
    let (nx, nt) = auto_grid(eps, spec.t_horizon, &cfg);
    let net = net_for(&cfg);
    fs::create_dir_all(&cfg.out_dir)?;
    let inst = build_instance(&spec, &net, eps, nx, nt)?;
    let traj = solve(&inst, &SchemeConfig { theta: cfg.theta })?;
    if traj.peclet_warning {
        log.note(format!(
            "warning: cell Peclet number {:.3} exceeds 1; centered drift may oscillate",
            traj.cell_peclet
        ));
    }
    let report = energy_norms(&traj, &inst);
    let mut f = fs::File::create(cfg.out_dir.join("trajectory.csv"))?;
    traj.write_csv(&mut f)?;
    if !cfg.snapshots.is_empty() {
        let mut f = fs::File::create(cfg.out_dir.join("snapshots.csv"))?;
        traj.write_snapshots_csv(&mut f, &cfg.snapshots)?;
    }
    write_energy_csv(&cfg.out_dir.join("energy.csv"), &[(eps, report)])?;
    let series = profile_series(&[(eps, traj)], *cfg.snapshots.last().unwrap_or(&spec.t_horizon));
    fs::write(
        cfg.out_dir.join("profile.svg"),
        svg::render_chart(&series, "solution profile", "x", "u", false),
    )?;
    log.note(format!(
        "solved eps={eps} on {nx}x{nt}; wrote trajectory.csv, energy.csv, profile.svg"
    ));
    log.finish(&cfg.out_dir)
}

fn cmd_case(id: u32, common: &Common) -> Result<()> {
    let mut cfg = load_config(common)?;
    cfg.case = id;
    cfg.problem = None;
    let mut log = RunLog::new(&cfg, &format!("case {id}"));
    let spec = cfg.spec();
    let net = net_for(&cfg);
    let (nx, nt) = grid_for(&cfg).resolve(net.eps_min(), spec.t_horizon);
    fs::create_dir_all(&cfg.out_dir)?;
    log.note(format!("case {id}: shared grid {nx}x{nt} for {:?}", cfg.epsilons));

    let mut trajs = Vec::new();
    let mut energies = Vec::new();
    for &eps in &cfg.epsilons {
        let inst = build_instance(&spec, &net, eps, nx, nt)?;
        let traj = solve(&inst, &SchemeConfig { theta: cfg.theta })?;
        let rep = energy_norms(&traj, &inst);
        let mut f =
            fs::File::create(cfg.out_dir.join(format!("case{id}_eps{eps}_snapshots.csv")))?;
        traj.write_snapshots_csv(&mut f, &cfg.snapshots)?;
        log.note(format!(
            "eps={eps}: max={:.3e} very_weak={:.3e} ({:.2}s)",
            traj.max_value,
            rep.very_weak_quantity(),
            traj.wall_seconds
        ));
        energies.push((eps, rep));
        trajs.push((eps, traj));
    }
    write_energy_csv(&cfg.out_dir.join(format!("case{id}_energy.csv")), &energies)?;
    let sweep = run_sweep(&spec, &net, GridPolicy::Fixed { nx, nt })?;
    let mut f = fs::File::create(cfg.out_dir.join(format!("case{id}_sweep.csv")))?;
    sweep.write_csv(&mut f)?;
    fs::write(cfg.out_dir.join(format!("case{id}_sweep.svg")), sweep.render_svg())?;
    for &t in &cfg.snapshots {
        let series = profile_series(&trajs, t);
        fs::write(
            cfg.out_dir.join(format!("case{id}_profiles_t{t}.svg")),
            svg::render_chart(
                &series,
                &format!("case {id}: u(t={t}, x) across epsilon"),
                "x",
                "u",
                false,
            ),
        )?;
    }
    log.note(format!("wrote case{id}_* artifacts to {}", cfg.out_dir.display()));
    log.finish(&cfg.out_dir)
}

fn cmd_sweep(common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    let mut log = RunLog::new(&cfg, "sweep");
    let spec = cfg.spec();
    let net = net_for(&cfg);
    fs::create_dir_all(&cfg.out_dir)?;
    let report = run_sweep(&spec, &net, grid_for(&cfg))?;
    let mut f = fs::File::create(cfg.out_dir.join("sweep.csv"))?;
    report.write_csv(&mut f)?;
    fs::write(cfg.out_dir.join("sweep.svg"), report.render_svg())?;
    for track in &report.tracks {
        match &track.fit {
            Some(fit) => log.note(format!(
                "{}: N_hat={:.4} r2={:.4}{}",
                track.name,
                fit.n_hat(),
                fit.r2,
                if fit.constant { " (constant)" } else { "" }
            )),
            None => log.note(format!("{}: no fit", track.name)),
        }
    }
    log.finish(&cfg.out_dir)
}

fn cmd_compare_nets(common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    let mut log = RunLog::new(&cfg, "compare-nets");
    let spec = cfg.spec();
    let net_a = net_for(&cfg);
    let net_b: Net = MollifierNet::cosine(cfg.epsilons.clone());
    fs::create_dir_all(&cfg.out_dir)?;
    let cmp = compare_nets(&spec, &net_a, &net_b, grid_for(&cfg))?;
    let mut f = fs::File::create(cfg.out_dir.join("compare_nets.csv"))?;
    writeln!(f, "epsilon,norm_name,value")?;
    for (i, &eps) in cmp.epsilons.iter().enumerate() {
        writeln!(f, "{eps},linf_l2_diff,{}", cmp.linf_l2[i])?;
        writeln!(f, "{eps},composite_diff,{}", cmp.composite[i])?;
    }
    if let Some(fit) = &cmp.composite_fit {
        log.note(format!(
            "composite difference decay order K_hat={:.4} r2={:.4}",
            fit.k_hat(),
            fit.r2
        ));
    }
    log.note(format!(
        "differences strictly decreasing: {}",
        cmp.strictly_decreasing
    ));
    log.finish(&cfg.out_dir)
}

fn cmd_consistency(common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    let mut log = RunLog::new(&cfg, "consistency");
    let spec = cfg.spec();
    if spec.a.is_singular()
        || spec.b.is_singular()
        || spec.q.is_singular()
        || spec.f.is_singular()
        || spec.u0.is_singular()
        || spec.g0.is_singular()
        || spec.g1.is_singular()
    {
        bail!("consistency requires all-smooth data (no deltas)");
    }
    let net = net_for(&cfg);
    fs::create_dir_all(&cfg.out_dir)?;
    let rep = consistency_test(&spec, &net, grid_for(&cfg))?;
    let mut f = fs::File::create(cfg.out_dir.join("consistency.csv"))?;
    writeln!(f, "epsilon,norm_name,value")?;
    for (&eps, &e) in rep.epsilons.iter().zip(&rep.errors) {
        writeln!(f, "{eps},consistency_error,{e}")?;
    }
    writeln!(f, "# floor = {}", rep.floor)?;
    log.note(format!(
        "errors {:?} floor {:.3e} monotone={} reached_floor={}",
        rep.errors, rep.floor, rep.monotone, rep.reached_floor
    ));
    log.finish(&cfg.out_dir)
}

fn cmd_validate(common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    let spec = cfg.spec();
    let net = net_for(&cfg);
    let (nx, nt) = grid_for(&cfg).resolve(net.eps_min(), spec.t_horizon);
    match validate(&spec, &net, nx, nt) {
        Ok(report) => {
            for c in &report.checks {
                println!(
                    "eps={}: min a_eps = {:.6} (alpha = {}), resolution ok",
                    c.epsilon, c.min_a, spec.alpha
                );
            }
            println!("valid on {nx}x{nt}");
            Ok(())
        }
        Err(e) => bail!("{e}"),
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Solve(c) => cmd_solve(c),
        Cmd::Case { id, common } => cmd_case(*id, common),
        Cmd::Sweep(c) => cmd_sweep(c),
        Cmd::CompareNets(c) => cmd_compare_nets(c),
        Cmd::Consistency(c) => cmd_consistency(c),
        Cmd::Validate(c) => cmd_validate(c),
    }
}
