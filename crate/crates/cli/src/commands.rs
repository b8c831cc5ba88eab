use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nwh_core::harnack::ClassicalQuery;
use nwh_core::waves::{NoConnectionReason, ShootOutcome};
use nwh_core::{
    check_gradient_bound, check_speed_bound, evolve, measure_front_speed, random_queries, relax_steady, shoot_profile,
    HarnackParams, PdeParams, TimeGauge, Trajectory, WaveProfile,
};
use serde::Serialize;

use crate::config::{load_config, RunConfig};
use crate::report::{create, finish, num, Check, Location};
use crate::{CliError, ParamArgs};

type Outcome = Result<Vec<Check>, CliError>;

fn params(p: &ParamArgs) -> Result<HarnackParams<f64>, CliError> {
    let pde = PdeParams::new(p.a, p.b, p.n)?;
    Ok(HarnackParams::validate(p.alpha, p.beta, p.gamma, pde)?)
}

pub fn validate(p: &ParamArgs) -> Outcome {
    let hp = params(p)?;
    println!("valid: branch {}", hp.branch());
    let k = hp.gauge_constants();
    println!("omega = {}, mu = {}, nu = {}", num(k.omega), num(k.mu), num(k.nu));
    if let Ok(ts) = hp.switch_time() {
        println!("switch time T = {}", num(ts));
    }
    Ok(Vec::new())
}

pub fn gauge(p: &ParamArgs, t0: f64, t1: f64, steps: usize, out: Option<&Path>) -> Outcome {
    if !(t0 > 0.0 && t1 > t0 && steps >= 1) {
        return Err(CliError::Argument(format!("need 0 < t0 < t1 and steps >= 1, got t0 = {t0}, t1 = {t1}")));
    }
    let g = TimeGauge::new(params(p)?);
    let mut w: Box<dyn Write> = match out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    if let Some(ts) = g.switch_time() {
        writeln!(w, "# switch_time={}", num(ts))?;
    }
    writeln!(w, "t,value,derivative,ode_residual")?;
    for k in 0..=steps {
        let t = t0 + (t1 - t0) * k as f64 / steps as f64;
        writeln!(
            w,
            "{},{},{},{}",
            num(t),
            num(g.evaluate(t).expect("t > 0")),
            num(g.derivative(t).expect("t > 0")),
            num(g.ode_residual(t).expect("t > 0"))
        )?;
    }
    w.flush()?;
    Ok(Vec::new())
}

#[derive(Serialize)]
struct Manifest {
    dt_used: f64,
    steps: usize,
    snapshots: usize,
    wall_time_seconds: f64,
}

fn run_solver(cfg: &RunConfig) -> Result<(Trajectory<f64>, f64), CliError> {
    let start = Instant::now();
    let traj = evolve(&cfg.solver)?;
    Ok((traj, start.elapsed().as_secs_f64()))
}

pub fn simulate(path: &Path) -> Outcome {
    let cfg = load_config(path)?;
    let (traj, wall) = run_solver(&cfg)?;
    let dir = cfg.output_dir.join("snapshots");
    std::fs::create_dir_all(&dir)?;
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let mut w = create(&dir.join(format!("snapshot_{k:05}.csv")))?;
        snap.write_csv(&mut w)?;
        w.flush()?;
    }
    let manifest =
        Manifest { dt_used: traj.dt_used, steps: traj.steps, snapshots: traj.snapshots.len(), wall_time_seconds: wall };
    let mut w = create(&cfg.output_dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    println!("simulated {} steps (dt = {}), {} snapshots", traj.steps, num(traj.dt_used), traj.snapshots.len());
    Ok(Vec::new())
}

pub fn certify(path: &Path) -> Outcome {
    let cfg = load_config(path)?;
    let (traj, _) = run_solver(&cfg)?;
    let gauge = TimeGauge::new(cfg.harnack);
    let rep = nwh_core::certify(&traj, &gauge, cfg.t_min, cfg.tolerance)?;

    let mut w = create(&cfg.output_dir.join("certify.csv"))?;
    writeln!(w, "t,min_h,argmin,gauge")?;
    for r in &rep.records {
        writeln!(w, "{},{},{},{}", num(r.time), num(r.min_h), r.argmin, num(r.gauge))?;
    }
    w.flush()?;
    let mut w = create(&cfg.output_dir.join("harnack_violations.csv"))?;
    writeln!(w, "t,node,value")?;
    for v in &rep.violations {
        writeln!(w, "{},{},{}", num(v.time), v.node, num(v.value))?;
    }
    w.flush()?;

    let worst = rep.records.iter().min_by(|x, y| x.min_h.total_cmp(&y.min_h));
    let location = worst.map_or_else(Location::default, |r| Location { t: Some(r.time), node: Some(r.argmin), value: r.min_h });
    let detail = format!(
        "branch {}, min H = {} over {} snapshots, {} nodes below -{}",
        cfg.harnack.branch(),
        num(rep.min_h()),
        rep.records.len(),
        rep.violations.len(),
        cfg.tolerance
    );
    let checks = vec![Check::new("harnack", rep.min_h(), cfg.tolerance, detail, location)];
    finish("certify", &checks, &cfg.output_dir)?;
    Ok(checks)
}

/// Field minimum at the first eligible snapshot against the maximum at the
/// first snapshot at least `min_gap` later.
fn adversarial_query(traj: &Trajectory<f64>, t_min: f64, min_gap: f64) -> Option<ClassicalQuery<f64>> {
    let s1 = traj.snapshots.iter().position(|s| s.time() >= t_min * (1.0 - 1e-9) && s.time() > 0.0)?;
    let t1 = traj.snapshots[s1].time();
    let s2 = traj.snapshots.iter().position(|s| s.time() - t1 >= min_gap * (1.0 - 1e-9))?;
    let (f1, f2) = (&traj.snapshots[s1], &traj.snapshots[s2]);
    let argmax = f2.values().iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).map(|(i, _)| i)?;
    let grid = traj.config.grid;
    Some(ClassicalQuery { x1: grid.coords(f1.min_with_node().1), x2: grid.coords(argmax), t1, t2: f2.time() })
}

pub fn classical(path: &Path, count: usize, min_gap: f64, seed: u64, log_tol: f64) -> Outcome {
    if !(min_gap > 0.0 && log_tol > 0.0) {
        return Err(CliError::Argument("min-gap and log-tol must be positive".into()));
    }
    let cfg = load_config(path)?;
    let (traj, _) = run_solver(&cfg)?;
    let mut queries = random_queries(&traj, count, cfg.t_min, min_gap, seed);
    if queries.is_empty() {
        return Err(CliError::Argument(format!("no snapshot pair with t >= {} is {min_gap} apart", cfg.t_min)));
    }
    queries.extend(adversarial_query(&traj, cfg.t_min, min_gap));
    let rep = nwh_core::classical_check(&traj, &queries, log_tol)?;

    let mut w = create(&cfg.output_dir.join("classical.csv"))?;
    writeln!(w, "id,log_ratio,log_bound,slack,pass")?;
    for r in &rep.records {
        writeln!(w, "{},{},{},{},{}", r.id, num(r.log_ratio), num(r.log_bound), num(r.slack), r.pass)?;
    }
    w.flush()?;

    let worst = rep.records.iter().min_by(|x, y| x.slack.total_cmp(&y.slack)).expect("non-empty");
    let q = &queries[worst.id];
    let detail = format!(
        "{} queries, {} below -{log_tol}, min slack {} (query {})",
        rep.records.len(),
        rep.failures(),
        num(rep.min_slack()),
        worst.id
    );
    let location = Location { t: Some(q.t2), node: Some(worst.id), value: worst.slack };
    let checks = vec![Check::new("classical", rep.min_slack(), log_tol, detail, location)];
    finish("classical", &checks, &cfg.output_dir)?;
    Ok(checks)
}

fn wave_checks(profile: &WaveProfile<f64>, pde: &PdeParams<f64>, tol: f64) -> Vec<Check> {
    let speed = check_speed_bound(profile.eta, pde, tol);
    let grad = check_gradient_bound(profile, tol);
    vec![
        Check::new(
            "speed_bound",
            speed.margin,
            tol,
            format!("eta^2 - 4a/3 = {}", num(speed.margin)),
            Location { value: profile.eta, ..Location::default() },
        ),
        Check::new(
            "gradient_bound",
            1.0 - grad.max_ratio,
            tol,
            format!("max |v'|/(v|eta|) = {} at xi = {}", num(grad.max_ratio), num(grad.at_xi)),
            Location { value: grad.max_ratio, ..Location::default() },
        ),
    ]
}

pub fn wave_profile(a: f64, b: f64, eta: f64, half_width: f64, tol: f64, dir: &Path) -> Outcome {
    let pde = PdeParams::new(a, b, 1)?;
    let profile = match shoot_profile(&pde, eta, half_width, tol)? {
        ShootOutcome::Connected(p) => p,
        ShootOutcome::NoConnection { reason, xi } => {
            let why = match reason {
                NoConnectionReason::LostPositivity => "orbit crossed zero",
                NoConnectionReason::Overshoot => "orbit overshot the upper state",
                NoConnectionReason::DidNotDecay => "orbit did not decay within the window",
            };
            println!("no connection at eta = {eta}: {why} (xi = {})", num(xi));
            finish("wave-profile", &[], dir)?;
            return Ok(Vec::new());
        }
    };
    let d1 = profile.derivative();
    let res = profile.ode_residual(&pde);
    let mut w = create(&dir.join("profile.csv"))?;
    writeln!(w, "xi,v,dv,ode_residual")?;
    for i in 0..profile.len() {
        writeln!(w, "{},{},{},{}", num(profile.xi[i]), num(profile.v[i]), num(d1[i]), num(res[i]))?;
    }
    w.flush()?;
    let checks = wave_checks(&profile, &pde, tol);
    finish("wave-profile", &checks, dir)?;
    Ok(checks)
}

/// Nodes within `L/10` of `x` on the final snapshot, ordered by offset.
fn front_window(traj: &Trajectory<f64>, x: f64, eta: f64) -> WaveProfile<f64> {
    let grid = traj.config.grid;
    let last = traj.snapshots.last().expect("non-empty");
    let half = grid.extent() / 10.0;
    let mut pts: Vec<(f64, f64)> = (0..grid.len())
        .map(|i| (grid.min_image(x, grid.coords(i)[0]), last.values()[i]))
        .filter(|(d, _)| d.abs() <= half)
        .collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    WaveProfile { xi: pts.iter().map(|p| p.0).collect(), v: pts.iter().map(|p| p.1).collect(), eta }
}

pub fn wave_speed(path: &Path, level: f64, tol: f64) -> Outcome {
    let cfg = load_config(path)?;
    let (traj, _) = run_solver(&cfg)?;
    let track = measure_front_speed(&traj, level)?;
    let x = *track.positions.last().expect("non-empty");
    let profile = front_window(&traj, x.rem_euclid(traj.config.grid.extent()), track.speed.abs());
    let checks = wave_checks(&profile, &cfg.pde, tol);

    let mut w = create(&cfg.output_dir.join("wave_speed.csv"))?;
    writeln!(w, "measured_speed,speed_margin,speed_bound_pass,gradient_ratio_max,gradient_bound_pass")?;
    writeln!(
        w,
        "{},{},{},{},{}",
        num(track.speed),
        num(checks[0].worst_slack),
        checks[0].pass,
        num(checks[1].worst.value),
        checks[1].pass
    )?;
    w.flush()?;
    println!("measured front velocity {} (|eta| = {})", num(track.speed), num(track.speed.abs()));
    finish("wave-speed", &checks, &cfg.output_dir)?;
    Ok(checks)
}

pub fn steady(path: &Path, residual_tol: f64, t_max: f64, deviation_tol: f64) -> Outcome {
    let cfg = load_config(path)?;
    let f = relax_steady(&cfg.solver, residual_tol, t_max)?;
    let mut w = create(&cfg.output_dir.join("steady.csv"))?;
    f.write_csv(&mut w)?;
    w.flush()?;
    let eq = cfg.pde.equilibrium();
    let (node, dev) = f
        .values()
        .iter()
        .map(|v| (v - eq).abs())
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty");
    let detail = format!("relaxed by t = {}, max |f - sqrt(a/b)| = {}", num(f.time()), num(dev));
    let location = Location { t: Some(f.time()), node: Some(node), value: f.values()[node] };
    let checks = vec![Check::new("steady_constant", -dev, deviation_tol, detail, location)];
    finish("steady", &checks, &cfg.output_dir)?;
    Ok(checks)
}
