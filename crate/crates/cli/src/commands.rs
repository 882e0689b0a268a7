use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use bubble_lab::bounds::{self, BoundsInput, Provenance};
use bubble_lab::bubble::{self, BubbleProfile};
use bubble_lab::embed;
use bubble_lab::flow::{self, DescentOptions, TorusDomain};
use bubble_lab::profile::{f_from_phi, validate_profile, Builtin, PhiProfile};
use bubble_lab::stability::{self, BetaReading, StabilityOptions};
use bubble_lab::{Bubble, Geometry, LabError, Profile, Result};
use serde_json::{json, Value};

use crate::{
    BetaReadingArg, BoundsArgs, Command, EmbedArgs, FamilyArgs, FlowArgs, GeometryArgs, MemberArgs, StabilityArgs,
};

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Family(a) => family(a),
        Command::Stability(a) => stability_cmd(a),
        Command::Flow(a) => flow_cmd(a),
        Command::Bounds(a) => bounds_cmd(a),
        Command::Embed(a) => embed_cmd(a),
    }
}

fn load_profile(selector: &str, margin: f64) -> Result<Profile> {
    let p = match selector.parse::<Builtin>() {
        Ok(b) => {
            if !(margin > 0.0 && margin < 0.5) {
                return Err(LabError::InvalidInput(format!("margin = {margin} must lie in (0, 0.5)")));
            }
            PhiProfile::builtin(b, margin)
        }
        Err(_) => {
            let path = Path::new(selector);
            if !path.exists() {
                return Err(LabError::InvalidInput(format!(
                    "profile `{selector}` is neither a builtin (ex1, ex2) nor an existing CSV file"
                )));
            }
            PhiProfile::from_csv_path(path)?
        }
    };
    let diags = validate_profile(&p);
    if !diags.is_empty() {
        let codes: Vec<&str> = diags.iter().map(|d| d.code()).collect();
        return Err(LabError::InvalidInput(format!(
            "profile `{selector}` is not admissible: {}",
            codes.join(", ")
        )));
    }
    Ok(p)
}

fn geometry(a: &GeometryArgs) -> Result<Geometry> {
    f_from_phi(&load_profile(&a.profile, a.margin)?, a.c)
}

fn out_dir(path: &Path) -> Result<PathBuf> {
    fs::create_dir_all(path)?;
    Ok(path.to_path_buf())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| LabError::Parse(e.to_string()))?;
    let mut f = create(dir, name)?;
    writeln!(f, "{text}")?;
    f.flush()?;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(())
}

fn to_value<S: serde::Serialize>(s: &S) -> Result<Value> {
    serde_json::to_value(s).map_err(|e| LabError::Parse(e.to_string()))
}

pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let bad = || LabError::InvalidInput(format!("range `{text}` must look like START:END:COUNT"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    Ok(match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    })
}

fn parse_interval(text: &str) -> Result<(f64, f64)> {
    let bad = || LabError::InvalidInput(format!("interval `{text}` must look like A:B"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn resolve_s1(g: &Geometry, s1: Option<f64>, v: Option<f64>, nodes: usize) -> Result<f64> {
    match (s1, v) {
        (Some(s1), _) => Ok(s1),
        (None, Some(v)) => bubble::volume_to_s1(g, v, nodes),
        (None, None) => Err(LabError::InvalidInput("give either --s1 or --v".into())),
    }
}

fn member(g: &Geometry, m: &MemberArgs, nodes: usize) -> Result<Bubble> {
    let s1 = resolve_s1(g, m.s1, m.v, nodes)?;
    bubble::solve_profile(g, s1, nodes)
}

fn family(a: FamilyArgs) -> Result<()> {
    let g = geometry(&a.geometry)?;
    let dir = out_dir(&a.geometry.out)?;
    let m = &a.members;
    let rows = match &m.s1_range {
        Some(r) => bubble::family_sweep(&g, &parse_range(r)?, a.geometry.nodes),
        None => {
            let s1 = resolve_s1(&g, m.s1, m.v, a.geometry.nodes)?;
            let bp = bubble::solve_profile(&g, s1, a.geometry.nodes)?;
            let mut f = create(&dir, "profile.csv")?;
            bubble::write_profile_csv(&bp, &mut f)?;
            f.flush()?;
            bubble::family_sweep(&g, &[s1], a.geometry.nodes)
        }
    };
    let mut f = create(&dir, "family.csv")?;
    bubble::write_sweep_csv(&rows, &mut f)?;
    f.flush()?;
    let _ = bubble::write_sweep_csv(&rows, std::io::stdout().lock());
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("warning: s1 = {}: {}", r.s1, r.error.as_deref().unwrap_or(""));
    }
    Ok(())
}

fn stability_cmd(a: StabilityArgs) -> Result<()> {
    if a.k_max < 1 || a.m < 1 {
        return Err(LabError::InvalidInput("--k-max and --m must be at least 1".into()));
    }
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(LabError::InvalidInput(format!("--tol = {} must be positive", a.tol)));
    }
    let g = geometry(&a.geometry)?;
    let dir = out_dir(&a.geometry.out)?;
    let bp = member(&g, &a.member, a.geometry.nodes)?;
    let opts = StabilityOptions {
        k_max: a.k_max,
        m: a.m,
        tol_rel: a.tol,
    };
    let report = stability::stability_verdict(&bp, &g, &opts)?;
    let mut v = to_value(&report)?;
    v["s1"] = json!(bp.s1);
    v["H"] = json!(bp.h);
    match a.beta_reading {
        BetaReadingArg::PhiS => v["beta_reading"] = json!("phi_s"),
        BetaReadingArg::PhiSAtS1 => {
            let alt = stability::beta(&g, BetaReading::PhiSAt(bp.s1))?;
            v["beta_reading"] = json!("phi_s_at_s1");
            v["beta"] = json!(alt.value);
        }
    }
    write_json(&dir, "stability.json", &v)
}

fn flow_cmd(a: FlowArgs) -> Result<()> {
    if !(a.dim == 1 || a.dim == 2) {
        return Err(LabError::InvalidInput(format!("--dim = {} must be 1 or 2", a.dim)));
    }
    if a.n < 1 {
        return Err(LabError::InvalidInput("--n must be at least 1".into()));
    }
    let dir = out_dir(&a.out)?;
    let lengths = vec![a.length; a.dim];
    let domain = TorusDomain::new(&lengths, a.resolution)?;
    let field0 = match &a.init {
        Some(p) => {
            let f = File::open(p).map_err(|e| LabError::InvalidInput(format!("cannot open {}: {e}", p.display())))?;
            let field = flow::read_grid_csv(BufReader::new(f), a.length, a.n)?;
            if field.domain.dim() != a.dim {
                return Err(LabError::InvalidInput(format!(
                    "grid in {} is {}-dimensional but --dim is {}",
                    p.display(),
                    field.domain.dim(),
                    a.dim
                )));
            }
            field
        }
        None => {
            if !(a.a > 0.0) || !(a.amplitude >= 0.0) || a.amplitude >= a.a {
                return Err(LabError::InvalidInput(format!(
                    "need 0 <= amplitude < a for a positive start (a = {}, amplitude = {})",
                    a.a, a.amplitude
                )));
            }
            flow::random_field(&domain, a.a, a.amplitude, a.n, a.seed)?
        }
    };
    let opts = DescentOptions {
        max_steps: a.max_steps,
        step_size: a.step,
        tol: a.tol,
    };
    let summary = flow::constrained_descent(&field0, &opts)?;
    let mut f = create(&dir, "trajectory.csv")?;
    flow::write_trajectory_csv(&summary.trajectory, &mut f)?;
    f.flush()?;

    let fd = &summary.field.domain;
    let lambda1 = fd.lambda1();
    let c_dd = flow::positivity_constant(a.n, a.lemma_c_prime);
    let mean = summary.field.mean();
    let trials = if a.lemma_trials > 0 {
        let t = flow::positivity_trials(fd, a.lemma_a, a.n, a.lemma_c, a.lemma_c_prime, a.lemma_trials, a.seed)?;
        to_value(&t)?
    } else {
        Value::Null
    };
    let radius = summary.field.radius();
    let r_mean = radius.iter().sum::<f64>() / radius.len() as f64;
    let r_osc = radius.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - radius.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let h_cyl = (a.n as f64 - 1.0) / r_mean;
    let slope = match bounds::slope_bound_constants(a.n, h_cyl, r_osc, 0.0) {
        Ok(k) => {
            let check = bounds::verify_slope_bound(fd, &radius, k.c_prime)?;
            json!({ "constants": to_value(&k)?, "check": to_value(&check)? })
        }
        Err(e) => json!({ "error": e.to_string() }),
    };
    let last = summary.trajectory.last().copied();
    let v = json!({
        "steps": summary.steps,
        "converged": summary.converged,
        "volume_drift": summary.volume_drift,
        "area_monotone": summary.area_monotone(),
        "initial_area": summary.trajectory.first().map(|r| r.area),
        "final_area": last.map(|r| r.area),
        "final_tau_inf_over_a": last.map(|r| r.tau_inf_over_a),
        "final_step_size": summary.final_step_size,
        "lambda1": lambda1,
        "positivity_lemma": {
            "c_double_prime": c_dd,
            "c_double_prime_source": "proof-extracted",
            "threshold_at_mean": flow::positivity_threshold(mean, a.n, lambda1, c_dd)?,
            "root": flow::positivity_root(a.n, lambda1, c_dd),
            "trials": trials,
        },
        "slope_bound": slope,
    });
    write_json(&dir, "flow.json", &v)
}

fn member_bounds(g: &Geometry, bp: &Bubble) -> Result<(BoundsInput, f64)> {
    let s1 = bp.s1;
    let r0 = g.ricci_bound_r0((-s1, s1))?;
    let input = BoundsInput {
        d: 3,
        n: 1,
        vol_x: 4.0 * std::f64::consts::PI * g.c() * g.big_f(g.s_max()),
        v: bp.volume,
        h: bp.h,
        rho0: 0.0,
        rho1: bp.u_max(),
        r0,
        c_osc: bp.u_max(),
        x0_measure: bp.x0_measure,
    };
    Ok((input, bp.lateral_area))
}

fn bounds_cmd(a: BoundsArgs) -> Result<()> {
    let g = geometry(&a.geometry)?;
    let dir = out_dir(&a.geometry.out)?;
    let bp = member(&g, &a.member, a.geometry.nodes)?;
    let (input, area) = member_bounds(&g, &bp)?;
    let checks = bounds::check_area_h_volume(&input, area, Provenance::SoapBubble)?;
    let mut f = create(&dir, "bounds.csv")?;
    bounds::write_checks_csv(&checks, &mut f)?;
    f.flush()?;

    let h0 = bounds::h0_large_bubble(input.d, input.n, input.r0)?;
    let slope = match bounds::slope_bound_constants(input.n, input.h, input.c_osc, input.r0) {
        Ok(k) => to_value(&k)?,
        Err(e) => json!({ "error": e.to_string() }),
    };
    let envelope = match &a.sweep {
        Some(r) => {
            let rows = bubble::family_sweep(&g, &parse_range(r)?, a.geometry.nodes);
            let env = bounds::sweep_envelope(&rows);
            json!({
                "envelope": env.map(|e| to_value(&e)).transpose()?,
                "within_guard": env.map(|e| e.within_guard()),
            })
        }
        None => Value::Null,
    };
    let v = json!({
        "s1": bp.s1,
        "input": to_value(&input)?,
        "area": area,
        "checks": to_value(&checks)?,
        "h0": to_value(&h0)?,
        "ric_nonneg_h_bound": if h0.ric_nonneg { Some(bounds::ric_nonneg_h_bound(input.d, input.n, input.rho1)?) } else { None },
        "isop_h_bound": bounds::isop_h_bound(input.n, input.vol_x, input.v)?,
        "slope_constants": slope,
        "sweep": envelope,
    });
    write_json(&dir, "bounds.json", &v)
}

const OVERLAY_POINTS: usize = 512;

fn overlay_files(g: &Geometry, bp: &BubbleProfile<f64>, dir: &Path, n_theta: usize) -> Result<Value> {
    let mut svg = create(dir, "bubble.svg")?;
    svg.write_all(embed::profile_svg(bp).as_bytes())?;
    svg.flush()?;
    let mut meridian = embed::bubble_overlay(g, bp, OVERLAY_POINTS)?;
    embed::orient_counter_clockwise(&mut meridian);
    let mesh = embed::revolution_mesh(&meridian, n_theta, true)?;
    let mut f = create(dir, "bubble.obj")?;
    embed::write_obj(&mesh, &mut f)?;
    f.flush()?;
    Ok(json!({
        "s1": bp.s1,
        "vertices": mesh.vertices.len(),
        "faces": mesh.faces.len(),
        "euler_characteristic": mesh.euler_characteristic(),
    }))
}

fn embed_cmd(a: EmbedArgs) -> Result<()> {
    let g = geometry(&a.geometry)?;
    let dir = out_dir(&a.geometry.out)?;
    let interval = parse_interval(&a.interval)?;
    let c_max = embed::max_c_for_embedding(&g, interval)?;
    let curve = embed::embed_revolution(&g, interval, a.samples)?;
    let mut f = create(&dir, "meridian.csv")?;
    writeln!(f, "s,r,x3")?;
    for i in 0..curve.len() {
        writeln!(f, "{},{},{}", curve.s[i], curve.r[i], curve.x3[i])?;
    }
    f.flush()?;
    let mesh = embed::revolution_mesh(&curve.meridian(), a.n_theta, false)?;
    let mut f = create(&dir, "y.obj")?;
    embed::write_obj(&mesh, &mut f)?;
    f.flush()?;
    let overlay = match a.s1 {
        Some(s1) => {
            let bp = bubble::solve_profile(&g, s1, a.geometry.nodes)?;
            overlay_files(&g, &bp, &dir, a.n_theta)?
        }
        None => Value::Null,
    };
    let v = json!({
        "c": g.c(),
        "interval": [interval.0, interval.1],
        "c_max": c_max,
        "unit_speed_defect": curve.unit_speed_defect(),
        "vertices": mesh.vertices.len(),
        "faces": mesh.faces.len(),
        "bubble": overlay,
    });
    write_json(&dir, "embed.json", &v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.1:0.5:5").unwrap().len(), 5);
        assert_eq!(parse_range("0.1:0.5:1").unwrap(), vec![0.1]);
        assert!(parse_range("0.1:0.5:0").unwrap().is_empty());
        assert!(parse_range("0.1:0.5").is_err());
        assert_eq!(parse_interval("-1:1").unwrap(), (-1.0, 1.0));
    }
}
