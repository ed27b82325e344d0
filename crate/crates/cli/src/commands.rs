use std::f64::consts::PI;
use std::fs;

use serde_json::{json, Value};

use lemlab_core::arclength::{length_fiber, length_p0_closed, p0_asymptote};
use lemlab_core::battery::{exit_code, run_battery, Battery, BatteryBudget};
use lemlab_core::calibration::Calibration;
use lemlab_core::conformal::{gronwall_area, inclusion_radii, laurent_coeffs, perimeter_bound};
use lemlab_core::export::{
    perturbation_csv, psi_csv, psi_grid, psi_svg, search_history_csv, trace_csv, trace_svg, ViewBox,
};
use lemlab_core::inequality::lemniscate_length;
use lemlab_core::json::{emit_poly, emit_spec, parse_poly, PolyDoc};
use lemlab_core::measure::{area, equiv_radius};
use lemlab_core::region::Region;
use lemlab_core::search::{perturbation_study, search, SearchConfig};
use lemlab_core::trace::{trace_lemniscate, Trace};
use lemlab_core::{family, CoeffPoly, Error, Family, QuadratureBudget};

use crate::args::{CommonArgs, PolyArgs};
use crate::output::OutputDir;

/// Failure classes with distinct exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Malformed or inconsistent invocation: exit 64.
    Config(String),
    /// A computation failed: exit 70.
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BadParameter(m) | Error::Schema(m) => Failure::Config(m),
            other => Failure::Runtime(other),
        }
    }
}

pub type Outcome = Result<(OutputDir, Value, i32), Failure>;

fn hex_seed(seed: u64) -> String {
    format!("{seed:#x}")
}

fn tolerance(common: &CommonArgs, default: f64) -> Result<f64, Failure> {
    let tol = common.budget_tol.unwrap_or(default);
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Failure::Config(format!("--budget-tol must lie in (0, 1), got {tol}")));
    }
    Ok(tol)
}

fn level(args: &PolyArgs, default: f64) -> Result<f64, Failure> {
    let level = args.level.unwrap_or(default);
    if !(level > 0.0 && level.is_finite()) {
        return Err(Failure::Config(format!("--level must be positive and finite, got {level}")));
    }
    Ok(level)
}

fn family_spec(name: Family, n: Option<usize>, a: Option<f64>, r: Option<f64>) -> Result<(PolyDoc, Value), Failure> {
    let (n, param) = match name {
        Family::Cassini => (n.unwrap_or(2), r.unwrap_or(1.0)),
        Family::P0 => (n.ok_or_else(|| Failure::Config("--n is required with --family p0".into()))?, 0.0),
        Family::Example1 | Family::Example2 => (
            n.ok_or_else(|| Failure::Config(format!("--n is required with --family {name}")))?,
            a.unwrap_or(0.5),
        ),
    };
    let spec = family(name, n, param)?;
    let mut desc = json!({ "family": name, "n": n });
    match name {
        Family::Example1 | Family::Example2 => desc["a"] = json!(param),
        Family::Cassini => desc["r"] = json!(param),
        Family::P0 => {}
    }
    Ok((PolyDoc::Critical(spec), desc))
}

/// The polynomial named on the command line and a description for the manifest.
fn resolve_poly(args: &PolyArgs) -> Result<(PolyDoc, Value), Failure> {
    match (&args.family, &args.input) {
        (Some(name), None) => family_spec(*name, args.n, args.a, args.r),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            let doc = parse_poly(&text)?;
            let desc = json!({ "input": path.display().to_string(), "document": emit_poly(&doc) });
            Ok((doc, desc))
        }
        _ => Err(Failure::Config("give exactly one of --family and --input".into())),
    }
}

fn base_config(command: &str, common: &CommonArgs) -> Value {
    json!({
        "command": command,
        "seed": hex_seed(common.seed),
        "output_dir": common.out.display().to_string(),
    })
}

fn is_p0(p: &CoeffPoly) -> bool {
    let c = p.coeffs();
    c[0] == lemlab_core::Complex64::new(-1.0, 0.0) && c[1..c.len() - 1].iter().all(|z| z.norm() == 0.0)
}

/// Default view unless the traced curve leaves it.
fn view_for(trace: Option<&Trace>) -> ViewBox {
    let reach = trace
        .into_iter()
        .flat_map(|t| t.components.iter())
        .flat_map(|c| c.vertices.iter())
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    if reach <= 1.5 {
        ViewBox::default()
    } else {
        ViewBox::around(reach)
    }
}

pub fn length(args: &PolyArgs) -> Outcome {
    let (doc, input) = resolve_poly(args)?;
    if args.level.is_some_and(|l| l != 1.0) {
        return Err(Failure::Config("length is defined on the level set |p| = 1 only".into()));
    }
    let tol = tolerance(&args.common, 1e-10)?;
    let budget = QuadratureBudget::with_tol(tol);
    let p = doc.poly();
    let n = p.degree();
    let fiber = length_fiber(p, &Region::Plane, &budget);
    let best = lemniscate_length(p, &budget).map_err(Failure::Runtime)?;
    let p0 = length_p0_closed(n);
    let report = json!({
        "degree": n,
        "closed_form": if is_p0(p) { Some(p0) } else { None },
        "asymptote": p0_asymptote(n),
        "fiber": fiber.as_ref().ok(),
        "fiber_error": fiber.as_ref().err().map(|e| e.to_string()),
        "length": best,
        "p0_length": p0,
        "deficit": p0 - best.length,
    });
    let mut out = OutputDir::new(&args.common.out);
    out.add("polynomial.json", emit_poly(&doc) + "\n");
    out.add_json("length.json", &report);
    let mut config = base_config("length", &args.common);
    config["input"] = input;
    config["budget_tol"] = json!(tol);
    println!("length {:.12} ({:?}), z^{n} - 1 closed form {p0:.12}", best.length, best.method);
    Ok((out, config, 0))
}

pub fn trace(args: &PolyArgs) -> Outcome {
    let (doc, input) = resolve_poly(args)?;
    let level = level(args, 1.0)?;
    let tol = tolerance(&args.common, 1e-8)?;
    let tr = trace_lemniscate(doc.poly(), level, &QuadratureBudget::with_tol(tol)).map_err(Failure::Runtime)?;
    let view = view_for(Some(&tr));
    let components: Vec<Value> = tr
        .components
        .iter()
        .map(|c| {
            json!({
                "vertices": c.vertices.len(),
                "closed": c.closed,
                "through_critical": c.through_critical,
                "stalled": c.stalled,
                "length": c.length(),
            })
        })
        .collect();
    let mut out = OutputDir::new(&args.common.out);
    out.add("polynomial.json", emit_poly(&doc) + "\n");
    out.add("trace.csv", trace_csv(&tr));
    out.add("trace.svg", trace_svg(&tr, &view));
    out.add_json("trace.json", &json!({ "level": level, "length": tr.length(), "components": components }));
    let mut config = base_config("trace", &args.common);
    config["input"] = input;
    config["level"] = json!(level);
    config["budget_tol"] = json!(tol);
    println!("{} components, polyline length {:.10}", tr.components.len(), tr.length());
    Ok((out, config, 0))
}

pub fn psi_map(args: &PolyArgs, resolution: usize) -> Outcome {
    let (doc, input) = resolve_poly(args)?;
    if !(1..=4000).contains(&resolution) {
        return Err(Failure::Config(format!("--resolution must lie in 1..=4000, got {resolution}")));
    }
    let level = level(args, 1.0)?;
    let tol = tolerance(&args.common, 1e-8)?;
    let spec = doc.to_spec();
    // The overlay is decoration; a failed trace still leaves the heat map.
    let overlay = trace_lemniscate(doc.poly(), level, &QuadratureBudget::with_tol(tol)).ok();
    let view = view_for(overlay.as_ref());
    let grid = psi_grid(&spec, &view, resolution);
    let mut out = OutputDir::new(&args.common.out);
    out.add("polynomial.json", emit_spec(&spec) + "\n");
    out.add("psi.csv", psi_csv(&grid));
    out.add("psi.svg", psi_svg(&grid, overlay.as_ref()));
    let mut config = base_config("psi-map", &args.common);
    config["input"] = input;
    config["level"] = json!(level);
    config["resolution"] = json!(resolution);
    config["budget_tol"] = json!(tol);
    println!("{resolution}x{resolution} grid{}", if overlay.is_some() { " with lemniscate overlay" } else { "" });
    Ok((out, config, 0))
}

pub fn area_cmd(args: &PolyArgs) -> Outcome {
    let (doc, input) = resolve_poly(args)?;
    let level = level(args, 1.0)?;
    let tol = tolerance(&args.common, 1e-4)?;
    let p = doc.poly();
    let n = p.degree() as f64;
    let est = area(&Region::sublevel(p, level), &QuadratureBudget::area(tol)).map_err(Failure::Runtime)?;
    let bound = PI * level.powf(2.0 / n);
    let report = json!({
        "level": level,
        "area": est,
        "equiv_radius": equiv_radius(est.value),
        "polya_bound": bound,
        "polya_holds": est.value <= bound + 3.0 * tol * bound + est.error,
    });
    let mut out = OutputDir::new(&args.common.out);
    out.add("polynomial.json", emit_poly(&doc) + "\n");
    out.add_json("area.json", &report);
    let mut config = base_config("area", &args.common);
    config["input"] = input;
    config["level"] = json!(level);
    config["budget_tol"] = json!(tol);
    println!("area {:.10} +- {:.2e} (bound {bound:.10})", est.value, est.error);
    Ok((out, config, 0))
}

pub fn laurent(args: &PolyArgs, terms: usize) -> Outcome {
    let (doc, input) = resolve_poly(args)?;
    let level = level(args, 4.0)?;
    let normalized = doc.poly().normalize();
    let data = laurent_coeffs(&normalized.poly, level, terms)?;
    let (inner, outer) = inclusion_radii(&data);
    let report = json!({
        "shift": normalized.shift,
        "rotation": normalized.rotation,
        "data": data,
        "gronwall_area": gronwall_area(&data),
        "perimeter_bound": perimeter_bound(&data),
        "inclusion_radii": [inner, outer],
        "tail_converged": data.tail_converged(),
    });
    let mut csv = String::from("k,re,im\n");
    for (k, a) in data.coeffs.iter().enumerate() {
        csv.push_str(&format!("{},{},{}\n", k + 1, a.re, a.im));
    }
    let mut out = OutputDir::new(&args.common.out);
    out.add("polynomial.json", emit_poly(&doc) + "\n");
    out.add_json("laurent.json", &report);
    out.add("laurent.csv", csv);
    let mut config = base_config("laurent", &args.common);
    config["input"] = input;
    config["level"] = json!(level);
    config["terms"] = json!(data.coeffs.len());
    println!(
        "{} coefficients, |a_-1 - 1| = {:.2e}, area {:.10}",
        data.coeffs.len(),
        data.capacity_check,
        gronwall_area(&data)
    );
    Ok((out, config, 0))
}

pub fn verify(battery: Battery, common: &CommonArgs) -> Outcome {
    let mut budget = BatteryBudget::default();
    let tol = tolerance(common, budget.area.tol)?;
    budget.area = QuadratureBudget::area(tol);
    let cal = Calibration::frozen().map_err(Failure::Runtime)?;
    let reports = run_battery(battery, common.seed, &cal, &budget).map_err(Failure::Runtime)?;
    let code = exit_code(&reports);
    let mut lines = String::new();
    for r in &reports {
        lines.push_str(&serde_json::to_string(r).expect("reports serialize"));
        lines.push('\n');
    }
    let failing: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.check_name.as_str()).collect();
    let summary = json!({
        "battery": battery,
        "exit_code": code,
        "suites": reports.len(),
        "trials": reports.iter().map(|r| r.trials).sum::<usize>(),
        "violations": reports.iter().map(|r| r.violations).sum::<usize>(),
        "failing": failing,
    });
    let mut out = OutputDir::new(&common.out);
    out.add("reports.jsonl", lines);
    out.add_json("summary.json", &summary);
    let mut config = base_config("verify", common);
    config["battery"] = json!(battery);
    config["budget_tol"] = json!(tol);
    for r in &reports {
        println!("{} {} {} trials, {} violations", if r.passed { "PASS" } else { "FAIL" }, r.check_name, r.trials, r.violations);
    }
    Ok((out, config, code))
}

pub fn search_cmd(n: usize, restarts: usize, directions: usize, common: &CommonArgs) -> Outcome {
    if n < 3 {
        return Err(Failure::Config(format!("search needs --n >= 3, got {n}")));
    }
    if restarts == 0 {
        return Err(Failure::Config("--restarts must be positive".into()));
    }
    let mut cfg = SearchConfig::default();
    let tol = tolerance(common, cfg.budget.tol)?;
    cfg.budget = QuadratureBudget::with_tol(tol);
    let report = search(n, restarts, common.seed, &cfg).map_err(Failure::Runtime)?;
    let mut out = OutputDir::new(&common.out);
    out.add_json("search.json", &report);
    out.add("search_history.csv", search_history_csv(&report));
    let best = report.best.decode().map_err(Failure::Runtime)?;
    out.add("best.json", emit_spec(&best) + "\n");
    if directions > 0 {
        let magnitudes: Vec<f64> = (0..10).map(|i| 0.01 * 30f64.powf(i as f64 / 9.0)).collect();
        let table = perturbation_study(n, &magnitudes, directions, common.seed, &cfg.budget)?;
        out.add_json("perturbation.json", &table);
        out.add("perturbation.csv", perturbation_csv(&table));
    }
    let mut config = base_config("search", common);
    config["n"] = json!(n);
    config["restarts"] = json!(restarts);
    config["directions"] = json!(directions);
    config["budget_tol"] = json!(tol);
    config["search"] = json!(cfg);
    println!(
        "best length {:.12} at size {:.3e}; {}/{restarts} restarts reached z^{n} - 1",
        report.best.objective,
        best.norms().total_size,
        report.per_restart.iter().filter(|r| r.converged_to_p0).count()
    );
    Ok((out, config, 0))
}

const FAMILIES: [(Family, &str, &str); 4] = [
    (Family::P0, "z^n - 1", "n >= 1"),
    (Family::Example1, "z^n - n/(n-2) a^2 z^(n-2) - 1, critical points +-a", "n > 2, 0 < a < 1 (default 0.5)"),
    (Family::Example2, "z^n - 1 - (a/n)^n", "n >= 1, 0 < a <= 1 (default 0.5)"),
    (Family::Cassini, "z^2 - r^2", "n = 2, r > 0 (default 1)"),
];

pub fn families(name: Option<Family>, n: Option<usize>, a: Option<f64>, r: Option<f64>, common: &CommonArgs) -> Outcome {
    let list: Vec<Value> = FAMILIES
        .iter()
        .map(|(f, formula, params)| json!({ "name": f, "polynomial": formula, "parameters": params }))
        .collect();
    let mut out = OutputDir::new(&common.out);
    out.add_json("families.json", &list);
    let mut config = base_config("families", common);
    if let Some(name) = name {
        let (doc, desc) = family_spec(name, n, a, r)?;
        out.add("polynomial.json", emit_poly(&doc) + "\n");
        config["input"] = desc;
    }
    for (f, formula, params) in FAMILIES {
        println!("{:<9} {formula}  [{params}]", f.to_string());
    }
    Ok((out, config, 0))
}
