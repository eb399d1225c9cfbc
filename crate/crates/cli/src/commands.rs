use anyhow::{bail, Context};
use serde_json::{json, Value};
use sspert::catalog::{self, CatalogEntry, REFERENCE_TOL, THRESHOLD_TABLE_TOL};
use sspert::integrator::{advection_demo, DemoConfig};
use sspert::optimize::{self, Bounds, OptimizationReport};
use sspert::shu_osher::radius_am_perturbed;
use sspert::{has_property_c, linear, MethodDoc, Perturbation, RKMethod, Scalar};

use crate::format::{print_matrix, print_vector, scalar_json, trunc6};
use crate::source::{dispatch, load, Source};
use crate::{AlgorithmChoice, Ctx};

/// Largest gap tolerated between the LP and splitting results.
const AGREEMENT_TOL: f64 = 1e-6;

fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn method_and_pert<T: Scalar>(doc: &MethodDoc) -> anyhow::Result<(RKMethod<T>, Perturbation<T>)> {
    let m = doc.method::<T>()?;
    let p = doc.perturbation::<T>()?.unwrap_or_else(|| m.zero_perturbation());
    Ok((m, p))
}

fn radius_of<T: Scalar>(doc: &MethodDoc) -> anyhow::Result<Value> {
    let (m, p) = method_and_pert::<T>(doc)?;
    Ok(scalar_json(&radius_am_perturbed(&m, &p)))
}

fn arithmetic_name(src: &Source) -> &'static str {
    match src.arithmetic {
        sspert::Arithmetic::Rational => "rational",
        sspert::Arithmetic::Float => "float",
    }
}

fn note_missing_perturbation(ctx: &Ctx, src: &Source) {
    if !src.has_perturbation() && !ctx.json {
        eprintln!("note: `{}` carries no perturbation; using the zero perturbation", src.doc.name);
    }
}

/// `R(K)`, or `R(K, K̃)` when `perturbed`.
pub fn radius(ctx: &Ctx, name: &str, perturbed: bool) -> anyhow::Result<bool> {
    let mut src = load(name, ctx.numeric)?;
    if perturbed {
        note_missing_perturbation(ctx, &src);
    } else {
        src.doc.a_tilde = None;
        src.doc.b_tilde = None;
    }
    let value = dispatch!(src, radius_of(&src.doc))?;
    if ctx.json {
        emit(&json!({ "method": src.doc.name, "arithmetic": arithmetic_name(&src), "radius": value }));
    } else {
        println!("{}", trunc6(value["value"].as_f64().unwrap_or(f64::NAN)));
    }
    Ok(true)
}

fn bounds_of<T: Scalar>(doc: &MethodDoc) -> anyhow::Result<Bounds> {
    Ok(Bounds::of(&doc.method::<T>()?)?)
}

pub fn bounds(ctx: &Ctx, name: &str) -> anyhow::Result<bool> {
    let src = load(name, ctx.numeric)?;
    let b = dispatch!(src, bounds_of(&src.doc))?;
    if ctx.json {
        emit(&json!({
            "method": src.doc.name,
            "inv_max_abs": finite(b.inv_max_abs),
            "r_e": finite(b.r_e),
            "linear_order": finite(b.linear_order),
            "min": finite(b.min()),
        }));
    } else {
        println!("1/max|a_ij|         {}", trunc6(b.inv_max_abs));
        println!("r_e                 {}", trunc6(b.r_e));
        println!("linear-order bound  {}", trunc6(b.linear_order));
        println!("min                 {}", trunc6(b.min()));
    }
    Ok(true)
}

fn optimize_with<T: Scalar>(doc: &MethodDoc, algorithm: AlgorithmChoice, tol: f64) -> anyhow::Result<Vec<OptimizationReport>> {
    let m = doc.method::<T>()?;
    let mut out = Vec::new();
    if algorithm != AlgorithmChoice::Splitting {
        out.push(optimize::optimize_lp(&m, tol)?);
    }
    if algorithm != AlgorithmChoice::Lp {
        out.push(optimize::optimize_splitting(&m, tol)?);
    }
    Ok(out)
}

pub fn optimize(ctx: &Ctx, name: &str, algorithm: AlgorithmChoice, tol: f64) -> anyhow::Result<bool> {
    if !(tol > 0.0) {
        bail!("--tol must be positive");
    }
    let src = load(name, ctx.numeric)?;
    let reports = dispatch!(src, optimize_with(&src.doc, algorithm, tol))?;
    let m64 = src.doc.method::<f64>().context("float view of the method")?;
    let gap = (reports.len() == 2).then(|| (reports[0].r_opt - reports[1].r_opt).abs());
    let agree = gap.is_none_or(|g| g <= AGREEMENT_TOL);
    if ctx.json {
        let results: Vec<Value> = reports
            .iter()
            .map(|r| {
                json!({
                    "algorithm": r.algorithm,
                    "r_opt": r.r_opt,
                    "probes": r.iterations,
                    "property_c": has_property_c(&m64, &r.perturbation),
                    "perturbation": MethodDoc::from_method(&m64, Some(&r.perturbation)).to_value(),
                    "canonical": r.canonical.to_json_value(),
                })
            })
            .collect();
        let b = &reports[0].bounds;
        emit(&json!({
            "method": src.doc.name,
            "results": results,
            "bounds": { "inv_max_abs": finite(b.inv_max_abs), "r_e": finite(b.r_e), "linear_order": finite(b.linear_order) },
            "agreement": gap.map(|g| json!({ "difference": g, "within_tolerance": agree })),
        }));
        return Ok(agree);
    }
    for r in &reports {
        println!("{:<10} r_opt = {}  ({} probes)", r.algorithm.to_string(), trunc6(r.r_opt), r.iterations);
    }
    if let Some(g) = gap {
        println!("agreement  |lp - splitting| = {g:.3e}  {}", if agree { "ok" } else { "MISMATCH" });
    }
    let best = &reports[0];
    println!();
    print_matrix("A_tilde", best.perturbation.a_tilde());
    print_vector("b_tilde", best.perturbation.b_tilde());
    println!("property C: {}", has_property_c(&m64, &best.perturbation));
    if best.r_opt > 0.0 {
        println!("\ncanonical form at r = {}", trunc6(best.canonical.r));
        print_vector("gamma", &best.canonical.gamma);
        print_matrix("alpha_up", &best.canonical.alpha_up);
        print_matrix("alpha_down", &best.canonical.alpha_down);
    }
    Ok(agree)
}

fn linear_radius_of<T: Scalar>(doc: &MethodDoc) -> anyhow::Result<Value> {
    let (m, p) = method_and_pert::<T>(doc)?;
    Ok(scalar_json(&linear::linear_radius(&m, &p)?))
}

pub fn linear_radius(ctx: &Ctx, name: &str) -> anyhow::Result<bool> {
    let src = load(name, ctx.numeric)?;
    note_missing_perturbation(ctx, &src);
    let value = dispatch!(src, linear_radius_of(&src.doc))?;
    if ctx.json {
        emit(&json!({ "method": src.doc.name, "arithmetic": arithmetic_name(&src), "linear_radius": value }));
    } else {
        println!("{}", trunc6(value["value"].as_f64().unwrap_or(f64::NAN)));
    }
    Ok(true)
}

struct Cell {
    s: usize,
    p: usize,
    value: f64,
    reference: Option<f64>,
}

impl Cell {
    fn matches(&self) -> bool {
        self.reference.is_none_or(|r| (self.value - r).abs() <= THRESHOLD_TABLE_TOL)
    }
}

pub fn threshold_table(ctx: &Ctx, smax: usize, pmax: usize, tol: f64) -> anyhow::Result<bool> {
    if smax == 0 || pmax == 0 {
        bail!("--smax and --pmax must be at least 1");
    }
    if !(tol > 0.0) {
        bail!("--tol must be positive");
    }
    let rows: Vec<anyhow::Result<Vec<Cell>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (1..=smax)
            .map(|s| {
                scope.spawn(move || {
                    (1..=s.min(pmax))
                        .map(|p| {
                            let value = linear::threshold_bound(s, p, tol)?;
                            Ok(Cell { s, p, value, reference: catalog::threshold_reference(s, p) })
                        })
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("threshold worker panicked")).collect()
    });
    let cells: Vec<Cell> = rows.into_iter().collect::<anyhow::Result<Vec<_>>>()?.into_iter().flatten().collect();
    let compared = cells.iter().filter(|c| c.reference.is_some()).count();
    let ok = cells.iter().all(Cell::matches);
    if ctx.json {
        let out: Vec<Value> = cells
            .iter()
            .map(|c| json!({ "s": c.s, "p": c.p, "value": c.value, "reference": c.reference, "matches": c.matches() }))
            .collect();
        emit(&json!({ "tol": tol, "cells": out, "all_match": ok }));
        return Ok(ok);
    }
    let width = smax.min(pmax);
    let header: Vec<String> = (1..=width).map(|p| format!("{p:>10}")).collect();
    println!("{:>4} {}", "s\\p", header.join(" "));
    for s in 1..=smax {
        let line: Vec<String> = cells
            .iter()
            .filter(|c| c.s == s)
            .map(|c| format!("{:>9}{}", trunc6(c.value), if c.matches() { ' ' } else { '*' }))
            .collect();
        println!("{s:>4} {}", line.join(""));
    }
    let bad = cells.iter().filter(|c| !c.matches()).count();
    println!("\n{} of {compared} published entries within {THRESHOLD_TABLE_TOL}", compared - bad);
    Ok(ok)
}

pub fn catalog_list(ctx: &Ctx) -> anyhow::Result<bool> {
    if ctx.json {
        let out: Vec<Value> = catalog::all()
            .iter()
            .map(|e| json!({ "name": e.name, "title": e.title, "class": e.method.class().as_str(), "stages": e.stages(), "order": e.order(), "exact": e.exact.is_some() }))
            .collect();
        emit(&Value::Array(out));
        return Ok(true);
    }
    println!("{:<18} {:<20} {:>2} {:>2}  title", "name", "class", "s", "p");
    for e in catalog::all() {
        println!("{:<18} {:<20} {:>2} {:>2}  {}", e.name, e.method.class().as_str(), e.stages(), e.order(), e.title);
    }
    Ok(true)
}

struct Check {
    label: &'static str,
    computed: f64,
    reference: Option<f64>,
}

impl Check {
    fn pass(&self) -> bool {
        self.reference.is_none_or(|r| (self.computed - r).abs() <= REFERENCE_TOL)
    }
}

struct Verification {
    checks: Vec<Check>,
    property_c: Option<bool>,
}

impl Verification {
    fn pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }
}

fn verify(entry: &CatalogEntry) -> anyhow::Result<Verification> {
    let m = &entry.method;
    let rf = &entry.reference;
    let mut checks = vec![Check { label: "R(K)", computed: entry.radius(), reference: rf.r_k }];
    let mut property_c = None;
    if m.is_explicit() {
        let report = optimize::optimize_lp(m, optimize::DEFAULT_TOL)?;
        property_c = Some(has_property_c(m, &report.perturbation));
        checks.push(Check { label: "R_opt", computed: report.r_opt, reference: rf.r_opt });
        checks.push(Check { label: "1/max|a_ij|", computed: report.bounds.inv_max_abs, reference: rf.bound_max_abs });
        checks.push(Check { label: "linear-order bound", computed: report.bounds.linear_order, reference: rf.bound_linear_order });
    }
    Ok(Verification { checks, property_c })
}

pub fn catalog_show(ctx: &Ctx, name: &str, run_checks: bool) -> anyhow::Result<bool> {
    let entry = catalog::get(name)?;
    let verification = run_checks.then(|| verify(&entry)).transpose()?;
    let ok = verification.as_ref().is_none_or(Verification::pass);
    if ctx.json {
        let checks = verification.as_ref().map(|v| {
            v.checks
                .iter()
                .map(|c| json!({ "quantity": c.label, "computed": finite(c.computed), "reference": c.reference, "pass": c.pass() }))
                .collect::<Vec<_>>()
        });
        emit(&json!({
            "name": entry.name,
            "title": entry.title,
            "source": entry.source,
            "method": entry.doc.to_value(),
            "note": entry.reference.note,
            "checks": checks,
            "property_c": verification.as_ref().and_then(|v| v.property_c),
        }));
        return Ok(ok);
    }
    println!("{}: {}", entry.name, entry.title);
    println!("source: {}", entry.source);
    println!("class: {}, s = {}, p = {}", entry.method.class(), entry.stages(), entry.order());
    println!("A:");
    for row in &entry.doc.a {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        println!("  [{}]", cells.join(", "));
    }
    let b: Vec<String> = entry.doc.b.iter().map(|c| c.to_string()).collect();
    println!("b: [{}]", b.join(", "));
    if let Some(note) = entry.reference.note {
        println!("note: {note}");
    }
    match &verification {
        Some(v) => {
            println!();
            for c in &v.checks {
                let reference = c.reference.map_or("-".to_string(), trunc6);
                let status = match (c.reference, c.pass()) {
                    (None, _) => "n/a",
                    (Some(_), true) => "PASS",
                    (Some(_), false) => "FAIL",
                };
                println!("{:<20} {:>12} {:>12}  {status}", c.label, trunc6(c.computed), reference);
            }
            if let Some(pc) = v.property_c {
                println!("{:<20} {:>12}", "property C", pc);
            }
        }
        None => {
            let r = &entry.reference;
            let show = |label: &str, x: Option<f64>| {
                if let Some(x) = x {
                    println!("{label:<20} {}", trunc6(x));
                }
            };
            show("R(K)", r.r_k);
            show("R_opt", r.r_opt);
            show("1/max|a_ij|", r.bound_max_abs);
            show("linear-order bound", r.bound_linear_order);
        }
    }
    Ok(ok)
}

pub fn table2(ctx: &Ctx) -> anyhow::Result<bool> {
    let entries: Vec<&CatalogEntry> = catalog::all().iter().filter(|e| e.reference.r_k.is_some()).collect();
    let results: Vec<anyhow::Result<Verification>> = std::thread::scope(|scope| {
        let handles: Vec<_> = entries.iter().map(|e| scope.spawn(move || verify(e))).collect();
        handles.into_iter().map(|h| h.join().expect("verification worker panicked")).collect()
    });
    let results: Vec<Verification> = results.into_iter().collect::<anyhow::Result<_>>()?;
    let ok = results.iter().all(Verification::pass);
    if ctx.json {
        let rows: Vec<Value> = entries
            .iter()
            .zip(&results)
            .map(|(e, v)| {
                let mut row = json!({ "name": e.name, "stages": e.stages(), "order": e.order(), "property_c": v.property_c, "pass": v.pass() });
                for c in &v.checks {
                    row[c.label] = json!({ "computed": finite(c.computed), "reference": c.reference });
                }
                row
            })
            .collect();
        emit(&json!({ "rows": rows, "all_pass": ok }));
        return Ok(ok);
    }
    println!(
        "{:<16} {:>2} {:>2} {:>10} {:>10} {:>12} {:>12} {:>6}  status",
        "method", "s", "p", "R(K)", "R_opt", "1/max|a_ij|", "lin. bound", "prop C"
    );
    for (e, v) in entries.iter().zip(&results) {
        let cols: Vec<String> = v.checks.iter().map(|c| trunc6(c.computed)).collect();
        let pc = v.property_c.map_or("-".to_string(), |b| b.to_string());
        println!(
            "{:<16} {:>2} {:>2} {:>10} {:>10} {:>12} {:>12} {:>6}  {}",
            e.name,
            e.stages(),
            e.order(),
            cols[0],
            cols.get(1).map_or("-", String::as_str),
            cols.get(2).map_or("-", String::as_str),
            cols.get(3).map_or("-", String::as_str),
            pc,
            if v.pass() { "ok" } else { "MISMATCH" }
        );
    }
    for e in &entries {
        if let Some(note) = e.reference.note {
            println!("note ({}): {note}", e.name);
        }
    }
    Ok(ok)
}

pub fn advection(ctx: &Ctx, method: &str, perturbed: bool, cfl: f64, n: usize, steps: usize) -> anyhow::Result<bool> {
    if !(cfl > 0.0) {
        bail!("--cfl must be positive");
    }
    let config = DemoConfig { method: method.to_string(), perturbed, grid_points: n, cfl, steps };
    let result = advection_demo(&config)?;
    if ctx.json {
        let records: Vec<Value> = result
            .records
            .iter()
            .map(|r| json!({ "step": r.step, "t": r.t, "tv": r.tv, "max": r.max, "flag": r.flag() }))
            .collect();
        emit(&json!({
            "method": result.method,
            "perturbed": result.perturbed,
            "r": result.r,
            "radius_is_positive": result.radius_is_positive,
            "h": result.h,
            "tv_monotone": result.tv_monotone,
            "max_monotone": result.max_monotone,
            "stages_bounded": result.stages_bounded,
            "records": records,
        }));
        return Ok(true);
    }
    println!("# method {}{}", result.method, if perturbed { " (optimal perturbation)" } else { "" });
    if result.radius_is_positive {
        println!("# r = {}, h = {} (cfl {cfl})", trunc6(result.r), result.h);
    } else {
        println!("# radius is zero; stepping with r = 1, h = {} (no monotonicity guarantee)", result.h);
    }
    println!(
        "# total variation {}, max-norm {}",
        if result.tv_monotone { "non-increasing" } else { "increased" },
        if result.max_monotone { "non-increasing" } else { "increased" }
    );
    print!("{}", result.to_csv());
    Ok(true)
}
