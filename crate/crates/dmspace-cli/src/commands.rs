//! Commands on space documents, generic over the scalar.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use dmspace::approx::approximate;
use dmspace::ghlp::{
    is_equivalent_zero_distance, limit_of_finite_sequence, rho_search, rho_upper_from_witness, Budget, LimitConfig,
    Provenance, RhoWitness,
};
use dmspace::gluing::{check_isometric_inclusions, glued_distance, GluingSpec};
use dmspace::hyperbolic::degeneration_budget;
use dmspace::prokhorov::{dpi_bisection_oracle, prokhorov_auto, pushforward, ENUMERATION_CAP};
use dmspace::space::{validate_space, FiniteSpace, Q};
use serde_json::{json, Value};

use crate::document::{self, distance_value, matrix_rows, space_document, witness_document, CliScalar};
use crate::output::{print_json, write_json};
use crate::{suites, BudgetName, Cli, CliError, Command};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.float {
        run_with::<f64>(cli)
    } else {
        run_with::<Q>(cli)
    }
}

fn run_with<T: CliScalar>(cli: &Cli) -> Result<(), CliError> {
    let tol: T = match &cli.tol {
        Some(s) => T::parse_token(s).map_err(|e| CliError::Usage(format!("--tol: {e}")))?,
        None => T::default_tol(),
    };
    match &cli.command {
        Command::Validate { file } => validate::<T>(file, tol),
        Command::Components { file } => components(&document::load_space::<T>(file, tol)?),
        Command::Prokhorov { file, mu, nu, oracle } => {
            prokhorov(&document::load_space::<T>(file, tol)?, mu.as_deref(), nu, *oracle, tol)
        }
        Command::Glue { x, y, pairs, delta, save } => glue::<T>(x, y, pairs, delta, save.as_deref(), tol),
        Command::Rho { x, y, seed, budget, witness_out } => {
            rho::<T>(x, y, *seed, *budget, witness_out.as_deref(), tol)
        }
        Command::Equiv { x, y } => {
            equiv(&document::load_space::<T>(x, tol)?, &document::load_space::<T>(y, tol)?)
        }
        Command::Approx { file, eps, save } => approx::<T>(file, eps, save.as_deref(), tol),
        Command::Certify { files, eps, cap, ball, ball_slope, radii, suite } => {
            suites::certify::<T>(files, eps, cap, ball, ball_slope.as_deref(), radii, suite, tol)
        }
        Command::Limit { files, tail, threshold, save } => limit::<T>(files, *tail, threshold, save.as_deref(), tol),
        Command::Hexagon { b, compare } => suites::hexagon(b, compare.as_deref()),
        Command::Pants { lengths, depth, save } => suites::pants(lengths, *depth, save.as_deref()),
        Command::Degenerate { b1, b3, b2, depth, budget, suite } => {
            suites::degenerate(*b1, *b3, b2, *depth, budget_for(*budget), suite)
        }
        Command::Solenoid { degrees, eps, suite } => suites::solenoid(degrees, eps, suite),
        Command::Collapse { c_m, sheets, half_length, samples, suite } => {
            suites::collapse(*c_m, sheets, *half_length, *samples, suite)
        }
    }
}

pub fn budget_for<T: CliScalar>(name: BudgetName) -> Budget<T> {
    match name {
        BudgetName::Quick => Budget::quick(),
        BudgetName::Default => Budget::default(),
        BudgetName::Thorough => Budget::thorough(),
        BudgetName::Degeneration => {
            let b = degeneration_budget();
            Budget {
                max_matchings: b.max_matchings,
                max_deltas: b.max_deltas,
                max_removed: b.max_removed,
                local_search_iters: b.local_search_iters,
                time_cap: b.time_cap,
                ..Budget::default()
            }
        }
    }
}

pub fn parse_one<T: CliScalar>(s: &str, flag: &str) -> Result<T, CliError> {
    T::parse_token(s).map_err(|e| CliError::Usage(format!("{flag}: {e}")))
}

pub fn parse_list<T: CliScalar>(s: &str, flag: &str) -> Result<Vec<T>, CliError> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse_one(t, flag)).collect()
}

fn label_index<T: CliScalar>(s: &FiniteSpace<T>) -> HashMap<&str, usize> {
    s.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
}

fn labels_of<T: CliScalar>(s: &FiniteSpace<T>, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| s.labels()[i].clone()).collect()
}

fn validate<T: CliScalar>(file: &Path, tol: T) -> Result<(), CliError> {
    let (labels, dist, mass) = document::read_parts::<T>(file)?;
    let report = validate_space(&labels, &dist, &mass, tol)
        .map_err(|e| CliError::Document { path: file.display().to_string(), msg: e.to_string() })?;
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| json!({ "invariant": v.name(), "detail": v.describe(&labels) }))
        .collect();
    let components = dmspace::space::components(&dist).blocks.len();
    print_json(&json!({
        "file": file.display().to_string(),
        "ok": report.ok,
        "points": labels.len(),
        "components": components,
        "violations": violations,
        "tolerance": tol.to_value(),
    }))?;
    if report.ok {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} invariant violation(s)", report.violations.len())))
    }
}

fn components<T: CliScalar>(s: &FiniteSpace<T>) -> Result<(), CliError> {
    let blocks: Vec<Vec<String>> = s.components().blocks.iter().map(|b| labels_of(s, b)).collect();
    let masses: Vec<Value> = s.components().blocks.iter().map(|b| s.mass_of(b).to_value()).collect();
    print_json(&json!({ "count": blocks.len(), "components": blocks, "masses": masses }))
}

fn prokhorov<T: CliScalar>(s: &FiniteSpace<T>, mu: Option<&str>, nu: &str, oracle: bool, tol: T) -> Result<(), CliError> {
    let mu: Vec<T> = match mu {
        Some(m) => parse_list(m, "--mu")?,
        None => s.mass().to_vec(),
    };
    let nu: Vec<T> = parse_list(nu, "--nu")?;
    if mu.len() != s.len() || nu.len() != s.len() {
        return Err(CliError::Usage(format!("--mu and --nu need {} masses each", s.len())));
    }
    let (value, method) = prokhorov_auto(s.dist(), &mu, &nu).map_err(|e| CliError::Failed(e.to_string()))?;
    let mut out = json!({
        "value": value.to_value(),
        "method": method,
        "tolerance": tol.to_value(),
    });
    if oracle {
        if s.len() > ENUMERATION_CAP {
            return Err(CliError::Failed(format!("oracle enumerates subsets of at most {ENUMERATION_CAP} points")));
        }
        let f = |m: &[T]| m.iter().map(|v| v.to_f64()).collect::<Vec<_>>();
        let (lo, hi) = dpi_bisection_oracle(&s.dist().map_values(|v| v.to_f64()), &f(&mu), &f(&nu), 1e-9)
            .map_err(|e| CliError::Failed(e.to_string()))?;
        let v = value.to_f64();
        out["oracle"] = json!({ "lo": lo, "hi": hi, "agrees": lo - 1e-9 <= v && v <= hi + 1e-9 });
    }
    print_json(&out)
}

/// Labels of `X ⊔ Y`, prefixed with `x:`/`y:` only when the two sides share a label.
fn union_labels<T: CliScalar>(x: &FiniteSpace<T>, y: &FiniteSpace<T>) -> Vec<String> {
    let xs = label_index(x);
    let clash = y.labels().iter().any(|l| xs.contains_key(l.as_str()));
    let tag = |p: &str, l: &String| if clash { format!("{p}:{l}") } else { l.clone() };
    x.labels().iter().map(|l| tag("x", l)).chain(y.labels().iter().map(|l| tag("y", l))).collect()
}

fn glue<T: CliScalar>(xp: &Path, yp: &Path, pairs: &str, delta: &str, save: Option<&Path>, tol: T) -> Result<(), CliError> {
    let x = document::load_space::<T>(xp, tol)?;
    let y = document::load_space::<T>(yp, tol)?;
    let delta: T = parse_one(delta, "--delta")?;
    let (xi, yi) = (label_index(&x), label_index(&y));
    let mut idx_pairs = Vec::new();
    for p in pairs.split(',').filter(|p| !p.trim().is_empty()) {
        let (a, b) = p.split_once('=').ok_or_else(|| CliError::Usage(format!("--pairs: expected x=y, got {p:?}")))?;
        let i = xi.get(a.trim()).ok_or_else(|| CliError::Usage(format!("--pairs: no label {a:?} in X")))?;
        let j = yi.get(b.trim()).ok_or_else(|| CliError::Usage(format!("--pairs: no label {b:?} in Y")))?;
        idx_pairs.push((*i, *j));
    }
    let g = glued_distance(x.dist(), y.dist(), GluingSpec::new(idx_pairs, delta)).map_err(|e| CliError::Failed(e.to_string()))?;
    let report = check_isometric_inclusions(&g, x.dist(), y.dist(), tol);
    let labels = union_labels(&x, &y);
    let (classes, qdist) = g.quotient();
    let all_mass: Vec<T> = x.mass().iter().chain(y.mass()).copied().collect();
    let qlabels: Vec<String> =
        classes.iter().map(|c| c.iter().map(|&i| labels[i].as_str()).collect::<Vec<_>>().join("~")).collect();
    let qmass: Vec<T> = classes.iter().map(|c| c.iter().map(|&i| all_mass[i]).sum()).collect();
    let quotient = FiniteSpace::with_tol(qlabels, qdist, qmass, tol).map_err(|e| CliError::Failed(e.to_string()))?;
    if let Some(p) = save {
        write_json(p, &space_document(&quotient, Some(json!({ "provenance": "glue" }))))?;
    }
    print_json(&json!({
        "labels": labels,
        "dist": matrix_rows(&g.dist),
        "delta": delta.to_value(),
        "x_isometric": report.x_ok,
        "y_isometric": report.y_ok,
        "max_distortion": distance_value(report.max_distortion),
        "quotient_points": quotient.len(),
        "tolerance": tol.to_value(),
    }))
}

fn witness_summary<T: CliScalar>(x: &FiniteSpace<T>, y: &FiniteSpace<T>, w: &RhoWitness<T>) -> Value {
    let provenance = match &w.provenance {
        Provenance::Glued { pairs, delta } => json!({
            "kind": "glued",
            "delta": delta.to_value(),
            "pairs": pairs.iter().map(|&(a, b)| [x.labels()[a].clone(), y.labels()[b].clone()]).collect::<Vec<_>>(),
        }),
        Provenance::Composed => json!({ "kind": "composed" }),
        Provenance::Supplied => json!({ "kind": "supplied" }),
    };
    json!({
        "level": distance_value(w.level),
        "eps": w.eps.to_value(),
        "removed_x": labels_of(x, &w.removed_x),
        "removed_y": labels_of(y, &w.removed_y),
        "ambient_points": w.ambient.len(),
        "provenance": provenance,
    })
}

fn rho<T: CliScalar>(
    xp: &Path,
    yp: &Path,
    seed: u64,
    budget: BudgetName,
    witness_out: Option<&Path>,
    tol: T,
) -> Result<(), CliError> {
    let x = document::load_space::<T>(xp, tol)?;
    let y = document::load_space::<T>(yp, tol)?;
    let est = rho_search(&x, &y, &budget_for::<T>(budget), seed);
    let mut witness = Value::Null;
    if let Some(w) = &est.witness {
        // Every reported upper bound is re-derived from the serialized witness.
        let doc = witness_document(w);
        let text = serde_json::to_string(&doc)?;
        let back: RhoWitness<T> = document::parse_witness(&text, "witness")?;
        let v = rho_upper_from_witness(&x, &y, &back, tol).map_err(|e| CliError::Failed(format!("witness rejected: {e}")))?;
        if !v.objective.eq_tol(est.upper, tol) {
            return Err(CliError::Failed(format!("witness gives {} but search reported {}", v.objective, est.upper)));
        }
        if let Some(p) = witness_out {
            write_json(p, &doc)?;
        }
        witness = witness_summary(&x, &y, w);
    }
    print_json(&json!({
        "lower": est.lower.to_value(),
        "upper": est.upper.to_value(),
        "method": est.method,
        "evaluated": est.evaluated,
        "seed": seed,
        "budget": format!("{budget:?}").to_lowercase(),
        "tolerance": tol.to_value(),
        "witness": witness,
    }))
}

fn equiv<T: CliScalar>(x: &FiniteSpace<T>, y: &FiniteSpace<T>) -> Result<(), CliError> {
    let pairs = is_equivalent_zero_distance(x, y);
    let labelled: Option<Vec<[String; 2]>> =
        pairs.map(|p| p.iter().map(|&(a, b)| [x.labels()[a].clone(), y.labels()[b].clone()]).collect());
    print_json(&json!({ "equivalent": labelled.is_some(), "pairs": labelled }))
}

fn approx<T: CliScalar>(file: &Path, eps: &str, save: Option<&Path>, tol: T) -> Result<(), CliError> {
    let s = document::load_space::<T>(file, tol)?;
    let eps: T = parse_one(eps, "--eps")?;
    if !(eps > T::zero()) {
        return Err(CliError::Usage("--eps must be positive".into()));
    }
    let net = approximate(&s, eps).map_err(|e| CliError::Failed(e.to_string()))?;
    let pushed = pushforward(&net.centers, net.approx.mass(), s.len());
    let (dpi, method) = prokhorov_auto(s.dist(), s.mass(), &pushed).map_err(|e| CliError::Failed(e.to_string()))?;
    let doc = space_document(&net.approx, Some(json!({ "provenance": "epsilon net", "epsilon": eps.to_value() })));
    if let Some(p) = save {
        write_json(p, &doc)?;
    }
    print_json(&json!({
        "epsilon": eps.to_value(),
        "centers": labels_of(&s, &net.centers),
        "prokhorov": dpi.to_value(),
        "method": method,
        "approximation": doc,
    }))
}

fn limit<T: CliScalar>(files: &[PathBuf], tail: usize, threshold: &str, save: Option<&Path>, tol: T) -> Result<(), CliError> {
    let seq = files.iter().map(|f| document::load_space::<T>(f, tol)).collect::<Result<Vec<_>, _>>()?;
    let cfg = LimitConfig { tol, tail_len: tail, divergence_threshold: parse_one(threshold, "--threshold")? };
    let lim = limit_of_finite_sequence(&seq, &cfg).map_err(|e| CliError::Failed(e.to_string()))?;
    let doc = space_document(&lim, Some(json!({ "provenance": "limit", "terms": files.len() })));
    if let Some(p) = save {
        write_json(p, &doc)?;
    }
    print_json(&doc)
}
