//! Hyperbolic constructions and the experiment suites.

use std::path::{Path, PathBuf};

use dmspace::approx::{precompact_certificate, CertificateOutcome, HypothesisFailure};
use dmspace::ghlp::Budget;
use dmspace::hyperbolic::{
    build_hexagon, build_pants, degeneration_family, measure_alternate_sides, symmetric_difference_area, HexagonSpec,
};
use dmspace::solenoid::{ball_mass_lower, collapse_experiment, rho_bound_levels, uniform_density, CollapseSpec, CoverTower};
use dmspace::space::{Scalar, Q};
use serde_json::{json, Value};

use crate::commands::{parse_list, parse_one};
use crate::document::{self, space_document, CliScalar};
use crate::output::{csv_target, print_json, write_csv, write_json};
use crate::{CliError, SuiteArgs};

fn lengths3(s: &str, flag: &str) -> Result<[f64; 3], CliError> {
    let v: Vec<f64> = parse_list(s, flag)?;
    v.try_into().map_err(|_| CliError::Usage(format!("{flag}: expected three comma-separated values")))
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn f(v: f64) -> Value {
    v.to_value()
}

pub fn hexagon(b: &str, compare: Option<&str>) -> Result<(), CliError> {
    let [b1, b2, b3] = lengths3(b, "--b")?;
    let spec = HexagonSpec::new(b1, b2, b3);
    let poly = build_hexagon(spec).map_err(failed)?;
    let mut out = json!({
        "spec": spec,
        "vertices": poly.vertices,
        "angles": poly.angles,
        "area": poly.area().map_err(failed)?,
        "side_lengths": poly.side_lengths().into_iter().map(f).collect::<Vec<_>>(),
        "alternate_sides": measure_alternate_sides(spec).map_err(failed)?.map(f),
    });
    if let Some(c) = compare {
        let [c1, c2, c3] = lengths3(c, "--compare")?;
        let sd = symmetric_difference_area(spec, HexagonSpec::new(c1, c2, c3)).map_err(failed)?;
        out["symmetric_difference"] = json!({ "area": sd.area, "pieces": sd.pieces.len(), "closed_form": sd.closed_form });
    }
    print_json(&out)
}

pub fn pants(lengths: &str, depth: u32, save: Option<&Path>) -> Result<(), CliError> {
    let l = lengths3(lengths, "--lengths")?;
    let s = build_pants(l, depth).map_err(failed)?;
    if let Some(p) = save {
        let meta = json!({ "provenance": "pants", "lengths": l, "depth": depth });
        write_json(p, &space_document(&s.space, Some(meta)))?;
    }
    let p = &s.provenance;
    print_json(&json!({
        "lengths": l,
        "depth": depth,
        "points": s.space.len(),
        "total_mass": s.space.total_mass(),
        "cells": p.cells.len(),
        "seam_samples": p.seam_samples,
        "seam_spacing": p.seam_spacing,
        "identifications": p.identifications,
        "mesh_bound": p.mesh_bound,
    }))
}

pub fn degenerate(b1: f64, b3: f64, b2: &str, depth: u32, budget: Budget<f64>, suite: &SuiteArgs) -> Result<(), CliError> {
    let b2s: Vec<f64> = parse_list(b2, "--b2")?;
    if b2s.is_empty() || b2s.iter().any(|&b| !(b > 0.0)) || b2s.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Usage("--b2: expected positive, strictly decreasing values".into()));
    }
    let rows = degeneration_family(b1, b3, &b2s, depth, &budget, suite.seed).map_err(failed)?;
    let tol = f64::default_tol();
    if let Some(path) = csv_target(suite.csv.as_deref(), "degeneration") {
        let header = ["b1", "b3", "b2", "lower", "upper", "mesh_bound", "symmetric_difference", "evaluated"];
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![b1, b3, r.b2, r.lower, r.upper, r.mesh_bound, r.symmetric_difference]
                    .into_iter()
                    .map(|v| v.to_string())
                    .chain([r.evaluated.to_string()])
                    .collect()
            })
            .collect();
        write_csv(&path, suite.seed, &tol.to_string(), &header, &table)?;
    }
    let nonincreasing = rows.windows(2).all(|w| w[1].upper <= w[0].upper + tol);
    print_json(&json!({
        "suite": "degeneration",
        "seed": suite.seed,
        "tolerance": tol,
        "b1": b1,
        "b3": b3,
        "depth": depth,
        "rows": rows,
        "nonincreasing": nonincreasing,
    }))
}

fn q(v: Q) -> Value {
    v.to_value()
}

pub fn solenoid(degrees: &str, eps: &str, suite: &SuiteArgs) -> Result<(), CliError> {
    let degrees: Vec<usize> = degrees
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| CliError::Usage(format!("--degrees: not a count: {t:?}"))))
        .collect::<Result<_, _>>()?;
    let eps: Vec<Q> = parse_list(eps, "--eps")?;
    if eps.iter().any(|&e| e <= Q::from(0)) {
        return Err(CliError::Usage("--eps: values must be positive".into()));
    }
    let tower = CoverTower::new(degrees).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut levels = Vec::new();
    let mut table = Vec::new();
    for m in 0..=tower.depth() {
        for n in 0..m {
            let b = rho_bound_levels(&tower, n, m).map_err(failed)?;
            table.push(vec![
                n.to_string(),
                m.to_string(),
                b.delta.to_string(),
                b.prokhorov.to_string(),
                b.objective.to_string(),
                b.within_twice_delta().to_string(),
            ]);
            levels.push(json!({
                "n": n,
                "m": m,
                "delta": q(b.delta),
                "prokhorov": q(b.prokhorov),
                "objective": q(b.objective),
                "within_twice_delta": b.within_twice_delta(),
            }));
        }
    }
    let mut balls = Vec::new();
    for &e in &eps {
        for level in 1..=tower.depth() {
            let c = ball_mass_lower(&tower, level, e).map_err(failed)?;
            balls.push(json!({
                "level": level,
                "eps": q(c.eps),
                "n_eps": c.n_eps,
                "bound": c.bound.map(q),
                "full_space_case": c.full_space_case,
                "min_ball_mass": q(c.min_ball_mass),
                "verified": c.verified,
            }));
        }
    }
    if let Some(path) = csv_target(suite.csv.as_deref(), "solenoid") {
        let header = ["n", "m", "delta", "prokhorov", "objective", "within_twice_delta"];
        write_csv(&path, suite.seed, "0", &header, &table)?;
    }
    print_json(&json!({
        "suite": "solenoid",
        "seed": suite.seed,
        "tolerance": "0",
        "degrees": tower.degrees(),
        "levels": levels,
        "ball_mass": balls,
    }))
}

pub fn collapse(c_m: f64, sheets: &str, half_length: f64, samples: usize, suite: &SuiteArgs) -> Result<(), CliError> {
    let sheets: Vec<usize> = sheets
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| CliError::Usage(format!("--sheets: not a count: {t:?}"))))
        .collect::<Result<_, _>>()?;
    if sheets.is_empty() {
        return Err(CliError::Usage("--sheets: empty grid".into()));
    }
    let spec = CollapseSpec { c_m, sheets, half_length, samples };
    let report = collapse_experiment(&spec, &uniform_density).map_err(|e| CliError::Usage(e.to_string()))?;
    let tol = f64::default_tol();
    if let Some(path) = csv_target(suite.csv.as_deref(), "collapse") {
        let header = ["n", "delta", "prokhorov", "objective", "bound"];
        let table: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| vec![r.n.to_string(), r.delta.to_string(), r.prokhorov.to_string(), r.objective.to_string(), r.bound.to_string()])
            .collect();
        write_csv(&path, suite.seed, &tol.to_string(), &header, &table)?;
    }
    print_json(&json!({
        "suite": "collapse",
        "seed": suite.seed,
        "tolerance": tol,
        "spec": spec,
        "report": report,
    }))
}

#[allow(clippy::too_many_arguments)]
pub fn certify<T: CliScalar>(
    files: &[PathBuf],
    eps: &str,
    cap: &str,
    ball: &str,
    slope: Option<&str>,
    radii: &str,
    suite: &SuiteArgs,
    tol: T,
) -> Result<(), CliError> {
    let family = files.iter().map(|p| document::load_space::<T>(p, tol)).collect::<Result<Vec<_>, _>>()?;
    let eps: T = parse_one(eps, "--eps")?;
    let cap: T = parse_one(cap, "--cap")?;
    let ball: T = parse_one(ball, "--ball")?;
    let slope: Option<T> = slope.map(|s| parse_one(s, "--ball-slope")).transpose()?;
    let radii: Vec<T> = parse_list(radii, "--radii")?;
    if !(eps > T::zero()) {
        return Err(CliError::Usage("--eps must be positive".into()));
    }
    let lower = |r: T| match slope {
        Some(k) => ball.min_of(k * r),
        None => ball,
    };
    let outcomes = precompact_certificate(&family, eps, cap, lower, &radii);
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for (path, out) in files.iter().zip(&outcomes) {
        let file = path.display().to_string();
        let (row, rec) = match out {
            CertificateOutcome::Certified(c) => (
                json!({
                    "file": file,
                    "status": "certified",
                    "size": c.size,
                    "size_bound": c.size_bound,
                    "uncovered_mass": c.uncovered_mass.to_value(),
                    "centers": c.centers.iter().map(|&i| family[rows.len()].labels()[i].clone()).collect::<Vec<_>>(),
                }),
                vec![file.clone(), "certified".into(), c.size.to_string(), c.size_bound.to_string(), c.uncovered_mass.to_string(), String::new()],
            ),
            CertificateOutcome::Flagged(h) => {
                let reason = match h {
                    HypothesisFailure::MassCap { total, cap } => format!("total mass {total} exceeds cap {cap}"),
                    HypothesisFailure::BallMass { point, radius, mass, required } => format!(
                        "ball of radius {radius} at {} has mass {mass} < {required}",
                        family[rows.len()].labels()[*point]
                    ),
                };
                (
                    json!({ "file": file, "status": "flagged", "reason": reason }),
                    vec![file.clone(), "flagged".into(), String::new(), String::new(), String::new(), reason],
                )
            }
        };
        rows.push(row);
        table.push(rec);
    }
    if let Some(path) = csv_target(suite.csv.as_deref(), "precompact") {
        let header = ["file", "status", "size", "size_bound", "uncovered_mass", "reason"];
        write_csv(&path, suite.seed, &tol.to_string(), &header, &table)?;
    }
    print_json(&json!({
        "suite": "precompact",
        "seed": suite.seed,
        "tolerance": tol.to_value(),
        "epsilon": eps.to_value(),
        "cap": cap.to_value(),
        "spaces": rows,
    }))
}
