//! Subcommand implementations for the `lpnet` binary.
//!
//! Each command returns the process exit status.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use lpnet::document::{to_json_string, DocumentError, InputDocument, SolutionDocument};
use lpnet::network::{reconstruct, verify_characterization, verify_smoothness};
use lpnet::solver::{solve, SolveError, SolverConfig};
use lpnet::{enumerate_basis, fixtures};
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Both defects reported by `verify` must stay at or below this.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Csv,
    Json,
}

fn input_error(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_INPUT
}

fn read(path: &Path) -> Result<String, i32> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), i32> {
    fs::write(path, contents).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_solution(path: &Path) -> Result<SolutionDocument, i32> {
    SolutionDocument::from_json(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

pub fn cmd_solve(input: &Path, p: f64, output: &Path, residual_tol: Option<f64>, max_iters: Option<usize>) -> i32 {
    run(|| {
        let doc = InputDocument::from_json(&read(input)?).map_err(input_error)?;
        let mut cfg = SolverConfig::new(p);
        if let Some(tol) = residual_tol {
            cfg.residual_tol = tol;
        }
        if let Some(n) = max_iters {
            cfg.max_newton_iters = n;
        }
        cfg.validate().map_err(input_error)?;
        let tri = doc.triangulation().map_err(input_error)?;
        let basis = enumerate_basis(&tri).map_err(|e| input_error(DocumentError::from(e)))?;
        let d = basis.data();
        let (alpha, report, status) = match solve(&basis, &d, &cfg) {
            Ok((alpha, report)) => (alpha, report, EXIT_OK),
            Err(SolveError::NoConvergence { alpha, report, .. }) => (alpha, *report, EXIT_NO_CONVERGENCE),
            Err(e) => return Err(input_error(e)),
        };
        let net = reconstruct(&alpha, &basis, &tri, report.q);
        let solution = SolutionDocument::new(&doc, &basis, &net, &report);
        write(output, &solution.to_json())?;
        println!("p = {}  q = {}", report.p, report.q);
        println!("norm = {:.9}", solution.norm);
        println!(
            "iterations = {} over {} continuation steps, residual = {:.3e}",
            report.total_iterations(),
            report.steps.len(),
            report.final_residual
        );
        if status == EXIT_NO_CONVERGENCE {
            eprintln!("error: Newton iteration did not converge; partial result written to {}", output.display());
        }
        Ok(status)
    })
}

pub fn cmd_verify(solution: &Path) -> i32 {
    run(|| {
        let doc = load_solution(solution)?;
        let (tri, basis, net) = doc.rebuild().map_err(input_error)?;
        let characterization = verify_characterization(&net, &basis);
        let smoothness = verify_smoothness(&net, &tri);
        println!("characterization defect = {characterization:.3e}");
        println!("smoothness defect = {smoothness:.3e}");
        println!("norm = {:.9}", net.lp_norm());
        if characterization <= VERIFY_TOL && smoothness <= VERIFY_TOL {
            println!("ok");
            Ok(EXIT_OK)
        } else {
            println!("verification failed (tolerance {VERIFY_TOL:e})");
            Ok(EXIT_VERIFY)
        }
    })
}

pub fn cmd_sample(solution: &Path, per_edge: usize, format: SampleFormat, output: &Path) -> i32 {
    run(|| {
        let doc = load_solution(solution)?;
        let (tri, _, net) = doc.rebuild().map_err(input_error)?;
        let lines = net.sample(&tri, per_edge).map_err(input_error)?;
        let text = match format {
            SampleFormat::Csv => {
                let mut out = String::from("edge_i,edge_j,t,x,y,z\n");
                for line in &lines {
                    for s in &line.points {
                        writeln!(out, "{},{},{:.16e},{:.16e},{:.16e},{:.16e}", line.i + 1, line.j + 1, s.t, s.x, s.y, s.z)
                            .expect("writing to a String");
                    }
                }
                out
            }
            SampleFormat::Json => {
                let polylines: Vec<_> = lines
                    .iter()
                    .map(|line| {
                        json!({
                            "edge_i": line.i + 1,
                            "edge_j": line.j + 1,
                            "points": line.points.iter().map(|s| json!({"t": s.t, "x": s.x, "y": s.y, "z": s.z})).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                to_json_string(&json!({ "polylines": polylines }))
            }
        };
        write(output, &text)?;
        println!("{} polylines, {} samples each", lines.len(), per_edge);
        Ok(EXIT_OK)
    })
}

pub fn cmd_example(name: &str, output: &Path) -> i32 {
    run(|| {
        let doc = fixtures::by_name(name)
            .ok_or_else(|| input_error(format!("unknown example {name:?}; known: {}", fixtures::NAMES.join(", "))))?;
        write(output, &doc.to_json())?;
        Ok(EXIT_OK)
    })
}

fn run(body: impl FnOnce() -> Result<i32, i32>) -> i32 {
    body().unwrap_or_else(|code| code)
}
