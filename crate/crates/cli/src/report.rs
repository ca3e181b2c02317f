//! `report`: reads the artifacts of earlier runs and maps them onto the
//! twelve acceptance criteria.

use std::fmt::Write as _;
use std::fs;

use serde_json::Value;

use crate::error::CliError;
use crate::output::OutDir;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Verdict {
    Pass,
    Fail,
    Skip,
}

impl Verdict {
    fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
        }
    }
}

/// Where a criterion's evidence lives: a suite inside `verify_algebra.json`
/// or the `pass` field of a command report.
#[derive(Clone, Copy)]
enum Source {
    Suite(&'static str),
    Report(&'static str),
}

const CRITERIA: [(&str, &[Source]); 12] = [
    ("Euclidean algebra", &[Source::Suite("euclidean")]),
    ("Orbit foliation", &[Source::Suite("orbits")]),
    ("Constraint matrix inverse", &[Source::Suite("constraint-matrix")]),
    ("Dirac chart conjugacy", &[Source::Suite("dirac-chart")]),
    ("Classical equivalence", &[Source::Suite("hamiltonian"), Source::Report("evolve.json")]),
    ("Frame-switch diagram", &[Source::Suite("frame-switch")]),
    ("Unequal-mass limit", &[Source::Suite("mass-limit")]),
    ("Translational quantum sector", &[Source::Suite("translational")]),
    ("Legendre addition", &[Source::Suite("legendre-addition")]),
    ("Rotational trivialization", &[Source::Suite("rotational")]),
    ("Reduction-chain isometry", &[Source::Report("quantum_reduce.json")]),
    ("Quantum frame switch", &[Source::Report("quantum_switch.json")]),
];

fn load(out: &OutDir, name: &str) -> Result<Option<Value>, CliError> {
    let path = out.path(name);
    match fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| CliError::Usage(format!("bad artifact {}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::io(format!("cannot read {}", path.display()))(e)),
    }
}

fn source_pass(source: Source, out: &OutDir, verify: Option<&Value>) -> Result<(Option<bool>, String), CliError> {
    Ok(match source {
        Source::Suite(name) => {
            let suite = verify
                .and_then(|v| v["suites"].as_array())
                .and_then(|suites| suites.iter().find(|s| s["name"] == name));
            (suite.and_then(|s| s["pass"].as_bool()), format!("verify_algebra.json:{name}"))
        }
        Source::Report(file) => (load(out, file)?.and_then(|v| v["pass"].as_bool()), file.to_string()),
    })
}

pub fn report(out: &OutDir) -> Result<bool, CliError> {
    let verify = load(out, "verify_algebra.json")?;
    let mut md = String::from("# Acceptance report\n\n| criterion | name | status | evidence |\n|---|---|---|---|\n");
    let mut rows = Vec::new();
    let mut counts = [0usize; 3];
    for (i, (name, sources)) in CRITERIA.iter().enumerate() {
        let mut verdict = Verdict::Pass;
        let mut evidence = Vec::new();
        for &source in *sources {
            let (pass, label) = source_pass(source, out, verify.as_ref())?;
            evidence.push(label);
            verdict = match (verdict, pass) {
                (Verdict::Fail, _) | (_, Some(false)) => Verdict::Fail,
                (_, None) => Verdict::Skip,
                (v, Some(true)) => v,
            };
        }
        counts[verdict as usize] += 1;
        let id = format!("AC-{}", i + 1);
        let evidence = evidence.join(", ");
        writeln!(md, "| {id} | {name} | {} | {evidence} |", verdict.label()).expect("write to String");
        rows.push(vec![id, name.to_string(), verdict.label().to_string(), evidence]);
    }
    writeln!(md, "\n{} passed, {} failed, {} skipped.", counts[0], counts[1], counts[2]).expect("write to String");
    fs::write(out.path("report.md"), &md).map_err(CliError::io("cannot write report.md"))?;
    out.write_csv("report.csv", &["criterion", "name", "status", "evidence"], &rows)?;
    println!("report: {} passed, {} failed, {} skipped", counts[0], counts[1], counts[2]);
    Ok(counts[1] == 0)
}
