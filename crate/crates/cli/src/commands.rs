use std::path::Path;

use multischmidt::oracle::random_schmidt_state;
use multischmidt::{
    check_condition, decompose, inner_product, named, negative_certificate, party_label, Absence, BasisSet,
    Bipartition, CheckMode, Decomposition, PartialIPTable, State, bipartite_schmidt,
};

use crate::report::{fmt_list, fmt_real, fmt_vector, Outcome, Report};
use crate::state_file::{encode_vectors, BasisFile, StateFile, TruthFile};
use crate::CliError;

pub const PATI_WARNING: &str = "Pati condition is NOT sufficient (see paper-examples)";

fn load(path: &Path) -> Result<State, CliError> {
    StateFile::read(path)?.to_state()
}

fn norm_line(x: &State) -> String {
    format!("input norm: {}", fmt_real(x.norm()))
}

pub fn cmd_decompose(path: &Path, tol: f64) -> Result<Outcome, CliError> {
    let x = load(path)?;
    match decompose(&x, tol)? {
        Decomposition::Decomposable(d) => {
            let mut lines = vec![
                norm_line(&x),
                format!("DECOMPOSABLE: {} term(s)", d.n_terms()),
                format!("lambda: {}", fmt_list(d.coefficients())),
            ];
            for (i, lambda) in d.coefficients().iter().enumerate() {
                lines.push(format!("term {i} (lambda {}):", fmt_real(*lambda)));
                for j in 0..d.n_parties() {
                    lines.push(format!("  {}: {}", party_label(j), fmt_vector(&d.party_vectors(j)[i])));
                }
            }
            let report = Report {
                lambdas: Some(d.coefficients().to_vec()),
                vectors: Some(encode_vectors(&d)),
                m_j: Some(vec![d.n_terms(); d.n_parties()]),
                ..Report::new("decomposable")
            };
            Ok(Outcome { code: 0, report, lines, warnings: vec![] })
        }
        Decomposition::NotDecomposable(absence) => {
            let certificate = certify(&x, &absence, tol)?;
            let lines = vec![norm_line(&x), "NOT DECOMPOSABLE".to_string(), format!("certificate: {certificate}")];
            let report = Report { certificate: Some(certificate), ..Report::new("not_decomposable") };
            Ok(Outcome { code: 1, report, lines, warnings: vec![] })
        }
    }
}

/// Strongest available reason: a bipartition, then a failing residual, then
/// whatever the decomposer reported.
fn certify(x: &State, absence: &Absence, tol: f64) -> Result<String, CliError> {
    if x.n_parties() >= 3 {
        if let Some(split) = negative_certificate(x, tol)? {
            return Ok(format!("partially separable {split}, not completely separable"));
        }
    }
    Ok(match absence {
        Absence::NonSeparableTerm { term, coefficient, .. } => {
            let rest: Vec<String> = (1..x.n_parties()).map(party_label).collect();
            format!(
                "failing residual: right Schmidt vector {term} (coefficient {}) across {{A}}|{{{}}} is not completely separable",
                fmt_real(*coefficient),
                rest.join(",")
            )
        }
        other => format!("algorithmic absence: {other}"),
    })
}

pub fn cmd_rank(path: &Path, split: &str, tol: f64) -> Result<Outcome, CliError> {
    let x = load(path)?;
    let split = Bipartition::parse(split, x.n_parties())?;
    let s = bipartite_schmidt(&x, &split, tol)?;
    let lines = vec![
        norm_line(&x),
        format!("Schmidt number across {split}: {}", s.rank),
        format!("lambda: {}", fmt_list(s.nonzero())),
    ];
    let report = Report { lambdas: Some(s.nonzero().to_vec()), ..Report::new(format!("schmidt_number={}", s.rank)) };
    Ok(Outcome { code: 0, report, lines, warnings: vec![] })
}

pub fn cmd_check(path: &Path, mode: CheckMode, basis: &str, tol: f64) -> Result<Outcome, CliError> {
    let x = load(path)?;
    let bases = if basis == "computational" {
        x.dims().iter().map(|&d| BasisSet::computational(d)).collect()
    } else {
        BasisFile::read(Path::new(basis))?.to_bases()?
    };
    let report = check_condition(&x, &bases, mode, tol)?;

    let mut lines = vec![
        norm_line(&x),
        format!("mode: {}", match mode {
            CheckMode::AllParties => "all parties",
            CheckMode::SmallestPartyOnly => "smallest party only (pati)",
        }),
    ];
    for p in &report.per_party {
        lines.push(format!("party {}: m_j = {}", party_label(p.party()), p.m_j()));
    }
    lines.push(format!("satisfied: {}", report.satisfied));
    let failure = report.describe_failure();
    if let (Some(text), Some(entry)) = (&failure, report.failing_residual()) {
        lines.push(format!("failing {text}"));
        lines.push(format!("  residual amplitudes: {}", fmt_vector(entry.residual.amps())));
    }
    let warnings = match mode {
        CheckMode::SmallestPartyOnly => vec![PATI_WARNING.to_string()],
        CheckMode::AllParties => vec![],
    };
    let verdict = if report.satisfied { "satisfied" } else { "not_satisfied" };
    let out = Report { certificate: failure, m_j: Some(report.m_j.clone()), ..Report::new(verdict) };
    Ok(Outcome { code: if report.satisfied { 0 } else { 1 }, report: out, lines, warnings })
}

/// One replayed counterexample assertion.
#[derive(Debug, Clone)]
pub struct ExampleCheck {
    pub id: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Replays the three counterexamples to the single-party condition.
pub fn counterexample_checks(tol: f64) -> Result<Vec<ExampleCheck>, CliError> {
    let computational = |x: &State| -> Vec<BasisSet> { x.dims().iter().map(|&d| BasisSet::computational(d)).collect() };

    // E1: both residuals of (|0⟩+|1⟩)|00⟩ are products, yet they coincide
    let e1_state = named::plus_zero_zero();
    let table = PartialIPTable::build(&e1_state, 0, &BasisSet::computational(2), tol)?;
    let (psi0, psi1) = (&table.entries[0].residual, &table.entries[1].residual);
    let overlap = inner_product(psi0, psi1)?;
    let products = table.entries.iter().all(|e| e.separable);
    let e1 = ExampleCheck {
        id: "E1",
        pass: products && (overlap - 1.0).norm() <= 1e-12,
        detail: format!(
            "(|0>+|1>)|00>: residuals of A-basis are products, <psi_0|psi_1> = {} (orthogonality needs 0)",
            fmt_real(overlap.re)
        ),
    };

    // E2: |000⟩+|110⟩ has orthogonal product residuals whose C-factors coincide
    let e2_state = named::bell_pair_times_zero();
    let table = PartialIPTable::build(&e2_state, 0, &BasisSet::computational(2), tol)?;
    let last_factor = |i: usize| table.entries[i].factors.as_ref().and_then(|f| f.last().cloned());
    let (e2_pass, e2_detail) = match (last_factor(0), last_factor(1)) {
        (Some(g0), Some(g1)) => {
            let g0 = State::single(g0)?;
            let g1 = State::single(g1)?;
            let factor_overlap = inner_product(&g0, &g1)?;
            let psi_overlap = inner_product(&table.entries[0].residual, &table.entries[1].residual)?;
            let required = 0.0; // orthogonal residuals force orthogonal last factors
            (
                psi_overlap.norm() <= 1e-12 && (factor_overlap - 1.0).norm() <= 1e-12,
                format!(
                    "|000>+|110>: <psi_0|psi_1> = {}, <gamma_0|gamma_1> = {} vs required {}",
                    fmt_real(psi_overlap.norm()),
                    fmt_real(factor_overlap.re),
                    fmt_real(required)
                ),
            )
        }
        _ => (false, "|000>+|110>: residuals were not products".to_string()),
    };
    let e2 = ExampleCheck { id: "E2", pass: e2_pass, detail: e2_detail };

    // E3: the single-party check accepts |000⟩+|110⟩, the decomposer does not
    let single_party = check_condition(&e2_state, &computational(&e2_state), CheckMode::SmallestPartyOnly, tol)?;
    let absent = !decompose(&e2_state, tol)?.is_decomposable();
    let e3 = ExampleCheck {
        id: "E3",
        pass: single_party.satisfied && absent,
        detail: format!(
            "|000>+|110>: single-party check satisfied = {}, decomposer verdict = {}",
            single_party.satisfied,
            if absent { "absent" } else { "decomposable" }
        ),
    };
    Ok(vec![e1, e2, e3])
}

pub fn cmd_paper_examples(tol: f64) -> Result<Outcome, CliError> {
    let checks = counterexample_checks(tol)?;
    let passed = checks.iter().filter(|c| c.pass).count();
    let mut lines: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {}: {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.detail))
        .collect();
    let summary = format!("{passed}/{} PASS", checks.len());
    lines.push(summary.clone());
    let report = Report { certificate: Some(lines[..checks.len()].join("; ")), ..Report::new(summary) };
    Ok(Outcome { code: if passed == checks.len() { 0 } else { 1 }, report, lines, warnings: vec![] })
}

pub fn cmd_random(dims: &[usize], lambdas: &[f64], seed: u64, out: &Path) -> Result<Outcome, CliError> {
    let (x, truth) = random_schmidt_state(dims, lambdas, seed)?;
    StateFile::from_state(&x, Some(format!("random-seed-{seed}"))).write(out)?;
    let sidecar = TruthFile::sidecar_path(out);
    TruthFile::from_decomposition(&truth, seed).write(&sidecar)?;
    let lines = vec![
        format!("wrote {}", out.display()),
        format!("wrote {}", sidecar.display()),
        format!("lambda: {}", fmt_list(truth.coefficients())),
    ];
    let report = Report {
        lambdas: Some(truth.coefficients().to_vec()),
        vectors: Some(encode_vectors(&truth)),
        ..Report::new("written")
    };
    Ok(Outcome { code: 0, report, lines, warnings: vec![] })
}
