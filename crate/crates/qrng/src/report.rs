//! Recomputes the reference single-photon, pair and reduced-state figures
//! from the bundled measured matrices and tabulates them against the
//! reference values.

use std::fmt::Write as _;

use qrng_core::audit::{self, AuditOptions, AuditReport, ChshAngles, Scheme};
use qrng_core::reference::{self, values};
use qrng_core::state::{self, from_pure, FidelityConvention, PureState};
use qrng_core::{Complex64, ComplexMatrix};
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Computed under a different fidelity convention than the reference.
    Convention,
    /// Shown for context, not compared.
    Info,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Convention => "CONVENTION",
            Status::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Complex(Complex64),
}

impl Value {
    fn distance(self, other: Value) -> f64 {
        match (self, other) {
            (Value::Real(a), Value::Real(b)) => (a - b).abs(),
            (Value::Complex(a), Value::Complex(b)) => (a - b).norm(),
            _ => f64::INFINITY,
        }
    }

    fn fixed(self) -> String {
        match self {
            Value::Real(x) => format!("{x:.3}"),
            Value::Complex(z) => {
                let sign = if z.im < 0.0 { '-' } else { '+' };
                format!("{:.3}{sign}{:.3}i", z.re, z.im.abs())
            }
        }
    }

    fn full(self) -> String {
        match self {
            Value::Real(x) => format!("{x}"),
            Value::Complex(z) => format!("{}{:+}i", z.re, z.im),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub section: &'static str,
    pub quantity: String,
    pub computed: Value,
    pub reference: Value,
    pub status: Status,
}

impl Row {
    pub fn difference(&self) -> f64 {
        self.computed.distance(self.reference)
    }
}

fn compared(
    section: &'static str,
    quantity: impl Into<String>,
    computed: Value,
    reference: Value,
) -> Row {
    let status = if computed.distance(reference) <= values::TOLERANCE {
        Status::Pass
    } else {
        Status::Fail
    };
    Row {
        section,
        quantity: quantity.into(),
        computed,
        reference,
        status,
    }
}

fn fidelity_row(
    section: &'static str,
    target: &str,
    computed: f64,
    reference: f64,
    convention: FidelityConvention,
) -> Row {
    let mut row = compared(
        section,
        format!("fidelity ({}) to {target}", convention.as_str()),
        Value::Real(computed),
        Value::Real(reference),
    );
    if convention != FidelityConvention::Root {
        row.status = Status::Convention;
    }
    row
}

fn matrix_rows(
    section: &'static str,
    name: &str,
    computed: &ComplexMatrix,
    reference: &ComplexMatrix,
) -> Vec<Row> {
    let mut rows = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            rows.push(compared(
                section,
                format!("{name}[{i},{j}]"),
                Value::Complex(computed[(i, j)]),
                Value::Complex(reference[(i, j)]),
            ));
        }
    }
    rows
}

fn audit_of(
    rho: &qrng_core::DensityMatrix,
    scheme: Scheme,
    target: &qrng_core::DensityMatrix,
    convention: FidelityConvention,
) -> Result<AuditReport> {
    Ok(audit::audit(
        rho,
        scheme,
        Some(target),
        &AuditOptions {
            convention,
            chsh_angles: Some(ChshAngles::default()),
            raw_length: 0,
        },
    )?)
}

pub const SINGLE: &str = "single photon";
pub const PAIR: &str = "photon pair";
pub const REDUCED: &str = "signal photon";

pub fn reproduction_rows(convention: FidelityConvention) -> Result<Vec<Row>> {
    let real = Value::Real;
    let mut rows = Vec::new();

    let single = reference::single_photon();
    let d = from_pure(&PureState::diagonal());
    let a = audit_of(&single, Scheme::SingleHv, &d, convention)?;
    rows.push(compared(
        SINGLE,
        "p(H)",
        real(a.probabilities[0]),
        real(values::SINGLE_P_H),
    ));
    rows.push(compared(
        SINGLE,
        "p(V)",
        real(a.probabilities[1]),
        real(values::SINGLE_P_V),
    ));
    rows.push(compared(
        SINGLE,
        "coherence C",
        real(a.coherence_c),
        real(values::SINGLE_COHERENCE),
    ));
    rows.push(compared(
        SINGLE,
        "min-entropy bound",
        real(a.min_entropy_bound),
        real(values::SINGLE_MIN_ENTROPY),
    ));
    rows.push(fidelity_row(
        SINGLE,
        "|D>",
        a.fidelity_to_target.unwrap_or(f64::NAN),
        values::SINGLE_FIDELITY,
        convention,
    ));

    let pair = reference::two_photon();
    let phi = from_pure(&PureState::phi_plus(0.0));
    let a = audit_of(&pair, Scheme::CoincidenceHhVv, &phi, convention)?;
    rows.push(fidelity_row(
        PAIR,
        "|Phi+>",
        a.fidelity_to_target.unwrap_or(f64::NAN),
        values::PAIR_FIDELITY,
        convention,
    ));
    rows.push(Row {
        section: PAIR,
        quantity: "CHSH S from matrix (reference: measured directly)".into(),
        computed: real(a.chsh_s.unwrap_or(f64::NAN)),
        reference: real(values::PAIR_CHSH_MEASURED),
        status: Status::Info,
    });
    let sub = state::subspace_restrict(&pair, (0, 3))?;
    rows.extend(matrix_rows(
        PAIR,
        "HH/VV block",
        sub.matrix(),
        &reference::subspace(),
    ));
    rows.push(compared(
        PAIR,
        "p(HH | HH or VV)",
        real(a.probabilities[0]),
        real(values::PAIR_P_HH),
    ));
    rows.push(compared(
        PAIR,
        "p(VV | HH or VV)",
        real(a.probabilities[1]),
        real(values::PAIR_P_VV),
    ));
    rows.push(compared(
        PAIR,
        "coherence C",
        real(a.coherence_c),
        real(values::PAIR_COHERENCE),
    ));
    rows.push(compared(
        PAIR,
        "min-entropy bound",
        real(a.min_entropy_bound),
        real(values::PAIR_MIN_ENTROPY),
    ));

    let reduced = pair.signal_reduced()?;
    let a = audit::audit(&pair, Scheme::SingleHv, None, &AuditOptions::default())?;
    rows.extend(matrix_rows(
        REDUCED,
        "reduced state",
        reduced.matrix(),
        &reference::reduced(),
    ));
    rows.push(compared(
        REDUCED,
        "coherence C",
        real(a.coherence_c),
        real(values::REDUCED_COHERENCE),
    ));
    rows.push(compared(
        REDUCED,
        "min-entropy bound",
        real(a.min_entropy_bound),
        real(values::REDUCED_MIN_ENTROPY),
    ));
    Ok(rows)
}

/// Fixed-width table with three decimals.
pub fn render_table(rows: &[Row], convention: FidelityConvention) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "fidelity convention: {}", convention.as_str());
    let _ = writeln!(out, "tolerance: {}", values::TOLERANCE);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<14} {:<52} {:>14} {:>14} {:>7}  status",
        "section", "quantity", "computed", "reference", "|diff|"
    );
    for r in rows {
        let diff = match r.status {
            Status::Info => "-".to_string(),
            _ => format!("{:.3}", r.difference()),
        };
        let _ = writeln!(
            out,
            "{:<14} {:<52} {:>14} {:>14} {:>7}  {}",
            r.section,
            r.quantity,
            r.computed.fixed(),
            r.reference.fixed(),
            diff,
            r.status.as_str()
        );
    }
    let checked = rows
        .iter()
        .filter(|r| matches!(r.status, Status::Pass | Status::Fail))
        .count();
    let passed = rows.iter().filter(|r| r.status == Status::Pass).count();
    let _ = writeln!(out);
    let _ = writeln!(out, "{passed} of {checked} compared rows within tolerance");
    if rows.iter().any(|r| r.status == Status::Convention) {
        let _ = writeln!(
            out,
            "note: reference fidelities use the root convention Tr sqrt(sqrt(rho) sigma sqrt(rho)); \
             rows marked CONVENTION are shown squared"
        );
    }
    out
}

pub fn render_csv(rows: &[Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "section",
        "quantity",
        "computed",
        "reference",
        "abs_diff",
        "status",
    ])?;
    for r in rows {
        w.write_record([
            r.section.to_string(),
            r.quantity.clone(),
            r.computed.full(),
            r.reference.full(),
            format!("{}", r.difference()),
            r.status.as_str().to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| crate::error::AppError::Unexpected(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct RowJson<'a> {
    section: &'a str,
    quantity: &'a str,
    computed: [f64; 2],
    reference: [f64; 2],
    abs_diff: f64,
    status: &'a str,
}

#[derive(Serialize)]
struct TableJson<'a> {
    convention: &'a str,
    tolerance: f64,
    rows: Vec<RowJson<'a>>,
}

/// Rows as JSON; real values carry a zero imaginary part.
pub fn render_json(rows: &[Row], convention: FidelityConvention) -> Result<String> {
    let pair = |v: Value| match v {
        Value::Real(x) => [x, 0.0],
        Value::Complex(z) => [z.re, z.im],
    };
    crate::format::to_json(&TableJson {
        convention: convention.as_str(),
        tolerance: values::TOLERANCE,
        rows: rows
            .iter()
            .map(|r| RowJson {
                section: r.section,
                quantity: &r.quantity,
                computed: pair(r.computed),
                reference: pair(r.reference),
                abs_diff: r.difference(),
                status: r.status.as_str(),
            })
            .collect(),
    })
}

/// Human-readable audit summary.
pub fn audit_summary(report: &AuditReport, scheme: Scheme) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scheme: {}", scheme.as_str());
    let _ = writeln!(
        out,
        "p(0) = {:.3}, p(1) = {:.3}",
        report.probabilities[0], report.probabilities[1]
    );
    let _ = writeln!(out, "coherence C = {:.3}", report.coherence_c);
    let _ = writeln!(
        out,
        "min-entropy bound = {:.3} bits/measurement",
        report.min_entropy_bound
    );
    let _ = writeln!(
        out,
        "empirical min-entropy = {:.3} bits/bit",
        report.empirical_min_entropy
    );
    if let Some(f) = report.fidelity_to_target {
        let _ = writeln!(out, "fidelity to target = {f:.3}");
    }
    if let Some(s) = report.chsh_s {
        let _ = writeln!(out, "CHSH S = {s:.3}");
    }
    let _ = writeln!(out, "extractable bits = {}", report.extractable_bits);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row<'a>(rows: &'a [Row], section: &str, quantity: &str) -> &'a Row {
        rows.iter()
            .find(|r| r.section == section && r.quantity.starts_with(quantity))
            .unwrap_or_else(|| panic!("no row {section}/{quantity}"))
    }

    #[test]
    fn root_convention_rows() {
        let rows = reproduction_rows(FidelityConvention::Root).unwrap();
        assert_eq!(row(&rows, SINGLE, "fidelity").status, Status::Pass);
        assert_eq!(row(&rows, PAIR, "fidelity").status, Status::Pass);
        assert_eq!(row(&rows, PAIR, "CHSH").status, Status::Info);
        assert_eq!(row(&rows, REDUCED, "coherence").status, Status::Pass);
        assert_eq!(
            rows.iter()
                .filter(|r| r.quantity.starts_with("HH/VV block"))
                .count(),
            4
        );
    }

    #[test]
    fn squared_convention_is_flagged() {
        let rows = reproduction_rows(FidelityConvention::Squared).unwrap();
        let single = row(&rows, SINGLE, "fidelity");
        assert_eq!(single.status, Status::Convention);
        assert_eq!(single.computed.fixed(), "0.949");
        assert_eq!(row(&rows, PAIR, "fidelity").computed.fixed(), "0.817");
        let text = render_table(&rows, FidelityConvention::Squared);
        assert!(text.contains("CONVENTION"));
        assert!(text.contains("note: reference fidelities use the root convention"));
    }

    #[test]
    fn complex_display() {
        assert_eq!(
            Value::Complex(Complex64::new(0.3939, -0.1991)).fixed(),
            "0.394-0.199i"
        );
        assert_eq!(
            Value::Complex(Complex64::new(-0.13, 0.148)).fixed(),
            "-0.130+0.148i"
        );
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let rows = reproduction_rows(FidelityConvention::Root).unwrap();
        let csv = render_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), rows.len() + 1);
    }
}
