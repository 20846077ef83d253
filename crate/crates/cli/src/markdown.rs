use spincorr::harness::{ExperimentOutcome, SearchOutcome, Summary};
use spincorr::io::MeasureJson;
use spincorr::rational::{format_rational, RationalRepr};
use spincorr::three_site::{System, ThreeSiteVerdicts};
use spincorr::{PropertyReport, Verdict};

fn mark(ok: bool) -> &'static str {
    if ok {
        "✓"
    } else {
        "✗"
    }
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "✓ holds",
        Verdict::Fails => "✗ fails",
        Verdict::SearchExhausted => "? search exhausted",
    }
}

fn witness(r: &PropertyReport) -> String {
    r.witness.as_ref().map(|w| format!("`{}`", serde_json::to_string(w).unwrap_or_default())).unwrap_or_default()
}

fn margin(r: &PropertyReport) -> String {
    r.margin.as_ref().map(|m| serde_json::to_string(m).unwrap_or_default().trim_matches('"').to_string()).unwrap_or_default()
}

pub fn properties(title: &str, reports: &[PropertyReport], expected: &[(String, bool)]) -> String {
    let mut s = format!("## {title}\n\n| property | verdict | margin | witness |\n|---|---|---|---|\n");
    for r in reports {
        s += &format!("| {} | {} | {} | {} |\n", r.property, verdict(r.verdict), margin(r), witness(r));
    }
    s += &expectations(expected);
    s
}

fn expectations(rows: &[(String, bool)]) -> String {
    if rows.is_empty() {
        return String::new();
    }
    let mut s = String::from("\nExpected:\n\n");
    for (p, ok) in rows {
        s += &format!("- {p}: {}\n", mark(*ok));
    }
    s
}

fn weight(r: &RationalRepr) -> String {
    match r {
        RationalRepr::Text(t) => t.clone(),
        RationalRepr::Number(n) => n.to_string(),
    }
}

pub fn evolution(n: usize, rows: &[(f64, &MeasureJson)]) -> String {
    let mut s = String::from("## Evolution\n\n| t |");
    for c in 0..1usize << n {
        s += &format!(" {} |", (0..n).map(|x| if c >> x & 1 == 1 { '1' } else { '0' }).collect::<String>());
    }
    s += "\n|---|";
    s += &"---|".repeat(1 << n);
    s.push('\n');
    for (t, m) in rows {
        s += &format!("| {t} |");
        for w in &m.weights {
            s += &format!(" {} |", weight(w));
        }
        s.push('\n');
    }
    s
}

pub fn three_site(v: &ThreeSiteVerdicts, expected: &[(String, bool)]) -> String {
    let mut s = format!(
        "## Three-site verdicts\n\n| lattice | dca | downward-fkg | associated |\n|---|---|---|---|\n| {} | {} | {} | {} |\n\n",
        mark(v.lattice),
        mark(v.dca),
        mark(v.downward_fkg),
        mark(v.associated)
    );
    s += "| system | holds | slacks |\n|---|---|---|\n";
    for sys in System::ALL {
        let m = v.system(sys);
        let slacks: Vec<String> =
            m.slacks.iter().map(|x| serde_json::to_string(x).unwrap_or_default().trim_matches('"').to_string()).collect();
        s += &format!("| {} | {} | {} |\n", sys.name(), mark(m.holds), slacks.join(", "));
    }
    s += &expectations(expected);
    s
}

pub fn experiment(o: &ExperimentOutcome) -> String {
    let mut s = format!("## Preservation of {}\n\nHypotheses:\n\n", o.property);
    for h in &o.hypotheses {
        s += &format!("- {}: {}\n", h.property, verdict(h.verdict));
    }
    s += &format!(
        "\nInitial measures: {} (skipped {})\n\n| measure | t | verdict | margin |\n|---|---|---|---|\n",
        o.initial_measures.len(),
        o.skipped.len()
    );
    for c in &o.cells {
        s += &format!("| {} | {} | {} | {} |\n", c.measure, c.t, verdict(c.report.verdict), margin(&c.report));
    }
    s += match &o.summary {
        Summary::AllHold => "\nNo violations.\n".to_string(),
        Summary::Violation { t, inconsistent, .. } => {
            format!("\nViolation at t = {t}{}.\n", if *inconsistent { " (hypotheses hold)" } else { "" })
        }
    }
    .as_str();
    s
}

pub fn search(o: &SearchOutcome) -> String {
    let mut s = format!(
        "## Search\n\nVerdict: {}\n\nDerivatives evaluated: {}, evolutions: {}\n",
        verdict(o.verdict),
        o.derivatives_evaluated,
        o.evolutions_evaluated
    );
    if let Some(c) = &o.certificate {
        s += &format!(
            "\nDerivative at t = 0: {} (marginals {}, sites {} and {}, zeros {:?})\n",
            format_rational(&c.derivative),
            c.marginals.join(", "),
            c.x,
            c.y,
            c.zeros
        );
    }
    if let Some(v) = &o.violation {
        s += &format!("\nViolation at t = {}: margin {} {}\n", v.t, margin(&v.report), witness(&v.report));
    }
    s
}

pub fn fixtures(rows: &[(String, String)]) -> String {
    let mut s = String::from("| fixture | kind |\n|---|---|\n");
    for (n, k) in rows {
        s += &format!("| {n} | {k} |\n");
    }
    s
}
