//! Built-in demos: reference values from the literature next to computed
//! ones, cell by cell.

use formalism_core::checks::kraus_deviation;
use formalism_core::formalisms::{
    kraus_dilation, kraus_probability, relative_outcome_probability, KrausMeasurement, ObserverMemory,
    ProbabilityTable,
};
use formalism_core::scenarios::{
    appendix_b_tables, closed_form_relative_table, default_alpha_grid, extended_wigner_friend,
    extended_wigner_friend_recorded, inequivalence_report, run_scenario, wigner_friend, wigner_friend_shared_record,
    AgentConstruction, QueryResult, QueryValue,
};
use formalism_core::tensor::{DensityOperator, LinearMap, SpaceLayout, StateVector, C64};
use formalism_core::Result;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numfmt::{deviation, human, sig, MACHINE_DIGITS};
use crate::report::text_table;
use crate::Output;

pub const DEMOS: [&str; 5] = ["wigner", "extended", "appendix-b", "inequivalence", "kraus-equivalence"];

/// Cells are anchored to this tolerance.
pub const DEMO_TOL: f64 = 1e-12;

/// Tolerance for the randomized Kraus instances.
pub const KRAUS_TOL: f64 = 1e-10;

const KRAUS_INSTANCES: usize = 100;

#[derive(Default)]
struct Sheet {
    out: String,
    checked: usize,
    mismatched: usize,
    informational: usize,
}

impl Sheet {
    fn line(&mut self, s: impl AsRef<str>) {
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }

    fn row(&mut self, label: &str, reference: &str, computed: f64, delta: f64, status: &str) {
        self.line(format!(
            "    {label:<14} reference {reference:<16} computed {:<16} delta {:<8} {status}",
            sig(computed, MACHINE_DIGITS),
            deviation(delta),
        ));
    }

    /// A cell that must match `reference` within `tol`.
    fn cell(&mut self, label: &str, reference: (&str, f64), computed: f64, tol: f64) {
        let delta = (computed - reference.1).abs();
        let ok = delta <= tol;
        self.checked += 1;
        if !ok {
            self.mismatched += 1;
        }
        self.row(label, reference.0, computed, delta, if ok { "ok" } else { "MISMATCH" });
    }

    /// A cell shown for comparison only.
    fn info(&mut self, label: &str, reference: f64, computed: f64) {
        self.informational += 1;
        let delta = (computed - reference).abs();
        let status = if delta <= DEMO_TOL { "agrees" } else { "differs" };
        self.row(label, &sig(reference, MACHINE_DIGITS), computed, delta, status);
    }

    fn table_cells(&mut self, t: &ProbabilityTable, reference: &[(&str, f64)], tol: f64) {
        let cells = cell_labels(t);
        assert_eq!(cells.len(), reference.len(), "reference shape");
        for ((label, value), r) in cells.iter().zip(reference) {
            match value {
                Some(v) => self.cell(label, *r, *v, tol),
                None => {
                    self.checked += 1;
                    self.mismatched += 1;
                    self.line(format!("    {label:<14} reference {:<16} computed undefined MISMATCH", r.0));
                }
            }
        }
    }

    fn finish(mut self) -> Output {
        self.line(format!(
            "{} cells checked, {} mismatched, {} informational",
            self.checked, self.mismatched, self.informational
        ));
        Output {
            stdout: self.out,
            stderr: String::new(),
            code: i32::from(self.mismatched > 0),
        }
    }
}

fn cell_labels(t: &ProbabilityTable) -> Vec<(String, Option<f64>)> {
    let mut out = Vec::new();
    for (i, r) in t.row_labels().iter().enumerate() {
        for (j, c) in t.column_labels().iter().enumerate() {
            let v = t.is_row_defined(i).then(|| t.entries()[i][j]);
            out.push((format!("{r} / {c}"), v));
        }
    }
    out
}

fn by_name<'a>(rs: &'a [QueryResult], name: &str) -> &'a QueryResult {
    rs.iter().find(|r| r.title == name).expect("query present in builder")
}

fn table<'a>(rs: &'a [QueryResult], name: &str) -> &'a ProbabilityTable {
    match &by_name(rs, name).value {
        QueryValue::Table(t) => t,
        _ => panic!("{name} is not a table query"),
    }
}

fn scalar(rs: &[QueryResult], name: &str) -> f64 {
    match by_name(rs, name).value {
        QueryValue::Scalar(v) => v,
        _ => panic!("{name} is not a scalar query"),
    }
}

fn restrict(t: &ProbabilityTable, rows: &[&str], cols: &[&str]) -> Result<ProbabilityTable> {
    t.restrict(rows, cols)
}

fn wigner(sheet: &mut Sheet) -> Result<()> {
    sheet.line("wigner: F measures a spin prepared in (|u> + |d>)/sqrt(2); W measures spin and F's memory in");
    sheet.line("  b1 = a|uU> + b|dD>,  b2 = b|uU> - a|dD>   (a = alpha, b = beta)");
    sheet.line("");
    for (alpha_sq, ref_text) in [(0.25, ("1/4", "3/4")), (0.5, ("1/2", "1/2")), (0.75, ("3/4", "1/4"))] {
        let (a, b) = (f64::sqrt(alpha_sq), f64::sqrt(1.0 - alpha_sq));
        let rs = run_scenario(&wigner_friend(a, b)?)?;
        sheet.line(format!("alpha^2 = {}", human(alpha_sq)));
        sheet.line("  update rule, q(w | f)");
        let col = restrict(table(&rs, "update_rule"), &["u", "d"], &["b1", "b2"])?;
        let (p, q) = ((ref_text.0, alpha_sq), (ref_text.1, 1.0 - alpha_sq));
        sheet.table_cells(&col, &[p, q, q, p], DEMO_TOL);
        let rel = restrict(table(&rs, "relative_state"), &["u", "d"], &["b1", "b2"])?;
        sheet.line("  relative state, q(w | f)");
        if alpha_sq == 0.5 {
            sheet.table_cells(&rel, &[("1", 1.0), ("0", 0.0), ("1", 1.0), ("0", 0.0)], DEMO_TOL);
            let shared = wigner_friend_shared_record(a, b)?;
            let rs2 = run_scenario(&shared)?;
            let with_record = restrict(table(&rs2, "recorded"), &["u", "d"], &["b1", "b2"])?;
            sheet.line("  relative state with the shared record \"50:50\", against the table above");
            let unchanged: Vec<(String, f64)> = rel.flatten().iter().map(|&v| (sig(v, MACHINE_DIGITS), v)).collect();
            let reference: Vec<(&str, f64)> = unchanged.iter().map(|(s, v)| (s.as_str(), *v)).collect();
            sheet.table_cells(&with_record, &reference, DEMO_TOL);
        } else {
            sheet.out.push_str(&text_table(&rel, "    "));
        }
        let cf = closed_form_relative_table(a, b).expect("nonzero parameters");
        let cf_flat = [cf[0][0], cf[0][1], cf[1][0], cf[1][1]];
        sheet.line("  closed-form proposal for the relative table");
        let cells = cell_labels(&rel);
        if alpha_sq == 0.5 {
            for ((label, v), want) in cells.iter().zip(cf_flat) {
                let v = v.expect("defined row");
                sheet.cell(label, (&sig(want, MACHINE_DIGITS), want), v, DEMO_TOL);
            }
        } else {
            for ((label, v), want) in cells.iter().zip(cf_flat) {
                sheet.info(label, want, v.expect("defined row"));
            }
            let sums = [cf[0][0] + cf[0][1], cf[1][0] + cf[1][1]];
            let gap = cells
                .iter()
                .zip(cf_flat)
                .map(|((_, v), w)| (v.unwrap_or(f64::NAN) - w).abs())
                .fold(0.0, f64::max);
            sheet.line(format!(
                "    informational: closed form differs by up to {}; its rows sum to {} and {}",
                human(gap),
                human(sums[0]),
                human(sums[1])
            ));
        }
        sheet.line("");
    }
    Ok(())
}

fn extended(sheet: &mut Sheet) -> Result<()> {
    sheet.line("extended: coin sqrt(1/3)|h> + sqrt(2/3)|t> measured by F1, who prepares S in |d> on h and");
    sheet.line("  (|u> + |d>)/sqrt(2) on t; F2 measures S; A measures coin and F1, W measures S and F2,");
    sheet.line("  both in o = (|00> - |11>)/sqrt(2), f = (|00> + |11>)/sqrt(2)");
    sheet.line("");
    let rs = run_scenario(&extended_wigner_friend()?)?;
    let twelfth = ("1/12", 1.0 / 12.0);
    sheet.line("joint q(a, w), every event relative");
    let joint = restrict(table(&rs, "joint_aw"), &["o", "f"], &["o", "f"])?;
    sheet.table_cells(&joint, &[twelfth, twelfth, twelfth, ("3/4", 0.75)], DEMO_TOL);
    sheet.line("F1's prediction for W with F1 collapsing, q(w | c)");
    let pred = restrict(table(&rs, "f1_prediction"), &["h", "t"], &["o", "f"])?;
    sheet.table_cells(&pred, &[("1/2", 0.5), ("1/2", 0.5), ("0", 0.0), ("1", 1.0)], DEMO_TOL);
    sheet.line("probability that W sees f");
    sheet.cell("w = f", ("5/6", 5.0 / 6.0), scalar(&rs, "w_sees_f"), DEMO_TOL);
    sheet.line("F1's prediction written to a classical register, read back by the relative calculus");
    let rs = run_scenario(&extended_wigner_friend_recorded()?)?;
    let q_class = restrict(table(&rs, "q_class"), &["h", "t"], &["o", "f"])?;
    sheet.table_cells(&q_class, &[("1/2", 0.5), ("1/2", 0.5), ("0", 0.0), ("1", 1.0)], DEMO_TOL);
    sheet.line("");
    Ok(())
}

fn appendix_b(sheet: &mut Sheet) -> Result<()> {
    sheet.line("appendix-b: each agent's table over (a, w) in the extended scenario, cells (o,o) (o,f) (f,o) (f,f)");
    sheet.line("");
    let (t, f, q, h) = (("1/12", 1.0 / 12.0), ("5/12", 5.0 / 12.0), ("1/4", 0.25), ("3/4", 0.75));
    let reference = |agent: &str| match agent {
        "F1" => [t, f, t, f],
        "F2" => [t, t, f, f],
        "A" => [q, q, ("1/20", 0.05), ("9/20", 0.45)],
        _ => [t, t, t, h],
    };
    for agent in appendix_b_tables()? {
        let how = match agent.construction {
            AgentConstruction::RelativeJoint => "joint with every event relative".to_string(),
            AgentConstruction::CollapsedJoint { actor } => format!("joint with {actor} collapsing"),
            AgentConstruction::RenormalizedConditional => "conditionals q(w | a) divided by their total".to_string(),
        };
        sheet.line(format!("{}: {how}", agent.agent));
        sheet.table_cells(&agent.table, &reference(&agent.agent), DEMO_TOL);
    }
    sheet.line("");
    Ok(())
}

fn inequivalence(sheet: &mut Sheet) -> Result<()> {
    sheet.line("inequivalence: update-rule and relative-state q(w | f) in the wigner scenario over alpha^2,");
    sheet.line("  beta^2 = 1 - alpha^2; update-rule cells are checked against (alpha^2, beta^2 | beta^2, alpha^2)");
    sheet.line("");
    sheet.line(format!(
        "{:>7}  {:<39}  {:<39}  {:>9}",
        "alpha^2", "update rule  u/b1 u/b2 d/b1 d/b2", "relative  u/b1 u/b2 d/b1 d/b2", "gap"
    ));
    let report = inequivalence_report(&default_alpha_grid())?;
    let show = |t: &ProbabilityTable| {
        cell_labels(t)
            .iter()
            .map(|(_, v)| v.map_or_else(|| "undef".to_string(), |x| format!("{:>9}", human(x))))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut worst: (f64, f64) = (0.0, 0.0);
    for p in &report {
        let pattern = [p.alpha_sq, 1.0 - p.alpha_sq, 1.0 - p.alpha_sq, p.alpha_sq];
        let cells = p.collapse.flatten();
        let dev = cells.iter().zip(pattern).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let defined = (0..2).all(|i| p.collapse.is_row_defined(i));
        let ok = defined && dev <= DEMO_TOL;
        sheet.checked += 4;
        if !ok {
            sheet.mismatched += 4;
        }
        if p.gap > worst.0 {
            worst = (p.gap, p.alpha_sq);
        }
        sheet.line(format!(
            "{:>7}  {:<39}  {:<39}  {:>9}  {}",
            human(p.alpha_sq),
            show(&p.collapse),
            show(&p.relative),
            human(p.gap),
            if ok { "ok" } else { "MISMATCH" }
        ));
    }
    sheet.line("");
    sheet.line("anchored gaps");
    for (x, reference) in [(0.0, ("0", 0.0)), (0.5, ("1/2", 0.5)), (1.0, ("0", 0.0))] {
        let p = report.iter().find(|p| p.alpha_sq == x).expect("grid point");
        sheet.cell(&format!("alpha^2 = {}", human(x)), reference, p.gap, DEMO_TOL);
    }
    sheet.line(format!(
        "largest gap {} at alpha^2 = {}",
        sig(worst.0, MACHINE_DIGITS),
        human(worst.1)
    ));
    sheet.line("");
    Ok(())
}

fn qubit_operator(rows: [[f64; 2]; 2]) -> Result<LinearMap> {
    let l = SpaceLayout::single("S", 2)?;
    let m = DMatrix::from_fn(2, 2, |i, j| C64::new(rows[i][j], 0.0));
    LinearMap::operator(l, m)
}

fn kraus_equivalence(sheet: &mut Sheet, seed: u64) -> Result<()> {
    sheet.line("kraus-equivalence: a Kraus measurement K_a against its unitary dilation with a projective readout");
    sheet.line("");
    let gamma: f64 = 0.36;
    sheet.line(format!(
        "amplitude damping, gamma = {}, on (|0> + |1>)/sqrt(2)",
        human(gamma)
    ));
    let k = KrausMeasurement::new(vec![
        ("0", qubit_operator([[1.0, 0.0], [0.0, (1.0 - gamma).sqrt()]])?),
        ("1", qubit_operator([[0.0, gamma.sqrt()], [0.0, 0.0]])?),
    ])?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = StateVector::new(SpaceLayout::single("S", 2)?, vec![C64::new(h, 0.0), C64::new(h, 0.0)])?;
    let rho = DensityOperator::from_pure(&plus);
    let mem = ObserverMemory::for_outcomes("O", "O", &k.labels())?;
    let total = kraus_dilation(&k, "X", &mem)?.apply(&rho)?;
    for (a, reference) in [("0", ("1 - gamma/2", 1.0 - gamma / 2.0)), ("1", ("gamma/2", gamma / 2.0))] {
        sheet.cell(&format!("tr K{a} rho"), reference, kraus_probability(&rho, &k, a)?, DEMO_TOL);
        sheet.cell(&format!("pointer {a}"), reference, relative_outcome_probability(&total, &mem, a)?, DEMO_TOL);
    }
    sheet.line("");
    sheet.line(format!(
        "{KRAUS_INSTANCES} random instances, seed {seed} (ChaCha8Rng), dimension 2..4, 1..4 outcomes, mixed states"
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut unitarity, mut probability, mut chain) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..KRAUS_INSTANCES {
        let d = rng.random_range(2..=4);
        let n = rng.random_range(1..=4);
        let dev = kraus_deviation(&mut rng, d, n)?;
        unitarity = unitarity.max(dev.unitarity);
        probability = probability.max(dev.probability);
        chain = chain.max(dev.chain);
    }
    for (label, value) in [
        ("dilation unitarity defect", unitarity),
        ("outcome probability gap", probability),
        ("two-step conditional gap", chain),
    ] {
        let ok = value <= KRAUS_TOL;
        sheet.checked += 1;
        if !ok {
            sheet.mismatched += 1;
        }
        sheet.line(format!(
            "    {label:<26} max {:<8} bound {}  {}",
            deviation(value),
            deviation(KRAUS_TOL),
            if ok { "ok" } else { "MISMATCH" }
        ));
    }
    sheet.line("");
    Ok(())
}

/// Runs the named demo. Unknown or missing names exit 2 with the list of
/// demos.
pub fn cmd_demo(name: Option<&str>, seed: u64) -> Output {
    let Some(name) = name.filter(|n| DEMOS.contains(n)) else {
        let what = name.map_or_else(|| "no demo given".to_string(), |n| format!("unknown demo `{n}`"));
        return Output {
            stdout: String::new(),
            stderr: format!("error: {what}\navailable demos: {}\n", DEMOS.join(", ")),
            code: 2,
        };
    };
    let mut sheet = Sheet::default();
    let result = match name {
        "wigner" => wigner(&mut sheet),
        "extended" => extended(&mut sheet),
        "appendix-b" => appendix_b(&mut sheet),
        "inequivalence" => inequivalence(&mut sheet),
        _ => kraus_equivalence(&mut sheet, seed),
    };
    match result {
        Ok(()) => sheet.finish(),
        Err(e) => Output {
            stdout: sheet.out,
            stderr: format!("error: {e}\n"),
            code: 2,
        },
    }
}
