//! CSV tables for plotting. Every table has a header row; floats use the
//! same 12 significant digits as the JSON reports.

use std::path::Path;

use damped_chain::bounds::{BoundReport, Theorem};
use damped_chain::report::{
    round_sig, CouplingSection, ErgodicityRow, ExpansionSection, StationarySection,
    SIGNIFICANT_DIGITS,
};
use damped_chain::stationary::Method;
use damped_chain::triangular::TriangularSweep;

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    round_sig(x, SIGNIFICANT_DIGITS).to_string()
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// Columns: class, n, q_n, delta_n. The class is empty for a single-class chain.
pub fn ergodicity(rows: &[ErgodicityRow]) -> Table {
    let mut t = Table::new(&["class", "n", "q_n", "delta_n"]);
    for r in rows {
        t.rows.push(vec![
            opt(r.class),
            r.n.to_string(),
            num(r.q_n),
            num(r.delta_n),
        ]);
    }
    t
}

/// Columns: epsilon, state, direct, power, series.
pub fn stationary(sections: &[StationarySection]) -> Table {
    let mut t = Table::new(&["epsilon", "state", "direct", "power", "series"]);
    for s in sections {
        let find = |m: Method| s.solutions.iter().find(|e| e.method == m);
        let m = s.solutions.first().map_or(0, |e| e.pi.len());
        for j in 0..m {
            let cell = |meth| find(meth).map_or_else(String::new, |e| num(e.pi[j]));
            t.rows.push(vec![
                num(s.epsilon),
                (j + 1).to_string(),
                cell(Method::Direct),
                cell(Method::Power),
                cell(Method::Series),
            ]);
        }
    }
    t
}

/// Columns: state, base, c1 … ck.
pub fn expansion(sec: &ExpansionSection) -> Table {
    let mut header = vec!["state".to_string(), "base".to_string()];
    header.extend((1..=sec.order).map(|k| format!("c{k}")));
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for r in &sec.rows {
        let mut row = vec![r.state.to_string(), num(r.base)];
        row.extend(r.coefficients.iter().map(|&c| num(c)));
        t.rows.push(row);
    }
    t
}

fn theorem_number(t: Theorem) -> &'static str {
    match t {
        Theorem::T1 => "1",
        Theorem::T2 => "2",
        Theorem::T5 => "5",
        Theorem::T6 => "6",
        Theorem::T7 => "7",
    }
}

/// Columns: theorem, n, state, bound, actual.
pub fn bounds(reports: &[BoundReport]) -> Table {
    let mut t = Table::new(&["theorem", "n", "state", "bound", "actual"]);
    for r in reports {
        for row in &r.rows {
            t.rows.push(vec![
                theorem_number(r.theorem).to_string(),
                opt(row.n),
                opt(row.state),
                num(row.bound),
                num(row.actual),
            ]);
        }
    }
    t
}

/// Columns: step, n, tail, std_error, bound.
pub fn coupling(sec: &CouplingSection) -> Table {
    let mut t = Table::new(&["step", "n", "tail", "std_error", "bound"]);
    for r in &sec.rows {
        t.rows.push(vec![
            r.step.to_string(),
            r.n.to_string(),
            num(r.tail),
            num(r.std_error),
            num(r.bound),
        ]);
    }
    t
}

/// Columns: n, t, state, trajectory, mixture, relative_error, bound.
pub fn triangular(sweep: &TriangularSweep) -> Table {
    let mut t = Table::new(&[
        "n",
        "t",
        "state",
        "trajectory",
        "mixture",
        "relative_error",
        "bound",
    ]);
    for r in &sweep.rows {
        for k in 0..r.trajectory.len() {
            t.rows.push(vec![
                r.n.to_string(),
                num(r.t),
                (k + 1).to_string(),
                num(r.trajectory[k]),
                num(r.mixture[k]),
                num(r.relative_error[k]),
                r.bound.as_ref().map_or_else(String::new, |b| num(b[k])),
            ]);
        }
    }
    t
}
