//! Deterministic text output: CSV tables, wave-function tables and gnuplot stubs.

use std::fmt::Write;

use crate::numerics::MomentumGrid;
use crate::threebody::TensorWavefunction;
use crate::Complex64;

pub const ENERGY_UNITS: &str = "energies in hbar^2/(mu xi0^2); momenta in 1/xi0; eps and P, K scaled by |E0| and q0";

/// Fixed-width scientific notation so that reruns are byte-identical.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.12e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), fmt_f64)
}

fn escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// CSV with a `# units:` comment line followed by the header.
pub struct Table {
    units: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(units: impl Into<String>, header: &[&'static str]) -> Self {
        Self { units: units.into(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# units: {}", self.units).unwrap();
        writeln!(s, "{}", self.header.join(",")).unwrap();
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| escape(c)).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }
}

/// `(P, K, Φ)` table of a three-body state.
pub fn tensor_table(wf: &TensorWavefunction) -> String {
    let mut t =
        Table::new("P = p/q0, K = k/q0, Phi normalized to 1 over dP dK/(2 pi)^2", &["P", "K", "re_phi", "im_phi"]);
    for i in 0..wf.p.len() {
        for k in 0..wf.k.len() {
            let v = wf.at(i, k);
            t.push(vec![fmt_f64(wf.p.nodes[i]), fmt_f64(wf.k.nodes[k]), fmt_f64(v.re), fmt_f64(v.im)]);
        }
    }
    t.render()
}

/// `(p, φ)` table of a two-body state.
pub fn two_body_table(grid: &MomentumGrid, phi: &[Complex64]) -> String {
    let mut t = Table::new("p in 1/xi0, phi normalized to 1 over dp/(2 pi)", &["p", "re_phi", "im_phi"]);
    for (p, v) in grid.nodes.iter().zip(phi) {
        t.push(vec![fmt_f64(*p), fmt_f64(v.re), fmt_f64(v.im)]);
    }
    t.render()
}

/// A gnuplot script plotting columns of one CSV against each other.
pub fn gnuplot_stub(
    title: &str,
    csv: &str,
    x: usize,
    ys: &[(usize, &str)],
    xlabel: &str,
    ylabel: &str,
    log: bool,
) -> String {
    let mut s = String::new();
    writeln!(s, "# gnuplot script for {csv}").unwrap();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set datafile commentschars '#'").unwrap();
    writeln!(s, "set key autotitle columnhead").unwrap();
    writeln!(s, "set title '{title}'").unwrap();
    writeln!(s, "set xlabel '{xlabel}'").unwrap();
    writeln!(s, "set ylabel '{ylabel}'").unwrap();
    if log {
        writeln!(s, "set logscale xy").unwrap();
    }
    let parts: Vec<String> = ys
        .iter()
        .enumerate()
        .map(|(i, (c, name))| {
            let file = if i == 0 { format!("'{csv}'") } else { "''".to_string() };
            let (xe, ye) =
                if log { (format!("(abs(${x}))"), format!("(abs(${c}))")) } else { (format!("{x}"), format!("{c}")) };
            format!("{file} using {xe}:{ye} with linespoints title '{name}'")
        })
        .collect();
    writeln!(s, "plot {}", parts.join(", \\\n     ")).unwrap();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_fixed() {
        assert_eq!(fmt_f64(1.0), "1.000000000000e0");
        assert_eq!(fmt_f64(-2.5e-7), "-2.500000000000e-7");
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new("x in m", &["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.render(), "# units: x in m\na,b\n1,\"x,y\"\n");
    }
}
