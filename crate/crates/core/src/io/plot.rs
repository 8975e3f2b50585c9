//! gnuplot scripts that regenerate figures from the emitted CSV files.

use std::fmt::Write;

/// How to draw one CSV file. Columns are 1-based, as in gnuplot.
#[derive(Clone, Debug, PartialEq)]
pub enum PlotKind {
    /// `y` columns against `x`.
    Lines { x: usize, y: Vec<usize> },
    /// Points at `(x, y)` coloured by `color`, e.g. energies coloured by IPR.
    Scatter { x: usize, y: usize, color: usize },
    /// Long-format `(x, y, value)` map, e.g. density over time and site.
    Map {
        x: usize,
        y: usize,
        value: usize,
        log_y: bool,
    },
}

/// One page per file, written to `<csv stem>.png` next to the script.
pub fn plot_script(files: &[(String, PlotKind)]) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script; run from this directory with `gnuplot plot.gp`\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile commentschars '#'\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str("set palette rgbformulae 33,13,10\n\n");
    for (path, kind) in files {
        let stem = path.trim_end_matches(".csv");
        let _ = writeln!(s, "set output '{stem}.png'");
        let _ = writeln!(s, "set title '{}' noenhanced", stem.rsplit('/').next().unwrap_or(stem));
        match kind {
            PlotKind::Lines { x, y } => {
                let curves: Vec<String> = y
                    .iter()
                    .map(|c| format!("'{path}' skip 1 using {x}:{c} with linespoints title columnhead({c})"))
                    .collect();
                let _ = writeln!(s, "unset logscale\nplot {}", curves.join(", \\\n     "));
            }
            PlotKind::Scatter { x, y, color } => {
                let _ = writeln!(
                    s,
                    "unset logscale\nplot '{path}' skip 1 using {x}:{y}:{color} with points pointtype 7 pointsize 0.4 palette notitle"
                );
            }
            PlotKind::Map { x, y, value, log_y } => {
                let log = if *log_y { "set logscale y" } else { "unset logscale" };
                let _ = writeln!(
                    s,
                    "{log}\nplot '{path}' skip 1 using {x}:{y}:{value} with points pointtype 5 pointsize 1.5 palette notitle"
                );
            }
        }
        s.push('\n');
    }
    s.push_str("unset output\n");
    s
}
