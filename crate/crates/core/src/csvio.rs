//! CSV and key-value writers for every exported artifact. All floats are
//! printed with 17 significant digits so a parse of the output reproduces
//! the original bits; lines end with LF.

use crate::billiard::PeriodicOrbit;
use crate::ensemble::SweepNode;
use crate::linalg::ComplexMatrix;
use crate::spectra::{Classification, SpacingHistogram};
use crate::two_level::PhaseMap;
use num_complex::Complex64;
use std::io::{self, Write};

/// 17-significant-digit float formatting; round-trips f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header `d_eps_over_c,d_gamma_over_c,F,label`, one row per grid node,
/// row-major with the d_eps axis outermost.
pub fn write_phase_map_csv<W: Write>(map: &PhaseMap, w: &mut W) -> io::Result<()> {
    writeln!(w, "d_eps_over_c,d_gamma_over_c,F,label")?;
    for (i, &x) in map.d_eps_over_c.iter().enumerate() {
        for (j, &y) in map.d_gamma_over_c.iter().enumerate() {
            let label = if map.delocalized(i, j) {
                "delocalized"
            } else {
                "localized"
            };
            writeln!(
                w,
                "{},{},{},{}",
                fmt_float(x),
                fmt_float(y),
                fmt_float(map.value(i, j)),
                label
            )?;
        }
    }
    Ok(())
}

/// Header `d_eps_over_c,d_gamma_over_c,label`, same ordering as the full map.
pub fn write_phase_map_labels_csv<W: Write>(map: &PhaseMap, w: &mut W) -> io::Result<()> {
    writeln!(w, "d_eps_over_c,d_gamma_over_c,label")?;
    for (i, &x) in map.d_eps_over_c.iter().enumerate() {
        for (j, &y) in map.d_gamma_over_c.iter().enumerate() {
            let label = if map.delocalized(i, j) {
                "delocalized"
            } else {
                "localized"
            };
            writeln!(w, "{},{},{}", fmt_float(x), fmt_float(y), label)?;
        }
    }
    Ok(())
}

/// Header `c,gamma,N,realizations,aipr_mean,aipr_stddev`.
pub fn write_sweep_csv<W: Write>(
    nodes: &[SweepNode],
    n: usize,
    realizations: usize,
    w: &mut W,
) -> io::Result<()> {
    writeln!(w, "c,gamma,N,realizations,aipr_mean,aipr_stddev")?;
    for node in nodes {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_float(node.c),
            fmt_float(node.gamma),
            n,
            realizations,
            fmt_float(node.aipr_mean),
            fmt_float(node.aipr_stddev)
        )?;
    }
    Ok(())
}

/// Header `bin_left,bin_right,density`.
pub fn write_histogram_csv<W: Write>(hist: &SpacingHistogram, w: &mut W) -> io::Result<()> {
    writeln!(w, "bin_left,bin_right,density")?;
    for (i, &d) in hist.densities.iter().enumerate() {
        writeln!(
            w,
            "{},{},{}",
            fmt_float(hist.bin_edges[i]),
            fmt_float(hist.bin_edges[i + 1]),
            fmt_float(d)
        )?;
    }
    Ok(())
}

/// Key-value report: label, ks_wigner, ks_poisson, samples.
pub fn write_classification<W: Write>(class: &Classification, w: &mut W) -> io::Result<()> {
    writeln!(w, "label={}", class.label)?;
    writeln!(w, "ks_wigner={}", fmt_float(class.ks_wigner))?;
    writeln!(w, "ks_poisson={}", fmt_float(class.ks_poisson))?;
    writeln!(w, "samples={}", class.samples)?;
    Ok(())
}

/// Header `re,im`, one eigenvalue per row.
pub fn write_eigenvalues_csv<W: Write>(values: &[Complex64], w: &mut W) -> io::Result<()> {
    writeln!(w, "re,im")?;
    for z in values {
        writeln!(w, "{},{}", fmt_float(z.re), fmt_float(z.im))?;
    }
    Ok(())
}

/// Header `name,bounces,length,dk_star,reflection_residual`.
pub fn write_orbit_table_csv<W: Write>(orbits: &[PeriodicOrbit], w: &mut W) -> io::Result<()> {
    writeln!(w, "name,bounces,length,dk_star,reflection_residual")?;
    for o in orbits {
        writeln!(
            w,
            "{},{},{},{},{}",
            o.name.as_deref().unwrap_or(""),
            o.points.len(),
            fmt_float(o.length),
            fmt_float(o.dk_star),
            fmt_float(o.reflection_residual)
        )?;
    }
    Ok(())
}

/// Header `s,x,y`, one bounce per row.
pub fn write_orbit_geometry_csv<W: Write>(orbit: &PeriodicOrbit, w: &mut W) -> io::Result<()> {
    writeln!(w, "s,x,y")?;
    for p in &orbit.points {
        writeln!(
            w,
            "{},{},{}",
            fmt_float(p.s),
            fmt_float(p.x),
            fmt_float(p.y)
        )?;
    }
    Ok(())
}

/// Debug dump: one matrix row per line, entries `re+imj` separated by commas.
pub fn write_matrix_dump<W: Write>(m: &ComplexMatrix, w: &mut W) -> io::Result<()> {
    let n = m.dim();
    for i in 0..n {
        let mut line = String::new();
        for j in 0..n {
            if j > 0 {
                line.push(',');
            }
            let z = m.get(i, j);
            let (sign, im) = if z.im.is_sign_negative() {
                ('-', -z.im)
            } else {
                ('+', z.im)
            };
            line.push_str(&fmt_float(z.re));
            line.push(sign);
            line.push_str(&fmt_float(im));
            line.push('j');
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
