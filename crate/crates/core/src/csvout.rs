//! CSV serialization of analysis products.
//!
//! All floating-point values are printed with 6 significant digits
//! (`d.dddddEe` scientific notation), which round-trips back through
//! `f64::from_str` to within 1e-5 relative. Times are nanoseconds.

use std::io::{self, Write};

use crate::analysis::{CoincidenceHistogram, HistogramKind, RatioSurface, RidgePoint};

/// Format a float with 6 significant digits.
pub fn fmt_g6(x: f64) -> String {
    format!("{x:.5e}")
}

/// 2-D histogram in long format. Auto-correlation histograms only carry
/// diagonal content, so only diagonal bins are emitted for them.
pub fn write_histogram_csv<W: Write>(w: &mut W, hist: &CoincidenceHistogram) -> io::Result<()> {
    writeln!(w, "t1_ns,t2_ns,probability,sigma")?;
    let diagonal_only =
        matches!(hist.kind, HistogramKind::Auto1 | HistogramKind::Auto2);
    for i in 0..hist.n1() {
        let t1 = hist.binning[0].label(i);
        if diagonal_only {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_g6(t1),
                fmt_g6(hist.binning[1].label(i)),
                fmt_g6(hist.probability(i, i)),
                fmt_g6(hist.sigma(i, i)),
            )?;
            continue;
        }
        for j in 0..hist.n2() {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_g6(t1),
                fmt_g6(hist.binning[1].label(j)),
                fmt_g6(hist.probability(i, j)),
                fmt_g6(hist.sigma(i, j)),
            )?;
        }
    }
    Ok(())
}

/// R surface in long format; masked bins carry `defined=false` and zeros.
pub fn write_ratio_csv<W: Write>(w: &mut W, surface: &RatioSurface) -> io::Result<()> {
    writeln!(w, "t1_ns,t2_ns,R,sigma_R,defined")?;
    let n2 = surface.n2();
    for i in 0..surface.n1() {
        let t1 = surface.binning[0].label(i);
        for j in 0..n2 {
            let idx = i * n2 + j;
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_g6(t1),
                fmt_g6(surface.binning[1].label(j)),
                fmt_g6(surface.r[idx]),
                fmt_g6(surface.sigma_r[idx]),
                surface.defined[idx],
            )?;
        }
    }
    Ok(())
}

/// g₁,₂ rows, one per read-pulse delay.
pub fn write_g12_csv<W: Write>(w: &mut W, rows: &[(f64, f64, f64)]) -> io::Result<()> {
    writeln!(w, "delta_t_ns,g12,sigma")?;
    for &(delta_t, g12, sigma) in rows {
        writeln!(w, "{},{},{}", fmt_g6(delta_t), fmt_g6(g12), fmt_g6(sigma))?;
    }
    Ok(())
}

/// Ridge profile: probability vs photon time difference.
pub fn write_ridge_csv<W: Write>(w: &mut W, ridge: &[RidgePoint]) -> io::Result<()> {
    writeln!(w, "dt_ns,probability,sigma")?;
    for point in ridge {
        writeln!(
            w,
            "{},{},{}",
            fmt_g6(point.dt_ns),
            fmt_g6(point.probability),
            fmt_g6(point.sigma),
        )?;
    }
    Ok(())
}

/// Model prediction curve, one row per delay.
pub fn write_predict_csv<W: Write>(w: &mut W, rows: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "delta_t_ns,g12_pred")?;
    for &(delta_t, g12) in rows {
        writeln!(w, "{},{}", fmt_g6(delta_t), fmt_g6(g12))?;
    }
    Ok(())
}
