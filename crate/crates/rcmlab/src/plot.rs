//! Scatter plots of spectra in the complex plane.

use std::fmt::Write as _;
use std::path::Path;

use rcm_core::Complex64;

use crate::error::{LabError, LabResult};

/// Half-width of the square viewport centred at the origin.
pub const VIEW_HALF_WIDTH: f64 = 1.6;
pub const MARKER_RADIUS: f64 = 0.008;

/// SVG 1.1 document with one marker per eigenvalue and the dashed unit
/// circle. The imaginary axis points up.
pub fn spectrum_svg(eigenvalues: &[Complex64]) -> LabResult<String> {
    if eigenvalues.is_empty() {
        return Err(LabError::Config("cannot plot an empty spectrum".into()));
    }
    let h = VIEW_HALF_WIDTH;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    s.push_str("<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" height=\"640\" viewBox=\"{} {} {} {}\" preserveAspectRatio=\"xMidYMid meet\">",
        -h,
        -h,
        2.0 * h,
        2.0 * h
    );
    let _ = writeln!(s, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"white\"/>", -h, -h, 2.0 * h, 2.0 * h);
    let _ = writeln!(
        s,
        "<g id=\"axes\" stroke=\"#bbbbbb\" stroke-width=\"0.004\"><line x1=\"{}\" y1=\"0\" x2=\"{h}\" y2=\"0\"/><line x1=\"0\" y1=\"{}\" x2=\"0\" y2=\"{h}\"/></g>",
        -h, -h
    );
    s.push_str("<g id=\"eigenvalues\" fill=\"#1f3b73\" fill-opacity=\"0.8\">\n");
    for z in eigenvalues {
        // y grows downwards in SVG
        let _ = writeln!(s, "<circle class=\"eig\" cx=\"{:.6}\" cy=\"{:.6}\" r=\"{MARKER_RADIUS}\"/>", z.re, -z.im + 0.0);
    }
    s.push_str("</g>\n");
    s.push_str(
        "<circle id=\"unit-circle\" cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"red\" stroke-width=\"0.008\" stroke-dasharray=\"0.04 0.025\"/>\n",
    );
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn plot_spectrum(eigenvalues: &[Complex64], out_path: &Path) -> LabResult<()> {
    let svg = spectrum_svg(eigenvalues)?;
    std::fs::write(out_path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_spectrum_rejected() {
        assert!(spectrum_svg(&[]).is_err());
    }

    #[test]
    fn imaginary_axis_flipped() {
        let svg = spectrum_svg(&[Complex64::new(0.25, 0.5)]).unwrap();
        assert!(svg.contains("cx=\"0.250000\" cy=\"-0.500000\""));
    }
}
