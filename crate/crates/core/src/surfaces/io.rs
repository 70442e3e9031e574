//! CSV export of surface geometry.

use std::io::Write;

use super::SurfaceGeometry;
use crate::error::Result;
use crate::fields::io::write_csv;

/// One row per surface node: base coordinates, height, θ, H, Q, |χ⁰|², then `extra`.
pub fn write_geometry_csv<W: Write>(
    out: W,
    geom: &SurfaceGeometry,
    extra: &[(&str, &[f64])],
) -> Result<()> {
    let height = geom.field(|p| p.height);
    let theta = geom.field(|p| p.theta);
    let mean = geom.field(|p| p.mean);
    let q = geom.field(|p| p.q);
    let chi0 = geom.field(|p| p.chi0_norm2);
    let mut cols: Vec<(&str, &[f64])> = vec![
        ("height", &height),
        ("theta", &theta),
        ("H", &mean),
        ("Q", &q),
        ("chi0_norm2", &chi0),
    ];
    cols.extend_from_slice(extra);
    write_csv(out, &geom.base, &cols)
}
