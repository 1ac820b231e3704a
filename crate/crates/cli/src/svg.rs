use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qsfrac_core::{EvolutionTrace, Mesh};

const SIZE: f64 = 512.0;
const MARGIN: f64 = 8.0;

/// One SVG per record: displacement as a grayscale fill per triangle (the
/// mean of its corner values), the domain outline, and the crack in red.
pub fn write_frames(mesh: &Mesh, trace: &EvolutionTrace, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let scale = trace.records.iter().map(|r| r.field.max_abs()).fold(0.0, f64::max);
    for r in &trace.records {
        let svg = frame(mesh, r, scale);
        fs::write(dir.join(format!("step_{:04}.svg", r.index)), svg)?;
    }
    Ok(())
}

fn frame(mesh: &Mesh, r: &qsfrac_core::StepRecord, scale: f64) -> String {
    let (x0, x1, y0, y1) = mesh
        .vertices()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |(a, b, c, d), p| {
            (a.min(p[0]), b.max(p[0]), c.min(p[1]), d.max(p[1]))
        });
    let k = (SIZE - 2.0 * MARGIN) / (x1 - x0).max(y1 - y0);
    let w = 2.0 * MARGIN + k * (x1 - x0);
    let h = 2.0 * MARGIN + k * (y1 - y0);
    // y grows downwards in SVG
    let px = |p: [f64; 2]| (MARGIN + k * (p[0] - x0), h - MARGIN - k * (p[1] - y0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(s, "<title>step {} t={}</title>", r.index, r.time);
    let values = r.field.values();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let dofs = r.field.space().triangle_dofs(t);
        let mean = dofs.iter().map(|&d| values[d]).sum::<f64>() / 3.0;
        let level = if scale > 0.0 { 0.5 + 0.5 * mean / scale } else { 0.5 };
        let g = (255.0 * level.clamp(0.0, 1.0)).round() as u8;
        let pts: Vec<String> = tri
            .iter()
            .map(|&v| {
                let (x, y) = px(mesh.vertices()[v]);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="rgb({g},{g},{g})" stroke="rgb({g},{g},{g})" stroke-width="0.3"/>"#,
            pts.join(" ")
        );
    }
    let (ax, ay) = px([x0, y1]);
    let _ = writeln!(
        s,
        r#"<rect x="{ax:.2}" y="{ay:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black" stroke-width="1"/>"#,
        k * (x1 - x0),
        k * (y1 - y0)
    );
    for seg in r.crack.segments(mesh) {
        let (ax, ay) = px(seg[0]);
        let (bx, by) = px(seg[1]);
        let _ =
            writeln!(s, r#"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="red" stroke-width="2"/>"#);
    }
    s.push_str("</svg>\n");
    s
}
