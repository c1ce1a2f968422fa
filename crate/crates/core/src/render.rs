//! SVG galleries of (input, image) path pairs.
//!
//! All coordinates are integers: time `t` and height `v` of a panel whose
//! origin pixel is `(x0, y0)` are drawn at `(x0 + t * cell_width,
//! y0 - v * cell_height)`. Each panel records its origin in `data-x0` and
//! `data-y0`, so [`extract_panels`] can read the paths back exactly.

use std::fmt::Write as _;

use regex::Regex;

use crate::bijections::Bijection;
use crate::error::{Error, Result};
use crate::path::Path;
use crate::sets::enumerate;

const MARGIN: i64 = 16;
const CAPTION: i64 = 18;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderSpec {
    /// Pixels per time step.
    pub cell_width: u32,
    /// Pixels per unit of height.
    pub cell_height: u32,
    pub columns: usize,
    pub original_color: String,
    pub image_color: String,
    pub show_grid: bool,
    pub show_axis: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            cell_width: 24,
            cell_height: 24,
            columns: 2,
            original_color: "blue".into(),
            image_color: "red".into(),
            show_grid: true,
            show_axis: true,
        }
    }
}

impl RenderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.cell_width == 0 || self.cell_height == 0 || self.columns == 0 {
            return Err(Error::Syntax("render dimensions must be positive".into()));
        }
        Ok(())
    }
}

/// The two polylines read back from one panel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelData {
    pub original: Vec<i32>,
    pub image: Vec<i32>,
}

struct Layout<'a> {
    spec: &'a RenderSpec,
    steps: usize,
    low: i32,
    high: i32,
}

impl Layout<'_> {
    fn panel_width(&self) -> i64 {
        self.steps as i64 * i64::from(self.spec.cell_width) + 2 * MARGIN
    }

    fn panel_height(&self) -> i64 {
        i64::from(self.high - self.low) * i64::from(self.spec.cell_height) + 2 * MARGIN + CAPTION
    }

    fn write_panel(&self, out: &mut String, index: usize, left: i64, top: i64, p: &Path, q: &Path) {
        let spec = self.spec;
        let (cw, ch) = (i64::from(spec.cell_width), i64::from(spec.cell_height));
        let x0 = left + MARGIN;
        let y0 = top + CAPTION + MARGIN + i64::from(self.high) * ch;
        let x_end = x0 + self.steps as i64 * cw;
        let y_of = |v: i32| y0 - i64::from(v) * ch;

        let _ = writeln!(out, r#"<g class="panel" data-index="{index}" data-x0="{x0}" data-y0="{y0}">"#);
        let _ = writeln!(
            out,
            r#"<text x="{x0}" y="{}" font-family="monospace" font-size="11">{p} &#8614; {q}</text>"#,
            top + CAPTION - 4
        );
        if spec.show_grid {
            for t in 0..=self.steps as i64 {
                let x = x0 + t * cw;
                let _ = writeln!(
                    out,
                    r##"<line class="grid" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#dddddd" stroke-width="1"/>"##,
                    y_of(self.high),
                    y_of(self.low)
                );
            }
            for v in self.low..=self.high {
                let y = y_of(v);
                let _ = writeln!(
                    out,
                    r##"<line class="grid" x1="{x0}" y1="{y}" x2="{x_end}" y2="{y}" stroke="#dddddd" stroke-width="1"/>"##
                );
            }
        }
        if spec.show_axis {
            let _ = writeln!(
                out,
                r##"<line class="axis" x1="{x0}" y1="{y0}" x2="{x_end}" y2="{y0}" stroke="#444444" stroke-width="1"/>"##
            );
        }
        for (class, color, path) in [("original", &spec.original_color, p), ("image", &spec.image_color, q)] {
            let points: Vec<String> = path
                .positions()
                .iter()
                .enumerate()
                .map(|(t, &v)| format!("{},{}", x0 + t as i64 * cw, y_of(v)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline class="{class}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
                points.join(" "),
                escape(color)
            );
        }
        out.push_str("</g>\n");
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('"', "&quot;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn document(spec: &RenderSpec, pairs: &[(Path, Path)]) -> String {
    let steps = pairs[0].0.step_count();
    let low = pairs
        .iter()
        .flat_map(|(p, q)| [p.min_height(), q.min_height()])
        .min()
        .unwrap_or(0)
        .min(0);
    let high = pairs
        .iter()
        .flat_map(|(p, q)| [p.max_height(), q.max_height()])
        .max()
        .unwrap_or(0)
        .max(0);
    let layout = Layout { spec, steps, low, high };
    let columns = spec.columns.min(pairs.len()).max(1);
    let rows = pairs.len().div_ceil(columns);
    let (pw, ph) = (layout.panel_width(), layout.panel_height());
    let width = pw * columns as i64;
    let height = ph * rows as i64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" data-cell-width="{}" data-cell-height="{}" data-panels="{}">"#,
        spec.cell_width,
        spec.cell_height,
        pairs.len()
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    for (index, (p, q)) in pairs.iter().enumerate() {
        let left = (index % columns) as i64 * pw;
        let top = (index / columns) as i64 * ph;
        layout.write_panel(&mut out, index, left, top, p, q);
    }
    out.push_str("</svg>\n");
    out
}

/// A single panel with `p` drawn in the original color and `q` in the image
/// color.
pub fn render_pair(p: &Path, q: &Path, spec: &RenderSpec) -> Result<String> {
    spec.validate()?;
    if p.step_count() != q.step_count() {
        return Err(Error::LengthMismatch {
            left: p.positions().len(),
            right: q.positions().len(),
        });
    }
    Ok(document(spec, &[(p.clone(), q.clone())]))
}

/// One panel per member of the map's domain at size `n`, in enumeration
/// order.
pub fn render_gallery(n: usize, bijection: Bijection, spec: &RenderSpec, limit: usize) -> Result<String> {
    spec.validate()?;
    if n < bijection.min_n() {
        return Err(Error::NTooSmall { map: bijection.name(), n });
    }
    let pairs = enumerate(n, bijection.domain(), limit)?
        .map(|p| bijection.apply(&p).map(|q| (p, q)))
        .collect::<Result<Vec<_>>>()?;
    if pairs.is_empty() {
        return Err(Error::EmptyFamily {
            set: bijection.domain().to_string(),
            n,
        });
    }
    Ok(document(spec, &pairs))
}

/// Reads every panel's polylines back into path heights.
pub fn extract_panels(svg: &str) -> Result<Vec<PanelData>> {
    let bad = |msg: &str| Error::Syntax(format!("svg: {msg}"));
    let root = Regex::new(r#"data-cell-width="(\d+)" data-cell-height="(\d+)""#).expect("static regex");
    let panel = Regex::new(r#"(?s)<g class="panel" data-index="\d+" data-x0="(-?\d+)" data-y0="(-?\d+)">(.*?)</g>"#)
        .expect("static regex");
    let line = Regex::new(r#"<polyline class="(original|image)" points="([^"]*)""#).expect("static regex");

    let caps = root.captures(svg).ok_or_else(|| bad("missing cell size"))?;
    let cw: i64 = caps[1].parse().map_err(|_| bad("cell width"))?;
    let ch: i64 = caps[2].parse().map_err(|_| bad("cell height"))?;
    if cw == 0 || ch == 0 {
        return Err(bad("zero cell size"));
    }

    let mut panels = Vec::new();
    for caps in panel.captures_iter(svg) {
        let x0: i64 = caps[1].parse().map_err(|_| bad("x0"))?;
        let y0: i64 = caps[2].parse().map_err(|_| bad("y0"))?;
        let mut original = None;
        let mut image = None;
        for l in line.captures_iter(&caps[3]) {
            let mut heights = Vec::new();
            for (t, pair) in l[2].split_whitespace().enumerate() {
                let (x, y) = pair.split_once(',').ok_or_else(|| bad("point"))?;
                let x: i64 = x.parse().map_err(|_| bad("x"))?;
                let y: i64 = y.parse().map_err(|_| bad("y"))?;
                if x - x0 != t as i64 * cw || (y0 - y) % ch != 0 {
                    return Err(bad("point off the lattice"));
                }
                heights.push(((y0 - y) / ch) as i32);
            }
            match &l[1] {
                "original" => original = Some(heights),
                _ => image = Some(heights),
            }
        }
        panels.push(PanelData {
            original: original.ok_or_else(|| bad("panel without original polyline"))?,
            image: image.ok_or_else(|| bad("panel without image polyline"))?,
        });
    }
    Ok(panels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{count_formula, SetId};

    fn p(s: &str) -> Path {
        s.parse().unwrap()
    }

    #[test]
    fn pair_has_two_polylines() {
        let svg = render_pair(&p("(0,1,0)"), &p("(0,1,2)"), &RenderSpec::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        let panels = extract_panels(&svg).unwrap();
        assert_eq!(panels, vec![PanelData { original: vec![0, 1, 0], image: vec![0, 1, 2] }]);
        for l in svg.lines().filter(|l| l.starts_with("<polyline")) {
            let points = l.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
            assert_eq!(points.split_whitespace().count(), 3);
        }
    }

    #[test]
    fn pair_colors_and_extremes() {
        let svg = render_pair(&p("(0,1,2,3,2,1,0)"), &p("(0,1,2,3,4,5,6)"), &RenderSpec::default()).unwrap();
        assert!(svg.contains(r#"class="original""#) && svg.contains(r#"stroke="blue""#));
        assert!(svg.contains(r#"class="image""#) && svg.contains(r#"stroke="red""#));
        let panel = &extract_panels(&svg).unwrap()[0];
        assert_eq!(panel.original.iter().max(), Some(&3));
        assert_eq!(panel.image.last(), Some(&6));
    }

    #[test]
    fn mismatched_lengths() {
        assert_eq!(
            render_pair(&p("(0,1,0)"), &p("(0,1,2,1,0)"), &RenderSpec::default()),
            Err(Error::LengthMismatch { left: 3, right: 5 })
        );
    }

    #[test]
    fn gallery_panel_counts() {
        let spec = RenderSpec::default();
        for (n, map, expected) in [(3, Bijection::Phi1, 10), (4, Bijection::Phi2, 5), (1, Bijection::Phi1, 1)] {
            let svg = render_gallery(n, map, &spec, 12).unwrap();
            let panels = extract_panels(&svg).unwrap();
            assert_eq!(panels.len(), expected);
            assert_eq!(count_formula(n, map.domain()).0, panels.len().into());
            for panel in panels {
                let input = Path::validate(&panel.original.iter().map(|&v| v.into()).collect::<Vec<i64>>()).unwrap();
                assert_eq!(map.apply(&input).unwrap().positions(), &panel.image[..]);
            }
        }
    }

    #[test]
    fn gallery_is_deterministic_and_respects_layout() {
        let spec = RenderSpec {
            cell_width: 10,
            cell_height: 7,
            columns: 3,
            show_grid: false,
            show_axis: false,
            ..RenderSpec::default()
        };
        let a = render_gallery(3, Bijection::Phi1Full, &spec, 12).unwrap();
        let b = render_gallery(3, Bijection::Phi1Full, &spec, 12).unwrap();
        assert_eq!(a, b);
        assert!(!a.contains(r#"class="grid""#) && !a.contains(r#"class="axis""#));
        assert_eq!(extract_panels(&a).unwrap().len(), 20);
        assert!(a.contains(r#"data-cell-width="10" data-cell-height="7""#));
    }

    #[test]
    fn gallery_errors() {
        let spec = RenderSpec::default();
        assert!(matches!(render_gallery(13, Bijection::Phi1, &spec, 12), Err(Error::LimitExceeded { .. })));
        assert!(matches!(render_gallery(1, Bijection::Phi2, &spec, 12), Err(Error::NTooSmall { .. })));
        assert!(matches!(render_gallery(1, Bijection::Psi2, &spec, 12), Err(Error::NTooSmall { .. })));
        let zero = RenderSpec { columns: 0, ..RenderSpec::default() };
        assert!(render_gallery(2, Bijection::Phi1, &zero, 12).is_err());
        assert!(extract_panels("<svg></svg>").is_err());
        let odd = RenderSpec { image_color: "x\"><script>".into(), ..RenderSpec::default() };
        let svg = render_pair(&p("(0,1,0)"), &p("(0,1,2)"), &odd).unwrap();
        assert!(!svg.contains("<script>"));
    }

    #[test]
    fn sets_with_negative_values_round_trip() {
        let svg = render_gallery(2, Bijection::Psi1Full, &RenderSpec::default(), 12).unwrap();
        let panels = extract_panels(&svg).unwrap();
        assert_eq!(count_formula(2, SetId::B).0, panels.len().into());
        assert!(panels.iter().any(|pd| pd.original.contains(&-4)));
    }
}
