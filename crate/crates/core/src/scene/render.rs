use std::collections::BTreeMap;
use std::fmt::Write;

use super::{PrimKind, Primitive, Scene};
use crate::term::Identity;

/// Cell size of the text projection, in pixels.
const CELL_W: f64 = 7.0;
const CELL_H: f64 = 14.0;
const HOLE_FILL: &str = "#1f6fd6";

fn num(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        return "0".into();
    }
    let s = format!("{r:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn id_attr(name: &str, id: Option<&Identity>) -> String {
    id.map(|id| format!(" {name}=\"{}\"", escape(&id.to_string()))).unwrap_or_default()
}

fn data_attrs(p: &Primitive) -> String {
    let mut s = id_attr("data-id", p.concrete.as_ref());
    if p.abstract_id.is_some() && p.abstract_id != p.concrete {
        s += &id_attr("data-abstract", p.abstract_id.as_ref());
    }
    s
}

/// Renders an SVG 1.1 document. Output is byte-stable for equal scenes.
pub fn render_svg(scene: &Scene) -> String {
    let (w, h) = (num(scene.width), num(scene.height));
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    for p in &scene.primitives {
        let r = &p.rect;
        let ids = data_attrs(p);
        let line = match &p.kind {
            PrimKind::Text { text, size } => format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"{}\" font-family=\"monospace\"{ids}>{}</text>",
                num(r.x),
                num(r.y + size),
                num(*size),
                escape(text)
            ),
            PrimKind::Line { x1, y1, x2, y2 } => format!(
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"{ids}/>",
                num(*x1),
                num(*y1),
                num(*x2),
                num(*y2)
            ),
            PrimKind::BoxFrame { border } if *border > 0.0 => format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\"{ids}/>",
                num(r.x),
                num(r.y),
                num(r.w),
                num(r.h),
                num(*border)
            ),
            PrimKind::BoxFrame { .. } | PrimKind::NodeFrame { .. } => continue,
            PrimKind::Rectangle { fill } => format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"black\"{ids}/>",
                num(r.x),
                num(r.y),
                num(r.w),
                num(r.h),
                if *fill { "black" } else { "none" }
            ),
            PrimKind::Ellipse { fill } => format!(
                "<ellipse cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" fill=\"{}\" stroke=\"black\"{ids}/>",
                num(r.x + r.w / 2.0),
                num(r.y + r.h / 2.0),
                num(r.w / 2.0),
                num(r.h / 2.0),
                if *fill { "black" } else { "none" }
            ),
            PrimKind::Image { path } => format!(
                "<image x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" href=\"{}\"{ids}/>",
                num(r.x),
                num(r.y),
                num(r.w),
                num(r.h),
                escape(path)
            ),
            PrimKind::Arrowhead { points } => {
                let pts: Vec<String> = points.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
                format!("<polygon points=\"{}\" fill=\"black\"{ids}/>", pts.join(" "))
            }
            PrimKind::Hole { .. } => format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{HOLE_FILL}\"{ids}/>",
                num(r.x + r.w / 2.0),
                num(r.y + r.h / 2.0),
                num(r.w.min(r.h) / 2.0)
            ),
        };
        let _ = writeln!(out, "  {line}");
    }
    out.push_str("</svg>\n");
    out
}

/// Projects the scene onto a character grid of 7×14 pixel cells.
pub fn render_text(scene: &Scene) -> String {
    let mut rows: BTreeMap<i64, BTreeMap<i64, char>> = BTreeMap::new();
    // Pixel and column where the last run on each row ended. A run that starts
    // where the previous one stopped continues at that column, so rounding
    // of the pixel metric does not open gaps between adjacent runs.
    let mut ends: BTreeMap<i64, (f64, i64)> = BTreeMap::new();
    let mut put = |x: f64, y: f64, w: f64, s: &str| {
        let r = (y / CELL_H).floor() as i64;
        let row = rows.entry(r).or_default();
        let col = match ends.get(&r) {
            Some(&(px, c)) if (px - x).abs() < 0.5 => c,
            _ => (x / CELL_W).floor() as i64,
        };
        let n = s.chars().count() as i64;
        for (i, c) in s.chars().enumerate() {
            row.insert(col + i as i64, c);
        }
        ends.insert(r, (x + w, col + n));
    };
    for p in &scene.primitives {
        let (x, y, w) = (p.rect.x, p.rect.y, p.rect.w);
        match &p.kind {
            PrimKind::Text { text, .. } => put(x, y, w, text),
            PrimKind::Hole { .. } => put(x, y, w, "[●]"),
            PrimKind::Ellipse { .. } => put(x, y, w, "[ellipse]"),
            PrimKind::Rectangle { .. } => put(x, y, w, "[rect]"),
            PrimKind::Image { .. } => put(x, y, w, "[image]"),
            _ => {}
        }
    }
    let mut out = String::new();
    let mut last_row = None;
    for (r, cells) in rows {
        if r < 0 {
            continue;
        }
        let from = last_row.map_or(0, |l: i64| l + 1);
        for _ in from..r {
            out.push('\n');
        }
        let mut line = String::new();
        let mut col = 0;
        for (&c, &ch) in cells.range(0..) {
            while col < c {
                line.push(' ');
                col += 1;
            }
            line.push(ch);
            col += 1;
        }
        out.push_str(line.trim_end());
        out.push('\n');
        last_row = Some(r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langdef::term_from_sexpr;
    use crate::scene::{layout, validate_nf, LayoutCache, Viewport};
    use crate::sexpr::read_sexpr;

    fn scene(src: &str) -> Scene {
        let nf = validate_nf(&term_from_sexpr(&read_sexpr(src).unwrap()[0]).unwrap()).unwrap();
        layout(&nf, &LayoutCache::default(), Viewport::default()).scene
    }

    #[test]
    fn empty_scene_is_bare_root() {
        let svg = render_svg(&Scene::default());
        assert_eq!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"0\" height=\"0\" viewBox=\"0 0 0 0\">\n</svg>\n"
        );
    }

    #[test]
    fn one_rectangle() {
        let svg = render_svg(&scene("(rectangle 3 4 50 20 #f #t)"));
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(svg.contains("x=\"3\" y=\"4\" width=\"50\" height=\"20\""));
    }

    #[test]
    fn text_projection() {
        assert_eq!(render_text(&scene(r#"(seq "class" (space) "Library")"#)), "class Library\n");
        assert_eq!(render_text(&scene(r#"(seq "a" (nl) "b")"#)), "a\nb\n");
        // 10 pixels of indent is one 7-pixel cell.
        assert_eq!(render_text(&scene(r#"(seq "a" (indent 10 (nl) "b"))"#)), "a\n b\n");
        // 30 chars at 7.2 pixels end mid-cell; the next run still abuts.
        let long = "x".repeat(30);
        assert_eq!(render_text(&scene(&format!(r#"(seq "{long}" "y")"#))), format!("{long}y\n"));
    }

    #[test]
    fn text_is_escaped() {
        let svg = render_svg(&scene(r#"(seq "a<b&c")"#));
        assert!(svg.contains(">a&lt;b&amp;c</text>"));
    }

    #[test]
    fn numbers_are_trimmed() {
        assert_eq!(num(1.5), "1.5");
        assert_eq!(num(2.0), "2");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(1.0 / 3.0), "0.33");
    }
}
