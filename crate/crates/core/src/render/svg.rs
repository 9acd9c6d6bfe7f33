use std::fmt::Write;

use super::{wrap, Annotation, Chart, GlyphKind, Poster, SceneNode, NEUTRAL};
use crate::layout::Point;

const HEADER_X: f64 = 40.0;
const SUMMARY_WIDTH: f64 = 820.0;
const SUMMARY_TOP: f64 = 100.0;
const SUMMARY_BOTTOM: f64 = 270.0;
const LEGEND_X: f64 = 900.0;
const STRIP_TOP: f64 = 1320.0;
const STRIP_CHART_W: f64 = 260.0;
const STRIP_GAP: f64 = 20.0;
const HULL_PADDING: f64 = 15.0;
const PAD: f64 = 8.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn n(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn path(points: &[Point]) -> String {
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, n(p[0]), n(p[1]));
    }
    if points.len() > 2 {
        d.push_str(" Z");
    }
    d
}

fn star(c: Point, r: f64) -> Vec<Point> {
    (0..10)
        .map(|i| {
            let a = -std::f64::consts::FRAC_PI_2 + i as f64 * std::f64::consts::PI / 5.0;
            let rr = if i % 2 == 0 { r } else { r * 0.45 };
            [c[0] + rr * a.cos(), c[1] + rr * a.sin()]
        })
        .collect()
}

fn glyph_svg(out: &mut String, node: &SceneNode, idx: usize) {
    let [x, y] = node.position;
    let r = node.radius;
    let Some(g) = &node.glyph else {
        let _ = writeln!(out, r##"<circle id="node-{idx}" cx="{}" cy="{}" r="{}" fill="#8c8c8c" stroke="#ffffff" stroke-width="1"/>"##, n(x), n(y), n(r));
        return;
    };
    let _ = writeln!(out, r#"<g id="node-{idx}" class="glyph glyph-{}">"#, kind_class(g.kind));
    match g.kind {
        GlyphKind::Star => {
            let _ = writeln!(out, r##"<path d="{}" fill="#f2b01e" stroke="#5a4500" stroke-width="1"/>"##, path(&star([x, y], r * 1.3)));
        }
        GlyphKind::WarningDiamond => {
            let pts = [[x, y - r * 1.2], [x + r * 1.2, y], [x, y + r * 1.2], [x - r * 1.2, y]];
            let _ = writeln!(out, r##"<path d="{}" fill="#e15759" stroke="#7a1f20" stroke-width="1"/>"##, path(&pts));
            let _ = writeln!(out, r##"<text x="{}" y="{}" font-size="11" font-weight="bold" text-anchor="middle" fill="#ffffff">!</text>"##, n(x), n(y + 4.0));
        }
        GlyphKind::Medallion => {
            let _ = writeln!(out, r##"<circle cx="{}" cy="{}" r="{}" fill="#d4a017" stroke="#6b4f00" stroke-width="1.5"/>"##, n(x), n(y), n(r));
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{}" font-size="11" font-weight="bold" text-anchor="middle" fill="#ffffff">{}</text>"##,
                n(x),
                n(y + 4.0),
                g.rank.unwrap_or(1)
            );
        }
        GlyphKind::PieDot => {
            let _ = writeln!(out, r##"<circle cx="{}" cy="{}" r="{}" fill="#ffffff" stroke="#4e79a7" stroke-width="2"/>"##, n(x), n(y), n(r));
            let _ = writeln!(
                out,
                r##"<path d="M{} {} L{} {} A{} {} 0 0 1 {} {} Z" fill="#4e79a7"/>"##,
                n(x),
                n(y),
                n(x),
                n(y - r),
                n(r),
                n(r),
                n(x + r),
                n(y)
            );
        }
    }
    out.push_str("</g>\n");
}

fn kind_class(k: GlyphKind) -> &'static str {
    match k {
        GlyphKind::Star => "star",
        GlyphKind::WarningDiamond => "warning-diamond",
        GlyphKind::Medallion => "medallion",
        GlyphKind::PieDot => "pie-dot",
    }
}

/// Draws `chart` in the box with top-left `o` and width `w`, height `h`.
fn chart_svg(out: &mut String, chart: &Chart, o: Point, w: f64, h: f64, color: &str) {
    match chart {
        Chart::Donut { share, label } => {
            let r = (h / 2.0 - 6.0).max(6.0);
            let c = [o[0] + r + 4.0, o[1] + h / 2.0];
            let circ = 2.0 * std::f64::consts::PI * r;
            let _ = writeln!(out, r##"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="#dddddd" stroke-width="8"/>"##, n(c[0]), n(c[1]), n(r));
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="{color}" stroke-width="8" stroke-dasharray="{} {}" transform="rotate(-90 {} {})"/>"#,
                n(c[0]),
                n(c[1]),
                n(r),
                n(share.clamp(0.0, 1.0) * circ),
                n(circ),
                n(c[0]),
                n(c[1])
            );
            let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#, n(c[0] + r + 12.0), n(c[1] + 4.0), esc(label));
        }
        Chart::Bars { labels, values } => {
            let max = values.iter().copied().fold(0.0, f64::max);
            let row = h / labels.len().max(1) as f64;
            let label_w = 90.0;
            let bar_w = (w - label_w - 40.0).max(10.0);
            for (i, (l, v)) in labels.iter().zip(values).enumerate() {
                let y = o[1] + i as f64 * row;
                let len = if max > 0.0 { v / max * bar_w } else { 0.0 };
                let _ = writeln!(out, r##"<text x="{}" y="{}" font-size="9" fill="#333333">{}</text>"##, n(o[0]), n(y + row * 0.7), esc(&truncate(l, 16)));
                let _ = writeln!(out, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}"/>"#, n(o[0] + label_w), n(y + 2.0), n(len), n(row - 4.0));
                let _ = writeln!(out, r##"<text x="{}" y="{}" font-size="9" fill="#333333">{}</text>"##, n(o[0] + label_w + len + 3.0), n(y + row * 0.7), crate::text::format_value(*v));
            }
        }
        Chart::Histogram { min, max, counts } => {
            let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
            let plot_h = h - 14.0;
            let bw = w / counts.len().max(1) as f64;
            for (i, &c) in counts.iter().enumerate() {
                let bh = c as f64 / top * plot_h;
                let _ = writeln!(out, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}"/>"#, n(o[0] + i as f64 * bw + 0.5), n(o[1] + plot_h - bh), n((bw - 1.0).max(0.5)), n(bh));
            }
            let _ = writeln!(out, r##"<text x="{}" y="{}" font-size="9" fill="#333333">{}</text>"##, n(o[0]), n(o[1] + h), crate::text::format_value(*min));
            let _ = writeln!(out, r##"<text x="{}" y="{}" font-size="9" text-anchor="end" fill="#333333">{}</text>"##, n(o[0] + w), n(o[1] + h), crate::text::format_value(*max));
        }
        Chart::Strip { values } => {
            let top = values.iter().copied().fold(0.0, f64::max);
            let plot_h = h - 14.0;
            let bw = w / values.len().max(1) as f64;
            for (i, &v) in values.iter().enumerate() {
                let bh = if top > 0.0 { v / top * plot_h } else { 0.0 };
                let _ = writeln!(out, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}"/>"#, n(o[0] + i as f64 * bw), n(o[1] + plot_h - bh), n((bw * 0.9).max(0.2)), n(bh));
            }
            let _ = writeln!(out, r##"<text x="{}" y="{}" font-size="9" fill="#333333">sorted, max {}</text>"##, n(o[0]), n(o[1] + h), crate::text::format_value(top));
        }
    }
}

fn truncate(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        s.to_string()
    } else {
        s.chars().take(max - 1).collect::<String>() + "…"
    }
}

fn annotation_svg(out: &mut String, a: &Annotation) {
    let Some(r) = a.rect else { return };
    for (k, l) in a.leaders.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<line id="leader-{}-{k}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="1.5"/>"#,
            esc(&a.id),
            n(l.from[0]),
            n(l.from[1]),
            n(l.to[0]),
            n(l.to[1]),
            a.color
        );
    }
    let [x0, y0] = r.min();
    let _ = writeln!(out, r#"<g id="{}" class="annotation">"#, esc(&a.id));
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" rx="4" fill="#ffffff" fill-opacity="0.95" stroke="{}" stroke-width="1.5"/>"##,
        n(x0),
        n(y0),
        n(r.w),
        n(r.h),
        a.color
    );
    let lh = a.font_size * 1.25;
    let _ = write!(out, r##"<text font-size="{}" fill="#222222">"##, n(a.font_size));
    for (i, line) in a.lines.iter().enumerate() {
        let _ = write!(out, r#"<tspan x="{}" y="{}">{}</tspan>"#, n(x0 + PAD), n(y0 + PAD + lh * (i as f64 + 0.8)), esc(line));
    }
    out.push_str("</text>\n");
    if let Some(c) = &a.chart {
        let top = y0 + PAD + lh * a.lines.len() as f64 + 6.0;
        chart_svg(out, c, [x0 + PAD, top], r.w - 2.0 * PAD, c.inline_height(), &a.color);
    }
    out.push_str("</g>\n");
}

/// Fits the summary paragraph into the header, shrinking the font and
/// finally cutting with an ellipsis.
fn summary_lines(summary: &str) -> (Vec<String>, f64) {
    let room = SUMMARY_BOTTOM - SUMMARY_TOP;
    let mut font = 14.0;
    loop {
        let mut lines = wrap(summary, font, SUMMARY_WIDTH);
        let fits = lines.len() as f64 * font * 1.3 <= room;
        if fits || font <= 9.0 {
            if !fits {
                let keep = (room / (font * 1.3)).floor() as usize;
                lines.truncate(keep.max(1));
                if let Some(last) = lines.last_mut() {
                    last.push('…');
                }
            }
            return (lines, font);
        }
        font -= 1.0;
    }
}

/// Deterministic SVG document for the poster.
pub fn render_svg(p: &Poster) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="Helvetica, Arial, sans-serif">"#,
        w = n(p.width),
        h = n(p.height)
    );
    let _ = writeln!(out, r##"<rect id="background" x="0" y="0" width="{}" height="{}" fill="#fbfaf7"/>"##, n(p.width), n(p.height));

    // Header.
    let _ = writeln!(out, r##"<text id="title" x="{HEADER_X}" y="64" font-size="30" font-weight="bold" fill="#1a1a1a">{}</text>"##, esc(&p.title));
    let (lines, font) = summary_lines(&p.summary);
    let _ = write!(out, r##"<text id="summary" font-size="{}" fill="#333333">"##, n(font));
    for (i, l) in lines.iter().enumerate() {
        let _ = write!(out, r#"<tspan x="{HEADER_X}" y="{}">{}</tspan>"#, n(SUMMARY_TOP + font * 1.3 * (i as f64 + 0.8)), esc(l));
    }
    out.push_str("</text>\n");

    // Legend.
    if !p.legend.is_empty() {
        out.push_str("<g id=\"legend\">\n");
        let _ = writeln!(out, r##"<text x="{LEGEND_X}" y="40" font-size="12" font-weight="bold" fill="#333333">Legend</text>"##);
        for (i, e) in p.legend.iter().enumerate() {
            let y = 62.0 + i as f64 * 26.0;
            let sample = SceneNode {
                id: String::new(),
                position: [LEGEND_X + 10.0, y],
                radius: 8.0,
                glyph: Some(super::Glyph { node: 0, kind: e.glyph, rank: Some(1), fact: String::new() }),
            };
            let _ = write!(out, r#"<g id="legend-{}">"#, kind_class(e.glyph));
            let mut inner = String::new();
            glyph_svg(&mut inner, &sample, 0);
            out.push_str(&inner.replacen(" id=\"node-0\"", "", 1));
            let _ = writeln!(out, r##"<text x="{}" y="{}" font-size="12" fill="#333333">{}</text></g>"##, n(LEGEND_X + 28.0), n(y + 4.0), esc(&e.label));
        }
        out.push_str("</g>\n");
    }

    // Graph: hulls, edges, nodes.
    out.push_str("<g id=\"graph\">\n");
    for h in &p.scene.hulls {
        if h.points.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            r#"<path id="{}" class="hull" d="{}" fill="{c}" stroke="{c}" stroke-width="{}" stroke-linejoin="round" stroke-linecap="round" opacity="0.2"/>"#,
            h.id,
            path(&h.points),
            n(2.0 * HULL_PADDING),
            c = h.color
        );
    }
    for (k, &(a, b)) in p.scene.edges.iter().enumerate() {
        let pa = p.scene.nodes[a].position;
        let pb = p.scene.nodes[b].position;
        let _ = writeln!(out, r##"<line id="edge-{k}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#b5b5b5" stroke-width="1"/>"##, n(pa[0]), n(pa[1]), n(pb[0]), n(pb[1]));
    }
    for (i, node) in p.scene.nodes.iter().enumerate() {
        glyph_svg(&mut out, node, i);
    }
    for (i, node) in p.scene.nodes.iter().enumerate() {
        if node.glyph.is_some() {
            let _ = writeln!(
                out,
                r##"<text id="label-{i}" x="{}" y="{}" font-size="10" text-anchor="middle" fill="#1a1a1a">{}</text>"##,
                n(node.position[0]),
                n(node.position[1] + node.radius + 12.0),
                esc(&node.id)
            );
        }
    }
    out.push_str("</g>\n");

    // Annotations.
    out.push_str("<g id=\"annotations\">\n");
    for a in &p.annotations {
        annotation_svg(&mut out, a);
    }
    out.push_str("</g>\n");

    // Graph summary strip.
    if !p.graph_summary.is_empty() {
        out.push_str("<g id=\"graph-summary\">\n");
        let _ = writeln!(out, r##"<text x="{HEADER_X}" y="{}" font-size="14" font-weight="bold" fill="#333333">Graph summary</text>"##, n(STRIP_TOP));
        for (i, c) in p.graph_summary.iter().enumerate() {
            let x = HEADER_X + i as f64 * (STRIP_CHART_W + STRIP_GAP);
            if x + STRIP_CHART_W > p.width {
                break;
            }
            let _ = writeln!(out, r#"<g id="summary-{}">"#, esc(&c.fact));
            chart_svg(&mut out, &c.chart, [x, STRIP_TOP + 16.0], STRIP_CHART_W, 110.0, NEUTRAL);
            let caption = wrap(&c.caption, 10.0, STRIP_CHART_W);
            let _ = write!(out, r##"<text font-size="10" fill="#333333">"##);
            for (k, l) in caption.iter().take(8).enumerate() {
                let _ = write!(out, r#"<tspan x="{}" y="{}">{}</tspan>"#, n(x), n(STRIP_TOP + 146.0 + 12.5 * k as f64), esc(l));
            }
            out.push_str("</text>\n</g>\n");
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
