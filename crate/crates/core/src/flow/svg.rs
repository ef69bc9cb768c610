//! Static SVG Sankey rendering of a [`FlowTable`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{FlowTable, FlowTarget};
use crate::phase::PhaseLetter;

const OTHER_COLOR: &str = "#BDBDBD";
const TERMINAL_COLOR: &str = "#000000";

#[derive(Debug, Clone)]
pub struct StyleConfig {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub node_width: f64,
    pub node_gap: f64,
    /// Letters drawn in their own lane; everything else shares a gray
    /// out-of-plan lane.
    pub plan_letters: Vec<PhaseLetter>,
    pub title: Option<String>,
}

impl Default for StyleConfig {
    fn default() -> Self {
        StyleConfig {
            width: 960.0,
            height: 480.0,
            margin: 40.0,
            node_width: 14.0,
            node_gap: 10.0,
            plan_letters: vec![PhaseLetter::N, PhaseLetter::R, PhaseLetter::P, PhaseLetter::V],
            title: None,
        }
    }
}

pub fn phase_color(letter: PhaseLetter) -> &'static str {
    match letter {
        PhaseLetter::N => "#CCC7E6",
        PhaseLetter::R => "#EEC7D4",
        PhaseLetter::P => "#FFED99",
        PhaseLetter::V => "#D9EDCC",
        PhaseLetter::RG => "#B9D6F2",
        PhaseLetter::VG => "#A8DADC",
        PhaseLetter::S => "#F6C99B",
        PhaseLetter::O => OTHER_COLOR,
    }
}

/// Vertical lane of a node. Ordered top to bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Lane {
    Plan(usize),
    Other,
    Terminal,
}

impl StyleConfig {
    fn lane(&self, letter: PhaseLetter) -> Lane {
        self.plan_letters
            .iter()
            .position(|&l| l == letter)
            .map_or(Lane::Other, Lane::Plan)
    }

    fn target_lane(&self, to: FlowTarget) -> Lane {
        match to {
            FlowTarget::Phase(l) => self.lane(l),
            FlowTarget::Terminal | FlowTarget::Truncated => Lane::Terminal,
        }
    }

    fn lane_color(&self, lane: Lane) -> &'static str {
        match lane {
            Lane::Plan(i) => phase_color(self.plan_letters[i]),
            Lane::Other => OTHER_COLOR,
            Lane::Terminal => TERMINAL_COLOR,
        }
    }

    fn lane_name(&self, lane: Lane) -> String {
        match lane {
            Lane::Plan(i) => self.plan_letters[i].to_string(),
            Lane::Other => "other".into(),
            Lane::Terminal => "end".into(),
        }
    }
}

struct Node {
    y: f64,
    h: f64,
    out_cursor: f64,
    in_cursor: f64,
}

/// Renders the flow as a column-per-stage Sankey. Ribbons are `<path
/// class="ribbon">` elements, one per (stage, source lane, target lane).
pub fn render_svg(flow: &FlowTable, style: &StyleConfig) -> String {
    let mut out = String::new();
    let (w, h) = (style.width, style.height);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect class="canvas" x="0" y="0" width="{w:.0}" height="{h:.0}" fill="white"/>"#).unwrap();
    if let Some(title) = &style.title {
        writeln!(out, r#"<text x="{:.2}" y="20" font-family="sans-serif" font-size="14">{}</text>"#, style.margin, xml_escape(title)).unwrap();
    }

    // Ribbon widths aggregated by lane: out-of-plan letters share one band.
    let mut ribbons: BTreeMap<(usize, Lane, Lane), u64> = BTreeMap::new();
    let mut column_in: BTreeMap<(usize, Lane), u64> = BTreeMap::new();
    for (k, &v) in &flow.flows {
        let from = style.lane(k.from);
        let to = style.target_lane(k.to);
        *ribbons.entry((k.stage, from, to)).or_insert(0) += v;
        if k.stage == 1 {
            *column_in.entry((1, from)).or_insert(0) += v;
        }
        *column_in.entry((k.stage + 1, to)).or_insert(0) += v;
    }

    let stages = flow.stage_count();
    if flow.population > 0 && stages > 0 {
        let columns = stages + 1;
        let plot_h = h - 2.0 * style.margin - 30.0;
        let max_nodes = (1..=columns)
            .map(|c| column_in.keys().filter(|(col, _)| *col == c).count())
            .max()
            .unwrap_or(1)
            .max(1);
        let scale = (plot_h - style.node_gap * (max_nodes as f64 - 1.0)).max(1.0) / flow.population as f64;
        let col_x = |c: usize| {
            style.margin + (c - 1) as f64 * (w - 2.0 * style.margin - style.node_width) / (columns - 1).max(1) as f64
        };

        let mut nodes: BTreeMap<(usize, Lane), Node> = BTreeMap::new();
        for c in 1..=columns {
            let mut y = style.margin + 30.0;
            for (&(col, lane), &count) in column_in.range((c, Lane::Plan(0))..=(c, Lane::Terminal)) {
                debug_assert_eq!(col, c);
                let nh = count as f64 * scale;
                nodes.insert(
                    (c, lane),
                    Node {
                        y,
                        h: nh,
                        out_cursor: y,
                        in_cursor: y,
                    },
                );
                y += nh + style.node_gap;
            }
        }

        for (&(stage, from, to), &count) in &ribbons {
            let width = count as f64 * scale;
            let x0 = col_x(stage) + style.node_width;
            let x1 = col_x(stage + 1);
            let y0 = {
                let n = nodes.get_mut(&(stage, from)).expect("source node exists");
                let y = n.out_cursor;
                n.out_cursor += width;
                y
            };
            let y1 = {
                let n = nodes.get_mut(&(stage + 1, to)).expect("target node exists");
                let y = n.in_cursor;
                n.in_cursor += width;
                y
            };
            let xm = (x0 + x1) / 2.0;
            let pct = 100.0 * count as f64 / flow.population as f64;
            writeln!(
                out,
                r#"<path class="ribbon" d="M{x0:.2},{y0:.2} C{xm:.2},{y0:.2} {xm:.2},{y1:.2} {x1:.2},{y1:.2} L{x1:.2},{:.2} C{xm:.2},{:.2} {xm:.2},{:.2} {x0:.2},{:.2} Z" fill="{}" fill-opacity="0.55"><title>stage {stage}: {} to {}: {count} ({pct:.1}%)</title></path>"#,
                y1 + width,
                y1 + width,
                y0 + width,
                y0 + width,
                style.lane_color(from),
                style.lane_name(from),
                style.lane_name(to),
            )
            .unwrap();
        }

        for (&(c, lane), node) in &nodes {
            writeln!(
                out,
                r#"<rect class="node" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{} @ {c}</title></rect>"#,
                col_x(c),
                node.y,
                style.node_width,
                node.h,
                style.lane_color(lane),
                style.lane_name(lane),
            )
            .unwrap();
        }
    }

    // Legend.
    let mut lanes: Vec<Lane> = (0..style.plan_letters.len()).map(Lane::Plan).collect();
    lanes.push(Lane::Other);
    lanes.push(Lane::Terminal);
    let ly = h - style.margin + 10.0;
    for (i, lane) in lanes.into_iter().enumerate() {
        let lx = style.margin + i as f64 * 90.0;
        writeln!(
            out,
            r#"<g class="legend"><rect x="{lx:.2}" y="{ly:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text></g>"#,
            style.lane_color(lane),
            lx + 16.0,
            ly + 11.0,
            style.lane_name(lane),
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::build_flow;
    use crate::langutory::Langutory;
    use PhaseLetter::*;

    #[test]
    fn empty_corpus_has_canvas_and_legend_only() {
        let t = build_flow(std::iter::empty(), 8).unwrap();
        let svg = render_svg(&t, &StyleConfig::default());
        assert!(svg.contains(r#"class="canvas""#));
        assert_eq!(svg.matches(r#"class="legend""#).count(), 6);
        assert_eq!(svg.matches(r#"class="ribbon""#).count(), 0);
    }

    #[test]
    fn one_ribbon_per_stage_for_one_trajectory() {
        let lang = Langutory::from_letters(&[N, R, R, P, V, P, V]).unwrap();
        let t = build_flow([&lang], 8).unwrap();
        let svg = render_svg(&t, &StyleConfig::default());
        assert_eq!(svg.matches(r#"class="ribbon""#).count(), t.stage_count());
        for stage in 1..=t.stage_count() {
            assert_eq!(svg.matches(&format!("<title>stage {stage}:")).count(), 1);
        }
    }

    #[test]
    fn out_of_plan_letters_share_the_gray_lane() {
        let a = Langutory::from_letters(&[N, O, P]).unwrap();
        let b = Langutory::from_letters(&[N, S, P]).unwrap();
        let t = build_flow([&a, &b], 8).unwrap();
        let svg = render_svg(&t, &StyleConfig::default());
        // stage 1: N->other (merged), stage 2: other->P, stage 3: P->end
        assert_eq!(svg.matches(r#"class="ribbon""#).count(), 3);
        assert!(svg.contains(OTHER_COLOR));
    }
}
