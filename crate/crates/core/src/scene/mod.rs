//! Normal forms, layout, hit testing and rendering.

mod layout;
mod nf;
mod render;

pub use layout::{layout, LayoutOutput, Viewport};
pub use nf::{
    validate_nf, BoxKind, BoxNf, Decoration, EdgeLabel, EdgeType, End, GraphEdge, GraphNf, GraphNode, Menu,
    MenuEntry, Nf, NotNormalForm, Pos, ShapeNf,
};
pub use render::{render_svg, render_text};

use std::collections::BTreeMap;

use crate::term::{HoleSlot, Identity};

pub const BASE_FONT: i64 = 12;
pub const FONT_STEP: i64 = 2;
pub const MIN_FONT: i64 = 6;
pub const HOLE_RADIUS: f64 = 6.0;

/// Monospace text metric: `(width, height)` in whole pixels.
pub fn measure_text(s: &str, size: i64) -> (i64, i64) {
    let n = s.chars().count() as i64;
    // 0.6 and 1.2 as tenths, rounded half-up.
    ((6 * n * size + 5) / 10, (12 * size + 5) / 10)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Rect {
        Rect { x, y, w, h }
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= self.x && py >= self.y && px <= self.x + self.w && py <= self.y + self.h
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        const EPS: f64 = 1e-6;
        o.x >= self.x - EPS && o.y >= self.y - EPS && o.x + o.w <= self.x + self.w + EPS && o.y + o.h <= self.y + self.h + EPS
    }

    pub fn centre(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    fn translated(&self, dx: f64, dy: f64) -> Rect {
        Rect { x: self.x + dx, y: self.y + dy, ..*self }
    }

    fn scaled(&self, s: f64) -> Rect {
        Rect { x: self.x * s, y: self.y * s, w: self.w * s, h: self.h * s }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrimKind {
    Text { text: String, size: f64 },
    Line { x1: f64, y1: f64, x2: f64, y2: f64 },
    /// Outline of a box; drawn only when `border > 0`.
    BoxFrame { border: f64 },
    Rectangle { fill: bool },
    Ellipse { fill: bool },
    Image { path: String },
    Arrowhead { points: [(f64, f64); 3] },
    Hole { slot: HoleSlot },
    /// Invisible frame around a graph node, used for dragging and edges.
    NodeFrame { node_type: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub kind: PrimKind,
    pub rect: Rect,
    pub concrete: Option<Identity>,
    pub abstract_id: Option<Identity>,
    pub menu: Option<Menu>,
    pub selectable: bool,
    /// Text hole that receives edits made on this primitive.
    pub edit_target: Option<Identity>,
}

impl Primitive {
    fn new(kind: PrimKind, rect: Rect) -> Primitive {
        Primitive { kind, rect, concrete: None, abstract_id: None, menu: None, selectable: false, edit_target: None }
    }

    /// Abstract identity used for events: the enclosing node's, else the
    /// primitive's own.
    pub fn event_identity(&self) -> Option<&Identity> {
        self.abstract_id.as_ref().or(self.concrete.as_ref())
    }
}

/// A graph node as laid out, for edge gating and dragging.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneNode {
    pub id: Identity,
    pub abstract_id: Identity,
    pub node_type: String,
    pub rect: Rect,
    /// Index into [`Scene::graphs`].
    pub graph: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub width: f64,
    pub height: f64,
    pub primitives: Vec<Primitive>,
    /// Edge types of each interactive (non-thumbnail) graph.
    pub graphs: Vec<Vec<EdgeType>>,
    pub nodes: Vec<SceneNode>,
}

impl Scene {
    /// Looks a node up by its concrete or abstract identity.
    pub fn node(&self, id: &Identity) -> Option<&SceneNode> {
        self.nodes
            .iter()
            .find(|n| &n.id == id)
            .or_else(|| self.nodes.iter().find(|n| &n.abstract_id == id))
    }

    pub fn primitive(&self, concrete: &Identity) -> Option<&Primitive> {
        self.primitives.iter().find(|p| p.concrete.as_ref() == Some(concrete))
    }
}

/// Positions the user (or the first layout) gave to graph nodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayoutCache {
    pub positions: BTreeMap<Identity, (f64, f64)>,
    pub waypoints: BTreeMap<Identity, Vec<(f64, f64)>>,
}

/// Topmost selectable primitive containing the point, as
/// `(concrete, abstract)` identities.
pub fn hit_test(scene: &Scene, x: f64, y: f64) -> Option<(Identity, Identity)> {
    scene
        .primitives
        .iter()
        .rev()
        .find(|p| p.selectable && p.rect.contains(x, y))
        .and_then(|p| {
            let concrete = p.concrete.clone()?;
            let abs = p.event_identity().cloned().unwrap_or_else(|| concrete.clone());
            Some((concrete, abs))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_metric() {
        assert_eq!(measure_text("A", 12), (7, 14));
        assert_eq!(measure_text("", 12), (0, 14));
        assert_eq!(measure_text("AAAA", 10), (24, 12));
    }

    #[test]
    fn metric_matches_float_rounding() {
        for size in [6, 8, 10, 12, 14, 16, 30] {
            for n in 0..40usize {
                let s = "x".repeat(n);
                let w = (n as f64 * 0.6 * size as f64 + 0.5).floor() as i64;
                let h = (1.2 * size as f64 + 0.5).floor() as i64;
                assert_eq!(measure_text(&s, size), (w, h), "n={n} size={size}");
            }
        }
    }
}
