use std::collections::HashSet;

use super::{
    measure_text, BoxKind, BoxNf, Decoration, End, GraphNf, LayoutCache, Nf, Pos, PrimKind, Primitive, Rect, Scene,
    SceneNode, ShapeNf, BASE_FONT, FONT_STEP, HOLE_RADIUS, MIN_FONT,
};
use crate::term::{HoleSlot, Identity};

pub const GRID_ORIGIN: f64 = 40.0;
pub const GRID_CELL: f64 = 100.0;
pub const ARROW_LEN: f64 = 8.0;
const BOX_PAD: f64 = 2.0;
const TREE_GAP_X: f64 = 16.0;
const TREE_GAP_Y: f64 = 24.0;
const GRAPH_MARGIN: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub width: f64,
    pub height: f64,
}

impl Default for Viewport {
    fn default() -> Viewport {
        Viewport { width: 1024.0, height: 768.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutOutput {
    pub scene: Scene,
    /// Grid positions given to graph nodes missing from the cache.
    pub placements: Vec<(Identity, (f64, f64))>,
}

/// Lays `nf` out. Graph nodes found in `cache` keep their cached position.
pub fn layout(nf: &Nf, cache: &LayoutCache, viewport: Viewport) -> LayoutOutput {
    let mut l = Layouter { cache, viewport, thumbnail_depth: 0, graphs: Vec::new(), placements: Vec::new() };
    let block = l.block(nf, BASE_FONT);
    LayoutOutput {
        scene: Scene {
            width: block.w,
            height: block.h,
            primitives: block.prims,
            graphs: l.graphs,
            nodes: block.nodes,
        },
        placements: l.placements,
    }
}

/// Scale that fits a `bw`×`bh` body into `tw`×`th`, keeping aspect ratio.
pub fn thumbnail_scale(bw: f64, bh: f64, tw: f64, th: f64) -> f64 {
    if bw <= 0.0 || bh <= 0.0 {
        1.0
    } else {
        (tw / bw).min(th / bh)
    }
}

#[derive(Default)]
struct Block {
    w: f64,
    h: f64,
    prims: Vec<Primitive>,
    nodes: Vec<SceneNode>,
}

impl Block {
    fn place(self, dx: f64, dy: f64, into_prims: &mut Vec<Primitive>, into_nodes: &mut Vec<SceneNode>) {
        for mut p in self.prims {
            shift(&mut p, dx, dy);
            into_prims.push(p);
        }
        for mut n in self.nodes {
            n.rect = n.rect.translated(dx, dy);
            into_nodes.push(n);
        }
    }
}

fn shift(p: &mut Primitive, dx: f64, dy: f64) {
    p.rect = p.rect.translated(dx, dy);
    match &mut p.kind {
        PrimKind::Line { x1, y1, x2, y2 } => {
            *x1 += dx;
            *x2 += dx;
            *y1 += dy;
            *y2 += dy;
        }
        PrimKind::Arrowhead { points } => {
            for pt in points {
                pt.0 += dx;
                pt.1 += dy;
            }
        }
        _ => {}
    }
}

fn scale(p: &mut Primitive, s: f64) {
    p.rect = p.rect.scaled(s);
    match &mut p.kind {
        PrimKind::Text { size, .. } => *size *= s,
        PrimKind::Line { x1, y1, x2, y2 } => {
            *x1 *= s;
            *x2 *= s;
            *y1 *= s;
            *y2 *= s;
        }
        PrimKind::Arrowhead { points } => {
            for pt in points {
                pt.0 *= s;
                pt.1 *= s;
            }
        }
        PrimKind::BoxFrame { border } => *border *= s,
        _ => {}
    }
}

/// Text cursor state for flowing content.
struct Flow {
    x: f64,
    y: f64,
    margin: f64,
    line_h: f64,
    max_x: f64,
    size: i64,
    prims: Vec<Primitive>,
    nodes: Vec<SceneNode>,
}

impl Flow {
    fn advance(&mut self, w: f64, h: f64) {
        self.x += w;
        self.line_h = self.line_h.max(h);
        self.max_x = self.max_x.max(self.x);
    }
}

struct Layouter<'a> {
    cache: &'a LayoutCache,
    viewport: Viewport,
    thumbnail_depth: usize,
    graphs: Vec<Vec<super::EdgeType>>,
    placements: Vec<(Identity, (f64, f64))>,
}

impl Layouter<'_> {
    fn interactive(&self) -> bool {
        self.thumbnail_depth == 0
    }

    fn block(&mut self, nf: &Nf, size: i64) -> Block {
        match nf {
            Nf::Box(b) => self.boxed(b, size),
            Nf::Ellipse(s) => self.shape(s, PrimKind::Ellipse { fill: s.fill }),
            Nf::Rectangle(s) => self.shape(s, PrimKind::Rectangle { fill: s.fill }),
            Nf::Image { id, w, h, path } => {
                let mut p = Primitive::new(PrimKind::Image { path: path.clone() }, Rect::new(0.0, 0.0, *w as f64, *h as f64));
                p.concrete = Some(id.clone());
                Block { w: *w as f64, h: *h as f64, prims: vec![p], nodes: Vec::new() }
            }
            Nf::Chars { id, text, target } => {
                let (w, h) = measure_text(text, size);
                let w = (w as f64).max(measure_text("x", size).0 as f64);
                let mut p = Primitive::new(PrimKind::Text { text: text.clone(), size: size as f64 }, Rect::new(0.0, 0.0, w, h as f64));
                p.concrete = Some(id.clone());
                p.selectable = self.interactive();
                p.edit_target = target.clone();
                Block { w, h: h as f64, prims: vec![p], nodes: Vec::new() }
            }
            Nf::Hole(h) => self.hole(h, size),
            Nf::Thumbnail { x, y, w, h, body } => self.thumbnail(*x, *y, *w, *h, body, size),
            Nf::Tree(root, children) => self.tree(root, children, size),
            Nf::Graph(g) => self.graph(g, size),
            _ => {
                let mut fl = Flow { x: 0.0, y: 0.0, margin: 0.0, line_h: 0.0, max_x: 0.0, size, prims: Vec::new(), nodes: Vec::new() };
                self.flow(nf, &mut fl);
                Block { w: fl.max_x, h: fl.y + fl.line_h, prims: fl.prims, nodes: fl.nodes }
            }
        }
    }

    fn flow(&mut self, nf: &Nf, fl: &mut Flow) {
        match nf {
            Nf::NewLine => {
                if fl.line_h == 0.0 {
                    fl.line_h = measure_text("", fl.size).1 as f64;
                }
                fl.y += fl.line_h;
                fl.x = fl.margin;
                fl.line_h = 0.0;
            }
            Nf::Text(s) => {
                let (w, h) = measure_text(s, fl.size);
                let p = Primitive::new(
                    PrimKind::Text { text: s.clone(), size: fl.size as f64 },
                    Rect::new(fl.x, fl.y, w as f64, h as f64),
                );
                fl.prims.push(p);
                fl.advance(w as f64, h as f64);
            }
            Nf::Font { up, body } => {
                let saved = fl.size;
                fl.size = if *up { fl.size + FONT_STEP } else { (fl.size - FONT_STEP).max(MIN_FONT) };
                self.flow(body, fl);
                fl.size = saved;
            }
            Nf::Seq(items) => {
                for item in items {
                    self.flow(item, fl);
                }
            }
            Nf::Tab(items) => {
                let saved = fl.margin;
                fl.margin = fl.x;
                for item in items {
                    self.flow(item, fl);
                }
                fl.margin = saved;
            }
            Nf::Indent(n, items) => {
                let saved = fl.margin;
                fl.margin += *n as f64;
                for item in items {
                    self.flow(item, fl);
                }
                fl.margin = saved;
            }
            Nf::Underline(items) => {
                let (x0, y0) = (fl.x, fl.y);
                for item in items {
                    self.flow(item, fl);
                }
                if fl.y == y0 && fl.x > x0 {
                    let base = y0 + measure_text("", fl.size).1 as f64;
                    fl.prims.push(Primitive::new(
                        PrimKind::Line { x1: x0, y1: base, x2: fl.x, y2: base },
                        Rect::new(x0, base, fl.x - x0, 0.0),
                    ));
                }
            }
            _ => {
                let b = self.block(nf, fl.size);
                let (w, h) = (b.w, b.h);
                b.place(fl.x, fl.y, &mut fl.prims, &mut fl.nodes);
                fl.advance(w, h);
            }
        }
    }

    fn shape(&mut self, s: &ShapeNf, kind: PrimKind) -> Block {
        let mut p = Primitive::new(kind, Rect::new(s.x as f64, s.y as f64, s.w as f64, s.h as f64));
        p.concrete = Some(s.id.clone());
        p.selectable = s.selectable && self.interactive();
        Block { w: (s.x + s.w).max(0) as f64, h: (s.y + s.h).max(0) as f64, prims: vec![p], nodes: Vec::new() }
    }

    fn hole(&mut self, h: &crate::term::Hole, size: i64) -> Block {
        let mut p = match &h.slot {
            HoleSlot::Text(s) if !s.is_empty() => {
                let (w, th) = measure_text(s, size);
                Primitive::new(PrimKind::Text { text: s.clone(), size: size as f64 }, Rect::new(0.0, 0.0, w as f64, th as f64))
            }
            slot => {
                let d = 2.0 * HOLE_RADIUS;
                Primitive::new(PrimKind::Hole { slot: slot.clone() }, Rect::new(0.0, 0.0, d, d))
            }
        };
        p.concrete = Some(h.identity.clone());
        p.selectable = self.interactive();
        if h.text().is_some() {
            p.edit_target = Some(h.identity.clone());
        }
        Block { w: p.rect.w, h: p.rect.h, prims: vec![p], nodes: Vec::new() }
    }

    fn boxed(&mut self, b: &BoxNf, size: i64) -> Block {
        let border = b.border.unwrap_or(0).max(0) as f64;
        let pad = BOX_PAD + border;
        let items: Vec<(Pos, Block)> = b.items.iter().map(|(pos, nf)| (*pos, self.block(nf, size))).collect();
        let max_w = items.iter().map(|(_, k)| k.w).fold(0.0, f64::max);
        let max_h = items.iter().map(|(_, k)| k.h).fold(0.0, f64::max);
        let (inner_w, inner_h) = match b.kind {
            BoxKind::HBox => (items.iter().map(|(_, k)| k.w).sum(), max_h),
            BoxKind::VBox => (max_w, items.iter().map(|(_, k)| k.h).sum()),
            BoxKind::Box => (max_w, max_h),
        };
        let (w, h) = (inner_w + 2.0 * pad, inner_h + 2.0 * pad);
        let mut frame = Primitive::new(PrimKind::BoxFrame { border }, Rect::new(0.0, 0.0, w, h));
        frame.concrete = Some(b.id.clone());
        frame.selectable = self.interactive();
        frame.menu = b.menu.clone();
        let mut out = Block { w, h, prims: vec![frame], nodes: Vec::new() };
        let mut cursor = pad;
        for (pos, k) in items {
            let centred_x = pad + (inner_w - k.w) / 2.0;
            let centred_y = pad + (inner_h - k.h) / 2.0;
            let (x, y) = match b.kind {
                BoxKind::HBox => {
                    let y = match pos {
                        Pos::Centre => centred_y,
                        Pos::Bot => pad + inner_h - k.h,
                        _ => pad,
                    };
                    let x = cursor;
                    cursor += k.w;
                    (x, y)
                }
                BoxKind::VBox => {
                    let x = match pos {
                        Pos::Centre => centred_x,
                        Pos::Right => pad + inner_w - k.w,
                        _ => pad,
                    };
                    let y = cursor;
                    cursor += k.h;
                    (x, y)
                }
                BoxKind::Box => match pos {
                    Pos::Align => (pad, pad),
                    Pos::Left => (pad, centred_y),
                    Pos::Right => (pad + inner_w - k.w, centred_y),
                    Pos::Top => (centred_x, pad),
                    Pos::Bot => (centred_x, pad + inner_h - k.h),
                    Pos::Centre => (centred_x, centred_y),
                },
            };
            k.place(x, y, &mut out.prims, &mut out.nodes);
        }
        out
    }

    fn tree(&mut self, root: &Nf, children: &[Nf], size: i64) -> Block {
        let r = self.block(root, size);
        let kids: Vec<Block> = children.iter().map(|c| self.block(c, size)).collect();
        let kids_w = kids.iter().map(|k| k.w).sum::<f64>() + TREE_GAP_X * kids.len().saturating_sub(1) as f64;
        let w = r.w.max(kids_w);
        let kids_h = kids.iter().map(|k| k.h).fold(0.0, f64::max);
        let h = if kids.is_empty() { r.h } else { r.h + TREE_GAP_Y + kids_h };
        let mut out = Block { w, h, prims: Vec::new(), nodes: Vec::new() };
        let root_x = (w - r.w) / 2.0;
        let (rcx, rby) = (root_x + r.w / 2.0, r.h);
        let child_y = r.h + TREE_GAP_Y;
        let mut x = (w - kids_w) / 2.0;
        let mut placed = Vec::new();
        for k in kids {
            let cx = x + k.w / 2.0;
            out.prims.push(Primitive::new(
                PrimKind::Line { x1: rcx, y1: rby, x2: cx, y2: child_y },
                Rect::new(rcx.min(cx), rby, (cx - rcx).abs(), TREE_GAP_Y),
            ));
            placed.push((x, k));
            x += placed.last().map_or(0.0, |(_, k): &(f64, Block)| k.w) + TREE_GAP_X;
        }
        r.place(root_x, 0.0, &mut out.prims, &mut out.nodes);
        for (x, k) in placed {
            k.place(x, child_y, &mut out.prims, &mut out.nodes);
        }
        out
    }

    fn thumbnail(&mut self, x: i64, y: i64, w: i64, h: i64, body: &Nf, size: i64) -> Block {
        self.thumbnail_depth += 1;
        let inner = self.block(body, size);
        self.thumbnail_depth -= 1;
        let s = thumbnail_scale(inner.w, inner.h, w as f64, h as f64);
        let mut out = Block { w: (x + w).max(0) as f64, h: (y + h).max(0) as f64, prims: Vec::new(), nodes: Vec::new() };
        for mut p in inner.prims {
            scale(&mut p, s);
            shift(&mut p, x as f64, y as f64);
            p.selectable = false;
            out.prims.push(p);
        }
        out
    }

    fn grid_cols(&self) -> usize {
        (((self.viewport.width - GRID_ORIGIN) / GRID_CELL).floor() as usize).max(1)
    }

    fn graph(&mut self, g: &GraphNf, size: i64) -> Block {
        let interactive = self.interactive();
        let graph_index = self.graphs.len();
        if interactive {
            self.graphs.push(g.edge_types.clone());
        }
        let cell_of = |(x, y): (f64, f64)| {
            (((x - GRID_ORIGIN) / GRID_CELL).floor() as i64, ((y - GRID_ORIGIN) / GRID_CELL).floor() as i64)
        };
        let mut occupied: HashSet<(i64, i64)> =
            g.nodes.iter().filter_map(|n| self.cache.positions.get(&n.id).copied()).map(cell_of).collect();
        let cols = self.grid_cols();
        let mut next_cell = 0usize;
        let mut node_blocks = Vec::new();
        for n in &g.nodes {
            let display = self.block(&n.display, size);
            let pos = match self.cache.positions.get(&n.id) {
                Some(&p) => p,
                None => loop {
                    let (c, r) = (next_cell % cols, next_cell / cols);
                    next_cell += 1;
                    if occupied.insert((c as i64, r as i64)) {
                        let p = (GRID_ORIGIN + c as f64 * GRID_CELL, GRID_ORIGIN + r as f64 * GRID_CELL);
                        if interactive {
                            self.placements.push((n.id.clone(), p));
                        }
                        break p;
                    }
                },
            };
            let rect = Rect::new(pos.0, pos.1, display.w, display.h);
            node_blocks.push((n, rect, display));
        }

        let mut out = Block::default();
        let mut extent = (0.0f64, 0.0f64);
        let mut grow = |r: &Rect| {
            extent.0 = extent.0.max(r.x + r.w);
            extent.1 = extent.1.max(r.y + r.h);
        };
        let rect_of = |abs: &Identity| node_blocks.iter().find(|(n, _, _)| &n.abstract_id == abs).map(|(_, r, _)| *r);
        for e in &g.edges {
            let (Some(sr), Some(tr)) = (rect_of(&e.source), rect_of(&e.target)) else { continue };
            let (sc, tc) = (sr.centre(), tr.centre());
            let a = anchor(&sr, sc, tc);
            let b = anchor(&tr, tc, sc);
            let mut line = Primitive::new(
                PrimKind::Line { x1: a.0, y1: a.1, x2: b.0, y2: b.1 },
                Rect::new(a.0.min(b.0), a.1.min(b.1), (a.0 - b.0).abs(), (a.1 - b.1).abs()),
            );
            line.concrete = Some(e.id.clone());
            line.selectable = interactive;
            out.prims.push(line);
            if e.target_dec == Decoration::Arrow {
                out.prims.push(arrowhead(a, b));
            }
            if e.source_dec == Decoration::Arrow {
                out.prims.push(arrowhead(b, a));
            }
            for l in &e.labels {
                let (at, other) = match l.end {
                    End::Source => (a, b),
                    End::Target => (b, a),
                };
                let px = at.0 + 0.2 * (other.0 - at.0) + 4.0;
                let py = at.1 + 0.2 * (other.1 - at.1) + 4.0;
                let lb = self.block(&l.body, size);
                grow(&Rect::new(px, py, lb.w, lb.h));
                lb.place(px, py, &mut out.prims, &mut out.nodes);
            }
        }
        for (n, rect, display) in node_blocks {
            grow(&rect);
            let mut frame = Primitive::new(PrimKind::NodeFrame { node_type: n.node_type.clone() }, rect);
            frame.concrete = Some(n.id.clone());
            frame.abstract_id = Some(n.abstract_id.clone());
            frame.selectable = interactive;
            out.prims.push(frame);
            let start = out.prims.len();
            display.place(rect.x, rect.y, &mut out.prims, &mut out.nodes);
            for p in &mut out.prims[start..] {
                if p.abstract_id.is_none() {
                    p.abstract_id = Some(n.abstract_id.clone());
                }
            }
            if interactive {
                out.nodes.push(SceneNode {
                    id: n.id.clone(),
                    abstract_id: n.abstract_id.clone(),
                    node_type: n.node_type.clone(),
                    rect,
                    graph: graph_index,
                });
            }
        }
        out.w = extent.0.max(0.0) + GRAPH_MARGIN;
        out.h = extent.1.max(0.0) + GRAPH_MARGIN;
        out
    }
}

/// Where the segment from `from` (inside `r`) towards `to` leaves `r`.
fn anchor(r: &Rect, from: (f64, f64), to: (f64, f64)) -> (f64, f64) {
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let tx = if dx.abs() > 0.0 { (r.w / 2.0) / dx.abs() } else { f64::INFINITY };
    let ty = if dy.abs() > 0.0 { (r.h / 2.0) / dy.abs() } else { f64::INFINITY };
    let t = tx.min(ty).min(1.0);
    if !t.is_finite() {
        return from;
    }
    (from.0 + t * dx, from.1 + t * dy)
}

/// Triangle with its tip at `tip`, pointing away from `from`.
fn arrowhead(from: (f64, f64), tip: (f64, f64)) -> Primitive {
    let (dx, dy) = (tip.0 - from.0, tip.1 - from.1);
    let len = (dx * dx + dy * dy).sqrt().max(f64::EPSILON);
    let (ux, uy) = (dx / len, dy / len);
    let base = (tip.0 - ux * ARROW_LEN, tip.1 - uy * ARROW_LEN);
    let half = ARROW_LEN / 2.0;
    let p1 = (base.0 - uy * half, base.1 + ux * half);
    let p2 = (base.0 + uy * half, base.1 - ux * half);
    let xs = [tip.0, p1.0, p2.0];
    let ys = [tip.1, p1.1, p2.1];
    let (minx, maxx) = (xs.iter().copied().fold(f64::MAX, f64::min), xs.iter().copied().fold(f64::MIN, f64::max));
    let (miny, maxy) = (ys.iter().copied().fold(f64::MAX, f64::min), ys.iter().copied().fold(f64::MIN, f64::max));
    Primitive::new(PrimKind::Arrowhead { points: [tip, p1, p2] }, Rect::new(minx, miny, maxx - minx, maxy - miny))
}
