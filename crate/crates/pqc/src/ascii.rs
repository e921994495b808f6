//! Deterministic ASCII circuit rendering: one row per wire track, time
//! flowing left to right. Controls print as `●`/`○`, crossings as `x`, and
//! conjugation (compute/uncompute) regions are delimited by `[` and `]`
//! columns. The uncompute half of a conjugation is rendered from the setup
//! items in reverse with a dagger marker.

use std::collections::HashMap;

use crate::circuit::{Circuit, ControlGadget, GateInstance, Item};
use crate::wire::Label;

#[derive(Default)]
struct Column {
    cells: HashMap<usize, String>,
    /// Tracks spanned by a vertical connector.
    connect: Option<(usize, usize)>,
}

struct Render {
    columns: Vec<Column>,
    /// track -> label currently riding it; None = free slot.
    tracks: Vec<Option<Label>>,
    /// Live range per track for wire drawing: (first_col, last_col).
    spans: Vec<Vec<(usize, usize)>>,
}

impl Render {
    fn track_of(&self, l: Label) -> Option<usize> {
        self.tracks.iter().position(|t| *t == Some(l))
    }

    fn open_track(&mut self, l: Label, col: usize) -> usize {
        let t = match self.tracks.iter().position(|t| t.is_none()) {
            Some(t) => {
                self.tracks[t] = Some(l);
                t
            }
            None => {
                self.tracks.push(Some(l));
                self.spans.push(Vec::new());
                self.tracks.len() - 1
            }
        };
        self.spans[t].push((col, col));
        t
    }

    fn touch(&mut self, t: usize, col: usize) {
        if let Some(last) = self.spans[t].last_mut() {
            last.1 = col;
        }
    }

    fn close_track(&mut self, t: usize, col: usize) {
        self.touch(t, col);
        self.tracks[t] = None;
    }

    fn rename(&mut self, t: usize, l: Label) {
        self.tracks[t] = Some(l);
    }

    fn push_gate(&mut self, g: &GateInstance, dagger_flip: bool) {
        let col_idx = self.columns.len();
        let mut column = Column::default();
        let mut involved = Vec::new();
        let daggered = g.daggered != dagger_flip;
        let name = if daggered {
            format!("[{}\u{2020}]", g.def.name)
        } else {
            format!("[{}]", g.def.name)
        };
        for (i, l) in g.ins.iter().enumerate() {
            if let Some(t) = self.track_of(*l) {
                involved.push(t);
                let cell = if i == 0 { name.clone() } else { "[#]".to_string() };
                column.cells.insert(t, cell);
            }
        }
        if g.ins.is_empty() {
            // Source gates open their track at this column.
            let t = self.open_track(g.outs[0], col_idx);
            involved.push(t);
            column.cells.insert(t, name.clone());
        }
        for (k, l) in &g.controls {
            if let Some(t) = self.track_of(*l) {
                involved.push(t);
                let dot = match k {
                    ControlGadget::Black => "\u{25cf}",
                    ControlGadget::White => "\u{25cb}",
                };
                column.cells.insert(t, dot.to_string());
            }
        }
        if involved.len() > 1 {
            let lo = *involved.iter().min().unwrap();
            let hi = *involved.iter().max().unwrap();
            column.connect = Some((lo, hi));
        }
        // Advance track labels: outputs replace inputs positionally, extra
        // inputs close their tracks, extra outputs open fresh ones.
        let (ins, outs): (&[Label], &[Label]) = if dagger_flip {
            (&g.outs, &g.ins)
        } else {
            (&g.ins, &g.outs)
        };
        let shared = ins.len().min(outs.len());
        for i in 0..shared {
            if let Some(t) = self.track_of(ins[i]) {
                self.touch(t, col_idx);
                self.rename(t, outs[i]);
            }
        }
        for l in ins.iter().skip(shared) {
            if let Some(t) = self.track_of(*l) {
                self.close_track(t, col_idx);
            }
        }
        for l in outs.iter().skip(shared) {
            if self.track_of(*l).is_none() {
                self.open_track(*l, col_idx);
            }
        }
        for t in 0..self.tracks.len() {
            if self.tracks[t].is_some() {
                self.touch(t, col_idx);
            }
        }
        self.columns.push(column);
    }

    fn push_marker(&mut self, tracks: &[usize], symbol: &str) {
        let col_idx = self.columns.len();
        let mut column = Column::default();
        for &t in tracks {
            column.cells.insert(t, symbol.to_string());
        }
        if tracks.len() > 1 {
            let lo = *tracks.iter().min().unwrap();
            let hi = *tracks.iter().max().unwrap();
            column.connect = Some((lo, hi));
        }
        for t in 0..self.tracks.len() {
            if self.tracks[t].is_some() {
                self.touch(t, col_idx);
            }
        }
        self.columns.push(column);
    }

    fn walk(&mut self, c: &Circuit, attach: &[Label], dagger_flip: bool) {
        // Map the circuit's own input labels onto the live attached labels.
        let mut map: HashMap<Label, Label> = HashMap::new();
        let (iface, items): (Vec<Label>, Box<dyn Iterator<Item = &Item>>) = if dagger_flip {
            (
                c.outputs.iter().map(|(l, _)| *l).collect(),
                Box::new(c.items.iter().rev()),
            )
        } else {
            (
                c.inputs.iter().map(|(l, _)| *l).collect(),
                Box::new(c.items.iter()),
            )
        };
        for (inner, outer) in iface.iter().zip(attach.iter()) {
            map.insert(*inner, *outer);
            if let Some(t) = self.track_of(*outer) {
                self.rename(t, *inner);
            }
        }
        for item in items {
            match item {
                Item::Gate(g) => self.push_gate(g, dagger_flip),
                Item::Perm(p) => {
                    let moved: Vec<usize> = p
                        .inputs
                        .iter()
                        .zip(p.outputs.iter())
                        .enumerate()
                        .filter(|(j, _)| {
                            p.outputs.get(*j) != p.inputs.get(*j)
                        })
                        .filter_map(|(_, (l, _))| self.track_of(*l))
                        .collect();
                    if !moved.is_empty() {
                        self.push_marker(&moved, "x");
                    }
                }
                Item::Conj { setup, body } => {
                    let span: Vec<usize> = setup
                        .inputs
                        .iter()
                        .filter_map(|(l, _)| self.track_of(*l))
                        .collect();
                    self.push_marker(&span, "[");
                    let attach_in: Vec<Label> = setup.inputs.iter().map(|(l, _)| *l).collect();
                    self.walk(setup, &attach_in, false);
                    let mids: Vec<usize> = setup
                        .outputs
                        .iter()
                        .filter_map(|(l, _)| self.track_of(*l))
                        .collect();
                    self.push_marker(&mids, "]");
                    let body_attach: Vec<Label> = setup.outputs.iter().map(|(l, _)| *l).collect();
                    self.walk(body, &body_attach, false);
                    let mids: Vec<usize> = body
                        .outputs
                        .iter()
                        .filter_map(|(l, _)| self.track_of(*l))
                        .collect();
                    self.push_marker(&mids, "[");
                    let back_attach: Vec<Label> = body.outputs.iter().map(|(l, _)| *l).collect();
                    self.walk(setup, &back_attach, true);
                    let ends: Vec<usize> = setup
                        .inputs
                        .iter()
                        .filter_map(|(l, _)| self.track_of(*l))
                        .collect();
                    self.push_marker(&ends, "]");
                }
            }
        }
    }
}

/// Renders the circuit as a fixed-width diagram. The output is stable for a
/// given circuit, making it suitable for golden tests.
pub fn render(c: &Circuit) -> String {
    let mut r = Render {
        columns: Vec::new(),
        tracks: Vec::new(),
        spans: Vec::new(),
    };
    for (l, _) in &c.inputs {
        r.open_track(*l, 0);
    }
    let attach: Vec<Label> = c.inputs.iter().map(|(l, _)| *l).collect();
    r.walk(c, &attach, false);
    let end_col = r.columns.len();
    for t in 0..r.tracks.len() {
        if r.tracks[t].is_some() {
            r.touch(t, end_col);
        }
    }

    let widths: Vec<usize> = r
        .columns
        .iter()
        .map(|col| col.cells.values().map(|s| display_width(s)).max().unwrap_or(1))
        .collect();
    let n_tracks = r.tracks.len().max(r.spans.len());
    let mut lines = Vec::with_capacity(n_tracks);
    for t in 0..n_tracks {
        let mut line = String::new();
        let live_at = |col: usize| {
            r.spans
                .get(t)
                .map(|spans| spans.iter().any(|(a, b)| *a <= col && col < *b))
                .unwrap_or(false)
        };
        let starts_at = |col: usize| {
            r.spans
                .get(t)
                .map(|spans| spans.iter().any(|(a, b)| *a == col && *b >= *a))
                .unwrap_or(false)
        };
        line.push_str(if live_at(0) || starts_at(0) { "-" } else { " " });
        for (i, col) in r.columns.iter().enumerate() {
            let wire = live_at(i);
            let cell = match col.cells.get(&t) {
                Some(s) => s.clone(),
                None => {
                    let bar = col
                        .connect
                        .map(|(lo, hi)| lo < t && t < hi)
                        .unwrap_or(false);
                    if bar {
                        "|".to_string()
                    } else if wire {
                        "-".to_string()
                    } else {
                        " ".to_string()
                    }
                }
            };
            let pad = widths[i].saturating_sub(display_width(&cell));
            let left = pad / 2;
            let right = pad - left;
            let fill = if wire { '-' } else { ' ' };
            for _ in 0..left {
                line.push(fill);
            }
            line.push_str(&cell);
            for _ in 0..right {
                line.push(fill);
            }
            line.push(if wire { '-' } else { ' ' });
        }
        lines.push(line.trim_end().to_string());
    }
    let mut out = String::new();
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn display_width(s: &str) -> usize {
    s.chars().count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, ControlSpec};
    use crate::signature::default_gateset;
    use crate::transform::{control, with_computed};
    use crate::wire::{FreshSupply, SimpleType, WireType};

    #[test]
    fn renders_controls_and_brackets() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let init = Circuit::from_gate(gs.lookup("Init0").unwrap(), false, &mut supply);
        let t = Circuit::from_gate(gs.lookup("T").unwrap(), false, &mut supply);
        let wc = with_computed(&init, &t, &mut supply).unwrap();
        let ctrl = control(&wc, &ControlSpec::black(), &gs, &mut supply).unwrap();
        let text = render(&ctrl);
        assert!(text.contains('\u{25cf}'), "control dot:\n{text}");
        assert!(text.contains('['), "conjugation bracket:\n{text}");
        assert!(text.contains("[T]"), "body gate:\n{text}");
        assert!(text.contains("[Init0]"), "setup gate:\n{text}");
        assert!(text.contains("[Init0\u{2020}]"), "uncompute marker:\n{text}");
    }

    #[test]
    fn rendering_is_deterministic() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let q2 = SimpleType::wires(&WireType::qubit(), 2);
        let mut b = CircuitBuilder::new(&gs, &q2, &mut supply);
        b.gate("H", &[0]).reorder(&[1, 0]).gate("CNOT", &[0, 1]);
        let c = b.finish();
        let first = render(&c);
        let second = render(&c);
        assert_eq!(first, second);
        assert!(first.contains('x'), "crossing marker:\n{first}");
    }
}
