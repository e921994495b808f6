//! Dense linear-map semantics for circuits: the brute-force oracle behind
//! the semantic tests and the `sim` command.
//!
//! Wire-to-bit ordering is big-endian: the first interface wire is the most
//! significant bit of the basis index. Matrix building is deterministic; the
//! heavy kernels run data-parallel under the `parallel` feature and fall
//! back to plain loops without it.

use std::fmt;

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, ControlGadget, ControlSpec, GateInstance, Item};
use crate::signature::GateDef;
use crate::wire::{Label, WireType};

/// Matrix sizes (rows * inner * cols) from which the parallel kernels kick
/// in. Small products are cheaper single-threaded.
#[cfg(feature = "parallel")]
const PAR_WORK_THRESHOLD: usize = 1 << 15;

pub const DEFAULT_WIRE_CAP: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("gate {0} has no registered matrix")]
    UnsupportedGate(String),
    #[error("wire type {0} has no vector-space interpretation")]
    UnsupportedWire(String),
    #[error("circuit needs {width} wires, over the cap of {cap}")]
    DimensionCap { width: usize, cap: usize },
    #[error("matrix shapes do not agree")]
    ShapeMismatch,
    #[error("controlled map requires a square matrix")]
    NotSquare,
    #[error("malformed circuit: {0}")]
    InvalidCircuit(String),
}

/// A dense complex matrix of shape `2^m x 2^n`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl LinearMap {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> LinearMap {
        assert!(rows.is_power_of_two() || rows == 1);
        assert!(cols.is_power_of_two() || cols == 1);
        assert_eq!(data.len(), rows * cols);
        LinearMap { rows, cols, data }
    }

    pub fn identity(dim: usize) -> LinearMap {
        let mut data = vec![zero(); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = one();
        }
        LinearMap::new(dim, dim, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> LinearMap {
        let mut data = vec![zero(); self.data.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        LinearMap::new(self.cols, self.rows, data)
    }

    /// Kronecker product, `self` on the most significant side.
    pub fn kron(&self, other: &LinearMap) -> LinearMap {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = vec![zero(); rows * cols];
        for ar in 0..self.rows {
            for ac in 0..self.cols {
                let a = self.data[ar * self.cols + ac];
                if a == zero() {
                    continue;
                }
                for br in 0..other.rows {
                    for bc in 0..other.cols {
                        data[(ar * other.rows + br) * cols + (ac * other.cols + bc)] =
                            a * other.data[br * other.cols + bc];
                    }
                }
            }
        }
        LinearMap::new(rows, cols, data)
    }

    pub fn add(&self, other: &LinearMap) -> Result<LinearMap, SimError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SimError::ShapeMismatch);
        }
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a + b)
            .collect();
        Ok(LinearMap::new(self.rows, self.cols, data))
    }

    pub fn sub(&self, other: &LinearMap) -> Result<LinearMap, SimError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SimError::ShapeMismatch);
        }
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a - b)
            .collect();
        Ok(LinearMap::new(self.rows, self.cols, data))
    }

    /// Matrix product `self * rhs`. Dispatches to the parallel kernel when
    /// the `parallel` feature is on and the product is large enough; the
    /// result is bit-identical either way.
    pub fn mul(&self, rhs: &LinearMap) -> Result<LinearMap, SimError> {
        if self.cols != rhs.rows {
            return Err(SimError::ShapeMismatch);
        }
        #[cfg(feature = "parallel")]
        if self.rows * self.cols * rhs.cols >= PAR_WORK_THRESHOLD {
            let mut data = vec![zero(); self.rows * rhs.cols];
            data.par_chunks_mut(rhs.cols.max(1))
                .enumerate()
                .for_each(|(r, out)| mul_row(&self.data, &rhs.data, self.cols, rhs.cols, r, out));
            return Ok(LinearMap::new(self.rows, rhs.cols, data));
        }
        self.mul_seq(rhs)
    }

    /// Single-threaded matrix product; always available for comparison and
    /// debugging.
    pub fn mul_seq(&self, rhs: &LinearMap) -> Result<LinearMap, SimError> {
        if self.cols != rhs.rows {
            return Err(SimError::ShapeMismatch);
        }
        let mut data = vec![zero(); self.rows * rhs.cols];
        for (r, out) in data.chunks_mut(rhs.cols.max(1)).enumerate() {
            mul_row(&self.data, &rhs.data, self.cols, rhs.cols, r, out);
        }
        Ok(LinearMap::new(self.rows, rhs.cols, data))
    }

    pub fn max_abs_diff(&self, other: &LinearMap) -> Result<f64, SimError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SimError::ShapeMismatch);
        }
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn mul_row(a: &[Complex64], b: &[Complex64], inner: usize, cols: usize, row: usize, out: &mut [Complex64]) {
    for k in 0..inner {
        let x = a[row * inner + k];
        if x == zero() {
            continue;
        }
        let brow = &b[k * cols..(k + 1) * cols];
        for (o, y) in out.iter_mut().zip(brow.iter()) {
            *o += x * y;
        }
    }
}

/// Entry-wise comparison with an absolute tolerance. No global-phase
/// quotient: adjoints are exact, so composed circuits preserve phase.
pub fn maps_equal(a: &LinearMap, b: &LinearMap, tol: f64) -> Result<bool, SimError> {
    Ok(a.max_abs_diff(b)? <= tol)
}

/// `P_K (x) U + (I - P_K) (x) I`, where `P_K` projects onto the firing
/// subspace of the control gadgets (|1><1| for black, |0><0| for white).
pub fn controlled_map(spec: &ControlSpec, u: &LinearMap) -> Result<LinearMap, SimError> {
    if !u.is_square() {
        return Err(SimError::NotSquare);
    }
    if spec.is_empty() {
        return Ok(u.clone());
    }
    let mut proj = LinearMap::identity(1);
    for gadget in &spec.gadgets {
        let p = match gadget {
            ControlGadget::Black => {
                LinearMap::new(2, 2, vec![zero(), zero(), zero(), one()])
            }
            ControlGadget::White => {
                LinearMap::new(2, 2, vec![one(), zero(), zero(), zero()])
            }
        };
        proj = proj.kron(&p);
    }
    let dim = 1usize << spec.len();
    let fire = proj.kron(u);
    let idle = LinearMap::identity(dim)
        .sub(&proj)?
        .kron(&LinearMap::identity(u.rows()));
    fire.add(&idle)
}

/// The matrix of one built-in gate (before dagger/controls). User-declared
/// gates and the measurement family have no matrix.
pub fn base_matrix(def: &GateDef) -> Option<LinearMap> {
    let q = WireType::qubit();
    let all_qubits =
        def.inputs.iter().all(|w| *w == q) && def.outputs.iter().all(|w| *w == q);
    if !all_qubits {
        return None;
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::new(0.0, 1.0);
    let t_phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let m = |rows, cols, entries: Vec<Complex64>| Some(LinearMap::new(rows, cols, entries));
    let re = |x: f64| Complex64::new(x, 0.0);
    match (def.name.as_str(), def.arity_in(), def.arity_out()) {
        ("X", 1, 1) => m(2, 2, vec![zero(), one(), one(), zero()]),
        ("Y", 1, 1) => m(2, 2, vec![zero(), -i, i, zero()]),
        ("Z", 1, 1) => m(2, 2, vec![one(), zero(), zero(), re(-1.0)]),
        ("H", 1, 1) => m(2, 2, vec![re(s), re(s), re(s), re(-s)]),
        ("S", 1, 1) => m(2, 2, vec![one(), zero(), zero(), i]),
        ("T", 1, 1) => m(2, 2, vec![one(), zero(), zero(), t_phase]),
        ("CNOT", 2, 2) => {
            let mut data = vec![zero(); 16];
            for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                data[r * 4 + c] = one();
            }
            m(4, 4, data)
        }
        ("CZ", 2, 2) => {
            let mut data = vec![zero(); 16];
            for r in 0..4 {
                data[r * 4 + r] = if r == 3 { re(-1.0) } else { one() };
            }
            m(4, 4, data)
        }
        ("SWAP", 2, 2) => {
            let mut data = vec![zero(); 16];
            for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                data[r * 4 + c] = one();
            }
            m(4, 4, data)
        }
        ("Init0", 0, 1) => m(2, 1, vec![one(), zero()]),
        ("Init1", 0, 1) => m(2, 1, vec![zero(), one()]),
        ("Term0", 1, 0) => m(1, 2, vec![one(), zero()]),
        ("Term1", 1, 0) => m(1, 2, vec![zero(), one()]),
        _ => None,
    }
}

fn instance_matrix(g: &GateInstance) -> Result<LinearMap, SimError> {
    let base = base_matrix(&g.def).ok_or_else(|| SimError::UnsupportedGate(g.def.name.clone()))?;
    let base = if g.daggered { base.dagger() } else { base };
    if g.controls.is_empty() {
        Ok(base)
    } else {
        let spec = ControlSpec::new(g.controls.iter().map(|(k, _)| *k).collect());
        controlled_map(&spec, &base)
    }
}

/// The permutation matrix on `n` wires sending the wire at old position
/// `order[j]` to position `j`. Useful for comparing maps up to wire
/// reordering.
pub fn wire_permutation_map(n: usize, order: &[usize]) -> LinearMap {
    assert_eq!(order.len(), n);
    let dim = 1usize << n;
    let mut data = vec![zero(); dim * dim];
    for col in 0..dim {
        let mut row = 0usize;
        for (j, &src) in order.iter().enumerate() {
            let bit = (col >> (n - 1 - src)) & 1;
            row |= bit << (n - 1 - j);
        }
        data[row * dim + col] = one();
    }
    LinearMap::new(dim, dim, data)
}

struct Fold {
    live: Vec<(Label, WireType)>,
    map: LinearMap,
    cap: usize,
}

impl Fold {
    fn check_width(&self) -> Result<(), SimError> {
        if self.live.len() > self.cap {
            return Err(SimError::DimensionCap {
                width: self.live.len(),
                cap: self.cap,
            });
        }
        Ok(())
    }

    fn position(&self, l: Label) -> Result<usize, SimError> {
        self.live
            .iter()
            .position(|(x, _)| *x == l)
            .ok_or_else(|| SimError::InvalidCircuit(format!("label {l} is not live")))
    }

    /// Reorders the rows of `map` so the live list takes `target` order.
    fn reorder_to(&mut self, target: Vec<(Label, WireType)>) -> Result<(), SimError> {
        if target == self.live {
            return Ok(());
        }
        let order: Vec<usize> = target
            .iter()
            .map(|(l, _)| self.position(*l))
            .collect::<Result<_, _>>()?;
        let n = self.live.len();
        let rows = self.map.rows;
        let cols = self.map.cols;
        let mut data = vec![zero(); rows * cols];
        for old_row in 0..rows {
            let mut new_row = 0usize;
            for (j, &src) in order.iter().enumerate() {
                let bit = (old_row >> (n - 1 - src)) & 1;
                new_row |= bit << (n - 1 - j);
            }
            data[new_row * cols..(new_row + 1) * cols]
                .copy_from_slice(&self.map.data[old_row * cols..(old_row + 1) * cols]);
        }
        self.map = LinearMap::new(rows, cols, data);
        self.live = target;
        Ok(())
    }

    /// Applies `u` to the front (most significant) wires: consumes
    /// `consumed` wires and leaves `produced` in their place at the front.
    fn apply_front(&mut self, u: &LinearMap, consumed: usize, produced: usize) {
        let rest = self.live.len() - consumed;
        let rest_dim = 1usize << rest;
        debug_assert_eq!(u.cols, 1usize << consumed);
        debug_assert_eq!(u.rows, 1usize << produced);
        let cols = self.map.cols;
        let out_rows = u.rows * rest_dim;
        let mut data = vec![zero(); out_rows * cols];
        let kernel = |out_row: usize, out: &mut [Complex64]| {
            let u_out = out_row / rest_dim;
            let r = out_row % rest_dim;
            for u_in in 0..u.cols {
                let coeff = u.data[u_out * u.cols + u_in];
                if coeff == zero() {
                    continue;
                }
                let src = &self.map.data[(u_in * rest_dim + r) * cols..][..cols];
                for (o, s) in out.iter_mut().zip(src.iter()) {
                    *o += coeff * s;
                }
            }
        };
        #[cfg(feature = "parallel")]
        if out_rows * cols * u.cols >= PAR_WORK_THRESHOLD {
            data.par_chunks_mut(cols.max(1))
                .enumerate()
                .for_each(|(r, out)| kernel(r, out));
            self.map = LinearMap::new(out_rows, cols, data);
            return;
        }
        for (r, out) in data.chunks_mut(cols.max(1)).enumerate() {
            kernel(r, out);
        }
        self.map = LinearMap::new(out_rows, cols, data);
    }
}

/// Builds the dense matrix of a circuit by folding over its items. Gates are
/// embedded at their wire positions; crossings become basis permutations;
/// conjugation nodes compose `setup† * body * setup` recursively.
pub fn circuit_to_map(c: &Circuit, cap: usize) -> Result<LinearMap, SimError> {
    for (_, w) in c.inputs.iter().chain(c.outputs.iter()) {
        if !w.is_qubit() {
            return Err(SimError::UnsupportedWire(w.name().to_string()));
        }
    }
    let width = c.inputs.len();
    let mut fold = Fold {
        live: c.inputs.clone(),
        map: LinearMap::identity(1 << width),
        cap,
    };
    fold.check_width()?;

    for item in &c.items {
        match item {
            Item::Gate(g) => {
                for w in &g.def.outputs {
                    if !w.is_qubit() {
                        return Err(SimError::UnsupportedWire(w.name().to_string()));
                    }
                }
                let u = instance_matrix(g)?;
                // Target live list after the gate, by the positional rule.
                let mut target = fold.live.clone();
                let positions: Vec<usize> = g
                    .ins
                    .iter()
                    .map(|l| fold.position(*l))
                    .collect::<Result<_, _>>()?;
                let shared = g.ins.len().min(g.outs.len());
                for i in 0..shared {
                    target[positions[i]] = (g.outs[i], g.def.outputs[i].clone());
                }
                if g.ins.len() > g.outs.len() {
                    let mut extra: Vec<usize> = positions[shared..].to_vec();
                    extra.sort_unstable_by(|a, b| b.cmp(a));
                    for p in extra {
                        target.remove(p);
                    }
                } else {
                    for i in shared..g.outs.len() {
                        target.push((g.outs[i], g.def.outputs[i].clone()));
                    }
                }
                if target.len() > fold.cap {
                    return Err(SimError::DimensionCap {
                        width: target.len(),
                        cap: fold.cap,
                    });
                }

                // Bring control and input wires to the front, in gate order.
                let mut front: Vec<(Label, WireType)> = Vec::new();
                for (_, l) in &g.controls {
                    front.push(fold.live[fold.position(*l)?].clone());
                }
                for l in &g.ins {
                    front.push(fold.live[fold.position(*l)?].clone());
                }
                let mut rest: Vec<(Label, WireType)> = fold
                    .live
                    .iter()
                    .filter(|(l, _)| !front.iter().any(|(f, _)| f == l))
                    .cloned()
                    .collect();
                let mut front_order = front.clone();
                front_order.append(&mut rest);
                fold.reorder_to(front_order)?;

                let consumed = g.controls.len() + g.ins.len();
                let produced = g.controls.len() + g.outs.len();
                fold.apply_front(&u, consumed, produced);
                // apply_front leaves [controls..., outs..., rest...].
                let mut after: Vec<(Label, WireType)> = Vec::new();
                for (_, l) in &g.controls {
                    // Control labels were at the front and are unchanged.
                    after.push(fold.live[..g.controls.len() + g.ins.len()]
                        .iter()
                        .find(|(x, _)| x == l)
                        .cloned()
                        .ok_or_else(|| {
                            SimError::InvalidCircuit(format!("control label {l} lost"))
                        })?);
                }
                for (i, l) in g.outs.iter().enumerate() {
                    after.push((*l, g.def.outputs[i].clone()));
                }
                after.extend(fold.live[g.controls.len() + g.ins.len()..].iter().cloned());
                fold.live = after;
                fold.reorder_to(target)?;
            }
            Item::Perm(p) => {
                let target: Vec<(Label, WireType)> = p
                    .outputs
                    .iter()
                    .map(|l| fold.position(*l).map(|i| fold.live[i].clone()))
                    .collect::<Result<_, _>>()?;
                fold.reorder_to(target)?;
            }
            Item::Conj { setup, body } => {
                let m_setup = circuit_to_map(setup, cap)?;
                let m_body = circuit_to_map(body, cap)?;
                let node = m_setup.dagger().mul(&m_body.mul(&m_setup)?)?;
                let front: Vec<(Label, WireType)> = setup
                    .inputs
                    .iter()
                    .map(|(l, _)| fold.position(*l).map(|i| fold.live[i].clone()))
                    .collect::<Result<_, _>>()?;
                let target = fold.live.clone();
                let mut order = front.clone();
                order.extend(
                    fold.live
                        .iter()
                        .filter(|(l, _)| !front.iter().any(|(f, _)| f == l))
                        .cloned(),
                );
                fold.reorder_to(order)?;
                let span = setup.inputs.len();
                fold.apply_front(&node, span, span);
                fold.reorder_to(target)?;
            }
        }
        fold.check_width()?;
    }

    let target: Vec<(Label, WireType)> = c.outputs.clone();
    fold.reorder_to(target)
        .map_err(|_| SimError::InvalidCircuit("outputs do not match live wires".into()))?;
    Ok(fold.map)
}

impl fmt::Display for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, "  ")?;
                }
                let v = self.get(r, c);
                write!(f, "{:+.6}{:+.6}i", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, ControlSpec};
    use crate::signature::default_gateset;
    use crate::transform::{dagger, with_computed};
    use crate::wire::{FreshSupply, SimpleType};

    fn qubits(n: usize) -> SimpleType {
        SimpleType::wires(&WireType::qubit(), n)
    }

    #[test]
    fn hadamard_matrix() {
        let gs = default_gateset();
        let h = base_matrix(gs.lookup("H").unwrap()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h.get(0, 0).re - s).abs() < 1e-12);
        assert!((h.get(1, 1).re + s).abs() < 1e-12);
    }

    #[test]
    fn identity_circuit_is_identity_map() {
        let mut supply = FreshSupply::new();
        let id = Circuit::identity(&qubits(2), &mut supply);
        let m = circuit_to_map(&id, DEFAULT_WIRE_CAP).unwrap();
        assert!(maps_equal(&m, &LinearMap::identity(4), 0.0).unwrap());
    }

    #[test]
    fn cnot_is_big_endian() {
        // First interface wire is the most significant bit, so |10> -> |11>.
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let mut b = CircuitBuilder::new(&gs, &qubits(2), &mut supply);
        b.gate("CNOT", &[0, 1]);
        let m = circuit_to_map(&b.finish(), DEFAULT_WIRE_CAP).unwrap();
        assert_eq!(m.get(3, 2), Complex64::new(1.0, 0.0));
        assert_eq!(m.get(2, 3), Complex64::new(1.0, 0.0));
        assert_eq!(m.get(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(m.get(2, 2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn h_then_h_is_identity() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let h = Circuit::from_gate(gs.lookup("H").unwrap(), false, &mut supply);
        let hh = h.compose(&h, &mut supply).unwrap();
        let m = circuit_to_map(&hh, DEFAULT_WIRE_CAP).unwrap();
        // Oracle route: multiply the gate matrices directly.
        let hmat = base_matrix(gs.lookup("H").unwrap()).unwrap();
        let expect = hmat.mul(&hmat).unwrap();
        assert!(maps_equal(&m, &expect, 1e-12).unwrap());
        assert!(maps_equal(&m, &LinearMap::identity(2), 1e-12).unwrap());
    }

    #[test]
    fn init_then_term_is_scalar_one() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let init = Circuit::from_gate(gs.lookup("Init0").unwrap(), false, &mut supply);
        let term = Circuit::from_gate(gs.lookup("Term0").unwrap(), false, &mut supply);
        let c = init.compose(&term, &mut supply).unwrap();
        let m = circuit_to_map(&c, DEFAULT_WIRE_CAP).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 1));
        assert!((m.get(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn tensor_is_kronecker() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let x = Circuit::from_gate(gs.lookup("X").unwrap(), false, &mut supply);
        let xx = x.tensor(&x, &mut supply);
        let m = circuit_to_map(&xx, DEFAULT_WIRE_CAP).unwrap();
        let xmat = base_matrix(gs.lookup("X").unwrap()).unwrap();
        let expect = xmat.kron(&xmat);
        assert!(maps_equal(&m, &expect, 1e-12).unwrap());
    }

    #[test]
    fn controlled_map_examples() {
        let gs = default_gateset();
        let x = base_matrix(gs.lookup("X").unwrap()).unwrap();
        let cx = controlled_map(&ControlSpec::black(), &x).unwrap();
        let expect = base_matrix(gs.lookup("CNOT").unwrap()).unwrap();
        assert!(maps_equal(&cx, &expect, 0.0).unwrap());

        let trivial = controlled_map(&ControlSpec::empty(), &x).unwrap();
        assert!(maps_equal(&trivial, &x, 0.0).unwrap());

        let white = controlled_map(
            &ControlSpec::new(vec![ControlGadget::White]),
            &x,
        )
        .unwrap();
        // Fires on the |0> block: top-left block is X.
        assert_eq!(white.get(0, 1), Complex64::new(1.0, 0.0));
        assert_eq!(white.get(1, 0), Complex64::new(1.0, 0.0));
        assert_eq!(white.get(2, 2), Complex64::new(1.0, 0.0));
        assert_eq!(white.get(3, 3), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn maps_equal_basics() {
        let i2 = LinearMap::identity(2);
        assert!(maps_equal(&i2, &i2, 0.0).unwrap());
        let gs = default_gateset();
        let x = base_matrix(gs.lookup("X").unwrap()).unwrap();
        let z = base_matrix(gs.lookup("Z").unwrap()).unwrap();
        assert!(!maps_equal(&x, &z, 1e-12).unwrap());
        assert_eq!(
            maps_equal(&i2, &LinearMap::identity(4), 0.0).unwrap_err(),
            SimError::ShapeMismatch
        );
    }

    #[test]
    fn dagger_matches_conjugate_transpose() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let mut b = CircuitBuilder::new(&gs, &qubits(2), &mut supply);
        b.gate("T", &[0]).gate("CNOT", &[0, 1]).gate("S", &[1]);
        let c = b.finish();
        let m = circuit_to_map(&c, DEFAULT_WIRE_CAP).unwrap();
        let md = circuit_to_map(&dagger(&c, &gs).unwrap(), DEFAULT_WIRE_CAP).unwrap();
        assert!(maps_equal(&md, &m.dagger(), 1e-12).unwrap());
    }

    #[test]
    fn conjugation_node_composes_setup_body_adjoint() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let h = Circuit::from_gate(gs.lookup("H").unwrap(), false, &mut supply);
        let x = Circuit::from_gate(gs.lookup("X").unwrap(), false, &mut supply);
        let wc = with_computed(&h, &x, &mut supply).unwrap();
        let m = circuit_to_map(&wc, DEFAULT_WIRE_CAP).unwrap();
        // H X H = Z.
        let z = base_matrix(gs.lookup("Z").unwrap()).unwrap();
        assert!(maps_equal(&m, &z, 1e-12).unwrap());
    }

    #[test]
    fn meas_circuit_is_unsupported() {
        let gs = default_gateset();
        let mut supply = FreshSupply::new();
        let mut b = CircuitBuilder::new(&gs, &qubits(1), &mut supply);
        b.gate("Meas", &[0]);
        let err = circuit_to_map(&b.finish(), DEFAULT_WIRE_CAP).unwrap_err();
        assert!(matches!(err, SimError::UnsupportedWire(_) | SimError::UnsupportedGate(_)));
    }

    #[test]
    fn wire_cap_is_enforced() {
        let mut supply = FreshSupply::new();
        let id = Circuit::identity(&qubits(4), &mut supply);
        let err = circuit_to_map(&id, 3).unwrap_err();
        assert_eq!(err, SimError::DimensionCap { width: 4, cap: 3 });
    }

    #[test]
    fn mul_seq_and_mul_agree() {
        let gs = default_gateset();
        let h = base_matrix(gs.lookup("H").unwrap()).unwrap();
        let t = base_matrix(gs.lookup("T").unwrap()).unwrap();
        let mut a = h.kron(&t);
        let mut b = t.kron(&h);
        // Grow to 64x64 so the parallel path is exercised when enabled.
        for _ in 0..4 {
            a = a.kron(&LinearMap::identity(2));
            b = b.kron(&LinearMap::identity(2));
        }
        let fast = a.mul(&b).unwrap();
        let slow = a.mul_seq(&b).unwrap();
        assert_eq!(fast, slow);
    }

    #[test]
    fn wire_permutation_map_swaps_blocks() {
        let m = wire_permutation_map(2, &[1, 0]);
        let gs = default_gateset();
        let swap = base_matrix(gs.lookup("SWAP").unwrap()).unwrap();
        assert!(maps_equal(&m, &swap, 0.0).unwrap());
    }
}
