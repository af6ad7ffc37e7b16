//! Parameter access shared by the single-threaded tables and the lock-free
//! parallel mode. Update kernels gather rows, compute every gradient from the
//! gathered (pre-step) values, then scatter scaled deltas back.

use std::sync::atomic::{AtomicU64, Ordering};

pub(crate) trait ParamAccess {
    /// Length of an input block: `d` for vectors, `m·d` for sense matrices.
    fn input_len(&self) -> usize;
    fn dim(&self) -> usize;
    fn read_input(&self, id: u32, out: &mut [f64]);
    fn read_output(&self, id: u32, out: &mut [f64]);
    /// Adds `scale·delta` to the input block of `id` starting at `offset`.
    fn add_input(&mut self, id: u32, offset: usize, scale: f64, delta: &[f64]);
    fn add_output(&mut self, id: u32, scale: f64, delta: &[f64]);
}

#[derive(Debug, Default)]
pub(crate) struct Scratch {
    pub input: Vec<f64>,
    pub grad_input: Vec<f64>,
    pub outputs: Vec<f64>,
    pub context_sum: Vec<f64>,
    pub coeffs: Vec<f64>,
}

impl Scratch {
    pub fn prepare(&mut self, input_len: usize, d: usize, n_outputs: usize) {
        self.input.resize(input_len, 0.0);
        self.grad_input.clear();
        self.grad_input.resize(input_len, 0.0);
        self.outputs.resize(n_outputs * d, 0.0);
        self.context_sum.clear();
        self.context_sum.resize(d, 0.0);
        self.coeffs.clear();
    }
}

/// Tables stored as `f64` bit patterns in atomics. Concurrent writers may
/// lose updates but every stored value is a complete `f64`.
#[derive(Debug)]
pub(crate) struct AtomicTables {
    input_len: usize,
    dim: usize,
    input: Vec<AtomicU64>,
    output: Vec<AtomicU64>,
}

impl AtomicTables {
    pub fn new(input_len: usize, dim: usize, input: &[f64], output: &[f64]) -> Self {
        let wrap = |xs: &[f64]| xs.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        Self {
            input_len,
            dim,
            input: wrap(input),
            output: wrap(output),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        let unwrap = |xs: Vec<AtomicU64>| {
            xs.into_iter()
                .map(|a| f64::from_bits(a.into_inner()))
                .collect()
        };
        (unwrap(self.input), unwrap(self.output))
    }

    pub fn view(&self) -> AtomicView<'_> {
        AtomicView { tables: self }
    }
}

pub(crate) struct AtomicView<'a> {
    tables: &'a AtomicTables,
}

fn load(cells: &[AtomicU64], out: &mut [f64]) {
    for (o, c) in out.iter_mut().zip(cells) {
        *o = f64::from_bits(c.load(Ordering::Relaxed));
    }
}

fn add(cells: &[AtomicU64], scale: f64, delta: &[f64]) {
    for (c, g) in cells.iter().zip(delta) {
        let old = f64::from_bits(c.load(Ordering::Relaxed));
        c.store((old + scale * g).to_bits(), Ordering::Relaxed);
    }
}

impl ParamAccess for AtomicView<'_> {
    fn input_len(&self) -> usize {
        self.tables.input_len
    }

    fn dim(&self) -> usize {
        self.tables.dim
    }

    fn read_input(&self, id: u32, out: &mut [f64]) {
        let n = self.tables.input_len;
        load(
            &self.tables.input[id as usize * n..(id as usize + 1) * n],
            out,
        );
    }

    fn read_output(&self, id: u32, out: &mut [f64]) {
        let d = self.tables.dim;
        load(
            &self.tables.output[id as usize * d..(id as usize + 1) * d],
            out,
        );
    }

    fn add_input(&mut self, id: u32, offset: usize, scale: f64, delta: &[f64]) {
        let start = id as usize * self.tables.input_len + offset;
        add(&self.tables.input[start..start + delta.len()], scale, delta);
    }

    fn add_output(&mut self, id: u32, scale: f64, delta: &[f64]) {
        let d = self.tables.dim;
        add(
            &self.tables.output[id as usize * d..(id as usize + 1) * d],
            scale,
            delta,
        );
    }
}
