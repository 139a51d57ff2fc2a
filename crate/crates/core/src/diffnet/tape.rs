//! Scalar reverse-mode tape.
//!
//! Every arithmetic operation on a [`Var`] appends a node holding up to two
//! parent indices and the local partial derivatives with respect to them.
//! [`ParamTape::backward`] then sweeps the nodes in reverse order once.
//!
//! The batched network code in [`super::mlp`] has its own hand-derived
//! backward pass; this tape is the general-purpose route and the
//! cross-check for it.

use std::cell::RefCell;
use std::ops::{Add, Mul, Neg, Sub};

use super::jet::Real;

#[derive(Debug, Clone, Copy)]
struct Node {
    parents: [usize; 2],
    partials: [f64; 2],
    arity: u8,
}

#[derive(Debug, Default)]
pub struct ParamTape {
    nodes: RefCell<Vec<Node>>,
}

/// A scalar recorded on a [`ParamTape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t ParamTape,
    idx: usize,
    val: f64,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Var#{}({})", self.idx, self.val)
    }
}

impl ParamTape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, node: Node) -> usize {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(node);
        nodes.len() - 1
    }

    /// A leaf: an independent variable or a constant.
    pub fn var(&self, val: f64) -> Var<'_> {
        let idx = self.push(Node { parents: [0, 0], partials: [0.0, 0.0], arity: 0 });
        Var { tape: self, idx, val }
    }

    pub fn vars(&self, vals: &[f64]) -> Vec<Var<'_>> {
        vals.iter().map(|v| self.var(*v)).collect()
    }

    fn unary(&self, a: &Var<'_>, val: f64, da: f64) -> Var<'_> {
        let idx = self.push(Node { parents: [a.idx, 0], partials: [da, 0.0], arity: 1 });
        Var { tape: self, idx, val }
    }

    fn binary(&self, a: &Var<'_>, b: &Var<'_>, val: f64, da: f64, db: f64) -> Var<'_> {
        let idx = self.push(Node { parents: [a.idx, b.idx], partials: [da, db], arity: 2 });
        Var { tape: self, idx, val }
    }

    /// Adjoints of every node with respect to `output`.
    pub fn backward(&self, output: &Var<'_>) -> Gradients {
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; nodes.len()];
        adj[output.idx] = 1.0;
        for i in (0..=output.idx).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let n = &nodes[i];
            for k in 0..n.arity as usize {
                adj[n.parents[k]] += a * n.partials[k];
            }
        }
        Gradients { adj }
    }
}

pub struct Gradients {
    adj: Vec<f64>,
}

impl Gradients {
    pub fn get(&self, v: &Var<'_>) -> f64 {
        self.adj[v.idx]
    }

    pub fn collect(&self, vars: &[Var<'_>]) -> Vec<f64> {
        vars.iter().map(|v| self.get(v)).collect()
    }
}

impl<'t> Var<'t> {
    pub fn val(&self) -> f64 {
        self.val
    }

    pub fn exp(self) -> Self {
        let e = self.val.exp();
        self.tape.unary(&self, e, e)
    }

    pub fn ln(self) -> Self {
        self.tape.unary(&self, self.val.ln(), 1.0 / self.val)
    }

    pub fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        self.tape.unary(&self, s, 0.5 / s)
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.val;
        self.tape.unary(&self, r, -r * r)
    }

    pub fn powi(self, n: i32) -> Self {
        let d = n as f64 * self.val.powi(n - 1);
        self.tape.unary(&self, self.val.powi(n), d)
    }

    pub fn add_const(self, c: f64) -> Self {
        self.tape.unary(&self, self.val + c, 1.0)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, o: Self) -> Self {
        self.tape.binary(&self, &o, self.val + o.val, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, o: Self) -> Self {
        self.tape.binary(&self, &o, self.val - o.val, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, o: Self) -> Self {
        self.tape.binary(&self, &o, self.val * o.val, o.val, self.val)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Self {
        self.tape.unary(&self, -self.val, -1.0)
    }
}

impl<'t> Real for Var<'t> {
    fn lift(&self, c: f64) -> Self {
        self.tape.var(c)
    }
    fn value(&self) -> f64 {
        self.val
    }
    fn sin(self) -> Self {
        self.tape.unary(&self, self.val.sin(), self.val.cos())
    }
    fn cos(self) -> Self {
        self.tape.unary(&self, self.val.cos(), -self.val.sin())
    }
    fn scale(self, k: f64) -> Self {
        self.tape.unary(&self, self.val * k, k)
    }
}
