//! Scalar reverse-mode automatic differentiation on a Wengert list.
//!
//! Every operation appends one node holding its value and the local partial
//! derivatives with respect to its parents. Nodes are created in topological
//! order, so a single reverse sweep propagates adjoints.

use crate::error::{Error, Result};
use crate::nn::params::ParameterVector;
use crate::nn::special::{self, HALF_LN_2PI};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Default, Clone)]
pub struct Tape {
    values: Vec<f64>,
    spans: Vec<(u32, u32)>,
    edges: Vec<(u32, f64)>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops all nodes but keeps the allocations.
    pub fn clear(&mut self) {
        self.values.clear();
        self.spans.clear();
        self.edges.clear();
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, v: Var) -> f64 {
        self.values[v.index()]
    }

    fn push(&mut self, value: f64, parents: &[(Var, f64)]) -> Var {
        let start = self.edges.len() as u32;
        self.edges
            .extend(parents.iter().map(|&(p, d)| (p.0, d)));
        self.spans.push((start, self.edges.len() as u32));
        self.values.push(value);
        Var(self.values.len() as u32 - 1)
    }

    /// Leaf node; gradients are reported for it.
    pub fn var(&mut self, value: f64) -> Var {
        self.push(value, &[])
    }

    /// Leaf node used as a constant. Identical to [`var`](Self::var) on the tape;
    /// the distinction is for readability at call sites.
    pub fn constant(&mut self, value: f64) -> Var {
        self.push(value, &[])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, &[(a, 1.0), (b, 1.0)])
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) - self.value(b);
        self.push(v, &[(a, 1.0), (b, -1.0)])
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        self.push(va * vb, &[(a, vb), (b, va)])
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        self.push(va / vb, &[(a, 1.0 / vb), (b, -va / (vb * vb))])
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.scale(a, -1.0)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let v = c * self.value(a);
        self.push(v, &[(a, c)])
    }

    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        let v = self.value(a) + c;
        self.push(v, &[(a, 1.0)])
    }

    pub fn square(&mut self, a: Var) -> Var {
        let va = self.value(a);
        self.push(va * va, &[(a, 2.0 * va)])
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let v = self.value(a).exp();
        self.push(v, &[(a, v)])
    }

    pub fn ln(&mut self, a: Var) -> Var {
        let va = self.value(a);
        self.push(va.ln(), &[(a, 1.0 / va)])
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let va = self.value(a);
        if va > 0.0 {
            self.push(va, &[(a, 1.0)])
        } else {
            self.push(0.0, &[(a, 0.0)])
        }
    }

    /// Clamp with zero derivative outside `[lo, hi]`.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let va = self.value(a);
        if va < lo {
            self.push(lo, &[(a, 0.0)])
        } else if va > hi {
            self.push(hi, &[(a, 0.0)])
        } else {
            self.push(va, &[(a, 1.0)])
        }
    }

    pub fn sum(&mut self, terms: &[Var]) -> Var {
        let v = terms.iter().map(|&t| self.value(t)).sum();
        let parents: Vec<(Var, f64)> = terms.iter().map(|&t| (t, 1.0)).collect();
        self.push(v, &parents)
    }

    /// `bias + Σ weightsᵢ · inputsᵢ` as a single node.
    pub fn affine(&mut self, weights: &[Var], inputs: &[Var], bias: Var) -> Var {
        assert_eq!(weights.len(), inputs.len(), "affine: length mismatch");
        let mut v = self.value(bias);
        let mut parents = Vec::with_capacity(2 * weights.len() + 1);
        for (&w, &x) in weights.iter().zip(inputs) {
            let (vw, vx) = (self.value(w), self.value(x));
            v += vw * vx;
            parents.push((w, vx));
            parents.push((x, vw));
        }
        parents.push((bias, 1.0));
        self.push(v, &parents)
    }

    pub fn log_sum_exp(&mut self, terms: &[Var]) -> Var {
        assert!(!terms.is_empty(), "log_sum_exp of no terms");
        let vals: Vec<f64> = terms.iter().map(|&t| self.value(t)).collect();
        let v = special::lse(&vals);
        let parents: Vec<(Var, f64)> = terms
            .iter()
            .zip(&vals)
            .map(|(&t, &tv)| (t, (tv - v).exp()))
            .collect();
        self.push(v, &parents)
    }

    pub fn std_normal_cdf(&mut self, a: Var) -> Var {
        let va = self.value(a);
        self.push(special::std_normal_cdf(va), &[(a, special::std_normal_pdf(va))])
    }

    pub fn log_std_normal_cdf(&mut self, a: Var) -> Var {
        let va = self.value(a);
        let v = special::log_std_normal_cdf(va);
        let d = (special::ln_std_normal_pdf(va) - v).exp();
        self.push(v, &[(a, d)])
    }

    /// `ln N(x; mean, exp(log_var))` for a constant observation `x`.
    pub fn gaussian_log_pdf(&mut self, x: f64, mean: Var, log_var: Var) -> Var {
        let (m, s) = (self.value(mean), self.value(log_var));
        let inv_var = (-s).exp();
        let r = x - m;
        let v = -HALF_LN_2PI - 0.5 * s - 0.5 * r * r * inv_var;
        self.push(
            v,
            &[(mean, r * inv_var), (log_var, -0.5 + 0.5 * r * r * inv_var)],
        )
    }

    /// Adjoints `∂output/∂node` for every node on the tape.
    pub fn backward(&self, output: Var) -> Vec<f64> {
        let mut adj = vec![0.0; self.values.len()];
        adj[output.index()] = 1.0;
        for node in (0..=output.index()).rev() {
            let a = adj[node];
            if a == 0.0 {
                continue;
            }
            let (start, end) = self.spans[node];
            for &(parent, d) in &self.edges[start as usize..end as usize] {
                adj[parent as usize] += a * d;
            }
        }
        adj
    }
}

/// Evaluates `objective` on a fresh tape whose first leaves are the scalars of
/// `params`, and returns the objective value with its gradient.
pub fn gradient<F>(params: &ParameterVector, objective: F) -> Result<(f64, ParameterVector)>
where
    F: FnOnce(&mut Tape, &[Var]) -> Var,
{
    let mut tape = Tape::new();
    let leaves: Vec<Var> = params.values().iter().map(|&v| tape.var(v)).collect();
    let out = objective(&mut tape, &leaves);
    let value = tape.value(out);
    if !value.is_finite() {
        return Err(Error::Training {
            epoch: None,
            value,
            context: "objective".into(),
        });
    }
    let adj = tape.backward(out);
    let mut grad = params.zeros_like();
    grad.assign(&adj[..params.len()])?;
    Ok((value, grad))
}
