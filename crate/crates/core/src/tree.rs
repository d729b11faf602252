//! Expression trees over `{+, -, *, protected /}` with input variables as the
//! only terminals.
//!
//! A tree is stored as its prefix (Polish) traversal. Every function node has
//! arity two, so the extent of any subtree can be recovered by a linear scan
//! and subtree replacement is a splice of two slices.

use std::fmt;

use rand::Rng;

use crate::dataset::Dataset;

/// Leaf probability used by GROW at interior levels.
pub const GROW_LEAF_PROB: f64 = 0.3;

/// Depth bound for the GROW trees used by mutation and by the geometric operators.
pub const RANDOM_TREE_DEPTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Add,
    Sub,
    Mul,
    /// `a / b`, or `1.0` when `b == 0.0` exactly.
    Div,
    Var(u32),
}

impl Node {
    const FUNCTIONS: [Node; 4] = [Node::Add, Node::Sub, Node::Mul, Node::Div];

    pub fn arity(self) -> usize {
        match self {
            Node::Var(_) => 0,
            _ => 2,
        }
    }

    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Node::Add => a + b,
            Node::Sub => a - b,
            Node::Mul => a * b,
            Node::Div => protected_div(a, b),
            Node::Var(_) => unreachable!("leaf has no operands"),
        }
    }
}

#[inline]
pub fn protected_div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        1.0
    } else {
        a / b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SyntaxTree {
    nodes: Vec<Node>,
}

enum Operand<'a> {
    Column(&'a [f64]),
    Owned(Vec<f64>),
}

impl Operand<'_> {
    fn as_slice(&self) -> &[f64] {
        match self {
            Operand::Column(c) => c,
            Operand::Owned(v) => v,
        }
    }
}

impl SyntaxTree {
    /// Wraps a prefix node sequence. Panics if it is not a single well-formed tree.
    pub fn from_prefix(nodes: Vec<Node>) -> Self {
        let mut open = 1usize;
        for (i, node) in nodes.iter().enumerate() {
            assert!(open > 0, "malformed prefix sequence: trailing nodes from {i}");
            open = open + node.arity() - 1;
        }
        assert!(open == 0, "malformed prefix sequence: {open} missing operand(s)");
        SyntaxTree { nodes }
    }

    pub fn var(index: u32) -> Self {
        SyntaxTree { nodes: vec![Node::Var(index)] }
    }

    pub fn binary(op: Node, left: &SyntaxTree, right: &SyntaxTree) -> Self {
        assert_eq!(op.arity(), 2);
        let mut nodes = Vec::with_capacity(1 + left.len() + right.len());
        nodes.push(op);
        nodes.extend_from_slice(&left.nodes);
        nodes.extend_from_slice(&right.nodes);
        SyntaxTree { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// One past the last prefix position of the subtree rooted at `start`.
    pub fn subtree_end(&self, start: usize) -> usize {
        let mut open = 1usize;
        let mut i = start;
        while open > 0 {
            open = open + self.nodes[i].arity() - 1;
            i += 1;
        }
        i
    }

    pub fn subtree(&self, start: usize) -> SyntaxTree {
        SyntaxTree { nodes: self.nodes[start..self.subtree_end(start)].to_vec() }
    }

    /// Number of nodes on the longest root-to-leaf path; a single leaf has depth 1.
    pub fn depth(&self) -> usize {
        let mut pending: Vec<usize> = Vec::new();
        let mut max = 0;
        let mut level = 0;
        for node in &self.nodes {
            level += 1;
            max = max.max(level);
            if node.arity() == 2 {
                pending.push(level);
            } else {
                level = pending.pop().unwrap_or(0);
            }
        }
        max
    }

    /// Lengths (in nodes) of every root-to-leaf path, in leaf order.
    pub fn leaf_depths(&self) -> Vec<usize> {
        let mut pending: Vec<usize> = Vec::new();
        let mut out = Vec::new();
        let mut level = 0;
        for node in &self.nodes {
            level += 1;
            if node.arity() == 2 {
                pending.push(level);
            } else {
                out.push(level);
                level = pending.pop().unwrap_or(0);
            }
        }
        out
    }

    pub fn max_var(&self) -> Option<u32> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Var(i) => Some(*i),
                _ => None,
            })
            .max()
    }

    /// Copy of `self` with the subtree at `at` swapped for `replacement`.
    pub fn replace_subtree(&self, at: usize, replacement: &[Node]) -> SyntaxTree {
        let end = self.subtree_end(at);
        let mut nodes = Vec::with_capacity(self.nodes.len() - (end - at) + replacement.len());
        nodes.extend_from_slice(&self.nodes[..at]);
        nodes.extend_from_slice(replacement);
        nodes.extend_from_slice(&self.nodes[end..]);
        SyntaxTree { nodes }
    }

    /// Output of the expression on every row of `inputs`.
    pub fn evaluate(&self, inputs: &Dataset) -> Vec<f64> {
        let n = inputs.n_rows();
        let mut stack: Vec<Operand<'_>> = Vec::with_capacity(16);
        for &node in self.nodes.iter().rev() {
            match node {
                Node::Var(j) => stack.push(Operand::Column(inputs.column(j as usize))),
                op => {
                    let left = stack.pop().expect("well-formed tree");
                    let right = stack.pop().expect("well-formed tree");
                    let out = match (left, right) {
                        (Operand::Owned(mut a), b) => {
                            for (x, &y) in a.iter_mut().zip(b.as_slice()) {
                                *x = op.apply(*x, y);
                            }
                            a
                        }
                        (a, Operand::Owned(mut b)) => {
                            for (y, &x) in b.iter_mut().zip(a.as_slice()) {
                                *y = op.apply(x, *y);
                            }
                            b
                        }
                        (a, b) => {
                            let (a, b) = (a.as_slice(), b.as_slice());
                            let mut v = Vec::with_capacity(n);
                            v.extend(a.iter().zip(b).map(|(&x, &y)| op.apply(x, y)));
                            v
                        }
                    };
                    stack.push(Operand::Owned(out));
                }
            }
        }
        match stack.pop().expect("well-formed tree") {
            Operand::Column(c) => c.to_vec(),
            Operand::Owned(v) => v,
        }
    }

    /// Output on a single input row; used for spot checks.
    pub fn evaluate_row(&self, row: &[f64]) -> f64 {
        let mut stack: Vec<f64> = Vec::with_capacity(16);
        for &node in self.nodes.iter().rev() {
            match node {
                Node::Var(j) => stack.push(row[j as usize]),
                op => {
                    let a = stack.pop().unwrap();
                    let b = stack.pop().unwrap();
                    stack.push(op.apply(a, b));
                }
            }
        }
        stack.pop().unwrap()
    }
}

impl fmt::Display for SyntaxTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(nodes: &[Node], i: usize, f: &mut fmt::Formatter<'_>) -> Result<usize, fmt::Error> {
            match nodes[i] {
                Node::Var(j) => {
                    write!(f, "x{j}")?;
                    Ok(i + 1)
                }
                op => {
                    let sym = match op {
                        Node::Add => "+",
                        Node::Sub => "-",
                        Node::Mul => "*",
                        _ => "/",
                    };
                    write!(f, "(")?;
                    let next = go(nodes, i + 1, f)?;
                    write!(f, " {sym} ")?;
                    let next = go(nodes, next, f)?;
                    write!(f, ")")?;
                    Ok(next)
                }
            }
        }
        go(&self.nodes, 0, f).map(|_| ())
    }
}

fn random_var<R: Rng + ?Sized>(num_vars: usize, rng: &mut R) -> Node {
    Node::Var(rng.gen_range(0..num_vars) as u32)
}

fn random_function<R: Rng + ?Sized>(rng: &mut R) -> Node {
    Node::FUNCTIONS[rng.gen_range(0..Node::FUNCTIONS.len())]
}

fn build<R: Rng + ?Sized>(
    out: &mut Vec<Node>,
    remaining: usize,
    full: bool,
    num_vars: usize,
    rng: &mut R,
) {
    let leaf = remaining <= 1 || (!full && rng.gen::<f64>() < GROW_LEAF_PROB);
    if leaf {
        out.push(random_var(num_vars, rng));
    } else {
        out.push(random_function(rng));
        build(out, remaining - 1, full, num_vars, rng);
        build(out, remaining - 1, full, num_vars, rng);
    }
}

/// FULL tree: every root-to-leaf path has exactly `depth` nodes.
pub fn full_tree<R: Rng + ?Sized>(depth: usize, num_vars: usize, rng: &mut R) -> SyntaxTree {
    assert!(depth >= 1 && num_vars >= 1);
    let mut nodes = Vec::with_capacity((1 << depth.min(16)) - 1);
    build(&mut nodes, depth, true, num_vars, rng);
    SyntaxTree { nodes }
}

/// GROW tree of at most `max_depth` levels; interior positions become leaves
/// with probability [`GROW_LEAF_PROB`].
pub fn grow_tree<R: Rng + ?Sized>(max_depth: usize, num_vars: usize, rng: &mut R) -> SyntaxTree {
    assert!(max_depth >= 1 && num_vars >= 1);
    let mut nodes = Vec::new();
    build(&mut nodes, max_depth, false, num_vars, rng);
    SyntaxTree { nodes }
}

/// Ramped half-and-half: target depths cycle over `2..=max_depth`, and each
/// depth alternates between FULL and GROW.
pub fn ramped_half_and_half<R: Rng + ?Sized>(
    count: usize,
    max_depth: usize,
    num_vars: usize,
    rng: &mut R,
) -> Vec<SyntaxTree> {
    let min_depth = 2.min(max_depth);
    let span = max_depth - min_depth + 1;
    (0..count)
        .map(|i| {
            let depth = min_depth + (i / 2) % span;
            if i % 2 == 0 {
                full_tree(depth, num_vars, rng)
            } else {
                grow_tree(depth, num_vars, rng)
            }
        })
        .collect()
}

/// One child: a random node of `p1` is replaced by a random subtree of `p2`.
pub fn subtree_crossover<R: Rng + ?Sized>(p1: &SyntaxTree, p2: &SyntaxTree, rng: &mut R) -> SyntaxTree {
    let at = rng.gen_range(0..p1.len());
    let from = rng.gen_range(0..p2.len());
    let donor = &p2.nodes[from..p2.subtree_end(from)];
    p1.replace_subtree(at, donor)
}

/// A random node of `p` is replaced by a fresh GROW tree of depth at most
/// [`RANDOM_TREE_DEPTH`].
pub fn subtree_mutation<R: Rng + ?Sized>(p: &SyntaxTree, num_vars: usize, rng: &mut R) -> SyntaxTree {
    let at = rng.gen_range(0..p.len());
    let fresh = grow_tree(RANDOM_TREE_DEPTH, num_vars, rng);
    p.replace_subtree(at, &fresh.nodes)
}
