//! Read-once formulas in normal form.
//!
//! Every node carries an affine pair `(a, b)`: a leaf on `x_i` computes
//! `a*x_i + b`, an internal node computes `a*(left op right) + b`. A leaf
//! whose scale `a` is zero computes a constant and reads no variable, so it
//! is ignored by the read-once check; this is how constant polynomials are
//! represented.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::mpoly::{Poly, VarSet};
use crate::numfield::{FieldCtx, FieldElem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Add,
    Mul,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rof {
    Leaf {
        var: usize,
        a: FieldElem,
        b: FieldElem,
    },
    Node {
        op: Gate,
        a: FieldElem,
        b: FieldElem,
        left: Box<Rof>,
        right: Box<Rof>,
    },
}

impl Rof {
    pub fn leaf(var: usize, a: FieldElem, b: FieldElem) -> Self {
        Rof::Leaf { var, a, b }
    }

    /// Plain `x_var`.
    pub fn var(ctx: &FieldCtx, var: usize) -> Self {
        Rof::leaf(var, ctx.one(), ctx.zero())
    }

    /// A constant, as a zero-scale leaf on `x1`.
    pub fn constant(ctx: &FieldCtx, c: FieldElem) -> Self {
        Rof::leaf(1, ctx.zero(), c)
    }

    pub fn node(op: Gate, a: FieldElem, b: FieldElem, left: Rof, right: Rof) -> Self {
        Rof::Node {
            op,
            a,
            b,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn add(ctx: &FieldCtx, left: Rof, right: Rof) -> Self {
        Rof::node(Gate::Add, ctx.one(), ctx.zero(), left, right)
    }

    pub fn mul(ctx: &FieldCtx, left: Rof, right: Rof) -> Self {
        Rof::node(Gate::Mul, ctx.one(), ctx.zero(), left, right)
    }

    /// Left-leaning product of the given factors. Panics on an empty list.
    pub fn product(ctx: &FieldCtx, factors: Vec<Rof>) -> Self {
        let mut it = factors.into_iter();
        let first = it.next().expect("product of no factors");
        it.fold(first, |acc, f| Rof::mul(ctx, acc, f))
    }

    /// Post-composes the root with `q -> scale*q + shift`.
    pub fn with_affine(self, scale: &FieldElem, shift: &FieldElem) -> Self {
        match self {
            Rof::Leaf { var, a, b } => Rof::Leaf {
                var,
                a: scale * &a,
                b: scale * &b + shift,
            },
            Rof::Node {
                op,
                a,
                b,
                left,
                right,
            } => Rof::Node {
                op,
                a: scale * &a,
                b: scale * &b + shift,
                left,
                right,
            },
        }
    }

    pub fn outer(&self) -> (&FieldElem, &FieldElem) {
        match self {
            Rof::Leaf { a, b, .. } | Rof::Node { a, b, .. } => (a, b),
        }
    }

    /// Leaf labels that actually read their variable (nonzero scale), with repeats.
    fn reading_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Rof::Leaf { var, a, .. } => {
                if !a.is_zero() {
                    out.push(*var);
                }
            }
            Rof::Node { left, right, .. } => {
                left.reading_leaves(out);
                right.reading_leaves(out);
            }
        }
    }

    /// Variables read by some leaf.
    pub fn leaf_vars(&self) -> VarSet {
        let mut v = Vec::new();
        self.reading_leaves(&mut v);
        v.into_iter().collect()
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Rof::Leaf { .. } => 1,
            Rof::Node { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// `Err(var)` names the first variable that labels two reading leaves.
    pub fn validate_read_once(&self) -> std::result::Result<(), usize> {
        let mut vars = Vec::new();
        self.reading_leaves(&mut vars);
        let mut seen = VarSet::empty();
        for v in vars {
            if seen.contains(v) {
                return Err(v);
            }
            seen = seen.with(v);
        }
        Ok(())
    }

    pub fn is_read_once(&self) -> bool {
        self.validate_read_once().is_ok()
    }

    /// The polynomial computed by the formula, in `nvars` ambient variables.
    pub fn expand(&self, ctx: &FieldCtx, nvars: usize) -> Result<Poly> {
        self.validate_read_once().map_err(Error::NotReadOnce)?;
        self.expand_unchecked(ctx, nvars)
    }

    fn expand_unchecked(&self, ctx: &FieldCtx, nvars: usize) -> Result<Poly> {
        match self {
            Rof::Leaf { var, a, b } => {
                ctx.check(a)?;
                ctx.check(b)?;
                if a.is_zero() {
                    return Ok(Poly::constant(*ctx, nvars, b.clone()));
                }
                Poly::var(*ctx, nvars, *var)?.scale(a)?.add_constant(b)
            }
            Rof::Node {
                op,
                a,
                b,
                left,
                right,
            } => {
                ctx.check(a)?;
                ctx.check(b)?;
                let l = left.expand_unchecked(ctx, nvars)?;
                let r = right.expand_unchecked(ctx, nvars)?;
                let inner = match op {
                    Gate::Add => l.checked_add(&r)?,
                    Gate::Mul => l.checked_mul(&r)?,
                };
                inner.scale(a)?.add_constant(b)
            }
        }
    }

    /// Variables the expanded polynomial depends on.
    pub fn effective_vars(&self, ctx: &FieldCtx, nvars: usize) -> Result<VarSet> {
        Ok(self.expand(ctx, nvars)?.vars())
    }

    /// No addition gate anywhere.
    pub fn is_multiplicative(&self) -> bool {
        match self {
            Rof::Leaf { .. } => true,
            Rof::Node { op: Gate::Add, .. } => false,
            Rof::Node { left, right, .. } => left.is_multiplicative() && right.is_multiplicative(),
        }
    }

    /// Gate at the lowest common ancestor of the leaves of `x_p` and `x_q`.
    pub fn lca_gate(&self, p: usize, q: usize) -> Option<Gate> {
        match self {
            Rof::Leaf { .. } => None,
            Rof::Node {
                op, left, right, ..
            } => {
                let (lv, rv) = (left.leaf_vars(), right.leaf_vars());
                if (lv.contains(p) && rv.contains(q)) || (lv.contains(q) && rv.contains(p)) {
                    Some(*op)
                } else if lv.contains(p) && lv.contains(q) {
                    left.lca_gate(p, q)
                } else if rv.contains(p) && rv.contains(q) {
                    right.lca_gate(p, q)
                } else {
                    None
                }
            }
        }
    }

    /// Maps every leaf label `v` to `perm[v-1]`.
    pub fn relabel(&self, perm: &[usize]) -> Rof {
        match self {
            Rof::Leaf { var, a, b } => Rof::Leaf {
                var: perm.get(var - 1).copied().unwrap_or(*var),
                a: a.clone(),
                b: b.clone(),
            },
            Rof::Node {
                op,
                a,
                b,
                left,
                right,
            } => Rof::Node {
                op: *op,
                a: a.clone(),
                b: b.clone(),
                left: Box::new(left.relabel(perm)),
                right: Box::new(right.relabel(perm)),
            },
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(RofRepr::from(self)).expect("formula serializes")
    }

    pub fn from_json(value: &Value, ctx: &FieldCtx) -> Result<Rof> {
        let repr: RofRepr =
            serde_json::from_value(value.clone()).map_err(|e| Error::Format(e.to_string()))?;
        repr.into_rof(ctx)
    }
}

/// A bivariate (or smaller) multilinear polynomial as a single formula.
pub fn rof_from_bivariate(p: &Poly) -> Result<Rof> {
    p.require_multilinear()?;
    let ctx = *p.ctx();
    let vars: Vec<usize> = p.vars().iter().collect();
    let d = p.constant_term();
    match vars[..] {
        [] => Ok(Rof::constant(&ctx, d)),
        [i] => Ok(Rof::leaf(i, p.coeff_of(VarSet::empty().with(i)), d)),
        [i, j] => {
            let a = p.coeff_of(VarSet::empty().with(i).with(j));
            let b = p.coeff_of(VarSet::empty().with(i));
            let c = p.coeff_of(VarSet::empty().with(j));
            if a.is_zero() {
                return Ok(Rof::node(
                    Gate::Add,
                    ctx.one(),
                    d,
                    Rof::leaf(i, b, ctx.zero()),
                    Rof::leaf(j, c, ctx.zero()),
                ));
            }
            // a*x_i*x_j + b*x_i + c*x_j + d = a*(x_i + c/a)*(x_j + b/a) + (d - bc/a)
            let shift = &d - &(&(&b * &c) / &a);
            Ok(Rof::node(
                Gate::Mul,
                a.clone(),
                shift,
                Rof::leaf(i, ctx.one(), &c / &a),
                Rof::leaf(j, ctx.one(), &b / &a),
            ))
        }
        _ => Err(Error::TooManyVariables {
            found: vars.len(),
            max: 2,
        }),
    }
}

/// A polynomial of total degree at most one as a left-leaning sum.
pub fn rof_linear(l: &Poly) -> Result<Rof> {
    let deg = l.total_degree();
    if deg > 1 {
        return Err(Error::DegreeTooHigh { found: deg, max: 1 });
    }
    let ctx = *l.ctx();
    let c = l.constant_term();
    let mut leaves = l
        .vars()
        .iter()
        .map(|v| Rof::leaf(v, l.coeff_of(VarSet::empty().with(v)), ctx.zero()));
    let Some(first) = leaves.next() else {
        return Ok(Rof::constant(&ctx, c));
    };
    let chain = leaves.fold(first, |acc, leaf| Rof::add(&ctx, acc, leaf));
    Ok(chain.with_affine(&ctx.one(), &c))
}

/// For a multiplicative formula and an effective variable `x_i`, a pair
/// `(j, gamma)` with `d/dx_j (t)` vanishing identically at `x_i = gamma`.
///
/// `gamma` is the root of the affine polynomial in `x_i` computed just below
/// the lowest ancestor whose other child depends on some variable; `j` is
/// the smallest effective variable of that other child.
pub fn annihilating_restriction(
    t: &Rof,
    ctx: &FieldCtx,
    nvars: usize,
    i: usize,
) -> Result<(usize, FieldElem)> {
    if !t.is_multiplicative() {
        return Err(Error::NotMultiplicative);
    }
    let mut path = Vec::new();
    match find_leaf(t, i, &mut path) {
        LeafSearch::Reading => {}
        LeafSearch::ZeroScale => return Err(Error::DegenerateLeaf(i)),
        LeafSearch::Absent => return Err(Error::NotEffective { var: i }),
    }
    let eff = t.effective_vars(ctx, nvars)?;
    if !eff.contains(i) {
        return Err(Error::NotEffective { var: i });
    }
    if eff.len() < 2 {
        return Err(Error::WrongArity {
            expected: 2,
            found: eff.len(),
        });
    }
    // path[k] = the child taken at depth k; walk back up from the leaf.
    let mut nodes = vec![t];
    for &dir in &path {
        let Rof::Node { left, right, .. } = nodes.last().unwrap() else {
            unreachable!()
        };
        nodes.push(if dir { right } else { left });
    }
    for depth in (0..path.len()).rev() {
        let Rof::Node { left, right, .. } = nodes[depth] else {
            unreachable!()
        };
        let sibling: &Rof = if path[depth] { left } else { right };
        let sib_vars = sibling.expand(ctx, nvars)?.vars();
        if let Some(j) = sib_vars.min() {
            let side = nodes[depth + 1].expand(ctx, nvars)?;
            let slope = side.coeff_of(VarSet::empty().with(i));
            let offset = side.constant_term();
            if slope.is_zero() || side.vars() != VarSet::empty().with(i) {
                return Err(Error::InternalInvariantViolation(
                    "subtree above the leaf is not affine in its variable".into(),
                ));
            }
            return Ok((j, -(&offset / &slope)));
        }
    }
    Err(Error::InternalInvariantViolation(
        "no sibling with an effective variable".into(),
    ))
}

enum LeafSearch {
    Reading,
    ZeroScale,
    Absent,
}

/// Records the path (false = left) to the reading leaf of `x_i`.
fn find_leaf(t: &Rof, i: usize, path: &mut Vec<bool>) -> LeafSearch {
    match t {
        Rof::Leaf { var, a, .. } if *var == i => {
            if a.is_zero() {
                LeafSearch::ZeroScale
            } else {
                LeafSearch::Reading
            }
        }
        Rof::Leaf { .. } => LeafSearch::Absent,
        Rof::Node { left, right, .. } => {
            let mut found = LeafSearch::Absent;
            for (dir, child) in [(false, left), (true, right)] {
                path.push(dir);
                match find_leaf(child, i, path) {
                    LeafSearch::Reading => return LeafSearch::Reading,
                    LeafSearch::ZeroScale => found = LeafSearch::ZeroScale,
                    LeafSearch::Absent => {}
                }
                path.pop();
            }
            found
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RofRepr {
    Node {
        op: Gate,
        a: String,
        b: String,
        left: Box<RofRepr>,
        right: Box<RofRepr>,
    },
    Leaf {
        var: usize,
        a: String,
        b: String,
    },
}

impl From<&Rof> for RofRepr {
    fn from(t: &Rof) -> Self {
        match t {
            Rof::Leaf { var, a, b } => RofRepr::Leaf {
                var: *var,
                a: a.to_string(),
                b: b.to_string(),
            },
            Rof::Node {
                op,
                a,
                b,
                left,
                right,
            } => RofRepr::Node {
                op: *op,
                a: a.to_string(),
                b: b.to_string(),
                left: Box::new(RofRepr::from(left.as_ref())),
                right: Box::new(RofRepr::from(right.as_ref())),
            },
        }
    }
}

impl RofRepr {
    fn into_rof(self, ctx: &FieldCtx) -> Result<Rof> {
        Ok(match self {
            RofRepr::Leaf { var, a, b } => {
                if var == 0 {
                    return Err(Error::Format("leaf variable indices start at 1".into()));
                }
                Rof::leaf(var, ctx.parse_scalar(&a)?, ctx.parse_scalar(&b)?)
            }
            RofRepr::Node {
                op,
                a,
                b,
                left,
                right,
            } => Rof::node(
                op,
                ctx.parse_scalar(&a)?,
                ctx.parse_scalar(&b)?,
                left.into_rof(ctx)?,
                right.into_rof(ctx)?,
            ),
        })
    }
}

impl fmt::Display for Rof {
    /// Compact infix form; unit scales and zero shifts are omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn affine(
            f: &mut fmt::Formatter<'_>,
            a: &FieldElem,
            b: &FieldElem,
            body: &str,
        ) -> fmt::Result {
            match (a.is_one(), b.is_zero()) {
                (true, true) => write!(f, "{body}"),
                (true, false) => write!(f, "({body} + {b})"),
                (false, true) => write!(f, "{a}*{body}"),
                (false, false) => write!(f, "({a}*{body} + {b})"),
            }
        }
        match self {
            Rof::Leaf { a, b, .. } if a.is_zero() => write!(f, "{b}"),
            Rof::Leaf { var, a, b } => affine(f, a, b, &format!("x{var}")),
            Rof::Node {
                op,
                a,
                b,
                left,
                right,
            } => {
                let sym = match op {
                    Gate::Add => "+",
                    Gate::Mul => "*",
                };
                affine(f, a, b, &format!("({left} {sym} {right})"))
            }
        }
    }
}

/// Counts leaves per label; handy for diagnostics.
pub fn label_histogram(t: &Rof) -> BTreeMap<usize, usize> {
    let mut v = Vec::new();
    t.reading_leaves(&mut v);
    let mut h = BTreeMap::new();
    for x in v {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldCtx {
        FieldCtx::rationals()
    }

    fn c(v: i64) -> FieldElem {
        q().from_i64(v)
    }

    fn x(i: usize) -> Rof {
        Rof::var(&q(), i)
    }

    #[test]
    fn read_once_checks() {
        assert!(x(1).is_read_once());
        let bad = Rof::add(&q(), x(1), x(1));
        assert_eq!(bad.validate_read_once(), Err(1));
        assert_eq!(bad.expand(&q(), 2), Err(Error::NotReadOnce(1)));
        // zero-scale leaves read nothing
        let ok = Rof::add(&q(), x(1), Rof::constant(&q(), c(3)));
        assert!(ok.is_read_once());
        assert_eq!(ok.expand(&q(), 1).unwrap().to_string(), "x1 + 3");
    }

    #[test]
    fn leaf_and_node_expansion() {
        let leaf = Rof::leaf(1, c(2), c(3));
        assert_eq!(leaf.expand(&q(), 1).unwrap().to_string(), "2*x1 + 3");
        let prod = Rof::mul(&q(), x(1), x(2));
        assert_eq!(prod.expand(&q(), 2).unwrap().to_string(), "x1*x2");
    }

    #[test]
    fn multiplicative_detection() {
        assert!(x(3).is_multiplicative());
        assert!(!Rof::add(&q(), x(1), x(2)).is_multiplicative());
        let prod = Rof::product(&q(), (1..=4).map(x).collect());
        assert!(prod.is_multiplicative());
        let mixed = Rof::mul(&q(), Rof::add(&q(), x(1), x(2)), x(3));
        assert!(!mixed.is_multiplicative());
    }

    #[test]
    fn bivariate_construction() {
        let x1 = Poly::var(q(), 2, 1).unwrap();
        let x2 = Poly::var(q(), 2, 2).unwrap();
        let t = rof_from_bivariate(&(&x1 * &x2)).unwrap();
        assert_eq!(t, Rof::mul(&q(), x(1), x(2)));

        let p = &(&(&x1 * &x2).scale(&c(2)).unwrap() + &x1.scale(&c(4)).unwrap())
            + &x2.scale(&c(6)).unwrap().add_constant(&c(13)).unwrap();
        let t = rof_from_bivariate(&p).unwrap();
        assert_eq!(
            t,
            Rof::node(
                Gate::Mul,
                c(2),
                c(1),
                Rof::leaf(1, c(1), c(3)),
                Rof::leaf(2, c(1), c(2))
            )
        );
        assert_eq!(t.expand(&q(), 2).unwrap(), p);

        let lin = Poly::var(q(), 3, 3)
            .unwrap()
            .scale(&c(5))
            .unwrap()
            .add_constant(&c(7))
            .unwrap();
        assert_eq!(rof_from_bivariate(&lin).unwrap(), Rof::leaf(3, c(5), c(7)));
    }

    #[test]
    fn bivariate_rejects_three_variables() {
        let p = crate::mpoly::gen_symmetric(q(), 3, 1).unwrap();
        assert_eq!(
            rof_from_bivariate(&p),
            Err(Error::TooManyVariables { found: 3, max: 2 })
        );
    }

    #[test]
    fn linear_chain_shape() {
        let l = crate::mpoly::gen_symmetric(q(), 3, 1).unwrap();
        let t = rof_linear(&l).unwrap();
        assert_eq!(t, Rof::add(&q(), Rof::add(&q(), x(1), x(2)), x(3)));
        let k = Poly::constant(q(), 2, c(5));
        assert_eq!(rof_linear(&k).unwrap(), Rof::leaf(1, c(0), c(5)));
        let quad = crate::mpoly::gen_symmetric(q(), 2, 2).unwrap();
        assert!(rof_linear(&quad).is_err());
    }

    #[test]
    fn annihilator_examples() {
        let t = Rof::mul(&q(), x(1), x(2));
        assert_eq!(annihilating_restriction(&t, &q(), 2, 1).unwrap(), (2, c(0)));

        let t = Rof::mul(&q(), Rof::leaf(1, c(2), c(-4)), x(2));
        assert_eq!(annihilating_restriction(&t, &q(), 2, 1).unwrap(), (2, c(2)));

        let t = Rof::mul(&q(), Rof::mul(&q(), x(1), x(2)), Rof::mul(&q(), x(3), x(4)));
        assert_eq!(annihilating_restriction(&t, &q(), 4, 3).unwrap(), (4, c(0)));
    }

    #[test]
    fn annihilator_skips_constant_siblings() {
        // ((x1 - 2) * 3 + 1) * x2 : the x1-side is 3*x1 - 5
        let inner = Rof::node(
            Gate::Mul,
            c(1),
            c(1),
            Rof::leaf(1, c(1), c(-2)),
            Rof::constant(&q(), c(3)),
        );
        let t = Rof::mul(&q(), inner, x(2));
        let (j, gamma) = annihilating_restriction(&t, &q(), 2, 1).unwrap();
        assert_eq!(j, 2);
        assert_eq!(gamma, q().parse_scalar("5/3").unwrap());
    }

    #[test]
    fn annihilator_errors() {
        let t = Rof::add(&q(), x(1), x(2));
        assert_eq!(
            annihilating_restriction(&t, &q(), 2, 1),
            Err(Error::NotMultiplicative)
        );
        let t = Rof::mul(&q(), Rof::leaf(1, c(0), c(1)), x(2));
        assert_eq!(
            annihilating_restriction(&t, &q(), 2, 1),
            Err(Error::DegenerateLeaf(1))
        );
    }

    #[test]
    fn json_round_trip_is_verbatim() {
        let t = Rof::node(
            Gate::Add,
            q().parse_scalar("1/2").unwrap(),
            c(-3),
            Rof::leaf(1, c(2), c(0)),
            Rof::mul(&q(), x(2), x(3)),
        );
        let v = t.to_json();
        assert_eq!(v["op"], "add");
        assert_eq!(v["a"], "1/2");
        assert_eq!(v["left"]["var"], 1);
        assert_eq!(Rof::from_json(&v, &q()).unwrap(), t);
    }

    #[test]
    fn lca_gates() {
        let t = Rof::mul(&q(), Rof::add(&q(), x(1), x(2)), x(3));
        assert_eq!(t.lca_gate(1, 2), Some(Gate::Add));
        assert_eq!(t.lca_gate(2, 3), Some(Gate::Mul));
        assert_eq!(t.lca_gate(1, 4), None);
    }
}
