//! Condition systems for the two-summand class.
//!
//! For the weighted quadratic family the three scalar conditions decide
//! membership exactly. For an arbitrary 4-variate multilinear polynomial the
//! structural checks are necessary conditions only: if all three fail the
//! polynomial is certainly not a sum of two read-once polynomials.

use serde_json::{json, Value};

use crate::decompose::{
    decompose_f, decompose_generic, decompose_sym4, product_of_linear, Construction, Decomposition,
    FOutcome,
};
use crate::error::{Error, Result};
use crate::mpoly::{gen_f, gen_m, gen_symmetric, Monomial, Poly, VarSet};
use crate::numfield::{FieldCtx, FieldElem, SquareRoot};

/// Largest prime for which the restriction check enumerates all pairs `(A, B)`.
pub const BRUTE_FORCE_PAIR_LIMIT: u64 = 257;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub d_values: [FieldElem; 3],
    /// Canonical root of the first `D_i` that has one, if representable.
    pub c3_root: Option<FieldElem>,
    pub structural: Option<StructuralReport>,
}

impl ConditionReport {
    /// True when the three conditions together rule out two summands.
    pub fn not_expressible(&self) -> bool {
        self.c1 && self.c2 && self.c3
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "d_values": self.d_values.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "c3_root": self.c3_root.as_ref().map(ToString::to_string),
            "expressible": !self.not_expressible(),
        });
        if let Some(s) = &self.structural {
            let obj = v.as_object_mut().unwrap();
            for (k, val) in s.to_json().as_object().unwrap() {
                obj.insert(k.clone(), val.clone());
            }
        }
        v
    }
}

/// `g` restricted at `x_i = a, x_j = b` has degree at most one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictionWitness {
    pub i: usize,
    pub j: usize,
    pub a: FieldElem,
    pub b: FieldElem,
}

/// `coeffs` combine `x_i, x_j, d_i g, d_j g, 1` to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependenceWitness {
    pub i: usize,
    pub j: usize,
    pub coeffs: [FieldElem; 5],
}

/// `g = l1*l2 + l3*l4` with each product over disjoint variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitWitness {
    pub forms: [Poly; 4],
}

impl SplitWitness {
    pub fn expand(&self) -> Result<Poly> {
        let [l1, l2, l3, l4] = &self.forms;
        l1.checked_mul(l2)?.checked_add(&l3.checked_mul(l4)?)
    }

    pub fn to_decomposition(&self, target: &Poly) -> Result<Decomposition> {
        let [l1, l2, l3, l4] = &self.forms;
        let summands = vec![product_of_linear(l1, l2)?, product_of_linear(l3, l4)?];
        let d = crate::decompose::assemble(target.clone(), summands, Construction::Reconstructed);
        if !d.verified {
            return Err(Error::InternalInvariantViolation(
                "split witness does not expand to the target".into(),
            ));
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralReport {
    pub c1p: Option<RestrictionWitness>,
    pub c2p: Option<DependenceWitness>,
    pub c3p: Option<SplitWitness>,
    /// Some quadratic in the split search had a root that exists over the
    /// reals but is irrational, so a missing split is not conclusive.
    pub unrepresentable_root: bool,
}

impl StructuralReport {
    pub fn to_json(&self) -> Value {
        json!({
            "c1p": {
                "holds": self.c1p.is_some(),
                "witness": self.c1p.as_ref().map(|w| json!({
                    "i": w.i, "j": w.j, "a": w.a.to_string(), "b": w.b.to_string()
                })),
            },
            "c2p": {
                "holds": self.c2p.is_some(),
                "witness": self.c2p.as_ref().map(|w| json!({
                    "i": w.i, "j": w.j,
                    "coefficients": w.coeffs.iter().map(ToString::to_string).collect::<Vec<_>>(),
                })),
            },
            "c3p": {
                "holds": self.c3p.is_some(),
                "witness": self.c3p.as_ref().map(|w| {
                    w.forms.iter().map(ToString::to_string).collect::<Vec<_>>()
                }),
            },
        })
    }
}

/// The three discriminant-like values; all equal
/// `(a+b+c)(a-b-c)(a-b+c)(a+b-c)`.
pub fn d_values(alpha: &FieldElem, beta: &FieldElem, gamma: &FieldElem) -> [FieldElem; 3] {
    let (a2, b2, c2) = (alpha * alpha, beta * beta, gamma * gamma);
    let two = |x: &FieldElem, y: &FieldElem| {
        let t = x * y;
        &t + &t
    };
    let sq = |x: FieldElem| &x * &x;
    [
        &sq(&(&a2 - &b2) - &c2) - &sq(two(beta, gamma)),
        &sq(&(&b2 - &a2) - &c2) - &sq(two(alpha, gamma)),
        &sq(&(&c2 - &a2) - &b2) - &sq(two(alpha, beta)),
    ]
}

pub fn weight_conditions(
    ctx: FieldCtx,
    alpha: &FieldElem,
    beta: &FieldElem,
    gamma: &FieldElem,
) -> Result<ConditionReport> {
    for e in [alpha, beta, gamma] {
        ctx.check(e)?;
    }
    let c1 = !(alpha * beta * gamma.clone()).is_zero();
    let (a2, b2, g2) = (alpha * alpha, beta * beta, gamma * gamma);
    let c2 = !(&(&(&a2 - &b2) * &(&b2 - &g2)) * &(&g2 - &a2)).is_zero();
    let d = d_values(alpha, beta, gamma);
    let roots: Vec<SquareRoot> = d.iter().map(|v| ctx.sqrt_in_field(v)).collect();
    let c3 = roots.iter().all(|r| !r.exists());
    let c3_root = roots.iter().find_map(|r| r.root().cloned());
    Ok(ConditionReport {
        c1,
        c2,
        c3,
        d_values: d,
        c3_root,
        structural: None,
    })
}

/// Weights `(alpha, beta, gamma)` if `g` is the weighted quadratic family.
pub fn match_f_family(g: &Poly) -> Option<[FieldElem; 3]> {
    if g.nvars() != 4 {
        return None;
    }
    let pair = |i, j| g.coeff_of(VarSet::empty().with(i).with(j));
    let w = [pair(1, 2), pair(1, 3), pair(1, 4)];
    (gen_f(*g.ctx(), &w[0], &w[1], &w[2]).ok()? == *g).then_some(w)
}

/// `(A, B)` with `g = A*S_n^n + B*S_n^(n-1)`, `n = nvars`.
pub fn match_m_family(g: &Poly) -> Option<(FieldElem, FieldElem)> {
    let n = g.nvars();
    if n == 0 {
        return None;
    }
    let full = VarSet::full(n);
    let a = g.coeff_of(full);
    let b = g.coeff_of((1..n).collect());
    (gen_m(*g.ctx(), n, &a, &b).ok()? == *g).then_some((a, b))
}

/// `(a_0..a_4)` with `g = sum a_i S_4^i`.
pub fn match_sym4(g: &Poly) -> Option<[FieldElem; 5]> {
    if g.nvars() != 4 {
        return None;
    }
    let ctx = *g.ctx();
    let a: [FieldElem; 5] = std::array::from_fn(|i| g.coeff_of((1..=i).collect()));
    let mut acc = Poly::zero(ctx, 4);
    for (i, ai) in a.iter().enumerate() {
        acc = acc
            .checked_add(&gen_symmetric(ctx, 4, i).ok()?.scale(ai).ok()?)
            .ok()?;
    }
    (acc == *g).then_some(a)
}

fn require_four(g: &Poly) -> Result<()> {
    if g.nvars() != 4 {
        return Err(Error::WrongArity {
            expected: 4,
            found: g.nvars(),
        });
    }
    g.require_multilinear()
}

fn vs(vars: &[usize]) -> VarSet {
    vars.iter().copied().collect()
}

/// Pair `{i, j}` and values `A, B` making the restriction of `g` linear.
pub fn restriction_check(g: &Poly) -> Result<Option<RestrictionWitness>> {
    require_four(g)?;
    let ctx = *g.ctx();
    for i in 1..=4 {
        for j in i + 1..=4 {
            let rest: Vec<usize> = (1..=4).filter(|&v| v != i && v != j).collect();
            let (k, l) = (rest[0], rest[1]);
            let c0 = g.coeff_of(vs(&[k, l]));
            let c1 = g.coeff_of(vs(&[i, k, l]));
            let c2 = g.coeff_of(vs(&[j, k, l]));
            let c3 = g.coeff_of(vs(&[i, j, k, l]));
            let found = match ctx.modulus() {
                Some(p) if p <= BRUTE_FORCE_PAIR_LIMIT => {
                    brute_force_pair(&ctx, [&c0, &c1, &c2, &c3])
                }
                _ => closed_form_pair(&ctx, [&c0, &c1, &c2, &c3]),
            };
            if let Some((a, b)) = found {
                return Ok(Some(RestrictionWitness { i, j, a, b }));
            }
        }
    }
    Ok(None)
}

/// Root of `c0 + c1*A + c2*B + c3*A*B`, smallest `(A, B)` in residue order.
fn brute_force_pair(ctx: &FieldCtx, c: [&FieldElem; 4]) -> Option<(FieldElem, FieldElem)> {
    for a in ctx.elements() {
        let lin = c[0] + &(c[1] * &a);
        let slope = c[2] + &(c[3] * &a);
        for b in ctx.elements() {
            if (&lin + &(&slope * &b)).is_zero() {
                return Some((a, b));
            }
        }
    }
    None
}

/// Same equation solved directly; valid over any field.
pub fn closed_form_pair(ctx: &FieldCtx, c: [&FieldElem; 4]) -> Option<(FieldElem, FieldElem)> {
    let zero = ctx.zero();
    if !c[1].is_zero() {
        Some((-(c[0] / c[1]), zero))
    } else if !c[2].is_zero() {
        Some((zero, -(c[0] / c[2])))
    } else if !c[3].is_zero() {
        Some((ctx.one(), -(c[0] / c[3])))
    } else if c[0].is_zero() {
        Some((zero.clone(), zero))
    } else {
        None
    }
}

/// First pair `i < j` for which `x_i, x_j, d_i g, d_j g` and the constant 1
/// are linearly dependent.
pub fn dependence_check(g: &Poly) -> Result<Option<DependenceWitness>> {
    g.require_multilinear()?;
    let ctx = *g.ctx();
    let n = g.nvars();
    for i in 1..=n {
        for j in i + 1..=n {
            let cols = [
                Poly::var(ctx, n, i)?,
                Poly::var(ctx, n, j)?,
                g.partial_derivative(i)?,
                g.partial_derivative(j)?,
                Poly::constant(ctx, n, ctx.one()),
            ];
            if let Some(v) = kernel_vector(&ctx, &cols) {
                let coeffs: [FieldElem; 5] = v.try_into().expect("five columns");
                return Ok(Some(DependenceWitness { i, j, coeffs }));
            }
        }
    }
    Ok(None)
}

/// A nonzero combination of `cols` equal to zero, scaled so its first
/// nonzero entry is one.
fn kernel_vector(ctx: &FieldCtx, cols: &[Poly]) -> Option<Vec<FieldElem>> {
    let mut monos: Vec<Monomial> = cols
        .iter()
        .flat_map(|p| p.terms().map(|(m, _)| m.clone()))
        .collect();
    monos.sort();
    monos.dedup();
    let rows: Vec<Vec<FieldElem>> = monos
        .iter()
        .map(|m| cols.iter().map(|p| p.coeff(m)).collect())
        .collect();
    let (rref, pivots) = row_reduce(rows, cols.len());
    let free = (0..cols.len()).find(|c| !pivots.contains(c))?;
    let mut v = vec![ctx.zero(); cols.len()];
    v[free] = ctx.one();
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = -&rref[r][free];
    }
    let lead = v.iter().find(|e| !e.is_zero()).cloned()?;
    Some(v.iter().map(|e| e / &lead).collect())
}

/// Reduced row echelon form; returns the nonzero rows and pivot columns.
fn row_reduce(mut rows: Vec<Vec<FieldElem>>, ncols: usize) -> (Vec<Vec<FieldElem>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&k| !rows[k][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = rows[r][c].inv().expect("nonzero pivot");
        rows[r] = rows[r].iter().map(|e| e * &inv).collect();
        for k in 0..rows.len() {
            if k != r && !rows[k][c].is_zero() {
                let f = rows[k][c].clone();
                let pivot_row = rows[r].clone();
                for (e, pe) in rows[k].iter_mut().zip(&pivot_row) {
                    *e = &*e - &(&f * pe);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Roots of `k2 t^2 + k1 t + k0`. `None` means the polynomial is identically
/// zero. Irrational real roots are dropped and flagged in `lost`.
fn quadratic_roots(
    ctx: &FieldCtx,
    k2: &FieldElem,
    k1: &FieldElem,
    k0: &FieldElem,
    lost: &mut bool,
) -> Option<Vec<FieldElem>> {
    if ctx.modulus() == Some(2) {
        // The quadratic formula divides by two; enumerate instead.
        if k2.is_zero() && k1.is_zero() && k0.is_zero() {
            return None;
        }
        return Some(
            ctx.elements()
                .filter(|t| (&(&(k2 * t) * t) + &(&(k1 * t) + k0)).is_zero())
                .collect(),
        );
    }
    if k2.is_zero() {
        if k1.is_zero() {
            return if k0.is_zero() { None } else { Some(vec![]) };
        }
        return Some(vec![-(k0 / k1)]);
    }
    let four = ctx.from_i64(4);
    let disc = &(k1 * k1) - &(&(&four * k2) * k0);
    match ctx.sqrt_in_field(&disc) {
        SquareRoot::Exact(r) => {
            let two_a = k2 + k2;
            let mut out = vec![&(&-k1 + &r) / &two_a];
            if !r.is_zero() {
                out.push(&(&-k1 - &r) / &two_a);
            }
            Some(out)
        }
        SquareRoot::Unrepresentable => {
            *lost = true;
            Some(vec![])
        }
        SquareRoot::None => Some(vec![]),
    }
}

/// Search for `g = l1(x_a,x_b) l2(x_c,x_d) + l3(x_a,x_c) l4(x_b,x_d)` over
/// all arrangements of the four variables.
///
/// Only arrangements in which the two products split the variables along
/// different pairings are searched; when both products use the same pairing,
/// or some form has fewer than two variables, the restriction check already
/// succeeds, so nothing is lost for refutation.
pub fn split_reconstruct(g: &Poly) -> Result<Option<SplitWitness>> {
    let mut lost = false;
    split_search(g, &mut lost)
}

fn split_search(g: &Poly, lost: &mut bool) -> Result<Option<SplitWitness>> {
    require_four(g)?;
    if g.total_degree() > 2 {
        return Ok(None);
    }
    for (a, b, c, d) in [(1, 2, 3, 4), (1, 3, 2, 4), (1, 4, 2, 3)] {
        for (c, d) in [(c, d), (d, c)] {
            if let Some(w) = split_for(g, [a, b, c, d], lost)? {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// Coefficient accessor on the squarefree monomial over `vars`.
fn cf(g: &Poly, vars: &[usize]) -> FieldElem {
    g.coeff_of(vs(vars))
}

fn affine(ctx: FieldCtx, n: usize, c0: &FieldElem, terms: &[(usize, &FieldElem)]) -> Result<Poly> {
    let mut p = Poly::constant(ctx, n, c0.clone());
    for &(v, c) in terms {
        p = p.checked_add(&Poly::monomial(ctx, n, &[v], c.clone())?)?;
    }
    Ok(p)
}

fn split_for(g: &Poly, [a, b, c, d]: [usize; 4], lost: &mut bool) -> Result<Option<SplitWitness>> {
    let ctx = *g.ctx();
    let delta = g.commutator(a, b)?;
    if delta.is_zero() {
        return direct_split(g, [a, b, c, d], lost);
    }
    let sq = |v: usize| {
        let mut e = vec![0; 4];
        e[v - 1] = 2;
        delta.coeff(&Monomial::from_exponents(e))
    };
    let (qcc, qdd, qcd) = (sq(c), sq(d), cf(&delta, &[c, d]));
    let (lc, ld, l0) = (cf(&delta, &[c]), cf(&delta, &[d]), delta.constant_term());
    let zero = ctx.zero();
    let one = ctx.one();
    // Candidate second factors, as (coef of x_c, coef of x_d, constant).
    let mut candidates: Vec<(FieldElem, FieldElem, FieldElem)> = Vec::new();
    let quad_zero = qcc.is_zero() && qdd.is_zero() && qcd.is_zero();
    if quad_zero {
        if !(lc.is_zero() && ld.is_zero()) {
            candidates.push((lc.clone(), ld.clone(), l0.clone()));
        }
    } else {
        // Factor the quadratic part into h1 * h2 with linear forms (u, v).
        let mut factor_pairs: Vec<((FieldElem, FieldElem), (FieldElem, FieldElem))> = Vec::new();
        if !qcc.is_zero() {
            for r in quadratic_roots(&ctx, &qcc, &qcd, &qdd, lost).unwrap_or_default() {
                // qcc (x_c - r1 x_d)(x_c - r2 x_d); r1 + r2 = -qcd/qcc
                let other = &(-(&qcd / &qcc)) - &r;
                factor_pairs.push(((one.clone(), -&r), (qcc.clone(), -&(&qcc * &other))));
            }
        } else {
            factor_pairs.push(((zero.clone(), one.clone()), (qcd.clone(), qdd.clone())));
            factor_pairs.push(((qcd.clone(), qdd.clone()), (zero.clone(), one.clone())));
        }
        for ((u1, v1), (u2, v2)) in factor_pairs {
            // delta = (h1 + t)(h2 + m): linear part m*h1 + t*h2, constant t*m
            let det = &(&u1 * &v2) - &(&v1 * &u2);
            if !det.is_zero() {
                let m = &(&(&lc * &v2) - &(&ld * &u2)) / &det;
                let t = &(&(&u1 * &ld) - &(&v1 * &lc)) / &det;
                if &t * &m == l0 {
                    candidates.push((u1, v1, t));
                }
            } else {
                // h2 = kappa * h1
                let kappa = if u1.is_zero() { &v2 / &v1 } else { &u2 / &u1 };
                let lin = if u1.is_zero() { &ld / &v1 } else { &lc / &u1 };
                if (&lin * &u1) != lc || (&lin * &v1) != ld {
                    continue;
                }
                // kappa t^2 - lin t + l0 = 0
                for t in quadratic_roots(&ctx, &kappa, &-&lin, &l0, lost).unwrap_or_default() {
                    candidates.push((u1.clone(), v1.clone(), t));
                }
            }
        }
    }
    for (qc, qd, q0) in candidates {
        // Normalize the second factor so its leading coefficient is one.
        let lead = if qc.is_zero() { qd.clone() } else { qc.clone() };
        if lead.is_zero() {
            continue;
        }
        let (qc, qd, q0) = (&qc / &lead, &qd / &lead, &q0 / &lead);
        if qc.is_zero() || qd.is_zero() {
            continue;
        }
        if let Some(w) = complete_split(g, [a, b, c, d], (&qc, &qd, &q0), lost)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Given `l2`, recovers `l1` up to its constant, then that constant from
/// the rank-one condition on the remaining product.
fn complete_split(
    g: &Poly,
    [a, b, c, d]: [usize; 4],
    (qc, qd, q0): (&FieldElem, &FieldElem, &FieldElem),
    lost: &mut bool,
) -> Result<Option<SplitWitness>> {
    let ctx = *g.ctx();
    let zero = ctx.zero();
    let pa = &cf(g, &[a, c]) / qc;
    let pb = &cf(g, &[b, d]) / qd;
    let l2 = affine(ctx, 4, q0, &[(c, qc), (d, qd)])?;
    let r0 = g.checked_sub(&affine(ctx, 4, &zero, &[(a, &pa), (b, &pb)])?.checked_mul(&l2)?)?;
    let rows = [vec![], vec![a], vec![c]];
    let cols = [vec![], vec![b], vec![d]];
    let allowed: Vec<VarSet> = rows
        .iter()
        .flat_map(|r| cols.iter().map(move |s| vs(r).union(vs(s))))
        .collect();
    if r0
        .terms()
        .any(|(m, _)| !m.is_squarefree() || !allowed.contains(&m.support()))
    {
        return Ok(None);
    }
    // entry = e0 + e1 * p0, p0 being the constant of l1
    let l2_at = |vars: &VarSet| -> FieldElem {
        if vars.is_empty() {
            q0.clone()
        } else if *vars == vs(&[c]) {
            qc.clone()
        } else if *vars == vs(&[d]) {
            qd.clone()
        } else {
            zero.clone()
        }
    };
    let entry = |r: usize, s: usize| {
        let set = vs(&rows[r]).union(vs(&cols[s]));
        (r0.coeff_of(set), -l2_at(&set))
    };
    let m: Vec<Vec<(FieldElem, FieldElem)>> = (0..3)
        .map(|r| (0..3).map(|s| entry(r, s)).collect())
        .collect();
    let mut minors = Vec::new();
    for (r1, r2) in [(0, 1), (0, 2), (1, 2)] {
        for (s1, s2) in [(0, 1), (0, 2), (1, 2)] {
            let (x, y, z, w) = (&m[r1][s1], &m[r2][s2], &m[r1][s2], &m[r2][s1]);
            // (x0 + x1 p)(y0 + y1 p) - (z0 + z1 p)(w0 + w1 p)
            let k0 = &(&x.0 * &y.0) - &(&z.0 * &w.0);
            let k1 = &(&(&x.0 * &y.1) + &(&x.1 * &y.0)) - &(&(&z.0 * &w.1) + &(&z.1 * &w.0));
            let k2 = &(&x.1 * &y.1) - &(&z.1 * &w.1);
            minors.push([k0, k1, k2]);
        }
    }
    let p0_candidates = minors
        .iter()
        .find_map(|k| quadratic_roots(&ctx, &k[2], &k[1], &k[0], lost))
        .unwrap_or_else(|| vec![zero.clone()]);
    for p0 in p0_candidates {
        let ok = minors
            .iter()
            .all(|k| (&(&k[0] + &(&k[1] * &p0)) + &(&(&k[2] * &p0) * &p0)).is_zero());
        if !ok {
            continue;
        }
        let val: Vec<Vec<FieldElem>> = m
            .iter()
            .map(|row| row.iter().map(|(e0, e1)| e0 + &(e1 * &p0)).collect())
            .collect();
        let l1 = affine(ctx, 4, &p0, &[(a, &pa), (b, &pb)])?;
        let (l3, l4) = match (0..3)
            .flat_map(|r| (0..3).map(move |s| (r, s)))
            .find(|&(r, s)| !val[r][s].is_zero())
        {
            None => (Poly::zero(ctx, 4), Poly::constant(ctx, 4, ctx.one())),
            Some((r, s)) => {
                let piv = &val[r][s];
                let l3 = affine(ctx, 4, &val[0][s], &[(a, &val[1][s]), (c, &val[2][s])])?;
                let l4 = affine(
                    ctx,
                    4,
                    &(&val[r][0] / piv),
                    &[(b, &(&val[r][1] / piv)), (d, &(&val[r][2] / piv))],
                )?;
                (l3, l4)
            }
        };
        let w = normalize_split([l1, l2.clone(), l3, l4])?;
        if w.expand()? == *g {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Makes `l2` and `l4` monic (first nonzero variable coefficient one),
/// moving the scale into `l1` and `l3`.
fn normalize_split([l1, l2, l3, l4]: [Poly; 4]) -> Result<SplitWitness> {
    let lead = |p: &Poly| p.vars().min().map(|v| p.coeff_of(VarSet::empty().with(v)));
    let fix = |l: Poly, r: Poly| -> Result<(Poly, Poly)> {
        match lead(&r) {
            Some(k) if !k.is_one() => Ok((l.scale(&k)?, r.scale(&k.inv()?)?)),
            _ => Ok((l, r)),
        }
    };
    let (l1, l2) = fix(l1, l2)?;
    let (l3, l4) = fix(l3, l4)?;
    Ok(SplitWitness {
        forms: [l1, l2, l3, l4],
    })
}

/// Solves for the split directly when the commutator vanishes identically.
/// Scales are fixed by making the `x_a` coefficients of `l1` and `l3` one.
fn direct_split(
    g: &Poly,
    [a, b, c, d]: [usize; 4],
    lost: &mut bool,
) -> Result<Option<SplitWitness>> {
    let ctx = *g.ctx();
    let one = ctx.one();
    let zero = ctx.zero();
    let k = |vars: &[usize]| cf(g, vars);
    let (g_ab, g_ac, g_ad, g_bc, g_bd, g_cd) = (
        k(&[a, b]),
        k(&[a, c]),
        k(&[a, d]),
        k(&[b, c]),
        k(&[b, d]),
        k(&[c, d]),
    );
    if g_ab.is_zero() || g_ac.is_zero() {
        return Ok(None);
    }
    let sb = g_ab.clone();
    let qc = g_ac.clone();
    let k2 = -&(&g_ad * &g_ac);
    let k1 = &(&(&g_ad * &g_bc) + &(&g_bd * &g_ac)) - &(&g_cd * &g_ab);
    let k0 = -&(&g_bd * &g_bc);
    let pbs = quadratic_roots(&ctx, &k2, &k1, &k0, lost).unwrap_or_else(|| vec![one.clone()]);
    for pb in pbs {
        if pb.is_zero() {
            continue;
        }
        let rc = &(&g_bc - &(&pb * &g_ac)) / &g_ab;
        if rc.is_zero() {
            continue;
        }
        let qd = &g_bd / &pb;
        let sd = &g_cd / &rc;
        // Unknowns (p0, q0, r0, s0); linear equations from the degree-one terms.
        let rows = vec![
            vec![
                zero.clone(),
                one.clone(),
                zero.clone(),
                one.clone(),
                k(&[a]),
            ],
            vec![zero.clone(), pb.clone(), sb.clone(), zero.clone(), k(&[b])],
            vec![qc.clone(), zero.clone(), zero.clone(), rc.clone(), k(&[c])],
            vec![qd.clone(), zero.clone(), sd.clone(), zero.clone(), k(&[d])],
        ];
        let (rref, pivots) = row_reduce(rows, 5);
        if pivots.contains(&4) {
            continue; // inconsistent
        }
        let free: Vec<usize> = (0..4).filter(|c| !pivots.contains(c)).collect();
        if free.len() > 1 {
            continue;
        }
        let base = |t: &FieldElem| -> Vec<FieldElem> {
            let mut x = vec![zero.clone(); 4];
            if let Some(&f) = free.first() {
                x[f] = t.clone();
            }
            for (r, &pc) in pivots.iter().enumerate() {
                let mut v = rref[r][4].clone();
                if let Some(&f) = free.first() {
                    v = &v - &(&rref[r][f] * t);
                }
                x[pc] = v;
            }
            x
        };
        // Constant term p0 q0 + r0 s0 = g_0 is quadratic in the free parameter.
        let ts = if free.is_empty() {
            vec![zero.clone()]
        } else if ctx.modulus() == Some(2) {
            ctx.elements().collect()
        } else {
            let eval = |t: &FieldElem| {
                let x = base(t);
                &(&(&x[0] * &x[1]) + &(&x[2] * &x[3])) - &g.constant_term()
            };
            let (e0, e1, em) = (eval(&zero), eval(&one), eval(&-&one));
            // e(t) = k0 + k1 t + k2 t^2 interpolated from t = 0, 1, -1
            let two = ctx.from_i64(2);
            let kk2 = &(&(&e1 + &em) - &(&e0 + &e0)) / &two;
            let kk1 = &(&e1 - &em) / &two;
            quadratic_roots(&ctx, &kk2, &kk1, &e0, lost).unwrap_or_else(|| vec![zero.clone()])
        };
        for t in ts {
            let x = base(&t);
            let l1 = affine(ctx, 4, &x[0], &[(a, &one), (b, &pb)])?;
            let l2 = affine(ctx, 4, &x[1], &[(c, &qc), (d, &qd)])?;
            let l3 = affine(ctx, 4, &x[2], &[(a, &one), (c, &rc)])?;
            let l4 = affine(ctx, 4, &x[3], &[(b, &sb), (d, &sd)])?;
            let w = normalize_split([l1, l2, l3, l4])?;
            if w.expand()? == *g {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

pub fn structural_report(g: &Poly) -> Result<StructuralReport> {
    let c1p = restriction_check(g)?;
    let c2p = dependence_check(g)?;
    let mut lost = false;
    let c3p = split_search(g, &mut lost)?;
    Ok(StructuralReport {
        c1p,
        c2p,
        c3p,
        unrepresentable_root: lost,
    })
}

/// Full report for the weighted quadratic family: scalar and structural conditions.
pub fn f_family_report(
    ctx: FieldCtx,
    alpha: &FieldElem,
    beta: &FieldElem,
    gamma: &FieldElem,
) -> Result<ConditionReport> {
    let mut r = weight_conditions(ctx, alpha, beta, gamma)?;
    r.structural = Some(structural_report(&gen_f(ctx, alpha, beta, gamma)?)?);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sum2Verdict {
    RefutedNotSum2(StructuralReport),
    Inconclusive(StructuralReport),
    ExpressibleWitness(Decomposition),
}

impl Sum2Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Sum2Verdict::RefutedNotSum2(_) => "RefutedNotSum2",
            Sum2Verdict::Inconclusive(_) => "Inconclusive",
            Sum2Verdict::ExpressibleWitness(_) => "ExpressibleWitness",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Sum2Verdict::RefutedNotSum2(r) | Sum2Verdict::Inconclusive(r) => {
                json!({ "verdict": self.label(), "conditions": r.to_json() })
            }
            Sum2Verdict::ExpressibleWitness(d) => {
                json!({ "verdict": self.label(), "certificate": d.to_json() })
            }
        }
    }
}

/// Refutes or certifies membership of a 4-variate polynomial in the
/// two-summand class.
pub fn refute_sum2(g: &Poly) -> Result<Sum2Verdict> {
    require_four(g)?;
    let report = structural_report(g)?;
    if let Some(w) = &report.c3p {
        return Ok(Sum2Verdict::ExpressibleWitness(w.to_decomposition(g)?));
    }
    if report.c1p.is_none() && report.c2p.is_none() {
        return Ok(if report.unrepresentable_root {
            Sum2Verdict::Inconclusive(report)
        } else {
            Sum2Verdict::RefutedNotSum2(report)
        });
    }
    let ctx = *g.ctx();
    if let Some([al, be, ga]) = match_f_family(g) {
        match decompose_f(ctx, &al, &be, &ga) {
            Ok(FOutcome::Expressible(d)) => return Ok(Sum2Verdict::ExpressibleWitness(d)),
            Ok(FOutcome::NotExpressible(_)) => return Ok(Sum2Verdict::RefutedNotSum2(report)),
            Err(Error::RootNotRepresentable(_)) => return Ok(Sum2Verdict::Inconclusive(report)),
            Err(e) => return Err(e),
        }
    }
    if let Some(a) = match_sym4(g) {
        return Ok(Sum2Verdict::ExpressibleWitness(decompose_sym4(ctx, &a)?));
    }
    if g.vars().len() <= 3 {
        return Ok(Sum2Verdict::ExpressibleWitness(decompose_generic(g)?));
    }
    Ok(Sum2Verdict::Inconclusive(report))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RopVerdict {
    NotRop,
    /// Setting `x_var = value` leaves a polynomial of degree at most one.
    Inconclusive {
        var: usize,
        value: FieldElem,
    },
}

/// Three-variable test: a read-once polynomial becomes linear after fixing a
/// single variable. If no variable admits such a value, `g` is not read-once.
pub fn refute_read_once_3var(g: &Poly) -> Result<RopVerdict> {
    g.require_multilinear()?;
    let vars: Vec<usize> = g.vars().iter().collect();
    if vars.len() != 3 {
        return Err(Error::WrongArity {
            expected: 3,
            found: vars.len(),
        });
    }
    let cubic = g.coeff_of(vs(&vars));
    for &i in &vars {
        let rest: Vec<usize> = vars.iter().copied().filter(|&v| v != i).collect();
        // After x_i = A only x_j x_k remains quadratic, with coefficient c_jk + A c_ijk.
        let pair = g.coeff_of(vs(&rest));
        let value = if !cubic.is_zero() {
            -(&pair / &cubic)
        } else if pair.is_zero() {
            g.ctx().zero()
        } else {
            continue;
        };
        return Ok(RopVerdict::Inconclusive { var: i, value });
    }
    Ok(RopVerdict::NotRop)
}
