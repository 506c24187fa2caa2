//! Sparse exact polynomials over named variables `x1..xn`.
//!
//! Terms are keyed by full exponent vectors, so squares produced by the
//! commutator are ordinary terms; multilinearity is a predicate checked by
//! the operations that need it. Variables are 1-based throughout.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::numfield::{FieldCtx, FieldElem};

/// Exponent vector, ordered graded-lexicographically (x1 > x2 > ...).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    /// Squarefree monomial over the given variable set.
    pub fn from_set(nvars: usize, vars: VarSet) -> Self {
        let mut e = vec![0; nvars];
        for v in vars.iter() {
            e[v - 1] = 1;
        }
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Exponent of `x_var` (1-based).
    pub fn exponent(&self, var: usize) -> u32 {
        self.0[var - 1]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_squarefree(&self) -> bool {
        self.0.iter().all(|&e| e <= 1)
    }

    pub fn support(&self) -> VarSet {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .fold(VarSet::empty(), |s, (i, _)| s.with(i + 1))
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A set of variable indices `1..=64`, stored as a bitset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(u64);

impl VarSet {
    pub const fn empty() -> Self {
        VarSet(0)
    }

    pub fn from_bits(bits: u64) -> Self {
        VarSet(bits)
    }

    /// `{x1, ..., xn}`.
    pub fn full(n: usize) -> Self {
        VarSet(if n >= 64 { u64::MAX } else { (1u64 << n) - 1 })
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn with(self, var: usize) -> Self {
        VarSet(self.0 | (1 << (var - 1)))
    }

    pub fn contains(self, var: usize) -> bool {
        (1..=64).contains(&var) && self.0 & (1 << (var - 1)) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64)
            .filter(move |i| self.0 & (1 << i) != 0)
            .map(|i| i + 1)
    }

    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize + 1)
    }
}

impl FromIterator<usize> for VarSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(VarSet::empty(), VarSet::with)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    ctx: FieldCtx,
    nvars: usize,
    terms: BTreeMap<Monomial, FieldElem>,
}

impl Poly {
    pub fn zero(ctx: FieldCtx, nvars: usize) -> Self {
        Poly {
            ctx,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: FieldCtx, nvars: usize, c: FieldElem) -> Self {
        let mut p = Poly::zero(ctx, nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn var(ctx: FieldCtx, nvars: usize, var: usize) -> Result<Self> {
        Poly::monomial(ctx, nvars, &[var], ctx.one())
    }

    /// `coef * prod(x_v for v in vars)`; repeated variables raise the power.
    pub fn monomial(ctx: FieldCtx, nvars: usize, vars: &[usize], coef: FieldElem) -> Result<Self> {
        ctx.check(&coef)?;
        let mut e = vec![0; nvars];
        for &v in vars {
            check_var(v, nvars)?;
            e[v - 1] += 1;
        }
        let mut p = Poly::zero(ctx, nvars);
        p.add_term(Monomial(e), coef);
        Ok(p)
    }

    pub fn from_terms<I>(ctx: FieldCtx, nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, FieldElem)>,
    {
        let mut p = Poly::zero(ctx, nvars);
        for (m, c) in terms {
            ctx.check(&c)?;
            if m.0.len() != nvars {
                return Err(Error::WrongArity {
                    expected: nvars,
                    found: m.0.len(),
                });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: FieldElem) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Terms in increasing graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &FieldElem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> FieldElem {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| self.ctx.zero())
    }

    /// Coefficient of the squarefree monomial on `vars`.
    pub fn coeff_of(&self, vars: VarSet) -> FieldElem {
        self.coeff(&Monomial::from_set(self.nvars, vars))
    }

    pub fn constant_term(&self) -> FieldElem {
        self.coeff(&Monomial::one(self.nvars))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(Monomial::is_squarefree)
    }

    pub fn require_multilinear(&self) -> Result<()> {
        if self.is_multilinear() {
            Ok(())
        } else {
            Err(Error::NotMultilinear)
        }
    }

    /// Var(p): the variables with a positive exponent in some term.
    pub fn vars(&self) -> VarSet {
        self.terms
            .keys()
            .fold(VarSet::empty(), |s, m| s.union(m.support()))
    }

    fn compatible(&self, other: &Poly) -> Result<()> {
        if !self.ctx.same_field(&other.ctx) {
            return Err(Error::FieldMismatch(
                self.ctx.to_string(),
                other.ctx.to_string(),
            ));
        }
        if self.nvars != other.nvars {
            return Err(Error::WrongArity {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    /// Full product; no multilinear reduction.
    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.compatible(other)?;
        let mut out = Poly::zero(self.ctx, self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &FieldElem) -> Result<Poly> {
        self.ctx.check(c)?;
        if c.is_zero() {
            return Ok(Poly::zero(self.ctx, self.nvars));
        }
        Ok(Poly {
            ctx: self.ctx,
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        })
    }

    /// `p + c` for a scalar `c`.
    pub fn add_constant(&self, c: &FieldElem) -> Result<Poly> {
        self.ctx.check(c)?;
        let mut out = self.clone();
        out.add_term(Monomial::one(self.nvars), c.clone());
        Ok(out)
    }

    /// Substitutes `x_var = a`; the result no longer mentions `x_var`.
    pub fn restrict(&self, var: usize, a: &FieldElem) -> Result<Poly> {
        check_var(var, self.nvars)?;
        self.ctx.check(a)?;
        let mut out = Poly::zero(self.ctx, self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var - 1];
            let mut m2 = m.clone();
            m2.0[var - 1] = 0;
            out.add_term(m2, c * &a.pow(e));
        }
        Ok(out)
    }

    pub fn restrict_many(&self, assignment: &[(usize, FieldElem)]) -> Result<Poly> {
        assignment
            .iter()
            .try_fold(self.clone(), |p, (v, a)| p.restrict(*v, a))
    }

    /// Formal partial derivative with respect to `x_var`.
    pub fn partial_derivative(&self, var: usize) -> Result<Poly> {
        check_var(var, self.nvars)?;
        let mut out = Poly::zero(self.ctx, self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var - 1];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[var - 1] = e - 1;
            out.add_term(m2, c * &self.ctx.from_i64(e as i64));
        }
        Ok(out)
    }

    /// The commutator `p|00 * p|11 - p|01 * p|10` of `x_i`, `x_j`.
    pub fn commutator(&self, i: usize, j: usize) -> Result<Poly> {
        check_var(i, self.nvars)?;
        check_var(j, self.nvars)?;
        if i == j {
            return Err(Error::InternalInvariantViolation(format!(
                "commutator needs distinct variables, got x{i} twice"
            )));
        }
        self.require_multilinear()?;
        let (zero, one) = (self.ctx.zero(), self.ctx.one());
        let at =
            |a: &FieldElem, b: &FieldElem| self.restrict_many(&[(i, a.clone()), (j, b.clone())]);
        let p00 = at(&zero, &zero)?;
        let p11 = at(&one, &one)?;
        let p01 = at(&zero, &one)?;
        let p10 = at(&one, &zero)?;
        p00.checked_mul(&p11)?.checked_sub(&p01.checked_mul(&p10)?)
    }

    pub fn eval(&self, point: &[FieldElem]) -> Result<FieldElem> {
        if point.len() != self.nvars {
            return Err(Error::WrongArity {
                expected: self.nvars,
                found: point.len(),
            });
        }
        for x in point {
            self.ctx.check(x)?;
        }
        let mut acc = self.ctx.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t = &t * &x.pow(e);
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Renames `x_v` to `x_{perm[v-1]}`; `perm` must be a permutation of `1..=nvars`.
    pub fn rename(&self, perm: &[usize]) -> Result<Poly> {
        check_permutation(perm, self.nvars)?;
        let mut out = Poly::zero(self.ctx, self.nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; self.nvars];
            for (v, &x) in m.0.iter().enumerate() {
                e[perm[v] - 1] = x;
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Same polynomial in a larger ambient variable count.
    pub fn embed(&self, nvars: usize) -> Result<Poly> {
        if nvars < self.nvars && !self.vars().is_subset(VarSet::full(nvars)) {
            return Err(Error::TooManyVariables {
                found: self.nvars,
                max: nvars,
            });
        }
        let mut out = Poly::zero(self.ctx, nvars);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            e.resize(nvars, 0);
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Same polynomial, reinterpreted over a context of the same field.
    pub fn with_ctx(mut self, ctx: FieldCtx) -> Result<Poly> {
        if !self.ctx.same_field(&ctx) {
            return Err(Error::FieldMismatch(self.ctx.to_string(), ctx.to_string()));
        }
        self.ctx = ctx;
        Ok(self)
    }
}

fn check_var(var: usize, nvars: usize) -> Result<()> {
    if var == 0 || var > nvars {
        Err(Error::VariableOutOfRange { var, nvars })
    } else {
        Ok(())
    }
}

pub(crate) fn check_permutation(perm: &[usize], nvars: usize) -> Result<()> {
    let mut seen = vec![false; nvars];
    if perm.len() != nvars {
        return Err(Error::WrongArity {
            expected: nvars,
            found: perm.len(),
        });
    }
    for &v in perm {
        check_var(v, nvars)?;
        if std::mem::replace(&mut seen[v - 1], true) {
            return Err(Error::InternalInvariantViolation(format!(
                "x{v} repeated in permutation"
            )));
        }
    }
    Ok(())
}

/// Inverse of a 1-based permutation.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &v) in perm.iter().enumerate() {
        inv[v - 1] = i + 1;
    }
    inv
}

/// The elementary symmetric polynomial of degree `k` in `n` variables.
pub fn gen_symmetric(ctx: FieldCtx, n: usize, k: usize) -> Result<Poly> {
    if k > n {
        return Err(Error::WrongArity {
            expected: n,
            found: k,
        });
    }
    let mut p = Poly::zero(ctx, n);
    for_each_subset(n, k, &mut |set| {
        p.add_term(Monomial::from_set(n, set), ctx.one());
    });
    Ok(p)
}

fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(VarSet)) {
    fn go(start: usize, n: usize, k: usize, acc: VarSet, f: &mut dyn FnMut(VarSet)) {
        if k == 0 {
            f(acc);
            return;
        }
        for v in start..=n {
            if n - v + 1 < k {
                break;
            }
            go(v + 1, n, k - 1, acc.with(v), f);
        }
    }
    go(1, n, k, VarSet::empty(), f);
}

/// `alpha * S_n^n + beta * S_n^{n-1}`.
pub fn gen_m(ctx: FieldCtx, n: usize, alpha: &FieldElem, beta: &FieldElem) -> Result<Poly> {
    let top = gen_symmetric(ctx, n, n)?.scale(alpha)?;
    let next = if n >= 1 {
        gen_symmetric(ctx, n, n - 1)?.scale(beta)?
    } else {
        Poly::zero(ctx, 0)
    };
    top.checked_add(&next)
}

/// `alpha(x1x2 + x3x4) + beta(x1x3 + x2x4) + gamma(x1x4 + x2x3)`.
pub fn gen_f(
    ctx: FieldCtx,
    alpha: &FieldElem,
    beta: &FieldElem,
    gamma: &FieldElem,
) -> Result<Poly> {
    let mut p = Poly::zero(ctx, 4);
    for (c, pairs) in [
        (alpha, [[1, 2], [3, 4]]),
        (beta, [[1, 3], [2, 4]]),
        (gamma, [[1, 4], [2, 3]]),
    ] {
        ctx.check(c)?;
        for pair in pairs {
            p.add_term(Monomial::from_set(4, pair.into_iter().collect()), c.clone());
        }
    }
    Ok(p)
}

/// Parses the textual form printed by `Display`: `+`/`-` separated terms,
/// each a `*`-product of scalars (`3`, `5/2`) and factors `x<k>` or `x<k>^e`.
///
/// With `nvars == None` the ambient count is the largest index mentioned.
pub fn parse_poly(ctx: FieldCtx, text: &str, nvars: Option<usize>) -> Result<Poly> {
    let terms = parse_terms(text)?;
    let max_var = terms
        .iter()
        .flat_map(|t| t.factors.iter().map(|&(v, _, _)| v))
        .max()
        .unwrap_or(0);
    let n = match nvars {
        Some(n) => {
            if let Some(&(v, _, pos)) = terms
                .iter()
                .flat_map(|t| t.factors.iter())
                .find(|&&(v, _, _)| v > n)
            {
                return Err(Error::Syntax {
                    pos,
                    msg: format!("x{v} exceeds {n} variables"),
                });
            }
            n
        }
        None => max_var,
    };
    let mut out = Poly::zero(ctx, n);
    for t in terms {
        let mut coef = if t.negative { -ctx.one() } else { ctx.one() };
        for (num, den, pos) in &t.scalars {
            let s = ctx
                .parse_scalar(&format!("{num}/{den}"))
                .map_err(|e| Error::Syntax {
                    pos: *pos,
                    msg: e.to_string(),
                })?;
            coef = &coef * &s;
        }
        let mut e = vec![0u32; n];
        for (v, pow, _) in t.factors {
            e[v - 1] += pow;
        }
        out.add_term(Monomial(e), coef);
    }
    Ok(out)
}

struct RawTerm {
    negative: bool,
    /// (numerator, denominator, position)
    scalars: Vec<(String, String, usize)>,
    /// (variable, exponent, position)
    factors: Vec<(usize, u32, usize)>,
}

fn parse_terms(text: &str) -> Result<Vec<RawTerm>> {
    let b = text.as_bytes();
    let mut i = 0;
    let skip_ws = |i: &mut usize| {
        while *i < b.len() && b[*i].is_ascii_whitespace() {
            *i += 1;
        }
    };
    let digits = |i: &mut usize| -> Option<String> {
        let start = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        (*i > start).then(|| text[start..*i].to_string())
    };
    let syntax = |pos: usize, msg: &str| Error::Syntax {
        pos,
        msg: msg.to_string(),
    };
    let mut terms = Vec::new();
    skip_ws(&mut i);
    if i == b.len() {
        return Err(syntax(0, "empty polynomial"));
    }
    let mut first = true;
    loop {
        skip_ws(&mut i);
        let mut negative = false;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            negative = b[i] == b'-';
            i += 1;
        } else if !first {
            return Err(syntax(i, "expected `+` or `-`"));
        }
        first = false;
        let mut term = RawTerm {
            negative,
            scalars: Vec::new(),
            factors: Vec::new(),
        };
        loop {
            skip_ws(&mut i);
            let pos = i;
            if i >= b.len() {
                return Err(syntax(pos, "expected a factor"));
            }
            if b[i].is_ascii_digit() {
                let num = digits(&mut i).unwrap();
                skip_ws(&mut i);
                let den = if i < b.len() && b[i] == b'/' {
                    i += 1;
                    skip_ws(&mut i);
                    digits(&mut i).ok_or_else(|| syntax(i, "expected a denominator"))?
                } else {
                    "1".to_string()
                };
                term.scalars.push((num, den, pos));
            } else if b[i].is_ascii_alphabetic() || b[i] == b'_' {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                let name = &text[start..i];
                let var = name
                    .strip_prefix('x')
                    .filter(|d| !d.is_empty() && d.bytes().all(|c| c.is_ascii_digit()))
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&v| v >= 1)
                    .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
                skip_ws(&mut i);
                let mut pow = 1;
                if i < b.len() && b[i] == b'^' {
                    i += 1;
                    skip_ws(&mut i);
                    let at = i;
                    pow = digits(&mut i)
                        .and_then(|d| d.parse::<u32>().ok())
                        .ok_or_else(|| syntax(at, "expected an exponent"))?;
                }
                term.factors.push((var, pow, pos));
            } else {
                return Err(syntax(
                    pos,
                    &format!("unexpected `{}`", text[pos..].chars().next().unwrap()),
                ));
            }
            skip_ws(&mut i);
            if i < b.len() && b[i] == b'*' {
                i += 1;
                continue;
            }
            break;
        }
        terms.push(term);
        skip_ws(&mut i);
        if i == b.len() {
            return Ok(terms);
        }
    }
}

impl fmt::Display for Poly {
    /// Graded-lex descending, e.g. `2*x1*x2 - x3 + 1/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let mag = if negative { -c } else { c.clone() };
            match (idx, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let factors: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| {
                        if e == 1 {
                            format!("x{}", i + 1)
                        } else {
                            format!("x{}^{e}", i + 1)
                        }
                    })
                    .collect();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{mag}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

macro_rules! poly_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, checked_add);
poly_binop!(Sub, sub, checked_sub);
poly_binop!(Mul, mul, checked_mul);

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-self.ctx.one()).expect("same field")
    }
}
