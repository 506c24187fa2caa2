//! Explicit sum-of-read-once constructions.
//!
//! Every constructor checks its own output before returning, so a
//! [`Decomposition`] handed out by this module always has `verified == true`.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::analyze::{weight_conditions, ConditionReport};
use crate::error::{Error, Result};
use crate::mpoly::{gen_f, gen_m, gen_symmetric, invert_permutation, parse_poly, Poly, VarSet};
use crate::numfield::{FieldCtx, FieldElem, SquareRoot};
use crate::rof::{rof_from_bivariate, rof_linear, Gate, Rof};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Construction {
    Generic,
    SymmetricM,
    Sym4Table,
    FFamily,
    /// Certificate recovered from a product-of-linear-forms split.
    Reconstructed,
}

impl Construction {
    pub fn as_str(self) -> &'static str {
        match self {
            Construction::Generic => "generic",
            Construction::SymmetricM => "symmetric-m",
            Construction::Sym4Table => "sym4-table",
            Construction::FFamily => "f-family",
            Construction::Reconstructed => "reconstructed",
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "generic" => Construction::Generic,
            "symmetric-m" => Construction::SymmetricM,
            "sym4-table" => Construction::Sym4Table,
            "f-family" => Construction::FFamily,
            "reconstructed" => Construction::Reconstructed,
            other => return Err(Error::Format(format!("unknown construction `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub target: Poly,
    pub summands: Vec<Rof>,
    pub construction: Construction,
    pub verified: bool,
}

impl Decomposition {
    /// Builds and verifies; an unverifiable result is an internal bug.
    fn certified(target: Poly, mut summands: Vec<Rof>, construction: Construction) -> Result<Self> {
        let ctx = *target.ctx();
        let n = target.nvars();
        summands.retain(|t| t.expand(&ctx, n).map(|p| !p.is_zero()).unwrap_or(true));
        if summands.is_empty() {
            summands.push(Rof::constant(&ctx, ctx.zero()));
        }
        let mut d = Decomposition {
            target,
            summands,
            construction,
            verified: false,
        };
        if !verify_decomposition(&mut d) {
            return Err(Error::InternalInvariantViolation(format!(
                "{construction} construction does not reproduce {}",
                d.target
            )));
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": self.target.ctx().to_string(),
            "nvars": self.target.nvars(),
            "target": self.target.to_string(),
            "construction": self.construction.as_str(),
            "summands": self.summands.iter().map(Rof::to_json).collect::<Vec<_>>(),
            "verified": self.verified,
        })
    }

    /// Parses the JSON form. `ctx` overrides the embedded field selector.
    /// The `verified` flag is read as-is; call [`verify_decomposition`] to recheck.
    pub fn from_json(value: &Value, ctx: Option<FieldCtx>) -> Result<Self> {
        let field = |k: &str| {
            value
                .get(k)
                .ok_or_else(|| Error::Format(format!("missing `{k}`")))
        };
        let ctx = match ctx {
            Some(c) => c,
            None => field("field")?
                .as_str()
                .ok_or_else(|| Error::Format("`field` must be a string".into()))?
                .parse()?,
        };
        let target_text = field("target")?
            .as_str()
            .ok_or_else(|| Error::Format("`target` must be a string".into()))?;
        let nvars = value
            .get("nvars")
            .and_then(Value::as_u64)
            .map(|n| n as usize);
        let target = parse_poly(ctx, target_text, nvars)?;
        let construction = field("construction")?
            .as_str()
            .ok_or_else(|| Error::Format("`construction` must be a string".into()))?
            .parse()?;
        let summands = field("summands")?
            .as_array()
            .ok_or_else(|| Error::Format("`summands` must be an array".into()))?
            .iter()
            .map(|s| Rof::from_json(s, &ctx))
            .collect::<Result<Vec<_>>>()?;
        let verified = value
            .get("verified")
            .and_then(Value::as_bool)
            .unwrap_or(false);
        Ok(Decomposition {
            target,
            summands,
            construction,
            verified,
        })
    }
}

/// Rechecks read-onceness and the exact sum; stores and returns the verdict.
pub fn verify_decomposition(d: &mut Decomposition) -> bool {
    let ctx = *d.target.ctx();
    let n = d.target.nvars();
    let mut acc = Poly::zero(ctx, n);
    let mut ok = true;
    for t in &d.summands {
        match t.expand(&ctx, n).and_then(|p| acc.checked_add(&p)) {
            Ok(sum) => acc = sum,
            Err(_) => {
                ok = false;
                break;
            }
        }
    }
    d.verified = ok && acc == d.target;
    d.verified
}

/// Upper bound on the generic construction's summand count for `m` effective variables.
pub fn generic_bound(m: usize) -> usize {
    match m {
        0..=2 => 1,
        3 => 2,
        _ => 3 << (m - 4),
    }
}

/// Any multilinear polynomial as at most `3 * 2^(m-4)` read-once summands,
/// `m` being the number of variables it depends on.
pub fn decompose_generic(p: &Poly) -> Result<Decomposition> {
    p.require_multilinear()?;
    let vars: Vec<usize> = p.vars().iter().collect();
    let summands = generic_rec(p, &vars)?;
    Decomposition::certified(p.clone(), summands, Construction::Generic)
}

fn generic_rec(p: &Poly, vars: &[usize]) -> Result<Vec<Rof>> {
    let ctx = *p.ctx();
    match vars.len() {
        0..=2 => Ok(vec![rof_from_bivariate(p)?]),
        3 => {
            let last = vars[2];
            let g = p.partial_derivative(last)?;
            let h = p.restrict(last, &ctx.zero())?;
            Ok(vec![
                Rof::mul(&ctx, rof_from_bivariate(&g)?, Rof::var(&ctx, last)),
                rof_from_bivariate(&h)?,
            ])
        }
        4 => generic_base4(p, [vars[0], vars[1], vars[2], vars[3]]),
        m => {
            let last = vars[m - 1];
            let g = p.partial_derivative(last)?;
            let h = p.restrict(last, &ctx.zero())?;
            let rest = &vars[..m - 1];
            let mut out: Vec<Rof> = generic_rec(&g, rest)?
                .into_iter()
                .map(|t| Rof::mul(&ctx, t, Rof::var(&ctx, last)))
                .collect();
            out.extend(generic_rec(&h, rest)?);
            Ok(out)
        }
    }
}

fn set(vs: &[usize]) -> VarSet {
    vs.iter().copied().collect()
}

/// Three summands for a polynomial on exactly the four given variables.
fn generic_base4(p: &Poly, v: [usize; 4]) -> Result<Vec<Rof>> {
    let ctx = *p.ctx();
    let n = p.nvars();
    let coef = |s: &[usize]| p.coeff_of(set(s));
    let pairs: Vec<(usize, usize)> = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
        .collect();
    let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| !coef(&[v[i], v[j]]).is_zero()) else {
        // No degree-two terms: linear part, x1x2(...) and x3x4(...).
        let mono = |vs: &[usize], c: FieldElem| Poly::monomial(ctx, n, vs, c);
        let mut lin = Poly::constant(ctx, n, p.constant_term());
        for &x in &v {
            lin = lin.checked_add(&mono(&[x], coef(&[x]))?)?;
        }
        let f2_tail = mono(&[v[2]], coef(&[v[0], v[1], v[2]]))?
            .checked_add(&mono(&[v[3]], coef(&[v[0], v[1], v[3]]))?)?;
        let f3_tail = mono(&[v[0]], coef(&[v[0], v[2], v[3]]))?
            .checked_add(&mono(&[v[1]], coef(&[v[1], v[2], v[3]]))?)?
            .checked_add(&mono(&[v[0], v[1]], coef(&v))?)?;
        let pair = |a: usize, b: usize| Rof::mul(&ctx, Rof::var(&ctx, a), Rof::var(&ctx, b));
        return Ok(vec![
            rof_linear(&lin)?,
            Rof::mul(&ctx, pair(v[0], v[1]), rof_from_bivariate(&f2_tail)?),
            Rof::mul(&ctx, pair(v[2], v[3]), rof_from_bivariate(&f3_tail)?),
        ]);
    };
    // Slot the chosen pair at positions (1,3), the others at (2,4) in order.
    let others: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
    let (x1, x3) = (v[i], v[j]);
    let (x2, x4) = (v[others[0]], v[others[1]]);
    let a13 = coef(&[x1, x3]);
    let bivar = |vs: &[usize], with_const: bool| -> Result<Poly> {
        let mut terms = Vec::new();
        for mask in 0u32..(1 << vs.len()) {
            let sub: Vec<usize> = vs
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &x)| x)
                .collect();
            if sub.is_empty() && !with_const {
                continue;
            }
            terms.push(Poly::monomial(ctx, n, &sub, coef(&sub))?);
        }
        terms
            .into_iter()
            .try_fold(Poly::zero(ctx, n), |acc, t| acc.checked_add(&t))
    };
    let f1 = Rof::add(
        &ctx,
        rof_from_bivariate(&bivar(&[x1, x2], true)?)?,
        rof_from_bivariate(&bivar(&[x3, x4], false)?)?,
    );

    // (A13 x1 + A23 x2 + A123 x1x2) * (x3 + (A14/A13) x4 + (A134/A13) x3x4)
    let left = Poly::monomial(ctx, n, &[x1], a13.clone())?
        .checked_add(&Poly::monomial(ctx, n, &[x2], coef(&[x2, x3]))?)?
        .checked_add(&Poly::monomial(ctx, n, &[x1, x2], coef(&[x1, x2, x3]))?)?;
    let right = Poly::var(ctx, n, x3)?
        .checked_add(&Poly::monomial(ctx, n, &[x4], &coef(&[x1, x4]) / &a13)?)?
        .checked_add(&Poly::monomial(
            ctx,
            n,
            &[x3, x4],
            &coef(&[x1, x3, x4]) / &a13,
        )?)?;
    let f2 = Rof::mul(
        &ctx,
        rof_from_bivariate(&left)?,
        rof_from_bivariate(&right)?,
    );

    // Whatever is left is x2*x4 times a polynomial in (x1, x3).
    let rest = p
        .checked_sub(&f1.expand(&ctx, n)?)?
        .checked_sub(&f2.expand(&ctx, n)?)?;
    let bracket = rest.partial_derivative(x2)?.partial_derivative(x4)?;
    let f3 = Rof::mul(
        &ctx,
        Rof::mul(&ctx, Rof::var(&ctx, x2), Rof::var(&ctx, x4)),
        rof_from_bivariate(&bracket)?,
    );
    Ok(vec![f1, f2, f3])
}

/// `A * S_n^n + B * S_n^(n-1)` as `ceil(n/2)` read-once summands.
pub fn decompose_m(ctx: FieldCtx, n: usize, a: &FieldElem, b: &FieldElem) -> Result<Decomposition> {
    if n == 0 {
        return Err(Error::WrongArity {
            expected: 1,
            found: 0,
        });
    }
    let target = gen_m(ctx, n, a, b)?;
    let k = n / 2;
    let mut summands = Vec::new();
    let tail = |skip: &[usize]| -> Vec<Rof> {
        (1..=n)
            .filter(|v| !skip.contains(v))
            .map(|v| Rof::var(&ctx, v))
            .collect()
    };
    // Pairs whose bivariate factor is B*(x + x'); the last pair (even n) or the
    // leftover variable (odd n) also carries the A-term.
    let plain_pairs = if n.is_multiple_of(2) { k - 1 } else { k };
    if !b.is_zero() {
        for i in 1..=plain_pairs {
            let (u, w) = (2 * i - 1, 2 * i);
            let mut factors = vec![Rof::add(&ctx, Rof::var(&ctx, u), Rof::var(&ctx, w))];
            factors.extend(tail(&[u, w]));
            summands.push(Rof::product(&ctx, factors).with_affine(b, &ctx.zero()));
        }
    }
    let last = if n.is_multiple_of(2) {
        let (u, w) = (n - 1, n);
        let bivar = Poly::monomial(ctx, n, &[u], b.clone())?
            .checked_add(&Poly::monomial(ctx, n, &[w], b.clone())?)?
            .checked_add(&Poly::monomial(ctx, n, &[u, w], a.clone())?)?;
        if bivar.is_zero() {
            None
        } else {
            let mut factors = vec![rof_from_bivariate(&bivar)?];
            factors.extend(tail(&[u, w]));
            Some(Rof::product(&ctx, factors))
        }
    } else if a.is_zero() && b.is_zero() {
        None
    } else {
        let mut factors = tail(&[n]);
        factors.push(Rof::leaf(n, a.clone(), b.clone()));
        Some(Rof::product(&ctx, factors))
    };
    summands.extend(last);
    Decomposition::certified(target, summands, Construction::SymmetricM)
}

/// Which branch of the symmetric table applies to `a`.
pub fn sym4_row(a: &[FieldElem; 5]) -> u8 {
    if a[2].is_zero() && a[3].is_zero() {
        1
    } else if a[2].is_zero() {
        2
    } else if &a[2] * &a[4] == &a[3] * &a[3] {
        3
    } else {
        4
    }
}

/// `sum_i a_i * S_4^i` as two read-once summands. The free constant of the
/// table is recovered by subtracting the expanded summands from the target.
pub fn decompose_sym4(ctx: FieldCtx, a: &[FieldElem; 5]) -> Result<Decomposition> {
    let mut target = Poly::zero(ctx, 4);
    for (i, ai) in a.iter().enumerate() {
        target = target.checked_add(&gen_symmetric(ctx, 4, i)?.scale(ai)?)?;
    }
    let zero = ctx.zero();
    let one = ctx.one();
    let x = |i| Rof::var(&ctx, i);
    let mono = |vs: &[usize], c: FieldElem| Poly::monomial(ctx, 4, vs, c);
    let bivar =
        |u: usize, w: usize, c0: &FieldElem, c1: &FieldElem, c2: &FieldElem| -> Result<Rof> {
            let p = Poly::constant(ctx, 4, c0.clone())
                .checked_add(&mono(&[u], c1.clone())?)?
                .checked_add(&mono(&[w], c1.clone())?)?
                .checked_add(&mono(&[u, w], c2.clone())?)?;
            rof_from_bivariate(&p)
        };
    let mut summands = match sym4_row(a) {
        1 => {
            let lin = gen_symmetric(ctx, 4, 1)?.scale(&a[1])?;
            let quartic = Rof::product(&ctx, (1..=4).map(x).collect()).with_affine(&a[4], &zero);
            vec![rof_linear(&lin)?, quartic]
        }
        2 => {
            // (a1 + a3 x1x2)(x3 + x4 + (a4/a3) x3x4) + (a1 + a3 x3x4)(x1 + x2 - a1 a4 / a3^2)
            let r = &a[4] / &a[3];
            let s = -(&(&a[1] * &a[4]) / &(&a[3] * &a[3]));
            let first = Rof::mul(
                &ctx,
                Rof::mul(&ctx, x(1), x(2)).with_affine(&a[3], &a[1]),
                bivar(3, 4, &zero, &one, &r)?,
            );
            let second = Rof::mul(
                &ctx,
                Rof::mul(&ctx, x(3), x(4)).with_affine(&a[3], &a[1]),
                bivar(1, 2, &s, &one, &zero)?,
            );
            vec![first, second]
        }
        row => {
            // a2 g = P(x1,x2) P(x3,x4) + (second summand); P = a1 + a2(u + w) + a3 uw
            let inv = a[2].inv()?;
            let first = Rof::mul(
                &ctx,
                bivar(1, 2, &a[1], &a[2], &a[3])?,
                bivar(3, 4, &a[1], &a[2], &a[3])?,
            )
            .with_affine(&inv, &zero);
            let e = &(&a[2] * &a[2]) - &(&a[1] * &a[3]);
            let second = if row == 3 {
                Rof::add(&ctx, Rof::mul(&ctx, x(1), x(2)), Rof::mul(&ctx, x(3), x(4)))
                    .with_affine(&(&e * &inv), &zero)
            } else {
                let d = &(&a[2] * &a[4]) - &(&a[3] * &a[3]);
                Rof::mul(
                    &ctx,
                    Rof::mul(&ctx, x(1), x(2)).with_affine(&one, &(&e / &d)),
                    Rof::mul(&ctx, x(3), x(4)).with_affine(&d, &e),
                )
                .with_affine(&inv, &zero)
            };
            vec![first, second]
        }
    };
    let mut partial = Poly::zero(ctx, 4);
    for t in &summands {
        partial = partial.checked_add(&t.expand(&ctx, 4)?)?;
    }
    let residual = target.checked_sub(&partial)?;
    if !residual.is_constant() {
        return Err(Error::InternalInvariantViolation(
            "symmetric table leaves a non-constant residual".into(),
        ));
    }
    let c = residual.constant_term();
    let head = summands.remove(0).with_affine(&one, &c);
    summands.insert(0, head);
    Decomposition::certified(target, summands, Construction::Sym4Table)
}

/// Either two summands for the weighted quadratic family, or the condition
/// report showing none exist.
#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum FOutcome {
    Expressible(Decomposition),
    NotExpressible(ConditionReport),
}

/// `a(x_p x_q + x_r x_s)` as one formula.
fn pair_group(ctx: &FieldCtx, coef: &FieldElem, (p, q, r, s): (usize, usize, usize, usize)) -> Rof {
    Rof::add(
        ctx,
        Rof::mul(ctx, Rof::var(ctx, p), Rof::var(ctx, q)),
        Rof::mul(ctx, Rof::var(ctx, r), Rof::var(ctx, s)),
    )
    .with_affine(coef, &ctx.zero())
}

pub fn decompose_f(
    ctx: FieldCtx,
    alpha: &FieldElem,
    beta: &FieldElem,
    gamma: &FieldElem,
) -> Result<FOutcome> {
    let target = gen_f(ctx, alpha, beta, gamma)?;
    let report = weight_conditions(ctx, alpha, beta, gamma)?;
    let groups = [
        (alpha, (1, 2, 3, 4)),
        (beta, (1, 3, 2, 4)),
        (gamma, (1, 4, 2, 3)),
    ];

    if !report.c1 {
        let summands = groups
            .iter()
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, vars)| pair_group(&ctx, c, *vars))
            .collect();
        return Decomposition::certified(target, summands, Construction::FFamily)
            .map(FOutcome::Expressible);
    }

    if !report.c2 {
        let sq = |e: &FieldElem| e * e;
        // Rename so that the first two weights have equal squares; `perm`
        // sends the target to gen_f(canonical triple).
        let (perm, (p, q, r)): (Vec<usize>, _) = if sq(alpha) == sq(beta) {
            (vec![1, 2, 3, 4], (alpha, beta, gamma))
        } else if sq(beta) == sq(gamma) {
            (vec![1, 4, 2, 3], (beta, gamma, alpha))
        } else {
            (vec![1, 2, 4, 3], (alpha, gamma, beta))
        };
        if target.rename(&perm)? != gen_f(ctx, p, q, r)? {
            return Err(Error::InternalInvariantViolation(
                "weight permutation mismatch".into(),
            ));
        }
        // p (x1 + s x4)(x2 + s x3) + r (x1 x4 + x2 x3), s = q/p = ±1
        let s = q / p;
        let zero = ctx.zero();
        let first = Rof::mul(
            &ctx,
            Rof::add(
                &ctx,
                Rof::var(&ctx, 1),
                Rof::leaf(4, s.clone(), zero.clone()),
            ),
            Rof::add(&ctx, Rof::var(&ctx, 2), Rof::leaf(3, s, zero.clone())),
        )
        .with_affine(p, &zero);
        let second = pair_group(&ctx, r, (1, 4, 2, 3));
        let back = invert_permutation(&perm);
        let summands = vec![first.relabel(&back), second.relabel(&back)];
        return Decomposition::certified(target, summands, Construction::FFamily)
            .map(FOutcome::Expressible);
    }

    if report.c3 {
        return Ok(FOutcome::NotExpressible(report));
    }

    let d1 = &report.d_values[0];
    let tau = match ctx.sqrt_in_field(d1) {
        SquareRoot::Exact(t) => t,
        SquareRoot::Unrepresentable => return Err(Error::RootNotRepresentable(d1.to_string())),
        SquareRoot::None => {
            return Err(Error::InternalInvariantViolation(
                "C3 reported false without a root".into(),
            ))
        }
    };
    let two = ctx.from_i64(2);
    let num = &(&(&(alpha * alpha) - &(beta * beta)) - &(gamma * gamma)) + &tau;
    let den = &(&two * beta) * gamma;
    let delta = &num / &den;
    let mu = -(&(gamma + &(beta * &delta)) / alpha);
    if delta.is_zero() || mu.is_zero() {
        return Err(Error::InternalInvariantViolation(
            "degenerate root in the C3 branch".into(),
        ));
    }
    // alpha (x1 - mu x3)(x2 - x4/mu) + beta (x1 - delta x2)(x3 - x4/delta)
    let zero = ctx.zero();
    let lin = |u: usize, w: usize, c: &FieldElem| {
        Rof::add(&ctx, Rof::var(&ctx, u), Rof::leaf(w, -c, zero.clone()))
    };
    let first = Rof::mul(&ctx, lin(1, 3, &mu), lin(2, 4, &mu.inv()?)).with_affine(alpha, &zero);
    let second =
        Rof::mul(&ctx, lin(1, 2, &delta), lin(3, 4, &delta.inv()?)).with_affine(beta, &zero);
    Decomposition::certified(target, vec![first, second], Construction::FFamily)
        .map(FOutcome::Expressible)
}

/// Wraps a hand-assembled list of formulas; the result records whether it checks out.
pub fn assemble(target: Poly, summands: Vec<Rof>, construction: Construction) -> Decomposition {
    let mut d = Decomposition {
        target,
        summands,
        construction,
        verified: false,
    };
    verify_decomposition(&mut d);
    d
}

/// Builds the product of two affine forms as a formula; used for recovered
/// `l1*l2 + l3*l4` certificates.
pub fn product_of_linear(l: &Poly, r: &Poly) -> Result<Rof> {
    let ctx = *l.ctx();
    match (l.is_constant(), r.is_constant()) {
        (true, true) => Ok(Rof::constant(&ctx, &l.constant_term() * &r.constant_term())),
        (true, false) => Ok(rof_linear(r)?.with_affine(&l.constant_term(), &ctx.zero())),
        (false, true) => Ok(rof_linear(l)?.with_affine(&r.constant_term(), &ctx.zero())),
        (false, false) => Ok(Rof::node(
            Gate::Mul,
            ctx.one(),
            ctx.zero(),
            rof_linear(l)?,
            rof_linear(r)?,
        )),
    }
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

    #[test]
    fn generic_small_cases() {
        let p = parse_poly(q(), "3*x1 + 1", Some(1)).unwrap();
        let d = decompose_generic(&p).unwrap();
        assert_eq!(d.len(), 1);
        assert!(d.verified);
        let s3 = gen_symmetric(q(), 3, 2).unwrap();
        assert_eq!(decompose_generic(&s3).unwrap().len(), 2);
        let zero = Poly::zero(q(), 3);
        assert_eq!(decompose_generic(&zero).unwrap().len(), 1);
    }

    #[test]
    fn generic_base_without_quadratic_terms() {
        let p = parse_poly(q(), "1 + 2*x1 - x2 + 3*x3 + 4*x4 + 5*x1*x2*x3 + 6*x1*x2*x4 + 7*x1*x3*x4 + 8*x2*x3*x4 + 9*x1*x2*x3*x4", Some(4)).unwrap();
        let d = decompose_generic(&p).unwrap();
        assert_eq!(d.len(), 3);
        let parts: Vec<Poly> = d
            .summands
            .iter()
            .map(|t| t.expand(&q(), 4).unwrap())
            .collect();
        assert_eq!(parts[0].to_string(), "2*x1 - x2 + 3*x3 + 4*x4 + 1");
        assert_eq!(parts[1].to_string(), "5*x1*x2*x3 + 6*x1*x2*x4");
        assert_eq!(
            parts[2].to_string(),
            "9*x1*x2*x3*x4 + 7*x1*x3*x4 + 8*x2*x3*x4"
        );
    }

    #[test]
    fn generic_base_with_pair_away_from_slot_13() {
        let p = parse_poly(q(), "x2*x4 + x1*x2*x3*x4 + x3 - 2*x1*x3*x4", Some(4)).unwrap();
        let d = decompose_generic(&p).unwrap();
        assert!(d.verified && d.len() <= 3);
    }

    #[test]
    fn generic_large() {
        let p = gen_symmetric(q(), 6, 3).unwrap();
        let d = decompose_generic(&p).unwrap();
        assert!(d.verified && d.len() <= 12);
    }

    #[test]
    fn m_family_examples() {
        let d = decompose_m(q(), 2, &c(0), &c(1)).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.target.to_string(), "x1 + x2");
        let d = decompose_m(q(), 4, &c(0), &c(1)).unwrap();
        assert_eq!(d.len(), 2);
        let texts: Vec<String> = d
            .summands
            .iter()
            .map(|t| t.expand(&q(), 4).unwrap().to_string())
            .collect();
        assert_eq!(texts, ["x1*x3*x4 + x2*x3*x4", "x1*x2*x3 + x1*x2*x4"]);
        let d = decompose_m(q(), 5, &c(1), &c(1)).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(decompose_m(q(), 1, &c(2), &c(3)).unwrap().len(), 1);
    }

    #[test]
    fn sym4_rows() {
        let rows = [
            [c(5), c(1), c(0), c(0), c(7)],
            [c(5), c(2), c(0), c(3), c(7)],
            [c(0), c(0), c(1), c(0), c(0)],
            [c(1), c(2), c(3), c(4), c(5)],
        ];
        for (k, a) in rows.iter().enumerate() {
            assert_eq!(sym4_row(a) as usize, k + 1);
            let d = decompose_sym4(q(), a).unwrap();
            assert!(d.verified && d.len() <= 2, "row {}", k + 1);
        }
    }

    #[test]
    fn f_family_examples() {
        let FOutcome::Expressible(d) = decompose_f(q(), &c(2), &c(2), &c(3)).unwrap() else {
            panic!()
        };
        assert_eq!(d.summands[0].to_string(), "2*((x1 + x4) * (x2 + x3))");
        let FOutcome::Expressible(d) = decompose_f(q(), &c(1), &c(2), &c(3)).unwrap() else {
            panic!()
        };
        let texts: Vec<String> = d
            .summands
            .iter()
            .map(|t| t.expand(&q(), 4).unwrap().to_string())
            .collect();
        assert_eq!(
            texts,
            [
                "x1*x2 + x1*x4 + x2*x3 + x3*x4",
                "2*x1*x3 + 2*x1*x4 + 2*x2*x3 + 2*x2*x4"
            ]
        );
        match decompose_f(q(), &c(2), &c(4), &c(5)).unwrap() {
            FOutcome::NotExpressible(r) => assert!(r.d_values.iter().all(|d| *d == c(-231))),
            FOutcome::Expressible(_) => panic!("(2,4,5) has no rational certificate"),
        }
    }

    #[test]
    fn f_family_swapped_cases() {
        for (a, b, g) in [
            (3, 2, 2),
            (3, 2, -2),
            (2, 3, 2),
            (2, 3, -2),
            (0, 1, 1),
            (0, 0, 0),
        ] {
            let FOutcome::Expressible(d) = decompose_f(q(), &c(a), &c(b), &c(g)).unwrap() else {
                panic!()
            };
            assert!(d.verified && d.len() <= 2);
        }
    }

    #[test]
    fn reals_irrational_root() {
        // D = 3*7*... must be positive and non-square: (1,3,5): (1+3+5)(1-3-5)(1-3+5)(1+3-5) = 9*-7*3*-1 = 189
        let r = FieldCtx::reals();
        let e = |v| r.from_i64(v);
        assert_eq!(
            decompose_f(r, &e(1), &e(3), &e(5)),
            Err(Error::RootNotRepresentable("189".into()))
        );
    }

    #[test]
    fn json_round_trip_and_tamper() {
        let d = decompose_m(q(), 5, &c(2), &c(-3)).unwrap();
        let v = d.to_json();
        let mut back = Decomposition::from_json(&v, None).unwrap();
        assert!(verify_decomposition(&mut back));
        assert_eq!(back, d);
        let tampered = Rof::from_json(&v["summands"][0], &q())
            .unwrap()
            .with_affine(&c(1), &c(1));
        back.summands[0] = tampered;
        assert!(!verify_decomposition(&mut back));
    }
}
