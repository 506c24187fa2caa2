//! Exact field contexts: the rationals (optionally with real-closed squareness)
//! and prime fields F_p.
//!
//! Elements carry enough information to detect mixing of fields. The
//! operator impls (`+`, `-`, `*`, `/`, unary `-`) panic on a field mismatch
//! or a zero divisor, like integer division does; the `checked_*` methods and
//! [`field_arith`] report those conditions as errors instead.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest modulus accepted; residues multiply in `u64` without overflow.
pub const MAX_MODULUS: u64 = u32::MAX as u64;

/// Primes up to this bound get their square roots by exhaustive search.
pub const EXHAUSTIVE_SQRT_LIMIT: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Rationals,
    Prime(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldCtx {
    kind: FieldKind,
    /// Squareness means `d >= 0` (the real closure); only meaningful over the rationals.
    reals: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldElem {
    Rational(BigRational),
    Residue { value: u64, modulus: u64 },
}

/// Outcome of a square-root query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SquareRoot {
    /// An exact root in the field; the canonical one of the pair `±r`.
    Exact(FieldElem),
    /// A root exists over the reals but is irrational.
    Unrepresentable,
    None,
}

impl SquareRoot {
    pub fn exists(&self) -> bool {
        !matches!(self, SquareRoot::None)
    }

    pub fn root(&self) -> Option<&FieldElem> {
        match self {
            SquareRoot::Exact(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldCtx {
    pub fn rationals() -> Self {
        FieldCtx {
            kind: FieldKind::Rationals,
            reals: false,
        }
    }

    /// Rationals whose squareness queries answer as the reals would.
    pub fn reals() -> Self {
        FieldCtx {
            kind: FieldKind::Rationals,
            reals: true,
        }
    }

    pub fn prime(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p > MAX_MODULUS {
            return Err(Error::ResourceGuard(format!(
                "modulus {p} exceeds {MAX_MODULUS}"
            )));
        }
        Ok(FieldCtx {
            kind: FieldKind::Prime(p),
            reals: false,
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn reals_semantics(&self) -> bool {
        self.reals
    }

    pub fn modulus(&self) -> Option<u64> {
        match self.kind {
            FieldKind::Prime(p) => Some(p),
            FieldKind::Rationals => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.modulus().is_some()
    }

    /// Same underlying field; the reals flag only changes squareness queries.
    pub fn same_field(&self, other: &FieldCtx) -> bool {
        self.kind == other.kind
    }

    pub fn contains(&self, e: &FieldElem) -> bool {
        match (self.kind, e) {
            (FieldKind::Rationals, FieldElem::Rational(_)) => true,
            (FieldKind::Prime(p), FieldElem::Residue { modulus, .. }) => p == *modulus,
            _ => false,
        }
    }

    pub fn check(&self, e: &FieldElem) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(Error::FieldMismatch(self.to_string(), e.field_name()))
        }
    }

    pub fn zero(&self) -> FieldElem {
        self.from_i64(0)
    }

    pub fn one(&self) -> FieldElem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> FieldElem {
        match self.kind {
            FieldKind::Rationals => FieldElem::Rational(BigRational::from_integer(v.into())),
            FieldKind::Prime(p) => FieldElem::Residue {
                value: v.rem_euclid(p as i64) as u64,
                modulus: p,
            },
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> FieldElem {
        match self.kind {
            FieldKind::Rationals => FieldElem::Rational(BigRational::from_integer(v.clone())),
            FieldKind::Prime(p) => {
                let r = v.mod_floor(&BigInt::from(p));
                FieldElem::Residue {
                    value: r.to_u64().expect("reduced residue"),
                    modulus: p,
                }
            }
        }
    }

    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Result<FieldElem> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self.kind {
            FieldKind::Rationals => Ok(FieldElem::Rational(BigRational::new(
                num.clone(),
                den.clone(),
            ))),
            FieldKind::Prime(_) => self.from_bigint(num).checked_div(&self.from_bigint(den)),
        }
    }

    /// Canonical residue `v mod p`. Panics over the rationals.
    pub fn residue(&self, v: u64) -> FieldElem {
        match self.kind {
            FieldKind::Prime(p) => FieldElem::Residue {
                value: v % p,
                modulus: p,
            },
            FieldKind::Rationals => panic!("residue() called on the rationals"),
        }
    }

    /// All elements of a prime field in residue order; empty over the rationals.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        let p = self.modulus().unwrap_or(0);
        (0..p).map(move |v| FieldElem::Residue {
            value: v,
            modulus: p,
        })
    }

    /// Parses an integer or `p/q` fraction in this field.
    pub fn parse_scalar(&self, text: &str) -> Result<FieldElem> {
        let t = text.trim();
        let syntax = |msg: &str| Error::Syntax {
            pos: 0,
            msg: format!("{msg}: `{text}`"),
        };
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num = BigInt::from_str(num).map_err(|_| syntax("bad scalar numerator"))?;
        let den = BigInt::from_str(den).map_err(|_| syntax("bad scalar denominator"))?;
        self.from_ratio(&num, &den)
    }

    /// Square root with the canonical tie-break: the non-negative rational,
    /// or the smaller residue.
    pub fn sqrt_in_field(&self, d: &FieldElem) -> SquareRoot {
        match (self.kind, d) {
            (FieldKind::Rationals, FieldElem::Rational(q)) => {
                if q.is_negative() {
                    return SquareRoot::None;
                }
                match (exact_isqrt(q.numer()), exact_isqrt(q.denom())) {
                    (Some(a), Some(b)) => {
                        SquareRoot::Exact(FieldElem::Rational(BigRational::new(a, b)))
                    }
                    _ if self.reals => SquareRoot::Unrepresentable,
                    _ => SquareRoot::None,
                }
            }
            (FieldKind::Prime(p), FieldElem::Residue { value, modulus }) if p == *modulus => {
                match residue_sqrt(*value, p) {
                    Some(r) => SquareRoot::Exact(FieldElem::Residue {
                        value: r,
                        modulus: p,
                    }),
                    None => SquareRoot::None,
                }
            }
            _ => SquareRoot::None,
        }
    }

    pub fn is_square(&self, d: &FieldElem) -> bool {
        self.sqrt_in_field(d).exists()
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

fn residue_sqrt(d: u64, p: u64) -> Option<u64> {
    if p <= EXHAUSTIVE_SQRT_LIMIT {
        return (0..=p / 2).find(|r| r * r % p == d);
    }
    tonelli_shanks(d, p).map(|r| r.min(p - r))
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

// Only reached for moduli above the exhaustive-search limit.
fn tonelli_shanks(d: u64, p: u64) -> Option<u64> {
    let d = d % p;
    if d == 0 {
        return Some(0);
    }
    if pow_mod(d, (p - 1) / 2, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)?;
    let (mut m, mut c, mut t, mut r) = (
        s,
        pow_mod(z, q, p),
        pow_mod(d, q, p),
        pow_mod(d, q.div_ceil(2), p),
    );
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = t2 * t2 % p;
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    Some(r)
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.reals) {
            (FieldKind::Rationals, false) => write!(f, "q"),
            (FieldKind::Rationals, true) => write!(f, "q-reals"),
            (FieldKind::Prime(p), _) => write!(f, "fp:{p}"),
        }
    }
}

impl FromStr for FieldCtx {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "q" => Ok(FieldCtx::rationals()),
            "q-reals" => Ok(FieldCtx::reals()),
            other => {
                let p = other
                    .strip_prefix("fp:")
                    .and_then(|p| p.parse::<u64>().ok())
                    .ok_or_else(|| Error::Syntax {
                        pos: 0,
                        msg: format!("unknown field selector `{other}`"),
                    })?;
                FieldCtx::prime(p)
            }
        }
    }
}

impl FieldElem {
    fn field_name(&self) -> String {
        match self {
            FieldElem::Rational(_) => "q".into(),
            FieldElem::Residue { modulus, .. } => format!("fp:{modulus}"),
        }
    }

    fn mismatch(&self, other: &FieldElem) -> Error {
        Error::FieldMismatch(self.field_name(), other.field_name())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Rational(q) => q.is_zero(),
            FieldElem::Residue { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElem::Rational(q) => q.is_one(),
            FieldElem::Residue { value, .. } => *value == 1,
        }
    }

    /// Only rationals can be negative; residues never are.
    pub fn is_negative(&self) -> bool {
        matches!(self, FieldElem::Rational(q) if q.is_negative())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            FieldElem::Rational(q) => Some(q),
            FieldElem::Residue { .. } => None,
        }
    }

    pub fn residue_value(&self) -> Option<u64> {
        match self {
            FieldElem::Residue { value, .. } => Some(*value),
            FieldElem::Rational(_) => None,
        }
    }

    pub fn checked_add(&self, other: &FieldElem) -> Result<FieldElem> {
        match (self, other) {
            (FieldElem::Rational(a), FieldElem::Rational(b)) => Ok(FieldElem::Rational(a + b)),
            (
                FieldElem::Residue {
                    value: a,
                    modulus: p,
                },
                FieldElem::Residue {
                    value: b,
                    modulus: q,
                },
            ) if p == q => Ok(FieldElem::Residue {
                value: (a + b) % p,
                modulus: *p,
            }),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn checked_sub(&self, other: &FieldElem) -> Result<FieldElem> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &FieldElem) -> Result<FieldElem> {
        match (self, other) {
            (FieldElem::Rational(a), FieldElem::Rational(b)) => Ok(FieldElem::Rational(a * b)),
            (
                FieldElem::Residue {
                    value: a,
                    modulus: p,
                },
                FieldElem::Residue {
                    value: b,
                    modulus: q,
                },
            ) if p == q => Ok(FieldElem::Residue {
                value: a * b % p,
                modulus: *p,
            }),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn checked_div(&self, other: &FieldElem) -> Result<FieldElem> {
        if std::mem::discriminant(self) != std::mem::discriminant(other) {
            return Err(self.mismatch(other));
        }
        self.checked_mul(&other.inv()?)
    }

    pub fn inv(&self) -> Result<FieldElem> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            FieldElem::Rational(q) => FieldElem::Rational(q.recip()),
            FieldElem::Residue { value, modulus } => FieldElem::Residue {
                value: pow_mod(*value, modulus - 2, *modulus),
                modulus: *modulus,
            },
        })
    }

    fn neg_ref(&self) -> FieldElem {
        match self {
            FieldElem::Rational(q) => FieldElem::Rational(-q),
            FieldElem::Residue { value, modulus } => FieldElem::Residue {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
        }
    }

    pub fn pow(&self, mut exp: u32) -> FieldElem {
        let mut base = self.clone();
        let mut acc = match self {
            FieldElem::Rational(_) => FieldElem::Rational(BigRational::one()),
            FieldElem::Residue { modulus, .. } => FieldElem::Residue {
                value: 1 % modulus,
                modulus: *modulus,
            },
        };
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }
}

/// Exact `a op b`.
pub fn field_arith(a: &FieldElem, b: &FieldElem, op: ArithOp) -> Result<FieldElem> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
        ArithOp::Div => a.checked_div(b),
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElem::Rational(q) if q.is_integer() => write!(f, "{}", q.numer()),
            FieldElem::Rational(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            FieldElem::Residue { value, .. } => write!(f, "{value}"),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&FieldElem> for &FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: &FieldElem) -> FieldElem {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: FieldElem) -> FieldElem {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: &FieldElem) -> FieldElem {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        self.neg_ref()
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> FieldElem {
        FieldCtx::rationals()
            .from_ratio(&n.into(), &d.into())
            .unwrap()
    }

    #[test]
    fn rational_arith() {
        assert_eq!(
            field_arith(&q(1, 3), &q(1, 6), ArithOp::Add).unwrap(),
            q(1, 2)
        );
        assert_eq!(&q(-37, 1) * &q(-37, 1), q(1369, 1));
        assert_eq!(
            field_arith(&q(1, 3), &q(0, 1), ArithOp::Div),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn prime_arith() {
        let f7 = FieldCtx::prime(7).unwrap();
        assert_eq!(&f7.from_i64(3) * &f7.from_i64(5), f7.from_i64(1));
        assert_eq!(f7.from_i64(-1), f7.from_i64(6));
        assert_eq!(f7.parse_scalar("1/2").unwrap(), f7.from_i64(4));
        assert!(f7.parse_scalar("3/7").is_err());
    }

    #[test]
    fn mismatch_is_reported() {
        let f7 = FieldCtx::prime(7).unwrap();
        let f5 = FieldCtx::prime(5).unwrap();
        assert!(matches!(
            field_arith(&f7.one(), &f5.one(), ArithOp::Mul),
            Err(Error::FieldMismatch(..))
        ));
        assert!(f7.one().checked_add(&q(1, 1)).is_err());
    }

    #[test]
    fn composite_modulus_rejected() {
        assert_eq!(FieldCtx::prime(9), Err(Error::NotPrime(9)));
        assert_eq!(FieldCtx::prime(1), Err(Error::NotPrime(1)));
        assert!(FieldCtx::prime(2).is_ok());
    }

    #[test]
    fn rational_sqrt() {
        let ctx = FieldCtx::rationals();
        assert_eq!(ctx.sqrt_in_field(&q(9, 4)), SquareRoot::Exact(q(3, 2)));
        assert_eq!(ctx.sqrt_in_field(&q(-231, 1)), SquareRoot::None);
        assert_eq!(ctx.sqrt_in_field(&q(2, 1)), SquareRoot::None);
        assert_eq!(ctx.sqrt_in_field(&q(0, 1)), SquareRoot::Exact(q(0, 1)));
    }

    #[test]
    fn reals_sqrt_is_existence_only_for_irrational_roots() {
        let ctx = FieldCtx::reals();
        assert_eq!(ctx.sqrt_in_field(&q(2, 1)), SquareRoot::Unrepresentable);
        assert_eq!(ctx.sqrt_in_field(&q(-231, 1)), SquareRoot::None);
        assert_eq!(ctx.sqrt_in_field(&q(4, 9)), SquareRoot::Exact(q(2, 3)));
    }

    #[test]
    fn residue_sqrt_tie_break() {
        let f7 = FieldCtx::prime(7).unwrap();
        assert_eq!(
            f7.sqrt_in_field(&f7.from_i64(2)),
            SquareRoot::Exact(f7.from_i64(3))
        );
        assert_eq!(f7.sqrt_in_field(&f7.from_i64(3)), SquareRoot::None);
    }

    #[test]
    fn residue_counts_and_inverses() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            let ctx = FieldCtx::prime(p).unwrap();
            for a in ctx.elements().filter(|a| !a.is_zero()) {
                assert!((&a * &a.inv().unwrap()).is_one());
            }
            let squares = ctx.elements().filter(|d| ctx.is_square(d)).count() as u64;
            let expected = if p == 2 { 2 } else { p.div_ceil(2) };
            assert_eq!(squares, expected, "p = {p}");
        }
    }

    #[test]
    fn tonelli_shanks_agrees_with_search() {
        let p = 10_007;
        for d in 0..200u64 {
            let brute = (0..=p / 2).find(|r| r * r % p == d);
            assert_eq!(tonelli_shanks(d, p).map(|r| r.min(p - r)), brute, "d = {d}");
        }
    }

    #[test]
    fn selectors_round_trip() {
        for s in ["q", "q-reals", "fp:13"] {
            assert_eq!(s.parse::<FieldCtx>().unwrap().to_string(), s);
        }
        assert!("fp:12".parse::<FieldCtx>().is_err());
        assert!("r".parse::<FieldCtx>().is_err());
    }
}
