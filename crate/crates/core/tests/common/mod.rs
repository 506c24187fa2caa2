#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rofsum::mpoly::VarSet;
use rofsum::rof::Gate;
use rofsum::{FieldCtx, FieldElem, Poly, Rof};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q() -> FieldCtx {
    FieldCtx::rationals()
}

pub fn fp(p: u64) -> FieldCtx {
    FieldCtx::prime(p).unwrap()
}

/// Random scalar; rationals are small fractions.
pub fn elem(ctx: &FieldCtx, r: &mut impl Rng) -> FieldElem {
    match ctx.modulus() {
        Some(p) => ctx.residue(r.gen_range(0..p)),
        None => {
            let num = r.gen_range(-9i64..=9);
            let den = r.gen_range(1i64..=4);
            ctx.parse_scalar(&format!("{num}/{den}")).unwrap()
        }
    }
}

pub fn nonzero(ctx: &FieldCtx, r: &mut impl Rng) -> FieldElem {
    loop {
        let e = elem(ctx, r);
        if !e.is_zero() {
            return e;
        }
    }
}

pub fn small_int(ctx: &FieldCtx, r: &mut impl Rng, bound: i64) -> FieldElem {
    ctx.from_i64(r.gen_range(-bound..=bound))
}

/// Random multilinear polynomial; each subset monomial is present with probability `density`.
pub fn multilinear(ctx: &FieldCtx, n: usize, density: f64, r: &mut impl Rng) -> Poly {
    let mut p = Poly::zero(*ctx, n);
    for bits in 0u64..(1 << n) {
        if r.gen_bool(density) {
            let vars: Vec<usize> = VarSet::from_bits(bits).iter().collect();
            p = &p + &Poly::monomial(*ctx, n, &vars, elem(ctx, r)).unwrap();
        }
    }
    p
}

/// Random affine form in the given variables with nonzero slopes.
pub fn affine(ctx: &FieldCtx, n: usize, vars: &[usize], r: &mut impl Rng) -> Poly {
    let mut l = Poly::constant(*ctx, n, elem(ctx, r));
    for &v in vars {
        l = &l + &Poly::monomial(*ctx, n, &[v], nonzero(ctx, r)).unwrap();
    }
    l
}

fn build(ctx: &FieldCtx, vars: &[usize], mul_only: bool, r: &mut impl Rng) -> Rof {
    if vars.len() == 1 {
        return Rof::leaf(vars[0], nonzero(ctx, r), elem(ctx, r));
    }
    let cut = r.gen_range(1..vars.len());
    let left = build(ctx, &vars[..cut], mul_only, r);
    let right = build(ctx, &vars[cut..], mul_only, r);
    let op = if mul_only || r.gen_bool(0.5) {
        Gate::Mul
    } else {
        Gate::Add
    };
    Rof::node(op, nonzero(ctx, r), elem(ctx, r), left, right)
}

/// Random formula reading a random nonempty subset of `x1..xn`, each at most once.
pub fn random_rof(ctx: &FieldCtx, n: usize, mul_only: bool, r: &mut impl Rng) -> Rof {
    let mut vars: Vec<usize> = (1..=n).collect();
    vars.shuffle(r);
    let k = r.gen_range(1..=n);
    build(ctx, &vars[..k], mul_only, r)
}

/// Random formula reading exactly the listed variables.
pub fn random_rof_on(ctx: &FieldCtx, vars: &[usize], mul_only: bool, r: &mut impl Rng) -> Rof {
    let mut vars = vars.to_vec();
    vars.shuffle(r);
    build(ctx, &vars, mul_only, r)
}
