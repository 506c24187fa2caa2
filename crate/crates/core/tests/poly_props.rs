mod common;

use common::*;
use rand::Rng;
use rofsum::mpoly::parse_poly;
use rofsum::{gen_f, gen_m, gen_symmetric, FieldCtx, FieldElem, Poly};

fn fields() -> [FieldCtx; 3] {
    [q(), fp(2), fp(7)]
}

/// `A*D - B*C` for `p = A*xi*xj + B*xi + C*xj + D` with `A..D` free of `xi, xj`.
fn commutator_by_coefficients(p: &Poly, i: usize, j: usize) -> Poly {
    let z = p.ctx().zero();
    let a = p
        .partial_derivative(i)
        .unwrap()
        .partial_derivative(j)
        .unwrap();
    let d = p.restrict(i, &z).unwrap().restrict(j, &z).unwrap();
    let b = p.partial_derivative(i).unwrap().restrict(j, &z).unwrap();
    let c = p.partial_derivative(j).unwrap().restrict(i, &z).unwrap();
    &(&a * &d) - &(&b * &c)
}

#[test]
fn restriction_and_derivative_commute() {
    let mut r = rng(1);
    for ctx in fields() {
        for _ in 0..300 {
            let n = r.gen_range(2..=6);
            let p = multilinear(&ctx, n, 0.5, &mut r);
            let i = r.gen_range(1..=n);
            let j = loop {
                let j = r.gen_range(1..=n);
                if j != i {
                    break j;
                }
            };
            let a = elem(&ctx, &mut r);
            let lhs = p.restrict(j, &a).unwrap().partial_derivative(i).unwrap();
            let rhs = p.partial_derivative(i).unwrap().restrict(j, &a).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn derivative_and_restriction_are_additive() {
    let mut r = rng(2);
    for ctx in fields() {
        for _ in 0..300 {
            let n = r.gen_range(1..=5);
            let p = multilinear(&ctx, n, 0.5, &mut r);
            let s = multilinear(&ctx, n, 0.5, &mut r);
            let i = r.gen_range(1..=n);
            let a = elem(&ctx, &mut r);
            let sum = &p + &s;
            assert_eq!(
                sum.partial_derivative(i).unwrap(),
                &p.partial_derivative(i).unwrap() + &s.partial_derivative(i).unwrap()
            );
            assert_eq!(
                sum.restrict(i, &a).unwrap(),
                &p.restrict(i, &a).unwrap() + &s.restrict(i, &a).unwrap()
            );
        }
    }
}

#[test]
fn commutator_symmetric_and_matches_coefficients() {
    let mut r = rng(3);
    for ctx in fields() {
        for _ in 0..300 {
            let n = r.gen_range(2..=5);
            let p = multilinear(&ctx, n, 0.6, &mut r);
            let i = r.gen_range(1..n);
            let j = r.gen_range(i + 1..=n);
            let d = p.commutator(i, j).unwrap();
            assert_eq!(d, p.commutator(j, i).unwrap());
            assert_eq!(d, commutator_by_coefficients(&p, i, j));
        }
    }
}

#[test]
fn weighted_quadratic_permutations() {
    let check = |ctx: FieldCtx, a: &FieldElem, b: &FieldElem, c: &FieldElem| {
        let f = gen_f(ctx, a, b, c).unwrap();
        assert_eq!(
            f.rename(&[1, 2, 4, 3]).unwrap(),
            gen_f(ctx, a, c, b).unwrap()
        );
        assert_eq!(
            f.rename(&[1, 3, 2, 4]).unwrap(),
            gen_f(ctx, b, a, c).unwrap()
        );
    };
    for p in [2, 3, 5] {
        let ctx = fp(p);
        for a in ctx.elements() {
            for b in ctx.elements() {
                for c in ctx.elements() {
                    check(ctx, &a, &b, &c);
                }
            }
        }
    }
    let mut r = rng(4);
    for _ in 0..200 {
        let ctx = q();
        check(
            ctx,
            &elem(&ctx, &mut r),
            &elem(&ctx, &mut r),
            &elem(&ctx, &mut r),
        );
    }
}

#[test]
fn commutator_closed_form_on_random_triples() {
    let mut r = rng(5);
    for ctx in [q(), fp(7)] {
        for _ in 0..1000 {
            let (a, b, c) = (elem(&ctx, &mut r), elem(&ctx, &mut r), elem(&ctx, &mut r));
            let f = gen_f(ctx, &a, &b, &c).unwrap();
            // -b*c*(x3^2 + x4^2) + (a^2 - b^2 - c^2)*x3*x4
            let squares = parse_poly(ctx, "x3^2 + x4^2", Some(4)).unwrap();
            let cross = parse_poly(ctx, "x3*x4", Some(4)).unwrap();
            let mixed = &(&(&a * &a) - &(&b * &b)) - &(&c * &c);
            let expected = &squares.scale(&-(&b * &c)).unwrap() + &cross.scale(&mixed).unwrap();
            assert_eq!(f.commutator(1, 2).unwrap(), expected);
        }
    }
}

#[test]
fn commutator_fixture() {
    let ctx = q();
    let f = gen_f(ctx, &ctx.from_i64(2), &ctx.from_i64(4), &ctx.from_i64(5)).unwrap();
    assert_eq!(
        f.commutator(1, 2).unwrap().to_string(),
        "-20*x3^2 - 37*x3*x4 - 20*x4^2"
    );
}

#[test]
fn symmetric_family_recursions() {
    // Differentiating in x_n drops to n-1 variables with the same weights;
    // fixing x_n = g gives weights (a*g + b, b*g).
    let mut r = rng(6);
    for ctx in [q(), fp(7), fp(2)] {
        for n in 2..=8 {
            for _ in 0..10 {
                let (a, b, g) = (elem(&ctx, &mut r), elem(&ctx, &mut r), elem(&ctx, &mut r));
                let m = gen_m(ctx, n, &a, &b).unwrap();
                let lower = gen_m(ctx, n - 1, &a, &b).unwrap().embed(n).unwrap();
                assert_eq!(m.partial_derivative(n).unwrap(), lower);
                let shifted = gen_m(ctx, n - 1, &(&(&a * &g) + &b), &(&b * &g))
                    .unwrap()
                    .embed(n)
                    .unwrap();
                assert_eq!(m.restrict(n, &g).unwrap(), shifted);
            }
        }
    }
}

#[test]
fn symmetric_polynomial_term_counts() {
    // C(n, k) monomials, all with coefficient one.
    let binom = |n: usize, k: usize| (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
    for n in 1..=8 {
        for k in 0..=n {
            let s = gen_symmetric(q(), n, k).unwrap();
            assert_eq!(s.num_terms(), binom(n, k));
            assert!(s
                .terms()
                .all(|(m, c)| c.is_one() && m.degree() as usize == k && m.is_squarefree()));
        }
    }
}

#[test]
fn print_parse_round_trip() {
    let mut r = rng(8);
    for ctx in fields() {
        for _ in 0..300 {
            let n = r.gen_range(1..=6);
            let p = multilinear(&ctx, n, 0.4, &mut r);
            assert_eq!(parse_poly(ctx, &p.to_string(), Some(n)).unwrap(), p);
        }
    }
}
