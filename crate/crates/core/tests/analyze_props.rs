mod common;

use common::*;
use rand::Rng;
use rofsum::analyze::{
    d_values, dependence_check, refute_sum2, restriction_check, split_reconstruct,
    structural_report, weight_conditions, Sum2Verdict,
};
use rofsum::{gen_f, FieldCtx, FieldElem, Poly};

#[test]
fn discriminant_identity() {
    let mut r = rng(31);
    for ctx in [q(), fp(7), fp(2)] {
        for _ in 0..1000 {
            let (a, b, c) = (elem(&ctx, &mut r), elem(&ctx, &mut r), elem(&ctx, &mut r));
            let factored = &(&(&(&(&a + &b) + &c) * &(&(&a - &b) - &c)) * &(&(&a - &b) + &c))
                * &(&(&a + &b) - &c);
            for d in d_values(&a, &b, &c) {
                assert_eq!(d, factored);
            }
        }
    }
}

#[test]
fn conditions_exclude_structure() {
    // Whenever all three scalar conditions hold, none of the structural
    // certificates exists.
    let mut r = rng(32);
    let ctx = q();
    let mut seen = 0;
    while seen < 1000 {
        let (a, b, c) = (elem(&ctx, &mut r), elem(&ctx, &mut r), elem(&ctx, &mut r));
        if !weight_conditions(ctx, &a, &b, &c)
            .unwrap()
            .not_expressible()
        {
            continue;
        }
        let f = gen_f(ctx, &a, &b, &c).unwrap();
        assert_eq!(restriction_check(&f).unwrap(), None, "{f}");
        assert_eq!(dependence_check(&f).unwrap(), None, "{f}");
        assert_eq!(split_reconstruct(&f).unwrap(), None, "{f}");
        seen += 1;
    }
}

#[test]
fn conditions_exclude_structure_finite_fields() {
    for p in [3u64, 5, 7, 11] {
        let ctx = fp(p);
        for a in ctx.elements() {
            for b in ctx.elements() {
                for c in ctx.elements() {
                    if !weight_conditions(ctx, &a, &b, &c)
                        .unwrap()
                        .not_expressible()
                    {
                        continue;
                    }
                    let rep = structural_report(&gen_f(ctx, &a, &b, &c).unwrap()).unwrap();
                    assert!(
                        rep.c1p.is_none() && rep.c2p.is_none() && rep.c3p.is_none(),
                        "p={p} {a} {b} {c}"
                    );
                }
            }
        }
    }
}

/// `sum_k coef_k * x_k + c` over the listed variables.
fn form(ctx: &FieldCtx, vars: &[usize], r: &mut impl Rng) -> Poly {
    affine(ctx, 4, vars, r)
}

/// Checks that the commutator in `(xa, xb)` vanishes on the line `l2 = 0`,
/// where `l2` is affine in `(xc, xd)`. The commutator has degree at most two
/// in `(xc, xd)`, so three points on the line decide divisibility.
fn vanishes_on_line(delta: &Poly, l2: &Poly, c: usize, d: usize) -> bool {
    let ctx = *l2.ctx();
    let z = ctx.zero();
    let one = ctx.one();
    let sc = l2
        .restrict(d, &z)
        .unwrap()
        .partial_derivative(c)
        .unwrap()
        .constant_term();
    let sd = l2
        .restrict(c, &z)
        .unwrap()
        .partial_derivative(d)
        .unwrap()
        .constant_term();
    let k = l2
        .restrict(c, &z)
        .unwrap()
        .restrict(d, &z)
        .unwrap()
        .constant_term();
    let points: Vec<FieldElem> = match ctx.modulus() {
        Some(p) => (0..p.min(3)).map(|v| ctx.residue(v)).collect(),
        None => (0..3).map(|v| ctx.from_i64(v)).collect(),
    };
    points.iter().all(|t| {
        // a point with sc*xc + sd*xd + k = 0
        let (xc, xd) = if sc.is_zero() {
            (t.clone(), -(&k / &sd))
        } else {
            (-(&(&(&sd * t) + &k) / &sc), t.clone())
        };
        let mut pt = vec![one.clone(); 4];
        pt[c - 1] = xc;
        pt[d - 1] = xd;
        delta.eval(&pt).unwrap().is_zero()
    })
}

#[test]
fn commutator_divisible_by_second_factor() {
    let mut r = rng(33);
    for ctx in [q(), fp(7), fp(11)] {
        for _ in 0..1000 {
            let l1 = form(&ctx, &[1, 2], &mut r);
            let l2 = form(&ctx, &[3, 4], &mut r);
            let l3 = form(&ctx, &[1, 3], &mut r);
            let l4 = form(&ctx, &[2, 4], &mut r);
            let g = &(&l1 * &l2) + &(&l3 * &l4);
            let delta = g.commutator(1, 2).unwrap();
            assert!(vanishes_on_line(&delta, &l2, 3, 4), "{g}");
        }
    }
}

#[test]
fn split_forms_are_recovered() {
    let mut r = rng(34);
    for ctx in [q(), fp(7)] {
        let mut found = 0;
        for _ in 0..500 {
            let l1 = form(&ctx, &[1, 2], &mut r);
            let l2 = form(&ctx, &[3, 4], &mut r);
            let l3 = form(&ctx, &[1, 3], &mut r);
            let l4 = form(&ctx, &[2, 4], &mut r);
            let g = &(&l1 * &l2) + &(&l3 * &l4);
            let rep = structural_report(&g).unwrap();
            match &rep.c3p {
                Some(w) => {
                    found += 1;
                    assert_eq!(w.expand().unwrap(), g);
                    let [m1, m2, ..] = &w.forms;
                    let pair: Vec<usize> = m1.vars().iter().collect();
                    let rest: Vec<usize> = m2.vars().iter().collect();
                    if pair.len() == 2 && rest.len() == 2 {
                        let delta = g.commutator(pair[0], pair[1]).unwrap();
                        assert!(vanishes_on_line(&delta, m2, rest[0], rest[1]), "{g}");
                    }
                }
                // degenerate instances are caught by the restriction check
                None => assert!(rep.c1p.is_some(), "{g}"),
            }
            assert!(
                !matches!(refute_sum2(&g).unwrap(), Sum2Verdict::RefutedNotSum2(_)),
                "{g}"
            );
        }
        assert!(found > 400, "only {found} reconstructions");
    }
}

#[test]
fn refutation_fixture() {
    let ctx = q();
    let f = gen_f(ctx, &ctx.from_i64(2), &ctx.from_i64(4), &ctx.from_i64(5)).unwrap();
    let rep = weight_conditions(ctx, &ctx.from_i64(2), &ctx.from_i64(4), &ctx.from_i64(5)).unwrap();
    assert!(rep.c1 && rep.c2 && rep.c3);
    assert!(rep.d_values.iter().all(|d| *d == ctx.from_i64(-231)));
    assert!(matches!(
        refute_sum2(&f).unwrap(),
        Sum2Verdict::RefutedNotSum2(_)
    ));
}
