mod common;

use common::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rofsum::oracle::{OracleLimits, RopSet};
use rofsum::rof::{annihilating_restriction, Gate};
use rofsum::Rof;

#[test]
fn expansion_is_multilinear() {
    let mut r = rng(11);
    for ctx in [q(), fp(2), fp(7)] {
        for _ in 0..500 {
            let n = r.gen_range(1..=6);
            let t = random_rof(&ctx, n, false, &mut r);
            let p = t.expand(&ctx, n).unwrap();
            assert!(p.is_multilinear(), "{t} -> {p}");
            assert!(p.vars().is_subset(t.leaf_vars()));
            assert_eq!(Rof::from_json(&t.to_json(), &ctx).unwrap(), t);
        }
    }
}

#[test]
fn derivatives_stay_read_once() {
    let limits = OracleLimits::default();
    let mut r = rng(12);
    for p in [2u64, 3] {
        let ctx = fp(p);
        let table = RopSet::build(p, 4, &limits).unwrap();
        for _ in 0..300 {
            let t = random_rof(&ctx, 4, false, &mut r);
            let poly = t.expand(&ctx, 4).unwrap();
            assert!(table.is_rop(&poly).unwrap(), "{t}");
            for i in 1..=4 {
                let d = poly.partial_derivative(i).unwrap();
                assert!(table.is_rop(&d).unwrap(), "d/dx{i} of {t} = {d}");
            }
        }
    }
}

#[test]
fn restriction_kills_a_derivative() {
    let mut r = rng(13);
    let mut checked = 0;
    for ctx in [q(), fp(7)] {
        for _ in 0..500 {
            let n = r.gen_range(2..=6);
            let k = r.gen_range(2..=n);
            let mut vars: Vec<usize> = (1..=n).collect();
            vars.shuffle(&mut r);
            vars.truncate(k);
            let t = random_rof_on(&ctx, &vars, true, &mut r);
            let p = t.expand(&ctx, n).unwrap();
            let i = vars[r.gen_range(0..vars.len())];
            let (j, gamma) = annihilating_restriction(&t, &ctx, n, i).unwrap();
            assert_ne!(i, j);
            assert!(p.vars().contains(j));
            let d = p
                .partial_derivative(j)
                .unwrap()
                .restrict(i, &gamma)
                .unwrap();
            assert!(d.is_zero(), "{t}: i={i} j={j} gamma={gamma}");
            checked += 1;
        }
    }
    assert_eq!(checked, 1000);
}

#[test]
fn add_gate_separates_variables() {
    // Under an addition gate the mixed second derivative vanishes; under a
    // multiplication gate with nonzero scales it does not.
    let mut r = rng(14);
    let mut add_pairs = 0;
    for ctx in [q(), fp(5)] {
        for _ in 0..300 {
            let n = r.gen_range(2..=6);
            let t = random_rof(&ctx, n, false, &mut r);
            let p = t.expand(&ctx, n).unwrap();
            for a in 1..=n {
                for b in a + 1..=n {
                    let Some(gate) = t.lca_gate(a, b) else {
                        continue;
                    };
                    let mixed = p
                        .partial_derivative(a)
                        .unwrap()
                        .partial_derivative(b)
                        .unwrap();
                    match gate {
                        Gate::Add => {
                            add_pairs += 1;
                            assert!(mixed.is_zero(), "{t}: x{a}, x{b}");
                        }
                        Gate::Mul => assert!(!mixed.is_zero(), "{t}: x{a}, x{b}"),
                    }
                }
            }
        }
    }
    assert!(add_pairs > 100);
}
