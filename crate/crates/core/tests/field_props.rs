mod common;

use common::*;
use proptest::prelude::*;
use rofsum::numfield::is_prime;
use rofsum::{FieldCtx, SquareRoot};

#[test]
fn inverses_exhaustive_small_primes() {
    for p in (2..=13).filter(|&p| is_prime(p)) {
        let ctx = fp(p);
        for a in ctx.elements().filter(|a| !a.is_zero()) {
            assert!((&a * &a.inv().unwrap()).is_one(), "p={p} a={a}");
        }
        assert!(ctx.zero().inv().is_err());
    }
}

#[test]
fn residue_count_is_half_plus_zero() {
    // Independent count: the set of squares.
    for p in [3u64, 5, 7, 11, 13, 101, 1009] {
        let ctx = fp(p);
        let by_sqrt = ctx
            .elements()
            .filter(|d| ctx.sqrt_in_field(d).exists())
            .count() as u64;
        let squares: std::collections::BTreeSet<u64> = (0..p).map(|x| x * x % p).collect();
        assert_eq!(by_sqrt, squares.len() as u64);
        assert_eq!(by_sqrt, p.div_ceil(2));
    }
}

#[test]
fn large_prime_roots() {
    // Above the exhaustive range the square root uses a different method.
    let p = 1_000_003;
    let ctx = fp(p);
    let mut r = rng(7);
    for _ in 0..200 {
        let x = elem(&ctx, &mut r);
        let sq = &x * &x;
        let root = ctx.sqrt_in_field(&sq);
        let root = root.root().expect("square has a root");
        assert_eq!(&(root * root), &sq);
    }
    // -1 is a non-residue when p = 3 mod 4
    assert_eq!(p % 4, 3);
    assert_eq!(ctx.sqrt_in_field(&ctx.from_i64(-1)), SquareRoot::None);
}

#[test]
fn canonical_roots() {
    let q = q();
    assert_eq!(
        q.sqrt_in_field(&q.parse_scalar("9/4").unwrap())
            .root()
            .unwrap()
            .to_string(),
        "3/2"
    );
    let f = fp(11);
    // 3 = 5^2 = 6^2 mod 11, smaller residue wins
    assert_eq!(
        f.sqrt_in_field(&f.from_i64(3)).root().unwrap().to_string(),
        "5"
    );
    let reals = FieldCtx::reals();
    assert!(matches!(
        reals.sqrt_in_field(&reals.from_i64(2)),
        SquareRoot::Unrepresentable
    ));
    assert_eq!(reals.sqrt_in_field(&reals.from_i64(-2)), SquareRoot::None);
}

proptest! {
    #[test]
    fn rational_inverse(n in -10_000i64..10_000, d in 1i64..10_000) {
        prop_assume!(n != 0);
        let q = q();
        let a = q.parse_scalar(&format!("{n}/{d}")).unwrap();
        prop_assert!((&a * &a.inv().unwrap()).is_one());
    }

    #[test]
    fn rational_sqrt_of_square(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
        let q = q();
        let r = q.parse_scalar(&format!("{n}/{d}")).unwrap();
        let sq = &r * &r;
        let root = q.sqrt_in_field(&sq);
        let root = root.root().expect("a square has a root");
        prop_assert_eq!(&(root * root), &sq);
        prop_assert!(!root.is_negative());
    }

    #[test]
    fn prime_sqrt_of_square(pi in 0usize..6, x in 0u64..10_000) {
        let p = [2u64, 3, 5, 7, 9973, 65_537][pi];
        let ctx = fp(p);
        let r = ctx.residue(x % p);
        let sq = &r * &r;
        let root = ctx.sqrt_in_field(&sq);
        let root = root.root().expect("a square has a root");
        prop_assert_eq!(&(root * root), &sq);
    }

    #[test]
    fn scalar_text_round_trip(n in -1_000i64..1_000, d in 1i64..1_000) {
        for ctx in [q(), fp(7), fp(13)] {
            let Ok(a) = ctx.parse_scalar(&format!("{n}/{d}")) else { continue };
            prop_assert_eq!(ctx.parse_scalar(&a.to_string()).unwrap(), a);
        }
    }
}
