//! Exhaustive enumeration of read-once polynomials over small prime fields.
//!
//! A multilinear polynomial on at most five variables over `F_p` (`p < 16`)
//! is stored densely: one nibble per monomial, the monomial indexed by its
//! variable mask (bit `v-1` for `x_v`). For every variable set `S` the set
//! holds the read-once polynomials that depend on exactly `S`, normalized to
//! constant term zero and leading coefficient one (leading = smallest mask).
//! Every read-once polynomial is an affine image `a*e + b` of exactly one
//! stored entry `e`, or a constant.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analyze::weight_conditions;
use crate::error::{Error, Result};
use crate::mpoly::{gen_f, Monomial, Poly};
use crate::numfield::{is_prime, FieldCtx};

/// Fingerprints hold 32 nibbles, hence at most five variables.
pub const MAX_VARS: usize = 5;
/// Nibble coefficients cap the modulus.
pub const MAX_MODULUS: u64 = 13;

const MAGIC: &[u8; 8] = b"ROPSET\0\0";
const CACHE_VERSION: u32 = 1;

pub type Fingerprint = u128;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_n: usize,
    pub max_p: u64,
    /// Allows sum queries on the largest tables (five variables over `F_5`).
    pub allow_large_sum_queries: bool,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_n: 5,
            max_p: 5,
            allow_large_sum_queries: false,
        }
    }
}

impl OracleLimits {
    fn check_build(&self, p: u64, n: usize) -> Result<()> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n > MAX_VARS || p > MAX_MODULUS {
            return Err(Error::ResourceGuard(format!(
                "tables are limited to {MAX_VARS} variables and p <= {MAX_MODULUS} by the fingerprint width; asked for p={p}, n={n}"
            )));
        }
        if n > self.max_n || p > self.max_p {
            return Err(Error::ResourceGuard(format!(
                "p={p}, n={n} exceeds the configured limits p <= {}, n <= {}",
                self.max_p, self.max_n
            )));
        }
        Ok(())
    }
}

/// Field arithmetic on residues below 16.
#[derive(Clone, Debug)]
struct Tables {
    p: u8,
    mul: [[u8; 16]; 16],
    inv: [u8; 16],
}

impl Tables {
    fn new(p: u8) -> Self {
        let mut mul = [[0u8; 16]; 16];
        let mut inv = [0u8; 16];
        for a in 0..p {
            for b in 0..p {
                mul[a as usize][b as usize] = ((a as u16 * b as u16) % p as u16) as u8;
                if (a as u16 * b as u16) % p as u16 == 1 {
                    inv[a as usize] = b;
                }
            }
        }
        Tables { p, mul, inv }
    }

    #[inline]
    fn add(&self, a: u8, b: u8) -> u8 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    fn neg(&self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }
}

type Dense = [u8; 32];

#[inline]
fn unpack(fp: Fingerprint) -> Dense {
    let mut d = [0u8; 32];
    for (m, slot) in d.iter_mut().enumerate() {
        *slot = ((fp >> (4 * m)) & 0xF) as u8;
    }
    d
}

#[inline]
fn pack(d: &Dense) -> Fingerprint {
    d.iter()
        .enumerate()
        .fold(0, |acc, (m, &c)| acc | (c as u128) << (4 * m))
}

/// Variable mask the polynomial depends on.
#[inline]
fn support(d: &Dense) -> usize {
    d.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .fold(0, |acc, (m, _)| acc | m)
}

impl Tables {
    /// Drops the constant and scales the leading coefficient to one; `None` for constants.
    #[inline]
    fn normalize(&self, d: &mut Dense) -> Option<()> {
        d[0] = 0;
        let lead = d.iter().copied().find(|&c| c != 0)?;
        if lead != 1 {
            let k = self.inv[lead as usize];
            for c in d.iter_mut() {
                *c = self.mul[*c as usize][k as usize];
            }
        }
        Some(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RopSet {
    p: u64,
    n: usize,
    /// Indexed by variable mask; sorted, deduplicated.
    sets: Vec<Vec<Fingerprint>>,
}

/// Nonzero `(mask, coefficient)` pairs.
fn terms_of(d: &Dense) -> Vec<(usize, u8)> {
    d.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(m, &c)| (m, c))
        .collect()
}

impl RopSet {
    pub fn build(p: u64, n: usize, limits: &OracleLimits) -> Result<Self> {
        limits.check_build(p, n)?;
        let t = Tables::new(p as u8);
        let full = 1usize << n;
        let mut sets: Vec<Vec<Fingerprint>> = vec![Vec::new(); full];
        let mut masks: Vec<usize> = (1..full).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        for s in masks {
            if s.count_ones() == 1 {
                sets[s] = vec![1u128 << (4 * s)];
                continue;
            }
            let low = s & s.wrapping_neg();
            let mut found: Vec<Fingerprint> = Vec::new();
            // Sub-masks `a` of `s` containing the lowest bit, `b = s \ a` nonempty.
            let mut a = (s - 1) & s;
            while a > 0 {
                if a & low != 0 {
                    let b = s & !a;
                    found.extend(combine(&t, &sets[a], &sets[b]));
                }
                a = (a - 1) & s;
            }
            found.par_sort_unstable();
            found.dedup();
            sets[s] = found;
        }
        Ok(RopSet { p, n, sets })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn ctx(&self) -> FieldCtx {
        FieldCtx::prime(self.p).expect("prime checked at build")
    }

    /// Number of normalized entries depending on exactly `mask`.
    pub fn count_exact(&self, mask: usize) -> usize {
        self.sets.get(mask).map_or(0, Vec::len)
    }

    pub fn total_normalized(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    /// Number of distinct read-once polynomials with variables inside `mask`,
    /// constants included.
    pub fn count_within(&self, mask: usize) -> u128 {
        let p = self.p as u128;
        let nonconst: u128 = (0..self.sets.len())
            .filter(|&m| m & !mask == 0)
            .map(|m| self.sets[m].len() as u128)
            .sum();
        p + nonconst * p * (p - 1)
    }

    fn tables(&self) -> Tables {
        Tables::new(self.p as u8)
    }

    fn contains_dense(&self, t: &Tables, d: &Dense) -> bool {
        let mut d = *d;
        if t.normalize(&mut d).is_none() {
            return true;
        }
        let s = support(&d);
        s < self.sets.len() && self.sets[s].binary_search(&pack(&d)).is_ok()
    }

    /// Dense form of `g`, which must live over this field on at most `n` variables.
    fn dense_of(&self, g: &Poly) -> Result<Dense> {
        let ctx = self.ctx();
        if !g.ctx().same_field(&ctx) {
            return Err(Error::FieldMismatch(g.ctx().to_string(), ctx.to_string()));
        }
        g.require_multilinear()?;
        let vars = g.vars();
        if vars.iter().any(|v| v > self.n) {
            return Err(Error::TooManyVariables {
                found: vars.iter().max().unwrap_or(0),
                max: self.n,
            });
        }
        let mut d = [0u8; 32];
        for (m, c) in g.terms() {
            let mask = m.support().bits() as usize;
            d[mask] = c.residue_value().expect("prime field") as u8;
        }
        Ok(d)
    }

    fn poly_of(&self, d: &Dense, nvars: usize) -> Poly {
        let ctx = self.ctx();
        let terms = terms_of(d).into_iter().map(|(m, c)| {
            let e = (0..nvars).map(|v| (m >> v & 1) as u32).collect();
            (Monomial::from_exponents(e), ctx.residue(c as u64))
        });
        Poly::from_terms(ctx, nvars, terms).expect("valid dense polynomial")
    }

    pub fn is_rop(&self, g: &Poly) -> Result<bool> {
        let d = self.dense_of(g)?;
        Ok(self.contains_dense(&self.tables(), &d))
    }

    /// Decides whether `g` is a sum of at most `k` read-once polynomials; on
    /// success returns the summands.
    pub fn sum_membership(
        &self,
        g: &Poly,
        k: usize,
        limits: &OracleLimits,
    ) -> Result<Option<Vec<Poly>>> {
        if k == 0 {
            return Err(Error::WrongArity {
                expected: 1,
                found: 0,
            });
        }
        if k >= 2 && self.p >= 5 && self.n >= 5 && !limits.allow_large_sum_queries {
            return Err(Error::ResourceGuard(format!(
                "sum queries over p={} with n={} are refused ({} normalized entries)",
                self.p,
                self.n,
                self.total_normalized()
            )));
        }
        let d = self.dense_of(g)?;
        let t = self.tables();
        let nv = g.nvars();
        Ok(self
            .find_sum(&t, &d, k, true)
            .map(|parts| parts.iter().map(|s| self.poly_of(s, nv)).collect()))
    }

    /// All nonconstant read-once polynomials `a*e`, `a != 0`, in table order.
    fn scaled_entries<'a>(&'a self, t: &'a Tables) -> impl ParallelIterator<Item = Dense> + 'a {
        self.sets.par_iter().flat_map_iter(move |set| {
            set.iter().flat_map(move |&fp| {
                let e = unpack(fp);
                (1..t.p).map(move |a| {
                    let mut s = e;
                    for c in s.iter_mut() {
                        *c = t.mul[*c as usize][a as usize];
                    }
                    s
                })
            })
        })
    }

    fn find_sum(&self, t: &Tables, g: &Dense, k: usize, parallel: bool) -> Option<Vec<Dense>> {
        if self.contains_dense(t, g) {
            return Some(vec![*g]);
        }
        if k == 1 {
            return None;
        }
        let sub = |s: &Dense| -> Dense {
            let mut h = *g;
            for (hc, &sc) in h.iter_mut().zip(s) {
                *hc = t.add(*hc, t.neg(sc));
            }
            h
        };
        let attempt = |s: Dense| -> Option<Vec<Dense>> {
            let rest = self.find_sum(t, &sub(&s), k - 1, false)?;
            let mut parts = vec![s];
            parts.extend(rest);
            Some(parts)
        };
        if parallel {
            self.scaled_entries(t).find_map_first(attempt)
        } else {
            self.sets.iter().flat_map(|set| set.iter()).find_map(|&fp| {
                let e = unpack(fp);
                (1..t.p).find_map(|a| {
                    let mut s = e;
                    for c in s.iter_mut() {
                        *c = t.mul[*c as usize][a as usize];
                    }
                    attempt(s)
                })
            })
        }
    }

    fn cache_name(p: u64, n: usize) -> String {
        format!("ropset-p{p}-n{n}.bin")
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.p as u32).to_le_bytes());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        for set in &self.sets {
            out.extend_from_slice(&(set.len() as u64).to_le_bytes());
            for fp in set {
                out.extend_from_slice(&fp.to_le_bytes());
            }
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8], p: u64, n: usize) -> Result<Self> {
        let bad = |msg: &str| Error::Format(format!("table cache: {msg}"));
        if bytes.len() < 20 + 32 {
            return Err(bad("truncated"));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(bad("checksum mismatch"));
        }
        if &body[..8] != MAGIC {
            return Err(bad("bad magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(body[o..o + 4].try_into().unwrap());
        if u32_at(8) != CACHE_VERSION {
            return Err(bad("unsupported version"));
        }
        if u32_at(12) as u64 != p || u32_at(16) as usize != n {
            return Err(bad("parameters do not match"));
        }
        let mut pos = 20;
        let mut sets = Vec::with_capacity(1 << n);
        for _ in 0..1usize << n {
            let len_bytes = body.get(pos..pos + 8).ok_or_else(|| bad("truncated"))?;
            let len = u64::from_le_bytes(len_bytes.try_into().unwrap()) as usize;
            pos += 8;
            let raw = body
                .get(pos..pos + 16 * len)
                .ok_or_else(|| bad("truncated"))?;
            sets.push(
                raw.chunks_exact(16)
                    .map(|c| u128::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            );
            pos += 16 * len;
        }
        if pos != body.len() {
            return Err(bad("trailing bytes"));
        }
        Ok(RopSet { p, n, sets })
    }

    /// Loads from `dir` if a valid cache exists, otherwise builds and writes it.
    pub fn load_or_build(
        p: u64,
        n: usize,
        limits: &OracleLimits,
        dir: Option<&Path>,
    ) -> Result<Self> {
        limits.check_build(p, n)?;
        let Some(dir) = dir else {
            return RopSet::build(p, n, limits);
        };
        let path: PathBuf = dir.join(RopSet::cache_name(p, n));
        if let Ok(bytes) = fs::read(&path) {
            if let Ok(rs) = RopSet::from_bytes(&bytes, p, n) {
                return Ok(rs);
            }
        }
        let rs = RopSet::build(p, n, limits)?;
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&rs.to_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, &path)?;
        Ok(rs)
    }

    pub fn summary_json(&self) -> Value {
        json!({
            "p": self.p,
            "n": self.n,
            "normalized_entries": self.total_normalized(),
            "read_once_polynomials": self.count_within((1 << self.n) - 1).to_string(),
            "by_size": (0..=self.n).map(|k| {
                (0..self.sets.len()).filter(|m| m.count_ones() as usize == k).map(|m| self.sets[m].len()).sum::<usize>()
            }).collect::<Vec<_>>(),
        })
    }
}

/// Every `a*(f op g) + b` for normalized `f`, `g` on disjoint masks, normalized.
fn combine(t: &Tables, left: &[Fingerprint], right: &[Fingerprint]) -> Vec<Fingerprint> {
    let right_terms: Vec<Vec<(usize, u8)>> = right.iter().map(|&g| terms_of(&unpack(g))).collect();
    left.par_iter()
        .flat_map_iter(|&f| {
            let fd = unpack(f);
            let ft = terms_of(&fd);
            let mut out =
                Vec::with_capacity(right.len() * (t.p as usize * t.p as usize + t.p as usize));
            for gt in &right_terms {
                // f + lambda*g
                for lambda in 1..t.p {
                    let mut h = fd;
                    for &(m, c) in gt {
                        h[m] = t.mul[c as usize][lambda as usize];
                    }
                    if t.normalize(&mut h).is_some() {
                        out.push(pack(&h));
                    }
                }
                // (f + s)(g + u)
                for s in 0..t.p {
                    for u in 0..t.p {
                        let mut h = [0u8; 32];
                        let fs = ft.iter().copied().chain(std::iter::once((0, s)));
                        for (mf, cf) in fs {
                            if cf == 0 {
                                continue;
                            }
                            h[mf] = t.add(h[mf], t.mul[cf as usize][u as usize]);
                            for &(mg, cg) in gt {
                                h[mf | mg] = t.add(h[mf | mg], t.mul[cf as usize][cg as usize]);
                            }
                        }
                        if t.normalize(&mut h).is_some() {
                            out.push(pack(&h));
                        }
                    }
                }
            }
            out
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheckReport {
    pub p: u64,
    pub triples: usize,
    pub expressible_by_conditions: usize,
    pub expressible_by_search: usize,
    pub disagreements: Vec<[u64; 3]>,
}

impl CrossCheckReport {
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "triples": self.triples,
            "expressible_by_conditions": self.expressible_by_conditions,
            "expressible_by_search": self.expressible_by_search,
            "disagreements": self.disagreements,
        })
    }
}

/// Compares the scalar conditions with exhaustive two-summand search for
/// every weight triple of the quadratic family over `F_p`.
pub fn cross_check_f_family(rs: &RopSet, limits: &OracleLimits) -> Result<CrossCheckReport> {
    if rs.nvars() < 4 {
        return Err(Error::WrongArity {
            expected: 4,
            found: rs.nvars(),
        });
    }
    let ctx = rs.ctx();
    let p = rs.p();
    let triples: Vec<[u64; 3]> = (0..p)
        .flat_map(|a| (0..p).flat_map(move |b| (0..p).map(move |c| [a, b, c])))
        .collect();
    let mut report = CrossCheckReport {
        p,
        triples: triples.len(),
        expressible_by_conditions: 0,
        expressible_by_search: 0,
        disagreements: Vec::new(),
    };
    for tr in triples {
        let [a, b, c] = tr.map(|v| ctx.residue(v));
        let by_conditions = !weight_conditions(ctx, &a, &b, &c)?.not_expressible();
        let f = gen_f(ctx, &a, &b, &c)?.embed(rs.nvars())?;
        let by_search = rs.sum_membership(&f, 2, limits)?.is_some();
        report.expressible_by_conditions += by_conditions as usize;
        report.expressible_by_search += by_search as usize;
        if by_conditions != by_search {
            report.disagreements.push(tr);
        }
    }
    Ok(report)
}
