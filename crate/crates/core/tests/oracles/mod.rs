//! Independent reference implementations and randomized checks against them.
//! Shared by the core integration tests and the CLI acceptance binary.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use brmotif_core::engine::{sort_ranked, Motif};
use brmotif_core::evaluator::compare;
use brmotif_core::fasta::{parse_fasta, to_fasta_bytes, SequenceRecord};
use brmotif_core::reducer::{reduce_mode, reduce_mode_with, MergedMotif};
use brmotif_core::stats::{EnrichmentInput, HypergeomTail};
use brmotif_core::subsample::generate_replicates;
use brmotif_core::SubsampleSpec;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check<T> = Result<T, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check<()> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---- hypergeometric tail ----

pub fn choose_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Exact (numerator, denominator) of P(X >= k).
pub fn exact_tail(e: &EnrichmentInput) -> (BigUint, BigUint) {
    let (n_pop, succ, draws) = (e.total, e.target_total, e.containing);
    let hi = succ.min(draws);
    let mut num = BigUint::zero();
    for i in e.target_containing..=hi {
        num += choose_big(succ, i) * choose_big(n_pop - succ, draws - i);
    }
    (num, choose_big(n_pop, draws))
}

fn ln_big(x: &BigUint) -> f64 {
    let shift = (x.bits() as i64 - 64).max(0);
    (x >> shift as usize).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    let s = num.bits() as i64 - den.bits() as i64 - 64;
    let q = if s >= 0 {
        num / (den << s as usize)
    } else {
        (num << (-s) as usize) / den
    };
    q.to_f64().unwrap() * 2f64.powi(s as i32)
}

/// ln(num/den) to near full double precision, also when the ratio is near 1.
pub fn ln_ratio(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return f64::NEG_INFINITY;
    }
    if num * 2u32 > *den {
        (-ratio_f64(&(den - num), den)).ln_1p()
    } else {
        ln_big(num) - ln_big(den)
    }
}

/// Every valid quadruple with total <= `max_total`; returns (count, max abs error).
pub fn hypergeom_exhaustive(max_total: u64, tol: f64) -> Check<(usize, f64)> {
    let scorer = HypergeomTail::new(max_total);
    let mut checked = 0;
    let mut worst = 0.0f64;
    for total in 0..=max_total {
        for target_total in 0..=total {
            for containing in 0..=total {
                for k in 0..=target_total.min(containing) {
                    let e = EnrichmentInput { total, target_total, containing, target_containing: k };
                    let (num, den) = exact_tail(&e);
                    let exact = ln_ratio(&num, &den);
                    let got = scorer.log_tail(&e).map_err(|err| format!("{e:?}: {err}"))?;
                    let err = (got - exact).abs();
                    worst = worst.max(err);
                    ensure(err <= tol, || format!("{e:?}: got {got}, exact {exact}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok((checked, worst))
}

/// Random quadruples with total <= `max_total`; returns the max relative error.
pub fn hypergeom_spot(count: usize, max_total: u64, rel_tol: f64, seed: u64) -> Check<f64> {
    let scorer = HypergeomTail::new(max_total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let total = rng.random_range(1..=max_total);
        let target_total = rng.random_range(0..=total);
        let containing = rng.random_range(0..=total);
        let lo = (containing + target_total).saturating_sub(total);
        let k = rng.random_range(lo..=target_total.min(containing));
        let e = EnrichmentInput { total, target_total, containing, target_containing: k };
        let (num, den) = exact_tail(&e);
        let exact = ln_ratio(&num, &den);
        let got = scorer.log_tail(&e).map_err(|err| format!("{e:?}: {err}"))?;
        if exact == 0.0 {
            ensure(got == 0.0, || format!("{e:?}: got {got}, exact 0"))?;
        } else {
            let rel = ((got - exact) / exact).abs();
            worst = worst.max(rel);
            ensure(rel <= rel_tol, || format!("{e:?}: got {got}, exact {exact}"))?;
        }
    }
    Ok(worst)
}

// ---- FASTA ----

fn random_header(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(0..30);
    (0..n).map(|_| rng.random_range(b' '..=b'~') as char).collect()
}

fn random_residues(rng: &mut ChaCha8Rng, len: usize, alphabet: &[u8]) -> Vec<u8> {
    (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
}

/// A canonical file assembled line by line, independent of the writer.
fn canonical_file(records: &[(String, Vec<u8>, usize)]) -> Vec<u8> {
    let mut out = Vec::new();
    for (h, r, w) in records {
        out.push(b'>');
        out.extend_from_slice(h.as_bytes());
        out.push(b'\n');
        for line in r.chunks(*w) {
            out.extend_from_slice(line);
            out.push(b'\n');
        }
    }
    out
}

/// Both round-trip directions over `cases` generated inputs each.
pub fn fasta_roundtrip(cases: usize, seed: u64) -> Check<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.random_range(1..6);
        let raw: Vec<(String, Vec<u8>, usize)> = (0..n)
            .map(|_| {
                let len = rng.random_range(1..400);
                let width = rng.random_range(1..=len.min(120));
                (random_header(&mut rng), random_residues(&mut rng, len, b"ACGTN"), width)
            })
            .collect();

        let records: Vec<SequenceRecord> = raw
            .iter()
            .map(|(h, r, w)| SequenceRecord::new(h.clone(), r, *w).map_err(|e| e.to_string()))
            .collect::<Check<_>>()?;
        let parsed = parse_fasta(to_fasta_bytes(&records).as_slice()).map_err(|e| format!("case {case}: {e}"))?;
        ensure(parsed == records, || format!("case {case}: parse(write(r)) != r"))?;

        let file = canonical_file(&raw);
        let parsed = parse_fasta(file.as_slice()).map_err(|e| format!("case {case}: {e}"))?;
        ensure(to_fasta_bytes(&parsed) == file, || format!("case {case}: write(parse(f)) != f"))?;
    }
    Ok(())
}

// ---- subsampling ----

fn random_record(rng: &mut ChaCha8Rng, len: usize, name: usize) -> SequenceRecord {
    let width = rng.random_range(1..=80);
    SequenceRecord::new(format!("r{name}"), random_residues(rng, len, b"ACGT"), width).unwrap()
}

/// Floor length, substring-of-source and seed determinism over `cases`
/// random inputs; replicate independence over `cases` seeds on a 10 kbp record.
pub fn subsample_properties(cases: usize, seed: u64) -> Check<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let input: Vec<SequenceRecord> = (0..rng.random_range(1..6))
            .map(|i| {
                let len = rng.random_range(1..3000);
                random_record(&mut rng, len, i)
            })
            .collect();
        let percent = rng.random_range(1..=100);
        let spec = SubsampleSpec::new(percent, rng.random_range(1..5), rng.random())
            .map_err(|e| e.to_string())?;
        let reps = generate_replicates(&input, &spec).map_err(|e| e.to_string())?;
        ensure(reps.len() == spec.replicates(), || format!("case {case}: replicate count"))?;
        for rep in &reps {
            for (o, i) in rep.records.iter().zip(&input) {
                let expected = (i.len() * percent as usize / 100).max(1);
                ensure(o.len() == expected, || {
                    format!("case {case}: length {} of {} at {percent}%, want {expected}", o.len(), i.len())
                })?;
                ensure(i.residues().windows(o.len()).any(|w| w == o.residues()), || {
                    format!("case {case}: window is not a substring of its source")
                })?;
                ensure(o.header() == i.header() && o.line_width() == i.line_width(), || {
                    format!("case {case}: header or line width changed")
                })?;
            }
        }
        let again = generate_replicates(&input, &spec).map_err(|e| e.to_string())?;
        ensure(
            reps.iter().zip(&again).all(|(a, b)| a.records == b.records),
            || format!("case {case}: same seed gave different replicates"),
        )?;
    }

    let source = vec![random_record(&mut rng, 10_000, 0)];
    let mut identical = 0;
    for s in 0..cases as u64 {
        let spec = SubsampleSpec::new(rng.random_range(1..=50), 2, s).map_err(|e| e.to_string())?;
        let reps = generate_replicates(&source, &spec).map_err(|e| e.to_string())?;
        if reps[0].records == reps[1].records {
            identical += 1;
        }
    }
    // at least 5001 possible windows per draw
    ensure(identical <= 1, || format!("{identical} of {cases} replicate pairs identical"))
}

// ---- reducer and evaluator ----

const POOL: [&str; 10] = [
    "AAAA", "ACGT", "CCGG", "GATC", "TTAA", "AAAAC", "ACGTA", "GGGCC", "CATGA", "TTTTG",
];

pub fn motif(c: &str, ln_p: f64, tc: u64) -> Motif {
    Motif {
        length: c.len(),
        consensus: c.into(),
        target_containing: tc,
        target_total: 50,
        bg_containing: 3,
        bg_total: 50,
        ln_p,
    }
}

/// A ranked list of distinct motifs from a small pool, lnP on a coarse grid
/// so that ties are common.
pub fn random_list(rng: &mut ChaCha8Rng) -> Vec<Motif> {
    let n = rng.random_range(0..=POOL.len());
    let mut pool = POOL.to_vec();
    pool.shuffle(rng);
    let mut list: Vec<Motif> = pool[..n]
        .iter()
        .map(|c| motif(c, -(rng.random_range(0..12) as f64) * 0.5, rng.random_range(1..50)))
        .collect();
    sort_ranked(&mut list);
    list
}

fn key(ln_p: f64) -> i64 {
    (ln_p * 1e4).round() as i64
}

pub struct ExpectedMerge {
    pub consensus: String,
    pub support: usize,
    pub workers: Vec<usize>,
    pub best: Motif,
}

pub fn oracle_reduce(lists: &[Vec<Motif>], cap: usize, min_support: usize) -> Vec<ExpectedMerge> {
    let ids: BTreeSet<(usize, String)> =
        lists.iter().flatten().map(|m| (m.length, m.consensus.clone())).collect();
    let mut out = Vec::new();
    for (len, cons) in ids {
        let mut workers = Vec::new();
        let mut best: Option<Motif> = None;
        for (w, l) in lists.iter().enumerate() {
            let hits: Vec<&Motif> = l.iter().filter(|m| m.length == len && m.consensus == cons).collect();
            if !hits.is_empty() {
                workers.push(w);
            }
            for h in hits {
                if best.as_ref().is_none_or(|b| key(h.ln_p) < key(b.ln_p)) {
                    best = Some(h.clone());
                }
            }
        }
        if workers.len() >= min_support {
            out.push(ExpectedMerge { consensus: cons, support: workers.len(), workers, best: best.unwrap() });
        }
    }
    out.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then(key(a.best.ln_p).cmp(&key(b.best.ln_p)))
            .then(a.best.length.cmp(&b.best.length))
            .then(a.consensus.cmp(&b.consensus))
    });
    out.truncate(cap);
    out
}

pub fn reducer_oracle(cases: usize, seed: u64) -> Check<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let lists: Vec<Vec<Motif>> = (0..rng.random_range(1..6)).map(|_| random_list(&mut rng)).collect();
        let cap = rng.random_range(1..15);
        let min_support = rng.random_range(1..3);
        let got = reduce_mode_with(&lists, cap, min_support).map_err(|e| e.to_string())?;
        let want = oracle_reduce(&lists, cap, min_support);
        ensure(got.len() == want.len(), || format!("case {case}: {} merged, oracle {}", got.len(), want.len()))?;
        for (i, (g, w)) in got.iter().zip(&want).enumerate() {
            ensure(
                g.motif.consensus == w.consensus
                    && g.support == w.support
                    && g.workers == w.workers
                    && g.motif == w.best,
                || format!("case {case}, row {i}: {:?} vs oracle {}", g, w.consensus),
            )?;
        }
    }
    Ok(())
}

fn merged_shape(v: &[MergedMotif]) -> Vec<(String, usize, i64)> {
    v.iter().map(|m| (m.motif.consensus.clone(), m.support, m.motif.ln_p_key())).collect()
}

pub fn reducer_permutation(cases: usize, seed: u64) -> Check<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let lists: Vec<Vec<Motif>> = (0..rng.random_range(1..6)).map(|_| random_list(&mut rng)).collect();
        let mut shuffled = lists.clone();
        shuffled.shuffle(&mut rng);
        let a = reduce_mode(&lists, 100).map_err(|e| e.to_string())?;
        let b = reduce_mode(&shuffled, 100).map_err(|e| e.to_string())?;
        ensure(merged_shape(&a) == merged_shape(&b), || format!("case {case}: order-dependent merge"))?;
    }
    Ok(())
}

pub struct ExpectedCompare {
    pub common: usize,
    pub a_only: usize,
    pub b_only: usize,
    pub recall: usize,
    pub strict: usize,
}

pub fn oracle_compare(a: &[Motif], b: &[Motif], k: usize) -> ExpectedCompare {
    let ids = |l: &[Motif]| {
        let mut seen = HashSet::new();
        l.iter().map(|m| m.consensus.clone()).filter(|c| seen.insert(c.clone())).collect::<Vec<_>>()
    };
    let (ia, ib) = (ids(a), ids(b));
    let common = ia.iter().filter(|x| ib.contains(x)).count();
    ExpectedCompare {
        common,
        a_only: ia.len() - common,
        b_only: ib.len() - common,
        recall: ia.iter().take(k).filter(|x| ib.contains(x)).count(),
        strict: ia.iter().take(k).filter(|x| ib.iter().take(k).any(|y| y == *x)).count(),
    }
}

pub fn evaluator_oracle(cases: usize, seed: u64) -> Check<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ks = [1, 3, 5, 10];
    for case in 0..cases {
        let a = random_list(&mut rng);
        let b = random_list(&mut rng);
        let r = compare(&a, &b, &ks).map_err(|e| e.to_string())?;
        for k in ks {
            let w = oracle_compare(&a, &b, k);
            ensure(
                r.common == w.common
                    && r.a_only == w.a_only
                    && r.b_only == w.b_only
                    && r.topk_recall[&k] == w.recall
                    && r.topk_strict[&k] == w.strict,
                || format!("case {case}, k={k}: {r:?}"),
            )?;
        }
    }
    Ok(())
}
