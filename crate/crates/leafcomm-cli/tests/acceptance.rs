//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Everything asserted here is either an exact rational comparison, an
//! oracle equivalence against brute force, or a seeded measurement with the
//! tolerance pinned in the assertion.  Run with `--nocapture` to see the
//! per-criterion lines.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use leafcomm::counting::{
    count_sat_bruteforce, count_sat_fast, count_sat_randomized, CountError, FastOptions,
    LeafDevice, RandomizedOptions,
};
use leafcomm::formula::{random_formula, Formula, GateClass, LeafGate, Node};
use leafcomm::hardness::{
    best_parity_correlation, gip, inner_product, lb_size_bound, Dist, SignedParity,
};
use leafcomm::learning::{pac_learn_formula_xor, ExampleOracle, Hypothesis};
use leafcomm::polynomial::build_approx;
use leafcomm::prg::{
    exact_gap_against_table, exact_parity_bias, gip_stretch_expand, inw_config, inw_expand,
    schedule_field_bits, seed_length_report, SeedLengthModel,
};
use leafcomm::rng::{task_rng, Stream};

fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn pass(criterion: usize, details: &str) {
    println!("acceptance criterion {criterion:2}: PASS — {details}");
}

/// Criterion 1: 100 random formulas (n ≤ 12, s ≤ 36), eps ∈ {1/3, 1/10};
/// the built polynomial satisfies the pointwise bound exactly.
#[test]
fn acceptance_01_approximating_polynomials() {
    let jobs: Vec<u64> = (0..100).collect();
    let failures: Vec<String> = jobs
        .par_iter()
        .flat_map(|&i| {
            let n = 4 + (i % 9) as usize; // 4..=12
            let s = 1 + (i * 7 % 36) as usize; // 1..=36
            let f = random_formula(n, s, GateClass::Var, 0xACC1_0000 + i);
            [ratio(1, 3), ratio(1, 10)]
                .into_iter()
                .filter_map(|eps| match build_approx(&f, &eps) {
                    Ok(rep) => {
                        let achieved = rep.achieved.expect("n <= 16 is verified");
                        if achieved <= eps {
                            None
                        } else {
                            Some(format!("formula {i}: error {achieved} > {eps}"))
                        }
                    }
                    Err(e) => Some(format!("formula {i}: {e}")),
                })
                .collect::<Vec<_>>()
        })
        .collect();
    assert!(failures.is_empty(), "{failures:?}");
    pass(1, "100 formulas x eps in {1/3, 1/10}, exact pointwise bounds");
}

/// Criterion 2: 200 random FORMULA∘XOR devices (n ≤ 14, s ≤ 16) and 30
/// FORMULA∘SYM devices: the fast count equals brute force exactly and the
/// rounding-gap assertion never fires.
#[test]
fn acceptance_02_sat_oracle_equivalence() {
    let checked: Vec<(usize, usize, usize, u64)> = (0..200u64)
        .map(|i| {
            let n = [8usize, 10, 12, 14][(i % 4) as usize];
            let s = 1 + (i % 16) as usize;
            let nprime = if i % 2 == 0 || n == 8 { 2 } else { 4 };
            (n, s, nprime, i)
        })
        .collect();
    let failures: Vec<String> = checked
        .par_iter()
        .map(|&(n, s, nprime, i)| {
            // The sampler redraws devices whose term expansion would blow
            // the memory cap; the cap stays an error of the operation.
            let mut seed = 0xACC2_0000 + i;
            loop {
                let f = random_formula(n, s, GateClass::Xor, seed);
                let d = LeafDevice::new(f);
                let opts = FastOptions { nprime: Some(nprime), ..Default::default() };
                match count_sat_fast(&d, &opts) {
                    Ok(rep) => {
                        let brute = count_sat_bruteforce(&d).unwrap();
                        if rep.count != brute {
                            return Err(format!(
                                "device {i} (n={n}, s={s}): fast {} != brute {brute}",
                                rep.count
                            ));
                        }
                        return Ok(0u64);
                    }
                    Err(CountError::TermCapExceeded { .. }) => {
                        seed += 0x1000_0000;
                        continue;
                    }
                    Err(CountError::RoundingGap { x, value }) => {
                        return Err(format!(
                            "device {i}: rounding gap fired at {x}: {value}"
                        ))
                    }
                    Err(e) => return Err(format!("device {i}: {e}")),
                }
            }
        })
        .filter_map(|r: Result<u64, String>| r.err())
        .collect();
    assert!(failures.is_empty(), "{failures:?}");

    let sym_failures: Vec<String> = (0..30u64)
        .collect::<Vec<_>>()
        .par_iter()
        .filter_map(|&i| {
            let n = [8usize, 10, 12][(i % 3) as usize];
            let s = 1 + (i % 4) as usize;
            let f = random_formula(n, s, GateClass::Sym, 0xACC3_0000 + i);
            let d = LeafDevice::new(f);
            let opts = FastOptions { nprime: Some(2), ..Default::default() };
            match count_sat_fast(&d, &opts) {
                Ok(rep) => {
                    let brute = count_sat_bruteforce(&d).unwrap();
                    (rep.count != brute)
                        .then(|| format!("sym {i}: fast {} != brute {brute}", rep.count))
                }
                Err(e) => Some(format!("sym {i}: {e}")),
            }
        })
        .collect();
    assert!(sym_failures.is_empty(), "{sym_failures:?}");
    pass(2, "200 xor + 30 sym devices equal brute force; no rounding-gap events");
}

/// Criterion 3: 30 FORMULA[s ≤ 4]∘LTF devices (n ≤ 10), 100 seeded runs per
/// device at confidence 0.99: at least 95% of runs return the exact count.
#[test]
fn acceptance_03_randomized_sat() {
    let devices: Vec<u64> = (0..30).collect();
    let results: Vec<Result<(u64, u64), String>> = devices
        .par_iter()
        .map(|&i| {
            let n = 8usize;
            let s = 1 + (i % 4) as usize;
            let f = random_formula(n, s, GateClass::Ltf, 0xACC4_0000 + i);
            let d = LeafDevice::new(f);
            let brute = count_sat_bruteforce(&d).map_err(|e| e.to_string())?;
            let mut correct = 0u64;
            for run in 0..100u64 {
                let opts = RandomizedOptions {
                    nprime: Some(2),
                    seed: (i << 32) | run,
                    confidence: 0.99,
                    ..Default::default()
                };
                match count_sat_randomized(&d, &opts) {
                    Ok(rep) if rep.count == brute => correct += 1,
                    Ok(_) | Err(_) => {}
                }
            }
            Ok((i, correct))
        })
        .collect();
    let mut total_correct = 0u64;
    for r in results {
        let (i, correct) = r.expect("device setup");
        assert!(correct >= 95, "device {i}: only {correct}/100 runs correct");
        total_correct += correct;
    }
    pass(3, &format!("30 LTF devices x 100 runs, {total_correct}/3000 exact"));
}

/// Criterion 4: small-bias soundness — exhaustive parity bias within n/2^l
/// for every l ≤ 12, and the 30-device formula∘XOR regression suite is
/// 1/4-fooled with the schedule constant c = 1 (exact gaps).
#[test]
fn acceptance_04_small_bias() {
    let n = 10usize;
    for l in 1..=12usize {
        let bound = ratio(n as i64, 1i64 << l);
        for mask in 1..1u64 << n {
            let bias = exact_parity_bias(mask, l);
            assert!(bias <= bound, "l = {l}, mask {mask:#b}: bias {bias} > {bound}");
        }
    }
    let eps = ratio(1, 4);
    let gaps: Vec<(u64, BigRational)> = (0..30u64)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&i| {
            let nv = 8 + (i % 3) as usize; // 8..=10
            let s = 1 + (i % 8) as usize;
            let f = random_formula(nv, s, GateClass::Xor, 0xACC5_0000 + i);
            let table = f.truth_table().unwrap();
            let l = schedule_field_bits(nv as u64, s as u64, &eps, 1.0).unwrap();
            (i, exact_gap_against_table(&table, l))
        })
        .collect();
    for (i, gap) in &gaps {
        assert!(gap <= &eps, "device {i}: exact gap {gap} > 1/4");
    }
    let worst = gaps.iter().map(|(_, g)| g).max().unwrap();
    pass(4, &format!("bias sweep l <= 12 clean; 30 devices, worst exact gap {worst}"));
}

/// Criterion 5: INW toy configuration (k = 2, n = 8, D' = 2): exhaustive
/// fooling gap over all seeds against 50 random product functions stays
/// within the hybrid bound 3^t · δ'.
#[test]
fn acceptance_05_inw_fooling() {
    let delta = ratio(1, 2);
    let cfg = inw_config(8, 2, 2, delta).unwrap();
    let bound = (&cfg.delta_prime * ratio(3, 1)).min(ratio(1, 1));
    let seeds = 1u64 << cfg.seed_len;
    // Pre-expand every seed once.
    let outputs: Vec<u64> = (0..seeds)
        .map(|sv| {
            let bits: Vec<bool> = (0..cfg.seed_len).map(|b| sv >> b & 1 == 1).collect();
            let out = inw_expand(&bits, &cfg).unwrap();
            out.iter().enumerate().fold(0u64, |acc, (j, &b)| acc | (b as u64) << j)
        })
        .collect();
    let mut worst = BigRational::zero();
    for i in 0..50u64 {
        let mut rng = task_rng(0xACC6, Stream::PrgSampling, i);
        use rand::RngExt;
        let gtab: Vec<bool> = (0..16).map(|_| rng.random()).collect();
        let htab: Vec<bool> = (0..16).map(|_| rng.random()).collect();
        let accept = |x: u64| gtab[(x & 15) as usize] && htab[(x >> 4) as usize];
        let hits = outputs.iter().filter(|&&x| accept(x)).count();
        let p_g = BigRational::new(BigInt::from(hits), BigInt::from(seeds));
        let uniform = (0..256u64).filter(|&x| accept(x)).count();
        let p_u = ratio(uniform as i64, 256);
        let gap = (p_g - p_u).abs();
        assert!(gap <= bound, "product {i}: gap {gap} > hybrid bound {bound}");
        if gap > worst {
            worst = gap;
        }
    }
    pass(5, &format!("50 products exhaustive; worst gap {worst} within 3^t·δ' = {bound}"));
}

/// Criterion 6: GIP-stretch data/GIP-bit consistency for every seed with
/// m·t ≤ 16, and gip(2,·) ≡ inner product up to n = 16.
#[test]
fn acceptance_06_gip_stretch() {
    for (m, t, k) in [(4usize, 2usize, 2usize), (2, 4, 2), (8, 2, 2), (4, 4, 4)] {
        let block = m / k;
        let batch = t / k;
        let section = t * block + batch;
        for s in 0..1u64 << (m * t) {
            let seed: Vec<bool> = (0..m * t).map(|i| s >> i & 1 == 1).collect();
            let out = gip_stretch_expand(&seed, m, t, k).unwrap();
            assert_eq!(out.len(), m * t + t);
            for i in 0..k {
                for j in 0..t {
                    for b in 0..block {
                        assert_eq!(
                            out[i * section + j * block + b],
                            seed[j * m + i * block + b],
                            "data bits (m={m},t={t},k={k})"
                        );
                    }
                }
                for (pos, j) in (i * batch..(i + 1) * batch).enumerate() {
                    let mut word = 0u64;
                    for b in 0..m {
                        if seed[j * m + b] {
                            word |= 1 << b;
                        }
                    }
                    assert_eq!(
                        out[i * section + t * block + pos],
                        gip(k, word, m).unwrap(),
                        "gip bits (m={m},t={t},k={k},seed={s:#x})"
                    );
                }
            }
        }
    }
    for n in [4usize, 8, 12, 16] {
        for x in 0..1u64 << n {
            assert_eq!(gip(2, x, n).unwrap(), inner_product(x, n));
        }
    }
    pass(6, "4 layouts exhaustively consistent; gip(2) == IP up to n = 16");
}

/// Criterion 7: the approximation-correlation transfer holds exactly on 100
/// random instances, and GIP's best-parity correlation strictly decreases
/// over n ∈ {4, 8, 12}.
#[test]
fn acceptance_07_correlation_lemmas() {
    use rand::RngExt;
    for i in 0..100u64 {
        let mut rng = task_rng(0xACC7, Stream::Custom(71), i);
        let n = 4 + (i % 7) as usize; // 4..=10
        let eps = ratio(1, rng.random_range(3..=16i64));
        let raw: Vec<i64> = (0..1u64 << n).map(|_| rng.random_range(1..20i64)).collect();
        let total: i64 = raw.iter().sum();
        // f random; C flipped from f while keeping agreement >= 1/2 + eps.
        let f: Vec<bool> = (0..1u64 << n).map(|_| rng.random()).collect();
        let mut c = f.clone();
        let mut agreement = ratio(1, 1);
        let floor = ratio(1, 2) + &eps;
        for x in 0..1usize << n {
            let w = ratio(raw[x], total);
            if &agreement - &w >= floor && rng.random::<bool>() {
                c[x] = !c[x];
                agreement -= w;
            }
        }
        // C~ within eps of C in ±1 values.
        let mut expectation = BigRational::zero();
        for x in 0..1usize << n {
            let w = ratio(raw[x], total);
            let cv = if c[x] { ratio(1, 1) } else { ratio(-1, 1) };
            let noise = &eps * ratio(rng.random_range(-16..=16i64), 16);
            let ctilde = cv + noise;
            let fv = if f[x] { ratio(1, 1) } else { ratio(-1, 1) };
            expectation += w * fv * ctilde;
        }
        assert!(
            expectation >= eps,
            "instance {i}: E[C~·f] = {expectation} < eps = {eps} (agreement {agreement})"
        );
    }
    let mut prev: Option<BigRational> = None;
    for n in [4usize, 8, 12] {
        let f = move |x: u64| gip(2, x, n).unwrap();
        let (chi, corr) = best_parity_correlation(&f, n, &Dist::Uniform).unwrap();
        assert_eq!(corr, ratio(1, 1 << (n / 2)), "GIP_{n} best parity");
        assert_eq!(chi, SignedParity { mask: 0, negated: false }, "tie-break");
        if let Some(p) = prev {
            assert!(corr < p, "not strictly decreasing at n = {n}");
        }
        prev = Some(corr);
    }
    pass(7, "100 exact transfer instances; GIP parity correlation strictly decreasing");
}

/// Criterion 8: learning fixture suite — 20 targets (n = 10, s = 9, uniform,
/// eps = delta = 0.1): mean held-out error ≤ 0.1 with ≥ 9/10 per-run
/// success, and parity targets are recovered exactly.
#[test]
fn acceptance_08_learning() {
    let runs: Vec<u64> = (0..20).collect();
    let outcomes: Vec<(u64, f64)> = runs
        .par_iter()
        .map(|&i| {
            let f = random_formula(10, 9, GateClass::Xor, 0xACC8_0000 + i);
            let target = Arc::new(move |x: u64| f.eval(x));
            let mut oracle =
                ExampleOracle::uniform(10, target, task_rng(0xACC8, Stream::LearnerExamples, i));
            let rep = pac_learn_formula_xor(&mut oracle, 9, 0.1, 0.1).expect("learner runs");
            (i, rep.holdout_error.to_f64().unwrap())
        })
        .collect();
    let successes = outcomes.iter().filter(|(_, e)| *e <= 0.1).count();
    let mean: f64 = outcomes.iter().map(|(_, e)| e).sum::<f64>() / outcomes.len() as f64;
    assert!(successes * 10 >= outcomes.len() * 9, "only {successes}/20 runs at error <= 0.1");
    assert!(mean <= 0.1, "mean held-out error {mean}");
    // Parity targets are recovered exactly.
    for i in 0..5u64 {
        let mask = 0b1011001011 & ((1 << 10) - 1) ^ i;
        let chi = SignedParity { mask, negated: i % 2 == 0 };
        let target = Arc::new(move |x: u64| chi.eval(x));
        let mut oracle =
            ExampleOracle::uniform(10, target, task_rng(0xACC9, Stream::LearnerExamples, i));
        let rep = pac_learn_formula_xor(&mut oracle, 1, 0.1, 0.1).unwrap();
        assert!(rep.holdout_error.is_zero(), "parity target {i} not exact");
        match rep.hypothesis {
            Hypothesis::Parity(p) => assert_eq!(p, chi),
            Hypothesis::MajorityVote(_) => panic!("parity target should be a single parity"),
        }
    }
    pass(8, &format!("20 targets: mean {mean:.4}, {successes}/20 runs <= 0.1; parities exact"));
}

/// Criterion 9: the calculators reproduce independently evaluated closed
/// forms on the committed 10-row fixture table.
#[test]
fn acceptance_09_calculators() {
    let text = include_str!("fixtures/calculators.json");
    let fixture: serde_json::Value = serde_json::from_str(text).unwrap();
    let rows = fixture["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    let parse_ratio = |s: &str| -> BigRational {
        let (a, b) = s.split_once('/').unwrap_or((s, "1"));
        BigRational::new(a.parse().unwrap(), b.parse().unwrap())
    };
    for row in rows {
        let kind = row["kind"].as_str().unwrap();
        let expected = parse_ratio(row["expected"].as_str().unwrap());
        let eps = parse_ratio(row["eps"].as_str().unwrap());
        let n = row["n"].as_u64().unwrap();
        let c = row["c"].as_f64().unwrap();
        let r_cost = row.get("r").and_then(|v| v.as_str()).map(parse_ratio);
        let got = match kind {
            "gip-size" => lb_size_bound(
                n,
                row["k"].as_u64().unwrap() as u32,
                &eps,
                &r_cost.clone().unwrap(),
            ),
            "seed-xor" => {
                let model =
                    SeedLengthModel::FormulaXor { n, s: row["s"].as_u64().unwrap(), eps };
                seed_length_report(&model, c).unwrap().theory
            }
            "seed-ltf" => {
                let model =
                    SeedLengthModel::FormulaLtf { n, m: row["m"].as_u64().unwrap(), eps };
                seed_length_report(&model, c).unwrap().theory
            }
            "seed-sym" => {
                let model =
                    SeedLengthModel::FormulaSym { n, s: row["s"].as_u64().unwrap(), eps };
                seed_length_report(&model, c).unwrap().theory
            }
            "seed-nih" => {
                let model = SeedLengthModel::FormulaNih {
                    n,
                    s: row["s"].as_u64().unwrap(),
                    eps,
                    k: row["k"].as_u64().unwrap(),
                    r_cost: r_cost.clone().unwrap(),
                };
                seed_length_report(&model, c).unwrap().theory
            }
            "seed-nof" => {
                let model = SeedLengthModel::FormulaNof {
                    n,
                    s: row["s"].as_u64().unwrap(),
                    eps,
                    k: row["k"].as_u64().unwrap() as u32,
                    r_cost: r_cost.clone().unwrap(),
                };
                seed_length_report(&model, c).unwrap().theory
            }
            other => panic!("unknown fixture kind {other}"),
        };
        assert_eq!(got, expected, "fixture row {kind} n={n}");
    }
    pass(9, "10 fixture rows match the independent evaluation");
}

/// Criterion 10: the full regression suite run twice with the same seed
/// produces byte-identical reports.
#[test]
fn acceptance_10_determinism() {
    let bin = env!("CARGO_BIN_EXE_leafcomm");
    let dir = std::env::temp_dir();
    let out1 = dir.join("leafcomm_suite_run1.json");
    let out2 = dir.join("leafcomm_suite_run2.json");
    for out in [&out1, &out2] {
        let status = std::process::Command::new(bin)
            .args(["suite", "--seed", "11", "--out", out.to_str().unwrap()])
            .status()
            .expect("suite runs");
        assert!(status.success(), "suite exited with {status}");
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b, "suite reports differ between identical runs");
    assert!(!a.is_empty());
    pass(10, &format!("two suite runs byte-identical ({} bytes)", a.len()));
}

/// A sanity companion to criterion 2: the device constructors wire leaf
/// protocols that actually compute their gates.
#[test]
fn acceptance_device_protocol_spot_check() {
    for i in 0..5u64 {
        let f = random_formula(8, 4, GateClass::Xor, 0xACCA + i);
        LeafDevice::new(f).verify_protocols().unwrap();
        let g = random_formula(8, 2, GateClass::Sym, 0xACCB + i);
        LeafDevice::new(g).verify_protocols().unwrap();
    }
    // A table-gate device goes through the trivial protocol.
    let gate = LeafGate::Table { bits: (0..16u64).map(|x| x % 3 == 1).collect() };
    let f = Formula::new(Node::Leaf(0), 4, vec![gate]);
    let d = LeafDevice::new(f);
    d.verify_protocols().unwrap();
    let brute = count_sat_bruteforce(&d).unwrap();
    let rep = count_sat_fast(&d, &FastOptions { nprime: Some(2), ..Default::default() }).unwrap();
    assert_eq!(rep.count, brute);
}
