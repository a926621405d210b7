//! Subcommand implementations: thin adapters from CLI arguments to library
//! calls, with JSON reports whose numeric fields are exact rationals as
//! strings.

use std::fs;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use leafcomm::counting::{
    count_sat_bruteforce, count_sat_fast, count_sat_randomized, FastOptions, LeafDevice,
    RandomizedOptions,
};
use leafcomm::formula::{parse_formula, Formula, LeafGate};
use leafcomm::hardness::{correlation, lb_size_bound, Dist};
use leafcomm::learning::{pac_learn_formula_xor, ExampleOracle};
use leafcomm::polynomial::build_approx;
use leafcomm::prg::{
    fooling_gap, inw_config, seed_length_report, FoolingGap, Generator, SeedLengthModel,
};
use leafcomm::protocols::{
    enumerate_leaves, ltf_randomized_protocol, sym_nih_protocol, trivial_protocol, xor_protocol,
    MessageFn, PNode, ProtocolTree,
};
use leafcomm::rng::{task_rng, Stream};

pub enum CmdError {
    /// A check that should hold failed (exit 1).
    Assertion(String),
    /// Bad input or parameters (exit 2).
    Validation(String),
}

type CmdResult = Result<(), CmdError>;

fn validation(e: impl std::fmt::Display) -> CmdError {
    CmdError::Validation(e.to_string())
}

pub fn parse_rational(s: &str) -> Result<BigRational, CmdError> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a, b),
        None => (s, "1"),
    };
    let num: BigInt = num.trim().parse().map_err(|e| validation(format!("bad numerator: {e}")))?;
    let den: BigInt =
        den.trim().parse().map_err(|e| validation(format!("bad denominator: {e}")))?;
    if den.is_zero() {
        return Err(validation(format!("zero denominator in rational `{s}`")));
    }
    Ok(BigRational::new(num, den))
}

fn rational_str(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn load_formula(path: &str, nvars: usize) -> Result<Formula, CmdError> {
    let text = fs::read_to_string(path).map_err(|e| validation(format!("{path}: {e}")))?;
    parse_formula(text.trim(), nvars).map_err(validation)
}

fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

pub fn parse(file: &str, nvars: usize, json: bool) -> CmdResult {
    let f = load_formula(file, nvars)?;
    if json {
        emit(&json!({
            "num_vars": f.num_vars,
            "size": f.size(),
            "gates": f.gates.len(),
            "canonical": f.unparse(),
        }));
    } else {
        println!("size {} over {} variables", f.size(), f.num_vars);
        println!("{}", f.unparse());
    }
    Ok(())
}

pub fn approx(file: &str, nvars: usize, eps: &str, verify: bool, json: bool) -> CmdResult {
    let f = load_formula(file, nvars)?;
    let eps = parse_rational(eps)?;
    let rep = build_approx(&f, &eps).map_err(validation)?;
    let achieved = rep.achieved.clone();
    if verify {
        match &achieved {
            Some(a) if a <= &eps => {}
            Some(a) => {
                return Err(CmdError::Assertion(format!(
                    "pointwise error {a} exceeds eps {eps}"
                )))
            }
            None => {
                return Err(CmdError::Assertion(
                    "formula too wide for exhaustive verification".into(),
                ))
            }
        }
    }
    if json {
        emit(&json!({
            "eps": rational_str(&eps),
            "degree": rep.degree,
            "t": rep.t,
            "pieces": rep.num_pieces,
            "piece_degrees": rep.piece_degrees,
            "top_degree": rep.top_degree,
            "amplifier_r": rep.amplifier_r,
            "achieved": achieved.as_ref().map(rational_str),
            "polynomial": serde_json::to_value(rep.poly.to_dump()).unwrap(),
        }));
    } else {
        println!(
            "degree {} with {} pieces (t = {}), error {}",
            rep.degree,
            rep.num_pieces,
            rep.t,
            achieved.map(|a| a.to_string()).unwrap_or_else(|| "unverified".into())
        );
    }
    Ok(())
}

fn single_gate(text: &str, nvars: usize) -> Result<LeafGate, CmdError> {
    let f = parse_formula(text.trim(), nvars).map_err(validation)?;
    if f.size() != 1 || f.gates.len() != 1 {
        return Err(validation("--gate must be a single leaf s-expression"));
    }
    Ok(f.gates[0].clone())
}

fn table_hex(bits: &[bool]) -> String {
    let mut nibbles = Vec::new();
    for chunk in (0..bits.len()).step_by(4) {
        let mut v = 0u8;
        for j in 0..4 {
            if chunk + j < bits.len() && bits[chunk + j] {
                v |= 1 << j;
            }
        }
        nibbles.push(v);
    }
    let s: String =
        nibbles.iter().rev().map(|v| char::from_digit(*v as u32, 16).unwrap()).collect();
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

fn node_json(node: &PNode) -> Value {
    match node {
        PNode::Leaf { output } => json!({ "output": output }),
        PNode::Node { owner, message, zero, one } => {
            let table = match message {
                MessageFn::Table(t) => table_hex(t),
                MessageFn::Func(_) => "<callable>".into(),
            };
            json!({
                "owner": owner,
                "table_hex": table,
                "zero": zero.as_ref().map(|c| node_json(c)),
                "one": one.as_ref().map(|c| node_json(c)),
            })
        }
    }
}

fn tree_json(tree: &ProtocolTree, enumerate: bool) -> Value {
    let mut v = json!({
        "n": tree.n,
        "cost": tree.cost,
        "tree": node_json(&tree.root),
    });
    if enumerate {
        let rects: Vec<Value> = enumerate_leaves(tree)
            .iter()
            .map(|r| {
                json!({
                    "transcript": r.transcript.iter().map(|&b| if b {'1'} else {'0'}).collect::<String>(),
                    "sides": r.side_sets.iter().map(|s| s.iter().map(|v| format!("{v:#x}")).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "output": r.output,
                })
            })
            .collect();
        v["rectangles"] = Value::Array(rects);
    }
    v
}

pub fn protocol(
    gate: &str,
    nvars: usize,
    parties: Option<usize>,
    delta: Option<&str>,
    sample_seed: u64,
    enumerate: bool,
    json_out: bool,
) -> CmdResult {
    let g = single_gate(gate, nvars)?;
    let report = match &g {
        LeafGate::XorMask { .. } => {
            let tree = xor_protocol(&g, nvars).map_err(validation)?;
            tree_json(&tree, enumerate)
        }
        LeafGate::Sym { .. } => {
            let k = parties.unwrap_or(2);
            let tree = sym_nih_protocol(&g, k, nvars).map_err(validation)?;
            tree_json(&tree, enumerate)
        }
        LeafGate::Ltf { .. } => {
            let delta = match delta {
                Some(d) => parse_rational(d)?,
                None => BigRational::new(BigInt::from(1), BigInt::from(8)),
            };
            let rp = ltf_randomized_protocol(&g, nvars, &delta).map_err(validation)?;
            let mut rng = task_rng(sample_seed, Stream::ProtocolSample, 0);
            let tree = rp.sample_with_rng(&mut rng);
            let mut v = tree_json(&tree, enumerate);
            v["randomized"] = json!({
                "randomness_bits": rp.randomness_bits,
                "error_bound": rational_str(&rp.error_bound),
                "cost_bound": rp.cost,
                "sample_seed": sample_seed,
            });
            v
        }
        LeafGate::Table { .. } => {
            let tree = trivial_protocol(&g, nvars);
            tree_json(&tree, enumerate)
        }
    };
    if json_out {
        emit(&report);
    } else {
        println!("{report}");
    }
    Ok(())
}

pub fn sat(
    file: &str,
    nvars: usize,
    mode: &str,
    nprime: Option<usize>,
    c: Option<f64>,
    seed: u64,
    confidence: f64,
    json: bool,
) -> CmdResult {
    let f = load_formula(file, nvars)?;
    let device = LeafDevice::new(f);
    let report = match mode {
        "brute" => {
            let start = std::time::Instant::now();
            let count = count_sat_bruteforce(&device).map_err(validation)?;
            json!({
                "count": count,
                "mode": "brute",
                "wall_ms": start.elapsed().as_millis() as u64,
            })
        }
        "fast" => {
            let mut opts = FastOptions { nprime, ..Default::default() };
            if let Some(c) = c {
                opts.c = c;
            }
            let rep = count_sat_fast(&device, &opts).map_err(validation)?;
            json!({
                "count": rep.count,
                "mode": "fast",
                "m": rep.m_terms.to_string(),
                "nprime": rep.nprime,
                "degree": rep.degree,
                "wall_ms": rep.wall_ms as u64,
                "backend": rep.backend,
            })
        }
        "rand" => {
            let mut opts = RandomizedOptions { nprime, seed, confidence, ..Default::default() };
            if let Some(c) = c {
                opts.c = c;
            }
            let rep = count_sat_randomized(&device, &opts).map_err(validation)?;
            json!({
                "count": rep.count,
                "mode": "rand",
                "m": rep.m_terms.to_string(),
                "nprime": rep.nprime,
                "degree": rep.degree,
                "wall_ms": rep.wall_ms as u64,
                "backend": rep.backend,
                "confidence": confidence,
                "seed": seed,
            })
        }
        other => return Err(validation(format!("unknown mode `{other}`"))),
    };
    if json {
        emit(&report);
    } else {
        println!("count = {}", report["count"]);
    }
    Ok(())
}

pub struct PrgArgs {
    pub kind: String,
    pub n: Option<usize>,
    pub delta: Option<String>,
    pub k: Option<usize>,
    pub dprime: Option<usize>,
    pub m: Option<usize>,
    pub t: Option<usize>,
    pub test_against: Option<String>,
    pub test_nvars: Option<usize>,
    pub seed: u64,
    pub json: bool,
}

pub fn prg(args: PrgArgs) -> CmdResult {
    let need = |opt: Option<usize>, name: &str| {
        opt.ok_or_else(|| validation(format!("--{name} is required for this kind")))
    };
    let generator = match args.kind.as_str() {
        "smallbias" => {
            let n = need(args.n, "n")?;
            let delta = parse_rational(args.delta.as_deref().unwrap_or("1/8"))?;
            let l = leafcomm::prg::field_bits_for(n as u64, &delta).map_err(validation)?;
            Generator::SmallBias { n, field_bits: l }
        }
        "inw" => {
            let n = need(args.n, "n")?;
            let k = need(args.k, "k")?;
            let dprime = need(args.dprime, "dprime")?;
            let delta = parse_rational(args.delta.as_deref().unwrap_or("1/2"))?;
            Generator::Inw(inw_config(n, k, dprime, delta).map_err(validation)?)
        }
        "gip" => {
            let m = need(args.m, "m")?;
            let t = need(args.t, "t")?;
            let k = need(args.k, "k")?;
            Generator::GipStretch { m, t, k }
        }
        other => return Err(validation(format!("unknown generator kind `{other}`"))),
    };
    let mut report = json!({
        "kind": args.kind,
        "seed_len": generator.seed_len(),
        "out_len": generator.out_len(),
    });
    if let Some(path) = &args.test_against {
        let nvars = args
            .test_nvars
            .ok_or_else(|| validation("--test-nvars is required with --test-against"))?;
        if nvars != generator.out_len() {
            return Err(validation(format!(
                "test formula has {nvars} vars but the generator outputs {}",
                generator.out_len()
            )));
        }
        let f = load_formula(path, nvars)?;
        let gap = fooling_gap(&generator, &move |x| f.eval(x), args.seed).map_err(validation)?;
        report["fooling_gap"] = match gap {
            FoolingGap::Exact(g) => json!({ "exact": rational_str(&g) }),
            FoolingGap::Sampled { gap, half_width, samples } => json!({
                "estimate": gap,
                "half_width_99": half_width,
                "samples": samples,
            }),
        };
    }
    if args.json {
        emit(&report);
    } else {
        println!("{report}");
    }
    Ok(())
}

fn load_dist(path: Option<&str>, nvars: usize) -> Result<Dist, CmdError> {
    match path {
        None => Ok(Dist::Uniform),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| validation(format!("{p}: {e}")))?;
            let entries: Vec<String> =
                serde_json::from_str(&text).map_err(|e| validation(format!("{p}: {e}")))?;
            let weights = entries
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>, _>>()?;
            let d = Dist::Table(weights);
            d.validate(nvars).map_err(validation)?;
            Ok(d)
        }
    }
}

pub fn corr(f: &str, g: &str, nvars: usize, dist: Option<&str>, json: bool) -> CmdResult {
    let ff = load_formula(f, nvars)?;
    let gf = load_formula(g, nvars)?;
    let dist = load_dist(dist, nvars)?;
    let rep =
        correlation(&|x| ff.eval(x), &|x| gf.eval(x), nvars, &dist).map_err(validation)?;
    let out = json!({
        "correlation": rational_str(&rep.correlation),
        "agreement": rational_str(&rep.agreement),
    });
    if json {
        emit(&out);
    } else {
        println!("correlation {} agreement {}", rep.correlation, rep.agreement);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn lbcalc(
    kind: &str,
    n: u64,
    s: Option<u64>,
    m: Option<u64>,
    k: Option<u32>,
    eps: &str,
    r: Option<&str>,
    c: f64,
    json: bool,
) -> CmdResult {
    let eps = parse_rational(eps)?;
    let r_cost = match r {
        Some(x) => parse_rational(x)?,
        None => BigRational::from(BigInt::from(1)),
    };
    let need_s = || s.ok_or_else(|| validation("--s is required for this kind"));
    let report = match kind {
        "gip-size" => {
            let k = k.unwrap_or(2);
            let v = lb_size_bound(n, k, &eps, &r_cost);
            json!({
                "kind": "gip-size",
                "formula": "n^2 / (k^2 · 16^k · (R + log2 n)^2 · log2^2(1/eps))",
                "value": rational_str(&v),
                "value_f64": v.to_f64(),
                "note": "constant 1; up to constants",
            })
        }
        "seed-xor" | "seed-ltf" | "seed-sym" | "seed-nih" | "seed-nof" => {
            let model = match kind {
                "seed-xor" => SeedLengthModel::FormulaXor { n, s: need_s()?, eps },
                "seed-ltf" => SeedLengthModel::FormulaLtf {
                    n,
                    m: m.ok_or_else(|| validation("--m is required for seed-ltf"))?,
                    eps,
                },
                "seed-sym" => SeedLengthModel::FormulaSym { n, s: need_s()?, eps },
                "seed-nih" => SeedLengthModel::FormulaNih {
                    n,
                    s: need_s()?,
                    eps,
                    k: k.unwrap_or(2) as u64,
                    r_cost,
                },
                _ => SeedLengthModel::FormulaNof {
                    n,
                    s: need_s()?,
                    eps,
                    k: k.unwrap_or(2),
                    r_cost,
                },
            };
            let rep = seed_length_report(&model, c).map_err(validation)?;
            json!({
                "kind": kind,
                "model": rep.model,
                "formula": rep.formula,
                "constant_c": rep.constant_c,
                "theory": rational_str(&rep.theory),
                "theory_f64": rep.theory.to_f64(),
                "implemented_seed_len": rep.implemented,
                "note": "constant c explicit; q16 fixed-point logs; up to constants",
            })
        }
        other => return Err(validation(format!("unknown calculator `{other}`"))),
    };
    if json {
        emit(&report);
    } else {
        println!("{report}");
    }
    Ok(())
}

pub fn learn(
    target: &str,
    n: usize,
    s: usize,
    eps: f64,
    delta: f64,
    seed: u64,
    json: bool,
) -> CmdResult {
    if !(0.0..1.0).contains(&eps) || !(0.0..1.0).contains(&delta) {
        return Err(validation("eps and delta must lie in (0, 1)"));
    }
    let f = load_formula(target, n)?;
    let target_fn = std::sync::Arc::new(move |x: u64| f.eval(x));
    let mut oracle =
        ExampleOracle::uniform(n, target_fn, task_rng(seed, Stream::LearnerExamples, 0));
    let rep = pac_learn_formula_xor(&mut oracle, s, eps, delta).map_err(validation)?;
    let out = json!({
        "rounds": rep.rounds,
        "training_error": rational_str(&rep.training_error),
        "holdout_error": rational_str(&rep.holdout_error),
        "floor_violations": rep.floor_violations.len(),
        "hypothesis": serde_json::to_value(rep.hypothesis.to_dump()).unwrap(),
    });
    if json {
        emit(&out);
    } else {
        println!(
            "rounds {} training {} holdout {}",
            rep.rounds, rep.training_error, rep.holdout_error
        );
    }
    Ok(())
}
