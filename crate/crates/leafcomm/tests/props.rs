//! Property tests for the structural invariants.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use leafcomm::formula::{decompose, parse_formula, random_formula, GateClass};
use leafcomm::polynomial::{convert_basis, Basis, MultilinearPoly};

/// Minimal independent interpreter of the formula grammar, used as a second
/// route for evaluation semantics.  It never touches the library's parser
/// internals: plain token walking over the s-expression text.
mod interp {
    pub fn eval(text: &str, n: usize, x: u64) -> bool {
        let tokens: Vec<String> = text
            .replace('(', " ( ")
            .replace(')', " ) ")
            .split_whitespace()
            .map(|s| s.to_string())
            .collect();
        let (v, rest) = eval_expr(&tokens, n, x);
        assert!(rest.is_empty(), "trailing tokens");
        v
    }

    fn eval_expr<'a>(tokens: &'a [String], n: usize, x: u64) -> (bool, &'a [String]) {
        assert_eq!(tokens[0], "(");
        let head = tokens[1].as_str();
        match head {
            "and" | "or" => {
                let (a, rest) = eval_expr(&tokens[2..], n, x);
                let (b, rest) = eval_expr(rest, n, x);
                assert_eq!(rest[0], ")");
                (if head == "and" { a && b } else { a || b }, &rest[1..])
            }
            "not" => {
                let (a, rest) = eval_expr(&tokens[2..], n, x);
                assert_eq!(rest[0], ")");
                (!a, &rest[1..])
            }
            "var" => {
                let k: usize = tokens[2].parse().unwrap();
                assert_eq!(tokens[3], ")");
                (x >> (k - 1) & 1 == 1, &tokens[4..])
            }
            "xor" | "nxor" => {
                let mut acc = head == "nxor";
                let mut i = 2;
                while tokens[i] != ")" {
                    let k: usize = tokens[i].parse().unwrap();
                    acc ^= x >> (k - 1) & 1 == 1;
                    i += 1;
                }
                (acc, &tokens[i + 1..])
            }
            "ltf" => {
                assert_eq!(tokens[2], "(");
                let mut sum: i64 = 0;
                let mut i = 3;
                let mut idx = 0;
                while tokens[i] != ")" {
                    let w: i64 = tokens[i].parse().unwrap();
                    if x >> idx & 1 == 1 {
                        sum += w;
                    }
                    idx += 1;
                    i += 1;
                }
                let theta: i64 = tokens[i + 1].parse().unwrap();
                assert_eq!(tokens[i + 2], ")");
                (sum >= theta, &tokens[i + 3..])
            }
            "sym" => {
                let mut spectrum = Vec::new();
                let mut i = 2;
                while tokens[i] != ")" {
                    spectrum.push(tokens[i] == "1");
                    i += 1;
                }
                let w = (x & ((1u64 << n) - 1)).count_ones() as usize;
                (spectrum[w], &tokens[i + 1..])
            }
            "table" => {
                let hex = &tokens[2];
                assert_eq!(tokens[3], ")");
                let mut bits = vec![false; 1 << n];
                for (pos, ch) in hex.chars().rev().enumerate() {
                    let v = ch.to_digit(16).unwrap();
                    for j in 0..4 {
                        if v >> j & 1 == 1 {
                            bits[pos * 4 + j] = true;
                        }
                    }
                }
                (bits[x as usize], &tokens[4..])
            }
            other => panic!("unknown head {other}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// parse(unparse(f)) reproduces the formula structurally, and the
    /// library evaluator agrees with the independent interpreter.
    #[test]
    fn parse_unparse_and_eval_agree(seed in 0u64..5000, n in 2usize..7, s in 1usize..12) {
        for class in [GateClass::Var, GateClass::Xor, GateClass::Ltf, GateClass::Sym] {
            let f = random_formula(n, s, class, seed);
            let text = f.unparse();
            let g = parse_formula(&text, n).unwrap();
            prop_assert_eq!(&g, &f);
            for x in 0..1u64 << n {
                prop_assert_eq!(f.eval(x), interp::eval(&text, n, x), "x = {:#b}", x);
            }
        }
    }

    /// Decomposition invariants: piece count, piece size, recomposition.
    #[test]
    fn decompose_invariants(seed in 0u64..5000, n in 2usize..8, s in 1usize..32, t_off in 0usize..3) {
        let f = random_formula(n, s, GateClass::Xor, seed);
        let tmax = s;
        let t = (ceil_sqrt(s) + t_off).min(tmax).max(1);
        let tree = decompose(&f, t).unwrap();
        prop_assert!(tree.pieces.len() <= s.div_ceil(t) + 1);
        for p in &tree.pieces {
            prop_assert!(p.size() <= 2 * t);
        }
        let rec = tree.recompose();
        for x in 0..1u64 << n {
            prop_assert_eq!(f.eval(x), rec.eval_with(&|&g| f.gates[g].eval(x, n)));
        }
    }

    /// Basis conversion is an involution and preserves the function under
    /// the 0 ↔ +1, 1 ↔ −1 correspondence.
    #[test]
    fn convert_basis_involution(masks in proptest::collection::vec(0u64..64, 1..6),
                                nums in proptest::collection::vec(-20i64..20, 1..6),
                                dens in proptest::collection::vec(1i64..9, 1..6)) {
        let mut p = MultilinearPoly::zero(Basis::PlusMinus, 6);
        for ((m, a), b) in masks.iter().zip(&nums).zip(&dens) {
            p.add_term(*m, BigRational::new(BigInt::from(*a), BigInt::from(*b)));
        }
        let q = convert_basis(&p);
        let back = convert_basis(&q);
        prop_assert_eq!(&back, &p);
        for x in 0..64u64 {
            prop_assert_eq!(p.eval(x), q.eval(x));
        }
    }
}

fn ceil_sqrt(s: usize) -> usize {
    let mut t = (s as f64).sqrt() as usize;
    while t * t < s {
        t += 1;
    }
    while t > 1 && (t - 1) * (t - 1) >= s {
        t -= 1;
    }
    t
}
