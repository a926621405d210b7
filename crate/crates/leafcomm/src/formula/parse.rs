//! S-expression parser for the formula grammar:
//!
//! ```text
//! expr := (and expr expr) | (or expr expr) | (not expr)
//!       | (var K) | (xor K K ...) | (nxor K K ...)
//!       | (ltf (w1 ... wn) theta) | (sym b0 b1 ... bn) | (table HEX)
//! ```
//!
//! Variable indices `K` are 1-based.  Error offsets are 1-based byte
//! positions; end-of-input reports `len + 1`.

use super::{Formula, FormulaError, LeafGate, Node};

pub fn parse_formula(text: &str, num_vars: usize) -> Result<Formula, FormulaError> {
    let mut p = Parser { bytes: text.as_bytes(), pos: 0, num_vars, gates: Vec::new() };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.syntax("trailing input"));
    }
    Ok(Formula::new(root, num_vars, p.gates))
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    num_vars: usize,
    gates: Vec<LeafGate>,
}

impl<'a> Parser<'a> {
    fn syntax(&self, msg: &str) -> FormulaError {
        FormulaError::Syntax { offset: self.pos + 1, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, ch: u8) -> Result<(), FormulaError> {
        self.skip_ws();
        if self.pos < self.bytes.len() && self.bytes[self.pos] == ch {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{}`", ch as char)))
        }
    }

    fn atom(&mut self) -> Result<&'a str, FormulaError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'('
            && self.bytes[self.pos] != b')'
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected atom"));
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos]).unwrap())
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn var_index(&mut self) -> Result<usize, FormulaError> {
        let at = {
            self.skip_ws();
            self.pos
        };
        let a = self.atom()?;
        let k: usize = a.parse().map_err(|_| FormulaError::Syntax {
            offset: at + 1,
            msg: format!("expected variable index, got `{a}`"),
        })?;
        if k == 0 || k > self.num_vars {
            return Err(FormulaError::VarOutOfRange { index: k, nvars: self.num_vars });
        }
        Ok(k - 1)
    }

    fn leaf(&mut self, gate: LeafGate) -> Node<usize> {
        self.gates.push(gate);
        Node::Leaf(self.gates.len() - 1)
    }

    fn expr(&mut self) -> Result<Node<usize>, FormulaError> {
        self.expect(b'(')?;
        let head = self.atom()?.to_string();
        let node = match head.as_str() {
            "and" | "or" => {
                let a = self.expr()?;
                let b = self.expr()?;
                if head == "and" {
                    Node::And(Box::new(a), Box::new(b))
                } else {
                    Node::Or(Box::new(a), Box::new(b))
                }
            }
            "not" => Node::Not(Box::new(self.expr()?)),
            "var" => {
                let i = self.var_index()?;
                self.leaf(LeafGate::var(i))
            }
            "xor" | "nxor" => {
                let mut mask = 0u64;
                while self.peek() != Some(b')') {
                    if self.peek().is_none() {
                        return Err(self.syntax("expected `)`"));
                    }
                    mask |= 1 << self.var_index()?;
                }
                self.leaf(LeafGate::XorMask { mask, negated: head == "nxor" })
            }
            "ltf" => {
                self.expect(b'(')?;
                let mut weights = Vec::new();
                while self.peek() != Some(b')') {
                    if self.peek().is_none() {
                        return Err(self.syntax("expected `)`"));
                    }
                    let at = self.pos;
                    let a = self.atom()?;
                    let w: i64 = a.parse().map_err(|_| FormulaError::Syntax {
                        offset: at + 1,
                        msg: format!("expected integer weight, got `{a}`"),
                    })?;
                    weights.push(w);
                }
                self.expect(b')')?;
                if weights.len() != self.num_vars {
                    return Err(FormulaError::Arity(format!(
                        "ltf expects {} weights, got {}",
                        self.num_vars,
                        weights.len()
                    )));
                }
                let at = self.pos;
                let a = self.atom()?;
                let threshold: i64 = a.parse().map_err(|_| FormulaError::Syntax {
                    offset: at + 1,
                    msg: format!("expected integer threshold, got `{a}`"),
                })?;
                self.leaf(LeafGate::Ltf { weights, threshold })
            }
            "sym" => {
                let mut spectrum = Vec::new();
                while self.peek() != Some(b')') {
                    if self.peek().is_none() {
                        return Err(self.syntax("expected `)`"));
                    }
                    let at = self.pos;
                    match self.atom()? {
                        "0" => spectrum.push(false),
                        "1" => spectrum.push(true),
                        other => {
                            return Err(FormulaError::Syntax {
                                offset: at + 1,
                                msg: format!("expected 0 or 1, got `{other}`"),
                            })
                        }
                    }
                }
                if spectrum.len() != self.num_vars + 1 {
                    return Err(FormulaError::Arity(format!(
                        "sym expects {} spectrum bits, got {}",
                        self.num_vars + 1,
                        spectrum.len()
                    )));
                }
                self.leaf(LeafGate::Sym { spectrum })
            }
            "table" => {
                if self.num_vars > 24 {
                    return Err(FormulaError::TooManyVars { n: self.num_vars, max: 24 });
                }
                let at = {
                    self.skip_ws();
                    self.pos
                };
                let hex = self.atom()?;
                let len = 1usize << self.num_vars;
                let mut bits = vec![false; len];
                for (pos, ch) in hex.chars().rev().enumerate() {
                    let v = ch.to_digit(16).ok_or(FormulaError::Syntax {
                        offset: at + 1,
                        msg: format!("invalid hex digit `{ch}`"),
                    })?;
                    for j in 0..4 {
                        let idx = pos * 4 + j;
                        if v >> j & 1 == 1 {
                            if idx >= len {
                                return Err(FormulaError::Arity(format!(
                                    "table value has bit {idx} set but only {len} entries fit n = {}",
                                    self.num_vars
                                )));
                            }
                            bits[idx] = true;
                        }
                    }
                }
                self.leaf(LeafGate::Table { bits })
            }
            other => return Err(FormulaError::UnknownGate(other.to_string())),
        };
        self.expect(b')')?;
        Ok(node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn grammar_example() {
        let f = parse_formula("(and (xor 1 2) (var 1))", 2).unwrap();
        assert_eq!(f.size(), 2);
        assert_eq!(f.num_vars, 2);
        // AND of parity(x1,x2) and x1: true only on (1,0).
        assert_eq!(f.truth_table().unwrap(), vec![false, true, false, false]);
    }

    #[test]
    fn negated_projection() {
        let f = parse_formula("(not (var 3))", 3).unwrap();
        assert!(f.eval(0b000));
        assert!(!f.eval(0b100));
    }

    #[test]
    fn unbalanced_paren_offset() {
        let err = parse_formula("(and (var 1)", 2).unwrap_err();
        assert_eq!(err, FormulaError::Syntax { offset: 13, msg: "expected `(`".into() });
    }

    #[test]
    fn unknown_gate() {
        let err = parse_formula("(nand (var 1) (var 2))", 2).unwrap_err();
        assert_eq!(err, FormulaError::UnknownGate("nand".into()));
    }

    #[test]
    fn var_out_of_range() {
        let err = parse_formula("(var 3)", 2).unwrap_err();
        assert_eq!(err, FormulaError::VarOutOfRange { index: 3, nvars: 2 });
    }

    #[test]
    fn ltf_sym_table_parse() {
        let f = parse_formula("(ltf (1 1) 2)", 2).unwrap();
        assert_eq!(f.truth_table().unwrap(), vec![false, false, false, true]);
        let f = parse_formula("(sym 1 0 1)", 2).unwrap();
        assert_eq!(f.truth_table().unwrap(), vec![true, false, false, true]);
        let f = parse_formula("(table 6)", 2).unwrap();
        assert_eq!(f.truth_table().unwrap(), vec![false, true, true, false]);
    }

    #[test]
    fn unparse_roundtrip_structural() {
        let texts = [
            "(and (xor 1 2) (var 1))",
            "(or (not (var 2)) (and (nxor) (sym 1 0 0)))",
            "(ltf (2 -1) 0)",
            "(table 9)",
        ];
        for t in texts {
            let f = parse_formula(t, 2).unwrap();
            let g = parse_formula(&f.unparse(), 2).unwrap();
            assert_eq!(f, g, "roundtrip failed for {t}");
        }
    }
}
