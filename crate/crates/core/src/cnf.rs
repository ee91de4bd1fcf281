//! DIMACS CNF formulas and exhaustive model counting.

use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};

/// Largest variable count accepted by [`CnfFormula::count_satisfying`].
pub const COUNT_MAX_VARS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MissingProblemLine,
    DuplicateProblemLine,
    MalformedProblemLine(String),
    ClauseBeforeProblemLine,
    InvalidToken(String),
    LiteralOutOfRange { literal: i64, num_vars: usize },
    ClauseCountMismatch { declared: usize, found: usize },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MissingProblemLine => write!(f, "missing `p cnf <vars> <clauses>` line"),
            Self::DuplicateProblemLine => write!(f, "duplicate problem line"),
            Self::MalformedProblemLine(s) => write!(f, "malformed problem line `{s}`"),
            Self::ClauseBeforeProblemLine => write!(f, "clause before the problem line"),
            Self::InvalidToken(t) => write!(f, "invalid token `{t}`"),
            Self::LiteralOutOfRange { literal, num_vars } => {
                write!(f, "literal {literal} out of range for {num_vars} variables")
            }
            Self::ClauseCountMismatch { declared, found } => {
                write!(f, "problem line declares {declared} clauses, found {found}")
            }
        }
    }
}

/// Conjunction of clauses over variables `1..=num_vars`; an empty clause
/// list is the constant-true formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
    /// Per clause `(positive, negative)` bit masks; bit `n - k` is `x_k`.
    masks: Option<Vec<(u64, u64)>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for clause in &clauses {
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(Error::param(
                        "clauses",
                        format!("literal {lit} invalid for {num_vars} variables"),
                    ));
                }
            }
        }
        Ok(Self::build(num_vars, clauses))
    }

    fn build(num_vars: usize, clauses: Vec<Vec<i32>>) -> Self {
        let masks = (num_vars < 64).then(|| {
            clauses
                .iter()
                .map(|clause| {
                    clause.iter().fold((0u64, 0u64), |(pos, neg), &lit| {
                        let bit = 1u64 << (num_vars - lit.unsigned_abs() as usize);
                        if lit > 0 {
                            (pos | bit, neg)
                        } else {
                            (pos, neg | bit)
                        }
                    })
                })
                .collect()
        });
        Self {
            num_vars,
            clauses,
            masks,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// `assignment[k]` is the value of variable `k + 1`.
    pub fn eval_assignment(&self, assignment: &[bool]) -> Result<bool> {
        if assignment.len() != self.num_vars {
            return Err(Error::param(
                "assignment",
                format!(
                    "length {} does not match {} variables",
                    assignment.len(),
                    self.num_vars
                ),
            ));
        }
        Ok(self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let v = assignment[lit.unsigned_abs() as usize - 1];
                if lit > 0 {
                    v
                } else {
                    !v
                }
            })
        }))
    }

    /// Evaluates the assignment encoded in `index`, with `x_1` the most
    /// significant of `num_vars` bits.
    pub fn eval_index(&self, index: u64) -> bool {
        match &self.masks {
            Some(masks) => masks
                .iter()
                .all(|&(pos, neg)| (index & pos) != 0 || (!index & neg) != 0),
            None => {
                let bits = assignment_from_index(index, self.num_vars);
                self.eval_assignment(&bits).expect("length matches")
            }
        }
    }

    /// Exact number of satisfying assignments by enumeration.
    pub fn count_satisfying(&self) -> Result<u64> {
        if self.num_vars > COUNT_MAX_VARS {
            return Err(Error::param(
                "num_vars",
                format!(
                    "exhaustive counting supports at most {COUNT_MAX_VARS} variables, got {}",
                    self.num_vars
                ),
            ));
        }
        Ok((0..(1u64 << self.num_vars))
            .filter(|&i| self.eval_index(i))
            .count() as u64)
    }

    /// True when every clause contains a complementary pair `x, ¬x`, i.e.
    /// every assignment satisfies the formula. Polynomial time.
    pub fn is_tautology(&self) -> bool {
        self.clauses
            .iter()
            .all(|clause| clause.iter().any(|&lit| clause.contains(&-lit)))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&lit.to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Bits of `index` as an assignment, `x_1` from the most significant bit.
pub fn assignment_from_index(index: u64, num_vars: usize) -> Vec<bool> {
    (1..=num_vars)
        .map(|k| (index >> (num_vars - k)) & 1 == 1)
        .collect()
}

/// Parses DIMACS CNF. Clauses may span lines; a `%` line ends the clause
/// section, as in the SATLIB benchmark files.
pub fn parse_dimacs(text: &str) -> std::result::Result<CnfFormula, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError {
                    line,
                    kind: ParseErrorKind::DuplicateProblemLine,
                });
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let malformed = || ParseError {
                line,
                kind: ParseErrorKind::MalformedProblemLine(trimmed.to_string()),
            };
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(malformed());
            }
            let vars = parts[2].parse::<usize>().map_err(|_| malformed())?;
            let count = parts[3].parse::<usize>().map_err(|_| malformed())?;
            header = Some((vars, count));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(ParseError {
                line,
                kind: ParseErrorKind::ClauseBeforeProblemLine,
            });
        };
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| ParseError {
                line,
                kind: ParseErrorKind::InvalidToken(tok.to_string()),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if lit.unsigned_abs() as usize > num_vars || lit.unsigned_abs() > i32::MAX as u64 {
                return Err(ParseError {
                    line,
                    kind: ParseErrorKind::LiteralOutOfRange {
                        literal: lit,
                        num_vars,
                    },
                });
            }
            current.push(lit as i32);
        }
    }
    let Some((num_vars, declared)) = header else {
        return Err(ParseError {
            line: last_line.max(1),
            kind: ParseErrorKind::MissingProblemLine,
        });
    };
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != declared {
        return Err(ParseError {
            line: last_line.max(1),
            kind: ParseErrorKind::ClauseCountMismatch {
                declared,
                found: clauses.len(),
            },
        });
    }
    Ok(CnfFormula::build(num_vars, clauses))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_files() {
        let f = parse_dimacs("p cnf 2 1\n1 2 0").unwrap();
        assert_eq!(f.num_vars(), 2);
        assert_eq!(f.clauses(), &[vec![1, 2]]);
        let f = parse_dimacs("c comment\np cnf 1 1\n-1 0").unwrap();
        assert_eq!(f.clauses(), &[vec![-1]]);
    }

    #[test]
    fn lenient_layout() {
        let f = parse_dimacs("c x\n\np  cnf 3  2\n 1 -2\n  3 0 -1\n0\n%\n0\n").unwrap();
        assert_eq!(f.clauses(), &[vec![1, -2, 3], vec![-1]]);
        let f = parse_dimacs("p cnf 2 2\n1 0\n0\n").unwrap();
        assert_eq!(f.clauses()[1], Vec::<i32>::new());
        assert_eq!(f.count_satisfying().unwrap(), 0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_dimacs("p cnf 2 2\n1 0").unwrap_err();
        assert_eq!(
            e.kind,
            ParseErrorKind::ClauseCountMismatch {
                declared: 2,
                found: 1
            }
        );
        assert_eq!(e.line, 2);
        let e = parse_dimacs("1 2 0\n").unwrap_err();
        assert_eq!((e.line, e.kind), (1, ParseErrorKind::ClauseBeforeProblemLine));
        let e = parse_dimacs("c only\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingProblemLine);
        let e = parse_dimacs("p cnf 2 1\np cnf 2 1\n").unwrap_err();
        assert_eq!((e.line, e.kind), (2, ParseErrorKind::DuplicateProblemLine));
        let e = parse_dimacs("p cnf 2 1\n1 3 0\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ParseErrorKind::LiteralOutOfRange { literal: 3, .. }));
        let e = parse_dimacs("p cnf 2 1\n1 x 0\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::InvalidToken("x".into()));
        assert!(parse_dimacs("p dnf 2 1\n").is_err());
    }

    #[test]
    fn evaluation_examples() {
        let f = CnfFormula::new(1, vec![vec![1]]).unwrap();
        assert!(f.eval_assignment(&[true]).unwrap());
        let contradiction = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert!(!contradiction.eval_assignment(&[true]).unwrap());
        assert!(!contradiction.eval_assignment(&[false]).unwrap());
        let g = CnfFormula::new(2, vec![vec![1, 2], vec![-1, 2]]).unwrap();
        assert!(!g.eval_assignment(&[true, false]).unwrap());
        assert!(g.eval_assignment(&[true, true]).unwrap());
        assert!(g.eval_assignment(&[true]).is_err());
    }

    #[test]
    fn counting_examples() {
        assert_eq!(CnfFormula::new(3, vec![]).unwrap().count_satisfying().unwrap(), 8);
        let contradiction = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert_eq!(contradiction.count_satisfying().unwrap(), 0);
        let or = CnfFormula::new(2, vec![vec![1, 2]]).unwrap();
        assert_eq!(or.count_satisfying().unwrap(), 3);
        assert!(CnfFormula::new(25, vec![]).unwrap().count_satisfying().is_err());
    }

    #[test]
    fn index_evaluation_matches_assignment_evaluation() {
        let f = CnfFormula::new(4, vec![vec![1, -3], vec![2, 4, -1], vec![-4]]).unwrap();
        for i in 0..16u64 {
            let bits = assignment_from_index(i, 4);
            assert_eq!(f.eval_index(i), f.eval_assignment(&bits).unwrap());
        }
        assert_eq!(assignment_from_index(0b10, 2), vec![true, false]);
    }

    #[test]
    fn tautology_check() {
        assert!(CnfFormula::new(2, vec![]).unwrap().is_tautology());
        assert!(CnfFormula::new(2, vec![vec![1, -1], vec![2, -2, 1]]).unwrap().is_tautology());
        assert!(!CnfFormula::new(2, vec![vec![1, 2]]).unwrap().is_tautology());
    }

    #[test]
    fn rejects_bad_literals() {
        assert!(CnfFormula::new(2, vec![vec![0]]).is_err());
        assert!(CnfFormula::new(2, vec![vec![-3]]).is_err());
    }
}
