//! Terms over the generator basis.
//!
//! Concrete syntax, loosest to tightest: `t \/ t`, `t /\ t`, `t (+)[b] t`,
//! then atoms `x1`, `chi[a](t)`, `mu[a](t)`, `name(t, ..., t)` and `(t)`.
//! All binary operators associate to the left.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::basis::{
    chi_value, interior_tuples, mu_value, non_top_indices, nonzero_indices, oplus_value,
};
use crate::error::{Error, Result};
use crate::lattice::{Elem, Lattice};
use crate::limits::SizeLimits;
use crate::table::{for_each_tuple, FnTable};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// Projection onto coordinate `i`, counted from 1.
    Var(usize),
    Meet(Box<Term>, Box<Term>),
    Join(Box<Term>, Box<Term>),
    Chi(Elem, Box<Term>),
    Mu(Elem, Box<Term>),
    Oplus(Elem, Box<Term>, Box<Term>),
    /// Application of a registered external function.
    Ext(String, Vec<Term>),
}

impl Term {
    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn meet(a: Term, b: Term) -> Term {
        Term::Meet(Box::new(a), Box::new(b))
    }

    pub fn join(a: Term, b: Term) -> Term {
        Term::Join(Box::new(a), Box::new(b))
    }

    pub fn chi(a: Elem, t: Term) -> Term {
        Term::Chi(a, Box::new(t))
    }

    pub fn mu(a: Elem, t: Term) -> Term {
        Term::Mu(a, Box::new(t))
    }

    pub fn oplus(b: Elem, x: Term, y: Term) -> Term {
        Term::Oplus(b, Box::new(x), Box::new(y))
    }

    pub fn ext(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Ext(name.into(), args)
    }

    /// Largest variable position, 0 for a variable-free term.
    pub fn max_var(&self) -> usize {
        match self {
            Term::Var(i) => *i,
            Term::Meet(a, b) | Term::Join(a, b) | Term::Oplus(_, a, b) => {
                a.max_var().max(b.max_var())
            }
            Term::Chi(_, t) | Term::Mu(_, t) => t.max_var(),
            Term::Ext(_, args) => args.iter().map(Term::max_var).max().unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        1 + match self {
            Term::Var(_) => 0,
            Term::Meet(a, b) | Term::Join(a, b) | Term::Oplus(_, a, b) => a.size() + b.size(),
            Term::Chi(_, t) | Term::Mu(_, t) => t.size(),
            Term::Ext(_, args) => args.iter().map(Term::size).sum(),
        }
    }

    /// Operands of a left-nested chain of joins, in order.
    pub fn joinands(&self) -> Vec<&Term> {
        match self {
            Term::Join(a, b) => {
                let mut out = a.joinands();
                out.push(b);
                out
            }
            t => vec![t],
        }
    }

    /// Operands of a left-nested chain of meets, in order.
    pub fn meetands(&self) -> Vec<&Term> {
        match self {
            Term::Meet(a, b) => {
                let mut out = a.meetands();
                out.push(b);
                out
            }
            t => vec![t],
        }
    }

    pub fn display<'a>(&'a self, lattice: &'a Lattice) -> TermDisplay<'a> {
        TermDisplay {
            term: self,
            lattice,
        }
    }
}

/// Named external functions available to [`Term::Ext`].
#[derive(Debug, Clone, Default)]
pub struct ExtRegistry {
    functions: BTreeMap<String, FnTable>,
}

impl ExtRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: impl Into<String>, table: FnTable) -> Result<()> {
        let name = name.into();
        if self.functions.contains_key(&name) {
            return Err(Error::DuplicateExternal(name));
        }
        self.functions.insert(name, table);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&FnTable> {
        self.functions
            .get(name)
            .ok_or_else(|| Error::UnknownExternal(name.to_string()))
    }
}

fn check_elem(l: &Lattice, e: Elem) -> Result<Elem> {
    if l.contains(e) {
        Ok(e)
    } else {
        Err(Error::InvalidElement(e.index()))
    }
}

fn lookup_ext<'r>(
    reg: &'r ExtRegistry,
    l: &Lattice,
    name: &str,
    argc: usize,
) -> Result<&'r FnTable> {
    let table = reg.get(name)?;
    if table.arity() != argc {
        return Err(Error::ArityMismatch {
            expected: table.arity(),
            got: argc,
        });
    }
    if **table.lattice() != *l {
        return Err(Error::LatticeMismatch);
    }
    Ok(table)
}

/// Evaluates `t` at the point `env`.
pub fn eval(t: &Term, l: &Lattice, env: &[Elem], reg: &ExtRegistry) -> Result<Elem> {
    Ok(match t {
        Term::Var(i) => {
            let v = *env
                .get(i.wrapping_sub(1))
                .ok_or(Error::UnboundVariable(*i))?;
            check_elem(l, v)?
        }
        Term::Meet(a, b) => l.meet(eval(a, l, env, reg)?, eval(b, l, env, reg)?),
        Term::Join(a, b) => l.join(eval(a, l, env, reg)?, eval(b, l, env, reg)?),
        Term::Chi(a, x) => chi_value(l, check_elem(l, *a)?, eval(x, l, env, reg)?),
        Term::Mu(a, x) => mu_value(l, check_elem(l, *a)?, eval(x, l, env, reg)?),
        Term::Oplus(b, x, y) => oplus_value(
            l,
            check_elem(l, *b)?,
            eval(x, l, env, reg)?,
            eval(y, l, env, reg)?,
        ),
        Term::Ext(name, args) => {
            let table = lookup_ext(reg, l, name, args.len())?;
            let vals = args
                .iter()
                .map(|a| eval(a, l, env, reg))
                .collect::<Result<Vec<_>>>()?;
            table.apply(&vals)?
        }
    })
}

/// Tabulates `t` as an `arity`-ary function.
pub fn term_to_table(
    t: &Term,
    lattice: &Arc<Lattice>,
    arity: usize,
    reg: &ExtRegistry,
) -> Result<FnTable> {
    if arity == 0 {
        return Err(Error::ArityTooSmall { min: 1, got: 0 });
    }
    if t.max_var() > arity {
        return Err(Error::UnboundVariable(t.max_var()));
    }
    let len = SizeLimits::default().table_len(lattice.size(), arity)?;
    let values = compile(t, lattice, arity, len, reg)?;
    FnTable::new(lattice.clone(), arity, values)
}

// Bottom-up compilation: every subterm becomes a full value column.
fn compile(
    t: &Term,
    l: &Lattice,
    arity: usize,
    len: usize,
    reg: &ExtRegistry,
) -> Result<Vec<Elem>> {
    let zip = |a: &Term, b: &Term, op: &dyn Fn(Elem, Elem) -> Elem| -> Result<Vec<Elem>> {
        let (va, vb) = (
            compile(a, l, arity, len, reg)?,
            compile(b, l, arity, len, reg)?,
        );
        Ok(va.into_iter().zip(vb).map(|(x, y)| op(x, y)).collect())
    };
    Ok(match t {
        Term::Var(i) => {
            if *i == 0 || *i > arity {
                return Err(Error::UnboundVariable(*i));
            }
            let mut col = Vec::with_capacity(len);
            for_each_tuple(l.size(), arity, |_, tuple| col.push(tuple[i - 1]));
            col
        }
        Term::Meet(a, b) => zip(a, b, &|x, y| l.meet(x, y))?,
        Term::Join(a, b) => zip(a, b, &|x, y| l.join(x, y))?,
        Term::Oplus(b, x, y) => {
            let b = check_elem(l, *b)?;
            zip(x, y, &|u, v| oplus_value(l, b, u, v))?
        }
        Term::Chi(a, x) => {
            let a = check_elem(l, *a)?;
            compile(x, l, arity, len, reg)?
                .into_iter()
                .map(|v| chi_value(l, a, v))
                .collect()
        }
        Term::Mu(a, x) => {
            let a = check_elem(l, *a)?;
            compile(x, l, arity, len, reg)?
                .into_iter()
                .map(|v| mu_value(l, a, v))
                .collect()
        }
        Term::Ext(name, args) => {
            let table = lookup_ext(reg, l, name, args.len())?;
            let cols = args
                .iter()
                .map(|a| compile(a, l, arity, len, reg))
                .collect::<Result<Vec<_>>>()?;
            let size = l.size();
            (0..len)
                .map(|c| {
                    let code = cols
                        .iter()
                        .fold(0usize, |acc, col| acc * size + col[c].index());
                    table.value_at(code)
                })
                .collect()
        }
    })
}

// ---------------------------------------------------------------------------
// Synthesis

/// `x1 (+)[b] x2 (+)[b] ... (+)[b] xn`; a single variable folds as `x1 (+)[b] x1`.
pub fn fold_term(b: Elem, arity: usize) -> Term {
    if arity == 1 {
        return Term::oplus(b, Term::var(1), Term::var(1));
    }
    (2..=arity).fold(Term::var(1), |acc, i| Term::oplus(b, acc, Term::var(i)))
}

/// The term for `h_a`: meet of `chi[a_i](x_i)` over non-bottom `a_i`, met
/// with the fold of `(+)[f(a)]`.
pub fn h_term(f: &FnTable, a: &[Elem]) -> Result<Term> {
    let l = f.lattice();
    let fa = f.apply(a)?;
    let gate = nonzero_indices(l, a)
        .positions()
        .iter()
        .map(|&i| Term::chi(a[i - 1], Term::var(i)))
        .reduce(Term::meet)
        .ok_or(Error::InvalidIndexTuple)?;
    Ok(Term::meet(gate, fold_term(fa, f.arity())))
}

/// The term for `g_a`: join of `mu[a_i](x_i)` over non-top `a_i`, joined
/// with the fold of `(+)[f(a)]`.
pub fn g_term(f: &FnTable, a: &[Elem]) -> Result<Term> {
    let l = f.lattice();
    let fa = f.apply(a)?;
    let gate = non_top_indices(l, a)
        .positions()
        .iter()
        .map(|&i| Term::mu(a[i - 1], Term::var(i)))
        .reduce(Term::join)
        .ok_or(Error::InvalidIndexTuple)?;
    Ok(Term::join(gate, fold_term(fa, f.arity())))
}

/// `(a, h_a term)` for every `a` in `L^n_*`, ascending.
pub fn synthesize_parts(f: &FnTable) -> Result<Vec<(Vec<Elem>, Term)>> {
    if !f.is_aggregation() {
        return Err(Error::NotAggregation);
    }
    interior_tuples(f.lattice(), f.arity())
        .into_iter()
        .map(|a| h_term(f, &a).map(|t| (a, t)))
        .collect()
}

/// `(a, g_a term)` for every `a` in `L^n_*`, ascending.
pub fn synthesize_dual_parts(f: &FnTable) -> Result<Vec<(Vec<Elem>, Term)>> {
    if !f.is_aggregation() {
        return Err(Error::NotAggregation);
    }
    interior_tuples(f.lattice(), f.arity())
        .into_iter()
        .map(|a| g_term(f, &a).map(|t| (a, t)))
        .collect()
}

/// A term over meet, join, `chi` and `(+)` whose table is `f`: the join of
/// the `h_a` terms. When `L^n_*` is empty the answer is `x1`.
pub fn synthesize(f: &FnTable) -> Result<Term> {
    Ok(synthesize_parts(f)?
        .into_iter()
        .map(|(_, t)| t)
        .reduce(Term::join)
        .unwrap_or(Term::Var(1)))
}

/// Meet of the `g_a` terms, using `mu` instead of `chi`.
pub fn synthesize_dual(f: &FnTable) -> Result<Term> {
    Ok(synthesize_dual_parts(f)?
        .into_iter()
        .map(|(_, t)| t)
        .reduce(Term::meet)
        .unwrap_or(Term::Var(1)))
}

/// Swaps meet/join and chi/mu; element parameters are mapped by `elem`.
pub fn dualize_term(t: &Term, elem: &dyn Fn(Elem) -> Elem) -> Term {
    let d = |x: &Term| dualize_term(x, elem);
    match t {
        Term::Var(i) => Term::Var(*i),
        Term::Meet(a, b) => Term::join(d(a), d(b)),
        Term::Join(a, b) => Term::meet(d(a), d(b)),
        Term::Chi(a, x) => Term::mu(elem(*a), d(x)),
        Term::Mu(a, x) => Term::chi(elem(*a), d(x)),
        Term::Oplus(b, x, y) => Term::oplus(elem(*b), d(x), d(y)),
        Term::Ext(n, args) => Term::Ext(n.clone(), args.iter().map(d).collect()),
    }
}

// ---------------------------------------------------------------------------
// Printing

pub struct TermDisplay<'a> {
    term: &'a Term,
    lattice: &'a Lattice,
}

fn is_binary(t: &Term) -> bool {
    matches!(t, Term::Meet(..) | Term::Join(..) | Term::Oplus(..))
}

fn same_operator(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::Meet(..), Term::Meet(..)) | (Term::Join(..), Term::Join(..)) => true,
        (Term::Oplus(x, ..), Term::Oplus(y, ..)) => x == y,
        _ => false,
    }
}

impl TermDisplay<'_> {
    fn write(&self, t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |e: &Elem| -> &str {
            if self.lattice.contains(*e) {
                self.lattice.name_of(*e)
            } else {
                "?"
            }
        };
        // A binary operand is bare only as the left operand of the same
        // operator, which is exactly where left associativity puts it.
        let operand = |parent: &Term, child: &Term, left: bool, f: &mut fmt::Formatter<'_>| {
            if is_binary(child) && !(left && same_operator(parent, child)) {
                f.write_str("(")?;
                self.write(child, f)?;
                f.write_str(")")
            } else {
                self.write(child, f)
            }
        };
        match t {
            Term::Var(i) => write!(f, "x{i}"),
            Term::Meet(a, b) => {
                operand(t, a, true, f)?;
                f.write_str(" /\\ ")?;
                operand(t, b, false, f)
            }
            Term::Join(a, b) => {
                operand(t, a, true, f)?;
                f.write_str(" \\/ ")?;
                operand(t, b, false, f)
            }
            Term::Oplus(e, a, b) => {
                operand(t, a, true, f)?;
                write!(f, " (+)[{}] ", name(e))?;
                operand(t, b, false, f)
            }
            Term::Chi(e, x) => {
                write!(f, "chi[{}](", name(e))?;
                self.write(x, f)?;
                f.write_str(")")
            }
            Term::Mu(e, x) => {
                write!(f, "mu[{}](", name(e))?;
                self.write(x, f)?;
                f.write_str(")")
            }
            Term::Ext(n, args) => {
                write!(f, "{n}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    self.write(a, f)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.term, f)
    }
}

/// Canonical text of `t`.
pub fn print(t: &Term, lattice: &Lattice) -> String {
    t.display(lattice).to_string()
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    MeetOp,
    JoinOp,
    OplusOp,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::MeetOp => f.write_str("`/\\`"),
            Tok::JoinOp => f.write_str("`\\/`"),
            Tok::OplusOp => f.write_str("`(+)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let (tok, width) = match c {
            '/' if chars.get(i + 1) == Some(&'\\') => (Tok::MeetOp, 2),
            '\\' if chars.get(i + 1) == Some(&'/') => (Tok::JoinOp, 2),
            '(' if chars.get(i + 1) == Some(&'+') && chars.get(i + 2) == Some(&')') => {
                (Tok::OplusOp, 3)
            }
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                (Tok::Word(chars[start..j].iter().collect()), j - start)
            }
            other => return Err(syntax(line, col, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned {
            tok,
            line,
            column: col,
        });
        i += width;
        col += width;
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    lattice: &'a Lattice,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> Error {
        let s = &self.toks[self.pos];
        syntax(s.line, s.column, message)
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn element(&mut self) -> Result<Elem> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.bump();
                self.lattice.elem_or_err(&w)
            }
            other => Err(self.error_here(format!("expected element name, found {other}"))),
        }
    }

    fn bracketed_element(&mut self) -> Result<Elem> {
        self.expect(Tok::LBracket)?;
        let e = self.element()?;
        self.expect(Tok::RBracket)?;
        Ok(e)
    }

    fn term(&mut self) -> Result<Term> {
        let mut acc = self.meet_level()?;
        while *self.peek() == Tok::JoinOp {
            self.bump();
            acc = Term::join(acc, self.meet_level()?);
        }
        Ok(acc)
    }

    fn meet_level(&mut self) -> Result<Term> {
        let mut acc = self.oplus_level()?;
        while *self.peek() == Tok::MeetOp {
            self.bump();
            acc = Term::meet(acc, self.oplus_level()?);
        }
        Ok(acc)
    }

    fn oplus_level(&mut self) -> Result<Term> {
        let mut acc = self.atom()?;
        while *self.peek() == Tok::OplusOp {
            self.bump();
            let b = self.bracketed_element()?;
            acc = Term::oplus(b, acc, self.atom()?);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Word(w) => {
                let next = self.peek_at(1).clone();
                if (w == "chi" || w == "mu") && next == Tok::LBracket {
                    self.bump();
                    let a = self.bracketed_element()?;
                    self.expect(Tok::LParen)?;
                    let arg = self.term()?;
                    self.expect(Tok::RParen)?;
                    return Ok(if w == "chi" {
                        Term::chi(a, arg)
                    } else {
                        Term::mu(a, arg)
                    });
                }
                if next == Tok::LParen {
                    if !w.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
                        return Err(self.error_here(format!("`{w}` is not a function name")));
                    }
                    self.bump();
                    self.bump();
                    let mut args = vec![self.term()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen)?;
                    return Ok(Term::Ext(w, args));
                }
                match w.strip_prefix('x').map(|d| (d, d.parse::<usize>())) {
                    Some((digits, Ok(i)))
                        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) =>
                    {
                        if i == 0 {
                            return Err(self.error_here("variables are numbered from x1"));
                        }
                        self.bump();
                        Ok(Term::Var(i))
                    }
                    _ => Err(self.error_here(format!("expected a term, found `{w}`"))),
                }
            }
            other => Err(self.error_here(format!("expected a term, found {other}"))),
        }
    }
}

/// Parses a term; element names are resolved against `lattice`.
pub fn parse(text: &str, lattice: &Lattice) -> Result<Term> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        lattice,
    };
    let t = p.term()?;
    if *p.peek() != Tok::End {
        return Err(p.error_here(format!("unexpected {}", p.peek())));
    }
    Ok(t)
}
