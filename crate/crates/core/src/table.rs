//! Explicit function tables `L^n -> L` and the aggregation-function predicate.
//!
//! A tuple `(x_1, ..., x_n)` is stored at the mixed-radix code
//! `sum x_i * |L|^(n - i)` (rightmost coordinate fastest). Because lattice
//! indices form a linear extension of the order, code order is a linear
//! extension of the product order on `L^n`.

use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{dual_elem, Elem, Lattice};
use crate::limits::SizeLimits;

/// Encodes a tuple of elements of an `size`-element lattice.
pub fn encode(tuple: &[Elem], size: usize) -> Result<usize> {
    let mut code = 0usize;
    for &x in tuple {
        if x.index() >= size {
            return Err(Error::InvalidElement(x.index()));
        }
        code = code * size + x.index();
    }
    Ok(code)
}

pub fn decode(code: usize, arity: usize, size: usize) -> Result<Vec<Elem>> {
    let len = (size as u128).pow(arity as u32);
    if code as u128 >= len {
        return Err(Error::IndexOutOfRange {
            index: code,
            size,
            arity,
        });
    }
    let mut out = vec![Elem::new(0); arity];
    let mut rest = code;
    for slot in out.iter_mut().rev() {
        *slot = Elem::new(rest % size);
        rest /= size;
    }
    Ok(out)
}

/// Calls `visit(code, tuple)` for every tuple of `L^arity` in code order.
pub(crate) fn for_each_tuple(size: usize, arity: usize, mut visit: impl FnMut(usize, &[Elem])) {
    let len = size.pow(arity as u32);
    let mut tuple = vec![Elem::new(0); arity];
    for code in 0..len {
        visit(code, &tuple);
        for slot in tuple.iter_mut().rev() {
            if slot.index() + 1 < size {
                *slot = Elem::new(slot.index() + 1);
                break;
            }
            *slot = Elem::new(0);
        }
    }
}

/// Strides of the mixed-radix encoding, coordinate 1 first.
pub(crate) fn strides(size: usize, arity: usize) -> Vec<usize> {
    let mut s = vec![1usize; arity];
    for i in (0..arity.saturating_sub(1)).rev() {
        s[i] = s[i + 1] * size;
    }
    s
}

/// Codes of the immediate predecessors of each tuple in the product order.
fn predecessor_codes(lattice: &Lattice, arity: usize) -> Vec<Vec<usize>> {
    let size = lattice.size();
    let stride = strides(size, arity);
    let mut preds = vec![Vec::new(); size.pow(arity as u32)];
    for_each_tuple(size, arity, |code, tuple| {
        for (i, &x) in tuple.iter().enumerate() {
            for &lc in lattice.lower_covers(x) {
                preds[code].push(code - (x.index() - lc.index()) * stride[i]);
            }
        }
    });
    preds
}

/// An `n`-ary function on a lattice, stored as a flat value array.
#[derive(Clone, Debug)]
pub struct FnTable {
    lattice: Arc<Lattice>,
    arity: usize,
    values: Vec<Elem>,
}

impl PartialEq for FnTable {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity
            && self.values == other.values
            && (Arc::ptr_eq(&self.lattice, &other.lattice) || self.lattice == other.lattice)
    }
}

impl Eq for FnTable {}

impl Hash for FnTable {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.values.hash(state);
    }
}

impl FnTable {
    pub fn new(lattice: Arc<Lattice>, arity: usize, values: Vec<Elem>) -> Result<FnTable> {
        if arity == 0 {
            return Err(Error::ArityTooSmall { min: 1, got: 0 });
        }
        let expected = (lattice.size() as u128).checked_pow(arity as u32);
        if expected != Some(values.len() as u128) {
            return Err(Error::ArityMismatch {
                expected: arity,
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !lattice.contains(**v)) {
            return Err(Error::InvalidElement(bad.index()));
        }
        Ok(FnTable {
            lattice,
            arity,
            values,
        })
    }

    /// Tabulates `f` over `L^arity`, subject to the cell guard.
    pub fn from_fn(
        lattice: Arc<Lattice>,
        arity: usize,
        limits: &SizeLimits,
        mut f: impl FnMut(&[Elem]) -> Elem,
    ) -> Result<FnTable> {
        if arity == 0 {
            return Err(Error::ArityTooSmall { min: 1, got: 0 });
        }
        let len = limits.table_len(lattice.size(), arity)?;
        let mut values = Vec::with_capacity(len);
        for_each_tuple(lattice.size(), arity, |_, t| values.push(f(t)));
        Ok(FnTable {
            lattice,
            arity,
            values,
        })
    }

    pub(crate) fn from_values_unchecked(
        lattice: Arc<Lattice>,
        arity: usize,
        values: Vec<Elem>,
    ) -> FnTable {
        debug_assert_eq!(values.len(), lattice.size().pow(arity as u32));
        FnTable {
            lattice,
            arity,
            values,
        }
    }

    /// The `i`-th `arity`-ary projection, `i` counted from 1.
    pub fn projection(lattice: Arc<Lattice>, arity: usize, i: usize) -> Result<FnTable> {
        if i == 0 || i > arity {
            return Err(Error::UnboundVariable(i));
        }
        FnTable::from_fn(lattice, arity, &SizeLimits::default(), |t| t[i - 1])
    }

    pub fn meet_table(lattice: Arc<Lattice>) -> FnTable {
        let l = lattice.clone();
        FnTable::from_fn(lattice, 2, &SizeLimits::default(), |t| l.meet(t[0], t[1]))
            .expect("binary table exceeds default guard")
    }

    pub fn join_table(lattice: Arc<Lattice>) -> FnTable {
        let l = lattice.clone();
        FnTable::from_fn(lattice, 2, &SizeLimits::default(), |t| l.join(t[0], t[1]))
            .expect("binary table exceeds default guard")
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn same_lattice(&self, other: &FnTable) -> bool {
        self.is_on(&other.lattice)
    }

    pub fn is_on(&self, lattice: &Arc<Lattice>) -> bool {
        Arc::ptr_eq(&self.lattice, lattice) || *self.lattice == **lattice
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[Elem] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_at(&self, code: usize) -> Elem {
        self.values[code]
    }

    pub fn apply(&self, args: &[Elem]) -> Result<Elem> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: args.len(),
            });
        }
        Ok(self.values[encode(args, self.lattice.size())?])
    }

    pub fn bottom_tuple_code(&self) -> usize {
        0
    }

    pub fn top_tuple_code(&self) -> usize {
        self.values.len() - 1
    }

    /// Monotonicity, checked on the covering pairs of the product order.
    pub fn is_monotone(&self) -> bool {
        let l = &*self.lattice;
        let stride = strides(l.size(), self.arity);
        let mut ok = true;
        for_each_tuple(l.size(), self.arity, |code, tuple| {
            if !ok {
                return;
            }
            let here = self.values[code];
            for (i, &x) in tuple.iter().enumerate() {
                for &uc in l.upper_covers(x) {
                    let above = code + (uc.index() - x.index()) * stride[i];
                    if !l.leq(here, self.values[above]) {
                        ok = false;
                        return;
                    }
                }
            }
        });
        ok
    }

    pub fn satisfies_boundary(&self) -> bool {
        let l = &self.lattice;
        self.values[self.bottom_tuple_code()] == l.bottom()
            && self.values[self.top_tuple_code()] == l.top()
    }

    /// Monotone increasing and fixes the bottom and top tuples.
    pub fn is_aggregation(&self) -> bool {
        self.satisfies_boundary() && self.is_monotone()
    }

    fn check_same(&self, other: &FnTable) -> Result<()> {
        if !self.same_lattice(other) {
            return Err(Error::LatticeMismatch);
        }
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: other.arity,
            });
        }
        Ok(())
    }

    pub fn pointwise_meet(&self, other: &FnTable) -> Result<FnTable> {
        self.check_same(other)?;
        let l = &self.lattice;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| l.meet(a, b))
            .collect();
        Ok(FnTable::from_values_unchecked(
            self.lattice.clone(),
            self.arity,
            values,
        ))
    }

    pub fn pointwise_join(&self, other: &FnTable) -> Result<FnTable> {
        self.check_same(other)?;
        let l = &self.lattice;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| l.join(a, b))
            .collect();
        Ok(FnTable::from_values_unchecked(
            self.lattice.clone(),
            self.arity,
            values,
        ))
    }

    /// Clone composition `self(g_1, ..., g_k)`; every `g_i` has the same arity.
    pub fn compose(&self, args: &[&FnTable]) -> Result<FnTable> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: args.len(),
            });
        }
        let first = args[0];
        for g in args {
            first.check_same(g)?;
        }
        if !self.same_lattice(first) {
            return Err(Error::LatticeMismatch);
        }
        Ok(compose_unchecked(self, args))
    }

    /// The same function viewed on `dual(L)`.
    pub fn dualize(&self, dual: &Arc<Lattice>) -> Result<FnTable> {
        if dual.size() != self.lattice.size() {
            return Err(Error::LatticeMismatch);
        }
        // Index flip i -> n-1-i turns code c into (len-1) - c.
        let values = self
            .values
            .iter()
            .rev()
            .map(|&v| dual_elem(&self.lattice, v))
            .collect();
        Ok(FnTable::from_values_unchecked(
            dual.clone(),
            self.arity,
            values,
        ))
    }

    /// Renders the table in `.fn` format, one line per tuple in code order.
    pub fn to_fn_text(&self) -> String {
        let l = &self.lattice;
        let mut out = format!("lattice: {}\narity: {}\n", l.name(), self.arity);
        for_each_tuple(l.size(), self.arity, |code, tuple| {
            let args: Vec<&str> = tuple.iter().map(|&e| l.name_of(e)).collect();
            let _ = writeln!(
                out,
                "{} -> {}",
                args.join(" "),
                l.name_of(self.values[code])
            );
        });
        out
    }

    /// Value names in code order, space separated.
    pub fn compact(&self) -> String {
        let names: Vec<&str> = self
            .values
            .iter()
            .map(|&e| self.lattice.name_of(e))
            .collect();
        names.join(" ")
    }

    /// Parses the `.fn` text format against `lattice`.
    pub fn parse_fn_text(
        text: &str,
        lattice: Arc<Lattice>,
        limits: &SizeLimits,
    ) -> Result<FnTable> {
        let mut header: Vec<(usize, &str)> = Vec::new();
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if header.len() < 2 {
                header.push((lineno + 1, line));
            } else {
                rows.push((lineno + 1, line));
            }
        }
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let (l1, name_line) = *header
            .first()
            .ok_or_else(|| parse_err(1, "missing `lattice:` line".into()))?;
        let name = name_line
            .strip_prefix("lattice:")
            .ok_or_else(|| parse_err(l1, "expected `lattice: <name>`".into()))?
            .trim();
        if name != lattice.name() {
            return Err(Error::LatticeMismatch);
        }
        let (l2, arity_line) = *header
            .get(1)
            .ok_or_else(|| parse_err(l1 + 1, "missing `arity:` line".into()))?;
        let arity: usize = arity_line
            .strip_prefix("arity:")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| parse_err(l2, "expected `arity: <n>`".into()))?;
        if arity == 0 {
            return Err(Error::ArityTooSmall { min: 1, got: 0 });
        }
        let len = limits.table_len(lattice.size(), arity)?;
        let mut values: Vec<Option<Elem>> = vec![None; len];
        for (lineno, line) in rows {
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| parse_err(lineno, "expected `<args> -> <value>`".into()))?;
            let args = lhs
                .split_whitespace()
                .map(|n| lattice.elem_or_err(n))
                .collect::<Result<Vec<_>>>()?;
            if args.len() != arity {
                return Err(parse_err(
                    lineno,
                    format!("expected {arity} arguments, found {}", args.len()),
                ));
            }
            let value = lattice.elem_or_err(rhs.trim())?;
            let code = encode(&args, lattice.size())?;
            if values[code].replace(value).is_some() {
                return Err(Error::DuplicateTuple(lhs.trim().to_string()));
            }
        }
        if let Some(missing) = values.iter().position(Option::is_none) {
            let tuple = decode(missing, arity, lattice.size())?;
            let names: Vec<&str> = tuple.iter().map(|&e| lattice.name_of(e)).collect();
            return Err(Error::IncompleteTable(names.join(" ")));
        }
        let values = values.into_iter().map(|v| v.unwrap()).collect();
        Ok(FnTable::from_values_unchecked(lattice, arity, values))
    }
}

pub(crate) fn compose_unchecked(f: &FnTable, args: &[&FnTable]) -> FnTable {
    let size = f.lattice.size();
    let len = args[0].values.len();
    let values = (0..len)
        .map(|c| {
            let code = args
                .iter()
                .fold(0usize, |acc, g| acc * size + g.values[c].index());
            f.values[code]
        })
        .collect();
    FnTable::from_values_unchecked(args[0].lattice.clone(), args[0].arity, values)
}

/// Which enumeration engine to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnumStrategy {
    /// Filter every one of the `|L|^(|L|^n)` tables.
    #[default]
    Naive,
    /// Assign values along the code order, restricted to the up-set of the
    /// join of already-assigned predecessors.
    Dfs,
}

/// Enumerates every `arity`-ary aggregation function on `lattice` once, in
/// lexicographic order of value arrays.
///
/// Both strategies yield the same sequence. The stream yields an error and
/// stops if more than `limits.max_tables` functions would be produced.
pub fn enumerate_aggregation(
    lattice: &Arc<Lattice>,
    arity: usize,
    strategy: EnumStrategy,
    limits: &SizeLimits,
) -> Result<AggregationIter> {
    if arity == 0 {
        return Err(Error::ArityTooSmall { min: 1, got: 0 });
    }
    let len = limits.table_len(lattice.size(), arity)?;
    let inner = match strategy {
        EnumStrategy::Naive => {
            let candidates = (lattice.size() as f64).powf(len as f64);
            if candidates * len as f64 > limits.max_cells as f64 {
                return Err(Error::SizeGuardExceeded {
                    what: "naive enumeration cells",
                    needed: format!("{}^{} tables of {} cells", lattice.size(), len, len),
                    limit: limits.max_cells,
                });
            }
            Engine::Naive {
                digits: vec![0; len],
                started: false,
            }
        }
        EnumStrategy::Dfs => Engine::Dfs(DfsState::new(lattice, arity, len)),
    };
    Ok(AggregationIter {
        lattice: lattice.clone(),
        arity,
        inner,
        yielded: 0,
        max_tables: limits.max_tables,
        finished: false,
    })
}

pub struct AggregationIter {
    lattice: Arc<Lattice>,
    arity: usize,
    inner: Engine,
    yielded: u64,
    max_tables: u64,
    finished: bool,
}

enum Engine {
    Naive { digits: Vec<usize>, started: bool },
    Dfs(DfsState),
}

struct DfsState {
    preds: Vec<Vec<usize>>,
    up_sets: Vec<Vec<Elem>>,
    values: Vec<Elem>,
    cands: Vec<Vec<Elem>>,
    choice: Vec<usize>,
    started: bool,
}

impl DfsState {
    fn new(lattice: &Lattice, arity: usize, len: usize) -> DfsState {
        DfsState {
            preds: predecessor_codes(lattice, arity),
            up_sets: lattice.elements().map(|e| lattice.up_set(e)).collect(),
            values: vec![lattice.bottom(); len],
            cands: vec![Vec::new(); len],
            choice: vec![0; len],
            started: false,
        }
    }

    fn candidates(&self, lattice: &Lattice, pos: usize) -> Vec<Elem> {
        let last = self.values.len() - 1;
        if pos == 0 {
            vec![lattice.bottom()]
        } else if pos == last {
            vec![lattice.top()]
        } else {
            let floor = self.preds[pos].iter().fold(lattice.bottom(), |acc, &p| {
                lattice.join(acc, self.values[p])
            });
            self.up_sets[floor.index()].clone()
        }
    }

    fn descend(&mut self, lattice: &Lattice, from: usize) {
        for pos in from..self.values.len() {
            self.cands[pos] = self.candidates(lattice, pos);
            self.choice[pos] = 0;
            self.values[pos] = self.cands[pos][0];
        }
    }

    fn advance(&mut self, lattice: &Lattice) -> bool {
        if !self.started {
            self.started = true;
            self.descend(lattice, 0);
            // With bottom == top the single element is forced everywhere.
            return true;
        }
        let mut pos = self.values.len();
        while pos > 0 {
            pos -= 1;
            self.choice[pos] += 1;
            if self.choice[pos] < self.cands[pos].len() {
                self.values[pos] = self.cands[pos][self.choice[pos]];
                self.descend(lattice, pos + 1);
                return true;
            }
        }
        false
    }
}

impl Iterator for AggregationIter {
    type Item = Result<FnTable>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        let size = self.lattice.size();
        let values = match &mut self.inner {
            Engine::Naive { digits, started } => loop {
                if *started {
                    let mut carried = true;
                    for d in digits.iter_mut().rev() {
                        if *d + 1 < size {
                            *d += 1;
                            carried = false;
                            break;
                        }
                        *d = 0;
                    }
                    if carried {
                        break None;
                    }
                }
                *started = true;
                let values: Vec<Elem> = digits.iter().map(|&d| Elem::new(d)).collect();
                let t = FnTable::from_values_unchecked(self.lattice.clone(), self.arity, values);
                if t.is_aggregation() {
                    break Some(t.values);
                }
            },
            Engine::Dfs(state) => state.advance(&self.lattice).then(|| state.values.clone()),
        };
        let Some(values) = values else {
            self.finished = true;
            return None;
        };
        if self.yielded >= self.max_tables {
            self.finished = true;
            return Some(Err(Error::SizeGuardExceeded {
                what: "enumerated tables",
                needed: format!("more than {}", self.max_tables),
                limit: self.max_tables,
            }));
        }
        self.yielded += 1;
        Some(Ok(FnTable::from_values_unchecked(
            self.lattice.clone(),
            self.arity,
            values,
        )))
    }
}

/// Collects the enumeration, propagating guard errors.
pub fn all_aggregation(
    lattice: &Arc<Lattice>,
    arity: usize,
    strategy: EnumStrategy,
    limits: &SizeLimits,
) -> Result<Vec<FnTable>> {
    enumerate_aggregation(lattice, arity, strategy, limits)?.collect()
}

/// Draws an aggregation function by monotone-extension sampling.
///
/// Values are assigned in code order; each is drawn uniformly from the
/// up-set of the join of the values already given to the tuple's immediate
/// predecessors. The bottom tuple maps to bottom and the top tuple to top.
/// The distribution is not uniform over aggregation functions.
pub fn random_monotone_aggregation(
    lattice: &Arc<Lattice>,
    arity: usize,
    seed: u64,
) -> Result<FnTable> {
    random_monotone_aggregation_with(lattice, arity, seed, &SizeLimits::default())
}

pub fn random_monotone_aggregation_with(
    lattice: &Arc<Lattice>,
    arity: usize,
    seed: u64,
    limits: &SizeLimits,
) -> Result<FnTable> {
    if arity == 0 {
        return Err(Error::ArityTooSmall { min: 1, got: 0 });
    }
    let len = limits.table_len(lattice.size(), arity)?;
    let preds = predecessor_codes(lattice, arity);
    let up_sets: Vec<Vec<Elem>> = lattice.elements().map(|e| lattice.up_set(e)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![lattice.bottom(); len];
    for pos in 1..len {
        if pos == len - 1 {
            values[pos] = lattice.top();
            break;
        }
        let floor = preds[pos]
            .iter()
            .fold(lattice.bottom(), |acc, &p| lattice.join(acc, values[p]));
        let ups = &up_sets[floor.index()];
        values[pos] = ups[rng.gen_range(0..ups.len())];
    }
    Ok(FnTable::from_values_unchecked(
        lattice.clone(),
        arity,
        values,
    ))
}
