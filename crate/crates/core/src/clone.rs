//! Relation preservation and bounded-arity clone closure.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use indexmap::IndexSet;

use crate::basis::oplus;
use crate::error::{Error, Result};
use crate::lattice::{Elem, Lattice};
use crate::limits::SizeLimits;
use crate::table::{all_aggregation, compose_unchecked, EnumStrategy, FnTable};

/// A finite `d`-ary relation on a lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    lattice: Arc<Lattice>,
    arity: usize,
    tuples: BTreeSet<Vec<Elem>>,
}

impl Relation {
    pub fn new(
        lattice: Arc<Lattice>,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<Elem>>,
    ) -> Result<Relation> {
        if arity == 0 {
            return Err(Error::ArityTooSmall { min: 1, got: 0 });
        }
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    got: t.len(),
                });
            }
            if let Some(bad) = t.iter().find(|e| !lattice.contains(**e)) {
                return Err(Error::InvalidElement(bad.index()));
            }
            set.insert(t);
        }
        Ok(Relation {
            lattice,
            arity,
            tuples: set,
        })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Vec<Elem>> {
        self.tuples.iter()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[Elem]) -> bool {
        self.tuples.contains(t)
    }

    pub fn render_tuple(&self, t: &[Elem]) -> String {
        let names: Vec<&str> = t.iter().map(|&e| self.lattice.name_of(e)).collect();
        format!("({})", names.join(","))
    }

    pub fn to_rel_text(&self) -> String {
        let mut out = format!("lattice: {}\narity: {}\n", self.lattice.name(), self.arity);
        for t in &self.tuples {
            let names: Vec<&str> = t.iter().map(|&e| self.lattice.name_of(e)).collect();
            let _ = writeln!(out, "{}", names.join(" "));
        }
        out
    }

    /// Parses the `.rel` format.
    pub fn parse_rel_text(text: &str, lattice: Arc<Lattice>) -> Result<Relation> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, raw)| {
                let line = raw.find('#').map_or(raw, |p| &raw[..p]).trim();
                (i + 1, line)
            })
            .filter(|(_, l)| !l.is_empty());
        let err = |line, message: &str| Error::Parse {
            line,
            message: message.into(),
        };
        let (n1, first) = lines
            .next()
            .ok_or_else(|| err(1, "missing `lattice:` line"))?;
        let name = first
            .strip_prefix("lattice:")
            .ok_or_else(|| err(n1, "expected `lattice: <name>`"))?
            .trim();
        if name != lattice.name() {
            return Err(Error::LatticeMismatch);
        }
        let (n2, second) = lines
            .next()
            .ok_or_else(|| err(n1 + 1, "missing `arity:` line"))?;
        let arity: usize = second
            .strip_prefix("arity:")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(n2, "expected `arity: <d>`"))?;
        let mut tuples = Vec::new();
        for (n, line) in lines {
            let t = line
                .split_whitespace()
                .map(|w| lattice.elem_or_err(w))
                .collect::<Result<Vec<_>>>()?;
            if t.len() != arity {
                return Err(err(n, &format!("expected {arity} entries")));
            }
            tuples.push(t);
        }
        Relation::new(lattice, arity, tuples)
    }
}

/// Columns drawn from `rho` and the row-wise image of `f` that leaves `rho`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub columns: Vec<Vec<Elem>>,
    pub image: Vec<Elem>,
}

/// First matrix (in lexicographic order of column choices) whose columns
/// lie in `rho` but whose row-wise image under `f` does not.
pub fn preservation_counterexample(f: &FnTable, rho: &Relation) -> Result<Option<Counterexample>> {
    if !f.is_on(&rho.lattice) {
        return Err(Error::LatticeMismatch);
    }
    if rho.is_empty() {
        return Ok(None);
    }
    let members: Vec<&Vec<Elem>> = rho.tuples.iter().collect();
    let n = f.arity();
    let mut pick = vec![0usize; n];
    let mut row = vec![Elem::new(0); n];
    loop {
        let image: Vec<Elem> = (0..rho.arity)
            .map(|r| {
                for (c, &p) in pick.iter().enumerate() {
                    row[c] = members[p][r];
                }
                f.apply(&row)
            })
            .collect::<Result<_>>()?;
        if !rho.contains(&image) {
            return Ok(Some(Counterexample {
                columns: pick.iter().map(|&p| members[p].clone()).collect(),
                image,
            }));
        }
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(None);
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < members.len() {
                break;
            }
            pick[k] = 0;
        }
    }
}

/// Whether `f` maps every matrix with columns in `rho` to a tuple in `rho`.
pub fn preserves(f: &FnTable, rho: &Relation) -> Result<bool> {
    Ok(preservation_counterexample(f, rho)?.is_none())
}

/// Deduplicated function tables of arities `1..=k_max`.
#[derive(Debug, Clone)]
pub struct FnSet {
    lattice: Arc<Lattice>,
    k_max: usize,
    by_arity: Vec<IndexSet<FnTable>>,
}

impl FnSet {
    pub fn new(lattice: Arc<Lattice>, k_max: usize) -> FnSet {
        FnSet {
            lattice,
            k_max,
            by_arity: vec![IndexSet::new(); k_max],
        }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Inserts `f`; returns false if it was already present.
    pub fn insert(&mut self, f: FnTable) -> Result<bool> {
        if !f.is_on(&self.lattice) {
            return Err(Error::LatticeMismatch);
        }
        if f.arity() > self.k_max {
            return Err(Error::ArityMismatch {
                expected: self.k_max,
                got: f.arity(),
            });
        }
        Ok(self.by_arity[f.arity() - 1].insert(f))
    }

    /// Table-equality membership; false for arities above `k_max`.
    pub fn contains(&self, f: &FnTable) -> bool {
        f.arity() >= 1 && f.arity() <= self.k_max && self.by_arity[f.arity() - 1].contains(f)
    }

    pub fn members(&self, arity: usize) -> impl Iterator<Item = &FnTable> {
        self.by_arity
            .get(arity.wrapping_sub(1))
            .into_iter()
            .flat_map(|s| s.iter())
    }

    pub fn count(&self, arity: usize) -> usize {
        self.by_arity
            .get(arity.wrapping_sub(1))
            .map_or(0, IndexSet::len)
    }

    /// `(arity, member count)` for every arity.
    pub fn counts(&self) -> Vec<(usize, usize)> {
        (1..=self.k_max).map(|k| (k, self.count(k))).collect()
    }

    pub fn total(&self) -> usize {
        self.by_arity.iter().map(IndexSet::len).sum()
    }
}

/// Outcome of a closure run.
#[derive(Debug, Clone)]
pub struct Closure {
    pub set: FnSet,
    /// Breadth-first rounds performed per arity.
    pub rounds: Vec<usize>,
    /// False when the run stopped early because every target was found.
    pub complete: bool,
}

/// The arity-`<= k_max` part of the clone generated by `basis`.
pub fn closure(basis: &[FnTable], k_max: usize, limits: &SizeLimits) -> Result<FnSet> {
    Ok(closure_until(basis, k_max, limits, &[])?.set)
}

/// Like [`closure`], but each arity stops after the first round in which
/// every target of that arity is present.
///
/// Arity `n` starts from the `n` projections and the basis members of arity
/// `n`; each round applies every basis function of arity `k` to the `k`-tuples
/// of current members that involve at least one member added in the
/// previous round. Applying only basis functions reaches the same fixpoint
/// as composing arbitrary members, because a composition of terms is a term.
pub fn closure_until(
    basis: &[FnTable],
    k_max: usize,
    limits: &SizeLimits,
    targets: &[FnTable],
) -> Result<Closure> {
    let first = basis.first().ok_or(Error::EmptyBasis)?;
    if k_max == 0 {
        return Err(Error::ArityTooSmall { min: 1, got: 0 });
    }
    let lattice = first.lattice().clone();
    if basis.iter().chain(targets).any(|f| !f.same_lattice(first)) {
        return Err(Error::LatticeMismatch);
    }
    for n in 1..=k_max {
        limits.table_len(lattice.size(), n)?;
    }
    let all_aggregation = basis.iter().all(FnTable::is_aggregation);

    let mut set = FnSet::new(lattice.clone(), k_max);
    let mut rounds = Vec::with_capacity(k_max);
    let mut complete = true;
    for n in 1..=k_max {
        let earlier = set.total();
        let members = &mut set.by_arity[n - 1];
        for i in 1..=n {
            members.insert(FnTable::projection(lattice.clone(), n, i)?);
        }
        for f in basis.iter().filter(|f| f.arity() == n) {
            members.insert(f.clone());
        }
        let wanted: Vec<&FnTable> = targets.iter().filter(|t| t.arity() == n).collect();
        let (mut start, mut end) = (0usize, members.len());
        let mut round = 0;
        while start < end {
            if !wanted.is_empty() && wanted.iter().all(|t| members.contains(*t)) {
                complete = false;
                break;
            }
            round += 1;
            for g in basis {
                let k = g.arity();
                // Partition by the first argument position drawn from the
                // newest members: earlier positions are older members,
                // later positions are anything.
                for lead in 0..k {
                    let ranges: Vec<(usize, usize)> = (0..k)
                        .map(|p| match p.cmp(&lead) {
                            std::cmp::Ordering::Less => (0, start),
                            std::cmp::Ordering::Equal => (start, end),
                            std::cmp::Ordering::Greater => (0, end),
                        })
                        .collect();
                    if ranges.iter().any(|(lo, hi)| lo >= hi) {
                        continue;
                    }
                    let mut pick: Vec<usize> = ranges.iter().map(|r| r.0).collect();
                    let mut fresh: IndexSet<FnTable> = IndexSet::new();
                    loop {
                        let args: Vec<&FnTable> = pick.iter().map(|&i| &members[i]).collect();
                        let h = compose_unchecked(g, &args);
                        if !members.contains(&h) && fresh.insert(h) {
                            let total = earlier + members.len() + fresh.len();
                            if total as u64 > limits.max_tables {
                                return Err(Error::SizeGuardExceeded {
                                    what: "closure tables",
                                    needed: format!("more than {}", limits.max_tables),
                                    limit: limits.max_tables,
                                });
                            }
                        }
                        let mut p = k;
                        let done = loop {
                            if p == 0 {
                                break true;
                            }
                            p -= 1;
                            pick[p] += 1;
                            if pick[p] < ranges[p].1 {
                                break false;
                            }
                            pick[p] = ranges[p].0;
                        };
                        if done {
                            break;
                        }
                    }
                    members.extend(fresh);
                }
            }
            start = end;
            end = members.len();
        }
        rounds.push(round);
    }

    if all_aggregation {
        for n in 1..=k_max {
            if set.members(n).any(|f| !f.is_aggregation()) {
                return Err(Error::VerificationFailed(format!(
                    "closure of aggregation functions produced a non-aggregation member at arity {n}"
                )));
            }
        }
    }
    Ok(Closure {
        set,
        rounds,
        complete,
    })
}

/// Meet, join and every unary aggregation function on `lattice`.
pub fn unary_basis(lattice: &Arc<Lattice>, limits: &SizeLimits) -> Result<Vec<FnTable>> {
    let mut out = vec![
        FnTable::meet_table(lattice.clone()),
        FnTable::join_table(lattice.clone()),
    ];
    out.extend(all_aggregation(lattice, 1, EnumStrategy::Dfs, limits)?);
    Ok(out)
}

/// A relation preserved by the lattice operations and every unary
/// aggregation function but not by some aggregation function.
#[derive(Debug, Clone)]
pub struct InsufficiencyWitness {
    pub relation: Relation,
    pub violator: FnTable,
    /// The parameter `a` of the violating `(+)[a]`.
    pub parameter: Elem,
    pub columns: Vec<Vec<Elem>>,
    pub image: Vec<Elem>,
    pub unary_functions_checked: usize,
    pub unary_preserve: bool,
    pub lattice_ops_preserve: bool,
    pub violator_preserves: bool,
}

impl InsufficiencyWitness {
    /// True when every checked fact came out as expected.
    pub fn holds(&self) -> bool {
        self.unary_preserve && self.lattice_ops_preserve && !self.violator_preserves
    }
}

/// Builds `B = {(top, bottom), (bottom, bottom)}` and checks it against all
/// unary aggregation functions, meet, join and `(+)[a]` for the first
/// element `a` strictly between the bounds.
pub fn unary_insufficiency_witness(
    lattice: &Arc<Lattice>,
    limits: &SizeLimits,
) -> Result<InsufficiencyWitness> {
    if lattice.size() < 3 {
        return Err(Error::LatticeTooSmall {
            min: 3,
            got: lattice.size(),
        });
    }
    let (bot, top) = (lattice.bottom(), lattice.top());
    let relation = Relation::new(lattice.clone(), 2, [vec![top, bot], vec![bot, bot]])?;
    let a = lattice.interior()[0];
    let violator = oplus(lattice, a);

    let unary = all_aggregation(lattice, 1, EnumStrategy::Dfs, limits)?;
    let mut unary_preserve = true;
    for u in &unary {
        unary_preserve &= preserves(u, &relation)?;
    }
    let lattice_ops_preserve = preserves(&FnTable::meet_table(lattice.clone()), &relation)?
        && preserves(&FnTable::join_table(lattice.clone()), &relation)?;
    let cex = preservation_counterexample(&violator, &relation)?;
    let violator_preserves = cex.is_none();
    let (columns, image) = cex.map_or((Vec::new(), Vec::new()), |c| (c.columns, c.image));
    Ok(InsufficiencyWitness {
        relation,
        violator,
        parameter: a,
        columns,
        image,
        unary_functions_checked: unary.len(),
        unary_preserve,
        lattice_ops_preserve,
        violator_preserves,
    })
}
