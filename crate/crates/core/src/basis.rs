//! Generating aggregation functions and the join/meet decompositions built
//! from them.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{Elem, Lattice};
use crate::limits::SizeLimits;
use crate::table::{decode, FnTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Chi,
    Mu,
    Oplus,
    Meet,
    Join,
}

/// Names one generating function; `parameter` is set exactly for
/// `Chi`, `Mu` and `Oplus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisDescriptor {
    kind: BasisKind,
    parameter: Option<Elem>,
}

impl BasisDescriptor {
    pub fn chi(a: Elem) -> Self {
        BasisDescriptor {
            kind: BasisKind::Chi,
            parameter: Some(a),
        }
    }

    pub fn mu(a: Elem) -> Self {
        BasisDescriptor {
            kind: BasisKind::Mu,
            parameter: Some(a),
        }
    }

    pub fn oplus(b: Elem) -> Self {
        BasisDescriptor {
            kind: BasisKind::Oplus,
            parameter: Some(b),
        }
    }

    pub fn meet() -> Self {
        BasisDescriptor {
            kind: BasisKind::Meet,
            parameter: None,
        }
    }

    pub fn join() -> Self {
        BasisDescriptor {
            kind: BasisKind::Join,
            parameter: None,
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn parameter(&self) -> Option<Elem> {
        self.parameter
    }

    pub fn table(&self, lattice: &Arc<Lattice>) -> FnTable {
        match (self.kind, self.parameter) {
            (BasisKind::Chi, Some(a)) => chi(lattice, a),
            (BasisKind::Mu, Some(a)) => mu(lattice, a),
            (BasisKind::Oplus, Some(b)) => oplus(lattice, b),
            (BasisKind::Meet, _) => FnTable::meet_table(lattice.clone()),
            (BasisKind::Join, _) => FnTable::join_table(lattice.clone()),
            _ => unreachable!("descriptor constructors always set the parameter"),
        }
    }

    /// Text label, e.g. `chi[a]`, `(+)[b]`, `/\`.
    pub fn label(&self, lattice: &Lattice) -> String {
        let p = |e: Option<Elem>| {
            e.map(|e| lattice.name_of(e).to_string())
                .unwrap_or_default()
        };
        match self.kind {
            BasisKind::Chi => format!("chi[{}]", p(self.parameter)),
            BasisKind::Mu => format!("mu[{}]", p(self.parameter)),
            BasisKind::Oplus => format!("(+)[{}]", p(self.parameter)),
            BasisKind::Meet => "/\\".to_string(),
            BasisKind::Join => "\\/".to_string(),
        }
    }
}

/// Sorted 1-based coordinate positions, e.g. the non-zero indices of a tuple.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn positions(&self) -> &[usize] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Positions `i` with `a_i != bottom`.
pub fn nonzero_indices(lattice: &Lattice, a: &[Elem]) -> IndexSet {
    IndexSet(
        a.iter()
            .enumerate()
            .filter(|(_, &x)| x != lattice.bottom())
            .map(|(i, _)| i + 1)
            .collect(),
    )
}

/// Positions `i` with `a_i != top`.
pub fn non_top_indices(lattice: &Lattice, a: &[Elem]) -> IndexSet {
    IndexSet(
        a.iter()
            .enumerate()
            .filter(|(_, &x)| x != lattice.top())
            .map(|(i, _)| i + 1)
            .collect(),
    )
}

pub fn chi_value(l: &Lattice, a: Elem, x: Elem) -> Elem {
    if l.leq(a, x) && x != l.bottom() {
        l.top()
    } else {
        l.bottom()
    }
}

pub fn mu_value(l: &Lattice, a: Elem, x: Elem) -> Elem {
    if l.leq(x, a) && x != l.top() {
        l.bottom()
    } else {
        l.top()
    }
}

pub fn oplus_value(l: &Lattice, b: Elem, x: Elem, y: Elem) -> Elem {
    if x == l.top() && y == l.top() {
        l.top()
    } else if x == l.bottom() && y == l.bottom() {
        l.bottom()
    } else {
        b
    }
}

fn unary(lattice: &Arc<Lattice>, f: impl Fn(Elem) -> Elem) -> FnTable {
    FnTable::from_fn(lattice.clone(), 1, &SizeLimits::default(), |t| f(t[0]))
        .expect("unary table fits the element guard")
}

/// Indicator of the principal filter of `a`, with bottom sent to bottom.
pub fn chi(lattice: &Arc<Lattice>, a: Elem) -> FnTable {
    let l = lattice.clone();
    unary(lattice, move |x| chi_value(&l, a, x))
}

/// Dual of [`chi`]: bottom on the principal ideal of `a` except top.
pub fn mu(lattice: &Arc<Lattice>, a: Elem) -> FnTable {
    let l = lattice.clone();
    unary(lattice, move |x| mu_value(&l, a, x))
}

/// `x (+)_b y`: top on (top, top), bottom on (bottom, bottom), `b` elsewhere.
pub fn oplus(lattice: &Arc<Lattice>, b: Elem) -> FnTable {
    let l = lattice.clone();
    FnTable::from_fn(lattice.clone(), 2, &SizeLimits::default(), move |t| {
        oplus_value(&l, b, t[0], t[1])
    })
    .expect("binary table exceeds default guard")
}

/// Left fold of `(+)_b` over `xs` (at least two arguments).
pub fn oplus_fold(l: &Lattice, b: Elem, xs: &[Elem]) -> Result<Elem> {
    if xs.len() < 2 {
        return Err(Error::ArityTooSmall {
            min: 2,
            got: xs.len(),
        });
    }
    Ok(fold_value(l, b, xs))
}

/// Fold used inside `h_a`/`g_a`; a single argument folds as `x (+)_b x`.
fn fold_value(l: &Lattice, b: Elem, xs: &[Elem]) -> Elem {
    match xs {
        [x] => oplus_value(l, b, *x, *x),
        [first, rest @ ..] => rest
            .iter()
            .fold(*first, |acc, &x| oplus_value(l, b, acc, x)),
        [] => unreachable!("arity is at least one"),
    }
}

/// `L^n_*`: the tuples strictly between the bottom and top tuples, in
/// ascending code order.
pub fn interior_tuples(lattice: &Lattice, arity: usize) -> Vec<Vec<Elem>> {
    let size = lattice.size();
    let len = size.pow(arity as u32);
    if len < 2 {
        return Vec::new();
    }
    (1..len - 1)
        .map(|c| decode(c, arity, size).expect("code in range"))
        .collect()
}

fn check_index_tuple(f: &FnTable, a: &[Elem]) -> Result<()> {
    let l = f.lattice();
    if a.len() != f.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            got: a.len(),
        });
    }
    if let Some(bad) = a.iter().find(|e| !l.contains(**e)) {
        return Err(Error::InvalidElement(bad.index()));
    }
    if a.iter().all(|&x| x == l.bottom()) || a.iter().all(|&x| x == l.top()) {
        return Err(Error::InvalidIndexTuple);
    }
    Ok(())
}

/// `h_a(x) = /\_{i in J_a} chi_{a_i}(x_i) /\ (+)_{f(a)} x`.
pub fn h_table(f: &FnTable, a: &[Elem]) -> Result<FnTable> {
    check_index_tuple(f, a)?;
    let l = f.lattice().clone();
    let fa = f.apply(a)?;
    let support = nonzero_indices(&l, a);
    FnTable::from_fn(l.clone(), f.arity(), &SizeLimits::default(), |x| {
        let gate = support.positions().iter().fold(l.top(), |acc, &i| {
            l.meet(acc, chi_value(&l, a[i - 1], x[i - 1]))
        });
        l.meet(gate, fold_value(&l, fa, x))
    })
}

/// `g_a(x) = \/_{i in J^_a} mu_{a_i}(x_i) \/ (+)_{f(a)} x`.
pub fn g_table(f: &FnTable, a: &[Elem]) -> Result<FnTable> {
    check_index_tuple(f, a)?;
    let l = f.lattice().clone();
    let fa = f.apply(a)?;
    let support = non_top_indices(&l, a);
    FnTable::from_fn(l.clone(), f.arity(), &SizeLimits::default(), |x| {
        let gate = support.positions().iter().fold(l.bottom(), |acc, &i| {
            l.join(acc, mu_value(&l, a[i - 1], x[i - 1]))
        });
        l.join(gate, fold_value(&l, fa, x))
    })
}

/// Per-tuple parts of a decomposition together with their combination.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub parts: Vec<(Vec<Elem>, FnTable)>,
    pub combined: FnTable,
}

fn decompose(
    f: &FnTable,
    part: fn(&FnTable, &[Elem]) -> Result<FnTable>,
    combine: fn(&FnTable, &FnTable) -> Result<FnTable>,
) -> Result<Decomposition> {
    if !f.is_aggregation() {
        return Err(Error::NotAggregation);
    }
    let l = f.lattice();
    let parts = interior_tuples(l, f.arity())
        .into_iter()
        .map(|a| part(f, &a).map(|t| (a, t)))
        .collect::<Result<Vec<_>>>()?;
    let combined = match parts.split_first() {
        Some(((_, first), rest)) => rest
            .iter()
            .try_fold(first.clone(), |acc, (_, t)| combine(&acc, t))?,
        // No interior tuples: |L| = 1, or |L| = 2 with n = 1. The only
        // aggregation function is then the first projection.
        None => FnTable::projection(l.clone(), f.arity(), 1)?,
    };
    Ok(Decomposition { parts, combined })
}

/// All `h_a`, `a` in `L^n_*` ascending, and their pointwise join (equal to `f`).
pub fn decompose_join(f: &FnTable) -> Result<Decomposition> {
    decompose(f, h_table, FnTable::pointwise_join)
}

/// All `g_a`, `a` in `L^n_*` ascending, and their pointwise meet (equal to `f`).
pub fn decompose_meet(f: &FnTable) -> Result<Decomposition> {
    decompose(f, g_table, FnTable::pointwise_meet)
}

/// `(x /\ y) \/ (y /\ z) \/ (x /\ z)`
pub fn majority_meetjoin(lattice: &Arc<Lattice>) -> FnTable {
    let l = lattice.clone();
    FnTable::from_fn(lattice.clone(), 3, &SizeLimits::default(), move |t| {
        let (x, y, z) = (t[0], t[1], t[2]);
        l.join(l.join(l.meet(x, y), l.meet(y, z)), l.meet(x, z))
    })
    .expect("ternary table exceeds default guard")
}

/// `(x \/ y) /\ (y \/ z) /\ (x \/ z)`
pub fn majority_joinmeet(lattice: &Arc<Lattice>) -> FnTable {
    let l = lattice.clone();
    FnTable::from_fn(lattice.clone(), 3, &SizeLimits::default(), move |t| {
        let (x, y, z) = (t[0], t[1], t[2]);
        l.meet(l.meet(l.join(x, y), l.join(y, z)), l.join(x, z))
    })
    .expect("ternary table exceeds default guard")
}

/// `f(x, ..., x, y, x, ..., x) = x` for every position of `y`.
pub fn is_near_unanimity(f: &FnTable) -> Result<bool> {
    let n = f.arity();
    if n < 3 {
        return Err(Error::ArityTooSmall { min: 3, got: n });
    }
    let l = f.lattice();
    for x in l.elements() {
        for y in l.elements() {
            for pos in 0..n {
                let mut args = vec![x; n];
                args[pos] = y;
                if f.apply(&args)? != x {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn dedup_basis(items: Vec<(BasisDescriptor, FnTable)>) -> Vec<(BasisDescriptor, FnTable)> {
    let mut out: Vec<(BasisDescriptor, FnTable)> = Vec::with_capacity(items.len());
    for (d, t) in items {
        if !out.iter().any(|(_, u)| *u == t) {
            out.push((d, t));
        }
    }
    out
}

/// Meet, join, every `chi_a` and every `(+)_b`, with duplicate tables
/// removed. At most `2|L| + 2` members.
pub fn generating_basis(lattice: &Arc<Lattice>) -> Vec<(BasisDescriptor, FnTable)> {
    let mut items = vec![
        (
            BasisDescriptor::meet(),
            FnTable::meet_table(lattice.clone()),
        ),
        (
            BasisDescriptor::join(),
            FnTable::join_table(lattice.clone()),
        ),
    ];
    items.extend(
        lattice
            .elements()
            .map(|a| (BasisDescriptor::chi(a), chi(lattice, a))),
    );
    items.extend(
        lattice
            .elements()
            .map(|b| (BasisDescriptor::oplus(b), oplus(lattice, b))),
    );
    dedup_basis(items)
}

/// Meet, join, every `mu_a` and every `(+)_b`, deduplicated.
pub fn dual_generating_basis(lattice: &Arc<Lattice>) -> Vec<(BasisDescriptor, FnTable)> {
    let mut items = vec![
        (
            BasisDescriptor::meet(),
            FnTable::meet_table(lattice.clone()),
        ),
        (
            BasisDescriptor::join(),
            FnTable::join_table(lattice.clone()),
        ),
    ];
    items.extend(
        lattice
            .elements()
            .map(|a| (BasisDescriptor::mu(a), mu(lattice, a))),
    );
    items.extend(
        lattice
            .elements()
            .map(|b| (BasisDescriptor::oplus(b), oplus(lattice, b))),
    );
    dedup_basis(items)
}
