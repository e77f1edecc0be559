//! Finite bounded lattices built from cover relations.
//!
//! Elements are stored by index. Every constructor in this module keeps the
//! index order a linear extension of the lattice order (`x <= y` implies
//! `x.index() <= y.index()`), which the tuple encoding and the enumerators in
//! [`crate::table`] rely on.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{BoundKind, Error, Result};
use crate::limits::SizeLimits;

/// Handle to an element of a specific [`Lattice`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(u32);

impl Elem {
    pub fn new(index: usize) -> Self {
        Elem(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Unvalidated description of a lattice: element names and cover pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    pub name: String,
    pub elements: Vec<String>,
    pub covers: Vec<(String, String)>,
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
    .trim()
}

impl LatticeSpec {
    pub fn new(name: impl Into<String>, elements: &[&str], covers: &[(&str, &str)]) -> Self {
        LatticeSpec {
            name: name.into(),
            elements: elements.iter().map(|s| s.to_string()).collect(),
            covers: covers
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        }
    }

    /// Parses the `.lat` text format.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut elements: Option<Vec<String>> = None;
        let mut covers = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| Error::Parse {
                line: lineno + 1,
                message: message.to_string(),
            };
            match &elements {
                None => {
                    let rest = line
                        .strip_prefix("elements:")
                        .ok_or_else(|| err("expected `elements:` line"))?;
                    let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                    for n in &names {
                        if !is_valid_name(n) {
                            return Err(Error::InvalidName(n.clone()));
                        }
                    }
                    elements = Some(names);
                }
                Some(_) => {
                    let mut words = line.split_whitespace();
                    match (words.next(), words.next(), words.next(), words.next()) {
                        (Some("cover"), Some(lo), Some(hi), None) => {
                            covers.push((lo.to_string(), hi.to_string()))
                        }
                        _ => return Err(err("expected `cover <lower> <upper>`")),
                    }
                }
            }
        }
        let elements = elements.ok_or(Error::Parse {
            line: 1,
            message: "missing `elements:` line".into(),
        })?;
        Ok(LatticeSpec {
            name: name.into(),
            elements,
            covers,
        })
    }
}

/// A finite bounded lattice with precomputed order, meet and join tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    name: String,
    names: Vec<String>,
    index_of: HashMap<String, Elem>,
    leq: Vec<bool>,
    meet: Vec<Elem>,
    join: Vec<Elem>,
    bottom: Elem,
    top: Elem,
    lower_covers: Vec<Vec<Elem>>,
    upper_covers: Vec<Vec<Elem>>,
}

/// Builds a lattice from its cover relation under the default size limits.
pub fn build_lattice(spec: &LatticeSpec) -> Result<Lattice> {
    build_lattice_with(spec, &SizeLimits::default())
}

pub fn build_lattice_with(spec: &LatticeSpec, limits: &SizeLimits) -> Result<Lattice> {
    let n = spec.elements.len();
    if n == 0 {
        return Err(Error::EmptyLattice);
    }
    limits.check_elements(n)?;
    let mut input_index = HashMap::with_capacity(n);
    for (i, name) in spec.elements.iter().enumerate() {
        if !is_valid_name(name) {
            return Err(Error::InvalidName(name.clone()));
        }
        if input_index.insert(name.as_str(), i).is_some() {
            return Err(Error::DuplicateElement(name.clone()));
        }
    }
    let lookup = |name: &str| {
        input_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    };
    let mut succ = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (lo, hi) in &spec.covers {
        let (lo, hi) = (lookup(lo)?, lookup(hi)?);
        if lo == hi {
            return Err(Error::CycleInCovers(spec.elements[lo].clone()));
        }
        succ[lo].push(hi);
        indegree[hi] += 1;
    }

    // Kahn's algorithm; among ready elements the earliest in input order goes first.
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &succ[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(Error::CycleInCovers(spec.elements[stuck].clone()));
    }
    let mut position = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        position[old] = new;
    }

    // Reflexive-transitive closure, filled from the top of the linear extension down.
    let mut leq = vec![false; n * n];
    for new in (0..n).rev() {
        let old = order[new];
        leq[new * n + new] = true;
        for &w in &succ[old] {
            let up = position[w];
            for z in up..n {
                if leq[up * n + z] {
                    leq[new * n + z] = true;
                }
            }
        }
    }
    let names = order
        .iter()
        .map(|&old| spec.elements[old].clone())
        .collect();
    Lattice::from_order(spec.name.clone(), names, leq)
}

impl Lattice {
    /// Completes a lattice from an order matrix whose index order is a linear
    /// extension. Validates bounds, meets and joins.
    fn from_order(name: String, names: Vec<String>, leq: Vec<bool>) -> Result<Lattice> {
        let n = names.len();
        let le = |a: usize, b: usize| leq[a * n + b];

        let bottoms: Vec<usize> = (0..n).filter(|&x| (0..n).all(|y| le(x, y))).collect();
        if bottoms.len() != 1 {
            return Err(Error::NotBounded("least"));
        }
        let tops: Vec<usize> = (0..n).filter(|&x| (0..n).all(|y| le(y, x))).collect();
        if tops.len() != 1 {
            return Err(Error::NotBounded("greatest"));
        }

        let pair_err =
            |x: usize, y: usize, kind| Error::NotALattice(names[x].clone(), names[y].clone(), kind);
        let mut meet = vec![Elem(0); n * n];
        for x in 0..n {
            for y in x..n {
                // The highest-indexed common lower bound is maximal; it is the
                // infimum iff every other lower bound sits below it.
                let lower: Vec<usize> = (0..=y).filter(|&z| le(z, x) && le(z, y)).collect();
                let cand = *lower
                    .last()
                    .ok_or_else(|| pair_err(x, y, BoundKind::Infimum))?;
                if lower.iter().any(|&z| !le(z, cand)) {
                    return Err(pair_err(x, y, BoundKind::Infimum));
                }
                meet[x * n + y] = Elem::new(cand);
                meet[y * n + x] = Elem::new(cand);
            }
        }
        let mut join = vec![Elem(0); n * n];
        for x in 0..n {
            for y in x..n {
                let upper: Vec<usize> = (x..n).filter(|&z| le(x, z) && le(y, z)).collect();
                let cand = *upper
                    .first()
                    .ok_or_else(|| pair_err(x, y, BoundKind::Supremum))?;
                if upper.iter().any(|&z| !le(cand, z)) {
                    return Err(pair_err(x, y, BoundKind::Supremum));
                }
                join[x * n + y] = Elem::new(cand);
                join[y * n + x] = Elem::new(cand);
            }
        }

        let mut lower_covers = vec![Vec::new(); n];
        let mut upper_covers = vec![Vec::new(); n];
        #[allow(clippy::needless_range_loop)]
        for y in 0..n {
            let mut found: Vec<usize> = Vec::new();
            for x in (0..y).rev() {
                if le(x, y) && !found.iter().any(|&c| le(x, c)) {
                    found.push(x);
                }
            }
            found.sort_unstable();
            for &x in &found {
                upper_covers[x].push(Elem::new(y));
            }
            lower_covers[y] = found.into_iter().map(Elem::new).collect();
        }

        Ok(Lattice::assemble(
            name,
            names,
            leq,
            meet,
            join,
            Elem::new(bottoms[0]),
            Elem::new(tops[0]),
            lower_covers,
            upper_covers,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        name: String,
        names: Vec<String>,
        leq: Vec<bool>,
        meet: Vec<Elem>,
        join: Vec<Elem>,
        bottom: Elem,
        top: Elem,
        lower_covers: Vec<Vec<Elem>>,
        upper_covers: Vec<Vec<Elem>>,
    ) -> Lattice {
        let index_of = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), Elem::new(i)))
            .collect();
        Lattice {
            name,
            names,
            index_of,
            leq,
            meet,
            join,
            bottom,
            top,
            lower_covers,
            upper_covers,
        }
    }

    /// Reads a `.lat` file; the lattice is named after the file stem.
    pub fn from_file(path: impl AsRef<Path>, limits: &SizeLimits) -> Result<Lattice> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "lattice".into());
        build_lattice_with(&LatticeSpec::parse(name, &text)?, limits)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.size()).map(Elem::new)
    }

    pub fn bottom(&self) -> Elem {
        self.bottom
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    pub fn name_of(&self, e: Elem) -> &str {
        &self.names[e.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn elem(&self, name: &str) -> Option<Elem> {
        self.index_of.get(name).copied()
    }

    pub fn elem_or_err(&self, name: &str) -> Result<Elem> {
        self.elem(name)
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn contains(&self, e: Elem) -> bool {
        e.index() < self.size()
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.leq[a.index() * self.size() + b.index()]
    }

    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        self.meet[a.index() * self.size() + b.index()]
    }

    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        self.join[a.index() * self.size() + b.index()]
    }

    pub fn lower_covers(&self, e: Elem) -> &[Elem] {
        &self.lower_covers[e.index()]
    }

    pub fn upper_covers(&self, e: Elem) -> &[Elem] {
        &self.upper_covers[e.index()]
    }

    /// All `y >= e`, ascending by index.
    pub fn up_set(&self, e: Elem) -> Vec<Elem> {
        self.elements().filter(|&y| self.leq(e, y)).collect()
    }

    /// Elements strictly between bottom and top.
    pub fn interior(&self) -> Vec<Elem> {
        self.elements()
            .filter(|&e| e != self.bottom && e != self.top)
            .collect()
    }

    pub fn cover_pairs(&self) -> Vec<(Elem, Elem)> {
        self.elements()
            .flat_map(|x| self.upper_covers(x).iter().map(move |&y| (x, y)))
            .collect()
    }

    /// Renders the lattice in `.lat` format using its covering relation.
    pub fn to_lat_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "elements: {}", self.names.join(" "));
        for (lo, hi) in self.cover_pairs() {
            let _ = writeln!(out, "cover {} {}", self.name_of(lo), self.name_of(hi));
        }
        out
    }

    pub fn spec(&self) -> LatticeSpec {
        LatticeSpec {
            name: self.name.clone(),
            elements: self.names.clone(),
            covers: self
                .cover_pairs()
                .into_iter()
                .map(|(a, b)| (self.name_of(a).to_string(), self.name_of(b).to_string()))
                .collect(),
        }
    }
}

/// The `m`-element chain `c0 < c1 < ... < c(m-1)`.
pub fn chain(m: usize) -> Result<Lattice> {
    chain_with(m, &SizeLimits::default())
}

pub fn chain_with(m: usize, limits: &SizeLimits) -> Result<Lattice> {
    if m == 0 {
        return Err(Error::EmptyLattice);
    }
    limits.check_elements(m)?;
    let names = (0..m).map(|i| format!("c{i}")).collect();
    let mut leq = vec![false; m * m];
    for a in 0..m {
        for b in a..m {
            leq[a * m + b] = true;
        }
    }
    Lattice::from_order(format!("chain{m}"), names, leq)
}

/// Renders `bits` as an `r`-character 0/1 string, coordinate 1 first.
pub fn bit_string(bits: u64, r: u32) -> String {
    if r == 0 {
        return "0".to_string();
    }
    (0..r)
        .map(|i| if bits >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// The Boolean lattice of `r`-bit vectors. Element index equals the bit
/// pattern (coordinate `i` is bit `i - 1`), named by [`bit_string`].
pub fn boolean(r: u32) -> Result<Lattice> {
    boolean_with(r, &SizeLimits::default())
}

pub fn boolean_with(r: u32, limits: &SizeLimits) -> Result<Lattice> {
    if r >= 31 {
        return Err(Error::SizeGuardExceeded {
            what: "lattice elements",
            needed: format!("2^{r}"),
            limit: limits.max_elements as u64,
        });
    }
    let n = 1usize << r;
    limits.check_elements(n)?;
    let names = (0..n as u64).map(|b| bit_string(b, r)).collect();
    let mut leq = vec![false; n * n];
    let mut meet = vec![Elem(0); n * n];
    let mut join = vec![Elem(0); n * n];
    for a in 0..n {
        for b in 0..n {
            leq[a * n + b] = a & b == a;
            meet[a * n + b] = Elem::new(a & b);
            join[a * n + b] = Elem::new(a | b);
        }
    }
    let mut lower_covers = vec![Vec::new(); n];
    let mut upper_covers = vec![Vec::new(); n];
    for (a, (lower, upper)) in lower_covers
        .iter_mut()
        .zip(upper_covers.iter_mut())
        .enumerate()
    {
        for i in 0..r {
            let bit = 1usize << i;
            if a & bit != 0 {
                lower.push(Elem::new(a ^ bit));
            } else {
                upper.push(Elem::new(a | bit));
            }
        }
        lower.sort_unstable();
        upper.sort_unstable();
    }
    Ok(Lattice::assemble(
        format!("boolean{r}"),
        names,
        leq,
        meet,
        join,
        Elem::new(0),
        Elem::new(n - 1),
        lower_covers,
        upper_covers,
    ))
}

/// Componentwise product; `(x, y)` gets index `x * |L2| + y` and name `x_y`.
pub fn product(l1: &Lattice, l2: &Lattice) -> Result<Lattice> {
    product_with(l1, l2, &SizeLimits::default())
}

pub fn product_with(l1: &Lattice, l2: &Lattice, limits: &SizeLimits) -> Result<Lattice> {
    let (n1, n2) = (l1.size(), l2.size());
    let n = n1.checked_mul(n2).ok_or(Error::SizeGuardExceeded {
        what: "lattice elements",
        needed: format!("{n1}*{n2}"),
        limit: limits.max_elements as u64,
    })?;
    limits.check_elements(n)?;
    let mut names = Vec::with_capacity(n);
    for a in l1.elements() {
        for b in l2.elements() {
            names.push(format!("{}_{}", l1.name_of(a), l2.name_of(b)));
        }
    }
    let split = |i: usize| (Elem::new(i / n2), Elem::new(i % n2));
    let mut leq = vec![false; n * n];
    for x in 0..n {
        let (x1, x2) = split(x);
        for y in 0..n {
            let (y1, y2) = split(y);
            leq[x * n + y] = l1.leq(x1, y1) && l2.leq(x2, y2);
        }
    }
    Lattice::from_order(format!("{}x{}", l1.name(), l2.name()), names, leq)
}

/// Order dual. Index `i` of the dual is index `|L| - 1 - i` of `L`, so the
/// index order stays a linear extension and `dual(dual(L)) == L`.
pub fn dual(l: &Lattice) -> Lattice {
    let n = l.size();
    let flip = |e: Elem| Elem::new(n - 1 - e.index());
    let names = (0..n).rev().map(|i| l.names[i].clone()).collect();
    let mut leq = vec![false; n * n];
    let mut meet = vec![Elem(0); n * n];
    let mut join = vec![Elem(0); n * n];
    for x in l.elements() {
        for y in l.elements() {
            let (dx, dy) = (flip(x), flip(y));
            leq[dx.index() * n + dy.index()] = l.leq(y, x);
            meet[dx.index() * n + dy.index()] = flip(l.join(x, y));
            join[dx.index() * n + dy.index()] = flip(l.meet(x, y));
        }
    }
    let mut lower_covers = vec![Vec::new(); n];
    let mut upper_covers = vec![Vec::new(); n];
    for x in l.elements() {
        let mut lo: Vec<Elem> = l.upper_covers(x).iter().map(|&e| flip(e)).collect();
        let mut up: Vec<Elem> = l.lower_covers(x).iter().map(|&e| flip(e)).collect();
        lo.sort_unstable();
        up.sort_unstable();
        lower_covers[flip(x).index()] = lo;
        upper_covers[flip(x).index()] = up;
    }
    let name = match l.name.strip_prefix("dual_") {
        Some(orig) => orig.to_string(),
        None => format!("dual_{}", l.name),
    };
    Lattice::assemble(
        name,
        names,
        leq,
        meet,
        join,
        flip(l.top),
        flip(l.bottom),
        lower_covers,
        upper_covers,
    )
}

/// Maps an element of `L` to the same underlying element of `dual(L)`.
pub fn dual_elem(l: &Lattice, e: Elem) -> Elem {
    Elem::new(l.size() - 1 - e.index())
}
