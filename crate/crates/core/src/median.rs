//! Medians on the hypercube `Q_r`, seen as the Boolean lattice of `r`-bit
//! vectors.
//!
//! A vertex is a bit-packed integer with coordinate `i` at bit `i - 1`, the
//! same packing used for element indices of [`crate::lattice::boolean`].

use std::fmt;
use std::sync::Arc;

use crate::basis::oplus;
use crate::error::{Error, Result};
use crate::lattice::{bit_string, boolean_with, Elem, Lattice};
use crate::limits::SizeLimits;
use crate::table::FnTable;
use crate::term::{term_to_table, ExtRegistry, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    bits: u64,
    r: u32,
}

impl Vertex {
    pub fn new(bits: u64, r: u32) -> Result<Vertex> {
        if r > 63 || bits >> r != 0 {
            return Err(Error::InvalidElement(bits as usize));
        }
        Ok(Vertex { bits, r })
    }

    /// Parses a 0/1 string, coordinate 1 first.
    pub fn parse(s: &str) -> Result<Vertex> {
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' if i < 63 => bits |= 1 << i,
                _ => return Err(Error::InvalidName(s.to_string())),
            }
        }
        Vertex::new(bits, s.chars().count() as u32)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn dim(self) -> u32 {
        self.r
    }

    pub fn coord(self, i: u32) -> bool {
        self.bits >> (i - 1) & 1 == 1
    }

    pub fn elem(self) -> Elem {
        Elem::new(self.bits as usize)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bit_string(self.bits, self.r))
    }
}

fn same_dim(vs: &[Vertex]) -> Result<u32> {
    let r = vs[0].r;
    match vs.iter().find(|v| v.r != r) {
        Some(v) => Err(Error::DimensionMismatch(r, v.r)),
        None => Ok(r),
    }
}

/// Coordinatewise majority.
pub fn median_rule(x: Vertex, y: Vertex, z: Vertex) -> Result<Vertex> {
    let r = same_dim(&[x, y, z])?;
    let bits = (x.bits & y.bits) | (y.bits & z.bits) | (x.bits & z.bits);
    Ok(Vertex { bits, r })
}

/// `w_i` is the coordinate mean `(x_i + y_i + z_i) / 3` rounded to the
/// nearest integer, computed coordinate by coordinate.
///
/// Rounding up instead would send a single 1 to 1 and give the
/// coordinatewise join, not the majority.
pub fn rounded_mean_median(x: Vertex, y: Vertex, z: Vertex) -> Result<Vertex> {
    let r = same_dim(&[x, y, z])?;
    let mut bits = 0u64;
    for i in 1..=r {
        let sum = x.coord(i) as u32 + y.coord(i) as u32 + z.coord(i) as u32;
        let w = (2 * sum + 3) / 6;
        bits |= (w as u64) << (i - 1);
    }
    Ok(Vertex { bits, r })
}

pub fn hamming(x: Vertex, y: Vertex) -> Result<u32> {
    same_dim(&[x, y])?;
    Ok((x.bits ^ y.bits).count_ones())
}

/// Whether the median is the unique vertex minimizing the distance sum.
pub fn median_is_optimal(x: Vertex, y: Vertex, z: Vertex) -> Result<bool> {
    let m = median_rule(x, y, z)?;
    let cost = |w: Vertex| -> u32 {
        (w.bits ^ x.bits).count_ones()
            + (w.bits ^ y.bits).count_ones()
            + (w.bits ^ z.bits).count_ones()
    };
    let best = cost(m);
    Ok((0..1u64 << m.r)
        .map(|bits| Vertex { bits, r: m.r })
        .all(|w| w == m || cost(w) > best))
}

/// `Q_r` together with its Boolean lattice.
#[derive(Debug, Clone)]
pub struct Hypercube {
    r: u32,
    lattice: Arc<Lattice>,
}

impl Hypercube {
    pub fn new(r: u32) -> Result<Hypercube> {
        Hypercube::with_limits(r, &SizeLimits::default())
    }

    pub fn with_limits(r: u32, limits: &SizeLimits) -> Result<Hypercube> {
        Ok(Hypercube {
            r,
            lattice: Arc::new(boolean_with(r, limits)?),
        })
    }

    pub fn dim(&self) -> u32 {
        self.r
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.lattice.size() as u64).map(move |bits| Vertex { bits, r: self.r })
    }

    pub fn vertex(&self, e: Elem) -> Vertex {
        Vertex {
            bits: e.index() as u64,
            r: self.r,
        }
    }

    fn check(&self, v: Vertex) -> Result<()> {
        if v.r != self.r {
            return Err(Error::DimensionMismatch(self.r, v.r));
        }
        Ok(())
    }

    /// The median as a ternary table.
    pub fn median_table(&self) -> Result<FnTable> {
        let r = self.r;
        FnTable::from_fn(self.lattice.clone(), 3, &SizeLimits::default(), |t| {
            let v = |e: Elem| Vertex {
                bits: e.index() as u64,
                r,
            };
            median_rule(v(t[0]), v(t[1]), v(t[2]))
                .expect("same dimension")
                .elem()
        })
    }

    /// `(x, y) -> median(v, x, y)`.
    pub fn f_v(&self, v: Vertex) -> Result<FnTable> {
        self.check(v)?;
        let r = self.r;
        FnTable::from_fn(self.lattice.clone(), 2, &SizeLimits::default(), |t| {
            let w = |e: Elem| Vertex {
                bits: e.index() as u64,
                r,
            };
            median_rule(v, w(t[0]), w(t[1]))
                .expect("same dimension")
                .elem()
        })
    }

    /// `fv(chi[bottom](x1 \/ x2), chi[top](x1 /\ x2))`, checked against
    /// `(+)[v]` on every pair.
    pub fn oplus_from_fv(&self, v: Vertex) -> Result<Term> {
        let l = &self.lattice;
        let mut reg = ExtRegistry::new();
        reg.register("fv", self.f_v(v)?)?;
        let term = Term::ext(
            "fv",
            vec![
                Term::chi(l.bottom(), Term::join(Term::var(1), Term::var(2))),
                Term::chi(l.top(), Term::meet(Term::var(1), Term::var(2))),
            ],
        );
        let table = term_to_table(&term, l, 2, &reg)?;
        if table != oplus(l, v.elem()) {
            return Err(Error::VerificationFailed(format!(
                "fv-term differs from (+)[{v}] on Q_{}",
                self.r
            )));
        }
        Ok(term)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{chi, is_near_unanimity, majority_joinmeet, majority_meetjoin};
    use crate::clone::closure_until;
    use crate::term::{eval, parse};

    fn v(s: &str) -> Vertex {
        Vertex::parse(s).unwrap()
    }

    #[test]
    fn majority_examples() {
        assert_eq!(median_rule(v("110"), v("100"), v("010")).unwrap(), v("110"));
        let (x, z) = (v("101"), v("011"));
        assert_eq!(median_rule(x, x, z).unwrap(), x);
        assert!(matches!(
            median_rule(v("10"), v("100"), v("000")),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn vertex_names() {
        let x = Vertex::new(0b011, 3).unwrap();
        assert_eq!(x.to_string(), "110");
        assert_eq!(v("110"), x);
        assert!(Vertex::new(8, 3).is_err());
        assert!(Vertex::parse("12").is_err());
    }

    #[test]
    fn rule_matches_rounded_mean_and_terms() {
        for r in 0..=3 {
            let q = Hypercube::new(r).unwrap();
            let l = q.lattice();
            let reg = ExtRegistry::new();
            let a = parse("(x1 /\\ x2) \\/ (x2 /\\ x3) \\/ (x1 /\\ x3)", l).unwrap();
            let b = parse("(x1 \\/ x2) /\\ (x2 \\/ x3) /\\ (x1 \\/ x3)", l).unwrap();
            for x in q.vertices() {
                for y in q.vertices() {
                    for z in q.vertices() {
                        let m = median_rule(x, y, z).unwrap();
                        assert_eq!(rounded_mean_median(x, y, z).unwrap(), m);
                        let env = [x.elem(), y.elem(), z.elem()];
                        assert_eq!(eval(&a, l, &env, &reg).unwrap(), m.elem());
                        assert_eq!(eval(&b, l, &env, &reg).unwrap(), m.elem());
                    }
                }
            }
            let t = q.median_table().unwrap();
            assert!(t.is_aggregation());
            assert_eq!(t, majority_meetjoin(l));
            assert_eq!(t, majority_joinmeet(l));
            assert!(is_near_unanimity(&t).unwrap());
        }
    }

    #[test]
    fn f_v_extremes() {
        let q = Hypercube::new(3).unwrap();
        let l = q.lattice().clone();
        assert_eq!(q.f_v(v("000")).unwrap(), FnTable::meet_table(l.clone()));
        assert_eq!(q.f_v(v("111")).unwrap(), FnTable::join_table(l.clone()));
        for u in q.vertices() {
            let f = q.f_v(u).unwrap();
            assert!(f.is_aggregation());
            for x in q.vertices() {
                assert_eq!(f.apply(&[x.elem(), x.elem()]).unwrap(), x.elem());
            }
        }
    }

    #[test]
    fn oplus_identity_holds() {
        let q2 = Hypercube::new(2).unwrap();
        q2.oplus_from_fv(v("10")).unwrap();
        let q3 = Hypercube::new(3).unwrap();
        for u in q3.vertices() {
            q3.oplus_from_fv(u).unwrap();
        }
        assert!(matches!(
            q3.oplus_from_fv(v("10")),
            Err(Error::DimensionMismatch(3, 2))
        ));
    }

    #[test]
    fn distances_and_optimality() {
        assert_eq!(hamming(v("110"), v("100")).unwrap(), 1);
        let (x, y, z) = (v("00"), v("01"), v("10"));
        assert_eq!(median_rule(x, y, z).unwrap(), v("00"));
        assert!(median_is_optimal(x, y, z).unwrap());
        let q = Hypercube::new(3).unwrap();
        for x in q.vertices() {
            for y in q.vertices() {
                for z in q.vertices() {
                    assert!(median_is_optimal(x, y, z).unwrap());
                }
            }
        }
    }

    #[test]
    fn fv_family_generates_every_oplus_on_q2() {
        let q = Hypercube::new(2).unwrap();
        let l = q.lattice();
        let mut basis = vec![
            FnTable::meet_table(l.clone()),
            FnTable::join_table(l.clone()),
        ];
        for u in q.vertices() {
            basis.push(chi(l, u.elem()));
            basis.push(q.f_v(u).unwrap());
        }
        let targets: Vec<FnTable> = q.vertices().map(|u| oplus(l, u.elem())).collect();
        let c = closure_until(&basis, 2, &SizeLimits::default(), &targets).unwrap();
        assert!(targets.iter().all(|t| c.set.contains(t)));
    }
}
