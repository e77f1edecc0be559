#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use aggclone::lattice::{boolean, build_lattice, chain, LatticeSpec};
use aggclone::{Lattice, SizeLimits};

pub fn fixture_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "fixtures", name]
        .iter()
        .collect()
}

pub fn from_fixture(name: &str) -> Arc<Lattice> {
    Arc::new(Lattice::from_file(fixture_path(name), &SizeLimits::default()).unwrap())
}

/// Every lattice with three to five elements, up to isomorphism.
pub fn fixture_lattices() -> Vec<Arc<Lattice>> {
    let extra_bottom = LatticeSpec::new(
        "bottom_b2",
        &["z", "0", "a", "b", "1"],
        &[("z", "0"), ("0", "a"), ("0", "b"), ("a", "1"), ("b", "1")],
    );
    let extra_top = LatticeSpec::new(
        "b2_top",
        &["0", "a", "b", "1", "t"],
        &[("0", "a"), ("0", "b"), ("a", "1"), ("b", "1"), ("1", "t")],
    );
    vec![
        from_fixture("chain3.lat"),
        Arc::new(chain(4).unwrap()),
        Arc::new(boolean(2).unwrap()),
        Arc::new(chain(5).unwrap()),
        from_fixture("n5.lat"),
        from_fixture("m3.lat"),
        Arc::new(build_lattice(&extra_bottom).unwrap()),
        Arc::new(build_lattice(&extra_top).unwrap()),
    ]
}

/// Every bounded poset whose interior is a labeled poset on at most three
/// points. All of these are lattices; up to relabeling they are all
/// lattices with at most five elements.
pub fn all_small_lattices() -> Vec<Arc<Lattice>> {
    let mut out = vec![Arc::new(chain(1).unwrap()), Arc::new(chain(2).unwrap())];
    for m in 1..=3usize {
        let pairs: Vec<(usize, usize)> = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .collect();
        for mask in 0u32..1 << pairs.len() {
            let rel = |i: usize, j: usize| {
                i == j
                    || pairs
                        .iter()
                        .position(|&p| p == (i, j))
                        .is_some_and(|k| mask >> k & 1 == 1)
            };
            let antisymmetric = (0..m).all(|i| (0..m).all(|j| i == j || !(rel(i, j) && rel(j, i))));
            let transitive = (0..m)
                .all(|i| (0..m).all(|j| (0..m).all(|k| !(rel(i, j) && rel(j, k)) || rel(i, k))));
            if !antisymmetric || !transitive {
                continue;
            }
            let names: Vec<String> = std::iter::once("bot".to_string())
                .chain((0..m).map(|i| format!("p{i}")))
                .chain(std::iter::once("top".to_string()))
                .collect();
            let mut covers: Vec<(String, String)> = Vec::new();
            for i in 0..m {
                covers.push(("bot".into(), names[i + 1].clone()));
                covers.push((names[i + 1].clone(), "top".into()));
                for j in 0..m {
                    if i != j && rel(i, j) {
                        covers.push((names[i + 1].clone(), names[j + 1].clone()));
                    }
                }
            }
            let el: Vec<&str> = names.iter().map(String::as_str).collect();
            let cv: Vec<(&str, &str)> = covers
                .iter()
                .map(|(a, b)| (a.as_str(), b.as_str()))
                .collect();
            let spec = LatticeSpec::new(format!("small{m}_{mask}"), &el, &cv);
            out.push(Arc::new(build_lattice(&spec).unwrap()));
        }
    }
    out
}
