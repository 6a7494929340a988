//! Closed-form reference states and graph states.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::state::{PureState, SystemShape, C64};

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Builds a normalized state from `(coefficient, basis label)` terms.
fn from_terms(dims: Vec<usize>, terms: impl IntoIterator<Item = (C64, Vec<usize>)>) -> PureState {
    let shape = SystemShape::new(dims).expect("valid zoo shape");
    let mut amps = vec![C64::new(0.0, 0.0); shape.total_dim()];
    for (c, label) in terms {
        amps[shape.index_of(&label)] += c;
    }
    PureState::new(shape, amps).expect("nonzero zoo state")
}

/// `Σ_j |j...j> / √d` on `n` parties of dimension `d`.
pub fn ghz(n: usize, d: usize) -> Result<PureState> {
    SystemShape::uniform(n, d)?;
    if n < 2 {
        return Err(Error::InvalidShape("GHZ needs n >= 2".into()));
    }
    Ok(from_terms(vec![d; n], (0..d).map(|j| (one(), vec![j; n]))))
}

/// Equal superposition of all single-excitation kets on `n` qubits.
pub fn w_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidShape("W needs n >= 2".into()));
    }
    Ok(from_terms(
        vec![2; n],
        (0..n).map(|k| {
            let mut label = vec![0; n];
            label[n - 1 - k] = 1;
            (one(), label)
        }),
    ))
}

/// Two-qudit maximally entangled state `Σ_j |jj> / √d`.
pub fn bell_qudit(d: usize) -> Result<PureState> {
    ghz(2, d)
}

/// Four-qubit phased Dicke state
/// `(|GHZ> + ω |GHZ_{34}> + ω² |GHZ_{24}>)/√3` with `ω = e^{2πi/3}`, where
/// `GHZ_{ij}` carries bit flips on parties `i` and `j` (1-based).
pub fn m_tilde() -> PureState {
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let w2 = C64::from_polar(1.0, 4.0 * PI / 3.0);
    from_terms(
        vec![2; 4],
        [
            (one(), vec![0, 0, 0, 0]),
            (one(), vec![1, 1, 1, 1]),
            (w, vec![0, 0, 1, 1]),
            (w, vec![1, 1, 0, 0]),
            (w2, vec![0, 1, 0, 1]),
            (w2, vec![1, 0, 1, 0]),
        ],
    )
}

fn permutations(n: usize) -> Vec<(Vec<usize>, i32)> {
    // Heap's algorithm, tracking the sign of each permutation
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1;
    out.push((a.clone(), sign));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            out.push((a.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Totally antisymmetric state of `n` parties with `n` levels each,
/// `Σ_σ sgn(σ) |σ(0) ... σ(n-1)> / √n!`.
pub fn antisymmetric(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidShape("antisymmetric state needs n >= 2".into()));
    }
    SystemShape::uniform(n, n)?;
    Ok(from_terms(
        vec![n; n],
        permutations(n)
            .into_iter()
            .map(|(p, s)| (C64::new(s as f64, 0.0), p)),
    ))
}

/// `Σ_{i,j} |i>|j>|i+j mod d> / d`.
pub fn ame_3d(d: usize) -> Result<PureState> {
    SystemShape::uniform(3, d)?;
    Ok(from_terms(
        vec![d; 3],
        (0..d).flat_map(|i| (0..d).map(move |j| (one(), vec![i, j, (i + j) % d]))),
    ))
}

/// Four-qutrit AME state with nine terms of equal weight.
pub fn ame_43() -> PureState {
    let labels = [
        [0, 0, 0, 0],
        [0, 1, 1, 2],
        [0, 2, 2, 1],
        [1, 0, 1, 1],
        [1, 1, 2, 0],
        [1, 2, 0, 2],
        [2, 0, 2, 2],
        [2, 1, 0, 1],
        [2, 2, 1, 0],
    ];
    from_terms(vec![3; 4], labels.iter().map(|l| (one(), l.to_vec())))
}

/// `Σ_{i,j,l} ω^{il} |i>|j>|i+j>|l+j>|l> / d^{3/2}` with `ω = e^{2πi/d}`,
/// sums taken mod `d`.
pub fn ame_5d(d: usize) -> Result<PureState> {
    SystemShape::uniform(5, d)?;
    let mut terms = Vec::with_capacity(d * d * d);
    for i in 0..d {
        for j in 0..d {
            for l in 0..d {
                let phase = C64::from_polar(1.0, 2.0 * PI * ((i * l) % d) as f64 / d as f64);
                terms.push((phase, vec![i, j, (i + j) % d, (l + j) % d, l]));
            }
        }
    }
    Ok(from_terms(vec![d; 5], terms))
}

/// Three-ququad 1-uniform state with eight terms of equal weight and
/// geometric measure 7/8.
pub fn phi_34() -> PureState {
    let labels = [
        [0, 2, 2],
        [0, 3, 3],
        [1, 2, 0],
        [1, 3, 1],
        [2, 1, 2],
        [2, 0, 3],
        [3, 1, 0],
        [3, 0, 1],
    ];
    from_terms(vec![4; 3], labels.iter().map(|l| (one(), l.to_vec())))
}

/// Three-qubit partner of W spanning the maximally entangled plane:
/// `(|011> + ω|110> + ω²|101>)/√3`.
pub fn v_state() -> PureState {
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let w2 = C64::from_polar(1.0, 4.0 * PI / 3.0);
    from_terms(
        vec![2; 3],
        [(one(), vec![0, 1, 1]), (w, vec![1, 1, 0]), (w2, vec![1, 0, 1])],
    )
}

/// Two-qutrit singlet embedded in levels 0 and 1.
pub fn chi_1() -> PureState {
    from_terms(
        vec![3, 3],
        [(one(), vec![0, 1]), (-one(), vec![1, 0])],
    )
}

/// `(|20> + |02> + √6 (|21> + |12>))/√14`.
pub fn chi_2() -> PureState {
    let s6 = C64::new(6f64.sqrt(), 0.0);
    from_terms(
        vec![3, 3],
        [
            (one(), vec![2, 0]),
            (one(), vec![0, 2]),
            (s6, vec![2, 1]),
            (s6, vec![1, 2]),
        ],
    )
}

/// Graph state `Π_{(a,b)∈E} CZ_{a,b} |+>^{⊗|V|}`; vertex `i` is party `i`.
pub fn graph_state(graph: &Graph) -> Result<PureState> {
    let n = graph.vertices();
    let shape = SystemShape::uniform(n, 2)?;
    let amp = (shape.total_dim() as f64).sqrt().recip();
    let mut amps = vec![C64::new(amp, 0.0); shape.total_dim()];
    for &(a, b) in graph.edges() {
        // CZ = Σ_k |k><k|_a ⊗ Z_b^k: flip the sign where both bits are set
        let (ma, mb) = (1usize << (n - 1 - a), 1usize << (n - 1 - b));
        for (idx, z) in amps.iter_mut().enumerate() {
            if idx & ma != 0 && idx & mb != 0 {
                *z = -*z;
            }
        }
    }
    PureState::new(shape, amps)
}

/// Edge lists shipped with the crate.
pub const NAMED_GRAPHS: [(&str, &str); 6] = [
    ("bell", include_str!("../data/graphs/bell.txt")),
    ("ghz_star_3", include_str!("../data/graphs/ghz_star_3.txt")),
    ("ring5", include_str!("../data/graphs/ring5.txt")),
    ("g6", include_str!("../data/graphs/g6.txt")),
    ("fano", include_str!("../data/graphs/fano.txt")),
    ("ame44_pairs", include_str!("../data/graphs/ame44_pairs.txt")),
];

pub fn named_graph(name: &str) -> Result<Graph> {
    NAMED_GRAPHS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownName(name.to_string()))
        .and_then(|(_, text)| Graph::parse_edge_list(text))
}

/// All named graphs, in catalog order.
pub fn named_graphs() -> Vec<(&'static str, Graph)> {
    NAMED_GRAPHS
        .iter()
        .map(|(n, text)| (*n, Graph::parse_edge_list(text).expect("shipped graph parses")))
        .collect()
}

/// The eight-qubit `ame44_pairs` graph state read as four 4-level parties.
pub fn ame44_pairs() -> PureState {
    graph_state(&named_graph("ame44_pairs").expect("shipped"))
        .and_then(|s| s.group_parties(&[2, 2, 2, 2]))
        .expect("eight qubits group into four ququads")
}

/// Names accepted by [`by_name`] with a one-line description each.
pub const CATALOG: [(&str, &str); 24] = [
    ("bell", "two-qubit Bell pair (|00>+|11>)/sqrt2"),
    ("bell3", "two-qutrit maximally entangled state"),
    ("bell4", "two-ququad maximally entangled state"),
    ("ghz3", "three-qubit GHZ"),
    ("ghz4", "four-qubit GHZ"),
    ("w3", "three-qubit W"),
    ("w4", "four-qubit W"),
    ("m_tilde", "four-qubit phased Dicke state (LU-equivalent to the M state)"),
    ("psi3", "three-qutrit antisymmetric state"),
    ("psi4", "four-ququad antisymmetric state"),
    ("ame33", "sum_ij |i,j,i+j> on three qutrits"),
    ("ame34", "sum_ij |i,j,i+j> on three ququads"),
    ("ame43", "four-qutrit AME state"),
    ("ame53", "five-qutrit AME state"),
    ("ame54", "five-ququad AME state"),
    ("phi34", "three-ququad 1-uniform state with G = 7/8"),
    ("v3", "three-qubit partner of W in the maximally entangled plane"),
    ("chi1", "two-qutrit embedded singlet"),
    ("chi2", "two-qutrit partner of chi1"),
    ("graph:bell", "graph state of a single edge"),
    ("graph:ring5", "five-cycle graph state"),
    ("graph:g6", "six-qubit AME graph state"),
    ("graph:fano", "seven-qubit Fano graph state"),
    ("ame44_pairs", "eight-qubit graph state grouped into four ququads"),
];

/// Looks up a reference state by catalog name. `graph:<name>` selects any
/// named graph; `bell<d>`, `ghz<n>`, `w<n>` and `psi<n>` accept other sizes.
pub fn by_name(name: &str) -> Result<PureState> {
    let unknown = || Error::UnknownName(name.to_string());
    if let Some(g) = name.strip_prefix("graph:") {
        return graph_state(&named_graph(g)?);
    }
    let sized = |prefix: &str| -> Option<usize> { name.strip_prefix(prefix).and_then(|s| s.parse().ok()) };
    match name {
        "bell" => bell_qudit(2),
        "m_tilde" => Ok(m_tilde()),
        "ame33" => ame_3d(3),
        "ame34" => ame_3d(4),
        "ame43" => Ok(ame_43()),
        "ame53" => ame_5d(3),
        "ame54" => ame_5d(4),
        "phi34" => Ok(phi_34()),
        "v3" => Ok(v_state()),
        "chi1" => Ok(chi_1()),
        "chi2" => Ok(chi_2()),
        "ame44_pairs" => Ok(ame44_pairs()),
        _ => {
            if let Some(d) = sized("bell") {
                bell_qudit(d)
            } else if let Some(n) = sized("ghz") {
                ghz(n, 2)
            } else if let Some(n) = sized("w") {
                w_state(n)
            } else if let Some(n) = sized("psi") {
                antisymmetric(n)
            } else {
                Err(unknown())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_amplitudes() {
        let g = ghz(3, 2).unwrap();
        assert!((g.amplitude(&[0, 0, 0]).re - 0.5f64.sqrt()).abs() < 1e-15);
        let w = w_state(3).unwrap();
        assert!((w.amplitude(&[0, 0, 1]).re - 3f64.sqrt().recip()).abs() < 1e-15);
        assert!(w.amplitude(&[0, 1, 1]).norm() < 1e-15);
        let m = m_tilde();
        assert!((m.amplitude(&[0, 0, 0, 0]).re - 6f64.sqrt().recip()).abs() < 1e-15);
    }

    #[test]
    fn antisymmetric_signs() {
        let p = antisymmetric(3).unwrap();
        let s = 6f64.sqrt().recip();
        assert!((p.amplitude(&[0, 1, 2]).re - s).abs() < 1e-15);
        assert!((p.amplitude(&[2, 0, 1]).re - s).abs() < 1e-15);
        assert!((p.amplitude(&[2, 1, 0]).re + s).abs() < 1e-15);
        assert!((p.amplitude(&[0, 2, 1]).re + s).abs() < 1e-15);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn antisymmetric_flips_under_swaps() {
        for n in 3..=4 {
            let p = antisymmetric(n).unwrap();
            for i in 0..n {
                for j in i + 1..n {
                    let mut perm: Vec<usize> = (0..n).collect();
                    perm.swap(i, j);
                    let q = p.permute_parties(&perm).unwrap();
                    assert!((p.inner(&q).unwrap().re + 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zoo_states_are_normalized() {
        for (name, _) in CATALOG {
            let s = by_name(name).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12, "{name}");
        }
        assert!(by_name("nope").is_err());
    }

    #[test]
    fn empty_graph_is_plus_product() {
        let s = graph_state(&Graph::empty(3).unwrap()).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - 8f64.sqrt().recip()).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn graph_state_ignores_edge_order() {
        let g = named_graph("fano").unwrap();
        let mut rev: Vec<_> = g.edges().iter().rev().map(|&(a, b)| (b, a)).collect();
        rev.rotate_left(3);
        let h = Graph::new(g.vertices(), rev).unwrap();
        assert_eq!(graph_state(&g).unwrap(), graph_state(&h).unwrap());
    }

    #[test]
    fn orthogonal_subspace_partners() {
        let w = w_state(3).unwrap();
        assert!(w.inner(&v_state()).unwrap().norm() < 1e-15);
        assert!(chi_1().inner(&chi_2()).unwrap().norm() < 1e-15);
    }
}
