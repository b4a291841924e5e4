//! Communicating classes, closed classes, periods and regime classification.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;
use std::collections::VecDeque;

use crate::chain::{DampingVector, Distribution, StochasticMatrix, DEFAULT_ROW_TOL};
use crate::error::{ChainError, Result};

/// Which family of results applies to the unperturbed chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// One aperiodic closed class covering every state.
    Regular,
    /// Two or more aperiodic closed classes covering every state.
    Singular,
    Unsupported,
}

/// A closed communicating class. `states` are 0-based and ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosedClass {
    pub states: Vec<usize>,
    pub aperiodic: bool,
    pub period: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainStructure {
    pub classes: Vec<ClosedClass>,
    pub transient_states: Vec<usize>,
    pub regime: Regime,
    pub diagnostic: Option<String>,
}

impl ChainStructure {
    /// Index of the closed class containing `state`, if any.
    pub fn class_of(&self, state: usize) -> Option<usize> {
        self.classes
            .iter()
            .position(|c| c.states.binary_search(&state).is_ok())
    }

    pub fn require_supported(&self) -> Result<()> {
        if self.regime == Regime::Unsupported {
            return Err(ChainError::Unsupported(
                self.diagnostic
                    .clone()
                    .unwrap_or_else(|| "chain is neither regular nor singular".into()),
            ));
        }
        Ok(())
    }
}

/// Splits the state space of `p0` into closed classes and transient states.
///
/// Edges are the strictly positive entries.
pub fn decompose(p0: &StochasticMatrix) -> ChainStructure {
    let m = p0.dim();
    let mut graph = DiGraph::<(), ()>::with_capacity(m, 0);
    let nodes: Vec<_> = (0..m).map(|_| graph.add_node(())).collect();
    for i in 0..m {
        for j in 0..m {
            if p0.get(i, j) > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }

    let mut component = vec![0usize; m];
    let sccs = tarjan_scc(&graph);
    for (c, scc) in sccs.iter().enumerate() {
        for node in scc {
            component[node.index()] = c;
        }
    }

    let mut classes = Vec::new();
    let mut transient_states = Vec::new();
    for scc in &sccs {
        let mut states: Vec<usize> = scc.iter().map(|n| n.index()).collect();
        states.sort_unstable();
        let c = component[states[0]];
        let closed = states
            .iter()
            .all(|&i| (0..m).all(|j| p0.get(i, j) == 0.0 || component[j] == c));
        if closed {
            let period = class_period(p0, &states);
            classes.push(ClosedClass {
                states,
                aperiodic: period == 1,
                period,
            });
        } else {
            transient_states.extend(states);
        }
    }
    classes.sort_by_key(|c| c.states[0]);
    transient_states.sort_unstable();

    let periodic: Vec<usize> = classes
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.aperiodic)
        .map(|(j, _)| j)
        .collect();
    let (regime, diagnostic) = if !transient_states.is_empty() {
        let ids: Vec<String> = transient_states
            .iter()
            .map(|s| (s + 1).to_string())
            .collect();
        (
            Regime::Unsupported,
            Some(format!("transient states present: {}", ids.join(", "))),
        )
    } else if !periodic.is_empty() {
        let desc: Vec<String> = periodic
            .iter()
            .map(|&j| format!("class {} has period {}", j + 1, classes[j].period))
            .collect();
        (Regime::Unsupported, Some(desc.join("; ")))
    } else if classes.len() == 1 {
        (Regime::Regular, None)
    } else {
        (Regime::Singular, None)
    };

    ChainStructure {
        classes,
        transient_states,
        regime,
        diagnostic,
    }
}

/// gcd over all class edges u → v of level(u) + 1 − level(v), levels from a BFS.
fn class_period(p0: &StochasticMatrix, states: &[usize]) -> usize {
    let m = p0.dim();
    let mut level = vec![usize::MAX; m];
    let mut queue = VecDeque::new();
    level[states[0]] = 0;
    queue.push_back(states[0]);
    let mut g = 0usize;
    while let Some(u) = queue.pop_front() {
        for v in 0..m {
            if p0.get(u, v) <= 0.0 {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                let diff = (level[u] + 1).abs_diff(level[v]);
                g = gcd(g, diff);
            }
        }
    }
    g.max(1)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Mass that `p` puts on each closed class.
pub fn class_mass(p: &Distribution, structure: &ChainStructure) -> Result<Vec<f64>> {
    let probs = p.probs();
    let transient: f64 = structure.transient_states.iter().map(|&i| probs[i]).sum();
    if structure.regime == Regime::Unsupported && transient > 0.0 {
        return Err(ChainError::Unsupported(format!(
            "distribution puts mass {transient} on transient states"
        )));
    }
    Ok(structure
        .classes
        .iter()
        .map(|c| c.states.iter().map(|&i| probs[i]).sum())
        .collect())
}

/// The transition matrix of the chain confined to a closed class.
pub fn restrict(p0: &StochasticMatrix, class: &ClosedClass) -> Result<StochasticMatrix> {
    let k = class.states.len();
    let mut data = Vec::with_capacity(k * k);
    for (r, &i) in class.states.iter().enumerate() {
        let inside: f64 = class.states.iter().map(|&j| p0.get(i, j)).sum();
        let leak = 1.0 - inside;
        if leak.abs() > DEFAULT_ROW_TOL {
            return Err(ChainError::NotClosed {
                class: r,
                state: i,
                leak,
            });
        }
        data.extend(class.states.iter().map(|&j| p0.get(i, j)));
    }
    Ok(StochasticMatrix::from_raw(k, data))
}

/// The damping vector restricted to a class and renormalized, with the class mass.
pub fn restrict_damping(d: &DampingVector, class: &ClosedClass) -> Result<(DampingVector, f64)> {
    let mass: f64 = class.states.iter().map(|&i| d.weights()[i]).sum();
    let weights = class
        .states
        .iter()
        .map(|&i| d.weights()[i] / mass)
        .collect();
    Ok((DampingVector::with_tolerance(weights, 1e-10)?, mass))
}

/// `p` restricted to a class and renormalized; `None` when the class has no mass.
pub fn restrict_distribution(p: &Distribution, class: &ClosedClass) -> (Option<Vec<f64>>, f64) {
    let mass: f64 = class.states.iter().map(|&i| p.probs()[i]).sum();
    if mass <= 0.0 {
        return (None, 0.0);
    }
    let v = class.states.iter().map(|&i| p.probs()[i] / mass).collect();
    (Some(v), mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_example() -> StochasticMatrix {
        let t = 1.0 / 3.0;
        let mut rows = vec![vec![0.0; 8]; 8];
        let a = [
            [0.0, 1.0, 0.0, 0.0],
            [t, 0.0, t, t],
            [0.0, 0.5, 0.0, 0.5],
            [0.0, 0.5, 0.5, 0.0],
        ];
        let b = [
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.5, 0.5],
            [t, t, 0.0, t],
            [t, t, t, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                rows[i][j] = a[i][j];
                rows[i + 4][j + 4] = b[i][j];
            }
        }
        StochasticMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn two_closed_classes() {
        let s = decompose(&block_example());
        assert_eq!(s.regime, Regime::Singular);
        assert_eq!(s.classes.len(), 2);
        assert_eq!(s.classes[0].states, vec![0, 1, 2, 3]);
        assert_eq!(s.classes[1].states, vec![4, 5, 6, 7]);
        assert!(s.classes.iter().all(|c| c.aperiodic));
        assert_eq!(s.class_of(6), Some(1));
    }

    #[test]
    fn periodic_cycle_is_unsupported() {
        let p = StochasticMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = decompose(&p);
        assert_eq!(s.classes.len(), 1);
        assert_eq!(s.classes[0].period, 2);
        assert_eq!(s.regime, Regime::Unsupported);
    }

    #[test]
    fn three_cycle_with_chord_period() {
        // 0→1→2→0 and 0→2: cycle lengths 3 and 2.
        let p = StochasticMatrix::from_rows(&[
            vec![0.0, 0.5, 0.5],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(decompose(&p).classes[0].period, 1);
        let p = StochasticMatrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(decompose(&p).classes[0].period, 3);
    }

    #[test]
    fn transient_states_reported() {
        let p = StochasticMatrix::from_rows(&[
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.5, 0.5],
            vec![0.0, 0.5, 0.5],
        ])
        .unwrap();
        let s = decompose(&p);
        assert_eq!(s.transient_states, vec![0]);
        assert_eq!(s.regime, Regime::Unsupported);
        assert!(class_mass(&Distribution::uniform(3), &s).is_err());
        assert_eq!(
            class_mass(&Distribution::point_mass(3, 1).unwrap(), &s).unwrap(),
            vec![1.0]
        );
    }

    #[test]
    fn class_masses_and_restriction() {
        let p0 = block_example();
        let s = decompose(&p0);
        let d = DampingVector::uniform(8);
        assert_eq!(
            class_mass(&d.to_distribution(), &s).unwrap(),
            vec![0.5, 0.5]
        );
        let e1 = Distribution::point_mass(8, 0).unwrap();
        assert_eq!(class_mass(&e1, &s).unwrap(), vec![1.0, 0.0]);

        let p01 = restrict(&p0, &s.classes[0]).unwrap();
        assert_eq!(p01.row(2), &[0.0, 0.5, 0.0, 0.5]);
        let (d1, mass) = restrict_damping(&d, &s.classes[0]).unwrap();
        assert_eq!(mass, 0.5);
        assert_eq!(d1.weights(), &[0.25; 4]);

        let open = ClosedClass {
            states: vec![0, 1],
            aperiodic: true,
            period: 1,
        };
        assert!(matches!(
            restrict(&p0, &open),
            Err(ChainError::NotClosed { .. })
        ));
    }
}
