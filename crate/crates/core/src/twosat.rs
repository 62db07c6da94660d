//! 2-SAT: satisfiability through the implication graph and its strongly
//! connected components, plus a deterministic assignment that prefers
//! `false`.

use std::fmt::Write as _;

use crate::graph::strongly_connected;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lit {
    pub var: usize,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Self {
        Self { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, positive: false }
    }

    pub fn negated(self) -> Self {
        Self {
            var: self.var,
            positive: !self.positive,
        }
    }

    #[inline]
    fn node(self) -> usize {
        2 * self.var + usize::from(!self.positive)
    }

    pub fn holds(self, assignment: &[bool]) -> bool {
        assignment[self.var] == self.positive
    }
}

pub type Clause = (Lit, Lit);

/// `a = b` as `(a ∨ ¬b) ∧ (¬a ∨ b)`.
pub fn encode_equal(a: Lit, b: Lit) -> [Clause; 2] {
    [(a, b.negated()), (a.negated(), b)]
}

/// `a ≠ b` as `(a ∨ b) ∧ (¬a ∨ ¬b)`.
pub fn encode_not_equal(a: Lit, b: Lit) -> [Clause; 2] {
    [(a, b), (a.negated(), b.negated())]
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TwoSatInstance {
    pub var_count: usize,
    pub clauses: Vec<Clause>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwoSatOutcome {
    Satisfiable(Vec<bool>),
    /// `var` and its negation are mutually implied.
    Unsatisfiable { var: usize },
}

impl TwoSatInstance {
    pub fn new(var_count: usize) -> Self {
        Self {
            var_count,
            clauses: Vec::new(),
        }
    }

    pub fn add(&mut self, clause: Clause) {
        assert!(
            clause.0.var < self.var_count && clause.1.var < self.var_count,
            "literal out of range"
        );
        self.clauses.push(clause);
    }

    pub fn extend(&mut self, clauses: impl IntoIterator<Item = Clause>) {
        for c in clauses {
            self.add(c);
        }
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|&(a, b)| a.holds(assignment) || b.holds(assignment))
    }

    fn implication_graph(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); 2 * self.var_count];
        for &(a, b) in &self.clauses {
            adj[a.negated().node()].push(b.node());
            adj[b.negated().node()].push(a.node());
        }
        adj
    }

    /// Solves the instance. Free variables are set to `false` whenever that
    /// keeps the formula satisfiable, in increasing variable order.
    pub fn solve(&self) -> TwoSatOutcome {
        let adj = self.implication_graph();
        let (comp, _) = strongly_connected(&adj);
        for v in 0..self.var_count {
            if comp[2 * v] == comp[2 * v + 1] {
                return TwoSatOutcome::Unsatisfiable { var: v };
            }
        }
        // Literal value per node: None = unset.
        let mut value: Vec<Option<bool>> = vec![None; 2 * self.var_count];
        for v in 0..self.var_count {
            if value[2 * v].is_some() {
                continue;
            }
            if !try_set(&adj, &mut value, Lit::neg(v).node()) {
                let ok = try_set(&adj, &mut value, Lit::pos(v).node());
                debug_assert!(ok, "satisfiable instance must accept one polarity");
            }
        }
        let assignment: Vec<bool> = (0..self.var_count).map(|v| value[2 * v] == Some(true)).collect();
        debug_assert!(self.satisfied_by(&assignment));
        TwoSatOutcome::Satisfiable(assignment)
    }

    /// DIMACS CNF text.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.var_count, self.clauses.len());
        let lit = |l: Lit| {
            let v = l.var as i64 + 1;
            if l.positive {
                v
            } else {
                -v
            }
        };
        for &(a, b) in &self.clauses {
            let _ = writeln!(out, "{} {} 0", lit(a), lit(b));
        }
        out
    }
}

// Makes `start` true and propagates implications; rolls back and returns
// false on conflict.
fn try_set(adj: &[Vec<usize>], value: &mut [Option<bool>], start: usize) -> bool {
    let mut touched = Vec::new();
    let mut stack = vec![start];
    let mut ok = true;
    while let Some(node) = stack.pop() {
        match value[node] {
            Some(true) => continue,
            Some(false) => {
                ok = false;
                break;
            }
            None => {
                value[node] = Some(true);
                value[node ^ 1] = Some(false);
                touched.push(node);
                stack.extend(adj[node].iter().copied());
            }
        }
    }
    if !ok {
        for node in touched {
            value[node] = None;
            value[node ^ 1] = None;
        }
    }
    ok
}

/// Exhaustive truth-table search; returns a satisfying assignment if any.
pub fn brute_force(inst: &TwoSatInstance) -> Option<Vec<bool>> {
    assert!(inst.var_count <= 24, "truth table too large");
    (0u32..1 << inst.var_count)
        .map(|mask| (0..inst.var_count).map(|v| mask >> v & 1 == 1).collect::<Vec<_>>())
        .find(|a| inst.satisfied_by(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn encoders_match_templates() {
        let (x, y) = (Lit::pos(0), Lit::pos(1));
        assert_eq!(encode_equal(x, y), [(x, Lit::neg(1)), (Lit::neg(0), y)]);
        assert_eq!(encode_not_equal(x, y), [(x, y), (Lit::neg(0), Lit::neg(1))]);
        // equal(x, x) is a pair of tautologies
        let mut inst = TwoSatInstance::new(1);
        inst.extend(encode_equal(x, x));
        assert!(inst.satisfied_by(&[false]) && inst.satisfied_by(&[true]));
    }

    #[test]
    fn single_clause() {
        let mut inst = TwoSatInstance::new(2);
        inst.add((Lit::pos(0), Lit::pos(1)));
        match inst.solve() {
            TwoSatOutcome::Satisfiable(a) => {
                assert!(a[0] || a[1]);
                // false-first on x forces y
                assert_eq!(a, vec![false, true]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn contradiction_unsat() {
        let mut inst = TwoSatInstance::new(1);
        inst.add((Lit::pos(0), Lit::pos(0)));
        inst.add((Lit::neg(0), Lit::neg(0)));
        assert_eq!(inst.solve(), TwoSatOutcome::Unsatisfiable { var: 0 });
    }

    #[test]
    fn empty_instance_defaults_false() {
        assert_eq!(TwoSatInstance::new(3).solve(), TwoSatOutcome::Satisfiable(vec![false; 3]));
    }

    #[test]
    fn dimacs_dump() {
        let mut inst = TwoSatInstance::new(2);
        inst.extend(encode_not_equal(Lit::pos(0), Lit::pos(1)));
        assert_eq!(inst.to_dimacs(), "p cnf 2 2\n1 2 0\n-1 -2 0\n");
    }

    #[test]
    fn agrees_with_truth_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let vars = rng.gen_range(1..=10);
            let clauses = rng.gen_range(0..=3 * vars);
            let mut inst = TwoSatInstance::new(vars);
            for _ in 0..clauses {
                let a = Lit { var: rng.gen_range(0..vars), positive: rng.gen() };
                let b = Lit { var: rng.gen_range(0..vars), positive: rng.gen() };
                inst.add((a, b));
            }
            match (inst.solve(), brute_force(&inst)) {
                (TwoSatOutcome::Satisfiable(a), Some(_)) => assert!(inst.satisfied_by(&a)),
                (TwoSatOutcome::Unsatisfiable { .. }, None) => {}
                (got, want) => panic!("disagreement: {got:?} vs {want:?}"),
            }
        }
    }
}
