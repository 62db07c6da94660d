//! The fitting algorithm: recursive refinement of the canonical order at a
//! fixed ε, and the search over candidate errors.

use std::collections::BTreeMap;
use std::fmt;

use crate::canonical::{CanonicalClosure, Contradiction, PartialOrderRelation};
use crate::cells::{CellConflict, ClassGraphs};
use crate::chain::{augment, ChainContext};
use crate::dissimilarity::{Dissimilarity, TotalOrder};
use crate::graph::topological_order;
use crate::order_fit::{candidate_errors, compatibility_violation, fit_for_order, nested_gap_within, FitResult};
use crate::thresholds::{Tolerance, GUARANTEE, MIDRANGE_ARROW, WITNESS_ARROW};
use crate::twosat::{encode_equal, encode_not_equal, Lit, TwoSatInstance, TwoSatOutcome};

/// Proof that no ε-compatible order exists. Element ids refer to the
/// input dissimilarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Infeasible {
    /// The canonical rules force `x ≼ y` and `y ≼ x`.
    Contradiction { x: usize, y: usize },
    /// Separation graph of the class containing `element` is not bipartite.
    NotBipartite { element: usize },
    /// Cycle of witness arcs in the class containing `element`.
    WitnessCycle { element: usize },
    /// Cycle among the cells of the cluster containing `element`.
    ClusterCycle { element: usize },
    /// The placement formula of the class containing `element` is
    /// unsatisfiable.
    Unsatisfiable { element: usize },
    /// The canonical order is total but not ε-compatible.
    IncompatibleChain,
}

impl Infeasible {
    fn relabel(self, ids: &[usize]) -> Self {
        match self {
            Infeasible::Contradiction { x, y } => Infeasible::Contradiction { x: ids[x], y: ids[y] },
            Infeasible::NotBipartite { element } => Infeasible::NotBipartite { element: ids[element] },
            Infeasible::WitnessCycle { element } => Infeasible::WitnessCycle { element: ids[element] },
            Infeasible::ClusterCycle { element } => Infeasible::ClusterCycle { element: ids[element] },
            Infeasible::Unsatisfiable { element } => Infeasible::Unsatisfiable { element: ids[element] },
            Infeasible::IncompatibleChain => Infeasible::IncompatibleChain,
        }
    }
}

impl From<Contradiction> for Infeasible {
    fn from(c: Contradiction) -> Self {
        Infeasible::Contradiction { x: c.x, y: c.y }
    }
}

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasible::Contradiction { x, y } => write!(f, "contradiction on {x},{y}"),
            Infeasible::NotBipartite { element } => write!(f, "separation graph not bipartite near {element}"),
            Infeasible::WitnessCycle { element } => write!(f, "witness-arc cycle near {element}"),
            Infeasible::ClusterCycle { element } => write!(f, "cycle inside the cluster of {element}"),
            Infeasible::Unsatisfiable { element } => write!(f, "placement formula unsatisfiable near {element}"),
            Infeasible::IncompatibleChain => write!(f, "total canonical order is not compatible"),
        }
    }
}

/// A broken internal invariant. Never a property of the input.
#[derive(Clone, Debug, PartialEq)]
pub enum Internal {
    MidrangeCycle,
    CyclicSide,
    Verify { violation: f64, bound: f64 },
}

impl fmt::Display for Internal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Internal::MidrangeCycle => write!(f, "cycle of midrange arcs"),
            Internal::CyclicSide => write!(f, "cyclic side after partition"),
            Internal::Verify { violation, bound } => write!(f, "violation {violation} exceeds {bound}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RefineError {
    Infeasible(Infeasible),
    Internal(Internal),
}

impl From<Infeasible> for RefineError {
    fn from(e: Infeasible) -> Self {
        RefineError::Infeasible(e)
    }
}

impl From<Contradiction> for RefineError {
    fn from(c: Contradiction) -> Self {
        RefineError::Infeasible(c.into())
    }
}

impl RefineError {
    fn relabel(self, ids: &[usize]) -> Self {
        match self {
            RefineError::Infeasible(e) => RefineError::Infeasible(e.relabel(ids)),
            other => other,
        }
    }
}

/// `compatibility_violation(d, order) ≤ 16ε`.
pub fn verify_16(d: &Dissimilarity, order: &TotalOrder, eps: f64) -> bool {
    compatibility_violation(d, order) <= GUARANTEE * eps
}

/// The 2-SAT formula choosing a bounding hole per cell: variable `c` true
/// puts cell `c` in the right bounding hole.
pub fn build_phi(g: &ClassGraphs) -> TwoSatInstance {
    let cs = &g.clusters;
    let mut phi = TwoSatInstance::new(g.cells.cell_count());
    for (k, cluster) in cs.clusters.iter().enumerate() {
        for &c in &cluster[1..] {
            phi.extend(encode_equal(Lit::pos(cluster[0]), Lit::pos(c)));
        }
        if let Some(t) = cs.twin[k] {
            if k < t {
                phi.extend(encode_not_equal(Lit::pos(cluster[0]), Lit::pos(cs.clusters[t][0])));
            }
        }
    }
    let om = &g.omega;
    for &(c0, c) in om.one.iter().chain(&om.two).flatten() {
        phi.extend(encode_not_equal(Lit::pos(c), Lit::pos(c0)));
    }
    for &(c, c0) in om.three.iter().flatten() {
        phi.extend(encode_not_equal(Lit::pos(c), Lit::pos(c0)));
    }
    phi
}

/// Cells of one class split between its bounding holes, each side in
/// placement order (left to right).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    /// Cells for the left bounding hole, dual topological order.
    pub minus: Vec<usize>,
    /// Cells for the right bounding hole, topological order.
    pub plus: Vec<usize>,
}

/// Solves the placement formula and orders both sides.
pub fn partition_and_sort(g: &ClassGraphs) -> Result<Partition, RefineError> {
    let k = g.cells.cell_count();
    let assignment = match build_phi(g).solve() {
        TwoSatOutcome::Satisfiable(a) => a,
        TwoSatOutcome::Unsatisfiable { var } => {
            return Err(Infeasible::Unsatisfiable {
                element: g.cells.members[g.cells.cells[var][0]],
            }
            .into())
        }
    };
    let side = |plus: bool| -> Result<Vec<usize>, RefineError> {
        let keep: Vec<bool> = assignment.iter().map(|&a| a == plus).collect();
        let topo = topological_order(&g.digraph.induced(&keep), |c| c)
            .ok_or(RefineError::Internal(Internal::CyclicSide))?;
        Ok(topo.into_iter().filter(|&c| keep[c]).collect())
    };
    let plus = side(true)?;
    let mut minus = side(false)?;
    minus.reverse();
    debug_assert_eq!(plus.len() + minus.len(), k);
    Ok(Partition { minus, plus })
}

fn conflict_error(conflict: CellConflict, g_members: &[usize], cell_first: impl Fn(usize) -> usize) -> RefineError {
    match conflict {
        CellConflict::NotBipartite { cell } => Infeasible::NotBipartite {
            element: g_members[cell_first(cell)],
        }
        .into(),
        CellConflict::G3Cycle => Infeasible::WitnessCycle { element: g_members[0] }.into(),
        CellConflict::G2Cycle => RefineError::Internal(Internal::MidrangeCycle),
        CellConflict::ClusterCycle { cell } => Infeasible::ClusterCycle {
            element: g_members[cell_first(cell)],
        }
        .into(),
    }
}

/// Analyses one segment class: graphs, partition and sorted sides.
pub fn analyse_class(
    d: &Dissimilarity,
    tol: Tolerance,
    members: Vec<usize>,
    midrange: Vec<f64>,
) -> Result<(ClassGraphs, Partition), RefineError> {
    let cd = crate::cells::CellDecomposition::build(d, tol, members, midrange);
    let clusters = crate::cells::ClusterStructure::build(d, tol, &cd)
        .map_err(|e| conflict_error(e, &cd.members, |c| cd.cells[c][0]))?;
    let digraph = crate::cells::CellDigraph::build(d, tol, &cd, &clusters)
        .map_err(|e| conflict_error(e, &cd.members, |c| cd.cells[c][0]))?;
    let omega = crate::cells::omega_sets(&digraph, &clusters.cell_cluster);
    let g = ClassGraphs {
        cells: cd,
        clusters,
        digraph,
        omega,
    };
    let p = partition_and_sort(&g)?;
    Ok((g, p))
}

// A cell with its side, in level-local ids.
struct PlacedCell {
    elements: Vec<usize>,
    seeds: Vec<(usize, usize)>,
}

fn placed_cells(g: &ClassGraphs, cells: &[usize], plus: bool) -> Vec<PlacedCell> {
    let cd = &g.cells;
    cells
        .iter()
        .map(|&c| {
            let local = &cd.cells[c];
            let mut seeds = Vec::new();
            for (a, &x) in local.iter().enumerate() {
                for (b, &y) in local.iter().enumerate() {
                    if cd.arrow[x][y] {
                        seeds.push(if plus { (a, b) } else { (b, a) });
                    }
                }
            }
            PlacedCell {
                elements: local.iter().map(|&x| cd.members[x]).collect(),
                seeds,
            }
        })
        .collect()
}

/// Refines `rel` at `eps` into a 16ε-compatible total order, or proves
/// that no ε-compatible order extends `rel` or its dual.
pub fn refine(d: &Dissimilarity, rel: &PartialOrderRelation, eps: f64) -> Result<TotalOrder, RefineError> {
    let mut closure = CanonicalClosure::new(d, eps);
    closure.assert_all(rel.pairs())?;
    refine_closure(d, closure, eps)
}

/// One probe of the search: refine from the seed `0 ≼ 1`.
pub fn solve_at(d: &Dissimilarity, eps: f64) -> Result<TotalOrder, RefineError> {
    let mut closure = CanonicalClosure::new(d, eps);
    if d.n() >= 2 {
        closure.assert(0, 1)?;
    }
    refine_closure(d, closure, eps)
}

fn refine_closure(d: &Dissimilarity, mut closure: CanonicalClosure, eps: f64) -> Result<TotalOrder, RefineError> {
    let n = d.n();
    if n <= 1 {
        return Ok(TotalOrder::identity(n));
    }
    if closure.relation().is_empty() {
        closure.assert(0, 1)?;
    }
    augment(&mut closure, d, eps)?;
    let rel = closure.relation();
    let order = if rel.is_total() {
        // every compatible order extends the relation or its dual
        let order = rel.linear_order();
        if !nested_gap_within(d, &order, Tolerance::new(eps).gap_limit(1.0)) {
            return Err(Infeasible::IncompatibleChain.into());
        }
        order
    } else {
        assemble(d, eps, rel)?
    };
    let order = TotalOrder::new(order).expect("assembled order is a permutation");
    let violation = compatibility_violation(d, &order);
    if violation > GUARANTEE * eps {
        return Err(RefineError::Internal(Internal::Verify {
            violation,
            bound: GUARANTEE * eps,
        }));
    }
    Ok(order)
}

/// Groups of each hole, left to right: the `+` sides of classes ending
/// after the hole, by increasing left end, then the `-` sides of classes
/// starting at the hole, by decreasing right end.
fn assemble(d: &Dissimilarity, eps: f64, rel: &PartialOrderRelation) -> Result<Vec<usize>, RefineError> {
    let tol = Tolerance::new(eps);
    let ctx = ChainContext::new(d, eps, rel);
    let mut classes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for s in ctx.segments() {
        classes.entry(s.bounds()).or_default().push(s.element);
    }
    let holes = ctx.hole_count();
    let mut plus_groups: Vec<Vec<(usize, Vec<PlacedCell>)>> = (0..holes).map(|_| Vec::new()).collect();
    let mut minus_groups: Vec<Vec<(usize, Vec<PlacedCell>)>> = (0..holes).map(|_| Vec::new()).collect();
    for (&(lo, hi), members) in &classes {
        let midrange = members.iter().map(|&x| ctx.midrange(x)).collect();
        let (g, p) = analyse_class(d, tol, members.clone(), midrange)?;
        plus_groups[hi - 1].push((lo, placed_cells(&g, &p.plus, true)));
        minus_groups[lo].push((hi, placed_cells(&g, &p.minus, false)));
    }
    let mut order = Vec::with_capacity(d.n());
    for h in 0..holes {
        plus_groups[h].sort_by_key(|g| g.0);
        minus_groups[h].sort_by_key(|g| std::cmp::Reverse(g.0));
        let cells = plus_groups[h].iter().chain(&minus_groups[h]).flat_map(|g| &g.1);
        for cell in cells {
            order.extend(refine_cell(d, eps, cell)?);
        }
        if h < ctx.chain().len() {
            order.push(ctx.chain()[h]);
        }
    }
    Ok(order)
}

fn refine_cell(d: &Dissimilarity, eps: f64, cell: &PlacedCell) -> Result<Vec<usize>, RefineError> {
    if cell.elements.len() == 1 {
        return Ok(cell.elements.clone());
    }
    debug_assert!(cell.elements.len() < d.n());
    let sub = d.restrict(&cell.elements);
    let mut closure = CanonicalClosure::new(&sub, eps);
    closure
        .assert_all(cell.seeds.iter().copied())
        .map_err(|c| RefineError::from(c).relabel(&cell.elements))?;
    let local = refine_closure(&sub, closure, eps).map_err(|e| e.relabel(&cell.elements))?;
    Ok(local.as_slice().iter().map(|&x| cell.elements[x]).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Binary,
    Linear,
}

impl SearchMode {
    pub fn name(self) -> &'static str {
        match self {
            SearchMode::Binary => "binary",
            SearchMode::Linear => "linear",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProbeOutcome {
    Feasible,
    Infeasible(Infeasible),
    Internal(Internal),
}

/// One ε tried by the search.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub eps: f64,
    pub outcome: ProbeOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub result: FitResult,
    pub mode: SearchMode,
    pub trace: Vec<Probe>,
}

/// Fits with binary search over the candidate errors.
pub fn fit(d: &Dissimilarity) -> FitResult {
    fit_with(d, SearchMode::Binary).result
}

/// Fits with the given search mode. A probe that breaks an internal
/// invariant counts as a failed probe; the returned order always satisfies
/// `achieved_error ≤ 16 · accepted_epsilon`.
pub fn fit_with(d: &Dissimilarity, mode: SearchMode) -> FitReport {
    let cands = candidate_errors(d);
    let mut trace = Vec::new();
    let mut probe = |eps: f64| -> Option<TotalOrder> {
        let (outcome, order) = match solve_at(d, eps) {
            Ok(o) => (ProbeOutcome::Feasible, Some(o)),
            Err(RefineError::Infeasible(e)) => (ProbeOutcome::Infeasible(e), None),
            Err(RefineError::Internal(e)) => (ProbeOutcome::Internal(e), None),
        };
        trace.push(Probe { eps, outcome });
        order
    };
    let found = match mode {
        SearchMode::Linear => cands.iter().find_map(|&e| probe(e).map(|o| (e, o))),
        SearchMode::Binary => {
            let (mut lo, mut hi) = (0, cands.len() - 1);
            let mut best = None;
            while lo < hi {
                let mid = (lo + hi) / 2;
                match probe(cands[mid]) {
                    Some(o) => {
                        best = Some((cands[mid], o));
                        hi = mid;
                    }
                    None => lo = mid + 1,
                }
            }
            match best {
                Some(b) if b.0 == cands[lo] => Some(b),
                _ => probe(cands[lo]).map(|o| (cands[lo], o)),
            }
        }
    };
    let (eps, order) = found.expect("the largest candidate error is always feasible");
    let mut result = fit_for_order(d, &order).expect("order matches the matrix");
    result.accepted_epsilon = eps;
    FitReport { result, mode, trace }
}

/// Placement-order checks on one partitioned class. Pairs are cell ids in
/// topological order of their side; triples count element triples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SideReport {
    /// Earlier cell holds a midrange above a later one's by more than 4ε.
    pub midrange_inversions: Vec<(usize, usize)>,
    /// Some element of the other side is closer to the later cell by more
    /// than 16ε.
    pub distance_inversions: Vec<(usize, usize)>,
    /// Triples from three cells placed left to right in one hole whose
    /// outer distance falls more than 16ε below an inner one.
    pub triple_violations: usize,
}

impl SideReport {
    pub fn is_clean(&self) -> bool {
        self.midrange_inversions.is_empty() && self.distance_inversions.is_empty() && self.triple_violations == 0
    }
}

pub fn side_diagnostics(d: &Dissimilarity, tol: Tolerance, g: &ClassGraphs, p: &Partition) -> SideReport {
    let cd = &g.cells;
    let dist = |a: usize, b: usize| d.get(cd.members[a], cd.members[b]);
    let mut report = SideReport::default();
    let minus_topo: Vec<usize> = p.minus.iter().rev().copied().collect();
    for (topo, other) in [(&p.plus, &p.minus), (&minus_topo, &p.plus)] {
        let others: Vec<usize> = other.iter().flat_map(|&c| cd.cells[c].iter().copied()).collect();
        for (i, &c1) in topo.iter().enumerate() {
            for &c2 in &topo[i + 1..] {
                let (e1, e2) = (&cd.cells[c1], &cd.cells[c2]);
                if e1.iter().any(|&y| e2.iter().any(|&z| !tol.at_most_about(cd.midrange[y], cd.midrange[z], MIDRANGE_ARROW))) {
                    report.midrange_inversions.push((c1, c2));
                }
                let inverted = others.iter().any(|&x| {
                    e1.iter().any(|&y| e2.iter().any(|&z| !tol.at_most_about(dist(x, y), dist(x, z), WITNESS_ARROW)))
                });
                if inverted {
                    report.distance_inversions.push((c1, c2));
                }
            }
        }
    }
    for side in [&p.minus, &p.plus] {
        for (i, &c1) in side.iter().enumerate() {
            for (j, &c2) in side.iter().enumerate().skip(i + 1) {
                for &c3 in &side[j + 1..] {
                    for &x in &cd.cells[c1] {
                        for &y in &cd.cells[c2] {
                            for &z in &cd.cells[c3] {
                                if !tol.at_least_about(dist(x, z), dist(x, y).max(dist(y, z)), WITNESS_ARROW) {
                                    report.triple_violations += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    report
}

/// DOT dump of every class graph at `eps`, with each placement formula as
/// DIMACS in comments.
pub fn dump_graphs(d: &Dissimilarity, eps: f64) -> Result<String, RefineError> {
    let mut closure = CanonicalClosure::new(d, eps);
    if d.n() >= 2 {
        closure.assert(0, 1)?;
    }
    augment(&mut closure, d, eps)?;
    let ctx = ChainContext::new(d, eps, closure.relation());
    let mut classes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for s in ctx.segments() {
        classes.entry(s.bounds()).or_default().push(s.element);
    }
    let mut out = format!("// eps {eps}\n// chain {:?}\n", ctx.chain());
    for ((lo, hi), members) in classes {
        let midrange = members.iter().map(|&x| ctx.midrange(x)).collect();
        let cd = crate::cells::CellDecomposition::build(d, Tolerance::new(eps), members, midrange);
        let tol = Tolerance::new(eps);
        let name = format!("X_{lo}_{hi}");
        match crate::cells::ClusterStructure::build(d, tol, &cd)
            .and_then(|cs| crate::cells::CellDigraph::build(d, tol, &cd, &cs).map(|g| (cs, g)))
        {
            Ok((clusters, digraph)) => {
                let omega = crate::cells::omega_sets(&digraph, &clusters.cell_cluster);
                let g = ClassGraphs {
                    cells: cd,
                    clusters,
                    digraph,
                    omega,
                };
                out.push_str(&g.to_dot(&name));
                for line in build_phi(&g).to_dimacs().lines() {
                    out.push_str("// ");
                    out.push_str(line);
                    out.push('\n');
                }
            }
            Err(e) => out.push_str(&format!("// {name}: {e}\n")),
        }
    }
    Ok(out)
}
