//! Blocks, cells, clusters and the cell digraph of one segment class
//! `X_ij` (all off-chain elements sharing the same segment).
//!
//! Elements are addressed by local index into `members`, cells by their
//! index in `cells` (cells are numbered by smallest member).

use std::fmt::{self, Write as _};

use crate::dissimilarity::Dissimilarity;
use crate::graph::{connected_components, is_acyclic, shortest_path, strongly_connected};
use crate::thresholds::{Tolerance, LINKED, MIDRANGE_ARROW, STRONG_SEPARATION, TIGHT_LINK, WITNESS_ARROW};

/// `d(x,y) ≪₃ max{d_x, d_y}`.
pub fn linked(tol: Tolerance, dxy: f64, dx: f64, dy: f64) -> bool {
    tol.much_less(dxy, dx.max(dy), LINKED)
}

/// `d(x,y) ≫₃ max{d_x, d_y}`.
pub fn separated(tol: Tolerance, dxy: f64, dx: f64, dy: f64) -> bool {
    tol.much_greater(dxy, dx.max(dy), LINKED)
}

/// `d(x,y) ≫₉ max{d_x, d_y}`.
pub fn strongly_separated(tol: Tolerance, dxy: f64, dx: f64, dy: f64) -> bool {
    tol.much_greater(dxy, dx.max(dy), STRONG_SEPARATION)
}

/// Why a class admits no ε-compatible placement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellConflict {
    /// The separation graph has an odd cycle (or a separated pair inside a
    /// block); `cell` lies on it.
    NotBipartite { cell: usize },
    /// The witness arcs of the cell digraph contain a cycle.
    G3Cycle,
    /// The midrange arcs contain a cycle. Should not happen.
    G2Cycle,
    /// Arcs among the cells of one cluster contain a cycle through `cell`.
    /// A cluster sits in a single hole, and a cycle needs both.
    ClusterCycle { cell: usize },
}

impl CellConflict {
    /// Conflicts that point at a bug rather than at infeasibility.
    pub fn is_internal(&self) -> bool {
        matches!(self, CellConflict::G2Cycle)
    }
}

impl fmt::Display for CellConflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellConflict::NotBipartite { cell } => write!(f, "separation graph not bipartite at cell {cell}"),
            CellConflict::G3Cycle => write!(f, "cycle of witness arcs"),
            CellConflict::G2Cycle => write!(f, "cycle of midrange arcs"),
            CellConflict::ClusterCycle { cell } => write!(f, "cycle inside the cluster of cell {cell}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkArc {
    /// Arrow inside a block.
    L1,
    /// `d(x,y) ≪₅ max{d_x, d_y}`.
    L2,
}

#[derive(Clone, Debug)]
pub struct CellDecomposition {
    /// Global ids, increasing.
    pub members: Vec<usize>,
    pub midrange: Vec<f64>,
    pub linked: Vec<Vec<bool>>,
    pub separated: Vec<Vec<bool>>,
    /// `arrow[x][y]` is `x ↣ y`.
    pub arrow: Vec<Vec<bool>>,
    pub block_of: Vec<usize>,
    pub block_count: usize,
    /// Arcs of `L→`, `(x, y, type)`; L1 wins when both apply.
    pub link_arcs: Vec<(usize, usize, LinkArc)>,
    pub cell_of: Vec<usize>,
    pub cells: Vec<Vec<usize>>,
}

impl CellDecomposition {
    /// `members` must be sorted; `midrange[k]` is `d_x` of `members[k]`.
    pub fn build(d: &Dissimilarity, tol: Tolerance, members: Vec<usize>, midrange: Vec<f64>) -> Self {
        let m = members.len();
        debug_assert_eq!(midrange.len(), m);
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        let dist = |a: usize, b: usize| d.get(members[a], members[b]);
        let mut link = vec![vec![false; m]; m];
        let mut sep = vec![vec![false; m]; m];
        for a in 0..m {
            for b in a + 1..m {
                let (l, s) = (
                    linked(tol, dist(a, b), midrange[a], midrange[b]),
                    separated(tol, dist(a, b), midrange[a], midrange[b]),
                );
                link[a][b] = l;
                link[b][a] = l;
                sep[a][b] = s;
                sep[b][a] = s;
            }
        }
        let mut arrow = vec![vec![false; m]; m];
        for x in 0..m {
            for y in 0..m {
                if x == y {
                    continue;
                }
                arrow[x][y] = tol.much_less(midrange[x], midrange[y], MIDRANGE_ARROW)
                    || (0..m).any(|z| {
                        z != x
                            && z != y
                            && !link[x][z]
                            && !link[y][z]
                            && tol.much_less(dist(x, z), dist(y, z), WITNESS_ARROW)
                    });
            }
        }
        let link_adj: Vec<Vec<usize>> = (0..m).map(|a| (0..m).filter(|&b| link[a][b]).collect()).collect();
        let (block_of, block_count) = connected_components(&link_adj);

        let mut link_arcs = Vec::new();
        let mut adj = vec![Vec::new(); m];
        for x in 0..m {
            for y in 0..m {
                if x == y {
                    continue;
                }
                let kind = if arrow[x][y] && block_of[x] == block_of[y] {
                    Some(LinkArc::L1)
                } else if tol.much_less(dist(x, y), midrange[x].max(midrange[y]), TIGHT_LINK) {
                    debug_assert!(link[x][y]);
                    Some(LinkArc::L2)
                } else {
                    None
                };
                if let Some(kind) = kind {
                    link_arcs.push((x, y, kind));
                    adj[x].push(y);
                }
            }
        }
        let (scc, count) = strongly_connected(&adj);
        // renumber cells by smallest member
        let mut rename = vec![usize::MAX; count];
        let mut cells: Vec<Vec<usize>> = Vec::new();
        let mut cell_of = vec![0; m];
        for x in 0..m {
            if rename[scc[x]] == usize::MAX {
                rename[scc[x]] = cells.len();
                cells.push(Vec::new());
            }
            cell_of[x] = rename[scc[x]];
            cells[cell_of[x]].push(x);
        }
        debug_assert!(cells.iter().all(|c| c.iter().all(|&x| block_of[x] == block_of[c[0]])));
        Self {
            members,
            midrange,
            linked: link,
            separated: sep,
            arrow,
            block_of,
            block_count,
            link_arcs,
            cell_of,
            cells,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_block(&self, cell: usize) -> usize {
        self.block_of[self.cells[cell][0]]
    }

    /// Whether some `x ∈ from` and `y ∈ to` have `x ↣ y`.
    pub fn cell_arrow(&self, from: usize, to: usize) -> bool {
        self.cells[from].iter().any(|&x| self.cells[to].iter().any(|&y| self.arrow[x][y]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeparationEdge {
    /// A separated pair across the two blocks.
    S1,
    /// Opposite arrows between two cells of the two blocks.
    S2,
}

#[derive(Clone, Debug)]
pub struct ClusterStructure {
    /// Edges of the separation graph before the bipartite completion,
    /// `(c, c', type)` with `c < c'`.
    pub edges: Vec<(usize, usize, SeparationEdge)>,
    pub cell_cluster: Vec<usize>,
    /// Cells of each cluster, increasing.
    pub clusters: Vec<Vec<usize>>,
    pub twin: Vec<Option<usize>>,
    pub cluster_component: Vec<usize>,
    pub principal: Vec<bool>,
}

impl ClusterStructure {
    pub fn build(d: &Dissimilarity, tol: Tolerance, cd: &CellDecomposition) -> Result<Self, CellConflict> {
        let k = cd.cell_count();
        let nb = cd.block_count;
        let mut block_edge: Vec<Vec<Option<SeparationEdge>>> = vec![vec![None; nb]; nb];
        for x in 0..cd.len() {
            for y in 0..cd.len() {
                if cd.separated[x][y] {
                    let (bx, by) = (cd.block_of[x], cd.block_of[y]);
                    if bx == by {
                        return Err(CellConflict::NotBipartite { cell: cd.cell_of[x] });
                    }
                    block_edge[bx][by] = Some(SeparationEdge::S1);
                }
            }
        }
        for c in 0..k {
            for c2 in 0..k {
                let (b, b2) = (cd.cell_block(c), cd.cell_block(c2));
                if c != c2 && b != b2 && block_edge[b][b2].is_none() && cd.cell_arrow(c, c2) && cd.cell_arrow(c2, c) {
                    block_edge[b][b2] = Some(SeparationEdge::S2);
                    block_edge[b2][b] = Some(SeparationEdge::S2);
                }
            }
        }
        let mut edges = Vec::new();
        let mut adj = vec![Vec::new(); k];
        for c in 0..k {
            for c2 in c + 1..k {
                if let Some(e) = block_edge[cd.cell_block(c)][cd.cell_block(c2)] {
                    edges.push((c, c2, e));
                    adj[c].push(c2);
                    adj[c2].push(c);
                }
            }
        }

        let mut color: Vec<Option<bool>> = vec![None; k];
        let mut cell_cluster = vec![0; k];
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut twin = Vec::new();
        let mut cluster_component = Vec::new();
        let mut principal = Vec::new();
        for start in 0..k {
            if color[start].is_some() {
                continue;
            }
            let comp = principal.len();
            color[start] = Some(false);
            let mut sides = [Vec::new(), Vec::new()];
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(c) = queue.pop_front() {
                let col = color[c].expect("colored");
                sides[usize::from(col)].push(c);
                for &c2 in &adj[c] {
                    match color[c2] {
                        None => {
                            color[c2] = Some(!col);
                            queue.push_back(c2);
                        }
                        Some(other) if other == col => return Err(CellConflict::NotBipartite { cell: c2 }),
                        Some(_) => {}
                    }
                }
            }
            let [mut a, mut b] = sides;
            a.sort_unstable();
            b.sort_unstable();
            let ia = clusters.len();
            for &c in &a {
                cell_cluster[c] = ia;
            }
            clusters.push(a);
            cluster_component.push(comp);
            if b.is_empty() {
                twin.push(None);
                principal.push(false);
                continue;
            }
            let ib = ia + 1;
            for &c in &b {
                cell_cluster[c] = ib;
            }
            let strong = clusters[ia].iter().flat_map(|&c| &cd.cells[c]).any(|&x| {
                b.iter().flat_map(|&c| &cd.cells[c]).any(|&y| {
                    strongly_separated(tol, d.get(cd.members[x], cd.members[y]), cd.midrange[x], cd.midrange[y])
                })
            });
            clusters.push(b);
            cluster_component.push(comp);
            twin.push(Some(ib));
            twin.push(Some(ia));
            principal.push(strong);
        }
        Ok(Self {
            edges,
            cell_cluster,
            clusters,
            twin,
            cluster_component,
            principal,
        })
    }

    pub fn are_twins(&self, c: usize, c2: usize) -> bool {
        self.twin[self.cell_cluster[c]] == Some(self.cell_cluster[c2])
    }

    pub fn is_principal(&self, cluster: usize) -> bool {
        self.principal[self.cluster_component[cluster]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcKind {
    /// Twin clusters.
    G1,
    /// Midrange gap `d_x' ≪₄ d_x`.
    G2,
    /// Witnessed distance gap `d(x',z) ≪₁₆ d(x,z)`.
    G3,
}

/// The cell digraph `G_ij`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDigraph {
    /// `kind[tail][head]`.
    pub kind: Vec<Vec<Option<ArcKind>>>,
}

impl CellDigraph {
    pub fn from_arcs(cells: usize, arcs: &[(usize, usize, ArcKind)]) -> Self {
        let mut kind = vec![vec![None; cells]; cells];
        for &(a, b, t) in arcs {
            assert_ne!(a, b, "no loops");
            kind[a][b] = Some(t);
        }
        Self { kind }
    }

    pub fn build(d: &Dissimilarity, tol: Tolerance, cd: &CellDecomposition, cs: &ClusterStructure) -> Result<Self, CellConflict> {
        let k = cd.cell_count();
        let mut kind = vec![vec![None; k]; k];
        let lo: Vec<f64> = cd.cells.iter().map(|c| c.iter().map(|&x| cd.midrange[x]).fold(f64::INFINITY, f64::min)).collect();
        let hi: Vec<f64> = cd.cells.iter().map(|c| c.iter().map(|&x| cd.midrange[x]).fold(f64::NEG_INFINITY, f64::max)).collect();
        for t in 0..k {
            for h in 0..k {
                if t == h {
                    continue;
                }
                if cs.are_twins(t, h) {
                    kind[t][h] = Some(ArcKind::G1);
                } else if tol.much_less(lo[t], hi[h], MIDRANGE_ARROW) {
                    kind[t][h] = Some(ArcKind::G2);
                }
            }
        }
        let dist = |a: usize, b: usize| d.get(cd.members[a], cd.members[b]);
        for t in 0..k {
            for h in 0..k {
                if t == h || kind[t][h].is_some() || kind[h][t].is_some() {
                    continue;
                }
                let witnessed = cd.cells[h].iter().any(|&x| {
                    cd.cells[t].iter().any(|&x2| {
                        (0..cd.len()).any(|z| {
                            z != x
                                && z != x2
                                && !cd.linked[x][z]
                                && !cd.linked[x2][z]
                                && tol.much_less(dist(x2, z), dist(x, z), WITNESS_ARROW)
                        })
                    })
                });
                if witnessed {
                    kind[t][h] = Some(ArcKind::G3);
                }
            }
        }
        let g = Self { kind };
        if !is_acyclic(&g.adjacency_of(&[ArcKind::G3])) {
            return Err(CellConflict::G3Cycle);
        }
        if !is_acyclic(&g.adjacency_of(&[ArcKind::G2])) {
            return Err(CellConflict::G2Cycle);
        }
        for cluster in &cs.clusters {
            let mut keep = vec![false; k];
            for &c in cluster {
                keep[c] = true;
            }
            if !is_acyclic(&g.induced(&keep)) {
                return Err(CellConflict::ClusterCycle { cell: cluster[0] });
            }
        }
        Ok(g)
    }

    pub fn cell_count(&self) -> usize {
        self.kind.len()
    }

    pub fn arc(&self, tail: usize, head: usize) -> Option<ArcKind> {
        self.kind[tail][head]
    }

    pub fn has(&self, tail: usize, head: usize, kind: ArcKind) -> bool {
        self.kind[tail][head] == Some(kind)
    }

    pub fn arcs(&self) -> Vec<(usize, usize, ArcKind)> {
        let k = self.cell_count();
        (0..k)
            .flat_map(|t| (0..k).filter_map(move |h| self.kind[t][h].map(|a| (t, h, a))))
            .collect()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.adjacency_of(&[ArcKind::G1, ArcKind::G2, ArcKind::G3])
    }

    pub fn adjacency_of(&self, kinds: &[ArcKind]) -> Vec<Vec<usize>> {
        self.kind
            .iter()
            .map(|row| (0..row.len()).filter(|&h| row[h].is_some_and(|a| kinds.contains(&a))).collect())
            .collect()
    }

    /// Subgraph induced by the cells with `keep[c]`, as adjacency lists over
    /// all cells (dropped cells are isolated).
    pub fn induced(&self, keep: &[bool]) -> Vec<Vec<usize>> {
        self.adjacency()
            .into_iter()
            .enumerate()
            .map(|(t, out)| if keep[t] { out.into_iter().filter(|&h| keep[h]).collect() } else { Vec::new() })
            .collect()
    }
}

/// Shapes of mixed cycle through a midrange arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleKind {
    /// The given arc is the only midrange arc.
    One,
    /// The given arc `A ↣ B` is followed by the midrange arc `B ↣ D`.
    TwoAfter(usize),
    /// The given arc `B ↣ D` is preceded by the midrange arc `A ↣ B`.
    TwoBefore(usize),
}

/// Searches an induced-style mixed cycle through the midrange arc `g2arc`
/// whose witness-arc heads lie in `cluster`. Returns the cycle's cells,
/// starting at the tail of the first midrange arc.
pub fn find_mixed_cycle(
    g: &CellDigraph,
    cell_cluster: &[usize],
    g2arc: (usize, usize),
    cluster: usize,
    kind: CycleKind,
) -> Option<Vec<usize>> {
    if !g.has(g2arc.0, g2arc.1, ArcKind::G2) {
        return None;
    }
    match kind {
        CycleKind::One => one_cycle(g, cell_cluster, g2arc.0, g2arc.1, cluster),
        CycleKind::TwoAfter(dd) => two_cycle(g, cell_cluster, g2arc.0, g2arc.1, dd, cluster),
        CycleKind::TwoBefore(a) => two_cycle(g, cell_cluster, a, g2arc.0, g2arc.1, cluster),
    }
}

// C0 ↣ C (midrange) closed by witness arcs C ↣ C1 … Ck ↣ C0 inside the cluster.
fn one_cycle(g: &CellDigraph, cell_cluster: &[usize], c0: usize, c: usize, cluster: usize) -> Option<Vec<usize>> {
    if cell_cluster[c0] != cluster {
        return None;
    }
    let k = g.cell_count();
    let chord = |x: usize| {
        g.has(c0, x, ArcKind::G2) || g.has(c0, x, ArcKind::G3) || g.arc(x, c).is_some()
    };
    let allowed: Vec<bool> = (0..k)
        .map(|x| cell_cluster[x] == cluster && x != c0 && x != c && !chord(x))
        .collect();
    close_path(g, &allowed, c, c0).map(|path| [vec![c0, c], path].concat())
}

// A ↣ B ↣ D (midrange) closed by witness arcs from D back to A.
fn two_cycle(g: &CellDigraph, cell_cluster: &[usize], a: usize, b: usize, dd: usize, cluster: usize) -> Option<Vec<usize>> {
    if a == dd || !g.has(a, b, ArcKind::G2) || !g.has(b, dd, ArcKind::G2) || cell_cluster[a] != cluster {
        return None;
    }
    if g.has(dd, a, ArcKind::G3) {
        return Some(vec![a, b, dd]);
    }
    let k = g.cell_count();
    let chord = |x: usize| {
        g.has(a, x, ArcKind::G2)
            || g.has(a, x, ArcKind::G3)
            || g.arc(x, b).is_some()
            || g.arc(b, x).is_some()
            || g.arc(x, dd).is_some()
    };
    let allowed: Vec<bool> = (0..k)
        .map(|x| cell_cluster[x] == cluster && x != a && x != b && x != dd && !chord(x))
        .collect();
    close_path(g, &allowed, dd, a).map(|path| [vec![a, b, dd], path].concat())
}

// Shortest from → C1 → … → Ck → to with witness first and last arcs and
// C1..Ck allowed; returns C1..Ck.
fn close_path(g: &CellDigraph, allowed: &[bool], from: usize, to: usize) -> Option<Vec<usize>> {
    let k = g.cell_count();
    let sources: Vec<usize> = (0..k).filter(|&x| allowed[x] && g.has(from, x, ArcKind::G3)).collect();
    let targets: Vec<usize> = (0..k).filter(|&x| allowed[x] && g.has(x, to, ArcKind::G3)).collect();
    if sources.is_empty() || targets.is_empty() {
        return None;
    }
    shortest_path(&g.adjacency(), &sources, &targets, allowed)
}

/// Per-cell lists of midrange arcs that must be cut by the 2-SAT formula.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OmegaSets {
    /// Arcs `C0 ↣ C` into `C` on a 1-cycle.
    pub one: Vec<Vec<(usize, usize)>>,
    /// Arcs `C0 ↣ C` into `C` on a 2-cycle, `C` outside the cycle's cluster.
    pub two: Vec<Vec<(usize, usize)>>,
    /// Arcs `C ↣ C0` out of `C` on a 2-cycle, `C` inside the cycle's cluster.
    pub three: Vec<Vec<(usize, usize)>>,
}

impl OmegaSets {
    pub fn is_empty(&self) -> bool {
        self.one.iter().chain(&self.two).chain(&self.three).all(Vec::is_empty)
    }
}

pub fn omega_sets(g: &CellDigraph, cell_cluster: &[usize]) -> OmegaSets {
    let k = g.cell_count();
    let mut om = OmegaSets {
        one: vec![Vec::new(); k],
        two: vec![Vec::new(); k],
        three: vec![Vec::new(); k],
    };
    let g2: Vec<(usize, usize)> = g.arcs().into_iter().filter(|a| a.2 == ArcKind::G2).map(|a| (a.0, a.1)).collect();
    for &(c0, c) in &g2 {
        let kc = cell_cluster[c0];
        if cell_cluster[c] != kc && one_cycle(g, cell_cluster, c0, c, kc).is_some() {
            om.one[c].push((c0, c));
        }
    }
    for &(a, b) in &g2 {
        for &(b2, dd) in &g2 {
            if b2 != b || dd == a {
                continue;
            }
            let kc = cell_cluster[a];
            if two_cycle(g, cell_cluster, a, b, dd, kc).is_none() {
                continue;
            }
            if cell_cluster[b] != kc {
                if !om.two[b].contains(&(a, b)) {
                    om.two[b].push((a, b));
                }
            } else if !om.three[b].contains(&(b, dd)) {
                om.three[b].push((b, dd));
            }
        }
    }
    om
}

/// Everything computed for one segment class at one ε.
#[derive(Clone, Debug)]
pub struct ClassGraphs {
    pub cells: CellDecomposition,
    pub clusters: ClusterStructure,
    pub digraph: CellDigraph,
    pub omega: OmegaSets,
}

impl ClassGraphs {
    pub fn build(d: &Dissimilarity, tol: Tolerance, members: Vec<usize>, midrange: Vec<f64>) -> Result<Self, CellConflict> {
        let cells = CellDecomposition::build(d, tol, members, midrange);
        let clusters = ClusterStructure::build(d, tol, &cells)?;
        let digraph = CellDigraph::build(d, tol, &cells, &clusters)?;
        let omega = omega_sets(&digraph, &clusters.cell_cluster);
        Ok(Self {
            cells,
            clusters,
            digraph,
            omega,
        })
    }

    /// DOT text for `L→`, the separation edges and `G`, one arc per line.
    /// Element vertices are global ids, cell vertices `c<k>`.
    pub fn to_dot(&self, name: &str) -> String {
        let cd = &self.cells;
        let mut out = format!("digraph \"{name}\" {{\n");
        for &(x, y, t) in &cd.link_arcs {
            let _ = writeln!(out, "  {} -> {} [label=\"{:?}\"];", cd.members[x], cd.members[y], t);
        }
        for (c, cell) in cd.cells.iter().enumerate() {
            let ids: Vec<String> = cell.iter().map(|&x| cd.members[x].to_string()).collect();
            let _ = writeln!(
                out,
                "  c{c} [label=\"{{{}}} K{}\"];",
                ids.join(","),
                self.clusters.cell_cluster[c]
            );
        }
        for &(c, c2, t) in &self.clusters.edges {
            let _ = writeln!(out, "  c{c} -> c{c2} [dir=none, style=dashed, label=\"{t:?}\"];");
        }
        for (t, h, a) in self.digraph.arcs() {
            let _ = writeln!(out, "  c{t} -> c{h} [label=\"{a:?}\"];");
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol1() -> Tolerance {
        Tolerance::new(1.0)
    }

    #[test]
    fn linked_separated_thresholds() {
        assert!(linked(tol1(), 0.0, 10.0, 10.0));
        assert!(separated(tol1(), 10.0, 0.0, 0.0));
        assert!(!linked(tol1(), 10.0, 10.0, 3.0) && !separated(tol1(), 10.0, 10.0, 3.0));
        // boundaries are exclusive
        assert!(!linked(tol1(), 7.0, 10.0, 0.0));
        assert!(!separated(tol1(), 13.0, 10.0, 0.0));
        assert!(separated(tol1(), 13.5, 10.0, 0.0));
    }

    // Members 0..m with global ids equal to local ones.
    fn decomposition(upper: &[f64], n: usize, dx: &[f64], eps: f64) -> (Dissimilarity, CellDecomposition) {
        let d = Dissimilarity::from_upper(n, upper).unwrap();
        let cd = CellDecomposition::build(&d, Tolerance::new(eps), (0..n).collect(), dx.to_vec());
        (d, cd)
    }

    #[test]
    fn arrow_rules() {
        // A1
        let (_, cd) = decomposition(&[5.0], 2, &[0.0, 10.0], 1.0);
        assert!(cd.arrow[0][1] && !cd.arrow[1][0]);
        // A2: equal midranges, witness z = 2 far from y = 1
        let (_, cd) = decomposition(&[50.0, 0.0, 100.0], 3, &[0.0, 0.0, 0.0], 1.0);
        assert!(!cd.linked[0][2] && !cd.linked[1][2]);
        assert!(cd.arrow[0][1]);
        assert!(!cd.arrow[1][0]);
        assert!((0..3).all(|x| !cd.arrow[x][x]));
    }

    #[test]
    fn empty_and_l2_cells() {
        let d = Dissimilarity::zeros(3).unwrap();
        let cd = CellDecomposition::build(&d, tol1(), Vec::new(), Vec::new());
        assert_eq!(cd.cell_count(), 0);
        assert_eq!(cd.block_count, 0);

        let (_, cd) = decomposition(&[0.0], 2, &[10.0, 10.0], 1.0);
        assert_eq!(cd.block_count, 1);
        assert_eq!(cd.cells, vec![vec![0, 1]]);
        assert!(cd.link_arcs.contains(&(0, 1, LinkArc::L2)) && cd.link_arcs.contains(&(1, 0, LinkArc::L2)));
    }

    #[test]
    fn arrow_in_block_is_one_cell_each() {
        // x=0, y=1 linked (d=4 < 10-3 but not < 10-5), 0 ↣ 1 by A1; z=2 far from both.
        let dx = [5.0, 10.0, 30.0];
        let (_, cd) = decomposition(&[6.0, 40.0, 40.0], 3, &dx, 1.0);
        assert!(cd.linked[0][1] && !cd.linked[0][2] && !cd.linked[1][2]);
        assert_eq!(cd.block_of[0], cd.block_of[1]);
        assert_ne!(cd.block_of[0], cd.block_of[2]);
        // L1 arc 0 -> 1 only (no L2 since 6 + 5 = 11 ≥ 10): three singleton cells
        assert_eq!(cd.link_arcs, vec![(0, 1, LinkArc::L1)]);
        assert_eq!(cd.cells, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn no_separation_means_singleton_clusters() {
        let (d, cd) = decomposition(&[20.0, 20.0, 20.0], 3, &[20.0, 20.0, 20.0], 1.0);
        let cs = ClusterStructure::build(&d, tol1(), &cd).unwrap();
        assert!(cs.edges.is_empty());
        assert_eq!(cs.clusters.len(), 3);
        assert!(cs.twin.iter().all(Option::is_none));
    }

    #[test]
    fn odd_separation_cycle_is_infeasible() {
        let (d, cd) = decomposition(&[20.0, 20.0, 20.0], 3, &[0.0, 0.0, 0.0], 1.0);
        assert!(matches!(
            ClusterStructure::build(&d, tol1(), &cd),
            Err(CellConflict::NotBipartite { .. })
        ));
    }

    #[test]
    fn single_separated_pair_and_principal_flag() {
        // separated needs gap > 3, strongly separated gap > 9
        for (dist, strong) in [(6.0, false), (12.0, true)] {
            let (d, cd) = decomposition(&[dist], 2, &[1.0, 1.0], 1.0);
            let cs = ClusterStructure::build(&d, tol1(), &cd).unwrap();
            assert_eq!(cs.edges, vec![(0, 1, SeparationEdge::S1)]);
            assert_eq!(cs.clusters, vec![vec![0], vec![1]]);
            assert_eq!(cs.twin, vec![Some(1), Some(0)]);
            assert_eq!(cs.principal, vec![strong]);
            let g = CellDigraph::build(&d, tol1(), &cd, &cs).unwrap();
            assert_eq!(g.arcs(), vec![(0, 1, ArcKind::G1), (1, 0, ArcKind::G1)]);
        }
    }

    #[test]
    fn midrange_gap_gives_single_g2_arc() {
        // unrelated pair (neither linked nor separated) with d_x gap 6 > 4
        let (d, cd) = decomposition(&[8.0], 2, &[2.0, 8.0], 1.0);
        let cs = ClusterStructure::build(&d, tol1(), &cd).unwrap();
        let g = CellDigraph::build(&d, tol1(), &cd, &cs).unwrap();
        assert_eq!(g.arcs(), vec![(0, 1, ArcKind::G2)]);
    }

    fn one_cycle_graph() -> (CellDigraph, Vec<usize>) {
        // K = {0, 2}, C = 1 in its own cluster: 0 ↣ 1 (G2), 1 ↣ 2 (G3), 2 ↣ 0 (G3)
        let g = CellDigraph::from_arcs(
            3,
            &[(0, 1, ArcKind::G2), (1, 2, ArcKind::G3), (2, 0, ArcKind::G3)],
        );
        (g, vec![0, 1, 0])
    }

    #[test]
    fn hand_built_one_cycle() {
        let (g, cl) = one_cycle_graph();
        assert_eq!(find_mixed_cycle(&g, &cl, (0, 1), 0, CycleKind::One), Some(vec![0, 1, 2]));
        assert_eq!(find_mixed_cycle(&g, &cl, (0, 1), 1, CycleKind::One), None);
        let om = omega_sets(&g, &cl);
        assert_eq!(om.one[1], vec![(0, 1)]);
        assert!(om.two.iter().chain(&om.three).all(Vec::is_empty));
    }

    #[test]
    fn chord_forces_shorter_cycle() {
        // K = {0, 2, 3}: 0 ↣ 1 (G2), 1 ↣ 2 ↣ 3 ↣ 0 (G3) plus 1 ↣ 3 chord.
        let arcs = [
            (0, 1, ArcKind::G2),
            (1, 2, ArcKind::G3),
            (2, 3, ArcKind::G3),
            (3, 0, ArcKind::G3),
            (1, 3, ArcKind::G3),
        ];
        let g = CellDigraph::from_arcs(4, &arcs);
        let cl = vec![0, 1, 0, 0];
        assert_eq!(find_mixed_cycle(&g, &cl, (0, 1), 0, CycleKind::One), Some(vec![0, 1, 3]));
        // a chord out of C0 removes the only interior cell
        let mut arcs2 = arcs.to_vec();
        arcs2.pop();
        arcs2.push((0, 3, ArcKind::G3));
        let g2 = CellDigraph::from_arcs(4, &arcs2);
        assert_eq!(find_mixed_cycle(&g2, &cl, (0, 1), 0, CycleKind::One), None);
    }

    #[test]
    fn two_cycles_fill_omega_two_and_three() {
        // A=0 ↣ B=1 ↣ D=2 (G2), D ↣ 3 ↣ A (G3); K = cluster of {0, 3}.
        let arcs = [
            (0, 1, ArcKind::G2),
            (1, 2, ArcKind::G2),
            (2, 3, ArcKind::G3),
            (3, 0, ArcKind::G3),
        ];
        let g = CellDigraph::from_arcs(4, &arcs);
        let outside = vec![0, 1, 2, 0];
        assert_eq!(
            find_mixed_cycle(&g, &outside, (0, 1), 0, CycleKind::TwoAfter(2)),
            Some(vec![0, 1, 2, 3])
        );
        assert_eq!(
            find_mixed_cycle(&g, &outside, (1, 2), 0, CycleKind::TwoBefore(0)),
            Some(vec![0, 1, 2, 3])
        );
        let om = omega_sets(&g, &outside);
        assert_eq!(om.two[1], vec![(0, 1)]);
        assert!(om.three[1].is_empty());

        let inside = vec![0, 0, 2, 0];
        let om = omega_sets(&g, &inside);
        assert!(om.two[1].is_empty());
        assert_eq!(om.three[1], vec![(1, 2)]);
    }

    #[test]
    fn no_mixed_cycles_no_omega() {
        let g = CellDigraph::from_arcs(3, &[(0, 1, ArcKind::G2), (1, 2, ArcKind::G3)]);
        assert!(omega_sets(&g, &[0, 1, 2]).is_empty());
        assert_eq!(find_mixed_cycle(&g, &[0, 0, 0], (0, 1), 0, CycleKind::One), None);
    }

    #[test]
    fn dot_dump_lists_arcs() {
        let (d, cd) = decomposition(&[12.0], 2, &[1.0, 1.0], 1.0);
        let cs = ClusterStructure::build(&d, tol1(), &cd).unwrap();
        let g = CellDigraph::build(&d, tol1(), &cd, &cs).unwrap();
        let om = omega_sets(&g, &cs.cell_cluster);
        let cg = ClassGraphs { cells: cd, clusters: cs, digraph: g, omega: om };
        let dot = cg.to_dot("X_0_3");
        assert!(dot.starts_with("digraph \"X_0_3\" {"));
        assert!(dot.contains("c0 -> c1 [label=\"G1\"];"));
        assert!(dot.contains("c0 -> c1 [dir=none, style=dashed, label=\"S1\"];"));
    }
}
