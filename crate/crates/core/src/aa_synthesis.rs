//! Assume-admissible synthesis: build the labelled game G̅ with its Φ_AA
//! objective, decide existence of a winner (exactly for safety games via
//! LA-pruning, exactly-at-bound otherwise), and extract an admissible
//! strategy that wins against all admissible adversary profiles.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::admissibility::{
    classify_strategy, dominating_admissible, la_actions, LaTable,
};
use crate::arena::{ActionId, Arena, ArenaBuilder, MixedMove, MooreStrategy, Player, StateId};
use crate::error::{GameError, Result};
use crate::graph;
use crate::objectives::{Objective, ObjectiveKind, Semantics};
use crate::values::{state_values, winning_moves, StateValueTable};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// The derived game G̅: states are `init'` plus pairs (base state, last joint
/// LA-action tuple); all moves are LA Dirac actions; the observation function
/// projects labels away.
#[derive(Debug, Clone)]
pub struct LabelledArena {
    /// `None` for the initial node, else (state, joint action tuple).
    labels: Vec<Option<(StateId, Vec<ActionId>)>>,
    obs: Vec<StateId>,
    /// Edges per node: (joint LA tuple, target node).
    edges: Vec<Vec<(Vec<ActionId>, usize)>>,
    la_tables: Vec<LaTable>,
    protagonist: Player,
    semantics: Semantics,
}

impl LabelledArena {
    pub fn num_nodes(&self) -> usize {
        self.obs.len()
    }

    pub fn obs(&self, x: usize) -> StateId {
        self.obs[x]
    }

    pub fn label(&self, x: usize) -> Option<&(StateId, Vec<ActionId>)> {
        self.labels[x].as_ref()
    }

    pub fn edges(&self, x: usize) -> &[(Vec<ActionId>, usize)] {
        &self.edges[x]
    }

    pub fn la_table(&self, q: Player) -> &LaTable {
        &self.la_tables[q.0]
    }

    pub fn protagonist(&self) -> Player {
        self.protagonist
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    /// Base states occurring as observations, ascending.
    pub fn obs_alphabet(&self) -> Vec<StateId> {
        let mut set: Vec<StateId> = self.obs.clone();
        set.sort();
        set.dedup();
        set
    }
}

/// Atom node-sets of G̅ feeding Φ_AA.
#[derive(Debug, Clone)]
pub struct AaAtoms {
    /// Per player: nodes whose observed state has value 0 / 1.
    pub val0: Vec<BTreeSet<usize>>,
    pub val1: Vec<BTreeSet<usize>>,
    /// Per player: labelled nodes witnessing that another resolution of the
    /// opponents' move would have kept the player's hopes alive.
    pub after_help: Vec<BTreeSet<usize>>,
}

/// Formula over registered node sets; `Reach` is ◇, `InfOften` is □◇.
#[derive(Debug, Clone)]
pub enum Formula {
    Reach(usize),
    InfOften(usize),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Or(vec![Formula::Not(Box::new(lhs)), rhs])
    }
}

/// The fixed Φ_AA shape instantiated with concrete node sets of G̅.
#[derive(Debug, Clone)]
pub struct AaFormula {
    /// Registered sets: (name, member nodes of the labelled arena).
    pub sets: Vec<(String, BTreeSet<usize>)>,
    pub root: Formula,
}

impl AaFormula {
    fn register(&mut self, name: String, set: BTreeSet<usize>) -> usize {
        if let Some(i) = self.sets.iter().position(|(n, _)| *n == name) {
            return i;
        }
        self.sets.push((name, set));
        self.sets.len() - 1
    }
}

/// A win condition lifted to G̅ nodes as a formula over registered sets.
fn win_formula(
    formula: &mut AaFormula,
    labelled: &LabelledArena,
    objective: &Objective,
    q: Player,
) -> Formula {
    let lift = |set: &BTreeSet<StateId>| -> BTreeSet<usize> {
        (0..labelled.num_nodes())
            .filter(|&x| set.contains(&labelled.obs(x)))
            .collect()
    };
    match &objective.kind {
        ObjectiveKind::Safety(bad) => {
            let i = formula.register(format!("bad_{}", q.0 + 1), lift(bad));
            Formula::Not(Box::new(Formula::Reach(i)))
        }
        ObjectiveKind::Reachability(target) => {
            let i = formula.register(format!("target_{}", q.0 + 1), lift(target));
            Formula::Reach(i)
        }
        ObjectiveKind::Buchi(acc) => {
            let i = formula.register(format!("acc_{}", q.0 + 1), lift(acc));
            Formula::InfOften(i)
        }
    }
}

/// Builds G̅ for protagonist `p`: reachable labelled arena, atom sets, and
/// the Φ_AA formula `(∧_{q≠p} φ0_q ∧ φ1_q) → (Win_p ∨ ◇Val1_p)`.
pub fn build_aa_game(
    arena: &Arena,
    objectives: &[Objective],
    p: Player,
    semantics: Semantics,
) -> Result<(LabelledArena, AaAtoms, AaFormula)> {
    if objectives.len() != arena.num_players() {
        return Err(GameError::Invalid("one objective per player required".into()));
    }
    if p.0 >= arena.num_players() {
        return Err(GameError::Invalid("protagonist out of range".into()));
    }
    let mut la_tables = Vec::with_capacity(arena.num_players());
    let mut values: Vec<StateValueTable> = Vec::with_capacity(arena.num_players());
    for q in arena.players() {
        la_tables.push(la_actions(arena, &objectives[q.0], semantics)?);
        values.push(state_values(arena, &objectives[q.0], semantics)?);
    }

    // Reachable labelled states.
    let mut labels: Vec<Option<(StateId, Vec<ActionId>)>> = vec![None];
    let mut obs = vec![arena.init()];
    let mut index: HashMap<(StateId, Vec<ActionId>), usize> = HashMap::new();
    let mut edges: Vec<Vec<(Vec<ActionId>, usize)>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let s = obs[x];
        // Joint LA tuples, lexicographic by (player, action order).
        let slots: Vec<&[ActionId]> = arena
            .players()
            .map(|q| la_tables[q.0].la_actions(s))
            .collect();
        let mut tuples = vec![Vec::new()];
        for slot in &slots {
            let mut next = Vec::with_capacity(tuples.len() * slot.len());
            for t in &tuples {
                for &a in *slot {
                    let mut tt: Vec<ActionId> = t.clone();
                    tt.push(a);
                    next.push(tt);
                }
            }
            tuples = next;
        }
        let mut out = Vec::with_capacity(tuples.len());
        for tuple in tuples {
            let t = arena.successor(s, &tuple);
            let key = (t, tuple.clone());
            let target = match index.get(&key) {
                Some(&i) => i,
                None => {
                    let i = labels.len();
                    index.insert(key.clone(), i);
                    labels.push(Some(key));
                    obs.push(t);
                    edges.push(Vec::new()); // placeholder alignment below
                    queue.push_back(i);
                    i
                }
            };
            out.push((tuple, target));
        }
        if edges.len() <= x {
            edges.resize_with(x + 1, Vec::new);
        }
        edges[x] = out;
    }
    // `edges` placeholders created eagerly may leave trailing empties for
    // nodes still in the queue; normalise the length.
    edges.resize_with(labels.len(), Vec::new);

    let labelled = LabelledArena {
        labels,
        obs,
        edges,
        la_tables,
        protagonist: p,
        semantics,
    };

    // Observation-commutation invariant: o(δ̄(x, b⃗)) = δ(o(x), b⃗).
    for x in 0..labelled.num_nodes() {
        for (tuple, t) in labelled.edges(x) {
            debug_assert_eq!(
                labelled.obs(*t),
                arena.successor(labelled.obs(x), tuple),
                "observation does not commute with the transition"
            );
        }
    }

    // Atom sets.
    let mut val0 = vec![BTreeSet::new(); arena.num_players()];
    let mut val1 = vec![BTreeSet::new(); arena.num_players()];
    let mut after_help = vec![BTreeSet::new(); arena.num_players()];
    for x in 0..labelled.num_nodes() {
        let s = labelled.obs(x);
        for q in arena.players() {
            match values[q.0].get(s) {
                0 => {
                    val0[q.0].insert(x);
                }
                1 => {
                    val1[q.0].insert(x);
                }
                _ => {}
            }
        }
        if let Some((_, tuple)) = labelled.label(x) {
            for q in arena.players() {
                if values[q.0].get(s) != 0 {
                    continue;
                }
                let aq = tuple[q.0];
                let sq = arena.action(aq).state;
                let helped = arena.adversary_tuples(sq, q).iter().any(|adv| {
                    let t = arena.successor_one(sq, q, aq, adv);
                    t != s && values[q.0].get(t) >= 0
                });
                if helped {
                    after_help[q.0].insert(x);
                }
            }
        }
    }
    let atoms = AaAtoms {
        val0,
        val1,
        after_help,
    };

    // Φ_AA.
    let mut formula = AaFormula {
        sets: Vec::new(),
        root: Formula::And(Vec::new()),
    };
    let all: BTreeSet<usize> = (0..labelled.num_nodes()).collect();
    let mut hypothesis = Vec::new();
    for q in arena.players() {
        if q == p {
            continue;
        }
        let not_val0: BTreeSet<usize> = all.difference(&atoms.val0[q.0]).copied().collect();
        let i_nv0 = formula.register(format!("notval0_{}", q.0 + 1), not_val0);
        let i_ah = formula.register(
            format!("afterhelp_{}", q.0 + 1),
            atoms.after_help[q.0].clone(),
        );
        let i_v1 = formula.register(format!("val1_{}", q.0 + 1), atoms.val1[q.0].clone());
        let win_q = win_formula(&mut formula, &labelled, &objectives[q.0], q);
        // φ0_q = ◇¬Val0_q ∨ Win_q ∨ □◇AfterHelp_q
        hypothesis.push(Formula::Or(vec![
            Formula::Reach(i_nv0),
            win_q.clone(),
            Formula::InfOften(i_ah),
        ]));
        // φ1_q = ◇Val1_q → Win_q
        hypothesis.push(Formula::implies(Formula::Reach(i_v1), win_q));
    }
    let i_v1p = formula.register(format!("val1_{}", p.0 + 1), atoms.val1[p.0].clone());
    let win_p = win_formula(&mut formula, &labelled, &objectives[p.0], p);
    formula.root = Formula::implies(
        Formula::And(hypothesis),
        Formula::Or(vec![win_p, Formula::Reach(i_v1p)]),
    );

    Ok((labelled, atoms, formula))
}

/// A finite graph with per-node membership bitmask over the formula's sets.
#[derive(Debug, Clone)]
pub struct AtomGraph {
    pub succ: Vec<Vec<usize>>,
    /// Bit `i` set iff the node belongs to `sets[i]`.
    pub membership: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub holds: bool,
    /// A violating lasso (prefix, cycle) when `holds` is false; the run is
    /// `prefix · cycle^ω` starting at node 0.
    pub counterexample: Option<(Vec<usize>, Vec<usize>)>,
}

/// Evaluates the formula on a lasso of the atom graph.
pub fn eval_formula_on_lasso(
    g: &AtomGraph,
    formula: &Formula,
    prefix: &[usize],
    cycle: &[usize],
) -> bool {
    let mut anywhere = 0u64;
    let mut in_cycle = 0u64;
    for &v in prefix {
        anywhere |= g.membership[v];
    }
    for &v in cycle {
        anywhere |= g.membership[v];
        in_cycle |= g.membership[v];
    }
    eval_formula(formula, &|atom| match atom {
        AtomRef::Reach(i) => anywhere & (1 << i) != 0,
        AtomRef::InfOften(i) => in_cycle & (1 << i) != 0,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum AtomRef {
    Reach(usize),
    InfOften(usize),
}

fn eval_formula(f: &Formula, atom: &dyn Fn(AtomRef) -> bool) -> bool {
    match f {
        Formula::Reach(i) => atom(AtomRef::Reach(*i)),
        Formula::InfOften(i) => atom(AtomRef::InfOften(*i)),
        Formula::Not(g) => !eval_formula(g, atom),
        Formula::And(gs) => gs.iter().all(|g| eval_formula(g, atom)),
        Formula::Or(gs) => gs.iter().any(|g| eval_formula(g, atom)),
    }
}

fn collect_atoms(f: &Formula, out: &mut BTreeSet<AtomRef>) {
    match f {
        Formula::Reach(i) => {
            out.insert(AtomRef::Reach(*i));
        }
        Formula::InfOften(i) => {
            out.insert(AtomRef::InfOften(*i));
        }
        Formula::Not(g) => collect_atoms(g, out),
        Formula::And(gs) | Formula::Or(gs) => {
            for g in gs {
                collect_atoms(g, out);
            }
        }
    }
}

/// Decides whether every infinite path from node 0 satisfies the formula;
/// returns a violating lasso otherwise.  Works by enumerating truth
/// assignments of the atoms, restricting the graph accordingly, and hunting
/// for a reachable SCC realising the assignment.
pub fn check_universal(g: &AtomGraph, formula: &Formula) -> Result<CheckResult> {
    let n = g.succ.len();
    if n == 0 {
        return Err(GameError::Invalid("empty graph".into()));
    }
    let reach_mask = graph::reachable_from(&g.succ, [0]);
    for v in 0..n {
        if reach_mask[v] && g.succ[v].is_empty() {
            return Err(GameError::Invalid(format!("dead-end node {v}")));
        }
    }

    let mut atoms = BTreeSet::new();
    collect_atoms(formula, &mut atoms);
    let atoms: Vec<AtomRef> = atoms.into_iter().collect();
    let k = atoms.len();
    if k > 20 {
        return Err(GameError::Budget(format!("{k} distinct atoms (max 20)")));
    }

    let in_set = |v: usize, i: usize| g.membership[v] & (1 << i) != 0;

    for assignment in 0u32..(1u32 << k) {
        let truth = |a: AtomRef| -> bool {
            let i = atoms.iter().position(|&b| b == a).unwrap();
            assignment & (1 << i) != 0
        };
        // Only assignments falsifying the formula can yield counterexamples.
        if eval_formula(formula, &|a| truth(a)) {
            continue;
        }
        let reach_true: Vec<usize> = atoms
            .iter()
            .filter_map(|&a| match a {
                AtomRef::Reach(i) if truth(a) => Some(i),
                _ => None,
            })
            .collect();
        let reach_false: Vec<usize> = atoms
            .iter()
            .filter_map(|&a| match a {
                AtomRef::Reach(i) if !truth(a) => Some(i),
                _ => None,
            })
            .collect();
        let inf_true: Vec<usize> = atoms
            .iter()
            .filter_map(|&a| match a {
                AtomRef::InfOften(i) if truth(a) => Some(i),
                _ => None,
            })
            .collect();
        let inf_false: Vec<usize> = atoms
            .iter()
            .filter_map(|&a| match a {
                AtomRef::InfOften(i) if !truth(a) => Some(i),
                _ => None,
            })
            .collect();
        if reach_true.len() > 16 {
            return Err(GameError::Budget("too many positive reach atoms".into()));
        }

        // allowed1: whole run; allowed2: cycle part.
        let allowed1 =
            |v: usize| reach_mask[v] && reach_false.iter().all(|&i| !in_set(v, i));
        let allowed2 = |v: usize| allowed1(v) && inf_false.iter().all(|&i| !in_set(v, i));
        if !allowed1(0) {
            continue;
        }
        let succ2: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                if allowed2(v) {
                    g.succ[v].iter().copied().filter(|&w| allowed2(w)).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let mut candidates: Vec<Vec<usize>> = graph::tarjan_scc(&succ2)
            .into_iter()
            .filter(|comp| {
                allowed2(comp[0])
                    && (comp.len() > 1 || succ2[comp[0]].contains(&comp[0]))
                    && inf_true
                        .iter()
                        .all(|&i| comp.iter().any(|&v| in_set(v, i)))
            })
            .collect();
        candidates.sort_by_key(|c| c[0]);

        for comp in candidates {
            let in_comp = |v: usize| comp.binary_search(&v).is_ok();
            let comp_bits: u32 = reach_true
                .iter()
                .enumerate()
                .filter(|&(_, &i)| comp.iter().any(|&v| in_set(v, i)))
                .fold(0, |m, (j, _)| m | (1 << j));
            let full: u32 = if reach_true.is_empty() {
                0
            } else {
                (1 << reach_true.len()) - 1
            };
            let bits_of = |v: usize| -> u32 {
                reach_true
                    .iter()
                    .enumerate()
                    .filter(|&(_, &i)| in_set(v, i))
                    .fold(0, |m, (j, _)| m | (1 << j))
            };

            // BFS over (node, touched reach-true bits) inside allowed1 until
            // a component node with total coverage is found.
            let width = 1usize << reach_true.len();
            let enc = |v: usize, m: u32| v * width + m as usize;
            let mut prev = vec![usize::MAX; n * width];
            let mut seen = vec![false; n * width];
            let start = enc(0, bits_of(0));
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            let mut hit = None;
            if in_comp(0) && bits_of(0) | comp_bits == full {
                hit = Some(start);
            }
            while hit.is_none() {
                let Some(cur) = queue.pop_front() else { break };
                let (v, m) = (cur / width, (cur % width) as u32);
                for &w in &g.succ[v] {
                    if !allowed1(w) {
                        continue;
                    }
                    let nm = m | bits_of(w);
                    let code = enc(w, nm);
                    if !seen[code] {
                        seen[code] = true;
                        prev[code] = cur;
                        if in_comp(w) && nm | comp_bits == full {
                            hit = Some(code);
                            break;
                        }
                        queue.push_back(code);
                    }
                }
            }
            let Some(mut code) = hit else { continue };

            // Reconstruct the prefix (without the cycle head).
            let mut path = vec![code / width];
            while prev[code] != usize::MAX {
                code = prev[code];
                path.push(code / width);
            }
            path.reverse();
            let head = *path.last().unwrap();
            let prefix: Vec<usize> = path[..path.len() - 1].to_vec();
            let prefix_bits = {
                let mut m = 0u32;
                for &v in path.iter() {
                    m |= bits_of(v);
                }
                m
            };

            // Closed walk in the component from `head` touching every
            // positive InfOften set and the reach-true sets not already
            // covered by the prefix.
            let mut required: Vec<usize> = Vec::new();
            for &i in &inf_true {
                required.push(i);
            }
            for (j, &i) in reach_true.iter().enumerate() {
                if prefix_bits & (1 << j) == 0 {
                    required.push(i);
                }
            }
            let mut cycle = vec![head];
            let mut cur = head;
            let allowed_c = |v: usize| in_comp(v);
            for &i in &required {
                if cycle.iter().any(|&v| in_set(v, i)) {
                    continue;
                }
                let leg = graph::bfs_path(&g.succ, cur, &|v| in_set(v, i), &allowed_c)
                    .expect("candidate component intersects required set");
                cycle.extend(&leg[1..]);
                cur = *cycle.last().unwrap();
            }
            if cycle.len() == 1 {
                if !g.succ[head].contains(&head) {
                    // Single node without self-loop: walk around the
                    // component once.
                    let next = *succ2[head]
                        .iter()
                        .find(|&&w| in_comp(w))
                        .expect("cyclic component");
                    let back = graph::bfs_path(&g.succ, next, &|v| v == head, &allowed_c)
                        .expect("component is strongly connected");
                    cycle.extend(&back[..back.len() - 1]);
                }
            } else {
                // Close the walk back to `head`.
                let back = graph::bfs_path(&g.succ, cur, &|v| v == head, &allowed_c)
                    .expect("component is strongly connected");
                cycle.extend(&back[1..back.len().max(1) - 1 + 1]);
                cycle.pop();
                let _ = cycle; // keep clippy quiet about the dance above
            }

            debug_assert!(
                !eval_formula_on_lasso(g, formula, &prefix, &cycle),
                "constructed lasso must violate the formula"
            );
            if eval_formula_on_lasso(g, formula, &prefix, &cycle) {
                return Err(GameError::Validation(
                    "internal error: counterexample failed direct validation".into(),
                ));
            }
            return Ok(CheckResult {
                holds: false,
                counterexample: Some((prefix, cycle)),
            });
        }
    }
    Ok(CheckResult {
        holds: true,
        counterexample: None,
    })
}

/// Machine-restricted subgraph of G̅ for an observation-based Dirac machine:
/// nodes are (labelled node, memory), root is (init', initial memory); the
/// adversary keeps all LA tuples agreeing with the machine's output.
fn restricted_graph(
    labelled: &LabelledArena,
    formula: &AaFormula,
    _mems: usize,
    init_mem: usize,
    out: &dyn Fn(usize, StateId) -> Option<ActionId>,
    upd: &dyn Fn(usize, StateId) -> usize,
) -> Result<(AtomGraph, Vec<(usize, usize)>)> {
    let p = labelled.protagonist();
    let mut nodes: Vec<(usize, usize)> = vec![(0, init_mem)];
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    index.insert((0, init_mem), 0);
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let (x, m) = nodes[v];
        let s = labelled.obs(x);
        let a = out(m, s).ok_or_else(|| {
            GameError::Invalid(format!("machine output undefined at observation {}", s.0))
        })?;
        if !labelled.la_table(p).is_la(s, a) {
            return Err(GameError::Invalid(
                "machine output is not an LA action".into(),
            ));
        }
        let m2 = upd(m, s);
        let mut row = Vec::new();
        for (tuple, t) in labelled.edges(x) {
            if tuple[p.0] != a {
                continue;
            }
            let key = (*t, m2);
            let w = match index.get(&key) {
                Some(&i) => i,
                None => {
                    let i = nodes.len();
                    index.insert(key, i);
                    nodes.push(key);
                    queue.push_back(i);
                    i
                }
            };
            if !row.contains(&w) {
                row.push(w);
            }
        }
        if succ.len() <= v {
            succ.resize_with(v + 1, Vec::new);
        }
        succ[v] = row;
    }
    succ.resize_with(nodes.len(), Vec::new);

    if formula.sets.len() > 64 {
        return Err(GameError::Budget("more than 64 atom sets".into()));
    }
    let membership: Vec<u64> = nodes
        .iter()
        .map(|&(x, _)| {
            formula
                .sets
                .iter()
                .enumerate()
                .filter(|(_, (_, set))| set.contains(&x))
                .fold(0u64, |m, (i, _)| m | (1 << i))
        })
        .collect();
    Ok((AtomGraph { succ, membership }, nodes))
}

#[derive(Debug, Clone)]
pub enum SynthOutcome {
    Winner(MooreStrategy),
    NoneAtBound,
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub memory_bound: usize,
    /// Maximum number of candidate machines to examine.
    pub machine_budget: u64,
    pub parallel: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            memory_bound: 2,
            machine_budget: 2_000_000,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

/// Decodes candidate machine `index` for `mems` memories over the given
/// observation alphabet; output digits are most significant (memory-major,
/// observation-minor), update digits follow.
struct MachineSpace {
    obs: Vec<StateId>,
    /// LA actions per observation (protagonist's).
    choices: Vec<Vec<ActionId>>,
    mems: usize,
}

impl MachineSpace {
    fn total(&self) -> u128 {
        let mut t: u128 = 1;
        for _ in 0..self.mems {
            for c in &self.choices {
                t = t.saturating_mul(c.len() as u128);
            }
        }
        for _ in 0..self.mems * self.obs.len() {
            t = t.saturating_mul(self.mems as u128);
        }
        t
    }

    fn decode(&self, index: u128) -> (Vec<Vec<ActionId>>, Vec<Vec<usize>>) {
        let n = self.obs.len();
        let upd_total: u128 = (self.mems as u128).pow((self.mems * n) as u32);
        let mut out_i = index / upd_total;
        let mut upd_i = index % upd_total;
        // Least-significant digit is the last (memory, observation) slot.
        let mut out = vec![vec![ActionId(0); n]; self.mems];
        for m in (0..self.mems).rev() {
            for j in (0..n).rev() {
                let r = self.choices[j].len() as u128;
                out[m][j] = self.choices[j][(out_i % r) as usize];
                out_i /= r;
            }
        }
        let mut upd = vec![vec![0usize; n]; self.mems];
        for m in (0..self.mems).rev() {
            for j in (0..n).rev() {
                upd[m][j] = (upd_i % self.mems as u128) as usize;
                upd_i /= self.mems as u128;
            }
        }
        (out, upd)
    }
}

/// Exact-at-bound synthesis: enumerate observation-based Dirac Moore
/// machines with up to `memory_bound` memories (memory count ascending, then
/// lexicographic over output then update tables) and return the first whose
/// restricted G̅ subgraph surely satisfies Φ_AA.
pub fn synthesize_aa_bounded(
    arena: &Arena,
    objectives: &[Objective],
    p: Player,
    semantics: Semantics,
    options: &SynthOptions,
) -> Result<SynthOutcome> {
    if options.memory_bound == 0 {
        return Err(GameError::Invalid("memory bound must be at least 1".into()));
    }
    let (labelled, _atoms, formula) = build_aa_game(arena, objectives, p, semantics)?;
    let obs = labelled.obs_alphabet();
    let choices: Vec<Vec<ActionId>> = obs
        .iter()
        .map(|&s| labelled.la_table(p).la_actions(s).to_vec())
        .collect();

    let mut budget = options.machine_budget as u128;
    for mems in 1..=options.memory_bound {
        let space = MachineSpace {
            obs: obs.clone(),
            choices: choices.clone(),
            mems,
        };
        let total = space.total();
        let slice = total.min(budget);
        let obs_index: BTreeMap<usize, usize> =
            obs.iter().enumerate().map(|(j, s)| (s.0, j)).collect();

        let check = |i: u64| -> bool {
            let (out, upd) = space.decode(i as u128);
            let outf = |m: usize, s: StateId| obs_index.get(&s.0).map(|&j| out[m][j]);
            let updf =
                |m: usize, s: StateId| obs_index.get(&s.0).map(|&j| upd[m][j]).unwrap_or(m);
            let Ok((g, nodes)) = restricted_graph(&labelled, &formula, mems, 0, &outf, &updf)
            else {
                return false;
            };
            // Symmetry pruning: machines not using all memories duplicate a
            // smaller machine already enumerated.
            if mems > 1 {
                let used: BTreeSet<usize> = nodes.iter().map(|&(_, m)| m).collect();
                if used.len() < mems {
                    return false;
                }
            }
            matches!(check_universal(&g, &formula.root), Ok(r) if r.holds)
        };

        let found = find_first_index(slice as u64, options.parallel, &check);
        if let Some(i) = found {
            let (out, upd) = space.decode(i as u128);
            let mut winner = MooreStrategy::new(
                p,
                (0..mems).map(|m| format!("m{m}")).collect(),
                0,
            );
            for (j, &s) in obs.iter().enumerate() {
                for m in 0..mems {
                    winner.set_output(m, s, MixedMove::dirac(out[m][j]));
                    if upd[m][j] != m {
                        winner.set_update(m, s, upd[m][j]);
                    }
                }
            }
            return Ok(SynthOutcome::Winner(winner));
        }
        if slice < total {
            return Err(GameError::Budget(format!(
                "machine budget exhausted at memory count {mems} ({} of {} candidates tried)",
                slice, total
            )));
        }
        budget -= total.min(budget);
        if budget == 0 && mems < options.memory_bound {
            return Err(GameError::Budget(
                "machine budget exhausted before reaching the memory bound".into(),
            ));
        }
    }
    Ok(SynthOutcome::NoneAtBound)
}

#[cfg(feature = "parallel")]
fn find_first_index(n: u64, parallel: bool, check: &(dyn Fn(u64) -> bool + Sync)) -> Option<u64> {
    if parallel {
        (0..n).into_par_iter().find_first(|&i| check(i))
    } else {
        (0..n).find(|&i| check(i))
    }
}

#[cfg(not(feature = "parallel"))]
fn find_first_index(n: u64, _parallel: bool, check: &(dyn Fn(u64) -> bool + Sync)) -> Option<u64> {
    (0..n).find(|&i| check(i))
}

/// Exact safety-game synthesis by LA-pruning: restrict every player to LA
/// actions, solve the protagonist's sure safety game on the pruned arena, and
/// return the memoryless Dirac winner (LA, hence admissible) or NONE.
pub fn synthesize_aa_safety(
    arena: &Arena,
    objectives: &[Objective],
    p: Player,
) -> Result<Option<MooreStrategy>> {
    for obj in objectives {
        if !matches!(obj.kind, ObjectiveKind::Safety(_)) {
            return Err(GameError::Invalid(
                "synthesize_aa_safety requires all-safety objectives".into(),
            ));
        }
    }
    // For safety both semantics coincide.
    let semantics = Semantics::Sure;
    let mut tables = Vec::new();
    for q in arena.players() {
        tables.push(la_actions(arena, &objectives[q.0], semantics)?);
    }

    // Pruned arena over LA actions only.
    let mut b = ArenaBuilder::new(arena.num_players());
    for s in arena.states() {
        b.add_state(arena.state_name(s))?;
    }
    b.set_init(arena.init());
    let mut back: BTreeMap<usize, ActionId> = BTreeMap::new();
    let mut fwd: BTreeMap<usize, ActionId> = BTreeMap::new();
    for s in arena.states() {
        for q in arena.players() {
            for &a in tables[q.0].la_actions(s) {
                let na = b.add_action(q, s, arena.action_name(a))?;
                back.insert(na.0, a);
                fwd.insert(a.0, na);
            }
        }
    }
    for s in arena.states() {
        for profile in arena.joint_profiles(s) {
            if !profile
                .iter()
                .enumerate()
                .all(|(q, a)| tables[q].la_actions(s).contains(a))
            {
                continue;
            }
            let np: Vec<ActionId> = profile.iter().map(|a| fwd[&a.0]).collect();
            b.add_transition(s, &np, arena.successor(s, &profile))?;
        }
    }
    let pruned = b.build()?;
    let pruned_obj = Objective {
        owner: p,
        kind: objectives[p.0].kind.clone(),
    };
    let region = crate::values::winning_region(&pruned, &pruned_obj, semantics)?;
    if !region.contains(&pruned.init()) {
        return Ok(None);
    }
    let wmoves = winning_moves(&pruned, &pruned_obj, semantics)?;
    let mut moves: BTreeMap<StateId, MixedMove> = BTreeMap::new();
    for s in arena.states() {
        let a = match wmoves.get(&s) {
            Some(mv) => back[&mv.support().next().unwrap().0],
            // Outside the winning region play the lowest LA action: for
            // safety LA already implies admissible.
            None => tables[p.0].la_actions(s)[0],
        };
        moves.insert(s, MixedMove::dirac(a));
    }
    Ok(Some(MooreStrategy::memoryless(p, moves)))
}

/// Theorem-3 extraction: re-verify the G̅ winner, extend it to a full
/// strategy of G, splice the winning moves at value-1 states, and repair with
/// [`dominating_admissible`].
pub fn extract_admissible_winner(
    arena: &Arena,
    objectives: &[Objective],
    p: Player,
    semantics: Semantics,
    winner: &MooreStrategy,
) -> Result<MooreStrategy> {
    if winner.player() != p {
        return Err(GameError::Invalid("winner belongs to a different player".into()));
    }
    let (labelled, _atoms, formula) = build_aa_game(arena, objectives, p, semantics)?;
    let mems = winner.num_memories();
    let outf = |m: usize, s: StateId| -> Option<ActionId> {
        winner.move_at(m, s).and_then(|mv| {
            if mv.is_dirac() {
                mv.support().next()
            } else {
                None
            }
        })
    };
    let updf = |m: usize, s: StateId| winner.next_memory(m, s);
    let (g, _) = restricted_graph(&labelled, &formula, mems, winner.init_memory(), &outf, &updf)?;
    let verdict = check_universal(&g, &formula.root)?;
    if !verdict.holds {
        return Err(GameError::Invalid(
            "winner fails re-verification against Φ_AA".into(),
        ));
    }

    // (i) extension to all of G; (ii) winning splice at value-1 states.
    let la = la_actions(arena, &objectives[p.0], semantics)?;
    let values = state_values(arena, &objectives[p.0], semantics)?;
    let wmoves = winning_moves(arena, &objectives[p.0], semantics)?;
    let mut extended = winner.clone();
    for s in arena.states() {
        for m in 0..mems {
            if values.get(s) == 1 {
                extended.set_output(m, s, wmoves[&s].clone());
            } else if extended.move_at(m, s).is_none() {
                extended.set_output(m, s, MixedMove::dirac(la.la_actions(s)[0]));
            }
        }
    }
    // (iii) Lemma-8 repair.
    let repaired = dominating_admissible(arena, &objectives[p.0], semantics, &extended)?;
    let verdict = classify_strategy(arena, &objectives[p.0], semantics, &repaired)?;
    if !verdict.admissible {
        return Err(GameError::Validation(
            "extracted strategy failed the admissibility check".into(),
        ));
    }
    Ok(repaired)
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub total: usize,
    /// Indices of adversary profiles against which the candidate loses.
    pub losing: Vec<usize>,
}

/// Exact win check of `candidate` against each admissible adversary profile:
/// the full profile induces a finite chain; sure — every path satisfies
/// Φ(p); almost-sure — probability-1 check on the chain.
pub fn validate_vs_admissible(
    arena: &Arena,
    objectives: &[Objective],
    p: Player,
    semantics: Semantics,
    candidate: &MooreStrategy,
    suite: &[Vec<MooreStrategy>],
) -> Result<ValidationReport> {
    let mut losing = Vec::new();
    for (idx, adversaries) in suite.iter().enumerate() {
        if adversaries.len() != arena.num_players() - 1 {
            return Err(GameError::Invalid(format!(
                "profile {idx} must supply one strategy per opponent"
            )));
        }
        let mut profile: Vec<&MooreStrategy> = Vec::new();
        let mut ai = 0;
        for q in arena.players() {
            if q == p {
                profile.push(candidate);
            } else {
                let strat = &adversaries[ai];
                ai += 1;
                if strat.player() != q {
                    return Err(GameError::Invalid(format!(
                        "profile {idx}: expected a player-{} strategy",
                        q.0 + 1
                    )));
                }
                let verdict = classify_strategy(arena, &objectives[q.0], semantics, strat)?;
                if !verdict.admissible {
                    return Err(GameError::Invalid(format!(
                        "profile {idx}: player-{} strategy is not admissible",
                        q.0 + 1
                    )));
                }
                profile.push(strat);
            }
        }
        if !profile_wins(arena, &objectives[p.0], semantics, &profile)? {
            losing.push(idx);
        }
    }
    Ok(ValidationReport {
        total: suite.len(),
        losing,
    })
}

/// Win check for a full profile on its induced chain.
fn profile_wins(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
    profile: &[&MooreStrategy],
) -> Result<bool> {
    // Chain nodes: (state, memory vector).
    let mut nodes: Vec<(StateId, Vec<usize>)> = vec![(
        arena.init(),
        profile.iter().map(|s| s.init_memory()).collect(),
    )];
    let mut index: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    index.insert((arena.init().0, nodes[0].1.clone()), 0);
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let (s, mems) = nodes[v].clone();
        let mut slots: Vec<Vec<ActionId>> = Vec::new();
        for (q, strat) in profile.iter().enumerate() {
            let mv = strat.move_at(mems[q], s).ok_or_else(|| {
                GameError::Invalid(format!(
                    "player-{} strategy undefined at state `{}`",
                    q + 1,
                    arena.state_name(s)
                ))
            })?;
            mv.validate_at(arena, Player(q), s)?;
            slots.push(mv.support_vec());
        }
        let next_mems: Vec<usize> = profile
            .iter()
            .enumerate()
            .map(|(q, strat)| strat.next_memory(mems[q], s))
            .collect();
        let mut row = Vec::new();
        let mut tuples = vec![Vec::new()];
        for slot in &slots {
            let mut next = Vec::with_capacity(tuples.len() * slot.len());
            for t in &tuples {
                for &a in slot {
                    let mut tt: Vec<ActionId> = t.clone();
                    tt.push(a);
                    next.push(tt);
                }
            }
            tuples = next;
        }
        for tuple in tuples {
            let t = arena.successor(s, &tuple);
            let key = (t.0, next_mems.clone());
            let w = match index.get(&key) {
                Some(&i) => i,
                None => {
                    let i = nodes.len();
                    index.insert(key, i);
                    nodes.push((t, next_mems.clone()));
                    queue.push_back(i);
                    i
                }
            };
            if !row.contains(&w) {
                row.push(w);
            }
        }
        if succ.len() <= v {
            succ.resize_with(v + 1, Vec::new);
        }
        succ[v] = row;
    }
    succ.resize_with(nodes.len(), Vec::new);

    let in_set = |set: &BTreeSet<StateId>| -> Vec<bool> {
        nodes.iter().map(|(s, _)| set.contains(s)).collect()
    };
    Ok(match (&objective.kind, semantics) {
        (ObjectiveKind::Safety(bad), _) => !graph::can_reach(&succ, &in_set(bad))[0],
        (ObjectiveKind::Reachability(target), Semantics::Sure) => {
            // Fails iff a cycle avoiding the target is reachable while
            // avoiding the target.
            let t = in_set(target);
            let restricted: Vec<Vec<usize>> = (0..succ.len())
                .map(|v| {
                    if t[v] {
                        Vec::new()
                    } else {
                        succ[v].iter().copied().filter(|&w| !t[w]).collect()
                    }
                })
                .collect();
            let mut on_cycle = vec![false; succ.len()];
            for comp in graph::tarjan_scc(&restricted) {
                if !t[comp[0]] && (comp.len() > 1 || restricted[comp[0]].contains(&comp[0])) {
                    for &v in &comp {
                        on_cycle[v] = true;
                    }
                }
            }
            !graph::can_reach(&restricted, &on_cycle)[0]
        }
        (ObjectiveKind::Reachability(target), Semantics::AlmostSure) => {
            // Probability 1 iff from every reachable chain node the target is
            // reachable.
            let t = in_set(target);
            let can = graph::can_reach(&succ, &t);
            can.iter().all(|&c| c)
        }
        (ObjectiveKind::Buchi(acc), Semantics::Sure) => {
            let a = in_set(acc);
            let restricted: Vec<Vec<usize>> = (0..succ.len())
                .map(|v| {
                    if a[v] {
                        Vec::new()
                    } else {
                        succ[v].iter().copied().filter(|&w| !a[w]).collect()
                    }
                })
                .collect();
            let mut on_cycle = vec![false; succ.len()];
            for comp in graph::tarjan_scc(&restricted) {
                if !a[comp[0]] && (comp.len() > 1 || restricted[comp[0]].contains(&comp[0])) {
                    for &v in &comp {
                        on_cycle[v] = true;
                    }
                }
            }
            !graph::can_reach(&succ, &on_cycle)[0]
        }
        (ObjectiveKind::Buchi(_), Semantics::AlmostSure) => {
            return Err(GameError::Unsupported(
                "buchi objectives under almost-sure semantics".into(),
            ))
        }
    })
}

/// Graphviz rendering of G̅ with AfterHelp (opponents) and Val1 (protagonist)
/// nodes styled.
pub fn labelled_arena_dot(
    labelled: &LabelledArena,
    atoms: &AaAtoms,
    name_of_state: &dyn Fn(StateId) -> String,
    name_of_action: &dyn Fn(ActionId) -> String,
) -> String {
    let p = labelled.protagonist();
    let mut out = String::from("digraph gbar {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for x in 0..labelled.num_nodes() {
        let label = match labelled.label(x) {
            None => format!("init'\\n{}", name_of_state(labelled.obs(x))),
            Some((s, tuple)) => {
                let acts: Vec<String> = tuple.iter().map(|&a| name_of_action(a)).collect();
                format!("{}\\n({})", name_of_state(*s), acts.join(","))
            }
        };
        let mut attrs = vec![format!("label=\"{label}\"")];
        if atoms.val1[p.0].contains(&x) {
            attrs.push("shape=doublecircle".into());
            attrs.push("style=filled".into());
            attrs.push("fillcolor=lightgrey".into());
        }
        let after_help = (0..atoms.after_help.len())
            .filter(|&q| q != p.0)
            .any(|q| atoms.after_help[q].contains(&x));
        if after_help {
            attrs.push("penwidth=3".into());
        }
        out.push_str(&format!("  n{x} [{}];\n", attrs.join(", ")));
    }
    for x in 0..labelled.num_nodes() {
        for (tuple, t) in labelled.edges(x) {
            let acts: Vec<String> = tuple.iter().map(|&a| name_of_action(a)).collect();
            out.push_str(&format!(
                "  n{x} -> n{} [label=\"{}\"];\n",
                t,
                acts.join(",")
            ));
        }
    }
    out.push_str("}\n");
    out
}
