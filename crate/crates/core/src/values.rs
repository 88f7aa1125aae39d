//! Three-valued state values per (player, semantics) and strategy-relative
//! values on product graphs.
//!
//! Value +1: the player wins alone (winning region); 0: cannot win alone but
//! full cooperation wins; −1: no continuation wins.  Arenas are expected in
//! normalised form (see [`crate::objectives::Normalized`]) so that values are
//! state-determined.

use std::collections::{BTreeMap, BTreeSet};

use crate::arena::{ActionId, Arena, MixedMove, MooreStrategy, Player, ProductGraph, StateId};
use crate::error::{GameError, Result};
use crate::graph;
use crate::objectives::{Objective, ObjectiveKind, Semantics};

#[derive(Debug, Clone)]
pub struct StateValueTable {
    pub player: Player,
    pub semantics: Semantics,
    values: Vec<i8>,
}

impl StateValueTable {
    pub fn get(&self, s: StateId) -> i8 {
        self.values[s.0]
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }
}

#[derive(Debug, Clone)]
pub struct StrategyValueTable {
    pub player: Player,
    pub semantics: Semantics,
    pub product: ProductGraph,
    values: Vec<i8>,
}

impl StrategyValueTable {
    pub fn get(&self, node: usize) -> i8 {
        self.values[node]
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }
}

fn unsupported(objective: &Objective, semantics: Semantics) -> GameError {
    GameError::Unsupported(format!(
        "{} objectives under {} semantics",
        objective.kind.label(),
        semantics.label()
    ))
}

/// Plain successor lists of the arena under arbitrary joint play.
fn joint_successors(arena: &Arena) -> Vec<Vec<usize>> {
    arena
        .states()
        .map(|s| {
            let mut ts: Vec<usize> = arena
                .joint_profiles(s)
                .iter()
                .map(|pr| arena.successor(s, pr).0)
                .collect();
            ts.sort_unstable();
            ts.dedup();
            ts
        })
        .collect()
}

fn member_mask(arena: &Arena, set: &BTreeSet<StateId>) -> Vec<bool> {
    let mut mask = vec![false; arena.num_states()];
    for &s in set {
        mask[s.0] = true;
    }
    mask
}

/// States from which some fully-cooperative run satisfies the objective.
/// Identical under both semantics (Dirac cooperation yields a single run).
pub fn cooperative_region(arena: &Arena, objective: &Objective) -> BTreeSet<StateId> {
    let succ = joint_successors(arena);
    let result: Vec<bool> = match &objective.kind {
        ObjectiveKind::Reachability(target) => {
            graph::can_reach(&succ, &member_mask(arena, target))
        }
        ObjectiveKind::Safety(bad) => {
            // Largest set of non-bad states with a successor inside the set.
            let bad = member_mask(arena, bad);
            let mut inside: Vec<bool> = bad.iter().map(|b| !b).collect();
            loop {
                let mut changed = false;
                for s in 0..inside.len() {
                    if inside[s] && !succ[s].iter().any(|&t| inside[t]) {
                        inside[s] = false;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            inside
        }
        ObjectiveKind::Buchi(acc) => {
            // Reach a cycle containing an accepting state.
            let acc = member_mask(arena, acc);
            let mut on_good_cycle = vec![false; arena.num_states()];
            for comp in graph::tarjan_scc(&succ) {
                let cyclic = comp.len() > 1 || succ[comp[0]].contains(&comp[0]);
                if cyclic && comp.iter().any(|&v| acc[v]) {
                    for &v in &comp {
                        on_good_cycle[v] = true;
                    }
                }
            }
            graph::can_reach(&succ, &on_good_cycle)
        }
    };
    (0..arena.num_states())
        .filter(|&s| result[s])
        .map(StateId)
        .collect()
}

/// Sure controllable predecessor: some own action forces `target` whatever
/// the adversary tuple.
fn cpre(arena: &Arena, p: Player, target: &[bool]) -> Vec<bool> {
    arena
        .states()
        .map(|s| {
            arena.actions_at(s, p).iter().any(|&a| {
                arena
                    .adversary_tuples(s, p)
                    .iter()
                    .all(|adv| target[arena.successor_one(s, p, a, adv).0])
            })
        })
        .collect()
}

/// Maximal `inside`-safe support at `s`: own actions whose every successor
/// stays in `inside`.
fn safe_support(arena: &Arena, p: Player, s: StateId, inside: &[bool]) -> Vec<ActionId> {
    arena
        .actions_at(s, p)
        .iter()
        .copied()
        .filter(|&a| {
            arena
                .adversary_tuples(s, p)
                .iter()
                .all(|adv| inside[arena.successor_one(s, p, a, adv).0])
        })
        .collect()
}

fn or_assign(dst: &mut [bool], src: &[bool]) -> bool {
    let mut changed = false;
    for (d, &s) in dst.iter_mut().zip(src) {
        if s && !*d {
            *d = true;
            changed = true;
        }
    }
    changed
}

/// μX. (seed ∪ CPre(X)) with recorded onion layers: `rank[s]` is the first
/// iteration at which `s` entered the fixpoint (0 for seed states).
fn mu_reach_sure(arena: &Arena, p: Player, seed: &[bool]) -> (Vec<bool>, Vec<usize>) {
    let mut x = seed.to_vec();
    let mut rank: Vec<usize> = seed
        .iter()
        .map(|&b| if b { 0 } else { usize::MAX })
        .collect();
    let mut layer = 0usize;
    loop {
        layer += 1;
        let pre = cpre(arena, p, &x);
        let mut changed = false;
        for s in 0..x.len() {
            if pre[s] && !x[s] {
                x[s] = true;
                rank[s] = layer;
                changed = true;
            }
        }
        if !changed {
            return (x, rank);
        }
    }
}

/// Sure/almost-sure winning region.
pub fn winning_region(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
) -> Result<BTreeSet<StateId>> {
    let p = objective.owner;
    let result: Vec<bool> = match (&objective.kind, semantics) {
        (ObjectiveKind::Safety(bad), _) => {
            // νX. (¬bad ∩ CPre(X)); identical for both semantics.
            let bad = member_mask(arena, bad);
            let mut x: Vec<bool> = bad.iter().map(|b| !b).collect();
            loop {
                let pre = cpre(arena, p, &x);
                let next: Vec<bool> = (0..x.len()).map(|s| x[s] && pre[s]).collect();
                if next == x {
                    break;
                }
                x = next;
            }
            x
        }
        (ObjectiveKind::Reachability(target), Semantics::Sure) => {
            mu_reach_sure(arena, p, &member_mask(arena, target)).0
        }
        (ObjectiveKind::Reachability(target), Semantics::AlmostSure) => {
            // νY. μX. (T ∪ APre(Y, X)) with the maximal Y-safe support.
            let t = member_mask(arena, target);
            let mut y = vec![true; arena.num_states()];
            loop {
                let mut x = t.clone();
                loop {
                    let mut changed = false;
                    for s in arena.states() {
                        if x[s.0] {
                            continue;
                        }
                        let b = safe_support(arena, p, s, &y);
                        if b.is_empty() {
                            continue;
                        }
                        let ok = arena.adversary_tuples(s, p).iter().all(|adv| {
                            b.iter().any(|&a| x[arena.successor_one(s, p, a, adv).0])
                        });
                        if ok {
                            x[s.0] = true;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                if x == y {
                    break;
                }
                y = x;
            }
            y
        }
        (ObjectiveKind::Buchi(acc), Semantics::Sure) => {
            // νY. μX. ((acc ∩ CPre(Y)) ∪ CPre(X)).
            let acc = member_mask(arena, acc);
            let mut y = vec![true; arena.num_states()];
            loop {
                let pre_y = cpre(arena, p, &y);
                let seed: Vec<bool> = (0..y.len()).map(|s| acc[s] && pre_y[s]).collect();
                let mut x = vec![false; arena.num_states()];
                loop {
                    let pre_x = cpre(arena, p, &x);
                    let mut next: Vec<bool> = seed.clone();
                    or_assign(&mut next, &pre_x);
                    if next == x {
                        break;
                    }
                    x = next;
                }
                if x == y {
                    break;
                }
                y = x;
            }
            y
        }
        (ObjectiveKind::Buchi(_), Semantics::AlmostSure) => {
            return Err(unsupported(objective, semantics))
        }
    };
    Ok((0..arena.num_states())
        .filter(|&s| result[s])
        .map(StateId)
        .collect())
}

/// Combines winning and cooperative regions into the {−1, 0, +1} partition.
pub fn state_values(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
) -> Result<StateValueTable> {
    let win = winning_region(arena, objective, semantics)?;
    let coop = cooperative_region(arena, objective);
    let values = arena
        .states()
        .map(|s| {
            if win.contains(&s) {
                1
            } else if coop.contains(&s) {
                0
            } else {
                -1
            }
        })
        .collect();
    Ok(StateValueTable {
        player: objective.owner,
        semantics,
        values,
    })
}

/// A memoryless winning move for every state of the winning region (uniform
/// over the maximal safe support for almost-sure reachability, lowest-index
/// Dirac otherwise).
pub fn winning_moves(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
) -> Result<BTreeMap<StateId, MixedMove>> {
    let p = objective.owner;
    let region = winning_region(arena, objective, semantics)?;
    let w: Vec<bool> = {
        let mut mask = vec![false; arena.num_states()];
        for &s in &region {
            mask[s.0] = true;
        }
        mask
    };
    let mut moves = BTreeMap::new();
    match (&objective.kind, semantics) {
        (ObjectiveKind::Safety(_), _) => {
            for &s in &region {
                let a = safe_support(arena, p, s, &w)
                    .into_iter()
                    .next()
                    .expect("winning safety state has a safe action");
                moves.insert(s, MixedMove::dirac(a));
            }
        }
        (ObjectiveKind::Reachability(target), Semantics::Sure) => {
            let (_, rank) = mu_reach_sure(arena, p, &member_mask(arena, target));
            for &s in &region {
                if rank[s.0] == 0 {
                    // Already in the (absorbing) target: any action keeps
                    // winning; pick the lowest for determinism.
                    moves.insert(s, MixedMove::dirac(arena.actions_at(s, p)[0]));
                    continue;
                }
                let prev: Vec<bool> = (0..arena.num_states())
                    .map(|t| rank[t] < rank[s.0])
                    .collect();
                let a = safe_support(arena, p, s, &prev)
                    .into_iter()
                    .next()
                    .expect("ranked state has a rank-decreasing action");
                moves.insert(s, MixedMove::dirac(a));
            }
        }
        (ObjectiveKind::Reachability(_), Semantics::AlmostSure) => {
            for &s in &region {
                let b = safe_support(arena, p, s, &w);
                moves.insert(s, MixedMove::uniform(&b)?);
            }
        }
        (ObjectiveKind::Buchi(acc), Semantics::Sure) => {
            // From the fixpoint region W: accepting states with CPre(W) form
            // the seed; everyone else decreases the μ-rank towards the seed;
            // seed states move back into W (restarting the cycle hunt).
            let acc = member_mask(arena, acc);
            let pre_w = cpre(arena, p, &w);
            let seed: Vec<bool> = (0..w.len()).map(|s| acc[s] && pre_w[s] && w[s]).collect();
            let (_, rank) = mu_reach_sure(arena, p, &seed);
            for &s in &region {
                let a = if seed[s.0] {
                    safe_support(arena, p, s, &w).into_iter().next()
                } else {
                    let prev: Vec<bool> = (0..arena.num_states())
                        .map(|t| rank[t] < rank[s.0])
                        .collect();
                    safe_support(arena, p, s, &prev).into_iter().next()
                }
                .expect("winning Büchi state has a progress action");
                moves.insert(s, MixedMove::dirac(a));
            }
        }
        (ObjectiveKind::Buchi(_), Semantics::AlmostSure) => {
            return Err(unsupported(objective, semantics))
        }
    }
    Ok(moves)
}

/// Values of product-graph nodes for a fixed strategy: +1 iff the strategy
/// wins from the node against every adversary behaviour, 0 iff some adversary
/// behaviour makes the profile winning, else −1.
pub fn strategy_values(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
    strategy: &MooreStrategy,
) -> Result<StrategyValueTable> {
    if strategy.player() != objective.owner {
        return Err(GameError::Invalid(
            "strategy player does not match objective owner".into(),
        ));
    }
    let product = ProductGraph::build(arena, strategy)?;
    let n = product.num_nodes();
    let succ = product.successors();
    let in_set = |set: &BTreeSet<StateId>| -> Vec<bool> {
        (0..n).map(|v| set.contains(&product.state_of(v))).collect()
    };
    let groups: Vec<Vec<(Vec<ActionId>, Vec<(ActionId, usize)>)>> =
        (0..n).map(|v| product.edges_by_adversary(v)).collect();

    let win: Vec<bool> = match (&objective.kind, semantics) {
        (ObjectiveKind::Safety(bad), _) => {
            // Lose iff a bad node is reachable (positive probability = some
            // path; identical for both semantics on supports).
            let bad = in_set(bad);
            graph::can_reach(&succ, &bad).iter().map(|&l| !l).collect()
        }
        (ObjectiveKind::Reachability(target), Semantics::Sure) => {
            sure_avoid_cycle_losers(&succ, &in_set(target), true)
        }
        (ObjectiveKind::Reachability(target), Semantics::AlmostSure) => {
            // νY.μX over the adversarial chain: a node is winning iff for
            // every adversary tuple all support branches stay in Y and some
            // support branch makes progress into X.
            let t = in_set(target);
            let mut y = vec![true; n];
            loop {
                let mut x = t.clone();
                loop {
                    let mut changed = false;
                    for v in 0..n {
                        if x[v] {
                            continue;
                        }
                        let ok = groups[v].iter().all(|(_, branch)| {
                            branch.iter().all(|&(_, w)| y[w])
                                && branch.iter().any(|&(_, w)| x[w])
                        });
                        if ok {
                            x[v] = true;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                if x == y {
                    break;
                }
                y = x;
            }
            y
        }
        (ObjectiveKind::Buchi(acc), Semantics::Sure) => {
            sure_avoid_cycle_losers(&succ, &in_set(acc), false)
        }
        _ => return Err(unsupported(objective, semantics)),
    };

    // Value ≥ 0: a helping adversary exists.  Turn-based view: the helper
    // picks the adversary tuple at each node, play branches universally
    // (sure) or stochastically (almost-sure) over the strategy's support.
    let hcpre = |x: &[bool]| -> Vec<bool> {
        (0..n)
            .map(|v| {
                groups[v]
                    .iter()
                    .any(|(_, branch)| branch.iter().all(|&(_, w)| x[w]))
            })
            .collect()
    };
    let help: Vec<bool> = match (&objective.kind, semantics) {
        (ObjectiveKind::Safety(bad), _) => {
            // ν over non-bad nodes with a fully-safe helper tuple; the same
            // for both semantics (probability-1 safety forbids any bad
            // branch).
            let bad = in_set(bad);
            let mut x: Vec<bool> = bad.iter().map(|b| !b).collect();
            loop {
                let pre = hcpre(&x);
                let next: Vec<bool> = (0..n).map(|v| x[v] && pre[v]).collect();
                if next == x {
                    break;
                }
                x = next;
            }
            x
        }
        (ObjectiveKind::Reachability(target), Semantics::Sure) => {
            let mut x = in_set(target);
            loop {
                let pre = hcpre(&x);
                let mut changed = false;
                for v in 0..n {
                    if pre[v] && !x[v] {
                        x[v] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            x
        }
        (ObjectiveKind::Reachability(target), Semantics::AlmostSure) => {
            let t = in_set(target);
            let mut y = vec![true; n];
            loop {
                let mut x = t.clone();
                loop {
                    let mut changed = false;
                    for v in 0..n {
                        if x[v] {
                            continue;
                        }
                        let ok = groups[v].iter().any(|(_, branch)| {
                            branch.iter().all(|&(_, w)| y[w])
                                && branch.iter().any(|&(_, w)| x[w])
                        });
                        if ok {
                            x[v] = true;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                if x == y {
                    break;
                }
                y = x;
            }
            y
        }
        (ObjectiveKind::Buchi(acc), Semantics::Sure) => {
            // νY.μX. ((acc ∩ hCPre(Y)) ∪ hCPre(X)).
            let acc = in_set(acc);
            let mut y = vec![true; n];
            loop {
                let pre_y = hcpre(&y);
                let seed: Vec<bool> = (0..n).map(|v| acc[v] && pre_y[v]).collect();
                let mut x = vec![false; n];
                loop {
                    let pre_x = hcpre(&x);
                    let mut next = seed.clone();
                    or_assign(&mut next, &pre_x);
                    if next == x {
                        break;
                    }
                    x = next;
                }
                if x == y {
                    break;
                }
                y = x;
            }
            y
        }
        _ => return Err(unsupported(objective, semantics)),
    };

    let values: Vec<i8> = (0..n)
        .map(|v| {
            if win[v] {
                1
            } else if help[v] {
                0
            } else {
                -1
            }
        })
        .collect();
    Ok(StrategyValueTable {
        player: objective.owner,
        semantics,
        product,
        values,
    })
}

/// Universal check helper: a node fails iff a cycle avoiding `good` nodes is
/// reachable — staying off `good` the whole way when `avoid_on_path` (sure
/// reachability: some path never touches the target), or via any path when
/// not (sure Büchi: some suffix avoids the accepting set).
fn sure_avoid_cycle_losers(succ: &[Vec<usize>], good: &[bool], avoid_on_path: bool) -> Vec<bool> {
    let n = succ.len();
    let restricted: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            if good[v] {
                Vec::new()
            } else {
                succ[v].iter().copied().filter(|&w| !good[w]).collect()
            }
        })
        .collect();
    let mut on_cycle = vec![false; n];
    for comp in graph::tarjan_scc(&restricted) {
        if comp.len() > 1 || restricted[comp[0]].contains(&comp[0]) {
            for &v in &comp {
                on_cycle[v] = true;
            }
        }
    }
    let fail = if avoid_on_path {
        graph::can_reach(&restricted, &on_cycle)
    } else {
        graph::can_reach(succ, &on_cycle)
    };
    fail.iter().map(|&f| !f).collect()
}
