//! Independent brute-force oracles used by the acceptance suite.  These
//! deliberately avoid the library's fixpoint machinery: winning regions come
//! from strategy enumeration, cooperative regions from plain graph search,
//! and formula checks from exhaustive lasso enumeration.

use std::collections::BTreeSet;

use admissible_games::aa_synthesis::{eval_formula_on_lasso, AtomGraph, Formula};
use admissible_games::{ActionId, Arena, Objective, ObjectiveKind, Player, Semantics, StateId};

/// Successor set of `s` when the owner plays exactly `own_choices` and the
/// opponents play anything.
fn successors_under(
    arena: &Arena,
    p: Player,
    s: StateId,
    own_choices: &[ActionId],
) -> BTreeSet<StateId> {
    let mut out = BTreeSet::new();
    for adv in arena.adversary_tuples(s, p) {
        for &a in own_choices {
            out.insert(arena.successor_one(s, p, a, &adv));
        }
    }
    out
}

fn reachable(succ: &dyn Fn(StateId) -> BTreeSet<StateId>, from: StateId, n: usize) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![from];
    seen[from.0] = true;
    while let Some(s) = stack.pop() {
        for t in succ(s) {
            if !seen[t.0] {
                seen[t.0] = true;
                stack.push(t);
            }
        }
    }
    seen
}

/// True iff a cycle lying entirely inside `allowed` is reachable from `s`
/// through `path_allowed` states.
fn reachable_cycle(
    arena: &Arena,
    succ: &dyn Fn(StateId) -> BTreeSet<StateId>,
    from: StateId,
    cycle_allowed: &dyn Fn(StateId) -> bool,
    path_allowed: &dyn Fn(StateId) -> bool,
) -> bool {
    let n = arena.num_states();
    if !path_allowed(from) {
        return false;
    }
    // States reachable from `from` through path_allowed.
    let succ_p = |s: StateId| -> BTreeSet<StateId> {
        succ(s).into_iter().filter(|&t| path_allowed(t)).collect()
    };
    let reach = reachable(&succ_p, from, n);
    // A cycle within cycle_allowed: look for a state that can return to
    // itself through cycle_allowed states.
    for c in arena.states() {
        if !reach[c.0] || !cycle_allowed(c) {
            continue;
        }
        let succ_c = |s: StateId| -> BTreeSet<StateId> {
            succ(s).into_iter().filter(|&t| cycle_allowed(t)).collect()
        };
        let mut back = false;
        for t in succ_c(c) {
            if t == c || reachable(&succ_c, t, n)[c.0] {
                back = true;
                break;
            }
        }
        if back {
            return true;
        }
    }
    false
}

/// Sure-semantics win check for one memoryless Dirac strategy from `s`.
fn sure_wins_from(
    arena: &Arena,
    objective: &Objective,
    sigma: &[ActionId],
    s: StateId,
) -> bool {
    let p = objective.owner;
    let succ = |t: StateId| successors_under(arena, p, t, &[sigma[t.0]]);
    match &objective.kind {
        ObjectiveKind::Safety(bad) => {
            let reach = reachable(&succ, s, arena.num_states());
            bad.iter().all(|&b| !reach[b.0])
        }
        ObjectiveKind::Reachability(target) => {
            // Fails iff some path avoids the target forever: a cycle within
            // the complement, reachable while avoiding the target.
            !reachable_cycle(
                arena,
                &succ,
                s,
                &|t| !target.contains(&t),
                &|t| !target.contains(&t),
            )
        }
        ObjectiveKind::Buchi(acc) => {
            // Fails iff some path eventually stays outside `acc` forever.
            !reachable_cycle(arena, &succ, s, &|t| !acc.contains(&t), &|_| true)
        }
    }
}

fn dirac_strategies(arena: &Arena, p: Player) -> Vec<Vec<ActionId>> {
    let mut out = vec![Vec::new()];
    for s in arena.states() {
        let mut next = Vec::new();
        for partial in &out {
            for &a in arena.actions_at(s, p) {
                let mut v = partial.clone();
                v.push(a);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn nonempty_subsets(actions: &[ActionId]) -> Vec<Vec<ActionId>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << actions.len()) {
        out.push(
            actions
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask & (1 << i) != 0)
                .map(|(_, &a)| a)
                .collect(),
        );
    }
    out
}

fn support_strategies(arena: &Arena, p: Player) -> Vec<Vec<Vec<ActionId>>> {
    let mut out = vec![Vec::new()];
    for s in arena.states() {
        let subsets = nonempty_subsets(arena.actions_at(s, p));
        let mut next = Vec::new();
        for partial in &out {
            for sub in &subsets {
                let mut v = partial.clone();
                v.push(sub.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Almost-sure reachability win check for one support assignment from `s`:
/// the opponents cannot reach, with positive probability, a region they can
/// then keep forever outside the target.
fn almost_sure_reach_wins_from(
    arena: &Arena,
    p: Player,
    target: &BTreeSet<StateId>,
    supports: &[Vec<ActionId>],
    s: StateId,
) -> bool {
    if target.contains(&s) {
        return true;
    }
    let n = arena.num_states();
    // Largest trap ⊆ ¬target the opponents can enforce against the support.
    let mut in_trap: Vec<bool> = arena.states().map(|t| !target.contains(&t)).collect();
    loop {
        let mut changed = false;
        for t in arena.states() {
            if !in_trap[t.0] {
                continue;
            }
            let holds = arena.adversary_tuples(t, p).iter().any(|adv| {
                supports[t.0]
                    .iter()
                    .all(|&a| in_trap[arena.successor_one(t, p, a, adv).0])
            });
            if !holds {
                in_trap[t.0] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // Positive-probability reachability of the trap before the target.
    let succ = |t: StateId| -> BTreeSet<StateId> {
        successors_under(arena, p, t, &supports[t.0])
            .into_iter()
            .filter(|u| !target.contains(u))
            .collect()
    };
    let reach = reachable(&succ, s, n);
    arena.states().all(|t| !reach[t.0] || !in_trap[t.0])
}

/// Cooperatively winnable states (all players together) by graph search.
fn coop_region(arena: &Arena, objective: &Objective) -> Vec<bool> {
    let succ = |s: StateId| -> BTreeSet<StateId> {
        arena
            .joint_profiles(s)
            .iter()
            .map(|pr| arena.successor(s, pr))
            .collect()
    };
    arena
        .states()
        .map(|s| match &objective.kind {
            ObjectiveKind::Reachability(target) => {
                let reach = reachable(&succ, s, arena.num_states());
                target.iter().any(|&t| reach[t.0])
            }
            ObjectiveKind::Safety(bad) => reachable_cycle(
                arena,
                &succ,
                s,
                &|t| !bad.contains(&t),
                &|t| !bad.contains(&t),
            ),
            ObjectiveKind::Buchi(acc) => {
                // A reachable cycle through an accepting state.
                acc.iter().any(|&a| {
                    let reach = reachable(&succ, s, arena.num_states());
                    reach[a.0]
                        && succ(a)
                            .into_iter()
                            .any(|t| t == a || reachable(&succ, t, arena.num_states())[a.0])
                })
            }
        })
        .collect()
}

/// Brute-force state values by strategy enumeration: +1 where some
/// memoryless strategy (Dirac for sure, support-uniform for almost-sure
/// reachability) wins against everyone, 0 where only cooperation helps,
/// −1 otherwise.  Returns `None` for unsupported combinations.
pub fn brute_force_values(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
) -> Option<Vec<i8>> {
    let p = objective.owner;
    let n = arena.num_states();
    let mut win = vec![false; n];
    match (&objective.kind, semantics) {
        (_, Semantics::Sure) | (ObjectiveKind::Safety(_), Semantics::AlmostSure) => {
            // Almost-sure safety coincides with sure safety for finite
            // supports: any positive-probability path into the bad set
            // already refutes it.
            for sigma in dirac_strategies(arena, p) {
                for s in arena.states() {
                    if !win[s.0] && sure_wins_from(arena, objective, &sigma, s) {
                        win[s.0] = true;
                    }
                }
            }
        }
        (ObjectiveKind::Reachability(target), Semantics::AlmostSure) => {
            for supports in support_strategies(arena, p) {
                for s in arena.states() {
                    if !win[s.0]
                        && almost_sure_reach_wins_from(arena, p, target, &supports, s)
                    {
                        win[s.0] = true;
                    }
                }
            }
        }
        (ObjectiveKind::Buchi(_), Semantics::AlmostSure) => return None,
    }
    let coop = coop_region(arena, objective);
    Some(
        (0..n)
            .map(|s| {
                if win[s] {
                    1
                } else if coop[s] {
                    0
                } else {
                    -1
                }
            })
            .collect(),
    )
}

/// Exhaustive lasso search: every lasso from node 0 with at most `max_len`
/// nodes in prefix+cycle, returning the first that violates the formula.
pub fn find_violating_lasso(
    g: &AtomGraph,
    formula: &Formula,
    max_len: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut path = vec![0usize];
    search(g, formula, max_len, &mut path)
}

fn search(
    g: &AtomGraph,
    formula: &Formula,
    max_len: usize,
    path: &mut Vec<usize>,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let last = *path.last().unwrap();
    for i in 0..g.succ[last].len() {
        let w = g.succ[last][i];
        // Close the lasso at every earlier occurrence of `w`.
        for (j, &v) in path.iter().enumerate() {
            if v == w {
                let prefix = path[..j].to_vec();
                let cycle = path[j..].to_vec();
                if !eval_formula_on_lasso(g, formula, &prefix, &cycle) {
                    return Some((prefix, cycle));
                }
            }
        }
        if path.len() < max_len {
            path.push(w);
            if let Some(found) = search(g, formula, max_len, path) {
                return Some(found);
            }
            path.pop();
        }
    }
    None
}
