//! Move dominance, locally-admissible (LA) move sets with their equivalence
//! classes, LA/SCO/admissibility verdicts for finite-memory strategies, and
//! constructive repair of strategies into admissible ones.

use std::collections::BTreeMap;

use crate::arena::{ActionId, Arena, MixedMove, MooreStrategy, Player, StateId};
use crate::error::{GameError, Result};
use crate::graph;
use crate::objectives::{Objective, ObjectiveKind, Semantics};
use crate::values::{state_values, strategy_values, winning_moves, StateValueTable};

/// Per-state LA Dirac actions and their ≈-equivalence classes for one
/// (player, semantics).
#[derive(Debug, Clone)]
pub struct LaTable {
    pub player: Player,
    pub semantics: Semantics,
    /// `actions[state]` — LA actions, ascending.
    actions: Vec<Vec<ActionId>>,
    /// `classes[state]` — partition of the LA set; classes ordered by their
    /// lowest action, actions ascending within a class.
    classes: Vec<Vec<Vec<ActionId>>>,
}

impl LaTable {
    pub fn la_actions(&self, s: StateId) -> &[ActionId] {
        &self.actions[s.0]
    }

    pub fn classes(&self, s: StateId) -> &[Vec<ActionId>] {
        &self.classes[s.0]
    }

    pub fn is_la(&self, s: StateId, a: ActionId) -> bool {
        self.actions[s.0].contains(&a)
    }

    pub fn class_of(&self, s: StateId, a: ActionId) -> Option<usize> {
        self.classes[s.0].iter().position(|c| c.contains(&a))
    }
}

/// Weak-dominance comparison of Dirac moves at `s`: `a ⪯ b` iff for every
/// adversary tuple the successor value under `a` is at most that under `b`,
/// and whenever both values are 0 the successors coincide.
pub fn dirac_dominance_leq(
    arena: &Arena,
    values: &StateValueTable,
    s: StateId,
    a: ActionId,
    b: ActionId,
) -> Result<bool> {
    let p = values.player;
    for &x in [a, b].iter() {
        let info = arena.action(x);
        if info.state != s || info.player != p {
            return Err(GameError::Invalid(format!(
                "action `{}` is not a player-{} action at `{}`",
                info.name,
                p.0 + 1,
                arena.state_name(s)
            )));
        }
    }
    for adv in arena.adversary_tuples(s, p) {
        let ta = arena.successor_one(s, p, a, &adv);
        let tb = arena.successor_one(s, p, b, &adv);
        let (va, vb) = (values.get(ta), values.get(tb));
        if va > vb {
            return Ok(false);
        }
        if va == 0 && vb == 0 && ta != tb {
            return Ok(false);
        }
    }
    Ok(true)
}

/// LA Dirac actions per state: actions not strictly dominated by another
/// Dirac action, partitioned into mutual-dominance classes.
pub fn la_actions(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
) -> Result<LaTable> {
    let p = objective.owner;
    let values = state_values(arena, objective, semantics)?;
    let mut actions = Vec::with_capacity(arena.num_states());
    let mut classes = Vec::with_capacity(arena.num_states());
    for s in arena.states() {
        let all = arena.actions_at(s, p);
        let mut la: Vec<ActionId> = Vec::new();
        for &a in all {
            let mut dominated = false;
            for &b in all {
                if a == b {
                    continue;
                }
                if dirac_dominance_leq(arena, &values, s, a, b)?
                    && !dirac_dominance_leq(arena, &values, s, b, a)?
                {
                    dominated = true;
                    break;
                }
            }
            if !dominated {
                la.push(a);
            }
        }
        debug_assert!(!la.is_empty(), "LA set empty at {}", arena.state_name(s));
        let mut part: Vec<Vec<ActionId>> = Vec::new();
        'outer: for &a in &la {
            for class in part.iter_mut() {
                let rep = class[0];
                if dirac_dominance_leq(arena, &values, s, a, rep)?
                    && dirac_dominance_leq(arena, &values, s, rep, a)?
                {
                    class.push(a);
                    continue 'outer;
                }
            }
            part.push(vec![a]);
        }
        actions.push(la);
        classes.push(part);
    }
    Ok(LaTable {
        player: p,
        semantics,
        actions,
        classes,
    })
}

/// A mixed move is LA iff every support action is LA and the whole support
/// lies in a single ≈-class.
pub fn is_mixed_move_la(la: &LaTable, s: StateId, mv: &MixedMove) -> Result<bool> {
    let mut class = None;
    for a in mv.support() {
        if !la.is_la(s, a) {
            return Ok(false);
        }
        let c = la.class_of(s, a).expect("LA action has a class");
        match class {
            None => class = Some(c),
            Some(c0) if c0 != c => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct AdmissibilityVerdict {
    pub la: bool,
    /// Product node and first offending support action.
    pub la_witness: Option<((StateId, usize), ActionId)>,
    pub sco: bool,
    /// Product node where the strategy value falls below the state value.
    pub sco_witness: Option<(StateId, usize)>,
    pub admissible: bool,
}

/// Theorem-1 classification: admissible ⟺ LA ∧ SCO; for simple safety
/// objectives SCO is implied by LA and skipped.
pub fn classify_strategy(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
    strategy: &MooreStrategy,
) -> Result<AdmissibilityVerdict> {
    let la_table = la_actions(arena, objective, semantics)?;
    let tbl = strategy_values(arena, objective, semantics, strategy)?;
    let product = &tbl.product;

    let mut la = true;
    let mut la_witness = None;
    'la: for v in 0..product.num_nodes() {
        let s = product.state_of(v);
        let mv = product.move_of(v);
        if !is_mixed_move_la(&la_table, s, mv)? {
            la = false;
            // First offending support action: either non-LA, or in a class
            // different from the first support action's.
            let first_class = mv.support().find_map(|a| la_table.class_of(s, a));
            for a in mv.support() {
                let bad = match la_table.class_of(s, a) {
                    None => true,
                    Some(c) => first_class.map_or(false, |c0| c != c0),
                };
                if bad || !la_table.is_la(s, a) {
                    la_witness = Some((product.node(v), a));
                    break 'la;
                }
            }
            la_witness = Some((product.node(v), mv.support().next().unwrap()));
            break;
        }
    }

    let safety = matches!(objective.kind, ObjectiveKind::Safety(_));
    let (mut sco, mut sco_witness) = (true, None);
    if !safety {
        let sv = state_values(arena, objective, semantics)?;
        for v in 0..product.num_nodes() {
            if tbl.get(v) < sv.get(product.state_of(v)) {
                sco = false;
                sco_witness = Some(product.node(v));
                break;
            }
        }
    }

    Ok(AdmissibilityVerdict {
        la,
        la_witness,
        sco,
        sco_witness,
        admissible: la && sco,
    })
}

/// Proposition-1 derandomisation: an admissible strategy has an ≈-equivalent
/// Dirac one.  Almost-sure: collapse mixes at nodes of strategy value ≤ 0 to
/// their lowest support action (value-1 nodes stay randomised).  Sure: fully
/// Dirac, playing a memoryless winning Dirac move at value-1 states.
pub fn derandomize_admissible(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
    strategy: &MooreStrategy,
) -> Result<MooreStrategy> {
    let verdict = classify_strategy(arena, objective, semantics, strategy)?;
    if !verdict.admissible {
        return Err(GameError::Invalid(
            "derandomize_admissible requires an admissible strategy".into(),
        ));
    }
    let tbl = strategy_values(arena, objective, semantics, strategy)?;
    let sv = state_values(arena, objective, semantics)?;
    let mut out = strategy.clone();
    match semantics {
        Semantics::AlmostSure => {
            for v in 0..tbl.product.num_nodes() {
                let (s, m) = tbl.product.node(v);
                if tbl.get(v) <= 0 {
                    let a = tbl.product.move_of(v).support().next().unwrap();
                    out.set_output(m, s, MixedMove::dirac(a));
                }
            }
        }
        Semantics::Sure => {
            // The winning splice may leave the original product's reachable
            // set, but only within the winning region, so define the winning
            // rows for every memory.
            let wmoves = winning_moves(arena, objective, semantics)?;
            for s in arena.states() {
                if sv.get(s) == 1 {
                    for m in 0..strategy.num_memories() {
                        out.set_output(m, s, wmoves[&s].clone());
                    }
                }
            }
            for v in 0..tbl.product.num_nodes() {
                let (s, m) = tbl.product.node(v);
                if sv.get(s) != 1 {
                    let a = tbl.product.move_of(v).support().next().unwrap();
                    out.set_output(m, s, MixedMove::dirac(a));
                }
            }
        }
    }
    debug_assert!(
        classify_strategy(arena, objective, semantics, &out)?.admissible,
        "derandomised strategy must stay admissible"
    );
    Ok(out)
}

/// A fixed LA-compatible lasso (state path + chosen LA actions) anchored at a
/// value-0 state, winning under full cooperation.
#[derive(Debug, Clone)]
struct Lasso {
    /// States along prefix+cycle; `path[cycle_start..]` repeats forever.
    path: Vec<StateId>,
    cycle_start: usize,
    /// `moves[i]` is the LA action played at `path[i]`.
    moves: Vec<ActionId>,
}

impl Lasso {
    fn step(&self, i: usize) -> usize {
        if i + 1 < self.path.len() {
            i + 1
        } else {
            self.cycle_start
        }
    }
}

/// LA-cooperative successor lists restricted to non-negative-value states,
/// with the lowest LA action realising each edge.
fn la_coop_graph(
    arena: &Arena,
    p: Player,
    la: &LaTable,
    values: &StateValueTable,
) -> (Vec<Vec<usize>>, BTreeMap<(usize, usize), ActionId>) {
    let n = arena.num_states();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut via: BTreeMap<(usize, usize), ActionId> = BTreeMap::new();
    for s in arena.states() {
        if values.get(s) < 0 {
            continue;
        }
        for &a in la.la_actions(s) {
            for adv in arena.adversary_tuples(s, p) {
                let t = arena.successor_one(s, p, a, &adv);
                if values.get(t) < 0 {
                    continue;
                }
                via.entry((s.0, t.0)).or_insert(a);
                if !succ[s.0].contains(&t.0) {
                    succ[s.0].push(t.0);
                }
            }
        }
        succ[s.0].sort_unstable();
    }
    (succ, via)
}

/// Deterministic winning lasso for a value-0 anchor state: shortest
/// cooperative LA path (lowest-index tie-breaks) whose run satisfies the
/// objective, staying within value ≥ 0 states.
fn find_lasso(
    arena: &Arena,
    objective: &Objective,
    la: &LaTable,
    values: &StateValueTable,
    anchor: StateId,
) -> Result<Lasso> {
    let p = objective.owner;
    let (succ, via) = la_coop_graph(arena, p, la, values);
    let allowed = |v: usize| values.get(StateId(v)) >= 0;
    let missing = || {
        GameError::Validation(format!(
            "no cooperative LA lasso from value-0 state `{}`",
            arena.state_name(anchor)
        ))
    };

    // Shortest cycle through `u` inside the allowed subgraph, optionally
    // required to pass through `acc`-states only for its first node.
    let cycle_through = |u: usize| -> Option<Vec<usize>> {
        if succ[u].contains(&u) {
            return Some(vec![u]);
        }
        // Shortest path from a successor of u back to u.
        let mut best: Option<Vec<usize>> = None;
        for &w in &succ[u] {
            if let Some(path) = graph::bfs_path(&succ, w, &|v| v == u, &allowed) {
                let mut cyc = vec![u];
                cyc.extend(&path[..path.len() - 1]);
                if best.as_ref().map_or(true, |b| cyc.len() < b.len()) {
                    best = Some(cyc);
                }
            }
        }
        best
    };

    // Shortest (prefix to a cycle anchor, cycle) from `from`:
    // lexicographically smallest (prefix length, anchor index, cycle length).
    let plain_lasso = |from: usize| -> Option<(Vec<usize>, Vec<usize>)> {
        let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
        for u in 0..arena.num_states() {
            if !allowed(u) {
                continue;
            }
            let Some(prefix) = graph::bfs_path(&succ, from, &|v| v == u, &allowed) else {
                continue;
            };
            let Some(cyc) = cycle_through(u) else { continue };
            let better = match &best {
                None => true,
                Some((bp, bc)) => (prefix.len(), u, cyc.len()) < (bp.len(), bp[bp.len() - 1], bc.len()),
            };
            if better {
                best = Some((prefix, cyc));
            }
        }
        best
    };

    let (states, cycle_start) = match &objective.kind {
        ObjectiveKind::Reachability(target) => {
            // Prefix to the target, then any continuation lasso (the target
            // is already visited on the prefix).
            let prefix =
                graph::bfs_path(&succ, anchor.0, &|v| target.contains(&StateId(v)), &allowed)
                    .ok_or_else(missing)?;
            let t = *prefix.last().unwrap();
            let (ext, cyc) = plain_lasso(t).ok_or_else(missing)?;
            let mut path = prefix;
            path.extend(&ext[1..]);
            let cycle_start = path.len() - 1;
            path.extend(&cyc[1..]);
            (path, cycle_start)
        }
        ObjectiveKind::Safety(_) => {
            // Any reachable cycle inside the allowed (non-bad) subgraph;
            // anchors are value ≥ 0 hence outside the bad trap.
            let (prefix, cyc) = plain_lasso(anchor.0).ok_or_else(missing)?;
            let mut path = prefix;
            let cycle_start = path.len() - 1;
            path.extend(&cyc[1..]);
            (path, cycle_start)
        }
        ObjectiveKind::Buchi(acc) => {
            let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
            for &u in acc {
                if !allowed(u.0) {
                    continue;
                }
                let Some(prefix) = graph::bfs_path(&succ, anchor.0, &|v| v == u.0, &allowed) else {
                    continue;
                };
                let Some(cyc) = cycle_through(u.0) else { continue };
                let better = match &best {
                    None => true,
                    Some((bp, bc)) => {
                        (prefix.len(), u.0, cyc.len()) < (bp.len(), bp[bp.len() - 1], bc.len())
                    }
                };
                if better {
                    best = Some((prefix, cyc));
                }
            }
            let (prefix, cyc) = best.ok_or_else(missing)?;
            let mut path = prefix;
            let cycle_start = path.len() - 1;
            path.extend(&cyc[1..]);
            (path, cycle_start)
        }
    };

    let path: Vec<StateId> = states.iter().map(|&v| StateId(v)).collect();
    let mut moves = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        let next = if i + 1 < path.len() {
            path[i + 1]
        } else {
            path[cycle_start]
        };
        let a = via
            .get(&(path[i].0, next.0))
            .copied()
            .ok_or_else(missing)?;
        moves.push(a);
    }
    // The lasso must win under cooperation.
    let (prefix, cycle) = (&path[..cycle_start], &path[cycle_start..]);
    debug_assert!(crate::objectives::eval_lasso(objective, prefix, cycle)?);
    Ok(Lasso {
        path,
        cycle_start,
        moves,
    })
}

/// Memory layout of the baseline dispatcher: `Free` plus one slot per
/// position of each value-0 state's memoised lasso.
struct Dispatcher {
    lassos: BTreeMap<usize, Lasso>,
    /// (anchor state, position) → memory index; memory 0 is Free.
    slot: BTreeMap<(usize, usize), usize>,
    names: Vec<String>,
}

impl Dispatcher {
    fn build(
        arena: &Arena,
        objective: &Objective,
        la: &LaTable,
        values: &StateValueTable,
    ) -> Result<Dispatcher> {
        let mut lassos = BTreeMap::new();
        let mut slot = BTreeMap::new();
        let mut names = vec!["free".to_string()];
        for s in arena.states() {
            if values.get(s) != 0 {
                continue;
            }
            let lasso = find_lasso(arena, objective, la, values, s)?;
            for i in 0..lasso.path.len() {
                slot.insert((s.0, i), names.len());
                names.push(format!("lasso-{}-{}", arena.state_name(s), i));
            }
            lassos.insert(s.0, lasso);
        }
        Ok(Dispatcher {
            lassos,
            slot,
            names,
        })
    }

    /// Output and next memory on entering a fresh value-0 state `s`.
    fn enter(&self, s: StateId) -> (ActionId, usize) {
        let lasso = &self.lassos[&s.0];
        (lasso.moves[0], self.slot[&(s.0, 0)])
    }
}

/// The Lemma-8 three-rule strategy: winning moves at value-1 states, lowest
/// LA action at value-−1 states, memoised cooperative lassos at value-0
/// states (restarted deterministically on deviation).
pub fn baseline_admissible_strategy(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
) -> Result<MooreStrategy> {
    let p = objective.owner;
    let values = state_values(arena, objective, semantics)?;
    let la = la_actions(arena, objective, semantics)?;
    let wmoves = winning_moves(arena, objective, semantics)?;
    let disp = Dispatcher::build(arena, objective, &la, &values)?;

    let mut strat = MooreStrategy::new(p, disp.names.clone(), 0);
    let free = 0usize;
    // Free mode plays by value; lasso slots continue their lasso when the
    // expected state arrives and re-dispatch otherwise.
    for s in arena.states() {
        match values.get(s) {
            1 => {
                for m in 0..disp.names.len() {
                    strat.set_output(m, s, wmoves[&s].clone());
                    strat.set_update(m, s, free);
                }
            }
            -1 => {
                let a = la.la_actions(s)[0];
                for m in 0..disp.names.len() {
                    strat.set_output(m, s, MixedMove::dirac(a));
                    strat.set_update(m, s, free);
                }
            }
            _ => {
                let (a0, m0) = disp.enter(s);
                for m in 0..disp.names.len() {
                    strat.set_output(m, s, MixedMove::dirac(a0));
                    strat.set_update(m, s, m0);
                }
            }
        }
    }
    // Overwrite lasso-slot rows where the expected state actually arrives.
    for (&anchor, lasso) in &disp.lassos {
        for i in 0..lasso.path.len() {
            let m = disp.slot[&(anchor, i)];
            let j = lasso.step(i);
            let expected = lasso.path[j];
            if values.get(expected) != 0 {
                // The lasso has crossed into a non-0 state; the by-value rows
                // already handle it.
                continue;
            }
            strat.set_output(m, expected, MixedMove::dirac(lasso.moves[j]));
            strat.set_update(m, expected, disp.slot[&(anchor, j)]);
        }
    }
    Ok(strat)
}

/// Lemma-8 machine surgery: upgrades an LA strategy into a dominating
/// admissible one.  Nodes where the state value is 1 but the strategy value
/// is ≤ 0 switch to the memoryless winning moves; nodes where the state value
/// is 0 but the strategy value is −1 switch to the baseline dispatcher;
/// everything else is unchanged.
pub fn dominating_admissible(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
    strategy: &MooreStrategy,
) -> Result<MooreStrategy> {
    let verdict = classify_strategy(arena, objective, semantics, strategy)?;
    if !verdict.la {
        return Err(GameError::Invalid(
            "dominating_admissible requires an LA strategy".into(),
        ));
    }
    if verdict.admissible {
        return Ok(strategy.clone());
    }
    let sv = state_values(arena, objective, semantics)?;
    let tbl = strategy_values(arena, objective, semantics, strategy)?;
    let baseline = baseline_admissible_strategy(arena, objective, semantics)?;
    let wmoves = winning_moves(arena, objective, semantics)?;

    // Memory layout: original memories, then baseline memories, then one
    // dedicated winning mode.
    let orig = strategy.num_memories();
    let base = baseline.num_memories();
    let win_mode = orig + base;
    let mut names: Vec<String> = (0..orig)
        .map(|m| format!("orig-{}", strategy.memory_name(m)))
        .collect();
    names.extend((0..base).map(|m| format!("base-{}", baseline.memory_name(m))));
    names.push("win".to_string());

    // Mismatch classification per reachable original product node.
    let mut to_win: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    let mut to_base: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    for v in 0..tbl.product.num_nodes() {
        let (s, m) = tbl.product.node(v);
        if sv.get(s) == 1 && tbl.get(v) <= 0 {
            to_win.insert((m, s.0), true);
        } else if sv.get(s) == 0 && tbl.get(v) == -1 {
            to_base.insert((m, s.0), true);
        }
    }

    let init_memory;
    {
        let root = (strategy.init_memory(), arena.init().0);
        init_memory = if to_win.contains_key(&root) {
            win_mode
        } else if to_base.contains_key(&root) {
            orig + baseline.init_memory()
        } else {
            strategy.init_memory()
        };
    }
    let mut out = MooreStrategy::new(objective.owner, names, init_memory);

    for s in arena.states() {
        // Original mode: defer to the strategy except at mismatch nodes.
        for m in 0..orig {
            if to_win.contains_key(&(m, s.0)) {
                out.set_output(m, s, wmoves[&s].clone());
                out.set_update(m, s, win_mode);
            } else if to_base.contains_key(&(m, s.0)) {
                let bm = baseline.init_memory();
                // Behave as the baseline entering `s` fresh.
                if let Some(mv) = baseline.move_at(bm, s) {
                    out.set_output(m, s, mv.clone());
                }
                out.set_update(m, s, orig + baseline.next_memory(bm, s));
            } else {
                if let Some(mv) = strategy.move_at(m, s) {
                    out.set_output(m, s, mv.clone());
                }
                out.set_update(m, s, strategy.next_memory(m, s));
            }
        }
        // Baseline mode mirrors the baseline machine.
        for bm in 0..base {
            if let Some(mv) = baseline.move_at(bm, s) {
                out.set_output(orig + bm, s, mv.clone());
            }
            out.set_update(orig + bm, s, orig + baseline.next_memory(bm, s));
        }
        // Winning mode: memoryless winning moves (defined on the whole
        // winning region, which is closed under them).
        if let Some(mv) = wmoves.get(&s) {
            out.set_output(win_mode, s, mv.clone());
        }
        out.set_update(win_mode, s, win_mode);
    }

    let check = classify_strategy(arena, objective, semantics, &out)?;
    debug_assert!(check.admissible, "surgery must produce an admissible strategy");
    if !check.admissible {
        return Err(GameError::Validation(
            "machine surgery failed to produce an admissible strategy".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::tests::sigma3;
    use crate::format;
    use crate::objectives::Normalized;

    fn norm_running() -> (Normalized, format::GameSpec) {
        let spec = format::parse_game(include_str!("../fixtures/running.game")).unwrap();
        let norm = Normalized::normalize(&spec.arena, &spec.objectives).unwrap();
        (norm, spec)
    }

    fn display_state(norm: &Normalized, name: &str) -> StateId {
        norm.arena()
            .states()
            .find(|&s| norm.display_name(s) == name)
            .unwrap()
    }

    fn la_names(norm: &Normalized, la: &LaTable, state: &str) -> Vec<String> {
        la.la_actions(display_state(norm, state))
            .iter()
            .map(|&a| norm.display_action(a).to_string())
            .collect()
    }

    #[test]
    fn dominance_running_examples() {
        let (norm, _) = norm_running();
        let arena = norm.arena();
        let obj = norm.objective(Player(0)).clone();
        let act = |state: &str, name: &str| {
            let s = display_state(&norm, state);
            arena
                .actions_at(s, Player(0))
                .iter()
                .copied()
                .find(|&a| norm.display_action(a) == name)
                .unwrap()
        };

        let vs = state_values(arena, &obj, Semantics::Sure).unwrap();
        let s2 = display_state(&norm, "s2");
        assert!(!dirac_dominance_leq(arena, &vs, s2, act("s2", "f"), act("s2", "g")).unwrap());
        assert!(!dirac_dominance_leq(arena, &vs, s2, act("s2", "g"), act("s2", "f")).unwrap());

        let va = state_values(arena, &obj, Semantics::AlmostSure).unwrap();
        let s1 = display_state(&norm, "s1");
        assert!(dirac_dominance_leq(arena, &va, s1, act("s1", "c"), act("s1", "d")).unwrap());
        assert!(!dirac_dominance_leq(arena, &va, s1, act("s1", "d"), act("s1", "c")).unwrap());

        let s0 = display_state(&norm, "s0");
        for sem_values in [&vs, &va] {
            assert!(
                !dirac_dominance_leq(arena, sem_values, s0, act("s0", "a"), act("s0", "b")).unwrap()
            );
            assert!(
                !dirac_dominance_leq(arena, sem_values, s0, act("s0", "b"), act("s0", "a")).unwrap()
            );
        }
        // Mismatched state errors.
        assert!(dirac_dominance_leq(arena, &va, s0, act("s1", "c"), act("s1", "d")).is_err());
    }

    #[test]
    fn la_tables_running() {
        let (norm, _) = norm_running();
        let obj = norm.objective(Player(0)).clone();

        let la_a = la_actions(norm.arena(), &obj, Semantics::AlmostSure).unwrap();
        assert_eq!(la_names(&norm, &la_a, "s0"), ["a", "b"]);
        assert_eq!(la_a.classes(display_state(&norm, "s0")).len(), 2);
        assert_eq!(la_names(&norm, &la_a, "s1"), ["d"]);
        assert_eq!(la_names(&norm, &la_a, "s2"), ["f", "g"]);
        assert_eq!(la_a.classes(display_state(&norm, "s2")).len(), 1);

        let la_s = la_actions(norm.arena(), &obj, Semantics::Sure).unwrap();
        assert_eq!(la_names(&norm, &la_s, "s2"), ["f", "g"]);
        assert_eq!(la_s.classes(display_state(&norm, "s2")).len(), 2);
        // Under the sure semantics c is incomparable with d (both successors
        // against d' have sure value 0 but differ), so c stays.
        assert_eq!(la_names(&norm, &la_s, "s1"), ["c", "d"]);

        // In the almost-sure tables c and c' are absent everywhere.
        let obj2 = norm.objective(Player(1)).clone();
        let la2 = la_actions(norm.arena(), &obj2, Semantics::AlmostSure).unwrap();
        assert_eq!(la_names(&norm, &la2, "s1"), ["d'"]);
    }

    #[test]
    fn mixed_move_la_running() {
        let (norm, spec) = norm_running();
        let obj = norm.objective(Player(0)).clone();
        let s2 = display_state(&norm, "s2");
        let f = norm.arena().actions_at(s2, Player(0))[0];
        let g = norm.arena().actions_at(s2, Player(0))[1];
        assert_eq!(norm.display_action(f), "f");
        let mix = MixedMove::uniform(&[f, g]).unwrap();

        let la_a = la_actions(norm.arena(), &obj, Semantics::AlmostSure).unwrap();
        assert!(is_mixed_move_la(&la_a, s2, &mix).unwrap());
        let la_s = la_actions(norm.arena(), &obj, Semantics::Sure).unwrap();
        assert!(!is_mixed_move_la(&la_s, s2, &mix).unwrap());
        assert!(is_mixed_move_la(&la_s, s2, &MixedMove::dirac(f)).unwrap());

        // Mixing the two s0 classes is not LA in either semantics.
        let s0 = display_state(&norm, "s0");
        let acts = norm.arena().actions_at(s0, Player(0));
        let mix0 = MixedMove::uniform(&[acts[0], acts[1]]).unwrap();
        assert!(!is_mixed_move_la(&la_a, s0, &mix0).unwrap());
        let _ = spec;
    }

    #[test]
    fn classify_running_strategies() {
        let (norm, spec) = norm_running();
        let obj = norm.objective(Player(0)).clone();
        let arena = norm.arena();
        let s3 = norm.lift_strategy(&sigma3(&spec.arena)).unwrap();

        let v = classify_strategy(arena, &obj, Semantics::AlmostSure, &s3).unwrap();
        assert!(v.admissible && v.la && v.sco);

        let v = classify_strategy(arena, &obj, Semantics::Sure, &s3).unwrap();
        assert!(!v.admissible && !v.la);
        let ((s, _), _) = v.la_witness.unwrap();
        assert_eq!(norm.display_name(s), "s2");

        // σ2: Dirac f at s2 — S-admissible, not A-admissible (SCO fails).
        let mut sigma2 = sigma3(&spec.arena);
        let s2o = spec.arena.state_by_name("s2").unwrap();
        let f = spec.arena.action_by_name(s2o, Player(0), "f").unwrap();
        sigma2.set_output(0, s2o, MixedMove::dirac(f));
        let sigma2 = norm.lift_strategy(&sigma2).unwrap();
        let v = classify_strategy(arena, &obj, Semantics::Sure, &sigma2).unwrap();
        assert!(v.admissible);
        let v = classify_strategy(arena, &obj, Semantics::AlmostSure, &sigma2).unwrap();
        assert!(!v.admissible && v.la && !v.sco);
        let (s, _) = v.sco_witness.unwrap();
        assert_eq!(norm.display_name(s), "s2");

        // σ3': plays c on the first visit to s1 — A-SCO but not A-LA.
        let text = r#"{
            "player": 1, "memory": ["pending", "done"], "init": "pending",
            "output": [
                {"memory": "pending", "state": "s0", "move": {"b": "1"}},
                {"memory": "pending", "state": "s1", "move": {"c": "1"}},
                {"memory": "done", "state": "s1", "move": {"d": "1"}},
                {"memory": "done", "state": "s2", "move": {"f": "1/2", "g": "1/2"}},
                {"memory": "done", "state": "Trg", "move": {"t": "1"}}
            ],
            "update": [{"memory": "pending", "state": "s1", "next": "done"}]
        }"#;
        let s3p = format::parse_strategy(text, &spec.arena).unwrap();
        let s3p = norm.lift_strategy(&s3p).unwrap();
        let v = classify_strategy(arena, &obj, Semantics::AlmostSure, &s3p).unwrap();
        assert!(v.sco && !v.la && !v.admissible);
        let ((s, _), a) = v.la_witness.unwrap();
        assert_eq!(norm.display_name(s), "s1");
        assert_eq!(norm.display_action(a), "c");
    }

    #[test]
    fn derandomize_running() {
        let (norm, spec) = norm_running();
        let obj = norm.objective(Player(0)).clone();
        let s3 = norm.lift_strategy(&sigma3(&spec.arena)).unwrap();
        // Almost-sure: σ3 is unchanged on reachable value-1 nodes; the mixes
        // at s2 and Trg survive because those nodes have value 1.
        let d = derandomize_admissible(norm.arena(), &obj, Semantics::AlmostSure, &s3).unwrap();
        let s2 = display_state(&norm, "s2");
        assert_eq!(d.move_at(0, s2), s3.move_at(0, s2));
        let v = classify_strategy(norm.arena(), &obj, Semantics::AlmostSure, &d).unwrap();
        assert!(v.admissible);
        // Not admissible input is rejected.
        assert!(derandomize_admissible(norm.arena(), &obj, Semantics::Sure, &s3).is_err());
    }

    #[test]
    fn baseline_running() {
        let (norm, _) = norm_running();
        let obj = norm.objective(Player(0)).clone();
        let b = baseline_admissible_strategy(norm.arena(), &obj, Semantics::AlmostSure).unwrap();
        let v = classify_strategy(norm.arena(), &obj, Semantics::AlmostSure, &b).unwrap();
        assert!(v.admissible);
        // Dispatcher plays b at s0, d at s1 (the lasso), ½f+½g at s2
        // (winning mode).
        let g = crate::arena::ProductGraph::build(norm.arena(), &b).unwrap();
        let mut seen = BTreeMap::new();
        for v in 0..g.num_nodes() {
            let s = g.state_of(v);
            let names: Vec<String> = g
                .move_of(v)
                .support()
                .map(|a| norm.display_action(a).to_string())
                .collect();
            seen.insert(norm.display_name(s).to_string(), names);
        }
        assert_eq!(seen["s0"], ["b"]);
        assert_eq!(seen["s1"], ["d"]);
        assert_eq!(seen["s2"], ["f", "g"]);

        // Player 2's baseline plays b' at s0 and d' at s1.
        let obj2 = norm.objective(Player(1)).clone();
        let b2 = baseline_admissible_strategy(norm.arena(), &obj2, Semantics::AlmostSure).unwrap();
        let v2 = classify_strategy(norm.arena(), &obj2, Semantics::AlmostSure, &b2).unwrap();
        assert!(v2.admissible);
        let g2 = crate::arena::ProductGraph::build(norm.arena(), &b2).unwrap();
        let mut seen2 = BTreeMap::new();
        for v in 0..g2.num_nodes() {
            let s = g2.state_of(v);
            let names: Vec<String> = g2
                .move_of(v)
                .support()
                .map(|a| norm.display_action(a).to_string())
                .collect();
            seen2.insert(norm.display_name(s).to_string(), names);
        }
        assert_eq!(seen2["s0"], ["b'"]);
        assert_eq!(seen2["s1"], ["d'"]);

        // Sure semantics baseline is admissible too.
        let bs = baseline_admissible_strategy(norm.arena(), &obj, Semantics::Sure).unwrap();
        let vs = classify_strategy(norm.arena(), &obj, Semantics::Sure, &bs).unwrap();
        assert!(vs.admissible);
    }

    #[test]
    fn dominating_repairs_sigma2_and_sigma1() {
        let (norm, spec) = norm_running();
        let obj = norm.objective(Player(0)).clone();
        let arena = norm.arena();

        // σ2 is LA but not SCO almost-surely; the repair behaves like σ3 at
        // the mismatch node s2.
        let mut sigma2 = sigma3(&spec.arena);
        let s2o = spec.arena.state_by_name("s2").unwrap();
        let f = spec.arena.action_by_name(s2o, Player(0), "f").unwrap();
        sigma2.set_output(0, s2o, MixedMove::dirac(f));
        let sigma2 = norm.lift_strategy(&sigma2).unwrap();
        let fixed = dominating_admissible(arena, &obj, Semantics::AlmostSure, &sigma2).unwrap();
        let v = classify_strategy(arena, &obj, Semantics::AlmostSure, &fixed).unwrap();
        assert!(v.admissible);
        let g = crate::arena::ProductGraph::build(arena, &fixed).unwrap();
        let s2_node = (0..g.num_nodes())
            .find(|&n| norm.display_name(g.state_of(n)) == "s2")
            .unwrap();
        let support: Vec<&str> = g
            .move_of(s2_node)
            .support()
            .map(|a| norm.display_action(a))
            .collect();
        assert_eq!(support, ["f", "g"]);

        // σ3 is already admissible: identity.
        let s3 = norm.lift_strategy(&sigma3(&spec.arena)).unwrap();
        let same = dominating_admissible(arena, &obj, Semantics::AlmostSure, &s3).unwrap();
        assert_eq!(same, s3);

        // σ1 plays a forever: LA, strategy value −1 at the root; the repair
        // reaches Trg cooperatively (value ≥ 0 everywhere on its product).
        let mut moves = BTreeMap::new();
        let s0o = spec.arena.state_by_name("s0").unwrap();
        let a = spec.arena.action_by_name(s0o, Player(0), "a").unwrap();
        moves.insert(s0o, MixedMove::dirac(a));
        for st in ["s1", "s2", "Trg"] {
            let s = spec.arena.state_by_name(st).unwrap();
            moves.insert(s, MixedMove::dirac(spec.arena.actions_at(s, Player(0))[0]));
        }
        let sigma1 = norm.lift_strategy(&MooreStrategy::memoryless(Player(0), moves)).unwrap();
        let v1 = classify_strategy(arena, &obj, Semantics::AlmostSure, &sigma1).unwrap();
        assert!(v1.la && !v1.sco);
        let repaired = dominating_admissible(arena, &obj, Semantics::AlmostSure, &sigma1).unwrap();
        let vr = classify_strategy(arena, &obj, Semantics::AlmostSure, &repaired).unwrap();
        assert!(vr.admissible);
        let tbl = strategy_values(arena, &obj, Semantics::AlmostSure, &repaired).unwrap();
        assert!((0..tbl.product.num_nodes()).all(|n| tbl.get(n) >= 0));
    }

    #[test]
    fn leq_is_a_preorder() {
        let (norm, _) = norm_running();
        let arena = norm.arena();
        for (p, sem) in [
            (Player(0), Semantics::Sure),
            (Player(0), Semantics::AlmostSure),
            (Player(1), Semantics::AlmostSure),
        ] {
            let obj = norm.objective(p).clone();
            let vals = state_values(arena, &obj, sem).unwrap();
            for s in arena.states() {
                let acts = arena.actions_at(s, p);
                for &a in acts {
                    assert!(dirac_dominance_leq(arena, &vals, s, a, a).unwrap());
                    for &b in acts {
                        for &c in acts {
                            let ab = dirac_dominance_leq(arena, &vals, s, a, b).unwrap();
                            let bc = dirac_dominance_leq(arena, &vals, s, b, c).unwrap();
                            let ac = dirac_dominance_leq(arena, &vals, s, a, c).unwrap();
                            assert!(!(ab && bc) || ac, "transitivity violated");
                        }
                    }
                }
            }
        }
    }
}
