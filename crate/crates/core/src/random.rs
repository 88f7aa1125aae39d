//! Seeded random generation of arenas, objectives, and strategies, used by
//! the stress tests and the benchmark suite.  All generators take an explicit
//! RNG so batches are reproducible.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admissibility::{
    baseline_admissible_strategy, classify_strategy, dominating_admissible, la_actions, LaTable,
};
use crate::arena::{ActionId, Arena, ArenaBuilder, MixedMove, MooreStrategy, Player, StateId};
use crate::error::Result;
use crate::objectives::{Normalized, Objective, ObjectiveKind, Semantics};
use crate::rat;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct RandomArenaOptions {
    pub players: usize,
    pub min_states: usize,
    pub max_states: usize,
    pub max_actions: usize,
}

impl Default for RandomArenaOptions {
    fn default() -> Self {
        RandomArenaOptions {
            players: 2,
            min_states: 2,
            max_states: 5,
            max_actions: 3,
        }
    }
}

/// A random arena with total transitions; action names are unique per state
/// so the per-state alphabets stay disjoint.
pub fn random_arena(rng: &mut ChaCha8Rng, opts: &RandomArenaOptions) -> Arena {
    let n = rng.gen_range(opts.min_states..=opts.max_states);
    let mut b = ArenaBuilder::new(opts.players);
    for s in 0..n {
        b.add_state(&format!("s{s}")).unwrap();
    }
    b.set_init(StateId(0));
    let mut actions: Vec<Vec<Vec<ActionId>>> = Vec::new();
    for s in 0..n {
        let mut per_player = Vec::new();
        for p in 0..opts.players {
            let k = rng.gen_range(1..=opts.max_actions);
            let mut acts = Vec::new();
            for i in 0..k {
                acts.push(
                    b.add_action(Player(p), StateId(s), &format!("a{s}_{p}_{i}"))
                        .unwrap(),
                );
            }
            per_player.push(acts);
        }
        actions.push(per_player);
    }
    for s in 0..n {
        let slots: Vec<&[ActionId]> = actions[s].iter().map(|v| v.as_slice()).collect();
        let mut profiles = vec![Vec::new()];
        for slot in &slots {
            let mut next = Vec::new();
            for t in &profiles {
                for &a in *slot {
                    let mut tt: Vec<ActionId> = t.clone();
                    tt.push(a);
                    next.push(tt);
                }
            }
            profiles = next;
        }
        for profile in profiles {
            let t = StateId(rng.gen_range(0..n));
            b.add_transition(StateId(s), &profile, t).unwrap();
        }
    }
    b.build().unwrap()
}

/// A random nonempty state subset.
pub fn random_state_set(rng: &mut ChaCha8Rng, arena: &Arena) -> BTreeSet<StateId> {
    loop {
        let set: BTreeSet<StateId> = arena
            .states()
            .filter(|_| rng.gen_bool(0.4))
            .collect();
        if !set.is_empty() {
            return set;
        }
    }
}

/// A random objective for `owner` drawn from the listed kinds
/// (0 = safety, 1 = reachability, 2 = Büchi).
pub fn random_objective(
    rng: &mut ChaCha8Rng,
    arena: &Arena,
    owner: Player,
    kinds: &[u8],
) -> Objective {
    let set = random_state_set(rng, arena);
    let kind = match kinds[rng.gen_range(0..kinds.len())] {
        0 => ObjectiveKind::Safety(set),
        1 => ObjectiveKind::Reachability(set),
        _ => ObjectiveKind::Buchi(set),
    };
    Objective { owner, kind }
}

/// A random game that is already in simple form: reachability targets and
/// safety bad-sets are absorbing by construction, so normalisation is the
/// identity.  Kinds as in [`random_objective`].
pub fn random_simple_game(
    rng: &mut ChaCha8Rng,
    opts: &RandomArenaOptions,
    kinds: &[u8],
) -> crate::format::GameSpec {
    let n = rng.gen_range(opts.min_states..=opts.max_states);
    let random_set = |rng: &mut ChaCha8Rng| -> BTreeSet<StateId> {
        loop {
            let set: BTreeSet<StateId> =
                (0..n).map(StateId).filter(|_| rng.gen_bool(0.35)).collect();
            if !set.is_empty() && set.len() < n {
                return set;
            }
        }
    };
    let objectives: Vec<Objective> = (0..opts.players)
        .map(|q| {
            let set = random_set(rng);
            let kind = match kinds[rng.gen_range(0..kinds.len())] {
                0 => ObjectiveKind::Safety(set),
                1 => ObjectiveKind::Reachability(set),
                _ => ObjectiveKind::Buchi(set),
            };
            Objective {
                owner: Player(q),
                kind,
            }
        })
        .collect();
    // Reach targets and bad sets must be absorbing for the game to be simple.
    let absorbing: BTreeSet<StateId> = objectives
        .iter()
        .flat_map(|o| match &o.kind {
            ObjectiveKind::Safety(set) | ObjectiveKind::Reachability(set) => set.clone(),
            ObjectiveKind::Buchi(_) => BTreeSet::new(),
        })
        .collect();

    let mut b = ArenaBuilder::new(opts.players);
    for s in 0..n {
        b.add_state(&format!("s{s}")).unwrap();
    }
    b.set_init(StateId(0));
    let mut actions: Vec<Vec<Vec<ActionId>>> = Vec::new();
    for s in 0..n {
        let mut per_player = Vec::new();
        for p in 0..opts.players {
            let k = rng.gen_range(1..=opts.max_actions);
            let mut acts = Vec::new();
            for i in 0..k {
                acts.push(
                    b.add_action(Player(p), StateId(s), &format!("a{s}_{p}_{i}"))
                        .unwrap(),
                );
            }
            per_player.push(acts);
        }
        actions.push(per_player);
    }
    for s in 0..n {
        let slots: Vec<&[ActionId]> = actions[s].iter().map(|v| v.as_slice()).collect();
        let mut profiles = vec![Vec::new()];
        for slot in &slots {
            let mut next = Vec::new();
            for t in &profiles {
                for &a in *slot {
                    let mut tt: Vec<ActionId> = t.clone();
                    tt.push(a);
                    next.push(tt);
                }
            }
            profiles = next;
        }
        for profile in profiles {
            let t = if absorbing.contains(&StateId(s)) {
                StateId(s)
            } else {
                StateId(rng.gen_range(0..n))
            };
            b.add_transition(StateId(s), &profile, t).unwrap();
        }
    }
    crate::format::GameSpec {
        arena: b.build().unwrap(),
        objectives,
    }
}

/// A random simple safety game (bad sets are traps).
pub fn random_simple_safety_game(rng: &mut ChaCha8Rng) -> crate::format::GameSpec {
    random_simple_game(rng, &RandomArenaOptions::default(), &[0])
}

/// A random Moore strategy whose every output stays inside one LA class
/// (hence is locally admissible by construction) with `mems` memory states.
pub fn random_la_strategy(
    rng: &mut ChaCha8Rng,
    arena: &Arena,
    la: &LaTable,
    mems: usize,
) -> MooreStrategy {
    let mut strat = MooreStrategy::new(
        la.player,
        (0..mems).map(|m| format!("m{m}")).collect(),
        0,
    );
    for s in arena.states() {
        for m in 0..mems {
            let classes = la.classes(s);
            let class = &classes[rng.gen_range(0..classes.len())];
            let mut support: Vec<ActionId> = class
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            if support.is_empty() {
                support.push(class[rng.gen_range(0..class.len())]);
            }
            let raw: Vec<u64> = support.iter().map(|_| rng.gen_range(1..=3)).collect();
            let total: u64 = raw.iter().sum();
            let mut weights = BTreeMap::new();
            for (&a, &k) in support.iter().zip(&raw) {
                weights.insert(a, rat::from_u64s(k, total));
            }
            strat.set_output(m, s, MixedMove::from_weights(weights).unwrap());
            strat.set_update(m, s, rng.gen_range(0..mems));
        }
    }
    strat
}

/// A suite of at least `count` pairwise-distinct admissible strategies for
/// the objective's owner: the baseline plus Lemma-8 repairs of random
/// LA machines.
pub fn admissible_suite(
    arena: &Arena,
    objective: &Objective,
    semantics: Semantics,
    count: usize,
    seed: u64,
) -> Result<Vec<MooreStrategy>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let la = la_actions(arena, objective, semantics)?;
    let mut suite = vec![baseline_admissible_strategy(arena, objective, semantics)?];
    let mut seen: BTreeSet<String> = suite.iter().map(strategy_fingerprint).collect();
    let mut attempts = 0;
    while suite.len() < count && attempts < count * 50 {
        attempts += 1;
        let mems = rng.gen_range(1..=2);
        let raw = random_la_strategy(&mut rng, arena, &la, mems);
        let fixed = dominating_admissible(arena, objective, semantics, &raw)?;
        let verdict = classify_strategy(arena, objective, semantics, &fixed)?;
        if !verdict.admissible {
            continue;
        }
        let fp = strategy_fingerprint(&fixed);
        if seen.insert(fp) {
            suite.push(fixed);
        }
    }
    Ok(suite)
}

fn strategy_fingerprint(strat: &MooreStrategy) -> String {
    let mut out = format!("{}:{}", strat.num_memories(), strat.init_memory());
    for (m, s, mv) in strat.output_rows() {
        out.push_str(&format!(";{m},{}=", s.0));
        for (a, w) in mv.weights() {
            out.push_str(&format!("{}*{},", a.0, w));
        }
    }
    for (m, s, n) in strat.update_rows() {
        out.push_str(&format!(";u{m},{}>{n}", s.0));
    }
    out
}

/// Root-state values of `games` random reachability/safety games for every
/// player and both semantics; the workload behind the benchmark suite.
/// Runs data-parallel when requested and the `parallel` feature is enabled.
pub fn sweep_values(games: usize, seed: u64, parallel: bool) -> Vec<i8> {
    let one = |i: usize| -> Vec<i8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let arena = random_arena(&mut rng, &RandomArenaOptions::default());
        let objectives: Vec<Objective> = arena
            .players()
            .map(|q| random_objective(&mut rng, &arena, q, &[0, 1]))
            .collect();
        let mut out = Vec::new();
        match Normalized::normalize(&arena, &objectives) {
            Ok(norm) => {
                for q in norm.arena().players() {
                    for sem in [Semantics::Sure, Semantics::AlmostSure] {
                        let v = crate::values::state_values(norm.arena(), &norm.objectives()[q.0], sem)
                            .map(|t| t.get(norm.arena().init()))
                            .unwrap_or(i8::MIN);
                        out.push(v);
                    }
                }
            }
            Err(_) => out.push(i8::MIN),
        }
        out
    };
    run_sweep(games, parallel, &one)
}

#[cfg(feature = "parallel")]
fn run_sweep(games: usize, parallel: bool, one: &(dyn Fn(usize) -> Vec<i8> + Sync)) -> Vec<i8> {
    if parallel {
        (0..games).into_par_iter().flat_map_iter(one).collect()
    } else {
        (0..games).flat_map(one).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_sweep(games: usize, _parallel: bool, one: &(dyn Fn(usize) -> Vec<i8> + Sync)) -> Vec<i8> {
    (0..games).flat_map(one).collect()
}
