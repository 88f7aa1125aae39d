//! Core data model: concurrent game arenas, randomised moves, finite-memory
//! Moore strategies, and the strategy/arena product graph.
//!
//! All probability computations are exact rationals; no floating point is
//! used anywhere in the analysis pipeline.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num::{One, Zero};
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GameError, Result};
use crate::rat::{self, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Player(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionInfo {
    pub name: String,
    pub player: Player,
    pub state: StateId,
}

/// A concurrent game played on a finite graph: every round all players pick
/// one of their actions at the current state simultaneously and the joint
/// tuple determines the successor.
///
/// Invariants enforced by [`ArenaBuilder::build`]:
/// - the transition function is total over the action-set product at every
///   state;
/// - action sets of distinct players at the same state are disjoint;
/// - each action belongs to exactly one state (actions are qualified by their
///   state internally, so users may reuse names across states).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arena {
    players: usize,
    state_names: Vec<String>,
    init: StateId,
    actions: Vec<ActionInfo>,
    /// `actions_at[state][player]` — sorted ascending by id.
    actions_at: Vec<Vec<Vec<ActionId>>>,
    /// `delta[state][profile_index]` with mixed-radix profile indices.
    delta: Vec<Vec<StateId>>,
}

impl Arena {
    pub fn num_players(&self) -> usize {
        self.players
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn init(&self) -> StateId {
        self.init
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.state_names.len()).map(StateId)
    }

    pub fn players(&self) -> impl Iterator<Item = Player> {
        (0..self.players).map(Player)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s.0]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name).map(StateId)
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn action(&self, a: ActionId) -> &ActionInfo {
        &self.actions[a.0]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.0].name
    }

    /// The actions of `p` at `s`, ascending by id (file order).
    pub fn actions_at(&self, s: StateId, p: Player) -> &[ActionId] {
        &self.actions_at[s.0][p.0]
    }

    pub fn action_by_name(&self, s: StateId, p: Player, name: &str) -> Option<ActionId> {
        self.actions_at[s.0][p.0]
            .iter()
            .copied()
            .find(|&a| self.actions[a.0].name == name)
    }

    /// Successor under a full joint profile (one action per player, in player
    /// order).
    pub fn successor(&self, s: StateId, profile: &[ActionId]) -> StateId {
        self.delta[s.0][self.profile_index(s, profile)]
    }

    fn profile_index(&self, s: StateId, profile: &[ActionId]) -> usize {
        debug_assert_eq!(profile.len(), self.players);
        let mut idx = 0;
        for (p, &a) in profile.iter().enumerate() {
            let acts = &self.actions_at[s.0][p];
            let pos = acts
                .iter()
                .position(|&x| x == a)
                .unwrap_or_else(|| panic!("action {} not at state {}", a.0, self.state_names[s.0]));
            idx = idx * acts.len() + pos;
        }
        idx
    }

    /// All joint profiles at `s`, lexicographic in (player-order, action
    /// file-order).
    pub fn joint_profiles(&self, s: StateId) -> Vec<Vec<ActionId>> {
        let slots: Vec<&[ActionId]> = (0..self.players)
            .map(|p| self.actions_at[s.0][p].as_slice())
            .collect();
        cartesian(&slots)
    }

    /// All adversary tuples at `s` for player `p`: one action per player
    /// `q != p`, in ascending player order.
    pub fn adversary_tuples(&self, s: StateId, p: Player) -> Vec<Vec<ActionId>> {
        let slots: Vec<&[ActionId]> = (0..self.players)
            .filter(|&q| q != p.0)
            .map(|q| self.actions_at[s.0][q].as_slice())
            .collect();
        cartesian(&slots)
    }

    /// Merges one own action with an adversary tuple into a full profile.
    pub fn combine(&self, p: Player, own: ActionId, adversary: &[ActionId]) -> Vec<ActionId> {
        let mut profile = Vec::with_capacity(self.players);
        let mut ai = 0;
        for q in 0..self.players {
            if q == p.0 {
                profile.push(own);
            } else {
                profile.push(adversary[ai]);
                ai += 1;
            }
        }
        profile
    }

    pub fn successor_one(&self, s: StateId, p: Player, own: ActionId, adversary: &[ActionId]) -> StateId {
        self.successor(s, &self.combine(p, own, adversary))
    }
}

fn cartesian(slots: &[&[ActionId]]) -> Vec<Vec<ActionId>> {
    let mut out = vec![Vec::new()];
    for slot in slots {
        let mut next = Vec::with_capacity(out.len() * slot.len());
        for tuple in &out {
            for &a in *slot {
                let mut t = tuple.clone();
                t.push(a);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Incremental construction of a validated [`Arena`].
#[derive(Debug, Default)]
pub struct ArenaBuilder {
    players: usize,
    state_names: Vec<String>,
    state_index: HashMap<String, usize>,
    init: Option<StateId>,
    actions: Vec<ActionInfo>,
    actions_at: Vec<Vec<Vec<ActionId>>>,
    transitions: HashMap<(usize, Vec<usize>), StateId>,
}

impl ArenaBuilder {
    pub fn new(players: usize) -> Self {
        ArenaBuilder {
            players,
            ..Default::default()
        }
    }

    pub fn add_state(&mut self, name: &str) -> Result<StateId> {
        if self.state_index.contains_key(name) {
            return Err(GameError::Validation(format!("duplicate state `{name}`")));
        }
        let id = StateId(self.state_names.len());
        self.state_index.insert(name.to_string(), id.0);
        self.state_names.push(name.to_string());
        self.actions_at.push(vec![Vec::new(); self.players]);
        Ok(id)
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.state_index.get(name).copied().map(StateId)
    }

    pub fn action_at(&self, s: StateId, p: Player, name: &str) -> Option<ActionId> {
        self.actions_at[s.0][p.0]
            .iter()
            .copied()
            .find(|&a| self.actions[a.0].name == name)
    }

    pub fn set_init(&mut self, s: StateId) {
        self.init = Some(s);
    }

    pub fn add_action(&mut self, p: Player, s: StateId, name: &str) -> Result<ActionId> {
        for q in 0..self.players {
            if self.actions_at[s.0][q]
                .iter()
                .any(|&a| self.actions[a.0].name == name)
            {
                return Err(GameError::Validation(format!(
                    "action `{name}` declared twice at state `{}` (players {} and {})",
                    self.state_names[s.0],
                    q + 1,
                    p.0 + 1
                )));
            }
        }
        let id = ActionId(self.actions.len());
        self.actions.push(ActionInfo {
            name: name.to_string(),
            player: p,
            state: s,
        });
        self.actions_at[s.0][p.0].push(id);
        Ok(id)
    }

    pub fn add_transition(&mut self, s: StateId, profile: &[ActionId], target: StateId) -> Result<()> {
        if profile.len() != self.players {
            return Err(GameError::Validation(format!(
                "transition at `{}` lists {} actions for {} players",
                self.state_names[s.0],
                profile.len(),
                self.players
            )));
        }
        for (p, &a) in profile.iter().enumerate() {
            let info = &self.actions[a.0];
            if info.state != s || info.player != Player(p) {
                return Err(GameError::Validation(format!(
                    "action `{}` is not a player-{} action at state `{}`",
                    info.name,
                    p + 1,
                    self.state_names[s.0]
                )));
            }
        }
        let key = (s.0, profile.iter().map(|a| a.0).collect());
        if self.transitions.insert(key, target).is_some() {
            return Err(GameError::Validation(format!(
                "duplicate transition at state `{}`",
                self.state_names[s.0]
            )));
        }
        Ok(())
    }

    pub fn build(self) -> Result<Arena> {
        if self.players == 0 {
            return Err(GameError::Validation("at least one player required".into()));
        }
        if self.state_names.is_empty() {
            return Err(GameError::Validation("at least one state required".into()));
        }
        let init = self
            .init
            .ok_or_else(|| GameError::Validation("initial state not set".into()))?;
        for (s, per_player) in self.actions_at.iter().enumerate() {
            for (p, acts) in per_player.iter().enumerate() {
                if acts.is_empty() {
                    return Err(GameError::Validation(format!(
                        "player {} has no actions at state `{}`",
                        p + 1,
                        self.state_names[s]
                    )));
                }
            }
        }
        let mut arena = Arena {
            players: self.players,
            state_names: self.state_names,
            init,
            actions: self.actions,
            actions_at: self.actions_at,
            delta: Vec::new(),
        };
        let mut seen = 0usize;
        let mut delta = Vec::with_capacity(arena.num_states());
        for s in arena.states() {
            let profiles = arena.joint_profiles(s);
            let mut row = Vec::with_capacity(profiles.len());
            for profile in &profiles {
                let key = (s.0, profile.iter().map(|a| a.0).collect::<Vec<_>>());
                match self.transitions.get(&key) {
                    Some(&t) => {
                        row.push(t);
                        seen += 1;
                    }
                    None => {
                        let names: Vec<&str> =
                            profile.iter().map(|&a| arena.action_name(a)).collect();
                        return Err(GameError::Validation(format!(
                            "missing transition at state `{}` for actions ({})",
                            arena.state_name(s),
                            names.join(", ")
                        )));
                    }
                }
            }
            delta.push(row);
        }
        if seen != self.transitions.len() {
            return Err(GameError::Validation(
                "transition table contains entries outside the action product".into(),
            ));
        }
        arena.delta = delta;
        Ok(arena)
    }
}

/// Exact-rational probability distribution over one player's actions at one
/// state; Dirac moves are the singleton-support case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedMove {
    weights: BTreeMap<ActionId, Rat>,
}

impl MixedMove {
    pub fn dirac(a: ActionId) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(a, rat::one());
        MixedMove { weights }
    }

    pub fn uniform(actions: &[ActionId]) -> Result<Self> {
        if actions.is_empty() {
            return Err(GameError::Invalid("uniform move over empty support".into()));
        }
        let w = Rat::new(1.into(), (actions.len() as i64).into());
        let mut weights = BTreeMap::new();
        for &a in actions {
            weights.insert(a, w.clone());
        }
        if weights.len() != actions.len() {
            return Err(GameError::Invalid("duplicate action in uniform support".into()));
        }
        Ok(MixedMove { weights })
    }

    pub fn from_weights(raw: BTreeMap<ActionId, Rat>) -> Result<Self> {
        let mut weights = BTreeMap::new();
        let mut sum = rat::zero();
        for (a, w) in raw {
            if w < rat::zero() {
                return Err(GameError::Invalid("negative move weight".into()));
            }
            if w.is_zero() {
                continue;
            }
            sum += &w;
            weights.insert(a, w);
        }
        if weights.is_empty() {
            return Err(GameError::Invalid("move has empty support".into()));
        }
        if !sum.is_one() {
            return Err(GameError::Invalid(format!(
                "move weights sum to {}, expected 1",
                rat::format(&sum)
            )));
        }
        Ok(MixedMove { weights })
    }

    pub fn support(&self) -> impl Iterator<Item = ActionId> + '_ {
        self.weights.keys().copied()
    }

    pub fn support_vec(&self) -> Vec<ActionId> {
        self.weights.keys().copied().collect()
    }

    pub fn weight(&self, a: ActionId) -> Rat {
        self.weights.get(&a).cloned().unwrap_or_else(rat::zero)
    }

    pub fn weights(&self) -> &BTreeMap<ActionId, Rat> {
        &self.weights
    }

    pub fn is_dirac(&self) -> bool {
        self.weights.len() == 1
    }

    /// Checks that the support lies within `p`'s actions at `s`.
    pub fn validate_at(&self, arena: &Arena, p: Player, s: StateId) -> Result<()> {
        for a in self.support() {
            let info = arena.action(a);
            if info.state != s || info.player != p {
                return Err(GameError::Invalid(format!(
                    "move uses action `{}` which is not a player-{} action at state `{}`",
                    info.name,
                    p.0 + 1,
                    arena.state_name(s)
                )));
            }
        }
        Ok(())
    }
}

/// One-step distribution δ_r(s, profile) over successor states.
pub fn step_distribution(
    arena: &Arena,
    s: StateId,
    profile: &[MixedMove],
) -> Result<BTreeMap<StateId, Rat>> {
    if profile.len() != arena.num_players() {
        return Err(GameError::Invalid(format!(
            "profile has {} moves for {} players",
            profile.len(),
            arena.num_players()
        )));
    }
    for (p, mv) in profile.iter().enumerate() {
        mv.validate_at(arena, Player(p), s)?;
    }
    let slots: Vec<Vec<ActionId>> = profile.iter().map(|mv| mv.support_vec()).collect();
    let slot_refs: Vec<&[ActionId]> = slots.iter().map(|v| v.as_slice()).collect();
    let mut out: BTreeMap<StateId, Rat> = BTreeMap::new();
    for tuple in cartesian(&slot_refs) {
        let mut w = rat::one();
        for (p, &a) in tuple.iter().enumerate() {
            w *= profile[p].weight(a);
        }
        let t = arena.successor(s, &tuple);
        *out.entry(t).or_insert_with(rat::zero) += w;
    }
    Ok(out)
}

/// Finite-memory observation-based strategy: outputs depend on (memory,
/// current state); the memory update reads only the state sequence, never
/// other players' actions.
///
/// Timing convention: on entering state `s` with memory `m` the strategy
/// plays `output(m, s)`; the update triggered by observing `s` takes effect
/// from the next state on (`m' = update(m, s)`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MooreStrategy {
    player: Player,
    memory_names: Vec<String>,
    init_memory: usize,
    output: BTreeMap<(usize, usize), MixedMove>,
    update: BTreeMap<(usize, usize), usize>,
}

impl MooreStrategy {
    pub fn new(player: Player, memory_names: Vec<String>, init_memory: usize) -> Self {
        assert!(init_memory < memory_names.len());
        MooreStrategy {
            player,
            memory_names,
            init_memory,
            output: BTreeMap::new(),
            update: BTreeMap::new(),
        }
    }

    pub fn memoryless(player: Player, moves: BTreeMap<StateId, MixedMove>) -> Self {
        let mut strat = MooreStrategy::new(player, vec!["m0".into()], 0);
        for (s, mv) in moves {
            strat.set_output(0, s, mv);
        }
        strat
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn num_memories(&self) -> usize {
        self.memory_names.len()
    }

    pub fn memory_name(&self, m: usize) -> &str {
        &self.memory_names[m]
    }

    pub fn memory_by_name(&self, name: &str) -> Option<usize> {
        self.memory_names.iter().position(|n| n == name)
    }

    pub fn init_memory(&self) -> usize {
        self.init_memory
    }

    pub fn set_output(&mut self, m: usize, s: StateId, mv: MixedMove) {
        self.output.insert((m, s.0), mv);
    }

    pub fn set_update(&mut self, m: usize, s: StateId, next: usize) {
        self.update.insert((m, s.0), next);
    }

    pub fn move_at(&self, m: usize, s: StateId) -> Option<&MixedMove> {
        self.output.get(&(m, s.0))
    }

    /// Memory after observing `s` in memory `m`; defaults to `m`.
    pub fn next_memory(&self, m: usize, s: StateId) -> usize {
        self.update.get(&(m, s.0)).copied().unwrap_or(m)
    }

    pub fn output_rows(&self) -> impl Iterator<Item = (usize, StateId, &MixedMove)> {
        self.output.iter().map(|(&(m, s), mv)| (m, StateId(s), mv))
    }

    pub fn update_rows(&self) -> impl Iterator<Item = (usize, StateId, usize)> + '_ {
        self.update.iter().map(|(&(m, s), &n)| (m, StateId(s), n))
    }

    pub fn is_dirac(&self) -> bool {
        self.output.values().all(|mv| mv.is_dirac())
    }
}

/// Quotient of the histories compatible with one player's strategy: nodes are
/// reachable (state, memory) pairs, edges enumerate (support action) ×
/// (adversary Dirac tuple).
#[derive(Debug, Clone)]
pub struct ProductGraph {
    player: Player,
    nodes: Vec<(StateId, usize)>,
    index: HashMap<(usize, usize), usize>,
    moves: Vec<MixedMove>,
    edges: Vec<Vec<ProductEdge>>,
}

#[derive(Debug, Clone)]
pub struct ProductEdge {
    pub own: ActionId,
    pub adversary: Vec<ActionId>,
    pub target: usize,
}

impl ProductGraph {
    pub fn build(arena: &Arena, strategy: &MooreStrategy) -> Result<ProductGraph> {
        let p = strategy.player();
        if p.0 >= arena.num_players() {
            return Err(GameError::Invalid(format!(
                "strategy player {} outside arena with {} players",
                p.0 + 1,
                arena.num_players()
            )));
        }
        let mut g = ProductGraph {
            player: p,
            nodes: Vec::new(),
            index: HashMap::new(),
            moves: Vec::new(),
            edges: Vec::new(),
        };
        let root = (arena.init(), strategy.init_memory());
        g.index.insert((root.0 .0, root.1), 0);
        g.nodes.push(root);
        let mut queue = VecDeque::from([0usize]);
        while let Some(n) = queue.pop_front() {
            let (s, m) = g.nodes[n];
            let mv = strategy.move_at(m, s).ok_or_else(|| {
                GameError::Invalid(format!(
                    "strategy output undefined for memory `{}` at state `{}`",
                    strategy.memory_name(m),
                    arena.state_name(s)
                ))
            })?;
            mv.validate_at(arena, p, s)?;
            let mv = mv.clone();
            let m_next = strategy.next_memory(m, s);
            let mut edges = Vec::new();
            for own in mv.support() {
                for adv in arena.adversary_tuples(s, p) {
                    let t = arena.successor_one(s, p, own, &adv);
                    let key = (t.0, m_next);
                    let target = match g.index.get(&key) {
                        Some(&i) => i,
                        None => {
                            let i = g.nodes.len();
                            g.index.insert(key, i);
                            g.nodes.push((t, m_next));
                            queue.push_back(i);
                            i
                        }
                    };
                    edges.push(ProductEdge {
                        own,
                        adversary: adv,
                        target,
                    });
                }
            }
            if g.edges.len() <= n {
                g.edges.resize_with(n + 1, Vec::new);
            }
            g.edges[n] = edges;
            g.moves.push(mv);
        }
        Ok(g)
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(|e| e.len()).sum()
    }

    pub fn node(&self, n: usize) -> (StateId, usize) {
        self.nodes[n]
    }

    pub fn state_of(&self, n: usize) -> StateId {
        self.nodes[n].0
    }

    pub fn move_of(&self, n: usize) -> &MixedMove {
        &self.moves[n]
    }

    pub fn edges(&self, n: usize) -> &[ProductEdge] {
        &self.edges[n]
    }

    /// Edges grouped by adversary tuple (tuple-sorted, deterministic); each
    /// group lists `(own action, target)` pairs in support order.
    pub fn edges_by_adversary(&self, n: usize) -> Vec<(Vec<ActionId>, Vec<(ActionId, usize)>)> {
        let mut groups: BTreeMap<Vec<ActionId>, Vec<(ActionId, usize)>> = BTreeMap::new();
        for e in &self.edges[n] {
            groups
                .entry(e.adversary.clone())
                .or_default()
                .push((e.own, e.target));
        }
        groups.into_iter().collect()
    }

    /// Plain successor lists (deduplicated, ascending).
    pub fn successors(&self) -> Vec<Vec<usize>> {
        self.edges
            .iter()
            .map(|es| {
                let mut ts: Vec<usize> = es.iter().map(|e| e.target).collect();
                ts.sort_unstable();
                ts.dedup();
                ts
            })
            .collect()
    }
}

/// Probability of the cylinder of the finite history `h` under the profile.
pub fn cylinder_probability(
    arena: &Arena,
    profile: &[MooreStrategy],
    h: &[StateId],
) -> Result<Rat> {
    if profile.len() != arena.num_players() {
        return Err(GameError::Invalid("one strategy per player required".into()));
    }
    for (p, strat) in profile.iter().enumerate() {
        if strat.player() != Player(p) {
            return Err(GameError::Invalid(format!(
                "strategy at position {} belongs to player {}",
                p + 1,
                strat.player().0 + 1
            )));
        }
    }
    if h.first() != Some(&arena.init()) {
        return Err(GameError::Invalid("history does not start at the initial state".into()));
    }
    let mut memories: Vec<usize> = profile.iter().map(|s| s.init_memory()).collect();
    let mut prob = rat::one();
    for w in h.windows(2) {
        let (s, t) = (w[0], w[1]);
        let mut moves = Vec::with_capacity(profile.len());
        for (p, strat) in profile.iter().enumerate() {
            let mv = strat.move_at(memories[p], s).ok_or_else(|| {
                GameError::Invalid(format!(
                    "player-{} strategy undefined at state `{}`",
                    p + 1,
                    arena.state_name(s)
                ))
            })?;
            moves.push(mv.clone());
        }
        let dist = step_distribution(arena, s, &moves)?;
        match dist.get(&t) {
            Some(w) if !w.is_zero() => prob *= w,
            _ => return Ok(rat::zero()),
        }
        for (p, strat) in profile.iter().enumerate() {
            memories[p] = strat.next_memory(memories[p], s);
        }
    }
    Ok(prob)
}

/// Samples one run of `steps` steps; reproducible for a fixed seed.
pub fn simulate_run(
    arena: &Arena,
    profile: &[MooreStrategy],
    steps: usize,
    seed: u64,
) -> Result<Vec<StateId>> {
    if profile.len() != arena.num_players() {
        return Err(GameError::Invalid("one strategy per player required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut memories: Vec<usize> = profile.iter().map(|s| s.init_memory()).collect();
    let mut run = vec![arena.init()];
    for _ in 0..steps {
        let s = *run.last().unwrap();
        let mut tuple = Vec::with_capacity(profile.len());
        for (p, strat) in profile.iter().enumerate() {
            let mv = strat.move_at(memories[p], s).ok_or_else(|| {
                GameError::Invalid(format!(
                    "player-{} strategy undefined at state `{}`",
                    p + 1,
                    arena.state_name(s)
                ))
            })?;
            mv.validate_at(arena, Player(p), s)?;
            tuple.push(sample_move(mv, &mut rng));
            memories[p] = strat.next_memory(memories[p], s);
        }
        run.push(arena.successor(s, &tuple));
    }
    Ok(run)
}

fn sample_move(mv: &MixedMove, rng: &mut ChaCha8Rng) -> ActionId {
    // Exact inverse-CDF sampling: r is uniform over {k / 2^64}.
    let r = Rat::new(rng.next_u64().into(), num::BigInt::from(1u128 << 64));
    let mut acc = rat::zero();
    let mut last = None;
    for (a, w) in mv.weights() {
        acc += w;
        last = Some(*a);
        if r < acc {
            return *a;
        }
    }
    last.expect("nonempty support")
}
