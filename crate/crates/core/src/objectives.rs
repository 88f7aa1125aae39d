//! Winning conditions, their normalisation to state-determined form, and
//! evaluation on ultimately-periodic runs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::arena::{ActionId, Arena, ArenaBuilder, MixedMove, MooreStrategy, Player, StateId};
use crate::error::{GameError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Semantics {
    #[serde(rename = "sure")]
    Sure,
    #[serde(rename = "almost-sure")]
    AlmostSure,
}

impl Semantics {
    pub fn label(self) -> &'static str {
        match self {
            Semantics::Sure => "sure",
            Semantics::AlmostSure => "almost-sure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Never visit a bad state.
    Safety(BTreeSet<StateId>),
    /// Eventually visit a target state.
    Reachability(BTreeSet<StateId>),
    /// Visit an accepting state infinitely often.
    Buchi(BTreeSet<StateId>),
}

impl ObjectiveKind {
    pub fn label(&self) -> &'static str {
        match self {
            ObjectiveKind::Safety(_) => "safety",
            ObjectiveKind::Reachability(_) => "reach",
            ObjectiveKind::Buchi(_) => "buchi",
        }
    }

    pub fn states(&self) -> &BTreeSet<StateId> {
        match self {
            ObjectiveKind::Safety(s) | ObjectiveKind::Reachability(s) | ObjectiveKind::Buchi(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub owner: Player,
    pub kind: ObjectiveKind,
}

/// True iff every joint transition from every state of `set` stays in `set`.
pub fn is_absorbing(arena: &Arena, set: &BTreeSet<StateId>) -> bool {
    set.iter().all(|&s| {
        arena
            .joint_profiles(s)
            .iter()
            .all(|profile| set.contains(&arena.successor(s, profile)))
    })
}

/// Evaluates the run `prefix · cycle^ω` against an objective.
pub fn eval_lasso(objective: &Objective, prefix: &[StateId], cycle: &[StateId]) -> Result<bool> {
    if cycle.is_empty() {
        return Err(GameError::Invalid("lasso cycle must be nonempty".into()));
    }
    let seen = |set: &BTreeSet<StateId>, states: &[StateId]| states.iter().any(|s| set.contains(s));
    Ok(match &objective.kind {
        ObjectiveKind::Safety(bad) => !seen(bad, prefix) && !seen(bad, cycle),
        ObjectiveKind::Reachability(target) => seen(target, prefix) || seen(target, cycle),
        ObjectiveKind::Buchi(acc) => seen(acc, cycle),
    })
}

/// Arena with all objectives rewritten to state-determined form.
///
/// Non-absorbing reachability targets and non-trap safety regions are tracked
/// by monotone bits; states of the normalised arena are pairs (original
/// state, bit vector) and objectives refer to bit-defined sets, which are
/// absorbing/trap by construction.  When no bit is needed the arena is
/// returned unchanged (identity mapping).
#[derive(Debug, Clone)]
pub struct Normalized {
    arena: Arena,
    objectives: Vec<Objective>,
    original: Arena,
    to_original: Vec<StateId>,
    action_to_original: Vec<ActionId>,
    /// Tracked sets: `(owning player, watched original states)` per bit.
    tracked: Vec<(Player, BTreeSet<StateId>)>,
    bits: Vec<Vec<bool>>,
    reachable: Vec<bool>,
    display: Vec<String>,
}

impl Normalized {
    pub fn normalize(arena: &Arena, objectives: &[Objective]) -> Result<Normalized> {
        if objectives.len() != arena.num_players() {
            return Err(GameError::Invalid("one objective per player required".into()));
        }
        for (p, obj) in objectives.iter().enumerate() {
            if obj.owner != Player(p) {
                return Err(GameError::Invalid("objectives must be listed in player order".into()));
            }
            for &s in obj.kind.states() {
                if s.0 >= arena.num_states() {
                    return Err(GameError::Invalid("objective references unknown state".into()));
                }
            }
        }

        let mut tracked: Vec<(Player, BTreeSet<StateId>)> = Vec::new();
        for obj in objectives {
            match &obj.kind {
                ObjectiveKind::Reachability(target) if !is_absorbing(arena, target) => {
                    tracked.push((obj.owner, target.clone()));
                }
                ObjectiveKind::Safety(bad) if !is_absorbing(arena, bad) => {
                    tracked.push((obj.owner, bad.clone()));
                }
                _ => {}
            }
        }
        let k = tracked.len();
        if k > 16 {
            return Err(GameError::Budget("more than 16 tracked objective bits".into()));
        }

        let hits = |s: StateId| -> usize {
            tracked
                .iter()
                .enumerate()
                .filter(|(_, (_, set))| set.contains(&s))
                .fold(0usize, |m, (i, _)| m | (1 << i))
        };

        let copies = 1usize << k;
        let mut b = ArenaBuilder::new(arena.num_players());
        let mut to_original = Vec::with_capacity(arena.num_states() * copies);
        let mut bits = Vec::with_capacity(arena.num_states() * copies);
        for s in arena.states() {
            for mask in 0..copies {
                let name = if k == 0 {
                    arena.state_name(s).to_string()
                } else {
                    let bit_str: String = (0..k)
                        .map(|i| if mask & (1 << i) != 0 { '1' } else { '0' })
                        .collect();
                    format!("{}[{}]", arena.state_name(s), bit_str)
                };
                b.add_state(&name)?;
                to_original.push(s);
                bits.push((0..k).map(|i| mask & (1 << i) != 0).collect::<Vec<bool>>());
            }
        }
        let ns_of = |s: StateId, mask: usize| StateId(s.0 * copies + mask);
        b.set_init(ns_of(arena.init(), hits(arena.init())));

        // Mirror actions; normalised action ids follow (state copy, player,
        // original file order).
        let mut action_to_original = Vec::new();
        let mut action_map: BTreeMap<(usize, usize), ActionId> = BTreeMap::new();
        for s in arena.states() {
            for mask in 0..copies {
                let ns = ns_of(s, mask);
                for p in arena.players() {
                    for &a in arena.actions_at(s, p) {
                        let name = if k == 0 {
                            arena.action_name(a).to_string()
                        } else {
                            format!("{}@{}", arena.action_name(a), mask)
                        };
                        let na = b.add_action(p, ns, &name)?;
                        debug_assert_eq!(na.0, action_to_original.len());
                        action_to_original.push(a);
                        action_map.insert((ns.0, a.0), na);
                    }
                }
            }
        }
        for s in arena.states() {
            for mask in 0..copies {
                let ns = ns_of(s, mask);
                for profile in arena.joint_profiles(s) {
                    let t = arena.successor(s, &profile);
                    let nt = ns_of(t, mask | hits(t));
                    let nprofile: Vec<ActionId> = profile
                        .iter()
                        .map(|a| action_map[&(ns.0, a.0)])
                        .collect();
                    b.add_transition(ns, &nprofile, nt)?;
                }
            }
        }
        let narena = b.build()?;

        // Rewrite objectives over normalised states.
        let mut bit_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut next_bit = 0usize;
        for (p, obj) in objectives.iter().enumerate() {
            let needs = matches!(
                (&obj.kind, is_absorbing(arena, obj.kind.states())),
                (ObjectiveKind::Reachability(_), false) | (ObjectiveKind::Safety(_), false)
            );
            if needs {
                bit_of.insert(p, next_bit);
                next_bit += 1;
            }
        }
        let lift_plain = |set: &BTreeSet<StateId>| -> BTreeSet<StateId> {
            narena
                .states()
                .filter(|ns| set.contains(&to_original[ns.0]))
                .collect()
        };
        let bit_set = |bit: usize| -> BTreeSet<StateId> {
            narena.states().filter(|ns| bits[ns.0][bit]).collect()
        };
        let nobjectives: Vec<Objective> = objectives
            .iter()
            .enumerate()
            .map(|(p, obj)| {
                let kind = match (&obj.kind, bit_of.get(&p)) {
                    (ObjectiveKind::Reachability(_), Some(&bit)) => {
                        ObjectiveKind::Reachability(bit_set(bit))
                    }
                    (ObjectiveKind::Safety(_), Some(&bit)) => ObjectiveKind::Safety(bit_set(bit)),
                    (ObjectiveKind::Reachability(t), None) => {
                        ObjectiveKind::Reachability(lift_plain(t))
                    }
                    (ObjectiveKind::Safety(bad), None) => ObjectiveKind::Safety(lift_plain(bad)),
                    (ObjectiveKind::Buchi(acc), _) => ObjectiveKind::Buchi(lift_plain(acc)),
                };
                Objective {
                    owner: obj.owner,
                    kind,
                }
            })
            .collect();

        // Reachability (any joint play) from the initial state, for display.
        let mut reachable = vec![false; narena.num_states()];
        let mut queue = VecDeque::from([narena.init()]);
        reachable[narena.init().0] = true;
        while let Some(s) = queue.pop_front() {
            for profile in narena.joint_profiles(s) {
                let t = narena.successor(s, &profile);
                if !reachable[t.0] {
                    reachable[t.0] = true;
                    queue.push_back(t);
                }
            }
        }
        // Display name: original name when this is the unique reachable copy,
        // else the bit-qualified internal name.
        let mut reach_count = vec![0usize; arena.num_states()];
        for ns in narena.states() {
            if reachable[ns.0] {
                reach_count[to_original[ns.0].0] += 1;
            }
        }
        let display: Vec<String> = narena
            .states()
            .map(|ns| {
                let orig = to_original[ns.0];
                if reachable[ns.0] && reach_count[orig.0] == 1 {
                    arena.state_name(orig).to_string()
                } else {
                    narena.state_name(ns).to_string()
                }
            })
            .collect();

        Ok(Normalized {
            arena: narena,
            objectives: nobjectives,
            original: arena.clone(),
            to_original,
            action_to_original,
            tracked,
            bits,
            reachable,
            display,
        })
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn original(&self) -> &Arena {
        &self.original
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn objective(&self, p: Player) -> &Objective {
        &self.objectives[p.0]
    }

    pub fn to_original(&self, ns: StateId) -> StateId {
        self.to_original[ns.0]
    }

    pub fn num_bits(&self) -> usize {
        self.tracked.len()
    }

    /// Tracked-bit vector of a normalised state, one flag per tracked set.
    pub fn bits_of(&self, ns: StateId) -> &[bool] {
        &self.bits[ns.0]
    }

    /// Identity normalisation: no tracked bits, state names unchanged.
    pub fn is_identity(&self) -> bool {
        self.tracked.is_empty()
    }

    pub fn is_reachable(&self, ns: StateId) -> bool {
        self.reachable[ns.0]
    }

    pub fn display_name(&self, ns: StateId) -> &str {
        &self.display[ns.0]
    }

    pub fn display_action(&self, na: ActionId) -> &str {
        self.original.action_name(self.action_to_original[na.0])
    }

    pub fn original_action(&self, na: ActionId) -> ActionId {
        self.action_to_original[na.0]
    }

    /// Projects a normalised run back to original states.
    pub fn project_run(&self, run: &[StateId]) -> Vec<StateId> {
        run.iter().map(|&ns| self.to_original[ns.0]).collect()
    }

    /// Lifts a strategy written against the original arena (observing
    /// original states) to the normalised arena.
    pub fn lift_strategy(&self, strat: &MooreStrategy) -> Result<MooreStrategy> {
        let p = strat.player();
        if p.0 >= self.original.num_players() {
            return Err(GameError::Invalid("strategy player out of range".into()));
        }
        let mut lifted = MooreStrategy::new(
            p,
            (0..strat.num_memories())
                .map(|m| strat.memory_name(m).to_string())
                .collect(),
            strat.init_memory(),
        );
        for ns in self.arena.states() {
            let orig = self.to_original[ns.0];
            for m in 0..strat.num_memories() {
                if let Some(mv) = strat.move_at(m, orig) {
                    let mut weights = BTreeMap::new();
                    for (&a, w) in mv.weights() {
                        let info = self.original.action(a);
                        let na = self
                            .arena
                            .actions_at(ns, p)
                            .iter()
                            .copied()
                            .find(|&na| self.action_to_original[na.0] == a)
                            .ok_or_else(|| {
                                GameError::Invalid(format!(
                                    "action `{}` unavailable at `{}`",
                                    info.name,
                                    self.arena.state_name(ns)
                                ))
                            })?;
                        weights.insert(na, w.clone());
                    }
                    lifted.set_output(m, ns, MixedMove::from_weights(weights)?);
                }
                let next = strat.next_memory(m, orig);
                if next != m {
                    lifted.set_update(m, ns, next);
                }
            }
        }
        Ok(lifted)
    }
}
