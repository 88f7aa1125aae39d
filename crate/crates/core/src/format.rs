//! Text format for game files and JSON (de)serialisation of strategies.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::arena::{ActionId, Arena, ArenaBuilder, MixedMove, MooreStrategy, Player, StateId};
use crate::error::{GameError, Result};
use crate::objectives::{Objective, ObjectiveKind};
use crate::rat;

/// A parsed game file: validated arena plus one objective per player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSpec {
    pub arena: Arena,
    pub objectives: Vec<Objective>,
}

fn perr(line: usize, message: impl Into<String>) -> GameError {
    GameError::Parse {
        line,
        message: message.into(),
    }
}

/// Parses the line-oriented game format (see `fixtures/running.game`).
pub fn parse_game(text: &str) -> Result<GameSpec> {
    let mut players: Option<usize> = None;
    let mut objectives: BTreeMap<usize, (usize, ObjectiveKind, Vec<String>)> = BTreeMap::new();
    let mut pending_actions: Vec<(usize, usize, String, Vec<String>)> = Vec::new();
    let mut pending_trans: Vec<(usize, String, Vec<String>, String)> = Vec::new();
    let mut states_line: Option<(usize, Vec<String>)> = None;
    let mut init_line: Option<(usize, String)> = None;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap();
        let rest: Vec<String> = words.map(str::to_string).collect();
        match head {
            "players" => {
                let n: usize = rest
                    .first()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| perr(ln, "expected `players <count>`"))?;
                if n == 0 {
                    return Err(perr(ln, "player count must be at least 1"));
                }
                players = Some(n);
            }
            "states" => {
                if rest.is_empty() {
                    return Err(perr(ln, "expected `states <name>...`"));
                }
                states_line = Some((ln, rest));
            }
            "init" => {
                let name = rest
                    .first()
                    .cloned()
                    .ok_or_else(|| perr(ln, "expected `init <state>`"))?;
                init_line = Some((ln, name));
            }
            "actions" => {
                // actions <player> <state> : <name>...
                let colon = rest
                    .iter()
                    .position(|w| w == ":")
                    .ok_or_else(|| perr(ln, "expected `actions <player> <state> : <name>...`"))?;
                if colon != 2 || rest.len() == 3 {
                    return Err(perr(ln, "expected `actions <player> <state> : <name>...`"));
                }
                let p: usize = rest[0]
                    .parse()
                    .ok()
                    .filter(|&p| p >= 1)
                    .ok_or_else(|| perr(ln, "player index must be a positive integer"))?;
                pending_actions.push((ln, p - 1, rest[1].clone(), rest[3..].to_vec()));
            }
            "trans" => {
                // trans <state> <action-per-player>... -> <target>
                let arrow = rest
                    .iter()
                    .position(|w| w == "->")
                    .ok_or_else(|| perr(ln, "expected `trans <state> <actions>... -> <target>`"))?;
                if arrow < 2 || arrow + 2 != rest.len() {
                    return Err(perr(ln, "expected `trans <state> <actions>... -> <target>`"));
                }
                pending_trans.push((
                    ln,
                    rest[0].clone(),
                    rest[1..arrow].to_vec(),
                    rest[arrow + 1].clone(),
                ));
            }
            "objective" => {
                let p: usize = rest
                    .first()
                    .and_then(|w| w.parse().ok())
                    .filter(|&p: &usize| p >= 1)
                    .ok_or_else(|| perr(ln, "expected `objective <player> <kind> ...`"))?;
                let (kind, states) = match rest.get(1).map(String::as_str) {
                    Some("reach") => (ObjectiveKind::Reachability(BTreeSet::new()), rest[2..].to_vec()),
                    Some("safety") => {
                        if rest.get(2).map(String::as_str) != Some("avoid") {
                            return Err(perr(ln, "expected `objective <player> safety avoid <states>`"));
                        }
                        (ObjectiveKind::Safety(BTreeSet::new()), rest[3..].to_vec())
                    }
                    Some("buchi") => (ObjectiveKind::Buchi(BTreeSet::new()), rest[2..].to_vec()),
                    _ => return Err(perr(ln, "objective kind must be `reach`, `safety avoid` or `buchi`")),
                };
                if states.is_empty() {
                    return Err(perr(ln, "objective lists no states"));
                }
                if objectives.insert(p - 1, (ln, kind, states)).is_some() {
                    return Err(perr(ln, format!("duplicate objective for player {p}")));
                }
            }
            _ => return Err(perr(ln, format!("unknown directive `{head}`"))),
        }
    }

    let players = players.ok_or_else(|| perr(0, "missing `players` line"))?;
    let mut b = ArenaBuilder::new(players);
    let (sl, state_names) = states_line.ok_or_else(|| perr(0, "missing `states` line"))?;
    for name in &state_names {
        b.add_state(name).map_err(|e| perr(sl, e.to_string()))?;
    }
    let (il, init_name) = init_line.ok_or_else(|| perr(0, "missing `init` line"))?;
    let init = b
        .state(&init_name)
        .ok_or_else(|| perr(il, format!("unknown state `{init_name}`")))?;
    b.set_init(init);

    for (ln, p, state, names) in pending_actions {
        if p >= players {
            return Err(perr(ln, format!("player {} out of range", p + 1)));
        }
        let s = b
            .state(&state)
            .ok_or_else(|| perr(ln, format!("unknown state `{state}`")))?;
        for name in names {
            b.add_action(Player(p), s, &name)
                .map_err(|e| perr(ln, e.to_string()))?;
        }
    }

    // Actions need a finished alphabet before transitions can be resolved, so
    // resolve names against a snapshot of the per-state tables.
    let lookup = |b: &ArenaBuilder, ln: usize, s: StateId, state: &str, names: &[String]| -> Result<Vec<ActionId>> {
        if names.len() != players {
            return Err(perr(ln, format!("expected {} actions, got {}", players, names.len())));
        }
        let mut profile = Vec::with_capacity(players);
        for (p, name) in names.iter().enumerate() {
            let a = b.action_at(s, Player(p), name).ok_or_else(|| {
                perr(
                    ln,
                    format!("`{name}` is not a player-{} action at `{state}`", p + 1),
                )
            })?;
            profile.push(a);
        }
        Ok(profile)
    };
    for (ln, state, names, target) in pending_trans {
        let s = b
            .state(&state)
            .ok_or_else(|| perr(ln, format!("unknown state `{state}`")))?;
        let t = b
            .state(&target)
            .ok_or_else(|| perr(ln, format!("unknown state `{target}`")))?;
        let profile = lookup(&b, ln, s, &state, &names)?;
        b.add_transition(s, &profile, t)
            .map_err(|e| perr(ln, e.to_string()))?;
    }

    let arena = b.build().map_err(|e| match e {
        GameError::Validation(m) => perr(0, m),
        e => e,
    })?;

    let mut out = Vec::with_capacity(players);
    for p in 0..players {
        let (ln, kind, names) = objectives
            .remove(&p)
            .ok_or_else(|| perr(0, format!("missing objective for player {}", p + 1)))?;
        let mut set = BTreeSet::new();
        for name in &names {
            let s = arena
                .state_by_name(name)
                .ok_or_else(|| perr(ln, format!("unknown state `{name}`")))?;
            set.insert(s);
        }
        let kind = match kind {
            ObjectiveKind::Safety(_) => ObjectiveKind::Safety(set),
            ObjectiveKind::Reachability(_) => ObjectiveKind::Reachability(set),
            ObjectiveKind::Buchi(_) => ObjectiveKind::Buchi(set),
        };
        out.push(Objective {
            owner: Player(p),
            kind,
        });
    }
    if let Some((&p, _)) = objectives.iter().next() {
        return Err(perr(0, format!("objective given for nonexistent player {}", p + 1)));
    }
    Ok(GameSpec {
        arena,
        objectives: out,
    })
}

/// Serialises a game back to the text format; `parse(write(g)) == g`.
pub fn write_game(spec: &GameSpec) -> String {
    let arena = &spec.arena;
    let mut out = String::new();
    out.push_str(&format!("players {}\n", arena.num_players()));
    let names: Vec<&str> = arena.states().map(|s| arena.state_name(s)).collect();
    out.push_str(&format!("states {}\n", names.join(" ")));
    out.push_str(&format!("init {}\n", arena.state_name(arena.init())));
    for s in arena.states() {
        for p in arena.players() {
            let acts: Vec<&str> = arena
                .actions_at(s, p)
                .iter()
                .map(|&a| arena.action_name(a))
                .collect();
            out.push_str(&format!(
                "actions {} {} : {}\n",
                p.0 + 1,
                arena.state_name(s),
                acts.join(" ")
            ));
        }
    }
    for s in arena.states() {
        for profile in arena.joint_profiles(s) {
            let acts: Vec<&str> = profile.iter().map(|&a| arena.action_name(a)).collect();
            out.push_str(&format!(
                "trans {} {} -> {}\n",
                arena.state_name(s),
                acts.join(" "),
                arena.state_name(arena.successor(s, &profile))
            ));
        }
    }
    for obj in &spec.objectives {
        let (kind, set) = match &obj.kind {
            ObjectiveKind::Safety(set) => ("safety avoid", set),
            ObjectiveKind::Reachability(set) => ("reach", set),
            ObjectiveKind::Buchi(set) => ("buchi", set),
        };
        let names: Vec<&str> = set.iter().map(|&s| arena.state_name(s)).collect();
        out.push_str(&format!(
            "objective {} {} {}\n",
            obj.owner.0 + 1,
            kind,
            names.join(" ")
        ));
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct StrategyDoc {
    player: usize,
    memory: Vec<String>,
    init: String,
    output: Vec<OutputRow>,
    #[serde(default)]
    update: Vec<UpdateRow>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OutputRow {
    memory: String,
    state: String,
    #[serde(rename = "move")]
    mv: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct UpdateRow {
    memory: String,
    state: String,
    next: String,
}

/// Reads a strategy JSON document resolved against `arena`.
pub fn parse_strategy(text: &str, arena: &Arena) -> Result<MooreStrategy> {
    let doc: StrategyDoc = serde_json::from_str(text)?;
    if doc.player < 1 || doc.player > arena.num_players() {
        return Err(GameError::Invalid(format!(
            "strategy player {} out of range",
            doc.player
        )));
    }
    let player = Player(doc.player - 1);
    if doc.memory.is_empty() {
        return Err(GameError::Invalid("strategy has no memory states".into()));
    }
    let init = doc
        .memory
        .iter()
        .position(|m| *m == doc.init)
        .ok_or_else(|| GameError::Invalid(format!("unknown initial memory `{}`", doc.init)))?;
    let mut strat = MooreStrategy::new(player, doc.memory.clone(), init);
    let mem = |name: &str| {
        doc.memory
            .iter()
            .position(|m| m == name)
            .ok_or_else(|| GameError::Invalid(format!("unknown memory `{name}`")))
    };
    for row in &doc.output {
        let m = mem(&row.memory)?;
        let s = arena
            .state_by_name(&row.state)
            .ok_or_else(|| GameError::Invalid(format!("unknown state `{}`", row.state)))?;
        let mut weights = BTreeMap::new();
        for (action, weight) in &row.mv {
            let a = arena.action_by_name(s, player, action).ok_or_else(|| {
                GameError::Invalid(format!(
                    "`{action}` is not a player-{} action at `{}`",
                    doc.player, row.state
                ))
            })?;
            weights.insert(a, rat::parse(weight)?);
        }
        strat.set_output(m, s, MixedMove::from_weights(weights)?);
    }
    for row in &doc.update {
        let m = mem(&row.memory)?;
        let next = mem(&row.next)?;
        let s = arena
            .state_by_name(&row.state)
            .ok_or_else(|| GameError::Invalid(format!("unknown state `{}`", row.state)))?;
        strat.set_update(m, s, next);
    }
    Ok(strat)
}

/// Writes a strategy as JSON; `namer` supplies the reported state names (use
/// [`state_namer`] for plain arenas).
pub fn write_strategy_with(
    strategy: &MooreStrategy,
    namer: &dyn Fn(StateId) -> String,
    action_namer: &dyn Fn(ActionId) -> String,
) -> String {
    let doc = StrategyDoc {
        player: strategy.player().0 + 1,
        memory: (0..strategy.num_memories())
            .map(|m| strategy.memory_name(m).to_string())
            .collect(),
        init: strategy.memory_name(strategy.init_memory()).to_string(),
        output: strategy
            .output_rows()
            .map(|(m, s, mv)| OutputRow {
                memory: strategy.memory_name(m).to_string(),
                state: namer(s),
                mv: mv
                    .weights()
                    .iter()
                    .map(|(&a, w)| (action_namer(a), rat::format(w)))
                    .collect(),
            })
            .collect(),
        update: strategy
            .update_rows()
            .filter(|&(m, _, n)| m != n)
            .map(|(m, s, n)| UpdateRow {
                memory: strategy.memory_name(m).to_string(),
                state: namer(s),
                next: strategy.memory_name(n).to_string(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("strategy serialisation cannot fail")
}

pub fn write_strategy(strategy: &MooreStrategy, arena: &Arena) -> String {
    write_strategy_with(
        strategy,
        &|s| arena.state_name(s).to_string(),
        &|a| arena.action_name(a).to_string(),
    )
}
