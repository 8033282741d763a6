//! Per-critter behavior traces. Tests never change a critter, so what a
//! critter looks like at every tile or lap is fixed before any test runs.

use std::collections::BTreeMap;

use super::EngineError;
use crate::blocklang::{exec_behavior, Color, CritterState, Effect, ExecEnv, Program, Value, ROUNDS_COUNT};
use crate::levels::Level;

/// State after a step's code ran, with the effects that got it there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub state: CritterState,
    pub effects: Vec<Effect>,
}

/// Base level: entry 0 is the state after initialization at the village,
/// entry `i` the state after the per-tile code on path tile `i`.
pub fn base_trace(level: &Level, program: &Program, appearance: &BTreeMap<String, Color>) -> Result<Vec<Step>, EngineError> {
    let Program::Critter { init, on_tile } = program else {
        return Err(EngineError::MalformedProgram("base levels need critter code".into()));
    };
    let env = ExecEnv::new(&level.schema);
    let start = CritterState::initial(&level.schema, appearance);
    let (state, effects) = exec_behavior(init, &start, None, &env)?;
    let mut steps = vec![Step { state, effects }];
    for pos in level.board.path.iter().skip(1) {
        let terrain = level.board.terrain(*pos);
        let prev = &steps.last().expect("trace starts non-empty").state;
        let (state, effects) = exec_behavior(on_tile, prev, terrain, &env)?;
        steps.push(Step { state, effects });
    }
    Ok(steps)
}

/// Loop level: entry `k - 1` is the collector's state during lap `k`, after
/// `roundsCount` was set to `k` and the lap body ran. This is what every
/// signpost sees on that lap.
pub fn loop_trace(level: &Level, program: &Program, appearance: &BTreeMap<String, Color>) -> Result<Vec<Step>, EngineError> {
    let (laps, body) = program
        .recipe_loop()
        .ok_or_else(|| EngineError::MalformedProgram("a recipe needs exactly one repeat block".into()))?;
    let env = ExecEnv::new(&level.schema);
    let mut state = CritterState::initial(&level.schema, appearance);
    let mut steps = Vec::with_capacity(laps as usize);
    for lap in 1..=laps {
        state.set(ROUNDS_COUNT, Value::Count(lap))?;
        let (next, mut effects) = exec_behavior(body, &state, None, &env)?;
        effects.insert(0, Effect::AttrChange { name: ROUNDS_COUNT.to_string(), value: Value::Count(lap) });
        state = next;
        steps.push(Step { state: state.clone(), effects });
    }
    Ok(steps)
}
