//! The agent's daily control loop: round-robin strategy scheduling with
//! progressive tick budgets, the five-callback strategy interface, the
//! reflexive food bypass, and path-integration localization.
//!
//! One agent owns an ordered list of strategies. Exactly one strategy is
//! active per tick; the active strategy's `select_action` picks the move,
//! while the four optional callbacks (`new_day`, `pre_action`, `post_action`,
//! `upon_reward`) fire on every strategy so that memory-based strategies can
//! keep learning while inactive.

use crate::grid::{Action, CellState, Environment, NoiseParams, Position, SenseData};
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("all strategies failed on day {day}, tick {tick}")]
    AllStrategiesFailed { day: u32, tick: u32 },
}

/// Dead-reckoning location estimate, relative to home = (0, 0). Maintained
/// by summing intended displacements; diverges from the true relative
/// position under motion noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LocationEstimate {
    pub x: i32,
    pub y: i32,
}

impl LocationEstimate {
    pub fn new(x: i32, y: i32) -> Self {
        LocationEstimate { x, y }
    }

    /// Path-integration update for an intended (and legal-at-selection)
    /// action: Right/Left step x by +/-1, Down/Up step y by +/-1. The update
    /// always uses the intended action, never the unobservable noisy outcome.
    pub fn integrate(self, action: Action) -> Self {
        let (dx, dy) = action.delta();
        LocationEstimate { x: self.x + dx, y: self.y + dy }
    }

    pub fn to_absolute(self, home: Position) -> Position {
        Position::new(self.x + home.x, self.y + home.y)
    }

    pub fn from_absolute(p: Position, home: Position) -> Self {
        LocationEstimate { x: p.x - home.x, y: p.y - home.y }
    }

    pub fn manhattan(self, other: LocationEstimate) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

/// Complete world state, consulted only by the oracle reference strategy.
#[derive(Clone, Copy)]
pub struct Truth<'a> {
    pub env: &'a Environment,
    pub position: Position,
}

/// The common information the agent hands to every strategy callback.
/// Identical data is passed to all strategies within a tick; during
/// `post_action` and `upon_reward`, `last_executed_action` refers to the
/// action selected this tick, otherwise to the previous tick's.
#[derive(Clone, Copy)]
pub struct Context<'a> {
    pub day: u32,
    pub tick: u32,
    pub estimate: LocationEstimate,
    pub sense: SenseData,
    pub last_executed_action: Option<Action>,
    pub last_action_was_bypass: bool,
    /// Ticks left in the active slot's budget; `None` when unlimited.
    pub remaining_budget: Option<u32>,
    /// Ticks left before the day's step cap.
    pub remaining_day_steps: u32,
    /// True on days after a configured freeze: strategies must not update
    /// episodic stores, predictors, or path recordings, but keep selecting.
    pub memory_frozen: bool,
    pub truth: Truth<'a>,
}

/// Per-cell belief snapshot exposed by map-building strategies for
/// inspection and rendering.
#[derive(Debug, Clone, Copy)]
pub struct BeliefCell {
    pub estimate: LocationEstimate,
    pub barrier_prob: f64,
    pub food_prob: f64,
}

/// The behavioral contract every strategy implements. `select_action` is
/// mandatory and invoked only on the active strategy; returning `None`
/// signals failure and advances the scheduler. The other callbacks are
/// optional and broadcast to all strategies.
pub trait Strategy {
    fn name(&self) -> &'static str;

    fn select_action(&mut self, ctx: &Context, rng: &mut dyn RngCore) -> Option<Action>;

    fn new_day(&mut self, _ctx: &Context) {}
    fn pre_action(&mut self, _ctx: &Context) {}
    fn post_action(&mut self, _ctx: &Context) {}
    fn upon_reward(&mut self, _ctx: &Context) {}

    /// Called whenever the scheduler makes this strategy active, including
    /// at day start. Planning strategies re-plan on reactivation.
    fn on_activated(&mut self, _ctx: &Context) {}

    /// Planning sessions run so far today (map strategies only).
    fn plannings_today(&self) -> u32 {
        0
    }

    /// Retained episodic memory entries (map strategies only).
    fn episodic_memory_len(&self) -> usize {
        0
    }

    /// Distinct cells in today's visit counts (exploration strategies only).
    fn visited_cells(&self) -> usize {
        0
    }

    /// Day-start food candidates recorded so far: (day, [(estimate, prob)]).
    fn food_candidate_log(&self) -> Option<&[(u32, Vec<(LocationEstimate, f64)>)]> {
        None
    }

    /// Current per-cell beliefs for rendering.
    fn belief_snapshot(&self) -> Option<Vec<BeliefCell>> {
        None
    }
}

/// Reflexive override: if an adjacent cell holds food, step onto it and skip
/// the active strategy's selection this tick. Pre/post callbacks still run.
pub fn bypass_check(sense: &SenseData) -> Option<Action> {
    Action::ALL.into_iter().find(|&a| sense.adjacent(a) == CellState::Food)
}

/// Why the scheduler moved off the active strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvanceReason {
    /// The strategy returned no legal action.
    Failure,
    /// The strategy exhausted its current tick budget.
    TimesUp,
}

/// One strategy's seat in the round-robin order. An initial budget of 0
/// means unlimited: the slot only yields on failure.
#[derive(Debug, Clone)]
pub struct StrategySlot {
    pub initial_budget: u32,
    current_budget: u32,
    ticks_used: u32,
    activated_today: bool,
    activations_today: u32,
}

impl StrategySlot {
    fn new(initial_budget: u32) -> Self {
        StrategySlot {
            initial_budget,
            current_budget: initial_budget,
            ticks_used: 0,
            activated_today: false,
            activations_today: 0,
        }
    }

    pub fn current_budget(&self) -> u32 {
        self.current_budget
    }

    pub fn activations_today(&self) -> u32 {
        self.activations_today
    }
}

/// Round-robin scheduler over strategy slots. Budgets reset to their initial
/// values at day start; under progressive budgeting a slot's budget doubles
/// each time it is reactivated within the same day.
#[derive(Debug, Clone)]
pub struct Scheduler {
    slots: Vec<StrategySlot>,
    active: usize,
    progressive: bool,
}

impl Scheduler {
    pub fn new(initial_budgets: &[u32], progressive: bool) -> Self {
        assert!(!initial_budgets.is_empty());
        Scheduler {
            slots: initial_budgets.iter().map(|&b| StrategySlot::new(b)).collect(),
            active: 0,
            progressive,
        }
    }

    /// Resets all budgets and activation counters and activates slot 0.
    pub fn start_day(&mut self) {
        for slot in &mut self.slots {
            *slot = StrategySlot::new(slot.initial_budget);
        }
        self.active = 0;
        self.slots[0].activated_today = true;
        self.slots[0].activations_today = 1;
    }

    pub fn active_index(&self) -> usize {
        self.active
    }

    pub fn slots(&self) -> &[StrategySlot] {
        &self.slots
    }

    /// Ticks left in the active slot's budget; `None` when unlimited.
    pub fn remaining_budget(&self) -> Option<u32> {
        let slot = &self.slots[self.active];
        if slot.initial_budget == 0 {
            None
        } else {
            Some(slot.current_budget.saturating_sub(slot.ticks_used))
        }
    }

    pub fn times_up(&self) -> bool {
        let slot = &self.slots[self.active];
        slot.initial_budget > 0 && slot.ticks_used >= slot.current_budget
    }

    /// Charges one executed tick to the active slot.
    pub fn record_tick(&mut self) {
        self.slots[self.active].ticks_used += 1;
    }

    /// Advances cyclically to the next slot. On a reactivation within the
    /// same day, a budgeted slot's allotment doubles (progressive mode) or
    /// stays at its initial value (fixed mode). The reason does not change
    /// the mechanics; it exists for traces and failure accounting.
    pub fn advance(&mut self, _reason: AdvanceReason) -> usize {
        self.active = (self.active + 1) % self.slots.len();
        let slot = &mut self.slots[self.active];
        slot.ticks_used = 0;
        if slot.activated_today {
            if slot.initial_budget > 0 && self.progressive {
                slot.current_budget = slot.current_budget.saturating_mul(2);
            }
        } else {
            slot.current_budget = slot.initial_budget;
            slot.activated_today = true;
        }
        slot.activations_today += 1;
        self.active
    }
}

/// Per-day settings for the control loop.
#[derive(Debug, Clone, Copy)]
pub struct DayConfig {
    pub noise: NoiseParams,
    pub step_cap: u32,
    pub memory_frozen: bool,
}

impl Default for DayConfig {
    fn default() -> Self {
        DayConfig { noise: NoiseParams::NONE, step_cap: 200_000, memory_frozen: false }
    }
}

/// Outcome summary for one day.
#[derive(Debug, Clone)]
pub struct DayResult {
    /// Ticks until the true position reached the food (or the cap).
    pub steps: u32,
    /// Planning sessions across all strategies.
    pub plannings: u32,
    /// Per-slot activation counts, in strategy order.
    pub activations: Vec<u32>,
    /// True when the step cap ended the day before the food was reached.
    pub gave_up: bool,
}

/// One line of the optional per-tick trace.
#[derive(Debug, Clone)]
pub struct TickRecord {
    pub day: u32,
    pub tick: u32,
    pub strategy: &'static str,
    pub estimate: LocationEstimate,
    pub position: Position,
    pub action: Action,
    pub bypass: bool,
}

/// Mutable state of a day in progress; lives outside [`Agent`] so callers
/// can drive the loop one tick at a time.
#[derive(Debug, Clone)]
pub struct DayState {
    pub position: Position,
    pub estimate: LocationEstimate,
    pub tick: u32,
    pub steps: u32,
    prev_action: Option<Action>,
    prev_bypass: bool,
    outcome: Option<StepOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    Reached,
    Capped,
}

/// A composite agent: an ordered strategy list plus its scheduler. The
/// strategies' memories persist across days; the environment is handed in
/// per day.
pub struct Agent {
    strategies: Vec<Box<dyn Strategy>>,
    scheduler: Scheduler,
}

impl Agent {
    pub fn new(strategies: Vec<Box<dyn Strategy>>, initial_budgets: &[u32], progressive: bool) -> Self {
        assert_eq!(strategies.len(), initial_budgets.len());
        assert!(!strategies.is_empty());
        Agent { strategies, scheduler: Scheduler::new(initial_budgets, progressive) }
    }

    pub fn strategies(&self) -> &[Box<dyn Strategy>] {
        &self.strategies
    }

    pub fn scheduler(&self) -> &Scheduler {
        &self.scheduler
    }

    pub fn active_strategy_name(&self) -> &'static str {
        self.strategies[self.scheduler.active_index()].name()
    }

    fn context<'a>(
        &self,
        env: &'a Environment,
        cfg: &DayConfig,
        st: &DayState,
        sense: SenseData,
    ) -> Context<'a> {
        Context {
            day: env.day(),
            tick: st.tick,
            estimate: st.estimate,
            sense,
            last_executed_action: st.prev_action,
            last_action_was_bypass: st.prev_bypass,
            remaining_budget: self.scheduler.remaining_budget(),
            remaining_day_steps: cfg.step_cap.saturating_sub(st.steps),
            memory_frozen: cfg.memory_frozen,
            truth: Truth { env, position: st.position },
        }
    }

    /// Prepares a new day: resets position and estimate, restarts the
    /// scheduler, and invokes every strategy's `new_day`.
    pub fn begin_day(&mut self, env: &Environment, cfg: &DayConfig) -> DayState {
        let st = DayState {
            position: env.home(),
            estimate: LocationEstimate::default(),
            tick: 0,
            steps: 0,
            prev_action: None,
            prev_bypass: false,
            outcome: None,
        };
        self.scheduler.start_day();
        let ctx = self.context(env, cfg, &st, env.sense(st.position));
        for s in &mut self.strategies {
            s.new_day(&ctx);
        }
        self.strategies[self.scheduler.active_index()].on_activated(&ctx);
        st
    }

    /// Runs one tick of the daily loop: sense, broadcast `pre_action`,
    /// bypass check or scheduled selection, broadcast `post_action`, execute
    /// the action, and integrate the estimate. Fires `upon_reward` on every
    /// strategy when the food is reached; a capped day skips it.
    pub fn day_step(
        &mut self,
        env: &Environment,
        cfg: &DayConfig,
        st: &mut DayState,
        rng: &mut dyn RngCore,
        mut trace: Option<&mut dyn FnMut(&TickRecord)>,
    ) -> Result<StepOutcome, AgentError> {
        debug_assert!(st.outcome.is_none(), "day already over");
        let sense = env.sense(st.position);
        let mut ctx = self.context(env, cfg, st, sense);
        for s in &mut self.strategies {
            s.pre_action(&ctx);
        }

        let (action, bypass) = if let Some(a) = bypass_check(&sense) {
            (a, true)
        } else {
            let mut failures = 0usize;
            loop {
                if self.scheduler.times_up() {
                    let idx = self.scheduler.advance(AdvanceReason::TimesUp);
                    ctx.remaining_budget = self.scheduler.remaining_budget();
                    self.strategies[idx].on_activated(&ctx);
                }
                ctx.remaining_budget = self.scheduler.remaining_budget();
                let idx = self.scheduler.active_index();
                match self.strategies[idx].select_action(&ctx, rng) {
                    Some(a) if sense.legal.contains(a) => break (a, false),
                    // A failure, or an illegal action from a stale plan:
                    // the strategy yields without consuming a tick.
                    _ => {
                        failures += 1;
                        if failures >= self.strategies.len() {
                            return Err(AgentError::AllStrategiesFailed {
                                day: env.day(),
                                tick: st.tick,
                            });
                        }
                        let idx = self.scheduler.advance(AdvanceReason::Failure);
                        ctx.remaining_budget = self.scheduler.remaining_budget();
                        self.strategies[idx].on_activated(&ctx);
                    }
                }
            }
        };

        ctx.last_executed_action = Some(action);
        ctx.last_action_was_bypass = bypass;
        for s in &mut self.strategies {
            s.post_action(&ctx);
        }
        if let Some(t) = trace.as_mut() {
            t(&TickRecord {
                day: env.day(),
                tick: st.tick,
                strategy: self.strategies[self.scheduler.active_index()].name(),
                estimate: st.estimate,
                position: st.position,
                action,
                bypass,
            });
        }

        st.position = env.execute_action(st.position, action, cfg.noise, rng);
        st.estimate = st.estimate.integrate(action);
        st.prev_action = Some(action);
        st.prev_bypass = bypass;
        self.scheduler.record_tick();
        st.tick += 1;
        st.steps += 1;

        if st.position == env.food() {
            let sense = env.sense(st.position);
            let ctx = self.context(env, cfg, st, sense);
            for s in &mut self.strategies {
                s.upon_reward(&ctx);
            }
            st.outcome = Some(StepOutcome::Reached);
            return Ok(StepOutcome::Reached);
        }
        if st.steps >= cfg.step_cap {
            st.outcome = Some(StepOutcome::Capped);
            return Ok(StepOutcome::Capped);
        }
        Ok(StepOutcome::Continue)
    }

    /// Runs a whole day to completion (food reached or cap hit).
    pub fn run_day(
        &mut self,
        env: &Environment,
        cfg: &DayConfig,
        rng: &mut dyn RngCore,
        mut trace: Option<&mut dyn FnMut(&TickRecord)>,
    ) -> Result<DayResult, AgentError> {
        let mut st = self.begin_day(env, cfg);
        loop {
            match self.day_step(env, cfg, &mut st, rng, trace.as_deref_mut())? {
                StepOutcome::Continue => {}
                StepOutcome::Reached => return Ok(self.day_result(&st, false)),
                StepOutcome::Capped => return Ok(self.day_result(&st, true)),
            }
        }
    }

    pub fn day_result(&self, st: &DayState, gave_up: bool) -> DayResult {
        DayResult {
            steps: st.steps,
            plannings: self.strategies.iter().map(|s| s.plannings_today()).sum(),
            activations: self.scheduler.slots().iter().map(|s| s.activations_today()).collect(),
            gave_up,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::memoryless::{BiasedRandom, RandomWalk};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::cell::RefCell;
    use std::rc::Rc;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn integrate_matches_screen_convention() {
        let e = LocationEstimate::default();
        assert_eq!(e.integrate(Action::Left), LocationEstimate::new(-1, 0));
        assert_eq!(LocationEstimate::new(3, 2).integrate(Action::Right), LocationEstimate::new(4, 2));
        assert_eq!(e.integrate(Action::Up), LocationEstimate::new(0, -1));
        assert_eq!(e.integrate(Action::Down), LocationEstimate::new(0, 1));
    }

    #[test]
    fn scheduler_doubles_on_reactivation() {
        let mut s = Scheduler::new(&[5, 5], true);
        s.start_day();
        assert_eq!(s.slots()[0].current_budget(), 5);
        s.advance(AdvanceReason::TimesUp); // slot 1, first activation
        assert_eq!(s.slots()[1].current_budget(), 5);
        s.advance(AdvanceReason::TimesUp); // slot 0 again: doubled
        assert_eq!(s.slots()[0].current_budget(), 10);
        s.advance(AdvanceReason::TimesUp);
        s.advance(AdvanceReason::TimesUp); // slot 0 third activation
        assert_eq!(s.slots()[0].current_budget(), 20);
    }

    #[test]
    fn scheduler_fixed_mode_never_doubles() {
        let mut s = Scheduler::new(&[5, 5], false);
        s.start_day();
        for _ in 0..6 {
            s.advance(AdvanceReason::TimesUp);
        }
        assert_eq!(s.slots()[0].current_budget(), 5);
        assert_eq!(s.slots()[1].current_budget(), 5);
    }

    #[test]
    fn scheduler_unlimited_slot_never_times_up() {
        let mut s = Scheduler::new(&[0], true);
        s.start_day();
        for _ in 0..1000 {
            s.record_tick();
        }
        assert!(!s.times_up());
        assert_eq!(s.remaining_budget(), None);
    }

    #[test]
    fn scheduler_budgets_reset_at_day_start() {
        let mut s = Scheduler::new(&[5, 5], true);
        s.start_day();
        s.advance(AdvanceReason::TimesUp);
        s.advance(AdvanceReason::TimesUp);
        assert_eq!(s.slots()[0].current_budget(), 10);
        s.start_day();
        assert_eq!(s.slots()[0].current_budget(), 5);
        assert_eq!(s.active_index(), 0);
        assert_eq!(s.slots()[0].activations_today(), 1);
        assert_eq!(s.slots()[1].activations_today(), 0);
    }

    /// Strategy that always fails, for scheduler alternation checks.
    struct AlwaysFail;
    impl Strategy for AlwaysFail {
        fn name(&self) -> &'static str {
            "fail"
        }
        fn select_action(&mut self, _ctx: &Context, _rng: &mut dyn RngCore) -> Option<Action> {
            None
        }
    }

    #[test]
    fn failing_slot_alternates_and_partner_budget_ladders() {
        // Slot 0 fails immediately on every activation; slot 1 walks
        // randomly. Expect activation counts to interleave and slot 1's
        // budget to follow 5, 10, 20, ...
        let mut r = rng(30);
        let env = Environment::generate(
            9,
            0.0,
            Position::new(4, 4),
            Position::new(8, 8),
            &mut r,
        )
        .unwrap();
        let mut agent = Agent::new(
            vec![Box::new(AlwaysFail), Box::new(RandomWalk)],
            &[5, 5],
            true,
        );
        let res = agent
            .run_day(&env, &DayConfig::default(), &mut r, None)
            .unwrap();
        assert!(!res.gave_up);
        // Slot 1 is entered once per slot-0 failure; allowing the final
        // partial activation, counts differ by at most one.
        let diff = res.activations[0].abs_diff(res.activations[1]);
        assert!(diff <= 1, "activations {:?}", res.activations);
        assert!(res.activations[1] >= 2, "expected several reactivations");
        let expected_budget = 5 * (1 << (res.activations[1] - 1).min(20));
        assert_eq!(agent.scheduler().slots()[1].current_budget(), expected_budget);
    }

    #[test]
    fn all_strategies_failed_when_every_slot_fails() {
        let mut r = rng(31);
        let env = Environment::generate(
            9,
            0.0,
            Position::new(4, 4),
            Position::new(8, 8),
            &mut r,
        )
        .unwrap();
        let mut agent = Agent::new(vec![Box::new(AlwaysFail), Box::new(AlwaysFail)], &[5, 5], true);
        let err = agent.run_day(&env, &DayConfig::default(), &mut r, None).unwrap_err();
        assert!(matches!(err, AgentError::AllStrategiesFailed { .. }));
    }

    /// Instrumented strategy counting callback invocations.
    #[derive(Default)]
    struct Probe {
        pre: Rc<RefCell<u32>>,
        post: Rc<RefCell<u32>>,
        selects: Rc<RefCell<u32>>,
        new_days: Rc<RefCell<u32>>,
        rewards: Rc<RefCell<u32>>,
    }
    impl Strategy for Probe {
        fn name(&self) -> &'static str {
            "probe"
        }
        fn select_action(&mut self, ctx: &Context, rng: &mut dyn RngCore) -> Option<Action> {
            *self.selects.borrow_mut() += 1;
            ctx.sense.legal.choose(rng)
        }
        fn new_day(&mut self, _ctx: &Context) {
            *self.new_days.borrow_mut() += 1;
        }
        fn pre_action(&mut self, _ctx: &Context) {
            *self.pre.borrow_mut() += 1;
        }
        fn post_action(&mut self, _ctx: &Context) {
            *self.post.borrow_mut() += 1;
        }
        fn upon_reward(&mut self, _ctx: &Context) {
            *self.rewards.borrow_mut() += 1;
        }
    }

    #[test]
    fn callbacks_fire_once_per_strategy_per_tick() {
        let mut r = rng(32);
        let env = Environment::generate(
            7,
            0.0,
            Position::new(3, 3),
            Position::new(6, 6),
            &mut r,
        )
        .unwrap();
        let active = Probe::default();
        let passive = Probe::default();
        let (a_pre, a_post, a_sel) = (active.pre.clone(), active.post.clone(), active.selects.clone());
        let (p_pre, p_post, p_sel) = (passive.pre.clone(), passive.post.clone(), passive.selects.clone());
        let (a_rew, p_rew) = (active.rewards.clone(), passive.rewards.clone());
        // Unlimited budget on slot 0: slot 1 never becomes active.
        let mut agent = Agent::new(vec![Box::new(active), Box::new(passive)], &[0, 0], true);
        let res = agent.run_day(&env, &DayConfig::default(), &mut r, None).unwrap();
        assert_eq!(*a_pre.borrow(), res.steps);
        assert_eq!(*p_pre.borrow(), res.steps);
        assert_eq!(*a_post.borrow(), res.steps);
        assert_eq!(*p_post.borrow(), res.steps);
        assert_eq!(*a_sel.borrow(), res.steps);
        assert_eq!(*p_sel.borrow(), 0, "select_action must only hit the active strategy");
        assert_eq!(*a_rew.borrow(), 1);
        assert_eq!(*p_rew.borrow(), 1);
    }

    /// Strategy that always returns a fixed action (a scripted "plan").
    struct Fixed(Action);
    impl Strategy for Fixed {
        fn name(&self) -> &'static str {
            "fixed"
        }
        fn select_action(&mut self, _ctx: &Context, _rng: &mut dyn RngCore) -> Option<Action> {
            Some(self.0)
        }
    }

    #[test]
    fn bypass_wins_over_the_active_plan() {
        // Agent starts one cell left of the food; its strategy insists on
        // walking away. The bypass must step onto the food instead.
        let env = Environment::from_text(
            "H....\n\
             .....\n\
             ...F.\n\
             .....\n\
             .....\n",
        )
        .unwrap();
        let mut agent = Agent::new(vec![Box::new(Fixed(Action::Left))], &[0], true);
        let cfg = DayConfig::default();
        let mut st = agent.begin_day(&env, &cfg);
        st.position = Position::new(2, 2); // scripted start next to food
        let mut rec = Vec::new();
        let mut sink = |t: &TickRecord| rec.push(t.clone());
        let out = agent
            .day_step(&env, &cfg, &mut st, &mut rng(33), Some(&mut sink))
            .unwrap();
        assert_eq!(out, StepOutcome::Reached);
        assert_eq!(rec.len(), 1);
        assert_eq!(rec[0].action, Action::Right);
        assert!(rec[0].bypass);
    }

    #[test]
    fn bypass_absent_without_adjacent_food() {
        let mut r = rng(34);
        let env = Environment::generate(
            9,
            0.0,
            Position::new(4, 4),
            Position::new(8, 8),
            &mut r,
        )
        .unwrap();
        assert_eq!(bypass_check(&env.sense(Position::new(0, 0))), None);
        assert_eq!(bypass_check(&env.sense(Position::new(8, 7))), Some(Action::Down));
    }

    #[test]
    fn noiseless_estimate_tracks_true_position() {
        let mut r = rng(35);
        for seed in 0..20u64 {
            let mut r2 = rng(seed);
            let env = Environment::generate(
                11,
                0.25,
                Position::new(5, 5),
                Position::new(10, 10),
                &mut r2,
            )
            .unwrap();
            let mut agent = Agent::new(vec![Box::new(RandomWalk)], &[0], true);
            let cfg = DayConfig::default();
            let mut st = agent.begin_day(&env, &cfg);
            loop {
                assert_eq!(st.estimate.to_absolute(env.home()), st.position);
                match agent.day_step(&env, &cfg, &mut st, &mut r, None).unwrap() {
                    StepOutcome::Continue => {}
                    _ => break,
                }
            }
            assert_eq!(st.estimate.to_absolute(env.home()), st.position);
        }
    }

    #[test]
    fn noisy_estimate_error_moves_at_most_two_cells_per_tick() {
        let mut r = rng(36);
        let env = Environment::generate(
            15,
            0.2,
            Position::new(7, 7),
            Position::new(14, 14),
            &mut r,
        )
        .unwrap();
        let mut agent = Agent::new(vec![Box::new(BiasedRandom)], &[0], true);
        let cfg = DayConfig { noise: NoiseParams::new(0.3, 0.5), ..DayConfig::default() };
        let mut st = agent.begin_day(&env, &cfg);
        let mut prev_err = 0u32;
        for _ in 0..20_000 {
            match agent.day_step(&env, &cfg, &mut st, &mut r, None).unwrap() {
                StepOutcome::Continue => {}
                _ => break,
            }
            let err = st.estimate.to_absolute(env.home()).manhattan(st.position);
            assert!(err.abs_diff(prev_err) <= 2, "error jumped {prev_err} -> {err}");
            prev_err = err;
        }
    }

    #[test]
    fn day_terminates_at_step_cap() {
        let mut r = rng(37);
        let env = Environment::generate(
            15,
            0.0,
            Position::new(7, 7),
            Position::new(14, 14),
            &mut r,
        )
        .unwrap();
        // A strategy that paces in place never reaches the corner.
        struct Pace;
        impl Strategy for Pace {
            fn name(&self) -> &'static str {
                "pace"
            }
            fn select_action(&mut self, ctx: &Context, _rng: &mut dyn RngCore) -> Option<Action> {
                Some(if ctx.tick % 2 == 0 { Action::Left } else { Action::Right })
            }
        }
        let cfg = DayConfig { step_cap: 500, ..DayConfig::default() };
        let mut agent = Agent::new(vec![Box::new(Pace)], &[0], true);
        let res = agent.run_day(&env, &cfg, &mut r, None).unwrap();
        assert!(res.gave_up);
        assert_eq!(res.steps, 500);
    }
}
