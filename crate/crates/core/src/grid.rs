//! Ground truth: grid generation, overnight barrier change, noisy action
//! execution, and radius-1 sensing.
//!
//! The environment owns the full world state; agents never see it whole.
//! Coordinates use the screen convention: x grows rightward, y grows
//! downward, so `Up` decreases y and the lower-right corner of an `n`-grid
//! is `(n-1, n-1)`.

use rand::{Rng, RngCore};
use thiserror::Error;

/// Attempt bound for rejection sampling in [`Environment::generate`] and
/// each [`Environment::daily_change`] draw.
pub const MAX_GENERATION_ATTEMPTS: u32 = 10_000;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("environment generation failed after {attempts} attempts")]
    GenerationFailed { attempts: u32 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("bad grid text: {0}")]
    Parse(String),
}

/// State of a single cell. The ordering Empty < Barrier < Food is relied on
/// as a fixed tie-break order elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellState {
    Empty,
    Barrier,
    Food,
}

impl CellState {
    pub fn glyph(self) -> char {
        match self {
            CellState::Empty => '.',
            CellState::Barrier => '#',
            CellState::Food => 'F',
        }
    }
}

/// Absolute cell coordinates. The environment only ever holds in-grid
/// positions; agent-side estimates use [`crate::agent::LocationEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub x: i32,
    pub y: i32,
}

impl Position {
    pub fn new(x: i32, y: i32) -> Self {
        Position { x, y }
    }

    pub fn offset(self, action: Action) -> Self {
        let (dx, dy) = action.delta();
        Position { x: self.x + dx, y: self.y + dy }
    }

    pub fn manhattan(self, other: Position) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

/// The four moves. `ALL` fixes the canonical iteration order used for
/// sensing, noise draws, and planner neighbor expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
        }
    }

    pub fn reverse(self) -> Action {
        match self {
            Action::Up => Action::Down,
            Action::Down => Action::Up,
            Action::Left => Action::Right,
            Action::Right => Action::Left,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Action::Up => 0,
            Action::Down => 1,
            Action::Left => 2,
            Action::Right => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
        }
    }
}

/// A small set of actions backed by a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ActionSet(u8);

impl ActionSet {
    pub fn empty() -> Self {
        ActionSet(0)
    }

    pub fn insert(&mut self, a: Action) {
        self.0 |= 1 << a.index();
    }

    pub fn contains(self, a: Action) -> bool {
        self.0 & (1 << a.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Action> {
        Action::ALL.into_iter().filter(move |a| self.contains(*a))
    }

    /// Uniform draw from the set; `None` when empty.
    pub fn choose(self, rng: &mut dyn RngCore) -> Option<Action> {
        if self.is_empty() {
            return None;
        }
        let k = rng.random_range(0..self.len());
        self.iter().nth(k)
    }
}

impl FromIterator<Action> for ActionSet {
    fn from_iter<T: IntoIterator<Item = Action>>(iter: T) -> Self {
        let mut s = ActionSet::empty();
        for a in iter {
            s.insert(a);
        }
        s
    }
}

/// Motion-noise parameters. With probability `p` an executed action resolves
/// to an alternative displacement; within that, a `p2` fraction of cases is a
/// fair coin between staying put and jumping two cells forward, and the rest
/// is a uniform draw over the four adjacent cells. Blocked outcomes resolve
/// to staying.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub p: f64,
    pub p2: f64,
}

impl NoiseParams {
    pub const NONE: NoiseParams = NoiseParams { p: 0.0, p2: 0.5 };

    pub fn new(p: f64, p2: f64) -> Self {
        NoiseParams { p, p2 }
    }
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams { p: 0.0, p2: 0.5 }
    }
}

/// One tick's local observation: the state of the four adjacent cells
/// (off-grid reads as Barrier), the legal moves, and the up-to-two moves
/// that reduce Manhattan distance to the food ("smell" directions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenseData {
    adjacent: [CellState; 4],
    pub legal: ActionSet,
    pub greedy: ActionSet,
}

impl SenseData {
    pub fn adjacent(&self, a: Action) -> CellState {
        self.adjacent[a.index()]
    }
}

/// The full world: side length, barrier layout, food and home cells, and the
/// day counter. Immutable during a day; [`Environment::daily_change`] mutates
/// it overnight under exclusive access.
#[derive(Debug, Clone)]
pub struct Environment {
    n: i32,
    barriers: Vec<bool>,
    barrier_count: usize,
    home: Position,
    food: Position,
    day: u32,
}

impl Environment {
    /// Generates an environment with `round(barrier_proportion * n^2)`
    /// barriers placed uniformly over cells other than home and food,
    /// rejection-resampled until a home-to-food path exists.
    pub fn generate(
        n: u32,
        barrier_proportion: f64,
        home: Position,
        food: Position,
        rng: &mut dyn RngCore,
    ) -> Result<Self, GridError> {
        if n < 2 {
            return Err(GridError::InvalidParams(format!("grid side {n} too small")));
        }
        if !(0.0..=1.0).contains(&barrier_proportion) {
            return Err(GridError::InvalidParams(format!(
                "barrier proportion {barrier_proportion} outside [0, 1]"
            )));
        }
        if barrier_proportion > 0.3 {
            log::warn!(
                "barrier proportion {barrier_proportion} above 0.3; home-to-food paths often stop existing"
            );
        }
        let n = n as i32;
        let in_grid = |p: Position| p.x >= 0 && p.y >= 0 && p.x < n && p.y < n;
        if !in_grid(home) || !in_grid(food) {
            return Err(GridError::InvalidParams("home or food off-grid".into()));
        }
        if home == food {
            return Err(GridError::InvalidParams("home equals food".into()));
        }

        let total = (n * n) as usize;
        let count = (barrier_proportion * total as f64).round() as usize;
        let candidates: Vec<usize> = (0..total)
            .filter(|&i| {
                let p = Position::new((i as i32) % n, (i as i32) / n);
                p != home && p != food
            })
            .collect();
        if count > candidates.len() {
            return Err(GridError::GenerationFailed { attempts: 0 });
        }

        for attempt in 1..=MAX_GENERATION_ATTEMPTS {
            let mut barriers = vec![false; total];
            for idx in rand::seq::index::sample(rng, candidates.len(), count) {
                barriers[candidates[idx]] = true;
            }
            let env = Environment { n, barriers, barrier_count: count, home, food, day: 1 };
            if env.path_exists(home, food) {
                return Ok(env);
            }
            if attempt == MAX_GENERATION_ATTEMPTS {
                break;
            }
        }
        Err(GridError::GenerationFailed { attempts: MAX_GENERATION_ATTEMPTS })
    }

    /// Overnight change: removes `round(change_rate * |barriers|)` barriers
    /// uniformly and adds the same number on uniformly chosen empty cells
    /// (home and food excluded), redrawing until a home-to-food path still
    /// exists. The barrier count is preserved exactly and the day counter
    /// advances.
    pub fn daily_change(&mut self, change_rate: f64, rng: &mut dyn RngCore) -> Result<(), GridError> {
        if !(0.0..=1.0).contains(&change_rate) {
            return Err(GridError::InvalidParams(format!("change rate {change_rate} outside [0, 1]")));
        }
        let k = (change_rate * self.barrier_count as f64).round() as usize;
        if k == 0 {
            self.day += 1;
            return Ok(());
        }

        for _ in 1..=MAX_GENERATION_ATTEMPTS {
            let mut barriers = self.barriers.clone();
            let current: Vec<usize> =
                (0..barriers.len()).filter(|&i| barriers[i]).collect();
            for idx in rand::seq::index::sample(rng, current.len(), k) {
                barriers[current[idx]] = false;
            }
            let empty: Vec<usize> = (0..barriers.len())
                .filter(|&i| {
                    let p = self.position_of(i);
                    !barriers[i] && p != self.home && p != self.food
                })
                .collect();
            if k > empty.len() {
                return Err(GridError::GenerationFailed { attempts: 0 });
            }
            for idx in rand::seq::index::sample(rng, empty.len(), k) {
                barriers[empty[idx]] = true;
            }
            let trial = Environment {
                n: self.n,
                barriers,
                barrier_count: self.barrier_count,
                home: self.home,
                food: self.food,
                day: self.day + 1,
            };
            if trial.path_exists(self.home, self.food) {
                *self = trial;
                return Ok(());
            }
        }
        Err(GridError::GenerationFailed { attempts: MAX_GENERATION_ATTEMPTS })
    }

    /// Executes an intended action from `pos` and returns the resulting
    /// position. Never returns a barrier or off-grid cell.
    pub fn execute_action(
        &self,
        pos: Position,
        action: Action,
        noise: NoiseParams,
        rng: &mut dyn RngCore,
    ) -> Position {
        debug_assert!(self.in_grid(pos) && !self.is_barrier(pos));
        let noisy = noise.p > 0.0 && rng.random::<f64>() < noise.p;
        if !noisy {
            let target = pos.offset(action);
            return if self.passable(target) { target } else { pos };
        }
        if rng.random::<f64>() < noise.p2 {
            // Fair coin between staying put and two cells forward; a two-step
            // jump needs both the intermediate and the target cell passable.
            if rng.random::<f64>() < 0.5 {
                pos
            } else {
                let mid = pos.offset(action);
                let two = mid.offset(action);
                if self.passable(mid) && self.passable(two) {
                    two
                } else {
                    pos
                }
            }
        } else {
            let target = pos.offset(Action::ALL[rng.random_range(0..4)]);
            if self.passable(target) {
                target
            } else {
                pos
            }
        }
    }

    /// Radius-1 observation from `pos`. Adjacent states are exact (no sensor
    /// noise) and the greedy directions come from the true food position.
    pub fn sense(&self, pos: Position) -> SenseData {
        debug_assert!(self.in_grid(pos));
        let mut adjacent = [CellState::Barrier; 4];
        let mut legal = ActionSet::empty();
        for a in Action::ALL {
            let t = pos.offset(a);
            let state = if self.in_grid(t) { self.state(t) } else { CellState::Barrier };
            adjacent[a.index()] = state;
            if state != CellState::Barrier {
                legal.insert(a);
            }
        }
        let mut greedy = ActionSet::empty();
        if self.food.x > pos.x {
            greedy.insert(Action::Right);
        } else if self.food.x < pos.x {
            greedy.insert(Action::Left);
        }
        if self.food.y > pos.y {
            greedy.insert(Action::Down);
        } else if self.food.y < pos.y {
            greedy.insert(Action::Up);
        }
        SenseData { adjacent, legal, greedy }
    }

    /// 4-connected BFS reachability over non-barrier cells.
    pub fn path_exists(&self, from: Position, to: Position) -> bool {
        self.shortest_path_len(from, to).is_some()
    }

    /// Minimum number of moves from `from` to `to`, `None` if unreachable.
    pub fn shortest_path_len(&self, from: Position, to: Position) -> Option<u32> {
        debug_assert!(self.in_grid(from) && self.in_grid(to));
        debug_assert!(!self.is_barrier(from) && !self.is_barrier(to));
        if from == to {
            return Some(0);
        }
        let mut dist = vec![u32::MAX; (self.n * self.n) as usize];
        let mut queue = std::collections::VecDeque::new();
        dist[self.index_of(from)] = 0;
        queue.push_back(from);
        while let Some(p) = queue.pop_front() {
            let d = dist[self.index_of(p)];
            for a in Action::ALL {
                let t = p.offset(a);
                if !self.passable(t) {
                    continue;
                }
                let ti = self.index_of(t);
                if dist[ti] == u32::MAX {
                    if t == to {
                        return Some(d + 1);
                    }
                    dist[ti] = d + 1;
                    queue.push_back(t);
                }
            }
        }
        None
    }

    pub fn n(&self) -> i32 {
        self.n
    }

    pub fn home(&self) -> Position {
        self.home
    }

    pub fn food(&self) -> Position {
        self.food
    }

    pub fn day(&self) -> u32 {
        self.day
    }

    pub fn barrier_count(&self) -> usize {
        self.barrier_count
    }

    pub fn in_grid(&self, p: Position) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.n && p.y < self.n
    }

    pub fn is_barrier(&self, p: Position) -> bool {
        self.barriers[self.index_of(p)]
    }

    fn passable(&self, p: Position) -> bool {
        self.in_grid(p) && !self.is_barrier(p)
    }

    pub fn state(&self, p: Position) -> CellState {
        if p == self.food {
            CellState::Food
        } else if self.is_barrier(p) {
            CellState::Barrier
        } else {
            CellState::Empty
        }
    }

    fn index_of(&self, p: Position) -> usize {
        (p.y * self.n + p.x) as usize
    }

    fn position_of(&self, i: usize) -> Position {
        Position::new((i as i32) % self.n, (i as i32) / self.n)
    }

    pub fn barrier_positions(&self) -> Vec<Position> {
        (0..self.barriers.len())
            .filter(|&i| self.barriers[i])
            .map(|i| self.position_of(i))
            .collect()
    }

    /// Moves the food marker. The target must be an in-grid non-barrier cell
    /// distinct from home; the harness clears pattern corners beforehand.
    pub fn set_food(&mut self, p: Position) {
        assert!(self.in_grid(p) && !self.is_barrier(p) && p != self.home);
        self.food = p;
    }

    /// Removes the barrier at `from` and raises one at `to`, preserving the
    /// barrier count. Used by the harness to keep pattern corners clear.
    pub fn move_barrier(&mut self, from: Position, to: Position) {
        assert!(self.is_barrier(from));
        assert!(self.passable(to) && to != self.home && to != self.food);
        let fi = self.index_of(from);
        let ti = self.index_of(to);
        self.barriers[fi] = false;
        self.barriers[ti] = true;
    }

    pub fn empty_positions(&self) -> Vec<Position> {
        (0..self.barriers.len())
            .filter(|&i| !self.barriers[i])
            .map(|i| self.position_of(i))
            .filter(|&p| p != self.home && p != self.food)
            .collect()
    }

    /// Line-oriented dump: one row per line, `.` empty, `#` barrier,
    /// `F` food, `H` home.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.n * (self.n + 1)) as usize);
        for y in 0..self.n {
            for x in 0..self.n {
                let p = Position::new(x, y);
                let c = if p == self.home { 'H' } else { self.state(p).glyph() };
                out.push(c);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the [`Environment::to_text`] format. Intended for fixed
    /// scenarios in tests and demos.
    pub fn from_text(text: &str) -> Result<Self, GridError> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let n = rows.len() as i32;
        if n < 2 {
            return Err(GridError::Parse("need at least 2 rows".into()));
        }
        let mut barriers = vec![false; (n * n) as usize];
        let mut home = None;
        let mut food = None;
        let mut count = 0;
        for (y, row) in rows.iter().enumerate() {
            let cells: Vec<char> = row.chars().collect();
            if cells.len() != n as usize {
                return Err(GridError::Parse(format!("row {y} has {} cells, expected {n}", cells.len())));
            }
            for (x, c) in cells.iter().enumerate() {
                let p = Position::new(x as i32, y as i32);
                match c {
                    '.' => {}
                    '#' => {
                        barriers[(p.y * n + p.x) as usize] = true;
                        count += 1;
                    }
                    'F' => food = Some(p),
                    'H' => home = Some(p),
                    other => return Err(GridError::Parse(format!("unknown glyph {other:?}"))),
                }
            }
        }
        let home = home.ok_or_else(|| GridError::Parse("missing H".into()))?;
        let food = food.ok_or_else(|| GridError::Parse("missing F".into()))?;
        Ok(Environment { n, barriers, barrier_count: count, home, food, day: 1 })
    }
}
