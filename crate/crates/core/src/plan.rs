//! Location-to-action plans and the budgeted A* search that produces them.
//!
//! A [`PlanMap`] is the shared executable form of remembered paths and
//! computed plans: a finite association from an estimated location to the
//! action to take there. The planner works on raw `(x, y)` pairs so both
//! estimate-frame strategies and the absolute-frame oracle can use it.

use crate::agent::LocationEstimate;
use crate::grid::Action;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

/// Map from estimated location to action; later writes overwrite.
#[derive(Debug, Clone, Default)]
pub struct PlanMap {
    entries: std::collections::BTreeMap<LocationEstimate, Action>,
}

impl PlanMap {
    pub fn new() -> Self {
        PlanMap::default()
    }

    pub fn insert(&mut self, at: LocationEstimate, action: Action) {
        self.entries.insert(at, action);
    }

    pub fn get(&self, at: LocationEstimate) -> Option<Action> {
        self.entries.get(&at).copied()
    }

    pub fn contains(&self, at: LocationEstimate) -> bool {
        self.entries.contains_key(&at)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = (LocationEstimate, Action)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    /// Lays an action sequence out from `start`, one entry per step taken.
    pub fn from_path(start: LocationEstimate, actions: &[Action]) -> Self {
        let mut map = PlanMap::new();
        let mut at = start;
        for &a in actions {
            map.insert(at, a);
            at = at.integrate(a);
        }
        map
    }
}

/// Inclusive rectangular search region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub min_x: i32,
    pub min_y: i32,
    pub max_x: i32,
    pub max_y: i32,
}

impl Bounds {
    pub fn of_points(points: impl IntoIterator<Item = (i32, i32)>) -> Option<Self> {
        let mut it = points.into_iter();
        let (x0, y0) = it.next()?;
        let mut b = Bounds { min_x: x0, min_y: y0, max_x: x0, max_y: y0 };
        for (x, y) in it {
            b.min_x = b.min_x.min(x);
            b.min_y = b.min_y.min(y);
            b.max_x = b.max_x.max(x);
            b.max_y = b.max_y.max(y);
        }
        Some(b)
    }

    pub fn expand(mut self, margin: i32) -> Self {
        self.min_x -= margin;
        self.min_y -= margin;
        self.max_x += margin;
        self.max_y += margin;
        self
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }

    pub fn width(&self) -> i32 {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> i32 {
        self.max_y - self.min_y + 1
    }

    /// Half the perimeter-based step allowance used as a generous path
    /// bound when no tick budget applies.
    pub fn perimeter(&self) -> u32 {
        2 * (self.width() + self.height()) as u32
    }
}

fn manhattan(a: (i32, i32), b: (i32, i32)) -> u32 {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

/// 4-connected A* with the Manhattan heuristic. Cells outside `bounds` are
/// never entered; nodes whose f = g + h exceeds `max_cost` are not expanded,
/// which realizes the planning budget abort. Returns the action sequence
/// from `start`, or `None` on exhaustion or budget abort. `start == goal`
/// yields an empty sequence.
pub fn astar(
    start: (i32, i32),
    goal: (i32, i32),
    blocked: &dyn Fn(i32, i32) -> bool,
    bounds: Bounds,
    max_cost: u32,
) -> Option<Vec<Action>> {
    if start == goal {
        return Some(Vec::new());
    }
    if !bounds.contains(start.0, start.1)
        || !bounds.contains(goal.0, goal.1)
        || manhattan(start, goal) > max_cost
    {
        return None;
    }

    let mut best_g: HashMap<(i32, i32), u32> = HashMap::new();
    let mut came: HashMap<(i32, i32), ((i32, i32), Action)> = HashMap::new();
    // Orders by f, then g, then coordinates: a fixed total order keeps plans
    // identical across runs with the same inputs.
    let mut open: BinaryHeap<Reverse<(u32, u32, i32, i32)>> = BinaryHeap::new();
    best_g.insert(start, 0);
    open.push(Reverse((manhattan(start, goal), 0, start.0, start.1)));

    while let Some(Reverse((f, g, x, y))) = open.pop() {
        if f > max_cost {
            return None;
        }
        if (x, y) == goal {
            let mut actions = Vec::with_capacity(g as usize);
            let mut cur = goal;
            while cur != start {
                let (prev, a) = came[&cur];
                actions.push(a);
                cur = prev;
            }
            actions.reverse();
            return Some(actions);
        }
        if best_g.get(&(x, y)).is_some_and(|&bg| g > bg) {
            continue; // stale heap entry
        }
        for a in Action::ALL {
            let (dx, dy) = a.delta();
            let (nx, ny) = (x + dx, y + dy);
            if !bounds.contains(nx, ny) || blocked(nx, ny) {
                continue;
            }
            let ng = g + 1;
            let nf = ng + manhattan((nx, ny), goal);
            if nf > max_cost {
                continue;
            }
            if best_g.get(&(nx, ny)).is_none_or(|&bg| ng < bg) {
                best_g.insert((nx, ny), ng);
                came.insert((nx, ny), ((x, y), a));
                open.push(Reverse((nf, ng, nx, ny)));
            }
        }
    }
    None
}
