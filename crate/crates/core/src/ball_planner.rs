//! Kick planning: A* over the kick graph of the field grid.
//!
//! Edge costs are times in seconds. The first kick includes the time for the
//! robot to reach the ball and is doubled on the ball-travel term when the
//! kick passes an opponent; later kicks cost only their ball travel time. The
//! heuristic is the ball travel time to the goal plus, right after the first
//! kick, the fastest teammate's time to reach the ball.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field_model::{FieldError, FieldSpec, GridIndex, KickOffsets};
use crate::geometry::{point_segment_distance, wrap_angle, FieldPose, Vec2};
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("no kick sequence reaches the goal")]
    NoPath,
    #[error("invalid planning context: {0}")]
    InvalidContext(String),
}

fn d_ball_speed<T: Real>() -> T {
    T::lit(2.0)
}
fn d_walk_speed<T: Real>() -> T {
    T::lit(0.2)
}
fn d_turn_speed<T: Real>() -> T {
    T::lit(1.0)
}
fn d_opponent_radius<T: Real>() -> T {
    T::lit(0.3)
}
fn d_kick_lengths<T: Real>() -> Vec<T> {
    vec![T::lit(0.5), T::lit(1.0), T::lit(2.0)]
}
fn d_goal<T: Real>() -> Vec2<T> {
    Vec2::new(T::lit(4.5), T::zero())
}
fn d_at_ball_radius<T: Real>() -> T {
    T::lit(0.1)
}
fn d_align_tolerance<T: Real>() -> T {
    T::lit(0.1)
}

/// Everything the cost and heuristic functions need to know about a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PlanContext<T> {
    pub robot: FieldPose<T>,
    #[serde(default)]
    pub teammates: Vec<FieldPose<T>>,
    #[serde(default)]
    pub opponents: Vec<Vec2<T>>,
    pub ball: Vec2<T>,
    #[serde(default = "d_ball_speed")]
    pub ball_speed: T,
    #[serde(default = "d_walk_speed")]
    pub walk_speed: T,
    #[serde(default = "d_turn_speed")]
    pub turn_speed: T,
    #[serde(default = "d_opponent_radius")]
    pub opponent_radius: T,
    #[serde(default = "d_kick_lengths")]
    pub kick_lengths: Vec<T>,
    /// Opponent goal center.
    #[serde(default = "d_goal")]
    pub goal: Vec2<T>,
    /// Below this distance the robot counts as standing at the ball.
    #[serde(default = "d_at_ball_radius")]
    pub at_ball_radius: T,
    #[serde(default = "d_align_tolerance")]
    pub align_tolerance: T,
}

impl<T: Real> PlanContext<T> {
    /// Context with default speeds and kicks; the goal is taken from `spec`.
    pub fn new(robot: FieldPose<T>, ball: Vec2<T>, spec: &FieldSpec<T>) -> Self {
        Self {
            robot,
            teammates: Vec::new(),
            opponents: Vec::new(),
            ball,
            ball_speed: d_ball_speed(),
            walk_speed: d_walk_speed(),
            turn_speed: d_turn_speed(),
            opponent_radius: d_opponent_radius(),
            kick_lengths: d_kick_lengths(),
            goal: spec.opponent_goal(),
            at_ball_radius: spec.cell_size,
            align_tolerance: d_align_tolerance(),
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let pos = [
            ("ball_speed", self.ball_speed),
            ("walk_speed", self.walk_speed),
            ("turn_speed", self.turn_speed),
            ("opponent_radius", self.opponent_radius),
        ];
        for (name, v) in pos {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(PlanError::InvalidContext(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Time for `robot` to walk to `ball` and face the kick.
///
/// Far from the ball the robot has to face the ball; standing at the ball it
/// has to face the opponent goal.
pub fn time_to_approach_ball<T: Real>(ball: Vec2<T>, robot: &FieldPose<T>, ctx: &PlanContext<T>) -> T {
    let to_ball = ball - robot.position();
    let dist = to_ball.norm();
    let at_ball = dist < ctx.at_ball_radius;
    let heading = if at_ball {
        let to_goal = ctx.goal - ball;
        if to_goal.norm() > T::zero() {
            to_goal.angle()
        } else {
            robot.theta
        }
    } else {
        to_ball.angle()
    };
    let turn = wrap_angle(heading - robot.theta).abs();
    if at_ball && turn <= ctx.align_tolerance {
        return T::zero();
    }
    dist / ctx.walk_speed + turn / ctx.turn_speed
}

/// Whether any opponent disc of `radius` touches the closed segment.
pub fn intersect_opponent<T: Real>(from: Vec2<T>, to: Vec2<T>, opponents: &[Vec2<T>], radius: T) -> bool {
    opponents
        .iter()
        .any(|&o| point_segment_distance(o, from, to) < radius)
}

/// Cost of kicking the ball from `from` to `to`, in seconds.
pub fn compute_cost<T: Real>(ctx: &PlanContext<T>, from: Vec2<T>, to: Vec2<T>, first_kick: bool) -> T {
    let travel = (to - from).norm() / ctx.ball_speed;
    if !first_kick {
        return travel;
    }
    let reach = time_to_approach_ball(from, &ctx.robot, ctx);
    if intersect_opponent(from, to, &ctx.opponents, ctx.opponent_radius) {
        reach + travel * T::lit(2.0)
    } else {
        reach + travel
    }
}

/// Estimated remaining time from a ball at `to`.
pub fn heuristic<T: Real>(ctx: &PlanContext<T>, to: Vec2<T>, first_kick: bool) -> T {
    let to_goal = (ctx.goal - to).norm() / ctx.ball_speed;
    if !first_kick {
        return to_goal;
    }
    let receive = ctx
        .teammates
        .iter()
        .map(|m| time_to_approach_ball(to, m, ctx))
        .fold(None, |acc: Option<T>, t| Some(acc.map_or(t, |a| a.min(t))))
        .unwrap_or(T::zero());
    receive + to_goal
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicMode {
    /// The goal-distance plus receiver heuristic.
    #[default]
    Full,
    /// Always zero; the search degenerates to Dijkstra.
    Zero,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    #[serde(default)]
    pub heuristic: HeuristicMode,
    /// Target cells; defaults to the cell nearest the goal center.
    #[serde(default)]
    pub targets: Option<Vec<GridIndex>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BallPlan<T> {
    pub cells: Vec<GridIndex>,
    /// Cell centers; first is the ball cell, last a goal cell.
    pub waypoints: Vec<Vec2<T>>,
    pub edge_costs: Vec<T>,
    pub total_cost: T,
    pub expanded_nodes: usize,
}

struct Open<T> {
    f: T,
    g: T,
    node: usize,
    index: GridIndex,
}

impl<T: Real> PartialEq for Open<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl<T: Real> Eq for Open<T> {}

impl<T: Real> PartialOrd for Open<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl<T: Real> Ord for Open<T> {
    // reversed so BinaryHeap pops the smallest (f, g, index)
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.partial_cmp(&self.f)
            .unwrap_or(Ordering::Equal)
            .then_with(|| o.g.partial_cmp(&self.g).unwrap_or(Ordering::Equal))
            .then_with(|| o.index.cmp(&self.index))
    }
}

pub fn plan_ball_path<T: Real>(ctx: &PlanContext<T>, spec: &FieldSpec<T>) -> Result<BallPlan<T>, PlanError> {
    plan_ball_path_with(ctx, spec, &PlanOptions::default())
}

pub fn plan_ball_path_with<T: Real>(
    ctx: &PlanContext<T>,
    spec: &FieldSpec<T>,
    opts: &PlanOptions,
) -> Result<BallPlan<T>, PlanError> {
    ctx.validate()?;
    if !spec.contains(ctx.ball) {
        return Err(FieldError::OutOfField {
            x: ctx.ball.x.to_f64_lossy(),
            y: ctx.ball.y.to_f64_lossy(),
        }
        .into());
    }
    let offsets = KickOffsets::new(&ctx.kick_lengths, spec.cell_size)?;
    let start = spec.pose_to_cell(ctx.ball)?;
    let targets: HashSet<usize> = match &opts.targets {
        Some(t) => {
            if let Some(bad) = t.iter().find(|i| !spec.contains_index(**i)) {
                return Err(FieldError::BadIndex {
                    row: bad.row,
                    col: bad.col,
                }
                .into());
            }
            t.iter().map(|&i| spec.linear(i)).collect()
        }
        None => [spec.linear(spec.pose_to_cell(ctx.goal)?)].into(),
    };
    if targets.is_empty() {
        return Err(PlanError::NoPath);
    }

    let n = spec.cell_count();
    let s = spec.linear(start);
    let mut g = vec![T::infinity(); n];
    let mut parent = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    let h = |p: Vec2<T>, first: bool| match opts.heuristic {
        HeuristicMode::Full => heuristic(ctx, p, first),
        HeuristicMode::Zero => T::zero(),
    };
    g[s] = T::zero();
    heap.push(Open {
        f: h(spec.cell_center(start), false),
        g: T::zero(),
        node: s,
        index: start,
    });
    let mut expanded = 0usize;
    let mut reached = None;
    while let Some(Open { g: gu, node: u, index: ui, .. }) = heap.pop() {
        if gu > g[u] {
            continue;
        }
        expanded += 1;
        if targets.contains(&u) {
            reached = Some(u);
            break;
        }
        let from = spec.cell_center(ui);
        let first = u == s;
        for (vi, _) in offsets.neighbours(ui, spec) {
            let v = spec.linear(vi);
            let to = spec.cell_center(vi);
            let gv = gu + compute_cost(ctx, from, to, first);
            if gv < g[v] {
                g[v] = gv;
                parent[v] = u;
                heap.push(Open {
                    f: gv + h(to, first),
                    g: gv,
                    node: v,
                    index: vi,
                });
            }
        }
    }
    let goal = reached.ok_or(PlanError::NoPath)?;

    let mut chain = vec![goal];
    while *chain.last().unwrap() != s {
        chain.push(parent[*chain.last().unwrap()]);
    }
    chain.reverse();
    let cells: Vec<GridIndex> = chain.iter().map(|&k| spec.from_linear(k)).collect();
    let waypoints: Vec<Vec2<T>> = cells.iter().map(|&i| spec.cell_center(i)).collect();
    let edge_costs = waypoints
        .windows(2)
        .enumerate()
        .map(|(k, w)| compute_cost(ctx, w[0], w[1], k == 0))
        .collect();
    Ok(BallPlan {
        cells,
        waypoints,
        edge_costs,
        total_cost: g[goal],
        expanded_nodes: expanded,
    })
}
