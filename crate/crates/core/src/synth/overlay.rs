use crate::ball_planner::{BallPlan, PlanContext};
use crate::birdview::BirdviewSpec;
use crate::field_model::FieldSpec;
use crate::geometry::Vec2;
use crate::image::{draw_dot, draw_line, Rgb};
use crate::line_vision::LineDetections;
use crate::scalar::Real;

use super::render::render_birdview;

const PATH: [u8; 3] = [230, 40, 40];
const ROBOT: [u8; 3] = [40, 80, 230];
const OPPONENT: [u8; 3] = [20, 20, 20];
const TEAMMATE: [u8; 3] = [90, 200, 240];
const BALL: [u8; 3] = [250, 150, 0];
const CORNER: [u8; 3] = [230, 0, 230];

/// Whole-field top view with the planned kicks, players and ball drawn on it.
pub fn plan_overlay<T: Real>(field: &FieldSpec<T>, ctx: &PlanContext<T>, plan: &BallPlan<T>, meters_per_pixel: T) -> Rgb {
    let margin = T::lit(0.3);
    let view = BirdviewSpec {
        out_width: ((field.length + margin * T::lit(2.0)) / meters_per_pixel).ceil().to_f64_lossy() as usize,
        out_height: ((field.width + margin * T::lit(2.0)) / meters_per_pixel).ceil().to_f64_lossy() as usize,
        meters_per_pixel,
        view_center: Vec2::zero(),
        yaw: T::FRAC_PI_2(),
    };
    let mut img = render_birdview(field, &view, 1, 0.0, 0);
    let px = |p: Vec2<T>| {
        let q = view.field_to_pixel(p);
        (q.x.to_f64_lossy(), q.y.to_f64_lossy())
    };
    let ball = px(ctx.ball);
    let mut prev = ball;
    for w in &plan.waypoints {
        let q = px(*w);
        draw_line(&mut img, prev.0, prev.1, q.0, q.1, PATH);
        draw_dot(&mut img, q.0, q.1, 2, PATH);
        prev = q;
    }
    for o in &ctx.opponents {
        let q = px(*o);
        draw_dot(&mut img, q.0, q.1, 5, OPPONENT);
    }
    for t in &ctx.teammates {
        let q = px(t.position());
        draw_dot(&mut img, q.0, q.1, 4, TEAMMATE);
    }
    let r = px(ctx.robot.position());
    draw_dot(&mut img, r.0, r.1, 4, ROBOT);
    draw_dot(&mut img, ball.0, ball.1, 3, BALL);
    img
}

/// Copy of `img` with detected lines in red and corner observations as
/// magenta dots with short strokes along both arms.
pub fn detection_overlay<T: Real>(img: &Rgb, det: &LineDetections<T>) -> Rgb {
    let mut out = img.clone();
    for l in &det.lines {
        let (a, b) = (l.p0.cast::<f64>(), l.p1.cast::<f64>());
        draw_line(&mut out, a.x, a.y, b.x, b.y, PATH);
    }
    for c in &det.corners {
        let p = c.position.cast::<f64>();
        for d in [c.dir_a, c.dir_b] {
            let e = p + d.cast::<f64>() * 12.0;
            draw_line(&mut out, p.x, p.y, e.x, e.y, CORNER);
        }
        draw_dot(&mut out, p.x, p.y, 3, CORNER);
    }
    out
}
