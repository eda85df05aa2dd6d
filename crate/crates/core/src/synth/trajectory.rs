use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::field_model::FieldSpec;
use crate::geometry::{wrap_angle, wrap_half_turn, FieldPose, Vec2};
use crate::localization::{expected_from, FieldLandmarks, MotionNoise, RobotObservation, Sigmas};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "T: Real")]
pub struct TrajectoryConfig<T> {
    pub steps: usize,
    /// Noise added to the reported odometry.
    pub odom_noise: MotionNoise<T>,
    /// Noise added to every observation.
    pub obs_sigmas: Sigmas<T>,
    pub max_range: T,
    /// Distance walked per step, meters.
    pub stride: T,
    /// Heading random walk per step, radians.
    pub turn_sd: T,
    /// The walk stays this far inside the border, meters.
    pub margin: T,
    pub seed: u64,
}

impl<T: Real> Default for TrajectoryConfig<T> {
    fn default() -> Self {
        Self {
            steps: 100,
            odom_noise: MotionNoise::default(),
            obs_sigmas: Sigmas::default(),
            max_range: T::lit(3.0),
            stride: T::lit(0.05),
            turn_sd: T::lit(0.1),
            margin: T::lit(0.3),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TrajectoryStep<T> {
    /// Reported motion since the previous step, in the previous robot frame.
    pub odometry: FieldPose<T>,
    pub observations: Vec<RobotObservation<T>>,
    pub truth: FieldPose<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Trajectory<T> {
    pub start: FieldPose<T>,
    pub config: TrajectoryConfig<T>,
    pub steps: Vec<TrajectoryStep<T>>,
}

struct Noise {
    rng: ChaCha8Rng,
}

impl Noise {
    fn sample<T: Real>(&mut self, sd: T) -> T {
        if sd > T::zero() {
            T::lit(Normal::new(0.0, sd.to_f64_lossy()).expect("finite sd").sample(&mut self.rng))
        } else {
            T::zero()
        }
    }

    fn perturb<T: Real>(&mut self, o: RobotObservation<T>, s: &Sigmas<T>) -> RobotObservation<T> {
        match o {
            RobotObservation::Line { distance, direction } => {
                let d = distance + self.sample(s.distance);
                let a = direction + self.sample(s.angle);
                // keep the direction in [0, π) and the distance consistent with it
                let wrapped = wrap_half_turn(a);
                let flipped = wrap_angle(a - wrapped).abs() > T::FRAC_PI_2();
                RobotObservation::Line {
                    distance: if flipped { -d } else { d },
                    direction: wrapped,
                }
            }
            RobotObservation::Corner { position, orientation } => RobotObservation::Corner {
                position: Vec2::new(position.x + self.sample(s.position), position.y + self.sample(s.position)),
                orientation: wrap_angle(orientation + self.sample(s.angle)),
            },
            RobotObservation::PointFeature { position } => RobotObservation::PointFeature {
                position: Vec2::new(position.x + self.sample(s.position), position.y + self.sample(s.position)),
            },
        }
    }
}

/// Seeded random walk over the field with noisy odometry and noisy
/// observations of every landmark in range.
pub fn generate_trajectory<T: Real>(field: &FieldSpec<T>, start: FieldPose<T>, cfg: &TrajectoryConfig<T>) -> Trajectory<T> {
    let lm = FieldLandmarks::new(field);
    let mut noise = Noise {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
    };
    let (hl, hw) = (field.half_length() - cfg.margin, field.half_width() - cfg.margin);
    let mut pose = start;
    let mut steps = Vec::with_capacity(cfg.steps);
    for _ in 0..cfg.steps {
        let mut heading = wrap_angle(pose.theta + noise.sample(cfg.turn_sd));
        let ahead = pose.position() + Vec2::from_angle(heading) * cfg.stride;
        if ahead.x.abs() > hl || ahead.y.abs() > hw {
            // turn back toward the middle with some spread
            let jitter = T::lit(noise.rng.random_range(-0.5..0.5));
            heading = wrap_angle((-pose.position()).angle() + jitter);
        }
        let next_pos = pose.position() + Vec2::from_angle(heading) * cfg.stride;
        let next = FieldPose::new(next_pos.x, next_pos.y, heading);
        let delta = pose.delta_to(&next);
        let odometry = FieldPose::new(
            delta.x + noise.sample(cfg.odom_noise.x),
            delta.y + noise.sample(cfg.odom_noise.y),
            delta.theta + noise.sample(cfg.odom_noise.theta),
        );
        let observations = expected_from(&lm, &next, cfg.max_range)
            .into_iter()
            .map(|o| noise.perturb(o, &cfg.obs_sigmas))
            .collect();
        steps.push(TrajectoryStep {
            odometry,
            observations,
            truth: next,
        });
        pose = next;
    }
    Trajectory {
        start,
        config: *cfg,
        steps,
    }
}
