use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{best_residual_sq, FieldLandmarks, RobotObservation, Sigmas};
use super::LocalizationError;
use crate::field_model::FieldSpec;
use crate::geometry::{wrap_angle, FieldPose};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Particle<T> {
    pub pose: FieldPose<T>,
    pub weight: T,
}

/// Per-axis standard deviations of an odometry step in the robot frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MotionNoise<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

impl<T: Real> MotionNoise<T> {
    pub fn zero() -> Self {
        Self {
            x: T::zero(),
            y: T::zero(),
            theta: T::zero(),
        }
    }
}

impl<T: Real> Default for MotionNoise<T> {
    fn default() -> Self {
        Self {
            x: T::lit(0.02),
            y: T::lit(0.02),
            theta: T::lit(0.03),
        }
    }
}

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, sd: T) -> T {
    if sd > T::zero() {
        let n = Normal::new(0.0, sd.to_f64_lossy()).expect("finite standard deviation");
        T::lit(n.sample(rng))
    } else {
        T::zero()
    }
}

/// Moves every particle by `odometry` expressed in its own frame, plus noise.
pub fn predict<T: Real, R: Rng + ?Sized>(particles: &mut [Particle<T>], odometry: &FieldPose<T>, noise: &MotionNoise<T>, rng: &mut R) {
    for p in particles.iter_mut() {
        let step = FieldPose::new(
            odometry.x + gaussian(rng, noise.x),
            odometry.y + gaussian(rng, noise.y),
            odometry.theta + gaussian(rng, noise.theta),
        );
        p.pose = p.pose.compose(&step);
    }
}

/// Particles spread uniformly over a rectangle of the field with uniform
/// headings and equal weights.
pub fn uniform_particles<T: Real, R: Rng + ?Sized>(n: usize, x: (T, T), y: (T, T), rng: &mut R) -> Vec<Particle<T>> {
    let w = T::one() / T::lit(n.max(1) as f64);
    (0..n)
        .map(|_| {
            let px = x.0 + (x.1 - x.0) * T::lit(rng.random::<f64>());
            let py = y.0 + (y.1 - y.0) * T::lit(rng.random::<f64>());
            let th = T::lit(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
            Particle {
                pose: FieldPose::new(px, py, th),
                weight: w,
            }
        })
        .collect()
}

/// Effective sample size `1 / Σ w²` of normalized weights.
pub fn effective_sample_size<T: Real>(particles: &[Particle<T>]) -> T {
    let s: T = particles.iter().map(|p| p.weight * p.weight).sum();
    if s > T::zero() {
        T::one() / s
    } else {
        T::zero()
    }
}

/// Low-variance resampling with a single uniform offset.
pub fn systematic_resample<T: Real>(particles: &[Particle<T>], u0: f64) -> Vec<Particle<T>> {
    let n = particles.len();
    let w = T::one() / T::lit(n as f64);
    let mut out = Vec::with_capacity(n);
    let mut cum = particles[0].weight.to_f64_lossy();
    let mut i = 0;
    for k in 0..n {
        let u = (u0 + k as f64) / n as f64;
        while u > cum && i + 1 < n {
            i += 1;
            cum += particles[i].weight.to_f64_lossy();
        }
        out.push(Particle {
            pose: particles[i].pose,
            weight: w,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "T: Real")]
pub struct UpdateParams<T> {
    pub sigmas: Sigmas<T>,
    /// Residuals beyond this many standard deviations count as outliers.
    pub gate: T,
    /// Resample when the effective sample size drops below this share of N.
    pub ess_ratio: T,
}

impl<T: Real> Default for UpdateParams<T> {
    fn default() -> Self {
        Self {
            sigmas: Sigmas::default(),
            gate: T::lit(3.0),
            ess_ratio: T::lit(0.5),
        }
    }
}

/// Log-likelihood of all observations from one pose. Each observation is
/// scored against its nearest landmark; residuals past the gate are clipped
/// to the gate value so that a single outlier cannot wipe out a hypothesis.
pub fn log_likelihood<T: Real>(obs: &[RobotObservation<T>], pose: &FieldPose<T>, lm: &FieldLandmarks<T>, params: &UpdateParams<T>) -> T {
    let cap = params.gate * params.gate;
    obs.iter()
        .map(|o| {
            let r = best_residual_sq(o, pose, lm, &params.sigmas).unwrap_or(cap);
            -r.min(cap) / T::lit(2.0)
        })
        .sum()
}

/// Weights the particles by the observations, normalizes and resamples when
/// the effective sample size falls below `ess_ratio * N`. Returns whether
/// resampling happened.
pub fn update_and_resample<T: Real>(
    particles: &mut Vec<Particle<T>>,
    obs: &[RobotObservation<T>],
    lm: &FieldLandmarks<T>,
    params: &UpdateParams<T>,
    seed: u64,
) -> Result<bool, LocalizationError> {
    if particles.is_empty() {
        return Err(LocalizationError::Empty);
    }
    if !params.sigmas.is_valid() {
        return Err(LocalizationError::InvalidSigmas);
    }
    let logs: Vec<T> = particles
        .par_iter()
        .map(|p| {
            if p.weight > T::zero() {
                p.weight.ln() + log_likelihood(obs, &p.pose, lm, params)
            } else {
                T::neg_infinity()
            }
        })
        .collect();
    let top = logs.iter().copied().fold(T::neg_infinity(), T::max);
    if !top.is_finite() {
        return Err(LocalizationError::Degenerate);
    }
    for (p, l) in particles.iter_mut().zip(&logs) {
        p.weight = (*l - top).exp();
    }
    let total: T = particles.iter().map(|p| p.weight).sum();
    if !(total > T::zero()) || !total.is_finite() {
        return Err(LocalizationError::Degenerate);
    }
    for p in particles.iter_mut() {
        p.weight /= total;
    }
    let n = T::lit(particles.len() as f64);
    if effective_sample_size(particles) < params.ess_ratio * n {
        let u0 = ChaCha8Rng::seed_from_u64(seed).random::<f64>();
        *particles = systematic_resample(particles, u0);
        Ok(true)
    } else {
        Ok(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PoseEstimate<T> {
    pub pose: FieldPose<T>,
    /// Weighted RMS distance from the mean position, meters.
    pub sigma_xy: T,
    /// Circular standard deviation of the heading, radians.
    pub sigma_theta: T,
}

/// Weighted mean position, circular mean heading and their spreads.
pub fn estimate_pose<T: Real>(particles: &[Particle<T>]) -> PoseEstimate<T> {
    let total: T = particles.iter().map(|p| p.weight).sum();
    let total = if total > T::zero() { total } else { T::one() };
    let (mut mx, mut my, mut sc, mut ss) = (T::zero(), T::zero(), T::zero(), T::zero());
    for p in particles {
        let w = p.weight / total;
        mx += w * p.pose.x;
        my += w * p.pose.y;
        sc += w * p.pose.theta.cos();
        ss += w * p.pose.theta.sin();
    }
    let var: T = particles
        .iter()
        .map(|p| p.weight / total * ((p.pose.x - mx).powi(2) + (p.pose.y - my).powi(2)))
        .sum();
    let r = (sc * sc + ss * ss).sqrt().min(T::one());
    let sigma_theta = if r > T::zero() {
        (-T::lit(2.0) * r.ln()).max(T::zero()).sqrt()
    } else {
        T::infinity()
    };
    PoseEstimate {
        pose: FieldPose::new(mx, my, ss.atan2(sc)),
        sigma_xy: var.max(T::zero()).sqrt(),
        sigma_theta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "T: Real")]
pub struct FilterConfig<T> {
    pub particles: usize,
    pub update: UpdateParams<T>,
    pub motion: MotionNoise<T>,
}

impl<T: Real> Default for FilterConfig<T> {
    fn default() -> Self {
        Self {
            particles: 500,
            update: UpdateParams::default(),
            motion: MotionNoise::default(),
        }
    }
}

/// Monte Carlo localization over a fixed field.
#[derive(Debug, Clone)]
pub struct ParticleFilter<T> {
    pub particles: Vec<Particle<T>>,
    pub config: FilterConfig<T>,
    landmarks: FieldLandmarks<T>,
    rng: ChaCha8Rng,
}

impl<T: Real> ParticleFilter<T> {
    /// Particles spread uniformly over the rectangle `x × y` of the field.
    pub fn uniform_in(spec: &FieldSpec<T>, x: (T, T), y: (T, T), config: FilterConfig<T>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let particles = uniform_particles(config.particles, x, y, &mut rng);
        Self {
            particles,
            config,
            landmarks: FieldLandmarks::new(spec),
            rng,
        }
    }

    /// Particles spread over the whole field.
    pub fn uniform(spec: &FieldSpec<T>, config: FilterConfig<T>, seed: u64) -> Self {
        let (hl, hw) = (spec.half_length(), spec.half_width());
        Self::uniform_in(spec, (-hl, hl), (-hw, hw), config, seed)
    }

    /// Particles spread over the own half (`x < 0`), where a robot enters the field.
    pub fn own_half(spec: &FieldSpec<T>, config: FilterConfig<T>, seed: u64) -> Self {
        let (hl, hw) = (spec.half_length(), spec.half_width());
        Self::uniform_in(spec, (-hl, T::zero()), (-hw, hw), config, seed)
    }

    pub fn landmarks(&self) -> &FieldLandmarks<T> {
        &self.landmarks
    }

    pub fn predict(&mut self, odometry: &FieldPose<T>) {
        let noise = self.config.motion;
        predict(&mut self.particles, odometry, &noise, &mut self.rng);
    }

    pub fn update(&mut self, obs: &[RobotObservation<T>]) -> Result<bool, LocalizationError> {
        let seed = self.rng.next_u64();
        update_and_resample(&mut self.particles, obs, &self.landmarks, &self.config.update, seed)
    }

    pub fn step(&mut self, odometry: &FieldPose<T>, obs: &[RobotObservation<T>]) -> Result<PoseEstimate<T>, LocalizationError> {
        self.predict(odometry);
        self.update(obs)?;
        Ok(self.estimate())
    }

    pub fn estimate(&self) -> PoseEstimate<T> {
        estimate_pose(&self.particles)
    }
}

/// Position and heading error of an estimate against ground truth.
pub fn pose_error<T: Real>(estimate: &FieldPose<T>, truth: &FieldPose<T>) -> (T, T) {
    (
        estimate.position().dist(truth.position()),
        wrap_angle(estimate.theta - truth.theta).abs(),
    )
}
