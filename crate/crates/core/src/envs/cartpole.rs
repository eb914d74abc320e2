//! Cart-pole balancing with the classic explicit-Euler dynamics.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EnvOptions, EnvSpec, Observation, StepResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartPoleParams {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Half the pole length.
    pub half_length: f64,
    pub force: f64,
    pub dt: f64,
    pub angle_limit: f64,
    pub position_limit: f64,
    pub init_range: f64,
}

impl Default for CartPoleParams {
    fn default() -> Self {
        CartPoleParams {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            half_length: 0.5,
            force: 10.0,
            dt: 0.02,
            angle_limit: 12.0 * 2.0 * std::f64::consts::PI / 360.0,
            position_limit: 2.4,
            init_range: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartPoleState {
    pub cart_position: f64,
    pub cart_velocity: f64,
    pub pole_angle: f64,
    pub pole_tip_velocity: f64,
    pub steps_taken: usize,
}

impl CartPoleState {
    pub fn encode(&self) -> Observation {
        vec![
            self.cart_position,
            self.cart_velocity,
            self.pole_angle,
            self.pole_tip_velocity,
        ]
    }

    /// One Euler step under a signed horizontal force.
    pub fn integrate(&self, p: &CartPoleParams, force: f64) -> CartPoleState {
        let total_mass = p.cart_mass + p.pole_mass;
        let pole_mass_length = p.pole_mass * p.half_length;
        let (sin, cos) = self.pole_angle.sin_cos();
        let temp = (force + pole_mass_length * self.pole_tip_velocity.powi(2) * sin) / total_mass;
        let angle_acc = (p.gravity * sin - cos * temp)
            / (p.half_length * (4.0 / 3.0 - p.pole_mass * cos.powi(2) / total_mass));
        let cart_acc = temp - pole_mass_length * angle_acc * cos / total_mass;
        CartPoleState {
            cart_position: self.cart_position + p.dt * self.cart_velocity,
            cart_velocity: self.cart_velocity + p.dt * cart_acc,
            pole_angle: self.pole_angle + p.dt * self.pole_tip_velocity,
            pole_tip_velocity: self.pole_tip_velocity + p.dt * angle_acc,
            steps_taken: self.steps_taken + 1,
        }
    }

    pub fn out_of_bounds(&self, p: &CartPoleParams) -> bool {
        self.cart_position.abs() > p.position_limit || self.pole_angle.abs() > p.angle_limit
    }
}

#[derive(Debug, Clone)]
pub struct CartPole {
    params: CartPoleParams,
    rng: ChaCha8Rng,
    max_steps: usize,
    state: CartPoleState,
    done: bool,
}

pub const CARTPOLE_MAX_STEPS: usize = 3000;

impl CartPole {
    pub fn new(seed: u64, options: EnvOptions) -> CartPole {
        CartPole {
            params: CartPoleParams::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_steps: options.max_steps.unwrap_or(CARTPOLE_MAX_STEPS),
            state: CartPoleState::default(),
            done: false,
        }
    }

    pub fn params(&self) -> &CartPoleParams {
        &self.params
    }

    pub fn spec(&self) -> EnvSpec {
        EnvSpec {
            action_count: 2,
            max_steps: self.max_steps,
            max_total_reward: self.max_steps as f64,
            obs_length: 4,
        }
    }

    pub fn state(&self) -> &CartPoleState {
        &self.state
    }

    pub fn set_state(&mut self, state: CartPoleState) {
        self.state = state;
        self.done = false;
    }

    pub fn reset(&mut self) -> Observation {
        let r = self.params.init_range;
        self.state = CartPoleState {
            cart_position: self.rng.gen_range(-r..r),
            cart_velocity: self.rng.gen_range(-r..r),
            pole_angle: self.rng.gen_range(-r..r),
            pole_tip_velocity: self.rng.gen_range(-r..r),
            steps_taken: 0,
        };
        self.done = false;
        self.state.encode()
    }

    /// Action 0 pushes left, 1 pushes right. Every step, including the one
    /// that ends the episode, pays +1.
    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        if action >= 2 {
            return Err(Error::ActionOutOfRange { action, count: 2 });
        }
        if self.done {
            return Err(Error::EpisodeDone);
        }
        let force = if action == 1 { self.params.force } else { -self.params.force };
        self.state = self.state.integrate(&self.params, force);
        let terminal = self.state.out_of_bounds(&self.params);
        let truncated = !terminal && self.state.steps_taken >= self.max_steps;
        self.done = terminal || truncated;
        Ok(StepResult {
            observation: self.state.encode(),
            reward: 1.0,
            done: self.done,
            truncated,
            success: false,
        })
    }
}
