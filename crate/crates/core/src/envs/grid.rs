//! Fully observed Crossing and DoorKey gridworlds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EnvOptions, EnvSpec, Observation, StepResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    Crossing,
    DoorKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Empty,
    Wall,
    Lava,
    Goal,
    Key,
    DoorLocked,
    DoorOpen,
}

impl Cell {
    /// (object kind, color, state) triple written into the observation image.
    fn encoding(self) -> [f64; 3] {
        match self {
            Cell::Empty => [1.0, 0.0, 0.0],
            Cell::Wall => [2.0, 5.0, 0.0],
            Cell::DoorOpen => [4.0, 4.0, 0.0],
            Cell::DoorLocked => [4.0, 4.0, 2.0],
            Cell::Key => [5.0, 4.0, 0.0],
            Cell::Goal => [8.0, 1.0, 0.0],
            Cell::Lava => [9.0, 0.0, 0.0],
        }
    }

    fn glyph(self) -> char {
        match self {
            Cell::Empty => '.',
            Cell::Wall => '#',
            Cell::Lava => '~',
            Cell::Goal => 'G',
            Cell::Key => 'K',
            Cell::DoorLocked => 'D',
            Cell::DoorOpen => '/',
        }
    }
}

const AGENT_ENCODING: [f64; 3] = [10.0, 0.0, 0.0];

/// Heading, numbered clockwise from east.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Right = 0,
    Down = 1,
    Left = 2,
    Up = 3,
}

impl Direction {
    pub fn from_index(i: usize) -> Direction {
        match i % 4 {
            0 => Direction::Right,
            1 => Direction::Down,
            2 => Direction::Left,
            _ => Direction::Up,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn turn_left(self) -> Direction {
        Direction::from_index(self.index() + 3)
    }

    pub fn turn_right(self) -> Direction {
        Direction::from_index(self.index() + 1)
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Direction::Right => (0, 1),
            Direction::Down => (1, 0),
            Direction::Left => (0, -1),
            Direction::Up => (-1, 0),
        }
    }
}

pub const ACTION_LEFT: usize = 0;
pub const ACTION_RIGHT: usize = 1;
pub const ACTION_FORWARD: usize = 2;
pub const ACTION_PICKUP: usize = 3;
pub const ACTION_TOGGLE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridState {
    pub size: usize,
    /// Row-major, `size * size` cells; the outer ring is wall.
    pub grid: Vec<Cell>,
    pub agent_pos: (usize, usize),
    pub agent_dir: Direction,
    pub carrying_key: bool,
    pub steps_taken: usize,
}

impl GridState {
    fn walled(size: usize) -> GridState {
        let mut grid = vec![Cell::Empty; size * size];
        for r in 0..size {
            for c in 0..size {
                if r == 0 || c == 0 || r == size - 1 || c == size - 1 {
                    grid[r * size + c] = Cell::Wall;
                }
            }
        }
        GridState {
            size,
            grid,
            agent_pos: (1, 1),
            agent_dir: Direction::Right,
            carrying_key: false,
            steps_taken: 0,
        }
    }

    pub fn cell(&self, pos: (usize, usize)) -> Cell {
        self.grid[pos.0 * self.size + pos.1]
    }

    fn set(&mut self, pos: (usize, usize), cell: Cell) {
        self.grid[pos.0 * self.size + pos.1] = cell;
    }

    pub fn count(&self, cell: Cell) -> usize {
        self.grid.iter().filter(|&&c| c == cell).count()
    }

    pub fn front_pos(&self) -> (usize, usize) {
        let (dr, dc) = self.agent_dir.delta();
        (
            (self.agent_pos.0 as isize + dr) as usize,
            (self.agent_pos.1 as isize + dc) as usize,
        )
    }

    pub fn obs_length(size: usize) -> usize {
        4 + size * size * 3
    }

    /// Direction one-hot followed by the `size x size x 3` image, row-major
    /// with the channel innermost. The agent overwrites the cell it stands on.
    pub fn encode(&self) -> Observation {
        let mut obs = vec![0.0; Self::obs_length(self.size)];
        obs[self.agent_dir.index()] = 1.0;
        for (i, cell) in self.grid.iter().enumerate() {
            let base = 4 + i * 3;
            obs[base..base + 3].copy_from_slice(&cell.encoding());
        }
        let base = 4 + (self.agent_pos.0 * self.size + self.agent_pos.1) * 3;
        obs[base..base + 3].copy_from_slice(&AGENT_ENCODING);
        obs
    }

    pub fn render_ascii(&self) -> String {
        let arrow = match self.agent_dir {
            Direction::Right => '>',
            Direction::Down => 'v',
            Direction::Left => '<',
            Direction::Up => '^',
        };
        let mut out = String::with_capacity(self.size * (self.size + 1));
        for r in 0..self.size {
            for c in 0..self.size {
                if (r, c) == self.agent_pos {
                    out.push(arrow);
                } else {
                    out.push(self.cell((r, c)).glyph());
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Generates the Crossing layout: one lava stream (horizontal or vertical)
/// with a single opening, agent top-left facing east, goal bottom-right.
fn generate_crossing(size: usize, rng: &mut ChaCha8Rng) -> GridState {
    let mut state = GridState::walled(size);
    let horizontal = rng.gen_bool(0.5);
    // Strictly between the agent's row/col (1) and the goal's (size - 2).
    let line = rng.gen_range(2..=size - 3);
    let opening = rng.gen_range(1..=size - 2);
    for k in 1..=size - 2 {
        if k == opening {
            continue;
        }
        let pos = if horizontal { (line, k) } else { (k, line) };
        state.set(pos, Cell::Lava);
    }
    state.set((size - 2, size - 2), Cell::Goal);
    state
}

/// Generates the DoorKey layout: a vertical wall splitting the room with a
/// locked door in it; agent and key on the left, goal bottom-right.
fn generate_doorkey(size: usize, rng: &mut ChaCha8Rng) -> GridState {
    let mut state = GridState::walled(size);
    let split = rng.gen_range(2..=size - 3);
    for r in 1..=size - 2 {
        state.set((r, split), Cell::Wall);
    }
    let door_row = rng.gen_range(1..=size - 2);
    state.set((door_row, split), Cell::DoorLocked);
    state.set((size - 2, size - 2), Cell::Goal);

    let left: Vec<(usize, usize)> = (1..=size - 2)
        .flat_map(|r| (1..split).map(move |c| (r, c)))
        .collect();
    let agent_idx = rng.gen_range(0..left.len());
    let mut key_idx = rng.gen_range(0..left.len() - 1);
    if key_idx >= agent_idx {
        key_idx += 1;
    }
    state.agent_pos = left[agent_idx];
    state.agent_dir = Direction::from_index(rng.gen_range(0..4));
    state.set(left[key_idx], Cell::Key);
    state
}

#[derive(Debug, Clone)]
pub struct GridWorld {
    kind: GridKind,
    size: usize,
    rng: ChaCha8Rng,
    options: EnvOptions,
    layout: GridState,
    state: GridState,
    done: bool,
}

impl GridWorld {
    pub fn new(kind: GridKind, size: usize, seed: u64, options: EnvOptions) -> GridWorld {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = Self::generate(kind, size, &mut rng);
        GridWorld {
            kind,
            size,
            rng,
            options,
            state: layout.clone(),
            layout,
            done: false,
        }
    }

    fn generate(kind: GridKind, size: usize, rng: &mut ChaCha8Rng) -> GridState {
        match kind {
            GridKind::Crossing => generate_crossing(size, rng),
            GridKind::DoorKey => generate_doorkey(size, rng),
        }
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn max_steps(&self) -> usize {
        self.options.max_steps.unwrap_or(4 * self.size * self.size)
    }

    pub fn spec(&self) -> EnvSpec {
        EnvSpec {
            action_count: match self.kind {
                GridKind::Crossing => 3,
                GridKind::DoorKey => 5,
            },
            max_steps: self.max_steps(),
            max_total_reward: 1.0,
            obs_length: GridState::obs_length(self.size),
        }
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    /// The layout that fixed-layout resets restore.
    pub fn layout(&self) -> &GridState {
        &self.layout
    }

    pub fn reset(&mut self) -> Observation {
        if self.options.randomize_each_episode {
            self.layout = Self::generate(self.kind, self.size, &mut self.rng);
        }
        self.state = self.layout.clone();
        self.done = false;
        self.state.encode()
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        let count = self.spec().action_count;
        if action >= count {
            return Err(Error::ActionOutOfRange { action, count });
        }
        if self.done {
            return Err(Error::EpisodeDone);
        }
        let s = &mut self.state;
        s.steps_taken += 1;
        let mut reward = 0.0;
        let mut terminal = false;
        let mut success = false;
        match action {
            ACTION_LEFT => s.agent_dir = s.agent_dir.turn_left(),
            ACTION_RIGHT => s.agent_dir = s.agent_dir.turn_right(),
            ACTION_FORWARD => {
                let front = s.front_pos();
                match s.cell(front) {
                    Cell::Empty | Cell::DoorOpen => s.agent_pos = front,
                    Cell::Lava => {
                        s.agent_pos = front;
                        terminal = true;
                    }
                    Cell::Goal => {
                        s.agent_pos = front;
                        terminal = true;
                        success = true;
                        reward = 1.0;
                    }
                    Cell::Wall | Cell::DoorLocked | Cell::Key => {}
                }
            }
            ACTION_PICKUP => {
                let front = s.front_pos();
                if s.cell(front) == Cell::Key && !s.carrying_key {
                    s.set(front, Cell::Empty);
                    s.carrying_key = true;
                }
            }
            ACTION_TOGGLE => {
                let front = s.front_pos();
                if s.cell(front) == Cell::DoorLocked && s.carrying_key {
                    s.set(front, Cell::DoorOpen);
                }
            }
            _ => unreachable!("action range checked above"),
        }
        let truncated = !terminal && s.steps_taken >= self.max_steps();
        self.done = terminal || truncated;
        Ok(StepResult {
            observation: self.state.encode(),
            reward,
            done: self.done,
            truncated,
            success,
        })
    }

    /// Replaces the current state; used by tests and fixture replays.
    pub fn set_state(&mut self, state: GridState) {
        self.state = state;
        self.done = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doorkey(seed: u64) -> GridWorld {
        GridWorld::new(GridKind::DoorKey, 6, seed, EnvOptions::default())
    }

    #[test]
    fn turning_is_cyclic() {
        let mut d = Direction::Right;
        for _ in 0..4 {
            d = d.turn_left();
        }
        assert_eq!(d, Direction::Right);
        assert_eq!(Direction::Up.turn_right(), Direction::Right);
    }

    #[test]
    fn forward_into_wall_is_noop() {
        let mut env = GridWorld::new(GridKind::Crossing, 5, 0, EnvOptions::default());
        env.reset();
        let mut s = env.state().clone();
        s.agent_dir = Direction::Up;
        env.set_state(s.clone());
        let out = env.step(ACTION_FORWARD).unwrap();
        assert_eq!(env.state().agent_pos, s.agent_pos);
        assert_eq!(out.reward, 0.0);
        assert!(!out.done);
    }

    #[test]
    fn key_blocks_forward_until_picked_up() {
        let mut env = doorkey(3);
        env.reset();
        let mut s = env.state().clone();
        // Put the key directly in front of the agent.
        let key_pos = s.grid.iter().position(|&c| c == Cell::Key).unwrap();
        s.grid[key_pos] = Cell::Empty;
        s.agent_pos = (1, 1);
        s.agent_dir = Direction::Down;
        s.set((2, 1), Cell::Key);
        env.set_state(s);
        env.step(ACTION_FORWARD).unwrap();
        assert_eq!(env.state().agent_pos, (1, 1));
        env.step(ACTION_PICKUP).unwrap();
        assert!(env.state().carrying_key);
        assert_eq!(env.state().cell((2, 1)), Cell::Empty);
        env.step(ACTION_FORWARD).unwrap();
        assert_eq!(env.state().agent_pos, (2, 1));
    }

    #[test]
    fn toggle_requires_key() {
        let mut env = doorkey(5);
        env.reset();
        let door = env.state().grid.iter().position(|&c| c == Cell::DoorLocked).unwrap();
        let door = (door / 6, door % 6);
        let mut s = env.state().clone();
        s.agent_pos = (door.0, door.1 - 1);
        s.agent_dir = Direction::Right;
        env.set_state(s);
        env.step(ACTION_TOGGLE).unwrap();
        assert_eq!(env.state().cell(door), Cell::DoorLocked);
        let mut s = env.state().clone();
        s.carrying_key = true;
        env.set_state(s);
        env.step(ACTION_TOGGLE).unwrap();
        assert_eq!(env.state().cell(door), Cell::DoorOpen);
        env.step(ACTION_FORWARD).unwrap();
        assert_eq!(env.state().agent_pos, door);
    }

    #[test]
    fn lava_ends_episode_without_reward() {
        let mut env = GridWorld::new(GridKind::Crossing, 7, 11, EnvOptions::default());
        env.reset();
        let lava = env.state().grid.iter().position(|&c| c == Cell::Lava).unwrap();
        let (r, c) = (lava / 7, lava % 7);
        let mut s = env.state().clone();
        // Approach from whichever side is inside the room and not lava.
        let (pos, dir) = if s.cell((r - 1, c)) == Cell::Empty {
            ((r - 1, c), Direction::Down)
        } else {
            ((r, c - 1), Direction::Right)
        };
        s.agent_pos = pos;
        s.agent_dir = dir;
        env.set_state(s);
        let out = env.step(ACTION_FORWARD).unwrap();
        assert!(out.done && !out.success && !out.truncated);
        assert_eq!(out.reward, 0.0);
        assert!(matches!(env.step(ACTION_LEFT), Err(Error::EpisodeDone)));
    }

    #[test]
    fn truncates_at_step_limit() {
        let mut env = GridWorld::new(GridKind::Crossing, 5, 1, EnvOptions::default());
        env.reset();
        let limit = env.max_steps();
        assert_eq!(limit, 100);
        for i in 0..limit {
            let out = env.step(ACTION_LEFT).unwrap();
            assert_eq!(out.done, i + 1 == limit);
            assert_eq!(out.truncated, i + 1 == limit);
        }
    }

    #[test]
    fn ascii_render_has_one_agent() {
        let env = doorkey(0);
        let text = env.state().render_ascii();
        assert_eq!(text.lines().count(), 6);
        let arrows = text.chars().filter(|c| "<>^v".contains(*c)).count();
        assert_eq!(arrows, 1);
    }
}
