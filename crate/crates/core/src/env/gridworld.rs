use super::{Start, TabularEnv};
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;

/// Moves available in the gridworld, in action-index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Up = 0,
    Right = 1,
    Down = 2,
    Left = 3,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [Self::Up, Self::Right, Self::Down, Self::Left];
}

/// Deterministic `width x height` gridworld with `γ = 1`.
///
/// State `y * width + x`. Off-grid moves leave the state unchanged and every
/// move from a non-terminal state pays `step_reward`.
pub fn gridworld_mdp(
    width: usize,
    height: usize,
    step_reward: f64,
    terminals: &[(usize, usize)],
) -> Result<TabularMdp> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter {
            name: "grid size",
            value: 0.0,
            expected: "positive width and height",
        });
    }
    if terminals.is_empty() {
        return Err(Error::InvalidParameter {
            name: "terminals",
            value: 0.0,
            expected: "at least one terminal cell",
        });
    }
    let n = width * height;
    let mut b = TabularMdp::builder(n, 4, 1.0);
    for &(x, y) in terminals {
        if x >= width || y >= height {
            return Err(Error::StateOutOfRange {
                index: y * width + x,
                n_states: n,
            });
        }
        b.set_terminal(y * width + x);
    }
    let is_terminal: alloc::vec::Vec<bool> = (0..n)
        .map(|s| terminals.iter().any(|&(x, y)| y * width + x == s))
        .collect();
    for s in 0..n {
        if is_terminal[s] {
            continue;
        }
        let (x, y) = (s % width, s / width);
        for action in GridAction::ALL {
            let (nx, ny) = match action {
                GridAction::Up => (x, y.saturating_sub(1)),
                GridAction::Right => ((x + 1).min(width - 1), y),
                GridAction::Down => (x, (y + 1).min(height - 1)),
                GridAction::Left => (x.saturating_sub(1), y),
            };
            b.add(s, action as usize, ny * width + nx, 1.0, step_reward);
        }
    }
    b.build()
}

/// Gridworld environment starting uniformly among non-terminal cells,
/// paired with its model.
pub fn make_gridworld(
    width: usize,
    height: usize,
    step_reward: f64,
    terminals: &[(usize, usize)],
) -> Result<(TabularEnv, TabularMdp)> {
    let mdp = gridworld_mdp(width, height, step_reward, terminals)?;
    let env = TabularEnv::new(mdp.clone(), Start::UniformNonTerminal)?;
    Ok((env, mdp))
}
