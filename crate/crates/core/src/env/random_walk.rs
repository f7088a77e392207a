use super::{Start, TabularEnv};
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;

/// The undiscounted random-walk chain with `n` non-terminal states.
///
/// States are `0..=n+1`; `0` and `n+1` are terminal. A single action moves
/// left or right with probability 1/2 each, and only the step into the right
/// terminal pays `+1`.
pub fn random_walk_mdp(n: usize) -> Result<TabularMdp> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidParameter {
            name: "n_states",
            value: n as f64,
            expected: "an odd count >= 3",
        });
    }
    let right_end = n + 1;
    let mut b = TabularMdp::builder(n + 2, 1, 1.0).terminal(0).terminal(right_end);
    for s in 1..=n {
        b.add(s, 0, s - 1, 0.5, 0.0);
        let reward = if s + 1 == right_end { 1.0 } else { 0.0 };
        b.add(s, 0, s + 1, 0.5, reward);
    }
    b.build()
}

/// Random-walk environment starting at the center, paired with its model.
pub fn make_random_walk(n: usize) -> Result<(TabularEnv, TabularMdp)> {
    let mdp = random_walk_mdp(n)?;
    let env = TabularEnv::new(mdp.clone(), Start::Fixed(n.div_ceil(2)))?;
    Ok((env, mdp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Environment;
    use crate::mdp::{policy_evaluation_exact, TabularPolicy};

    #[test]
    fn exact_values() {
        let (_, mdp) = make_random_walk(5).unwrap();
        let v = policy_evaluation_exact(&mdp, &TabularPolicy::uniform(7, 1)).unwrap();
        for s in 1..=5 {
            assert!((v[s] - s as f64 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn starts_at_center() {
        let (mut env, _) = make_random_walk(5).unwrap();
        assert_eq!(env.reset(0), 3);
        let (mut env, _) = make_random_walk(19).unwrap();
        assert_eq!(env.reset(9), 10);
    }

    #[test]
    fn rejects_even_or_small() {
        assert!(random_walk_mdp(4).is_err());
        assert!(random_walk_mdp(1).is_err());
    }
}
