//! Memoryless strategies over observation classes.

use crate::net::TransitionId;

/// What the user does in one observation class: fire a specific controllable
/// transition, or idle (the ε move).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Selection {
    Idle,
    Fire(TransitionId),
}

/// Map from observation class to a selection. Classes without an explicit
/// entry idle.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Strategy {
    choices: Vec<Selection>,
}

impl Strategy {
    pub fn idle(class_count: usize) -> Strategy {
        Strategy {
            choices: vec![Selection::Idle; class_count],
        }
    }

    pub fn set(&mut self, class: usize, sel: Selection) {
        self.choices[class] = sel;
    }

    pub fn get(&self, class: usize) -> Selection {
        self.choices.get(class).copied().unwrap_or(Selection::Idle)
    }

    pub fn class_count(&self) -> usize {
        self.choices.len()
    }

    pub fn selections(&self) -> impl Iterator<Item = (usize, Selection)> + '_ {
        self.choices.iter().copied().enumerate()
    }
}
