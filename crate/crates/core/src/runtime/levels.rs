//! The alert-level state machine.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSpec {
    pub name: String,
    pub soft: bool,
}

impl LevelSpec {
    pub fn new(name: impl Into<String>, soft: bool) -> Self {
        Self {
            name: name.into(),
            soft,
        }
    }
}

/// Result of asking the machine to move to a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// Target equals the current level; nothing happens.
    Same,
    /// Allowed move from `from` to `to`, not yet committed.
    Move { from: usize, to: usize },
    /// Out of range or forbidden.
    Rejected,
}

#[derive(Debug, Clone)]
pub struct LevelMachine {
    levels: Vec<LevelSpec>,
    current: usize,
}

impl LevelMachine {
    /// Starts at the first declared level.
    pub fn new(levels: Vec<LevelSpec>) -> Self {
        Self { levels, current: 0 }
    }

    pub fn levels(&self) -> &[LevelSpec] {
        &self.levels
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn current_name(&self) -> Option<&str> {
        self.levels.get(self.current).map(|l| l.name.as_str())
    }

    pub fn name(&self, ordinal: i64) -> Option<&str> {
        usize::try_from(ordinal)
            .ok()
            .and_then(|o| self.levels.get(o))
            .map(|l| l.name.as_str())
    }

    /// Escalation is always allowed; a soft level may step down to the
    /// level immediately below it and no further.
    pub fn allowed(&self, from: usize, to: usize) -> bool {
        if to >= self.levels.len() || from >= self.levels.len() {
            return false;
        }
        to > from || (self.levels[from].soft && to + 1 == from)
    }

    pub fn plan(&self, target: i64) -> Transition {
        let Ok(to) = usize::try_from(target) else {
            return Transition::Rejected;
        };
        if to >= self.levels.len() {
            Transition::Rejected
        } else if to == self.current {
            Transition::Same
        } else if self.allowed(self.current, to) {
            Transition::Move {
                from: self.current,
                to,
            }
        } else {
            Transition::Rejected
        }
    }

    pub fn commit(&mut self, to: usize) {
        assert!(to < self.levels.len(), "level ordinal out of range");
        self.current = to;
    }

    /// Gravity reported to the monitor: ordinal over the highest ordinal.
    pub fn gravity(&self, ordinal: usize) -> f64 {
        gravity(ordinal, self.levels.len())
    }
}

pub fn gravity(ordinal: usize, count: usize) -> f64 {
    if count <= 1 {
        0.0
    } else {
        ordinal as f64 / (count - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example() -> LevelMachine {
        LevelMachine::new(vec![
            LevelSpec::new("A", false),
            LevelSpec::new("B", false),
            LevelSpec::new("C", true),
            LevelSpec::new("D", false),
        ])
    }

    #[test]
    fn edge_set() {
        let m = example();
        let mut edges = Vec::new();
        for from in 0..4 {
            for to in 0..4 {
                if from != to && m.allowed(from, to) {
                    edges.push((from, to));
                }
            }
        }
        assert_eq!(edges, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 1), (2, 3)]);
    }

    #[test]
    fn plan_outcomes() {
        let mut m = example();
        assert_eq!(m.plan(0), Transition::Same);
        assert_eq!(m.plan(4), Transition::Rejected);
        assert_eq!(m.plan(-1), Transition::Rejected);
        m.commit(2);
        assert_eq!(m.plan(1), Transition::Move { from: 2, to: 1 });
        assert_eq!(m.plan(0), Transition::Rejected);
    }

    #[test]
    fn gravity_rule() {
        assert_eq!(gravity(1, 2), 1.0);
        assert_eq!(gravity(0, 1), 0.0);
        assert_eq!(gravity(1, 3), 0.5);
    }

    proptest! {
        #[test]
        fn committed_sequences_respect_the_transition_predicate(
            soft in proptest::collection::vec(any::<bool>(), 1..8),
            targets in proptest::collection::vec(-2i64..10, 0..64),
        ) {
            let specs = soft.iter().enumerate().map(|(i, s)| LevelSpec::new(format!("L{i}"), *s)).collect();
            let mut m = LevelMachine::new(specs);
            for t in targets {
                let before = m.current();
                if let Transition::Move { from, to } = m.plan(t) {
                    prop_assert_eq!(from, before);
                    prop_assert!(to > from || (m.levels()[from].soft && to + 1 == from));
                    m.commit(to);
                }
                prop_assert!(m.current() < m.levels().len());
            }
        }
    }
}
