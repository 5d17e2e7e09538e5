/// An engine-to-monitor record.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub kind: OutcomeKind,
    /// Nanoseconds since the Unix epoch.
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeKind {
    LevelChange {
        level: String,
        ordinal: usize,
        gravity: f64,
    },
    Alert {
        text: String,
    },
}

impl Outcome {
    pub fn alert(text: impl Into<String>, timestamp: i64) -> Self {
        Self {
            kind: OutcomeKind::Alert { text: text.into() },
            timestamp,
        }
    }

    pub fn level_change(level: impl Into<String>, ordinal: usize, gravity: f64, timestamp: i64) -> Self {
        Self {
            kind: OutcomeKind::LevelChange {
                level: level.into(),
                ordinal,
                gravity,
            },
            timestamp,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match &self.kind {
            OutcomeKind::Alert { text } => Some(text),
            OutcomeKind::LevelChange { .. } => None,
        }
    }

    pub fn level(&self) -> Option<&str> {
        match &self.kind {
            OutcomeKind::LevelChange { level, .. } => Some(level),
            OutcomeKind::Alert { .. } => None,
        }
    }
}
