use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Violated,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Holds => "holds",
            Status::Violated => "violated",
            Status::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Where a checked inequality was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Location {
    #[serde(rename = "t")]
    Point(f64),
    #[serde(rename = "s")]
    Transform(f64),
    #[serde(rename = "m")]
    Moment(u32),
    #[serde(rename = "derivative")]
    Derivative { n: u32, s: f64 },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Point(t) => write!(f, "t={t}"),
            Location::Transform(s) => write!(f, "s={s}"),
            Location::Moment(m) => write!(f, "m={m}"),
            Location::Derivative { n, s } => write!(f, "n={n}, s={s}"),
        }
    }
}

/// A location where the claimed inequality `lhs >= rhs` (in the checker's
/// orientation) fails, with both sides recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub location: Location,
    pub lhs: f64,
    pub rhs: f64,
}

impl Witness {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub status: Status,
    /// Smallest slack over the checked set; negative when violated.
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub label: String,
}

impl OrderVerdict {
    pub fn holds(margin: f64, label: impl Into<String>) -> Self {
        OrderVerdict {
            status: Status::Holds,
            margin,
            witness: None,
            reason: None,
            label: label.into(),
        }
    }

    pub fn violated(witness: Witness, margin: f64, label: impl Into<String>) -> Self {
        OrderVerdict {
            status: Status::Violated,
            margin,
            witness: Some(witness),
            reason: None,
            label: label.into(),
        }
    }

    pub fn inconclusive(reason: impl Into<String>, label: impl Into<String>) -> Self {
        OrderVerdict {
            status: Status::Inconclusive,
            margin: f64::NAN,
            witness: None,
            reason: Some(reason.into()),
            label: label.into(),
        }
    }

    pub fn is_holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn is_violated(&self) -> bool {
        self.status == Status::Violated
    }
}

/// Running minimum over pointwise slacks `lhs - rhs`. Each slack may be
/// widened by an evaluation error; only the widened slack can convict.
#[derive(Debug, Clone)]
pub(crate) struct MarginTracker {
    pub min: f64,
    pub min_widened: f64,
    pub worst: Option<Witness>,
    pub count: usize,
}

impl MarginTracker {
    pub fn new() -> Self {
        MarginTracker {
            min: f64::INFINITY,
            min_widened: f64::INFINITY,
            worst: None,
            count: 0,
        }
    }

    pub fn observe(&mut self, location: Location, lhs: f64, rhs: f64) {
        self.observe_slack(location, lhs, rhs, lhs - rhs, 0.0);
    }

    pub fn observe_with_error(&mut self, location: Location, lhs: f64, rhs: f64, err: f64) {
        self.observe_slack(location, lhs, rhs, lhs - rhs, err);
    }

    pub fn observe_slack(&mut self, location: Location, lhs: f64, rhs: f64, slack: f64, err: f64) {
        self.count += 1;
        self.min = self.min.min(slack);
        if slack + err < self.min_widened {
            self.min_widened = slack + err;
            self.worst = Some(Witness { location, lhs, rhs });
        }
    }

    /// Violated when some widened slack is below `-eps`; Inconclusive when
    /// only raw slacks are; Holds otherwise.
    pub fn verdict(self, eps: f64, label: &str) -> OrderVerdict {
        match self.worst {
            None => OrderVerdict::inconclusive("no evaluation points", label),
            Some(w) if self.min_widened < -eps => OrderVerdict::violated(w, self.min, label),
            Some(_) if self.min < -eps => OrderVerdict::inconclusive(
                format!("apparent violation of {} lies within evaluation error", -self.min),
                label,
            ),
            Some(_) => OrderVerdict::holds(self.min, label),
        }
    }
}
