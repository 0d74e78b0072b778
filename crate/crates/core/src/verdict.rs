use serde::Serialize;

/// Three-valued outcome of a budgeted check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "evidence", rename_all = "snake_case")]
pub enum Verdict<P, R> {
    Proved(P),
    Refuted(R),
    Unknown { budget: u32 },
}

impl<P, R> Verdict<P, R> {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    pub fn proved(self) -> Option<P> {
        match self {
            Verdict::Proved(p) => Some(p),
            _ => None,
        }
    }

    pub fn refuted(self) -> Option<R> {
        match self {
            Verdict::Refuted(r) => Some(r),
            _ => None,
        }
    }

    pub fn map<P2, R2>(self, f: impl FnOnce(P) -> P2, g: impl FnOnce(R) -> R2) -> Verdict<P2, R2> {
        match self {
            Verdict::Proved(p) => Verdict::Proved(f(p)),
            Verdict::Refuted(r) => Verdict::Refuted(g(r)),
            Verdict::Unknown { budget } => Verdict::Unknown { budget },
        }
    }

    /// Erases the evidence.
    pub fn plain(&self) -> Verdict<(), ()> {
        match self {
            Verdict::Proved(_) => Verdict::Proved(()),
            Verdict::Refuted(_) => Verdict::Refuted(()),
            Verdict::Unknown { budget } => Verdict::Unknown { budget: *budget },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Proved(_) => "proved",
            Verdict::Refuted(_) => "refuted",
            Verdict::Unknown { .. } => "unknown",
        }
    }

    /// Process exit code contribution: 0, 1 or 2.
    pub fn code(&self) -> i32 {
        match self {
            Verdict::Proved(_) => 0,
            Verdict::Refuted(_) => 1,
            Verdict::Unknown { .. } => 2,
        }
    }
}

/// Conjunction of plain judgments: any refutation wins, then any unknown.
pub fn all_of(items: impl IntoIterator<Item = Verdict<(), ()>>, budget: u32) -> Verdict<(), ()> {
    let mut unknown = false;
    for v in items {
        match v {
            Verdict::Refuted(_) => return Verdict::Refuted(()),
            Verdict::Unknown { .. } => unknown = true,
            Verdict::Proved(_) => {}
        }
    }
    if unknown {
        Verdict::Unknown { budget }
    } else {
        Verdict::Proved(())
    }
}

/// Disjunction: any proof wins, refuted only when every branch is refuted.
pub fn any_of(items: impl IntoIterator<Item = Verdict<(), ()>>, budget: u32) -> Verdict<(), ()> {
    let mut unknown = false;
    for v in items {
        match v {
            Verdict::Proved(_) => return Verdict::Proved(()),
            Verdict::Unknown { .. } => unknown = true,
            Verdict::Refuted(_) => {}
        }
    }
    if unknown {
        Verdict::Unknown { budget }
    } else {
        Verdict::Refuted(())
    }
}
