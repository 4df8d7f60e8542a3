use serde_json::{json, Value};

/// Everything that can stop a command, with its exit code and JSON form.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Core(rbtomo::Error),
    Io(std::io::Error),
}

impl Failure {
    pub fn validation(msg: impl Into<String>) -> Self {
        Failure::Validation(msg.into())
    }

    /// 2 for bad input, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Core(e) if e.is_numerical() => 3,
            Failure::Core(e) if e.is_io() => 1,
            Failure::Core(_) => 2,
            Failure::Io(_) => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        use rbtomo::Error as E;
        let (kind, details) = match self {
            Failure::Validation(_) => ("validation", json!({})),
            Failure::Io(_) => ("io", json!({})),
            Failure::Core(e) => match e {
                // N′ has a row (1, 0, …, 0), so its largest singular value is
                // at least 1 and κ ≥ 1/σ_min.
                E::Singular {
                    singular_value,
                    threshold,
                } => (
                    "singular",
                    json!({
                        "singular_value": singular_value,
                        "threshold": threshold,
                        "kappa_at_least": if *singular_value > 0.0 { json!(1.0 / singular_value) } else { Value::Null },
                    }),
                ),
                E::RankDeficient { rank, required } => {
                    ("rank_deficient", json!({ "rank": rank, "required": required }))
                }
                E::Divergent(_) => ("divergent", json!({})),
                E::BudgetExceeded { needed, limit } => {
                    ("budget_exceeded", json!({ "needed": needed, "limit": limit }))
                }
                E::Inconsistent(_) => ("inconsistent", json!({})),
                E::TooManyTGates { t, t_max } => ("too_many_t_gates", json!({ "t": t, "t_max": t_max })),
                E::OutOfRange { what, value, range } => {
                    ("out_of_range", json!({ "what": what, "value": value, "range": range }))
                }
                E::Io(_) | E::Csv(_) => ("io", json!({})),
                E::Json(_) => ("schema", json!({})),
                _ => ("invalid", json!({})),
            },
        };
        json!({ "error": { "kind": kind, "message": self.to_string(), "details": details, "exit_code": self.exit_code() } })
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "{m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<rbtomo::Error> for Failure {
    fn from(e: rbtomo::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Validation(format!("config does not match the schema: {e}"))
    }
}
