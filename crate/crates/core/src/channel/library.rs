use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{pl_from_kraus, pl_from_unitary, PauliLiouvilleMap, KRAUS_TP_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, RMatrix};
use crate::pauli::{basis_size, MAX_DENSE_QUBITS};

/// Standard gates available by name in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateName {
    I,
    X,
    Y,
    Z,
    H,
    S,
    #[serde(rename = "SDG")]
    Sdg,
    #[serde(rename = "SX")]
    SqrtX,
    T,
    #[serde(rename = "TDG")]
    Tdg,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "CZ")]
    Cz,
    #[serde(rename = "SWAP")]
    Swap,
}

impl GateName {
    pub fn arity(self) -> usize {
        match self {
            GateName::Cnot | GateName::Cz | GateName::Swap => 2,
            _ => 1,
        }
    }

    pub fn is_clifford(self) -> bool {
        !matches!(self, GateName::T | GateName::Tdg)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GateName::I => "I",
            GateName::X => "X",
            GateName::Y => "Y",
            GateName::Z => "Z",
            GateName::H => "H",
            GateName::S => "S",
            GateName::Sdg => "SDG",
            GateName::SqrtX => "SX",
            GateName::T => "T",
            GateName::Tdg => "TDG",
            GateName::Cnot => "CNOT",
            GateName::Cz => "CZ",
            GateName::Swap => "SWAP",
        }
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_ascii_uppercase()))
            .map_err(|_| Error::Invalid(format!("unknown gate {s:?}")))
    }
}

/// Dense unitary of a named gate. Two-qubit gates use the first qubit as
/// control and the leftmost tensor factor.
pub fn gate_unitary(g: GateName) -> CMatrix {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let two = |a: [num_complex::Complex64; 4]| CMatrix::from_row_slice(2, 2, &a);
    match g {
        GateName::I => CMatrix::identity(2, 2),
        GateName::X => two([z, o, o, z]),
        GateName::Y => two([z, c(0.0, -1.0), c(0.0, 1.0), z]),
        GateName::Z => two([o, z, z, -o]),
        GateName::H => two([c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
        GateName::S => two([o, z, z, c(0.0, 1.0)]),
        GateName::Sdg => two([o, z, z, c(0.0, -1.0)]),
        GateName::SqrtX => rotation_unitary([1.0, 0.0, 0.0], PI / 4.0),
        GateName::T => t_unitary(),
        GateName::Tdg => t_unitary().adjoint(),
        GateName::Cnot => {
            let mut m = CMatrix::zeros(4, 4);
            for (r, col) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
                m[(r, col)] = o;
            }
            m
        }
        GateName::Cz => CMatrix::from_diagonal(&DVector::from_vec(vec![o, o, o, -o])),
        GateName::Swap => {
            let mut m = CMatrix::zeros(4, 4);
            for (r, col) in [(0, 0), (2, 1), (1, 2), (3, 3)] {
                m[(r, col)] = o;
            }
            m
        }
    }
}

/// `exp(−iθ n·σ)` for a (not necessarily normalized) axis `n`.
pub fn rotation_unitary(axis: [f64; 3], theta: f64) -> CMatrix {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [nx, ny, nz] = axis.map(|a| a / norm);
    let (cs, sn) = (theta.cos(), theta.sin());
    // cos θ · I − i sin θ (nx X + ny Y + nz Z)
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c(cs, -sn * nz),
            c(-sn * ny, -sn * nx),
            c(sn * ny, -sn * nx),
            c(cs, sn * nz),
        ],
    )
}

/// The T gate in the traceless form `e^{−iπZ/8}`.
pub fn t_unitary() -> CMatrix {
    rotation_unitary([0.0, 0.0, 1.0], PI / 8.0)
}

/// Dense unitary of `u` acting on `targets` of an `n`-qubit register.
pub fn embed_unitary(u: &CMatrix, n: usize, targets: &[usize]) -> Result<CMatrix> {
    let k = targets.len();
    if u.nrows() != 1 << k || u.ncols() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            found: u.nrows(),
        });
    }
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n || targets[..i].contains(&t) {
            return Err(Error::Invalid(format!("bad target list {targets:?} for {n} qubits")));
        }
    }
    let d = 1usize << n;
    // Basis bit of qubit q sits at position n-1-q.
    let local = |b: usize| {
        targets
            .iter()
            .fold(0usize, |acc, &t| (acc << 1) | ((b >> (n - 1 - t)) & 1))
    };
    let tmask = targets.iter().fold(0usize, |m, &t| m | (1 << (n - 1 - t)));
    let mut out = CMatrix::zeros(d, d);
    for col in 0..d {
        for row in 0..d {
            if row & !tmask == col & !tmask {
                out[(row, col)] = u[(local(row), local(col))];
            }
        }
    }
    Ok(out)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::out_of_range("gamma", gamma, "[0, 1]"));
    }
    Ok(())
}

/// `ρ ↦ δρ + (1−δ)𝕀/d`, PL `diag(1, δ, …, δ)`.
pub fn depolarizing(n: usize, delta: f64) -> Result<PauliLiouvilleMap> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    let size = basis_size(n);
    let lo = -1.0 / (size as f64 - 1.0);
    if !(lo..=1.0).contains(&delta) {
        return Err(Error::out_of_range("delta", delta, format!("[{lo}, 1]")));
    }
    let mut diag = vec![delta; size];
    diag[0] = 1.0;
    PauliLiouvilleMap::new(n, RMatrix::from_diagonal(&DVector::from_vec(diag)))
}

/// `ρ ↦ (1+γ)/2 ρ + (1−γ)/2 ZρZ` on qubit `target`.
pub fn dephasing(n: usize, target: usize, gamma: f64) -> Result<PauliLiouvilleMap> {
    check_gamma(gamma)?;
    let single = PauliLiouvilleMap::new(
        1,
        RMatrix::from_diagonal(&DVector::from_vec(vec![1.0, gamma, gamma, 1.0])),
    )?;
    single.embed(n, target)
}

/// Amplitude damping towards `|0⟩` with decay probability `γ` on qubit `target`.
pub fn amplitude_damping(n: usize, target: usize, gamma: f64) -> Result<PauliLiouvilleMap> {
    check_gamma(gamma)?;
    let z = c(0.0, 0.0);
    let k0 = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c((1.0 - gamma).sqrt(), 0.0)]);
    let k1 = CMatrix::from_row_slice(2, 2, &[z, c(gamma.sqrt(), 0.0), z, z]);
    pl_from_kraus(&[k0, k1])?.embed(n, target)
}

/// CPTP map from a Haar-random isometric dilation into an `env_dim`
/// environment (default `d²`).
pub fn random_cptp(n: usize, seed: u64, env_dim: Option<usize>) -> Result<PauliLiouvilleMap> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    let d = 1usize << n;
    let env = env_dim.unwrap_or(d * d);
    if env == 0 {
        return Err(Error::Invalid("environment dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = linalg::haar_isometry(d * env, d, &mut rng);
    let kraus: Vec<CMatrix> = (0..env)
        .map(|e| CMatrix::from_fn(d, d, |a, b| v[(a * env + e, b)]))
        .collect();
    pl_from_kraus(&kraus)
}

fn default_qubits() -> usize {
    1
}

fn default_targets() -> Vec<usize> {
    Vec::new()
}

/// Serializable description of a channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ChannelSpec {
    Depolarizing {
        delta: f64,
        #[serde(default = "default_qubits")]
        qubits: usize,
    },
    Dephasing {
        gamma: f64,
        #[serde(default = "default_qubits")]
        qubits: usize,
        #[serde(default)]
        target: usize,
    },
    AmplitudeDamping {
        gamma: f64,
        #[serde(default = "default_qubits")]
        qubits: usize,
        #[serde(default)]
        target: usize,
    },
    Unitary {
        matrix: Vec<Vec<[f64; 2]>>,
    },
    Kraus {
        operators: Vec<Vec<Vec<[f64; 2]>>>,
    },
    Pl {
        matrix: Vec<Vec<f64>>,
    },
    RandomCptp {
        #[serde(default = "default_qubits")]
        qubits: usize,
        seed: u64,
        #[serde(default)]
        env_dim: Option<usize>,
    },
    /// A named gate, e.g. `{"name": "H"}` or `{"name": "CNOT", "qubits": 3, "targets": [0, 2]}`.
    Gate {
        name: GateName,
        #[serde(default = "default_qubits")]
        qubits: usize,
        #[serde(default = "default_targets")]
        targets: Vec<usize>,
    },
}

impl ChannelSpec {
    pub fn identity(n: usize) -> Self {
        ChannelSpec::Depolarizing {
            delta: 1.0,
            qubits: n,
        }
    }

    pub fn gate(name: GateName) -> Self {
        ChannelSpec::Gate {
            name,
            qubits: name.arity(),
            targets: Vec::new(),
        }
    }
}

pub fn make_channel(spec: &ChannelSpec) -> Result<PauliLiouvilleMap> {
    match spec {
        ChannelSpec::Depolarizing { delta, qubits } => depolarizing(*qubits, *delta),
        ChannelSpec::Dephasing {
            gamma,
            qubits,
            target,
        } => dephasing(*qubits, *target, *gamma),
        ChannelSpec::AmplitudeDamping {
            gamma,
            qubits,
            target,
        } => amplitude_damping(*qubits, *target, *gamma),
        ChannelSpec::Unitary { matrix } => {
            let u = linalg::cmatrix_from_pairs(matrix)
                .ok_or_else(|| Error::Invalid("ragged unitary matrix".into()))?;
            pl_from_unitary(&u)
        }
        ChannelSpec::Kraus { operators } => {
            let ops = operators
                .iter()
                .map(|m| {
                    linalg::cmatrix_from_pairs(m)
                        .ok_or_else(|| Error::Invalid("ragged Kraus operator".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            let d = ops.first().map_or(0, |k| k.nrows());
            let mut sum = CMatrix::zeros(d, d);
            for k in &ops {
                if k.nrows() == d && k.ncols() == d {
                    sum += k.adjoint() * k;
                }
            }
            let deviation = (sum - CMatrix::identity(d, d))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if deviation > KRAUS_TP_TOL {
                return Err(Error::NotTracePreserving { deviation });
            }
            pl_from_kraus(&ops)
        }
        ChannelSpec::Pl { matrix } => {
            let m = linalg::rmatrix_from_rows(matrix)
                .ok_or_else(|| Error::Invalid("ragged PL matrix".into()))?;
            PauliLiouvilleMap::from_matrix(m)
        }
        ChannelSpec::RandomCptp {
            qubits,
            seed,
            env_dim,
        } => random_cptp(*qubits, *seed, *env_dim),
        ChannelSpec::Gate {
            name,
            qubits,
            targets,
        } => {
            let targets: Vec<usize> = if targets.is_empty() {
                (0..name.arity()).collect()
            } else {
                targets.clone()
            };
            let u = embed_unitary(&gate_unitary(*name), *qubits, &targets)?;
            pl_from_unitary(&u)
        }
    }
}
