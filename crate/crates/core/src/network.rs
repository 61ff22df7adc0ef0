//! The seven supported network topologies and their dynamical matrices.
//!
//! Each topology fixes a mode count n, a coupling graph, and a rate
//! constraint that forces all reduced eigenvalues to share the common
//! imaginary offset −γ₊ (the prerequisite for spectral degeneracies).  This
//! module validates the constraints, extracts the distinguished rate pair
//! (γ₊, γ₋), and builds both the full 2n×2n block matrix and its reduced
//! n×n scalar-ξ factor.

use crate::blocks::{xi_matrix, CouplingBlock};
use crate::{c, C, CMat, Error, Result};
use serde::{Deserialize, Serialize};

/// Network topology tag.  The mode count and coupling graph are implied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Two coupled modes.
    TwoMode,
    /// Three modes in a chain 1–2–3.
    ThreeModeLinear,
    /// Four modes in a chain with γ₁=γ₂ and γ₃=γ₄ (neighbor modes share
    /// rates).
    FourModeLinearL1,
    /// Four modes in a chain with γ₁=γ₃ and γ₂=γ₄ (alternating rates).
    FourModeLinearL2,
    /// Four modes in a cycle 1–2–3–4–1 with γ₁=γ₂ and γ₃=γ₄.
    FourModeCircular,
    /// Five modes in a chain 1–2–3–4–5.
    FiveModeLinear,
    /// Five modes with mode 5 coupled to all others and the outer square
    /// coupled except along its diagonals (edges: all pairs but 1–3 and 2–4).
    FiveModePyramid,
}

/// All topology tags, in a fixed canonical order.
pub const ALL_TOPOLOGIES: [Topology; 7] = [
    Topology::TwoMode,
    Topology::ThreeModeLinear,
    Topology::FourModeLinearL1,
    Topology::FourModeLinearL2,
    Topology::FourModeCircular,
    Topology::FiveModeLinear,
    Topology::FiveModePyramid,
];

impl Topology {
    /// Number of bosonic modes n.
    pub fn n(self) -> usize {
        match self {
            Topology::TwoMode => 2,
            Topology::ThreeModeLinear => 3,
            Topology::FourModeLinearL1
            | Topology::FourModeLinearL2
            | Topology::FourModeCircular => 4,
            Topology::FiveModeLinear | Topology::FiveModePyramid => 5,
        }
    }

    /// Stable snake_case identifier used by the CLI and output files.
    pub fn label(self) -> &'static str {
        match self {
            Topology::TwoMode => "two_mode",
            Topology::ThreeModeLinear => "three_mode_linear",
            Topology::FourModeLinearL1 => "four_mode_linear_l1",
            Topology::FourModeLinearL2 => "four_mode_linear_l2",
            Topology::FourModeCircular => "four_mode_circular",
            Topology::FiveModeLinear => "five_mode_linear",
            Topology::FiveModePyramid => "five_mode_pyramid",
        }
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ALL_TOPOLOGIES
            .iter()
            .copied()
            .find(|t| t.label() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown topology '{s}' (expected one of: {})",
                    ALL_TOPOLOGIES.map(Topology::label).join(", ")
                ))
            })
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Complete physical input: a topology plus (ε, κ, γ₁…γₙ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// The network topology.
    pub topology: Topology,
    /// Linear coupling strength ε > 0 (uniform over all edges).
    pub epsilon: f64,
    /// Nonlinear coupling strength κ (uniform over all edges).
    pub kappa: f64,
    /// Per-mode damping/amplification rates γ₁…γₙ.
    pub gammas: Vec<f64>,
}

impl SystemParams {
    /// Validates dimensions and finiteness (rate constraints are checked
    /// separately by [`validate_rates`]).
    pub fn new(topology: Topology, epsilon: f64, kappa: f64, gammas: Vec<f64>) -> Result<Self> {
        CouplingBlock::new(epsilon, kappa)?;
        if gammas.len() != topology.n() {
            return Err(Error::InvalidInput(format!(
                "topology {} needs {} rates, got {}",
                topology.label(),
                topology.n(),
                gammas.len()
            )));
        }
        if let Some(g) = gammas.iter().find(|g| !g.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite rate {g}")));
        }
        Ok(Self {
            topology,
            epsilon,
            kappa,
            gammas,
        })
    }

    /// The coupling block (ε, κ) shared by every edge.
    pub fn coupling(&self) -> CouplingBlock {
        CouplingBlock {
            epsilon: self.epsilon,
            kappa: self.kappa,
        }
    }
}

/// A point in the dimensionless parameter plane (κ/ε, γ₋/ε), optionally with
/// a common-rate offset γ₊/ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    /// κ/ε.
    pub kappa_over_eps: f64,
    /// γ₋/ε.
    pub gamma_minus_over_eps: f64,
    /// γ₊/ε (defaults to 0).
    pub gamma_plus_over_eps: f64,
}

impl PlanePoint {
    /// Plane point with γ₊ = 0.
    pub fn new(kappa_over_eps: f64, gamma_minus_over_eps: f64) -> Self {
        Self {
            kappa_over_eps,
            gamma_minus_over_eps,
            gamma_plus_over_eps: 0.0,
        }
    }

    /// Plane point with an explicit γ₊/ε.
    pub fn with_gamma_plus(mut self, gamma_plus_over_eps: f64) -> Self {
        self.gamma_plus_over_eps = gamma_plus_over_eps;
        self
    }
}

/// Dense complex 2n×2n dynamical matrix with its block-layout provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrix {
    /// Matrix dimension 2n.
    pub dim: usize,
    /// The matrix entries.
    pub entries: CMat,
    /// The topology this matrix was built from.
    pub topology: Topology,
}

/// The symmetric coupling graph of a topology as an n×n boolean matrix.
pub fn adjacency(topology: Topology) -> Vec<Vec<bool>> {
    let n = topology.n();
    let mut adj = vec![vec![false; n]; n];
    let mut connect = |i: usize, j: usize| {
        adj[i - 1][j - 1] = true;
        adj[j - 1][i - 1] = true;
    };
    match topology {
        Topology::TwoMode => {
            connect(1, 2);
        }
        Topology::ThreeModeLinear => {
            connect(1, 2);
            connect(2, 3);
        }
        Topology::FourModeLinearL1 | Topology::FourModeLinearL2 => {
            connect(1, 2);
            connect(2, 3);
            connect(3, 4);
        }
        Topology::FourModeCircular => {
            connect(1, 2);
            connect(2, 3);
            connect(3, 4);
            connect(4, 1);
        }
        Topology::FiveModeLinear => {
            connect(1, 2);
            connect(2, 3);
            connect(3, 4);
            connect(4, 5);
        }
        Topology::FiveModePyramid => {
            // All pairs except the square diagonals 1–3 and 2–4.
            connect(1, 2);
            connect(1, 4);
            connect(1, 5);
            connect(2, 3);
            connect(2, 5);
            connect(3, 4);
            connect(3, 5);
            connect(4, 5);
        }
    }
    adj
}

/// Relative tolerance for the rate-constraint equalities.
const RATE_TOL: f64 = 1e-12;

fn check_eq(name: &str, lhs: f64, rhs: f64, scale: f64) -> Result<()> {
    if (lhs - rhs).abs() > RATE_TOL * scale.max(1e-300) {
        Err(Error::ConstraintViolation(format!(
            "{name} (got {lhs} vs {rhs})"
        )))
    } else {
        Ok(())
    }
}

/// Checks the topology's rate constraints and returns the distinguished pair
/// (γ₊, γ₋), defined through 4γ± = γ_a ± γ_b where (a, b) is the topology's
/// distinguished rate group pair.
pub fn validate_rates(params: &SystemParams) -> Result<(f64, f64)> {
    let g = &params.gammas;
    let scale = g.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let (ga, gb) = match params.topology {
        Topology::TwoMode => (g[0], g[1]),
        Topology::ThreeModeLinear => {
            check_eq("2*gamma2 = gamma1 + gamma3", 2.0 * g[1], g[0] + g[2], scale)?;
            (g[0], g[2])
        }
        Topology::FourModeLinearL1 | Topology::FourModeCircular => {
            check_eq("gamma1 = gamma2", g[0], g[1], scale)?;
            check_eq("gamma3 = gamma4", g[2], g[3], scale)?;
            (g[0], g[2])
        }
        Topology::FourModeLinearL2 => {
            check_eq("gamma1 = gamma3", g[0], g[2], scale)?;
            check_eq("gamma2 = gamma4", g[1], g[3], scale)?;
            (g[0], g[1])
        }
        Topology::FiveModeLinear => {
            check_eq("gamma1 = gamma2", g[0], g[1], scale)?;
            check_eq("gamma4 = gamma5", g[3], g[4], scale)?;
            check_eq("2*gamma3 = gamma1 + gamma4", 2.0 * g[2], g[0] + g[3], scale)?;
            (g[0], g[3])
        }
        Topology::FiveModePyramid => {
            check_eq("gamma1 = gamma2", g[0], g[1], scale)?;
            check_eq("gamma3 = gamma4", g[2], g[3], scale)?;
            check_eq("2*gamma5 = gamma1 + gamma3", 2.0 * g[4], g[0] + g[2], scale)?;
            (g[0], g[2])
        }
    };
    Ok(((ga + gb) / 4.0, (ga - gb) / 4.0))
}

/// Builds the full 2n×2n dynamical matrix: block (i,j) is ξ for coupled mode
/// pairs, −i·γ̃ᵢ = −i·diag(γᵢ/2, γᵢ/2) on the diagonal, zero otherwise.
pub fn build_full_matrix(params: &SystemParams) -> Result<DynamicalMatrix> {
    validate_rates(params)?;
    let n = params.topology.n();
    let adj = adjacency(params.topology);
    let xi = xi_matrix(params.coupling());
    let mut m = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(2 * i, 2 * i)] = c(0.0, -params.gammas[i] / 2.0);
        m[(2 * i + 1, 2 * i + 1)] = c(0.0, -params.gammas[i] / 2.0);
        for j in 0..n {
            if adj[i][j] {
                for a in 0..2 {
                    for b in 0..2 {
                        m[(2 * i + a, 2 * j + b)] = xi[(a, b)];
                    }
                }
            }
        }
    }
    Ok(DynamicalMatrix {
        dim: 2 * n,
        entries: m,
        topology: params.topology,
    })
}

/// Builds the reduced n×n matrix obtained by replacing each ξ block with a
/// scalar eigenvalue `xi` of ξ: −i·γⱼ/2 on the diagonal, `xi` at adjacency
/// positions.
pub fn build_reduced_matrix(params: &SystemParams, xi: C) -> Result<CMat> {
    validate_rates(params)?;
    let n = params.topology.n();
    let adj = adjacency(params.topology);
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = c(0.0, -params.gammas[i] / 2.0);
        for j in 0..n {
            if adj[i][j] {
                m[(i, j)] = xi;
            }
        }
    }
    Ok(m)
}

/// Maps a dimensionless plane point back to concrete system parameters,
/// choosing the unique constraint-satisfying rate assignment with the
/// requested (γ₊, γ₋).
pub fn params_from_plane(topology: Topology, epsilon: f64, point: PlanePoint) -> Result<SystemParams> {
    if !(point.kappa_over_eps.is_finite()
        && point.gamma_minus_over_eps.is_finite()
        && point.gamma_plus_over_eps.is_finite())
    {
        return Err(Error::InvalidInput("non-finite plane point".into()));
    }
    let kappa = epsilon * point.kappa_over_eps;
    let gp = epsilon * point.gamma_plus_over_eps;
    let gm = epsilon * point.gamma_minus_over_eps;
    // 4γ± = γ_a ± γ_b  ⇒  γ_a = 2(γ₊+γ₋), γ_b = 2(γ₊−γ₋).
    let ga = 2.0 * (gp + gm);
    let gb = 2.0 * (gp - gm);
    let gmid = 2.0 * gp;
    let gammas = match topology {
        Topology::TwoMode => vec![ga, gb],
        Topology::ThreeModeLinear => vec![ga, gmid, gb],
        Topology::FourModeLinearL1 | Topology::FourModeCircular => vec![ga, ga, gb, gb],
        Topology::FourModeLinearL2 => vec![ga, gb, ga, gb],
        Topology::FiveModeLinear => vec![ga, ga, gmid, gb, gb],
        Topology::FiveModePyramid => vec![ga, ga, gb, gb, gmid],
    };
    SystemParams::new(topology, epsilon, kappa, gammas)
}
