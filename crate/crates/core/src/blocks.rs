//! The 2×2 building blocks shared by every topology.
//!
//! Every dynamical matrix in this library is assembled from two kinds of 2×2
//! blocks: the coupling block ξ = [[ε, κ], [−κ, −ε]] that sits at every
//! coupled mode pair, and the rate block γ̃ = diag(γ/2, γ/2) that sits on the
//! diagonal (entering as −i·γ̃).  The eigendecomposition of ξ is what lets the
//! full 2n×2n problem factor into two n×n problems, so its two branches
//! (eigenvalues ∓ζ with ζ = √(ε²−κ²)) are computed here once and threaded
//! through everything else.

use crate::{c, C, Error, Result};
use nalgebra::{Matrix2, Vector2};

/// Floor on |κ|/ε below which the ξ eigenvector formula (which divides by κ)
/// is abandoned in favor of the exact eigenvectors of the then-diagonal ξ.
pub const KAPPA_FLOOR_REL: f64 = 1e-12;

/// The coupling block parameters: linear strength ε and nonlinear strength κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingBlock {
    /// Linear coupling strength (angular frequency units); strictly positive.
    pub epsilon: f64,
    /// Nonlinear coupling strength (same units); any finite real.
    pub kappa: f64,
}

impl CouplingBlock {
    /// Validates and constructs a coupling block.  ε must be finite and
    /// strictly positive (time is rescaled by ε, so ε = 0 is meaningless);
    /// κ must be finite.
    pub fn new(epsilon: f64, kappa: f64) -> Result<Self> {
        if !epsilon.is_finite() || !kappa.is_finite() {
            return Err(Error::InvalidInput(format!(
                "coupling parameters must be finite, got epsilon={epsilon}, kappa={kappa}"
            )));
        }
        if epsilon <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        Ok(Self { epsilon, kappa })
    }
}

/// A mode's damping (γ > 0) or amplification (γ < 0) rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBlock {
    /// The rate γ; finite real.
    pub gamma: f64,
}

impl RateBlock {
    /// Validates and constructs a rate block.
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "rate must be finite, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }
}

/// The eigensystem of the 2×2 coupling matrix ξ.
///
/// Eigenvalues are ordered (λ₁ = −ζ, λ₂ = +ζ) with ζ the principal square
/// root of ε²−κ².  Eigenvectors are unit-norm.  When ζ = 0 (κ = ±ε) the
/// block is defective: only one eigendirection exists, `defective` is set,
/// and both stored pairs carry that single surviving eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct XiEigenSystem {
    /// ζ = principal_sqrt(ε² − κ²).
    pub zeta: C,
    /// The two (eigenvalue, unit eigenvector) pairs, ordered (−ζ, +ζ).
    pub pairs: [(C, Vector2<C>); 2],
    /// True when ζ = 0 and ξ has a single eigendirection.
    pub defective: bool,
}

/// Builds the coupling matrix ξ = [[ε, κ], [−κ, −ε]].
pub fn xi_matrix(block: CouplingBlock) -> Matrix2<C> {
    let e = c(block.epsilon, 0.0);
    let k = c(block.kappa, 0.0);
    Matrix2::new(e, k, -k, -e)
}

/// Principal branch of the complex square root: non-negative real part, and
/// for negative real input the root on the positive imaginary axis.
pub fn principal_sqrt(z: C) -> C {
    // num-complex's sqrt is the principal branch, but a negative real with a
    // signed-zero imaginary part (-0.0) would land on the lower branch cut;
    // normalize that case so the convention is deterministic.
    let z = if z.im == 0.0 { c(z.re, 0.0) } else { z };
    z.sqrt()
}

/// Computes the eigensystem of ξ: eigenvalues ∓ζ with their eigenvectors.
///
/// For |κ| above the relative floor the eigenvectors follow the closed form
/// [−(ε∓ζ)/κ, 1]ᵀ (normalized).  For |κ| at or below the floor, ξ is
/// numerically diagonal and the canonical basis vectors are returned, ordered
/// to match the (−ζ, +ζ) convention ([0,1]ᵀ for −ε, [1,0]ᵀ for +ε).
/// When ζ = 0 the block is defective; the single surviving eigendirection
/// (proportional to [κ, −ε]ᵀ) is reported for both pairs with the
/// `defective` flag set.
pub fn xi_eigensystem(block: CouplingBlock) -> XiEigenSystem {
    let eps = block.epsilon;
    let kap = block.kappa;
    let zeta = principal_sqrt(c(eps * eps - kap * kap, 0.0));

    if zeta.norm() <= 1e-14 * eps.max(kap.abs()) {
        // kappa = ±epsilon: defective block, single eigendirection [κ, −ε].
        let v = Vector2::new(c(kap, 0.0), c(-eps, 0.0));
        let v = v.map(|x| x / c(v.norm(), 0.0));
        return XiEigenSystem {
            zeta: c(0.0, 0.0),
            pairs: [(c(0.0, 0.0), v), (c(0.0, 0.0), v)],
            defective: true,
        };
    }

    let pairs = if kap.abs() <= KAPPA_FLOOR_REL * eps {
        // Diagonal ξ = diag(ε, −ε): eigenvalue −ζ = −ε pairs with [0,1],
        // +ζ = +ε with [1,0].
        [
            (-zeta, Vector2::new(c(0.0, 0.0), c(1.0, 0.0))),
            (zeta, Vector2::new(c(1.0, 0.0), c(0.0, 0.0))),
        ]
    } else {
        let k = c(kap, 0.0);
        let e = c(eps, 0.0);
        let mk = |lambda: C| {
            // Eigenvector [−(ε + λ)/κ, 1] for eigenvalue λ of ξ (from the
            // second row −κ·v₁ − ε·v₂ = λ·v₂); for λ = −ζ this is the
            // familiar [−(ε−ζ)/κ, 1] representative.
            let v = Vector2::new(-(e + lambda) / k, c(1.0, 0.0));
            let n = v.norm();
            (lambda, v.map(|x| x / c(n, 0.0)))
        };
        [mk(-zeta), mk(zeta)]
    };

    XiEigenSystem {
        zeta,
        pairs,
        defective: false,
    }
}

impl XiEigenSystem {
    /// Maximum residual ‖ξy − λy‖ over both stored pairs.
    pub fn residual(&self, block: CouplingBlock) -> f64 {
        let xi = xi_matrix(block);
        self.pairs
            .iter()
            .map(|(l, v)| (xi * v - v.map(|x| x * l)).norm())
            .fold(0.0, f64::max)
    }
}

/// Returns an error if the eigensystem is defective, for callers that require
/// two independent ξ branches (the analytic full-spectrum assembly).
pub fn require_nondefective(sys: &XiEigenSystem) -> Result<()> {
    if sys.defective {
        Err(Error::DefectiveXi(
            "kappa = ±epsilon makes the coupling block defective".into(),
        ))
    } else {
        Ok(())
    }
}
