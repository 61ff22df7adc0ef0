//! Closed-form spectra of the reduced n×n matrices and the assembly of the
//! full 2n-dimensional spectrum from the two ξ branches.
//!
//! Every topology's reduced matrix has eigenvalues of the form
//! λ = −iγ₊ + (branch quantity), where the branch quantities (β, α±, β₁, β₂)
//! are square roots of simple polynomials in ξ², γ₋².  The eigenvectors are
//! rational in λ, ξ, and the rates: for the chain topologies they follow from
//! exact back-substitution through the tridiagonal rows, and for the circular
//! and pyramid topologies from short explicit component patterns.  All
//! formulas here satisfy the eigen-equations identically (verified by the
//! residual tests below); wherever a coefficient blows up (ξ → 0 divisions,
//! the pyramid's γ₋ → 0 division) the numeric eigenvector of the reduced
//! matrix is substituted and flagged.
//!
//! The full 2n×2n matrix factors as M = A ⊗ ξ + D ⊗ I₂ with A the adjacency
//! pattern and D the diagonal rate part, so its spectrum is the union over
//! the two ξ eigenvalues ∓ζ of the reduced spectra, and its eigenvectors are
//! Kronecker products y_reduced ⊗ y^ξ.

use serde::Serialize;

use crate::blocks::{principal_sqrt, require_nondefective, xi_eigensystem};
use crate::network::{build_reduced_matrix, validate_rates, SystemParams, Topology};
use crate::numeric::{eig, frob_norm};
use crate::{c, CVec, Result, C};

/// Unnormalized coefficients may not exceed this magnitude before the
/// closed-form eigenvector is abandoned for the numeric one.
const COEF_LIMIT: f64 = 1e12;

/// Relative residual limit on a closed-form eigenvector before falling back
/// to the numeric one.
const RESIDUAL_LIMIT: f64 = 1e-9;

/// Relative eigenvalue-coalescence threshold for the `defective` flag.
const COALESCENCE_TOL: f64 = 1e-10;

/// The auxiliary scalars entering a topology's closed-form spectrum at a
/// fixed ξ value.  Fields not used by the topology are `None`.
///
/// Defining relations (principal square roots throughout):
/// - `beta`: TwoMode/Circular β² = ξ²−γ₋²; ThreeModeLinear β² = 2ξ²−γ₋²;
///   FourModeLinearL1 β² = 3ξ²/2−γ₋²; FiveModeLinear β² = ξ²/4−γ₋².
/// - `mu` (FourModeLinearL1): μ² = 4ξ²(5ξ²/16−γ₋²); (FourModeLinearL2)
///   μ = √5·ξ²/2.
/// - `alpha_plus`/`alpha_minus`: L1 α±² = β²±μ; L2 α±² = 3ξ²/2−γ₋²±√5ξ²/2;
///   Circular α± = β±ξ; FiveModeLinear α±² = β²+7ξ²/4±2βξ.
/// - `beta1`/`beta2` (FiveModePyramid): β₁² = ξ²−γ₋², β₂² = 5ξ²−γ₋².
/// - χ family: χ = iγ₋+β (TwoMode/ThreeModeLinear/Circular),
///   χ± = iγ₋+α± (L1/L2/FiveModeLinear), χ₁ = β₁−iγ₋, χ₂ = β₂−iγ₋
///   (pyramid).  The iγ₋ offset — not an iγ₊ one — is what makes the
///   eigenvector components below satisfy the eigen-equations identically;
///   this is checked by the residual tests.
/// - `kappa_plus`/`kappa_minus` (L2): the constants (1±√5)/2 appearing as
///   the second eigenvector component.
/// - `sigma_plus`/`sigma_minus` (pyramid): σ± = (ξ±χ₂)/(4ξ), the first two
///   components of the β₂-family eigenvectors.
/// - `delta_plus`/`delta_minus` (L1): δ± = 2(2α±ξ² − (α±²+γ₋²)χ±), i.e.
///   2ξ³ times the first component of the λ = −iγ₊−α± eigenvector.
/// - `m_plus`/`m_minus`, `n_plus`/`n_minus` (FiveModeLinear):
///   m± = χ±ξ² − α±(χ±²−ξ²) and n± = −(α±−iγ₋)m± − ξ²(χ±²−ξ²), i.e. ξ³ and
///   ξ⁴ times the second and first components of the λ = −iγ₊−α±
///   eigenvector.
#[derive(Debug, Clone, Serialize)]
pub struct DerivedQuantities {
    /// The topology these scalars belong to.
    pub topology: Topology,
    /// The ξ eigenvalue in play (one of ∓ζ for the full assembly).
    pub xi: C,
    /// ζ = principal_sqrt(ε²−κ²) of the coupling block.
    pub zeta: C,
    /// Common rate offset γ₊.
    pub gamma_plus: f64,
    /// Rate half-difference γ₋.
    pub gamma_minus: f64,
    /// Primary branch quantity β (absent for L2 and the pyramid).
    pub beta: Option<C>,
    /// α₊ (absent for TwoMode/ThreeModeLinear/pyramid).
    pub alpha_plus: Option<C>,
    /// α₋ (absent for TwoMode/ThreeModeLinear/pyramid).
    pub alpha_minus: Option<C>,
    /// μ (four-mode linear topologies only).
    pub mu: Option<C>,
    /// β₁ (pyramid only).
    pub beta1: Option<C>,
    /// β₂ (pyramid only).
    pub beta2: Option<C>,
    /// χ = iγ₋+β.
    pub chi: Option<C>,
    /// χ₊ = iγ₋+α₊.
    pub chi_plus: Option<C>,
    /// χ₋ = iγ₋+α₋.
    pub chi_minus: Option<C>,
    /// χ₁ = β₁−iγ₋ (pyramid).
    pub chi1: Option<C>,
    /// χ₂ = β₂−iγ₋ (pyramid).
    pub chi2: Option<C>,
    /// κ₊ = (1+√5)/2 (L2).
    pub kappa_plus: Option<f64>,
    /// κ₋ = (1−√5)/2 (L2).
    pub kappa_minus: Option<f64>,
    /// σ₊ = (ξ+χ₂)/(4ξ) (pyramid).
    pub sigma_plus: Option<C>,
    /// σ₋ = (ξ−χ₂)/(4ξ) (pyramid).
    pub sigma_minus: Option<C>,
    /// δ₊ (L1 eigenvector coefficient).
    pub delta_plus: Option<C>,
    /// δ₋ (L1 eigenvector coefficient).
    pub delta_minus: Option<C>,
    /// m₊ (five-mode linear eigenvector coefficient).
    pub m_plus: Option<C>,
    /// m₋ (five-mode linear eigenvector coefficient).
    pub m_minus: Option<C>,
    /// n₊ (five-mode linear eigenvector coefficient).
    pub n_plus: Option<C>,
    /// n₋ (five-mode linear eigenvector coefficient).
    pub n_minus: Option<C>,
}

/// One closed-form eigenpair of a reduced n×n matrix.
#[derive(Debug, Clone, Serialize)]
pub struct ReducedEigenpair {
    /// Eigenvalue λ_k.
    pub value: C,
    /// Unit-norm eigenvector.
    pub vector: CVec,
    /// 1-based index k in the fixed closed-form ordering.
    pub index: usize,
    /// True when the numeric eigenvector was substituted for the closed-form
    /// one (singular coefficient or residual failure).
    pub numeric_fallback: bool,
}

/// The closed-form spectrum of a reduced matrix at one ξ value.
#[derive(Debug, Clone, Serialize)]
pub struct ReducedSpectrum {
    /// The n eigenpairs in the fixed closed-form ordering.
    pub pairs: Vec<ReducedEigenpair>,
    /// True when two or more eigenvalues coalesce within
    /// 10⁻¹⁰·max(1,‖M_red‖); coalesced groups share the single surviving
    /// eigenvector.
    pub defective: bool,
}

/// Which ξ eigenvalue a full eigenpair was assembled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XiBranch {
    /// The λ^ξ₁ = −ζ branch.
    Minus,
    /// The λ^ξ₂ = +ζ branch.
    Plus,
}

/// One eigenpair of the full 2n×2n dynamical matrix, assembled as
/// y_reduced ⊗ y^ξ.
#[derive(Debug, Clone, Serialize)]
pub struct FullEigenpair {
    /// Eigenvalue Λ_j.
    pub value: C,
    /// Unit-norm 2n-component eigenvector.
    pub vector: CVec,
    /// The ξ branch this pair lives on (odd full indices ↔ −ζ).
    pub parity: XiBranch,
    /// 1-based index of the reduced eigenpair this was built from.
    pub reduced_index: usize,
    /// Propagated from the reduced eigenpair.
    pub numeric_fallback: bool,
}

/// Evaluates every auxiliary scalar of `params.topology`'s closed-form
/// spectrum at the given ξ value.
pub fn derived_quantities(params: &SystemParams, xi: C) -> Result<DerivedQuantities> {
    let (gp, gm) = validate_rates(params)?;
    let zeta = principal_sqrt(c(
        params.epsilon * params.epsilon - params.kappa * params.kappa,
        0.0,
    ));
    let xi2 = xi * xi;
    let gm2 = c(gm * gm, 0.0);
    let igm = c(0.0, gm);

    let mut dq = DerivedQuantities {
        topology: params.topology,
        xi,
        zeta,
        gamma_plus: gp,
        gamma_minus: gm,
        beta: None,
        alpha_plus: None,
        alpha_minus: None,
        mu: None,
        beta1: None,
        beta2: None,
        chi: None,
        chi_plus: None,
        chi_minus: None,
        chi1: None,
        chi2: None,
        kappa_plus: None,
        kappa_minus: None,
        sigma_plus: None,
        sigma_minus: None,
        delta_plus: None,
        delta_minus: None,
        m_plus: None,
        m_minus: None,
        n_plus: None,
        n_minus: None,
    };

    match params.topology {
        Topology::TwoMode => {
            let beta = principal_sqrt(xi2 - gm2);
            dq.beta = Some(beta);
            dq.chi = Some(igm + beta);
        }
        Topology::ThreeModeLinear => {
            let beta = principal_sqrt(xi2 * c(2.0, 0.0) - gm2);
            dq.beta = Some(beta);
            dq.chi = Some(igm + beta);
        }
        Topology::FourModeLinearL1 => {
            let beta2 = xi2 * c(1.5, 0.0) - gm2;
            let beta = principal_sqrt(beta2);
            let mu = principal_sqrt(xi2 * c(4.0, 0.0) * (xi2 * c(5.0 / 16.0, 0.0) - gm2));
            let ap = principal_sqrt(beta2 + mu);
            let am = principal_sqrt(beta2 - mu);
            let (cp, cm) = (igm + ap, igm + am);
            dq.beta = Some(beta);
            dq.mu = Some(mu);
            dq.alpha_plus = Some(ap);
            dq.alpha_minus = Some(am);
            dq.chi_plus = Some(cp);
            dq.chi_minus = Some(cm);
            let delta = |a: C, ch: C| (a * xi2 * c(2.0, 0.0) - (a * a + gm2) * ch) * c(2.0, 0.0);
            dq.delta_plus = Some(delta(ap, cp));
            dq.delta_minus = Some(delta(am, cm));
        }
        Topology::FourModeLinearL2 => {
            let s5 = 5.0_f64.sqrt();
            let mu = xi2 * c(s5 / 2.0, 0.0);
            let base = xi2 * c(1.5, 0.0) - gm2;
            let ap = principal_sqrt(base + mu);
            let am = principal_sqrt(base - mu);
            dq.mu = Some(mu);
            dq.alpha_plus = Some(ap);
            dq.alpha_minus = Some(am);
            dq.chi_plus = Some(igm + ap);
            dq.chi_minus = Some(igm + am);
            dq.kappa_plus = Some((1.0 + s5) / 2.0);
            dq.kappa_minus = Some((1.0 - s5) / 2.0);
        }
        Topology::FourModeCircular => {
            let beta = principal_sqrt(xi2 - gm2);
            dq.beta = Some(beta);
            dq.alpha_plus = Some(beta + xi);
            dq.alpha_minus = Some(beta - xi);
            dq.chi = Some(igm + beta);
        }
        Topology::FiveModeLinear => {
            let beta2 = xi2 * c(0.25, 0.0) - gm2;
            let beta = principal_sqrt(beta2);
            let ap = principal_sqrt(beta2 + xi2 * c(1.75, 0.0) + beta * xi * c(2.0, 0.0));
            let am = principal_sqrt(beta2 + xi2 * c(1.75, 0.0) - beta * xi * c(2.0, 0.0));
            let (cp, cm) = (igm + ap, igm + am);
            dq.beta = Some(beta);
            dq.alpha_plus = Some(ap);
            dq.alpha_minus = Some(am);
            dq.chi_plus = Some(cp);
            dq.chi_minus = Some(cm);
            let m = |a: C, ch: C| ch * xi2 - a * (ch * ch - xi2);
            let n = |a: C, ch: C, mm: C| -(a - igm) * mm - xi2 * (ch * ch - xi2);
            let (mp, mm) = (m(ap, cp), m(am, cm));
            dq.m_plus = Some(mp);
            dq.m_minus = Some(mm);
            dq.n_plus = Some(n(ap, cp, mp));
            dq.n_minus = Some(n(am, cm, mm));
        }
        Topology::FiveModePyramid => {
            let b1 = principal_sqrt(xi2 - gm2);
            let b2 = principal_sqrt(xi2 * c(5.0, 0.0) - gm2);
            let chi2 = b2 - igm;
            dq.beta1 = Some(b1);
            dq.beta2 = Some(b2);
            dq.chi1 = Some(b1 - igm);
            dq.chi2 = Some(chi2);
            dq.sigma_plus = Some((xi + chi2) / (xi * c(4.0, 0.0)));
            dq.sigma_minus = Some((xi - chi2) / (xi * c(4.0, 0.0)));
        }
    }
    Ok(dq)
}

/// The closed-form eigenvalues at one ξ value, in the fixed index order.
fn closed_form_values(dq: &DerivedQuantities) -> Vec<C> {
    let base = c(0.0, -dq.gamma_plus);
    match dq.topology {
        Topology::TwoMode => {
            let b = dq.beta.unwrap();
            vec![base - b, base + b]
        }
        Topology::ThreeModeLinear => {
            let b = dq.beta.unwrap();
            vec![base, base - b, base + b]
        }
        Topology::FourModeLinearL1 => {
            let (ap, am) = (dq.alpha_plus.unwrap(), dq.alpha_minus.unwrap());
            vec![base + am, base - am, base + ap, base - ap]
        }
        Topology::FourModeLinearL2 => {
            let (ap, am) = (dq.alpha_plus.unwrap(), dq.alpha_minus.unwrap());
            vec![base + ap, base - ap, base + am, base - am]
        }
        Topology::FourModeCircular => {
            let (ap, am) = (dq.alpha_plus.unwrap(), dq.alpha_minus.unwrap());
            vec![base - ap, base - am, base + am, base + ap]
        }
        Topology::FiveModeLinear => {
            let (ap, am) = (dq.alpha_plus.unwrap(), dq.alpha_minus.unwrap());
            vec![base, base + am, base - am, base + ap, base - ap]
        }
        Topology::FiveModePyramid => {
            let (b1, b2) = (dq.beta1.unwrap(), dq.beta2.unwrap());
            let xi = dq.xi;
            vec![base, base - xi + b1, base - xi - b1, base + xi + b2, base + xi - b2]
        }
    }
}

/// The closed-form eigenvalues at ξ = `xi` in the fixed index order, without
/// computing eigenvectors (the parameter-plane scanner's hot path).
pub fn reduced_eigenvalues(params: &SystemParams, xi: C) -> Result<Vec<C>> {
    Ok(closed_form_values(&derived_quantities(params, xi)?))
}

/// Exact eigenvector of a tridiagonal chain by back-substitution from the
/// last component: row i of the chain reads ξ(v_{i−1}+v_{i+1}) + d_i·v_i
/// = λ·v_i, which determines every component from v_{n−1} = 1 upward.  The
/// result is an eigenvector exactly when λ is an eigenvalue (row 0 then
/// holds automatically); at a defective λ it is the single surviving
/// eigendirection.
fn chain_vector(diag: &[C], xi: C, lambda: C) -> Vec<C> {
    let n = diag.len();
    let mut v = vec![c(0.0, 0.0); n];
    v[n - 1] = c(1.0, 0.0);
    if n >= 2 {
        v[n - 2] = (lambda - diag[n - 1]) / xi;
    }
    for k in (0..n.saturating_sub(2)).rev() {
        v[k] = ((lambda - diag[k + 1]) * v[k + 1] - xi * v[k + 2]) / xi;
    }
    v
}

/// The unnormalized closed-form eigenvector for 1-based index `k`.
fn closed_form_vector(dq: &DerivedQuantities, diag: &[C], lambda: C, k: usize) -> Vec<C> {
    let xi = dq.xi;
    match dq.topology {
        Topology::TwoMode
        | Topology::ThreeModeLinear
        | Topology::FourModeLinearL1
        | Topology::FourModeLinearL2
        | Topology::FiveModeLinear => chain_vector(diag, xi, lambda),
        Topology::FourModeCircular => {
            // Ring pattern: components (±χ-like/ξ, ±1) depending on which of
            // the four eigenvalues −iγ₊ ∓ β ∓ ξ is in play.
            let b = dq.beta.unwrap();
            let igm = c(0.0, dq.gamma_minus);
            let chi = igm + b; // pairs with the −β eigenvalues
            let chib = b - igm; // pairs with the +β eigenvalues
            let one = c(1.0, 0.0);
            match k {
                1 => vec![-chi / xi, chi / xi, -one, one],
                2 => vec![-chi / xi, -chi / xi, one, one],
                3 => vec![chib / xi, -chib / xi, -one, one],
                _ => vec![chib / xi, chib / xi, one, one],
            }
        }
        Topology::FiveModePyramid => {
            let (b1, b2) = (dq.beta1.unwrap(), dq.beta2.unwrap());
            let igm = c(0.0, dq.gamma_minus);
            let one = c(1.0, 0.0);
            let zero = c(0.0, 0.0);
            match k {
                1 => {
                    // [−iξ/γ₋, −iξ/γ₋, iξ/γ₋, iξ/γ₋, 1]; singular at γ₋ = 0
                    // (handled by the numeric fallback).
                    let w = c(0.0, -1.0) * xi / c(dq.gamma_minus, 0.0);
                    vec![w, w, -w, -w, one]
                }
                2 => {
                    let chi1 = b1 - igm;
                    vec![chi1 / xi, -chi1 / xi, -one, one, zero]
                }
                3 => {
                    let chi1b = b1 + igm;
                    vec![-chi1b / xi, chi1b / xi, -one, one, zero]
                }
                4 => {
                    let s = (xi + b2 - igm) / (xi * c(4.0, 0.0));
                    let t = (xi + b2 + igm) / (xi * c(4.0, 0.0));
                    vec![s, s, t, t, one]
                }
                _ => {
                    let s = (xi - b2 - igm) / (xi * c(4.0, 0.0));
                    let t = (xi - b2 + igm) / (xi * c(4.0, 0.0));
                    vec![s, s, t, t, one]
                }
            }
        }
    }
}

/// Evaluates the closed-form spectrum of the reduced matrix at ξ = `xi`,
/// substituting numeric eigenvectors where a formula coefficient is singular
/// or the closed-form residual fails its bound.
pub fn reduced_spectrum(params: &SystemParams, xi: C) -> Result<ReducedSpectrum> {
    let dq = derived_quantities(params, xi)?;
    let m = build_reduced_matrix(params, xi)?;
    let n = params.topology.n();
    let norm = frob_norm(&m);
    let diag: Vec<C> = (0..n).map(|i| m[(i, i)]).collect();
    let values = closed_form_values(&dq);

    // Numeric eigenpairs, computed lazily on first fallback; each numeric
    // pair is consumed at most once so coalesced closed-form eigenvalues
    // cannot both grab the same numeric vector while a distinct one exists.
    let mut numeric: Option<Vec<(C, CVec)>> = None;
    let mut used = vec![false; n];

    let mut pairs = Vec::with_capacity(n);
    for (idx, &lambda) in values.iter().enumerate() {
        let raw = closed_form_vector(&dq, &diag, lambda, idx + 1);
        let bad_coef = raw
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite() || z.norm() > COEF_LIMIT);
        let candidate = if bad_coef {
            None
        } else {
            let mut v = CVec::from_vec(raw);
            let vn = v.norm();
            v /= c(vn, 0.0);
            let residual = (&m * &v - v.map(|x| x * lambda)).norm();
            if residual <= RESIDUAL_LIMIT * norm.max(1.0) {
                Some(v)
            } else {
                None
            }
        };

        let (vector, fallback) = match candidate {
            Some(v) => (v, false),
            None => {
                let pairs_num =
                    numeric.get_or_insert_with(|| eig(&m).expect("reduced eigendecomposition"));
                let mut best = usize::MAX;
                let mut best_d = f64::INFINITY;
                for (i, (lv, _)) in pairs_num.iter().enumerate() {
                    if !used[i] {
                        let d = (lv - lambda).norm();
                        if d < best_d {
                            best_d = d;
                            best = i;
                        }
                    }
                }
                used[best] = true;
                (pairs_num[best].1.clone(), true)
            }
        };
        pairs.push(ReducedEigenpair {
            value: lambda,
            vector,
            index: idx + 1,
            numeric_fallback: fallback,
        });
    }

    let coal = COALESCENCE_TOL * norm.max(1.0);
    let mut defective = false;
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= coal {
                defective = true;
            }
        }
    }

    Ok(ReducedSpectrum { pairs, defective })
}

/// Assembles the full 2n-dimensional spectrum from the two ξ branches:
/// Λ_{2j−1} = λ_j(ξ=−ζ) with Y = y_j(−ζ) ⊗ y^ξ(−ζ), and Λ_{2j} the +ζ
/// partner.
///
/// Errors with [`Error::DefectiveXi`] when ζ = 0 (κ = ±ε), where the ξ block
/// has a single eigendirection and the product assembly cannot span the full
/// space; callers should use the numeric engine there.
pub fn assemble_full_spectrum(params: &SystemParams) -> Result<Vec<FullEigenpair>> {
    let sys = xi_eigensystem(params.coupling());
    require_nondefective(&sys)?;
    let n = params.topology.n();

    let branches = [
        (XiBranch::Minus, sys.pairs[0]),
        (XiBranch::Plus, sys.pairs[1]),
    ];
    let spectra = [
        reduced_spectrum(params, sys.pairs[0].0)?,
        reduced_spectrum(params, sys.pairs[1].0)?,
    ];

    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        for (b, (parity, (_, u))) in branches.iter().enumerate() {
            let rp = &spectra[b].pairs[j];
            let mut full = CVec::zeros(2 * n);
            for i in 0..n {
                full[2 * i] = rp.vector[i] * u[0];
                full[2 * i + 1] = rp.vector[i] * u[1];
            }
            let fnorm = full.norm();
            full /= c(fnorm, 0.0);
            out.push(FullEigenpair {
                value: rp.value,
                vector: full,
                parity: *parity,
                reduced_index: j + 1,
                numeric_fallback: rp.numeric_fallback,
            });
        }
    }
    Ok(out)
}

/// Convenience accessor used by the error message sites.
impl DerivedQuantities {
    /// The branch quantity whose vanishing signals eigenvalue coalescence on
    /// this topology's primary locus (β, or μ for L1, α₊ for L2, β₁ for the
    /// pyramid's first family).
    pub fn primary_branch(&self) -> C {
        match self.topology {
            Topology::FourModeLinearL1 => self.mu.unwrap(),
            Topology::FourModeLinearL2 => self.alpha_plus.unwrap(),
            Topology::FiveModePyramid => self.beta1.unwrap(),
            _ => self.beta.unwrap(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_full_matrix, params_from_plane, PlanePoint, ALL_TOPOLOGIES};
    use crate::numeric::match_spectra;
    use crate::Error;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plane(t: Topology, k: f64, gm: f64, gp: f64) -> SystemParams {
        params_from_plane(t, 1.0, PlanePoint::new(k, gm).with_gamma_plus(gp)).unwrap()
    }

    /// Projective distance 1 − |⟨â, b̂⟩| between unit vectors.
    fn proj_dist(a: &CVec, b: &CVec) -> f64 {
        let ip: C = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
        (1.0 - ip.norm()).abs()
    }

    fn random_point(rng: &mut ChaCha8Rng, t: Topology) -> SystemParams {
        loop {
            let k: f64 = rng.random_range(-1.5..1.5);
            // Keep ζ away from zero so the full assembly is defined.
            if (1.0 - k * k).abs().sqrt() < 1e-3 {
                continue;
            }
            let gm: f64 = rng.random_range(-1.5..1.5);
            let gp = if rng.random_bool(0.5) { 0.0 } else { 0.3 };
            return plane(t, k, gm, gp);
        }
    }

    #[test]
    fn derived_examples() {
        // TwoMode at (κ=0.6, γ₋=0.8), ξ=0.8: β = 0 exactly.
        let p = plane(Topology::TwoMode, 0.6, 0.8, 0.0);
        let dq = derived_quantities(&p, c(0.8, 0.0)).unwrap();
        assert!(dq.beta.unwrap().norm() < 1e-12);

        // L1 at (κ=0, γ₋=√5/4), ξ=1: μ=0, α± = √19/4.  √5/4 is not exactly
        // representable, so μ = √(4·O(u)) lands at ~1e−8 rather than 0.
        let p = plane(Topology::FourModeLinearL1, 0.0, 5.0_f64.sqrt() / 4.0, 0.0);
        let dq = derived_quantities(&p, c(1.0, 0.0)).unwrap();
        assert!(dq.mu.unwrap().norm() < 1e-7);
        let a = (19.0_f64).sqrt() / 4.0;
        assert!((dq.alpha_plus.unwrap() - c(a, 0.0)).norm() < 1e-7);
        assert!((dq.alpha_minus.unwrap() - c(a, 0.0)).norm() < 1e-7);

        // Pyramid at (κ=0.6, γ₋=4/√5), ξ=0.8: β₂=0, β₁=1.6i.
        let p = plane(Topology::FiveModePyramid, 0.6, 4.0 / 5.0_f64.sqrt(), 0.0);
        let dq = derived_quantities(&p, c(0.8, 0.0)).unwrap();
        // 4/√5 is likewise inexact; β₂ = √(O(u)) ~ 1e−8.
        assert!(dq.beta2.unwrap().norm() < 1e-7);
        assert!((dq.beta1.unwrap() - c(0.0, 1.6)).norm() < 1e-12);
    }

    #[test]
    fn defining_relations_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in ALL_TOPOLOGIES {
            for _ in 0..200 {
                let p = random_point(&mut rng, t);
                for s in [-1.0, 1.0] {
                    let xi = derived_quantities(&p, c(0.0, 0.0)).unwrap().zeta * c(s, 0.0);
                    let dq = derived_quantities(&p, xi).unwrap();
                    let xi2 = xi * xi;
                    let gm2 = c(dq.gamma_minus * dq.gamma_minus, 0.0);
                    let rel = |lhs: C, rhs: C| {
                        (lhs - rhs).norm() <= 1e-12 * lhs.norm().max(rhs.norm()).max(1e-30)
                    };
                    match t {
                        Topology::TwoMode | Topology::FourModeCircular => {
                            let b = dq.beta.unwrap();
                            assert!(rel(b * b, xi2 - gm2));
                            if t == Topology::FourModeCircular {
                                assert!(rel(dq.alpha_plus.unwrap(), b + xi));
                                assert!(rel(dq.alpha_minus.unwrap(), b - xi));
                            }
                        }
                        Topology::ThreeModeLinear => {
                            let b = dq.beta.unwrap();
                            assert!(rel(b * b, xi2 * c(2.0, 0.0) - gm2));
                        }
                        Topology::FourModeLinearL1 => {
                            let (b, mu) = (dq.beta.unwrap(), dq.mu.unwrap());
                            assert!(rel(b * b, xi2 * c(1.5, 0.0) - gm2));
                            assert!(rel(
                                mu * mu,
                                xi2 * c(4.0, 0.0) * (xi2 * c(5.0 / 16.0, 0.0) - gm2)
                            ));
                            assert!(rel(dq.alpha_plus.unwrap().powu(2), b * b + mu));
                            assert!(rel(dq.alpha_minus.unwrap().powu(2), b * b - mu));
                        }
                        Topology::FourModeLinearL2 => {
                            let s5 = c(5.0_f64.sqrt() / 2.0, 0.0);
                            assert!(rel(
                                dq.alpha_plus.unwrap().powu(2),
                                xi2 * c(1.5, 0.0) - gm2 + xi2 * s5
                            ));
                            assert!(rel(
                                dq.alpha_minus.unwrap().powu(2),
                                xi2 * c(1.5, 0.0) - gm2 - xi2 * s5
                            ));
                        }
                        Topology::FiveModeLinear => {
                            let b = dq.beta.unwrap();
                            assert!(rel(b * b, xi2 * c(0.25, 0.0) - gm2));
                            assert!(rel(
                                dq.alpha_plus.unwrap().powu(2),
                                b * b + xi2 * c(1.75, 0.0) + b * xi * c(2.0, 0.0)
                            ));
                            assert!(rel(
                                dq.alpha_minus.unwrap().powu(2),
                                b * b + xi2 * c(1.75, 0.0) - b * xi * c(2.0, 0.0)
                            ));
                        }
                        Topology::FiveModePyramid => {
                            assert!(rel(dq.beta1.unwrap().powu(2), xi2 - gm2));
                            assert!(rel(dq.beta2.unwrap().powu(2), xi2 * c(5.0, 0.0) - gm2));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reduced_spectrum_examples() {
        // TwoMode second-order coalescence: both eigenvalues −0.4i.
        let p = plane(Topology::TwoMode, 0.6, 0.8, 0.4);
        let rs = reduced_spectrum(&p, c(0.8, 0.0)).unwrap();
        assert!(rs.defective);
        for pair in &rs.pairs {
            assert!((pair.value - c(0.0, -0.4)).norm() < 1e-12);
        }

        // ThreeModeLinear third-order coalescence: all three eigenvalues 0.
        // 1/√2 is not exactly representable, so β = √(O(u)) sits at ~1e−8
        // and the strict coalescence flag does not trip here.
        let s = 1.0 / 2.0_f64.sqrt();
        let p = plane(Topology::ThreeModeLinear, s, 1.0, 0.0);
        let rs = reduced_spectrum(&p, c(s, 0.0)).unwrap();
        for pair in &rs.pairs {
            assert!(pair.value.norm() < 1e-7);
        }

        // FiveModeLinear at β = 0: λ₁ = 0, λ₂ = λ₄ = 2√7/5, λ₃ = λ₅ = −2√7/5.
        let p = plane(Topology::FiveModeLinear, 0.6, 0.4, 0.0);
        let rs = reduced_spectrum(&p, c(0.8, 0.0)).unwrap();
        let a = 2.0 * 7.0_f64.sqrt() / 5.0;
        assert!(rs.defective);
        assert!(rs.pairs[0].value.norm() < 1e-12);
        assert!((rs.pairs[1].value - c(a, 0.0)).norm() < 1e-12);
        assert!((rs.pairs[3].value - c(a, 0.0)).norm() < 1e-12);
        assert!((rs.pairs[2].value + c(a, 0.0)).norm() < 1e-12);
        assert!((rs.pairs[4].value + c(a, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reduced_matches_numeric_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for t in ALL_TOPOLOGIES {
            for _ in 0..300 {
                let p = random_point(&mut rng, t);
                for s in [-1.0, 1.0] {
                    let xi = derived_quantities(&p, c(0.0, 0.0)).unwrap().zeta * c(s, 0.0);
                    let m = build_reduced_matrix(&p, xi).unwrap();
                    let rs = reduced_spectrum(&p, xi).unwrap();
                    let analytic: Vec<C> = rs.pairs.iter().map(|pr| pr.value).collect();
                    let numeric: Vec<C> = eig(&m).unwrap().into_iter().map(|(l, _)| l).collect();
                    let (_, err) = match_spectra(&analytic, &numeric).unwrap();
                    assert!(
                        err < 1e-9 * frob_norm(&m).max(1.0),
                        "{t:?} spectrum mismatch {err:.3e}"
                    );
                }
            }
        }
    }

    #[test]
    fn full_assembly_residuals_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for t in ALL_TOPOLOGIES {
            for _ in 0..1500 {
                let p = random_point(&mut rng, t);
                let m = build_full_matrix(&p).unwrap();
                let norm = frob_norm(&m.entries);
                let full = assemble_full_spectrum(&p).unwrap();
                assert_eq!(full.len(), 2 * t.n());
                for pair in &full {
                    let r = (&m.entries * &pair.vector
                        - pair.vector.map(|x| x * pair.value))
                        .norm();
                    assert!(
                        r <= 1e-9 * norm.max(1.0),
                        "{t:?} full residual {r:.3e} (fallback {})",
                        pair.numeric_fallback
                    );
                }
            }
        }
    }

    #[test]
    fn full_assembly_matches_numeric_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for t in ALL_TOPOLOGIES {
            for _ in 0..200 {
                let p = random_point(&mut rng, t);
                let m = build_full_matrix(&p).unwrap();
                let analytic: Vec<C> =
                    assemble_full_spectrum(&p).unwrap().iter().map(|x| x.value).collect();
                let numeric: Vec<C> =
                    eig(&m.entries).unwrap().into_iter().map(|(l, _)| l).collect();
                let (_, err) = match_spectra(&analytic, &numeric).unwrap();
                assert!(
                    err < 1e-9 * frob_norm(&m.entries).max(1.0),
                    "{t:?} full mismatch {err:.3e}"
                );
            }
        }
    }

    #[test]
    fn two_mode_generic_oracle_tight() {
        let p = SystemParams::new(Topology::TwoMode, 1.0, 0.3, vec![0.4, -0.4]).unwrap();
        let m = build_full_matrix(&p).unwrap();
        let analytic: Vec<C> =
            assemble_full_spectrum(&p).unwrap().iter().map(|x| x.value).collect();
        let numeric: Vec<C> = eig(&m.entries).unwrap().into_iter().map(|(l, _)| l).collect();
        let (_, err) = match_spectra(&analytic, &numeric).unwrap();
        assert!(err < 1e-10, "error {err:.3e}");
    }

    #[test]
    fn two_mode_corner_point_pairs_coincide() {
        // At (κ=0.6, γ₋=0.8) with γ₊=0 both branches coalesce at zero and
        // the four full eigenvectors pair up projectively.
        let p = plane(Topology::TwoMode, 0.6, 0.8, 0.0);
        let full = assemble_full_spectrum(&p).unwrap();
        for pair in &full {
            assert!(pair.value.norm() < 1e-12);
        }
        // Y₁ vs Y₃ share the −ζ branch, Y₂ vs Y₄ the +ζ branch.
        assert!(proj_dist(&full[0].vector, &full[2].vector) < 1e-9);
        assert!(proj_dist(&full[1].vector, &full[3].vector) < 1e-9);
        assert!(proj_dist(&full[0].vector, &full[1].vector) > 1e-3);
    }

    #[test]
    fn xi_parity_multisets() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for t in ALL_TOPOLOGIES {
            for _ in 0..100 {
                let p = random_point(&mut rng, t);
                let zeta = derived_quantities(&p, c(0.0, 0.0)).unwrap().zeta;
                let sp: Vec<C> = reduced_spectrum(&p, zeta)
                    .unwrap()
                    .pairs
                    .iter()
                    .map(|x| x.value)
                    .collect();
                let sm: Vec<C> = reduced_spectrum(&p, -zeta)
                    .unwrap()
                    .pairs
                    .iter()
                    .map(|x| x.value)
                    .collect();
                if t != Topology::FiveModePyramid {
                    let (_, err) = match_spectra(&sp, &sm).unwrap();
                    assert!(err < 1e-10, "{t:?} parity violation {err:.3e}");
                } else {
                    // λ₁ is shared; λ₂…₅ swap families: {−ξ±β₁, ξ±β₂} at +ζ
                    // becomes {ξ±β₁, −ξ±β₂} at −ζ.
                    assert!((sp[0] - sm[0]).norm() < 1e-12);
                    let dq = derived_quantities(&p, zeta).unwrap();
                    let (b1, b2) = (dq.beta1.unwrap(), dq.beta2.unwrap());
                    let base = c(0.0, -dq.gamma_plus);
                    let expect = [base + zeta + b1, base + zeta - b1, base - zeta + b2, base - zeta - b2];
                    let (_, err) = match_spectra(&sm[1..], &expect).unwrap();
                    assert!(err < 1e-10, "pyramid parity map violation {err:.3e}");
                }
            }
        }
    }

    #[test]
    fn trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for t in ALL_TOPOLOGIES {
            for _ in 0..50 {
                let p = random_point(&mut rng, t);
                let sum: C = assemble_full_spectrum(&p).unwrap().iter().map(|x| x.value).sum();
                let g: f64 = p.gammas.iter().sum();
                assert!((sum - c(0.0, -g)).norm() < 1e-10 * (1.0 + g.abs()));
            }
        }
    }

    #[test]
    fn gamma_plus_shift_moves_values_not_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for t in ALL_TOPOLOGIES {
            let p = random_point(&mut rng, t);
            let shift = 0.7;
            let mut p2 = p.clone();
            for g in &mut p2.gammas {
                *g += shift;
            }
            let a = assemble_full_spectrum(&p).unwrap();
            let b = assemble_full_spectrum(&p2).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                // Uniform rate offset c adds −ic/2 to every eigenvalue
                // (γ₊ grows by c/2... specifically each diagonal −iγ_j/2
                // picks up −ic/2) and leaves eigenvectors untouched.
                assert!((y.value - (x.value + c(0.0, -shift / 2.0))).norm() < 1e-10);
                if !x.numeric_fallback && !y.numeric_fallback {
                    assert!(proj_dist(&x.vector, &y.vector) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn defective_forecast_at_branch_zeros() {
        // Wherever the branch quantity vanishes the paired eigenvalues
        // coincide and the closed-form eigenvectors coincide projectively.
        let cases = [
            (Topology::TwoMode, 0.6, 0.8, vec![(0, 1)]),
            (Topology::FiveModeLinear, 0.6, 0.4, vec![(1, 3), (2, 4)]),
        ];
        for (t, k, gm, idx_pairs) in cases {
            let p = plane(t, k, gm, 0.0);
            let zeta = derived_quantities(&p, c(0.0, 0.0)).unwrap().zeta;
            let rs = reduced_spectrum(&p, zeta).unwrap();
            assert!(rs.defective);
            for (i, j) in idx_pairs {
                assert!((rs.pairs[i].value - rs.pairs[j].value).norm() < 1e-10);
                assert!(proj_dist(&rs.pairs[i].vector, &rs.pairs[j].vector) < 1e-6);
            }
        }
    }

    #[test]
    fn defective_xi_rejected() {
        let p = SystemParams::new(Topology::TwoMode, 1.0, 1.0, vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            assemble_full_spectrum(&p),
            Err(Error::DefectiveXi(_))
        ));
    }

    #[test]
    fn pyramid_gamma_minus_zero_falls_back() {
        // y₁ divides by γ₋; at γ₋ = 0 the numeric eigenvector must be
        // substituted and still satisfy the eigen-equation.
        let p = plane(Topology::FiveModePyramid, 0.3, 0.0, 0.2);
        let zeta = derived_quantities(&p, c(0.0, 0.0)).unwrap().zeta;
        let rs = reduced_spectrum(&p, zeta).unwrap();
        assert!(rs.pairs[0].numeric_fallback);
        let m = build_reduced_matrix(&p, zeta).unwrap();
        let r = (&m * &rs.pairs[0].vector - rs.pairs[0].vector.map(|x| x * rs.pairs[0].value)).norm();
        assert!(r < 1e-9 * frob_norm(&m).max(1.0));
    }

    #[test]
    fn coefficient_fields_match_eigenvector_components() {
        // δ± (L1) and m±, n± (five-mode linear) are defined as scaled
        // components of the λ = −iγ₊−α± eigenvectors; cross-check against
        // the back-substitution construction.
        let p = plane(Topology::FourModeLinearL1, 0.4, 0.7, 0.3);
        let zeta = derived_quantities(&p, c(0.0, 0.0)).unwrap().zeta;
        let dq = derived_quantities(&p, zeta).unwrap();
        let m = build_reduced_matrix(&p, zeta).unwrap();
        let diag: Vec<C> = (0..4).map(|i| m[(i, i)]).collect();
        let xi3 = zeta.powu(3);
        for (a, d) in [
            (dq.alpha_minus.unwrap(), dq.delta_minus.unwrap()),
            (dq.alpha_plus.unwrap(), dq.delta_plus.unwrap()),
        ] {
            let lam = c(0.0, -dq.gamma_plus) - a;
            let v = chain_vector(&diag, zeta, lam);
            assert!((v[0] - d / (xi3 * c(2.0, 0.0))).norm() < 1e-10 * (1.0 + v[0].norm()));
        }

        let p = plane(Topology::FiveModeLinear, 0.5, 0.6, 0.2);
        let zeta = derived_quantities(&p, c(0.0, 0.0)).unwrap().zeta;
        let dq = derived_quantities(&p, zeta).unwrap();
        let m = build_reduced_matrix(&p, zeta).unwrap();
        let diag: Vec<C> = (0..5).map(|i| m[(i, i)]).collect();
        for (a, mm, nn) in [
            (dq.alpha_minus.unwrap(), dq.m_minus.unwrap(), dq.n_minus.unwrap()),
            (dq.alpha_plus.unwrap(), dq.m_plus.unwrap(), dq.n_plus.unwrap()),
        ] {
            let lam = c(0.0, -dq.gamma_plus) - a;
            let v = chain_vector(&diag, zeta, lam);
            assert!((v[1] - mm / zeta.powu(3)).norm() < 1e-10 * (1.0 + v[1].norm()));
            assert!((v[0] - nn / zeta.powu(4)).norm() < 1e-10 * (1.0 + v[0].norm()));
        }
    }
}
