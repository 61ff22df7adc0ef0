//! Degeneracy atlas: classification of spectral points into regular,
//! diabolical (DP), exceptional (EP), and hybrid (HP) degeneracies, the
//! analytic degeneracy loci in the (κ/ε, γ₋/ε) plane, and the plane scanner.
//!
//! Every topology's coalescences sit on ellipses (κ/ε)² + (γ₋/ε)²/c = 1 on
//! which one of the branch quantities (β, μ, α±, β₁, β₂) vanishes at ξ = ζ.
//! [`hp_locus`] enumerates those ellipses with the degeneracy structure
//! expected at their generic points, [`classify_point`] measures the actual
//! structure of the full 2n×2n matrix through the rank-revealing Jordan
//! analysis, and [`scan_plane`] sweeps a grid, emitting the reduced
//! eigenvalues, the branch residuals, and a degeneracy flag per point.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::network::{build_full_matrix, params_from_plane, PlanePoint, SystemParams, Topology};
use crate::numeric::{cluster_eigenvalues, eig, frob_norm, jordan_structure, TolPolicy};
use crate::spectra::{derived_quantities, reduced_eigenvalues};
use crate::{c, CMat, Error, Result, C};

/// Minimum pairwise eigenvalue gap (relative to max(1, ε)) under which a scan
/// point is flagged degenerate.
pub const SCAN_GAP_TOL: f64 = 1e-6;

/// Which derived branch quantity a locus or residual refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchId {
    /// β.
    Beta,
    /// μ (four-mode linear chains).
    Mu,
    /// α₊.
    AlphaPlus,
    /// α₋.
    AlphaMinus,
    /// β₁ (pyramid).
    Beta1,
    /// β₂ (pyramid).
    Beta2,
}

impl BranchId {
    /// Stable lowercase name used in CSV column headers.
    pub fn name(self) -> &'static str {
        match self {
            BranchId::Beta => "beta",
            BranchId::Mu => "mu",
            BranchId::AlphaPlus => "alpha_plus",
            BranchId::AlphaMinus => "alpha_minus",
            BranchId::Beta1 => "beta1",
            BranchId::Beta2 => "beta2",
        }
    }
}

/// Degeneracy classification of one eigenvalue cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyClass {
    /// Algebraic multiplicity 1.
    Regular,
    /// Algebraic ≥ 2, all Jordan blocks of size 1 (independent eigenvectors).
    Diabolical,
    /// Geometric multiplicity 1 with algebraic ≥ 2 (a single Jordan chain).
    Exceptional,
    /// Geometric ≥ 2 with at least one Jordan block of size ≥ 2: coinciding
    /// exceptional points with independent eigenvectors.
    Hybrid,
}

/// One clustered eigenvalue of a dynamical matrix with its measured Jordan
/// structure.
#[derive(Debug, Clone, Serialize)]
pub struct DegeneracyCluster {
    /// Cluster representative (mean of the clustered numeric eigenvalues).
    pub eigenvalue: C,
    /// Algebraic multiplicity.
    pub algebraic: usize,
    /// Geometric multiplicity = diabolical degeneracy (DD).
    pub geometric: usize,
    /// Jordan block sizes, descending.
    pub blocks: Vec<usize>,
    /// The classification implied by the block structure.
    pub class: DegeneracyClass,
    /// Exceptional degeneracy ED = largest Jordan block.
    pub exceptional_order: usize,
    /// Diabolical degeneracy DD = geometric multiplicity.
    pub diabolical_order: usize,
}

/// An analytic degeneracy locus: the ellipse (κ/ε)² + (γ₋/ε)²/c = 1 on which
/// `branch` vanishes at ξ = ζ, with the cluster structure expected at its
/// generic (non-corner) points.
#[derive(Debug, Clone, Serialize)]
pub struct LocusSpec {
    /// Topology the locus belongs to.
    pub topology: Topology,
    /// Ellipse coefficient c > 0.
    pub c: f64,
    /// The branch quantity that vanishes on the locus.
    pub branch: BranchId,
    /// Expected degenerate clusters at a generic locus point, as
    /// (algebraic, ED, DD) triples.
    pub expected: Vec<(usize, usize, usize)>,
}

impl LocusSpec {
    /// A point exactly on the ellipse at angle θ ∈ (0, π):
    /// κ/ε = cos θ, γ₋/ε = √c·sin θ.
    pub fn point_at(&self, theta: f64) -> PlanePoint {
        PlanePoint::new(theta.cos(), self.c.sqrt() * theta.sin())
    }
}

/// Rectangular scan grid over the dimensionless parameter plane.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanGrid {
    /// κ/ε range as (min, max, count).
    pub kappa: (f64, f64, usize),
    /// γ₋/ε range as (min, max, count).
    pub gamma_minus: (f64, f64, usize),
    /// Fixed γ₊/ε for the whole scan.
    pub gamma_plus: f64,
}

impl ScanGrid {
    /// The default atlas grid: κ/ε ∈ [0, 1.5], γ₋/ε ∈ [−1.5, 1.5], 301×301,
    /// γ₊ = 0.
    pub fn default_plane() -> Self {
        Self {
            kappa: (0.0, 1.5, 301),
            gamma_minus: (-1.5, 1.5, 301),
            gamma_plus: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, (lo, hi, n)) in [("kappa", self.kappa), ("gamma_minus", self.gamma_minus)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidInput(format!(
                    "{name} range [{lo}, {hi}] is not a finite increasing interval"
                )));
            }
            if n < 2 {
                return Err(Error::InvalidInput(format!(
                    "{name} count {n} must be at least 2"
                )));
            }
        }
        if !self.gamma_plus.is_finite() {
            return Err(Error::InvalidInput("non-finite gamma_plus".into()));
        }
        Ok(())
    }

    fn axis(range: (f64, f64, usize), i: usize) -> f64 {
        let (lo, hi, n) = range;
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }

    /// The larger of the two grid step sizes.
    pub fn max_step(&self) -> f64 {
        let sx = (self.kappa.1 - self.kappa.0) / (self.kappa.2 - 1) as f64;
        let sy = (self.gamma_minus.1 - self.gamma_minus.0) / (self.gamma_minus.2 - 1) as f64;
        sx.max(sy)
    }
}

/// One scan row.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    /// κ/ε of the grid point.
    pub kappa_over_eps: f64,
    /// γ₋/ε of the grid point.
    pub gamma_minus_over_eps: f64,
    /// Reduced eigenvalues at ξ = +ζ (for the pyramid, both branches:
    /// first the +ζ five, then the −ζ five).
    pub lambdas: Vec<C>,
    /// Branch residual magnitudes, in the order of [`ScanTable::branches`].
    pub residuals: Vec<f64>,
    /// True when the point sits at (or Newton-near) a degeneracy.
    pub degenerate_flag: bool,
}

/// Complete scan output in deterministic row-major order (γ₋ rows, κ
/// columns).
#[derive(Debug, Clone, Serialize)]
pub struct ScanTable {
    /// Scanned topology.
    pub topology: Topology,
    /// The grid that was scanned.
    pub grid: ScanGrid,
    /// Branch identifiers for the residual columns.
    pub branches: Vec<BranchId>,
    /// Number of eigenvalue columns per row.
    pub n_lambdas: usize,
    /// The scan rows.
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    /// CSV emission: kappa_over_eps, gamma_minus_over_eps, re_lambda_1..n,
    /// im_lambda_1..n, residual_<branch>…, degenerate_flag.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("kappa_over_eps,gamma_minus_over_eps");
        for i in 1..=self.n_lambdas {
            out.push_str(&format!(",re_lambda_{i}"));
        }
        for i in 1..=self.n_lambdas {
            out.push_str(&format!(",im_lambda_{i}"));
        }
        for b in &self.branches {
            out.push_str(&format!(",residual_{}", b.name()));
        }
        out.push_str(",degenerate_flag\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{:.16e}",
                r.kappa_over_eps, r.gamma_minus_over_eps
            ));
            for l in &r.lambdas {
                out.push_str(&format!(",{:.16e}", l.re));
            }
            for l in &r.lambdas {
                out.push_str(&format!(",{:.16e}", l.im));
            }
            for q in &r.residuals {
                out.push_str(&format!(",{q:.16e}"));
            }
            out.push_str(if r.degenerate_flag { ",1\n" } else { ",0\n" });
        }
        out
    }
}

/// The analytic degeneracy loci of a topology, with the cluster structure
/// expected at generic points of each ellipse.
pub fn hp_locus(topology: Topology) -> Vec<LocusSpec> {
    let spec = |c: f64, branch: BranchId, expected: Vec<(usize, usize, usize)>| LocusSpec {
        topology,
        c,
        branch,
        expected,
    };
    match topology {
        Topology::TwoMode => vec![spec(1.0, BranchId::Beta, vec![(4, 2, 2)])],
        Topology::ThreeModeLinear => vec![spec(2.0, BranchId::Beta, vec![(6, 3, 2)])],
        Topology::FourModeLinearL1 => vec![spec(
            5.0 / 16.0,
            BranchId::Mu,
            vec![(4, 2, 2), (4, 2, 2)],
        )],
        Topology::FourModeLinearL2 => {
            let s5 = 5.0_f64.sqrt();
            vec![
                spec((3.0 + s5) / 2.0, BranchId::AlphaPlus, vec![(4, 2, 2)]),
                spec((3.0 - s5) / 2.0, BranchId::AlphaMinus, vec![(4, 2, 2)]),
            ]
        }
        Topology::FourModeCircular => vec![spec(1.0, BranchId::Beta, vec![(4, 2, 2), (4, 2, 2)])],
        Topology::FiveModeLinear => vec![spec(0.25, BranchId::Beta, vec![(4, 2, 2), (4, 2, 2)])],
        Topology::FiveModePyramid => vec![
            spec(1.0, BranchId::Beta1, vec![(2, 2, 1), (2, 2, 1)]),
            spec(5.0, BranchId::Beta2, vec![(2, 2, 1), (2, 2, 1)]),
        ],
    }
}

/// Evaluates every branch quantity of the topology at ξ = ζ for the given
/// plane point; an entry is zero (within 10⁻¹²) iff the point lies on that
/// branch's vanishing locus.
pub fn locus_residual(topology: Topology, point: PlanePoint) -> Result<BTreeMap<BranchId, C>> {
    let params = params_from_plane(topology, 1.0, point)?;
    let zeta = derived_quantities(&params, c(0.0, 0.0))?.zeta;
    let dq = derived_quantities(&params, zeta)?;
    let mut map = BTreeMap::new();
    if let Some(b) = dq.beta {
        map.insert(BranchId::Beta, b);
    }
    if let Some(m) = dq.mu {
        map.insert(BranchId::Mu, m);
    }
    if let Some(a) = dq.alpha_plus {
        map.insert(BranchId::AlphaPlus, a);
    }
    if let Some(a) = dq.alpha_minus {
        map.insert(BranchId::AlphaMinus, a);
    }
    if let Some(b) = dq.beta1 {
        map.insert(BranchId::Beta1, b);
    }
    if let Some(b) = dq.beta2 {
        map.insert(BranchId::Beta2, b);
    }
    Ok(map)
}

fn classify(profile_blocks: &[usize], algebraic: usize, geometric: usize) -> DegeneracyClass {
    let max_block = profile_blocks.iter().copied().max().unwrap_or(1);
    if algebraic == 1 {
        DegeneracyClass::Regular
    } else if max_block == 1 {
        DegeneracyClass::Diabolical
    } else if geometric == 1 {
        DegeneracyClass::Exceptional
    } else {
        DegeneracyClass::Hybrid
    }
}

/// Clusters the eigenvalues of an arbitrary square complex matrix and
/// measures each cluster's Jordan structure.
pub fn classify_matrix(m: &CMat, policy: &TolPolicy) -> Result<Vec<DegeneracyCluster>> {
    let values: Vec<C> = eig(m)?.into_iter().map(|(l, _)| l).collect();
    let scale = frob_norm(m);
    let clusters = cluster_eigenvalues(&values, policy, scale);
    let mut out = Vec::with_capacity(clusters.len());
    for idx in clusters {
        let mean: C = idx.iter().map(|&i| values[i]).sum::<C>() / c(idx.len() as f64, 0.0);
        let profile = jordan_structure(m, mean, policy).map_err(|e| {
            Error::IllConditioned(format!(
                "cluster at {mean} (size {}): {e}",
                idx.len()
            ))
        })?;
        out.push(DegeneracyCluster {
            eigenvalue: mean,
            algebraic: profile.algebraic,
            geometric: profile.geometric,
            class: classify(&profile.blocks, profile.algebraic, profile.geometric),
            exceptional_order: profile.blocks.iter().copied().max().unwrap_or(1),
            diabolical_order: profile.geometric,
            blocks: profile.blocks,
        });
    }
    Ok(out)
}

/// Classifies the degeneracies of the full 2n×2n dynamical matrix at a
/// parameter point.  Works at every point, including ζ = 0 corners where the
/// analytic assembly is undefined, since it is purely numeric.
pub fn classify_point(params: &SystemParams, policy: &TolPolicy) -> Result<Vec<DegeneracyCluster>> {
    let m = build_full_matrix(params)?;
    classify_matrix(&m.entries, policy)
}

/// Scans the plane grid: per point, the reduced eigenvalues at ξ = +ζ (both
/// branches for the pyramid), the branch residual magnitudes, and a
/// degeneracy flag.
///
/// The flag trips when either (a) the minimum pairwise gap among a branch's
/// reduced eigenvalues falls below 10⁻⁶·max(1, ε), or (b) the first-order
/// Newton distance |p|/‖∇p‖ of one of the topology's locus-ellipse polynomials
/// p = x² + y²/c − 1 is at most one grid step — the grid almost never lands
/// exactly on the ellipses, and the Newton criterion marks the grid points
/// adjacent to them scale-independently.
pub fn scan_plane(
    topology: Topology,
    epsilon: f64,
    grid: &ScanGrid,
    _policy: &TolPolicy,
) -> Result<ScanTable> {
    grid.validate()?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon {epsilon} must be positive")));
    }
    let branches: Vec<BranchId> = locus_residual(topology, PlanePoint::new(0.0, 0.0))?
        .keys()
        .copied()
        .collect();
    let loci = hp_locus(topology);
    let step = grid.max_step();
    let gap_tol = SCAN_GAP_TOL * epsilon.max(1.0);
    let (nk, ng) = (grid.kappa.2, grid.gamma_minus.2);

    let rows: Vec<Result<ScanRow>> = (0..ng * nk)
        .into_par_iter()
        .map(|flat| {
            let (gi, ki) = (flat / nk, flat % nk);
            let x = ScanGrid::axis(grid.kappa, ki);
            let y = ScanGrid::axis(grid.gamma_minus, gi);
            let point = PlanePoint::new(x, y).with_gamma_plus(grid.gamma_plus);
            let params = params_from_plane(topology, epsilon, point)?;
            let zeta = derived_quantities(&params, c(0.0, 0.0))?.zeta;

            let mut lambdas = reduced_eigenvalues(&params, zeta)?;
            let mut min_gap = min_pairwise_gap(&lambdas);
            if topology == Topology::FiveModePyramid {
                let other = reduced_eigenvalues(&params, -zeta)?;
                min_gap = min_gap.min(min_pairwise_gap(&other));
                lambdas.extend(other);
            }

            let res_map = locus_residual(topology, point)?;
            let residuals: Vec<f64> = branches.iter().map(|b| res_map[b].norm()).collect();

            let newton_near = loci.iter().any(|l| {
                let p = x * x + y * y / l.c - 1.0;
                let grad = (2.0 * x).hypot(2.0 * y / l.c);
                grad > 0.0 && p.abs() / grad <= step
            });
            let degenerate_flag = min_gap < gap_tol || newton_near;

            Ok(ScanRow {
                kappa_over_eps: x,
                gamma_minus_over_eps: y,
                lambdas,
                residuals,
                degenerate_flag,
            })
        })
        .collect();

    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let n_lambdas = rows.first().map_or(0, |r| r.lambdas.len());
    Ok(ScanTable {
        topology,
        grid: *grid,
        branches,
        n_lambdas,
        rows,
    })
}

fn min_pairwise_gap(values: &[C]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            g = g.min((values[i] - values[j]).norm());
        }
    }
    g
}
