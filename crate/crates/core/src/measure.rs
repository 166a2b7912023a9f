//! Many-body distance between two states with the same particle number.
//!
//! Starting from `H_0 = span{|A>}`, every operator of an [`OperatorSet`] is
//! applied to every vector of the newest space `H_d`. Whatever part of the
//! result is not already in `H_0 + ... + H_d` spans `H_{d+1}`. The target
//! `|B>` is then split over the spaces, and `P(D = d)` is its weight in `H_d`.
//!
//! Numerical rank of each new space is decided by one SVD of the projected
//! candidate block: left singular vectors with `sigma > rank_tol * sigma_max`
//! are kept. The kept vectors are projected once more and re-orthonormalized,
//! since singular vectors belonging to small singular values carry rounding
//! error of order `eps * sigma_max / sigma`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::basis::{Flavor, OccupationBasis, StateVector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{self, LinearOperator};
use crate::spectra::{CurrentStatePair, Extraction, FluxQubit};

const NORMALIZATION_TOL: f64 = 1e-10;
const NEGATIVE_WEIGHT_TOL: f64 = 1e-12;

/// The single-particle operators used to grow the chain.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    ops: Vec<LinearOperator>,
    label: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorSetKind {
    /// Hops between every ordered pair of modes plus every number operator.
    HopsAndNumbers,
    /// Hops only.
    HopsOnly,
}

impl OperatorSet {
    pub fn new(label: impl Into<String>, ops: Vec<LinearOperator>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::Parameter("operator set is empty".into()));
        };
        for op in &ops[1..] {
            first.basis().ensure_same(op.basis())?;
        }
        Ok(Self { ops, label: label.into() })
    }

    pub fn ops(&self) -> &[LinearOperator] {
        &self.ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        self.ops[0].basis()
    }

    /// Hop operators for whatever flavor `basis` has: Cooper-pair hops on the
    /// charge basis, `c†_i c_j` otherwise. Ordered pairs `(i, j)` run in
    /// lexicographic order, followed by `n_1 .. n_M` when requested.
    pub fn single_particle(basis: &Arc<OccupationBasis>, kind: OperatorSetKind) -> Result<Self> {
        let modes = basis.flavor().n_modes();
        let mut ops = Vec::new();
        for i in 1..=modes {
            for j in 1..=modes {
                if i == j {
                    continue;
                }
                ops.push(match basis.flavor() {
                    Flavor::Charge3 { .. } => operators::pair_hop(basis, i, j)?,
                    Flavor::Boson2 { .. } => operators::boson_hop(basis, i, j)?,
                    Flavor::Fermion { .. } => operators::fermion_hop(basis, i, j)?,
                });
            }
        }
        let label = match kind {
            OperatorSetKind::HopsOnly => "hops_only",
            OperatorSetKind::HopsAndNumbers => {
                for j in 1..=modes {
                    ops.push(operators::number_op(basis, j)?);
                }
                "hops_and_numbers"
            }
        };
        Self::new(label, ops)
    }

    /// Same operators in a different order.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.ops.len()];
        if order.len() != self.ops.len() || order.iter().any(|&k| k >= seen.len() || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::Parameter("not a permutation of the operator set".into()));
        }
        Ok(Self {
            ops: order.iter().map(|&k| self.ops[k].clone()).collect(),
            label: format!("{} (permuted)", self.label),
        })
    }
}

/// Orthonormal blocks spanning `H_0, H_1, ...`, stored as column matrices.
#[derive(Clone, Debug)]
pub struct SubspaceChain {
    basis: Arc<OccupationBasis>,
    blocks: Vec<DMatrix<C64>>,
    exhausted: bool,
}

impl SubspaceChain {
    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.ncols()).collect()
    }

    pub fn depth(&self) -> usize {
        self.blocks.len() - 1
    }

    /// True once a step produced no new direction.
    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn block_matrix(&self, d: usize) -> &DMatrix<C64> {
        &self.blocks[d]
    }

    pub fn block(&self, d: usize) -> Vec<StateVector> {
        self.blocks[d]
            .column_iter()
            .map(|c| StateVector::new(self.basis.clone(), c.into_owned()).expect("block column has basis length"))
            .collect()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.ncols()).sum()
    }

    /// All vectors of all blocks side by side.
    pub fn stacked(&self) -> DMatrix<C64> {
        let mut all = DMatrix::zeros(self.basis.len(), self.total_dim());
        let mut col = 0;
        for b in &self.blocks {
            all.columns_mut(col, b.ncols()).copy_from(b);
            col += b.ncols();
        }
        all
    }
}

/// Grows a [`SubspaceChain`] one level at a time.
struct ChainGrower<'a> {
    ops: &'a OperatorSet,
    rank_tol: f64,
    chain: SubspaceChain,
    // every vector generated so far, kept contiguous for the projections
    span: DMatrix<C64>,
}

impl<'a> ChainGrower<'a> {
    fn new(source: &StateVector, ops: &'a OperatorSet, rank_tol: f64) -> Result<Self> {
        ops.basis().ensure_same(source.basis())?;
        if !source.is_normalized(NORMALIZATION_TOL) {
            return Err(Error::Contract(format!(
                "source state must be normalized, has norm^2 = {}",
                source.norm_squared()
            )));
        }
        if !(rank_tol > 0.0 && rank_tol < 1.0) {
            return Err(Error::Parameter(format!("rank_tol must lie in (0, 1), got {rank_tol}")));
        }
        let first = DMatrix::from_column_slice(source.len(), 1, source.amplitudes().as_slice());
        Ok(Self {
            ops,
            rank_tol,
            span: first.clone(),
            chain: SubspaceChain { basis: source.basis().clone(), blocks: vec![first], exhausted: false },
        })
    }

    fn project_out(&self, m: &mut DMatrix<C64>) {
        for _ in 0..2 {
            let coeffs = self.span.ad_mul(m);
            *m -= &self.span * coeffs;
        }
    }

    /// Appends the next block; returns false (and marks the chain exhausted)
    /// when no new direction appears.
    fn grow(&mut self) -> Result<bool> {
        if self.chain.exhausted {
            return Ok(false);
        }
        let n = self.chain.basis.len();
        let last = self.chain.blocks.last().expect("chain has block 0");
        let width = last.ncols();
        let mut candidates = DMatrix::zeros(n, width * self.ops.len());
        for (k, op) in self.ops.ops().iter().enumerate() {
            candidates.columns_mut(k * width, width).copy_from(&op.apply_matrix(last));
        }
        self.project_out(&mut candidates);

        let Some(mut kept) = self.significant_directions(&candidates)? else {
            self.chain.exhausted = true;
            return Ok(false);
        };
        self.project_out(&mut kept);
        let block = linalg::thin_q(&kept);

        if self.span.ncols() + block.ncols() > n {
            return Err(Error::Numerical(format!(
                "generated {} directions in a {n}-dimensional space; rank tolerance {} is too loose",
                self.span.ncols() + block.ncols(),
                self.rank_tol
            )));
        }
        let old = self.span.ncols();
        self.span = self.span.clone().resize_horizontally(old + block.ncols(), C64::new(0.0, 0.0));
        self.span.columns_mut(old, block.ncols()).copy_from(&block);
        self.chain.blocks.push(block);
        Ok(true)
    }

    fn significant_directions(&self, candidates: &DMatrix<C64>) -> Result<Option<DMatrix<C64>>> {
        if candidates.ncols() == 0 {
            return Ok(None);
        }
        let (sigma, u) = linalg::left_singular(candidates)?;
        let sigma_max = sigma.first().copied().unwrap_or(0.0);
        if sigma_max < self.rank_tol {
            return Ok(None);
        }
        let rank = sigma.iter().take_while(|&&s| s > self.rank_tol * sigma_max).count();
        Ok(Some(u.columns(0, rank).into_owned()))
    }
}

/// Builds `H_0 .. H_{d_max}` from `source`, stopping early if the chain
/// exhausts.
pub fn generate_chain(source: &StateVector, ops: &OperatorSet, d_max: usize, rank_tol: f64) -> Result<SubspaceChain> {
    let mut grower = ChainGrower::new(source, ops, rank_tol)?;
    for _ in 0..d_max {
        if !grower.grow()? {
            break;
        }
    }
    Ok(grower.chain)
}

/// Weights `P(D = d)` of a target state over a chain.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceDistribution {
    pub weights: Vec<f64>,
    /// Weight of the target outside every generated block.
    pub residual: f64,
    /// Conditional mean `sum d P(d) / sum P(d)`.
    pub mean: f64,
    /// Dimensions of the blocks that were generated.
    pub dims: Vec<usize>,
    pub exhausted: bool,
}

impl DistanceDistribution {
    fn from_weights(weights: Vec<f64>, dims: Vec<usize>, exhausted: bool) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        let residual = clamp_weight(1.0 - total, "residual")?;
        let mut dist = Self { weights, residual, mean: f64::NAN, dims, exhausted };
        // a target with no weight in any block has no mean; keep NaN
        if let Ok(mean) = average_distance(&dist) {
            dist.mean = mean;
        }
        Ok(dist)
    }

    /// `P(D = d)`, zero beyond the generated depth.
    pub fn p(&self, d: usize) -> f64 {
        self.weights.get(d).copied().unwrap_or(0.0)
    }

    pub fn max_depth(&self) -> usize {
        self.weights.len().saturating_sub(1)
    }
}

fn clamp_weight(w: f64, what: &str) -> Result<f64> {
    if w >= 0.0 {
        Ok(w)
    } else if w >= -NEGATIVE_WEIGHT_TOL {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("{what} weight {w:e} is negative")))
    }
}

fn block_weight(block: &DMatrix<C64>, target: &DVector<C64>, target_norm2: f64) -> Result<f64> {
    clamp_weight(block.ad_mul(target).norm_squared() / target_norm2, "block")
}

fn check_target(target: &StateVector, basis: &OccupationBasis) -> Result<f64> {
    basis.ensure_same(target.basis())?;
    let norm2 = target.norm_squared();
    if (norm2 - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Contract(format!("target state must be normalized, has norm^2 = {norm2}")));
    }
    Ok(norm2)
}

/// Splits `target` over the blocks of `chain`. Phases of the components are
/// dropped; only their weights are returned.
pub fn decompose(target: &StateVector, chain: &SubspaceChain) -> Result<DistanceDistribution> {
    let norm2 = check_target(target, &chain.basis)?;
    let weights = chain
        .blocks
        .iter()
        .map(|b| block_weight(b, target.amplitudes(), norm2))
        .collect::<Result<Vec<_>>>()?;
    DistanceDistribution::from_weights(weights, chain.dims(), chain.exhausted)
}

/// `sum d P(d) / sum P(d)`.
pub fn average_distance(dist: &DistanceDistribution) -> Result<f64> {
    let total: f64 = dist.weights.iter().sum();
    // below the clamp tolerance the weights are rounding noise
    if !(total > NEGATIVE_WEIGHT_TOL) {
        return Err(Error::Contract("distance distribution has no weight".into()));
    }
    let first: f64 = dist.weights.iter().enumerate().map(|(d, w)| d as f64 * w).sum();
    Ok(first / total)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceOptions {
    pub d_max: usize,
    /// Relative singular-value cutoff for the numerical rank of each block.
    pub rank_tol: f64,
    /// Growth stops once the captured weight reaches `1 - weight_tol`.
    pub weight_tol: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self { d_max: 12, rank_tol: 1e-10, weight_tol: 1e-6 }
    }
}

/// Distance distribution from `source` to `target`, growing the chain only as
/// deep as needed to capture all but `weight_tol` of the target.
pub fn distance(
    source: &StateVector,
    target: &StateVector,
    ops: &OperatorSet,
    opts: &DistanceOptions,
) -> Result<DistanceDistribution> {
    if !(opts.weight_tol >= 0.0 && opts.weight_tol < 1.0) {
        return Err(Error::Parameter(format!("weight_tol must lie in [0, 1), got {}", opts.weight_tol)));
    }
    let mut grower = ChainGrower::new(source, ops, opts.rank_tol)?;
    let norm2 = check_target(target, &grower.chain.basis)?;
    let mut weights = vec![block_weight(&grower.chain.blocks[0], target.amplitudes(), norm2)?];
    while weights.iter().sum::<f64>() < 1.0 - opts.weight_tol && weights.len() <= opts.d_max {
        if !grower.grow()? {
            break;
        }
        let block = grower.chain.blocks.last().expect("just grown");
        weights.push(block_weight(block, target.amplitudes(), norm2)?);
    }
    let chain = grower.chain;
    let dist = DistanceDistribution::from_weights(weights, chain.dims(), chain.exhausted)?;
    if chain.exhausted && dist.residual > opts.weight_tol {
        return Err(Error::Unreachable { residual: dist.residual, depth: chain.depth() });
    }
    Ok(dist)
}

/// Floor on each half of a filter extraction in [`flux_cat`].
pub const FILTER_WEIGHT_FLOOR: f64 = 1e-6;

/// The current states of a diagonalized flux qubit and the distance from
/// `|+I>` to `|-I>`.
#[derive(Clone, Debug)]
pub struct FluxCat {
    pub pair: CurrentStatePair,
    pub ops: OperatorSet,
    pub dist: DistanceDistribution,
}

impl FluxCat {
    /// The distance in the other direction, `|-I>` to `|+I>`.
    pub fn reverse(&self, opts: &DistanceOptions) -> Result<DistanceDistribution> {
        distance(&self.pair.minus, &self.pair.plus, &self.ops, opts)
    }
}

pub fn flux_cat(
    qubit: &FluxQubit,
    kind: OperatorSetKind,
    extraction: Extraction,
    opts: &DistanceOptions,
) -> Result<FluxCat> {
    let pair = qubit.current_states(extraction, FILTER_WEIGHT_FLOOR)?;
    let ops = OperatorSet::single_particle(qubit.basis(), kind)?;
    let dist = distance(&pair.plus, &pair.minus, &ops, opts)?;
    Ok(FluxCat { pair, ops, dist })
}
