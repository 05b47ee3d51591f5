//! Isotypic decomposition of a local representation and mechanical
//! verification of the multiplicity theorem.
//!
//! The puncture invariants P_0..P_s act centrally, and each image satisfies
//! rho(P_j)^N = w_j Id for a predictable root of unity w_j (a product of
//! edge-weight powers).  Eigenvalues are therefore never *solved* for: the
//! N candidates are the canonical N-th root of w_j times mu_N, and the
//! eigenprojector for a candidate mu is the exact root-of-unity Fourier sum
//!
//! ```text
//! Pi_mu = (1/N) * sum_{t=0}^{N-1} mu^{-t} M^t.
//! ```
//!
//! Joint blocks are products of the commuting single-puncture projectors
//! for punctures 1..s; P_0's eigenvalue is read off each block afterwards.
//! Ranks are exact traces of exact idempotents (hence integers), and the
//! verified claims are:
//!
//!   * every block has rank N^{m-s}, the ranks sum to N^m;
//!   * each rank is N^g times the irreducible dimension N^{3g-3+(s+1)};
//!   * the block eigenvalue tuples satisfy p_0 p_1 ... p_s = c^2, and all
//!     other candidate tuples have rank zero;
//!   * optionally, each block's commutant has dimension N^{2g}, certifying
//!     that the block is isotypic with multiplicity N^g.
//!
//! The commutant is computed combinatorially: for monomial generator images
//! the commutation system [M, rho(X_e)] = 0 says M[pi(u), pi(v)] =
//! (c_u / c_v) M[u, v], so solutions are supported on orbits of index pairs
//! with a consistent scalar cocycle; block dimensions follow by compressing
//! the orbit basis with the block projector and row-reducing.  A character
//! sum over the finite Heisenberg-like group generated by the images gives
//! an independent oracle for the same dimension.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclotomic::{CycError, CycField, CycScalar, RootOfUnity};
use crate::par::{self, Parallelism};
use crate::qtorus::QAlgebra;
use crate::sparse::{rank_of_rows, RepMatrix};
use crate::trianglerep::{LocalRep, MonomialAction, RepError};
use crate::triangulation::SurfaceCounts;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("decomposition requires a closed surface")]
    OpenSurface,
    #[error("puncture {puncture}: the image of P^N is not the predicted scalar")]
    PowerScalarMismatch { puncture: usize },
    #[error("candidate eigenvalue is not an N-th root of the declared power scalar")]
    EigenvalueOutsideFiber,
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Cyc(#[from] CycError),
}

/// The scalar w with rho(P_j)^N = w Id, predicted from the edge weights as
/// prod_e x_e^{k_je} by pure exponent arithmetic.
pub fn predicted_power_scalar(rep: &LocalRep, j: usize) -> RootOfUnity {
    let profile = rep.triangulation().puncture_profile();
    let mut w = RootOfUnity::one(rep.field().order());
    for (e, x) in rep.weights().iter().enumerate() {
        w = w.mul(&x.pow(profile.k(j, e) as i64));
    }
    w
}

/// Predicts w and verifies rho(P_j)^N = w Id exactly.
pub fn power_scalar(rep: &LocalRep, j: usize) -> Result<RootOfUnity, DecomposeError> {
    let predicted = predicted_power_scalar(rep, j);
    let nth = rep.puncture_action(j).pow(rep.n() as i64);
    match nth.is_scalar() {
        Some(w) if w == predicted => Ok(predicted),
        _ => Err(DecomposeError::PowerScalarMismatch { puncture: j }),
    }
}

/// Exact eigenprojector of M onto mu, given M^N = w Id and mu^N = w.
pub fn spectral_projector(
    field: &CycField,
    m: &RepMatrix,
    n: u64,
    mu: &RootOfUnity,
    w: &RootOfUnity,
) -> Result<RepMatrix, DecomposeError> {
    if mu.pow(n as i64) != *w {
        return Err(DecomposeError::EigenvalueOutsideFiber);
    }
    let dim = m.dim();
    let mut acc = RepMatrix::identity(field, dim);
    let mut power = RepMatrix::identity(field, dim);
    for t in 1..n {
        power = power.mul(field, m);
        let coeff = mu.pow(-(t as i64)).to_scalar(field);
        acc = acc.add(field, &power.scale(field, &coeff));
    }
    let inv_n = field.from_rational(BigRational::new(BigInt::one(), BigInt::from(n)));
    Ok(acc.scale(field, &inv_n))
}

/// Projector from precomputed powers of a monomial action (fast path).
fn projector_from_powers(
    field: &CycField,
    powers: &[MonomialAction],
    mu: &RootOfUnity,
) -> RepMatrix {
    let n = powers.len() as u64;
    let dim = powers[0].dim();
    let triplets = powers.iter().enumerate().flat_map(|(t, a)| {
        let coeff = mu.pow(-(t as i64));
        (0..dim).map(move |u| (a.perm[u], u, coeff.mul(&a.vals[u]).to_scalar(field)))
    });
    let inv_n = field.from_rational(BigRational::new(BigInt::one(), BigInt::from(n)));
    RepMatrix::from_triplets(field, dim, triplets).scale(field, &inv_n)
}

/// Left-multiplies a sparse matrix by a monomial action.
fn apply_action(field: &CycField, a: &MonomialAction, m: &RepMatrix) -> RepMatrix {
    let triplets: Vec<(usize, usize, CycScalar)> = m
        .entries()
        .map(|(r, c, v)| (a.perm[r], c, field.mul(&a.vals[r].to_scalar(field), v)))
        .collect();
    RepMatrix::from_triplets(field, m.dim(), triplets)
}

#[derive(Debug, Clone, Copy)]
pub struct DecomposeOptions {
    /// Compute and check each block's commutant dimension (= N^{2g}).
    pub check_commutant: bool,
    /// Re-derive each block rank by row reduction as a cross-check.
    pub cross_check_rank: bool,
    pub parallelism: Parallelism,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            check_commutant: false,
            cross_check_rank: false,
            parallelism: Parallelism::Auto,
        }
    }
}

/// One joint eigenspace of the puncture invariants.
#[derive(Debug, Clone)]
pub struct Block {
    /// The scalars (p_0, p_1, ..., p_s), p_0 read off rather than projected.
    pub scalars: Vec<RootOfUnity>,
    pub projector: RepMatrix,
    pub rank: u64,
    pub multiplicity: u64,
    pub commutant_dim: Option<u64>,
    pub elimination_rank: Option<u64>,
}

/// Pass/fail verdicts, one per verified identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub exchange_relations: bool,
    pub edge_power_scalars: bool,
    pub central_charge: bool,
    pub puncture_centrality: bool,
    pub puncture_power_scalars: bool,
    pub puncture_product_relation: bool,
    pub projectors_idempotent: bool,
    pub traces_integral: bool,
    pub block_scalar_action: bool,
    pub charge_constraint: bool,
    pub resolution_of_identity: bool,
    pub pairwise_orthogonal: bool,
    pub rank_uniform: bool,
    pub rank_sum: bool,
    pub rank_divisible: bool,
    pub multiplicity: bool,
    pub commutant: Option<bool>,
    pub rank_cross_check: Option<bool>,
}

impl Verdicts {
    pub fn entries(&self) -> Vec<(&'static str, Option<bool>)> {
        vec![
            ("exchange_relations", Some(self.exchange_relations)),
            ("edge_power_scalars", Some(self.edge_power_scalars)),
            ("central_charge", Some(self.central_charge)),
            ("puncture_centrality", Some(self.puncture_centrality)),
            ("puncture_power_scalars", Some(self.puncture_power_scalars)),
            ("puncture_product_relation", Some(self.puncture_product_relation)),
            ("projectors_idempotent", Some(self.projectors_idempotent)),
            ("traces_integral", Some(self.traces_integral)),
            ("block_scalar_action", Some(self.block_scalar_action)),
            ("charge_constraint", Some(self.charge_constraint)),
            ("resolution_of_identity", Some(self.resolution_of_identity)),
            ("pairwise_orthogonal", Some(self.pairwise_orthogonal)),
            ("rank_uniform", Some(self.rank_uniform)),
            ("rank_sum", Some(self.rank_sum)),
            ("rank_divisible", Some(self.rank_divisible)),
            ("multiplicity", Some(self.multiplicity)),
            ("commutant", self.commutant),
            ("rank_cross_check", self.rank_cross_check),
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.entries().iter().all(|(_, v)| *v != Some(false))
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub n: u64,
    pub counts: SurfaceCounts,
    pub weights: Vec<RootOfUnity>,
    pub charge: RootOfUnity,
    /// N^{3g-3+s} with s the number of punctures.
    pub irrep_dim: u64,
    /// N^{m-(s-1)}: the uniform block rank the theorem asserts.
    pub expected_block_rank: u64,
    /// N^g.
    pub expected_multiplicity: u64,
    pub blocks: Vec<Block>,
    pub verdicts: Verdicts,
    /// Human-readable diagnostics for every failed verdict, naming blocks.
    pub failures: Vec<String>,
}

impl Decomposition {
    pub fn passed(&self) -> bool {
        self.verdicts.all_pass()
    }

    pub fn report(&self) -> DecompositionReport {
        let scale = self.n;
        DecompositionReport {
            surface: SurfaceReport {
                g: self.counts.genus,
                s: self.counts.punctures,
                n: self.counts.edges,
                m: self.counts.faces,
            },
            n: self.n,
            weights: self.weights.iter().map(|w| w.render(scale)).collect(),
            charge: self.charge.render(scale),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockReport {
                    p: b.scalars.iter().map(|p| p.render(scale)).collect(),
                    rank: b.rank,
                    multiplicity: b.multiplicity,
                    commutant_dim: b.commutant_dim,
                })
                .collect(),
            verdicts: self.verdicts.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceReport {
    pub g: usize,
    pub s: usize,
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockReport {
    pub p: Vec<String>,
    pub rank: u64,
    pub multiplicity: u64,
    pub commutant_dim: Option<u64>,
}

/// JSON-stable report: roots of unity rendered as powers of q (fractional
/// exponents denote N-th roots, e.g. `q^(2/3)` for zeta_{27}^6 at N = 3).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub surface: SurfaceReport,
    #[serde(rename = "N")]
    pub n: u64,
    pub weights: Vec<String>,
    pub charge: String,
    pub blocks: Vec<BlockReport>,
    pub verdicts: Verdicts,
}

/// Classification checks: edge power scalars, central charge, block-scalar
/// action of every P_j, and the charge constraint per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationVerdicts {
    pub edge_power_scalars: bool,
    pub central_charge: bool,
    pub block_scalar_action: bool,
    pub charge_constraint: bool,
    pub failures: Vec<String>,
}

pub fn verify_classification(
    rep: &LocalRep,
    blocks: &[Block],
    mode: Parallelism,
) -> ClassificationVerdicts {
    let field = rep.field();
    let mut failures = Vec::new();

    let edge_power_scalars = match rep.verify_power_scalars(mode) {
        Ok(()) => true,
        Err(e) => {
            failures.push(e.to_string());
            false
        }
    };
    let central_charge = match rep.verify_central_charge() {
        Ok(()) => true,
        Err(e) => {
            failures.push(e.to_string());
            false
        }
    };

    let punctures = rep.triangulation().n_punctures();
    let p_actions: Vec<MonomialAction> = (0..punctures).map(|j| rep.puncture_action(j)).collect();
    let mut block_scalar_action = true;
    for (idx, block) in blocks.iter().enumerate() {
        for (j, p) in p_actions.iter().enumerate() {
            let lhs = apply_action(field, p, &block.projector);
            let rhs = block
                .projector
                .scale(field, &block.scalars[j].to_scalar(field));
            if lhs != rhs {
                block_scalar_action = false;
                failures.push(format!(
                    "block {}: P_{} does not act as the recorded scalar",
                    idx, j
                ));
            }
        }
    }

    let c2 = rep.charge().pow(2);
    let mut charge_constraint = true;
    for (idx, block) in blocks.iter().enumerate() {
        let mut prod = RootOfUnity::one(field.order());
        for p in &block.scalars {
            prod = prod.mul(p);
        }
        if prod != c2 {
            charge_constraint = false;
            failures.push(format!(
                "block {}: p_0...p_s = {} but c^2 = {}",
                idx,
                prod.render(rep.n()),
                c2.render(rep.n())
            ));
        }
    }

    ClassificationVerdicts {
        edge_power_scalars,
        central_charge,
        block_scalar_action,
        charge_constraint,
        failures,
    }
}

/// Joint decomposition into blocks plus full verification.
pub fn decompose(
    rep: &LocalRep,
    opts: &DecomposeOptions,
) -> Result<Decomposition, DecomposeError> {
    let counts = rep
        .triangulation()
        .counts()
        .ok_or(DecomposeError::OpenSurface)?;
    let field = rep.field();
    let n = rep.n();
    let dim = rep.dim();
    let punctures = counts.punctures;
    let edges = counts.edges;
    let mode = opts.parallelism;
    let mut failures: Vec<String> = Vec::new();

    // Representation-level identities.
    let exchange_relations = match rep.verify_exchange_against(rep.sigma(), mode) {
        Ok(()) => true,
        Err(e) => {
            failures.push(e.to_string());
            false
        }
    };

    // Algebra-level relation P_0 ... P_s = H^2.
    let alg = QAlgebra::new(rep.triangulation().sigma(), n);
    let profile = rep.triangulation().puncture_profile();
    let puncture_product_relation = alg.central_product_check(field, &profile);
    if !puncture_product_relation {
        failures.push("puncture product relation P_0...P_s = H^2 failed in the algebra".into());
    }

    // Puncture actions: centrality and N-th power scalars.
    let p_actions: Vec<MonomialAction> = (0..punctures).map(|j| rep.puncture_action(j)).collect();
    let mut puncture_centrality = true;
    for (j, p) in p_actions.iter().enumerate() {
        for e in 0..edges {
            if !p.commutes_with(rep.generator_action(e)) {
                puncture_centrality = false;
                failures.push(format!("P_{} does not commute with X_{}", j, e));
            }
        }
    }
    let mut puncture_power_scalars = true;
    let mut power_scalars = Vec::with_capacity(punctures);
    for j in 0..punctures {
        let predicted = predicted_power_scalar(rep, j);
        if power_scalar(rep, j).is_err() {
            puncture_power_scalars = false;
            failures.push(format!(
                "P_{}^N is not the predicted scalar {}",
                j,
                predicted.render(n)
            ));
        }
        power_scalars.push(predicted);
    }

    // Single-puncture projectors for punctures 1..s, one per candidate root.
    let projected = punctures - 1;
    let fibers: Vec<Vec<RootOfUnity>> = (1..punctures)
        .map(|j| power_scalars[j].nth_root_fiber(n))
        .collect::<Result<_, _>>()?;
    let single_projectors: Vec<Vec<RepMatrix>> = (0..projected)
        .map(|jj| {
            let mut powers = vec![MonomialAction::identity(dim, field.order())];
            for _ in 1..n {
                powers.push(p_actions[jj + 1].compose(powers.last().unwrap()));
            }
            par::map(fibers[jj].clone(), mode, |mu| {
                projector_from_powers(field, &powers, &mu)
            })
        })
        .collect();

    // Joint projectors over all candidate tuples, in lexicographic order.
    let tuples = mixed_radix_tuples(projected, n as usize);
    let p0_fiber = power_scalars[0].nth_root_fiber(n)?;
    let raw_blocks = par::map(tuples, mode, |idx| {
        let mut projector = RepMatrix::identity(field, dim);
        for (jj, &t) in idx.iter().enumerate() {
            projector = projector.mul(field, &single_projectors[jj][t]);
        }
        let idempotent = projector.mul(field, &projector) == projector;
        let trace = projector.trace(field).as_integer();
        // Read P_0's eigenvalue off the block.
        let m0 = apply_action(field, &p_actions[0], &projector);
        let p0 = p0_fiber
            .iter()
            .find(|mu| m0 == projector.scale(field, &mu.to_scalar(field)))
            .copied();
        (idx, projector, idempotent, trace, p0)
    });

    let irrep_dim = pow_u64(n, 3 * counts.genus as i64 - 3 + punctures as i64);
    let expected_block_rank = pow_u64(n, counts.faces as i64 - projected as i64);
    let expected_multiplicity = pow_u64(n, counts.genus as i64);

    let mut projectors_idempotent = true;
    let mut traces_integral = true;
    let mut block_scalar_ok = true;
    let mut rank_divisible = true;
    let mut blocks = Vec::with_capacity(raw_blocks.len());
    for (i, (idx, projector, idempotent, trace, p0)) in raw_blocks.into_iter().enumerate() {
        if !idempotent {
            projectors_idempotent = false;
            failures.push(format!("block {}: projector is not idempotent", i));
        }
        let rank = match trace {
            Some(t) if !t.is_negative() => t.to_u64().unwrap_or_else(|| {
                traces_integral = false;
                0
            }),
            _ => {
                traces_integral = false;
                failures.push(format!("block {}: projector trace is not an integer", i));
                0
            }
        };
        let p0 = match p0 {
            Some(mu) => mu,
            None => {
                block_scalar_ok = false;
                failures.push(format!(
                    "block {}: no candidate eigenvalue matches the action of P_0",
                    i
                ));
                p0_fiber[0]
            }
        };
        let mut scalars = vec![p0];
        for (jj, &t) in idx.iter().enumerate() {
            scalars.push(fibers[jj][t]);
        }
        let multiplicity = if rank % irrep_dim == 0 {
            rank / irrep_dim
        } else {
            rank_divisible = false;
            failures.push(format!(
                "block {}: rank {} is not divisible by the irreducible dimension {}",
                i, rank, irrep_dim
            ));
            0
        };
        blocks.push(Block {
            scalars,
            projector,
            rank,
            multiplicity,
            commutant_dim: None,
            elimination_rank: None,
        });
    }

    // Classification checks (includes the full block-scalar verification).
    let classification = verify_classification(rep, &blocks, mode);
    failures.extend(classification.failures.iter().cloned());
    let block_scalar_action = block_scalar_ok && classification.block_scalar_action;

    // Resolution of identity and pairwise orthogonality.
    let mut sum = RepMatrix::zero(dim);
    for b in &blocks {
        sum = sum.add(field, &b.projector);
    }
    let resolution_of_identity = sum == RepMatrix::identity(field, dim);
    if !resolution_of_identity {
        failures.push("projectors do not sum to the identity".into());
    }
    let pairs: Vec<(usize, usize)> = (0..blocks.len())
        .flat_map(|a| ((a + 1)..blocks.len()).map(move |b| (a, b)))
        .collect();
    let orth = par::map(pairs, mode, |(a, b)| {
        blocks[a]
            .projector
            .mul(field, &blocks[b].projector)
            .is_zero()
    });
    let pairwise_orthogonal = orth.iter().all(|&ok| ok);
    if !pairwise_orthogonal {
        failures.push("distinct block projectors are not orthogonal".into());
    }

    // Rank bookkeeping.
    let rank_uniform = blocks.iter().all(|b| b.rank == expected_block_rank);
    if !rank_uniform {
        failures.push(format!(
            "block ranks {:?} differ from the expected uniform rank {}",
            blocks.iter().map(|b| b.rank).collect::<Vec<_>>(),
            expected_block_rank
        ));
    }
    let total: u64 = blocks.iter().map(|b| b.rank).sum();
    let rank_sum = total == dim as u64;
    if !rank_sum {
        failures.push(format!("block ranks sum to {} instead of {}", total, dim));
    }
    let multiplicity_ok = blocks.iter().all(|b| b.multiplicity == expected_multiplicity);
    if !multiplicity_ok {
        failures.push(format!(
            "block multiplicities {:?} differ from N^g = {}",
            blocks.iter().map(|b| b.multiplicity).collect::<Vec<_>>(),
            expected_multiplicity
        ));
    }

    // Optional certificates.
    let mut commutant_verdict = None;
    if opts.check_commutant {
        let orbits = full_commutant_orbits(rep);
        let expected = pow_u64(n, 2 * counts.genus as i64);
        let dims = par::map(
            (0..blocks.len()).collect::<Vec<_>>(),
            mode,
            |i| commutant_dimension_with_orbits(rep, &blocks[i].projector, &orbits, Parallelism::Sequential),
        );
        let mut ok = true;
        for (i, d) in dims.iter().enumerate() {
            blocks[i].commutant_dim = Some(*d);
            if *d != expected {
                ok = false;
                failures.push(format!(
                    "block {}: commutant dimension {} instead of N^(2g) = {}",
                    i, d, expected
                ));
            }
        }
        commutant_verdict = Some(ok);
    }
    let mut cross_check_verdict = None;
    if opts.cross_check_rank {
        let ranks = par::map((0..blocks.len()).collect::<Vec<_>>(), mode, |i| {
            blocks[i].projector.rank(field) as u64
        });
        let mut ok = true;
        for (i, r) in ranks.iter().enumerate() {
            blocks[i].elimination_rank = Some(*r);
            if *r != blocks[i].rank {
                ok = false;
                failures.push(format!(
                    "block {}: row-reduction rank {} disagrees with trace rank {}",
                    i, r, blocks[i].rank
                ));
            }
        }
        cross_check_verdict = Some(ok);
    }

    // Deterministic order: lexicographic in the scalar exponents.
    blocks.sort_by_key(|b| b.scalars.iter().map(|p| p.exp_2d()).collect::<Vec<_>>());

    let verdicts = Verdicts {
        exchange_relations,
        edge_power_scalars: classification.edge_power_scalars,
        central_charge: classification.central_charge,
        puncture_centrality,
        puncture_power_scalars,
        puncture_product_relation,
        projectors_idempotent,
        traces_integral,
        block_scalar_action,
        charge_constraint: classification.charge_constraint,
        resolution_of_identity,
        pairwise_orthogonal,
        rank_uniform,
        rank_sum,
        rank_divisible,
        multiplicity: multiplicity_ok,
        commutant: commutant_verdict,
        rank_cross_check: cross_check_verdict,
    };

    Ok(Decomposition {
        n,
        counts,
        weights: rep.weights().to_vec(),
        charge: rep.charge(),
        irrep_dim,
        expected_block_rank,
        expected_multiplicity,
        blocks,
        verdicts,
        failures,
    })
}

/// Rank of the joint projector at a full candidate tuple (one root per
/// puncture, including puncture 0).  The theorem predicts rank 0 exactly
/// when p_0...p_s != c^2.
pub fn rank_at_tuple(rep: &LocalRep, mus: &[RootOfUnity]) -> Result<u64, DecomposeError> {
    let counts = rep
        .triangulation()
        .counts()
        .ok_or(DecomposeError::OpenSurface)?;
    assert_eq!(mus.len(), counts.punctures);
    let field = rep.field();
    let n = rep.n();
    let mut projector = RepMatrix::identity(field, rep.dim());
    for (j, mu) in mus.iter().enumerate() {
        let w = predicted_power_scalar(rep, j);
        let m = rep.puncture_matrix(j);
        projector = projector.mul(field, &spectral_projector(field, &m, n, mu, &w)?);
    }
    let trace = projector
        .trace(field)
        .as_integer()
        .expect("joint projector trace is an integer");
    Ok(trace.to_u64().expect("rank is nonnegative"))
}

/// Enumerates all N^s full candidate tuples with their ranks.
pub fn full_tuple_ranks(
    rep: &LocalRep,
) -> Result<Vec<(Vec<RootOfUnity>, u64)>, DecomposeError> {
    let counts = rep
        .triangulation()
        .counts()
        .ok_or(DecomposeError::OpenSurface)?;
    let n = rep.n();
    let fibers: Vec<Vec<RootOfUnity>> = (0..counts.punctures)
        .map(|j| predicted_power_scalar(rep, j).nth_root_fiber(n))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for idx in mixed_radix_tuples(counts.punctures, n as usize) {
        let mus: Vec<RootOfUnity> = idx.iter().enumerate().map(|(j, &t)| fibers[j][t]).collect();
        let rank = rank_at_tuple(rep, &mus)?;
        out.push((mus, rank));
    }
    Ok(out)
}

/// One orbit of the index-pair dynamics underlying the commutant system:
/// the entries (row, col, factor) of a basis solution of [M, rho(X_e)] = 0.
#[derive(Debug, Clone)]
pub struct CommutantOrbit {
    pub entries: Vec<(usize, usize, RootOfUnity)>,
}

/// Solves [M, rho(X_e)] = 0 for all e over the full carrier space.  For
/// monomial generators the system reads M[pi(u), pi(v)] = (c_u/c_v) M[u,v];
/// each orbit of pairs with a consistent factor cocycle contributes one
/// basis solution, and inconsistent orbits force zeros.
pub fn full_commutant_orbits(rep: &LocalRep) -> Vec<CommutantOrbit> {
    let dim = rep.dim();
    let edges = rep.triangulation().n_edges();
    let order = rep.field().order();
    let gens: Vec<&MonomialAction> = (0..edges).map(|e| rep.generator_action(e)).collect();
    let mut state: Vec<Option<RootOfUnity>> = vec![None; dim * dim];
    let mut orbits = Vec::new();
    for root in 0..dim * dim {
        if state[root].is_some() {
            continue;
        }
        state[root] = Some(RootOfUnity::one(order));
        let mut queue = vec![root];
        let mut members = vec![root];
        let mut consistent = true;
        while let Some(p) = queue.pop() {
            let (u, v) = (p / dim, p % dim);
            let f = state[p].expect("queued pairs are labelled");
            for g in &gens {
                let np = g.perm[u] * dim + g.perm[v];
                let nf = f.mul(&g.vals[u]).mul(&g.vals[v].inv());
                match state[np] {
                    None => {
                        state[np] = Some(nf);
                        members.push(np);
                        queue.push(np);
                    }
                    Some(existing) => {
                        if existing != nf {
                            consistent = false;
                        }
                    }
                }
            }
        }
        if consistent {
            orbits.push(CommutantOrbit {
                entries: members
                    .into_iter()
                    .map(|p| (p / dim, p % dim, state[p].expect("orbit member labelled")))
                    .collect(),
            });
        }
    }
    orbits
}

/// Dimension of the commutant restricted to the block: compress each orbit
/// basis matrix with the projector and count independent results.
pub fn commutant_dimension_with_orbits(
    rep: &LocalRep,
    projector: &RepMatrix,
    orbits: &[CommutantOrbit],
    mode: Parallelism,
) -> u64 {
    let field = rep.field();
    let dim = rep.dim();
    let rows = par::map((0..orbits.len()).collect::<Vec<_>>(), mode, |i| {
        let b = RepMatrix::from_triplets(
            field,
            dim,
            orbits[i]
                .entries
                .iter()
                .map(|&(r, c, f)| (r, c, f.to_scalar(field))),
        );
        let s = projector.mul(field, &b).mul(field, projector);
        let mut row: BTreeMap<usize, CycScalar> = BTreeMap::new();
        for (r, c, v) in s.entries() {
            row.insert(r * dim + c, v.clone());
        }
        row
    });
    rank_of_rows(field, rows) as u64
}

/// Commutant dimension of a block (orbits recomputed; see
/// [`commutant_dimension_with_orbits`] to share them across blocks).
pub fn commutant_dimension(rep: &LocalRep, projector: &RepMatrix) -> u64 {
    let orbits = full_commutant_orbits(rep);
    commutant_dimension_with_orbits(rep, projector, &orbits, Parallelism::Auto)
}

/// Independent oracle: the commutant dimension of a block as the exact
/// character sum (1/N^n) * sum_k tr(Pi U_k) tr(Pi U_k^{-1}) over the
/// monomial images U_k = rho(X^k), k in (Z/N)^n.  Scalar lift choices
/// cancel between a matrix and its inverse.
pub fn commutant_dimension_by_characters(rep: &LocalRep, projector: &RepMatrix) -> Option<u64> {
    let field = rep.field();
    let edges = rep.triangulation().n_edges();
    let n = rep.n();
    let dim = rep.dim();
    let mut gen_powers: Vec<Vec<MonomialAction>> = Vec::with_capacity(edges);
    for e in 0..edges {
        let mut v = vec![MonomialAction::identity(dim, field.order())];
        for _ in 1..n {
            v.push(rep.generator_action(e).compose(v.last().unwrap()));
        }
        gen_powers.push(v);
    }
    let trace_with = |a: &MonomialAction| -> CycScalar {
        let mut t = field.zero();
        for w in 0..dim {
            let entry = projector.get(field, w, a.perm[w]);
            if !entry.is_zero() {
                t = field.add(&t, &field.mul(&entry, &a.vals[w].to_scalar(field)));
            }
        }
        t
    };
    let mut total = field.zero();
    for idx in mixed_radix_tuples(edges, n as usize) {
        // Normal order: rightmost generator acts first.
        let mut u = MonomialAction::identity(dim, field.order());
        for (e, &t) in idx.iter().enumerate().rev() {
            if t != 0 {
                u = gen_powers[e][t].compose(&u);
            }
        }
        let term = field.mul(&trace_with(&u), &trace_with(&u.inverse()));
        total = field.add(&total, &term);
    }
    let denom = BigInt::from(n).pow(edges as u32);
    let scaled = field.scale_rational(&total, &BigRational::new(BigInt::one(), denom));
    scaled.as_integer().and_then(|v| v.to_u64())
}

/// Joint eigenspace dimension by exact elimination: the nullity of the
/// stacked system (rho(P_j) - mu_j Id) over the named punctures.
pub fn eigenspace_dimension_by_elimination(
    rep: &LocalRep,
    constraints: &[(usize, RootOfUnity)],
) -> usize {
    let field = rep.field();
    let dim = rep.dim();
    let mut rows: Vec<BTreeMap<usize, CycScalar>> = Vec::new();
    for (j, mu) in constraints {
        let a = rep.puncture_action(*j);
        let inv = a.inverse();
        for u in 0..dim {
            let v = inv.perm[u];
            let mut row: BTreeMap<usize, CycScalar> = BTreeMap::new();
            row.insert(v, a.vals[v].to_scalar(field));
            let e = row.entry(u).or_insert_with(|| field.zero());
            *e = field.sub(e, &mu.to_scalar(field));
            row.retain(|_, val| !val.is_zero());
            if !row.is_empty() {
                rows.push(row);
            }
        }
    }
    dim - rank_of_rows(field, rows)
}

fn mixed_radix_tuples(slots: usize, radix: usize) -> Vec<Vec<usize>> {
    let total = radix.checked_pow(slots as u32).expect("tuple count fits");
    (0..total)
        .map(|mut v| {
            let mut idx = vec![0usize; slots];
            for slot in (0..slots).rev() {
                idx[slot] = v % radix;
                v /= radix;
            }
            idx
        })
        .collect()
}

fn pow_u64(base: u64, exp: i64) -> u64 {
    assert!(exp >= 0, "exponent must be nonnegative");
    base.pow(exp as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::{SurfaceMode, Triangulation};

    fn trivial_rep(name: &str, n: u64) -> LocalRep {
        let tri = Triangulation::builtin(name).unwrap();
        LocalRep::build_trivial(&tri, n).unwrap()
    }

    #[test]
    fn power_scalar_examples() {
        // All weights 1: w = 1 and rho(P_0)^3 = Id on the torus.
        let rep = trivial_rep("torus-1p", 3);
        assert!(power_scalar(&rep, 0).unwrap().is_one());
        assert_eq!(
            rep.puncture_matrix(0).pow(rep.field(), 3),
            RepMatrix::identity(rep.field(), 9)
        );
        // Scaled weight x_0 = q: w = q^{k_00} = q^2.
        let tri = Triangulation::builtin("torus-1p").unwrap();
        let rep = LocalRep::build(&tri, 3, &[1, 0, 0], &BTreeMap::new()).unwrap();
        assert_eq!(power_scalar(&rep, 0).unwrap(), rep.q().pow(2));
    }

    #[test]
    fn spectral_projector_trivial_cases() {
        let f = CycField::new(9).unwrap();
        let id = RepMatrix::identity(&f, 4);
        let one = RootOfUnity::one(9);
        let q = RootOfUnity::root(9, 3);
        assert_eq!(spectral_projector(&f, &id, 3, &one, &one).unwrap(), id);
        assert!(spectral_projector(&f, &id, 3, &q, &one)
            .unwrap()
            .is_zero());
        // mu must be an N-th root of w.
        assert_eq!(
            spectral_projector(&f, &id, 3, &RootOfUnity::root(9, 1), &one).unwrap_err(),
            DecomposeError::EigenvalueOutsideFiber
        );
    }

    #[test]
    fn triangle_generator_projectors_have_rank_one() {
        // Lemma: for the (1,1,c) irrep every eigenprojector has rank 1.
        use crate::trianglerep::TriangleIrrep;
        for n in [3u64, 5] {
            let f = CycField::new(n * n).unwrap();
            let c = RootOfUnity::root(n * n, n as i64); // c = q
            let irrep = TriangleIrrep::new(
                n,
                [RootOfUnity::one(n * n), RootOfUnity::one(n * n), c],
            );
            for slot in 0..3 {
                let m = irrep.generator(&f, slot);
                let w = irrep.spectrum(slot)[0].pow(n as i64);
                assert_eq!(
                    m.pow(&f, n),
                    RepMatrix::identity(&f, n as usize).scale(&f, &w.to_scalar(&f))
                );
                let mut sum = RepMatrix::zero(n as usize);
                for mu in w.nth_root_fiber(n).unwrap() {
                    let p = spectral_projector(&f, &m, n, &mu, &w).unwrap();
                    assert_eq!(p.mul(&f, &p), p, "idempotent");
                    assert_eq!(p.trace(&f), f.one(), "rank 1 trace");
                    assert_eq!(p.rank(&f), 1, "rank 1 elimination");
                    sum = sum.add(&f, &p);
                }
                assert_eq!(sum, RepMatrix::identity(&f, n as usize));
            }
        }
    }

    #[test]
    fn shift_generator_projects_onto_the_geometric_eigenvectors() {
        // For the (1, 1, c) irrep the shift generator has eigenvector
        // alpha_k = sum_i q^{-2ki} e_i with eigenvalue q^{2k}; the spectral
        // projector at q^{2k} must fix alpha_k and kill every other alpha_j.
        use crate::trianglerep::TriangleIrrep;
        let n = 5u64;
        let f = CycField::new(n * n).unwrap();
        let q = RootOfUnity::root(n * n, n as i64);
        let c = q;
        let irrep = TriangleIrrep::new(n, [RootOfUnity::one(n * n), RootOfUnity::one(n * n), c]);
        let m = irrep.generator(&f, 1);
        let w = RootOfUnity::one(n * n);
        let alpha = |k: i64| -> Vec<_> {
            (0..n as i64)
                .map(|i| q.pow(-2 * k * i).to_scalar(&f))
                .collect::<Vec<_>>()
        };
        for k in 0..n as i64 {
            let p = spectral_projector(&f, &m, n, &q.pow(2 * k), &w).unwrap();
            assert_eq!(p.trace(&f), f.one());
            assert_eq!(p.apply(&f, &alpha(k)), alpha(k), "alpha_{k} is fixed");
            let killed = p.apply(&f, &alpha((k + 1) % n as i64));
            assert!(killed.iter().all(|v| v.is_zero()), "other alphas vanish");
        }
    }

    #[test]
    fn zero_projector_has_zero_commutant() {
        let rep = trivial_rep("torus-1p", 3);
        let zero = RepMatrix::zero(rep.dim());
        assert_eq!(commutant_dimension(&rep, &zero), 0);
    }

    #[test]
    fn torus_1p_trivial_decomposition() {
        let rep = trivial_rep("torus-1p", 3);
        let dec = decompose(&rep, &DecomposeOptions::default()).unwrap();
        assert!(dec.passed(), "failures: {:?}", dec.failures);
        assert_eq!(dec.blocks.len(), 1);
        assert_eq!(dec.blocks[0].rank, 9);
        assert_eq!(dec.blocks[0].multiplicity, 3);
        assert_eq!(dec.irrep_dim, 3);
        // p_0 = c^2 = 1.
        assert!(dec.blocks[0].scalars[0].is_one());
    }

    #[test]
    fn torus_1p_weighted_block_scalar() {
        let tri = Triangulation::builtin("torus-1p").unwrap();
        let rep = LocalRep::build(&tri, 3, &[1, 0, 0], &BTreeMap::new()).unwrap();
        let dec = decompose(&rep, &DecomposeOptions::default()).unwrap();
        assert!(dec.passed(), "failures: {:?}", dec.failures);
        assert_eq!(dec.blocks.len(), 1);
        assert_eq!(dec.blocks[0].rank, 9);
        // c = zeta_9, so p_0 = c^2 = zeta_9^2 = q^(2/3).
        assert_eq!(dec.blocks[0].scalars[0], RootOfUnity::root(9, 2));
        assert_eq!(dec.blocks[0].scalars[0].render(3), "q^(2/3)");
    }

    #[test]
    fn torus_2p_trivial_decomposition() {
        let rep = trivial_rep("torus-2p", 3);
        let opts = DecomposeOptions {
            cross_check_rank: true,
            ..Default::default()
        };
        let dec = decompose(&rep, &opts).unwrap();
        assert!(dec.passed(), "failures: {:?}", dec.failures);
        assert_eq!(dec.blocks.len(), 3);
        for b in &dec.blocks {
            assert_eq!(b.rank, 27);
            assert_eq!(b.multiplicity, 3);
            assert_eq!(b.elimination_rank, Some(27));
            // p_0 p_1 = c^2 = 1.
            assert_eq!(b.scalars[0], b.scalars[1].inv());
        }
        let total: u64 = dec.blocks.iter().map(|b| b.rank).sum();
        assert_eq!(total, 81);
    }

    #[test]
    fn elimination_oracle_agrees_on_block_dimensions() {
        let rep = trivial_rep("torus-2p", 3);
        let dec = decompose(&rep, &DecomposeOptions::default()).unwrap();
        for b in &dec.blocks {
            let nullity = eigenspace_dimension_by_elimination(
                &rep,
                &[(0, b.scalars[0]), (1, b.scalars[1])],
            );
            assert_eq!(nullity as u64, b.rank);
        }
    }

    #[test]
    fn incompatible_tuples_have_rank_zero() {
        let rep = trivial_rep("torus-1p", 3);
        let c2 = rep.charge().pow(2);
        let mut seen_nonzero = 0;
        for (mus, rank) in full_tuple_ranks(&rep).unwrap() {
            if mus[0] == c2 {
                assert_eq!(rank, 9);
                seen_nonzero += 1;
            } else {
                assert_eq!(rank, 0);
            }
        }
        assert_eq!(seen_nonzero, 1);
    }

    #[test]
    fn commutant_of_the_triangle_irrep_is_scalars() {
        // Schur check on the open one-triangle surface.
        let text = "punctures 3\nedges 3\ntri 0 1 2 corners 0 1 2\n";
        let tri = Triangulation::parse_with_mode(text, SurfaceMode::Open).unwrap();
        let rep = LocalRep::build_trivial(&tri, 3).unwrap();
        let id = RepMatrix::identity(rep.field(), rep.dim());
        assert_eq!(commutant_dimension(&rep, &id), 1);
        assert_eq!(commutant_dimension_by_characters(&rep, &id), Some(1));
    }

    #[test]
    fn torus_commutants_match_both_routes() {
        let rep = trivial_rep("torus-1p", 3);
        let opts = DecomposeOptions {
            check_commutant: true,
            ..Default::default()
        };
        let dec = decompose(&rep, &opts).unwrap();
        assert!(dec.passed(), "failures: {:?}", dec.failures);
        assert_eq!(dec.blocks[0].commutant_dim, Some(9));
        assert_eq!(
            commutant_dimension_by_characters(&rep, &dec.blocks[0].projector),
            Some(9)
        );
    }

    #[test]
    fn report_is_deterministic() {
        let rep = trivial_rep("torus-2p", 3);
        let dec1 = decompose(&rep, &DecomposeOptions::default()).unwrap();
        let dec2 = decompose(
            &rep,
            &DecomposeOptions {
                parallelism: Parallelism::Sequential,
                ..Default::default()
            },
        )
        .unwrap();
        let json1 = serde_json::to_string_pretty(&dec1.report()).unwrap();
        let json2 = serde_json::to_string_pretty(&dec2.report()).unwrap();
        assert_eq!(json1, json2);
        assert!(json1.contains("\"rank\": 27"));
    }

    #[test]
    fn weight_twist_preserves_rank_and_multiplicity() {
        // A small preview of scale robustness: weights (q, q^2, 1).
        let tri = Triangulation::builtin("torus-1p").unwrap();
        let rep = LocalRep::build(&tri, 3, &[1, 2, 0], &BTreeMap::new()).unwrap();
        let dec = decompose(&rep, &DecomposeOptions::default()).unwrap();
        assert!(dec.passed(), "failures: {:?}", dec.failures);
        assert_eq!(dec.blocks.len(), 1);
        assert_eq!(dec.blocks[0].rank, 9);
        assert_eq!(dec.blocks[0].multiplicity, 3);
    }
}
