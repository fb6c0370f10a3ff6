//! Stationary distribution of the random walk on a weighted digraph.

use serde::{Deserialize, Serialize};

use crate::centrality::digraph::WeightedDigraph;
use crate::error::{Error, Result};
use crate::features::PointId;
use crate::scalar::{count, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct PowerIterationOptions {
    /// Stop once `|Pᵀu - u|₁ <= tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// Mixing weight of the uniform distribution used by the fallback chain.
    pub teleport: f64,
    /// Iterations between stall checks. A stall is a residual that fell by
    /// less than 10% over one window.
    pub stall_window: usize,
}

impl Default for PowerIterationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 10_000,
            teleport: 1e-3,
            stall_window: 500,
        }
    }
}

/// Which chain produced the reported distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainVariant {
    /// The row-normalized transition matrix `P`.
    Plain,
    /// `(1 - factor) P + factor * uniform`, used when `P` stalls.
    Teleported { factor: f64 },
}

/// Stationary-probability centrality of every point.
#[derive(Debug, Clone)]
pub struct CentralityRanking<W> {
    ids: Vec<PointId>,
    centrality: Vec<W>,
    /// Rows sorted by descending centrality, ties by ascending id.
    order: Vec<usize>,
    residual: W,
    iterations: usize,
    variant: ChainVariant,
}

/// Row of the serialized ranking. `rank` is 1-based.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RankEntry {
    pub id: PointId,
    pub centrality: f64,
    pub rank: usize,
}

impl<W: Scalar> CentralityRanking<W> {
    pub fn from_scores(ids: Vec<PointId>, centrality: Vec<W>, residual: W) -> Result<Self> {
        if ids.len() != centrality.len() {
            return Err(Error::input("ids and centrality lengths differ"));
        }
        if centrality.iter().any(|c| !c.is_finite() || *c < W::zero()) {
            return Err(Error::input("centrality must be finite and nonnegative"));
        }
        let order = descending_order(&ids, &centrality);
        Ok(Self {
            ids,
            centrality,
            order,
            residual,
            iterations: 0,
            variant: ChainVariant::Plain,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    /// Row-aligned with `ids()`.
    pub fn centrality(&self) -> &[W] {
        &self.centrality
    }

    pub fn order_rows(&self) -> &[usize] {
        &self.order
    }

    /// Ids from most to least central.
    pub fn order(&self) -> Vec<PointId> {
        self.order.iter().map(|&r| self.ids[r]).collect()
    }

    pub fn residual(&self) -> W {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn variant(&self) -> ChainVariant {
        self.variant
    }

    /// Entries in row order.
    pub fn entries(&self) -> Vec<RankEntry> {
        let mut rank = vec![0; self.len()];
        for (pos, &row) in self.order.iter().enumerate() {
            rank[row] = pos + 1;
        }
        self.ids
            .iter()
            .zip(&self.centrality)
            .zip(rank)
            .map(|((&id, &c), rank)| RankEntry {
                id,
                centrality: c.to_f64_lossless(),
                rank,
            })
            .collect()
    }
}

impl CentralityRanking<f64> {
    /// Rebuilds a ranking from serialized entries. Ranks must be consistent
    /// with the centrality values.
    pub fn from_entries(entries: &[RankEntry]) -> Result<Self> {
        let ids = entries.iter().map(|e| e.id).collect();
        let scores = entries.iter().map(|e| e.centrality).collect();
        let ranking = Self::from_scores(ids, scores, f64::NAN)?;
        for (pos, &row) in ranking.order.iter().enumerate() {
            if entries[row].rank != pos + 1 {
                return Err(Error::input(format!(
                    "rank {} of id {} disagrees with its centrality order (expected {})",
                    entries[row].rank,
                    entries[row].id,
                    pos + 1
                )));
            }
        }
        Ok(ranking)
    }
}

fn descending_order<W: Scalar>(ids: &[PointId], c: &[W]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| {
        c[b].partial_cmp(&c[a])
            .unwrap()
            .then_with(|| ids[a].cmp(&ids[b]))
    });
    order
}

struct Transition<'a, W> {
    graph: &'a WeightedDigraph<W>,
    /// Row-normalized weights, laid out like the graph's edge list.
    probs: Vec<W>,
    teleport: W,
}

impl<'a, W: Scalar> Transition<'a, W> {
    fn new(graph: &'a WeightedDigraph<W>, teleport: W) -> Result<Self> {
        let mut probs = Vec::with_capacity(graph.weights().len());
        for row in 0..graph.len() {
            let w = graph.out_weights(row);
            let total: W = w.iter().copied().sum();
            if !(total > W::zero()) {
                return Err(Error::DegenerateInput(format!(
                    "node {} has zero out-weight",
                    graph.ids()[row]
                )));
            }
            probs.extend(w.iter().map(|&x| x / total));
        }
        Ok(Self {
            graph,
            probs,
            teleport,
        })
    }

    /// `out = Mᵀ u` for the (possibly teleported) chain.
    fn apply(&self, u: &[W], out: &mut [W]) {
        let m = u.len();
        let keep = W::one() - self.teleport;
        let base = self.teleport * u.iter().copied().sum::<W>() / count::<W>(m);
        out.iter_mut().for_each(|x| *x = base);
        let k = self.graph.k();
        for (row, &mass) in u.iter().enumerate() {
            let mass = keep * mass;
            let targets = self.graph.out_targets(row);
            let probs = &self.probs[row * k..(row + 1) * k];
            for (&t, &p) in targets.iter().zip(probs) {
                out[t] = out[t] + mass * p;
            }
        }
    }
}

enum Outcome<W> {
    Converged {
        u: Vec<W>,
        residual: W,
        iterations: usize,
    },
    Stalled {
        residual: W,
        iterations: usize,
    },
}

fn power_iterate<W: Scalar>(chain: &Transition<'_, W>, tol: W, max_iters: usize, window: usize) -> Outcome<W> {
    let m = chain.graph.len();
    let mut u = vec![W::one() / count::<W>(m); m];
    let mut next = vec![W::zero(); m];
    let mut checkpoint = W::infinity();
    let mut residual = W::infinity();
    for it in 0..max_iters {
        chain.apply(&u, &mut next);
        residual = u
            .iter()
            .zip(&next)
            .map(|(&a, &b)| (a - b).abs())
            .sum::<W>();
        if residual <= tol {
            return Outcome::Converged {
                u,
                residual,
                iterations: it,
            };
        }
        if window > 0 && it > 0 && it % window == 0 {
            if residual > W::of(0.9) * checkpoint {
                return Outcome::Stalled {
                    residual,
                    iterations: it,
                };
            }
            checkpoint = residual;
        }
        if it == 0 {
            checkpoint = residual;
        }
        let total: W = next.iter().copied().sum();
        for (a, &b) in u.iter_mut().zip(&next) {
            *a = b / total;
        }
    }
    Outcome::Stalled {
        residual,
        iterations: max_iters,
    }
}

/// Stationary distribution `u = Pᵀu` of the row-normalized random walk,
/// by power iteration from the uniform vector.
///
/// The returned `residual` is `|Mᵀu - u|₁` for the returned `u`, where `M`
/// is the chain named by `variant()`. If the plain chain stalls (periodic or
/// very slowly mixing components), one retry is made on the teleported
/// chain, whose iteration budget is extended to what its contraction rate
/// needs to reach `tol`.
pub fn stationary_centrality<W: Scalar>(
    graph: &WeightedDigraph<W>,
    opts: &PowerIterationOptions,
) -> Result<CentralityRanking<W>> {
    if !(opts.tol > 0.0) || opts.max_iters == 0 {
        return Err(Error::param("tol must be positive and max_iters nonzero"));
    }
    if !(opts.teleport > 0.0 && opts.teleport < 1.0) {
        return Err(Error::param("teleport factor must lie in (0, 1)"));
    }
    let tol = W::of(opts.tol);
    let plain = Transition::new(graph, W::zero())?;
    let (outcome, variant) = match power_iterate(&plain, tol, opts.max_iters, opts.stall_window) {
        done @ Outcome::Converged { .. } => (done, ChainVariant::Plain),
        Outcome::Stalled { .. } => {
            let chain = Transition::new(graph, W::of(opts.teleport))?;
            let needed = ((opts.tol / 2.0).ln() / (1.0 - opts.teleport).ln() * 1.2).ceil() as usize;
            let budget = opts.max_iters.max(needed);
            (
                power_iterate(&chain, tol, budget, 0),
                ChainVariant::Teleported {
                    factor: opts.teleport,
                },
            )
        }
    };
    match outcome {
        Outcome::Converged {
            u,
            residual,
            iterations,
        } => {
            let order = descending_order(graph.ids(), &u);
            Ok(CentralityRanking {
                ids: graph.ids().to_vec(),
                centrality: u,
                order,
                residual,
                iterations,
                variant,
            })
        }
        Outcome::Stalled {
            residual,
            iterations,
        } => Err(Error::Convergence {
            iterations,
            residual: residual.to_f64_lossless(),
        }),
    }
}
