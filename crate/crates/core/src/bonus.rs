//! Vertex bonuses, the cavity recursion, and the depth-`r` local bounds.
//!
//! The bonus of `v` in `H` is `W_H - W_{H \ v}`, the loss in optimal
//! matching weight when `v` is removed. Unfolding the cavity recursion
//! `B(v, H) = max_u (w_uv - B(u, H \ v))_+` for `r` levels and replacing the
//! bonuses at the bottom by `0` or by `+inf` gives the two local bounds
//! `B^0_r` and `B^inf_r`. Which one is the lower bound depends on the parity
//! of `r`; see [`LocalBoundResult`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::{positive_gap, ExtReal};
use crate::graph::{EdgeId, SubgraphView, VertexId};
use crate::mwm;
use crate::weights::WeightAssignment;

pub const DEFAULT_WALK_BUDGET: u64 = 5_000_000;

/// A vertex of a view whose bonus is wanted.
#[derive(Clone, Debug)]
pub struct BonusQuery<'g> {
    pub view: SubgraphView<'g>,
    pub vertex: VertexId,
}

impl<'g> BonusQuery<'g> {
    pub fn new(view: SubgraphView<'g>, vertex: VertexId) -> Result<Self> {
        if !view.contains_vertex(vertex) {
            return Err(Error::InvalidVertex(vertex));
        }
        Ok(BonusQuery { view, vertex })
    }

    pub fn evaluate(&self, w: &WeightAssignment) -> Result<f64> {
        bonus(&self.view, w, self.vertex)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Zero,
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(r: usize) -> Parity {
        if r.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Both local bounds at one depth.
///
/// For even `r`, `zero_kind <= B(u, H \ A) <= infinity_kind`; for odd `r`
/// the order flips. [`lo`](Self::lo) and [`hi`](Self::hi) undo the flip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalBoundResult {
    pub r: usize,
    pub zero_kind: f64,
    pub infinity_kind: ExtReal,
    pub parity: Parity,
}

impl LocalBoundResult {
    pub fn lo(&self) -> ExtReal {
        match self.parity {
            Parity::Even => ExtReal::Finite(self.zero_kind),
            Parity::Odd => self.infinity_kind,
        }
    }

    pub fn hi(&self) -> ExtReal {
        match self.parity {
            Parity::Even => self.infinity_kind,
            Parity::Odd => ExtReal::Finite(self.zero_kind),
        }
    }

    pub fn get(&self, kind: BoundKind) -> ExtReal {
        match kind {
            BoundKind::Zero => ExtReal::Finite(self.zero_kind),
            BoundKind::Infinity => self.infinity_kind,
        }
    }
}

fn require_vertex(view: &SubgraphView<'_>, v: VertexId) -> Result<()> {
    if view.contains_vertex(v) {
        Ok(())
    } else {
        Err(Error::InvalidVertex(v))
    }
}

/// `W_H - W_{H \ v}` by two exact solves.
pub fn bonus(view: &SubgraphView<'_>, w: &WeightAssignment, v: VertexId) -> Result<f64> {
    require_vertex(view, v)?;
    if view.degree(v) == 0 {
        return Ok(0.0);
    }
    let with = mwm::optimal_weight(view, w)?;
    let without = mwm::optimal_weight(&view.delete_vertices([v]), w)?;
    Ok((with - without).max(0.0))
}

/// `|B(v, H) - max_u (w_uv - B(u, H \ v))_+|`, each bonus from its own solves.
pub fn check_bonus_recursion(
    view: &SubgraphView<'_>,
    w: &WeightAssignment,
    v: VertexId,
) -> Result<f64> {
    let lhs = bonus(view, w, v)?;
    let without_v = view.delete_vertices([v]);
    let mut rhs = 0.0f64;
    for (u, e) in view.neighbors(v) {
        rhs = rhs.max((w.get(e) - bonus(&without_v, w, u)?).max(0.0));
    }
    Ok((lhs - rhs).abs())
}

/// Whether `w_uv > B(u, H \ e) + B(v, H \ u)`, the cavity test for `e = (u, v)` being in the optimum.
pub fn membership_indicator(
    view: &SubgraphView<'_>,
    w: &WeightAssignment,
    e: EdgeId,
) -> Result<bool> {
    if !view.contains_edge(e) {
        return Err(Error::InvalidEdge(e));
    }
    let (u, v) = view.base().endpoints(e);
    let bu = bonus(&view.delete_edges([e]), w, u)?;
    let bv = bonus(&view.delete_vertices([u]), w, v)?;
    Ok(w.get(e) > bu + bv)
}

pub fn local_bound(
    view: &SubgraphView<'_>,
    w: &WeightAssignment,
    u: VertexId,
    r: usize,
    kind: BoundKind,
) -> Result<ExtReal> {
    Ok(sandwich(view, w, u, r)?.get(kind))
}

pub fn sandwich(
    view: &SubgraphView<'_>,
    w: &WeightAssignment,
    u: VertexId,
    r: usize,
) -> Result<LocalBoundResult> {
    sandwich_with_budget(view, w, u, r, DEFAULT_WALK_BUDGET)
}

/// Evaluates both local bounds in one depth-first unfolding. The state is the
/// self-avoiding walk from `u`; every visited walk counts against `budget`.
pub fn sandwich_with_budget(
    view: &SubgraphView<'_>,
    w: &WeightAssignment,
    u: VertexId,
    r: usize,
    budget: u64,
) -> Result<LocalBoundResult> {
    require_vertex(view, u)?;
    let mut walk = Walk {
        view,
        w,
        on_path: vec![false; view.base().vertex_count()],
        calls: 0,
        budget,
    };
    let (zero_kind, infinity_kind) = walk.unfold(u, r)?;
    Ok(LocalBoundResult {
        r,
        zero_kind,
        infinity_kind,
        parity: Parity::of(r),
    })
}

struct Walk<'a, 'g> {
    view: &'a SubgraphView<'g>,
    w: &'a WeightAssignment,
    on_path: Vec<bool>,
    calls: u64,
    budget: u64,
}

impl Walk<'_, '_> {
    fn unfold(&mut self, u: VertexId, depth: usize) -> Result<(f64, ExtReal)> {
        self.calls += 1;
        if self.calls > self.budget {
            return Err(Error::WalkBudgetExceeded(self.budget));
        }
        let view = self.view;
        if depth == 0 {
            let isolated = view.neighbors(u).all(|(x, _)| self.on_path[x]);
            return Ok(if isolated {
                (0.0, ExtReal::ZERO)
            } else {
                (0.0, ExtReal::Infinity)
            });
        }
        self.on_path[u] = true;
        let (mut zero, mut inf) = (0.0f64, 0.0f64);
        for (x, e) in view.neighbors(u) {
            if self.on_path[x] {
                continue;
            }
            let (z, i) = match self.unfold(x, depth - 1) {
                Ok(v) => v,
                Err(err) => {
                    self.on_path[u] = false;
                    return Err(err);
                }
            };
            let we = self.w.get(e);
            zero = zero.max((we - z).max(0.0));
            inf = inf.max(positive_gap(we, i));
        }
        self.on_path[u] = false;
        Ok((zero, ExtReal::Finite(inf)))
    }
}
