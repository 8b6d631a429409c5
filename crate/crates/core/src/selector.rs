//! Neighborhood-tuned portfolio selection.
//!
//! For an unseen target the selector greedily builds a portfolio on the
//! target's nearest training functions (k-SBP*) and keeps whichever of k-SBP*
//! and the global SBP* scores higher on that same weighted neighborhood.
//! Selection reads only neighbor EAF data; target performance is computed
//! afterwards, in [`diagnose`], purely for reporting.

use serde::{Deserialize, Serialize};

use crate::eaf::EafSource;
use crate::error::{Error, Result};
use crate::optim::AlgorithmId;
use crate::portfolio::{greedy_build, perf, perf_on, GreedyConfig, Portfolio};
use crate::similarity::{weights, Neighborhood, WeightScheme};
use crate::suite::FunctionId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// The neighborhood-built k-SBP*.
    Local,
    /// The global SBP*.
    Global,
}

/// Winner on the neighborhood x winner on the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quadrant {
    LL,
    LG,
    GL,
    GG,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::LL, Quadrant::LG, Quadrant::GL, Quadrant::GG];

    pub fn of(local_winner: Side, final_winner: Side) -> Self {
        match (local_winner, final_winner) {
            (Side::Local, Side::Local) => Quadrant::LL,
            (Side::Local, Side::Global) => Quadrant::LG,
            (Side::Global, Side::Local) => Quadrant::GL,
            (Side::Global, Side::Global) => Quadrant::GG,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quadrant::LL => "LL",
            Quadrant::LG => "LG",
            Quadrant::GL => "GL",
            Quadrant::GG => "GG",
        }
    }
}

/// Strictly better local score wins; ties keep the global portfolio.
fn winner(local: f64, global: f64) -> Side {
    if local > global {
        Side::Local
    } else {
        Side::Global
    }
}

pub fn build_ksbp_star(
    neighborhood: &Neighborhood,
    scheme: WeightScheme,
    algorithms: &[AlgorithmId],
    greedy: GreedyConfig,
    eaf: &(impl EafSource + ?Sized),
) -> Result<Portfolio> {
    greedy_build(
        &neighborhood.neighbors,
        &weights(scheme, neighborhood),
        algorithms,
        greedy,
        eaf,
    )
}

/// Outcome of the selection phase, computed from neighbor data only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSelection {
    pub neighborhood: Neighborhood,
    pub scheme: WeightScheme,
    pub ksbp_star: Portfolio,
    pub sbp_star: Portfolio,
    pub local_perf_ksbp: f64,
    pub local_perf_sbp: f64,
    pub chosen: Side,
}

impl LocalSelection {
    pub fn target(&self) -> FunctionId {
        self.neighborhood.target
    }

    /// The final k-SBP portfolio.
    pub fn chosen_portfolio(&self) -> &Portfolio {
        match self.chosen {
            Side::Local => &self.ksbp_star,
            Side::Global => &self.sbp_star,
        }
    }

    pub fn chosen_local_perf(&self) -> f64 {
        match self.chosen {
            Side::Local => self.local_perf_ksbp,
            Side::Global => self.local_perf_sbp,
        }
    }
}

pub fn select_local(
    neighborhood: &Neighborhood,
    scheme: WeightScheme,
    ksbp_star: Portfolio,
    sbp_star: Portfolio,
    eaf: &(impl EafSource + ?Sized),
) -> Result<LocalSelection> {
    if neighborhood.neighbors.contains(&neighborhood.target) {
        return Err(Error::Usage(format!(
            "neighborhood of {} contains the target itself",
            neighborhood.target
        )));
    }
    let w = weights(scheme, neighborhood);
    let local_perf_ksbp = perf(&neighborhood.neighbors, &ksbp_star, &w, eaf)?;
    let local_perf_sbp = perf(&neighborhood.neighbors, &sbp_star, &w, eaf)?;
    Ok(LocalSelection {
        neighborhood: neighborhood.clone(),
        scheme,
        ksbp_star,
        sbp_star,
        local_perf_ksbp,
        local_perf_sbp,
        chosen: winner(local_perf_ksbp, local_perf_sbp),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub target: FunctionId,
    pub selection: LocalSelection,
    pub final_perf_ksbp: f64,
    pub final_perf_sbp: f64,
    pub quadrant: Quadrant,
}

impl SelectionOutcome {
    /// Target performance of the chosen portfolio.
    pub fn final_perf_chosen(&self) -> f64 {
        match self.selection.chosen {
            Side::Local => self.final_perf_ksbp,
            Side::Global => self.final_perf_sbp,
        }
    }
}

/// Scores both candidates on the target function. Reporting only.
pub fn diagnose(
    selection: LocalSelection,
    eaf: &(impl EafSource + ?Sized),
) -> Result<SelectionOutcome> {
    let target = selection.target();
    let final_perf_ksbp = perf_on(target, &selection.ksbp_star, eaf)?;
    let final_perf_sbp = perf_on(target, &selection.sbp_star, eaf)?;
    let quadrant = Quadrant::of(selection.chosen, winner(final_perf_ksbp, final_perf_sbp));
    Ok(SelectionOutcome {
        target,
        selection,
        final_perf_ksbp,
        final_perf_sbp,
        quadrant,
    })
}

pub fn select_final(
    neighborhood: &Neighborhood,
    scheme: WeightScheme,
    ksbp_star: Portfolio,
    sbp_star: Portfolio,
    eaf: &(impl EafSource + ?Sized),
) -> Result<SelectionOutcome> {
    let local = select_local(neighborhood, scheme, ksbp_star, sbp_star, eaf)?;
    diagnose(local, eaf)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrantFractions {
    pub ll: f64,
    pub lg: f64,
    pub gl: f64,
    pub gg: f64,
}

impl QuadrantFractions {
    pub fn get(&self, q: Quadrant) -> f64 {
        match q {
            Quadrant::LL => self.ll,
            Quadrant::LG => self.lg,
            Quadrant::GL => self.gl,
            Quadrant::GG => self.gg,
        }
    }
}

pub fn quadrant_summary<'a>(
    quadrants: impl IntoIterator<Item = &'a Quadrant>,
) -> Result<QuadrantFractions> {
    let mut counts = [0usize; 4];
    for q in quadrants {
        counts[*q as usize] += 1;
    }
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::Usage("quadrant summary of no outcomes".into()));
    }
    let frac = |i: usize| counts[i] as f64 / n as f64;
    Ok(QuadrantFractions {
        ll: frac(0),
        lg: frac(1),
        gl: frac(2),
        gg: frac(3),
    })
}
