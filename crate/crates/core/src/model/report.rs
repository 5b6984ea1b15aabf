use serde::{Deserialize, Serialize};

use super::train::ViewState;
use crate::graph::{label_homophily, MultiViewGraph};

/// Homophily of the original graph, the similarity graph and the
/// reconstruction against one labeling. Weighted graphs use the same-label
/// share of off-diagonal weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomophilyTriple {
    pub a: f64,
    pub s: f64,
    pub a_hat: f64,
}

impl HomophilyTriple {
    pub fn measure(a: &crate::Tensor, state: &ViewState, labels: &[usize]) -> Self {
        HomophilyTriple {
            a: label_homophily(a, labels),
            s: label_homophily(&state.s, labels),
            a_hat: label_homophily(state.a_hat.matrix(), labels),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewHomophily {
    /// 1-based view index.
    pub view: usize,
    pub true_labels: Option<HomophilyTriple>,
    pub pseudo_labels: HomophilyTriple,
}

pub fn homophily_report(graph: &MultiViewGraph, states: &[ViewState], pseudo: &[usize]) -> Vec<ViewHomophily> {
    graph
        .views
        .iter()
        .zip(states)
        .enumerate()
        .map(|(v, (a, st))| ViewHomophily {
            view: v + 1,
            true_labels: graph
                .labels
                .as_deref()
                .map(|l| HomophilyTriple::measure(a.matrix(), st, l)),
            pseudo_labels: HomophilyTriple::measure(a.matrix(), st, pseudo),
        })
        .collect()
}
