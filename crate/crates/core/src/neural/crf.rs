//! Linear-chain CRF output layer: log-partition by the forward
//! recursion, Viterbi decoding, and the marginals needed for training,
//! all in log space.
//!
//! The transition matrix is (L+2)×(L+2) over the label set plus two
//! pseudo-states for sequence start and stop; entry `[a, b]` scores the
//! transition a → b. Structurally impossible transitions are pinned to
//! [`TRANSITION_MASK`], a very negative finite score — unlike −∞ it
//! cannot produce NaN inside log-sum-exp, but it still zeroes the
//! probability of every path through it.

use ndarray::Array2;

use crate::affixes::Label;

/// Row/column of the start pseudo-state in the transition matrix.
pub const START_STATE: usize = Label::COUNT;
/// Row/column of the stop pseudo-state in the transition matrix.
pub const STOP_STATE: usize = Label::COUNT + 1;
/// Score pinned onto transitions that the label grammar forbids.
pub const TRANSITION_MASK: f64 = -1e30;

const L: usize = Label::COUNT;
const STATES: usize = L + 2;

/// Zero scores on every transition the label grammar allows
/// (`B→{M,E}`, `M→{M,E}`, `E/S→{B,S,WB}`, `WB→{B,S}`, start→`{B,S}`,
/// `{E,S}`→stop) and [`TRANSITION_MASK`] everywhere else. Training
/// leaves the masked entries untouched: no path crosses them, so their
/// gradient is exactly zero.
pub fn structural_transitions() -> Array2<f64> {
    let mut m = Array2::from_elem((STATES, STATES), TRANSITION_MASK);
    for a in Label::ALL {
        for b in Label::ALL {
            if a.may_precede(b) {
                m[[a.index(), b.index()]] = 0.0;
            }
        }
    }
    for l in Label::ALL {
        if l.may_start() {
            m[[START_STATE, l.index()]] = 0.0;
        }
        if l.may_end() {
            m[[l.index(), STOP_STATE]] = 0.0;
        }
    }
    m
}

fn check_shapes(em: &Array2<f64>, trans: &Array2<f64>) {
    assert!(em.nrows() >= 1, "emission matrix must cover at least one position");
    assert_eq!(em.ncols(), L, "emission matrix must have one column per label");
    assert_eq!(trans.dim(), (STATES, STATES), "transition matrix must be (L+2)×(L+2)");
}

fn logsumexp(vals: &[f64]) -> f64 {
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// log Σ over all label paths of exp(path score), where a path scores
/// the sum of its emissions plus its transitions including start and
/// stop.
pub fn crf_log_partition(em: &Array2<f64>, trans: &Array2<f64>) -> f64 {
    check_shapes(em, trans);
    let (alpha, z) = forward_alphas(em, trans);
    let _ = alpha;
    z
}

fn forward_alphas(em: &Array2<f64>, trans: &Array2<f64>) -> (Array2<f64>, f64) {
    let t_len = em.nrows();
    let mut alpha = Array2::zeros((t_len, L));
    for j in 0..L {
        alpha[[0, j]] = trans[[START_STATE, j]] + em[[0, j]];
    }
    let mut scratch = [0.0; L];
    for t in 1..t_len {
        for j in 0..L {
            for i in 0..L {
                scratch[i] = alpha[[t - 1, i]] + trans[[i, j]];
            }
            alpha[[t, j]] = logsumexp(&scratch) + em[[t, j]];
        }
    }
    let mut finals = [0.0; L];
    for j in 0..L {
        finals[j] = alpha[[t_len - 1, j]] + trans[[j, STOP_STATE]];
    }
    let z = logsumexp(&finals);
    (alpha, z)
}

/// Total score of one explicit label path (indices into `Label::ALL`).
pub(crate) fn path_score(em: &Array2<f64>, trans: &Array2<f64>, path: &[usize]) -> f64 {
    debug_assert_eq!(path.len(), em.nrows());
    let mut score = trans[[START_STATE, path[0]]];
    let mut prev = path[0];
    for (t, &j) in path.iter().enumerate() {
        score += em[[t, j]];
        if t > 0 {
            score += trans[[prev, j]];
        }
        prev = j;
    }
    score + trans[[prev, STOP_STATE]]
}

/// The max-scoring label path. Ties break toward the lowest label index
/// at every backtrack step: among equal-scoring paths this selects the
/// one whose label indices are lexicographically smallest read from the
/// *end* of the sequence backwards, matching how the backpointers are
/// resolved.
pub fn viterbi(em: &Array2<f64>, trans: &Array2<f64>) -> Vec<Label> {
    check_shapes(em, trans);
    let t_len = em.nrows();
    let mut score = Array2::zeros((t_len, L));
    let mut back = vec![[0usize; L]; t_len];
    for j in 0..L {
        score[[0, j]] = trans[[START_STATE, j]] + em[[0, j]];
    }
    for t in 1..t_len {
        for j in 0..L {
            let mut best = f64::NEG_INFINITY;
            let mut best_i = 0;
            for i in 0..L {
                let s = score[[t - 1, i]] + trans[[i, j]];
                if s > best {
                    best = s;
                    best_i = i;
                }
            }
            score[[t, j]] = best + em[[t, j]];
            back[t][j] = best_i;
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_j = 0;
    for j in 0..L {
        let s = score[[t_len - 1, j]] + trans[[j, STOP_STATE]];
        if s > best {
            best = s;
            best_j = j;
        }
    }
    let mut path = vec![best_j];
    for t in (1..t_len).rev() {
        path.push(back[t][*path.last().unwrap()]);
    }
    path.reverse();
    path.into_iter().map(|i| Label::from_index(i).unwrap()).collect()
}

/// Negative log-likelihood of the gold path plus its gradients:
/// ∂loss/∂emissions (marginal − gold indicator, T×L) and ∂loss/∂trans
/// (expected transition counts − gold counts, (L+2)×(L+2)).
pub(crate) fn loss_and_crf_grads(
    em: &Array2<f64>,
    trans: &Array2<f64>,
    gold: &[usize],
) -> (f64, Array2<f64>, Array2<f64>) {
    check_shapes(em, trans);
    debug_assert_eq!(gold.len(), em.nrows());
    let t_len = em.nrows();
    let (alpha, z) = forward_alphas(em, trans);

    // Backward pass: beta[t][i] = log Σ over completions from state i.
    let mut beta = Array2::zeros((t_len, L));
    for i in 0..L {
        beta[[t_len - 1, i]] = trans[[i, STOP_STATE]];
    }
    let mut scratch = [0.0; L];
    for t in (0..t_len - 1).rev() {
        for i in 0..L {
            for j in 0..L {
                scratch[j] = trans[[i, j]] + em[[t + 1, j]] + beta[[t + 1, j]];
            }
            beta[[t, i]] = logsumexp(&scratch);
        }
    }

    let mut d_em = Array2::zeros((t_len, L));
    for t in 0..t_len {
        for j in 0..L {
            d_em[[t, j]] = (alpha[[t, j]] + beta[[t, j]] - z).exp();
        }
        d_em[[t, gold[t]]] -= 1.0;
    }

    let mut d_trans = Array2::zeros((STATES, STATES));
    for j in 0..L {
        // P(y₀ = j) equals the node marginal at t = 0.
        d_trans[[START_STATE, j]] = (alpha[[0, j]] + beta[[0, j]] - z).exp();
        d_trans[[j, STOP_STATE]] = (alpha[[t_len - 1, j]] + beta[[t_len - 1, j]] - z).exp();
    }
    d_trans[[START_STATE, gold[0]]] -= 1.0;
    d_trans[[gold[t_len - 1], STOP_STATE]] -= 1.0;
    for t in 0..t_len - 1 {
        for i in 0..L {
            for j in 0..L {
                d_trans[[i, j]] +=
                    (alpha[[t, i]] + trans[[i, j]] + em[[t + 1, j]] + beta[[t + 1, j]] - z).exp();
            }
        }
        d_trans[[gold[t], gold[t + 1]]] -= 1.0;
    }

    (z - path_score(em, trans, gold), d_em, d_trans)
}
