//! Direct semantic evaluation of formulas on ultimately periodic words and
//! on finite prefixes. This is the reference semantics used by the play
//! oracle and the test oracles; it shares no code with the automaton route.

use crate::bitset::BitSet;
use crate::ltl::formula::Formula;
use thiserror::Error;

#[derive(Error, Debug, PartialEq, Eq)]
#[error("unknown atom `{0}`")]
pub struct UnknownAtom(pub String);

/// An ultimately periodic word: positions `0..loop_start` form the stem and
/// `loop_start..labels.len()` repeat forever.
pub struct LassoWord<'a> {
    pub labels: &'a [BitSet],
    pub loop_start: usize,
}

fn atom_vals(
    name: &str,
    labels: &[BitSet],
    resolve: &dyn Fn(&str) -> Option<usize>,
) -> Result<Vec<bool>, UnknownAtom> {
    let p = resolve(name).ok_or_else(|| UnknownAtom(name.to_string()))?;
    Ok(labels.iter().map(|l| l.contains(p)).collect())
}

/// Evaluate `f` at the first position of the word, by fixpoint iteration of
/// the temporal operators over the lasso positions.
pub fn eval_lasso(
    f: &Formula,
    word: &LassoWord,
    resolve: &dyn Fn(&str) -> Option<usize>,
) -> Result<bool, UnknownAtom> {
    assert!(
        word.loop_start < word.labels.len(),
        "cycle must be non-empty"
    );
    Ok(eval_positions(f, word, resolve)?[0])
}

fn eval_positions(
    f: &Formula,
    word: &LassoWord,
    resolve: &dyn Fn(&str) -> Option<usize>,
) -> Result<Vec<bool>, UnknownAtom> {
    let n = word.labels.len();
    let next = |i: usize| if i + 1 < n { i + 1 } else { word.loop_start };
    let lfp = |a: &[bool], b: &[bool]| {
        // least fixpoint of v[i] = b[i] ∨ (a[i] ∧ v[next i])
        let mut v: Vec<bool> = b.to_vec();
        loop {
            let mut changed = false;
            for i in (0..n).rev() {
                let w = b[i] || (a[i] && v[next(i)]);
                if w != v[i] {
                    v[i] = w;
                    changed = true;
                }
            }
            if !changed {
                return v;
            }
        }
    };
    let gfp = |a: &[bool], b: &[bool]| {
        // greatest fixpoint of v[i] = b[i] ∧ (a[i] ∨ v[next i])
        let mut v: Vec<bool> = vec![true; n];
        loop {
            let mut changed = false;
            for i in (0..n).rev() {
                let w = b[i] && (a[i] || v[next(i)]);
                if w != v[i] {
                    v[i] = w;
                    changed = true;
                }
            }
            if !changed {
                return v;
            }
        }
    };

    Ok(match f {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Atom(a) => atom_vals(a, word.labels, resolve)?,
        Formula::Not(x) => {
            let v = eval_positions(x, word, resolve)?;
            v.into_iter().map(|b| !b).collect()
        }
        Formula::And(a, b) => {
            let va = eval_positions(a, word, resolve)?;
            let vb = eval_positions(b, word, resolve)?;
            va.into_iter().zip(vb).map(|(x, y)| x && y).collect()
        }
        Formula::Or(a, b) => {
            let va = eval_positions(a, word, resolve)?;
            let vb = eval_positions(b, word, resolve)?;
            va.into_iter().zip(vb).map(|(x, y)| x || y).collect()
        }
        Formula::Implies(a, b) => {
            let va = eval_positions(a, word, resolve)?;
            let vb = eval_positions(b, word, resolve)?;
            va.into_iter().zip(vb).map(|(x, y)| !x || y).collect()
        }
        Formula::Until(a, b) => {
            let va = eval_positions(a, word, resolve)?;
            let vb = eval_positions(b, word, resolve)?;
            lfp(&va, &vb)
        }
        Formula::Release(a, b) => {
            let va = eval_positions(a, word, resolve)?;
            let vb = eval_positions(b, word, resolve)?;
            gfp(&va, &vb)
        }
        Formula::Finally(x) => {
            let vx = eval_positions(x, word, resolve)?;
            lfp(&vec![true; n], &vx)
        }
        Formula::Globally(x) => {
            let vx = eval_positions(x, word, resolve)?;
            gfp(&vec![false; n], &vx)
        }
    })
}

/// Three-valued bounded evaluation on a finite prefix: `Some(b)` when every
/// infinite extension agrees on `b`, `None` when the prefix does not decide.
pub fn eval_prefix(
    f: &Formula,
    labels: &[BitSet],
    resolve: &dyn Fn(&str) -> Option<usize>,
) -> Result<Option<bool>, UnknownAtom> {
    Ok(eval_prefix_positions(f, labels, resolve)?[0])
}

fn and3(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), x) | (x, Some(true)) => x,
        _ => None,
    }
}

fn or3(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(true), _) | (_, Some(true)) => Some(true),
        (Some(false), x) | (x, Some(false)) => x,
        _ => None,
    }
}

fn not3(a: Option<bool>) -> Option<bool> {
    a.map(|b| !b)
}

fn eval_prefix_positions(
    f: &Formula,
    labels: &[BitSet],
    resolve: &dyn Fn(&str) -> Option<usize>,
) -> Result<Vec<Option<bool>>, UnknownAtom> {
    let n = labels.len();
    assert!(n > 0, "prefix must be non-empty");
    Ok(match f {
        Formula::True => vec![Some(true); n],
        Formula::False => vec![Some(false); n],
        Formula::Atom(a) => atom_vals(a, labels, resolve)?
            .into_iter()
            .map(Some)
            .collect(),
        Formula::Not(x) => eval_prefix_positions(x, labels, resolve)?
            .into_iter()
            .map(not3)
            .collect(),
        Formula::And(a, b) => {
            let va = eval_prefix_positions(a, labels, resolve)?;
            let vb = eval_prefix_positions(b, labels, resolve)?;
            va.into_iter().zip(vb).map(|(x, y)| and3(x, y)).collect()
        }
        Formula::Or(a, b) => {
            let va = eval_prefix_positions(a, labels, resolve)?;
            let vb = eval_prefix_positions(b, labels, resolve)?;
            va.into_iter().zip(vb).map(|(x, y)| or3(x, y)).collect()
        }
        Formula::Implies(a, b) => {
            let va = eval_prefix_positions(a, labels, resolve)?;
            let vb = eval_prefix_positions(b, labels, resolve)?;
            va.into_iter()
                .zip(vb)
                .map(|(x, y)| or3(not3(x), y))
                .collect()
        }
        Formula::Until(a, b) => {
            let va = eval_prefix_positions(a, labels, resolve)?;
            let vb = eval_prefix_positions(b, labels, resolve)?;
            let mut v = vec![None; n];
            for i in (0..n).rev() {
                let cont = if i + 1 < n { v[i + 1] } else { None };
                v[i] = or3(vb[i], and3(va[i], cont));
            }
            v
        }
        Formula::Release(a, b) => {
            let va = eval_prefix_positions(a, labels, resolve)?;
            let vb = eval_prefix_positions(b, labels, resolve)?;
            let mut v = vec![None; n];
            for i in (0..n).rev() {
                let cont = if i + 1 < n { v[i + 1] } else { None };
                v[i] = and3(vb[i], or3(va[i], cont));
            }
            v
        }
        Formula::Finally(x) => {
            let vx = eval_prefix_positions(x, labels, resolve)?;
            let mut v = vec![None; n];
            for i in (0..n).rev() {
                let cont = if i + 1 < n { v[i + 1] } else { None };
                v[i] = or3(vx[i], cont);
            }
            v
        }
        Formula::Globally(x) => {
            let vx = eval_prefix_positions(x, labels, resolve)?;
            let mut v = vec![None; n];
            for i in (0..n).rev() {
                let cont = if i + 1 < n { v[i + 1] } else { None };
                v[i] = and3(vx[i], cont);
            }
            v
        }
    })
}
