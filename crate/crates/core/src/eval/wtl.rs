//! Pairwise win-tie-loss ranking gated by the signed-rank test.
//!
//! For every pair of methods and every scalar measure, a pair that the
//! Wilcoxon test cannot tell apart scores a tie for both. Otherwise the
//! method with the better measure value wins and the other loses.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::metrics::{mdmre, mmre, pred, MreVector};
use super::wilcoxon::wilcoxon_signed_rank;
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Mmre,
    Mdmre,
    Pred25,
    Pred50,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::Mmre,
        Measure::Mdmre,
        Measure::Pred25,
        Measure::Pred50,
    ];

    pub fn value(self, v: &MreVector) -> Result<f64, EvalError> {
        match self {
            Measure::Mmre => mmre(v),
            Measure::Mdmre => mdmre(v),
            Measure::Pred25 => pred(v, 0.25),
            Measure::Pred50 => pred(v, 0.5),
        }
    }

    pub fn lower_is_better(self) -> bool {
        matches!(self, Measure::Mmre | Measure::Mdmre)
    }

    /// `Some(true)` if `a` beats `b`, `Some(false)` if `b` beats `a`,
    /// `None` when the values are equal.
    fn better(self, a: f64, b: f64) -> Option<bool> {
        if a == b {
            None
        } else {
            Some((a < b) == self.lower_is_better())
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Mmre => "MMRE",
            Measure::Mdmre => "MdMRE",
            Measure::Pred25 => "Pred(0.25)",
            Measure::Pred50 => "Pred(0.5)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WtlRow {
    pub method: String,
    pub win: usize,
    pub tie: usize,
    pub loss: usize,
    /// Competition rank by descending `win − loss`, starting at 1.
    pub rank: usize,
}

impl WtlRow {
    pub fn net(&self) -> i64 {
        self.win as i64 - self.loss as i64
    }
}

/// Rows are kept in input order; sort by `rank` for a leaderboard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WtlTable {
    pub rows: Vec<WtlRow>,
    pub measures: Vec<Measure>,
}

impl WtlTable {
    pub fn row(&self, method: &str) -> Option<&WtlRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

impl fmt::Display for WtlTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .rows
            .iter()
            .map(|r| r.method.len())
            .max()
            .unwrap_or(0)
            .max(6);
        writeln!(
            f,
            "{:<width$}  {:>4}  {:>4}  {:>4}  {:>4}",
            "Method", "Win", "Tie", "Loss", "Rank"
        )?;
        let mut rows: Vec<&WtlRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| r.rank);
        for r in rows {
            writeln!(
                f,
                "{:<width$}  {:>4}  {:>4}  {:>4}  {:>4}",
                r.method, r.win, r.tie, r.loss, r.rank
            )?;
        }
        Ok(())
    }
}

/// Tallies wins, ties and losses over every unordered pair of methods.
pub fn win_tie_loss(
    methods: &[(String, MreVector)],
    measures: &[Measure],
    alpha: f64,
) -> Result<WtlTable, EvalError> {
    if methods.len() < 2 {
        return Err(EvalError::TooFewMethods(methods.len()));
    }
    let n = methods[0].1.len();
    if let Some((name, v)) = methods.iter().find(|(_, v)| v.len() != n) {
        return Err(EvalError::Misaligned {
            method: name.clone(),
            expected: n,
            got: v.len(),
        });
    }
    let values: Vec<Vec<f64>> = methods
        .iter()
        .map(|(_, v)| measures.iter().map(|m| m.value(v)).collect())
        .collect::<Result<_, _>>()?;

    let mut win = vec![0usize; methods.len()];
    let mut tie = vec![0usize; methods.len()];
    let mut loss = vec![0usize; methods.len()];
    for i in 0..methods.len() {
        for j in i + 1..methods.len() {
            let test = wilcoxon_signed_rank(methods[i].1.values(), methods[j].1.values(), alpha)?;
            for (e, measure) in measures.iter().enumerate() {
                let outcome = if test.same {
                    None
                } else {
                    measure.better(values[i][e], values[j][e])
                };
                match outcome {
                    None => {
                        tie[i] += 1;
                        tie[j] += 1;
                    }
                    Some(true) => {
                        win[i] += 1;
                        loss[j] += 1;
                    }
                    Some(false) => {
                        win[j] += 1;
                        loss[i] += 1;
                    }
                }
            }
        }
    }

    let net: Vec<i64> = (0..methods.len())
        .map(|i| win[i] as i64 - loss[i] as i64)
        .collect();
    let rows = methods
        .iter()
        .enumerate()
        .map(|(i, (name, _))| WtlRow {
            method: name.clone(),
            win: win[i],
            tie: tie[i],
            loss: loss[i],
            rank: 1 + net.iter().filter(|&&other| other > net[i]).count(),
        })
        .collect();
    Ok(WtlTable {
        rows,
        measures: measures.to_vec(),
    })
}
