use num_traits::{One, Zero};

use super::{alpha, int, marked_partition, partition, rat, triangulation_count, ExactRational};
use crate::error::{Error, Result};

/// One row of a printable law table: outcome label and its exact mass.
#[derive(Debug, Clone, PartialEq)]
pub struct LawRow {
    pub label: String,
    pub mass: ExactRational,
}

/// Transition law of the boundary chain at boundary parameter `m`
/// (the frontier has `m + 2` vertices).
///
/// `p_down[k - 1]` is `P(X = -k)` and already counts both sides of the peel
/// edge; the side is drawn separately at sampling time.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLaw {
    pub m: u64,
    pub p_up: ExactRational,
    pub p_down: Vec<ExactRational>,
}

impl StepLaw {
    /// The law at `m`. At `m = 0` the frontier is a 2-gon and only `+1` is
    /// possible.
    pub fn new(m: u64) -> Self {
        let p_up = rat((2 * m + 3) as i64, (3 * m + 3) as i64);
        let mut p_down = Vec::with_capacity(m as usize);
        if m >= 1 {
            let mut p = rat(m as i64, (2 * (2 * m + 1)) as i64);
            for k in 1..=m {
                if k > 1 {
                    let j = k - 1;
                    p *= rat(
                        ((2 * j - 1) * (m - j)) as i64,
                        ((j + 2) * (2 * m - 2 * j + 1)) as i64,
                    );
                }
                p_down.push(p.clone());
            }
        }
        StepLaw { m, p_up, p_down }
    }

    /// `P(X = delta)`, zero outside the support.
    pub fn prob(&self, delta: i64) -> ExactRational {
        match delta {
            1 => self.p_up.clone(),
            d if d < 0 && (-d) as u64 <= self.m => self.p_down[(-d - 1) as usize].clone(),
            _ => ExactRational::zero(),
        }
    }

    pub fn total_mass(&self) -> ExactRational {
        self.p_down.iter().fold(self.p_up.clone(), |acc, p| acc + p)
    }

    pub fn mean(&self) -> ExactRational {
        self.p_down
            .iter()
            .enumerate()
            .fold(self.p_up.clone(), |acc, (i, p)| acc - int(i as u64 + 1) * p)
    }

    pub fn rows(&self) -> Vec<LawRow> {
        let mut rows = vec![LawRow { label: "+1".into(), mass: self.p_up.clone() }];
        rows.extend(self.p_down.iter().enumerate().map(|(i, p)| LawRow {
            label: format!("-{}", i + 1),
            mass: p.clone(),
        }));
        rows
    }
}

/// First peeling step of a free triangulation of an `(m+2)`-gon carrying a
/// marked internal vertex.
///
/// `p_split[k - 1]` counts both sides, like [`StepLaw::p_down`]; the marked
/// vertex lands in the detached part with the complementary share.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedStepLaw {
    pub m: u64,
    pub p_new_unmarked: ExactRational,
    pub p_new_marked: ExactRational,
    pub p_split: Vec<ExactRational>,
}

impl MarkedStepLaw {
    pub fn new(m: u64) -> Self {
        let z: Vec<ExactRational> = (0..=m + 1).map(partition).collect();
        let zt: Vec<ExactRational> = (0..=m + 1).map(marked_partition).collect();
        let mu = m as usize;
        let denom = &zt[mu];
        let a = alpha();
        let p_new_unmarked = &zt[mu + 1] / (&a * denom);
        let p_new_marked = &z[mu + 1] / (&a * denom);
        let p_split = (1..=mu)
            .map(|k| int(2) * &zt[mu - k] * &z[k - 1] / denom)
            .collect();
        MarkedStepLaw { m, p_new_unmarked, p_new_marked, p_split }
    }

    pub fn total_mass(&self) -> ExactRational {
        self.p_split
            .iter()
            .fold(&self.p_new_unmarked + &self.p_new_marked, |acc, p| acc + p)
    }

    pub fn rows(&self) -> Vec<LawRow> {
        let mut rows = vec![
            LawRow { label: "new-unmarked".into(), mass: self.p_new_unmarked.clone() },
            LawRow { label: "new-marked".into(), mass: self.p_new_marked.clone() },
        ];
        rows.extend(self.p_split.iter().enumerate().map(|(i, p)| LawRow {
            label: format!("split-{}", i + 1),
            mass: p.clone(),
        }));
        rows
    }
}

/// First peeling step of a free (unmarked) triangulation of an `(m+2)`-gon.
///
/// Peeling the edge `x_{m+1} x_0`, the third vertex is either new or one of
/// the boundary vertices `x_1..x_m`; `p_split[i - 1]` is the mass of `x_i`.
/// For the 2-gon (`m = 0`) the remaining mass glues the two sides together.
#[derive(Debug, Clone, PartialEq)]
pub struct FreePeelLaw {
    pub m: u64,
    pub p_new: ExactRational,
    pub p_split: Vec<ExactRational>,
    pub p_glue: ExactRational,
}

impl FreePeelLaw {
    pub fn new(m: u64) -> Self {
        let z: Vec<ExactRational> = (0..=m + 1).map(partition).collect();
        let mu = m as usize;
        let p_new = &z[mu + 1] / (alpha() * &z[mu]);
        let p_split = (1..=mu).map(|i| &z[i - 1] * &z[mu - i] / &z[mu]).collect();
        let p_glue = if m == 0 { z[0].recip() } else { ExactRational::zero() };
        FreePeelLaw { m, p_new, p_split, p_glue }
    }

    pub fn total_mass(&self) -> ExactRational {
        self.p_split.iter().fold(&self.p_new + &self.p_glue, |acc, p| acc + p)
    }

    pub fn rows(&self) -> Vec<LawRow> {
        let mut rows = vec![LawRow { label: "new".into(), mass: self.p_new.clone() }];
        rows.extend(self.p_split.iter().enumerate().map(|(i, p)| LawRow {
            label: format!("split-{}", i + 1),
            mass: p.clone(),
        }));
        if self.m == 0 {
            rows.push(LawRow { label: "glue".into(), mass: self.p_glue.clone() });
        }
        rows
    }
}

/// Truncated law of the number of internal vertices under the free
/// distribution on `(m+2)`-gon triangulations.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeSizeLaw {
    pub m: u64,
    /// `probs[n] = P(|T| = n)` for `n = 0..=n_max`.
    pub probs: Vec<ExactRational>,
    pub tail_mass: ExactRational,
}

impl FreeSizeLaw {
    pub fn new(m: u64, n_max: u64) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::invalid("n_max", "must be positive"));
        }
        let inv_alpha = alpha().recip();
        let mut p = triangulation_count(0, m) / partition(m);
        let mut probs = Vec::with_capacity(n_max as usize + 1);
        let mut total = ExactRational::zero();
        for n in 0..=n_max {
            if n > 0 {
                p *= count_ratio(n - 1, m) * &inv_alpha;
            }
            total += &p;
            probs.push(p.clone());
        }
        Ok(FreeSizeLaw { m, probs, tail_mass: ExactRational::one() - total })
    }

    pub fn rows(&self) -> Vec<LawRow> {
        let mut rows: Vec<LawRow> = self
            .probs
            .iter()
            .enumerate()
            .map(|(n, p)| LawRow { label: n.to_string(), mass: p.clone() })
            .collect();
        rows.push(LawRow { label: "tail".into(), mass: self.tail_mass.clone() });
        rows
    }
}

/// `φ(n+1, m) / φ(n, m)`.
pub(crate) fn count_ratio(n: u64, m: u64) -> ExactRational {
    let s = 2 * m + 3 * n;
    let numer = 2 * (s + 3) * (s + 2) * (s + 1);
    let denom = (n + 1) * (2 * m + 2 * n + 4) * (2 * m + 2 * n + 3);
    ExactRational::new(numer.into(), denom.into())
}
