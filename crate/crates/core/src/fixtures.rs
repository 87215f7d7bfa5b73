//! Hand-built instances with known radii.
//!
//! Point order inside each fixture is fixed so that earliest-position
//! tie-breaking reproduces the worked executions: in the 2-D fixtures `(-2,3)`
//! is listed before `(2,3)`.

use std::fmt;

use serde::Serialize;

use crate::cover::verify_cover;
use crate::error::{Error, Result};
use crate::farthest_first::{farthest_first, SeedPolicy};
use crate::metric::{self, IndexSubset, MetricKind, PointSet};
use crate::oracle::{opt_kcenter, BOUND_REL_TOL};

pub const FIXTURE_NAMES: [&str; 5] = [
    "tightness_line",
    "proposition_line",
    "decrease_line",
    "fail_additive_2d",
    "fail_monotone_2d",
];

pub const DEFAULT_PROPOSITION_DELTA: f32 = 5.0;

/// Quantities a fixture can pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `cost(FF(P), P)`
    FfPOnP,
    /// `cost(FF(Q), P)`
    FfQOnP,
    /// `cost(FF(Q), Q)`
    FfQOnQ,
    Opt,
    /// `max_p d(p, Q)`
    CoverRadius,
    Delta,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::FfPOnP => "cost(FF(P),P)",
            Quantity::FfQOnP => "cost(FF(Q),P)",
            Quantity::FfQOnQ => "cost(FF(Q),Q)",
            Quantity::Opt => "OPT",
            Quantity::CoverRadius => "d(P,Q)",
            Quantity::Delta => "delta",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

/// Right-hand side of an expectation: `sum(coef * quantity) + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub terms: Vec<(f64, Quantity)>,
    pub constant: f64,
}

impl Expr {
    fn q(q: Quantity) -> Self {
        Expr {
            terms: vec![(1.0, q)],
            constant: 0.0,
        }
    }

    fn c(v: f64) -> Self {
        Expr {
            terms: vec![],
            constant: v,
        }
    }

    fn plus(mut self, coef: f64, q: Quantity) -> Self {
        self.terms.push((coef, q));
        self
    }

    fn eval(&self, values: &Measured) -> f64 {
        self.terms
            .iter()
            .map(|(c, q)| c * values.get(*q))
            .sum::<f64>()
            + self.constant
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, q) in &self.terms {
            if !first {
                f.write_str(if *c < 0.0 { " - " } else { " + " })?;
            } else if *c < 0.0 {
                f.write_str("-")?;
            }
            match c.abs() {
                1.0 => write!(f, "{q}")?,
                a => write!(f, "{a}*{q}")?,
            }
            first = false;
        }
        if self.constant != 0.0 || first {
            if first {
                write!(f, "{}", self.constant)?;
            } else {
                write!(
                    f,
                    " {} {}",
                    if self.constant < 0.0 { "-" } else { "+" },
                    self.constant.abs()
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
}

impl Expectation {
    fn new(lhs: Expr, relation: Relation, rhs: Expr) -> Self {
        Expectation { lhs, relation, rhs }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub points: PointSet,
    /// Indices of the hand-picked subset `Q`, when the instance has one.
    pub cover: Option<Vec<usize>>,
    pub k: usize,
    pub delta: Option<f32>,
    pub seed: SeedPolicy,
    pub expected: Vec<Expectation>,
}

impl Fixture {
    pub fn cover_subset(&self) -> Result<Option<IndexSubset>> {
        self.cover
            .as_ref()
            .map(|q| self.points.subset(q.clone()))
            .transpose()
    }

    /// Runs the instance through the library and measures every quantity
    /// the fixture defines.
    pub fn measure(&self) -> Result<Measured> {
        let ps = &self.points;
        let all = ps.full();
        let ff_p = farthest_first(&all, self.k, self.seed, ps)?;
        let mut m = Measured {
            ff_p_on_p: ff_p.final_radius() as f64,
            centers_p: ff_p.chosen,
            opt: opt_kcenter(ps, self.k)?.radius as f64,
            ff_q_on_p: None,
            ff_q_on_q: None,
            centers_q: None,
            cover_radius: None,
            delta: self.delta.map(f64::from),
        };
        if let Some(q) = self.cover_subset()? {
            let ff_q = farthest_first(&q, self.k, self.seed, ps)?;
            m.ff_q_on_q = Some(ff_q.final_radius() as f64);
            m.ff_q_on_p = Some(metric::cost(&ff_q.centers(ps), &all, ps)?.radius as f64);
            m.centers_q = Some(ff_q.chosen);
            if let Some(delta) = self.delta {
                m.cover_radius = Some(verify_cover(ps, &q, delta)?.achieved as f64);
            }
        }
        Ok(m)
    }

    pub fn verify(&self) -> Result<FixtureReport> {
        let m = self.measure()?;
        let checks: Vec<CheckOutcome> = self
            .expected
            .iter()
            .map(|e| {
                let lhs = e.lhs.eval(&m);
                let rhs = e.rhs.eval(&m);
                let tol = BOUND_REL_TOL * lhs.abs().max(rhs.abs());
                let pass = match e.relation {
                    Relation::Eq => (lhs - rhs).abs() <= tol,
                    Relation::Le => lhs <= rhs + tol,
                    Relation::Lt => lhs < rhs - tol,
                    Relation::Gt => lhs > rhs + tol,
                };
                CheckOutcome {
                    label: format!("{} {} {}", e.lhs, relation_str(e.relation), e.rhs),
                    lhs,
                    relation: e.relation,
                    rhs,
                    pass,
                }
            })
            .collect();
        Ok(FixtureReport {
            name: self.name.clone(),
            passed: checks.iter().all(|c| c.pass),
            checks,
            measured: m,
        })
    }
}

fn relation_str(r: Relation) -> &'static str {
    match r {
        Relation::Eq => "==",
        Relation::Le => "<=",
        Relation::Lt => "<",
        Relation::Gt => ">",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measured {
    pub ff_p_on_p: f64,
    pub centers_p: Vec<usize>,
    pub opt: f64,
    pub ff_q_on_p: Option<f64>,
    pub ff_q_on_q: Option<f64>,
    pub centers_q: Option<Vec<usize>>,
    pub cover_radius: Option<f64>,
    pub delta: Option<f64>,
}

impl Measured {
    pub fn get(&self, q: Quantity) -> f64 {
        match q {
            Quantity::FfPOnP => Some(self.ff_p_on_p),
            Quantity::FfQOnP => self.ff_q_on_p,
            Quantity::FfQOnQ => self.ff_q_on_q,
            Quantity::Opt => Some(self.opt),
            Quantity::CoverRadius => self.cover_radius,
            Quantity::Delta => self.delta,
        }
        .unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub label: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureReport {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
    pub measured: Measured,
}

fn sqrt(v: f64) -> f64 {
    v.sqrt()
}

/// Looks up a fixture by name. `proposition_line` takes an optional δ as
/// `proposition_line(10)`; the default is 5.
pub fn fixture(name: &str) -> Result<Fixture> {
    use Quantity::*;
    use Relation::*;

    let (base, arg) = match name.split_once('(') {
        Some((b, rest)) => {
            let arg = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::NotFound(format!("fixture '{name}'")))?;
            (b, Some(arg))
        }
        None => (name, None),
    };
    if arg.is_some() && base != "proposition_line" {
        return Err(Error::NotFound(format!("fixture '{name}'")));
    }
    let e = Expectation::new;

    let fx = match base {
        "tightness_line" => Fixture {
            name: name.into(),
            points: PointSet::line(&[0.0, 1.0, 2.0])?,
            cover: None,
            k: 1,
            delta: None,
            seed: SeedPolicy::FirstIndex,
            expected: vec![
                e(Expr::q(FfPOnP), Eq, Expr::c(2.0)),
                e(Expr::q(Opt), Eq, Expr::c(1.0)),
                e(Expr::q(FfPOnP), Eq, Expr::c(0.0).plus(2.0, Opt)),
            ],
        },
        "proposition_line" => {
            let delta = match arg {
                None => DEFAULT_PROPOSITION_DELTA,
                Some(a) => a
                    .trim()
                    .parse::<f32>()
                    .map_err(|_| Error::invalid(format!("bad delta in '{name}'")))?,
            };
            proposition_line(delta)?
        }
        "decrease_line" => Fixture {
            name: name.into(),
            points: PointSet::line(&[0.0, 2.0, 3.0, 4.0])?,
            cover: Some(vec![0, 2]),
            k: 2,
            delta: Some(1.0),
            seed: SeedPolicy::FirstIndex,
            expected: vec![
                e(Expr::q(FfPOnP), Eq, Expr::c(2.0)),
                e(Expr::q(FfQOnP), Eq, Expr::c(1.0)),
                e(Expr::q(CoverRadius), Le, Expr::q(Delta)),
                e(Expr::q(FfQOnP), Lt, Expr::q(FfPOnP)),
            ],
        },
        "fail_additive_2d" => Fixture {
            name: name.into(),
            points: PointSet::from_rows(
                &[[0.0, 0.0], [-2.0, 3.0], [0.0, 3.0], [2.0, 3.0], [0.0, 4.0]],
                MetricKind::Euclidean,
            )?,
            cover: Some(vec![0, 1, 2, 3]),
            k: 2,
            delta: Some(1.0),
            seed: SeedPolicy::FirstIndex,
            expected: vec![
                e(Expr::q(FfPOnP), Eq, Expr::c(sqrt(5.0))),
                e(Expr::q(FfQOnP), Eq, Expr::c(sqrt(13.0))),
                e(Expr::q(CoverRadius), Le, Expr::q(Delta)),
                e(Expr::q(FfQOnP), Gt, Expr::q(FfPOnP).plus(1.0, Delta)),
                e(
                    Expr::q(FfQOnP),
                    Le,
                    Expr::c(0.0).plus(2.0, Opt).plus(1.0, Delta),
                ),
            ],
        },
        "fail_monotone_2d" => Fixture {
            name: name.into(),
            points: PointSet::from_rows(
                &[[0.0, 0.0], [-2.0, 3.0], [2.0, 3.0], [0.0, 4.0]],
                MetricKind::Euclidean,
            )?,
            cover: Some(vec![0, 1, 2]),
            k: 2,
            delta: Some(5f32.sqrt()),
            seed: SeedPolicy::FirstIndex,
            expected: vec![
                e(Expr::q(FfPOnP), Eq, Expr::c(sqrt(5.0))),
                e(Expr::q(FfQOnQ), Eq, Expr::c(sqrt(13.0))),
                e(Expr::q(CoverRadius), Le, Expr::q(Delta)),
                e(Expr::q(FfQOnQ), Gt, Expr::q(FfPOnP)),
                e(Expr::q(FfQOnQ), Le, Expr::c(0.0).plus(2.0, Opt)),
            ],
        },
        _ => return Err(Error::NotFound(format!("fixture '{name}'"))),
    };
    Ok(fx)
}

/// `P = {0, 1, δ+1}`, `Q = {0, 1}`, `k = 2`. Needs `δ >= 1` so that the
/// optimum is 1.
pub fn proposition_line(delta: f32) -> Result<Fixture> {
    use Quantity::*;
    use Relation::*;
    if !(delta >= 1.0 && delta.is_finite()) {
        return Err(Error::invalid(format!(
            "proposition_line needs a finite delta >= 1, got {delta}"
        )));
    }
    let e = Expectation::new;
    let mut expected = vec![
        e(Expr::q(FfQOnP), Eq, Expr::c(delta as f64)),
        e(Expr::q(Opt), Eq, Expr::c(1.0)),
        e(Expr::q(CoverRadius), Le, Expr::q(Delta)),
        e(
            Expr::q(FfQOnP),
            Le,
            Expr::c(0.0).plus(2.0, Opt).plus(1.0, Delta),
        ),
        e(
            Expr::q(FfQOnP).plus(-2.0, Opt),
            Eq,
            Expr::c(-2.0).plus(1.0, Delta),
        ),
    ];
    if delta > 2.0 {
        expected.push(e(Expr::q(FfQOnP), Gt, Expr::c(0.0).plus(2.0, Opt)));
    }
    Ok(Fixture {
        name: if delta == DEFAULT_PROPOSITION_DELTA {
            "proposition_line".into()
        } else {
            format!("proposition_line({delta})")
        },
        points: PointSet::line(&[0.0, 1.0, delta + 1.0])?,
        cover: Some(vec![0, 1]),
        k: 2,
        delta: Some(delta),
        seed: SeedPolicy::FirstIndex,
        expected,
    })
}

pub fn all_fixtures() -> Result<Vec<Fixture>> {
    FIXTURE_NAMES.iter().map(|n| fixture(n)).collect()
}
