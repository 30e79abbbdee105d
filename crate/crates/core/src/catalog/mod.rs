//! Named, seeded scenarios that turn the structural results and
//! counterexamples into checkable verdicts.
//!
//! A counterexample is encoded by asserting the failure it exhibits, so a
//! green suite means every example behaves as stated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{RealMatrix, ToleranceConfig};
use crate::sampling::{derive_seed, seeded_rng, SeededRng};

mod mappings;
mod positivity;
mod structure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Target of a check: a value with a tolerance, or a possibly one-sided
/// interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expected {
    Value(f64),
    Interval { lo: Option<f64>, hi: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The statement being checked.
    pub anchor: String,
    pub status: Status,
    pub value: f64,
    pub expected: Expected,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<RealMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn build(name: &str, anchor: &str, value: f64, expected: Expected, tolerance: f64, pass: bool) -> Self {
        let mut check = Self {
            name: name.to_string(),
            anchor: anchor.to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            value,
            expected,
            tolerance,
            witness: None,
            detail: None,
        };
        // JSON has no encoding for non-finite numbers
        if !value.is_finite() {
            check.value = if value.is_sign_negative() { f64::MIN } else { f64::MAX };
            check.status = Status::Fail;
            check.detail = Some(format!("non-finite value {value}"));
        }
        check
    }

    /// `|value - expected| ≤ tolerance`.
    pub fn within(name: &str, anchor: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (value - expected).abs() <= tolerance;
        Self::build(name, anchor, value, Expected::Value(expected), tolerance, pass)
    }

    /// `value ≤ limit + tolerance`.
    pub fn at_most(name: &str, anchor: &str, value: f64, limit: f64, tolerance: f64) -> Self {
        let expected = Expected::Interval {
            lo: None,
            hi: Some(limit),
        };
        Self::build(name, anchor, value, expected, tolerance, value <= limit + tolerance)
    }

    /// `value ≥ limit - tolerance`.
    pub fn at_least(name: &str, anchor: &str, value: f64, limit: f64, tolerance: f64) -> Self {
        let expected = Expected::Interval {
            lo: Some(limit),
            hi: None,
        };
        Self::build(name, anchor, value, expected, tolerance, value >= limit - tolerance)
    }

    /// A yes/no property; `expected = false` asserts a counterexample.
    pub fn holds(name: &str, anchor: &str, observed: bool, expected: bool) -> Self {
        let as_num = |b: bool| if b { 1.0 } else { 0.0 };
        Self::build(
            name,
            anchor,
            as_num(observed),
            Expected::Value(as_num(expected)),
            0.0,
            observed == expected,
        )
    }

    /// A count of failures among sampled cases, expected to be zero.
    pub fn none_of(name: &str, anchor: &str, failures: usize, cases: usize) -> Self {
        Self::within(name, anchor, failures as f64, 0.0, 0.0).detail(format!("{failures} of {cases} cases"))
    }

    pub fn skipped(name: &str, anchor: &str, reason: impl Into<String>) -> Self {
        let mut c = Self::build(name, anchor, 0.0, Expected::Value(0.0), 0.0, true);
        c.status = Status::Skipped;
        c.detail = Some(reason.into());
        c
    }

    pub fn witness(mut self, m: Option<RealMatrix>) -> Self {
        self.witness = m;
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub scenario: String,
    pub description: String,
    pub seed: u64,
    pub tol: ToleranceConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
    /// Every check that was not skipped passed.
    pub overall: bool,
}

impl Verdict {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

/// Inputs shared by the checks of one scenario run.
pub struct ScenarioCtx {
    pub name: &'static str,
    pub seed: u64,
    pub tol: ToleranceConfig,
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl ScenarioCtx {
    /// An independent random stream for `label` within this scenario.
    pub fn rng(&self, label: &str) -> SeededRng {
        seeded_rng(derive_seed(self.seed, &format!("{}/{label}", self.name)))
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}

#[derive(Clone, Copy)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    builder: fn(&mut ScenarioCtx) -> Result<()>,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario").field("name", &self.name).finish()
    }
}

const REGISTRY: &[Scenario] = &[
    Scenario {
        name: "block_positivity",
        description: "positivity of x + iy agrees with positivity of its real block matrix",
        builder: structure::block_positivity,
    },
    Scenario {
        name: "brord_suite",
        description: "domination, splitting and generating-cone constructions in unital algebras",
        builder: positivity::brord_suite,
    },
    Scenario {
        name: "commutative_target",
        description: "real positive maps into a commutative algebra attain their norm at 1",
        builder: mappings::commutative_target,
    },
    Scenario {
        name: "expoly",
        description: "a unital isometry on linear polynomials with no selfadjoint extension",
        builder: mappings::expoly,
    },
    Scenario {
        name: "extension_suite",
        description: "positive extensions of functionals and completely positive extensions of maps",
        builder: mappings::extension_suite,
    },
    Scenario {
        name: "f_transform_range",
        description: "the F-transform maps the real positive cone into half of F, with the limit property",
        builder: positivity::f_transform_range,
    },
    Scenario {
        name: "functional_states",
        description: "real positive functionals are nonnegative multiples of states",
        builder: positivity::functional_states,
    },
    Scenario {
        name: "meyer_invariance",
        description: "the unitization norm does not depend on the representation",
        builder: structure::meyer_invariance,
    },
    Scenario {
        name: "minus3_functional",
        description: "positive functionals on M_2 that are not real positive",
        builder: positivity::minus3_functional,
    },
    Scenario {
        name: "schwarz",
        description: "Schwarz inequality for unital 2-positive maps",
        builder: mappings::schwarz,
    },
    Scenario {
        name: "spin_hilbert",
        description: "spans of spin systems are isometric to Hilbert space",
        builder: structure::spin_hilbert,
    },
    Scenario {
        name: "srp_equiv",
        description: "systematic real positivity versus positivity plus selfadjointness",
        builder: mappings::srp_equiv,
    },
    Scenario {
        name: "stinespring_roundtrip",
        description: "Kraus and Stinespring forms reproduce random completely positive maps",
        builder: mappings::stinespring_roundtrip,
    },
    Scenario {
        name: "theta_T",
        description: "positive unital selfadjoint maps of arbitrarily large norm that are not 2-positive",
        builder: mappings::theta_t,
    },
    Scenario {
        name: "transpose_not_cp",
        description: "the transpose on M_2 is a contractive Jordan map that is not completely positive",
        builder: mappings::transpose_not_cp,
    },
    Scenario {
        name: "triangle_eq3",
        description: "closed form for the norm of triangular 2x2 operator matrices",
        builder: structure::triangle_eq3,
    },
    Scenario {
        name: "unitization_formula",
        description: "unitization norm of an algebra with an internal identity",
        builder: structure::unitization_formula,
    },
];

/// All scenarios, sorted by name.
pub fn list() -> &'static [Scenario] {
    REGISTRY
}

pub fn find(name: &str) -> Result<&'static Scenario> {
    REGISTRY
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

/// Runs one scenario. Errors raised inside a scenario become a failed check
/// so that a verdict is always produced.
pub fn run(name: &str, seed: u64, tol: &ToleranceConfig) -> Result<Verdict> {
    tol.validate()?;
    let scenario = find(name)?;
    let mut ctx = ScenarioCtx {
        name: scenario.name,
        seed,
        tol: *tol,
        checks: Vec::new(),
        notes: Vec::new(),
    };
    if let Err(e) = (scenario.builder)(&mut ctx) {
        let failed = Check::holds("completed", "scenario runs to completion", false, true).detail(e.to_string());
        ctx.checks.push(failed);
    }
    let overall = ctx.checks.iter().all(|c| c.status != Status::Fail);
    Ok(Verdict {
        scenario: scenario.name.to_string(),
        description: scenario.description.to_string(),
        seed,
        tol: *tol,
        notes: ctx.notes,
        checks: ctx.checks,
        overall,
    })
}

/// Runs every scenario; verdicts are sorted by scenario name.
pub fn run_all(seed: u64, tol: &ToleranceConfig) -> Result<Vec<Verdict>> {
    let mut out = REGISTRY
        .iter()
        .map(|s| run(s.name, seed, tol))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.scenario.cmp(&b.scenario));
    Ok(out)
}
