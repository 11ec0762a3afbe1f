//! Built-in problems with known verdicts.

use std::collections::BTreeMap;

use crate::expr::Parity;
use crate::fem1d::{PrincipalDefinition, PrincipalDefinitions, ProblemDefinition, TuningDefinition};
use crate::verdicts::TheoremId;

#[derive(Debug, Clone)]
pub struct CatalogProblem {
    pub id: &'static str,
    pub summary: &'static str,
    pub theorem: TheoremId,
    pub definition: ProblemDefinition,
}

fn s(text: &str) -> Option<String> {
    Some(text.to_string())
}

/// Resonant at infinity with an odd square-root principal part and a small forcing.
pub fn landesman_lazer() -> ProblemDefinition {
    ProblemDefinition {
        g: s("-pi^2*t + sign(t)*abs(t)^0.5 + 0.1*sin(2*pi*x)"),
        gprime_inf: s("-pi^2"),
        principal_inf: PrincipalDefinitions {
            g: Some(PrincipalDefinition::new("sign(t)*abs(t)^0.5", 0.5, Parity::Odd)),
            ..Default::default()
        },
        resonant_at_infinity: true,
        ..Default::default()
    }
}

/// Cubic reaction with a forcing in the gradient term.
pub fn coercive() -> ProblemDefinition {
    ProblemDefinition {
        f: s("s + sin(2*pi*x)"),
        g: s("t^3 - 3*t"),
        gprime0: s("-3"),
        delta: Some(3.0),
        ..Default::default()
    }
}

/// Slopes −5 at zero and −15 at infinity.
pub fn parity() -> ProblemDefinition {
    ProblemDefinition {
        g: s("-5*t - 10*t^3/(1+t^2)"),
        gprime0: s("-5"),
        gprime_inf: s("-15"),
        ..Default::default()
    }
}

/// First-mode resonance on both sides: odd cubic at zero, even square root at infinity.
pub fn double_degenerate() -> ProblemDefinition {
    ProblemDefinition {
        g: s("-pi^2*t + t^3/(1+t^4) + t^4/(1+abs(t))^3.5"),
        gprime0: s("-pi^2"),
        gprime_inf: s("-pi^2"),
        principal_zero: PrincipalDefinitions {
            g: Some(PrincipalDefinition::new("t^3", 3.0, Parity::Odd)),
            ..Default::default()
        },
        principal_inf: PrincipalDefinitions {
            g: Some(PrincipalDefinition::new("abs(t)^0.5", 0.5, Parity::Even)),
            ..Default::default()
        },
        resonant_at_zero: true,
        resonant_at_infinity: true,
        ..Default::default()
    }
}

/// Coercive problem whose zero-side resonance enters through the convection
/// coefficient `a cos 2πx`; `a` is tuned.
pub fn coercive_degenerate() -> ProblemDefinition {
    ProblemDefinition {
        q: s("a*cos(2*pi*x)*t/(1+t^2)"),
        g: s("-5*t + t^2/(1+t^2)"),
        qprime0: s("a*cos(2*pi*x)"),
        gprime0: s("-5"),
        gprime_inf: s("-5"),
        principal_zero: PrincipalDefinitions {
            g: Some(PrincipalDefinition::new("t^2", 2.0, Parity::Even)),
            ..Default::default()
        },
        resonant_at_zero: true,
        delta: Some(6.0),
        parameters: BTreeMap::from([("a".to_string(), 0.0)]),
        tuning: Some(TuningDefinition {
            parameter: "a".into(),
            range: [0.0, 30.0],
        }),
        ..Default::default()
    }
}

pub fn problems() -> Vec<CatalogProblem> {
    vec![
        CatalogProblem {
            id: "landesman-lazer",
            summary: "resonance at infinity, odd principal part: solvable",
            theorem: TheoremId::SolvResonant,
            definition: landesman_lazer(),
        },
        CatalogProblem {
            id: "coercive",
            summary: "one-sided bound on g: solvable",
            theorem: TheoremId::SolvCoercive,
            definition: coercive(),
        },
        CatalogProblem {
            id: "parity",
            summary: "negative eigenvalue counts 0 and 1: nontrivial solution",
            theorem: TheoremId::NontrivialParity,
            definition: parity(),
        },
        CatalogProblem {
            id: "double-degenerate",
            summary: "resonance at zero and infinity: nontrivial solution",
            theorem: TheoremId::NontrivialDoubleDegenerate,
            definition: double_degenerate(),
        },
        CatalogProblem {
            id: "coercive-degenerate",
            summary: "coercive with tuned resonance at zero: nontrivial solution",
            theorem: TheoremId::NontrivialCoerciveDegenerateZero,
            definition: coercive_degenerate(),
        },
    ]
}

pub fn find(id: &str) -> Option<CatalogProblem> {
    problems().into_iter().find(|p| p.id == id)
}
