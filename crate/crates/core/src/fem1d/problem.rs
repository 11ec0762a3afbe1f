use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{
    check_homogeneity_with, ExprError, Expression, HomogeneityDecl, HomogeneityReport, Parity,
};

/// Most free parameters an expression may reference.
pub const MAX_PARAMETERS: usize = 6;

/// Problem as written by a user: every field is expression text.
///
/// Missing `q`, `g` and linearizations of `q`, `g` default to `0`; `p` to `1`;
/// `f` to `p*s`; gradient linearizations to `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDefinition {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fprime0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qprime0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gprime0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fprime_inf: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qprime_inf: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gprime_inf: Option<String>,
    #[serde(default)]
    pub principal_inf: PrincipalDefinitions,
    #[serde(default)]
    pub principal_zero: PrincipalDefinitions,
    #[serde(default)]
    pub resonant_at_zero: bool,
    #[serde(default)]
    pub resonant_at_infinity: bool,
    /// 1-based index of the resonant mode at zero.
    #[serde(default = "first_mode")]
    pub resonance_mode_zero: usize,
    #[serde(default = "first_mode")]
    pub resonance_mode_inf: usize,
    /// Lower bound constant in `g(x,t) t >= -δ t²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Named constants usable in every expression.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning: Option<TuningDefinition>,
}

fn first_mode() -> usize {
    1
}

impl Default for ProblemDefinition {
    fn default() -> Self {
        ProblemDefinition {
            p: None,
            f: None,
            q: None,
            g: None,
            fprime0: None,
            qprime0: None,
            gprime0: None,
            fprime_inf: None,
            qprime_inf: None,
            gprime_inf: None,
            principal_inf: PrincipalDefinitions::default(),
            principal_zero: PrincipalDefinitions::default(),
            resonant_at_zero: false,
            resonant_at_infinity: false,
            resonance_mode_zero: 1,
            resonance_mode_inf: 1,
            delta: None,
            parameters: BTreeMap::new(),
            tuning: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrincipalDefinitions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<PrincipalDefinition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<PrincipalDefinition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<PrincipalDefinition>,
}

impl PrincipalDefinitions {
    pub fn is_empty(&self) -> bool {
        self.f.is_none() && self.q.is_none() && self.g.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrincipalDefinition {
    pub expr: String,
    pub order: f64,
    pub parity: Parity,
}

impl PrincipalDefinition {
    pub fn new(expr: &str, order: f64, parity: Parity) -> Self {
        PrincipalDefinition {
            expr: expr.to_string(),
            order,
            parity,
        }
    }
}

/// A parameter to be adjusted until the zero-side linearization resonates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningDefinition {
    pub parameter: String,
    pub range: [f64; 2],
}

/// A problem field failed to compile; `pointer` locates it in the definition.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pointer}: {msg}")]
pub struct SpecError {
    pub pointer: String,
    pub msg: String,
}

impl SpecError {
    fn new(pointer: impl Into<String>, msg: impl Into<String>) -> Self {
        SpecError {
            pointer: pointer.into(),
            msg: msg.into(),
        }
    }

    fn expr(pointer: &str, e: ExprError) -> Self {
        SpecError::new(pointer, e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    F,
    Q,
    G,
}

impl Term {
    pub fn name(self) -> &'static str {
        match self {
            Term::F => "f",
            Term::Q => "q",
            Term::G => "g",
        }
    }
}

/// A homogeneous principal part with its validation.
#[derive(Debug, Clone)]
pub struct Principal {
    pub term: Term,
    pub expr: Expression,
    pub decl: HomogeneityDecl,
    pub check: HomogeneityReport,
}

/// Principal parts on one side, sharing one order.
#[derive(Debug, Clone, Default)]
pub struct PrincipalParts {
    pub parts: Vec<Principal>,
}

impl PrincipalParts {
    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn get(&self, term: Term) -> Option<&Principal> {
        self.parts.iter().find(|p| p.term == term)
    }

    pub fn order(&self) -> Option<f64> {
        self.parts.first().map(|p| p.decl.order)
    }

    /// Odd or even when every part agrees, otherwise `None`.
    pub fn parity(&self) -> Parity {
        let mut it = self.parts.iter().map(|p| p.decl.parity);
        match it.next() {
            None => Parity::None,
            Some(first) => {
                if it.all(|p| p == first) {
                    first
                } else {
                    Parity::None
                }
            }
        }
    }
}

/// Which linearization a pencil represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Linearization {
    Zero,
    Infinity,
}

/// The three weak-form integrands `f(x,s)`, `q(x,t)`, `g(x,t)` with bound
/// parameter values; absent terms contribute nothing.
#[derive(Debug, Clone)]
pub struct Integrands {
    pub f: Option<Expression>,
    pub q: Option<Expression>,
    pub g: Option<Expression>,
    pub values: Vec<f64>,
}

/// Compiled problem on `(0, 1)` with homogeneous Dirichlet conditions.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub definition: ProblemDefinition,
    parameters: Vec<String>,
    values: Vec<f64>,
    pub p: Expression,
    pub f: Expression,
    pub q: Expression,
    pub g: Expression,
    pub fprime0: Expression,
    pub qprime0: Expression,
    pub gprime0: Expression,
    pub fprime_inf: Expression,
    pub qprime_inf: Expression,
    pub gprime_inf: Expression,
    pub principal_inf: PrincipalParts,
    pub principal_zero: PrincipalParts,
}

fn vars<'a>(first: &[&'a str], params: &'a [String]) -> Vec<&'a str> {
    let mut v: Vec<&str> = first.to_vec();
    v.extend(params.iter().map(String::as_str));
    v
}

impl ProblemSpec {
    pub fn compile(def: &ProblemDefinition) -> Result<ProblemSpec, SpecError> {
        if def.parameters.len() > MAX_PARAMETERS {
            return Err(SpecError::new(
                "/problem/parameters",
                format!("at most {MAX_PARAMETERS} parameters are supported"),
            ));
        }
        for name in def.parameters.keys() {
            let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok || ["x", "t", "s", "pi", "e"].contains(&name.as_str()) {
                return Err(SpecError::new(
                    format!("/problem/parameters/{name}"),
                    "parameter names must be identifiers other than x, t, s, pi, e",
                ));
            }
        }
        if let Some(tuning) = &def.tuning {
            if !def.parameters.contains_key(&tuning.parameter) {
                return Err(SpecError::new(
                    "/problem/tuning/parameter",
                    format!("`{}` is not a declared parameter", tuning.parameter),
                ));
            }
            let [lo, hi] = tuning.range;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SpecError::new("/problem/tuning/range", "range must be [lo, hi] with lo < hi"));
            }
        }
        if def.resonance_mode_zero == 0 || def.resonance_mode_inf == 0 {
            return Err(SpecError::new("/problem", "resonance modes are numbered from 1"));
        }
        if let Some(d) = def.delta {
            if !(d.is_finite() && d > 0.0) {
                return Err(SpecError::new("/problem/delta", "delta must be positive"));
            }
        }

        let parameters: Vec<String> = def.parameters.keys().cloned().collect();
        let values: Vec<f64> = def.parameters.values().copied().collect();
        let coef_vars = vars(&["x"], &parameters);
        let s_vars = vars(&["x", "s"], &parameters);
        let t_vars = vars(&["x", "t"], &parameters);

        let parse = |field: &str, text: Option<&String>, default: &str, vs: &[&str]| {
            let text = text.map(String::as_str).unwrap_or(default);
            Expression::parse(text, vs).map_err(|e| SpecError::expr(&format!("/problem/{field}"), e))
        };

        let p = parse("p", def.p.as_ref(), "1", &coef_vars)?;
        let p_text = def.p.clone().unwrap_or_else(|| "1".into());
        let f = match &def.f {
            Some(text) => Expression::parse(text, &s_vars).map_err(|e| SpecError::expr("/problem/f", e))?,
            None => Expression::parse(&format!("({p_text})*s"), &s_vars)
                .map_err(|e| SpecError::expr("/problem/p", e))?,
        };
        let q = parse("q", def.q.as_ref(), "0", &t_vars)?;
        let g = parse("g", def.g.as_ref(), "0", &t_vars)?;
        let fprime0 = parse("fprime0", def.fprime0.as_ref(), &p_text, &coef_vars)?;
        let qprime0 = parse("qprime0", def.qprime0.as_ref(), "0", &coef_vars)?;
        let gprime0 = parse("gprime0", def.gprime0.as_ref(), "0", &coef_vars)?;
        let fprime_inf = parse("fprime_inf", def.fprime_inf.as_ref(), &p_text, &coef_vars)?;
        let qprime_inf = parse("qprime_inf", def.qprime_inf.as_ref(), "0", &coef_vars)?;
        let gprime_inf = parse("gprime_inf", def.gprime_inf.as_ref(), "0", &coef_vars)?;

        let fixed: Vec<(&str, f64)> = parameters.iter().map(String::as_str).zip(values.iter().copied()).collect();
        let principal = |side: &str, defs: &PrincipalDefinitions, zero: bool| -> Result<PrincipalParts, SpecError> {
            let mut parts = Vec::new();
            for (term, d) in [(Term::F, &defs.f), (Term::Q, &defs.q), (Term::G, &defs.g)] {
                let Some(d) = d else { continue };
                let ptr = format!("/problem/{side}/{}", term.name());
                if zero && term == Term::F {
                    return Err(SpecError::new(ptr, "the gradient term has no zero-side principal part"));
                }
                let in_range = if zero {
                    d.order > 1.0
                } else {
                    (0.0..1.0).contains(&d.order)
                };
                if !d.order.is_finite() || !in_range {
                    let want = if zero { "greater than 1" } else { "in [0, 1)" };
                    return Err(SpecError::new(format!("{ptr}/order"), format!("order must be {want}")));
                }
                let variable = if term == Term::F { "s" } else { "t" };
                let vs = if term == Term::F { &s_vars } else { &t_vars };
                let expr = Expression::parse(&d.expr, vs).map_err(|e| SpecError::expr(&format!("{ptr}/expr"), e))?;
                let decl = HomogeneityDecl {
                    order: d.order,
                    parity: d.parity,
                    variable: variable.into(),
                };
                let check = check_homogeneity_with(&expr, &decl, 256, &fixed);
                if !check.passed {
                    let why = match &check.error {
                        Some(e) => format!("evaluation failed: {e}"),
                        None => format!(
                            "declared homogeneity fails (order violation {:e}, parity violation {:e})",
                            check.max_homogeneity_violation, check.max_parity_violation
                        ),
                    };
                    return Err(SpecError::new(ptr, why));
                }
                parts.push(Principal { term, expr, decl, check });
            }
            if let Some(first) = parts.first() {
                if parts.iter().any(|p| p.decl.order != first.decl.order) {
                    return Err(SpecError::new(format!("/problem/{side}"), "principal parts must share one order"));
                }
            }
            Ok(PrincipalParts { parts })
        };
        let principal_inf = principal("principal_inf", &def.principal_inf, false)?;
        let principal_zero = principal("principal_zero", &def.principal_zero, true)?;

        Ok(ProblemSpec {
            definition: def.clone(),
            parameters,
            values,
            p,
            f,
            q,
            g,
            fprime0,
            qprime0,
            gprime0,
            fprime_inf,
            qprime_inf,
            gprime_inf,
            principal_inf,
            principal_zero,
        })
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().position(|p| p == name).map(|i| self.values[i])
    }

    /// Copy with one parameter rebound.
    pub fn with_parameter(&self, name: &str, value: f64) -> Option<ProblemSpec> {
        let i = self.parameters.iter().position(|p| p == name)?;
        let mut out = self.clone();
        out.values[i] = value;
        out.definition.parameters.insert(name.to_string(), value);
        Some(out)
    }

    pub fn parameter_values(&self) -> &[f64] {
        &self.values
    }

    /// Evaluates a coefficient `c(x)`.
    pub fn coefficient(&self, e: &Expression, x: f64) -> Result<f64, ExprError> {
        eval_with(e, &[x], &self.values)
    }

    /// Evaluates a nonlinearity `h(x, t)` (or `f(x, s)`).
    pub fn nonlinearity(&self, e: &Expression, x: f64, t: f64) -> Result<f64, ExprError> {
        eval_with(e, &[x, t], &self.values)
    }

    pub fn full_integrands(&self) -> Integrands {
        Integrands {
            f: Some(self.f.clone()),
            q: Some(self.q.clone()),
            g: Some(self.g.clone()),
            values: self.values.clone(),
        }
    }

    pub fn principal(&self, side: Linearization) -> &PrincipalParts {
        match side {
            Linearization::Zero => &self.principal_zero,
            Linearization::Infinity => &self.principal_inf,
        }
    }

    /// Integrands of the principal parts on one side; `None` if none declared.
    pub fn principal_integrands(&self, side: Linearization) -> Option<Integrands> {
        let parts = self.principal(side);
        if parts.is_empty() {
            return None;
        }
        Some(Integrands {
            f: parts.get(Term::F).map(|p| p.expr.clone()),
            q: parts.get(Term::Q).map(|p| p.expr.clone()),
            g: parts.get(Term::G).map(|p| p.expr.clone()),
            values: self.values.clone(),
        })
    }

    /// `(a, b, c)` of the linearized form `∫ a u′v′ + b u v′ + c u v`.
    pub fn linear_coefficients(&self, side: Linearization) -> [&Expression; 3] {
        match side {
            Linearization::Zero => [&self.fprime0, &self.qprime0, &self.gprime0],
            Linearization::Infinity => [&self.fprime_inf, &self.qprime_inf, &self.gprime_inf],
        }
    }

    pub fn is_resonant(&self, side: Linearization) -> bool {
        match side {
            Linearization::Zero => self.definition.resonant_at_zero,
            Linearization::Infinity => self.definition.resonant_at_infinity,
        }
    }

    pub fn resonance_mode(&self, side: Linearization) -> usize {
        match side {
            Linearization::Zero => self.definition.resonance_mode_zero,
            Linearization::Infinity => self.definition.resonance_mode_inf,
        }
    }

    /// The constant `p` when the problem is `(p u′)′ = g(x, u)` with `q = 0`,
    /// decided on a sample grid.
    pub fn classical_coefficient(&self) -> Option<f64> {
        let p = self.coefficient(&self.p, 0.0).ok()?;
        if !(p.is_finite() && p > 0.0) {
            return None;
        }
        for i in 0..=8 {
            let x = i as f64 / 8.0;
            for s in [-7.0, -1.0, -0.25, 0.0, 0.5, 3.0] {
                let fv = self.nonlinearity(&self.f, x, s).ok()?;
                let qv = self.nonlinearity(&self.q, x, s).ok()?;
                if (fv - p * s).abs() > 1e-14 * (1.0 + (p * s).abs()) || qv != 0.0 {
                    return None;
                }
            }
        }
        Some(p)
    }
}

/// Evaluates with `lead` bound to the first slots and parameters after.
pub(crate) fn eval_with(e: &Expression, lead: &[f64], params: &[f64]) -> Result<f64, ExprError> {
    let mut buf = [0.0; 2 + MAX_PARAMETERS];
    let n = lead.len() + params.len();
    buf[..lead.len()].copy_from_slice(lead);
    buf[lead.len()..n].copy_from_slice(params);
    e.eval(&buf[..n])
}

impl Integrands {
    pub(crate) fn eval(&self, e: &Expression, x: f64, t: f64) -> Result<f64, ExprError> {
        eval_with(e, &[x, t], &self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn def() -> ProblemDefinition {
        ProblemDefinition {
            g: Some("-pi^2*t + sign(t)*abs(t)^0.5".into()),
            gprime_inf: Some("-pi^2".into()),
            principal_inf: PrincipalDefinitions {
                g: Some(PrincipalDefinition::new("sign(t)*abs(t)^0.5", 0.5, Parity::Odd)),
                ..Default::default()
            },
            resonant_at_infinity: true,
            ..Default::default()
        }
    }

    #[test]
    fn defaults_fill_in() {
        let s = ProblemSpec::compile(&def()).unwrap();
        assert_eq!(s.nonlinearity(&s.f, 0.3, 2.0).unwrap(), 2.0);
        assert_eq!(s.nonlinearity(&s.q, 0.3, 2.0).unwrap(), 0.0);
        assert_eq!(s.coefficient(&s.fprime_inf, 0.3).unwrap(), 1.0);
        assert_eq!(s.principal_inf.parity(), Parity::Odd);
        assert_eq!(s.principal_inf.order(), Some(0.5));
        assert_eq!(s.classical_coefficient(), Some(1.0));
    }

    #[test]
    fn expression_errors_carry_a_pointer() {
        let mut d = def();
        d.g = Some("t + * 2".into());
        let e = ProblemSpec::compile(&d).unwrap_err();
        assert_eq!(e.pointer, "/problem/g");
        d.g = Some("u".into());
        assert_eq!(ProblemSpec::compile(&d).unwrap_err().pointer, "/problem/g");
    }

    #[test]
    fn bad_principal_declarations_are_rejected() {
        let mut d = def();
        d.principal_inf.g = Some(PrincipalDefinition::new("abs(t)^0.5", 0.5, Parity::Odd));
        assert_eq!(ProblemSpec::compile(&d).unwrap_err().pointer, "/problem/principal_inf/g");
        d.principal_inf.g = Some(PrincipalDefinition::new("t^3", 3.0, Parity::Odd));
        assert_eq!(ProblemSpec::compile(&d).unwrap_err().pointer, "/problem/principal_inf/g/order");
    }

    #[test]
    fn parameters_bind() {
        let mut d = def();
        d.parameters.insert("a".into(), 2.0);
        d.qprime0 = Some("a*cos(2*pi*x)".into());
        let s = ProblemSpec::compile(&d).unwrap();
        assert_eq!(s.coefficient(&s.qprime0, 0.0).unwrap(), 2.0);
        let s = s.with_parameter("a", 3.0).unwrap();
        assert_eq!(s.coefficient(&s.qprime0, 0.0).unwrap(), 3.0);
        assert!(s.with_parameter("b", 1.0).is_none());
    }

    #[test]
    fn unknown_keys_fail_to_deserialize() {
        let r: Result<ProblemDefinition, _> = serde_json::from_str(r#"{"g": "t", "h": "t"}"#);
        assert!(r.is_err());
    }
}
