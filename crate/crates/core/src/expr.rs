//! Attribute value expressions: `rand:` choices and ranges, `%` units and
//! `@list` references.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::color::ColorValue;
use crate::registry::fold;

/// What a percentage is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    /// The smaller screen extent.
    Scalar,
    /// A fraction of the region's own size.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Int(Axis),
    Real(Axis),
    Color,
    /// Free text or a resource name; never percent.
    Text,
}

impl ValueKind {
    pub fn is_numeric(self) -> bool {
        matches!(self, ValueKind::Int(_) | ValueKind::Real(_))
    }

    fn axis(self) -> Axis {
        match self {
            ValueKind::Int(a) | ValueKind::Real(a) => a,
            _ => Axis::Scalar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueExpr {
    Literal { value: String },
    RandomChoice { alternatives: Vec<String> },
    RandomRange { lo: f64, hi: f64 },
    ListRef { list: String },
    Percent { fraction: f64, axis: Axis },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("empty value")]
    Empty,
    #[error("`rand:` needs at least two alternatives in `{0}`")]
    TooFewAlternatives(String),
    #[error("random range `{0}` has lower bound above upper bound")]
    InvertedRange(String),
    #[error("`{0}` is not a number")]
    NotNumeric(String),
    #[error("`%` needs a non-negative number, got `{0}`")]
    BadPercent(String),
    #[error("`{0}` is not a color")]
    NotColor(String),
    #[error("empty list name after `@`")]
    EmptyListName,
}

fn parse_number(s: &str) -> Option<f64> {
    let v: f64 = s.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

fn check_scalar(s: &str, kind: ValueKind) -> Result<(), ExprError> {
    match kind {
        ValueKind::Int(_) | ValueKind::Real(_) => {
            let t = s.trim();
            if let Some(body) = t.strip_suffix('%') {
                match parse_number(body) {
                    Some(v) if v >= 0.0 => Ok(()),
                    _ => Err(ExprError::BadPercent(s.to_string())),
                }
            } else if parse_number(t).is_some() {
                Ok(())
            } else {
                Err(ExprError::NotNumeric(s.to_string()))
            }
        }
        ValueKind::Color => s.parse::<ColorValue>().map(|_| ()).map_err(|_| ExprError::NotColor(s.to_string())),
        ValueKind::Text => Ok(()),
    }
}

/// Parses one attribute value.
pub fn parse_value_expr(raw: &str, kind: ValueKind) -> Result<ValueExpr, ExprError> {
    let t = if kind == ValueKind::Text { raw } else { raw.trim() };
    if t.trim().is_empty() && kind != ValueKind::Text {
        return Err(ExprError::Empty);
    }
    let head = t.trim_start();
    if head.len() >= 5 && head[..5].eq_ignore_ascii_case("rand:") {
        let tails: Vec<&str> = head[5..].split(':').collect();
        if tails.len() < 2 || tails.iter().any(|s| s.trim().is_empty()) {
            return Err(ExprError::TooFewAlternatives(raw.to_string()));
        }
        if kind.is_numeric() && tails.len() == 2 {
            if let (Some(lo), Some(hi)) = (parse_number(tails[0]), parse_number(tails[1])) {
                if lo > hi {
                    return Err(ExprError::InvertedRange(raw.to_string()));
                }
                return Ok(ValueExpr::RandomRange { lo, hi });
            }
        }
        for alt in &tails {
            check_scalar(alt, kind)?;
        }
        return Ok(ValueExpr::RandomChoice { alternatives: tails.iter().map(|s| s.trim().to_string()).collect() });
    }
    if let Some(list) = head.strip_prefix('@') {
        let list = list.trim();
        if list.is_empty() {
            return Err(ExprError::EmptyListName);
        }
        return Ok(ValueExpr::ListRef { list: fold(list) });
    }
    if kind.is_numeric() {
        if let Some(body) = t.strip_suffix('%') {
            return match parse_number(body) {
                Some(v) if v >= 0.0 => Ok(ValueExpr::Percent { fraction: v / 100.0, axis: kind.axis() }),
                _ => Err(ExprError::BadPercent(raw.to_string())),
            };
        }
    }
    check_scalar(t, kind)?;
    Ok(ValueExpr::Literal { value: t.to_string() })
}

/// A concrete attribute value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Resolved {
    Number(f64),
    Text(String),
}

impl Resolved {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Resolved::Number(v) => Some(*v),
            Resolved::Text(s) => parse_number(s),
        }
    }

    pub fn as_text(&self) -> String {
        match self {
            Resolved::Number(v) => format!("{v}"),
            Resolved::Text(s) => s.clone(),
        }
    }
}

/// Everything a value needs to become concrete.
pub struct MaterializeCtx<'a> {
    pub rng: Option<&'a mut ChaCha8Rng>,
    pub screen: (f64, f64),
    /// Size of the region the value belongs to, for relative percentages.
    pub region_size: (f64, f64),
    pub list_value: &'a dyn Fn(&str) -> Option<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaterializeError {
    #[error("random expression evaluated without a generator")]
    NoRng,
    #[error("unknown list `{0}`")]
    UnknownList(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn resolve_percent(fraction: f64, axis: Axis, ctx: &MaterializeCtx<'_>) -> f64 {
    match axis {
        Axis::X => fraction * ctx.screen.0,
        Axis::Y => fraction * ctx.screen.1,
        Axis::Scalar => fraction * ctx.screen.0.min(ctx.screen.1),
        Axis::Relative => fraction,
    }
}

fn resolve_scalar(s: &str, kind: ValueKind, ctx: &MaterializeCtx<'_>) -> Result<Resolved, MaterializeError> {
    match parse_value_expr(s, kind)? {
        ValueExpr::Percent { fraction, axis } => Ok(Resolved::Number(resolve_percent(fraction, axis, ctx))),
        ValueExpr::Literal { value } if kind.is_numeric() => {
            Ok(Resolved::Number(parse_number(&value).ok_or(ExprError::NotNumeric(value))?))
        }
        ValueExpr::Literal { value } => Ok(Resolved::Text(value)),
        _ => Ok(Resolved::Text(s.to_string())),
    }
}

/// Evaluates an expression. Random variants consume the generator; list
/// references read the list's current value.
pub fn materialize(expr: &ValueExpr, kind: ValueKind, ctx: &mut MaterializeCtx<'_>) -> Result<Resolved, MaterializeError> {
    match expr {
        ValueExpr::Literal { value } => {
            if kind.is_numeric() {
                Ok(Resolved::Number(parse_number(value).ok_or_else(|| ExprError::NotNumeric(value.clone()))?))
            } else {
                Ok(Resolved::Text(value.clone()))
            }
        }
        ValueExpr::Percent { fraction, axis } => Ok(Resolved::Number(resolve_percent(*fraction, *axis, ctx))),
        ValueExpr::RandomRange { lo, hi } => {
            let rng = ctx.rng.as_deref_mut().ok_or(MaterializeError::NoRng)?;
            let v = match kind {
                ValueKind::Int(_) => {
                    let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
                    if a > b {
                        *lo
                    } else {
                        rng.random_range(a..=b) as f64
                    }
                }
                _ if lo == hi => *lo,
                _ => rng.random_range(*lo..*hi),
            };
            Ok(Resolved::Number(v))
        }
        ValueExpr::RandomChoice { alternatives } => {
            let rng = ctx.rng.as_deref_mut().ok_or(MaterializeError::NoRng)?;
            let pick = &alternatives[rng.random_range(0..alternatives.len())];
            resolve_scalar(pick, kind, ctx)
        }
        ValueExpr::ListRef { list } => {
            let value = (ctx.list_value)(list).ok_or_else(|| MaterializeError::UnknownList(list.clone()))?;
            resolve_scalar(&value, kind, ctx)
        }
    }
}

impl ValueExpr {
    pub fn is_random(&self) -> bool {
        matches!(self, ValueExpr::RandomChoice { .. } | ValueExpr::RandomRange { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn no_lists(_: &str) -> Option<String> {
        None
    }

    fn ctx<'a>(rng: Option<&'a mut ChaCha8Rng>) -> MaterializeCtx<'a> {
        MaterializeCtx { rng, screen: (1024.0, 768.0), region_size: (200.0, 100.0), list_value: &no_lists }
    }

    #[test]
    fn rainbow_choice() {
        let e = parse_value_expr("rand:Red:Orange:Yellow:Green:Blue:Indigo:Violet", ValueKind::Color).unwrap();
        match e {
            ValueExpr::RandomChoice { alternatives } => assert_eq!(alternatives.len(), 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn numeric_range() {
        assert_eq!(
            parse_value_expr("rand:200:400", ValueKind::Int(Axis::X)).unwrap(),
            ValueExpr::RandomRange { lo: 200.0, hi: 400.0 }
        );
        assert!(matches!(
            parse_value_expr("rand:400:200", ValueKind::Int(Axis::X)),
            Err(ExprError::InvertedRange(_))
        ));
    }

    #[test]
    fn percent_of_width() {
        let e = parse_value_expr("30%", ValueKind::Int(Axis::X)).unwrap();
        assert_eq!(e, ValueExpr::Percent { fraction: 0.30, axis: Axis::X });
        let v = materialize(&e, ValueKind::Int(Axis::X), &mut ctx(None)).unwrap();
        assert!((v.as_f64().unwrap() - 307.2).abs() < 1e-9);
    }

    #[test]
    fn scalar_percent_uses_smaller_extent() {
        let e = parse_value_expr("10%", ValueKind::Real(Axis::Scalar)).unwrap();
        let v = materialize(&e, ValueKind::Real(Axis::Scalar), &mut ctx(None)).unwrap();
        assert!((v.as_f64().unwrap() - 76.8).abs() < 1e-9);
    }

    #[test]
    fn literal_number() {
        let e = parse_value_expr("200", ValueKind::Int(Axis::X)).unwrap();
        assert_eq!(materialize(&e, ValueKind::Int(Axis::X), &mut ctx(None)).unwrap(), Resolved::Number(200.0));
    }

    #[test]
    fn list_reference_folds_name() {
        assert_eq!(parse_value_expr("@Imgs", ValueKind::Text).unwrap(), ValueExpr::ListRef { list: "imgs".into() });
        assert_eq!(parse_value_expr("@", ValueKind::Text), Err(ExprError::EmptyListName));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_value_expr("rand:Red", ValueKind::Color), Err(ExprError::TooFewAlternatives(_))));
        assert!(matches!(parse_value_expr("abc%", ValueKind::Int(Axis::X)), Err(ExprError::BadPercent(_))));
        assert!(matches!(parse_value_expr("-5%", ValueKind::Int(Axis::X)), Err(ExprError::BadPercent(_))));
        assert!(matches!(parse_value_expr("wide", ValueKind::Int(Axis::X)), Err(ExprError::NotNumeric(_))));
        assert!(matches!(parse_value_expr("Reddish", ValueKind::Color), Err(ExprError::NotColor(_))));
    }

    #[test]
    fn text_is_verbatim() {
        assert_eq!(
            parse_value_expr("  50% off ", ValueKind::Text).unwrap(),
            ValueExpr::Literal { value: "  50% off ".into() }
        );
    }

    #[test]
    fn range_is_seed_stable_and_inclusive() {
        let e = ValueExpr::RandomRange { lo: 200.0, hi: 400.0 };
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            materialize(&e, ValueKind::Int(Axis::X), &mut ctx(Some(&mut rng))).unwrap().as_f64().unwrap()
        };
        for seed in 0..50 {
            let v = draw(seed);
            assert_eq!(v, draw(seed));
            assert!((200.0..=400.0).contains(&v) && v.fract() == 0.0);
        }
    }
}
