//! Laurent-monomial meromorphic 2-forms of weight `r` and their pullbacks
//! under monomial coordinate changes.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use num_traits::{One, Zero};

use crate::cyclo::{canonical_root, CyclotomicScalar, ScalarError};
use crate::linalg::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("monomial map has zero determinant")]
    DegenerateMap,
    #[error("weight must be positive, got {0}")]
    BadWeight(i64),
    #[error("map targets ({map_u}, {map_v}) do not match form variables ({form_u}, {form_v})")]
    VariableMismatch {
        form_u: String,
        form_v: String,
        map_u: String,
        map_v: String,
    },
    #[error("exponent arithmetic overflowed")]
    Overflow,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

fn add(a: i64, b: i64) -> Result<i64, FormError> {
    a.checked_add(b).ok_or(FormError::Overflow)
}

fn mul(a: i64, b: i64) -> Result<i64, FormError> {
    a.checked_mul(b).ok_or(FormError::Overflow)
}

/// `c · u^a v^b (du ∧ dv)^r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialTwoForm {
    pub coeff: CyclotomicScalar,
    pub a: i64,
    pub b: i64,
    pub r: i64,
    pub vars: [String; 2],
}

impl MonomialTwoForm {
    pub fn new(
        coeff: CyclotomicScalar,
        a: i64,
        b: i64,
        r: i64,
        u: impl Into<String>,
        v: impl Into<String>,
    ) -> Result<Self, FormError> {
        if r < 1 {
            return Err(FormError::BadWeight(r));
        }
        Ok(Self {
            coeff,
            a,
            b,
            r,
            vars: [u.into(), v.into()],
        })
    }

    /// Unit coefficient shorthand.
    pub fn monomial(a: i64, b: i64, r: i64, u: &str, v: &str) -> Result<Self, FormError> {
        Self::new(CyclotomicScalar::one(), a, b, r, u, v)
    }

    /// The same form written against `dv ∧ du`: swapping the wedge costs `(-1)^r`.
    pub fn swapped(&self) -> Self {
        Self {
            coeff: &self.coeff * &CyclotomicScalar::sign_power(self.r),
            a: self.b,
            b: self.a,
            r: self.r,
            vars: [self.vars[1].clone(), self.vars[0].clone()],
        }
    }

    /// Rewrites the form with `(first, second)` as its variable order, if those
    /// are its variables.
    pub fn in_order(&self, first: &str, second: &str) -> Option<Self> {
        if self.vars[0] == first && self.vars[1] == second {
            Some(self.clone())
        } else if self.vars[0] == second && self.vars[1] == first {
            Some(self.swapped())
        } else {
            None
        }
    }

    /// Equality as forms, independent of the order the variables are listed in.
    pub fn same_form(&self, other: &Self) -> bool {
        other
            .in_order(&self.vars[0], &self.vars[1])
            .is_some_and(|o| o == *self)
    }
}

impl fmt::Display for MonomialTwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [u, v] = &self.vars;
        write!(
            f,
            "{} {u}^{} {v}^{} (d{u}∧d{v})^{}",
            self.coeff, self.a, self.b, self.r
        )
    }
}

/// Monomial coordinate change from source `(x, y)` to target `(u, v)`:
/// `u = c₁ x^α y^β`, `v = c₂ x^γ y^δ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialMap {
    pub source: [String; 2],
    pub target: [String; 2],
    /// `[[α, β], [γ, δ]]`: row `i` holds the exponents of target `i`.
    pub exponents: [[i64; 2]; 2],
    pub constants: [CyclotomicScalar; 2],
}

impl MonomialMap {
    pub fn new(
        source: [&str; 2],
        target: [&str; 2],
        exponents: [[i64; 2]; 2],
        constants: [CyclotomicScalar; 2],
    ) -> Result<Self, FormError> {
        let map = Self {
            source: source.map(String::from),
            target: target.map(String::from),
            exponents,
            constants,
        };
        if map.determinant()? == 0 {
            return Err(FormError::DegenerateMap);
        }
        Ok(map)
    }

    /// Identity on `(x, y)`.
    pub fn identity(x: &str, y: &str) -> Self {
        Self {
            source: [x.into(), y.into()],
            target: [x.into(), y.into()],
            exponents: [[1, 0], [0, 1]],
            constants: [CyclotomicScalar::one(), CyclotomicScalar::one()],
        }
    }

    /// `αδ − βγ`.
    pub fn determinant(&self) -> Result<i64, FormError> {
        let [[al, be], [ga, de]] = self.exponents;
        mul(al, de)?
            .checked_sub(mul(be, ga)?)
            .ok_or(FormError::Overflow)
    }

    /// `self ∘ inner`: first `inner` (from its source into `self`'s source),
    /// then `self`.
    pub fn compose(&self, inner: &MonomialMap) -> Result<MonomialMap, FormError> {
        if inner.target != self.source {
            return Err(FormError::VariableMismatch {
                form_u: self.source[0].clone(),
                form_v: self.source[1].clone(),
                map_u: inner.target[0].clone(),
                map_v: inner.target[1].clone(),
            });
        }
        let outer = &self.exponents;
        let inn = &inner.exponents;
        let mut exponents = [[0i64; 2]; 2];
        let mut constants = [CyclotomicScalar::one(), CyclotomicScalar::one()];
        for row in 0..2 {
            for col in 0..2 {
                exponents[row][col] = add(
                    mul(outer[row][0], inn[0][col])?,
                    mul(outer[row][1], inn[1][col])?,
                )?;
            }
            constants[row] = &(&self.constants[row] * &inner.constants[0].pow(outer[row][0]))
                * &inner.constants[1].pow(outer[row][1]);
        }
        Ok(MonomialMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            exponents,
            constants,
        })
    }
}

/// A pulled-back form whose coefficient is kept as an unevaluated product
/// `∏ base^exponent`. Useful when the Jacobian power `d^r` is too large to
/// expand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredForm {
    pub factors: Vec<(CyclotomicScalar, i64)>,
    pub a: i64,
    pub b: i64,
    pub r: i64,
    pub vars: [String; 2],
}

impl FactoredForm {
    pub fn evaluate(&self) -> Result<MonomialTwoForm, FormError> {
        let coeff = self
            .factors
            .iter()
            .fold(CyclotomicScalar::one(), |acc, (c, e)| &acc * &c.pow(*e));
        let [u, v] = self.vars.clone();
        MonomialTwoForm::new(coeff, self.a, self.b, self.r, u, v)
    }

    /// Splits the coefficient into a root of unity and a product of powers
    /// of rationals greater than 1, merged by base. Never expands a power of a
    /// non-unit magnitude.
    fn normalized(&self) -> (Rational, Vec<(Rational, i64)>) {
        let mut phase = Rational::zero();
        let mut powers: Vec<(Rational, i64)> = Vec::new();
        for (c, e) in &self.factors {
            phase += c.phase() * Rational::from_integer((*e).into());
            let m = c.magnitude();
            if m.is_one() || *e == 0 {
                continue;
            }
            let (base, e) = if *m > Rational::one() {
                (m.clone(), *e)
            } else {
                (m.recip(), -*e)
            };
            match powers.iter_mut().find(|(b, _)| *b == base) {
                Some((_, acc)) => *acc += e,
                None => powers.push((base, e)),
            }
        }
        powers.retain(|(_, e)| *e != 0);
        powers.sort();
        let frac = &phase - phase.floor();
        (frac, powers)
    }

    /// Sufficient test for equality with `expected`: same monomial and the
    /// same normalized power product.
    pub fn formally_equals(&self, expected: &FactoredForm) -> bool {
        self.a == expected.a
            && self.b == expected.b
            && self.r == expected.r
            && self.vars == expected.vars
            && self.normalized() == expected.normalized()
    }
}

/// Pulls `form` back along `map`, leaving the coefficient factored.
///
/// With `u = c₁ x^α y^β`, `v = c₂ x^γ y^δ` and `d = αδ − βγ`,
/// `du ∧ dv = c₁ c₂ d · x^{α+γ−1} y^{β+δ−1} dx ∧ dy`, so
/// `c u^a v^b (du∧dv)^r` becomes
/// `c c₁^{a+r} c₂^{b+r} d^r · x^{aα+bγ+r(α+γ−1)} y^{aβ+bδ+r(β+δ−1)} (dx∧dy)^r`.
pub fn pullback_factored(
    form: &MonomialTwoForm,
    map: &MonomialMap,
) -> Result<FactoredForm, FormError> {
    let d = map.determinant()?;
    if d == 0 {
        return Err(FormError::DegenerateMap);
    }
    let form = form
        .in_order(&map.target[0], &map.target[1])
        .ok_or_else(|| FormError::VariableMismatch {
            form_u: form.vars[0].clone(),
            form_v: form.vars[1].clone(),
            map_u: map.target[0].clone(),
            map_v: map.target[1].clone(),
        })?;
    let [[al, be], [ga, de]] = map.exponents;
    let (a, b, r) = (form.a, form.b, form.r);
    let x_exp = add(
        add(mul(a, al)?, mul(b, ga)?)?,
        mul(r, add(add(al, ga)?, -1)?)?,
    )?;
    let y_exp = add(
        add(mul(a, be)?, mul(b, de)?)?,
        mul(r, add(add(be, de)?, -1)?)?,
    )?;
    Ok(FactoredForm {
        factors: vec![
            (form.coeff, 1),
            (map.constants[0].clone(), add(a, r)?),
            (map.constants[1].clone(), add(b, r)?),
            (CyclotomicScalar::from_integer(d)?, r),
        ],
        a: x_exp,
        b: y_exp,
        r,
        vars: map.source.clone(),
    })
}

/// Pulls `form` back along `map`; see [`pullback_factored`] for the formula.
pub fn pullback(form: &MonomialTwoForm, map: &MonomialMap) -> Result<MonomialTwoForm, FormError> {
    pullback_factored(form, map)?.evaluate()
}

/// Chart change on a line bundle of degree `n` over ℙ¹, from chart 1
/// `(f1, q1)` to chart 2: `q2 = q1^{-1}`, `f2 = q1^n f1`.
pub fn p1_transition(n: i64) -> MonomialMap {
    MonomialMap {
        source: ["f1".into(), "q1".into()],
        target: ["f2".into(), "q2".into()],
        exponents: [[1, n], [0, -1]],
        constants: [CyclotomicScalar::one(), CyclotomicScalar::one()],
    }
}

/// Pulls `f2^{-r} q2^{m2} (df2∧dq2)^r` back to chart 1 and checks it equals
/// `(-1)^r f1^{-r} q1^{m1} (df1∧dq1)^r`.
pub fn verify_p1_transition(n: i64, m1: i64, m2: i64, r: i64) -> Result<bool, FormError> {
    if r < 1 {
        return Err(FormError::BadWeight(r));
    }
    if m1.checked_add(m2) != r.checked_mul(-2) {
        return Err(FormError::PreconditionViolated(format!(
            "m1 + m2 = {m1} + {m2} must equal -2r = {}",
            -2 * r
        )));
    }
    let chart2 = MonomialTwoForm::monomial(-r, m2, r, "f2", "q2")?;
    let pulled = pullback(&chart2, &p1_transition(n))?;
    let expected = MonomialTwoForm::new(CyclotomicScalar::sign_power(r), -r, m1, r, "f1", "q1")?;
    Ok(pulled.same_form(&expected))
}

/// For odd `r`, the rescaling `q1 = ν·u1` with `ν^{m1+r} = (-1)^r` that removes
/// the `(-1)^r` in chart 1. For even `r` no rescaling is needed and this is
/// `None`.
pub fn p1_sign_correction(m1: i64, r: i64) -> Result<Option<CyclotomicScalar>, FormError> {
    if m1.checked_add(r) == Some(0) {
        return Err(FormError::PreconditionViolated(format!(
            "m1 = {m1} must differ from -r"
        )));
    }
    if r % 2 == 0 {
        return Ok(None);
    }
    let exp = m1.checked_add(r).ok_or(FormError::Overflow)?;
    Ok(Some(canonical_root(&CyclotomicScalar::sign_power(r), exp)?))
}

/// Full normal-form check for a rational `k = -1` component: both charts carry
/// `v^{-r} u^{m_l} (dv∧du)^r` with unit coefficient after the sign correction.
pub fn verify_p1_normal_forms(n: i64, m1: i64, m2: i64, r: i64) -> Result<bool, FormError> {
    if m2.checked_add(r) == Some(0) {
        return Err(FormError::PreconditionViolated(format!(
            "m2 = {m2} must differ from -r"
        )));
    }
    let nu = p1_sign_correction(m1, r)?;
    verify_p1_normal_forms_with(n, m1, m2, r, nu.as_ref())
}

/// As [`verify_p1_normal_forms`], with a caller-supplied rescaling constant
/// `ν` (any root of `ν^{m1+r} = (-1)^r` works; `None` means `ν = 1`).
pub fn verify_p1_normal_forms_with(
    n: i64,
    m1: i64,
    m2: i64,
    r: i64,
    nu: Option<&CyclotomicScalar>,
) -> Result<bool, FormError> {
    if m1.checked_add(r) == Some(0) || m2.checked_add(r) == Some(0) {
        return Err(FormError::PreconditionViolated(format!(
            "m1 = {m1} and m2 = {m2} must differ from -r"
        )));
    }
    if !verify_p1_transition(n, m1, m2, r)? {
        return Ok(false);
    }
    let chart2 = MonomialTwoForm::monomial(-r, m2, r, "f2", "q2")?;
    let chart1 = pullback(&chart2, &p1_transition(n))?;
    let rescale = MonomialMap::new(
        ["f1", "u1"],
        ["f1", "q1"],
        [[1, 0], [0, 1]],
        [
            CyclotomicScalar::one(),
            nu.cloned().unwrap_or_else(CyclotomicScalar::one),
        ],
    )?;
    let normal = pullback(&chart1, &rescale)?;
    Ok(normal.same_form(&MonomialTwoForm::monomial(-r, m1, r, "f1", "u1")?))
}

/// Checks that `p^{1-r} (dp∧dq)^r` on the total space of `K^r` is invariant
/// under the coordinate change `q̃ = q^{-1}`, `p̃ = (-1)^r q^{2r} p`.
pub fn verify_weight_r_canonical(r: i64) -> Result<bool, FormError> {
    if r < 1 {
        return Err(FormError::BadWeight(r));
    }
    let two_r = r.checked_mul(2).ok_or(FormError::Overflow)?;
    let tilde = MonomialTwoForm::monomial(1 - r, 0, r, "pt", "qt")?;
    let change = MonomialMap::new(
        ["p", "q"],
        ["pt", "qt"],
        [[1, two_r], [0, -1]],
        [CyclotomicScalar::sign_power(r), CyclotomicScalar::one()],
    )?;
    let pulled = pullback(&tilde, &change)?;
    Ok(pulled.same_form(&MonomialTwoForm::monomial(1 - r, 0, r, "p", "q")?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rational;

    fn one() -> CyclotomicScalar {
        CyclotomicScalar::one()
    }

    #[test]
    fn identity_pullback() {
        let w = MonomialTwoForm::monomial(0, 0, 1, "p", "q").unwrap();
        assert_eq!(pullback(&w, &MonomialMap::identity("p", "q")).unwrap(), w);
    }

    #[test]
    fn twisting_by_a_divisor() {
        // (q, h) -> (q, h q^a) on dp∧dq gives q^a dh∧dq.
        for a in -3..=3 {
            let w = MonomialTwoForm::monomial(0, 0, 1, "p", "q").unwrap();
            let tau =
                MonomialMap::new(["h", "q"], ["p", "q"], [[1, a], [0, 1]], [one(), one()]).unwrap();
            let got = pullback(&w, &tau).unwrap();
            assert_eq!(got, MonomialTwoForm::monomial(0, a, 1, "h", "q").unwrap());
        }
    }

    #[test]
    fn mth_power_map() {
        // (q, l) -> (q, l^m) on q^a dh∧dq gives m q^a l^{m-1} dl∧dq.
        for (a, m) in [(2, 3), (-1, -2), (0, 5)] {
            let w = MonomialTwoForm::monomial(0, a, 1, "h", "q").unwrap();
            let mu =
                MonomialMap::new(["l", "q"], ["h", "q"], [[m, 0], [0, 1]], [one(), one()]).unwrap();
            let got = pullback(&w, &mu).unwrap();
            let want = MonomialTwoForm::new(
                CyclotomicScalar::from_integer(m).unwrap(),
                m - 1,
                a,
                1,
                "l",
                "q",
            )
            .unwrap();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn degenerate_and_mismatched_maps() {
        assert_eq!(
            MonomialMap::new(["x", "y"], ["u", "v"], [[1, 2], [2, 4]], [one(), one()]),
            Err(FormError::DegenerateMap)
        );
        let w = MonomialTwoForm::monomial(1, 1, 1, "a", "b").unwrap();
        assert!(matches!(
            pullback(&w, &MonomialMap::identity("x", "y")),
            Err(FormError::VariableMismatch { .. })
        ));
    }

    #[test]
    fn target_order_is_normalized() {
        // A form listed as (q, p) pulls back the same as its (p, q) rewrite.
        let w = MonomialTwoForm::monomial(2, -1, 3, "q", "p").unwrap();
        let map =
            MonomialMap::new(["x", "y"], ["p", "q"], [[2, 1], [1, 1]], [one(), one()]).unwrap();
        let direct = pullback(&w, &map).unwrap();
        let rewritten = pullback(&w.swapped(), &map).unwrap();
        assert_eq!(direct, rewritten);
    }

    #[test]
    fn p1_transition_examples() {
        for n in -5..=-1 {
            assert!(verify_p1_transition(n, -2, 0, 1).unwrap());
            assert!(verify_p1_transition(n, -4, 0, 2).unwrap());
            assert!(verify_p1_transition(n, 0, -2, 1).unwrap());
        }
        assert!(matches!(
            verify_p1_transition(-1, -1, 0, 1),
            Err(FormError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn weight_one_residue_form() {
        // -f2^{-1} df2∧dq2 in chart 2 reads f1^{-1} q1^{-2} df1∧dq1 in chart 1.
        let chart2 =
            MonomialTwoForm::new(CyclotomicScalar::minus_one(), -1, 0, 1, "f2", "q2").unwrap();
        let got = pullback(&chart2, &p1_transition(-3)).unwrap();
        assert_eq!(
            got,
            MonomialTwoForm::monomial(-1, -2, 1, "f1", "q1").unwrap()
        );
    }

    #[test]
    fn sign_correction() {
        assert_eq!(p1_sign_correction(-4, 2).unwrap(), None);
        // r = 1, m1 = -2: ν^{-1} = -1, so ν = -1.
        assert_eq!(
            p1_sign_correction(-2, 1).unwrap(),
            Some(CyclotomicScalar::minus_one())
        );
        // r = 3, m1 = 0: ν^3 = -1, canonical ν = e^{2πi/6}.
        assert_eq!(
            p1_sign_correction(0, 3).unwrap().unwrap().phase(),
            &Rational::new(1.into(), 6.into())
        );
        assert!(p1_sign_correction(-3, 3).is_err());
        for (m1, r) in [(-2, 1), (0, 1), (-6, 3), (1, 3), (-4, 2)] {
            assert!(verify_p1_normal_forms(-2, m1, -2 * r - m1, r).unwrap());
        }
    }

    #[test]
    fn weight_r_canonical() {
        for r in [1, 2, 7] {
            assert!(verify_weight_r_canonical(r).unwrap());
        }
        assert_eq!(verify_weight_r_canonical(0), Err(FormError::BadWeight(0)));
    }

    #[test]
    fn weight_two_by_hand() {
        // p̃ = q^4 p, q̃ = q^{-1}: dp̃∧dq̃ = -q^2 dp∧dq, so
        // p̃^{-1}(dp̃∧dq̃)^2 = q^{-4} p^{-1} q^4 (dp∧dq)^2.
        let tilde = MonomialTwoForm::monomial(-1, 0, 2, "pt", "qt").unwrap();
        let change =
            MonomialMap::new(["p", "q"], ["pt", "qt"], [[1, 4], [0, -1]], [one(), one()]).unwrap();
        assert_eq!(
            pullback(&tilde, &change).unwrap(),
            MonomialTwoForm::monomial(-1, 0, 2, "p", "q").unwrap()
        );
    }

    #[test]
    fn form_json() {
        let w = MonomialTwoForm::monomial(-2, 3, 2, "f", "q").unwrap();
        let v = serde_json::to_value(&w).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "coeff": {"magnitude": "1", "phase": "0"},
                "a": -2, "b": 3, "r": 2, "vars": ["f", "q"]
            })
        );
    }
}
