//! Ordinals below ε₀ in hereditary Cantor normal form, and the signed
//! ("extended") ordinals `α₊` / `α₋` together with the operations `+̂` and `⊕̂`.
//!
//! An [`Ordinal`] is a strictly decreasing list of `(exponent, coefficient)`
//! pairs, where every exponent is itself an [`Ordinal`]. The empty list is 0.
//! Every value that can be built is a valid normal form; the only way to
//! construct one from raw parts is [`Ordinal::from_terms`], which checks the
//! invariants.

mod expr;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use expr::{eval_expr, ExprValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("exponents must be strictly decreasing (term {index})")]
    NotDecreasing { index: usize },
    #[error("coefficient of term {index} is zero")]
    ZeroCoefficient { index: usize },
    #[error("the minus sign is only allowed on limit ordinals, got {value}")]
    MinusOnNonLimit { value: Ordinal },
    #[error("supremum over the ordinals below 0 is empty")]
    EmptySupremum,
    #[error("{value} is outside the enumeration range (must be below w^3)")]
    OutsideOracleRange { value: Ordinal },
    #[error("parse error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },
}

/// An ordinal below ε₀ in Cantor normal form.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<(Ordinal, u64)>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Ordinal::from(1)
    }

    /// ω.
    pub fn omega() -> Self {
        Ordinal::omega_pow(Ordinal::one())
    }

    /// ω^exponent.
    pub fn omega_pow(exponent: Ordinal) -> Self {
        Ordinal {
            terms: vec![(exponent, 1)],
        }
    }

    /// `ω^exponent · coefficient`; zero when `coefficient == 0`.
    pub fn monomial(exponent: Ordinal, coefficient: u64) -> Self {
        if coefficient == 0 {
            return Ordinal::zero();
        }
        Ordinal {
            terms: vec![(exponent, coefficient)],
        }
    }

    /// Builds an ordinal from raw CNF terms, checking the invariants.
    pub fn from_terms(terms: Vec<(Ordinal, u64)>) -> Result<Self, OrdinalError> {
        for (index, (exp, coeff)) in terms.iter().enumerate() {
            if *coeff == 0 {
                return Err(OrdinalError::ZeroCoefficient { index });
            }
            if index > 0 && terms[index - 1].0 <= *exp {
                return Err(OrdinalError::NotDecreasing { index });
            }
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[(Ordinal, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.as_finite().is_some()
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(e, c)] if e.is_zero() => Some(*c),
            _ => None,
        }
    }

    /// True iff nonzero and the smallest exponent is nonzero.
    pub fn is_limit(&self) -> bool {
        self.terms.last().is_some_and(|(e, _)| !e.is_zero())
    }

    pub fn is_successor(&self) -> bool {
        self.terms.last().is_some_and(|(e, _)| e.is_zero())
    }

    /// The largest exponent; `None` for 0.
    pub fn leading_exponent(&self) -> Option<&Ordinal> {
        self.terms.first().map(|(e, _)| e)
    }

    /// The smallest exponent; `None` for 0.
    pub fn trailing_exponent(&self) -> Option<&Ordinal> {
        self.terms.last().map(|(e, _)| e)
    }

    /// Coefficient of `ω^exponent` (0 when absent).
    pub fn coefficient(&self, exponent: &Ordinal) -> u64 {
        self.terms
            .iter()
            .find(|(e, _)| e == exponent)
            .map_or(0, |(_, c)| *c)
    }

    /// Largest exponent appearing anywhere in the nested normal form,
    /// measured as nesting height: finite ordinals have height 0, ω^n·k has
    /// height 1 for finite n, and so on.
    pub fn height(&self) -> usize {
        self.terms
            .iter()
            .map(|(e, _)| if e.is_zero() { 0 } else { 1 + e.height() })
            .max()
            .unwrap_or(0)
    }

    pub fn successor(&self) -> Ordinal {
        self.add(&Ordinal::one())
    }

    /// The predecessor of a successor ordinal.
    pub fn predecessor(&self) -> Option<Ordinal> {
        if !self.is_successor() {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().expect("successor is nonzero");
        if last.1 == 1 {
            terms.pop();
        } else {
            last.1 -= 1;
        }
        Some(Ordinal { terms })
    }

    /// Ordinary (non-commutative) ordinal addition.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(lead) = rhs.leading_exponent() else {
            return self.clone();
        };
        let mut terms: Vec<(Ordinal, u64)> = self
            .terms
            .iter()
            .filter(|(e, _)| e > lead)
            .cloned()
            .collect();
        let carried = self.coefficient(lead);
        let mut rest = rhs.terms.iter();
        let (e, c) = rest.next().expect("rhs is nonzero");
        terms.push((e.clone(), add_coeff(carried, *c)));
        terms.extend(rest.cloned());
        Ordinal { terms }
    }

    /// Hessenberg natural sum: coefficient-wise merge of the normal forms.
    pub fn natural_sum(&self, rhs: &Ordinal) -> Ordinal {
        let mut terms = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < rhs.terms.len() {
            let (ea, ca) = &self.terms[i];
            let (eb, cb) = &rhs.terms[j];
            match ea.cmp(eb) {
                Ordering::Greater => {
                    terms.push((ea.clone(), *ca));
                    i += 1;
                }
                Ordering::Less => {
                    terms.push((eb.clone(), *cb));
                    j += 1;
                }
                Ordering::Equal => {
                    terms.push((ea.clone(), add_coeff(*ca, *cb)));
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend(self.terms[i..].iter().cloned());
        terms.extend(rhs.terms[j..].iter().cloned());
        Ordinal { terms }
    }

    /// The terms with exponent `>= bound`.
    fn truncate_below(&self, bound: &Ordinal) -> Ordinal {
        Ordinal {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e >= bound)
                .cloned()
                .collect(),
        }
    }

    /// Removes one copy of the smallest term: for a limit `α = α' + ω^e`
    /// this returns `α'`.
    fn drop_one_trailing(&self) -> Ordinal {
        let mut terms = self.terms.clone();
        if let Some(last) = terms.last_mut() {
            if last.1 == 1 {
                terms.pop();
            } else {
                last.1 -= 1;
            }
        }
        Ordinal { terms }
    }

    /// `sup{γ + β : γ < α}` together with whether some `γ < α` attains it.
    ///
    /// `γ` ranges over every ordinal below `α`, including 0.
    pub fn sup_shift(alpha: &Ordinal, beta: &Ordinal) -> Result<(Ordinal, bool), OrdinalError> {
        if alpha.is_zero() {
            return Err(OrdinalError::EmptySupremum);
        }
        if let Some(pred) = alpha.predecessor() {
            // γ ↦ γ + β is weakly increasing, so the largest γ wins.
            return Ok((pred.add(beta), true));
        }
        let tail = alpha.trailing_exponent().expect("alpha is nonzero");
        let Some(lead) = beta.leading_exponent() else {
            return Ok((alpha.clone(), false));
        };
        match lead.cmp(tail) {
            // γ = the part of α at or above β's leading exponent already
            // produces α + β.
            Ordering::Greater => Ok((alpha.add(beta), true)),
            Ordering::Less => Ok((alpha.clone(), false)),
            // Every γ ≥ α' + ω^e·(c-1) gives the same value.
            Ordering::Equal => Ok((alpha.drop_one_trailing().add(beta), true)),
        }
    }

    /// `sup{γ ⊕ δ : γ < α, δ < β}` for limit `α`, `β`. Never attained.
    fn sup_natural(alpha: &Ordinal, beta: &Ordinal) -> Ordinal {
        debug_assert!(alpha.is_limit() && beta.is_limit());
        let ea = alpha.trailing_exponent().expect("limit is nonzero");
        let eb = beta.trailing_exponent().expect("limit is nonzero");
        let m = if ea >= eb { ea } else { eb };
        let rest = alpha
            .drop_one_trailing()
            .natural_sum(&beta.drop_one_trailing());
        rest.truncate_below(m)
            .natural_sum(&Ordinal::omega_pow(m.clone()))
    }

    /// `sup{α ⊕ δ : δ < β}` for limit `β`. Never attained.
    ///
    /// Terms of `α` below the smallest exponent of `β` are swallowed in the
    /// limit, so this is below `α ⊕ β` unless `α` has no such terms.
    fn sup_natural_right(alpha: &Ordinal, beta: &Ordinal) -> Ordinal {
        debug_assert!(beta.is_limit());
        let eb = beta.trailing_exponent().expect("limit is nonzero");
        alpha
            .natural_sum(&beta.drop_one_trailing())
            .truncate_below(eb)
            .natural_sum(&Ordinal::omega_pow(eb.clone()))
    }

    /// All ordinals below `alpha` whose CNF coefficients are at most `cap`,
    /// in increasing order. Only supported for `alpha < ω^3`.
    pub fn enumerate_below(alpha: &Ordinal, cap: u64) -> Result<Vec<Ordinal>, OrdinalError> {
        let three = Ordinal::from(3);
        if alpha.leading_exponent().is_some_and(|e| *e >= three) {
            return Err(OrdinalError::OutsideOracleRange {
                value: alpha.clone(),
            });
        }
        let mut out = Vec::new();
        for c2 in 0..=cap {
            for c1 in 0..=cap {
                for c0 in 0..=cap {
                    let mut terms = Vec::new();
                    for (e, c) in [(2u64, c2), (1, c1), (0, c0)] {
                        if c > 0 {
                            terms.push((Ordinal::from(e), c));
                        }
                    }
                    let gamma = Ordinal { terms };
                    if gamma < *alpha {
                        out.push(gamma);
                    }
                }
            }
        }
        // lexicographic (c2, c1, c0) order is already the ordinal order
        Ok(out)
    }
}

fn add_coeff(a: u64, b: u64) -> u64 {
    a.checked_add(b).expect("ordinal coefficient overflow")
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::monomial(Ordinal::zero(), n)
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for ((ea, ca), (eb, cb)) in self.terms.iter().zip(&other.terms) {
            match ea.cmp(eb).then(ca.cmp(cb)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            if e.is_zero() {
                write!(f, "{c}")?;
                continue;
            }
            f.write_str("w")?;
            if *e != Ordinal::one() {
                if e.is_finite() || *e == Ordinal::omega() {
                    write!(f, "^{e}")?;
                } else {
                    write!(f, "^({e})")?;
                }
            }
            if *c > 1 {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ordinal({self})")
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match eval_expr(s)? {
            ExprValue::Plain(o) => Ok(o),
            ExprValue::Signed(x) => Err(OrdinalError::Parse {
                pos: 0,
                message: format!("expected an unsigned ordinal, got {x}"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

/// A signed ordinal `α₊` or `α₋`. `α₋` only exists for limit `α`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExtOrdinal {
    value: Ordinal,
    sign: Sign,
}

impl ExtOrdinal {
    pub fn new(value: Ordinal, sign: Sign) -> Result<Self, OrdinalError> {
        if sign == Sign::Minus && !value.is_limit() {
            return Err(OrdinalError::MinusOnNonLimit { value });
        }
        Ok(ExtOrdinal { value, sign })
    }

    pub fn plus(value: Ordinal) -> Self {
        ExtOrdinal {
            value,
            sign: Sign::Plus,
        }
    }

    pub fn minus(value: Ordinal) -> Result<Self, OrdinalError> {
        ExtOrdinal::new(value, Sign::Minus)
    }

    pub fn finite(n: u64) -> Self {
        ExtOrdinal::plus(Ordinal::from(n))
    }

    pub fn value(&self) -> &Ordinal {
        &self.value
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    fn checked(value: Ordinal, sign: Sign) -> Self {
        assert!(
            sign == Sign::Plus || value.is_limit(),
            "minus-signed result on non-limit {value}"
        );
        ExtOrdinal { value, sign }
    }

    /// `+̂`.
    pub fn hat_plus(&self, rhs: &ExtOrdinal) -> ExtOrdinal {
        use Sign::*;
        match (self.sign, rhs.sign) {
            (Minus, Minus) => {
                let (v, _) = Ordinal::sup_shift(&self.value, &rhs.value)
                    .expect("minus-signed values are nonzero");
                ExtOrdinal::checked(v, Minus)
            }
            (Minus, Plus) => {
                let (v, attained) = Ordinal::sup_shift(&self.value, &rhs.value)
                    .expect("minus-signed values are nonzero");
                ExtOrdinal::checked(v, if attained { Plus } else { Minus })
            }
            (Plus, s) => ExtOrdinal::checked(self.value.add(&rhs.value), s),
        }
    }

    /// `⊕̂`. The case `α₋ ⊕̂ β₊` is taken to be `β₊ ⊕̂ α₋`.
    ///
    /// `α₊ ⊕̂ β₋` is `sup{α ⊕ δ : δ < β}₋`. This is `(α ⊕ β)₋` whenever every
    /// exponent of `α` is at least the smallest exponent of `β`; otherwise
    /// `α ⊕ β` is not the supremum and may not even be a limit
    /// (`1₊ ⊕̂ (ω²)₋ = (ω²)₋`, not `(ω²+1)₋`).
    pub fn hat_oplus(&self, rhs: &ExtOrdinal) -> ExtOrdinal {
        use Sign::*;
        match (self.sign, rhs.sign) {
            (Minus, Minus) => {
                ExtOrdinal::checked(Ordinal::sup_natural(&self.value, &rhs.value), Minus)
            }
            (Plus, Plus) => ExtOrdinal::checked(self.value.natural_sum(&rhs.value), Plus),
            (Plus, Minus) => {
                ExtOrdinal::checked(Ordinal::sup_natural_right(&self.value, &rhs.value), Minus)
            }
            (Minus, Plus) => rhs.hat_oplus(self),
        }
    }
}

impl Ord for ExtOrdinal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .cmp(&other.value)
            .then(self.sign.cmp(&other.sign))
    }
}

impl PartialOrd for ExtOrdinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtOrdinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        let body = self.value.to_string();
        if self.value.is_finite() || self.value == Ordinal::omega() {
            write!(f, "{body}{sign}")
        } else {
            write!(f, "({body}){sign}")
        }
    }
}

impl fmt::Debug for ExtOrdinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtOrdinal({self})")
    }
}

impl FromStr for ExtOrdinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match eval_expr(s)? {
            ExprValue::Signed(x) => Ok(x),
            ExprValue::Plain(o) => Err(OrdinalError::Parse {
                pos: s.len(),
                message: format!("expected a sign suffix after {o}"),
            }),
        }
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for ExtOrdinal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExtOrdinal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
