//! Independent arithmetic on ordinals below ω^3, written as coefficient
//! triples `[c2, c1, c0]` (ω^2·c2 + ω·c1 + c0), plus brute-force suprema.
//!
//! Nothing here calls the library's arithmetic; the library is only used to
//! enumerate candidate ordinals and to convert values for comparison.

use ddrank::ordinals::{ExtOrdinal, Ordinal, Sign};

pub type Tri = [u64; 3];

pub fn to_tri(o: &Ordinal) -> Tri {
    let mut t = [0; 3];
    for (e, c) in o.terms() {
        let e = e.as_finite().expect("exponent must be finite") as usize;
        assert!(e < 3, "{o} is not below w^3");
        t[2 - e] = *c;
    }
    t
}

pub fn from_tri(t: Tri) -> Ordinal {
    let mut s = Vec::new();
    for (i, c) in t.iter().enumerate() {
        if *c > 0 {
            s.push(match 2 - i {
                0 => format!("{c}"),
                1 => format!("w*{c}"),
                e => format!("w^{e}*{c}"),
            });
        }
    }
    if s.is_empty() {
        return Ordinal::zero();
    }
    s.join("+").parse().unwrap()
}

/// Ordinal addition: everything of `a` below the leading exponent of `b`
/// is absorbed.
pub fn add(a: Tri, b: Tri) -> Tri {
    match b.iter().position(|c| *c > 0) {
        None => a,
        Some(lead) => {
            let mut out = [0; 3];
            out[..lead].copy_from_slice(&a[..lead]);
            out[lead] = a[lead] + b[lead];
            out[lead + 1..].copy_from_slice(&b[lead + 1..]);
            out
        }
    }
}

pub fn nat_sum(a: Tri, b: Tri) -> Tri {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn is_limit(a: Tri) -> bool {
    a[2] == 0 && a != [0; 3]
}

/// Every triple below `bound` with coefficients at most `cap`, built by
/// direct enumeration of the well-order (lexicographic triples).
pub fn below(bound: Tri, cap: u64) -> Vec<Tri> {
    let mut out = Vec::new();
    for c2 in 0..=cap {
        for c1 in 0..=cap {
            for c0 in 0..=cap {
                let t = [c2, c1, c0];
                if t < bound {
                    out.push(t);
                }
            }
        }
    }
    out
}

const CAP: u64 = 5;

/// Supremum of a monotone family given its maxima over growing caps.
/// Equal maxima mean the supremum is attained. Otherwise the highest
/// position that keeps growing is the one running off to infinity.
fn extrapolate(m1: Tri, m2: Tri) -> (Tri, bool) {
    if m1 == m2 {
        return (m1, true);
    }
    let j = (0..3).find(|&i| m1[i] != m2[i]).unwrap();
    assert!(j > 0, "supremum escapes w^3");
    let mut out = [0; 3];
    out[..j].copy_from_slice(&m1[..j]);
    out[j - 1] += 1;
    (out, false)
}

/// `sup{γ + β : γ < α}` by enumerating γ with the library's
/// `enumerate_below`.
pub fn sup_shift(alpha: Tri, beta: Tri) -> (Tri, bool) {
    let max_at = |cap| {
        Ordinal::enumerate_below(&from_tri(alpha), cap)
            .unwrap()
            .iter()
            .map(|g| add(to_tri(g), beta))
            .max()
            .unwrap()
    };
    extrapolate(max_at(CAP), max_at(CAP + 1))
}

/// `sup{γ ⊕ δ : γ < α, δ < β}` by enumerating all pairs.
pub fn sup_natural(alpha: Tri, beta: Tri) -> (Tri, bool) {
    let max_at = |cap| {
        let gs = Ordinal::enumerate_below(&from_tri(alpha), cap).unwrap();
        let ds = Ordinal::enumerate_below(&from_tri(beta), cap).unwrap();
        let mut best = [0; 3];
        for g in &gs {
            let g = to_tri(g);
            for d in &ds {
                best = best.max(nat_sum(g, to_tri(d)));
            }
        }
        best
    };
    extrapolate(max_at(CAP), max_at(CAP + 1))
}

pub type Signed = (Tri, Sign);

/// `sup{α ⊕ δ : δ < β}`.
pub fn sup_natural_right(alpha: Tri, beta: Tri) -> (Tri, bool) {
    let max_at = |cap| {
        Ordinal::enumerate_below(&from_tri(beta), cap)
            .unwrap()
            .iter()
            .map(|d| nat_sum(alpha, to_tri(d)))
            .max()
            .unwrap()
    };
    extrapolate(max_at(CAP), max_at(CAP + 1))
}

/// `sup{α + δ : δ < β}`.
pub fn sup_add_right(alpha: Tri, beta: Tri) -> (Tri, bool) {
    let max_at = |cap| {
        Ordinal::enumerate_below(&from_tri(beta), cap)
            .unwrap()
            .iter()
            .map(|d| add(alpha, to_tri(d)))
            .max()
            .unwrap()
    };
    extrapolate(max_at(CAP), max_at(CAP + 1))
}

pub fn hat_plus(x: Signed, y: Signed) -> Signed {
    match (x.1, y.1) {
        (Sign::Plus, Sign::Plus) => (add(x.0, y.0), Sign::Plus),
        (Sign::Plus, Sign::Minus) => {
            let (v, attained) = sup_add_right(x.0, y.0);
            assert!(!attained);
            (v, Sign::Minus)
        }
        (Sign::Minus, Sign::Minus) => (sup_shift(x.0, y.0).0, Sign::Minus),
        (Sign::Minus, Sign::Plus) => {
            let (v, attained) = sup_shift(x.0, y.0);
            (v, if attained { Sign::Plus } else { Sign::Minus })
        }
    }
}

pub fn hat_oplus(x: Signed, y: Signed) -> Signed {
    match (x.1, y.1) {
        (Sign::Plus, Sign::Plus) => (nat_sum(x.0, y.0), Sign::Plus),
        (Sign::Minus, Sign::Minus) => {
            let (v, attained) = sup_natural(x.0, y.0);
            assert!(!attained);
            (v, Sign::Minus)
        }
        (Sign::Plus, Sign::Minus) => {
            let (v, attained) = sup_natural_right(x.0, y.0);
            assert!(!attained);
            (v, Sign::Minus)
        }
        (Sign::Minus, Sign::Plus) => hat_oplus(y, x),
    }
}

/// All signed values below ω^3 with coefficients at most 3.
pub fn signed_universe() -> Vec<Signed> {
    let mut out = Vec::new();
    for t in below([4, 0, 0], 3) {
        out.push((t, Sign::Plus));
        if is_limit(t) {
            out.push((t, Sign::Minus));
        }
    }
    out
}

pub fn to_ext(x: Signed) -> ExtOrdinal {
    ExtOrdinal::new(from_tri(x.0), x.1).unwrap()
}

pub fn from_ext(x: &ExtOrdinal) -> Signed {
    (to_tri(x.value()), x.sign())
}
