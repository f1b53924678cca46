use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::pairing::{add, show_charge, symmetry_violations};
use crate::interaction::Charge;
use crate::linalg::{solve, Solve};
use crate::{rational, Error, Result, Q};

/// How the cocycle is split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonoidKind {
    /// `ℳ ≅ ℕ` generated by `unit`: recursion along multiples of the generator.
    Naturals { unit: Charge },
    /// `ℳ ≅ ℤ` generated by `unit`: recursion in both directions.
    Integers { unit: Charge },
    /// Symmetric `H`: linear system on the tabulated charge range.
    Symmetric,
}

/// `h : ℳ → ℚ` on a finite charge range.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SplittingFunction {
    pub values: BTreeMap<Charge, Q>,
}

impl MonoidKind {
    pub fn describe(&self) -> String {
        match self {
            MonoidKind::Naturals { unit } => format!("naturals generated by {}", show_charge(unit)),
            MonoidKind::Integers { unit } => format!("integers generated by {}", show_charge(unit)),
            MonoidKind::Symmetric => "symmetric".to_string(),
        }
    }
}

impl SplittingFunction {
    pub fn get(&self, alpha: &Charge) -> Option<&Q> {
        self.values.get(alpha)
    }

    /// First tabulated `(α, β)` with `H(α,β) ≠ h(α)+h(β)−h(α+β)`.
    pub fn first_failure(&self, table: &BTreeMap<(Charge, Charge), Q>) -> Option<((Charge, Charge), Q, Q)> {
        for ((a, b), v) in table {
            let (Some(x), Some(y), Some(z)) = (self.get(a), self.get(b), self.get(&add(a, b))) else {
                continue;
            };
            let w = x + y - z;
            if &w != v {
                return Some(((a.clone(), b.clone()), v.clone(), w));
            }
        }
        None
    }

    pub fn to_json(&self) -> Vec<(Vec<String>, String)> {
        self.values
            .iter()
            .map(|(k, v)| (k.iter().map(rational::format).collect(), rational::format(v)))
            .collect()
    }
}

fn scale(u: &Charge, n: i64) -> Charge {
    u.iter().map(|x| x * Q::from_integer(n.into())).collect()
}

fn entry<'t>(table: &'t BTreeMap<(Charge, Charge), Q>, a: &Charge, b: &Charge) -> Result<&'t Q> {
    table.get(&(a.clone(), b.clone())).ok_or_else(|| {
        Error::inconclusive(format!("pairing table lacks H({}, {})", show_charge(a), show_charge(b)))
    })
}

/// Finds `h` with `H(α,β) = h(α)+h(β)−h(α+β)` on the table, or reports the instance
/// that makes this impossible.
pub fn split_cocycle(table: &BTreeMap<(Charge, Charge), Q>, kind: &MonoidKind) -> Result<SplittingFunction> {
    let charges: BTreeSet<Charge> = table
        .keys()
        .flat_map(|(a, b)| [a.clone(), b.clone(), add(a, b)])
        .collect();
    let Some(zero) = charges.iter().next().map(|c| vec![Q::zero(); c.len()]) else {
        return Ok(SplittingFunction::default());
    };
    let h = match kind {
        MonoidKind::Naturals { unit } | MonoidKind::Integers { unit } => {
            let mut h = BTreeMap::new();
            let h0 = entry(table, &zero, &zero)?.clone();
            h.insert(zero.clone(), h0.clone());
            h.insert(unit.clone(), Q::zero());
            let mut n = 1;
            while charges.contains(&scale(unit, n + 1)) {
                let cur = scale(unit, n);
                let next = &h[&cur] + &h[unit] - entry(table, &cur, unit)?;
                h.insert(scale(unit, n + 1), next);
                n += 1;
            }
            let neg = scale(unit, -1);
            if matches!(kind, MonoidKind::Integers { .. }) && charges.contains(&neg) {
                let hm = entry(table, unit, &neg)? + &h0 - &h[unit];
                h.insert(neg.clone(), hm);
                let mut n = 1;
                while charges.contains(&scale(unit, -(n + 1))) {
                    let cur = scale(unit, -n);
                    let next = &h[&cur] + &h[&neg] - entry(table, &cur, &neg)?;
                    h.insert(scale(unit, -(n + 1)), next);
                    n += 1;
                }
            }
            if let Some(c) = charges.iter().find(|c| !h.contains_key(*c)) {
                return Err(Error::validation(format!(
                    "charge {} is not a multiple of the monoid generator {}",
                    show_charge(c),
                    show_charge(unit)
                )));
            }
            SplittingFunction { values: h }
        }
        MonoidKind::Symmetric => {
            if let Some((a, b)) = symmetry_violations(table).into_iter().next() {
                return Err(Error::validation(format!(
                    "pairing is not symmetric: H({a},{b}) = {} but H({b},{a}) = {}",
                    rational::format(&table[&(a.clone(), b.clone())]),
                    rational::format(&table[&(b.clone(), a.clone())]),
                    a = show_charge(&a),
                    b = show_charge(&b),
                )));
            }
            let index: BTreeMap<&Charge, usize> = charges.iter().enumerate().map(|(i, c)| (c, i)).collect();
            let keys: Vec<&(Charge, Charge)> = table.keys().collect();
            let rows: Vec<Vec<Q>> = keys
                .iter()
                .map(|(a, b)| {
                    let mut row = vec![Q::zero(); charges.len()];
                    row[index[a]] += Q::from_integer(1.into());
                    row[index[b]] += Q::from_integer(1.into());
                    row[index[&add(a, b)]] -= Q::from_integer(1.into());
                    row
                })
                .collect();
            let rhs: Vec<Q> = keys.iter().map(|k| table[*k].clone()).collect();
            match solve(&rows, &rhs, charges.len()) {
                Solve::Solution(x) => SplittingFunction {
                    values: charges.iter().cloned().zip(x).collect(),
                },
                Solve::Inconsistent { equation } => {
                    let (a, b) = keys[equation];
                    return Err(Error::validation(format!(
                        "cocycle does not split: H({}, {}) = {} is inconsistent with the preceding entries",
                        show_charge(a),
                        show_charge(b),
                        rational::format(&rhs[equation])
                    )));
                }
            }
        }
    };
    if let Some(((a, b), want, got)) = h.first_failure(table) {
        return Err(Error::validation(format!(
            "cocycle does not split: H({}, {}) = {} but the recursion gives {}",
            show_charge(&a),
            show_charge(&b),
            rational::format(&want),
            rational::format(&got)
        )));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn c(v: &[i64]) -> Charge {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn zero_cocycle_splits_to_zero() {
        let mut t = BTreeMap::new();
        for a in 0..4 {
            for b in 0..4 - a {
                t.insert((c(&[a]), c(&[b])), int(0));
            }
        }
        let h = split_cocycle(&t, &MonoidKind::Naturals { unit: c(&[1]) }).unwrap();
        assert!(h.values.values().all(|v| v.is_zero()));
        let h = split_cocycle(&t, &MonoidKind::Symmetric).unwrap();
        assert!(h.values.values().all(|v| v.is_zero()));
    }

    #[test]
    fn product_cocycle_on_naturals() {
        let mut t = BTreeMap::new();
        for m in 0..=20 {
            for n in 0..=20 {
                if m + n <= 20 {
                    t.insert((c(&[m]), c(&[n])), int(m * n));
                }
            }
        }
        let h = split_cocycle(&t, &MonoidKind::Naturals { unit: c(&[1]) }).unwrap();
        for n in 0..=10 {
            assert_eq!(h.get(&c(&[n])).unwrap(), &int(-n * (n - 1) / 2));
        }
        for m in 0..=10 {
            for n in 0..=10 {
                assert_eq!(h.values[&c(&[m])].clone() + &h.values[&c(&[n])] - &h.values[&c(&[m + n])], int(m * n));
            }
        }
    }

    #[test]
    fn integers_recurse_both_ways() {
        let hh = |n: i64| frac(n * n * n, 3) + int(n.abs());
        let mut t = BTreeMap::new();
        for a in -3..=3i64 {
            for b in -3..=3i64 {
                if (a + b).abs() <= 3 {
                    t.insert((c(&[a]), c(&[b])), hh(a) + hh(b) - hh(a + b));
                }
            }
        }
        let h = split_cocycle(&t, &MonoidKind::Integers { unit: c(&[1]) }).unwrap();
        assert!(h.first_failure(&t).is_none());
        assert_eq!(h.values.len(), 7);
    }

    #[test]
    fn asymmetric_pairing_is_rejected() {
        let mut t = BTreeMap::new();
        for a in [c(&[0, 0]), c(&[1, 0]), c(&[0, 1])] {
            for b in [c(&[0, 0]), c(&[1, 0]), c(&[0, 1])] {
                t.insert((a.clone(), b.clone()), int(0));
            }
        }
        t.insert((c(&[1, 0]), c(&[0, 1])), int(1));
        let err = split_cocycle(&t, &MonoidKind::Symmetric).unwrap_err();
        assert!(err.to_string().contains("not symmetric"), "{err}");
    }

    #[test]
    fn inconsistent_cocycle_reports_instance() {
        let mut t = BTreeMap::new();
        for m in 0..=3 {
            for n in 0..=3 - m {
                t.insert((c(&[m]), c(&[n])), int(0));
            }
        }
        t.insert((c(&[2]), c(&[1])), int(5));
        t.insert((c(&[1]), c(&[2])), int(5));
        t.insert((c(&[0]), c(&[3])), int(1));
        t.insert((c(&[3]), c(&[0])), int(1));
        assert!(split_cocycle(&t, &MonoidKind::Naturals { unit: c(&[1]) }).is_err());
        assert!(split_cocycle(&t, &MonoidKind::Symmetric).is_err());
    }
}
