//! Laurent polynomials: integer support vectors with coefficients in a caller
//! supplied ring. Like terms are merged by the caller-provided addition.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPoly<C> {
    /// number of variables
    pub nvars: usize,
    pub terms: BTreeMap<Vec<i64>, C>,
}

impl<C: Clone> LaurentPoly<C> {
    pub fn new(nvars: usize) -> Self {
        LaurentPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<i64>, C)>) -> Self {
        let mut p = LaurentPoly::new(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars);
            p.terms.insert(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.terms.keys()
    }

    /// Add a term, merging with `add` and dropping the result when `is_zero`.
    pub fn add_term(
        &mut self,
        exp: Vec<i64>,
        coeff: C,
        add: impl Fn(&C, &C) -> C,
        is_zero: impl Fn(&C) -> bool,
    ) {
        assert_eq!(exp.len(), self.nvars);
        let merged = match self.terms.get(&exp) {
            Some(old) => add(old, &coeff),
            None => coeff,
        };
        if is_zero(&merged) {
            self.terms.remove(&exp);
        } else {
            self.terms.insert(exp, merged);
        }
    }

    /// Apply an exponent-vector permutation/remap to every term.
    pub fn map_exponents(&self, f: impl Fn(&[i64]) -> Vec<i64>) -> LaurentPoly<C> {
        let mut out = LaurentPoly::new(self.nvars);
        for (e, c) in &self.terms {
            let e2 = f(e);
            assert!(
                !out.terms.contains_key(&e2),
                "exponent remap must be injective"
            );
            out.terms.insert(e2, c.clone());
        }
        out
    }
}
