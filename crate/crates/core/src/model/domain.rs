use std::fmt;

use super::instance::ObjectSet;
use super::preference::MarginalPreference;
use crate::error::{Error, Result};

/// Which indifference classes may hold endowed and non-endowed objects.
///
/// Each indicator is stored as an explicit prefix (rank 1, 2, ...) plus a
/// tail value that holds for every rank past the prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainSpec {
    endowed: Vec<bool>,
    endowed_tail: bool,
    non_endowed: Vec<bool>,
    non_endowed_tail: bool,
}

impl DomainSpec {
    pub fn new(
        endowed: Vec<bool>,
        endowed_tail: bool,
        non_endowed: Vec<bool>,
        non_endowed_tail: bool,
    ) -> Result<Self> {
        let spec = DomainSpec {
            endowed,
            endowed_tail,
            non_endowed,
            non_endowed_tail,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !self.non_endowed(1) {
            return Err(Error::InvalidDomain("non-endowed objects must be allowed in class 1".into()));
        }
        if !self.endowed_tail && !self.endowed.iter().any(|&e| e) {
            return Err(Error::InvalidDomain("endowed objects are allowed in no class".into()));
        }
        // No class may be forced empty below a usable class.
        let horizon = self.endowed.len().max(self.non_endowed.len()) + 1;
        let mut gap = None;
        for k in 1..=horizon {
            let usable = self.endowed(k) || self.non_endowed(k);
            match (usable, gap) {
                (false, None) => gap = Some(k),
                (true, Some(g)) => {
                    return Err(Error::InvalidDomain(format!(
                        "class {k} is usable but class {g} above it is forced empty"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Whether endowed objects may appear in class `k` (1-based).
    pub fn endowed(&self, k: usize) -> bool {
        assert!(k >= 1, "classes are 1-based");
        self.endowed.get(k - 1).copied().unwrap_or(self.endowed_tail)
    }

    /// Whether non-endowed objects may appear in class `k` (1-based).
    pub fn non_endowed(&self, k: usize) -> bool {
        assert!(k >= 1, "classes are 1-based");
        self.non_endowed.get(k - 1).copied().unwrap_or(self.non_endowed_tail)
    }

    pub fn all_weak_orders() -> Self {
        DomainSpec::new(vec![], true, vec![], true).unwrap()
    }

    pub fn dichotomous() -> Self {
        DomainSpec::m_chotomous(2)
    }

    pub fn m_chotomous(m: usize) -> Self {
        assert!(m >= 1);
        DomainSpec::new(vec![true; m], false, vec![true; m], false).unwrap()
    }

    /// Trichotomous domain whose non-endowed objects may use any class.
    pub fn trichotomous() -> Self {
        DomainSpec::new(vec![true, true], false, vec![true, true], true).unwrap()
    }

    pub fn strongly_trichotomous() -> Self {
        DomainSpec::new(vec![true, true], false, vec![true, false], true).unwrap()
    }

    pub fn is_strongly_trichotomous(&self) -> bool {
        *self == DomainSpec::strongly_trichotomous()
    }
}

/// True iff every class holding an endowed object allows endowed objects and
/// every class holding a non-endowed object allows non-endowed objects.
pub fn domain_membership(pref: &MarginalPreference, spec: &DomainSpec, endowment: &ObjectSet) -> bool {
    pref.classes().iter().enumerate().all(|(idx, class)| {
        let k = idx + 1;
        let has_endowed = class.iter().any(|o| endowment.contains(o));
        let has_other = class.iter().any(|o| !endowment.contains(o));
        (!has_endowed || spec.endowed(k)) && (!has_other || spec.non_endowed(k))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainLabel {
    StronglyTrichotomous,
    Dichotomous,
    Trichotomous,
    /// Endowed objects below class 2; `m` is the index of the last non-empty class.
    MChotomous(usize),
    /// As many non-empty classes as objects: no restriction beyond a weak order.
    General,
}

impl fmt::Display for DomainLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainLabel::StronglyTrichotomous => write!(f, "strongly-trichotomous"),
            DomainLabel::Dichotomous => write!(f, "dichotomous"),
            DomainLabel::Trichotomous => write!(f, "trichotomous"),
            DomainLabel::MChotomous(m) => write!(f, "{m}-chotomous"),
            DomainLabel::General => write!(f, "general"),
        }
    }
}

/// Most specific domain label for one agent's marginal preference.
///
/// Precedence: strongly trichotomous, dichotomous, trichotomous,
/// m-chotomous, general.
pub fn classify_domain(pref: &MarginalPreference, endowment: &ObjectSet) -> DomainLabel {
    let classes = pref.classes();
    let depth = classes.iter().rposition(|c| !c.is_empty()).map_or(0, |k| k + 1);
    let deepest_endowed = classes
        .iter()
        .rposition(|c| c.iter().any(|o| endowment.contains(o)))
        .map_or(0, |k| k + 1);
    let second_has_other = classes
        .get(1)
        .is_some_and(|c| c.iter().any(|o| !endowment.contains(o)));

    if deepest_endowed <= 2 {
        if !second_has_other {
            DomainLabel::StronglyTrichotomous
        } else if depth <= 2 {
            DomainLabel::Dichotomous
        } else {
            DomainLabel::Trichotomous
        }
    } else {
        let num_objects: usize = classes.iter().map(|c| c.len()).sum();
        if depth >= num_objects {
            DomainLabel::General
        } else {
            DomainLabel::MChotomous(depth)
        }
    }
}
