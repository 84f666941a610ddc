//! Site states and configurations shared by the forward process and its dual.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::FiniteGraph;

/// State of one site, ordered `Vacant < Juvenile < Mature`.
///
/// For the dual the same three values are read as vacant, weakly active and
/// strongly active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(u8)]
pub enum SiteState {
    #[default]
    Vacant = 0,
    Juvenile = 1,
    Mature = 2,
}

impl SiteState {
    pub const ALL: [SiteState; 3] = [SiteState::Vacant, SiteState::Juvenile, SiteState::Mature];

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Self::Vacant),
            1 => Some(Self::Juvenile),
            2 => Some(Self::Mature),
            _ => None,
        }
    }

    pub fn is_active(self) -> bool {
        self != Self::Vacant
    }

    /// Site-level compatibility of a forward state with a dual state:
    /// a dual 2 matches forward 1 or 2, a dual 1 matches only forward 2.
    pub fn matches(forward: SiteState, dual: SiteState) -> bool {
        match dual {
            SiteState::Mature => forward.is_active(),
            SiteState::Juvenile => forward == SiteState::Mature,
            SiteState::Vacant => false,
        }
    }
}

// serialized as the bare digit 0, 1 or 2
impl Serialize for SiteState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for SiteState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        Self::from_u8(v).ok_or_else(|| serde::de::Error::custom(format!("invalid site state {v}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Configuration {
    states: Vec<SiteState>,
}

impl Configuration {
    pub fn new(states: Vec<SiteState>) -> Self {
        Self { states }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            states: vec![SiteState::Vacant; n],
        }
    }

    pub fn uniform(n: usize, s: SiteState) -> Self {
        Self { states: vec![s; n] }
    }

    /// A single mature site at `x`, everything else vacant.
    pub fn single_site(graph: &FiniteGraph, x: usize) -> Result<Self> {
        let n = graph.site_count();
        if x >= n {
            return Err(Error::SiteOutOfRange { site: x, n });
        }
        let mut c = Self::empty(n);
        c.states[x] = SiteState::Mature;
        Ok(c)
    }

    /// Every site mature; the largest configuration.
    pub fn all_mature(graph: &FiniteGraph) -> Self {
        Self::uniform(graph.site_count(), SiteState::Mature)
    }

    /// Mature on the listed sites, vacant elsewhere.
    pub fn mature_on(graph: &FiniteGraph, sites: &[usize]) -> Result<Self> {
        let n = graph.site_count();
        let mut c = Self::empty(n);
        for &x in sites {
            if x >= n {
                return Err(Error::SiteOutOfRange { site: x, n });
            }
            c.states[x] = SiteState::Mature;
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.iter().all(|s| !s.is_active())
    }

    pub fn states(&self) -> &[SiteState] {
        &self.states
    }

    pub fn get(&self, x: usize) -> SiteState {
        self.states[x]
    }

    pub fn set(&mut self, x: usize, s: SiteState) {
        self.states[x] = s;
    }

    pub fn active_count(&self) -> usize {
        self.states.iter().filter(|s| s.is_active()).count()
    }

    fn same_len(&self, other: &Self) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch(self.len(), other.len()))
        }
    }

    /// Pointwise maximum.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.same_len(other)?;
        Ok(Self {
            states: self.states.iter().zip(&other.states).map(|(&a, &b)| a.max(b)).collect(),
        })
    }

    /// Pointwise order.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.same_len(other)?;
        Ok(self.states.iter().zip(&other.states).all(|(a, b)| a <= b))
    }

    /// `xi ~ zeta`: some site where the forward state `self` matches the dual
    /// state `zeta`. Deliberately asymmetric.
    pub fn compatible(&self, zeta: &Self) -> Result<bool> {
        self.same_len(zeta)?;
        Ok(self
            .states
            .iter()
            .zip(&zeta.states)
            .any(|(&f, &d)| SiteState::matches(f, d)))
    }
}

impl From<Vec<SiteState>> for Configuration {
    fn from(states: Vec<SiteState>) -> Self {
        Self::new(states)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.states {
            write!(f, "{}", s.as_u8())?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(SiteState::Vacant),
                '1' => Ok(SiteState::Juvenile),
                '2' => Ok(SiteState::Mature),
                other => Err(Error::Parse(format!("invalid site state {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(s: &str) -> Configuration {
        s.parse().unwrap()
    }

    #[test]
    fn join_examples() {
        assert_eq!(c("012").join(&c("210")).unwrap(), c("212"));
        assert_eq!(c("012").join(&c("012")).unwrap(), c("012"));
        assert_eq!(c("000").join(&c("120")).unwrap(), c("120"));
        assert_eq!(c("01").join(&c("0")), Err(Error::LengthMismatch(2, 1)));
    }

    #[test]
    fn leq_examples() {
        assert!(c("01").leq(&c("11")).unwrap());
        assert!(!c("20").leq(&c("02")).unwrap());
        assert!(!c("02").leq(&c("20")).unwrap());
        assert!(c("1").leq(&c("")).is_err());
    }

    #[test]
    fn compatibility_examples() {
        assert!(c("1").compatible(&c("2")).unwrap());
        assert!(c("2").compatible(&c("1")).unwrap());
        assert!(!c("1").compatible(&c("1")).unwrap());
        for z in ["00", "01", "02", "12", "22"] {
            assert!(!c("00").compatible(&c(z)).unwrap());
        }
        assert!(c("0").compatible(&c("00")).is_err());
    }

    #[test]
    fn constructors() {
        let g = FiniteGraph::path(5);
        assert_eq!(Configuration::single_site(&g, 2).unwrap().to_string(), "00200");
        assert!(Configuration::single_site(&g, 5).is_err());
        assert!(Configuration::empty(5).is_empty());
        assert!(!Configuration::single_site(&g, 0).unwrap().is_empty());
        assert_eq!(Configuration::all_mature(&g).to_string(), "22222");
        assert!("0130".parse::<Configuration>().is_err());
    }

    fn config(n: usize) -> impl Strategy<Value = Configuration> {
        prop::collection::vec(0u8..3, n)
            .prop_map(|v| Configuration::new(v.into_iter().map(|b| SiteState::from_u8(b).unwrap()).collect()))
    }

    fn triple() -> impl Strategy<Value = (Configuration, Configuration, Configuration)> {
        (1usize..8).prop_flat_map(|n| (config(n), config(n), config(n)))
    }

    proptest! {
        #[test]
        fn lattice_laws((a, b, x) in triple()) {
            let ab = a.join(&b).unwrap();
            prop_assert_eq!(&ab, &b.join(&a).unwrap());
            prop_assert_eq!(ab.join(&x).unwrap(), a.join(&b.join(&x).unwrap()).unwrap());
            prop_assert_eq!(&a.join(&a).unwrap(), &a);
            prop_assert!(a.leq(&ab).unwrap());
            prop_assert_eq!(a.leq(&b).unwrap(), ab == b);
            if a.leq(&b).unwrap() && b.leq(&a).unwrap() {
                prop_assert_eq!(&a, &b);
            }
        }

        #[test]
        fn compatibility_monotone((a, b, z) in triple()) {
            let big = a.join(&b).unwrap();
            if a.compatible(&z).unwrap() {
                prop_assert!(big.compatible(&z).unwrap());
                let bigger_dual = z.join(&b).unwrap();
                prop_assert!(a.compatible(&bigger_dual).unwrap());
            }
            prop_assert!(!a.compatible(&Configuration::empty(a.len())).unwrap());
        }

        #[test]
        fn text_round_trip(a in (0usize..12).prop_flat_map(config)) {
            prop_assert_eq!(a.to_string().parse::<Configuration>().unwrap(), a);
        }
    }
}
