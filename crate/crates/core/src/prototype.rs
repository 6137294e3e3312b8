//! Prototypes: sparse nonnegative vectors over configurations. A prototype is
//! a blueprint for a fractional packing in which configuration items act as
//! slots for other items.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::config::Configuration;
use crate::instance::ItemId;
use crate::rational::Rational;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Prototype {
    entries: BTreeMap<Configuration, Rational>,
}

impl Prototype {
    pub fn new() -> Prototype {
        Prototype {
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries<I: IntoIterator<Item = (Configuration, Rational)>>(iter: I) -> Prototype {
        let mut p = Prototype::new();
        for (c, v) in iter {
            p.add(c, v);
        }
        p
    }

    /// Adds weight to a configuration; zero contributions are dropped and
    /// negative totals are rejected.
    pub fn add(&mut self, config: Configuration, value: Rational) {
        use std::collections::btree_map::Entry;
        if value.is_zero() {
            return;
        }
        match self.entries.entry(config) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += value;
                assert!(
                    !e.get().is_negative(),
                    "prototype entries must stay nonnegative"
                );
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(v) => {
                assert!(!value.is_negative(), "prototype entries must stay nonnegative");
                v.insert(value);
            }
        }
    }

    pub fn set(&mut self, config: Configuration, value: Rational) {
        assert!(!value.is_negative());
        if value.is_zero() {
            self.entries.remove(&config);
        } else {
            self.entries.insert(config, value);
        }
    }

    pub fn get(&self, config: &Configuration) -> Rational {
        self.entries.get(config).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> impl Iterator<Item = &Configuration> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, &Rational)> {
        self.entries.iter()
    }

    /// l1 norm: the fractional number of bins the prototype stands for.
    pub fn norm(&self) -> Rational {
        self.entries
            .values()
            .fold(Rational::zero(), |a, v| a + v)
    }

    /// Frequency of an item: total weight of configurations containing it.
    pub fn frequency(&self, item: ItemId) -> Rational {
        self.entries
            .iter()
            .filter(|(c, _)| c.contains(item))
            .fold(Rational::zero(), |a, (_, v)| a + v)
    }

    /// Frequency of a set of items (with multiplicity over the set).
    pub fn frequency_of_set(&self, items: &[ItemId]) -> Rational {
        items
            .iter()
            .fold(Rational::zero(), |a, &i| a + self.frequency(i))
    }

    /// Total coverage per item id, for instances of `n` items.
    pub fn coverage(&self, n: usize) -> Vec<Rational> {
        let mut cov = vec![Rational::zero(); n];
        for (c, v) in &self.entries {
            for item in c.iter() {
                cov[item.idx()] += v;
            }
        }
        cov
    }

    pub fn max_config_len(&self) -> usize {
        self.entries.keys().map(|c| c.len()).max().unwrap_or(0)
    }
}

impl FromIterator<(Configuration, Rational)> for Prototype {
    fn from_iter<T: IntoIterator<Item = (Configuration, Rational)>>(iter: T) -> Self {
        Prototype::from_entries(iter)
    }
}
