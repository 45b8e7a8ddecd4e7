use std::fmt;

use crate::oracles::{ExactOracle, MatrixOracle};

use super::{
    ExplicitEuler, FractionalVariational, HamiltonianFvi, ImplicitEuler, Integrator,
    LagrangeDAlembert, PlainVariational,
};

/// Name-indexed collection of [`Integrator`]s.
pub struct IntegratorRegistry {
    entries: Vec<Box<dyn Integrator>>,
}

impl IntegratorRegistry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// All schemes and oracles shipped with the crate.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(FractionalVariational));
        r.register(Box::new(LagrangeDAlembert));
        r.register(Box::new(PlainVariational));
        r.register(Box::new(ExplicitEuler));
        r.register(Box::new(ImplicitEuler));
        r.register(Box::new(HamiltonianFvi));
        r.register(Box::new(MatrixOracle));
        r.register(Box::new(ExactOracle));
        r
    }

    /// Later registrations shadow earlier ones with the same name.
    pub fn register(&mut self, integrator: Box<dyn Integrator>) {
        self.entries.retain(|e| e.name() != integrator.name());
        self.entries.push(integrator);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Integrator> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.name() == name || e.aliases().contains(&name))
            .map(|e| e.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Integrator> {
        self.entries.iter().map(|e| e.as_ref())
    }
}

impl Default for IntegratorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl fmt::Debug for IntegratorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}
