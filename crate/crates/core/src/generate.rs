//! Seeded random instances with trichotomous profiles.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::io::InstanceFile;
use crate::model::{validate_instance, AgentId, Instance, Matching, ObjectSet, RawInstance, TrichotomousPreference};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub agents: usize,
    pub max_endowment: usize,
    /// Total number of objects. Endowment sizes are drawn uniformly from
    /// `1..=max_endowment` when unset.
    pub objects: Option<usize>,
    /// Chance that a given object is attractive to a given agent.
    pub attractive_probability: f64,
    /// Chance that a non-endowed, non-attractive object is bearable.
    pub bearable_probability: f64,
    /// Draw strongly trichotomous preferences (no bearable non-endowments).
    pub strongly: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            agents: 4,
            max_endowment: 2,
            objects: None,
            attractive_probability: 0.3,
            bearable_probability: 0.3,
            strongly: false,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.agents == 0 {
            return bad("at least one agent is required".into());
        }
        if self.max_endowment == 0 {
            return bad("max endowment must be positive".into());
        }
        if let Some(m) = self.objects {
            if m < self.agents || m > self.agents * self.max_endowment {
                return bad(format!(
                    "{m} objects cannot be split among {} agents with at most {} each",
                    self.agents, self.max_endowment
                ));
            }
        }
        for (name, p) in [
            ("attractive", self.attractive_probability),
            ("bearable", self.bearable_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} probability {p} is outside [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub instance: Instance,
    pub preferences: Vec<TrichotomousPreference>,
}

impl Generated {
    /// Instance file whose `meta` records the seed and the config.
    pub fn to_instance_file(&self, config: &GeneratorConfig, seed: u64) -> InstanceFile {
        let mut file = InstanceFile::from_instance(&self.instance).with_trichotomous(&self.instance, &self.preferences);
        file.meta = Some(serde_json::json!({ "seed": seed, "generator": config }));
        file
    }
}

/// Instance and profile determined by `config` and `seed`.
pub fn generate(config: &GeneratorConfig, seed: u64) -> Result<Generated> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instance = random_instance(config, &mut rng)?;
    let preferences = random_profile(&instance, config, &mut rng);
    Ok(Generated { instance, preferences })
}

fn width(n: usize) -> usize {
    n.max(1).to_string().len()
}

pub fn random_instance<R: Rng + ?Sized>(config: &GeneratorConfig, rng: &mut R) -> Result<Instance> {
    config.validate()?;
    let n = config.agents;
    let sizes: Vec<usize> = match config.objects {
        None => (0..n).map(|_| rng.gen_range(1..=config.max_endowment)).collect(),
        Some(m) => {
            let mut sizes = vec![1; n];
            for _ in n..m {
                let open: Vec<usize> = (0..n).filter(|&i| sizes[i] < config.max_endowment).collect();
                sizes[*open.choose(rng).expect("capacity was checked")] += 1;
            }
            sizes
        }
    };
    let m: usize = sizes.iter().sum();
    let (wa, wo) = (width(n), width(m));
    let agents: Vec<String> = (1..=n).map(|i| format!("a{i:0wa$}")).collect();
    let objects: Vec<String> = (1..=m).map(|k| format!("o{k:0wo$}")).collect();
    let mut next = 0;
    let endowments = agents
        .iter()
        .zip(&sizes)
        .map(|(a, &s)| {
            next += s;
            (a.clone(), objects[next - s..next].to_vec())
        })
        .collect();
    validate_instance(&RawInstance {
        agents,
        objects,
        endowments,
    })
}

pub fn random_preference<R: Rng + ?Sized>(
    instance: &Instance,
    agent: AgentId,
    config: &GeneratorConfig,
    rng: &mut R,
) -> TrichotomousPreference {
    let endowment = instance.endowment(agent);
    let mut attractive = ObjectSet::new();
    let mut bearable = ObjectSet::new();
    for o in instance.objects() {
        if rng.gen_bool(config.attractive_probability) {
            attractive.insert(o);
        } else if endowment.contains(&o) || (!config.strongly && rng.gen_bool(config.bearable_probability)) {
            bearable.insert(o);
        }
    }
    TrichotomousPreference::new(endowment, attractive, bearable).expect("endowment is covered by construction")
}

pub fn random_profile<R: Rng + ?Sized>(
    instance: &Instance,
    config: &GeneratorConfig,
    rng: &mut R,
) -> Vec<TrichotomousPreference> {
    instance
        .agents()
        .map(|a| random_preference(instance, a, config, rng))
        .collect()
}

/// Uniformly shuffled balanced matching.
pub fn random_matching<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Matching {
    let mut pool: Vec<_> = instance.objects().collect();
    pool.shuffle(rng);
    let mut rest = pool.as_slice();
    let bundles = instance
        .agents()
        .map(|a| {
            let (head, tail) = rest.split_at(instance.endowment_size(a));
            rest = tail;
            head.iter().copied().collect()
        })
        .collect();
    Matching::new(instance, bundles).expect("sizes follow the endowments")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_file() {
        let config = GeneratorConfig {
            agents: 4,
            max_endowment: 3,
            ..Default::default()
        };
        let file = |seed| generate(&config, seed).unwrap().to_instance_file(&config, seed).to_json().unwrap();
        let (a, b, c) = (file(7), file(7), file(8));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn round_trips_through_the_file_format() {
        for seed in 0..50 {
            let config = GeneratorConfig::default();
            let g = generate(&config, seed).unwrap();
            let loaded = g.to_instance_file(&config, seed).load().unwrap();
            assert_eq!(loaded.instance, g.instance);
            let marginal = loaded.preferences.unwrap();
            for a in g.instance.agents() {
                assert_eq!(marginal[a.0], g.preferences[a.0].to_marginal(g.instance.num_objects()));
            }
        }
    }

    #[test]
    fn names_sort_in_creation_order() {
        let config = GeneratorConfig {
            agents: 12,
            max_endowment: 1,
            ..Default::default()
        };
        let g = generate(&config, 1).unwrap();
        assert_eq!(g.instance.agent_name(AgentId(0)), "a01");
        for a in g.instance.agents() {
            let o = *g.instance.endowment(a).iter().next().unwrap();
            assert_eq!(o.0, a.0);
        }
    }

    #[test]
    fn fixed_object_count() {
        let config = GeneratorConfig {
            agents: 50,
            max_endowment: 8,
            objects: Some(200),
            ..Default::default()
        };
        let g = generate(&config, 3).unwrap();
        assert_eq!(g.instance.num_objects(), 200);
        assert!(g.instance.agents().all(|a| (1..=8).contains(&g.instance.endowment_size(a))));
    }

    #[test]
    fn strongly_profiles() {
        let config = GeneratorConfig {
            strongly: true,
            ..Default::default()
        };
        for seed in 0..20 {
            let g = generate(&config, seed).unwrap();
            for a in g.instance.agents() {
                assert!(g.preferences[a.0].is_strongly(g.instance.endowment(a)));
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let too_many = GeneratorConfig {
            agents: 2,
            max_endowment: 2,
            objects: Some(5),
            ..Default::default()
        };
        assert!(matches!(generate(&too_many, 0), Err(Error::InvalidConfig(_))));
        let bad_p = GeneratorConfig {
            attractive_probability: 1.5,
            ..Default::default()
        };
        assert!(generate(&bad_p, 0).is_err());
    }

    #[test]
    fn random_matchings_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = generate(&GeneratorConfig::default(), 0).unwrap();
        for _ in 0..20 {
            random_matching(&g.instance, &mut rng).validate(&g.instance).unwrap();
        }
    }
}
