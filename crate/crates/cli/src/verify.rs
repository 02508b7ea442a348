//! Randomized Monte-Carlo checks of the closed-form evaluators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use witsenhausen::mathcore::{diff_entropy_bits, Density};
use witsenhausen::montecarlo::{
    linear_policy, mc_entropy, mc_power_zec, mc_strategy_costs, Decoder, McConfig, McEstimate, Strategy, ZecScheme,
};
use witsenhausen::strategies::{kpoint_costs, linear_cost, twopoint_costs};
use witsenhausen::zec::{
    zecf_power, zecf_x_density, zecf_y_density, zeck_power, zeck_y_density, ZecFScheme, ZecKScheme,
};
use witsenhausen::{QuadConfig, QuantizerSpec, Result, SystemParams};

use crate::output::Record;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Strategies,
    Zec,
    Entropy,
}

/// Agreement threshold in standard errors.
pub const Z_LIMIT: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct Check {
    pub case: String,
    pub quantity: &'static str,
    pub closed_form: f64,
    pub estimate: McEstimate,
}

impl Check {
    pub fn passes(&self) -> bool {
        self.estimate.agrees_with(self.closed_form, Z_LIMIT)
    }

    pub fn record(&self, suite: Suite) -> Record {
        Record::new()
            .with("suite", format!("{suite:?}").to_lowercase())
            .with("case", self.case.as_str())
            .with("quantity", self.quantity)
            .with("closed_form", self.closed_form)
            .with("mc_mean", self.estimate.mean)
            .with("mc_std_error", self.estimate.std_error)
            .with("z", self.estimate.z_score(self.closed_form))
            .with("pass", self.passes())
    }
}

fn random_sys(rng: &mut ChaCha8Rng) -> SystemParams {
    SystemParams::new(rng.random_range(0.5..2.0), rng.random_range(0.05..1.0)).expect("positive draws")
}

/// Random quantizer with adjacent levels at most `max_gap` apart.
fn random_spec(rng: &mut ChaCha8Rng, k: usize, max_gap: f64) -> QuantizerSpec {
    let (nl, nb) = QuantizerSpec::increment_dims(k);
    let levels: Vec<f64> = (0..nl)
        .map(|i| {
            let cap = if i == 0 && k.is_multiple_of(2) { 0.5 * max_gap } else { max_gap };
            rng.random_range(0.05..cap.min(1.2))
        })
        .collect();
    let bounds: Vec<f64> = (0..nb).map(|_| rng.random_range(0.1..1.2)).collect();
    QuantizerSpec::from_increments(k, &levels, &bounds).expect("positive increments")
}

fn random_zecf(rng: &mut ChaCha8Rng) -> ZecFScheme {
    ZecFScheme::new(rng.random_range(0.0..0.5), rng.random_range(0.0..1.5), rng.random_range(-2.0..1.0))
        .expect("in-range draws")
}

/// Runs `configs` random configurations of `suite`. Costs whose errors stem
/// from noise crossing between output levels are drawn with half-gaps of at
/// most four noise standard deviations, so that 10⁶ samples see those events
/// often enough for the standard error to be meaningful.
pub fn run_suite(suite: Suite, configs: usize, mc: &McConfig, quad: &QuadConfig, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut push = |case: String, quantity, closed_form, estimate| {
        checks.push(Check { case, quantity, closed_form, estimate });
    };
    for i in 0..configs {
        match suite {
            Suite::Strategies => {
                let s = random_sys(&mut rng);
                let tag = format!("Q={:.3} N={:.3}", s.q, s.n);
                match i % 3 {
                    0 => {
                        let p = rng.random_range(0.0..s.q);
                        let (st, dec) = linear_policy(p, &s);
                        let (pe, se) = mc_strategy_costs(&st, &dec, &s, mc)?;
                        push(format!("linear P={p:.3} {tag}"), "P", p, pe);
                        push(format!("linear P={p:.3} {tag}"), "S", linear_cost(p, &s)?, se);
                    }
                    1 => {
                        let a = rng.random_range(0.2..(4.0 * s.n.sqrt()).min(2.5));
                        let exact = twopoint_costs(a, &s, quad)?;
                        let (pe, se) = mc_strategy_costs(&Strategy::TwoPoint { a }, &Decoder::TwoPoint { a }, &s, mc)?;
                        push(format!("twopoint a={a:.3} {tag}"), "P", exact.p, pe);
                        push(format!("twopoint a={a:.3} {tag}"), "S", exact.s, se);
                    }
                    _ => {
                        let k = rng.random_range(2..=5);
                        let spec = random_spec(&mut rng, k, 8.0 * s.n.sqrt());
                        let exact = kpoint_costs(&spec, &s, quad)?;
                        let (pe, se) =
                            mc_strategy_costs(&Strategy::KPoint(spec.clone()), &Decoder::KPoint(spec), &s, mc)?;
                        push(format!("kpoint k={k} {tag}"), "P", exact.p, pe);
                        push(format!("kpoint k={k} {tag}"), "S", exact.s, se);
                    }
                }
            }
            Suite::Zec => {
                let s = random_sys(&mut rng);
                if i % 2 == 0 {
                    let k = rng.random_range(2..=5);
                    let scheme = ZecKScheme::new(rng.random_range(0.0..0.5), random_spec(&mut rng, k, f64::INFINITY))?;
                    let est = mc_power_zec(ZecScheme::K(&scheme), s.q, mc)?;
                    push(format!("zec-{k} Q={:.3}", s.q), "P", zeck_power(&scheme, &s), est);
                } else {
                    let scheme = random_zecf(&mut rng);
                    let est = mc_power_zec(ZecScheme::F(&scheme), s.q, mc)?;
                    push(
                        format!("zec-f a={:.3} b={:.3} Q={:.3}", scheme.a, scheme.b, s.q),
                        "P",
                        zecf_power(&scheme, &s),
                        est,
                    );
                }
            }
            Suite::Entropy => {
                let s = random_sys(&mut rng);
                let (case, d): (String, Density) = match i % 3 {
                    0 => {
                        let k = rng.random_range(2..=5);
                        let scheme =
                            ZecKScheme::new(rng.random_range(0.0..0.5), random_spec(&mut rng, k, f64::INFINITY))?;
                        (format!("zec-{k} Y1"), zeck_y_density(&scheme, &s)?)
                    }
                    1 => (String::from("zec-f Y1"), zecf_y_density(&random_zecf(&mut rng), &s)?),
                    _ => {
                        let mut scheme = random_zecf(&mut rng);
                        while scheme.delta() == 0.0 {
                            scheme = random_zecf(&mut rng);
                        }
                        (String::from("zec-f X1"), zecf_x_density(&scheme, &s)?)
                    }
                };
                let exact = diff_entropy_bits(&d, quad)?;
                push(format!("{case} Q={:.3} N={:.3}", s.q, s.n), "h_bits", exact, mc_entropy(&d, mc)?);
            }
        }
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_agree_at_moderate_sample_size() {
        let mc = McConfig { samples: 40_000, seed: 1, streams: 4 };
        for suite in [Suite::Strategies, Suite::Zec, Suite::Entropy] {
            let checks = run_suite(suite, 6, &mc, &QuadConfig::default(), 2).unwrap();
            assert!(!checks.is_empty());
            // Six configurations at 3 SE: a single miss would already be
            // unusual; two would indicate a real disagreement.
            let misses = checks.iter().filter(|c| !c.passes()).count();
            assert!(misses <= 1, "{suite:?}: {checks:?}");
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let mc = McConfig { samples: 5_000, seed: 4, streams: 3 };
        let a = run_suite(Suite::Zec, 4, &mc, &QuadConfig::default(), 9).unwrap();
        let b = run_suite(Suite::Zec, 4, &mc, &QuadConfig::default(), 9).unwrap();
        let key = |cs: &[Check]| cs.iter().map(|c| (c.case.clone(), c.estimate.mean.to_bits())).collect::<Vec<_>>();
        assert_eq!(key(&a), key(&b));
    }
}
