//! End-to-end node-private releases of the spanning-forest size and the
//! connected-component count, with budget accounting.
//!
//! A spanning-forest release spends ε/2 on threshold selection and ε/2 on
//! Laplace noise of scale 2Δ̂/ε. A component-count release first spends a
//! configurable slice (default ε/10) on a noisy vertex count, then runs the
//! spanning-forest pipeline on the remainder and reports the difference.

use crate::error::Result;
use crate::graph::Graph;
use crate::mech::{gem_select, laplace_sample, ForestLpFamily, PrivacyBudget};
use crate::stream::RngStream;

pub use crate::mech::{ExtensionFamily, GemSelection};

/// Which statistic a report releases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Sf,
    Cc,
}

/// How the total ε was divided. The three parts always sum to the requested
/// budget; unused parts are zero.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct BudgetSplit {
    pub epsilon_gem: f64,
    pub epsilon_lap: f64,
    pub epsilon_count: f64,
}

impl BudgetSplit {
    pub fn total(&self) -> f64 {
        self.epsilon_gem + self.epsilon_lap + self.epsilon_count
    }
}

/// Record of one private release. Only DP-safe fields are populated unless
/// the caller explicitly opts into insecure debugging, which additionally
/// carries the raw (pre-noise) extension value.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct ReleaseReport {
    pub statistic: Statistic,
    pub chosen_delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_extension_value: Option<f64>,
    pub noise_scale: f64,
    pub noisy_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node_count_noisy: Option<f64>,
    pub budget_split: BudgetSplit,
    pub seed: u64,
    pub beta: f64,
    pub degenerate_input: bool,
}

/// Release options beyond the privacy budget.
#[derive(Clone, Copy, Debug)]
pub struct ReleaseOptions {
    /// Carry the raw extension value in the report. The raw value is not
    /// differentially private; leave this off outside of tests.
    pub insecure_debug: bool,
    /// Fraction of ε spent on the noisy vertex count in component-count
    /// releases.
    pub count_budget_fraction: f64,
}

impl Default for ReleaseOptions {
    fn default() -> Self {
        ReleaseOptions {
            insecure_debug: false,
            count_budget_fraction: 0.1,
        }
    }
}

/// Failure probability default: 1/ln(ln(max(n, 16))), clamped into (0, 1/2].
pub fn default_beta(n: usize) -> f64 {
    let v = 1.0 / (((n.max(16)) as f64).ln()).ln();
    v.min(0.5)
}

/// ε-node-private estimate of the spanning-forest size with default options.
pub fn private_sf(g: &Graph, budget: &PrivacyBudget, rng: &mut RngStream) -> Result<ReleaseReport> {
    private_sf_with(g, budget, &ReleaseOptions::default(), rng)
}

/// ε-node-private estimate of the spanning-forest size: select Δ̂ with half
/// the budget, evaluate the extension at Δ̂, add Lap(2Δ̂/ε).
pub fn private_sf_with(
    g: &Graph,
    budget: &PrivacyBudget,
    opts: &ReleaseOptions,
    rng: &mut RngStream,
) -> Result<ReleaseReport> {
    let epsilon = budget.epsilon;
    let split = BudgetSplit {
        epsilon_gem: epsilon / 2.0,
        epsilon_lap: epsilon - epsilon / 2.0,
        epsilon_count: 0.0,
    };
    let seed = rng.id();
    let mut gem_rng = rng.split();
    let mut noise_rng = rng.split();

    if g.n() == 0 {
        let chosen = 1.0;
        let scale = 2.0 * chosen / epsilon;
        let noisy = laplace_sample(scale, &mut noise_rng)?;
        return Ok(ReleaseReport {
            statistic: Statistic::Sf,
            chosen_delta: chosen,
            raw_extension_value: opts.insecure_debug.then_some(0.0),
            noise_scale: scale,
            noisy_value: noisy,
            node_count_noisy: None,
            budget_split: split,
            seed,
            beta: budget.beta,
            degenerate_input: true,
        });
    }

    let family = ForestLpFamily::new(g.n() as f64);
    let gem_budget = PrivacyBudget::new(split.epsilon_gem, budget.beta)?;
    let selection = gem_select(g, &family, &gem_budget, &mut gem_rng)?;
    let chosen = selection.chosen_index as f64;

    let raw = family.eval(g, chosen)?;
    let scale = 2.0 * chosen / epsilon;
    let noisy = raw + laplace_sample(scale, &mut noise_rng)?;

    Ok(ReleaseReport {
        statistic: Statistic::Sf,
        chosen_delta: chosen,
        raw_extension_value: opts.insecure_debug.then_some(raw),
        noise_scale: scale,
        noisy_value: noisy,
        node_count_noisy: None,
        budget_split: split,
        seed,
        beta: budget.beta,
        degenerate_input: false,
    })
}

/// ε-node-private estimate of the number of connected components with default
/// options.
pub fn private_cc(g: &Graph, budget: &PrivacyBudget, rng: &mut RngStream) -> Result<ReleaseReport> {
    private_cc_with(g, budget, &ReleaseOptions::default(), rng)
}

/// ε-node-private estimate of the number of connected components: release a
/// noisy vertex count (sensitivity 1) on a budget slice, a noisy
/// spanning-forest size on the remainder, and report their difference.
pub fn private_cc_with(
    g: &Graph,
    budget: &PrivacyBudget,
    opts: &ReleaseOptions,
    rng: &mut RngStream,
) -> Result<ReleaseReport> {
    let epsilon = budget.epsilon;
    let frac = opts.count_budget_fraction;
    if !(frac > 0.0 && frac < 1.0) {
        return Err(crate::error::Error::Parameter(format!(
            "count_budget_fraction = {frac} must lie in (0, 1)"
        )));
    }
    let epsilon_count = epsilon * frac;
    let epsilon_sf = epsilon - epsilon_count;
    let seed = rng.id();

    let mut count_rng = rng.split();
    let noisy_n = g.n() as f64 + laplace_sample(1.0 / epsilon_count, &mut count_rng)?;

    let sf_budget = PrivacyBudget::new(epsilon_sf, budget.beta)?;
    let sf_report = private_sf_with(g, &sf_budget, opts, rng)?;

    Ok(ReleaseReport {
        statistic: Statistic::Cc,
        chosen_delta: sf_report.chosen_delta,
        raw_extension_value: sf_report.raw_extension_value,
        noise_scale: sf_report.noise_scale,
        noisy_value: noisy_n - sf_report.noisy_value,
        node_count_noisy: Some(noisy_n),
        budget_split: BudgetSplit {
            epsilon_gem: sf_report.budget_split.epsilon_gem,
            epsilon_lap: sf_report.budget_split.epsilon_lap,
            epsilon_count,
        },
        seed,
        beta: budget.beta,
        degenerate_input: sf_report.degenerate_input,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::spanning_forest_size;

    #[test]
    fn default_beta_values() {
        assert_eq!(default_beta(16), 0.5);
        assert_eq!(default_beta(3), 0.5);
        assert!((default_beta(1_000_000) - 0.3808).abs() < 0.001);
        let mut prev = default_beta(1);
        for n in [10, 100, 1000, 10_000, 100_000] {
            let b = default_beta(n);
            assert!(b <= prev + 1e-15 && b > 0.0 && b <= 0.5);
            prev = b;
        }
    }

    #[test]
    fn sf_vanishing_noise_on_matching() {
        // perfect matching plus isolated vertices has a spanning 1-forest
        let g = Graph::from_edges(6, [(0, 1), (2, 3)]).unwrap();
        let budget = PrivacyBudget::new(1e6, 0.25).unwrap();
        let mut rng = RngStream::from_seed(19);
        let rep = private_sf(&g, &budget, &mut rng).unwrap();
        assert!((rep.noisy_value - spanning_forest_size(&g) as f64).abs() < 0.01);
        assert!(!rep.degenerate_input);
        assert_eq!(rep.raw_extension_value, None);
        assert_eq!(rep.noise_scale, 2.0 * rep.chosen_delta / 1e6);
    }

    #[test]
    fn sf_raw_value_underestimates() {
        let budget = PrivacyBudget::new(2.0, 0.2).unwrap();
        let opts = ReleaseOptions {
            insecure_debug: true,
            ..Default::default()
        };
        for delta in 1..=4usize {
            let star = Graph::from_edges(delta + 2, (1..=delta + 1).map(|i| (0, i))).unwrap();
            let mut rng = RngStream::from_seed(delta as u64);
            let rep = private_sf_with(&star, &budget, &opts, &mut rng).unwrap();
            let raw = rep.raw_extension_value.expect("debug mode");
            assert!(raw <= spanning_forest_size(&star) as f64 + 1e-9);
        }
    }

    #[test]
    fn sf_empty_graph_degenerate() {
        let budget = PrivacyBudget::new(1.0, 0.3).unwrap();
        let mut rng = RngStream::from_seed(23);
        let rep = private_sf(&Graph::empty(0), &budget, &mut rng).unwrap();
        assert!(rep.degenerate_input);
        assert_eq!(rep.statistic, Statistic::Sf);
    }

    #[test]
    fn cc_vanishing_noise() {
        // triangle plus 2 isolated vertices: 3 components
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let budget = PrivacyBudget::new(1e6, 0.25).unwrap();
        let mut rng = RngStream::from_seed(29);
        let rep = private_cc(&g, &budget, &mut rng).unwrap();
        assert!((rep.noisy_value - 3.0).abs() < 0.01, "got {}", rep.noisy_value);
        assert!(rep.node_count_noisy.is_some());
        assert_eq!(rep.statistic, Statistic::Cc);
    }

    #[test]
    fn budget_split_sums_to_epsilon() {
        let g = Graph::complete(4);
        for &eps in &[0.3, 1.0, 7.5, 1e6] {
            let budget = PrivacyBudget::new(eps, 0.25).unwrap();
            let mut rng = RngStream::from_seed(31);
            let sf = private_sf(&g, &budget, &mut rng).unwrap();
            assert!((sf.budget_split.total() - eps).abs() <= 1e-12 * eps);
            let mut rng = RngStream::from_seed(31);
            let cc = private_cc(&g, &budget, &mut rng).unwrap();
            assert!((cc.budget_split.total() - eps).abs() <= 1e-12 * eps);
        }
    }

    #[test]
    fn reports_reproduce_from_seed() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let budget = PrivacyBudget::new(1.5, 0.2).unwrap();
        let a = private_cc(&g, &budget, &mut RngStream::from_seed(37)).unwrap();
        let b = private_cc(&g, &budget, &mut RngStream::from_seed(37)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = private_cc(&g, &budget, &mut RngStream::from_seed(38)).unwrap();
        assert_ne!(a.noisy_value, c.noisy_value);
    }

    #[test]
    fn error_decomposition_recomputable() {
        // |output − f_sf| <= |raw − f_sf| + |noise|, where noise = noisy − raw
        let g = Graph::from_edges(7, [(0, 1), (0, 2), (0, 3), (4, 5)]).unwrap();
        let budget = PrivacyBudget::new(0.8, 0.2).unwrap();
        let opts = ReleaseOptions {
            insecure_debug: true,
            ..Default::default()
        };
        for seed in 0..20 {
            let mut rng = RngStream::from_seed(seed);
            let rep = private_sf_with(&g, &budget, &opts, &mut rng).unwrap();
            let raw = rep.raw_extension_value.unwrap();
            let sf = spanning_forest_size(&g) as f64;
            let noise = rep.noisy_value - raw;
            assert!(
                (rep.noisy_value - sf).abs() <= (raw - sf).abs() + noise.abs() + 1e-12
            );
        }
    }

    #[test]
    fn cc_rejects_bad_fraction() {
        let g = Graph::complete(3);
        let budget = PrivacyBudget::new(1.0, 0.2).unwrap();
        let opts = ReleaseOptions {
            count_budget_fraction: 1.5,
            ..Default::default()
        };
        assert!(private_cc_with(&g, &budget, &opts, &mut RngStream::from_seed(1)).is_err());
    }

    #[test]
    fn report_json_hides_raw_by_default() {
        let g = Graph::complete(3);
        let budget = PrivacyBudget::new(1.0, 0.2).unwrap();
        let rep = private_sf(&g, &budget, &mut RngStream::from_seed(3)).unwrap();
        let json = serde_json::to_string(&rep).unwrap();
        assert!(!json.contains("raw_extension_value"));
        assert!(json.contains("\"statistic\":\"sf\""));
    }
}
