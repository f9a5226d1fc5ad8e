//! U-statistics, volatility estimation and CLT condition diagnostics built
//! on the dependency-graph bounds.

pub mod clt;
pub mod ustat;
pub mod volatility;

pub use clt::{clt_condition_check, CltReport, ConditionSeries, Verdict};
pub use ustat::{
    exact_ustat, plugin_estimate, sample_variance_centered, sample_variance_pairwise, tuple_graph_max_degree,
    u_statistic, ustat_bound, ustat_graph_bounds, Kernel, UStatGraph, UStatInputs, UStatSpec,
};
pub use volatility::{
    kappas, t_constant, volatility_bound, volatility_estimators, VolatilityEstimates, VolatilitySpec,
};
