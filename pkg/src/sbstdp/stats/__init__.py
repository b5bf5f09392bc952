from sbstdp.stats.anova import (
    AnovaRow,
    AnovaTable,
    FactorialSample,
    InsufficientData,
    StatsError,
    UnbalancedDesign,
    WelchResult,
    ZeroVarianceGroup,
    anova_from_sums,
    epsilon_squared,
    one_way_anova,
    two_way_anova,
    welch_anova,
)
from sbstdp.stats.checks import (
    BartlettResult,
    Comparison,
    DegenerateSample,
    KsResult,
    ZeroVariance,
    bartlett,
    cohens_d,
    ks_normality,
    pairwise_comparisons,
    welch_t,
)
from sbstdp.stats.special import betainc, chi2_sf, f_sf, gammainc, gammaincc, kolmogorov_sf

__all__ = [
    "AnovaRow", "AnovaTable", "FactorialSample", "InsufficientData", "StatsError",
    "UnbalancedDesign", "WelchResult", "ZeroVarianceGroup", "anova_from_sums", "epsilon_squared",
    "one_way_anova", "two_way_anova", "welch_anova", "BartlettResult", "Comparison", "DegenerateSample",
    "KsResult", "ZeroVariance", "bartlett", "cohens_d", "ks_normality", "pairwise_comparisons", "welch_t",
    "betainc", "chi2_sf", "f_sf", "gammainc", "gammaincc", "kolmogorov_sf",
]
