#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace apidm {

/// Inverse of the standard normal CDF, p in (0, 1).
double normal_quantile(double p);
/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
double chi_square_cdf(double x, double df);
/// x with chi_square_cdf(x, df) = p, to about 1e-10.
double chi_square_quantile(double p, double df);

/// Ascending ranks starting at 1; tied values share the mean of their ranks.
std::vector<double> rank_with_ties(const std::vector<double>& values);

struct FriedmanResult {
    std::size_t n = 0;
    std::size_t k = 0;
    double alpha = 0.05;
    double q_observed = 0.0;
    double q_critical = 0.0;
    double p_value = 1.0;
    int df = 0;
    bool significant = false;
    std::vector<double> rank_sums;
    /// pairwise[i][j] = |R_i - R_j|.
    std::vector<std::vector<double>> pairwise;
    double critical_difference = 0.0;
    bool bonferroni = false;

    bool pair_significant(std::size_t i, std::size_t j) const { return pairwise.at(i).at(j) > critical_difference; }
};

/// Rows are blocks (paired episodes), columns are treatments (policies).
FriedmanResult friedman_test(const std::vector<std::vector<double>>& matrix, double alpha = 0.05,
                             bool bonferroni = false);

/// z_{1-a/2} * sqrt(n k (k+1) / 6); with bonferroni, a is divided by k(k-1)/2.
double friedman_critical_difference(std::size_t n, std::size_t k, double alpha, bool bonferroni = false);

nlohmann::json friedman_to_json(const FriedmanResult& r, const std::vector<std::string>& labels = {});

}  // namespace apidm
