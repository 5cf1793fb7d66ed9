#include "apidm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "apidm/error.hpp"

namespace apidm {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ContractError("normal_quantile needs p in (0, 1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double low = 0.02425;
    double x;
    if (p < low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Halley step against the exact CDF.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

double regularized_gamma_p(double a, double x) {
    if (a <= 0.0) throw ContractError("regularized_gamma_p needs a > 0");
    if (x <= 0.0) return 0.0;
    const double log_prefix = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 1000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(log_prefix);
    }
    // Lentz continued fraction for Q(a, x).
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(log_prefix) * h;
}

double chi_square_cdf(double x, double df) {
    if (df <= 0.0) throw ContractError("chi-square needs df > 0");
    return regularized_gamma_p(df / 2.0, x / 2.0);
}

double chi_square_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0)) throw ContractError("chi_square_quantile needs p in (0, 1)");
    if (df <= 0.0) throw ContractError("chi-square needs df > 0");
    const double z = normal_quantile(p);
    const double h = 2.0 / (9.0 * df);
    double guess = df * std::pow(std::max(1.0 - h + z * std::sqrt(h), 0.01), 3.0);
    double lo = 0.0;
    double hi = std::max(guess, 1.0);
    while (chi_square_cdf(hi, df) < p) hi *= 2.0;
    if (guess > lo && guess < hi) {
        if (chi_square_cdf(guess, df) < p) lo = guess; else hi = guess;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi_square_cdf(mid, df) < p) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> rank_with_ties(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
        i = j + 1;
    }
    return ranks;
}

double friedman_critical_difference(std::size_t n, std::size_t k, double alpha, bool bonferroni) {
    double a = alpha;
    if (bonferroni) a /= static_cast<double>(k * (k - 1)) / 2.0;
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    return normal_quantile(1.0 - a / 2.0) * std::sqrt(nd * kd * (kd + 1.0) / 6.0);
}

FriedmanResult friedman_test(const std::vector<std::vector<double>>& matrix, double alpha, bool bonferroni) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("friedman_test needs alpha in (0, 1)");
    FriedmanResult r;
    r.n = matrix.size();
    if (r.n < 2) throw ContractError("friedman_test needs at least two blocks");
    r.k = matrix.front().size();
    if (r.k < 2) throw ContractError("friedman_test needs at least two treatments");
    r.alpha = alpha;
    r.bonferroni = bonferroni;
    r.rank_sums.assign(r.k, 0.0);
    for (const auto& row : matrix) {
        if (row.size() != r.k) throw ContractError("friedman_test: ragged matrix");
        const auto ranks = rank_with_ties(row);
        for (std::size_t j = 0; j < r.k; ++j) r.rank_sums[j] += ranks[j];
    }
    const double n = static_cast<double>(r.n);
    const double k = static_cast<double>(r.k);
    double squares = 0.0;
    for (double s : r.rank_sums) squares += s * s;
    r.q_observed = 12.0 / (n * k * (k + 1.0)) * squares - 3.0 * n * (k + 1.0);
    r.df = static_cast<int>(r.k) - 1;
    r.q_critical = chi_square_quantile(1.0 - alpha, r.df);
    r.p_value = 1.0 - chi_square_cdf(r.q_observed, r.df);
    r.significant = r.q_observed > r.q_critical;
    r.pairwise.assign(r.k, std::vector<double>(r.k, 0.0));
    for (std::size_t i = 0; i < r.k; ++i) {
        for (std::size_t j = 0; j < r.k; ++j) r.pairwise[i][j] = std::abs(r.rank_sums[i] - r.rank_sums[j]);
    }
    r.critical_difference = friedman_critical_difference(r.n, r.k, alpha, bonferroni);
    return r;
}

nlohmann::json friedman_to_json(const FriedmanResult& r, const std::vector<std::string>& labels) {
    auto label = [&](std::size_t i) { return i < labels.size() ? labels[i] : "col" + std::to_string(i); };
    nlohmann::json j = {{"n", r.n},
                        {"k", r.k},
                        {"alpha", r.alpha},
                        {"df", r.df},
                        {"q_observed", r.q_observed},
                        {"q_critical", r.q_critical},
                        {"p_value", r.p_value},
                        {"significant", r.significant},
                        {"critical_difference", r.critical_difference},
                        {"bonferroni", r.bonferroni}};
    for (std::size_t i = 0; i < r.k; ++i) j["rank_sums"][label(i)] = r.rank_sums[i];
    j["pairs"] = nlohmann::json::array();
    for (std::size_t a = 0; a < r.k; ++a) {
        for (std::size_t b = a + 1; b < r.k; ++b) {
            j["pairs"].push_back({{"a", label(a)},
                                  {"b", label(b)},
                                  {"difference", r.pairwise[a][b]},
                                  {"significant", r.pair_significant(a, b)}});
        }
    }
    return j;
}

}  // namespace apidm
