#ifndef CVLAB_TESTS_SUPPORT_HPP
#define CVLAB_TESTS_SUPPORT_HPP

#include <cstddef>
#include <map>
#include <vector>

namespace testing {

// Upper 0.001 quantiles of the chi-square law (scipy.stats.chi2.ppf(0.999, df)).
inline double chi2_critical_999(std::size_t df) {
    static const std::map<std::size_t, double> table{{1, 10.827566170662733}, {2, 13.815510557964274},
                                                     {3, 16.26623619623813},  {5, 20.515005652432873},
                                                     {9, 27.877164871256568}, {19, 43.82019596451753},
                                                     {99, 148.23035916510173}};
    return table.at(df);
}

// Pearson statistic against equal cell probabilities.
inline double chi_square_uniform(const std::vector<std::size_t>& counts) {
    double total = 0.0;
    for (const auto c : counts) total += static_cast<double>(c);
    const double expected = total / static_cast<double>(counts.size());
    double stat = 0.0;
    for (const auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

}  // namespace testing

#endif
