#include "rmcst/reference_values.hpp"

namespace rmcst {

namespace {

// Super-population truths. The truncation block equals IPTW for every q.
const std::vector<ReferenceRow> kTable1 = {
    {"ow", 1, {1.026, 1.497, 1.741, 1.854, 4.183, 7.207, -0.828, -2.687, -5.465}},
    {"ow", 3, {1.025, 1.517, 1.787, 1.852, 4.176, 7.191, -0.827, -2.659, -5.404}},
    {"ow", 5, {1.026, 1.505, 1.752, 1.853, 4.178, 7.193, -0.826, -2.673, -5.442}},
    {"iptw", 1, {1.024, 1.518, 1.797, 1.853, 4.179, 7.198, -0.829, -2.661, -5.402}},
    {"iptw", 3, {1.016, 1.636, 2.099, 1.845, 4.147, 7.136, -0.829, -2.511, -5.038}},
    {"iptw", 5, {1.012, 1.693, 2.245, 1.841, 4.132, 7.107, -0.829, -2.438, -4.862}},
    {"symtrim(0.05)", 1, {1.024, 1.518, 1.797, 1.853, 4.179, 7.198, -0.829, -2.661, -5.402}},
    {"symtrim(0.05)", 3, {1.02, 1.574, 1.923, 1.85, 4.165, 7.17, -0.829, -2.591, -5.247}},
    {"symtrim(0.05)", 5, {1.023, 1.545, 1.839, 1.851, 4.17, 7.18, -0.828, -2.626, -5.341}},
    {"symtrim(0.1)", 1, {1.024, 1.518, 1.795, 1.853, 4.179, 7.199, -0.829, -2.661, -5.404}},
    {"symtrim(0.1)", 3, {1.024, 1.521, 1.786, 1.853, 4.177, 7.192, -0.828, -2.656, -5.406}},
    {"symtrim(0.1)", 5, {1.027, 1.489, 1.704, 1.854, 4.182, 7.202, -0.827, -2.694, -5.498}},
    {"symtrim(0.15)", 1, {1.025, 1.513, 1.782, 1.853, 4.181, 7.201, -0.829, -2.667, -5.419}},
    {"symtrim(0.15)", 3, {1.028, 1.477, 1.68, 1.855, 4.185, 7.209, -0.827, -2.708, -5.529}},
    {"symtrim(0.15)", 5, {1.031, 1.449, 1.613, 1.856, 4.19, 7.217, -0.825, -2.741, -5.604}},
    {"asymtrim(0)", 1, {1.024, 1.518, 1.796, 1.853, 4.179, 7.198, -0.829, -2.661, -5.402}},
    {"asymtrim(0)", 3, {1.016, 1.635, 2.096, 1.845, 4.147, 7.137, -0.829, -2.512, -5.041}},
    {"asymtrim(0)", 5, {1.012, 1.688, 2.227, 1.841, 4.134, 7.111, -0.829, -2.446, -4.884}},
    {"asymtrim(0.01)", 1, {1.026, 1.489, 1.718, 1.855, 4.186, 7.212, -0.829, -2.697, -5.494}},
    {"asymtrim(0.01)", 3, {1.022, 1.531, 1.815, 1.852, 4.175, 7.19, -0.83, -2.644, -5.375}},
    {"asymtrim(0.01)", 5, {1.023, 1.514, 1.769, 1.853, 4.177, 7.194, -0.83, -2.663, -5.425}},
    {"asymtrim(0.05)", 1, {1.03, 1.436, 1.591, 1.857, 4.196, 7.231, -0.828, -2.76, -5.64}},
    {"asymtrim(0.05)", 3, {1.03, 1.428, 1.572, 1.857, 4.195, 7.229, -0.827, -2.767, -5.656}},
    {"asymtrim(0.05)", 5, {1.033, 1.396, 1.504, 1.858, 4.2, 7.238, -0.825, -2.804, -5.733}},
    {"truncate(0.025)", 1, {1.024, 1.518, 1.797, 1.853, 4.179, 7.198, -0.829, -2.661, -5.402}},
    {"truncate(0.05)", 1, {1.024, 1.518, 1.797, 1.853, 4.179, 7.198, -0.829, -2.661, -5.402}},
    {"truncate(0.1)", 1, {1.024, 1.518, 1.797, 1.853, 4.179, 7.198, -0.829, -2.661, -5.402}},
    {"truncate(0.025)", 3, {1.016, 1.636, 2.099, 1.845, 4.147, 7.136, -0.829, -2.511, -5.038}},
    {"truncate(0.05)", 3, {1.016, 1.636, 2.099, 1.845, 4.147, 7.136, -0.829, -2.511, -5.038}},
    {"truncate(0.1)", 3, {1.016, 1.636, 2.099, 1.845, 4.147, 7.136, -0.829, -2.511, -5.038}},
    {"truncate(0.025)", 5, {1.012, 1.693, 2.245, 1.841, 4.132, 7.107, -0.829, -2.438, -4.862}},
    {"truncate(0.05)", 5, {1.012, 1.693, 2.245, 1.841, 4.132, 7.107, -0.829, -2.438, -4.862}},
    {"truncate(0.1)", 5, {1.012, 1.693, 2.245, 1.841, 4.132, 7.107, -0.829, -2.438, -4.862}},
};

// Monte Carlo variance of IPTW over that of each scheme, n=1000, 1000 replications.
const std::vector<ReferenceRow> kTable3 = {
    {"ow", 1, {1.0, 1.08, 1.23, 1.0, 1.05, 1.07, 1.0, 1.08, 1.1}},
    {"ow", 3, {2.21, 3.6, 5.49, 1.5, 1.72, 1.7, 2.13, 2.97, 3.13}},
    {"ow", 5, {5.72, 9.71, 14.79, 3.36, 3.05, 2.65, 5.42, 7.02, 6.83}},
    {"iptw", 1, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}},
    {"iptw", 3, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}},
    {"iptw", 5, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}},
    {"symtrim(0.05)", 1, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}},
    {"symtrim(0.05)", 3, {2.03, 2.58, 3.15, 1.29, 1.35, 1.32, 1.91, 2.18, 2.16}},
    {"symtrim(0.05)", 5, {4.56, 6.35, 7.91, 2.93, 2.52, 2.07, 4.43, 4.93, 4.56}},
    {"symtrim(0.1)", 1, {1.0, 1.02, 1.03, 1.0, 1.0, 1.0, 1.0, 1.01, 1.0}},
    {"symtrim(0.1)", 3, {1.94, 2.91, 4.21, 1.27, 1.45, 1.48, 1.88, 2.51, 2.66}},
    {"symtrim(0.1)", 5, {4.62, 7.43, 10.98, 2.59, 2.36, 2.06, 4.16, 5.1, 5.01}},
    {"symtrim(0.15)", 1, {1.01, 1.04, 1.09, 0.98, 0.99, 0.99, 1.0, 1.03, 1.02}},
    {"symtrim(0.15)", 3, {1.64, 2.74, 4.62, 1.2, 1.47, 1.49, 1.59, 2.29, 2.63}},
    {"symtrim(0.15)", 5, {4.31, 7.61, 12.49, 2.25, 2.15, 1.94, 3.87, 5.2, 5.12}},
    {"asymtrim(0)", 1, {0.98, 1.0, 1.02, 1.0, 0.99, 1.0, 0.98, 0.99, 0.99}},
    {"asymtrim(0)", 3, {0.97, 1.06, 1.1, 0.95, 0.95, 0.95, 0.91, 0.96, 0.98}},
    {"asymtrim(0)", 5, {0.92, 0.94, 0.94, 0.92, 0.92, 0.91, 0.86, 0.86, 0.85}},
    {"asymtrim(0.01)", 1, {0.87, 0.92, 1.06, 0.96, 1.03, 1.05, 0.89, 0.98, 1.04}},
    {"asymtrim(0.01)", 3, {1.4, 2.04, 2.95, 1.2, 1.29, 1.31, 1.35, 1.73, 1.97}},
    {"asymtrim(0.01)", 5, {2.78, 4.48, 6.47, 2.69, 2.36, 1.91, 2.69, 3.49, 3.66}},
    {"asymtrim(0.05)", 1, {0.68, 0.77, 1.03, 0.8, 0.91, 0.99, 0.71, 0.86, 0.99}},
    {"asymtrim(0.05)", 3, {1.2, 2.28, 4.3, 0.99, 1.14, 1.21, 1.17, 1.77, 2.12}},
    {"asymtrim(0.05)", 5, {2.75, 5.72, 11.24, 1.68, 1.53, 1.46, 2.57, 3.83, 3.91}},
    {"truncate(0.025)", 1, {1.01, 1.04, 1.09, 1.0, 1.02, 1.02, 1.01, 1.03, 1.04}},
    {"truncate(0.025)", 3, {1.43, 1.53, 1.63, 1.14, 1.14, 1.1, 1.37, 1.39, 1.37}},
    {"truncate(0.025)", 5, {1.15, 1.18, 1.17, 1.29, 1.1, 1.04, 1.17, 1.16, 1.13}},
    {"truncate(0.05)", 1, {1.02, 1.07, 1.15, 1.0, 1.04, 1.05, 1.02, 1.06, 1.07}},
    {"truncate(0.05)", 3, {1.73, 1.94, 2.15, 1.3, 1.3, 1.22, 1.64, 1.71, 1.65}},
    {"truncate(0.05)", 5, {1.54, 1.64, 1.64, 1.52, 1.24, 1.13, 1.53, 1.53, 1.45}},
    {"truncate(0.1)", 1, {1.03, 1.12, 1.25, 1.01, 1.06, 1.09, 1.03, 1.1, 1.13}},
    {"truncate(0.1)", 3, {2.21, 2.69, 3.2, 1.48, 1.55, 1.46, 2.06, 2.28, 2.22}},
    {"truncate(0.1)", 5, {2.84, 3.23, 3.42, 2.14, 1.76, 1.49, 2.74, 2.76, 2.55}},
};

// Closed-form Wald coverage (%), n=1000, 1000 replications.
const std::vector<ReferenceRow> kTable4 = {
    {"ow", 1, {96.8, 97.6, 97.6, 94.4, 94.6, 93.0, 96.7, 96.5, 94.9}},
    {"ow", 3, {96.6, 96.4, 96.3, 94.8, 94.5, 94.7, 96.0, 96.1, 95.7}},
    {"ow", 5, {95.4, 96.4, 95.5, 92.8, 95.3, 93.6, 94.7, 95.0, 94.8}},
    {"iptw", 1, {97.3, 97.5, 97.6, 94.9, 94.3, 92.2, 96.4, 96.3, 94.6}},
    {"iptw", 3, {94.5, 91.8, 87.1, 93.0, 92.4, 90.6, 92.6, 90.3, 86.7}},
    {"iptw", 5, {80.1, 75.3, 70.1, 87.8, 87.3, 84.9, 77.6, 73.5, 74.5}},
    {"symtrim(0.05)", 1, {97.2, 97.5, 97.6, 95.0, 94.4, 92.2, 96.4, 96.3, 94.6}},
    {"symtrim(0.05)", 3, {97.0, 96.2, 95.1, 93.1, 93.0, 92.1, 96.6, 94.8, 93.4}},
    {"symtrim(0.05)", 5, {95.8, 95.7, 94.9, 91.8, 93.6, 92.6, 95.2, 94.4, 92.5}},
    {"symtrim(0.1)", 1, {97.2, 97.6, 97.8, 94.9, 94.4, 92.3, 96.5, 96.5, 94.6}},
    {"symtrim(0.1)", 3, {96.3, 96.4, 95.2, 93.3, 93.6, 94.2, 95.8, 95.4, 95.6}},
    {"symtrim(0.1)", 5, {95.1, 94.2, 93.4, 91.8, 93.4, 92.0, 94.8, 93.1, 92.9}},
    {"symtrim(0.15)", 1, {97.1, 97.8, 97.5, 94.8, 94.5, 92.3, 96.9, 97.4, 94.6}},
    {"symtrim(0.15)", 3, {94.3, 94.7, 94.0, 94.4, 95.0, 94.8, 94.9, 94.7, 94.6}},
    {"symtrim(0.15)", 5, {94.7, 94.6, 94.9, 92.3, 94.4, 92.1, 94.3, 93.8, 93.4}},
    {"asymtrim(0)", 1, {97.1, 97.6, 97.5, 94.7, 94.2, 92.6, 96.2, 96.3, 95.0}},
    {"asymtrim(0)", 3, {91.2, 92.4, 88.0, 89.0, 89.6, 89.3, 88.7, 88.0, 84.1}},
    {"asymtrim(0)", 5, {81.5, 80.9, 76.6, 77.1, 78.5, 81.4, 77.9, 72.0, 69.7}},
    {"asymtrim(0.01)", 1, {95.6, 96.2, 96.4, 94.7, 94.3, 92.7, 94.9, 95.7, 94.9}},
    {"asymtrim(0.01)", 3, {92.0, 93.5, 91.8, 92.6, 91.4, 92.7, 91.5, 90.7, 90.6}},
    {"asymtrim(0.01)", 5, {88.4, 89.3, 89.4, 91.9, 93.0, 90.6, 88.8, 87.6, 88.4}},
    {"asymtrim(0.05)", 1, {94.4, 94.3, 94.7, 94.4, 94.0, 93.5, 94.2, 93.6, 94.3}},
    {"asymtrim(0.05)", 3, {91.7, 91.8, 92.7, 93.9, 94.2, 94.0, 91.4, 91.0, 91.7}},
    {"asymtrim(0.05)", 5, {90.1, 91.2, 93.4, 91.2, 92.6, 92.4, 91.2, 90.9, 92.2}},
    {"truncate(0.025)", 1, {97.1, 96.9, 97.8, 94.8, 94.9, 92.5, 96.4, 96.5, 94.8}},
    {"truncate(0.025)", 3, {95.4, 92.3, 88.3, 93.7, 93.1, 91.3, 94.1, 92.0, 89.4}},
    {"truncate(0.025)", 5, {80.6, 75.8, 70.5, 87.9, 87.4, 84.9, 78.1, 73.8, 74.6}},
    {"truncate(0.05)", 1, {96.8, 96.5, 96.7, 94.8, 95.0, 92.6, 96.7, 96.3, 94.6}},
    {"truncate(0.05)", 3, {94.6, 92.1, 88.4, 94.3, 93.8, 91.2, 94.0, 92.5, 90.3}},
    {"truncate(0.05)", 5, {82.6, 77.7, 72.9, 89.4, 89.1, 85.8, 79.9, 76.7, 77.3}},
    {"truncate(0.1)", 1, {94.1, 93.8, 94.4, 95.0, 95.2, 93.0, 95.3, 95.9, 95.3}},
    {"truncate(0.1)", 3, {90.2, 86.3, 82.1, 95.2, 94.2, 91.5, 91.9, 90.8, 91.6}},
    {"truncate(0.1)", 5, {83.2, 77.9, 72.7, 93.0, 92.8, 88.5, 83.2, 81.0, 83.1}},
};

// n=250, outcome model without the PS term, 200 bootstrap resamples. Bias is displayed x100.
const std::vector<Table5Row> kTable5 = {
    {"bias", "ow", 1, {0.0, 0.37, 1.83, 0.02, 0.15, 0.37, 0.11, -0.39, -1.66}},
    {"bias", "ow", 3, {0.09, 0.52, 2.18, 0.17, 0.33, 0.58, 0.63, -0.15, -1.57}},
    {"bias", "ow", 5, {0.16, 0.89, 3.1, 0.2, 0.36, 0.76, 0.43, -0.98, -2.33}},
    {"bias", "iptw", 1, {-0.02, 0.38, 1.91, 0.01, 0.1, 0.21, 0.12, -0.57, -2.19}},
    {"bias", "iptw", 3, {-0.41, -0.46, 0.58, 0.08, 0.11, -0.18, 2.73, 1.48, -1.25}},
    {"bias", "iptw", 5, {-1.51, -2.85, -2.92, -0.22, -0.37, -0.8, 6.75, 5.6, 2.47}},
    {"efficiency", "ow", 1, {1.0, 1.0, 1.03, 1.05, 1.05, 1.05, 1.0, 1.02, 1.05}},
    {"efficiency", "ow", 3, {1.6, 1.66, 1.91, 1.64, 1.52, 1.38, 1.64, 1.61, 1.65}},
    {"efficiency", "ow", 5, {1.95, 2.14, 2.58, 2.02, 1.8, 1.49, 2.0, 1.93, 1.92}},
    {"efficiency", "iptw", 1, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}},
    {"efficiency", "iptw", 3, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}},
    {"efficiency", "iptw", 5, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}},
    {"coverage_closed", "ow", 1, {94.6, 95.3, 96.1, 93.6, 94.5, 93.1, 95.5, 94.8, 94.2}},
    {"coverage_closed", "ow", 3, {93.7, 92.1, 91.3, 90.8, 92.3, 91.6, 94.6, 93.1, 90.8}},
    {"coverage_closed", "ow", 5, {92.4, 92.3, 92.3, 89.2, 91.5, 90.9, 93.8, 92.1, 91.5}},
    {"coverage_closed", "iptw", 1, {96.3, 96.3, 96.1, 93.6, 93.2, 92.8, 95.5, 94.4, 94.5}},
    {"coverage_closed", "iptw", 3, {93.7, 91.6, 88.3, 87.0, 88.1, 87.4, 91.4, 88.6, 86.5}},
    {"coverage_closed", "iptw", 5, {90.2, 84.5, 79.3, 84.9, 86.2, 84.7, 87.1, 83.9, 84.7}},
    {"coverage_bootstrap", "ow", 1, {94.6, 95.2, 94.6, 93.6, 94.5, 93.9, 95.7, 94.4, 94.2}},
    {"coverage_bootstrap", "ow", 3, {93.9, 92.6, 91.0, 91.8, 92.8, 93.0, 95.1, 93.1, 91.5}},
    {"coverage_bootstrap", "ow", 5, {93.5, 93.7, 92.2, 90.4, 92.7, 93.2, 95.5, 92.9, 92.7}},
    {"coverage_bootstrap", "iptw", 1, {95.4, 95.5, 94.8, 93.6, 93.7, 93.3, 95.4, 94.4, 94.9}},
    {"coverage_bootstrap", "iptw", 3, {94.0, 91.4, 88.3, 88.6, 90.2, 90.6, 93.7, 90.1, 89.3}},
    {"coverage_bootstrap", "iptw", 5, {91.6, 86.7, 81.9, 88.7, 91.2, 89.9, 90.9, 88.3, 88.5}},
};

}  // namespace
const std::vector<ReferenceRow>& reference_table(int table) {
  static const std::vector<ReferenceRow> empty;
  switch (table) {
    case 1: return kTable1;
    case 3: return kTable3;
    case 4: return kTable4;
    default: return empty;
  }
}

const std::vector<Table5Row>& reference_table5() { return kTable5; }

std::optional<double> reference_value(int table, const WeightScheme& scheme, double gamma, double L, Target target,
                                      const std::string& part) {
  int col = L == 2.0 ? 0 : L == 5.0 ? 1 : L == 10.0 ? 2 : -1;
  if (col < 0) return std::nullopt;
  col += 3 * static_cast<int>(target);
  const std::string label = scheme.label();
  if (table == 5) {
    for (const auto& r : kTable5) {
      if (part == r.part && label == r.scheme && gamma == r.gamma) return r.values[static_cast<std::size_t>(col)];
    }
    return std::nullopt;
  }
  for (const auto& r : reference_table(table)) {
    if (label == r.scheme && gamma == r.gamma) return r.values[static_cast<std::size_t>(col)];
  }
  return std::nullopt;
}

}  // namespace rmcst
