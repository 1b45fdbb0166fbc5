#include <catch_amalgamated.hpp>

#include "rmcst/pipeline.hpp"
#include "rmcst/simulation.hpp"

using namespace rmcst;
using Catch::Matchers::WithinAbs;

TEST_CASE("overlap-weighted pipeline on a million units at gamma 1", "[slow]") {
  SimulationScenario sc;
  sc.gamma = 1.0;
  sc.n = 1'000'000;
  auto sim = generate_dataset(sc, 0);
  std::vector<double> L{5.0};
  auto an = analyze(sim.data, WeightScheme::overlap(), L, false);
  CHECK_THAT(an.results[0].delta, WithinAbs(-2.687, 0.02));
}
