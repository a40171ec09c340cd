// Library usage in miniature: one seeded run, printed round by round.

#include <cstdio>
#include <cstdlib>

#include "immersion/analysis.hpp"
#include "immersion/simulation.hpp"

int main(int argc, char** argv) {
  immersion::RunConfig cfg;
  cfg.condition = argc > 1 ? immersion::parse_condition(argv[1]) : immersion::Condition::mLAD;
  cfg.param_set = argc > 2 ? std::atoi(argv[2]) : 1;
  cfg.seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;

  const auto run = immersion::simulate_run(cfg);
  const auto rt = immersion::postprocess_probes(run.probes, cfg.env.round_s);
  std::printf("round  offline  rt_s    mean_r\n");
  for (std::size_t k = 0; k < run.offline_ratio.size(); ++k) {
    std::printf("%5zu  %7.3f  ", k + 1, run.offline_ratio[k]);
    if (rt[k]) std::printf("%6.2f  ", *rt[k]);
    else std::printf("     -  ");
    std::printf("%6.3f\n", run.mean_r[k]);
  }
  const auto c = immersion::count_probes(run.probes);
  std::printf("probes: %ld answered, %ld timeout, %ld missing\n", c.answered, c.timeout, c.missing);
}
