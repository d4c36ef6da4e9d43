#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ckn/grid.hpp"
#include "ckn/params.hpp"
#include "config.hpp"

namespace lab {

struct RunOptions {
  bool dump_trials = false;
};

/// Opens report files under the output directory; each starts with the
/// manifest line echoing the experiment and its parameters.
class Reporter {
 public:
  Reporter(std::filesystem::path dir, std::string manifest);
  std::ofstream open(const std::string& name);
  const std::vector<std::string>& files() const noexcept { return files_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string manifest_;
  std::vector<std::string> files_;
};

struct Outcome {
  bool passed = false;
  std::vector<std::string> lines;  ///< human-readable summary
};

struct Experiment {
  std::string name;
  std::string description;
  std::function<Outcome(const Config&, Reporter&, const RunOptions&)> run;
};

/// Registry in fixed order.
const std::vector<Experiment>& registry();

/// `name  description` per line.
void list_experiments(std::ostream& out);

/// Runs the experiment named by `experiment` in the config. Returns the exit
/// code: 0 pass, 2 scientific failure, 1 usage/config error.
int run_config(const Config& cfg, const RunOptions& options, std::ostream& out, std::ostream& err);

// Helpers shared by the experiment files.
ckn::WeightParams params_from(const Config& cfg);
std::string manifest_line(const Config& cfg);

Outcome run_measure_identities(const Config&, Reporter&, const RunOptions&);
Outcome run_lemma_a1_envelope(const Config&, Reporter&, const RunOptions&);
Outcome run_mms_convergence(const Config&, Reporter&, const RunOptions&);
Outcome run_harmonic_replacement(const Config&, Reporter&, const RunOptions&);
Outcome run_fundamental_solution(const Config&, Reporter&, const RunOptions&);
Outcome run_dilation_symmetry(const Config&, Reporter&, const RunOptions&);
Outcome run_ckn_suite(const Config&, Reporter&, const RunOptions&);
Outcome run_poincare_suite(const Config&, Reporter&, const RunOptions&);
Outcome run_alpha_h(const Config&, Reporter&, const RunOptions&);
Outcome run_regularity_report(const Config&, Reporter&, const RunOptions&);
Outcome run_moser_ladder(const Config&, Reporter&, const RunOptions&);
Outcome run_lemma_a2_property(const Config&, Reporter&, const RunOptions&);

}  // namespace lab
