#include "experiments.hpp"

#include <ostream>

#include "ckn/error.hpp"

namespace lab {

Reporter::Reporter(std::filesystem::path dir, std::string manifest)
    : dir_(std::move(dir)), manifest_(std::move(manifest)) {}

std::ofstream Reporter::open(const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ckn::Error(ckn::Errc::io_error, "cannot write '" + path.string() + "'");
  out << manifest_ << '\n';
  files_.push_back(path.string());
  return out;
}

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> experiments = {
      {"measure_identities", "closed form vs shell quadrature for mu_a balls, doubling ratios",
       run_measure_identities},
      {"lemma_a1_envelope", "source/energy weight ball ratio against its analytic two-case envelope",
       run_lemma_a1_envelope},
      {"mms_convergence", "radial solver against the manufactured solution, observed order per halving",
       run_mms_convergence},
      {"harmonic_replacement", "seeded suite: idempotence, energy minimality, Pythagoras",
       run_harmonic_replacement},
      {"fundamental_solution", "weak residual of |x|^{2+2a-N} on annuli under refinement",
       run_fundamental_solution},
      {"dilation_symmetry", "residual of the rescaled constant-K radial solution under refinement",
       run_dilation_symmetry},
      {"ckn_suite", "CKN quotient over the 50-field suite, refinement stability", run_ckn_suite},
      {"poincare_suite", "weighted Poincare quotient over suite fields and balls", run_poincare_suite},
      {"alpha_h", "oscillation-decay estimate of the harmonic Hoelder exponent", run_alpha_h},
      {"regularity_report", "growth fit of a discrete solution vs the predicted Hoelder bound",
       run_regularity_report},
      {"moser_ladder", "integrability ladder and smallness threshold on a constant-K solution",
       run_moser_ladder},
      {"lemma_a2_property", "seeded property check of the iteration lemma with its proof constant",
       run_lemma_a2_property},
  };
  return experiments;
}

void list_experiments(std::ostream& out) {
  for (const auto& e : registry()) out << e.name << "  " << e.description << '\n';
}

ckn::WeightParams params_from(const Config& cfg) {
  const int N = cfg.get_int("params.N", 3);
  const double a = cfg.get_double("params.a", 0.0);
  const double b = cfg.get_double("params.b", 0.0);
  const double s = cfg.get_double("params.s", ckn::kInfinity);
  try {
    return ckn::validate(N, a, b, s);
  } catch (const ckn::Error& e) {
    throw ConfigError(std::string("invalid params block: ") + e.what());
  }
}

std::string manifest_line(const Config& cfg) {
  std::string line = "# ckn-lab";
  for (const auto& [key, value] : cfg.entries()) {
    if (key == "output.dir") continue;
    line += ' ' + key + '=' + value;
  }
  return line;
}

int run_config(const Config& cfg, const RunOptions& options, std::ostream& out, std::ostream& err) {
  std::string name;
  try {
    name = cfg.get_string("experiment");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  }
  const Experiment* exp = nullptr;
  for (const auto& e : registry()) {
    if (e.name == name) exp = &e;
  }
  if (!exp) {
    err << "config error: unknown experiment '" << name << "' (see `ckn-lab list`)\n";
    return 1;
  }
  try {
    Reporter reporter(cfg.get_string("output.dir", "out"), manifest_line(cfg));
    const Outcome outcome = exp->run(cfg, reporter, options);
    for (const auto& line : outcome.lines) out << line << '\n';
    for (const auto& f : reporter.files()) out << "wrote " << f << '\n';
    out << name << ": " << (outcome.passed ? "PASS" : "FAIL") << '\n';
    return outcome.passed ? 0 : 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ckn::Error& e) {
    err << name << ": " << ckn::to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ckn::Errc::io_error ? 1 : 2;
  }
}

}  // namespace lab
