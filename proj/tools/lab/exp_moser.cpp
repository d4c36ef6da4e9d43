#include <cmath>
#include <json.hpp>

#include "ckn/error.hpp"
#include "ckn/format.hpp"
#include "ckn/inequality.hpp"
#include "ckn/moser.hpp"
#include "ckn/rng.hpp"
#include "ckn/solver.hpp"
#include "experiments.hpp"

namespace lab {

using ckn::format_double;

Outcome run_moser_ladder(const Config& cfg, Reporter& rep, const RunOptions&) {
  const ckn::WeightParams params = params_from(cfg);
  const int n = cfg.get_int("grid.n", 2048);
  const double r_outer = cfg.get_double("grid.r_max", 1.0);
  const int k0 = ckn::k0_threshold(params);
  const int k_stop = cfg.get_int("ladder.k_stop", k0 + 2);
  const double margin0 = cfg.get_double("ladder.margin0", 0.2 * r_outer);
  const double residual_tol = cfg.get_double("ladder.residual_tol", ckn::kLadderResidualTol);
  const double interp_tol = cfg.get_double("ladder.interpolation_tol", 0.01);
  const bool have_constant = cfg.has("moser.ckn_constant");
  double ckn_constant = cfg.get_double("moser.ckn_constant", 0.0);
  const int suite_cells = cfg.get_int("moser.suite_cells", 16);
  const std::uint64_t seed = have_constant && !cfg.has("seed") ? 0 : cfg.get_seed();
  cfg.check_unused();
  if (k_stop < k0) throw ConfigError("key 'ladder.k_stop': must be at least k0 = " + std::to_string(k0));

  const auto disc = ckn::make_discretization(params, ckn::RadialGrid::make(0.0, r_outer, n));
  const ckn::ConstantKSolution sol = ckn::constant_k_solution(params);
  const auto u = ckn::DiscreteField::sample_radial(disc, [&](double r) { return sol.u(r); }, "u");
  const auto K = ckn::DiscreteField::constant(disc, sol.K, "K");
  const ckn::LadderReport ladder = ckn::run_ladder(u, K, k_stop, margin0, residual_tol, interp_tol);

  const auto expected = ckn::moser_ladder(params, k_stop);
  bool q_exact = expected.size() == ladder.states.size();
  for (std::size_t k = 0; q_exact && k < expected.size(); ++k) q_exact = ladder.states[k].q == expected[k];

  auto out = rep.open("ladder.csv");
  out << "k,q,norm_q,margin,nodes\n";
  for (const auto& st : ladder.states) {
    out << st.k << ',' << format_double(st.q) << ',' << format_double(st.norm_q) << ',' << format_double(st.margin)
        << ',' << st.nodes << '\n';
  }
  auto interp = rep.open("ladder_interpolation.csv");
  interp << "k,lhs,rhs,ok\n";
  for (const auto& c : ladder.checks) {
    interp << c.k << ',' << format_double(c.lhs) << ',' << format_double(c.rhs) << ',' << (c.ok ? 1 : 0) << '\n';
  }

  if (!have_constant) {
    if (params.N() != 3) throw ConfigError("key 'moser.ckn_constant': required when N != 3");
    const auto box = ckn::make_discretization(
        params, ckn::BoxGrid({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, {suite_cells, suite_cells, suite_cells}));
    const double m = ckn::ckn_suite(box, seed).max_ratio;
    ckn_constant = m * m;
  }
  std::vector<double> vv(u.size());
  for (std::size_t i = 0; i < vv.size(); ++i) vv[i] = sol.K * std::pow(std::abs(u[i]), params.p() - 2.0);
  const ckn::DiscreteField V(disc, std::move(vv), "V");
  const auto ell = ckn::find_ell(V, ckn_constant);

  nlohmann::ordered_json j;
  j["p"] = params.p();
  j["k0"] = ladder.k0;
  j["k_stop"] = k_stop;
  j["q_matches_ladder"] = q_exact;
  j["all_finite"] = ladder.all_finite;
  j["interpolation_ok"] = ladder.interpolation_ok;
  j["relative_residual"] = ladder.relative_residual;
  j["ckn_constant"] = ckn_constant;
  j["ell_found"] = ell.has_value();
  if (ell) {
    const ckn::PotentialSplit split = ckn::smallness_check(V, *ell, ckn_constant);
    j["ell"] = *ell;
    j["tail_mass"] = split.tail_mass;
    j["bound_required"] = split.bound_required;
  }
  const bool pass = q_exact && ladder.all_finite && ladder.interpolation_ok;
  j["pass"] = pass;
  auto summary = rep.open("moser_report.json");
  summary << j.dump(2) << '\n';

  Outcome o;
  o.passed = pass;
  o.lines.push_back("k0=" + std::to_string(ladder.k0) + ", ladder through k=" + std::to_string(k_stop) +
                    (ladder.all_finite ? ", all norms finite" : ", norm overflow"));
  o.lines.push_back(std::string("interpolation checks ") + (ladder.interpolation_ok ? "ok" : "FAILED") +
                    ", relative residual " + format_double(ladder.relative_residual));
  o.lines.push_back(ell ? "smallness threshold ell=" + format_double(*ell) : std::string("no admissible ell"));
  return o;
}

Outcome run_lemma_a2_property(const Config& cfg, Reporter& rep, const RunOptions& options) {
  const ckn::WeightParams params = params_from(cfg);
  const std::uint64_t seed = cfg.get_seed();
  const int envelopes = cfg.get_int("lemma_a2.envelopes", 20);
  const int trials = cfg.get_int("lemma_a2.trials", 1000);
  const double R = cfg.get_double("lemma_a2.R", 1.0);
  const double offset = cfg.get_double("lemma_a2.offset", 0.5);
  cfg.check_unused();
  if (envelopes < 1 || trials < 1) throw ConfigError("key 'lemma_a2.trials': counts must be positive");

  auto out = rep.open("lemma_a2.csv");
  out << "envelope,A1,A2,alpha,beta,gamma,tau,doubling,constant,center_offset,trials,violations,"
         "hypothesis_failures,max_ratio\n";
  Outcome o;
  o.passed = true;
  int total_violations = 0;
  int total_hyp = 0;
  double worst = 0.0;
  for (int e = 0; e < envelopes; ++e) {
    ckn::Rng rng(ckn::derive_seed(seed, static_cast<std::uint64_t>(e)));
    const ckn::IterationEnvelope env = ckn::random_envelope(rng);
    // Even envelopes use centered balls, odd ones balls off the origin.
    const ckn::MeasureFamily family{params, e % 2 == 0 ? 0.0 : offset};
    const ckn::LemmaA2Report r = ckn::lemma_a2_property_check(
        env, family, R, trials, ckn::derive_seed(seed, 1000 + static_cast<std::uint64_t>(e)));
    const auto& v = r.envelope;
    out << e << ',' << format_double(v.A1) << ',' << format_double(v.A2) << ',' << format_double(v.alpha) << ','
        << format_double(v.beta) << ',' << format_double(v.gamma) << ',' << format_double(v.tau) << ','
        << format_double(v.doubling) << ',' << format_double(v.constant) << ',' << format_double(family.center_offset)
        << ',' << r.trials << ',' << r.violations << ',' << r.hypothesis_failures << ','
        << format_double(r.max_ratio) << '\n';
    if (options.dump_trials) {
      auto dump = rep.open("lemma_a2_trials_" + std::to_string(e) + ".csv");
      ckn::write_trials_csv(dump, r.records);
    }
    total_violations += r.violations;
    total_hyp += r.hypothesis_failures;
    worst = std::max(worst, r.max_ratio);
    o.passed = o.passed && r.pass();
  }
  o.lines.push_back(std::to_string(envelopes) + " envelopes x " + std::to_string(trials) +
                    " trials: violations=" + std::to_string(total_violations) +
                    " hypothesis failures=" + std::to_string(total_hyp) + " max ratio=" + format_double(worst));
  return o;
}

}  // namespace lab
