#include "screening/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>

#include "screening/competition.hpp"
#include "screening/errors.hpp"
#include "screening/ironing.hpp"
#include "screening/monopoly.hpp"
#include "screening/noscreening.hpp"
#include "screening/oracle.hpp"
#include "screening/singleagent.hpp"

namespace screening {

namespace fs = std::filesystem;

std::optional<Command> parse_command(const std::string& name) {
  if (name == "solve") return Command::Solve;
  if (name == "figures") return Command::Figures;
  if (name == "verify") return Command::Verify;
  if (name == "compete") return Command::Compete;
  if (name == "sweep") return Command::Sweep;
  if (name == "iron") return Command::Iron;
  return std::nullopt;
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Solve: return "solve";
    case Command::Figures: return "figures";
    case Command::Verify: return "verify";
    case Command::Compete: return "compete";
    case Command::Sweep: return "sweep";
    case Command::Iron: return "iron";
  }
  return "?";
}

namespace {

std::vector<Real> linspace(Real a, Real b, int n) {
  std::vector<Real> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = i + 1 == n ? b : a + (b - a) * i / (n - 1);
  return v;
}

/// Collects artifacts as they are written.
struct Writer {
  fs::path dir;
  CommandResult result;

  void csv(const std::string& name, CsvTable table) {
    write_csv(dir / name, table);
    result.files.push_back(dir / name);
  }
  void json(const std::string& name, const Json& doc) {
    write_json(dir / name, doc);
    result.files.push_back(dir / name);
  }
};

Json intervals_json(const std::vector<Interval>& v) {
  Json out = Json::array();
  for (const auto& i : v) out.push_back(Json::array({i.lo, i.hi}));
  return out;
}

Real oracle_q_hi(const RunConfig& cfg, Real q_star) {
  return cfg.numeric.oracle_q_hi > 0.0 ? cfg.numeric.oracle_q_hi : 1.5 * q_star;
}

// Distance of each DP quality outside the analytic rule's range over its type
// cell; the oracle counts as agreeing when this is at most one quality step.
Real cell_excess(const DiscreteModel& model, const DiscreteSolution& sol, const std::function<Real(Real)>& rule) {
  const Eigen::Index m = model.type_count();
  Real worst = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Real lo = rule(static_cast<Real>(i) / m);
    const Real hi = rule(static_cast<Real>(i + 1) / m);
    const Real q = model.qualities[sol.allocation[i]];
    worst = std::max({worst, lo - q, q - hi});
  }
  return worst;
}

struct Check {
  std::string name;
  bool passed;
  Real value;
  Real bound;
};

Json checks_json(const std::vector<Check>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks)
    arr.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"bound", c.bound}});
  return arr;
}

CommandResult not_regular(const std::string& cmd) {
  return {kExitSolver, cmd + ": virtual value is not monotone; run the iron command instead", {}};
}

void oracle_checks(const RunConfig& cfg, const ModelPrimitives& prim, Real q_star, Real cap,
                   const std::function<Real(Real)>& rule, std::vector<Check>& checks) {
  const auto model = make_discrete_model(prim, cfg.numeric.oracle_types, cfg.numeric.oracle_qualities, 0.0,
                                         oracle_q_hi(cfg, q_star));
  const auto dp = brute_monopoly(model);
  const Real dq = model.quality_step();
  const Real cap_gap = std::abs(dp.cap - cap);
  checks.push_back({"oracle_cap_within_cell", cap_gap <= dq, cap_gap, dq});
  const Real excess = cell_excess(model, dp, rule);
  checks.push_back({"oracle_allocation_within_cell", excess <= dq, excess, dq});
  const Real analytic = discrete_value(prim, model, rule, cap);
  const Real bound = one_cell_bound(model);
  const Real gap = std::abs(dp.value - analytic);
  checks.push_back({"oracle_value_sandwich", gap <= bound, gap, bound});
}

std::vector<Check> regular_checks(const RunConfig& cfg) {
  const auto& prim = cfg.primitives;
  const Monopoly mono(prim, cfg.numeric.root_tol);
  const auto& sol = mono.solution();
  const Real q_star = mono.efficient_quality();
  const Real cap = sol.cap + cfg.command.cap_offset;
  const auto& c = prim.cost();
  auto profit = [&](Real q) { return mono.revenue(q) - c.value(q); };
  std::vector<Check> checks;

  checks.push_back({"cap_below_efficient", cap < q_star, cap, q_star});

  // No grid point or nearby perturbation may beat the reported cap.
  const Real at_cap = profit(cap);
  Real best_gain = -std::numeric_limits<Real>::infinity();
  for (Real q : linspace(0.0, 1.5 * q_star, 2001)) best_gain = std::max(best_gain, profit(q) - at_cap);
  for (Real h : {1e-3, 1e-4}) {
    best_gain = std::max(best_gain, profit(cap + h * q_star) - at_cap);
    if (cap - h * q_star >= 0.0) best_gain = std::max(best_gain, profit(cap - h * q_star) - at_cap);
  }
  checks.push_back({"q_M_optimality", best_gain <= 1e-9, best_gain, 1e-9});
  if (!sol.full_bunching) {
    const Real foc = std::abs(mono.marginal_revenue(cap) - c.derivative(cap));
    const Real tol = 1e-8 * std::max(1.0, c.derivative(cap));
    checks.push_back({"q_M_first_order", foc <= tol, foc, tol});
  }

  Real mr_excess = -std::numeric_limits<Real>::infinity();
  for (Real q : linspace(q_star / 256.0, 1.5 * q_star, 256))
    mr_excess = std::max(mr_excess, mono.marginal_revenue(q) - prim.utility().derivative(q) - prim.mean_type());
  checks.push_back({"marginal_revenue_below_social_value", mr_excess < 0.0, mr_excess, 0.0});

  auto rule = [&](Real t) { return mono.beta_alloc(t).capped(cap); };
  Real drop = 0.0;
  Real prev = rule(0.0);
  for (Real t : linspace(0.0, 1.0, 1001)) {
    const Real q = rule(t);
    drop = std::max(drop, prev - q);
    prev = q;
  }
  checks.push_back({"allocation_monotone", drop <= 0.0, drop, 0.0});

  const auto audit = ic_audit(prim, [&](Real t) { return mono.monopoly_allocation(t); },
                              [&](Real t) { return mono.transfer(t); }, cfg.numeric.audit_pairs);
  checks.push_back({"ic_participation_audit", audit.worst() <= 1e-8, audit.worst(), 1e-8});

  oracle_checks(cfg, prim, q_star, cap, rule, checks);

  const NoScreening ns(mono, cfg.numeric.root_tol);
  const auto& nss = ns.solution();
  // With full bunching or linear utility the seller cannot profit from damaging, so both problems coincide.
  if (sol.full_bunching || prim.utility().is_linear()) {
    const Real gap = std::abs(nss.cap - sol.cap);
    checks.push_back({"no_screen_caps_agree", gap <= 1e-8, gap, 1e-8});
  } else {
    checks.push_back({"no_screen_cap_below_q_M", nss.cap < sol.cap, nss.cap, sol.cap});
    checks.push_back({"no_screen_cutoff_below_b", nss.cutoff < sol.marginally_bunched, nss.cutoff,
                      sol.marginally_bunched});
  }

  const Real x = std::min(cfg.command.subgame_x, sol.cap);
  const Real y = std::min(cfg.command.subgame_y, x);
  const auto xy = xy_second_best_check(mono, x, y, cfg.numeric.oracle_types, cfg.numeric.oracle_qualities);
  checks.push_back({"second_best_identity", std::abs(xy.gap) <= xy.bound, std::abs(xy.gap), xy.bound});
  return checks;
}

std::vector<Check> ironed_checks(const RunConfig& cfg) {
  const auto& prim = cfg.primitives;
  const IronedMonopoly im(prim, cfg.numeric.ironing_cells);
  const Real q_star = im.efficient_quality();
  const Real cap = im.cap() + cfg.command.cap_offset;
  std::vector<Check> checks;

  Real drop = 0.0;
  const auto& types = im.envelope().types;
  for (Eigen::Index i = 0; i + 1 < types.size(); ++i) {
    const Real a = im.ironed_phi(0.5 * (types[i] + types[i + 1]));
    const Real b = im.ironed_phi(0.5 * (types[i + 1] + (i + 2 < types.size() ? types[i + 2] : 1.0)));
    drop = std::max(drop, a - b);
  }
  checks.push_back({"ironed_virtual_value_nondecreasing", drop <= 0.0, drop, 0.0});

  // Reported intervals are padded by one quantile cell; pooling is checked strictly inside.
  Real spread = 0.0;
  const Real pad = 2.0 / static_cast<Real>(im.envelope().cells());
  for (const auto& iv : im.solution().ironed_quantiles) {
    if (iv.hi - iv.lo <= 2.0 * pad) continue;
    Real lo = std::numeric_limits<Real>::infinity();
    Real hi = -lo;
    for (Real u : linspace(iv.lo + pad, iv.hi - pad, 65)) {
      const Real t = prim.distribution().quantile(u);
      const Real q = im.beta(t).capped(cap);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    spread = std::max(spread, hi - lo);
  }
  checks.push_back({"pooling_on_ironed_intervals", spread <= 1e-12, spread, 1e-12});
  checks.push_back({"cap_below_efficient", cap < q_star, cap, q_star});

  oracle_checks(cfg, prim, q_star, cap, [&](Real t) { return im.beta(t).capped(cap); }, checks);
  return checks;
}

}  // namespace

CommandResult cmd_solve(const RunConfig& cfg, const fs::path& out) {
  const auto& prim = cfg.primitives;
  if (!prim.regular()) return not_regular("solve");
  const Monopoly mono(prim, cfg.numeric.root_tol);
  const auto& sol = mono.solution();
  Writer w{out, {}};

  Json summary;
  summary["q_star"] = mono.efficient_quality();
  summary["q_M"] = sol.cap;
  summary["marginally_bunched"] = sol.marginally_bunched;
  summary["beta_at_zero"] = mono.beta_at_zero();
  summary["virtual_value_root"] = prim.virtual_value_root();
  summary["revenue"] = sol.revenue_at_cap;
  summary["cost"] = sol.cost_at_cap;
  summary["profit"] = sol.profit;
  summary["full_bunching"] = sol.full_bunching;
  summary["regular"] = prim.regular();
  if (prim.utility().is_linear()) {
    // Constant marginal revenue S(b) b with b the zero of the virtual value.
    const Real b = prim.virtual_value_root();
    summary["q_M_closed_form"] = prim.cost().derivative_inverse(prim.distribution().survival(b) * b);
  }
  const NoScreening ns(mono, cfg.numeric.root_tol);
  const auto& nss = ns.solution();
  summary["no_screening"] = {{"cap", nss.cap}, {"cutoff", nss.cutoff}, {"price", nss.price}, {"profit", nss.profit}};

  const SingleAgent sa(mono);
  const auto cmp = compare_single_agent(sa, cfg.numeric.curve_points);
  summary["single_agent"] = {{"surplus_separable", cmp.surplus_separable},
                             {"surplus_monopoly", cmp.surplus_monopoly},
                             {"surplus_gap", cmp.surplus_gap},
                             {"crossing_type", cmp.crossing_type ? Json(*cmp.crossing_type) : Json(nullptr)}};
  w.json("summary.json", summary);

  const auto rule = mono.allocation_rule();
  const auto eff = mono.efficient_rule();
  CsvTable alloc{{"theta", "q_M", "q_star", "transfer", "rent"}, {}};
  for (Real t : linspace(0.0, 1.0, cfg.numeric.curve_points))
    alloc.rows.push_back({t, rule(t), eff(t), mono.transfer(rule, t), mono.information_rent(rule, t)});
  w.csv("allocation.csv", std::move(alloc));

  CsvTable tariff{{"quality", "price", "increment"}, {}};
  for (const auto& p : mono.tariff_curve(cfg.numeric.curve_points)) tariff.rows.push_back({p.quality, p.price, p.increment});
  w.csv("tariff.csv", std::move(tariff));

  CsvTable single{{"theta", "q_M", "q_MS", "q_E", "profit_M", "profit_MS"}, {}};
  for (Real t : linspace(0.0, 1.0, cfg.numeric.curve_points))
    single.rows.push_back({t, rule(t), sa.mr_allocation(t), sa.expost_efficient(t), sa.profit_monopoly(t),
                           sa.profit_separable(t)});
  w.csv("single_agent.csv", std::move(single));
  return w.result;
}

CommandResult cmd_figures(const RunConfig& cfg, const fs::path& out) {
  const auto& prim = cfg.primitives;
  if (!prim.regular()) return not_regular("figures");
  if (prim.utility().is_linear()) throw ConfigError("figures: needs a strictly concave utility family");
  const Monopoly mono(prim, cfg.numeric.root_tol);
  const auto& sol = mono.solution();
  const auto& g = prim.utility();
  const auto& c = prim.cost();
  const Real mean = prim.mean_type();
  const Real top = cfg.command.figure_q_max;
  const int n = cfg.numeric.curve_points;
  // The solved qualities are sampled exactly so tick values can be read off the curves.
  auto qs = linspace(0.0, top, n);
  for (Real q : {mono.beta_at_zero(), sol.cap, mono.efficient_quality()})
    if (q > 0.0 && q < top) qs.push_back(q);
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
  const auto thetas = linspace(0.0, 1.0, n);
  // beta is unbounded where the virtual value is nonnegative; curves are truncated at the plot height.
  auto beta = [&](Real t) { return mono.beta_alloc(t).capped(top); };
  auto msv = [&](Real q) { return q > 0.0 ? g.derivative(q) + mean : std::numeric_limits<Real>::infinity(); };
  Writer w{out, {}};

  CsvTable f1a{{"q", "c_prime_inv", "marginal_social_value"}, {}};
  for (Real q : qs)
    if (q > 0.0) f1a.rows.push_back({q, c.derivative(q), msv(q)});
  w.csv("fig1a.csv", std::move(f1a));
  CsvTable f1b{{"theta", "q_star"}, {}};
  for (Real t : thetas) f1b.rows.push_back({t, mono.efficient_quality()});
  w.csv("fig1b.csv", std::move(f1b));

  const Real hi_q = cfg.command.fixed_quality_high;
  const Real lo_q = cfg.command.fixed_quality_low;
  for (auto [name, fixed] : {std::pair{"fig2a.csv", hi_q}, std::pair{"fig2b.csv", lo_q}}) {
    CsvTable f{{"theta", "beta", "capped"}, {}};
    for (Real t : thetas) f.rows.push_back({t, beta(t), mono.beta_alloc(t).capped(fixed)});
    w.csv(name, std::move(f));
  }

  CsvTable f3a{{"q", "c_prime_inv", "marginal_social_value", "marginal_revenue"}, {}};
  for (Real q : qs)
    if (q > 0.0) f3a.rows.push_back({q, c.derivative(q), msv(q), mono.marginal_revenue(q)});
  w.csv("fig3a.csv", std::move(f3a));
  CsvTable f3b{{"theta", "beta", "q_M", "q_star"}, {}};
  for (Real t : thetas) f3b.rows.push_back({t, beta(t), mono.monopoly_allocation(t), mono.efficient_quality()});
  w.csv("fig3b.csv", std::move(f3b));

  const Monopoly lin(prim.with_utility(QualityUtility::linear()), cfg.numeric.root_tol);
  CsvTable f4{{"theta", "phi", "allocation"}, {}};
  for (Real t : thetas) f4.rows.push_back({t, prim.virtual_value_extended(t), lin.monopoly_allocation(t)});
  w.csv("fig4.csv", std::move(f4));

  const NoScreening ns(mono, cfg.numeric.root_tol);
  const auto nsr = ns.allocation_rule();
  CsvTable f5a{{"theta", "q_M", "q_NM"}, {}};
  for (Real t : thetas) f5a.rows.push_back({t, mono.monopoly_allocation(t), nsr(t)});
  w.csv("fig5a.csv", std::move(f5a));
  const Real x = cfg.command.subgame_x;
  const Real y = cfg.command.subgame_y;
  CsvTable f5b{{"theta", "beta", "q_C"}, {}};
  for (Real t : thetas) f5b.rows.push_back({t, beta(t), subgame_allocation(mono, x, y, t)});
  w.csv("fig5b.csv", std::move(f5b));

  Json ticks;
  ticks["q_star"] = mono.efficient_quality();
  ticks["q_M"] = sol.cap;
  ticks["b_q_M"] = sol.marginally_bunched;
  ticks["beta_at_zero"] = mono.beta_at_zero();
  ticks["virtual_value_root"] = prim.virtual_value_root();
  ticks["c_prime_at_q_M"] = c.derivative(sol.cap);
  ticks["fixed_quality_high"] = hi_q;
  ticks["fixed_quality_low"] = lo_q;
  ticks["b_fixed_quality_high"] = mono.b_inverse(hi_q);
  ticks["linear_q_M"] = lin.cap();
  ticks["q_NM"] = ns.solution().cap;
  ticks["b_N_q_NM"] = ns.solution().cutoff;
  ticks["subgame_x"] = x;
  ticks["subgame_y"] = y;
  ticks["b_x"] = mono.b_inverse(x);
  ticks["b_y"] = mono.b_inverse(y);
  Json files = Json::array();
  for (const auto& f : w.result.files) files.push_back(f.filename().string());
  w.json("figures.json", Json{{"ticks", ticks}, {"plot_height", top}, {"files", files}});
  return w.result;
}

CommandResult cmd_verify(const RunConfig& cfg, const fs::path& out) {
  const bool regular = cfg.primitives.regular();
  const auto checks = regular ? regular_checks(cfg) : ironed_checks(cfg);
  bool all = true;
  std::string first_failure;
  for (const auto& c : checks) {
    if (!c.passed && all) first_failure = c.name;
    all = all && c.passed;
  }
  Writer w{out, {}};
  w.json("report.json", Json{{"solver", regular ? "regular" : "ironed"},
                             {"cap_offset", cfg.command.cap_offset},
                             {"passed", all},
                             {"checks", checks_json(checks)}});
  if (!all) {
    w.result.exit_code = kExitVerify;
    w.result.message = "verify: check '" + first_failure + "' failed";
  }
  return w.result;
}

CommandResult cmd_compete(const RunConfig& cfg, const fs::path& out) {
  const auto& prim = cfg.primitives;
  if (!prim.regular()) return not_regular("compete");
  const Monopoly mono(prim, cfg.numeric.root_tol);
  std::vector<int> firms = cfg.command.firms;
  std::sort(firms.begin(), firms.end());
  firms.erase(std::unique(firms.begin(), firms.end()), firms.end());
  const MonteCarloConfig mc{cfg.command.samples, cfg.numeric.seed, cfg.numeric.threads};
  const Real top = mono.cap();
  Writer w{out, {}};

  Json per_n = Json::array();
  CsvTable welfare{{"firms", "welfare_mc", "ci_95", "welfare_quadrature", "industry_profit", "industry_profit_ci_95"}, {}};
  CsvTable samples{{"firms", "draw", "x", "y"}, {}};
  std::vector<MonteCarloReport> reps;
  for (int n : firms) {
    const MixedEquilibrium eq(mono, n);
    const auto rep = simulate_competition(eq, mc);
    const auto quad = expected_welfare_quadrature(eq);
    Real dev_support = 0.0;
    for (int i = 1; i <= 64; ++i) dev_support = std::max(dev_support, std::abs(deviation_payoff(eq, top * i / 65.0)));
    Real dev_above = -std::numeric_limits<Real>::infinity();
    for (Real f : {1.1, 1.5, 2.0}) dev_above = std::max(dev_above, deviation_payoff(eq, f * top));
    per_n.push_back(Json{{"firms", n},
                         {"E_welfare", rep.welfare.mean},
                         {"ci_95", rep.welfare.half_width_95},
                         {"samples", rep.welfare.n_samples},
                         {"welfare_quadrature", quad.mean},
                         {"industry_profit", rep.industry_profit},
                         {"industry_profit_ci_95", rep.industry_profit_half_width},
                         {"zero_profit_within_ci", std::abs(rep.industry_profit) <= rep.industry_profit_half_width},
                         {"cdf_at_zero", eq.cdf(0.0)},
                         {"cdf_at_top", eq.cdf(top)},
                         {"max_abs_deviation_on_support", dev_support},
                         {"max_deviation_above_top", dev_above},
                         {"x_max_observed", rep.x_max_observed},
                         {"all_below_cap", rep.all_below_cap},
                         {"y_above_floor_frequency", rep.y_above_floor_frequency}});
    welfare.rows.push_back({static_cast<Real>(n), rep.welfare.mean, rep.welfare.half_width_95, quad.mean,
                            rep.industry_profit, rep.industry_profit_half_width});
    if (cfg.command.export_samples > 0) {
      RandomStream stream(cfg.numeric.seed, 0);
      for (long long d = 0; d < cfg.command.export_samples; ++d) {
        const auto s = sample_order_stats(eq, stream);
        samples.rows.push_back({static_cast<Real>(n), static_cast<Real>(d), s.x, s.y});
      }
    }
    reps.push_back(rep);
  }
  bool nonincreasing = true;
  bool separated = true;
  for (std::size_t i = 1; i < reps.size(); ++i) {
    const auto& a = reps[i - 1].welfare;
    const auto& b = reps[i].welfare;
    nonincreasing = nonincreasing && a.mean >= b.mean;
    separated = separated && a.mean - a.half_width_95 > b.mean + b.half_width_95;
  }

  Json doc;
  doc["seed"] = cfg.numeric.seed;
  doc["monopoly_welfare"] = monopoly_welfare(mono);
  doc["equilibria"] = per_n;
  doc["welfare_nonincreasing"] = nonincreasing;
  doc["welfare_separated_beyond_ci"] = separated;
  const auto dom = full_bunching_dominance_check(mono);
  doc["full_bunching_dominance"] = {{"applicable", dom.applicable},
                                    {"monopoly_welfare", dom.monopoly_welfare},
                                    {"duopoly_welfare", dom.duopoly_welfare},
                                    {"monopoly_dominates", dom.monopoly_dominates}};
  w.csv("welfare.csv", std::move(welfare));

  if (!cfg.command.limit_alphas.empty()) {
    const auto lim = limit_experiment(cfg.command.limit_scale, cfg.command.limit_alphas);
    CsvTable t{{"alpha", "cap_closed_form", "cap_root", "duopoly_welfare", "monopoly_welfare", "gap", "distance"}, {}};
    for (const auto& r : lim.rows)
      t.rows.push_back({r.alpha, r.cap_closed_form, r.cap_root, r.duopoly_welfare, r.monopoly_welfare, r.gap, r.distance});
    w.csv("limit.csv", std::move(t));
    doc["limit"] = {{"scale", lim.scale}, {"limit", lim.limit}, {"approaches_monotonically", lim.approaches_monotonically}};
  }
  if (cfg.command.export_samples > 0) w.csv("samples.csv", std::move(samples));
  w.json("compete.json", doc);
  return w.result;
}

CommandResult cmd_sweep(const RunConfig& cfg, const fs::path& out) {
  const auto& prim = cfg.primitives;
  if (!prim.regular()) return not_regular("sweep");
  const auto rep = comparative_sweep(prim, cfg.command.sweep_kappa_c, cfg.command.sweep_kappa_g);
  Writer w{out, {}};
  CsvTable sweep{{"axis", "kappa_c", "kappa_g", "cap", "marginally_bunched", "full_bunching"}, {}};
  for (const auto& r : rep.kappa_c_rows)
    sweep.rows.push_back({0.0, r.kappa_c, r.kappa_g, r.cap, r.marginally_bunched, r.full_bunching ? 1.0 : 0.0});
  for (const auto& r : rep.kappa_g_rows)
    sweep.rows.push_back({1.0, r.kappa_c, r.kappa_g, r.cap, r.marginally_bunched, r.full_bunching ? 1.0 : 0.0});
  w.csv("sweep.csv", std::move(sweep));

  const auto flip = surplus_flip_experiment(cfg.command.flip_kappa_g);
  CsvTable ft{{"kappa_g", "surplus_gap"}, {}};
  for (const auto& r : flip.rows) ft.rows.push_back({r.kappa_g, r.gap});
  w.csv("flip.csv", std::move(ft));

  Json doc;
  doc["cap_decreasing_in_kappa_c"] = rep.cap_decreasing_in_kappa_c;
  doc["cap_nondecreasing_in_kappa_g"] = rep.cap_nondecreasing_in_kappa_g;
  doc["bunched_type_nonincreasing_in_kappa_g"] = rep.bunched_type_nonincreasing_in_kappa_g;
  doc["full_bunching_threshold_kappa_g"] =
      prim.utility().is_linear() ? Json(nullptr) : Json(full_bunching_threshold(prim));
  doc["surplus_flip"] = {{"negative_at_start", flip.negative_at_start},
                         {"positive_at_end", flip.positive_at_end},
                         {"nondecreasing", flip.nondecreasing}};
  w.json("sweep.json", doc);
  return w.result;
}

CommandResult cmd_iron(const RunConfig& cfg, const fs::path& out) {
  const auto& prim = cfg.primitives;
  if (prim.utility().is_linear()) throw ConfigError("iron: needs a strictly concave utility family");
  const IronedMonopoly im(prim, cfg.numeric.ironing_cells);
  const auto& sol = im.solution();
  Writer w{out, {}};
  CsvTable t{{"theta", "phi", "phi_ironed", "quality"}, {}};
  for (Real th : linspace(0.0, 1.0, cfg.numeric.curve_points))
    t.rows.push_back({th, prim.virtual_value_extended(th), im.ironed_phi(th), im.allocation(th)});
  w.csv("iron.csv", std::move(t));
  w.json("iron.json", Json{{"regular", prim.regular()},
                           {"q_star", im.efficient_quality()},
                           {"cap", sol.cap},
                           {"marginally_bunched", sol.marginally_bunched},
                           {"full_bunching", sol.full_bunching},
                           {"revenue", sol.revenue},
                           {"profit", sol.profit},
                           {"grid_cells", sol.grid_cells},
                           {"grid_converged", sol.grid_converged},
                           {"ironed_types", intervals_json(sol.ironed_types)},
                           {"ironed_quantiles", intervals_json(sol.ironed_quantiles)}});
  return w.result;
}

fs::path resolve_output_dir(const Invocation& inv, const RunConfig& cfg) {
  if (inv.out) return *inv.out;
  if (cfg.output_directory) return *cfg.output_directory;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "out";
}

int run(const Invocation& inv, std::ostream& err) {
  const std::string name = command_name(inv.command);
  try {
    RunConfig cfg = load_config(inv.config);
    if (inv.seed) cfg.numeric.seed = *inv.seed;
    if (inv.samples) {
      if (*inv.samples < 2 || *inv.samples > kSampleBudget)
        throw ConfigError("--samples must lie in [2, " + std::to_string(kSampleBudget) + "]");
      cfg.command.samples = *inv.samples;
    }
    const fs::path out = resolve_output_dir(inv, cfg);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());

    CommandResult res;
    switch (inv.command) {
      case Command::Solve: res = cmd_solve(cfg, out); break;
      case Command::Figures: res = cmd_figures(cfg, out); break;
      case Command::Verify: res = cmd_verify(cfg, out); break;
      case Command::Compete: res = cmd_compete(cfg, out); break;
      case Command::Sweep: res = cmd_sweep(cfg, out); break;
      case Command::Iron: res = cmd_iron(cfg, out); break;
    }
    if (!res.message.empty()) err << res.message << '\n';
    return res.exit_code;
  } catch (const ConfigError& e) {
    err << name << ": config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    err << name << ": config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SampleBudgetExceeded& e) {
    err << name << ": config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << name << ": solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace screening
