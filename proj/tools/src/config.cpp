#include "krmap_cli/config.hpp"

#include <fstream>
#include <sstream>

#include "krmap/errors.hpp"
#include "krmap_cli/schema.hpp"

namespace krmap::cli {

using nlohmann::json;

RunConfig default_config() {
  RunConfig cfg;
  // CSIR defaults: fixed least-squares tolerance 0.05 on every layer.
  cfg.ls.tau = 0.05;
  cfg.layered.min_tau = 0.05;
  cfg.layered.max_tau = 0.05;
  cfg.layered.beta_samples = 500;
  return cfg;
}

namespace {

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

AdaptiveTempering read_adaptive(const json& j, AdaptiveTempering a) {
  read(j, "beta1", a.beta1);
  read(j, "eta", a.eta);
  return a;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  const auto errors = SchemaValidator(run_config_schema()).validate(doc);
  if (!errors.empty()) {
    std::string msg = "configuration violates the run-config schema:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  RunConfig cfg = default_config();
  cfg.source = doc;
  try {
    if (auto it = doc.find("problem"); it != doc.end()) {
      auto& p = cfg.problem;
      read(*it, "kind", p.kind);
      read(*it, "K", p.K);
      read(*it, "seed", p.seed);
      read(*it, "sigma_n", p.sigma_n);
      read(*it, "x_true", p.x_true);
      read(*it, "d", p.d);
      read(*it, "sharpness", p.sharpness);
      read(*it, "center", p.center);
      read(*it, "curvature", p.curvature);
      read(*it, "scale", p.scale);
      read(*it, "alpha", p.alpha);
      read(*it, "beta", p.beta);
    }
    if (auto it = doc.find("family"); it != doc.end()) cfg.family = basis_family_from_string(it->get<std::string>());
    if (auto it = doc.find("schedule"); it != doc.end()) {
      auto& s = cfg.schedule;
      read(*it, "kind", s.kind);
      s.adaptive = read_adaptive(*it, s.adaptive);
      read(*it, "betas", s.betas);
      if (auto in = it->find("inner"); in != it->end()) s.inner = read_adaptive(*in, AdaptiveTempering{});
      if (s.kind == "fixed" && s.betas.empty()) throw ConfigError("fixed schedule needs a betas list");
    }
    if (auto it = doc.find("ls"); it != doc.end()) {
      auto& ls = cfg.ls;
      read(*it, "theta", ls.theta);
      read(*it, "sample_factor", ls.sample_factor);
      if (auto s = it->find("schedule"); s != it->end()) {
        ls.schedule = s->get<std::string>() == "loglinear" ? SampleSchedule::LogLinear : SampleSchedule::Linear;
      }
      read(*it, "tau", ls.tau);
      read(*it, "max_cardinality", ls.max_cardinality);
      read(*it, "max_degree", ls.max_degree);
      if (auto e = it->find("estimator"); e != it->end()) {
        ls.estimator = e->get<std::string>() == "holdout" ? ErrorEstimator::Holdout : ErrorEstimator::LeaveOneOut;
      }
      read(*it, "holdout_fraction", ls.holdout_fraction);
      read(*it, "initial_degree", ls.initial_degree);
      read(*it, "max_iterations", ls.max_iterations);
      read(*it, "max_evaluations", ls.max_evaluations);
    }
    if (auto it = doc.find("layered"); it != doc.end()) {
      auto& l = cfg.layered;
      read(*it, "omega", l.omega);
      read(*it, "beta_samples", l.beta_samples);
      read(*it, "max_layers", l.max_layers);
      read(*it, "min_tau", l.min_tau);
      read(*it, "max_tau", l.max_tau);
    }
    read(doc, "seed", cfg.seed);
    read(doc, "threads", cfg.threads);
    read(doc, "output", cfg.output);
    if (auto it = doc.find("sample"); it != doc.end()) {
      read(*it, "map", cfg.sample_map);
      read(*it, "n", cfg.sample_n);
    }
    if (auto it = doc.find("diagnose"); it != doc.end()) {
      read(*it, "map", cfg.diagnose_map);
      read(*it, "n", cfg.diagnose_n);
    }
    if (auto it = doc.find("benchmark"); it != doc.end()) {
      auto& b = cfg.benchmark;
      read(*it, "suite", b.suite);
      read(*it, "repetitions", b.repetitions);
      read(*it, "single_degree", b.single_degree);
      read(*it, "quadrature_points", b.quadrature_points);
      read(*it, "diagnostic_samples", b.diagnostic_samples);
    }
    cfg.ls.threads = cfg.threads;
    cfg.layered.threads = cfg.threads;
    cfg.layered.ls = cfg.ls;
    cfg.ls.validate();
    cfg.layered.validate();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("configuration file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const RunConfig& cfg) {
  const auto& p = cfg.problem;
  json problem = {{"kind", p.kind}};
  if (p.kind == "csir" || p.kind == "regression") {
    problem.update({{"K", p.K}, {"seed", p.seed}, {"sigma_n", p.sigma_n}});
    if (!p.x_true.empty()) problem["x_true"] = p.x_true;
  } else if (p.kind == "gaussian_bump") {
    problem.update({{"d", p.d}, {"sharpness", p.sharpness}});
    if (!p.center.empty()) problem["center"] = p.center;
  } else if (p.kind == "banana") {
    problem.update({{"curvature", p.curvature}, {"scale", p.scale}});
  } else {
    problem.update({{"d", p.d}, {"alpha", p.alpha}, {"beta", p.beta}});
  }
  json schedule = {{"kind", cfg.schedule.kind}};
  if (cfg.schedule.kind == "adaptive") {
    schedule.update({{"beta1", cfg.schedule.adaptive.beta1}, {"eta", cfg.schedule.adaptive.eta}});
  } else if (cfg.schedule.kind == "fixed") {
    schedule["betas"] = cfg.schedule.betas;
  } else if (cfg.schedule.inner) {
    schedule["inner"] = {{"beta1", cfg.schedule.inner->beta1}, {"eta", cfg.schedule.inner->eta}};
  }
  const auto& ls = cfg.ls;
  return {
      {"problem", problem},
      {"family", std::string(to_string(cfg.family))},
      {"schedule", schedule},
      {"ls",
       {{"theta", ls.theta},
        {"sample_factor", ls.sample_factor},
        {"schedule", ls.schedule == SampleSchedule::Linear ? "linear" : "loglinear"},
        {"tau", ls.tau},
        {"max_cardinality", ls.max_cardinality},
        {"max_degree", ls.max_degree},
        {"estimator", ls.estimator == ErrorEstimator::LeaveOneOut ? "loo" : "holdout"},
        {"holdout_fraction", ls.holdout_fraction},
        {"initial_degree", ls.initial_degree},
        {"max_iterations", ls.max_iterations},
        {"max_evaluations", ls.max_evaluations}}},
      {"layered",
       {{"omega", cfg.layered.omega},
        {"beta_samples", cfg.layered.beta_samples},
        {"max_layers", cfg.layered.max_layers},
        {"min_tau", cfg.layered.min_tau},
        {"max_tau", cfg.layered.max_tau}}},
      {"seed", cfg.seed},
      {"threads", cfg.threads},
      {"output", cfg.output},
  };
}

ProblemInstance make_problem(const RunConfig& cfg) {
  const auto& p = cfg.problem;
  if (!is_bounded(cfg.family)) {
    throw ConfigError("problem '" + p.kind + "' lives on a box and needs a bounded basis family");
  }
  std::optional<CsirModel> csir;
  std::optional<RegressionToy> regression;
  std::optional<AnalyticTarget> analytic;
  std::vector<DomainMap> maps;
  std::vector<Interval> box;
  if (p.kind == "csir") {
    CsirModel model(p.K);
    auto truth = p.x_true.empty() ? CsirModel::default_truth(p.K) : p.x_true;
    if (static_cast<int>(truth.size()) != model.dim()) throw ConfigError("x_true must have 2K entries");
    model.set_data(model.simulate_data(truth, p.seed, p.sigma_n));
    maps = model.prior_maps();
    box = model.prior_box();
    csir = std::move(model);
  } else if (p.kind == "regression") {
    try {
      regression.emplace(6, p.sigma_n, p.x_true.empty() ? std::vector<double>{0.5, -1.0} : p.x_true, p.seed);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid problem: ") + e.what());
    }
    maps = regression->prior_maps();
    box = regression->prior_box();
  } else {
    try {
      if (p.kind == "gaussian_bump") analytic = gaussian_bump(p.d, p.sharpness, p.center);
      else if (p.kind == "banana") analytic = banana(p.curvature, p.scale);
      else analytic = product_beta(p.d, p.alpha, p.beta);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid problem: ") + e.what());
    }
    maps = analytic->maps();
    box = analytic->box;
  }
  const int dim = static_cast<int>(maps.size());

  // Φ_0 = log λ(x) cancels a non-uniform base weight, keeping the prior flat on the box.
  Potential prior;
  if (cfg.family != BasisFamily::Legendre) {
    const ComposedMap base(cfg.family, maps);
    prior = [base](std::span<const double> x) { return base.log_base_weight(x); };
  }

  std::optional<TargetProblem> problem;
  LogDensity log_target;
  if (csir) {
    const CsirModel model = *csir;
    problem.emplace(dim, [model](std::span<const double> x) { return model.misfits(x); }, model.observations(),
                    prior);
    log_target = [model](std::span<const double> x) { return -model.potential(x); };
  } else if (regression) {
    const RegressionToy toy = *regression;
    problem.emplace(dim, [toy](std::span<const double> x) { return toy.misfits(x); }, toy.observations(), prior);
    log_target = [toy](std::span<const double> x) { return toy.log_density(x); };
  } else {
    const AnalyticTarget t = *analytic;
    problem.emplace(dim, [t](std::span<const double> x) { return -t.log_density(x); }, prior);
    log_target = [t](std::span<const double> x) { return t.log_density(x); };
  }

  BridgingSchedule schedule;
  const auto& s = cfg.schedule;
  if (s.kind == "adaptive") {
    schedule = s.adaptive;
  } else if (s.kind == "fixed") {
    schedule = FixedTempering{s.betas};
  } else {
    if (csir) {
      schedule = DataBatching{csir->time_batches(), s.inner};
    } else if (regression) {
      schedule = DataBatching{regression->observation_batches(), s.inner};
    } else {
      throw ConfigError("data batching needs per-observation misfits (csir and regression problems)");
    }
  }
  try {
    validate_schedule(schedule, *problem);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid schedule: ") + e.what());
  }
  return ProblemInstance{std::move(csir), std::move(regression), std::move(analytic), std::move(*problem), std::move(maps),
                         std::move(box), std::move(log_target), std::move(schedule)};
}

}  // namespace krmap::cli
