#include "fpsteer/serialization.hpp"

namespace fpsteer {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

Json vector_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json comparison_json(const MomentComparison& c) {
  return Json{{"step", c.step},
              {"planned", vector_json(c.planned)},
              {"empirical", vector_json(c.empirical)},
              {"standard_error", vector_json(c.standard_error)},
              {"within", c.within},
              {"pass", c.all_within()}};
}

}  // namespace

Json to_json(const Moments& m) { return Json(m.to_std()); }

Moments moments_from_json(const Json& j) { return Moments::from_std(j.get<std::vector<double>>()); }

Json to_json(const DensitySpec& spec) {
  return std::visit(
      Overloaded{
          [](const Gaussian& g) {
            return Json{{"kind", "gaussian"}, {"mean", g.mean}, {"variance", g.variance}};
          },
          [](const GaussianMixture& m) {
            return Json{{"kind", "gaussian_mixture"},
                        {"weights", m.weights},
                        {"means", m.means},
                        {"variances", m.variances}};
          },
          [](const GeneralizedLogistic& g) {
            return Json{{"kind", "generalized_logistic"}, {"shape", g.shape}, {"location", g.location}};
          },
          [](const GeneralizedLogisticMixture& m) {
            return Json{{"kind", "glogistic_mixture"},
                        {"weights", m.weights},
                        {"shapes", m.shapes},
                        {"locations", m.locations}};
          },
      },
      spec);
}

DensitySpec density_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  DensitySpec spec;
  if (kind == "gaussian") {
    spec = Gaussian{j.at("mean").get<double>(), j.at("variance").get<double>()};
  } else if (kind == "gaussian_mixture") {
    spec = GaussianMixture{j.at("weights").get<std::vector<double>>(),
                           j.at("means").get<std::vector<double>>(),
                           j.at("variances").get<std::vector<double>>()};
  } else if (kind == "generalized_logistic") {
    spec = GeneralizedLogistic{j.at("shape").get<double>(), j.value("location", 0.0)};
  } else if (kind == "glogistic_mixture") {
    spec = GeneralizedLogisticMixture{j.at("weights").get<std::vector<double>>(),
                                      j.at("shapes").get<std::vector<double>>(),
                                      j.at("locations").get<std::vector<double>>()};
  } else {
    throw DomainError("unknown density kind '" + kind + "'");
  }
  validate(spec);
  return spec;
}

Json to_json(const MomentStateTrajectory& plan) {
  Json states = Json::array();
  for (int k = 0; k <= plan.horizon(); ++k)
    states.push_back(Json{{"step", k}, {"moments", to_json(plan.states[k])}});
  return Json{{"horizon", plan.horizon()}, {"order", plan.order()}, {"states", states}};
}

MomentStateTrajectory plan_from_json(const Json& j) {
  MomentStateTrajectory plan;
  for (const auto& s : j.at("states")) plan.states.push_back(moments_from_json(s.at("moments")));
  if (plan.states.size() < 2) throw DomainError("plan needs at least two states");
  return plan;
}

Json to_json(const StepFeasibilityReport& report) {
  Json intervals = Json::array();
  for (const auto& [lo, hi] : report.feasible_intervals) intervals.push_back({lo, hi});
  return Json{{"step", report.step},
              {"feasible", report.feasible},
              {"feasible_intervals", intervals},
              {"witness",
               {{"c", report.witness.c},
                {"a_tilde", report.witness.a_tilde},
                {"input_moments", to_json(report.witness.input_moments)},
                {"kernel_moments", to_json(report.witness.kernel_moments)},
                {"min_eig_kernel_hankel", report.witness.min_eig_kernel},
                {"min_eig_control_hankel", report.witness.min_eig_control}}}};
}

Json to_json(const std::vector<StepControl>& controls) {
  Json arr = Json::array();
  for (const auto& c : controls)
    arr.push_back(Json{{"step", c.step},
                       {"c", c.c},
                       {"a_tilde", c.a_tilde},
                       {"objective", c.objective},
                       {"input_moments", to_json(c.input_moments)},
                       {"kernel_moments", to_json(c.kernel_moments)},
                       {"control_moments", to_json(c.control_moments)}});
  return Json{{"controls", arr}};
}

std::vector<StepControl> controls_from_json(const Json& j) {
  std::vector<StepControl> out;
  for (const auto& c : j.at("controls")) {
    StepControl s;
    s.step = c.at("step").get<int>();
    s.c = c.at("c").get<double>();
    s.a_tilde = c.at("a_tilde").get<double>();
    s.objective = c.at("objective").get<double>();
    s.input_moments = moments_from_json(c.at("input_moments"));
    s.kernel_moments = moments_from_json(c.at("kernel_moments"));
    s.control_moments = moments_from_json(c.at("control_moments"));
    out.push_back(std::move(s));
  }
  return out;
}

Json to_json(const RealizedDensity& rd) {
  Json lambda = Json::array();
  for (Index i = 0; i < rd.lambda.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < rd.lambda.cols(); ++j) row.push_back(rd.lambda(i, j));
    lambda.push_back(row);
  }
  return Json{{"reference", to_json(rd.reference)},
              {"lambda", lambda},
              {"target_moments", to_json(rd.target_moments)},
              {"poly_min", rd.poly_min},
              {"moment_residual", rd.moment_residual},
              {"iterations", rd.iterations}};
}

RealizedDensity kernel_from_json(const Json& j) {
  RealizedDensity rd;
  rd.reference = density_from_json(j.at("reference"));
  const auto& rows = j.at("lambda");
  const Index dim = static_cast<Index>(rows.size());
  rd.lambda.resize(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    if (static_cast<Index>(rows[i].size()) != dim) throw DomainError("lambda must be square");
    for (Index k = 0; k < dim; ++k) rd.lambda(i, k) = rows[i][k].get<double>();
  }
  rd.target_moments = moments_from_json(j.at("target_moments"));
  rd.poly_min = j.at("poly_min").get<double>();
  rd.moment_residual = j.at("moment_residual").get<double>();
  rd.iterations = j.value("iterations", 0);
  return rd;
}

Json to_json(const SteeringReport& report) {
  Json states = Json::array();
  for (const auto& s : report.states) states.push_back(comparison_json(s));
  Json kernels = Json::array();
  for (const auto& k : report.kernels) kernels.push_back(comparison_json(k));
  return Json{{"scenario", report.scenario},
              {"runs", report.runs},
              {"z", report.z},
              {"gains", report.gains},
              {"terminal", comparison_json(report.terminal)},
              {"terminal_pass", report.terminal_pass},
              {"states", states},
              {"kernels", kernels}};
}

}  // namespace fpsteer
