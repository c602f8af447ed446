#include "fpsteer/reporting.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace fpsteer {

namespace {

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  return out;
}

std::span<const double> column_span(const Eigen::MatrixXd& m, Index col) {
  return {m.col(col).data(), static_cast<std::size_t>(m.rows())};
}

}  // namespace

bool MomentComparison::all_within() const {
  for (bool w : within)
    if (!w) return false;
  return true;
}

MomentComparison compare_moments(int step, const Moments& planned, std::span<const double> samples,
                                 double z) {
  MomentComparison cmp;
  cmp.step = step;
  cmp.planned = planned.values();
  cmp.empirical = empirical_moments(samples, planned.order()).values();
  cmp.standard_error = moment_standard_errors(samples, planned.order());
  for (Index l = 0; l < planned.order(); ++l)
    cmp.within.push_back(std::abs(cmp.planned[l] - cmp.empirical[l]) <= z * cmp.standard_error[l]);
  return cmp;
}

SteeringReport build_report(const ClosedLoopResult& result, const MomentStateTrajectory& plan,
                            const std::vector<StepControl>& controls, const DensitySpec& target,
                            double z, const std::string& scenario) {
  if (plan.horizon() != result.horizon() || static_cast<int>(controls.size()) != result.horizon())
    throw DomainError("report inputs disagree on the horizon");
  const Index order = plan.order();

  SteeringReport report;
  report.scenario = scenario;
  report.runs = result.runs();
  report.z = z;
  if (result.states.size() > 0)
    for (int k = 0; k <= plan.horizon(); ++k)
      report.states.push_back(compare_moments(k, plan.states[k], column_span(result.states, k), z));

  const Moments target_moments = moments_of(
      target, order, has_closed_form(target) ? MomentMethod::closed_form : MomentMethod::quadrature);
  report.terminal = compare_moments(
      plan.horizon(), target_moments,
      std::span<const double>(result.terminal.data(), result.terminal.size()), z);
  report.terminal_pass = report.terminal.all_within();

  for (const auto& c : controls) {
    report.gains.push_back(c.c);
    report.kernels.push_back(
        compare_moments(c.step, c.kernel_moments, column_span(result.kernel_draws, c.step), z));
  }
  return report;
}

HistogramData export_histogram(std::span<const double> samples, int bins, double lo, double hi,
                               const std::optional<DensitySpec>& overlay) {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  if (!(hi > lo)) throw DomainError("histogram range is empty");
  HistogramData hist;
  hist.edges = Eigen::VectorXd::LinSpaced(bins + 1, lo, hi);
  hist.counts.assign(bins, 0);
  const double width = (hi - lo) / bins;
  for (double x : samples) {
    if (x < lo) {
      ++hist.below;
    } else if (x >= hi) {
      ++hist.above;
    } else {
      const int bin = std::min(bins - 1, static_cast<int>((x - lo) / width));
      ++hist.counts[bin];
    }
  }
  const long inside = static_cast<long>(samples.size()) - hist.below - hist.above;
  hist.heights = Eigen::VectorXd::Zero(bins);
  if (inside > 0)
    for (int i = 0; i < bins; ++i) hist.heights[i] = double(hist.counts[i]) / (double(inside) * width);
  if (overlay) hist.overlay = export_density_grid(*overlay, lo, hi, 10 * bins);
  return hist;
}

std::pair<double, double> default_histogram_range(std::span<const double> samples) {
  const Moments m = empirical_moments(samples, 2);
  const double sd = std::sqrt(std::max(m[2] - m[1] * m[1], 0.0));
  const double half = sd > 0.0 ? 4.0 * sd : 1.0;
  return {m[1] - half, m[1] + half};
}

DensityGrid export_density_grid(const std::function<double(double)>& pdf, double lo, double hi,
                                int points) {
  if (points < 2) throw DomainError("density grid needs at least two points");
  DensityGrid grid;
  grid.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * double(i) / double(points - 1);
    grid.emplace_back(x, pdf(x));
  }
  return grid;
}

DensityGrid export_density_grid(const DensitySpec& spec, double lo, double hi, int points) {
  return export_density_grid([&spec](double x) { return pdf_eval(spec, x); }, lo, hi, points);
}

DensityGrid export_density_grid(const RealizedDensity& rd, double lo, double hi, int points) {
  return export_density_grid([&rd](double x) { return realized_pdf(rd, x); }, lo, hi, points);
}

void write_histogram_csv(const std::string& path, const HistogramData& hist) {
  auto out = open_for_write(path);
  out << "left,right,count,height\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    out << hist.edges[i] << ',' << hist.edges[i + 1] << ',' << hist.counts[i] << ','
        << hist.heights[i] << '\n';
}

void write_density_csv(const std::string& path, const DensityGrid& grid) {
  auto out = open_for_write(path);
  out << "x,pdf\n";
  for (const auto& [x, p] : grid) out << x << ',' << p << '\n';
}

}  // namespace fpsteer
