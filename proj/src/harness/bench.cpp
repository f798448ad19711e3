#include "hdff/harness/bench.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "hdff/errors.hpp"
#include "hdff/projection.hpp"
#include "hdff/rng.hpp"

namespace hdff::harness {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("fit_line: need >= 2 matched points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw UsageError("fit_line: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

BenchResult run_bench(const BenchConfig& config) {
  if (config.channels.size() < 2) throw UsageError("bench needs at least two channel counts");
  if (config.repeats == 0 || config.batch == 0) throw UsageError("bench repeats and batch must be >= 1");
  const std::size_t widest = *std::max_element(config.channels.begin(), config.channels.end());
  const std::size_t m = config.hd_dim;

  // Leading columns of one semi-orthogonal matrix are themselves semi-orthogonal.
  const auto full = generate_semi_orthogonal(derive_seed(config.seed, 0), m, widest);
  const CounterRng rng(derive_seed(config.seed, 1));

  BenchResult result;
  result.config = config;
  for (std::size_t c : config.channels) {
    if (c == 0) throw UsageError("bench channel counts must be >= 1");
    const ProjectionMatrix p(full.entries().leftCols(static_cast<Eigen::Index>(c)), 0, 0);
    std::vector<std::vector<float>> inputs(config.batch, std::vector<float>(c));
    for (std::size_t b = 0; b < config.batch; ++b) {
      for (std::size_t k = 0; k < c; ++k) {
        inputs[b][k] = static_cast<float>(rng.gaussian(b * widest + k));
      }
    }
    std::vector<std::span<const float>> views(inputs.begin(), inputs.end());
    std::vector<double> acc(config.batch * m), total(m);
    volatile double sink = 0.0;
    auto once = [&] {
      project_batch_into(p, views, acc);
      std::fill(total.begin(), total.end(), 0.0);
      for (std::size_t b = 0; b < config.batch; ++b) {
        for (std::size_t i = 0; i < m; ++i) total[i] += acc[b * m + i];
      }
      sink = sink + HdVector::from_accumulator(total).values()[0];
    };
    once();
    std::vector<double> times;
    for (std::size_t r = 0; r < config.repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      once();
      const auto t1 = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    result.rows.push_back({c, times[times.size() / 2], times.front(), times.back()});
  }

  std::vector<double> xs, ys;
  for (const auto& row : result.rows) {
    xs.push_back(static_cast<double>(row.channels));
    ys.push_back(row.median_seconds);
  }
  result.fit = fit_line(xs, ys);
  return result;
}

}  // namespace hdff::harness
