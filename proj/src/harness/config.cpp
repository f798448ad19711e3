#include "hdff/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "hdff/errors.hpp"

namespace hdff::harness {

void ExperimentConfig::validate(std::size_t max_channels) const {
  if (hd_dim == 0) throw UsageError("--hd-dim must be at least 1");
  if (hd_dim < max_channels) {
    throw UsageError("--hd-dim " + std::to_string(hd_dim) + " is smaller than the widest layer (" +
                     std::to_string(max_channels) + " channels); a semi-orthogonal projection "
                     "needs hd_dim >= channels");
  }
  if (!(f1_step > 0.0) || !std::isfinite(f1_step)) throw UsageError("--f1-step must be positive");
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw UsageError("--bins must be positive");
  if (threads == 0) throw UsageError("--threads must be at least 1");
}

FitConfig ExperimentConfig::fit_config() const {
  FitConfig fc;
  fc.hd_dim = hd_dim;
  fc.master_seed = master_seed;
  fc.pooling = pooling;
  fc.layers = layers;
  fc.threads = threads;
  return fc;
}

EvalOptions ExperimentConfig::eval_options() const {
  return {detection_error_mode, f1_step, bin_width};
}

namespace {

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view text, Parse parse_one) {
  std::vector<T> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, end - start);
    if (item.empty()) throw UsageError("empty item in list '" + std::string(text) + "'");
    out.push_back(parse_one(item, text));
    start = end + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view item, std::string_view whole) {
  T value{};
  const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
  if (ec != std::errc() || ptr != item.data() + item.size()) {
    throw UsageError("cannot parse '" + std::string(item) + "' in list '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

std::vector<int> parse_int_list(std::string_view text) {
  return parse_list<int>(text, parse_number<int>);
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
  return parse_list<std::size_t>(text, parse_number<std::size_t>);
}

std::vector<double> parse_double_list(std::string_view text) {
  return parse_list<double>(text, parse_number<double>);
}

}  // namespace hdff::harness
