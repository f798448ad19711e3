#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "hdff/errors.hpp"
#include "hdff/model.hpp"
#include "hdff/parallel.hpp"
#include "test_support.hpp"

using namespace hdff;
using testing_support::random_map;
using testing_support::toy_source;

namespace {

FittedModel stats_only(std::size_t m, std::uint64_t seed, std::vector<LayerStats> layers,
                       PoolingMode pooling = PoolingMode::max) {
  FittedModel model;
  model.hd_dim = m;
  model.master_seed = seed;
  model.pooling = pooling;
  model.layers = std::move(layers);
  return model;
}

double relative_diff(const HdVector& a, const HdVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) d += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
  return std::sqrt(d) / a.norm();
}

}  // namespace

TEST_CASE("pool: max and avg over a 2x2 single-channel map") {
  const LayerFeatureMap map({1, 2, 3, 4}, 2, 2, 1, 0);
  CHECK(pool(map, PoolingMode::max).values == std::vector<float>{4});
  CHECK(pool(map, PoolingMode::avg).values == std::vector<float>{2.5f});
}

TEST_CASE("pool: 1x1 spatial map is unchanged by either mode") {
  const LayerFeatureMap map({0.5f, -1.0f, 7.0f}, 1, 1, 3, 2);
  CHECK(pool(map, PoolingMode::max).values == pool(map, PoolingMode::avg).values);
  CHECK(pool(map, PoolingMode::max).values == std::vector<float>{0.5f, -1.0f, 7.0f});
  CHECK(pool(map, PoolingMode::max).layer_id == 2);
}

TEST_CASE("pool: parse and invalid maps") {
  CHECK(parse_pooling("avg") == PoolingMode::avg);
  CHECK_THROWS_AS(parse_pooling("min"), UsageError);
  CHECK_THROWS(LayerFeatureMap({1, 2, 3}, 2, 2, 1, 0));
  CHECK_THROWS(LayerFeatureMap({}, 0, 1, 1, 0));
  CHECK_THROWS(LayerFeatureMap({NAN}, 1, 1, 1, 0));
}

TEST_CASE("center: self, zero mean, arithmetic, mismatch") {
  const PooledVector v{0, {3, 5}};
  CHECK(center(v, {0, {3, 5}, 1}).values == std::vector<float>{0, 0});
  CHECK(center(v, {0, {0, 0}, 1}).values == v.values);
  CHECK(center(v, {0, {1, 2}, 1}).values == std::vector<float>{2, 3});
  CHECK_THROWS_AS(center(v, {0, {1, 2, 3}, 1}), DimensionError);
}

TEST_CASE("max pooling commutes with subtracting a per-channel constant") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto map = random_map(rng, 3, 4, 5, 0);
    std::vector<float> k(5);
    std::normal_distribution<float> n;
    for (auto& x : k) x = n(rng);
    std::vector<float> shifted(map.values().begin(), map.values().end());
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] -= k[i % 5];
    const auto a = center(pool(map, PoolingMode::max), {0, k, 1});
    const auto b = pool(LayerFeatureMap(shifted, 3, 4, 5, 0), PoolingMode::max);
    CHECK(a.values == b.values);
  }
}

TEST_CASE("image_descriptor: one layer is P v") {
  std::mt19937_64 rng(1);
  const auto map = random_map(rng, 2, 3, 4, 5);
  const LayerStats stats{5, {0.1f, -0.2f, 0.3f, 0.0f}, 10};
  const auto model = stats_only(32, 9, {stats});
  const auto projections = projections_for(model);
  const std::vector<LayerFeatureMap> maps{map};
  const auto v = center(pool(map, PoolingMode::max), stats);
  CHECK(image_descriptor(maps, model, projections) == project(projections.for_layer(5), v.values));
}

TEST_CASE("image_descriptor: two identical layers with the same P give 2 P v") {
  std::mt19937_64 rng(2);
  const auto p = generate_semi_orthogonal(3, 16, 4, 0);
  const ProjectionMatrix p0(p.entries(), 0, p.seed()), p1(p.entries(), 1, p.seed());
  const ProjectionSet set(16, 0, {p0, p1});
  const auto map = random_map(rng, 2, 2, 4, 0);
  const LayerFeatureMap twin(std::vector<float>(map.values().begin(), map.values().end()), 2, 2, 4, 1);
  const LayerStats s0{0, {0, 0, 0, 0}, 1}, s1{1, {0, 0, 0, 0}, 1};
  const auto model = stats_only(16, 0, {s0, s1});
  const std::vector<LayerFeatureMap> maps{map, twin};
  const auto y = image_descriptor(maps, model, set);
  const auto h = project(p0, pool(map, PoolingMode::max).values);
  for (std::size_t i = 0; i < 16; ++i) CHECK(y[i] == 2.0f * h[i]);
}

TEST_CASE("image_descriptor: three layers match a naive loop reference") {
  std::mt19937_64 rng(3);
  const std::vector<std::size_t> channels{3, 5, 7};
  std::vector<LayerFeatureMap> maps;
  std::vector<LayerStats> stats;
  std::normal_distribution<float> n;
  for (int l = 0; l < 3; ++l) {
    maps.push_back(random_map(rng, 2, 3, channels[l], l));
    std::vector<float> mean(channels[l]);
    for (auto& x : mean) x = n(rng);
    stats.push_back({l, mean, 4});
  }
  for (auto mode : {PoolingMode::max, PoolingMode::avg}) {
    const auto model = stats_only(64, 17, stats, mode);
    const auto set = projections_for(model);
    const auto y = image_descriptor(maps, model, set);

    std::vector<double> ref(64, 0.0);
    for (int l = 0; l < 3; ++l) {
      const auto& P = set.for_layer(l).entries();
      for (std::size_t c = 0; c < channels[l]; ++c) {
        double pooled = mode == PoolingMode::max ? -INFINITY : 0.0;
        for (std::size_t h = 0; h < 2; ++h) {
          for (std::size_t w = 0; w < 3; ++w) {
            const double x = maps[l].at(h, w, c);
            pooled = mode == PoolingMode::max ? std::max(pooled, x) : pooled + x;
          }
        }
        if (mode == PoolingMode::avg) pooled = static_cast<float>(pooled / 6.0);
        const double v = static_cast<float>(static_cast<float>(pooled) - stats[l].mean[c]);
        for (std::size_t i = 0; i < 64; ++i) ref[i] += double(P(i, c)) * v;
      }
    }
    for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(y[i] - ref[i]) <= 1e-5);
  }
}

TEST_CASE("image_descriptor: positive scaling of the centred input scales y") {
  std::mt19937_64 rng(4);
  const auto map = random_map(rng, 2, 2, 4, 0);
  std::vector<float> scaled(map.values().begin(), map.values().end());
  for (auto& x : scaled) x *= 4.0f;
  const auto model = stats_only(32, 1, {{0, {0, 0, 0, 0}, 1}});
  const auto set = projections_for(model);
  const std::vector<LayerFeatureMap> a{map}, b{LayerFeatureMap(scaled, 2, 2, 4, 0)};
  const auto ya = image_descriptor(a, model, set);
  const auto yb = image_descriptor(b, model, set);
  for (std::size_t i = 0; i < 32; ++i) CHECK(yb[i] == 4.0f * ya[i]);
}

TEST_CASE("image_descriptor: missing layer and wrong width name the layer") {
  std::mt19937_64 rng(5);
  const auto model = stats_only(16, 1, {{0, {0, 0}, 1}, {4, {0, 0, 0}, 1}});
  const auto set = projections_for(model);
  const std::vector<LayerFeatureMap> missing{random_map(rng, 1, 1, 2, 0)};
  CHECK_THROWS_WITH_AS(image_descriptor(missing, model, set), doctest::Contains("layer 4"),
                       DimensionError);
  const std::vector<LayerFeatureMap> wide{random_map(rng, 1, 1, 2, 0), random_map(rng, 1, 1, 5, 4)};
  CHECK_THROWS_WITH_AS(image_descriptor(wide, model, set), doctest::Contains("layer 4"),
                       DimensionError);
  // Extra layers are ignored.
  const std::vector<LayerFeatureMap> extra{random_map(rng, 1, 1, 2, 0), random_map(rng, 1, 1, 3, 4),
                                           random_map(rng, 1, 1, 9, 7)};
  CHECK(image_descriptor(extra, model, set).dim() == 16);
}

TEST_CASE("fit: single sample of a single class is degenerate") {
  std::mt19937_64 rng(6);
  InMemorySource src({{{random_map(rng, 2, 2, 3, 0)}, 0}});
  FitConfig cfg;
  cfg.hd_dim = 16;
  CHECK_THROWS_WITH_AS(fit(src, cfg), doctest::Contains("all-zero"), FitError);
}

TEST_CASE("fit: two classes of two identical samples each") {
  std::mt19937_64 rng(7);
  const auto a = random_map(rng, 2, 2, 4, 0, 0, 1.0);
  const auto b = random_map(rng, 2, 2, 4, 0, 0, -1.0);
  InMemorySource src({{{a}, 0}, {{a}, 0}, {{b}, 1}, {{b}, 1}});
  FitConfig cfg;
  cfg.hd_dim = 64;
  const auto model = fit(src, cfg);
  REQUIRE(model.classes.size() == 2);
  CHECK(angle_degrees(model.classes[0].descriptor, model.classes[1].descriptor) > 0.0);
  const auto ys = describe(src, model, projections_for(model));
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const int own = src.label(i);
    CHECK(angle_degrees(ys[i], model.classes[own].descriptor) <
          angle_degrees(ys[i], model.classes[1 - own].descriptor));
  }
}

TEST_CASE("fit: training samples sit closest to their own class") {
  const auto src = toy_source(11, 3, 40);
  FitConfig cfg;
  cfg.hd_dim = 256;
  const auto model = fit(src, cfg);
  const auto ys = describe(src, model, projections_for(model));
  std::size_t own = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    std::vector<double> ang;
    for (const auto& c : model.classes) ang.push_back(angle_degrees(ys[i], c.descriptor));
    const auto best = std::min_element(ang.begin(), ang.end()) - ang.begin();
    own += model.classes[best].class_id == src.label(i) ? 1 : 0;
  }
  CHECK(own >= 0.9 * ys.size());
}

TEST_CASE("fit: deterministic, thread-count independent, order-robust") {
  const auto src = toy_source(12, 2, 150);
  FitConfig cfg;
  cfg.hd_dim = 128;
  const auto a = fit(src, cfg);
  CHECK(a == fit(src, cfg));
  cfg.threads = 3;
  CHECK(a == fit(src, cfg));

  std::vector<InMemorySource::Sample> shuffled;
  std::vector<std::size_t> order(src.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(1));
  const std::vector<int> ids{0, 1};
  for (auto i : order) shuffled.push_back({src.read(i, ids), src.label(i)});
  const auto b = fit(InMemorySource(std::move(shuffled)), cfg);
  for (std::size_t k = 0; k < a.classes.size(); ++k) {
    CHECK(relative_diff(a.classes[k].descriptor, b.classes[k].descriptor) <= 1e-5);
  }
}

TEST_CASE("fit: errors for unlabelled data, undeclared classes and shape drift") {
  std::mt19937_64 rng(13);
  FitConfig cfg;
  cfg.hd_dim = 16;
  InMemorySource unlabelled({{{random_map(rng, 1, 1, 2, 0)}, 0}, {{random_map(rng, 1, 1, 2, 0)}, 0}},
                            false);
  CHECK_THROWS_AS(fit(unlabelled, cfg), FitError);

  const auto src = toy_source(14, 2, 5);
  cfg.declared_classes = {0, 1, 2};
  CHECK_THROWS_WITH_AS(fit(src, cfg), doctest::Contains("class 2 has zero"), FitError);
  cfg.declared_classes = {};

  InMemorySource drift({{{random_map(rng, 1, 1, 2, 0)}, 0}, {{random_map(rng, 1, 1, 3, 0)}, 0}});
  CHECK_THROWS_WITH_AS(fit(drift, cfg), doctest::Contains("sample 1, layer 0"), FitError);

  cfg.layers = {9};
  CHECK_THROWS_AS(fit(src, cfg), UsageError);
}

TEST_CASE("fit: layer selection keeps the fused model's projections") {
  const auto src = toy_source(15, 2, 10);
  FitConfig cfg;
  cfg.hd_dim = 32;
  const auto full = projections_for(fit(src, cfg));
  cfg.layers = {1};
  const auto single = fit(src, cfg);
  REQUIRE(single.layers.size() == 1);
  CHECK(projections_for(single).for_layer(1).entries() == full.for_layer(1).entries());
}

TEST_CASE("ensemble: one member is a bound copy with the same angle structure") {
  const auto src = toy_source(16, 3, 20);
  FitConfig cfg;
  cfg.hd_dim = 512;
  const auto model = fit(src, cfg);
  const std::vector<FittedModel> members{model};
  const std::vector<std::uint64_t> seeds{99};
  const auto ens = ensemble_descriptor(members, seeds);
  const auto z = random_rademacher(99, 512);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(ens.classes[k].descriptor == bind(model.classes[k].descriptor, z));
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(cosine(ens.classes[k].descriptor, ens.classes[j].descriptor) -
                     cosine(model.classes[k].descriptor, model.classes[j].descriptor)) <= 1e-6);
    }
  }
  const auto y = describe(src, model, projections_for(model))[0];
  const std::vector<HdVector> ys{y};
  CHECK(ensemble_image_descriptor(ys, ens) == bind(y, z));
}

TEST_CASE("ensemble: two identical members bundle to about 1/sqrt(2)") {
  const auto src = toy_source(17, 2, 20);
  FitConfig cfg;
  cfg.hd_dim = 10000;
  const auto model = fit(src, cfg);
  const std::vector<FittedModel> members{model, model};
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto ens = ensemble_descriptor(members, seeds);
  const auto z1 = random_rademacher(1, 10000), z2 = random_rademacher(2, 10000);
  for (const auto& c : ens.classes) {
    const auto& d = model.classes[static_cast<std::size_t>(c.class_id)].descriptor;
    CHECK(std::abs(cosine(c.descriptor, bind(d, z1)) - 1.0 / std::sqrt(2.0)) <= 0.05);
  }
  // Identical y across members: y * (z1 + z2).
  const auto y = random_gaussian(5, 10000);
  const std::vector<HdVector> ys{y, y};
  const auto ystar = ensemble_image_descriptor(ys, ens);
  for (std::size_t i = 0; i < 10000; ++i) CHECK(ystar[i] == y[i] * (z1[i] + z2[i]));
}

TEST_CASE("ensemble: generic two-member y* against a naive loop") {
  FittedModel a;
  a.hd_dim = 100;
  a.classes = {{0, random_gaussian(1, 100)}};
  a.layers = {{0, {0.0f}, 1}};
  FittedModel b = a;
  b.classes = {{0, random_gaussian(2, 100)}};
  const std::vector<FittedModel> members{a, b};
  const std::vector<std::uint64_t> seeds{5, 6};
  const auto ens = ensemble_descriptor(members, seeds);
  const auto y1 = random_gaussian(10, 100), y2 = random_gaussian(11, 100);
  const auto z1 = random_rademacher(5, 100), z2 = random_rademacher(6, 100);
  const std::vector<HdVector> ys{y1, y2};
  const auto ystar = ensemble_image_descriptor(ys, ens);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(ystar[i] == static_cast<float>(double(y1[i]) * z1[i] + double(y2[i]) * z2[i]));
  }
}

TEST_CASE("ensemble: precondition errors") {
  CHECK_THROWS_AS(ensemble_descriptor({}, {}), UsageError);
  FittedModel a;
  a.hd_dim = 10;
  a.classes = {{0, random_gaussian(1, 10)}};
  FittedModel b = a;
  b.hd_dim = 12;
  b.classes = {{0, random_gaussian(1, 12)}};
  const std::vector<std::uint64_t> seeds{1, 2};
  CHECK_THROWS_AS(ensemble_descriptor(std::vector<FittedModel>{a, b}, seeds), DimensionError);
  FittedModel c = a;
  c.classes = {{3, random_gaussian(1, 10)}};
  CHECK_THROWS_AS(ensemble_descriptor(std::vector<FittedModel>{a, c}, seeds), UsageError);
  const std::vector<std::uint64_t> one{1};
  CHECK_THROWS_AS(ensemble_descriptor(std::vector<FittedModel>{a, a}, one), UsageError);
  const auto ens = ensemble_descriptor(std::vector<FittedModel>{a, a}, seeds);
  const std::vector<HdVector> ys{random_gaussian(3, 10)};
  CHECK_THROWS_AS(ensemble_image_descriptor(ys, ens), UsageError);
}

TEST_CASE("parallel_for: lowest failing index wins") {
  std::vector<int> hit(10, 0);
  CHECK_THROWS_WITH(parallel_for(10, 4, [&](std::size_t k) {
                      hit[k] = 1;
                      if (k == 3 || k == 7) throw std::runtime_error("task " + std::to_string(k));
                    }),
                    "task 3");
  CHECK(std::accumulate(hit.begin(), hit.end(), 0) == 10);
}
