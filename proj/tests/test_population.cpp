#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fedsel/population.hpp"
#include "fedsel/random.hpp"

using namespace fedsel;

namespace {

Device make_device(int id, std::int64_t dataset, double capacity) {
  Device d;
  d.id = id;
  d.dataset_bytes = dataset;
  d.update_bytes = 10'000;
  d.compute_capacity_cps = capacity;
  return d;
}

}  // namespace

TEST_CASE("category counts follow the mix") {
  PopulationConfig cfg;
  cfg.n_devices = 10;
  CHECK(category_counts(cfg) == std::vector<int>{5, 3, 2});

  for (int n = 10; n <= 1000; n += 10) {
    cfg.n_devices = n;
    REQUIRE(category_counts(cfg) == std::vector<int>{n / 2, 3 * n / 10, n / 5});
  }

  // Remainders land on the first category.
  cfg.n_devices = 7;  // 3.5 -> remainder, 2.1 -> 2, 1.4 -> 1
  CHECK(category_counts(cfg) == std::vector<int>{4, 2, 1});
  cfg.n_devices = 1;
  CHECK(category_counts(cfg) == std::vector<int>{1, 0, 0});
}

TEST_CASE("sampled population has the requested composition") {
  PopulationConfig cfg;
  cfg.n_devices = 10;
  const auto devices = sample_population(cfg);
  REQUIRE(devices.size() == 10);
  int counts[3] = {0, 0, 0};
  for (std::size_t i = 0; i < devices.size(); ++i) {
    CHECK(devices[i].id == static_cast<int>(i));
    ++counts[static_cast<int>(devices[i].category)];
    CHECK(devices[i].position.x_km >= 0.0);
    CHECK(devices[i].position.x_km < cfg.area_side_km);
    CHECK(devices[i].position.y_km >= 0.0);
    CHECK(devices[i].position.y_km < cfg.area_side_km);
  }
  CHECK(counts[0] == 5);
  CHECK(counts[1] == 3);
  CHECK(counts[2] == 2);
}

TEST_CASE("zero spread gives the category means exactly") {
  PopulationConfig cfg;
  cfg.n_devices = 20;
  cfg.dataset_sigma_bytes = 0.0;
  cfg.update_sigma_bytes = 0.0;
  for (const auto& d : sample_population(cfg)) {
    CHECK(d.update_bytes == 10'000);
    switch (d.category) {
      case DeviceKind::Smartphone:
        CHECK(d.dataset_bytes == 150'000);
        CHECK(d.compute_capacity_cps == 1e6);
        break;
      case DeviceKind::Vehicle:
        CHECK(d.dataset_bytes == 250'000);
        break;
      case DeviceKind::IoTSensor:
        CHECK(d.dataset_bytes == 100'000);
        break;
    }
  }
}

TEST_CASE("sampling is deterministic and seed dependent") {
  PopulationConfig cfg;
  cfg.seed = 42;
  const auto a = sample_population(cfg);
  const auto b = sample_population(cfg);
  CHECK(a == b);
  std::ostringstream sa, sb;
  write_population_csv(sa, a);
  write_population_csv(sb, b);
  CHECK(sa.str() == sb.str());

  cfg.seed = 43;
  CHECK(sample_population(cfg) != a);
}

TEST_CASE("smaller populations are per-category prefixes of larger ones") {
  PopulationConfig small;
  small.n_devices = 100;
  PopulationConfig large = small;
  large.n_devices = 800;
  const auto s = sample_population(small);
  const auto l = sample_population(large);
  const auto sc = category_counts(small);
  const auto lc = category_counts(large);
  std::size_t s_off = 0, l_off = 0;
  for (std::size_t c = 0; c < sc.size(); ++c) {
    for (int i = 0; i < sc[c]; ++i) {
      auto a = s[s_off + i];
      auto b = l[l_off + i];
      a.id = b.id = 0;
      REQUIRE(a == b);
    }
    s_off += sc[c];
    l_off += lc[c];
  }
}

TEST_CASE("sampled sizes never drop below one byte") {
  PopulationConfig cfg;
  cfg.n_devices = 500'000;  // one dataset and one update draw each
  cfg.categories = {{DeviceKind::IoTSensor, 1.0, 2.0, 5e5}};
  cfg.dataset_sigma_bytes = 5.0;
  cfg.update_mean_bytes = 1.0;
  cfg.update_sigma_bytes = 3.0;
  for (const auto& d : sample_population(cfg)) {
    REQUIRE(d.dataset_bytes >= 1);
    REQUIRE(d.update_bytes >= 1);
  }
}

TEST_CASE("invalid population configs are rejected") {
  PopulationConfig cfg;
  cfg.categories[0].mix_fraction = 0.6;
  CHECK_THROWS_AS(sample_population(cfg), std::invalid_argument);
  cfg = PopulationConfig{};
  cfg.n_devices = 0;
  CHECK_THROWS_AS(sample_population(cfg), std::invalid_argument);
  cfg = PopulationConfig{};
  cfg.dataset_sigma_bytes = -1.0;
  CHECK_THROWS_AS(sample_population(cfg), std::invalid_argument);
}

TEST_CASE("compute delay") {
  CHECK(compute_delay(make_device(0, 150'000, 1e6), 0.5) == doctest::Approx(0.075).epsilon(1e-15));
  CHECK(compute_delay(make_device(0, 250'000, 2e6), 0.5) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(compute_delay(make_device(0, 250'000, 2e6), 0.0) == 0.0);
  CHECK_THROWS_AS(compute_delay(make_device(0, 100, 0.0), 0.5), std::domain_error);
}

TEST_CASE("units: cycles per byte fits the round, cycles per bit does not") {
  const double t_upd = 0.120;
  const Device phone = make_device(0, 150'000, 1e6);
  const Device vehicle = make_device(1, 250'000, 2e6);
  const Device sensor = make_device(2, 100'000, 5e5);
  CHECK(compute_delay(phone, 0.5) == 0.075);
  CHECK(compute_delay(vehicle, 0.5) == 0.0625);
  CHECK(compute_delay(sensor, 0.5) == 0.1);
  // Reading the intensity per bit multiplies every delay by eight.
  for (const auto& d : {phone, vehicle, sensor}) CHECK(compute_delay(d, 0.5 * 8.0) > t_upd);
}

TEST_CASE("communication delay") {
  CHECK(comm_delay(10'000, 1e6) == doctest::Approx(0.08).epsilon(1e-15));
  CHECK(comm_delay(10'000, 984035.3857544257) == doctest::Approx(0.08129788944395204).epsilon(1e-12));
  CHECK(comm_delay(0, 1e6) == 0.0);
  CHECK(std::isinf(comm_delay(10'000, 0.0)));
}

TEST_CASE("weights") {
  auto w_of = [](std::vector<std::int64_t> sizes) {
    std::vector<Device> ds;
    for (std::size_t i = 0; i < sizes.size(); ++i) ds.push_back(make_device(static_cast<int>(i), sizes[i], 1e6));
    return weights(ds);
  };
  CHECK(w_of({100, 300}) == std::vector<double>{0.25, 0.75});
  CHECK(w_of({7, 7, 7, 7}) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  const auto w = w_of({150'000, 250'000, 100'000});
  CHECK(w[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w[2] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(weights(std::vector<Device>{}), std::domain_error);
  CHECK_THROWS_AS(w_of({10, 0}), std::domain_error);
}

TEST_CASE("weights sum to one and ignore uniform scaling") {
  Rng rng(99);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    PopulationConfig cfg;
    cfg.seed = seed;
    cfg.n_devices = 1 + static_cast<int>(rng.index(500));
    auto devices = sample_population(cfg);
    const auto w = weights(devices);
    double sum = 0.0;
    for (double x : w) sum += x;
    REQUIRE(std::abs(sum - 1.0) < 1e-9);

    const auto scale = static_cast<std::int64_t>(2 + rng.index(50));
    for (auto& d : devices) d.dataset_bytes *= scale;
    const auto ws = weights(devices);
    for (std::size_t i = 0; i < w.size(); ++i) REQUIRE(std::abs(ws[i] - w[i]) < 1e-9);
  }
}

TEST_CASE("population CSV round-trips") {
  PopulationConfig cfg;
  cfg.n_devices = 57;
  cfg.seed = 5;
  const auto devices = sample_population(cfg);
  std::stringstream buf;
  write_population_csv(buf, devices);
  CHECK(read_population_csv(buf) == devices);

  std::stringstream bad("id,category\n1,Smartphone\n");
  CHECK_THROWS_AS(read_population_csv(bad), std::runtime_error);
  std::stringstream bad_row("id,category,x_km,y_km,dataset_bytes,update_bytes,capacity_cps\n1,Drone,0,0,1,1,1\n");
  CHECK_THROWS_AS(read_population_csv(bad_row), std::runtime_error);
}
