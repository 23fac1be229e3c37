#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "mlcs/error.hpp"
#include "mlcs/sim.hpp"
#include "support.hpp"

using namespace mlcs;
using mlcs::test::rel_diff;

TEST_CASE("impulse response at closest approach") {
  const RadarParams p;
  const double tau0 = 2.0 * p.slant_range_m() / p.light_speed_mps();
  const cplx h = sim::impulse_response(p, 0.0, tau0);
  const cplx expected = std::polar(1.0, -4.0 * std::numbers::pi * p.carrier_freq_hz() * p.slant_range_m() /
                                            p.light_speed_mps());
  CHECK(std::abs(h - expected) < 1e-12);
}

TEST_CASE("impulse response vanishes outside the pulse and is unit modulus inside") {
  const RadarParams p;
  const double tau0 = 2.0 * p.slant_range_m() / p.light_speed_mps();
  const double tr = p.pulse_duration_s();
  CHECK(sim::impulse_response(p, 0.0, tau0 + 0.6 * tr) == cplx{});
  CHECK(sim::impulse_response(p, 0.0, tau0 - 0.6 * tr) == cplx{});
  CHECK(std::abs(sim::impulse_response(p, 0.0, tau0 + 0.25 * tr)) == doctest::Approx(1.0));
  CHECK(sim::impulse_response(p, 0.3, tau0) == cplx{});  // outside the aperture
  // Range history shifts the pulse centre off broadside.
  const double eta = 0.15;
  const double r = std::hypot(p.slant_range_m(), p.platform_velocity_mps() * eta);
  const cplx h = sim::impulse_response(p, eta, 2.0 * r / p.light_speed_mps());
  CHECK(std::abs(h) == doctest::Approx(1.0));
  CHECK(std::arg(h * std::polar(1.0, 4.0 * std::numbers::pi * r / p.wavelength_m())) ==
        doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("hamming envelopes taper the response") {
  RadarSettings s;
  s.range_window = Window::hamming;
  s.azimuth_window = Window::hamming;
  const RadarParams p(s);
  const double tau0 = 2.0 * p.slant_range_m() / p.light_speed_mps();
  CHECK(std::abs(sim::impulse_response(p, 0.0, tau0)) == doctest::Approx(1.0));
  CHECK(std::abs(sim::impulse_response(p, 0.0, tau0 + 0.5 * p.pulse_duration_s())) == doctest::Approx(0.08));
}

TEST_CASE("zero scene simulates to zero, with or without noise") {
  const RadarParams p;
  const auto scene = sim::empty_scene(p, Shape{16, 16});
  CHECK(squared_norm(sim::simulate_raw(scene, p, Seed{1}, std::nullopt)) == 0.0);
  CHECK(squared_norm(sim::simulate_raw(scene, p, Seed{1}, 20.0)) == 0.0);
}

TEST_CASE("simulation is linear in the scene") {
  const RadarParams p;
  const Shape s{32, 24};
  const sim::CellTarget t1{5, 7, {1.0, 0.5}}, t2{20, 15, {-0.3, 2.0}};
  const auto y1 = sim::simulate_raw(sim::point_scene(p, s, std::vector{t1}), p, Seed{0}, std::nullopt);
  const auto y2 = sim::simulate_raw(sim::point_scene(p, s, std::vector{t2}), p, Seed{0}, std::nullopt);
  const auto y12 = sim::simulate_raw(sim::point_scene(p, s, std::vector{t1, t2}), p, Seed{0}, std::nullopt);
  ComplexGrid sum(s);
  for (std::size_t j = 0; j < sum.size(); ++j) sum[j] = y1[j] + y2[j];
  CHECK(rel_diff(y12, sum) <= 1e-12);

  const cplx alpha{0.7, -1.3};
  const auto ya =
      sim::simulate_raw(sim::point_scene(p, s, std::vector{sim::CellTarget{5, 7, alpha * t1.amplitude}}), p,
                        Seed{0}, std::nullopt);
  ComplexGrid scaled(s);
  for (std::size_t j = 0; j < s.size(); ++j) scaled[j] = alpha * y1[j];
  CHECK(rel_diff(ya, scaled) <= 1e-12);
}

TEST_CASE("observation matrix columns equal single-target simulations") {
  const RadarParams p;
  const Shape s{16, 16};
  const auto h = sim::observation_matrix(s, p);
  CHECK(h.rows() == 256);
  CHECK(h.cols() == 256);
  for (std::size_t cell : {0, 37, 136, 255}) {
    const auto y = sim::simulate_raw(
        sim::point_scene(p, s, std::vector{sim::CellTarget{cell / 16, cell % 16, 1.0}}), p, Seed{0},
        std::nullopt);
    std::vector<cplx> col(256);
    for (std::size_t r = 0; r < 256; ++r) col[r] = h(r, cell);
    CHECK(rel_diff(y.values(), col) <= 1e-10);
  }
}

TEST_CASE("observation matrix reproduces simulation of a random sparse scene") {
  RadarSettings settings;
  settings.azimuth_window = Window::hamming;
  const RadarParams p(settings);
  const Shape s{12, 10};
  auto scene = sim::empty_scene(p, s);
  const CounterRng rng(Seed{4}, 0);
  for (std::uint64_t j = 0; j < 8; ++j) {
    const auto cell = rng.bounded(j, s.size());
    scene.reflectivity[cell] = std::polar(0.5 + rng.uniform(100 + j), 6.28 * rng.uniform(200 + j));
  }
  const auto y = sim::simulate_raw(scene, p, Seed{0}, std::nullopt);
  const auto hx = sim::observation_matrix(s, p).apply(scene.reflectivity.values());
  CHECK(rel_diff(y.values(), hx) <= 1e-10);
}

TEST_CASE("observation matrix respects the entry cap") {
  CHECK_THROWS_AS(sim::observation_matrix(Shape{16, 16}, RadarParams(), 1000), ConfigError);
}

TEST_CASE("noise calibration matches the requested SNR") {
  const RadarParams p;
  const Shape s{128, 128};
  const auto scene = sim::point_scene(p, s, std::vector{sim::CellTarget{64, 64, 1.0}, sim::CellTarget{30, 90, 0.5}});
  const auto clean = sim::simulate_raw(scene, p, Seed{9}, std::nullopt);
  for (double snr : {20.0, 0.0, 35.0}) {
    const auto noisy = sim::simulate_raw(scene, p, Seed{9}, snr);
    double ps = 0.0, pn = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (clean[j] == cplx{}) continue;
      ps += std::norm(clean[j]);
      pn += std::norm(noisy[j] - clean[j]);
    }
    CHECK(std::abs(10.0 * std::log10(ps / pn) - snr) < 0.5);
  }
  const auto again = sim::simulate_raw(scene, p, Seed{9}, 20.0);
  const auto other = sim::simulate_raw(scene, p, Seed{10}, 20.0);
  CHECK(rel_diff(again, sim::simulate_raw(scene, p, Seed{9}, 20.0)) == 0.0);
  CHECK(rel_diff(again, other) > 0.0);
}

TEST_CASE("targets outside the swath are rejected") {
  const RadarParams p;
  auto scene = sim::empty_scene(p, Shape{16, 16});
  scene.targets.push_back({0.0, p.slant_range_m() + 100.0 * p.range_cell_m(), 1.0});
  CHECK_THROWS_AS(sim::simulate_raw(scene, p, Seed{0}, std::nullopt), ConfigError);
  scene.targets = {{0.0, p.slant_range_m(), {std::nan(""), 0.0}}};
  CHECK_THROWS_AS(sim::check_scene(p, scene), ConfigError);
  CHECK_THROWS_AS(sim::point_scene(p, Shape{4, 4}, std::vector{sim::CellTarget{4, 0, 1.0}}), ConfigError);
}

TEST_CASE("off-grid target at a cell centre equals the on-grid target") {
  const RadarParams p;
  const Shape s{20, 16};
  const auto lattice = sim::make_lattice(p, s);
  auto off = sim::empty_scene(p, s);
  off.targets.push_back({p.platform_velocity_mps() * lattice.eta(7),
                         p.slant_range_m() + (5.0 - 8.0) * p.range_cell_m(), {0.0, 2.0}});
  const auto on = sim::point_scene(p, s, std::vector{sim::CellTarget{7, 5, {0.0, 2.0}}});
  CHECK(rel_diff(sim::simulate_raw(off, p, Seed{0}, std::nullopt), sim::simulate_raw(on, p, Seed{0}, std::nullopt)) <
        1e-9);
}

TEST_CASE("rayleigh scene fills only its region with unit mean intensity") {
  const RadarParams p;
  const Shape s{128, 128};
  const sim::RegionCells region{10, 110, 20, 120};
  const auto scene = sim::rayleigh_scene(p, s, region, Seed{3});
  double intensity = 0.0;
  for (std::size_t i = 0; i < s.n_azimuth; ++i) {
    for (std::size_t k = 0; k < s.n_range; ++k) {
      const bool inside = i >= 10 && i < 110 && k >= 20 && k < 120;
      if (!inside) CHECK(scene.reflectivity(i, k) == cplx{});
      if (inside) intensity += std::norm(scene.reflectivity(i, k));
    }
  }
  CHECK(intensity / region.pixel_count() == doctest::Approx(1.0).epsilon(0.03));
  CHECK(rel_diff(scene.reflectivity, sim::rayleigh_scene(p, s, region, Seed{3}).reflectivity) == 0.0);
  CHECK_THROWS_AS(sim::rayleigh_scene(p, s, sim::RegionCells{10, 10, 0, 4}, Seed{3}), ConfigError);
}

TEST_CASE("exact scatterer mode places K sub-cell scatterers per cell") {
  const RadarParams p;
  const Shape s{16, 16};
  sim::RayleighOptions opts;
  opts.exact_scatterers = true;
  opts.scatterers_per_cell = 25;
  const auto scene = sim::rayleigh_scene(p, s, sim::RegionCells{6, 9, 6, 8}, Seed{1}, opts);
  CHECK(scene.targets.size() == 6 * 25);
  CHECK(squared_norm(scene.reflectivity) == 0.0);
  double power = 0.0;
  for (const auto& t : scene.targets) power += std::norm(t.amplitude);
  CHECK(power == doctest::Approx(6.0));
  CHECK_NOTHROW(sim::check_scene(p, scene));
}

TEST_CASE("sample-wise masks") {
  const Shape s{10, 10};
  const auto m = sim::generate_mask(s, 0.2, Seed{1});
  CHECK(m.count() == 20);
  CHECK(std::set<std::uint64_t>(m.retained.begin(), m.retained.end()).size() == 20);
  CHECK(std::is_sorted(m.retained.begin(), m.retained.end()));
  CHECK_NOTHROW(sim::validate_mask(m));
  CHECK(sim::generate_mask(s, 0.2, Seed{1}).retained == m.retained);
  CHECK(sim::generate_mask(s, 0.2, Seed{2}).retained != m.retained);

  for (auto pattern : {sim::SamplingPattern::sample_wise, sim::SamplingPattern::pulse_wise}) {
    const auto full = sim::generate_mask(s, 1.0, Seed{5}, pattern);
    REQUIRE(full.count() == 100);
    for (std::uint64_t j = 0; j < 100; ++j) CHECK(full.retained[j] == j);
  }
  CHECK_THROWS_AS(sim::generate_mask(s, 0.0, Seed{1}), ConfigError);
  CHECK_THROWS_AS(sim::generate_mask(s, 1.5, Seed{1}), ConfigError);
  CHECK_THROWS_AS(sim::generate_mask(s, 0.001, Seed{1}), ConfigError);
}

TEST_CASE("pulse-wise masks keep whole pulses") {
  const Shape s{30, 8};
  const auto m = sim::generate_mask(s, 0.4, Seed{7}, sim::SamplingPattern::pulse_wise);
  CHECK(m.count() == 12 * 8);
  std::set<std::uint64_t> pulses;
  for (auto idx : m.retained) pulses.insert(idx / 8);
  CHECK(pulses.size() == 12);
  for (auto pulse : pulses)
    for (std::uint64_t k = 0; k < 8; ++k) CHECK(std::binary_search(m.retained.begin(), m.retained.end(), pulse * 8 + k));
}

TEST_CASE("selection and zero-fill are adjoint") {
  const Shape s{9, 11};
  const auto y = test::random_grid(s, 1);
  const auto mask = sim::generate_mask(s, 0.3, Seed{4});
  const auto data = sim::subsample(y, mask);
  CHECK(data.values.size() == mask.count());
  CHECK(squared_norm(data.values) <= squared_norm(y));

  sim::CompressedData d{test::random_vector(mask.count(), 2), mask, s};
  const auto zf = sim::subsample_adjoint(d);
  CHECK(sim::subsample(zf, mask).values == d.values);
  CHECK(inner_product(data.values, d.values) == inner_product(y, zf));

  const auto full = sim::generate_mask(s, 1.0, Seed{0});
  CHECK(sim::subsample(y, full).values == std::vector<cplx>(y.values().begin(), y.values().end()));
  sim::CompressedData dfull{test::random_vector(s.size(), 3), full, s};
  CHECK(sim::subsample_adjoint(dfull).storage() == dfull.values);

  sim::SamplingMask one{{17}, s.size(), 1.0 / s.size()};
  CHECK(sim::subsample(y, one).values == std::vector<cplx>{y[17]});
  CHECK_THROWS_AS(sim::subsample(test::random_grid(Shape{3, 3}, 0), mask), ShapeError);
}

TEST_CASE("mask validation") {
  CHECK_THROWS_AS(sim::validate_mask({{1, 1}, 4, 0.5}), ShapeError);
  CHECK_THROWS_AS(sim::validate_mask({{2, 1}, 4, 0.5}), ShapeError);
  CHECK_THROWS_AS(sim::validate_mask({{1, 4}, 4, 0.5}), ShapeError);
}

TEST_CASE("compressed data persistence") {
  const auto dir = test::scratch_dir("sim_io");
  const Shape s{6, 7};
  const auto mask = sim::generate_mask(s, 0.5, Seed{1});
  const auto data = sim::subsample(test::random_grid(s, 2), mask);
  const std::string stem = (dir / "data").string();
  sim::save_compressed(data, stem);
  CHECK(std::filesystem::file_size(stem + ".mask.u64") == 8 * (3 + mask.count()));
  CHECK(std::filesystem::file_size(stem + ".values.cf32") == 8 * mask.count());
  const auto back = sim::load_compressed(stem);
  CHECK(back.full_shape == s);
  CHECK(back.mask.retained == mask.retained);
  CHECK(rel_diff(back.values, data.values) < 1e-7);

  std::filesystem::resize_file(stem + ".values.cf32", 8 * mask.count() - 8);
  CHECK_THROWS_AS(sim::load_compressed(stem), IoError);
  CHECK_THROWS_AS(sim::load_compressed((dir / "missing").string()), IoError);
}

TEST_CASE("target list text format") {
  const auto dir = test::scratch_dir("targets");
  const auto path = (dir / "targets.txt").string();
  {
    std::ofstream os(path);
    os << "# azimuth, range, re, im\n"
       << "1.5, 20000.0, 1.0, -0.5\n"
       << "\n"
       << "-3  19990.5  0.25  # trailing comment\n";
  }
  const auto t = sim::read_target_list(path);
  REQUIRE(t.size() == 2);
  CHECK(t[0].azimuth_m == 1.5);
  CHECK(t[0].amplitude == cplx(1.0, -0.5));
  CHECK(t[1].range_m == 19990.5);
  CHECK(t[1].amplitude == cplx(0.25, 0.0));

  sim::write_target_list(path, t);
  const auto back = sim::read_target_list(path);
  REQUIRE(back.size() == 2);
  CHECK(back[1].azimuth_m == t[1].azimuth_m);
  CHECK(back[0].amplitude == t[0].amplitude);

  {
    std::ofstream os(path);
    os << "1.0, 2.0\n";
  }
  CHECK_THROWS_AS(sim::read_target_list(path), ConfigError);
  {
    std::ofstream os(path);
    os << "1.0, abc, 2.0\n";
  }
  CHECK_THROWS_AS(sim::read_target_list(path), ConfigError);
}
