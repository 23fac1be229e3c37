#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <set>
#include <sstream>

#include "mlcs/error.hpp"
#include "mlcs/fft.hpp"
#include "mlcs/grid.hpp"
#include "mlcs/grid_io.hpp"
#include "mlcs/radar_params.hpp"
#include "mlcs/random.hpp"
#include "support.hpp"

using namespace mlcs;
using mlcs::test::random_grid;
using mlcs::test::rel_diff;

namespace {

// Direct O(N^2) unitary DFT of one sequence.
std::vector<cplx> naive_dft(const std::vector<cplx>& x, bool inverse) {
  const std::size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{};
    for (std::size_t t = 0; t < n; ++t) {
      const double arg = sign * 2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * std::polar(1.0, arg);
    }
    out[k] = acc / std::sqrt(static_cast<double>(n));
  }
  return out;
}

}  // namespace

TEST_CASE("grid construction checks data length") {
  CHECK_THROWS_AS(ComplexGrid(Shape{3, 4}, std::vector<cplx>(11)), ShapeError);
  ComplexGrid g(Shape{3, 4});
  g(2, 3) = {1.0, 2.0};
  CHECK(g[11] == cplx(1.0, 2.0));
  CHECK(g.row(2)[3] == cplx(1.0, 2.0));
}

TEST_CASE("look stack flattens look-major and rejects ragged looks") {
  const auto x = test::random_stack(3, Shape{4, 5}, 1);
  const auto flat = x.flatten();
  REQUIRE(flat.size() == 60);
  CHECK(flat[20] == x[1][0]);
  const auto back = LookStack::unflatten(flat, 3, Shape{4, 5});
  CHECK(rel_diff(back, x) == 0.0);
  CHECK_THROWS_AS(LookStack::unflatten(flat, 4, Shape{4, 5}), ShapeError);
  std::vector<ComplexGrid> ragged{ComplexGrid(Shape{2, 2}), ComplexGrid(Shape{2, 3})};
  CHECK_THROWS_AS(LookStack(std::move(ragged)), ShapeError);
  CHECK_THROWS_AS(LookStack(std::vector<ComplexGrid>{}), ShapeError);
}

TEST_CASE("inner product") {
  const auto a = random_grid(Shape{5, 7}, 1);
  const auto b = random_grid(Shape{5, 7}, 2);
  const cplx aa = inner_product(a, a);
  CHECK(aa.imag() == 0.0);
  CHECK(aa.real() == doctest::Approx(squared_norm(a)).epsilon(1e-14));
  CHECK(aa.real() >= 0.0);
  const cplx ab = inner_product(a, b);
  const cplx ba = inner_product(b, a);
  CHECK(std::abs(ab - std::conj(ba)) <= 1e-12 * std::abs(ab));
  CHECK(inner_product(ComplexGrid(Shape{5, 7}), b) == cplx{});
  CHECK_THROWS_AS(inner_product(a, ComplexGrid(Shape{7, 5})), ShapeError);
}

TEST_CASE("azimuth FFT matches a direct DFT on odd sizes") {
  const Shape s{9, 5};
  const auto g = random_grid(s, 3);
  for (auto dir : {Direction::forward, Direction::inverse}) {
    const auto f = fft_azimuth(g, dir);
    for (std::size_t k = 0; k < s.n_range; ++k) {
      std::vector<cplx> col(s.n_azimuth);
      for (std::size_t i = 0; i < s.n_azimuth; ++i) col[i] = g(i, k);
      const auto ref = naive_dft(col, dir == Direction::inverse);
      for (std::size_t i = 0; i < s.n_azimuth; ++i) CHECK(std::abs(f(i, k) - ref[i]) < 1e-12);
    }
  }
}

TEST_CASE("range FFT matches a direct DFT on odd sizes") {
  const Shape s{4, 15};
  const auto g = random_grid(s, 4);
  for (auto dir : {Direction::forward, Direction::inverse}) {
    const auto f = fft_range(g, dir);
    for (std::size_t i = 0; i < s.n_azimuth; ++i) {
      std::vector<cplx> row(g.row(i).begin(), g.row(i).end());
      const auto ref = naive_dft(row, dir == Direction::inverse);
      for (std::size_t k = 0; k < s.n_range; ++k) CHECK(std::abs(f(i, k) - ref[k]) < 1e-12);
    }
  }
}

TEST_CASE("FFTs are unitary and invert each other") {
  for (Shape s : {Shape{16, 16}, Shape{66, 64}, Shape{7, 3}}) {
    const auto g = random_grid(s, s.size());
    const auto fa = fft_azimuth(g, Direction::forward);
    const auto fr = fft_range(g, Direction::forward);
    CHECK(std::abs(norm(fa) - norm(g)) <= 1e-12 * norm(g));
    CHECK(std::abs(norm(fr) - norm(g)) <= 1e-12 * norm(g));
    CHECK(rel_diff(fft_azimuth(fa, Direction::inverse), g) <= 1e-12);
    CHECK(rel_diff(fft_range(fr, Direction::inverse), g) <= 1e-12);
  }
}

TEST_CASE("FFT of constant column and of an impulse") {
  const std::size_t n = 12;
  ComplexGrid ones(Shape{n, 3});
  for (auto& z : ones.values()) z = 1.0;
  const auto f = fft_azimuth(ones, Direction::forward);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::abs(f(0, k) - std::sqrt(double(n))) < 1e-12);
    for (std::size_t i = 1; i < n; ++i) CHECK(std::abs(f(i, k)) < 1e-12);
  }

  ComplexGrid impulse(Shape{2, n});
  impulse(1, 5) = 1.0;
  const auto spec = fft_range(impulse, Direction::forward);
  for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(spec(1, k)) == doctest::Approx(1.0 / std::sqrt(double(n))));
}

TEST_CASE("signed bin convention") {
  CHECK(signed_bin(0, 8) == 0);
  CHECK(signed_bin(3, 8) == 3);
  CHECK(signed_bin(4, 8) == -4);
  CHECK(signed_bin(7, 8) == -1);
  CHECK(signed_bin(2, 5) == 2);
  CHECK(signed_bin(3, 5) == -2);
}

TEST_CASE("radar params derive the documented geometry") {
  const RadarParams p;
  CHECK(p.wavelength_m() == doctest::Approx(299792458.0 / 5e9));
  CHECK(p.range_fm_rate_hzps() == doctest::Approx(75e6 / 2e-6));
  CHECK(p.range_sample_rate_hz() == doctest::Approx(90e6));
  const double ka = 2.0 * 350.0 * 350.0 / (p.wavelength_m() * 20e3);
  CHECK(p.azimuth_fm_rate_hzps() == doctest::Approx(ka));
  CHECK(p.doppler_bandwidth_hz() == doctest::Approx(ka * 0.4));
  CHECK(p.prf_hz() == doctest::Approx(1.2 * ka * 0.4));
  CHECK(p.range_cell_m() == doctest::Approx(299792458.0 / 180e6));
  CHECK(p.digest() == RadarParams().digest());
}

TEST_CASE("radar params reject invalid settings") {
  auto bad = [](auto mutate) {
    RadarSettings s;
    mutate(s);
    CHECK_THROWS_AS(RadarParams{s}, ConfigError);
  };
  bad([](RadarSettings& s) { s.platform_velocity_mps = -1.0; });
  bad([](RadarSettings& s) { s.carrier_freq_hz = 0.0; });
  bad([](RadarSettings& s) { s.pulse_duration_s = std::nan(""); });
  bad([](RadarSettings& s) { s.range_fm_rate_hzps = 1.0e13; });
  bad([](RadarSettings& s) { s.range_sample_rate_hz = 80e6; });
  bad([](RadarSettings& s) { s.prf_hz = 50.0; });
  bad([](RadarSettings& s) { s.azimuth_oversampling = 1.05; });
  // PRF high enough that the hyperbolic migration factor turns imaginary.
  bad([](RadarSettings& s) { s.prf_hz = 30000.0; });

  RadarSettings ok;
  ok.range_fm_rate_hzps = 75e6 / 2e-6;
  ok.range_sample_rate_hz = 1.1 * 75e6;
  CHECK_NOTHROW(RadarParams{ok});
  try {
    RadarSettings s;
    s.slant_range_m = -3.0;
    RadarParams p(s);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("slant_range_m") != std::string::npos);
  }
}

TEST_CASE("counter rng is a pure function of seed, stream and counter") {
  const CounterRng a(Seed{5}, 1), b(Seed{5}, 1), c(Seed{6}, 1), d(Seed{5}, 2);
  for (std::uint64_t k = 0; k < 100; ++k) {
    CHECK(a.bits(k) == b.bits(k));
    const double u = a.uniform(k);
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    CHECK(a.bounded(k, 7) < 7);
  }
  int same_seed = 0, same_stream = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    same_seed += a.bits(k) == c.bits(k);
    same_stream += a.bits(k) == d.bits(k);
  }
  CHECK(same_seed == 0);
  CHECK(same_stream == 0);

  CHECK(derive_seed(Seed{1}, {1, 2}).value != derive_seed(Seed{1}, {2, 1}).value);
  CHECK(derive_seed(Seed{1}, {1, 2}) == derive_seed(Seed{1}, {1, 2}));
}

TEST_CASE("normal pairs have unit variance") {
  const CounterRng rng(Seed{11}, 3);
  const std::size_t n = 200000;
  double s1 = 0.0, s2 = 0.0, cross = 0.0;
  for (std::uint64_t k = 0; k < n / 2; ++k) {
    const auto [x, y] = rng.normal_pair(k);
    s1 += x + y;
    s2 += x * x + y * y;
    cross += x * y;
  }
  CHECK(std::abs(s1 / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(cross / (n / 2)) < 0.01);
}

TEST_CASE("bounded draws are uniform") {
  const CounterRng rng(Seed{2}, 0);
  std::vector<int> counts(10, 0);
  for (std::uint64_t k = 0; k < 100000; ++k) ++counts[rng.bounded(k, 10)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("binary grid format round trip") {
  const auto g = random_grid(Shape{6, 9}, 8);
  std::stringstream ss;
  io::write_grid(ss, g);
  CHECK(ss.str().size() == 20 + 6 * 9 * 8);
  CHECK(ss.str().substr(0, 4) == "MLCS");
  const auto back = io::read_complex_grid(ss);
  CHECK(back.shape() == g.shape());
  CHECK(rel_diff(back, g) < 1e-7);

  RealGrid r(Shape{3, 2}, {1.0, 2.5, -3.0, 0.0, 7.0, 1e-3});
  std::stringstream rs;
  io::write_grid(rs, r);
  const auto rback = io::read_real_grid(rs);
  for (std::size_t j = 0; j < r.size(); ++j) CHECK(rback[j] == doctest::Approx(r[j]).epsilon(1e-7));
}

TEST_CASE("binary grid reader rejects malformed input") {
  const auto g = random_grid(Shape{2, 2}, 1);
  std::stringstream ok;
  io::write_grid(ok, g);
  const std::string bytes = ok.str();

  std::stringstream magic("XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(io::read_complex_grid(magic), IoError);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(io::read_complex_grid(truncated), IoError);

  std::stringstream wrong_type(bytes);
  CHECK_THROWS_AS(io::read_real_grid(wrong_type), IoError);

  std::string nan_bytes = bytes;
  const float nan = std::nanf("");
  std::memcpy(nan_bytes.data() + 20, &nan, 4);
  std::stringstream with_nan(nan_bytes);
  CHECK_THROWS_AS(io::read_complex_grid(with_nan), IoError);

  CHECK_THROWS_AS(io::load_complex_grid("/nonexistent/dir/grid.mlcs"), IoError);
}
