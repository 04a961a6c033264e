#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "entropic/error.hpp"
#include "entropic/jump_engine.hpp"
#include "entropic/stats.hpp"

using namespace entropic;

namespace {

constexpr double mass_5 = 7.92665459521202203;
constexpr double mass_6 = 7.23601254558267659;
constexpr double mass_7 = 6.69924585690678772;

JumpProcessSpec base_spec(double beta) {
  JumpProcessSpec s;
  s.beta = beta;
  return s;
}

JumpProcessSpec atoms(std::vector<std::pair<double, double>> a, double beta) {
  JumpProcessSpec s;
  s.intensity = AtomIntensity{std::move(a)};
  s.beta = beta;
  return s;
}

template <class F>
Estimate mean_of(const std::vector<JumpPath>& paths, F f) {
  std::vector<double> v(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) v[i] = f(paths[i]);
  return sample_mean(v);
}

bool agree(const Estimate& a, const Estimate& b) {
  return within_sigma(a.value, b.value, combined_error(a.std_error, b.std_error), 3.0, 1e-12);
}

}  // namespace

TEST_CASE("total mass") {
  CHECK(total_mass(atoms({{1.0, 2.5}}, 0.0)) == 2.5);
  CHECK(total_mass(base_spec(0.0)) == doctest::Approx(mass_5).epsilon(1e-14));
  CHECK(total_mass(tilt(base_spec(1.0))) == doctest::Approx(mass_6).epsilon(1e-14));
  CHECK(total_mass(tilt(base_spec(2.0))) == doctest::Approx(mass_7).epsilon(1e-14));
  // the same intensity through the quadrature route
  JumpProcessSpec wrapped = base_spec(1.0);
  wrapped.gamma = JumpSizeMap::custom([](double z) { return z; });
  CHECK(total_mass(wrapped) == doctest::Approx(mass_5).epsilon(1e-10));
  CHECK(total_mass(tilt(wrapped)) == doctest::Approx(mass_6).epsilon(1e-10));
  // gamma(z) = 2z tilts delta by 2 beta
  JumpProcessSpec doubled = base_spec(1.0);
  doubled.gamma = JumpSizeMap::custom([](double z) { return 2.0 * z; });
  CHECK(total_mass(tilt(doubled)) == doctest::Approx(mass_7).epsilon(1e-10));
}

TEST_CASE("tilt examples") {
  const auto same = tilt(base_spec(0.0));
  CHECK(std::get<GammaIntensity>(same.intensity).delta == 5.0);
  const auto t2 = tilt(base_spec(2.0));
  CHECK(std::get<GammaIntensity>(t2.intensity).alpha == 10.0);
  CHECK(std::get<GammaIntensity>(t2.intensity).delta == 7.0);
  const auto a = tilt(atoms({{1.0, 2.0}, {0.5, 3.0}}, 1.5));
  const auto& w = std::get<AtomIntensity>(a.intensity).atoms;
  CHECK(w[0].second == doctest::Approx(2.0 * std::exp(-1.5)));
  CHECK(w[1].second == doctest::Approx(3.0 * std::exp(-0.75)));
}

TEST_CASE("relative entropy") {
  CHECK(jump_relative_entropy(base_spec(0.0)) == 0.0);
  CHECK(jump_relative_entropy(atoms({{1.0, 1.0}}, 1.0)) == doctest::Approx(1.0 - 2.0 / std::numbers::e).epsilon(1e-14));
  CHECK(jump_relative_entropy(base_spec(1.0)) == doctest::Approx(0.0876410041641221618).epsilon(1e-10));
  // alpha sqrt(pi) [delta^{-1/2} - (delta + beta)^{-1/2} - beta (delta + beta)^{-3/2} / 2]
  for (double beta : {0.01, 0.5, 3.0, 40.0}) {
    JumpProcessSpec s = base_spec(beta);
    s.horizon = 2.0;
    const double d = 5.0 + beta;
    const double closed =
        2.0 * 10.0 * std::sqrt(std::numbers::pi) * (1.0 / std::sqrt(5.0) - 1.0 / std::sqrt(d) - 0.5 * beta / (d * std::sqrt(d)));
    CHECK(jump_relative_entropy(s) == doctest::Approx(closed).epsilon(1e-9));
  }
}

TEST_CASE("relative entropy is nonnegative") {
  for (double beta : {0.0, 1e-8, 1e-4, 0.3, 2.0, 100.0}) {
    CHECK(jump_relative_entropy(base_spec(beta)) >= 0.0);
    CHECK(jump_relative_entropy(atoms({{1e-6, 4.0}, {0.2, 1.0}, {30.0, 0.5}}, beta)) >= 0.0);
    JumpProcessSpec squared = base_spec(beta);
    squared.gamma = JumpSizeMap::custom([](double z) { return z * z; });
    CHECK(jump_relative_entropy(squared) >= 0.0);
  }
  CHECK(jump_relative_entropy(atoms({{1e-9, 1.0}}, 1.0)) > 0.0);
}

TEST_CASE("sampling examples") {
  JumpProcessSpec none = base_spec(1.0);
  none.horizon = 0.0;
  for (const auto& p : sample_jump_paths(none, 50, 1)) CHECK(p.count() == 0);

  const auto orig = sample_jump_paths(base_spec(1.0), 100000, 2);
  const Estimate n = mean_of(orig, [](const JumpPath& p) { return static_cast<double>(p.count()); });
  CHECK(within_sigma(n.value, mass_5, n.std_error, 3.0, 0.0));
  // Poisson: variance equals the mean
  CHECK(n.std_error * n.std_error * 100000.0 == doctest::Approx(mass_5).epsilon(0.03));

  const auto tilted = sample_jump_paths(base_spec(1.0), 100000, 2, JumpMeasure::tilted);
  const Estimate nt = mean_of(tilted, [](const JumpPath& p) { return static_cast<double>(p.count()); });
  CHECK(within_sigma(nt.value, mass_6, nt.std_error, 3.0, 0.0));
  CHECK(n.value - nt.value > 3.0 * combined_error(n.std_error, nt.std_error));

  // sizes follow Gamma(1/2, delta): mean 1 / (2 delta)
  std::vector<double> sizes;
  for (const auto& p : orig)
    for (double s : p.sizes) sizes.push_back(s);
  const Estimate ms = sample_mean(sizes);
  CHECK(within_sigma(ms.value, 0.1, ms.std_error, 3.0, 0.0));

  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(std::is_sorted(orig[i].times.begin(), orig[i].times.end()));
    for (double t : orig[i].times) CHECK((t >= 0.0 && t <= 1.0));
  }
}

TEST_CASE("atom intensities sample their atoms") {
  const auto s = atoms({{0.5, 1.0}, {2.0, 3.0}}, 0.0);
  const auto paths = sample_jump_paths(s, 40000, 3);
  std::vector<double> small, large;
  for (const auto& p : paths) {
    small.push_back(static_cast<double>(std::count(p.sizes.begin(), p.sizes.end(), 0.5)));
    large.push_back(static_cast<double>(std::count(p.sizes.begin(), p.sizes.end(), 2.0)));
    for (double z : p.sizes) CHECK((z == 0.5 || z == 2.0));
  }
  CHECK(within_sigma(sample_mean(small).value, 1.0, sample_mean(small).std_error, 3.0, 0.0));
  CHECK(within_sigma(sample_mean(large).value, 3.0, sample_mean(large).std_error, 3.0, 0.0));
}

TEST_CASE("tilted jump sets are nested and reproducible") {
  const auto a = sample_jump_paths(base_spec(1.0), 500, 4);
  const auto b = sample_jump_paths(base_spec(1.0), 500, 4, JumpMeasure::tilted);
  const auto c = sample_jump_paths(base_spec(2.0), 500, 4, JumpMeasure::tilted);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::includes(a[i].times.begin(), a[i].times.end(), b[i].times.begin(), b[i].times.end()));
    CHECK(std::includes(b[i].times.begin(), b[i].times.end(), c[i].times.begin(), c[i].times.end()));
  }
  const auto again = sample_jump_paths(base_spec(1.0), 500, 4, JumpMeasure::tilted, Execution::with_threads(16));
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(again[i].times == b[i].times);
    CHECK(again[i].sizes == b[i].sizes);
  }
}

TEST_CASE("log density examples") {
  JumpPath empty;
  CHECK(sample_log_density(base_spec(0.0), empty) == 0.0);
  CHECK(sample_log_density(base_spec(1.0), empty) == doctest::Approx(0.690642049629345433).epsilon(1e-12));
  JumpPath two{{0.2, 0.7}, {0.3, 0.1}};
  CHECK(two.terminal_value() == doctest::Approx(0.4));
  CHECK(sample_log_density(base_spec(1.0), two) == doctest::Approx(0.690642049629345433 - 0.4).epsilon(1e-12));
  const JumpDensityEvaluator eval(base_spec(2.0));
  CHECK(eval.log_density(two) == doctest::Approx(-0.8 + mass_5 - mass_7).epsilon(1e-12));
  CHECK(sample_log_density(atoms({{1.0, 1.0}}, 1.0), empty) == doctest::Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("density normalization, entropy identity and tilting consistency") {
  for (double beta : {0.5, 1.0, 2.0}) {
    const auto spec = base_spec(beta);
    const JumpDensityEvaluator eval(spec);
    const auto q = sample_jump_paths(spec, 100000, 7);
    const auto p = sample_jump_paths(spec, 100000, 8, JumpMeasure::tilted);
    const Estimate norm = mean_of(q, [&](const JumpPath& x) { return std::exp(eval.log_density(x)); });
    CHECK(within_sigma(norm.value, 1.0, norm.std_error, 3.0, 0.0));
    const Estimate h = mean_of(p, [&](const JumpPath& x) { return eval.log_density(x); });
    CHECK(within_sigma(h.value, jump_relative_entropy(spec), h.std_error, 3.0, 0.0));

    const Estimate count_q = mean_of(q, [&](const JumpPath& x) { return x.count() * std::exp(eval.log_density(x)); });
    const Estimate count_p = mean_of(p, [](const JumpPath& x) { return static_cast<double>(x.count()); });
    CHECK(agree(count_q, count_p));
    const Estimate xt_q = mean_of(q, [&](const JumpPath& x) { return x.terminal_value() * std::exp(eval.log_density(x)); });
    const Estimate xt_p = mean_of(p, [](const JumpPath& x) { return x.terminal_value(); });
    CHECK(agree(xt_q, xt_p));
  }
}

TEST_CASE("invalid specs") {
  CHECK_THROWS_AS(total_mass(base_spec(-1.0)), DomainError);
  JumpProcessSpec s;
  s.intensity = GammaIntensity{0.0, 5.0};
  CHECK_THROWS_AS(total_mass(s), DomainError);
  s.intensity = GammaIntensity{10.0, -1.0};
  CHECK_THROWS_AS(sample_jump_paths(s, 1, 1), DomainError);
  CHECK_THROWS_AS(total_mass(atoms({{1.0, -2.0}}, 0.0)), DomainError);
  JumpProcessSpec h;
  h.horizon = -1.0;
  CHECK_THROWS_AS(jump_relative_entropy(h), DomainError);
}

TEST_CASE("jump path csv") {
  std::vector<JumpPath> paths{JumpPath{{0.25}, {0.5}}, JumpPath{}};
  std::ostringstream out;
  write_jump_paths_csv(paths, 1.0, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# entropic jump_paths v1");
  std::getline(in, line);
  CHECK(line == "path_id,t,X_t");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "0,0,0");
  CHECK(rows[1] == "0,0.25,0.5");
  CHECK(rows[2] == "0,1,0.5");
  CHECK(rows[3] == "1,0,0");
  CHECK(rows[4] == "1,1,0");
}
