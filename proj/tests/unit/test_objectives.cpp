// Objectives: values, analytic gradients, declared constants and recipes.

#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "lpgd/arith.hpp"
#include "lpgd/error.hpp"
#include "lpgd/objectives.hpp"
#include "lpgd/random_stream.hpp"

using namespace lpgd;

namespace {

std::shared_ptr<const Dataset> small_blr_data() {
  SyntheticSpec s;
  s.features = 4;
  s.samples = 40;
  return std::make_shared<const Dataset>(synthetic_blr_dataset(5, s));
}

void check_fd_gradient(const Objective& obj, double lo, double hi, std::uint64_t seed) {
  RandomStream rng(seed);
  std::size_t bad = 0;
  for (int p = 0; p < 100; ++p) {
    std::vector<double> x(obj.dim());
    for (double& v : x) v = lo + (hi - lo) * rng.uniform();
    std::vector<double> g = obj.grad(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double h = 1e-6 * std::max(1.0, std::fabs(x[i]));
      std::vector<double> a = x, b = x;
      a[i] += h;
      b[i] -= h;
      double fd = (obj.value(a) - obj.value(b)) / (2 * h);
      double scale = std::max({1.0, std::fabs(g[i]), std::fabs(obj.value(x))});
      bad += std::fabs(fd - g[i]) <= 1e-5 * scale ? 0 : 1;
    }
  }
  CHECK(bad == 0);
}

}  // namespace

TEST_SUITE("objectives") {

TEST_CASE("rosenbrock") {
  auto f = make_rosenbrock();
  std::vector<double> one{1, 1}, zero{0, 0};
  CHECK(f->value(one) == 0.0);
  CHECK(f->value(zero) == 1.0);
  CHECK(f->grad(zero) == std::vector<double>{-2.0, 0.0});
  CHECK(*f->L() == 2610.0);
  CHECK(*f->mu() == 0.2);
  check_fd_gradient(*f, 0.0, 2.0, 1);
}

TEST_CASE("himmelblau") {
  auto f = make_himmelblau();
  auto mins = himmelblau_minimizers();
  REQUIRE(mins.size() == 4);
  CHECK(mins[0] == std::vector<double>{3.0, 2.0});
  CHECK(f->value(mins[0]) == 0.0);
  std::vector<double> x4{3.584428, -1.848126};
  CHECK(f->value(x4) < 1e-9);
  for (const auto& m : mins) CHECK(f->value(m) < 1e-20);
  check_fd_gradient(*f, -4.0, 4.0, 2);
}

TEST_CASE("quadratic") {
  auto id = make_quadratic({1, 1, 1}, {0.5, -1, 2});
  CHECK(*id->L() == *id->mu());
  std::vector<double> xs{0.5, -1, 2};
  CHECK(id->grad(xs) == std::vector<double>{0, 0, 0});
  CHECK(id->value(xs) == 0.0);
  auto mixed = make_mixed_scale_quadratic();
  CHECK(mixed->dim() == 5);
  CHECK(*mixed->L() == 100.0);
  CHECK(*mixed->mu() == 1e-3);
  check_fd_gradient(*mixed, -2.0, 2.0, 3);
  CHECK_THROWS(make_quadratic({1, -1}, {0, 0}));
}

TEST_CASE("logistic regression") {
  auto data = small_blr_data();
  auto f = make_blr(data);
  std::vector<double> w(f->dim(), 0.0);
  CHECK(f->value(w) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  check_fd_gradient(*f, -1.0, 1.0, 4);
  check_fd_gradient(*make_blr(data, 0.1), -1.0, 1.0, 5);

  // Each row appears once per label, so the gradient at w = 0 cancels.
  auto sym = std::make_shared<Dataset>();
  sym->rows = 4;
  sym->cols = 2;
  sym->features = {0.2, 0.9, 0.2, 0.9, 0.7, 0.1, 0.7, 0.1};
  sym->labels = {1, 0, 1, 0};
  auto g = make_blr(sym)->grad(std::vector<double>{0.0, 0.0});
  CHECK(std::fabs(g[0]) < 1e-15);
  CHECK(std::fabs(g[1]) < 1e-15);
}

TEST_CASE("declared constants satisfy mu <= L") {
  for (auto f : {make_rosenbrock(), make_himmelblau(), make_mixed_scale_quadratic(),
                 make_quadratic({2, 1, 0.5}, {0, 0, 0})})
    if (f->L() && f->mu()) CHECK(*f->mu() <= *f->L());
}

TEST_CASE("reference recipes reproduce the analytic gradient") {
  RandomStream rng(9);
  auto data = small_blr_data();
  for (auto f : {make_rosenbrock(), make_himmelblau(), make_mixed_scale_quadratic(), make_blr(data)}) {
    for (int p = 0; p < 20; ++p) {
      std::vector<double> x(f->dim());
      for (double& v : x) v = rng.uniform() * 2 - 1;
      RefArith ar;
      auto gr = f->grad_rounded(ar, x);
      auto ge = f->grad(x);
      for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(gr[i] == doctest::Approx(ge[i]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("synthetic dataset is deterministic and normalized") {
  Dataset a = synthetic_blr_dataset(3), b = synthetic_blr_dataset(3), c = synthetic_blr_dataset(4);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.features != c.features);
  CHECK(a.rows == 500);
  CHECK(a.cols == 21);  // 20 features plus the intercept column
  int ones = 0;
  for (int l : a.labels) ones += l;
  CHECK(ones > 0);
  CHECK(ones < 500);
  for (double v : a.features) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK_NOTHROW(a.validate());
}

}  // TEST_SUITE
