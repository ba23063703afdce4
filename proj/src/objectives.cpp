#include "lpgd/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "lpgd/error.hpp"

namespace lpgd {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

void check_dim(std::size_t got, std::size_t want, const char* who) {
  if (got != want)
    throw PreconditionError(std::string(who) + ": expected dimension " + std::to_string(want) + ", got " +
                            std::to_string(got));
}

class Quadratic final : public RecipeObjective<Quadratic> {
 public:
  Quadratic(std::vector<double> a, std::vector<double> xs) : a_(std::move(a)), xs_(std::move(xs)) {
    if (a_.empty() || a_.size() != xs_.size()) throw ConfigError("quadratic: diag and x* must have equal nonzero length");
    for (double v : a_)
      if (!(v > 0)) throw ConfigError("quadratic: diagonal entries must be positive");
  }
  std::string name() const override { return "quadratic"; }
  std::size_t dim() const override { return a_.size(); }
  double value(std::span<const double> x) const override {
    check_dim(x.size(), dim(), "quadratic");
    double s = 0;
    for (std::size_t i = 0; i < a_.size(); ++i) s += a_[i] * (x[i] - xs_[i]) * (x[i] - xs_[i]);
    return 0.5 * s;
  }
  std::vector<double> grad(std::span<const double> x) const override {
    check_dim(x.size(), dim(), "quadratic");
    std::vector<double> g(dim());
    for (std::size_t i = 0; i < a_.size(); ++i) g[i] = a_[i] * (x[i] - xs_[i]);
    return g;
  }
  std::optional<double> L() const override { return *std::max_element(a_.begin(), a_.end()); }
  std::optional<double> mu() const override { return *std::min_element(a_.begin(), a_.end()); }
  std::optional<double> f_star() const override { return 0.0; }
  std::vector<std::vector<double>> minimizers() const override { return {xs_}; }

  template <class A>
  std::vector<typename A::value> recipe(A& ar, std::span<const typename A::value> x) const {
    check_dim(x.size(), dim(), "quadratic");
    std::vector<typename A::value> g;
    g.reserve(dim());
    for (std::size_t i = 0; i < a_.size(); ++i) g.push_back(ar.scale(ar.sub(x[i], ar.cst(xs_[i])), a_[i]));
    return g;
  }

 private:
  std::vector<double> a_;
  std::vector<double> xs_;
};

class Rosenbrock final : public RecipeObjective<Rosenbrock> {
 public:
  std::string name() const override { return "rosenbrock"; }
  std::size_t dim() const override { return 2; }
  double value(std::span<const double> x) const override {
    check_dim(x.size(), 2, "rosenbrock");
    double a = 1 - x[0];
    double b = x[1] - x[0] * x[0];
    return a * a + 100 * b * b;
  }
  std::vector<double> grad(std::span<const double> x) const override {
    check_dim(x.size(), 2, "rosenbrock");
    double b = x[1] - x[0] * x[0];
    return {-2 * (1 - x[0]) - 400 * x[0] * b, 200 * b};
  }
  std::optional<double> L() const override { return 2610.0; }
  std::optional<double> mu() const override { return 0.2; }
  std::optional<double> f_star() const override { return 0.0; }
  std::vector<std::vector<double>> minimizers() const override { return {{1.0, 1.0}}; }

  template <class A>
  std::vector<typename A::value> recipe(A& ar, std::span<const typename A::value> x) const {
    check_dim(x.size(), 2, "rosenbrock");
    auto s = ar.mul(x[0], x[0]);
    auto q = ar.sub(x[1], s);
    auto p = ar.mul(x[0], q);
    auto g1 = ar.sub(ar.scale(ar.sub(x[0], ar.cst(1.0)), 2.0), ar.scale(p, 400.0));
    auto g2 = ar.scale(q, 200.0);
    return {g1, g2};
  }
};

class Himmelblau final : public RecipeObjective<Himmelblau> {
 public:
  std::string name() const override { return "himmelblau"; }
  std::size_t dim() const override { return 2; }
  double value(std::span<const double> x) const override {
    check_dim(x.size(), 2, "himmelblau");
    double a = x[0] * x[0] + x[1] - 11;
    double b = x[0] + x[1] * x[1] - 7;
    return a * a + b * b;
  }
  std::vector<double> grad(std::span<const double> x) const override {
    check_dim(x.size(), 2, "himmelblau");
    double a = x[0] * x[0] + x[1] - 11;
    double b = x[0] + x[1] * x[1] - 7;
    return {4 * x[0] * a + 2 * b, 2 * a + 4 * x[1] * b};
  }
  std::optional<double> f_star() const override { return 0.0; }
  std::vector<std::vector<double>> minimizers() const override { return himmelblau_minimizers(); }

  template <class A>
  std::vector<typename A::value> recipe(A& ar, std::span<const typename A::value> x) const {
    check_dim(x.size(), 2, "himmelblau");
    auto a = ar.sub(ar.add(ar.mul(x[0], x[0]), x[1]), ar.cst(11.0));
    auto b = ar.sub(ar.add(x[0], ar.mul(x[1], x[1])), ar.cst(7.0));
    auto g1 = ar.add(ar.scale(ar.mul(x[0], a), 4.0), ar.scale(b, 2.0));
    auto g2 = ar.add(ar.scale(a, 2.0), ar.scale(ar.mul(x[1], b), 4.0));
    return {g1, g2};
  }
};

class Blr final : public RecipeObjective<Blr> {
 public:
  Blr(std::shared_ptr<const Dataset> d, double reg) : d_(std::move(d)), reg_(reg) {
    if (!d_) throw ConfigError("blr: missing dataset");
    d_->validate();
    if (reg_ < 0) throw ConfigError("blr: regularization must be >= 0");
  }
  std::string name() const override { return "blr"; }
  std::size_t dim() const override { return d_->cols; }
  double value(std::span<const double> w) const override {
    check_dim(w.size(), dim(), "blr");
    double s = 0;
    for (std::size_t j = 0; j < d_->rows; ++j) {
      double z = dot(j, w);
      s += softplus(z) - d_->labels[j] * z;
    }
    double r = 0;
    for (double v : w) r += v * v;
    return s / static_cast<double>(d_->rows) + 0.5 * reg_ * r;
  }
  std::vector<double> grad(std::span<const double> w) const override {
    check_dim(w.size(), dim(), "blr");
    std::vector<double> g(dim(), 0.0);
    for (std::size_t j = 0; j < d_->rows; ++j) {
      double e = sigmoid(dot(j, w)) - d_->labels[j];
      for (std::size_t i = 0; i < d_->cols; ++i) g[i] += e * d_->at(j, i);
    }
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] / static_cast<double>(d_->rows) + reg_ * w[i];
    return g;
  }
  std::optional<double> mu() const override {
    if (reg_ > 0) return reg_;
    return std::nullopt;
  }

  template <class A>
  std::vector<typename A::value> recipe(A& ar, std::span<const typename A::value> w) const {
    check_dim(w.size(), dim(), "blr");
    const std::size_t n = d_->cols;
    std::vector<typename A::value> e;
    e.reserve(d_->rows);
    for (std::size_t j = 0; j < d_->rows; ++j) {
      auto z = ar.zero();
      for (std::size_t i = 0; i < n; ++i) z = ar.add(z, ar.mul(w[i], ar.cst(d_->at(j, i))));
      auto p = ar.apply(z, sigmoid);
      e.push_back(ar.sub(p, ar.cst(static_cast<double>(d_->labels[j]))));
    }
    std::vector<typename A::value> g;
    g.reserve(n);
    const double inv_rows = 1.0 / static_cast<double>(d_->rows);
    for (std::size_t i = 0; i < n; ++i) {
      auto acc = ar.zero();
      for (std::size_t j = 0; j < d_->rows; ++j) acc = ar.add(acc, ar.mul(e[j], ar.cst(d_->at(j, i))));
      auto gi = ar.scale(acc, inv_rows);
      if (reg_ > 0) gi = ar.add(gi, ar.scale(w[i], reg_));
      g.push_back(gi);
    }
    return g;
  }

 private:
  double dot(std::size_t j, std::span<const double> w) const {
    double z = 0;
    for (std::size_t i = 0; i < d_->cols; ++i) z += w[i] * d_->at(j, i);
    return z;
  }

  std::shared_ptr<const Dataset> d_;
  double reg_;
};

}  // namespace

void Dataset::validate() const {
  if (rows == 0 || cols == 0) throw ConfigError("dataset is empty");
  if (features.size() != rows * cols || labels.size() != rows) throw ConfigError("dataset shape mismatch");
  bool seen[2] = {false, false};
  for (int y : labels) {
    if (y != 0 && y != 1) throw ConfigError("dataset labels must be 0 or 1");
    seen[y] = true;
  }
  if (!seen[0] || !seen[1]) throw ConfigError("dataset needs both labels present");
  for (double v : features)
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("dataset features must lie in [0, 1]");
}

Dataset synthetic_blr_dataset(std::uint64_t seed, const SyntheticSpec& spec) {
  if (spec.features == 0 || spec.samples < 2) throw ConfigError("synthetic dataset needs features >= 1, samples >= 2");
  Dataset d;
  d.rows = spec.samples;
  d.cols = spec.features + (spec.intercept ? 1 : 0);
  d.features.reserve(d.rows * d.cols);
  d.labels.reserve(d.rows);
  RandomStream rng = RandomStream(seed).fork(OpTag::data);
  const double grid = std::ldexp(1.0, spec.grid_bits);
  for (std::size_t j = 0; j < d.rows; ++j) {
    int y = static_cast<int>(j % 2);
    double m = y == 1 ? spec.mean1 : spec.mean0;
    for (std::size_t i = 0; i < spec.features; ++i) {
      double v = std::clamp(m + spec.stddev * rng.normal(), 0.0, 1.0);
      d.features.push_back(std::nearbyint(v * grid) / grid);
    }
    if (spec.intercept) d.features.push_back(1.0);
    d.labels.push_back(y);
  }
  d.provenance = "synthetic:" + std::to_string(seed);
  return d;
}

ObjectivePtr make_quadratic(std::vector<double> diag, std::vector<double> xstar) {
  return std::make_shared<Quadratic>(std::move(diag), std::move(xstar));
}

ObjectivePtr make_mixed_scale_quadratic() {
  return make_quadratic({100, 10, 1e-3, 1e-3, 1e-3}, {0.1, 1, 10, 100, 1000});
}

ObjectivePtr make_rosenbrock() { return std::make_shared<Rosenbrock>(); }
ObjectivePtr make_himmelblau() { return std::make_shared<Himmelblau>(); }
ObjectivePtr make_blr(std::shared_ptr<const Dataset> data, double reg) { return std::make_shared<Blr>(std::move(data), reg); }

std::vector<std::vector<double>> himmelblau_minimizers() {
  return {{3.0, 2.0},
          {-2.805118086952745, 3.131312518250573},
          {-3.7793102533777465, -3.2831859912861696},
          {3.5844283403304917, -1.8481265269644036}};
}

}  // namespace lpgd
