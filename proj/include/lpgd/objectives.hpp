#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpgd/arith.hpp"

namespace lpgd {

// Rows are samples; features lie in [0, 1]; labels are 0/1.
struct Dataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> features;  // row-major rows x cols
  std::vector<int> labels;
  std::string provenance;

  double at(std::size_t r, std::size_t c) const { return features[r * cols + c]; }
  void validate() const;
};

struct SyntheticSpec {
  std::size_t features = 20;
  std::size_t samples = 500;
  double mean0 = 0.3;
  double mean1 = 0.7;
  double stddev = 0.15;
  int grid_bits = 8;  // values snapped to multiples of 2^-grid_bits
  bool intercept = true;  // appends a constant-1 column
};

// Two Gaussian clusters clipped to [0, 1]; deterministic in seed.
Dataset synthetic_blr_dataset(std::uint64_t seed, const SyntheticSpec& spec = {});

class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual std::vector<double> grad(std::span<const double> x) const = 0;

  // Declared constants, when known.
  virtual std::optional<double> L() const { return std::nullopt; }
  virtual std::optional<double> mu() const { return std::nullopt; }
  virtual std::optional<double> f_star() const { return std::nullopt; }
  virtual std::vector<std::vector<double>> minimizers() const { return {}; }

  // Gradient evaluated by the elementary-op recipe under each arithmetic.
  virtual std::vector<FixedVal> grad_rounded(FixedArith& ar, std::span<const FixedVal> x) const = 0;
  virtual std::vector<double> grad_rounded(FloatArith& ar, std::span<const double> x) const = 0;
  virtual std::vector<double> grad_rounded(RefArith& ar, std::span<const double> x) const = 0;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

// Implements the three grad_rounded overloads from one templated recipe.
template <class Derived>
class RecipeObjective : public Objective {
 public:
  std::vector<FixedVal> grad_rounded(FixedArith& ar, std::span<const FixedVal> x) const override {
    return self().recipe(ar, x);
  }
  std::vector<double> grad_rounded(FloatArith& ar, std::span<const double> x) const override {
    return self().recipe(ar, x);
  }
  std::vector<double> grad_rounded(RefArith& ar, std::span<const double> x) const override {
    return self().recipe(ar, x);
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

// f(x) = 1/2 (x - x*)^T diag(a) (x - x*); L = max a, mu = min a, f* = 0.
ObjectivePtr make_quadratic(std::vector<double> diag, std::vector<double> xstar);
// The mixed-scale instance diag(100, 10, 1e-3 x3), x* = [0.1, 1, 10, 100, 1000].
ObjectivePtr make_mixed_scale_quadratic();
// (1 - x1)^2 + 100 (x2 - x1^2)^2. Declared L = 2610 and mu = 0.2 hold on
// [0, 2]^2 only.
ObjectivePtr make_rosenbrock();
// (x1^2 + x2 - 11)^2 + (x1 + x2^2 - 7)^2, four global minimizers with f* = 0.
ObjectivePtr make_himmelblau();
// Mean logistic loss plus reg/2 ||w||^2.
ObjectivePtr make_blr(std::shared_ptr<const Dataset> data, double reg = 0.0);

// The four Himmelblau minimizers, x*_1 = (3, 2) first.
std::vector<std::vector<double>> himmelblau_minimizers();

double sigmoid(double z);

}  // namespace lpgd
