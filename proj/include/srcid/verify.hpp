#pragma once

// End-to-end checks of the reconstruction pipeline against reference
// benchmark and against independent oracles.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "srcid/fields.hpp"
#include "srcid/mesh.hpp"

namespace srcid {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
};

inline constexpr int kCriterionCount = 9;

CriterionResult check_criterion(int id, const VerifyOptions& options = {});
std::string format_result(const CriterionResult& r);

/// Errors of a P1 field against an exact function, by a degree-5 rule on every triangle.
struct ExactErrors {
  double l2 = 0.0;
  double h1 = 0.0;  // full H1 norm
};
ExactErrors exact_errors(const TriMesh& mesh, const P1Field& u, const std::function<double(const Vec2&)>& exact,
                         const std::function<Vec2(const Vec2&)>& exact_grad);

}  // namespace srcid
