#pragma once

// Anisotropic discrete total variation of P1 fields:
//   TV(f) = sum_T |T| (|d1 f| + |d2 f|) = max { (grad f, p) : |p_j| <= 1 on every triangle }.

#include "srcid/fields.hpp"
#include "srcid/mesh.hpp"

namespace srcid {

/// A P0 vector field known to satisfy max_j |p_j| <= 1 on every triangle.
class DualBallField {
 public:
  DualBallField() = default;
  /// Throws std::invalid_argument if some component exceeds 1 in magnitude.
  static DualBallField certify(P0VecField p);
  /// Constant field on every triangle of the mesh.
  static DualBallField constant(const TriMesh& mesh, Vec2 value);

  [[nodiscard]] const P0VecField& field() const { return p_; }
  [[nodiscard]] std::size_t size() const { return p_.size(); }
  const Vec2& operator[](std::size_t t) const { return p_[t]; }

 private:
  explicit DualBallField(P0VecField p) : p_(std::move(p)) {}
  P0VecField p_;

  friend DualBallField project_dual_ball(const P0VecField& p);
  friend DualBallField project_dual_ball_isotropic(const P0VecField& p);
};

double tv_value(const TriMesh& mesh, const P1Field& f);
/// p_j = sign(d_j f) per triangle, zero where the derivative vanishes.
DualBallField subgradient_witness(const TriMesh& mesh, const P1Field& f);
/// Componentwise clamp to [-1, 1].
DualBallField project_dual_ball(const P0VecField& p);
/// p / max(1, |p|) per triangle.
DualBallField project_dual_ball_isotropic(const P0VecField& p);

}  // namespace srcid
