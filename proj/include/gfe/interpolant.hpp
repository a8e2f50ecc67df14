#pragma once

#include <string>
#include <variant>

#include "gfe/geodesic_interpolant.hpp"
#include "gfe/projection_interpolant.hpp"

namespace gfe {

enum class Rule { Geodesic, Projection };

inline const char* rule_name(Rule r) { return r == Rule::Geodesic ? "geodesic" : "projection"; }

inline Rule parse_rule(const std::string& s) {
  if (s == "geodesic") return Rule::Geodesic;
  if (s == "projection") return Rule::Projection;
  fail(Errc::InvalidArgument, "unknown interpolation rule '" + s + "'");
}

/// Either interpolation rule behind one interface.
template <Manifold M>
class Interpolant {
 public:
  /// Value, tangent frame, shape weights and the normalized value
  /// derivatives d_dv(xi, i) / phi_i(xi) at one reference point.
  struct Local {
    ManifoldPoint value;
    Matrix frame;
    Vector weights;
    std::vector<Matrix> normalized;
  };

  Interpolant(Rule rule, M manifold, ReferenceElement elem, std::vector<ManifoldPoint> values)
      : impl_(make(rule, std::move(manifold), std::move(elem), std::move(values))) {}
  Interpolant(GeodesicInterpolant<M> g) : impl_(std::move(g)) {}
  Interpolant(ProjectionInterpolant<M> p) : impl_(std::move(p)) {}

  Rule rule() const { return impl_.index() == 0 ? Rule::Geodesic : Rule::Projection; }
  const M& manifold() const { return visit([](const auto& i) -> const M& { return i.manifold(); }); }
  const ReferenceElement& element() const {
    return visit([](const auto& i) -> const ReferenceElement& { return i.element(); });
  }
  const std::vector<ManifoldPoint>& values() const {
    return visit([](const auto& i) -> const std::vector<ManifoldPoint>& { return i.values(); });
  }

  ManifoldPoint eval(const Vector& xi) const {
    return visit([&](const auto& i) { return i.eval(xi); });
  }
  std::vector<TangentVector> d_dxi(const Vector& xi) const {
    return visit([&](const auto& i) { return i.d_dxi(xi); });
  }
  Matrix d_dv(const Vector& xi, int node) const {
    return visit([&](const auto& i) { return i.d_dv(xi, node); });
  }
  std::vector<Matrix> d_dv_all(const Vector& xi) const {
    return visit([&](const auto& i) { return i.d_dv_all(xi); });
  }

  Local local(const Vector& xi) const {
    return visit([&](const auto& i) {
      const auto lin = i.linearize(xi);
      return Local{lin.value, lin.frame, lin.weights, i.normalized_d_dv(lin)};
    });
  }

  const auto& variant() const { return impl_; }

 private:
  using Impl = std::variant<GeodesicInterpolant<M>, ProjectionInterpolant<M>>;

  static Impl make(Rule rule, M manifold, ReferenceElement elem, std::vector<ManifoldPoint> values) {
    if (rule == Rule::Geodesic) return GeodesicInterpolant<M>(std::move(manifold), std::move(elem), std::move(values));
    return ProjectionInterpolant<M>(std::move(manifold), std::move(elem), std::move(values));
  }

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), impl_);
  }

  Impl impl_;
};

}  // namespace gfe
