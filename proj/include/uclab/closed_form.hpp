#pragma once

// Type-erased closed-form functions of the null pair (u, v).

#include <functional>
#include <utility>

#include "uclab/jet.hpp"

namespace uclab {

using Jet2 = Jet<2>;

/// Value, first and mixed second null derivatives at one point.
struct Local {
  double phi = 0.0;
  double pu = 0.0;
  double pv = 0.0;
  double puv = 0.0;
  double puu = 0.0;
  double pvv = 0.0;
};

struct ClosedForm {
  std::function<double(double, double)> value;
  std::function<Jet2(const Jet2&, const Jet2&)> jet;

  explicit operator bool() const { return static_cast<bool>(value); }

  Local local(double u, double v) const {
    const Jet2 r = jet(Jet2::variable(u, 0), Jet2::variable(v, 1));
    return {r.v, r.d[0], r.d[1], r.dd[0][1], r.dd[0][0], r.dd[1][1]};
  }
};

/// Wraps a generic callable g(u, v) that is valid for both double and Jet2.
template <class G>
ClosedForm make_closed_form(G g) {
  ClosedForm c;
  c.value = [g](double u, double v) { return static_cast<double>(g(u, v)); };
  c.jet = [g](const Jet2& u, const Jet2& v) { return Jet2(g(u, v)); };
  return c;
}

}  // namespace uclab
