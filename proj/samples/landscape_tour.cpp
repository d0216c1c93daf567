// Walks one student node toward its teacher under both flows and prints how
// the condition numbers and the distance to the teacher evolve.
#include "sobolev_lab/relu1.hpp"

#include <cstdio>

using namespace sobolev_lab;

int main() {
  Vector wstar(3);
  wstar << 1.0, 0.0, 0.0;
  Vector w(3);
  w << 0.4, 0.5, -0.2;

  const relu1::HessianReport h = relu1::hessians(w, wstar);
  std::printf("theta = %.4f  kappa_l2 = %.4f  kappa_h1 = %.4f\n", h.geometry.theta, *h.kappa_l2, *h.kappa_h1);

  for (FlowKind kind : {FlowKind::l2, FlowKind::h1}) {
    const VectorField field = [kind, &wstar](const Vector& x) { return relu1::flow_rhs(kind, x, wstar); };
    const FlowTrace tr = rk4_integrate(field, w, 1e-2, 5.0, wstar, 100);
    std::printf("%s flow:\n", to_string(kind));
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      std::printf("  t = %4.1f  |w - w*|^2 = %.3e\n", tr.times[i], tr.v_values[i]);
    }
  }
  return 0;
}
