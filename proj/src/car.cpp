#include "womble/car.hpp"

#include <limits>

namespace womble {

double alpha_regularization_bound(const ArealGraph& graph, Index k) {
  if (k < 0 || k >= graph.num_metrics()) throw std::out_of_range("metric index out of range");
  double zmin = std::numeric_limits<double>::infinity();
  for (const auto& e : graph.edges()) {
    if (e.z(k) > 0) zmin = std::min(zmin, e.z(k));
  }
  if (!std::isfinite(zmin)) {
    throw std::domain_error("alpha bound undefined: metric " + std::to_string(k) +
                            " is zero on every adjacent pair");
  }
  return std::numbers::ln2 / zmin;
}

double db_from_asb(double asb) {
  if (!(asb > 0) || !std::isfinite(asb)) throw std::domain_error("asb must be positive and finite");
  return 40.0 - 10.0 * std::log10(asb);
}

double asb_from_db(double db) {
  if (!std::isfinite(db)) throw std::domain_error("dB must be finite");
  const double asb = std::pow(10.0, (40.0 - db) / 10.0);
  if (!(asb > 0) || !std::isfinite(asb)) throw std::domain_error("dB value outside machine range");
  return asb;
}

}  // namespace womble
