#include "krip/io.hpp"

#include <stdexcept>

#include "krip/csv.hpp"

namespace krip {

nlohmann::json rip_estimate_json(const RipEstimate& estimate) {
  return nlohmann::json{
      {"s", estimate.s},
      {"delta", estimate.delta},
      {"method", rip_method_name(estimate.method)},
      {"witness", estimate.witness.indices},
      {"trials", estimate.trials},
      {"seed", estimate.seed},
  };
}

nlohmann::json operator_metadata(const KrOperator& op) {
  return nlohmann::json{
      {"n", op.n()},
      {"N", op.cols()},
      {"mode", op.mode() == KrMode::Centered ? "centered" : "uncentered"},
      {"kappa", op.kappa_value()},
      {"scale", op.scale()},
      {"family", family_name(op.source().spec.family)},
      {"seed", op.source().seed},
      {"representation", op.representation() == KrRepresentation::Explicit
                             ? "explicit"
                             : "matrix-free"},
  };
}

void write_operator_csv(const KrOperator& op, std::ostream& out) {
  const Eigen::MatrixXd* m = op.explicit_matrix();
  if (m == nullptr)
    throw std::invalid_argument(
        "write_operator_csv: explicit representation required");
  for (Eigen::Index r = 0; r < m->rows(); ++r) {
    for (Eigen::Index c = 0; c < m->cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double((*m)(r, c));
    }
    out << '\n';
  }
}

}  // namespace krip
