#include "hcd/evaluation.hpp"

#include <stdexcept>

namespace hcd {

ConfusionCounts confusion(const Mask& pred, const Mask& truth) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw std::invalid_argument("confusion: mask shapes differ");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const bool p = pred.values[i] != 0, t = truth.values[i] != 0;
    if (p && t)
      ++c.tp;
    else if (p && !t)
      ++c.fp;
    else if (!p && t)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

AgreementMetrics metrics(const ConfusionCounts& c) {
  const double n = static_cast<double>(c.total());
  if (n <= 0.0) throw std::invalid_argument("metrics: empty counts");

  AgreementMetrics m;
  auto ratio = [&](double num, double den) {
    if (den <= 0.0) {
      m.degenerate = true;
      return 0.0;
    }
    return num / den;
  };

  m.overall_accuracy = static_cast<double>(c.tp + c.tn) / n;
  m.precision = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
  m.recall = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);

  const double p_o = m.overall_accuracy;
  const double p_e = (static_cast<double>(c.tp + c.fp) * (c.tp + c.fn) +
                      static_cast<double>(c.fn + c.tn) * (c.fp + c.tn)) /
                     (n * n);
  if (p_e >= 1.0) {
    m.degenerate = true;
    m.kappa = p_o >= 1.0 ? 1.0 : 0.0;
  } else {
    m.kappa = (p_o - p_e) / (1.0 - p_e);
  }
  return m;
}

}  // namespace hcd
