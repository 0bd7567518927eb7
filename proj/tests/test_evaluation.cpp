#include <doctest.h>

#include <random>

#include "hcd/evaluation.hpp"

using namespace hcd;

namespace {

Mask make_mask(int w, int h, const std::vector<std::uint8_t>& v) {
  Mask m;
  m.width = w;
  m.height = h;
  m.values = v;
  return m;
}

}  // namespace

TEST_CASE("confusion on a perfect prediction") {
  const Mask truth = make_mask(4, 1, {1, 0, 1, 0});
  const ConfusionCounts c = confusion(truth, truth);
  CHECK(c.tp == 2);
  CHECK(c.tn == 2);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);
  const AgreementMetrics m = metrics(c);
  CHECK(m.overall_accuracy == 1.0);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
  CHECK(m.kappa == 1.0);
  CHECK_FALSE(m.degenerate);
}

TEST_CASE("all-negative prediction against mixed truth is degenerate") {
  const Mask pred = make_mask(4, 1, {0, 0, 0, 0});
  const Mask truth = make_mask(4, 1, {1, 0, 1, 0});
  const ConfusionCounts c = confusion(pred, truth);
  CHECK(c.tp == 0);
  CHECK(c.fn == 2);
  CHECK(c.tn == 2);
  const AgreementMetrics m = metrics(c);
  CHECK(m.precision == 0.0);  // zero denominator -> 0 + flag
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
  CHECK(m.degenerate);
}

TEST_CASE("fixed counts 40/10/20/30 reproduce the standard values") {
  ConfusionCounts c;
  c.tp = 40;
  c.fp = 10;
  c.fn = 20;
  c.tn = 30;
  const AgreementMetrics m = metrics(c);
  CHECK(m.overall_accuracy == doctest::Approx(0.7));
  CHECK(m.precision == doctest::Approx(0.8));
  CHECK(m.recall == doctest::Approx(2.0 / 3.0));
  CHECK(m.f1 == doctest::Approx(8.0 / 11.0));
  CHECK(m.kappa == doctest::Approx(0.4));
  CHECK_FALSE(m.degenerate);
}

TEST_CASE("random masks against a brute-force pixel tally") {
  std::mt19937_64 eng(25);
  std::bernoulli_distribution coin(0.4);
  std::vector<std::uint8_t> pv(100), tv(100);
  for (int j = 0; j < 100; ++j) {
    pv[static_cast<std::size_t>(j)] = coin(eng) ? 255 : 0;
    tv[static_cast<std::size_t>(j)] = coin(eng) ? 255 : 0;
  }
  const Mask pred = make_mask(10, 10, pv), truth = make_mask(10, 10, tv);
  const ConfusionCounts c = confusion(pred, truth);
  long long tp = 0, fp = 0, fn = 0, tn = 0;
  for (int j = 0; j < 100; ++j) {
    const bool p = pv[static_cast<std::size_t>(j)] != 0;
    const bool t = tv[static_cast<std::size_t>(j)] != 0;
    (p && t ? tp : p ? fp : t ? fn : tn) += 1;
  }
  CHECK(c.tp == tp);
  CHECK(c.fp == fp);
  CHECK(c.fn == fn);
  CHECK(c.tn == tn);
  CHECK(c.total() == 100);

  // independently recompute every metric
  const AgreementMetrics m = metrics(c);
  const double po = static_cast<double>(tp + tn) / 100.0;
  const double pe = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / 10000.0;
  CHECK(m.overall_accuracy == doctest::Approx(po));
  CHECK(m.precision == doctest::Approx(static_cast<double>(tp) / (tp + fp)));
  CHECK(m.recall == doctest::Approx(static_cast<double>(tp) / (tp + fn)));
  CHECK(m.f1 == doctest::Approx(2.0 * m.precision * m.recall /
                                (m.precision + m.recall)));
  CHECK(m.kappa == doctest::Approx((po - pe) / (1.0 - pe)));
}

TEST_CASE("swapping pred and truth swaps fp with fn and preserves kappa") {
  const Mask a = make_mask(6, 1, {1, 1, 0, 0, 1, 0});
  const Mask b = make_mask(6, 1, {1, 0, 0, 1, 1, 1});
  const ConfusionCounts cab = confusion(a, b);
  const ConfusionCounts cba = confusion(b, a);
  CHECK(cab.tp == cba.tp);
  CHECK(cab.tn == cba.tn);
  CHECK(cab.fp == cba.fn);
  CHECK(cab.fn == cba.fp);
  CHECK(metrics(cab).kappa == doctest::Approx(metrics(cba).kappa));
  CHECK(metrics(cab).overall_accuracy ==
        doctest::Approx(metrics(cba).overall_accuracy));
}

TEST_CASE("chance-level agreement gives kappa near zero") {
  // 50/50 marginals, independent: tp=fp=fn=tn
  ConfusionCounts c;
  c.tp = c.fp = c.fn = c.tn = 25;
  const AgreementMetrics m = metrics(c);
  CHECK(m.kappa == doctest::Approx(0.0));
  CHECK(m.overall_accuracy == doctest::Approx(0.5));
}

TEST_CASE("identical constant masks: p_e = 1 conventions") {
  {
    const Mask all = make_mask(3, 1, {1, 1, 1});
    const AgreementMetrics m = metrics(confusion(all, all));
    CHECK(m.kappa == 1.0);  // p_o = 1 as well
    CHECK(m.degenerate);
  }
  {
    const Mask none = make_mask(3, 1, {0, 0, 0});
    const Mask all = make_mask(3, 1, {1, 1, 1});
    const AgreementMetrics m = metrics(confusion(none, all));
    CHECK(m.kappa == 0.0);  // p_e = 1, p_o = 0
    CHECK(m.degenerate);
  }
}

TEST_CASE("confusion rejects mismatched shapes") {
  const Mask a = make_mask(3, 1, {0, 0, 0});
  const Mask b = make_mask(2, 1, {0, 0});
  CHECK_THROWS(confusion(a, b));
}
