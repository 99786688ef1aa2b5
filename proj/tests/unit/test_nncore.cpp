#include "smpe/errors.hpp"
#include "smpe/nncore/adam.hpp"
#include "smpe/nncore/gradcheck.hpp"
#include "smpe/nncore/layers.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace smpe;
using namespace smpe::nn;

namespace {

Matrix randn(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

Matrix sig(const Matrix& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

}  // namespace

TEST_SUITE("nncore") {

TEST_CASE("linear computes x W^T + b") {
  std::mt19937_64 rng(1);
  Linear lin("l", 3, 2);
  lin.init_uniform(rng);
  const Matrix x = randn(4, 3, rng);
  Tape tape;
  const Matrix y = tape.value(tape.linear(tape.constant(x), lin));
  const Matrix want = (x * lin.weight.value.transpose()).rowwise() + RowVector(lin.bias.value);
  CHECK((y - want).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("linear init stays inside the fan-in bound") {
  std::mt19937_64 rng(2);
  Linear lin("l", 16, 8);
  lin.init_uniform(rng);
  CHECK(lin.weight.value.cwiseAbs().maxCoeff() <= 0.25);
  CHECK(lin.bias.value.cwiseAbs().maxCoeff() <= 0.25);
}

TEST_CASE("linear rejects a width mismatch") {
  Linear lin("l", 3, 2);
  Tape tape;
  CHECK_THROWS_AS(tape.linear(tape.constant(Matrix::Zero(2, 4)), lin), ConfigError);
}

TEST_CASE("gru step matches the gate equations") {
  std::mt19937_64 rng(3);
  const int in = 4, H = 5;
  GruCell gru("g", in, H);
  gru.init(rng);
  const Matrix x = randn(3, in, rng);
  const Matrix h = randn(3, H, rng);
  Tape tape;
  const Matrix got = tape.value(gru.step(tape, tape.constant(x), tape.constant(h)));

  const Matrix gi = (x * gru.input().weight.value.transpose()).rowwise() + RowVector(gru.input().bias.value);
  const Matrix gh = (h * gru.recurrent().weight.value.transpose()).rowwise() + RowVector(gru.recurrent().bias.value);
  const Matrix r = sig(gi.leftCols(H) + gh.leftCols(H));
  const Matrix u = sig(gi.middleCols(H, H) + gh.middleCols(H, H));
  const Matrix n = (gi.rightCols(H).array() + r.array() * gh.rightCols(H).array()).tanh().matrix();
  const Matrix want = ((1.0 - u.array()) * n.array() + u.array() * h.array()).matrix();
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("composite graph gradients match finite differences") {
  std::mt19937_64 rng(4);
  Linear a("a", 3, 4);
  Linear b("b", 4, 3);
  a.init_uniform(rng);
  b.init_uniform(rng);
  ParamGroup group;
  a.collect(group);
  b.collect(group);
  const Matrix x = randn(5, 3, rng);
  const std::vector<int> idx{0, 2, 1, 1, 0};
  auto loss = [&](Tape& t) {
    const Var h = t.linear(t.constant(x), a);
    const Var mix = t.add(t.tanh(h), t.mul(t.sigmoid(h), t.clamp(h, -0.5, 0.5)));
    const Var cat = t.concat_cols(std::vector<Var>{t.slice_cols(mix, 0, 2), t.exp(t.slice_cols(mix, 2, 2))});
    const Var logits = t.linear(t.relu(t.add_scalar(cat, 0.1)), b);
    const Var lp = t.log_softmax(logits);
    const Var picked = t.pick(lp, idx);
    const Var rows = t.mul_rows(t.square(lp), picked);
    const Var stacked = t.concat_rows(std::vector<Var>{rows, t.scale(rows, 0.5)});
    return t.add(t.mean(t.row_sum(stacked)), t.sum(t.slice_rows(picked, 1, 3)));
  };
  const GradCheckReport rep = finite_diff_check(loss, group, 1e-6);
  CHECK(rep.passed());
  CHECK(rep.checked > 20);
}

TEST_CASE("gru gradients through time match finite differences") {
  std::mt19937_64 rng(5);
  GruCell gru("g", 3, 4);
  gru.init(rng);
  ParamGroup group;
  gru.collect(group);
  std::vector<Matrix> xs;
  for (int t = 0; t < 4; ++t) xs.push_back(randn(2, 3, rng));
  auto loss = [&](Tape& t) {
    Var h = t.constant(Matrix::Zero(2, 4));
    for (const auto& x : xs) h = gru.step(t, t.constant(x), h);
    return t.sum(t.square(h));
  };
  const GradCheckReport rep = finite_diff_check(loss, group, 1e-5);
  CHECK(rep.passed());
  CHECK(rep.max_rel_error < 1e-5);
}

TEST_CASE("frozen layers and constants receive no gradient") {
  std::mt19937_64 rng(6);
  Linear live("live", 2, 2);
  Linear frozen("frozen", 2, 2);
  live.init_uniform(rng);
  frozen.init_uniform(rng);
  Tape tape;
  const Var x = tape.constant(randn(3, 2, rng));
  const Var y = tape.linear(tape.linear(x, frozen, false), live);
  tape.backward(tape.sum(y));
  CHECK(frozen.weight.grad.isZero(0.0));
  CHECK(frozen.bias.grad.isZero(0.0));
  CHECK_FALSE(live.weight.grad.isZero(0.0));
}

TEST_CASE("backward rejects non-finite losses") {
  Tape tape;
  const Var l = tape.scalar_constant(std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(tape.backward(l), TrainingFault);
}

TEST_CASE("uniform logits give entropy ln 6") {
  Tape tape;
  const Var lp = tape.log_softmax(tape.constant(Matrix::Zero(1, 6)));
  const double h = -tape.item(tape.sum(tape.mul(tape.exp(lp), lp)));
  CHECK(h == doctest::Approx(std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("adam first step moves each entry by lr against the gradient sign") {
  Parameter p("p", 1, 3);
  p.value << 1.0, -2.0, 0.5;
  p.grad << 0.3, -4.0, 1e-3;
  ParamGroup g;
  g.add(p);
  const Matrix before = p.value;
  Adam opt(g, 0.01);
  opt.step();
  for (int j = 0; j < 3; ++j) {
    const double gj = p.grad(0, j);
    const double want = before(0, j) - 0.01 * gj / (std::abs(gj) + 1e-8);
    CHECK(p.value(0, j) == doctest::Approx(want).epsilon(1e-14));
  }
  CHECK(opt.steps() == 1);
}

TEST_CASE("adam second step follows the bias-corrected moments") {
  Parameter p("p", 1, 1);
  p.value(0, 0) = 0.0;
  ParamGroup g;
  g.add(p);
  Adam opt(g, 0.1);
  p.grad(0, 0) = 1.0;
  opt.step();
  p.grad(0, 0) = -2.0;
  opt.step();
  const double m = 0.9 * (0.1 * 1.0) + 0.1 * -2.0;
  const double v = 0.999 * (0.001 * 1.0) + 0.001 * 4.0;
  const double mh = m / (1 - 0.81);
  const double vh = v / (1 - 0.999 * 0.999);
  const double want = -0.1 * 1.0 / (1.0 + 1e-8) - 0.1 * mh / (std::sqrt(vh) + 1e-8);
  CHECK(p.value(0, 0) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("adam leaves parameters untouched on a non-finite gradient") {
  Parameter p("p", 1, 2);
  p.value << 1.0, 2.0;
  p.grad << 0.5, std::numeric_limits<double>::infinity();
  ParamGroup g;
  g.add(p);
  Adam opt(g, 0.1);
  CHECK_THROWS_AS(opt.step(), TrainingFault);
  CHECK(p.value(0, 0) == 1.0);
  CHECK(p.value(0, 1) == 2.0);
}

TEST_CASE("hard copy checks shapes") {
  Parameter a("a", 2, 2), b("b", 2, 2), c("c", 3, 2);
  a.value.setConstant(1.5);
  ParamGroup ga, gb, gc;
  ga.add(a);
  gb.add(b);
  gc.add(c);
  hard_copy(ga, gb);
  CHECK(params_equal(ga, gb));
  CHECK_THROWS_AS(hard_copy(ga, gc), ConfigError);
}

TEST_CASE("periodic schedule counts multiples crossed") {
  PeriodicSchedule s(100);
  CHECK(s.crossings(0, 99) == 0);
  CHECK(s.crossings(99, 100) == 1);
  CHECK(s.crossings(100, 100) == 0);
  CHECK(s.crossings(50, 350) == 3);
  CHECK(PeriodicSchedule(0).crossings(0, 1000) == 0);
}

TEST_CASE("gaussian head clamps log sigma") {
  Tape tape;
  Matrix raw(1, 4);
  raw << 0.2, -0.3, 50.0, -50.0;
  const GaussianHead h = gaussian_head(tape, tape.constant(raw), 2);
  CHECK(tape.value(h.log_sigma)(0, 0) == kLogSigmaMax);
  CHECK(tape.value(h.log_sigma)(0, 1) == kLogSigmaMin);
  Matrix noise(1, 2);
  noise << 1.0, -1.0;
  const Matrix z = tape.value(gaussian_sample(tape, h, noise));
  CHECK(z(0, 0) == doctest::Approx(0.2 + std::exp(2.0)));
  CHECK(z(0, 1) == doctest::Approx(-0.3 - std::exp(-10.0)));
}

}  // TEST_SUITE
